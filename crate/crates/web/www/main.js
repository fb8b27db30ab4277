import init, { kloosterman_table, bilinear_ratio, energy } from "./pkg/hyperkloos_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(out, f) {
  out.classList.remove("err");
  try {
    f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e);
  }
}

function plotTable(canvas, v) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  const scale = (w / 2 - 10) / Math.max(v.r, 1);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.arc(w / 2, h / 2, v.r * scale, 0, 2 * Math.PI);
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.stroke();
  ctx.fillStyle = "rgba(20, 60, 160, 0.35)";
  for (let i = 0; i < v.re.length; i++) {
    ctx.fillRect(w / 2 + v.re[i] * scale - 1, h / 2 - v.im[i] * scale - 1, 2, 2);
  }
}

function plotRatios(canvas, ratios) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  const top = Math.max(...ratios, 1e-12);
  const bw = w / ratios.length;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#4a7";
  ratios.forEach((x, i) => {
    const bh = (x / top) * (h - 10);
    ctx.fillRect(i * bw + 1, h - bh, bw - 2, bh);
  });
}

await init();

$("t-run").onclick = () => show($("t-out"), () => {
  const v = JSON.parse(kloosterman_table(num("t-p"), num("t-r")));
  plotTable($("t-plot"), v);
  $("t-out").textContent =
    `max |K| = ${v.max_abs.toFixed(6)}   (bound r = ${v.r})\n` +
    `Deligne excess = ${v.deligne_excess.toExponential(3)}\n` +
    `character-sum defect = ${v.identity_defect.toExponential(3)}`;
});

$("b-run").onclick = () => show($("b-out"), () => {
  const rows = [];
  for (let t = 0; t < num("b-t"); t++) {
    rows.push(JSON.parse(bilinear_ratio(num("b-p"), num("b-r"), num("b-l"), num("b-m"), num("b-n"), $("b-k").value, BigInt(t))));
  }
  const ratios = rows.map((x) => x.ratio_s_over_trivial);
  plotRatios($("b-plot"), ratios);
  const mean = (a) => a.reduce((s, x) => s + x, 0) / a.length;
  const d = rows[0].delta;
  $("b-out").textContent =
    `mean |S| / trivial = ${mean(ratios).toExponential(4)}\n` +
    `mean |S| / (MN)    = ${mean(rows.map((x) => x.ratio_s_over_mn)).toExponential(4)}\n` +
    `Delta = ${d === null ? "n/a (N below p^(3/(2l)))" : d.toFixed(6)}`;
});

$("e-run").onclick = () => show($("e-out"), () => {
  const v = JSON.parse(energy(num("e-p"), num("e-h"), num("e-m"), BigInt(num("e-s")), $("e-g").checked));
  const b = v.grh ?? v.bound;
  $("e-out").textContent =
    `J = ${v.j}\ncase = ${b.case}\nbound total = ${b.total.toFixed(3)}  (${b.label})\n` +
    `diagonal lower bound = ${v.diagonal_lb}\nCauchy lower bound = ${v.cauchy_lb.toFixed(3)}`;
});
