//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes primitive arguments and returns a JSON string, so the
//! same functions are callable from native tests.

use hyperkloos::bilinear::{
    make_weights, theorem_delta, trivial_bound, type2_sum, IntervalSpec, SampleSet, Support,
    TrivialForm, WeightKind,
};
use hyperkloos::energy::{CountMethod, EnergyReport};
use hyperkloos::kloosterman::spectral_table;
use hyperkloos::sweep::sub_seed;
use hyperkloos::{deligne_excess, Budget, PrimeField};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

/// Largest modulus the demo accepts; keeps each call well under a second.
pub const MAX_P: u32 = 1 << 20;

fn field(p: u32) -> Result<PrimeField, String> {
    if p > MAX_P {
        return Err(format!("demo limit: p <= {MAX_P}"));
    }
    PrimeField::new(p as u64).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

#[derive(Serialize)]
struct TableView {
    p: u32,
    r: u32,
    re: Vec<f64>,
    im: Vec<f64>,
    max_abs: f64,
    deligne_excess: f64,
    identity_defect: f64,
}

/// `K_{r,p}(n)` for `n = 1..p-1` with the Deligne and identity checks.
#[wasm_bindgen]
pub fn kloosterman_table(p: u32, r: u32) -> Result<String, String> {
    let field = field(p)?;
    let table = spectral_table(&field, r).map_err(|e| e.to_string())?;
    Ok(to_json(&TableView {
        p,
        r,
        re: table.values().iter().map(|z| z.re).collect(),
        im: table.values().iter().map(|z| z.im).collect(),
        max_abs: table.max_abs(),
        deligne_excess: deligne_excess(&table),
        identity_defect: table.character_sum_defect(),
    }))
}

#[derive(Serialize)]
struct BilinearView {
    p: u32,
    m: usize,
    n: u32,
    abs_s: f64,
    trivial_bound: f64,
    ratio_s_over_trivial: f64,
    ratio_s_over_mn: f64,
    delta: Option<f64>,
    theorem_bound: Option<f64>,
}

/// Type-II sum over a random `M` of size `m` and `N = {1..n}`.
#[wasm_bindgen]
pub fn bilinear_ratio(p: u32, r: u32, ell: u32, m: u32, n: u32, kind: &str, seed: u64) -> Result<String, String> {
    let field = field(p)?;
    let err = |e: hyperkloos::Error| e.to_string();
    let kind: WeightKind = kind.parse()?;
    let table = spectral_table(&field, r).map_err(err)?;
    let m_set = SampleSet::random(p, m as usize, sub_seed(seed, 0)).map_err(err)?;
    let n_set = IntervalSpec::new(p, 0, n).map_err(err)?;
    let alpha = make_weights(kind, m_set.to_vec(), sub_seed(seed, 1));
    let beta = make_weights(kind, n_set.to_vec(), sub_seed(seed, 2));
    let abs_s = type2_sum(&table, &m_set, &n_set, &alpha, &beta).map_err(err)?.norm();
    let trivial = trivial_bound(r, &beta, m_set.len(), n as usize, TrivialForm::WithDeligneFactor);
    let bb = theorem_delta(m_set.len(), n as usize, p, ell)
        .ok()
        .map(|b| b.with_beta_norm(beta.norm2()));
    Ok(to_json(&BilinearView {
        p,
        m: m_set.len(),
        n,
        abs_s,
        trivial_bound: trivial,
        ratio_s_over_trivial: abs_s / trivial,
        ratio_s_over_mn: abs_s / (m_set.len() as f64 * n as f64),
        delta: bb.as_ref().map(|b| b.delta),
        theorem_bound: bb.and_then(|b| b.theorem_bound),
    }))
}

/// `J(H, M)` for a random `M` of size `m`, with bounds.
#[wasm_bindgen]
pub fn energy(p: u32, h: u32, m: u32, seed: u64, grh: bool) -> Result<String, String> {
    let field = field(p)?;
    let err = |e: hyperkloos::Error| e.to_string();
    let set = SampleSet::random(p, m as usize, seed).map_err(err)?;
    let report = EnergyReport::compute(&field, h, &set, CountMethod::Fast, grh, Budget::DEFAULT).map_err(err)?;
    Ok(to_json(&report))
}
