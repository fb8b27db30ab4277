//! Deterministic parameter sweeps over primes and seeded trials.
//!
//! Every random choice in a trial is drawn from a seed derived from
//! `(master seed, prime, trial index)` by [`trial_seed`], so a sweep can be
//! split across machines and still reproduce byte-identical rows.

use serde::{Deserialize, Serialize};

use crate::bilinear::{
    corollary_check, make_weights, polynomial_twist_sum, theorem_delta, trivial_bound, type2_sum,
    CorollaryReport, IntervalSpec, Polynomial, SampleSet, Support, TrivialForm, WeightKind,
    WeightVector,
};
use crate::budget::Budget;
use crate::energy::{CountMethod, EnergyReport};
use crate::error::Error;
use crate::field::PrimeField;
use crate::kloosterman::{spectral_table, KloostermanTable};
use crate::par;
use crate::proofdiag::{block_range, ProofInstance, ProofReport};
use crate::report::{fmt_f64, fmt_opt};
use crate::sum::sum_real;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(master) ^ p) ^ trial)`
pub fn trial_seed(master: u64, p: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ p) ^ trial)
}

/// Independent stream `k` of a trial: `splitmix64(seed + k)`.
pub fn sub_seed(seed: u64, k: u64) -> u64 {
    splitmix64(seed.wrapping_add(k))
}

/// A size given either directly or as `ceil(p^exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Size {
    Fixed(u32),
    Power { exponent: f64 },
}

impl Size {
    pub fn resolve(&self, p: u32) -> u32 {
        match *self {
            Size::Fixed(n) => n,
            Size::Power { exponent } => (p as f64).powf(exponent).ceil() as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    /// Uniform random subset of F_p^x.
    Random { size: Size },
    /// `{offset + 1, ..., offset + size}`.
    Interval {
        #[serde(default)]
        offset: u32,
        size: Size,
    },
    /// Fixed residues.
    Explicit { elements: Vec<u32> },
    /// `m -> f(m)` for `m = 1..=range`; feeds the polynomial twist.
    Polynomial { coefficients: Vec<i64>, range: Size },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalConfig {
    #[serde(default)]
    pub offset: u32,
    pub length: Size,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySweep {
    #[serde(rename = "H")]
    pub h: Size,
    #[serde(default = "default_count_method")]
    pub method: CountMethod,
}

fn default_count_method() -> CountMethod {
    CountMethod::Fast
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagSweep {
    #[serde(rename = "A")]
    pub a: u32,
    /// Defaults to `floor(N / 2A)`.
    #[serde(rename = "B", default)]
    pub b: Option<u32>,
    #[serde(default)]
    pub block_sum: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<String>,
    pub summary: Option<String>,
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_kinds() -> Vec<WeightKind> {
    vec![WeightKind::Ones]
}

/// Bilinear sweep configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub primes: Vec<u64>,
    pub r: u32,
    #[serde(alias = "ℓ")]
    pub ell: u32,
    pub set: SetSpec,
    pub interval: IntervalConfig,
    /// Trial `i` uses `weight_kinds[i % len]` for both weight vectors.
    #[serde(default = "default_kinds")]
    pub weight_kinds: Vec<WeightKind>,
    pub trials: u32,
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub trivial_form: TrivialForm,
    #[serde(default)]
    pub energy: Option<EnergySweep>,
    #[serde(default)]
    pub diag: Option<DiagSweep>,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    /// Precondition violations; carries the violated inequality.
    Validation(String),
    Infeasible(String),
    /// An inequality that must hold on every row did not.
    Invariant(String),
}

impl std::fmt::Display for SweepError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepError::Validation(m) => write!(f, "validation error: {m}"),
            SweepError::Infeasible(m) => write!(f, "{m}"),
            SweepError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl std::error::Error for SweepError {}

impl From<Error> for SweepError {
    fn from(e: Error) -> Self {
        let msg = format!("{}: {e}", e.kind());
        match e {
            Error::Infeasible { .. } => SweepError::Infeasible(msg),
            _ => SweepError::Validation(msg),
        }
    }
}

pub const CSV_HEADER: &str = "p,r,ℓ,M,N,weight_kind,seed,abs_S,trivial_bound,delta,theorem_bound,ratio_S_over_trivial,ratio_S_over_MN";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: u32,
    pub trial: u32,
    pub r: u32,
    pub ell: u32,
    pub m: usize,
    pub n: u32,
    pub weight_kind: WeightKind,
    pub seed: u64,
    pub abs_s: f64,
    pub trivial_bound: f64,
    pub delta: Option<f64>,
    pub theorem_bound: Option<f64>,
    pub ratio_s_over_trivial: f64,
    pub ratio_s_over_mn: f64,
    #[serde(skip)]
    pub energy: Option<EnergyReport>,
    #[serde(skip)]
    pub diag: Option<ProofReport>,
}

impl SweepRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.p,
            self.r,
            self.ell,
            self.m,
            self.n,
            self.weight_kind,
            self.seed,
            fmt_f64(self.abs_s),
            fmt_f64(self.trivial_bound),
            fmt_opt(self.delta),
            fmt_opt(self.theorem_bound),
            fmt_f64(self.ratio_s_over_trivial),
            fmt_f64(self.ratio_s_over_mn),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeSummary {
    pub p: u32,
    pub trials: u32,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u32,
    pub mean_ratio_s_over_mn: f64,
    pub mean_ratio_s_over_trivial: f64,
    pub max_ratio_s_over_trivial: f64,
    pub delta: Option<f64>,
    /// The length hypothesis of the Delta bound is missed by under 0.1%.
    pub delta_at_boundary: bool,
    pub corollary: CorollaryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub r: u32,
    #[serde(rename = "ℓ")]
    pub ell: u32,
    pub epsilon: f64,
    pub primes: Vec<PrimeSummary>,
    /// `mean |S|/(MN)` at the last prime over that at the first.
    pub decay_ratio: Option<f64>,
    pub energy: Vec<EnergyReport>,
    pub diag: Vec<ProofReport>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepOutput {
    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }
}

fn validation(msg: impl Into<String>) -> SweepError {
    SweepError::Validation(msg.into())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.primes.is_empty() {
            return Err(validation("primes must be nonempty"));
        }
        if self.r < 1 {
            return Err(validation("r >= 1 violated"));
        }
        if self.ell < 2 {
            return Err(validation(format!("ell = {} < 2", self.ell)));
        }
        if self.trials < 1 {
            return Err(validation("trials >= 1 violated"));
        }
        if self.weight_kinds.is_empty() {
            return Err(validation("weight_kinds must be nonempty"));
        }
        if self.epsilon <= 0.0 {
            return Err(validation(format!("epsilon = {} must be > 0", self.epsilon)));
        }
        for &p in &self.primes {
            let field = PrimeField::new(p)?;
            let n = self.interval.length.resolve(field.p());
            IntervalSpec::new(field.p(), self.interval.offset, n)?;
            self.set_size(field.p())?;
        }
        Ok(())
    }

    fn set_size(&self, p: u32) -> Result<usize, SweepError> {
        let size = match &self.set {
            SetSpec::Random { size } => size.resolve(p) as usize,
            SetSpec::Interval { offset, size } => {
                let s = size.resolve(p);
                SampleSet::new(p, (offset + 1..=offset + s).collect())?;
                s as usize
            }
            SetSpec::Explicit { elements } => SampleSet::new(p, elements.clone())?.len(),
            SetSpec::Polynomial { coefficients, range } => {
                if !matches!(Polynomial::new(p, coefficients).degree(), Some(d) if d >= 1) {
                    return Err(Error::ConstantPolynomial.into());
                }
                range.resolve(p) as usize
            }
        };
        if size == 0 {
            return Err(validation("set size M >= 1 violated"));
        }
        if size > p as usize - 1 && !matches!(self.set, SetSpec::Polynomial { .. }) {
            return Err(validation(format!("M = {size} > p - 1 = {}", p - 1)));
        }
        Ok(size)
    }
}

/// Build the set `M` for one trial.
pub fn build_set(spec: &SetSpec, p: u32, seed: u64) -> Result<SampleSet, Error> {
    match spec {
        SetSpec::Random { size } => SampleSet::random(p, size.resolve(p) as usize, seed),
        SetSpec::Interval { offset, size } => {
            SampleSet::new(p, (offset + 1..=offset + size.resolve(p)).collect())
        }
        SetSpec::Explicit { elements } => SampleSet::new(p, elements.clone()),
        SetSpec::Polynomial { .. } => Err(Error::DomainError(
            "a polynomial image is not a set; use it only in bilinear sweeps".into(),
        )),
    }
}

struct PrimeContext {
    field: PrimeField,
    table: KloostermanTable,
    interval: IntervalSpec,
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput, SweepError> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut primes = Vec::new();
    let mut energy = Vec::new();
    let mut diag = Vec::new();

    for &p in &config.primes {
        let field = PrimeField::new(p)?;
        let table = spectral_table(&field, config.r)?;
        let n_len = config.interval.length.resolve(field.p());
        let interval = IntervalSpec::new(field.p(), config.interval.offset, n_len)?;
        let ctx = PrimeContext {
            field,
            table,
            interval,
        };
        let trials = par::map_range(config.trials as usize, |i| run_trial(config, &ctx, i as u32))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;

        let m = trials[0].m;
        let bb = theorem_delta(m, n_len as usize, ctx.field.p(), config.ell).ok();
        let ratios_mn: Vec<f64> = trials.iter().map(|r| r.ratio_s_over_mn).collect();
        let ratios_tr: Vec<f64> = trials.iter().map(|r| r.ratio_s_over_trivial).collect();
        primes.push(PrimeSummary {
            p: ctx.field.p(),
            trials: config.trials,
            m,
            n: n_len,
            mean_ratio_s_over_mn: sum_real(ratios_mn.iter().copied()) / trials.len() as f64,
            mean_ratio_s_over_trivial: sum_real(ratios_tr.iter().copied()) / trials.len() as f64,
            max_ratio_s_over_trivial: ratios_tr.iter().copied().fold(0.0, f64::max),
            delta: bb.as_ref().map(|b| b.delta),
            delta_at_boundary: bb.as_ref().is_some_and(|b| b.at_boundary),
            corollary: corollary_check(m, n_len as usize, ctx.field.p(), config.epsilon),
        });
        for mut row in trials {
            energy.extend(row.energy.take());
            diag.extend(row.diag.take());
            rows.push(row);
        }
    }

    let decay_ratio = match (primes.first(), primes.last()) {
        (Some(a), Some(b)) if primes.len() > 1 && a.mean_ratio_s_over_mn > 0.0 => {
            Some(b.mean_ratio_s_over_mn / a.mean_ratio_s_over_mn)
        }
        _ => None,
    };
    let summary = SweepSummary {
        rows: rows.len(),
        r: config.r,
        ell: config.ell,
        epsilon: config.epsilon,
        primes,
        decay_ratio,
        energy,
        diag,
    };
    Ok(SweepOutput { rows, summary })
}

fn run_trial(config: &SweepConfig, ctx: &PrimeContext, trial: u32) -> Result<SweepRow, SweepError> {
    let p = ctx.field.p();
    let seed = trial_seed(config.seed, p as u64, trial as u64);
    let kind = config.weight_kinds[trial as usize % config.weight_kinds.len()];
    let n_set = &ctx.interval;
    let beta = make_weights(kind, n_set.to_vec(), sub_seed(seed, 2));

    let (s, m_size, m_set) = match &config.set {
        SetSpec::Polynomial { coefficients, range } => {
            let range = range.resolve(p);
            let f = Polynomial::new(p, coefficients);
            let alpha = make_weights(kind, (1..=range).collect(), sub_seed(seed, 1));
            let s = polynomial_twist_sum(&ctx.table, &f, range, n_set, &alpha, &beta)?;
            (s, range as usize, None)
        }
        spec => {
            let m_set = build_set(spec, p, sub_seed(seed, 0))?;
            let alpha = make_weights(kind, m_set.to_vec(), sub_seed(seed, 1));
            let s = type2_sum(&ctx.table, &m_set, n_set, &alpha, &beta)?;
            (s, m_set.len(), Some((m_set, alpha)))
        }
    };

    let abs_s = s.norm();
    let n = n_set.len();
    let trivial = trivial_bound(config.r, &beta, m_size, n as usize, config.trivial_form);
    let literal = trivial_bound(config.r, &beta, m_size, n as usize, TrivialForm::WithDeligneFactor);
    if abs_s > literal + 1e-9 {
        return Err(SweepError::Invariant(format!(
            "p = {p}, trial = {trial}: |S| = {abs_s} exceeds r ||beta|| M N^(1/2) = {literal}"
        )));
    }
    let bb = theorem_delta(m_size, n as usize, p, config.ell)
        .ok()
        .map(|b| b.with_beta_norm(beta.norm2()));

    let energy = match (&config.energy, &m_set) {
        (Some(e), Some((set, _))) => {
            let h = e.h.resolve(p).min(p);
            let rep = EnergyReport::compute(&ctx.field, h, set, e.method, false, config.budget)?;
            if !rep.lower_bounds_hold() {
                return Err(SweepError::Invariant(format!(
                    "p = {p}, trial = {trial}: J = {} below a lower bound",
                    rep.j
                )));
            }
            Some(rep)
        }
        _ => None,
    };

    let diag = match (&config.diag, m_set) {
        (Some(d), Some((set, alpha))) => {
            let b = d.b.unwrap_or(n / (2 * d.a.max(1)));
            let eta = make_weights(WeightKind::Unimodular, block_range(b), sub_seed(seed, 3));
            let inst = ProofInstance::new(
                ctx.field.clone(),
                ctx.table.clone(),
                set,
                *n_set,
                alpha,
                d.a,
                b,
                eta,
                config.ell,
            )?;
            let rep = inst.report(Some(&beta), d.block_sum, config.budget)?;
            if !rep.checks.all() {
                return Err(SweepError::Invariant(format!(
                    "p = {p}, trial = {trial}: diagnostic checks failed {:?}",
                    rep.checks
                )));
            }
            Some(rep)
        }
        _ => None,
    };

    Ok(SweepRow {
        p,
        trial,
        r: config.r,
        ell: config.ell,
        m: m_size,
        n,
        weight_kind: kind,
        seed,
        abs_s,
        trivial_bound: trivial,
        delta: bb.as_ref().map(|b| b.delta),
        theorem_bound: bb.and_then(|b| b.theorem_bound),
        ratio_s_over_trivial: if trivial > 0.0 { abs_s / trivial } else { 0.0 },
        ratio_s_over_mn: abs_s / (m_size as f64 * n as f64),
        energy,
        diag,
    })
}

fn default_ones() -> WeightKind {
    WeightKind::Ones
}

fn default_eta() -> WeightKind {
    WeightKind::Unimodular
}

fn default_true() -> bool {
    true
}

/// Single-instance proof diagnostic configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagConfig {
    pub p: u64,
    pub r: u32,
    #[serde(alias = "ℓ")]
    pub ell: u32,
    pub set: SetSpec,
    pub interval: IntervalConfig,
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "B", default)]
    pub b: Option<u32>,
    #[serde(default = "default_ones")]
    pub alpha: WeightKind,
    #[serde(default = "default_ones")]
    pub beta: WeightKind,
    #[serde(default = "default_eta")]
    pub eta: WeightKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default = "default_true")]
    pub block_sum: bool,
    #[serde(default)]
    pub output: Option<String>,
}

pub fn run_diag(config: &DiagConfig) -> Result<ProofReport, SweepError> {
    let field = PrimeField::new(config.p)?;
    let p = field.p();
    if config.eta == WeightKind::Bounded {
        return Err(validation("eta must be unimodular: use \"ones\" or \"unimodular\""));
    }
    let table = spectral_table(&field, config.r)?;
    let m_set = build_set(&config.set, p, sub_seed(config.seed, 0))?;
    let n_len = config.interval.length.resolve(p);
    let n_set = IntervalSpec::new(p, config.interval.offset, n_len)?;
    let alpha = make_weights(config.alpha, m_set.to_vec(), sub_seed(config.seed, 1));
    let beta: WeightVector = make_weights(config.beta, n_set.to_vec(), sub_seed(config.seed, 2));
    let b = config.b.unwrap_or(n_len / (2 * config.a.max(1)));
    let eta = make_weights(config.eta, block_range(b), sub_seed(config.seed, 3));
    let inst = ProofInstance::new(field, table, m_set, n_set, alpha, config.a, b, eta, config.ell)?;
    Ok(inst.report(Some(&beta), config.block_sum, config.budget)?)
}
