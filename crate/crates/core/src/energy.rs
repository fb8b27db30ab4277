//! Mixed multiplicative energy `J(H, M)`: the number of solutions of
//! `x m = y n (mod p)` with `x, y in [1, H)` and `m, n in M`, together with
//! the shape of its known upper bounds and two exact lower bounds.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bilinear::{SampleSet, LOG_SLACK};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::report::{fmt_f64, fmt_opt};

/// Dense counters are used up to this modulus, a hash map beyond it.
pub const DENSE_COUNTER_LIMIT: u32 = 1 << 26;

pub const SHAPE_ONLY: &str = "shape only - implied constants unknown";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    /// `sum_c T(c)^2` with `T(c) = #{(x, m) : x m = c}`
    Fast,
    /// Quadruple loop.
    Brute,
}

impl FromStr for CountMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fast" => Ok(CountMethod::Fast),
            "brute" => Ok(CountMethod::Brute),
            other => Err(format!("unknown count method {other:?}")),
        }
    }
}

fn check_count_args(field: &PrimeField, h: u32, set: &SampleSet) -> Result<()> {
    if h < 2 || h > field.p() {
        return Err(Error::PreconditionFailed(format!(
            "H = {h} outside 2 <= H <= p = {}",
            field.p()
        )));
    }
    if set.is_empty() {
        return Err(Error::PreconditionFailed("set M is empty".into()));
    }
    if set.p() != field.p() {
        return Err(Error::DomainError("set modulus differs from field".into()));
    }
    Ok(())
}

pub fn count_j(field: &PrimeField, h: u32, set: &SampleSet, method: CountMethod, budget: Budget) -> Result<u64> {
    count_j_with_limit(field, h, set, method, budget, DENSE_COUNTER_LIMIT)
}

fn count_j_with_limit(
    field: &PrimeField,
    h: u32,
    set: &SampleSet,
    method: CountMethod,
    budget: Budget,
    dense_limit: u32,
) -> Result<u64> {
    check_count_args(field, h, set)?;
    let xs = (h - 1) as u128;
    let ms = set.len() as u128;
    let p = field.p() as u64;
    match method {
        CountMethod::Fast => {
            budget.check(xs * ms + p as u128)?;
            let products = set
                .elements()
                .iter()
                .flat_map(|&m| (1..h as u64).map(move |x| (x * m as u64 % p) as usize));
            if field.p() <= dense_limit {
                let mut counts = vec![0u64; p as usize];
                products.for_each(|c| counts[c] += 1);
                Ok(counts.iter().map(|&t| t * t).sum())
            } else {
                let mut counts: HashMap<usize, u64> = HashMap::new();
                products.for_each(|c| *counts.entry(c).or_default() += 1);
                let mut squares: Vec<u64> = counts.values().map(|&t| t * t).collect();
                squares.sort_unstable();
                Ok(squares.iter().sum())
            }
        }
        CountMethod::Brute => {
            budget.check((xs * ms).pow(2))?;
            let mut count = 0u64;
            for x in 1..h as u64 {
                for y in 1..h as u64 {
                    for &m in set.elements() {
                        let lhs = x * m as u64 % p;
                        for &n in set.elements() {
                            if lhs == y * n as u64 % p {
                                count += 1;
                            }
                        }
                    }
                }
            }
            Ok(count)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyCase {
    /// `H >= p^{2/3}`
    LargeH,
    /// `H < p^{2/3}`, `M >= p^{1/3}`
    Middle,
    /// `H < p^{2/3}`, `M < p^{1/3}`
    Small,
}

impl fmt::Display for EnergyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyCase::LargeH => "large_h",
            EnergyCase::Middle => "middle",
            EnergyCase::Small => "small",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    #[default]
    Lemma,
    /// `H^2 M^2 / p + H M`
    Grh,
}

/// Upper-bound shape with every `p^{o(1)}` factor and implied constant set to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaBound {
    pub case: EnergyCase,
    pub variant: BoundVariant,
    /// `H^2 M^2 / p`; `None` in the small case where it never dominates.
    pub leading: Option<f64>,
    pub case_term: f64,
    pub total: f64,
    pub label: &'static str,
}

pub fn energy_case(h: u32, m: usize, p: u32) -> EnergyCase {
    let lp = (p as f64).ln();
    if (h as f64).ln() >= 2.0 / 3.0 * lp - LOG_SLACK {
        EnergyCase::LargeH
    } else if (m as f64).ln() >= lp / 3.0 - LOG_SLACK {
        EnergyCase::Middle
    } else {
        EnergyCase::Small
    }
}

pub fn lemma_bound_value(h: u32, m: usize, p: u32, variant: BoundVariant) -> LemmaBound {
    let (hf, mf, pf) = (h as f64, m as f64, p as f64);
    let case = energy_case(h, m, p);
    let leading = hf * hf * mf * mf / pf;
    let (leading, case_term) = match variant {
        BoundVariant::Grh => (Some(leading), hf * mf),
        BoundVariant::Lemma => match case {
            EnergyCase::LargeH => (Some(leading), hf * mf),
            EnergyCase::Middle => (Some(leading), hf * mf.powf(1.75) * pf.powf(-0.25) + mf * mf),
            EnergyCase::Small => (None, hf * mf + mf * mf),
        },
    };
    LemmaBound {
        case,
        variant,
        leading,
        case_term,
        total: leading.unwrap_or(0.0) + case_term,
        label: SHAPE_ONLY,
    }
}

/// `(H - 1) M` from the diagonal `x = y, m = n`, and `((H - 1) M)^2 / (p - 1)`
/// from Cauchy-Schwarz over the at most `p - 1` classes.
pub fn energy_lower_bounds(h: u32, m: usize, p: u32) -> (u64, f64) {
    let pairs = (h as u64 - 1) * m as u64;
    (pairs, (pairs as f64).powi(2) / (p as f64 - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub p: u32,
    pub h: u32,
    pub m: usize,
    pub j: u64,
    pub bound: LemmaBound,
    pub grh: Option<LemmaBound>,
    pub diagonal_lb: u64,
    pub cauchy_lb: f64,
}

impl EnergyReport {
    pub fn compute(
        field: &PrimeField,
        h: u32,
        set: &SampleSet,
        method: CountMethod,
        with_grh: bool,
        budget: Budget,
    ) -> Result<Self> {
        let j = count_j(field, h, set, method, budget)?;
        let (diagonal_lb, cauchy_lb) = energy_lower_bounds(h, set.len(), field.p());
        Ok(Self {
            p: field.p(),
            h,
            m: set.len(),
            j,
            bound: lemma_bound_value(h, set.len(), field.p(), BoundVariant::Lemma),
            grh: with_grh.then(|| lemma_bound_value(h, set.len(), field.p(), BoundVariant::Grh)),
            diagonal_lb,
            cauchy_lb,
        })
    }

    /// Both exact lower bounds hold.
    pub fn lower_bounds_hold(&self) -> bool {
        self.j >= self.diagonal_lb && self.j as f64 >= self.cauchy_lb - 1e-9
    }

    pub const CSV_HEADER: &'static str =
        "p,H,M,J,case,leading,case_term,bound_total,diagonal_lb,cauchy_lb";

    /// One CSV row. With the GRH variant requested, the bound columns carry it.
    pub fn csv_row(&self) -> String {
        let b = self.grh.as_ref().unwrap_or(&self.bound);
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.p,
            self.h,
            self.m,
            self.j,
            b.case,
            fmt_opt(b.leading),
            fmt_f64(b.case_term),
            fmt_f64(b.total),
            self.diagonal_lb,
            fmt_f64(self.cauchy_lb)
        )
    }
}
