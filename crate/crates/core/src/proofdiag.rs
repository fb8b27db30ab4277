//! Exact finite quantities behind the Type-II bound: the Cauchy
//! decomposition of `|S|^2`, the multiplicities `nu(s, t, u)` with their
//! moments `R1` and `R2`, the shifted block sum `S`, and the parameter
//! choices for `A` and `B`.
//!
//! Only relations that hold without implied constants are checked here.
//! Dyadic ranges are inclusive: `a ~ A` means `A <= a <= 2A`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::bilinear::{type2_sum, IntervalSpec, SampleSet, Support, WeightVector};
use crate::budget::Budget;
use crate::energy::{count_j, CountMethod};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::kloosterman::KloostermanTable;
use crate::par;
use crate::sum::{sum_complex, sum_real, CompensatedSum, KahanSum};

/// Terms of the Cauchy step `|S|^2 <= ||beta||^2 (diagonal + sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaDecomposition {
    /// `sum_n |sum_m alpha_m K(mn)|^2`
    pub s2: f64,
    /// `sum_m |alpha_m|^2 sum_n |K(mn)|^2`
    pub diagonal: f64,
    /// Off-diagonal double sum from its definition.
    pub sigma: Complex64,
    /// `s2 - diagonal`
    pub sigma_from_s2: f64,
    pub abs_s_sq: f64,
    /// `||beta||_2^2 * s2`
    pub cauchy_rhs: f64,
}

pub fn sigma_decomposition<N: Support + ?Sized>(
    table: &KloostermanTable,
    m_set: &SampleSet,
    n_set: &N,
    alpha: &WeightVector,
    beta: &WeightVector,
) -> Result<SigmaDecomposition> {
    let s = type2_sum(table, m_set, n_set, alpha, beta)?;
    let p = table.p() as u64;
    let ms = m_set.elements();
    let ns = n_set.to_vec();
    let a = alpha.values();

    // columns[i][j] = K(m_i n_j)
    let columns: Vec<Vec<Complex64>> = ms
        .iter()
        .map(|&m| ns.iter().map(|&n| table.at((m as u64 * n as u64 % p) as u32)).collect())
        .collect();

    let s2 = sum_real((0..ns.len()).map(|j| {
        sum_complex(columns.iter().zip(a).map(|(col, &w)| w * col[j])).norm_sqr()
    }));
    let diagonal = sum_real(
        columns
            .iter()
            .zip(a)
            .map(|(col, w)| w.norm_sqr() * sum_real(col.iter().map(|k| k.norm_sqr()))),
    );
    let off = par::map_range(ms.len(), |i| {
        let mut acc = CompensatedSum::default();
        for (i2, col2) in columns.iter().enumerate() {
            if i2 == i {
                continue;
            }
            let inner = sum_complex(columns[i].iter().zip(col2).map(|(k1, k2)| k1 * k2.conj()));
            acc.add(a[i] * a[i2].conj() * inner);
        }
        acc.value()
    });
    let sigma = sum_complex(off);

    Ok(SigmaDecomposition {
        s2,
        diagonal,
        sigma,
        sigma_from_s2: s2 - diagonal,
        abs_s_sq: s.norm_sqr(),
        cauchy_rhs: beta.norm2().powi(2) * s2,
    })
}

/// `nu(s, t, u) = sum |alpha_{m1} alpha_{m2}|` over `a ~ A`, `m1 != m2`,
/// `n in N` with `(a m1, a m2, n / a) = (s, t, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuMoments {
    pub nu: BTreeMap<(u32, u32, u32), f64>,
    /// `sum nu`
    pub r1: f64,
    /// `sum nu^2`
    pub r2: f64,
}

pub fn nu_r1_r2(
    field: &PrimeField,
    m_set: &SampleSet,
    n_set: &IntervalSpec,
    a_base: u32,
    alpha: &WeightVector,
    budget: Budget,
) -> Result<NuMoments> {
    if a_base < 1 || 2 * a_base as u64 >= field.p() as u64 {
        return Err(Error::PreconditionFailed(format!(
            "a-range {{{a_base}..{}}} must lie in [1, p = {})",
            2 * a_base as u64,
            field.p()
        )));
    }
    if alpha.indices() != m_set.elements() {
        return Err(Error::IndexMismatch("alpha does not match M".into()));
    }
    let m = m_set.len() as u128;
    budget.check((a_base as u128 + 1) * m * m.saturating_sub(1) * n_set.len() as u128)?;

    let ms = m_set.elements();
    let mags: Vec<f64> = alpha.values().iter().map(|z| z.norm()).collect();
    let mut nu: BTreeMap<(u32, u32, u32), KahanSum> = BTreeMap::new();
    for a in a_base..=2 * a_base {
        let a_inv = field.inv(a)?;
        for (i1, &m1) in ms.iter().enumerate() {
            let s = field.mul(a, m1);
            for (i2, &m2) in ms.iter().enumerate() {
                if i1 == i2 {
                    continue;
                }
                let t = field.mul(a, m2);
                let w = mags[i1] * mags[i2];
                for n in n_set.iter() {
                    nu.entry((s, t, field.mul(a_inv, n))).or_default().add(w);
                }
            }
        }
    }
    let nu: BTreeMap<_, f64> = nu.into_iter().map(|(k, v)| (k, v.value())).collect();
    let r1 = sum_real(nu.values().copied());
    let r2 = sum_real(nu.values().map(|v| v * v));
    Ok(NuMoments { nu, r1, r2 })
}

/// `S = sum_{s != t, u} |sum_{b ~ B} eta_b K(s(u+b)) conj K(t(u+b))|^{2 ell}`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSum {
    pub value: f64,
    /// `(u, b)` pairs with `u + b = 0 mod p`, left out of the inner sums.
    pub skipped_shifts: u64,
    /// `p^3 B^ell`, for qualitative comparison only.
    pub shape: f64,
}

/// `eta` must be indexed by `B, B+1, ..., 2B`.
pub fn block_sum_s(
    field: &PrimeField,
    table: &KloostermanTable,
    ell: u32,
    b_base: u32,
    eta: &WeightVector,
    budget: Budget,
) -> Result<BlockSum> {
    let bs = block_range(b_base);
    if eta.indices() != bs.as_slice() {
        return Err(Error::IndexMismatch(format!(
            "eta must be indexed by {b_base}..={}",
            2 * b_base as u64
        )));
    }
    if table.p() != field.p() {
        return Err(Error::DomainError("table modulus differs from field".into()));
    }
    let p = field.p();
    let q = p as u128 - 1;
    budget.check(q * q * q * bs.len() as u128)?;

    let eta = eta.values();
    let mut skipped_shifts = 0u64;
    let shifts: Vec<Vec<(usize, u32)>> = (1..p)
        .map(|u| {
            bs.iter()
                .enumerate()
                .filter_map(|(i, &b)| {
                    let w = field.add(u, b);
                    if w == 0 {
                        skipped_shifts += 1;
                        None
                    } else {
                        Some((i, w))
                    }
                })
                .collect()
        })
        .collect();

    let per_u = par::map_range(shifts.len(), |ui| {
        let shift = &shifts[ui];
        let mut acc = KahanSum::default();
        let mut left = vec![Complex64::new(0.0, 0.0); shift.len()];
        for s in 1..p {
            for (slot, &(i, w)) in left.iter_mut().zip(shift) {
                *slot = eta[i] * table.at(field.mul(s, w));
            }
            for t in 1..p {
                if t == s {
                    continue;
                }
                let inner = sum_complex(
                    left.iter()
                        .zip(shift)
                        .map(|(l, &(_, w))| l * table.at(field.mul(t, w)).conj()),
                );
                acc.add(inner.norm_sqr().powi(ell as i32));
            }
        }
        acc.value()
    });

    Ok(BlockSum {
        value: sum_real(per_u),
        skipped_shifts,
        shape: (p as f64).powi(3) * (b_base as f64).powi(ell as i32),
    })
}

/// `B, B+1, ..., 2B`
pub fn block_range(b_base: u32) -> Vec<u32> {
    (b_base..=2 * b_base).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParameterChoice {
    pub b: u32,
    pub a: u32,
}

/// `B = floor(0.25 p^{3/(2 ell)})` and `A = floor(0.5 N / B)`.
pub fn parameter_choices(n: u32, p: u32, ell: u32) -> Result<ParameterChoice> {
    if ell < 2 {
        return Err(Error::PreconditionFailed(format!("ell = {ell} < 2")));
    }
    let b = (0.25 * (p as f64).powf(3.0 / (2.0 * ell as f64))).floor() as u32;
    if b == 0 {
        return Err(Error::PreconditionFailed(format!(
            "B = floor(0.25 p^(3/(2 ell))) = 0 for p = {p}, ell = {ell}"
        )));
    }
    let a = (0.5 * n as f64 / b as f64).floor() as u32;
    if a == 0 {
        return Err(Error::PreconditionFailed(format!(
            "A = floor(0.5 N / B) = 0 for N = {n}, B = {b}"
        )));
    }
    debug_assert!(2 * a as u64 * b as u64 <= n as u64);
    Ok(ParameterChoice { b, a })
}

/// `ceil((ell - 1) / 2) >= ell / 3`, in integers.
pub fn ceil_half_dominates_third(ell: u64) -> bool {
    assert!(ell >= 1);
    3 * (ell - 1).div_ceil(2) >= ell
}

/// Inputs for a full diagnostic run.
#[derive(Debug, Clone)]
pub struct ProofInstance {
    pub field: PrimeField,
    pub table: KloostermanTable,
    pub m_set: SampleSet,
    pub n_set: IntervalSpec,
    pub alpha: WeightVector,
    pub a_base: u32,
    pub b_base: u32,
    pub eta: WeightVector,
    pub ell: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofReport {
    pub p: u32,
    pub r: u32,
    #[serde(rename = "ℓ")]
    pub ell: u32,
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "B")]
    pub b: u32,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "J_2A")]
    pub j_2a: u64,
    #[serde(rename = "J_2A_plus_2")]
    pub j_2a_plus_2: u64,
    pub sigma: f64,
    pub sigma_im: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    pub diagonal: f64,
    #[serde(rename = "absS_sq")]
    pub abs_s_sq: f64,
    pub cauchy_rhs: f64,
    #[serde(rename = "block_S")]
    pub block_s: Option<f64>,
    pub block_skipped_shifts: Option<u64>,
    #[serde(rename = "shape_p3Bl")]
    pub shape_p3_bl: f64,
    pub checks: ProofChecks,
}

/// Constant-free relations, each evaluated on the instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofChecks {
    /// `|S|^2 <= ||beta||^2 S2`
    pub cauchy: bool,
    /// `S2 = diagonal + sigma`
    pub decomposition: bool,
    /// `diagonal <= r^2 M N`
    pub diagonal_bound: bool,
    /// `R2 <= M N J(2A + 2, M)`
    pub r2_bound: bool,
    /// `|Im sigma| <= 1e-9`
    pub sigma_real: bool,
    /// unit weights only: `R1 = (A + 1) M (M - 1) N`
    pub r1_count: Option<bool>,
}

impl ProofChecks {
    pub fn all(&self) -> bool {
        self.cauchy
            && self.decomposition
            && self.diagonal_bound
            && self.r2_bound
            && self.sigma_real
            && self.r1_count.unwrap_or(true)
    }
}

pub const REL_SLACK: f64 = 1e-9;

fn le_rel(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_SLACK * rhs.abs().max(1.0)
}

fn eq_rel(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_SLACK * a.abs().max(b.abs()).max(1.0)
}

impl ProofInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        field: PrimeField,
        table: KloostermanTable,
        m_set: SampleSet,
        n_set: IntervalSpec,
        alpha: WeightVector,
        a_base: u32,
        b_base: u32,
        eta: WeightVector,
        ell: u32,
    ) -> Result<Self> {
        if 2 * a_base as u64 * b_base as u64 > n_set.len() as u64 {
            return Err(Error::PreconditionFailed(format!(
                "2AB = {} > N = {}",
                2 * a_base as u64 * b_base as u64,
                n_set.len()
            )));
        }
        if eta.values().iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::PreconditionFailed("eta must be unimodular".into()));
        }
        if eta.indices() != block_range(b_base).as_slice() {
            return Err(Error::IndexMismatch("eta must be indexed by B..=2B".into()));
        }
        if !alpha.is_bounded_by_one() {
            return Err(Error::PreconditionFailed(format!(
                "||alpha||_inf = {} > 1",
                alpha.norm_inf()
            )));
        }
        if ell < 1 {
            return Err(Error::PreconditionFailed("ell must be >= 1".into()));
        }
        if table.p() != field.p() || m_set.p() != field.p() || n_set.p() != field.p() {
            return Err(Error::DomainError("instance mixes moduli".into()));
        }
        Ok(Self {
            field,
            table,
            m_set,
            n_set,
            alpha,
            a_base,
            b_base,
            eta,
            ell,
        })
    }

    /// Evaluate every quantity. `beta` defaults to all ones on `N`.
    pub fn report(&self, beta: Option<&WeightVector>, with_block_sum: bool, budget: Budget) -> Result<ProofReport> {
        let ones;
        let beta = match beta {
            Some(b) => b,
            None => {
                ones = WeightVector::ones(self.n_set.to_vec());
                &ones
            }
        };
        let dec = sigma_decomposition(&self.table, &self.m_set, &self.n_set, &self.alpha, beta)?;
        let nu = nu_r1_r2(&self.field, &self.m_set, &self.n_set, self.a_base, &self.alpha, budget)?;
        let p = self.field.p();
        let h_2a = (2 * self.a_base).min(p);
        let h_2a2 = (2 * self.a_base + 2).min(p);
        let j_2a = count_j(&self.field, h_2a, &self.m_set, CountMethod::Fast, budget)?;
        let j_2a_plus_2 = count_j(&self.field, h_2a2, &self.m_set, CountMethod::Fast, budget)?;
        let block = if with_block_sum {
            Some(block_sum_s(&self.field, &self.table, self.ell, self.b_base, &self.eta, budget)?)
        } else {
            None
        };

        let m = self.m_set.len();
        let n = self.n_set.len();
        let r = self.table.r() as f64;
        let unit = self.alpha.values().iter().all(|z| *z == Complex64::new(1.0, 0.0));
        let checks = ProofChecks {
            cauchy: le_rel(dec.abs_s_sq, dec.cauchy_rhs),
            decomposition: eq_rel(dec.s2, dec.diagonal + dec.sigma.re),
            diagonal_bound: le_rel(dec.diagonal, r * r * m as f64 * n as f64),
            r2_bound: nu.r2 <= (m as u64 * n as u64 * j_2a_plus_2) as f64 + REL_SLACK,
            sigma_real: dec.sigma.im.abs() <= 1e-9,
            r1_count: unit.then(|| {
                nu.r1 == ((self.a_base as u64 + 1) * (m * m.saturating_sub(1)) as u64 * n as u64) as f64
            }),
        };
        Ok(ProofReport {
            p,
            r: self.table.r(),
            ell: self.ell,
            a: self.a_base,
            b: self.b_base,
            m,
            n,
            r1: nu.r1,
            r2: nu.r2,
            j_2a,
            j_2a_plus_2,
            sigma: dec.sigma.re,
            sigma_im: dec.sigma.im,
            s2: dec.s2,
            diagonal: dec.diagonal,
            abs_s_sq: dec.abs_s_sq,
            cauchy_rhs: dec.cauchy_rhs,
            block_s: block.as_ref().map(|b| b.value),
            block_skipped_shifts: block.as_ref().map(|b| b.skipped_shifts),
            shape_p3_bl: (p as f64).powi(3) * (self.b_base as f64).powi(self.ell as i32),
            checks,
        })
    }
}
