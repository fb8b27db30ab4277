//! Type-I and Type-II bilinear sums of hyper-Kloosterman sums, the weight
//! vectors they are formed with, and the bound evaluators that go with them.
//!
//! Exponent arithmetic in the bound evaluators is done on natural logs so
//! that range checks at large `p` neither overflow nor depend on the order
//! of multiplication.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kloosterman::KloostermanTable;
use crate::par;
use crate::sum::{sum_complex, sum_real, CompensatedSum};

/// Slack used by every log-space comparison.
pub const LOG_SLACK: f64 = 1e-12;

/// Relative shortfall of `N` below `p^{3/(2 ell)}` still accepted by
/// [`theorem_delta`]. Such instances are flagged with `at_boundary`.
pub const LENGTH_HYPOTHESIS_REL_TOL: f64 = 1e-3;

/// A finite index set inside F_p^x.
pub trait Support {
    fn modulus(&self) -> u32;
    fn cardinality(&self) -> usize;
    fn to_vec(&self) -> Vec<u32>;
}

/// An arbitrary set of distinct nonzero residues, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    p: u32,
    elements: Vec<u32>,
}

impl SampleSet {
    pub fn new(p: u32, mut elements: Vec<u32>) -> Result<Self> {
        elements.sort_unstable();
        if let Some(&bad) = elements.iter().find(|&&x| x == 0 || x >= p) {
            return Err(Error::DomainError(format!(
                "set element {bad} is not a nonzero residue mod {p}"
            )));
        }
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DomainError(format!("duplicate set element {}", w[0])));
        }
        Ok(Self { p, elements })
    }

    /// `size` distinct residues drawn uniformly from `1..p`.
    pub fn random(p: u32, size: usize, seed: u64) -> Result<Self> {
        if size > p as usize - 1 {
            return Err(Error::PreconditionFailed(format!(
                "set size {size} exceeds p - 1 = {}",
                p - 1
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elements = index::sample(&mut rng, p as usize - 1, size)
            .into_iter()
            .map(|i| i as u32 + 1)
            .collect();
        Self::new(p, elements)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `{c m : m in self}`
    pub fn scaled(&self, c: u32) -> Result<Self> {
        let c = c % self.p;
        if c == 0 {
            return Err(Error::DomainError("scaling by 0".into()));
        }
        let p = self.p as u64;
        Self::new(
            self.p,
            self.elements.iter().map(|&m| (m as u64 * c as u64 % p) as u32).collect(),
        )
    }
}

impl Support for SampleSet {
    fn modulus(&self) -> u32 {
        self.p
    }
    fn cardinality(&self) -> usize {
        self.elements.len()
    }
    fn to_vec(&self) -> Vec<u32> {
        self.elements.clone()
    }
}

/// `{B + 1, ..., B + N}` with `B >= 0` and `B + N <= p - 1`, so the block
/// never wraps and never meets a multiple of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSpec {
    p: u32,
    offset: u32,
    len: u32,
}

impl IntervalSpec {
    pub fn new(p: u32, offset: u32, len: u32) -> Result<Self> {
        if len == 0 {
            return Err(Error::PreconditionFailed("interval length N must be >= 1".into()));
        }
        if offset as u64 + len as u64 > p as u64 - 1 {
            return Err(Error::PreconditionFailed(format!(
                "interval {{{}..{}}} leaves 1..{} (B + N <= p - 1 violated)",
                offset as u64 + 1,
                offset as u64 + len as u64,
                p - 1
            )));
        }
        Ok(Self { p, offset, len })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.offset + 1..=self.offset + self.len
    }
}

impl Support for IntervalSpec {
    fn modulus(&self) -> u32 {
        self.p
    }
    fn cardinality(&self) -> usize {
        self.len as usize
    }
    fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Ones,
    Unimodular,
    Bounded,
}

impl WeightKind {
    pub const ALL: [WeightKind; 3] = [WeightKind::Ones, WeightKind::Unimodular, WeightKind::Bounded];
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Ones => "ones",
            WeightKind::Unimodular => "unimodular",
            WeightKind::Bounded => "bounded",
        })
    }
}

impl FromStr for WeightKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ones" => Ok(WeightKind::Ones),
            "unimodular" => Ok(WeightKind::Unimodular),
            "bounded" => Ok(WeightKind::Bounded),
            other => Err(format!("unknown weight kind {other:?}")),
        }
    }
}

/// Complex weights attached to an index set, with cached norms.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    indices: Vec<u32>,
    values: Vec<Complex64>,
    norm2: f64,
    norm_inf: f64,
}

impl WeightVector {
    pub fn new(indices: Vec<u32>, values: Vec<Complex64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::IndexMismatch(format!(
                "{} indices but {} weights",
                indices.len(),
                values.len()
            )));
        }
        let norm2 = sum_real(values.iter().map(|z| z.norm_sqr())).sqrt();
        let norm_inf = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(Self {
            indices,
            values,
            norm2,
            norm_inf,
        })
    }

    pub fn ones(indices: Vec<u32>) -> Self {
        let values = vec![Complex64::new(1.0, 0.0); indices.len()];
        Self::new(indices, values).expect("lengths agree")
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    /// `(sum |w|^sigma)^(1/sigma)` for `sigma > 0`.
    pub fn norm_sigma(&self, sigma: f64) -> f64 {
        assert!(sigma > 0.0, "sigma must be positive");
        sum_real(self.values.iter().map(|z| z.norm().powf(sigma))).powf(1.0 / sigma)
    }

    /// Every weight has modulus at most 1 (up to rounding).
    pub fn is_bounded_by_one(&self) -> bool {
        self.norm_inf <= 1.0 + 1e-12
    }

    pub fn conj(&self) -> Self {
        Self::new(self.indices.clone(), self.values.iter().map(|z| z.conj()).collect())
            .expect("lengths agree")
    }

    fn check_indices(&self, expected: &[u32], name: &str) -> Result<()> {
        if self.indices != expected {
            return Err(Error::IndexMismatch(format!(
                "{name} is indexed by {} entries that do not match the set of size {}",
                self.indices.len(),
                expected.len()
            )));
        }
        Ok(())
    }
}

/// Seeded weights with `|w| <= 1`: all ones, `exp(2 pi i theta)`, or
/// `rho exp(2 pi i theta)` with `rho, theta` uniform in `[0, 1)`.
pub fn make_weights(kind: WeightKind, indices: Vec<u32>, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..indices.len())
        .map(|_| match kind {
            WeightKind::Ones => Complex64::new(1.0, 0.0),
            WeightKind::Unimodular => Complex64::from_polar(1.0, TAU * rng.gen::<f64>()),
            WeightKind::Bounded => {
                let rho: f64 = rng.gen();
                Complex64::from_polar(rho, TAU * rng.gen::<f64>())
            }
        })
        .collect();
    WeightVector::new(indices, values).expect("lengths agree")
}

fn check_modulus(table: &KloostermanTable, supports: &[u32]) -> Result<()> {
    if let Some(&q) = supports.iter().find(|&&q| q != table.p()) {
        return Err(Error::DomainError(format!(
            "set modulus {q} differs from table modulus {}",
            table.p()
        )));
    }
    Ok(())
}

/// `sum_{m, n} alpha_m beta_n K(mn)`
pub fn type2_sum<N: Support + ?Sized>(
    table: &KloostermanTable,
    m_set: &SampleSet,
    n_set: &N,
    alpha: &WeightVector,
    beta: &WeightVector,
) -> Result<Complex64> {
    check_modulus(table, &[m_set.p, n_set.modulus()])?;
    alpha.check_indices(&m_set.elements, "alpha")?;
    let n_elems = n_set.to_vec();
    beta.check_indices(&n_elems, "beta")?;
    bilinear_core(table, &m_set.elements, alpha.values(), &n_elems, beta.values())
}

/// Type-I sum: `beta` identically 1.
pub fn type1_sum<N: Support + ?Sized>(
    table: &KloostermanTable,
    m_set: &SampleSet,
    n_set: &N,
    alpha: &WeightVector,
) -> Result<Complex64> {
    let beta = WeightVector::ones(n_set.to_vec());
    type2_sum(table, m_set, n_set, alpha, &beta)
}

fn bilinear_core(
    table: &KloostermanTable,
    ms: &[u32],
    alpha: &[Complex64],
    ns: &[u32],
    beta: &[Complex64],
) -> Result<Complex64> {
    let p = table.p() as u64;
    // A zero product cannot occur for valid sets; it is checked anyway because
    // polynomial images are not sets.
    if let Some((&m, &n)) = ms
        .iter()
        .flat_map(|m| ns.iter().map(move |n| (m, n)))
        .find(|(&m, &n)| (m as u64 * n as u64).is_multiple_of(p))
    {
        return Err(Error::DomainError(format!("product {m} * {n} is 0 mod {p}")));
    }
    let rows = par::map_range(ms.len(), |i| {
        let m = ms[i] as u64;
        let mut acc = CompensatedSum::default();
        for (&n, &b) in ns.iter().zip(beta) {
            acc.add(b * table.at((m * n as u64 % p) as u32));
        }
        alpha[i] * acc.value()
    });
    Ok(sum_complex(rows))
}

/// Polynomial over F_p, coefficients from the constant term upward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<u32>,
}

impl Polynomial {
    pub fn new(p: u32, coeffs: &[i64]) -> Self {
        let mut coeffs: Vec<u32> = coeffs
            .iter()
            .map(|&c| c.rem_euclid(p as i64) as u32)
            .collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, p: u32, x: u64) -> u32 {
        let p = p as u64;
        let x = x % p;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| (acc * x + c as u64) % p) as u32
    }
}

/// `sum_{m=1}^{M} sum_{n in N} alpha_m beta_n K(f(m) n)`; `alpha` is indexed
/// by `1..=M`.
pub fn polynomial_twist_sum(
    table: &KloostermanTable,
    f: &Polynomial,
    m_range: u32,
    n_set: &IntervalSpec,
    alpha: &WeightVector,
    beta: &WeightVector,
) -> Result<Complex64> {
    let p = table.p();
    if !matches!(f.degree(), Some(d) if d >= 1) {
        return Err(Error::ConstantPolynomial);
    }
    check_modulus(table, &[n_set.modulus()])?;
    let ms: Vec<u32> = (1..=m_range).collect();
    alpha.check_indices(&ms, "alpha")?;
    let ns = n_set.to_vec();
    beta.check_indices(&ns, "beta")?;
    let image: Vec<u32> = ms.iter().map(|&m| f.eval(p, m as u64)).collect();
    let roots: Vec<u32> = ms
        .iter()
        .zip(&image)
        .filter(|(_, &v)| v == 0)
        .map(|(&m, _)| m)
        .collect();
    if !roots.is_empty() {
        return Err(Error::DomainError(format!(
            "f(m) = 0 mod {p} for m in {roots:?}"
        )));
    }
    bilinear_core(table, &image, alpha.values(), &ns, beta.values())
}

/// Which form of the Cauchy-inequality bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialForm {
    /// `r ||beta||_2 M N^{1/2}`, literally true once `|K| <= r` is used.
    #[default]
    WithDeligneFactor,
    /// `||beta||_2 M N^{1/2}`, the constant absorbed.
    Absorbed,
}

pub fn trivial_bound(r: u32, beta: &WeightVector, m: usize, n: usize, form: TrivialForm) -> f64 {
    let factor = match form {
        TrivialForm::WithDeligneFactor => r as f64,
        TrivialForm::Absorbed => 1.0,
    };
    factor * beta.norm2() * m as f64 * (n as f64).sqrt()
}

/// The five terms of the saving factor `Delta` and the bound built from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    pub p: u32,
    pub m: usize,
    pub n: usize,
    pub ell: u32,
    pub terms: [f64; 5],
    pub delta: f64,
    pub theorem_bound: Option<f64>,
    pub trivial_bound: Option<f64>,
    pub measured: Option<f64>,
    /// `N` is below `p^{3/(2 ell)}` by less than [`LENGTH_HYPOTHESIS_REL_TOL`].
    pub at_boundary: bool,
}

impl BoundBreakdown {
    /// Fill in `||beta||_2 M N^{1/2} Delta`.
    pub fn with_beta_norm(mut self, norm2: f64) -> Self {
        self.theorem_bound = Some(norm2 * self.m as f64 * (self.n as f64).sqrt() * self.delta);
        self
    }
}

/// Evaluate the five-term `Delta` for `|alpha_m| <= 1`, a set of size `M`
/// and an interval of length `p > N >= p^{3/(2 ell)}`.
pub fn theorem_delta(m: usize, n: usize, p: u32, ell: u32) -> Result<BoundBreakdown> {
    if ell < 2 {
        return Err(Error::PreconditionFailed(format!("ell = {ell} < 2")));
    }
    if m < 1 {
        return Err(Error::PreconditionFailed("M must be >= 1".into()));
    }
    if n as u64 >= p as u64 {
        return Err(Error::PreconditionFailed(format!("N = {n} >= p = {p}")));
    }
    let (lm, ln, lp) = ((m as f64).ln(), (n as f64).ln(), (p as f64).ln());
    let l = ell as f64;
    let threshold = 3.0 / (2.0 * l);
    let shortfall = threshold * lp - ln;
    if shortfall > -(1.0 - LENGTH_HYPOTHESIS_REL_TOL).ln() + LOG_SLACK {
        return Err(Error::PreconditionFailed(format!(
            "N = {n} < p^(3/(2 ell)) = {:.6}",
            (threshold * lp).exp()
        )));
    }
    let power = |a: f64, b: f64, c: f64| (a * lm + b * ln + c * lp).exp();
    let terms = [
        power(-0.5, 0.0, 0.0),
        power(-1.0 / (4.0 * l), -1.0 / (4.0 * l), 1.0 / (8.0 * l)),
        power(
            -5.0 / (16.0 * l),
            -1.0 / (2.0 * l),
            5.0 / (16.0 * l) + 3.0 / (8.0 * l * l),
        ),
        power(
            -1.0 / (2.0 * l),
            -1.0 / (2.0 * l),
            3.0 / (8.0 * l) + 3.0 / (8.0 * l * l),
        ),
        power(
            -1.0 / (4.0 * l),
            -3.0 / (4.0 * l),
            3.0 / (8.0 * l) + 3.0 / (4.0 * l * l),
        ),
    ];
    Ok(BoundBreakdown {
        p,
        m,
        n,
        ell,
        terms,
        delta: terms.iter().sum(),
        theorem_bound: None,
        trivial_bound: None,
        measured: None,
        at_boundary: shortfall > LOG_SLACK,
    })
}

/// Range conditions under which the bilinear sum admits a power saving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    /// `M, N >= p^eps`
    pub sizes_at_least_p_eps: bool,
    /// `M^5 N^8 >= p^{5 + eps}`
    pub m5_n8: bool,
    /// `M N >= p^{3/4 + eps}`
    pub mn: bool,
    /// `M^2 N^6 >= p^{3 + eps}`
    pub m2_n6: bool,
    pub holds: bool,
}

pub fn corollary_check(m: usize, n: usize, p: u32, eps: f64) -> CorollaryReport {
    let (lm, ln, lp) = ((m as f64).ln(), (n as f64).ln(), (p as f64).ln());
    let at_least = |lhs: f64, exponent: f64| lhs >= exponent * lp - LOG_SLACK;
    let sizes_at_least_p_eps = at_least(lm, eps) && at_least(ln, eps);
    let m5_n8 = at_least(5.0 * lm + 8.0 * ln, 5.0 + eps);
    let mn = at_least(lm + ln, 0.75 + eps);
    let m2_n6 = at_least(2.0 * lm + 6.0 * ln, 3.0 + eps);
    CorollaryReport {
        sizes_at_least_p_eps,
        m5_n8,
        mn,
        m2_n6,
        holds: sizes_at_least_p_eps && m5_n8 && mn && m2_n6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::kloosterman::{naive_single, spectral_table};
    use crate::Budget;
    use proptest::prelude::*;

    fn table(p: u64, r: u32) -> KloostermanTable {
        spectral_table(&PrimeField::new(p).unwrap(), r).unwrap()
    }

    #[test]
    fn type2_spot_values() {
        let t = table(5, 2);
        let m = SampleSet::new(5, vec![1]).unwrap();
        let n1 = SampleSet::new(5, vec![1]).unwrap();
        let s = type2_sum(&t, &m, &n1, &WeightVector::ones(vec![1]), &WeightVector::ones(vec![1]))
            .unwrap();
        assert!((s.re - 0.17082).abs() < 1e-4);
        let n12 = IntervalSpec::new(5, 0, 2).unwrap();
        let s = type1_sum(&t, &m, &n12, &WeightVector::ones(vec![1])).unwrap();
        assert!((s.re + 1.27639).abs() < 1e-4);
    }

    #[test]
    fn zero_beta_gives_zero() {
        let t = table(101, 3);
        let m = SampleSet::random(101, 20, 1).unwrap();
        let n = IntervalSpec::new(101, 10, 30).unwrap();
        let alpha = make_weights(WeightKind::Unimodular, m.to_vec(), 2);
        let beta = WeightVector::new(n.to_vec(), vec![Complex64::new(0.0, 0.0); 30]).unwrap();
        assert_eq!(type2_sum(&t, &m, &n, &alpha, &beta).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_mismatched_weights() {
        let t = table(11, 2);
        let m = SampleSet::new(11, vec![1, 2]).unwrap();
        let n = IntervalSpec::new(11, 0, 3).unwrap();
        let bad = WeightVector::ones(vec![1, 3]);
        let beta = WeightVector::ones(n.to_vec());
        assert!(matches!(type2_sum(&t, &m, &n, &bad, &beta), Err(Error::IndexMismatch(_))));
        assert!(matches!(WeightVector::new(vec![1], vec![]), Err(Error::IndexMismatch(_))));
        let other = SampleSet::new(13, vec![1, 2]).unwrap();
        assert!(matches!(
            type2_sum(&t, &other, &n, &WeightVector::ones(vec![1, 2]), &beta),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn set_and_interval_validation() {
        assert!(SampleSet::new(7, vec![0, 1]).is_err());
        assert!(SampleSet::new(7, vec![7]).is_err());
        assert!(SampleSet::new(7, vec![2, 2]).is_err());
        assert_eq!(SampleSet::new(7, vec![3, 1]).unwrap().elements(), &[1, 3]);
        assert!(IntervalSpec::new(7, 0, 0).is_err());
        assert!(IntervalSpec::new(7, 2, 5).is_err());
        assert_eq!(IntervalSpec::new(7, 2, 4).unwrap().to_vec(), vec![3, 4, 5, 6]);
        assert!(SampleSet::random(7, 7, 0).is_err());
        assert_eq!(SampleSet::random(7, 6, 0).unwrap().elements(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn polynomial_twist() {
        let t = table(5, 2);
        let n = IntervalSpec::new(5, 0, 1).unwrap();
        let f = Polynomial::new(5, &[1, 2, 1]); // (X + 1)^2
        let s = polynomial_twist_sum(&t, &f, 2, &n, &WeightVector::ones(vec![1, 2]), &WeightVector::ones(vec![1]))
            .unwrap();
        let k4 = naive_single(&PrimeField::new(5).unwrap(), 2, 4, Budget::DEFAULT).unwrap();
        assert!((k4.re - 1.17082).abs() < 1e-4);
        assert!((s.re - 2.34164).abs() < 1e-4);

        let constant = Polynomial::new(5, &[3]);
        assert_eq!(
            polynomial_twist_sum(&t, &constant, 2, &n, &WeightVector::ones(vec![1, 2]), &WeightVector::ones(vec![1])),
            Err(Error::ConstantPolynomial)
        );
        assert_eq!(Polynomial::new(5, &[3, 5, 10]).degree(), Some(0));

        // f(X) = X - 2 vanishes at m = 2 and m = 7 mod 5
        let root = Polynomial::new(5, &[-2, 1]);
        let ms: Vec<u32> = (1..=7).collect();
        match polynomial_twist_sum(&t, &root, 7, &n, &WeightVector::ones(ms), &WeightVector::ones(vec![1])) {
            Err(Error::DomainError(msg)) => assert!(msg.contains("[2, 7]"), "{msg}"),
            other => panic!("expected DomainError, got {other:?}"),
        }
    }

    #[test]
    fn identity_polynomial_is_type2() {
        let t = table(101, 2);
        let n = IntervalSpec::new(101, 5, 20).unwrap();
        let m = SampleSet::new(101, (1..=15).collect()).unwrap();
        let alpha = make_weights(WeightKind::Bounded, m.to_vec(), 3);
        let beta = make_weights(WeightKind::Unimodular, n.to_vec(), 4);
        let direct = type2_sum(&t, &m, &n, &alpha, &beta).unwrap();
        let twisted = polynomial_twist_sum(&t, &Polynomial::new(101, &[0, 1]), 15, &n, &alpha, &beta).unwrap();
        assert_eq!(direct, twisted);
    }

    #[test]
    fn trivial_bound_examples() {
        assert_eq!(trivial_bound(1, &WeightVector::ones(vec![1]), 1, 1, TrivialForm::default()), 1.0);
        let beta = WeightVector::ones((1..=100).collect());
        assert!((trivial_bound(2, &beta, 10, 100, TrivialForm::WithDeligneFactor) - 2000.0).abs() < 1e-9);
        assert!((trivial_bound(2, &beta, 10, 100, TrivialForm::Absorbed) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn delta_example() {
        let b = theorem_delta(100, 1000, 10007, 2).unwrap();
        let expect = [0.100, 0.422, 0.866, 0.750, 1.334];
        for (got, want) in b.terms.iter().zip(expect) {
            assert!((got / want - 1.0).abs() < 0.01, "{got} vs {want}");
        }
        assert!((b.delta / 3.472 - 1.0).abs() < 0.01);
        assert!((b.delta - b.terms.iter().sum::<f64>()).abs() < 1e-12);
        let b1 = theorem_delta(1, 1000, 10007, 3).unwrap();
        assert_eq!(b1.terms[0], 1.0);
        assert!(b1.delta >= 1.0);
        let tb = b.clone().with_beta_norm(2.0).theorem_bound.unwrap();
        assert!((tb - 2.0 * 100.0 * 1000f64.sqrt() * b.delta).abs() < 1e-9);
    }

    #[test]
    fn delta_preconditions() {
        match theorem_delta(10, 31, 101, 2) {
            Err(Error::PreconditionFailed(msg)) => assert!(msg.contains("31.85"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(theorem_delta(10, 32, 101, 2).is_ok());
        // 999 < 0.999 * 1000.52
        assert!(theorem_delta(10, 999, 10007, 2).is_err());
        assert!(theorem_delta(10, 101, 101, 2).is_err());
        assert!(theorem_delta(10, 50, 101, 1).is_err());
        assert!(theorem_delta(0, 50, 101, 2).is_err());
    }

    #[test]
    fn delta_terms_monotone_on_grid() {
        for ell in 2..=6 {
            let p = 10007;
            let ns: Vec<usize> = (1..=30).map(|k| 300 * k).filter(|&n| n < p as usize).collect();
            let grid: Vec<Vec<[f64; 5]>> = (1..=20)
                .map(|m| {
                    ns.iter()
                        .filter_map(|&n| theorem_delta(m * 37, n, p, ell).ok().map(|b| b.terms))
                        .collect()
                })
                .collect();
            for row in &grid {
                for w in row.windows(2) {
                    assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b <= a));
                }
            }
            for pair in grid.windows(2) {
                for (a, b) in pair[0].iter().zip(&pair[1]) {
                    assert!(a.iter().zip(b).all(|(x, y)| y <= x));
                }
            }
        }
    }

    #[test]
    fn corollary_examples() {
        assert!(corollary_check(1586, 1586, 10007, 0.05).holds);
        let one = corollary_check(1, 1000, 10007, 0.01);
        assert!(!one.sizes_at_least_p_eps && !one.holds);
        let small = corollary_check(31, 31, 10007, 0.05);
        assert!(!small.mn && !small.holds);
    }

    #[test]
    fn weights_are_deterministic_and_bounded() {
        assert_eq!(
            make_weights(WeightKind::Ones, (1..=5).collect(), 9).values(),
            &[Complex64::new(1.0, 0.0); 5]
        );
        let a = make_weights(WeightKind::Unimodular, (1..=100).collect(), 42);
        let b = make_weights(WeightKind::Unimodular, (1..=100).collect(), 42);
        assert_eq!(a, b);
        assert!(a.values().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let c = make_weights(WeightKind::Bounded, (1..=1000).collect(), 7);
        assert!(c.norm_inf() <= 1.0 && c.is_bounded_by_one());
        assert!((c.norm_sigma(2.0) - c.norm2()).abs() < 1e-9);
        assert_eq!(make_weights(WeightKind::Bounded, vec![], 1).norm2(), 0.0);
    }

    #[test]
    fn conjugation_symmetry_for_real_table() {
        let t = table(1009, 2);
        let m = SampleSet::random(1009, 40, 5).unwrap();
        let n = IntervalSpec::new(1009, 100, 60).unwrap();
        let alpha = make_weights(WeightKind::Unimodular, m.to_vec(), 1);
        let beta = make_weights(WeightKind::Bounded, n.to_vec(), 2);
        let s = type2_sum(&t, &m, &n, &alpha, &beta).unwrap();
        let sc = type2_sum(&t, &m, &n, &alpha.conj(), &beta.conj()).unwrap();
        assert!((s.conj() - sc).norm() <= 1e-9 * s.norm().max(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linear_in_weights(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let t = table(211, 3);
            let m = SampleSet::random(211, 25, seed).unwrap();
            let n = IntervalSpec::new(211, 17, 40).unwrap();
            let x = make_weights(WeightKind::Unimodular, m.to_vec(), seed ^ 1);
            let y = make_weights(WeightKind::Bounded, m.to_vec(), seed ^ 2);
            let beta = make_weights(WeightKind::Bounded, n.to_vec(), seed ^ 3);
            let (ca, cb) = (Complex64::new(a, 0.5), Complex64::new(0.25, b));
            let combo = WeightVector::new(
                m.to_vec(),
                x.values().iter().zip(y.values()).map(|(u, v)| ca * u + cb * v).collect(),
            ).unwrap();
            let lhs = type2_sum(&t, &m, &n, &combo, &beta).unwrap();
            let rhs = ca * type2_sum(&t, &m, &n, &x, &beta).unwrap()
                + cb * type2_sum(&t, &m, &n, &y, &beta).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));

            let beta2 = make_weights(WeightKind::Unimodular, n.to_vec(), seed ^ 4);
            let combo_b = WeightVector::new(
                n.to_vec(),
                beta.values().iter().zip(beta2.values()).map(|(u, v)| ca * u + cb * v).collect(),
            ).unwrap();
            let lhs = type2_sum(&t, &m, &n, &x, &combo_b).unwrap();
            let rhs = ca * type2_sum(&t, &m, &n, &x, &beta).unwrap()
                + cb * type2_sum(&t, &m, &n, &x, &beta2).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
        }

        #[test]
        fn trivial_bound_dominates(
            seed in any::<u64>(),
            r in 1u32..=4,
            size in 1usize..60,
            offset in 0u32..100,
            len in 1u32..100,
            kind in prop::sample::select(WeightKind::ALL.to_vec()),
        ) {
            let t = table(211, r);
            let m = SampleSet::random(211, size, seed).unwrap();
            let n = IntervalSpec::new(211, offset, len).unwrap();
            let alpha = make_weights(kind, m.to_vec(), seed.wrapping_add(1));
            let beta = make_weights(kind, n.to_vec(), seed.wrapping_add(2));
            let s = type2_sum(&t, &m, &n, &alpha, &beta).unwrap();
            let bound = trivial_bound(r, &beta, m.len(), n.cardinality(), TrivialForm::WithDeligneFactor);
            prop_assert!(s.norm() <= bound + 1e-9);
        }
    }
}
