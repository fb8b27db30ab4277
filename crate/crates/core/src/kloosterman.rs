//! Normalized hyper-Kloosterman sums
//!
//! `K_{r,p}(n) = p^{-(r-1)/2} * sum_{x_1 ... x_r = n} e_p(x_1 + ... + x_r)`
//!
//! with every `x_i` in F_p^x. Three evaluators are provided: direct
//! enumeration of a single value, an (r-1)-fold multiplicative convolution
//! of the additive character, and a spectral route through Gauss sums
//! (the DFT over the cyclic group F_p^x turns the convolution into
//! pointwise powers). The first two use compensated summation and serve as
//! oracles for the third.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::fft::{ChirpZ, Direction};
use crate::field::PrimeField;
use crate::par;
use crate::report::fmt_f64;
use crate::sum::{sum_complex, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Convolution,
    Spectral,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Naive => "naive",
            Method::Convolution => "convolution",
            Method::Spectral => "spectral",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Method::Naive),
            "convolution" => Ok(Method::Convolution),
            "spectral" => Ok(Method::Spectral),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// `p^{-(r-1)/2}`
pub fn normalization(p: u32, r: u32) -> f64 {
    (p as f64).powf(-((r as f64) - 1.0) / 2.0)
}

/// `K_{r,p}(n)` for every `n` in F_p^x.
#[derive(Debug, Clone)]
pub struct KloostermanTable {
    p: u32,
    r: u32,
    values: Vec<Complex64>,
    method: Method,
}

impl KloostermanTable {
    /// Build with the requested evaluator.
    pub fn build(field: &PrimeField, r: u32, method: Method, budget: Budget) -> Result<Self> {
        match method {
            Method::Naive => naive_table(field, r, budget),
            Method::Convolution => convolution_table(field, r, budget),
            Method::Spectral => spectral_table(field, r),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Values in the order `n = 1, 2, ..., p - 1`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, n: u32) -> Result<Complex64> {
        let n = n % self.p;
        if n == 0 {
            return Err(Error::DomainError("K_{r,p}(0) is undefined".into()));
        }
        Ok(self.values[n as usize - 1])
    }

    /// Lookup for an already reduced nonzero argument.
    #[inline]
    pub(crate) fn at(&self, n: u32) -> Complex64 {
        debug_assert!(n != 0 && n < self.p);
        self.values[n as usize - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `|sum_n K(n) - (-1)^r p^{-(r-1)/2}|`; the expected value is forced by
    /// `sum_{x != 0} e_p(x) = -1`.
    pub fn character_sum_defect(&self) -> f64 {
        let sign = if self.r.is_multiple_of(2) { 1.0 } else { -1.0 };
        let expect = sign * normalization(self.p, self.r);
        (sum_complex(self.values.iter().copied()) - expect).norm()
    }

    pub fn max_difference(&self, other: &KloostermanTable) -> f64 {
        assert_eq!((self.p, self.r), (other.p, other.r), "tables for different (p, r)");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// CSV with header `n,re,im`, one row per `n` ascending.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,re,im")?;
        for (i, z) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{}", i + 1, fmt_f64(z.re), fmt_f64(z.im))?;
        }
        Ok(())
    }
}

/// `max(0, max_n |K(n)| - r)`. Anything above rounding noise is a bug,
/// because `|K_{r,p}(n)| <= r` is a theorem.
pub fn deligne_excess(table: &KloostermanTable) -> f64 {
    (table.max_abs() - table.r as f64).max(0.0)
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 {
        Err(Error::DomainError("dimension r must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// One value by enumerating `x_1, ..., x_{r-1}` and solving for `x_r`.
pub fn naive_single(field: &PrimeField, r: u32, n: u32, budget: Budget) -> Result<Complex64> {
    check_r(r)?;
    let n = n % field.p();
    if n == 0 {
        return Err(Error::DomainError("K_{r,p}(0) is undefined".into()));
    }
    let order = field.order() as u64;
    budget.check((order as u128).pow(r - 1))?;
    if r == 1 {
        return Ok(field.additive_char(n));
    }
    let chars = field.additive_char_table();
    let log_n = field.dlog_unchecked(n) as u64;
    let raw = if r == 2 {
        innermost(field, &chars, log_n, 0).value()
    } else {
        // Split over x_1 so the work parallelizes; partial sums are merged
        // in index order, so the result does not depend on scheduling.
        let partials = par::map_range(order as usize, |k1| {
            let mut acc = CompensatedSum::default();
            let x1 = field.exp_table()[k1];
            let rem = (log_n + order - k1 as u64) % order;
            enumerate(field, &chars, r - 1, rem, x1, &mut acc);
            acc.value()
        });
        sum_complex(partials)
    };
    Ok(raw * normalization(field.p(), r))
}

/// Sum over the `free` remaining coordinates whose logs add to `rem`,
/// with `partial` the running additive sum of earlier coordinates.
fn enumerate(
    field: &PrimeField,
    chars: &[Complex64],
    free: u32,
    rem: u64,
    partial: u32,
    acc: &mut CompensatedSum,
) {
    if free == 2 {
        let part = innermost(field, chars, rem, partial);
        acc.add(part.value());
        return;
    }
    let order = field.order() as u64;
    for (k, &x) in field.exp_table().iter().enumerate() {
        let rem_next = (rem + order - k as u64) % order;
        enumerate(field, chars, free - 1, rem_next, field.add(partial, x), acc);
    }
}

/// `sum_k e_p(partial + g^k + g^{rem - k})`
fn innermost(field: &PrimeField, chars: &[Complex64], rem: u64, partial: u32) -> CompensatedSum {
    let exp = field.exp_table();
    let order = exp.len();
    let p = field.p() as u64;
    let rem = rem as usize;
    let mut acc = CompensatedSum::default();
    let mut push = |a: u32, b: u32| {
        let t = (partial as u64 + a as u64 + b as u64) % p;
        acc.add(chars[t as usize]);
    };
    // g^{rem - k} walks the exponent table backwards, wrapping once
    for k in 0..=rem {
        push(exp[k], exp[rem - k]);
    }
    for k in rem + 1..order {
        push(exp[k], exp[rem + order - k]);
    }
    acc
}

/// Every value by [`naive_single`]; cost `(p-1)^r`.
pub fn naive_table(field: &PrimeField, r: u32, budget: Budget) -> Result<KloostermanTable> {
    check_r(r)?;
    let order = field.order() as u128;
    budget.check(order.pow(r))?;
    let unlimited = Budget(u64::MAX);
    let values = par::map_range(field.order() as usize, |i| {
        naive_single(field, r, i as u32 + 1, unlimited)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(KloostermanTable {
        p: field.p(),
        r,
        values,
        method: Method::Naive,
    })
}

/// `r - 1` direct multiplicative convolutions of the additive character,
/// carried out in discrete-log coordinates where they are cyclic.
pub fn convolution_table(field: &PrimeField, r: u32, budget: Budget) -> Result<KloostermanTable> {
    check_r(r)?;
    let order = field.order() as usize;
    budget.check((r as u128 - 1) * (order as u128).pow(2))?;
    let exp = field.exp_table();
    let base: Vec<Complex64> = exp.iter().map(|&x| field.additive_char(x)).collect();

    let mut current = base.clone();
    for _ in 1..r {
        current = par::map_range(order, |m| {
            let mut acc = CompensatedSum::default();
            for (e, t) in base[..=m].iter().zip(current[..=m].iter().rev()) {
                acc.add(e * t);
            }
            for (e, t) in base[m + 1..].iter().zip(current[m + 1..].iter().rev()) {
                acc.add(e * t);
            }
            acc.value()
        });
    }
    Ok(from_log_coordinates(field, r, current, Method::Convolution))
}

/// Gauss sums `tau(chi_j) = sum_k e_p(g^k) w^{jk}` for all characters via one
/// DFT of length `p - 1`, raised to the r-th power and inverted.
pub fn spectral_table(field: &PrimeField, r: u32) -> Result<KloostermanTable> {
    check_r(r)?;
    let order = field.order() as usize;
    let plan = ChirpZ::new(order);
    let mut spectrum: Vec<Complex64> = field
        .exp_table()
        .iter()
        .map(|&x| field.additive_char(x))
        .collect();
    plan.process(&mut spectrum, Direction::Inverse);
    for tau in spectrum.iter_mut() {
        *tau = tau.powu(r);
    }
    plan.process(&mut spectrum, Direction::Forward);
    let scale = 1.0 / order as f64;
    spectrum.iter_mut().for_each(|z| *z *= scale);
    Ok(from_log_coordinates(field, r, spectrum, Method::Spectral))
}

/// Reorder unnormalized values indexed by `m` (argument `g^m`) to natural
/// order and apply the normalization.
fn from_log_coordinates(
    field: &PrimeField,
    r: u32,
    by_log: Vec<Complex64>,
    method: Method,
) -> KloostermanTable {
    let norm = normalization(field.p(), r);
    let mut values = vec![Complex64::new(0.0, 0.0); by_log.len()];
    for (&x, z) in field.exp_table().iter().zip(by_log) {
        values[x as usize - 1] = z * norm;
    }
    KloostermanTable {
        p: field.p(),
        r,
        values,
        method,
    }
}
