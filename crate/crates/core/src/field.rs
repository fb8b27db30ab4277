//! Prime-field arithmetic: primality, primitive roots, exponent and
//! discrete-log tables, inverses and the additive character.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

const DLOG_UNDEFINED: u32 = u32::MAX;

/// Largest modulus accepted by [`PrimeField::new`] (exclusive).
pub const MAX_MODULUS: u64 = 1 << 31;

/// The field F_p with the tables of its cyclic multiplicative group.
///
/// `exp_table[k] = g^k mod p` for `0 <= k < p - 1`, and `dlog_table` is its
/// inverse permutation on `1..p`. The entry for 0 is a sentinel.
#[derive(Debug, Clone)]
pub struct PrimeField {
    p: u32,
    g: u32,
    exp_table: Vec<u32>,
    dlog_table: Vec<u32>,
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. Witnesses 2, 3, 5, 7 are exact below 3 215 031 751.
pub fn is_prime(n: u64) -> bool {
    assert!(n < 3_215_031_751, "witness set only valid below 3215031751");
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors of `n`, ascending, by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of F_p^x.
pub fn smallest_primitive_root(p: u64) -> u64 {
    let order = p - 1;
    let factors = prime_factors(order);
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, order / q, p) != 1))
        .unwrap_or(1) // only reached for p = 2
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p <= 2 || p >= MAX_MODULUS {
            return Err(Error::Overflow(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let g = smallest_primitive_root(p);
        let p32 = p as u32;
        let order = p32 - 1;
        let mut exp_table = Vec::with_capacity(order as usize);
        let mut dlog_table = vec![DLOG_UNDEFINED; p as usize];
        let mut x: u64 = 1;
        for k in 0..order {
            exp_table.push(x as u32);
            dlog_table[x as usize] = k;
            x = x * g % p;
        }
        Ok(Self {
            p: p32,
            g: g as u32,
            exp_table,
            dlog_table,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Order of the multiplicative group, `p - 1`.
    pub fn order(&self) -> u32 {
        self.p - 1
    }

    pub fn generator(&self) -> u32 {
        self.g
    }

    pub fn exp_table(&self) -> &[u32] {
        &self.exp_table
    }

    /// `g^k`, with `k` taken modulo `p - 1`.
    pub fn exp(&self, k: u64) -> u32 {
        self.exp_table[(k % self.order() as u64) as usize]
    }

    /// Discrete logarithm base `g` of a nonzero residue.
    pub fn dlog(&self, x: u32) -> Result<u32> {
        let x = x % self.p;
        match self.dlog_table[x as usize] {
            DLOG_UNDEFINED => Err(Error::DomainError("discrete log of 0".into())),
            k => Ok(k),
        }
    }

    /// Table lookup without the zero check; `x` must be in `1..p`.
    pub(crate) fn dlog_unchecked(&self, x: u32) -> u32 {
        debug_assert!(x != 0 && x < self.p);
        self.dlog_table[x as usize]
    }

    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        (a as u64 * b as u64 % self.p as u64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    pub fn inv(&self, x: u32) -> Result<u32> {
        let x = x % self.p;
        if x == 0 {
            return Err(Error::ZeroInverse);
        }
        let k = self.dlog_table[x as usize];
        Ok(self.exp_table[((self.order() - k) % self.order()) as usize])
    }

    /// `e_p(t) = exp(2 pi i t / p)`, computed from the reduced angle.
    pub fn additive_char(&self, t: u32) -> Complex64 {
        let t = t % self.p;
        Complex64::from_polar(1.0, TAU * t as f64 / self.p as f64)
    }

    /// `e_p(t)` for every `t` in `0..p`.
    pub fn additive_char_table(&self) -> Vec<Complex64> {
        (0..self.p).map(|t| self.additive_char(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sum::CompensatedSum;
    use proptest::prelude::*;

    fn brute_is_primitive(g: u64, p: u64) -> bool {
        let mut x = 1;
        for k in 1..p {
            x = x * g % p;
            if x == 1 {
                return k == p - 1;
            }
        }
        false
    }

    #[test]
    fn smallest_root_matches_brute_force_order() {
        for p in [5u64, 7, 11, 13, 23, 41, 191, 1009] {
            let f = PrimeField::new(p).unwrap();
            let brute = (2..p).find(|&g| brute_is_primitive(g, p)).unwrap();
            assert_eq!(f.generator() as u64, brute, "p = {p}");
        }
        assert_eq!(PrimeField::new(7).unwrap().generator(), 3);
        assert_eq!(PrimeField::new(5).unwrap().generator(), 2);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(PrimeField::new(4).unwrap_err(), Error::NotPrime(4));
        assert_eq!(PrimeField::new(2).unwrap_err(), Error::Overflow(2));
        assert_eq!(PrimeField::new(MAX_MODULUS).unwrap_err(), Error::Overflow(MAX_MODULUS));
        assert!(matches!(PrimeField::new(561), Err(Error::NotPrime(561))));
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        for n in 0..20_000u64 {
            let trial = n >= 2 && prime_factors(n) == vec![n];
            assert_eq!(is_prime(n), trial, "n = {n}");
        }
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(2_147_483_649));
        // strong pseudoprimes to bases 2, 3
        assert!(!is_prime(1_373_653));
        assert!(!is_prime(25_326_001));
    }

    #[test]
    fn inverse_examples() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.inv(3).unwrap(), 5);
        assert_eq!(f7.inv(0).unwrap_err(), Error::ZeroInverse);
        assert_eq!(PrimeField::new(5).unwrap().inv(4).unwrap(), 4);
    }

    #[test]
    fn character_values() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.additive_char(0), Complex64::new(1.0, 0.0));
        let prod = f.additive_char(2) * f.additive_char(3);
        assert!((prod - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let z = f.additive_char(1);
        let expect = Complex64::new((TAU / 5.0).cos(), (TAU / 5.0).sin());
        assert!((z - expect).norm() < 1e-9);
        assert!((z.re - 0.309017).abs() < 1e-6 && (z.im - 0.951057).abs() < 1e-6);
    }

    #[test]
    fn full_character_sum_vanishes() {
        for p in [3u64, 101, 1009, 10007] {
            let f = PrimeField::new(p).unwrap();
            let mut s = CompensatedSum::default();
            for t in 1..f.p() {
                s.add(f.additive_char(t));
            }
            let nonzero = s.value();
            assert!((nonzero + 1.0).norm() < 1e-9, "p = {p}");
            assert!((nonzero + f.additive_char(0)).norm() < 1e-9);
        }
    }

    #[test]
    fn dlog_of_zero_is_domain_error() {
        let f = PrimeField::new(11).unwrap();
        assert!(matches!(f.dlog(0), Err(Error::DomainError(_))));
    }

    proptest! {
        #[test]
        fn tables_and_inverses(p in prop::sample::select(vec![3u64, 5, 7, 31, 101, 257, 1009, 7919])) {
            let f = PrimeField::new(p).unwrap();
            let mut seen = f.exp_table().to_vec();
            seen.sort_unstable();
            prop_assert_eq!(seen, (1..f.p()).collect::<Vec<_>>());
            for k in 0..f.order() {
                prop_assert_eq!(f.dlog(f.exp(k as u64)).unwrap(), k);
            }
            for q in prime_factors(p - 1) {
                prop_assert_ne!(pow_mod(f.generator() as u64, (p - 1) / q, p), 1);
            }
            for x in 1..f.p() {
                let y = f.inv(x).unwrap();
                prop_assert_eq!(f.mul(x, y), 1);
                prop_assert_eq!(f.inv(y).unwrap(), x);
                prop_assert!((f.additive_char(x).norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
