//! Twist parameters `(p, q, d)` and the root of unity they induce.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Rational twist `q/p` acting on `Z^{2d}`.
///
/// Holds `omega = exp(2 pi i q / p)` as a table of its `p` distinct powers, so
/// every phase is looked up from an exponent reduced mod `p` in integer
/// arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct TwistParams {
    p: i64,
    q: i64,
    dim: usize,
    powers: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: i64,
    q: i64,
    d: usize,
}

impl TryFrom<RawParams> for TwistParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        TwistParams::new(raw.p, raw.q, raw.d)
    }
}

impl From<TwistParams> for RawParams {
    fn from(tp: TwistParams) -> Self {
        RawParams { p: tp.p, q: tp.q, d: tp.dim }
    }
}

impl TwistParams {
    pub fn new(p: i64, q: i64, dim: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidParams(format!("p must be positive, got {p}")));
        }
        if dim < 1 {
            return Err(Error::InvalidParams("dimension d must be at least 1".into()));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidParams(format!("gcd({p}, {q}) != 1")));
        }
        let powers = (0..p).map(|j| unit_root(j, p)).collect();
        Ok(TwistParams { p, q, dim, powers })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `omega = exp(2 pi i q / p)`.
    pub fn omega(&self) -> Complex64 {
        self.omega_pow(1)
    }

    /// `omega^e` with `q * e` reduced mod `p` before any floating point work.
    pub fn omega_pow(&self, e: i64) -> Complex64 {
        let r = ((self.q as i128 * e as i128).rem_euclid(self.p as i128)) as usize;
        self.powers[r]
    }

    /// `omega^(x . y)` for two integer vectors.
    pub fn omega_dot(&self, x: &[i64], y: &[i64]) -> Complex64 {
        let p = self.p as i128;
        let dot = x
            .iter()
            .zip(y)
            .fold(0i128, |acc, (&a, &b)| (acc + (a as i128 % p) * (b as i128 % p)).rem_euclid(p));
        self.omega_pow(dot as i64)
    }

    /// Matrix size `N = p^d`.
    pub fn n(&self) -> usize {
        (self.p as usize).pow(self.dim as u32)
    }

    /// Lexicographic enumeration `k_1, ..., k_N` of `Z_p^d` with `k_1 = 0`.
    ///
    /// The first component is the most significant digit.
    pub fn coset_reps(&self) -> Vec<Vec<i64>> {
        let p = self.p as usize;
        (0..self.n())
            .map(|mut idx| {
                let mut v = vec![0i64; self.dim];
                for slot in v.iter_mut().rev() {
                    *slot = (idx % p) as i64;
                    idx /= p;
                }
                v
            })
            .collect()
    }

    /// Position (0-based) of `v mod p` in [`coset_reps`](Self::coset_reps).
    pub fn coset_position(&self, v: &[i64]) -> usize {
        v.iter()
            .fold(0usize, |acc, &x| acc * self.p as usize + x.rem_euclid(self.p) as usize)
    }
}

/// `exp(2 pi i j / n)`.
pub(crate) fn unit_root(j: i64, n: i64) -> Complex64 {
    let j = j.rem_euclid(n);
    if j == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * j == n {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * j == n {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * j == 3 * n {
        return Complex64::new(0.0, -1.0);
    }
    Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)
}
