//! Gabor systems on `Z_L`: time-frequency shifts, the dense frame operator,
//! Janssen coefficients over the adjoint lattice and canonical dual windows
//! obtained by twisted inversion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conv_inverse::InversionConfig;
use crate::error::{Error, Result};
use crate::finite::CMatrix;
use crate::io::complex_pair;
use crate::params::{gcd, unit_root, TwistParams};
use crate::sequence::Sequence;
use crate::twisted_inverse::{invert_twisted, InversionReport};

/// Relative eigenvalue floor below which `S` is not treated as a frame operator.
pub const FRAME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborConfig {
    #[serde(rename = "L")]
    pub length: usize,
    pub a_step: usize,
    pub b_step: usize,
    #[serde(serialize_with = "complex_pair::serialize_vec", deserialize_with = "complex_pair::deserialize_vec")]
    pub window: Vec<Complex64>,
}

impl GaborConfig {
    pub fn new(length: usize, a_step: usize, b_step: usize, window: Vec<Complex64>) -> Result<Self> {
        let cfg = GaborConfig { length, a_step, b_step, window };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.length;
        if l == 0 {
            return Err(Error::InvalidParams("signal length L must be positive".into()));
        }
        if self.a_step == 0 || !l.is_multiple_of(self.a_step) {
            return Err(Error::InvalidParams(format!("a_step = {} does not divide L = {l}", self.a_step)));
        }
        if self.b_step == 0 || !l.is_multiple_of(self.b_step) {
            return Err(Error::InvalidParams(format!("b_step = {} does not divide L = {l}", self.b_step)));
        }
        if self.window.len() != l {
            return Err(Error::SizeMismatch(format!("window has length {}, expected L = {l}", self.window.len())));
        }
        Ok(())
    }

    /// `(p, q, 1)` with `p/q` the reduced form of `a_step·b_step / L`.
    pub fn twist_params(&self) -> Result<TwistParams> {
        self.validate()?;
        let ab = (self.a_step * self.b_step) as i64;
        let l = self.length as i64;
        let g = gcd(ab, l);
        TwistParams::new(ab / g, l / g, 1)
    }

    /// Lattice points `(n·a_step, m·b_step)`.
    pub fn lattice(&self) -> Vec<TFShift> {
        let (l, a, b) = (self.length, self.a_step, self.b_step);
        let mut pts = Vec::with_capacity((l / a) * (l / b));
        for n in 0..l / a {
            for m in 0..l / b {
                pts.push(TFShift::new((n * a) as i64, (m * b) as i64));
            }
        }
        pts
    }

    /// The shift `π(k·L/b_step, l·L/a_step)` attached to sequence index `(k, l)`.
    pub fn adjoint_shift(&self, k: i64, l: i64) -> TFShift {
        let len = self.length as i64;
        TFShift::new(k * (len / self.b_step as i64), l * (len / self.a_step as i64))
    }
}

/// `π(x, w) = T_x M_w` on `C^L`, both arguments read mod `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TFShift {
    pub x: i64,
    pub w: i64,
}

impl TFShift {
    pub fn new(x: i64, w: i64) -> Self {
        TFShift { x, w }
    }

    /// Dense `L×L` matrix of the shift.
    pub fn matrix(&self, len: usize) -> CMatrix {
        let l = len as i64;
        let mut m = DMatrix::zeros(len, len);
        for j in 0..l {
            let row = (j + self.x).rem_euclid(l) as usize;
            m[(row, j as usize)] = unit_root(self.w * j, l);
        }
        m
    }
}

/// `(π(x,w)f)(t) = e^{2πi w (t−x)/L} f(t−x)`.
pub fn tf_shift_apply(s: TFShift, f: &[Complex64]) -> Vec<Complex64> {
    let l = f.len() as i64;
    if l == 0 {
        return Vec::new();
    }
    (0..l)
        .map(|t| {
            let u = (t - s.x).rem_euclid(l);
            unit_root(s.w * u, l) * f[u as usize]
        })
        .collect()
}

fn inner(f: &[Complex64], h: &[Complex64]) -> Complex64 {
    f.iter().zip(h).map(|(x, y)| x * y.conj()).sum()
}

/// `S = Σ_λ ⟨·, π(λ)g⟩ π(λ)g` over the lattice `a_step Z_L × b_step Z_L`.
pub fn frame_operator_dense(cfg: &GaborConfig) -> Result<CMatrix> {
    cfg.validate()?;
    let len = cfg.length;
    let mut s = DMatrix::zeros(len, len);
    for pt in cfg.lattice() {
        let v = tf_shift_apply(pt, &cfg.window);
        for i in 0..len {
            for j in 0..len {
                s[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    Ok(s)
}

/// Janssen normalization `L/(a_step·b_step)`.
pub fn janssen_constant(cfg: &GaborConfig) -> f64 {
    cfg.length as f64 / (cfg.a_step * cfg.b_step) as f64
}

/// Coefficients `a_{k,l} = C·⟨g, π(kL/b_step, lL/a_step)g⟩` for
/// `k ∈ [0, b_step)`, `l ∈ [0, a_step)`, so that `κ(a) = S`.
pub fn janssen_coefficients(cfg: &GaborConfig) -> Result<(Sequence, TwistParams)> {
    let tp = cfg.twist_params()?;
    let c = janssen_constant(cfg);
    let g = &cfg.window;
    let mut triples = Vec::new();
    for k in 0..cfg.b_step as i64 {
        for l in 0..cfg.a_step as i64 {
            let v = inner(g, &tf_shift_apply(cfg.adjoint_shift(k, l), g)) * c;
            triples.push((vec![k], vec![l], v));
        }
    }
    Ok((Sequence::from_triples(1, triples)?, tp))
}

fn check_kappa_input(a: &Sequence, cfg: &GaborConfig) -> Result<()> {
    cfg.validate()?;
    if a.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: a.dim() });
    }
    Ok(())
}

/// `κ(a) f = Σ a_{k,l} π(kL/b_step, lL/a_step) f`.
pub fn apply_kappa(a: &Sequence, cfg: &GaborConfig, f: &[Complex64]) -> Result<Vec<Complex64>> {
    check_kappa_input(a, cfg)?;
    if f.len() != cfg.length {
        return Err(Error::SizeMismatch(format!("vector has length {}, expected L = {}", f.len(), cfg.length)));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.length];
    for (idx, v) in a.iter() {
        let shifted = tf_shift_apply(cfg.adjoint_shift(idx.k()[0], idx.l()[0]), f);
        for (o, s) in out.iter_mut().zip(shifted) {
            *o += v * s;
        }
    }
    Ok(out)
}

/// Dense matrix of `κ(a)`.
pub fn kappa_matrix(a: &Sequence, cfg: &GaborConfig) -> Result<CMatrix> {
    check_kappa_input(a, cfg)?;
    let mut m = DMatrix::zeros(cfg.length, cfg.length);
    for (idx, v) in a.iter() {
        m += cfg.adjoint_shift(idx.k()[0], idx.l()[0]).matrix(cfg.length) * *v;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualWindow {
    #[serde(serialize_with = "complex_pair::serialize_vec", deserialize_with = "complex_pair::deserialize_vec")]
    pub gamma: Vec<Complex64>,
    pub report: InversionReport,
}

/// Extreme eigenvalues `(λ_min, λ_max)` of the Hermitian frame operator.
pub fn frame_bounds(cfg: &GaborConfig) -> Result<(f64, f64)> {
    let eig = frame_operator_dense(cfg)?.symmetric_eigenvalues();
    Ok((eig.min(), eig.max()))
}

/// Canonical dual window `γ = κ(b) g` with `b` the twisted inverse of the
/// Janssen coefficients.
pub fn dual_window(cfg: &GaborConfig, inv_cfg: &InversionConfig) -> Result<DualWindow> {
    cfg.validate()?;
    if cfg.a_step * cfg.b_step > cfg.length {
        return Err(Error::NotAFrame(format!(
            "a_step·b_step = {} exceeds L = {}",
            cfg.a_step * cfg.b_step,
            cfg.length
        )));
    }
    let (lo, hi) = frame_bounds(cfg)?;
    if hi.is_nan() || hi <= 0.0 || lo <= FRAME_TOL * hi {
        return Err(Error::NotAFrame(format!("frame operator eigenvalues span [{lo:e}, {hi:e}]")));
    }
    let (a, tp) = janssen_coefficients(cfg)?;
    let report = invert_twisted(&a, &tp, inv_cfg)?;
    let gamma = apply_kappa(&report.inverse, cfg, &cfg.window)?;
    Ok(DualWindow { gamma, report })
}

/// Periodized Gaussian `exp(−π t²/σ²)` centred at `0` on `Z_L`.
pub fn gaussian_window(len: usize, sigma: f64) -> Vec<Complex64> {
    let l = len as i64;
    (0..l)
        .map(|t| {
            let d = t.min(l - t) as f64;
            Complex64::new((-std::f64::consts::PI * d * d / (sigma * sigma)).exp(), 0.0)
        })
        .collect()
}
