//! Inversion of ordinary convolution on `Z^{2d}` through the Fourier symbol.
//!
//! A sequence is embedded in the torus `(Z_M)^{2d}`, its symbol is sampled by
//! an FFT, inverted pointwise and transformed back. The result is the
//! periodization of the true inverse; it is accepted once the coefficients
//! near the edge of the centered window have decayed below `tail_tol` and the
//! convolution residual is below `residual_tol`, doubling `M` otherwise.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{SeqIndex, Sequence};

/// Upper bound on the number of torus points one FFT may use.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Width of the band along the window edge checked for tail decay.
const EDGE_BAND: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    /// Starting torus size per axis (power of two).
    pub grid_size: usize,
    /// Smallest admissible `|ĉ|` on the grid.
    pub symbol_floor: f64,
    /// Coefficients below this are dropped; edge coefficients must fall below it.
    pub tail_tol: f64,
    /// Bound on `‖c ∗ e − δ‖₁`.
    pub residual_tol: f64,
    /// Number of grid doublings allowed.
    pub max_refine: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            grid_size: 256,
            symbol_floor: 1e-8,
            tail_tol: 1e-12,
            residual_tol: 1e-8,
            max_refine: 4,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 || !self.grid_size.is_power_of_two() {
            return Err(Error::InvalidParams(format!("grid size {} is not a power of two", self.grid_size)));
        }
        for (name, v) in [
            ("symbol_floor", self.symbol_floor),
            ("tail_tol", self.tail_tol),
            ("residual_tol", self.residual_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A successful convolution inversion together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvInversion {
    pub inverse: Sequence,
    /// `min |ĉ|` on the final grid.
    pub symbol_min: f64,
    pub grid_size: usize,
    pub refinements: usize,
    /// `‖c ∗ e − δ‖₁`.
    pub residual: f64,
}

fn required_grid(c: &Sequence) -> usize {
    2 * (c.support_radius() as usize + 1)
}

fn check_dim(c: &Sequence) -> Result<()> {
    if c.dim() > 2 {
        return Err(Error::InvalidParams(format!(
            "FFT inversion supports d = 1 or 2, got d = {}",
            c.dim()
        )));
    }
    Ok(())
}

/// Largest power-of-two grid size whose torus fits in [`MAX_GRID_POINTS`].
fn max_grid_for(dim: usize) -> usize {
    let axes = 2 * dim as u32;
    let mut m = 2usize;
    while (m * 2).checked_pow(axes).is_some_and(|n| n <= MAX_GRID_POINTS) {
        m *= 2;
    }
    m
}

/// In-place multidimensional FFT over a row-major `M^axes` buffer.
fn fft_nd(buf: &mut [Complex64], m: usize, axes: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(m, direction);
    let mut line = vec![Complex64::default(); m];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for axis in 0..axes {
        let stride = m.pow((axes - 1 - axis) as u32);
        let block = stride * m;
        for outer in (0..buf.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + t * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (t, v) in line.iter().enumerate() {
                    buf[base + t * stride] = *v;
                }
            }
        }
    }
}

/// Symbol samples `ĉ(2π j / M)` on the whole torus.
fn symbol_grid(c: &Sequence, m: usize) -> Vec<Complex64> {
    let axes = 2 * c.dim();
    let mut buf = vec![Complex64::default(); m.pow(axes as u32)];
    for (idx, v) in c.iter() {
        let pos = idx
            .as_slice()
            .iter()
            .fold(0usize, |acc, &x| acc * m + x.rem_euclid(m as i64) as usize);
        buf[pos] += v;
    }
    fft_nd(&mut buf, m, axes, FftDirection::Forward);
    buf
}

/// `min |ĉ|` over the `M^{2d}` torus grid.
pub fn symbol_min_modulus(c: &Sequence, m: usize) -> Result<f64> {
    check_dim(c)?;
    let required = required_grid(c);
    if m < required {
        return Err(Error::GridTooSmall { size: m, required });
    }
    if m.checked_pow(2 * c.dim() as u32).is_none_or(|n| n > MAX_GRID_POINTS) {
        return Err(Error::InvalidParams(format!("grid size {m} exceeds the point budget")));
    }
    Ok(symbol_grid(c, m).iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min))
}

/// `‖c ∗ e − δ‖₁`.
pub fn conv_residual(c: &Sequence, e: &Sequence) -> Result<f64> {
    c.convolve(e)?.l1_distance(&Sequence::delta(c.dim()))
}

/// Convolution inverse of `c`, truncated and residual-certified.
pub fn invert_convolution(c: &Sequence, cfg: &InversionConfig) -> Result<Sequence> {
    Ok(invert_convolution_detailed(c, cfg, 1)?.inverse)
}

/// Convolution inverse of `c` when `c` is supported on `Z^d x pZ^d`
/// (`coset_period = p`); the inverse lives on the same coset and any
/// off-coset aliasing must stay below `tail_tol` before it is dropped.
/// `coset_period = 1` imposes nothing.
pub fn invert_convolution_detailed(
    c: &Sequence,
    cfg: &InversionConfig,
    coset_period: i64,
) -> Result<ConvInversion> {
    cfg.validate()?;
    check_dim(c)?;
    if c.is_empty() {
        return Err(Error::NotInvertible("the zero sequence has no inverse".into()));
    }
    let zero_coset = vec![0i64; c.dim()];
    if coset_period > 1 && !c.iter().all(|(idx, _)| idx.in_second_coset(&zero_coset, coset_period)) {
        return Err(Error::OverlappingSupports(format!(
            "input is not supported on Z^d x {coset_period}Z^d"
        )));
    }

    let cap = max_grid_for(c.dim());
    let mut m = cfg.grid_size.max(required_grid(c).next_power_of_two()).min(cap);
    if m < required_grid(c) {
        return Err(Error::GridTooSmall { size: m, required: required_grid(c) });
    }
    let axes = 2 * c.dim();
    let mut last_failure = String::new();

    for refinement in 0..=cfg.max_refine {
        let half_m = (m / 2) as i64;
        let mut buf = symbol_grid(c, m);
        let symbol_min = buf.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if symbol_min.is_nan() || symbol_min < cfg.symbol_floor {
            return Err(Error::NotInvertible(format!(
                "symbol minimum {symbol_min:e} below floor {:e} on a {m}-point grid",
                cfg.symbol_floor
            )));
        }
        for v in buf.iter_mut() {
            *v = v.inv();
        }
        fft_nd(&mut buf, m, axes, FftDirection::Inverse);
        let norm = 1.0 / buf.len() as f64;

        let mut edge: f64 = 0.0;
        let mut off_coset: f64 = 0.0;
        let mut triples = Vec::new();
        let mut coords = vec![0i64; axes];
        for (pos, v) in buf.iter().enumerate() {
            let v = v * norm;
            let mut rest = pos;
            for slot in coords.iter_mut().rev() {
                let raw = (rest % m) as i64;
                rest /= m;
                *slot = if raw >= half_m { raw - m as i64 } else { raw };
            }
            let mag = v.norm();
            if coords.iter().any(|&x| x >= half_m - EDGE_BAND || x < -half_m + EDGE_BAND) {
                edge = edge.max(mag);
            }
            if mag < cfg.tail_tol {
                continue;
            }
            let idx = SeqIndex::new(&coords[..c.dim()], &coords[c.dim()..]);
            if coset_period > 1 && !idx.in_second_coset(&zero_coset, coset_period) {
                off_coset = off_coset.max(mag);
                continue;
            }
            triples.push((coords[..c.dim()].to_vec(), coords[c.dim()..].to_vec(), v));
        }
        let inverse = Sequence::from_triples(c.dim(), triples)?;
        let residual = conv_residual(c, &inverse)?;

        if edge < cfg.tail_tol && off_coset <= cfg.tail_tol && residual <= cfg.residual_tol {
            return Ok(ConvInversion { inverse, symbol_min, grid_size: m, refinements: refinement, residual });
        }
        last_failure = format!(
            "grid {m}: edge coefficient {edge:e}, off-coset {off_coset:e}, residual {residual:e}"
        );
        if m * 2 > cap {
            break;
        }
        m *= 2;
    }
    Err(Error::TruncationNotConverged(last_failure))
}
