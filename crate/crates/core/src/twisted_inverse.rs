//! End-to-end inversion of a sequence under twisted convolution.
//!
//! `a ↦ φ(a)`, take `det φ(a)` (a sequence on `Z^d x pZ^d`), invert it under
//! ordinary convolution, multiply into the first column of the adjugate and
//! sum the column. The result is certified by both one-sided residuals.

use serde::{Deserialize, Serialize};

use crate::coset_algebra::{
    determinant, enforce_second_coset, extract_sequence, minor_matrix, phi, DEFAULT_DET_CAP,
};
use crate::conv_inverse::{invert_convolution_detailed, InversionConfig, MAX_GRID_POINTS};
use crate::error::{Error, Result};
use crate::params::TwistParams;
use crate::sequence::Sequence;

/// Result of [`invert_twisted`] with its success certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub input: Sequence,
    pub tp: TwistParams,
    pub inverse: Sequence,
    /// `‖a ♮ b − δ‖₁`.
    pub residual_right: f64,
    /// `‖b ♮ a − δ‖₁`.
    pub residual_left: f64,
    /// Smallest sampled modulus of the determinant's symbol.
    pub det_symbol_min: f64,
    pub grid_size_used: usize,
    pub refinements: usize,
}

/// `(‖a ♮ b − δ‖₁, ‖b ♮ a − δ‖₁)`.
pub fn verify_inverse(a: &Sequence, b: &Sequence, tp: &TwistParams) -> Result<(f64, f64)> {
    let delta = Sequence::delta(tp.dim());
    let right = a.twisted_convolve(b, tp)?.l1_distance(&delta)?;
    let left = b.twisted_convolve(a, tp)?.l1_distance(&delta)?;
    Ok((right, left))
}

/// Inverts `a` in `(ℓ¹(Z^{2d}), ♮)` through the determinant of `φ(a)` and
/// the first Cramer column.
pub fn invert_twisted(a: &Sequence, tp: &TwistParams, cfg: &InversionConfig) -> Result<InversionReport> {
    cfg.validate()?;
    if a.dim() != tp.dim() {
        return Err(Error::DimensionMismatch { expected: tp.dim(), found: a.dim() });
    }
    if tp.n() > DEFAULT_DET_CAP {
        return Err(Error::DeterminantTooLarge { n: tp.n(), cap: DEFAULT_DET_CAP });
    }
    if a.is_empty() {
        return Err(Error::NotInvertible("the zero sequence has no inverse".into()));
    }

    let p = tp.p();
    let matrix = phi(a, tp)?;
    let det = enforce_second_coset(&determinant(&matrix)?, &vec![0; tp.dim()], p, "determinant")?;
    // det(A(1, i)) for i = 1..N: the adjugate's first column.
    let minors = (1..=tp.n())
        .map(|i| determinant(&minor_matrix(&matrix, 1, i)?))
        .collect::<Result<Vec<_>>>()?;

    let mut grid = cfg.grid_size;
    let mut refinements = 0;
    loop {
        let conv_cfg = InversionConfig { grid_size: grid, max_refine: cfg.max_refine - refinements, ..*cfg };
        let conv = invert_convolution_detailed(&det, &conv_cfg, p)?;
        refinements += conv.refinements;
        grid = conv.grid_size;

        let column = minors
            .iter()
            .map(|m| m.convolve(&conv.inverse))
            .collect::<Result<Vec<_>>>()?;
        let inverse = extract_sequence(&column, tp)?.prune(cfg.tail_tol);
        let (residual_right, residual_left) = verify_inverse(a, &inverse, tp)?;
        if residual_right <= cfg.residual_tol && residual_left <= cfg.residual_tol {
            return Ok(InversionReport {
                input: a.clone(),
                tp: tp.clone(),
                inverse,
                residual_right,
                residual_left,
                det_symbol_min: conv.symbol_min,
                grid_size_used: grid,
                refinements,
            });
        }
        let next_points = (grid * 2).checked_pow(2 * tp.dim() as u32);
        if refinements >= cfg.max_refine || next_points.is_none_or(|n| n > MAX_GRID_POINTS) {
            return Err(Error::TruncationNotConverged(format!(
                "twisted residuals {residual_right:e} / {residual_left:e} on a {grid}-point grid"
            )));
        }
        grid *= 2;
        refinements += 1;
    }
}

/// `Σ_{n=0}^{K} (δ − a)^{♮n}` with `K` the first index whose geometric tail
/// bound `r^{K+1}/(1 − r)`, `r = ‖δ − a‖₁`, is at most `tol`.
///
/// Independent of the determinant route; used as a cross-check.
pub fn neumann_inverse(a: &Sequence, tp: &TwistParams, tol: f64, max_iter: usize) -> Result<Sequence> {
    if a.dim() != tp.dim() {
        return Err(Error::DimensionMismatch { expected: tp.dim(), found: a.dim() });
    }
    let delta = Sequence::delta(tp.dim());
    let defect = delta.sub(a)?;
    let r = defect.l1_norm();
    if r >= 1.0 {
        return Err(Error::NotContractive(r));
    }
    let mut terms = 0usize;
    let mut bound = r / (1.0 - r);
    while bound > tol {
        terms += 1;
        bound *= r;
        if terms > max_iter {
            return Err(Error::MaxIterExceeded { needed: terms, max_iter });
        }
    }
    // Pruning each power at tol·1e-6 keeps the support finite; the dropped
    // mass stays far below tol.
    let floor = tol * 1e-6;
    let mut power = delta.clone();
    let mut sum = delta;
    for _ in 0..terms {
        power = power.twisted_convolve(&defect, tp)?.prune(floor);
        sum = sum.add(&power)?;
    }
    Ok(sum)
}
