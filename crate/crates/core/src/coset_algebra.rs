//! The algebra `(M, ⊛)` of `N x N` matrices (`N = p^d`) whose entries are
//! sequences multiplied by ordinary convolution.
//!
//! Row and column indices are 1-based throughout this module, matching the
//! enumeration `k_1 = 0, k_2, …, k_N` of `Z_p^d` returned by
//! [`TwistParams::coset_reps`].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::TwistParams;
use crate::sequence::Sequence;

/// Largest matrix size the determinant will expand by default.
pub const DEFAULT_DET_CAP: usize = 6;

/// Relative floor under which a coefficient counts as numerically zero in
/// support checks.
pub const SUPPORT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SeqMatrix {
    tp: TwistParams,
    n: usize,
    entries: Vec<Sequence>,
}

impl SeqMatrix {
    /// Builds a matrix from rows; all entries must have dimension `tp.dim()`.
    pub fn from_rows(tp: &TwistParams, rows: Vec<Vec<Sequence>>) -> Result<Self> {
        let n = tp.n();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::SizeMismatch(format!("expected a {n}x{n} matrix")));
        }
        let entries: Vec<Sequence> = rows.into_iter().flatten().collect();
        if let Some(bad) = entries.iter().find(|e| e.dim() != tp.dim()) {
            return Err(Error::DimensionMismatch { expected: tp.dim(), found: bad.dim() });
        }
        Ok(SeqMatrix { tp: tp.clone(), n, entries })
    }

    pub fn zero(tp: &TwistParams) -> Self {
        let n = tp.n();
        SeqMatrix { tp: tp.clone(), n, entries: vec![Sequence::zero(tp.dim()); n * n] }
    }

    /// `Id`: `δ` on the diagonal.
    pub fn identity(tp: &TwistParams) -> Self {
        let mut m = Self::zero(tp);
        for i in 1..=m.n {
            *m.entry_mut(i, i) = Sequence::delta(tp.dim());
        }
        m
    }

    pub fn params(&self) -> &TwistParams {
        &self.tp
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> &Sequence {
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut Sequence {
        &mut self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<Sequence>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Sum of entrywise `ℓ¹` distances.
    pub fn distance(&self, other: &SeqMatrix) -> Result<f64> {
        self.check_compatible(other)?;
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.l1_distance(b))
            .sum()
    }

    fn check_compatible(&self, other: &SeqMatrix) -> Result<()> {
        if self.tp != other.tp {
            return Err(Error::SizeMismatch("matrices carry different twist parameters".into()));
        }
        Ok(())
    }
}

/// `(φ(a))_{i,j} = Σ_m ω^{m·k_j} a^{m, k_i − k_j}`.
pub fn phi(a: &Sequence, tp: &TwistParams) -> Result<SeqMatrix> {
    if a.dim() != tp.dim() {
        return Err(Error::DimensionMismatch { expected: tp.dim(), found: a.dim() });
    }
    let p = tp.p();
    let reps = tp.coset_reps();
    let n = reps.len();
    // Every entry of `a` lands in exactly one coset piece; bucket them once.
    let mut pieces: HashMap<(usize, usize), Sequence> = HashMap::new();
    for m in &reps {
        for s in &reps {
            let piece = a.coset_restrict(m, s, p)?;
            if !piece.is_empty() {
                pieces.insert((tp.coset_position(m), tp.coset_position(s)), piece);
            }
        }
    }
    let mut out = SeqMatrix::zero(tp);
    for i in 0..n {
        for j in 0..n {
            let diff: Vec<i64> = reps[i].iter().zip(&reps[j]).map(|(x, y)| (x - y).rem_euclid(p)).collect();
            let s_pos = tp.coset_position(&diff);
            let mut acc = Sequence::zero(tp.dim());
            for (m_pos, m) in reps.iter().enumerate() {
                if let Some(piece) = pieces.get(&(m_pos, s_pos)) {
                    acc = acc.add(&piece.scale(tp.omega_dot(m, &reps[j])))?;
                }
            }
            *out.entry_mut(i + 1, j + 1) = acc;
        }
    }
    Ok(out)
}

/// `(A ⊛ B)_{i,j} = Σ_l A_{i,l} ∗ B_{l,j}`.
pub fn mat_multiply(a: &SeqMatrix, b: &SeqMatrix) -> Result<SeqMatrix> {
    a.check_compatible(b)?;
    let n = a.n;
    let mut out = SeqMatrix::zero(&a.tp);
    for i in 1..=n {
        for j in 1..=n {
            let mut acc = Sequence::zero(a.tp.dim());
            for l in 1..=n {
                let (x, y) = (a.entry(i, l), b.entry(l, j));
                if x.is_empty() || y.is_empty() {
                    continue;
                }
                acc = acc.add(&x.convolve(y)?)?;
            }
            *out.entry_mut(i, j) = acc;
        }
    }
    Ok(out)
}

/// Determinant with the default size cap.
pub fn determinant(a: &SeqMatrix) -> Result<Sequence> {
    determinant_with_cap(a, DEFAULT_DET_CAP)
}

/// Determinant by cofactor expansion along the first remaining row,
/// memoized on the set of still-unused columns.
pub fn determinant_with_cap(a: &SeqMatrix, cap: usize) -> Result<Sequence> {
    if a.n > cap {
        return Err(Error::DeterminantTooLarge { n: a.n, cap });
    }
    let mut memo = HashMap::new();
    let full = (1u64 << a.n) - 1;
    minor_det(a, full, &mut memo)
}

fn minor_det(a: &SeqMatrix, cols: u64, memo: &mut HashMap<u64, Sequence>) -> Result<Sequence> {
    if cols == 0 {
        return Ok(Sequence::delta(a.tp.dim()));
    }
    if let Some(d) = memo.get(&cols) {
        return Ok(d.clone());
    }
    let row = a.n - cols.count_ones() as usize + 1;
    let mut acc = Sequence::zero(a.tp.dim());
    let mut position = 0;
    for c in 0..a.n {
        if cols & (1 << c) == 0 {
            continue;
        }
        let entry = a.entry(row, c + 1);
        if !entry.is_empty() {
            let sub = minor_det(a, cols & !(1 << c), memo)?;
            let term = entry.convolve(&sub)?;
            acc = if position % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
        }
        position += 1;
    }
    memo.insert(cols, acc.clone());
    Ok(acc)
}

/// Determinant as the plain Leibniz sum `Σ_σ sgn(σ) Π_i A_{σ(i), i}`.
pub fn determinant_leibniz(a: &SeqMatrix, cap: usize) -> Result<Sequence> {
    if a.n > cap {
        return Err(Error::DeterminantTooLarge { n: a.n, cap });
    }
    let mut perm: Vec<usize> = (0..a.n).collect();
    let mut acc = Sequence::zero(a.tp.dim());
    leibniz_rec(a, &mut perm, 0, true, &mut acc)?;
    Ok(acc)
}

fn leibniz_rec(a: &SeqMatrix, perm: &mut [usize], depth: usize, even: bool, acc: &mut Sequence) -> Result<()> {
    let n = perm.len();
    if depth == n {
        let mut prod = Sequence::delta(a.tp.dim());
        for (col, &row) in perm.iter().enumerate() {
            prod = prod.convolve(a.entry(row + 1, col + 1))?;
            if prod.is_empty() {
                return Ok(());
            }
        }
        *acc = if even { acc.add(&prod)? } else { acc.sub(&prod)? };
        return Ok(());
    }
    for swap in depth..n {
        perm.swap(depth, swap);
        leibniz_rec(a, perm, depth + 1, if swap == depth { even } else { !even }, acc)?;
        perm.swap(depth, swap);
    }
    Ok(())
}

/// `A(j, i)`: row `j` replaced by zeros with `δ` in column `i`, and column
/// `i` replaced by zeros with `δ` in row `j` (1-based).
///
/// `det(A(j, i))` is the `(i, j)` entry of the adjugate.
pub fn minor_matrix(a: &SeqMatrix, j: usize, i: usize) -> Result<SeqMatrix> {
    let n = a.n;
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::IndexOutOfRange(format!("minor ({j}, {i}) outside 1..={n}")));
    }
    let mut out = a.clone();
    let zero = Sequence::zero(a.tp.dim());
    for c in 1..=n {
        *out.entry_mut(j, c) = zero.clone();
    }
    for r in 1..=n {
        *out.entry_mut(r, i) = zero.clone();
    }
    *out.entry_mut(j, i) = Sequence::delta(a.tp.dim());
    Ok(out)
}

/// First column of the Cramer inverse, `B̃_{i,1} = det(A(1, i)) ∗ e`, where
/// `e` is the convolution inverse of `det(A)`.
pub fn cramer_first_column(a: &SeqMatrix, e: &Sequence) -> Result<Vec<Sequence>> {
    (1..=a.n)
        .map(|i| determinant(&minor_matrix(a, 1, i)?)?.convolve(e))
        .collect()
}

/// Splits `seq` into its part on `Z^d x (s + pZ^d)` and the rest.
pub fn split_second_coset(seq: &Sequence, s: &[i64], p: i64) -> (Sequence, Sequence) {
    (
        seq.filter(|idx| idx.in_second_coset(s, p)),
        seq.filter(|idx| !idx.in_second_coset(s, p)),
    )
}

/// Restricts `seq` to `Z^d x (s + pZ^d)`, failing if the discarded part has
/// any coefficient above `SUPPORT_FLOOR · max(1, ‖seq‖₁)`.
pub fn enforce_second_coset(seq: &Sequence, s: &[i64], p: i64, what: &str) -> Result<Sequence> {
    let (on, off) = split_second_coset(seq, s, p);
    let floor = SUPPORT_FLOOR * seq.l1_norm().max(1.0);
    if let Some((idx, v)) = off.iter().find(|(_, v)| v.norm() > floor) {
        return Err(Error::OverlappingSupports(format!(
            "{what}: coefficient {:e} at {:?} lies off the coset l ≡ {s:?} mod {p}",
            v.norm(),
            idx.as_slice()
        )));
    }
    Ok(on)
}

/// Sums a Cramer column `B̃_{1,1} + … + B̃_{N,1}` after checking that entry
/// `i` lives on `Z^d x (k_i + pZ^d)`; sub-floor noise off the coset is
/// dropped.
pub fn extract_sequence(column: &[Sequence], tp: &TwistParams) -> Result<Sequence> {
    let reps = tp.coset_reps();
    if column.len() != reps.len() {
        return Err(Error::SizeMismatch(format!("column of length {} for N = {}", column.len(), reps.len())));
    }
    let mut b = Sequence::zero(tp.dim());
    for (i, (entry, k_i)) in column.iter().zip(&reps).enumerate() {
        let on = enforce_second_coset(entry, k_i, tp.p(), &format!("column entry {}", i + 1))?;
        b = b.add(&on)?;
    }
    Ok(b)
}

/// Outcome of testing a matrix for membership in the image of [`phi`].
#[derive(Debug, Clone)]
pub struct M0Check {
    pub member: bool,
    /// Candidate `b = Σ_i A_{i,1}`.
    pub reconstructed: Sequence,
    /// `Σ_{i,j} ‖A_{i,j} − φ(b)_{i,j}‖₁`.
    pub deviation: f64,
}

pub fn is_in_m0(a: &SeqMatrix) -> Result<M0Check> {
    let mut b = Sequence::zero(a.tp.dim());
    for i in 1..=a.n {
        b = b.add(a.entry(i, 1))?;
    }
    let rebuilt = phi(&b, &a.tp)?;
    let deviation = a.distance(&rebuilt)?;
    let scale = a.entries.iter().map(Sequence::l1_norm).sum::<f64>().max(1.0);
    Ok(M0Check { member: deviation <= SUPPORT_FLOOR * scale, reconstructed: b, deviation })
}
