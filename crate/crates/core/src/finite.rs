//! Twisted convolution on the finite group `Z_p x Z_p`.
//!
//! For fixed `g` the map `f ↦ f ♮ g` is a `p² x p²` block-circulant matrix.
//! The block DFT diagonalizes it into `p` blocks `Ĝ_s`, all unitarily
//! equivalent to `Ĝ_0` through cyclic shifts, which gives two inversion
//! routes: invert every `Ĝ_s`, or invert `Ĝ_0` alone and conjugate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{unit_root, TwistParams};

pub type CMatrix = DMatrix<Complex64>;

/// Default relative singular-value threshold for the `Ĝ_s` blocks.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-10;

/// An element of `C^{p x p}`, indexed `data[j][k] = g_{j,k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGrid {
    p: usize,
    data: Vec<Complex64>,
}

impl FiniteGrid {
    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "grid size must be positive");
        FiniteGrid { p, data: vec![Complex64::default(); p * p] }
    }

    /// The finite delta: 1 at `(0, 0)`.
    pub fn delta(p: usize) -> Self {
        let mut g = Self::zeros(p);
        g.data[0] = Complex64::new(1.0, 0.0);
        g
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::SizeMismatch("grid must have at least one row".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::SizeMismatch(format!("expected {p}x{p} grid, found a row of length {}", bad.len())));
        }
        Ok(FiniteGrid { p, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a grid from its row-major flattening.
    pub fn from_flat(p: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != p * p {
            return Err(Error::SizeMismatch(format!("expected {} values, found {}", p * p, data.len())));
        }
        Ok(FiniteGrid { p, data })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.data[(j % self.p) * self.p + k % self.p]
    }

    pub fn set(&mut self, j: usize, k: usize, v: Complex64) {
        self.data[j * self.p + k] = v;
    }

    /// Value at indices taken mod `p`.
    fn at(&self, j: i64, k: i64) -> Complex64 {
        let p = self.p as i64;
        self.data[(j.rem_euclid(p) * p + k.rem_euclid(p)) as usize]
    }

    /// Row-major flattening by first index, then second.
    pub fn flatten(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.p).map(|c| c.to_vec()).collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FiniteGrid { p: self.p, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// `max |self − other|`.
    pub fn max_abs_diff(&self, other: &FiniteGrid) -> f64 {
        assert_eq!(self.p, other.p);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn params_for(p: usize, q: i64) -> Result<TwistParams> {
    TwistParams::new(p as i64, q, 1)
}

/// `(f ♮ g)_{m,n} = Σ_{k,l} f_{k,l} g_{m−k,n−l} ω^{(m−k)l}` with indices mod `p`.
pub fn finite_twisted_convolve(f: &FiniteGrid, g: &FiniteGrid, q: i64) -> Result<FiniteGrid> {
    if f.p != g.p {
        return Err(Error::SizeMismatch(format!("grids of size {} and {}", f.p, g.p)));
    }
    let tp = params_for(f.p, q)?;
    let p = f.p as i64;
    let mut out = FiniteGrid::zeros(f.p);
    for m in 0..p {
        for n in 0..p {
            let mut acc = Complex64::default();
            for k in 0..p {
                for l in 0..p {
                    acc += f.at(k, l) * g.at(m - k, n - l) * tp.omega_pow((m - k) * l);
                }
            }
            out.set(m as usize, n as usize, acc);
        }
    }
    Ok(out)
}

/// `G = C(G_0, G_{p−1}, …, G_1)`: block `(u, v)` of the full matrix is
/// `G_{(u−v) mod p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCirculant {
    p: usize,
    blocks: Vec<CMatrix>,
}

impl BlockCirculant {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        let p = blocks.len();
        if p == 0 || blocks.iter().any(|b| b.nrows() != p || b.ncols() != p) {
            return Err(Error::SizeMismatch("block-circulant needs p blocks of size p x p".into()));
        }
        Ok(BlockCirculant { p, blocks })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// The full `p² x p²` matrix.
    pub fn assemble(&self) -> CMatrix {
        let p = self.p;
        let mut full = CMatrix::zeros(p * p, p * p);
        for u in 0..p {
            for v in 0..p {
                let block = &self.blocks[(u + p - v) % p];
                full.view_mut((u * p, v * p), (p, p)).copy_from(block);
            }
        }
        full
    }
}

/// Blocks `(G_j)_{k,l} = ω^{jl} g_{j,k−l}` of the matrix of `f ↦ f ♮ g`.
pub fn build_block_circulant(g: &FiniteGrid, q: i64) -> Result<BlockCirculant> {
    let tp = params_for(g.p, q)?;
    let p = g.p;
    let blocks = (0..p)
        .map(|j| {
            CMatrix::from_fn(p, p, |k, l| {
                tp.omega_pow((j * l) as i64) * g.at(j as i64, k as i64 - l as i64)
            })
        })
        .collect();
    BlockCirculant::new(blocks)
}

/// `Ĝ_s = Σ_r e^{−2πi sr/p} G_r` for `s = 0, …, p−1`.
pub fn block_dft(bc: &BlockCirculant) -> Vec<CMatrix> {
    let p = bc.p as i64;
    (0..p)
        .map(|s| {
            bc.blocks
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(bc.p, bc.p), |acc, (r, blk)| acc + blk * unit_root(-s * r as i64, p))
        })
        .collect()
}

/// `H_r = (1/p) Σ_s e^{2πi sr/p} X_s`, the inverse of [`block_dft`].
pub fn inverse_block_dft(hats: &[CMatrix]) -> Vec<CMatrix> {
    let p = hats.len() as i64;
    let n = hats[0].nrows();
    (0..p)
        .map(|r| {
            let sum = hats
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(n, n), |acc, (s, blk)| acc + blk * unit_root(s as i64 * r, p));
            sum / Complex64::new(p as f64, 0.0)
        })
        .collect()
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Inverts a square block, refusing when `σ_min < tol · σ_max`.
fn invert_block(m: &CMatrix, tol: f64, label: &str) -> Result<CMatrix> {
    let sv = m.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smax.is_nan() || smax <= 0.0 || smin < tol * smax {
        return Err(Error::NotInvertible(format!(
            "{label} has smallest singular value {smin:e} (largest {smax:e})"
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::NotInvertible(format!("{label} is singular")))
}

/// Reads `h` from the inverse blocks: `h = G⁻¹ · flatten(δ)`, so
/// `h_{u,n} = (H_u)_{n,0}`.
fn grid_from_inverse_blocks(h_blocks: &[CMatrix]) -> FiniteGrid {
    let p = h_blocks.len();
    let mut h = FiniteGrid::zeros(p);
    for (u, blk) in h_blocks.iter().enumerate() {
        for n in 0..p {
            h.set(u, n, blk[(n, 0)]);
        }
    }
    h
}

/// Inverts `f ↦ f ♮ g` through the block DFT, inverting every `Ĝ_s`.
///
/// Returns `h` with `g ♮ h = h ♮ g = δ`.
pub fn invert_block_circulant(g: &FiniteGrid, q: i64, tol: f64) -> Result<FiniteGrid> {
    let hats = block_dft(&build_block_circulant(g, q)?);
    let inverses = hats
        .iter()
        .enumerate()
        .map(|(s, m)| invert_block(m, tol, &format!("block Ĝ_{s}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid_from_inverse_blocks(&inverse_block_dft(&inverses)))
}

/// Cyclic shift `T_r` with `(T_r x)_k = x_{(k+r) mod p}`, so that
/// `T_r Ĝ_s T_r* = Ĝ_{(s−qr) mod p}`.
///
/// Entry `(k, l)` is 1 iff `k − l ≡ p − r (mod p)`.
pub fn shift_matrix(p: usize, r: usize) -> CMatrix {
    CMatrix::from_fn(p, p, |k, l| {
        if (k + p - l) % p == (p - r % p) % p {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// Inverts only `Ĝ_0` and reaches every other `Ĝ_s⁻¹` by conjugating with
/// the shift `T_r` for which `s ≡ −qr (mod p)`.
pub fn invert_via_ghat0(g: &FiniteGrid, q: i64, tol: f64) -> Result<FiniteGrid> {
    let p = g.p;
    let hats = block_dft(&build_block_circulant(g, q)?);
    let g0_inv = invert_block(&hats[0], tol, "block Ĝ_0")?;
    let pi = p as i64;
    let inverses: Vec<CMatrix> = (0..pi)
        .map(|s| {
            let r = (0..pi)
                .find(|&r| (s + q * r).rem_euclid(pi) == 0)
                .expect("q is a unit mod p");
            let t = shift_matrix(p, r as usize);
            &t * &g0_inv * t.adjoint()
        })
        .collect();
    Ok(grid_from_inverse_blocks(&inverse_block_dft(&inverses)))
}

/// `Ĝ_0` together with how far the printed closed form
/// `Σ_k ω^{nl} g_{k,n−l}` strays from it.
#[derive(Debug, Clone)]
pub struct Ghat0Report {
    /// `Ĝ_0 = Σ_r G_r`.
    pub matrix: CMatrix,
    /// `max_{n,l} |(Ĝ_0)_{n,l} − Σ_k ω^{nl} g_{k,n−l}|`.
    pub closed_form_discrepancy: f64,
}

pub fn ghat0_entries(g: &FiniteGrid, q: i64) -> Result<Ghat0Report> {
    let tp = params_for(g.p, q)?;
    let matrix = block_dft(&build_block_circulant(g, q)?).swap_remove(0);
    let p = g.p as i64;
    let mut discrepancy: f64 = 0.0;
    for n in 0..p {
        for l in 0..p {
            let printed: Complex64 = (0..p).map(|k| tp.omega_pow(n * l) * g.at(k, n - l)).sum();
            discrepancy = discrepancy.max((matrix[(n as usize, l as usize)] - printed).norm());
        }
    }
    Ok(Ghat0Report { matrix, closed_form_discrepancy: discrepancy })
}
