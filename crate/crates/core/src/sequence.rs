//! Finitely supported complex sequences on `Z^{2d}`.
//!
//! An index is a pair `(k, l)` of integer vectors of length `d`; a
//! [`Sequence`] stores its non-zero values sparsely and in canonical order,
//! which fixes the floating point summation order of every product.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::params::TwistParams;

/// Index `(k, l)` stored as the concatenation `k ++ l`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeqIndex(SmallVec<[i64; 4]>);

impl SeqIndex {
    pub fn new(k: &[i64], l: &[i64]) -> Self {
        debug_assert_eq!(k.len(), l.len());
        let mut v = SmallVec::with_capacity(k.len() * 2);
        v.extend_from_slice(k);
        v.extend_from_slice(l);
        SeqIndex(v)
    }

    /// The first (time-like) half.
    pub fn k(&self) -> &[i64] {
        &self.0[..self.0.len() / 2]
    }

    /// The second (frequency-like) half.
    pub fn l(&self) -> &[i64] {
        &self.0[self.0.len() / 2..]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() / 2
    }

    fn add(&self, other: &SeqIndex) -> SeqIndex {
        SeqIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// True when `k ≡ r` and `l ≡ s` componentwise mod `p`.
    pub fn in_coset(&self, r: &[i64], s: &[i64], p: i64) -> bool {
        self.k().iter().zip(r).all(|(a, b)| (a - b).rem_euclid(p) == 0)
            && self.l().iter().zip(s).all(|(a, b)| (a - b).rem_euclid(p) == 0)
    }

    /// True when `l ≡ s` componentwise mod `p` (the coset `Z^d x (s + pZ^d)`).
    pub fn in_second_coset(&self, s: &[i64], p: i64) -> bool {
        self.l().iter().zip(s).all(|(a, b)| (a - b).rem_euclid(p) == 0)
    }
}

/// A finitely supported element of `l^1(Z^{2d})`.
///
/// No stored value is exactly zero; two sequences compare equal iff their
/// canonical entry maps agree.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    dim: usize,
    entries: BTreeMap<SeqIndex, Complex64>,
}

impl Sequence {
    /// The empty (zero) sequence.
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "sequence dimension must be positive");
        Sequence { dim, entries: BTreeMap::new() }
    }

    /// The unit `δ` with a single 1 at the origin.
    pub fn delta(dim: usize) -> Self {
        Self::single(&vec![0; dim], &vec![0; dim], Complex64::new(1.0, 0.0))
    }

    /// `value · δ_(k,l)`.
    pub fn single(k: &[i64], l: &[i64], value: Complex64) -> Self {
        assert_eq!(k.len(), l.len(), "k and l must have equal length");
        let mut s = Self::zero(k.len());
        s.add_at(SeqIndex::new(k, l), value);
        s
    }

    /// Builds a sequence from `(k, l, value)` triples, summing repeated indices.
    pub fn from_triples<I>(dim: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Vec<i64>, Complex64)>,
    {
        let mut s = Self::zero(dim);
        for (k, l, v) in triples {
            if k.len() != dim || l.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: k.len().max(l.len()) });
            }
            s.add_at(SeqIndex::new(&k, &l), v);
        }
        Ok(s)
    }

    pub(crate) fn from_map(dim: usize, map: HashMap<SeqIndex, Complex64>) -> Self {
        let entries = map.into_iter().filter(|(_, v)| !is_exact_zero(*v)).collect();
        Sequence { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SeqIndex, &Complex64)> {
        self.entries.iter()
    }

    /// Value at `(k, l)`, zero when absent.
    pub fn get(&self, k: &[i64], l: &[i64]) -> Complex64 {
        self.entries.get(&SeqIndex::new(k, l)).copied().unwrap_or_default()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().fold(0.0, |acc, v| acc + v.norm())
    }

    /// Largest absolute index component over the support (0 when empty).
    pub fn support_radius(&self) -> i64 {
        self.entries
            .keys()
            .flat_map(|idx| idx.as_slice().iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    fn check_dim(&self, other: &Sequence) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Sequence) -> Result<Sequence> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (idx, v) in &other.entries {
            out.add_at(idx.clone(), *v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Sequence) -> Result<Sequence> {
        self.add(&other.negate())
    }

    pub fn scale(&self, c: Complex64) -> Sequence {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v * c))
            .filter(|(_, v)| !is_exact_zero(*v))
            .collect();
        Sequence { dim: self.dim, entries }
    }

    pub fn negate(&self) -> Sequence {
        let entries = self.entries.iter().map(|(k, v)| (k.clone(), -v)).collect();
        Sequence { dim: self.dim, entries }
    }

    fn add_at(&mut self, idx: SeqIndex, v: Complex64) {
        use std::collections::btree_map::Entry;
        match self.entries.entry(idx) {
            Entry::Vacant(e) => {
                if !is_exact_zero(v) {
                    e.insert(v);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += v;
                if is_exact_zero(*e.get()) {
                    e.remove();
                }
            }
        }
    }

    /// `‖self − other‖₁`.
    pub fn l1_distance(&self, other: &Sequence) -> Result<f64> {
        Ok(self.sub(other)?.l1_norm())
    }

    /// Drops every entry with modulus below `tol`.
    pub fn prune(&self, tol: f64) -> Sequence {
        let entries = self
            .entries
            .iter()
            .filter(|(_, v)| v.norm() >= tol)
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        Sequence { dim: self.dim, entries }
    }

    /// Keeps only the entries for which `keep` holds.
    pub fn filter<F: Fn(&SeqIndex) -> bool>(&self, keep: F) -> Sequence {
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| keep(k))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        Sequence { dim: self.dim, entries }
    }

    /// Ordinary convolution `(a ∗ b)_{m,n} = Σ a_{k,l} b_{m−k,n−l}`.
    pub fn convolve(&self, other: &Sequence) -> Result<Sequence> {
        self.check_dim(other)?;
        // Loop order depends only on the operand pair, so a ∗ b and b ∗ a
        // are bitwise identical.
        let (outer, inner) = if canonical_first(self, other) { (self, other) } else { (other, self) };
        let mut acc: HashMap<SeqIndex, Complex64> =
            HashMap::with_capacity(self.len() * other.len());
        for (ia, va) in &outer.entries {
            for (ib, vb) in &inner.entries {
                *acc.entry(ia.add(ib)).or_default() += va * vb;
            }
        }
        Ok(Sequence::from_map(self.dim, acc))
    }

    /// Twisted convolution
    /// `(a ♮ b)_{m,n} = Σ a_{k,l} b_{m−k,n−l} ω^{(m−k)·l}`.
    pub fn twisted_convolve(&self, other: &Sequence, tp: &TwistParams) -> Result<Sequence> {
        self.check_dim(other)?;
        if self.dim != tp.dim() {
            return Err(Error::DimensionMismatch { expected: tp.dim(), found: self.dim });
        }
        if tp.p() == 1 {
            // ω = 1; share the ordinary product's summation order.
            return self.convolve(other);
        }
        let mut acc: HashMap<SeqIndex, Complex64> =
            HashMap::with_capacity(self.len() * other.len());
        for (ia, va) in &self.entries {
            for (ib, vb) in &other.entries {
                let phase = tp.omega_dot(ib.k(), ia.l());
                *acc.entry(ia.add(ib)).or_default() += va * vb * phase;
            }
        }
        Ok(Sequence::from_map(self.dim, acc))
    }

    /// The coset piece `a^{r,s}`: entries with `(k, l) ≡ (r, s)` mod `p`.
    pub fn coset_restrict(&self, r: &[i64], s: &[i64], p: i64) -> Result<Sequence> {
        if r.len() != self.dim || s.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: r.len().max(s.len()) });
        }
        if p < 1 {
            return Err(Error::InvalidParams(format!("p must be positive, got {p}")));
        }
        if let Some(x) = r.iter().chain(s).find(|&&x| x < 0 || x >= p) {
            return Err(Error::IndexOutOfRange(format!("coset component {x} not in [0, {p})")));
        }
        Ok(self.filter(|idx| idx.in_coset(r, s, p)))
    }

    /// Twisted convolution assembled from coset pieces,
    /// `(a ♮ b)^{u,v} = Σ_{r,s} a^{r,s} ∗ b^{u−r,v−s} ω^{(u−r)·s}`.
    ///
    /// Independent of [`twisted_convolve`](Self::twisted_convolve); the two
    /// routes check each other.
    pub fn coset_twisted_convolve(&self, other: &Sequence, tp: &TwistParams) -> Result<Sequence> {
        self.check_dim(other)?;
        if self.dim != tp.dim() {
            return Err(Error::DimensionMismatch { expected: tp.dim(), found: self.dim });
        }
        let p = tp.p();
        let reps = tp.coset_reps();
        let pieces = |x: &Sequence| -> Result<Vec<Vec<Sequence>>> {
            reps.iter()
                .map(|r| reps.iter().map(|s| x.coset_restrict(r, s, p)).collect())
                .collect()
        };
        let a_pieces = pieces(self)?;
        let b_pieces = pieces(other)?;
        let diff = |u: &[i64], r: &[i64]| -> Vec<i64> {
            u.iter().zip(r).map(|(x, y)| (x - y).rem_euclid(p)).collect()
        };

        let mut total = Sequence::zero(self.dim);
        for u in &reps {
            for v in &reps {
                for (ri, r) in reps.iter().enumerate() {
                    let u_r = diff(u, r);
                    for (si, s) in reps.iter().enumerate() {
                        let a_rs = &a_pieces[ri][si];
                        if a_rs.is_empty() {
                            continue;
                        }
                        let b_part = &b_pieces[tp.coset_position(&u_r)][tp.coset_position(&diff(v, s))];
                        if b_part.is_empty() {
                            continue;
                        }
                        let term = a_rs.convolve(b_part)?.scale(tp.omega_dot(&u_r, s));
                        for (idx, val) in term.entries {
                            total.add_at(idx, val);
                        }
                    }
                }
            }
        }
        Ok(total)
    }
}

fn canonical_first(a: &Sequence, b: &Sequence) -> bool {
    use std::cmp::Ordering;
    let by_len = a.len().cmp(&b.len());
    let ord = by_len.then_with(|| {
        a.entries
            .iter()
            .zip(&b.entries)
            .map(|((ka, va), (kb, vb))| {
                ka.cmp(kb)
                    .then(va.re.to_bits().cmp(&vb.re.to_bits()))
                    .then(va.im.to_bits().cmp(&vb.im.to_bits()))
            })
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    ord != Ordering::Greater
}

fn is_exact_zero(v: Complex64) -> bool {
    v.re == 0.0 && v.im == 0.0
}
