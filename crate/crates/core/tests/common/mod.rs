//! Independent reference implementations and random inputs shared by the
//! integration tests. Nothing here calls the library's numerical kernels.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use twisted_conv::finite::FiniteGrid;
use twisted_conv::{Sequence, TwistParams};

pub type CMat = DMatrix<Complex64>;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn expi(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Direct double sum `Σ a_{k,l} b_{m−k,n−l} e^{2πi q (m−k)·l / p}`.
pub fn naive_twisted(a: &Sequence, b: &Sequence, p: i64, q: i64) -> Sequence {
    let d = a.dim();
    let mut acc: BTreeMap<(Vec<i64>, Vec<i64>), Complex64> = BTreeMap::new();
    for (ia, va) in a.iter() {
        for (ib, vb) in b.iter() {
            let m: Vec<i64> = (0..d).map(|j| ia.k()[j] + ib.k()[j]).collect();
            let n: Vec<i64> = (0..d).map(|j| ia.l()[j] + ib.l()[j]).collect();
            let dot: i64 = (0..d).map(|j| ib.k()[j] * ia.l()[j]).sum();
            let phase = expi(2.0 * PI * (q * dot) as f64 / p as f64);
            *acc.entry((m, n)).or_default() += va * vb * phase;
        }
    }
    Sequence::from_triples(d, acc.into_iter().map(|((k, l), v)| (k, l, v))).unwrap()
}

/// Random sequence with `points` entries in `[-radius, radius]^{2d}`.
pub fn random_sequence(rng: &mut ChaCha8Rng, dim: usize, points: usize, radius: i64) -> Sequence {
    let triples: Vec<_> = (0..points)
        .map(|_| {
            let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
            let l: Vec<i64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
            (k, l, cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    Sequence::from_triples(dim, triples).unwrap()
}

/// `δ − d` with `‖d‖₁ = r` exactly.
pub fn contractive(rng: &mut ChaCha8Rng, points: usize, radius: i64, r: f64) -> Sequence {
    let d = random_sequence(rng, 1, points, radius);
    let d = d.scale(cx(r / d.l1_norm(), 0.0));
    Sequence::delta(1).sub(&d).unwrap()
}

/// A `q` coprime to `p`, drawn from `[-2p, 2p]`.
pub fn coprime_q(rng: &mut ChaCha8Rng, p: i64) -> i64 {
    loop {
        let q: i64 = rng.gen_range(-2 * p..=2 * p);
        if gcd(p, q) == 1 {
            return q;
        }
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `p×p` grid with `|g_{0,0}|` exceeding the sum of all other moduli.
pub fn diag_dominant_grid(rng: &mut ChaCha8Rng, p: usize) -> FiniteGrid {
    let mut data: Vec<Complex64> = (0..p * p).map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let off: f64 = data[1..].iter().map(|z| z.norm()).sum();
    data[0] = expi(rng.gen_range(0.0..2.0 * PI)) * (off + 1.0);
    FiniteGrid::from_flat(p, data).unwrap()
}

/// Matrix of `f ↦ f ♮ g` on `C^{p×p}` flattened row-major, built entry by entry.
pub fn dense_cg(g: &FiniteGrid, q: i64) -> CMat {
    let p = g.p();
    let pi = p as i64;
    let mut m = CMat::zeros(p * p, p * p);
    for mm in 0..pi {
        for n in 0..pi {
            for k in 0..pi {
                for l in 0..pi {
                    let (dj, dk) = ((mm - k).rem_euclid(pi), (n - l).rem_euclid(pi));
                    let phase = expi(2.0 * PI * (q * dj * l) as f64 / pi as f64);
                    m[((mm * pi + n) as usize, (k * pi + l) as usize)] = g.get(dj as usize, dk as usize) * phase;
                }
            }
        }
    }
    m
}

/// `h` with `h ♮ g = δ`, from a dense LU solve.
pub fn dense_finite_inverse(g: &FiniteGrid, q: i64) -> FiniteGrid {
    let p = g.p();
    let mut rhs = DVector::zeros(p * p);
    rhs[0] = cx(1.0, 0.0);
    let h = dense_cg(g, q).lu().solve(&rhs).expect("singular C_g");
    FiniteGrid::from_flat(p, h.iter().copied().collect()).unwrap()
}

/// `(G_j)_{k,l} = ω^{jl} g_{j,k−l}` and `Ĝ_s = Σ_j e^{−2πisj/p} G_j`.
pub fn ghat(g: &FiniteGrid, q: i64, s: usize) -> CMat {
    let p = g.p();
    let pi = p as i64;
    let mut out = CMat::zeros(p, p);
    for j in 0..pi {
        let w = expi(-2.0 * PI * (s as i64 * j) as f64 / pi as f64);
        for k in 0..pi {
            for l in 0..pi {
                let phase = expi(2.0 * PI * (q * j * l) as f64 / pi as f64);
                out[(k as usize, l as usize)] += w * phase * g.get(j as usize, (k - l).rem_euclid(pi) as usize);
            }
        }
    }
    out
}

/// `(T_r x)_k = x_{k+r}`.
pub fn shift(p: usize, r: usize) -> CMat {
    CMat::from_fn(p, p, |k, l| if l == (k + r) % p { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(π(x,w)f)(t) = e^{2πi w (t−x)/L} f(t−x)`.
pub fn tf_shift(f: &[Complex64], x: i64, w: i64) -> Vec<Complex64> {
    let l = f.len() as i64;
    (0..l)
        .map(|t| {
            let u = (t - x).rem_euclid(l);
            expi(2.0 * PI * (w * u) as f64 / l as f64) * f[u as usize]
        })
        .collect()
}

pub fn tf_matrix(len: usize, x: i64, w: i64) -> CMat {
    let mut m = CMat::zeros(len, len);
    for j in 0..len {
        let mut e = vec![cx(0.0, 0.0); len];
        e[j] = cx(1.0, 0.0);
        for (i, v) in tf_shift(&e, x, w).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// `S = Σ_{n,m} v v^*` with `v = π(n·a, m·b) g`.
pub fn dense_frame_operator(g: &[Complex64], a: usize, b: usize) -> CMat {
    let len = g.len();
    let mut s = CMat::zeros(len, len);
    for n in 0..len / a {
        for m in 0..len / b {
            let v = DVector::from_vec(tf_shift(g, (n * a) as i64, (m * b) as i64));
            s += &v * v.adjoint();
        }
    }
    s
}

pub fn gaussian(len: usize, sigma: f64) -> Vec<Complex64> {
    (0..len)
        .map(|t| {
            let d = t.min(len - t) as f64;
            cx((-PI * d * d / (sigma * sigma)).exp(), 0.0)
        })
        .collect()
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff_norm2(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `ℓ¹` mass of the entries outside `Z^d × (s + pZ^d)`.
pub fn off_second_coset_mass(seq: &Sequence, s: &[i64], p: i64) -> f64 {
    seq.iter()
        .filter(|(idx, _)| idx.l().iter().zip(s).any(|(l, s)| (l - s).rem_euclid(p) != 0))
        .fold(0.0, |acc, (_, v)| acc + v.norm())
}

/// `k_i` in lexicographic order, `k_1 = 0` (0-based `i` here).
pub fn coset_rep(tp: &TwistParams, i: usize) -> Vec<i64> {
    let p = tp.p();
    let mut rest = i as i64;
    let mut out = vec![0; tp.dim()];
    for slot in out.iter_mut().rev() {
        *slot = rest % p;
        rest /= p;
    }
    out
}
