mod common;

use common::*;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use twisted_conv::conv_inverse::{conv_residual, invert_convolution, invert_convolution_detailed, InversionConfig};
use twisted_conv::coset_algebra::{
    determinant, determinant_leibniz, is_in_m0, mat_multiply, phi, DEFAULT_DET_CAP,
};
use twisted_conv::finite::{
    build_block_circulant, finite_twisted_convolve, invert_block_circulant, invert_via_ghat0, FiniteGrid,
    DEFAULT_SINGULAR_TOL,
};
use twisted_conv::gabor::{apply_kappa, frame_operator_dense, janssen_coefficients, kappa_matrix, GaborConfig};
use twisted_conv::io::{from_json, to_canonical_json};
use twisted_conv::twisted_inverse::{invert_twisted, neumann_inverse};
use twisted_conv::{Sequence, TwistParams};

fn seq_with(dim: usize, points: std::ops::RangeInclusive<usize>, radius: i64) -> impl Strategy<Value = Sequence> {
    let index = prop::collection::vec(-radius..=radius, 2 * dim);
    prop::collection::vec((index, -1.0..1.0f64, -1.0..1.0f64), points).prop_map(move |raw| {
        let triples: Vec<_> = raw
            .into_iter()
            .map(|(idx, re, im)| (idx[..dim].to_vec(), idx[dim..].to_vec(), Complex64::new(re, im)))
            .collect();
        Sequence::from_triples(dim, triples).unwrap()
    })
}

fn seq(points: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Sequence> {
    seq_with(1, points, 5)
}

fn params(dim: usize) -> impl Strategy<Value = TwistParams> {
    (2i64..=3, -6i64..=6)
        .prop_filter("coprime", |(p, q)| gcd(*p, *q) == 1)
        .prop_map(move |(p, q)| TwistParams::new(p, q, dim).unwrap())
}

/// `δ − d` with `‖d‖₁ = r`.
fn contractive_seq(r: std::ops::Range<f64>) -> impl Strategy<Value = Sequence> {
    (seq_with(1, 1..=4, 2), r).prop_map(|(d, r)| {
        let d = d.scale(Complex64::new(r / d.l1_norm(), 0.0));
        Sequence::delta(1).sub(&d).unwrap()
    })
}

fn grid(p: usize) -> impl Strategy<Value = FiniteGrid> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), p * p).prop_map(move |v| {
        FiniteGrid::from_flat(p, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
    })
}

fn dominant(mut g: FiniteGrid) -> FiniteGrid {
    let off: f64 = g.flatten()[1..].iter().map(|z| z.norm()).sum();
    g.set(0, 0, Complex64::new(off + 1.0, 0.0));
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coset_pieces_partition_the_sequence(a in seq(1..=30), p in 1i64..=4) {
        let mut total = Sequence::zero(1);
        for r in 0..p {
            for s in 0..p {
                total = total.add(&a.coset_restrict(&[r], &[s], p).unwrap()).unwrap();
            }
        }
        prop_assert_eq!(total, a);
    }

    #[test]
    fn products_of_coset_pieces_land_on_the_sum_coset(a in seq(1..=20), b in seq(1..=20), p in 2i64..=4,
                                                       r in 0i64..4, s in 0i64..4, u in 0i64..4, v in 0i64..4) {
        let (r, s, u, v) = (r % p, s % p, u % p, v % p);
        let prod = a.coset_restrict(&[r], &[s], p).unwrap().convolve(&b.coset_restrict(&[u], &[v], p).unwrap()).unwrap();
        for (idx, _) in prod.iter() {
            prop_assert!(idx.in_coset(&[u + r], &[v + s], p));
        }
    }

    #[test]
    fn twisted_product_matches_oracle_and_coset_route(a in seq(1..=50), b in seq(1..=50), tp in params(1)) {
        let direct = a.twisted_convolve(&b, &tp).unwrap();
        prop_assert!(direct.l1_distance(&a.coset_twisted_convolve(&b, &tp).unwrap()).unwrap() <= 1e-12);
        // The oracle evaluates phases with floating exp, so compare on the
        // scale of the product's rounding error.
        let gap = direct.l1_distance(&naive_twisted(&a, &b, tp.p(), tp.q())).unwrap();
        prop_assert!(gap <= 1e-12 * (a.l1_norm() * b.l1_norm()).max(1.0), "gap {gap:e}");
    }

    #[test]
    fn two_dimensional_twisted_product(a in seq_with(2, 1..=15, 3), b in seq_with(2, 1..=15, 3), q in prop::sample::select(vec![1i64, -1, 3])) {
        let tp = TwistParams::new(2, q, 2).unwrap();
        let direct = a.twisted_convolve(&b, &tp).unwrap();
        let gap = direct.l1_distance(&naive_twisted(&a, &b, 2, q)).unwrap();
        prop_assert!(gap <= 1e-12 * (a.l1_norm() * b.l1_norm()).max(1.0), "gap {gap:e}");
        prop_assert!(direct.l1_distance(&a.coset_twisted_convolve(&b, &tp).unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn twisted_product_is_associative(a in seq(1..=8), b in seq(1..=8), c in seq(1..=8), tp in params(1)) {
        let left = a.twisted_convolve(&b, &tp).unwrap().twisted_convolve(&c, &tp).unwrap();
        let right = a.twisted_convolve(&b.twisted_convolve(&c, &tp).unwrap(), &tp).unwrap();
        prop_assert!(left.l1_distance(&right).unwrap() <= 1e-12);
    }

    #[test]
    fn l1_norm_is_submultiplicative(a in seq(1..=30), b in seq(1..=30), tp in params(1)) {
        let prod = a.twisted_convolve(&b, &tp).unwrap();
        prop_assert!(prod.l1_norm() <= a.l1_norm() * b.l1_norm() + 1e-12);
    }

    #[test]
    fn p_one_is_ordinary_convolution(a in seq(1..=20), b in seq(1..=20), q in -5i64..=5) {
        let tp = TwistParams::new(1, q, 1).unwrap();
        prop_assert_eq!(a.twisted_convolve(&b, &tp).unwrap(), a.convolve(&b).unwrap());
    }

    #[test]
    fn sequence_json_round_trips_exactly(a in seq(0..=20)) {
        let back: Sequence = from_json(&to_canonical_json(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn phi_is_an_anti_homomorphism(a in seq(1..=30), b in seq(1..=30), tp in params(1)) {
        let lhs = phi(&a.twisted_convolve(&b, &tp).unwrap(), &tp).unwrap();
        let rhs = mat_multiply(&phi(&b, &tp).unwrap(), &phi(&a, &tp).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn phi_is_linear_and_lands_in_m0(a in seq(1..=20), b in seq(1..=20), tp in params(1), re in -2.0..2.0f64) {
        let c = Complex64::new(re, 0.5);
        let lhs = phi(&a.scale(c).add(&b).unwrap(), &tp).unwrap();
        let pa = phi(&a, &tp).unwrap();
        let pb = phi(&b, &tp).unwrap();
        for i in 1..=tp.n() {
            for j in 1..=tp.n() {
                let expected = pa.entry(i, j).scale(c).add(pb.entry(i, j)).unwrap();
                prop_assert!(lhs.entry(i, j).l1_distance(&expected).unwrap() <= 1e-12);
            }
        }
        let check = is_in_m0(&pa).unwrap();
        prop_assert!(check.member);
        prop_assert_eq!(check.reconstructed, a);
    }

    #[test]
    fn determinant_expansions_agree(a in seq(1..=12), tp in params(1)) {
        let m = phi(&a, &tp).unwrap();
        let cofactor = determinant(&m).unwrap();
        let leibniz = determinant_leibniz(&m, DEFAULT_DET_CAP).unwrap();
        prop_assert!(cofactor.l1_distance(&leibniz).unwrap() <= 1e-12 * cofactor.l1_norm().max(1.0));
    }

    #[test]
    fn determinant_is_multiplicative(a in seq(1..=8), b in seq(1..=8), tp in params(1)) {
        let (pa, pb) = (phi(&a, &tp).unwrap(), phi(&b, &tp).unwrap());
        let lhs = determinant(&mat_multiply(&pa, &pb).unwrap()).unwrap();
        let rhs = determinant(&pa).unwrap().convolve(&determinant(&pb).unwrap()).unwrap();
        prop_assert!(lhs.l1_distance(&rhs).unwrap() <= 1e-10 * rhs.l1_norm().max(1.0));
    }

    #[test]
    fn block_circulant_represents_right_multiplication(
        (f, g) in (1usize..=8).prop_flat_map(|p| (grid(p), grid(p))), q in -9i64..=9
    ) {
        prop_assume!(gcd(g.p() as i64, q) == 1);
        let assembled = build_block_circulant(&g, q).unwrap().assemble();
        prop_assert!(max_abs(&(&assembled - dense_cg(&g, q))) <= 1e-12);
        let applied = &assembled * DVector::from_vec(f.flatten().to_vec());
        let direct = finite_twisted_convolve(&f, &g, q).unwrap();
        for (x, y) in applied.iter().zip(direct.flatten()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn finite_inversion_round_trip(g in (1usize..=6).prop_flat_map(grid), q in -7i64..=7) {
        let p = g.p();
        prop_assume!(gcd(p as i64, q) == 1);
        let g = dominant(g);
        let h = invert_block_circulant(&g, q, DEFAULT_SINGULAR_TOL).unwrap();
        let delta = FiniteGrid::delta(p);
        prop_assert!(finite_twisted_convolve(&g, &h, q).unwrap().max_abs_diff(&delta) <= 1e-10);
        prop_assert!(finite_twisted_convolve(&h, &g, q).unwrap().max_abs_diff(&delta) <= 1e-10);
        prop_assert!(invert_via_ghat0(&g, q, DEFAULT_SINGULAR_TOL).unwrap().max_abs_diff(&h) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_inverse_is_commutative_and_coset_preserving(
        d in seq_with(1, 1..=4, 2), r in 0.05..0.7f64, p in 1i64..=3
    ) {
        // Spread the perturbation onto Z × pZ.
        let d = Sequence::from_triples(1, d.iter().map(|(i, v)| (i.k().to_vec(), vec![i.l()[0] * p], *v))).unwrap();
        let c = Sequence::delta(1).sub(&d.scale(Complex64::new(r / d.l1_norm(), 0.0))).unwrap();
        let cfg = InversionConfig::default();
        let inv = invert_convolution_detailed(&c, &cfg, p).unwrap();
        for (idx, _) in inv.inverse.iter() {
            prop_assert!(idx.in_second_coset(&[0], p));
        }
        let right = conv_residual(&c, &inv.inverse).unwrap();
        prop_assert!(right <= cfg.residual_tol);
        prop_assert_eq!(right, conv_residual(&inv.inverse, &c).unwrap());
    }

    #[test]
    fn convolution_inverse_is_stable_under_grid_doubling(c in contractive_seq(0.05..0.6)) {
        let coarse = InversionConfig { grid_size: 128, ..InversionConfig::default() };
        let fine = InversionConfig { grid_size: 256, ..InversionConfig::default() };
        let a = invert_convolution(&c, &coarse).unwrap();
        let b = invert_convolution(&c, &fine).unwrap();
        for (idx, v) in a.iter() {
            prop_assert!((v - b.get(idx.k(), idx.l())).norm() <= 10.0 * coarse.tail_tol);
        }
    }

    #[test]
    fn twisted_inverse_is_two_sided_and_matches_neumann(a in contractive_seq(0.05..0.6), tp in params(1)) {
        let cfg = InversionConfig::default();
        let rep = invert_twisted(&a, &tp, &cfg).unwrap();
        prop_assert!(rep.residual_right <= cfg.residual_tol && rep.residual_left <= cfg.residual_tol);
        let neumann = neumann_inverse(&a, &tp, 1e-11, 10_000).unwrap();
        prop_assert!(rep.inverse.l1_distance(&neumann).unwrap() <= 2.0 * cfg.residual_tol);
    }

    #[test]
    fn twisted_inverse_is_grid_independent(a in contractive_seq(0.05..0.5), tp in params(1)) {
        let coarse = InversionConfig { grid_size: 128, ..InversionConfig::default() };
        let fine = InversionConfig { grid_size: 512, ..InversionConfig::default() };
        let x = invert_twisted(&a, &tp, &coarse).unwrap().inverse;
        let y = invert_twisted(&a, &tp, &fine).unwrap().inverse;
        for (idx, v) in x.iter() {
            if y.get(idx.k(), idx.l()) != Complex64::new(0.0, 0.0) {
                prop_assert!((v - y.get(idx.k(), idx.l())).norm() <= 10.0 * coarse.tail_tol);
            }
        }
    }

    #[test]
    fn inverse_of_inverse_returns_the_input(a in contractive_seq(0.05..0.4), tp in params(1)) {
        let cfg = InversionConfig::default();
        let b = invert_twisted(&a, &tp, &cfg).unwrap().inverse;
        let back = invert_twisted(&b, &tp, &cfg).unwrap().inverse;
        prop_assert!(back.l1_distance(&a).unwrap() <= 10.0 * cfg.residual_tol);
    }

    #[test]
    fn janssen_sum_reconstructs_frame_operator(
        (len, a, b) in prop::sample::select(vec![(12usize, 2usize, 4usize), (12, 3, 2), (12, 1, 1), (10, 2, 5), (8, 2, 2), (12, 2, 6), (9, 3, 3)]),
        seed in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 12)
    ) {
        let window: Vec<Complex64> = seed[..len].iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
        let cfg = GaborConfig::new(len, a, b, window.clone()).unwrap();
        let s = dense_frame_operator(&window, a, b);
        prop_assert!(max_abs(&(frame_operator_dense(&cfg).unwrap() - &s)) <= 1e-12);
        let (coef, _) = janssen_coefficients(&cfg).unwrap();
        prop_assert!(max_abs(&(kappa_matrix(&coef, &cfg).unwrap() - &s)) <= 1e-10);
    }

    #[test]
    fn kappa_is_multiplicative(
        (len, a_step, b_step) in prop::sample::select(vec![(12usize, 2usize, 4usize), (12, 3, 2), (10, 2, 5), (8, 2, 2), (12, 2, 3)]),
        a in seq(1..=6), b in seq(1..=6),
        f in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 12)
    ) {
        let f: Vec<Complex64> = f[..len].iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
        let cfg = GaborConfig::new(len, a_step, b_step, f.clone()).unwrap();
        let tp = cfg.twist_params().unwrap();
        let lhs = apply_kappa(&a, &cfg, &apply_kappa(&b, &cfg, &f).unwrap()).unwrap();
        let rhs = apply_kappa(&a.twisted_convolve(&b, &tp).unwrap(), &cfg, &f).unwrap();
        prop_assert!(diff_norm2(&lhs, &rhs) <= 1e-10 * norm2(&f).max(1e-300));
    }
}

#[test]
fn adjoint_lattice_commutes_with_lattice() {
    for (len, a, b) in [(12usize, 2usize, 4usize), (12, 3, 2), (10, 2, 5), (8, 2, 2)] {
        for n in 0..len / a {
            for m in 0..len / b {
                let lattice = tf_matrix(len, (n * a) as i64, (m * b) as i64);
                for k in 0..b {
                    for l in 0..a {
                        let adjoint = tf_matrix(len, (k * len / b) as i64, (l * len / a) as i64);
                        let gap = max_abs(&(&lattice * &adjoint - &adjoint * &lattice));
                        assert!(gap <= 1e-12, "L={len} a={a} b={b}: {gap:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn twisted_product_is_noncommutative() {
    let tp = TwistParams::new(2, 1, 1).unwrap();
    let a = Sequence::single(&[1], &[0], Complex64::new(1.0, 0.0));
    let b = Sequence::single(&[0], &[1], Complex64::new(1.0, 0.0));
    let ab = a.twisted_convolve(&b, &tp).unwrap();
    let ba = b.twisted_convolve(&a, &tp).unwrap();
    assert!(ab.l1_distance(&ba).unwrap() > 1.0);
}

#[test]
fn block_invertibility_matches_dense_invertibility() {
    // Constant grid: Ĝ_0 is singular and so is the dense operator.
    let flat = FiniteGrid::from_flat(3, vec![Complex64::new(1.0, 0.0); 9]).unwrap();
    assert!(invert_block_circulant(&flat, 1, DEFAULT_SINGULAR_TOL).is_err());
    assert!(dense_cg(&flat, 1).lu().try_inverse().is_none_or(|m| m.iter().any(|z| !z.is_finite() || z.norm() > 1e12)));
    // Delta plus a small perturbation: both invertible.
    let mut g = FiniteGrid::delta(3);
    g.set(1, 2, Complex64::new(0.3, 0.1));
    assert!(invert_block_circulant(&g, 1, DEFAULT_SINGULAR_TOL).is_ok());
    assert!(dense_cg(&g, 1).lu().try_inverse().is_some());
}
