//! Property tests for the structural invariants: conjugate closure,
//! composition identities, expansion round-trips, Hadamard.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use decompform::form::{DecomposableForm, Transform};
use decompform::geom::wedge_norm;
use decompform::linalg::cnorm;
use decompform::verify::{random_form, random_sl_transform};

fn arb_form() -> impl Strategy<Value = DecomposableForm> {
    (any::<u64>(), 2usize..=5).prop_map(|(seed, d)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_form(&mut rng, 2, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conjugate_closure_real_values(form in arb_form(), x0 in -3.0..3.0f64, x1 in -3.0..3.0f64) {
        let v = form.evaluate_complex(&[x0, x1]);
        let bound: f64 = form.scale()
            * form.factors().iter().map(|f| f.norm() * (x0 * x0 + x1 * x1).sqrt()).product::<f64>();
        prop_assert!(v.im.abs() <= 1e-9 * v.re.abs().max(bound).max(1e-300));
    }

    #[test]
    fn expansion_agrees_with_factored_evaluation(form in arb_form(), x0 in -2.0..2.0f64, x1 in -2.0..2.0f64) {
        let p = form.expand();
        let direct = form.evaluate(&[x0, x1]);
        let expanded = p.evaluate(&[x0, x1]);
        let scale: f64 = form.scale()
            * form.factors().iter().map(|f| f.norm() * (x0 * x0 + x1 * x1).sqrt().max(1.0)).product::<f64>();
        prop_assert!((direct - expanded).abs() <= 1e-9 * direct.abs().max(scale));
    }

    #[test]
    fn compose_with_inverse_reexpands(form in arb_form(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_sl_transform(&mut rng, 2);
        let round = form.compose(&t).unwrap().compose(&t.inverse()).unwrap();
        let a = form.expand();
        let b = round.expand();
        let max_c = a.coeffs.values().fold(0.0f64, |m, c| m.max(c.abs()));
        for (k, &c) in a.coeffs.iter() {
            let got = b.coeffs.get(k).copied().unwrap_or(0.0);
            prop_assert!((got - c).abs() <= 1e-8 * max_c.max(1.0));
        }
    }

    #[test]
    fn scale_compose_commute_exactly(form in arb_form(), seed in any::<u64>(), a in 0.1..8.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_sl_transform(&mut rng, 2);
        let left = form.compose(&t).unwrap().scale_by(a).unwrap();
        let right = form.scale_by(a).unwrap().compose(&t).unwrap();
        prop_assert_eq!(left.scale(), right.scale());
        for (lf, rf) in left.factors().iter().zip(right.factors()) {
            prop_assert_eq!(&lf.coeffs, &rf.coeffs);
            prop_assert_eq!(lf.pair_index, rf.pair_index);
        }
    }

    #[test]
    fn hadamard_bound_on_wedges(seed in any::<u64>(), k in 1usize..4, m in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let k = k.min(m);
        let vs: Vec<Vec<Complex64>> = (0..k)
            .map(|_| {
                (0..m)
                    .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                    .collect()
            })
            .collect();
        let w = wedge_norm(&vs);
        let prod: f64 = vs.iter().map(|v| cnorm(v)).product();
        prop_assert!(w <= prod * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn binary_integer_factorization_roundtrip(
        roots in proptest::collection::btree_set(-5i64..=5, 1..=4),
        lead in 1i128..=3,
        y_factors in 0usize..=1,
    ) {
        // exact integer expansion of lead · Π (X − rY) · Y^{y_factors}
        let roots: Vec<i64> = roots.into_iter().collect();
        let mut poly: Vec<i128> = vec![lead]; // coefficients of X^i (low to high), times Y^(d−i)
        for &r in &roots {
            let mut next = vec![0i128; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r as i128;
            }
            poly = next;
        }
        let d = (roots.len() + y_factors) as u32;
        let mut coeffs = std::collections::BTreeMap::new();
        for (i, &c) in poly.iter().enumerate() {
            if c != 0 {
                coeffs.insert(vec![i as u32, d - i as u32], c);
            }
        }
        let form = DecomposableForm::from_integer_coeffs(2, d, coeffs.clone()).unwrap();
        // the exact integer expansion round-trips verbatim
        prop_assert_eq!(&form.integer_poly().unwrap().coeffs, &coeffs);
        // and the recovered roots match
        let mut found: Vec<f64> = form
            .factors()
            .iter()
            .filter(|f| f.is_real() && f.coeffs[0].re.abs() > 0.5)
            .map(|f| -f.coeffs[1].re / f.coeffs[0].re)
            .collect();
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want: Vec<f64> = roots.iter().map(|&r| r as f64).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(found.len(), want.len());
        for (f, w) in found.iter().zip(&want) {
            prop_assert!((f - w).abs() < 1e-6);
        }
    }

    #[test]
    fn transform_det_cache_is_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_sl_transform(&mut rng, 3);
        use decompform::linalg::Matrix;
        let recomputed = Matrix::from_rows(&t.rows()).det();
        prop_assert!((t.det() - recomputed).abs() <= 1e-12 * recomputed.abs().max(1.0));
        prop_assert!((t.det().abs() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn evaluate_residue_over_many_points() {
    // 1000 random points on the whole battery
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (_, form) in decompform::verify::battery() {
        for _ in 0..1000 {
            let x: Vec<f64> = (0..form.n()).map(|_| rng.random_range(-5.0..5.0)).collect();
            let v = form.evaluate_complex(&x);
            let xn = decompform::linalg::norm2(&x);
            let bound: f64 =
                form.scale() * form.factors().iter().map(|f| f.norm() * xn).product::<f64>();
            assert!(v.im.abs() <= 1e-9 * v.re.abs().max(bound).max(1e-300));
        }
    }
}

#[test]
fn compose_preserves_transform_example() {
    // X²+Y² under diag(2, 1/2): factors (2, ±i/2), height 17/4
    let f = decompform::families::circle();
    let t = Transform::diagonal(&[2.0, 0.5]).unwrap();
    let g = f.compose(&t).unwrap();
    assert!((decompform::height(&g) - 17.0 / 4.0).abs() < 1e-12);
}
