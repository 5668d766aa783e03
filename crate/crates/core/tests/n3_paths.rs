//! Three-variable paths: successive minima beyond the plane, triple union
//! checks, and the sphere quadrature cross-check on the quartic norm form.

use decompform::count::{union_count_check, RationalBound, Strategy, Subspace};
use decompform::families;
use decompform::form::Transform;
use decompform::height::successive_minima;
use decompform::volume::{volume_monte_carlo, volume_radial};

#[test]
fn successive_minima_n3() {
    let sm = successive_minima(&Transform::identity(3), 2_000_000).unwrap();
    assert!(sm.lambdas.iter().all(|&l| (l - 1.0).abs() < 1e-9));
    let t = Transform::new(&[
        vec![2.0, 0.3, 0.0],
        vec![0.0, 1.0, -0.4],
        vec![0.1, 0.0, 0.5],
    ])
    .unwrap()
    .renormalized_det1();
    let sm = successive_minima(&t, 4_000_000).unwrap();
    let prod: f64 = sm.lambdas.iter().product();
    // Minkowski: (n!)^{-1} ≤ λ1 λ2 λ3 ≤ 1 for a volume-2^n body
    assert!(prod <= 1.0 + 1e-9, "prod {prod}");
    assert!(prod >= 1.0 / 6.0 - 1e-9, "prod {prod}");
    // basis z_i within its dilate and unimodular overall
    for (i, l) in sm.lambdas.iter().enumerate() {
        let z = &sm.basis[i];
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        let gauge: f64 = t
            .inverse()
            .apply(&zf)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(gauge <= (i as f64 + 1.0) * l * (1.0 + 1e-9));
    }
}

#[test]
fn union_check_three_hyperplanes() {
    let f = families::norm_quartic_n3();
    let ws = vec![
        Subspace::hyperplane(&[0, 0, 1]).unwrap(),
        Subspace::hyperplane(&[0, 1, 0]).unwrap(),
        Subspace::hyperplane(&[1, 0, 0]).unwrap(),
    ];
    let m = RationalBound::new(80, 1).unwrap();
    let rep = union_count_check(&f, &m, &ws, Strategy::Growth).unwrap();
    assert!(rep.holds, "{rep:?}");
    assert_eq!(rep.pairwise_intersection.len(), 3);
    // the union never exceeds the plain sum
    let total: u64 = rep.per_subspace.iter().sum();
    assert!(rep.union_count <= total);
}

#[test]
fn quartic_norm_form_volume_cross_check() {
    // circles of simple zeros (two real embeddings) and order-2 point zeros
    // (the complex pair): integrable on both counts for n = 3, d = 4
    let f = families::norm_quartic_n3();
    let r = volume_radial(&f, 1e-4).unwrap();
    assert!(!r.infinite);
    let m = volume_monte_carlo(&f, 400_000, 13).unwrap();
    let comb = (r.abs_error.powi(2) + m.abs_error.powi(2)).sqrt();
    assert!(
        (r.value - m.value).abs() <= 4.0 * comb + 0.02 * r.value,
        "radial {} ± {} vs mc {} ± {}",
        r.value,
        r.abs_error,
        m.value,
        m.abs_error
    );
}
