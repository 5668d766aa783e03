//! Desk-battery regressions: pinned values for the named forms and the
//! cross-quantity inequalities that tie heights, volumes and counts
//! together.

use decompform::exceptional::a_prime;
use decompform::families;
use decompform::geom::factorial;
use decompform::height::{
    height, minimize_height_real, ns_invariant, q_invariant, OptimizerCfg,
};
use decompform::verify::{check_lemma3, run_all};
use decompform::volume::volume_radial;

#[test]
fn battery_height_brackets() {
    let cfg = OptimizerCfg::default();
    // certified-exact cases: the bracket collapses
    for (form, want) in [
        (families::circle(), 2.0),
        (families::xy(), 1.0),
        (families::ellipse_product(), 9.0),
        (families::f_eps(4, 0.1).unwrap(), 1.01f64 * 1.01),
        (families::p2_f_eps(4, 5).unwrap(), 36.0),
    ] {
        let r = minimize_height_real(&form, &cfg).unwrap();
        assert!((r.m_lower - want).abs() < 1e-9 * want, "lower {} vs {want}", r.m_lower);
        assert!((r.m_estimate - want).abs() < 1e-7 * want, "estimate {} vs {want}", r.m_estimate);
    }
    // the cubic keeps a genuine bracket; the best value found sits at 4
    // (diagonal transform t² = 2^{1/3}), the certificate at (2·3^{3/2})^{1/2}
    let r = minimize_height_real(&families::cubic(), &cfg).unwrap();
    let cert = (2f64 * 27f64.sqrt()).sqrt();
    assert!((r.m_lower - cert).abs() < 1e-9);
    assert!((r.m_estimate - 4.0).abs() < 1e-6, "estimate {}", r.m_estimate);
    assert!(r.m_lower <= r.m_estimate);
}

#[test]
fn q_invariant_dominates_height_bound() {
    // Q(F)² ≥ (d/n)ⁿ n! m^{2n/d} across the battery, with the certified
    // lower bound standing in for the infimum
    let cfg = OptimizerCfg::default();
    for (name, form) in decompform::verify::battery() {
        let q = q_invariant(&form).unwrap();
        let r = minimize_height_real(&form, &cfg).unwrap();
        let n = form.n() as f64;
        let d = form.degree() as f64;
        let rhs = (d / n).powf(n) * factorial(form.n() as u64) * r.m_lower.powf(2.0 * n / d);
        assert!(
            q * q >= rhs * (1.0 - 1e-9),
            "{name}: Q² = {} < {rhs}",
            q * q
        );
    }
    // equality case: X²+Y² has Q² = 8 = (d/n)ⁿ n! m^{2n/d}
    let q = q_invariant(&families::circle()).unwrap();
    assert!((q * q - 8.0).abs() < 1e-9);
    assert!((ns_invariant(&families::circle()).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn f_eps_signed_value_and_magnitude() {
    let f = families::f_eps(4, 0.1).unwrap();
    let v = f.evaluate(&[1.0, 0.0]);
    assert!((v.abs() - 0.01).abs() < 1e-12);
    // expanded sign convention (X² − ε²Y²)(ε²X² − Y²): positive at (1, 0)
    assert!(v > 0.0);
}

#[test]
fn theorem4_shape_on_integral_family() {
    // V ≤ C·m^{-n/d}(1 + |log m|)^{n-1} with one C fitted across p: the
    // fitted instances stay within a small band (the sharpness family is
    // exactly the extremal case)
    let cfg = OptimizerCfg::default();
    let mut cs = Vec::new();
    for &p in &[5u32, 11, 101] {
        let f = families::p2_f_eps(4, p).unwrap();
        let v = volume_radial(&f, 1e-7).unwrap();
        let r = minimize_height_real(&f, &cfg).unwrap();
        let m = r.m_estimate;
        let c = v.value / (m.powf(-0.5) * (1.0 + m.ln().abs()));
        cs.push(c);
    }
    let max = cs.iter().cloned().fold(f64::MIN, f64::max);
    let min = cs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min < 2.5, "theorem-4 fitted constants spread too wide: {cs:?}");
}

#[test]
fn check_reports_are_reproducible() {
    // same seed ⇒ bit-identical margins
    let f = families::ellipse_product();
    let cfg = OptimizerCfg::default();
    let r = minimize_height_real(&f, &cfg).unwrap();
    let a = check_lemma3(&f, "ellipse-product", &r, 200, 41).unwrap();
    let b = check_lemma3(&f, "ellipse-product", &r, 200, 41).unwrap();
    assert_eq!(a.margin.to_bits(), b.margin.to_bits());
    assert_eq!(a.inputs_digest, b.inputs_digest);
}

#[test]
fn full_suite_runs_offline() {
    // everything passes except the one swept inequality that admits
    // counterexamples (see the lemma5a unit test for the explicit one)
    let reports = run_all(1, 100).unwrap();
    for rep in &reports {
        // whether the short lemma5a sweep hits a violation depends on the
        // trial count; the 1000-trial behaviour is pinned in the unit and
        // acceptance suites
        if rep.id != "lemma5a" {
            assert!(rep.pass, "{} failed: margin {} ({})", rep.id, rep.margin, rep.details);
        }
    }
    // deterministic report ordering
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    let again = run_all(1, 100).unwrap();
    let ids2: Vec<&str> = again.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ids2);
}

#[test]
fn circle_asymptotic_experiment() {
    // classical circle-problem behaviour: N/(m^{n/d} V) → 1 and the
    // residual stays of square-root size
    let f = families::circle();
    let cfg = OptimizerCfg::default();
    let minres = minimize_height_real(&f, &cfg).unwrap();
    let v = volume_radial(&f, 1e-9).unwrap();
    let schedule: Vec<i128> = vec![100, 1000, 10_000, 100_000, 1_000_000];
    let table =
        decompform::verify::asymptotic_experiment(&f, &schedule, v.value, minres.m_estimate)
            .unwrap();
    assert!((table.ratio_top - 1.0).abs() < 0.02, "ratio {}", table.ratio_top);
    // a' = 1 = d/n here, so (n-1)/(d-a') = 1; generous slack on the fit
    assert!(table.fitted_residual_exponent <= 1.0 + 0.15);
    for row in &table.rows {
        assert!(row.residual.abs() <= 4.0 * (row.m as f64).sqrt());
    }
}

#[test]
fn exceptional_reports_carry_witnesses() {
    let f = families::f_eps(4, 0.1).unwrap();
    let cfg = OptimizerCfg::default();
    let r = minimize_height_real(&f, &cfg).unwrap();
    let exc = a_prime(&f, &r.minimizers).unwrap();
    assert_eq!(exc.s_j, vec![2]);
    assert_eq!(exc.witnesses[0].len(), 2);
    assert!(exc.minimizers_examined >= 1);
    // maximality: adding any outside index to the witness breaks the bound
    let at_min = f.compose(&r.minimizers[0]).unwrap();
    let unit = at_min.unit_factor_vectors();
    let table = decompform::geom::constants(2, 4, 1.0).unwrap();
    let w = &exc.witnesses[0];
    for extra in 0..4usize {
        if w.contains(&extra) {
            continue;
        }
        let violates = w.iter().any(|&i| {
            decompform::geom::wedge_norm(&[unit[i].clone(), unit[extra].clone()])
                >= table.s_threshold(1)
        });
        assert!(violates, "witness {w:?} plus {extra} still satisfies the bound");
    }
}

#[test]
fn degenerate_inputs_are_rejected_upstream() {
    use num_complex::Complex64;
    // d repeated copies of one factor: the factor matrix has rank 1
    let degenerate = decompform::form::DecomposableForm::from_factor_vectors(
        2,
        vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0)],
        ],
        1.0,
    )
    .unwrap();
    let err = minimize_height_real(&degenerate, &OptimizerCfg::default());
    assert!(matches!(err, Err(decompform::Error::RankDeficient(_))));
    // every tuple determinant vanishes, so NS is undefined
    assert!(matches!(
        decompform::height::ns_invariant(&degenerate),
        Err(decompform::Error::NoIndependentTuple)
    ));
}

#[test]
fn reduce_rejects_forms_vanishing_on_lattice() {
    // XY vanishes at (1, 0); the reduction's first minima vector exposes it
    let f = families::xy();
    let res = minimize_height_real(&f, &OptimizerCfg::default()).unwrap();
    let err = decompform::height::reduce_integral(&f, &res);
    assert!(matches!(err, Err(decompform::Error::Precondition(_))), "{err:?}");
}

#[test]
fn restrict_rejects_vanishing_factor() {
    // XY restricted to the x-axis kills the Y factor identically
    let f = families::xy();
    let w = decompform::Subspace::from_spanning(2, &[vec![1, 0]]).unwrap();
    let err = decompform::restrict(&f, &w);
    assert!(matches!(err, Err(decompform::Error::Precondition(_))), "{err:?}");
}
