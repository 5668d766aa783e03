//! Named forms used across the test battery and the `example` subcommand.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::form::DecomposableForm;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// X² + Y² = (X + iY)(X − iY).
pub fn circle() -> DecomposableForm {
    DecomposableForm::from_factor_vectors(
        2,
        vec![vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(1.0, 0.0), c(0.0, -1.0)]],
        1.0,
    )
    .unwrap()
}

/// XY.
pub fn xy() -> DecomposableForm {
    DecomposableForm::from_factor_vectors(
        2,
        vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        1.0,
    )
    .unwrap()
}

/// X³ + 2Y³.
pub fn cubic() -> DecomposableForm {
    let mut map = BTreeMap::new();
    map.insert(vec![3, 0], 1i128);
    map.insert(vec![0, 3], 2i128);
    DecomposableForm::from_integer_coeffs(2, 3, map).unwrap()
}

/// (X² + 2Y²)(2X² + Y²).
pub fn ellipse_product() -> DecomposableForm {
    let r2 = 2f64.sqrt();
    DecomposableForm::from_factor_vectors(
        2,
        vec![
            vec![c(1.0, 0.0), c(0.0, r2)],
            vec![c(1.0, 0.0), c(0.0, -r2)],
            vec![c(r2, 0.0), c(0.0, 1.0)],
            vec![c(r2, 0.0), c(0.0, -1.0)],
        ],
        1.0,
    )
    .unwrap()
}

/// The sharpness family (X^l − (εY)^l)((εX)^l − Y^l) with d = 2l even.
/// Factors are (X − ωεY) and (εX − ωY) over the l-th roots of unity ω,
/// whose product matches the expanded sign convention above.
pub fn f_eps(d: u32, eps: f64) -> Result<DecomposableForm> {
    if d < 4 || d % 2 != 0 {
        return Err(Error::OutOfRange("d", format!("{d} (need even d >= 4)")));
    }
    // the integral members take eps = p^{-1/l}, which exceeds 1/3 for
    // small primes; anything in (0, 1) keeps the factorization and the
    // Hadamard bracket meaningful
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange("eps", format!("{eps} (need 0 < eps < 1)")));
    }
    let l = (d / 2) as usize;
    let mut vectors = Vec::with_capacity(d as usize);
    for j in 0..l {
        let ang = 2.0 * std::f64::consts::PI * j as f64 / l as f64;
        let omega = Complex64::from_polar(1.0, ang);
        vectors.push(vec![c(1.0, 0.0), -omega * eps]);
    }
    for j in 0..l {
        let ang = 2.0 * std::f64::consts::PI * j as f64 / l as f64;
        let omega = Complex64::from_polar(1.0, ang);
        vectors.push(vec![c(eps, 0.0), -omega]);
    }
    DecomposableForm::from_factor_vectors(2, vectors, 1.0)
}

/// p²·F_ε with ε = p^{−1/l}: the integral member (pX^l − Y^l)(X^l − pY^l).
pub fn p2_f_eps(d: u32, p: u32) -> Result<DecomposableForm> {
    if p < 2 {
        return Err(Error::OutOfRange("p", format!("{p}")));
    }
    let l = (d / 2) as f64;
    let eps = (p as f64).powf(-1.0 / l);
    let base = f_eps(d, eps)?;
    base.scale_by((p as f64) * (p as f64))
}

/// Norm-type quartic in three variables built on t⁴ − t − 1 (no proper
/// subfield), nonvanishing on ℤ³ ∖ {0} with an exact integer expansion.
pub fn norm_quartic_n3() -> DecomposableForm {
    // roots of t^4 - t - 1
    let roots = crate::roots::real_poly_roots(&[-1.0, -1.0, 0.0, 0.0, 1.0]);
    let vectors: Vec<Vec<Complex64>> = roots
        .iter()
        .map(|&a| vec![c(1.0, 0.0), a, a * a])
        .collect();
    let f = DecomposableForm::from_factor_vectors(3, vectors, 1.0).unwrap();
    debug_assert!(f.is_integral(), "norm form expansion must snap to integers");
    f
}

/// The whole desk battery by name.
pub fn by_name(name: &str) -> Result<DecomposableForm> {
    match name {
        "circle" => Ok(circle()),
        "xy" => Ok(xy()),
        "cubic" => Ok(cubic()),
        "ellipse-product" => Ok(ellipse_product()),
        "norm-quartic-n3" => Ok(norm_quartic_n3()),
        other => Err(Error::Parse(format!(
            "unknown family '{other}' (try circle, xy, cubic, ellipse-product, \
             norm-quartic-n3, or section5 via its own flags)"
        ))),
    }
}
