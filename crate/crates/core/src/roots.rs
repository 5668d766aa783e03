//! Polynomial root finding via the Aberth–Ehrlich simultaneous iteration.
//!
//! Coefficients are ordered low to high: p(x) = c₀ + c₁x + … + c_k x^k.

use num_complex::Complex64;

fn eval_with_derivative(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

/// All complex roots of a polynomial with complex coefficients. Leading
/// zero coefficients are not allowed; trailing zeros (roots at 0) are fine.
pub fn complex_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().map(|z| z.norm()) == Some(0.0) && c.len() > 1 {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }

    // Strip roots at the origin first.
    let zeros_at_origin = c.iter().take_while(|z| z.norm() == 0.0).count();
    if zeros_at_origin > 0 {
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
        roots.extend(complex_roots(&c[zeros_at_origin..]));
        return roots;
    }

    // Cauchy-style radius for initial guesses.
    let lead = c[deg].norm();
    let radius = 1.0
        + c[..deg]
            .iter()
            .map(|z| z.norm() / lead)
            .fold(0.0f64, f64::max);

    let mut z: Vec<Complex64> = (0..deg)
        .map(|i| {
            let ang = 2.0 * std::f64::consts::PI * (i as f64 + 0.35) / deg as f64 + 0.4;
            Complex64::from_polar(radius * 0.8, ang)
        })
        .collect();

    for _ in 0..400 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = eval_with_derivative(&c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { Complex64::new(1e-8, 0.0) };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 1e-300 {
                        sum += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * radius.max(1.0) {
            break;
        }
    }

    // Newton polish.
    for zi in z.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval_with_derivative(&c, *zi);
            if dp.norm() > 0.0 {
                let step = p / dp;
                *zi -= step;
                if step.norm() < 1e-16 * (zi.norm() + 1.0) {
                    break;
                }
            }
        }
    }
    z
}

/// Roots of a real-coefficient polynomial with conjugates exactly paired:
/// near-real roots are snapped onto the axis, complex roots averaged with
/// their mirror so the returned multiset is closed under conjugation.
pub fn real_poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let cc: Vec<Complex64> = coeffs.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    let mut roots = complex_roots(&cc);
    let scale = roots.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let tol = 1e-9 * scale;
    for z in roots.iter_mut() {
        if z.im.abs() < tol {
            z.im = 0.0;
        }
    }
    // Pair conjugates and symmetrize.
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] || roots[i].im == 0.0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..roots.len() {
            if j == i || used[j] || roots[j].im == 0.0 {
                continue;
            }
            if roots[i].im * roots[j].im < 0.0 {
                let d = (roots[i] - roots[j].conj()).norm();
                if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                    best = Some((j, d));
                }
            }
        }
        if let Some((j, _)) = best {
            let avg = (roots[i] + roots[j].conj()) * 0.5;
            roots[i] = avg;
            roots[j] = avg.conj();
            used[i] = true;
            used[j] = true;
        }
    }
    roots
}

/// Real roots only, ascending.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = real_poly_roots(coeffs)
        .into_iter()
        .filter(|z| z.im == 0.0)
        .map(|z| z.re)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_complex_pair() {
        // x^2 + 1
        let roots = real_poly_roots(&[1.0, 0.0, 1.0]);
        assert_eq!(roots.len(), 2);
        let mut ims: Vec<f64> = roots.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12);
        assert!((ims[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_with_real_root() {
        // x^3 + 2 has real root -2^{1/3}
        let roots = real_poly_roots(&[2.0, 0.0, 0.0, 1.0]);
        let real: Vec<f64> = roots.iter().filter(|z| z.im == 0.0).map(|z| z.re).collect();
        assert_eq!(real.len(), 1);
        assert!((real[0] + 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn wilkinson_mild() {
        // (x-1)(x-2)...(x-6)
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in 1..=6 {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * Complex64::new(r as f64, 0.0);
            }
            c = next;
        }
        let mut roots: Vec<f64> = complex_roots(&c).iter().map(|z| z.re).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, r) in roots.iter().enumerate() {
            assert!((r - (i + 1) as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn roots_at_origin() {
        // x^2 (x - 3)
        let roots = real_poly_roots(&[0.0, 0.0, -3.0, 1.0]);
        let zeros = roots.iter().filter(|z| z.norm() < 1e-12).count();
        assert_eq!(zeros, 2);
    }
}
