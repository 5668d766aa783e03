//! V(F) = vol{x : |F(x)| ≤ 1} by radial reduction: homogeneity gives
//! V = (1/n) ∫_{S^{n-1}} |F(u)|^{-n/d} dσ(u). The spherical integrand has
//! power singularities at the zero directions of F; those are refined
//! dyadically with a power-law tail, or importance-sampled in the Monte
//! Carlo cross-check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{DecomposableForm, SphereZero};
use crate::linalg::norm2;

#[allow(clippy::excessive_precision)]
const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.5255324099163290, 0.3137066458778873),
    (-0.1834346424956498, 0.3626837833783620),
    (0.1834346424956498, 0.3626837833783620),
    (0.5255324099163290, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

#[allow(clippy::excessive_precision)]
const GL16: [(f64, f64); 16] = [
    (-0.9894009349916499, 0.0271524594117541),
    (-0.9445750230732326, 0.0622535239386479),
    (-0.8656312023878318, 0.0951585116824928),
    (-0.7554044083550030, 0.1246289712555339),
    (-0.6178762444026438, 0.1495959888165767),
    (-0.4580167776572274, 0.1691565193950025),
    (-0.2816035507792589, 0.1826034150449236),
    (-0.0950125098376374, 0.1894506104550685),
    (0.0950125098376374, 0.1894506104550685),
    (0.2816035507792589, 0.1826034150449236),
    (0.4580167776572274, 0.1691565193950025),
    (0.6178762444026438, 0.1495959888165767),
    (0.7554044083550030, 0.1246289712555339),
    (0.8656312023878318, 0.0951585116824928),
    (0.9445750230732326, 0.0622535239386479),
    (0.9894009349916499, 0.0271524594117541),
];

#[allow(clippy::excessive_precision)]
const GL3: [(f64, f64); 3] = [
    (-0.7745966692414834, 0.5555555555555556),
    (0.0, 0.8888888888888888),
    (0.7745966692414834, 0.5555555555555556),
];

#[allow(clippy::excessive_precision)]
const GL5: [(f64, f64); 5] = [
    (-0.9061798459386640, 0.2369268850561891),
    (-0.5384693101056831, 0.4786286704993665),
    (0.0, 0.5688888888888889),
    (0.5384693101056831, 0.4786286704993665),
    (0.9061798459386640, 0.2369268850561891),
];

/// Refinement-trail depth for the dyadic descent toward a singular endpoint;
/// beyond this the power-law tail is summed analytically.
const DYADIC_DEPTH: usize = 42;
/// Declared-infinite guard: local exponent α ≥ 1 − this means divergence.
const DIVERGENCE_GUARD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VolumeMethod {
    Radial,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub infinite: bool,
    pub abs_error: f64,
    pub method: VolumeMethod,
    pub singular_directions: Vec<Vec<f64>>,
    pub samples_or_nodes: usize,
    pub converged: bool,
    /// Local exponents α̂ fitted on the refinement trails toward each
    /// singular direction (n = 2 radial path); the divergence verdict
    /// re-derives kn/d from these.
    pub fitted_exponents: Vec<f64>,
}

fn gl_panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64, usize) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let coarse: f64 = GL8.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half;
    let fine: f64 = GL16.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half;
    (fine, (fine - coarse).abs(), 24)
}

/// Adaptive integration on [a, b] for a smooth integrand.
fn adaptive_smooth(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> (f64, f64, usize, bool) {
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new(); // (err, a, b, val)
    let mut evals = 0;
    let init = 8;
    for i in 0..init {
        let pa = a + (b - a) * i as f64 / init as f64;
        let pb = a + (b - a) * (i + 1) as f64 / init as f64;
        let (v, e, ne) = gl_panel(f, pa, pb);
        evals += ne;
        panels.push((e, pa, pb, v));
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.3).sum();
        let err: f64 = panels.iter().map(|p| p.0).sum();
        if err <= tol * total.abs().max(1e-300) || panels.len() > budget {
            return (total, err, evals, panels.len() <= budget);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.partial_cmp(&y.1 .0).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (_, pa, pb, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        for (qa, qb) in [(pa, mid), (mid, pb)] {
            let (v, e, ne) = gl_panel(f, qa, qb);
            evals += ne;
            panels.push((e, qa, qb, v));
        }
    }
}

/// Integrate on [a, b] where the integrand has a power singularity at the
/// `left` endpoint (or right when !left): dyadic panels toward it, then an
/// analytic geometric tail from the fitted local exponent. Returns
/// (value, err, evals, alpha_hat) or flags divergence via alpha_hat ≥ 1.
fn dyadic_endpoint(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    left: bool,
    tol: f64,
) -> (f64, f64, usize, f64) {
    let w = b - a;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    let mut trail: Vec<f64> = Vec::new();
    for j in 0..DYADIC_DEPTH {
        let hi = w * 0.5f64.powi(j as i32);
        let lo = hi * 0.5;
        let (pa, pb) = if left { (a + lo, a + hi) } else { (b - hi, b - lo) };
        let (v, e, ne) = gl_panel(f, pa, pb);
        evals += ne;
        total += v;
        err += e;
        trail.push(v.max(1e-300));
        if j >= 6 && v < 0.25 * tol * total.abs().max(1e-300) {
            break;
        }
    }
    // Fit ln I_j = const + m·j on the last clean stretch of the trail;
    // the panel ratio is ρ = e^m = 2^{-(1-α)}.
    let k = trail.len().min(8);
    let tail_start = trail.len() - k;
    let xs: Vec<f64> = (0..k).map(|i| i as f64).collect();
    let ys: Vec<f64> = trail[tail_start..].iter().map(|v| v.ln()).collect();
    let xm = xs.iter().sum::<f64>() / k as f64;
    let ym = ys.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let m = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let pred = ym + m * (x - xm);
            (y - pred) * (y - pred)
        })
        .sum::<f64>()
        / k as f64)
        .sqrt();
    let alpha_hat = 1.0 + m / std::f64::consts::LN_2;
    if alpha_hat >= 1.0 - DIVERGENCE_GUARD {
        return (total, err, evals, alpha_hat);
    }
    let rho = m.exp();
    let last = *trail.last().unwrap();
    let tail = last * rho / (1.0 - rho);
    total += tail;
    err += tail * (3.0 * rms + 1e-9).min(1.0);
    (total, err, evals, alpha_hat)
}

fn zero_angles_n2(form: &DecomposableForm) -> Result<Vec<(f64, u32)>> {
    let zeros = form.sphere_zeros()?;
    let mut out = Vec::new();
    for z in zeros {
        if let SphereZero::Point { dir, order } = z {
            let theta = dir[1].atan2(dir[0]).rem_euclid(2.0 * std::f64::consts::PI);
            out.push((theta, order));
            out.push(((theta + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI), order));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

fn singular_dirs_from_angles(zeros: &[(f64, u32)]) -> Vec<Vec<f64>> {
    zeros.iter().map(|&(t, _)| vec![t.cos(), t.sin()]).collect()
}

fn radial_n2(form: &DecomposableForm, tol: f64) -> Result<VolumeEstimate> {
    let d = form.degree() as f64;
    let alpha_of = |order: u32| order as f64 * 2.0 / d;
    let mut integrand = |theta: f64| -> f64 {
        let u = [theta.cos(), theta.sin()];
        let v = form.evaluate_complex(&u).norm().max(1e-300);
        v.powf(-2.0 / d)
    };
    let zeros = zero_angles_n2(form)?;
    let singular_directions = singular_dirs_from_angles(&zeros);

    // Exact local exponents from the factor structure decide divergence up
    // front; the fitted exponents re-derive the verdict from the trail.
    if zeros.iter().any(|&(_, k)| alpha_of(k) >= 1.0 - DIVERGENCE_GUARD) {
        return Ok(VolumeEstimate {
            value: f64::INFINITY,
            infinite: true,
            abs_error: 0.0,
            method: VolumeMethod::Radial,
            singular_directions,
            samples_or_nodes: 0,
            converged: true,
            fitted_exponents: zeros.iter().map(|&(_, k)| alpha_of(k)).collect(),
        });
    }

    let two_pi = 2.0 * std::f64::consts::PI;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut evals = 0usize;
    let mut fitted_exponents: Vec<f64> = Vec::new();
    let converged;

    if zeros.is_empty() {
        let (v, e, ne, conv) = adaptive_smooth(&mut integrand, 0.0, two_pi, tol, 40_000);
        value = v;
        err = e;
        evals = ne;
        converged = conv;
    } else {
        let knots: Vec<f64> = zeros.iter().map(|&(t, _)| t).collect();
        for i in 0..knots.len() {
            let a = knots[i];
            let b = if i + 1 < knots.len() { knots[i + 1] } else { knots[0] + two_pi };
            if b - a < 1e-13 {
                continue;
            }
            let mid = 0.5 * (a + b);
            let (v1, e1, n1, alpha1) = dyadic_endpoint(&mut integrand, a, mid, true, tol);
            let (v2, e2, n2, alpha2) = dyadic_endpoint(&mut integrand, mid, b, false, tol);
            evals += n1 + n2;
            fitted_exponents.push(alpha1);
            fitted_exponents.push(alpha2);
            if alpha1 >= 1.0 - DIVERGENCE_GUARD || alpha2 >= 1.0 - DIVERGENCE_GUARD {
                return Ok(VolumeEstimate {
                    value: f64::INFINITY,
                    infinite: true,
                    abs_error: 0.0,
                    method: VolumeMethod::Radial,
                    singular_directions,
                    samples_or_nodes: evals,
                    converged: true,
                    fitted_exponents,
                });
            }
            value += v1 + v2;
            err += e1 + e2;
        }
        // The dyadic ladders are fixed-depth; declare non-convergence honestly
        // if their accumulated error exceeds the requested tolerance.
        converged = err <= tol * value.abs().max(1e-300) * 4.0;
    }

    Ok(VolumeEstimate {
        value: 0.5 * value,
        infinite: false,
        abs_error: 0.5 * err,
        method: VolumeMethod::Radial,
        singular_directions,
        samples_or_nodes: evals,
        converged,
        fitted_exponents,
    })
}

fn radial_n3(form: &DecomposableForm, tol: f64) -> Result<VolumeEstimate> {
    let d = form.degree() as f64;
    let zeros = form.sphere_zeros()?;
    let mut singular_directions = Vec::new();
    for z in &zeros {
        match z {
            SphereZero::Point { dir, order } => {
                singular_directions.push(dir.clone());
                // codimension-2 singularity: divergent iff k·n/d ≥ 2
                if *order as f64 * 3.0 / d >= 2.0 - DIVERGENCE_GUARD {
                    return Ok(infinite_estimate(VolumeMethod::Radial, singular_directions));
                }
            }
            SphereZero::Circle { normal, order } => {
                singular_directions.push(normal.clone());
                // codimension-1 singularity: divergent iff k·n/d ≥ 1
                if *order as f64 * 3.0 / d >= 1.0 - DIVERGENCE_GUARD {
                    return Ok(infinite_estimate(VolumeMethod::Radial, singular_directions));
                }
            }
        }
    }

    let mut f = |phi: f64, theta: f64| -> f64 {
        let u = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
        let v = form.evaluate_complex(&u).norm().max(1e-300);
        v.powf(-3.0 / d) * phi.sin()
    };
    // distance from a direction to the nearest zero set; Gauss error
    // estimates lie on cells the zero sets cut through, so those get their
    // error floored at a fraction of the cell value
    let zero_sets = zeros.clone();
    let min_zero_dist = move |phi: f64, theta: f64| -> f64 {
        let u = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
        let mut best = f64::INFINITY;
        for z in &zero_sets {
            let dist = match z {
                SphereZero::Circle { normal, .. } => {
                    let dot: f64 = u.iter().zip(normal).map(|(a, b)| a * b).sum();
                    dot.clamp(-1.0, 1.0).asin().abs()
                }
                SphereZero::Point { dir, .. } => {
                    let dot: f64 = u.iter().zip(dir).map(|(a, b)| a * b).sum();
                    dot.abs().clamp(0.0, 1.0).acos()
                }
            };
            best = best.min(dist);
        }
        best
    };
    let cell = |f: &mut dyn FnMut(f64, f64) -> f64, pa: (f64, f64), pb: (f64, f64)| -> (f64, f64) {
        let (a1, a2) = pa;
        let (b1, b2) = pb;
        let m1 = 0.5 * (a1 + b1);
        let h1 = 0.5 * (b1 - a1);
        let m2 = 0.5 * (a2 + b2);
        let h2 = 0.5 * (b2 - a2);
        let mut coarse = 0.0;
        for &(x1, w1) in GL3.iter() {
            for &(x2, w2) in GL3.iter() {
                coarse += w1 * w2 * f(m1 + h1 * x1, m2 + h2 * x2);
            }
        }
        let mut fine = 0.0;
        for &(x1, w1) in GL5.iter() {
            for &(x2, w2) in GL5.iter() {
                fine += w1 * w2 * f(m1 + h1 * x1, m2 + h2 * x2);
            }
        }
        let value = fine * h1 * h2;
        let mut err = (fine - coarse).abs() * h1 * h2;
        let diag = (h1 * h1 + h2 * h2).sqrt() * 2.0;
        if min_zero_dist(m1, m2) < diag {
            err = err.max(0.35 * value.abs());
        }
        (value, err)
    };

    let mut cells: Vec<(f64, (f64, f64), (f64, f64), f64)> = Vec::new();
    let pi = std::f64::consts::PI;
    let mut evals = 0usize;
    for i in 0..8 {
        for j in 0..16 {
            let pa = (pi * i as f64 / 8.0, 2.0 * pi * j as f64 / 16.0);
            let pb = (pi * (i + 1) as f64 / 8.0, 2.0 * pi * (j + 1) as f64 / 16.0);
            let (v, e) = cell(&mut f, pa, pb);
            evals += 34;
            cells.push((e, pa, pb, v));
        }
    }
    let budget = 120_000;
    let mut checkpoint_err = f64::INFINITY;
    let mut next_checkpoint = 4096;
    loop {
        let total: f64 = cells.iter().map(|c| c.3).sum();
        let err: f64 = cells.iter().map(|c| c.0).sum();
        // singular cells keep a value-proportional error floor, so the error
        // sum shrinks slowly; project the per-doubling rate forward and stop
        // honestly once the budget cannot reach the tolerance
        let mut stagnated = false;
        let done = err <= tol * total.abs().max(1e-300);
        if !done && cells.len() >= next_checkpoint {
            let rate = err / checkpoint_err;
            if rate >= 0.999 {
                stagnated = true;
            } else {
                let needed = (tol * total.abs().max(1e-300) / err).ln() / rate.ln();
                stagnated = (cells.len() as f64) * 2f64.powf(needed.max(0.0)) > budget as f64;
            }
            checkpoint_err = err;
            next_checkpoint = cells.len() * 2;
        }
        if done || stagnated || cells.len() > budget {
            return Ok(VolumeEstimate {
                value: total / 3.0,
                infinite: false,
                abs_error: err / 3.0,
                method: VolumeMethod::Radial,
                singular_directions,
                samples_or_nodes: evals,
                converged: done,
                fitted_exponents: Vec::new(),
            });
        }
        let worst = cells
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.partial_cmp(&y.1 .0).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (_, pa, pb, _) = cells.swap_remove(worst);
        let (a1, a2) = pa;
        let (b1, b2) = pb;
        let halves = if b1 - a1 >= b2 - a2 {
            let m = 0.5 * (a1 + b1);
            [((a1, a2), (m, b2)), ((m, a2), (b1, b2))]
        } else {
            let m = 0.5 * (a2 + b2);
            [((a1, a2), (b1, m)), ((a1, m), (b1, b2))]
        };
        for (qa, qb) in halves {
            let (v, e) = cell(&mut f, qa, qb);
            evals += 34;
            cells.push((e, qa, qb, v));
        }
    }
}

fn infinite_estimate(method: VolumeMethod, dirs: Vec<Vec<f64>>) -> VolumeEstimate {
    VolumeEstimate {
        value: f64::INFINITY,
        infinite: true,
        abs_error: 0.0,
        method,
        singular_directions: dirs,
        samples_or_nodes: 0,
        converged: true,
        fitted_exponents: Vec::new(),
    }
}

/// Radial quadrature; n = 2 uses dyadic refinement toward the zero
/// directions, n = 3 an adaptive sphere grid. Divergence is declared when
/// a local exponent reaches its integrability threshold.
pub fn volume_radial(form: &DecomposableForm, tol: f64) -> Result<VolumeEstimate> {
    match form.n() {
        2 => radial_n2(form, tol),
        3 => radial_n3(form, tol),
        n => Err(Error::Unsupported(format!(
            "radial quadrature grids cover n in {{2, 3}}, got {n}; use Monte Carlo"
        ))),
    }
}

/// Unbiased spherical Monte Carlo with an importance mixture that cancels
/// the power singularities at the zero directions, so the reported standard
/// error is honest even for forms with sphere zeros.
pub fn volume_monte_carlo(form: &DecomposableForm, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    match form.n() {
        2 => mc_n2(form, samples, seed),
        3 => mc_n3(form, samples, seed),
        _ => mc_uniform(form, samples, seed),
    }
}

/// Core cutoff for the singular proposals: mass inside |t| < CORE_CUT of a
/// zero is added analytically from the local power law, everything outside
/// is importance-sampled with bounded weights.
const CORE_CUT: f64 = 1e-13;

struct ZeroCap {
    theta: f64,
    alpha: f64,
    delta: f64,
    /// |F(u(theta_z + t))| ≈ prefactor · |t|^k
    prefactor: f64,
    /// factor values at the zero direction and at its orthogonal, for the
    /// cancellation-free evaluation near the zero
    at_zero: Vec<num_complex::Complex64>,
    at_perp: Vec<num_complex::Complex64>,
}

impl ZeroCap {
    /// |F| at angle theta_z + t, evaluated in the rotated frame so the
    /// vanishing factors lose no precision near t = 0.
    fn form_magnitude(&self, scale: f64, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let mut mag = scale;
        for (z, p) in self.at_zero.iter().zip(&self.at_perp) {
            mag *= (z * c + p * s).norm();
        }
        mag
    }
}

fn mc_n2(form: &DecomposableForm, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let d = form.degree() as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let zeros = zero_angles_n2(form)?;
    let singular_directions = singular_dirs_from_angles(&zeros);
    if zeros.iter().any(|&(_, k)| k as f64 * 2.0 / d >= 1.0 - DIVERGENCE_GUARD) {
        return Ok(infinite_estimate(VolumeMethod::MonteCarlo, singular_directions));
    }
    let caps: Vec<ZeroCap> = zeros
        .iter()
        .enumerate()
        .map(|(i, &(t, k))| {
            let mut gap = two_pi;
            for (j, &(s, _)) in zeros.iter().enumerate() {
                if i != j {
                    let raw = (t - s).abs().rem_euclid(two_pi);
                    gap = gap.min(raw.min(two_pi - raw));
                }
            }
            let u0 = [t.cos(), t.sin()];
            let perp = [-t.sin(), t.cos()];
            let at_zero: Vec<_> = form.factors().iter().map(|f| f.eval(&u0)).collect();
            let at_perp: Vec<_> = form.factors().iter().map(|f| f.eval(&perp)).collect();
            // prefactor = scale · Π_vanishing |L(perp)| · Π_rest |L(u0)|
            let mut pre = form.scale();
            for (f, (z, p)) in form.factors().iter().zip(at_zero.iter().zip(&at_perp)) {
                if z.norm() <= 1e-9 * f.norm() {
                    pre *= p.norm();
                } else {
                    pre *= z.norm();
                }
            }
            ZeroCap {
                theta: t,
                alpha: k as f64 * 2.0 / d,
                delta: (0.45 * gap).min(0.4),
                prefactor: pre,
                at_zero,
                at_perp,
            }
        })
        .collect();

    // analytic core: ∫_{|t|<CORE_CUT} (1/2)(pre·t^k)^{-2/d} dt per zero
    let mut core = 0.0;
    for cap in &caps {
        core += cap.prefactor.powf(-2.0 / d) * CORE_CUT.powf(1.0 - cap.alpha)
            / (1.0 - cap.alpha);
    }

    let w_uniform = if caps.is_empty() { 1.0 } else { 0.5 };
    let w_each = if caps.is_empty() { 0.0 } else { 0.5 / caps.len() as f64 };
    // truncated cap proposal density on CORE_CUT ≤ |t| ≤ delta
    let cap_norm: Vec<f64> = caps
        .iter()
        .map(|c| {
            (1.0 - c.alpha) / (2.0 * (c.delta.powf(1.0 - c.alpha) - CORE_CUT.powf(1.0 - c.alpha)))
        })
        .collect();
    let signed_dist = |theta: f64, center: f64| -> f64 {
        let mut raw = (theta - center).rem_euclid(two_pi);
        if raw > std::f64::consts::PI {
            raw -= two_pi;
        }
        raw
    };
    let density = |theta: f64| -> f64 {
        let mut q = w_uniform / two_pi;
        for (cap, nz) in caps.iter().zip(&cap_norm) {
            let dist = signed_dist(theta, cap.theta).abs();
            if dist < cap.delta && dist >= CORE_CUT {
                q += w_each * nz * dist.powf(-cap.alpha);
            }
        }
        q
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        // sample either a uniform angle or (zero index, offset)
        let mut by_cap: Option<(usize, f64)> = None;
        let theta = if caps.is_empty() || rng.random::<f64>() < w_uniform {
            rng.random_range(0.0..two_pi)
        } else {
            let idx = rng.random_range(0..caps.len());
            let cap = &caps[idx];
            let lo = CORE_CUT.powf(1.0 - cap.alpha);
            let hi = cap.delta.powf(1.0 - cap.alpha);
            let u: f64 = rng.random::<f64>();
            let dist = (lo + u * (hi - lo)).powf(1.0 / (1.0 - cap.alpha));
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            by_cap = Some((idx, sign * dist));
            (cap.theta + sign * dist).rem_euclid(two_pi)
        };
        // the core neighbourhoods are handled analytically; reject uniform
        // samples landing inside them
        let in_core = caps
            .iter()
            .any(|c| signed_dist(theta, c.theta).abs() < CORE_CUT);
        let x = if in_core && by_cap.is_none() {
            0.0
        } else {
            let mag = match by_cap {
                Some((idx, t)) => caps[idx].form_magnitude(form.scale(), t),
                None => {
                    // near a cap, re-evaluate in the rotated frame anyway
                    let near = caps
                        .iter()
                        .enumerate()
                        .map(|(i, c)| (i, signed_dist(theta, c.theta)))
                        .filter(|(_, t)| t.abs() < 1e-3)
                        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap());
                    match near {
                        Some((i, t)) => caps[i].form_magnitude(form.scale(), t),
                        None => {
                            let u = [theta.cos(), theta.sin()];
                            form.evaluate_complex(&u).norm()
                        }
                    }
                }
            };
            let g = 0.5 * mag.max(1e-300).powf(-2.0 / d);
            g / density(theta)
        };
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0) / samples as f64;
    Ok(VolumeEstimate {
        value: core + mean,
        infinite: false,
        abs_error: var.sqrt(),
        method: VolumeMethod::MonteCarlo,
        singular_directions,
        samples_or_nodes: samples,
        converged: true,
        fitted_exponents: Vec::new(),
    })
}

fn orthonormal_frame(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pick = if v[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let mut e1 = vec![
        v[1] * pick[2] - v[2] * pick[1],
        v[2] * pick[0] - v[0] * pick[2],
        v[0] * pick[1] - v[1] * pick[0],
    ];
    let n1 = norm2(&e1);
    for x in e1.iter_mut() {
        *x /= n1;
    }
    let e2 = vec![
        v[1] * e1[2] - v[2] * e1[1],
        v[2] * e1[0] - v[0] * e1[2],
        v[0] * e1[1] - v[1] * e1[0],
    ];
    (e1, e2)
}

fn mc_n3(form: &DecomposableForm, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let d = form.degree() as f64;
    let zeros = form.sphere_zeros()?;
    let mut dirs = Vec::new();
    let mut caps: Vec<(Vec<f64>, f64)> = Vec::new(); // (center, alpha)
    let mut bands: Vec<(Vec<f64>, f64)> = Vec::new(); // (normal, alpha)
    for z in &zeros {
        match z {
            SphereZero::Point { dir, order } => {
                let alpha = *order as f64 * 3.0 / d;
                if alpha >= 2.0 - DIVERGENCE_GUARD {
                    return Ok(infinite_estimate(VolumeMethod::MonteCarlo, vec![dir.clone()]));
                }
                dirs.push(dir.clone());
                caps.push((dir.clone(), alpha));
                caps.push((dir.iter().map(|x| -x).collect(), alpha));
            }
            SphereZero::Circle { normal, order } => {
                let alpha = *order as f64 * 3.0 / d;
                if alpha >= 1.0 - DIVERGENCE_GUARD {
                    return Ok(infinite_estimate(VolumeMethod::MonteCarlo, vec![normal.clone()]));
                }
                dirs.push(normal.clone());
                bands.push((normal.clone(), alpha));
            }
        }
    }
    // two zero circles cross at a pair of antipodal points where the local
    // exponents add; without a proposal cap there the weights are unbounded
    for i in 0..bands.len() {
        for j in i + 1..bands.len() {
            let (n1, a1) = (&bands[i].0, bands[i].1);
            let (n2, a2) = (&bands[j].0, bands[j].1);
            let cross = vec![
                n1[1] * n2[2] - n1[2] * n2[1],
                n1[2] * n2[0] - n1[0] * n2[2],
                n1[0] * n2[1] - n1[1] * n2[0],
            ];
            let nrm = norm2(&cross);
            if nrm > 1e-9 {
                let dir: Vec<f64> = cross.iter().map(|x| x / nrm).collect();
                caps.push((dir.clone(), a1 + a2));
                caps.push((dir.iter().map(|x| -x).collect(), a1 + a2));
            }
        }
    }
    let r0 = 0.3f64;
    let delta = 0.3f64;
    // proposals are truncated at CUT from the singular sets; the mass inside
    // is added analytically from the local power law (direct evaluation at
    // distance ≥ CUT still carries ~1e-11 relative cancellation noise only)
    const CUT: f64 = 1e-6;
    let comp = caps.len() + bands.len();
    let w_uniform = if comp == 0 { 1.0 } else { 0.5 };
    let w_each = if comp == 0 { 0.0 } else { 0.5 / comp as f64 };

    let eval_g = |u: &[f64]| -> f64 {
        form.evaluate_complex(u).norm().max(1e-300).powf(-3.0 / d) / 3.0
    };

    // analytic cores from grid-averaged local prefactors
    let mut core = 0.0;
    let mut core_err = 0.0;
    let grid = 128;
    for (center, alpha) in &caps {
        let (e1, e2) = orthonormal_frame(center);
        let t_ref = 1e-5f64;
        let mut avg = 0.0;
        for g_i in 0..grid {
            let phi = 2.0 * std::f64::consts::PI * g_i as f64 / grid as f64;
            let u: Vec<f64> = (0..3)
                .map(|i| {
                    t_ref.cos() * center[i]
                        + t_ref.sin() * (phi.cos() * e1[i] + phi.sin() * e2[i])
                })
                .collect();
            avg += eval_g(&u) * t_ref.powf(*alpha);
        }
        avg /= grid as f64;
        // ∫_0^CUT ∫_0^{2π} C ρ^{-α} ρ dρ dφ
        let c = avg * 2.0 * std::f64::consts::PI * CUT.powf(2.0 - alpha) / (2.0 - alpha);
        core += c;
        core_err += c * 1e-3;
    }
    for (nrm, alpha) in &bands {
        let (e1, e2) = orthonormal_frame(nrm);
        let t_ref = 1e-5f64;
        let mut avg = 0.0;
        for g_i in 0..grid {
            let psi = 2.0 * std::f64::consts::PI * g_i as f64 / grid as f64;
            let u: Vec<f64> = (0..3)
                .map(|i| {
                    t_ref.cos() * (psi.cos() * e1[i] + psi.sin() * e2[i]) + t_ref.sin() * nrm[i]
                })
                .collect();
            avg += eval_g(&u) * t_ref.powf(*alpha);
        }
        avg /= grid as f64;
        // ∫_ψ ∫_{|t|<CUT} C |t|^{-α} cos t dt dψ
        let c = avg * 2.0 * std::f64::consts::PI * 2.0 * CUT.powf(1.0 - alpha) / (1.0 - alpha);
        core += c;
        core_err += c * 1e-3;
    }

    let cap_norm: Vec<f64> = caps
        .iter()
        .map(|(_, alpha)| (2.0 - alpha) / (r0.powf(2.0 - alpha) - CUT.powf(2.0 - alpha)))
        .collect();
    let band_norm: Vec<f64> = bands
        .iter()
        .map(|(_, alpha)| (1.0 - alpha) / (2.0 * (delta.powf(1.0 - alpha) - CUT.powf(1.0 - alpha))))
        .collect();
    let density = |u: &[f64]| -> f64 {
        let mut q = w_uniform / (4.0 * std::f64::consts::PI);
        for ((center, alpha), nz) in caps.iter().zip(&cap_norm) {
            let dot: f64 = u.iter().zip(center).map(|(a, b)| a * b).sum();
            let rho = dot.clamp(-1.0, 1.0).acos();
            if rho < r0 && rho >= CUT {
                q += w_each * nz * rho.powf(1.0 - alpha)
                    / (2.0 * std::f64::consts::PI * rho.sin().max(1e-300));
            }
        }
        for ((nrm, alpha), nz) in bands.iter().zip(&band_norm) {
            let dot: f64 = u.iter().zip(nrm).map(|(a, b)| a * b).sum();
            let t = dot.clamp(-1.0, 1.0).asin();
            if t.abs() < delta && t.abs() >= CUT {
                q += w_each * nz * t.abs().powf(-alpha)
                    / (2.0 * std::f64::consts::PI * t.cos().max(1e-12));
            }
        }
        q
    };
    let in_core = |u: &[f64]| -> bool {
        caps.iter().any(|(center, _)| {
            let dot: f64 = u.iter().zip(center).map(|(a, b)| a * b).sum();
            dot.clamp(-1.0, 1.0).acos() < CUT
        }) || bands.iter().any(|(nrm, _)| {
            let dot: f64 = u.iter().zip(nrm).map(|(a, b)| a * b).sum();
            dot.clamp(-1.0, 1.0).asin().abs() < CUT
        })
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let pick: f64 = rng.random::<f64>();
        let (u, from_mixture): (Vec<f64>, bool) = if comp == 0 || pick < w_uniform {
            let mut v = vec![normal(&mut rng), normal(&mut rng), normal(&mut rng)];
            let n = norm2(&v).max(1e-300);
            for x in v.iter_mut() {
                *x /= n;
            }
            (v, false)
        } else {
            let idx = ((pick - w_uniform) / w_each) as usize;
            let idx = idx.min(comp - 1);
            let v = if idx < caps.len() {
                let (center, alpha) = &caps[idx];
                let lo = CUT.powf(2.0 - alpha);
                let hi = r0.powf(2.0 - alpha);
                let rho = (lo + rng.random::<f64>() * (hi - lo)).powf(1.0 / (2.0 - alpha));
                let phi = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                let (e1, e2) = orthonormal_frame(center);
                (0..3)
                    .map(|i| {
                        rho.cos() * center[i]
                            + rho.sin() * (phi.cos() * e1[i] + phi.sin() * e2[i])
                    })
                    .collect()
            } else {
                let (nrm, alpha) = &bands[idx - caps.len()];
                let lo = CUT.powf(1.0 - alpha);
                let hi = delta.powf(1.0 - alpha);
                let t = (lo + rng.random::<f64>() * (hi - lo)).powf(1.0 / (1.0 - alpha));
                let t = if rng.random::<bool>() { t } else { -t };
                let psi = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                let (e1, e2) = orthonormal_frame(nrm);
                (0..3)
                    .map(|i| {
                        t.cos() * (psi.cos() * e1[i] + psi.sin() * e2[i]) + t.sin() * nrm[i]
                    })
                    .collect()
            };
            (v, true)
        };
        let x = if !from_mixture && in_core(&u) {
            0.0
        } else {
            eval_g(&u) / density(&u)
        };
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0) / samples as f64;
    Ok(VolumeEstimate {
        value: core + mean,
        infinite: false,
        abs_error: var.sqrt() + core_err,
        method: VolumeMethod::MonteCarlo,
        singular_directions: dirs,
        samples_or_nodes: samples,
        converged: true,
        fitted_exponents: Vec::new(),
    })
}

fn sphere_area(n: usize) -> f64 {
    // 2 π^{n/2} / Γ(n/2)
    let half = n as f64 / 2.0;
    let gamma_half = if n % 2 == 0 {
        crate::geom::factorial(n as u64 / 2 - 1)
    } else {
        // Γ(k + 1/2) = (2k)!/(4^k k!) √π
        let k = (n - 1) / 2;
        crate::geom::factorial(2 * k as u64) / (4f64.powi(k as i32) * crate::geom::factorial(k as u64))
            * std::f64::consts::PI.sqrt()
    };
    2.0 * std::f64::consts::PI.powf(half) / gamma_half
}

fn mc_uniform(form: &DecomposableForm, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let n = form.n();
    let d = form.degree() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let area = sphere_area(n);
    for _ in 0..samples {
        let mut v = vec![0.0; n];
        for x in v.iter_mut() {
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random::<f64>();
            *x = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
        let nn = norm2(&v).max(1e-300);
        for x in v.iter_mut() {
            *x /= nn;
        }
        let g = form.evaluate_complex(&v).norm().max(1e-300).powf(-(n as f64) / d);
        let x = g * area / n as f64;
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0) / samples as f64;
    Ok(VolumeEstimate {
        value: mean,
        infinite: false,
        abs_error: var.sqrt(),
        method: VolumeMethod::MonteCarlo,
        singular_directions: Vec::new(),
        samples_or_nodes: samples,
        converged: true,
        fitted_exponents: Vec::new(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereMin {
    pub mu: f64,
    /// μ_global ≥ mu · (1 − cert_slack) holds by the Lipschitz certificate.
    pub cert_slack: f64,
    pub direction: Vec<f64>,
    pub zero_bracketed: bool,
}

/// Certified minimum of |F| over the unit sphere. Zero directions are
/// detected exactly from the factor structure; the positive case (n = 2)
/// uses branch-and-bound with the Lipschitz constant d·H(F).
pub fn sphere_min(form: &DecomposableForm) -> Result<SphereMin> {
    let n = form.n();
    if n > 3 {
        return Err(Error::Unsupported("sphere_min covers n <= 3".into()));
    }
    if n == 1 {
        let mu = form.evaluate_complex(&[1.0]).norm();
        return Ok(SphereMin { mu, cert_slack: 0.0, direction: vec![1.0], zero_bracketed: mu == 0.0 });
    }
    let zeros = form.sphere_zeros()?;
    if let Some(z) = zeros.first() {
        let dir = match z {
            SphereZero::Point { dir, .. } => dir.clone(),
            SphereZero::Circle { normal, .. } => {
                let (e1, _) = orthonormal_frame(normal);
                e1
            }
        };
        return Ok(SphereMin { mu: 0.0, cert_slack: 0.0, direction: dir, zero_bracketed: true });
    }
    if n == 3 {
        // every linear form in 3 variables vanishes on the sphere, so a
        // zero-free decomposable form cannot exist here
        return Err(Error::Precondition(
            "n = 3 forms always have sphere zeros; zero detection failed".into(),
        ));
    }

    let h = crate::height::height(form);
    let lip = form.degree() as f64 * h;
    let eval = |theta: f64| -> f64 {
        form.evaluate_complex(&[theta.cos(), theta.sin()]).norm()
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let coarse = 512;
    let mut best = f64::INFINITY;
    let mut best_theta = 0.0;
    for i in 0..coarse {
        let t = two_pi * i as f64 / coarse as f64;
        let v = eval(t);
        if v < best {
            best = v;
            best_theta = t;
        }
    }
    // golden-section polish around the best sample
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_theta - two_pi / coarse as f64, best_theta + two_pi / coarse as f64);
    let (mut c, mut dd) = (b - gr * (b - a), a + gr * (b - a));
    for _ in 0..80 {
        if eval(c) < eval(dd) {
            b = dd;
        } else {
            a = c;
        }
        c = b - gr * (b - a);
        dd = a + gr * (b - a);
    }
    let polished_theta = 0.5 * (a + b);
    let polished = eval(polished_theta);
    if polished < best {
        best = polished;
        best_theta = polished_theta;
    }

    // branch-and-bound certificate: discard cells whose Lipschitz lower
    // bound clears best·(1 − slack). The reported mu itself is polished far
    // beyond the certificate slack.
    let cert_slack = 1e-3;
    let mut stack: Vec<(f64, f64)> = (0..coarse)
        .map(|i| (two_pi * i as f64 / coarse as f64, two_pi * (i + 1) as f64 / coarse as f64))
        .collect();
    let mut work = 0usize;
    while let Some((ca, cb)) = stack.pop() {
        work += 1;
        if work > 4_000_000 {
            return Err(Error::BudgetExceeded("sphere_min certification".into()));
        }
        let mid = 0.5 * (ca + cb);
        let v = eval(mid);
        if v < best {
            best = v;
            best_theta = mid;
        }
        let lower = v - lip * 0.5 * (cb - ca);
        if lower >= best * (1.0 - cert_slack) {
            continue;
        }
        if cb - ca < 1e-12 {
            continue;
        }
        stack.push((ca, mid));
        stack.push((mid, cb));
    }
    Ok(SphereMin {
        mu: best,
        cert_slack,
        direction: vec![best_theta.cos(), best_theta.sin()],
        zero_bracketed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn circle_volume_is_pi() {
        let v = volume_radial(&families::circle(), 1e-9).unwrap();
        assert!(!v.infinite);
        assert!((v.value - std::f64::consts::PI).abs() < 1e-9, "V = {}", v.value);
    }

    #[test]
    fn xy_volume_diverges() {
        let v = volume_radial(&families::xy(), 1e-6).unwrap();
        assert!(v.infinite);
    }

    #[test]
    fn x2_minus_2y2_diverges() {
        use std::collections::BTreeMap;
        let mut map = BTreeMap::new();
        map.insert(vec![2, 0], 1i128);
        map.insert(vec![0, 2], -2i128);
        let f = crate::form::DecomposableForm::from_integer_coeffs(2, 2, map).unwrap();
        let v = volume_radial(&f, 1e-6).unwrap();
        assert!(v.infinite);
    }

    #[test]
    fn cubic_volume_matches_oracle() {
        // independent oracle: 30-digit tanh-sinh quadrature of
        // (1/2)∫|cos³t + 2sin³t|^{-2/3} dt gives 4.20654631684858860
        let v = volume_radial(&families::cubic(), 1e-7).unwrap();
        assert!(!v.infinite);
        assert!((v.value - 4.206546316848589).abs() < 1e-5, "V = {}", v.value);
        assert!((v.value - 4.206546316848589).abs() < 3.0 * v.abs_error + 1e-6);
    }

    #[test]
    fn monte_carlo_agrees_with_radial_on_circle() {
        let r = volume_radial(&families::circle(), 1e-9).unwrap();
        let m = volume_monte_carlo(&families::circle(), 20_000, 7).unwrap();
        let comb = (r.abs_error.powi(2) + m.abs_error.powi(2)).sqrt();
        assert!((r.value - m.value).abs() <= 3.0 * comb + 1e-9);
    }

    #[test]
    fn monte_carlo_cubic_importance() {
        let r = volume_radial(&families::cubic(), 1e-8).unwrap();
        let m = volume_monte_carlo(&families::cubic(), 200_000, 11).unwrap();
        let comb = (r.abs_error.powi(2) + m.abs_error.powi(2)).sqrt();
        assert!(
            (r.value - m.value).abs() <= 4.0 * comb,
            "radial {} vs mc {} ± {}",
            r.value,
            m.value,
            m.abs_error
        );
    }

    #[test]
    fn sphere_min_examples() {
        let s = sphere_min(&families::circle()).unwrap();
        assert!((s.mu - 1.0).abs() < 1e-9);
        let s = sphere_min(&families::cubic()).unwrap();
        assert!(s.zero_bracketed && s.mu == 0.0);
        let s = sphere_min(&families::ellipse_product()).unwrap();
        assert!((s.mu - 2.0).abs() < 1e-9, "mu = {}", s.mu);
    }

    #[test]
    fn f_eps_volume_lower_bound() {
        // (22): V(F_eps) > -log(eps)/12 for eps < (3e)^{-2}
        let f = families::f_eps(4, 1e-3).unwrap();
        let v = volume_radial(&f, 1e-6).unwrap();
        assert!(!v.infinite);
        assert!(v.value > -(1e-3f64).ln() / 12.0, "V = {}", v.value);
    }
}
