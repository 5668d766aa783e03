//! H(F), its minimization over the |det T| = 1 manifold, the
//! determinant-sum upper bound, successive minima of the transform
//! parallelepiped, the integral reduction, and the §4 invariants.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{DecomposableForm, Transform};
use crate::geom::factorial;
use crate::linalg::{self, Matrix};

/// H(F) = scale · Π ‖L_i‖.
pub fn height(form: &DecomposableForm) -> f64 {
    form.scale() * form.factors().iter().map(|f| f.norm()).product::<f64>()
}

/// H(F ∘ T) without materializing the composed form.
pub fn height_after(form: &DecomposableForm, t: &Transform) -> f64 {
    let rows = t.rows();
    let n = form.n();
    let mut h = form.scale();
    for f in form.factors() {
        let mut nrm_sqr = 0.0;
        for j in 0..n {
            let mut c = Complex64::new(0.0, 0.0);
            for i in 0..n {
                c += f.coeffs[i] * rows[i][j];
            }
            nrm_sqr += c.norm_sqr();
        }
        h *= nrm_sqr.sqrt();
    }
    h
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizerCfg {
    pub seed: u64,
    pub starts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for OptimizerCfg {
    fn default() -> Self {
        OptimizerCfg { seed: 0, starts: 8, max_iters: 600, tol: 1e-13 }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizationResult {
    /// Best H(F∘T) found over |det T| = 1.
    pub m_estimate: f64,
    /// Largest certified lower bound for the true infimum.
    pub m_lower: f64,
    pub t_opt: Transform,
    /// Rearranged determinant-sum bound; the Gram–Schmidt start guarantees
    /// m_estimate never exceeds it.
    pub lemma3_upper: f64,
    /// Value at the Gram–Schmidt initializer.
    pub gs_start: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Distinct local minimizers found within tolerance of the best value.
    pub minimizers: Vec<Transform>,
}

// ---------------------------------------------------------------------------
// det-1 manifold parametrization: T = T_seed · exp(A), A traceless
// ---------------------------------------------------------------------------

fn traceless_from_params(n: usize, params: &[f64]) -> Matrix {
    let mut a = Matrix::zeros(n);
    let mut idx = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a.set(i, j, params[idx]);
                idx += 1;
            }
        }
    }
    // diagonal: n-1 free entries, last balances the trace
    let mut trace = 0.0;
    for i in 0..n - 1 {
        a.set(i, i, params[idx]);
        trace += params[idx];
        idx += 1;
    }
    a.set(n - 1, n - 1, -trace);
    a
}

fn param_dim(n: usize) -> usize {
    n * n - 1
}

// ---------------------------------------------------------------------------
// Nelder–Mead
// ---------------------------------------------------------------------------

struct NmOutcome {
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> NmOutcome {
    let dim = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let pts2: Vec<Vec<f64>> = order.iter().map(|&i| pts[i].clone()).collect();
        let vals2: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        pts = pts2;
        vals = vals2;
        if (vals[dim] - vals[0]).abs() <= tol * (1.0 + vals[0].abs()) {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| pts[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let reflect: Vec<f64> = (0..dim).map(|j| 2.0 * centroid[j] - pts[dim][j]).collect();
        let fr = f(&reflect);
        if fr < vals[0] {
            let expand: Vec<f64> = (0..dim).map(|j| 3.0 * centroid[j] - 2.0 * pts[dim][j]).collect();
            let fe = f(&expand);
            if fe < fr {
                pts[dim] = expand;
                vals[dim] = fe;
            } else {
                pts[dim] = reflect;
                vals[dim] = fr;
            }
        } else if fr < vals[dim - 1] {
            pts[dim] = reflect;
            vals[dim] = fr;
        } else {
            let contract: Vec<f64> = (0..dim).map(|j| 0.5 * (centroid[j] + pts[dim][j])).collect();
            let fc = f(&contract);
            if fc < vals[dim] {
                pts[dim] = contract;
                vals[dim] = fc;
            } else {
                for i in 1..=dim {
                    for j in 0..dim {
                        pts[i][j] = 0.5 * (pts[0][j] + pts[i][j]);
                    }
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap())
        .unwrap();
    NmOutcome { x: pts[best].clone(), iterations, converged }
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// The Gram–Schmidt transform: upper triangular T with the columns of M·T
/// orthonormal under the hermitian inner product, rescaled to det 1.
/// Factors must span ℝⁿ.
pub fn gram_schmidt_seed(form: &DecomposableForm) -> Result<Transform> {
    let n = form.n();
    let vectors = form.scaled_factor_vectors();
    // G = Mᴴ M is real symmetric positive definite by conjugate closure.
    let mut g = Matrix::zeros(n);
    for j in 0..n {
        for k in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for v in &vectors {
                s += v[j].conj() * v[k];
            }
            debug_assert!(s.im.abs() <= 1e-9 * s.re.abs().max(1e-12));
            g.set(j, k, s.re);
        }
    }
    let l = g
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("factor matrix has rank < n".into()))?;
    let r = l.transpose();
    let t0 = r
        .inverse_upper_triangular()
        .ok_or_else(|| Error::RankDeficient("factor matrix has rank < n".into()))?;
    Ok(Transform::from_matrix(t0)?.renormalized_det1())
}

// ---------------------------------------------------------------------------
// Certified lower bounds via Hadamard
// ---------------------------------------------------------------------------

fn subset_dets(form: &DecomposableForm) -> (Vec<Vec<usize>>, Vec<f64>) {
    let d = form.degree();
    let n = form.n();
    let vectors = form.scaled_factor_vectors();
    let mut subsets = Vec::new();
    let mut dets = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let tuple: Vec<Vec<Complex64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
        subsets.push(idx.clone());
        dets.push(crate::geom::wedge_norm(&tuple));
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return (subsets, dets);
            }
            k -= 1;
            if idx[k] != k + d - n {
                idx[k] += 1;
                for t in k + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Largest Hadamard-type certified lower bound for the infimum of H(F∘T)
/// over |det T| = 1: the geometric-mean bound over all n-subsets, and the
/// best product over disjoint independent n-subset partitions when n | d.
pub fn certified_lower_bound(form: &DecomposableForm) -> f64 {
    let d = form.degree();
    let n = form.n();
    if n == 1 {
        return height(form);
    }
    if d < n {
        return 0.0;
    }
    let (subsets, dets) = subset_dets(form);
    let mut best = 0.0f64;
    // all-subsets geometric mean: each index appears in C(d-1, n-1) subsets
    if dets.iter().all(|&v| v > 0.0) {
        let q = crate::geom::binomial(d as u64 - 1, n as u64 - 1);
        let log_sum: f64 = dets.iter().map(|v| v.ln()).sum();
        best = best.max((log_sum / q).exp());
    }
    // best partition into disjoint independent tuples
    if d % n == 0 {
        fn recurse(
            remaining: &mut Vec<usize>,
            subsets: &[Vec<usize>],
            dets: &[f64],
            acc: f64,
            best: &mut f64,
        ) {
            if remaining.is_empty() {
                *best = best.max(acc);
                return;
            }
            let first = remaining[0];
            for (s, det) in subsets.iter().zip(dets) {
                if *det <= 0.0 || s[0] != first {
                    continue;
                }
                if s.iter().all(|i| remaining.contains(i)) {
                    let mut rest: Vec<usize> =
                        remaining.iter().copied().filter(|i| !s.contains(i)).collect();
                    recurse(&mut rest, subsets, dets, acc * det, best);
                }
            }
        }
        let mut remaining: Vec<usize> = (0..d).collect();
        let mut best_part = 0.0f64;
        recurse(&mut remaining, &subsets, &dets, 1.0, &mut best_part);
        best = best.max(best_part);
    }
    best
}

// ---------------------------------------------------------------------------
// The determinant-sum bound
// ---------------------------------------------------------------------------

/// Σ over ordered n-tuples of |det(a_{i1}L_{i1}ᵗ ⋯ a_{in}L_{in}ᵗ)|², with
/// the conjugate symmetrization b_i = √(a_i a_{σ(i)}) applied first.
pub fn det_sum(form: &DecomposableForm, weights: Option<&[f64]>) -> Result<f64> {
    let d = form.degree();
    let n = form.n();
    let a: Vec<f64> = match weights {
        None => vec![1.0; d],
        Some(w) => {
            if w.len() != d {
                return Err(Error::InvalidWeights(format!(
                    "expected {d} weights, got {}",
                    w.len()
                )));
            }
            if w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidWeights("weights must be positive".into()));
            }
            let prod: f64 = w.iter().product();
            if (prod - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidWeights(format!("product {prod} != 1")));
            }
            w.to_vec()
        }
    };
    let sigma = form.sigma();
    let b: Vec<f64> = (0..d).map(|i| (a[i] * a[sigma[i]]).sqrt()).collect();
    let (subsets, dets) = subset_dets(form);
    let mut total = 0.0;
    for (s, det) in subsets.iter().zip(&dets) {
        let wprod: f64 = s.iter().map(|&i| b[i]).product();
        total += (wprod * det).powi(2);
    }
    Ok(total * factorial(n as u64))
}

/// The determinant-sum inequality rearranged as an upper bound on the
/// geometric height: (nⁿ Σ / (n! dⁿ))^{d/2n}.
pub fn lemma3_bound(form: &DecomposableForm, weights: Option<&[f64]>) -> Result<f64> {
    let n = form.n() as f64;
    let d = form.degree() as f64;
    let sum = det_sum(form, weights)?;
    Ok((n.powf(n) * sum / (factorial(form.n() as u64) * d.powf(n))).powf(d / (2.0 * n)))
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

pub fn minimize_height_real(
    form: &DecomposableForm,
    cfg: &OptimizerCfg,
) -> Result<MinimizationResult> {
    minimize_height_with_seeds(form, cfg, &[])
}

/// Multi-start minimization of H(F∘T) on the det-1 manifold, seeded at the
/// identity, the Gram–Schmidt transform, any caller-supplied transforms,
/// and `cfg.starts` random offsets. Deterministic for a fixed cfg.seed.
pub fn minimize_height_with_seeds(
    form: &DecomposableForm,
    cfg: &OptimizerCfg,
    extra_seeds: &[Transform],
) -> Result<MinimizationResult> {
    let n = form.n();
    if n == 1 {
        let h = height(form);
        return Ok(MinimizationResult {
            m_estimate: h,
            m_lower: h,
            t_opt: Transform::identity(1),
            lemma3_upper: h,
            gs_start: h,
            iterations: 0,
            converged: true,
            minimizers: vec![Transform::identity(1)],
        });
    }
    let gs = gram_schmidt_seed(form)?; // also performs the span check
    let gs_start = height_after(form, &gs);

    let mut seeds: Vec<Transform> = vec![Transform::identity(n), gs.clone()];
    for t in extra_seeds {
        seeds.push(t.renormalized_det1());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while seeds.len() < 2 + extra_seeds.len() + cfg.starts {
        let params: Vec<f64> = (0..param_dim(n)).map(|_| rng.random_range(-0.8..0.8)).collect();
        let a = traceless_from_params(n, params.as_slice());
        seeds.push(Transform::from_matrix(a.expm())?);
    }

    let dim = param_dim(n);
    let mut total_iters = 0;
    let mut results: Vec<(f64, Transform, bool)> = Vec::new();
    for seed in &seeds {
        // precompose the factor rows with the seed once
        let seeded = form.compose(seed)?;
        let mut current = seed.clone();
        let mut current_form = seeded;
        let mut converged = false;
        // a few restart rounds with shrinking simplex polish the minimum
        for &step in &[0.4, 1e-2, 1e-5] {
            let outcome = nelder_mead(
                |p| {
                    let a = traceless_from_params(n, p);
                    let t = Transform::from_matrix(a.expm()).expect("exp is invertible");
                    height_after(&current_form, &t).ln()
                },
                &vec![0.0; dim],
                step,
                cfg.max_iters,
                cfg.tol,
            );
            total_iters += outcome.iterations;
            converged = outcome.converged;
            let a = traceless_from_params(n, &outcome.x);
            let t = Transform::from_matrix(a.expm())?;
            current = current.mul(&t).renormalized_det1();
            current_form = form.compose(&current)?;
        }
        let value = height_after(form, &current);
        results.push((value, current, converged));
    }

    results.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (best_val, best_t, best_conv) = results[0].clone();

    // distinct minimizers within tolerance of the best value
    let mut minimizers: Vec<Transform> = Vec::new();
    for (v, t, _) in &results {
        if (v - best_val).abs() > 1e-6 * best_val.max(1e-300) {
            continue;
        }
        let is_new = minimizers.iter().all(|m| {
            let diff: f64 = m
                .rows()
                .iter()
                .flatten()
                .zip(t.rows().iter().flatten())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            diff > 1e-3
        });
        if is_new {
            minimizers.push(t.clone());
        }
    }

    let lemma3_upper = lemma3_bound(form, None)?;
    let m_lower = certified_lower_bound(form);
    debug_assert!(best_val <= height(form) * (1.0 + 1e-9));
    debug_assert!(best_val <= lemma3_upper * (1.0 + 1e-6));
    debug_assert!(best_val >= m_lower * (1.0 - 1e-9));
    Ok(MinimizationResult {
        m_estimate: best_val,
        m_lower,
        t_opt: best_t,
        lemma3_upper,
        gs_start,
        iterations: total_iters,
        converged: best_conv,
        minimizers,
    })
}

// ---------------------------------------------------------------------------
// Successive minima of P(T) and the integral reduction
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SuccessiveMinima {
    /// λ₁ ≤ ⋯ ≤ λₙ.
    pub lambdas: Vec<f64>,
    /// Attaining linearly independent integer vectors.
    pub minima_vectors: Vec<Vec<i64>>,
    /// Basis z₁..zₙ of ℤⁿ with zᵢ ∈ iλᵢ·P(T).
    pub basis: Vec<Vec<i64>>,
}

fn int_rank(vectors: &[Vec<i64>]) -> usize {
    // fraction-free elimination over i128
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors.len();
    let cols = vectors[0].len();
    let mut m: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols {
        let pivot = (rank..rows).find(|&r| m[r][col] != 0);
        match pivot {
            None => {
                col += 1;
                continue;
            }
            Some(p) => {
                m.swap(rank, p);
                for r in rank + 1..rows {
                    if m[r][col] != 0 {
                        let a = m[rank][col];
                        let b = m[r][col];
                        for cc in col..cols {
                            m[r][cc] = m[r][cc] * a - m[rank][cc] * b;
                        }
                    }
                }
                rank += 1;
                col += 1;
            }
        }
    }
    rank
}

fn idet_small(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    match n {
        1 => m[0][0] as i128,
        2 => m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128,
        _ => {
            // cofactor along first row; n <= 4 at desk scale
            let mut det: i128 = 0;
            for j in 0..n {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = (1..n)
                    .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c]).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                det += sign as i128 * m[0][j] as i128 * idet_small(&minor);
            }
            det
        }
    }
}

/// Successive minima of P(T) = T·[-1,1]ⁿ against ℤⁿ by exhaustive
/// enumeration of growing dilates, plus a ℤⁿ basis with zᵢ ∈ iλᵢP(T).
pub fn successive_minima(t: &Transform, max_points: usize) -> Result<SuccessiveMinima> {
    let n = t.n();
    if n > 4 {
        return Err(Error::Unsupported("successive minima enumeration is for n <= 4".into()));
    }
    let t_inv = t.inverse();
    let gauge = |z: &[i64]| -> f64 {
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        linalg::sup_norm(&t_inv.apply(&zf))
    };
    let rows = t.rows();
    let row_abs: Vec<f64> = rows.iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect();

    let mut radius = 1.0f64;
    for _ in 0..28 {
        // enumerate gauge <= radius via the bounding box |z_k| <= radius * Σ_j |T_kj|
        let bounds: Vec<i64> = row_abs
            .iter()
            .map(|&s| (radius * s + 1e-9).floor() as i64)
            .collect();
        let count_bound: f64 = bounds.iter().map(|&b| 2.0 * b as f64 + 1.0).product();
        if count_bound > max_points as f64 {
            return Err(Error::BudgetExceeded(format!(
                "enumeration box of ~{count_bound:.1e} points at radius {radius}"
            )));
        }
        let mut candidates: Vec<(f64, Vec<i64>)> = Vec::new();
        let mut z = vec![0i64; n];
        enumerate_box(&bounds, &mut z, 0, &mut |z| {
            if z.iter().all(|&v| v == 0) {
                return;
            }
            let g = gauge(z);
            if g <= radius {
                candidates.push((g, z.to_vec()));
            }
        });
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut vecs: Vec<Vec<i64>> = Vec::new();
        let mut lambdas: Vec<f64> = Vec::new();
        for (g, z) in &candidates {
            if vecs.len() == n {
                break;
            }
            let mut trial = vecs.clone();
            trial.push(z.clone());
            if int_rank(&trial) == trial.len() {
                vecs.push(z.clone());
                lambdas.push(*g);
            }
        }
        if vecs.len() == n {
            let basis = basis_from_minima(t, &t_inv, &vecs, &lambdas)?;
            return Ok(SuccessiveMinima { lambdas, minima_vectors: vecs, basis });
        }
        radius *= 2.0;
    }
    Err(Error::BudgetExceeded("successive minima search radius overflow".into()))
}

fn enumerate_box(bounds: &[i64], z: &mut Vec<i64>, k: usize, visit: &mut impl FnMut(&[i64])) {
    if k == bounds.len() {
        visit(z);
        return;
    }
    for v in -bounds[k]..=bounds[k] {
        z[k] = v;
        enumerate_box(bounds, z, k + 1, visit);
    }
}

/// Basis z₁..zₙ of ℤⁿ with span_ℤ(z₁..z_i) ⊇ {v₁..v_i} saturated, gauge
/// reduced so that zᵢ ∈ iλᵢP(T).
fn basis_from_minima(
    _t: &Transform,
    t_inv: &Transform,
    minima: &[Vec<i64>],
    lambdas: &[f64],
) -> Result<Vec<Vec<i64>>> {
    let n = minima.len();
    // Integer row reduction W·V = H (upper triangular), V columns = minima.
    // Work on the transposed system: columns of V.
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| minima[j][i] as i128).collect())
        .collect(); // v[i][j] = i-th coordinate of v_j
    let mut w_inv: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect(); // accumulates Z = W⁻¹ (columns are the basis)

    // eliminate below the diagonal of V with unimodular row ops; apply the
    // inverse column op to w_inv to keep Z·(W·V) = V
    for col in 0..n {
        loop {
            // find the two smallest nonzero entries at or below the diagonal
            let mut rows_nz: Vec<usize> =
                (col..n).filter(|&r| v[r][col] != 0).collect();
            if rows_nz.is_empty() {
                return Err(Error::RankDeficient("minima vectors lost rank".into()));
            }
            rows_nz.sort_by_key(|&r| v[r][col].abs());
            let r0 = rows_nz[0];
            if rows_nz.len() == 1 {
                if r0 != col {
                    v.swap(r0, col);
                    // inverse of a row swap is the matching column swap on Z
                    for row in w_inv.iter_mut() {
                        row.swap(r0, col);
                    }
                }
                break;
            }
            let r1 = rows_nz[1];
            let q = v[r1][col] / v[r0][col];
            // row op: row_r1 -= q * row_r0  ⇒  Z column op: col_r0 += q * col_r1
            for c in 0..n {
                v[r1][c] -= q * v[r0][c];
            }
            for row in w_inv.iter_mut() {
                row[r0] += q * row[r1];
            }
        }
    }

    let mut basis: Vec<Vec<i64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    i64::try_from(w_inv[i][j]).map_err(|_| Error::Overflow)
                })
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    // Gauge-reduce each z_i by the earlier minima vectors; |c_j| <= 1/2
    // afterwards, which gives gauge(z_i) <= ((i-1)/2 + 1) λ_i <= i λ_i.
    let vmat = Matrix::from_rows(
        &(0..n)
            .map(|i| (0..n).map(|j| minima[j][i] as f64).collect::<Vec<f64>>())
            .collect::<Vec<_>>(),
    );
    for i in 1..n {
        for j in (0..i).rev() {
            let zf: Vec<f64> = basis[i].iter().map(|&x| x as f64).collect();
            let coords = vmat.solve(&zf).ok_or(Error::Overflow)?;
            let k = coords[j].round();
            if k != 0.0 {
                for c in 0..n {
                    basis[i][c] -= (k as i64) * minima[j][c];
                }
            }
        }
    }

    // verify the guarantees
    let gauge = |z: &[i64]| -> f64 {
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        linalg::sup_norm(&t_inv.apply(&zf))
    };
    for (i, z) in basis.iter().enumerate() {
        let bound = (i as f64 + 1.0) * lambdas[i] * (1.0 + 1e-9);
        if gauge(z) > bound {
            return Err(Error::Precondition(format!(
                "basis vector {} escaped its dilate: gauge {} > {}",
                i,
                gauge(z),
                bound
            )));
        }
    }
    let det = idet_small(&(0..n)
        .map(|i| (0..n).map(|j| basis[j][i]).collect::<Vec<i64>>())
        .collect::<Vec<_>>());
    if det.abs() != 1 {
        return Err(Error::Precondition(format!("basis determinant {det} != ±1")));
    }
    Ok(basis)
}

#[derive(Clone, Debug)]
pub struct IntegralReduction {
    /// Basis transform from the successive-minima construction.
    pub s_constructed: Vec<Vec<i64>>,
    /// After greedy descent over elementary column moves.
    pub s_improved: Vec<Vec<i64>>,
    /// H(F∘S) for the improved S.
    pub m_upper: f64,
    /// H(F∘S) for the constructed S (the one the norm sandwich is about).
    pub h_constructed: f64,
    pub minima: SuccessiveMinima,
}

/// Integral reduction: a unimodular S with H(F∘S) ≤ n^{d(n+1/2)} 𝔪ⁿ built
/// from the successive minima of P(T_opt), then greedily improved.
pub fn reduce_integral(
    form: &DecomposableForm,
    min_result: &MinimizationResult,
) -> Result<IntegralReduction> {
    let n = form.n();
    let ip = form
        .integer_poly()
        .ok_or_else(|| Error::Precondition("form must have an exact integer expansion".into()))?;
    let sm = successive_minima(&min_result.t_opt, 4_000_000)?;
    // |F(z_1)| >= 1 is what the construction leans on
    let z1: Vec<i128> = sm.minima_vectors[0].iter().map(|&v| v as i128).collect();
    if ip.eval(&z1)? == 0 {
        return Err(Error::Precondition(format!(
            "form vanishes at nontrivial integer point {:?}",
            sm.minima_vectors[0]
        )));
    }
    let s_cols = sm.basis.clone();
    let t_of = |cols: &[Vec<i64>]| -> Result<Transform> { Transform::from_integer_columns(cols) };
    let h_constructed = height_after(form, &t_of(&s_cols)?);

    // greedy descent over column moves c_i ← c_i ± c_j
    let mut best_cols = s_cols.clone();
    let mut best_h = h_constructed;
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for sign in [-1i64, 1] {
                    let mut cand = best_cols.clone();
                    for r in 0..n {
                        cand[i][r] += sign * cand[j][r];
                    }
                    let h = height_after(form, &t_of(&cand)?);
                    if h < best_h * (1.0 - 1e-12) {
                        best_cols = cand;
                        best_h = h;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(IntegralReduction {
        s_constructed: s_cols,
        s_improved: best_cols,
        m_upper: best_h,
        h_constructed,
        minima: sm,
    })
}

// ---------------------------------------------------------------------------
// §4 invariants
// ---------------------------------------------------------------------------

/// Q(F): the L² norm of the dⁿ-vector of tuple determinants, infimized over
/// positive conjugate-symmetric factor scalings with product 1. The
/// objective is convex in the log-weights, so local descent is global.
pub fn q_invariant(form: &DecomposableForm) -> Result<f64> {
    let d = form.degree();
    let n = form.n();
    if d < n {
        return Err(Error::NoIndependentTuple);
    }
    let (subsets, dets) = subset_dets(form);
    let pairs: Vec<(Vec<usize>, f64)> = subsets
        .into_iter()
        .zip(dets)
        .filter(|(_, det)| *det > 0.0)
        .map(|(s, det)| (s, det * det * factorial(n as u64)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoIndependentTuple);
    }
    let sigma = form.sigma();
    let g_and_grad = |t: &[f64]| -> (f64, Vec<f64>) {
        let mut g = 0.0;
        let mut grad = vec![0.0; d];
        for (s, w) in &pairs {
            let e: f64 = s.iter().map(|&i| t[i]).sum();
            let term = w * (2.0 * e).exp();
            g += term;
            for &i in s {
                grad[i] += 2.0 * term;
            }
        }
        (g, grad)
    };
    let project = |v: &mut [f64], sigma: &[usize]| {
        // conjugate symmetry then zero mean
        let snapshot = v.to_vec();
        for i in 0..v.len() {
            v[i] = 0.5 * (snapshot[i] + snapshot[sigma[i]]);
        }
        let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
        for x in v.iter_mut() {
            *x -= mean;
        }
    };
    let mut t = vec![0.0f64; d];
    let (mut g, mut grad) = g_and_grad(&t);
    let mut step = 0.1;
    for _ in 0..4000 {
        let mut dir: Vec<f64> = grad.iter().map(|x| -x).collect();
        project(&mut dir, &sigma);
        let gnorm = linalg::norm2(&dir);
        if gnorm <= 1e-14 * g.max(1e-300) {
            break;
        }
        let mut taken = false;
        while step > 1e-18 {
            let cand: Vec<f64> = t.iter().zip(&dir).map(|(a, b)| a + step * b / gnorm.max(1e-300)).collect();
            let (gc, gradc) = g_and_grad(&cand);
            if gc < g {
                t = cand;
                g = gc;
                grad = gradc;
                step *= 1.6;
                taken = true;
                break;
            }
            step *= 0.5;
        }
        if !taken {
            break;
        }
    }
    Ok(g.sqrt())
}

/// NS(F): the restricted product over ordered independent tuples of the
/// normalized determinant magnitudes.
pub fn ns_invariant(form: &DecomposableForm) -> Result<f64> {
    let n = form.n();
    let unit = form.unit_factor_vectors();
    let d = form.degree();
    if d < n {
        return Err(Error::NoIndependentTuple);
    }
    let mut log_sum = 0.0f64;
    let mut any = false;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let tuple: Vec<Vec<Complex64>> = idx.iter().map(|&i| unit[i].clone()).collect();
        let det = crate::geom::wedge_norm(&tuple);
        if det > 1e-10 {
            any = true;
            log_sum += det.ln();
        }
        let mut k = n;
        let done = loop {
            if k == 0 {
                break true;
            }
            k -= 1;
            if idx[k] != k + d - n {
                idx[k] += 1;
                for t in k + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break false;
            }
        };
        if done {
            break;
        }
    }
    if !any {
        return Err(Error::NoIndependentTuple);
    }
    Ok((factorial(n as u64) * log_sum).exp())
}
