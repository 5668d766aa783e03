//! Wedge norms of factor tuples, the explicit constant table for given
//! (n, d, a′), and the recursive factor selection behind the fundamental
//! inequality.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::DecomposableForm;
use crate::linalg;

/// ‖v₁ ∧ ⋯ ∧ v_k‖, the square root of the Gram determinant. Equals |det|
/// of the square matrix when k = n.
pub fn wedge_norm(vectors: &[Vec<Complex64>]) -> f64 {
    linalg::wedge_norm_sqr(vectors).sqrt()
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

pub fn factorial(n: u64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// All explicit constants c₁, c_{1,j}, c₂, …, c₈ for given (n, d, a′).
#[derive(Clone, Debug, Serialize)]
pub struct ConstantTable {
    pub n: usize,
    pub d: usize,
    pub a_prime: f64,
    pub c1: f64,
    pub c1j: Vec<f64>,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
}

impl ConstantTable {
    /// Exponent (n−j)d / (n(⌊jd/n⌋+1) − jd) shared by the s_j thresholds
    /// and the c_{1,j}.
    fn c1_exponent(n: usize, d: usize, j: usize) -> f64 {
        let floor_jdn = (j * d / n) as f64;
        ((n - j) * d) as f64 / (n as f64 * (floor_jdn + 1.0) - (j * d) as f64)
    }

    /// Threshold used in the s_j definition (without the √(j+1) division).
    pub fn s_threshold(&self, j: usize) -> f64 {
        self.c1.powf(Self::c1_exponent(self.n, self.d, j))
    }

    /// c_{1,j} = s_threshold(j) / √(j+1), used by the selection sets S_j.
    pub fn c1j(&self, j: usize) -> f64 {
        self.c1j[j - 1]
    }
}

fn log_c2_literal(n: usize, d: usize, a_prime: f64, c1: f64) -> f64 {
    // n^{n(d-na')/2} ((n!)^{1/2} Π_j c1^{(j-n)d / (n([jd/n]+1)-jd)})^{d-(n-1)a'}
    let nf = n as f64;
    let df = d as f64;
    let mut log_inner = 0.5 * factorial(n as u64).ln();
    for j in 1..n {
        let e = ((j as f64 - nf) * df)
            / (nf * ((j * d / n) as f64 + 1.0) - (j * d) as f64);
        log_inner += e * c1.ln();
    }
    nf.ln() * nf * (df - nf * a_prime) / 2.0 + (df - (nf - 1.0) * a_prime) * log_inner
}

fn log_c2_via_c1j(n: usize, d: usize, a_prime: f64, c1j: &[f64]) -> f64 {
    // Equivalent closed form: the √(j+1) factors collapse against (n!)^{1/2},
    // leaving n^{n(d-na')/2} (Π c_{1,j})^{-(d-(n-1)a')}.
    let nf = n as f64;
    let df = d as f64;
    let log_prod: f64 = c1j.iter().map(|c| c.ln()).sum();
    nf.ln() * nf * (df - nf * a_prime) / 2.0 - (df - (nf - 1.0) * a_prime) * log_prod
}

/// Populate the table per the displayed formulas.
pub fn constants(n: usize, d: usize, a_prime: f64) -> Result<ConstantTable> {
    if n < 2 || d < n {
        return Err(Error::OutOfRange("(n, d)", format!("({n}, {d})")));
    }
    if !(1.0 - 1e-12..=d as f64 / n as f64 + 1e-12).contains(&a_prime) {
        return Err(Error::OutOfRange("a_prime", format!("{a_prime}")));
    }
    let nf = n as f64;
    let df = d as f64;
    let c1 = (df / nf).powi(n as i32) / binomial(d as u64, n as u64);
    let c1j: Vec<f64> = (1..n)
        .map(|j| c1.powf(ConstantTable::c1_exponent(n, d, j)) / ((j as f64 + 1.0).sqrt()))
        .collect();
    let log_c2 = log_c2_literal(n, d, a_prime, c1);
    let log_check = log_c2_via_c1j(n, d, a_prime, &c1j);
    debug_assert!(
        (log_c2 - log_check).abs() <= 1e-12 * log_c2.abs().max(1.0),
        "two codings of c2 disagree: exp({log_c2}) vs exp({log_check})"
    );
    let c2 = log_c2.exp();
    let c3 = 1f64.max(c2.powf(1.0 / a_prime));
    let common = binomial(d as u64, n as u64)
        * c3
        * nf.powf(nf / 2.0)
        * factorial(n as u64).powi(3)
        * nf.powi(3)
        * df.powf(nf - 2.0);
    let c4 = common * 2f64.powi(n as i32);
    let c5 = common * 3f64.powi(n as i32) * 2f64.powf(nf * (nf - 1.0));
    // c6 = 3^n 2^{n(n-1)/2} n! + c5 Σ (l+1)^{n-2} e^{-ln/d}
    let mut series = 0.0;
    let mut l = 0u32;
    loop {
        let term = ((l + 1) as f64).powf(nf - 2.0) * (-(l as f64) * nf / df).exp();
        series += term;
        l += 1;
        if term < 1e-18 * series.max(1.0) || l > 100_000 {
            break;
        }
    }
    let c6 = 3f64.powi(n as i32) * 2f64.powf(nf * (nf - 1.0) / 2.0) * factorial(n as u64)
        + c5 * series;
    let c7 = nf.powf(-1.5) / factorial(n as u64).powi(2);
    let c8 = nf.powf(nf + 0.5);
    Ok(ConstantTable { n, d, a_prime, c1, c1j, c2, c3, c4, c5, c6, c7, c8 })
}

/// Outcome of the recursive factor selection: n linearly independent factor
/// indices ordered by |L(x)|, plus the exclusion sets S₁..S_{n−1}.
#[derive(Clone, Debug, Serialize)]
pub struct FactorSelection {
    pub indices: Vec<usize>,
    pub exclusions: Vec<Vec<usize>>,
}

/// The constructive selection from the fundamental inequality's proof:
/// i₁ minimizes |L̂_i(x)|; S_j collects indices whose wedge ratio against
/// the chosen tuple is strictly below c_{1,j}; i_{j+1} minimizes over the
/// complement. Factor vectors are unit-normalized internally; ties break
/// to the lowest index.
pub fn select_factors(
    form: &DecomposableForm,
    x: &[f64],
    table: &ConstantTable,
) -> Result<FactorSelection> {
    let d = form.degree();
    let n = form.n();
    if x.len() != n {
        return Err(Error::Parse("point dimension mismatch".into()));
    }
    let unit = form.unit_factor_vectors();
    let top = unit_top_rank(&unit, n);
    if top.len() < n || linalg::wedge_norm_sqr(&top) <= 1e-20 {
        return Err(Error::RankDeficient(
            "factor vectors do not span R^n".into(),
        ));
    }
    let values: Vec<f64> = form
        .factors()
        .iter()
        .map(|f| f.eval(x).norm() / f.norm())
        .collect();

    let mut indices: Vec<usize> = Vec::with_capacity(n);
    let mut exclusions: Vec<Vec<usize>> = Vec::new();
    // The recursion excludes exactly S_{j-1} at step j (the previously
    // selected indices always land in it, so no index repeats).
    let mut prev_s: Vec<bool> = vec![false; d];

    for j in 0..n {
        let mut pick: Option<usize> = None;
        for i in 0..d {
            if prev_s[i] {
                continue;
            }
            match pick {
                None => pick = Some(i),
                Some(p) if values[i] < values[p] => pick = Some(i),
                _ => {}
            }
        }
        let i_j = pick.ok_or_else(|| {
            Error::SelectionExhausted(format!(
                "no index left at step {} (V(F) infinite or degenerate input)",
                j + 1
            ))
        })?;
        indices.push(i_j);
        if j + 1 == n {
            break;
        }
        // S_j: wedge ratio against the selected tuple strictly below c_{1,j}
        let chosen: Vec<Vec<Complex64>> = indices.iter().map(|&i| unit[i].clone()).collect();
        let base = wedge_norm(&chosen);
        let threshold = table.c1j(j + 1);
        let mut s_j: Vec<usize> = Vec::new();
        prev_s = vec![false; d];
        for (l, ul) in unit.iter().enumerate() {
            let mut tuple = chosen.clone();
            tuple.push(ul.clone());
            let ratio = wedge_norm(&tuple) / base;
            if ratio < threshold {
                s_j.push(l);
                prev_s[l] = true;
            }
        }
        exclusions.push(s_j);
    }
    Ok(FactorSelection { indices, exclusions })
}

fn unit_top_rank(unit: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    // Greedy pick of up to n vectors for the span test.
    let mut picked: Vec<Vec<Complex64>> = Vec::new();
    for v in unit {
        if picked.len() == n {
            break;
        }
        let mut cand = picked.clone();
        cand.push(v.clone());
        if linalg::wedge_norm_sqr(&cand) > 1e-24 {
            picked = cand;
        }
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use num_complex::Complex64;

    fn cv(parts: &[(f64, f64)]) -> Vec<Complex64> {
        parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    }

    #[test]
    fn wedge_norm_examples() {
        assert!((wedge_norm(&[cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (1.0, 0.0)])]) - 1.0).abs() < 1e-12);
        assert!(wedge_norm(&[cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(1.0, 0.0), (0.0, 0.0)])]) < 1e-9);
        // [(1,i),(1,-i)]: Gram [[2,0],[0,2]], det 4
        let w = wedge_norm(&[cv(&[(1.0, 0.0), (0.0, 1.0)]), cv(&[(1.0, 0.0), (0.0, -1.0)])]);
        assert!((w - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constants_n2_d3() {
        let t = constants(2, 3, 1.0).unwrap();
        assert!((t.c1 - 0.75).abs() < 1e-15);
        assert!(t.c1 <= 1.0 && t.c1 > 0.0);
        assert!((t.c7 - 2f64.powf(-1.5) / 4.0).abs() < 1e-15);
        assert!((t.c8 - 2f64.powf(2.5)).abs() < 1e-15);
    }

    #[test]
    fn constants_n2_d2() {
        let t = constants(2, 2, 1.0).unwrap();
        assert!((t.c1 - 1.0).abs() < 1e-15);
        // exponent (2-1)*2 / (2*(1+1)-2) = 1, so c_{1,1} = 1/sqrt(2)
        assert!((t.c1j(1) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn c1_at_most_one_exhaustive() {
        for n in 2..=12usize {
            for d in n..=12usize {
                let t = constants(n, d, 1.0).unwrap();
                assert!(t.c1 <= 1.0 + 1e-12, "c1 = {} at ({n},{d})", t.c1);
                assert!(t.c1 > 0.0);
            }
        }
    }

    #[test]
    fn two_codings_of_c2_agree() {
        for n in 2..=4usize {
            for d in n..=8usize {
                let top = d as f64 / n as f64;
                for ap in [1.0, 1.0 + (top - 1.0) / 2.0, top] {
                    let t = constants(n, d, ap).unwrap();
                    let other = log_c2_via_c1j(n, d, ap, &t.c1j).exp();
                    assert!(
                        (t.c2 - other).abs() <= 1e-10 * t.c2.abs().max(1.0),
                        "n={n} d={d} a'={ap}: {} vs {}",
                        t.c2,
                        other
                    );
                }
            }
        }
    }

    #[test]
    fn select_on_circle() {
        let f = families::circle();
        let t = constants(2, 2, 1.0).unwrap();
        let sel = select_factors(&f, &[1.0, 0.0], &t).unwrap();
        assert_eq!(sel.indices.len(), 2);
        assert_ne!(sel.indices[0], sel.indices[1]);
        // both normalized factor values have magnitude 1/sqrt(2) at (1,0);
        // the wedge of the normalized pair is 1
        let unit = f.unit_factor_vectors();
        let w = wedge_norm(&[unit[sel.indices[0]].clone(), unit[sel.indices[1]].clone()]);
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn select_rejects_degenerate() {
        // all factors proportional: (X+Y) twice
        let f = DecomposableForm::from_factor_vectors(
            2,
            vec![cv(&[(1.0, 0.0), (1.0, 0.0)]), cv(&[(1.0, 0.0), (1.0, 0.0)])],
            1.0,
        )
        .unwrap();
        let t = constants(2, 2, 1.0).unwrap();
        assert!(select_factors(&f, &[1.0, 0.0], &t).is_err());
    }

    #[test]
    fn selected_tuple_wedge_lower_bound() {
        // the chain of the proof: wedge of the selected tuple >= prod c_{1,j}
        let f = families::ellipse_product();
        let t = constants(2, 4, 2.0).unwrap();
        let unit = f.unit_factor_vectors();
        for &x in &[[1.0, 1.0], [0.3, -0.9], [2.0, 0.1]] {
            let sel = select_factors(&f, &x, &t).unwrap();
            let tuple: Vec<_> = sel.indices.iter().map(|&i| unit[i].clone()).collect();
            let w = wedge_norm(&tuple);
            let bound: f64 = t.c1j.iter().product();
            assert!(w >= bound - 1e-9, "wedge {w} < bound {bound}");
        }
    }
}
