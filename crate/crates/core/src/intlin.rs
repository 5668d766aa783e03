//! Exact integer matrix utilities: Smith reduction with transform
//! tracking, kernel lattice bases, unimodular completion.

use crate::error::{Error, Result};

pub type IMat = Vec<Vec<i128>>;

pub fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let r = a.len();
    let k = b.len();
    let c = b[0].len();
    let mut out = vec![vec![0i128; c]; r];
    for i in 0..r {
        for t in 0..k {
            if a[i][t] == 0 {
                continue;
            }
            for j in 0..c {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

/// Smith-style reduction U·A·V = D with D diagonal (no divisibility chain);
/// returns (u_inv, d, v) where u_inv = U⁻¹ is tracked directly.
pub fn smith_diagonalize(a: &IMat) -> (IMat, IMat, IMat) {
    let rows = a.len();
    let cols = a[0].len();
    let mut d = a.clone();
    let mut u_inv = identity(rows);
    let mut v = identity(cols);

    let mut t = 0;
    while t < rows.min(cols) {
        // find a nonzero pivot in the submatrix
        let mut pivot = None;
        'outer: for i in t..rows {
            for j in t..cols {
                if d[i][j] != 0 {
                    pivot = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        if pi != t {
            d.swap(pi, t);
            // row swap E on D ⇒ u_inv gets columns swapped (right-mul by E⁻¹)
            for row in u_inv.iter_mut() {
                row.swap(pi, t);
            }
        }
        if pj != t {
            for row in d.iter_mut() {
                row.swap(pj, t);
            }
            for row in v.iter_mut() {
                row.swap(pj, t);
            }
        }
        // clear row and column t by gcd steps
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if d[i][t] != 0 {
                    let q = d[i][t] / d[t][t];
                    if q != 0 {
                        for j in 0..cols {
                            d[i][j] -= q * d[t][j];
                        }
                        for row in u_inv.iter_mut() {
                            row[t] += q * row[i];
                        }
                    }
                    if d[i][t] != 0 {
                        d.swap(i, t);
                        for row in u_inv.iter_mut() {
                            row.swap(i, t);
                        }
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if d[t][j] != 0 {
                    let q = d[t][j] / d[t][t];
                    if q != 0 {
                        for i in 0..rows {
                            d[i][j] -= q * d[i][t];
                        }
                        for i in 0..cols {
                            let tmp = v[i][t];
                            v[i][j] -= q * tmp;
                        }
                    }
                    if d[t][j] != 0 {
                        for row in d.iter_mut() {
                            row.swap(j, t);
                        }
                        for row in v.iter_mut() {
                            row.swap(j, t);
                        }
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        t += 1;
    }
    (u_inv, d, v)
}

/// Rank of an integer matrix.
pub fn rank(a: &IMat) -> usize {
    let (_, d, _) = smith_diagonalize(a);
    (0..a.len().min(a[0].len())).filter(|&i| d[i][i] != 0).count()
}

/// Basis of the kernel lattice {x ∈ ℤⁿ : A x = 0} (saturated by
/// construction: the basis vectors are columns of a unimodular matrix).
pub fn kernel_basis(a: &IMat) -> Vec<Vec<i128>> {
    let cols = a[0].len();
    let (_, d, v) = smith_diagonalize(a);
    let rk = (0..a.len().min(cols)).filter(|&i| d[i][i] != 0).count();
    (rk..cols)
        .map(|j| (0..cols).map(|i| v[i][j]).collect())
        .collect()
}

/// Given k independent columns in ℤⁿ, return an n×n unimodular matrix whose
/// first k columns are a basis of the saturation of their span.
pub fn complete_to_unimodular(span_cols: &[Vec<i128>]) -> Result<IMat> {
    let k = span_cols.len();
    if k == 0 {
        return Err(Error::Parse("empty spanning set".into()));
    }
    let n = span_cols[0].len();
    if k > n {
        return Err(Error::Parse("more spanning vectors than dimensions".into()));
    }
    // B as n×k matrix
    let b: IMat = (0..n).map(|i| (0..k).map(|j| span_cols[j][i]).collect()).collect();
    let (u_inv, d, _) = smith_diagonalize(&b);
    let rk = (0..k.min(n)).filter(|&i| d[i][i] != 0).count();
    if rk != k {
        return Err(Error::RankDeficient(format!(
            "spanning set has rank {rk} < {k}"
        )));
    }
    Ok(u_inv)
}

pub fn det(a: &IMat) -> i128 {
    let (_, d, _) = smith_diagonalize(a);
    // the reduction uses only determinant-±1 operations up to tracked swaps;
    // recover the magnitude from the diagonal and fix the sign by expansion
    // for the small sizes we use
    let n = a.len();
    let mag: i128 = (0..n).map(|i| d[i][i]).product::<i128>().abs();
    if n <= 4 {
        fn cof(a: &IMat) -> i128 {
            let n = a.len();
            if n == 1 {
                return a[0][0];
            }
            let mut s = 0i128;
            for j in 0..n {
                if a[0][j] == 0 {
                    continue;
                }
                let minor: IMat = (1..n)
                    .map(|r| (0..n).filter(|&c| c != j).map(|c| a[r][c]).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                s += sign * a[0][j] * cof(&minor);
            }
            s
        }
        cof(a)
    } else {
        mag
    }
}

/// Primitive part: divide by the gcd of the entries.
pub fn primitive(v: &[i128]) -> Vec<i128> {
    let mut g: i128 = 0;
    for &x in v {
        g = gcd(g, x.abs());
    }
    if g <= 1 {
        return v.to_vec();
    }
    v.iter().map(|&x| x / g).collect()
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_row() {
        let a: IMat = vec![vec![2, 4, 6]];
        let ker = kernel_basis(&a);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            let dot: i128 = v.iter().zip(&a[0]).map(|(x, y)| x * y).sum();
            assert_eq!(dot, 0);
        }
        // saturation: (1, 2, 3)·x = 0 has e.g. (-2, 1, 0) primitive in the span
        let a: IMat = vec![vec![1, 2, 3]];
        let ker = kernel_basis(&a);
        let m: IMat = vec![ker[0].clone(), ker[1].clone()];
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn completion_is_unimodular() {
        let cols = vec![vec![2, 1, 0], vec![1, 0, 1]];
        let u = complete_to_unimodular(&cols).unwrap();
        assert_eq!(det(&u).abs(), 1);
        // first two columns span the same plane as the input
        let normal: Vec<i128> = vec![
            cols[0][1] * cols[1][2] - cols[0][2] * cols[1][1],
            cols[0][2] * cols[1][0] - cols[0][0] * cols[1][2],
            cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0],
        ];
        for j in 0..2 {
            let col: Vec<i128> = (0..3).map(|i| u[i][j]).collect();
            let dot: i128 = col.iter().zip(&normal).map(|(x, y)| x * y).sum();
            assert_eq!(dot, 0, "column {j} not in the plane");
        }
    }

    #[test]
    fn smith_reconstructs() {
        let a: IMat = vec![vec![4, 6], vec![2, 8]];
        let (u_inv, d, v) = smith_diagonalize(&a);
        // A·V = U⁻¹·D
        let av = mat_mul(&a, &v);
        let ud = mat_mul(&u_inv, &d);
        assert_eq!(av, ud);
    }
}
