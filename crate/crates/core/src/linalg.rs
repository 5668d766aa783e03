//! Small dense linear algebra: real square matrices sized for n ≤ 4 desk
//! problems, plus the complex vector helpers shared by the geometry code.

use num_complex::Complex64;

/// Row-major real square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    a: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        let mut m = Matrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let s = self.get(i, k);
                if s == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += s * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Row vector times matrix: y_j = Σ_i x_i A_ij.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|j| (0..self.n).map(|i| x[i] * self.get(i, j)).sum())
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix { n: self.n, a: self.a.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// LU with partial pivoting; returns (permuted LU data, pivots, sign) or
    /// None when numerically singular.
    fn lu(&self) -> Option<(Vec<f64>, Vec<usize>, f64)> {
        let n = self.n;
        let mut lu = self.a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Some((lu, piv, sign))
    }

    pub fn det(&self) -> f64 {
        match self.lu() {
            None => 0.0,
            Some((lu, _, sign)) => {
                let mut d = sign;
                for k in 0..self.n {
                    d *= lu[k * self.n + k];
                }
                d
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let (lu, piv, _) = self.lu()?;
        let mut x: Vec<f64> = piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= lu[i * n + j] * x[j];
            }
            x[i] /= lu[i * n + i];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Some(inv)
    }

    /// Cholesky factor L (lower triangular, A = L Lᵗ) of a symmetric
    /// positive definite matrix.
    pub fn cholesky(&self) -> Option<Matrix> {
        let n = self.n;
        let mut l = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l.set(i, i, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Some(l)
    }

    /// Inverse of an upper triangular matrix.
    pub fn inverse_upper_triangular(&self) -> Option<Matrix> {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        for j in (0..n).rev() {
            let d = self.get(j, j);
            if d == 0.0 {
                return None;
            }
            inv.set(j, j, 1.0 / d);
            for i in (0..j).rev() {
                let mut s = 0.0;
                for k in i + 1..=j {
                    s += self.get(i, k) * inv.get(k, j);
                }
                inv.set(i, j, -s / self.get(i, i));
            }
        }
        Some(inv)
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor series.
    pub fn expm(&self) -> Matrix {
        let n = self.n;
        let norm = self.frobenius();
        let k = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let b = self.scaled(1.0 / f64::powi(2.0, k as i32));
        let mut term = Matrix::identity(n);
        let mut sum = Matrix::identity(n);
        for j in 1..=30 {
            term = term.mul(&b).scaled(1.0 / j as f64);
            sum = sum.add(&term);
            if term.frobenius() < 1e-18 {
                break;
            }
        }
        let mut out = sum;
        for _ in 0..k {
            out = out.mul(&out);
        }
        out
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Hermitian inner product Σ aᵢ · conj(bᵢ).
pub fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Squared wedge norm ‖v₁∧⋯∧v_k‖² = det of the Gram matrix, evaluated by
/// modified Gram–Schmidt with full pivoting (stable for near-dependent
/// tuples; a cofactor expansion is not).
pub fn wedge_norm_sqr(vectors: &[Vec<Complex64>]) -> f64 {
    let k = vectors.len();
    if k == 0 {
        return 1.0;
    }
    let mut residual: Vec<Vec<Complex64>> = vectors.to_vec();
    let mut alive: Vec<usize> = (0..k).collect();
    let mut prod = 1.0f64;
    while let Some(pos) = alive
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let na = cnorm(&residual[*a.1]);
            let nb = cnorm(&residual[*b.1]);
            na.partial_cmp(&nb).unwrap()
        })
        .map(|(pos, _)| pos)
    {
        let idx = alive.swap_remove(pos);
        let nrm_sqr = residual[idx].iter().map(|z| z.norm_sqr()).sum::<f64>();
        prod *= nrm_sqr;
        if nrm_sqr == 0.0 {
            return 0.0;
        }
        let pivot = residual[idx].clone();
        for &j in &alive {
            let coef = hdot(&residual[j], &pivot) / nrm_sqr;
            for (r, p) in residual[j].iter_mut().zip(&pivot) {
                *r -= coef * p;
            }
        }
    }
    prod.max(0.0)
}
