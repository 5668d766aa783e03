//! Decomposable forms: a positive scale times a product of linear factors
//! over ℂ, closed under conjugation so that real evaluations are real.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cnorm, Matrix};
use crate::roots;

pub const EVAL_REL_TOL: f64 = 1e-9;
const PAIRING_TOL: f64 = 1e-9;
const INTEGRAL_SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    Real,
    PairLead,
    PairTrail,
}

/// One linear factor L(x) = Σ cᵢ·xᵢ of a decomposable form.
#[derive(Clone, Debug)]
pub struct LinearFactor {
    pub coeffs: Vec<Complex64>,
    pub kind: FactorKind,
    /// Index of the conjugate partner within the owning form (self for real).
    pub pair_index: usize,
}

impl LinearFactor {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.coeffs.iter().zip(x).map(|(c, &v)| c * v).sum()
    }

    pub fn norm(&self) -> f64 {
        cnorm(&self.coeffs)
    }

    pub fn is_real(&self) -> bool {
        self.kind == FactorKind::Real
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    pub fn imag_part(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.im).collect()
    }
}

/// Real invertible change of variables with its determinant tracked.
#[derive(Clone, Debug)]
pub struct Transform {
    mat: Matrix,
    det: f64,
}

impl Transform {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows))
    }

    pub fn from_matrix(mat: Matrix) -> Result<Self> {
        let det = mat.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularTransform(det));
        }
        Ok(Transform { mat, det })
    }

    pub fn identity(n: usize) -> Self {
        Transform { mat: Matrix::identity(n), det: 1.0 }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut m = Matrix::zeros(n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        Self::from_matrix(m)
    }

    pub fn n(&self) -> usize {
        self.mat.n()
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.mat.rows()
    }

    pub fn inverse(&self) -> Transform {
        let inv = self.mat.inverse().expect("transform is invertible by construction");
        let det = 1.0 / self.det;
        Transform { mat: inv, det }
    }

    pub fn mul(&self, other: &Transform) -> Transform {
        let mat = self.mat.mul(&other.mat);
        let det = mat.det();
        Transform { mat, det }
    }

    /// T x for a column vector x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mat.mul_vec(x)
    }

    /// Rescale so that |det| = 1 exactly up to rounding.
    pub fn renormalized_det1(&self) -> Transform {
        let n = self.n();
        let s = self.det.abs().powf(1.0 / n as f64);
        let m = self.mat.scaled(1.0 / s);
        let det = m.det();
        Transform { mat: m, det }
    }

    /// Integer entries, if the matrix is (numerically) integral.
    pub fn integer_entries(&self) -> Option<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        for row in self.mat.rows() {
            let mut r = Vec::new();
            for v in row {
                let k = v.round();
                if (v - k).abs() > 1e-9 || k.abs() > 9e15 {
                    return None;
                }
                r.push(k as i64);
            }
            out.push(r);
        }
        Some(out)
    }

    pub fn from_integer_columns(cols: &[Vec<i64>]) -> Result<Self> {
        let n = cols.len();
        let mut m = Matrix::zeros(n);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Parse("ragged column list".into()));
            }
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v as f64);
            }
        }
        Self::from_matrix(m)
    }
}

/// Expanded real coefficients keyed by exponent multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs {
    pub n: usize,
    pub degree: u32,
    pub coeffs: BTreeMap<Vec<u32>, f64>,
}

impl PolyCoeffs {
    pub fn new(n: usize, degree: u32, coeffs: BTreeMap<Vec<u32>, f64>) -> Result<Self> {
        for k in coeffs.keys() {
            if k.len() != n || k.iter().sum::<u32>() != degree {
                return Err(Error::NonHomogeneous);
            }
        }
        Ok(PolyCoeffs { n, degree, coeffs })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                c * k
                    .iter()
                    .zip(x)
                    .map(|(&a, &v)| v.powi(a as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// Exact integer expansion, used by the lattice counting paths.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerPoly {
    pub n: usize,
    pub degree: u32,
    pub coeffs: BTreeMap<Vec<u32>, i128>,
}

impl IntegerPoly {
    pub fn new(n: usize, degree: u32, coeffs: BTreeMap<Vec<u32>, i128>) -> Result<Self> {
        for (k, &c) in coeffs.iter() {
            if k.len() != n || k.iter().sum::<u32>() != degree {
                return Err(Error::NonHomogeneous);
            }
            let _ = c;
        }
        Ok(IntegerPoly { n, degree, coeffs })
    }

    pub fn eval(&self, x: &[i128]) -> Result<i128> {
        let mut total: i128 = 0;
        for (k, &c) in self.coeffs.iter() {
            let mut term = c;
            for (&a, &v) in k.iter().zip(x) {
                for _ in 0..a {
                    term = term.checked_mul(v).ok_or(Error::Overflow)?;
                }
            }
            total = total.checked_add(term).ok_or(Error::Overflow)?;
        }
        Ok(total)
    }

    pub fn to_poly(&self) -> PolyCoeffs {
        PolyCoeffs {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(k, &c)| (k.clone(), c as f64)).collect(),
        }
    }

    /// Exact substitution x_i = Σ_j cols_ji · y_j. The result is the
    /// expansion in the k = cols.len() new variables.
    pub fn substitute_linear(&self, cols: &[Vec<i64>]) -> Result<IntegerPoly> {
        let k = cols.len();
        type Sparse = BTreeMap<Vec<u32>, i128>;
        let mul = |a: &Sparse, b: &Sparse| -> Result<Sparse> {
            let mut out = Sparse::new();
            for (ka, va) in a {
                for (kb, vb) in b {
                    let key: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                    let prod = va.checked_mul(*vb).ok_or(Error::Overflow)?;
                    let e = out.entry(key).or_insert(0);
                    *e = e.checked_add(prod).ok_or(Error::Overflow)?;
                }
            }
            out.retain(|_, v| *v != 0);
            Ok(out)
        };
        let mut acc = Sparse::new();
        for (mono, &c) in self.coeffs.iter() {
            let mut term = Sparse::new();
            term.insert(vec![0u32; k], c);
            for (i, &a) in mono.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                // linear form for x_i in the new variables
                let mut lin = Sparse::new();
                for j in 0..k {
                    if cols[j][i] != 0 {
                        let mut key = vec![0u32; k];
                        key[j] = 1;
                        lin.insert(key, cols[j][i] as i128);
                    }
                }
                for _ in 0..a {
                    term = mul(&term, &lin)?;
                }
            }
            for (key, v) in term {
                let e = acc.entry(key).or_insert(0);
                *e = e.checked_add(v).ok_or(Error::Overflow)?;
            }
        }
        acc.retain(|_, v| *v != 0);
        IntegerPoly::new(k, self.degree, acc)
    }
}

/// Zero set of |F| on the unit sphere, from the factor structure.
#[derive(Clone, Debug)]
pub enum SphereZero {
    /// Isolated zero direction (its antipode is one too). `order` counts
    /// factors vanishing there with multiplicity.
    Point { dir: Vec<f64>, order: u32 },
    /// Great circle of zeros (n = 3), given by its unit normal.
    Circle { normal: Vec<f64>, order: u32 },
}

/// Degree-d form in n variables as scale · ∏ L_i(x).
#[derive(Clone, Debug)]
pub struct DecomposableForm {
    n: usize,
    factors: Vec<LinearFactor>,
    scale: f64,
    integral: Option<IntegerPoly>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap() {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

impl DecomposableForm {
    /// Build from raw coefficient vectors. Factors are conjugate-paired,
    /// canonically ordered (real factors first, pairs adjacent) and the
    /// integer expansion is detected.
    pub fn from_factor_vectors(
        n: usize,
        vectors: Vec<Vec<Complex64>>,
        scale: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parse("variable count must be at least 1".into()));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidScale(scale));
        }
        if vectors.is_empty() {
            return Err(Error::Parse("form must have at least one factor".into()));
        }
        let mut cleaned: Vec<Vec<Complex64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != n {
                return Err(Error::Parse("factor length does not match n".into()));
            }
            let nrm = cnorm(&v);
            if nrm == 0.0 {
                return Err(Error::ZeroFactor);
            }
            // Snap numerically-real factors onto the real axis.
            let im_mag = v.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
            let cleaned_v = if im_mag <= 1e-12 * nrm {
                v.iter().map(|c| Complex64::new(c.re, 0.0)).collect()
            } else {
                v
            };
            cleaned.push(cleaned_v);
        }

        let mut reals: Vec<Vec<Complex64>> = Vec::new();
        let mut complexes: Vec<Vec<Complex64>> = Vec::new();
        for v in cleaned {
            if v.iter().all(|c| c.im == 0.0) {
                reals.push(v);
            } else {
                complexes.push(v);
            }
        }

        // Greedy conjugate matching among the complex factors.
        let mut used = vec![false; complexes.len()];
        let mut pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::new();
        for i in 0..complexes.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let conj_i: Vec<Complex64> = complexes[i].iter().map(|c| c.conj()).collect();
            let mut partner: Option<usize> = None;
            let mut best = f64::INFINITY;
            for (j, cand) in complexes.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let dist: f64 = cand
                    .iter()
                    .zip(&conj_i)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if dist < best {
                    best = dist;
                    partner = Some(j);
                }
            }
            let scale_ref = cnorm(&complexes[i]);
            match partner {
                Some(j) if best <= PAIRING_TOL * scale_ref.max(1.0) => {
                    used[j] = true;
                    // enforce exact conjugacy
                    pairs.push((complexes[i].clone(), conj_i));
                }
                _ => {
                    return Err(Error::PairingViolated(format!(
                        "complex factor {:?} has no conjugate partner",
                        complexes[i]
                    )))
                }
            }
        }

        // Canonical order: real factors lexicographic, then pairs by their
        // lead (first nonzero imaginary coordinate positive).
        reals.sort_by(|a, b| lex_cmp(&a.iter().map(|c| c.re).collect::<Vec<_>>(),
                                     &b.iter().map(|c| c.re).collect::<Vec<_>>()));
        let mut keyed_pairs: Vec<(Vec<f64>, Vec<Complex64>, Vec<Complex64>)> = pairs
            .into_iter()
            .map(|(a, b)| {
                let lead_is_a = a
                    .iter()
                    .find(|c| c.im != 0.0)
                    .map(|c| c.im > 0.0)
                    .unwrap_or(true);
                let (lead, trail) = if lead_is_a { (a, b) } else { (b, a) };
                let mut key: Vec<f64> = lead.iter().map(|c| c.re).collect();
                key.extend(lead.iter().map(|c| c.im));
                (key, lead, trail)
            })
            .collect();
        keyed_pairs.sort_by(|x, y| lex_cmp(&x.0, &y.0));

        let mut factors: Vec<LinearFactor> = Vec::new();
        for v in reals {
            let idx = factors.len();
            factors.push(LinearFactor { coeffs: v, kind: FactorKind::Real, pair_index: idx });
        }
        for (_, lead, trail) in keyed_pairs {
            let i = factors.len();
            factors.push(LinearFactor { coeffs: lead, kind: FactorKind::PairLead, pair_index: i + 1 });
            factors.push(LinearFactor { coeffs: trail, kind: FactorKind::PairTrail, pair_index: i });
        }

        let mut form = DecomposableForm { n, factors, scale, integral: None };
        form.integral = form.detect_integral();
        Ok(form)
    }

    /// Recover the factorization of an expanded binary form. Real roots give
    /// real factors, complex roots conjugate pairs, the root at infinity
    /// gives Y factors; the leading coefficient magnitude goes to `scale`.
    pub fn from_binary_coeffs(p: &PolyCoeffs) -> Result<Self> {
        if p.n != 2 {
            return Err(Error::Unsupported(
                "expanded input is only factorable for n = 2; supply factors for n >= 3".into(),
            ));
        }
        let d = p.degree as usize;
        if p.coeffs.is_empty() {
            return Err(Error::ZeroFactor);
        }
        // q(x) = p(x, 1)
        let mut q = vec![0.0f64; d + 1];
        for (k, &c) in p.coeffs.iter() {
            q[k[0] as usize] = c;
        }
        let deg_x = (0..=d).rev().find(|&i| q[i] != 0.0).ok_or(Error::ZeroFactor)?;
        let lead = q[deg_x];
        let roots = if deg_x > 0 {
            roots::real_poly_roots(&q[..=deg_x])
        } else {
            Vec::new()
        };

        let mut vectors: Vec<Vec<Complex64>> = Vec::new();
        for r in &roots {
            vectors.push(vec![Complex64::new(1.0, 0.0), -r]);
        }
        for _ in 0..(d - deg_x) {
            vectors.push(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        }
        if lead < 0.0 {
            // A real factor must carry the sign; conjugate pairs cannot.
            let slot = vectors.iter_mut().find(|v| v.iter().all(|c| c.im == 0.0));
            match slot {
                Some(v) => {
                    for c in v.iter_mut() {
                        *c = -*c;
                    }
                }
                None => {
                    return Err(Error::Unsupported(
                        "negative definite binary form; factor -F instead (all paper \
                         quantities depend only on |F|)"
                            .into(),
                    ))
                }
            }
        }
        let form = DecomposableForm::from_factor_vectors(2, vectors, lead.abs())?;

        // Residual check: the product must re-expand to the input.
        let expanded = form.expand();
        let max_c = p.coeffs.values().fold(0.0f64, |m, c| m.max(c.abs()));
        for (k, &c) in p.coeffs.iter() {
            let got = expanded.coeffs.get(k).copied().unwrap_or(0.0);
            if (got - c).abs() > 1e-8 * max_c.max(1.0) {
                return Err(Error::IllConditioned(format!(
                    "re-expansion residual {:.2e} at {:?}",
                    (got - c).abs(),
                    k
                )));
            }
        }
        Ok(form)
    }

    /// Expanded integer input (n = 2). The exact integer expansion is kept
    /// verbatim so integer evaluation round-trips exactly.
    pub fn from_integer_coeffs(n: usize, degree: u32, coeffs: BTreeMap<Vec<u32>, i128>) -> Result<Self> {
        if n != 2 {
            return Err(Error::Unsupported(
                "expanded input is only factorable for n = 2; supply factors for n >= 3".into(),
            ));
        }
        let ip = IntegerPoly::new(n, degree, coeffs)?;
        let mut form = Self::from_binary_coeffs(&ip.to_poly())?;
        form.integral = Some(ip);
        Ok(form)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn factors(&self) -> &[LinearFactor] {
        &self.factors
    }

    pub fn is_integral(&self) -> bool {
        self.integral.is_some()
    }

    pub fn integer_poly(&self) -> Option<&IntegerPoly> {
        self.integral.as_ref()
    }

    /// Attach an exactly-known integer expansion (restriction paths compute
    /// it by integer substitution rather than float snapping).
    pub(crate) fn set_integer_poly(&mut self, ip: IntegerPoly) {
        debug_assert_eq!(ip.n, self.n);
        self.integral = Some(ip);
    }

    /// Permutation of factor indices induced by complex conjugation.
    pub fn sigma(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.pair_index).collect()
    }

    /// Factor vectors with scale^{1/d} absorbed into each, so the plain
    /// product of these reproduces F.
    pub fn scaled_factor_vectors(&self) -> Vec<Vec<Complex64>> {
        let s = self.scale.powf(1.0 / self.degree() as f64);
        self.factors
            .iter()
            .map(|f| f.coeffs.iter().map(|c| c * s).collect())
            .collect()
    }

    pub fn unit_factor_vectors(&self) -> Vec<Vec<Complex64>> {
        self.factors
            .iter()
            .map(|f| {
                let nrm = f.norm();
                f.coeffs.iter().map(|c| c / nrm).collect()
            })
            .collect()
    }

    pub fn evaluate_complex(&self, x: &[f64]) -> Complex64 {
        let mut prod = Complex64::new(self.scale, 0.0);
        for f in &self.factors {
            prod *= f.eval(x);
        }
        prod
    }

    /// Signed value of F at a real point; the imaginary residue is checked
    /// against 1e-9 of the attainable magnitude and discarded.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let v = self.evaluate_complex(x);
        #[cfg(debug_assertions)]
        {
            let xn = crate::linalg::norm2(x);
            let bound: f64 = self.scale
                * self
                    .factors
                    .iter()
                    .map(|f| f.norm() * xn)
                    .product::<f64>();
            debug_assert!(
                v.im.abs() <= EVAL_REL_TOL * v.re.abs().max(bound.max(1e-300)),
                "imaginary residue {} too large (value {})",
                v.im,
                v.re
            );
        }
        v.re
    }

    /// F ∘ T, mapping each coefficient vector L ↦ L·T. Factor order and
    /// pairing are preserved positionally.
    pub fn compose(&self, t: &Transform) -> Result<DecomposableForm> {
        if t.n() != self.n {
            return Err(Error::Parse("transform dimension mismatch".into()));
        }
        if t.det() == 0.0 {
            return Err(Error::SingularTransform(0.0));
        }
        let trows = t.rows();
        let factors: Vec<LinearFactor> = self
            .factors
            .iter()
            .map(|f| {
                let coeffs: Vec<Complex64> = (0..self.n)
                    .map(|j| {
                        (0..self.n)
                            .map(|i| f.coeffs[i] * trows[i][j])
                            .sum::<Complex64>()
                    })
                    .collect();
                LinearFactor { coeffs, kind: f.kind, pair_index: f.pair_index }
            })
            .collect();
        let mut out = DecomposableForm { n: self.n, factors, scale: self.scale, integral: None };
        out.integral = match (&self.integral, t.integer_entries()) {
            (Some(ip), Some(int_rows)) => {
                // columns of T as substitution vectors
                let cols: Vec<Vec<i64>> = (0..self.n)
                    .map(|j| (0..self.n).map(|i| int_rows[i][j]).collect())
                    .collect();
                ip.substitute_linear(&cols).ok()
            }
            _ => out.detect_integral(),
        };
        Ok(out)
    }

    pub fn scale_by(&self, a: f64) -> Result<DecomposableForm> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidScale(a));
        }
        let mut out = self.clone();
        out.scale *= a;
        out.integral = out.detect_integral();
        Ok(out)
    }

    /// Expanded real coefficients.
    pub fn expand(&self) -> PolyCoeffs {
        let mut acc: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        acc.insert(vec![0u32; self.n], Complex64::new(self.scale, 0.0));
        for f in &self.factors {
            let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
            for (mono, coef) in &acc {
                for (j, c) in f.coeffs.iter().enumerate() {
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut key = mono.clone();
                    key[j] += 1;
                    *next.entry(key).or_insert(Complex64::new(0.0, 0.0)) += coef * c;
                }
            }
            acc = next;
        }
        let max_mag = acc.values().map(|c| c.norm()).fold(0.0f64, f64::max);
        let coeffs: BTreeMap<Vec<u32>, f64> = acc
            .into_iter()
            .filter_map(|(k, c)| {
                debug_assert!(c.im.abs() <= 1e-9 * max_mag.max(1e-300));
                if c.re == 0.0 {
                    None
                } else {
                    Some((k, c.re))
                }
            })
            .collect();
        PolyCoeffs { n: self.n, degree: self.degree() as u32, coeffs }
    }

    fn detect_integral(&self) -> Option<IntegerPoly> {
        let p = self.expand();
        let mut out = BTreeMap::new();
        for (k, &c) in p.coeffs.iter() {
            let snapped = c.round();
            if (c - snapped).abs() > INTEGRAL_SNAP_TOL * c.abs().max(1.0) || snapped.abs() > 9e30 {
                return None;
            }
            if snapped != 0.0 {
                out.insert(k.clone(), snapped as i128);
            }
        }
        if out.is_empty() {
            return None;
        }
        Some(IntegerPoly { n: self.n, degree: p.degree, coeffs: out })
    }

    /// Zero set of |F| on the unit sphere, grouped with total vanishing
    /// orders (n ≤ 3).
    pub fn sphere_zeros(&self) -> Result<Vec<SphereZero>> {
        if self.n > 3 {
            return Err(Error::Unsupported("sphere zero analysis only for n <= 3".into()));
        }
        let mut points: Vec<(Vec<f64>, u32)> = Vec::new();
        let mut circles: Vec<(Vec<f64>, u32)> = Vec::new();
        let canon = |mut v: Vec<f64>| -> Vec<f64> {
            let nrm = crate::linalg::norm2(&v);
            for e in v.iter_mut() {
                *e /= nrm;
            }
            if let Some(first) = v.iter().find(|e| e.abs() > 1e-12) {
                if *first < 0.0 {
                    for e in v.iter_mut() {
                        *e = -*e;
                    }
                }
            }
            v
        };
        let add = |list: &mut Vec<(Vec<f64>, u32)>, dir: Vec<f64>, w: u32| {
            let dir = canon(dir);
            for (d, order) in list.iter_mut() {
                let dot: f64 = d.iter().zip(&dir).map(|(a, b)| a * b).sum();
                if (dot.abs() - 1.0).abs() < 1e-9 {
                    *order += w;
                    return;
                }
            }
            list.push((dir, w));
        };
        for f in &self.factors {
            let re = f.real_part();
            let im = f.imag_part();
            let re_n = crate::linalg::norm2(&re);
            let im_n = crate::linalg::norm2(&im);
            match self.n {
                1 => {
                    // a linear form in one variable vanishes only at 0
                }
                2 => {
                    let parallel = (re[0] * im[1] - re[1] * im[0]).abs()
                        <= 1e-12 * (re_n * im_n).max(1e-300);
                    // real factor, or a complex factor whose real and
                    // imaginary parts share a kernel line
                    if im_n <= 1e-12 * re_n || (parallel && re_n > 0.0) {
                        add(&mut points, vec![-re[1], re[0]], 1);
                    } else if parallel {
                        add(&mut points, vec![-im[1], im[0]], 1);
                    }
                }
                3 => {
                    if im_n <= 1e-12 * re_n {
                        add(&mut circles, re.clone(), 1);
                    } else {
                        // common kernel of re and im parts
                        let cross = vec![
                            re[1] * im[2] - re[2] * im[1],
                            re[2] * im[0] - re[0] * im[2],
                            re[0] * im[1] - re[1] * im[0],
                        ];
                        let cn = crate::linalg::norm2(&cross);
                        if cn > 1e-12 * (re_n * im_n).max(1e-300) {
                            add(&mut points, cross, 1);
                        } else {
                            // degenerate pair acting like a real plane
                            let base = if re_n > 0.0 { re.clone() } else { im.clone() };
                            add(&mut circles, base, 1);
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        let mut out: Vec<SphereZero> = Vec::new();
        for (dir, order) in points {
            out.push(SphereZero::Point { dir, order });
        }
        for (normal, order) in circles {
            out.push(SphereZero::Circle { normal, order });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Form description document (the JSON interchange format)
// ---------------------------------------------------------------------------

/// JSON-compatible description: either an explicit factor list (complex
/// coefficients as [re, im] pairs) or expanded integer coefficients keyed
/// by comma-separated exponents ("3,0" for X³).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormDoc {
    pub n: usize,
    pub degree: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<BTreeMap<String, i128>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<bool>,
}

fn parse_exponent_key(key: &str, n: usize) -> Result<Vec<u32>> {
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != n {
        return Err(Error::Parse(format!(
            "exponent key '{key}' must have {n} comma-separated entries"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad exponent '{p}' in key '{key}'")))
        })
        .collect()
}

pub fn parse_form(doc: &FormDoc) -> Result<DecomposableForm> {
    if doc.n < 2 {
        return Err(Error::Parse("form documents need n >= 2".into()));
    }
    let scale = doc.scale.unwrap_or(1.0);
    let form = match (&doc.factors, &doc.coeffs) {
        (Some(factors), coeffs) => {
            if factors.len() != doc.degree as usize {
                return Err(Error::Parse(format!(
                    "declared degree {} but {} factors given",
                    doc.degree,
                    factors.len()
                )));
            }
            let vectors: Vec<Vec<Complex64>> = factors
                .iter()
                .map(|f| f.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect();
            let form = DecomposableForm::from_factor_vectors(doc.n, vectors, scale)?;
            // a coeffs block alongside factors is informational; verify it
            if let Some(declared) = coeffs {
                let ip = form.integer_poly().ok_or_else(|| {
                    Error::Parse("document declares integer coeffs but the factors do not expand to integers".into())
                })?;
                for (k, &c) in declared {
                    let key = parse_exponent_key(k, doc.n)?;
                    if ip.coeffs.get(&key).copied().unwrap_or(0) != c {
                        return Err(Error::Parse(format!(
                            "declared coefficient {c} at '{k}' disagrees with the factored expansion"
                        )));
                    }
                }
            }
            form
        }
        (None, Some(coeffs)) => {
            if scale != 1.0 {
                return Err(Error::Parse("scale applies to factor-list inputs only".into()));
            }
            let mut map = BTreeMap::new();
            for (k, &c) in coeffs {
                map.insert(parse_exponent_key(k, doc.n)?, c);
            }
            DecomposableForm::from_integer_coeffs(doc.n, doc.degree, map)?
        }
        _ => {
            return Err(Error::Parse(
                "document must supply exactly one of 'factors' or 'coeffs'".into(),
            ))
        }
    };
    if form.degree() != doc.degree as usize {
        return Err(Error::Parse(format!(
            "declared degree {} but form has degree {}",
            doc.degree,
            form.degree()
        )));
    }
    if doc.integral == Some(true) && !form.is_integral() {
        return Err(Error::Parse(
            "document claims an integral form but the expansion is not integer".into(),
        ));
    }
    Ok(form)
}

pub fn to_document(form: &DecomposableForm) -> FormDoc {
    FormDoc {
        n: form.n(),
        degree: form.degree() as u32,
        factors: Some(
            form.factors()
                .iter()
                .map(|f| f.coeffs.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        ),
        coeffs: form.integer_poly().map(|ip| {
            ip.coeffs
                .iter()
                .map(|(k, &c)| {
                    let key = k.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
                    (key, c)
                })
                .collect()
        }),
        scale: Some(form.scale()),
        integral: Some(form.is_integral()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> DecomposableForm {
        DecomposableForm::from_factor_vectors(
            2,
            vec![
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)],
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn circle_expands_to_x2_plus_y2() {
        let f = circle();
        let p = f.expand();
        assert_eq!(p.coeffs.len(), 2);
        assert!((p.coeffs[&vec![2, 0]] - 1.0).abs() < 1e-12);
        assert!((p.coeffs[&vec![0, 2]] - 1.0).abs() < 1e-12);
        assert!(f.is_integral());
        assert!((f.evaluate(&[3.0, 4.0]) - 25.0).abs() < 1e-9);
    }

    #[test]
    fn factor_binary_cubic() {
        // X^3 + 2 Y^3: one real root at -2^{1/3} and a conjugate pair
        let mut map = BTreeMap::new();
        map.insert(vec![3, 0], 1i128);
        map.insert(vec![0, 3], 2i128);
        let f = DecomposableForm::from_integer_coeffs(2, 3, map).unwrap();
        assert_eq!(f.degree(), 3);
        let reals = f.factors().iter().filter(|x| x.is_real()).count();
        assert_eq!(reals, 1);
        let real = f.factors().iter().find(|x| x.is_real()).unwrap();
        // factor (1, -r) with r = -2^{1/3}
        assert!((real.coeffs[1].re - 2f64.powf(1.0 / 3.0)).abs() < 1e-9);
        assert!((f.evaluate(&[1.0, 1.0]) - 3.0).abs() < 1e-9);
        // exact integer expansion kept verbatim
        let ip = f.integer_poly().unwrap();
        assert_eq!(ip.coeffs[&vec![3, 0]], 1);
        assert_eq!(ip.coeffs[&vec![0, 3]], 2);
    }

    #[test]
    fn factor_binary_x2_plus_xy() {
        // X^2 + XY = X(X+Y), two real factors
        let mut map = BTreeMap::new();
        map.insert(vec![2, 0], 1i128);
        map.insert(vec![1, 1], 1i128);
        let f = DecomposableForm::from_integer_coeffs(2, 2, map).unwrap();
        assert_eq!(f.factors().iter().filter(|x| x.is_real()).count(), 2);
        let p = f.expand();
        assert!((p.coeffs[&vec![2, 0]] - 1.0).abs() < 1e-9);
        assert!((p.coeffs[&vec![1, 1]] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn factor_binary_x2_minus_2y2() {
        let mut map = BTreeMap::new();
        map.insert(vec![2, 0], 1i128);
        map.insert(vec![0, 2], -2i128);
        let f = DecomposableForm::from_integer_coeffs(2, 2, map).unwrap();
        assert_eq!(f.factors().iter().filter(|x| x.is_real()).count(), 2);
        let r = 2f64.sqrt();
        let vals: Vec<f64> = f.factors().iter().map(|x| x.coeffs[1].re.abs()).collect();
        assert!(vals.iter().all(|v| (v - r).abs() < 1e-9));
    }

    #[test]
    fn compose_swap_fixes_xy() {
        let xy = DecomposableForm::from_factor_vectors(
            2,
            vec![
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            1.0,
        )
        .unwrap();
        let swap = Transform::new(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let g = xy.compose(&swap).unwrap();
        let p = g.expand();
        assert_eq!(p.coeffs.len(), 1);
        assert!((p.coeffs[&vec![1, 1]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compose_defining_identity() {
        let f = circle();
        let t = Transform::new(&[vec![2.0, 0.3], vec![-0.4, 0.6]]).unwrap();
        let g = f.compose(&t).unwrap();
        for &x in &[[0.3, -1.2], [2.0, 0.5], [-0.7, 0.1]] {
            let tx = t.apply(&x);
            assert!((g.evaluate(&x) - f.evaluate(&tx)).abs() < 1e-9 * f.evaluate(&tx).abs().max(1.0));
        }
    }

    #[test]
    fn nonhomogeneous_rejected() {
        let mut map = BTreeMap::new();
        map.insert(vec![2, 0], 1i128);
        map.insert(vec![0, 1], 1i128);
        assert!(IntegerPoly::new(2, 2, map).is_err());
    }

    #[test]
    fn zero_factor_rejected() {
        let res = DecomposableForm::from_factor_vectors(
            2,
            vec![vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]],
            1.0,
        );
        assert!(matches!(res, Err(Error::ZeroFactor)));
    }

    #[test]
    fn pairing_violation_rejected() {
        let res = DecomposableForm::from_factor_vectors(
            2,
            vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]],
            1.0,
        );
        assert!(matches!(res, Err(Error::PairingViolated(_))));
    }

    #[test]
    fn n3_expanded_input_rejected() {
        let doc = FormDoc {
            n: 3,
            degree: 2,
            factors: None,
            coeffs: Some([("2,0,0".to_string(), 1i128)].into_iter().collect()),
            scale: None,
            integral: None,
        };
        assert!(parse_form(&doc).is_err());
    }

    #[test]
    fn document_roundtrip() {
        let f = circle();
        let doc = to_document(&f);
        let g = parse_form(&doc).unwrap();
        assert!((g.evaluate(&[3.0, 4.0]) - 25.0).abs() < 1e-9);
        let json = serde_json::to_string(&doc).unwrap();
        let doc2: FormDoc = serde_json::from_str(&json).unwrap();
        let h = parse_form(&doc2).unwrap();
        assert!((h.evaluate(&[3.0, 4.0]) - 25.0).abs() < 1e-9);
    }

    #[test]
    fn substitution_exact() {
        let mut map = BTreeMap::new();
        map.insert(vec![2, 0], 1i128);
        map.insert(vec![0, 2], 1i128);
        let ip = IntegerPoly::new(2, 2, map).unwrap();
        // x = y1, y = -y1  ->  2 y1^2
        let sub = ip.substitute_linear(&[vec![1, -1]]).unwrap();
        assert_eq!(sub.coeffs[&vec![2]], 2);
    }
}
