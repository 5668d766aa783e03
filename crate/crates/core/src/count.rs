//! Exact integer-point counting for |F(x)| ≤ m, rational subspace
//! restriction, and the inclusion–exclusion union check.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{DecomposableForm, IntegerPoly};
use crate::intlin;
use crate::roots;
use crate::volume::sphere_min;

/// m as an exact nonnegative rational; boundary classification multiplies
/// through by the denominator so no float ever touches |F(x)| = m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RationalBound {
    pub num: i128,
    pub den: i128,
}

impl RationalBound {
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den <= 0 || num < 0 {
            return Err(Error::Parse(format!("bound {num}/{den} must be >= 0")));
        }
        let g = intlin::gcd(num, den).max(1);
        Ok(RationalBound { num: num / g, den: den / g })
    }

    pub fn from_str_radix(s: &str) -> Result<Self> {
        let parse = |t: &str| -> Result<i128> {
            t.trim()
                .parse::<i128>()
                .map_err(|_| Error::Parse(format!("bad rational '{s}'")))
        };
        match s.split_once('/') {
            Some((p, q)) => RationalBound::new(parse(p)?, parse(q)?),
            None => RationalBound::new(parse(s)?, 1),
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// den·|v| ≤ num
    fn contains(&self, v: i128) -> bool {
        match v.checked_mul(self.den) {
            Some(scaled) => scaled.abs() <= self.num,
            None => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    CertifiedSphereMin,
    UserBox,
    StabilizedGrowth,
}

#[derive(Clone, Copy, Debug)]
pub enum Strategy {
    /// Certified radius from the sphere minimum when positive, else error.
    Certified,
    /// Count inside [-B, B]^n.
    Box(i64),
    /// Geometrically growing boxes until two consecutive counts agree.
    Growth,
    /// Certified when possible, otherwise growth.
    Auto,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountResult {
    pub m: RationalBound,
    pub count: u64,
    /// Enumeration radius (certified) or box half-side.
    pub bound: f64,
    pub bound_kind: BoundKind,
    pub exhaustive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<Vec<Vec<i64>>>,
}

/// Coefficients of x ↦ F(x, fixed) as exact integers.
fn row_poly(ip: &IntegerPoly, fixed: &[i64]) -> Result<Vec<i128>> {
    let mut out = vec![0i128; ip.degree as usize + 1];
    for (k, &c) in ip.coeffs.iter() {
        let a = k[0] as usize;
        let mut term = c;
        for (idx, &e) in k.iter().enumerate().skip(1) {
            let v = fixed[idx - 1] as i128;
            for _ in 0..e {
                term = term.checked_mul(v).ok_or(Error::Overflow)?;
            }
        }
        out[a] = out[a].checked_add(term).ok_or(Error::Overflow)?;
    }
    Ok(out)
}

fn eval_row(poly: &[i128], x: i128) -> Result<i128> {
    let mut acc: i128 = 0;
    for &c in poly.iter().rev() {
        acc = acc.checked_mul(x).ok_or(Error::Overflow)?;
        acc = acc.checked_add(c).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// Count (and optionally list) integers x ∈ [lo, hi] with |P(x)| ≤ m, using
/// float root isolation of P ∓ m to skip long runs and exact integer
/// evaluation near every breakpoint and once per gap.
fn count_row(
    poly: &[i128],
    lo: i64,
    hi: i64,
    m: &RationalBound,
    mut on_hit: impl FnMut(i64),
) -> Result<u64> {
    if lo > hi {
        return Ok(0);
    }
    let deg = poly.iter().rposition(|&c| c != 0).unwrap_or(0);
    let full_scan = |on_hit: &mut dyn FnMut(i64)| -> Result<u64> {
        let mut cnt = 0;
        for x in lo..=hi {
            if m.contains(eval_row(poly, x as i128)?) {
                cnt += 1;
                on_hit(x);
            }
        }
        Ok(cnt)
    };
    if deg == 0 || (hi - lo) <= 64 {
        return full_scan(&mut on_hit);
    }

    // breakpoints: real roots of den·P(x) = ±num
    let mut breaks: Vec<f64> = Vec::new();
    for target in [m.num, -m.num] {
        let mut cf: Vec<f64> = poly.iter().map(|&c| c as f64 * m.den as f64).collect();
        cf[0] -= target as f64;
        for r in roots::real_roots(&cf) {
            if r >= lo as f64 - 2.0 && r <= hi as f64 + 2.0 {
                breaks.push(r);
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // guarded integers around the breakpoints, classified individually
    let mut guards: Vec<(i64, i64)> = Vec::new();
    for &r in &breaks {
        let a = (r - 2.0).floor() as i64;
        let b = (r + 2.0).ceil() as i64;
        let a = a.max(lo);
        let b = b.min(hi);
        if a > b {
            continue;
        }
        match guards.last_mut() {
            Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
            _ => guards.push((a, b)),
        }
    }

    let mut count = 0u64;
    let classify_gap = |a: i64, b: i64, count: &mut u64, on_hit: &mut dyn FnMut(i64)| -> Result<()> {
        // no breakpoint inside: membership is constant on the gap
        if a > b {
            return Ok(());
        }
        let sample = a + (b - a) / 2;
        if m.contains(eval_row(poly, sample as i128)?) {
            *count += (b - a + 1) as u64;
            for x in a..=b {
                on_hit(x);
            }
        }
        Ok(())
    };

    let mut cursor = lo;
    for &(ga, gb) in &guards {
        classify_gap(cursor, ga - 1, &mut count, &mut on_hit)?;
        for x in ga..=gb {
            if m.contains(eval_row(poly, x as i128)?) {
                count += 1;
                on_hit(x);
            }
        }
        cursor = gb + 1;
    }
    classify_gap(cursor, hi, &mut count, &mut on_hit)?;
    Ok(count)
}

fn count_in_box(
    ip: &IntegerPoly,
    m: &RationalBound,
    half: i64,
    list: bool,
) -> Result<(u64, Option<Vec<Vec<i64>>>)> {
    let n = ip.n;
    let mut total = 0u64;
    let mut sols: Vec<Vec<i64>> = Vec::new();
    match n {
        1 => {
            let poly: Vec<i128> = {
                let mut p = vec![0i128; ip.degree as usize + 1];
                for (k, &c) in ip.coeffs.iter() {
                    p[k[0] as usize] += c;
                }
                p
            };
            total += count_row(&poly, -half, half, m, |x| {
                if list {
                    sols.push(vec![x]);
                }
            })?;
        }
        2 => {
            for y in -half..=half {
                let poly = row_poly(ip, &[y])?;
                total += count_row(&poly, -half, half, m, |x| {
                    if list {
                        sols.push(vec![x, y]);
                    }
                })?;
            }
        }
        3 => {
            for y in -half..=half {
                for z in -half..=half {
                    let poly = row_poly(ip, &[y, z])?;
                    total += count_row(&poly, -half, half, m, |x| {
                        if list {
                            sols.push(vec![x, y, z]);
                        }
                    })?;
                }
            }
        }
        _ => {
            return Err(Error::Unsupported(
                "exact counting enumerates n <= 3 at desk scale".into(),
            ))
        }
    }
    Ok((total, if list { Some(sols) } else { None }))
}

/// Exact N_F(m) with a certified or user-supplied bound. The form must
/// carry an exact integer expansion. The origin is counted (|F(0)| = 0 ≤ m
/// always); asymptotics are unaffected.
pub fn count_exact(
    form: &DecomposableForm,
    m: &RationalBound,
    strategy: Strategy,
    list_solutions: bool,
) -> Result<CountResult> {
    let ip = form
        .integer_poly()
        .ok_or_else(|| Error::Precondition("count_exact needs an exact integer expansion".into()))?
        .clone();
    let n = form.n();
    let d = form.degree() as f64;

    let certified_radius = || -> Result<Option<f64>> {
        if n > 3 {
            return Ok(None);
        }
        let s = sphere_min(form)?;
        if s.zero_bracketed || s.mu <= 0.0 {
            return Ok(None);
        }
        let mu = s.mu * (1.0 - s.cert_slack);
        Ok(Some((m.as_f64() / mu).powf(1.0 / d) * (1.0 + 1e-12)))
    };

    match strategy {
        Strategy::Box(b) => {
            let (count, solutions) = count_in_box(&ip, m, b, list_solutions)?;
            Ok(CountResult {
                m: *m,
                count,
                bound: b as f64,
                bound_kind: BoundKind::UserBox,
                exhaustive: false,
                solutions,
            })
        }
        Strategy::Certified => {
            let r = certified_radius()?.ok_or_else(|| {
                Error::Precondition(
                    "sphere minimum is zero: no certified radius; supply a box".into(),
                )
            })?;
            let half = r.floor() as i64;
            let (count, solutions) = count_in_box(&ip, m, half, list_solutions)?;
            Ok(CountResult {
                m: *m,
                count,
                bound: r,
                bound_kind: BoundKind::CertifiedSphereMin,
                exhaustive: true,
                solutions,
            })
        }
        Strategy::Growth => {
            let mut half = 64i64.max((m.as_f64().powf(1.0 / d) * 4.0) as i64);
            let mut prev: Option<u64> = None;
            for _ in 0..12 {
                let (count, solutions) = count_in_box(&ip, m, half, list_solutions)?;
                if prev == Some(count) {
                    return Ok(CountResult {
                        m: *m,
                        count,
                        bound: half as f64,
                        bound_kind: BoundKind::StabilizedGrowth,
                        exhaustive: false,
                        solutions,
                    });
                }
                prev = Some(count);
                if half > 4_000_000 {
                    break;
                }
                half *= 4;
            }
            Err(Error::BudgetExceeded(
                "growth strategy did not stabilize (is the form finite type?)".into(),
            ))
        }
        Strategy::Auto => match certified_radius()? {
            Some(_) => count_exact(form, m, Strategy::Certified, list_solutions),
            None => count_exact(form, m, Strategy::Growth, list_solutions),
        },
    }
}

// ---------------------------------------------------------------------------
// Subspaces and restriction
// ---------------------------------------------------------------------------

/// Rational subspace W with a basis of W ∩ ℤⁿ completed to a ℤⁿ basis.
#[derive(Clone, Debug, Serialize)]
pub struct Subspace {
    pub n: usize,
    pub dim: usize,
    /// Columns 1..dim of t_w span W ∩ ℤⁿ.
    pub basis: Vec<Vec<i64>>,
    /// Unimodular n×n matrix, columns = basis then completion.
    pub t_w: Vec<Vec<i64>>,
    /// Present when W was given as a hyperplane normal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<i64>>,
}

impl Subspace {
    pub fn from_spanning(n: usize, vectors: &[Vec<i64>]) -> Result<Self> {
        if vectors.is_empty() || vectors.len() >= n {
            return Err(Error::Parse("need 1 <= dim W < n spanning vectors".into()));
        }
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Parse("spanning vector length mismatch".into()));
        }
        let cols: Vec<Vec<i128>> = vectors
            .iter()
            .map(|v| intlin::primitive(&v.iter().map(|&x| x as i128).collect::<Vec<_>>()))
            .collect();
        let u = intlin::complete_to_unimodular(&cols)?;
        let dim = vectors.len();
        let to_i64 = |v: i128| -> Result<i64> { i64::try_from(v).map_err(|_| Error::Overflow) };
        let t_w: Vec<Vec<i64>> = (0..n)
            .map(|j| (0..n).map(|i| to_i64(u[i][j])).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let basis = t_w[..dim].to_vec();
        Ok(Subspace { n, dim, basis, t_w, normal: None })
    }

    /// The hyperplane v·x = 0.
    pub fn hyperplane(normal: &[i64]) -> Result<Self> {
        let n = normal.len();
        if normal.iter().all(|&x| x == 0) {
            return Err(Error::Parse("zero normal".into()));
        }
        let row: Vec<i128> = intlin::primitive(&normal.iter().map(|&x| x as i128).collect::<Vec<_>>());
        let ker = intlin::kernel_basis(&vec![row.clone()]);
        let vectors: Vec<Vec<i64>> = ker
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&x| i64::try_from(x).map_err(|_| Error::Overflow))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::from_spanning(n, &vectors)?;
        s.normal = Some(normal.to_vec());
        Ok(s)
    }

    /// Intersection of two distinct hyperplanes.
    pub fn intersect_hyperplane(&self, other: &Subspace) -> Result<Subspace> {
        let (Some(a), Some(b)) = (&self.normal, &other.normal) else {
            return Err(Error::Unsupported(
                "intersection is implemented for hyperplanes given by normals".into(),
            ));
        };
        let rows: intlin::IMat = vec![
            a.iter().map(|&x| x as i128).collect(),
            b.iter().map(|&x| x as i128).collect(),
        ];
        if intlin::rank(&rows) < 2 {
            return Err(Error::Parse("hyperplanes are not distinct".into()));
        }
        let ker = intlin::kernel_basis(&rows);
        let vectors: Vec<Vec<i64>> = ker
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&x| i64::try_from(x).map_err(|_| Error::Overflow))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Subspace::from_spanning(self.n, &vectors)
    }

    /// Map a point of the restriction back into ℤⁿ: y ↦ T_W(y, 0).
    pub fn embed(&self, y: &[i64]) -> Vec<i64> {
        (0..self.n)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.t_w[j][i] * y[j])
                    .sum()
            })
            .collect()
    }
}

/// F|_W: the restriction of F∘T_W to the first dim W coordinates. Integer
/// expansions restrict exactly. Errors if some factor vanishes on W (the
/// restriction would not be decomposable of degree d).
pub fn restrict(form: &DecomposableForm, w: &Subspace) -> Result<DecomposableForm> {
    if w.n != form.n() {
        return Err(Error::Parse("subspace dimension mismatch".into()));
    }
    let k = w.dim;
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(form.degree());
    for f in form.factors() {
        let v: Vec<Complex64> = (0..k)
            .map(|j| {
                (0..w.n)
                    .map(|i| f.coeffs[i] * w.t_w[j][i] as f64)
                    .sum()
            })
            .collect();
        if crate::linalg::cnorm(&v) <= 1e-12 * f.norm() {
            return Err(Error::Precondition(
                "a factor vanishes identically on W; F|_W is not decomposable of degree d".into(),
            ));
        }
        vectors.push(v);
    }
    let mut out = DecomposableForm::from_factor_vectors(k, vectors, form.scale())?;
    if let Some(ip) = form.integer_poly() {
        let cols: Vec<Vec<i64>> = w.t_w[..k].to_vec();
        out.set_integer_poly(ip.substitute_linear(&cols)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionCountReport {
    /// Exact count of solutions lying in the union of the subspaces.
    pub union_count: u64,
    pub per_subspace: Vec<u64>,
    pub pairwise_intersection: Vec<u64>,
    /// Σ N_i − Σ_{i<j} N_ij.
    pub inclusion_exclusion_lower: i128,
    pub holds: bool,
}

/// Checks #(solutions in ∪ W_i) ≥ Σ N_{F|W_i}(m) − Σ_{i<j} N_{F|Wi∩Wj}(m)
/// with all sides computed exactly.
pub fn union_count_check(
    form: &DecomposableForm,
    m: &RationalBound,
    subspaces: &[Subspace],
    strategy: Strategy,
) -> Result<UnionCountReport> {
    if subspaces.is_empty() {
        return Err(Error::Parse("need at least one subspace".into()));
    }
    let mut union: HashSet<Vec<i64>> = HashSet::new();
    let mut per = Vec::new();
    for w in subspaces {
        let fw = restrict(form, w)?;
        let res = count_exact(&fw, m, strategy, true)?;
        per.push(res.count);
        for y in res.solutions.unwrap() {
            union.insert(w.embed(&y));
        }
    }
    let mut pair = Vec::new();
    for i in 0..subspaces.len() {
        for j in i + 1..subspaces.len() {
            let inter = subspaces[i].intersect_hyperplane(&subspaces[j])?;
            let fw = restrict(form, &inter)?;
            let res = count_exact(&fw, m, strategy, false)?;
            pair.push(res.count);
        }
    }
    let lower: i128 =
        per.iter().map(|&c| c as i128).sum::<i128>() - pair.iter().map(|&c| c as i128).sum::<i128>();
    let union_count = union.len() as u64;
    Ok(UnionCountReport {
        union_count,
        per_subspace: per,
        pairwise_intersection: pair,
        inclusion_exclusion_lower: lower,
        holds: union_count as i128 >= lower,
    })
}

/// The ≤ 20-line brute-force oracle the acceptance suite compares against.
pub fn brute_force_count(ip: &IntegerPoly, m: &RationalBound, half: i64) -> Result<u64> {
    let n = ip.n;
    let mut count = 0u64;
    let mut x = vec![0i64; n];
    fn rec(
        ip: &IntegerPoly,
        m: &RationalBound,
        half: i64,
        k: usize,
        x: &mut Vec<i64>,
        count: &mut u64,
    ) -> Result<()> {
        if k == ip.n {
            let xi: Vec<i128> = x.iter().map(|&v| v as i128).collect();
            let v = ip.eval(&xi)?;
            if v.checked_mul(m.den).map(|s| s.abs() <= m.num).unwrap_or(false) {
                *count += 1;
            }
            return Ok(());
        }
        for v in -half..=half {
            x[k] = v;
            rec(ip, m, half, k + 1, x, count)?;
        }
        Ok(())
    }
    rec(ip, m, half, 0, &mut x, &mut count)?;
    Ok(count)
}
