//! Classical spectral computations for the complex and nonnegative-real
//! domains: characteristic polynomials, polynomial roots, eigenspaces,
//! Perron vectors, and eigenvectors inside invariant subspaces and cones.

use num_complex::Complex64;

use crate::eigen::{EigenPair, Method};
use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, Matrix, Vector};
use crate::scalar::{DomainTag, NonNeg, Semiring};

const RANK_TOL: f64 = 1e-8;

/// Monic polynomial, coefficients stored from the constant term upwards.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    coefficients: Vec<Complex64>,
}

impl PolyCoeffs {
    /// Divides through by the leading coefficient.
    pub fn monic(mut coefficients: Vec<Complex64>) -> Result<Self> {
        let lead = *coefficients.last().ok_or_else(|| Error::InvalidInput("empty polynomial".into()))?;
        if lead == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("leading coefficient is zero".into()));
        }
        for c in coefficients.iter_mut() {
            *c /= lead;
        }
        Ok(PolyCoeffs { coefficients })
    }

    /// `prod (z - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        PolyCoeffs { coefficients: c }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Rounding-error scale of Horner evaluation at `z`.
    fn eval_noise(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let bound = self.coefficients.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
        8.0 * f64::EPSILON * (self.degree() as f64 + 1.0) * bound
    }
}

/// Embed a complex or nonnegative matrix into the complex numbers.
pub fn to_complex<S: Semiring>(a: &Matrix<S>) -> Result<Matrix<Complex64>> {
    if S::DOMAIN == DomainTag::MaxTimes {
        return Err(Error::UnsupportedDomain(DomainTag::MaxTimes));
    }
    Ok(Matrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j).to_scalar().to_complex()))
}

/// Characteristic polynomial `det(zI - A)` by the Faddeev-LeVerrier recurrence.
pub fn char_poly<S: Semiring>(a: &Matrix<S>) -> Result<PolyCoeffs> {
    let n = a.require_square()?;
    let a = to_complex(a)?;
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m = Matrix::<Complex64>::zeros(n, n);
    for k in 1..=n {
        let mut mk = a.mul(&m)?;
        for i in 0..n {
            mk.set(i, i, mk.get(i, i) + c[n - k + 1]);
        }
        let am = a.mul(&mk)?;
        let trace: Complex64 = (0..n).map(|i| am.get(i, i)).sum();
        c[n - k] = -trace / k as f64;
        m = mk;
    }
    Ok(PolyCoeffs { coefficients: c })
}

/// All roots with multiplicity by Durand-Kerner (Weierstrass) iteration.
///
/// Iterates until every approximation sits at the rounding level of the
/// polynomial or stops moving, then requires `|p(r)| <= tol (1 + |r|)^deg`.
pub fn poly_roots(p: &PolyCoeffs, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::Precondition("constant polynomial has no roots".into()));
    }
    let c = p.coefficients();
    if d == 1 {
        return Ok(vec![-c[0]]);
    }
    let radius = 1.0 + c[..d].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * radius.sqrt()).collect();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let num = p.eval(z[i]);
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j != i {
                    let diff = z[i] - z[j];
                    den *= if diff == Complex64::new(0.0, 0.0) { Complex64::new(f64::EPSILON, 0.0) } else { diff };
                }
            }
            let step = num / den;
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        let settled = z.iter().all(|&r| p.eval(r).norm() <= p.eval_noise(r));
        if settled || max_step <= 4.0 * f64::EPSILON {
            break;
        }
    }
    let ok = z.iter().all(|&r| p.eval(r).norm() <= tol * (1.0 + r.norm()).powi(d as i32));
    if ok {
        Ok(z)
    } else {
        Err(Error::RootFindingFailure { iterations, best: z })
    }
}

/// Coefficients of `p^(k) / k!`.
fn taylor_poly(p: &PolyCoeffs, k: usize) -> Vec<Complex64> {
    p.coefficients()
        .iter()
        .enumerate()
        .skip(k)
        .map(|(j, &a)| a * (0..k).fold(1.0, |acc, i| acc * (j - i) as f64 / (i + 1) as f64))
        .collect()
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x)
}

/// An `m`-fold root of `p` is a simple root of `p^(m-1)`: polish the
/// centroid of a cluster there with Newton's method.
fn polish_multiple(p: &PolyCoeffs, c: Complex64, m: usize) -> Complex64 {
    if m < 2 {
        return c;
    }
    let q = taylor_poly(p, m - 1);
    let dq: Vec<Complex64> = q.iter().enumerate().skip(1).map(|(j, &a)| a * j as f64).collect();
    let mut z = c;
    for _ in 0..8 {
        let d = horner(&dq, z);
        if d == Complex64::new(0.0, 0.0) {
            break;
        }
        let step = horner(&q, z) / d;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Whether `c` is a root of multiplicity at least `m`: the Taylor
/// coefficients of order below `m` vanish to rounding level.
fn is_multiple_root(p: &PolyCoeffs, c: Complex64, m: usize, scale: f64) -> bool {
    let r = c.norm().max(1e-3 * scale);
    (0..m).all(|k| {
        let q = taylor_poly(p, k);
        let bound: f64 = q.iter().enumerate().map(|(j, a)| a.norm() * r.powi(j as i32)).sum();
        horner(&q, c).norm() <= 1e-11 * bound
    })
}

/// Group root approximations that belong to one multiple root.
///
/// Rounding spreads an `m`-fold root into `m` nearby approximations. Nearby
/// approximations are merged in order of distance, and a merge is kept only
/// if the polished centroid passes the derivative test for the combined
/// multiplicity.
/// Returns centroids with multiplicities.
fn cluster_roots(p: &PolyCoeffs, roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let d = roots.len();
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut pairs = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let dist = (roots[i] - roots[j]).norm();
            if dist <= 0.1 * scale {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut group: Vec<usize> = (0..d).collect();
    for (_, i, j) in pairs {
        let (gi, gj) = (group[i], group[j]);
        if gi == gj {
            continue;
        }
        let members: Vec<usize> = (0..d).filter(|&k| group[k] == gi || group[k] == gj).collect();
        let centroid = members.iter().map(|&k| roots[k]).sum::<Complex64>() / members.len() as f64;
        let centroid = polish_multiple(p, centroid, members.len());
        if is_multiple_root(p, centroid, members.len(), scale) {
            for k in members {
                group[k] = gi;
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for k in 0..d {
        match out.iter_mut().find(|g| g.0 == group[k]) {
            Some(g) => {
                g.1 += roots[k];
                g.2 += 1;
            }
            None => out.push((group[k], roots[k], 1)),
        }
    }
    out.into_iter().map(|(_, sum, m)| (polish_multiple(p, sum / m as f64, m), m)).collect()
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Basis of the null space by Gauss-Jordan elimination with complete
/// pivoting; pivots below `rel_tol` times the largest pivot count as zero.
pub fn nullspace(m: &Matrix<Complex64>, rel_tol: f64) -> Vec<Vector<Complex64>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Complex64>> = m.to_rows();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    let mut largest = 0.0;
    while rank < rows.min(cols) {
        let mut best = (0.0, rank, rank);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, x) in row.iter().enumerate().skip(rank) {
                if x.norm() > best.0 {
                    best = (x.norm(), i, j);
                }
            }
        }
        if rank == 0 {
            largest = best.0;
        }
        if best.0 == 0.0 || best.0 <= rel_tol * largest {
            break;
        }
        a.swap(rank, best.1);
        for row in a.iter_mut() {
            row.swap(rank, best.2);
        }
        perm.swap(rank, best.2);
        let pivot = a[rank][rank];
        for x in a[rank].iter_mut() {
            *x /= pivot;
        }
        let prow = a[rank].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == rank {
                continue;
            }
            let f = row[rank];
            if f != czero() {
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    (rank..cols)
        .map(|f| {
            let mut x = vec![czero(); cols];
            x[perm[f]] = Complex64::new(1.0, 0.0);
            for k in 0..rank {
                x[perm[k]] = -a[k][f];
            }
            Vector::new(x).expect("finite entries").normalized_max()
        })
        .collect()
}

/// Solve `A X = B` for square `A` by complete pivoting. Fails on a
/// numerically singular `A`.
pub fn solve(a: &Matrix<Complex64>, b: &Matrix<Complex64>) -> Result<Matrix<Complex64>> {
    let n = a.require_square()?;
    if b.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.rows() });
    }
    let k = b.cols();
    let mut aug: Vec<Vec<Complex64>> = (0..n)
        .map(|i| a.row(i).iter().chain(b.row(i).iter()).copied().collect())
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut largest = 0.0;
    for step in 0..n {
        let mut best = (0.0, step, step);
        for (i, row) in aug.iter().enumerate().skip(step) {
            for (j, x) in row.iter().enumerate().take(n).skip(step) {
                if x.norm() > best.0 {
                    best = (x.norm(), i, j);
                }
            }
        }
        if step == 0 {
            largest = best.0;
        }
        if best.0 == 0.0 || best.0 <= 1e-13 * largest {
            return Err(Error::Precondition("linear system is singular".into()));
        }
        aug.swap(step, best.1);
        for row in aug.iter_mut() {
            row.swap(step, best.2);
        }
        perm.swap(step, best.2);
        let pivot = aug[step][step];
        for x in aug[step].iter_mut() {
            *x /= pivot;
        }
        let prow = aug[step].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != step {
                let f = row[step];
                if f != czero() {
                    for (x, p) in row.iter_mut().zip(&prow) {
                        *x -= f * p;
                    }
                }
            }
        }
    }
    let mut x = Matrix::zeros(n, k);
    for step in 0..n {
        for c in 0..k {
            x.set(perm[step], c, aug[step][n + c]);
        }
    }
    Ok(x)
}

/// Conjugate transpose.
pub fn adjoint(a: &Matrix<Complex64>) -> Matrix<Complex64> {
    a.transpose().map(|z| z.conj())
}

/// Orthonormal basis of the column span (modified Gram-Schmidt, applied
/// twice); columns that add no new direction are dropped.
pub fn orthonormalize(cols: &[Vector<Complex64>]) -> Vec<Vector<Complex64>> {
    let scale = cols.iter().map(|c| l2(c.as_slice())).fold(0.0, f64::max);
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for c in cols {
        let mut v = c.as_slice().to_vec();
        for _ in 0..2 {
            for q in &out {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let norm = l2(&v);
        if norm > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out.into_iter().map(|v| Vector::new(v).expect("finite entries")).collect()
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// An eigenvalue together with a basis of its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub lambda: Complex64,
    pub basis: Vec<Vector<Complex64>>,
}

/// Eigenspaces of a complex matrix, one per distinct eigenvalue, ordered by
/// decreasing modulus (then real part, then imaginary part). Eigenvalues
/// come from the characteristic polynomial; each basis vector has been
/// checked against `a` with tolerance `tol`.
pub fn eigenspaces_complex(a: &Matrix<Complex64>, tol: f64) -> Result<Vec<Eigenspace>> {
    let n = a.require_square()?;
    let p = char_poly(a)?;
    let roots = poly_roots(&p, 1e-6, 20_000)?;
    let mut clusters = cluster_roots(&p, &roots);
    clusters.sort_by(|x, y| {
        y.0.norm()
            .total_cmp(&x.0.norm())
            .then(y.0.re.total_cmp(&x.0.re))
            .then(y.0.im.total_cmp(&x.0.im))
    });
    let mut out = Vec::new();
    for (lambda, _) in clusters {
        let shifted = Matrix::from_fn(n, n, |i, j| a.get(i, j) - if i == j { lambda } else { czero() });
        let mut basis = Vec::new();
        for v in candidate_vectors(a, &shifted, lambda) {
            if let Some(v) = polish(a, lambda, v, tol) {
                basis.push(v);
            }
        }
        if !basis.is_empty() {
            out.push(Eigenspace { lambda, basis });
        }
    }
    if out.is_empty() {
        return Err(Error::InvariantViolation("no eigenvector could be verified".into()));
    }
    Ok(out)
}

/// Null-space vectors of `A - lambda I`, or one inverse-iteration vector
/// when the elimination finds full rank.
fn candidate_vectors(a: &Matrix<Complex64>, shifted: &Matrix<Complex64>, lambda: Complex64) -> Vec<Vector<Complex64>> {
    let ns = nullspace(shifted, RANK_TOL);
    if !ns.is_empty() {
        return ns;
    }
    let n = a.rows();
    let delta = 1e-10 * (1.0 + lambda.norm());
    let nudged = Matrix::from_fn(n, n, |i, j| shifted.get(i, j) - if i == j { Complex64::new(delta, 0.0) } else { czero() });
    let mut x = Matrix::from_fn(n, 1, |_, _| Complex64::new(1.0, 0.0));
    for _ in 0..3 {
        match solve(&nudged, &x) {
            Ok(y) => {
                let v = y.column(0).normalized_max();
                x = Matrix::from_columns(&[v]).expect("one column");
            }
            Err(_) => break,
        }
    }
    vec![x.column(0).normalized_max()]
}

/// Accept `v` if it is an eigenvector for `lambda`, after at most a couple
/// of inverse-iteration steps.
fn polish(a: &Matrix<Complex64>, lambda: Complex64, v: Vector<Complex64>, tol: f64) -> Option<Vector<Complex64>> {
    let n = a.rows();
    let mut v = v;
    for _ in 0..3 {
        if eigen_residual(a, lambda, &v).ok()? <= tol {
            return Some(v);
        }
        let delta = 1e-12 * (1.0 + lambda.norm());
        let shifted =
            Matrix::from_fn(n, n, |i, j| a.get(i, j) - if i == j { lambda + Complex64::new(delta, 0.0) } else { czero() });
        let y = solve(&shifted, &Matrix::from_columns(&[v.clone()]).ok()?).ok()?;
        v = y.column(0).normalized_max();
    }
    (eigen_residual(a, lambda, &v).ok()? <= tol).then_some(v)
}

/// Every eigenvalue with each vector of a basis of its eigenspace.
pub fn eigenpairs_complex(a: &Matrix<Complex64>, tol: f64) -> Result<Vec<EigenPair<Complex64>>> {
    let mut out = Vec::new();
    for space in eigenspaces_complex(a, tol)? {
        for v in space.basis {
            out.push(EigenPair::verified(a, space.lambda, v, Method::Classical, tol)?);
        }
    }
    Ok(out)
}

/// Perron eigenpair of a nonnegative matrix: power iteration
/// `x <- A x / |A x|_1` from the uniform vector. If that does not settle
/// (several eigenvalues of maximal modulus), the same iteration is run on
/// `(I + A) / 2`, whose Perron vector is the same.
pub fn perron_eigenpair(a: &Matrix<NonNeg>, tol: f64, max_iter: usize) -> Result<EigenPair<NonNeg>> {
    let n = a.require_square()?;
    if a.is_zero() {
        return Err(Error::Precondition("Perron vector of the zero matrix".into()));
    }
    let first = match power_iteration(a, tol, max_iter) {
        Ok((rho, x)) => return EigenPair::verified(a, NonNeg(rho), x, Method::Power, tol),
        Err(e) => e,
    };
    let averaged = Matrix::from_fn(n, n, |i, j| NonNeg(0.5 * a.get(i, j).0 + if i == j { 0.5 } else { 0.0 }));
    if let Ok((rho_m, x)) = power_iteration(&averaged, tol / 4.0, max_iter) {
        let rho = (2.0 * rho_m - 1.0).max(0.0);
        if let Ok(pair) = EigenPair::verified(a, NonNeg(rho), x, Method::Power, tol) {
            return Ok(pair);
        }
    }
    // reducible matrices with slowly converging powers: read the vector off
    // the eigenspaces of the largest real eigenvalue
    if let Some(pair) = nonneg_eigenpairs(a, tol).into_iter().next() {
        return Ok(pair);
    }
    Err(first)
}

fn power_iteration(a: &Matrix<NonNeg>, tol: f64, max_iter: usize) -> Result<(f64, Vector<NonNeg>)> {
    let n = a.rows();
    let mut x = Vector::from_f64(&vec![1.0 / n as f64; n])?;
    let mut ax = a.mul_vec(&x)?;
    for _ in 0..max_iter {
        let rho = ax.sum() / x.sum();
        if rho == 0.0 {
            return Ok((0.0, x));
        }
        if eigen_residual(a, NonNeg(rho), &x)? <= tol {
            return Ok((rho, x));
        }
        let s = ax.sum();
        x = ax.scale(NonNeg(1.0 / s));
        ax = a.mul_vec(&x)?;
    }
    Err(Error::IterationFailure {
        iterations: max_iter,
        reason: "power iteration did not settle; the averaged operator (I + A)/2 is tried next".into(),
    })
}

/// Real nonnegative eigenpairs read off the complex eigenspaces, largest
/// eigenvalue first.
pub fn nonneg_eigenpairs(a: &Matrix<NonNeg>, tol: f64) -> Vec<EigenPair<NonNeg>> {
    let Ok(ac) = to_complex(a) else { return Vec::new() };
    let Ok(spaces) = eigenspaces_complex(&ac, tol) else { return Vec::new() };
    let scale = 1.0 + a.norm_inf();
    let mut spaces: Vec<_> = spaces
        .into_iter()
        .filter(|s| s.lambda.im.abs() <= 1e-9 * scale && s.lambda.re >= -1e-9 * scale)
        .collect();
    spaces.sort_by(|x, y| y.lambda.re.total_cmp(&x.lambda.re));
    let mut out = Vec::new();
    for s in spaces {
        let lambda = NonNeg(s.lambda.re.max(0.0));
        for v in &s.basis {
            if let Some(x) = real_nonneg(v) {
                if let Ok(pair) = EigenPair::verified(a, lambda, x, Method::Power, tol) {
                    out.push(pair);
                }
            }
        }
    }
    out
}

/// A complex vector that is a nonnegative real vector up to a unit factor.
fn real_nonneg(v: &Vector<Complex64>) -> Option<Vector<NonNeg>> {
    let v = v.normalized_max();
    let mut out = Vec::with_capacity(v.len());
    for z in v.iter() {
        if z.im.abs() > 1e-9 || z.re < -1e-9 {
            return None;
        }
        out.push(NonNeg(z.re.max(0.0)));
    }
    Vector::new(out).ok()
}

/// Matrix `B` with `G B = A G` for independent columns `G`, from the normal
/// equations; fails if the span of `G` is not invariant under `A`.
pub fn induced_complex(g: &Matrix<Complex64>, a: &Matrix<Complex64>, tol: f64) -> Result<Matrix<Complex64>> {
    let n = a.require_square()?;
    if g.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.rows() });
    }
    let gh = adjoint(g);
    let ag = a.mul(g)?;
    let b = solve(&gh.mul(g)?, &gh.mul(&ag)?)
        .map_err(|_| Error::InvalidInput("basis columns are linearly dependent".into()))?;
    let err = g.mul(&b)?.data().iter().zip(ag.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if err > tol * ag.norm_inf().max(1.0) {
        return Err(Error::NotInvariant(format!("least-squares residual {err:.3e}")));
    }
    Ok(b)
}

/// Nonnegative `B` with `G B ≈ A G`, column by column by nonnegative least
/// squares; fails if some image of a generator leaves the cone.
pub fn induced_nonneg(g: &Matrix<NonNeg>, a: &Matrix<NonNeg>, tol: f64) -> Result<Matrix<NonNeg>> {
    let n = a.require_square()?;
    if g.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.rows() });
    }
    let cols: Vec<Vec<f64>> = g.columns().iter().map(|c| c.to_f64()).collect();
    let m = cols.len();
    let mut b = Matrix::zeros(m, m);
    for j in 0..m {
        let target = a.mul_vec(&g.column(j))?.to_f64();
        let coef = nnls(&cols, &target);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let fit: f64 = (0..m).map(|k| cols[k][i] * coef[k]).sum();
            err = err.max((fit - target[i]).abs());
        }
        let scale = target.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        if err > tol * scale {
            return Err(Error::NotInvariant(format!(
                "image of generator {j} is {err:.3e} away from the cone"
            )));
        }
        for (k, &x) in coef.iter().enumerate() {
            b.set(k, j, NonNeg(x));
        }
    }
    Ok(b)
}

/// Lawson-Hanson active-set method for `min |G x - b|_2` over `x >= 0`,
/// with `G` given by its columns.
pub fn nnls(cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let m = cols.len();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
    let scale = cols.iter().flatten().chain(b).fold(0.0f64, |acc, x| acc.max(x.abs())).max(f64::MIN_POSITIVE);
    let eps = 1e-13 * scale * scale * (b.len() as f64);
    let mut x = vec![0.0; m];
    let mut passive = vec![false; m];
    let residual = |x: &[f64]| -> Vec<f64> {
        (0..b.len()).map(|i| b[i] - (0..m).map(|k| cols[k][i] * x[k]).sum::<f64>()).collect()
    };
    for _outer in 0..3 * m + 3 {
        let r = residual(&x);
        let w: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let pick = (0..m).filter(|&k| !passive[k] && w[k] > eps).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = pick else { break };
        passive[t] = true;
        for _inner in 0..3 * m + 3 {
            let idx: Vec<usize> = (0..m).filter(|&k| passive[k]).collect();
            let z = lstsq(cols, &idx, b);
            if idx.iter().zip(&z).all(|(_, &zk)| zk > 0.0) {
                for (&k, &zk) in idx.iter().zip(&z) {
                    x[k] = zk;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&k, &zk) in idx.iter().zip(&z) {
                if zk <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - zk));
                }
            }
            for (&k, &zk) in idx.iter().zip(&z) {
                x[k] += alpha * (zk - x[k]);
                if x[k] <= 1e-15 * scale {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
    x
}

/// Unconstrained least squares on the selected columns (normal equations).
fn lstsq(cols: &[Vec<f64>], idx: &[usize], b: &[f64]) -> Vec<f64> {
    let k = idx.len();
    let gram = Matrix::from_fn(k, k, |i, j| {
        Complex64::new(cols[idx[i]].iter().zip(&cols[idx[j]]).map(|(x, y)| x * y).sum(), 0.0)
    });
    let rhs = Matrix::from_fn(k, 1, |i, _| Complex64::new(cols[idx[i]].iter().zip(b).map(|(x, y)| x * y).sum(), 0.0));
    match solve(&gram, &rhs) {
        Ok(z) => (0..k).map(|i| z.get(i, 0).re).collect(),
        Err(_) => vec![0.0; k],
    }
}

/// Domains where a classical eigenvector can be found inside an invariant
/// span (complex) or cone (nonnegative).
pub trait Classical: Semiring {
    /// Eigenpair of `a` in the span or cone of the columns of `g`.
    fn eigenvector_in_subspace(g: &Matrix<Self>, a: &Matrix<Self>, tol: f64) -> Result<EigenPair<Self>>;
}

impl Classical for Complex64 {
    fn eigenvector_in_subspace(g: &Matrix<Self>, a: &Matrix<Self>, tol: f64) -> Result<EigenPair<Self>> {
        let b = induced_complex(g, a, tol)?;
        for space in eigenspaces_complex(&b, tol)? {
            for u in space.basis {
                let x = g.mul_vec(&u)?.normalized_max();
                if let Ok(pair) = EigenPair::verified(a, space.lambda, x, Method::Classical, tol) {
                    return Ok(pair);
                }
            }
        }
        Err(Error::InvariantViolation("no eigenvector of the induced matrix verified against the matrix".into()))
    }
}

impl Classical for NonNeg {
    fn eigenvector_in_subspace(g: &Matrix<Self>, a: &Matrix<Self>, tol: f64) -> Result<EigenPair<Self>> {
        let b = induced_nonneg(g, a, tol)?;
        let mut candidates = Vec::new();
        if b.is_zero() {
            candidates.push((NonNeg(0.0), Vector::ones(b.rows())));
        } else if let Ok(p) = perron_eigenpair(&b, tol * 1e-2, 10_000) {
            candidates.push((p.lambda, p.vector));
        }
        candidates.extend(nonneg_eigenpairs(&b, tol * 1e-2).into_iter().map(|p| (p.lambda, p.vector)));
        for (lambda, u) in candidates {
            let x = g.mul_vec(&u)?.normalized_max();
            if x.is_zero() {
                continue;
            }
            if let Ok(pair) = EigenPair::verified(a, lambda, x, Method::Power, tol) {
                return Ok(pair);
            }
        }
        Err(Error::InvariantViolation(
            "nonnegative factorization too inexact: no candidate verified against the matrix".into(),
        ))
    }
}

/// See [`Classical::eigenvector_in_subspace`].
pub fn eigenvector_in_subspace<S: Classical>(g: &Matrix<S>, a: &Matrix<S>, tol: f64) -> Result<EigenPair<S>> {
    S::eigenvector_in_subspace(g, a, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DEFAULT_TOL;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cm(rows: &[&[f64]]) -> Matrix<Complex64> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect()).unwrap()
    }

    fn nm(rows: &[&[f64]]) -> Matrix<NonNeg> {
        Matrix::from_f64_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sorted(mut z: Vec<Complex64>) -> Vec<Complex64> {
        z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        z
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn char_poly_examples() {
        let p = char_poly(&cm(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_eq!(p.coefficients(), &[c(3.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)]);
        let p = char_poly(&Matrix::<Complex64>::identity(3)).unwrap();
        assert_eq!(p, PolyCoeffs::from_roots(&[c(1.0, 0.0); 3]));
        let p = char_poly(&Matrix::<Complex64>::zeros(4, 4)).unwrap();
        assert_eq!(p, PolyCoeffs::from_roots(&[c(0.0, 0.0); 4]));
        assert!(char_poly(&Matrix::<Complex64>::zeros(2, 3)).is_err());
        assert!(matches!(
            char_poly(&crate::scalar::MaxTimes::mat(&[&[1.0]])),
            Err(Error::UnsupportedDomain(DomainTag::MaxTimes))
        ));
    }

    #[test]
    fn root_examples() {
        let r = poly_roots(&PolyCoeffs::monic(vec![c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]).unwrap(), 1e-12, 500).unwrap();
        assert!(close(&sorted(r), &[c(1.0, 0.0), c(2.0, 0.0)], 1e-12));
        let r = poly_roots(&PolyCoeffs::monic(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap(), 1e-12, 500).unwrap();
        assert!(close(&sorted(r), &[c(0.0, -1.0), c(0.0, 1.0)], 1e-12));
        let r = poly_roots(&PolyCoeffs::monic(vec![c(3.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)]).unwrap(), 1e-12, 500).unwrap();
        assert!(close(&sorted(r), &[c(1.0, 0.0), c(3.0, 0.0)], 1e-12));
    }

    #[test]
    fn root_failure_carries_iterates() {
        let p = PolyCoeffs::from_roots(&[c(1.0, 0.0), c(-2.0, 0.5), c(3.0, 3.0)]);
        match poly_roots(&p, 1e-12, 1) {
            Err(Error::RootFindingFailure { iterations, best }) => {
                assert_eq!(iterations, 1);
                assert_eq!(best.len(), 3);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn multiple_roots_cluster() {
        let p = PolyCoeffs::from_roots(&[c(2.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(-1.0, 1.0)]);
        let r = poly_roots(&p, 1e-9, 10_000).unwrap();
        let mut cl = cluster_roots(&p, &r);
        cl.sort_by(|a, b| a.1.cmp(&b.1));
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[1].1, 3);
        assert!((cl[1].0 - c(2.0, 0.0)).norm() < 1e-10);
        assert!((cl[0].0 - c(-1.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn eigenpair_examples() {
        let d = eigenpairs_complex(&cm(&[&[1.0, 0.0], &[0.0, 2.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d[0].lambda - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(d[0].vector.as_slice(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(d[1].vector.as_slice(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        let j = eigenpairs_complex(&cm(&[&[0.0, 1.0], &[0.0, 0.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(j.len(), 1);
        assert!(j[0].lambda.norm() < 1e-9);
        assert!(j[0].vector.approx_eq(&Vector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), 1e-9));

        let s = eigenpairs_complex(&cm(&[&[2.0, 1.0], &[1.0, 2.0]]), DEFAULT_TOL).unwrap();
        assert!((s[0].lambda - c(3.0, 0.0)).norm() < 1e-12);
        assert!(s[0].vector.approx_eq(&Vector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap(), 1e-12));
        assert!((s[1].lambda - c(1.0, 0.0)).norm() < 1e-12);
        assert!(s[1].vector.approx_eq(&Vector::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap(), 1e-12));
    }

    #[test]
    fn repeated_eigenvalue_gives_full_eigenspace() {
        let a = Matrix::diagonal(&[c(3.0, 1.0), c(3.0, 1.0), c(-1.0, 0.0)]);
        let spaces = eigenspaces_complex(&a, DEFAULT_TOL).unwrap();
        assert_eq!(spaces.len(), 2);
        assert_eq!(spaces[0].basis.len(), 2);
        assert_eq!(spaces[1].basis.len(), 1);
    }

    #[test]
    fn nullspace_ranks() {
        let m = cm(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        let ns = nullspace(&m, RANK_TOL);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.mul_vec(&v).unwrap().norm_inf() < 1e-12);
        }
        assert!(nullspace(&Matrix::<Complex64>::identity(3), RANK_TOL).is_empty());
    }

    #[test]
    fn perron_examples() {
        let p = perron_eigenpair(&nm(&[&[2.0, 1.0], &[1.0, 2.0]]), DEFAULT_TOL, 10_000).unwrap();
        assert!((p.lambda.0 - 3.0).abs() < 1e-9);
        assert!(p.vector.approx_eq(&Vector::from_f64(&[0.5, 0.5]).unwrap(), 1e-9));
        let p = perron_eigenpair(&Matrix::identity(3), DEFAULT_TOL, 10_000).unwrap();
        assert_eq!(p.lambda, NonNeg(1.0));
        assert_eq!(p.vector.to_f64(), vec![1.0 / 3.0; 3]);
        let p = perron_eigenpair(&nm(&[&[0.0, 1.0], &[1.0, 0.0]]), DEFAULT_TOL, 10_000).unwrap();
        assert_eq!(p.lambda, NonNeg(1.0));
        assert_eq!(p.vector.to_f64(), vec![0.5, 0.5]);
    }

    #[test]
    fn perron_averaged_fallback() {
        // period two with an unequal start: plain iteration oscillates
        let a = nm(&[&[0.0, 2.0], &[0.5, 0.0]]);
        let p = perron_eigenpair(&a, DEFAULT_TOL, 10_000).unwrap();
        assert!((p.lambda.0 - 1.0).abs() < 1e-9);
        let v = p.vector.normalized_max().to_f64();
        assert!((v[0] - 1.0).abs() < 1e-9 && (v[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn perron_nilpotent_and_zero() {
        let p = perron_eigenpair(&nm(&[&[0.0, 1.0], &[0.0, 0.0]]), DEFAULT_TOL, 100).unwrap();
        assert_eq!(p.lambda, NonNeg(0.0));
        assert!(matches!(perron_eigenpair(&Matrix::<NonNeg>::zeros(2, 2), DEFAULT_TOL, 100), Err(Error::Precondition(_))));
    }

    #[test]
    fn subspace_examples() {
        let a = cm(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        let g = cm(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        let p = eigenvector_in_subspace(&g, &a, DEFAULT_TOL).unwrap();
        assert!((p.lambda - c(2.0, 0.0)).norm() < 1e-12 || (p.lambda - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(p.vector[2], c(0.0, 0.0));

        let ray = cm(&[&[1.0], &[1.0]]);
        let p = eigenvector_in_subspace(&ray, &cm(&[&[2.0, 1.0], &[1.0, 2.0]]), DEFAULT_TOL).unwrap();
        assert!((p.lambda - c(3.0, 0.0)).norm() < 1e-12);

        let bad = cm(&[&[1.0], &[0.0]]);
        assert!(matches!(
            eigenvector_in_subspace(&bad, &cm(&[&[2.0, 1.0], &[1.0, 2.0]]), DEFAULT_TOL),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn nonneg_cone_examples() {
        let a = nm(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let p = eigenvector_in_subspace(&Matrix::identity(2), &a, DEFAULT_TOL).unwrap();
        assert!((p.lambda.0 - 3.0).abs() < 1e-9);
        // the cone of (1,0) and (1,1) is invariant under diag(2,1) but not diag(1,2)
        let g = nm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let p = eigenvector_in_subspace(&g, &nm(&[&[2.0, 0.0], &[0.0, 1.0]]), DEFAULT_TOL).unwrap();
        assert!((p.lambda.0 - 2.0).abs() < 1e-9);
        assert!(matches!(
            eigenvector_in_subspace(&g, &nm(&[&[1.0, 0.0], &[0.0, 2.0]]), DEFAULT_TOL),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn nnls_matches_hand_solution() {
        // b = 2 e1 + 0.5 (1,1) in the cone of e1 and (1,1)
        let x = nnls(&[vec![1.0, 0.0], vec![1.0, 1.0]], &[2.5, 0.5]);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
        // outside the cone: best fit clamps a coefficient at zero
        let x = nnls(&[vec![1.0, 0.0], vec![1.0, 1.0]], &[-1.0, 1.0]);
        assert_eq!(x[0], 0.0);
        assert!(x[1] >= 0.0);
    }
}
