//! Common eigenvectors of commuting families.
//!
//! The search restricts an invariant cone (or subspace) step by step: for
//! each generator in turn it picks an eigenvalue of the generator acting on
//! the current cone and replaces the cone by the eigenvectors for that
//! eigenvalue. Because the family commutes, the remaining generators still
//! leave the smaller cone invariant. In the max-times and nonnegative cases
//! an eigenvalue choice can lead to a cone that is not finitely generated
//! within the caps; the search then backtracks to the next eigenvalue.

use num_complex::Complex64;

use crate::classical::{
    eigenspaces_complex, induced_complex, induced_nonneg, nnls, nonneg_eigenpairs, orthonormalize, perron_eigenpair, solve, to_complex,
};
use crate::cone::MaxCone;
use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, eigenvalue_estimate, Matrix, Vector};
use crate::scalar::{approx_eq_rel, MaxTimes, NonNeg, Semiring, DEFAULT_TOL};
use crate::tropical::{eigencone, max_cycle_mean, tropical_spectrum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub tol: f64,
    /// Largest number of images added while closing a cone.
    pub cone_cap: usize,
    /// Largest number of refinement steps across all branches.
    pub budget: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { tol: DEFAULT_TOL, cone_cap: 64, budget: 4096 }
    }
}

/// A common eigenvector with a log of the refinement steps that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement<S> {
    pub vector: Vector<S>,
    pub pathway: Vec<String>,
}

/// Domains with a common-eigenvector search for commuting families.
pub trait CommonSolver: Semiring {
    /// A common eigenvector of `gens` inside the cone or span of the columns
    /// of `space`, which must be invariant under every generator.
    fn common_eigenvector(gens: &[Matrix<Self>], space: &Matrix<Self>, opts: &RefineOptions) -> Result<Refinement<Self>>;

    /// Improve the accuracy of a common eigenvector found by the search.
    fn sharpen(_gens: &[Matrix<Self>], v: Vector<Self>) -> Vector<Self> {
        v
    }
}

/// Largest residual of `v` over the family, each with its own estimated
/// eigenvalue.
fn worst_residual<S: Semiring>(gens: &[Matrix<S>], v: &Vector<S>) -> f64 {
    gens.iter()
        .map(|a| match eigenvalue_estimate(a, v) {
            Ok(l) => eigen_residual(a, l, v).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Inverse iteration on a generic combination of the (normalized)
/// generators, shifted next to its eigenvalue at `v`. The result replaces
/// `v` only if it lowers the worst residual over the family.
fn sharpen_complex(gens: &[Matrix<Complex64>], v: Vector<Complex64>) -> Vector<Complex64> {
    let n = v.len();
    let mut m = Matrix::zeros(n, n);
    for (k, a) in gens.iter().enumerate() {
        let w = (1.0 + 0.37 * k as f64) / a.norm_inf().max(1.0);
        m = match m.add(&a.scale(Complex64::new(w, 0.0))) {
            Ok(m) => m,
            Err(_) => return v,
        };
    }
    let Ok(mu) = eigenvalue_estimate(&m, &v) else { return v };
    let shift = mu + Complex64::new(1e-12 * (1.0 + mu.norm()), 0.0);
    let shifted = Matrix::from_fn(n, n, |i, j| m.get(i, j) - if i == j { shift } else { Complex64::new(0.0, 0.0) });
    let mut best = v.clone();
    let mut best_r = worst_residual(gens, &v);
    let mut x = v;
    for _ in 0..2 {
        let Ok(col) = Matrix::from_columns(&[x.clone()]) else { break };
        let Ok(y) = solve(&shifted, &col) else { break };
        x = y.column(0).normalized_max();
        let r = worst_residual(gens, &x);
        if r < best_r {
            best = x.clone();
            best_r = r;
        }
    }
    best
}

/// Whether `v` is an eigenvector of every generator within `tol`.
/// The residual is measured relative to the size of each matrix, so that
/// families with large entries (powers, products) are judged fairly.
pub fn is_common_eigenvector<S: Semiring>(gens: &[Matrix<S>], v: &Vector<S>, tol: f64) -> bool {
    !v.is_zero()
        && gens.iter().all(|a| match eigenvalue_estimate(a, v) {
            Ok(l) => fits(a, l, v, tol),
            Err(_) => false,
        })
}

/// `|A v - l v| <= tol |v| max(1, |A|)`.
fn fits<S: Semiring>(a: &Matrix<S>, l: S, v: &Vector<S>, tol: f64) -> bool {
    eigen_residual(a, l, v).is_ok_and(|r| r <= tol * a.norm_inf().max(1.0))
}

/// The eigenvalue shared by all columns of `g` under `a`, if every column
/// is an eigenvector of `a` for the same eigenvalue. Then `a` acts as a
/// scalar on the whole cone or span.
fn shared_eigenvalue<S: Semiring>(g: &Matrix<S>, a: &Matrix<S>, tol: f64) -> Option<S> {
    let mut shared: Option<S> = None;
    for col in g.columns() {
        let l = eigenvalue_estimate(a, &col).ok()?;
        if !fits(a, l, &col, tol) {
            return None;
        }
        match shared {
            None => shared = Some(l),
            Some(s) if s.dist(l) <= tol * 1f64.max(s.modulus()).max(l.modulus()) => {}
            Some(_) => return None,
        }
    }
    shared
}

fn first_common<S: Semiring>(gens: &[Matrix<S>], candidates: impl IntoIterator<Item = Vector<S>>, tol: f64) -> Option<Vector<S>> {
    candidates.into_iter().map(|v| v.normalized_max()).find(|v| is_common_eigenvector(gens, v, tol))
}

fn describe<S: Semiring>(l: S) -> String {
    let z = l.to_scalar().to_complex();
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

struct Search<'a, S> {
    gens: &'a [Matrix<S>],
    opts: &'a RefineOptions,
    budget: usize,
    pathway: Vec<String>,
}

impl CommonSolver for MaxTimes {
    fn common_eigenvector(gens: &[Matrix<Self>], space: &Matrix<Self>, opts: &RefineOptions) -> Result<Refinement<Self>> {
        let w = MaxCone::with_tol(space.clone(), opts.tol)?;
        for (i, a) in gens.iter().enumerate() {
            if !w.is_invariant(a, opts.tol)? {
                return Err(Error::NotInvariant(format!("starting cone is not invariant under generator {i}")));
            }
        }
        let mut search = Search { gens, opts, budget: opts.budget, pathway: Vec::new() };
        if let Some(v) = search.refine_max(&w, 0)? {
            return Ok(Refinement { vector: v, pathway: search.pathway });
        }
        // eigenvectors of a generic max-combination are common eigenvector candidates
        let mut combo = gens[0].clone();
        for (k, a) in gens.iter().enumerate().skip(1) {
            combo = combo.add(&a.scale(MaxTimes(1.0 + 0.37 * k as f64)))?;
        }
        if let Ok(cone) = eigencone_candidates(&w, &combo, opts.tol) {
            if let Some(v) = first_common(gens, cone, opts.tol) {
                search.pathway.push("common eigenvector found among eigenvectors of a max-combination".into());
                return Ok(Refinement { vector: v, pathway: search.pathway });
            }
        }
        Err(Error::InvariantViolation("no common eigenvector found within the search budget".into()))
    }
}

/// Eigenvectors of `a` in `w` for every eigenvalue of the induced matrix.
fn eigencone_candidates(w: &MaxCone, a: &Matrix<MaxTimes>, tol: f64) -> Result<Vec<Vector<MaxTimes>>> {
    let b = w.induced_matrix(a, tol)?;
    let mut out = Vec::new();
    for l in induced_eigenvalues(&b)? {
        if let Some(cone) = eigencone(&b, l, tol)? {
            for u in cone.generators().columns() {
                let x = w.generators().mul_vec(&u)?;
                if !x.is_zero() {
                    out.push(x);
                }
            }
        }
    }
    Ok(out)
}

/// Principal eigenvalue first, then the rest of the spectrum descending.
fn induced_eigenvalues(b: &Matrix<MaxTimes>) -> Result<Vec<MaxTimes>> {
    let (principal, _) = max_cycle_mean(b)?;
    let mut out = vec![principal];
    for l in tropical_spectrum(b)? {
        if !out.iter().any(|x: &MaxTimes| approx_eq_rel(x.0, l.0, DEFAULT_TOL)) {
            out.push(l);
        }
    }
    Ok(out)
}

impl Search<'_, MaxTimes> {
    fn refine_max(&mut self, w: &MaxCone, idx: usize) -> Result<Option<Vector<MaxTimes>>> {
        let tol = self.opts.tol;
        if idx == self.gens.len() {
            let mut cands = w.generators().columns();
            cands.push(w.greatest_slice_point());
            return Ok(first_common(self.gens, cands, tol));
        }
        if self.budget == 0 {
            return Ok(None);
        }
        self.budget -= 1;
        let a = &self.gens[idx];
        if let Some(l) = shared_eigenvalue(w.generators(), a, tol) {
            self.pathway.push(format!("generator {idx}: acts as {} on the whole cone", describe(l)));
            let found = self.refine_max(w, idx + 1)?;
            if found.is_none() {
                self.pathway.pop();
            }
            return Ok(found);
        }
        let b = match w.induced_matrix(a, tol) {
            Ok(b) => b,
            Err(Error::NotInvariant(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let rest = &self.gens[idx + 1..];
        for l in induced_eigenvalues(&b)? {
            let Some(cone) = eigencone(&b, l, tol)? else { continue };
            let xs: Vec<Vector<MaxTimes>> = cone
                .generators()
                .columns()
                .iter()
                .filter_map(|u| w.generators().mul_vec(u).ok())
                .filter(|x| !x.is_zero())
                .map(|x| x.normalized_max())
                .collect();
            if xs.is_empty() {
                continue;
            }
            let mut seeds = vec![MaxCone::with_tol(Matrix::from_columns(&xs)?, tol)?];
            if xs.len() > 1 {
                for x in &xs {
                    seeds.push(MaxCone::ray(x)?);
                }
            }
            for seed in seeds {
                let Some(closed) = seed.close_under(rest, self.opts.cone_cap, tol)? else { continue };
                self.pathway.push(format!(
                    "generator {idx}: eigenvalue {}, cone with {} generator(s)",
                    describe(l),
                    closed.len()
                ));
                if let Some(v) = self.refine_max(&closed, idx + 1)? {
                    return Ok(Some(v));
                }
                self.pathway.pop();
                if self.budget == 0 {
                    return Ok(None);
                }
            }
        }
        Ok(None)
    }
}

impl CommonSolver for Complex64 {
    fn sharpen(gens: &[Matrix<Self>], v: Vector<Self>) -> Vector<Self> {
        sharpen_complex(gens, v)
    }

    fn common_eigenvector(gens: &[Matrix<Self>], space: &Matrix<Self>, opts: &RefineOptions) -> Result<Refinement<Self>> {
        let tol = opts.tol;
        let mut q = orthonormalize(&space.columns());
        if q.is_empty() {
            return Err(Error::InvalidInput("starting subspace is zero".into()));
        }
        let mut qm = Matrix::from_columns(&q)?;
        for (i, a) in gens.iter().enumerate() {
            match induced_complex(&qm, a, tol) {
                Ok(_) => {}
                Err(Error::NotInvariant(_)) => {
                    return Err(Error::NotInvariant(format!("starting subspace is not invariant under generator {i}")))
                }
                Err(e) => return Err(e),
            }
        }
        let mut pathway = Vec::new();
        for (idx, a) in gens.iter().enumerate() {
            if let Some(l) = shared_eigenvalue(&qm, a, tol) {
                pathway.push(format!("generator {idx}: acts as {} on the whole subspace", describe(l)));
                continue;
            }
            let b = induced_complex(&qm, a, tol)?;
            let mut next = None;
            for space in eigenspaces_complex(&b, tol)? {
                let mapped: Vec<Vector<Complex64>> =
                    space.basis.iter().filter_map(|u| qm.mul_vec(u).ok()).collect();
                let basis = orthonormalize(&mapped);
                if basis.is_empty() || !basis.iter().all(|x| fits(a, space.lambda, x, tol)) {
                    continue;
                }
                pathway.push(format!(
                    "generator {idx}: eigenvalue {}, subspace of dimension {}",
                    describe(space.lambda),
                    basis.len()
                ));
                next = Some(basis);
                break;
            }
            q = next.ok_or_else(|| Error::InvariantViolation(format!("no eigenspace of generator {idx} verified")))?;
            qm = Matrix::from_columns(&q)?;
        }
        let v = first_common(gens, q, tol)
            .ok_or_else(|| Error::InvariantViolation("refined subspace holds no verified common eigenvector".into()))?;
        Ok(Refinement { vector: v, pathway })
    }
}

impl CommonSolver for NonNeg {
    fn sharpen(gens: &[Matrix<Self>], v: Vector<Self>) -> Vector<Self> {
        let Ok(cgens) = gens.iter().map(to_complex).collect::<Result<Vec<_>>>() else { return v };
        let Ok(cv) = Vector::new(v.iter().map(|x| Complex64::new(x.0, 0.0)).collect()) else { return v };
        let sharp = sharpen_complex(&cgens, cv);
        // drop the rounding-level imaginary parts and negative entries
        match Vector::new(sharp.iter().map(|z| NonNeg(z.re.max(0.0))).collect()) {
            Ok(w) if worst_residual(gens, &w) < worst_residual(gens, &v) => w,
            _ => v,
        }
    }

    fn common_eigenvector(gens: &[Matrix<Self>], space: &Matrix<Self>, opts: &RefineOptions) -> Result<Refinement<Self>> {
        let tol = opts.tol;
        for (i, a) in gens.iter().enumerate() {
            match induced_nonneg(space, a, tol) {
                Ok(_) => {}
                Err(Error::NotInvariant(_)) => {
                    return Err(Error::NotInvariant(format!("starting cone is not invariant under generator {i}")))
                }
                Err(e) => return Err(e),
            }
        }
        let mut search = Search { gens, opts, budget: opts.budget, pathway: Vec::new() };
        if let Some(v) = search.refine_nonneg(space, 0)? {
            return Ok(Refinement { vector: v, pathway: search.pathway });
        }
        // Perron vector of a generic positive combination, restricted to the cone
        let mut combo = Matrix::zeros(space.rows(), space.rows());
        for (k, a) in gens.iter().enumerate() {
            let w = (1.0 + 0.37 * k as f64) / a.norm_inf().max(f64::MIN_POSITIVE);
            combo = combo.add(&a.scale(NonNeg(w)))?;
        }
        if let Ok(b) = induced_nonneg(space, &combo, tol) {
            let cands = nonneg_candidates(&b, tol).into_iter().filter_map(|u| space.mul_vec(&u).ok());
            if let Some(v) = first_common(gens, cands, tol) {
                search.pathway.push("common eigenvector found as the Perron vector of a positive combination".into());
                return Ok(Refinement { vector: v, pathway: search.pathway });
            }
        }
        Err(Error::InvariantViolation("no common eigenvector found within the search budget".into()))
    }
}

/// Nonnegative eigenvectors of `b`: the Perron vector, then the remaining
/// real nonnegative eigenvectors by decreasing eigenvalue.
fn nonneg_candidates(b: &Matrix<NonNeg>, tol: f64) -> Vec<Vector<NonNeg>> {
    let mut out = Vec::new();
    if b.is_zero() {
        out.push(Vector::ones(b.rows()));
        return out;
    }
    if let Ok(p) = perron_eigenpair(b, tol * 1e-2, 10_000) {
        out.push(p.vector);
    }
    for p in nonneg_eigenpairs(b, tol * 1e-2) {
        if !out.iter().any(|v| v.normalized_max().approx_eq(&p.vector.normalized_max(), 1e-9)) {
            out.push(p.vector);
        }
    }
    out
}

/// Cone generated by `x` and its images under `mats`, or `None` when more
/// than `cap` images had to be added.
fn close_nonneg(x: &Vector<NonNeg>, mats: &[Matrix<NonNeg>], cap: usize, tol: f64) -> Result<Option<Matrix<NonNeg>>> {
    let mut cols = vec![x.clone()];
    let mut frontier = cols.clone();
    let mut added = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for g in &frontier {
            for a in mats {
                let y = a.mul_vec(g)?;
                if y.is_zero() {
                    continue;
                }
                let basis: Vec<Vec<f64>> = cols.iter().map(|c| c.to_f64()).collect();
                let target = y.to_f64();
                let coef = nnls(&basis, &target);
                let err = (0..target.len())
                    .map(|i| (target[i] - basis.iter().zip(&coef).map(|(c, k)| c[i] * k).sum::<f64>()).abs())
                    .fold(0.0, f64::max);
                if err > tol * y.norm_inf().max(1.0) {
                    let y = y.normalized_max();
                    cols.push(y.clone());
                    next.push(y);
                    added += 1;
                    if added > cap {
                        return Ok(None);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(Some(Matrix::from_columns(&cols)?))
}

impl Search<'_, NonNeg> {
    fn refine_nonneg(&mut self, g: &Matrix<NonNeg>, idx: usize) -> Result<Option<Vector<NonNeg>>> {
        let tol = self.opts.tol;
        if idx == self.gens.len() {
            let mut cands = g.columns();
            let total = cands.iter().skip(1).try_fold(cands[0].clone(), |acc, c| acc.add(c))?;
            cands.push(total);
            return Ok(first_common(self.gens, cands, tol));
        }
        if self.budget == 0 {
            return Ok(None);
        }
        self.budget -= 1;
        let a = &self.gens[idx];
        if let Some(l) = shared_eigenvalue(g, a, tol) {
            self.pathway.push(format!("generator {idx}: acts as {} on the whole cone", describe(l)));
            let found = self.refine_nonneg(g, idx + 1)?;
            if found.is_none() {
                self.pathway.pop();
            }
            return Ok(found);
        }
        let b = match induced_nonneg(g, a, tol) {
            Ok(b) => b,
            Err(Error::NotInvariant(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let rest = &self.gens[idx + 1..];
        for u in nonneg_candidates(&b, tol) {
            let x = g.mul_vec(&u)?.normalized_max();
            let Ok(l) = eigenvalue_estimate(a, &x) else { continue };
            if x.is_zero() || !fits(a, l, &x, tol) {
                continue;
            }
            let Some(closed) = close_nonneg(&x, rest, self.opts.cone_cap, tol)? else { continue };
            self.pathway.push(format!(
                "generator {idx}: eigenvalue {}, cone with {} generator(s)",
                describe(l),
                closed.cols()
            ));
            if let Some(v) = self.refine_nonneg(&closed, idx + 1)? {
                return Ok(Some(v));
            }
            self.pathway.pop();
            if self.budget == 0 {
                return Ok(None);
            }
        }
        Ok(None)
    }
}

/// See [`CommonSolver::common_eigenvector`].
pub fn common_eigenvector_in<S: CommonSolver>(gens: &[Matrix<S>], space: &Matrix<S>, opts: &RefineOptions) -> Result<Refinement<S>> {
    if gens.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    let found = S::common_eigenvector(gens, space, opts)?;
    Ok(Refinement { vector: S::sharpen(gens, found.vector), pathway: found.pathway })
}
