//! Max-times spectral theory: max cycle mean, Kleene star, eigencones,
//! the spectrum, and eigenvectors inside invariant cones.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::cone::MaxCone;
use crate::eigen::{EigenPair, Method};
use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, Matrix, Vector};
use crate::scalar::{approx_eq_rel, MaxTimes};

/// A simple cycle of the digraph of nonzero entries together with its
/// geometric mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCertificate {
    pub cycle: Vec<usize>,
    pub mean: MaxTimes,
}

/// Record of a run of the normalized power sequence started at the
/// greatest slice point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShpizTrace {
    pub alpha1: MaxTimes,
    pub iterations: usize,
    pub limit: Vector<MaxTimes>,
    pub converged_to_zero: bool,
    /// Largest componentwise increase seen between consecutive iterates
    /// (zero when the sequence is non-increasing).
    pub max_increase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShpizOutcome {
    Eigen { pair: EigenPair<MaxTimes>, trace: ShpizTrace },
    ZeroLimit(ShpizTrace),
}

impl ShpizOutcome {
    pub fn trace(&self) -> &ShpizTrace {
        match self {
            ShpizOutcome::Eigen { trace, .. } | ShpizOutcome::ZeroLimit(trace) => trace,
        }
    }

    pub fn pair(&self) -> Option<&EigenPair<MaxTimes>> {
        match self {
            ShpizOutcome::Eigen { pair, .. } => Some(pair),
            ShpizOutcome::ZeroLimit(_) => None,
        }
    }
}

/// Geometric mean of the arc weights along `cycle` (closing arc included),
/// computed as `2^(mean of log2 weights)`.
pub fn cycle_mean(a: &Matrix<MaxTimes>, cycle: &[usize]) -> MaxTimes {
    if cycle.is_empty() {
        return MaxTimes(0.0);
    }
    let mut total = 0.0;
    for (k, &i) in cycle.iter().enumerate() {
        let j = cycle[(k + 1) % cycle.len()];
        let w = a.get(i, j).0;
        if w == 0.0 {
            return MaxTimes(0.0);
        }
        total += w.log2();
    }
    MaxTimes((total / cycle.len() as f64).exp2())
}

/// Karp's algorithm on base-2 logarithms of the entries: returns the largest
/// geometric cycle mean and a cycle attaining it.
pub fn max_cycle_mean(a: &Matrix<MaxTimes>) -> Result<(MaxTimes, SpectralCertificate)> {
    let n = a.require_square()?;
    let log_mean = karp_log2(a, n);
    let Some(mu) = log_mean else {
        return Ok((MaxTimes(0.0), SpectralCertificate { cycle: Vec::new(), mean: MaxTimes(0.0) }));
    };
    let lambda = MaxTimes(mu.exp2());
    let cycle = critical_cycle(a, lambda)?;
    let mean = cycle_mean(a, &cycle);
    Ok((lambda, SpectralCertificate { cycle, mean }))
}

/// `None` for an acyclic digraph.
fn karp_log2(a: &Matrix<MaxTimes>, n: usize) -> Option<f64> {
    let weight = |i: usize, j: usize| {
        let w = a.get(i, j).0;
        (w > 0.0).then(|| w.log2())
    };
    // d[k][v]: heaviest walk with exactly k arcs ending at v
    let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    d[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=n {
        for v in 0..n {
            let mut best = f64::NEG_INFINITY;
            for u in 0..n {
                if let Some(w) = weight(u, v) {
                    if d[k - 1][u] > f64::NEG_INFINITY {
                        best = best.max(d[k - 1][u] + w);
                    }
                }
            }
            d[k][v] = best;
        }
    }
    let mut result: Option<f64> = None;
    for v in 0..n {
        if d[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for k in 0..n {
            if d[k][v] > f64::NEG_INFINITY {
                worst = worst.min((d[n][v] - d[k][v]) / (n - k) as f64);
            }
        }
        result = Some(result.map_or(worst, |r: f64| r.max(worst)));
    }
    result
}

/// Floyd-Warshall closure in max-times: `A* = I ⊕ A ⊕ A^2 ⊕ ...`, assuming
/// no cycle of weight above one.
fn star_unchecked(a: &Matrix<MaxTimes>) -> Matrix<MaxTimes> {
    let n = a.rows();
    let mut s = a.clone();
    for k in 0..n {
        for i in 0..n {
            let sik = s.get(i, k).0;
            if sik == 0.0 {
                continue;
            }
            for j in 0..n {
                let cand = sik * s.get(k, j).0;
                if cand > s.get(i, j).0 {
                    s.set(i, j, MaxTimes(cand));
                }
            }
        }
    }
    for i in 0..n {
        if s.get(i, i).0 < 1.0 {
            s.set(i, i, MaxTimes(1.0));
        }
    }
    s
}

/// Kleene star, defined when the max cycle mean is at most one.
pub fn kleene_star(a: &Matrix<MaxTimes>) -> Result<Matrix<MaxTimes>> {
    a.require_square()?;
    let (lambda, _) = max_cycle_mean(a)?;
    if lambda.0 > 1.0 + crate::scalar::DEFAULT_TOL {
        return Err(Error::Divergent(lambda.0));
    }
    Ok(star_unchecked(a))
}

const CRITICAL_TOL: f64 = 1e-9;

/// Nodes of `a / lambda` lying on a cycle of weight one, and the star of
/// `a / lambda`.
fn critical_structure(a: &Matrix<MaxTimes>, lambda: MaxTimes) -> (Vec<usize>, Matrix<MaxTimes>) {
    let n = a.rows();
    let scaled = a.map(|x| MaxTimes(x.0 / lambda.0));
    let star = star_unchecked(&scaled);
    let plus = scaled.mul(&star).expect("square");
    let critical = (0..n).filter(|&i| plus.get(i, i).0 >= 1.0 - CRITICAL_TOL).collect();
    (critical, star)
}

/// A cycle made of arcs of normalized weight one, found by walking from a
/// critical node along arcs that stay on a best path back to it.
fn critical_cycle(a: &Matrix<MaxTimes>, lambda: MaxTimes) -> Result<Vec<usize>> {
    let n = a.rows();
    let (critical, star) = critical_structure(a, lambda);
    let &start = critical
        .first()
        .ok_or_else(|| Error::InvariantViolation("positive cycle mean without a critical node".into()))?;
    let mut walk = vec![start];
    let mut seen = vec![usize::MAX; n];
    seen[start] = 0;
    let mut u = start;
    loop {
        let mut best = (0.0, usize::MAX);
        for j in 0..n {
            let score = a.get(u, j).0 / lambda.0 * star.get(j, start).0;
            if score > best.0 {
                best = (score, j);
            }
        }
        let next = best.1;
        if next == usize::MAX {
            return Err(Error::InvariantViolation("critical walk reached a dead end".into()));
        }
        if seen[next] != usize::MAX {
            return Ok(walk[seen[next]..].to_vec());
        }
        seen[next] = walk.len();
        walk.push(next);
        u = next;
    }
}

/// Cone of eigenvectors for the largest cycle mean: star columns of
/// `a / lambda` at critical nodes.
pub fn principal_eigencone(a: &Matrix<MaxTimes>) -> Result<MaxCone> {
    let n = a.require_square()?;
    let (lambda, _) = max_cycle_mean(a)?;
    if lambda.0 == 0.0 {
        return Err(Error::Precondition(
            "max cycle mean is zero; use the zero-eigenvalue path".into(),
        ));
    }
    let (critical, star) = critical_structure(a, lambda);
    let cols: Vec<_> = critical.iter().map(|&j| star.column(j)).collect();
    debug_assert!(cols.iter().all(|g| g.len() == n));
    MaxCone::from_columns(&cols)
}

/// Vector with ones on the columns of `a` that are entirely zero, if any:
/// then `a ⊗ x = 0`.
pub fn zero_eigenvector(a: &Matrix<MaxTimes>) -> Option<Vector<MaxTimes>> {
    let n = a.rows();
    let zero_cols: Vec<usize> = (0..a.cols()).filter(|&j| a.column(j).is_zero()).collect();
    if zero_cols.is_empty() {
        return None;
    }
    let mut x = vec![0.0; n.max(a.cols())];
    for j in zero_cols {
        x[j] = 1.0;
    }
    Some(MaxTimes::vec(&x))
}

/// Strongly connected components of the digraph with an arc `i -> j` for
/// every nonzero `a_ij`, restricted to those carrying a cycle.
fn cyclic_components(a: &Matrix<MaxTimes>) -> Vec<Vec<usize>> {
    let n = a.rows();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j).0 > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            c.sort_unstable();
            c
        })
        .filter(|c| c.len() > 1 || a.get(c[0], c[0]).0 > 0.0)
        .collect()
}

fn submatrix(a: &Matrix<MaxTimes>, idx: &[usize]) -> Matrix<MaxTimes> {
    Matrix::from_fn(idx.len(), idx.len(), |i, j| a.get(idx[i], idx[j]))
}

/// Nodes from which some node of `target` can be reached (targets included).
fn reaching(a: &Matrix<MaxTimes>, target: &[usize]) -> Vec<usize> {
    let n = a.rows();
    let mut mark = vec![false; n];
    let mut stack: Vec<usize> = target.to_vec();
    for &t in target {
        mark[t] = true;
    }
    while let Some(j) = stack.pop() {
        for i in 0..n {
            if !mark[i] && a.get(i, j).0 > 0.0 {
                mark[i] = true;
                stack.push(i);
            }
        }
    }
    (0..n).filter(|&i| mark[i]).collect()
}

/// Eigenvectors of `a` for the eigenvalue `lambda` that arise from the
/// components with cycle mean `lambda`: the component's critical star
/// columns on the set of nodes reaching it, padded with zeros.
fn fundamental_eigenvectors(a: &Matrix<MaxTimes>, lambda: MaxTimes, tol: f64) -> Result<Vec<Vector<MaxTimes>>> {
    let n = a.rows();
    if lambda.0 == 0.0 {
        return Ok(zero_eigenvector(a).into_iter().collect());
    }
    let mut out = Vec::new();
    for comp in cyclic_components(a) {
        let (mean, _) = max_cycle_mean(&submatrix(a, &comp))?;
        if !approx_eq_rel(mean.0, lambda.0, tol) {
            continue;
        }
        let upstream = reaching(a, &comp);
        let restricted = submatrix(a, &upstream);
        let (outer, _) = max_cycle_mean(&restricted)?;
        if outer.0 > lambda.0 * (1.0 + tol) {
            continue;
        }
        let (critical, star) = critical_structure(&restricted, lambda);
        for &c in &critical {
            if !comp.contains(&upstream[c]) {
                continue;
            }
            let mut x = vec![0.0; n];
            for (k, &i) in upstream.iter().enumerate() {
                x[i] = star.get(k, c).0;
            }
            let x = MaxTimes::vec(&x);
            if eigen_residual(a, lambda, &x)? <= tol {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// Cone of all eigenvectors built from the fundamental eigenvectors for
/// `lambda`; `None` if `lambda` is not an eigenvalue.
pub fn eigencone(a: &Matrix<MaxTimes>, lambda: MaxTimes, tol: f64) -> Result<Option<MaxCone>> {
    a.require_square()?;
    let vs = fundamental_eigenvectors(a, lambda, tol)?;
    if vs.is_empty() {
        return Ok(None);
    }
    Ok(Some(MaxCone::with_tol(Matrix::from_columns(&vs)?, tol)?))
}

/// All eigenvalues, sorted descending without duplicates. Candidates are the
/// cycle means of the strongly connected components (plus zero); each is
/// kept only if an eigenvector is constructed and verified for it.
pub fn tropical_spectrum(a: &Matrix<MaxTimes>) -> Result<Vec<MaxTimes>> {
    a.require_square()?;
    let tol = crate::scalar::DEFAULT_TOL;
    let mut candidates = Vec::new();
    for comp in cyclic_components(a) {
        candidates.push(max_cycle_mean(&submatrix(a, &comp))?.0);
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0));
    candidates.dedup_by(|x, y| approx_eq_rel(x.0, y.0, tol));
    let mut out = Vec::new();
    for lambda in candidates {
        if !fundamental_eigenvectors(a, lambda, tol)?.is_empty() {
            out.push(lambda);
        }
    }
    if zero_eigenvector(a).is_some() {
        out.push(MaxTimes(0.0));
    }
    Ok(out)
}

/// Principal eigenpair of `a` on the whole orthant, normalized to max one.
pub fn principal_eigenpair(a: &Matrix<MaxTimes>, tol: f64) -> Result<EigenPair<MaxTimes>> {
    let (lambda, _) = max_cycle_mean(a)?;
    if lambda.0 == 0.0 {
        let x = zero_eigenvector(a)
            .ok_or_else(|| Error::InvariantViolation("acyclic matrix without a zero column".into()))?;
        return EigenPair::verified(a, lambda, x, Method::KleeneStar, tol);
    }
    let cone = principal_eigencone(a)?;
    EigenPair::verified(a, lambda, cone.generator(0).normalized_max(), Method::KleeneStar, tol)
}

/// Eigenvector of `a` inside an invariant finitely generated cone, found on
/// the induced matrix and mapped back through the generators. The principal
/// eigenvalue of the induced matrix is tried first, then the rest of its
/// spectrum in descending order.
pub fn eigenvector_in_cone(w: &MaxCone, a: &Matrix<MaxTimes>, tol: f64) -> Result<EigenPair<MaxTimes>> {
    let b = w.induced_matrix(a, tol)?;
    let g = w.generators();
    let mut candidates = Vec::new();
    let (principal, _) = max_cycle_mean(&b)?;
    candidates.push(principal);
    candidates.extend(tropical_spectrum(&b)?);
    candidates.push(MaxTimes(0.0));
    for lambda in candidates {
        for u in fundamental_eigenvectors(&b, lambda, tol)? {
            let x = g.mul_vec(&u)?.normalized_max();
            if x.is_zero() {
                continue;
            }
            if let Ok(pair) = EigenPair::verified(a, lambda, x, Method::Induced, tol) {
                return Ok(pair);
            }
        }
    }
    Err(Error::InvariantViolation("no eigenvalue of the induced matrix could be verified".into()))
}

/// Normalized power sequence `u <- A u / alpha1` from the greatest slice
/// point `v` of the cone, with `alpha1 = max_i (A v)_i`.
///
/// The sequence is non-increasing. Its limit is an eigenvector with
/// eigenvalue `alpha1` when nonzero; on cones that are not minimal it can
/// vanish, which is reported as a zero limit.
pub fn shpiz_iteration(w: &MaxCone, a: &Matrix<MaxTimes>, max_iter: usize, tol: f64) -> Result<ShpizOutcome> {
    if !w.is_invariant(a, tol)? {
        return Err(Error::NotInvariant("cone is not invariant under the matrix".into()));
    }
    for g in w.generators().columns() {
        if a.mul_vec(&g)?.is_zero() {
            return Err(Error::Precondition(
                "matrix annihilates a generator; it has a zero-eigenvalue eigenvector".into(),
            ));
        }
    }
    let v = w.greatest_slice_point();
    let alpha1 = MaxTimes(a.mul_vec(&v)?.max_value());
    let inv = MaxTimes(1.0 / alpha1.0);
    let mut u = v;
    let mut max_increase: f64 = 0.0;
    for k in 1..=max_iter {
        let next = a.mul_vec(&u)?.scale(inv);
        for (x, y) in next.iter().zip(u.iter()) {
            max_increase = max_increase.max(x.0 - y.0);
        }
        let trace = |limit: Vector<MaxTimes>, zero: bool| ShpizTrace {
            alpha1,
            iterations: k,
            limit,
            converged_to_zero: zero,
            max_increase,
        };
        if next.max_value() <= tol {
            return Ok(ShpizOutcome::ZeroLimit(trace(next, true)));
        }
        if next.dist_inf(&u) <= tol * u.max_value() {
            if let Ok(pair) = EigenPair::verified(a, alpha1, next.clone(), Method::Shpiz, tol) {
                return Ok(ShpizOutcome::Eigen { pair, trace: trace(next, false) });
            }
        }
        u = next;
    }
    Err(Error::IterationFailure { iterations: max_iter, reason: "power sequence did not settle".into() })
}
