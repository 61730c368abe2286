//! Finitely generated matrix semigroups: closure by breadth-first search,
//! the layers `S^(k)` of products of `k` elements, classification, and
//! common eigenvectors with lifting from `S^(k)` down to `S`.

use std::fmt;
use std::str::FromStr;

use crate::commuting::{common_eigenvector_in, CommonSolver, RefineOptions};
use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, eigenvalue_estimate, Matrix, Vector};
use crate::scalar::{DomainTag, Semiring, DEFAULT_TOL};

pub const DEFAULT_CLOSURE_CAP: usize = 512;
pub const DEFAULT_WORD_CAP: usize = 12;
pub const DEFAULT_QUASI_BOUND: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupSpec<S> {
    pub generators: Vec<Matrix<S>>,
    /// Largest number of distinct elements kept.
    pub closure_cap: usize,
    /// Longest word multiplied out.
    pub word_cap: usize,
    /// Largest `k` searched when classifying.
    pub quasi_bound: usize,
    pub tol: f64,
}

impl<S: Semiring> SemigroupSpec<S> {
    /// Spec with the default caps and tolerance.
    pub fn new(generators: Vec<Matrix<S>>) -> Result<Self> {
        let spec = SemigroupSpec {
            generators,
            closure_cap: DEFAULT_CLOSURE_CAP,
            word_cap: DEFAULT_WORD_CAP,
            quasi_bound: DEFAULT_QUASI_BOUND,
            tol: DEFAULT_TOL,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn domain(&self) -> DomainTag {
        S::DOMAIN
    }

    pub fn dim(&self) -> usize {
        self.generators[0].rows()
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.generators.first().ok_or_else(|| Error::InvalidInput("no generators".into()))?;
        let n = first.require_square()?;
        for g in &self.generators {
            let m = g.require_square()?;
            if m != n {
                return Err(Error::DimensionMismatch { expected: n, found: m });
            }
        }
        if self.closure_cap == 0 || self.word_cap == 0 || self.quasi_bound == 0 {
            return Err(Error::InvalidInput("caps must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidInput("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Distinct elements found by multiplying out words in the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupClosure<S> {
    pub elements: Vec<Matrix<S>>,
    /// For each element, a word (generator indices, applied left to right
    /// as a product) reproducing it.
    pub words: Vec<Vec<usize>>,
    /// Length of the shortest word found for each element.
    pub min_length: Vec<usize>,
    /// A cap was hit while new elements were still appearing.
    pub truncated: bool,
    generators: Vec<Matrix<S>>,
    /// Sum of entry moduli of each element, to rule out most comparisons.
    keys: Vec<f64>,
    tol: f64,
}

impl<S: Semiring> SemigroupClosure<S> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of the element equal to `m` within the tolerance.
    pub fn find(&self, m: &Matrix<S>) -> Option<usize> {
        let k = key(m);
        let slack = (m.rows() * m.cols()) as f64 * self.tol;
        self.keys
            .iter()
            .zip(&self.elements)
            .position(|(&ke, e)| (ke - k).abs() <= slack * ke.max(k).max(1.0) && e.approx_eq(m, self.tol))
    }

    fn push(&mut self, m: Matrix<S>, word: Vec<usize>) {
        self.keys.push(key(&m));
        self.min_length.push(word.len());
        self.words.push(word);
        self.elements.push(m);
    }

    pub fn generators(&self) -> &[Matrix<S>] {
        &self.generators
    }

    /// Multiply a word out.
    pub fn evaluate(&self, word: &[usize]) -> Result<Matrix<S>> {
        let (&first, rest) = word.split_first().ok_or_else(|| Error::InvalidInput("empty word".into()))?;
        let g = |i: usize| {
            self.generators.get(i).ok_or_else(|| Error::InvalidInput(format!("generator index {i} out of range")))
        };
        rest.iter().try_fold(g(first)?.clone(), |acc, &i| acc.mul(g(i)?))
    }

    /// Longest shortest word among the elements.
    pub fn depth(&self) -> usize {
        self.min_length.iter().copied().max().unwrap_or(0)
    }
}

/// Breadth-first closure: words of length `L + 1` are formed by extending
/// the elements first reached at length `L` by one generator on the right.
pub fn closure<S: Semiring>(spec: &SemigroupSpec<S>) -> Result<SemigroupClosure<S>> {
    spec.validate()?;
    let mut c = SemigroupClosure {
        elements: Vec::new(),
        words: Vec::new(),
        min_length: Vec::new(),
        truncated: false,
        generators: spec.generators.clone(),
        keys: Vec::new(),
        tol: spec.tol,
    };
    let mut frontier = Vec::new();
    for (i, g) in spec.generators.iter().enumerate() {
        if c.find(g).is_none() {
            if c.len() == spec.closure_cap {
                return Err(Error::InvalidInput(format!(
                    "closure cap {} is smaller than the number of distinct generators",
                    spec.closure_cap
                )));
            }
            c.push(g.clone(), vec![i]);
            frontier.push(c.len() - 1);
        }
    }
    let mut length = 1;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &e in &frontier {
            for (i, g) in spec.generators.iter().enumerate() {
                let p = c.elements[e].mul(g)?;
                if c.find(&p).is_some() {
                    continue;
                }
                if length == spec.word_cap || c.len() == spec.closure_cap {
                    c.truncated = true;
                    return Ok(c);
                }
                let mut word = c.words[e].clone();
                word.push(i);
                c.push(p, word);
                next.push(c.len() - 1);
            }
        }
        frontier = next;
        length += 1;
    }
    Ok(c)
}

fn key<S: Semiring>(m: &Matrix<S>) -> f64 {
    m.data().iter().map(|x| x.modulus()).sum()
}

/// Indices of `S^(k)`, the elements that are products of `k` elements,
/// computed as `S^(k) = S^(k-1) S`. The flag reports products that fell
/// outside a truncated closure, in which case the layer is a lower bound.
pub fn layer_indices<S: Semiring>(c: &SemigroupClosure<S>, k: usize) -> Result<(Vec<usize>, bool)> {
    if k == 0 {
        return Err(Error::InvalidInput("layers start at k = 1".into()));
    }
    let (mut layers, partial_from) = layers_up_to(c, k)?;
    Ok((layers.pop().unwrap_or_default(), partial_from.is_some()))
}

/// `S^(1), ..., S^(q)`, with the first layer at which products left the
/// closure. Once two consecutive layers agree the chain is stationary.
fn layers_up_to<S: Semiring>(c: &SemigroupClosure<S>, q: usize) -> Result<(Vec<Vec<usize>>, Option<usize>)> {
    let mut layers = vec![(0..c.len()).collect::<Vec<usize>>()];
    let mut partial_from = None;
    while layers.len() < q {
        let last = &layers[layers.len() - 1];
        if layers.len() >= 2 && *last == layers[layers.len() - 2] {
            layers.push(last.clone());
            continue;
        }
        let mut member = vec![false; c.len()];
        for &e in last {
            for g in &c.generators {
                match c.find(&c.elements[e].mul(g)?) {
                    Some(idx) => member[idx] = true,
                    None => {
                        partial_from.get_or_insert(layers.len() + 1);
                    }
                }
            }
        }
        layers.push((0..c.len()).filter(|&i| member[i]).collect());
    }
    Ok((layers, partial_from))
}

/// The elements of `S^(k)`.
pub fn layer_k<S: Semiring>(c: &SemigroupClosure<S>, k: usize) -> Result<Vec<Matrix<S>>> {
    let (idx, _) = layer_indices(c, k)?;
    Ok(idx.into_iter().map(|i| c.elements[i].clone()).collect())
}

/// Pairwise `AB = BA` within the tolerance.
pub fn is_commutative<S: Semiring>(ms: &[Matrix<S>], tol: f64) -> bool {
    ms.iter()
        .enumerate()
        .all(|(i, a)| ms[i + 1..].iter().all(|b| a.commutes_with(b, tol).unwrap_or(false)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Commutative,
    /// `S^(k) = {0}` for this least `k`.
    Nilpotent(usize),
    /// `S^(k)` is commutative for this least `k`.
    Quasinilpotent(usize),
    Unknown,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Commutative => write!(f, "commutative"),
            Classification::Nilpotent(k) => write!(f, "nilpotent({k})"),
            Classification::Quasinilpotent(k) => write!(f, "quasinilpotent({k})"),
            Classification::Unknown => write!(f, "unknown"),
        }
    }
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown classification '{s}'"));
        match s {
            "commutative" => return Ok(Classification::Commutative),
            "unknown" => return Ok(Classification::Unknown),
            _ => {}
        }
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let k: usize = rest.strip_suffix(')').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match name {
            "nilpotent" => Ok(Classification::Nilpotent(k)),
            "quasinilpotent" => Ok(Classification::Quasinilpotent(k)),
            _ => Err(bad()),
        }
    }
}

/// Closure, layers and classification of a semigroup.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis<S> {
    pub closure: SemigroupClosure<S>,
    /// `layers[k - 1]` holds the indices of `S^(k)`, for `k` up to the
    /// quasinilpotency bound.
    pub layers: Vec<Vec<usize>>,
    pub classification: Classification,
    pub warnings: Vec<String>,
}

impl<S: Semiring> Analysis<S> {
    pub fn layer(&self, k: usize) -> Vec<Matrix<S>> {
        self.layers[k - 1].iter().map(|&i| self.closure.elements[i].clone()).collect()
    }
}

pub fn analyze<S: Semiring>(spec: &SemigroupSpec<S>) -> Result<Analysis<S>> {
    let closure = closure(spec)?;
    let mut warnings = Vec::new();
    if closure.truncated {
        warnings.push(format!(
            "closure truncated at {} elements (word cap {}, closure cap {}); layers are lower bounds",
            closure.len(),
            spec.word_cap,
            spec.closure_cap
        ));
    }
    let (layers, partial_from) = layers_up_to(&closure, spec.quasi_bound)?;
    if let Some(k) = partial_from {
        warnings.push(format!("products leave the computed closure from layer {k} on"));
    }
    let zero = |ms: &[usize]| !ms.is_empty() && ms.iter().all(|&i| closure.elements[i].is_zero());
    let classification = if is_commutative(&spec.generators, spec.tol) {
        Classification::Commutative
    } else if let Some(k) = (1..=spec.quasi_bound).find(|&k| zero(&layers[k - 1])) {
        Classification::Nilpotent(k)
    } else if let Some(k) = (2..=spec.quasi_bound).find(|&k| {
        let ms: Vec<Matrix<S>> = layers[k - 1].iter().map(|&i| closure.elements[i].clone()).collect();
        !ms.is_empty() && is_commutative(&ms, spec.tol)
    }) {
        Classification::Quasinilpotent(k)
    } else {
        Classification::Unknown
    };
    Ok(Analysis { closure, layers, classification, warnings })
}

/// Most specific of commutative, nilpotent(k), quasinilpotent(k), unknown.
pub fn classify<S: Semiring>(spec: &SemigroupSpec<S>) -> Result<Classification> {
    Ok(analyze(spec)?.classification)
}

/// A common eigenvector of a family with the eigenvalue and residual it
/// carries for each generator.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonEigenReport<S> {
    pub vector: Vector<S>,
    pub lambdas: Vec<S>,
    pub residuals: Vec<f64>,
    pub classification: Classification,
    pub pathway: Vec<String>,
    pub warnings: Vec<String>,
}

impl<S: Semiring> CommonEigenReport<S> {
    /// Measure `vector` against every generator and refuse to build a report
    /// if some residual exceeds `tol`.
    pub fn verified(
        gens: &[Matrix<S>],
        vector: Vector<S>,
        classification: Classification,
        pathway: Vec<String>,
        warnings: Vec<String>,
        tol: f64,
    ) -> Result<Self> {
        if vector.is_zero() {
            return Err(Error::InvariantViolation("common eigenvector is zero".into()));
        }
        let mut lambdas = Vec::with_capacity(gens.len());
        let mut residuals = Vec::with_capacity(gens.len());
        for (i, a) in gens.iter().enumerate() {
            let l = eigenvalue_estimate(a, &vector)?;
            let r = eigen_residual(a, l, &vector)?;
            if r > tol {
                return Err(Error::InvariantViolation(format!(
                    "generator {i}: residual {r:.3e} exceeds tolerance {tol:.1e}"
                )));
            }
            lambdas.push(l);
            residuals.push(r);
        }
        Ok(CommonEigenReport { vector, lambdas, residuals, classification, pathway, warnings })
    }

    /// Recompute the residuals against `gens`.
    pub fn check(&self, gens: &[Matrix<S>]) -> Result<Vec<f64>> {
        if gens.len() != self.lambdas.len() {
            return Err(Error::DimensionMismatch { expected: self.lambdas.len(), found: gens.len() });
        }
        gens.iter().zip(&self.lambdas).map(|(a, &l)| eigen_residual(a, l, &self.vector)).collect()
    }
}

/// Residual measured relative to the size of the matrix, for the products
/// inside a layer whose entries can be far from one.
fn scaled_residual<S: Semiring>(a: &Matrix<S>, l: S, v: &Vector<S>) -> Result<f64> {
    Ok(eigen_residual(a, l, v)? / a.norm_inf().max(1.0))
}

fn eigenvalues_on<S: Semiring>(ms: &[Matrix<S>], v: &Vector<S>, tol: f64) -> Option<Vec<S>> {
    ms.iter()
        .map(|a| {
            let l = eigenvalue_estimate(a, v).ok()?;
            (scaled_residual(a, l, v).ok()? <= tol).then_some(l)
        })
        .collect()
}

/// From a common eigenvector `u` of `S^(k)` to one of `S^(k-1)`.
///
/// If some element of `S^(k)` has a nonzero eigenvalue on `u`, then `u`
/// itself works. Otherwise `S^(k)` annihilates `u`; then either all of
/// `S^(k-1)` does too, or `B u` does the job for any `B` in `S^(k-1)` with
/// `B u != 0`, since every product of two elements of `S^(k-1)` lies in
/// `S^(k)`.
pub fn lift_eigenvector<S: Semiring>(u: &Vector<S>, layer_k: &[Matrix<S>], layer_km1: &[Matrix<S>], tol: f64) -> Result<Vector<S>> {
    let lambdas = eigenvalues_on(layer_k, u, tol)
        .ok_or_else(|| Error::Precondition("vector is not a common eigenvector of the upper layer".into()))?;
    let v = if lambdas.iter().any(|l| l.modulus() > tol) {
        u.clone()
    } else {
        let images: Vec<Vector<S>> = layer_km1.iter().map(|b| b.mul_vec(u)).collect::<Result<_>>()?;
        let best = images
            .iter()
            .zip(layer_km1)
            .map(|(y, b)| (y.norm_inf() / (u.norm_inf() * b.norm_inf().max(1.0)), y))
            .max_by(|x, y| x.0.total_cmp(&y.0));
        match best {
            Some((size, y)) if size > tol => y.normalized_max(),
            _ => u.clone(),
        }
    };
    if eigenvalues_on(layer_km1, &v, tol).is_none() {
        return Err(Error::InvariantViolation("lifted vector is not a common eigenvector of the lower layer".into()));
    }
    Ok(v)
}

/// Common eigenvector of a commuting family inside the invariant cone or
/// subspace spanned by the columns of `space`.
pub fn common_eigenvector_commutative<S: CommonSolver>(gens: &[Matrix<S>], space: &Matrix<S>, tol: f64) -> Result<CommonEigenReport<S>> {
    if !is_commutative(gens, tol) {
        return Err(Error::Precondition("generators do not commute".into()));
    }
    let opts = RefineOptions { tol, ..RefineOptions::default() };
    let r = common_eigenvector_in(gens, space, &opts)?;
    CommonEigenReport::verified(gens, r.vector, Classification::Commutative, r.pathway, Vec::new(), tol)
}

/// Common eigenvector of a commutative, nilpotent or quasinilpotent
/// semigroup: solved on `S^(t)` and lifted down to `S`.
pub fn common_eigenvector<S: CommonSolver>(spec: &SemigroupSpec<S>) -> Result<CommonEigenReport<S>> {
    spec.validate()?;
    if is_commutative(&spec.generators, spec.tol) {
        // no closure needed
        return common_eigenvector_commutative(&spec.generators, &Matrix::identity(spec.dim()), spec.tol);
    }
    let analysis = analyze(spec)?;
    match analysis.classification {
        Classification::Nilpotent(t) | Classification::Quasinilpotent(t) => solve_and_lift(spec, &analysis, t),
        Classification::Commutative | Classification::Unknown => Err(Error::UnknownClassification),
    }
}

/// Run the layer pipeline with a chosen `t`, whatever the classification:
/// `S^(t)` must be commutative (or zero).
pub fn common_eigenvector_via_layer<S: CommonSolver>(spec: &SemigroupSpec<S>, t: usize) -> Result<CommonEigenReport<S>> {
    if t == 0 {
        return Err(Error::InvalidInput("layers start at k = 1".into()));
    }
    let mut spec = spec.clone();
    spec.quasi_bound = spec.quasi_bound.max(t);
    let analysis = analyze(&spec)?;
    solve_and_lift(&spec, &analysis, t)
}

fn solve_and_lift<S: CommonSolver>(spec: &SemigroupSpec<S>, analysis: &Analysis<S>, t: usize) -> Result<CommonEigenReport<S>> {
    let n = spec.dim();
    let top = analysis.layer(t);
    let mut pathway = Vec::new();
    let mut u = if top.iter().all(|m| m.is_zero()) {
        pathway.push(format!("S^({t}) is zero: start from the all-ones vector"));
        Vector::ones(n)
    } else {
        if !is_commutative(&top, spec.tol) {
            return Err(Error::Precondition(format!("S^({t}) is not commutative")));
        }
        let opts = RefineOptions { tol: spec.tol, ..RefineOptions::default() };
        let r = common_eigenvector_in(&top, &Matrix::identity(n), &opts)?;
        pathway.push(format!("common eigenvector of S^({t}) ({} elements)", top.len()));
        pathway.extend(r.pathway.into_iter().map(|s| format!("  {s}")));
        r.vector
    };
    for k in (2..=t).rev() {
        let next = lift_eigenvector(&u, &analysis.layer(k), &analysis.layer(k - 1), spec.tol)?;
        let how = if next == u { "kept" } else { "replaced by its image" };
        pathway.push(format!("lift S^({k}) -> S^({}): vector {how}", k - 1));
        u = next;
    }
    CommonEigenReport::verified(
        &spec.generators,
        u,
        analysis.classification,
        pathway,
        analysis.warnings.clone(),
        spec.tol,
    )
}
