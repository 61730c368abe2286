//! Dense vectors and matrices over a scalar domain.

use std::ops::Index;

use crate::error::{Error, Result};
use num_complex::Complex64;

use crate::scalar::{DomainTag, MaxTimes, NonNeg, Ordered, Scalar, Semiring};

/// A vector of length at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<S>(Vec<S>);

impl<S: Semiring> Vector<S> {
    pub fn new(entries: Vec<S>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("vector must have at least one entry".into()));
        }
        if let Some(i) = entries.iter().position(|x| !x.is_valid()) {
            return Err(Error::InvalidInput(format!(
                "entry {i} ({:?}) is not a valid {} scalar",
                entries[i],
                S::DOMAIN
            )));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![S::zero(); n])
    }

    pub fn ones(n: usize) -> Self {
        Vector(vec![S::one(); n])
    }

    /// The `i`-th coordinate vector.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![S::zero(); n];
        v[i] = S::one();
        Vector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.0.iter()
    }

    pub fn scale(&self, r: S) -> Self {
        Vector(self.0.iter().map(|&x| r.mul(x)).collect())
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Vector(self.0.iter().map(|&x| f(x)).collect())
    }

    /// Largest coordinate modulus.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// Index of the coordinate of largest modulus (first on ties).
    pub fn argmax_modulus(&self) -> usize {
        let mut best = 0;
        for (i, x) in self.0.iter().enumerate() {
            if x.modulus() > self.0[best].modulus() {
                best = i;
            }
        }
        best
    }

    /// Rescale so the largest coordinate has modulus one. Zero stays zero.
    pub fn normalized_max(&self) -> Self {
        let i = self.argmax_modulus();
        let pivot = self.0[i];
        if pivot.is_zero() {
            return self.clone();
        }
        let inv = S::one().div(pivot);
        self.scale(inv)
    }

    /// `|x - y|_inf <= tol * max(1, |x|_inf, |y|_inf)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let diff = self.0.iter().zip(&other.0).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max);
        diff <= tol * 1f64.max(self.norm_inf()).max(other.norm_inf())
    }

    /// Max-norm distance.
    pub fn dist_inf(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max)
    }

    /// Domain sum (componentwise).
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a.add(*b)).collect()))
    }
}

impl<S: Ordered> Vector<S> {
    pub fn leq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.value() <= b.value())
    }

    /// Componentwise `self <= other` up to the relative tolerance.
    pub fn leq_tol(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.norm_inf()).max(other.norm_inf());
        self.len() == other.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a.value() <= b.value() + tol * scale)
    }

    /// Componentwise maximum.
    pub fn sup(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Vector(
            self.0.iter().zip(&other.0).map(|(a, b)| S::from_value(a.value().max(b.value()))).collect(),
        ))
    }

    /// Ordinary coordinate sum.
    pub fn sum(&self) -> f64 {
        self.0.iter().map(|x| x.value()).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.0.iter().map(|x| x.value()).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.value()).collect()
    }

    pub fn from_f64(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| S::from_value(x)).collect())
    }
}

impl<S> Index<usize> for Vector<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<'a, S> IntoIterator for &'a Vector<S> {
    type Item = &'a S;
    type IntoIter = std::slice::Iter<'a, S>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Semiring> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix must be at least 1x1".into()));
        }
        check_len(rows * cols, data.len())?;
        if let Some(k) = data.iter().position(|x| !x.is_valid()) {
            return Err(Error::InvalidInput(format!(
                "entry ({}, {}) = {:?} is not a valid {} scalar",
                k / cols,
                k % cols,
                data[k],
                S::DOMAIN
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, found: bad.len() });
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vector<S>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vector::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        let m = columns.len();
        Ok(Self::from_fn(n, m, |i, j| columns[j][i]))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn diagonal(d: &[S]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { S::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vector<S> {
        Vector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn columns(&self) -> Vec<Vector<S>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, r: S) -> Self {
        self.map(|x| r.mul(x))
    }

    /// Entrywise domain sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: other.rows * other.cols });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(*b)).collect(),
        })
    }

    pub fn mul_vec(&self, x: &Vector<S>) -> Result<Vector<S>> {
        check_len(self.cols, x.len())?;
        Ok(Vector(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).fold(S::zero(), |acc, (a, b)| acc.add(a.mul(*b))))
                .collect(),
        ))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_len(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx].add(a.mul(other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn power(&self, t: u32) -> Result<Self> {
        let n = self.require_square()?;
        let mut result = Self::identity(n);
        let mut base = self.clone();
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Relative max-norm closeness.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let diff = self.data.iter().zip(&other.data).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max);
        diff <= tol * 1f64.max(self.norm_inf()).max(other.norm_inf())
    }

    /// Whether `self * other == other * self` within tolerance.
    pub fn commutes_with(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(self.mul(other)?.approx_eq(&other.mul(self)?, tol))
    }
}

impl<S: Ordered> Matrix<S> {
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| S::from_value(x)).collect()).collect())
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x.value()).collect()).collect()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `A x` in the domain's (add, mul).
pub fn mat_vec<S: Semiring>(a: &Matrix<S>, x: &Vector<S>) -> Result<Vector<S>> {
    a.mul_vec(x)
}

/// `t`-fold product; `t = 0` gives the identity.
pub fn mat_power<S: Semiring>(a: &Matrix<S>, t: u32) -> Result<Matrix<S>> {
    a.power(t)
}

/// Greatest `l` with `l w <= v`: the minimum of `v_i / w_i` over the support of `w`.
pub fn residual<S: Ordered>(v: &Vector<S>, w: &Vector<S>) -> Result<S> {
    check_len(v.len(), w.len())?;
    let mut best: Option<f64> = None;
    for (a, b) in v.iter().zip(w.iter()) {
        let b = b.value();
        if b != 0.0 {
            let r = a.value() / b;
            best = Some(best.map_or(r, |m| m.min(r)));
        }
    }
    let mut r = best.ok_or(Error::UndefinedResidual)?;
    if r == 0.0 {
        // a zero of `v` against a positive entry of `w`; bumping up would
        // only find underflowing products
        return Ok(S::from_value(0.0));
    }
    // make `r w <= v` hold in floating point, and keep `r` maximal with that property
    let fits = |l: f64| v.iter().zip(w.iter()).all(|(a, b)| l * b.value() <= a.value());
    while r > 0.0 && !fits(r) {
        r = r.next_down();
    }
    for _ in 0..4 {
        if fits(r.next_up()) {
            r = r.next_up();
        } else {
            break;
        }
    }
    Ok(S::from_value(r))
}

/// Componentwise supremum of a finite nonempty set of vectors.
pub fn sup_of<S: Ordered>(vs: &[Vector<S>]) -> Result<Vector<S>> {
    let (first, rest) = vs.split_first().ok_or_else(|| Error::InvalidInput("sup of empty set".into()))?;
    rest.iter().try_fold(first.clone(), |acc, v| acc.sup(v))
}

/// `|A v - l v|_inf / |v|_inf`; infinite when `v = 0`.
pub fn eigen_residual<S: Semiring>(a: &Matrix<S>, lambda: S, v: &Vector<S>) -> Result<f64> {
    let av = a.mul_vec(v)?;
    let norm = v.norm_inf();
    if norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    let err = av.iter().zip(v.iter()).map(|(x, y)| x.dist(lambda.mul(*y))).fold(0.0, f64::max);
    Ok(err / norm)
}

/// The eigenvalue `v` would carry for `A`, read off at the largest coordinate.
pub fn eigenvalue_estimate<S: Semiring>(a: &Matrix<S>, v: &Vector<S>) -> Result<S> {
    let av = a.mul_vec(v)?;
    let i = v.argmax_modulus();
    if v[i].is_zero() {
        return Err(Error::Precondition("eigenvalue of the zero vector".into()));
    }
    Ok(av[i].div(v[i]))
}

/// A matrix whose domain is only known at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Complex(Matrix<Complex64>),
    NonnegReal(Matrix<NonNeg>),
    MaxTimes(Matrix<MaxTimes>),
}

impl AnyMatrix {
    pub fn domain(&self) -> DomainTag {
        match self {
            AnyMatrix::Complex(_) => DomainTag::Complex,
            AnyMatrix::NonnegReal(_) => DomainTag::NonnegReal,
            AnyMatrix::MaxTimes(_) => DomainTag::MaxTimes,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Complex(m) => (m.rows(), m.cols()),
            AnyMatrix::NonnegReal(m) => (m.rows(), m.cols()),
            AnyMatrix::MaxTimes(m) => (m.rows(), m.cols()),
        }
    }

    /// Entry `(i, j)` as a tagged scalar.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        match self {
            AnyMatrix::Complex(m) => m.get(i, j).to_scalar(),
            AnyMatrix::NonnegReal(m) => m.get(i, j).to_scalar(),
            AnyMatrix::MaxTimes(m) => m.get(i, j).to_scalar(),
        }
    }
}

impl From<Matrix<Complex64>> for AnyMatrix {
    fn from(m: Matrix<Complex64>) -> Self {
        AnyMatrix::Complex(m)
    }
}

impl From<Matrix<NonNeg>> for AnyMatrix {
    fn from(m: Matrix<NonNeg>) -> Self {
        AnyMatrix::NonnegReal(m)
    }
}

impl From<Matrix<MaxTimes>> for AnyMatrix {
    fn from(m: Matrix<MaxTimes>) -> Self {
        AnyMatrix::MaxTimes(m)
    }
}

macro_rules! any_matrix_variant {
    ($ty:ty, $variant:ident) => {
        impl TryFrom<AnyMatrix> for Matrix<$ty> {
            type Error = Error;

            fn try_from(m: AnyMatrix) -> Result<Self> {
                match m {
                    AnyMatrix::$variant(m) => Ok(m),
                    other => Err(Error::DomainMismatch { left: DomainTag::$variant, right: other.domain() }),
                }
            }
        }
    };
}

any_matrix_variant!(Complex64, Complex);
any_matrix_variant!(NonNeg, NonnegReal);
any_matrix_variant!(MaxTimes, MaxTimes);
