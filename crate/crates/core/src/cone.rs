//! Finitely generated max cones in the nonnegative orthant.
//!
//! A cone is stored by a generator matrix whose columns `g^1..g^m` are
//! nonzero; it denotes the set of max-combinations `⊕_j l_j g^j`, `l_j >= 0`.
//! Generator sets are kept reduced: a column lying in the cone spanned by
//! the remaining ones is dropped on construction.

use crate::error::{Error, Result};
use crate::linalg::{residual, Matrix, Vector};
use crate::scalar::{MaxTimes, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxCone {
    generators: Matrix<MaxTimes>,
}

/// A point of the ordinary convex hull of the sum-normalized slice of a cone.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSample {
    pub point: Vector<MaxTimes>,
    pub weights: Vec<f64>,
    pub basepoints: Vec<Vector<MaxTimes>>,
}

impl MaxCone {
    /// Cone spanned by the columns of `generators`, reduced with the default tolerance.
    pub fn new(generators: Matrix<MaxTimes>) -> Result<Self> {
        Self::with_tol(generators, DEFAULT_TOL)
    }

    pub fn with_tol(generators: Matrix<MaxTimes>, tol: f64) -> Result<Self> {
        if let Some(j) = (0..generators.cols()).find(|&j| generators.column(j).is_zero()) {
            return Err(Error::InvalidInput(format!("generator column {j} is zero")));
        }
        Ok(MaxCone { generators: reduce(&generators, tol) })
    }

    pub fn from_columns(columns: &[Vector<MaxTimes>]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidInput("cone needs at least one generator".into()));
        }
        Self::new(Matrix::from_columns(columns)?)
    }

    /// The whole orthant, generated by the coordinate vectors.
    pub fn orthant(n: usize) -> Self {
        MaxCone { generators: Matrix::identity(n) }
    }

    pub fn ray(v: &Vector<MaxTimes>) -> Result<Self> {
        Self::from_columns(std::slice::from_ref(v))
    }

    pub fn generators(&self) -> &Matrix<MaxTimes> {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> Vector<MaxTimes> {
        self.generators.column(j)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.generators.rows()
    }

    /// Number of (reduced) generators.
    pub fn len(&self) -> usize {
        self.generators.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: n })
        }
    }

    /// Greatest element of the cone below `y`: `⊕_j [y : g^j] g^j`.
    pub fn project(&self, y: &Vector<MaxTimes>) -> Result<Vector<MaxTimes>> {
        self.check_dim(y.len())?;
        project_onto(&self.generators, y)
    }

    /// `x` lies in the cone iff it is fixed by the projector.
    pub fn member(&self, x: &Vector<MaxTimes>, tol: f64) -> Result<bool> {
        Ok(self.project(x)?.approx_eq(x, tol))
    }

    /// `A W ⊆ W`, checked generator by generator.
    pub fn is_invariant(&self, a: &Matrix<MaxTimes>, tol: f64) -> Result<bool> {
        self.check_square(a)?;
        for g in self.generators.columns() {
            if !self.member(&a.mul_vec(&g)?, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_square(&self, a: &Matrix<MaxTimes>) -> Result<()> {
        let n = a.require_square()?;
        self.check_dim(n)
    }

    /// The action of `A` on the generators: `b_kj = [A g^j : g^k]`, so that
    /// `G B = A G` whenever the cone is invariant.
    pub fn induced_matrix(&self, a: &Matrix<MaxTimes>, tol: f64) -> Result<Matrix<MaxTimes>> {
        self.check_square(a)?;
        let m = self.len();
        let gens = self.generators.columns();
        let mut b = Matrix::zeros(m, m);
        for (j, g) in gens.iter().enumerate() {
            let image = a.mul_vec(g)?;
            for (k, h) in gens.iter().enumerate() {
                b.set(k, j, residual(&image, h)?);
            }
            let rebuilt = self.generators.mul_vec(&b.column(j))?;
            if !rebuilt.approx_eq(&image, tol) {
                return Err(Error::NotInvariant(format!(
                    "image of generator {j} leaves the cone (distance {:.3e})",
                    rebuilt.dist_inf(&image)
                )));
            }
        }
        Ok(b)
    }

    /// Greatest point of `{x ∈ W : max_i x_i = 1}`.
    pub fn greatest_slice_point(&self) -> Vector<MaxTimes> {
        let mut out = Vector::zeros(self.dim());
        for g in self.generators.columns() {
            let top = g.max_value();
            let scaled = g.scale(MaxTimes(1.0 / top));
            out = out.sup(&scaled).expect("generators share the ambient dimension");
        }
        out
    }

    /// Ordinary convex combination of sum-normalized generators.
    pub fn convex_sample(&self, weights: &[f64], indices: &[usize], tol: f64) -> Result<SliceSample> {
        if weights.len() != indices.len() || weights.is_empty() {
            return Err(Error::InvalidInput("weights and indices must be nonempty and of equal length".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        if let Some(&j) = indices.iter().find(|&&j| j >= self.len()) {
            return Err(Error::InvalidInput(format!("generator index {j} out of range")));
        }
        let basepoints: Vec<Vector<MaxTimes>> = indices
            .iter()
            .map(|&j| {
                let g = self.generator(j);
                g.scale(MaxTimes(1.0 / g.sum()))
            })
            .collect();
        let mut point = vec![0.0; self.dim()];
        for (w, b) in weights.iter().zip(&basepoints) {
            for (p, x) in point.iter_mut().zip(b.iter()) {
                *p += w * x.0;
            }
        }
        Ok(SliceSample { point: Vector::from_f64(&point)?, weights: weights.to_vec(), basepoints })
    }

    /// One application of `γ∘π`: project onto the cone, normalize by the
    /// ordinary coordinate sum, apply `A`, normalize again.
    pub fn gamma_pi_step(&self, a: &Matrix<MaxTimes>, x: &Vector<MaxTimes>) -> Result<Vector<MaxTimes>> {
        self.check_square(a)?;
        let p = self.project(x)?;
        let s = p.sum();
        if s == 0.0 {
            return Err(Error::Precondition(
                "projection of the point vanishes; it is not in the convex hull of the slice".into(),
            ));
        }
        let y = p.scale(MaxTimes(1.0 / s));
        let image = a.mul_vec(&y)?;
        let t = image.sum();
        if t == 0.0 {
            return Err(Error::Precondition(
                "matrix annihilates the projected point; it is a zero-eigenvalue eigenvector".into(),
            ));
        }
        Ok(image.scale(MaxTimes(1.0 / t)))
    }

    /// Smallest cone containing this one and closed under every matrix in
    /// `mats`, obtained by adding images of generators until nothing new
    /// appears. `None` when more than `cap` images had to be added, which is
    /// how an infinite orbit shows up.
    pub fn close_under(&self, mats: &[Matrix<MaxTimes>], cap: usize, tol: f64) -> Result<Option<MaxCone>> {
        for a in mats {
            self.check_square(a)?;
        }
        let mut cols = self.generators.columns();
        let mut frontier = cols.clone();
        let mut added = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for g in &frontier {
                for a in mats {
                    let image = a.mul_vec(g)?;
                    if image.is_zero() {
                        continue;
                    }
                    let current = Matrix::from_columns(&cols)?;
                    if !project_onto(&current, &image)?.approx_eq(&image, tol) {
                        cols.push(image.clone());
                        next.push(image);
                        added += 1;
                        if added > cap {
                            return Ok(None);
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(Some(MaxCone::with_tol(Matrix::from_columns(&cols)?, tol)?))
    }
}

fn project_onto(generators: &Matrix<MaxTimes>, y: &Vector<MaxTimes>) -> Result<Vector<MaxTimes>> {
    let mut out = Vector::zeros(y.len());
    for g in generators.columns() {
        let r = residual(y, &g)?;
        out = out.sup(&g.scale(r))?;
    }
    Ok(out)
}

/// Drop every column lying in the cone of the columns kept so far plus the
/// ones not yet examined.
fn reduce(generators: &Matrix<MaxTimes>, tol: f64) -> Matrix<MaxTimes> {
    let mut keep: Vec<Vector<MaxTimes>> = generators.columns();
    let mut j = 0;
    while j < keep.len() {
        if keep.len() == 1 {
            break;
        }
        let others: Vec<Vector<MaxTimes>> =
            keep.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| v.clone()).collect();
        let others = Matrix::from_columns(&others).expect("equal lengths");
        let g = &keep[j];
        let redundant = project_onto(&others, g).map(|p| p.approx_eq(g, tol)).unwrap_or(false);
        if redundant {
            keep.remove(j);
        } else {
            j += 1;
        }
    }
    Matrix::from_columns(&keep).expect("equal lengths")
}

impl MaxTimes {
    /// Convenience for building fixtures.
    pub fn vec(xs: &[f64]) -> Vector<MaxTimes> {
        Vector::from_f64(xs).expect("valid max-times entries")
    }

    pub fn mat(rows: &[&[f64]]) -> Matrix<MaxTimes> {
        Matrix::from_f64_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).expect("valid max-times entries")
    }
}

impl Default for MaxCone {
    fn default() -> Self {
        MaxCone::orthant(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector<MaxTimes> {
        MaxTimes::vec(xs)
    }

    fn cone(cols: &[&[f64]]) -> MaxCone {
        MaxCone::from_columns(&cols.iter().map(|c| v(c)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn projection_examples() {
        let w = cone(&[&[1.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(w.project(&v(&[0.5, 2.0])).unwrap(), v(&[0.5, 0.5]));
        assert_eq!(w.project(&v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
        let inside = v(&[3.0, 1.5]);
        assert_eq!(w.project(&inside).unwrap(), inside);
        assert!(w.project(&v(&[1.0])).is_err());
    }

    #[test]
    fn membership_examples() {
        let w = cone(&[&[1.0, 0.0], &[1.0, 1.0]]);
        assert!(w.member(&v(&[1.0, 0.0]), DEFAULT_TOL).unwrap());
        assert!(!w.member(&v(&[0.0, 1.0]), DEFAULT_TOL).unwrap());
        assert!(w.member(&v(&[0.0, 0.0]), DEFAULT_TOL).unwrap());
    }

    #[test]
    fn invariance_examples() {
        let a = MaxTimes::mat(&[&[2.0, 1.0], &[1.0, 0.5]]);
        assert!(MaxCone::orthant(2).is_invariant(&a, DEFAULT_TOL).unwrap());
        assert!(cone(&[&[1.0, 0.5]]).is_invariant(&a, DEFAULT_TOL).unwrap());
        let b = MaxTimes::mat(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(!cone(&[&[1.0, 0.0]]).is_invariant(&b, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn induced_matrix_examples() {
        let a = MaxTimes::mat(&[&[2.0, 1.0], &[1.0, 0.5]]);
        assert_eq!(MaxCone::orthant(2).induced_matrix(&a, DEFAULT_TOL).unwrap(), a);
        let ray = cone(&[&[1.0, 0.5]]);
        assert_eq!(ray.induced_matrix(&a, DEFAULT_TOL).unwrap(), MaxTimes::mat(&[&[2.0]]));
        let b = MaxTimes::mat(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(matches!(cone(&[&[1.0, 0.0]]).induced_matrix(&b, DEFAULT_TOL), Err(Error::NotInvariant(_))));
    }

    #[test]
    fn induced_matrix_on_two_eigenvectors() {
        // diag(2, 1) on the cone spanned by both coordinate axes and their sum
        let a = MaxTimes::mat(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let w = cone(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = w.induced_matrix(&a, DEFAULT_TOL).unwrap();
        let g = w.generators();
        assert_eq!(g.mul(&b).unwrap(), a.mul(g).unwrap());
    }

    #[test]
    fn greatest_slice_point_examples() {
        assert_eq!(MaxCone::orthant(3).greatest_slice_point(), v(&[1.0, 1.0, 1.0]));
        assert_eq!(cone(&[&[2.0, 0.0], &[1.0, 1.0]]).greatest_slice_point(), v(&[1.0, 1.0]));
        assert_eq!(cone(&[&[4.0, 2.0]]).greatest_slice_point(), v(&[1.0, 0.5]));
    }

    #[test]
    fn convex_sample_examples() {
        let w = cone(&[&[1.0, 3.0]]);
        let s = w.convex_sample(&[1.0], &[0], DEFAULT_TOL).unwrap();
        assert_eq!(s.point, v(&[0.25, 0.75]));
        let w = MaxCone::orthant(2);
        let s = w.convex_sample(&[0.5, 0.5], &[0, 1], DEFAULT_TOL).unwrap();
        assert_eq!(s.point, v(&[0.5, 0.5]));
        assert!(!w.project(&s.point).unwrap().is_zero());
        assert!(w.convex_sample(&[0.5, 0.4], &[0, 1], DEFAULT_TOL).is_err());
        assert!(w.convex_sample(&[1.0], &[5], DEFAULT_TOL).is_err());
    }

    #[test]
    fn gamma_pi_examples() {
        let a = MaxTimes::mat(&[&[2.0, 1.0], &[1.0, 0.5]]);
        let w = MaxCone::orthant(2);
        let out = w.gamma_pi_step(&a, &v(&[0.5, 0.5])).unwrap();
        assert!(out.approx_eq(&v(&[2.0 / 3.0, 1.0 / 3.0]), 1e-15));
        // a sum-normalized eigenvector is a fixed point
        let x = v(&[2.0 / 3.0, 1.0 / 3.0]);
        let fixed = w.gamma_pi_step(&a, &x).unwrap();
        assert!(fixed.approx_eq(&x, 1e-15));
        let lambda = a.mul_vec(&x).unwrap().sum();
        assert!(a.mul_vec(&x).unwrap().approx_eq(&x.scale(MaxTimes(lambda)), 1e-15));
        assert!((lambda - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_pi_reports_zero_denominators() {
        let w = cone(&[&[1.0, 0.0]]);
        let a = MaxTimes::mat(&[&[2.0, 1.0], &[1.0, 0.5]]);
        assert!(w.gamma_pi_step(&a, &v(&[0.0, 1.0])).is_err());
        let nil = MaxTimes::mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(w.gamma_pi_step(&nil, &v(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn reduction_drops_redundant_generators() {
        let w = cone(&[&[1.0, 0.25], &[4.0, 1.0], &[1.0, 0.0], &[1.0, 0.5]]);
        // (1, 0.25) = (1, 0) ⊕ 0.5 (1, 0.5)
        assert_eq!(w.len(), 2);
        for g in [v(&[1.0, 0.25]), v(&[4.0, 1.0]), v(&[1.0, 0.0]), v(&[1.0, 0.5])] {
            assert!(w.member(&g, DEFAULT_TOL).unwrap());
        }
        let dup = cone(&[&[1.0, 0.25], &[4.0, 1.0]]);
        assert_eq!(dup.len(), 1);
        assert!(MaxCone::new(MaxTimes::mat(&[&[0.0, 1.0], &[0.0, 1.0]])).is_err());
    }

    #[test]
    fn closure_makes_cones_invariant() {
        let a = MaxTimes::mat(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let w = cone(&[&[1.0, 0.0]]);
        let closed = w.close_under(&[a.clone()], 8, DEFAULT_TOL).unwrap().unwrap();
        assert!(closed.is_invariant(&a, DEFAULT_TOL).unwrap());
        assert_eq!(closed.len(), 2);
        // orbit of (1,1) under diag(2,1) has infinitely many extremal directions
        let d = MaxTimes::mat(&[&[2.0, 0.0], &[0.0, 1.0]]);
        assert!(cone(&[&[1.0, 1.0]]).close_under(&[d], 6, DEFAULT_TOL).unwrap().is_none());
    }
}
