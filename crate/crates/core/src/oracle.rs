//! Brute-force references used to check the solvers: enumeration of simple
//! cycles, eigenvectors from exhaustive row-maximum patterns, and seeded
//! commuting families.
//!
//! The code here is deliberately naive and does not call into the
//! production solvers.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{AnyMatrix, Matrix, Vector};
use crate::scalar::{DomainTag, MaxTimes, NonNeg, Semiring};

/// Every simple cycle of the digraph of nonzero entries, each listed once
/// starting from its smallest node, with its geometric mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleList {
    pub cycles: Vec<(Vec<usize>, f64)>,
}

impl CycleList {
    /// Largest mean, or zero when there is no cycle.
    pub fn max_mean(&self) -> f64 {
        self.cycles.iter().map(|c| c.1).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

fn exact_exponent(w: f64) -> Option<i64> {
    let e = w.log2();
    (e.fract() == 0.0 && e.exp2() == w).then_some(e as i64)
}

/// Geometric mean of arc weights. Powers of two are handled by summing
/// exponents, so the only rounding is in the final division.
fn geometric_mean(weights: &[f64]) -> f64 {
    let len = weights.len() as f64;
    let exps: Option<Vec<i64>> = weights.iter().map(|&w| exact_exponent(w)).collect();
    match exps {
        Some(e) => (e.iter().sum::<i64>() as f64 / len).exp2(),
        None => weights.iter().product::<f64>().powf(1.0 / len),
    }
}

pub fn enumerate_cycles(a: &Matrix<MaxTimes>) -> Result<CycleList> {
    let n = a.require_square()?;
    if n > 8 {
        return Err(Error::InvalidInput(format!("cycle enumeration refused for n = {n} > 8")));
    }
    let mut cycles = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        walk(a, start, &mut path, &mut on_path, &mut cycles);
    }
    Ok(CycleList { cycles })
}

fn walk(a: &Matrix<MaxTimes>, start: usize, path: &mut Vec<usize>, on_path: &mut [bool], out: &mut Vec<(Vec<usize>, f64)>) {
    let n = a.rows();
    let last = *path.last().unwrap();
    if a.get(last, start).0 > 0.0 {
        let mut weights: Vec<f64> = path.windows(2).map(|w| a.get(w[0], w[1]).0).collect();
        weights.push(a.get(last, start).0);
        out.push((path.clone(), geometric_mean(&weights)));
    }
    for next in start + 1..n {
        if !on_path[next] && a.get(last, next).0 > 0.0 {
            on_path[next] = true;
            path.push(next);
            walk(a, start, path, on_path, out);
            path.pop();
            on_path[next] = false;
        }
    }
}

/// All eigenvectors for `lambda` that arise from a single assignment of
/// each supported row to the column attaining its maximum, up to scaling.
///
/// For every support set and every assignment whose functional graph is
/// connected, the equalities `a_{i s(i)} x_{s(i)} = lambda x_i` fix `x` up
/// to scale; the candidate is kept when the full system
/// `max_j a_ij x_j = lambda x_i` holds.
pub fn saturation_eigensolve(a: &Matrix<MaxTimes>, lambda: MaxTimes) -> Result<Vec<Vector<MaxTimes>>> {
    let n = a.require_square()?;
    if n > 4 {
        return Err(Error::InvalidInput(format!("saturation search refused for n = {n} > 4")));
    }
    if !(lambda.0 > 0.0) {
        return Err(Error::InvalidInput("saturation search needs a positive eigenvalue".into()));
    }
    let ll = lambda.0.log2();
    let mut found: Vec<Vec<f64>> = Vec::new();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let closed = (0..n)
            .filter(|&i| mask & (1 << i) == 0)
            .all(|i| support.iter().all(|&j| a.get(i, j).0 == 0.0));
        if !closed {
            continue;
        }
        let choices: Vec<Vec<usize>> =
            support.iter().map(|&i| support.iter().copied().filter(|&j| a.get(i, j).0 > 0.0).collect()).collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut odometer = vec![0usize; support.len()];
        loop {
            let mut sigma = vec![usize::MAX; n];
            for (k, &i) in support.iter().enumerate() {
                sigma[i] = choices[k][odometer[k]];
            }
            if let Some(x) = solve_assignment(a, &support, &sigma, ll, lambda.0) {
                if !found.iter().any(|y| close(y, &x)) {
                    found.push(x);
                }
            }
            let mut k = 0;
            while k < odometer.len() {
                odometer[k] += 1;
                if odometer[k] < choices[k].len() {
                    break;
                }
                odometer[k] = 0;
                k += 1;
            }
            if k == odometer.len() {
                break;
            }
        }
    }
    found.into_iter().map(|x| Vector::from_f64(&x)).collect()
}

fn close(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-9)
}

fn solve_assignment(a: &Matrix<MaxTimes>, support: &[usize], sigma: &[usize], ll: f64, lambda: f64) -> Option<Vec<f64>> {
    let n = a.rows();
    let m = support.len();
    // a node on the cycle reached from the first supported node
    let mut c0 = support[0];
    for _ in 0..m {
        c0 = sigma[c0];
    }
    let mut cycle = vec![c0];
    let mut u = sigma[c0];
    while u != c0 {
        cycle.push(u);
        u = sigma[u];
    }
    // connected: every supported node runs into this cycle
    for &i in support {
        let mut u = i;
        for _ in 0..m {
            u = sigma[u];
        }
        if !cycle.contains(&u) {
            return None;
        }
    }
    let cycle_sum: f64 = cycle.iter().map(|&i| a.get(i, sigma[i]).0.log2() - ll).sum();
    if cycle_sum.abs() > 1e-12 * cycle.len() as f64 * (1.0 + ll.abs()) {
        return None;
    }
    let mut y = vec![f64::NAN; n];
    y[c0] = 0.0;
    for &i in cycle.iter().skip(1).rev() {
        y[i] = a.get(i, sigma[i]).0.log2() + y[sigma[i]] - ll;
    }
    for _ in 0..m {
        for &i in support {
            if y[i].is_nan() && !y[sigma[i]].is_nan() {
                y[i] = a.get(i, sigma[i]).0.log2() + y[sigma[i]] - ll;
            }
        }
    }
    let mut x = vec![0.0; n];
    for &i in support {
        x[i] = y[i].exp2();
    }
    let top = x.iter().copied().fold(0.0, f64::max);
    for v in x.iter_mut() {
        *v /= top;
    }
    for i in 0..n {
        let lhs = (0..n).map(|j| a.get(i, j).0 * x[j]).fold(0.0, f64::max);
        let rhs = lambda * x[i];
        if (lhs - rhs).abs() > 1e-9 * lhs.max(rhs) {
            return None;
        }
    }
    Some(x)
}

/// `c0 I + c1 A + c2 A^2 + c3 A^3` in the domain's arithmetic.
pub fn eval_poly<S: Semiring>(coeffs: &[f64], a: &Matrix<S>) -> Result<Matrix<S>> {
    let n = a.require_square()?;
    let mut acc = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n);
    for (k, &c) in coeffs.iter().enumerate() {
        if k > 0 {
            power = power.mul(a)?;
        }
        if c != 0.0 {
            acc = acc.add(&power.scale(S::from_f64(c)))?;
        }
    }
    Ok(acc)
}

const POLY_GRID: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const MAX_TIMES_GRID: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
const POSITIVE_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

fn random_poly(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let degree = rng.gen_range(1..=3);
    let mut c: Vec<f64> = (0..=degree).map(|_| POLY_GRID[rng.gen_range(0..POLY_GRID.len())]).collect();
    if c.iter().all(|&x| x == 0.0) {
        c[1] = 1.0;
    }
    c
}

fn check_family_size(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > 8 || m == 0 || m > 5 {
        return Err(Error::InvalidInput(format!("family size out of range: n = {n}, m = {m}")));
    }
    Ok(())
}

/// Polynomials with coefficients in `{0, 1/2, 1, 2}` of a max-times base
/// matrix with entries in `{0, 1/4, 1/2, 1, 2, 4}`; all arithmetic is exact.
pub fn commuting_family_max_times(seed: u64, n: usize, m: usize) -> Result<Vec<Matrix<MaxTimes>>> {
    check_family_size(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, MaxTimes(MAX_TIMES_GRID[rng.gen_range(0..MAX_TIMES_GRID.len())]));
        }
    }
    if a.is_zero() {
        a.set(0, 0, MaxTimes(1.0));
    }
    (0..m).map(|_| eval_poly(&random_poly(&mut rng), &a)).collect()
}

/// Polynomials with coefficients in `{0, 1/2, 1, 2}` of a positive base
/// matrix with entries in `{1/4, 1/2, 1, 2}`.
pub fn commuting_family_nonneg(seed: u64, n: usize, m: usize) -> Result<Vec<Matrix<NonNeg>>> {
    check_family_size(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..n).map(|_| POSITIVE_GRID[rng.gen_range(0..POSITIVE_GRID.len())]).collect()).collect();
    let a = Matrix::from_f64_rows(&rows)?;
    (0..m).map(|_| eval_poly(&random_poly(&mut rng), &a)).collect()
}

/// Polynomials of `A = P D P^-1` with `P` unit lower triangular with entries
/// in `{-1, 0, 1}` and `D` diagonal with Gaussian integers of parts in
/// `-2..=2`. `A` has Gaussian-integer entries, so the family is exact.
pub fn commuting_family_complex(seed: u64, n: usize, m: usize) -> Result<Vec<Matrix<Complex64>>> {
    check_family_size(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Matrix::<Complex64>::identity(n);
    for i in 0..n {
        for j in 0..i {
            p.set(i, j, Complex64::new(rng.gen_range(-1..=1) as f64, 0.0));
        }
    }
    let d: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64)).collect();
    let a = p.mul(&Matrix::diagonal(&d))?.mul(&unit_lower_inverse(&p))?;
    (0..m).map(|_| eval_poly(&random_poly(&mut rng), &a)).collect()
}

/// Inverse of a unit lower triangular matrix by forward substitution.
fn unit_lower_inverse(p: &Matrix<Complex64>) -> Matrix<Complex64> {
    let n = p.rows();
    let mut inv = Matrix::<Complex64>::identity(n);
    for i in 0..n {
        for j in 0..i {
            let s: Complex64 = (j..i).map(|k| p.get(i, k) * inv.get(k, j)).sum();
            inv.set(i, j, -s);
        }
    }
    inv
}

/// Seeded family `{p_1(A), ..., p_m(A)}` of commuting matrices in `domain`.
pub fn random_commuting_family(seed: u64, n: usize, m: usize, domain: DomainTag) -> Result<Vec<AnyMatrix>> {
    Ok(match domain {
        DomainTag::MaxTimes => commuting_family_max_times(seed, n, m)?.into_iter().map(Into::into).collect(),
        DomainTag::NonnegReal => commuting_family_nonneg(seed, n, m)?.into_iter().map(Into::into).collect(),
        DomainTag::Complex => commuting_family_complex(seed, n, m)?.into_iter().map(Into::into).collect(),
    })
}

/// Max-times matrix whose nonzero entries are powers of two with exponents
/// in `-e..=e`; each entry is zero with probability `sparsity`.
pub fn integer_exponent_matrix(rng: &mut impl Rng, n: usize, e: i32, sparsity: f64) -> Matrix<MaxTimes> {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if !rng.gen_bool(sparsity) {
                a.set(i, j, MaxTimes((rng.gen_range(-e..=e) as f64).exp2()));
            }
        }
    }
    a
}
