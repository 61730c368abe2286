//! Acceptance suite: twelve criteria, one PASS/FAIL line each. Runs without
//! the libtest harness so the lines always show up in `cargo test` output.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use commoneig::classical::{char_poly, eigenpairs_complex, nonneg_eigenpairs, perron_eigenpair, poly_roots};
use commoneig::cli;
use commoneig::commuting::CommonSolver;
use commoneig::io::{
    parse_matrix_str, parse_report_str, to_json, write_matrix_file, write_vector_file, Entry, MatrixFile, ReportFile, Status,
};
use commoneig::linalg::{eigen_residual, eigenvalue_estimate, residual};
use commoneig::oracle::{
    commuting_family_complex, commuting_family_max_times, commuting_family_nonneg, enumerate_cycles, integer_exponent_matrix,
    random_commuting_family, saturation_eigensolve,
};
use commoneig::semigroup::{common_eigenvector, common_eigenvector_commutative, common_eigenvector_via_layer, SemigroupSpec};
use commoneig::tropical::{
    cycle_mean, eigencone, eigenvector_in_cone, max_cycle_mean, principal_eigencone, principal_eigenpair, shpiz_iteration,
    tropical_spectrum, ShpizOutcome,
};
use commoneig::{AnyMatrix, Classification, Complex64, DomainTag, Error, Matrix, MaxCone, MaxTimes, NonNeg, Semiring, Vector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T>(r: commoneig::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

const GRID: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];

fn filled<S: Semiring>(n: usize, mut f: impl FnMut() -> S) -> Matrix<S> {
    Matrix::from_rows((0..n).map(|_| (0..n).map(|_| f()).collect()).collect()).unwrap()
}

fn grid_matrix(rng: &mut impl Rng, n: usize) -> Matrix<MaxTimes> {
    filled(n, || MaxTimes(GRID[rng.gen_range(0..GRID.len())]))
}

fn grid_vector(rng: &mut impl Rng, n: usize) -> Vector<MaxTimes> {
    loop {
        let v = Vector::new((0..n).map(|_| MaxTimes(GRID[rng.gen_range(0..GRID.len())])).collect()).unwrap();
        if !v.is_zero() {
            return v;
        }
    }
}

fn continuous_vector(rng: &mut impl Rng, n: usize) -> Vector<MaxTimes> {
    loop {
        let v = Vector::new(
            (0..n).map(|_| MaxTimes(if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.01..5.0) })).collect(),
        )
        .unwrap();
        if !v.is_zero() {
            return v;
        }
    }
}

fn random_cone(rng: &mut impl Rng, n: usize, m: usize, exact: bool) -> MaxCone {
    let cols: Vec<Vector<MaxTimes>> =
        (0..m).map(|_| if exact { grid_vector(rng, n) } else { continuous_vector(rng, n) }).collect();
    MaxCone::from_columns(&cols).unwrap()
}

/// Max-combination of generators with random coefficients.
fn cone_point(rng: &mut impl Rng, w: &MaxCone, exact: bool) -> Vector<MaxTimes> {
    let mut x = Vector::zeros(w.dim());
    let k = rng.gen_range(1..=w.len());
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.shuffle(rng);
    for &j in &idx[..k] {
        let c = if exact { [0.25, 0.5, 1.0, 2.0][rng.gen_range(0..4)] } else { rng.gen_range(0.05..3.0) };
        x = x.sup(&w.generator(j).scale(MaxTimes(c))).unwrap();
    }
    x
}

fn no_zero_column(a: &Matrix<MaxTimes>) -> bool {
    (0..a.cols()).all(|j| !a.column(j).is_zero())
}

// 1. max cycle mean against cycle enumeration

fn spectral_oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut cyclic = 0;
    for case in 0..1000 {
        let n = 2 + case % 6;
        let a = integer_exponent_matrix(&mut rng, n, 3, 0.5);
        let (lambda, cert) = ok(max_cycle_mean(&a), "max_cycle_mean")?;
        let oracle = ok(enumerate_cycles(&a), "enumerate_cycles")?.max_mean();
        ensure!(lambda.0 == oracle, "case {case}: Karp gives {} but enumeration gives {oracle}", lambda.0);
        if lambda.0 > 0.0 {
            cyclic += 1;
            ensure!(cycle_mean(&a, &cert.cycle) == lambda, "case {case}: certificate cycle has a different mean");
        }
    }
    Ok(format!("1000 matrices ({cyclic} with cycles), exact equality"))
}

// 2. residual of every eigenpair in the fixture corpus

struct Tally {
    pairs: usize,
    worst: f64,
    errors: usize,
}

impl Tally {
    fn add<S: Semiring>(&mut self, a: &Matrix<S>, lambda: S, v: &Vector<S>, what: &str) -> Result<(), String> {
        ensure!(!v.is_zero(), "{what}: zero eigenvector");
        let r = ok(eigen_residual(a, lambda, v), what)?;
        self.pairs += 1;
        self.worst = self.worst.max(r);
        ensure!(r <= 1e-9, "{what}: residual {r:.3e}");
        Ok(())
    }
}

fn eigenpair_soundness() -> Outcome {
    let mut t = Tally { pairs: 0, worst: 0.0, errors: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for case in 0..300 {
        let n = 2 + case % 6;
        let a = if case % 2 == 0 { integer_exponent_matrix(&mut rng, n, 2, 0.4) } else { grid_matrix(&mut rng, n) };
        let what = format!("max-times case {case}");
        match principal_eigenpair(&a, 1e-9) {
            Ok(p) => t.add(&a, p.lambda, &p.vector, &what)?,
            Err(_) => t.errors += 1,
        }
        let p = ok(eigenvector_in_cone(&MaxCone::orthant(n), &a, 1e-9), &what)?;
        t.add(&a, p.lambda, &p.vector, &what)?;
        for lambda in ok(tropical_spectrum(&a), &what)? {
            if let Some(cone) = ok(eigencone(&a, lambda, 1e-9), &what)? {
                for g in cone.generators().columns() {
                    t.add(&a, lambda, &g, &what)?;
                }
            }
        }
        if no_zero_column(&a) {
            if let Ok(ShpizOutcome::Eigen { pair, .. }) = shpiz_iteration(&MaxCone::orthant(n), &a, 10_000, 1e-9) {
                t.add(&a, pair.lambda, &pair.vector, &what)?;
            }
        }
    }
    for seed in 0..300u64 {
        let n = 1 + (seed as usize) % 6;
        let what = format!("nonneg seed {seed}");
        let a = ok(commuting_family_nonneg(seed, n, 1), &what)?.remove(0);
        match perron_eigenpair(&a, 1e-9, 10_000) {
            Ok(p) => t.add(&a, p.lambda, &p.vector, &what)?,
            Err(_) => t.errors += 1,
        }
        for p in nonneg_eigenpairs(&a, 1e-9) {
            t.add(&a, p.lambda, &p.vector, &what)?;
        }
        let what = format!("complex seed {seed}");
        let c = ok(commuting_family_complex(seed, n, 1), &what)?.remove(0);
        match eigenpairs_complex(&c, 1e-9) {
            Ok(ps) => {
                for p in ps {
                    t.add(&c, p.lambda, &p.vector, &what)?;
                }
            }
            Err(_) => t.errors += 1,
        }
    }
    for seed in 0..100u64 {
        let n = 1 + (seed as usize) % 6;
        let m = 1 + (seed as usize / 6) % 4;
        report_pairs(&ok(commuting_family_max_times(seed, n, m), "family")?, &mut t)?;
        report_pairs(&ok(commuting_family_nonneg(seed, n, m), "family")?, &mut t)?;
        report_pairs(&ok(commuting_family_complex(seed, n, m), "family")?, &mut t)?;
    }
    for s in [e12_e23::<MaxTimes>(), e12_e23()] {
        report_pairs(&s.generators, &mut t)?;
    }
    ensure!(t.errors == 0, "{} solver calls returned errors instead of eigenpairs", t.errors);
    Ok(format!("{} eigenpairs, worst residual {:.2e}", t.pairs, t.worst))
}

fn report_pairs<S: CommonSolver>(gens: &[Matrix<S>], t: &mut Tally) -> Result<(), String> {
    let spec = ok(SemigroupSpec::new(gens.to_vec()), "spec")?;
    match common_eigenvector(&spec) {
        Ok(r) => {
            for (a, l) in gens.iter().zip(&r.lambdas) {
                t.add(a, *l, &r.vector, "common eigenvector")?;
            }
        }
        Err(_) => t.errors += 1,
    }
    Ok(())
}

// 3. eigenvector inside random invariant cones

fn eigenvector_in_invariant_cone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut done, mut resampled, mut largest) = (0, 0, 0);
    while done < 500 {
        let n = rng.gen_range(2..=6);
        let a = grid_matrix(&mut rng, n);
        let m = rng.gen_range(1..=3);
        let w0 = random_cone(&mut rng, n, m, true);
        let w = match w0.close_under(&[a.clone()], 12, 1e-9) {
            Ok(Some(w)) if w.len() <= 12 => w,
            _ => {
                resampled += 1;
                ensure!(resampled < 20_000, "could not build invariant cones");
                continue;
            }
        };
        ensure!(ok(w.is_invariant(&a, 1e-9), "is_invariant")?, "pair {done}: closed cone is not invariant");
        let p = ok(eigenvector_in_cone(&w, &a, 1e-9), &format!("pair {done}"))?;
        ensure!(p.residual <= 1e-9 && !p.vector.is_zero(), "pair {done}: bad eigenpair");
        ensure!(ok(w.member(&p.vector, 1e-9), "member")?, "pair {done}: eigenvector leaves the cone");
        largest = largest.max(w.len());
        done += 1;
    }
    Ok(format!("500/500 pairs, up to {largest} generators ({resampled} cones resampled for exceeding 12)"))
}

// 4. projections of slice samples never vanish

fn slice_samples_project_nonzero() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut checked = 0;
    for case in 0..1000 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=5);
        let w = random_cone(&mut rng, n, m, case % 2 == 0);
        let k = rng.gen_range(1..=4);
        let indices: Vec<usize> = (0..k).map(|_| rng.gen_range(0..w.len())).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        if total == 0.0 {
            continue;
        }
        let weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let s = ok(w.convex_sample(&weights, &indices, 1e-9), "convex_sample")?;
        if s.point.is_zero() {
            continue;
        }
        let p = ok(w.project(&s.point), "project")?;
        ensure!(!p.is_zero(), "case {case}: projection of a slice sample vanished");
        checked += 1;
    }
    ensure!(checked >= 990, "only {checked} nonzero samples");
    Ok(format!("{checked} samples, zero violations"))
}

// 5. residual inequalities and their equality case on eigencones

fn residual_power_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut done = 0;
    while done < 1000 {
        let n = rng.gen_range(1..=6);
        let exact = done % 2 == 0;
        let a = if exact {
            grid_matrix(&mut rng, n)
        } else {
            filled(n, || MaxTimes(rng.gen_range(0.0..3.0)))
        };
        let v = if exact { grid_vector(&mut rng, n) } else { continuous_vector(&mut rng, n) };
        let t = rng.gen_range(1..=5u32);
        let at_v = ok(a.power(t), "power")?.mul_vec(&v).unwrap();
        if at_v.is_zero() {
            continue;
        }
        let r1 = ok(residual(&v, &a.mul_vec(&v).unwrap()), "residual")?.0;
        let rt = ok(residual(&v, &at_v), "residual")?.0;
        ensure!(r1.powi(t as i32) <= rt * (1.0 + 1e-12), "case {done}: {r1}^{t} > {rt}");
        done += 1;
    }
    let mut matrices = 0;
    let mut points = 0;
    while matrices < 200 {
        let n = rng.gen_range(1..=6);
        let a = if matrices % 2 == 0 {
            grid_matrix(&mut rng, n)
        } else {
            filled(n, || MaxTimes(rng.gen_range(0.0..3.0)))
        };
        let lambda = ok(max_cycle_mean(&a), "max_cycle_mean")?.0 .0;
        if lambda == 0.0 {
            continue;
        }
        let w = ok(principal_eigencone(&a), "principal_eigencone")?;
        let mut first: Option<f64> = None;
        for _ in 0..100 {
            let v = cone_point(&mut rng, &w, matrices % 2 == 0);
            let r1 = ok(residual(&v, &a.mul_vec(&v).unwrap()), "residual")?.0;
            let first = *first.get_or_insert(r1);
            ensure!((r1 - first).abs() <= 1e-12 * first, "matrix {matrices}: residual not constant on the eigencone");
            ensure!((r1 * lambda - 1.0).abs() <= 1e-12, "matrix {matrices}: residual {r1} is not 1/lambda");
            for t in 2..=5u32 {
                let rt = ok(residual(&v, &ok(a.power(t), "power")?.mul_vec(&v).unwrap()), "residual")?.0;
                let rp = r1.powi(t as i32);
                ensure!((rt - rp).abs() <= 1e-12 * rp.max(rt), "matrix {matrices}, t = {t}: {rt} vs {rp}");
            }
            points += 1;
        }
        matrices += 1;
    }
    Ok(format!("1000 inequality cases; equality on {points} eigencone points of 200 matrices"))
}

// 6. power sequence from the greatest slice point

fn shpiz_construction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut eigen, mut zero, mut attempts) = (0, 0, 0);
    while eigen < 100 || zero < 100 {
        attempts += 1;
        ensure!(attempts < 100_000, "could not generate fixtures");
        let n = rng.gen_range(1..=5);
        let mut a = integer_exponent_matrix(&mut rng, n, 3, 0.3);
        if !no_zero_column(&a) {
            continue;
        }
        let top = a.norm_inf();
        let want_eigen = eigen < 100 && (zero >= 100 || rng.gen_bool(0.5));
        if want_eigen {
            let i = rng.gen_range(0..n);
            a.set(i, i, MaxTimes(top));
        } else if ok(max_cycle_mean(&a), "max_cycle_mean")?.0 .0 >= top {
            continue;
        }
        let out = ok(shpiz_iteration(&MaxCone::orthant(n), &a, 10_000, 1e-9), "shpiz_iteration")?;
        let trace = out.trace();
        ensure!(trace.max_increase <= 0.0, "iterates increased by {}", trace.max_increase);
        ensure!(trace.alpha1.0 == top, "alpha1 {} is not the largest entry {top}", trace.alpha1.0);
        match (want_eigen, out) {
            (true, ShpizOutcome::Eigen { pair, .. }) => {
                ensure!(pair.lambda.0 == top && pair.residual <= 1e-9, "bad eigenpair from the power sequence");
                eigen += 1;
            }
            (false, ShpizOutcome::ZeroLimit(t)) => {
                ensure!(t.converged_to_zero, "zero limit without the flag");
                zero += 1;
            }
            (true, _) => return Err("diagonal maximum but the sequence vanished".into()),
            (false, _) => return Err("largest entry above the cycle mean but a nonzero limit".into()),
        }
    }
    Ok("100 eigenpairs, 100 zero limits, all sequences non-increasing".into())
}

// 7. commuting families in all three domains

fn commuting_families() -> Outcome {
    let mut lines = Vec::new();
    for domain in DomainTag::ALL {
        let mut solved = 0;
        for seed in 0..500u64 {
            let n = 1 + (seed as usize) % 6;
            let m = 1 + (seed as usize / 6) % 4;
            let fam = ok(random_commuting_family(seed, n, m, domain), "family")?;
            let r = match domain {
                DomainTag::Complex => solve_both_orders::<Complex64>(fam),
                DomainTag::NonnegReal => solve_both_orders::<NonNeg>(fam),
                DomainTag::MaxTimes => solve_both_orders::<MaxTimes>(fam),
            };
            r.map_err(|e| format!("{domain} seed {seed} (n = {n}, m = {m}): {e}"))?;
            solved += 1;
        }
        lines.push(format!("{domain} {solved}/500"));
    }
    Ok(format!("{}, each also with the generators reversed", lines.join(", ")))
}

fn solve_both_orders<S: CommonSolver>(fam: Vec<AnyMatrix>) -> Result<(), Error>
where
    Matrix<S>: TryFrom<AnyMatrix, Error = Error>,
{
    let mut gens: Vec<Matrix<S>> = fam.into_iter().map(Matrix::try_from).collect::<Result<_, _>>()?;
    let id = Matrix::identity(gens[0].rows());
    common_eigenvector_commutative(&gens, &id, 1e-9)?;
    gens.reverse();
    common_eigenvector_commutative(&gens, &id, 1e-9)?;
    Ok(())
}

// 8. nilpotent fixture and forced lifting on monogenic semigroups

fn e12_e23<S: Semiring>() -> SemigroupSpec<S> {
    let unit = |i: usize, j: usize| {
        let mut m = Matrix::zeros(3, 3);
        m.set(i, j, S::one());
        m
    };
    SemigroupSpec::new(vec![unit(0, 1), unit(1, 2)]).unwrap()
}

fn nilpotent_case<S: CommonSolver>() -> Result<(), String> {
    let r = ok(common_eigenvector(&e12_e23::<S>()), "E12, E23")?;
    ensure!(r.classification == Classification::Nilpotent(3), "{}: classified {}", S::DOMAIN, r.classification);
    ensure!(r.vector == Vector::unit(3, 0), "{}: vector {:?}", S::DOMAIN, r.vector);
    ensure!(r.lambdas.iter().all(|l| l.is_zero()), "{}: nonzero eigenvalue", S::DOMAIN);
    Ok(())
}

fn monogenic_case<S: CommonSolver>(a: Matrix<S>) -> Result<(), String> {
    let mut spec = ok(SemigroupSpec::new(vec![a.clone()]), "spec")?;
    spec.word_cap = 4;
    let r = ok(common_eigenvector_via_layer(&spec, 2), "forced t = 2")?;
    ensure!(r.residuals[0] <= 1e-9, "residual {}", r.residuals[0]);
    let l = r.lambdas[0];
    let a2 = a.mul(&a).unwrap();
    let l2 = ok(eigenvalue_estimate(&a2, &r.vector), "estimate")?;
    let scale = l.mul(l).modulus().max(1.0);
    ensure!(l2.dist(l.mul(l)) <= 1e-9 * scale, "{}: lambda(A^2) = {l2:?} but lambda(A)^2 = {:?}", S::DOMAIN, l.mul(l));
    Ok(())
}

fn nilpotent_and_lifting() -> Outcome {
    nilpotent_case::<MaxTimes>()?;
    nilpotent_case::<NonNeg>()?;
    nilpotent_case::<Complex64>()?;
    for seed in 0..100u64 {
        let n = 1 + (seed as usize) % 5;
        match seed % 3 {
            0 => monogenic_case(ok(commuting_family_max_times(seed, n, 1), "fixture")?.remove(0)),
            1 => monogenic_case(ok(commuting_family_nonneg(seed, n, 1), "fixture")?.remove(0)),
            _ => monogenic_case(ok(commuting_family_complex(seed, n, 1), "fixture")?.remove(0)),
        }
        .map_err(|e| format!("monogenic seed {seed}: {e}"))?;
    }
    Ok("nilpotent(3) with (1,0,0) in all domains; 100 monogenic lifts".into())
}

// 9. projector laws

fn projector_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for case in 0..1000 {
        let exact = case % 2 == 0;
        let tol = if exact { 0.0 } else { 1e-12 };
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=5);
        let w = random_cone(&mut rng, n, m, exact);
        let draw = |rng: &mut ChaCha8Rng| if exact { grid_vector(rng, n) } else { continuous_vector(rng, n) };
        let y = draw(&mut rng);
        let z = draw(&mut rng);
        let y2 = y.sup(&z).unwrap();
        let r = if exact { [0.25, 0.5, 2.0, 8.0][rng.gen_range(0..4)] } else { rng.gen_range(0.1..10.0) };
        let p = |v: &Vector<MaxTimes>| w.project(v).unwrap();
        let py = p(&y);
        let same = |a: &Vector<MaxTimes>, b: &Vector<MaxTimes>| if exact { a == b } else { a.approx_eq(b, tol) };
        ensure!(same(&p(&py), &py), "case {case}: not idempotent");
        ensure!(py.leq_tol(&p(&y2), tol), "case {case}: not monotone");
        ensure!(same(&p(&y.scale(MaxTimes(r))), &py.scale(MaxTimes(r))), "case {case}: not homogeneous");
        ensure!(py.leq_tol(&y, tol), "case {case}: not dominated by the input");
        let x = cone_point(&mut rng, &w, exact);
        ensure!(same(&p(&x), &x), "case {case}: moves a point of the cone");
    }
    Ok("1000 cases (500 exact dyadic, 500 within 1e-12)".into())
}

// 10. characteristic polynomial and Perron root cross-checks

fn classical_cross_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let n = rng.gen_range(1..=8);
        let d: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let p = ok(char_poly(&Matrix::diagonal(&d)), "char_poly")?;
        let roots = ok(poly_roots(&p, 1e-9, 20_000), &format!("case {case}"))?;
        let dist = multiset_distance(&d, &roots);
        worst = worst.max(dist);
        ensure!(dist <= 1e-8, "case {case}: roots differ from the diagonal by {dist:.3e}");
    }
    let mut worst_rho: f64 = 0.0;
    for case in 0..200 {
        let n = rng.gen_range(1..=5);
        let a = filled(n, || NonNeg(rng.gen_range(0.05..2.0)));
        let rho = ok(perron_eigenpair(&a, 1e-9, 10_000), "perron")?.lambda.0;
        let roots = ok(poly_roots(&ok(char_poly(&a), "char_poly")?, 1e-9, 20_000), "roots")?;
        let top = roots.iter().filter(|z| z.im.abs() <= 1e-6).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        worst_rho = worst_rho.max((rho - top).abs());
        ensure!((rho - top).abs() <= 1e-6, "case {case}: Perron root {rho} vs characteristic root {top}");
    }
    Ok(format!("diagonal roots within {worst:.1e}; Perron roots within {worst_rho:.1e}"))
}

/// Bottleneck distance of a greedy closest-pair matching, an upper bound
/// on the optimal one.
fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> =
        (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| ((a[i] - b[j]).norm(), i, j))).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

// 11. exhaustive eigenvector search against the spectral solvers

fn saturation_cross_check() -> Outcome {
    const VALUES: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
    let (mut matrices, mut generators, mut empty) = (0, 0, 0);
    for i in 0..300u64 {
        let mut code = (i * 7919) % 4u64.pow(9);
        let a = filled(3, || {
            let v = VALUES[(code % 4) as usize];
            code /= 4;
            MaxTimes(v)
        });
        let spectrum = ok(tropical_spectrum(&a), "spectrum")?;
        let lambda = ok(max_cycle_mean(&a), "max_cycle_mean")?.0;
        if lambda.0 > 0.0 {
            let found = ok(saturation_eigensolve(&a, lambda), "saturation")?;
            for g in ok(principal_eigencone(&a), "eigencone")?.generators().columns() {
                let g = g.normalized_max();
                ensure!(
                    found.iter().any(|x| x.normalized_max().approx_eq(&g, 1e-9)),
                    "matrix {i}: generator {:?} not reproduced",
                    g.to_f64()
                );
                generators += 1;
            }
        }
        let mut candidates: Vec<f64> = ok(enumerate_cycles(&a), "cycles")?.cycles.iter().map(|c| c.1).collect();
        candidates.extend([3.0, 0.75, 1.5]);
        for l in candidates {
            let in_spectrum = spectrum.iter().any(|s| (s.0 - l).abs() <= 1e-12 * l);
            let found = ok(saturation_eigensolve(&a, MaxTimes(l)), "saturation")?;
            ensure!(found.is_empty() != in_spectrum, "matrix {i}, lambda {l}: spectrum {in_spectrum}, solutions {}", found.len());
            if found.is_empty() {
                empty += 1;
            }
        }
        matrices += 1;
    }
    Ok(format!("{matrices} matrices, {generators} generators reproduced, {empty} empty solves all off the spectrum"))
}

// 12. command line round trips and self-verification

struct Cli {
    dir: tempfile::TempDir,
    files: usize,
    emitted: usize,
    /// Reports with status ok and the matrix files to check them against.
    corpus: Vec<(Vec<PathBuf>, PathBuf)>,
}

impl Cli {
    fn path(&mut self, stem: &str) -> PathBuf {
        self.files += 1;
        self.dir.path().join(format!("{stem}-{}.json", self.files))
    }

    fn matrix(&mut self, m: AnyMatrix) -> Result<PathBuf, String> {
        let p = self.path("m");
        ok(write_matrix_file(&p, &m, None), "write")?;
        let text = std::fs::read_to_string(&p).unwrap();
        let back = ok(parse_matrix_str(&text), "reparse")?;
        ensure!(back == m, "matrix file does not round-trip");
        ensure!(to_json(&MatrixFile::from_matrix(&back, None)) == text, "matrix text does not round-trip");
        Ok(p)
    }

    /// Run a subcommand, check exit code and round trip, and keep ok
    /// reports for re-verification.
    fn emit(&mut self, args: Vec<PathBuf>, verify_against: Vec<PathBuf>) -> Result<Option<ReportFile>, String> {
        let refs: Vec<&Path> = args.iter().map(PathBuf::as_path).collect();
        let (code, report, text) = self.run(&refs);
        self.emitted += 1;
        ensure!(code == report.status.exit_code(), "exit code {code} with status {:?}", report.status);
        ensure!(report.is_consistent(), "status ok with a residual above tolerance");
        ensure!(to_json(&parse_report_str(&text).unwrap()) == text, "report text does not round-trip");
        if report.status != Status::Ok {
            return Ok(None);
        }
        let p = self.path("report");
        std::fs::write(&p, &text).unwrap();
        self.corpus.push((verify_against, p));
        Ok(Some(report))
    }

    fn run(&self, args: &[&Path]) -> (i32, ReportFile, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv: Vec<&std::ffi::OsStr> =
            std::iter::once("commoneig".as_ref()).chain(args.iter().map(|p| p.as_os_str())).collect();
        let code = cli::run(argv, &mut out, &mut err);
        let text = String::from_utf8(out).unwrap();
        let report = parse_report_str(&text).unwrap_or_else(|e| panic!("unparsable report: {e}\n{text}"));
        (code, report, text)
    }
}

fn command_line() -> Outcome {
    let mut c = Cli { dir: tempfile::tempdir().map_err(|e| e.to_string())?, files: 0, emitted: 0, corpus: Vec::new() };
    let cmd = |s: &str| PathBuf::from(s);

    // the documented examples
    let a = c.matrix(MaxTimes::mat(&[&[2.0, 1.0], &[1.0, 0.5]]).into())?;
    let r = c.emit(vec![cmd("eig"), a.clone()], vec![a.clone()])?.ok_or("eig example failed")?;
    ensure!(r.lambdas == vec![Entry::Real(2.0)], "eig example lambda {:?}", r.lambdas);
    ensure!(r.vector == Some(vec![Entry::Real(1.0), Entry::Real(0.5)]), "eig example vector {:?}", r.vector);
    let eig_report = c.corpus.last().unwrap().1.clone();
    for (domain, e12, e23) in [
        (DomainTag::MaxTimes, AnyMatrix::from(e12_e23::<MaxTimes>().generators[0].clone()), AnyMatrix::from(e12_e23::<MaxTimes>().generators[1].clone())),
        (DomainTag::NonnegReal, e12_e23::<NonNeg>().generators[0].clone().into(), e12_e23::<NonNeg>().generators[1].clone().into()),
        (DomainTag::Complex, e12_e23::<Complex64>().generators[0].clone().into(), e12_e23::<Complex64>().generators[1].clone().into()),
    ] {
        let (g1, g2) = (c.matrix(e12)?, c.matrix(e23)?);
        let r = c.emit(vec![cmd("common-eig"), g1.clone(), g2.clone()], vec![g1.clone(), g2.clone()])?
            .ok_or("common-eig example failed")?;
        ensure!(r.classification.as_deref() == Some("nilpotent(3)"), "{domain}: classification {:?}", r.classification);
        let zero = Entry::from_scalar(domain.zero());
        let expected = vec![Entry::from_scalar(domain.one()), zero, zero];
        ensure!(r.vector.as_ref() == Some(&expected), "{domain}: vector {:?}", r.vector);
        ensure!(r.lambdas == vec![zero, zero], "{domain}: lambdas {:?}", r.lambdas);
        c.emit(vec![cmd("semigroup"), g1.clone(), g2.clone()], vec![g1, g2])?;
    }
    let mut tampered = parse_report_str(&std::fs::read_to_string(&eig_report).unwrap()).unwrap();
    if let Some(v) = tampered.vector.as_mut() {
        v[1] = Entry::Real(0.5 * 1.1);
    }
    let tp = c.path("tampered");
    std::fs::write(&tp, to_json(&tampered)).unwrap();
    let (code, _, _) = c.run(&[Path::new("verify"), &tp, &a]);
    ensure!(code == 1, "tampered report: verify exited {code}");

    // a broader corpus
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    for seed in 0..15u64 {
        let n = 1 + (seed as usize) % 5;
        let singles: [AnyMatrix; 3] = [
            grid_matrix(&mut rng, n).into(),
            ok(commuting_family_nonneg(seed, n, 1), "fixture")?.remove(0).into(),
            ok(commuting_family_complex(seed, n, 1), "fixture")?.remove(0).into(),
        ];
        for m in singles {
            let p = c.matrix(m)?;
            c.emit(vec![cmd("eig"), p.clone()], vec![p.clone()])?;
            c.emit(vec![cmd("spectrum"), p.clone()], vec![p])?;
        }
        for domain in DomainTag::ALL {
            let fam = ok(random_commuting_family(seed, n, 1 + (seed as usize) % 3, domain), "family")?;
            let paths = fam.into_iter().map(|m| c.matrix(m)).collect::<Result<Vec<_>, _>>()?;
            for sub in ["common-eig", "semigroup"] {
                let mut args = vec![cmd(sub)];
                args.extend(paths.iter().cloned());
                c.emit(args, paths.clone())?;
            }
        }
        let w = c.matrix(random_cone(&mut rng, n, 1 + (seed as usize) % 3, seed % 2 == 0).generators().clone().into())?;
        let y = c.path("y");
        ok(write_vector_file(&y, &grid_vector(&mut rng, n)), "write")?;
        c.emit(vec![cmd("project"), w.clone(), y], vec![w])?;
    }
    let mut verified = 0;
    for (against, report) in &c.corpus {
        let mut args: Vec<&Path> = vec![Path::new("verify"), report];
        args.extend(against.iter().map(PathBuf::as_path));
        let (code, v, _) = c.run(&args);
        ensure!(code == 0, "verify rejected {}: {:?}", report.display(), v.error);
        verified += 1;
    }
    Ok(format!("{} reports emitted, {verified} ok reports re-verified, examples exact, tampered report rejected", c.emitted))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("spectral oracle agreement", spectral_oracle_agreement),
        ("eigenpair soundness", eigenpair_soundness),
        ("eigenvector in invariant cones", eigenvector_in_invariant_cone),
        ("slice samples project to nonzero", slice_samples_project_nonzero),
        ("residual power laws", residual_power_laws),
        ("power sequence from the slice point", shpiz_construction),
        ("commuting families", commuting_families),
        ("nilpotent fixture and lifting", nilpotent_and_lifting),
        ("projector laws", projector_laws),
        ("classical cross-checks", classical_cross_checks),
        ("saturation oracle cross-check", saturation_cross_check),
        ("command line", command_line),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let number = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| f == &number || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {number:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {number:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
