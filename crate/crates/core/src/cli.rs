//! The `commoneig` command line: every subcommand writes a JSON report to
//! `out` and a one-line summary to `err`, and returns the exit code
//! (0 ok, 1 no result within the configured bounds, 2 invalid input).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::classical::{eigenspaces_complex, perron_eigenpair, to_complex};
use crate::commuting::CommonSolver;
use crate::cone::MaxCone;
use crate::eigen::EigenPair;
use crate::error::{Error, Result};
use crate::io::{
    entries_of, parse_matrix_file, parse_report_file, parse_vector_file, to_json, vector_from_entries, ClosureStats, Entry,
    ReportFile, RunOptions, SpectrumEntry, Status,
};
use crate::linalg::{eigen_residual, AnyMatrix, Matrix, Vector};
use crate::scalar::{DomainTag, MaxTimes, NonNeg, Semiring, DEFAULT_TOL};
use crate::semigroup::{
    analyze, common_eigenvector, Classification, CommonEigenReport, SemigroupSpec, DEFAULT_CLOSURE_CAP, DEFAULT_QUASI_BOUND,
    DEFAULT_WORD_CAP,
};
use crate::tropical::{eigencone, principal_eigenpair, tropical_spectrum};

#[derive(Debug, Parser)]
#[command(name = "commoneig", version, about = "Eigenvectors and common eigenvectors over complex, nonnegative and max-times matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One eigenpair: principal (max-times), Perron (nonneg) or largest modulus (complex).
    Eig {
        matrix: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// All eigenvalues, each with a witnessing eigenvector.
    Spectrum {
        matrix: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Greatest element of the max cone spanned by the columns of W below y.
    Project {
        generators: PathBuf,
        vector: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Classify the semigroup generated by the matrices and find a common eigenvector.
    CommonEig {
        #[arg(required = true)]
        generators: Vec<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Closure size, layer sizes and classification of the generated semigroup.
    Semigroup {
        #[arg(required = true)]
        generators: Vec<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Recheck a report against the matrices it was computed from.
    Verify {
        report: PathBuf,
        #[arg(required = true)]
        generators: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Args)]
struct Opts {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
    closure_cap: usize,
    #[arg(long, default_value_t = DEFAULT_WORD_CAP)]
    word_cap: usize,
    #[arg(long, default_value_t = DEFAULT_QUASI_BOUND)]
    quasi_bound: usize,
}

impl Opts {
    fn run_options(self) -> RunOptions {
        RunOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            closure_cap: self.closure_cap,
            word_cap: self.word_cap,
            quasi_bound: self.quasi_bound,
        }
    }

    fn from_run_options(o: &RunOptions) -> Self {
        Opts { tol: o.tol, max_iter: o.max_iter, closure_cap: o.closure_cap, word_cap: o.word_cap, quasi_bound: o.quasi_bound }
    }

    fn validate(self) -> Result<()> {
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance {} must be finite and nonnegative", self.tol)));
        }
        Ok(())
    }
}

impl Default for Opts {
    fn default() -> Self {
        Opts {
            tol: DEFAULT_TOL,
            max_iter: 10_000,
            closure_cap: DEFAULT_CLOSURE_CAP,
            word_cap: DEFAULT_WORD_CAP,
            quasi_bound: DEFAULT_QUASI_BOUND,
        }
    }
}

/// Parse `args` (program name first), run the subcommand, write the report
/// and summary, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let report = execute(cli.command);
    let _ = out.write_all(to_json(&report).as_bytes());
    let _ = writeln!(err, "{}", summary(&report));
    report.status.exit_code()
}

/// Exit status for an error: malformed input is 2, everything else means
/// that no result was found.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::DomainMismatch { .. }
        | Error::UnsupportedDomain(_)
        | Error::NotSquare { .. }
        | Error::UndefinedResidual => Status::InvalidInput,
        _ => Status::NoResult,
    }
}

fn failed(command: &str, opts: Opts, e: &Error) -> ReportFile {
    let mut r = ReportFile::new(command, status_of(e), opts.run_options());
    r.error = Some(e.to_string());
    r
}

fn execute(command: Command) -> ReportFile {
    let (name, opts, result) = match command {
        Command::Eig { matrix, opts } => ("eig", opts, opts.validate().and_then(|_| eig(&matrix, opts))),
        Command::Spectrum { matrix, opts } => ("spectrum", opts, opts.validate().and_then(|_| spectrum(&matrix, opts))),
        Command::Project { generators, vector, opts } => {
            ("project", opts, opts.validate().and_then(|_| project(&generators, &vector, opts)))
        }
        Command::CommonEig { generators, opts } => {
            ("common-eig", opts, opts.validate().and_then(|_| common_eig(&generators, opts)))
        }
        Command::Semigroup { generators, opts } => {
            ("semigroup", opts, opts.validate().and_then(|_| semigroup(&generators, opts)))
        }
        Command::Verify { report, generators } => ("verify", Opts::default(), verify(&report, &generators)),
    };
    result.unwrap_or_else(|e| failed(name, opts, &e))
}

fn summary(r: &ReportFile) -> String {
    let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    let mut s = format!("{}: {status}", r.command);
    if let Some(c) = &r.classification {
        s.push_str(&format!(", {c}"));
    }
    if let [l] = r.lambdas.as_slice() {
        s.push_str(&format!(", lambda {}", show(*l)));
    } else if !r.lambdas.is_empty() {
        s.push_str(&format!(", {} eigenvalues", r.lambdas.len()));
    }
    if !r.spectrum.is_empty() {
        let ls: Vec<String> = r.spectrum.iter().map(|e| show(e.lambda)).collect();
        s.push_str(&format!(", spectrum [{}]", ls.join(", ")));
    }
    if let Some(c) = &r.closure {
        s.push_str(&format!(", {} elements, layers {:?}", c.elements, c.layer_sizes));
    }
    if let Some(r) = r.residuals.iter().copied().reduce(f64::max) {
        s.push_str(&format!(", max residual {r:.2e}"));
    }
    for w in &r.warnings {
        s.push_str(&format!("\n  warning: {w}"));
    }
    if let Some(e) = &r.error {
        s.push_str(&format!("\n  {e}"));
    }
    s
}

fn show(e: Entry) -> String {
    match e {
        Entry::Real(x) => format!("{x}"),
        Entry::Complex([re, im]) => format!("{}", Complex64::new(re, im)),
    }
}

/// Generators of one domain and one size.
enum Family {
    Complex(Vec<Matrix<Complex64>>),
    NonnegReal(Vec<Matrix<NonNeg>>),
    MaxTimes(Vec<Matrix<MaxTimes>>),
}

macro_rules! on_family {
    ($fam:expr, $f:ident ( $($arg:expr),* )) => {
        match $fam {
            Family::Complex(g) => $f(g, $($arg),*),
            Family::NonnegReal(g) => $f(g, $($arg),*),
            Family::MaxTimes(g) => $f(g, $($arg),*),
        }
    };
}

fn typed<S: Semiring>(ms: Vec<AnyMatrix>) -> Result<Vec<Matrix<S>>>
where
    Matrix<S>: TryFrom<AnyMatrix, Error = Error>,
{
    ms.into_iter().map(Matrix::try_from).collect()
}

fn load_family(paths: &[PathBuf]) -> Result<Family> {
    let ms = paths.iter().map(parse_matrix_file).collect::<Result<Vec<_>>>()?;
    let first = ms.first().ok_or_else(|| Error::InvalidInput("no matrices given".into()))?;
    let domain = first.domain();
    let (n, c) = first.shape();
    if n != c {
        return Err(Error::NotSquare { rows: n, cols: c });
    }
    for (m, p) in ms.iter().zip(paths) {
        if m.domain() != domain {
            return Err(Error::InvalidInput(format!("{}: domain {} differs from {domain}", p.display(), m.domain())));
        }
        if m.shape() != (n, n) {
            let (r, c) = m.shape();
            return Err(Error::InvalidInput(format!("{}: shape {r}x{c}, expected {n}x{n}", p.display())));
        }
    }
    Ok(match domain {
        DomainTag::Complex => Family::Complex(typed(ms)?),
        DomainTag::NonnegReal => Family::NonnegReal(typed(ms)?),
        DomainTag::MaxTimes => Family::MaxTimes(typed(ms)?),
    })
}

fn pair_report<S: Semiring>(command: &str, opts: Opts, pair: &EigenPair<S>) -> ReportFile {
    let mut r = ReportFile::new(command, Status::Ok, opts.run_options());
    r.domain = Some(S::DOMAIN);
    r.vector = Some(entries_of(&pair.vector));
    r.lambdas = vec![Entry::from_scalar(pair.lambda.to_scalar())];
    r.residuals = vec![pair.residual];
    r.pathway = vec![format!("method: {}", pair.method.name())];
    r
}

/// Rescale so the largest entry is one, keeping the original if rounding
/// in the rescaled vector breaks the tolerance.
fn normalized<S: Semiring>(a: &Matrix<S>, pair: EigenPair<S>, tol: f64) -> EigenPair<S> {
    EigenPair::verified(a, pair.lambda, pair.vector.normalized_max(), pair.method, tol).unwrap_or(pair)
}

fn eig(path: &PathBuf, opts: Opts) -> Result<ReportFile> {
    let m = parse_matrix_file(path)?;
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    Ok(match m {
        AnyMatrix::MaxTimes(a) => pair_report("eig", opts, &normalized(&a, principal_eigenpair(&a, opts.tol)?, opts.tol)),
        AnyMatrix::NonnegReal(a) => {
            let pair = perron_eigenpair(&a, opts.tol, opts.max_iter)?;
            pair_report("eig", opts, &normalized(&a, pair, opts.tol))
        }
        AnyMatrix::Complex(a) => {
            let pair = largest_complex_pair(&a, opts.tol)?;
            pair_report("eig", opts, &normalized(&a, pair, opts.tol))
        }
    })
}

fn largest_complex_pair(a: &Matrix<Complex64>, tol: f64) -> Result<EigenPair<Complex64>> {
    let spaces = eigenspaces_complex(a, tol)?;
    let space = spaces
        .into_iter()
        .find(|s| !s.basis.is_empty())
        .ok_or_else(|| Error::InvariantViolation("no eigenspace found".into()))?;
    EigenPair::verified(a, space.lambda, space.basis[0].clone(), crate::eigen::Method::Classical, tol)
}

fn spectrum(path: &PathBuf, opts: Opts) -> Result<ReportFile> {
    let m = parse_matrix_file(path)?;
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    let mut report = ReportFile::new("spectrum", Status::Ok, opts.run_options());
    report.domain = Some(m.domain());
    match m {
        AnyMatrix::MaxTimes(a) => {
            report.pathway.push("max cycle means of the strongly connected components".into());
            for lambda in tropical_spectrum(&a)? {
                let cone = eigencone(&a, lambda, opts.tol)?
                    .ok_or_else(|| Error::InvariantViolation(format!("no eigenvector for eigenvalue {}", lambda.0)))?;
                report.spectrum.push(spectrum_entry(&a, lambda, cone.generator(0).normalized_max())?);
            }
        }
        AnyMatrix::NonnegReal(a) => {
            report.pathway.push("roots of the characteristic polynomial".into());
            complex_spectrum(&to_complex(&a)?, opts.tol, &mut report)?;
        }
        AnyMatrix::Complex(a) => {
            report.pathway.push("roots of the characteristic polynomial".into());
            complex_spectrum(&a, opts.tol, &mut report)?;
        }
    }
    Ok(report)
}

fn complex_spectrum(a: &Matrix<Complex64>, tol: f64, report: &mut ReportFile) -> Result<()> {
    for space in eigenspaces_complex(a, tol)? {
        let v = space
            .basis
            .first()
            .ok_or_else(|| Error::InvariantViolation(format!("empty eigenspace for {}", space.lambda)))?;
        report.spectrum.push(spectrum_entry(a, space.lambda, v.normalized_max())?);
    }
    Ok(())
}

fn spectrum_entry<S: Semiring>(a: &Matrix<S>, lambda: S, v: Vector<S>) -> Result<SpectrumEntry> {
    Ok(SpectrumEntry {
        lambda: Entry::from_scalar(lambda.to_scalar()),
        residual: eigen_residual(a, lambda, &v)?,
        vector: entries_of(&v),
    })
}

fn load_projection(w_path: &PathBuf) -> Result<MaxCone> {
    match parse_matrix_file(w_path)? {
        AnyMatrix::MaxTimes(w) => MaxCone::new(w),
        other => Err(Error::UnsupportedDomain(other.domain())),
    }
}

fn project(w_path: &PathBuf, y_path: &PathBuf, opts: Opts) -> Result<ReportFile> {
    let cone = load_projection(w_path)?;
    let y: Vector<MaxTimes> = parse_vector_file(y_path)?.to_vector()?;
    let x = cone.project(&y)?;
    let mut r = ReportFile::new("project", Status::Ok, opts.run_options());
    r.domain = Some(DomainTag::MaxTimes);
    r.input_vector = Some(entries_of(&y));
    r.vector = Some(entries_of(&x));
    r.pathway.push(format!("projection onto a cone with {} generators", cone.len()));
    Ok(r)
}

fn spec_for<S: Semiring>(gens: Vec<Matrix<S>>, opts: Opts) -> Result<SemigroupSpec<S>> {
    let spec = SemigroupSpec {
        generators: gens,
        closure_cap: opts.closure_cap,
        word_cap: opts.word_cap,
        quasi_bound: opts.quasi_bound,
        tol: opts.tol,
    };
    spec.validate()?;
    Ok(spec)
}

fn common_eig(paths: &[PathBuf], opts: Opts) -> Result<ReportFile> {
    on_family!(load_family(paths)?, common_eig_typed(opts))
}

fn common_eig_typed<S: CommonSolver>(gens: Vec<Matrix<S>>, opts: Opts) -> Result<ReportFile> {
    let spec = spec_for(gens, opts)?;
    match common_eigenvector(&spec) {
        Ok(found) => {
            let rescaled = CommonEigenReport::verified(
                &spec.generators,
                found.vector.normalized_max(),
                found.classification,
                found.pathway.clone(),
                found.warnings.clone(),
                spec.tol,
            );
            let found = rescaled.unwrap_or(found);
            let mut r = ReportFile::new("common-eig", Status::Ok, opts.run_options());
            r.domain = Some(S::DOMAIN);
            r.classification = Some(found.classification.to_string());
            r.vector = Some(entries_of(&found.vector));
            r.lambdas = found.lambdas.iter().map(|l| Entry::from_scalar(l.to_scalar())).collect();
            r.residuals = found.residuals;
            r.pathway = found.pathway;
            r.warnings = found.warnings;
            Ok(r)
        }
        Err(e) if status_of(&e) == Status::NoResult => {
            let mut r = failed("common-eig", opts, &e);
            r.domain = Some(S::DOMAIN);
            if let Ok(a) = analyze(&spec) {
                r.classification = Some(a.classification.to_string());
                r.warnings = a.warnings;
            }
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

fn semigroup(paths: &[PathBuf], opts: Opts) -> Result<ReportFile> {
    on_family!(load_family(paths)?, semigroup_typed(opts))
}

fn semigroup_typed<S: Semiring>(gens: Vec<Matrix<S>>, opts: Opts) -> Result<ReportFile> {
    let spec = spec_for(gens, opts)?;
    let a = analyze(&spec)?;
    let mut r = ReportFile::new("semigroup", Status::Ok, opts.run_options());
    r.domain = Some(S::DOMAIN);
    r.classification = Some(a.classification.to_string());
    r.closure = Some(ClosureStats {
        elements: a.closure.len(),
        truncated: a.closure.truncated,
        depth: a.closure.depth(),
        layer_sizes: a.layers.iter().map(Vec::len).collect(),
    });
    r.warnings = a.warnings;
    Ok(r)
}

/// Recheck `report` against the matrices. Residuals are recomputed from
/// the stored vector and eigenvalues; closure statistics, classifications
/// and projections are recomputed from scratch and compared.
pub fn verify_report(report: &ReportFile, paths: &[PathBuf]) -> Result<ReportFile> {
    let mut out = ReportFile::new("verify", Status::Ok, report.options.clone());
    out.domain = report.domain;
    let mut problems = Vec::new();
    if report.status != Status::Ok {
        problems.push(format!("report status is not ok: {:?}", report.status));
    }
    match report.command.as_str() {
        "eig" | "common-eig" | "semigroup" => {
            let fam = load_family(paths)?;
            on_family!(fam, verify_family(report, &mut out, &mut problems))?;
        }
        "spectrum" => {
            let [path] = paths else {
                return Err(Error::InvalidInput("a spectrum report is checked against one matrix".into()));
            };
            verify_spectrum(report, parse_matrix_file(path)?, &mut out, &mut problems)?;
        }
        "project" => {
            let [path] = paths else {
                return Err(Error::InvalidInput("a projection report is checked against one generator file".into()));
            };
            let cone = load_projection(path)?;
            let y: Vector<MaxTimes> = vector_from_entries(required(&report.input_vector, "input_vector")?)?;
            let x: Vector<MaxTimes> = vector_from_entries(required(&report.vector, "vector")?)?;
            let expected = cone.project(&y)?;
            if !x.approx_eq(&expected, report.options.tol) {
                problems.push("projected vector differs from the recomputed projection".into());
            }
            if !x.leq_tol(&y, report.options.tol) {
                problems.push("projected vector is not below the input".into());
            }
        }
        other => return Err(Error::InvalidInput(format!("cannot verify a '{other}' report"))),
    }
    if !problems.is_empty() {
        out.status = Status::Rejected;
        out.error = Some(problems.join("; "));
    }
    Ok(out)
}

fn required<'a>(field: &'a Option<Vec<Entry>>, name: &str) -> Result<&'a [Entry]> {
    field.as_deref().ok_or_else(|| Error::InvalidInput(format!("report has no {name}")))
}

fn verify_family<S: Semiring>(gens: Vec<Matrix<S>>, report: &ReportFile, out: &mut ReportFile, problems: &mut Vec<String>) -> Result<()> {
    if report.domain.is_some_and(|d| d != S::DOMAIN) {
        return Err(Error::DomainMismatch { left: report.domain.unwrap_or(S::DOMAIN), right: S::DOMAIN });
    }
    let tol = report.options.tol;
    if report.command != "semigroup" {
        let v: Vector<S> = vector_from_entries(required(&report.vector, "vector")?)?;
        if v.len() != gens[0].rows() {
            return Err(Error::DimensionMismatch { expected: gens[0].rows(), found: v.len() });
        }
        if report.lambdas.len() != gens.len() {
            return Err(Error::InvalidInput(format!(
                "report has {} eigenvalues for {} matrices",
                report.lambdas.len(),
                gens.len()
            )));
        }
        if v.is_zero() {
            problems.push("vector is zero".into());
        }
        for (i, (a, l)) in gens.iter().zip(&report.lambdas).enumerate() {
            let lambda: S = l.typed(&format!("lambda {i}"))?;
            let r = eigen_residual(a, lambda, &v)?;
            if !(r <= tol) {
                problems.push(format!("matrix {i}: residual {r:.3e} exceeds {tol:.1e}"));
            }
            out.residuals.push(r);
        }
        out.lambdas = report.lambdas.clone();
    }
    if report.classification.is_some() || report.closure.is_some() {
        let spec = spec_for(gens, Opts::from_run_options(&report.options))?;
        let a = analyze(&spec)?;
        if let Some(c) = &report.classification {
            let claimed: Classification = c.parse()?;
            if claimed != a.classification {
                problems.push(format!("classification {claimed} does not match recomputed {}", a.classification));
            }
            out.classification = Some(a.classification.to_string());
        }
        if let Some(stats) = &report.closure {
            let sizes: Vec<usize> = a.layers.iter().map(Vec::len).collect();
            if stats.elements != a.closure.len() || stats.truncated != a.closure.truncated || stats.layer_sizes != sizes {
                problems.push("closure statistics do not match".into());
            }
        }
    }
    Ok(())
}

fn verify_spectrum(report: &ReportFile, m: AnyMatrix, out: &mut ReportFile, problems: &mut Vec<String>) -> Result<()> {
    if report.domain.is_some_and(|d| d != m.domain()) {
        return Err(Error::DomainMismatch { left: report.domain.unwrap_or(m.domain()), right: m.domain() });
    }
    let tol = report.options.tol;
    let mut check = |r: f64, i: usize| {
        if !(r <= tol) {
            problems.push(format!("eigenvalue {i}: residual {r:.3e} exceeds {tol:.1e}"));
        }
        out.residuals.push(r);
    };
    match m {
        AnyMatrix::MaxTimes(a) => {
            for (i, e) in report.spectrum.iter().enumerate() {
                let v: Vector<MaxTimes> = vector_from_entries(&e.vector)?;
                check(eigen_residual(&a, e.lambda.typed(&format!("eigenvalue {i}"))?, &v)?, i);
            }
        }
        AnyMatrix::NonnegReal(a) => verify_complex_spectrum(&to_complex(&a)?, report, &mut check)?,
        AnyMatrix::Complex(a) => verify_complex_spectrum(&a, report, &mut check)?,
    }
    Ok(())
}

fn verify_complex_spectrum(a: &Matrix<Complex64>, report: &ReportFile, check: &mut dyn FnMut(f64, usize)) -> Result<()> {
    for (i, e) in report.spectrum.iter().enumerate() {
        let v: Vector<Complex64> = vector_from_entries(&e.vector)?;
        let lambda: Complex64 = e.lambda.typed(&format!("eigenvalue {i}"))?;
        if v.is_zero() {
            check(f64::INFINITY, i);
        } else {
            check(eigen_residual(a, lambda, &v)?, i);
        }
    }
    Ok(())
}

fn verify(report_path: &PathBuf, paths: &[PathBuf]) -> Result<ReportFile> {
    let report = parse_report_file(report_path)?;
    verify_report(&report, paths)
}
