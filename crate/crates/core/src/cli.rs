//! Command-line front end.
//!
//! Spec files are `key = value` lines (`#` starts a comment):
//!
//! ```text
//! fiber = affine_line
//! g = u^3/3 - t*u
//! label = airy
//! tol = 1e-10
//! ```
//!
//! Optional keys: `label`, `tol`, `ode_tol`, `stokes_tol`, `monodromy_tol`,
//! `duality_floor`. Exit codes: 0 success, 1 parse error, 2 precondition
//! violated, 3 a check failed, 4 numerical budget exhausted.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cohomology::{CohomologyBasis, ConnectionMatrix, FiberType, ProblemSpec, ScalarOde};
use crate::cycles::CycleBasis;
use crate::error::{Error, Result};
use crate::pipeline::Problem;
use crate::quadrature::{PeriodMatrix, QuadratureOptions};
use crate::singular::SingularSet;
use crate::verify::{check_monodromy, verify_all, CheckRecord, Thresholds, VerificationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub fiber: FiberType,
    pub g: String,
    pub label: String,
    pub tol: f64,
    pub thresholds: Thresholds,
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut fiber = None;
        let mut g = None;
        let mut label = None;
        let mut tol = 1e-10;
        let mut th = Thresholds::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let number = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x > 0.0)
                    .ok_or_else(|| Error::InvalidSpec(format!("line {}: {key} must be a positive number", n + 1)))
            };
            match key {
                "fiber" => fiber = Some(value.parse::<FiberType>()?),
                "g" => g = Some(value.to_string()),
                "label" => label = Some(value.to_string()),
                "tol" => tol = number()?,
                "ode_tol" => th.ode = number()?,
                "stokes_tol" => th.stokes = number()?,
                "monodromy_tol" => th.monodromy = number()?,
                "duality_floor" => th.duality = number()?,
                other => return Err(Error::InvalidSpec(format!("line {}: unknown key {other:?}", n + 1))),
            }
        }
        let fiber = fiber.ok_or_else(|| Error::InvalidSpec("missing key fiber".into()))?;
        let g = g.ok_or_else(|| Error::InvalidSpec("missing key g".into()))?;
        Ok(SpecFile {
            fiber,
            g,
            label: label.unwrap_or_default(),
            tol,
            thresholds: th,
        })
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::parse(self.fiber, &self.g, self.label.clone())
    }
}

/// `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let bad = || format!("expected re,im but got {s:?}");
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "0"),
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

#[derive(Parser, Debug)]
#[command(name = "expgm", version, about = "Exponential Gauss-Manin systems and their periods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fiber cohomology basis, connection matrix and cyclic ODE.
    Derive { spec: PathBuf },
    /// Singular parameter values.
    Singular { spec: PathBuf },
    /// Rapid-decay cycle basis at t.
    Cycles {
        spec: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        t: Complex64,
        /// Build the basis here and track it to t.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        from: Option<Complex64>,
    },
    /// Period matrix at t.
    Periods {
        spec: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        t: Complex64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        from: Option<Complex64>,
        /// Double-double arithmetic (about 32 digits).
        #[arg(long)]
        extended: bool,
        /// Refinement budget per entry.
        #[arg(long)]
        max_intervals: Option<usize>,
    },
    /// CSV of the first cycle's periods along a segment in t.
    Samples {
        spec: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        from: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        to: Complex64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run all checks at t.
    Verify {
        spec: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        t: Complex64,
        #[arg(long, default_value_t = 20)]
        stokes_count: u64,
    },
    /// Monodromy around one singular value.
    Monodromy {
        spec: PathBuf,
        #[arg(long)]
        around: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        t0: Complex64,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveOutput {
    pub label: String,
    pub fiber: FiberType,
    pub g: String,
    pub rank: usize,
    pub basis: CohomologyBasis,
    pub forms: Vec<String>,
    pub connection: ConnectionMatrix,
    pub connection_display: Vec<Vec<String>>,
    pub ode: Option<ScalarOde>,
    pub ode_display: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodsOutput {
    pub label: String,
    pub forms: Vec<String>,
    pub tol: f64,
    pub periods: PeriodMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyOutput {
    pub label: String,
    pub record: CheckRecord,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidSpec(_) => 1,
        Error::ToleranceNotMet { .. } | Error::PrecisionExhausted { .. } | Error::NonDecayingTail { .. } => 4,
        _ => 2,
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load(path: &PathBuf) -> Result<(SpecFile, Problem)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", path.display())))?;
    let file = SpecFile::parse(&text)?;
    let mut spec = file.problem_spec()?;
    if spec.label.is_empty() {
        spec.label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok((file, Problem::new(spec)?))
}

fn cycles(p: &Problem, t: Complex64, from: Option<Complex64>) -> Result<CycleBasis> {
    match from {
        Some(base) => p.cycles_along(base, &[t]),
        None => p.cycles_at(t),
    }
}

fn derive(p: &Problem) -> Result<DeriveOutput> {
    let ode = p.ode()?;
    Ok(DeriveOutput {
        label: p.spec.label.clone(),
        fiber: p.spec.fiber,
        g: p.spec.g.to_string(),
        rank: p.rank(),
        forms: p.basis.form_names(),
        basis: p.basis.clone(),
        connection_display: p.connection.entry_strings(),
        connection: p.connection.clone(),
        ode_display: ode.as_ref().map(ToString::to_string),
        ode,
        note: (p.rank() == 0).then(|| "rank zero".to_string()),
    })
}

fn samples(p: &Problem, from: Complex64, to: Complex64, steps: usize, opts: &QuadratureOptions) -> Result<String> {
    let r = p.rank();
    let mut csv = String::from("t_re,t_im");
    for j in 0..r {
        csv += &format!(",re_{j},im_{j},err_{j}");
    }
    csv.push('\n');
    let steps = steps.max(1);
    let mut basis = p.cycles_at(from)?;
    for k in 0..=steps {
        let t = from + (to - from) * (k as f64 / steps as f64);
        basis = p.track(&basis, &[t])?;
        csv += &format!("{},{}", t.re, t.im);
        if r > 0 {
            let m = p.periods(&basis, opts)?;
            for v in &m.entries[0] {
                csv += &format!(",{},{},{}", v.value.re, v.value.im, v.total_error());
            }
        }
        csv.push('\n');
    }
    Ok(csv)
}

/// Runs one command; returns the exit code and the text for stdout.
fn execute(cli: Cli) -> Result<(i32, String)> {
    match cli.command {
        Command::Derive { spec } => {
            let (_, p) = load(&spec)?;
            Ok((0, to_json(&derive(&p)?)))
        }
        Command::Singular { spec } => {
            let (_, p) = load(&spec)?;
            Ok((0, to_json::<SingularSet>(&p.singular)))
        }
        Command::Cycles { spec, t, from } => {
            let (_, p) = load(&spec)?;
            Ok((0, to_json(&cycles(&p, t, from)?)))
        }
        Command::Periods {
            spec,
            t,
            tol,
            from,
            extended,
            max_intervals,
        } => {
            let (file, p) = load(&spec)?;
            let tol = tol.unwrap_or(file.tol);
            let mut opts = QuadratureOptions::new(tol);
            if extended {
                opts = QuadratureOptions::extended(tol);
            }
            if let Some(n) = max_intervals {
                opts.max_intervals = n;
            }
            let c = cycles(&p, t, from)?;
            let out = PeriodsOutput {
                label: p.spec.label.clone(),
                forms: p.basis.form_names(),
                tol,
                periods: p.periods(&c, &opts)?,
            };
            Ok((0, to_json(&out)))
        }
        Command::Samples {
            spec,
            from,
            to,
            steps,
            tol,
        } => {
            let (file, p) = load(&spec)?;
            let opts = QuadratureOptions::new(tol.unwrap_or(file.tol));
            Ok((0, samples(&p, from, to, steps, &opts)?))
        }
        Command::Verify { spec, t, stokes_count } => {
            let (file, p) = load(&spec)?;
            let report: VerificationReport = verify_all(&p, t, &file.thresholds, stokes_count)?;
            Ok((if report.passed { 0 } else { 3 }, to_json(&report)))
        }
        Command::Monodromy { spec, around, t0, tol } => {
            let (file, p) = load(&spec)?;
            let tol = tol.unwrap_or(file.thresholds.monodromy);
            let (record, _) = check_monodromy(&p, around, t0, tol)?;
            let code = if record.passed { 0 } else { 3 };
            let out = MonodromyOutput {
                label: p.spec.label.clone(),
                record,
            };
            Ok((code, to_json(&out)))
        }
    }
}

pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli) {
        Ok((code, text)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
