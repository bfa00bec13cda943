//! Batch front-end: parse JSON inputs, dispatch to the library, emit
//! certificates.
//!
//! Exit codes: 0 when a check passes or a construction succeeds, 1 for a
//! mathematically certified negative (the JSON output carries the
//! witness), 2 for input or structural errors. Identical inputs and flags
//! produce byte-identical JSON output.

mod output;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use locdil::schema::{FunctionFile, KernelFile, OperatorRepr, PovmFile, SemigroupRepr};
use locdil::{Error, Tolerances};
use output::*;

#[derive(Parser)]
#[command(
    name = "locdil",
    version,
    about = "Dilation toolkit for operators on towers of nested Hilbert spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an operator file and classify it
    CheckOperator(Common),
    /// Positive definiteness certificate for a kernel file
    CheckKernel(Common),
    /// Positive definiteness certificate for a semigroup function file
    CheckLpdf(Common),
    /// Factor a positive definite kernel into its reproducing space
    BuildRklhs(Common),
    /// Minimal dilation of a unital positive definite function
    Dilate(Common),
    /// Rho-dilation of a semigroup function
    RhoDilate {
        #[command(flatten)]
        common: Common,
        /// Scaling parameter of the dilation (positive)
        #[arg(long)]
        rho: f64,
    },
    /// Projection-valued dilation of a discrete operator-valued measure
    Naimark {
        #[command(flatten)]
        common: Common,
        /// Append the defect effect I - sum(E) before dilating
        #[arg(long)]
        defect_atom: bool,
    },
    /// Finite-horizon unitary dilation of a locally contraction
    UnitaryDilate {
        #[command(flatten)]
        common: Common,
        /// Horizon N: the compression identity holds for powers 1..=N
        #[arg(long, default_value_t = 8)]
        horizon: usize,
    },
    /// Windowed rho-contraction certification
    RhoCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: f64,
        /// Window N of the positivity test and polynomial degrees
        #[arg(long, default_value_t = 8)]
        horizon: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Input JSON file
    input: PathBuf,
    /// Write the JSON certificate here (otherwise stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Stdout rendering; files always receive JSON
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override the relative positive-semidefinite tolerance
    #[arg(long)]
    tol_psd: Option<f64>,
    /// Override the relative structural compatibility tolerance
    #[arg(long)]
    tol_struct: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl Common {
    fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(p) = self.tol_psd {
            tol.psd_rel = p;
        }
        if let Some(s) = self.tol_struct {
            tol.struct_rel = s;
        }
        tol
    }
}

/// A finished run: exit status, the JSON document, a text rendering.
struct Outcome {
    negative: bool,
    json: serde_json::Value,
    text: String,
}

impl Outcome {
    fn new(negative: bool, doc: &impl Serialize, text: String) -> Result<Self, Failure> {
        Ok(Outcome {
            negative,
            json: serde_json::to_value(doc).map_err(|e| Failure::Structural(e.to_string()))?,
            text,
        })
    }
}

/// Structural failures end the run with exit 2; certified negatives carry
/// a JSON document and exit 1.
enum Failure {
    Structural(String),
    Negative(serde_json::Value, String),
}

fn certified_negative(err: &Error) -> bool {
    matches!(
        err,
        Error::NotPositiveDefinite { .. }
            | Error::KernelNotHermitian { .. }
            | Error::NotPositive { .. }
            | Error::NotUnital { .. }
            | Error::BoundednessRange { .. }
            | Error::ShiftInconsistent { .. }
            | Error::EffectNotPositive { .. }
            | Error::EffectTooLarge { .. }
            | Error::EffectSum { .. }
            | Error::NotContraction { .. }
    )
}

fn lift(err: Error) -> Failure {
    if certified_negative(&err) {
        let message = err.to_string();
        Failure::Negative(
            serde_json::json!({
                "ok": false,
                "certified_negative": true,
                "message": message,
            }),
            format!("certified negative: {message}"),
        )
    } else {
        Failure::Structural(err.to_string())
    }
}

fn read_input<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Structural(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Failure::Structural(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("LOCDILATE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    let (common, outcome) = match &cli.command {
        Command::CheckOperator(c) => (c, check_operator(c)),
        Command::CheckKernel(c) => (c, check_kernel(c)),
        Command::CheckLpdf(c) => (c, check_lpdf(c)),
        Command::BuildRklhs(c) => (c, build_rklhs(c)),
        Command::Dilate(c) => (c, dilate(c)),
        Command::RhoDilate { common, rho } => (common, rho_dilate(common, *rho)),
        Command::Naimark {
            common,
            defect_atom,
        } => (common, naimark(common, *defect_atom)),
        Command::UnitaryDilate { common, horizon } => {
            (common, unitary_dilate(common, *horizon))
        }
        Command::RhoCheck {
            common,
            rho,
            horizon,
        } => (common, rho_check(common, *rho, *horizon)),
    };

    let (negative, json, text) = match outcome {
        Ok(o) => (o.negative, o.json, o.text),
        Err(Failure::Negative(json, text)) => (true, json, text),
        Err(Failure::Structural(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };

    let rendered = serde_json::to_string_pretty(&json).expect("serializable document");
    // Ignore broken pipes on stdout (e.g. piping into head).
    let print = |s: &str| {
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), "{s}");
    };
    if let Some(path) = &common.output {
        if let Err(e) = std::fs::write(path, format!("{rendered}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
        if common.format == Format::Text {
            print(&text);
        }
    } else {
        match common.format {
            Format::Json => print(&rendered),
            Format::Text => print(&text),
        }
    }
    if negative {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn check_operator(c: &Common) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let repr: OperatorRepr = read_input(&c.input)?;
    let op = repr.to_operator(&tol).map_err(lift)?;
    let classification = op.classify(&tol);
    let report = OperatorReport {
        source: locdil::schema::TowerRepr::of(op.source()),
        target: locdil::schema::TowerRepr::of(op.target()),
        square: op.is_square(),
        flags: classification.flags(),
        seminorms: op.seminorms(),
        tolerances: tol,
    };
    let text = render::operator(&report);
    Outcome::new(false, &report, text)
}

fn check_kernel(c: &Common) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let file: KernelFile = read_input(&c.input)?;
    let kernel = file.to_kernel(&tol).map_err(lift)?;
    let cert = locdil::is_lpdk(&kernel, &tol);
    let text = render::kernel(&cert);
    Outcome::new(!cert.ok, &cert, text)
}

fn check_lpdf(c: &Common) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let file: FunctionFile = read_input(&c.input)?;
    let phi = file.to_function(&tol).map_err(lift)?;
    let cert = locdil::is_lpdf(&phi, &tol);
    let text = render::kernel(&cert);
    Outcome::new(!cert.ok, &cert, text)
}

fn build_rklhs(c: &Common) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let file: KernelFile = read_input(&c.input)?;
    let kernel = file.to_kernel(&tol).map_err(lift)?;
    let cert = locdil::is_lpdk(&kernel, &tol);
    if !cert.ok {
        let text = render::kernel(&cert);
        return Err(Failure::Negative(
            serde_json::to_value(&cert).map_err(|e| Failure::Structural(e.to_string()))?,
            text,
        ));
    }
    let space = locdil::build_rklhs(&kernel, &tol).map_err(lift)?;
    let file = RklhsFile::of(&space, cert);
    let text = render::rklhs(&file);
    Outcome::new(false, &file, text)
}

fn dilate(c: &Common) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let file: FunctionFile = read_input(&c.input)?;
    let phi = file.to_function(&tol).map_err(lift)?;
    let cert = locdil::is_lpdf(&phi, &tol);
    if !cert.ok {
        let text = render::kernel(&cert);
        return Err(Failure::Negative(
            serde_json::to_value(&cert).map_err(|e| Failure::Structural(e.to_string()))?,
            text,
        ));
    }
    let d = locdil::dilate(&phi, &tol).map_err(lift)?;
    let out = DilationFile::of(&d, SemigroupRepr::of(phi.semigroup()));
    let text = render::dilation(&d.certificate);
    Outcome::new(false, &out, text)
}

fn rho_dilate(c: &Common, rho: f64) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let file: FunctionFile = read_input(&c.input)?;
    let psi = file.to_function(&tol).map_err(lift)?;
    let cert = locdil::rho_lpd_certificate(&psi, rho, &tol).map_err(lift)?;
    if !cert.ok {
        let text = render::kernel(&cert);
        return Err(Failure::Negative(
            serde_json::to_value(&cert).map_err(|e| Failure::Structural(e.to_string()))?,
            text,
        ));
    }
    let d = locdil::rho_dilate(&psi, rho, &tol).map_err(lift)?;
    let out = RhoDilationFile::of(&d, SemigroupRepr::of(psi.semigroup()));
    let text = render::rho_dilation(&d.certificate);
    Outcome::new(false, &out, text)
}

fn naimark(c: &Common, defect_atom: bool) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let file: PovmFile = read_input(&c.input)?;
    let mut povm = file.to_povm(&tol).map_err(lift)?;
    if defect_atom {
        povm = povm.with_defect_atom(&tol).map_err(lift)?;
    }
    let base = povm.tower().clone();
    let d = locdil::naimark(&povm, &tol).map_err(lift)?;
    let out = NaimarkFile::of(&d, &base);
    let text = render::naimark(&d.certificate);
    Outcome::new(false, &out, text)
}

fn unitary_dilate(c: &Common, horizon: usize) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let repr: OperatorRepr = read_input(&c.input)?;
    let op = repr.to_operator(&tol).map_err(lift)?;
    let base = op.source().clone();
    let d = locdil::unitary_dilation(&op, horizon, &tol).map_err(lift)?;
    let out = UnitaryDilationFile::of(&d, &base);
    let text = render::unitary(&d.certificate);
    Outcome::new(false, &out, text)
}

fn rho_check(c: &Common, rho: f64, horizon: usize) -> Result<Outcome, Failure> {
    let tol = c.tolerances();
    let repr: OperatorRepr = read_input(&c.input)?;
    let op = repr.to_operator(&tol).map_err(lift)?;
    let cert = locdil::rho_contraction_check(&op, rho, horizon, &tol).map_err(lift)?;
    let text = render::rho_check(&cert);
    Outcome::new(!cert.consistent(), &cert, text)
}
