//! Command-line driver: instance generation, bounds, duals, reconstruction and verification.
//!
//! Exit codes: 0 when every binding check passes, 1 when any fails, 2 for
//! unreadable or invalid input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use cgframe_core::controlled::{controlled_bounds, reconstruct};
use cgframe_core::duals::{canonical_dual_bounds, duality_residuals};
use cgframe_core::recon::{
    compare_preconditioning, frame_algorithm, predicted_iterations, worst_case_vector,
};
use cgframe_core::suite::probe_vectors;
use cgframe_core::{
    canonical_dual, generate, CheckReport, FrameInstanceFile, GeneratorKind, IterConfig,
    LoadedInstance, RangeCertificate, ReportFile, Suite, Tolerances,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Generic,
    Parseval,
    Commuting,
    IllConditioned,
    DualPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Bessel,
    Frame,
    Dual,
    Identities,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Bessel => Suite::Bessel,
            SuiteArg::Frame => Suite::Frame,
            SuiteArg::Dual => Suite::Dual,
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cgframe", version, about = "Controlled g-frame toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded instance file.
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Condition number for `ill-conditioned`.
        #[arg(long, default_value_t = 1e4)]
        kappa: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the controlled frame bounds.
    Bounds {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Canonical dual, or the stored dual pair, with residuals.
    Dual {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reconstruction residuals and the frame algorithm with and without the controllers.
    Recon {
        file: PathBuf,
        /// Relative error target of the iteration.
        #[arg(long, default_value_t = 1e-8)]
        target: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iter: usize,
        /// Widen the bounds handed to the iteration by this factor.
        #[arg(long, default_value_t = 1.0)]
        loosen: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a verification suite on one or more instance files.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Override the identity, reconstruction, dual, Pythagorean and Parseval tolerances.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Verify the files concurrently; output order follows the argument order.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn load(path: &Path, tol: Tolerances) -> CliResult<LoadedInstance> {
    let file = FrameInstanceFile::load(path)?;
    file.build(tol)
        .map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn render(reports: &[ReportFile], format: Format) -> String {
    match format {
        Format::Json if reports.len() == 1 => to_json(&reports[0]),
        Format::Json => to_json(&reports),
        Format::Markdown => reports
            .iter()
            .map(ReportFile::to_markdown)
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn exit_for(reports: &[ReportFile]) -> i32 {
    if reports.iter().all(ReportFile::all_passed) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

pub fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Generate {
            kind,
            dim,
            blocks,
            seed,
            kappa,
            out,
        } => {
            let kind = match kind {
                KindArg::Generic => GeneratorKind::Generic,
                KindArg::Parseval => GeneratorKind::Parseval,
                KindArg::Commuting => GeneratorKind::Commuting,
                KindArg::IllConditioned => GeneratorKind::IllConditioned { kappa },
                KindArg::DualPair => GeneratorKind::DualPair,
            };
            let file = generate(kind, dim, blocks, seed)?;
            emit(out.as_deref(), &file.to_json())?;
            Ok(EXIT_PASS)
        }
        Command::Bounds { file, format } => {
            let inst = load(&file, Tolerances::default())?;
            let b = controlled_bounds(&inst.system);
            let text = match format {
                Format::Json => to_json(&b),
                Format::Markdown => format!("A = {}\nB = {}\n", b.lower, b.upper),
            };
            emit(None, &text)?;
            Ok(EXIT_PASS)
        }
        Command::Dual { file, out, format } => {
            let inst = load(&file, Tolerances::default())?;
            let report = dual_report(&inst, &file.display().to_string())?;
            emit(
                out.as_deref(),
                &render(std::slice::from_ref(&report), format),
            )?;
            Ok(exit_for(std::slice::from_ref(&report)))
        }
        Command::Recon {
            file,
            target,
            max_iter,
            loosen,
            out,
            format,
        } => {
            if loosen.is_nan() || loosen < 1.0 {
                return Err(CliError("--loosen must be at least 1".into()));
            }
            let inst = load(&file, Tolerances::default())?;
            let cfg = IterConfig {
                relaxation: None,
                max_iter,
                target_residual: target,
            };
            let report = recon_report(&inst, &file.display().to_string(), &cfg, loosen)?;
            emit(
                out.as_deref(),
                &render(std::slice::from_ref(&report), format),
            )?;
            Ok(exit_for(std::slice::from_ref(&report)))
        }
        Command::Verify {
            files,
            suite,
            tol,
            out,
            format,
            parallel,
        } => {
            let mut tolerances = Tolerances::default();
            if let Some(t) = tol {
                if t.is_nan() || t <= 0.0 {
                    return Err(CliError("--tol must be positive".into()));
                }
                tolerances.id = t;
                tolerances.recon = t;
                tolerances.dual = t;
                tolerances.pyth = t;
                tolerances.parseval = t;
            }
            let suite: Suite = suite.into();
            let reports = verify_files(&files, suite, tolerances, parallel)?;
            emit(out.as_deref(), &render(&reports, format))?;
            Ok(exit_for(&reports))
        }
    }
}

/// Loads and verifies each file; the first load error aborts the command.
pub fn verify_files(
    files: &[PathBuf],
    suite: Suite,
    tol: Tolerances,
    parallel: bool,
) -> CliResult<Vec<ReportFile>> {
    let one = |path: &PathBuf| -> CliResult<ReportFile> {
        let inst = load(path, tol)?;
        Ok(cgframe_core::verify(
            &inst,
            suite,
            &path.display().to_string(),
        ))
    };
    if !parallel || files.len() < 2 {
        return files.iter().map(one).collect();
    }
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(files.len());
    let chunk = files.len().div_ceil(workers);
    let results: Vec<CliResult<ReportFile>> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(one).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

fn dual_report(inst: &LoadedInstance, name: &str) -> CliResult<ReportFile> {
    let sys = &inst.system;
    let tol = sys.tolerances();
    let mut report = ReportFile::new(name, "dual");
    if let Some(dual) = &inst.dual {
        let r = duality_residuals(sys, dual)?;
        report.push(
            CheckReport::new("dual_pair", "sum R_i^L R_i^M = Id", tol.dual)
                .with_residual(r.max())
                .detail("primary_first", r.primary_first)
                .detail("dual_first", r.dual_first)
                .detail("gram", r.gram)
                .detail("expansion", r.expansion)
                .finish(),
        );
    }
    match canonical_dual(sys) {
        Ok(cd) => {
            let b = canonical_dual_bounds(&cd);
            report.push(
                CheckReport::new(
                    "canonical_dual",
                    "sum C* L_i* G_i = Id with bounds in [1/B, 1/A]",
                    tol.recon,
                )
                .with_residual(cd.synthesis_residual.max(cd.analysis_residual))
                .with_certificate(RangeCertificate::new(
                    "dual bounds",
                    (b.bounds.lower, b.bounds.upper),
                    (b.required_lower, b.required_upper),
                    tol.recon * b.required_upper.max(1.0),
                ))
                .finish(),
            );
        }
        Err(e) => report.skip("canonical_dual", e.to_string()),
    }
    Ok(report)
}

fn recon_report(
    inst: &LoadedInstance,
    name: &str,
    cfg: &IterConfig,
    loosen: f64,
) -> CliResult<ReportFile> {
    let sys = &inst.system;
    let tol = sys.tolerances();
    let mut report = ReportFile::new(name, "recon");
    if !sys.is_frame() {
        report.skip(
            "recon",
            format!("lower bound {} is not positive", sys.bounds().lower),
        );
        return Ok(report);
    }
    let worst = probe_vectors(sys.dim(), 3, inst.metadata.seed)
        .iter()
        .map(|f| reconstruct(sys, f).map(|r| r.max_residual()))
        .collect::<cgframe_core::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report.push(
        CheckReport::new(
            "reconstruction",
            "f = sum P_i S^-1 f = S^-1 sum P_i f",
            tol.recon,
        )
        .with_residual(worst)
        .finish(),
    );

    let b = sys.bounds();
    let (lo, hi) = (b.lower / loosen, b.upper * loosen);
    let f = worst_case_vector(sys);
    let g = sys.frame_operator().mul_vec(&f);
    let (_, trace) = frame_algorithm(sys.frame_operator(), lo, hi, &g, cfg)?;
    report.push(
        CheckReport::new(
            "frame_algorithm",
            "Richardson iteration contracts at (B-A)/(B+A)",
            1e-12,
        )
        .with_certificate(RangeCertificate::new(
            "step ratio",
            (0.0, trace.max_step_ratio()),
            (0.0, trace.contraction_rate),
            1e-12,
        ))
        .detail("iterations", trace.iterations_used as f64)
        .detail(
            "predicted",
            predicted_iterations(lo, hi, cfg.target_residual) as f64,
        )
        .detail("condition_number", trace.condition_number)
        .detail("final_error", trace.final_error)
        .detail("converged", if trace.converged { 1.0 } else { 0.0 })
        .finish(),
    );

    let identity = cgframe_core::ControllerPair::identity(sys.dim());
    if sys.pair() != &identity {
        match compare_preconditioning(sys.family(), sys.pair(), None, cfg) {
            Ok(cmp) => {
                let gap = |used: usize, predicted: usize| {
                    let d = (used as f64 - predicted as f64).abs();
                    (d, d)
                };
                report.push(
                    CheckReport::new(
                        "preconditioning",
                        "plain and controlled runs within 5 of their predicted counts",
                        0.0,
                    )
                    .with_certificate(RangeCertificate::new(
                        "plain count gap",
                        gap(cmp.plain_iterations, cmp.plain_predicted),
                        (0.0, 5.0),
                        0.0,
                    ))
                    .with_certificate(RangeCertificate::new(
                        "controlled count gap",
                        gap(cmp.controlled_iterations, cmp.controlled_predicted),
                        (0.0, 5.0),
                        0.0,
                    ))
                    .detail("plain_condition", cmp.plain_condition)
                    .detail("controlled_condition", cmp.controlled_condition)
                    .detail("plain_iterations", cmp.plain_iterations as f64)
                    .detail("controlled_iterations", cmp.controlled_iterations as f64)
                    .finish(),
                );
            }
            Err(e) => report.skip("preconditioning", e.to_string()),
        }
    }
    Ok(report)
}
