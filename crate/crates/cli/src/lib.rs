//! The `hhk` command-line tool.
//!
//! Exit codes: 0 on success, 1 for I/O and precondition errors (malformed
//! files, grid mismatch, bad flags), 2 for contract violations in `--strict`
//! mode and for failed `verify` checks.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hhk_core::analytic::{self, corpus_field};
use hhk_core::bounded::{boundary_trace, dirichlet_reconstruct_with_stats};
use hhk_core::io::{self as fieldio, FieldData};
use hhk_core::ops::{curl, div, grad};
use hhk_core::{
    decompose, reconstruct_alternative, reconstruct_from_curl_div, Backend, DecayRequirement, Grid3, ScalarField,
    VectorField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub mod vtk;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hhk_core::Error),
    #[error("{}: {source}", .path.display())]
    File { path: PathBuf, source: hhk_core::Error },
    #[error("{0}")]
    Usage(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Contract(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "hhk", version, about = "Reconstruct and decompose decaying vector fields in R^3")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for all randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split A into grad u + B.
    Decompose(DecomposeArgs),
    /// Recover A from its curl and divergence.
    Reconstruct(ReconstructArgs),
    /// Recover A inside the grid box from curl, divergence and boundary values.
    Bounded(BoundedArgs),
    /// Run a built-in check.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Convert a field file to legacy ASCII VTK.
    ExportVtk(ExportArgs),
    /// Sample a corpus field to a file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct PotentialFlags {
    #[arg(long, default_value_t = Backend::FftConv, value_parser = parse_backend)]
    pub backend: Backend,
    /// Turn decay and diagnostic violations into exit code 2.
    #[arg(long)]
    pub strict: bool,
    /// Skip the decay hypothesis check on tagged inputs.
    #[arg(long)]
    pub allow_slow_decay: bool,
    /// Write diagnostics as JSON to this path.
    #[arg(long)]
    pub json_diagnostics: Option<PathBuf>,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: hhk_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub input: PathBuf,
    /// Output paths for u and B, comma separated.
    #[arg(short, long, value_delimiter = ',', required = true)]
    pub output: Vec<PathBuf>,
    #[command(flatten)]
    pub flags: PotentialFlags,
    /// Largest normalized orthogonality accepted under `--strict`.
    #[arg(long, default_value_t = 0.05)]
    pub max_orthogonality: f64,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub curl: PathBuf,
    #[arg(long)]
    pub div: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Use curl N[a] - grad N[f] instead of N[curl a - grad f].
    #[arg(long)]
    pub alternative: bool,
    #[command(flatten)]
    pub flags: PotentialFlags,
}

#[derive(Debug, Args)]
pub struct BoundedArgs {
    #[arg(long)]
    pub curl: PathBuf,
    #[arg(long)]
    pub div: PathBuf,
    /// Vector field file whose boundary-shell values are the Dirichlet data.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub json_diagnostics: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Compare the decay integral I1 with its closed-form bound.
    Decay {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        rho: f64,
    },
    /// Check curl grad = 0 and div curl = 0 on seeded random fields.
    Identities {
        #[arg(long, default_value_t = 33)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Reconstruct corpus fields from their curl and divergence, and check
    /// the field file round trip.
    Roundtrip {
        #[arg(long, default_value_t = 33)]
        n: usize,
        #[arg(long, default_value_t = 6.0)]
        half_width: f64,
        #[arg(long, default_value_t = Backend::FftConv, value_parser = parse_backend)]
        backend: Backend,
        /// Fail when a relative L2 error exceeds this.
        #[arg(long)]
        max_error: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value = "field")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Quantity {
    Field,
    Curl,
    Div,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// gradient, solenoidal, mixed, slow-decay or zero.
    pub name: String,
    #[arg(long, default_value_t = 33)]
    pub n: usize,
    #[arg(long, default_value_t = 6.0)]
    pub half_width: f64,
    #[arg(long, value_enum, default_value_t = Quantity::Field)]
    pub what: Quantity,
    /// Omit the decay tag from the file.
    #[arg(long)]
    pub untagged: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // A second build in the same process fails harmlessly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cli.command {
        Command::Decompose(args) => cmd_decompose(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Bounded(args) => cmd_bounded(args),
        Command::Verify { check } => cmd_verify(check, cli.seed),
        Command::ExportVtk(args) => cmd_export_vtk(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn load(path: &Path) -> CliResult<FieldData> {
    fieldio::load(path).map_err(|source| CliError::File { path: path.to_owned(), source })
}

fn load_vector(path: &Path) -> CliResult<VectorField> {
    match load(path)? {
        FieldData::Vector(v) => Ok(v),
        FieldData::Scalar(_) => Err(CliError::Usage(format!("{}: expected a vector field", path.display()))),
    }
}

fn load_scalar(path: &Path) -> CliResult<ScalarField> {
    match load(path)? {
        FieldData::Scalar(s) => Ok(s),
        FieldData::Vector(_) => Err(CliError::Usage(format!("{}: expected a scalar field", path.display()))),
    }
}

fn save(path: &Path, field: FieldData) -> CliResult {
    fieldio::save(path, &field).map_err(|source| CliError::File { path: path.to_owned(), source })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> CliResult {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(value).expect("diagnostics serialize");
        fs::write(path, text + "\n").map_err(|e| CliError::File { path: path.to_owned(), source: e.into() })?;
    }
    Ok(())
}

/// Decay violations become contract violations under `--strict`.
fn classify(e: hhk_core::Error, strict: bool) -> CliError {
    if strict && e.is_decay_violation() {
        CliError::Contract(e.to_string())
    } else {
        CliError::Core(e)
    }
}

fn interior_max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, v| m.max(v.abs()))
}

fn cmd_decompose(args: DecomposeArgs) -> CliResult {
    let [u_path, b_path] = args.output.as_slice() else {
        return Err(CliError::Usage("-o needs two paths: u.fld,B.fld".into()));
    };
    let flags = &args.flags;
    let a = load_vector(&args.input)?;
    let requirement = if flags.allow_slow_decay {
        DecayRequirement::Waived
    } else if flags.strict {
        DecayRequirement::Pointwise
    } else {
        DecayRequirement::Weighted
    };
    let result = decompose(&a, flags.backend, requirement).map_err(|e| classify(e, flags.strict))?;
    save(u_path, result.u.into())?;
    save(b_path, result.b.into())?;
    let d = result.diagnostics;
    write_json(flags.json_diagnostics.as_deref(), &d)?;
    println!("orthogonality        {:e}", d.orthogonality);
    println!("div_B_inf            {:e}", d.div_b_inf);
    println!("curl_gradu_inf       {:e}", d.curl_gradu_inf);
    println!("recomposition_rel_l2 {:e}", d.recomposition_rel_l2);
    // NaN counts as a violation.
    let orthogonal = d.orthogonality <= args.max_orthogonality;
    if flags.strict && !orthogonal {
        return Err(CliError::Contract(format!(
            "orthogonality {:e} exceeds {:e}",
            d.orthogonality, args.max_orthogonality
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ReconstructDiagnostics {
    formula: &'static str,
    backend: String,
    /// Interior sup-norm of `curl A - a`.
    curl_residual_inf: f64,
    /// Interior sup-norm of `div A - f`.
    div_residual_inf: f64,
}

fn data_residuals(result: &VectorField, a: &VectorField, f: &ScalarField) -> CliResult<(f64, f64)> {
    let grid = *result.grid();
    let inside = |idx: &usize| grid.is_interior(grid.node_of(*idx), 2);
    let dc = curl(result)?.sub(a)?;
    let dd = div(result)?.sub(f)?;
    Ok((
        interior_max((0..grid.len()).filter(inside).flat_map(|i| dc.values()[i])),
        interior_max((0..grid.len()).filter(inside).map(|i| dd.values()[i])),
    ))
}

fn cmd_reconstruct(args: ReconstructArgs) -> CliResult {
    let flags = &args.flags;
    let a = load_vector(&args.curl)?;
    let f = load_scalar(&args.div)?;
    let requirement = if flags.allow_slow_decay { DecayRequirement::Waived } else { DecayRequirement::Pointwise };
    let (formula, result) = if args.alternative {
        ("alternative", reconstruct_alternative(&a, &f, flags.backend, requirement))
    } else {
        ("curl-div", reconstruct_from_curl_div(&a, &f, flags.backend, requirement))
    };
    let result = result.map_err(|e| classify(e, flags.strict))?;
    let (curl_residual_inf, div_residual_inf) = data_residuals(&result, &a, &f)?;
    save(&args.output, result.into())?;
    let diagnostics =
        ReconstructDiagnostics { formula, backend: flags.backend.to_string(), curl_residual_inf, div_residual_inf };
    write_json(flags.json_diagnostics.as_deref(), &diagnostics)?;
    println!("curl_residual_inf {curl_residual_inf:e}");
    println!("div_residual_inf  {div_residual_inf:e}");
    Ok(())
}

#[derive(Serialize)]
struct BoundedDiagnostics {
    iterations: [usize; 3],
    relative_residual: [f64; 3],
    curl_residual_inf: f64,
    div_residual_inf: f64,
}

fn cmd_bounded(args: BoundedArgs) -> CliResult {
    let a = load_vector(&args.curl)?;
    let f = load_scalar(&args.div)?;
    let trace = load_vector(&args.trace)?;
    if !a.grid().same_as(trace.grid()) {
        return Err(hhk_core::Error::GridMismatch.into());
    }
    let solution = dirichlet_reconstruct_with_stats(&a, &f, &boundary_trace(&trace), args.tol)?;
    let (curl_residual_inf, div_residual_inf) = data_residuals(&solution.field, &a, &f)?;
    let stats = solution.stats;
    save(&args.output, solution.field.into())?;
    let diagnostics = BoundedDiagnostics {
        iterations: stats.map(|s| s.iterations),
        relative_residual: stats.map(|s| s.relative_residual),
        curl_residual_inf,
        div_residual_inf,
    };
    write_json(args.json_diagnostics.as_deref(), &diagnostics)?;
    for (c, s) in stats.iter().enumerate() {
        println!("component {c}: {} iterations, relative residual {:e}", s.iterations, s.relative_residual);
    }
    Ok(())
}

/// Center, wave vector, phase, width and amplitude of one windowed wave.
type Wave = ([f64; 3], [f64; 3], f64, f64, f64);

/// A smooth random scalar field: a few Gaussian-windowed plane waves.
pub fn random_smooth_scalar(grid: Grid3, rng: &mut impl Rng) -> ScalarField {
    let terms: Vec<Wave> = (0..4)
        .map(|_| {
            let center = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
            let wave = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            (center, wave, rng.random_range(0.0..6.3), rng.random_range(0.3..1.0), rng.random_range(-2.0..2.0))
        })
        .collect();
    ScalarField::sample(grid, |x| {
        terms
            .iter()
            .map(|(c, k, phase, width, amp)| {
                let d2: f64 = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum();
                let kx: f64 = (0..3).map(|i| k[i] * x[i]).sum();
                amp * (-d2 / (width * width)).exp() * (kx + phase).sin()
            })
            .sum()
    })
    .expect("smooth field is finite")
}

pub fn random_smooth_vector(grid: Grid3, rng: &mut impl Rng) -> VectorField {
    let parts = [0, 1, 2].map(|_| random_smooth_scalar(grid, rng));
    VectorField::from_components([&parts[0], &parts[1], &parts[2]]).expect("same grid")
}

/// Worst ratio of `|curl grad u|` and `|div curl A|` to `max|field| / h^2`
/// over nodes two or more nodes from every face, across `count` seeded fields.
pub fn identity_defect(n: usize, count: usize, seed: u64) -> hhk_core::Result<f64> {
    let grid = Grid3::centered(n, 1.0)?;
    let h2 = grid.spacing() * grid.spacing();
    let inside = |idx: &usize| grid.is_interior(grid.node_of(*idx), 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let u = random_smooth_scalar(grid, &mut rng);
        let cg = curl(&grad(&u)?)?;
        let defect = interior_max((0..grid.len()).filter(inside).flat_map(|i| cg.values()[i]));
        worst = worst.max(defect * h2 / u.max_abs());

        let a = random_smooth_vector(grid, &mut rng);
        let dc = div(&curl(&a)?)?;
        let defect = interior_max((0..grid.len()).filter(inside).map(|i| dc.values()[i]));
        worst = worst.max(defect * h2 / a.max_norm());
    }
    Ok(worst)
}

fn cmd_verify(check: VerifyCommand, seed: u64) -> CliResult {
    match check {
        VerifyCommand::Decay { gamma, rho } => {
            let integral = analytic::i1_integral(gamma, rho)?;
            let bound = analytic::i1_bound(gamma, rho)?;
            let pass = integral <= bound;
            println!("integral {integral:.12}");
            println!("bound    {bound:.12}");
            println!("{}", if pass { "PASS" } else { "FAIL" });
            if !pass {
                return Err(CliError::Contract(format!("I1 = {integral} exceeds its bound {bound}")));
            }
        }
        VerifyCommand::Identities { n, count } => {
            let worst = identity_defect(n, count, seed)?;
            let pass = worst <= 1e-12;
            println!("worst relative defect {worst:e} over {count} fields (n = {n}, seed = {seed})");
            println!("{}", if pass { "PASS" } else { "FAIL" });
            if !pass {
                return Err(CliError::Contract(format!("identity defect {worst:e} above 1e-12")));
            }
        }
        VerifyCommand::Roundtrip { n, half_width, backend, max_error } => {
            let grid = Grid3::centered(n, half_width)?;
            let mut failures = Vec::new();
            for name in ["gradient", "solenoidal", "mixed"] {
                let field = corpus_field(name).expect("corpus field");
                let exact = field.sample_field(grid)?;
                let a = field.sample_curl(grid)?;
                let f = field.sample_div(grid)?;
                let result = reconstruct_from_curl_div(&a, &f, backend, DecayRequirement::Pointwise)?;
                let error = result.relative_l2_error(&exact)?;
                let bytes = fieldio::to_bytes(&result.clone().into());
                let exact_io = fieldio::parse(&bytes)? == FieldData::Vector(result);
                println!(
                    "{name:<11} relative L2 error {error:.6e}  file round trip {}",
                    if exact_io { "exact" } else { "MISMATCH" }
                );
                if !exact_io || max_error.is_some_and(|m| error.is_nan() || error > m) {
                    failures.push(name);
                }
            }
            println!("{}", if failures.is_empty() { "PASS" } else { "FAIL" });
            if !failures.is_empty() {
                return Err(CliError::Contract(format!("round trip failed for {}", failures.join(", "))));
            }
        }
    }
    Ok(())
}

fn cmd_export_vtk(args: ExportArgs) -> CliResult {
    let field = load(&args.input)?;
    let file =
        fs::File::create(&args.output).map_err(|e| CliError::File { path: args.output.clone(), source: e.into() })?;
    let mut out = BufWriter::new(file);
    vtk::write_vtk(&mut out, &field, &args.name)
        .and_then(|()| std::io::Write::flush(&mut out))
        .map_err(|e| CliError::File { path: args.output.clone(), source: e.into() })
}

fn cmd_gen(args: GenArgs) -> CliResult {
    let grid = Grid3::centered(args.n, args.half_width)?;
    let field: FieldData = if args.name == "zero" {
        match args.what {
            Quantity::Div => ScalarField::zeros(grid).into(),
            _ => VectorField::zeros(grid).into(),
        }
    } else {
        let source = corpus_field(&args.name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown field '{}', expected gradient, solenoidal, mixed, slow-decay or zero",
                args.name
            ))
        })?;
        match args.what {
            Quantity::Field => source.sample_field(grid)?.into(),
            Quantity::Curl => source.sample_curl(grid)?.into(),
            Quantity::Div => source.sample_div(grid)?.into(),
        }
    };
    let field = if args.untagged {
        match field {
            FieldData::Scalar(s) => s.with_decay(None).into(),
            FieldData::Vector(v) => v.with_decay(None).into(),
        }
    } else {
        field
    };
    save(&args.output, field)
}
