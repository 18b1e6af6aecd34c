use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tentspace::audit::{self, AuditPlan};
use tentspace::functionals::{self, AVariant};
use tentspace::halfspace::{self, TimeGrid};
use tentspace::io;
use tentspace::verify::{self, CheckConfig, Suite};
use tentspace::zoo::{self, SpaceKind, ZooParams};
use tentspace::{PointSet, Space};

#[derive(Parser)]
#[command(name = "tentspace", version, about = "Tent-space functionals on finite metric measure spaces")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a built-in space and write it as CSV.
    Gen(GenArgs),
    /// Audit doubling, nice intersections and maximal-operator bounds.
    Audit(AuditArgs),
    /// Tent-space norm of a function given as CSV.
    Norm(NormArgs),
    /// Evaluate a functional pointwise.
    Eval(EvalArgs),
    /// Run verification checks.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct SpaceSource {
    /// Coordinate CSV (`id,x0,…,weight`), or a distance matrix with --weights.
    #[arg(long, conflicts_with = "gen")]
    space: Option<PathBuf>,
    /// Weight CSV (`id,weight`) accompanying a distance matrix.
    #[arg(long, requires = "space")]
    weights: Option<PathBuf>,
    /// Built-in generator instead of a file.
    #[arg(long, value_parser = parse_kind)]
    gen: Option<SpaceKind>,
    /// Point count (1-D grid, cloud) or side length (planar lattices).
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Width of the removed strip.
    #[arg(long, default_value_t = 10.0)]
    gap: f64,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    slabs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceFormat {
    /// Coordinates and weight per row.
    Coords,
    /// Distance matrix plus a separate weight file.
    Matrix,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_parser = parse_kind)]
    kind: SpaceKind,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, default_value_t = 10.0)]
    gap: f64,
    #[arg(long, value_enum, default_value = "coords")]
    format: SpaceFormat,
    /// Output path (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Weight file for `--format matrix`.
    #[arg(long)]
    weights_out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    source: SpaceSource,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Comma-separated radii for the doubling and NI audits.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Comma-separated exponents for the maximal-operator ratio.
    #[arg(long, value_delimiter = ',', default_value = "1.5,2,4")]
    hl: Vec<f64>,
    #[arg(long, default_value_t = 16)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FunctionalArgs {
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Lusin normalisation: y-alpha (default), y-1, x-alpha, x-1.
    #[arg(long, default_value = "y-alpha")]
    variant: String,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    source: SpaceSource,
    #[command(flatten)]
    grid: GridArgs,
    /// Function CSV: header `tau,<ids…>`, one row per slab.
    #[arg(long)]
    function: PathBuf,
    #[command(flatten)]
    functional: FunctionalArgs,
    /// Write the Lusin functional per point.
    #[arg(long = "emit-A")]
    emit_a: Option<PathBuf>,
    /// Write the Carleson functional per point.
    #[arg(long = "emit-C")]
    emit_c: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Functional {
    Lusin,
    Carleson,
    Maximal,
    Averaging,
    Stopping,
    Density,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(value_enum)]
    functional: Functional,
    #[command(flatten)]
    source: SpaceSource,
    #[command(flatten)]
    grid: GridArgs,
    /// Function CSV for lusin, carleson and stopping.
    #[arg(long)]
    function: Option<PathBuf>,
    /// Per-point CSV (`id,value`) for maximal and averaging.
    #[arg(long)]
    values: Option<PathBuf>,
    #[command(flatten)]
    functional_args: FunctionalArgs,
    /// Truncation height for lusin.
    #[arg(long)]
    h: Option<f64>,
    /// Averaging radius.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long = "bigM")]
    big_m: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Comma-separated ids of the open set for density.
    #[arg(long, value_delimiter = ',')]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    /// Space to check; the built-in verification zoo when absent.
    #[command(flatten)]
    source: SpaceSource,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "all")]
    suite: String,
    /// Run a single named check instead of a suite.
    #[arg(long)]
    check: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long = "bigM")]
    big_m: Option<f64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<SpaceKind, String> {
    s.parse().map_err(|e: tentspace::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen(a) => cmd_gen(a, seed),
        Command::Audit(a) => cmd_audit(a, seed),
        Command::Norm(a) => cmd_norm(a),
        Command::Eval(a) => cmd_eval(a, seed),
        Command::Verify(a) => cmd_verify(a, seed),
    }
}

impl SpaceSource {
    fn params(&self, seed: u64) -> ZooParams {
        ZooParams {
            n: self.n,
            spacing: self.spacing,
            gap: self.gap,
            seed,
        }
    }

    fn is_given(&self) -> bool {
        self.space.is_some() || self.gen.is_some()
    }

    fn load(&self, seed: u64) -> Result<Space> {
        match (&self.space, self.gen) {
            (Some(path), _) => io::load_space(path, self.weights.as_deref())
                .with_context(|| format!("reading space from {}", path.display())),
            (None, Some(kind)) => Ok(zoo::generate_space(kind, &self.params(seed))?),
            (None, None) => bail!("give a space with --space or --gen"),
        }
    }

    fn describe(&self, seed: u64) -> (String, serde_json::Value) {
        match (&self.space, self.gen) {
            (Some(path), _) => (
                "file".into(),
                serde_json::json!({ "space": path, "weights": self.weights }),
            ),
            (None, Some(kind)) => (
                kind.to_string(),
                serde_json::to_value(self.params(seed)).expect("plain struct"),
            ),
            (None, None) => ("none".into(), serde_json::Value::Null),
        }
    }
}

impl GridArgs {
    fn build(&self, space: &Space, alpha_min: f64, alpha_max: f64) -> Result<TimeGrid> {
        let default = TimeGrid::default_for(space, alpha_min, alpha_max)?;
        if self.tmin.is_none() && self.sigma.is_none() && self.slabs.is_none() {
            return Ok(default);
        }
        Ok(TimeGrid::new(
            self.tmin.unwrap_or(default.t_min()),
            self.sigma.unwrap_or(default.sigma()),
            self.slabs.unwrap_or(default.slabs()),
        )?)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn cmd_gen(a: GenArgs, seed: u64) -> Result<ExitCode> {
    let params = ZooParams {
        n: a.n,
        spacing: a.spacing,
        gap: a.gap,
        seed,
    };
    let space = zoo::generate_space(a.kind, &params)?;
    match a.format {
        SpaceFormat::Coords => io::write_coordinates(&space, output(a.out.as_deref())?)?,
        SpaceFormat::Matrix => {
            let wpath = a
                .weights_out
                .ok_or_else(|| anyhow!("--format matrix needs --weights-out"))?;
            io::write_distance_matrix(&space, output(a.out.as_deref())?)?;
            io::write_weights(&space, output(Some(&wpath))?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit(a: AuditArgs, seed: u64) -> Result<ExitCode> {
    let space = a.source.load(seed)?;
    let (kind, params) = a.source.describe(seed);
    let plan = AuditPlan {
        doubling_radii: a.radii.clone(),
        apertures: vec![(a.alpha, a.beta)],
        ni_radii: a.radii,
        hl_exponents: a.hl,
        trials: a.trials,
        seed,
    };
    let report = audit::audit_space(&space, &kind, params, &plan)?;
    let mut w = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn variant(s: &str) -> Result<AVariant> {
    Ok(s.parse()?)
}

fn cmd_norm(a: NormArgs) -> Result<ExitCode> {
    let space = a.source.load(0)?;
    let fa = &a.functional;
    let grid = a.grid.build(&space, fa.alpha, fa.alpha)?;
    let f = io::read_function(&space, &grid, open(&a.function)?)
        .with_context(|| format!("reading function from {}", a.function.display()))?;
    let v = variant(&fa.variant)?;
    let norm = functionals::tent_norm(&space, &grid, &f, fa.p, fa.q, fa.alpha, v)?;
    println!("{norm}");
    if let Some(path) = &a.emit_a {
        let vals = functionals::lusin_a(&space, &grid, &f, fa.q, fa.alpha, v, None)?;
        io::write_point_values(&space, &vals, "A", output(Some(path))?)?;
    }
    if let Some(path) = &a.emit_c {
        let vals = functionals::carleson_c(&space, &grid, &f, fa.q, fa.alpha)?;
        io::write_point_values(&space, &vals, "C", output(Some(path))?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(a: EvalArgs, seed: u64) -> Result<ExitCode> {
    let space = a.source.load(seed)?;
    let fa = &a.functional_args;
    let grid = || a.grid.build(&space, fa.alpha, fa.alpha);
    let function = |grid: &TimeGrid| -> Result<_> {
        let path = a.function.as_ref().ok_or_else(|| anyhow!("this functional needs --function"))?;
        Ok(io::read_function(&space, grid, open(path)?)?)
    };
    let point_values = || -> Result<Vec<f64>> {
        let path = a.values.as_ref().ok_or_else(|| anyhow!("this functional needs --values"))?;
        Ok(io::read_point_vector(&space, open(path)?)?)
    };
    let (column, values) = match a.functional {
        Functional::Lusin => {
            let g = grid()?;
            let f = function(&g)?;
            ("A", functionals::lusin_a(&space, &g, &f, fa.q, fa.alpha, variant(&fa.variant)?, a.h)?)
        }
        Functional::Carleson => {
            let g = grid()?;
            let f = function(&g)?;
            ("C", functionals::carleson_c(&space, &g, &f, fa.q, fa.alpha)?)
        }
        Functional::Stopping => {
            let g = grid()?;
            let f = function(&g)?;
            let m = match a.big_m {
                Some(m) => m,
                None => 2.0 * audit::stopping_density_constant(&space, fa.alpha)?.powf(1.0 / fa.q),
            };
            ("h", functionals::stopping_height(&space, &g, &f, fa.q, m, fa.alpha)?)
        }
        Functional::Maximal => ("M", functionals::maximal(&space, &point_values()?)?),
        Functional::Averaging => {
            let s = a.s.ok_or_else(|| anyhow!("averaging needs --s"))?;
            ("Ms", functionals::averaging_ms(&space, &point_values()?, s)?)
        }
        Functional::Density => {
            let idx = a
                .set
                .iter()
                .map(|id| space.index_of(id))
                .collect::<tentspace::Result<Vec<_>>>()?;
            let open = PointSet::from_indices(space.len(), idx);
            let sets = halfspace::gamma_density_set(&space, &open, a.gamma)?;
            let ind = (0..space.len())
                .map(|x| if sets.o_star.contains(x) { 1.0 } else { 0.0 })
                .collect();
            ("in_O_star", ind)
        }
    };
    io::write_point_values(&space, &values, column, output(a.out.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs, seed: u64) -> Result<ExitCode> {
    let config = CheckConfig {
        alpha: a.alpha,
        beta: a.beta,
        p: a.p,
        q: a.q,
        gamma: a.gamma,
        big_m: a.big_m,
        seed,
        trials: a.trials,
        ..CheckConfig::default()
    };
    let spaces = if a.source.is_given() {
        let space = a.source.load(seed)?;
        let grid = a.grid.build(&space, a.alpha.min(a.beta), a.alpha.max(a.beta))?;
        vec![(space, grid)]
    } else {
        verify::standard_spaces(&config)?
    };
    let results = match &a.check {
        Some(name) => spaces
            .iter()
            .map(|(s, g)| verify::run_check(name, s, g, &config))
            .collect::<tentspace::Result<Vec<_>>>()?,
        None => verify::run_suite(a.suite.parse::<Suite>()?, &spaces, &config)?,
    };
    match a.format {
        ReportFormat::Table => print!("{}", verify::summary_table(&results)),
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&results)?),
    }
    if let Some(path) = &a.out {
        let mut w = output(Some(path))?;
        serde_json::to_writer_pretty(&mut w, &results)?;
        writeln!(w)?;
        w.flush()?;
    }
    let failed = results.iter().any(|r| r.failed());
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
