//! Argument parsing and subcommands of the `legcop` binary.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use legcop::reference::{from_kendall_tau_with_dof, DEFAULT_DOF};
use legcop::{
    estimate_coefficients, run_benchmark, select_degree, spearman_rho, BenchmarkConfig,
    DegreeVector, Family, FittedEstimator, Grid, LscvMode, LscvScan, PseudoSample, Sample,
    ShrinkageSpec, ShrunkEstimator,
};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "legcop",
    version,
    about = "Legendre projection copula estimators"
)]
pub struct Cli {
    #[command(flatten)]
    pub shared: Shared,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Shared {
    /// Input CSV with a header row and one observation per line.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file, or directory for `fit`. Defaults to stdout where possible.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Literal,
    Consistent,
}

impl From<Mode> for LscvMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Literal => LscvMode::Literal,
            Mode::Consistent => LscvMode::EstimatorConsistent,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the estimators and write coefficients, grids and a summary.
    Fit(FitArgs),
    /// Draw a sample from a reference copula.
    Simulate(SimulateArgs),
    /// Monte Carlo error tables against reference copulas.
    Benchmark(BenchmarkArgs),
    /// LSCV score for every degree up to --max-degree.
    LscvScan(ScanArgs),
    /// Spearman's rho of a bivariate sample.
    Spearman,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Fixed degree N in every dimension.
    #[arg(long, conflicts_with = "select")]
    pub degree: Option<usize>,
    /// Choose N by LSCV (the default when --degree is absent).
    #[arg(long)]
    pub select: bool,
    #[arg(long, default_value_t = 20)]
    pub max_degree: usize,
    #[arg(long, default_value_t = 100)]
    pub grid_t: usize,
    /// Exponential tilt parameters, one per column.
    #[arg(long, value_delimiter = ',')]
    pub shrink_theta: Option<Vec<f64>>,
    /// Replace negative density values by zero in the written grid.
    #[arg(long)]
    pub clip_negative: bool,
    #[arg(long, value_enum, default_value_t = Mode::Literal)]
    pub lscv_mode: Mode,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub family: Family,
    /// Kendall's tau of each bivariate margin (ignored for independence).
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = DEFAULT_DOF)]
    pub dof: u32,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_delimiter = ',', default_value = "frank")]
    pub families: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    pub taus: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "500")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 100)]
    pub grid_t: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 20)]
    pub max_degree: usize,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Literal)]
    pub lscv_mode: Mode,
    #[arg(long, value_delimiter = ',', default_value = "10,25")]
    pub bernstein: Vec<usize>,
    /// Also score the density estimator on the coarse grid.
    #[arg(long)]
    pub density: bool,
    /// Score only the density estimator.
    #[arg(long, requires = "density")]
    pub density_only: bool,
    #[arg(long, value_delimiter = ',')]
    pub shrink_theta: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_DOF)]
    pub dof: u32,
    /// CSV report path (stdout when neither --out nor --json is given).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 20)]
    pub max_degree: usize,
    #[arg(long, value_enum, default_value_t = Mode::Literal)]
    pub lscv_mode: Mode,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.shared.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().context("building the worker pool")?;
    pool.install(|| match &cli.command {
        Command::Fit(a) => cmd_fit(&cli.shared, a),
        Command::Simulate(a) => cmd_simulate(&cli.shared, a),
        Command::Benchmark(a) => cmd_benchmark(&cli.shared, a),
        Command::LscvScan(a) => cmd_lscv_scan(&cli.shared, a),
        Command::Spearman => cmd_spearman(&cli.shared),
    })
}

/// Reads a header row and numeric records. Errors carry the line number.
pub fn read_sample(path: &Path) -> Result<Sample> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let width = reader
        .headers()
        .with_context(|| format!("reading the header of {}", path.display()))?
        .len();
    let mut data = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            anyhow::anyhow!("{}: line {line}: {e}", path.display())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                anyhow::anyhow!(
                    "{}: line {line}, column {}: `{cell}` is not a number",
                    path.display(),
                    j + 1
                )
            })?;
            data.push(v);
        }
        n += 1;
    }
    if width < 2 {
        bail!(
            "{}: need at least two columns, found {width}",
            path.display()
        );
    }
    Ok(Sample::new(n, width, data)?)
}

fn input_pseudo(shared: &Shared, min_n: usize) -> Result<PseudoSample> {
    let Some(path) = &shared.input else {
        bail!("--input is required");
    };
    let sample = read_sample(path)?;
    if sample.n() < min_n {
        bail!(
            "{}: need at least {min_n} observations, found {}",
            path.display(),
            sample.n()
        );
    }
    Ok(sample.to_pseudo()?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes to `--output` if given, else stdout.
fn with_output(shared: &Shared, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match &shared.output {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn scan_json(scan: &LscvScan) -> serde_json::Value {
    json!({
        "candidates": scan.candidates(),
        "scores": scan.scores(),
        "selected": scan.selected(),
    })
}

fn cmd_fit(shared: &Shared, a: &FitArgs) -> Result<()> {
    let Some(dir) = &shared.output else {
        bail!("fit needs --output <directory>");
    };
    let pseudo = input_pseudo(shared, 3)?;
    let d = pseudo.dim();
    let spec = match &a.shrink_theta {
        Some(t) => {
            if t.len() != d {
                bail!("--shrink-theta needs {d} values, got {}", t.len());
            }
            Some(ShrinkageSpec::exponential(t.clone())?)
        }
        None => None,
    };
    let grid = Grid::regular(a.grid_t, d)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let scan = match a.degree {
        Some(_) => None,
        None => Some(select_degree(&pseudo, a.max_degree, a.lscv_mode.into())?),
    };
    let degree = a
        .degree
        .unwrap_or_else(|| scan.as_ref().map_or(0, LscvScan::selected));
    let dv = DegreeVector::uniform(degree, d)?;
    let fit = FittedEstimator::new(estimate_coefficients(&pseudo, &dv)?);

    let mut w = create(&dir.join("coefficients.csv"))?;
    fit.coefficients().write_csv(&mut w)?;
    w.flush()?;

    let mut density = match &spec {
        Some(s) => ShrunkEstimator::fit(&pseudo, &dv, s)?.density_grid(&grid)?,
        None => fit.density_grid(&grid)?,
    };
    if a.clip_negative {
        density.clip_negative();
    }
    let mut w = create(&dir.join("density_grid.csv"))?;
    density.write_csv(&grid, &mut w)?;
    w.flush()?;
    if d == 2 {
        let mut w = create(&dir.join("density_matrix.dat"))?;
        density.write_gnuplot_matrix(&grid, &mut w)?;
        w.flush()?;
    }

    let mut w = create(&dir.join("copula_grid.csv"))?;
    fit.copula_grid(&grid)?.write_csv(&grid, &mut w)?;
    w.flush()?;

    if let Some(scan) = &scan {
        let mut w = create(&dir.join("lscv_scan.csv"))?;
        scan.write_csv(&mut w)?;
        w.flush()?;
    }

    let spearman = if d == 2 {
        Some(spearman_rho(&pseudo)?)
    } else {
        None
    };
    match shared.format {
        Format::Json => {
            let summary = json!({
                "schema_version": 1,
                "n": pseudo.n(),
                "dim": d,
                "degree": degree,
                "selected": scan.is_some(),
                "spearman_rho": spearman,
                "shrink_theta": a.shrink_theta,
                "lscv": scan.as_ref().map(scan_json),
            });
            let mut w = create(&dir.join("summary.json"))?;
            serde_json::to_writer_pretty(&mut w, &summary)?;
            writeln!(w)?;
            w.flush()?;
        }
        Format::Csv => {
            let mut w = create(&dir.join("summary.csv"))?;
            writeln!(w, "key,value")?;
            writeln!(w, "n,{}", pseudo.n())?;
            writeln!(w, "dim,{d}")?;
            writeln!(w, "degree,{degree}")?;
            writeln!(w, "selected,{}", scan.is_some())?;
            if let Some(r) = spearman {
                writeln!(w, "spearman_rho,{}", fmt(r))?;
            }
            w.flush()?;
        }
    }
    println!("N = {degree}");
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_simulate(shared: &Shared, a: &SimulateArgs) -> Result<()> {
    let tau = if a.family == Family::Independence {
        0.0
    } else {
        a.tau
    };
    let model = from_kendall_tau_with_dof(a.family, tau, a.dim, a.dof)?;
    let sample = model.sample(a.n, shared.seed)?;
    with_output(shared, |w| {
        let header: Vec<String> = (1..=sample.dim()).map(|j| format!("u_{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for row in sample.rows() {
            let cells: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })
}

fn cmd_benchmark(shared: &Shared, a: &BenchmarkArgs) -> Result<()> {
    let cfg = BenchmarkConfig {
        families: a.families.clone(),
        taus: a.taus.clone(),
        ns: a.n.clone(),
        reps: a.reps,
        grid_t: a.grid_t,
        dim: a.dim,
        seed: shared.seed,
        max_degree: a.max_degree,
        fixed_degree: a.degree,
        lscv_mode: a.lscv_mode.into(),
        dof: a.dof,
        bernstein_ks: a.bernstein.clone(),
        copula: !a.density_only,
        density: a.density,
        shrink_thetas: a.shrink_theta.clone(),
    };
    let report = run_benchmark(&cfg)?;
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = &a.json {
        let mut w = create(p)?;
        report.write_json(&mut w)?;
        w.flush()?;
    }
    if a.out.is_none() && a.json.is_none() {
        with_output(shared, |w| match shared.format {
            Format::Csv => report.write_csv(w),
            Format::Json => report.write_json(w),
        })?;
    }
    Ok(())
}

fn cmd_lscv_scan(shared: &Shared, a: &ScanArgs) -> Result<()> {
    let pseudo = input_pseudo(shared, 3)?;
    let scan = select_degree(&pseudo, a.max_degree, a.lscv_mode.into())?;
    with_output(shared, |w| match shared.format {
        Format::Csv => scan.write_csv(w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &scan_json(&scan))?;
            writeln!(w)
        }
    })
}

fn cmd_spearman(shared: &Shared) -> Result<()> {
    let pseudo = input_pseudo(shared, 1)?;
    if pseudo.dim() != 2 {
        bail!("spearman needs exactly two columns, found {}", pseudo.dim());
    }
    let rho = spearman_rho(&pseudo)?;
    with_output(shared, |w| match shared.format {
        Format::Csv => writeln!(w, "spearman_rho\n{}", fmt(rho)),
        Format::Json => writeln!(w, "{}", json!({ "spearman_rho": rho })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn arguments_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_lists_and_families() {
        let cli = Cli::parse_from([
            "legcop",
            "benchmark",
            "--families",
            "clayton,t",
            "--taus",
            "0.3,0.8",
            "--n",
            "500,1000",
        ]);
        let Command::Benchmark(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.families, [Family::Clayton, Family::Student]);
        assert_eq!(a.taus, [0.3, 0.8]);
        assert_eq!(a.n, [500, 1000]);
        assert!(Cli::try_parse_from(["legcop", "fit", "--degree", "2", "--select"]).is_err());
    }
}
