//! `kinex`: command-line front end over the kinex library.
//!
//! Five subcommands cover the whole pipeline: `correlate` and `map` go from
//! an indicator panel to correlation/distance matrices and a 2-D country
//! map with an optional spanning tree; `regress` fits one indicator against
//! another across countries in a fixed year; `simulate` and `gini-curve`
//! run the seeded exchange model and compare it with the closed-form law.
//!
//! Every command writes its artifacts plus a `manifest.json` into
//! `--out-dir`. Failures print `kinex: error[CODE]: message` on stderr and
//! exit nonzero; the codes are stable and machine-parsable.

mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kinex::comove;
use kinex::kem::{self, SimConfig};
use kinex::panel::{CleaningPolicy, CountryCode, IndicatorKind, TimeSeriesPanel};
use kinex::regress;

use manifest::RunManifest;

#[derive(Debug)]
struct CliError {
    code: String,
    message: String,
}

type CliResult<T> = Result<T, CliError>;

impl From<kinex::Error> for CliError {
    fn from(e: kinex::Error) -> Self {
        CliError {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: "E-IO".into(),
        message: format!("{}: {e}", path.display()),
    }
}

#[derive(Parser)]
#[command(
    name = "kinex",
    version,
    about = "Inequality co-movement analytics and kinetic wealth-exchange simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise correlation and distance matrices of a panel.
    Correlate(CorrelateCmd),
    /// Low-dimensional country map (classical MDS), optional spanning tree.
    Map(MapCmd),
    /// Cross-country regression of Gini on savings in one year.
    Regress(RegressCmd),
    /// One seeded run of the wealth-exchange model.
    Simulate(SimulateCmd),
    /// Analytic vs simulated Gini across a saving-propensity grid.
    GiniCurve(GiniCurveCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum IndicatorOpt {
    Gini,
    Gds,
}

impl From<IndicatorOpt> for IndicatorKind {
    fn from(v: IndicatorOpt) -> Self {
        match v {
            IndicatorOpt::Gini => IndicatorKind::Gini,
            IndicatorOpt::Gds => IndicatorKind::Gds,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DropNegativeOpt {
    /// Indicator default: on for gds, off for gini.
    Auto,
    On,
    Off,
}

impl DropNegativeOpt {
    fn resolve(self, kind: IndicatorKind) -> bool {
        match self {
            DropNegativeOpt::Auto => kind.drops_negative_by_default(),
            DropNegativeOpt::On => true,
            DropNegativeOpt::Off => false,
        }
    }
}

fn parse_year_window(s: &str) -> Result<(i32, i32), String> {
    let (from, to) = s
        .split_once(':')
        .ok_or_else(|| format!("{s:?} is not an inclusive window FROM:TO"))?;
    let from: i32 = from
        .trim()
        .parse()
        .map_err(|_| format!("{from:?} is not a year"))?;
    let to: i32 = to
        .trim()
        .parse()
        .map_err(|_| format!("{to:?} is not a year"))?;
    if from > to {
        return Err(format!("window starts at {from}, after its end {to}"));
    }
    Ok((from, to))
}

/// A saving-propensity grid, either `start:step:end` or a comma list.
#[derive(Clone, Debug)]
struct LambdaGrid(Vec<f64>);

fn parse_lambda_grid(s: &str) -> Result<LambdaGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [_] => s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("{p:?} is not a number"))
            })
            .collect::<Result<Vec<f64>, String>>()?,
        [start, step, end] => {
            let start: f64 = start
                .trim()
                .parse()
                .map_err(|_| format!("{start:?} is not a number"))?;
            let step: f64 = step
                .trim()
                .parse()
                .map_err(|_| format!("{step:?} is not a number"))?;
            let end: f64 = end
                .trim()
                .parse()
                .map_err(|_| format!("{end:?} is not a number"))?;
            if !(step.is_finite() && step > 0.0) {
                return Err(format!("grid step must be positive, got {step}"));
            }
            let mut values = Vec::new();
            let mut k = 0u32;
            loop {
                // Snap accumulated grid values to 10 decimals so 0.1 steps
                // produce 0.3, not 0.30000000000000004.
                let v = round10(start + k as f64 * step);
                if v > end + step * 1e-9 {
                    break;
                }
                values.push(v);
                k += 1;
                if k > 1_000_000 {
                    return Err("grid has over a million points".into());
                }
            }
            values
        }
        _ => return Err(format!("{s:?} is neither start:step:end nor a comma list")),
    };
    if values.is_empty() {
        return Err("empty grid".into());
    }
    Ok(LambdaGrid(values))
}

fn round10(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

/// Flags shared by panel-consuming commands.
#[derive(Args)]
struct PanelArgs {
    /// Wide CSV panel: country rows, year columns, blank cells for gaps.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Indicator the file carries; picks the cleaning default.
    #[arg(long, value_enum)]
    indicator: IndicatorOpt,

    /// Minimum overlapping years for any pairwise statistic.
    #[arg(long, default_value_t = CleaningPolicy::DEFAULT_MIN_OVERLAP)]
    min_overlap: usize,

    /// Treat negative observations as missing.
    #[arg(long, value_enum, default_value = "auto")]
    drop_negative: DropNegativeOpt,

    /// Restrict to an inclusive year window.
    #[arg(long, value_parser = parse_year_window, value_name = "FROM:TO")]
    years: Option<(i32, i32)>,

    /// Restrict to these countries (comma separated), in this order.
    #[arg(long, value_delimiter = ',', value_name = "CODES")]
    countries: Option<Vec<String>>,
}

/// Flags shared by the simulation commands.
#[derive(Args)]
struct SimArgs {
    /// Number of agents.
    #[arg(long, default_value_t = 1000)]
    agents: usize,

    /// Measurement sweeps (each is one exchange per agent on average).
    #[arg(long, default_value_t = 5000)]
    sweeps: u64,

    /// Sweeps discarded before measuring starts.
    #[arg(long, default_value_t = 1000)]
    thermalization: u64,

    /// RNG seed; reruns with the same seed are bit-identical.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Initial wealth per agent.
    #[arg(long, default_value_t = 1.0)]
    initial_wealth: f64,

    /// Record a wealth snapshot every this many measurement sweeps.
    #[arg(long, default_value_t = 10)]
    snapshot_every: u64,
}

impl SimArgs {
    fn config(&self, lambda: f64) -> SimConfig {
        SimConfig {
            n_agents: self.agents,
            lambda,
            sweeps: self.sweeps,
            thermalization: self.thermalization,
            seed: self.seed,
            initial_wealth: self.initial_wealth,
            snapshot_every: self.snapshot_every,
        }
    }

    fn record(&self, man: &mut RunManifest) {
        man.param("agents", self.agents);
        man.param("sweeps", self.sweeps);
        man.param("thermalization", self.thermalization);
        man.param("seed", self.seed);
        man.param("initial_wealth", self.initial_wealth);
        man.param("snapshot_every", self.snapshot_every);
        man.param("rng_algorithm", kem::RNG_ALGORITHM);
    }
}

#[derive(Args)]
struct CorrelateCmd {
    #[command(flatten)]
    panel: PanelArgs,

    /// Directory for correlation.json, distance.json, dropped.json,
    /// manifest.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct MapCmd {
    #[command(flatten)]
    panel: PanelArgs,

    /// Embedding dimensions.
    #[arg(long, default_value_t = 2)]
    mds_dims: usize,

    /// Also write the minimum spanning tree (tree.json).
    #[arg(long)]
    mst: bool,

    /// Directory for embedding.json, tree.json, manifest.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RegressCmd {
    /// Gini panel CSV (the response).
    #[arg(long, value_name = "FILE")]
    gini: PathBuf,

    /// Gross-domestic-savings panel CSV (the regressor).
    #[arg(long, value_name = "FILE")]
    gds: PathBuf,

    /// Cross-section year.
    #[arg(long)]
    year: i32,

    /// Treat negative savings as missing (auto = on for gds).
    #[arg(long, value_enum, default_value = "auto")]
    drop_negative: DropNegativeOpt,

    /// Directory for regression.json, scatter.csv, manifest.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateCmd {
    /// Saving propensity in [0, 1).
    #[arg(long)]
    lambda: f64,

    #[command(flatten)]
    sim: SimArgs,

    /// Also write histogram.csv of pooled snapshot wealths with this many
    /// bins, next to the stationary-law density.
    #[arg(long, value_name = "BINS")]
    histogram_bins: Option<usize>,

    /// Directory for snapshots.csv, histogram.csv, manifest.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GiniCurveCmd {
    /// Grid of saving propensities: start:step:end or a comma list.
    #[arg(long, value_parser = parse_lambda_grid, default_value = "0:0.1:0.9", value_name = "GRID")]
    lambda_grid: LambdaGrid,

    #[command(flatten)]
    sim: SimArgs,

    /// Directory for gini_curve.csv, manifest.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Correlate(cmd) => cmd_correlate(cmd),
        Command::Map(cmd) => cmd_map(cmd),
        Command::Regress(cmd) => cmd_regress(cmd),
        Command::Simulate(cmd) => cmd_simulate(cmd),
        Command::GiniCurve(cmd) => cmd_gini_curve(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kinex: error[{}]: {}", e.code, e.message);
            ExitCode::FAILURE
        }
    }
}

/// Reads, digests, parses, restricts, and cleans the input panel; records
/// every resolved parameter in the manifest.
fn load_panel(
    args: &PanelArgs,
    man: &mut RunManifest,
) -> CliResult<(TimeSeriesPanel, CleaningPolicy)> {
    let bytes = fs::read(&args.input).map_err(|e| io_error(&args.input, e))?;
    man.digest("input", &bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError {
        code: "E-PARSE".into(),
        message: format!("{}: not valid UTF-8", args.input.display()),
    })?;

    let kind = IndicatorKind::from(args.indicator);
    let mut panel = TimeSeriesPanel::parse_csv(&text, kind)?;

    if let Some(raw) = &args.countries {
        let codes = raw
            .iter()
            .map(|c| CountryCode::new(c.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        panel = panel.select_countries(&codes)?;
        man.param("countries", raw.join(","));
    }
    if let Some((from, to)) = args.years {
        panel = panel.year_window(from, to);
        man.param("years", format!("{from}:{to}"));
    }

    let drop = args.drop_negative.resolve(kind);
    let policy = CleaningPolicy::new(drop, args.min_overlap)?;
    let panel = panel.cleaned(&policy);

    man.param("indicator", kind);
    man.param("min_overlap", args.min_overlap);
    man.param("drop_negative", drop);
    Ok((panel, policy))
}

fn cmd_correlate(cmd: CorrelateCmd) -> CliResult<()> {
    let mut man = RunManifest::new("correlate");
    let (panel, policy) = load_panel(&cmd.panel, &mut man)?;
    let result = comove::correlation_matrix(&panel, &policy)?;
    let dist = comove::distance_matrix(&result.matrix);

    record_drops(&result.dropped, &mut man);
    man.diag("countries_used", result.matrix.len());

    let out = &cmd.out_dir;
    ensure_dir(out)?;
    write_json(&out.join("correlation.json"), &result.matrix)?;
    write_json(&out.join("distance.json"), &dist)?;
    write_json(&out.join("dropped.json"), &result.dropped)?;
    write_json(&out.join("manifest.json"), &man)
}

fn cmd_map(cmd: MapCmd) -> CliResult<()> {
    let mut man = RunManifest::new("map");
    let (panel, policy) = load_panel(&cmd.panel, &mut man)?;
    man.param("mds_dims", cmd.mds_dims);
    man.param("mst", cmd.mst);

    let result = comove::correlation_matrix(&panel, &policy)?;
    let dist = comove::distance_matrix(&result.matrix);
    let embedding = comove::classical_mds(&dist, cmd.mds_dims)?;

    record_drops(&result.dropped, &mut man);
    man.diag("non_euclidean", embedding.is_non_euclidean());
    if embedding.is_non_euclidean() {
        eprintln!(
            "kinex: warning: distances are non-Euclidean (a retained MDS eigenvalue is negative); its axis is zeroed"
        );
    }

    let out = &cmd.out_dir;
    ensure_dir(out)?;
    write_json(&out.join("embedding.json"), &embedding)?;
    if cmd.mst {
        let tree = comove::mst(&dist)?;
        man.diag("mst_total_weight", tree.total_weight());
        write_json(&out.join("tree.json"), &tree)?;
    }
    write_json(&out.join("manifest.json"), &man)
}

#[derive(Serialize)]
struct RegressionReport {
    year: i32,
    countries: Vec<CountryCode>,
    fit: regress::RegressionResult,
}

fn cmd_regress(cmd: RegressCmd) -> CliResult<()> {
    let mut man = RunManifest::new("regress");

    let gini_bytes = fs::read(&cmd.gini).map_err(|e| io_error(&cmd.gini, e))?;
    man.digest("gini", &gini_bytes);
    let gds_bytes = fs::read(&cmd.gds).map_err(|e| io_error(&cmd.gds, e))?;
    man.digest("gds", &gds_bytes);

    let gini = TimeSeriesPanel::parse_csv(
        std::str::from_utf8(&gini_bytes).map_err(|_| CliError {
            code: "E-PARSE".into(),
            message: format!("{}: not valid UTF-8", cmd.gini.display()),
        })?,
        IndicatorKind::Gini,
    )?;
    let gds = TimeSeriesPanel::parse_csv(
        std::str::from_utf8(&gds_bytes).map_err(|_| CliError {
            code: "E-PARSE".into(),
            message: format!("{}: not valid UTF-8", cmd.gds.display()),
        })?,
        IndicatorKind::Gds,
    )?;

    let drop = cmd.drop_negative.resolve(IndicatorKind::Gds);
    let gds = gds.cleaned(&CleaningPolicy::new(
        drop,
        CleaningPolicy::MIN_OVERLAP_FLOOR,
    )?);

    let section = regress::year_cross_section(&gds, &gini, cmd.year)?;
    let fit = regress::ols_fit(&section.x, &section.y)?;

    man.param("year", cmd.year);
    man.param("drop_negative", drop);
    man.diag("n_obs", fit.n_obs);

    let out = &cmd.out_dir;
    ensure_dir(out)?;
    write_json(
        &out.join("regression.json"),
        &RegressionReport {
            year: section.year,
            countries: section.countries.clone(),
            fit,
        },
    )?;

    let mut scatter = String::from("country,gds,gini,fitted\n");
    for (k, code) in section.countries.iter().enumerate() {
        let fitted = fit.intercept + fit.slope * section.x[k];
        let _ = writeln!(scatter, "{code},{},{},{fitted}", section.x[k], section.y[k]);
    }
    write_text(&out.join("scatter.csv"), &scatter)?;
    write_json(&out.join("manifest.json"), &man)
}

fn cmd_simulate(cmd: SimulateCmd) -> CliResult<()> {
    let mut man = RunManifest::new("simulate");
    let cfg = cmd.sim.config(cmd.lambda);
    cmd.sim.record(&mut man);
    man.param("lambda", cmd.lambda);
    man.param("rng_stream", 0);

    let run = kem::simulate(&cfg)?;
    let ginis = run.snapshot_ginis()?;

    man.diag(
        "conservation_relative_drift",
        format!("{:e}", run.relative_drift()),
    );
    man.diag("snapshots", run.snapshots.len());
    man.diag("final_gini", kem::sample_gini(run.state.wealths())?);

    let out = &cmd.out_dir;
    ensure_dir(out)?;
    let mut csv = String::from("sweep,gini\n");
    for (snap, g) in run.snapshots.iter().zip(&ginis) {
        let _ = writeln!(csv, "{},{g}", snap.sweep);
    }
    write_text(&out.join("snapshots.csv"), &csv)?;

    if let Some(bins) = cmd.histogram_bins {
        man.param("histogram_bins", bins);
        let law = kem::GammaLaw::for_lambda(cfg.lambda, cfg.initial_wealth)?;
        let hist = kem::wealth_histogram(&run.pooled_wealths(), bins, &law)?;
        let mut csv = String::from("left,right,count,empirical_density,model_density\n");
        for b in &hist {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                b.left, b.right, b.count, b.empirical_density, b.model_density
            );
        }
        write_text(&out.join("histogram.csv"), &csv)?;
    }
    write_json(&out.join("manifest.json"), &man)
}

fn cmd_gini_curve(cmd: GiniCurveCmd) -> CliResult<()> {
    let mut man = RunManifest::new("gini-curve");
    let threads = threads_from_env()?;
    let base = cmd.sim.config(0.0);
    cmd.sim.record(&mut man);

    let grid = &cmd.lambda_grid.0;
    man.param(
        "lambda_grid",
        grid.iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    man.param("rng_streams", format!("0..{}", grid.len()));

    let curve = kem::gini_curve(grid, &base, threads)?;

    let out = &cmd.out_dir;
    ensure_dir(out)?;
    write_text(&out.join("gini_curve.csv"), &curve.to_csv())?;
    write_json(&out.join("manifest.json"), &man)
}

/// Thread count for grid commands: the KINEX_THREADS variable, 0 or unset
/// meaning one thread per available CPU.
fn threads_from_env() -> CliResult<usize> {
    match std::env::var("KINEX_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError {
            code: "E-INVALID".into(),
            message: "KINEX_THREADS is not valid unicode".into(),
        }),
        Ok(s) => s.trim().parse().map_err(|_| CliError {
            code: "E-INVALID".into(),
            message: format!("KINEX_THREADS={s:?} is not a thread count"),
        }),
    }
}

fn record_drops(dropped: &[comove::DroppedCountry], man: &mut RunManifest) {
    if dropped.is_empty() {
        return;
    }
    let codes: Vec<String> = dropped.iter().map(|d| d.code.to_string()).collect();
    man.diag("dropped_countries", codes.join(","));
    eprintln!(
        "kinex: warning: excluded {} countr{} with unusable pairings: {}",
        dropped.len(),
        if dropped.len() == 1 { "y" } else { "ies" },
        codes.join(", ")
    );
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError {
        code: "E-IO".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}
