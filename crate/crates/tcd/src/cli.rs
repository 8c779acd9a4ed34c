//! Command-line interface: `generate`, `discover`, and `sweep`.
//!
//! `generate` writes synthetic convoy scenes, `discover` runs one method on
//! one scene, and `sweep` crosses methods with parameter grids over scene
//! directories and writes report tables. Exit status reflects harness
//! health: a sweep whose cells contain method failures still exits 0,
//! because those failures are data (scored as zero and flagged), not crashes.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{
    emit_report, lag_samples, run_sweep, ReportFormat, ReportOptions, SweepCell, SweepRequest,
};
use crate::methods::{discover, Method, MethodConfig};
use crate::scene::{load_scene_csv, Variant};
use crate::synth::{generate_batch, SceneGenConfig};

/// Temporal causal discovery on vehicle-convoy time series.
#[derive(Debug, Parser)]
#[command(name = "tcd", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic two-vehicle convoy scenes plus an independent
    /// driver, and write them as CSV files with a manifest.
    Generate(GenerateArgs),
    /// Run one discovery method on one scene CSV and print the graph.
    Discover(DiscoverArgs),
    /// Evaluate methods across scene directories and parameter grids.
    Sweep(SweepArgs),
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"lo,hi\", got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Number of scenes to generate.
    #[arg(long)]
    count: usize,
    /// Signal to emit: "acceleration" or "velocity".
    #[arg(long)]
    variant: Variant,
    /// Directory for the scene CSVs and manifest.toml.
    #[arg(long)]
    out_dir: PathBuf,
    /// Base seed; scene i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 10.0)]
    frequency_hz: f64,
    /// Scene duration range in seconds, as "lo,hi".
    #[arg(long, default_value = "50,70", value_parser = parse_range)]
    duration_range_s: (f64, f64),
    /// Velocity-goal changes for the lead vehicle.
    #[arg(long, default_value_t = 12)]
    convoy_actions: usize,
    /// Velocity-goal changes for the independent vehicle.
    #[arg(long, default_value_t = 12)]
    independent_actions: usize,
    /// Initial follower gap range in meters, as "lo,hi".
    #[arg(long, default_value = "10,100", value_parser = parse_range)]
    convoy_distance_m: (f64, f64),
    /// Proportional controller gain.
    #[arg(long, default_value_t = 1.0)]
    proportional_gain: f64,
    /// Integral controller gain.
    #[arg(long, default_value_t = 0.0)]
    integral_gain: f64,
    /// Derivative controller gain.
    #[arg(long, default_value_t = 0.0)]
    derivative_gain: f64,
    /// Minimum spacing between goal changes in seconds.
    #[arg(long, default_value_t = 1.0)]
    min_action_interval_s: f64,
    /// Hard velocity limits in m/s, as "lo,hi".
    #[arg(long, default_value = "0,44.7", value_parser = parse_range)]
    velocity_bounds_mps: (f64, f64),
    /// Starting velocity range in m/s, as "lo,hi".
    #[arg(long, default_value = "4.47,26.8", value_parser = parse_range)]
    start_velocity_bounds_mps: (f64, f64),
    /// Hard acceleration limits in m/s^2, as "lo,hi".
    #[arg(long, default_value = "-6.56,3.5", value_parser = parse_range, allow_hyphen_values = true)]
    acceleration_bounds_mps2: (f64, f64),
    /// Follower's target gap per unit of its own speed, in seconds.
    #[arg(long, default_value_t = 2.24)]
    headway_s: f64,
    /// Follower observation delay in seconds.
    #[arg(long, default_value_t = 0.5)]
    reaction_time_s: f64,
    /// Per-scene range for fixed actuation noise (m/s^2), as "lo,hi".
    #[arg(long, default_value = "0.1,1.6", value_parser = parse_range)]
    fixed_actuary_noise_mps2: (f64, f64),
    /// Per-scene range for proportional actuation noise, as "lo,hi".
    #[arg(long, default_value = "0.1,1.6", value_parser = parse_range)]
    proportional_actuary_noise: (f64, f64),
    /// Per-scene range for fixed sensory noise (m), as "lo,hi".
    #[arg(long, default_value = "0.01,0.16", value_parser = parse_range)]
    fixed_sensory_noise_m: (f64, f64),
    /// Per-scene range for proportional sensory noise, as "lo,hi".
    #[arg(long, default_value = "0.005,0.08", value_parser = parse_range)]
    proportional_sensory_noise: (f64, f64),
}

impl GenerateArgs {
    fn to_config(&self) -> SceneGenConfig {
        SceneGenConfig {
            variant: self.variant,
            frequency_hz: self.frequency_hz,
            duration_range_s: self.duration_range_s,
            convoy_actions: self.convoy_actions,
            independent_actions: self.independent_actions,
            min_convoy_distance_m: self.convoy_distance_m.0,
            max_convoy_distance_m: self.convoy_distance_m.1,
            proportional_gain: self.proportional_gain,
            integral_gain: self.integral_gain,
            derivative_gain: self.derivative_gain,
            min_action_interval_s: self.min_action_interval_s,
            velocity_bounds_mps: self.velocity_bounds_mps,
            start_velocity_bounds_mps: self.start_velocity_bounds_mps,
            acceleration_bounds_mps2: self.acceleration_bounds_mps2,
            safe_distance_over_velocity_s: self.headway_s,
            reaction_time_s: self.reaction_time_s,
            fixed_actuary_noise_mps2: self.fixed_actuary_noise_mps2,
            proportional_actuary_noise: self.proportional_actuary_noise,
            fixed_sensory_noise_m: self.fixed_sensory_noise_m,
            proportional_sensory_noise: self.proportional_sensory_noise,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct DiscoverArgs {
    /// Method id: pwgc, mvgc, varlingam, timino, pcmci, dynotears, or random.
    #[arg(long)]
    method: Method,
    /// Scene CSV to analyze.
    #[arg(long)]
    scene: PathBuf,
    /// Significance level for hypothesis-test methods.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Lag window in seconds; converted to samples at the scene's rate.
    #[arg(long, default_value_t = 2.5)]
    max_lag_s: f64,
    /// Sample rate the CSV was recorded at, in Hz.
    #[arg(long, default_value_t = 10.0)]
    frequency_hz: f64,
    /// Seed for the random baseline (other methods ignore it).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the graph as "src -> dst" lines to this file.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// TOML file supplying any of the sweep options; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated method ids (default: all seven).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Scene directories to evaluate (comma-separated or repeated).
    #[arg(long, value_delimiter = ',')]
    scene_dirs: Option<Vec<PathBuf>>,
    /// Variants to include (default: acceleration,velocity).
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<Variant>>,
    /// Significance levels (default: 0.001,0.005,0.01,0.03,0.05,0.1).
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Lag windows in seconds (default: 2.5,3.6,4.9).
    #[arg(long, value_delimiter = ',')]
    max_lags_s: Option<Vec<f64>>,
    /// Vary alpha at the first lag and the lag at alpha = 0.05 instead of
    /// the full cross-product.
    #[arg(long)]
    paper_grid: bool,
    /// Directory for the report files (env: TCD_REPORT_DIR).
    #[arg(long, env = "TCD_REPORT_DIR")]
    report_dir: Option<PathBuf>,
    /// Report format: "csv" or "json" (default: csv).
    #[arg(long)]
    format: Option<ReportFormat>,
    /// Base seed for per-scene method seeds (default: 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Sample rate scene CSVs were recorded at, in Hz (default: 10).
    #[arg(long)]
    frequency_hz: Option<f64>,
    /// Worker threads (default: one per core). Results are byte-identical
    /// regardless of this value.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write runtime columns as zero so reruns produce identical bytes.
    #[arg(long)]
    no_timing: bool,
}

/// Sweep options accepted from a TOML config file; any subset may be set.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepFileConfig {
    methods: Option<Vec<Method>>,
    scene_dirs: Option<Vec<PathBuf>>,
    variants: Option<Vec<Variant>>,
    alphas: Option<Vec<f64>>,
    max_lags_s: Option<Vec<f64>>,
    paper_grid: Option<bool>,
    report_dir: Option<PathBuf>,
    format: Option<ReportFormat>,
    seed: Option<u64>,
    frequency_hz: Option<f64>,
    jobs: Option<usize>,
    no_timing: Option<bool>,
}

/// The fully resolved sweep configuration, after merging flags, the config
/// file, and built-in defaults. Serialized canonically to fingerprint the
/// run; fields that cannot affect report bytes (report directory, thread
/// count) are left out so reruns fingerprint identically.
#[derive(Debug, Serialize)]
struct EffectiveSweep {
    version: &'static str,
    methods: Vec<String>,
    scene_dirs: Vec<String>,
    variants: Vec<String>,
    alphas: Vec<f64>,
    max_lags_s: Vec<f64>,
    paper_grid: bool,
    format: String,
    seed: u64,
    frequency_hz: f64,
    include_runtime: bool,
}

/// Parses the process arguments, runs the chosen subcommand, and returns
/// the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Discover(args) => cmd_discover(&args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let config = args.to_config();
    let scenes = generate_batch(&config, args.count, &args.out_dir)?;
    let retried = scenes.iter().filter(|s| s.regenerations > 0).count();
    println!(
        "wrote {} {} scene(s) to {}",
        scenes.len(),
        config.variant,
        args.out_dir.display()
    );
    println!("manifest: {}", args.out_dir.join("manifest.toml").display());
    if retried > 0 {
        println!("{retried} scene(s) needed collision retries; see the manifest");
    }
    Ok(())
}

fn cmd_discover(args: &DiscoverArgs) -> Result<()> {
    let scene = load_scene_csv(&args.scene, args.frequency_hz)?;
    let config = MethodConfig {
        alpha: args.alpha,
        max_lag: lag_samples(args.max_lag_s, scene.sample_rate_hz)?,
        ..Default::default()
    };
    let outcome = discover(args.method, &scene, &config, args.seed)?;

    println!(
        "scene {} ({} samples, {} variables at {} Hz)",
        scene.scene_id,
        scene.n_samples(),
        scene.n_vars(),
        scene.sample_rate_hz
    );
    println!(
        "method {}  alpha {}  max lag {} samples",
        args.method, config.alpha, config.max_lag
    );
    println!("edges ({}):", outcome.graph.n_edges());
    let nodes = outcome.graph.nodes();
    for (s, t) in outcome.graph.edges() {
        match outcome.diagnostics.edge_scores.get(&(s, t)) {
            Some(score) => println!("  {} -> {}  [score {score}]", nodes[s], nodes[t]),
            None => println!("  {} -> {}", nodes[s], nodes[t]),
        }
    }
    if outcome.abstained {
        println!("note: model checks failed; the method abstained with an empty graph");
    }
    for note in &outcome.diagnostics.notes {
        println!("note: {note}");
    }
    if let Some(path) = &args.graph_out {
        std::fs::write(path, outcome.graph.to_edge_list())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        println!("graph written to {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let file: SweepFileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            toml::from_str(&text).map_err(|e| {
                Error::InvalidInput(format!("config file {}: {e}", path.display()))
            })?
        }
        None => SweepFileConfig::default(),
    };

    let methods = args
        .methods
        .or(file.methods)
        .unwrap_or_else(|| Method::ALL.to_vec());
    let scene_dirs = args.scene_dirs.or(file.scene_dirs).ok_or_else(|| {
        Error::InvalidInput("no scene directories: pass --scene-dirs or set scene_dirs in the config file".into())
    })?;
    let variants = args
        .variants
        .or(file.variants)
        .unwrap_or_else(|| vec![Variant::Acceleration, Variant::Velocity]);
    let alphas = args
        .alphas
        .or(file.alphas)
        .unwrap_or_else(|| vec![0.001, 0.005, 0.01, 0.03, 0.05, 0.1]);
    let max_lags_s = args
        .max_lags_s
        .or(file.max_lags_s)
        .unwrap_or_else(|| vec![2.5, 3.6, 4.9]);
    let paper_grid = args.paper_grid || file.paper_grid.unwrap_or(false);
    let report_dir = args.report_dir.or(file.report_dir).ok_or_else(|| {
        Error::InvalidInput(
            "no report directory: pass --report-dir, set report_dir in the config file, or set TCD_REPORT_DIR".into(),
        )
    })?;
    let format = args.format.or(file.format).unwrap_or(ReportFormat::Csv);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let frequency_hz = args.frequency_hz.or(file.frequency_hz).unwrap_or(10.0);
    let jobs = args.jobs.or(file.jobs);
    let no_timing = args.no_timing || file.no_timing.unwrap_or(false);

    let request = SweepRequest {
        methods: methods.clone(),
        scene_dirs: scene_dirs.clone(),
        variants: variants.clone(),
        alphas: alphas.clone(),
        max_lags_s: max_lags_s.clone(),
        paper_grid,
        base_seed: seed,
        sample_rate_hz: frequency_hz,
    };

    let effective = EffectiveSweep {
        version: env!("CARGO_PKG_VERSION"),
        methods: methods.iter().map(|m| m.id().to_string()).collect(),
        scene_dirs: scene_dirs.iter().map(|d| d.display().to_string()).collect(),
        variants: variants.iter().map(|v| v.to_string()).collect(),
        alphas,
        max_lags_s,
        paper_grid,
        format: format.to_string(),
        seed,
        frequency_hz,
        include_runtime: !no_timing,
    };
    let fingerprint = fingerprint(&effective)?;

    let cells = match jobs {
        Some(0) => {
            return Err(Error::InvalidInput("--jobs must be at least 1".into()));
        }
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(format!("could not start {n} worker(s): {e}")))?
            .install(|| run_sweep(&request))?,
        None => run_sweep(&request)?,
    };

    let options = ReportOptions {
        fingerprint,
        include_runtime: !no_timing,
    };
    emit_report(&cells, format, &report_dir, &options)?;
    print_sweep_summary(&cells, &report_dir);
    Ok(())
}

fn print_sweep_summary(cells: &[SweepCell], report_dir: &std::path::Path) {
    println!("{} cell(s) -> {}", cells.len(), report_dir.display());
    for cell in cells {
        println!(
            "  {:<10} {:<12} {:<4} alpha {:<6} lag {:<3} scenes {:<4} mean F1 {:.3}",
            cell.method.id(),
            cell.dataset,
            cell.variant,
            cell.alpha,
            cell.max_lag_samples,
            cell.scores.len(),
            cell.mean_f1
        );
    }
    let errored: usize = cells
        .iter()
        .flat_map(|c| c.scores.iter())
        .filter(|s| s.error_flag)
        .count();
    if errored > 0 {
        println!("{errored} scene evaluation(s) errored; scored 0 and flagged in the detail table");
    }
}

/// Canonical hash of the resolved configuration, stored in every report.
fn fingerprint(effective: &EffectiveSweep) -> Result<String> {
    let canonical = serde_json::to_string(effective)
        .map_err(|e| Error::InvalidInput(format!("could not serialize config: {e}")))?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parser_accepts_pairs_and_rejects_junk() {
        assert_eq!(parse_range("10,100").unwrap(), (10.0, 100.0));
        assert_eq!(parse_range("-6.56, 3.5").unwrap(), (-6.56, 3.5));
        assert!(parse_range("10").is_err());
        assert!(parse_range("a,b").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn generate_args_map_onto_the_default_config() {
        let cli = Cli::parse_from([
            "tcd", "generate", "--count", "3", "--variant", "velocity", "--out-dir", "scenes",
        ]);
        let Command::Generate(args) = cli.command else {
            panic!("expected generate");
        };
        assert_eq!(args.to_config(), SceneGenConfig::default());
    }

    #[test]
    fn sweep_config_file_fills_gaps_but_flags_win() {
        let toml_text = r#"
            methods = ["random"]
            alphas = [0.01]
            report_dir = "from-file"
        "#;
        let file: SweepFileConfig = toml::from_str(toml_text).unwrap();
        assert_eq!(file.methods, Some(vec![Method::Random]));
        assert_eq!(file.alphas, Some(vec![0.01]));
        assert!(file.scene_dirs.is_none());

        let cli = Cli::parse_from([
            "tcd",
            "sweep",
            "--scene-dirs",
            "a,b",
            "--alphas",
            "0.05",
            "--report-dir",
            "from-flag",
        ]);
        let Command::Sweep(args) = cli.command else {
            panic!("expected sweep");
        };
        assert_eq!(args.alphas.as_deref(), Some(&[0.05][..]));
        assert_eq!(
            args.scene_dirs.as_deref().map(|d| d.len()),
            Some(2)
        );
        let merged_alpha = args.alphas.or(file.alphas).unwrap();
        assert_eq!(merged_alpha, vec![0.05]);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = toml::from_str::<SweepFileConfig>("mystery = 1").unwrap_err();
        assert!(err.to_string().contains("mystery"));
    }

    #[test]
    fn fingerprint_ignores_thread_count_but_tracks_params() {
        let base = EffectiveSweep {
            version: "x",
            methods: vec!["random".into()],
            scene_dirs: vec!["a".into()],
            variants: vec!["velocity".into()],
            alphas: vec![0.05],
            max_lags_s: vec![2.5],
            paper_grid: false,
            format: "csv".into(),
            seed: 0,
            frequency_hz: 10.0,
            include_runtime: false,
        };
        let fp = fingerprint(&base).unwrap();
        assert_eq!(fp.len(), 64);
        assert_eq!(fp, fingerprint(&base).unwrap());

        let mut changed = base;
        changed.alphas = vec![0.1];
        assert_ne!(fp, fingerprint(&changed).unwrap());
    }
}
