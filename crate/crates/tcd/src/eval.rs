//! Scoring against ground truth and the benchmark sweep harness.
//!
//! Scoring compares directed summary graphs edge by edge (self-loops are
//! ignored). The harness runs methods over whole scene directories, crossing
//! significance levels and lag windows, and writes summary/detail/plot
//! tables whose bytes are independent of how many worker threads ran.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SummaryGraph;
use crate::methods::{discover, Method, MethodConfig};
use crate::scene::{load_scene_csv, TimeSeriesScene, Variant};

/// Edge-level counts and derived metrics for one scored scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScore {
    pub scene_id: String,
    #[serde(rename = "tp")]
    pub true_positives: usize,
    #[serde(rename = "fp")]
    pub false_positives: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Wall-clock seconds of the discovery call, excluding I/O.
    pub runtime_s: f64,
    /// True when the method returned an error instead of a graph; such
    /// scenes score zero rather than being dropped from the cell.
    pub error_flag: bool,
}

/// Compares a predicted summary graph against the ground truth.
///
/// Self-loops in the prediction are stripped before counting — a series
/// trivially relates to its own past, so they carry no information. With an
/// empty denominator, precision, recall, and F1 are all defined as 0, which
/// penalizes empty predictions against a non-empty truth.
pub fn score_graph(predicted: &SummaryGraph, truth: &SummaryGraph) -> Result<SceneScore> {
    if predicted.nodes() != truth.nodes() {
        return Err(Error::InvalidInput(format!(
            "node sets differ: predicted {:?} vs truth {:?}",
            predicted.nodes(),
            truth.nodes()
        )));
    }
    let predicted_edges: BTreeSet<(usize, usize)> = predicted
        .edges()
        .filter(|(s, t)| s != t)
        .collect();
    let truth_edges: BTreeSet<(usize, usize)> =
        truth.edges().filter(|(s, t)| s != t).collect();

    let tp = predicted_edges.intersection(&truth_edges).count();
    let fp = predicted_edges.difference(&truth_edges).count();
    let fn_count = truth_edges.difference(&predicted_edges).count();

    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_count);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(SceneScore {
        scene_id: String::new(),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_count,
        precision,
        recall,
        f1,
        runtime_s: 0.0,
        error_flag: false,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One (method, dataset, variant, alpha, lag) combination with its per-scene
/// scores and their aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub method: Method,
    pub dataset: String,
    pub variant: Variant,
    pub alpha: f64,
    pub max_lag_samples: usize,
    pub scores: Vec<SceneScore>,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_runtime_s: f64,
}

impl SweepCell {
    /// Recomputes the aggregate fields from `scores` (sorted by scene id).
    fn aggregate(&mut self) {
        self.scores.sort_by(|a, b| a.scene_id.cmp(&b.scene_id));
        let n = self.scores.len() as f64;
        if self.scores.is_empty() {
            return;
        }
        self.mean_f1 = self.scores.iter().map(|s| s.f1).sum::<f64>() / n;
        self.mean_precision = self.scores.iter().map(|s| s.precision).sum::<f64>() / n;
        self.mean_recall = self.scores.iter().map(|s| s.recall).sum::<f64>() / n;
        self.mean_runtime_s = self.scores.iter().map(|s| s.runtime_s).sum::<f64>() / n;
        self.std_f1 = if self.scores.len() < 2 {
            0.0
        } else {
            let var = self
                .scores
                .iter()
                .map(|s| (s.f1 - self.mean_f1).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            var.sqrt()
        };
    }
}

/// Runs one method over a set of scenes against a shared ground truth.
///
/// Scene `i` of the input is discovered with seed `base_seed + i`; scores
/// are sorted by scene id before aggregation, so worker scheduling cannot
/// change the result. A method error on a scene is recorded as a zero score
/// with `error_flag` set instead of failing the whole cell.
pub fn evaluate_method(
    method: Method,
    scenes: &[TimeSeriesScene],
    truth: &SummaryGraph,
    config: &MethodConfig,
    base_seed: u64,
) -> Result<SweepCell> {
    if scenes.is_empty() {
        return Err(Error::InvalidInput("no scenes to evaluate".into()));
    }
    let scores: Vec<SceneScore> = scenes
        .par_iter()
        .enumerate()
        .map(|(i, scene)|sc_score(method, scene, truth, config, base_seed.wrapping_add(i as u64)))
        .collect::<Result<_>>()?;

    let mut cell = SweepCell {
        method,
        dataset: String::new(),
        variant: scenes[0].variant,
        alpha: config.alpha,
        max_lag_samples: config.max_lag,
        scores,
        mean_f1: 0.0,
        std_f1: 0.0,
        mean_precision: 0.0,
        mean_recall: 0.0,
        mean_runtime_s: 0.0,
    };
    cell.aggregate();
    Ok(cell)
}

/// Discovery + scoring for one scene; method failures become flagged zeros.
fn sc_score(
    method: Method,
    scene: &TimeSeriesScene,
    truth: &SummaryGraph,
    config: &MethodConfig,
    seed: u64,
) -> Result<SceneScore> {
    let start = Instant::now();
    let outcome = discover(method, scene, config, seed);
    let runtime_s = start.elapsed().as_secs_f64();
    let mut score = match outcome {
        Ok(out) => score_graph(&out.graph, truth)?,
        Err(_) => SceneScore {
            scene_id: String::new(),
            true_positives: 0,
            false_positives: 0,
            false_negatives: truth.edges().filter(|(s, t)| s != t).count(),
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            runtime_s: 0.0,
            error_flag: true,
        },
    };
    score.scene_id = scene.scene_id.clone();
    score.runtime_s = runtime_s;
    Ok(score)
}

/// What a sweep should run.
#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub methods: Vec<Method>,
    pub scene_dirs: Vec<PathBuf>,
    pub variants: Vec<Variant>,
    /// Significance levels; crossed with lags, or swept per the benchmark
    /// protocol when `paper_grid` is set.
    pub alphas: Vec<f64>,
    /// Lag windows in seconds; converted to samples at each scene's rate.
    pub max_lags_s: Vec<f64>,
    /// When set, vary alpha at the first lag and the lag at alpha = 0.05
    /// (sharing the common cell) instead of the full cross-product.
    pub paper_grid: bool,
    pub base_seed: u64,
    /// Sample rate assumed when loading scene CSVs.
    pub sample_rate_hz: f64,
}

/// Runs the full sweep: one cell per (method x dataset x variant x alpha x
/// lag) combination, in a deterministic order.
///
/// Ground truth for every dataset is the convoy layout: the first variable
/// drives the second, and the third is independent.
pub fn run_sweep(request: &SweepRequest) -> Result<Vec<SweepCell>> {
    if request.methods.is_empty() {
        return Err(Error::InvalidInput("no methods selected".into()));
    }
    if request.alphas.is_empty() || request.max_lags_s.is_empty() {
        return Err(Error::InvalidInput("alpha and lag lists must be non-empty".into()));
    }
    for alpha in &request.alphas {
        if !(*alpha > 0.0 && *alpha <= 1.0) {
            return Err(Error::InvalidInput(format!("alpha {alpha} outside (0, 1]")));
        }
    }

    let mut datasets: Vec<(String, Vec<TimeSeriesScene>)> = Vec::new();
    for dir in &request.scene_dirs {
        let scenes = load_scene_dir(dir, request.sample_rate_hz)?;
        datasets.push((dir.display().to_string(), scenes));
    }

    let grid = parameter_grid(request);
    let mut cells = Vec::new();
    for &method in &request.methods {
        for (dataset, scenes) in &datasets {
            for &variant in &request.variants {
                let matching: Vec<&TimeSeriesScene> =
                    scenes.iter().filter(|s| s.variant == variant).collect();
                if matching.is_empty() {
                    continue;
                }
                for &(alpha, lag_s) in &grid {
                    cells.push(run_cell(
                        method,
                        dataset,
                        variant,
                        &matching,
                        alpha,
                        lag_s,
                        request.base_seed,
                    )?);
                }
            }
        }
    }
    Ok(cells)
}

/// The (alpha, lag-seconds) combinations a request expands to.
fn parameter_grid(request: &SweepRequest) -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    if request.paper_grid {
        let reference_lag = request.max_lags_s[0];
        for &alpha in &request.alphas {
            grid.push((alpha, reference_lag));
        }
        for &lag in &request.max_lags_s[1..] {
            grid.push((0.05, lag));
        }
    } else {
        for &alpha in &request.alphas {
            for &lag in &request.max_lags_s {
                grid.push((alpha, lag));
            }
        }
    }
    grid
}

fn run_cell(
    method: Method,
    dataset: &str,
    variant: Variant,
    scenes: &[&TimeSeriesScene],
    alpha: f64,
    lag_s: f64,
    base_seed: u64,
) -> Result<SweepCell> {
    let scores: Vec<SceneScore> = scenes
        .par_iter()
        .enumerate()
        .map(|(i, scene)| {
            let config = MethodConfig {
                alpha,
                max_lag: lag_samples(lag_s, scene.sample_rate_hz)?,
                ..Default::default()
            };
            let truth = convoy_truth(scene)?;
            sc_score(method, scene, &truth, &config, base_seed.wrapping_add(i as u64))
        })
        .collect::<Result<_>>()?;

    let mut cell = SweepCell {
        method,
        dataset: dataset.to_string(),
        variant,
        alpha,
        max_lag_samples: lag_samples(lag_s, scenes[0].sample_rate_hz)?,
        scores,
        mean_f1: 0.0,
        std_f1: 0.0,
        mean_precision: 0.0,
        mean_recall: 0.0,
        mean_runtime_s: 0.0,
    };
    cell.aggregate();
    Ok(cell)
}

/// Converts a lag window in seconds to whole samples at a scene's rate.
pub fn lag_samples(lag_s: f64, sample_rate_hz: f64) -> Result<usize> {
    let samples = (lag_s * sample_rate_hz).round();
    if !(samples >= 1.0 && samples.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "lag of {lag_s} s is below one sample at {sample_rate_hz} Hz"
        )));
    }
    Ok(samples as usize)
}

/// The benchmark's ground truth over a scene's variables: first drives
/// second, any further variables are independent.
pub fn convoy_truth(scene: &TimeSeriesScene) -> Result<SummaryGraph> {
    if scene.n_vars() < 2 {
        return Err(Error::InvalidInput(
            "convoy ground truth needs at least two variables".into(),
        ));
    }
    let mut truth = SummaryGraph::new(scene.variable_names.clone());
    truth.add_edge(0, 1)?;
    Ok(truth)
}

/// Loads every `.csv` in a directory as a scene, sorted by file name.
pub fn load_scene_dir(dir: impl AsRef<Path>, sample_rate_hz: f64) -> Result<Vec<TimeSeriesScene>> {
    let dir = dir.as_ref();
    let shown = dir.display().to_string();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(&shown, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no scene CSV files in {shown}"
        )));
    }
    paths
        .into_iter()
        .map(|p| load_scene_csv(p, sample_rate_hz))
        .collect()
}

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown report format {other:?}; expected \"csv\" or \"json\""
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

/// Report emission settings.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Fingerprint of the run configuration, stored in every report so a
    /// table can be traced back to the flags that produced it.
    pub fingerprint: String,
    /// When false, runtime columns are written as zero so that reruns of
    /// the same flags produce byte-identical files.
    pub include_runtime: bool,
}

#[derive(Serialize)]
struct SummaryRow {
    method: String,
    dataset: String,
    variant: String,
    alpha: f64,
    max_lag: usize,
    n_scenes: usize,
    mean_f1: f64,
    std_f1: f64,
    mean_precision: f64,
    mean_recall: f64,
    mean_runtime_s: f64,
}

#[derive(Serialize)]
struct DetailRow {
    method: String,
    dataset: String,
    variant: String,
    alpha: f64,
    max_lag: usize,
    scene_id: String,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_count: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    runtime_s: f64,
    error_flag: bool,
}

/// One point of plot data. `curve` says which figure the row belongs to:
/// per-dataset best F1, F1 versus alpha, or F1 versus lag window.
#[derive(Serialize)]
struct PlotRow {
    curve: &'static str,
    method: String,
    dataset: String,
    alpha: String,
    max_lag: String,
    mean_f1: f64,
}

#[derive(Serialize)]
struct Report {
    fingerprint: String,
    summary: Vec<SummaryRow>,
    detail: Vec<DetailRow>,
    plots: Vec<PlotRow>,
}

/// Writes the sweep results into `out_dir`.
///
/// CSV format produces `summary.csv`, `detail.csv`, and `plots.csv`; JSON
/// produces a single `report.json` mirroring the same rows. All numbers are
/// written with shortest-round-trip formatting, so identical inputs produce
/// identical bytes.
pub fn emit_report(
    cells: &[SweepCell],
    format: ReportFormat,
    out_dir: impl AsRef<Path>,
    options: &ReportOptions,
) -> Result<()> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(&out_dir.display().to_string(), e))?;
    let report = build_report(cells, options);
    match format {
        ReportFormat::Csv => {
            write_file(out_dir.join("summary.csv"), &summary_csv(&report))?;
            write_file(out_dir.join("detail.csv"), &detail_csv(&report))?;
            write_file(out_dir.join("plots.csv"), &plots_csv(&report))?;
        }
        ReportFormat::Json => {
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::InvalidInput(format!("report serialization failed: {e}")))?;
            write_file(out_dir.join("report.json"), &(text + "\n"))?;
        }
    }
    Ok(())
}

fn write_file(path: PathBuf, content: &str) -> Result<()> {
    std::fs::write(&path, content).map_err(|e| Error::io(&path.display().to_string(), e))
}

fn build_report(cells: &[SweepCell], options: &ReportOptions) -> Report {
    let runtime = |r: f64| if options.include_runtime { r } else { 0.0 };
    let summary = cells
        .iter()
        .map(|c| SummaryRow {
            method: c.method.id().to_string(),
            dataset: c.dataset.clone(),
            variant: c.variant.to_string(),
            alpha: c.alpha,
            max_lag: c.max_lag_samples,
            n_scenes: c.scores.len(),
            mean_f1: c.mean_f1,
            std_f1: c.std_f1,
            mean_precision: c.mean_precision,
            mean_recall: c.mean_recall,
            mean_runtime_s: runtime(c.mean_runtime_s),
        })
        .collect();
    let detail = cells
        .iter()
        .flat_map(|c| {
            c.scores.iter().map(|s| DetailRow {
                method: c.method.id().to_string(),
                dataset: c.dataset.clone(),
                variant: c.variant.to_string(),
                alpha: c.alpha,
                max_lag: c.max_lag_samples,
                scene_id: s.scene_id.clone(),
                tp: s.true_positives,
                fp: s.false_positives,
                fn_count: s.false_negatives,
                precision: s.precision,
                recall: s.recall,
                f1: s.f1,
                runtime_s: runtime(s.runtime_s),
                error_flag: s.error_flag,
            })
        })
        .collect();
    Report {
        fingerprint: options.fingerprint.clone(),
        summary,
        detail,
        plots: plot_rows(cells),
    }
}

/// Plot data: per-dataset best cells, and the two parameter-sensitivity
/// curves. The curves take, per dataset, the best cell at the probed
/// parameter value (optimizing over everything else), then average across
/// datasets.
fn plot_rows(cells: &[SweepCell]) -> Vec<PlotRow> {
    let mut rows = Vec::new();
    let methods: Vec<Method> = dedup(cells.iter().map(|c| c.method));
    let datasets: Vec<String> = dedup(cells.iter().map(|c| c.dataset.clone()));

    for &method in &methods {
        for dataset in &datasets {
            let best = cells
                .iter()
                .filter(|c| c.method == method && &c.dataset == dataset)
                .max_by(|a, b| a.mean_f1.total_cmp(&b.mean_f1));
            if let Some(cell) = best {
                rows.push(PlotRow {
                    curve: "best_by_dataset",
                    method: method.id().to_string(),
                    dataset: dataset.clone(),
                    alpha: cell.alpha.to_string(),
                    max_lag: cell.max_lag_samples.to_string(),
                    mean_f1: cell.mean_f1,
                });
            }
        }
    }

    for &method in &methods {
        let alphas: Vec<f64> = dedup(
            cells
                .iter()
                .filter(|c| c.method == method)
                .map(|c| c.alpha),
        );
        for &alpha in &alphas {
            let per_dataset: Vec<f64> = datasets
                .iter()
                .filter_map(|d| {
                    cells
                        .iter()
                        .filter(|c| c.method == method && &c.dataset == d && c.alpha == alpha)
                        .map(|c| c.mean_f1)
                        .max_by(f64::total_cmp)
                })
                .collect();
            if !per_dataset.is_empty() {
                rows.push(PlotRow {
                    curve: "f1_vs_alpha",
                    method: method.id().to_string(),
                    dataset: String::new(),
                    alpha: alpha.to_string(),
                    max_lag: String::new(),
                    mean_f1: per_dataset.iter().sum::<f64>() / per_dataset.len() as f64,
                });
            }
        }
        let lags: Vec<usize> = dedup(
            cells
                .iter()
                .filter(|c| c.method == method)
                .map(|c| c.max_lag_samples),
        );
        for &lag in &lags {
            let per_dataset: Vec<f64> = datasets
                .iter()
                .filter_map(|d| {
                    cells
                        .iter()
                        .filter(|c| {
                            c.method == method && &c.dataset == d && c.max_lag_samples == lag
                        })
                        .map(|c| c.mean_f1)
                        .max_by(f64::total_cmp)
                })
                .collect();
            if !per_dataset.is_empty() {
                rows.push(PlotRow {
                    curve: "f1_vs_tau",
                    method: method.id().to_string(),
                    dataset: String::new(),
                    alpha: String::new(),
                    max_lag: lag.to_string(),
                    mean_f1: per_dataset.iter().sum::<f64>() / per_dataset.len() as f64,
                });
            }
        }
    }
    rows
}

/// First-occurrence dedup that keeps the input order deterministic.
fn dedup<T: PartialEq>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn summary_csv(report: &Report) -> String {
    let mut out = format!("# config_fingerprint: {}\n", report.fingerprint);
    out.push_str(
        "method,dataset,variant,alpha,max_lag,n_scenes,mean_f1,std_f1,mean_precision,mean_recall,mean_runtime_s\n",
    );
    for r in &report.summary {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.dataset,
            r.variant,
            r.alpha,
            r.max_lag,
            r.n_scenes,
            r.mean_f1,
            r.std_f1,
            r.mean_precision,
            r.mean_recall,
            r.mean_runtime_s
        ));
    }
    out
}

fn detail_csv(report: &Report) -> String {
    let mut out = format!("# config_fingerprint: {}\n", report.fingerprint);
    out.push_str(
        "method,dataset,variant,alpha,max_lag,scene_id,tp,fp,fn,precision,recall,f1,runtime_s,error_flag\n",
    );
    for r in &report.detail {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.dataset,
            r.variant,
            r.alpha,
            r.max_lag,
            r.scene_id,
            r.tp,
            r.fp,
            r.fn_count,
            r.precision,
            r.recall,
            r.f1,
            r.runtime_s,
            r.error_flag
        ));
    }
    out
}

fn plots_csv(report: &Report) -> String {
    let mut out = format!("# config_fingerprint: {}\n", report.fingerprint);
    out.push_str("curve,method,dataset,alpha,max_lag,mean_f1\n");
    for r in &report.plots {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.curve, r.method, r.dataset, r.alpha, r.max_lag, r.mean_f1
        ));
    }
    out
}
