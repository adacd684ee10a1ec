//! Seeded batches of EDA runs, summary statistics, the win-count score
//! table and CSV/JSON reports.

pub mod cli;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::EllipticalParams;
use crate::engine::{run_eda, Algorithm, EdaConfig, RunRecord};
use crate::error::{EdaError, Result};
use crate::linalg::SymMatrix;
use crate::objectives::{BenchmarkFunction, FunctionId};

/// Absolute tolerance under which two mean-best values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-4;

/// Population size for a dimension: 10³, 10⁴, 10⁵ for 2, 5, 10.
pub fn default_population(dim: usize) -> usize {
    match dim {
        0..=2 => 1_000,
        3..=5 => 10_000,
        _ => 100_000,
    }
}

/// `round(frac · N)`
pub fn selection_from_fraction(population: usize, frac: f64) -> usize {
    (frac * population as f64).round() as usize
}

/// Degrees of freedom used for the t variants unless overridden.
pub fn default_dof(function: FunctionId) -> f64 {
    match function {
        FunctionId::Rastrigin => 50.0,
        _ => 5.0,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadKind {
    /// Sample standard deviation.
    #[default]
    Stddev,
    /// Sample standard deviation over `√n`.
    Stderr,
}

impl SpreadKind {
    pub fn name(self) -> &'static str {
        match self {
            SpreadKind::Stddev => "stddev",
            SpreadKind::Stderr => "stderr",
        }
    }
}

/// One algorithm configuration inside a case; `label` names its output files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub label: String,
    pub config: EdaConfig<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub function: FunctionId,
    pub dimension: usize,
    pub arms: Vec<Arm>,
}

impl Case {
    pub fn benchmark(&self) -> Result<BenchmarkFunction> {
        BenchmarkFunction::new(self.function, self.dimension)
    }

    pub fn name(&self) -> String {
        format!("{}_{}d", self.function.name(), self.dimension)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub cases: Vec<Case>,
    pub run_count: usize,
    pub base_seed: u64,
    pub out_dir: Option<PathBuf>,
    pub preset: Option<String>,
    pub spread: SpreadKind,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.run_count == 0 {
            return Err(EdaError::config("run count must be at least 1"));
        }
        if self.cases.is_empty() {
            return Err(EdaError::config("experiment has no cases"));
        }
        for case in &self.cases {
            let supported = case.function.harness_dimensions();
            if !supported.contains(&case.dimension) {
                return Err(EdaError::UnsupportedDimension {
                    name: case.function.name().to_string(),
                    dim: case.dimension,
                    supported: supported.to_vec(),
                });
            }
            if case.arms.is_empty() {
                return Err(EdaError::config(format!(
                    "case {} has no algorithms",
                    case.name()
                )));
            }
            for arm in &case.arms {
                arm.config.validate()?;
            }
        }
        Ok(())
    }
}

/// Aggregate of the successful runs of one arm on one case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub function: String,
    pub dimension: usize,
    pub label: String,
    pub algorithm: Algorithm,
    pub run_count: usize,
    pub failed_runs: usize,
    pub mean_best: f64,
    pub spread_best: f64,
    pub spread_kind: SpreadKind,
    pub min_best: f64,
    pub max_best: f64,
    pub mean_best_trace: Vec<f64>,
    pub mean_survival_trace: Vec<f64>,
}

/// Mean and spread of a sample. A single value has spread 0.
pub fn mean_and_spread(values: &[f64], kind: SpreadKind) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let spread = match kind {
        SpreadKind::Stddev => sd,
        SpreadKind::Stderr => sd / (n as f64).sqrt(),
    };
    (mean, spread)
}

fn column_means<T: Copy + Into<f64>>(traces: &[&[T]]) -> Vec<f64> {
    let len = traces.iter().map(|t| t.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| traces.iter().map(|t| t[i].into()).sum::<f64>() / traces.len() as f64)
        .collect()
}

/// Aggregates the records of one arm. Failed runs are counted and excluded;
/// 20% or more failures is an error.
pub fn summarize(
    label: &str,
    records: &[RunRecord<f64>],
    spread: SpreadKind,
) -> Result<SummaryStats> {
    let first = records
        .first()
        .ok_or_else(|| EdaError::config(format!("no runs recorded for {label}")))?;
    let ok: Vec<&RunRecord<f64>> = records.iter().filter(|r| r.is_completed()).collect();
    let failed = records.len() - ok.len();
    if ok.is_empty() || failed * 5 >= records.len() {
        return Err(EdaError::TooManyFailures {
            label: format!("{}_{}d_{label}", first.function, first.dimension),
            failed,
            total: records.len(),
        });
    }
    let bests: Vec<f64> = ok.iter().map(|r| r.final_best_value).collect();
    let (mean, spread_best) = mean_and_spread(&bests, spread);
    let min_best = bests.iter().copied().fold(f64::INFINITY, f64::min);
    let max_best = bests.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_traces: Vec<&[f64]> = ok.iter().map(|r| r.best_value_trace.as_slice()).collect();
    let survival: Vec<Vec<f64>> = ok
        .iter()
        .map(|r| {
            r.survival_component_trace
                .iter()
                .map(|&c| c as f64)
                .collect()
        })
        .collect();
    let survival_refs: Vec<&[f64]> = survival.iter().map(|t| t.as_slice()).collect();
    Ok(SummaryStats {
        function: first.function.clone(),
        dimension: first.dimension,
        label: label.to_string(),
        algorithm: first.config.algorithm,
        run_count: ok.len(),
        failed_runs: failed,
        // summation rounding must not push the mean outside the sample range
        mean_best: mean.clamp(min_best, max_best),
        spread_best,
        spread_kind: spread,
        min_best,
        max_best,
        mean_best_trace: column_means(&best_traces),
        mean_survival_trace: column_means(&survival_refs),
    })
}

#[derive(Clone, Debug)]
pub struct ArmResult {
    pub summary: SummaryStats,
    /// Sorted by run index.
    pub records: Vec<RunRecord<f64>>,
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub function: FunctionId,
    pub dimension: usize,
    pub arms: Vec<ArmResult>,
}

impl CaseResult {
    pub fn name(&self) -> String {
        format!("{}_{}d", self.function.name(), self.dimension)
    }

    pub fn arm(&self, label: &str) -> Option<&ArmResult> {
        self.arms.iter().find(|a| a.summary.label == label)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub cases: Vec<CaseResult>,
}

impl ExperimentResult {
    pub fn case(&self, function: FunctionId, dimension: usize) -> Option<&CaseResult> {
        self.cases
            .iter()
            .find(|c| c.function == function && c.dimension == dimension)
    }

    pub fn score_rows(&self) -> Vec<ScoreRow> {
        self.cases
            .iter()
            .map(|c| ScoreRow {
                case: c.name(),
                entries: c
                    .arms
                    .iter()
                    .map(|a| {
                        (
                            a.summary.label.clone(),
                            a.summary.mean_best,
                            a.summary.spread_best,
                        )
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Runs every arm `run_count` times with seeds `base_seed + run_index`, in
/// parallel. Results do not depend on the worker count. Reports are written
/// when `out_dir` is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut cases = Vec::with_capacity(spec.cases.len());
    for case in &spec.cases {
        let f = case.benchmark()?;
        let jobs: Vec<(usize, usize)> = (0..case.arms.len())
            .flat_map(|a| (0..spec.run_count).map(move |r| (a, r)))
            .collect();
        let records = jobs
            .par_iter()
            .map(|&(a, r)| {
                let cfg = EdaConfig {
                    seed: spec.base_seed.wrapping_add(r as u64),
                    ..case.arms[a].config.clone()
                };
                run_eda(&cfg, &f)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut arms = Vec::with_capacity(case.arms.len());
        for (a, arm) in case.arms.iter().enumerate() {
            let recs = records[a * spec.run_count..(a + 1) * spec.run_count].to_vec();
            arms.push(ArmResult {
                summary: summarize(&arm.label, &recs, spec.spread)?,
                records: recs,
            });
        }
        cases.push(CaseResult {
            function: case.function,
            dimension: case.dimension,
            arms,
        });
    }
    let result = ExperimentResult { cases };
    if let Some(dir) = &spec.out_dir {
        write_reports(&result, dir)?;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreRule {
    /// Ties on the mean (within [`TIE_TOLERANCE`]) score nothing.
    MeanOnly,
    /// Ties on the mean go to the unique strictly smallest spread; a tie on
    /// spread as well scores nothing.
    #[default]
    MeanThenSpread,
}

/// `(label, mean_best, spread_best)` per algorithm for one case.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub case: String,
    pub entries: Vec<(String, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub labels: Vec<String>,
    pub scores: Vec<usize>,
    /// Winner per case, `None` on a tie.
    pub winners: Vec<(String, Option<String>)>,
}

impl ScoreTable {
    pub fn score(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.scores[i])
    }
}

fn unique_min(values: &[(usize, f64)], tol: f64) -> (Vec<usize>, Option<usize>) {
    let best = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = values
        .iter()
        .filter(|v| (v.1 - best).abs() <= tol)
        .map(|v| v.0)
        .collect();
    let unique = if tied.len() == 1 { Some(tied[0]) } else { None };
    (tied, unique)
}

/// One point per case to the algorithm with the strictly smallest mean best.
pub fn score_table(rows: &[ScoreRow], rule: ScoreRule) -> Result<ScoreTable> {
    let labels: Vec<String> = match rows.first() {
        Some(r) => r.entries.iter().map(|e| e.0.clone()).collect(),
        None => Vec::new(),
    };
    let mut scores = vec![0; labels.len()];
    let mut winners = Vec::with_capacity(rows.len());
    for row in rows {
        let row_labels: Vec<&String> = row.entries.iter().map(|e| &e.0).collect();
        if row_labels.len() != labels.len() || row_labels.iter().zip(&labels).any(|(a, b)| *a != b)
        {
            return Err(EdaError::config(format!(
                "case {} does not cover the same algorithms as the first case",
                row.case
            )));
        }
        let means: Vec<(usize, f64)> = row
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i, if e.1.is_nan() { f64::INFINITY } else { e.1 }))
            .collect();
        let (tied, mut winner) = unique_min(&means, TIE_TOLERANCE);
        if winner.is_none() && rule == ScoreRule::MeanThenSpread && tied.len() > 1 {
            let spreads: Vec<(usize, f64)> = tied.iter().map(|&i| (i, row.entries[i].2)).collect();
            winner = unique_min(&spreads, 0.0).1;
        }
        if let Some(w) = winner {
            scores[w] += 1;
        }
        winners.push((row.case.clone(), winner.map(|w| labels[w].clone())));
    }
    Ok(ScoreTable {
        labels,
        scores,
        winners,
    })
}

/// One row of a per-arm trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub mean_best: f64,
    pub mean_survival_components: f64,
}

fn create_file(path: &Path) -> Result<fs::File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| EdaError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::File::create(path).map_err(|source| EdaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let csv_err = |source| EdaError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(create_file(path)?);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| EdaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| EdaError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_err)
}

pub fn trace_rows(summary: &SummaryStats) -> Vec<TraceRow> {
    summary
        .mean_best_trace
        .iter()
        .zip(&summary.mean_survival_trace)
        .enumerate()
        .map(|(i, (&b, &s))| TraceRow {
            iteration: i + 1,
            mean_best: b,
            mean_survival_components: s,
        })
        .collect()
}

/// Writes the per-iteration means of a batch of runs as
/// `iteration,mean_best,mean_survival_components`.
pub fn emit_traces(records: &[RunRecord<f64>], path: &Path) -> Result<()> {
    let summary = summarize("traces", records, SpreadKind::Stddev)?;
    write_csv(&trace_rows(&summary), path)
}

pub fn read_traces(path: &Path) -> Result<Vec<TraceRow>> {
    read_csv(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub function: String,
    pub dimension: usize,
    pub label: String,
    pub algorithm: Algorithm,
    pub run_count: usize,
    pub failed_runs: usize,
    pub mean_best: f64,
    pub spread_best: f64,
    pub spread_kind: SpreadKind,
    pub min_best: f64,
    pub max_best: f64,
}

impl From<&SummaryStats> for SummaryRow {
    fn from(s: &SummaryStats) -> Self {
        SummaryRow {
            function: s.function.clone(),
            dimension: s.dimension,
            label: s.label.clone(),
            algorithm: s.algorithm,
            run_count: s.run_count,
            failed_runs: s.failed_runs,
            mean_best: s.mean_best,
            spread_best: s.spread_best,
            spread_kind: s.spread_kind,
            min_best: s.min_best,
            max_best: s.max_best,
        }
    }
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_csv(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreCsvRow {
    pub label: String,
    pub score: usize,
}

/// Writes `<case>_<label>.csv` traces, `<case>_<label>.json` run records,
/// `summary.csv` and, when every case has the same algorithm labels and
/// more than one arm, `scores.csv`.
pub fn write_reports(result: &ExperimentResult, dir: &Path) -> Result<()> {
    let mut summary = Vec::new();
    for case in &result.cases {
        for arm in &case.arms {
            let stem = format!("{}_{}", case.name(), arm.summary.label);
            write_csv(&trace_rows(&arm.summary), &dir.join(format!("{stem}.csv")))?;
            let json_path = dir.join(format!("{stem}.json"));
            let mut file = create_file(&json_path)?;
            serde_json::to_writer_pretty(&mut file, &arm.records).map_err(|source| {
                EdaError::Json {
                    path: json_path.clone(),
                    source,
                }
            })?;
            file.write_all(b"\n").map_err(|source| EdaError::Io {
                path: json_path.clone(),
                source,
            })?;
            summary.push(SummaryRow::from(&arm.summary));
        }
    }
    write_csv(&summary, &dir.join("summary.csv"))?;
    let rows = result.score_rows();
    if rows.iter().all(|r| r.entries.len() > 1) {
        if let Ok(table) = score_table(&rows, ScoreRule::default()) {
            let scores: Vec<ScoreCsvRow> = table
                .labels
                .iter()
                .zip(&table.scores)
                .map(|(label, &score)| ScoreCsvRow {
                    label: label.clone(),
                    score,
                })
                .collect();
            write_csv(&scores, &dir.join("scores.csv"))?;
        }
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord<f64>>> {
    let text = fs::read_to_string(path).map_err(|source| EdaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| EdaError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Unit-variance densities on the grid `x = -6 + 0.01 i`, `i = 0..=1200`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTable {
    pub x: Vec<f64>,
    /// `normal` first, then `t_v<v>` per requested dof.
    pub columns: Vec<(String, Vec<f64>)>,
}

pub const DENSITY_STEP: f64 = 0.01;
pub const DENSITY_POINTS: usize = 1201;

fn dof_label(v: f64) -> String {
    format!("t_v{v}")
}

/// Standard normal and, per `v`, a zero-mean t with scale `(v - 2)/v` so its
/// variance is exactly 1. Requires every `v > 2`.
pub fn density_table(dofs: &[f64]) -> Result<DensityTable> {
    for &v in dofs {
        if !(v > 2.0) || !v.is_finite() {
            return Err(EdaError::config(format!(
                "dof {v} rejected: unit variance needs a finite v > 2 (the t variance is v/(v-2) times the scale)"
            )));
        }
    }
    let x: Vec<f64> = (0..DENSITY_POINTS)
        .map(|i| -6.0 + i as f64 * DENSITY_STEP)
        .collect();
    let mut models = vec![(
        "normal".to_string(),
        EllipticalParams::gaussian(vec![0.0], SymMatrix::identity(1))?,
    )];
    for &v in dofs {
        let scale = SymMatrix::scaled_identity(1, (v - 2.0) / v);
        models.push((
            dof_label(v),
            EllipticalParams::student_t(vec![0.0], scale, v)?,
        ));
    }
    let mut columns = Vec::with_capacity(models.len());
    for (name, p) in models {
        let col = x
            .iter()
            .map(|&xi| p.log_density(&[xi]).map(f64::exp))
            .collect::<Result<Vec<_>>>()?;
        columns.push((name, col));
    }
    Ok(DensityTable { x, columns })
}

/// Writes [`density_table`] as CSV with header `x,normal,t_v<v>,...`.
pub fn emit_density_comparison(dofs: &[f64], path: &Path) -> Result<DensityTable> {
    let table = density_table(dofs)?;
    let csv_err = |source| EdaError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(create_file(path)?);
    let mut header = vec!["x".to_string()];
    header.extend(table.columns.iter().map(|c| c.0.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, x) in table.x.iter().enumerate() {
        let mut rec = vec![x.to_string()];
        rec.extend(table.columns.iter().map(|c| c.1[i].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|source| EdaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(table)
}

/// Arms for the four algorithms with the standard settings for `dim`.
pub fn standard_arms(function: FunctionId, dim: usize) -> Vec<Arm> {
    let n = default_population(dim);
    Algorithm::ALL
        .iter()
        .map(|&alg| Arm {
            label: alg.name().to_string(),
            config: EdaConfig {
                population_size: n,
                selection_size: selection_from_fraction(n, 0.2),
                dof: default_dof(function),
                ..EdaConfig::new(alg)
            },
        })
        .collect()
}

/// Every catalog function at each of its harness dimensions, four
/// algorithms, 30 runs. 10D cases are left out unless `allow_large`.
pub fn preset_table1(allow_large: bool) -> ExperimentSpec {
    let cases = FunctionId::ALL
        .iter()
        .flat_map(|&id| {
            id.harness_dimensions()
                .iter()
                .filter(move |&&d| allow_large || d < 10)
                .map(move |&d| Case {
                    function: id,
                    dimension: d,
                    arms: standard_arms(id, d),
                })
        })
        .collect();
    ExperimentSpec {
        cases,
        run_count: 30,
        base_seed: 1,
        out_dir: None,
        preset: Some("paper-table1".to_string()),
        spread: SpreadKind::Stddev,
    }
}

/// ESTDA at v ∈ {5, 10, 50, 100, 500} against Gaussian-EDA on six 2D
/// functions.
pub fn preset_dof_sweep() -> ExperimentSpec {
    let functions = [
        FunctionId::Ackley,
        FunctionId::DeJong5,
        FunctionId::Easom,
        FunctionId::Rastrigin,
        FunctionId::Michalewicz,
        FunctionId::Levy13,
    ];
    let cases = functions
        .iter()
        .map(|&id| {
            let mut arms: Vec<Arm> = [5.0, 10.0, 50.0, 100.0, 500.0]
                .iter()
                .map(|&v| Arm {
                    label: format!("estda-v{v}"),
                    config: EdaConfig {
                        dof: v,
                        ..EdaConfig::new(Algorithm::Estda)
                    },
                })
                .collect();
            arms.push(Arm {
                label: "gaussian-eda".to_string(),
                config: EdaConfig::new(Algorithm::GaussianEda),
            });
            Case {
                function: id,
                dimension: 2,
                arms,
            }
        })
        .collect();
    ExperimentSpec {
        cases,
        run_count: 30,
        base_seed: 1,
        out_dir: None,
        preset: Some("paper-fig2".to_string()),
        spread: SpreadKind::Stddev,
    }
}

pub const PRESETS: [&str; 2] = ["paper-table1", "paper-fig2"];

pub fn preset(name: &str, allow_large: bool) -> Result<ExperimentSpec> {
    match name {
        "paper-table1" => Ok(preset_table1(allow_large)),
        "paper-fig2" => Ok(preset_dof_sweep()),
        _ => Err(EdaError::config(format!(
            "unknown preset `{name}` (expected one of {PRESETS:?})"
        ))),
    }
}
