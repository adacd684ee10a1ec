//! The EDA main loop: sample a population from the model, evaluate it, keep
//! the best point seen so far, truncation-select the `M` best and refit.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    fit_gaussian_ml, fit_student_t_ml_weighted, EllipticalParams, SplitStreams, Variates,
};
use crate::error::{EdaError, Result};
use crate::linalg::SymMatrix;
use crate::mixture::{
    fit_mixture, sample_mixture, EmDiagnostics, EmNormalizer, EmOptions, Family, MixtureModel,
};
use crate::objectives::BenchmarkFunction;
use crate::scalar::Scalar;

/// Out-of-box draws are redrawn this many times before being clamped.
pub const RESAMPLE_ATTEMPTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GaussianEda,
    GmmEda,
    Estda,
    Emstda,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Estda,
        Algorithm::Emstda,
        Algorithm::GaussianEda,
        Algorithm::GmmEda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GaussianEda => "gaussian-eda",
            Algorithm::GmmEda => "gmm-eda",
            Algorithm::Estda => "estda",
            Algorithm::Emstda => "emstda",
        }
    }

    pub fn is_mixture(self) -> bool {
        matches!(self, Algorithm::GmmEda | Algorithm::Emstda)
    }

    pub fn family(self) -> Family {
        match self {
            Algorithm::GaussianEda | Algorithm::GmmEda => Family::Gaussian,
            Algorithm::Estda | Algorithm::Emstda => Family::StudentT,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = EdaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        match key.as_str() {
            "gaussian-eda" | "gaussian" => Ok(Algorithm::GaussianEda),
            "gmm-eda" | "gmm" => Ok(Algorithm::GmmEda),
            "estda" => Ok(Algorithm::Estda),
            "emstda" => Ok(Algorithm::Emstda),
            _ => Err(EdaError::config(format!(
                "unknown algorithm `{s}` (expected gaussian-eda, gmm-eda, estda or emstda)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsPolicy {
    /// Redraw up to [`RESAMPLE_ATTEMPTS`] times, then clamp.
    #[default]
    Resample,
    Clamp,
}

impl FromStr for BoundsPolicy {
    type Err = EdaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "resample" => Ok(BoundsPolicy::Resample),
            "clamp" => Ok(BoundsPolicy::Clamp),
            _ => Err(EdaError::config(format!(
                "unknown bounds policy `{s}` (expected resample or clamp)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct EdaConfig<F> {
    pub algorithm: Algorithm,
    /// `N`
    pub population_size: usize,
    /// `M`
    pub selection_size: usize,
    /// Degrees of freedom of the t variants; ignored by the Gaussian ones.
    pub dof: F,
    /// Starting component count `L` of the mixture variants.
    pub initial_components: usize,
    /// Pruning floor `W`.
    pub weight_floor: F,
    pub max_iterations: usize,
    pub em_iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub bounds_policy: BoundsPolicy,
    #[serde(default)]
    pub em_normalizer: EmNormalizer,
}

impl<F: Scalar> EdaConfig<F> {
    /// N = 1000, M = 200, v = 5, L = 5, W = 0.02, 50 iterations, 2 EM steps.
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            population_size: 1000,
            selection_size: 200,
            dof: F::lit(5.0),
            initial_components: 5,
            weight_floor: F::lit(0.02),
            max_iterations: 50,
            em_iterations: 2,
            seed: 0,
            bounds_policy: BoundsPolicy::Resample,
            em_normalizer: EmNormalizer::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.population_size;
        let m = self.selection_size;
        if m < 2 {
            return Err(EdaError::config(format!(
                "selection size M={m} is too small; the refit needs at least 2 individuals"
            )));
        }
        if m >= n {
            return Err(EdaError::config(format!(
                "selection size M={m} must be smaller than population size N={n}"
            )));
        }
        if self.max_iterations == 0 {
            return Err(EdaError::config("max_iterations must be at least 1"));
        }
        if self.algorithm.family() == Family::StudentT
            && !(self.dof > F::zero() && self.dof.is_finite())
        {
            return Err(EdaError::config(format!(
                "degrees of freedom must be positive and finite, got {}",
                self.dof
            )));
        }
        if self.algorithm.is_mixture() {
            if self.initial_components == 0 {
                return Err(EdaError::config(
                    "initial component count L must be at least 1",
                ));
            }
            if self.em_iterations == 0 {
                return Err(EdaError::config("em_iterations must be at least 1"));
            }
            let w = self.weight_floor;
            if !(w > F::zero() && w < F::one()) {
                return Err(EdaError::config(format!(
                    "weight floor W={w} must lie in (0, 1)"
                )));
            }
            let total = w * F::from_usize_lossy(self.initial_components);
            if total > F::one() {
                return Err(EdaError::config(format!(
                    "W·L = {w}·{} = {total} exceeds 1; every initial component would be pruned",
                    self.initial_components
                )));
            }
        }
        Ok(())
    }

    fn em_options(&self) -> EmOptions<F> {
        EmOptions {
            weight_floor: self.weight_floor,
            iterations: self.em_iterations,
            normalizer: self.em_normalizer,
            change_tolerance: None,
            track_likelihood: false,
        }
    }

    fn model_dof(&self) -> F {
        match self.algorithm.family() {
            Family::Gaussian => F::infinity(),
            Family::StudentT => self.dof,
        }
    }
}

/// Current sampling model `θ_k`.
#[derive(Clone, Debug)]
pub enum Model<F> {
    Single(EllipticalParams<F>),
    Mixture(MixtureModel<F>),
}

impl<F: Scalar> PartialEq for Model<F> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Model::Single(a), Model::Single(b)) => a == b,
            (Model::Mixture(a), Model::Mixture(b)) => a == b,
            _ => false,
        }
    }
}

impl<F: Scalar> Model<F> {
    pub fn survival_components(&self) -> usize {
        match self {
            Model::Single(_) => 1,
            Model::Mixture(m) => m.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Single(p) => p.dim(),
            Model::Mixture(m) => m.dim(),
        }
    }

    /// Every mean and scale entry is finite and every scale has a strictly
    /// positive Cholesky diagonal.
    pub fn is_finite_pd(&self) -> bool {
        let ok = |p: &EllipticalParams<F>| {
            p.mean().iter().all(|v| v.is_finite())
                && p.scale().is_finite()
                && (0..p.dim()).all(|i| {
                    let l = p.cholesky().lower(i, i);
                    l.is_finite() && l > F::zero()
                })
        };
        match self {
            Model::Single(p) => ok(p),
            Model::Mixture(m) => m
                .components()
                .iter()
                .all(|c| c.weight.is_finite() && c.weight > F::zero() && ok(&c.params)),
        }
    }

    /// One draw; for a single t model the gamma scale is returned as well.
    fn draw<V: Variates + ?Sized>(&self, rng: &mut V) -> (Vec<F>, Option<F>) {
        match self {
            Model::Single(p) if p.is_gaussian() => (p.sample_gaussian(rng), None),
            Model::Single(p) => {
                let d = p.sample_student_t(rng);
                (d.point, Some(d.gamma_scale))
            }
            Model::Mixture(m) => (sample_mixture(m, rng), None),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunState<F> {
    pub model: Model<F>,
    /// `x̂`
    pub best_point: Vec<F>,
    /// `f(x̂)`
    pub best_value: F,
    /// Completed iterations.
    pub iteration: usize,
    pub survival_components: usize,
    /// Objective values of the most recent population, in draw order.
    pub population_values: Vec<F>,
    pub em_diagnostics: EmDiagnostics,
}

/// Streams for run `seed`: normals and uniforms from one ChaCha8 stream,
/// gamma scales from a second stream of the same key. A t model and a
/// Gaussian model fed from the same seed therefore see identical normals.
pub fn run_streams(seed: u64) -> SplitStreams<ChaCha8Rng> {
    let main = ChaCha8Rng::seed_from_u64(seed);
    let mut scale = ChaCha8Rng::seed_from_u64(seed);
    scale.set_stream(1);
    SplitStreams { main, scale }
}

/// Single variants: box center and `diag(((u - l)/4)²)`. Mixture variants:
/// `L` means uniform in the box, each scale `diag(((u - l)/(4 L^{1/d}))²)`,
/// equal weights.
pub fn initialize_model<F: Scalar, V: Variates + ?Sized>(
    cfg: &EdaConfig<F>,
    f: &BenchmarkFunction,
    rng: &mut V,
) -> Result<Model<F>> {
    cfg.validate()?;
    let (lower, upper) = f.bounds::<F>();
    let d = lower.len();
    let dof = cfg.model_dof();
    let four = F::lit(4.0);
    if !cfg.algorithm.is_mixture() {
        let mean = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| (l + u) / F::lit(2.0))
            .collect();
        let diag: Vec<F> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| ((u - l) / four).powi(2))
            .collect();
        return Ok(Model::Single(EllipticalParams::new(
            mean,
            SymMatrix::diagonal(&diag),
            dof,
        )?));
    }
    let l_count = cfg.initial_components;
    let shrink = four * F::from_usize_lossy(l_count).powf(F::from_usize_lossy(d).recip());
    let diag: Vec<F> = lower
        .iter()
        .zip(&upper)
        .map(|(&l, &u)| ((u - l) / shrink).powi(2))
        .collect();
    let mut params = Vec::with_capacity(l_count);
    for _ in 0..l_count {
        let mean = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| {
                let t: F = rng.unit();
                l + t * (u - l)
            })
            .collect();
        params.push(EllipticalParams::new(
            mean,
            SymMatrix::diagonal(&diag),
            dof,
        )?);
    }
    Ok(Model::Mixture(MixtureModel::equal_weights(
        cfg.algorithm.family(),
        params,
        dof,
    )?))
}

fn in_box<F: Scalar>(x: &[F], lower: &[F], upper: &[F]) -> bool {
    x.iter()
        .zip(lower.iter().zip(upper))
        .all(|(&v, (&l, &u))| v >= l && v <= u)
}

fn clamp_into<F: Scalar>(x: &mut [F], lower: &[F], upper: &[F]) {
    for (v, (&l, &u)) in x.iter_mut().zip(lower.iter().zip(upper)) {
        // NaN coordinates go to the lower edge
        *v = if v.is_nan() { l } else { v.max(l).min(u) };
    }
}

/// One feasible draw under the bounds policy. The gamma scale belongs to the
/// final accepted draw and is not touched by clamping.
fn feasible_draw<F: Scalar, V: Variates + ?Sized>(
    model: &Model<F>,
    policy: BoundsPolicy,
    lower: &[F],
    upper: &[F],
    rng: &mut V,
) -> (Vec<F>, Option<F>) {
    let mut draw = model.draw(rng);
    if policy == BoundsPolicy::Resample {
        let mut attempts = 0;
        while attempts < RESAMPLE_ATTEMPTS && !in_box(&draw.0, lower, upper) {
            draw = model.draw(rng);
            attempts += 1;
        }
    }
    clamp_into(&mut draw.0, lower, upper);
    draw
}

fn sanitize<F: Scalar>(v: F) -> F {
    if v.is_nan() {
        F::infinity()
    } else {
        v
    }
}

/// Indices of the `m` smallest values, sorted ascending by value with ties
/// broken by lower index. NaN counts as `+∞`.
pub fn truncation_select<F: Scalar>(values: &[F], m: usize) -> Result<Vec<usize>> {
    if m > values.len() {
        return Err(EdaError::InsufficientData {
            needed: m,
            got: values.len(),
        });
    }
    let finite = values.iter().filter(|v| v.is_finite()).count();
    if finite < m {
        return Err(EdaError::DegeneratePopulation { finite, needed: m });
    }
    let key = |i: usize| sanitize(values[i]);
    let cmp = |&a: &usize, &b: &usize| {
        key(a)
            .partial_cmp(&key(b))
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    };
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if m < idx.len() && m > 0 {
        idx.select_nth_unstable_by(m - 1, cmp);
    }
    idx.truncate(m);
    idx.sort_unstable_by(cmp);
    Ok(idx)
}

/// Fresh state: initialized model plus one evaluated draw as `x̂`.
pub fn initial_state<F: Scalar, V: Variates + ?Sized>(
    cfg: &EdaConfig<F>,
    f: &BenchmarkFunction,
    rng: &mut V,
) -> Result<RunState<F>> {
    let model = initialize_model(cfg, f, rng)?;
    let (lower, upper) = f.bounds::<F>();
    let (best_point, _) = feasible_draw(&model, cfg.bounds_policy, &lower, &upper, rng);
    let best_value = sanitize(f.evaluate(&best_point)?);
    Ok(RunState {
        survival_components: model.survival_components(),
        model,
        best_point,
        best_value,
        iteration: 0,
        population_values: Vec::new(),
        em_diagnostics: EmDiagnostics::default(),
    })
}

fn iterate_inner<F: Scalar, V: Variates + ?Sized>(
    state: &RunState<F>,
    cfg: &EdaConfig<F>,
    f: &BenchmarkFunction,
    rng: &mut V,
) -> Result<RunState<F>> {
    let (lower, upper) = f.bounds::<F>();
    let n = cfg.population_size;
    let mut points = Vec::with_capacity(n);
    let mut taus = Vec::new();
    for _ in 0..n {
        let (x, tau) = feasible_draw(&state.model, cfg.bounds_policy, &lower, &upper, rng);
        points.push(x);
        if let Some(t) = tau {
            taus.push(t);
        }
    }
    let values = points
        .iter()
        .map(|x| f.evaluate(x))
        .collect::<Result<Vec<F>>>()?;

    let mut best_point = state.best_point.clone();
    let mut best_value = state.best_value;
    let argmin = (0..n).filter(|&i| values[i].is_finite()).min_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    if let Some(i) = argmin {
        if values[i] < best_value {
            best_value = values[i];
            best_point = points[i].clone();
        }
    }

    let chosen = truncation_select(&values, cfg.selection_size)?;
    let selected: Vec<&[F]> = chosen.iter().map(|&i| points[i].as_slice()).collect();
    let mut em_diagnostics = state.em_diagnostics;
    let model = match (&state.model, cfg.algorithm) {
        (Model::Single(_), Algorithm::GaussianEda) => Model::Single(fit_gaussian_ml(&selected)?),
        (Model::Single(_), Algorithm::Estda) => {
            let sel_taus: Vec<F> = chosen.iter().map(|&i| taus[i]).collect();
            Model::Single(fit_student_t_ml_weighted(&selected, &sel_taus, cfg.dof)?)
        }
        (Model::Mixture(m), Algorithm::GmmEda | Algorithm::Emstda) => {
            let fit = fit_mixture(m, &selected, &cfg.em_options())?;
            em_diagnostics.degenerate_rows += fit.diagnostics.degenerate_rows;
            em_diagnostics.repaired_components += fit.diagnostics.repaired_components;
            em_diagnostics.prune_fallbacks += fit.diagnostics.prune_fallbacks;
            Model::Mixture(fit.model)
        }
        _ => {
            return Err(EdaError::config(
                "model kind does not match the configured algorithm",
            ))
        }
    };

    Ok(RunState {
        survival_components: model.survival_components(),
        model,
        best_point,
        best_value,
        iteration: state.iteration + 1,
        population_values: values,
        em_diagnostics,
    })
}

/// One pass of the loop body. Errors carry the (1-based) iteration index.
pub fn eda_iterate<F: Scalar, V: Variates + ?Sized>(
    state: &RunState<F>,
    cfg: &EdaConfig<F>,
    f: &BenchmarkFunction,
    rng: &mut V,
) -> Result<RunState<F>> {
    iterate_inner(state, cfg, f, rng).map_err(|e| e.at_iteration(state.iteration + 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    Failed { iteration: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RunRecord<F> {
    pub function: String,
    pub dimension: usize,
    pub seed: u64,
    pub config: EdaConfig<F>,
    /// Best-so-far value after each iteration.
    pub best_value_trace: Vec<F>,
    /// Component count after each iteration.
    pub survival_component_trace: Vec<usize>,
    pub final_best_point: Vec<F>,
    pub final_best_value: F,
    pub status: RunStatus,
    pub em_diagnostics: EmDiagnostics,
    pub wall_clock_seconds: f64,
}

impl<F> RunRecord<F> {
    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

/// [`run_eda`] with a callback after initialization and after every
/// iteration.
pub fn run_eda_observed<F: Scalar>(
    cfg: &EdaConfig<F>,
    f: &BenchmarkFunction,
    mut observer: impl FnMut(&RunState<F>),
) -> Result<RunRecord<F>> {
    cfg.validate()?;
    let started = Instant::now();
    let mut rng = run_streams(cfg.seed);
    let mut record = RunRecord {
        function: f.name().to_string(),
        dimension: f.dimension,
        seed: cfg.seed,
        config: cfg.clone(),
        best_value_trace: Vec::with_capacity(cfg.max_iterations),
        survival_component_trace: Vec::with_capacity(cfg.max_iterations),
        final_best_point: Vec::new(),
        final_best_value: F::infinity(),
        status: RunStatus::Completed,
        em_diagnostics: EmDiagnostics::default(),
        wall_clock_seconds: 0.0,
    };
    let mut state = match initial_state(cfg, f, &mut rng) {
        Ok(s) => s,
        Err(e) => {
            record.status = RunStatus::Failed {
                iteration: 0,
                message: e.to_string(),
            };
            record.wall_clock_seconds = started.elapsed().as_secs_f64();
            return Ok(record);
        }
    };
    observer(&state);
    for _ in 0..cfg.max_iterations {
        match eda_iterate(&state, cfg, f, &mut rng) {
            Ok(next) => state = next,
            Err(e) => {
                record.status = RunStatus::Failed {
                    iteration: state.iteration + 1,
                    message: e.to_string(),
                };
                break;
            }
        }
        observer(&state);
        record.best_value_trace.push(state.best_value);
        record
            .survival_component_trace
            .push(state.survival_components);
    }
    record.final_best_point = state.best_point;
    record.final_best_value = state.best_value;
    record.em_diagnostics = state.em_diagnostics;
    record.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(record)
}

/// Initializes and runs `max_iterations` iterations seeded from `cfg.seed`.
/// Only an invalid configuration is an `Err`; a run that breaks down midway
/// comes back as a record with [`RunStatus::Failed`] and partial traces.
pub fn run_eda<F: Scalar>(cfg: &EdaConfig<F>, f: &BenchmarkFunction) -> Result<RunRecord<F>> {
    run_eda_observed(cfg, f, |_| {})
}
