//! Finite mixtures of Gaussian or Student's t components fitted by EM with
//! small-weight component deletion.
//!
//! One EM step is: responsibilities under the old model, new weights as mean
//! responsibilities, deletion of components whose new weight is below the
//! floor `W` (survivors renormalized), then the maximization step for the
//! survivors.

use serde::{Deserialize, Serialize};

use crate::distributions::{fit_gaussian_ml, EllipticalParams, Variates};
use crate::error::{EdaError, Result};
use crate::linalg::SymMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    StudentT,
}

/// Normalizer of the Gaussian maximization step.
///
/// `Standard` divides the weighted sums by `Σ_j ε(l|x_j)`. `AsPrinted` divides
/// by the sample count `M`, which pulls low-weight component means toward the
/// origin; it is kept for comparison runs only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmNormalizer {
    #[default]
    Standard,
    AsPrinted,
}

#[derive(Clone, Debug)]
pub struct Component<F> {
    pub weight: F,
    pub params: EllipticalParams<F>,
}

#[derive(Clone, Debug)]
pub struct MixtureModel<F> {
    family: Family,
    components: Vec<Component<F>>,
    dof: F,
}

impl<F: Scalar> PartialEq for Component<F> {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight && self.params == other.params
    }
}

impl<F: Scalar> PartialEq for MixtureModel<F> {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && (self.dof == other.dof || (self.dof.is_nan() && other.dof.is_nan()))
            && self.components == other.components
    }
}

impl<F: Scalar> MixtureModel<F> {
    /// Validates weights (each in (0, 1], summing to one within 1e-12),
    /// dimensions and family consistency.
    pub fn new(family: Family, components: Vec<Component<F>>, dof: F) -> Result<Self> {
        if components.is_empty() {
            return Err(EdaError::config("mixture needs at least one component"));
        }
        let d = components[0].params.dim();
        let mut total = F::zero();
        for c in &components {
            if c.params.dim() != d {
                return Err(EdaError::DimensionMismatch {
                    expected: d,
                    got: c.params.dim(),
                });
            }
            if !(c.weight > F::zero() && c.weight <= F::one()) {
                return Err(EdaError::config(format!(
                    "component weight {} outside (0, 1]",
                    c.weight
                )));
            }
            let consistent = match family {
                Family::Gaussian => c.params.is_gaussian(),
                Family::StudentT => c.params.dof() == dof,
            };
            if !consistent {
                return Err(EdaError::config(
                    "component family or dof disagrees with mixture",
                ));
            }
            total = total + c.weight;
        }
        if (total - F::one()).abs() > F::lit(1e-12).max(F::epsilon() * F::lit(16.0)) {
            return Err(EdaError::config(format!("weights sum to {total}, not 1")));
        }
        let dof = match family {
            Family::Gaussian => F::infinity(),
            Family::StudentT => dof,
        };
        Ok(Self {
            family,
            components,
            dof,
        })
    }

    /// Like [`MixtureModel::new`] but rescales the weights to sum to one first.
    pub fn normalized(family: Family, mut components: Vec<Component<F>>, dof: F) -> Result<Self> {
        let total: F = components.iter().map(|c| c.weight).sum();
        if !(total > F::zero()) {
            return Err(EdaError::config("weights sum to zero"));
        }
        for c in &mut components {
            c.weight = c.weight / total;
        }
        Self::new(family, components, dof)
    }

    /// Equal-weight mixture over the given parameter sets.
    pub fn equal_weights(family: Family, params: Vec<EllipticalParams<F>>, dof: F) -> Result<Self> {
        let w = F::from_usize_lossy(params.len().max(1)).recip();
        let components = params
            .into_iter()
            .map(|params| Component { weight: w, params })
            .collect();
        Self::normalized(family, components, dof)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn components(&self) -> &[Component<F>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].params.dim()
    }

    /// Shared degrees of freedom; infinite for the Gaussian family.
    pub fn dof(&self) -> F {
        self.dof
    }

    pub fn weights(&self) -> Vec<F> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// `ln w_l + ln f_l(x)` for every component; `None` for a point that
    /// cannot be evaluated.
    fn log_terms(&self, x: &[F], out: &mut Vec<F>) -> bool {
        out.clear();
        for c in &self.components {
            match c.params.log_density(x) {
                Ok(ld) => out.push(c.weight.ln() + ld),
                Err(_) => return false,
            }
        }
        true
    }
}

fn log_sum_exp<F: Scalar>(terms: &[F]) -> F {
    let max = terms.iter().copied().fold(F::neg_infinity(), F::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|&t| (t - max).exp()).sum::<F>().ln()
}

/// `M × L` matrix of posterior membership probabilities `ε(l|x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponsibilityTable<F> {
    rows: usize,
    cols: usize,
    entries: Vec<F>,
    /// Rows whose component densities all vanished (or could not be
    /// evaluated) and fell back to the prior weights.
    pub degenerate_rows: Vec<usize>,
}

impl<F: Scalar> ResponsibilityTable<F> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, j: usize, l: usize) -> F {
        self.entries[j * self.cols + l]
    }

    pub fn row(&self, j: usize) -> &[F] {
        &self.entries[j * self.cols..(j + 1) * self.cols]
    }

    /// `Σ_j ε(l|x_j)`
    pub fn column_sum(&self, l: usize) -> F {
        (0..self.rows).map(|j| self.get(j, l)).sum()
    }
}

/// Bayes ratio of weighted component densities, computed in log space with
/// max subtraction.
pub fn responsibilities<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
) -> Result<ResponsibilityTable<F>> {
    if samples.is_empty() {
        return Err(EdaError::InsufficientData { needed: 1, got: 0 });
    }
    let l = model.len();
    let mut entries = Vec::with_capacity(samples.len() * l);
    let mut degenerate_rows = Vec::new();
    let mut terms = Vec::with_capacity(l);
    for (j, s) in samples.iter().enumerate() {
        let s = s.as_ref();
        if s.len() != model.dim() {
            return Err(EdaError::DimensionMismatch {
                expected: model.dim(),
                got: s.len(),
            });
        }
        let ok = model.log_terms(s, &mut terms);
        let max = terms.iter().copied().fold(F::neg_infinity(), F::max);
        if !ok || !max.is_finite() {
            degenerate_rows.push(j);
            entries.extend(model.components.iter().map(|c| c.weight));
            continue;
        }
        let start = entries.len();
        let mut total = F::zero();
        for &t in &terms {
            let e = (t - max).exp();
            total = total + e;
            entries.push(e);
        }
        for e in &mut entries[start..] {
            *e = *e / total;
        }
    }
    Ok(ResponsibilityTable {
        rows: samples.len(),
        cols: l,
        entries,
        degenerate_rows,
    })
}

/// `Σ_j ln Σ_l w_l f_l(x_j)`
pub fn mixture_log_likelihood<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
) -> F {
    let mut terms = Vec::with_capacity(model.len());
    samples
        .iter()
        .map(|s| {
            if model.log_terms(s.as_ref(), &mut terms) {
                log_sum_exp(&terms)
            } else {
                F::neg_infinity()
            }
        })
        .sum()
}

/// Result of [`prune_components`].
#[derive(Clone, Debug)]
pub struct Pruned<F> {
    pub model: MixtureModel<F>,
    /// Indices (in the input model) of the surviving components.
    pub kept: Vec<usize>,
    /// Every weight was below the floor; only the heaviest was kept.
    pub fallback: bool,
}

fn surviving_indices<F: Scalar>(weights: &[F], floor: F) -> (Vec<usize>, bool) {
    let kept: Vec<usize> = (0..weights.len())
        .filter(|&i| weights[i] >= floor)
        .collect();
    if !kept.is_empty() {
        return (kept, false);
    }
    let heaviest = (0..weights.len())
        .max_by(|&a, &b| {
            weights[a]
                .partial_cmp(&weights[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    (vec![heaviest], true)
}

/// Drops components with weight below `floor` and rescales the survivors to
/// sum to one, preserving order.
pub fn prune_components<F: Scalar>(model: &MixtureModel<F>, floor: F) -> Result<Pruned<F>> {
    let (kept, fallback) = surviving_indices(&model.weights(), floor);
    let components = kept.iter().map(|&i| model.components[i].clone()).collect();
    Ok(Pruned {
        model: MixtureModel::normalized(model.family, components, model.dof)?,
        kept,
        fallback,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmOptions<F> {
    /// Components whose new weight falls below this are deleted.
    pub weight_floor: F,
    /// Number of EM steps.
    pub iterations: usize,
    pub normalizer: EmNormalizer,
    /// Optional early stop when the largest relative parameter change of a
    /// step falls below this value.
    pub change_tolerance: Option<F>,
    /// Record the data log-likelihood before and after every step.
    pub track_likelihood: bool,
}

impl<F: Scalar> Default for EmOptions<F> {
    fn default() -> Self {
        Self {
            weight_floor: F::lit(0.02),
            iterations: 2,
            normalizer: EmNormalizer::Standard,
            change_tolerance: None,
            track_likelihood: false,
        }
    }
}

/// Counters for the recoveries EM had to make.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmDiagnostics {
    pub degenerate_rows: usize,
    pub repaired_components: usize,
    pub prune_fallbacks: usize,
}

impl EmDiagnostics {
    fn absorb(&mut self, other: EmDiagnostics) {
        self.degenerate_rows += other.degenerate_rows;
        self.repaired_components += other.repaired_components;
        self.prune_fallbacks += other.prune_fallbacks;
    }
}

#[derive(Clone, Debug)]
pub struct EmStep<F> {
    pub model: MixtureModel<F>,
    pub diagnostics: EmDiagnostics,
}

fn check_step_input<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
    family: Family,
) -> Result<()> {
    if model.family != family {
        return Err(EdaError::config(format!(
            "{family:?} EM step applied to a {:?} mixture",
            model.family
        )));
    }
    if samples.len() < 2 {
        return Err(EdaError::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    Ok(())
}

/// One EM step for a Gaussian mixture.
pub fn em_step_gaussian<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
    opts: &EmOptions<F>,
) -> Result<EmStep<F>> {
    check_step_input(model, samples, Family::Gaussian)?;
    em_step_inner(model, samples, opts)
}

/// One EM step for a Student's t mixture with shared, fixed `v`.
///
/// The maximization step reweights every sample by
/// `u_j = (v + d) / (v + M_d(x_j; μ_old, Σ_old))`: the mean is the `ε·u`
/// weighted average and the scale is the `ε·u` weighted scatter divided by
/// `Σ_j ε(l|x_j)`.
pub fn em_step_student_t<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
    opts: &EmOptions<F>,
) -> Result<EmStep<F>> {
    check_step_input(model, samples, Family::StudentT)?;
    em_step_inner(model, samples, opts)
}

/// Family-dispatched EM step.
pub fn em_step<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
    opts: &EmOptions<F>,
) -> Result<EmStep<F>> {
    check_step_input(model, samples, model.family)?;
    em_step_inner(model, samples, opts)
}

fn em_step_inner<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
    opts: &EmOptions<F>,
) -> Result<EmStep<F>> {
    let table = responsibilities(model, samples)?;
    let m = F::from_usize_lossy(samples.len());
    let d = model.dim();
    let new_weights: Vec<F> = (0..model.len()).map(|l| table.column_sum(l) / m).collect();
    let (kept, fallback) = surviving_indices(&new_weights, opts.weight_floor);

    let mut diagnostics = EmDiagnostics {
        degenerate_rows: table.degenerate_rows.len(),
        prune_fallbacks: usize::from(fallback),
        ..Default::default()
    };

    let mut components = Vec::with_capacity(kept.len());
    let mut diff = vec![F::zero(); d];
    for &l in &kept {
        let old = &model.components[l].params;
        // per-sample weight ε(l|x_j) for Gaussian, ε(l|x_j) u_j for t
        let sample_weights: Vec<F> = match model.family {
            Family::Gaussian => (0..samples.len()).map(|j| table.get(j, l)).collect(),
            Family::StudentT => {
                let v = model.dof;
                let vd = v + F::from_usize_lossy(d);
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, s)| {
                        let md = old.mahalanobis_sq(s.as_ref()).unwrap_or(F::infinity());
                        table.get(j, l) * vd / (v + md)
                    })
                    .collect()
            }
        };
        let resp_sum = table.column_sum(l);
        let weight_sum: F = sample_weights.iter().copied().sum();
        let (mean_denom, scatter_denom) = match (model.family, opts.normalizer) {
            (Family::Gaussian, EmNormalizer::Standard) => (resp_sum, resp_sum),
            (Family::Gaussian, EmNormalizer::AsPrinted) => (m, m),
            (Family::StudentT, _) => (weight_sum, resp_sum),
        };

        let mut mean = vec![F::zero(); d];
        for (s, &w) in samples.iter().zip(&sample_weights) {
            for (acc, &x) in mean.iter_mut().zip(s.as_ref()) {
                *acc = *acc + w * x;
            }
        }
        for v in &mut mean {
            *v = *v / mean_denom;
        }
        let mut scatter = SymMatrix::zeros(d);
        for (s, &w) in samples.iter().zip(&sample_weights) {
            for ((o, &x), &mu) in diff.iter_mut().zip(s.as_ref()).zip(&mean) {
                *o = x - mu;
            }
            scatter.add_outer(w, &diff);
        }
        scatter.scale(scatter_denom.recip());

        let params = match EllipticalParams::from_estimate(mean, scatter, model.dof) {
            Ok(p) => p,
            Err(_) => {
                diagnostics.repaired_components += 1;
                repair_component(samples, model.dof)?
            }
        };
        components.push(Component {
            weight: new_weights[l],
            params,
        });
    }

    Ok(EmStep {
        model: MixtureModel::normalized(model.family, components, model.dof)?,
        diagnostics,
    })
}

/// Replacement for a component whose update degenerated: the jittered
/// scatter fit of the whole sample set, carrying the mixture's dof.
fn repair_component<F: Scalar, S: AsRef<[F]>>(
    samples: &[S],
    dof: F,
) -> Result<EllipticalParams<F>> {
    let fit = fit_gaussian_ml(samples)?;
    EllipticalParams::from_estimate(fit.mean().to_vec(), fit.scale().clone(), dof)
}

/// Output of [`fit_mixture`].
#[derive(Clone, Debug)]
pub struct MixtureFit<F> {
    pub model: MixtureModel<F>,
    /// Log-likelihood of the samples under the starting model and after each
    /// step; empty unless `track_likelihood` is set.
    pub log_likelihood_trace: Vec<F>,
    /// Component count after each step.
    pub component_trace: Vec<usize>,
    pub steps: usize,
    pub diagnostics: EmDiagnostics,
}

fn relative_change<F: Scalar>(a: &MixtureModel<F>, b: &MixtureModel<F>) -> F {
    if a.len() != b.len() {
        return F::infinity();
    }
    let rel = |x: F, y: F| (x - y).abs() / F::one().max(x.abs());
    let mut worst = F::zero();
    for (ca, cb) in a.components.iter().zip(&b.components) {
        worst = worst.max(rel(ca.weight, cb.weight));
        for (&x, &y) in ca.params.mean().iter().zip(cb.params.mean()) {
            worst = worst.max(rel(x, y));
        }
        let d = ca.params.dim();
        for i in 0..d {
            for j in 0..d {
                worst = worst.max(rel(
                    ca.params.scale().get(i, j),
                    cb.params.scale().get(i, j),
                ));
            }
        }
    }
    worst
}

/// Runs `opts.iterations` EM steps (fewer if the optional change tolerance
/// is met).
pub fn fit_mixture<F: Scalar, S: AsRef<[F]>>(
    model: &MixtureModel<F>,
    samples: &[S],
    opts: &EmOptions<F>,
) -> Result<MixtureFit<F>> {
    if opts.iterations == 0 {
        return Err(EdaError::config("EM needs at least one iteration"));
    }
    let mut current = model.clone();
    let mut ll = Vec::new();
    if opts.track_likelihood {
        ll.push(mixture_log_likelihood(&current, samples));
    }
    let mut component_trace = Vec::with_capacity(opts.iterations);
    let mut diagnostics = EmDiagnostics::default();
    let mut steps = 0;
    for _ in 0..opts.iterations {
        let step = em_step(&current, samples, opts)?;
        diagnostics.absorb(step.diagnostics);
        steps += 1;
        let change = relative_change(&current, &step.model);
        current = step.model;
        component_trace.push(current.len());
        if opts.track_likelihood {
            ll.push(mixture_log_likelihood(&current, samples));
        }
        if opts.change_tolerance.is_some_and(|tol| change < tol) {
            break;
        }
    }
    Ok(MixtureFit {
        model: current,
        log_likelihood_trace: ll,
        component_trace,
        steps,
        diagnostics,
    })
}

/// Picks component `l` with probability `w_l`, then samples it. A
/// single-component mixture consumes no selection variate.
pub fn sample_mixture<F: Scalar, V: Variates + ?Sized>(
    model: &MixtureModel<F>,
    rng: &mut V,
) -> Vec<F> {
    let comp = if model.len() == 1 {
        &model.components[0]
    } else {
        let u: F = rng.unit();
        let mut acc = F::zero();
        let mut chosen = &model.components[model.len() - 1];
        for c in &model.components {
            acc = acc + c.weight;
            if u < acc {
                chosen = c;
                break;
            }
        }
        chosen
    };
    comp.params.sample(rng)
}
