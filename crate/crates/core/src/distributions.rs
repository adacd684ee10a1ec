//! Single elliptical sampling models: the multivariate Gaussian and the
//! multivariate Student's t.
//!
//! A t draw is produced as a Gaussian scale mixture: `τ ~ Gamma(v/2, rate v/2)`
//! (mean one) and `x ~ N(μ, Σ/τ)`. The `τ` is handed back with the point so a
//! selection step can reuse it in the closed-form weighted ML update.

use rand::Rng;

use crate::error::{EdaError, Result};
use crate::linalg::{factor_or_regularize, regularized_factor, Cholesky, SymMatrix};
use crate::scalar::Scalar;

/// Source of the three kinds of variates the samplers consume.
///
/// Any [`Rng`] serves all three from one stream. [`SplitStreams`] sends the
/// gamma draws to a second stream so a t sampler consumes its Gaussian
/// variates in lockstep with a Gaussian sampler fed from the same seed.
pub trait Variates {
    fn normal<F: Scalar>(&mut self) -> F;
    fn unit<F: Scalar>(&mut self) -> F;
    fn gamma<F: Scalar>(&mut self, shape: F, rate: F) -> F;
}

impl<R: Rng + ?Sized> Variates for R {
    fn normal<F: Scalar>(&mut self) -> F {
        F::standard_normal(self)
    }

    fn unit<F: Scalar>(&mut self) -> F {
        F::unit(self)
    }

    fn gamma<F: Scalar>(&mut self, shape: F, rate: F) -> F {
        F::sample_gamma(shape, rate, self)
    }
}

/// Normals and uniforms from `main`, gamma scales from `scale`.
#[derive(Clone, Debug)]
pub struct SplitStreams<R> {
    pub main: R,
    pub scale: R,
}

impl<R: Rng> Variates for SplitStreams<R> {
    fn normal<F: Scalar>(&mut self) -> F {
        F::standard_normal(&mut self.main)
    }

    fn unit<F: Scalar>(&mut self) -> F {
        F::unit(&mut self.main)
    }

    fn gamma<F: Scalar>(&mut self, shape: F, rate: F) -> F {
        F::sample_gamma(shape, rate, &mut self.scale)
    }
}

/// Location, scale matrix and degrees of freedom of an elliptical model.
/// `dof = ∞` is the Gaussian.
///
/// The Cholesky factor of the scale is computed once at construction and
/// shared by sampling, Mahalanobis distances and the log-determinant.
#[derive(Clone, Debug)]
pub struct EllipticalParams<F> {
    mean: Vec<F>,
    scale: SymMatrix<F>,
    dof: F,
    chol: Cholesky<F>,
}

impl<F: Scalar> PartialEq for EllipticalParams<F> {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.scale == other.scale && self.dof == other.dof
    }
}

/// A t draw together with the gamma variable that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledDraw<F> {
    pub point: Vec<F>,
    pub gamma_scale: F,
}

impl<F: Scalar> EllipticalParams<F> {
    /// Validates and factors a user-supplied scale matrix. A ridge is added
    /// only if the matrix does not factor as given.
    pub fn new(mean: Vec<F>, scale: SymMatrix<F>, dof: F) -> Result<Self> {
        Self::check(&mean, &scale, dof)?;
        if !scale.is_symmetric(F::lit(1e-12)) {
            return Err(EdaError::degenerate("scale matrix is not symmetric"));
        }
        let (scale, chol) = factor_or_regularize(&scale)?;
        Ok(Self {
            mean,
            scale,
            dof,
            chol,
        })
    }

    pub fn gaussian(mean: Vec<F>, scale: SymMatrix<F>) -> Result<Self> {
        Self::new(mean, scale, F::infinity())
    }

    pub fn student_t(mean: Vec<F>, scale: SymMatrix<F>, dof: F) -> Result<Self> {
        if !dof.is_finite() {
            return Err(EdaError::config(
                "Student's t needs finite degrees of freedom",
            ));
        }
        Self::new(mean, scale, dof)
    }

    /// Builds from an estimated scatter matrix, always applying the jitter
    /// ridge before factoring.
    pub fn from_estimate(mean: Vec<F>, scatter: SymMatrix<F>, dof: F) -> Result<Self> {
        Self::check(&mean, &scatter, dof)?;
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(EdaError::degenerate("estimated mean is not finite"));
        }
        let (scale, chol) = regularized_factor(&scatter)?;
        Ok(Self {
            mean,
            scale,
            dof,
            chol,
        })
    }

    fn check(mean: &[F], scale: &SymMatrix<F>, dof: F) -> Result<()> {
        if mean.is_empty() {
            return Err(EdaError::config("mean vector is empty"));
        }
        if mean.len() != scale.dim() {
            return Err(EdaError::DimensionMismatch {
                expected: mean.len(),
                got: scale.dim(),
            });
        }
        if !(dof > F::zero()) {
            return Err(EdaError::config(format!(
                "degrees of freedom must be positive, got {dof}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[F] {
        &self.mean
    }

    pub fn scale(&self) -> &SymMatrix<F> {
        &self.scale
    }

    pub fn dof(&self) -> F {
        self.dof
    }

    pub fn is_gaussian(&self) -> bool {
        self.dof.is_infinite()
    }

    pub fn cholesky(&self) -> &Cholesky<F> {
        &self.chol
    }

    /// `(x-μ)ᵀ Σ⁻¹ (x-μ)`
    pub fn mahalanobis_sq(&self, x: &[F]) -> Result<F> {
        if x.len() != self.dim() {
            return Err(EdaError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(EdaError::degenerate("non-finite point"));
        }
        let diff: Vec<F> = x.iter().zip(&self.mean).map(|(&a, &b)| a - b).collect();
        Ok(self.chol.quad_form_inv(&diff))
    }

    pub fn gaussian_log_density(&self, x: &[F]) -> Result<F> {
        if !self.is_gaussian() {
            return Err(EdaError::config("gaussian density requested for a t model"));
        }
        let m = self.mahalanobis_sq(x)?;
        Ok(self.gaussian_log_density_from(m))
    }

    fn gaussian_log_density_from(&self, mahalanobis: F) -> F {
        let half = F::lit(0.5);
        let d = F::from_usize_lossy(self.dim());
        -half * (d * F::TAU().ln() + self.chol.log_det() + mahalanobis)
    }

    pub fn student_t_log_density(&self, x: &[F]) -> Result<F> {
        if self.is_gaussian() {
            return Err(EdaError::config("t density requested for a gaussian model"));
        }
        let m = self.mahalanobis_sq(x)?;
        Ok(self.student_t_log_density_from(m))
    }

    fn student_t_log_density_from(&self, mahalanobis: F) -> F {
        let half = F::lit(0.5);
        let v = self.dof;
        let d = F::from_usize_lossy(self.dim());
        (half * (v + d)).log_gamma()
            - (half * v).log_gamma()
            - half * d * (v * F::PI()).ln()
            - half * self.chol.log_det()
            - half * (v + d) * (mahalanobis / v).ln_1p()
    }

    /// Log density of whichever family `dof` selects.
    pub fn log_density(&self, x: &[F]) -> Result<F> {
        let m = self.mahalanobis_sq(x)?;
        Ok(if self.is_gaussian() {
            self.gaussian_log_density_from(m)
        } else {
            self.student_t_log_density_from(m)
        })
    }

    fn standard_normal_vec<V: Variates + ?Sized>(&self, rng: &mut V) -> Vec<F> {
        (0..self.dim()).map(|_| rng.normal()).collect()
    }

    /// `μ + L z` with `z ~ N(0, I)`.
    pub fn sample_gaussian<V: Variates + ?Sized>(&self, rng: &mut V) -> Vec<F> {
        let z = self.standard_normal_vec(rng);
        let lz = self.chol.mul_lower(&z);
        self.mean.iter().zip(lz).map(|(&m, v)| m + v).collect()
    }

    /// Draws `z` first, then `τ`, then returns `μ + L z / √τ`.
    pub fn sample_student_t<V: Variates + ?Sized>(&self, rng: &mut V) -> ScaledDraw<F> {
        let z = self.standard_normal_vec(rng);
        let half_v = F::lit(0.5) * self.dof;
        let mut tau: F = rng.gamma(half_v, half_v);
        // Gamma samplers can return exact zero for tiny shapes
        if !(tau > F::zero()) {
            tau = F::min_positive_value();
        }
        let inv = tau.sqrt().recip();
        let lz = self.chol.mul_lower(&z);
        let point = self
            .mean
            .iter()
            .zip(lz)
            .map(|(&m, v)| m + v * inv)
            .collect();
        ScaledDraw {
            point,
            gamma_scale: tau,
        }
    }

    /// Draws from the model's own family; `τ` is dropped for t models.
    pub fn sample<V: Variates + ?Sized>(&self, rng: &mut V) -> Vec<F> {
        if self.is_gaussian() {
            self.sample_gaussian(rng)
        } else {
            self.sample_student_t(rng).point
        }
    }
}

/// `(x-μ)ᵀ Σ⁻¹ (x-μ)` for a bare scale matrix.
pub fn mahalanobis_sq<F: Scalar>(x: &[F], mean: &[F], scale: &SymMatrix<F>) -> Result<F> {
    if mean.len() != scale.dim() || x.len() != mean.len() {
        return Err(EdaError::DimensionMismatch {
            expected: scale.dim(),
            got: if x.len() != scale.dim() {
                x.len()
            } else {
                mean.len()
            },
        });
    }
    if x.iter().chain(mean).any(|v| !v.is_finite()) {
        return Err(EdaError::degenerate("non-finite point or mean"));
    }
    let (_, chol) = factor_or_regularize(scale)?;
    let diff: Vec<F> = x.iter().zip(mean).map(|(&a, &b)| a - b).collect();
    Ok(chol.quad_form_inv(&diff))
}

fn check_samples<F: Scalar, S: AsRef<[F]>>(samples: &[S], needed: usize) -> Result<usize> {
    if samples.len() < needed {
        return Err(EdaError::InsufficientData {
            needed,
            got: samples.len(),
        });
    }
    let d = samples[0].as_ref().len();
    if d == 0 {
        return Err(EdaError::config("samples have zero dimension"));
    }
    for s in samples {
        let s = s.as_ref();
        if s.len() != d {
            return Err(EdaError::DimensionMismatch {
                expected: d,
                got: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(EdaError::degenerate("sample has non-finite entries"));
        }
    }
    Ok(d)
}

/// Sample mean and unbiased (`M - 1`) scatter of the selected points.
pub fn fit_gaussian_ml<F: Scalar, S: AsRef<[F]>>(samples: &[S]) -> Result<EllipticalParams<F>> {
    let d = check_samples(samples, 2)?;
    let m = F::from_usize_lossy(samples.len());
    let mut mean = vec![F::zero(); d];
    for s in samples {
        for (acc, &v) in mean.iter_mut().zip(s.as_ref()) {
            *acc = *acc + v;
        }
    }
    for v in &mut mean {
        *v = *v / m;
    }
    let mut scatter = SymMatrix::zeros(d);
    let mut diff = vec![F::zero(); d];
    for s in samples {
        for ((t, &x), &mu) in diff.iter_mut().zip(s.as_ref()).zip(&mean) {
            *t = x - mu;
        }
        scatter.add_outer(F::one(), &diff);
    }
    scatter.scale((m - F::one()).recip());
    EllipticalParams::from_estimate(mean, scatter, F::infinity())
}

/// τ-weighted mean and scatter; the denominator of both is `Σ τ`. The
/// degrees of freedom are fixed and passed through.
pub fn fit_student_t_ml_weighted<F: Scalar, S: AsRef<[F]>>(
    points: &[S],
    gamma_scales: &[F],
    dof: F,
) -> Result<EllipticalParams<F>> {
    let d = check_samples(points, 1)?;
    if gamma_scales.len() != points.len() {
        return Err(EdaError::DimensionMismatch {
            expected: points.len(),
            got: gamma_scales.len(),
        });
    }
    if gamma_scales
        .iter()
        .any(|t| !t.is_finite() || *t < F::zero())
    {
        return Err(EdaError::degenerate(
            "gamma scales must be finite and non-negative",
        ));
    }
    let total: F = gamma_scales.iter().copied().sum();
    if !(total > F::zero()) || !total.is_finite() {
        return Err(EdaError::degenerate("gamma scales sum to zero"));
    }
    let mut mean = vec![F::zero(); d];
    for (s, &t) in points.iter().zip(gamma_scales) {
        for (acc, &v) in mean.iter_mut().zip(s.as_ref()) {
            *acc = *acc + t * v;
        }
    }
    for v in &mut mean {
        *v = *v / total;
    }
    let mut scatter = SymMatrix::zeros(d);
    let mut diff = vec![F::zero(); d];
    for (s, &t) in points.iter().zip(gamma_scales) {
        for ((o, &x), &mu) in diff.iter_mut().zip(s.as_ref()).zip(&mean) {
            *o = x - mu;
        }
        scatter.add_outer(t, &diff);
    }
    scatter.scale(total.recip());
    EllipticalParams::from_estimate(mean, scatter, dof)
}

pub fn fit_student_t_ml<F: Scalar>(draws: &[ScaledDraw<F>], dof: F) -> Result<EllipticalParams<F>> {
    let points: Vec<&[F]> = draws.iter().map(|d| d.point.as_slice()).collect();
    let taus: Vec<F> = draws.iter().map(|d| d.gamma_scale).collect();
    fit_student_t_ml_weighted(&points, &taus, dof)
}
