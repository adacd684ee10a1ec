//! Benchmark objective functions for box-constrained minimization.
//!
//! Each function is a pure map from a point to a scalar. Functions that are
//! only defined on the plane (Easom, Eggholder, ...) carry a fixed dimension
//! of two; the rest accept any `d >= 1` (Rosenbrock needs `d >= 2`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EdaError, Result};
use crate::scalar::Scalar;

/// Identifier of one of the seventeen benchmark functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionId {
    Ackley,
    DeJong5,
    Easom,
    Rastrigin,
    Michalewicz,
    Levy13,
    CrossInTray,
    DropWave,
    Eggholder,
    Griewank,
    HolderTable,
    Levy,
    Schaffer2,
    Schwefel,
    Shubert,
    Perm0dBeta,
    Rosenbrock,
}

impl FunctionId {
    pub const ALL: [FunctionId; 17] = [
        FunctionId::Ackley,
        FunctionId::DeJong5,
        FunctionId::Easom,
        FunctionId::Rastrigin,
        FunctionId::Michalewicz,
        FunctionId::Levy13,
        FunctionId::CrossInTray,
        FunctionId::DropWave,
        FunctionId::Eggholder,
        FunctionId::Griewank,
        FunctionId::HolderTable,
        FunctionId::Levy,
        FunctionId::Schaffer2,
        FunctionId::Schwefel,
        FunctionId::Shubert,
        FunctionId::Perm0dBeta,
        FunctionId::Rosenbrock,
    ];

    /// Lowercase CLI identifier.
    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Ackley => "ackley",
            FunctionId::DeJong5 => "dejong5",
            FunctionId::Easom => "easom",
            FunctionId::Rastrigin => "rastrigin",
            FunctionId::Michalewicz => "michalewicz",
            FunctionId::Levy13 => "levy13",
            FunctionId::CrossInTray => "crossintray",
            FunctionId::DropWave => "dropwave",
            FunctionId::Eggholder => "eggholder",
            FunctionId::Griewank => "griewank",
            FunctionId::HolderTable => "holdertable",
            FunctionId::Levy => "levy",
            FunctionId::Schaffer2 => "schaffer2",
            FunctionId::Schwefel => "schwefel",
            FunctionId::Shubert => "shubert",
            FunctionId::Perm0dBeta => "perm0db",
            FunctionId::Rosenbrock => "rosenbrock",
        }
    }

    /// Whether the formula is only defined for `d = 2`.
    pub fn is_planar(self) -> bool {
        matches!(
            self,
            FunctionId::DeJong5
                | FunctionId::Easom
                | FunctionId::Levy13
                | FunctionId::CrossInTray
                | FunctionId::DropWave
                | FunctionId::Eggholder
                | FunctionId::HolderTable
                | FunctionId::Schaffer2
                | FunctionId::Shubert
        )
    }

    /// Dimensions offered by the experiment harness.
    pub fn harness_dimensions(self) -> &'static [usize] {
        match self {
            FunctionId::Rastrigin | FunctionId::Michalewicz => &[2, 5, 10],
            _ => &[2],
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = EdaError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        FunctionId::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| EdaError::UnknownFunction(s.to_string()))
    }
}

/// One catalog entry: CLI name and the dimensions the harness runs it in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub id: FunctionId,
    pub name: &'static str,
    pub dimensions: &'static [usize],
}

pub fn catalog() -> Vec<CatalogEntry> {
    FunctionId::ALL
        .into_iter()
        .map(|id| CatalogEntry {
            id,
            name: id.name(),
            dimensions: id.harness_dimensions(),
        })
        .collect()
}

pub const DEFAULT_PERM_BETA: f64 = 10.0;
const MICHALEWICZ_M: i32 = 10;

/// A benchmark function instantiated at a dimension, with its search box
/// and documented optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkFunction {
    pub id: FunctionId,
    pub dimension: usize,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub known_min_value: f64,
    pub known_min_points: Vec<Vec<f64>>,
    /// β of the Perm 0,d,β function; unused elsewhere.
    pub perm_beta: f64,
}

impl BenchmarkFunction {
    pub fn new(id: FunctionId, dimension: usize) -> Result<Self> {
        if dimension == 0
            || (id.is_planar() && dimension != 2)
            || (id == FunctionId::Rosenbrock && dimension < 2)
        {
            let supported = if id.is_planar() { vec![2] } else { vec![] };
            return Err(EdaError::UnsupportedDimension {
                name: id.name().to_string(),
                dim: dimension,
                supported,
            });
        }
        let d = dimension;
        let cube = |lo: f64, hi: f64| (vec![lo; d], vec![hi; d]);
        let (lower_bounds, upper_bounds) = match id {
            FunctionId::Ackley => cube(-32.768, 32.768),
            FunctionId::DeJong5 => cube(-65.536, 65.536),
            FunctionId::Easom | FunctionId::Schaffer2 => cube(-100.0, 100.0),
            FunctionId::Rastrigin | FunctionId::DropWave => cube(-5.12, 5.12),
            FunctionId::Michalewicz => cube(0.0, std::f64::consts::PI),
            FunctionId::Levy13
            | FunctionId::CrossInTray
            | FunctionId::HolderTable
            | FunctionId::Levy
            | FunctionId::Shubert => cube(-10.0, 10.0),
            FunctionId::Eggholder => cube(-512.0, 512.0),
            FunctionId::Griewank => cube(-600.0, 600.0),
            FunctionId::Schwefel => cube(-500.0, 500.0),
            FunctionId::Perm0dBeta => cube(-(d as f64), d as f64),
            FunctionId::Rosenbrock => cube(-5.0, 10.0),
        };
        let pi = std::f64::consts::PI;
        let (known_min_value, known_min_points) = match id {
            FunctionId::Ackley | FunctionId::Rastrigin | FunctionId::Griewank => {
                (0.0, vec![vec![0.0; d]])
            }
            FunctionId::DeJong5 => (1.0, vec![]),
            FunctionId::Easom => (-1.0, vec![vec![pi, pi]]),
            FunctionId::Michalewicz => match d {
                2 => (-1.8013, vec![vec![2.20, 1.57]]),
                5 => (-4.687658, vec![]),
                10 => (-9.66015, vec![]),
                _ => (f64::NEG_INFINITY, vec![]),
            },
            FunctionId::Levy13 | FunctionId::Levy | FunctionId::Rosenbrock => {
                (0.0, vec![vec![1.0; d]])
            }
            FunctionId::CrossInTray => {
                let a = 1.3491;
                (
                    -2.06261,
                    vec![vec![a, -a], vec![a, a], vec![-a, a], vec![-a, -a]],
                )
            }
            FunctionId::DropWave => (-1.0, vec![vec![0.0, 0.0]]),
            FunctionId::Eggholder => (-959.6407, vec![vec![512.0, 404.2319]]),
            FunctionId::HolderTable => {
                let (a, b) = (8.05502, 9.66459);
                (
                    -19.2085,
                    vec![vec![a, b], vec![a, -b], vec![-a, b], vec![-a, -b]],
                )
            }
            FunctionId::Schaffer2 => (0.0, vec![vec![0.0, 0.0]]),
            FunctionId::Schwefel => (0.0, vec![vec![420.9687; d]]),
            FunctionId::Shubert => (-186.7309, vec![]),
            FunctionId::Perm0dBeta => (0.0, vec![(1..=d).map(|j| 1.0 / j as f64).collect()]),
        };
        Ok(Self {
            id,
            dimension,
            lower_bounds,
            upper_bounds,
            known_min_value,
            known_min_points,
            perm_beta: DEFAULT_PERM_BETA,
        })
    }

    /// Looks up by CLI name.
    pub fn by_name(name: &str, dimension: usize) -> Result<Self> {
        Self::new(name.parse()?, dimension)
    }

    pub fn with_perm_beta(mut self, beta: f64) -> Self {
        self.perm_beta = beta;
        self
    }

    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    pub fn bounds<F: Scalar>(&self) -> (Vec<F>, Vec<F>) {
        (
            self.lower_bounds.iter().map(|&v| F::lit(v)).collect(),
            self.upper_bounds.iter().map(|&v| F::lit(v)).collect(),
        )
    }

    pub fn known_optimum(&self) -> (f64, &[Vec<f64>]) {
        (self.known_min_value, &self.known_min_points)
    }

    pub fn contains<F: Scalar>(&self, x: &[F]) -> bool {
        x.len() == self.dimension
            && x.iter()
                .zip(self.lower_bounds.iter().zip(&self.upper_bounds))
                .all(|(&v, (&lo, &hi))| v >= F::lit(lo) && v <= F::lit(hi))
    }

    /// Evaluates the objective. Points outside the box are still evaluated.
    pub fn evaluate<F: Scalar>(&self, x: &[F]) -> Result<F> {
        if x.len() != self.dimension {
            return Err(EdaError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(match self.id {
            FunctionId::Ackley => ackley(x),
            FunctionId::DeJong5 => dejong5(x),
            FunctionId::Easom => easom(x),
            FunctionId::Rastrigin => rastrigin(x),
            FunctionId::Michalewicz => michalewicz(x),
            FunctionId::Levy13 => levy13(x),
            FunctionId::CrossInTray => cross_in_tray(x),
            FunctionId::DropWave => drop_wave(x),
            FunctionId::Eggholder => eggholder(x),
            FunctionId::Griewank => griewank(x),
            FunctionId::HolderTable => holder_table(x),
            FunctionId::Levy => levy(x),
            FunctionId::Schaffer2 => schaffer2(x),
            FunctionId::Schwefel => schwefel(x),
            FunctionId::Shubert => shubert(x),
            FunctionId::Perm0dBeta => perm0db(x, F::lit(self.perm_beta)),
            FunctionId::Rosenbrock => rosenbrock(x),
        })
    }
}

fn c<F: Scalar>(v: f64) -> F {
    F::lit(v)
}

fn ackley<F: Scalar>(x: &[F]) -> F {
    let (a, b, cc) = (c::<F>(20.0), c::<F>(0.2), F::TAU());
    let d = F::from_usize_lossy(x.len());
    let sq = x.iter().map(|&v| v * v).sum::<F>() / d;
    let cs = x.iter().map(|&v| (cc * v).cos()).sum::<F>() / d;
    -a * (-b * sq.sqrt()).exp() - cs.exp() + a + F::E()
}

fn dejong5<F: Scalar>(x: &[F]) -> F {
    const GRID: [f64; 5] = [-32.0, -16.0, 0.0, 16.0, 32.0];
    let mut s = c::<F>(0.002);
    for i in 0..25 {
        let a1 = c::<F>(GRID[i % 5]);
        let a2 = c::<F>(GRID[i / 5]);
        let denom = F::from_usize_lossy(i + 1) + (x[0] - a1).powi(6) + (x[1] - a2).powi(6);
        s = s + denom.recip();
    }
    s.recip()
}

fn easom<F: Scalar>(x: &[F]) -> F {
    let pi = F::PI();
    -(x[0].cos() * x[1].cos()) * (-(x[0] - pi).powi(2) - (x[1] - pi).powi(2)).exp()
}

fn rastrigin<F: Scalar>(x: &[F]) -> F {
    let ten = c::<F>(10.0);
    let tau = F::TAU();
    ten * F::from_usize_lossy(x.len()) + x.iter().map(|&v| v * v - ten * (tau * v).cos()).sum::<F>()
}

fn michalewicz<F: Scalar>(x: &[F]) -> F {
    let pi = F::PI();
    -x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let inner = F::from_usize_lossy(i + 1) * v * v / pi;
            v.sin() * inner.sin().powi(2 * MICHALEWICZ_M)
        })
        .sum::<F>()
}

fn levy13<F: Scalar>(x: &[F]) -> F {
    let pi = F::PI();
    let one = F::one();
    let (x1, x2) = (x[0], x[1]);
    (c::<F>(3.0) * pi * x1).sin().powi(2)
        + (x1 - one).powi(2) * (one + (c::<F>(3.0) * pi * x2).sin().powi(2))
        + (x2 - one).powi(2) * (one + (c::<F>(2.0) * pi * x2).sin().powi(2))
}

fn cross_in_tray<F: Scalar>(x: &[F]) -> F {
    // ln(|g| + 1) as logaddexp(ln|g|, 0); |g| reaches e^100 and overflows f32
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let ln_g = (x[0].sin() * x[1].sin()).abs().ln() + (c::<F>(100.0) - r / F::PI()).abs();
    let ln_g1 = ln_g.max(F::zero()) + (-ln_g.abs()).exp().ln_1p();
    -c::<F>(0.0001) * (c::<F>(0.1) * ln_g1).exp()
}

fn drop_wave<F: Scalar>(x: &[F]) -> F {
    let r2 = x[0] * x[0] + x[1] * x[1];
    -(F::one() + (c::<F>(12.0) * r2.sqrt()).cos()) / (c::<F>(0.5) * r2 + c(2.0))
}

fn eggholder<F: Scalar>(x: &[F]) -> F {
    let (x1, x2) = (x[0], x[1]);
    let k = c::<F>(47.0);
    -(x2 + k) * (x2 + x1 / c(2.0) + k).abs().sqrt().sin() - x1 * (x1 - (x2 + k)).abs().sqrt().sin()
}

fn griewank<F: Scalar>(x: &[F]) -> F {
    let s = x.iter().map(|&v| v * v).sum::<F>() / c(4000.0);
    let p = x
        .iter()
        .enumerate()
        .map(|(i, &v)| (v / F::from_usize_lossy(i + 1).sqrt()).cos())
        .fold(F::one(), |acc, t| acc * t);
    s - p + F::one()
}

fn holder_table<F: Scalar>(x: &[F]) -> F {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    -(x[0].sin() * x[1].cos() * (F::one() - r / F::PI()).abs().exp()).abs()
}

fn levy<F: Scalar>(x: &[F]) -> F {
    let pi = F::PI();
    let one = F::one();
    let w: Vec<F> = x.iter().map(|&v| one + (v - one) / c(4.0)).collect();
    let last = w[w.len() - 1];
    let mut s = (pi * w[0]).sin().powi(2);
    for &wi in &w[..w.len() - 1] {
        s = s + (wi - one).powi(2) * (one + c::<F>(10.0) * (pi * wi + one).sin().powi(2));
    }
    s + (last - one).powi(2) * (one + (c::<F>(2.0) * pi * last).sin().powi(2))
}

fn schaffer2<F: Scalar>(x: &[F]) -> F {
    let (a, b) = (x[0] * x[0], x[1] * x[1]);
    let half = c::<F>(0.5);
    half + ((a - b).sin().powi(2) - half) / (F::one() + c::<F>(0.001) * (a + b)).powi(2)
}

fn schwefel<F: Scalar>(x: &[F]) -> F {
    c::<F>(418.9829) * F::from_usize_lossy(x.len())
        - x.iter().map(|&v| v * v.abs().sqrt().sin()).sum::<F>()
}

fn shubert<F: Scalar>(x: &[F]) -> F {
    let term = |v: F| -> F {
        (1..=5)
            .map(|i| {
                let fi = F::from_usize_lossy(i);
                fi * ((fi + F::one()) * v + fi).cos()
            })
            .sum()
    };
    term(x[0]) * term(x[1])
}

fn perm0db<F: Scalar>(x: &[F], beta: F) -> F {
    let d = x.len();
    (1..=d)
        .map(|i| {
            let inner: F = (1..=d)
                .map(|j| {
                    let fj = F::from_usize_lossy(j);
                    (fj + beta) * (x[j - 1].powi(i as i32) - fj.powi(i as i32).recip())
                })
                .sum();
            inner * inner
        })
        .sum()
}

fn rosenbrock<F: Scalar>(x: &[F]) -> F {
    x.windows(2)
        .map(|w| c::<F>(100.0) * (w[1] - w[0] * w[0]).powi(2) + (w[0] - F::one()).powi(2))
        .sum()
}
