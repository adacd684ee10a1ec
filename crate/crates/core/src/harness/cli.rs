//! Command-line front end. `run` flags may also come from a flat TOML file
//! given with `--config`; flags on the command line win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use super::{
    default_dof, default_population, preset, selection_from_fraction, Arm, Case, ExperimentSpec,
    SpreadKind,
};
use crate::engine::{Algorithm, BoundsPolicy, EdaConfig};
use crate::error::{EdaError, Result};
use crate::mixture::EmNormalizer;
use crate::objectives::FunctionId;

#[derive(Debug, Parser)]
#[command(
    name = "eda",
    version,
    about = "Estimation of distribution algorithms with Student's t models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run seeded batches and write traces, summaries and scores.
    Run(RunArgs),
    /// Write unit-variance normal and t densities on [-6, 6].
    Density(DensityArgs),
    /// List the benchmark functions.
    Catalog,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunArgs {
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Repeatable; defaults to all four algorithms.
    #[arg(long = "algorithm")]
    #[serde(default, alias = "algorithm", deserialize_with = "one_or_many")]
    pub algorithms: Vec<String>,
    /// Population size N.
    #[arg(long)]
    pub pop: Option<usize>,
    /// M = round(select-frac · N).
    #[arg(long)]
    pub select_frac: Option<f64>,
    /// Repeatable; each value adds one arm per t algorithm.
    #[arg(long = "dof")]
    #[serde(default, alias = "dof", deserialize_with = "one_or_many")]
    pub dofs: Vec<f64>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub weight_floor: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub em_iters: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub allow_large: bool,
    #[arg(long, value_parser = ["resample", "clamp"])]
    pub bounds_policy: Option<String>,
    #[arg(long, value_parser = ["standard", "as-printed"])]
    pub em_normalizer: Option<String>,
    #[arg(long, value_parser = ["stddev", "stderr"])]
    pub spread: Option<String>,
    /// Flat TOML file with the same keys as the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    /// Repeatable; every value must exceed 2.
    #[arg(long = "dof", required = true)]
    pub dofs: Vec<f64>,
    #[arg(long, default_value = "density.csv")]
    pub out: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Parsed and validated command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Run(ExperimentSpec),
    Density { dofs: Vec<f64>, out: PathBuf },
    Catalog,
}

impl RunArgs {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| EdaError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| {
            EdaError::Usage(format!("config file {}: {}", path.display(), e.message()))
        })
    }

    /// Fields set on `self` win over `file`.
    pub fn merged_over(self, file: RunArgs) -> RunArgs {
        RunArgs {
            function: self.function.or(file.function),
            dim: self.dim.or(file.dim),
            algorithms: if self.algorithms.is_empty() {
                file.algorithms
            } else {
                self.algorithms
            },
            pop: self.pop.or(file.pop),
            select_frac: self.select_frac.or(file.select_frac),
            dofs: if self.dofs.is_empty() {
                file.dofs
            } else {
                self.dofs
            },
            components: self.components.or(file.components),
            weight_floor: self.weight_floor.or(file.weight_floor),
            iters: self.iters.or(file.iters),
            em_iters: self.em_iters.or(file.em_iters),
            runs: self.runs.or(file.runs),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            preset: self.preset.or(file.preset),
            allow_large: self.allow_large || file.allow_large,
            bounds_policy: self.bounds_policy.or(file.bounds_policy),
            em_normalizer: self.em_normalizer.or(file.em_normalizer),
            spread: self.spread.or(file.spread),
            config: self.config,
        }
    }

    fn apply_overrides(&self, cfg: &mut EdaConfig<f64>, dim: usize) -> Result<()> {
        if let Some(n) = self.pop {
            cfg.population_size = n;
            cfg.selection_size = selection_from_fraction(n, 0.2);
        }
        if self.pop.is_none() && dim > 0 {
            cfg.population_size = default_population(dim);
            cfg.selection_size = selection_from_fraction(cfg.population_size, 0.2);
        }
        if let Some(frac) = self.select_frac {
            if !(frac > 0.0 && frac < 1.0) {
                return Err(EdaError::Usage(format!(
                    "--select-frac {frac} must lie in (0, 1)"
                )));
            }
            cfg.selection_size = selection_from_fraction(cfg.population_size, frac);
        }
        if let Some(l) = self.components {
            cfg.initial_components = l;
        }
        if let Some(w) = self.weight_floor {
            cfg.weight_floor = w;
        }
        if let Some(k) = self.iters {
            cfg.max_iterations = k;
        }
        if let Some(k) = self.em_iters {
            cfg.em_iterations = k;
        }
        if let Some(p) = &self.bounds_policy {
            cfg.bounds_policy = p.parse::<BoundsPolicy>()?;
        }
        if let Some(n) = &self.em_normalizer {
            cfg.em_normalizer = match n.as_str() {
                "standard" => EmNormalizer::Standard,
                "as-printed" => EmNormalizer::AsPrinted,
                other => return Err(EdaError::Usage(format!("unknown EM normalizer `{other}`"))),
            };
        }
        Ok(())
    }

    fn spread_kind(&self) -> Result<SpreadKind> {
        match self.spread.as_deref() {
            None | Some("stddev") => Ok(SpreadKind::Stddev),
            Some("stderr") => Ok(SpreadKind::Stderr),
            Some(other) => Err(EdaError::Usage(format!("unknown spread `{other}`"))),
        }
    }

    fn arms(&self, function: FunctionId, dim: usize) -> Result<Vec<Arm>> {
        let algorithms = if self.algorithms.is_empty() {
            Algorithm::ALL.to_vec()
        } else {
            self.algorithms
                .iter()
                .map(|a| a.parse())
                .collect::<Result<Vec<Algorithm>>>()?
        };
        let dofs = if self.dofs.is_empty() {
            vec![default_dof(function)]
        } else {
            self.dofs.clone()
        };
        let mut arms = Vec::new();
        for alg in algorithms {
            let per_dof: &[f64] = if alg.family() == crate::mixture::Family::StudentT {
                &dofs
            } else {
                &dofs[..1]
            };
            for &v in per_dof {
                let mut cfg = EdaConfig {
                    dof: v,
                    ..EdaConfig::new(alg)
                };
                self.apply_overrides(&mut cfg, dim)?;
                let label = if alg.family() == crate::mixture::Family::StudentT && dofs.len() > 1 {
                    format!("{}-v{v}", alg.name())
                } else {
                    alg.name().to_string()
                };
                if arms.iter().any(|a: &Arm| a.label == label) {
                    return Err(EdaError::Usage(format!(
                        "algorithm arm `{label}` given twice"
                    )));
                }
                arms.push(Arm { label, config: cfg });
            }
        }
        Ok(arms)
    }

    /// Builds and validates the experiment.
    pub fn into_spec(self) -> Result<ExperimentSpec> {
        let args = match &self.config {
            Some(path) => {
                let file = RunArgs::from_toml_file(path)?;
                self.merged_over(file)
            }
            None => self,
        };
        let mut spec = match &args.preset {
            Some(name) => {
                let mut spec = preset(name, args.allow_large)?;
                for case in &mut spec.cases {
                    for arm in &mut case.arms {
                        // dim 0: keep the preset's per-dimension N unless --pop is given
                        args.apply_overrides(&mut arm.config, 0)?;
                    }
                }
                spec
            }
            None => {
                let name = args.function.as_deref().ok_or_else(|| {
                    EdaError::Usage("--function is required unless --preset is given".into())
                })?;
                let function: FunctionId = name.parse()?;
                let dim = args.dim.unwrap_or(2);
                let supported = function.harness_dimensions();
                if !supported.contains(&dim) {
                    return Err(EdaError::UnsupportedDimension {
                        name: function.name().to_string(),
                        dim,
                        supported: supported.to_vec(),
                    });
                }
                if dim >= 10 && !args.allow_large {
                    return Err(EdaError::Usage(format!(
                        "{}D runs use N = {} per iteration; pass --allow-large to run them",
                        dim,
                        default_population(dim)
                    )));
                }
                ExperimentSpec {
                    cases: vec![Case {
                        function,
                        dimension: dim,
                        arms: args.arms(function, dim)?,
                    }],
                    run_count: 30,
                    base_seed: 1,
                    out_dir: None,
                    preset: None,
                    spread: SpreadKind::Stddev,
                }
            }
        };
        if let Some(r) = args.runs {
            spec.run_count = r;
        }
        if let Some(s) = args.seed {
            spec.base_seed = s;
        }
        spec.out_dir = args.out.clone();
        spec.spread = args.spread_kind()?;
        spec.validate()?;
        Ok(spec)
    }
}

fn usage(e: clap::Error) -> EdaError {
    EdaError::Usage(e.render().to_string().trim_end().to_string())
}

impl Cli {
    pub fn into_command(self) -> Result<Command> {
        match self.command {
            CliCommand::Run(args) => Ok(Command::Run(args.into_spec()?)),
            CliCommand::Density(d) => {
                super::density_table(&d.dofs)?;
                Ok(Command::Density {
                    dofs: d.dofs,
                    out: d.out,
                })
            }
            CliCommand::Catalog => Ok(Command::Catalog),
        }
    }
}

/// Parses a full argument vector (program name first) into a validated
/// command. Help and version requests come back as `Usage` errors carrying
/// the rendered text.
pub fn parse_cli<I, T>(args: I) -> Result<Command>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args).map_err(usage)?.into_command()
}
