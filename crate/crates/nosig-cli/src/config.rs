//! Scenario files: TOML with complex numbers as two-element [re, im]
//! arrays. Unknown keys are rejected so typos fail loudly. The exact
//! field names are documented in docs/scenario-schema.md.

use serde::{Deserialize, Serialize};

use nosig::dynamics::EvolutionSpec;
use nosig::ensemble::{DensityMatrix, Ensemble};
use nosig::hilbert::{C64, CMatrix, CVector};

use crate::CliError;

pub type ComplexEntry = [f64; 2];
pub type VectorEntries = Vec<ComplexEntry>;
pub type MatrixEntries = Vec<Vec<ComplexEntry>>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub hilbert_dim: usize,
    pub seed: u64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub ensembles: Vec<EnsembleConfig>,
    pub density: Option<DensityConfig>,
    pub evolution: Option<EvolutionConfig>,
    pub audit: Option<AuditConfig>,
}

fn default_times() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub label: Option<String>,
    /// Unnormalized state vectors (squared norm = probability), unless
    /// `weights` is present, in which case these are unit vectors.
    pub states: Vec<VectorEntries>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    /// Row-major matrix entries.
    pub matrix: MatrixEntries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionKind {
    Unitary,
    Weinberg,
    FigureThree,
    Lindblad,
    Jump,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub kind: EvolutionKind,
    pub hamiltonian: Option<MatrixEntries>,
    /// Weinberg coupling g.
    pub strength: Option<f64>,
    pub ops: Option<Vec<MatrixEntries>>,
    pub dt: Option<f64>,
    pub trajectories: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default = "default_n_decomp")]
    pub n_decomp: usize,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Defaults to 1e-8 for deterministic dynamics, 5/√N for stochastic.
    pub threshold: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_lambdas")]
    pub linearity_lambdas: Vec<f64>,
    #[serde(default = "default_linearity_tolerance")]
    pub linearity_tolerance: f64,
    /// Two unit vectors whose projectors are mixed in the linearity
    /// audit; defaults to the top two spectral eigenvectors of ρ₀.
    pub linearity_states: Option<Vec<VectorEntries>>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            n_decomp: default_n_decomp(),
            sizes: default_sizes(),
            threshold: None,
            trials: default_trials(),
            linearity_lambdas: default_lambdas(),
            linearity_tolerance: default_linearity_tolerance(),
            linearity_states: None,
        }
    }
}

fn default_n_decomp() -> usize {
    8
}

fn default_sizes() -> Vec<usize> {
    vec![2, 3, 4]
}

fn default_trials() -> usize {
    10_000
}

fn default_lambdas() -> Vec<f64> {
    (1..10).map(|k| k as f64 / 10.0).collect()
}

fn default_linearity_tolerance() -> f64 {
    1e-8
}

pub fn load(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ScenarioConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("bad scenario file: {e}")))?;
    if config.hilbert_dim == 0 || config.hilbert_dim > 64 {
        return Err(CliError::Config(format!(
            "hilbert_dim must be in 1..=64, got {}",
            config.hilbert_dim
        )));
    }
    Ok(config)
}

pub fn parse_vector(entries: &VectorEntries, dim: usize) -> Result<CVector, CliError> {
    if entries.len() != dim {
        return Err(CliError::Config(format!(
            "vector has {} components, expected {dim}",
            entries.len()
        )));
    }
    Ok(CVector::new(
        entries.iter().map(|&[re, im]| C64::new(re, im)).collect(),
    ))
}

pub fn parse_matrix(entries: &MatrixEntries, dim: usize) -> Result<CMatrix, CliError> {
    if entries.len() != dim || entries.iter().any(|row| row.len() != dim) {
        return Err(CliError::Config(format!(
            "matrix must be {dim}x{dim} rows of [re, im] pairs"
        )));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (i, row) in entries.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m.set(i, j, C64::new(re, im));
        }
    }
    Ok(m)
}

pub fn build_ensemble(cfg: &EnsembleConfig, dim: usize) -> Result<Ensemble, CliError> {
    let vectors = cfg
        .states
        .iter()
        .map(|s| parse_vector(s, dim))
        .collect::<Result<Vec<_>, _>>()?;
    let result = match &cfg.weights {
        Some(weights) => {
            if weights.len() != vectors.len() {
                return Err(CliError::Config(format!(
                    "{} weights for {} states",
                    weights.len(),
                    vectors.len()
                )));
            }
            Ensemble::from_normalized(weights.iter().copied().zip(vectors).collect())
        }
        None => Ensemble::from_unnormalized(vectors),
    };
    result.map_err(|e| CliError::Config(format!("invalid ensemble: {e}")))
}

pub fn build_density(cfg: &DensityConfig, dim: usize) -> Result<DensityMatrix, CliError> {
    let m = parse_matrix(&cfg.matrix, dim)?;
    DensityMatrix::new(m).map_err(|e| CliError::Config(format!("invalid density matrix: {e}")))
}

pub fn build_evolution(cfg: &EvolutionConfig, dim: usize) -> Result<EvolutionSpec, CliError> {
    let need_h = || -> Result<CMatrix, CliError> {
        let entries = cfg
            .hamiltonian
            .as_ref()
            .ok_or_else(|| CliError::Config("evolution.hamiltonian is required".into()))?;
        parse_matrix(entries, dim)
    };
    let need_ops = || -> Result<Vec<CMatrix>, CliError> {
        let ops = cfg
            .ops
            .as_ref()
            .ok_or_else(|| CliError::Config("evolution.ops is required".into()))?;
        ops.iter().map(|m| parse_matrix(m, dim)).collect()
    };
    let need_dt = || -> Result<f64, CliError> {
        let dt = cfg
            .dt
            .ok_or_else(|| CliError::Config("evolution.dt is required".into()))?;
        if dt <= 0.0 {
            return Err(CliError::Config(format!("evolution.dt must be positive, got {dt}")));
        }
        Ok(dt)
    };

    let spec = match cfg.kind {
        EvolutionKind::Unitary => EvolutionSpec::Unitary { hamiltonian: need_h()? },
        EvolutionKind::Weinberg => EvolutionSpec::NonlinearWeinberg {
            strength: cfg
                .strength
                .ok_or_else(|| CliError::Config("evolution.strength is required".into()))?,
        },
        EvolutionKind::FigureThree => EvolutionSpec::FigureThreeTable,
        EvolutionKind::Lindblad => EvolutionSpec::LindbladMaster {
            hamiltonian: need_h()?,
            ops: need_ops()?,
            dt: need_dt()?,
        },
        EvolutionKind::Jump => {
            let trajectories = cfg
                .trajectories
                .ok_or_else(|| CliError::Config("evolution.trajectories is required".into()))?;
            if trajectories == 0 {
                return Err(CliError::Config("evolution.trajectories must be at least 1".into()));
            }
            EvolutionSpec::JumpUnraveling {
                hamiltonian: need_h()?,
                ops: need_ops()?,
                dt: need_dt()?,
                trajectories,
            }
        }
    };
    spec.validate(dim)
        .map_err(|e| CliError::Config(format!("invalid evolution spec: {e}")))?;
    Ok(spec)
}

/// Serialization helper for the evolve-command round trip.
pub fn vector_entries(v: &CVector) -> VectorEntries {
    v.entries().iter().map(|c| [c.re, c.im]).collect()
}
