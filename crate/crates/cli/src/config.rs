//! Experiment configuration: a single TOML file, echoed verbatim into the
//! run manifest.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use spinprep_core::models::Lattice2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Heisenberg,
    Neutrino,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    NearestNeighbor,
    AllToAll,
    SymmetryTied,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "default_true")]
    pub periodic: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutrinoConfig {
    pub particles: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub strategy: StrategyKind,
    /// Layer stacks: repeats for symmetry-tied, sweep layers for
    /// nearest-neighbor.
    #[serde(default = "default_layers")]
    pub layers: usize,
    /// Gate count for the all-to-all strategy; defaults to one sweep over
    /// all pairs.
    #[serde(default)]
    pub gates: Option<usize>,
    /// Share one parameter per displacement class (symmetry-tied only).
    /// Off by default: the per-gate form is what converges to the reference
    /// energies.
    #[serde(default)]
    pub tie: bool,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::SymmetryTied,
            layers: default_layers(),
            gates: None,
            tie: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientKind {
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_gradient")]
    pub gradient: GradientKind,
    #[serde(default)]
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            fd_step: default_fd_step(),
            gradient: default_gradient(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub emit_trace: bool,
    #[serde(default = "default_true")]
    pub emit_projection: bool,
    #[serde(default = "default_true")]
    pub emit_fidelity_spectrum: bool,
    #[serde(default = "default_true")]
    pub emit_census: bool,
    /// Translation/mirror projection after VQE (lattice model only).
    #[serde(default = "default_true")]
    pub symmetrize: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            emit_trace: true,
            emit_projection: true,
            emit_fidelity_spectrum: true,
            emit_census: true,
            symmetrize: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_sweep_count")]
    pub count: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seeds: None,
            count: default_sweep_count(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_projection_iterations")]
    pub projection_iterations: usize,
    #[serde(default)]
    pub lattice: Option<LatticeConfig>,
    #[serde(default)]
    pub neutrino: Option<NeutrinoConfig>,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_true() -> bool {
    true
}
fn default_layers() -> usize {
    2
}
fn default_max_iterations() -> usize {
    2000
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_fd_step() -> f64 {
    1e-6
}
fn default_gradient() -> GradientKind {
    GradientKind::Analytic
}
fn default_projection_iterations() -> usize {
    11
}
fn default_sweep_count() -> usize {
    4
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))?;
        Ok(config)
    }

    /// Every violated invariant, one message per field, without executing
    /// anything.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        match self.model {
            ModelKind::Heisenberg => {
                match &self.lattice {
                    None => violations.push("lattice: required for the heisenberg model".into()),
                    Some(l) => {
                        if l.nx < 2 || l.ny < 2 {
                            violations.push(format!(
                                "lattice: degenerate {}x{} (both extents must be at least 2)",
                                l.nx, l.ny
                            ));
                        }
                        if (l.nx * l.ny) % 2 != 0 {
                            violations.push(format!(
                                "lattice: odd site count {} cannot host a J_z = 0 state",
                                l.nx * l.ny
                            ));
                        }
                        if !l.periodic
                            && matches!(
                                self.ansatz.strategy,
                                StrategyKind::SymmetryTied | StrategyKind::NearestNeighbor
                            )
                        {
                            violations.push(
                                "lattice: periodic boundaries required by the chosen ansatz strategy"
                                    .into(),
                            );
                        }
                        if !l.periodic && self.output.symmetrize {
                            violations.push(
                                "output.symmetrize: requires a periodic lattice".into(),
                            );
                        }
                    }
                }
                if matches!(
                    self.ansatz.strategy,
                    StrategyKind::NearestNeighbor | StrategyKind::AllToAll
                ) && self.seed.is_none()
                {
                    violations
                        .push("seed: required, the chosen ansatz strategy draws a random gate order".into());
                }
            }
            ModelKind::Neutrino => {
                match &self.neutrino {
                    None => violations.push("neutrino: required for the neutrino model".into()),
                    Some(n) => {
                        if n.particles < 2 {
                            violations
                                .push(format!("neutrino.particles: {} is below 2", n.particles));
                        }
                        if n.particles % 2 != 0 {
                            violations.push(format!(
                                "neutrino.particles: odd count {} cannot host a J_z = 0 state",
                                n.particles
                            ));
                        }
                    }
                }
                if self.seed.is_none() {
                    violations.push("seed: required, the neutrino couplings are sampled".into());
                }
                if matches!(
                    self.ansatz.strategy,
                    StrategyKind::SymmetryTied | StrategyKind::NearestNeighbor
                ) {
                    violations.push(format!(
                        "ansatz.strategy: {:?} requires a lattice; the neutrino model has none",
                        self.ansatz.strategy
                    ));
                }
            }
        }
        if self.ansatz.layers == 0 {
            violations.push("ansatz.layers: must be at least 1".into());
        }
        if self.optimizer.tolerance <= 0.0 {
            violations.push("optimizer.tolerance: must be positive".into());
        }
        if self.optimizer.fd_step <= 0.0 {
            violations.push("optimizer.fd_step: must be positive".into());
        }
        violations
    }

    pub fn lattice(&self) -> Option<Lattice2D> {
        self.lattice
            .as_ref()
            .map(|l| Lattice2D::new(l.nx, l.ny, l.periodic))
    }

    /// Seeds for the sweep subcommand: an explicit list, or `count`
    /// consecutive seeds from the base seed.
    pub fn sweep_seeds(&self) -> Vec<u64> {
        let sweep = self.sweep.clone().unwrap_or_default();
        if let Some(seeds) = sweep.seeds {
            return seeds;
        }
        let base = self.seed.unwrap_or(1);
        (0..sweep.count as u64).map(|k| base + k).collect()
    }
}
