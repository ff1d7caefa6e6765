//! Pipeline execution: initial state -> spin-zero projection -> VQE ->
//! optional translation/mirror symmetrization -> oracle analysis, with
//! reproducible CSV/JSON artifacts.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use spinprep_core::ansatz::{
    build_all_to_all_ansatz, build_nearest_neighbor_ansatz, build_symmetry_tied_ansatz,
    AnsatzProgram,
};
use spinprep_core::models::{
    coherent_product_state, heisenberg_hamiltonian, neel_state, neutrino_hamiltonian,
    sample_momenta, RNG_ALGORITHM,
};
use spinprep_core::oracle::{full_spectrum, sector_census, SpectrumAnalysis};
use spinprep_core::qstate::expectation;
use spinprep_core::symmetry::{
    project_spin_zero, symmetrize_translations_mirrors, SymmetryGroupSpec,
};
use spinprep_core::vqe::{minimize, GradientMode, OptimizerSettings};
use spinprep_core::{SpinHamiltonian, Statevector};

use crate::config::{ExperimentConfig, GradientKind, ModelKind, StrategyKind};

/// Pipeline stages that can be toggled through `--stages`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Init,
    Project,
    Vqe,
    Symmetrize,
}

impl Stage {
    pub fn parse_list(list: &str) -> Result<BTreeSet<Stage>> {
        let mut stages = BTreeSet::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let stage = match name {
                "init" => Stage::Init,
                "project" => Stage::Project,
                "vqe" => Stage::Vqe,
                "symmetrize" => Stage::Symmetrize,
                other => bail!("unknown stage '{other}' (expected init, project, vqe, symmetrize)"),
            };
            stages.insert(stage);
        }
        Ok(stages)
    }

    pub fn all() -> BTreeSet<Stage> {
        [Stage::Init, Stage::Project, Stage::Vqe, Stage::Symmetrize]
            .into_iter()
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub energy: f64,
    pub ground_fidelity: f64,
    /// Survival probability for projection-type stages.
    pub probability: Option<f64>,
    pub wall_ms: f64,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub rng_algorithm: String,
    pub model: String,
    pub n_qubits: usize,
    pub reference_energy: f64,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<String>,
    pub config: ExperimentConfig,
}

fn write_file(dir: &Path, name: &str, contents: &str, artifacts: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    artifacts.push(name.to_string());
    Ok(())
}

fn f12(x: f64) -> String {
    format!("{x:.11e}")
}

fn build_program(config: &ExperimentConfig, n: usize) -> Result<AnsatzProgram> {
    let seed = config.seed.unwrap_or(0);
    let program = match config.ansatz.strategy {
        StrategyKind::SymmetryTied => {
            let lattice = config
                .lattice()
                .context("ansatz.strategy: symmetry-tied requires a lattice")?;
            build_symmetry_tied_ansatz(&lattice, config.ansatz.layers, config.ansatz.tie)?
        }
        StrategyKind::NearestNeighbor => {
            let lattice = config
                .lattice()
                .context("ansatz.strategy: nearest-neighbor requires a lattice")?;
            build_nearest_neighbor_ansatz(&lattice, seed, config.ansatz.layers)?
        }
        StrategyKind::AllToAll => {
            let gates = config.ansatz.gates.unwrap_or(n * (n - 1) / 2);
            build_all_to_all_ansatz(n, seed, gates)?
        }
    };
    Ok(program)
}

fn optimizer_settings(config: &ExperimentConfig) -> OptimizerSettings {
    OptimizerSettings {
        tolerance: config.optimizer.tolerance,
        max_iterations: config.optimizer.max_iterations,
        fd_step: config.optimizer.fd_step,
        gradient: match config.optimizer.gradient {
            GradientKind::Analytic => GradientMode::Analytic,
            GradientKind::FiniteDifference => GradientMode::FiniteDifference,
        },
        seed: config.optimizer.seed,
        ..Default::default()
    }
}

struct FidelityTable {
    rows: String,
}

impl FidelityTable {
    fn new() -> Self {
        Self {
            rows: String::from("stage,index,eigenvalue,fidelity,spin\n"),
        }
    }

    fn record(
        &mut self,
        stage: &str,
        spectrum: &SpectrumAnalysis<f64>,
        state: &Statevector,
    ) -> Result<()> {
        for (k, point) in spectrum.fidelity_spectrum(state)?.iter().enumerate() {
            self.rows.push_str(&format!(
                "{stage},{k},{},{},{}\n",
                f12(point.eigenvalue),
                f12(point.fidelity),
                point.spin,
            ));
        }
        Ok(())
    }
}

/// Execute the configured pipeline and write manifest.json plus the enabled
/// CSV artifacts into `out_dir`.
pub fn run_pipeline(
    config: &ExperimentConfig,
    out_dir: &Path,
    stages: &BTreeSet<Stage>,
) -> Result<RunManifest> {
    let violations = config.validate();
    if !violations.is_empty() {
        bail!("invalid config:\n  {}", violations.join("\n  "));
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    // model and initial state
    let (hamiltonian, mut state): (SpinHamiltonian, Statevector) = match config.model {
        ModelKind::Heisenberg => {
            let lattice = config.lattice().expect("validated");
            let h = heisenberg_hamiltonian(&lattice)?;
            let state = neel_state(&lattice)?;
            (h, state)
        }
        ModelKind::Neutrino => {
            let n = config.neutrino.expect("validated").particles;
            let momenta = sample_momenta(n, config.seed.expect("validated"))?;
            let h = neutrino_hamiltonian(&momenta)?;
            let state = coherent_product_state(&momenta)?;
            (h, state)
        }
    };
    let n = hamiltonian.n_qubits();

    let oracle_start = Instant::now();
    let spectrum = full_spectrum(&hamiltonian).context("oracle analysis")?;
    println!(
        "oracle: ground energy {:.6} ({} states, {:.0} ms)",
        spectrum.ground_energy(),
        spectrum.len(),
        oracle_start.elapsed().as_secs_f64() * 1e3,
    );

    let mut records = Vec::new();
    let mut artifacts = Vec::new();
    let mut fidelity_table = FidelityTable::new();

    let t = Instant::now();
    let record_stage = |name: &str,
                            state: &Statevector,
                            probability: Option<f64>,
                            detail: Option<String>,
                            started: Instant,
                            table: &mut FidelityTable|
     -> Result<StageRecord> {
        let energy = expectation(state, &hamiltonian)?;
        let ground_fidelity = spectrum.ground_fidelity(state)?;
        if config.output.emit_fidelity_spectrum {
            table.record(name, &spectrum, state)?;
        }
        let record = StageRecord {
            name: name.to_string(),
            energy,
            ground_fidelity,
            probability,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            detail,
        };
        println!(
            "stage {name}: energy {energy:.6}, ground fidelity {ground_fidelity:.6}{}",
            probability
                .map(|p| format!(", probability {p:.6}"))
                .unwrap_or_default()
        );
        Ok(record)
    };

    records.push(record_stage(
        "initial",
        &state,
        None,
        None,
        t,
        &mut fidelity_table,
    )?);

    if stages.contains(&Stage::Project) && config.projection_iterations > 0 {
        let t = Instant::now();
        let report = project_spin_zero(&mut state, config.projection_iterations, &hamiltonian)
            .context("projection stage")?;
        if config.output.emit_projection {
            write_file(out_dir, "projection.csv", &report.to_csv(), &mut artifacts)?;
        }
        records.push(record_stage(
            "projection",
            &state,
            Some(report.cumulative_probability()),
            Some(format!("{} iterations", config.projection_iterations)),
            t,
            &mut fidelity_table,
        )?);
    }

    if stages.contains(&Stage::Vqe) {
        let t = Instant::now();
        let program = build_program(config, n)?;
        if config.output.emit_trace {
            let program_json = serde_json::to_string_pretty(&program)?;
            write_file(out_dir, "ansatz.json", &program_json, &mut artifacts)?;
        }
        let settings = optimizer_settings(config);
        let result = minimize(&state, &program, &hamiltonian, &settings).context("vqe stage")?;
        if config.output.emit_trace {
            write_file(out_dir, "trace.csv", &result.trace.to_csv(), &mut artifacts)?;
        }
        state = result.state;
        records.push(record_stage(
            "vqe",
            &state,
            None,
            Some(format!(
                "{} accepted iterations, {:?}",
                result.trace.points.len() - 1,
                result.trace.termination
            )),
            t,
            &mut fidelity_table,
        )?);
    }

    if stages.contains(&Stage::Symmetrize)
        && config.output.symmetrize
        && config.model == ModelKind::Heisenberg
    {
        let t = Instant::now();
        let lattice = config.lattice().expect("validated");
        let spec = SymmetryGroupSpec::new(lattice)?;
        let probability =
            symmetrize_translations_mirrors(&mut state, &spec).context("symmetrization stage")?;
        records.push(record_stage(
            "symmetrization",
            &state,
            Some(probability),
            None,
            t,
            &mut fidelity_table,
        )?);
    }

    records.push(StageRecord {
        name: "reference".to_string(),
        energy: spectrum.ground_energy(),
        ground_fidelity: 1.0,
        probability: None,
        wall_ms: 0.0,
        detail: Some("oracle ground state".to_string()),
    });

    if config.output.emit_fidelity_spectrum {
        write_file(
            out_dir,
            "fidelity_spectrum.csv",
            &fidelity_table.rows,
            &mut artifacts,
        )?;
    }

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        model: hamiltonian.label().to_string(),
        n_qubits: n,
        reference_energy: spectrum.ground_energy(),
        stages: records,
        artifacts: artifacts.clone(),
        config: config.clone(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(out_dir.join("manifest.json"), manifest_json)
        .with_context(|| format!("writing {}", out_dir.join("manifest.json").display()))?;
    Ok(manifest)
}

/// Sector census of the configured lattice, written to census.json.
pub fn run_census(config: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    if config.model != ModelKind::Heisenberg {
        bail!("model: census requires the heisenberg model");
    }
    let violations = config.validate();
    if !violations.is_empty() {
        bail!("invalid config:\n  {}", violations.join("\n  "));
    }
    let lattice = config.lattice().expect("validated");
    let census = sector_census::<f64>(&lattice).context("sector census")?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("census.json");
    std::fs::write(&path, serde_json::to_string_pretty(&census)?)
        .with_context(|| format!("writing {}", path.display()))?;
    println!(
        "census: dimensions ({}, {}, {}, {}), ground {:.6}",
        census.full.dimension,
        census.jz_zero.dimension,
        census.j_zero.dimension,
        census.symmetric.dimension,
        census.full.lowest,
    );
    Ok(())
}

#[derive(Serialize)]
pub struct SweepSummary {
    pub version: String,
    pub rng_algorithm: String,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunManifest>,
}

/// Independent pipelines over a seed list, in parallel. Worker count comes
/// from SPINPREP_WORKERS (default: available parallelism, capped by the
/// seed count).
pub fn run_sweep(
    config: &ExperimentConfig,
    out_dir: &Path,
    stages: &BTreeSet<Stage>,
) -> Result<SweepSummary> {
    let seeds = config.sweep_seeds();
    if seeds.is_empty() {
        bail!("sweep.seeds: empty seed list");
    }
    let workers = std::env::var("SPINPREP_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .clamp(1, seeds.len());

    std::fs::create_dir_all(out_dir)?;
    let jobs = std::sync::Mutex::new(seeds.clone().into_iter().collect::<Vec<_>>());
    let results = std::sync::Mutex::new(Vec::<(u64, Result<RunManifest>)>::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let seed = match jobs.lock().unwrap().pop() {
                    Some(seed) => seed,
                    None => break,
                };
                let mut run_config = config.clone();
                run_config.seed = Some(seed);
                let seed_dir: PathBuf = out_dir.join(format!("seed-{seed}"));
                let outcome = run_pipeline(&run_config, &seed_dir, stages);
                results.lock().unwrap().push((seed, outcome));
            });
        }
    });

    let mut outcomes = results.into_inner().unwrap();
    outcomes.sort_by_key(|(seed, _)| seeds.iter().position(|s| s == seed));
    let mut runs = Vec::new();
    for (seed, outcome) in outcomes {
        runs.push(outcome.with_context(|| format!("sweep seed {seed}"))?);
    }
    let summary = SweepSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        seeds,
        runs,
    };
    std::fs::write(
        out_dir.join("sweep_summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}
