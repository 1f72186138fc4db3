//! Builds the system a config describes, runs it and checks the invariants on
//! the data it produced.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use lel_core::classical::{apply_kick, classical_free_flow, classical_reduce, xi_beta_coordinates};
use lel_core::linalg::{self, CMatrix};
use lel_core::reduction::{entropy_trace_with, TraceRow};
use lel_core::states::{appendix_a_state, pure_to_density};
use lel_core::{
    sampling, DensityMatrix, Hamiltonian, KickShape, MomentumBasis, PhaseSpaceDensity,
    PhaseSpaceGrid,
};

use crate::config::{
    ConfigErrors, ExperimentConfig, FieldError, InitialState, KickConfig, KickShapeConfig,
    LatticeConfig, PotentialConfig,
};

pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const PURITY_TOL: f64 = 1e-10;
pub const ENTROPY_TOL: f64 = 1e-9;
pub const MASS_TOL: f64 = 1e-6;
pub const MARGINAL_TOL: f64 = 1e-6;
pub const XI_TOL: f64 = 1e-12;

pub const CLASSICAL_ENTROPY_DEFINITION: &str =
    "differential entropy of the p-marginal, -sum_j m_j ln(m_j / dp)";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n{0}")]
    Config(ConfigErrors),
    #[error("dimension cap exceeded: {0}")]
    DimensionCap(lel_core::Error),
    #[error("invariant checks failed: {}", .0.join(", "))]
    Invariant(Vec<String>),
    #[error(transparent)]
    Core(lel_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Invariant(_) => 3,
            HarnessError::DimensionCap(_) => 4,
            _ => 1,
        }
    }

    fn at(path: &str, e: lel_core::Error) -> Self {
        match e {
            lel_core::Error::BasisTooLarge { .. }
            | lel_core::Error::SuperoperatorTooLarge { .. } => HarnessError::DimensionCap(e),
            lel_core::Error::EigenFailure => HarnessError::Core(e),
            other => HarnessError::Config(ConfigErrors(vec![FieldError {
                path: path.into(),
                message: other.to_string(),
            }])),
        }
    }
}

impl From<lel_core::Error> for HarnessError {
    fn from(e: lel_core::Error) -> Self {
        match e {
            lel_core::Error::BasisTooLarge { .. }
            | lel_core::Error::SuperoperatorTooLarge { .. } => HarnessError::DimensionCap(e),
            other => HarnessError::Core(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub time_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_s_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_s_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_tr_rho2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effectively_pure_start: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effectively_pure_end: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_s_classical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_s_classical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_classical_definition: Option<&'static str>,
    pub invariants: BTreeMap<String, bool>,
}

impl RunSummary {
    pub fn failed_invariants(&self) -> Vec<String> {
        self.invariants
            .iter()
            .filter(|(_, ok)| !**ok)
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.invariants.values().all(|ok| *ok)
    }
}

/// Result of a run before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub csv: Vec<u8>,
}

pub fn build_basis(lattice: &LatticeConfig) -> Result<MomentumBasis, HarnessError> {
    match lattice {
        LatticeConfig::Cubic(l) => MomentumBasis::cubic(l.half_width, l.delta_k),
        LatticeConfig::Line(l) => MomentumBasis::line(l.points, l.delta_k),
        LatticeConfig::PhaseSpace(_) => {
            return Err(config_error(
                "lattice",
                "a phase-space grid has no momentum basis",
            ))
        }
    }
    .map_err(|e| HarnessError::at("lattice", e))
}

fn config_error(path: &str, message: &str) -> HarnessError {
    HarnessError::Config(ConfigErrors(vec![FieldError {
        path: path.into(),
        message: message.into(),
    }]))
}

pub fn build_quantum_state(
    state: &InitialState,
    basis: &MomentumBasis,
) -> Result<DensityMatrix, HarnessError> {
    match state {
        InitialState::PureRandom { seed } => {
            let mut rng = sampling::rng(*seed);
            Ok(pure_to_density(&sampling::random_pure_state(
                &mut rng,
                basis.len(),
            )))
        }
        InitialState::AppendixA { mu, shells, seed } => {
            let path = "initial_state.appendix-a";
            let shells: Vec<usize> = shells
                .clone()
                .unwrap_or_else(|| (0..basis.num_shells()).collect());
            if let Some(&s) = shells.iter().find(|&&s| s >= basis.num_shells()) {
                return Err(config_error(
                    &format!("{path}.shells"),
                    &format!(
                        "shell {s} does not exist; the basis has {}",
                        basis.num_shells()
                    ),
                ));
            }
            let mut rng = sampling::rng(*seed);
            let vectors: Vec<_> = shells
                .iter()
                .map(|&s| sampling::random_shell_vector(&mut rng, basis, s))
                .collect();
            let k = vectors.len();
            let mu = match mu {
                Some(rows) => CMatrix::from_fn(k, k, |i, j| linalg::c(rows[i][j])),
                None => CMatrix::identity(k, k).unscale(k as f64),
            };
            appendix_a_state(basis, &vectors, &mu)
                .map_err(|e| HarnessError::at(&format!("{path}.mu"), e))
        }
        InitialState::ShellMixed { shell } => {
            if *shell >= basis.num_shells() {
                return Err(config_error(
                    "initial_state.shell-mixed.shell",
                    &format!(
                        "shell {shell} does not exist; the basis has {}",
                        basis.num_shells()
                    ),
                ));
            }
            DensityMatrix::maximally_mixed_on(basis.len(), basis.shells().members(*shell))
                .map_err(|e| HarnessError::at("initial_state.shell-mixed", e))
        }
        InitialState::SinglePRow { .. } => Err(config_error(
            "initial_state",
            "single-p-row is a classical state",
        )),
    }
}

/// Runs the experiment in memory.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let start = Instant::now();
    let mut out = match config.mode {
        crate::config::Mode::Quantum => run_quantum(config)?,
        crate::config::Mode::Classical => run_classical(config)?,
    };
    out.summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Runs the experiment and writes the CSV and JSON summary under `out_dir`.
/// Outputs are written even when an invariant fails; the failure is then
/// reported as [`HarnessError::Invariant`].
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, HarnessError> {
    let out = execute(config)?;
    let io = |context: String| move |source| HarnessError::Io { context, source };
    fs::create_dir_all(out_dir).map_err(io(format!("creating {}", out_dir.display())))?;
    let csv_path = out_dir.join(config.csv_path());
    let summary_path = out_dir.join(config.summary_path());
    for p in [&csv_path, &summary_path] {
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(io(format!("creating {}", parent.display())))?;
        }
    }
    fs::write(&csv_path, &out.csv).map_err(io(format!("writing {}", csv_path.display())))?;
    let mut json = serde_json::to_string_pretty(&out.summary)?;
    json.push('\n');
    fs::write(&summary_path, json).map_err(io(format!("writing {}", summary_path.display())))?;
    let failed = out.summary.failed_invariants();
    if failed.is_empty() {
        Ok(out.summary)
    } else {
        Err(HarnessError::Invariant(failed))
    }
}

fn empty_summary(config: &ExperimentConfig, time_points: usize) -> RunSummary {
    RunSummary {
        config: config.clone(),
        seed: config.initial_state.seed(),
        wall_time_s: 0.0,
        time_points,
        initial_s_eff: None,
        final_s_eff: None,
        final_tr_rho2: None,
        effectively_pure_start: None,
        effectively_pure_end: None,
        initial_s_classical: None,
        final_s_classical: None,
        s_classical_definition: None,
        invariants: BTreeMap::new(),
    }
}

fn run_quantum(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let PotentialConfig::Yukawa(pot) = &config.potential else {
        return Err(config_error("potential", "quantum mode needs {A, mu}"));
    };
    let basis = build_basis(&config.lattice)?;
    let rho0 = build_quantum_state(&config.initial_state, &basis)?;
    let h = Hamiltonian::yukawa(&basis, pot.coupling, pot.mu)
        .map_err(|e| HarnessError::at("potential", e))?;
    let prop = h.propagator()?;
    let times = config.time_grid.points();
    let rows = entropy_trace_with(&rho0, &prop, &basis, &times)?;

    let csv = quantum_csv(&rows, basis.shells().energies())?;
    let first = &rows[0];
    let last = rows.last().expect("time grid has at least two points");
    let mut summary = empty_summary(config, rows.len());
    summary.initial_s_eff = Some(first.effective_entropy);
    summary.final_s_eff = Some(last.effective_entropy);
    summary.final_tr_rho2 = Some(last.purity);
    summary.effectively_pure_start = Some(first.effectively_pure);
    summary.effectively_pure_end = Some(last.effectively_pure);
    summary.invariants = quantum_invariants(
        &rows,
        pot.coupling,
        basis.shells().is_nondegenerate(),
        first.purity,
    );
    Ok(RunOutput { summary, csv })
}

/// Columns: `t,S_eff,S_global,tr_rho2,effectively_pure`, then `S_E_<energy>`
/// for every shell occupied at some grid time. A shell that is empty at a
/// given time leaves its cell blank.
pub fn quantum_csv(rows: &[TraceRow], energies: &[f64]) -> Result<Vec<u8>, HarnessError> {
    let occupied: Vec<usize> = (0..energies.len())
        .filter(|&s| rows.iter().any(|r| r.shell_entropies[s].is_some()))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["t", "S_eff", "S_global", "tr_rho2", "effectively_pure"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(occupied.iter().map(|&s| format!("S_E_{}", energies[s])));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.t.to_string(),
            r.effective_entropy.to_string(),
            r.global_entropy.to_string(),
            r.purity.to_string(),
            u8::from(r.effectively_pure).to_string(),
        ];
        rec.extend(occupied.iter().map(|&s| {
            r.shell_entropies[s]
                .map(|x| x.to_string())
                .unwrap_or_default()
        }));
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Csv(e.into_error().into()))
}

fn quantum_invariants(
    rows: &[TraceRow],
    coupling: f64,
    nondegenerate: bool,
    purity0: f64,
) -> BTreeMap<String, bool> {
    let mut m = BTreeMap::new();
    let all = |f: &dyn Fn(&TraceRow) -> bool| rows.iter().all(f);
    m.insert("trace".into(), all(&|r| (r.trace - 1.0).abs() <= TRACE_TOL));
    m.insert(
        "hermiticity".into(),
        all(&|r| r.hermitian_defect <= HERMITIAN_TOL),
    );
    m.insert("positivity".into(), all(&|r| r.min_eigenvalue >= -PSD_TOL));
    m.insert(
        "purity_conserved".into(),
        all(&|r| (r.purity - purity0).abs() <= PURITY_TOL),
    );
    m.insert(
        "shell_weights_sum".into(),
        all(&|r| (r.shell_weights.iter().sum::<f64>() - 1.0).abs() <= TRACE_TOL),
    );
    if coupling == 0.0 {
        let s0 = rows[0].effective_entropy;
        m.insert(
            "free_evolution_entropy_constant".into(),
            all(&|r| (r.effective_entropy - s0).abs() <= ENTROPY_TOL),
        );
    }
    if nondegenerate {
        m.insert(
            "nondegenerate_no_mixing".into(),
            all(&|r| r.effective_entropy <= ENTROPY_TOL && r.effectively_pure),
        );
    }
    if (purity0 - 1.0).abs() <= PURITY_TOL {
        m.insert(
            "pure_global_entropy_zero".into(),
            all(&|r| r.global_entropy <= ENTROPY_TOL),
        );
    }
    m
}

fn kick_shape(s: KickShapeConfig) -> KickShape {
    match s {
        KickShapeConfig::Cos => KickShape::Cos,
        KickShapeConfig::Sin => KickShape::Sin,
        KickShapeConfig::Linear => KickShape::Linear,
    }
}

struct ClassicalRow {
    t: f64,
    entropy: f64,
    mass: f64,
    min_value: f64,
    marginal_drift: f64,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn run_classical(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let LatticeConfig::PhaseSpace(l) = &config.lattice else {
        return Err(config_error(
            "lattice",
            "classical mode needs {nq, np, dq, dp}",
        ));
    };
    let PotentialConfig::Kick(KickConfig {
        kick_strength,
        kick_shape: shape,
        kick_time,
    }) = &config.potential
    else {
        return Err(config_error("potential", "classical mode needs a kick"));
    };
    let InitialState::SinglePRow { p0 } = &config.initial_state else {
        return Err(config_error(
            "initial_state",
            "classical mode needs single-p-row",
        ));
    };
    let grid =
        PhaseSpaceGrid::new(l.nq, l.np, l.dq, l.dp).map_err(|e| HarnessError::at("lattice", e))?;
    let rho0 = PhaseSpaceDensity::single_p_row(grid, *p0, |_| 1.0)
        .map_err(|e| HarnessError::at("initial_state.single-p-row", e))?;
    let t_kick = kick_time.unwrap_or(config.time_grid.t_max / 2.0);
    let kicked = apply_kick(
        &classical_free_flow(&rho0, t_kick),
        kick_shape(*shape),
        *kick_strength,
    );

    let before = classical_reduce(&rho0).masses;
    let after = classical_reduce(&kicked).masses;
    let kick_mass = kicked.mass();
    let times = config.time_grid.points();
    let rows: Vec<ClassicalRow> = times
        .par_iter()
        .map(|&t| {
            let (rho, reference) = if t < t_kick {
                (classical_free_flow(&rho0, t), &before)
            } else {
                (classical_free_flow(&kicked, t - t_kick), &after)
            };
            let marginal = classical_reduce(&rho);
            ClassicalRow {
                t,
                entropy: marginal.entropy(),
                mass: rho.mass(),
                min_value: rho.values().iter().copied().fold(f64::INFINITY, f64::min),
                marginal_drift: max_abs_diff(&marginal.masses, reference),
            }
        })
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "S_classical", "mass"])?;
    for r in &rows {
        w.write_record([r.t.to_string(), r.entropy.to_string(), r.mass.to_string()])?;
    }
    let csv = w
        .into_inner()
        .map_err(|e| HarnessError::Csv(e.into_error().into()))?;

    let mut summary = empty_summary(config, rows.len());
    summary.initial_s_classical = rows.first().map(|r| r.entropy);
    summary.final_s_classical = rows.last().map(|r| r.entropy);
    summary.s_classical_definition = Some(CLASSICAL_ENTROPY_DEFINITION);
    let m = &mut summary.invariants;
    m.insert(
        "mass_conserved".into(),
        (kick_mass - 1.0).abs() <= MASS_TOL
            && rows.iter().all(|r| (r.mass - 1.0).abs() <= MASS_TOL),
    );
    m.insert(
        "nonnegative".into(),
        rows.iter().all(|r| r.min_value >= 0.0),
    );
    m.insert(
        "free_flow_marginal_invariant".into(),
        rows.iter().all(|r| r.marginal_drift <= MARGINAL_TOL),
    );
    m.insert("xi_translation".into(), xi_translation_holds(&grid, &times));
    Ok(RunOutput { summary, csv })
}

/// `xi(q + 2pt, p) - xi(q, p) = t` at every grid point and grid time, to
/// `XI_TOL` relative to the size of `xi`.
fn xi_translation_holds(grid: &PhaseSpaceGrid, times: &[f64]) -> bool {
    let p_min = grid.p_min();
    (0..grid.np()).all(|j| {
        let p = grid.p(j);
        (0..grid.nq()).all(|i| {
            let q = grid.q(i);
            let Ok((xi0, _)) = xi_beta_coordinates(q, p, p_min) else {
                return false;
            };
            times
                .iter()
                .all(|&t| match xi_beta_coordinates(q + 2.0 * p * t, p, p_min) {
                    Ok((xi, beta)) => {
                        (xi - xi0 - t).abs() <= XI_TOL * xi.abs().max(1.0) && beta == p
                    }
                    Err(_) => false,
                })
        })
    })
}
