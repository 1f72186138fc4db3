//! Strict JSON experiment configuration.
//!
//! Unknown keys anywhere are errors. Validation collects every problem it can
//! find and reports each one with a dotted field path.

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubicLattice {
    #[serde(rename = "M")]
    pub half_width: u32,
    pub delta_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineLattice {
    #[serde(rename = "N")]
    pub points: u32,
    pub delta_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceLattice {
    pub nq: usize,
    pub np: usize,
    pub dq: f64,
    pub dp: f64,
}

/// Chosen by which keys are present: `M`, `N` or `nq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeConfig {
    Cubic(CubicLattice),
    Line(LineLattice),
    PhaseSpace(PhaseSpaceLattice),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YukawaConfig {
    #[serde(rename = "A")]
    pub coupling: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickShapeConfig {
    Cos,
    Sin,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    pub kick_strength: f64,
    pub kick_shape: KickShapeConfig,
    /// Defaults to half of `time_grid.t_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kick_time: Option<f64>,
}

/// Chosen by which keys are present: `A`/`mu` or `kick_*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialConfig {
    Yukawa(YukawaConfig),
    Kick(KickConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    PureRandom {
        seed: u64,
    },
    AppendixA {
        /// Real symmetric mixing matrix over the chosen shells. Defaults to
        /// the uniform diagonal.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<Vec<Vec<f64>>>,
        /// Shell indices, one random unit vector each. Defaults to all.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shells: Option<Vec<usize>>,
        seed: u64,
    },
    ShellMixed {
        shell: usize,
    },
    SinglePRow {
        p0: f64,
    },
}

impl InitialState {
    pub fn seed(&self) -> Option<u64> {
        match self {
            InitialState::PureRandom { seed } | InitialState::AppendixA { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            InitialState::PureRandom { .. } => "pure-random",
            InitialState::AppendixA { .. } => "appendix-a",
            InitialState::ShellMixed { .. } => "shell-mixed",
            InitialState::SinglePRow { .. } => "single-p-row",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// `steps + 1` evenly spaced points from 0 to `t_max`.
    pub fn points(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|k| self.t_max * k as f64 / self.steps as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

pub const DEFAULT_CSV: &str = "trace.csv";
pub const DEFAULT_SUMMARY: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub lattice: LatticeConfig,
    pub potential: PotentialConfig,
    pub initial_state: InitialState,
    pub time_grid: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Outputs>,
}

impl ExperimentConfig {
    pub fn csv_path(&self) -> PathBuf {
        self.outputs
            .as_ref()
            .and_then(|o| o.csv.clone())
            .unwrap_or_else(|| DEFAULT_CSV.into())
    }

    pub fn summary_path(&self) -> PathBuf {
        self.outputs
            .as_ref()
            .and_then(|o| o.summary.clone())
            .unwrap_or_else(|| DEFAULT_SUMMARY.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl ConfigErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const REQUIRED: [&str; 5] = ["mode", "lattice", "potential", "initial_state", "time_grid"];
const OPTIONAL: [&str; 1] = ["outputs"];

#[derive(Default)]
struct Collector(Vec<FieldError>);

impl Collector {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn section<T: DeserializeOwned>(&mut self, prefix: &str, value: &Value) -> Option<T> {
        match serde_path_to_error::deserialize::<_, T>(value.clone()) {
            Ok(v) => Some(v),
            Err(e) => {
                let inner = e.path().to_string();
                let path = if inner == "." || inner.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{prefix}.{inner}")
                };
                self.push(path, e.into_inner().to_string());
                None
            }
        }
    }

    fn finite(&mut self, path: &str, x: f64) -> bool {
        if x.is_finite() {
            true
        } else {
            self.push(path, format!("must be finite, got {x}"));
            false
        }
    }

    fn positive(&mut self, path: &str, x: f64) {
        if self.finite(path, x) && x <= 0.0 {
            self.push(path, format!("must be positive, got {x}"));
        }
    }
}

fn object_keys(v: &Value) -> Option<&Map<String, Value>> {
    v.as_object()
}

fn parse_lattice(c: &mut Collector, v: &Value) -> Option<LatticeConfig> {
    let Some(obj) = object_keys(v) else {
        c.push("lattice", "expected an object");
        return None;
    };
    if obj.contains_key("M") {
        c.section("lattice", v).map(LatticeConfig::Cubic)
    } else if obj.contains_key("N") {
        c.section("lattice", v).map(LatticeConfig::Line)
    } else if obj.contains_key("nq") || obj.contains_key("np") {
        c.section("lattice", v).map(LatticeConfig::PhaseSpace)
    } else {
        c.push(
            "lattice",
            "expected {M, delta_k}, {N, delta_k} or {nq, np, dq, dp}",
        );
        None
    }
}

fn parse_potential(c: &mut Collector, v: &Value) -> Option<PotentialConfig> {
    let Some(obj) = object_keys(v) else {
        c.push("potential", "expected an object");
        return None;
    };
    if obj.contains_key("A") || obj.contains_key("mu") {
        c.section("potential", v).map(PotentialConfig::Yukawa)
    } else if obj.keys().any(|k| k.starts_with("kick_")) {
        c.section("potential", v).map(PotentialConfig::Kick)
    } else {
        c.push(
            "potential",
            "expected {A, mu} or {kick_strength, kick_shape[, kick_time]}",
        );
        None
    }
}

fn parse_initial_state(c: &mut Collector, v: &Value) -> Option<InitialState> {
    match object_keys(v) {
        Some(obj) if obj.len() == 1 => c.section("initial_state", v),
        Some(obj) if obj.len() > 1 => {
            c.push("initial_state", "exactly one initial state is allowed");
            None
        }
        _ => {
            c.push(
                "initial_state",
                "expected one of pure-random, appendix-a, shell-mixed, single-p-row",
            );
            None
        }
    }
}

fn check_semantics(c: &mut Collector, cfg: &ExperimentConfig) {
    match &cfg.lattice {
        LatticeConfig::Cubic(l) => c.positive("lattice.delta_k", l.delta_k),
        LatticeConfig::Line(l) => {
            c.positive("lattice.delta_k", l.delta_k);
            if l.points == 0 {
                c.push("lattice.N", "must be at least 1");
            }
        }
        LatticeConfig::PhaseSpace(l) => {
            c.positive("lattice.dq", l.dq);
            c.positive("lattice.dp", l.dp);
            if l.nq == 0 {
                c.push("lattice.nq", "must be at least 1");
            }
            if l.np == 0 || l.np % 2 != 0 {
                c.push(
                    "lattice.np",
                    format!("must be even and positive, got {}", l.np),
                );
            }
        }
    }
    match &cfg.potential {
        PotentialConfig::Yukawa(p) => {
            c.finite("potential.A", p.coupling);
            c.positive("potential.mu", p.mu);
        }
        PotentialConfig::Kick(p) => {
            c.finite("potential.kick_strength", p.kick_strength);
            if let Some(t) = p.kick_time {
                if c.finite("potential.kick_time", t) && !(0.0..=cfg.time_grid.t_max).contains(&t) {
                    c.push(
                        "potential.kick_time",
                        format!("must lie in [0, t_max], got {t}"),
                    );
                }
            }
        }
    }
    match &cfg.initial_state {
        InitialState::AppendixA {
            mu: Some(mu),
            shells,
            ..
        } => {
            let n = mu.len();
            if n == 0 || mu.iter().any(|r| r.len() != n) {
                c.push(
                    "initial_state.appendix-a.mu",
                    "must be a nonempty square matrix",
                );
            } else if mu.iter().flatten().any(|x| !x.is_finite()) {
                c.push("initial_state.appendix-a.mu", "entries must be finite");
            } else if let Some(s) = shells {
                if s.len() != n {
                    c.push(
                        "initial_state.appendix-a.shells",
                        format!("has {} entries but mu is {n}x{n}", s.len()),
                    );
                }
            }
        }
        InitialState::SinglePRow { p0 } => {
            c.finite("initial_state.single-p-row.p0", *p0);
        }
        _ => {}
    }
    if c.finite("time_grid.t_max", cfg.time_grid.t_max) && cfg.time_grid.t_max < 0.0 {
        c.push("time_grid.t_max", "must be nonnegative");
    }
    if cfg.time_grid.steps == 0 {
        c.push("time_grid.steps", "must be at least 1");
    }

    let quantum_lattice = matches!(
        cfg.lattice,
        LatticeConfig::Cubic(_) | LatticeConfig::Line(_)
    );
    let quantum_state = !matches!(cfg.initial_state, InitialState::SinglePRow { .. });
    let yukawa = matches!(cfg.potential, PotentialConfig::Yukawa(_));
    let expect = cfg.mode == Mode::Quantum;
    for (path, ok) in [
        ("lattice", quantum_lattice == expect),
        ("potential", yukawa == expect),
        ("initial_state", quantum_state == expect),
    ] {
        if !ok {
            let what = match path {
                "initial_state" => cfg.initial_state.tag().to_string(),
                _ => "this form".to_string(),
            };
            let mode = if expect { "quantum" } else { "classical" };
            c.push(path, format!("{what} is not valid in {mode} mode"));
        }
    }
}

/// Parses and validates raw JSON text. Empty input counts as `{}`.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut c = Collector::default();
    let text = if raw.trim().is_empty() { "{}" } else { raw };
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            c.push("", format!("invalid JSON: {e}"));
            return Err(ConfigErrors(c.0));
        }
    };
    let Some(root) = value.as_object() else {
        c.push("", "top level must be an object");
        return Err(ConfigErrors(c.0));
    };

    for key in REQUIRED {
        if !root.contains_key(key) {
            c.push(key, "missing required field");
        }
    }
    for key in root.keys() {
        if !REQUIRED.contains(&key.as_str()) && !OPTIONAL.contains(&key.as_str()) {
            c.push(key.as_str(), "unknown field");
        }
    }

    let mode = root.get("mode").and_then(|v| c.section::<Mode>("mode", v));
    let lattice = root.get("lattice").and_then(|v| parse_lattice(&mut c, v));
    let potential = root
        .get("potential")
        .and_then(|v| parse_potential(&mut c, v));
    let initial_state = root
        .get("initial_state")
        .and_then(|v| parse_initial_state(&mut c, v));
    let time_grid = root
        .get("time_grid")
        .and_then(|v| c.section::<TimeGrid>("time_grid", v));
    let outputs = match root.get("outputs") {
        Some(v) => c.section::<Outputs>("outputs", v).map(Some),
        None => Some(None),
    };

    if !c.0.is_empty() {
        return Err(ConfigErrors(c.0));
    }
    let (
        Some(mode),
        Some(lattice),
        Some(potential),
        Some(initial_state),
        Some(time_grid),
        Some(outputs),
    ) = (mode, lattice, potential, initial_state, time_grid, outputs)
    else {
        unreachable!("every missing section records an error");
    };
    let cfg = ExperimentConfig {
        mode,
        lattice,
        potential,
        initial_state,
        time_grid,
        outputs,
    };
    check_semantics(&mut c, &cfg);
    if c.0.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(c.0))
    }
}
