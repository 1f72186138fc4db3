//! Named built-in configurations.

use std::f64::consts::TAU;

use crate::config::{
    CubicLattice, ExperimentConfig, InitialState, KickConfig, KickShapeConfig, LatticeConfig,
    LineLattice, Mode, PhaseSpaceLattice, PotentialConfig, TimeGrid, YukawaConfig,
};

pub const DEMO_NAMES: [&str; 4] = [
    "free-invariance",
    "nondegenerate",
    "yukawa-mixing",
    "classical-kick",
];

pub fn demo_config(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        // Coherences between shells rotate under H0 while S_eff stays put.
        "free-invariance" => ExperimentConfig {
            mode: Mode::Quantum,
            lattice: LatticeConfig::Cubic(CubicLattice {
                half_width: 1,
                delta_k: 1.0,
            }),
            potential: PotentialConfig::Yukawa(YukawaConfig {
                coupling: 0.0,
                mu: 1.0,
            }),
            initial_state: InitialState::AppendixA {
                mu: Some(vec![
                    vec![0.4, 0.2, 0.0, 0.0],
                    vec![0.2, 0.3, 0.0, 0.0],
                    vec![0.0, 0.0, 0.2, 0.1],
                    vec![0.0, 0.0, 0.1, 0.1],
                ]),
                shells: None,
                seed: 11,
            },
            time_grid: TimeGrid {
                t_max: 10.0,
                steps: 50,
            },
            outputs: None,
        },
        "nondegenerate" => ExperimentConfig {
            mode: Mode::Quantum,
            lattice: LatticeConfig::Line(LineLattice {
                points: 16,
                delta_k: 1.0,
            }),
            potential: PotentialConfig::Yukawa(YukawaConfig {
                coupling: 1.0,
                mu: 1.0,
            }),
            initial_state: InitialState::PureRandom { seed: 7 },
            time_grid: TimeGrid {
                t_max: 10.0,
                steps: 100,
            },
            outputs: None,
        },
        "yukawa-mixing" => ExperimentConfig {
            mode: Mode::Quantum,
            lattice: LatticeConfig::Cubic(CubicLattice {
                half_width: 1,
                delta_k: 1.0,
            }),
            potential: PotentialConfig::Yukawa(YukawaConfig {
                coupling: 0.2,
                mu: 1.0,
            }),
            initial_state: InitialState::AppendixA {
                mu: None,
                shells: None,
                seed: 42,
            },
            time_grid: TimeGrid {
                t_max: 5.0,
                steps: 100,
            },
            outputs: None,
        },
        "classical-kick" => ExperimentConfig {
            mode: Mode::Classical,
            lattice: LatticeConfig::PhaseSpace(PhaseSpaceLattice {
                nq: 128,
                np: 64,
                dq: TAU / 128.0,
                dp: 0.05,
            }),
            potential: PotentialConfig::Kick(KickConfig {
                kick_strength: 0.3,
                kick_shape: KickShapeConfig::Cos,
                kick_time: Some(1.0),
            }),
            initial_state: InitialState::SinglePRow { p0: 0.5 },
            time_grid: TimeGrid {
                t_max: 2.0,
                steps: 20,
            },
            outputs: None,
        },
        _ => return None,
    };
    Some(cfg)
}
