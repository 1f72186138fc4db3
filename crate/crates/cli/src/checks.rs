//! Invariant suites behind the `check` subcommand. Each suite builds its own
//! small seeded inputs.

use std::f64::consts::TAU;

use lel_core::classical::{apply_kick, classical_free_flow, classical_reduce, xi_beta_coordinates};
use lel_core::dynamics::{
    alpha_diagonality_test, evolve, free_liouvillian, interaction_liouvillian,
};
use lel_core::linalg;
use lel_core::reduction::{alpha_decompose, entropy_trace, reduce};
use lel_core::states::pure_to_density;
use lel_core::{
    sampling, Hamiltonian, KickShape, MomentumBasis, PhaseSpaceDensity, PhaseSpaceGrid,
    Superoperator,
};

use crate::runner::{ENTROPY_TOL, MARGINAL_TOL, MASS_TOL, PURITY_TOL, XI_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Suite = fn() -> lel_core::Result<(bool, String)>;

const SUITES: [(&str, Suite); 8] = [
    ("unitary-invariants", unitary_invariants),
    ("free-evolution-entropy", free_evolution_entropy),
    ("nondegenerate-no-mixing", nondegenerate_no_mixing),
    ("superoperator-oracle", superoperator_oracle),
    ("alpha-decomposition", alpha_decomposition),
    ("alpha-diagonality", alpha_diagonality),
    ("classical-transport", classical_transport),
    ("xi-translation", xi_translation),
];

pub fn run_checks() -> Vec<CheckResult> {
    SUITES
        .iter()
        .map(|(name, suite)| match suite() {
            Ok((passed, detail)) => CheckResult {
                name,
                passed,
                detail,
            },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            },
        })
        .collect()
}

fn m1() -> lel_core::Result<MomentumBasis> {
    MomentumBasis::cubic(1, 1.0)
}

fn unitary_invariants() -> lel_core::Result<(bool, String)> {
    let b = m1()?;
    let h = Hamiltonian::yukawa(&b, 0.7, 1.0)?;
    let mut rng = sampling::rng(1);
    let mut worst: f64 = 0.0;
    let mut valid = true;
    for k in 0..8 {
        let rho = pure_to_density(&sampling::random_pure_state(&mut rng, b.len()));
        let out = evolve(&rho, &h, 0.37 * k as f64)?;
        worst = worst.max((out.purity() - 1.0).abs());
        valid &= out.validate().is_ok() && out.entropy()? <= ENTROPY_TOL;
    }
    Ok((
        valid && worst <= PURITY_TOL,
        format!("max |dTr rho^2| = {worst:.2e}"),
    ))
}

fn free_evolution_entropy() -> lel_core::Result<(bool, String)> {
    let b = m1()?;
    let h = Hamiltonian::free(&b);
    let mut rng = sampling::rng(2);
    let times: Vec<f64> = (0..10).map(|k| 0.7 * k as f64).collect();
    let mut drift: f64 = 0.0;
    for _ in 0..3 {
        let rho = sampling::random_density(&mut rng, b.len(), 4);
        let rows = entropy_trace(&rho, &h, &b, &times)?;
        for r in &rows {
            drift = drift.max((r.effective_entropy - rows[0].effective_entropy).abs());
        }
    }
    Ok((drift <= ENTROPY_TOL, format!("max |dS_eff| = {drift:.2e}")))
}

fn nondegenerate_no_mixing() -> lel_core::Result<(bool, String)> {
    let b = MomentumBasis::line(16, 1.0)?;
    let h = Hamiltonian::yukawa(&b, 1.0, 1.0)?;
    let mut rng = sampling::rng(3);
    let rho = sampling::random_density(&mut rng, b.len(), 3);
    let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    let rows = entropy_trace(&rho, &h, &b, &times)?;
    let peak = rows.iter().map(|r| r.effective_entropy).fold(0.0, f64::max);
    let pure = rows.iter().all(|r| r.effectively_pure);
    Ok((
        pure && peak <= ENTROPY_TOL,
        format!("max S_eff = {peak:.2e}"),
    ))
}

fn superoperator_oracle() -> lel_core::Result<(bool, String)> {
    let mut rng = sampling::rng(4);
    let mut worst: f64 = 0.0;
    for n in [2, 5, 8] {
        let v = sampling::random_hermitian(&mut rng, n, 1.0);
        let h0 = nalgebra::DVector::from_fn(n, |i, _| i as f64 * 0.5);
        let h = Hamiltonian::from_parts(h0, v)?;
        let rho = sampling::random_density(&mut rng, n, n);
        let l = Superoperator::commutator_with(&h.full())?;
        let a = l.propagate(rho.matrix(), 1.3);
        let e = evolve(&rho, &h, 1.3)?;
        worst = worst.max(linalg::max_abs(&(a - e.matrix())));
    }
    Ok((worst <= 1e-9, format!("max elementwise gap = {worst:.2e}")))
}

fn alpha_decomposition() -> lel_core::Result<(bool, String)> {
    let b = m1()?;
    let free = Hamiltonian::free(&b);
    let mut rng = sampling::rng(5);
    let rho = sampling::random_density(&mut rng, b.len(), 5);
    let dec = alpha_decompose(rho.matrix(), &b)?;
    let recon = linalg::max_abs(&(dec.reconstruct() - rho.matrix()));
    let t = 0.9;
    let phase = linalg::max_abs(&(dec.free_phase_law(t) - evolve(&rho, &free, t)?.matrix()));
    let zero = dec
        .component(0.0)
        .cloned()
        .unwrap_or_else(|| linalg::CMatrix::zeros(b.len(), b.len()));
    let eff = linalg::max_abs(&(zero - reduce(&rho, &b)?.assemble()));
    let worst = recon.max(phase).max(eff);
    Ok((worst <= 1e-10, format!("max gap = {worst:.2e}")))
}

fn alpha_diagonality() -> lel_core::Result<(bool, String)> {
    let b = m1()?;
    let h = Hamiltonian::yukawa(&b, 1.0, 1.0)?;
    let l0 = free_liouvillian(&h)?;
    let li = interaction_liouvillian(&h)?;
    let free_ok = alpha_diagonality_test(&l0, &b, 1e-10)?;
    let threshold = 1e-3 * li.matrix().norm();
    let interaction_mixes = !alpha_diagonality_test(&li, &b, threshold)?;
    Ok((
        free_ok && interaction_mixes,
        format!("L0 diagonal: {free_ok}, L_I mixes above {threshold:.2e}: {interaction_mixes}"),
    ))
}

fn classical_transport() -> lel_core::Result<(bool, String)> {
    let g = PhaseSpaceGrid::periodic_2pi(64, 32, 0.1)?;
    let rho = PhaseSpaceDensity::from_fn(g, |q, p| {
        (1.0 + 0.5 * q.cos()) * (-(p - 0.4).powi(2) / 0.1).exp()
    })?;
    let m0 = classical_reduce(&rho).masses;
    let flowed = classical_free_flow(&rho, 2.7);
    let drift = classical_reduce(&flowed)
        .masses
        .iter()
        .zip(&m0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let kicked = apply_kick(&flowed, KickShape::Cos, 0.4);
    let mass_err = (flowed.mass() - 1.0).abs().max((kicked.mass() - 1.0).abs());
    Ok((
        drift <= MARGINAL_TOL && mass_err <= MASS_TOL,
        format!("marginal drift = {drift:.2e}, mass error = {mass_err:.2e}"),
    ))
}

fn xi_translation() -> lel_core::Result<(bool, String)> {
    let g = PhaseSpaceGrid::new(16, 8, TAU / 16.0, 0.25)?;
    let mut worst: f64 = 0.0;
    for j in 0..g.np() {
        for i in 0..g.nq() {
            let (q, p) = (g.q(i), g.p(j));
            let (xi0, _) = xi_beta_coordinates(q, p, g.p_min())?;
            for t in [0.1, 1.0, 3.5] {
                let (xi, _) = xi_beta_coordinates(q + 2.0 * p * t, p, g.p_min())?;
                worst = worst.max((xi - xi0 - t).abs());
            }
        }
    }
    Ok((
        worst <= XI_TOL,
        format!("max |xi(t) - xi(0) - t| = {worst:.2e}"),
    ))
}
