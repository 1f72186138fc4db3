//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::Rng;

use lel_cli::demos::demo_config;
use lel_cli::runner::build_quantum_state;
use lel_core::classical::{apply_kick, classical_free_flow, classical_reduce, xi_beta_coordinates};
use lel_core::dynamics::{
    alpha_diagonality_test, evolve, first_order_reduced_step, free_liouvillian,
    interaction_liouvillian,
};
use lel_core::linalg::{self, CMatrix};
use lel_core::reduction::{alpha_decompose, entropy_trace, reduce};
use lel_core::states::pure_to_density;
use lel_core::{
    sampling, Hamiltonian, KickShape, MomentumBasis, PhaseSpaceDensity, PhaseSpaceGrid,
    Superoperator,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn m1() -> MomentumBasis {
    MomentumBasis::cubic(1, 1.0).unwrap()
}

/// `Tr rho^2` summed entry by entry.
fn purity_oracle(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Von Neumann entropy from the eigenvalues of `rho`, computed here rather
/// than through the library's entropy helper.
fn entropy_oracle(m: &CMatrix) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(m.clone()).eigenvalues;
    eig.iter()
        .filter(|&&x| x > 1e-300)
        .map(|&x| -x * x.ln())
        .sum()
}

fn grid(t_max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| t_max * k as f64 / (points - 1) as f64)
        .collect()
}

fn unitarity_conservation() -> Outcome {
    let b = m1();
    let mut rng = sampling::rng(101);
    let start = Instant::now();
    let (mut purity_gap, mut pure_entropy) = (0.0_f64, 0.0_f64);
    for case in 0..100 {
        let rho = if case % 2 == 0 {
            pure_to_density(&sampling::random_pure_state(&mut rng, b.len()))
        } else {
            let rank = rng.random_range(1..=b.len());
            sampling::random_density(&mut rng, b.len(), rank)
        };
        let h = if case % 4 < 2 {
            Hamiltonian::yukawa(&b, rng.random_range(0.0..3.0), rng.random_range(0.3..3.0)).unwrap()
        } else {
            let v = sampling::random_hermitian(&mut rng, b.len(), 0.5);
            Hamiltonian::from_parts(DVector::from_column_slice(b.energies()), v).unwrap()
        };
        let t = rng.random_range(0.0..20.0);
        let out = evolve(&rho, &h, t).unwrap();
        purity_gap =
            purity_gap.max((purity_oracle(out.matrix()) - purity_oracle(rho.matrix())).abs());
        if case % 2 == 0 {
            pure_entropy = pure_entropy.max(entropy_oracle(out.matrix()));
        }
    }
    let elapsed = start.elapsed();
    check(
        purity_gap <= 1e-10 && pure_entropy <= 1e-9 && elapsed < Duration::from_secs(10),
        format!(
            "max |dTr rho^2| = {purity_gap:.2e}, max S(pure) = {pure_entropy:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn free_evolution_invariance() -> Outcome {
    let b = m1();
    let h = Hamiltonian::yukawa(&b, 0.0, 1.0).unwrap();
    let mut rng = sampling::rng(202);
    let times = grid(10.0, 50);
    let mut drift = 0.0_f64;
    for case in 0..20 {
        let rho = sampling::random_density(&mut rng, b.len(), 2 + case);
        let rows = entropy_trace(&rho, &h, &b, &times).unwrap();
        for r in &rows {
            drift = drift.max((r.effective_entropy - rows[0].effective_entropy).abs());
        }
    }
    check(
        drift <= 1e-9,
        format!("max_t |S_eff(t) - S_eff(0)| = {drift:.2e}"),
    )
}

fn nondegenerate_no_mixing() -> Outcome {
    let b = MomentumBasis::line(16, 1.0).unwrap();
    if !b.shells().is_nondegenerate() {
        return Err("N=16 line lattice has a degenerate shell".into());
    }
    let mut rng = sampling::rng(303);
    let times = grid(10.0, 101);
    let (mut peak, mut pure) = (0.0_f64, true);
    for a in [0.1, 1.0, 5.0] {
        let h = Hamiltonian::yukawa(&b, a, 1.0).unwrap();
        for rho in [
            sampling::random_density(&mut rng, b.len(), 4),
            pure_to_density(&sampling::random_pure_state(&mut rng, b.len())),
        ] {
            for r in entropy_trace(&rho, &h, &b, &times).unwrap() {
                peak = peak.max(r.effective_entropy);
                pure &= r.effectively_pure;
            }
        }
    }
    check(
        peak <= 1e-9 && pure,
        format!("max S_eff = {peak:.2e}, effectively pure throughout: {pure}"),
    )
}

fn entropy_generation() -> Outcome {
    let start = Instant::now();
    let b = m1();
    let cfg = demo_config("yukawa-mixing").unwrap();
    let rho = build_quantum_state(&cfg.initial_state, &b).map_err(|e| e.to_string())?;
    let h = Hamiltonian::yukawa(&b, 0.2, 1.0).unwrap();
    let rows = entropy_trace(&rho, &h, &b, &grid(5.0, 101)).unwrap();
    let p0 = purity_oracle(rho.matrix());
    let s0 = rows[0].effective_entropy;
    let peak = rows.iter().map(|r| r.effective_entropy).fold(0.0, f64::max);
    let purity_drift = rows
        .iter()
        .map(|r| (r.purity - p0).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        p0 < 1.0 - 1e-3
            && rows[0].effectively_pure
            && s0 <= 1e-9
            && peak >= 1e-4
            && purity_drift <= 1e-10
            && elapsed < Duration::from_secs(30),
        format!(
            "Tr rho^2 = {p0:.4}, S_eff(0) = {s0:.2e}, max S_eff = {peak:.3e}, purity drift = {purity_drift:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn superoperator_oracle() -> Outcome {
    let mut rng = sampling::rng(505);
    let mut worst = 0.0_f64;
    for case in 0..20 {
        let n = 1 + case % 8;
        let scale = rng.random_range(0.2..2.0);
        let hm = sampling::random_hermitian(&mut rng, n, scale);
        let rho = sampling::random_density(&mut rng, n, 1 + case % n);
        let t = rng.random_range(0.0..4.0);
        let h = Hamiltonian::from_parts(DVector::zeros(n), hm.clone()).unwrap();
        let by_superop = Superoperator::commutator_with(&hm)
            .unwrap()
            .propagate(rho.matrix(), t);
        let by_conjugation = evolve(&rho, &h, t).unwrap();
        worst = worst.max(linalg::max_abs(&(by_superop - by_conjugation.matrix())));
    }
    check(worst <= 1e-9, format!("max elementwise gap = {worst:.2e}"))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn first_order_slope() -> Outcome {
    let b = m1();
    let cfg = demo_config("yukawa-mixing").unwrap();
    let rho = build_quantum_state(&cfg.initial_state, &b).map_err(|e| e.to_string())?;
    let h = Hamiltonian::yukawa(&b, 0.2, 1.0).unwrap();
    let ts = [0.01, 0.02, 0.04, 0.08];
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let exact = reduce(&evolve(&rho, &h, t).unwrap(), &b)
                .unwrap()
                .assemble();
            let approx = first_order_reduced_step(&rho, &h, &b, t)
                .unwrap()
                .assemble();
            (exact - approx).norm()
        })
        .collect();
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let slope = least_squares_slope(&lx, &ly);
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    check(
        (slope - 2.0).abs() <= 0.1,
        format!("slope = {slope:.4}, errors = [{}]", shown.join(", ")),
    )
}

/// Largest superoperator entry linking `(k, l)` to `(i, j)` with
/// `E_l - E_k != E_j - E_i`, scanned over every index quadruple.
fn cross_frequency_weight(op: &Superoperator, b: &MomentumBasis) -> f64 {
    let n = b.len();
    let e = b.energies();
    let tol = 1e-6 * b.delta_k().powi(2);
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if ((e[j] - e[i]) - (e[l] - e[k])).abs() > tol {
                        worst = worst.max(op.element(i, j, k, l).norm());
                    }
                }
            }
        }
    }
    worst
}

fn alpha_diagonality() -> Outcome {
    let b = m1();
    let h = Hamiltonian::yukawa(&b, 1.0, 1.0).unwrap();
    let l0 = free_liouvillian(&h).unwrap();
    let li = interaction_liouvillian(&h).unwrap();
    let norm = li.matrix().norm();
    let free_leak = cross_frequency_weight(&l0, &b);
    let interaction_leak = cross_frequency_weight(&li, &b);
    let free_ok = alpha_diagonality_test(&l0, &b, 1e-10).unwrap();
    let interaction_flagged = !alpha_diagonality_test(&li, &b, 1e-10).unwrap();
    check(
        free_ok && free_leak <= 1e-10 && interaction_flagged && interaction_leak >= 1e-3 * norm,
        format!(
            "L0 leak = {free_leak:.2e}, L_I leak = {interaction_leak:.3e} vs 1e-3 ||L_I||_F = {:.3e}",
            1e-3 * norm
        ),
    )
}

fn alpha_decomposition_exact() -> Outcome {
    let b = m1();
    let free = Hamiltonian::yukawa(&b, 0.0, 1.0).unwrap();
    let mut rng = sampling::rng(808);
    let (mut exact, mut phase_gap) = (true, 0.0_f64);
    for case in 0..20 {
        let rho = sampling::random_density(&mut rng, b.len(), 1 + case);
        let dec = alpha_decompose(rho.matrix(), &b).unwrap();
        exact &= dec.reconstruct() == *rho.matrix();
        let t = rng.random_range(0.0..10.0);
        let law = dec.free_phase_law(t);
        phase_gap = phase_gap.max(linalg::max_abs(
            &(law - evolve(&rho, &free, t).unwrap().matrix()),
        ));
    }
    check(
        exact && phase_gap <= 1e-10,
        format!("reconstruction bit-exact: {exact}, max phase-law gap = {phase_gap:.2e}"),
    )
}

fn classical_suite() -> Outcome {
    let g = PhaseSpaceGrid::periodic_2pi(96, 48, 0.05).unwrap();
    let mut rng = sampling::rng(909);
    let (mut mass_err, mut drift) = (0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let (a, c, w) = (
            rng.random_range(0.0..0.9),
            rng.random_range(-0.8..0.8),
            rng.random_range(0.02..0.3),
        );
        let rho = PhaseSpaceDensity::from_fn(g, |q, p| {
            (1.0 + a * (q + c).cos()) * (-(p - c).powi(2) / w).exp()
        })
        .unwrap();
        let m0 = classical_reduce(&rho).masses;
        let t = rng.random_range(0.0..5.0);
        let flowed = classical_free_flow(&rho, t);
        let kicked = apply_kick(&flowed, KickShape::Cos, rng.random_range(-0.5..0.5));
        for out in [&flowed, &kicked] {
            let cell_sum: f64 = out.values().iter().sum::<f64>() * g.cell_area();
            mass_err = mass_err.max((cell_sum - 1.0).abs());
        }
        let m1 = classical_reduce(&flowed).masses;
        drift = drift.max(
            m0.iter()
                .zip(&m1)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );
    }

    let mut xi_gap = 0.0_f64;
    for j in 0..g.np() {
        for i in 0..g.nq() {
            let (q, p) = (g.q(i), g.p(j));
            let (xi0, _) = xi_beta_coordinates(q, p, g.p_min()).unwrap();
            for t in [0.01, 0.5, 1.0, 2.5] {
                let (xi, beta) = xi_beta_coordinates(q + 2.0 * p * t, p, g.p_min()).unwrap();
                xi_gap = xi_gap.max((xi - xi0 - t).abs()).max((beta - p).abs());
            }
        }
    }

    let cfg = demo_config("classical-kick").unwrap();
    let out = lel_cli::execute(&cfg).map_err(|e| e.to_string())?;
    let s0 = out.summary.initial_s_classical.unwrap();
    let s1 = out.summary.final_s_classical.unwrap();
    let dp = match &cfg.lattice {
        lel_cli::config::LatticeConfig::PhaseSpace(l) => l.dp,
        _ => unreachable!(),
    };
    let single_row_ok = (s0 - dp.ln()).abs() <= 1e-12;
    check(
        mass_err <= 1e-6 && drift <= 1e-6 && xi_gap <= 1e-12 && single_row_ok && s1 - s0 >= 1e-3 && out.summary.passed(),
        format!(
            "mass error = {mass_err:.2e}, marginal drift = {drift:.2e}, xi gap = {xi_gap:.2e}, S_classical {s0:.4} -> {s1:.4}"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "4")] {
        let out_dir = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_lel"))
            .args(["demo", "yukawa-mixing", "--out-dir"])
            .arg(&out_dir)
            .env("LEL_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("demo exited with {}", status.status));
        }
        outputs.push(fs::read(out_dir.join("trace.csv")).map_err(|e| e.to_string())?);
    }
    check(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!(
            "{} bytes per run, identical: {}",
            outputs[0].len(),
            outputs[0] == outputs[1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("unitarity conservation", unitarity_conservation),
        ("free-evolution invariance", free_evolution_invariance),
        ("nondegenerate no-mixing", nondegenerate_no_mixing),
        ("entropy generation", entropy_generation),
        ("superoperator oracle equivalence", superoperator_oracle),
        ("first-order step error slope", first_order_slope),
        ("alpha-diagonality", alpha_diagonality),
        ("alpha-decomposition exactness", alpha_decomposition_exact),
        ("classical suite", classical_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.2} s]: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.2} s]: {detail}", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
