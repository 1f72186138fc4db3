//! Classical counterpart: densities on a periodic `(q, p)` grid under the free
//! flow of `H = p^2`, plus an impulsive potential kick.
//!
//! The chart `xi = q / (2p)`, `beta = p` turns the free flow into a pure
//! translation `xi -> xi + t`, so integrating out `xi` at fixed `beta` is the
//! `p`-marginal. The free flow leaves that marginal alone; a kick with a
//! `q`-dependent force does not.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Mass tolerance for a valid density.
pub const MASS_TOL: f64 = 1e-8;

/// Uniform grid, periodic in `q` over `[0, nq * dq)`. Momentum cell centers
/// sit at `(j + 1/2 - np/2) dp`, so no center falls in `|p| < dp/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    nq: usize,
    np: usize,
    dq: f64,
    dp: f64,
}

impl PhaseSpaceGrid {
    pub fn new(nq: usize, np: usize, dq: f64, dp: f64) -> Result<Self> {
        if nq == 0 || np == 0 {
            return Err(Error::InvalidGrid("nq and np must be positive".into()));
        }
        if !np.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "np = {np} must be even so that p = 0 is not a cell center"
            )));
        }
        for (name, x) in [("dq", dq), ("dp", dp)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "{name} must be positive, got {x}"
                )));
            }
        }
        Ok(Self { nq, np, dq, dp })
    }

    /// `nq` cells covering `[0, 2 pi)`.
    pub fn periodic_2pi(nq: usize, np: usize, dp: f64) -> Result<Self> {
        Self::new(nq, np, std::f64::consts::TAU / nq as f64, dp)
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn q(&self, i: usize) -> f64 {
        i as f64 * self.dq
    }

    pub fn p(&self, j: usize) -> f64 {
        (j as f64 + 0.5 - self.np as f64 / 2.0) * self.dp
    }

    pub fn q_period(&self) -> f64 {
        self.nq as f64 * self.dq
    }

    /// Half-width of the excluded band around `p = 0`.
    pub fn p_min(&self) -> f64 {
        self.dp / 2.0
    }

    pub fn cell_area(&self) -> f64 {
        self.dq * self.dp
    }

    /// Row whose center is nearest to `p`.
    pub fn nearest_row(&self, p: f64) -> usize {
        let x = p / self.dp + self.np as f64 / 2.0 - 0.5;
        x.round().clamp(0.0, (self.np - 1) as f64) as usize
    }
}

/// Nonnegative density on the grid with unit mass. Values are stored
/// row-major by momentum: `values[j * nq + i]` is the density at `(q_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceDensity {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
}

impl PhaseSpaceDensity {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<f64>) -> Result<Self> {
        let rho = Self { grid, values };
        rho.validate()?;
        Ok(rho)
    }

    /// Samples `f` at the cell points and rescales to unit mass.
    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.nq * grid.np);
        for j in 0..grid.np {
            for i in 0..grid.nq {
                values.push(f(grid.q(i), grid.p(j)));
            }
        }
        Self::normalized(grid, values)
    }

    /// All mass on the momentum row nearest `p0`, spread in `q` by `profile`.
    pub fn single_p_row(
        grid: PhaseSpaceGrid,
        p0: f64,
        profile: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let row = grid.nearest_row(p0);
        let mut values = vec![0.0; grid.nq * grid.np];
        for i in 0..grid.nq {
            values[row * grid.nq + i] = profile(grid.q(i));
        }
        Self::normalized(grid, values)
    }

    fn normalized(grid: PhaseSpaceGrid, mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidPhaseDensity(
                "values must be finite and nonnegative".into(),
            ));
        }
        let mass: f64 = values.iter().sum::<f64>() * grid.cell_area();
        if mass <= 0.0 {
            return Err(Error::InvalidPhaseDensity("zero mass".into()));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { grid, values })
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.nq * self.grid.np {
            return Err(Error::DimensionMismatch {
                expected: self.grid.nq * self.grid.np,
                found: self.values.len(),
            });
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidPhaseDensity(
                "values must be finite and nonnegative".into(),
            ));
        }
        let mass = self.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPhaseDensity(format!("mass {mass} != 1")));
        }
        Ok(())
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nq + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.grid.nq..(j + 1) * self.grid.nq]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Mass-weighted mean position of row `j` on the circle, in `[0, period)`.
    pub fn row_circular_mean_q(&self, j: usize) -> f64 {
        let l = self.grid.q_period();
        let (mut s, mut c) = (0.0, 0.0);
        for (i, &v) in self.row(j).iter().enumerate() {
            let th = std::f64::consts::TAU * self.grid.q(i) / l;
            s += v * th.sin();
            c += v * th.cos();
        }
        (s.atan2(c) / std::f64::consts::TAU * l).rem_euclid(l)
    }
}

/// Free flow `q -> q + 2 p t` by semi-Lagrangian backtracing with linear
/// interpolation along each momentum row.
pub fn classical_free_flow(rho: &PhaseSpaceDensity, t: f64) -> PhaseSpaceDensity {
    let g = rho.grid;
    let nq = g.nq;
    let mut out = vec![0.0; rho.values.len()];
    out.par_chunks_mut(nq).enumerate().for_each(|(j, row)| {
        let src = rho.row(j);
        let shift = 2.0 * g.p(j) * t / g.dq;
        let floor = shift.floor();
        let w = shift - floor;
        let base = (floor as i64).rem_euclid(nq as i64) as usize;
        for (i, v) in row.iter_mut().enumerate() {
            // departure point i - shift lies between cells i - base - 1 and i - base
            let hi = (i + nq - base) % nq;
            let lo = (hi + nq - 1) % nq;
            *v = (1.0 - w) * src[hi] + w * src[lo];
        }
    });
    PhaseSpaceDensity {
        grid: g,
        values: out,
    }
}

/// `(xi, beta) = (q / (2p), p)`. Under the free flow `xi` advances by `t`.
pub fn xi_beta_coordinates(q: f64, p: f64, p_min: f64) -> Result<(f64, f64)> {
    if p.abs() < p_min {
        return Err(Error::SingularChart { p, p_min });
    }
    Ok((q / (2.0 * p), p))
}

/// Reduced density over `beta = p`: cell masses summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMarginal {
    pub centers: Vec<f64>,
    pub masses: Vec<f64>,
    pub dp: f64,
}

impl BetaMarginal {
    /// Differential entropy `-Σ g_j ln g_j dp` with `g_j = m_j / dp`.
    pub fn entropy(&self) -> f64 {
        self.masses
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| -m * (m / self.dp).ln())
            .sum()
    }

    /// Number of cells carrying more than `threshold` mass.
    pub fn support(&self, threshold: f64) -> usize {
        self.masses.iter().filter(|&&m| m > threshold).count()
    }
}

/// Integrates out `xi` at fixed `beta`. In this chart that is the
/// `q`-integral at fixed `p`, renormalized to unit mass.
pub fn classical_reduce(rho: &PhaseSpaceDensity) -> BetaMarginal {
    let g = rho.grid;
    let mut masses: Vec<f64> = (0..g.np)
        .map(|j| rho.row(j).iter().sum::<f64>() * g.cell_area())
        .collect();
    let total: f64 = masses.iter().sum();
    if total > 0.0 {
        masses.iter_mut().for_each(|m| *m /= total);
    }
    BetaMarginal {
        centers: (0..g.np).map(|j| g.p(j)).collect(),
        masses,
        dp: g.dp,
    }
}

pub fn classical_effective_entropy(marginal: &BetaMarginal) -> f64 {
    marginal.entropy()
}

/// Potential shapes for the impulsive kick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KickShape {
    /// `V(q) = cos q`.
    Cos,
    /// `V(q) = sin q`.
    Sin,
    /// `V(q) = q`: a uniform force.
    Linear,
}

impl KickShape {
    pub fn force_gradient(self, q: f64) -> f64 {
        match self {
            KickShape::Cos => -q.sin(),
            KickShape::Sin => q.cos(),
            KickShape::Linear => 1.0,
        }
    }
}

/// Impulse `p -> p - strength V'(q)`.
///
/// Each cell's mass is moved to its displaced momentum and shared linearly
/// between the two nearest rows, so mass is conserved exactly. Mass pushed
/// past the outermost rows stays in them.
pub fn apply_kick(rho: &PhaseSpaceDensity, shape: KickShape, strength: f64) -> PhaseSpaceDensity {
    let g = rho.grid;
    let (nq, np) = (g.nq, g.np);
    let mut out = vec![0.0; rho.values.len()];
    for i in 0..nq {
        let shift = -strength * shape.force_gradient(g.q(i)) / g.dp;
        if shift == 0.0 {
            for j in 0..np {
                out[j * nq + i] += rho.values[j * nq + i];
            }
            continue;
        }
        let floor = shift.floor();
        let w = shift - floor;
        for j in 0..np {
            let v = rho.values[j * nq + i];
            if v == 0.0 {
                continue;
            }
            let lo = j as i64 + floor as i64;
            let clamp = |k: i64| k.clamp(0, np as i64 - 1) as usize;
            out[clamp(lo) * nq + i] += (1.0 - w) * v;
            if w > 0.0 {
                out[clamp(lo + 1) * nq + i] += w * v;
            }
        }
    }
    PhaseSpaceDensity {
        grid: g,
        values: out,
    }
}
