//! Effective states.
//!
//! A matrix on the momentum basis splits into Bohr-frequency components, one
//! per distinct `alpha = E_col - E_row`. The variable conjugate to the free
//! Liouvillian only enters through the phases `e^{i alpha t}` of these
//! components, so integrating it out keeps exactly the `alpha = 0` component:
//! the shell-block-diagonal part. That block-diagonal matrix is the effective
//! state; its normalized blocks define effective purity and effective entropy.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{MomentumBasis, ShellTable};
use crate::dynamics::{Hamiltonian, Propagator};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::states::{DensityMatrix, PSD_TOL};

/// Shells with weight at or below this are treated as empty.
pub const OCCUPANCY_TOL: f64 = 1e-12;

/// Default bound on the second eigenvalue of a normalized shell block for the
/// block to count as rank one.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Distinct Bohr frequencies `E_b - E_a` over all pairs of shells.
#[derive(Debug, Clone)]
pub struct BohrFrequencies {
    values: Vec<f64>,
    pair_class: Vec<usize>,
    num_shells: usize,
}

impl BohrFrequencies {
    pub fn new(basis: &MomentumBasis) -> Self {
        let e = basis.shells().energies();
        let ns = e.len();
        let diffs: Vec<f64> = (0..ns * ns).map(|p| e[p % ns] - e[p / ns]).collect();
        // same grouping rule as the shells themselves
        let groups = ShellTable::from_energies(&diffs, basis.energy_tolerance());
        let mut pair_class = vec![0; ns * ns];
        for (class, members) in groups.all_members().iter().enumerate() {
            for &p in members {
                pair_class[p] = class;
            }
        }
        Self {
            values: groups.energies().to_vec(),
            pair_class,
            num_shells: ns,
        }
    }

    /// Ascending distinct frequencies.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Frequency class of shell pair `(row shell, column shell)`.
    pub fn shell_pair_class(&self, row_shell: usize, col_shell: usize) -> usize {
        self.pair_class[row_shell * self.num_shells + col_shell]
    }

    /// Frequency class of matrix entry `(i, j)`.
    pub fn class(&self, basis: &MomentumBasis, i: usize, j: usize) -> usize {
        let s = basis.shell_indices();
        self.shell_pair_class(s[i], s[j])
    }

    pub fn zero_class(&self) -> usize {
        self.shell_pair_class(0, 0)
    }
}

/// Partition of a matrix by Bohr frequency. Components that are identically
/// zero are omitted.
#[derive(Debug, Clone)]
pub struct AlphaDecomposition {
    dim: usize,
    tol: f64,
    frequencies: Vec<f64>,
    components: Vec<CMatrix>,
}

impl AlphaDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn component(&self, alpha: f64) -> Option<&CMatrix> {
        self.frequencies
            .iter()
            .position(|&a| (a - alpha).abs() <= self.tol)
            .map(|k| &self.components[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &CMatrix)> {
        self.frequencies.iter().copied().zip(self.components.iter())
    }

    /// `Σ_alpha component(alpha)`.
    pub fn reconstruct(&self) -> CMatrix {
        self.free_phase_law(0.0)
    }

    /// `Σ_alpha e^{i alpha t} component(alpha)`: the free evolution
    /// `e^{-i H0 t} X e^{i H0 t}` expressed as a phase per component.
    pub fn free_phase_law(&self, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (alpha, comp) in self.iter() {
            out += comp * Complex64::from_polar(1.0, alpha * t);
        }
        out
    }
}

pub fn alpha_decompose(matrix: &CMatrix, basis: &MomentumBasis) -> Result<AlphaDecomposition> {
    let n = basis.len();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: matrix.nrows(),
        });
    }
    let freqs = BohrFrequencies::new(basis);
    let mut parts: Vec<Option<CMatrix>> = vec![None; freqs.values().len()];
    for j in 0..n {
        for i in 0..n {
            let z = matrix[(i, j)];
            if z == Complex64::new(0.0, 0.0) {
                continue;
            }
            let k = freqs.class(basis, i, j);
            parts[k].get_or_insert_with(|| CMatrix::zeros(n, n))[(i, j)] = z;
        }
    }
    let (frequencies, components) = freqs
        .values()
        .iter()
        .zip(parts)
        .filter_map(|(&a, p)| p.map(|m| (a, m)))
        .unzip();
    Ok(AlphaDecomposition {
        dim: n,
        tol: basis.energy_tolerance(),
        frequencies,
        components,
    })
}

/// One energy shell of an effective state.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellBlock {
    pub energy: f64,
    /// Basis indices of the shell, ascending.
    pub members: Vec<usize>,
    /// The raw (unnormalized) diagonal block of the matrix on this shell.
    pub block: CMatrix,
    /// `lambda_E`, the trace of `block`.
    pub weight: f64,
}

impl ShellBlock {
    pub fn is_occupied(&self) -> bool {
        self.weight > OCCUPANCY_TOL
    }

    /// `block / lambda_E`, or `None` for an empty shell.
    pub fn normalized(&self) -> Option<CMatrix> {
        self.is_occupied().then(|| self.block.unscale(self.weight))
    }

    /// Eigenvalues of the normalized block, ascending.
    pub fn spectrum(&self) -> Result<Option<DVector<f64>>> {
        self.normalized()
            .map(|m| linalg::hermitian_eigenvalues(&m))
            .transpose()
    }
}

/// Per-shell weights and blocks of an effective state.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellDecomposition {
    dim: usize,
    shells: Vec<ShellBlock>,
}

impl ShellDecomposition {
    pub fn shells(&self) -> &[ShellBlock] {
        &self.shells
    }

    pub fn weights(&self) -> Vec<f64> {
        self.shells.iter().map(|s| s.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.shells.iter().map(|s| s.weight).sum()
    }

    /// The effective state as a full block-diagonal matrix.
    pub fn assemble(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for s in &self.shells {
            for (a, &i) in s.members.iter().enumerate() {
                for (b, &j) in s.members.iter().enumerate() {
                    out[(i, j)] = s.block[(a, b)];
                }
            }
        }
        out
    }

    /// Spectra of the normalized blocks; `None` for empty shells.
    pub fn spectra(&self) -> Result<Vec<Option<DVector<f64>>>> {
        self.shells.par_iter().map(ShellBlock::spectrum).collect()
    }

    /// `S_E = -Tr rho_E ln rho_E` per shell; `None` for empty shells.
    pub fn shell_entropies(&self) -> Result<Vec<Option<f64>>> {
        Ok(spectra_entropies(&self.spectra()?))
    }

    /// `Σ_E S_E` over occupied shells.
    pub fn effective_entropy(&self) -> Result<f64> {
        Ok(self.shell_entropies()?.into_iter().flatten().sum())
    }

    /// `Σ_E lambda_E S_E`. Secondary statistic; not the effective entropy.
    pub fn weighted_entropy(&self) -> Result<f64> {
        Ok(self
            .shell_entropies()?
            .into_iter()
            .zip(&self.shells)
            .filter_map(|(s, b)| s.map(|s| s * b.weight))
            .sum())
    }

    /// Every occupied normalized block is rank one: its second largest
    /// eigenvalue is below `tol_rank`.
    pub fn is_effectively_pure(&self, tol_rank: f64) -> Result<bool> {
        Ok(spectra_pure(&self.spectra()?, tol_rank))
    }

    /// Validates every occupied normalized block as a density matrix.
    pub fn validate_blocks(&self) -> Result<()> {
        for s in &self.shells {
            if let Some(m) = s.normalized() {
                DensityMatrix::new(m)?;
            }
        }
        Ok(())
    }
}

fn spectra_entropies(spectra: &[Option<DVector<f64>>]) -> Vec<Option<f64>> {
    spectra
        .iter()
        .map(|s| s.as_ref().map(|v| linalg::entropy_of_spectrum(v.iter())))
        .collect()
}

fn spectra_pure(spectra: &[Option<DVector<f64>>], tol_rank: f64) -> bool {
    spectra
        .iter()
        .flatten()
        .all(|v| v.len() < 2 || v[v.len() - 2] < tol_rank)
}

/// Effective state of a density matrix: its `alpha = 0` component, split by shell.
pub fn reduce(rho: &DensityMatrix, basis: &MomentumBasis) -> Result<ShellDecomposition> {
    reduce_matrix(rho.matrix(), basis)
}

/// [`reduce`] for any square matrix of the basis dimension.
pub fn reduce_matrix(m: &CMatrix, basis: &MomentumBasis) -> Result<ShellDecomposition> {
    let n = basis.len();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    let table = basis.shells();
    let shells = (0..table.len())
        .map(|s| {
            let members = table.members(s).to_vec();
            let d = members.len();
            let block = CMatrix::from_fn(d, d, |a, b| m[(members[a], members[b])]);
            let weight = block.trace().re;
            ShellBlock {
                energy: table.energy(s),
                members,
                block,
                weight,
            }
        })
        .collect();
    Ok(ShellDecomposition { dim: n, shells })
}

pub fn effective_entropy(dec: &ShellDecomposition) -> Result<f64> {
    dec.effective_entropy()
}

pub fn is_effectively_pure(dec: &ShellDecomposition, tol_rank: f64) -> Result<bool> {
    dec.is_effectively_pure(tol_rank)
}

/// An observable that commutes with the free Hamiltonian, stored as one
/// Hermitian block per shell.
#[derive(Debug, Clone)]
pub struct ShellOperator {
    blocks: Vec<CMatrix>,
}

impl ShellOperator {
    /// Extracts the shell blocks of `a`, rejecting any entry above `tol`
    /// that couples two different shells.
    pub fn from_matrix(a: &CMatrix, basis: &MomentumBasis, tol: f64) -> Result<Self> {
        let n = basis.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.nrows(),
            });
        }
        let s = basis.shell_indices();
        for j in 0..n {
            for i in 0..n {
                if s[i] != s[j] && a[(i, j)].norm() > tol {
                    return Err(Error::NotShellDiagonal {
                        row_shell: s[i],
                        col_shell: s[j],
                        magnitude: a[(i, j)].norm(),
                    });
                }
            }
        }
        let dec = reduce_matrix(a, basis)?;
        Ok(Self {
            blocks: dec.shells.into_iter().map(|b| b.block).collect(),
        })
    }

    pub fn from_blocks(blocks: Vec<CMatrix>, basis: &MomentumBasis) -> Result<Self> {
        let degs = basis.shells().degeneracies();
        if blocks.len() != degs.len() {
            return Err(Error::DimensionMismatch {
                expected: degs.len(),
                found: blocks.len(),
            });
        }
        for (b, &d) in blocks.iter().zip(&degs) {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: b.nrows(),
                });
            }
        }
        Ok(Self { blocks })
    }

    /// The free Hamiltonian itself, `E` times the identity on each shell.
    pub fn free_energy(basis: &MomentumBasis) -> Self {
        let t = basis.shells();
        Self {
            blocks: (0..t.len())
                .map(|s| {
                    CMatrix::identity(t.degeneracy(s), t.degeneracy(s)) * linalg::c(t.energy(s))
                })
                .collect(),
        }
    }

    pub fn identity(basis: &MomentumBasis) -> Self {
        let t = basis.shells();
        Self {
            blocks: (0..t.len())
                .map(|s| CMatrix::identity(t.degeneracy(s), t.degeneracy(s)))
                .collect(),
        }
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }
}

/// `Σ_E lambda_E Tr(A_E rho_E)`: the expectation of a shell-diagonal
/// observable computed from the effective state alone.
pub fn expectation_xi_independent(
    a: &ShellOperator,
    rho: &DensityMatrix,
    basis: &MomentumBasis,
) -> Result<f64> {
    let dec = reduce(rho, basis)?;
    if a.blocks.len() != dec.shells.len() {
        return Err(Error::DimensionMismatch {
            expected: dec.shells.len(),
            found: a.blocks.len(),
        });
    }
    // lambda_E Tr(A_E rho_E) = Tr(A_E block_E), which also covers empty shells
    Ok(a.blocks
        .iter()
        .zip(&dec.shells)
        .map(|(op, s)| (op * &s.block).trace().re)
        .sum())
}

/// One time point of an exact evolution followed by reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub effective_entropy: f64,
    pub global_entropy: f64,
    /// `Tr rho(t)^2`.
    pub purity: f64,
    pub effectively_pure: bool,
    /// `S_E` per shell, `None` when the shell is empty.
    pub shell_entropies: Vec<Option<f64>>,
    pub shell_weights: Vec<f64>,
    /// Diagnostics of `rho(t)` itself.
    pub trace: f64,
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
}

impl TraceRow {
    /// Whether `rho(t)` passes the density-matrix validation tolerances.
    pub fn state_is_valid(&self) -> bool {
        (self.trace - 1.0).abs() <= crate::states::TRACE_TOL
            && self.hermitian_defect <= crate::states::HERMITIAN_TOL
            && self.min_eigenvalue >= -PSD_TOL
    }
}

/// Evolves `rho0` exactly to every time in `times` and reports the effective
/// and global measures. Time points are evaluated in parallel against one
/// shared propagator; rows come back in input order.
pub fn entropy_trace(
    rho0: &DensityMatrix,
    h: &Hamiltonian,
    basis: &MomentumBasis,
    times: &[f64],
) -> Result<Vec<TraceRow>> {
    let prop = h.propagator()?;
    entropy_trace_with(rho0, &prop, basis, times)
}

pub fn entropy_trace_with(
    rho0: &DensityMatrix,
    prop: &Propagator,
    basis: &MomentumBasis,
    times: &[f64],
) -> Result<Vec<TraceRow>> {
    times
        .par_iter()
        .map(|&t| trace_point(rho0, prop, basis, t))
        .collect()
}

fn trace_point(
    rho0: &DensityMatrix,
    prop: &Propagator,
    basis: &MomentumBasis,
    t: f64,
) -> Result<TraceRow> {
    let rho = prop.evolve(rho0, t)?;
    let global = linalg::hermitian_eigenvalues(rho.matrix())?;
    let dec = reduce(&rho, basis)?;
    let spectra = dec.spectra()?;
    let shell_entropies = spectra_entropies(&spectra);
    Ok(TraceRow {
        t,
        effective_entropy: shell_entropies.iter().flatten().sum(),
        global_entropy: linalg::entropy_of_spectrum(global.iter()),
        purity: rho.purity(),
        effectively_pure: spectra_pure(&spectra, DEFAULT_RANK_TOL),
        shell_entropies,
        shell_weights: dec.weights(),
        trace: rho.trace(),
        hermitian_defect: linalg::hermitian_defect(rho.matrix()),
        min_eigenvalue: global[0],
    })
}
