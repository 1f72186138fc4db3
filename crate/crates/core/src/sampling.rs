//! Seeded random states and operators.
//!
//! Everything draws from ChaCha8 so a seed reproduces the same numbers on
//! every platform and release.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::basis::MomentumBasis;
use crate::linalg::{self, CMatrix, CVector};
use crate::states::{DensityMatrix, PureState, ShellVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unit vector.
pub fn random_pure_state<R: Rng>(rng: &mut R, dim: usize) -> PureState {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    PureState::normalized(v).expect("gaussian vector is nonzero")
}

/// `G G† / Tr(G G†)` with `G` a `dim x rank` complex Ginibre matrix.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new_unchecked(linalg::hermitian_part(&w.unscale(tr)))
}

/// Hermitian matrix with independent Gaussian entries of the given scale.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    linalg::hermitian_part(&g).scale(scale)
}

/// Random unit vector supported on one energy shell.
pub fn random_shell_vector<R: Rng>(
    rng: &mut R,
    basis: &MomentumBasis,
    shell: usize,
) -> ShellVector {
    let mut v = CVector::zeros(basis.len());
    for &i in basis.shells().members(shell) {
        v[i] = gaussian(rng);
    }
    let n = v.norm();
    ShellVector {
        shell,
        amplitudes: v.unscale(n),
    }
}

/// Hermitian matrix that is block diagonal over the basis' energy shells.
pub fn random_shell_diagonal_hermitian<R: Rng>(rng: &mut R, basis: &MomentumBasis) -> CMatrix {
    let full = random_hermitian(rng, basis.len(), 1.0);
    let shells = basis.shell_indices();
    CMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        if shells[i] == shells[j] {
            full[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
