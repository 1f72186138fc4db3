//! Density matrices, pure states and the global (von Neumann) measures.

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::basis::MomentumBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Max elementwise `|rho - rho†|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Max `|Tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Max `| |psi|^2 - 1 |` for a pure state.
pub const NORM_TOL: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_density(&matrix)?;
        Ok(Self { matrix })
    }

    /// Wraps a matrix the caller has produced by a validity-preserving map.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `I / |indices|` on the given index set.
    pub fn maximally_mixed_on(dim: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidDensity("empty support".into()));
        }
        let mut m = CMatrix::zeros(dim, dim);
        let w = 1.0 / indices.len() as f64;
        for &i in indices {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, len: dim });
            }
            m[(i, i)] = linalg::c(w);
        }
        Ok(Self { matrix: m })
    }

    pub fn validate(&self) -> Result<()> {
        check_density(&self.matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        global_purity(self)
    }

    pub fn entropy(&self) -> Result<f64> {
        global_entropy(self)
    }
}

impl Serialize for DensityMatrix {
    /// Nested rows of `[re, im]` pairs.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut rows = s.serialize_seq(Some(n))?;
        for i in 0..n {
            let row: Vec<[f64; 2]> = (0..n)
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    [z.re, z.im]
                })
                .collect();
            rows.serialize_element(&row)?;
        }
        rows.end()
    }
}

fn check_density(m: &CMatrix) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::InvalidDensity(format!(
            "shape {}x{} is not square and non-empty",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidDensity("non-finite entry".into()));
    }
    let defect = linalg::hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidDensity(format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
    }
    let min = linalg::hermitian_eigenvalues(m)?[0];
    if min < -PSD_TOL {
        return Err(Error::InvalidDensity(format!(
            "not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let n2 = amplitudes.norm_squared();
        if !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm; rejects the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(n),
        })
    }

    pub fn basis_vector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut a = CVector::zeros(dim);
        a[index] = linalg::c(1.0);
        Ok(Self { amplitudes: a })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }
}

/// `|psi><psi|`.
pub fn pure_to_density(psi: &PureState) -> DensityMatrix {
    let a = psi.amplitudes();
    DensityMatrix::new_unchecked(a * a.adjoint())
}

/// A unit vector supported on a single energy shell.
#[derive(Debug, Clone)]
pub struct ShellVector {
    pub shell: usize,
    pub amplitudes: CVector,
}

/// `rho = Σ_{ab} mu[a, b] |phi_a><phi_b|` with one normalized vector `phi_a`
/// per listed shell.
///
/// Every shell block of the result is rank one, so the state is effectively
/// pure whatever the rank of `mu`; its global purity equals `Σ |mu_ab|^2`.
pub fn appendix_a_state(
    basis: &MomentumBasis,
    shell_vectors: &[ShellVector],
    mu: &CMatrix,
) -> Result<DensityMatrix> {
    let n = basis.len();
    let s = shell_vectors.len();
    if s == 0 {
        return Err(Error::InvalidShellWeights("no shell vectors".into()));
    }
    if mu.nrows() != s || mu.ncols() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: mu.nrows(),
        });
    }
    let mut seen = vec![false; basis.num_shells()];
    for sv in shell_vectors {
        if sv.shell >= basis.num_shells() {
            return Err(Error::IndexOutOfRange {
                index: sv.shell,
                len: basis.num_shells(),
            });
        }
        if std::mem::replace(&mut seen[sv.shell], true) {
            return Err(Error::InvalidShellWeights(format!(
                "shell {} listed twice",
                sv.shell
            )));
        }
        if sv.amplitudes.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sv.amplitudes.len(),
            });
        }
        let shells = basis.shell_indices();
        if sv
            .amplitudes
            .iter()
            .enumerate()
            .any(|(i, a)| shells[i] != sv.shell && a.norm() > NORM_TOL)
        {
            return Err(Error::ShellSupport { shell: sv.shell });
        }
        let n2 = sv.amplitudes.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
    }
    check_shell_weights(mu)?;

    let phi = CMatrix::from_fn(n, s, |i, a| shell_vectors[a].amplitudes[i]);
    let rho = linalg::hermitian_part(&(&phi * mu * phi.adjoint()));
    Ok(DensityMatrix::new_unchecked(rho))
}

fn check_shell_weights(mu: &CMatrix) -> Result<()> {
    let defect = linalg::hermitian_defect(mu);
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidShellWeights(format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    let tr = mu.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidShellWeights(format!("trace {tr} != 1")));
    }
    let min = linalg::hermitian_eigenvalues(mu)?[0];
    if min < -PSD_TOL {
        return Err(Error::InvalidShellWeights(format!(
            "not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// `-Tr rho ln rho`.
pub fn global_entropy(rho: &DensityMatrix) -> Result<f64> {
    let values = linalg::hermitian_eigenvalues(rho.matrix())?;
    Ok(linalg::entropy_of_spectrum(values.iter()))
}

/// `Tr rho^2`, evaluated as the squared Frobenius norm.
pub fn global_purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().norm_squared()
}
