//! Free and Yukawa Hamiltonians, exact unitary evolution, and the Liouvillian
//! as an explicit superoperator.
//!
//! Sign convention: the Liouvillian acts as `L X = H X - X H`, so that
//! `exp(-i L t) rho = exp(-i H t) rho exp(i H t)`. On `|k1><k2|` the free part
//! has eigenvalue `E1 - E2`; the Bohr-frequency label used by the reduction
//! module is `alpha = E2 - E1`, the opposite sign. Entropies do not depend on
//! either choice.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::MomentumBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, I};
use crate::reduction::{self, BohrFrequencies, ShellDecomposition};
use crate::states::{DensityMatrix, HERMITIAN_TOL};

/// Largest Hilbert-space dimension for which a dense superoperator is built.
pub const SUPEROPERATOR_MAX_DIM: usize = 64;

/// Fourier transform of the screened Coulomb potential `A e^{-mu r} / (mu r)`:
/// `4 pi A / (mu (|k|^2 + mu^2))`.
pub fn yukawa_fourier(k: [f64; 3], coupling: f64, screening: f64) -> Result<f64> {
    yukawa_fourier_sq(k[0] * k[0] + k[1] * k[1] + k[2] * k[2], coupling, screening)
}

/// [`yukawa_fourier`] from the squared momentum transfer.
pub fn yukawa_fourier_sq(k2: f64, coupling: f64, screening: f64) -> Result<f64> {
    if !(screening.is_finite() && screening > 0.0) {
        return Err(Error::InvalidScreening(screening));
    }
    Ok(4.0 * std::f64::consts::PI * coupling / (screening * (k2 + screening * screening)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YukawaPotential {
    pub coupling: f64,
    pub screening: f64,
}

/// `H = diag(E_k) + V`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    h0: DVector<f64>,
    v: CMatrix,
    potential: Option<YukawaPotential>,
}

impl Hamiltonian {
    /// Free lattice energies plus `V_{kk'} = V~(k - k')`. Box-normalization
    /// constants are taken to be absorbed into `coupling`.
    pub fn yukawa(basis: &MomentumBasis, coupling: f64, screening: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "coupling {coupling} is not finite"
            )));
        }
        let n = basis.len();
        let mut v = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = yukawa_fourier_sq(basis.momentum_transfer_sq(i, j), coupling, screening)?;
                v[(i, j)] = c(x);
                v[(j, i)] = c(x);
            }
        }
        Ok(Self {
            h0: DVector::from_column_slice(basis.energies()),
            v,
            potential: Some(YukawaPotential {
                coupling,
                screening,
            }),
        })
    }

    pub fn free(basis: &MomentumBasis) -> Self {
        let n = basis.len();
        Self {
            h0: DVector::from_column_slice(basis.energies()),
            v: CMatrix::zeros(n, n),
            potential: None,
        }
    }

    /// Arbitrary diagonal free part plus Hermitian interaction.
    pub fn from_parts(h0: DVector<f64>, v: CMatrix) -> Result<Self> {
        if v.nrows() != h0.len() || v.ncols() != h0.len() {
            return Err(Error::DimensionMismatch {
                expected: h0.len(),
                found: v.nrows(),
            });
        }
        let defect = linalg::hermitian_defect(&v);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!(
                "interaction is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self {
            h0,
            v,
            potential: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.len()
    }

    pub fn free_energies(&self) -> &DVector<f64> {
        &self.h0
    }

    pub fn interaction(&self) -> &CMatrix {
        &self.v
    }

    pub fn potential(&self) -> Option<YukawaPotential> {
        self.potential
    }

    pub fn free_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.h0.map(c))
    }

    pub fn full(&self) -> CMatrix {
        self.free_matrix() + &self.v
    }

    pub fn propagator(&self) -> Result<Propagator> {
        Propagator::new(&self.full())
    }
}

/// Spectral form of `exp(-i H t)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(h)?;
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U(t) = W diag(e^{-i E t}) W†`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let w = &self.eigenvectors;
        let mut scaled = w.clone();
        for (col, &e) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            for z in scaled.column_mut(col).iter_mut() {
                *z *= phase;
            }
        }
        scaled * w.adjoint()
    }

    /// `U(t) X U(t)†` for any matrix.
    pub fn conjugate(&self, x: &CMatrix, t: f64) -> CMatrix {
        let u = self.unitary(t);
        &u * x * u.adjoint()
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let out = linalg::hermitian_part(&self.conjugate(rho.matrix(), t));
        Ok(DensityMatrix::new_unchecked(out))
    }
}

/// `rho(t) = e^{-iHt} rho e^{iHt}` through the eigendecomposition of `H`.
pub fn evolve(rho: &DensityMatrix, h: &Hamiltonian, t: f64) -> Result<DensityMatrix> {
    h.propagator()?.evolve(rho, t)
}

/// Dense `n^2 x n^2` matrix acting on column-major vectorized matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    n: usize,
    matrix: CMatrix,
}

impl Superoperator {
    /// `X -> H X - X H`.
    pub fn commutator_with(h: &CMatrix) -> Result<Self> {
        Self::commutator_with_cap(h, SUPEROPERATOR_MAX_DIM)
    }

    pub fn commutator_with_cap(h: &CMatrix, cap: usize) -> Result<Self> {
        let n = h.nrows();
        if n > cap {
            return Err(Error::SuperoperatorTooLarge { dim: n, cap });
        }
        let id = |a: usize, b: usize| if a == b { c(1.0) } else { c(0.0) };
        // (L X)_{ij} = Σ_kl [H_ik δ_jl - δ_ik H_lj] X_kl
        Ok(Self::from_elements(n, |i, j, k, l| {
            h[(i, k)] * id(j, l) - id(i, k) * h[(l, j)]
        }))
    }

    /// Builds the superoperator from its matrix elements
    /// `<i,j| L |k,l>` on the Liouville basis `|i><j|`.
    pub fn from_elements(
        n: usize,
        element: impl Fn(usize, usize, usize, usize) -> Complex64,
    ) -> Self {
        let matrix = CMatrix::from_fn(n * n, n * n, |r, col| {
            element(r % n, r / n, col % n, col / n)
        });
        Self { n, matrix }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `<i,j| L |k,l>`.
    pub fn element(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.matrix[(i + self.n * j, k + self.n * l)]
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        linalg::unvectorize(&(&self.matrix * linalg::vectorize(x)), self.n)
    }

    /// `exp(-i L t)` by scaling-and-squaring Padé, independent of the spectral
    /// route used by [`Propagator`].
    pub fn exponential(&self, t: f64) -> CMatrix {
        (&self.matrix * (-I * t)).exp()
    }

    pub fn propagate(&self, x: &CMatrix, t: f64) -> CMatrix {
        let v: CVector = self.exponential(t) * linalg::vectorize(x);
        linalg::unvectorize(&v, self.n)
    }

    pub fn sub(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            n: self.n,
            matrix: &self.matrix - &other.matrix,
        }
    }
}

/// The full Liouvillian `[H, ·]`.
pub fn liouvillian_superoperator(h: &Hamiltonian) -> Result<Superoperator> {
    Superoperator::commutator_with(&h.full())
}

/// `[H0, ·]`.
pub fn free_liouvillian(h: &Hamiltonian) -> Result<Superoperator> {
    Superoperator::commutator_with(&h.free_matrix())
}

/// `[V, ·]`.
pub fn interaction_liouvillian(h: &Hamiltonian) -> Result<Superoperator> {
    Superoperator::commutator_with(h.interaction())
}

/// Momentum-space kernel of the Yukawa interaction Liouvillian,
/// `δ(k1,k3) V~(k2 - k4) - δ(k2,k4) V~(k1 - k3)`.
///
/// This kernel is written in the `X -> X V - V X` orientation; it equals the
/// negative of `<k1,k2| [V, ·] |k3,k4>`.
pub fn interaction_liouvillian_element(
    basis: &MomentumBasis,
    (i1, i2, i3, i4): (usize, usize, usize, usize),
    coupling: f64,
    screening: f64,
) -> Result<f64> {
    let n = basis.len();
    if let Some(&bad) = [i1, i2, i3, i4].iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let mut x = 0.0;
    if i1 == i3 {
        x += yukawa_fourier_sq(basis.momentum_transfer_sq(i2, i4), coupling, screening)?;
    }
    if i2 == i4 {
        x -= yukawa_fourier_sq(basis.momentum_transfer_sq(i1, i3), coupling, screening)?;
    }
    Ok(x)
}

/// First-order reduced evolution `reduce(rho0 - i t [V, rho0])`.
///
/// The free part drops out because `[H0, rho0]` vanishes inside every shell.
/// The result agrees with the exact reduced state up to `O(t^2)`.
pub fn first_order_reduced_step(
    rho0: &DensityMatrix,
    h: &Hamiltonian,
    basis: &MomentumBasis,
    t: f64,
) -> Result<ShellDecomposition> {
    let drift = linalg::commutator(h.interaction(), rho0.matrix());
    let approx = rho0.matrix() - drift * (I * t);
    reduction::reduce_matrix(&approx, basis)
}

/// Largest matrix element of `op` connecting two different Bohr frequencies.
pub fn alpha_mixing(op: &Superoperator, basis: &MomentumBasis) -> Result<f64> {
    let n = op.hilbert_dim();
    if n != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: n,
        });
    }
    let freqs = BohrFrequencies::new(basis);
    let class: Vec<usize> = (0..n * n)
        .map(|r| freqs.class(basis, r % n, r / n))
        .collect();
    let m = op.matrix();
    let mut worst = 0.0_f64;
    for col in 0..n * n {
        for r in 0..n * n {
            if class[r] != class[col] {
                worst = worst.max(m[(r, col)].norm());
            }
        }
    }
    Ok(worst)
}

/// True iff `op` never carries weight between different Bohr-frequency
/// sectors beyond `tol`, i.e. it has the form `δ(alpha - alpha') A(beta, beta')`.
pub fn alpha_diagonality_test(op: &Superoperator, basis: &MomentumBasis, tol: f64) -> Result<bool> {
    Ok(alpha_mixing(op, basis)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::states::{pure_to_density, PureState};
    use std::f64::consts::PI;

    fn m1() -> MomentumBasis {
        MomentumBasis::cubic(1, 1.0).unwrap()
    }

    #[test]
    fn yukawa_fourier_examples() {
        assert!((yukawa_fourier([0.0; 3], 1.0, 1.0).unwrap() - 12.566370614359172).abs() < 1e-12);
        let k = [1.0, 1.0, 1.0];
        assert!((yukawa_fourier(k, 2.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((yukawa_fourier([0.0; 3], 1.0, 2.0).unwrap() - PI / 2.0).abs() < 1e-12);
        assert!(matches!(
            yukawa_fourier(k, 1.0, 0.0),
            Err(Error::InvalidScreening(_))
        ));
        assert!(yukawa_fourier(k, 1.0, -1.0).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let b = m1();
        let h = Hamiltonian::yukawa(&b, 0.0, 1.0).unwrap();
        assert_eq!(h.full(), Hamiltonian::free(&b).full());

        let h = Hamiltonian::yukawa(&b, 1.0, 1.0).unwrap();
        for i in 0..b.len() {
            assert!((h.interaction()[(i, i)].re - 4.0 * PI).abs() < 1e-12);
        }
        let o = b.index_of([0, 0, 0]).unwrap();
        let x = b.index_of([1, 0, 0]).unwrap();
        assert!((h.interaction()[(o, x)].re - 2.0 * PI).abs() < 1e-12);
        assert_eq!(h.interaction(), &h.interaction().transpose());
        assert!(h.interaction().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn evolve_identity_at_zero_and_stationary_states() {
        let b = m1();
        let h = Hamiltonian::yukawa(&b, 0.3, 1.0).unwrap();
        let mut rng = sampling::rng(3);
        let rho = sampling::random_density(&mut rng, b.len(), 4);
        let out = evolve(&rho, &h, 0.0).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - rho.matrix())) < 1e-13);

        // diagonal in the eigenbasis of H commutes with H
        let (_, w) = linalg::hermitian_eigen(&h.full()).unwrap();
        let p = CVector::from_fn(b.len(), |i, _| c((i + 1) as f64));
        let d = CMatrix::from_diagonal(&p.unscale(p.sum().re));
        let rho = DensityMatrix::new(linalg::hermitian_part(&(&w * d * w.adjoint()))).unwrap();
        for t in [0.3, 2.0, 17.0] {
            let out = evolve(&rho, &h, t).unwrap();
            assert!(linalg::max_abs(&(out.matrix() - rho.matrix())) < 1e-12);
        }
    }

    #[test]
    fn two_level_closed_form() {
        // H = g σx, rho00(t) = cos^2(g t)
        let g = 1.0;
        let h = Hamiltonian::from_parts(
            DVector::zeros(2),
            CMatrix::from_row_slice(2, 2, &[c(0.0), c(g), c(g), c(0.0)]),
        )
        .unwrap();
        let rho = pure_to_density(&PureState::basis_vector(2, 0).unwrap());
        for t in [PI / 4.0, 0.1, 1.3] {
            let out = evolve(&rho, &h, t).unwrap();
            assert!((out.matrix()[(0, 0)].re - (g * t).cos().powi(2)).abs() < 1e-14);
            assert!(
                (out.matrix()[(0, 1)] - Complex64::new(0.0, (g * t).sin() * (g * t).cos())).norm()
                    < 1e-14
            );
        }
        let out = evolve(&rho, &h, PI / 4.0).unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn propagator_is_unitary() {
        let mut rng = sampling::rng(9);
        let h = sampling::random_hermitian(&mut rng, 27, 1.0);
        let p = Propagator::new(&h).unwrap();
        let u = p.unitary(1.7);
        let id = CMatrix::identity(27, 27);
        assert!(linalg::max_abs(&(&u * u.adjoint() - id)) < 1e-10);
    }

    #[test]
    fn superoperator_examples() {
        let b = m1();
        let h0 = Hamiltonian::free(&b);
        let l0 = free_liouvillian(&h0).unwrap();
        for i in 0..b.len() {
            for j in 0..b.len() {
                let e = c(b.energy(i) - b.energy(j));
                assert_eq!(l0.element(i, j, i, j), e);
            }
        }
        let id = Superoperator::commutator_with(&CMatrix::identity(5, 5)).unwrap();
        assert!(id.matrix().iter().all(|z| z.norm() == 0.0));

        let big = CMatrix::identity(65, 65);
        assert!(matches!(
            Superoperator::commutator_with(&big),
            Err(Error::SuperoperatorTooLarge { dim: 65, cap: 64 })
        ));
    }

    #[test]
    fn superoperator_applies_commutator() {
        let mut rng = sampling::rng(21);
        let h = sampling::random_hermitian(&mut rng, 6, 1.0);
        let x = CMatrix::from_fn(6, 6, |_, _| {
            Complex64::new(rng_f(&mut rng), rng_f(&mut rng))
        });
        let l = Superoperator::commutator_with(&h).unwrap();
        assert!(linalg::max_abs(&(l.apply(&x) - linalg::commutator(&h, &x))) < 1e-10);
        // Hermitian superoperator => real spectrum
        assert!(linalg::hermitian_defect(l.matrix()) < 1e-12);
        let spec = linalg::hermitian_eigenvalues(l.matrix()).unwrap();
        assert!(spec.iter().all(|x| x.is_finite()));
    }

    fn rng_f(rng: &mut sampling::SeededRng) -> f64 {
        use rand::Rng;
        rng.random_range(-1.0..1.0)
    }

    #[test]
    fn superoperator_exponential_matches_conjugation() {
        let mut rng = sampling::rng(7);
        let h = sampling::random_hermitian(&mut rng, 4, 1.0);
        let rho = sampling::random_density(&mut rng, 4, 4);
        let t = 0.8;
        let l = Superoperator::commutator_with(&h).unwrap();
        let via_super = l.propagate(rho.matrix(), t);
        let via_eigen = Propagator::new(&h).unwrap().evolve(&rho, t).unwrap();
        assert!(linalg::max_abs(&(via_super - via_eigen.matrix())) < 1e-9);
    }

    #[test]
    fn liouvillian_splits_into_free_and_interaction() {
        let b = MomentumBasis::cubic(1, 1.0).unwrap();
        let h = Hamiltonian::yukawa(&b, 0.4, 1.3).unwrap();
        let l = liouvillian_superoperator(&h).unwrap();
        let l0 = free_liouvillian(&h).unwrap();
        let li = interaction_liouvillian(&h).unwrap();
        assert!(linalg::max_abs(&(l.sub(&l0).matrix() - li.matrix())) < 1e-12);
    }

    #[test]
    fn interaction_element_examples() {
        let b = m1();
        let (a, mu) = (1.0, 1.0);
        let el = |q| interaction_liouvillian_element(&b, q, a, mu).unwrap();
        assert_eq!(el((4, 4, 4, 4)), 0.0);
        let (i1, i2, i4) = (0, 5, 9);
        let expect = yukawa_fourier_sq(b.momentum_transfer_sq(i2, i4), a, mu).unwrap();
        assert_eq!(el((i1, i2, i1, i4)), expect);
        assert_eq!(el((0, 1, 2, 3)), 0.0);
        assert!(interaction_liouvillian_element(&b, (0, 0, 0, 27), a, mu).is_err());
    }

    #[test]
    fn interaction_kernel_is_negative_commutator() {
        let b = m1();
        let (a, mu) = (0.7, 1.2);
        let h = Hamiltonian::yukawa(&b, a, mu).unwrap();
        let li = interaction_liouvillian(&h).unwrap();
        let n = b.len();
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    for i4 in 0..n {
                        let k =
                            interaction_liouvillian_element(&b, (i1, i2, i3, i4), a, mu).unwrap();
                        assert_eq!(
                            -k,
                            li.element(i1, i2, i3, i4).re,
                            "at {:?}",
                            (i1, i2, i3, i4)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn first_order_examples() {
        let b = m1();
        let mut rng = sampling::rng(5);
        let rho = sampling::random_density(&mut rng, b.len(), 3);
        let h = Hamiltonian::yukawa(&b, 0.5, 1.0).unwrap();
        let base = reduction::reduce(&rho, &b).unwrap();
        let at0 = first_order_reduced_step(&rho, &h, &b, 0.0).unwrap();
        assert_eq!(at0.assemble(), base.assemble());
        let free = Hamiltonian::yukawa(&b, 0.0, 1.0).unwrap();
        let step = first_order_reduced_step(&rho, &free, &b, 3.0).unwrap();
        assert_eq!(step.assemble(), base.assemble());
    }

    #[test]
    fn alpha_diagonality_examples() {
        let b = m1();
        let h = Hamiltonian::yukawa(&b, 1.0, 1.0).unwrap();
        assert!(alpha_diagonality_test(&free_liouvillian(&h).unwrap(), &b, 1e-10).unwrap());
        assert!(!alpha_diagonality_test(&interaction_liouvillian(&h).unwrap(), &b, 1e-10).unwrap());

        let mut rng = sampling::rng(2);
        let v = sampling::random_shell_diagonal_hermitian(&mut rng, &b);
        let commuting =
            Hamiltonian::from_parts(DVector::from_column_slice(b.energies()), v).unwrap();
        assert!(
            alpha_diagonality_test(&interaction_liouvillian(&commuting).unwrap(), &b, 1e-10)
                .unwrap()
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn unitarity_preserved(seed in any::<u64>(), rank in 1usize..6, t in -5.0f64..5.0) {
                let mut rng = sampling::rng(seed);
                let h = sampling::random_hermitian(&mut rng, 9, 1.0);
                let rho = sampling::random_density(&mut rng, 9, rank);
                let out = Propagator::new(&h).unwrap().evolve(&rho, t).unwrap();
                prop_assert!(out.validate().is_ok());
                prop_assert!((out.purity() - rho.purity()).abs() <= 1e-10);
            }

            #[test]
            fn group_law(seed in any::<u64>(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
                let mut rng = sampling::rng(seed);
                let h = sampling::random_hermitian(&mut rng, 8, 1.0);
                let rho = sampling::random_density(&mut rng, 8, 8);
                let p = Propagator::new(&h).unwrap();
                let two = p.evolve(&p.evolve(&rho, t1).unwrap(), t2).unwrap();
                let one = p.evolve(&rho, t1 + t2).unwrap();
                prop_assert!(linalg::max_abs(&(two.matrix() - one.matrix())) <= 1e-9);
            }
        }
    }
}
