//! Discrete momentum lattices and their energy-shell structure.
//!
//! Points are integer multiples of a lattice spacing, `k = n * delta_k`, with
//! unperturbed energy `E_k = |k|^2` (units with `2m = 1`). Points of equal
//! energy form a shell; the shells are the degeneracy subspaces of the free
//! Hamiltonian and carry the whole effective-state reduction.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest basis `build` will produce unless told otherwise.
pub const DEFAULT_MAX_POINTS: usize = 4096;

/// Shell-grouping tolerance in units of `delta_k^2`.
pub const SHELL_RELATIVE_TOL: f64 = 1e-9;

/// Energy shells: ascending distinct energies with their member indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellTable {
    energies: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl ShellTable {
    /// Groups indices by energy. Energies are visited in ascending order and a
    /// new shell opens once an energy lies more than `tol` above the first
    /// energy of the current shell. Members are listed in ascending index order.
    pub fn from_energies(energies: &[f64], tol: f64) -> Self {
        let mut order: Vec<usize> = (0..energies.len()).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));

        let mut shell_energies: Vec<f64> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for idx in order {
            let e = energies[idx];
            match shell_energies.last() {
                Some(&first) if e - first <= tol => members.last_mut().unwrap().push(idx),
                _ => {
                    shell_energies.push(e);
                    members.push(vec![idx]);
                }
            }
        }
        for m in &mut members {
            m.sort_unstable();
        }
        Self {
            energies: shell_energies,
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, shell: usize) -> f64 {
        self.energies[shell]
    }

    pub fn members(&self, shell: usize) -> &[usize] {
        &self.members[shell]
    }

    pub fn all_members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn degeneracy(&self, shell: usize) -> usize {
        self.members[shell].len()
    }

    pub fn degeneracies(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// True when every shell is one-dimensional.
    pub fn is_nondegenerate(&self) -> bool {
        self.members.iter().all(|m| m.len() == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    /// `n ∈ {-M..M}^3`.
    Cubic { half_width: u32 },
    /// `n = (j, 0, 0)`, `j ∈ {1..N}`: every energy distinct.
    Line { points: u32 },
    /// Arbitrary caller-supplied points.
    Custom,
}

/// Finite momentum basis with energies and shell partition.
///
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct MomentumBasis {
    kind: LatticeKind,
    delta_k: f64,
    points: Vec<[i64; 3]>,
    energies: Vec<f64>,
    shells: ShellTable,
    shell_index: Vec<usize>,
    tol: f64,
}

impl MomentumBasis {
    /// The cubic lattice `{-M..M}^3` in lexicographic order of `n`.
    pub fn cubic(half_width: u32, delta_k: f64) -> Result<Self> {
        Self::cubic_with_cap(half_width, delta_k, DEFAULT_MAX_POINTS)
    }

    pub fn cubic_with_cap(half_width: u32, delta_k: f64, cap: usize) -> Result<Self> {
        let side = 2 * half_width as u128 + 1;
        let count = side * side * side;
        if count > cap as u128 {
            return Err(Error::BasisTooLarge { points: count, cap });
        }
        let m = half_width as i64;
        let mut points = Vec::with_capacity(count as usize);
        for a in -m..=m {
            for b in -m..=m {
                for c in -m..=m {
                    points.push([a, b, c]);
                }
            }
        }
        Self::assemble(LatticeKind::Cubic { half_width }, points, delta_k)
    }

    /// The one-dimensional lattice `k = j * delta_k`, `j = 1..=N`.
    pub fn line(points: u32, delta_k: f64) -> Result<Self> {
        Self::line_with_cap(points, delta_k, DEFAULT_MAX_POINTS)
    }

    pub fn line_with_cap(points: u32, delta_k: f64, cap: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidLattice(
                "line lattice needs at least one point".into(),
            ));
        }
        if points as usize > cap {
            return Err(Error::BasisTooLarge {
                points: points as u128,
                cap,
            });
        }
        let pts = (1..=points as i64).map(|j| [j, 0, 0]).collect();
        Self::assemble(LatticeKind::Line { points }, pts, delta_k)
    }

    /// Basis over arbitrary integer points, kept in the given order.
    pub fn from_points(points: Vec<[i64; 3]>, delta_k: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidLattice("no points".into()));
        }
        Self::assemble(LatticeKind::Custom, points, delta_k)
    }

    fn assemble(kind: LatticeKind, points: Vec<[i64; 3]>, delta_k: f64) -> Result<Self> {
        if !(delta_k.is_finite() && delta_k > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "delta_k must be positive and finite, got {delta_k}"
            )));
        }
        let dk2 = delta_k * delta_k;
        let energies: Vec<f64> = points.iter().map(|n| dk2 * norm2(n) as f64).collect();
        let tol = SHELL_RELATIVE_TOL * dk2;
        let shells = ShellTable::from_energies(&energies, tol);
        let mut shell_index = vec![0; points.len()];
        for (s, members) in shells.all_members().iter().enumerate() {
            for &i in members {
                shell_index[i] = s;
            }
        }
        Ok(Self {
            kind,
            delta_k,
            points,
            energies,
            shells,
            shell_index,
            tol,
        })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn delta_k(&self) -> f64 {
        self.delta_k
    }

    /// Integer lattice coordinates `n` of every point.
    pub fn points(&self) -> &[[i64; 3]] {
        &self.points
    }

    pub fn momentum(&self, index: usize) -> [f64; 3] {
        let n = self.points[index];
        [
            n[0] as f64 * self.delta_k,
            n[1] as f64 * self.delta_k,
            n[2] as f64 * self.delta_k,
        ]
    }

    /// `|k_a - k_b|^2`, computed on the integer lattice before scaling.
    pub fn momentum_transfer_sq(&self, a: usize, b: usize) -> f64 {
        let (na, nb) = (self.points[a], self.points[b]);
        let d = [na[0] - nb[0], na[1] - nb[1], na[2] - nb[2]];
        self.delta_k * self.delta_k * norm2(&d) as f64
    }

    pub fn energy(&self, index: usize) -> f64 {
        self.energies[index]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn shells(&self) -> &ShellTable {
        &self.shells
    }

    pub fn num_shells(&self) -> usize {
        self.shells.len()
    }

    /// Tolerance used to group energies into shells.
    pub fn energy_tolerance(&self) -> f64 {
        self.tol
    }

    pub fn shell_of(&self, index: usize) -> Result<usize> {
        self.shell_index
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
    }

    /// Shell id per point.
    pub fn shell_indices(&self) -> &[usize] {
        &self.shell_index
    }

    pub fn index_of(&self, n: [i64; 3]) -> Option<usize> {
        match self.kind {
            LatticeKind::Cubic { half_width } => {
                let m = half_width as i64;
                if n.iter().any(|&x| x.abs() > m) {
                    return None;
                }
                let side = 2 * m + 1;
                Some((((n[0] + m) * side + (n[1] + m)) * side + (n[2] + m)) as usize)
            }
            _ => self.points.iter().position(|&p| p == n),
        }
    }

    /// JSON-ready description of the basis.
    pub fn document(&self) -> BasisDocument {
        let (half_width, line_points) = match self.kind {
            LatticeKind::Cubic { half_width } => (Some(half_width), None),
            LatticeKind::Line { points } => (None, Some(points)),
            LatticeKind::Custom => (None, None),
        };
        BasisDocument {
            half_width,
            line_points,
            delta_k: self.delta_k,
            points: self.points.clone(),
            shell_energies: self.shells.energies().to_vec(),
            shell_members: self.shells.all_members().to_vec(),
        }
    }
}

/// Serialized form: `{M, delta_k, points, shell_energies, shell_members}`
/// (`N` replaces `M` for line lattices).
#[derive(Debug, Clone, Serialize)]
pub struct BasisDocument {
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub half_width: Option<u32>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub line_points: Option<u32>,
    pub delta_k: f64,
    pub points: Vec<[i64; 3]>,
    pub shell_energies: Vec<f64>,
    pub shell_members: Vec<Vec<usize>>,
}

impl Serialize for MomentumBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.document().serialize(s)
    }
}

fn norm2(n: &[i64; 3]) -> i64 {
    n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
}
