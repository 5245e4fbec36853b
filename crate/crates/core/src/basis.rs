//! Basis layout shared by states and operators.
//!
//! A basis is a mixed-radix product of spin axes followed by one Fock axis,
//! with the Fock number varying fastest. Each spin axis is a Dicke ladder
//! indexed by its excitation count m (the number of spins in |1⟩). In the
//! full site-resolved basis every axis is a single site, so the index of a
//! basis state is `bits · (n_max + 1) + n` with site 0 as the most
//! significant bit and bit value 1 meaning |1⟩ (σ_z = −1).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Full,
    Subensemble,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    kind: BasisKind,
    groups: Vec<Vec<usize>>,
    n_max: usize,
}

impl Basis {
    pub fn full(n_spins: usize, n_max: usize) -> Self {
        Self {
            kind: BasisKind::Full,
            groups: (0..n_spins).map(|i| vec![i]).collect(),
            n_max,
        }
    }

    /// `groups` lists the site indices belonging to each Dicke ladder.
    pub fn subensemble(groups: Vec<Vec<usize>>, n_max: usize) -> Self {
        Self { kind: BasisKind::Subensemble, groups, n_max }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_size(&self, j: usize) -> usize {
        self.groups[j].len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn n_spins(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Axis sizes, spin ladders first and the Fock axis last.
    pub fn axis_dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.groups.iter().map(|g| g.len() + 1).collect();
        dims.push(self.fock_dim());
        dims
    }

    /// Total dimension, or `None` on overflow.
    pub fn checked_dim(&self) -> Option<usize> {
        self.axis_dims().into_iter().try_fold(1usize, |acc, d| acc.checked_mul(d))
    }

    pub fn dim(&self) -> usize {
        self.checked_dim().expect("basis dimension overflows usize")
    }

    pub fn spin_dim(&self) -> usize {
        self.dim() / self.fock_dim()
    }

    /// Stride of each axis in the flattened index.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.axis_dims();
        let mut strides = vec![1usize; dims.len()];
        for a in (0..dims.len() - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        strides
    }

    /// Splits a flat index into per-group excitation counts and the Fock number.
    pub fn decode(&self, mut index: usize) -> (Vec<usize>, usize) {
        let n = index % self.fock_dim();
        index /= self.fock_dim();
        let mut occ = vec![0usize; self.groups.len()];
        for j in (0..self.groups.len()).rev() {
            let d = self.groups[j].len() + 1;
            occ[j] = index % d;
            index /= d;
        }
        (occ, n)
    }

    pub fn encode(&self, occupations: &[usize], n: usize) -> usize {
        debug_assert_eq!(occupations.len(), self.groups.len());
        let mut index = 0usize;
        for (j, &m) in occupations.iter().enumerate() {
            index = index * (self.groups[j].len() + 1) + m;
        }
        index * self.fock_dim() + n
    }

    /// Ladder holding `site`, with its position inside the ladder.
    pub fn locate_site(&self, site: usize) -> Option<(usize, usize)> {
        self.groups
            .iter()
            .enumerate()
            .find_map(|(j, g)| g.iter().position(|&s| s == site).map(|p| (j, p)))
    }

    /// Same layout with a different Fock truncation.
    pub fn with_n_max(&self, n_max: usize) -> Self {
        Self { n_max, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subensemble_dimension() {
        let b = Basis::subensemble(vec![(0..5).collect(), (5..10).collect()], 10);
        assert_eq!(b.dim(), 6 * 6 * 11);
        assert_eq!(b.n_spins(), 10);
    }

    #[test]
    fn full_basis_index_layout() {
        let b = Basis::full(3, 2);
        assert_eq!(b.dim(), 8 * 3);
        // site 0 excited, site 2 excited, n = 1  -> bits 101 = 5
        assert_eq!(b.encode(&[1, 0, 1], 1), 5 * 3 + 1);
        assert_eq!(b.decode(5 * 3 + 1), (vec![1, 0, 1], 1));
        assert_eq!(b.strides(), vec![12, 6, 3, 1]);
    }

    #[test]
    fn decode_inverts_encode() {
        let b = Basis::subensemble(vec![vec![0, 1], vec![2], vec![3, 4, 5]], 3);
        for i in 0..b.dim() {
            let (occ, n) = b.decode(i);
            assert_eq!(b.encode(&occ, n), i);
        }
    }
}
