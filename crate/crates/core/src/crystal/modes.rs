use super::{CrystalError, CrystalSolution, TrapConfig};
use crate::linalg::symmetric_eigen;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Transverse mode frequencies (rad/s, descending) and orthonormal vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    pub frequencies: Vec<f64>,
    /// `vectors[k][i]` is the amplitude of mode k on ion i.
    pub vectors: Vec<Vec<f64>>,
}

impl ModeTable {
    /// Wraps an externally supplied table, e.g. from calibrated data.
    pub fn from_parts(frequencies: Vec<f64>, vectors: Vec<Vec<f64>>) -> Result<Self, CrystalError> {
        let table = Self { frequencies, vectors };
        table.check()?;
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn n_ions(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// Largest |⟨b_k, b_l⟩ − δ_kl|.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, a) in self.vectors.iter().enumerate() {
            for (l, b) in self.vectors.iter().enumerate() {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                worst = worst.max((d - if k == l { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    fn check(&self) -> Result<(), CrystalError> {
        if self.vectors.len() != self.frequencies.len() {
            return Err(CrystalError::Format("frequency and vector counts differ".into()));
        }
        let n = self.n_ions();
        if self.vectors.iter().any(|v| v.len() != n) {
            return Err(CrystalError::Format("mode vectors have different lengths".into()));
        }
        if self.orthonormality_error() > 1e-6 {
            return Err(CrystalError::Format("mode vectors are not orthonormal".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelector {
    /// Highest transverse mode.
    Com,
    /// Zero-based rank in descending frequency.
    Index(usize),
}

/// Transverse (y) Hessian in units of ω_z².
pub(crate) fn transverse_hessian(trap: &TrapConfig, positions: &[[f64; 2]]) -> DMatrix<f64> {
    let n = positions.len();
    let by2 = trap.beta_y().powi(2);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = by2;
    }
    for i in 0..n {
        for j in i + 1..n {
            let r = super::dist(positions[i], positions[j]);
            let c = 1.0 / (r * r * r);
            a[(i, j)] = c;
            a[(j, i)] = c;
            a[(i, i)] -= c;
            a[(j, j)] -= c;
        }
    }
    a
}

/// Orthonormal basis of a degenerate eigenspace fixed by Gram–Schmidt of
/// the projected coordinate vectors, in coordinate order.
fn canonical_subspace_basis(block: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let n = block.nrows();
    let d = block.ncols();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(d);
    for i in 0..n {
        if out.len() == d {
            break;
        }
        // P e_i = V V^T e_i
        let mut v = block * block.row(i).transpose();
        for u in &out {
            let p = u.dot(&v);
            v -= u * p;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / norm);
        }
    }
    out
}

fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Transverse normal modes of a converged planar crystal.
pub fn transverse_modes(trap: &TrapConfig, solution: &CrystalSolution) -> Result<ModeTable, CrystalError> {
    if !solution.converged {
        return Err(CrystalError::NotConverged);
    }
    let a = transverse_hessian(trap, &solution.positions);
    let n = a.nrows();
    let (vals, vecs) = symmetric_eigen(&a);
    if let Some(&lowest) = vals.first() {
        if lowest < 0.0 {
            return Err(CrystalError::ImaginaryFrequency(lowest));
        }
    }
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);

    // descending order, degenerate clusters canonicalized
    let mut frequencies = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut hi = n;
    while hi > 0 {
        let mut lo = hi - 1;
        while lo > 0 && (vals[hi - 1] - vals[lo - 1]).abs() <= 1e-9 * scale {
            lo -= 1;
        }
        let block = vecs.columns(lo, hi - lo).into_owned();
        let basis = if hi - lo > 1 { canonical_subspace_basis(&block) } else { vec![block.column(0).into_owned()] };
        for (k, mut v) in basis.into_iter().enumerate() {
            fix_sign(&mut v);
            frequencies.push(trap.omega_z * vals[hi - 1 - k].sqrt());
            vectors.push(v.iter().copied().collect());
        }
        hi = lo;
    }
    Ok(ModeTable { frequencies, vectors })
}

/// Returns (frequency, normalized mode vector).
pub fn select_mode(table: &ModeTable, which: ModeSelector) -> Result<(f64, Vec<f64>), CrystalError> {
    let index = match which {
        ModeSelector::Com => 0,
        ModeSelector::Index(k) => k,
    };
    if index >= table.len() {
        return Err(CrystalError::IndexOutOfRange { index, len: table.len() });
    }
    let v = &table.vectors[index];
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((table.frequencies[index], v.iter().map(|x| x / norm).collect()))
}
