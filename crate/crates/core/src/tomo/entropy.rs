use super::{DensityMatrix, TomoError};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// S = −Σ λ ln λ over eigenvalues above 1e-12.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64, TomoError> {
    let ev = rho.eigenvalues();
    if let Some(&min) = ev.first() {
        if min < -1e-10 {
            return Err(TomoError::NotPsd(min));
        }
    }
    Ok(ev.iter().filter(|&&l| l > 1e-12).map(|&l| -l * l.ln()).sum())
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(&a.matrix - &b.matrix)).iter().map(|l| l.abs()).sum::<f64>()
}

/// ⟨ψ|ρ|ψ⟩.
pub fn pure_state_fidelity(rho: &DensityMatrix, psi: &[C64]) -> f64 {
    let v = DVector::from_column_slice(psi);
    (v.adjoint() * &rho.matrix * &v)[(0, 0)].re
}

fn sqrt_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0))));
    &vecs * d * vecs.adjoint()
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))².
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let s = sqrt_psd(&a.matrix);
    let inner = &s * &b.matrix * &s;
    let tr: f64 = hermitian_eigenvalues(&inner).iter().map(|l| l.max(0.0).sqrt()).sum();
    tr * tr
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyScalingFit {
    pub alpha: f64,
    /// RMS of S_k − α ln(k+1).
    pub residual: f64,
}

/// Least squares of S_k = α ln(k+1) through the origin.
pub fn fit_entropy_scaling(points: &[(usize, f64)]) -> Result<EntropyScalingFit, TomoError> {
    let mut ks: Vec<usize> = points.iter().map(|p| p.0).filter(|&k| k >= 1).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 2 || points.iter().any(|p| p.0 == 0) {
        return Err(TomoError::DegenerateAbscissa);
    }
    let x = |k: usize| ((k + 1) as f64).ln();
    let sxy: f64 = points.iter().map(|&(k, s)| s * x(k)).sum();
    let sxx: f64 = points.iter().map(|&(k, _)| x(k) * x(k)).sum();
    let alpha = sxy / sxx;
    let residual = (points.iter().map(|&(k, s)| (s - alpha * x(k)).powi(2)).sum::<f64>() / points.len() as f64).sqrt();
    Ok(EntropyScalingFit { alpha, residual })
}
