//! Small dense helpers: spin matrices, ladder rotations, Hermitian spectra.

use crate::C64;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Spin-(n/2) angular momentum matrices in the excitation basis m = 0..=n,
/// where m counts spins in |1⟩ and S_z|m⟩ = (n/2 − m)|m⟩.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
}

/// ⟨m−1|S_+|m⟩ for a ladder of `n` spins.
pub fn raising_element(n: usize, m: usize) -> f64 {
    debug_assert!(m >= 1 && m <= n);
    ((m * (n - m + 1)) as f64).sqrt()
}

pub fn spin_matrices(n: usize) -> SpinMatrices {
    let d = n + 1;
    let mut sx = DMatrix::from_element(d, d, ZERO);
    let mut sy = DMatrix::from_element(d, d, ZERO);
    let mut sz = DMatrix::from_element(d, d, ZERO);
    for m in 0..d {
        sz[(m, m)] = C64::new(n as f64 / 2.0 - m as f64, 0.0);
    }
    for m in 1..d {
        let e = raising_element(n, m);
        // S_+ = |m-1><m| e
        sx[(m - 1, m)] = C64::new(e / 2.0, 0.0);
        sx[(m, m - 1)] = C64::new(e / 2.0, 0.0);
        sy[(m - 1, m)] = C64::new(0.0, -e / 2.0);
        sy[(m, m - 1)] = C64::new(0.0, e / 2.0);
    }
    SpinMatrices { sx, sy, sz }
}

fn unit(axis: [f64; 3]) -> [f64; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    assert!(n > 0.0, "rotation axis must be nonzero");
    [axis[0] / n, axis[1] / n, axis[2] / n]
}

/// exp(−i θ k·S) on a Dicke ladder of `n` spins.
pub fn ladder_rotation(n: usize, axis: [f64; 3], angle: f64) -> DMatrix<C64> {
    if n == 1 {
        return qubit_rotation(axis, angle);
    }
    let k = unit(axis);
    let s = spin_matrices(n);
    let gen = s.sx * C64::new(k[0], 0.0) + s.sy * C64::new(k[1], 0.0) + s.sz * C64::new(k[2], 0.0);
    hermitian_function(&gen, |lam| C64::from_polar(1.0, -angle * lam))
}

/// exp(−i θ k·σ/2) for a single spin.
pub fn qubit_rotation(axis: [f64; 3], angle: f64) -> DMatrix<C64> {
    let k = unit(axis);
    let c = (angle / 2.0).cos();
    let s = (angle / 2.0).sin();
    // cos I − i sin (kx σx + ky σy + kz σz)
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, -s * k[2]),
            C64::new(-s * k[1], -s * k[0]),
            C64::new(s * k[1], -s * k[0]),
            C64::new(c, s * k[2]),
        ],
    )
}

/// Rotation (axis, angle) taking the unit vector `dir` onto +z.
pub fn rotation_to_z(dir: [f64; 3]) -> ([f64; 3], f64) {
    let d = unit(dir);
    // axis = d × z
    let axis = [d[1], -d[0], 0.0];
    let s = (axis[0] * axis[0] + axis[1] * axis[1]).sqrt();
    let angle = d[2].clamp(-1.0, 1.0).acos();
    if s < 1e-15 {
        if d[2] > 0.0 {
            ([0.0, 0.0, 1.0], 0.0)
        } else {
            ([1.0, 0.0, 0.0], std::f64::consts::PI)
        }
    } else {
        ([axis[0] / s, axis[1] / s, 0.0], angle)
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// f(M) for Hermitian M through its spectrum.
pub fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&l| f(l))));
    &vecs * d * vecs.adjoint()
}

/// Real symmetric eigen-decomposition, eigenvalues ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commutator_norm(a: &DMatrix<C64>, b: &DMatrix<C64>, c: &DMatrix<C64>) -> f64 {
        // |[a, b] - i c|
        let lhs = a * b - b * a;
        (lhs - c * C64::new(0.0, 1.0)).norm()
    }

    #[test]
    fn spin_algebra_holds() {
        for n in 1..7 {
            let s = spin_matrices(n);
            assert!(commutator_norm(&s.sx, &s.sy, &s.sz) < 1e-12);
            assert!(commutator_norm(&s.sy, &s.sz, &s.sx) < 1e-12);
            let casimir = &s.sx * &s.sx + &s.sy * &s.sy + &s.sz * &s.sz;
            let j = n as f64 / 2.0;
            let expect = DMatrix::<C64>::identity(n + 1, n + 1) * C64::new(j * (j + 1.0), 0.0);
            assert!((casimir - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn qubit_rotation_matches_ladder_formula() {
        let axis = [0.3, -0.4, 0.86];
        let q = qubit_rotation(axis, 1.234);
        let s = spin_matrices(1);
        let k = unit(axis);
        let gen = s.sx * C64::new(k[0], 0.0) + s.sy * C64::new(k[1], 0.0) + s.sz * C64::new(k[2], 0.0);
        let viaeig = hermitian_function(&gen, |l| C64::from_polar(1.0, -1.234 * l));
        assert!((q - viaeig).norm() < 1e-12);
    }

    #[test]
    fn rotation_to_z_maps_direction_measurement() {
        // <psi|U^† σ_z U|psi> = <psi|σ·n|psi> for all psi
        let s = spin_matrices(1);
        let two = C64::new(2.0, 0.0);
        for dir in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0], [0.2, -0.5, 0.3], [0.0, 0.0, 1.0]] {
            let (axis, angle) = rotation_to_z(dir);
            let u = qubit_rotation(axis, angle);
            let d = unit(dir);
            let sn = (&s.sx * C64::new(d[0], 0.0) + &s.sy * C64::new(d[1], 0.0) + &s.sz * C64::new(d[2], 0.0)) * two;
            let back = u.adjoint() * (&s.sz * two) * &u;
            assert!((back - sn).norm() < 1e-12, "{dir:?}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert!((ln_binomial(60, 30) - binomial(60, 30).ln()).abs() < 1e-10);
    }
}
