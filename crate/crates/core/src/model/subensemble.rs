use super::{DimensionCap, HamiltonianOperator, ModelError, SubensembleSpec};
use crate::{SparseOperator, C64};

/// Builds the grouped Hamiltonian
///
/// ```text
/// H = Σ_j g_j (N_j + 2 S_z^j)(a e^{iφ_j} + a† e^{−iφ_j}) − δ a†a + 2B Σ_j S_x^j
/// ```
///
/// on the product of spin-(N_j/2) ladders and the truncated Fock space.
/// `g_j` is the per-spin coupling (η b Ω, mode amplitude included).
pub fn build_subensemble_hamiltonian(
    spec: &SubensembleSpec,
    delta: f64,
    b_field: f64,
    total_n: usize,
    n_max: usize,
    cap: DimensionCap,
) -> Result<HamiltonianOperator, ModelError> {
    spec.validate()?;
    if spec.n_spins() != total_n {
        return Err(ModelError::InvalidSpec(format!(
            "groups hold {} spins but the model has {total_n}",
            spec.n_spins()
        )));
    }
    let basis = spec.basis(n_max);
    let dim = cap.check(&basis)?;
    let fock = n_max + 1;
    let strides = basis.strides();
    let sizes: Vec<usize> = spec.groups.iter().map(|g| g.n_spins()).collect();
    let couplings: Vec<C64> = spec.groups.iter().map(|g| g.complex_coupling()).collect();

    let mut triplets = Vec::with_capacity(dim * (3 + 2 * sizes.len()));
    let spin_states = dim / fock;
    for spin_index in 0..spin_states {
        let (occ, _) = basis.decode(spin_index * fock);
        // N_j + 2 S_z^j = 2 (N_j − m_j)
        let drive: C64 = occ
            .iter()
            .zip(&sizes)
            .zip(&couplings)
            .map(|((&m, &nj), &z)| z * (2.0 * (nj - m) as f64))
            .sum();
        for n in 0..fock {
            let row = spin_index * fock + n;
            if n > 0 {
                triplets.push((row, row, C64::new(-delta * n as f64, 0.0)));
            }
            if n + 1 < fock {
                let amp = ((n + 1) as f64).sqrt();
                triplets.push((row, row + 1, drive * amp));
                triplets.push((row + 1, row, drive.conj() * amp));
            }
            if b_field != 0.0 {
                for (j, (&m, &nj)) in occ.iter().zip(&sizes).enumerate() {
                    if m < nj {
                        // 2B <m+1|S_x|m> = B sqrt((m+1)(N_j − m))
                        let v = b_field * (((m + 1) * (nj - m)) as f64).sqrt();
                        let col = row + strides[j];
                        triplets.push((col, row, C64::new(v, 0.0)));
                        triplets.push((row, col, C64::new(v, 0.0)));
                    }
                }
            }
        }
    }
    Ok(HamiltonianOperator { basis, matrix: SparseOperator::from_triplets(dim, triplets) })
}
