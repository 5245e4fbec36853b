use super::sampling::rotate_to_direction;
use super::MeasureError;
use crate::engine::StateVector;
use crate::{Axis, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Distribution of a total-spin component S_axis = Σ_i σ_axis^i / 2.
/// `probabilities[m]` is the weight of the eigenvalue N/2 − m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinHistogram {
    pub axis: Axis,
    pub n_spins: usize,
    pub probabilities: Vec<f64>,
}

impl SpinHistogram {
    /// (eigenvalue, probability) pairs from +N/2 down to −N/2.
    pub fn bins(&self) -> Vec<(f64, f64)> {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(m, &p)| (0.5 * self.n_spins as f64 - m as f64, p))
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn max_probability(&self) -> f64 {
        self.probabilities.iter().copied().fold(0.0, f64::max)
    }
}

/// Exact distribution of S_axis.
pub fn total_spin_distribution(state: &StateVector, axis: Axis) -> SpinHistogram {
    let rotated = rotate_to_direction(state, axis.unit());
    let n = state.basis.n_spins();
    let f = state.basis.fock_dim();
    let mut probs = vec![0.0; n + 1];
    let spin_dim = state.basis.spin_dim();
    let dims: Vec<usize> = state.basis.groups().iter().map(|g| g.len() + 1).collect();
    for s in 0..spin_dim {
        let mut rest = s;
        let mut m = 0;
        for d in dims.iter().rev() {
            m += rest % d;
            rest /= d;
        }
        probs[m] += rotated.amplitudes[s * f..(s + 1) * f].iter().map(C64::norm_sqr).sum::<f64>();
    }
    SpinHistogram { axis, n_spins: n, probabilities: probs }
}

/// Histogram of `shots` simulated measurements of S_axis.
pub fn sample_total_spin(state: &StateVector, axis: Axis, shots: usize, seed: u64) -> SpinHistogram {
    let exact = total_spin_distribution(state, axis);
    let mut cdf = Vec::with_capacity(exact.probabilities.len());
    let mut acc = 0.0;
    for p in &exact.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; cdf.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let m = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[m] += 1;
    }
    let probabilities = counts.iter().map(|&c| c as f64 / shots.max(1) as f64).collect();
    SpinHistogram { axis, n_spins: exact.n_spins, probabilities }
}

/// Bin-wise mean of histograms sharing an axis and spin count.
pub fn time_averaged_distribution(histograms: &[SpinHistogram]) -> Result<SpinHistogram, MeasureError> {
    let first = histograms.first().ok_or(MeasureError::EmptySeries)?;
    if histograms.iter().any(|h| h.axis != first.axis || h.n_spins != first.n_spins) {
        return Err(MeasureError::MixedAxes);
    }
    let k = histograms.len() as f64;
    let probabilities = (0..first.probabilities.len())
        .map(|m| histograms.iter().map(|h| h.probabilities[m]).sum::<f64>() / k)
        .collect();
    Ok(SpinHistogram { axis: first.axis, n_spins: first.n_spins, probabilities })
}
