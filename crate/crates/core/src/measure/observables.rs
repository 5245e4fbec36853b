use super::MeasureError;
use crate::engine::StateVector;
use crate::linalg::raising_element;
use crate::{par, Axis, C64};
use serde::{Deserialize, Serialize};

/// Which spins a Pauli average covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Site(usize),
    Ensemble,
}

/// ⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩ of every spin ladder.
pub fn ladder_spin_expectations(state: &StateVector) -> Vec<[f64; 3]> {
    let dims = state.basis.axis_dims();
    let strides = state.basis.strides();
    let psi = &state.amplitudes;
    (0..state.basis.n_groups())
        .map(|j| {
            let n = dims[j] - 1;
            let d = dims[j];
            let s = strides[j];
            // ⟨S_+⟩ = Σ conj(ψ_{m−1}) e(m) ψ_m, ⟨S_z⟩ = Σ (n/2 − m)|ψ_m|²
            let plus = par::sum_indexed(psi.len(), |i| {
                let m = (i / s) % d;
                if m == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    psi[i - s].conj() * psi[i] * raising_element(n, m)
                }
            });
            let z = par::sum_indexed(psi.len(), |i| {
                let m = (i / s) % d;
                C64::new((0.5 * n as f64 - m as f64) * psi[i].norm_sqr(), 0.0)
            });
            [plus.re, plus.im, z.re]
        })
        .collect()
}

fn component(v: [f64; 3], axis: Axis) -> f64 {
    match axis {
        Axis::X => v[0],
        Axis::Y => v[1],
        Axis::Z => v[2],
    }
}

/// ⟨σ_axis⟩ on one site or averaged over all spins. Sites sharing a ladder
/// all report the ladder value (2/N_j)⟨S^j⟩.
pub fn expect_pauli(state: &StateVector, axis: Axis, scope: Scope) -> Result<f64, MeasureError> {
    let n_spins = state.basis.n_spins();
    match scope {
        Scope::Site(site) => {
            let (j, _) = state
                .basis
                .locate_site(site)
                .ok_or(MeasureError::SiteOutOfRange { site, n_spins })?;
            let all = ladder_spin_expectations(state);
            Ok(2.0 * component(all[j], axis) / state.basis.group_size(j) as f64)
        }
        Scope::Ensemble => {
            let all = ladder_spin_expectations(state);
            Ok(2.0 * all.iter().map(|v| component(*v, axis)).sum::<f64>() / n_spins as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    /// Times (s).
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

/// ⟨σ_axis⟩ along a sequence of states.
pub fn pauli_series(states: &[StateVector], axis: Axis, scope: Scope) -> Result<ObservableSeries, MeasureError> {
    let values = states.iter().map(|s| expect_pauli(s, axis, scope)).collect::<Result<Vec<_>, _>>()?;
    Ok(ObservableSeries {
        times: states.iter().map(|s| s.time).collect(),
        values,
        label: format!("s{}", axis.label()),
    })
}

/// (1/t)∫₀ᵗ o(t′)dt′ by the trapezoid rule; the t = 0 entry is o(0).
pub fn cumulative_time_average(series: &ObservableSeries) -> Result<ObservableSeries, MeasureError> {
    let (t, v) = (&series.times, &series.values);
    if t.is_empty() || t.len() != v.len() {
        return Err(MeasureError::EmptySeries);
    }
    if t[0] != 0.0 || t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MeasureError::BadTimes);
    }
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(v.len());
    out.push(v[0]);
    for i in 1..t.len() {
        integral += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
        out.push(integral / t[i]);
    }
    Ok(ObservableSeries { times: t.clone(), values: out, label: format!("{}_avg", series.label) })
}
