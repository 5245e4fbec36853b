//! Mapping a negative-detuning model onto a positive-detuning one.
//!
//! If |ψ(t)⟩ = e^{−iHt}|ψ₀⟩ then |ψ(t)⟩* = e^{−i(−H*)t}|ψ₀*⟩. In the
//! computational basis σ_x, σ_z, a and a† are real and σ_y is imaginary, so
//! −H* is the same model with δ → −δ, B → −B and every complex coupling
//! η b Ω e^{iφ} → −η b Ω e^{−iφ} (stored as Ω → −Ω, φ → −φ). Complex
//! conjugation fixes |±x⟩ and |±z⟩ and swaps |+y⟩ ↔ |−y⟩, so σ_y
//! expectations change sign while σ_x and σ_z are unchanged.

use super::ModelParams;
use serde::{Deserialize, Serialize};

/// How initial states and measured observables must be relabelled after
/// [`normalize_sign`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisRelabel {
    /// |±y⟩ ↦ |∓y⟩ in initial states, and ⟨σ_y⟩ ↦ −⟨σ_y⟩ in results.
    pub flip_y: bool,
    /// δ was exactly zero; no transformation was applied.
    pub zero_detuning: bool,
}

impl BasisRelabel {
    pub fn is_identity(&self) -> bool {
        !self.flip_y
    }

    /// Sign applied to a measured ⟨σ_y⟩ to report it in the original frame.
    pub fn y_sign(&self) -> f64 {
        if self.flip_y {
            -1.0
        } else {
            1.0
        }
    }
}

/// Parameters of −H*. Exact involution: applying it twice returns the input
/// bit for bit.
pub fn conjugate_negate(params: &ModelParams) -> ModelParams {
    let mut out = params.clone();
    out.delta = -params.delta;
    out.b_field = -params.b_field;
    for s in &mut out.sites {
        s.omega = -s.omega;
        s.phi = -s.phi;
    }
    out
}

/// Returns parameters with δ ≥ 0 and the relabelling that makes their
/// dynamics identical to the input's.
pub fn normalize_sign(params: &ModelParams) -> (ModelParams, BasisRelabel) {
    if params.delta < 0.0 {
        (conjugate_negate(params), BasisRelabel { flip_y: true, zero_detuning: false })
    } else {
        if params.delta == 0.0 {
            log::warn!("zero detuning: sign normalization is the identity");
        }
        (params.clone(), BasisRelabel { flip_y: false, zero_detuning: params.delta == 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::khz_to_angular;
    use crate::model::SiteCoupling;
    use proptest::prelude::*;

    fn params(delta: f64) -> ModelParams {
        ModelParams {
            eta: 0.05,
            delta,
            b_field: khz_to_angular(0.09),
            sites: vec![SiteCoupling { omega: 2e4, b: 0.3, phi: 1.2 }, SiteCoupling { omega: 1.5e4, b: -0.2, phi: 5.9 }],
            n_max: 5,
        }
    }

    #[test]
    fn positive_detuning_is_identity() {
        let p = params(khz_to_angular(0.5));
        let (q, r) = normalize_sign(&p);
        assert_eq!(p, q);
        assert!(r.is_identity());
        assert!(!r.zero_detuning);
    }

    #[test]
    fn negative_detuning_is_flipped() {
        let p = params(-khz_to_angular(0.75));
        let (q, r) = normalize_sign(&p);
        assert!((q.delta - khz_to_angular(0.75)).abs() < 1e-12);
        assert!(r.flip_y);
        // complex couplings are negated conjugates
        for (a, b) in p.couplings().iter().zip(q.couplings()) {
            assert!((b + a.conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_detuning_flags_warning() {
        let (q, r) = normalize_sign(&params(0.0));
        assert_eq!(q, params(0.0));
        assert!(r.zero_detuning && !r.flip_y);
    }

    proptest! {
        #[test]
        fn conjugate_negate_is_an_involution(
            delta in -1e5f64..1e5,
            b in -1e4f64..1e4,
            omega in -1e5f64..1e5,
            amp in -1.0f64..1.0,
            phi in 0.0f64..std::f64::consts::TAU,
        ) {
            let p = ModelParams {
                eta: 0.07,
                delta,
                b_field: b,
                sites: vec![SiteCoupling { omega, b: amp, phi }],
                n_max: 3,
            };
            prop_assert_eq!(conjugate_negate(&conjugate_negate(&p)), p);
        }
    }
}
