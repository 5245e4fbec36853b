use super::EngineError;
use crate::linalg::{binomial, ladder_rotation};
use crate::{par, Basis, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Joint spin-boson wavefunction on a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
    pub basis: Basis,
    /// Evolution time (s).
    pub time: f64,
}

impl StateVector {
    pub fn zeros(basis: Basis) -> Self {
        let dim = basis.dim();
        Self { amplitudes: vec![C64::new(0.0, 0.0); dim], basis, time: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        par::norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            par::scale(&mut self.amplitudes, C64::new(1.0 / n, 0.0));
        }
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        par::dot(&self.amplitudes, &other.amplitudes)
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Population of each Fock number, summed over spins.
    pub fn fock_populations(&self) -> Vec<f64> {
        let f = self.basis.fock_dim();
        let mut out = vec![0.0; f];
        for (i, a) in self.amplitudes.iter().enumerate() {
            out[i % f] += a.norm_sqr();
        }
        out
    }
}

/// Polarization of the initial product spin state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinDirection {
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "-x")]
    MinusX,
    #[serde(rename = "+y")]
    PlusY,
    #[serde(rename = "-y")]
    MinusY,
    #[serde(rename = "+z")]
    PlusZ,
    #[serde(rename = "-z")]
    MinusZ,
}

impl SpinDirection {
    /// Single-spin amplitudes (u, v) on (|0⟩, |1⟩).
    pub fn amplitudes(self) -> (C64, C64) {
        let h = FRAC_1_SQRT_2;
        match self {
            SpinDirection::PlusZ => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            SpinDirection::MinusZ => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            SpinDirection::PlusX => (C64::new(h, 0.0), C64::new(h, 0.0)),
            SpinDirection::MinusX => (C64::new(h, 0.0), C64::new(-h, 0.0)),
            SpinDirection::PlusY => (C64::new(h, 0.0), C64::new(0.0, h)),
            SpinDirection::MinusY => (C64::new(h, 0.0), C64::new(0.0, -h)),
        }
    }

    /// Image under complex conjugation (|±y⟩ ↦ |∓y⟩).
    pub fn conjugated(self) -> Self {
        match self {
            SpinDirection::PlusY => SpinDirection::MinusY,
            SpinDirection::MinusY => SpinDirection::PlusY,
            other => other,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpinDirection::PlusX => "+x",
            SpinDirection::MinusX => "-x",
            SpinDirection::PlusY => "+y",
            SpinDirection::MinusY => "-y",
            SpinDirection::PlusZ => "+z",
            SpinDirection::MinusZ => "-z",
        }
    }
}

impl std::str::FromStr for SpinDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "+x" | "x" => SpinDirection::PlusX,
            "-x" => SpinDirection::MinusX,
            "+y" | "y" => SpinDirection::PlusY,
            "-y" => SpinDirection::MinusY,
            "+z" | "z" => SpinDirection::PlusZ,
            "-z" => SpinDirection::MinusZ,
            _ => return Err(format!("unknown spin direction '{s}'")),
        })
    }
}

/// Initial boson state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BosonInit {
    #[default]
    Vacuum,
    Fock { n: usize },
    /// Thermal state of mean occupation `n_bar`, represented by sampled Fock trajectories.
    Thermal { n_bar: f64 },
}

/// Product spin state along `dir` with the boson in Fock state `fock`.
pub fn initial_state_fock(basis: &Basis, dir: SpinDirection, fock: usize) -> Result<StateVector, EngineError> {
    if fock > basis.n_max() {
        return Err(EngineError::TruncationTooSmall { tail: 1.0 });
    }
    let (u, v) = dir.amplitudes();
    let ladders: Vec<Vec<C64>> = basis
        .groups()
        .iter()
        .map(|g| {
            let n = g.len();
            (0..=n)
                .map(|m| u.powu((n - m) as u32) * v.powu(m as u32) * binomial(n, m).sqrt())
                .collect()
        })
        .collect();
    let mut state = StateVector::zeros(basis.clone());
    let f = basis.fock_dim();
    let dims: Vec<usize> = basis.groups().iter().map(|g| g.len() + 1).collect();
    let spin_dim = basis.spin_dim();
    for s in 0..spin_dim {
        let mut rest = s;
        let mut amp = C64::new(1.0, 0.0);
        for j in (0..dims.len()).rev() {
            amp *= ladders[j][rest % dims[j]];
            rest /= dims[j];
        }
        state.amplitudes[s * f + fock] = amp;
    }
    Ok(state)
}

/// Product spin state along `dir` with the boson in vacuum.
pub fn initial_state(basis: &Basis, dir: SpinDirection) -> StateVector {
    initial_state_fock(basis, dir, 0).expect("vacuum always fits")
}

/// Initial states for a boson preparation: one state for vacuum or a Fock
/// state, `trajectories` sampled Fock states for a thermal boson.
pub fn initial_states(
    basis: &Basis,
    dir: SpinDirection,
    boson: BosonInit,
    trajectories: usize,
    seed: u64,
) -> Result<Vec<StateVector>, EngineError> {
    match boson {
        BosonInit::Vacuum => Ok(vec![initial_state(basis, dir)]),
        BosonInit::Fock { n } => Ok(vec![initial_state_fock(basis, dir, n)?]),
        BosonInit::Thermal { n_bar } => sample_thermal_fock(n_bar, basis.n_max(), trajectories, seed)?
            .into_iter()
            .map(|n| initial_state_fock(basis, dir, n))
            .collect(),
    }
}

/// Draws Fock numbers from the thermal distribution n̄ⁿ/(n̄+1)ⁿ⁺¹.
pub fn sample_thermal_fock(n_bar: f64, n_max: usize, count: usize, seed: u64) -> Result<Vec<usize>, EngineError> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(EngineError::InvalidConfig(format!("thermal occupation {n_bar}")));
    }
    if count == 0 {
        return Err(EngineError::InvalidConfig("at least one trajectory is required".into()));
    }
    let ratio = n_bar / (n_bar + 1.0);
    let tail = ratio.powi(n_max as i32 + 1);
    if tail > 1e-6 {
        return Err(EngineError::TruncationTooSmall { tail });
    }
    let probs: Vec<f64> = (0..=n_max).map(|n| ratio.powi(n as i32) / (n_bar + 1.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let mut u: f64 = rng.random::<f64>() * (1.0 - tail);
            for (n, p) in probs.iter().enumerate() {
                if u < *p {
                    return n;
                }
                u -= p;
            }
            n_max
        })
        .collect())
}

/// Applies a dense matrix along one axis of the mixed-radix layout.
pub fn apply_axis_matrix(state: &mut StateVector, axis: usize, matrix: &DMatrix<C64>) {
    let dims = state.basis.axis_dims();
    let strides = state.basis.strides();
    let d = dims[axis];
    let s = strides[axis];
    assert_eq!(matrix.nrows(), d);
    let src = std::mem::take(&mut state.amplitudes);
    let mut out = vec![C64::new(0.0, 0.0); src.len()];
    par::fill(&mut out, |i| {
        let k = (i / s) % d;
        let base = i - k * s;
        let mut acc = C64::new(0.0, 0.0);
        for kk in 0..d {
            acc += matrix[(k, kk)] * src[base + kk * s];
        }
        acc
    });
    state.amplitudes = out;
}

/// Applies exp(−iθ k·S) to every spin ladder.
pub fn apply_global_rotation(state: &mut StateVector, axis: [f64; 3], angle: f64) {
    let sizes: Vec<usize> = state.basis.groups().iter().map(Vec::len).collect();
    let mut cache: std::collections::BTreeMap<usize, DMatrix<C64>> = Default::default();
    for (j, n) in sizes.into_iter().enumerate() {
        let u = cache.entry(n).or_insert_with(|| ladder_rotation(n, axis, angle)).clone();
        apply_axis_matrix(state, j, &u);
    }
}
