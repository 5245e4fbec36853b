//! Closed-form zero-field dynamics and the Fock truncation derived from it.
//!
//! At B = 0 every σ_z product sector s is a driven oscillator
//! H_s = D_s a† + D_s* a − δ a†a with D_s = Σ_i η b_i Ω_i (1+s_i) e^{−iφ_i}.
//! From vacuum it stays coherent: e^{iθ(t)}|α(t)⟩ with
//! α = (D/δ)(1 − e^{iδt}) and θ = −(|D|²/δ)(t − sin(δt)/δ).

use super::{EngineError, EchoSchedule, SpinDirection, StateVector};
use crate::model::{Model, ModelParams};
use crate::{Axis, Basis, C64};
use std::f64::consts::PI;

/// (1 − e^{iδt})/δ, continuous at δ = 0.
fn loop_factor(delta: f64, t: f64) -> C64 {
    let half = if delta == 0.0 { 0.5 * t } else { (0.5 * delta * t).sin() / delta };
    C64::new(0.0, -2.0) * C64::from_polar(half, 0.5 * delta * t)
}

/// t − sin(δt)/δ divided by δ, continuous at δ = 0.
fn phase_factor(delta: f64, t: f64) -> f64 {
    let x = delta * t;
    if x.abs() < 1e-3 {
        // δ t³/6 − δ³ t⁵/120
        delta * t.powi(3) / 6.0 - delta.powi(3) * t.powi(5) / 120.0
    } else {
        (t - x.sin() / delta) / delta
    }
}

/// Coherent amplitude α(t) and phase θ(t) of the sector labelled by
/// `bits` (bit 1 means σ_z = −1).
pub fn analytic_b0_oracle(params: &ModelParams, bits: &[bool], t: f64) -> Result<(C64, f64), EngineError> {
    if params.b_field != 0.0 {
        return Err(EngineError::NonzeroField);
    }
    assert_eq!(bits.len(), params.n_spins());
    let d: C64 = params
        .couplings()
        .iter()
        .zip(bits)
        .map(|(z, &bit)| if bit { C64::new(0.0, 0.0) } else { z.conj() * 2.0 })
        .sum();
    let alpha = d * loop_factor(params.delta, t);
    let theta = -d.norm_sqr() * phase_factor(params.delta, t);
    Ok((alpha, theta))
}

/// Fock amplitudes of |α⟩ up to `n_max`.
pub fn coherent_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=n_max {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Full-basis state predicted by the oracle at time `t` from the product
/// state along `dir` with the boson in vacuum.
pub fn b0_oracle_state(params: &ModelParams, dir: SpinDirection, t: f64) -> Result<StateVector, EngineError> {
    let n = params.n_spins();
    let basis = Basis::full(n, params.n_max);
    let (u, v) = dir.amplitudes();
    let f = basis.fock_dim();
    let mut state = StateVector::zeros(basis);
    state.time = t;
    for s in 0..(1usize << n) {
        let bits: Vec<bool> = (0..n).map(|i| (s >> (n - 1 - i)) & 1 == 1).collect();
        let weight: C64 = bits.iter().map(|&b| if b { v } else { u }).product();
        if weight == C64::new(0.0, 0.0) {
            continue;
        }
        let (alpha, theta) = analytic_b0_oracle(params, &bits, t)?;
        let phase = C64::from_polar(1.0, theta);
        for (k, c) in coherent_amplitudes(alpha, params.n_max).into_iter().enumerate() {
            state.amplitudes[s * f + k] = weight * phase * c;
        }
    }
    Ok(state)
}

/// Largest |α| over all σ_z sectors of α = A + Σ_j n_j B_j s_j.
fn support_max(a: C64, b: &[(usize, C64)]) -> f64 {
    const STEPS: usize = 720;
    (0..STEPS)
        .map(|k| {
            let rot = C64::from_polar(1.0, -2.0 * PI * k as f64 / STEPS as f64);
            (rot * a).re + b.iter().map(|&(n, bj)| n as f64 * (rot * bj).re.abs()).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Upper estimate of the coherent displacement reached over `[0, t_max]` at
/// zero field, optionally through the echo sequence.
pub fn max_displacement(model: &Model, t_max: f64, echo: Option<EchoSchedule>) -> f64 {
    let delta = model.delta();
    // per-spin drive conj(z), with spin count
    let w: Vec<(usize, C64)> = model.ladder_couplings().into_iter().map(|(n, z)| (n, z.conj())).collect();
    let total: C64 = w.iter().map(|&(n, z)| z * n as f64).sum();
    let static_max = support_max(total, &w);
    let f_max = |t: f64| {
        if delta != 0.0 && delta.abs() * t >= PI {
            2.0 / delta.abs()
        } else {
            loop_factor(delta, t).norm()
        }
    };
    let echo = match echo {
        Some(e) if e.enabled => e,
        _ => return f_max(t_max) * static_max,
    };
    let mut best = f_max(0.5 * t_max) * static_max;
    let flips = echo.pivot_axis != Axis::Z;
    const OUTER: usize = 200;
    const INNER: usize = 64;
    for i in 1..=OUTER {
        let half = 0.5 * t_max * i as f64 / OUTER as f64;
        let f1 = loop_factor(delta, half);
        for k in 0..=INNER {
            let t2 = half * k as f64 / INNER as f64;
            let carried = f1 * C64::from_polar(1.0, delta * t2);
            let f2 = loop_factor(delta, t2);
            let a = (carried - f2) * total;
            let b: Vec<(usize, C64)> = w
                .iter()
                .map(|&(n, z)| (n, if flips { (carried + f2) * z } else { (carried - f2) * z }))
                .collect();
            best = best.max(support_max(a, &b));
        }
    }
    best
}

fn ln_poisson(mu: f64, n: usize, ln_fact: f64) -> f64 {
    if mu == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mu + n as f64 * mu.ln() - ln_fact
}

/// Smallest Fock truncation for which the zero-field prediction leaves the
/// two highest retained Fock populations below `tolerance`, with a
/// five-standard-deviation margin and a floor of 4.
pub fn adapt_truncation(model: &Model, t_max: f64, echo: Option<EchoSchedule>, tolerance: f64) -> usize {
    assert!(tolerance > 0.0);
    let alpha = max_displacement(model, t_max, echo);
    let mu = alpha * alpha;
    let by_width = (mu + 5.0 * alpha).ceil() as usize + 4;
    let ln_tol = tolerance.ln();
    let mut ln_fact = 0.0;
    let mut prev = f64::INFINITY;
    let mut n = 0usize;
    let by_tail = loop {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let cur = ln_poisson(mu, n, ln_fact);
        if n as f64 > mu && cur < ln_tol && prev < ln_tol {
            break n;
        }
        prev = cur;
        n += 1;
    };
    by_width.max(by_tail).max(4)
}
