//! Model preparation and time evolution shared by the pipelines.

use crate::config::{RepresentationKind, RunConfig};
use crate::CliError;
use dicke_core::engine::{
    adapt_truncation, evolve_grid, initial_states, BosonInit, EchoPropagator, EchoSchedule, EvolutionConfig,
    StateVector,
};
use dicke_core::model::{
    group_into_subensembles, normalize_sign, BasisRelabel, DimensionCap, Model, ModelParams, ResolvedModel,
    SubensembleModel, SubensembleSpec,
};
use dicke_core::par;
use sha2::{Digest, Sha256};
use std::path::Path;

/// Dimension above which a run logs a resource warning.
const LARGE_DIMENSION: usize = 1 << 20;

/// Child seed for one labelled piece of work: the first eight bytes
/// (little endian) of SHA-256 over the base seed, the label and the indices.
pub fn derive_seed(seed: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    for i in indices {
        h.update(i.to_le_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// A model ready to propagate.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub resolved: ResolvedModel,
    /// Parameters after sign normalization, with the chosen truncation.
    pub params: ModelParams,
    pub relabel: BasisRelabel,
    pub model: Model,
    pub dimension: usize,
}

/// Subensemble spec keeping `isolate` as single-site groups and clustering
/// the remaining sites into `m` groups.
pub fn grouping_with_isolated(params: &ModelParams, m: usize, isolate: &[usize]) -> Result<SubensembleSpec, CliError> {
    if isolate.is_empty() {
        return Ok(group_into_subensembles(&params.sites, params.eta, m.min(params.n_spins()))?);
    }
    let rest: Vec<usize> = (0..params.n_spins()).filter(|i| !isolate.contains(i)).collect();
    let mut partition: Vec<Vec<usize>> = isolate.iter().map(|&i| vec![i]).collect();
    if !rest.is_empty() {
        let sub: Vec<_> = rest.iter().map(|&i| params.sites[i]).collect();
        let spec = group_into_subensembles(&sub, params.eta, m.min(rest.len()))?;
        partition.extend(spec.groups.into_iter().map(|g| g.sites.into_iter().map(|s| rest[s]).collect()));
    }
    Ok(SubensembleSpec::from_partition(params, partition))
}

fn thermal_cutoff(n_bar: f64, tolerance: f64) -> usize {
    // smallest n with P(≥ n) = (n̄/(n̄+1))ⁿ below the tolerance
    if n_bar <= 0.0 {
        return 0;
    }
    let r = n_bar / (n_bar + 1.0);
    (tolerance.ln() / r.ln()).ceil() as usize
}

pub fn echo_schedule(cfg: &RunConfig) -> EchoSchedule {
    EchoSchedule { enabled: cfg.evolution.echo, pivot_axis: cfg.evolution.pivot_axis }
}

/// Resolves the model section, normalizes the detuning sign, picks the
/// representation and the Fock truncation, and checks the dimension cap.
pub fn prepare(cfg: &RunConfig, base_dir: &Path, kind: RepresentationKind, isolate: &[usize]) -> Result<Prepared, CliError> {
    let resolved = cfg.model.resolve(base_dir)?;
    prepare_resolved(cfg, resolved, kind, isolate)
}

pub fn prepare_resolved(
    cfg: &RunConfig,
    resolved: ResolvedModel,
    kind: RepresentationKind,
    isolate: &[usize],
) -> Result<Prepared, CliError> {
    let (mut params, relabel) = normalize_sign(&resolved.params);
    let build = |params: &ModelParams| -> Result<Model, CliError> {
        Ok(match kind {
            RepresentationKind::Full => Model::Full(params.clone()),
            RepresentationKind::Subensemble => Model::Subensemble(SubensembleModel {
                spec: grouping_with_isolated(params, cfg.representation.groups, isolate)?,
                delta: params.delta,
                b_field: params.b_field,
                n_max: params.n_max,
            }),
        })
    };
    let mut model = build(&params)?;
    if resolved.auto_truncation {
        let t_max = cfg.evolution.t_max_ms * 1e-3;
        let echo = cfg.evolution.echo.then(|| echo_schedule(cfg));
        let tol = cfg.representation.truncation_tolerance;
        let mut n_max = adapt_truncation(&model, t_max, echo, tol);
        if let BosonInit::Thermal { n_bar } = cfg.evolution.boson {
            n_max += thermal_cutoff(n_bar, tol.min(1e-6));
        }
        params.n_max = n_max;
        model = model.with_n_max(n_max);
    }
    let basis = model.basis();
    let dimension = match basis.checked_dim() {
        Some(d) if d <= cfg.dimension_cap => d,
        Some(d) => {
            return Err(CliError::Resource(format!(
                "dimension {d} (n_max = {}) exceeds dimension_cap {}",
                basis.n_max(),
                cfg.dimension_cap
            )))
        }
        None => return Err(CliError::Resource("dimension overflows".into())),
    };
    if dimension > LARGE_DIMENSION {
        log::warn!(
            "state dimension {dimension} needs about {} MiB per vector; Krylov keeps {} vectors",
            (dimension * 16) >> 20,
            cfg.evolution.krylov_dim + 2
        );
    }
    Ok(Prepared { resolved, params, relabel, model, dimension })
}

fn conjugate(state: &mut StateVector) {
    for a in &mut state.amplitudes {
        *a = a.conj();
    }
}

pub fn evolution_config(cfg: &RunConfig) -> EvolutionConfig {
    EvolutionConfig {
        krylov_dim: cfg.evolution.krylov_dim,
        step_tolerance: cfg.evolution.step_tolerance,
        output_grid: cfg.output_grid(),
    }
}

/// States at every output time, one row per boson trajectory, in the frame
/// of the configured (unnormalized) model.
pub fn simulate(cfg: &RunConfig, prep: &Prepared, seed: u64) -> Result<Vec<Vec<StateVector>>, CliError> {
    let basis = prep.model.basis();
    let mut starts = initial_states(
        &basis,
        cfg.evolution.initial,
        cfg.evolution.boson,
        cfg.evolution.trajectories,
        derive_seed(seed, "thermal", &[]),
    )?;
    // ψ(t) of H is the conjugate of the −H* evolution of ψ(0)*
    if prep.relabel.flip_y {
        starts.iter_mut().for_each(conjugate);
    }
    let ecfg = evolution_config(cfg);
    let cap = DimensionCap(cfg.dimension_cap);
    let runs: Vec<Result<Vec<StateVector>, CliError>> = if cfg.evolution.echo {
        let prop = EchoPropagator::new(&prep.model, cfg.evolution.pivot_axis, cap)?;
        par::map(starts, |s| prop.run_grid(&s, &ecfg).map_err(CliError::from))
    } else {
        let h = prep.model.hamiltonian(cap)?;
        par::map(starts, |s| evolve_grid(&s, &h, &ecfg).map_err(CliError::from))
    };
    let mut out = Vec::with_capacity(runs.len());
    for r in runs {
        let mut states = r?;
        if prep.relabel.flip_y {
            states.iter_mut().for_each(conjugate);
        }
        out.push(states);
    }
    Ok(out)
}

/// Trajectory-averaged scalar.
pub fn average<F>(trajectories: &[Vec<StateVector>], t: usize, f: F) -> Result<f64, CliError>
where
    F: Fn(&StateVector) -> Result<f64, CliError>,
{
    let mut acc = 0.0;
    for traj in trajectories {
        acc += f(&traj[t])?;
    }
    Ok(acc / trajectories.len() as f64)
}

/// Splits `shots` as evenly as possible over `parts`, earlier parts first.
pub fn split_shots(shots: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|p| shots / parts + usize::from(p < shots % parts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dicke_core::khz_to_angular;
    use dicke_core::model::SiteCoupling;

    #[test]
    fn derived_seeds_differ_by_label_and_index() {
        let a = derive_seed(7, "shots", &[0, 1]);
        assert_eq!(a, derive_seed(7, "shots", &[0, 1]));
        assert_ne!(a, derive_seed(7, "shots", &[1, 0]));
        assert_ne!(a, derive_seed(7, "dirs", &[0, 1]));
        assert_ne!(a, derive_seed(8, "shots", &[0, 1]));
    }

    #[test]
    fn shots_split_evenly() {
        assert_eq!(split_shots(50, 3), vec![17, 17, 16]);
        assert_eq!(split_shots(2, 4), vec![1, 1, 0, 0]);
    }

    #[test]
    fn thermal_cutoff_bounds_the_tail() {
        let n = thermal_cutoff(0.5, 1e-8);
        let r: f64 = 0.5 / 1.5;
        assert!(r.powi(n as i32) < 1e-8 && r.powi(n as i32 - 1) >= 1e-8);
        assert_eq!(thermal_cutoff(0.0, 1e-8), 0);
    }

    #[test]
    fn isolated_sites_become_singletons() {
        let sites = (0..8)
            .map(|i| SiteCoupling { omega: khz_to_angular(3.0 + i as f64), b: 0.3, phi: 0.0 })
            .collect();
        let p = ModelParams { eta: 0.05, delta: 1.0, b_field: 0.0, sites, n_max: 2 };
        let spec = grouping_with_isolated(&p, 2, &[5, 1]).unwrap();
        assert_eq!(spec.groups.len(), 4);
        assert_eq!(spec.groups[0].sites, vec![5]);
        assert_eq!(spec.groups[1].sites, vec![1]);
        assert_eq!(spec.n_spins(), 8);
        spec.validate().unwrap();
    }
}
