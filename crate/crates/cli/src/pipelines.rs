//! The five pipelines behind the subcommands.

use crate::config::{RepresentationKind, RunConfig};
use crate::manifest::RunRecorder;
use crate::sim::{average, derive_seed, prepare, simulate, split_shots, Prepared};
use crate::CliError;
use dicke_core::crystal::{
    nearest_neighbours, solve_equilibrium, transverse_modes, write_mode_table, write_positions_csv, TrapConfig,
};
use dicke_core::engine::{write_checkpoint, StateVector};
use dicke_core::measure::{
    cumulative_time_average, expect_pauli, random_directions, reduced_dm_sites, sample_shots, sample_total_spin,
    time_averaged_distribution, total_spin_distribution, write_histograms, write_series, write_shot_records, Direction,
    ObservableSeries, Scope, ShotFileHeader, ShotRecord, SpinHistogram,
};
use dicke_core::model::ModeRef;
use dicke_core::tomo::{
    fit_entropy_scaling, mle_dicke, mle_full, von_neumann_entropy, write_tomo_report, DensityMatrix, DmBasis,
    MleOptions, TomoReport,
};
use dicke_core::{angular_to_khz, khz_to_angular, par, Axis, C64};
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::Path;

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn record_resolution(rec: &mut RunRecorder, prep: &Prepared) {
    rec.resolve("n_max", prep.params.n_max as i64);
    rec.resolve("dimension", prep.dimension as i64);
    rec.resolve("flip_y", prep.relabel.flip_y);
    rec.resolve("n_spins", prep.params.n_spins() as i64);
    if let dicke_core::model::Model::Subensemble(s) = &prep.model {
        let groups: Vec<toml::Value> = s
            .spec
            .groups
            .iter()
            .map(|g| {
                let mut t = toml::Table::new();
                t.insert("sites".into(), g.sites.iter().map(|&i| i as i64).collect::<Vec<_>>().into());
                t.insert("g_khz".into(), angular_to_khz(g.coupling).into());
                t.insert("phase_rad".into(), g.phase.into());
                t.into()
            })
            .collect();
        rec.resolve("groups", groups);
    }
}

// ---------------------------------------------------------------- modes

pub fn modes(cfg: &RunConfig, _base: &Path, rec: &mut RunRecorder) -> Result<(), CliError> {
    let src = cfg
        .model
        .crystal
        .as_ref()
        .ok_or_else(|| CliError::Config("the modes command needs a [model.crystal] section".into()))?;
    let trap = TrapConfig {
        omega_x: khz_to_angular(src.trap_khz[0]),
        omega_y: khz_to_angular(src.trap_khz[1]),
        omega_z: khz_to_angular(src.trap_khz[2]),
        n_ions: src.n_ions,
    };
    let solution = solve_equilibrium(&trap, src.seed)?;
    rec.stage("equilibrium");
    let table = transverse_modes(&trap, &solution)?;
    rec.stage("modes");
    write_mode_table(&rec.path("modes.toml"), &table)?;
    rec.record("modes.toml")?;
    write_positions_csv(&rec.path("positions.csv"), &solution.positions_um(&trap))?;
    rec.record("positions.csv")?;
    rec.resolve("n_modes", table.len() as i64);
    rec.resolve("gradient_norm", solution.gradient_norm);
    rec.resolve("orthonormality_error", table.orthonormality_error());
    Ok(())
}

// ---------------------------------------------------------------- evolve

/// Instantaneous ensemble (and configured per-site) Pauli series.
pub fn pauli_table(cfg: &RunConfig, trajectories: &[Vec<StateVector>]) -> Result<Vec<ObservableSeries>, CliError> {
    let times = cfg.output_grid();
    let mut scopes = vec![(Scope::Ensemble, String::new())];
    scopes.extend(cfg.measurement.series_sites.iter().map(|&s| (Scope::Site(s), format!("_{s}"))));
    let mut out = Vec::new();
    for (scope, suffix) in scopes {
        for axis in Axis::ALL {
            let values = (0..times.len())
                .map(|t| average(trajectories, t, |s| Ok(expect_pauli(s, axis, scope)?)))
                .collect::<Result<Vec<_>, _>>()?;
            out.push(ObservableSeries { times: times.clone(), values, label: format!("s{}{suffix}", axis.label()) });
        }
    }
    Ok(out)
}

pub fn evolve(cfg: &RunConfig, base: &Path, rec: &mut RunRecorder) -> Result<(), CliError> {
    let prep = prepare(cfg, base, cfg.representation.kind, &[])?;
    record_resolution(rec, &prep);
    rec.stage("prepare");
    let traj = simulate(cfg, &prep, cfg.seed)?;
    rec.stage("evolve");
    let series = pauli_table(cfg, &traj)?;
    write_series(&rec.path("series.csv"), &series)?;
    rec.record("series.csv")?;
    let cumulative = series.iter().map(cumulative_time_average).collect::<Result<Vec<_>, _>>()?;
    write_series(&rec.path("cumulative.csv"), &cumulative)?;
    rec.record("cumulative.csv")?;

    if cfg.representation.compare_full && cfg.representation.kind == RepresentationKind::Subensemble {
        let full = prepare(cfg, base, RepresentationKind::Full, &[])?;
        let reference = simulate(cfg, &full, cfg.seed)?;
        let n = prep.params.n_spins();
        let mut worst = 0.0f64;
        for t in 0..cfg.output_grid().len() {
            for site in 0..n {
                for axis in Axis::ALL {
                    let a = average(&traj, t, |s| Ok(expect_pauli(s, axis, Scope::Site(site))?))?;
                    let b = average(&reference, t, |s| Ok(expect_pauli(s, axis, Scope::Site(site))?))?;
                    worst = worst.max((a - b).abs());
                }
            }
        }
        let text = format!("max_site_deviation = {}\nfull_n_max = {}\n", fmt(worst), full.params.n_max);
        rec.write_text("comparison.toml", &text)?;
        rec.stage("compare_full");
    }

    if cfg.evolution.checkpoint {
        for (i, states) in traj.iter().enumerate() {
            let name = format!("state_{i}.ckpt");
            write_checkpoint(&rec.path(&name), states.last().expect("grid is never empty"))?;
            rec.record(&name)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- distributions

/// Exact histograms at every output time, then their running time averages.
pub fn exact_histograms(
    cfg: &RunConfig,
    trajectories: &[Vec<StateVector>],
    axis: Axis,
) -> Result<(Vec<SpinHistogram>, Vec<SpinHistogram>), CliError> {
    let times = cfg.output_grid().len();
    let mut per_time = Vec::with_capacity(times);
    for t in 0..times {
        let hists: Vec<SpinHistogram> = trajectories.iter().map(|tr| total_spin_distribution(&tr[t], axis)).collect();
        per_time.push(time_averaged_distribution(&hists)?);
    }
    let running = (1..=times)
        .map(|t| time_averaged_distribution(&per_time[..t]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((per_time, running))
}

fn flatten(times: &[f64], rows: Vec<Vec<SpinHistogram>>) -> (Vec<f64>, Vec<SpinHistogram>) {
    let mut ts = Vec::new();
    let mut hs = Vec::new();
    for row in rows {
        for (t, h) in times.iter().zip(row) {
            ts.push(*t);
            hs.push(h);
        }
    }
    (ts, hs)
}

pub fn distributions(cfg: &RunConfig, base: &Path, rec: &mut RunRecorder) -> Result<(), CliError> {
    let prep = prepare(cfg, base, cfg.representation.kind, &[])?;
    record_resolution(rec, &prep);
    rec.stage("prepare");
    let traj = simulate(cfg, &prep, cfg.seed)?;
    rec.stage("evolve");
    let times = cfg.output_grid();
    let mut exact = Vec::new();
    let mut running = Vec::new();
    let mut sampled = Vec::new();
    let mut sampled_running = Vec::new();
    for (a, &axis) in cfg.measurement.axes.iter().enumerate() {
        let (e, r) = exact_histograms(cfg, &traj, axis)?;
        exact.push(e);
        running.push(r);
        let budget = cfg.measurement.samples_per_time;
        if budget > 0 {
            let mut rows = Vec::with_capacity(times.len());
            for t in 0..times.len() {
                let parts = split_shots(budget, traj.len());
                let mut counts = vec![0.0; prep.params.n_spins() + 1];
                for (i, (tr, &shots)) in traj.iter().zip(&parts).enumerate() {
                    if shots == 0 {
                        continue;
                    }
                    let seed = derive_seed(cfg.seed, "spin-samples", &[a as u64, t as u64, i as u64]);
                    let h = sample_total_spin(&tr[t], axis, shots, seed);
                    for (c, p) in counts.iter_mut().zip(&h.probabilities) {
                        *c += p * shots as f64;
                    }
                }
                let probabilities = counts.iter().map(|c| c / budget as f64).collect();
                rows.push(SpinHistogram { axis, n_spins: prep.params.n_spins(), probabilities });
            }
            let r = (1..=rows.len())
                .map(|t| time_averaged_distribution(&rows[..t]))
                .collect::<Result<Vec<_>, _>>()?;
            sampled.push(rows);
            sampled_running.push(r);
        }
    }
    rec.stage("histograms");
    for (name, rows) in [
        ("histograms.csv", exact),
        ("averaged.csv", running),
        ("sampled.csv", sampled),
        ("sampled_averaged.csv", sampled_running),
    ] {
        if rows.is_empty() {
            continue;
        }
        let (ts, hs) = flatten(&times, rows);
        write_histograms(&rec.path(name), &ts, &hs)?;
        rec.record(name)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- entropy

/// One subsystem entropy estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    pub time: f64,
    pub group: usize,
    pub k: usize,
    /// "exact", "dicke" or "full".
    pub method: &'static str,
    pub entropy: f64,
}

fn mixture(trajectories: &[Vec<StateVector>], t: usize, sites: &[usize]) -> Result<DensityMatrix, CliError> {
    let mut acc: Option<DMatrix<C64>> = None;
    for tr in trajectories {
        let rho = reduced_dm_sites(&tr[t], sites)?.matrix;
        acc = Some(match acc {
            None => rho,
            Some(a) => a + rho,
        });
    }
    let m = acc.expect("at least one trajectory") / C64::new(trajectories.len() as f64, 0.0);
    Ok(DensityMatrix::new(DmBasis::Full, m))
}

/// Shot records on `sites` pooled over trajectories, shots split evenly.
fn pooled_shots(
    trajectories: &[Vec<StateVector>],
    t: usize,
    directions: &[Direction],
    shots: usize,
    sites: &[usize],
    seed: u64,
) -> Result<Vec<ShotRecord>, CliError> {
    let parts = split_shots(shots, trajectories.len());
    let mut per_direction: Vec<Vec<ShotRecord>> = vec![Vec::new(); directions.len()];
    for (i, (tr, &n)) in trajectories.iter().zip(&parts).enumerate() {
        if n == 0 {
            continue;
        }
        for r in sample_shots(&tr[t], directions, n, sites, derive_seed(seed, "trajectory", &[i as u64]))? {
            per_direction[r.direction_index].push(r);
        }
    }
    let mut out = Vec::with_capacity(directions.len() * shots);
    for (d, rows) in per_direction.into_iter().enumerate() {
        for (s, mut r) in rows.into_iter().enumerate() {
            r.shot_index = d * shots + s;
            r.rng_seed = seed;
            out.push(r);
        }
    }
    Ok(out)
}

fn truncate(records: &[ShotRecord], k: usize) -> Vec<ShotRecord> {
    records
        .iter()
        .map(|r| ShotRecord { sites: r.sites[..k].to_vec(), outcomes: r.outcomes[..k].to_vec(), ..r.clone() })
        .collect()
}

/// Entropies of one site group at one time, with optional tomography reports.
#[allow(clippy::too_many_arguments)]
fn group_entropies(
    cfg: &RunConfig,
    trajectories: &[Vec<StateVector>],
    t: usize,
    g: usize,
    sites: &[usize],
    directions: &[Direction],
    keep_reports: bool,
) -> Result<(Vec<EntropyRow>, Vec<TomoReport>, Vec<ShotRecord>), CliError> {
    let time = cfg.output_grid()[t];
    let tc = &cfg.tomography;
    let opts = MleOptions { max_iterations: tc.max_iterations, tolerance: tc.tolerance, ..MleOptions::default() };
    let ks: Vec<usize> = tc.k_values.iter().copied().filter(|&k| k <= sites.len()).collect();
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    if k_max == 0 {
        return Ok((rows, reports, Vec::new()));
    }
    let seed = derive_seed(cfg.seed, "shots", &[t as u64, g as u64]);
    let records = pooled_shots(trajectories, t, directions, cfg.measurement.shots, &sites[..k_max], seed)?;
    for &k in &ks {
        let exact = mixture(trajectories, t, &sites[..k])?;
        rows.push(EntropyRow { time, group: g, k, method: "exact", entropy: von_neumann_entropy(&exact)? });
        let sub = truncate(&records, k);
        let mut runs = Vec::new();
        if tc.method.dicke() {
            runs.push(("dicke", mle_dicke(&sub, k, &opts)?));
        }
        if tc.method.full() && k <= tc.full_cap {
            runs.push(("full", mle_full(&sub, k, &opts)?));
        }
        for (method, result) in runs {
            rows.push(EntropyRow { time, group: g, k, method, entropy: von_neumann_entropy(&result.rho)? });
            if keep_reports {
                reports.push(TomoReport::new(&format!("t={time} group={g} k={k} method={method}"), &result)?);
            }
        }
    }
    Ok((rows, reports, records))
}

/// Index of the output time closest to `t_ms`.
pub fn nearest_time(cfg: &RunConfig, t_ms: f64) -> usize {
    let grid = cfg.output_grid();
    let target = t_ms * 1e-3;
    (0..grid.len()).min_by(|&a, &b| (grid[a] - target).abs().total_cmp(&(grid[b] - target).abs())).unwrap_or(0)
}

/// Entropy rows for every output time and site group.
pub fn entropy_table(
    cfg: &RunConfig,
    trajectories: &[Vec<StateVector>],
    groups: &[Vec<usize>],
) -> Result<(Vec<EntropyRow>, Vec<TomoReport>, Vec<(usize, usize, Vec<ShotRecord>)>), CliError> {
    let directions = random_directions(cfg.measurement.directions, derive_seed(cfg.seed, "directions", &[]));
    let fit_t = nearest_time(cfg, cfg.tomography.fit_time_ms);
    let jobs: Vec<(usize, usize)> =
        (0..cfg.output_grid().len()).flat_map(|t| (0..groups.len()).map(move |g| (t, g))).collect();
    let results = par::map(jobs, |(t, g)| {
        group_entropies(cfg, trajectories, t, g, &groups[g], &directions, t == fit_t).map(|r| (t, g, r))
    });
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut shots = Vec::new();
    for r in results {
        let (t, g, (rw, rp, records)) = r?;
        rows.extend(rw);
        reports.extend(rp);
        shots.push((t, g, records));
    }
    Ok((rows, reports, shots))
}

fn entropy_csv(rows: &[EntropyRow]) -> String {
    let mut out = String::from("time_s,group,k,method,entropy_nats\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", fmt(r.time), r.group, r.k, r.method, fmt(r.entropy)).unwrap();
    }
    out
}

/// α fits at the output time closest to the configured fit time.
pub fn scaling_fits(cfg: &RunConfig, rows: &[EntropyRow], n_groups: usize) -> Vec<(usize, &'static str, f64, f64)> {
    let t_fit = cfg.output_grid()[nearest_time(cfg, cfg.tomography.fit_time_ms)];
    let mut fits = Vec::new();
    for g in 0..n_groups {
        for method in ["exact", "dicke", "full"] {
            let points: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.group == g && r.method == method && r.time == t_fit)
                .map(|r| (r.k, r.entropy))
                .collect();
            if points.len() < 2 {
                continue;
            }
            if let Ok(fit) = fit_entropy_scaling(&points) {
                fits.push((g, method, fit.alpha, fit.residual));
            }
        }
    }
    fits
}

fn write_entropy_outputs(
    cfg: &RunConfig,
    rec: &mut RunRecorder,
    rows: &[EntropyRow],
    reports: &[TomoReport],
    shots: &[(usize, usize, Vec<ShotRecord>)],
    n_groups: usize,
) -> Result<(), CliError> {
    rec.write_text("entropy.csv", &entropy_csv(rows))?;
    let t_fit = cfg.output_grid()[nearest_time(cfg, cfg.tomography.fit_time_ms)];
    if (t_fit - cfg.tomography.fit_time_ms * 1e-3).abs() > 1e-12 {
        log::warn!("fit time {} ms is not on the output grid; using {} s", cfg.tomography.fit_time_ms, t_fit);
    }
    let mut fit = String::from("group,method,time_s,alpha,residual\n");
    for (g, method, alpha, residual) in scaling_fits(cfg, rows, n_groups) {
        writeln!(fit, "{g},{method},{},{},{}", fmt(t_fit), fmt(alpha), fmt(residual)).unwrap();
    }
    rec.write_text("fit.csv", &fit)?;
    if !reports.is_empty() {
        write_tomo_report(&rec.path("tomography.toml"), reports)?;
        rec.record("tomography.toml")?;
    }
    if cfg.measurement.write_shots {
        let header = ShotFileHeader {
            seed: cfg.seed,
            directions: cfg.measurement.directions,
            shots_per_direction: cfg.measurement.shots,
        };
        for (t, g, records) in shots {
            let name = format!("shots_t{t}_g{g}.csv");
            write_shot_records(&rec.path(&name), &header, records)?;
            rec.record(&name)?;
        }
    }
    Ok(())
}

pub fn entropy(cfg: &RunConfig, base: &Path, rec: &mut RunRecorder) -> Result<(), CliError> {
    let prep = prepare(cfg, base, cfg.representation.kind, &[])?;
    record_resolution(rec, &prep);
    rec.stage("prepare");
    let traj = simulate(cfg, &prep, cfg.seed)?;
    rec.stage("evolve");
    let groups = &cfg.measurement.site_groups;
    let (rows, reports, shots) = entropy_table(cfg, &traj, groups)?;
    rec.stage("tomography");
    write_entropy_outputs(cfg, rec, &rows, &reports, &shots, groups.len())
}

// ---------------------------------------------------------------- engineered

/// Ion pair chosen for the engineered-coupling study.
#[derive(Debug, Clone, PartialEq)]
pub struct IonPair {
    /// "antinode" or "node".
    pub kind: &'static str,
    pub sites: [usize; 2],
    /// |η b_i Ω_i| of both sites (rad/s).
    pub couplings: [f64; 2],
}

/// Nearest-neighbour pairs with the strongest weaker coupling, then pairs
/// with the weakest stronger coupling, never sharing an ion.
pub fn select_pairs(positions: &[[f64; 2]], strength: &[f64], per_kind: usize) -> Vec<IonPair> {
    let nn = nearest_neighbours(positions);
    let mut candidates: Vec<[usize; 2]> = nn
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| [i.min(j), i.max(j)]))
        .collect();
    candidates.sort();
    candidates.dedup();
    let mut used = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let lo = |p: &[usize; 2]| strength[p[0]].min(strength[p[1]]);
    let hi = |p: &[usize; 2]| strength[p[0]].max(strength[p[1]]);
    let mut strong = candidates.clone();
    strong.sort_by(|a, b| lo(b).total_cmp(&lo(a)).then(a.cmp(b)));
    let mut weak = candidates;
    weak.sort_by(|a, b| hi(a).total_cmp(&hi(b)).then(a.cmp(b)));
    for (kind, list) in [("antinode", strong), ("node", weak)] {
        let mut taken = 0;
        for p in list {
            if taken == per_kind {
                break;
            }
            if used.contains(&p[0]) || used.contains(&p[1]) {
                continue;
            }
            used.insert(p[0]);
            used.insert(p[1]);
            out.push(IonPair { kind, sites: p, couplings: [strength[p[0]], strength[p[1]]] });
            taken += 1;
        }
    }
    out
}

pub fn engineered(cfg: &RunConfig, base: &Path, rec: &mut RunRecorder) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    let mode = ModeRef::Index(cfg.engineered.mode);
    match (&mut cfg.model.crystal, &mut cfg.model.modes) {
        (Some(c), _) => c.mode = mode,
        (None, Some(m)) => m.mode = mode,
        _ => return Err(CliError::Config("the engineered command needs [model.crystal] or [model.modes]".into())),
    }
    let resolved = cfg.model.resolve(base)?;
    let positions = resolved
        .positions_um
        .clone()
        .ok_or_else(|| CliError::Config("pair selection needs ion positions".into()))?;
    let strength: Vec<f64> = resolved.params.couplings().iter().map(|z| z.norm()).collect();
    let pairs = select_pairs(&positions, &strength, cfg.engineered.pairs_per_kind);
    if pairs.is_empty() {
        return Err(CliError::Config("no ion pairs available".into()));
    }
    let isolate: Vec<usize> = pairs.iter().flat_map(|p| p.sites).collect();
    let prep = crate::sim::prepare_resolved(&cfg, resolved, cfg.representation.kind, &isolate)?;
    record_resolution(rec, &prep);
    if let Some(w) = prep.resolved.mode_frequency {
        rec.resolve("mode_khz", angular_to_khz(w));
    }
    let mut table = String::from("pair,kind,site_a,site_b,coupling_a_khz,coupling_b_khz\n");
    for (i, p) in pairs.iter().enumerate() {
        writeln!(
            table,
            "{i},{},{},{},{},{}",
            p.kind,
            p.sites[0],
            p.sites[1],
            fmt(angular_to_khz(p.couplings[0])),
            fmt(angular_to_khz(p.couplings[1]))
        )
        .unwrap();
    }
    rec.write_text("pairs.csv", &table)?;
    rec.stage("prepare");

    let traj = simulate(&cfg, &prep, cfg.seed)?;
    rec.stage("evolve");
    // site-resolved reconstruction only: the pair is not exchange symmetric
    cfg.tomography.method = crate::config::TomoMethod::Full;
    cfg.tomography.k_values = vec![2];
    let groups: Vec<Vec<usize>> = pairs.iter().map(|p| p.sites.to_vec()).collect();
    let (rows, reports, shots) = entropy_table(&cfg, &traj, &groups)?;
    rec.stage("tomography");
    let mut out = String::from("time_s,pair,kind,method,entropy_nats\n");
    for r in &rows {
        writeln!(out, "{},{},{},{},{}", fmt(r.time), r.group, pairs[r.group].kind, r.method, fmt(r.entropy)).unwrap();
    }
    rec.write_text("pair_entropy.csv", &out)?;
    if !reports.is_empty() {
        write_tomo_report(&rec.path("tomography.toml"), &reports)?;
        rec.record("tomography.toml")?;
    }
    if cfg.measurement.write_shots {
        write_entropy_outputs(&cfg, rec, &[], &[], &shots, 0)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_split_into_strong_and_weak() {
        let positions = [[0.0, 0.0], [1.0, 0.0], [5.0, 0.0], [6.0, 0.0], [10.0, 0.0], [11.0, 0.0]];
        let strength = [0.9, 0.8, 0.01, 0.02, 0.5, 0.4];
        let pairs = select_pairs(&positions, &strength, 1);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].kind, "antinode");
        assert_eq!(pairs[0].sites, [0, 1]);
        assert_eq!(pairs[1].kind, "node");
        assert_eq!(pairs[1].sites, [2, 3]);
    }
}
