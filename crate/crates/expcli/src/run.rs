//! Sweeps over (N, h, realization, state).
//!
//! Every realization is one unit of failure: its Hamiltonian is diagonalized
//! once and shared by all of its states. Results are collected in index
//! order, so the record stream does not depend on the worker count.

use macrospin::dynamics::{diagonalize, EigenDecomposition, SpectralState};
use macrospin::lbits::{generate_lbit_model, macroscopicity_lower_bound, LbitAxes};
use macrospin::macroscopicity::{maximize, staggered_variance_from_correlation};
use macrospin::models::{build_xxz, sample_disorder};
use macrospin::seed::{derive_seed, rng_from_seed, stream};
use macrospin::spin::{ghz, random_ghz, rotated_neel_ghz, CorrelationMatrix, StateVector};
use macrospin::thermal::eth_fluctuation_report;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ExpError, Result};
use crate::plan::{ExperimentPlan, StateKind};
use crate::records::{EthRecord, LbitRecord, RunRecord};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MACROSPIN_THREADS";

/// Replay information for one disorder draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationInfo {
    pub n: usize,
    pub h: f64,
    pub realization: usize,
    pub seed: u64,
    /// Local fields h_i.
    pub fields: Vec<f64>,
    pub state_seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub n: usize,
    pub h: f64,
    pub realization: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug)]
pub struct RunOutput<R> {
    pub records: Vec<R>,
    pub realizations: Vec<RealizationInfo>,
    pub failures: Vec<Failure>,
}

/// Worker count from [`THREADS_ENV`]; `None` lets rayon decide.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&w| w > 0)
}

#[derive(Clone, Copy, Debug)]
struct Task {
    n: usize,
    h: f64,
    h_idx: usize,
    realization: usize,
}

fn tasks(plan: &ExperimentPlan) -> Vec<Task> {
    let mut out = Vec::new();
    for &n in &plan.sizes {
        for (h_idx, &h) in plan.h_values.iter().enumerate() {
            for realization in 0..plan.realizations_for(n) {
                out.push(Task {
                    n,
                    h,
                    h_idx,
                    realization,
                });
            }
        }
    }
    out
}

fn state_seed(disorder_seed: u64, state: usize) -> u64 {
    derive_seed(disorder_seed, stream::STATE, state as u64)
}

/// Seeds and fields of every realization, without any diagonalization.
pub fn seed_table(plan: &ExperimentPlan) -> Result<Vec<RealizationInfo>> {
    plan.validate()?;
    tasks(plan)
        .into_iter()
        .map(|t| {
            let params = plan.model_params(t.n, t.h)?;
            let r = sample_disorder(&params, plan.disorder_parent(t.n, t.h_idx), t.realization as u64);
            Ok(RealizationInfo {
                n: t.n,
                h: t.h,
                realization: t.realization,
                seed: r.seed,
                fields: r.fields.clone(),
                state_seeds: (0..plan.states_per_realization()).map(|s| state_seed(r.seed, s)).collect(),
            })
        })
        .collect()
}

fn initial_state(plan: &ExperimentPlan, n: usize, state: usize, seed: u64) -> Result<(StateVector<f64>, Option<f64>)> {
    Ok(match plan.state_kind {
        StateKind::RandomGhz => (random_ghz(n, &mut rng_from_seed(seed))?, None),
        StateKind::Ghz => (ghz(n)?, None),
        StateKind::RotatedNeel => {
            let theta = plan.angles()[state];
            (rotated_neel_ghz(n, theta)?, Some(theta))
        }
    })
}

/// Runs `body` for every realization on a pool of `workers` threads and
/// applies the failure policy.
fn sweep<R, F>(plan: &ExperimentPlan, workers: Option<usize>, body: F) -> Result<RunOutput<R>>
where
    R: Send,
    F: Fn(&Task, &RealizationInfo) -> Result<Vec<R>> + Sync,
{
    plan.validate()?;
    let infos = seed_table(plan)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| ExpError::Io(std::io::Error::other(e.to_string())))?;
    let all = tasks(plan);
    let results: Vec<Result<Vec<R>>> =
        pool.install(|| all.par_iter().zip(infos.par_iter()).map(|(t, info)| body(t, info)).collect());

    let total = results.len();
    let mut out = RunOutput {
        records: Vec::new(),
        realizations: Vec::new(),
        failures: Vec::new(),
    };
    for ((res, task), info) in results.into_iter().zip(all).zip(infos) {
        match res {
            Ok(recs) => {
                out.records.extend(recs);
                out.realizations.push(info);
            }
            // capacity problems are plan errors, not bad luck
            Err(e @ ExpError::Capacity { .. }) => return Err(e),
            Err(e) => {
                log::warn!(
                    "realization {} (n={}, h={}, seed={:#018x}) failed: {e}",
                    task.realization,
                    task.n,
                    task.h,
                    info.seed
                );
                out.failures.push(Failure {
                    n: task.n,
                    h: task.h,
                    realization: task.realization,
                    seed: info.seed,
                    error: e.to_string(),
                });
            }
        }
    }
    if out.failures.len() * 100 > total {
        return Err(ExpError::TooManyFailures {
            failed: out.failures.len(),
            total,
        });
    }
    Ok(out)
}

fn diagonalize_task(plan: &ExperimentPlan, task: &Task, info: &RealizationInfo) -> Result<EigenDecomposition<f64>> {
    let params = plan.model_params(task.n, task.h)?;
    let realization = sample_disorder(&params, plan.disorder_parent(task.n, task.h_idx), task.realization as u64);
    debug_assert_eq!(realization.seed, info.seed);
    Ok(diagonalize(&build_xxz(&params, &realization)?)?)
}

/// M (and V_stag for rotated Néel states) at every time in `times`.
fn evaluate(plan: &ExperimentPlan, times: &[f64], workers: Option<usize>) -> Result<RunOutput<RunRecord>> {
    sweep(plan, workers, |task, info| {
        let eig = diagonalize_task(plan, task, info)?;
        let per_state: Vec<Result<Vec<RunRecord>>> = info
            .state_seeds
            .par_iter()
            .enumerate()
            .map(|(s, &seed)| {
                let (psi, theta) = initial_state(plan, task.n, s, seed)?;
                let sp = SpectralState::new(&eig, &psi)?;
                let mut recs = Vec::with_capacity(times.len());
                for (k, state) in sp.evolve_many(times).into_iter().enumerate() {
                    let corr = CorrelationMatrix::from_state(&state)?;
                    let opts = plan.optimizer.options(derive_seed(seed, stream::OPTIMIZER, k as u64));
                    let res = maximize(&corr, &opts)?;
                    let v_stag = theta.map(|th| staggered_variance_from_correlation(&corr, th)).transpose()?;
                    recs.push(RunRecord {
                        n: task.n,
                        h: task.h,
                        realization: task.realization,
                        state: s,
                        t: times[k],
                        m: res.value,
                        m_over_n: res.value / task.n as f64,
                        v_stag,
                        theta,
                        seed: info.seed,
                        restarts: res.restarts_used,
                        converged: res.converged,
                    });
                }
                Ok(recs)
            })
            .collect();
        let mut recs = Vec::new();
        for r in per_state {
            recs.extend(r?);
        }
        Ok(recs)
    })
}

/// Records at every grid (or explicit) time.
pub fn run_time_series(plan: &ExperimentPlan, workers: Option<usize>) -> Result<RunOutput<RunRecord>> {
    evaluate(plan, &plan.full_times(), workers)
}

/// Records at the saturation-window times only; summarize with
/// [`crate::records::saturated_summary`].
pub fn run_scaling(plan: &ExperimentPlan, workers: Option<usize>) -> Result<RunOutput<RunRecord>> {
    let times = plan.window_times();
    if times.is_empty() {
        return Err(ExpError::plan("saturation_window", "no evaluation time falls inside the window"));
    }
    evaluate(plan, &times, workers)
}

/// Like [`run_scaling`], for rotated Néel plans. Time zero is always
/// included so the initial staggered variance is on record.
pub fn run_staggered(plan: &ExperimentPlan, workers: Option<usize>) -> Result<RunOutput<RunRecord>> {
    if plan.state_kind != StateKind::RotatedNeel {
        return Err(ExpError::plan("state_kind", "staggered runs need state_kind = \"rotated_neel\""));
    }
    let mut times = vec![0.0];
    times.extend(plan.window_times().into_iter().filter(|&t| t > 0.0));
    if times.len() == 1 {
        return Err(ExpError::plan("saturation_window", "no evaluation time falls inside the window"));
    }
    evaluate(plan, &times, workers)
}

/// Long-time versus thermal variance of the observable that maximizes the
/// variance of the initial state.
pub fn run_eth_report(plan: &ExperimentPlan, workers: Option<usize>) -> Result<RunOutput<EthRecord>> {
    sweep(plan, workers, |task, info| {
        let eig = diagonalize_task(plan, task, info)?;
        info.state_seeds
            .par_iter()
            .enumerate()
            .map(|(s, &seed)| {
                let (psi, _) = initial_state(plan, task.n, s, seed)?;
                let opts = plan.optimizer.options(derive_seed(seed, stream::OPTIMIZER, 0));
                let dirs = maximize(&CorrelationMatrix::from_state(&psi)?, &opts)?.argmax;
                let sp = SpectralState::new(&eig, &psi)?;
                let rep = eth_fluctuation_report(&eig, &sp, &dirs)?;
                Ok(EthRecord {
                    n: task.n,
                    h: task.h,
                    realization: task.realization,
                    state: s,
                    time_averaged_variance: rep.time_averaged_variance,
                    thermal_variance: rep.thermal_variance,
                    difference: rep.difference,
                    difference_per_n: rep.difference_per_n,
                    difference_per_n2: rep.difference_per_n2,
                    beta: rep.beta,
                    mean_energy: rep.mean_energy,
                    seed: info.seed,
                })
            })
            .collect()
    })
}

/// M/N under a synthetic l-bit Hamiltonian, with and without interactions,
/// next to the c²·max_B V_B bound. Disorder strengths are ignored; one
/// model per (N, realization) drawn from the first h slot.
pub fn run_lbit_demo(plan: &ExperimentPlan, workers: Option<usize>) -> Result<RunOutput<LbitRecord>> {
    let mut single = plan.clone();
    single.h_values.truncate(1);
    let times = plan.full_times();
    let out = sweep(&single, workers, |task, info| {
        let model_seed = derive_seed(info.seed, stream::LBIT, 0);
        let l = &plan.lbit;
        let model = generate_lbit_model(task.n, l.xi2, l.energy_scale, l.coupling_scale, model_seed)?;
        let free = model.without_interactions();
        let (ev, ev_free) = (model.evolver(), free.evolver());
        let axes = LbitAxes::z(task.n);
        let nf = task.n as f64;
        let mut recs = Vec::new();
        for (s, &seed) in info.state_seeds.iter().enumerate() {
            let (psi, _) = initial_state(plan, task.n, s, seed)?;
            let bound = macroscopicity_lower_bound(&axes, &psi)?;
            for (k, &t) in times.iter().enumerate() {
                let opts = plan.optimizer.options(derive_seed(seed, stream::OPTIMIZER, k as u64));
                let m = maximize(&CorrelationMatrix::from_state(&ev.evolve(&psi, t)?)?, &opts)?.value;
                let m_free = maximize(&CorrelationMatrix::from_state(&ev_free.evolve(&psi, t)?)?, &opts)?.value;
                recs.push(LbitRecord {
                    n: task.n,
                    realization: task.realization,
                    state: s,
                    t,
                    m,
                    m_over_n: m / nf,
                    m_free_over_n: m_free / nf,
                    bound_over_n: bound / nf,
                    seed: model_seed,
                });
            }
        }
        Ok(recs)
    })?;
    Ok(out)
}
