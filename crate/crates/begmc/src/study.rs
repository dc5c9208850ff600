//! Seeded trajectory studies: single-temperature Metropolis versus the
//! swapping chain, with basin-visit accounting, trace occupancy and
//! autocorrelation summaries.
//!
//! One sweep touches each chain component about once: for swapping, M
//! swap-kernel applications, a systematic configuration pass (one Metropolis
//! attempt per replica, each replica drawing from its addressed stream
//! (seed, replica, sweep)), then M more swap applications. For the
//! single-temperature chain a sweep is one kernel application; it has one
//! component. Identical seeds give identical trajectories.

use serde::Serialize;

use crate::chains::{swap_acceptance, SpinState};
use crate::model::{LadderSpec, SpinConfig};
use crate::partition::{trace_of, GlPartition};
use crate::rng::{replica_stream, stream_rng, uniform_index, uniform_unit};

#[derive(Debug, Clone, Serialize)]
pub struct MixParams {
    pub k: f64,
    pub beta: f64,
    pub n: usize,
    pub m: usize,
    pub sweeps: usize,
    /// |magnetization| above which a basin is considered entered.
    pub basin_threshold: f64,
    /// Record the trace vector every this many sweeps (0 = never).
    pub trace_every: usize,
}

/// One sampled trajectory record: per recorded sweep, one row per rung.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub sweep: usize,
    pub rung: usize,
    pub s: i64,
    pub r: i64,
    pub h: f64,
}

#[derive(Debug, Serialize)]
pub struct MixReport {
    pub seed: u64,
    pub params: MixParams,
    pub swapping: ChainStats,
    pub metropolis: ChainStats,
    /// Histogram over the number of Global bits in the sampled trace
    /// vectors (swapping only).
    pub trace_ones_histogram: Vec<(usize, u64)>,
}

#[derive(Debug, Serialize, Default, Clone)]
pub struct ChainStats {
    pub plus_entries: u64,
    pub minus_entries: u64,
    pub crossings: u64,
    pub min_basin_entries: u64,
    /// Batch-means integrated autocorrelation time of the magnetization at
    /// the target temperature, in sweeps.
    pub tau_int_batch: f64,
    pub mean_abs_magnetization: f64,
}

struct BasinTracker {
    threshold: f64,
    current: i8,
    plus: u64,
    minus: u64,
    crossings: u64,
}

impl BasinTracker {
    fn new(threshold: f64) -> Self {
        Self { threshold, current: 0, plus: 0, minus: 0, crossings: 0 }
    }

    fn observe(&mut self, magnetization: f64) {
        let side = if magnetization >= self.threshold {
            1
        } else if magnetization <= -self.threshold {
            -1
        } else {
            0
        };
        if side != 0 && side != self.current {
            if side > 0 {
                self.plus += 1;
            } else {
                self.minus += 1;
            }
            if self.current != 0 {
                self.crossings += 1;
            }
            self.current = side;
        }
    }
}

/// Batch-means integrated autocorrelation time: b Var(batch means) / Var.
fn tau_int_batch(series: &[f64], batch: usize) -> f64 {
    if series.len() < 2 * batch {
        return f64::NAN;
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return f64::NAN;
    }
    let nb = n / batch;
    let mut bvar = 0.0;
    for b in 0..nb {
        let bm = series[b * batch..(b + 1) * batch].iter().sum::<f64>() / batch as f64;
        bvar += (bm - mean) * (bm - mean);
    }
    bvar /= nb as f64;
    batch as f64 * bvar / var
}

const RECORD_EVERY: usize = 8;

/// Runs both chains and collects the comparative statistics.
pub fn mix_study(seed: u64, params: &MixParams, glp: Option<&GlPartition<f64>>) -> MixReport {
    mix_study_with_trajectory(seed, params, glp, None).0
}

/// Same, optionally sampling full replica-stack trajectory rows every
/// `sample_every` sweeps.
pub fn mix_study_with_trajectory(
    seed: u64,
    params: &MixParams,
    glp: Option<&GlPartition<f64>>,
    sample_every: Option<usize>,
) -> (MixReport, Vec<TrajectoryRow>) {
    let (n, m, k) = (params.n, params.m, params.k);
    let ladder = LadderSpec::new(params.beta, m).expect("ladder");
    let betas: Vec<f64> = ladder.betas().to_vec();

    // ---- swapping ----
    let mut replicas: Vec<SpinState> =
        (0..=m).map(|_| SpinState::new(SpinConfig::zeros(n))).collect();
    let mut tracker = BasinTracker::new(params.basin_threshold);
    let mut series: Vec<f64> = Vec::with_capacity(params.sweeps / RECORD_EVERY + 1);
    let mut trace_hist: std::collections::BTreeMap<usize, u64> = Default::default();
    let mut trajectory: Vec<TrajectoryRow> = Vec::new();
    let mut abs_mag = 0.0f64;
    let mut swap_rng = stream_rng(seed, 0x5a);
    for sweep in 0..params.sweeps {
        for _ in 0..m {
            if uniform_unit(&mut swap_rng) < 0.5 {
                continue;
            }
            let i = uniform_index(&mut swap_rng, m);
            let acc =
                swap_acceptance(replicas[i].energy(k), replicas[i + 1].energy(k), &ladder);
            if acc >= 1.0 || uniform_unit(&mut swap_rng) < acc {
                replicas.swap(i, i + 1);
            }
        }
        for (i, rep) in replicas.iter_mut().enumerate() {
            let mut rng = replica_stream(seed, i as u64, sweep as u64);
            if uniform_unit(&mut rng) < 0.5 {
                continue;
            }
            rep.step(betas[i], k, &mut rng);
        }
        for _ in 0..m {
            if uniform_unit(&mut swap_rng) < 0.5 {
                continue;
            }
            let i = uniform_index(&mut swap_rng, m);
            let acc =
                swap_acceptance(replicas[i].energy(k), replicas[i + 1].energy(k), &ladder);
            if acc >= 1.0 || uniform_unit(&mut swap_rng) < acc {
                replicas.swap(i, i + 1);
            }
        }
        let mag = replicas[m].s as f64 / n as f64;
        tracker.observe(mag);
        abs_mag += mag.abs();
        if sweep % RECORD_EVERY == 0 {
            series.push(mag);
        }
        if params.trace_every > 0 && sweep % params.trace_every == 0 {
            if let Some(glp) = glp {
                let st = crate::chains::ReplicaState { replicas: replicas.clone() };
                *trace_hist.entry(trace_of(&st, glp).ones()).or_insert(0) += 1;
            }
        }
        if let Some(every) = sample_every {
            if every > 0 && sweep % every == 0 {
                for (rung, rep) in replicas.iter().enumerate() {
                    trajectory.push(TrajectoryRow {
                        sweep,
                        rung,
                        s: rep.s,
                        r: rep.r,
                        h: rep.energy(k),
                    });
                }
            }
        }
    }
    let swapping = ChainStats {
        plus_entries: tracker.plus,
        minus_entries: tracker.minus,
        crossings: tracker.crossings,
        min_basin_entries: tracker.plus.min(tracker.minus),
        tau_int_batch: tau_int_batch(&series, 4096) * RECORD_EVERY as f64,
        mean_abs_magnetization: abs_mag / params.sweeps as f64,
    };

    // ---- single-temperature Metropolis at beta_M ----
    let mut chain = SpinState::new(SpinConfig::zeros(n));
    let mut tracker = BasinTracker::new(params.basin_threshold);
    let mut series: Vec<f64> = Vec::with_capacity(params.sweeps / RECORD_EVERY + 1);
    let mut abs_mag = 0.0f64;
    let mut rng = stream_rng(seed, 0x4d45);
    for sweep in 0..params.sweeps {
        chain.step(params.beta, k, &mut rng);
        let mag = chain.s as f64 / n as f64;
        tracker.observe(mag);
        abs_mag += mag.abs();
        if sweep % RECORD_EVERY == 0 {
            series.push(mag);
        }
    }
    let metropolis = ChainStats {
        plus_entries: tracker.plus,
        minus_entries: tracker.minus,
        crossings: tracker.crossings,
        min_basin_entries: tracker.plus.min(tracker.minus),
        tau_int_batch: tau_int_batch(&series, 4096) * RECORD_EVERY as f64,
        mean_abs_magnetization: abs_mag / params.sweeps as f64,
    };

    (
        MixReport {
            seed,
            params: params.clone(),
            swapping,
            metropolis,
            trace_ones_histogram: trace_hist.into_iter().collect(),
        },
        trajectory,
    )
}
