//! The swapping (replica exchange) chain: M+1 replicas at the ladder
//! temperatures, configuration moves P touching one replica at a time, and
//! swap moves Q exchanging adjacent replicas with acceptance
//! min(1, exp((beta/M) (H(x_i) - H(x_{i+1})))).
//!
//! Exact objects live on lumped spaces: the product of macrostate spaces for
//! P/Q/QPQ (capped; the product is exponential in M), and the
//! sign-aggregated walk on {0..M} computed in closed form. The latter never
//! materializes the product space: under the product measure the per-replica
//! sign labels are independent, only swaps of the bottom pair (0,1) change
//! the plus-count, and swap acceptance is constant on sign-refined
//! macrostate classes. Block masses come from a Poisson-binomial convolution
//! and the boundary flux from a double sum over class pairs; this was
//! cross-checked against brute-force microstate aggregation.

use rand::RngCore;

use crate::chains::kernel::{Kernel, KernelError, StateLabels};
use crate::chains::metropolis::{lumped_metropolis_raw, SpinState};
use crate::partition::signed_class_masses;
use crate::model::{rung_gibbs, LadderSpec, MacroSpace, SpinConfig};
use crate::rng::{uniform_index, uniform_unit};
use crate::scalar::{sc, Scalar};

/// The replica stack: replica i runs at inverse temperature beta_i.
#[derive(Debug, Clone)]
pub struct ReplicaState {
    pub replicas: Vec<SpinState>,
}

impl ReplicaState {
    /// All replicas start from the all-zero configuration.
    pub fn cold_start(n: usize, m: usize) -> Self {
        Self { replicas: (0..=m).map(|_| SpinState::new(SpinConfig::zeros(n))).collect() }
    }

    pub fn rungs(&self) -> usize {
        self.replicas.len()
    }
}

/// Acceptance probability for swapping adjacent replicas holding energies
/// h_i and h_j = h_{i+1}: min(1, exp((beta/M)(h_i - h_j))). Bounded below by
/// exp(-beta (K+1) N / M) because |H| never exceeds (K+1)N in range.
pub fn swap_acceptance<T: Scalar>(h_i: T, h_j: T, ladder: &LadderSpec<T>) -> T {
    let e = ladder.beta / sc::<T>(ladder.m as f64) * (h_i - h_j);
    if e >= T::zero() {
        T::one()
    } else {
        e.exp()
    }
}

/// Which half of the swapping dynamics to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapPhase {
    /// Configuration move: hold w.p. 1/2, else one Metropolis step on one
    /// uniformly chosen replica at its own temperature.
    P,
    /// Swap move: hold w.p. 1/2, else swap one uniformly chosen adjacent
    /// pair with the Metropolis swap acceptance.
    Q,
}

/// One application of phase P or phase Q, in place. Composite scheduling
/// (QPQ and sweeps) is the caller's responsibility.
pub fn swapping_step<T: Scalar, R: RngCore>(
    state: &mut ReplicaState,
    ladder: &LadderSpec<T>,
    k: T,
    rng: &mut R,
    phase: SwapPhase,
) {
    match phase {
        SwapPhase::P => {
            if uniform_unit(rng) < 0.5 {
                return;
            }
            let i = uniform_index(rng, state.rungs());
            state.replicas[i].step(ladder.beta_i(i), k, rng);
        }
        SwapPhase::Q => {
            let pairs = state.rungs().saturating_sub(1);
            if pairs == 0 {
                return; // single replica: the swap move is the identity
            }
            if uniform_unit(rng) < 0.5 {
                return;
            }
            let i = uniform_index(rng, pairs);
            let h_i = state.replicas[i].energy(k);
            let h_j = state.replicas[i + 1].energy(k);
            let acc = swap_acceptance(h_i, h_j, ladder);
            if acc >= T::one() || uniform_unit(rng) < acc.f64() {
                state.replicas.swap(i, i + 1);
            }
        }
    }
}

/// Exact P and Q on the product of macrostate spaces (tuple index with
/// component 0 least significant).
#[derive(Debug, Clone)]
pub struct SwappingKernels<T> {
    pub p: Kernel<T>,
    pub q: Kernel<T>,
}

impl<T: Scalar> SwappingKernels<T> {
    /// The reversible composite Q P Q, materialized.
    pub fn qpq(&self) -> Result<Kernel<T>, KernelError> {
        self.q.compose(&self.p)?.compose(&self.q)
    }
}

/// Builds the exact lumped swapping kernels. Fails with a size error when
/// the product space exceeds `cap` states (default choice in callers:
/// 5e5) - beyond that only trajectory simulation is offered.
pub fn lumped_swapping<T: Scalar>(
    ladder: &LadderSpec<T>,
    k: T,
    n: usize,
    cap: usize,
) -> Result<SwappingKernels<T>, KernelError> {
    let space = MacroSpace::new(n);
    let c = space.len();
    let m = ladder.m;
    let n_states = c
        .checked_pow((m + 1) as u32)
        .filter(|&s| s <= cap)
        .ok_or(KernelError::SizeExceeded { states: usize::MAX, cap })?;

    // per-rung log weights (normalized) and energies
    let rung_lw: Vec<Vec<T>> = (0..=m).map(|i| rung_gibbs(ladder, i, k, n)).collect();
    let energies: Vec<T> =
        space.states().iter().map(|st| crate::model::lumped_energy(st, k)).collect();

    let decode = |mut x: usize| -> Vec<usize> {
        (0..=m)
            .map(|_| {
                let comp = x % c;
                x /= c;
                comp
            })
            .collect()
    };
    let mut log_pi = Vec::with_capacity(n_states);
    for x in 0..n_states {
        let comps = decode(x);
        log_pi.push(comps.iter().enumerate().map(|(i, &j)| rung_lw[i][j]).sum());
    }

    // P = 1/2 I + (1/(2(M+1))) sum_i T_i
    let blocks: Vec<Kernel<T>> =
        (0..=m).map(|i| lumped_metropolis_raw(ladder.beta_i(i), k, n)).collect();
    let w = T::one() / (sc::<T>(2.0) * sc::<T>((m + 1) as f64));
    let mut p_rows: Vec<Vec<(u32, T)>> = Vec::with_capacity(n_states);
    let mut stride = Vec::with_capacity(m + 1);
    {
        let mut s = 1usize;
        for _ in 0..=m {
            stride.push(s);
            s *= c;
        }
    }
    for x in 0..n_states {
        let comps = decode(x);
        let mut row: Vec<(u32, T)> = vec![(x as u32, sc(0.5))];
        for i in 0..=m {
            let base = x - comps[i] * stride[i];
            for &(j, v) in blocks[i].row(comps[i]) {
                row.push(((base + j as usize * stride[i]) as u32, w * v));
            }
        }
        p_rows.push(row);
    }
    let p = Kernel::new(p_rows, log_pi.clone(), StateLabels::MacroTuple { n, m }, true);

    // Q: adjacent swaps, mass 1/(2M) each
    let ksw = T::one() / (sc::<T>(2.0) * sc::<T>(m as f64));
    let mut q_rows: Vec<Vec<(u32, T)>> = Vec::with_capacity(n_states);
    for x in 0..n_states {
        let comps = decode(x);
        let mut hold = T::one();
        let mut row: Vec<(u32, T)> = Vec::with_capacity(m + 1);
        for i in 0..m {
            let (a, b) = (comps[i], comps[i + 1]);
            if a == b {
                continue; // identity swap stays on the diagonal
            }
            let y = x - a * stride[i] - b * stride[i + 1] + b * stride[i] + a * stride[i + 1];
            let acc = swap_acceptance(energies[a], energies[b], ladder);
            row.push((y as u32, ksw * acc));
            hold -= ksw * acc;
        }
        row.push((x as u32, hold));
        q_rows.push(row);
    }
    let q = Kernel::new(q_rows, log_pi, StateLabels::MacroTuple { n, m }, true);
    Ok(SwappingKernels { p, q })
}

/// Distribution of the number of successes of independent Bernoulli trials.
fn poisson_binomial<T: Scalar>(probs: &[T]) -> Vec<T> {
    let mut d = vec![T::zero(); probs.len() + 1];
    d[0] = T::one();
    for (t, &p) in probs.iter().enumerate() {
        for k in (1..=t + 1).rev() {
            d[k] = d[k] * (T::one() - p) + d[k - 1] * p;
        }
        d[0] *= T::one() - p;
    }
    d
}

/// The sign-aggregated swap walk on {0..M}: block k collects product states
/// whose replicas 1..M hold exactly k plus-sector configurations. Computed
/// exactly from the lumped structure (see module docs); reversible with
/// respect to the Poisson-binomial block masses by construction of the
/// underlying swap chain.
pub fn sign_walk_kernel<T: Scalar>(ladder: &LadderSpec<T>, k: T, n: usize) -> Kernel<T> {
    let space = MacroSpace::new(n);
    let m = ladder.m;
    let rung_lw: Vec<Vec<T>> = (0..=m).map(|i| rung_gibbs(ladder, i, k, n)).collect();
    let sector: Vec<(Vec<T>, Vec<T>)> =
        rung_lw.iter().map(|lw| signed_class_masses(lw, &space)).collect();
    let p_plus: Vec<T> = sector.iter().map(|(p, _)| p.iter().copied().sum()).collect();

    // block masses pi(Omega_k) over rungs 1..M and the same with rung 1
    // excluded (for the flux terms)
    let block_mass = poisson_binomial(&p_plus[1..]);
    let rest_mass = poisson_binomial(&p_plus[2.min(p_plus.len())..]);

    // boundary flux: only (0,1) swaps change the plus-count
    let energies: Vec<T> =
        space.states().iter().map(|st| crate::model::lumped_energy(st, k)).collect();
    let rho = |ea: T, eb: T| swap_acceptance(ea, eb, ladder);
    let (w0p, w0m) = &sector[0];
    let (w1p, w1m) = &sector[1];
    let mut s_pm = T::zero(); // x_0 in plus, x_1 in minus: k -> k+1
    let mut s_mp = T::zero(); // x_0 in minus, x_1 in plus: k -> k-1
    for a in 0..space.len() {
        for b in 0..space.len() {
            let r = rho(energies[a], energies[b]);
            s_pm += w0p[a] * w1m[b] * r;
            s_mp += w0m[a] * w1p[b] * r;
        }
    }

    let ksw = T::one() / (sc::<T>(2.0) * sc::<T>(m as f64));
    let mut rows: Vec<Vec<(u32, T)>> = Vec::with_capacity(m + 1);
    let mut log_pi = Vec::with_capacity(m + 1);
    for kk in 0..=m {
        log_pi.push(block_mass[kk].ln());
        let mut hold = T::one();
        let mut row: Vec<(u32, T)> = Vec::with_capacity(3);
        if kk < m {
            let up = ksw * rest_mass[kk] * s_pm / block_mass[kk];
            row.push(((kk + 1) as u32, up));
            hold -= up;
        }
        if kk > 0 {
            let dn = ksw * rest_mass[kk - 1] * s_mp / block_mass[kk];
            row.push(((kk - 1) as u32, dn));
            hold -= dn;
        }
        row.push((kk as u32, hold));
        rows.push(row);
    }
    Kernel::new(rows, log_pi, StateLabels::Rung { m }, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn swap_acceptance_cases() {
        let ladder = LadderSpec::new(2.0f64, 4).unwrap();
        assert_eq!(swap_acceptance(3.0, 3.0, &ladder), 1.0);
        assert_eq!(swap_acceptance(5.0, 3.0, &ladder), 1.0);
        let a = swap_acceptance(3.0, 5.0, &ladder);
        assert!((a - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn swap_acceptance_lower_bound_random_states() {
        // over random macrostate energies at N = M, acceptance stays above
        // exp(-beta (K+1) N / M)
        let n = 12usize;
        let k = 1.3f64;
        let ladder = LadderSpec::new(2.5f64, n).unwrap();
        let bound = (-ladder.beta * (k + 1.0) * n as f64 / n as f64).exp();
        let space = MacroSpace::new(n);
        let mut rng = stream_rng(5, 0);
        for _ in 0..2000 {
            let a = space.state(uniform_index(&mut rng, space.len()));
            let b = space.state(uniform_index(&mut rng, space.len()));
            let acc = swap_acceptance(
                crate::model::lumped_energy(&a, k),
                crate::model::lumped_energy(&b, k),
                &ladder,
            );
            assert!(acc >= bound - 1e-15, "{acc} < {bound}");
        }
    }

    #[test]
    fn phase_q_single_replica_is_identity() {
        let ladder = LadderSpec::new(1.0f64, 1).unwrap();
        let mut st = ReplicaState { replicas: vec![SpinState::new(SpinConfig::zeros(3))] };
        let before = st.replicas[0].config.clone();
        let mut rng = stream_rng(1, 2);
        for _ in 0..50 {
            swapping_step(&mut st, &ladder, 1.2, &mut rng, SwapPhase::Q);
        }
        assert_eq!(st.replicas[0].config, before);
    }

    #[test]
    fn phase_q_preserves_configuration_multiset() {
        let n = 6usize;
        let ladder = LadderSpec::new(2.0f64, 3).unwrap();
        let mut st = ReplicaState::cold_start(n, 3);
        let mut rng = stream_rng(8, 3);
        // randomize configurations first with P moves
        for _ in 0..5000 {
            swapping_step(&mut st, &ladder, 1.1, &mut rng, SwapPhase::P);
        }
        let mut multiset: Vec<Vec<i8>> =
            st.replicas.iter().map(|r| r.config.spins().to_vec()).collect();
        multiset.sort();
        for _ in 0..5000 {
            swapping_step(&mut st, &ladder, 1.1, &mut rng, SwapPhase::Q);
        }
        let mut after: Vec<Vec<i8>> =
            st.replicas.iter().map(|r| r.config.spins().to_vec()).collect();
        after.sort();
        assert_eq!(multiset, after);
    }

    #[test]
    fn lumped_swapping_small_instance() {
        // n = 2, M = 1: 36 product states
        let ladder = LadderSpec::new(1.5f64, 1).unwrap();
        let sw = lumped_swapping(&ladder, 1.2, 2, 500_000).unwrap();
        assert_eq!(sw.p.n_states(), 36);
        sw.p.validate().unwrap();
        // Q alone preserves the configuration multiset, so it is reducible;
        // check everything but irreducibility
        sw.q.check_row_sums(1e-12).unwrap();
        sw.q.check_detailed_balance(1e-9).unwrap();
        sw.q.check_lazy().unwrap();
        let qpq = sw.qpq().unwrap();
        qpq.check_row_sums(1e-12).unwrap();
        qpq.check_detailed_balance(1e-9).unwrap();
        qpq.check_irreducible().unwrap();
    }

    #[test]
    fn lumped_swapping_cap() {
        let ladder = LadderSpec::new(1.5f64, 4).unwrap();
        assert!(matches!(
            lumped_swapping(&ladder, 1.2, 4, 500_000),
            Err(KernelError::SizeExceeded { .. })
        ));
    }

    #[test]
    fn sign_walk_matches_explicit_signed_product() {
        // brute-force oracle: build the swap chain on the product of
        // sign-refined macrostate classes and aggregate by plus-count
        let n = 2usize;
        let m = 2usize;
        let k = 1.05f64;
        let ladder = LadderSpec::new(2.2824f64, m).unwrap();
        let space = MacroSpace::new(n);

        // signed classes: (class index, sign, mass per rung)
        let rung_lw: Vec<Vec<f64>> = (0..=m).map(|i| rung_gibbs(&ladder, i, k, n)).collect();
        let mut classes: Vec<(usize, i8)> = Vec::new();
        for (j, st) in space.states().iter().enumerate() {
            if st.s > 0 || (st.s == 0 && st.r == 0) {
                classes.push((j, 1));
            } else if st.s < 0 {
                classes.push((j, -1));
            } else {
                classes.push((j, 1));
                classes.push((j, -1));
            }
        }
        let mass = |rung: usize, ci: usize| -> f64 {
            let (j, sign) = classes[ci];
            let st = space.state(j);
            let w = rung_lw[rung][j].exp();
            if st.s == 0 && st.r > 0 {
                w / 2.0
            } else if st.s == 0 && st.r == 0 && sign == -1 {
                0.0
            } else {
                w
            }
        };
        let nc = classes.len();
        let n_states = nc.pow((m + 1) as u32);
        let decode = |mut x: usize| -> Vec<usize> {
            (0..=m)
                .map(|_| {
                    let c = x % nc;
                    x /= nc;
                    c
                })
                .collect()
        };
        let energies: Vec<f64> = classes
            .iter()
            .map(|&(j, _)| crate::model::lumped_energy(&space.state(j), k))
            .collect();
        let pi: Vec<f64> = (0..n_states)
            .map(|x| decode(x).iter().enumerate().map(|(i, &c)| mass(i, c)).product())
            .collect();
        let kof = |x: usize| -> usize {
            decode(x)[1..].iter().filter(|&&c| classes[c].1 > 0).count()
        };
        // aggregate flux of the explicit swap kernel
        let mut block = vec![0.0f64; m + 1];
        let mut flux = vec![vec![0.0f64; m + 1]; m + 1];
        let ksw = 1.0 / (2.0 * m as f64);
        let mut stride = vec![1usize; m + 1];
        for i in 1..=m {
            stride[i] = stride[i - 1] * nc;
        }
        for x in 0..n_states {
            if pi[x] == 0.0 {
                continue;
            }
            let comps = decode(x);
            block[kof(x)] += pi[x];
            let mut hold = 1.0;
            for i in 0..m {
                let (a, b) = (comps[i], comps[i + 1]);
                let acc = (1.0f64).min(
                    ((ladder.beta / m as f64) * (energies[a] - energies[b])).exp(),
                );
                let p = ksw * acc;
                if a != b {
                    let y = x - a * stride[i] - b * stride[i + 1]
                        + b * stride[i]
                        + a * stride[i + 1];
                    flux[kof(x)][kof(y)] += pi[x] * p;
                    hold -= p;
                }
            }
            flux[kof(x)][kof(x)] += pi[x] * hold;
        }
        let total: f64 = block.iter().sum();
        let qbar = sign_walk_kernel(&ladder, k, n);
        qbar.validate().unwrap();
        let qpi = qbar.pi();
        for kk in 0..=m {
            assert!((block[kk] / total - qpi[kk]).abs() < 1e-12, "mass {kk}");
            for jj in 0..=m {
                let expect = flux[kk][jj] / block[kk];
                assert!(
                    (qbar.entry(kk, jj) - expect).abs() < 1e-12,
                    "({kk},{jj}): {} vs {expect}",
                    qbar.entry(kk, jj)
                );
            }
        }
    }

    #[test]
    fn swaps_never_slow_the_configuration_phase() {
        // recorded comparison on a torpid instance: adding the swap phase
        // never lowers the gap of the configuration phase alone (the ABA
        // inequality applied to Q P Q, checked on exact product kernels)
        let n = 3usize;
        let m = 3usize;
        let beta = 2.2824f64;
        let k = 1.05f64;
        let ladder = LadderSpec::new(beta, m).unwrap();
        let sw = lumped_swapping(&ladder, k, n, 500_000).unwrap();
        let qpq = sw.qpq().unwrap();
        let opts = crate::spectral::SpectralOpts { assume_psd: true, ..Default::default() };
        let gap_qpq = crate::spectral::spectral_gap_with(&qpq, &opts).unwrap().gap;
        let gap_p = crate::spectral::spectral_gap_with(&sw.p, &opts).unwrap().gap;
        assert!(gap_qpq >= gap_p - 1e-12, "{gap_qpq} < {gap_p}");
    }

    #[test]
    fn qpq_trajectory_matches_product_law() {
        // small instance: empirical law of the lumped class tuple under QPQ
        // sweeps vs the exact product measure
        let n = 4usize;
        let m = 2usize;
        let k = 1.1f64;
        let ladder = LadderSpec::new(1.0f64, m).unwrap();
        let space = MacroSpace::new(n);
        let c = space.len();
        let mut st = ReplicaState::cold_start(n, m);
        let mut rng = stream_rng(77, 1);
        let sweeps = 4_000_000usize;
        let mut counts = vec![0u64; c.pow((m + 1) as u32)];
        for _ in 0..sweeps {
            swapping_step(&mut st, &ladder, k, &mut rng, SwapPhase::Q);
            swapping_step(&mut st, &ladder, k, &mut rng, SwapPhase::P);
            swapping_step(&mut st, &ladder, k, &mut rng, SwapPhase::Q);
            let mut idx = 0usize;
            for (i, rep) in st.replicas.iter().enumerate() {
                idx += space.index_of(rep.s, rep.r) * c.pow(i as u32);
            }
            counts[idx] += 1;
        }
        let rung_lw: Vec<Vec<f64>> = (0..=m).map(|i| rung_gibbs(&ladder, i, k, n)).collect();
        let mut tv = 0.0;
        for (idx, &cnt) in counts.iter().enumerate() {
            let mut x = idx;
            let mut lw = 0.0;
            for rlw in rung_lw.iter() {
                lw += rlw[x % c];
                x /= c;
            }
            tv += (lw.exp() - cnt as f64 / sweeps as f64).abs();
        }
        tv /= 2.0;
        assert!(tv < 0.02, "TV = {tv}");
    }
}
