//! Simulated tempering on the lumped state space: macrostates x rungs.
//!
//! The temperature move Q proposes i -> i+-1 with mass 1/(2(M+1)) and accepts
//! with min(1, pi_j(sigma)/pi_i(sigma)); that ratio needs the exact partition
//! functions Z(beta_i) - rarely available in closed form, but exactly
//! computable on the lumped space at the sizes this crate targets, which is
//! a deliberate liberty taken consistently. The configuration move P_st applies the
//! lumped Metropolis kernel of the current rung. The composite chain is the
//! matrix product Q P_st Q, reversible with respect to
//! pi(sigma, i) = pi_i(sigma) / (M+1).

use crate::chains::kernel::{Kernel, KernelError, StateLabels};
use crate::chains::metropolis::lumped_metropolis_raw;
use crate::model::{log_class_weight, LadderSpec, MacroSpace, PhasePoint};
use crate::scalar::{log_factorials, log_sum_exp, sc, Scalar};

/// The three tempering kernels on the product space (macrostate, rung),
/// indexed rung-major: state = rung * C + macro_index.
#[derive(Debug, Clone)]
pub struct TemperingKernels<T> {
    pub q: Kernel<T>,
    pub p_st: Kernel<T>,
    pub composite: Kernel<T>,
}

/// Builds Q, P_st and the composite Q P_st Q for the ladder beta_i = i/M beta.
pub fn tempering_kernels<T: Scalar>(
    ladder: &LadderSpec<T>,
    k: T,
    n: usize,
) -> Result<TemperingKernels<T>, KernelError> {
    let space = MacroSpace::new(n);
    let c = space.len();
    let m = ladder.m;
    let n_states = c * (m + 1);
    let lf = log_factorials::<T>(n);

    // per-rung log class weights and log partition values
    let mut lw = Vec::with_capacity(m + 1);
    let mut lz = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let beta_i = ladder.beta_i(i);
        let w: Vec<T> = space
            .states()
            .iter()
            .map(|st| log_class_weight(st, &PhasePoint { beta: beta_i, k }, &lf))
            .collect();
        lz.push(log_sum_exp(&w));
        lw.push(w);
    }

    // stationary law pi(sigma, i) = pi_i(sigma) / (M+1)
    let mut log_pi = Vec::with_capacity(n_states);
    for i in 0..=m {
        for j in 0..c {
            log_pi.push(lw[i][j] - lz[i]);
        }
    }

    // Q: temperature moves, K_tm = 1/(2(M+1)) per neighbor rung
    let ktm = T::one() / (sc::<T>(2.0) * sc::<T>((m + 1) as f64));
    let mut q_rows: Vec<Vec<(u32, T)>> = Vec::with_capacity(n_states);
    for i in 0..=m {
        for j in 0..c {
            let x = i * c + j;
            let mut hold = T::one();
            let mut row: Vec<(u32, T)> = Vec::with_capacity(3);
            for tgt in [i.wrapping_sub(1), i + 1] {
                if tgt > m {
                    continue;
                }
                // log pi_tgt(sigma) - log pi_i(sigma)
                let lr = (lw[tgt][j] - lz[tgt]) - (lw[i][j] - lz[i]);
                let acc = if lr >= T::zero() { T::one() } else { lr.exp() };
                let pmove = ktm * acc;
                row.push(((tgt * c + j) as u32, pmove));
                hold -= pmove;
            }
            row.push((x as u32, hold));
            q_rows.push(row);
        }
    }
    let q = Kernel::new(q_rows, log_pi.clone(), StateLabels::MacroRung { n, m }, true);

    // P_st: block-diagonal lumped Metropolis per rung
    let mut p_rows: Vec<Vec<(u32, T)>> = Vec::with_capacity(n_states);
    for i in 0..=m {
        let block = lumped_metropolis_raw(ladder.beta_i(i), k, n);
        for j in 0..c {
            let row = block
                .row(j)
                .iter()
                .map(|&(col, v)| ((i * c + col as usize) as u32, v))
                .collect();
            p_rows.push(row);
        }
    }
    let p_st = Kernel::new(p_rows, log_pi, StateLabels::MacroRung { n, m }, true);

    let composite = q.compose(&p_st)?.compose(&q)?;
    Ok(TemperingKernels { q, p_st, composite })
}
