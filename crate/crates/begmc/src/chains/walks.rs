//! Auxiliary walks for the comparison bounds: the Metropolis walk targeting
//! the binomial distribution, and the two trace-vector walks over the free
//! coordinates of the global/local partition.

use rand::RngCore;

use crate::chains::kernel::{Kernel, KernelError, StateLabels};
use crate::rng::{uniform_index, uniform_unit};
use crate::scalar::{log_factorials, sc, Scalar};

/// Metropolis chain on {0..M} with the symmetric +-1 proposal (reflecting
/// half-mass at the ends) and binomial(M, 1/2) target. Its gap satisfies
/// 1/M <= Gap <= 2/M.
pub fn binomial_walk<T: Scalar>(m: usize) -> Kernel<T> {
    assert!(m >= 1);
    let lf = log_factorials::<T>(m);
    let logw: Vec<T> = (0..=m).map(|i| lf[m] - lf[i] - lf[m - i]).collect();
    let half = sc::<T>(0.5);
    let mut rows = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let mut hold = T::zero();
        let mut row: Vec<(u32, T)> = Vec::with_capacity(3);
        for j in [i.wrapping_sub(1), i + 1] {
            if j > m {
                // boundary: the proposal mass stays put
                hold += half;
                continue;
            }
            let lr = logw[j] - logw[i];
            let acc = if lr >= T::zero() { T::one() } else { lr.exp() };
            row.push((j as u32, half * acc));
            hold += half * (T::one() - acc);
        }
        row.push((i as u32, hold));
        rows.push(row);
    }
    Kernel::new(rows, logw, StateLabels::Rung { m }, false)
}

/// The two comparison walks on the trace hypercube {0,1}^{M - i_c + 1}
/// (coordinates i_c..=M; lower coordinates are pinned to 1 and excluded).
#[derive(Debug, Clone)]
pub struct TraceWalks<T> {
    /// Swap/flip walk: flip the bottom free coordinate or swap an adjacent
    /// pair, Metropolis-accepted, with half holding.
    pub rw1: Kernel<T>,
    /// Independent resampler: pick a free coordinate, redraw it from its
    /// marginal.
    pub rw2: Kernel<T>,
    /// Number of free coordinates.
    pub free: usize,
    /// Gap of rw2, exactly 1/free: rw2 is the product chain of rank-one
    /// resamplers (each with unit gap), so the product-chain identity
    /// applies at any size.
    pub rw2_gap: T,
}

/// Builds both walks from the per-rung Bernoulli weights
/// `pi_hat[i] = (mass of 0 = local side, mass of 1 = global side)` for the
/// free rungs i_c..=m, as a kernel over bitmasks. Fails when 2^free exceeds
/// `cap`; `rw2_gap` is available at any size via [`rw2_exact_gap`].
pub fn trace_walks<T: Scalar>(
    pi_hat: &[(T, T)],
    i_c: usize,
    m: usize,
    cap: usize,
) -> Result<TraceWalks<T>, KernelError> {
    let free = m - i_c + 1;
    assert_eq!(pi_hat.len(), free, "one weight pair per free rung");
    for &(w0, w1) in pi_hat {
        assert!(
            ((w0 + w1) - T::one()).abs() <= sc(1e-12) && w0 > T::zero() && w1 > T::zero(),
            "pi_hat entries must be positive probability pairs"
        );
    }
    let states = 1usize
        .checked_shl(free as u32)
        .filter(|&s| s <= cap)
        .ok_or(KernelError::SizeExceeded { states: usize::MAX, cap })?;

    let logw_bit = |b: usize, v: usize| -> T {
        let (w0, w1) = pi_hat[b];
        if v == 1 { w1.ln() } else { w0.ln() }
    };
    let log_pi: Vec<T> = (0..states)
        .map(|t| (0..free).map(|b| logw_bit(b, t >> b & 1)).sum())
        .collect();

    // RW1: one flip move (bottom coordinate) + free-1 adjacent swaps,
    // each chosen with probability 1/(2 free)
    let pick = T::one() / (sc::<T>(2.0) * sc::<T>(free as f64));
    let mut rw1_rows = Vec::with_capacity(states);
    for t in 0..states {
        let mut hold = T::one();
        let mut row: Vec<(u32, T)> = Vec::with_capacity(free + 1);
        let push = |row: &mut Vec<(u32, T)>, hold: &mut T, t2: usize| {
            let lr = log_pi[t2] - log_pi[t];
            let acc = if lr >= T::zero() { T::one() } else { lr.exp() };
            row.push((t2 as u32, pick * acc));
            *hold -= pick * acc;
        };
        push(&mut row, &mut hold, t ^ 1);
        for b in 0..free - 1 {
            let (u, v) = (t >> b & 1, t >> (b + 1) & 1);
            if u == v {
                continue; // swap is the identity
            }
            push(&mut row, &mut hold, t ^ (1 << b) ^ (1 << (b + 1)));
        }
        row.push((t as u32, hold));
        rw1_rows.push(row);
    }
    let rw1 = Kernel::new(rw1_rows, log_pi.clone(), StateLabels::TraceBits { m, i_c }, true);

    // RW2: full per-coordinate refresh
    let pick2 = T::one() / sc::<T>(free as f64);
    let mut rw2_rows = Vec::with_capacity(states);
    for t in 0..states {
        let mut row: Vec<(u32, T)> = Vec::with_capacity(free + 1);
        let mut diag = T::zero();
        for b in 0..free {
            let (w0, w1) = pi_hat[b];
            let cur = t >> b & 1;
            let (w_stay, w_move) = if cur == 1 { (w1, w0) } else { (w0, w1) };
            diag += pick2 * w_stay;
            row.push(((t ^ (1 << b)) as u32, pick2 * w_move));
        }
        row.push((t as u32, diag));
        rw2_rows.push(row);
    }
    let rw2 = Kernel::new(rw2_rows, log_pi, StateLabels::TraceBits { m, i_c }, false);

    Ok(TraceWalks { rw1, rw2, free, rw2_gap: rw2_exact_gap(free) })
}

/// Gap of the resampling walk at any size: the product-chain identity gives
/// min_i Gap(component) / free, and a full refresh has unit gap.
pub fn rw2_exact_gap<T: Scalar>(free: usize) -> T {
    T::one() / sc::<T>(free as f64)
}

/// Report of the canonical-path certificate comparing RW1 to RW2.
#[derive(Debug, Clone)]
pub struct PathCertificate {
    pub edges_checked: usize,
    pub violations: usize,
    /// Worst log-slack of pi(z) RW1(z,z') >= 1/2 pi(t) RW2(t,t'); negative
    /// values would be violations.
    pub min_log_slack: f64,
}

/// Samples RW2 transitions t -> t' (one coordinate refreshed) and walks the
/// canonical path (swap the coordinate down to the bottom, flip, swap back),
/// checking pi(z) RW1(z,z') >= 1/2 pi(t) RW2(t,t') on every edge. This is
/// the load-bearing inequality behind the comparison
/// Gap(RW1) >= Gap(RW2) / (4M^2 + 2M), checkable at sizes where the
/// hypercube cannot be materialized.
pub fn rw1_path_certificate<T: Scalar, R: RngCore>(
    pi_hat: &[(T, T)],
    samples: usize,
    rng: &mut R,
) -> PathCertificate {
    let free = pi_hat.len();
    let lw = |b: usize, v: u8| -> T {
        let (w0, w1) = pi_hat[b];
        if v == 1 { w1.ln() } else { w0.ln() }
    };
    let log_pi = |t: &[u8]| -> T { t.iter().enumerate().map(|(b, &v)| lw(b, v)).sum() };
    let pick1 = T::one() / (sc::<T>(2.0) * sc::<T>(free as f64));
    let rw1_edge = |z: &[u8], z2: &[u8]| -> T {
        let lr = log_pi(z2) - log_pi(z);
        let acc = if lr >= T::zero() { T::one() } else { lr.exp() };
        pick1 * acc
    };
    let mut cert =
        PathCertificate { edges_checked: 0, violations: 0, min_log_slack: f64::INFINITY };
    for _ in 0..samples {
        // t ~ pi_hat
        let t: Vec<u8> = (0..free)
            .map(|b| {
                let (w0, w1) = pi_hat[b];
                let p1 = (w1 / (w0 + w1)).f64();
                u8::from(uniform_unit(rng) < p1)
            })
            .collect();
        let i = uniform_index(rng, free);
        let flipped = 1 - t[i];
        // pi(t) RW2(t, t') with t' = flip at i
        let rhs = log_pi(&t) + lw(i, flipped) - sc::<T>(free as f64).ln() - sc::<T>(2.0).ln();
        let check = |z: &[u8], z2: &[u8], cert: &mut PathCertificate| {
            let lhs = log_pi(z) + rw1_edge(z, z2).ln();
            let slack = (lhs - rhs).f64();
            cert.edges_checked += 1;
            if slack < -1e-9 {
                cert.violations += 1;
            }
            cert.min_log_slack = cert.min_log_slack.min(slack);
        };
        // p1: swap coordinate i down to 0
        let mut z = t.clone();
        for b in (1..=i).rev() {
            let mut z2 = z.clone();
            z2.swap(b, b - 1);
            check(&z, &z2, &mut cert);
            z = z2;
        }
        // p2: flip at the bottom
        let mut z2 = z.clone();
        z2[0] = 1 - z2[0];
        check(&z, &z2, &mut cert);
        z = z2;
        // p3: swap back up
        for b in 0..i {
            let mut z2 = z.clone();
            z2.swap(b, b + 1);
            check(&z, &z2, &mut cert);
            z = z2;
        }
        debug_assert_eq!(z[i], flipped);
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn binomial_walk_m1_symmetric() {
        let k = binomial_walk::<f64>(1);
        k.validate().unwrap();
        assert_eq!(k.entry(0, 1), 0.5);
        assert_eq!(k.entry(1, 0), 0.5);
        // two states, eigenvalues {1, 0}: gap exactly 1
        let gap = crate::spectral::spectral_gap(&k).unwrap().gap;
        assert!((gap - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binomial_walk_targets_binomial() {
        let m = 12;
        let k = binomial_walk::<f64>(m);
        k.validate().unwrap();
        let pi = k.pi();
        let mut choose = 1.0f64;
        for i in 0..=m {
            let expect = choose / 2f64.powi(m as i32);
            assert!((pi[i] - expect).abs() < 1e-12, "i = {i}");
            choose = choose * (m - i) as f64 / (i + 1) as f64;
        }
    }

    #[test]
    fn trace_walks_validate() {
        let pi_hat: Vec<(f64, f64)> =
            vec![(0.4, 0.6), (0.25, 0.75), (0.1, 0.9), (0.05, 0.95)];
        let tw = trace_walks(&pi_hat, 3, 6, 1 << 20).unwrap();
        assert_eq!(tw.free, 4);
        tw.rw1.validate().unwrap();
        tw.rw2.check_row_sums(1e-12).unwrap();
        tw.rw2.check_detailed_balance(1e-9).unwrap();
        assert!((tw.rw2_gap - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rw2_is_memoryless_per_coordinate() {
        // after one rw2 move of coordinate b, its marginal is exactly pi_hat
        let pi_hat: Vec<(f64, f64)> = vec![(0.3, 0.7), (0.6, 0.4)];
        let tw = trace_walks(&pi_hat, 0, 1, 1024).unwrap();
        // row from state 00: move mass to 01 is (1/2) * w1(bit0)
        assert!((tw.rw2.entry(0, 1) - 0.5 * 0.7).abs() < 1e-15);
        assert!((tw.rw2.entry(0, 2) - 0.5 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn path_certificate_holds_on_monotone_weights() {
        // weights with pi_i(1) nondecreasing, as produced by the partition
        let pi_hat: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let p1 = 0.5 + 0.45 * (i as f64 / 11.0);
                (1.0 - p1, p1)
            })
            .collect();
        let mut rng = stream_rng(3, 4);
        let cert = rw1_path_certificate(&pi_hat, 2000, &mut rng);
        assert_eq!(cert.violations, 0, "min slack {}", cert.min_log_slack);
        assert!(cert.edges_checked > 2000);
    }
}
