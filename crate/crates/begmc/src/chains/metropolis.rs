//! Metropolis chains for the BEG Gibbs measure: spin-level steps for
//! simulation, and exact lumped transition matrices for analysis.
//!
//! The base chain holds with probability 1/2 and otherwise proposes one of
//! the 2N single-site respellings uniformly (each with probability 1/(4N)).
//! Acceptance follows the +beta*H convention: uphill in H always accepted,
//! downhill with probability exp(beta * dH).
//!
//! Exact analysis happens on lumped spaces: the proposal and acceptance
//! probabilities depend on a configuration only through its macrostate and
//! the move class, so the induced macrostate process is Markov. The
//! microstate kernel exists to certify that lumping at small N.

use rand::RngCore;

use crate::chains::kernel::{half_space_states, Kernel, StateLabels};
use crate::model::{
    hamiltonian, lumped_energy, macro_gibbs, macrostate_of, uniform_rung_gibbs, Macrostate,
    MacroSpace, PhasePoint, SpinConfig,
};
use crate::rng::{uniform_index, uniform_unit};
use crate::scalar::{log_factorials, sc, Scalar};

/// The six single-site move classes: (from-spin, to-spin, ds, dr).
const MOVE_CLASSES: [(i8, i8, i64, i64); 6] = [
    (1, 0, -1, -1),
    (1, -1, -2, 0),
    (-1, 0, 1, -1),
    (-1, 1, 2, 0),
    (0, 1, 1, 1),
    (0, -1, -1, 1),
];

fn class_count(m: &Macrostate, from: i8) -> i64 {
    match from {
        1 => m.n_plus(),
        -1 => m.n_minus(),
        _ => m.n_zero(),
    }
}

/// One draw from the base chain: holds with probability 1/2, otherwise a
/// uniform single-site respelling.
pub fn base_proposal<R: RngCore>(sigma: &SpinConfig, rng: &mut R) -> SpinConfig {
    let n = sigma.n();
    let mut out = sigma.clone();
    if uniform_unit(rng) < 0.5 {
        return out;
    }
    let pick = uniform_index(rng, 2 * n);
    let (site, alt) = (pick / 2, pick % 2);
    let old = sigma.spin(site);
    // the two respellings of a spin value, in a fixed order
    let candidates = match old {
        1 => [0, -1],
        -1 => [0, 1],
        _ => [1, -1],
    };
    out.set_spin(site, candidates[alt]);
    out
}

/// One Metropolis step at the given phase point.
pub fn metropolis_step<T: Scalar, R: RngCore>(
    sigma: &SpinConfig,
    p: &PhasePoint<T>,
    rng: &mut R,
) -> SpinConfig {
    let proposal = base_proposal(sigma, rng);
    let dh = hamiltonian(&proposal, p.k) - hamiltonian(sigma, p.k);
    if dh >= T::zero() || uniform_unit(rng) < (p.beta * dh).exp().f64() {
        proposal
    } else {
        sigma.clone()
    }
}

/// Spin configuration with cached macrostate, for long simulations.
#[derive(Debug, Clone)]
pub struct SpinState {
    pub config: SpinConfig,
    pub s: i64,
    pub r: i64,
}

impl SpinState {
    pub fn new(config: SpinConfig) -> Self {
        let m = macrostate_of(&config);
        Self { config, s: m.s, r: m.r }
    }

    pub fn energy<T: Scalar>(&self, k: T) -> T {
        let s = sc::<T>(self.s as f64);
        -sc::<T>(self.r as f64) + k * s * s / sc::<T>(self.config.n() as f64)
    }

    /// In-place Metropolis step; returns true if the configuration changed.
    /// Draws at most 3 uniform words.
    pub fn step<T: Scalar, R: RngCore>(&mut self, beta: T, k: T, rng: &mut R) -> bool {
        if uniform_unit(rng) < 0.5 {
            return false;
        }
        let n = self.config.n();
        let pick = uniform_index(rng, 2 * n);
        let (site, alt) = (pick / 2, pick % 2);
        let old = self.config.spin(site);
        let candidates = match old {
            1 => [0, -1],
            -1 => [0, 1],
            _ => [1, -1],
        };
        let new = candidates[alt];
        let (ds, dr) = ((new - old) as i64, ((new * new) - (old * old)) as i64);
        let nf = sc::<T>(n as f64);
        let s_new = sc::<T>((self.s + ds) as f64);
        let s_old = sc::<T>(self.s as f64);
        let dh = -sc::<T>(dr as f64) + k * (s_new * s_new - s_old * s_old) / nf;
        let accept = dh >= T::zero() || uniform_unit(rng) < (beta * dh).exp().f64();
        if accept {
            self.config.set_spin(site, new);
            self.s += ds;
            self.r += dr;
            true
        } else {
            false
        }
    }
}

/// Exact lumped Metropolis kernel on the macrostate space.
///
/// From (s, r) there are six move classes; class v -> v' carries proposal
/// mass n_v / (4N) and the Metropolis acceptance computed from the lumped
/// energy difference. Holding completes each row. The stationary law is the
/// exact macrostate Gibbs distribution.
pub fn lumped_metropolis<T: Scalar>(p: &PhasePoint<T>, n: usize) -> Kernel<T> {
    lumped_metropolis_raw(p.beta, p.k, n)
}

/// Same, allowing beta = 0 (the infinite-temperature rung of a ladder).
pub fn lumped_metropolis_raw<T: Scalar>(beta: T, k: T, n: usize) -> Kernel<T> {
    let space = MacroSpace::new(n);
    let log_pi = if beta == T::zero() {
        uniform_rung_gibbs(n)
    } else {
        macro_gibbs(&PhasePoint { beta, k }, n)
    };
    let quarter_n = sc::<T>(4.0 * n as f64);
    let mut rows = Vec::with_capacity(space.len());
    for m in space.states() {
        let e0 = lumped_energy(m, k);
        let mut hold = sc::<T>(0.5);
        let mut row: Vec<(u32, T)> = Vec::with_capacity(7);
        for (from, _to, ds, dr) in MOVE_CLASSES {
            let cnt = class_count(m, from);
            if cnt == 0 {
                continue;
            }
            let (s2, r2) = (m.s + ds, m.r + dr);
            debug_assert!(space.contains(s2, r2));
            let target = Macrostate { s: s2, r: r2, n };
            let prop = sc::<T>(cnt as f64) / quarter_n;
            let dh = lumped_energy(&target, k) - e0;
            let acc = if dh >= T::zero() { T::one() } else { (beta * dh).exp() };
            row.push((space.index_of(s2, r2) as u32, prop * acc));
            hold += prop * (T::one() - acc);
        }
        row.push((space.index_of(m.s, m.r) as u32, hold));
        rows.push(row);
    }
    Kernel::new(rows, log_pi, StateLabels::Macro { n }, true)
}

/// Full microstate Metropolis kernel on {-1,0,1}^n (3^n states, base-3
/// codes). Only for small n; this is the lumpability oracle.
pub fn microstate_metropolis<T: Scalar>(p: &PhasePoint<T>, n: usize) -> Kernel<T> {
    let total = 3usize.pow(n as u32);
    let decode = |code: usize| -> SpinConfig {
        let mut c = code;
        SpinConfig::new(
            (0..n)
                .map(|_| {
                    let v = (c % 3) as i8 - 1;
                    c /= 3;
                    v
                })
                .collect(),
        )
        .expect("valid spins")
    };
    let pow3: Vec<usize> = (0..n).map(|j| 3usize.pow(j as u32)).collect();
    let quarter_n = sc::<T>(4.0 * n as f64);
    let mut rows = Vec::with_capacity(total);
    let mut log_pi = Vec::with_capacity(total);
    for code in 0..total {
        let sigma = decode(code);
        let h0 = hamiltonian(&sigma, p.k);
        log_pi.push(p.beta * h0);
        let mut hold = sc::<T>(0.5);
        let mut row: Vec<(u32, T)> = Vec::with_capacity(2 * n + 1);
        for site in 0..n {
            let old = sigma.spin(site);
            for new in [-1i8, 0, 1] {
                if new == old {
                    continue;
                }
                let code2 = (code as i64 + (new as i64 - old as i64) * pow3[site] as i64) as usize;
                let mut sig2 = sigma.clone();
                sig2.set_spin(site, new);
                let dh = hamiltonian(&sig2, p.k) - h0;
                let acc = if dh >= T::zero() { T::one() } else { (p.beta * dh).exp() };
                let prop = T::one() / quarter_n;
                row.push((code2 as u32, prop * acc));
                hold += prop * (T::one() - acc);
            }
        }
        row.push((code as u32, hold));
        rows.push(row);
    }
    Kernel::new(rows, log_pi, StateLabels::Micro { n }, true)
}

/// Exact aggregation over s >= 0 classes of the Metropolis chain restricted
/// to the positive sign sector.
///
/// Classes with s = 0 (other than the all-zero class) contribute half their
/// configurations to the sector, and moves between an s = 1 class and an
/// s = 0 class connect to exactly half of the s = 0 endpoints; both halvings
/// are exact counting identities, so the aggregated chain below is the exact
/// block average of the restricted microstate chain. Moves that would leave
/// the sector (s' < 0) are rejected into holding.
pub fn half_space_metropolis<T: Scalar>(beta: T, k: T, n: usize) -> Kernel<T> {
    let states = half_space_states(n);
    let index: std::collections::HashMap<(i64, i64), usize> =
        states.iter().copied().enumerate().map(|(i, sr)| (sr, i)).collect();
    let lf = log_factorials::<T>(n);
    let half = sc::<T>(0.5);
    let quarter_n = sc::<T>(4.0 * n as f64);
    let mut rows = Vec::with_capacity(states.len());
    let mut log_pi = Vec::with_capacity(states.len());
    for &(s, r) in &states {
        let m = Macrostate { s, r, n };
        let mut lw = crate::model::log_multiplicity_with(&m, &lf) + beta * lumped_energy(&m, k);
        if s == 0 && r > 0 {
            lw -= sc::<T>(2.0).ln();
        }
        log_pi.push(lw);
        let e0 = lumped_energy(&m, k);
        let mut hold = half;
        let mut row: Vec<(u32, T)> = Vec::with_capacity(7);
        for (from, _to, ds, dr) in MOVE_CLASSES {
            let cnt = class_count(&m, from);
            if cnt == 0 {
                continue;
            }
            let (s2, r2) = (s + ds, r + dr);
            let prop = sc::<T>(cnt as f64) / quarter_n;
            if s2 < 0 {
                // leaves the sector: rejected
                hold += prop;
                continue;
            }
            let target = Macrostate { s: s2, r: r2, n };
            let dh = lumped_energy(&target, k) - e0;
            let acc = if dh >= T::zero() { T::one() } else { (beta * dh).exp() };
            // landing on a split s = 0 class reaches only half its states
            let frac = if s >= 1 && s2 == 0 && r2 > 0 { half } else { T::one() };
            row.push((index[&(s2, r2)] as u32, prop * acc * frac));
            hold += prop * (T::one() - acc) + prop * acc * (T::one() - frac);
        }
        row.push((index[&(s, r)] as u32, hold));
        rows.push(row);
    }
    Kernel::new(rows, log_pi, StateLabels::HalfMacro { n }, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn base_proposal_frequencies_n1() {
        // N = 1: holding exactly 1/2, each alternative 1/4
        let sigma = SpinConfig::new(vec![0]).unwrap();
        let mut rng = stream_rng(7, 0);
        let trials = 400_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            let out = base_proposal(&sigma, &mut rng);
            counts[(out.spin(0) + 1) as usize] += 1;
        }
        let hold = counts[1] as f64 / trials as f64;
        assert!((hold - 0.5).abs() < 0.005, "{hold}");
        for c in [counts[0], counts[2]] {
            let f = c as f64 / trials as f64;
            assert!((f - 0.25).abs() < 0.005, "{f}");
        }
    }

    #[test]
    fn base_proposal_single_site_and_uniform() {
        let sigma = SpinConfig::new(vec![1, -1, 0, 1, 0]).unwrap();
        let n = sigma.n();
        let mut rng = stream_rng(11, 0);
        let trials = 2_000_000usize;
        let mut move_counts = std::collections::HashMap::new();
        for _ in 0..trials {
            let out = base_proposal(&sigma, &mut rng);
            let diffs: Vec<usize> =
                (0..n).filter(|&i| out.spin(i) != sigma.spin(i)).collect();
            assert!(diffs.len() <= 1);
            if let Some(&site) = diffs.first() {
                *move_counts.entry((site, out.spin(site))).or_insert(0usize) += 1;
            }
        }
        // each of the 2N respellings should appear with frequency 1/(4N),
        // within 3 sigma
        let p = 1.0 / (4.0 * n as f64);
        let sigma3 = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
        assert_eq!(move_counts.len(), 2 * n);
        for (&mv, &c) in &move_counts {
            let f = c as f64 / trials as f64;
            assert!((f - p).abs() < sigma3, "{mv:?}: {f} vs {p}");
        }
    }

    #[test]
    fn metropolis_always_accepts_uphill_and_at_beta_zero() {
        // beta ~ 0: acceptance is 1, chain follows the base proposal
        let p = PhasePoint { beta: 1e-300f64, k: 1.0 };
        let sigma = SpinConfig::new(vec![1, 0, -1]).unwrap();
        let mut rng_a = stream_rng(3, 1);
        let mut rng_b = stream_rng(3, 1);
        for _ in 0..200 {
            let stepped = metropolis_step(&sigma, &p, &mut rng_a);
            let proposed = base_proposal(&sigma, &mut rng_b);
            assert_eq!(stepped.spins(), proposed.spins());
            // rng_a consumed one extra word only when dh < 0; re-sync
            rng_a = stream_rng(3, 1);
            rng_b = stream_rng(3, 1);
        }
    }

    #[test]
    fn lumped_kernel_n1_entries() {
        // 3 macrostates at n = 1: (0,0), (-1,1), (1,1)
        let p = PhasePoint { beta: 0.8f64, k: 1.3 };
        let k = lumped_metropolis(&p, 1);
        k.validate().unwrap();
        let space = MacroSpace::new(1);
        let i00 = space.index_of(0, 0);
        let i11 = space.index_of(1, 1);
        // (0,0) -> (1,1): proposal 1/4, dH = k - 1 > 0: accepted
        let expect = 0.25f64;
        assert!((k.entry(i00, i11) - expect).abs() < 1e-15);
        // (1,1) -> (0,0): dH = 1 - k < 0: acceptance e^{beta (1-k)}
        let expect = 0.25 * (0.8f64 * (1.0 - 1.3)).exp();
        assert!((k.entry(i11, i00) - expect).abs() < 1e-15);
    }

    #[test]
    fn lumped_rows_sum_up_to_n200() {
        let p = PhasePoint { beta: 1.5f64, k: 1.05 };
        let k = lumped_metropolis(&p, 200);
        k.check_row_sums(1e-12).unwrap();
        k.check_detailed_balance(1e-9).unwrap();
    }

    #[test]
    fn lumpability_certificate_small_n() {
        // microstate kernel aggregated by macrostate equals the lumped
        // kernel entrywise; rates from any representative agree (strong
        // lumpability), checked for every microstate row
        for n in [2usize, 3, 4] {
            let p = PhasePoint { beta: 0.9f64, k: 1.2 };
            let micro = microstate_metropolis(&p, n);
            let lumped = lumped_metropolis(&p, n);
            let space = MacroSpace::new(n);
            let decode_class = |code: usize| {
                let mut c = code;
                let mut s = 0i64;
                let mut r = 0i64;
                for _ in 0..n {
                    let v = (c % 3) as i64 - 1;
                    c /= 3;
                    s += v;
                    r += v * v;
                }
                space.index_of(s, r)
            };
            for code in 0..3usize.pow(n as u32) {
                let ci = decode_class(code);
                let mut agg = vec![0.0f64; space.len()];
                for &(j, v) in micro.row(code) {
                    agg[decode_class(j as usize)] += v;
                }
                for cj in 0..space.len() {
                    let diff = (agg[cj] - lumped.entry(ci, cj)).abs();
                    assert!(diff < 1e-12, "n={n} micro {code}: {diff}");
                }
            }
        }
    }

    #[test]
    fn half_space_kernel_is_exact_restriction_aggregate() {
        // oracle: restrict the microstate chain to the positive sector
        // (reject exits), aggregate over s >= 0 classes, compare entrywise
        let n = 5usize;
        let p = PhasePoint { beta: 1.1f64, k: 1.15 };
        let micro = microstate_metropolis(&p, n);
        let half = half_space_metropolis(p.beta, p.k, n);
        let states = half_space_states(n);
        let hidx: std::collections::HashMap<(i64, i64), usize> =
            states.iter().copied().enumerate().map(|(i, sr)| (sr, i)).collect();
        let decode = |code: usize| {
            let mut c = code;
            let mut spins = Vec::with_capacity(n);
            for _ in 0..n {
                spins.push((c % 3) as i8 - 1);
                c /= 3;
            }
            spins
        };
        let in_sector = |spins: &[i8]| {
            let s: i64 = spins.iter().map(|&v| v as i64).sum();
            if s != 0 {
                return s > 0;
            }
            match spins.iter().find(|&&v| v != 0) {
                Some(&v) => v > 0,
                None => true,
            }
        };
        let class_of = |spins: &[i8]| {
            let s: i64 = spins.iter().map(|&v| v as i64).sum();
            let r: i64 = spins.iter().map(|&v| (v * v) as i64).sum();
            hidx[&(s, r)]
        };
        let total = 3usize.pow(n as u32);
        let pi = micro.pi();
        // aggregated flux / block mass
        let mut flux = vec![vec![0.0f64; states.len()]; states.len()];
        let mut mass = vec![0.0f64; states.len()];
        for code in 0..total {
            let spins = decode(code);
            if !in_sector(&spins) {
                continue;
            }
            let ci = class_of(&spins);
            mass[ci] += pi[code];
            let mut stay = 0.0;
            for &(j, v) in micro.row(code) {
                let t = decode(j as usize);
                if in_sector(&t) {
                    if j as usize == code {
                        stay += v;
                    } else {
                        flux[ci][class_of(&t)] += pi[code] * v;
                    }
                } else {
                    stay += v; // rejected exit
                }
            }
            flux[ci][ci] += pi[code] * stay;
        }
        for i in 0..states.len() {
            for j in 0..states.len() {
                let expect = flux[i][j] / mass[i];
                let got = half.entry(i, j);
                assert!(
                    (expect - got).abs() < 1e-12,
                    "({:?} -> {:?}): {expect} vs {got}",
                    states[i],
                    states[j]
                );
            }
        }
        half.validate().unwrap();
    }

    #[test]
    fn long_run_histogram_matches_macro_gibbs() {
        // N = 6, beta = 1, K = 1: empirical macrostate law vs exact, TV < 0.01
        let n = 6usize;
        let p = PhasePoint { beta: 1.0f64, k: 1.0 };
        let space = MacroSpace::new(n);
        let mut state = SpinState::new(SpinConfig::zeros(n));
        let mut rng = stream_rng(2024, 9);
        let mut counts = vec![0u64; space.len()];
        let steps = 3_000_000usize;
        for _ in 0..steps {
            state.step(p.beta, p.k, &mut rng);
            counts[space.index_of(state.s, state.r)] += 1;
        }
        let exact: Vec<f64> = macro_gibbs(&p, n).iter().map(|w| w.exp()).collect();
        let tv: f64 = exact
            .iter()
            .zip(&counts)
            .map(|(&e, &c)| (e - c as f64 / steps as f64).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "TV = {tv}");
    }
}
