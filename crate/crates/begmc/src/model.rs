//! The mean-field Blume-Emery-Griffiths Hamiltonian, its Gibbs measures, and
//! the exact macrostate lumping.
//!
//! Sign convention: Gibbs weights are `exp(+beta * H)`, i.e. states of larger
//! H carry more mass. This is opposite to the usual statistical-mechanics
//! convention and is used consistently everywhere in this crate, including
//! every Metropolis acceptance rule (uphill in H is always accepted).
//!
//! All weights are kept in log domain and normalized by log-sum-exp;
//! `beta * H` reaches several hundred at the system sizes we target and naive
//! exponentiation would overflow.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{log_factorials, log_sum_exp, sc, xlogx, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid spin value {0} (must be -1, 0, or +1)")]
    BadSpin(i8),
    #[error("invalid macrostate (s={s}, r={r}, n={n}): requires |s| <= r <= n and s = r mod 2")]
    BadMacrostate { s: i64, r: i64, n: usize },
    #[error("invalid type vector ({0}, {1}, {2}): nonnegative entries summing to 1 required")]
    BadTypeVector(f64, f64, f64),
    #[error("invalid phase point: beta and k must be positive")]
    BadPhasePoint,
    #[error("invalid ladder: m >= 1 and beta > 0 required")]
    BadLadder,
}

/// A configuration sigma in {-1, 0, +1}^N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self, ModelError> {
        if let Some(&bad) = spins.iter().find(|&&v| !(-1..=1).contains(&v)) {
            return Err(ModelError::BadSpin(bad));
        }
        Ok(Self { spins })
    }

    /// The all-zero configuration on n sites.
    pub fn zeros(n: usize) -> Self {
        Self { spins: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, i: usize) -> i8 {
        self.spins[i]
    }

    /// Sets site i, keeping the {-1,0,1} invariant.
    pub fn set_spin(&mut self, i: usize, v: i8) {
        debug_assert!((-1..=1).contains(&v));
        self.spins[i] = v;
    }
}

/// Lumped state (s, r) = (total magnetization, nonzero-spin count).
///
/// The counts n_+ = (r+s)/2, n_- = (r-s)/2, n_0 = n-r are all nonnegative
/// integers, which is exactly the validity condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Macrostate {
    pub s: i64,
    pub r: i64,
    pub n: usize,
}

impl Macrostate {
    pub fn new(s: i64, r: i64, n: usize) -> Result<Self, ModelError> {
        let ok = r >= 0 && r <= n as i64 && s.abs() <= r && (s - r).rem_euclid(2) == 0;
        if !ok {
            return Err(ModelError::BadMacrostate { s, r, n });
        }
        Ok(Self { s, r, n })
    }

    pub fn n_plus(&self) -> i64 {
        (self.r + self.s) / 2
    }

    pub fn n_minus(&self) -> i64 {
        (self.r - self.s) / 2
    }

    pub fn n_zero(&self) -> i64 {
        self.n as i64 - self.r
    }
}

/// Canonical enumeration of all macrostates for a given N: r ascending, then
/// s ascending. This ordering is the state indexing used by every lumped
/// kernel, so matrices and test vectors are reproducible.
#[derive(Debug, Clone)]
pub struct MacroSpace {
    n: usize,
    states: Vec<Macrostate>,
}

impl MacroSpace {
    pub fn new(n: usize) -> Self {
        let mut states = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for r in 0..=n as i64 {
            let mut s = -r;
            while s <= r {
                states.push(Macrostate { s, r, n });
                s += 2;
            }
        }
        Self { n, states }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn states(&self) -> &[Macrostate] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> Macrostate {
        self.states[idx]
    }

    /// Index of (s, r) under the canonical ordering: r(r+1)/2 + (r+s)/2.
    pub fn index_of(&self, s: i64, r: i64) -> usize {
        debug_assert!(r >= 0 && r <= self.n as i64 && s.abs() <= r && (s - r) % 2 == 0);
        (r * (r + 1) / 2 + (r + s) / 2) as usize
    }

    pub fn contains(&self, s: i64, r: i64) -> bool {
        r >= 0 && r <= self.n as i64 && s.abs() <= r && (s - r).rem_euclid(2) == 0
    }
}

/// Point on the 2-simplex: fractions of -1, 0, +1 spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeVector<T> {
    pub a_minus: T,
    pub a_zero: T,
    pub a_plus: T,
}

impl<T: Scalar> TypeVector<T> {
    pub fn new(a_minus: T, a_zero: T, a_plus: T) -> Result<Self, ModelError> {
        let sum = a_minus + a_zero + a_plus;
        let ok = a_minus >= T::zero()
            && a_zero >= T::zero()
            && a_plus >= T::zero()
            && (sum - T::one()).abs() <= sc(1e-12);
        if !ok {
            return Err(ModelError::BadTypeVector(a_minus.f64(), a_zero.f64(), a_plus.f64()));
        }
        Ok(Self { a_minus, a_zero, a_plus })
    }

    /// a_plus - a_minus, the magnetization coordinate.
    pub fn z(&self) -> T {
        self.a_plus - self.a_minus
    }

    /// Mirror image under +/- exchange.
    pub fn mirrored(&self) -> Self {
        Self { a_minus: self.a_plus, a_zero: self.a_zero, a_plus: self.a_minus }
    }

    /// Discrete type of a macrostate: (n_-, n_0, n_+)/N.
    pub fn of_macrostate(m: &Macrostate) -> Self {
        let n = sc::<T>(m.n as f64);
        Self {
            a_minus: sc::<T>(m.n_minus() as f64) / n,
            a_zero: sc::<T>(m.n_zero() as f64) / n,
            a_plus: sc::<T>(m.n_plus() as f64) / n,
        }
    }
}

/// Inverse temperature and coupling (beta, K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<T> {
    pub beta: T,
    pub k: T,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new(beta: T, k: T) -> Result<Self, ModelError> {
        if beta <= T::zero() || k <= T::zero() {
            return Err(ModelError::BadPhasePoint);
        }
        Ok(Self { beta, k })
    }
}

/// Temperature ladder beta_i = i * beta / M for i = 0..=M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec<T> {
    pub beta: T,
    pub m: usize,
    betas: Vec<T>,
}

impl<T: Scalar> LadderSpec<T> {
    pub fn new(beta: T, m: usize) -> Result<Self, ModelError> {
        if m == 0 || beta <= T::zero() {
            return Err(ModelError::BadLadder);
        }
        let betas = (0..=m).map(|i| sc::<T>(i as f64) * beta / sc::<T>(m as f64)).collect();
        Ok(Self { beta, m, betas })
    }

    pub fn betas(&self) -> &[T] {
        &self.betas
    }

    pub fn beta_i(&self, i: usize) -> T {
        self.betas[i]
    }

    pub fn rungs(&self) -> usize {
        self.m + 1
    }
}

/// H(sigma) = -sum sigma_j^2 + (K/N) (sum sigma_j)^2.
pub fn hamiltonian<T: Scalar>(sigma: &SpinConfig, k: T) -> T {
    lumped_energy(&macrostate_of(sigma), k)
}

/// (s, r) = (sum sigma_j, sum sigma_j^2).
pub fn macrostate_of(sigma: &SpinConfig) -> Macrostate {
    let mut s = 0i64;
    let mut r = 0i64;
    for &v in sigma.spins() {
        s += v as i64;
        r += (v * v) as i64;
    }
    Macrostate { s, r, n: sigma.n() }
}

/// Energy of the whole class A_{s,r}: -r + K s^2 / N.
pub fn lumped_energy<T: Scalar>(m: &Macrostate, k: T) -> T {
    let s = sc::<T>(m.s as f64);
    -sc::<T>(m.r as f64) + k * s * s / sc::<T>(m.n as f64)
}

/// log |A_{s,r}| = log[ C(N, r) * C(r, (r+s)/2) ], via log-factorials.
pub fn log_multiplicity<T: Scalar>(m: &Macrostate) -> Result<T, ModelError> {
    let m = Macrostate::new(m.s, m.r, m.n)?;
    let lf = log_factorials::<T>(m.n);
    Ok(log_multiplicity_with(&m, &lf))
}

/// Same as [`log_multiplicity`] but reusing a precomputed log-factorial table
/// of length >= n+1 (hot path for kernel construction).
pub fn log_multiplicity_with<T: Scalar>(m: &Macrostate, log_fact: &[T]) -> T {
    let n = m.n;
    let (r, np, nm) = (m.r as usize, m.n_plus() as usize, m.n_minus() as usize);
    // C(n, r) * C(r, n_+) = n! / ((n-r)! n_+! n_-!)
    log_fact[n] - log_fact[n - r] - log_fact[np] - log_fact[nm]
}

/// Unnormalized log Gibbs weight of a macrostate class:
/// log|A_{s,r}| + beta * H.
pub fn log_class_weight<T: Scalar>(m: &Macrostate, p: &PhasePoint<T>, log_fact: &[T]) -> T {
    log_multiplicity_with(m, log_fact) + p.beta * lumped_energy(m, p.k)
}

/// Log partition function log Z(beta) by exact class summation.
/// At beta = 0 this is N log 3.
pub fn log_partition<T: Scalar>(p: &PhasePoint<T>, n: usize) -> T {
    assert!(n >= 1, "n >= 1 required");
    let space = MacroSpace::new(n);
    let lf = log_factorials::<T>(n);
    let lw: Vec<T> = space.states().iter().map(|m| log_class_weight(m, p, &lf)).collect();
    log_sum_exp(&lw)
}

/// Exact Gibbs distribution over macrostates, as normalized log-probabilities
/// in the canonical [`MacroSpace`] order.
pub fn macro_gibbs<T: Scalar>(p: &PhasePoint<T>, n: usize) -> Vec<T> {
    assert!(n >= 1, "n >= 1 required");
    let space = MacroSpace::new(n);
    let lf = log_factorials::<T>(n);
    let mut lw: Vec<T> = space.states().iter().map(|m| log_class_weight(m, p, &lf)).collect();
    let lz = log_sum_exp(&lw);
    for w in &mut lw {
        *w -= lz;
    }
    lw
}

/// Free-energy density
/// f_beta(a) = beta (-a_{-1} - a_1 + K (a_1 - a_{-1})^2) - sum_i a_i log a_i,
/// with the boundary convention x log x -> 0.
pub fn free_energy<T: Scalar>(a: &TypeVector<T>, p: &PhasePoint<T>) -> T {
    let z = a.z();
    p.beta * (-(a.a_minus + a.a_plus) + p.k * z * z)
        - (xlogx(a.a_minus) + xlogx(a.a_zero) + xlogx(a.a_plus))
}

/// Overlaps Sum_{(s,r)} min(pi_i, pi_{i+1}) for each adjacent ladder pair.
///
/// Computed on macrostates; equal to the microstate sum because the Gibbs
/// probabilities are constant on each class, so min and the class sum commute.
pub fn ladder_overlaps<T: Scalar>(ladder: &LadderSpec<T>, k: T, n: usize) -> Vec<T> {
    let dists: Vec<Vec<T>> = ladder
        .betas()
        .iter()
        .map(|&b| {
            if b == T::zero() {
                // beta = 0 is a valid rung even though PhasePoint requires beta > 0
                uniform_rung_gibbs::<T>(n)
            } else {
                macro_gibbs(&PhasePoint { beta: b, k }, n)
            }
        })
        .collect();
    (0..ladder.m)
        .map(|i| {
            dists[i]
                .iter()
                .zip(&dists[i + 1])
                .map(|(&a, &b)| if a < b { a } else { b }.exp())
                .sum()
        })
        .collect()
}

/// Normalized log-probabilities of the infinite-temperature (beta = 0) rung:
/// each class gets mass |A_{s,r}| / 3^N.
pub fn uniform_rung_gibbs<T: Scalar>(n: usize) -> Vec<T> {
    let space = MacroSpace::new(n);
    let lf = log_factorials::<T>(n);
    let log3n = sc::<T>(n as f64) * sc::<T>(3.0).ln();
    space.states().iter().map(|m| log_multiplicity_with(m, &lf) - log3n).collect()
}

/// Log Gibbs weights of one ladder rung (handles the beta = 0 rung).
pub fn rung_gibbs<T: Scalar>(ladder: &LadderSpec<T>, i: usize, k: T, n: usize) -> Vec<T> {
    let b = ladder.beta_i(i);
    if b == T::zero() {
        uniform_rung_gibbs(n)
    } else {
        macro_gibbs(&PhasePoint { beta: b, k }, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(spins: &[i8]) -> SpinConfig {
        SpinConfig::new(spins.to_vec()).unwrap()
    }

    /// Brute-force enumeration of all 3^n configurations (test oracle).
    fn enumerate_configs(n: usize) -> Vec<SpinConfig> {
        let total = 3usize.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let spins = (0..n)
                    .map(|_| {
                        let v = (code % 3) as i8 - 1;
                        code /= 3;
                        v
                    })
                    .collect();
                SpinConfig::new(spins).unwrap()
            })
            .collect()
    }

    #[test]
    fn hamiltonian_trivial_cases() {
        assert_eq!(hamiltonian(&SpinConfig::zeros(4), 1.3), 0.0);
        // all +1: (K - 1) * N
        let n = 5;
        let all_plus = cfg(&[1; 5]);
        let k = 2.0;
        let h: f64 = hamiltonian(&all_plus, k);
        assert!((h - (k - 1.0) * n as f64).abs() < 1e-12);
        // N = 2, (+1, -1), K = 1 -> -2
        let h: f64 = hamiltonian(&cfg(&[1, -1]), 1.0);
        assert!((h + 2.0).abs() < 1e-12);
    }

    #[test]
    fn macrostate_of_examples() {
        let m = macrostate_of(&cfg(&[0, 0, 0]));
        assert_eq!((m.s, m.r), (0, 0));
        let m = macrostate_of(&cfg(&[1, -1, 1]));
        assert_eq!((m.s, m.r), (1, 3));
        let m = macrostate_of(&cfg(&[-1, -1, 0, 0]));
        assert_eq!((m.s, m.r), (-2, 2));
    }

    #[test]
    fn lumped_energy_examples() {
        let m = Macrostate::new(0, 0, 7).unwrap();
        assert_eq!(lumped_energy::<f64>(&m, 0.9), 0.0);
        let m = Macrostate::new(4, 4, 4).unwrap();
        let k = 1.7;
        let e: f64 = lumped_energy(&m, k);
        assert!((e - (k - 1.0) * 4.0).abs() < 1e-12);
        let m = Macrostate::new(2, 4, 4).unwrap();
        let e: f64 = lumped_energy(&m, 1.0);
        assert!((e + 3.0).abs() < 1e-12);
    }

    #[test]
    fn log_multiplicity_by_enumeration() {
        // N=2, (s=0, r=2): enumerate all 9 configs of {-1,0,1}^2
        let count = enumerate_configs(2)
            .iter()
            .filter(|c| {
                let m = macrostate_of(c);
                (m.s, m.r) == (0, 2)
            })
            .count();
        assert_eq!(count, 2);
        let lm: f64 = log_multiplicity(&Macrostate::new(0, 2, 2).unwrap()).unwrap();
        assert!((lm - (count as f64).ln()).abs() < 1e-12);

        // N=3, (s=1, r=3)
        let count = enumerate_configs(3)
            .iter()
            .filter(|c| {
                let m = macrostate_of(c);
                (m.s, m.r) == (1, 3)
            })
            .count();
        assert_eq!(count, 3);
        let lm: f64 = log_multiplicity(&Macrostate::new(1, 3, 3).unwrap()).unwrap();
        assert!((lm - (count as f64).ln()).abs() < 1e-12);

        // single-configuration class
        let lm: f64 = log_multiplicity(&Macrostate::new(4, 4, 4).unwrap()).unwrap();
        assert!(lm.abs() < 1e-12);
    }

    #[test]
    fn log_multiplicity_rejects_invalid() {
        assert!(log_multiplicity::<f64>(&Macrostate { s: 1, r: 0, n: 3 }).is_err());
        assert!(log_multiplicity::<f64>(&Macrostate { s: 1, r: 2, n: 3 }).is_err());
    }

    #[test]
    fn log_partition_beta_zero_and_n1() {
        // beta -> 0 limit: N log 3 (evaluated at tiny beta by continuity and
        // exactly via the multiplicity sum)
        let space = MacroSpace::new(5);
        let lf = log_factorials::<f64>(5);
        let lw: Vec<f64> =
            space.states().iter().map(|m| log_multiplicity_with(m, &lf)).collect();
        assert!((log_sum_exp(&lw) - 5.0 * 3f64.ln()).abs() < 1e-12);

        // n = 1: log(1 + 2 e^{beta (k-1)})
        let p = PhasePoint::new(0.7, 1.4).unwrap();
        let expect = (1.0 + 2.0 * (0.7f64 * 0.4).exp()).ln();
        assert!((log_partition(&p, 1) - expect).abs() < 1e-12);
    }

    #[test]
    fn log_partition_matches_microstate_sum_n8() {
        // brute-force oracle over all 3^8 microstates
        let p = PhasePoint::new(1.0, 1.2).unwrap();
        let n = 8;
        let direct: Vec<f64> =
            enumerate_configs(n).iter().map(|c| p.beta * hamiltonian(c, p.k)).collect();
        let oracle = log_sum_exp(&direct);
        assert!((log_partition(&p, n) - oracle).abs() < 1e-11);
    }

    #[test]
    fn macro_gibbs_matches_microstate_aggregation() {
        let p = PhasePoint::new(1.0, 1.2).unwrap();
        let n = 8;
        let space = MacroSpace::new(n);
        let mut mass = vec![0.0f64; space.len()];
        let lz: f64 = log_partition(&p, n);
        for c in enumerate_configs(n) {
            let m = macrostate_of(&c);
            let lw: f64 = p.beta * hamiltonian(&c, p.k) - lz;
            mass[space.index_of(m.s, m.r)] += lw.exp();
        }
        let lp: Vec<f64> = macro_gibbs(&p, n);
        for (i, &lw) in lp.iter().enumerate() {
            assert!((lw.exp() - mass[i]).abs() < 1e-12, "class {i}");
        }
    }

    #[test]
    fn macro_gibbs_normalized_and_symmetric() {
        let p = PhasePoint::new(2.0, 1.05).unwrap();
        let n = 40;
        let lp: Vec<f64> = macro_gibbs(&p, n);
        let total: f64 = lp.iter().map(|w| w.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let space = MacroSpace::new(n);
        for m in space.states() {
            let a = lp[space.index_of(m.s, m.r)];
            let b = lp[space.index_of(-m.s, m.r)];
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn macro_gibbs_beta_zero_mass() {
        // beta = 0, n = 2: the (0,0) class has one of nine configs
        let lw = uniform_rung_gibbs::<f64>(2);
        let space = MacroSpace::new(2);
        let w00 = lw[space.index_of(0, 0)].exp();
        assert!((w00 - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn free_energy_entropy_only_and_symmetry() {
        let third = 1.0 / 3.0;
        let a = TypeVector::new(third, third, third).unwrap();
        // beta -> 0: pure entropy log 3; realize with the smallest valid beta
        let p = PhasePoint { beta: 0.0f64, k: 1.0 };
        let f: f64 = free_energy(&a, &p);
        assert!((f - 3f64.ln()).abs() < 1e-12);

        let p = PhasePoint::new(1.7, 1.1).unwrap();
        let a = TypeVector::new(0.2, 0.5, 0.3).unwrap();
        let d: f64 = free_energy(&a, &p) - free_energy(&a.mirrored(), &p);
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn free_energy_matches_exact_class_weight_at_n200() {
        // (1/N) log of the exact class weight approximates f_beta(a) up to
        // O(log N / N) at the discrete type closest to a_max(0).
        let beta = 1.1f64;
        let p = PhasePoint::new(beta, 1.2).unwrap();
        let n = 200usize;
        let a1 = (-beta).exp() / (1.0 + 2.0 * (-beta).exp());
        let np = (a1 * n as f64).round() as i64;
        let m = Macrostate::new(0, 2 * np, n).unwrap();
        let lf = log_factorials::<f64>(n);
        let exact = log_class_weight(&m, &p, &lf) / n as f64;
        let a = TypeVector::of_macrostate(&m);
        let f = free_energy(&a, &p);
        let tol = 2.0 * (n as f64).ln() / n as f64;
        assert!(
            (exact - f).abs() <= tol,
            "exact/N = {exact}, f = {f}, tol = {tol}"
        );
    }

    #[test]
    fn overlaps_degenerate_ladder() {
        // identical adjacent measures -> overlap exactly 1 (here: K such that
        // all rungs share the uniform law is impossible; instead check the
        // exact-equality path via a two-rung ladder at tiny beta)
        let ladder = LadderSpec::new(1e-14, 1).unwrap();
        let ov: Vec<f64> = ladder_overlaps(&ladder, 1.2, 10);
        assert_eq!(ov.len(), 1);
        assert!((ov[0] - 1.0).abs() < 1e-9);
        assert!(ov.iter().all(|&x| x > 0.0 && x <= 1.0 + 1e-15));
    }

    #[test]
    fn macrospace_index_roundtrip() {
        let space = MacroSpace::new(9);
        assert_eq!(space.len(), 55);
        for (i, m) in space.states().iter().enumerate() {
            assert_eq!(space.index_of(m.s, m.r), i);
        }
    }

    #[test]
    fn multiplicities_sum_to_3_pow_n() {
        for n in [1usize, 5, 20, 60] {
            let space = MacroSpace::new(n);
            let lf = log_factorials::<f64>(n);
            let lw: Vec<f64> =
                space.states().iter().map(|m| log_multiplicity_with(m, &lf)).collect();
            let total = log_sum_exp(&lw);
            assert!(
                (total - n as f64 * 3f64.ln()).abs() < 1e-10,
                "n = {n}: {total}"
            );
        }
    }

    #[test]
    fn multiplicities_exact_integers_to_n20() {
        // sum of exact integer multiplicities equals 3^N, and the log table
        // agrees with the exact integers
        for n in [10usize, 15, 20] {
            let binom = |a: usize, b: usize| -> u128 {
                let mut acc: u128 = 1;
                for i in 0..b {
                    acc = acc * (a - i) as u128 / (i + 1) as u128;
                }
                acc
            };
            let space = MacroSpace::new(n);
            let mut total: u128 = 0;
            for m in space.states() {
                let count = binom(n, m.r as usize) * binom(m.r as usize, m.n_plus() as usize);
                total += count;
                let lm: f64 = log_multiplicity(m).unwrap();
                assert!(
                    (lm - (count as f64).ln()).abs() < 1e-11,
                    "n={n} {:?}: {lm} vs ln {count}",
                    m
                );
            }
            assert_eq!(total, 3u128.pow(n as u32), "n={n}");
        }
    }

    #[test]
    fn multiplicities_exact_for_small_n_by_counting() {
        // exact integer counts for n <= 9 against enumeration
        for n in 1..=9usize {
            let space = MacroSpace::new(n);
            let mut counts = vec![0u64; space.len()];
            for c in enumerate_configs(n) {
                let m = macrostate_of(&c);
                counts[space.index_of(m.s, m.r)] += 1;
            }
            for (i, m) in space.states().iter().enumerate() {
                let lm: f64 = log_multiplicity(m).unwrap();
                assert!(
                    (lm - (counts[i] as f64).ln()).abs() < 1e-10,
                    "n={n} class {:?}",
                    m
                );
            }
        }
    }

    proptest! {
        #[test]
        fn hamiltonian_equals_lumped_energy(spins in proptest::collection::vec(-1i8..=1, 1..40), k in 0.1f64..3.0) {
            let c = SpinConfig::new(spins).unwrap();
            let h = hamiltonian(&c, k);
            let m = macrostate_of(&c);
            let e = lumped_energy(&m, k);
            prop_assert!((h - e).abs() < 1e-12);
            // H <= (K+1) N
            prop_assert!(h <= (k + 1.0) * c.n() as f64);
        }

        #[test]
        fn ladder_overlaps_in_unit_interval(beta in 0.2f64..3.0, k in 0.5f64..1.5, m in 1usize..6) {
            let ladder = LadderSpec::new(beta, m).unwrap();
            let ov = ladder_overlaps(&ladder, k, 12);
            prop_assert_eq!(ov.len(), m);
            for v in ov {
                prop_assert!(v > 0.0 && v <= 1.0 + 1e-12);
            }
        }
    }
}
