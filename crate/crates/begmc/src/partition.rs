//! State-space decompositions for the swapping analysis: the sign sectors,
//! per-replica signatures, the temperature-dependent global/local split of
//! the half-space, and trace vectors.
//!
//! "Nondecreasing path" is taken on the macrostate single-flip adjacency
//! graph with the rung's log-weights; the continuous picture speaks of paths
//! in the simplex, and the lattice the chains actually walk is its faithful
//! executable reading. Ties in discrete argmaxes resolve to the
//! lexicographically smaller state and are flagged.

use serde::Serialize;
use thiserror::Error;

use crate::chains::kernel::{half_space_index, half_space_states};
use crate::chains::swapping::ReplicaState;
use crate::landscape;
use crate::model::{LadderSpec, MacroSpace, SpinConfig};
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("k = {0} is not above the tricritical coupling; no second-order ladder split")]
    KBelowTricritical(f64),
    #[error("rung {rung} has {found} local maxima on the half-space (more than two)")]
    TooManyModes { rung: usize, found: usize },
}

/// Sign sector of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignLabel {
    Plus,
    Minus,
}

/// Plus if the magnetization is positive, the configuration is all-zero, or
/// the magnetization vanishes and the first nonzero spin is +1.
pub fn sign_of(sigma: &SpinConfig) -> SignLabel {
    let s: i64 = sigma.spins().iter().map(|&v| v as i64).sum();
    if s > 0 {
        return SignLabel::Plus;
    }
    if s < 0 {
        return SignLabel::Minus;
    }
    match sigma.spins().iter().find(|&&v| v != 0) {
        Some(&v) if v < 0 => SignLabel::Minus,
        _ => SignLabel::Plus,
    }
}

/// Signs of replicas 1..=M (the infinite-temperature replica 0 is exempt).
pub fn signature(x: &ReplicaState) -> Vec<SignLabel> {
    x.replicas.iter().skip(1).map(|r| sign_of(&r.config)).collect()
}

/// Number of plus signs in the signature: the index k of the block
/// Omega_k containing x.
pub fn omega_k_index(x: &ReplicaState) -> usize {
    signature(x).iter().filter(|&&s| s == SignLabel::Plus).count()
}

/// Per-class masses split by sign sector from normalized log class weights:
/// (plus, minus) in the [`MacroSpace`] order. s = 0 classes split in half,
/// except the all-zero class which is entirely plus.
pub fn signed_class_masses<T: Scalar>(lw: &[T], space: &MacroSpace) -> (Vec<T>, Vec<T>) {
    let mut plus = vec![T::zero(); lw.len()];
    let mut minus = vec![T::zero(); lw.len()];
    for (j, st) in space.states().iter().enumerate() {
        let w = lw[j].exp();
        if st.s > 0 {
            plus[j] = w;
        } else if st.s < 0 {
            minus[j] = w;
        } else if st.r == 0 {
            plus[j] = w;
        } else {
            plus[j] = w / sc(2.0);
            minus[j] = w / sc(2.0);
        }
    }
    (plus, minus)
}

/// Which side of the split a half-space class belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Block {
    Global,
    Local,
}

/// The temperature-dependent global/local partition of the half-space.
#[derive(Debug, Clone)]
pub struct GlPartition<T> {
    /// Largest rung with beta_i at or below the second-order critical value.
    pub i_c: usize,
    /// First rung whose discrete landscape is genuinely two-moded; the Local
    /// block is empty below it. On the lattice this onset sits above i_c:
    /// the second mode must first clear the persistence threshold.
    pub first_bimodal: Option<usize>,
    pub m: usize,
    pub n: usize,
    /// Half-space classes (shared indexing for all rungs).
    pub states: Vec<(i64, i64)>,
    /// Per-rung assignment, rungs 0..=M (rungs <= i_c are all Global).
    pub assignment: Vec<Vec<Block>>,
    /// Per-rung (pi_hat(0) = Local mass, pi_hat(1) = Global mass) under the
    /// positive-sector-conditioned law.
    pub masses: Vec<(T, T)>,
    /// Per-rung discrete modes: (global argmax, local argmax if bimodal).
    pub modes: Vec<(usize, Option<usize>)>,
    /// Any rung needed the lexicographic tie rule.
    pub ties_flagged: bool,
    /// States that lost their nondecreasing path to the global mode while
    /// already assigned Global; the construction keeps them Global (the
    /// continuous argument rules out Global -> Local movement, and the
    /// discrete watershed boundary can graze such states).
    pub forced_retentions: usize,
}

impl<T: Scalar> GlPartition<T> {
    pub fn block_of(&self, rung: usize, state_idx: usize) -> Block {
        self.assignment[rung][state_idx]
    }

    pub fn state_index(&self, s: i64, r: i64) -> usize {
        half_space_index(s, r)
    }

    /// Bernoulli weight pairs (pi_hat(0), pi_hat(1)) for the two-sided rungs
    /// first_bimodal..=M; the input to the trace walks. None when no rung is
    /// two-sided.
    pub fn walk_weights(&self) -> Option<(usize, Vec<(T, T)>)> {
        let start = self.first_bimodal?;
        Some((start, (start..=self.m).map(|i| self.masses[i]).collect()))
    }
}

/// Half-space single-flip adjacency: neighbors of (s, r) with s' reflected
/// to |s'|.
fn half_neighbors(s: i64, r: i64, n: usize) -> Vec<(i64, i64)> {
    const MOVES: [(i64, i64); 6] = [(-1, -1), (-2, 0), (1, -1), (2, 0), (1, 1), (-1, 1)];
    let mut out = Vec::with_capacity(6);
    for (ds, dr) in MOVES {
        let (s2, r2) = ((s + ds).abs(), r + dr);
        if r2 < 0 || r2 > n as i64 || s2 > r2 {
            continue;
        }
        if !out.contains(&(s2, r2)) && (s2, r2) != (s, r) {
            out.push((s2, r2));
        }
    }
    out
}

/// Log-weight persistence below which a discrete local maximum is treated as
/// a lattice artifact of a flat ridge and merged into its taller neighbor
/// basin. Genuine mode splits have barriers growing linearly in N; the
/// artifacts observed near criticality sit two orders of magnitude below
/// this at the sizes the partition is used for.
const MODE_PERSISTENCE: f64 = 0.25;

/// Result of the persistence sweep over one rung's weights.
struct RungModes {
    /// Persistent modes by decreasing height (at most the global mode plus
    /// the surviving secondary ones).
    modes: Vec<usize>,
    /// For every raw local maximum, the persistent mode its basin drains to.
    resolve: Vec<usize>,
    /// Raw discrete local maxima.
    raw_maxima: Vec<usize>,
    /// Weight at which each persistent secondary mode's component merged
    /// into the taller one (its connecting saddle), aligned with
    /// `modes[1..]`.
    saddles: Vec<usize>,
    ties: bool,
}

/// Classifies discrete local maxima by persistence: states are swept in
/// decreasing weight, basins grow by union-find, and a summit whose basin
/// first touches a taller basin at a saddle less than [`MODE_PERSISTENCE`]
/// below it is merged away.
fn rung_modes<T: Scalar>(lw: &[T], nbr: &[Vec<usize>]) -> RungModes {
    let n = lw.len();
    let beats = |a: usize, b: usize| lw[a] > lw[b] || (lw[a] == lw[b] && a < b);
    let raw_maxima: Vec<usize> =
        (0..n).filter(|&u| nbr[u].iter().all(|&v| beats(u, v))).collect();
    let ties = raw_maxima.iter().any(|&u| nbr[u].iter().any(|&v| lw[u] == lw[v]));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        lw[b].partial_cmp(&lw[a]).unwrap().then_with(|| a.cmp(&b))
    });
    let mut parent: Vec<usize> = (0..n).collect();
    let summit: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut processed = vec![false; n];
    let mut persistent: Vec<(usize, usize)> = Vec::new(); // (summit, saddle)
    let mut merged_into: std::collections::HashMap<usize, usize> =
        std::collections::HashMap::new();
    for &u in &order {
        let mut roots: Vec<usize> = Vec::new();
        for &v in &nbr[u] {
            if processed[v] {
                let r = find(&mut parent, v);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        processed[u] = true;
        if roots.is_empty() {
            continue; // u starts its own basin with summit u
        }
        roots.sort_by(|&a, &b| lw[summit[b]].partial_cmp(&lw[summit[a]]).unwrap());
        let main = roots[0];
        parent[u] = main;
        for &r in &roots[1..] {
            // saddle at u: the shorter basin dies here
            if (lw[summit[r]] - lw[u]) >= sc(MODE_PERSISTENCE) {
                persistent.push((summit[r], u));
            }
            merged_into.insert(summit[r], summit[main]);
            parent[r] = main;
        }
    }
    let global = order[0];
    persistent.sort_by(|&(a, _), &(b, _)| lw[b].partial_cmp(&lw[a]).unwrap());
    let mut modes = vec![global];
    modes.extend(persistent.iter().map(|&(s, _)| s));
    let saddles: Vec<usize> = persistent.iter().map(|&(_, sad)| sad).collect();
    // resolve every raw maximum to its surviving mode
    let resolve: Vec<usize> = raw_maxima
        .iter()
        .map(|&u| {
            let mut cur = u;
            while !modes.contains(&cur) {
                cur = merged_into[&cur];
            }
            cur
        })
        .collect();
    RungModes { modes, resolve, raw_maxima, saddles, ties }
}

/// Builds the partition. Rungs at or below i_c are entirely Global, as is
/// every rung whose discrete landscape has a single persistent mode. From
/// the first two-moded rung on, classes are assigned by nondecreasing-path
/// reachability to the two modes; both-reachable classes inherit the
/// previous rung's side, except at the onset rung where the steepest-ascent
/// watershed decides (the continuous construction derives that first split
/// from the path of the off-center maximum; the watershed is its discrete
/// counterpart).
pub fn build_gl_partition<T: Scalar>(
    ladder: &LadderSpec<T>,
    k: T,
    n: usize,
) -> Result<GlPartition<T>, PartitionError> {
    if k <= landscape::k_tricritical::<T>() {
        return Err(PartitionError::KBelowTricritical(k.f64()));
    }
    let beta_c2 =
        landscape::beta_c2_of_k(k).map_err(|_| PartitionError::KBelowTricritical(k.f64()))?;
    let m = ladder.m;
    let i_c = (0..=m).rev().find(|&i| ladder.beta_i(i) <= beta_c2).unwrap_or(0);

    let states = half_space_states(n);
    let idx: std::collections::HashMap<(i64, i64), usize> =
        states.iter().copied().enumerate().map(|(i, sr)| (sr, i)).collect();
    let nbr: Vec<Vec<usize>> = states
        .iter()
        .map(|&(s, r)| half_neighbors(s, r, n).into_iter().map(|sr| idx[&sr]).collect())
        .collect();
    let lf = crate::scalar::log_factorials::<T>(n);

    let mut assignment: Vec<Vec<Block>> = Vec::with_capacity(m + 1);
    let mut masses: Vec<(T, T)> = Vec::with_capacity(m + 1);
    let mut modes_out: Vec<(usize, Option<usize>)> = Vec::with_capacity(m + 1);
    let mut ties_flagged = false;
    let mut first_bimodal: Option<usize> = None;
    let mut forced_retentions = 0usize;

    for rung in 0..=m {
        let beta = ladder.beta_i(rung);
        // mode and path structure uses the full class weights (the lattice
        // reading of f); sector masses halve the s = 0 classes separately
        let lw: Vec<T> = states
            .iter()
            .map(|&(s, r)| {
                let st = crate::model::Macrostate { s, r, n };
                crate::model::log_multiplicity_with(&st, &lf)
                    + beta * crate::model::lumped_energy(&st, k)
            })
            .collect();

        let rm = rung_modes(&lw, &nbr);
        ties_flagged |= rm.ties;
        if rm.modes.len() > 2 {
            return Err(PartitionError::TooManyModes { rung, found: rm.modes.len() });
        }
        let a_g = rm.modes[0];
        let a_l = rm.modes.get(1).copied();
        modes_out.push((a_g, a_l));

        let blocks: Vec<Block> = if rung <= i_c || a_l.is_none() {
            vec![Block::Global; states.len()]
        } else {
            let a_l = a_l.unwrap();
            let saddle = rm.saddles[0];
            let beats = |a: usize, b: usize| lw[a] > lw[b] || (lw[a] == lw[b] && a < b);
            let onset = first_bimodal.is_none();
            if onset {
                first_bimodal = Some(rung);
            }
            // steepest-ascent watershed through the persistence merges
            let basin_of = |start: usize| -> usize {
                let mut cur = start;
                loop {
                    let up = nbr[cur]
                        .iter()
                        .copied()
                        .filter(|&v| !beats(cur, v))
                        .max_by(|&a, &b| {
                            lw[a].partial_cmp(&lw[b]).unwrap().then(b.cmp(&a))
                        });
                    match up {
                        Some(v) => cur = v,
                        None => break,
                    }
                }
                let pos = rm.raw_maxima.iter().position(|&p| p == cur).expect("summit");
                rm.resolve[pos]
            };
            // a state strictly above the connecting saddle has nondecreasing
            // paths only into its own basin's mode; at or below the saddle
            // both modes are reachable without descending, and the previous
            // rung's side is inherited (the onset rung uses the watershed)
            let mut blocks = Vec::with_capacity(states.len());
            for u in 0..states.len() {
                let b = if lw[u] > lw[saddle] {
                    let side = if basin_of(u) == a_l { Block::Local } else { Block::Global };
                    if side == Block::Local
                        && !onset
                        && assignment[rung - 1][u] == Block::Global
                    {
                        forced_retentions += 1;
                        Block::Global
                    } else {
                        side
                    }
                } else if onset {
                    if basin_of(u) == a_l {
                        Block::Local
                    } else {
                        Block::Global
                    }
                } else {
                    assignment[rung - 1][u]
                };
                blocks.push(b);
            }
            blocks
        };

        // sector-conditioned masses (s = 0 classes halve, all-zero stays),
        // aggregated in log domain: the Local mass is exponentially small
        // and would underflow per-state exponentiation
        let lw_sector: Vec<T> = states
            .iter()
            .zip(&lw)
            .map(
                |(&(s, r), &w)| {
                    if s == 0 && r > 0 {
                        w - sc::<T>(2.0).ln()
                    } else {
                        w
                    }
                },
            )
            .collect();
        let log_local = crate::scalar::log_sum_exp(
            &(0..states.len())
                .filter(|&u| blocks[u] == Block::Local)
                .map(|u| lw_sector[u])
                .collect::<Vec<T>>(),
        );
        let log_total = crate::scalar::log_sum_exp(&lw_sector);
        let local = (log_local - log_total).exp();
        masses.push((local, T::one() - local));
        assignment.push(blocks);
    }

    Ok(GlPartition {
        i_c,
        first_bimodal,
        m,
        n,
        states,
        assignment,
        masses,
        modes: modes_out,
        ties_flagged,
        forced_retentions,
    })
}

/// Trace vector: one bit per rung i_c..=M, 1 for the Global side. Rungs
/// below i_c are pinned to 1 and not stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceVector {
    pub i_c: usize,
    pub bits: Vec<bool>,
}

impl TraceVector {
    /// Bit for an absolute rung index (pinned prefix included).
    pub fn bit(&self, rung: usize) -> bool {
        if rung < self.i_c {
            true
        } else {
            self.bits[rung - self.i_c]
        }
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count() + self.i_c
    }
}

/// Trace of a sequence of per-rung macrostates (s may be signed; the
/// partition lives on the half-space).
pub fn trace_of_classes<T: Scalar>(classes: &[(i64, i64)], glp: &GlPartition<T>) -> TraceVector {
    assert_eq!(classes.len(), glp.m + 1, "one class per rung");
    let bits = (glp.i_c..=glp.m)
        .map(|i| {
            let (s, r) = classes[i];
            glp.block_of(i, glp.state_index(s, r)) == Block::Global
        })
        .collect();
    TraceVector { i_c: glp.i_c, bits }
}

/// Trace of a replica stack.
pub fn trace_of<T: Scalar>(x: &ReplicaState, glp: &GlPartition<T>) -> TraceVector {
    let classes: Vec<(i64, i64)> = x.replicas.iter().map(|rep| (rep.s, rep.r)).collect();
    trace_of_classes(&classes, glp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::SpinState;
    use crate::model::{log_partition, PhasePoint};

    fn cfg(spins: &[i8]) -> SpinConfig {
        SpinConfig::new(spins.to_vec()).unwrap()
    }

    #[test]
    fn sign_rules() {
        assert_eq!(sign_of(&cfg(&[0, 0, 0])), SignLabel::Plus);
        assert_eq!(sign_of(&cfg(&[-1, 1])), SignLabel::Minus);
        assert_eq!(sign_of(&cfg(&[0, 1, -1])), SignLabel::Plus);
        assert_eq!(sign_of(&cfg(&[1, 1, -1])), SignLabel::Plus);
        assert_eq!(sign_of(&cfg(&[-1, 0, 0])), SignLabel::Minus);
    }

    #[test]
    fn sign_constant_on_nonzero_magnetization_classes() {
        // enumerate all configs of n = 5: within each (s, r) class with
        // s != 0 the sign label is constant
        let n = 5usize;
        let total = 3usize.pow(n as u32);
        let mut by_class: std::collections::HashMap<(i64, i64), Vec<SignLabel>> =
            std::collections::HashMap::new();
        for code in 0..total {
            let mut c = code;
            let spins: Vec<i8> = (0..n)
                .map(|_| {
                    let v = (c % 3) as i8 - 1;
                    c /= 3;
                    v
                })
                .collect();
            let sigma = cfg(&spins);
            let m = crate::model::macrostate_of(&sigma);
            by_class.entry((m.s, m.r)).or_default().push(sign_of(&sigma));
        }
        for ((s, _r), labels) in by_class {
            if s != 0 {
                assert!(labels.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }

    #[test]
    fn signature_and_omega_k() {
        let mut x = ReplicaState::cold_start(3, 3);
        // all-zero replicas: signature all plus, k = M
        assert_eq!(omega_k_index(&x), 3);
        assert_eq!(signature(&x).len(), 3);
        // replica 0 is exempt; flipping it does not change k
        x.replicas[0] = SpinState::new(cfg(&[-1, -1, -1]));
        assert_eq!(omega_k_index(&x), 3);
        // mixed example: sums (+, 0 with first -, -) -> (+, -, -)
        x.replicas[1] = SpinState::new(cfg(&[1, 0, 0]));
        x.replicas[2] = SpinState::new(cfg(&[-1, 1, 0]));
        x.replicas[3] = SpinState::new(cfg(&[-1, -1, 1]));
        assert_eq!(
            signature(&x),
            vec![SignLabel::Plus, SignLabel::Minus, SignLabel::Minus]
        );
        assert_eq!(omega_k_index(&x), 1);
    }

    #[test]
    fn positive_sector_mass_identity() {
        // pi(Omega_+) = (1 + 1/Z) / 2 exactly, on lumped masses
        for (beta, k, n) in [(0.7f64, 1.1, 12), (2.0, 1.05, 30)] {
            let p = PhasePoint { beta, k };
            let space = MacroSpace::new(n);
            let lw = crate::model::macro_gibbs(&p, n);
            let (plus, _minus) = signed_class_masses(&lw, &space);
            let mass_plus: f64 = plus.iter().sum();
            let z = log_partition(&p, n).exp();
            assert!(
                (mass_plus - 0.5 * (1.0 + 1.0 / z)).abs() < 1e-12,
                "n={n}: {mass_plus}"
            );
        }
    }

    #[test]
    fn omega_k_masses_in_binomial_envelope() {
        // pi(Omega_k) lies in C(M,k) 2^-M [1/a, a] with a -> 1 as N grows;
        // block masses come from the sign-aggregated walk's stationary law
        let k = 1.2f64;
        let beta = 1.4425363546f64;
        let mut prev_log_a = f64::INFINITY;
        for n in [20usize, 40, 80] {
            let m = n;
            let ladder = LadderSpec::new(beta, m).unwrap();
            let qbar = crate::chains::sign_walk_kernel(&ladder, k, n);
            let masses = qbar.pi();
            let lf = crate::scalar::log_factorials::<f64>(m);
            let mut log_a = 0.0f64;
            for (kk, &mass) in masses.iter().enumerate() {
                let log_binom =
                    lf[m] - lf[kk] - lf[m - kk] - m as f64 * 2f64.ln();
                log_a = log_a.max((mass.ln() - log_binom).abs());
            }
            assert!(log_a < 0.02, "N={n}: envelope log a = {log_a}");
            assert!(log_a <= prev_log_a, "envelope should tighten with N");
            prev_log_a = log_a;
        }
    }

    #[test]
    fn partition_rejects_small_k() {
        let ladder = LadderSpec::new(2.0f64, 4).unwrap();
        assert!(matches!(
            build_gl_partition(&ladder, 1.05, 20),
            Err(PartitionError::KBelowTricritical(_))
        ));
    }

    #[test]
    fn partition_structure_at_rapid_point() {
        // K = 1.2, M = N = 40; the ladder runs deep enough (3 beta_c2) that
        // the half-space becomes genuinely two-moded inside the ladder
        let k = 1.2f64;
        let b2 = landscape::beta_c2_of_k(k).unwrap();
        let n = 40usize;
        let ladder = LadderSpec::new(3.0 * b2, n).unwrap();
        let glp = build_gl_partition(&ladder, k, n).unwrap();
        // i_c = max{i : beta_i <= beta_c2} with beta = 3 beta_c2: i_c = M/3
        assert_eq!(glp.i_c, n / 3);
        // rung i_c: everything Global, pi_hat(1) = 1
        assert!((glp.masses[glp.i_c].1 - 1.0).abs() < 1e-15);
        assert!(glp.assignment[glp.i_c].iter().all(|&b| b == Block::Global));
        // the two-sided range exists and the top rung has both blocks
        let onset = glp.first_bimodal.expect("deep ladder is two-moded");
        assert!(onset > glp.i_c);
        let top = &glp.assignment[n];
        assert!(top.iter().any(|&b| b == Block::Local));
        assert!(top.iter().any(|&b| b == Block::Global));
        // the Local mass is tiny (the shelf is metastable) but positive
        assert!(glp.masses[n].0 > 0.0 && glp.masses[n].0 < 1e-2);
        // pi_hat(1) nondecreasing, pi_hat(0) nonincreasing over the
        // two-sided range
        for i in onset..n {
            assert!(
                glp.masses[i + 1].1 >= glp.masses[i].1 - 1e-12,
                "rung {i}: {} -> {}",
                glp.masses[i].1,
                glp.masses[i + 1].1
            );
            assert!(glp.masses[i + 1].0 <= glp.masses[i].0 + 1e-12);
        }
        // no class moves Global -> Local after the first split
        for i in onset..n {
            for u in 0..glp.states.len() {
                if glp.assignment[i][u] == Block::Global {
                    assert!(
                        glp.assignment[i + 1][u] == Block::Global,
                        "class {:?} moved Global -> Local at rung {}",
                        glp.states[u],
                        i + 1
                    );
                }
            }
        }
    }

    #[test]
    fn shallow_ladder_stays_global() {
        // at beta = 1.5 beta_c2 the center never restabilizes inside the
        // ladder, every rung keeps a single persistent mode, and the
        // monotonicity of the masses holds trivially
        let k = 1.2f64;
        let b2 = landscape::beta_c2_of_k(k).unwrap();
        let n = 60usize;
        let ladder = LadderSpec::new(1.5 * b2, n).unwrap();
        let glp = build_gl_partition(&ladder, k, n).unwrap();
        assert_eq!(glp.first_bimodal, None);
        for i in 0..=n {
            assert!((glp.masses[i].1 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn global_mode_is_in_global_block() {
        let k = 1.3f64;
        let b2 = landscape::beta_c2_of_k(k).unwrap();
        let n = 24usize;
        let ladder = LadderSpec::new(3.5 * b2, n).unwrap();
        let glp = build_gl_partition(&ladder, k, n).unwrap();
        assert!(glp.first_bimodal.is_some());
        for rung in 0..=n {
            let (a_g, a_l) = glp.modes[rung];
            assert_eq!(glp.assignment[rung][a_g], Block::Global);
            if rung > glp.i_c {
                if let Some(a_l) = a_l {
                    assert_eq!(glp.assignment[rung][a_l], Block::Local);
                }
            }
        }
    }

    #[test]
    fn trace_bits() {
        let k = 1.2f64;
        let b2 = landscape::beta_c2_of_k(k).unwrap();
        let n = 16usize;
        let ladder = LadderSpec::new(3.0 * b2, n).unwrap();
        let glp = build_gl_partition(&ladder, k, n).unwrap();
        // all components at the rung's global mode: all-ones trace
        let classes: Vec<(i64, i64)> =
            (0..=n).map(|i| glp.states[glp.modes[i].0]).collect();
        let tr = trace_of_classes(&classes, &glp);
        assert!(tr.bits.iter().all(|&b| b));
        assert_eq!(tr.ones(), n + 1);
        // put a component at the local mode of a bimodal rung: bit drops
        let bimodal_rung = glp.first_bimodal.unwrap();
        let mut classes2 = classes;
        classes2[bimodal_rung] = glp.states[glp.modes[bimodal_rung].1.unwrap()];
        let tr2 = trace_of_classes(&classes2, &glp);
        assert!(!tr2.bit(bimodal_rung));
        assert!(tr2.bit(glp.i_c.saturating_sub(1)));
    }

    #[test]
    fn trace_walk_weights_are_probability_pairs() {
        let k = 1.25f64;
        let b2 = landscape::beta_c2_of_k(k).unwrap();
        let n = 20usize;
        let ladder = LadderSpec::new(3.5 * b2, n).unwrap();
        let glp = build_gl_partition(&ladder, k, n).unwrap();
        let (start, weights) = glp.walk_weights().unwrap();
        assert_eq!(weights.len(), n - start + 1);
        for (w0, w1) in weights {
            assert!((w0 + w1 - 1.0).abs() < 1e-12);
            assert!(w0 > 0.0 && w1 > 0.0);
        }
    }
}
