//! The registered numerical checks behind `begmc verify`: every comparison
//! lemma and bound used by the mixing analysis, executed on seeded instances
//! at stated tolerances. The registry is the single gate - each check has a
//! name, and the suite fails if any check fails.

use std::time::Instant;

use rand::RngCore;
use serde::Serialize;

use crate::chains::kernel::{Kernel, StateLabels};
use crate::chains::{
    binomial_walk, coupling_time, half_space_metropolis, lumped_metropolis, rw1_path_certificate,
    sign_walk_kernel, trace_walks, microstate_metropolis,
};
use crate::landscape;
use crate::model::{LadderSpec, MacroSpace, PhasePoint};
use crate::partition::{build_gl_partition, Block};
use crate::rng::{stream_rng, uniform_index, uniform_unit};
use crate::spectral::{
    aba_check, aggregate, conductance, dirichlet_comparison, poincare_bound, positive_sqrt,
    power_gap_check, product_chain, restrict, spectral_gap, spectral_gap_with, widest_path_family,
    PartitionSpec, PathFamily, SpectralOpts,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub tolerance: String,
    pub runtime_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random-chain trials for the property checks.
    pub random_trials: usize,
    /// Largest N for the class-chain (T^2 on A_{s,r}) bound.
    pub class_chain_max_n: usize,
    /// Largest N for the aggregated half-space chain bound.
    pub tbar_max_n: usize,
    /// Largest M for the binomial-walk sandwich.
    pub binomial_max_m: usize,
    /// Ladder sizes for the trace-walk checks.
    pub rw_ms: Vec<usize>,
    /// Exact trace-walk eigensolves up to this many free bits.
    pub rw_exact_bits: usize,
    pub coupling_trials: usize,
    pub coupling_ns: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0xbe9,
            random_trials: 100,
            class_chain_max_n: 12,
            tbar_max_n: 40,
            binomial_max_m: 512,
            rw_ms: vec![4, 8, 16, 32, 64, 128, 256],
            rw_exact_bits: 14,
            coupling_trials: 200,
            coupling_ns: vec![10, 20, 40],
        }
    }
}

impl VerifyConfig {
    /// Smaller instances for smoke runs.
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            random_trials: 25,
            class_chain_max_n: 8,
            tbar_max_n: 20,
            binomial_max_m: 64,
            rw_ms: vec![4, 8, 16, 32],
            rw_exact_bits: 10,
            coupling_trials: 50,
            coupling_ns: vec![10, 20],
        }
    }
}

/// Names of every registered check, in execution order.
pub const CHECK_NAMES: [&str; 15] = [
    "conductance_sandwich",
    "cps_inequality",
    "aba_lemma",
    "power_gap",
    "poincare_validity",
    "product_chain_identity",
    "binomial_walk_sandwich",
    "rw2_coupon_bound",
    "rw1_comparison",
    "qbar_lower_bound",
    "tbar_poincare_bound",
    "class_chain_bound",
    "coloring_coupling",
    "lumpability_certificate",
    "ladder_overlap",
];

pub fn run_all(cfg: &VerifyConfig) -> Vec<CheckResult> {
    CHECK_NAMES.iter().map(|name| run_check(name, cfg)).collect()
}

pub fn run_check(name: &str, cfg: &VerifyConfig) -> CheckResult {
    let start = Instant::now();
    let (passed, details, tolerance) = match name {
        "conductance_sandwich" => conductance_sandwich(cfg),
        "cps_inequality" => cps_inequality(cfg),
        "aba_lemma" => aba_lemma(cfg),
        "power_gap" => power_gap(cfg),
        "poincare_validity" => poincare_validity(cfg),
        "product_chain_identity" => product_chain_identity(cfg),
        "binomial_walk_sandwich" => binomial_walk_sandwich(cfg),
        "rw2_coupon_bound" => rw2_coupon_bound(cfg),
        "rw1_comparison" => rw1_comparison(cfg),
        "qbar_lower_bound" => qbar_lower_bound(cfg),
        "tbar_poincare_bound" => tbar_poincare_bound(cfg),
        "class_chain_bound" => class_chain_bound(cfg),
        "coloring_coupling" => coloring_coupling(cfg),
        "lumpability_certificate" => lumpability_certificate(cfg),
        "ladder_overlap" => ladder_overlap(cfg),
        other => (false, format!("unknown check '{other}'"), String::new()),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        details,
        tolerance,
        runtime_ms: start.elapsed().as_millis(),
    }
}

// ---- instance generators -------------------------------------------------

/// Random lazy reversible chain on n states: random log-weights, random
/// connected symmetric support, Metropolis rates.
pub fn random_reversible_chain<R: RngCore>(n: usize, rng: &mut R) -> Kernel<f64> {
    let log_pi: Vec<f64> = (0..n).map(|_| 4.0 * (uniform_unit(rng) - 0.5)).collect();
    let mut adj = vec![vec![false; n]; n];
    for i in 1..n {
        let j = uniform_index(rng, i);
        adj[i][j] = true;
        adj[j][i] = true;
    }
    for _ in 0..2 * n {
        let i = uniform_index(rng, n);
        let j = uniform_index(rng, n);
        if i != j {
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut hold = 1.0;
        let mut row: Vec<(u32, f64)> = Vec::new();
        for j in 0..n {
            if i != j && adj[i][j] {
                let acc = 1.0f64.min((log_pi[j] - log_pi[i]).exp());
                let p = acc / (2.0 * n as f64);
                row.push((j as u32, p));
                hold -= p;
            }
        }
        row.push((i as u32, hold));
        rows.push(row);
    }
    Kernel::new(rows, log_pi, StateLabels::Plain, true)
}

/// Second lazy reversible chain sharing the stationary law of `k` (ring plus
/// random chords, Metropolis rates, support symmetrized).
pub fn random_reversible_same_pi<R: RngCore>(k: &Kernel<f64>, rng: &mut R) -> Kernel<f64> {
    let n = k.n_states();
    let lp = k.log_pi().to_vec();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        adj[i][(i + 1) % n] = true;
        adj[(i + 1) % n][i] = true;
    }
    for _ in 0..n {
        let i = uniform_index(rng, n);
        let j = uniform_index(rng, n);
        if i != j {
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut hold = 1.0;
        let mut row: Vec<(u32, f64)> = Vec::new();
        for j in 0..n {
            if i != j && adj[i][j] {
                let acc = 1.0f64.min((lp[j] - lp[i]).exp());
                let p = acc / (2.0 * n as f64);
                row.push((j as u32, p));
                hold -= p;
            }
        }
        row.push((i as u32, hold));
        rows.push(row);
    }
    Kernel::new(rows, lp, StateLabels::Plain, true)
}

/// Shortest support paths between all pairs.
pub fn bfs_path_family(k: &Kernel<f64>) -> PathFamily {
    let n = k.n_states();
    let mut fam = PathFamily::default();
    for src in 0..n {
        let mut parent = vec![usize::MAX; n];
        parent[src] = src;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &(v, p) in k.row(u) {
                let v = v as usize;
                if p > 0.0 && v != u && parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        for dst in src + 1..n {
            let mut verts = vec![dst];
            let mut cur = dst;
            while cur != src {
                cur = parent[cur];
                verts.push(cur);
            }
            verts.reverse();
            fam.paths.push((src, dst, verts));
        }
    }
    fam
}

/// Gap of an explicit dense reversible matrix (used where matrix square
/// roots introduce entries the sparse path cannot symmetrize).
fn dense_reversible_gap(m: &nalgebra::DMatrix<f64>, log_pi: &[f64]) -> f64 {
    let n = m.nrows();
    let mut s = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = m[(i, j)] * ((log_pi[i] - log_pi[j]) / 2.0).exp();
        }
    }
    let s = (s.clone() + s.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    1.0 - vals[1].abs().max(vals[n - 1].abs())
}

// ---- the checks ----------------------------------------------------------

fn conductance_sandwich(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 1);
    let mut worst = f64::INFINITY;
    for _ in 0..cfg.random_trials {
        let n = 3 + uniform_index(&mut rng, 10);
        let k = random_reversible_chain(n, &mut rng);
        let pi = k.pi();
        let gap = spectral_gap(&k).unwrap().gap;
        let mut phi = f64::INFINITY;
        for mask in 1..(1usize << n) - 1 {
            let s: Vec<usize> = (0..n).filter(|&x| mask >> x & 1 == 1).collect();
            let mass: f64 = s.iter().map(|&x| pi[x]).sum();
            if mass <= 0.5 {
                phi = phi.min(conductance(&k, &s).unwrap());
            }
        }
        let ok = phi * phi / 2.0 <= gap + 1e-12 && gap <= 2.0 * phi + 1e-12;
        if !ok {
            return (false, format!("violated: phi={phi}, gap={gap}"), "1e-12".into());
        }
        worst = worst.min((2.0 * phi - gap).min(gap - phi * phi / 2.0));
    }
    (true, format!("{} chains, min slack {worst:.3e}", cfg.random_trials), "1e-12".into())
}

fn cps_inequality(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 2);
    let trials = cfg.random_trials / 2;
    let mut min_slack = f64::INFINITY;
    for t in 0..trials {
        let n = 4 + uniform_index(&mut rng, 8);
        let q = random_reversible_chain(n, &mut rng);
        let p = random_reversible_same_pi(&q, &mut rng);
        let blocks = 2 + uniform_index(&mut rng, 3);
        // states 0..blocks pin one member per block, the rest are random
        let assignment: Vec<usize> = (0..n)
            .map(|x| if x < blocks { x } else { uniform_index(&mut rng, blocks) })
            .collect();
        let parts = PartitionSpec::new(assignment.clone(), blocks).unwrap();
        let qbar = aggregate(&q, &parts);
        let gap_qbar = spectral_gap(&qbar).unwrap().gap;
        let mut min_restricted = f64::INFINITY;
        for b in 0..blocks {
            let block: Vec<usize> =
                (0..n).filter(|&x| assignment[x] == b).collect();
            let pb = restrict(&p, &block);
            min_restricted = min_restricted.min(spectral_gap(&pb).unwrap().gap);
        }
        // Gap(Q^{1/2} P Q^{1/2}) >= Gap(Qbar) min_i Gap(P_i)
        let root = positive_sqrt(&q).unwrap();
        let composite = &root * p.to_dense() * &root;
        let gap_comp = dense_reversible_gap(&composite, q.log_pi());
        let slack = gap_comp - gap_qbar * min_restricted;
        min_slack = min_slack.min(slack);
        if slack < -1e-9 {
            return (
                false,
                format!("trial {t}: Gap(QPQ^(1/2))={gap_comp} < {}", gap_qbar * min_restricted),
                "1e-9".into(),
            );
        }
    }
    (true, format!("{trials} trials, min slack {min_slack:.3e}"), "1e-9".into())
}

fn aba_lemma(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 3);
    let trials = cfg.random_trials / 2;
    for t in 0..trials {
        let n = 3 + uniform_index(&mut rng, 8);
        let a = random_reversible_chain(n, &mut rng);
        let b = random_reversible_same_pi(&a, &mut rng);
        if !aba_check(&a, &b, &SpectralOpts::default()).unwrap() {
            return (false, format!("trial {t}: Gap(ABA) < Gap(B)"), "1e-10".into());
        }
        // square-root variant on the lazy (hence positive) a
        let root = positive_sqrt(&a).unwrap();
        let sandwich = &root * b.to_dense() * &root;
        let g1 = dense_reversible_gap(&sandwich, a.log_pi());
        let g2 = spectral_gap(&b).unwrap().gap;
        if g1 < g2 - 1e-9 {
            return (false, format!("trial {t}: sqrt variant {g1} < {g2}"), "1e-9".into());
        }
    }
    // swapping instance: A = Q, B = P
    let ladder = LadderSpec::new(1.8f64, 2).unwrap();
    let sw = crate::chains::lumped_swapping(&ladder, 1.1, 3, 500_000).unwrap();
    let ok = aba_check(&sw.q, &sw.p, &SpectralOpts::default()).unwrap();
    (ok, format!("{trials} random trials + swapping instance"), "1e-10".into())
}

fn power_gap(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 4);
    for t in 0..cfg.random_trials {
        let n = 3 + uniform_index(&mut rng, 8);
        let k = random_reversible_chain(n, &mut rng);
        for m in [2usize, 3, 5] {
            if !power_gap_check(&k, m, &SpectralOpts::default()).unwrap() {
                return (false, format!("trial {t}, m={m}"), "1e-10".into());
            }
        }
    }
    // lumped Metropolis instance with m = 3
    let p = PhasePoint { beta: 1.2f64, k: 1.1 };
    let k = lumped_metropolis(&p, 12);
    let ok = power_gap_check(&k, 3, &SpectralOpts::default()).unwrap();
    (ok, format!("{} random chains + lumped instance", cfg.random_trials), "1e-10".into())
}

fn poincare_validity(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 5);
    let mut worst = f64::INFINITY;
    for t in 0..cfg.random_trials {
        let n = 3 + uniform_index(&mut rng, 10);
        let k = random_reversible_chain(n, &mut rng);
        let fam = bfs_path_family(&k);
        let a = poincare_bound(&k, &fam).unwrap();
        let gap = spectral_gap(&k).unwrap().gap;
        worst = worst.min(gap - 1.0 / a);
        if 1.0 / a > gap + 1e-9 {
            return (false, format!("trial {t}: 1/A={} > gap={gap}", 1.0 / a), "1e-9".into());
        }
    }
    (true, format!("{} chains, min slack {worst:.3e}", cfg.random_trials), "1e-9".into())
}

fn product_chain_identity(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 6);
    for t in 0..10 {
        let sizes = [3 + uniform_index(&mut rng, 3), 3 + uniform_index(&mut rng, 3)];
        let k1 = random_reversible_chain(sizes[0], &mut rng);
        let k2 = random_reversible_chain(sizes[1], &mut rng);
        let prod = product_chain(&[&k1, &k2]);
        let expect =
            spectral_gap(&k1).unwrap().gap.min(spectral_gap(&k2).unwrap().gap) / 2.0;
        let got = spectral_gap(&prod).unwrap().gap;
        if (got - expect).abs() > 1e-9 {
            return (false, format!("trial {t}: {got} vs {expect}"), "1e-9".into());
        }
    }
    (true, "10 product instances".into(), "1e-9".into())
}

fn binomial_walk_sandwich(cfg: &VerifyConfig) -> (bool, String, String) {
    for m in 2..=cfg.binomial_max_m {
        let k = binomial_walk::<f64>(m);
        let opts =
            if m <= 300 { SpectralOpts::default() } else { SpectralOpts::iterative() };
        let gap = spectral_gap_with(&k, &opts).unwrap().gap;
        if gap < 1.0 / m as f64 - 1e-10 || gap > 2.0 / m as f64 + 1e-10 {
            return (false, format!("M={m}: gap={gap}"), "1e-10".into());
        }
    }
    (true, format!("M in 2..={}", cfg.binomial_max_m), "1e-10".into())
}

/// Trace-walk weights from a real instance: K = 1.2, a deep ladder with
/// beta = 3 beta_c2(K), M = N, restricted to the two-sided rungs.
fn instance_walk_weights(m: usize) -> Option<(usize, Vec<(f64, f64)>)> {
    let k = 1.2f64;
    let b2 = landscape::beta_c2_of_k(k).ok()?;
    let ladder = LadderSpec::new(3.0 * b2, m).unwrap();
    let glp = build_gl_partition(&ladder, k, m).ok()?;
    glp.walk_weights()
}

fn rw2_coupon_bound(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut lines = Vec::new();
    for &m in &cfg.rw_ms {
        let Some((start, weights)) = instance_walk_weights(m) else {
            return (false, format!("M={m}: no two-sided rungs"), String::new());
        };
        let free = weights.len();
        let gap = crate::chains::walks::rw2_exact_gap::<f64>(free);
        let bound = 1.0 / (4.0 * m as f64 * (m as f64).ln());
        if gap < bound {
            return (false, format!("M={m}: gap {gap} < {bound}"), "exact".into());
        }
        // identity cross-check against a dense eigensolve where materializable
        if free <= cfg.rw_exact_bits {
            let tw = trace_walks(&weights, start, m, 1 << cfg.rw_exact_bits).unwrap();
            let dense = spectral_gap_with(&tw.rw2, &SpectralOpts::default()).unwrap().gap;
            if (dense - gap).abs() > 1e-9 {
                return (false, format!("M={m}: product identity {gap} vs eigensolve {dense}"), "1e-9".into());
            }
        }
        lines.push(format!("M={m}: free={free} gap={gap:.4}"));
    }
    (true, lines.join("; "), "exact identity, 1e-9 cross-check".into())
}

fn rw1_comparison(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 7);
    let mut lines = Vec::new();
    for &m in &cfg.rw_ms {
        let Some((start, weights)) = instance_walk_weights(m) else {
            return (false, format!("M={m}: no two-sided rungs"), String::new());
        };
        let free = weights.len();
        let bound_factor = 4.0 * (m as f64).powi(2) + 2.0 * m as f64;
        if free <= cfg.rw_exact_bits {
            let tw = trace_walks(&weights, start, m, 1 << cfg.rw_exact_bits).unwrap();
            let g1 = spectral_gap_with(&tw.rw1, &SpectralOpts::iterative()).unwrap().gap;
            let g2 = tw.rw2_gap;
            if g1 < g2 / bound_factor - 1e-12 {
                return (
                    false,
                    format!("M={m}: Gap(RW1)={g1} < Gap(RW2)/A = {}", g2 / bound_factor),
                    "1e-12".into(),
                );
            }
            lines.push(format!("M={m}: exact {g1:.3e} >= {:.3e}", g2 / bound_factor));
        } else {
            // canonical-path certificate at sizes beyond materialization
            let cert = rw1_path_certificate(&weights, 4000, &mut rng);
            if cert.violations > 0 {
                return (
                    false,
                    format!("M={m}: {} path-inequality violations", cert.violations),
                    "1e-9".into(),
                );
            }
            lines.push(format!(
                "M={m}: certificate {} edges, min slack {:.3}",
                cert.edges_checked, cert.min_log_slack
            ));
        }
    }
    (true, lines.join("; "), "exact / path certificate".into())
}

fn qbar_lower_bound(_cfg: &VerifyConfig) -> (bool, String, String) {
    let mut lines = Vec::new();
    for n in [4usize, 6, 8, 10, 12] {
        let m = n;
        let k = 1.2f64;
        let b2 = landscape::beta_c2_of_k(k).unwrap();
        let ladder = LadderSpec::new(1.5 * b2, m).unwrap();
        let qbar = sign_walk_kernel(&ladder, k, n);
        qbar.validate().unwrap();
        let gap = spectral_gap(&qbar).unwrap().gap;
        let bound =
            (-(1.5 * b2) * (k + 1.0) * n as f64 / m as f64).exp() / (4.0 * (m as f64).powi(2));
        if gap < bound {
            return (false, format!("N=M={n}: gap {gap} < bound {bound}"), "exact".into());
        }
        lines.push(format!("N={n}: {gap:.4e} >= {bound:.4e}"));
    }
    (true, lines.join("; "), "exact".into())
}

fn tbar_poincare_bound(cfg: &VerifyConfig) -> (bool, String, String) {
    let k = 1.2f64;
    let b2 = landscape::beta_c2_of_k(k).unwrap();
    let mut lines = Vec::new();
    let mut ns: Vec<usize> = vec![8, 16, 24, 32, 40];
    ns.retain(|&n| n <= cfg.tbar_max_n);
    for &n in &ns {
        for beta in [0.8 * b2, 1.5 * b2] {
            // aggregated chain on the A_g classes: at these depths the
            // half-space is one-moded, so the restriction is the whole chain
            let half = half_space_metropolis(beta, k, n);
            let gap = spectral_gap(&half).unwrap().gap;
            let bound = 0.25 / (n as f64).powi(5);
            if gap < bound {
                return (false, format!("N={n} beta={beta:.3}: gap {gap} < N^-5/4"), "exact".into());
            }
            // Poincare route with unimodal ascent paths
            let fam = widest_path_family(&half).unwrap();
            let a = poincare_bound(&half, &fam).unwrap();
            let max_len = fam
                .paths
                .iter()
                .map(|(_, _, v)| v.len() - 1)
                .max()
                .unwrap_or(0);
            if a > 4.0 * (n as f64).powi(5) {
                return (false, format!("N={n}: A = {a} > 4N^5"), "exact".into());
            }
            if 1.0 / a > gap + 1e-9 {
                return (false, format!("N={n}: 1/A = {} > gap {gap}", 1.0 / a), "1e-9".into());
            }
            if max_len * max_len > n * n * 4 {
                return (false, format!("N={n}: path length {max_len}"), String::new());
            }
        }
        // a genuinely restricted instance on a deep-ladder bimodal rung
        let ladder = LadderSpec::new(3.0 * b2, n).unwrap();
        if let Ok(glp) = build_gl_partition(&ladder, k, n) {
            if let Some(onset) = glp.first_bimodal {
                let rung = glp.m; // top rung
                let _ = onset;
                let beta = ladder.beta_i(rung);
                let half = half_space_metropolis(beta, k, n);
                let block: Vec<usize> = (0..glp.states.len())
                    .filter(|&u| glp.assignment[rung][u] == Block::Global)
                    .collect();
                let tbar = restrict(&half, &block);
                let gap = spectral_gap(&tbar).unwrap().gap;
                let bound = 0.25 / (n as f64).powi(5);
                if gap < bound {
                    return (
                        false,
                        format!("restricted N={n}: gap {gap} < N^-5/4"),
                        "exact".into(),
                    );
                }
                lines.push(format!("N={n} restricted gap {gap:.3e}"));
            }
        }
    }
    (true, lines.join("; "), "exact, 1e-9 Poincare slack".into())
}

/// T^2 restricted to one macrostate class, on the class's microstates, with
/// the uniform stationary law. Returns (kernel, class size).
pub fn class_chain(p: &PhasePoint<f64>, n: usize, s: i64, r: i64) -> Kernel<f64> {
    let pow3: Vec<usize> = (0..n).map(|j| 3usize.pow(j as u32)).collect();
    let decode = |code: usize| -> Vec<i8> {
        let mut c = code;
        (0..n)
            .map(|_| {
                let v = (c % 3) as i8 - 1;
                c /= 3;
                v
            })
            .collect()
    };
    let total = 3usize.pow(n as u32);
    let mut members = Vec::new();
    let mut index: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for code in 0..total {
        let spins = decode(code);
        let ss: i64 = spins.iter().map(|&v| v as i64).sum();
        let rr: i64 = spins.iter().map(|&v| (v * v) as i64).sum();
        if (ss, rr) == (s, r) {
            index.insert(code, members.len());
            members.push(code);
        }
    }
    let h = |spins: &[i8]| -> f64 {
        let ss: i64 = spins.iter().map(|&v| v as i64).sum();
        let rr: i64 = spins.iter().map(|&v| (v * v) as i64).sum();
        -(rr as f64) + p.k * (ss * ss) as f64 / n as f64
    };
    // one full T row: (target code, probability), holding included
    let t_row = |code: usize| -> Vec<(usize, f64)> {
        let spins = decode(code);
        let h0 = h(&spins);
        let mut hold = 0.5;
        let mut row = Vec::with_capacity(2 * n + 1);
        for site in 0..n {
            let old = spins[site];
            for new in [-1i8, 0, 1] {
                if new == old {
                    continue;
                }
                let code2 =
                    (code as i64 + (new as i64 - old as i64) * pow3[site] as i64) as usize;
                let mut sp2 = spins.clone();
                sp2[site] = new;
                let dh = h(&sp2) - h0;
                let acc = if dh >= 0.0 { 1.0 } else { (p.beta * dh).exp() };
                row.push((code2, acc / (4.0 * n as f64)));
                hold += (1.0 - acc) / (4.0 * n as f64);
            }
        }
        row.push((code, hold));
        row
    };
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(members.len());
    for &code in &members {
        let mut acc: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
        let mut out_mass = 0.0;
        for (mid, p1) in t_row(code) {
            for (tgt, p2) in t_row(mid) {
                let w = p1 * p2;
                match index.get(&tgt) {
                    Some(&j) => *acc.entry(j).or_insert(0.0) += w,
                    None => out_mass += w,
                }
            }
        }
        let me = index[&code];
        *acc.entry(me).or_insert(0.0) += out_mass;
        rows.push(acc.into_iter().map(|(j, v)| (j as u32, v)).collect());
    }
    let m = members.len();
    Kernel::new(rows, vec![0.0; m], StateLabels::Plain, true)
}

/// The random-transposition coloring chain on the same class.
pub fn coloring_chain_on_class(n: usize, s: i64, r: i64) -> Kernel<f64> {
    let decode = |code: usize| -> Vec<i8> {
        let mut c = code;
        (0..n)
            .map(|_| {
                let v = (c % 3) as i8 - 1;
                c /= 3;
                v
            })
            .collect()
    };
    let pow3: Vec<usize> = (0..n).map(|j| 3usize.pow(j as u32)).collect();
    let total = 3usize.pow(n as u32);
    let mut members = Vec::new();
    let mut index: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for code in 0..total {
        let spins = decode(code);
        let ss: i64 = spins.iter().map(|&v| v as i64).sum();
        let rr: i64 = spins.iter().map(|&v| (v * v) as i64).sum();
        if (ss, rr) == (s, r) {
            index.insert(code, members.len());
            members.push(code);
        }
    }
    let nn = n * n;
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(members.len());
    for &code in &members {
        let spins = decode(code);
        let mut acc: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
        let mut diag = 1.0 / n as f64; // R1 == R2 draws
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if spins[i] == spins[j] {
                    diag += 1.0 / nn as f64;
                } else {
                    let code2 = (code as i64
                        + (spins[j] as i64 - spins[i] as i64) * pow3[i] as i64
                        + (spins[i] as i64 - spins[j] as i64) * pow3[j] as i64)
                        as usize;
                    *acc.entry(index[&code2]).or_insert(0.0) += 1.0 / nn as f64;
                }
            }
        }
        let me = index[&code];
        *acc.entry(me).or_insert(0.0) += diag;
        rows.push(acc.into_iter().map(|(j, v)| (j as u32, v)).collect());
    }
    let m = members.len();
    Kernel::new(rows, vec![0.0; m], StateLabels::Plain, false)
}

fn class_chain_bound(cfg: &VerifyConfig) -> (bool, String, String) {
    let k = 1.2f64;
    let b2 = landscape::beta_c2_of_k(k).unwrap();
    let beta = 1.5 * b2;
    let p = PhasePoint { beta, k };
    let bound = (-beta - 4.0 * k * beta).exp() / 96.0;
    let mut checked = 0usize;
    let mut dirichlet_done = false;
    for n in (4..=cfg.class_chain_max_n).step_by(2) {
        let nb = bound / (n as f64).powi(6);
        let space = MacroSpace::new(n);
        for st in space.states() {
            if st.s < 0 {
                continue; // mirror classes are isomorphic
            }
            // skip singleton classes (constant chains)
            if st.n_plus() == n as i64 || st.n_minus() == n as i64 || st.n_zero() == n as i64 {
                continue;
            }
            let t2 = class_chain(&p, n, st.s, st.r);
            let opts = if t2.n_states() <= 2000 {
                SpectralOpts { assume_psd: true, ..SpectralOpts::default() }
            } else {
                SpectralOpts { assume_psd: true, ..SpectralOpts::iterative() }
            };
            let gap = spectral_gap_with(&t2, &opts).unwrap().gap;
            if gap < nb {
                return (
                    false,
                    format!("N={n} class (s={}, r={}): gap {gap} < {nb}", st.s, st.r),
                    "exact".into(),
                );
            }
            checked += 1;
            // Dirichlet route against the coloring chain on one midsize class
            if !dirichlet_done && n == 6 && st.s == 0 && st.r == 4 {
                let coloring = coloring_chain_on_class(n, st.s, st.r);
                let mut fam = PathFamily::default();
                for (x, row) in coloring.rows().iter().enumerate() {
                    for &(y, v) in row {
                        let y = y as usize;
                        if v > 0.0 && x < y {
                            fam.paths.push((x, y, vec![x, y]));
                        }
                    }
                }
                let cmp =
                    dirichlet_comparison(&coloring, &t2, &fam, &SpectralOpts::default())
                        .unwrap();
                if !cmp.holds {
                    return (false, "coloring-chain comparison failed".into(), "1e-9".into());
                }
                dirichlet_done = true;
            }
        }
    }
    (
        true,
        format!("{checked} classes up to N = {}", cfg.class_chain_max_n),
        "exact vs closed-form bound".into(),
    )
}

fn coloring_coupling(cfg: &VerifyConfig) -> (bool, String, String) {
    let mut rng = stream_rng(cfg.seed, 8);
    let mut lines = Vec::new();
    for &n in &cfg.coupling_ns {
        let counts = [n / 3, n / 3, n - 2 * (n / 3)];
        let mut total = 0usize;
        let mut max_t = 0usize;
        for _ in 0..cfg.coupling_trials {
            let (t, monotone) = coupling_time(counts, &mut rng, 100 * n * n * n * n);
            if !monotone {
                return (false, format!("N={n}: disagreement count increased"), String::new());
            }
            total += t;
            max_t = max_t.max(t);
        }
        let mean = total as f64 / cfg.coupling_trials as f64;
        let bound = (n as f64).powi(4);
        if mean > bound {
            return (false, format!("N={n}: mean {mean} > N^4"), "mean <= N^4".into());
        }
        lines.push(format!("N={n}: mean {mean:.1}, max {max_t}"));
    }
    (true, lines.join("; "), "mean <= N^4, monotone".into())
}

fn lumpability_certificate(_cfg: &VerifyConfig) -> (bool, String, String) {
    let p = PhasePoint { beta: 1.0f64, k: 1.2 };
    let n = 8usize;
    let micro = microstate_metropolis(&p, n);
    let lumped = lumped_metropolis(&p, n);
    let space = MacroSpace::new(n);
    let class_of = |code: usize| {
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
    let mut max_diff = 0.0f64;
    for code in 0..micro.n_states() {
        let ci = class_of(code);
        let mut agg = vec![0.0f64; space.len()];
        for &(j, v) in micro.row(code) {
            agg[class_of(j as usize)] += v;
        }
        for cj in 0..space.len() {
            max_diff = max_diff.max((agg[cj] - lumped.entry(ci, cj)).abs());
        }
    }
    if max_diff > 1e-12 {
        return (false, format!("entrywise diff {max_diff}"), "1e-12".into());
    }
    // one-sided certificate: lifting the lumped second eigenvector gives a
    // Rayleigh quotient equal to the lumped lambda_2, so the microstate
    // lambda_2 can only be larger; the Lanczos value bounds it from the
    // other side
    let g_micro = spectral_gap_with(&micro, &SpectralOpts::iterative()).unwrap().gap;
    let g_lumped = spectral_gap(&lumped).unwrap().gap;
    let gap_diff = (g_micro - g_lumped).abs();
    if gap_diff > 1e-10 {
        return (false, format!("gap diff {gap_diff}"), "1e-10".into());
    }
    (
        true,
        format!("n=8: entrywise {max_diff:.2e}, gaps {g_micro:.8e} vs {g_lumped:.8e}"),
        "1e-12 entries, 1e-10 gaps".into(),
    )
}

fn ladder_overlap(_cfg: &VerifyConfig) -> (bool, String, String) {
    let mut lines = Vec::new();
    for (k, beta) in [(1.05f64, 2.2824119252), (1.2, 1.4425363546)] {
        let mut mins = Vec::new();
        for n in [20usize, 40, 80] {
            let ladder = LadderSpec::new(beta, n).unwrap();
            let ov = crate::model::ladder_overlaps(&ladder, k, n);
            let min = ov.iter().copied().fold(f64::INFINITY, f64::min);
            mins.push(min);
        }
        let lo = mins.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mins.iter().copied().fold(0.0f64, f64::max);
        if lo < 0.5 {
            return (false, format!("K={k}: min overlap {lo} < 0.5"), ">= 0.5".into());
        }
        if (hi - lo) / lo > 0.2 {
            return (false, format!("K={k}: overlap spread {lo}..{hi} exceeds 20%"), "20%".into());
        }
        lines.push(format!("K={k}: overlaps {mins:?}"));
    }
    (true, lines.join("; "), ">= 0.5, +-20% across N".into())
}

/// Recorded go/no-go: a corrupted kernel must fail the detailed-balance
/// check (negative control for the validation path).
pub fn negative_control() -> bool {
    let mut k: Kernel<f64> = lumped_metropolis(&PhasePoint { beta: 0.9f64, k: 1.2 }, 6);
    let rows = k.rows_mut();
    if let Some(first) = rows[1].first_mut() {
        first.1 += 1e-3;
    }
    k.check_detailed_balance(1e-9).is_err() || k.check_row_sums(1e-12).is_err()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete() {
        // the single gate: every lemma check the suite documents must be
        // registered under its canonical name
        let required = [
            "conductance_sandwich",
            "cps_inequality",
            "aba_lemma",
            "power_gap",
            "poincare_validity",
            "product_chain_identity",
            "binomial_walk_sandwich",
            "rw2_coupon_bound",
            "rw1_comparison",
            "qbar_lower_bound",
            "tbar_poincare_bound",
            "class_chain_bound",
            "coloring_coupling",
            "lumpability_certificate",
            "ladder_overlap",
        ];
        for name in required {
            assert!(CHECK_NAMES.contains(&name), "{name} not registered");
        }
        assert_eq!(CHECK_NAMES.len(), required.len());
    }

    #[test]
    fn corrupted_kernel_detected() {
        assert!(negative_control());
    }

    #[test]
    fn quick_property_checks_pass() {
        let cfg = VerifyConfig::quick(7);
        for name in ["conductance_sandwich", "power_gap", "product_chain_identity"] {
            let r = run_check(name, &cfg);
            assert!(r.passed, "{}: {}", r.name, r.details);
        }
    }

    #[test]
    fn class_chain_is_symmetric_and_stochastic() {
        let p = PhasePoint { beta: 1.3f64, k: 1.1 };
        let t2 = class_chain(&p, 5, 1, 3);
        t2.validate().unwrap();
        // uniform stationary law on the class
        let pi = t2.pi();
        assert!(pi.iter().all(|&x| (x - pi[0]).abs() < 1e-15));
    }

    #[test]
    fn coloring_chain_matches_transposition_rates() {
        let ch = coloring_chain_on_class(4, 0, 2);
        ch.check_row_sums(1e-12).unwrap();
        ch.check_detailed_balance(1e-9).unwrap();
        // off-diagonal entries are 2/N^2
        for (x, row) in ch.rows().iter().enumerate() {
            for &(y, v) in row {
                if y as usize != x {
                    assert!((v - 2.0 / 16.0).abs() < 1e-15);
                }
            }
        }
    }
}
