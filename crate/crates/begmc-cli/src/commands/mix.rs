//! Trajectory study: seeded spin-level Metropolis versus swapping. The
//! sweep schedule and statistics live in [`begmc::study`].

use begmc::landscape::{a_max_points, beta_c2_of_k, k_tricritical};
use begmc::model::{LadderSpec, PhasePoint};
use begmc::partition::{build_gl_partition, GlPartition};
use begmc::study::{mix_study_with_trajectory, MixParams};
use clap::Args;
use serde::{Deserialize, Serialize};

use super::Ctx;

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MixArgs {
    #[arg(long, default_value_t = 1.2)]
    pub k: f64,
    /// Target beta as a multiple of beta_c^(2)(K); ignored if --beta given.
    #[arg(long, default_value_t = 1.5)]
    pub beta_factor: f64,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Rungs; defaults to M = N.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 10_000_000)]
    pub sweeps: usize,
    /// Record the trace vector every this many sweeps (0 = never).
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
}

pub fn run(ctx: &Ctx, mut args: MixArgs) -> anyhow::Result<i32> {
    if let Some(cfg) = ctx.config_section::<MixArgs>("mix")? {
        args = cfg;
    }
    let beta = match args.beta {
        Some(b) => b,
        None => args.beta_factor * beta_c2_of_k(args.k)?,
    };
    let n = args.n;
    let m = args.m.unwrap_or(n);
    let p = PhasePoint { beta, k: args.k };
    let am = a_max_points(&p)?;
    let z_alpha = am.z_alpha().unwrap_or(0.5);
    let params = MixParams {
        k: args.k,
        beta,
        n,
        m,
        sweeps: args.sweeps,
        basin_threshold: z_alpha / 2.0,
        trace_every: args.trace_every,
    };
    println!(
        "mix study: K={} beta={beta:.6} N={n} M={m} sweeps={} threshold |m|>{:.4}",
        args.k, args.sweeps, params.basin_threshold
    );
    let glp: Option<GlPartition<f64>> = if args.k > k_tricritical::<f64>() {
        let ladder = LadderSpec::new(beta, m)?;
        build_gl_partition(&ladder, args.k, n).ok()
    } else {
        None
    };
    let sample = if ctx.out_dir.is_some() && args.trace_every > 0 {
        Some(args.trace_every)
    } else {
        None
    };
    let (report, trajectory) = mix_study_with_trajectory(ctx.seed, &params, glp.as_ref(), sample);
    println!(
        "swapping:   basin entries +{} / -{}, crossings {}, tau_int(batch) {:.1}",
        report.swapping.plus_entries,
        report.swapping.minus_entries,
        report.swapping.crossings,
        report.swapping.tau_int_batch
    );
    println!(
        "metropolis: basin entries +{} / -{}, crossings {}, tau_int(batch) {:.1}",
        report.metropolis.plus_entries,
        report.metropolis.minus_entries,
        report.metropolis.crossings,
        report.metropolis.tau_int_batch
    );
    if let Some(dir) = &ctx.out_dir {
        let path = crate::out::write_json(dir, "mix.json", &report)?;
        println!("report: {}", path.display());
        if !trajectory.is_empty() {
            let rows: Vec<Vec<String>> = trajectory
                .iter()
                .map(|t| {
                    vec![
                        t.sweep.to_string(),
                        t.rung.to_string(),
                        t.s.to_string(),
                        t.r.to_string(),
                        format!("{:.12}", t.h),
                    ]
                })
                .collect();
            crate::out::write_csv(dir, "trajectory.csv", &params, &["sweep", "rung", "s", "r", "h"], &rows)?;
        }
        if let Some(glp) = &glp {
            let mut rows = Vec::new();
            for rung in 0..=glp.m {
                for (u, &(s, r)) in glp.states.iter().enumerate() {
                    rows.push(vec![
                        rung.to_string(),
                        s.to_string(),
                        r.to_string(),
                        format!("{:?}", glp.assignment[rung][u]),
                        format!("{:.6e}", glp.masses[rung].1),
                    ]);
                }
            }
            crate::out::write_csv(
                dir,
                "partition.csv",
                &params,
                &["rung", "s", "r", "block", "global_mass"],
                &rows,
            )?;
        }
    }
    Ok(0)
}
