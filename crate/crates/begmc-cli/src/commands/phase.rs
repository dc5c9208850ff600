use begmc::landscape::{
    beta_tricritical, classify_phase, k1_critical, k2_critical, k_tricritical, TransitionOrder,
};
use begmc::model::PhasePoint;
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Ctx;

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 0.2)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 29)]
    pub beta_steps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub k_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub k_max: f64,
    #[arg(long, default_value_t = 16)]
    pub k_steps: usize,
}

#[derive(Serialize)]
struct PhaseConfig<'a> {
    seed: u64,
    args: &'a PhaseArgs,
}

pub fn run(ctx: &Ctx, mut args: PhaseArgs) -> anyhow::Result<i32> {
    if let Some(cfg) = ctx.config_section::<PhaseArgs>("phase")? {
        args = cfg;
    }
    let betas: Vec<f64> = (0..args.beta_steps)
        .map(|i| {
            args.beta_min
                + (args.beta_max - args.beta_min) * i as f64 / (args.beta_steps - 1).max(1) as f64
        })
        .collect();
    let ks: Vec<f64> = (0..args.k_steps)
        .map(|i| {
            args.k_min + (args.k_max - args.k_min) * i as f64 / (args.k_steps - 1).max(1) as f64
        })
        .collect();

    let cells: Vec<(f64, f64)> =
        betas.iter().flat_map(|&b| ks.iter().map(move |&k| (b, k))).collect();
    let rows: Vec<Vec<String>> = cells
        .par_iter()
        .map(|&(beta, k)| {
            let p = PhasePoint { beta, k };
            match classify_phase(&p) {
                Ok(cls) => {
                    let z = cls
                        .maxima
                        .iter()
                        .map(|c| c.z().abs())
                        .fold(0.0f64, f64::max);
                    let f_best = cls
                        .maxima
                        .iter()
                        .map(|c| c.f_value)
                        .fold(f64::NEG_INFINITY, f64::max);
                    let order = match cls.order {
                        TransitionOrder::None => "none",
                        TransitionOrder::First => "first",
                        TransitionOrder::Second => "second",
                    };
                    vec![
                        format!("{beta:.6}"),
                        format!("{k:.6}"),
                        cls.n_maxima.to_string(),
                        order.into(),
                        format!("{z:.6}"),
                        format!("{f_best:.9}"),
                        (cls.tricritical
                            || ((beta - beta_tricritical::<f64>()).abs()
                                < 0.51 * (args.beta_max - args.beta_min)
                                    / (args.beta_steps - 1).max(1) as f64
                                && (k - k_tricritical::<f64>()).abs()
                                    < 0.51 * (args.k_max - args.k_min)
                                        / (args.k_steps - 1).max(1) as f64))
                            .to_string(),
                        String::new(),
                    ]
                }
                Err(e) => vec![
                    format!("{beta:.6}"),
                    format!("{k:.6}"),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("{e}"),
                ],
            }
        })
        .collect();

    // critical-curve overlay rows
    let mut curves: Vec<Vec<String>> = Vec::new();
    for &beta in &betas {
        if beta <= beta_tricritical::<f64>() {
            if let Ok(k2) = k2_critical(beta) {
                curves.push(vec![format!("{beta:.6}"), format!("{k2:.9}"), "k2".into()]);
            }
        } else if let Ok(k1) = k1_critical(beta) {
            curves.push(vec![format!("{beta:.6}"), format!("{k1:.9}"), "k1".into()]);
        }
    }
    curves.push(vec![
        format!("{:.9}", beta_tricritical::<f64>()),
        format!("{:.9}", k_tricritical::<f64>()),
        "tricritical".into(),
    ]);

    let n_rows = rows.len();
    println!("phase grid: {} cells, {} curve points", n_rows, curves.len());
    for row in rows.iter().take(5) {
        println!("  beta={} k={} maxima={} order={}", row[0], row[1], row[2], row[3]);
    }
    if let Some(dir) = &ctx.out_dir {
        let cfg = PhaseConfig { seed: ctx.seed, args: &args };
        let p1 = crate::out::write_csv(
            dir,
            "phase.csv",
            &cfg,
            &["beta", "k", "n_maxima", "order", "z_alpha", "f_max", "tricritical", "error"],
            &rows,
        )?;
        let p2 =
            crate::out::write_csv(dir, "curves.csv", &cfg, &["beta", "k", "curve"], &curves)?;
        println!("wrote {} and {}", p1.display(), p2.display());
    }
    Ok(0)
}
