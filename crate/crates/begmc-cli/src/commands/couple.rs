use begmc::chains::coupling_time;
use begmc::rng::stream_rng;
use begmc::scalar::linear_fit;
use clap::Args;
use serde::{Deserialize, Serialize};

use super::Ctx;

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct CoupleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 40])]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Serialize)]
struct CoupleReport {
    seed: u64,
    trials: usize,
    rows: Vec<CoupleRow>,
    scaling_exponent: f64,
    all_monotone: bool,
    within_bound: bool,
}

#[derive(Serialize)]
struct CoupleRow {
    n: usize,
    mean: f64,
    max: usize,
    bound: f64,
}

pub fn run(ctx: &Ctx, mut args: CoupleArgs) -> anyhow::Result<i32> {
    if let Some(cfg) = ctx.config_section::<CoupleArgs>("couple")? {
        args = cfg;
    }
    let mut rng = stream_rng(ctx.seed, 0xc0);
    let mut rows = Vec::new();
    let mut all_monotone = true;
    let mut within = true;
    for &n in &args.n_list {
        let counts = [n / 3, n / 3, n - 2 * (n / 3)];
        let mut total = 0usize;
        let mut max_t = 0usize;
        for _ in 0..args.trials {
            let (t, monotone) = coupling_time(counts, &mut rng, 1000 * n * n * n);
            all_monotone &= monotone;
            total += t;
            max_t = max_t.max(t);
        }
        let mean = total as f64 / args.trials as f64;
        let bound = (n as f64).powi(4);
        within &= mean <= bound;
        println!("N={n}: mean {mean:.1}, max {max_t}, bound N^4 = {bound}");
        rows.push(CoupleRow { n, mean, max: max_t, bound });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
    let exponent = if xs.len() >= 2 { linear_fit(&xs, &ys).0 } else { f64::NAN };
    println!("mean coupling time ~ N^{exponent:.2}; monotone: {all_monotone}");
    let report = CoupleReport {
        seed: ctx.seed,
        trials: args.trials,
        rows,
        scaling_exponent: exponent,
        all_monotone,
        within_bound: within,
    };
    if let Some(dir) = &ctx.out_dir {
        crate::out::write_json(dir, "couple.json", &report)?;
    }
    Ok(if within && all_monotone { 0 } else { 2 })
}
