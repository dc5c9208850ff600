use begmc::landscape::{a_max_points, classify_phase, critical_points, PointKind};
use begmc::model::PhasePoint;
use clap::Args;
use serde::{Deserialize, Serialize};

use super::Ctx;

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct LandscapeArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub k: f64,
}

pub fn run(ctx: &Ctx, mut args: LandscapeArgs) -> anyhow::Result<i32> {
    if let Some(cfg) = ctx.config_section::<LandscapeArgs>("landscape")? {
        args = cfg;
    }
    let p = PhasePoint { beta: args.beta, k: args.k };
    let pts = critical_points(&p)?;
    let cls = classify_phase(&p)?;
    println!(
        "(beta, K) = ({}, {}): {} maxima, order {:?}{}",
        args.beta,
        args.k,
        cls.n_maxima,
        cls.order,
        if cls.tricritical { " [tricritical]" } else { "" }
    );
    let mut rows = Vec::new();
    for c in &pts {
        let kind = match c.kind {
            PointKind::Maximum => "maximum",
            PointKind::Saddle => "saddle",
            PointKind::Minimum => "minimum",
        };
        println!(
            "  {kind:<8} r={:<10.6} t={:<10.6} a=({:.6e}, {:.6e}, {:.6e}) f={:.9} resid={:.1e}",
            c.r, c.t, c.a.a_minus, c.a.a_zero, c.a.a_plus, c.f_value, c.residual
        );
        rows.push(vec![
            kind.to_string(),
            format!("{:.12}", c.r),
            format!("{:.12}", c.t),
            format!("{:.12e}", c.a.a_minus),
            format!("{:.12e}", c.a.a_zero),
            format!("{:.12e}", c.a.a_plus),
            format!("{:.12}", c.f_value),
            format!("{:.3e}", c.residual),
        ]);
    }
    let am = a_max_points(&p)?;
    if let Some(z) = am.z_alpha() {
        println!("  z_alpha = {z:.9}");
    }
    if let Some(dir) = &ctx.out_dir {
        crate::out::write_csv(
            dir,
            "landscape.csv",
            &args,
            &["kind", "r", "t", "a_minus", "a_zero", "a_plus", "f", "residual"],
            &rows,
        )?;
    }
    Ok(0)
}
