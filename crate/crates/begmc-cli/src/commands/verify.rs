use begmc::verify::{run_all, CheckResult, VerifyConfig};
use clap::Args;
use serde::Serialize;

use super::Ctx;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Smaller instances (smoke run).
    #[arg(long)]
    quick: bool,

    /// Run only the named checks (comma separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    seed: u64,
    quick: bool,
    results: &'a [CheckResult],
}

pub fn run(ctx: &Ctx, args: VerifyArgs) -> anyhow::Result<i32> {
    let cfg = if args.quick {
        VerifyConfig::quick(ctx.seed)
    } else {
        VerifyConfig { seed: ctx.seed, ..VerifyConfig::default() }
    };
    let results: Vec<CheckResult> = if args.only.is_empty() {
        run_all(&cfg)
    } else {
        args.only.iter().map(|n| begmc::verify::run_check(n, &cfg)).collect()
    };
    let mut failed = 0usize;
    for r in &results {
        println!(
            "[{}] {:<24} {:>8} ms  tol: {}  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.runtime_ms,
            r.tolerance,
            r.details
        );
        if !r.passed {
            failed += 1;
        }
    }
    println!(
        "{} checks, {} failed, total {} ms",
        results.len(),
        failed,
        results.iter().map(|r| r.runtime_ms).sum::<u128>()
    );
    if let Some(dir) = &ctx.out_dir {
        let report = Report { seed: ctx.seed, quick: args.quick, results: &results };
        let path = crate::out::write_json(dir, "verify.json", &report)?;
        println!("report: {}", path.display());
    }
    Ok(if failed > 0 { 2 } else { 0 })
}
