//! Mixing-time profiles of the lumped tempering chain in the torpid window:
//! tau(1/4) grows exponentially with N (log tau close to linear in N), and
//! the spectral upper bound holds.

use begmc::chains::tempering_kernels;
use begmc::model::{LadderSpec, MacroSpace};
use begmc::scalar::linear_fit;
use begmc::spectral::{mixing_profile, SpectralOpts};

#[test]
fn torpid_tempering_tau_grows_superpolynomially() {
    let k = 1.05f64;
    let beta = 2.2824119252f64; // 1.2 x the first-order critical beta
    let mut ns = Vec::new();
    let mut log_taus = Vec::new();
    for n in [8usize, 10, 12, 14] {
        let ladder = LadderSpec::new(beta, n).unwrap();
        let tk = tempering_kernels(&ladder, k, n).unwrap();
        // start from the all-plus configuration class at the coldest rung
        let space = MacroSpace::new(n);
        let start = n * space.len() + space.index_of(n as i64, n as i64);
        let opts = SpectralOpts { assume_psd: true, ..SpectralOpts::iterative() };
        let prof = mixing_profile(&tk.composite, start, 0.25, 2_000_000, &opts).unwrap();
        assert!((prof.tau as f64) <= prof.tau_bound, "spectral bound violated");
        ns.push(n as f64);
        log_taus.push((prof.tau as f64).ln());
    }
    let (slope, _, r2) = linear_fit(&ns, &log_taus);
    // log tau linear in N with positive slope: exponential growth; a
    // polynomial tau would flatten in this coordinate
    assert!(slope > 0.05, "slope {slope}");
    assert!(r2 > 0.9, "R2 {r2}");
    let (_, _, r2_loglog) = {
        let log_ns: Vec<f64> = ns.iter().map(|x| x.ln()).collect();
        linear_fit(&log_ns, &log_taus)
    };
    println!("tau growth: log-linear R2 {r2:.4} (slope {slope:.3}), log-log R2 {r2_loglog:.4}");
}
