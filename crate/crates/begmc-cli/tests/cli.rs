//! End-to-end checks of the command-line surface: exit codes, artifact
//! formats, and bit-reproducibility of seeded runs.

use std::process::Command;

fn begmc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_begmc"))
}

#[test]
fn landscape_reports_modes() {
    let out = begmc().args(["landscape", "--beta", "2", "--k", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2 maxima"), "{text}");
    assert!(text.contains("z_alpha"));
}

#[test]
fn verify_quick_passes_and_reports() {
    let dir = std::env::temp_dir().join("begmc_cli_verify");
    let out = begmc()
        .args(["verify", "--quick", "--seed", "5"])
        .args(["--out-dir", dir.to_str().unwrap()])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("[PASS] conductance_sandwich"));
    let report = std::fs::read_to_string(dir.join("verify.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(json["seed"], 5);
}

#[test]
fn verify_unknown_check_exits_2() {
    let out = begmc().args(["verify", "--only", "no_such_check"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn phase_outputs_are_reproducible() {
    let run = |dir: &std::path::Path| {
        let out = begmc()
            .args(["phase", "--beta-min", "0.5", "--beta-max", "2.0", "--beta-steps", "4"])
            .args(["--k-min", "0.9", "--k-max", "1.3", "--k-steps", "3"])
            .args(["--out-dir", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(dir.join("phase.csv")).unwrap()
    };
    let d1 = std::env::temp_dir().join("begmc_cli_phase1");
    let d2 = std::env::temp_dir().join("begmc_cli_phase2");
    let a = run(&d1);
    let b = run(&d2);
    assert_eq!(a, b, "identical configs must give identical bytes");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# {"), "embeds provenance: {text}");
    assert!(text.contains("beta,k,n_maxima,order"));
}

#[test]
fn gap_scan_small_sizes() {
    let out = begmc()
        .args(["gap-scan", "--k", "1.05", "--beta-factor", "1.2", "--n-list", "4,6"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Gap(tempering)"));
}

#[test]
fn gap_scan_swapping_only_over_cap_exits_3() {
    // N = 8 swapping product space is astronomically over any cap
    let out = begmc()
        .args(["gap-scan", "--k", "1.05", "--n-list", "8", "--chains", "swapping"])
        .args(["--cap-states", "1000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("simulation-only"), "{text}");
}

#[test]
fn mix_dumps_trajectory_and_partition() {
    let dir = std::env::temp_dir().join("begmc_cli_mixdump");
    let _ = std::fs::remove_dir_all(&dir);
    let out = begmc()
        .args(["mix", "--k", "1.2", "--beta-factor", "3.0", "--n", "16", "--sweeps", "2000"])
        .args(["--trace-every", "500", "--seed", "4"])
        .args(["--out-dir", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert!(traj.contains("sweep,rung,s,r,h"));
    // 4 samples x 17 rungs of rows plus header and provenance
    assert_eq!(traj.lines().count(), 2 + 4 * 17);
    let part = std::fs::read_to_string(dir.join("partition.csv")).unwrap();
    assert!(part.contains("rung,s,r,block,global_mass"));
    assert!(part.contains("Local"), "deep ladder has a Local block");
}

#[test]
fn couple_small_run() {
    let out =
        begmc().args(["couple", "--n-list", "8,12", "--trials", "30", "--seed", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mean coupling time ~ N^"));
}

#[test]
fn mix_is_seed_deterministic() {
    let run = |dir: &std::path::Path| {
        let out = begmc()
            .args(["mix", "--k", "1.2", "--n", "16", "--sweeps", "20000", "--seed", "9"])
            .args(["--trace-every", "0"])
            .args(["--out-dir", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.join("mix.json")).unwrap()
    };
    let d1 = std::env::temp_dir().join("begmc_cli_mix1");
    let d2 = std::env::temp_dir().join("begmc_cli_mix2");
    assert_eq!(run(&d1), run(&d2));
}

#[test]
fn config_file_overrides_defaults() {
    let dir = std::env::temp_dir().join("begmc_cli_cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"landscape": {"beta": 0.5, "k": 1.0}}"#).unwrap();
    let out = begmc()
        .args(["--config", cfg.to_str().unwrap()])
        .args(["landscape", "--beta", "9", "--k", "9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // the config section wins over the flags
    assert!(text.contains("(0.5, 1)"), "{text}");
}
