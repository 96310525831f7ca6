//! CLI behavior: exit codes, partial-failure policy, flag effects and
//! file outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twillsense"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("spawn twillsense")
}

fn read_csv_column(path: &Path, column: usize) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').nth(column).unwrap().parse::<f64>().unwrap())
        .collect()
}

#[test]
fn simulate_writes_monotone_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "simulate",
            "--variant",
            "P_Th",
            "--wales",
            "10",
            "--courses",
            "10",
            "--forces",
            "1:20:20",
            "--dump-graph",
            "--dump-program",
            "--out",
            "sim",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = dir.path().join("sim/sweep.csv");
    let resistances = read_csv_column(&sweep, 1);
    assert_eq!(resistances.len(), 20);
    for pair in resistances.windows(2) {
        assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "sweep not monotone");
    }
    assert!(dir.path().join("sim/sweep.svg").exists());
    assert!(dir.path().join("sim/graph.txt").exists());
    let program = fs::read_to_string(dir.path().join("sim/program.txt")).unwrap();
    assert!(program.contains("Resistat"));
    assert!(program.contains('K'));
}

#[test]
fn simulate_doubling_wales_halves_resistances() {
    let dir = tempfile::tempdir().unwrap();
    for (name, wales) in [("a", "8"), ("b", "16")] {
        let out = run(
            &[
                "simulate",
                "--grid",
                "--wales",
                wales,
                "--courses",
                "9",
                "--pressure",
                "5e5",
                "--forces",
                "1:10:10",
                "--out",
                name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = read_csv_column(&dir.path().join("a/sweep.csv"), 1);
    let b = read_csv_column(&dir.path().join("b/sweep.csv"), 1);
    for (ra, rb) in a.iter().zip(&b) {
        assert!((rb - ra / 2.0).abs() <= 1e-9 * ra, "halving violated: {ra} vs {rb}");
    }
}

#[test]
fn simulate_open_circuit_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "simulate",
            "--variant",
            "P_Th",
            "--open-threshold",
            "1e9",
            "--forces",
            "0:0:1",
            "--out",
            "open",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("open circuit"));
}

#[test]
fn analyze_batch_continues_past_bad_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = run(
        &["synth", "--variant", "P_PR", "--seed", "5", "--out", "good.csv"],
        dir.path(),
    );
    assert!(good.status.success());
    fs::write(dir.path().join("bad.csv"), "t_s,d_mm,F_N,R_ohm\n0,0,0,not-a-number\n").unwrap();

    let out = run(
        &["analyze", "--input", "good.csv", "bad.csv", "--out", "out", "--no-plots"],
        dir.path(),
    );
    // hard error reported, batch continued
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(dir.path().join("out/good_metrics.csv").exists());
    let combined = fs::read_to_string(dir.path().join("out/metrics.csv")).unwrap();
    assert_eq!(combined.lines().count(), 2, "one header plus one good row");
}

#[test]
fn analyze_single_cycle_flags_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run(
        &["synth", "--variant", "P_Th", "--cycles", "1", "--seed", "2", "--out", "one.csv"],
        dir.path(),
    );
    assert!(synth.status.success());
    let out = run(&["analyze", "--input", "one.csv", "--out", "out", "--no-plots"], dir.path());
    assert!(out.status.success());
    let row = fs::read_to_string(dir.path().join("out/one_metrics.csv")).unwrap();
    assert!(row.contains("insufficient-cycles"));
}

#[test]
fn analyze_empty_input_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", "--out", "out"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn fit_emits_two_rows_and_honors_range() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run(
        &["synth", "--variant", "PL1_ml", "--seed", "3", "--out", "run.csv"],
        dir.path(),
    );
    assert!(synth.status.success());
    let out = run(&["fit", "--input", "run.csv", "--range", "0:20", "--out", "fits"], dir.path());
    assert!(out.status.success());
    let table = fs::read_to_string(dir.path().join("fits/fits.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "variant,segment,a,s,d,k,o,r2,converged");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("PL1_ml,pull,"));
    assert!(lines[2].starts_with("PL1_ml,release,"));

    // restricting the range still fits but from fewer points
    let narrow =
        run(&["fit", "--input", "run.csv", "--range", "5:15", "--out", "narrow"], dir.path());
    assert!(narrow.status.success());
    let narrow_table = fs::read_to_string(dir.path().join("narrow/fits.csv")).unwrap();
    assert_eq!(narrow_table.lines().count(), 3);
    assert_ne!(narrow_table, table);
}

#[test]
fn fit_r0_policy_rescales_response_axis() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run(
        &["synth", "--variant", "P_Th", "--seed", "6", "--out", "run.csv"],
        dir.path(),
    );
    assert!(synth.status.success());
    let first_r: f64 = {
        let text = fs::read_to_string(dir.path().join("run.csv")).unwrap();
        let row = text.lines().find(|l| !l.starts_with('#') && !l.starts_with("t_s")).unwrap();
        row.split(',').nth(3).unwrap().parse().unwrap()
    };
    let a = run(&["fit", "--input", "run.csv", "--out", "a"], dir.path());
    assert!(a.status.success());
    // halving R0 doubles the response axis; the fitted offset d follows
    let b = run(
        &[
            "fit",
            "--input",
            "run.csv",
            "--r0",
            &format!("explicit:{}", first_r / 2.0),
            "--out",
            "b",
        ],
        dir.path(),
    );
    assert!(b.status.success());
    let d_of = |dir_name: &str| -> f64 {
        let text = fs::read_to_string(dir.path().join(dir_name).join("fits.csv")).unwrap();
        text.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap()
    };
    let ratio = d_of("b") / d_of("a");
    assert!((ratio - 2.0).abs() < 1e-6, "offset should double, ratio {ratio}");
}

#[test]
fn analyze_motion_eps_controls_detection() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run(
        &["synth", "--variant", "P_Th", "--seed", "12", "--out", "run.csv"],
        dir.path(),
    );
    assert!(synth.status.success());
    // absurdly high threshold: the run looks motionless
    let out = run(
        &[
            "analyze",
            "--input",
            "run.csv",
            "--motion-eps",
            "1e9",
            "--out",
            "out",
            "--no-plots",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let row = fs::read_to_string(dir.path().join("out/run_metrics.csv")).unwrap();
    assert!(row.contains("no-motion"));
}

#[test]
fn synth_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "# synthetic run setup\nvariant=PL2_hl\nprotocol=dwell\ncycles=3\nnoise_sd=0\nseed=10\n",
    )
    .unwrap();
    let a = run(&["synth", "--config", "run.cfg", "--out", "a.csv"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(text.contains("# variant=PL2_hl"));

    // CLI flag overrides the config seed; config variant still applies
    let b = run(
        &["synth", "--config", "run.cfg", "--seed", "11", "--noise", "1.0", "--out", "b.csv"],
        dir.path(),
    );
    assert!(b.status.success());
    let tb = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert!(tb.contains("# variant=PL2_hl"));
    assert_ne!(text, tb);
}

#[test]
fn analyze_hyst_norm_switch_changes_value() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run(
        &["synth", "--variant", "P_Tm", "--seed", "4", "--out", "run.csv"],
        dir.path(),
    );
    assert!(synth.status.success());
    let mut values = Vec::new();
    for (norm, out) in [("mean", "m"), ("pull", "p"), ("release", "r")] {
        let res = run(
            &[
                "analyze",
                "--input",
                "run.csv",
                "--hyst-norm",
                norm,
                "--out",
                out,
                "--no-plots",
            ],
            dir.path(),
        );
        assert!(res.status.success());
        let h = read_csv_column(&dir.path().join(out).join("run_metrics.csv"), 4);
        values.push(h[0]);
    }
    assert!(values[0] != values[1] && values[1] != values[2]);
}

#[test]
fn analyze_jog_companions_fill_columns() {
    let dir = tempfile::tempdir().unwrap();
    for (factor, name) in [("1.0", "base.csv"), ("0.5", "half.csv"), ("2.0", "double.csv")] {
        let out = run(
            &[
                "synth",
                "--variant",
                "PL2_m+",
                "--protocol",
                "varying-speed",
                "--speed-factor",
                factor,
                "--seed",
                "8",
                "--out",
                name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let out = run(
        &[
            "analyze",
            "--input",
            "base.csv",
            "--jog-half",
            "half.csv",
            "--jog-double",
            "double.csv",
            "--out",
            "out",
            "--no-plots",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let half = read_csv_column(&dir.path().join("out/base_metrics.csv"), 12);
    let double = read_csv_column(&dir.path().join("out/base_metrics.csv"), 13);
    assert!(half[0] > 0.999, "rate-independent model: jog x0.5 r2 = {}", half[0]);
    assert!(double[0] > 0.999);
}

#[test]
fn analyze_combined_rows_follow_catalog_order() {
    // every variant with bundled response curves, fed in scrambled order
    let dir = tempfile::tempdir().unwrap();
    let scrambled =
        ["PL2_hl", "P_Tm", "PL1_ml", "P_Th", "PL2_m+", "P_Tl", "PL1_h", "P_PR", "PL1_m"];
    let mut inputs = vec!["analyze".to_string(), "--input".to_string()];
    for (i, variant) in scrambled.iter().enumerate() {
        let name = format!("run{i}.csv");
        let out = run(
            &["synth", "--variant", variant, "--seed", "1", "--out", &name],
            dir.path(),
        );
        assert!(out.status.success());
        inputs.push(name);
    }
    inputs.extend(["--out".to_string(), "out".to_string(), "--no-plots".to_string()]);
    let args: Vec<&str> = inputs.iter().map(|s| s.as_str()).collect();
    let out = run(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let combined = fs::read_to_string(dir.path().join("out/metrics.csv")).unwrap();
    let variants: Vec<&str> = combined
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        variants,
        vec!["P_Tl", "P_Tm", "P_Th", "P_PR", "PL1_m", "PL1_h", "PL1_ml", "PL2_m+", "PL2_hl"]
    );
}

#[test]
fn course_directional_defaults_to_course_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "synth",
            "--variant",
            "P_Th",
            "--protocol",
            "course-directional",
            "--seed",
            "1",
            "--out",
            "course.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("course.csv")).unwrap();
    assert!(text.contains("# direction=course"));

    // Lycra variants have no course-direction characterization
    let bad = run(
        &[
            "synth",
            "--variant",
            "PL2_hl",
            "--protocol",
            "course-directional",
            "--out",
            "bad.csv",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("no response curves"));
}

#[test]
fn report_builds_combined_table() {
    let dir = tempfile::tempdir().unwrap();
    for (variant, seed, name) in [("P_Th", "1", "a.csv"), ("P_Tl", "2", "b.csv")] {
        let s = run(&["synth", "--variant", variant, "--seed", seed, "--out", name], dir.path());
        assert!(s.status.success());
    }
    let analyze = run(
        &["analyze", "--input", "a.csv", "b.csv", "--out", "out", "--no-plots"],
        dir.path(),
    );
    assert!(analyze.status.success());
    let report = run(
        &[
            "report",
            "--input",
            "out/a_metrics.csv",
            "out/b_metrics.csv",
            "--out",
            "rep",
        ],
        dir.path(),
    );
    assert!(report.status.success());
    let combined = fs::read_to_string(dir.path().join("rep/combined.csv")).unwrap();
    let lines: Vec<&str> = combined.lines().collect();
    assert_eq!(lines.len(), 3);
    // catalog order: P_Tl before P_Th
    assert!(lines[1].starts_with("P_Tl,"));
    assert!(lines[2].starts_with("P_Th,"));
    let table = fs::read_to_string(dir.path().join("rep/table.txt")).unwrap();
    assert!(table.contains("h_R [%]"));
    assert!(table.contains("P_Tl"));
}
