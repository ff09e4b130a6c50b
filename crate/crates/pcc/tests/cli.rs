//! End-to-end tests of the `pcc` binary: exit codes, report shapes,
//! diagnostics, and seed handling, all through real process invocations.

use std::path::PathBuf;
use std::process::{Command, Output};

use pcc::sampling::CounterRng;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcc"))
        .args(args)
        .env_remove("PCC_SEED")
        .output()
        .expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcc"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by a signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("pcc-e2e-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

/// Four sign channels whose estimate is the smallest non-PSD example:
/// rows are samples, columns are channels ++++ / ++-- / +++- / ++-+.
const NON_PSD_SIGNS: &str = "1,1,1,1\n1,1,1,1\n1,-1,1,-1\n1,-1,-1,1\n";

#[test]
fn estimate_reads_signs_and_reports_the_spectrum() {
    let input = temp_file("signs.csv", NON_PSD_SIGNS);
    let out = run(&["estimate", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "non-PSD alone does not change the exit code");
    let v = json(&out);
    assert_eq!(v["command"], "estimate");
    assert_eq!(v["mode"], "real");
    assert_eq!(v["input_kind"], "signs");
    assert_eq!(v["channels"], 4);
    assert_eq!(v["samples"], 4);
    assert_eq!(v["pcc"]["entries"][0][1], 0.0);
    let s = v["pcc"]["entries"][0][2].as_f64().unwrap();
    assert!((s - 0.7071067811865475).abs() < 1e-15);
    assert_eq!(v["psd"]["is_psd"], false);
    let min = v["psd"]["min_eig"].as_f64().unwrap();
    assert!((min - (1.0 - std::f64::consts::SQRT_2)).abs() < 1e-9);
    assert!(v.get("sample_corr").is_none(), "baseline only on request");

    let failing = run(&["estimate", input.to_str().unwrap(), "--fail-on-npsd"]);
    assert_eq!(code(&failing), 2);
    std::fs::remove_file(input).ok();
}

#[test]
fn estimate_extracts_signs_from_raw_samples() {
    let input = temp_file(
        "samples.csv",
        "0.4,-0.4\n-1.7,1.7\n2.5,-2.5\n-0.2,0.2\n0.9,-0.9\n",
    );
    let out = run(&["estimate", input.to_str().unwrap(), "--baseline"]);
    let v = json(&out);
    assert_eq!(v["input_kind"], "samples");
    assert_eq!(v["pcc"]["entries"][0][1], -1.0, "opposite signs everywhere");
    assert_eq!(
        v["sample_corr"]["entries"][0][1], -1.0,
        "exactly negated channel"
    );
    assert_eq!(v["psd"]["is_psd"], true);
    std::fs::remove_file(input).ok();
}

#[test]
fn estimate_single_channel_is_trivially_psd() {
    let input = temp_file("single.csv", "0.5\n-1.2\n0.7\n");
    let v = json(&run(&["estimate", input.to_str().unwrap()]));
    assert_eq!(v["channels"], 1);
    assert_eq!(v["pcc"]["entries"], serde_json::json!([[1.0]]));
    assert_eq!(v["psd"]["is_psd"], true);
    std::fs::remove_file(input).ok();
}

#[test]
fn median_centering_recovers_signs_from_offset_data() {
    // Both channels are far from zero-mean; without centering every sign
    // is +, with --center-median the channels anti-align exactly.
    let body = "9,5\n11,1\n9,5\n11,1\n";
    let input = temp_file("offset.csv", body);
    let raw = json(&run(&["estimate", input.to_str().unwrap()]));
    assert_eq!(raw["centering"], "none");
    assert_eq!(raw["pcc"]["entries"][0][1], 1.0, "offset drowns the signal");

    let centered = json(&run(&[
        "estimate",
        input.to_str().unwrap(),
        "--center-median",
    ]));
    assert_eq!(centered["centering"], "median");
    assert_eq!(centered["pcc"]["entries"][0][1], -1.0);

    // Centering an exact sign input with median zero is a no-op and the
    // sign-only detection still applies.
    let signs = temp_file("offset-signs.csv", "1,-1\n-1,1\n1,-1\n-1,1\n");
    let v = json(&run(&[
        "estimate",
        signs.to_str().unwrap(),
        "--center-median",
    ]));
    assert_eq!(v["input_kind"], "signs");
    assert_eq!(v["pcc"]["entries"][0][1], -1.0);
    std::fs::remove_file(input).ok();
    std::fs::remove_file(signs).ok();
}

#[test]
fn estimate_pairs_columns_in_complex_mode() {
    // Two complex channels, second = first rotated by j ((re, im) maps to
    // (-im, re)); the estimated correlation of x with jx is exactly -j.
    let input = temp_file(
        "complex.csv",
        "0.5,0.5,-0.5,0.5\n-1.0,2.0,-2.0,-1.0\n1.5,-0.5,0.5,1.5\n",
    );
    let out = run(&["estimate", input.to_str().unwrap(), "--complex"]);
    let v = json(&out);
    assert_eq!(v["mode"], "complex");
    assert_eq!(v["channels"], 2);
    assert_eq!(v["samples"], 3);
    let entry = &v["pcc"]["entries"][0][1];
    assert!(entry.is_array(), "complex entries serialize as [re, im]");
    let re = entry[0].as_f64().unwrap();
    let im = entry[1].as_f64().unwrap();
    assert!(re.abs() < 1e-12, "quarter turn leaves no real correlation");
    assert!((im + 1.0).abs() < 1e-12, "quarter turn is pure imaginary");

    let odd = temp_file("odd.csv", "1,2,3\n4,5,6\n");
    let bad = run(&["estimate", odd.to_str().unwrap(), "--complex"]);
    assert_eq!(code(&bad), 1);
    assert!(stderr(&bad).contains("even number of columns"));
    std::fs::remove_file(input).ok();
    std::fs::remove_file(odd).ok();
}

#[test]
fn csv_diagnostics_carry_line_and_column() {
    let input = temp_file("bad.csv", "# header comment\n1, 1\n1, oops\n");
    let out = run(&["estimate", input.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let msg = stderr(&out);
    assert!(msg.contains("line 3, column 2"), "got: {msg}");
    assert!(msg.contains("oops"), "got: {msg}");
    std::fs::remove_file(input).ok();
}

#[test]
fn missing_input_reports_the_path() {
    let out = run(&["estimate", "/nonexistent/nowhere.csv"]);
    assert_eq!(code(&out), 1);
    let msg = stderr(&out);
    assert!(msg.contains("cannot read"), "got: {msg}");
    assert!(msg.contains("/nonexistent/nowhere.csv"), "got: {msg}");
}

#[test]
fn check_psd_verdicts_and_exit_codes() {
    let psd = temp_file("psd-ok.csv", "1,0.5\n0.5,1\n");
    let out = run(&["check-psd", psd.to_str().unwrap()]);
    let v = json(&out);
    assert_eq!(v["command"], "check-psd");
    assert_eq!(v["psd"]["is_psd"], true);
    assert_eq!(code(&out), 0);

    let s = "0.7071067811865476";
    let non_psd = temp_file(
        "psd-bad.csv",
        &format!("1,0,{s},{s}\n0,1,{s},{s}\n{s},{s},1,0\n{s},{s},0,1\n"),
    );
    let quiet = run(&["check-psd", non_psd.to_str().unwrap()]);
    assert_eq!(code(&quiet), 0, "verdict is in the report by default");
    let loud = run(&["check-psd", non_psd.to_str().unwrap(), "--fail-on-npsd"]);
    assert_eq!(code(&loud), 2);

    let ragged = temp_file("psd-rect.csv", "1,0.5,0\n0.5,1,0\n");
    let bad = run(&["check-psd", ragged.to_str().unwrap()]);
    assert_eq!(code(&bad), 1);
    assert!(stderr(&bad).contains("square"));

    for f in [psd, non_psd, ragged] {
        std::fs::remove_file(f).ok();
    }
}

#[test]
fn check_psd_round_trips_a_complex_counterexample() {
    // Dump the complex counterexample matrix as CSV, feed it back through
    // check-psd --complex, and expect the identical spectrum: the CSV
    // number format round-trips exactly.
    let cx = json(&run(&["counterexample", "--p", "3", "--complex"]));
    let mut rows = Vec::new();
    for row in cx["matrix"]["entries"].as_array().unwrap() {
        let mut fields = Vec::new();
        for entry in row.as_array().unwrap() {
            fields.push(entry[0].to_string());
            fields.push(entry[1].to_string());
        }
        rows.push(fields.join(","));
    }
    let input = temp_file("complex-matrix.csv", &(rows.join("\n") + "\n"));
    let back = json(&run(&["check-psd", input.to_str().unwrap(), "--complex"]));
    assert_eq!(back["mode"], "complex");
    assert_eq!(
        back["psd"]["eigenvalues"], cx["psd"]["eigenvalues"],
        "round-tripped matrix has the identical spectrum"
    );
    assert_eq!(back["psd"]["is_psd"], false);
    std::fs::remove_file(input).ok();
}

#[test]
fn enumerate_reports_shape_and_full_flag() {
    let reduced = json(&run(&["enumerate", "--p", "3", "--n", "2"]));
    assert_eq!(reduced["command"], "enumerate");
    assert_eq!(reduced["mode"], "real");
    assert_eq!(reduced["symmetry_reduce"], true);
    assert_eq!(reduced["total_configs"], 16);
    assert_eq!(reduced["violations"], 0);

    let full = json(&run(&["enumerate", "--p", "3", "--n", "2", "--full"]));
    assert_eq!(full["symmetry_reduce"], false);
    assert_eq!(full["total_configs"], 64);
    assert_eq!(full["violations"], 0);

    let over = run(&["enumerate", "--p", "4", "--n", "16", "--budget-log2", "16"]);
    assert_eq!(code(&over), 1);
    assert!(stderr(&over).contains("budget"));
}

#[test]
fn enumerate_witnesses_replay_through_check_psd() {
    let v = json(&run(&[
        "enumerate",
        "--p",
        "4",
        "--n",
        "4",
        "--witness-cap",
        "1",
    ]));
    assert_eq!(v["violations"], 1056);
    let witness = &v["witnesses"][0];
    let channels: Vec<&str> = witness["channels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(channels.len(), 4);
    assert!(
        channels[0].chars().all(|c| c == '+'),
        "first channel pinned"
    );
    assert!(witness["psd"]["min_eig"].as_f64().unwrap() < -1e-9);

    // The stored matrix must agree with check-psd run on its own dump.
    let mut rows = Vec::new();
    for row in witness["matrix"]["entries"].as_array().unwrap() {
        let fields: Vec<String> = row
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e.to_string())
            .collect();
        rows.push(fields.join(","));
    }
    let input = temp_file("witness-matrix.csv", &(rows.join("\n") + "\n"));
    let back = json(&run(&["check-psd", input.to_str().unwrap()]));
    assert_eq!(back["psd"]["eigenvalues"], witness["psd"]["eigenvalues"]);
    std::fs::remove_file(input).ok();
}

#[test]
fn counterexample_below_the_guarantee_exits_one() {
    let real = run(&["counterexample", "--p", "3"]);
    assert_eq!(code(&real), 1);
    assert!(
        stderr(&real).contains("guaranteed positive semidefinite"),
        "message cites the guarantee: {}",
        stderr(&real)
    );

    let complex = run(&["counterexample", "--p", "2", "--complex"]);
    assert_eq!(code(&complex), 1);

    let ok = json(&run(&["counterexample", "--p", "5"]));
    assert_eq!(ok["p"], 5);
    assert_eq!(ok["psd"]["is_psd"], false);
    assert_eq!(ok["channels"].as_array().unwrap().len(), 5);
}

#[test]
fn validate_seed_resolution_order() {
    let flag_wins = json(&run_with_env(
        &["validate", "--target", "0.2", "--n", "4000", "--seed", "7"],
        "PCC_SEED",
        "99",
    ));
    assert_eq!(flag_wins["seed"], 7);

    let env_used = json(&run_with_env(
        &["validate", "--target", "0.2", "--n", "4000"],
        "PCC_SEED",
        "99",
    ));
    assert_eq!(env_used["seed"], 99);

    let default = json(&run(&["validate", "--target", "0.2", "--n", "4000"]));
    assert_eq!(default["seed"], 42);

    let bad_env = run_with_env(
        &["validate", "--target", "0.2", "--n", "4000"],
        "PCC_SEED",
        "not-a-number",
    );
    assert_eq!(code(&bad_env), 1);
    assert!(stderr(&bad_env).contains("PCC_SEED"));
}

#[test]
fn validate_pass_fail_and_distributions() {
    let pass = run(&["validate", "--target", "0.5", "--n", "200000"]);
    let v = json(&pass);
    assert_eq!(v["pass"], true);
    assert_eq!(v["distribution"], "gaussian");
    assert_eq!(code(&pass), 0);

    // An unattainable tolerance turns the same run into a failure exit.
    let fail = run(&[
        "validate",
        "--target",
        "0.9",
        "--n",
        "1000",
        "--tolerance",
        "1e-9",
    ]);
    assert_eq!(code(&fail), 1);
    let v: Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(v["pass"], false);

    let heavy = json(&run(&[
        "validate",
        "--target",
        "0.5",
        "--n",
        "100000",
        "--heavy-tail-df",
        "3",
    ]));
    assert_eq!(heavy["distribution"], "student-t(nu=3)");
    assert_eq!(heavy["pass"], true);

    let conflict = run(&[
        "validate",
        "--target",
        "0.3",
        "--complex",
        "--heavy-tail-df",
        "3",
    ]);
    assert_eq!(code(&conflict), 1);
    assert!(stderr(&conflict).contains("real mode"));

    let complex = json(&run(&[
        "validate",
        "--target",
        "0.3",
        "--target-im",
        "0.4",
        "--n",
        "50000",
    ]));
    assert_eq!(
        complex["mode"], "complex",
        "--target-im implies complex mode"
    );
    assert_eq!(complex["target"][0], 0.3);
    assert_eq!(complex["target"][1], 0.4);
    assert_eq!(complex["pass"], true);
}

#[test]
fn estimate_recovers_a_planted_three_channel_correlation() {
    // x, y, z jointly Gaussian with Cor(x,y) = Cor(x,z) = 0.5 and
    // Cor(y,z) = 0.25; both the sign-based estimate and the baseline
    // must land near the plant.
    let n = 100_000;
    let mut rng = CounterRng::new(777);
    let w = 0.75f64.sqrt();
    let mut body = String::with_capacity(n * 24);
    for _ in 0..n {
        let x = rng.next_normal();
        let u = rng.next_normal();
        let v = rng.next_normal();
        let y = 0.5 * x + w * u;
        let z = 0.5 * x + w * v;
        body.push_str(&format!("{x},{y},{z}\n"));
    }
    let input = temp_file("planted.csv", &body);
    let out = json(&run(&["estimate", input.to_str().unwrap(), "--baseline"]));
    assert_eq!(out["input_kind"], "samples");
    for (i, j, target) in [(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.25)] {
        let pcc = out["pcc"]["entries"][i][j].as_f64().unwrap();
        let corr = out["sample_corr"]["entries"][i][j].as_f64().unwrap();
        assert!(
            (pcc - target).abs() < 0.02,
            "sign estimate ({i},{j}) = {pcc}, want {target}"
        );
        assert!(
            (corr - target).abs() < 0.02,
            "baseline ({i},{j}) = {corr}, want {target}"
        );
    }
    assert_eq!(out["psd"]["is_psd"], true);
    std::fs::remove_file(input).ok();
}

#[test]
fn output_file_matches_stdout_bytes() {
    let input = temp_file("out-cmp.csv", NON_PSD_SIGNS);
    let to_stdout = run(&["estimate", input.to_str().unwrap()]);
    let path = std::env::temp_dir().join(format!("pcc-e2e-{}-report.json", std::process::id()));
    let to_file = run(&[
        "estimate",
        input.to_str().unwrap(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&to_file), 0);
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
    std::fs::remove_file(input).ok();
    std::fs::remove_file(path).ok();
}

#[test]
fn csv_format_dumps_the_bare_matrix() {
    let input = temp_file("fmt.csv", NON_PSD_SIGNS);
    let out = run(&["estimate", input.to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("1,0,0.7071067811865475,"));

    // The dump feeds straight back into check-psd with an identical verdict.
    let dump = temp_file("fmt-dump.csv", &text);
    let back = json(&run(&["check-psd", dump.to_str().unwrap()]));
    let min = back["psd"]["min_eig"].as_f64().unwrap();
    assert!((min - (1.0 - std::f64::consts::SQRT_2)).abs() < 1e-12);
    std::fs::remove_file(input).ok();
    std::fs::remove_file(dump).ok();
}

#[test]
fn help_version_and_usage_errors() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["estimate", "--help"])), 0);
    assert_eq!(code(&run(&[])), 1, "missing subcommand is a usage error");
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["enumerate", "--p", "3"])), 1, "missing --n");
}
