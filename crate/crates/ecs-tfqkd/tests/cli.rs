//! Process-level tests of the binary: subcommand behavior, config-file
//! handling, flag precedence, CSV format, determinism, and exit codes
//! (0 success, 1 validation failure, 2 bad input, 3 I/O failure).

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecs-tfqkd"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

/// Value of a `key : value` line in the rate report.
fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|line| {
            let (k, v) = line.split_once(':')?;
            (k.trim() == key).then(|| v.trim().parse().expect("numeric field"))
        })
        .unwrap_or_else(|| panic!("missing field {key} in:\n{report}"))
}

#[test]
fn rate_at_500_km_is_positive_with_defaults() {
    let out = run(&["rate", "--L", "500"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report = stdout(&out);
    assert!(field(&report, "R") > 0.0, "{report}");
    assert!(field(&report, "mu_opt") > 0.0, "{report}");
    assert_eq!(field(&report, "L_km"), 500.0);
}

#[test]
fn rate_at_2000_km_is_zero_but_succeeds() {
    let out = run(&["rate", "--L", "2000"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(field(&report, "R"), 0.0);
    assert_eq!(field(&report, "mu_opt"), 0.0);
}

#[test]
fn fixed_mu_is_respected() {
    let out = run(&["rate", "--L", "300", "--mu", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&stdout(&out), "mu_opt"), 0.05);
}

#[test]
fn malformed_config_value_names_the_key_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "mu = abc\n").unwrap();
    let out = run(&["rate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("mu"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "mu = 0.05\nnu = 3\n").unwrap();
    let out = run(&["rate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("unknown key"), "{err}");
    assert!(err.contains("nu"), "{err}");
}

#[test]
fn missing_config_file_is_an_io_failure() {
    let out = run(&["rate", "--config", "/no/such/file.conf"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn out_of_range_parameter_names_the_key_and_exits_2() {
    let out = run(&["rate", "--L", "100", "--F2", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("F2"), "{}", stderr(&out));
}

#[test]
fn unknown_flag_is_a_usage_error_with_exit_2() {
    let out = run(&["rate", "--unknown-flag", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("rate"));
}

#[test]
fn flags_take_precedence_over_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "# long-haul run\nL = 2000\nmu = 0.05\n").unwrap();
    let conf = path.to_str().unwrap();

    // file alone: dead channel
    let from_file = run(&["rate", "--config", conf]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(field(&stdout(&from_file), "R"), 0.0);

    // flag overrides the distance, file still pins mu
    let with_flag = run(&["rate", "--config", conf, "--L", "300"]);
    assert_eq!(with_flag.status.code(), Some(0));
    let report = stdout(&with_flag);
    assert_eq!(field(&report, "L_km"), 300.0);
    assert_eq!(field(&report, "mu_opt"), 0.05);
    assert!(field(&report, "R") > 0.0);
}

#[test]
fn sweep_emits_the_documented_csv_format() {
    let out = run(&["sweep", "--l-start", "100", "--l-stop", "200", "--l-step", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "L_km,mu_opt,p_x_opt,Q_Z,E_Z,E_X,E_ph,Delta,R,R_plob"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    let mut prev_l = f64::NEG_INFINITY;
    for row in rows {
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 10);
        assert!(fields[0] > prev_l, "distances must ascend");
        prev_l = fields[0];
        assert!(fields[8] >= 0.0, "R must be non-negative");
        for idx in [3, 4, 5, 6] {
            assert!((0.0..=1.0).contains(&fields[idx]), "field {idx} not a probability");
        }
        for part in row.split(',') {
            // ten significant digits in scientific notation: d.dddddddddEsd
            let (mantissa, _exp) = part.split_once('e').expect("scientific notation");
            let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
            assert_eq!(digits.len(), 10, "unexpected precision in {part}");
        }
    }
}

#[test]
fn sweep_to_file_matches_stdout_and_repeats_byte_identically() {
    let args = ["sweep", "--l-start", "0", "--l-stop", "400", "--l-step", "100"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "sweep output must be deterministic");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rates.csv");
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let filed = run(&with_out);
    assert_eq!(filed.status.code(), Some(0));
    assert!(stdout(&filed).is_empty(), "CSV goes to the file, not stdout");
    assert_eq!(std::fs::read(&path).unwrap(), first.stdout);
}

#[test]
fn empty_sweep_grid_exits_2() {
    let out = run(&["sweep", "--l-start", "300", "--l-stop", "200", "--l-step", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["sweep", "--l-start", "0", "--l-stop", "100", "--l-step", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_path_exits_3() {
    let out = run(&[
        "sweep",
        "--l-start",
        "100",
        "--l-stop",
        "120",
        "--l-step",
        "10",
        "--out",
        "/no-such-directory/rates.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("/no-such-directory/rates.csv"), "{}", stderr(&out));
}

#[test]
fn finite_subcommand_pins_both_parameters_when_given() {
    let out = run(&["finite", "--L", "300", "--N", "1e12", "--mu", "0.03", "--px", "0.05"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(field(&report, "mu_opt"), 0.03);
    assert_eq!(field(&report, "p_x_opt"), 0.05);
    assert!(field(&report, "R") > 0.0);
    assert!(field(&report, "E_ph") > field(&report, "E_X"), "finite-size inflation missing");
}

#[test]
fn rate_writes_single_row_csv_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("point.csv");
    let out = run(&["rate", "--L", "400", "--mu", "0.04", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "L_km,mu_opt,p_x_opt,Q_Z,E_Z,E_X,E_ph,Delta,R,R_plob"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("4.000000000e2,4.000000000e-2,"), "{row}");
    assert_eq!(lines.next(), None);
    // the human-readable report still goes to stdout
    assert_eq!(field(&stdout(&out), "L_km"), 400.0);
}

#[test]
fn validate_passes_on_the_standard_grid(){
    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "variant,basis,mu,eta,p_d,analytic_q_correct,analytic_q_error,oracle_q_correct,\
         oracle_q_error,max_abs_deviation"
    );
    assert_eq!(lines.count(), 384);
    assert!(stderr(&out).contains("PASS"), "{}", stderr(&out));
}

#[test]
fn config_file_drives_a_complete_finite_run() {
    let dir = tempfile::tempdir().unwrap();
    let conf_path = dir.path().join("run.conf");
    let csv_path = dir.path().join("finite.csv");
    std::fs::write(
        &conf_path,
        format!(
            "# finite-size run\nmode = finite\nL = 300\nmu = 0.03\npx = 0.05\nN = 1e12\n\
             eps_sec = 1e-10  # secrecy\neps_cor = 1e-15\nout = {}\n",
            csv_path.display()
        ),
    )
    .unwrap();
    let out = run(&["rate", "--config", conf_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.lines().count() == 2, "{csv}");
}
