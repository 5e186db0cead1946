use std::fs;
use std::process::{Command, Output};

use clap::Parser;
use spbound_cli::{parse_dmc, run_curve, Cli, CliError, Command as Sub};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spbound")).args(args).output().expect("spawn")
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

/// Eb/N0 where a column first drops below `level`, by linear interpolation.
fn crossing(rows: &[Vec<String>], col: usize, level: f64) -> f64 {
    for w in rows.windows(2) {
        let (x0, y0, x1, y1) = (num(&w[0][0]), num(&w[0][col]), num(&w[1][0]), num(&w[1][col]));
        if y0 > level && y1 <= level {
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
        }
    }
    panic!("column {col} never crosses {level}");
}

#[test]
fn curve_crossings_agree_with_thresholds() {
    let out = bin(&[
        "curve", "--channel", "bpsk-awgn", "-n", "500", "-r", "0.8", "--bounds", "sp59,vf,isp,rc",
        "--snr-start", "2", "--snr-stop", "4", "--snr-step", "0.02",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = table(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["eb_n0_db", "ln_pe_sp59", "ln_pe_vf", "ln_pe_isp", "ln_pe_rc"]);
    assert_eq!(rows.len(), 101);
    let level = 1e-5f64.ln();
    let from_curve: Vec<f64> = (1..=3).map(|c| crossing(&rows, c, level)).collect();

    let out = bin(&["threshold", "--channel", "bpsk-awgn", "-n", "500", "-r", "0.8", "--bounds", "sp59,vf,isp", "--pe", "1e-5"]);
    assert!(out.status.success());
    let (_, th) = table(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(th.len(), 1);
    for (i, c) in from_curve.iter().enumerate() {
        assert!((c - num(&th[0][i + 1])).abs() < 5e-3, "bound {i}: curve {c} vs threshold {}", th[0][i + 1]);
    }
    // the sphere-packing bounds sit below the achievability threshold
    assert!(from_curve[2] > from_curve[0] && from_curve[2] > from_curve[1]);
}

#[test]
fn empty_bound_list_is_a_validation_error() {
    let mut cli = Cli::parse_from(["spbound", "curve", "--channel", "bpsk-awgn", "-n", "100", "-r", "0.5"]);
    let Sub::Curve(args) = &mut cli.command else { unreachable!() };
    args.bounds.clear();
    let err = run_curve(args).unwrap_err();
    assert!(matches!(err, CliError::Config { ref field, .. } if field == "bounds"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn identical_runs_are_byte_identical() {
    // the output path is part of the echoed config, so both runs share it
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = bin(&[
            "curve", "--channel", "qpsk-awgn", "-n", "200", "-r", "1.0", "--snr-start", "1", "--snr-stop", "3",
            "-o", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        runs.push(fs::read(&path).unwrap());
        fs::remove_file(&path).unwrap();
    }
    assert_eq!(runs[0], runs[1]);
    let text = String::from_utf8(runs.remove(0)).unwrap();
    assert!(text.starts_with(&format!("# spbound {}\n# config: {{", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("\"channel\":\"qpsk-awgn\""));
}

#[test]
fn region_rejects_pe_at_or_above_one() {
    for pe in ["1", "2.5"] {
        let out = bin(&["region", "--channel", "bpsk-awgn", "--rate-start", "0.8", "--pe", pe]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("pe"));
    }
}

#[test]
fn region_single_rate_gives_single_row() {
    let out = bin(&["region", "--channel", "bpsk-awgn", "--rate-start", "0.8", "--pairs", "isp:sp59", "--pe", "1e-3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = table(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["rate", "pe_target", "n_isp_vs_sp59"]);
    assert_eq!(rows.len(), 1);
    let n = num(&rows[0][2]);
    assert!(n >= 16.0 && n.fract() == 0.0);
}

fn e0_bsc(p: f64, rho: f64) -> f64 {
    let a = 1.0 / (1.0 + rho);
    rho * 2f64.ln() - (1.0 + rho) * (p.powf(a) + (1.0 - p).powf(a)).ln()
}

fn exponent_rows(extra: &[&str]) -> Vec<Vec<f64>> {
    let mut args = vec!["exponent", "--rate-start", "0.05", "--rate-stop", "0.45", "--rate-step", "0.1"];
    args.extend_from_slice(extra);
    let out = bin(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = table(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["rate_nats", "e_sp", "rho_sp", "e_r", "rho_r"]);
    rows.iter().map(|r| r.iter().map(|v| num(v)).collect()).collect()
}

#[test]
fn bsc_exponent_table_matches_grid_oracle() {
    let rows = exponent_rows(&["--channel", "bsc", "--p", "0.1"]);
    assert_eq!(rows.len(), 5);
    let cap = 2f64.ln() + 0.1 * 0.1f64.ln() + 0.9 * 0.9f64.ln();
    let r_crit = {
        // critical rate: slope of E_0 at rho = 1
        let h = 1e-6;
        (e0_bsc(0.1, 1.0 + h) - e0_bsc(0.1, 1.0 - h)) / (2.0 * h)
    };
    for r in rows {
        let (rate, e_sp, e_r) = (r[0], r[1], r[3]);
        let sp_grid = (0..=500_000).map(|i| i as f64 * 1e-4).map(|rho| e0_bsc(0.1, rho) - rho * rate).fold(0.0, f64::max);
        let rc_grid = (0..=10_000).map(|i| i as f64 * 1e-4).map(|rho| e0_bsc(0.1, rho) - rho * rate).fold(0.0, f64::max);
        assert!((e_sp - sp_grid).abs() < 1e-6, "R={rate}: {e_sp} vs {sp_grid}");
        assert!((e_r - rc_grid).abs() < 1e-6, "R={rate}: {e_r} vs {rc_grid}");
        assert!(e_sp >= e_r - 1e-12);
        if rate >= r_crit {
            assert!((e_sp - e_r).abs() < 1e-6);
        }
        if rate >= cap {
            assert_eq!(e_sp, 0.0);
        }
    }
}

#[test]
fn dmc_file_matches_builtin_channel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bsc.txt");
    fs::write(&path, "2 2\n0.9 0.1\n0.1 0.9\n").unwrap();
    let from_file = exponent_rows(&["--channel", "dmc-file", "--dmc", path.to_str().unwrap()]);
    let builtin = exponent_rows(&["--channel", "bsc", "--p", "0.1"]);
    for (a, b) in from_file.iter().zip(&builtin) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-9, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn malformed_dmc_files_are_rejected() {
    for text in ["2 2\n0.9 0.1\n0.1\n", "2 2\n0.9 0.2\n0.1 0.9\n", "x 2\n", "2 2\n0.9 0.1\n0.1 zz\n"] {
        let err = parse_dmc(text).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{text:?}: {err}");
    }
    let out = bin(&["exponent", "--channel", "dmc-file", "--dmc", "/nonexistent/file", "--rate-stop", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_mirror_carries_the_same_values() {
    let args = ["exponent", "--channel", "bsc", "--p", "0.05", "--rate-stop", "0.3", "--rate-step", "0.1"];
    let csv_out = bin(&args);
    let mut json_args = args.to_vec();
    json_args.push("--json");
    let json_out = bin(&json_args);
    assert!(csv_out.status.success() && json_out.status.success());
    let (header, rows) = table(&String::from_utf8(csv_out.stdout).unwrap());
    let doc: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["command"]["exponent"]["p"], 0.05);
    let jrows = doc["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len());
    for (j, r) in jrows.iter().zip(&rows) {
        for (name, v) in header.iter().zip(r) {
            assert_eq!(j[name].as_f64().unwrap(), num(v), "{name}");
        }
    }
}

#[test]
fn non_awgn_channel_on_snr_axis_is_rejected() {
    let out = bin(&["curve", "--channel", "bsc", "-n", "100", "-r", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["threshold", "--channel", "bpsk-awgn", "-n", "100", "-r", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let args = ["exponent", "--channel", "bsc", "--p", "0.1", "--rate-stop", "0.3"];
    let one = Command::new(env!("CARGO_BIN_EXE_spbound")).args(args).env("SPBOUND_THREADS", "1").output().unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_spbound")).args(args).env("SPBOUND_THREADS", "2").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_spbound")).args(args).env("SPBOUND_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn check_subcommand_passes() {
    let out = bin(&["check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let (header, rows) = table(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["check", "passed", "error", "tolerance"]);
    assert!(rows.len() >= 5 && rows.iter().all(|r| r[1] == "1"));
}
