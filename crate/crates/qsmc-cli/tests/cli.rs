use std::path::Path;
use std::process::{Command, Output};

fn qsmc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsmc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tempdir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("qsmc-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn design_period_reports_both_rules() {
    let dir = tempdir("period");
    let out = qsmc(&["design-period", "--p0", "0.01", "--eps", "0.02", "--class", "xy"], &dir);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("T = 10.0167"), "{text}");
    assert!(text.contains("rule = T1"), "{text}");

    let out = qsmc(&["design-period", "--p0", "0.01", "--eps", "0.2", "--class", "x"], &dir);
    let text = stdout(&out);
    assert!(text.contains("T = 1.0493"), "{text}");
    assert!(text.contains("rule = T2"), "{text}");
    assert!(text.contains("p_threshold = 0.0384"), "{text}");
}

#[test]
fn design_period_rejects_bad_p0_with_exit_2() {
    let dir = tempdir("period-bad");
    let out = qsmc(&["design-period", "--p0", "1.5", "--eps", "0.2", "--class", "x"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p0"), "{err}");
}

#[test]
fn design_drive_writes_trace_and_svgs() {
    let dir = tempdir("drive");
    let out = qsmc(&["design-drive", "--out", "drive-out"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let duration: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("duration = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((duration - 0.060).abs() <= 0.005, "{text}");

    let trace = std::fs::read_to_string(dir.join("drive-out/trace.txt")).unwrap();
    assert!(trace.starts_with("dt="));
    for file in ["probability.svg", "control.svg"] {
        let svg = std::fs::read_to_string(dir.join("drive-out").join(file)).unwrap();
        assert!(svg.starts_with("<svg"), "{file}");
        assert!(svg.contains("<polyline"), "{file}");
    }
}

#[test]
fn design_drive_from_zero_is_empty() {
    let dir = tempdir("drive-zero");
    let out = qsmc(&["design-drive", "--initial", "0", "--out", "zero-out"], &dir);
    assert!(out.status.success());
    assert!(stdout(&out).contains("duration = 0.000000"));
}

#[test]
fn design_drive_time_optimal() {
    let dir = tempdir("drive-opt");
    let out = qsmc(&["design-drive", "--time-optimal", "--umax", "100", "--out", "opt-out"], &dir);
    assert!(out.status.success());
    assert!(stdout(&out).contains("duration = 0.030000"));
    let trace = std::fs::read_to_string(dir.join("opt-out/trace.txt")).unwrap();
    assert!(trace.contains("-1.000000000000e2"));
    assert!(trace.contains(" 1.000000000000e2"));
}

#[test]
fn run_protocol_zero_noise_and_determinism() {
    let dir = tempdir("protocol");
    std::fs::write(
        dir.join("exp.conf"),
        "# zero-noise smoke run\np0 = 0.01\neps = 0.2\nclass = xy\nnoise = none\n\
         initial = 0\nn_cycles = 3\nn_trials = 4\nseed = 5\ndt = 1e-3\n",
    )
    .unwrap();
    let out = qsmc(&["run-protocol", "exp.conf", "--out", "run1"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("rate = 0.000000"), "{text}");

    let out2 = qsmc(&["run-protocol", "exp.conf", "--out", "run2"], &dir);
    assert!(out2.status.success());
    let a = std::fs::read(dir.join("run1/records.csv")).unwrap();
    let b = std::fs::read(dir.join("run2/records.csv")).unwrap();
    assert_eq!(a, b, "identical seed must give byte-identical records");
    assert!(dir.join("run1/summary.csv").exists());
    assert!(dir.join("run1/failure_rate.svg").exists());
}

#[test]
fn run_protocol_rejects_unknown_key_with_exit_2() {
    let dir = tempdir("protocol-bad");
    std::fs::write(dir.join("bad.conf"), "p0 = 0.01\neps = 0.2\nclass = xy\nwhat = 1\n").unwrap();
    let out = qsmc(&["run-protocol", "bad.conf"], &dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn run_protocol_design_failure_exits_3() {
    let dir = tempdir("protocol-design");
    // k tiny: the drive cannot reach the threshold within the time budget.
    std::fs::write(
        dir.join("slow.conf"),
        "p0 = 0.01\neps = 0.2\nclass = xy\nnoise = none\nk = 0.001\nn_cycles = 1\nn_trials = 1\ndt = 1e-2\n",
    )
    .unwrap();
    let out = qsmc(&["run-protocol", "slow.conf"], &dir);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_quick_passes_and_prints_gap() {
    let dir = tempdir("verify");
    let out = qsmc(&["verify", "--quick", "--eps", "0.2", "--p0", "0.01"], &dir);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("gap = 0.047"), "{text}");
    assert_eq!(text.matches(": pass").count(), 5, "{text}");
}
