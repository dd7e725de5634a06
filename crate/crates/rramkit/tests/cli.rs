use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rramkit::formats::{read_reads, read_trace};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn rramkit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rramkit"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_writes_trace_and_reads() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["simulate", &config("simulate_saturation.ini")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let reads = read_reads(std::fs::File::open(dir.path().join("reads.csv")).unwrap()).unwrap();
    assert_eq!(reads.len(), 1501);
    let last = reads.last().unwrap().1;
    assert!((last - 16.71e3).abs() <= 0.01 * 16.71e3, "{last}");
    let trace = read_trace(std::fs::File::open(dir.path().join("trace.csv")).unwrap()).unwrap();
    assert!(!trace.is_empty());
}

#[test]
fn missing_parameter_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["simulate", &config("simulate_missing_params.ini")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does-not-exist"));
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["verify", "no/such/config.ini"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dcop_both_lists_four_operating_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["dcop", &config("dcop_pmos.ini"), "--orientation", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "{text}");
    assert_eq!(std::fs::read_to_string(dir.path().join("dcop.csv")).unwrap(), text);
    let notes = String::from_utf8_lossy(&o.stderr);
    assert!(notes.contains("recommended: source_to_rram"), "{notes}");

    let one = rramkit(dir.path(), &["dcop", &config("dcop_pmos.ini"), "--orientation", "d2r"]);
    assert_eq!(stdout(&one).lines().count(), 3);
}

#[test]
fn default_crossbar_read_reports_sneak_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["crossbar", "--rows", "2", "--cols", "2", "--read", "0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("RS_estimate_ohm: 750"), "{text}");
    assert!(text.contains("error_pct: -25"), "{text}");
    assert!(dir.path().join("crossbar_read.csv").exists());
}

#[test]
fn crossbar_without_action_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["crossbar", &config("crossbar_2x2_sneak.ini")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn crossbar_out_of_range_cell_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["crossbar", &config("crossbar_2x2_sneak.ini"), "--read", "2", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn one_t1r_programming_leaves_neighbours() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["crossbar", &config("crossbar_1t1r_program.ini"), "--program", "1", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let f = std::fs::File::open(dir.path().join("state_after.csv")).unwrap();
    let m = rramkit::formats::read_array(f).unwrap();
    for r in 0..m.rows {
        for c in 0..m.cols {
            let x = m.r[r * m.cols + c];
            if (r, c) == (1, 2) {
                assert!(x > 13e3, "{x}");
            } else {
                assert_eq!(x, 13e3);
            }
        }
    }
}

#[test]
fn verify_exit_codes_follow_the_design_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let pass = rramkit(dir.path(), &["verify", &config("verify_pass.ini")]);
    assert_eq!(pass.status.code(), Some(0), "{}", stdout(&pass));
    let fail = rramkit(dir.path(), &["--jobs", "2", "verify", &config("verify_fail.ini")]);
    assert_eq!(fail.status.code(), Some(1), "{}", stdout(&fail));
    assert!(stdout(&fail).contains("uncertainty"));
}

#[test]
fn characterize_mode_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = rramkit(dir.path(), &["characterize", &config("characterize_amplitude.ini"), "--mode", "width"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("characterize_pulse_width.csv").exists());
    let bad = rramkit(dir.path(), &["characterize", &config("characterize_amplitude.ini"), "--mode", "sideways"]);
    assert_eq!(bad.status.code(), Some(2));
}
