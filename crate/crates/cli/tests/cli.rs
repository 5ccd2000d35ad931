//! Command-line behavior: exit codes, diagnostics, and the verify suites.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

fn jssa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jssa"))
}

fn scratch_dir(tag: &str) -> PathBuf {
    static COUNTER: AtomicU32 = AtomicU32::new(0);
    let dir = std::env::temp_dir().join(format!(
        "jssa-cli-test-{}-{}-{}",
        std::process::id(),
        tag,
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn stock_config_file_matches_builtin_defaults() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.cfg");
    let cfg = jssa_core::config::parse_config(path).unwrap();
    assert_eq!(cfg, jssa_core::config::SimConfig::default());
}

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let out = jssa().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn unknown_flag_exits_2() {
    let out = jssa().args(["run", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_1_and_names_the_key() {
    let dir = scratch_dir("badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "k_max = 10\np_pilots = 5\n").unwrap();
    let out = jssa()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("p_pilots"), "{}", stderr(&out));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_config_file_exits_1() {
    let out = jssa()
        .args(["run", "--config", "/no/such/file.cfg", "--out", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_on_the_default_config() {
    let dir = scratch_dir("verify");
    let cfg = dir.join("default.cfg");
    std::fs::write(&cfg, "").unwrap();
    let out = jssa().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("oracle-equivalence") && text.contains("PASS"));
    assert!(text.contains("slot-inequality"));
    assert!(!text.contains("FAIL"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn plot_without_series_exits_1() {
    let dir = scratch_dir("plot-empty");
    let out = jssa()
        .args(["plot", "--in"])
        .arg(&dir)
        .args(["--out"])
        .arg(dir.join("figs"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("series.csv"), "{}", stderr(&out));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn run_then_plot_produces_figures() {
    let dir = scratch_dir("run-plot");
    let cfg = dir.join("small.cfg");
    std::fs::write(
        &cfg,
        "n_users = 30\np_pilots = 12\nk_max = 4\nhorizon_slots = 2000\n",
    )
    .unwrap();
    let run_dir = dir.join("run");
    let out = jssa()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&run_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("reconfig_rate"));

    let figs = dir.join("figs");
    let out = jssa()
        .args(["plot", "--in"])
        .arg(&run_dir)
        .args(["--out"])
        .arg(&figs)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(figs.join("throughput.svg").is_file());
    assert!(figs.join("total_queue.svg").is_file());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sweep_writes_one_directory_per_run() {
    let dir = scratch_dir("sweep");
    let cfg = dir.join("small.cfg");
    std::fs::write(
        &cfg,
        "n_users = 30\np_pilots = 12\nk_max = 4\nhorizon_slots = 2000\n",
    )
    .unwrap();
    let sw = dir.join("sw");
    let out = jssa()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--v-grid", "200,2000", "--seeds", "2", "--out"])
        .arg(&sw)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for name in ["v200_s1", "v200_s2", "v2000_s1", "v2000_s2"] {
        assert!(sw.join(name).join("series.csv").is_file(), "missing {name}");
    }
    // Two V values only: the tradeoff report declines politely.
    assert!(stdout(&out).contains("tradeoff"));
    let _ = std::fs::remove_dir_all(&dir);
}
