//! Result persistence: summary text, time-series and per-frame CSVs, and the
//! reproducibility manifest.
//!
//! Numbers are written with Rust's shortest-round-trip float formatting, so
//! re-parsing a CSV recovers the exact values and identical runs produce
//! byte-identical files. The manifest is the only output carrying wall-clock
//! information.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{write_config_str, SimConfig};
use crate::engine::{RunMetrics, WindowRecord};
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.txt";
pub const SERIES_FILE: &str = "series.csv";
pub const FRAMES_FILE: &str = "frames.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub const SERIES_HEADER: [&str; 5] = [
    "window_end_s",
    "throughput_bps",
    "total_queue_bits",
    "reconfig_flag_count",
    "avg_cost_to_date",
];

/// Files produced by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub summary: PathBuf,
    pub series: PathBuf,
    pub frames: PathBuf,
    pub manifest: PathBuf,
}

impl OutputPaths {
    pub fn all(&self) -> [&Path; 4] {
        [&self.summary, &self.series, &self.frames, &self.manifest]
    }
}

/// The summary as key-value text. Every number here is recomputable from the
/// series and frames CSVs.
pub fn render_summary(metrics: &RunMetrics) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(": ");
        s.push_str(&v);
        s.push('\n');
    };
    kv("policy", metrics.policy.to_string());
    kv("v_param", metrics.v_param.to_string());
    kv("rng_seed", metrics.rng_seed.to_string());
    kv("avg_cost_per_s", metrics.avg_cost_per_s.to_string());
    kv("reconfig_rate", metrics.reconfig_rate.to_string());
    kv("avg_throughput_bps", metrics.avg_throughput_bps.to_string());
    kv("avg_total_queue_bits", metrics.avg_total_queue_bits.to_string());
    kv(
        "final_total_queue_bits",
        metrics.final_total_queue_bits.to_string(),
    );
    kv("total_served_bits", metrics.total_served_bits.to_string());
    kv("total_arrived_bits", metrics.total_arrived_bits.to_string());
    kv("wasted_service_bits", metrics.wasted_service_bits.to_string());
    kv("arrival_truncations", metrics.arrival_truncations.to_string());
    kv("degenerate_frames", metrics.degenerate_frames.to_string());
    kv(
        "audited_frames_satisfied",
        metrics.audited_frames_satisfied.to_string(),
    );
    kv("n_frames", metrics.frames.len().to_string());
    kv("n_windows", metrics.windows.len().to_string());
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_series_csv(path: &Path, windows: &[WindowRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(SERIES_HEADER).map_err(|e| csv_error(path, e))?;
    for rec in windows {
        w.write_record([
            rec.window_end_s.to_string(),
            rec.throughput_bps.to_string(),
            rec.total_queue_bits.to_string(),
            rec.reconfig_flag_count.to_string(),
            rec.avg_cost_to_date.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn write_frames_csv(path: &Path, metrics: &RunMetrics) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record([
        "frame_index",
        "reconfigured",
        "k_star",
        "w1",
        "w2",
        "cost_charged",
        "wasted_service_bits",
        "arrival_truncations",
        "lyapunov_before",
        "lyapunov_after",
        "drift",
        "penalty",
        "lhs",
        "rhs",
        "satisfied",
    ])
    .map_err(|e| csv_error(path, e))?;
    for f in &metrics.frames {
        w.write_record([
            f.frame_index.to_string(),
            f.reconfigured.to_string(),
            f.k_star.to_string(),
            f.w1.to_string(),
            f.w2.to_string(),
            f.cost_charged.to_string(),
            f.wasted_service_bits.to_string(),
            f.arrival_truncations.to_string(),
            f.audit.lyapunov_before.to_string(),
            f.audit.lyapunov_after.to_string(),
            f.audit.drift.to_string(),
            f.audit.penalty.to_string(),
            f.audit.lhs.to_string(),
            f.audit.rhs.to_string(),
            f.audit.satisfied.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::malformed(path, format!("{other:?}")),
    }
}

fn render_manifest(cfg: &SimConfig, outputs: &OutputPaths, wall_clock_s: f64) -> String {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut s = String::new();
    s.push_str(&format!("code_version: {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("rng_seed: {}\n", cfg.rng_seed));
    s.push_str(&format!("wall_clock_s: {wall_clock_s}\n"));
    s.push_str(&format!("created_unix_s: {created}\n"));
    let names: Vec<String> = outputs
        .all()
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    s.push_str(&format!("outputs: {}\n", names.join(", ")));
    s.push_str("--- config ---\n");
    s.push_str(&write_config_str(cfg));
    s
}

/// Writes summary, series CSV, frames CSV, and the manifest into `out_dir`
/// (created if missing). The manifest plus the code version is enough to
/// reproduce the run bit-exactly.
pub fn write_outputs(
    metrics: &RunMetrics,
    cfg: &SimConfig,
    out_dir: impl AsRef<Path>,
    wall_clock_s: f64,
) -> Result<OutputPaths> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = OutputPaths {
        summary: dir.join(SUMMARY_FILE),
        series: dir.join(SERIES_FILE),
        frames: dir.join(FRAMES_FILE),
        manifest: dir.join(MANIFEST_FILE),
    };
    write_file(&paths.summary, &render_summary(metrics))?;
    write_series_csv(&paths.series, &metrics.windows)?;
    write_frames_csv(&paths.frames, metrics)?;
    write_file(&paths.manifest, &render_manifest(cfg, &paths, wall_clock_s))?;
    Ok(paths)
}

/// Reads a series CSV back into window records.
pub fn read_series_csv(path: impl AsRef<Path>) -> Result<Vec<WindowRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    {
        let headers = reader.headers().map_err(|e| csv_error(path, e))?;
        if headers.iter().ne(SERIES_HEADER) {
            return Err(Error::malformed(
                path,
                format!("unexpected series header {headers:?}"),
            ));
        }
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |j: usize| -> Result<&str> {
            record
                .get(j)
                .ok_or_else(|| Error::malformed(path, format!("row {i}: missing column {j}")))
        };
        let num = |j: usize| -> Result<f64> {
            field(j)?
                .parse()
                .map_err(|e| Error::malformed(path, format!("row {i} column {j}: {e}")))
        };
        out.push(WindowRecord {
            window_end_s: num(0)?,
            throughput_bps: num(1)?,
            total_queue_bits: num(2)?,
            reconfig_flag_count: field(3)?
                .parse()
                .map_err(|e| Error::malformed(path, format!("row {i} column 3: {e}")))?,
            avg_cost_to_date: num(4)?,
        });
    }
    Ok(out)
}

/// Parses `key: value` summary text into a map.
pub fn read_summary(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = BTreeMap::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once(':') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(map)
}
