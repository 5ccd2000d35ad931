//! SVG figures from emitted series: total throughput and total queue size over
//! time, overlaying any number of runs (different `V` values, policies).

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::report::read_series_csv;

const PALETTE: [RGBColor; 6] = [
    RGBColor(0xd6, 0x2e, 0x2e),
    RGBColor(0x1f, 0x4e, 0xd8),
    RGBColor(0x1a, 0x8a, 0x3c),
    RGBColor(0x9b, 0x30, 0xb8),
    RGBColor(0xe8, 0x8c, 0x00),
    RGBColor(0x00, 0x8b, 0x8b),
];

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidInput(format!("plot: {e}"))
}

struct LoadedSeries {
    label: String,
    /// (time s, throughput Mbit/s, total queue Mbit)
    points: Vec<(f64, f64, f64)>,
}

/// Renders `throughput.svg` and `total_queue.svg` into `out_dir` from one or
/// more series CSVs, one curve per input. All inputs must cover the same
/// number of windows.
pub fn emit_plots(inputs: &[(String, PathBuf)], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return Err(Error::InvalidInput(
            "plot: no input series given; pass at least one run directory".into(),
        ));
    }
    let mut loaded = Vec::new();
    for (label, path) in inputs {
        let windows = read_series_csv(path)?;
        let points = windows
            .iter()
            .map(|w| (w.window_end_s, w.throughput_bps / 1e6, w.total_queue_bits / 1e6))
            .collect::<Vec<_>>();
        loaded.push(LoadedSeries {
            label: label.clone(),
            points,
        });
    }
    let len0 = loaded[0].points.len();
    if let Some(bad) = loaded.iter().find(|s| s.points.len() != len0) {
        return Err(Error::InvalidInput(format!(
            "plot: series length mismatch: {} has {} windows, {} has {}",
            loaded[0].label,
            len0,
            bad.label,
            bad.points.len()
        )));
    }
    if len0 == 0 {
        return Err(Error::InvalidInput("plot: series are empty".into()));
    }

    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let throughput_path = out_dir.join("throughput.svg");
    let queue_path = out_dir.join("total_queue.svg");

    draw_chart(
        &throughput_path,
        "Time-averaged total throughput",
        "throughput (Mbit/s)",
        &loaded,
        |p| (p.0, p.1),
    )?;
    draw_chart(
        &queue_path,
        "Total queue size",
        "total queue (Mbit)",
        &loaded,
        |p| (p.0, p.2),
    )?;
    Ok(vec![throughput_path, queue_path])
}

fn draw_chart(
    path: &Path,
    caption: &str,
    y_label: &str,
    series: &[LoadedSeries],
    select: impl Fn(&(f64, f64, f64)) -> (f64, f64),
) -> Result<()> {
    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .fold(0.0f64, f64::max);
    let y_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(&select).map(|p| p.1))
        .fold(0.0f64, f64::max)
        .max(1e-9);

    let root = SVGBackend::new(path, (960, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 24))
        .margin(14)
        .x_label_area_size(44)
        .y_label_area_size(80)
        .build_cartesian_2d(0.0..x_max * 1.02, 0.0..y_max * 1.08)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("time (s)")
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(s.points.iter().map(&select), &color))
            .map_err(plot_err)?
            .label(s.label.clone())
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2))
            });
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.85))
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}
