use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use wogl_core::engagement::{write_trajectory_csv, TerminalMetrics, TrajectoryRecord};
use wogl_core::format::sig;
use wogl_core::gains::gains_at;
use wogl_core::weighting::WeightFamily;

pub const SUMMARY_HEADER: &str = "miss_m,angle_err_deg,cost,peak_accel,flight_time_s";
pub const GAINS_HEADER: &str = "tgo,k1,k2";
const GAIN_POINTS: usize = 31;

/// Metric fields shared by the run summary and sweep rows.
pub fn metric_fields(m: &TerminalMetrics) -> String {
    format!(
        "{},{},{},{},{}",
        sig(m.miss_distance, 12),
        sig(m.impact_angle_error.to_degrees(), 12),
        sig(m.total_cost, 12),
        sig(m.peak_accel, 12),
        sig(m.flight_time, 12)
    )
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_trajectory(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let mut out = create(path)?;
    write_trajectory_csv(&mut out, records)?;
    out.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, m: &TerminalMetrics) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    writeln!(out, "{}", metric_fields(m))?;
    out.flush()?;
    Ok(())
}

/// Gains against time-to-go on a log grid from `1e-3·horizon` to `horizon`,
/// for the weight laid over `[0, horizon]`.
pub fn gains_table(weight: &WeightFamily, horizon: f64) -> Result<Vec<(f64, f64, f64)>> {
    let w = weight.spec(0.0, horizon)?;
    (0..GAIN_POINTS)
        .map(|i| {
            let frac = i as f64 / (GAIN_POINTS - 1) as f64;
            let tgo = if i + 1 == GAIN_POINTS { horizon } else { horizon * 10f64.powf(-3.0 * (1.0 - frac)) };
            let k = gains_at(&w, horizon - tgo)?;
            Ok((tgo, k.k1, k.k2))
        })
        .collect()
}

pub fn write_gains(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{GAINS_HEADER}")?;
    for (tgo, k1, k2) in rows {
        writeln!(out, "{},{},{}", sig(*tgo, 12), sig(*k1, 12), sig(*k2, 12))?;
    }
    out.flush()?;
    Ok(())
}

/// Minimal SVG line plot.
pub fn svg_plot(title: &str, xlabel: &str, ylabel: &str, pts: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut path = String::new();
    for &(x, y) in pts {
        let _ = write!(path, "{:.2},{:.2} ", px(x), py(y));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
            "<rect x=\"{p}\" y=\"{p}\" width=\"{iw}\" height=\"{ih}\" fill=\"none\" stroke=\"#999\"/>\n",
            "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{path}\"/>\n",
            "<text x=\"{cx}\" y=\"{xl}\" text-anchor=\"middle\" font-size=\"12\">{xlabel} [{x0}, {x1}]</text>\n",
            "<text x=\"15\" y=\"{cy}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 {cy})\">{ylabel} [{y0}, {y1}]</text>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        p = PAD,
        iw = W - 2.0 * PAD,
        ih = H - 2.0 * PAD,
        cx = W / 2.0,
        cy = H / 2.0,
        xl = H - 15.0,
        title = title,
        path = path.trim_end(),
        xlabel = xlabel,
        ylabel = ylabel,
        x0 = sig(x0, 4),
        x1 = sig(x1, 4),
        y0 = sig(y0, 4),
        y1 = sig(y1, 4),
    )
}

pub fn write_svgs(dir: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let traj: Vec<_> = records.iter().map(|r| (r.x, r.y)).collect();
    let accel: Vec<_> = records.iter().map(|r| (r.t, r.a_m)).collect();
    for (name, body) in [
        ("trajectory.svg", svg_plot("Trajectory", "x [m]", "y [m]", &traj)),
        ("accel.svg", svg_plot("Commanded acceleration", "t [s]", "a_M [m/s²]", &accel)),
    ] {
        let mut out = create(&dir.join(name))?;
        out.write_all(body.as_bytes())?;
        out.flush()?;
    }
    Ok(())
}
