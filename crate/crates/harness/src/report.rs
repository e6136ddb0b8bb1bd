//! CSV, terminal table and SVG output for experiment reports.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::runner::Report;

pub const CSV_HEADER: [&str; 16] = [
    "experiment_id",
    "instance",
    "strategy",
    "info_mode",
    "T",
    "replications",
    "mean_reward",
    "se_reward",
    "opt_fluid",
    "opt_dlp",
    "mean_hindsight",
    "mean_regret",
    "se_regret",
    "mean_gap_mu",
    "min_entering_ratio",
    "mean_stop_round",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: io::Write>(report: &Report, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for c in &report.cells {
        let s = &c.stats;
        w.write_record([
            report.experiment_id.clone(),
            report.instance.clone(),
            c.strategy.clone(),
            c.info_mode.to_string(),
            c.horizon.to_string(),
            c.episodes.len().to_string(),
            s.mean_reward.to_string(),
            s.se_reward.to_string(),
            opt(c.opt_fluid),
            opt(c.opt_dlp),
            opt(s.mean_hindsight),
            opt(s.mean_regret),
            opt(s.se_regret),
            opt(s.ratio.as_ref().map(|r| r.mean_gap)),
            opt(s.min_entering_ratio),
            s.mean_stop_round.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(report: &Report) -> String {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn write_csv_file(report: &Report, path: &Path) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(path)?;
    write_csv(report, file).map_err(io::Error::other)
}

/// Human-readable summary for the terminal.
pub fn render_table(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment {} on {}", report.experiment_id, report.instance);
    let _ = writeln!(
        out,
        "{:<24} {:>8} {:>6} {:>12} {:>12} {:>12} {:>10} {:>5}",
        "strategy", "T", "reps", "reward/T", "regret", "se", "gap_mu", "viol"
    );
    for c in &report.cells {
        let s = &c.stats;
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>6} {:>12.6} {:>12.4} {:>12.4} {:>10} {:>5}",
            c.strategy,
            c.horizon,
            c.episodes.len(),
            s.mean_reward / c.horizon as f64,
            s.mean_regret.unwrap_or(f64::NAN),
            s.se_regret.unwrap_or(f64::NAN),
            s.ratio
                .as_ref()
                .map(|r| format!("{:.5}", r.mean_gap))
                .unwrap_or_else(|| "-".into()),
            s.invariant_violations,
        );
    }
    for (label, fit) in &report.slopes {
        match fit {
            Ok(f) => {
                let _ = writeln!(
                    out,
                    "slope {label}: {:.4} (95% CI {:.4}..{:.4}, {} points, {} excluded)",
                    f.slope, f.ci.0, f.ci.1, f.points_used, f.excluded
                );
            }
            Err(e) => {
                let _ = writeln!(out, "slope {label}: {e}");
            }
        }
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log chart of mean regret against T, one polyline per strategy.
/// Cells without a positive regret are skipped.
pub fn render_svg(report: &Report) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for c in &report.cells {
        let Some(r) = c.stats.mean_regret.filter(|r| *r > 0.0) else {
            continue;
        };
        let pt = ((c.horizon as f64).log2(), r.log2());
        match series.iter_mut().find(|s| s.0 == c.strategy) {
            Some(s) => s.1.push(pt),
            None => series.push((c.strategy.clone(), vec![pt])),
        }
    }
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle">{}: mean regret vs T (log2 axes)</text>"#,
        w / 2.0,
        escape(&report.experiment_id)
    );
    if !all.is_empty() {
        let (x0, x1) = bounds(all.iter().map(|p| p.0));
        let (y0, y1) = bounds(all.iter().map(|p| p.1));
        let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
        let _ = writeln!(
            svg,
            r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
            h - m,
            w - m
        );
        for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
            let x = sx(k as f64);
            let _ = writeln!(
                svg,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">2^{k}</text>"#,
                h - m + 16.0
            );
        }
        for k in (y0.ceil() as i64)..=(y1.floor() as i64) {
            let y = sy(k as f64);
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">2^{k}</text>"#,
                m - 6.0
            );
        }
        for (i, (label, pts)) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                coords.join(" ")
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
                w - m - 150.0,
                m + 16.0 * (i as f64 + 1.0),
                escape(label)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi - lo < 1e-9 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
