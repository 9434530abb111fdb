//! Case-study artifacts: `report.json`, tabular CSVs and optional SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::study::CaseStudyReport;
use crate::error::{Error, Result};

fn io(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("cannot write {}: {e}", path.display()))
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn accuracies_csv(r: &CaseStudyReport) -> String {
    let mut s = String::from(
        "subset_per_class,n_train,n_test,variant,seed,test_accuracy,val_accuracy,selected_epoch,learning_rate,batch_size,degenerate\n",
    );
    for c in &r.accuracies {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.subset_per_class,
            c.n_train,
            c.n_test,
            c.variant,
            c.seed,
            c.test_accuracy,
            c.val_accuracy,
            c.selected_epoch,
            c.learning_rate,
            c.batch_size,
            c.degenerate
        );
    }
    s
}

pub fn margins_csv(r: &CaseStudyReport) -> String {
    let mut s = String::from("subset_per_class,n_train,variant,mean_accuracy,stdev,theoretical_margin,seeds_within,num_seeds\n");
    for m in &r.margins {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            m.subset_per_class,
            m.n_train,
            m.variant,
            m.mean_accuracy,
            m.stdev,
            m.theoretical_margin,
            m.seeds_within,
            m.num_seeds
        );
    }
    s
}

pub fn power_csv(r: &CaseStudyReport) -> String {
    let mut s = String::from("comparison,test_size,power,num_sims,alpha\n");
    for c in &r.power_curves {
        for (n, e) in &c.curve.points {
            let _ = writeln!(s, "{},{},{},{},{}", c.comparison, n, e.power, e.num_simulations, e.alpha);
        }
    }
    s
}

pub fn comparisons_csv(r: &CaseStudyReport) -> String {
    let mut s = String::from(
        "comparison,subset_per_class,n_train,n_test,mean_gap,power,verdict,significant_fraction,recommended_n_train,recommended_n_total\n",
    );
    for c in &r.comparisons {
        let rec = c.recommendation.as_ref();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:?},{},{},{}",
            c.comparison,
            c.subset_per_class,
            c.n_train,
            c.n_test,
            c.mean_gap,
            c.power.power,
            c.collapse.verdict,
            c.collapse.significant_fraction(),
            opt(rec.map(|r| r.n_train)),
            opt(rec.map(|r| r.n_total)),
        );
    }
    s
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    /// Vertical bars `(x, lo, hi)`.
    bars: Vec<(f64, f64, f64)>,
    line: bool,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Line plot with a log2 x axis and a `[y_lo, y_hi]` y axis.
fn svg_plot(title: &str, x_label: &str, y_label: &str, y_range: (f64, f64), series: &[Series]) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 60.0, 170.0, 30.0, 50.0);
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0).chain(s.bars.iter().map(|b| b.0)))
        .filter(|x| *x > 0.0)
        .collect();
    let (x_lo, x_hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
        (a.min(x.log2()), b.max(x.log2()))
    });
    let (x_lo, x_hi) = if x_lo.is_finite() && x_hi > x_lo { (x_lo, x_hi) } else { (0.0, 1.0) };
    let (y_lo, y_hi) = y_range;
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x.log2() - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| top + (1.0 - (y.clamp(y_lo, y_hi) - y_lo) / (y_hi - y_lo)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" font-size="13" text-anchor="middle">{title}</text>"#, left + pw / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.2}</text>"#,
            left - 4.0,
            sy(y) + 4.0,
            y
        );
    }
    let mut e = x_lo.floor() as i32;
    while e as f64 <= x_hi {
        let x = 2f64.powi(e);
        if e as f64 >= x_lo {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">2^{e}</text>"#, sx(x), top + ph + 14.0);
        }
        e += 1;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, left + pw / 2.0, h - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if ser.line && ser.points.len() > 1 {
            let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        for &(x, y) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        for &(x, lo, hi) in &ser.bars {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.1}" x2="{0:.1}" y1="{1:.1}" y2="{2:.1}" stroke="{color}" stroke-opacity="0.5" stroke-width="6"/>"#,
                sx(x),
                sy(lo),
                sy(hi)
            );
        }
        let ly = top + 12.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, w - right + 10.0, ly - 9.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, w - right + 24.0, ser.label);
    }
    s.push_str("</svg>\n");
    s
}

/// Per-seed accuracies as dots over mean ± theoretical margin bars.
pub fn margins_svg(r: &CaseStudyReport) -> String {
    let series: Vec<Series> = r
        .variants
        .iter()
        .map(|v| Series {
            label: v.name.clone(),
            points: r
                .accuracies
                .iter()
                .filter(|c| c.variant == v.name)
                .map(|c| (c.n_train as f64, c.test_accuracy))
                .collect(),
            bars: r
                .margins
                .iter()
                .filter(|m| m.variant == v.name)
                .map(|m| (m.n_train as f64, m.mean_accuracy - m.theoretical_margin, m.mean_accuracy + m.theoretical_margin))
                .collect(),
            line: false,
        })
        .collect();
    svg_plot("accuracy and theoretical margin", "N_train", "test accuracy", (0.0, 1.0), &series)
}

pub fn power_svg(r: &CaseStudyReport) -> String {
    let series: Vec<Series> = r
        .power_curves
        .iter()
        .map(|c| Series {
            label: c.comparison.clone(),
            points: c.curve.points.iter().map(|(n, e)| (*n as f64, e.power)).collect(),
            bars: Vec::new(),
            line: true,
        })
        .collect();
    svg_plot("power", "N_test", "power", (0.0, 1.0), &series)
}

/// Writes the report into `dir`, creating it if needed.
pub fn write_report(r: &CaseStudyReport, dir: &Path, plot: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let json = serde_json::to_string_pretty(r).map_err(|e| io(dir, e))?;
    let mut files = vec![
        ("report.json", json + "\n"),
        ("accuracies.csv", accuracies_csv(r)),
        ("margins.csv", margins_csv(r)),
    ];
    if !r.comparisons.is_empty() {
        files.push(("power.csv", power_csv(r)));
        files.push(("comparisons.csv", comparisons_csv(r)));
    }
    if plot {
        files.push(("margins.svg", margins_svg(r)));
        if !r.comparisons.is_empty() {
            files.push(("power.svg", power_svg(r)));
        }
    }
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| io(&path, e))?;
    }
    Ok(())
}
