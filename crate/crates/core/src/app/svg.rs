//! Grouped bar chart of step times as standalone SVG.

use std::fmt::Write;

use super::{AppError, ResultRow, Stage};

/// Which row field distinguishes bars inside a workload group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Hardware,
    Estimator,
    Split,
}

impl Series {
    fn of(self, r: &ResultRow) -> &str {
        match self {
            Series::Hardware => &r.hardware,
            Series::Estimator => &r.estimator,
            Series::Split => &r.split,
        }
    }
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

const BAR_W: f64 = 36.0;
const BAR_GAP: f64 = 6.0;
const GROUP_GAP: f64 = 28.0;
const PLOT_H: f64 = 240.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Largest unit that keeps the maximum at or above 1.
fn unit_for(max_ns: u64) -> (&'static str, f64) {
    match max_ns {
        n if n >= 1_000_000_000 => ("s", 1e9),
        n if n >= 1_000_000 => ("ms", 1e6),
        n if n >= 1_000 => ("us", 1e3),
        _ => ("ns", 1.0),
    }
}

/// Bars of step time grouped by workload, one bar per row, coloured by
/// `series`. Output depends only on the rows.
pub fn emit_svg_bar_chart(rows: &[ResultRow], series: Series) -> Result<String, AppError> {
    if rows.is_empty() {
        return Err(AppError::new(Stage::Write, "bar chart needs at least one row"));
    }
    let groups = first_seen(rows.iter().map(|r| r.workload.as_str()));
    let labels = first_seen(rows.iter().map(|r| series.of(r)));
    let max_ns = rows.iter().map(|r| r.step_time_ns).max().unwrap_or(0);
    let (unit, scale) = unit_for(max_ns);

    let members: Vec<Vec<&ResultRow>> = groups
        .iter()
        .map(|g| rows.iter().filter(|r| r.workload == *g).collect())
        .collect();
    let plot_w: f64 = members
        .iter()
        .map(|m| m.len() as f64 * (BAR_W + BAR_GAP) - BAR_GAP + GROUP_GAP)
        .sum::<f64>()
        + GROUP_GAP;
    let width = LEFT + plot_w + 20.0;
    let height = TOP + PLOT_H + BOTTOM;
    let base = TOP + PLOT_H;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="18" font-size="14">Simulated step time</text>"#);

    // legend
    let mut lx = LEFT;
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="28" width="10" height="10" fill="{}"/><text x="{:.2}" y="37">{}</text>"#,
            PALETTE[i % PALETTE.len()],
            lx + 14.0,
            escape(l)
        );
        lx += 24.0 + 7.0 * l.chars().count() as f64;
    }

    // axes and ticks
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="#333"/><line x1="{LEFT}" y1="{base}" x2="{:.2}" y2="{base}" stroke="#333"/>"##,
        LEFT + plot_w
    );
    for t in 0..=4 {
        let frac = f64::from(t) / 4.0;
        let y = base - frac * PLOT_H;
        let value = max_ns as f64 * frac / scale;
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{value:.3}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">step time ({unit})</text>"#,
        TOP + PLOT_H / 2.0
    );

    // bars
    let mut x = LEFT + GROUP_GAP;
    for (g, m) in groups.iter().zip(&members) {
        let group_start = x;
        for r in m {
            let color = PALETTE[labels.iter().position(|l| *l == series.of(r)).unwrap_or(0) % PALETTE.len()];
            let h = if max_ns == 0 {
                0.0
            } else {
                r.step_time_ns as f64 / max_ns as f64 * PLOT_H
            };
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{:.2}" width="{BAR_W}" height="{h:.2}" fill="{color}"><title>{}</title></rect>"#,
                base - h,
                escape(&format!("{} {} {}", r.workload, r.hardware, r.estimator))
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{:.3}</text>"#,
                x + BAR_W / 2.0,
                base - h - 3.0,
                r.step_time_ns as f64 / scale
            );
            x += BAR_W + BAR_GAP;
        }
        let end = x - BAR_GAP;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (group_start + end) / 2.0,
            base + 16.0,
            escape(g)
        );
        x = end + GROUP_GAP;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">workload</text>"#,
        LEFT + plot_w / 2.0,
        base + 38.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}
