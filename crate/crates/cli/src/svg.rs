//! Minimal line charts: one panel per alpha, one series per transform,
//! Kendall tau on the x axis.

use std::fmt::Write;

use tailfuse_core::CellResult;

use crate::output::fmt_sig;

const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];
const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

struct Series {
    label: String,
    gamma: f64,
    points: Vec<(f64, f64)>,
}

fn series_for(rows: &[&CellResult], null: bool) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        let label = r.transform.to_string();
        let y = if null { r.estimate() } else { r.ratio() };
        let (Some(x), Some(y)) = (r.tau, y) else {
            continue;
        };
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((x, y)),
            None => out.push(Series {
                label,
                gamma: r.gamma,
                points: vec![(x, y)],
            }),
        }
    }
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the chart. Under the null the y axis is the scaled type-I error
/// and dashed lines mark the complete-dependence limits `n^(gamma-1)`; in
/// power mode it is the combination/Bonferroni power ratio.
pub fn render(results: &[CellResult]) -> String {
    let null = results.first().is_none_or(|r| r.null);
    let mut alphas: Vec<f64> = results.iter().map(|r| r.alpha).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let height = H * alphas.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (panel, &alpha) in alphas.iter().enumerate() {
        let rows: Vec<&CellResult> = results.iter().filter(|r| r.alpha == alpha).collect();
        panel_svg(&mut svg, &rows, alpha, panel as f64 * H, null);
    }
    svg.push_str("</svg>\n");
    svg
}

fn panel_svg(svg: &mut String, rows: &[&CellResult], alpha: f64, y0: f64, null: bool) {
    let series = series_for(rows, null);
    let n = rows.first().map_or(1, |r| r.n) as f64;
    let bounds: Vec<f64> = if null {
        series.iter().map(|s| n.powf(s.gamma - 1.0)).collect()
    } else {
        Vec::new()
    };
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .chain(bounds.iter().copied());
    let (mut ymin, mut ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
        (lo.min(y), hi.max(y))
    });
    if !ymin.is_finite() {
        (ymin, ymax) = (0.0, 1.0);
    }
    ymin = ymin.min(if null { 0.0 } else { 1.0 }).min(0.0);
    if ymax <= ymin {
        ymax = ymin + 1.0;
    }
    ymax *= 1.05;
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + x * pw;
    let sy = |y: f64| y0 + TOP + (1.0 - (y - ymin) / (ymax - ymin)) * ph;

    let title = if null {
        format!("scaled type-I error, alpha = {}", fmt_sig(alpha, 6))
    } else {
        format!("power ratio vs Bonferroni, alpha = {}", fmt_sig(alpha, 6))
    };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        y0 + 22.0,
        escape(&title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#,
        y0 + TOP
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (x, y) = (sx(t), y0 + TOP + ph);
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{x}" y2="{}" stroke="black"/>"#,
            y + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            y + 18.0,
            fmt_sig(t, 3)
        );
        let v = ymin + t * (ymax - ymin);
        let yy = sy(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{yy}" x2="{LEFT}" y2="{yy}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            yy + 4.0,
            fmt_sig(v, 3)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">Kendall tau</text>"#,
        LEFT + pw / 2.0,
        y0 + H - 10.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some(b) = bounds.get(i) {
            let _ = writeln!(
                svg,
                r#"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="{color}" stroke-dasharray="5,4"/>"#,
                sy(*b),
                LEFT + pw
            );
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = y0 + TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
}
