//! Minimal log-log SVG plots.

use std::fmt::Write as _;

pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 40.0;
const PW: f64 = 440.0;
const PH: f64 = 380.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log plot of `series` with a dashed `C·x^p` guide for every order in
/// `guides`, anchored at the first point of the first series.
///
/// The plot box is tagged with `data-box="x y w h"` and the decade ranges it
/// spans with `data-xrange`/`data-yrange` (log10 values).
pub fn loglog_plot(title: &str, xlabel: &str, series: &[Series], guides: &[f64]) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.x.iter().copied().zip(s.y.iter().copied()))
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .collect();
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        xlo = xlo.min(x.log10());
        xhi = xhi.max(x.log10());
        ylo = ylo.min(y.log10());
        yhi = yhi.max(y.log10());
    }
    let anchor = pts.first().copied();
    let guide_ends: Vec<(f64, [(f64, f64); 2])> = match anchor {
        Some((x0, y0)) => guides
            .iter()
            .map(|&p| {
                let at = |lx: f64| (lx, y0.log10() + p * (lx - x0.log10()));
                (p, [at(xlo), at(xhi)])
            })
            .collect(),
        None => Vec::new(),
    };
    for (_, ends) in &guide_ends {
        for &(_, ly) in ends {
            ylo = ylo.min(ly);
            yhi = yhi.max(ly);
        }
    }
    if pts.is_empty() {
        (xlo, xhi, ylo, yhi) = (0.0, 1.0, 0.0, 1.0);
    }
    let (xlo, xhi) = (xlo.floor(), xhi.ceil().max(xlo.floor() + 1.0));
    let (ylo, yhi) = (ylo.floor(), yhi.ceil().max(ylo.floor() + 1.0));
    let px = |lx: f64| LEFT + (lx - xlo) / (xhi - xlo) * PW;
    let py = |ly: f64| TOP + (yhi - ly) / (yhi - ylo) * PH;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + PW / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<g id="plot" data-box="{LEFT} {TOP} {PW} {PH}" data-xrange="{xlo} {xhi}" data-yrange="{ylo} {yhi}">"#
    );
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{PW}" height="{PH}" fill="none" stroke="black"/>"#);
    for d in (xlo as i32)..=(xhi as i32) {
        let x = px(d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x}" y1="{TOP}" x2="{x}" y2="{}" stroke="#ddd"/><text x="{x}" y="{}" text-anchor="middle">1e{d}</text>"##,
            TOP + PH,
            TOP + PH + 16.0
        );
    }
    for d in (ylo as i32)..=(yhi as i32) {
        let y = py(d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">1e{d}</text>"##,
            LEFT + PW,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for (p, [(x1, y1), (x2, y2)]) in &guide_ends {
        let _ = writeln!(
            s,
            r##"<line class="guide" data-order="{p}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-dasharray="6 4"/>"##,
            px(*x1),
            py(*y1),
            px(*x2),
            py(*y2)
        );
    }
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = ser
            .x
            .iter()
            .zip(&ser.y)
            .filter(|(x, y)| **x > 0.0 && **y > 0.0)
            .map(|(x, y)| format!("{},{}", px(x.log10()), py(y.log10())))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        for c in &coords {
            let (x, y) = c.split_once(',').unwrap();
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + PW / 2.0, H - 12.0, escape(xlabel));
    let mut ly = TOP + 10.0;
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let lx = LEFT + PW + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            escape(&ser.label)
        );
        ly += 18.0;
    }
    for (p, _) in &guide_ends {
        let lx = LEFT + PW + 14.0;
        let _ = writeln!(
            s,
            r##"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="#888" stroke-dasharray="6 4"/><text x="{}" y="{}">order {p}</text>"##,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0
        );
        ly += 18.0;
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
