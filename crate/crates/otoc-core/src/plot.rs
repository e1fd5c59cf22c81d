//! Minimal plot emission: standalone SVG plus a gnuplot script/data pair.
//!
//! Every grid point becomes one SVG element carrying `data-i`/`data-j`, so
//! a consumer can check coverage without parsing geometry.

use std::fmt::Write as _;

use crate::dynamics::fmt17;
use crate::sweep::SweepResult;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

fn span(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs.filter(|x| x.is_finite()) {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>
<text x="{x}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{t}</text>"#,
        x = W / 2.0,
        t = esc(title)
    );
}

fn axes(out: &mut String, xl: &str, yl: &str, xr: (f64, f64), yr: (f64, f64)) {
    let _ = writeln!(
        out,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>
<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>
<text x="{cx}" y="{yl_y}" text-anchor="middle" font-family="sans-serif" font-size="12">{xl}</text>
<text x="16" y="{cy}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {cy})">{yl}</text>
<text x="{PAD}" y="{tick_y}" font-family="sans-serif" font-size="10">{x0:.3}</text>
<text x="{r}" y="{tick_y}" text-anchor="end" font-family="sans-serif" font-size="10">{x1:.3}</text>
<text x="{tx}" y="{b}" text-anchor="end" font-family="sans-serif" font-size="10">{y0:.3e}</text>
<text x="{tx}" y="{PAD}" text-anchor="end" font-family="sans-serif" font-size="10">{y1:.3e}</text>"#,
        b = H - PAD,
        r = W - PAD,
        cx = W / 2.0,
        cy = H / 2.0,
        yl_y = H - 12.0,
        tick_y = H - PAD + 14.0,
        tx = PAD - 4.0,
        xl = esc(xl),
        yl = esc(yl),
        x0 = xr.0,
        x1 = xr.1,
        y0 = yr.0,
        y1 = yr.1,
    );
}

fn map(v: f64, r: (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - r.0) / (r.1 - r.0) * (b - a)
}

/// Line plot for 1D sweeps, heatmap for 2D.
pub fn svg(result: &SweepResult) -> String {
    match &result.axis2 {
        None => svg_line(result),
        Some(_) => svg_heatmap(result),
    }
}

fn svg_line(res: &SweepResult) -> String {
    let xs = &res.axis1.values;
    let ys = res.column();
    let xr = span(xs.iter().copied());
    let yr = span(ys.iter().copied());
    let px = |x: f64| map(x, xr, PAD, W - PAD);
    let py = |y: f64| if y.is_finite() { map(y, yr, H - PAD, PAD) } else { H - PAD };

    let mut out = String::new();
    header(&mut out, &format!("{} vs {}", res.observable, res.axis1.name));
    axes(&mut out, &res.axis1.name, &res.observable, xr, yr);
    let pts: Vec<String> = xs.iter().zip(&ys).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
    let _ = writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
    for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
        let _ = writeln!(
            out,
            r#"<circle data-i="{i}" data-j="0" cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"><title>{}={} {}={}</title></circle>"#,
            px(*x),
            py(*y),
            esc(&res.axis1.name),
            fmt17(*x),
            esc(&res.observable),
            fmt17(*y)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn color(f: f64) -> String {
    // white → dark blue
    let f = if f.is_finite() { f.clamp(0.0, 1.0) } else { 0.0 };
    let r = (255.0 * (1.0 - f)) as u8;
    let g = (255.0 * (1.0 - 0.8 * f)) as u8;
    let b = (255.0 * (1.0 - 0.45 * f)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn svg_heatmap(res: &SweepResult) -> String {
    let b = res.axis2.as_ref().expect("2D sweep");
    let (n1, n2) = (res.axis1.values.len(), b.values.len());
    let zr = span(res.grid.iter().flatten().copied());
    let (cw, ch) = ((W - 2.0 * PAD) / n1 as f64, (H - 2.0 * PAD) / n2 as f64);

    let mut out = String::new();
    header(&mut out, &format!("{} over ({}, {})", res.observable, res.axis1.name, b.name));
    for i in 0..n1 {
        for j in 0..n2 {
            let z = res.grid[i][j];
            let _ = writeln!(
                out,
                r#"<rect data-i="{i}" data-j="{j}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"><title>{}={} {}={} {}={}</title></rect>"#,
                PAD + i as f64 * cw,
                H - PAD - (j + 1) as f64 * ch,
                cw,
                ch,
                color((z - zr.0) / (zr.1 - zr.0)),
                esc(&res.axis1.name),
                fmt17(res.axis1.values[i]),
                esc(&b.name),
                fmt17(b.values[j]),
                esc(&res.observable),
                fmt17(z)
            );
        }
    }
    axes(
        &mut out,
        &res.axis1.name,
        &b.name,
        span(res.axis1.values.iter().copied()),
        span(b.values.iter().copied()),
    );
    out.push_str("</svg>\n");
    out
}

/// Whitespace-separated data (blank line between axis-1 blocks for 2D).
pub fn gnuplot_data(res: &SweepResult) -> String {
    let mut out = String::new();
    match &res.axis2 {
        None => {
            for (x, row) in res.axis1.values.iter().zip(&res.grid) {
                let _ = writeln!(out, "{} {}", fmt17(*x), fmt17(row[0]));
            }
        }
        Some(b) => {
            for (x, row) in res.axis1.values.iter().zip(&res.grid) {
                for (y, z) in b.values.iter().zip(row) {
                    let _ = writeln!(out, "{} {} {}", fmt17(*x), fmt17(*y), fmt17(*z));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn gnuplot_script(res: &SweepResult, data_file: &str, png_file: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set terminal pngcairo size 800,560");
    let _ = writeln!(out, "set output '{png_file}'");
    let _ = writeln!(out, "set xlabel '{}'", res.axis1.name);
    match &res.axis2 {
        None => {
            let _ = writeln!(out, "set ylabel '{}'", res.observable);
            let _ = writeln!(out, "plot '{data_file}' using 1:2 with linespoints title '{}'", res.observable);
        }
        Some(b) => {
            let _ = writeln!(out, "set ylabel '{}'", b.name);
            let _ = writeln!(out, "set view map");
            let _ = writeln!(out, "splot '{data_file}' using 1:2:3 with pm3d title '{}'", res.observable);
        }
    }
    out
}
