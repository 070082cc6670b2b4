//! CSV, JSON and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use symbill_core::{ConvexBody, OrbitRecord, Point};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header `k,x_1..x_n,H,eucl_norm,m_1..m_n,residual`; one row per `T²`-step.
/// `m` is the tangency point `m_−(x_k)` leaving the row's point; the last
/// row has none.
pub fn orbit_csv(record: &OrbitRecord) -> String {
    let n = record.x0.len();
    let mut out = String::from("k");
    for i in 1..=n {
        write!(out, ",x_{i}").unwrap();
    }
    out.push_str(",H,eucl_norm");
    for i in 1..=n {
        write!(out, ",m_{i}").unwrap();
    }
    out.push_str(",residual\n");
    for (k, (x, h)) in record.points.iter().zip(&record.h_values).enumerate() {
        write!(out, "{k}").unwrap();
        for c in x.iter() {
            write!(out, ",{}", format_float(*c)).unwrap();
        }
        write!(out, ",{},{}", format_float(*h), format_float(x.norm())).unwrap();
        match record.reflections.get(k) {
            Some((a, b)) => {
                for c in a.m.iter() {
                    write!(out, ",{}", format_float(*c)).unwrap();
                }
                write!(out, ",{}", format_float(a.residual.max(b.residual))).unwrap();
            }
            None => out.push_str(&",".repeat(n + 1)),
        }
        out.push('\n');
    }
    out
}

pub fn write_orbit_csv(record: &OrbitRecord, path: &Path) -> io::Result<()> {
    fs::write(path, orbit_csv(record))
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Boundary of the projection of `M` to the first coordinate plane.
pub fn body_outline(body: &ConvexBody, n: usize) -> symbill_core::Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = std::f64::consts::TAU * i as f64 / n as f64;
        let mut v = Point::zeros(body.dim());
        v[0] = t.cos();
        v[1] = t.sin();
        let q = body.support_point(&v)?;
        out.push((q[0], q[1]));
    }
    Ok(out)
}

const SVG_SIZE: f64 = 800.0;
const SVG_MARGIN: f64 = 0.05;

/// Scatter of the points with the outline drawn to the same scale.
pub fn scatter_svg(points: &[(f64, f64)], outline: &[(f64, f64)], annotations: &[String]) -> String {
    let all = points.iter().chain(outline);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = SVG_SIZE * (1.0 - 2.0 * SVG_MARGIN) / span;
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    let map = |x: f64, y: f64| {
        (
            SVG_SIZE / 2.0 + (x - cx) * scale,
            SVG_SIZE / 2.0 - (y - cy) * scale,
        )
    };
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        SVG_SIZE
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if !outline.is_empty() {
        s.push_str(r#"<polygon fill="black" stroke="black" stroke-width="1" points=""#);
        for (i, &(x, y)) in outline.iter().enumerate() {
            let (u, v) = map(x, y);
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{u:.3},{v:.3}").unwrap();
        }
        s.push_str("\"/>\n");
    }
    for &(x, y) in points {
        let (u, v) = map(x, y);
        writeln!(s, r#"<circle cx="{u:.3}" cy="{v:.3}" r="1.5" fill="steelblue"/>"#).unwrap();
    }
    for (i, a) in annotations.iter().enumerate() {
        writeln!(
            s,
            r#"<text x="10" y="{}" font-family="monospace" font-size="14">{}</text>"#,
            20 + 18 * i,
            escape(a)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_scatter_svg(
    points: &[(f64, f64)],
    outline: &[(f64, f64)],
    annotations: &[String],
    path: &Path,
) -> io::Result<()> {
    if points.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "scatter needs at least one point"));
    }
    fs::write(path, scatter_svg(points, outline, annotations))
}
