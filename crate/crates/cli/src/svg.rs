//! Planar SVG figures.

use std::fmt::Write;

use ellipmap::bodies::ConvexBody;
use ellipmap::ellipsoids::Ellipsoid;

use crate::commands::CliError;

const SIZE: f64 = 480.0;
const OUTLINE_SAMPLES: usize = 720;
const ELLIPSE_SEGMENTS: usize = 64;
const PALETTE: [&str; 4] = ["#c0392b", "#2471a3", "#229954", "#8e44ad"];

fn ellipse_points(e: &Ellipsoid) -> Vec<[f64; 2]> {
    // closed: first point repeated, 64 segments
    (0..=ELLIPSE_SEGMENTS)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * (i % ELLIPSE_SEGMENTS) as f64 / ELLIPSE_SEGMENTS as f64;
            let d = [t.cos(), t.sin()];
            let g = e.gauge(&d);
            [d[0] / g, d[1] / g]
        })
        .collect()
}

fn outline_points(k: &ConvexBody) -> Result<Vec<[f64; 2]>, CliError> {
    (0..=OUTLINE_SAMPLES)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * (i % OUTLINE_SAMPLES) as f64 / OUTLINE_SAMPLES as f64;
            let x = k.boundary_point(&[t.cos(), t.sin()])?;
            Ok([x[0], x[1]])
        })
        .collect()
}

pub fn render(k: &ConvexBody, ellipsoids: &[Ellipsoid], contacts: &[Vec<f64>]) -> Result<String, CliError> {
    let outline = outline_points(k)?;
    let curves: Vec<Vec<[f64; 2]>> = ellipsoids.iter().map(ellipse_points).collect();
    let dots: Vec<[f64; 2]> = contacts.iter().flat_map(|x| [[x[0], x[1]], [-x[0], -x[1]]]).collect();

    let all = outline.iter().chain(curves.iter().flatten()).chain(&dots);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in all {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let margin = 0.1 * span;
    let scale = SIZE / (span + 2.0 * margin);
    let cx = 0.5 * (lo[0] + hi[0]);
    let cy = 0.5 * (lo[1] + hi[1]);
    // y axis points up
    let map = |p: &[f64; 2]| (SIZE / 2.0 + (p[0] - cx) * scale, SIZE / 2.0 - (p[1] - cy) * scale);
    let poly = |pts: &[[f64; 2]]| {
        pts.iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r##"<polyline class="body" fill="#eeeeee" stroke="black" stroke-width="1.5" points="{}"/>"##, poly(&outline));
    for (i, c) in curves.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<polyline class="ellipsoid" fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            poly(c)
        );
    }
    for d in &dots {
        let (x, y) = map(d);
        let _ = writeln!(s, r#"<circle class="contact" cx="{x:.3}" cy="{y:.3}" r="3" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    Ok(s)
}
