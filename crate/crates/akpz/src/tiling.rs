//! Lozenge picture of a state.
//!
//! Each white triangle `(x, n)`, `n >= 1`, carries exactly one lozenge, so a
//! window of white triangles lists the tiling. In the plane (x rightward,
//! n upward, unit side) white `(x, n)` is the down-pointing triangle with top
//! edge from `(x + n/2, n h)` to `(x + n/2 + 1, n h)`, `h = sqrt(3)/2`; black
//! `(x, n)` is the up-pointing triangle on the same edge.

use std::fmt::Write;

use akpz_core::{InterlacingArray, LozengeType};
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lozenge {
    pub x: i64,
    pub n: usize,
    #[serde(rename = "type")]
    pub ty: LozengeType,
}

/// Default horizontal window: one site beyond the extreme particles.
pub fn default_window(a: &InterlacingArray) -> (i64, i64) {
    let lo = a.leftmost().into_iter().min().unwrap_or(0);
    let hi = a.rightmost().into_iter().max().unwrap_or(0);
    (lo - 1, hi + 1)
}

pub fn lozenges(a: &InterlacingArray, window: (i64, i64)) -> Result<Vec<Lozenge>> {
    if window.0 > window.1 {
        return Err(invalid("empty window"));
    }
    let mut out = Vec::new();
    for n in 1..=a.n() {
        for x in window.0..=window.1 {
            out.push(Lozenge {
                x,
                n,
                ty: a.classify_lozenge(x, n)?,
            });
        }
    }
    Ok(out)
}

pub fn to_json(tiles: &[Lozenge]) -> Result<String> {
    let mut s = serde_json::to_string(tiles)?;
    s.push('\n');
    Ok(s)
}

const H: f64 = 0.866_025_403_784_438_6;

/// Corners of the lozenge on white `(x, n)` in plane coordinates.
pub fn corners(l: &Lozenge) -> [(f64, f64); 4] {
    let u = l.x as f64 + l.n as f64 / 2.0;
    let (top, bot) = (l.n as f64 * H, (l.n as f64 - 1.0) * H);
    match l.ty {
        LozengeType::I => [(u + 0.5, bot), (u + 1.0, top), (u + 0.5, top + H), (u, top)],
        LozengeType::II => [(u + 0.5, bot), (u + 1.5, bot), (u + 1.0, top), (u, top)],
        LozengeType::III => [(u - 0.5, bot), (u + 0.5, bot), (u + 1.0, top), (u, top)],
    }
}

fn fill(ty: LozengeType) -> &'static str {
    match ty {
        LozengeType::I => "#e8b04a",
        LozengeType::II => "#4a7fb0",
        LozengeType::III => "#9cc68a",
    }
}

/// SVG with one polygon per lozenge; `scale` pixels per unit.
pub fn to_svg(tiles: &[Lozenge], scale: f64) -> String {
    let pts: Vec<(f64, f64)> = tiles.iter().flat_map(corners).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.5;
    let (w, h) = ((x1 - x0 + 2.0 * pad) * scale, (y1 - y0 + 2.0 * pad) * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, r##"<g stroke="#222" stroke-width="{:.2}" stroke-linejoin="round">"##, scale / 40.0);
    for t in tiles {
        let c = corners(t);
        let p: Vec<String> = c
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", (x - x0 + pad) * scale, (y1 - y + pad) * scale))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon data-x="{}" data-n="{}" data-type="{}" fill="{}" points="{}"/>"#,
            t.x,
            t.n,
            t.ty.as_str(),
            fill(t.ty),
            p.join(" ")
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
