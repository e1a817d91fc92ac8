//! SVG figures, written as plain text. Rung labels are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::output::ratio_dir;
use crate::sweep::RatioRecord;

const CELL: f64 = 40.0;
const MARGIN: f64 = 60.0;
const FONT: &str = "font-family=\"sans-serif\" font-size=\"12\"";

/// Diverging scale: blue for negative, white at zero, red for positive.
fn diverging(x: f64, scale: f64) -> String {
    shade(if scale > 0.0 { (x / scale).clamp(-1.0, 1.0) } else { 0.0 })
}

/// Color of a position `t ∈ [-1, 1]` on the diverging scale.
fn shade(t: f64) -> String {
    let fade = |t: f64| (255.0 * (1.0 - t.abs())).round() as u8;
    let (r, g, b) = if t >= 0.0 { (255, fade(t), fade(t)) } else { (fade(t), fade(t), 255) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn open(width: f64, height: f64, title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n<title>{title}</title>\n<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n<text x=\"{}\" y=\"20\" {FONT} text-anchor=\"middle\">{title}</text>\n",
        width / 2.0
    )
}

fn shot_g(rec: &RatioRecord, i: usize, j: usize) -> Option<f64> {
    rec.shots.correlations.iter().find(|p| p.rung_i == i && p.rung_j == j).map(|p| p.value)
}

/// `G` matrix: shot estimates below the diagonal, exact values above.
pub fn heatmap(rec: &RatioRecord) -> String {
    let n = rec.exact.currents.len();
    let scale = rec.exact.g_matrix.iter().map(|e| e.value.abs()).fold(0.0, f64::max);
    let size = 2.0 * MARGIN + CELL * n as f64;
    let mut s = open(size + 80.0, size, &format!("G(i,j), J_leg/J = {}: lower shots, upper exact", rec.ratio));
    for a in 1..=n {
        for b in 1..=n {
            let (i, j) = (a.min(b), a.max(b));
            let value = if j < i + 2 {
                None
            } else if a < b {
                rec.exact.g(i - 1, j - 1)
            } else {
                shot_g(rec, i, j)
            };
            let fill = value.map(|v| diverging(v, scale)).unwrap_or_else(|| "#d0d0d0".into());
            let (x, y) = (MARGIN + CELL * (b - 1) as f64, MARGIN + CELL * (a - 1) as f64);
            let _ = writeln!(s, "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\" stroke=\"#808080\" stroke-width=\"0.5\"/>");
            if let Some(v) = value {
                let _ = writeln!(
                    s,
                    "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">{v:.3}</text>",
                    x + CELL / 2.0,
                    y + CELL / 2.0 + 3.0
                );
            }
        }
        let c = MARGIN + CELL * (a as f64 - 0.5);
        let _ = writeln!(s, "<text x=\"{c}\" y=\"{}\" {FONT} text-anchor=\"middle\">{a}</text>", MARGIN - 8.0);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT} text-anchor=\"end\">{a}</text>", MARGIN - 8.0, c + 4.0);
    }
    // color bar
    let x = size;
    for k in 0..=20 {
        let y = MARGIN + k as f64 * CELL * n as f64 / 21.0;
        let _ = writeln!(s, "<rect x=\"{x}\" y=\"{y:.2}\" width=\"16\" height=\"{:.2}\" fill=\"{}\"/>", CELL * n as f64 / 21.0, shade(1.0 - k as f64 / 10.0));
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT}>{scale:+.3}</text>", x + 20.0, MARGIN + 10.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT}>{:+.3}</text>", x + 20.0, MARGIN + CELL * n as f64, -scale);
    s.push_str("</svg>\n");
    s
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    width: f64,
    height: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.width - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.height - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (self.height - 2.0 * MARGIN)
    }

    fn frame(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, b, t) = (MARGIN, self.width - MARGIN, self.height - MARGIN, MARGIN);
        let _ = writeln!(s, "<rect x=\"{l}\" y=\"{t}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", r - l, b - t);
        if self.y0 < 0.0 && self.y1 > 0.0 {
            let y = self.py(0.0);
            let _ = writeln!(s, "<line x1=\"{l}\" y1=\"{y:.2}\" x2=\"{r}\" y2=\"{y:.2}\" stroke=\"#808080\" stroke-dasharray=\"4 3\"/>");
        }
        for (v, y) in [(self.y0, b), (self.y1, t)] {
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT} text-anchor=\"end\">{v:.3}</text>", l - 4.0, y + 4.0);
        }
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT} text-anchor=\"middle\">{xlabel}</text>", self.width / 2.0, self.height - 15.0);
        let _ = writeln!(
            s,
            "<text x=\"15\" y=\"{0}\" {FONT} text-anchor=\"middle\" transform=\"rotate(-90 15 {0})\">{ylabel}</text>",
            self.height / 2.0
        );
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((0.0f64, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    let pad = 0.1 * (hi - lo).max(1e-12);
    (lo - pad, hi + pad)
}

/// `G(i,j)` against rung distance, with the per-distance mean.
pub fn distance_plot(rec: &RatioRecord) -> String {
    let n = rec.exact.currents.len();
    let exact: Vec<(usize, f64)> = rec.exact.g_matrix.iter().map(|e| (e.rung_j - e.rung_i, e.value)).collect();
    let shots: Vec<(usize, f64, f64)> = rec.shots.correlations.iter().map(|p| (p.rung_j - p.rung_i, p.value, p.stderr)).collect();
    let (y0, y1) = padded_range(exact.iter().map(|e| e.1).chain(shots.iter().flat_map(|s| [s.1 - s.2, s.1 + s.2])));
    let ax = Axes { x0: 1.5, x1: n as f64 - 0.5, y0, y1, width: 480.0, height: 360.0 };
    let mut s = open(ax.width, ax.height, &format!("G vs distance, J_leg/J = {}", rec.ratio));
    ax.frame(&mut s, "rung distance |i - j|", "G(i,j) [J^2]");
    for d in 2..n {
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{}\" {FONT} text-anchor=\"middle\">{d}</text>", ax.px(d as f64), ax.height - MARGIN + 16.0);
    }
    for &(d, v) in &exact {
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"none\" stroke=\"#c03030\"/>", ax.px(d as f64 - 0.1), ax.py(v));
    }
    for &(d, v, e) in &shots {
        let x = ax.px(d as f64 + 0.1);
        let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#3050c0\"/>", ax.py(v - e), ax.py(v + e));
        let _ = writeln!(s, "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"5\" height=\"5\" fill=\"#3050c0\"/>", x - 2.5, ax.py(v) - 2.5);
    }
    let mut mean = String::new();
    for d in 2..n {
        let vals: Vec<f64> = exact.iter().filter(|e| e.0 == d).map(|e| e.1).collect();
        if !vals.is_empty() {
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let _ = write!(mean, "{:.2},{:.2} ", ax.px(d as f64), ax.py(m));
        }
    }
    let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>", mean.trim_end());
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT} fill=\"#c03030\">exact</text>", ax.width - MARGIN - 90.0, MARGIN + 16.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT} fill=\"#3050c0\">shots</text>", ax.width - MARGIN - 90.0, MARGIN + 32.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT}>mean (exact)</text>", ax.width - MARGIN - 90.0, MARGIN + 48.0);
    s.push_str("</svg>\n");
    s
}

/// Bond kinetic energy per rung: exact bars with shot estimates overlaid.
pub fn bond_bars(rec: &RatioRecord) -> String {
    let n = rec.exact.bond_o.len();
    let (y0, y1) = padded_range(
        rec.exact.bond_o.iter().copied().chain(rec.shots.bonds.iter().flat_map(|b| [b.value - b.stderr, b.value + b.stderr])),
    );
    let ax = Axes { x0: 0.5, x1: n as f64 + 0.5, y0, y1, width: 480.0, height: 360.0 };
    let mut s = open(ax.width, ax.height, &format!("bond kinetic energy, J_leg/J = {}, O_BO = {:.4}", rec.ratio, rec.exact.bond_order));
    ax.frame(&mut s, "rung", "O_j");
    let w = 0.6 * (ax.px(1.0) - ax.px(0.0));
    for (r, &v) in rec.exact.bond_o.iter().enumerate() {
        let x = ax.px((r + 1) as f64);
        let (top, bottom) = (ax.py(v.max(0.0)), ax.py(v.min(0.0)));
        let fill = if v >= 0.0 { "#c03030" } else { "#3050c0" };
        let _ = writeln!(s, "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{w:.2}\" height=\"{:.2}\" fill=\"{fill}\" fill-opacity=\"0.6\"/>", x - w / 2.0, bottom - top);
        let _ = writeln!(s, "<text x=\"{x:.2}\" y=\"{}\" {FONT} text-anchor=\"middle\">{}</text>", ax.height - MARGIN + 16.0, r + 1);
    }
    for b in &rec.shots.bonds {
        let x = ax.px(b.rung as f64);
        let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", ax.py(b.value - b.stderr), ax.py(b.value + b.stderr));
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"black\"/>", ax.py(b.value));
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the three figures of every record into its ratio directory.
pub fn emit_figures(dir: &Path, records: &[RatioRecord]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for rec in records {
        let sub = dir.join(ratio_dir(rec.ratio));
        fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;
        for (name, svg) in [("g_heatmap.svg", heatmap(rec)), ("g_distance.svg", distance_plot(rec)), ("bonds.svg", bond_bars(rec))] {
            let p = sub.join(name);
            fs::write(&p, svg).with_context(|| format!("writing {}", p.display()))?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diverging_scale_is_centered() {
        assert_eq!(diverging(0.0, 1.0), "#ffffff");
        assert_eq!(diverging(1.0, 1.0), "#ff0000");
        assert_eq!(diverging(-2.0, 1.0), "#0000ff");
    }
}
