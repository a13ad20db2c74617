//! Circle diagrams of laminations and columns of them.
//!
//! Chords are circular arcs orthogonal to the boundary circle, the usual
//! picture of hyperbolic geodesics in the disk. Output is a pure function of
//! the input.

use std::f64::consts::TAU;
use std::fmt::Write;

use pictograph_core::lamination::{Angle, Label, LabelledLamination, Site};

pub const DEFAULT_DEPTH: usize = 8;

const R: f64 = 60.0;
const CELL_W: f64 = 260.0;
const CELL_H: f64 = 170.0;
const MARGIN: f64 = 20.0;

/// One diagram in a column, with an optional caption to its left.
pub struct Panel<'a> {
    pub caption: String,
    pub lamination: &'a LabelledLamination,
}

fn turns(a: Angle) -> f64 {
    let v = a.value();
    *v.numer() as f64 / *v.denom() as f64
}

fn on_circle(cx: f64, cy: f64, r: f64, t: f64) -> (f64, f64) {
    (cx + r * (TAU * t).cos(), cy - r * (TAU * t).sin())
}

fn label_text(labels: &[Label]) -> String {
    let mut s = String::new();
    for (i, l) in labels.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(
            s,
            "{}<tspan baseline-shift=\"sub\" font-size=\"8\">{}</tspan>",
            l.time, l.crit
        );
    }
    s
}

/// The geodesic from `a` to `b` as an SVG path.
fn geodesic(cx: f64, cy: f64, a: f64, b: f64) -> String {
    let (x1, y1) = on_circle(cx, cy, R, a);
    let (x2, y2) = on_circle(cx, cy, R, b);
    let mut delta = (b - a).rem_euclid(1.0);
    if delta > 0.5 {
        delta = 1.0 - delta;
    }
    let half = delta * TAU / 2.0;
    if (half - TAU / 4.0).abs() < 1e-9 {
        return format!("M {x1:.3} {y1:.3} L {x2:.3} {y2:.3}");
    }
    let radius = R * half.tan();
    // centre of the orthogonal circle, on the bisector of the short arc
    let mid = {
        let d = (b - a).rem_euclid(1.0);
        if d <= 0.5 {
            a + d / 2.0
        } else {
            b + (1.0 - d) / 2.0
        }
    };
    let (ccx, ccy) = on_circle(cx, cy, R / half.cos(), mid);
    let (dx, dy) = (x2 - x1, y2 - y1);
    let sweep = u8::from((ccx - x1) * -dy + (ccy - y1) * dx > 0.0);
    format!("M {x1:.3} {y1:.3} A {radius:.3} {radius:.3} 0 0 {sweep} {x2:.3} {y2:.3}")
}

fn diagram(out: &mut String, cx: f64, cy: f64, lam: &LabelledLamination) {
    let base = lam.base();
    let _ = writeln!(
        out,
        "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{R:.3}\" fill=\"none\" stroke=\"black\"/>"
    );
    for class in base.classes() {
        let ts: Vec<f64> = class.iter().map(|&a| turns(a)).collect();
        let pairs: Vec<(f64, f64)> = if ts.len() == 2 {
            vec![(ts[0], ts[1])]
        } else {
            (0..ts.len()).map(|i| (ts[i], ts[(i + 1) % ts.len()])).collect()
        };
        for (a, b) in pairs {
            let _ = writeln!(
                out,
                "<path d=\"{}\" fill=\"none\" stroke=\"black\"/>",
                geodesic(cx, cy, a, b)
            );
        }
    }
    for &m in base.marks() {
        let (x, y) = on_circle(cx, cy, R, turns(m));
        let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2.500\" fill=\"black\"/>");
    }
    let mut sites: Vec<Site> = lam.labels().iter().map(|&(_, s)| s).collect();
    sites.dedup();
    for site in sites {
        let labels = lam.labels_at(site);
        let t = turns(site.angle());
        let (x, y) = match site {
            Site::Gap(_) => on_circle(cx, cy, 0.75 * R, t),
            Site::Point(_) => on_circle(cx, cy, 1.18 * R, t),
        };
        let _ = writeln!(
            out,
            "<text x=\"{x:.3}\" y=\"{y:.3}\" font-size=\"11\" text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>",
            label_text(&labels)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A single diagram.
pub fn render_lamination(lam: &LabelledLamination) -> String {
    render_column(&[Panel {
        caption: String::new(),
        lamination: lam,
    }])
}

/// Diagrams stacked top to bottom, consecutive ones joined by an edge.
pub fn render_column(panels: &[Panel<'_>]) -> String {
    let captioned = panels.iter().any(|p| !p.caption.is_empty());
    let left = if captioned { 90.0 } else { 0.0 };
    let width = left + CELL_W;
    let height = CELL_H * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.3}\" height=\"{height:.3}\" viewBox=\"0 0 {width:.3} {height:.3}\">"
    );
    let cx = left + CELL_W / 2.0;
    for (i, p) in panels.iter().enumerate() {
        let cy = CELL_H * i as f64 + CELL_H / 2.0;
        if i > 0 {
            let _ = writeln!(
                out,
                "<line x1=\"{cx:.3}\" y1=\"{:.3}\" x2=\"{cx:.3}\" y2=\"{:.3}\" stroke=\"gray\"/>",
                cy - CELL_H + R + MARGIN,
                cy - R - MARGIN
            );
        }
        if captioned {
            let _ = writeln!(
                out,
                "<text x=\"{MARGIN:.3}\" y=\"{cy:.3}\" font-size=\"12\" dominant-baseline=\"middle\">{}</text>",
                escape(&p.caption)
            );
        }
        diagram(&mut out, cx, cy, p.lamination);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use pictograph_core::lamination::Lamination;

    #[test]
    fn diameter_is_a_straight_line() {
        let eight = LabelledLamination::unlabelled(Lamination::from_fractions(&[&[(0, 1), (1, 2)]], &[]));
        let svg = render_lamination(&eight);
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains(" L "));
    }

    #[test]
    fn short_chords_bend_inward() {
        // the orthogonal circle's centre lies outside the disk
        let p = geodesic(0.0, 0.0, 0.0, 0.25);
        assert!(p.contains(" A 60.000 60.000 0 0 "), "{p}");
        let q = geodesic(0.0, 0.0, 0.25, 0.0);
        assert_ne!(p.split(' ').nth(8), q.split(' ').nth(8));
    }

    #[test]
    fn triangle_has_three_sides() {
        let lam = LabelledLamination::unlabelled(Lamination::from_fractions(&[&[(0, 1), (1, 3), (2, 3)]], &[]));
        assert_eq!(render_lamination(&lam).matches("<path").count(), 3);
    }
}
