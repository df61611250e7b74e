//! Self-contained SVG renderings: diagram scatter, filled field contours and
//! grouped vote histograms. Axis limits are recorded in `<metadata>`.

use std::fmt::Write;

use serde_json::json;

use crate::case_study::AgentClass;
use crate::spectral::{Bounds, FieldGrid};
use crate::voting::SweepResult;

const SIZE: f64 = 520.0;
const PAD: f64 = 64.0;

pub fn class_color(class: AgentClass) -> &'static str {
    match class {
        AgentClass::Candidate => "#e6c200",
        AgentClass::Supporter => "#1f5fbf",
        AgentClass::Opponent => "#c0282d",
        AgentClass::Undecided => "#c000c0",
        AgentClass::Chair => "#2e9a3a",
        AgentClass::NonVoter => "#808080",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    bounds: Bounds,
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.bounds.x_min) / self.bounds.width() * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.bounds.y_min) / self.bounds.height() * self.height
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            self.left, self.top, self.width, self.height
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.bounds.x_min + f * self.bounds.width();
            let yv = self.bounds.y_min + f * self.bounds.height();
            let (x, y) = (self.px(xv), self.py(yv));
            let bottom = self.top + self.height;
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{xv:.2e}</text>"##,
                bottom + 4.0,
                bottom + 16.0
            );
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{yv:.2e}</text>"##,
                self.left - 4.0,
                self.left,
                self.left - 6.0,
                y + 3.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            self.left + self.width / 2.0,
            self.top + self.height + 40.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            self.top + self.height / 2.0,
            self.top + self.height / 2.0,
            escape(y_label)
        );
    }
}

fn header(out: &mut String, width: f64, height: f64, title: &str, meta: serde_json::Value) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, "<metadata>{}</metadata>", escape(&meta.to_string()));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );
}

fn padded(bounds: Bounds, frac: f64) -> Bounds {
    let dx = bounds.width().max(f64::MIN_POSITIVE) * frac;
    let dy = bounds.height().max(f64::MIN_POSITIVE) * frac;
    Bounds {
        x_min: bounds.x_min - dx,
        x_max: bounds.x_max + dx,
        y_min: bounds.y_min - dy,
        y_max: bounds.y_max + dy,
    }
}

fn draw_agents(out: &mut String, frame: &Frame, points: &[[f64; 2]], labels: &[String], colors: &[&str]) {
    for ((p, label), color) in points.iter().zip(labels).zip(colors) {
        let (x, y) = (frame.px(p[0]), frame.py(p[1]));
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="{color}" stroke="#222"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"##,
            x + 8.0,
            y - 6.0,
            escape(label)
        );
    }
}

/// Influence diagram scatter with one colour per agent class.
pub fn scatter(points: &[[f64; 2]], labels: &[String], classes: &[AgentClass], title: &str) -> String {
    let mut bb = Bounds {
        x_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_min: f64::INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    for p in points {
        bb.x_min = bb.x_min.min(p[0]);
        bb.x_max = bb.x_max.max(p[0]);
        bb.y_min = bb.y_min.min(p[1]);
        bb.y_max = bb.y_max.max(p[1]);
    }
    let bounds = padded(bb, 0.08);
    let frame = Frame {
        bounds,
        left: PAD,
        top: PAD,
        width: SIZE - 2.0 * PAD,
        height: SIZE - 2.0 * PAD,
    };
    let mut out = String::new();
    header(
        &mut out,
        SIZE + 120.0,
        SIZE,
        title,
        json!({ "x_limits": [bounds.x_min, bounds.x_max], "y_limits": [bounds.y_min, bounds.y_max] }),
    );
    frame.axes(&mut out, "v2 / lambda2", "v3 / lambda3");
    let colors: Vec<&str> = classes.iter().map(|c| class_color(*c)).collect();
    draw_agents(&mut out, &frame, points, labels, &colors);

    let mut seen: Vec<AgentClass> = Vec::new();
    for c in classes {
        if !seen.contains(c) {
            seen.push(*c);
        }
    }
    for (k, c) in seen.iter().enumerate() {
        let y = PAD + 12.0 + 20.0 * k as f64;
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{y:.2}" r="6" fill="{}" stroke="#222"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"##,
            SIZE + 4.0,
            class_color(*c),
            SIZE + 14.0,
            y + 4.0,
            c.name()
        );
    }
    out.push_str("</svg>\n");
    out
}

const BANDS: usize = 8;

/// Diverging palette: blue above zero, red below, white at zero.
fn band_color(band: i32) -> String {
    let t = (band.unsigned_abs() as f64 / BANDS as f64).min(1.0);
    let (r, g, b) = if band >= 0 { (33.0, 102.0, 172.0) } else { (178.0, 24.0, 43.0) };
    let mix = |c: f64| (255.0 + (c - 255.0) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(r), mix(g), mix(b))
}

fn band_of(v: f64, vmax: f64) -> i32 {
    if v == 0.0 || vmax == 0.0 {
        return 0;
    }
    let k = ((v.abs() / vmax) * BANDS as f64).ceil().min(BANDS as f64) as i32;
    if v > 0.0 {
        k
    } else {
        -k
    }
}

/// Filled contour of a sampled field with the zero level outlined.
pub fn contour(grid: &FieldGrid, points: &[[f64; 2]], labels: &[String], colors: &[&str], title: &str) -> String {
    let frame = Frame {
        bounds: grid.bounds,
        left: PAD,
        top: PAD,
        width: SIZE - 2.0 * PAD,
        height: SIZE - 2.0 * PAD,
    };
    let vmax = grid.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let res = grid.resolution;
    let cw = frame.width / res as f64;
    let ch = frame.height / res as f64;

    let mut out = String::new();
    header(
        &mut out,
        SIZE,
        SIZE,
        title,
        json!({
            "x_limits": [grid.bounds.x_min, grid.bounds.x_max],
            "y_limits": [grid.bounds.y_min, grid.bounds.y_max],
            "resolution": res,
            "value_limit": vmax,
        }),
    );
    out.push_str(r#"<g shape-rendering="crispEdges">"#);
    out.push('\n');
    for iy in 0..res {
        let y = frame.top + frame.height - (iy + 1) as f64 * ch;
        let mut ix = 0;
        while ix < res {
            let band = band_of(grid.value(ix, iy), vmax);
            let start = ix;
            while ix < res && band_of(grid.value(ix, iy), vmax) == band {
                ix += 1;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                frame.left + start as f64 * cw,
                (ix - start) as f64 * cw + 0.01,
                ch + 0.01,
                band_color(band)
            );
        }
    }
    out.push_str("</g>\n");

    // Zero level by marching squares over cell centres.
    let mut path = String::new();
    let centre = |ix: usize, iy: usize| grid.cell_center(ix, iy);
    for iy in 0..res - 1 {
        for ix in 0..res - 1 {
            let corners = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)];
            let vals: Vec<f64> = corners.iter().map(|&(a, b)| grid.value(a, b)).collect();
            let mut crossings = Vec::new();
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if (vals[a] > 0.0) != (vals[b] > 0.0) {
                    let t = vals[a] / (vals[a] - vals[b]);
                    let pa = centre(corners[a].0, corners[a].1);
                    let pb = centre(corners[b].0, corners[b].1);
                    crossings.push([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]);
                }
            }
            for pair in crossings.chunks(2) {
                if let [p, q] = pair {
                    let _ = write!(
                        path,
                        "M{:.2} {:.2}L{:.2} {:.2}",
                        frame.px(p[0]),
                        frame.py(p[1]),
                        frame.px(q[0]),
                        frame.py(q[1])
                    );
                }
            }
        }
    }
    if !path.is_empty() {
        let _ = writeln!(out, r##"<path d="{path}" stroke="#000" stroke-width="1" fill="none"/>"##);
    }
    frame.axes(&mut out, "v2 / lambda2", "v3 / lambda3");
    draw_agents(&mut out, &frame, points, labels, colors);
    out.push_str("</svg>\n");
    out
}

/// Colour for the `k`-th of `count` sweep values, purple through yellow.
pub fn sequential_color(k: usize, count: usize) -> String {
    const ANCHORS: [(f64, f64, f64); 6] = [
        (68.0, 1.0, 84.0),
        (65.0, 68.0, 135.0),
        (42.0, 120.0, 142.0),
        (34.0, 168.0, 132.0),
        (122.0, 209.0, 81.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if count <= 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
    let pos = t * (ANCHORS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(ANCHORS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (ANCHORS[i], ANCHORS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// One panel per mu; bars grouped by agent and coloured by gamma.
pub fn grouped_bars(sweep: &SweepResult, labels: &[String], title: &str) -> String {
    let panel_w = 300.0;
    let panel_h = 320.0;
    let width = PAD + sweep.mus.len() as f64 * (panel_w + 30.0) + 120.0;
    let height = panel_h + 2.0 * PAD + 20.0;
    let vmax = sweep.cells.iter().fold(0.0_f64, |m, c| m.max(c.mean.abs())).max(f64::MIN_POSITIVE);
    let limit = vmax * 1.1;

    let mut out = String::new();
    header(
        &mut out,
        width,
        height,
        title,
        json!({ "y_limits": [-limit, limit], "gammas": sweep.gammas, "mus": sweep.mus, "trials": sweep.trials, "seed": sweep.seed }),
    );
    let groups = sweep.agents.len();
    let bars = sweep.gammas.len();
    for (m, &mu) in sweep.mus.iter().enumerate() {
        let frame = Frame {
            bounds: Bounds {
                x_min: 0.0,
                x_max: groups as f64,
                y_min: -limit,
                y_max: limit,
            },
            left: PAD + m as f64 * (panel_w + 30.0),
            top: PAD,
            width: panel_w,
            height: panel_h,
        };
        frame.axes(&mut out, "undecided agents by productivity", "mean final decision");
        let zero = frame.py(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#000"/>"##,
            frame.left,
            frame.left + frame.width
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">mu = {mu}</text>"#,
            frame.left + frame.width / 2.0,
            PAD - 8.0
        );
        let slot = frame.width / groups as f64;
        let bar_w = slot * 0.8 / bars as f64;
        for (a, &agent) in sweep.agents.iter().enumerate() {
            for g in 0..bars {
                let Some(cell) = sweep.cell(g, m, agent) else { continue };
                let x = frame.left + a as f64 * slot + slot * 0.1 + g as f64 * bar_w;
                let y = frame.py(cell.mean);
                let (top, h) = if cell.mean >= 0.0 { (y, zero - y) } else { (zero, y - zero) };
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.2}" y="{top:.2}" width="{bar_w:.2}" height="{h:.2}" fill="{}"/>"#,
                    sequential_color(g, bars)
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">x{}</text>"#,
                frame.left + (a as f64 + 0.5) * slot,
                zero + 14.0,
                escape(&labels[agent])
            );
        }
    }
    for (g, gamma) in sweep.gammas.iter().enumerate() {
        let x = width - 100.0;
        let y = PAD + 20.0 * g as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{:.2}" font-size="11">gamma = {gamma}</text>"#,
            sequential_color(g, bars),
            x + 16.0,
            y + 10.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_endpoints() {
        assert_eq!(band_color(0), "#ffffff");
        assert_eq!(band_color(BANDS as i32), "#2166ac");
        assert_eq!(band_color(-(BANDS as i32)), "#b2182b");
        assert_eq!(sequential_color(0, 6), "#440154");
        assert_eq!(sequential_color(5, 6), "#fde725");
    }

    #[test]
    fn bands_are_symmetric() {
        assert_eq!(band_of(0.5, 1.0), 4);
        assert_eq!(band_of(-0.5, 1.0), -4);
        assert_eq!(band_of(0.0, 1.0), 0);
        assert_eq!(band_of(1.0, 1.0), BANDS as i32);
    }

    #[test]
    fn scatter_is_well_formed() {
        let svg = scatter(
            &[[0.0, 0.0], [1.0, 2.0]],
            &["a".into(), "b<".into()],
            &[AgentClass::Candidate, AgentClass::Opponent],
            "t",
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("b&lt;"));
        assert_eq!(svg.matches("<circle").count(), 4);
    }
}
