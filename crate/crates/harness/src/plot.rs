//! Minimal SVG charts for run artifacts: the training curve and the
//! error-versus-path scatter of an evaluation. Output is plain SVG text with
//! fixed-precision coordinates, so identical inputs produce identical files.

use crate::{EpisodeLog, EvalReport};
use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 40.0;
const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One panel's mapping from data coordinates to viewport pixels.
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn new(top: f64, xr: (f64, f64), yr: (f64, f64)) -> Self {
        let pad = |lo: f64, hi: f64| -> (f64, f64) {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        let (xmin, xmax) = pad(xr.0, xr.1);
        let (ymin, ymax) = pad(yr.0, yr.1);
        Self {
            x0: MARGIN_L,
            y0: top + MARGIN_T,
            w: WIDTH - MARGIN_L - MARGIN_R,
            h: PANEL_H - MARGIN_T - MARGIN_B,
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    fn sx(&self, x: f64) -> f64 {
        self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w
    }

    fn sy(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h
    }

    /// Axed panel frame with min/max tick labels and a title.
    fn render_axes(&self, out: &mut String, title: &str, xlabel: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" font-size="13" fill="#000">{}</text>"##,
            self.x0,
            self.y0 - 8.0,
            title
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" fill="#444" text-anchor="middle">{}</text>"##,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 28.0,
            xlabel
        );
        for (v, anchor_x) in [(self.xmin, self.x0), (self.xmax, self.x0 + self.w)] {
            let _ = writeln!(
                out,
                r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="#444" text-anchor="middle">{}</text>"##,
                anchor_x,
                self.y0 + self.h + 14.0,
                trim(v)
            );
        }
        for (v, y) in [(self.ymin, self.y0 + self.h), (self.ymax, self.y0)] {
            let _ = writeln!(
                out,
                r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="#444" text-anchor="end">{}</text>"##,
                self.x0 - 6.0,
                y + 3.0,
                trim(v)
            );
        }
    }

    fn render_polyline(&self, out: &mut String, pts: &[(f64, f64)], color: &str) {
        if pts.is_empty() {
            return;
        }
        let mut path = String::new();
        for (x, y) in pts {
            let _ = write!(path, "{:.2},{:.2} ", self.sx(*x), self.sy(*y));
        }
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"##,
            path.trim_end(),
            color
        );
    }
}

fn trim(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

fn svg_open(out: &mut String, height: f64) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"##
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="#fff"/>"##
    );
}

/// Two stacked panels over environment steps: episode return and the
/// trailing-50 terminal rate.
pub fn training_curve_svg(log: &[EpisodeLog]) -> String {
    let mut out = String::new();
    svg_open(&mut out, 2.0 * PANEL_H);
    if log.is_empty() {
        out.push_str(r##"<text x="20" y="40" font-size="13">no episodes logged</text>"##);
        out.push('\n');
        out.push_str("</svg>\n");
        return out;
    }
    let xs: Vec<f64> = log.iter().map(|r| r.env_steps as f64).collect();
    let xr = (xs[0], *xs.last().unwrap());

    let returns: Vec<(f64, f64)> = log
        .iter()
        .map(|r| (r.env_steps as f64, r.episode_return))
        .collect();
    let (rmin, rmax) = returns
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, y)| {
            (lo.min(*y), hi.max(*y))
        });
    let top = Frame::new(0.0, xr, (rmin, rmax));
    top.render_axes(&mut out, "episode return", "environment steps");
    top.render_polyline(&mut out, &returns, PALETTE[0]);

    let rates: Vec<(f64, f64)> = log
        .iter()
        .map(|r| (r.env_steps as f64, r.terminal_rate_50))
        .collect();
    let bottom = Frame::new(PANEL_H, xr, (0.0, 1.0));
    bottom.render_axes(
        &mut out,
        "terminal rate (trailing 50 episodes)",
        "environment steps",
    );
    bottom.render_polyline(&mut out, &rates, PALETTE[1]);

    out.push_str("</svg>\n");
    out
}

/// Scatter of calibration error against path length, one color per policy.
/// Episodes whose solve was rejected are omitted.
pub fn eval_scatter_svg(report: &EvalReport) -> String {
    let mut out = String::new();
    svg_open(&mut out, PANEL_H);
    let solved: Vec<&crate::EvalRow> = report
        .rows
        .iter()
        .filter(|r| r.error_pct.is_some())
        .collect();
    if solved.is_empty() {
        out.push_str(r##"<text x="20" y="40" font-size="13">no solved episodes</text>"##);
        out.push('\n');
        out.push_str("</svg>\n");
        return out;
    }
    let xr = solved
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.path_m), hi.max(r.path_m))
        });
    let yr = solved
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            let e = r.error_pct.unwrap();
            (lo.min(e), hi.max(e))
        });
    let frame = Frame::new(0.0, xr, yr);
    frame.render_axes(
        &mut out,
        &format!("calibration error vs path ({})", report.task),
        "path length (m)",
    );

    let mut policies: Vec<&str> = Vec::new();
    for r in &solved {
        if !policies.contains(&r.policy.as_str()) {
            policies.push(&r.policy);
        }
    }
    for (i, policy) in policies.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for r in solved.iter().filter(|r| r.policy == *policy) {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3.2" fill="{}" fill-opacity="0.75"/>"##,
                frame.sx(r.path_m),
                frame.sy(r.error_pct.unwrap()),
                color
            );
        }
        // Legend swatch and label.
        let lx = frame.x0 + frame.w - 150.0;
        let ly = frame.y0 + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/>"##,
            lx,
            ly - 9.0,
            color
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" fill="#000">{}</text>"##,
            lx + 14.0,
            ly,
            policy
        );
    }

    out.push_str("</svg>\n");
    out
}
