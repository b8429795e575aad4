//! Self-contained SVG line charts: one panel per state component showing
//! the true trajectory and its bounds.

use std::fmt::Write as _;

use super::TraceRow;
use crate::interval::BoxRegion;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 220.0;
const PAD: f64 = 40.0;

/// Vertical range per panel is the matching side of `view`; bounds outside
/// it are clipped.
type Component = fn(&TraceRow, usize) -> f64;

pub fn render(rows: &[TraceRow], view: &BoxRegion, title: &str) -> String {
    let n = view.dim();
    let height = n as f64 * (PANEL_H + PAD) + PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{height}" viewBox="0 0 {w} {height}" font-family="sans-serif" font-size="11">"#,
        w = PANEL_W + 2.0 * PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="16" font-size="13">{}</text>"#,
        escape(title)
    );
    let k_max = rows.last().map_or(1, |r| r.k.max(1)) as f64;
    for i in 0..n {
        let top = PAD + i as f64 * (PANEL_H + PAD);
        let (lo, hi) = (view.lo[i], view.hi[i]);
        let sx = |k: u64| PAD + PANEL_W * k as f64 / k_max;
        let sy = |v: f64| top + PANEL_H * (hi - v.clamp(lo, hi)) / (hi - lo);
        let _ = writeln!(
            s,
            r##"<rect x="{PAD}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#888"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{}">x{}</text>"#,
            top + PANEL_H / 2.0,
            i + 1
        );
        let _ = writeln!(s, r#"<text x="{PAD}" y="{}">{hi}</text>"#, top - 3.0);
        let _ = writeln!(
            s,
            r#"<text x="{PAD}" y="{}">{lo}</text>"#,
            top + PANEL_H + 12.0
        );
        let series: [(&str, &str, Component); 3] = [
            ("#1f77b4", "none", |r, i| r.x[i]),
            ("#d62728", "4 3", |r, i| r.x_hi[i]),
            ("#2ca02c", "4 3", |r, i| r.x_lo[i]),
        ];
        for (color, dash, get) in series.iter() {
            let mut pts = String::new();
            for r in rows {
                let _ = write!(pts, "{:.2},{:.2} ", sx(r.k), sy(get(r, i)));
            }
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-dasharray="{dash}" points="{}"/>"#,
                pts.trim_end()
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
