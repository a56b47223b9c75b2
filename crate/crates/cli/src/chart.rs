//! Minimal SVG line charts for benchmark summaries: PSNR and SSIM versus
//! noise density, one polyline per method. Pure string assembly, so output
//! is deterministic.

use std::fmt::Write as _;

use crate::bench::Summary;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Panel {
    x0: f64,
    y0: f64,
    width: f64,
    height: f64,
}

impl Panel {
    fn map_x(&self, density: f64) -> f64 {
        self.x0 + density * self.width
    }

    fn map_y(&self, value: f64, lo: f64, hi: f64) -> f64 {
        let t = if hi > lo { (value - lo) / (hi - lo) } else { 0.5 };
        self.y0 + self.height - t * self.height
    }
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn draw_panel(
    svg: &mut String,
    panel: &Panel,
    title: &str,
    densities: &[f64],
    methods: &[&str],
    means: &[Vec<f64>],
) {
    let (lo, hi) = finite_range(means.iter().flatten().copied());
    let _ = writeln!(
        svg,
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>",
        panel.x0, panel.y0, panel.width, panel.height
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">{title}</text>",
        panel.x0 + panel.width / 2.0,
        panel.y0 - 10.0
    );
    // x ticks at the measured densities
    for &d in densities {
        let x = panel.map_x(d);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#999\"/>",
            panel.y0 + panel.height,
            panel.y0 + panel.height + 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{:.0}%</text>",
            panel.y0 + panel.height + 16.0,
            d * 100.0
        );
    }
    // y ticks: 5 evenly spaced labels
    for k in 0..=4 {
        let value = lo + (hi - lo) * f64::from(k) / 4.0;
        let y = panel.map_y(value, lo, hi);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#999\"/>",
            panel.x0 - 4.0,
            panel.x0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{value:.2}</text>",
            panel.x0 - 8.0,
            y + 3.0
        );
    }
    for (m, method) in methods.iter().enumerate() {
        let color = PALETTE[m % PALETTE.len()];
        let points: Vec<String> = densities
            .iter()
            .zip(&means[m])
            .filter(|(_, v)| v.is_finite())
            .map(|(&d, &v)| format!("{:.1},{:.1}", panel.map_x(d), panel.map_y(v, lo, hi)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points.join(" ")
        );
        let ly = panel.y0 + 14.0 + 14.0 * m as f64;
        let lx = panel.x0 + panel.width - 90.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{method}</text>",
            lx + 24.0,
            ly + 3.5
        );
    }
}

/// Two-panel chart (PSNR left, SSIM right) for a benchmark summary.
pub fn render_summary_svg(summary: &Summary) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"430\" viewBox=\"0 0 960 430\">"
    );
    let _ = writeln!(svg, "<rect width=\"960\" height=\"430\" fill=\"white\"/>");
    let left = Panel { x0: 60.0, y0: 40.0, width: 380.0, height: 330.0 };
    let right = Panel { x0: 540.0, y0: 40.0, width: 380.0, height: 330.0 };
    draw_panel(
        &mut svg,
        &left,
        "PSNR (dB) vs noise density",
        &summary.densities,
        &summary.methods,
        &summary.psnr_means,
    );
    draw_panel(
        &mut svg,
        &right,
        "SSIM vs noise density",
        &summary.densities,
        &summary.methods,
        &summary.ssim_means,
    );
    svg.push_str("</svg>\n");
    svg
}
