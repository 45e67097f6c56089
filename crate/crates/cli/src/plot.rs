//! Minimal SVG line charts for the experiment presets.
//!
//! The CSVs are the machine contract; these plots exist so a human can eye
//! a spectrum or an error-rate curve without leaving the terminal's
//! neighborhood. A hand-rolled renderer keeps the output deterministic
//! (fixed palette, fixed geometry, fixed float formatting) and avoids
//! pulling a rasterizer into a numerics workspace for four static figures.

use std::fmt::Write as _;

/// Stroke palette applied to curves in order. Chosen for contrast on a
/// white background and distinguishability in grayscale prints.
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 64.0;

/// One plotted curve: consecutive finite points are joined; non-finite
/// samples (and non-positive ones on a log axis) split the polyline.
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Curve {
    pub fn new(label: &str, points: Vec<(f64, f64)>) -> Self {
        Curve {
            label: label.to_string(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(label: &str, points: Vec<(f64, f64)>) -> Self {
        Curve {
            label: label.to_string(),
            points,
            dashed: true,
        }
    }
}

/// A complete chart: axes, grid, curves, legend.
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Logarithmic y axis (used for error-rate curves). Points with
    /// non-positive y are dropped.
    pub log_y: bool,
    pub curves: Vec<Curve>,
    /// Optional explicit y range; data range otherwise.
    pub y_range: Option<(f64, f64)>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Chart {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_y: false,
            curves: Vec::new(),
            y_range: None,
        }
    }

    fn usable(&self, p: (f64, f64)) -> bool {
        p.0.is_finite() && p.1.is_finite() && (!self.log_y || p.1 > 0.0)
    }

    fn y_value(&self, y: f64) -> f64 {
        if self.log_y {
            y.log10()
        } else {
            y
        }
    }

    /// Render the chart to an SVG document string.
    pub fn render(&self) -> String {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for c in &self.curves {
            for &p in c.points.iter().filter(|&&p| self.usable(p)) {
                xs.push(p.0);
                ys.push(self.y_value(p.1));
            }
        }
        let (x_min, x_max) = padded_range(&xs);
        let (y_min, y_max) = match self.y_range {
            Some((lo, hi)) => (self.y_value(lo), self.y_value(hi)),
            None => padded_range(&ys),
        };
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let to_px = |x: f64, y: f64| -> (f64, f64) {
            let px = MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
            let py = MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;
            (px, py)
        };

        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"Helvetica, Arial, sans-serif\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );

        // Grid and ticks.
        let x_ticks = linear_ticks(x_min, x_max);
        let y_ticks = if self.log_y {
            decade_ticks(y_min, y_max)
        } else {
            linear_ticks(y_min, y_max)
        };
        for &(v, ref label) in &x_ticks {
            let (px, _) = to_px(v, y_min);
            let _ = write!(
                svg,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
                 stroke=\"#ddd\" stroke-width=\"1\"/>\n\
                 <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\">{label}</text>\n",
                MARGIN_TOP,
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 18.0,
            );
        }
        for &(v, ref label) in &y_ticks {
            let (_, py) = to_px(x_min, v);
            let _ = write!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" \
                 stroke=\"#ddd\" stroke-width=\"1\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"12\">{label}</text>\n",
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w,
                MARGIN_LEFT - 8.0,
                py + 4.0,
            );
        }

        // Frame.
        let _ = write!(
            svg,
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" \
             fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n"
        );

        // Curves, clipped to the frame.
        let _ = write!(
            svg,
            "<clipPath id=\"plot\"><rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" \
             width=\"{plot_w:.2}\" height=\"{plot_h:.2}\"/></clipPath>\n\
             <g clip-path=\"url(#plot)\">\n"
        );
        for (i, curve) in self.curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let dash = if curve.dashed {
                " stroke-dasharray=\"7,5\""
            } else {
                ""
            };
            // Split at unusable points so gaps stay visible.
            let mut segment: Vec<(f64, f64)> = Vec::new();
            let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
            for &p in &curve.points {
                if self.usable(p) {
                    segment.push(to_px(p.0, self.y_value(p.1)));
                } else if !segment.is_empty() {
                    segments.push(std::mem::take(&mut segment));
                }
            }
            if !segment.is_empty() {
                segments.push(segment);
            }
            for seg in segments {
                if seg.len() == 1 {
                    let _ = write!(
                        svg,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                        seg[0].0, seg[0].1
                    );
                    continue;
                }
                let mut points = String::new();
                for (px, py) in seg {
                    let _ = write!(points, "{px:.2},{py:.2} ");
                }
                let _ = write!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                     stroke-width=\"1.6\"{dash}/>\n",
                    points.trim_end()
                );
            }
        }
        svg.push_str("</g>\n");

        // Legend in the right margin.
        let legend_x = MARGIN_LEFT + plot_w + 16.0;
        for (i, curve) in self.curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = MARGIN_TOP + 14.0 + i as f64 * 22.0;
            let dash = if curve.dashed {
                " stroke-dasharray=\"7,5\""
            } else {
                ""
            };
            let _ = write!(
                svg,
                "<line x1=\"{legend_x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"{color}\" stroke-width=\"2\"{dash}/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\">{}</text>\n",
                legend_x + 26.0,
                legend_x + 34.0,
                y + 4.0,
                escape(&curve.label)
            );
        }

        // Axis labels.
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = write!(
            svg,
            "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\" \
             transform=\"rotate(-90 20 {:.2})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Data range padded by 2% on each side; degenerate ranges widened so the
/// mapping stays finite.
fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.02 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Major ticks at a "nice" step (1, 2 or 5 times a power of ten), aiming
/// for six to eight labels.
fn linear_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let span = hi - lo;
    let raw_step = span / 6.0;
    let mag = 10f64.powf(raw_step.log10().floor());
    let norm = raw_step / mag;
    let step = if norm <= 1.0 {
        mag
    } else if norm <= 2.0 {
        2.0 * mag
    } else if norm <= 5.0 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let decimals = (-(step.log10().floor())).max(0.0) as usize;
    let mut ticks = Vec::new();
    let mut k = (lo / step).ceil() as i64;
    while (k as f64) * step <= hi + 1e-9 * span {
        let v = k as f64 * step;
        ticks.push((v, format!("{v:.decimals$}")));
        k += 1;
    }
    ticks
}

/// Decade ticks for a log axis over log10-transformed bounds.
fn decade_ticks(lo_log: f64, hi_log: f64) -> Vec<(f64, String)> {
    let mut ticks = Vec::new();
    let mut e = lo_log.ceil() as i64;
    while (e as f64) <= hi_log + 1e-9 {
        ticks.push((e as f64, format!("1e{e}")));
        e += 1;
    }
    ticks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_renders_curves_and_legend() {
        let mut chart = Chart::new("Spectra", "frequency (MHz)", "PSD (dBr)");
        chart.curves.push(Curve::new(
            "alpha",
            vec![(-1.0, -10.0), (0.0, 0.0), (1.0, -10.0)],
        ));
        chart
            .curves
            .push(Curve::dashed("mask", vec![(-1.0, -5.0), (1.0, -5.0)]));
        let svg = chart.render();
        assert!(svg.starts_with("<svg "), "not an svg document");
        assert!(svg.contains("<polyline"), "no polylines rendered");
        assert!(svg.contains("alpha") && svg.contains("mask"), "legend labels missing");
        assert!(svg.contains("stroke-dasharray"), "dashed style missing");
        assert!(svg.ends_with("</svg>\n"), "document not closed");
    }

    #[test]
    fn log_axis_drops_nonpositive_points_and_uses_decades() {
        let mut chart = Chart::new("SER", "SNR (dB)", "symbol error rate");
        chart.log_y = true;
        chart.curves.push(Curve::new(
            "serie",
            vec![(0.0, 1e-1), (2.0, 1e-3), (4.0, 0.0)],
        ));
        let svg = chart.render();
        assert!(svg.contains("1e-2"), "decade tick missing:\n{svg}");
        // The zero sample must not produce a coordinate (log of 0).
        assert!(!svg.contains("NaN") && !svg.contains("inf"), "bad coordinates");
    }

    #[test]
    fn ticks_are_round_numbers() {
        let ticks = linear_ticks(-57.3, 3.2);
        assert!(!ticks.is_empty());
        for (v, _) in &ticks {
            let r = v / 10.0;
            assert!(
                (r - r.round()).abs() < 1e-9,
                "tick {v} not a multiple of 10 for this span"
            );
        }
    }

    #[test]
    fn degenerate_range_is_widened() {
        let (lo, hi) = padded_range(&[5.0, 5.0]);
        assert!(hi > lo, "range not widened");
    }
}
