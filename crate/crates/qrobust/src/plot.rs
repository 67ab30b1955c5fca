//! Small SVG plotter for line charts and heatmaps.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Vertical reference lines `(x, label)`.
    pub markers: Vec<(f64, String)>,
    pub y_range: Option<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(title));
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str, plot_w: f64, plot_h: f64) {
    let (x0, y0) = (LEFT, TOP + plot_h);
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = x0 + f * plot_w;
        let py = y0 - f * plot_h;
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, x.0 + f * (x.1 - x.0));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, x0 - 6.0, py + 4.0, y.0 + f * (y.1 - y.0));
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, x0 + plot_w / 2.0, HEIGHT - 12.0, esc(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        esc(y_label)
    );
}

impl LineChart {
    pub fn to_svg(&self) -> String {
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let xr = range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).chain(self.markers.iter().map(|m| m.0)));
        let yr = self.y_range.unwrap_or_else(|| range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1))));
        let px = |x: f64| LEFT + (x - xr.0) / (xr.1 - xr.0) * plot_w;
        let py = |y: f64| TOP + plot_h - (y - yr.0) / (yr.1 - yr.0) * plot_h;

        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, xr, yr, &self.x_label, &self.y_label, plot_w, plot_h);
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#, pts.join(" "));
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = WIDTH - RIGHT + 12.0;
            let _ = writeln!(out, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 24.0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 30.0, ly + 4.0, esc(&s.name));
        }
        for (x, label) in &self.markers {
            let _ = writeln!(
                out,
                r#"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}" stroke="gray" stroke-dasharray="2 3"/>"#,
                px(*x),
                TOP + plot_h
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.1}" fill="gray">{}</text>"#, px(*x) + 4.0, TOP + 12.0, esc(label));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
}

fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] = [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let s = t * (STOPS.len() - 1) as f64;
    let i = (s.floor() as usize).min(STOPS.len() - 2);
    let f = s - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |u: f64, v: f64| (u + f * (v - u)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

impl Heatmap {
    pub fn to_svg(&self) -> String {
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let (nx, ny) = (self.xs.len().max(1), self.ys.len().max(1));
        let vr = range(self.values.iter().copied());
        let xr = range(self.xs.iter().copied());
        let yr = range(self.ys.iter().copied());
        let (cw, ch) = (plot_w / nx as f64, plot_h / ny as f64);

        let mut out = String::new();
        header(&mut out, &self.title);
        for iy in 0..self.ys.len() {
            for ix in 0..self.xs.len() {
                let v = self.values.get(iy * self.xs.len() + ix).copied().unwrap_or(f64::NAN);
                let fill = color((v - vr.0) / (vr.1 - vr.0));
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"><title>{v}</title></rect>"#,
                    LEFT + ix as f64 * cw,
                    TOP + plot_h - (iy + 1) as f64 * ch,
                    cw + 0.3,
                    ch + 0.3
                );
            }
        }
        axes(&mut out, xr, yr, &self.x_label, &self.y_label, plot_w, plot_h);
        let bx = WIDTH - RIGHT + 24.0;
        for i in 0..20 {
            let f = i as f64 / 19.0;
            let _ = writeln!(
                out,
                r#"<rect x="{bx:.1}" y="{:.2}" width="18" height="{:.2}" fill="{}"/>"#,
                TOP + plot_h - (i + 1) as f64 * plot_h / 20.0,
                plot_h / 20.0 + 0.3,
                color(f)
            );
        }
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{:.3}</text>"#, bx + 24.0, TOP + plot_h, vr.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{:.3}</text>"#, bx + 24.0, TOP + 10.0, vr.1);
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_has_one_polyline_per_series() {
        let chart = LineChart {
            title: "t".into(),
            series: vec![
                Series { name: "a".into(), points: vec![(0.0, 1.0), (1.0, 0.5)], dashed: false },
                Series { name: "b<c".into(), points: vec![(0.0, 0.2), (1.0, 0.1)], dashed: true },
            ],
            markers: vec![(0.5, "m".into())],
            ..Default::default()
        };
        let svg = chart.to_svg();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn heatmap_cells() {
        let h = Heatmap { xs: vec![0.0, 1.0], ys: vec![0.0, 0.5, 1.0], values: vec![0.0; 6], ..Default::default() };
        assert_eq!(h.to_svg().matches("<title>").count(), 6);
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
    }
}
