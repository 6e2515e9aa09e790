//! Minimal self-contained SVG renderer for line series and histograms.
//! Plots are conveniences for eyeballing runs, never analysis artifacts.

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Optional histogram bars (x_lo, x_hi, height) drawn under the series.
    pub bars: Vec<(f64, f64, f64)>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_y: false,
            series: Vec::new(),
            bars: Vec::new(),
        }
    }

    pub fn with_series(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.to_string(),
            points,
        });
        self
    }

    pub fn with_bars(mut self, bars: Vec<(f64, f64, f64)>) -> Self {
        self.bars = bars;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    fn transform_y(&self, y: f64) -> Option<f64> {
        if self.log_y {
            if y > 0.0 {
                Some(y.log10())
            } else {
                None
            }
        } else {
            Some(y)
        }
    }

    pub fn render(&self) -> String {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for (x, y) in &s.points {
                if let Some(ty) = self.transform_y(*y) {
                    xs.push(*x);
                    ys.push(ty);
                }
            }
        }
        for (lo, hi, h) in &self.bars {
            xs.push(*lo);
            xs.push(*hi);
            if let Some(th) = self.transform_y(*h) {
                ys.push(th);
            }
            if let Some(t0) = self.transform_y(0.0) {
                ys.push(t0);
            }
        }
        if xs.is_empty() || ys.is_empty() {
            return String::from("<svg xmlns=\"http://www.w3.org/2000/svg\"/>");
        }
        let (x_min, x_max) = bounds(&xs);
        let (y_min, y_max) = bounds(&ys);
        let to_px = |x: f64, y: f64| -> (f64, f64) {
            let fx = (x - x_min) / (x_max - x_min).max(1e-300);
            let fy = (y - y_min) / (y_max - y_min).max(1e-300);
            (
                MARGIN_L + fx * (WIDTH - MARGIN_L - MARGIN_R),
                HEIGHT - MARGIN_B - fy * (HEIGHT - MARGIN_T - MARGIN_B),
            )
        };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        for (lo, hi, h) in &self.bars {
            if let Some(th) = self.transform_y(*h) {
                let (x0, y_base) = to_px(*lo, y_min.max(self.transform_y(0.0).unwrap_or(y_min)));
                let (x1, y_top) = to_px(*hi, th);
                svg.push_str(&format!(
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
                     fill=\"#c6dbef\" stroke=\"#6baed6\" stroke-width=\"0.5\"/>\n",
                    x0,
                    y_top,
                    (x1 - x0).max(0.5),
                    (y_base - y_top).max(0.0)
                ));
            }
        }

        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut path = String::new();
            let mut pen_down = false;
            for (x, y) in &s.points {
                match self.transform_y(*y) {
                    Some(ty) => {
                        let (px, py) = to_px(*x, ty);
                        path.push_str(&format!(
                            "{}{:.1},{:.1} ",
                            if pen_down { "L" } else { "M" },
                            px,
                            py
                        ));
                        pen_down = true;
                    }
                    None => pen_down = false,
                }
            }
            svg.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.4\"/>\n",
                path.trim_end(),
                color
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n",
                WIDTH - MARGIN_R - 220.0,
                MARGIN_T + 16.0 * i as f64,
                color,
                escape(&s.label)
            ));
        }

        // Frame and min/max tick labels.
        svg.push_str(&format!(
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" \
             fill=\"none\" stroke=\"black\"/>\n",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        ));
        let y_fmt = |v: f64| {
            if self.log_y {
                format!("1e{v:.1}")
            } else {
                format!("{v:.3}")
            }
        };
        svg.push_str(&format!(
            "<text x=\"{MARGIN_L}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n",
            HEIGHT - MARGIN_B + 16.0,
            x_min
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n",
            WIDTH - MARGIN_R,
            HEIGHT - MARGIN_B + 16.0,
            x_max
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            HEIGHT - MARGIN_B,
            y_fmt(y_min)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            MARGIN_T + 10.0,
            y_fmt(y_max)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            escape(&self.y_label)
        ));
        svg.push_str("</svg>\n");
        svg
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
