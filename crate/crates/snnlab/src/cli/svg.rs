//! Minimal native SVG line charts: axes, tick labels, one polyline per
//! series, optional shaded band, legend, and the resolved run config
//! embedded in a desc element.

use crate::error::{Error, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// (x, y) points in data coordinates.
    pub points: Vec<(f64, f64)>,
    /// Optional (x, y_low, y_high) band, e.g. mean +/- std over seeds.
    pub band: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Self-description embedded in the file (config JSON and the like).
    pub metadata: String,
}

const W: f64 = 820.0;
const H: f64 = 520.0;
const ML: f64 = 72.0;
const MR: f64 = 24.0;
const MT: f64 = 44.0;
const MB: f64 = 56.0;

fn fmt(v: f64) -> String {
    // compact fixed/scientific hybrid for coordinates and tick labels
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 10000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| span / s <= 6.0)
        .unwrap_or(mag * 10.0);
    let start = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut v = start;
    while v <= hi + step * 1e-9 {
        ticks.push(v);
        v += step;
    }
    ticks
}

/// Render the chart to a standalone SVG document.
pub fn render(chart: &Chart) -> Result<String> {
    if chart.series.is_empty() || chart.series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Parameter("svg chart has no data".into()));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in &chart.series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xs.push(x);
                ys.push(y);
            }
        }
        for &(x, lo, hi) in &s.band {
            if x.is_finite() && lo.is_finite() && hi.is_finite() {
                xs.push(x);
                ys.push(lo);
                ys.push(hi);
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::Parameter("svg chart has no finite data".into()));
    }
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let to_px = |x: f64, y: f64| {
        let px = ML + (x - x_min) / (x_max - x_min) * (W - ML - MR);
        let py = H - MB - (y - y_min) / (y_max - y_min) * (H - MT - MB);
        (px, py)
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    out.push_str(&format!("<desc>{}</desc>\n", escape(&chart.metadata)));
    out.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        escape(&chart.title)
    ));

    // axes
    out.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    out.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    for tx in nice_ticks(x_min, x_max) {
        let (px, _) = to_px(tx, y_min);
        out.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{0}\" x2=\"{px}\" y2=\"{1}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            H - MB + 20.0,
            fmt(tx)
        ));
    }
    for ty in nice_ticks(y_min, y_max) {
        let (_, py) = to_px(x_min, ty);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{py}\" x2=\"{ML}\" y2=\"{py}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            ML - 9.0,
            py + 4.0,
            fmt(ty)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0,
        escape(&chart.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
        (MT + H - MB) / 2.0,
        escape(&chart.y_label)
    ));

    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.band.len() >= 2 {
            let mut d = String::from("M");
            for &(x, lo, _) in &s.band {
                let (px, py) = to_px(x, lo.clamp(y_min, y_max));
                d.push_str(&format!(" {} {}", fmt(px), fmt(py)));
            }
            for &(x, _, hi) in s.band.iter().rev() {
                let (px, py) = to_px(x, hi.clamp(y_min, y_max));
                d.push_str(&format!(" L {} {}", fmt(px), fmt(py)));
            }
            d.push('Z');
            out.push_str(&format!(
                "<path d=\"{d}\" fill=\"{color}\" opacity=\"0.15\" stroke=\"none\"/>\n"
            ));
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| {
                let (px, py) = to_px(x, y);
                format!("{},{}", fmt(px), fmt(py))
            })
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            pts.join(" ")
        ));
        // legend entry
        let ly = MT + 8.0 + 18.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            W - MR - 150.0,
            W - MR - 124.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            W - MR - 118.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        // degenerate span: open a unit window around the value
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}

pub fn write_svg(path: &std::path::Path, chart: &Chart) -> Result<()> {
    let svg = render(chart)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path.display().to_string(), e))
}
