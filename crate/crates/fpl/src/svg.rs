//! Minimal, byte-deterministic SVG line plots and heatmaps.

use std::fmt::Write as _;

use anyhow::{bail, Result};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        W / 2.0,
        escape(title)
    );
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(y_label)
    );
}

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

pub fn line_plot(plot: &LinePlot) -> Result<String> {
    let tx = |v: f64| if plot.log_x { v.log10() } else { v };
    let ty = |v: f64| if plot.log_y { v.log10() } else { v };
    let keep = |&(x, y): &(f64, f64)| {
        x.is_finite() && y.is_finite() && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0)
    };
    if plot.series.is_empty() || plot.series.iter().all(|s| !s.points.iter().any(keep)) {
        bail!("plot '{}' has no finite points", plot.title);
    }
    let pts = || plot.series.iter().flat_map(|s| s.points.iter().copied().filter(keep));
    let (x0, x1) = range(pts().map(|p| tx(p.0))).expect("checked non-empty");
    let (y0, y1) = range(pts().map(|p| ty(p.1))).expect("checked non-empty");
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (ty(y) - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, &plot.title);
    let _ = writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            TOP + ph + 16.0,
            fmt_tick(xv, plot.log_x)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            py + 4.0,
            fmt_tick(yv, plot.log_y)
        );
    }
    axis_labels(&mut out, &plot.x_label, &plot.y_label);
    for (i, s) in plot.series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for p in &s.points {
            if keep(p) {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(p.0), sy(p.1));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"/>",
            d.trim_end()
        );
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 10.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            lx + 18.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            lx + 24.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    /// `values[row][column]`; NaN cells are drawn grey.
    pub values: Vec<Vec<f64>>,
}

/// Blue (low) to red (high).
pub fn heat_colour(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    ((255.0 * t).round() as u8, 60, (255.0 * (1.0 - t)).round() as u8)
}

pub fn heatmap(map: &Heatmap) -> Result<String> {
    if map.rows.is_empty() || map.columns.is_empty() {
        bail!("heatmap '{}' is empty", map.title);
    }
    if map.values.len() != map.rows.len() || map.values.iter().any(|r| r.len() != map.columns.len()) {
        bail!("heatmap '{}' values do not match its row/column labels", map.title);
    }
    let (lo, hi) = match range(map.values.iter().flatten().copied().filter(|v| v.is_finite())) {
        Some(r) => r,
        None => bail!("heatmap '{}' has no finite values", map.title),
    };
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let cw = pw / map.columns.len() as f64;
    let ch = ph / map.rows.len() as f64;
    let mut out = String::new();
    header(&mut out, &map.title);
    for (r, row) in map.values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let fill = if v.is_finite() {
                let (red, g, b) = heat_colour((v - lo) / (hi - lo));
                format!("#{red:02x}{g:02x}{b:02x}")
            } else {
                "#bbbbbb".to_string()
            };
            let _ = writeln!(
                out,
                "<rect class=\"cell\" data-row=\"{r}\" data-col=\"{c}\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
                LEFT + c as f64 * cw,
                TOP + r as f64 * ch,
                cw,
                ch
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            TOP + (r as f64 + 0.5) * ch + 4.0,
            escape(&map.rows[r])
        );
    }
    let stride = map.columns.len().div_ceil(8).max(1);
    for c in (0..map.columns.len()).step_by(stride) {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            LEFT + (c as f64 + 0.5) * cw,
            TOP + ph + 16.0,
            escape(&map.columns[c])
        );
    }
    axis_labels(&mut out, &map.x_label, &map.y_label);
    // colour bar with its numeric range
    let bx = W - RIGHT + 20.0;
    for i in 0..20 {
        let t = 1.0 - i as f64 / 19.0;
        let (red, g, b) = heat_colour(t);
        let _ = writeln!(
            out,
            "<rect x=\"{bx:.1}\" y=\"{:.2}\" width=\"16\" height=\"{:.2}\" fill=\"#{red:02x}{g:02x}{b:02x}\"/>",
            TOP + i as f64 * ph / 20.0,
            ph / 20.0
        );
    }
    let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>", bx + 22.0, TOP + 10.0, fmt_tick(hi, false));
    let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>", bx + 22.0, TOP + ph, fmt_tick(lo, false));
    let _ = writeln!(
        out,
        "<text class=\"colour-range\" x=\"{bx:.1}\" y=\"{:.1}\">range [{}, {}]</text>",
        TOP + ph + 16.0,
        fmt_tick(lo, false),
        fmt_tick(hi, false)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> LinePlot {
        LinePlot {
            title: "t".into(),
            x_label: "epoch".into(),
            y_label: "Delta_F".into(),
            log_x: false,
            log_y: true,
            series: vec![Series {
                name: "k=1".into(),
                points: vec![(0.0, 1.0), (1.0, 0.5), (2.0, f64::NAN), (3.0, 0.1)],
            }],
        }
    }

    #[test]
    fn deterministic_and_gapped() {
        let a = line_plot(&demo()).unwrap();
        assert_eq!(a, line_plot(&demo()).unwrap());
        assert!(a.contains("<path d=\"M"));
        assert_eq!(a.matches(" M").count() + a.matches("\"M").count(), 2);
    }

    #[test]
    fn empty_series_rejected() {
        let mut p = demo();
        p.series[0].points.clear();
        assert!(line_plot(&p).is_err());
        p.series.clear();
        assert!(line_plot(&p).is_err());
    }

    #[test]
    fn heatmap_shape_checked() {
        let m = Heatmap {
            title: "h".into(),
            x_label: "epoch".into(),
            y_label: "".into(),
            columns: vec!["0".into(), "1".into()],
            rows: vec!["a".into()],
            values: vec![vec![1.0]],
        };
        assert!(heatmap(&m).is_err());
    }
}
