//! Flat-file emitters: CSV tables, SVG line plots and SVG heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use crate::observables::{HusimiGrid, SeriesTable};

use super::CliError;

/// CSV number format: 17 significant digits, locale independent.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_float).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `tau,<columns...>`.
pub fn table_csv(table: &SeriesTable) -> String {
    let mut header = vec!["tau"];
    header.extend(table.columns.iter().map(String::as_str));
    csv_string(
        &header,
        table.tau.iter().zip(&table.rows).map(|(&t, r)| {
            let mut row = Vec::with_capacity(r.len() + 1);
            row.push(t);
            row.extend_from_slice(r);
            row
        }),
    )
}

/// Long-format Husimi grid: `x,y,q`, rows ordered by `y` then `x`.
pub fn husimi_csv(grid: &HusimiGrid) -> String {
    csv_string(
        &["x", "y", "q"],
        grid.y_axis.iter().enumerate().flat_map(|(iy, &y)| {
            grid.x_axis
                .iter()
                .enumerate()
                .map(move |(ix, &x)| vec![x, y, grid.values[iy][ix]])
        }),
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct Line<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Polyline plot of one or more series sharing axes. `y_range` fixes the
/// vertical extent; otherwise it is fitted to the data.
pub fn line_plot_svg(title: &str, x_label: &str, lines: &[Line], y_range: Option<(f64, f64)>) -> String {
    let (x0, x1) = data_range(lines.iter().flat_map(|l| l.x.iter().copied()));
    let (y0, y1) = y_range.unwrap_or_else(|| data_range(lines.iter().flat_map(|l| l.y.iter().copied())));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(xv),
            HEIGHT - MARGIN_B + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    for (i, line) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (&x, &y) in line.x.iter().zip(line.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            points.trim_end()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            MARGIN_L + 8.0,
            MARGIN_T + 16.0 + 14.0 * i as f64,
            escape(line.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let r = format!("{v:.3}");
    let r = r.trim_end_matches('0').trim_end_matches('.');
    if r == "-0" {
        "0".to_string()
    } else {
        r.to_string()
    }
}

/// Anchor colors of the heatmap scale, evenly spaced from low to high.
pub const COLORMAP_ANCHORS: [[u8; 3]; 5] = [
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
];

/// 256-entry lookup table linearly interpolated between
/// [`COLORMAP_ANCHORS`].
pub fn colormap_lut() -> [[u8; 3]; 256] {
    let segments = (COLORMAP_ANCHORS.len() - 1) as f64;
    std::array::from_fn(|i| {
        let pos = i as f64 / 255.0 * segments;
        let k = (pos.floor() as usize).min(COLORMAP_ANCHORS.len() - 2);
        let frac = pos - k as f64;
        let (a, b) = (COLORMAP_ANCHORS[k], COLORMAP_ANCHORS[k + 1]);
        std::array::from_fn(|c| (a[c] as f64 + frac * (b[c] as f64 - a[c] as f64)).round() as u8)
    })
}

/// Grid rendered as one rect per cell, colored by the LUT index of the
/// value scaled to `[min, max]` of the grid.
pub fn heatmap_svg(title: &str, grid: &HusimiGrid) -> String {
    let lut = colormap_lut();
    let nx = grid.x_axis.len();
    let ny = grid.y_axis.len();
    let (lo, hi) = data_range(grid.values.iter().flatten().copied());
    let side = 400.0;
    let cw = side / nx as f64;
    let ch = side / ny as f64;
    let (ox, oy) = (MARGIN_L, MARGIN_T);

    let mut s = String::new();
    let total_w = ox + side + 80.0;
    let total_h = oy + side + MARGIN_B;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}" font-family="sans-serif" font-size="12" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        ox + side / 2.0,
        escape(title)
    );
    for (iy, row) in grid.values.iter().enumerate() {
        // y grows upward
        let y = oy + side - (iy + 1) as f64 * ch;
        for (ix, &v) in row.iter().enumerate() {
            let idx = (((v - lo) / (hi - lo)) * 255.0).round().clamp(0.0, 255.0) as usize;
            let [r, g, b] = lut[idx];
            let _ = writeln!(
                s,
                r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                ox + ix as f64 * cw,
                y,
                cw + 0.01,
                ch + 0.01
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{ox}" y="{oy}" width="{side}" height="{side}" fill="none" stroke="black"/>"#
    );
    let x_ext = (grid.x_axis[0], grid.x_axis[nx - 1]);
    let y_ext = (grid.y_axis[0], grid.y_axis[ny - 1]);
    let _ = writeln!(
        s,
        r#"<text x="{ox}" y="{:.1}">{}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
        oy + side + 16.0,
        tick(x_ext.0),
        ox + side,
        oy + side + 16.0,
        tick(x_ext.1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
        ox - 6.0,
        oy + side,
        tick(y_ext.0),
        ox - 6.0,
        oy + 10.0,
        tick(y_ext.1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Re beta</text><text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">Im beta</text>"#,
        ox + side / 2.0,
        oy + side + 36.0,
        oy + side / 2.0,
        oy + side / 2.0
    );
    // color bar
    let bx = ox + side + 20.0;
    for k in 0..64 {
        let [r, g, b] = lut[k * 255 / 63];
        let _ = writeln!(
            s,
            r##"<rect x="{bx}" y="{:.3}" width="16" height="{:.3}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
            oy + side - (k + 1) as f64 * side / 64.0,
            side / 64.0 + 0.01
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">{}</text><text x="{:.1}" y="{:.1}">{}</text>"#,
        bx + 20.0,
        oy + side,
        tick(lo),
        bx + 20.0,
        oy + 10.0,
        tick(hi)
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 0.0, 123456.789] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(&["tau", "P"], vec![vec![0.0, 1.0], vec![0.5, 0.25]]);
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "tau,P");
        assert_eq!(lines.len(), 3);
        assert!(s.ends_with('\n') && !s.contains('\r'));
    }

    #[test]
    fn lut_endpoints() {
        let lut = colormap_lut();
        assert_eq!(lut[0], COLORMAP_ANCHORS[0]);
        assert_eq!(lut[255], COLORMAP_ANCHORS[4]);
        assert_eq!(lut.len(), 256);
    }

    #[test]
    fn line_plot_is_svg() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 0.5, 1.0];
        let svg = line_plot_svg("P <2>", "tau", &[Line { label: "P2", x: &x, y: &y }], Some((0.0, 1.0)));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("P &lt;2&gt;"));
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let x = [0.0, 1.0];
        let y = [2.0, 2.0];
        let svg = line_plot_svg("flat", "tau", &[Line { label: "s", x: &x, y: &y }], None);
        assert!(!svg.contains("NaN"));
    }
}
