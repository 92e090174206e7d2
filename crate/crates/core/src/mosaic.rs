//! Mosaic displays for two-way tables, with an optional confidence band on
//! 2×2 tables, rendered as standalone SVG.
//!
//! Layout happens in the unit square: columns split the width in proportion
//! to their totals and each column is split vertically in proportion to its
//! cells. Rows and columns are both drawn in order of decreasing total (ties
//! keep table order), so the category with more observations always comes
//! first. Pixel geometry, including the gutter between tiles, is applied only
//! by [`render_svg`].
//!
//! ```
//! use chisq::mosaic::{layout, render_svg};
//! use chisq::tables::ContingencyTable;
//!
//! let t = ContingencyTable::parse(",C,D\nA,75,50\nB,50,50")?;
//! let scene = layout(&t, 0.05, true)?;
//! assert!(scene.ci_band.as_ref().unwrap().boundary_inside_band());
//! assert!(render_svg(&scene).starts_with("<?xml"));
//! # Ok::<(), chisq::Error>(())
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::distributions::{normal_pdf, normal_quantile};
use crate::engine::residual_table;
use crate::error::{domain, Error, Result};
use crate::tables::ContingencyTable;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_CANVAS: f64 = 640.0;
pub const DEFAULT_MARGIN: f64 = 60.0;
/// Width reserved to the right of the plot for the legend.
pub const LEGEND_WIDTH: f64 = 90.0;
/// Gap between adjacent tiles as a fraction of the smaller canvas side.
pub const GUTTER_FRACTION: f64 = 0.02;
/// Residual breakpoints of the diverging color scale.
pub const RESIDUAL_BREAKS: [f64; 5] = [-4.0, -2.0, 0.0, 2.0, 4.0];
const BREAK_COLORS: [Rgb; 5] = [
    Rgb(33, 102, 172),
    Rgb(146, 197, 222),
    Rgb(255, 255, 255),
    Rgb(244, 165, 130),
    Rgb(178, 24, 43),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

/// Maps a Pearson residual onto the blue–white–red scale, clamping beyond ±4.
pub fn residual_color(residual: f64) -> Rgb {
    let r = if residual.is_nan() { 0.0 } else { residual.clamp(RESIDUAL_BREAKS[0], RESIDUAL_BREAKS[4]) };
    let seg = RESIDUAL_BREAKS
        .windows(2)
        .position(|w| r <= w[1])
        .unwrap_or(RESIDUAL_BREAKS.len() - 2);
    let (lo, hi) = (RESIDUAL_BREAKS[seg], RESIDUAL_BREAKS[seg + 1]);
    let t = (r - lo) / (hi - lo);
    let (a, b) = (BREAK_COLORS[seg], BREAK_COLORS[seg + 1]);
    let mix = |x: u8, y: u8| (f64::from(x) + t * (f64::from(y) - f64::from(x))).round() as u8;
    Rgb(mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// How the band half-width is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BandFormula {
    /// `z_{1-α/2} √(p̂(1-p̂)/N)`.
    #[default]
    Wald,
    /// `φ(z_{1-α/2}) √(p̂(1-p̂)N)`, the formula taken at face value. Kept for
    /// comparison only; it grows with `N`.
    Literal,
}

impl FromStr for BandFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wald" => Ok(BandFormula::Wald),
            "literal" => Ok(BandFormula::Literal),
            _ => domain(format!("unknown band formula {s:?}; expected wald or literal")),
        }
    }
}

/// Whether to draw the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandMode {
    /// Draw it when the table is 2×2.
    #[default]
    Auto,
    On,
    Off,
}

/// The pooled proportion of `cell`'s row, `row_total / N`, and `N`.
///
/// Only the row enters the estimate: under independence the row
/// probability is estimated on all of the data.
pub fn estimate_pooled_probability(t: &ContingencyTable, cell: (usize, usize)) -> Result<(f64, u64)> {
    require_two_by_two(t)?;
    let (row, col) = cell;
    if row >= 2 || col >= 2 {
        return domain(format!("cell ({row}, {col}) is outside a 2x2 table"));
    }
    let n = t.grand_total();
    if n == 0 {
        return Err(Error::DegenerateMargin("table total is zero".into()));
    }
    Ok((t.margins().row_totals[row] as f64 / n as f64, n))
}

/// Half-width of the `1 - alpha` band around `p_hat`.
pub fn ci_half_width(p_hat: f64, n: u64, alpha: f64) -> Result<f64> {
    band_half_width(p_hat, n, alpha, BandFormula::Wald)
}

pub fn band_half_width(p_hat: f64, n: u64, alpha: f64, formula: BandFormula) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_hat) {
        return domain(format!("p_hat must lie in [0, 1], got {p_hat}"));
    }
    if n == 0 {
        return domain("n must be at least 1");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let var = p_hat * (1.0 - p_hat);
    Ok(match formula {
        BandFormula::Wald => z * (var / n as f64).sqrt(),
        BandFormula::Literal => normal_pdf(z) * (var * n as f64).sqrt(),
    })
}

fn require_two_by_two(t: &ContingencyTable) -> Result<()> {
    match t.shape() {
        (2, 2) => Ok(()),
        (r, c) => Err(Error::UnsupportedShape(format!(
            "the confidence band needs a 2x2 table, got {r}x{c}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MosaicConfig {
    pub alpha: f64,
    pub band: BandMode,
    pub band_formula: BandFormula,
    pub canvas: Canvas,
    /// Omitted from the SVG when `None` or empty.
    pub title: Option<String>,
}

impl Default for MosaicConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            band: BandMode::Auto,
            band_formula: BandFormula::Wald,
            canvas: Canvas::default(),
            title: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Self {
            width: DEFAULT_CANVAS,
            height: DEFAULT_CANVAS,
            margin: DEFAULT_MARGIN,
        }
    }
}

impl Canvas {
    pub fn gutter(&self) -> f64 {
        GUTTER_FRACTION * self.width.min(self.height)
    }
}

/// One cell of the display, in unit-square coordinates with `y` pointing down.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tile {
    /// Index of the cell's row in the input table.
    pub row: usize,
    pub col: usize,
    pub row_label: String,
    pub col_label: String,
    pub count: u64,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub residual: f64,
    pub fill: Rgb,
}

/// Where the first displayed row ends in one column, relative to the band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandColumn {
    pub column_index: usize,
    pub col_label: String,
    /// Height of the first displayed row within this column.
    pub boundary: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiBand {
    pub formula: BandFormula,
    pub alpha: f64,
    /// Input-table row whose pooled proportion is drawn.
    pub row: usize,
    pub p_hat: f64,
    pub n_total: u64,
    pub y_center: f64,
    pub half_width: f64,
    pub columns: Vec<BandColumn>,
}

impl CiBand {
    /// True when every column's row boundary lies within the band.
    pub fn boundary_inside_band(&self) -> bool {
        self.columns.iter().all(|c| c.inside)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendStop {
    pub residual: f64,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MosaicScene {
    pub title: Option<String>,
    pub canvas: Canvas,
    /// Input-table indices in display order.
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    pub tiles: Vec<Tile>,
    pub ci_band: Option<CiBand>,
    pub legend: Vec<LegendStop>,
}

/// Indices sorted by decreasing total; equal totals keep their order.
fn order_by_total(totals: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..totals.len()).collect();
    idx.sort_by(|&a, &b| totals[b].cmp(&totals[a]));
    idx
}

/// Lays out `t` with default canvas settings; `enable_band` requires a 2×2 table.
pub fn layout(t: &ContingencyTable, alpha: f64, enable_band: bool) -> Result<MosaicScene> {
    let config = MosaicConfig {
        alpha,
        band: if enable_band { BandMode::On } else { BandMode::Off },
        ..MosaicConfig::default()
    };
    layout_with(t, &config)
}

pub fn layout_with(t: &ContingencyTable, config: &MosaicConfig) -> Result<MosaicScene> {
    let want_band = match config.band {
        BandMode::On => {
            require_two_by_two(t)?;
            true
        }
        BandMode::Off => false,
        BandMode::Auto => t.shape() == (2, 2),
    };
    let residuals = residual_table(t)?;
    let margins = t.margins();
    let n = margins.grand_total as f64;
    let row_order = order_by_total(&margins.row_totals);
    let col_order = order_by_total(&margins.col_totals);

    let mut tiles = Vec::with_capacity(t.rows() * t.cols());
    let mut x = 0.0;
    for &c in &col_order {
        let col_total = margins.col_totals[c] as f64;
        let width = col_total / n;
        let mut y = 0.0;
        for &r in &row_order {
            let count = t.get(r, c);
            let height = count as f64 / col_total;
            let residual = residuals.residual(r, c);
            tiles.push(Tile {
                row: r,
                col: c,
                row_label: t.row_labels()[r].clone(),
                col_label: t.col_labels()[c].clone(),
                count,
                x,
                y,
                width,
                height,
                residual,
                fill: residual_color(residual),
            });
            y += height;
        }
        x += width;
    }

    let ci_band = if want_band {
        let row = row_order[0];
        let (p_hat, n_total) = estimate_pooled_probability(t, (row, 0))?;
        let half_width = band_half_width(p_hat, n_total, config.alpha, config.band_formula)?;
        let columns = col_order
            .iter()
            .map(|&c| {
                let boundary = t.get(row, c) as f64 / margins.col_totals[c] as f64;
                BandColumn {
                    column_index: c,
                    col_label: t.col_labels()[c].clone(),
                    boundary,
                    inside: (boundary - p_hat).abs() <= half_width,
                }
            })
            .collect();
        Some(CiBand {
            formula: config.band_formula,
            alpha: config.alpha,
            row,
            p_hat,
            n_total,
            y_center: p_hat,
            half_width,
            columns,
        })
    } else {
        None
    };

    let legend = RESIDUAL_BREAKS
        .iter()
        .map(|&r| LegendStop {
            residual: r,
            color: residual_color(r),
        })
        .collect();

    Ok(MosaicScene {
        title: config.title.clone().filter(|s| !s.is_empty()),
        canvas: config.canvas,
        row_order,
        col_order,
        tiles,
        ci_band,
        legend,
    })
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Pixel frame of the plot area after margins and the legend strip.
struct Frame {
    x0: f64,
    y0: f64,
    /// Plot extent left for tiles once gutters are removed.
    inner_w: f64,
    inner_h: f64,
    gutter: f64,
}

impl Frame {
    fn new(scene: &MosaicScene) -> Self {
        let c = scene.canvas;
        let gutter = c.gutter();
        let cols = scene.col_order.len() as f64;
        let rows = scene.row_order.len() as f64;
        let w = (c.width - 2.0 * c.margin - LEGEND_WIDTH).max(1.0);
        let h = (c.height - 2.0 * c.margin).max(1.0);
        Self {
            x0: c.margin,
            y0: c.margin,
            inner_w: (w - gutter * (cols - 1.0)).max(1.0),
            inner_h: (h - gutter * (rows - 1.0)).max(1.0),
            gutter,
        }
    }
}

/// Serializes a scene to SVG 1.1. Identical scenes give identical bytes.
pub fn render_svg(scene: &MosaicScene) -> String {
    let c = scene.canvas;
    let f = Frame::new(scene);
    let rows = scene.row_order.len();
    let mut s = String::new();
    // writing into a String cannot fail
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#,
        w = c.width,
        h = c.height
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{:.0}" height="{:.0}" fill="#ffffff"/>"##,
        c.width, c.height
    );
    if let Some(title) = &scene.title {
        let t = escape(title);
        let _ = writeln!(s, "<title>{t}</title>");
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16">{t}</text>"#,
            c.width / 2.0,
            c.margin / 2.0
        );
    }

    let _ = writeln!(s, r#"<g id="tiles">"#);
    for (i, tile) in scene.tiles.iter().enumerate() {
        let (ci, ri) = (i / rows, i % rows);
        let x = f.x0 + tile.x * f.inner_w + ci as f64 * f.gutter;
        let y = f.y0 + tile.y * f.inner_h + ri as f64 * f.gutter;
        let _ = writeln!(
            s,
            r##"<rect class="tile" x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="#333333" stroke-width="0.5"><title>{} / {}: {} (residual {:.3})</title></rect>"##,
            tile.width * f.inner_w,
            tile.height * f.inner_h,
            tile.fill.hex(),
            escape(&tile.row_label),
            escape(&tile.col_label),
            tile.count,
            tile.residual
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="labels">"#);
    for (ci, tile) in scene.tiles.iter().step_by(rows.max(1)).enumerate() {
        let x = f.x0 + (tile.x + tile.width / 2.0) * f.inner_w + ci as f64 * f.gutter;
        let y = c.height - c.margin + 20.0;
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle">{}</text>"#,
            escape(&tile.col_label)
        );
    }
    for (ri, tile) in scene.tiles.iter().take(rows).enumerate() {
        let y = f.y0 + (tile.y + tile.height / 2.0) * f.inner_h + ri as f64 * f.gutter;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            f.x0 - 8.0,
            escape(&tile.row_label)
        );
    }
    let _ = writeln!(s, "</g>");

    if let Some(band) = &scene.ci_band {
        // the row boundary sits in the middle of the first gutter
        let to_px = |y: f64| f.y0 + y * f.inner_h + f.gutter / 2.0;
        let top = to_px((band.y_center - band.half_width).max(0.0));
        let bottom = to_px((band.y_center + band.half_width).min(1.0));
        let x1 = f.x0;
        let x2 = f.x0 + f.inner_w + f.gutter * (scene.col_order.len() as f64 - 1.0);
        let _ = writeln!(s, r#"<g id="ci-band">"#);
        let _ = writeln!(
            s,
            r##"<rect x="{x1:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#000000" fill-opacity="0.18"/>"##,
            x2 - x1,
            bottom - top
        );
        let yc = to_px(band.y_center);
        let _ = writeln!(
            s,
            r##"<line x1="{x1:.2}" y1="{yc:.2}" x2="{x2:.2}" y2="{yc:.2}" stroke="#000000" stroke-width="1.5" stroke-dasharray="6 4"/>"##
        );
        let _ = writeln!(s, "</g>");
    }

    let lx = c.width - c.margin - LEGEND_WIDTH + 30.0;
    let swatch = 22.0;
    let _ = writeln!(s, r#"<g id="legend">"#);
    let _ = writeln!(s, r#"<text x="{lx:.2}" y="{:.2}">residual</text>"#, f.y0 - 8.0);
    for (i, stop) in scene.legend.iter().rev().enumerate() {
        let y = f.y0 + i as f64 * swatch;
        let _ = writeln!(
            s,
            r##"<rect x="{lx:.2}" y="{y:.2}" width="{swatch:.2}" height="{swatch:.2}" fill="{}" stroke="#333333" stroke-width="0.5"/>"##,
            stop.color.hex()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" dominant-baseline="middle">{}</text>"#,
            lx + swatch + 6.0,
            y + swatch / 2.0,
            if stop.residual == 0.0 { "0".to_owned() } else { format!("{:+.0}", stop.residual) }
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::independence_test;

    fn table(csv: &str) -> ContingencyTable {
        ContingencyTable::parse(csv).unwrap()
    }

    #[test]
    fn pooled_probability_examples() {
        let p = |csv: &str| estimate_pooled_probability(&table(csv), (0, 0)).unwrap();
        assert_eq!(p(",C,D\nA,50,50\nB,50,50"), (0.5, 200));
        let (p75, n) = p(",C,D\nA,75,50\nB,50,50");
        assert_eq!(n, 225);
        assert!((p75 - 125.0 / 225.0).abs() < 1e-15);
        assert!((p(",C,D\nA,200,50\nB,50,50").0 - 250.0 / 350.0).abs() < 1e-15);
        let big = table(",C,D,E\nA,1,2,3\nB,4,5,6");
        assert!(matches!(estimate_pooled_probability(&big, (0, 0)), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn half_width_examples() {
        let z = 1.959_963_984_540_054;
        assert!((ci_half_width(0.5, 200, 0.05).unwrap() - z * (0.25f64 / 200.0).sqrt()).abs() < 1e-12);
        assert!((ci_half_width(0.5, 200, 0.05).unwrap() - 0.0693).abs() < 5e-5);
        assert_eq!(ci_half_width(0.0, 10, 0.05).unwrap(), 0.0);
        assert_eq!(ci_half_width(1.0, 10, 0.05).unwrap(), 0.0);
        let p = 125.0 / 225.0;
        assert!((ci_half_width(p, 225, 0.05).unwrap() - 0.0649).abs() < 5e-5);
        assert!(ci_half_width(1.5, 10, 0.05).is_err());
        assert!(ci_half_width(0.5, 0, 0.05).is_err());
        assert!(ci_half_width(0.5, 10, 1.0).is_err());
    }

    #[test]
    fn literal_formula_grows_with_n() {
        let a = band_half_width(0.5, 100, 0.05, BandFormula::Literal).unwrap();
        let b = band_half_width(0.5, 400, 0.05, BandFormula::Literal).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!((a - normal_pdf(1.959_963_984_540_054) * 5.0).abs() < 1e-12);
    }

    #[test]
    fn colors() {
        assert_eq!(residual_color(0.0), Rgb(255, 255, 255));
        assert_eq!(residual_color(4.0), BREAK_COLORS[4]);
        assert_eq!(residual_color(9.0), BREAK_COLORS[4]);
        assert_eq!(residual_color(-2.0), BREAK_COLORS[1]);
        assert_eq!(residual_color(-100.0), BREAK_COLORS[0]);
        assert_eq!(residual_color(f64::NAN), Rgb(255, 255, 255));
        assert_eq!(Rgb(178, 24, 43).hex(), "#b2182b");
        // halfway between white and the first red stop
        assert_eq!(residual_color(1.0), Rgb(250, 210, 193));
    }

    #[test]
    fn benchmark_layout() {
        let s = layout(&table(",C,D\nA,50,50\nB,50,50"), 0.05, true).unwrap();
        assert_eq!(s.tiles.len(), 4);
        for t in &s.tiles {
            assert_eq!(t.width * t.height, 0.25);
        }
        let band = s.ci_band.unwrap();
        assert_eq!(band.y_center, 0.5);
        assert!(band.columns.iter().all(|c| c.boundary == 0.5 && c.inside));
    }

    #[test]
    fn areas_and_column_sums() {
        let t = table(",a,b,c,d\nx,3,9,1,20\ny,7,2,8,4\nz,5,5,5,5");
        let s = layout(&t, 0.05, false).unwrap();
        assert!(s.ci_band.is_none());
        let n = t.grand_total() as f64;
        for tile in &s.tiles {
            assert!((tile.width * tile.height - tile.count as f64 / n).abs() < 1e-9);
        }
        for col in s.tiles.chunks(3) {
            assert!(col.iter().all(|t| t.width == col[0].width && t.x == col[0].x));
            assert!((col.iter().map(|t| t.height).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let widths: f64 = s.tiles.chunks(3).map(|c| c[0].width).sum();
        assert!((widths - 1.0).abs() < 1e-12);
        // columns ordered by decreasing total: d (29) first, then a/b (15/16)
        assert_eq!(s.col_order, vec![3, 1, 0, 2]);
    }

    #[test]
    fn band_shape_rules() {
        let t = table(",a,b,c\nx,3,9,1\ny,7,2,8\nz,5,5,5");
        assert!(matches!(layout(&t, 0.05, true), Err(Error::UnsupportedShape(_))));
        let auto = layout_with(&t, &MosaicConfig::default()).unwrap();
        assert!(auto.ci_band.is_none());
    }

    #[test]
    fn band_agrees_with_test_on_case_tables() {
        for (v, inside) in [(50, true), (75, true), (100, false), (200, false)] {
            let t = table(&format!(",C,D\nA,{v},50\nB,50,50"));
            let (r, _) = independence_test(&t, 0.05).unwrap();
            let band = layout(&t, 0.05, true).unwrap().ci_band.unwrap();
            assert_eq!(band.boundary_inside_band(), inside, "case {v}");
            assert_eq!(band.boundary_inside_band(), !r.reject_null, "case {v}");
        }
    }

    #[test]
    fn moving_the_modified_cell_keeps_geometry() {
        let geometry = |s: &MosaicScene| {
            let tiles: Vec<_> = s
                .tiles
                .iter()
                .map(|t| (t.count, t.x, t.y, t.width, t.height, t.residual.abs(), t.fill))
                .collect();
            let band = s.ci_band.as_ref().unwrap();
            (tiles, band.y_center, band.half_width, band.boundary_inside_band())
        };
        for v in [75, 100, 200] {
            let scenes: Vec<MosaicScene> = [
                format!(",C,D\nA,{v},50\nB,50,50"),
                format!(",C,D\nA,50,{v}\nB,50,50"),
                format!(",C,D\nA,50,50\nB,{v},50"),
                format!(",C,D\nA,50,50\nB,50,{v}"),
            ]
            .iter()
            .map(|csv| layout(&table(csv), 0.05, true).unwrap())
            .collect();
            let first = geometry(&scenes[0]);
            for s in &scenes[1..] {
                assert_eq!(geometry(s), first);
            }
        }
    }

    #[test]
    fn svg_is_deterministic_and_titled_only_when_asked() {
        let t = table(",C,D\nA,75,50\nB,50,50");
        let s = layout(&t, 0.05, true).unwrap();
        let a = render_svg(&s);
        assert_eq!(a, render_svg(&s));
        assert!(!a.lines().any(|l| l.starts_with("<title>")));
        assert!(a.contains("stroke-dasharray"));
        assert!(a.contains(r#"fill-opacity="0.18""#));

        let cfg = MosaicConfig {
            title: Some("A & B".into()),
            ..MosaicConfig::default()
        };
        let titled = render_svg(&layout_with(&t, &cfg).unwrap());
        assert!(titled.contains("<title>A &amp; B</title>"));
        let empty = MosaicConfig {
            title: Some(String::new()),
            ..MosaicConfig::default()
        };
        assert_eq!(render_svg(&layout_with(&t, &empty).unwrap()), a);
    }

    #[test]
    fn three_by_four_has_twelve_tiles() {
        let t = table(",a,b,c,d\nx,3,9,1,20\ny,7,2,8,4\nz,5,5,5,5");
        let svg = render_svg(&layout(&t, 0.05, false).unwrap());
        assert_eq!(svg.matches(r#"class="tile""#).count(), 12);
        assert!(!svg.contains("ci-band"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
