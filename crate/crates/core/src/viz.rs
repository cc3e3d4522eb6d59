//! Static figures: cross-attention heatmaps (PNG) and result plots (SVG).

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ResultRow;
use crate::model::RegionAttention;

const CELL: u32 = 24;

/// Numeric weights behind a heatmap; the figure is rendered from this alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapWeights {
    pub sample_id: String,
    pub attention: RegionAttention,
}

impl HeatmapWeights {
    /// Rows of the heatmap: every (layer, head) pair, then the overall mean.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = self
            .attention
            .weights
            .iter()
            .flat_map(|layer| layer.iter().cloned())
            .collect();
        rows.push(self.attention.mean.clone());
        rows
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

fn shade(w: f64, max: f64) -> Rgb<u8> {
    let t = if max > 0.0 { (w / max).clamp(0.0, 1.0) } else { 0.0 };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    Rgb([lerp(255.0, 170.0), lerp(255.0, 20.0), lerp(255.0, 30.0)])
}

/// One cell per (row, region), shaded by weight relative to the grid maximum.
pub fn render_heatmap(weights: &HeatmapWeights) -> Result<RgbImage> {
    let grid = weights.grid();
    let cols = weights.attention.region_ids.len() as u32;
    if cols == 0 {
        return Err(Error::Contract("no image regions to draw".into()));
    }
    let rows = grid.len() as u32;
    let max = grid.iter().flatten().cloned().fold(0.0, f64::max);
    let mut img = RgbImage::from_pixel(cols * CELL, rows * CELL + 2, Rgb([255, 255, 255]));
    for (r, row) in grid.iter().enumerate() {
        // the mean row sits below a thin rule
        let y0 = r as u32 * CELL + if r + 1 == grid.len() { 2 } else { 0 };
        for (c, &w) in row.iter().enumerate() {
            let colour = shade(w, max);
            for dy in 1..CELL - 1 {
                for dx in 1..CELL - 1 {
                    img.put_pixel(c as u32 * CELL + dx, y0 + dy, colour);
                }
            }
        }
    }
    Ok(img)
}

pub fn heatmap_png_bytes(weights: &HeatmapWeights) -> Result<Vec<u8>> {
    let img = render_heatmap(weights)?;
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Contract(format!("png encoding failed: {e}")))?;
    Ok(out.into_inner())
}

pub fn write_heatmap_png(path: &Path, weights: &HeatmapWeights) -> Result<()> {
    fs::write(path, heatmap_png_bytes(weights)?)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of test accuracy and macro-F1 per row, in row order.
pub fn plot_rows_svg(rows: &[ResultRow], title: &str) -> String {
    let (w, h) = (640.0, 360.0);
    let (left, right, top, bottom) = (60.0, 20.0, 40.0, 90.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let n = rows.len().max(1);
    let x = |i: usize| {
        if n == 1 {
            left + pw / 2.0
        } else {
            left + pw * i as f64 / (n - 1) as f64
        }
    };
    let y = |v: f64| top + ph * (1.0 - v.clamp(0.0, 1.0));
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        escape(title)
    );
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        s.push_str(&format!(
            "<line x1=\"{left}\" x2=\"{}\" y1=\"{y:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{v:.1}</text>\n",
            w - right,
            left - 6.0,
            y(v) + 4.0,
            y = y(v)
        ));
    }
    for (i, r) in rows.iter().enumerate() {
        s.push_str(&format!(
            "<text transform=\"translate({:.1},{:.1}) rotate(35)\">{}</text>\n",
            x(i),
            top + ph + 14.0,
            escape(&r.name)
        ));
    }
    type Series = (&'static str, &'static str, fn(&ResultRow) -> f64);
    let series: [Series; 2] = [
        ("test accuracy", "#1f77b4", |r| r.test_accuracy),
        ("test macro-F1", "#d62728", |r| r.test_macro_f1),
    ];
    for (k, (label, colour, get)) in series.iter().enumerate() {
        let points: Vec<String> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{:.1},{:.1}", x(i), y(get(r))))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        for p in &points {
            let (px, py) = p.split_once(',').expect("formatted point");
            s.push_str(&format!(
                "<circle cx=\"{px}\" cy=\"{py}\" r=\"3\" fill=\"{colour}\"/>\n"
            ));
        }
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{colour}\">{label}</text>\n",
            left + 10.0 + 130.0 * k as f64,
            top - 6.0
        ));
    }
    s.push_str("</svg>\n");
    s
}
