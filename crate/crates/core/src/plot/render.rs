use font8x8::{UnicodeFonts, BASIC_FONTS, LATIN_FONTS};

use super::layout::{LayoutConfig, NodeLayout};
use super::PlotError;
use crate::centrality::CentralityRanking;
use crate::index::CoauthorGraph;

pub const BACKGROUND: [u8; 3] = [255, 255, 255];
pub const EDGE_COLOR: [u8; 3] = [70, 70, 70];
pub const NODE_COLOR: [u8; 3] = [31, 119, 180];
/// Fill for the labelled top-ranked authors.
pub const TOP_NODE_COLOR: [u8; 3] = [214, 39, 40];
pub const LABEL_COLOR: [u8; 3] = [0, 0, 0];

/// Opacity of an edge of the given weight.
pub fn edge_alpha(weight: u32) -> f64 {
    (0.15 * f64::from(weight)).min(0.75)
}

struct Canvas {
    width: usize,
    height: usize,
    rgba: Vec<u8>,
}

impl Canvas {
    fn new(width: u32, height: u32) -> Self {
        let (width, height) = (width as usize, height as usize);
        let mut rgba = Vec::with_capacity(width * height * 4);
        for _ in 0..width * height {
            rgba.extend_from_slice(&[BACKGROUND[0], BACKGROUND[1], BACKGROUND[2], 255]);
        }
        Canvas { width, height, rgba }
    }

    fn blend(&mut self, x: i64, y: i64, color: [u8; 3], alpha: f64) {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return;
        }
        let i = (y as usize * self.width + x as usize) * 4;
        for c in 0..3 {
            let old = f64::from(self.rgba[i + c]);
            self.rgba[i + c] = (old + (f64::from(color[c]) - old) * alpha).round() as u8;
        }
    }

    /// Straight line; every covered pixel is blended once.
    fn line(&mut self, from: (f64, f64), to: (f64, f64), color: [u8; 3], alpha: f64) {
        let (x0, y0) = (from.0.round() as i64, from.1.round() as i64);
        let (x1, y1) = (to.0.round() as i64, to.1.round() as i64);
        let steps = (x1 - x0).abs().max((y1 - y0).abs());
        if steps == 0 {
            self.blend(x0, y0, color, alpha);
            return;
        }
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = (x0 as f64 + (x1 - x0) as f64 * t).round() as i64;
            let y = (y0 as f64 + (y1 - y0) as f64 * t).round() as i64;
            self.blend(x, y, color, alpha);
        }
    }

    /// Solid disc: every pixel whose centre lies within `r` of `c`.
    fn disc(&mut self, c: (f64, f64), r: f64, color: [u8; 3]) {
        let (cx, cy) = (c.0.round() as i64, c.1.round() as i64);
        let reach = r.ceil() as i64;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if ((dx * dx + dy * dy) as f64) <= r * r {
                    self.blend(cx + dx, cy + dy, color, 1.0);
                }
            }
        }
    }

    fn text(&mut self, x: i64, y: i64, text: &str, color: [u8; 3]) {
        for (i, ch) in text.chars().enumerate() {
            let glyph = BASIC_FONTS
                .get(ch)
                .or_else(|| LATIN_FONTS.get(ch))
                .or_else(|| BASIC_FONTS.get('?'))
                .unwrap_or([0; 8]);
            let gx = x + 8 * i as i64;
            for (row, bits) in glyph.iter().enumerate() {
                for col in 0..8 {
                    if bits & (1 << col) != 0 {
                        self.blend(gx + col, y + row as i64, color, 1.0);
                    }
                }
            }
        }
    }

    fn encode(self) -> Result<Vec<u8>, PlotError> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            encoder.set_color(png::ColorType::Rgba);
            encoder.set_depth(png::BitDepth::Eight);
            encoder.set_compression(png::Compression::Balanced);
            encoder.set_filter(png::Filter::Adaptive);
            let mut writer = encoder
                .write_header()
                .map_err(|e| PlotError::Encoding(e.to_string()))?;
            writer
                .write_image_data(&self.rgba)
                .map_err(|e| PlotError::Encoding(e.to_string()))?;
            writer.finish().map_err(|e| PlotError::Encoding(e.to_string()))?;
        }
        Ok(out)
    }
}

/// Draws edges, then node discs (smallest first), then labels for the
/// `cfg.label_top_k` best-ranked authors, and encodes an 8-bit RGBA PNG.
pub fn render_png(
    graph: &CoauthorGraph,
    layout: &NodeLayout,
    ranking: &CentralityRanking,
    cfg: &LayoutConfig,
) -> Result<Vec<u8>, PlotError> {
    cfg.validate()?;
    let mut canvas = Canvas::new(cfg.width, cfg.height);
    let position = |name: &str| {
        layout
            .positions
            .get(name)
            .copied()
            .ok_or_else(|| PlotError::MissingNode(name.to_string()))
    };

    for (a, b, w) in graph.edges() {
        canvas.line(position(a)?, position(b)?, EDGE_COLOR, edge_alpha(w));
    }

    let labelled: Vec<&str> = ranking
        .entries
        .iter()
        .take(cfg.label_top_k)
        .filter(|e| graph.contains(&e.author))
        .map(|e| e.author.as_str())
        .collect();

    let mut nodes: Vec<(&str, f64)> = graph
        .nodes()
        .map(|n| (n, layout.radii.get(n).copied().unwrap_or(super::layout::MIN_RADIUS)))
        .collect();
    nodes.sort_by(|(a, x), (b, y)| x.total_cmp(y).then_with(|| a.cmp(b)));
    for (name, r) in &nodes {
        let color = if labelled.contains(name) { TOP_NODE_COLOR } else { NODE_COLOR };
        canvas.disc(position(name)?, *r, color);
    }

    for name in labelled {
        let (x, y) = position(name)?;
        let r = layout.radii.get(name).copied().unwrap_or_default();
        let text = graph.display_name(name);
        let text_width = 8.0 * text.chars().count() as f64;
        // Right of the node, or left of it when the label would leave the canvas.
        let lx = if x + r + 4.0 + text_width <= f64::from(cfg.width) {
            x + r + 4.0
        } else {
            x - r - 4.0 - text_width
        };
        canvas.text(lx.round() as i64, (y - 4.0).round() as i64, text, LABEL_COLOR);
    }

    canvas.encode()
}
