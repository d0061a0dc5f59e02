//! Page rasterisation for thumbnails and the area picker.
//!
//! The built-in renderer draws rulings and text glyphs (from an 8x8 bitmap
//! font stretched to each glyph box). It is meant for previews, not for
//! faithful reproduction of the page.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use font8x8::UnicodeFonts;
use image::{ImageFormat, Rgb, RgbImage};

use super::{Document, PageContent};
use crate::error::{Error, Result};
use crate::model::PageDims;

/// Rendering contract: page content in, pixel buffer out.
pub trait PageRenderer {
    fn render(&self, content: &PageContent, dpi: f64) -> RgbImage;
}

/// Pixel size of a page at `dpi`: `ceil(pt * dpi / 72)` per axis.
pub fn pixel_dims(dims: PageDims, dpi: f64) -> (u32, u32) {
    let px = |pt: f64| {
        // Absorb float noise so exact products do not round up.
        let v = pt * dpi / 72.0;
        ((v - 1e-9).ceil().max(1.0)) as u32
    };
    (px(dims.width), px(dims.height))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BasicRenderer;

const INK: Rgb<u8> = Rgb([20, 20, 20]);
const RULE: Rgb<u8> = Rgb([0, 0, 0]);

impl PageRenderer for BasicRenderer {
    fn render(&self, content: &PageContent, dpi: f64) -> RgbImage {
        let (w, h) = pixel_dims(content.dims, dpi);
        let mut img = RgbImage::from_pixel(w, h, Rgb([255, 255, 255]));
        let scale = dpi / 72.0;

        for r in &content.rulings {
            let b = r.bbox();
            let thickness = scale.max(1.0);
            let (x0, x1, y0, y1) = if r.is_horizontal() {
                let y = b.top * scale;
                (
                    b.left * scale,
                    b.right * scale,
                    y - thickness / 2.0,
                    y + thickness / 2.0,
                )
            } else {
                let x = b.left * scale;
                (
                    x - thickness / 2.0,
                    x + thickness / 2.0,
                    b.top * scale,
                    b.bottom * scale,
                )
            };
            fill_rect(&mut img, x0, y0, x1.max(x0 + 1.0), y1.max(y0 + 1.0), RULE);
        }

        for el in &content.elements {
            let Some(ch) = el.text.chars().next() else {
                continue;
            };
            let Some(glyph) = font8x8::BASIC_FONTS
                .get(ch)
                .or_else(|| font8x8::LATIN_FONTS.get(ch))
            else {
                continue;
            };
            let b = el.bbox;
            let (x0, y0) = (b.left * scale, b.top * scale);
            let (gw, gh) = (b.width() * scale, b.height() * scale);
            if gw <= 0.0 || gh <= 0.0 {
                continue;
            }
            let px0 = x0.floor().max(0.0) as u32;
            let py0 = y0.floor().max(0.0) as u32;
            let px1 = ((x0 + gw).ceil() as u32).min(w);
            let py1 = ((y0 + gh).ceil() as u32).min(h);
            for py in py0..py1 {
                let gy = (((py as f64 + 0.5 - y0) / gh) * 8.0).floor();
                if !(0.0..8.0).contains(&gy) {
                    continue;
                }
                let row = glyph[gy as usize];
                for px in px0..px1 {
                    let gx = (((px as f64 + 0.5 - x0) / gw) * 8.0).floor();
                    if (0.0..8.0).contains(&gx) && row & (1 << gx as u32) != 0 {
                        img.put_pixel(px, py, INK);
                    }
                }
            }
        }
        img
    }
}

fn fill_rect(img: &mut RgbImage, x0: f64, y0: f64, x1: f64, y1: f64, color: Rgb<u8>) {
    let (w, h) = img.dimensions();
    let cx = |v: f64| (v.round().max(0.0) as u32).min(w);
    let cy = |v: f64| (v.round().max(0.0) as u32).min(h);
    for y in cy(y0)..cy(y1) {
        for x in cx(x0)..cx(x1) {
            img.put_pixel(x, y, color);
        }
    }
}

/// Encodes an image as PNG bytes.
pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

impl Document {
    /// Renders one page to PNG bytes with the built-in renderer.
    pub fn render_page_png(&self, page: usize, dpi: f64) -> Result<Vec<u8>> {
        check_dpi(dpi)?;
        let content = self.read_page_content(page)?;
        encode_png(&BasicRenderer.render(&content, dpi))
    }

    /// Writes `<stem>-<page>.png` for each requested page (all when `None`).
    pub fn make_thumbnails(
        &self,
        pages: Option<&[usize]>,
        dpi: f64,
        out_dir: &Path,
    ) -> Result<Vec<PathBuf>> {
        self.make_thumbnails_with(&BasicRenderer, pages, dpi, out_dir)
    }

    pub fn make_thumbnails_with<R: PageRenderer>(
        &self,
        renderer: &R,
        pages: Option<&[usize]>,
        dpi: f64,
        out_dir: &Path,
    ) -> Result<Vec<PathBuf>> {
        check_dpi(dpi)?;
        let pages = self.resolve_pages(pages)?;
        std::fs::create_dir_all(out_dir).map_err(|source| Error::Write {
            path: out_dir.to_path_buf(),
            source,
        })?;
        let stem = self.stem();
        pages
            .into_iter()
            .map(|page| {
                let content = self.read_page_content(page)?;
                let img = renderer.render(&content, dpi);
                let path = out_dir.join(format!("{stem}-{page}.png"));
                let bytes = encode_png(&img)?;
                std::fs::write(&path, bytes).map_err(|source| Error::Write {
                    path: path.clone(),
                    source,
                })?;
                Ok(path)
            })
            .collect()
    }
}

fn check_dpi(dpi: f64) -> Result<()> {
    if dpi.is_finite() && dpi > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidOptions(format!(
            "dpi must be positive, got {dpi}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_law() {
        assert_eq!(pixel_dims(PageDims::LETTER, 72.0), (612, 792));
        assert_eq!(pixel_dims(PageDims::LETTER, 144.0), (1224, 1584));
        assert_eq!(pixel_dims(PageDims::LETTER, 36.0), (306, 396));
        assert_eq!(pixel_dims(PageDims::LETTER, 300.0), (2550, 3300));
        // 595.2756 * 300 / 72 = 2480.315 -> 2481
        assert_eq!(pixel_dims(PageDims::A4, 300.0), (2481, 3508));
    }

    #[test]
    fn renders_rulings_and_glyphs() {
        use crate::model::{PageRect, Ruling, TextElement};
        let content = PageContent::new(
            1,
            PageDims::new(100.0, 50.0).unwrap(),
            vec![TextElement {
                bbox: PageRect::new_unchecked(10.0, 10.0, 30.0, 30.0),
                text: "H".into(),
                font_size: 20.0,
                width_of_space: 5.0,
            }],
            vec![Ruling::horizontal(40.0, 0.0, 100.0)],
        );
        let img = BasicRenderer.render(&content, 72.0);
        assert_eq!(img.dimensions(), (100, 50));
        assert_eq!(*img.get_pixel(50, 40), RULE);
        let inked = (10..30)
            .flat_map(|y| (10..30).map(move |x| (x, y)))
            .filter(|&(x, y)| *img.get_pixel(x, y) == INK)
            .count();
        assert!(inked > 20, "glyph should leave ink, got {inked}");
    }
}
