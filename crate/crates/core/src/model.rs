//! Geometric and tabular types shared by every extraction stage.
//!
//! All coordinates are PDF points (1/72 inch) with the origin at the
//! top-left corner of the page and y growing downward.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned rectangle in page space, stored as (top, left, bottom, right).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageRect {
    pub top: f64,
    pub left: f64,
    pub bottom: f64,
    pub right: f64,
}

impl PageRect {
    /// Builds a rectangle after checking ordering, finiteness and sign.
    pub fn new(top: f64, left: f64, bottom: f64, right: f64) -> Result<Self> {
        let rect = PageRect {
            top,
            left,
            bottom,
            right,
        };
        rect.validate()?;
        Ok(rect)
    }

    /// Builds a rectangle without validation. Callers must uphold the invariants.
    pub const fn new_unchecked(top: f64, left: f64, bottom: f64, right: f64) -> Self {
        PageRect {
            top,
            left,
            bottom,
            right,
        }
    }

    /// Parses `T,L,B,R`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidRect(format!(
                "expected 4 comma-separated numbers (top,left,bottom,right), got {s:?}"
            )));
        }
        let mut v = [0.0; 4];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse::<f64>()
                .map_err(|_| Error::InvalidRect(format!("not a number: {part:?}")))?;
        }
        PageRect::new(v[0], v[1], v[2], v[3])
    }

    pub fn validate(&self) -> Result<()> {
        let coords = [self.top, self.left, self.bottom, self.right];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidRect(format!("{self}: non-finite coordinate")));
        }
        if coords.iter().any(|c| *c < 0.0) {
            return Err(Error::InvalidRect(format!("{self}: negative coordinate")));
        }
        if self.top > self.bottom || self.left > self.right {
            return Err(Error::InvalidRect(format!(
                "{self}: top must not exceed bottom and left must not exceed right"
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center_x(&self) -> f64 {
        (self.left + self.right) / 2.0
    }

    pub fn center_y(&self) -> f64 {
        (self.top + self.bottom) / 2.0
    }

    /// Closed-rectangle intersection test: shared edges and corners count.
    pub fn intersects(&self, other: &PageRect) -> bool {
        self.left <= other.right
            && other.left <= self.right
            && self.top <= other.bottom
            && other.top <= self.bottom
    }

    /// Smallest rectangle containing both.
    pub fn union(&self, other: &PageRect) -> PageRect {
        PageRect {
            top: self.top.min(other.top),
            left: self.left.min(other.left),
            bottom: self.bottom.max(other.bottom),
            right: self.right.max(other.right),
        }
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.left && x <= self.right && y >= self.top && y <= self.bottom
    }

    /// True when the centre of `other` lies inside `self`.
    pub fn contains_midpoint_of(&self, other: &PageRect) -> bool {
        self.contains_point(other.center_x(), other.center_y())
    }

    pub fn contains_rect(&self, other: &PageRect) -> bool {
        other.left >= self.left
            && other.right <= self.right
            && other.top >= self.top
            && other.bottom <= self.bottom
    }

    /// Length of the vertical overlap between the two rectangles (0 when disjoint).
    pub fn vertical_overlap(&self, other: &PageRect) -> f64 {
        (self.bottom.min(other.bottom) - self.top.max(other.top)).max(0.0)
    }

    /// Vertical overlap of at least half the smaller of the two heights.
    ///
    /// Zero-height boxes overlap when they sit inside the other's band.
    pub fn shares_row_with(&self, other: &PageRect) -> bool {
        let min_h = self.height().min(other.height());
        let overlap = self.vertical_overlap(other);
        if min_h <= 0.0 {
            return self.top <= other.bottom && other.top <= self.bottom;
        }
        overlap >= 0.5 * min_h
    }

    pub fn expand(&self, margin: f64) -> PageRect {
        PageRect {
            top: (self.top - margin).max(0.0),
            left: (self.left - margin).max(0.0),
            bottom: self.bottom + margin,
            right: self.right + margin,
        }
    }

    /// Clamps the rectangle into `[0, width] x [0, height]`.
    pub fn clamp_to(&self, dims: PageDims) -> PageRect {
        let cx = |v: f64| v.clamp(0.0, dims.width);
        let cy = |v: f64| v.clamp(0.0, dims.height);
        PageRect {
            top: cy(self.top),
            left: cx(self.left),
            bottom: cy(self.bottom),
            right: cx(self.right),
        }
    }

    pub fn full_page(dims: PageDims) -> PageRect {
        PageRect::new_unchecked(0.0, 0.0, dims.height, dims.width)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.top, self.left, self.bottom, self.right]
    }
}

impl fmt::Display for PageRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.top, self.left, self.bottom, self.right
        )
    }
}

pub fn rect_intersects(a: &PageRect, b: &PageRect) -> bool {
    a.intersects(b)
}

pub fn rect_union(a: &PageRect, b: &PageRect) -> PageRect {
    a.union(b)
}

/// Page size in points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageDims {
    pub width: f64,
    pub height: f64,
}

impl PageDims {
    pub const LETTER: PageDims = PageDims {
        width: 612.0,
        height: 792.0,
    };
    pub const A4: PageDims = PageDims {
        width: 595.2756,
        height: 841.8898,
    };

    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(Error::InvalidRect(format!(
                "page dimensions must be positive, got {width} x {height}"
            )));
        }
        Ok(PageDims { width, height })
    }

    /// True when `rect` fits on the page, allowing a small tolerance for rounding.
    pub fn contains(&self, rect: &PageRect) -> bool {
        const EPS: f64 = 1e-6;
        rect.right <= self.width + EPS && rect.bottom <= self.height + EPS
    }
}

/// One positioned glyph (or ligature) on the page.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextElement {
    pub bbox: PageRect,
    pub text: String,
    pub font_size: f64,
    pub width_of_space: f64,
}

/// A run of adjacent glyphs that reads as one word or token.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextChunk {
    pub bbox: PageRect,
    pub text: String,
    pub elements: Vec<TextElement>,
}

impl TextChunk {
    pub fn from_element(element: TextElement) -> Self {
        TextChunk {
            bbox: element.bbox,
            text: element.text.clone(),
            elements: vec![element],
        }
    }

    pub fn push(&mut self, element: TextElement) {
        self.bbox = self.bbox.union(&element.bbox);
        self.text.push_str(&element.text);
        self.elements.push(element);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// An axis-aligned line segment. `position` is the constant coordinate
/// (y for horizontal rulings, x for vertical ones) and `start..end` spans
/// the other axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ruling {
    pub orientation: Orientation,
    pub position: f64,
    pub start: f64,
    pub end: f64,
}

impl Ruling {
    pub fn horizontal(y: f64, x0: f64, x1: f64) -> Self {
        Ruling {
            orientation: Orientation::Horizontal,
            position: y,
            start: x0.min(x1),
            end: x0.max(x1),
        }
    }

    pub fn vertical(x: f64, y0: f64, y1: f64) -> Self {
        Ruling {
            orientation: Orientation::Vertical,
            position: x,
            start: y0.min(y1),
            end: y0.max(y1),
        }
    }

    pub fn is_horizontal(&self) -> bool {
        self.orientation == Orientation::Horizontal
    }

    pub fn is_vertical(&self) -> bool {
        self.orientation == Orientation::Vertical
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn bbox(&self) -> PageRect {
        match self.orientation {
            Orientation::Horizontal => {
                PageRect::new_unchecked(self.position, self.start, self.position, self.end)
            }
            Orientation::Vertical => {
                PageRect::new_unchecked(self.start, self.position, self.end, self.position)
            }
        }
    }

    /// Restricts the ruling to the page. Returns `None` if nothing of positive length remains.
    pub fn clip(&self, dims: PageDims) -> Option<Ruling> {
        let (pos_max, span_max) = match self.orientation {
            Orientation::Horizontal => (dims.height, dims.width),
            Orientation::Vertical => (dims.width, dims.height),
        };
        if self.position < 0.0 || self.position > pos_max {
            return None;
        }
        let start = self.start.max(0.0);
        let end = self.end.min(span_max);
        (end > start).then_some(Ruling {
            start,
            end,
            ..*self
        })
    }
}

/// The algorithm that produced (or should produce) a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lattice,
    Stream,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lattice => "lattice",
            Method::Stream => "stream",
        })
    }
}

/// Requested extraction method; `Decide` picks per area.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Lattice,
    Stream,
    #[default]
    Decide,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lattice" => Ok(MethodChoice::Lattice),
            "stream" => Ok(MethodChoice::Stream),
            "decide" => Ok(MethodChoice::Decide),
            other => Err(Error::InvalidOptions(format!(
                "unknown method {other:?} (expected lattice, stream or decide)"
            ))),
        }
    }
}

/// A rectangular grid of cell strings plus where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    /// 1-based page index.
    pub page: usize,
    pub area: PageRect,
    pub method: Method,
    pub cells: Vec<Vec<String>>,
}

impl RawTable {
    /// Builds a table, padding short rows with empty strings so the grid is rectangular.
    pub fn new(page: usize, area: PageRect, method: Method, mut cells: Vec<Vec<String>>) -> Self {
        let width = cells.iter().map(Vec::len).max().unwrap_or(0);
        for row in &mut cells {
            row.resize(width, String::new());
        }
        RawTable {
            page,
            area,
            method,
            cells,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() || self.n_cols() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOptions {
    /// 1-based page indices; `None` means every page.
    pub pages: Option<Vec<usize>>,
    /// One area per entry of `pages` (or per page when `pages` is `None`).
    pub area: Option<Vec<PageRect>>,
    /// Explicit column boundaries in pt (stream only).
    pub columns: Option<Vec<f64>>,
    pub guess: bool,
    pub method: MethodChoice,
    pub col_names: bool,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        ExtractionOptions {
            pages: None,
            area: None,
            columns: None,
            guess: true,
            method: MethodChoice::Decide,
            col_names: true,
        }
    }
}

impl ExtractionOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(pages) = &self.pages {
            if pages.is_empty() {
                return Err(Error::InvalidOptions("page list is empty".into()));
            }
            if pages.contains(&0) {
                return Err(Error::InvalidOptions("page indices are 1-based".into()));
            }
        }
        if let Some(areas) = &self.area {
            if self.guess {
                return Err(Error::InvalidOptions(
                    "an explicit area requires guess to be disabled".into(),
                ));
            }
            if let Some(pages) = &self.pages {
                if pages.len() != areas.len() {
                    return Err(Error::InvalidOptions(format!(
                        "{} areas given for {} pages; the lists must have equal length",
                        areas.len(),
                        pages.len()
                    )));
                }
            }
            for a in areas {
                a.validate()?;
            }
        }
        if let Some(columns) = &self.columns {
            if self.method != MethodChoice::Stream {
                return Err(Error::InvalidOptions(
                    "explicit columns are only valid with method=stream".into(),
                ));
            }
            if columns.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidOptions(
                    "column positions must be finite".into(),
                ));
            }
            if columns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidOptions(
                    "column positions must be strictly ascending".into(),
                ));
            }
        }
        Ok(())
    }
}
