//! Content-stream interpreter: turns page operators into positioned glyphs and rulings.

use std::collections::HashMap;
use std::rc::Rc;

use lopdf::content::{Content, Operation};
use lopdf::{Dictionary, Document, Object, ObjectId};

use super::fonts::{deref, num, FontInfo};
use crate::model::{PageDims, PageRect, Ruling, TextElement};

/// Paths thinner than this (pt) and filled are read as rulings.
pub const THIN_FILL_MAX: f64 = 2.0;
/// Maximum deviation from an axis, in degrees, for a segment to count as a ruling.
pub const MAX_RULING_SKEW_DEG: f64 = 1.0;

const MAX_FORM_DEPTH: usize = 12;

/// Row-major 2x3 affine matrix `[a b c d e f]` as used by PDF.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Matrix([f64; 6]);

impl Matrix {
    const IDENTITY: Matrix = Matrix([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);

    fn translate(tx: f64, ty: f64) -> Matrix {
        Matrix([1.0, 0.0, 0.0, 1.0, tx, ty])
    }

    /// `self` applied first, then `other`.
    fn then(&self, other: &Matrix) -> Matrix {
        let [a, b, c, d, e, f] = self.0;
        let [a2, b2, c2, d2, e2, f2] = other.0;
        Matrix([
            a * a2 + b * c2,
            a * b2 + b * d2,
            c * a2 + d * c2,
            c * b2 + d * d2,
            e * a2 + f * c2 + e2,
            e * b2 + f * d2 + f2,
        ])
    }

    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.0;
        (a * x + c * y + e, b * x + d * y + f)
    }

    fn apply_vector(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d, _, _] = self.0;
        (a * x + c * y, b * x + d * y)
    }
}

#[derive(Clone)]
struct TextState {
    font: Option<Rc<FontInfo>>,
    size: f64,
    char_spacing: f64,
    word_spacing: f64,
    horizontal_scale: f64,
    leading: f64,
    rise: f64,
}

impl Default for TextState {
    fn default() -> Self {
        TextState {
            font: None,
            size: 0.0,
            char_spacing: 0.0,
            word_spacing: 0.0,
            horizontal_scale: 1.0,
            leading: 0.0,
            rise: 0.0,
        }
    }
}

#[derive(Clone)]
struct GraphicsState {
    ctm: Matrix,
    text: TextState,
}

#[derive(Clone, Copy)]
struct Segment {
    from: (f64, f64),
    to: (f64, f64),
    curved: bool,
}

#[derive(Default)]
struct Subpath {
    start: (f64, f64),
    segments: Vec<Segment>,
    closed: bool,
}

/// Output of interpreting one page.
#[derive(Default)]
pub(crate) struct PageGlyphs {
    pub elements: Vec<TextElement>,
    pub rulings: Vec<Ruling>,
}

pub(crate) struct Interpreter<'a> {
    doc: &'a Document,
    dims: PageDims,
    /// MediaBox lower-left and upper-right y in PDF user space.
    origin_x: f64,
    top_y: f64,
    fonts: HashMap<(usize, Vec<u8>), Rc<FontInfo>>,
    out: PageGlyphs,
}

impl<'a> Interpreter<'a> {
    pub(crate) fn new(doc: &'a Document, dims: PageDims, origin_x: f64, top_y: f64) -> Self {
        Interpreter {
            doc,
            dims,
            origin_x,
            top_y,
            fonts: HashMap::new(),
            out: PageGlyphs::default(),
        }
    }

    pub(crate) fn run_page(mut self, page_id: ObjectId) -> PageGlyphs {
        let content = self.doc.get_page_content(page_id);
        let resources = page_resources(self.doc, page_id);
        if let Ok(content) = Content::decode(&content) {
            let mut state = GraphicsState {
                ctm: Matrix::IDENTITY,
                text: TextState::default(),
            };
            self.run(&content.operations, resources.as_ref(), &mut state, 0);
        }
        self.out
    }

    fn run(
        &mut self,
        ops: &[Operation],
        resources: Option<&Dictionary>,
        state: &mut GraphicsState,
        depth: usize,
    ) {
        let mut stack: Vec<GraphicsState> = Vec::new();
        let mut tm = Matrix::IDENTITY;
        let mut tlm = Matrix::IDENTITY;
        let mut path: Vec<Subpath> = Vec::new();
        let mut current: Option<(f64, f64)> = None;

        let doc = self.doc;
        for op in ops {
            let args = &op.operands;
            let f = |i: usize| args.get(i).and_then(|o| num(doc, o)).unwrap_or(0.0);
            match op.operator.as_str() {
                "q" => stack.push(state.clone()),
                "Q" => {
                    if let Some(s) = stack.pop() {
                        *state = s;
                    }
                }
                "cm" => {
                    let m = Matrix([f(0), f(1), f(2), f(3), f(4), f(5)]);
                    state.ctm = m.then(&state.ctm);
                }
                // Path construction; points are stored in default user space.
                "m" => {
                    let p = state.ctm.apply(f(0), f(1));
                    path.push(Subpath {
                        start: p,
                        ..Default::default()
                    });
                    current = Some(p);
                }
                "l" => {
                    let p = state.ctm.apply(f(0), f(1));
                    line_to(&mut path, &mut current, p, false);
                }
                "c" => {
                    let p = state.ctm.apply(f(4), f(5));
                    line_to(&mut path, &mut current, p, true);
                }
                "v" | "y" => {
                    let p = state.ctm.apply(f(2), f(3));
                    line_to(&mut path, &mut current, p, true);
                }
                "h" => close_subpath(&mut path, &mut current),
                "re" => {
                    let (x, y, w, h) = (f(0), f(1), f(2), f(3));
                    let corners = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
                    let pts: Vec<(f64, f64)> = corners
                        .iter()
                        .map(|(px, py)| state.ctm.apply(*px, *py))
                        .collect();
                    path.push(Subpath {
                        start: pts[0],
                        ..Default::default()
                    });
                    current = Some(pts[0]);
                    for p in &pts[1..] {
                        line_to(&mut path, &mut current, *p, false);
                    }
                    close_subpath(&mut path, &mut current);
                }
                "S" => self.paint(std::mem::take(&mut path), true, false, false),
                "s" => self.paint(std::mem::take(&mut path), true, false, true),
                "f" | "F" | "f*" => self.paint(std::mem::take(&mut path), false, true, false),
                "B" | "B*" => self.paint(std::mem::take(&mut path), true, true, false),
                "b" | "b*" => self.paint(std::mem::take(&mut path), true, true, true),
                "n" => path.clear(),

                "BT" => {
                    tm = Matrix::IDENTITY;
                    tlm = Matrix::IDENTITY;
                }
                "ET" => {}
                "Tf" => {
                    let name = args
                        .first()
                        .and_then(|o| o.as_name().ok())
                        .unwrap_or_default();
                    state.text.font = Some(self.font(resources, name));
                    state.text.size = f(1);
                }
                "Tc" => state.text.char_spacing = f(0),
                "Tw" => state.text.word_spacing = f(0),
                "Tz" => state.text.horizontal_scale = f(0) / 100.0,
                "TL" => state.text.leading = f(0),
                "Ts" => state.text.rise = f(0),
                "Td" => {
                    tlm = Matrix::translate(f(0), f(1)).then(&tlm);
                    tm = tlm;
                }
                "TD" => {
                    state.text.leading = -f(1);
                    tlm = Matrix::translate(f(0), f(1)).then(&tlm);
                    tm = tlm;
                }
                "Tm" => {
                    tlm = Matrix([f(0), f(1), f(2), f(3), f(4), f(5)]);
                    tm = tlm;
                }
                "T*" => {
                    tlm = Matrix::translate(0.0, -state.text.leading).then(&tlm);
                    tm = tlm;
                }
                "Tj" => {
                    if let Some(bytes) = args.first().and_then(string_bytes) {
                        self.show(bytes, state, &mut tm);
                    }
                }
                "'" => {
                    tlm = Matrix::translate(0.0, -state.text.leading).then(&tlm);
                    tm = tlm;
                    if let Some(bytes) = args.first().and_then(string_bytes) {
                        self.show(bytes, state, &mut tm);
                    }
                }
                "\"" => {
                    state.text.word_spacing = f(0);
                    state.text.char_spacing = f(1);
                    tlm = Matrix::translate(0.0, -state.text.leading).then(&tlm);
                    tm = tlm;
                    if let Some(bytes) = args.get(2).and_then(string_bytes) {
                        self.show(bytes, state, &mut tm);
                    }
                }
                "TJ" => {
                    if let Some(items) = args.first().and_then(|o| o.as_array().ok()) {
                        for item in items {
                            if let Some(bytes) = string_bytes(item) {
                                self.show(bytes, state, &mut tm);
                            } else if let Some(adj) = num(doc, item) {
                                let tx =
                                    -adj / 1000.0 * state.text.size * state.text.horizontal_scale;
                                tm = Matrix::translate(tx, 0.0).then(&tm);
                            }
                        }
                    }
                }
                "Do" if depth < MAX_FORM_DEPTH => {
                    let name = args
                        .first()
                        .and_then(|o| o.as_name().ok())
                        .unwrap_or_default();
                    self.run_form(resources, name, state, depth);
                }
                _ => {}
            }
        }
    }

    fn run_form(
        &mut self,
        resources: Option<&Dictionary>,
        name: &[u8],
        state: &GraphicsState,
        depth: usize,
    ) {
        let doc = self.doc;
        let Some(xobjects) = resources
            .and_then(|r| r.get(b"XObject").ok())
            .and_then(|o| deref(doc, o).as_dict().ok())
        else {
            return;
        };
        let Some(stream) = xobjects
            .get(name)
            .ok()
            .and_then(|o| deref(doc, o).as_stream().ok())
        else {
            return;
        };
        let is_form = stream
            .dict
            .get(b"Subtype")
            .ok()
            .and_then(|o| o.as_name().ok())
            == Some(b"Form".as_slice());
        if !is_form {
            return;
        }
        let matrix = stream
            .dict
            .get(b"Matrix")
            .ok()
            .and_then(|o| deref(doc, o).as_array().ok())
            .filter(|a| a.len() == 6)
            .map(|a| {
                let mut m = [0.0; 6];
                for (slot, v) in m.iter_mut().zip(a) {
                    *slot = num(doc, v).unwrap_or(0.0);
                }
                Matrix(m)
            })
            .unwrap_or(Matrix::IDENTITY);
        let form_resources = stream
            .dict
            .get(b"Resources")
            .ok()
            .and_then(|o| deref(doc, o).as_dict().ok())
            .or(resources);
        let data = stream
            .decompressed_content()
            .unwrap_or_else(|_| stream.content.clone());
        let Ok(content) = Content::decode(&data) else {
            return;
        };
        let mut inner = state.clone();
        inner.ctm = matrix.then(&state.ctm);
        self.run(&content.operations, form_resources, &mut inner, depth + 1);
    }

    fn font(&mut self, resources: Option<&Dictionary>, name: &[u8]) -> Rc<FontInfo> {
        let key = (
            resources.map_or(0, |r| r as *const Dictionary as usize),
            name.to_vec(),
        );
        if let Some(f) = self.fonts.get(&key) {
            return f.clone();
        }
        let doc = self.doc;
        let info = resources
            .and_then(|r| r.get(b"Font").ok())
            .and_then(|o| deref(doc, o).as_dict().ok())
            .and_then(|fonts| fonts.get(name).ok())
            .and_then(|o| deref(doc, o).as_dict().ok())
            .map(|d| FontInfo::load(doc, d))
            .unwrap_or_else(FontInfo::fallback);
        let info = Rc::new(info);
        self.fonts.insert(key, info.clone());
        info
    }

    fn show(&mut self, bytes: &[u8], state: &GraphicsState, tm: &mut Matrix) {
        let ts = &state.text;
        let font = ts
            .font
            .clone()
            .unwrap_or_else(|| Rc::new(FontInfo::fallback()));
        let size = ts.size;
        let th = ts.horizontal_scale;
        let render = Matrix([size * th, 0.0, 0.0, size, 0.0, ts.rise]);
        for (code, is_space_byte) in font.codes(bytes) {
            let w0 = font.glyph_width(code) / 1000.0;
            let trm = render.then(tm).then(&state.ctm);
            let text = font.decode(code);
            if !text.trim().is_empty() {
                self.emit_glyph(&trm, &font, w0, text);
            }
            let mut advance = w0 * size + ts.char_spacing;
            if is_space_byte {
                advance += ts.word_spacing;
            }
            *tm = Matrix::translate(advance * th, 0.0).then(tm);
        }
    }

    fn emit_glyph(&mut self, trm: &Matrix, font: &FontInfo, w0: f64, text: String) {
        // Glyph box in text space: advance wide, descent..ascent tall.
        let corners = [
            trm.apply(0.0, font.descent),
            trm.apply(w0, font.descent),
            trm.apply(w0, font.ascent),
            trm.apply(0.0, font.ascent),
        ];
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in corners {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let (vx, vy) = trm.apply_vector(0.0, 1.0);
        let font_size = vx.hypot(vy);
        let (hx, hy) = trm.apply_vector(font.space_width(), 0.0);
        let width_of_space = hx.hypot(hy);

        let bbox = PageRect::new_unchecked(
            self.top_y - y1,
            x0 - self.origin_x,
            self.top_y - y0,
            x1 - self.origin_x,
        );
        if bbox.right < 0.0
            || bbox.bottom < 0.0
            || bbox.left > self.dims.width
            || bbox.top > self.dims.height
            || !bbox.top.is_finite()
            || !bbox.left.is_finite()
        {
            return;
        }
        self.out.elements.push(TextElement {
            bbox: bbox.clamp_to(self.dims),
            text,
            font_size,
            width_of_space,
        });
    }

    fn paint(&mut self, mut path: Vec<Subpath>, stroke: bool, fill: bool, close: bool) {
        for sub in &mut path {
            if close && !sub.closed {
                close_segments(sub);
            }
        }
        for sub in &path {
            if stroke {
                for seg in &sub.segments {
                    if !seg.curved {
                        if let Some(r) = self.segment_ruling(seg.from, seg.to) {
                            self.out.rulings.push(r);
                        }
                    }
                }
            } else if fill {
                if let Some(r) = self.thin_fill_ruling(sub) {
                    self.out.rulings.push(r);
                }
            }
        }
    }

    fn to_page(&self, p: (f64, f64)) -> (f64, f64) {
        (p.0 - self.origin_x, self.top_y - p.1)
    }

    fn segment_ruling(&self, from: (f64, f64), to: (f64, f64)) -> Option<Ruling> {
        let (x0, y0) = self.to_page(from);
        let (x1, y1) = self.to_page(to);
        let (dx, dy) = ((x1 - x0).abs(), (y1 - y0).abs());
        let skew = MAX_RULING_SKEW_DEG.to_radians().tan();
        let ruling = if dx > 0.0 && dy <= skew * dx {
            Ruling::horizontal((y0 + y1) / 2.0, x0, x1)
        } else if dy > 0.0 && dx <= skew * dy {
            Ruling::vertical((x0 + x1) / 2.0, y0, y1)
        } else {
            return None;
        };
        ruling.clip(self.dims)
    }

    /// A filled axis-aligned rectangle no thicker than `THIN_FILL_MAX` becomes one ruling
    /// along its long axis.
    fn thin_fill_ruling(&self, sub: &Subpath) -> Option<Ruling> {
        if sub.segments.iter().any(|s| s.curved) {
            return None;
        }
        let mut pts: Vec<(f64, f64)> = std::iter::once(sub.start)
            .chain(sub.segments.iter().map(|s| s.to))
            .map(|p| self.to_page(p))
            .collect();
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() != 4 {
            return None;
        }
        let eps = 1e-3;
        let axis_aligned = (0..4).all(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % 4]);
            (a.0 - b.0).abs() < eps || (a.1 - b.1).abs() < eps
        });
        if !axis_aligned {
            return None;
        }
        let x0 = pts.iter().map(|p| p.0).fold(f64::MAX, f64::min);
        let x1 = pts.iter().map(|p| p.0).fold(f64::MIN, f64::max);
        let y0 = pts.iter().map(|p| p.1).fold(f64::MAX, f64::min);
        let y1 = pts.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        let (w, h) = (x1 - x0, y1 - y0);
        let ruling = if h <= THIN_FILL_MAX && w > h {
            Ruling::horizontal((y0 + y1) / 2.0, x0, x1)
        } else if w <= THIN_FILL_MAX && h > w {
            Ruling::vertical((x0 + x1) / 2.0, y0, y1)
        } else {
            return None;
        };
        ruling.clip(self.dims)
    }
}

fn line_to(path: &mut Vec<Subpath>, current: &mut Option<(f64, f64)>, p: (f64, f64), curved: bool) {
    let from = match *current {
        Some(c) => c,
        None => {
            path.push(Subpath {
                start: p,
                ..Default::default()
            });
            *current = Some(p);
            return;
        }
    };
    if path.is_empty() {
        path.push(Subpath {
            start: from,
            ..Default::default()
        });
    }
    if let Some(sub) = path.last_mut() {
        sub.segments.push(Segment {
            from,
            to: p,
            curved,
        });
    }
    *current = Some(p);
}

fn close_segments(sub: &mut Subpath) {
    if let Some(last) = sub.segments.last() {
        if last.to != sub.start {
            let seg = Segment {
                from: last.to,
                to: sub.start,
                curved: false,
            };
            sub.segments.push(seg);
        }
    }
    sub.closed = true;
}

fn close_subpath(path: &mut [Subpath], current: &mut Option<(f64, f64)>) {
    if let Some(sub) = path.last_mut() {
        close_segments(sub);
        *current = Some(sub.start);
    }
}

fn string_bytes(obj: &Object) -> Option<&[u8]> {
    match obj {
        Object::String(bytes, _) => Some(bytes),
        _ => None,
    }
}

/// Resources dictionary of a page, following inheritance through the page tree.
pub(crate) fn page_resources(doc: &Document, page_id: ObjectId) -> Option<Dictionary> {
    let mut node = doc.get_dictionary(page_id).ok();
    let mut guard = 0;
    while let Some(dict) = node {
        if let Ok(res) = dict.get(b"Resources") {
            return deref(doc, res).as_dict().ok().cloned();
        }
        node = dict
            .get(b"Parent")
            .ok()
            .and_then(|p| p.as_reference().ok())
            .and_then(|id| doc.get_dictionary(id).ok());
        guard += 1;
        if guard > 64 {
            break;
        }
    }
    None
}
