//! Font metrics and code-to-text decoding for the content interpreter.

use std::collections::HashMap;

use lopdf::{Dictionary, Document, Encoding, Object};

/// Advance widths (1/1000 em) for codes 32..=126 of Helvetica.
const HELVETICA_WIDTHS: [u16; 95] = [
    278, 278, 355, 556, 556, 889, 667, 222, 333, 333, 389, 584, 278, 333, 278, 278, // 32-47
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556, // 48-63
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778, // 64-79
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556, // 80-95
    222, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556, // 96-111
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584, // 112-126
];

/// Advance widths (1/1000 em) for codes 32..=126 of Times-Roman.
const TIMES_WIDTHS: [u16; 95] = [
    250, 333, 408, 500, 500, 833, 778, 333, 333, 333, 500, 564, 250, 333, 250, 278, // 32-47
    500, 500, 500, 500, 500, 500, 500, 500, 500, 500, 278, 278, 564, 564, 564, 444, // 48-63
    921, 722, 667, 667, 722, 611, 556, 722, 722, 333, 389, 722, 611, 889, 722, 722, // 64-79
    556, 722, 667, 556, 611, 722, 722, 944, 722, 722, 611, 333, 278, 333, 469, 500, // 80-95
    333, 444, 500, 444, 500, 444, 333, 500, 500, 278, 278, 500, 278, 778, 500, 500, // 96-111
    500, 500, 333, 389, 278, 500, 500, 722, 500, 500, 444, 480, 200, 480, 541, // 112-126
];

/// Helvetica advance width of a printable ASCII character in 1/1000 em.
pub(crate) fn helvetica_width(ch: char) -> u16 {
    HELVETICA_WIDTHS
        .get((ch as u32).wrapping_sub(32) as usize)
        .copied()
        .unwrap_or(556)
}

/// Helvetica ascent and descent in em.
pub(crate) const HELVETICA_ASCENT_DESCENT: (f64, f64) = (0.718, -0.207);

#[derive(Clone, Copy, Debug, PartialEq)]
enum BuiltinMetrics {
    Helvetica,
    Times,
    Courier,
}

impl BuiltinMetrics {
    fn for_base_font(name: &str) -> Self {
        let lower = name.to_ascii_lowercase();
        if lower.contains("courier") || lower.contains("mono") {
            BuiltinMetrics::Courier
        } else if lower.contains("times") || lower.contains("serif") && !lower.contains("sans") {
            BuiltinMetrics::Times
        } else {
            BuiltinMetrics::Helvetica
        }
    }

    fn width(self, code: u32) -> f64 {
        let idx = code.wrapping_sub(32) as usize;
        match self {
            BuiltinMetrics::Courier => 600.0,
            BuiltinMetrics::Helvetica => HELVETICA_WIDTHS.get(idx).copied().unwrap_or(556) as f64,
            BuiltinMetrics::Times => TIMES_WIDTHS.get(idx).copied().unwrap_or(500) as f64,
        }
    }

    fn ascent_descent(self) -> (f64, f64) {
        match self {
            BuiltinMetrics::Helvetica => HELVETICA_ASCENT_DESCENT,
            BuiltinMetrics::Times => (0.683, -0.217),
            BuiltinMetrics::Courier => (0.629, -0.157),
        }
    }
}

enum Decoder {
    /// Per-byte lookup for simple fonts.
    Table(Vec<Option<String>>),
    /// Two-byte codes resolved through a ToUnicode map.
    CMap(Encoding<'static>),
    /// Two-byte codes without a ToUnicode map; read as UCS-2.
    Ucs2,
}

/// Everything the interpreter needs to position and decode glyphs of one font.
pub(crate) struct FontInfo {
    two_byte: bool,
    widths: HashMap<u32, f64>,
    default_width: f64,
    builtin: Option<BuiltinMetrics>,
    pub(crate) ascent: f64,
    pub(crate) descent: f64,
    space_width: f64,
    decoder: Decoder,
}

impl FontInfo {
    /// Fallback used when a `Tf` names a font that cannot be resolved.
    pub(crate) fn fallback() -> Self {
        let builtin = BuiltinMetrics::Helvetica;
        let (ascent, descent) = builtin.ascent_descent();
        FontInfo {
            two_byte: false,
            widths: HashMap::new(),
            default_width: 556.0,
            builtin: Some(builtin),
            ascent,
            descent,
            space_width: builtin.width(32) / 1000.0,
            decoder: Decoder::Table((0..=255u8).map(latin1).collect()),
        }
    }

    pub(crate) fn load(doc: &Document, font: &Dictionary) -> Self {
        let subtype = name_of(font.get(b"Subtype").ok()).unwrap_or_default();
        let base_font = name_of(font.get(b"BaseFont").ok()).unwrap_or_default();
        if subtype == "Type0" {
            Self::load_type0(doc, font, &base_font)
        } else {
            Self::load_simple(doc, font, &base_font)
        }
    }

    fn load_simple(doc: &Document, font: &Dictionary, base_font: &str) -> Self {
        let mut widths = HashMap::new();
        let first_char = font
            .get(b"FirstChar")
            .ok()
            .and_then(|o| num(doc, o))
            .unwrap_or(0.0) as u32;
        if let Some(arr) = font
            .get(b"Widths")
            .ok()
            .and_then(|o| deref(doc, o).as_array().ok())
        {
            for (i, w) in arr.iter().enumerate() {
                if let Some(w) = num(doc, w) {
                    widths.insert(first_char + i as u32, w);
                }
            }
        }
        let builtin = widths
            .is_empty()
            .then(|| BuiltinMetrics::for_base_font(base_font));
        let descriptor = font
            .get(b"FontDescriptor")
            .ok()
            .and_then(|o| deref(doc, o).as_dict().ok());
        let missing = descriptor
            .and_then(|d| d.get(b"MissingWidth").ok())
            .and_then(|o| num(doc, o))
            .unwrap_or(0.0);
        let (ascent, descent) = ascent_descent(doc, descriptor, base_font);
        let default_width = if missing > 0.0 {
            missing
        } else {
            average(&widths).unwrap_or(500.0)
        };

        let decoder = Decoder::Table(simple_decode_table(doc, font));
        let mut info = FontInfo {
            two_byte: false,
            widths,
            default_width,
            builtin,
            ascent,
            descent,
            space_width: 0.0,
            decoder,
        };
        info.space_width = info.compute_space_width(32);
        info
    }

    fn load_type0(doc: &Document, font: &Dictionary, base_font: &str) -> Self {
        let descendant = font
            .get(b"DescendantFonts")
            .ok()
            .and_then(|o| deref(doc, o).as_array().ok())
            .and_then(|a| a.first())
            .and_then(|o| deref(doc, o).as_dict().ok());
        let mut widths = HashMap::new();
        let mut default_width = 1000.0;
        let mut descriptor = None;
        if let Some(desc) = descendant {
            if let Some(dw) = desc.get(b"DW").ok().and_then(|o| num(doc, o)) {
                default_width = dw;
            }
            if let Some(w) = desc
                .get(b"W")
                .ok()
                .and_then(|o| deref(doc, o).as_array().ok())
            {
                parse_cid_widths(doc, w, &mut widths);
            }
            descriptor = desc
                .get(b"FontDescriptor")
                .ok()
                .and_then(|o| deref(doc, o).as_dict().ok());
        }
        let (ascent, descent) = ascent_descent(doc, descriptor, base_font);
        let decoder = match to_unicode_encoding(doc, font) {
            Some(Encoding::UnicodeMapEncoding(map)) => {
                Decoder::CMap(Encoding::UnicodeMapEncoding(map))
            }
            _ => Decoder::Ucs2,
        };
        let mut info = FontInfo {
            two_byte: true,
            widths,
            default_width,
            builtin: None,
            ascent,
            descent,
            space_width: 0.0,
            decoder,
        };
        info.space_width = info.compute_space_width(u32::MAX);
        info
    }

    fn compute_space_width(&self, space_code: u32) -> f64 {
        if space_code != u32::MAX {
            let w = self.glyph_width(space_code);
            if w > 0.0 && (self.widths.contains_key(&space_code) || self.builtin.is_some()) {
                return w / 1000.0;
            }
        }
        // No explicit space glyph: half the average advance, which sits near a typical space.
        let avg = average(&self.widths).unwrap_or(self.default_width);
        (avg / 2.0 / 1000.0).max(0.1)
    }

    /// Splits a shown string into character codes.
    pub(crate) fn codes(&self, bytes: &[u8]) -> Vec<(u32, bool)> {
        if self.two_byte {
            bytes
                .chunks(2)
                .map(|c| {
                    let code = if c.len() == 2 {
                        (c[0] as u32) << 8 | c[1] as u32
                    } else {
                        c[0] as u32
                    };
                    (code, false)
                })
                .collect()
        } else {
            bytes.iter().map(|b| (*b as u32, *b == 32)).collect()
        }
    }

    /// Advance width of `code` in 1/1000 em.
    pub(crate) fn glyph_width(&self, code: u32) -> f64 {
        if let Some(w) = self.widths.get(&code) {
            return *w;
        }
        match self.builtin {
            Some(b) => b.width(code),
            None => self.default_width,
        }
    }

    /// Space width in em.
    pub(crate) fn space_width(&self) -> f64 {
        self.space_width
    }

    pub(crate) fn decode(&self, code: u32) -> String {
        match &self.decoder {
            Decoder::Table(table) => table
                .get(code as usize)
                .cloned()
                .flatten()
                .unwrap_or_default(),
            Decoder::CMap(map) => map
                .bytes_to_string(&[(code >> 8) as u8, code as u8])
                .ok()
                .filter(|s| !s.is_empty() && !s.contains('\u{FFFD}'))
                .unwrap_or_else(|| char::from_u32(code).map(String::from).unwrap_or_default()),
            Decoder::Ucs2 => char::from_u32(code).map(String::from).unwrap_or_default(),
        }
    }
}

fn latin1(b: u8) -> Option<String> {
    Some(char::from(b).to_string())
}

fn to_unicode_encoding<'a>(doc: &'a Document, font: &Dictionary) -> Option<Encoding<'a>> {
    font.get(b"ToUnicode").ok()?;
    // Resolve the ToUnicode map alone; lopdf prefers /Encoding when both are present.
    let mut only_cmap = Dictionary::new();
    only_cmap.set("Type", Object::Name(b"Font".to_vec()));
    only_cmap.set("ToUnicode", font.get(b"ToUnicode").ok()?.clone());
    // The map is owned by the returned encoding, so the temporary dictionary may drop.
    let encoding = only_cmap.get_font_encoding(doc).ok()?;
    match encoding {
        Encoding::UnicodeMapEncoding(map) => Some(Encoding::UnicodeMapEncoding(map)),
        _ => None,
    }
}

fn simple_decode_table(doc: &Document, font: &Dictionary) -> Vec<Option<String>> {
    let mut table: Vec<Option<String>> = vec![None; 256];
    if let Some(Encoding::UnicodeMapEncoding(map)) = to_unicode_encoding(doc, font) {
        for (code, slot) in table.iter_mut().enumerate() {
            if let Some(units) = map.get(code as u32, 1) {
                *slot = Some(String::from_utf16_lossy(&units));
            }
        }
    }
    let has_encoding = font.get(b"Encoding").is_ok();
    let encoding = font.get_font_encoding(doc).ok();
    for (code, slot) in table.iter_mut().enumerate() {
        if slot.is_some() {
            continue;
        }
        let decoded = match (&encoding, has_encoding) {
            (Some(enc @ Encoding::UnicodeMapEncoding(_)), _) | (Some(enc), true) => enc
                .bytes_to_string(&[code as u8])
                .ok()
                .filter(|s| !s.is_empty() && s != "\u{fffd}"),
            _ => None,
        };
        *slot = decoded.or_else(|| latin1(code as u8));
    }
    table
}

fn parse_cid_widths(doc: &Document, w: &[Object], out: &mut HashMap<u32, f64>) {
    let mut i = 0;
    while i < w.len() {
        let Some(first) = num(doc, &w[i]) else {
            break;
        };
        let first = first as u32;
        match w.get(i + 1).map(|o| deref(doc, o)) {
            Some(Object::Array(list)) => {
                for (k, v) in list.iter().enumerate() {
                    if let Some(v) = num(doc, v) {
                        out.insert(first + k as u32, v);
                    }
                }
                i += 2;
            }
            Some(other) => {
                let last = num(doc, other).unwrap_or(first as f64) as u32;
                if let Some(v) = w.get(i + 2).and_then(|o| num(doc, o)) {
                    // Cap pathological ranges.
                    for cid in first..=last.min(first.saturating_add(65535)) {
                        out.insert(cid, v);
                    }
                }
                i += 3;
            }
            None => break,
        }
    }
}

fn ascent_descent(doc: &Document, descriptor: Option<&Dictionary>, base_font: &str) -> (f64, f64) {
    let builtin = BuiltinMetrics::for_base_font(base_font).ascent_descent();
    let Some(d) = descriptor else {
        return builtin;
    };
    let ascent = d
        .get(b"Ascent")
        .ok()
        .and_then(|o| num(doc, o))
        .map(|v| v / 1000.0);
    let descent = d
        .get(b"Descent")
        .ok()
        .and_then(|o| num(doc, o))
        .map(|v| v / 1000.0);
    match (ascent, descent) {
        (Some(a), Some(dsc)) if a > 0.0 && a <= 2.0 && (-1.0..=0.0).contains(&dsc) => (a, dsc),
        _ => builtin,
    }
}

fn average(widths: &HashMap<u32, f64>) -> Option<f64> {
    let positive: Vec<f64> = widths.values().copied().filter(|w| *w > 0.0).collect();
    (!positive.is_empty()).then(|| positive.iter().sum::<f64>() / positive.len() as f64)
}

pub(crate) fn deref<'a>(doc: &'a Document, obj: &'a Object) -> &'a Object {
    doc.dereference(obj).map(|(_, o)| o).unwrap_or(obj)
}

pub(crate) fn num(doc: &Document, obj: &Object) -> Option<f64> {
    match deref(doc, obj) {
        Object::Integer(i) => Some(*i as f64),
        Object::Real(r) => Some(*r as f64),
        _ => None,
    }
}

pub(crate) fn name_of(obj: Option<&Object>) -> Option<String> {
    obj.and_then(|o| o.as_name().ok())
        .map(|n| String::from_utf8_lossy(n).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lopdf::dictionary;

    #[test]
    fn builtin_helvetica_metrics() {
        let doc = Document::with_version("1.4");
        let font = dictionary! {
            "Type" => "Font",
            "Subtype" => "Type1",
            "BaseFont" => "Helvetica",
        };
        let info = FontInfo::load(&doc, &font);
        assert_eq!(info.glyph_width(b'0' as u32), 556.0);
        assert_eq!(info.glyph_width(b'i' as u32), 222.0);
        assert!((info.space_width() - 0.278).abs() < 1e-12);
        assert_eq!(info.decode(b'A' as u32), "A");
    }

    #[test]
    fn explicit_widths_override_builtin() {
        let doc = Document::with_version("1.4");
        let font = dictionary! {
            "Type" => "Font",
            "Subtype" => "Type1",
            "BaseFont" => "Helvetica",
            "FirstChar" => 32,
            "LastChar" => 34,
            "Widths" => vec![300.into(), 400.into(), 500.into()],
        };
        let info = FontInfo::load(&doc, &font);
        assert_eq!(info.glyph_width(33), 400.0);
        assert!((info.space_width() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn courier_is_fixed_pitch() {
        let doc = Document::with_version("1.4");
        let font = dictionary! {
            "Type" => "Font",
            "Subtype" => "Type1",
            "BaseFont" => "Courier-Bold",
        };
        let info = FontInfo::load(&doc, &font);
        assert_eq!(info.glyph_width(b'W' as u32), 600.0);
        assert_eq!(info.glyph_width(b'.' as u32), 600.0);
    }

    #[test]
    fn cid_width_array_forms() {
        let doc = Document::with_version("1.4");
        let w = vec![
            Object::Integer(1),
            Object::Array(vec![Object::Integer(500), Object::Integer(600)]),
            Object::Integer(10),
            Object::Integer(12),
            Object::Integer(700),
        ];
        let mut out = HashMap::new();
        parse_cid_widths(&doc, &w, &mut out);
        assert_eq!(out[&1], 500.0);
        assert_eq!(out[&2], 600.0);
        assert_eq!(out[&11], 700.0);
        assert!(!out.contains_key(&13));
    }
}
