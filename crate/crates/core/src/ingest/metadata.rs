use chrono::{DateTime, FixedOffset, NaiveDate, TimeZone};
use lopdf::Object;
use serde::Serialize;

use super::Document;

/// Document information dictionary fields plus the page count.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metadata {
    pub title: Option<String>,
    pub author: Option<String>,
    pub subject: Option<String>,
    pub keywords: Option<String>,
    pub creator: Option<String>,
    pub producer: Option<String>,
    pub created: Option<DateTime<FixedOffset>>,
    pub modified: Option<DateTime<FixedOffset>>,
    pub n_pages: usize,
}

pub(crate) fn read(doc: &Document) -> Metadata {
    let pdf = doc.pdf();
    let mut meta = Metadata {
        n_pages: doc.n_pages(),
        ..Default::default()
    };
    let Some(info) = pdf
        .trailer
        .get(b"Info")
        .ok()
        .and_then(|o| pdf.dereference(o).ok())
        .and_then(|(_, o)| o.as_dict().ok())
    else {
        return meta;
    };
    let text = |key: &[u8]| {
        info.get(key)
            .ok()
            .and_then(|o| pdf.dereference(o).ok())
            .and_then(|(_, o)| match o {
                Object::String(bytes, _) => Some(decode_text_string(bytes)),
                _ => None,
            })
            .filter(|s| !s.is_empty())
    };
    meta.title = text(b"Title");
    meta.author = text(b"Author");
    meta.subject = text(b"Subject");
    meta.keywords = text(b"Keywords");
    meta.creator = text(b"Creator");
    meta.producer = text(b"Producer");
    meta.created = text(b"CreationDate").and_then(|s| parse_pdf_date(&s));
    meta.modified = text(b"ModDate").and_then(|s| parse_pdf_date(&s));
    meta
}

/// Decodes a PDF text string: UTF-16BE with BOM, UTF-8 with BOM, or PDFDocEncoding
/// (read as Latin-1, which agrees on the printable range).
pub fn decode_text_string(bytes: &[u8]) -> String {
    if let Some(rest) = bytes.strip_prefix(&[0xFE, 0xFF]) {
        let units: Vec<u16> = rest
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], *c.get(1).unwrap_or(&0)]))
            .collect();
        return String::from_utf16_lossy(&units);
    }
    if let Some(rest) = bytes.strip_prefix(&[0xEF, 0xBB, 0xBF]) {
        return String::from_utf8_lossy(rest).into_owned();
    }
    bytes.iter().map(|&b| char::from(b)).collect()
}

/// Parses `D:YYYYMMDDHHmmSSOHH'mm'`; every field after the year is optional.
pub fn parse_pdf_date(s: &str) -> Option<DateTime<FixedOffset>> {
    let s = s.trim();
    let s = s.strip_prefix("D:").unwrap_or(s);
    let digits: String = s.chars().take_while(char::is_ascii_digit).collect();
    if digits.len() < 4 {
        return None;
    }
    let field = |from: usize, len: usize, default: u32| -> Option<u32> {
        match digits.get(from..from + len) {
            Some(d) => d.parse().ok(),
            None => Some(default),
        }
    };
    let year: i32 = digits[0..4].parse().ok()?;
    let month = field(4, 2, 1)?;
    let day = field(6, 2, 1)?;
    let hour = field(8, 2, 0)?;
    let minute = field(10, 2, 0)?;
    let second = field(12, 2, 0)?;
    let naive = NaiveDate::from_ymd_opt(year, month, day)?.and_hms_opt(hour, minute, second)?;

    let rest = &s[digits.len()..];
    let offset_secs = match rest.chars().next() {
        Some(sign @ ('+' | '-')) => {
            let tz: String = rest[1..].chars().filter(char::is_ascii_digit).collect();
            let hh: i32 = tz.get(0..2).and_then(|v| v.parse().ok()).unwrap_or(0);
            let mm: i32 = tz.get(2..4).and_then(|v| v.parse().ok()).unwrap_or(0);
            let secs = hh * 3600 + mm * 60;
            if sign == '-' {
                -secs
            } else {
                secs
            }
        }
        _ => 0,
    };
    FixedOffset::east_opt(offset_secs)?
        .from_local_datetime(&naive)
        .single()
}
