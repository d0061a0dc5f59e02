//! Opening PDF documents and reading page content.
//!
//! A [`Document`] wraps a parsed PDF plus the page geometry needed to map
//! PDF user space onto top-left-origin page coordinates. Remote sources are
//! downloaded into a managed temporary directory first (see [`remote`]).

mod content;
pub(crate) mod fonts;
pub mod metadata;
pub mod pdfops;
pub mod remote;
pub mod render;

use std::path::{Path, PathBuf};

use lopdf::{LoadOptions, ObjectId};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PageDims, PageRect, Ruling, TextElement};
use crate::stream::{group_rows, merge_words, WordOptions};

pub use metadata::Metadata;
pub use pdfops::merge_pdfs;
pub use render::{BasicRenderer, PageRenderer};

/// Immutable snapshot of one page: glyphs, rulings and size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PageContent {
    /// 1-based page index.
    pub page: usize,
    pub dims: PageDims,
    pub elements: Vec<TextElement>,
    pub rulings: Vec<Ruling>,
}

impl PageContent {
    pub fn new(
        page: usize,
        dims: PageDims,
        elements: Vec<TextElement>,
        rulings: Vec<Ruling>,
    ) -> Self {
        PageContent {
            page,
            dims,
            elements,
            rulings,
        }
    }

    pub fn full_area(&self) -> PageRect {
        PageRect::full_page(self.dims)
    }
}

#[derive(Clone, Debug)]
struct PageInfo {
    id: ObjectId,
    dims: PageDims,
    origin_x: f64,
    top_y: f64,
}

/// An opened PDF document.
pub struct Document {
    source: String,
    local_path: PathBuf,
    pdf: lopdf::Document,
    pages: Vec<PageInfo>,
}

impl std::fmt::Debug for Document {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Document")
            .field("source", &self.source)
            .field("local_path", &self.local_path)
            .field("n_pages", &self.pages.len())
            .finish()
    }
}

/// True when `source` names an http(s) resource rather than a local file.
pub fn is_url(source: &str) -> bool {
    let lower = source.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://")
}

impl Document {
    /// Opens a local path or http(s) URL. URLs are downloaded to the temporary
    /// download directory first.
    pub fn open(source: &str, password: Option<&str>) -> Result<Document> {
        let local_path = if is_url(source) {
            remote::fetch(source)?
        } else {
            PathBuf::from(source)
        };
        let bytes = std::fs::read(&local_path)?;
        let mut doc = Self::from_bytes(&bytes, password, source)?;
        doc.local_path = local_path;
        Ok(doc)
    }

    pub fn open_path(path: &Path) -> Result<Document> {
        Self::open(&path.to_string_lossy(), None)
    }

    fn from_bytes(bytes: &[u8], password: Option<&str>, source: &str) -> Result<Document> {
        if !looks_like_pdf(bytes) {
            return Err(Error::NotPdf(source.to_string()));
        }
        let options = match password {
            Some(p) => LoadOptions::with_password(p),
            None => LoadOptions::default(),
        };
        let pdf = match lopdf::Document::load_mem_with_options(bytes, options) {
            Ok(pdf) => pdf,
            Err(lopdf::Error::InvalidPassword) | Err(lopdf::Error::Decryption(_)) => {
                return Err(password_error(password))
            }
            Err(e) => return Err(e.into()),
        };
        if pdf.is_encrypted() {
            return Err(password_error(password));
        }
        let pages = collect_pages(&pdf)?;
        Ok(Document {
            source: source.to_string(),
            local_path: PathBuf::new(),
            pdf,
            pages,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn local_path(&self) -> &Path {
        &self.local_path
    }

    /// File stem used for derived output names (`report.pdf` -> `report`).
    pub fn stem(&self) -> String {
        let name = self
            .source
            .rsplit(['/', '\\'])
            .next()
            .unwrap_or("document")
            .split(['?', '#'])
            .next()
            .unwrap_or("document");
        let stem = Path::new(name)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if stem.is_empty() {
            "document".to_string()
        } else {
            stem
        }
    }

    pub fn n_pages(&self) -> usize {
        self.pages.len()
    }

    pub(crate) fn pdf(&self) -> &lopdf::Document {
        &self.pdf
    }

    fn page_info(&self, page: usize) -> Result<&PageInfo> {
        if page == 0 || page > self.pages.len() {
            return Err(Error::PageOutOfRange {
                page,
                n_pages: self.pages.len(),
            });
        }
        Ok(&self.pages[page - 1])
    }

    /// Resolves an optional page selection into checked 1-based indices.
    pub fn resolve_pages(&self, pages: Option<&[usize]>) -> Result<Vec<usize>> {
        match pages {
            None => Ok((1..=self.n_pages()).collect()),
            Some(list) => {
                for &p in list {
                    self.page_info(p)?;
                }
                Ok(list.to_vec())
            }
        }
    }

    /// Width and height in pt of the requested pages (all pages when `None`).
    pub fn page_dims(&self, pages: Option<&[usize]>) -> Result<Vec<PageDims>> {
        self.resolve_pages(pages)?
            .into_iter()
            .map(|p| Ok(self.page_info(p)?.dims))
            .collect()
    }

    /// Positioned glyphs and rulings of one page.
    pub fn read_page_content(&self, page: usize) -> Result<PageContent> {
        let info = self.page_info(page)?;
        let glyphs = content::Interpreter::new(&self.pdf, info.dims, info.origin_x, info.top_y)
            .run_page(info.id);
        Ok(PageContent::new(
            page,
            info.dims,
            glyphs.elements,
            glyphs.rulings,
        ))
    }

    /// Reading-order text, one string per requested page. With `areas`, each page keeps
    /// only the words whose midpoint falls inside its area.
    pub fn extract_text(
        &self,
        pages: Option<&[usize]>,
        areas: Option<&[PageRect]>,
    ) -> Result<Vec<String>> {
        let pages = self.resolve_pages(pages)?;
        if let Some(areas) = areas {
            if areas.len() != pages.len() {
                return Err(Error::InvalidOptions(format!(
                    "{} areas given for {} pages; the lists must have equal length",
                    areas.len(),
                    pages.len()
                )));
            }
        }
        pages
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let content = self.read_page_content(p)?;
                Ok(page_text(&content, areas.map(|a| a[i])))
            })
            .collect()
    }

    pub fn metadata(&self) -> Metadata {
        metadata::read(self)
    }
}

/// Reading-order text of a page: rows top-to-bottom, words left-to-right.
pub fn page_text(content: &PageContent, area: Option<PageRect>) -> String {
    let chunks = merge_words(&content.elements, &WordOptions::default());
    let chunks: Vec<_> = match area {
        Some(a) => chunks
            .into_iter()
            .filter(|c| a.contains_midpoint_of(&c.bbox))
            .collect(),
        None => chunks,
    };
    group_rows(&chunks)
        .iter()
        .map(|row| {
            row.chunks
                .iter()
                .map(|c| c.text.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn password_error(password: Option<&str>) -> Error {
    if password.is_some() {
        Error::WrongPassword
    } else {
        Error::PasswordRequired
    }
}

fn looks_like_pdf(bytes: &[u8]) -> bool {
    let head = &bytes[..bytes.len().min(1024)];
    head.windows(5).any(|w| w == b"%PDF-")
}

fn collect_pages(pdf: &lopdf::Document) -> Result<Vec<PageInfo>> {
    let ids: Vec<ObjectId> = pdf.get_pages().into_values().collect();
    if ids.is_empty() {
        return Err(Error::EmptyDocument);
    }
    ids.into_iter()
        .map(|id| {
            let [x0, y0, x1, y1] =
                inherited_box(pdf, id, b"MediaBox").unwrap_or([0.0, 0.0, 612.0, 792.0]);
            let (left, right) = (x0.min(x1), x0.max(x1));
            let (bottom, top) = (y0.min(y1), y0.max(y1));
            let dims = PageDims::new(right - left, top - bottom)?;
            Ok(PageInfo {
                id,
                dims,
                origin_x: left,
                top_y: top,
            })
        })
        .collect()
}

pub(crate) fn inherited_attr<'a>(
    pdf: &'a lopdf::Document,
    page: ObjectId,
    key: &[u8],
) -> Option<&'a lopdf::Object> {
    let mut node = pdf.get_dictionary(page).ok();
    let mut depth = 0;
    while let Some(dict) = node {
        if let Ok(v) = dict.get(key) {
            return Some(v);
        }
        node = dict
            .get(b"Parent")
            .ok()
            .and_then(|p| p.as_reference().ok())
            .and_then(|id| pdf.get_dictionary(id).ok());
        depth += 1;
        if depth > 64 {
            break;
        }
    }
    None
}

fn inherited_box(pdf: &lopdf::Document, page: ObjectId, key: &[u8]) -> Option<[f64; 4]> {
    let obj = fonts::deref(pdf, inherited_attr(pdf, page, key)?);
    let arr = obj.as_array().ok()?;
    if arr.len() != 4 {
        return None;
    }
    let mut out = [0.0; 4];
    for (slot, v) in out.iter_mut().zip(arr) {
        *slot = fonts::num(pdf, v)?;
    }
    Some(out)
}
