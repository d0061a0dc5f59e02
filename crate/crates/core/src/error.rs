use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),

    #[error("invalid extraction options: {0}")]
    InvalidOptions(String),

    #[error("page {page} out of range (document has {n_pages} pages)")]
    PageOutOfRange { page: usize, n_pages: usize },

    #[error("area {area} lies outside the page ({width} x {height} pt)")]
    AreaOutsidePage {
        area: String,
        width: f64,
        height: f64,
    },

    #[error("could not download {url}: {reason}")]
    Download { url: String, reason: String },

    #[error("{0} is not a PDF file")]
    NotPdf(String),

    #[error("document is encrypted and requires a password")]
    PasswordRequired,

    #[error("wrong password")]
    WrongPassword,

    #[error("malformed PDF: {0}")]
    Pdf(#[from] lopdf::Error),

    #[error("document has no pages")]
    EmptyDocument,

    #[error("cannot write to {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}
