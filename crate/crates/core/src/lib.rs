//! Table extraction from text-based PDF pages.
//!
//! Two reconstruction methods are provided: `lattice` for tables drawn with
//! ruling lines and `stream` for tables laid out with whitespace. A detector
//! proposes table areas and picks a method per area, and extracted grids can
//! be typed and written as CSV, TSV or JSON.
//!
//! ```no_run
//! use tabex::{extract_typed, write_table, Document, ExtractionOptions, Format};
//!
//! let doc = Document::open("report.pdf", None)?;
//! for table in extract_typed(&doc, &ExtractionOptions::default())? {
//!     print!("{}", String::from_utf8_lossy(&write_table(&table, Format::Csv)));
//! }
//! # Ok::<(), tabex::Error>(())
//! ```

pub mod detect;
pub mod error;
pub mod extract;
pub mod ingest;
pub mod lattice;
pub mod model;
pub mod stream;
pub mod synth;
pub mod typed;

pub use detect::{detect_tables, resolve_method, DetectOptions, DetectedTable};
pub use error::{Error, Result};
pub use extract::{extract_tables, extract_tables_with, extract_typed};
pub use ingest::{
    merge_pdfs, page_text, remote, BasicRenderer, Document, Metadata, PageContent, PageRenderer,
};
pub use lattice::{extract_lattice, find_cells, snap_rulings, CellRegion, LatticeOptions};
pub use model::{
    ExtractionOptions, Method, MethodChoice, Orientation, PageDims, PageRect, RawTable, Ruling,
    TextChunk, TextElement,
};
pub use stream::{
    extract_stream, group_rows, infer_columns, merge_words, Row, StreamOptions, WordOptions,
};
pub use typed::{
    apply_header, infer_column_types, write_table, ColumnType, Format, TypedTable, Value,
};
