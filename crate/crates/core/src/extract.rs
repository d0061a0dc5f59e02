//! End-to-end extraction: options in, tables out.

use crate::detect::{detect_tables, resolve_method, DetectOptions};
use crate::error::{Error, Result};
use crate::ingest::{Document, PageContent};
use crate::lattice::extract_lattice;
use crate::model::{ExtractionOptions, Method, MethodChoice, PageRect, RawTable};
use crate::stream::extract_stream;
use crate::typed::TypedTable;

/// Extracts raw tables from the selected pages, in page order and then in
/// reading order within a page. Empty tables are dropped.
pub fn extract_tables(doc: &Document, options: &ExtractionOptions) -> Result<Vec<RawTable>> {
    extract_tables_with(doc, options, &DetectOptions::default())
}

pub fn extract_tables_with(
    doc: &Document,
    options: &ExtractionOptions,
    tuning: &DetectOptions,
) -> Result<Vec<RawTable>> {
    options.validate()?;
    let pages = doc.resolve_pages(options.pages.as_deref())?;
    if let Some(areas) = &options.area {
        if areas.len() != pages.len() {
            return Err(Error::InvalidOptions(format!(
                "{} areas given for {} pages; the lists must have equal length",
                areas.len(),
                pages.len()
            )));
        }
    }

    let mut tables = Vec::new();
    for (i, &page) in pages.iter().enumerate() {
        let content = doc.read_page_content(page)?;
        let found = match &options.area {
            Some(areas) => extract_area(&content, &areas[i], options, tuning)?,
            None if options.guess => {
                let mut out = Vec::new();
                for detected in detect_tables(&content, tuning) {
                    let method = match options.method {
                        MethodChoice::Lattice => Method::Lattice,
                        MethodChoice::Stream => Method::Stream,
                        MethodChoice::Decide => detected.method,
                    };
                    out.extend(run(&content, &detected.area, method, options, tuning)?);
                }
                out
            }
            None => extract_area(&content, &content.full_area(), options, tuning)?,
        };
        tables.extend(found.into_iter().filter(|t| !t.is_empty()));
    }
    Ok(tables)
}

fn extract_area(
    content: &PageContent,
    area: &PageRect,
    options: &ExtractionOptions,
    tuning: &DetectOptions,
) -> Result<Vec<RawTable>> {
    let method = resolve_method(options.method, content, area, tuning);
    run(content, area, method, options, tuning)
}

fn run(
    content: &PageContent,
    area: &PageRect,
    method: Method,
    options: &ExtractionOptions,
    tuning: &DetectOptions,
) -> Result<Vec<RawTable>> {
    match method {
        Method::Lattice => extract_lattice(content, Some(area), &tuning.lattice),
        Method::Stream => Ok(vec![extract_stream(
            content,
            area,
            options.columns.as_deref(),
            &tuning.lattice.stream,
        )?]),
    }
}

/// Extracts and types tables, using the first row as names when `col_names` is set.
pub fn extract_typed(doc: &Document, options: &ExtractionOptions) -> Result<Vec<TypedTable>> {
    Ok(extract_tables(doc, options)?
        .iter()
        .map(|raw| TypedTable::from_raw(raw, options.col_names))
        .collect())
}
