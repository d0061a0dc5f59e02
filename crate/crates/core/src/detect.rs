//! Table area detection and per-area method selection.

use serde::{Deserialize, Serialize};

use crate::ingest::PageContent;
use crate::lattice::{bounding_box, group_cells, page_cells, LatticeOptions};
use crate::model::{Method, MethodChoice, PageRect, TextElement};
use crate::stream::{group_rows, infer_columns, merge_words, Row};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    pub lattice: LatticeOptions,
    /// Minimum number of closed cells for a ruled region to count as a table.
    pub min_lattice_cells: usize,
    /// Vertical whitespace, in median line heights, that separates text blocks.
    pub block_gap_lines: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            lattice: LatticeOptions::default(),
            min_lattice_cells: 4,
            block_gap_lines: 3.0,
        }
    }
}

/// A proposed table area and the method suited to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectedTable {
    pub area: PageRect,
    pub method: Method,
}

/// Proposes table areas on a page, sorted top-to-bottom then left-to-right.
pub fn detect_tables(content: &PageContent, opts: &DetectOptions) -> Vec<DetectedTable> {
    let tol = opts.lattice.snap_tolerance;
    let mut found: Vec<DetectedTable> = group_cells(&page_cells(content, tol), tol)
        .into_iter()
        .filter(|g| g.len() >= opts.min_lattice_cells)
        .filter_map(|g| bounding_box(&g))
        .map(|area| DetectedTable {
            area: area.clamp_to(content.dims),
            method: Method::Lattice,
        })
        .collect();

    let loose: Vec<TextElement> = content
        .elements
        .iter()
        .filter(|e| !found.iter().any(|t| t.area.contains_midpoint_of(&e.bbox)))
        .cloned()
        .collect();
    let stream_opts = &opts.lattice.stream;
    let rows = group_rows(&merge_words(&loose, &stream_opts.words));
    for block in split_blocks(rows, opts.block_gap_lines) {
        if block.len() < 2 || infer_columns(&block, stream_opts).is_empty() {
            continue;
        }
        let rects: Vec<PageRect> = block
            .iter()
            .flat_map(|r| r.chunks.iter().map(|c| c.bbox))
            .collect();
        if let Some(area) = bounding_box(&rects) {
            found.push(DetectedTable {
                area: area.clamp_to(content.dims),
                method: Method::Stream,
            });
        }
    }
    merge_overlapping(found)
}

/// Splits rows wherever the vertical gap reaches `gap_lines` median row heights.
fn split_blocks(rows: Vec<Row>, gap_lines: f64) -> Vec<Vec<Row>> {
    let mut heights: Vec<f64> = rows.iter().map(Row::height).collect();
    heights.sort_by(f64::total_cmp);
    let median = heights.get(heights.len() / 2).copied().unwrap_or(0.0);
    let threshold = gap_lines * median;
    let mut blocks: Vec<Vec<Row>> = Vec::new();
    for row in rows {
        match blocks.last_mut() {
            Some(block) if row.top - block.last().expect("non-empty").bottom < threshold => {
                block.push(row)
            }
            _ => blocks.push(vec![row]),
        }
    }
    blocks
}

fn merge_overlapping(mut tables: Vec<DetectedTable>) -> Vec<DetectedTable> {
    loop {
        let mut merged = false;
        'outer: for i in 0..tables.len() {
            for j in i + 1..tables.len() {
                if overlaps(&tables[i].area, &tables[j].area) {
                    let b = tables.remove(j);
                    let a = &mut tables[i];
                    a.area = a.area.union(&b.area);
                    if b.method == Method::Lattice {
                        a.method = Method::Lattice;
                    }
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    tables.sort_by(|a, b| {
        a.area
            .top
            .total_cmp(&b.area.top)
            .then(a.area.left.total_cmp(&b.area.left))
    });
    tables
}

/// Overlap with positive area; touching edges do not count.
fn overlaps(a: &PageRect, b: &PageRect) -> bool {
    a.left.max(b.left) < a.right.min(b.right) && a.top.max(b.top) < a.bottom.min(b.bottom)
}

/// Picks the method for an area: explicit choices win, otherwise lattice when
/// at least `min_lattice_cells` closed cells have their centre in the area.
pub fn resolve_method(
    choice: MethodChoice,
    content: &PageContent,
    area: &PageRect,
    opts: &DetectOptions,
) -> Method {
    match choice {
        MethodChoice::Lattice => Method::Lattice,
        MethodChoice::Stream => Method::Stream,
        MethodChoice::Decide => {
            let inside = page_cells(content, opts.lattice.snap_tolerance)
                .iter()
                .filter(|c| area.contains_point(c.center_x(), c.center_y()))
                .count();
            if inside >= opts.min_lattice_cells {
                Method::Lattice
            } else {
                Method::Stream
            }
        }
    }
}
