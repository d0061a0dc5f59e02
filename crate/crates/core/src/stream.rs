//! Text-position ("stream") table reconstruction.
//!
//! Glyphs are merged into word chunks, chunks into visual rows, and column
//! boundaries are placed in horizontal gaps that stay clear across most rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PageContent;
use crate::model::{Method, PageRect, RawTable, TextChunk, TextElement};

/// Word merging thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordOptions {
    /// Glyphs merge when the gap is below this many space widths.
    pub word_gap_factor: f64,
    /// Lower bound on the merge gap in pt.
    pub min_gap: f64,
}

impl Default for WordOptions {
    fn default() -> Self {
        WordOptions {
            word_gap_factor: 0.5,
            min_gap: 0.3,
        }
    }
}

/// Column inference thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamOptions {
    pub words: WordOptions,
    /// Minimum gutter width in multiples of the median space width.
    pub min_column_gap_factor: f64,
    /// Fraction of rows in which a gutter must be free of text.
    pub row_clear_fraction: f64,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            words: WordOptions::default(),
            min_column_gap_factor: 1.25,
            row_clear_fraction: 0.8,
        }
    }
}

/// One visual line of chunks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub top: f64,
    pub bottom: f64,
    /// Sorted left to right.
    pub chunks: Vec<TextChunk>,
}

impl Row {
    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }
}

/// Clusters boxes into lines: any two boxes sharing at least half the smaller
/// height end up together (transitively). Returns groups of indices sorted by
/// band top, members sorted by left edge.
pub(crate) fn cluster_lines(boxes: &[PageRect]) -> Vec<Vec<usize>> {
    let n = boxes.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        boxes[a]
            .top
            .total_cmp(&boxes[b].top)
            .then(boxes[a].left.total_cmp(&boxes[b].left))
    });
    let max_h = boxes.iter().map(PageRect::height).fold(0.0, f64::max);
    let mut parent: Vec<usize> = (0..n).collect();
    for (oi, &i) in order.iter().enumerate() {
        for &j in order[..oi].iter().rev() {
            if boxes[i].top - boxes[j].top > max_h {
                break;
            }
            if boxes[i].shares_row_with(&boxes[j]) {
                union(&mut parent, i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for &i in &order {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    for g in &mut groups {
        g.sort_by(|&a, &b| {
            boxes[a]
                .left
                .total_cmp(&boxes[b].left)
                .then(boxes[a].top.total_cmp(&boxes[b].top))
        });
    }
    let band_top = |g: &Vec<usize>| {
        g.iter()
            .map(|&i| boxes[i].top)
            .fold(f64::INFINITY, f64::min)
    };
    groups.sort_by(|a, b| band_top(a).total_cmp(&band_top(b)));
    groups
}

pub(crate) fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

pub(crate) fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        parent[hi] = lo;
    }
}

/// Merges glyphs on the same line into word chunks.
pub fn merge_words(elements: &[TextElement], opts: &WordOptions) -> Vec<TextChunk> {
    let boxes: Vec<PageRect> = elements.iter().map(|e| e.bbox).collect();
    let mut out = Vec::new();
    for line in cluster_lines(&boxes) {
        let mut current: Option<TextChunk> = None;
        for i in line {
            let el = &elements[i];
            match current.as_mut() {
                Some(chunk) => {
                    let prev = chunk.elements.last().expect("chunks are never empty");
                    let threshold = (opts.word_gap_factor * prev.width_of_space).max(opts.min_gap);
                    if el.bbox.left - chunk.bbox.right < threshold {
                        chunk.push(el.clone());
                    } else {
                        out.push(
                            current
                                .replace(TextChunk::from_element(el.clone()))
                                .expect("set"),
                        );
                    }
                }
                None => current = Some(TextChunk::from_element(el.clone())),
            }
        }
        out.extend(current);
    }
    out
}

/// Groups chunks into rows sorted top to bottom.
pub fn group_rows(chunks: &[TextChunk]) -> Vec<Row> {
    let boxes: Vec<PageRect> = chunks.iter().map(|c| c.bbox).collect();
    cluster_lines(&boxes)
        .into_iter()
        .map(|group| {
            let chunks: Vec<TextChunk> = group.into_iter().map(|i| chunks[i].clone()).collect();
            let top = chunks
                .iter()
                .map(|c| c.bbox.top)
                .fold(f64::INFINITY, f64::min);
            let bottom = chunks
                .iter()
                .map(|c| c.bbox.bottom)
                .fold(f64::NEG_INFINITY, f64::max);
            Row {
                top,
                bottom,
                chunks,
            }
        })
        .collect()
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// Median space width over every glyph in `rows`.
pub fn median_space_width(rows: &[Row]) -> f64 {
    median(
        rows.iter()
            .flat_map(|r| &r.chunks)
            .flat_map(|c| &c.elements)
            .map(|e| e.width_of_space)
            .filter(|w| w.is_finite() && *w > 0.0)
            .collect(),
    )
    .unwrap_or(0.0)
}

/// Infers column separators (ascending x positions) from the horizontal gaps
/// between chunks.
pub fn infer_columns(rows: &[Row], opts: &StreamOptions) -> Vec<f64> {
    let mut edges: Vec<f64> = rows
        .iter()
        .flat_map(|r| &r.chunks)
        .flat_map(|c| [c.bbox.left, c.bbox.right])
        .collect();
    if rows.is_empty() || edges.len() < 4 {
        return Vec::new();
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let n_rows = rows.len() as f64;
    let max_covered = (1.0 - opts.row_clear_fraction) * n_rows + 1e-9;
    let min_gap = opts.min_column_gap_factor * median_space_width(rows);

    let clear: Vec<bool> = edges
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let covered = rows
                .iter()
                .filter(|r| r.chunks.iter().any(|c| c.bbox.left < b && c.bbox.right > a))
                .count();
            covered as f64 <= max_covered
        })
        .collect();

    let mut separators = Vec::new();
    let mut i = 0;
    while i < clear.len() {
        if !clear[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < clear.len() && clear[i] {
            i += 1;
        }
        let (gap_left, gap_right) = (edges[start], edges[i]);
        let interior = start > 0 && i < clear.len();
        if interior && gap_right - gap_left >= min_gap {
            separators.push((gap_left + gap_right) / 2.0);
        }
    }
    separators
}

/// Column index for an x position: separators at or right of `x` do not count,
/// so a midpoint exactly on a separator goes to the left column.
pub(crate) fn column_of(x: f64, separators: &[f64]) -> usize {
    separators.iter().filter(|&&s| s < x).count()
}

pub(crate) fn check_area(content: &PageContent, area: &PageRect) -> Result<()> {
    area.validate()?;
    if content.dims.contains(area) {
        Ok(())
    } else {
        Err(Error::AreaOutsidePage {
            area: area.to_string(),
            width: content.dims.width,
            height: content.dims.height,
        })
    }
}

/// Extracts one table from `area` using text positions only. Explicit
/// `columns` replace the inferred separators.
pub fn extract_stream(
    content: &PageContent,
    area: &PageRect,
    columns: Option<&[f64]>,
    opts: &StreamOptions,
) -> Result<RawTable> {
    check_area(content, area)?;
    let elements: Vec<TextElement> = content
        .elements
        .iter()
        .filter(|e| area.contains_midpoint_of(&e.bbox))
        .cloned()
        .collect();
    let chunks = merge_words(&elements, &opts.words);
    let rows = group_rows(&chunks);
    Ok(RawTable::new(
        content.page,
        *area,
        Method::Stream,
        rows_to_cells(&rows, columns, opts),
    ))
}

pub(crate) fn rows_to_cells(
    rows: &[Row],
    columns: Option<&[f64]>,
    opts: &StreamOptions,
) -> Vec<Vec<String>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let separators = match columns {
        Some(c) => c.to_vec(),
        None => infer_columns(rows, opts),
    };
    rows.iter()
        .map(|row| {
            let mut cells = vec![String::new(); separators.len() + 1];
            for chunk in &row.chunks {
                let cell = &mut cells[column_of(chunk.bbox.center_x(), &separators)];
                if !cell.is_empty() {
                    cell.push(' ');
                }
                cell.push_str(&chunk.text);
            }
            cells
        })
        .collect()
}
