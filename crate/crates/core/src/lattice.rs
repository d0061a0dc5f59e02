//! Ruling-based ("lattice") table reconstruction.
//!
//! Rulings are snapped, intersected into closed cells, cells are grouped into
//! tables by shared edges, and text is assigned to cells by glyph midpoint.

use serde::{Deserialize, Serialize};

use crate::ingest::PageContent;
use crate::model::{Method, Orientation, PageRect, RawTable, Ruling, TextElement};
use crate::stream::{
    self, check_area, find, group_rows, infer_columns, merge_words, union, StreamOptions,
};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeOptions {
    /// Distance in pt within which rulings snap together and lines count as touching.
    pub snap_tolerance: f64,
    /// Used for word merging inside cells and for single-column fallbacks.
    pub stream: StreamOptions,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions {
            snap_tolerance: 2.0,
            stream: StreamOptions::default(),
        }
    }
}

/// A closed cell and the text inside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRegion {
    pub rect: PageRect,
    /// Lines of the cell joined with `\r`.
    pub text: String,
}

/// Merges collinear rulings whose positions lie within `tol` and whose spans
/// overlap or abut within `tol`. The merged position is the group mean.
/// Repeats until nothing merges, so the result is a fixed point.
pub fn snap_rulings(rulings: &[Ruling], tol: f64) -> Vec<Ruling> {
    let mut current: Vec<Ruling> = rulings.to_vec();
    loop {
        let before = current.len();
        current = snap_once(&current, tol);
        if current.len() == before {
            return current;
        }
    }
}

fn snap_once(rulings: &[Ruling], tol: f64) -> Vec<Ruling> {
    let mut out = Vec::new();
    for orientation in [Orientation::Horizontal, Orientation::Vertical] {
        let mut group: Vec<Ruling> = rulings
            .iter()
            .filter(|r| r.orientation == orientation)
            .copied()
            .collect();
        group.sort_by(|a, b| {
            a.position
                .total_cmp(&b.position)
                .then(a.start.total_cmp(&b.start))
        });
        let n = group.len();
        let mut parent: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                if group[j].position - group[i].position > tol {
                    break;
                }
                let (a, b) = (&group[i], &group[j]);
                if a.start <= b.end + tol && b.start <= a.end + tol {
                    union(&mut parent, i, j);
                }
            }
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let root = find(&mut parent, i);
            members[root].push(i);
        }
        for m in members.into_iter().filter(|m| !m.is_empty()) {
            let position = m.iter().map(|&i| group[i].position).sum::<f64>() / m.len() as f64;
            let start = m
                .iter()
                .map(|&i| group[i].start)
                .fold(f64::INFINITY, f64::min);
            let end = m
                .iter()
                .map(|&i| group[i].end)
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(Ruling {
                orientation,
                position,
                start,
                end,
            });
        }
    }
    out.sort_by(|a, b| {
        a.orientation
            .cmp(&b.orientation)
            .then(a.position.total_cmp(&b.position))
            .then(a.start.total_cmp(&b.start))
    });
    out
}

fn covers(rulings: &[Ruling], position: f64, from: f64, to: f64, tol: f64) -> bool {
    rulings
        .iter()
        .any(|r| (r.position - position).abs() <= tol && r.start <= from + tol && r.end >= to - tol)
}

/// Finds closed cells. Every intersection is tried as a top-left corner; the
/// first rectangle (shortest, then narrowest) closed on all four sides wins.
/// Rectangles that contain another cell are dropped, so nested boxes yield the
/// innermost cells.
pub fn find_cells(horizontal: &[Ruling], vertical: &[Ruling], tol: f64) -> Vec<PageRect> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for h in horizontal {
        for v in vertical {
            let crosses = v.position >= h.start - tol
                && v.position <= h.end + tol
                && h.position >= v.start - tol
                && h.position <= v.end + tol;
            if crosses {
                points.push((v.position, h.position));
            }
        }
    }
    points.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    points.dedup();
    let is_point = |x: f64, y: f64| {
        points
            .iter()
            .any(|&(px, py)| (px - x).abs() <= tol && (py - y).abs() <= tol)
    };

    let mut cells: Vec<PageRect> = Vec::new();
    for &(x0, y0) in &points {
        let below = points.iter().filter(|&&(x, y)| x == x0 && y > y0);
        'search: for &(_, y1) in below {
            if !covers(vertical, x0, y0, y1, tol) {
                continue;
            }
            let right = points.iter().filter(|&&(x, y)| y == y0 && x > x0);
            for &(x1, _) in right {
                if !covers(horizontal, y0, x0, x1, tol) {
                    continue;
                }
                if is_point(x1, y1)
                    && covers(vertical, x1, y0, y1, tol)
                    && covers(horizontal, y1, x0, x1, tol)
                {
                    if y1 - y0 > tol && x1 - x0 > tol {
                        cells.push(PageRect::new_unchecked(y0, x0, y1, x1));
                    }
                    break 'search;
                }
            }
        }
    }
    let contains_other = |i: usize| {
        cells.iter().enumerate().any(|(j, other)| {
            j != i
                && cells[i].expand(tol).contains_rect(other)
                && cells[i] != *other
                && other.area() < cells[i].area()
        })
    };
    let mut kept: Vec<PageRect> = (0..cells.len())
        .filter(|&i| !contains_other(i))
        .map(|i| cells[i])
        .collect();
    kept.sort_by(|a, b| a.top.total_cmp(&b.top).then(a.left.total_cmp(&b.left)));
    kept.dedup();
    kept
}

/// Snaps the page rulings (clipped to the page) and returns its closed cells.
pub fn page_cells(content: &PageContent, tol: f64) -> Vec<PageRect> {
    let clipped: Vec<Ruling> = content
        .rulings
        .iter()
        .filter_map(|r| r.clip(content.dims))
        .collect();
    let snapped = snap_rulings(&clipped, tol);
    let (h, v): (Vec<Ruling>, Vec<Ruling>) = snapped.into_iter().partition(Ruling::is_horizontal);
    find_cells(&h, &v, tol)
}

fn share_edge(a: &PageRect, b: &PageRect, tol: f64) -> bool {
    let overlap = |a0: f64, a1: f64, b0: f64, b1: f64| a1.min(b1) - a0.max(b0) > tol;
    let side_by_side = ((a.right - b.left).abs() <= tol || (b.right - a.left).abs() <= tol)
        && overlap(a.top, a.bottom, b.top, b.bottom);
    let stacked = ((a.bottom - b.top).abs() <= tol || (b.bottom - a.top).abs() <= tol)
        && overlap(a.left, a.right, b.left, b.right);
    side_by_side || stacked
}

/// Splits cells into edge-connected groups, each sorted top-to-bottom,
/// left-to-right; groups are ordered by their first cell.
pub fn group_cells(cells: &[PageRect], tol: f64) -> Vec<Vec<PageRect>> {
    let n = cells.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if share_edge(&cells[i], &cells[j], tol) {
                union(&mut parent, i, j);
            }
        }
    }
    let mut groups: Vec<Vec<PageRect>> = vec![Vec::new(); n];
    for (i, cell) in cells.iter().enumerate() {
        let root = find(&mut parent, i);
        groups[root].push(*cell);
    }
    let mut groups: Vec<Vec<PageRect>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    for g in &mut groups {
        g.sort_by(|a, b| a.top.total_cmp(&b.top).then(a.left.total_cmp(&b.left)));
    }
    groups.sort_by(|a, b| {
        a[0].top
            .total_cmp(&b[0].top)
            .then(a[0].left.total_cmp(&b[0].left))
    });
    groups
}

pub fn bounding_box(rects: &[PageRect]) -> Option<PageRect> {
    rects.iter().copied().reduce(|a, b| a.union(&b))
}

/// Sorted distinct values, merging values within `tol`.
fn distinct(mut values: Vec<f64>, tol: f64) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        match out.last() {
            Some(&last) if v - last <= tol => {}
            _ => out.push(v),
        }
    }
    out
}

fn slot(edges: &[f64], value: f64, tol: f64) -> usize {
    edges
        .iter()
        .position(|&e| (e - value).abs() <= tol)
        .unwrap_or_else(|| {
            edges
                .iter()
                .filter(|&&e| e < value)
                .count()
                .saturating_sub(1)
        })
}

/// Text of a set of glyphs: lines joined with `\r`, words with a space.
fn cell_text(elements: &[TextElement], opts: &StreamOptions) -> String {
    group_rows(&merge_words(elements, &opts.words))
        .iter()
        .map(|row| {
            row.chunks
                .iter()
                .map(|c| c.text.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\r")
}

/// Extracts every ruled table on the page, or only those cells whose centre
/// lies in `area`.
pub fn extract_lattice(
    content: &PageContent,
    area: Option<&PageRect>,
    opts: &LatticeOptions,
) -> Result<Vec<RawTable>> {
    if let Some(area) = area {
        check_area(content, area)?;
    }
    let tol = opts.snap_tolerance;
    let cells: Vec<PageRect> = page_cells(content, tol)
        .into_iter()
        .filter(|c| area.is_none_or(|a| a.contains_point(c.center_x(), c.center_y())))
        .collect();

    // Each glyph goes to the first cell (in reading order) holding its midpoint.
    let mut per_cell: Vec<Vec<TextElement>> = vec![Vec::new(); cells.len()];
    for el in &content.elements {
        if let Some(i) = cells.iter().position(|c| c.contains_midpoint_of(&el.bbox)) {
            per_cell[i].push(el.clone());
        }
    }
    let index_of = |rect: &PageRect| {
        cells
            .iter()
            .position(|c| c == rect)
            .expect("cell from list")
    };

    let mut tables = Vec::new();
    for group in group_cells(&cells, tol) {
        let bbox = bounding_box(&group).expect("groups are non-empty");
        let xs = distinct(group.iter().flat_map(|c| [c.left, c.right]).collect(), tol);
        let ys = distinct(group.iter().flat_map(|c| [c.top, c.bottom]).collect(), tol);
        let (n_rows, n_cols) = (ys.len() - 1, xs.len() - 1);

        let grid = if n_cols == 1 {
            single_column_rows(&group, &per_cell, &index_of, &opts.stream)
        } else {
            let mut grid = vec![vec![String::new(); n_cols]; n_rows];
            for cell in &group {
                let (r, c) = (slot(&ys, cell.top, tol), slot(&xs, cell.left, tol));
                grid[r][c] = cell_text(&per_cell[index_of(cell)], &opts.stream);
            }
            grid
        };
        tables.push(RawTable::new(content.page, bbox, Method::Lattice, grid));
    }
    Ok(tables)
}

/// A table whose rulings give a single column: rows follow the rulings, columns
/// come from text gaps across all of its cells. Each output cell joins its lines
/// with `\r`.
fn single_column_rows(
    group: &[PageRect],
    per_cell: &[Vec<TextElement>],
    index_of: &dyn Fn(&PageRect) -> usize,
    opts: &StreamOptions,
) -> Vec<Vec<String>> {
    let all: Vec<TextElement> = group
        .iter()
        .flat_map(|c| per_cell[index_of(c)].iter().cloned())
        .collect();
    let separators = infer_columns(&group_rows(&merge_words(&all, &opts.words)), opts);
    group
        .iter()
        .map(|cell| {
            let mut columns: Vec<Vec<TextElement>> = vec![Vec::new(); separators.len() + 1];
            for chunk in merge_words(&per_cell[index_of(cell)], &opts.words) {
                let col = stream::column_of(chunk.bbox.center_x(), &separators);
                columns[col].extend(chunk.elements);
            }
            columns.iter().map(|els| cell_text(els, opts)).collect()
        })
        .collect()
}

/// Closed cells from `page_cells` with their text, for inspection.
pub fn cell_regions(content: &PageContent, opts: &LatticeOptions) -> Vec<CellRegion> {
    let cells = page_cells(content, opts.snap_tolerance);
    let mut per_cell: Vec<Vec<TextElement>> = vec![Vec::new(); cells.len()];
    for el in &content.elements {
        if let Some(i) = cells.iter().position(|c| c.contains_midpoint_of(&el.bbox)) {
            per_cell[i].push(el.clone());
        }
    }
    cells
        .into_iter()
        .zip(per_cell)
        .map(|(rect, els)| CellRegion {
            rect,
            text: cell_text(&els, &opts.stream),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PageDims;
    use proptest::prelude::*;

    const TOL: f64 = 2.0;

    fn full_grid(xs: &[f64], ys: &[f64]) -> (Vec<Ruling>, Vec<Ruling>) {
        let (x0, x1) = (xs[0], *xs.last().unwrap());
        let (y0, y1) = (ys[0], *ys.last().unwrap());
        (
            ys.iter().map(|&y| Ruling::horizontal(y, x0, x1)).collect(),
            xs.iter().map(|&x| Ruling::vertical(x, y0, y1)).collect(),
        )
    }

    /// Brute force: every pair of x and y lines bounding a rectangle that is
    /// closed on all sides and crossed by no ruling.
    fn brute_force_cells(h: &[Ruling], v: &[Ruling]) -> Vec<PageRect> {
        let mut xs: Vec<f64> = v.iter().map(|r| r.position).collect();
        let mut ys: Vec<f64> = h.iter().map(|r| r.position).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        for (i, &xa) in xs.iter().enumerate() {
            for &xb in &xs[i + 1..] {
                for (k, &ya) in ys.iter().enumerate() {
                    for &yb in &ys[k + 1..] {
                        let closed = covers(h, ya, xa, xb, 0.0)
                            && covers(h, yb, xa, xb, 0.0)
                            && covers(v, xa, ya, yb, 0.0)
                            && covers(v, xb, ya, yb, 0.0);
                        let crossed = h.iter().any(|r| {
                            r.position > ya && r.position < yb && r.start < xb && r.end > xa
                        }) || v.iter().any(|r| {
                            r.position > xa && r.position < xb && r.start < yb && r.end > ya
                        });
                        if closed && !crossed {
                            out.push(PageRect::new_unchecked(ya, xa, yb, xb));
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.top.total_cmp(&b.top).then(a.left.total_cmp(&b.left)));
        out
    }

    #[test]
    fn snapping_merges_collinear_segments() {
        let r = snap_rulings(
            &[
                Ruling::horizontal(100.0, 10.0, 50.0),
                Ruling::horizontal(100.4, 50.0, 90.0),
            ],
            1.0,
        );
        assert_eq!(r.len(), 1);
        assert!((r[0].position - 100.2).abs() < 1e-9);
        assert_eq!((r[0].start, r[0].end), (10.0, 90.0));

        let single = [Ruling::vertical(5.0, 0.0, 10.0)];
        assert_eq!(snap_rulings(&single, 1.0), single);

        let parallel = [
            Ruling::horizontal(10.0, 0.0, 50.0),
            Ruling::horizontal(15.0, 0.0, 50.0),
        ];
        assert_eq!(snap_rulings(&parallel, 1.0).len(), 2);
    }

    #[test]
    fn two_by_two_grid_has_four_cells() {
        let (h, v) = full_grid(&[0.0, 50.0, 100.0], &[0.0, 20.0, 40.0]);
        assert_eq!(find_cells(&h, &v, TOL).len(), 4);
    }

    #[test]
    fn single_outline_is_one_cell() {
        let (h, v) = full_grid(&[10.0, 90.0], &[10.0, 30.0]);
        assert_eq!(
            find_cells(&h, &v, TOL),
            vec![PageRect::new_unchecked(10.0, 10.0, 30.0, 90.0)]
        );
    }

    #[test]
    fn missing_interior_segment_merges_top_row() {
        let h: Vec<Ruling> = [0.0, 20.0, 40.0]
            .iter()
            .map(|&y| Ruling::horizontal(y, 0.0, 100.0))
            .collect();
        let v = vec![
            Ruling::vertical(0.0, 0.0, 40.0),
            Ruling::vertical(50.0, 20.0, 40.0),
            Ruling::vertical(100.0, 0.0, 40.0),
        ];
        let cells = find_cells(&h, &v, TOL);
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[0], PageRect::new_unchecked(0.0, 0.0, 20.0, 100.0));
        assert_eq!(cells, brute_force_cells(&h, &v));
    }

    #[test]
    fn nested_box_keeps_innermost_cell() {
        let (mut h, mut v) = full_grid(&[0.0, 200.0], &[0.0, 100.0]);
        let (h2, v2) = full_grid(&[50.0, 150.0], &[25.0, 75.0]);
        h.extend(h2);
        v.extend(v2);
        let cells = find_cells(&h, &v, TOL);
        assert_eq!(
            cells,
            vec![PageRect::new_unchecked(25.0, 50.0, 75.0, 150.0)]
        );
    }

    fn text_at(text: &str, left: f64, top: f64) -> Vec<TextElement> {
        text.chars()
            .enumerate()
            .map(|(i, ch)| TextElement {
                bbox: PageRect::new_unchecked(
                    top,
                    left + 5.0 * i as f64,
                    top + 8.0,
                    left + 5.0 * (i + 1) as f64,
                ),
                text: ch.to_string(),
                font_size: 8.0,
                width_of_space: 2.0,
            })
            .collect()
    }

    #[test]
    fn grid_text_and_multiline_cells() {
        let (h, v) = full_grid(&[0.0, 60.0, 120.0], &[0.0, 30.0, 60.0]);
        let mut els = text_at("a", 5.0, 5.0);
        els.extend(text_at("b", 65.0, 5.0));
        els.extend(text_at("c1", 5.0, 33.0));
        els.extend(text_at("c2", 5.0, 45.0));
        els.extend(text_at("d", 65.0, 35.0));
        let rulings = h.into_iter().chain(v).collect();
        let content = PageContent::new(1, PageDims::LETTER, els, rulings);
        let tables = extract_lattice(&content, None, &LatticeOptions::default()).unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].cells, vec![vec!["a", "b"], vec!["c1\rc2", "d"]]);
    }

    #[test]
    fn disconnected_grids_are_separate_tables() {
        let (mut h, mut v) = full_grid(&[0.0, 50.0, 100.0], &[0.0, 20.0]);
        let (h2, v2) = full_grid(&[0.0, 50.0, 100.0], &[200.0, 220.0]);
        h.extend(h2);
        v.extend(v2);
        let content = PageContent::new(
            1,
            PageDims::LETTER,
            Vec::new(),
            h.into_iter().chain(v).collect(),
        );
        let tables = extract_lattice(&content, None, &LatticeOptions::default()).unwrap();
        assert_eq!(tables.len(), 2);
        assert!(tables[0].area.top < tables[1].area.top);
    }

    #[test]
    fn boxed_text_block_splits_columns_by_gaps() {
        let (h, v) = full_grid(&[0.0, 200.0], &[0.0, 50.0]);
        let mut els = Vec::new();
        for (r, (a, b)) in [("1.0", "x"), ("2.0", "y"), ("3.0", "z")]
            .iter()
            .enumerate()
        {
            els.extend(text_at(a, 5.0, 5.0 + 12.0 * r as f64));
            els.extend(text_at(b, 100.0, 5.0 + 12.0 * r as f64));
        }
        let content = PageContent::new(1, PageDims::LETTER, els, h.into_iter().chain(v).collect());
        let tables = extract_lattice(&content, None, &LatticeOptions::default()).unwrap();
        assert_eq!(tables[0].cells, vec![vec!["1.0\r2.0\r3.0", "x\ry\rz"]]);
    }

    #[test]
    fn blank_page_has_no_tables() {
        let content = PageContent::new(1, PageDims::LETTER, Vec::new(), Vec::new());
        assert!(extract_lattice(&content, None, &LatticeOptions::default())
            .unwrap()
            .is_empty());
    }

    fn arb_lines(max: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(5.0f64..40.0, 1..=max).prop_map(|gaps| {
            let mut pos = vec![10.0];
            for g in gaps {
                pos.push(pos.last().unwrap() + g);
            }
            pos
        })
    }

    fn arb_rulings() -> impl Strategy<Value = Vec<Ruling>> {
        proptest::collection::vec(
            (any::<bool>(), 0.0f64..100.0, 0.0f64..100.0, 0.0f64..100.0),
            0..12,
        )
        .prop_map(|v| {
            v.into_iter()
                .map(|(horizontal, p, a, b)| {
                    if horizontal {
                        Ruling::horizontal(p, a, b)
                    } else {
                        Ruling::vertical(p, a, b)
                    }
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn complete_grids_match_brute_force(xs in arb_lines(5), ys in arb_lines(5)) {
            let (h, v) = full_grid(&xs, &ys);
            let cells = find_cells(&h, &v, TOL);
            prop_assert_eq!(cells.len(), (xs.len() - 1) * (ys.len() - 1));
            prop_assert_eq!(cells, brute_force_cells(&h, &v));
        }

        #[test]
        fn snapping_is_idempotent(rulings in arb_rulings(), tol in 0.5f64..3.0) {
            let once = snap_rulings(&rulings, tol);
            prop_assert_eq!(snap_rulings(&once, tol), once);
        }

        #[test]
        fn cells_are_interior_disjoint(xs in arb_lines(4), ys in arb_lines(4), drop in proptest::collection::vec(any::<bool>(), 16)) {
            let (h, v) = full_grid(&xs, &ys);
            // Break interior vertical lines into per-row segments and drop some of them.
            let mut segs: Vec<Ruling> = vec![v[0], *v.last().unwrap()];
            let mut k = 0;
            for r in &v[1..v.len() - 1] {
                for w in ys.windows(2) {
                    if !drop[k % drop.len()] {
                        segs.push(Ruling::vertical(r.position, w[0], w[1]));
                    }
                    k += 1;
                }
            }
            let cells = find_cells(&h, &segs, TOL);
            for (i, a) in cells.iter().enumerate() {
                for b in &cells[i + 1..] {
                    let ix = a.right.min(b.right) - a.left.max(b.left);
                    let iy = a.bottom.min(b.bottom) - a.top.max(b.top);
                    prop_assert!(ix <= 1e-9 || iy <= 1e-9, "{:?} overlaps {:?}", a, b);
                }
            }
        }
    }
}
