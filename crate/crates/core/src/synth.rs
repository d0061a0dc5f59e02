//! Builds small PDFs with known table layouts, for tests, demos and benchmarks.
//!
//! Text is set in Helvetica (WinAnsi) with explicit widths so that every glyph
//! position is known in advance. Each placed table reports its area and gutter
//! centres.

use std::path::Path;

use lopdf::content::{Content, Operation};
use lopdf::{dictionary, Object, Stream, StringFormat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::fonts::{helvetica_width, HELVETICA_ASCENT_DESCENT};
use crate::model::{PageDims, PageRect};

/// How a table is ruled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rules {
    /// No lines at all.
    None,
    /// Every row and column boundary stroked.
    Grid,
    /// Every boundary drawn as a thin filled rectangle.
    FilledGrid,
    /// Unruled text with one stroked box around every row except the first.
    DataBox,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableSpec {
    /// Row-major cell text; the first row is usually the header.
    pub cells: Vec<Vec<String>>,
    pub left: f64,
    pub top: f64,
    pub font_size: f64,
    /// Horizontal space between the widest cell of a column and the next column, in pt.
    pub gutter: f64,
    pub rules: Rules,
}

impl TableSpec {
    pub fn new(cells: Vec<Vec<String>>, left: f64, top: f64, rules: Rules) -> Self {
        TableSpec {
            cells,
            left,
            top,
            font_size: 9.0,
            gutter: 10.0,
            rules,
        }
    }
}

/// A free-standing line of text.
#[derive(Clone, Debug, PartialEq)]
pub struct TextLine {
    pub left: f64,
    pub top: f64,
    pub font_size: f64,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PageSpec {
    pub dims: PageDims,
    pub tables: Vec<TableSpec>,
    pub lines: Vec<TextLine>,
}

impl PageSpec {
    pub fn new(dims: PageDims) -> Self {
        PageSpec {
            dims,
            tables: Vec::new(),
            lines: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InfoSpec {
    pub title: Option<String>,
    pub author: Option<String>,
    pub subject: Option<String>,
    pub creator: Option<String>,
    /// PDF date string such as `D:20240131120000Z`.
    pub created: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DocSpec {
    pub pages: Vec<PageSpec>,
    pub info: InfoSpec,
}

/// Where a table ended up on the page.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedTable {
    /// Encloses all text and rulings of the table with a 2 pt margin.
    pub area: PageRect,
    /// x positions halfway across each gutter.
    pub separators: Vec<f64>,
    pub cells: Vec<Vec<String>>,
    pub rules: Rules,
}

const AREA_MARGIN: f64 = 2.0;
const LINE_WIDTH: f64 = 0.5;
const FILL_THICKNESS: f64 = 0.8;

/// Advance width of `text` in Helvetica at `font_size`.
pub fn text_width(text: &str, font_size: f64) -> f64 {
    text.chars().map(|c| helvetica_width(c) as f64).sum::<f64>() * font_size / 1000.0
}

/// Width of a space in Helvetica at `font_size`.
pub fn space_width(font_size: f64) -> f64 {
    text_width(" ", font_size)
}

struct Painter {
    ops: Vec<Operation>,
    height: f64,
}

impl Painter {
    fn text(&mut self, left: f64, top: f64, font_size: f64, text: &str) {
        let (ascent, _) = HELVETICA_ASCENT_DESCENT;
        let baseline = self.height - (top + ascent * font_size);
        self.ops.push(Operation::new("BT", vec![]));
        self.ops
            .push(Operation::new("Tf", vec!["F1".into(), real(font_size)]));
        self.ops
            .push(Operation::new("Td", vec![real(left), real(baseline)]));
        self.ops.push(Operation::new(
            "Tj",
            vec![Object::String(
                text.as_bytes().to_vec(),
                StringFormat::Literal,
            )],
        ));
        self.ops.push(Operation::new("ET", vec![]));
    }

    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        self.ops
            .push(Operation::new("m", vec![real(x0), real(self.height - y0)]));
        self.ops
            .push(Operation::new("l", vec![real(x1), real(self.height - y1)]));
        self.ops.push(Operation::new("S", vec![]));
    }

    fn thin_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        let (w, h) = (x1 - x0, y1 - y0);
        self.ops.push(Operation::new(
            "re",
            vec![real(x0), real(self.height - y1), real(w), real(h)],
        ));
        self.ops.push(Operation::new("f", vec![]));
    }

    fn rule(&mut self, filled: bool, x0: f64, y0: f64, x1: f64, y1: f64) {
        if !filled {
            self.line(x0, y0, x1, y1);
        } else if y0 == y1 {
            let t = FILL_THICKNESS / 2.0;
            self.thin_rect(x0 - t, y0 - t, x1 + t, y0 + t);
        } else {
            let t = FILL_THICKNESS / 2.0;
            self.thin_rect(x0 - t, y0 - t, x0 + t, y1 + t);
        }
    }
}

fn real(v: f64) -> Object {
    Object::Real(v as f32)
}

fn place(table: &TableSpec, painter: &mut Painter) -> PlacedTable {
    let fs = table.font_size;
    let (ascent, descent) = HELVETICA_ASCENT_DESCENT;
    let text_h = (ascent - descent) * fs;
    let n_cols = table.cells.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<f64> = (0..n_cols)
        .map(|c| {
            table
                .cells
                .iter()
                .filter_map(|r| r.get(c))
                .map(|s| text_width(s, fs))
                .fold(0.0, f64::max)
        })
        .collect();
    let ruled = matches!(table.rules, Rules::Grid | Rules::FilledGrid);
    let (pad_x, pad_y) = if ruled {
        (table.gutter / 2.0, 0.35 * fs)
    } else {
        (0.0, 0.0)
    };
    let row_h = if ruled {
        text_h + 2.0 * pad_y
    } else {
        1.25 * fs
    };

    // Column boundaries: for ruled tables they are the vertical rules, for
    // unruled ones the text starts.
    let mut col_x = vec![table.left];
    for (c, w) in widths.iter().enumerate() {
        let step = if ruled {
            w + 2.0 * pad_x
        } else {
            w + table.gutter
        };
        let last = *col_x.last().expect("non-empty");
        if ruled || c + 1 < n_cols {
            col_x.push(last + step);
        } else {
            col_x.push(last + w);
        }
    }
    let separators: Vec<f64> = if ruled {
        col_x[1..n_cols].to_vec()
    } else {
        (1..n_cols).map(|c| col_x[c] - table.gutter / 2.0).collect()
    };

    for (r, row) in table.cells.iter().enumerate() {
        let top = table.top + r as f64 * row_h + pad_y;
        for (c, text) in row.iter().enumerate() {
            if !text.is_empty() {
                painter.text(col_x[c] + pad_x, top, fs, text);
            }
        }
    }

    let n_rows = table.cells.len();
    let right = *col_x.last().expect("non-empty");
    let bottom = table.top + n_rows as f64 * row_h;
    let mut area = PageRect::new_unchecked(table.top, table.left, bottom, right);
    match table.rules {
        Rules::None => {}
        Rules::Grid | Rules::FilledGrid => {
            let filled = table.rules == Rules::FilledGrid;
            for r in 0..=n_rows {
                let y = table.top + r as f64 * row_h;
                painter.rule(filled, table.left, y, right, y);
            }
            for &x in &col_x {
                painter.rule(filled, x, table.top, x, bottom);
            }
        }
        Rules::DataBox => {
            let m = 0.15 * fs;
            let box_top = table.top + row_h - m;
            let (l, rr, b) = (
                table.left - 2.0 * m,
                right + 2.0 * m,
                table.top + (n_rows as f64 - 1.0) * row_h + text_h + m,
            );
            painter.line(l, box_top, rr, box_top);
            painter.line(rr, box_top, rr, b);
            painter.line(rr, b, l, b);
            painter.line(l, b, l, box_top);
            area = area.union(&PageRect::new_unchecked(box_top, l, b, rr));
        }
    }
    PlacedTable {
        area: area.expand(AREA_MARGIN),
        separators,
        cells: table.cells.clone(),
        rules: table.rules,
    }
}

/// Builds the document and reports the placed tables of every page.
pub fn build(spec: &DocSpec) -> Result<(lopdf::Document, Vec<Vec<PlacedTable>>)> {
    if spec.pages.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let mut doc = lopdf::Document::with_version("1.5");
    let pages_id = doc.new_object_id();
    let widths: Vec<Object> = (32u8..=126)
        .map(|b| Object::Integer(helvetica_width(b as char) as i64))
        .collect();
    let font_id = doc.add_object(dictionary! {
        "Type" => "Font",
        "Subtype" => "Type1",
        "BaseFont" => "Helvetica",
        "Encoding" => "WinAnsiEncoding",
        "FirstChar" => 32,
        "LastChar" => 126,
        "Widths" => widths,
    });
    let resources_id = doc.add_object(dictionary! {
        "Font" => dictionary! { "F1" => font_id },
    });

    let mut kids = Vec::new();
    let mut placed_pages = Vec::new();
    for page in &spec.pages {
        let mut painter = Painter {
            ops: vec![Operation::new("w", vec![real(LINE_WIDTH)])],
            height: page.dims.height,
        };
        let placed: Vec<PlacedTable> = page.tables.iter().map(|t| place(t, &mut painter)).collect();
        for line in &page.lines {
            painter.text(line.left, line.top, line.font_size, &line.text);
        }
        let content = Content {
            operations: painter.ops,
        };
        let content_id = doc.add_object(Stream::new(dictionary! {}, content.encode()?));
        let page_id = doc.add_object(dictionary! {
            "Type" => "Page",
            "Parent" => pages_id,
            "MediaBox" => vec![0.into(), 0.into(), real(page.dims.width), real(page.dims.height)],
            "Contents" => content_id,
            "Resources" => resources_id,
        });
        kids.push(Object::Reference(page_id));
        placed_pages.push(placed);
    }
    let count = kids.len() as i64;
    doc.objects.insert(
        pages_id,
        Object::Dictionary(dictionary! {
            "Type" => "Pages",
            "Kids" => kids,
            "Count" => count,
        }),
    );
    let catalog_id = doc.add_object(dictionary! {
        "Type" => "Catalog",
        "Pages" => pages_id,
    });
    doc.trailer.set("Root", catalog_id);

    let info = &spec.info;
    let mut info_dict = lopdf::Dictionary::new();
    for (key, value) in [
        ("Title", &info.title),
        ("Author", &info.author),
        ("Subject", &info.subject),
        ("Creator", &info.creator),
        ("CreationDate", &info.created),
    ] {
        if let Some(v) = value {
            info_dict.set(key, Object::string_literal(v.as_str()));
        }
    }
    if !info_dict.is_empty() {
        let info_id = doc.add_object(info_dict);
        doc.trailer.set("Info", info_id);
    }
    Ok((doc, placed_pages))
}

/// Builds the document and saves it to `path`.
pub fn write_pdf(spec: &DocSpec, path: &Path) -> Result<Vec<Vec<PlacedTable>>> {
    let (mut doc, placed) = build(spec)?;
    doc.save(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(placed)
}

/// Column kind of a sample dataset, used to derive expected typed values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Number,
    String,
}

/// A small named dataset with printed cell text.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: &'static str,
    pub columns: Vec<(&'static str, Kind)>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    /// Header row followed by the data rows.
    pub fn cells(&self) -> Vec<Vec<String>> {
        let mut cells = vec![self.columns.iter().map(|(n, _)| n.to_string()).collect()];
        cells.extend(self.rows.iter().cloned());
        cells
    }

    /// Data rows in canonical typed form: numbers re-printed from their value.
    pub fn expected_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.columns)
                    .map(|(cell, (_, kind))| match kind {
                        Kind::Number => cell
                            .parse::<f64>()
                            .map(|v| v.to_string())
                            .unwrap_or_else(|_| cell.clone()),
                        Kind::String => cell.clone(),
                    })
                    .collect()
            })
            .collect()
    }
}

fn rows(data: &[&[&str]]) -> Vec<Vec<String>> {
    data.iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect()
}

/// First five cars of the classic motor trend road test data.
pub fn mtcars() -> Dataset {
    use Kind::*;
    Dataset {
        name: "mtcars",
        columns: vec![
            ("model", String),
            ("mpg", Number),
            ("cyl", Number),
            ("disp", Number),
            ("hp", Number),
            ("drat", Number),
            ("wt", Number),
            ("qsec", Number),
            ("vs", Number),
            ("am", Number),
            ("gear", Number),
            ("carb", Number),
        ],
        rows: rows(&[
            &[
                "Mazda RX4",
                "21",
                "6",
                "160",
                "110",
                "3.9",
                "2.62",
                "16.46",
                "0",
                "1",
                "4",
                "4",
            ],
            &[
                "Mazda RX4 Wag",
                "21",
                "6",
                "160",
                "110",
                "3.9",
                "2.875",
                "17.02",
                "0",
                "1",
                "4",
                "4",
            ],
            &[
                "Datsun 710",
                "22.8",
                "4",
                "108",
                "93",
                "3.85",
                "2.32",
                "18.61",
                "1",
                "1",
                "4",
                "1",
            ],
            &[
                "Hornet 4 Drive",
                "21.4",
                "6",
                "258",
                "110",
                "3.08",
                "3.215",
                "19.44",
                "1",
                "0",
                "3",
                "1",
            ],
            &[
                "Hornet Sportabout",
                "18.7",
                "8",
                "360",
                "175",
                "3.15",
                "3.44",
                "17.02",
                "0",
                "0",
                "3",
                "2",
            ],
        ]),
    }
}

fn iris_columns() -> Vec<(&'static str, Kind)> {
    use Kind::*;
    vec![
        ("Sepal.Length", Number),
        ("Sepal.Width", Number),
        ("Petal.Length", Number),
        ("Petal.Width", Number),
        ("Species", String),
    ]
}

/// First five setosa flowers, measurements printed with two decimals.
pub fn iris_setosa() -> Dataset {
    Dataset {
        name: "iris_setosa",
        columns: iris_columns(),
        rows: rows(&[
            &["5.10", "3.50", "1.40", "0.20", "setosa"],
            &["4.90", "3.00", "1.40", "0.20", "setosa"],
            &["4.70", "3.20", "1.30", "0.20", "setosa"],
            &["4.60", "3.10", "1.50", "0.20", "setosa"],
            &["5.00", "3.60", "1.40", "0.20", "setosa"],
        ]),
    }
}

/// Last five virginica flowers, measurements printed with two decimals.
pub fn iris_virginica() -> Dataset {
    Dataset {
        name: "iris_virginica",
        columns: iris_columns(),
        rows: rows(&[
            &["6.70", "3.00", "5.20", "2.30", "virginica"],
            &["6.30", "2.50", "5.00", "1.90", "virginica"],
            &["6.50", "3.00", "5.20", "2.00", "virginica"],
            &["6.20", "3.40", "5.40", "2.30", "virginica"],
            &["5.90", "3.00", "5.10", "1.80", "virginica"],
        ]),
    }
}

/// First five rows of the guinea pig tooth growth data.
pub fn tooth_growth() -> Dataset {
    use Kind::*;
    Dataset {
        name: "ToothGrowth",
        columns: vec![("len", Number), ("supp", String), ("dose", Number)],
        rows: rows(&[
            &["4.2", "VC", "0.5"],
            &["11.5", "VC", "0.5"],
            &["7.3", "VC", "0.5"],
            &["5.8", "VC", "0.5"],
            &["6.4", "VC", "0.5"],
        ]),
    }
}

/// Ground truth for one table of a generated document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestTable {
    pub name: String,
    pub area: [f64; 4],
    pub method: crate::model::Method,
    pub separators: Vec<f64>,
    pub header: Vec<String>,
    pub kinds: Vec<Kind>,
    /// Data rows in canonical typed form.
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestPage {
    pub page: usize,
    pub width: f64,
    pub height: f64,
    pub tables: Vec<ManifestTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub pages: Vec<ManifestPage>,
}

/// Three-page sample: a ruled car table, two unruled flower tables (data rows
/// boxed, headers outside the box), and a ruled tooth growth table.
pub fn sample_document() -> (DocSpec, Vec<Vec<Dataset>>) {
    let cars = mtcars();
    let setosa = iris_setosa();
    let virginica = iris_virginica();
    let teeth = tooth_growth();

    let mut p1 = PageSpec::new(PageDims::LETTER);
    p1.tables
        .push(TableSpec::new(cars.cells(), 40.0, 72.0, Rules::Grid));
    let mut p2 = PageSpec::new(PageDims::LETTER);
    p2.tables
        .push(TableSpec::new(setosa.cells(), 125.0, 72.0, Rules::DataBox));
    p2.tables.push(TableSpec::new(
        virginica.cells(),
        125.0,
        390.0,
        Rules::DataBox,
    ));
    let mut p3 = PageSpec::new(PageDims::LETTER);
    p3.tables
        .push(TableSpec::new(teeth.cells(), 72.0, 72.0, Rules::Grid));

    let spec = DocSpec {
        pages: vec![p1, p2, p3],
        info: InfoSpec {
            title: Some("Sample tables".into()),
            author: Some("tabex".into()),
            subject: Some("Ruled and unruled sample tables".into()),
            creator: Some("tabex synth".into()),
            created: Some("D:20240131120000Z".into()),
        },
    };
    (spec, vec![vec![cars], vec![setosa, virginica], vec![teeth]])
}

/// Writes the sample document to `pdf_path` and returns its ground truth.
pub fn write_sample(pdf_path: &Path) -> Result<Manifest> {
    let (spec, datasets) = sample_document();
    let placed = write_pdf(&spec, pdf_path)?;
    let pages = spec
        .pages
        .iter()
        .zip(placed)
        .zip(datasets)
        .enumerate()
        .map(|(i, ((page, placed), sets))| ManifestPage {
            page: i + 1,
            width: page.dims.width,
            height: page.dims.height,
            tables: placed
                .into_iter()
                .zip(sets)
                .map(|(p, d)| ManifestTable {
                    name: d.name.to_string(),
                    area: p.area.as_array(),
                    method: match p.rules {
                        Rules::Grid | Rules::FilledGrid => crate::model::Method::Lattice,
                        Rules::None | Rules::DataBox => crate::model::Method::Stream,
                    },
                    separators: p.separators,
                    header: d.columns.iter().map(|(n, _)| n.to_string()).collect(),
                    kinds: d.columns.iter().map(|(_, k)| *k).collect(),
                    rows: d.expected_rows(),
                })
                .collect(),
        })
        .collect();
    Ok(Manifest { pages })
}
