//! Header resolution, column type inference and serialisation.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Method, PageRect, RawTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Boolean,
    Number,
    Date,
    String,
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnType::Boolean => "boolean",
            ColumnType::Number => "number",
            ColumnType::Date => "date",
            ColumnType::String => "string",
        })
    }
}

/// One typed cell. Empty cells are `Missing` regardless of column type.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Missing,
    Boolean(bool),
    Number(f64),
    Date(NaiveDate),
    String(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Missing => Ok(()),
            Value::Boolean(true) => f.write_str("TRUE"),
            Value::Boolean(false) => f.write_str("FALSE"),
            Value::Number(n) => write!(f, "{n}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Value::String(s) => f.write_str(s),
        }
    }
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::String(s) => Some(s),
            _ => None,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Missing => serde_json::Value::Null,
            Value::Boolean(b) => serde_json::Value::Bool(*b),
            Value::Number(n) => serde_json::Number::from_f64(*n)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Value::Date(_) => serde_json::Value::String(self.to_string()),
            Value::String(s) => serde_json::Value::String(s.clone()),
        }
    }
}

pub fn parse_bool(s: &str) -> Option<bool> {
    if s.eq_ignore_ascii_case("true") {
        Some(true)
    } else if s.eq_ignore_ascii_case("false") {
        Some(false)
    } else {
        None
    }
}

/// Plain decimal numbers: optional sign, digits with at most one decimal
/// point, optional exponent. No thousands separators, no `inf`/`nan`.
pub fn parse_number(s: &str) -> Option<f64> {
    let b = s.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < b.len() && matches!(b[i], b'e' | b'E') {
        i += 1;
        if matches!(b.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `YYYY-MM-DD` calendar dates.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    let shape = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shape {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

fn fits(t: ColumnType, s: &str) -> bool {
    match t {
        ColumnType::Boolean => parse_bool(s).is_some(),
        ColumnType::Number => parse_number(s).is_some(),
        ColumnType::Date => parse_date(s).is_some(),
        ColumnType::String => true,
    }
}

fn convert(t: ColumnType, s: &str) -> Value {
    if s.is_empty() {
        return Value::Missing;
    }
    match t {
        ColumnType::Boolean => parse_bool(s).map_or(Value::Missing, Value::Boolean),
        ColumnType::Number => parse_number(s).map_or(Value::Missing, Value::Number),
        ColumnType::Date => parse_date(s).map_or(Value::Missing, Value::Date),
        ColumnType::String => Value::String(s.to_string()),
    }
}

/// Splits a raw grid into column names and data rows.
pub fn apply_header(raw: &RawTable, col_names: bool) -> (Vec<String>, Vec<Vec<String>>) {
    let n = raw.n_cols();
    if col_names {
        match raw.cells.split_first() {
            Some((header, rest)) => {
                let names = header
                    .iter()
                    .enumerate()
                    .map(|(i, h)| {
                        let h = h.replace(['\r', '\n'], " ");
                        let h = h.trim();
                        if h.is_empty() {
                            format!("X{}", i + 1)
                        } else {
                            h.to_string()
                        }
                    })
                    .collect();
                (names, rest.to_vec())
            }
            None => (Vec::new(), Vec::new()),
        }
    } else {
        (
            (1..=n).map(|i| format!("X{i}")).collect(),
            raw.cells.clone(),
        )
    }
}

/// Per-column type: the first of boolean, number, date that parses every
/// non-empty cell, otherwise string. All-empty columns are strings.
pub fn infer_column_types(n_cols: usize, rows: &[Vec<String>]) -> Vec<ColumnType> {
    (0..n_cols)
        .map(|c| {
            let cells: Vec<&str> = rows
                .iter()
                .map(|r| r.get(c).map_or("", String::as_str))
                .filter(|s| !s.is_empty())
                .collect();
            if cells.is_empty() {
                return ColumnType::String;
            }
            [ColumnType::Boolean, ColumnType::Number, ColumnType::Date]
                .into_iter()
                .find(|&t| cells.iter().all(|s| fits(t, s)))
                .unwrap_or(ColumnType::String)
        })
        .collect()
}

/// A table with named, typed columns and the place it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct TypedTable {
    pub names: Vec<String>,
    pub types: Vec<ColumnType>,
    pub rows: Vec<Vec<Value>>,
    pub page: usize,
    pub area: PageRect,
    pub method: Method,
}

impl TypedTable {
    pub fn from_raw(raw: &RawTable, col_names: bool) -> TypedTable {
        let (names, data) = apply_header(raw, col_names);
        let types = infer_column_types(names.len(), &data);
        let rows = data
            .iter()
            .map(|r| {
                types
                    .iter()
                    .enumerate()
                    .map(|(c, &t)| convert(t, r.get(c).map_or("", String::as_str)))
                    .collect()
            })
            .collect();
        TypedTable {
            names,
            types,
            rows,
            page: raw.page,
            area: raw.area,
            method: raw.method,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Structured form with names, types, rows and provenance.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "names": self.names,
            "types": self.types,
            "rows": self.rows.iter().map(|r| r.iter().map(Value::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "page": self.page,
            "area": self.area.as_array(),
            "method": self.method,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Tsv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidOptions(format!(
                "unknown format {other:?} (expected csv, tsv or json)"
            ))),
        }
    }
}

/// Serialises a table. CSV/TSV: header first, LF line ends, fields quoted only
/// when needed. JSON: an array of objects keyed by column name.
pub fn write_table(table: &TypedTable, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => write_delimited(table, b','),
        Format::Tsv => write_delimited(table, b'\t'),
        Format::Json => write_json(table),
    }
}

fn write_delimited(table: &TypedTable, delimiter: u8) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    w.write_record(&table.names).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(Value::to_string))
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

fn write_json(table: &TypedTable) -> Vec<u8> {
    let mut out = String::from("[");
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        for (c, (name, value)) in table.names.iter().zip(row).enumerate() {
            if c > 0 {
                out.push_str(", ");
            }
            out.push_str(&json_string(name));
            out.push_str(": ");
            match value {
                Value::Missing => out.push_str("null"),
                Value::Boolean(b) => out.push_str(if *b { "true" } else { "false" }),
                Value::Number(n) => out.push_str(&n.to_string()),
                Value::Date(_) => out.push_str(&json_string(&value.to_string())),
                Value::String(s) => out.push_str(&json_string(s)),
            }
        }
        out.push('}');
    }
    out.push_str(if table.rows.is_empty() {
        "]\n"
    } else {
        "\n]\n"
    });
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(cells: &[&[&str]]) -> RawTable {
        RawTable::new(
            1,
            PageRect::new_unchecked(0.0, 0.0, 10.0, 10.0),
            Method::Stream,
            cells
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        )
    }

    #[test]
    fn number_grammar() {
        for ok in ["21", "22.8", "-1", "+.5", "5.", "1e3", "2.5E-4", "0.20"] {
            assert!(parse_number(ok).is_some(), "{ok}");
        }
        for bad in [
            "", ".", "1,000", "1.2.3", "e5", "1e", "inf", "NaN", "12a", " 1", "1e999",
        ] {
            assert!(parse_number(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn dates_and_bools() {
        assert_eq!(
            parse_date("2024-02-29"),
            NaiveDate::from_ymd_opt(2024, 2, 29)
        );
        assert!(parse_date("2023-02-29").is_none());
        assert!(parse_date("2024-2-9").is_none());
        assert_eq!(parse_bool("True"), Some(true));
        assert_eq!(parse_bool("FALSE"), Some(false));
        assert_eq!(parse_bool("yes"), None);
    }

    #[test]
    fn header_and_generated_names() {
        let t = raw(&[&["a", "", "c"], &["1", "2", "3"]]);
        assert_eq!(apply_header(&t, true).0, ["a", "X2", "c"]);
        let (names, rows) = apply_header(&t, false);
        assert_eq!(names, ["X1", "X2", "X3"]);
        assert_eq!(rows.len(), 2);
        let empty = RawTable::new(1, t.area, Method::Stream, Vec::new());
        assert_eq!(apply_header(&empty, true), (Vec::new(), Vec::new()));
    }

    #[test]
    fn ladder() {
        let rows: Vec<Vec<String>> = [
            ["21", "VC", "TRUE", "2020-01-01", ""],
            ["22.8", "OJ", "false", "2021-12-31", ""],
            ["", "VC", "", "", ""],
        ]
        .iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect();
        assert_eq!(
            infer_column_types(5, &rows),
            [
                ColumnType::Number,
                ColumnType::String,
                ColumnType::Boolean,
                ColumnType::Date,
                ColumnType::String
            ]
        );
    }

    #[test]
    fn csv_quoting_and_missing() {
        let t = TypedTable::from_raw(&raw(&[&["k", "v"], &["a\"b", "1"], &["x\ry", ""]]), true);
        let out = String::from_utf8(write_table(&t, Format::Csv)).unwrap();
        assert_eq!(out, "k,v\n\"a\"\"b\",1\n\"x\ry\",\n");
    }

    #[test]
    fn json_numbers_are_bare_and_missing_is_null() {
        let t = TypedTable::from_raw(
            &raw(&[&["mpg", "name"], &["21", "Mazda"], &["", "x"]]),
            true,
        );
        let out = String::from_utf8(write_table(&t, Format::Json)).unwrap();
        assert_eq!(
            out,
            "[\n  {\"mpg\": 21, \"name\": \"Mazda\"},\n  {\"mpg\": null, \"name\": \"x\"}\n]\n"
        );
        let parsed: serde_json::Value = serde_json::from_slice(out.as_bytes()).unwrap();
        assert_eq!(parsed[0]["mpg"], 21);
    }

    #[test]
    fn tsv_uses_tabs() {
        let t = TypedTable::from_raw(&raw(&[&["a", "b"], &["1", "x y"]]), true);
        assert_eq!(write_table(&t, Format::Tsv), b"a\tb\n1\tx y\n");
    }

    fn arb_cell() -> impl Strategy<Value = String> {
        prop_oneof![
            Just(String::new()),
            "-?[0-9]{1,4}(\\.[0-9]{1,3})?",
            "(TRUE|FALSE|true)",
            "20[0-9]{2}-0[1-9]-1[0-9]",
            "[a-zA-Z ,\"\r\n.]{1,8}",
        ]
    }

    fn arb_rows() -> impl Strategy<Value = Vec<Vec<String>>> {
        (1usize..5).prop_flat_map(|cols| {
            proptest::collection::vec(proptest::collection::vec(arb_cell(), cols), 1..8)
        })
    }

    proptest! {
        #[test]
        fn csv_round_trips(rows in arb_rows(), header in proptest::collection::vec("[a-z,\"]{1,5}", 4)) {
            let n = rows[0].len();
            let mut cells = vec![header[..n].to_vec()];
            cells.extend(rows);
            let t = TypedTable::from_raw(&RawTable::new(1, PageRect::new_unchecked(0.0, 0.0, 1.0, 1.0), Method::Stream, cells), true);
            for (format, delim) in [(Format::Csv, b','), (Format::Tsv, b'\t')] {
                let bytes = write_table(&t, format);
                let mut reader = csv::ReaderBuilder::new().delimiter(delim).has_headers(false).from_reader(&bytes[..]);
                let records: Vec<Vec<String>> = reader
                    .records()
                    .map(|r| r.unwrap().iter().map(str::to_string).collect())
                    .collect();
                prop_assert_eq!(&records[0], &t.names);
                let want: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Value::to_string).collect()).collect();
                prop_assert_eq!(&records[1..], &want[..]);
            }
        }

        #[test]
        fn types_ignore_row_order(mut rows in arb_rows(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = rows[0].len();
            let before = infer_column_types(n, &rows);
            rows.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
            prop_assert_eq!(infer_column_types(n, &rows), before);
        }

        #[test]
        fn a_word_demotes_only_its_column(rows in arb_rows(), col in 0usize..4) {
            let n = rows[0].len();
            let col = col % n;
            let before = infer_column_types(n, &rows);
            let mut extended = rows.clone();
            let mut extra = vec![String::new(); n];
            extra[col] = "word".to_string();
            extended.push(extra);
            let after = infer_column_types(n, &extended);
            for c in 0..n {
                if c == col {
                    prop_assert_eq!(after[c], ColumnType::String);
                } else {
                    prop_assert_eq!(after[c], before[c]);
                }
            }
        }
    }
}
