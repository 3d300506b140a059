//! CSV serialization with a self-describing comment header. Floats are
//! written with 9 significant digits so reruns are byte-comparable.

use std::io::Write;

use crate::error::{Error, Result};

/// 9 significant digits, locale-free. NaN markers come out as "nan".
pub fn fmt_g9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let formatted = format!("{v:.8e}");
    // tidy 1.23000000e0-style output: drop trailing zeros in the mantissa
    match formatted.split_once('e') {
        Some((mantissa, exp)) => {
            let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
            format!("{mantissa}e{exp}")
        }
        None => formatted,
    }
}

/// One emitted value. Integers keep their exact decimal form.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_g9(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Write `# `-prefixed header lines, a column row, then data rows.
pub fn write_csv(
    path: &std::path::Path,
    comments: &[String],
    columns: &[&str],
    rows: &[Vec<Cell>],
) -> Result<()> {
    let mut text = String::new();
    for c in comments {
        text.push_str("# ");
        text.push_str(c);
        text.push('\n');
    }
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Shape(format!(
                "csv row with {} cells vs {} columns",
                row.len(),
                columns.len()
            )));
        }
        let rendered: Vec<String> = row.iter().map(Cell::render).collect();
        text.push_str(&rendered.join(","));
        text.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Parsed CSV: header comments, column names, rows of raw strings.
#[derive(Debug, Clone)]
pub struct CsvContent {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_csv(path: &std::path::Path) -> Result<CsvContent> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut comments = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            comments.push(rest.to_string());
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        match &columns {
            None => columns = Some(cells),
            Some(cols) => {
                if cells.len() != cols.len() {
                    return Err(Error::Data(format!(
                        "{}: row with {} cells vs {} columns",
                        path.display(),
                        cells.len(),
                        cols.len()
                    )));
                }
                rows.push(cells);
            }
        }
    }
    let columns = columns
        .ok_or_else(|| Error::Data(format!("{}: no column row", path.display())))?;
    Ok(CsvContent {
        comments,
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_g9(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt_g9(-123456789.123), "-1.23456789e8");
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(1.0), "1e0");
        assert_eq!(fmt_g9(f64::NAN), "nan");
    }

    #[test]
    fn fmt_round_trips_within_precision() {
        let values = [1.2345e-7, 9.87654321e3, -0.5, 2.0_f64.sqrt()];
        for &v in &values {
            let back: f64 = fmt_g9(v).parse().unwrap();
            assert!((back - v).abs() <= 1e-8 * v.abs(), "{v} -> {}", fmt_g9(v));
        }
    }

    #[test]
    fn write_then_read_round_trip() {
        let dir = std::env::temp_dir().join("snnlab-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let rows = vec![
            vec![Cell::Int(1), Cell::Float(0.25), Cell::Text("a".into())],
            vec![Cell::Int(-2), Cell::Float(f64::NAN), Cell::Text("b".into())],
        ];
        write_csv(&path, &["config: {}".into()], &["i", "x", "s"], &rows).unwrap();
        let content = read_csv(&path).unwrap();
        assert_eq!(content.comments, vec!["config: {}"]);
        assert_eq!(content.columns, vec!["i", "x", "s"]);
        assert_eq!(content.rows[0], vec!["1", "2.5e-1", "a"]);
        assert_eq!(content.rows[1][1], "nan");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let dir = std::env::temp_dir().join("snnlab-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        assert!(write_csv(&path, &[], &["a", "b"], &[vec![Cell::Int(1)]]).is_err());
        std::fs::write(&path, "a,b\n1\n").unwrap();
        assert!(read_csv(&path).is_err());
    }
}
