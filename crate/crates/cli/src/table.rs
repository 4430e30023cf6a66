//! Rectangular CSV output with a provenance footer.

use std::fmt;

/// One cell. Numbers are written with 12 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => f.write_str(&format_number(*v)),
            Cell::Flag(b) => f.write_str(if *b { "true" } else { "false" }),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

/// `d.ddddddddddde±XX`: 12 significant digits, locale independent.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Comment lines, written after the data with a leading `# `.
    pub footer: Vec<String>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "ragged row");
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.footer.push(line.into());
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .expect("in-memory write");
        }
        let mut out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        for line in &self.footer {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// Header and numeric rows of a parsed table.
pub type ParsedCsv = (Vec<String>, Vec<Vec<Option<f64>>>);

/// Parse the numeric body of an emitted table, skipping footer comments.
/// Empty and non-numeric cells come back as `None`.
pub fn parse_csv(text: &str) -> Result<ParsedCsv, csv::Error> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(|s| s.parse().ok()).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(1.0), "1.00000000000e0");
        assert_eq!(format_number(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn round_trip() {
        let mut t = CsvTable::new(["a", "b", "c"]);
        t.push(vec![Cell::Num(std::f64::consts::PI), Cell::Empty, Cell::Flag(true)]);
        t.push(vec![Cell::Num(1e-300), Cell::Num(-2.5e7), Cell::Flag(false)]);
        t.note("hash abc");
        let text = t.to_csv();
        assert!(text.ends_with("# hash abc\n"));
        let (h, rows) = parse_csv(&text).unwrap();
        assert_eq!(h, ["a", "b", "c"]);
        assert_eq!(rows.len(), 2);
        let pi = rows[0][0].unwrap();
        assert_eq!(format_number(pi), format_number(std::f64::consts::PI));
        assert!((pi - std::f64::consts::PI).abs() < 1e-11);
        assert_eq!(rows[0][1], None);
        assert_eq!(rows[1][1], Some(-2.5e7));
    }
}
