//! CSV tables with `# key: value` metadata lines ahead of the header row.
//!
//! Every table carries `# kind:` (one of [`TableKind`]) and `# schema:`; the
//! header must match the column list of its kind exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use thiserror::Error;

pub const TABLE_SCHEMA: u32 = 1;

pub const TRAJECTORY_COLUMNS: &[&str] = &[
    "pps",
    "t",
    "c1",
    "c2",
    "c12",
    "A",
    "B",
    "C",
    "A_minus_A0",
    "A_auto",
    "B_auto",
    "C_auto",
];

pub const SWEEP_COLUMNS: &[&str] = &[
    "point",
    "value",
    "delta1",
    "delta2",
    "a_diff_initial",
    "b_diff_initial",
    "c_diff_initial",
    "a_diff_probe",
    "b_diff_probe",
    "c_diff_probe",
];

pub const PIPELINE_COLUMNS: &[&str] = &[
    "pps",
    "t",
    "F0",
    "F1",
    "H0",
    "H1",
    "A_proton",
    "A_fluorine",
    "B",
    "C",
    "residual_fluorine",
    "residual_proton",
    "converged",
    "A_proton_true",
    "A_fluorine_true",
    "B_true",
    "C_true",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Trajectory,
    Sweep,
    Pipeline,
}

impl TableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TableKind::Trajectory => "trajectory",
            TableKind::Sweep => "sweep",
            TableKind::Pipeline => "pipeline",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            TableKind::Trajectory => TRAJECTORY_COLUMNS,
            TableKind::Sweep => SWEEP_COLUMNS,
            TableKind::Pipeline => PIPELINE_COLUMNS,
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            TableKind::Trajectory => "trajectory.csv",
            TableKind::Sweep => "sweep.csv",
            TableKind::Pipeline => "pipeline.csv",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "trajectory" => Some(TableKind::Trajectory),
            "sweep" => Some(TableKind::Sweep),
            "pipeline" => Some(TableKind::Pipeline),
            _ => None,
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("empty file")]
    Empty,
    #[error("missing `# kind:` metadata line")]
    MissingKind,
    #[error("unknown table kind {0:?}")]
    UnknownKind(String),
    #[error("unsupported table schema {0:?} (expected {TABLE_SCHEMA})")]
    UnsupportedSchema(String),
    #[error("column {index}: expected `{expected}`, found `{found}`")]
    Column {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}, column `{column}`: {message}")]
    Cell {
        line: u64,
        column: String,
        message: String,
    },
    #[error("metadata `{key}`: {message}")]
    Metadata { key: String, message: String },
    #[error("csv: {0}")]
    Csv(String),
}

/// Table being built for output.
#[derive(Debug, Clone)]
pub struct TableWriter {
    kind: TableKind,
    meta: Vec<(String, String)>,
    rows: Vec<Vec<String>>,
}

impl TableWriter {
    pub fn new(kind: TableKind) -> Self {
        TableWriter {
            kind,
            meta: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.meta.push((key.to_string(), value));
        self
    }

    /// Panics if the row width differs from the kind's column count.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.kind.columns().len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        let mut head = String::new();
        head.push_str(&format!(
            "# kind: {}\n# schema: {TABLE_SCHEMA}\n",
            self.kind
        ));
        for (k, v) in &self.meta {
            head.push_str(&format!("# {k}: {v}\n"));
        }
        w.write_all(head.as_bytes())?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(self.kind.columns())?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush()
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// Parsed table. Metadata keys keep their first occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: TableKind,
    pub meta: BTreeMap<String, String>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Table, TableError> {
        if text.trim().is_empty() {
            return Err(TableError::Empty);
        }
        let mut meta = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim_start();
            let Some(comment) = line.strip_prefix('#') else {
                continue;
            };
            if let Some((k, v)) = comment.split_once(':') {
                meta.entry(k.trim().to_string())
                    .or_insert_with(|| v.trim().to_string());
            }
        }
        let kind_str = meta.get("kind").ok_or(TableError::MissingKind)?;
        let kind =
            TableKind::parse(kind_str).ok_or_else(|| TableError::UnknownKind(kind_str.clone()))?;
        match meta.get("schema") {
            Some(s) if s == &TABLE_SCHEMA.to_string() => {}
            other => {
                return Err(TableError::UnsupportedSchema(
                    other.cloned().unwrap_or_default(),
                ))
            }
        }

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| TableError::Csv(e.to_string()))?
            .clone();
        let expected = kind.columns();
        for i in 0..expected.len().max(header.len()) {
            let found = header.get(i).unwrap_or("");
            let want = expected.get(i).copied().unwrap_or("");
            if found != want {
                return Err(TableError::Column {
                    index: i,
                    expected: want.to_string(),
                    found: found.to_string(),
                });
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| TableError::Csv(e.to_string()))?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != expected.len() {
                return Err(TableError::Cell {
                    line,
                    column: expected.get(record.len()).unwrap_or(&"").to_string(),
                    message: format!(
                        "row has {} fields, expected {}",
                        record.len(),
                        expected.len()
                    ),
                });
            }
            rows.push((line, record.iter().map(str::to_string).collect()));
        }
        Ok(Table { kind, meta, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |(line, cells)| Row {
            kind: self.kind,
            line: *line,
            cells,
        })
    }

    pub fn meta_json<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<T, TableError> {
        let raw = self.meta.get(key).ok_or_else(|| TableError::Metadata {
            key: key.to_string(),
            message: "missing".into(),
        })?;
        serde_json::from_str(raw).map_err(|e| TableError::Metadata {
            key: key.to_string(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    kind: TableKind,
    line: u64,
    cells: &'a [String],
}

impl<'a> Row<'a> {
    pub fn line(&self) -> u64 {
        self.line
    }

    fn index(&self, column: &str) -> usize {
        self.kind
            .columns()
            .iter()
            .position(|c| *c == column)
            .unwrap_or_else(|| panic!("no column {column} in {}", self.kind))
    }

    pub fn str(&self, column: &str) -> &'a str {
        &self.cells[self.index(column)]
    }

    /// `NaN` and `inf` are accepted.
    pub fn f64(&self, column: &str) -> Result<f64, TableError> {
        let raw = self.str(column);
        raw.trim().parse().map_err(|_| TableError::Cell {
            line: self.line,
            column: column.to_string(),
            message: format!("not a number: {raw:?}"),
        })
    }

    pub fn parse<T: std::str::FromStr>(&self, column: &str) -> Result<T, TableError> {
        let raw = self.str(column);
        raw.trim().parse().map_err(|_| TableError::Cell {
            line: self.line,
            column: column.to_string(),
            message: format!("unexpected value {raw:?}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> String {
        let mut w = TableWriter::new(TableKind::Sweep);
        w.meta("parameter", "delta_pairs")
            .meta("note", "two\nlines");
        w.push((0..10).map(|i| (i as f64 * 0.5).to_string()).collect());
        w.render()
    }

    #[test]
    fn round_trip() {
        let text = sample();
        assert!(text.starts_with(
            "# kind: sweep\n# schema: 1\n# parameter: delta_pairs\n# note: two lines\npoint,value"
        ));
        let t = Table::parse(&text).unwrap();
        assert_eq!(t.kind, TableKind::Sweep);
        assert_eq!(t.len(), 1);
        let row = t.rows().next().unwrap();
        assert_eq!(row.f64("delta2").unwrap(), 1.5);
        assert_eq!(row.line(), 6);
    }

    #[test]
    fn schema_errors_name_the_column() {
        assert_eq!(Table::parse(""), Err(TableError::Empty));
        assert_eq!(Table::parse("a,b\n1,2\n"), Err(TableError::MissingKind));
        let text = sample().replace("delta1", "d1");
        assert_eq!(
            Table::parse(&text),
            Err(TableError::Column {
                index: 2,
                expected: "delta1".into(),
                found: "d1".into()
            })
        );
        let text = sample().replace("c_diff_probe", "c_diff_probe,extra");
        assert!(matches!(
            Table::parse(&text),
            Err(TableError::Column { index: 10, .. })
        ));
        let text = sample().replace("# kind: sweep", "# kind: pipeline");
        assert!(matches!(
            Table::parse(&text),
            Err(TableError::Column { index: 0, .. })
        ));
        let text = sample().replace("# schema: 1", "# schema: 9");
        assert!(matches!(
            Table::parse(&text),
            Err(TableError::UnsupportedSchema(_))
        ));
    }

    #[test]
    fn bad_cells_report_line_and_column() {
        let text = sample() + "0,1,x,3,4,5,6,7,8,9\n";
        let t = Table::parse(&text).unwrap();
        let row = t.rows().nth(1).unwrap();
        match row.f64("delta1") {
            Err(TableError::Cell { line, column, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(column, "delta1");
            }
            other => panic!("{other:?}"),
        }
        let text = sample() + "0,1\n";
        assert!(matches!(Table::parse(&text), Err(TableError::Cell { .. })));
    }
}
