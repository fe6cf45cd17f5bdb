//! Versioned CSV tables and atomic file writes.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// First line of every CSV artifact.
pub const CSV_MAGIC: &str = "# kleinflow-csv v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // Shortest round-trip form; stable across runs and platforms.
            Cell::F(x) => format!("{x:?}"),
            Cell::I(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::B(x) => x.to_string(),
            Cell::S(x) => x.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem and contract name.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self { name: name.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut head = String::new();
        let _ = writeln!(head, "{CSV_MAGIC} {}", self.name);
        let mut w = csv::Writer::from_writer(head.into_bytes());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Writes through a sibling temporary file and renames it into place, so
/// readers never see a partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let mut t = Table::new("zoom", &["n", "error"]);
        t.push(vec![1usize.into(), 0.5.into()]);
        t.push(vec![2usize.into(), f64::INFINITY.into()]);
        let s = String::from_utf8(t.to_csv()).unwrap();
        assert_eq!(s, "# kleinflow-csv v1 zoom\nn,error\n1,0.5\n2,inf\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("kleinflow-artifact-{}", std::process::id()));
        let p = dir.join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
