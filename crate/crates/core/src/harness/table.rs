//! Result tables, their CSV files and companion gnuplot scripts.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Version string written into every row.
pub const CODE_VERSION: &str = concat!("intermap-", env!("CARGO_PKG_VERSION"));

/// Names of the columns appended to every table.
pub const PROVENANCE_COLUMNS: [&str; 3] = ["spec_hash", "seed", "code_version"];

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn cmp_key(&self, other: &Cell) -> Ordering {
        match (self, other) {
            (Cell::Int(a), Cell::Int(b)) => a.cmp(b),
            (Cell::Float(a), Cell::Float(b)) => a.total_cmp(b),
            (Cell::Int(a), Cell::Float(b)) => (*a as f64).total_cmp(b),
            (Cell::Float(a), Cell::Int(b)) => a.total_cmp(&(*b as f64)),
            (a, b) => a.render().cmp(&b.render()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Per-row provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub spec_hash: String,
    pub seed: u64,
}

/// How the companion plot script draws the table.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotHint {
    pub x: String,
    pub y: String,
    pub logscale_x: bool,
    pub logscale_y: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    /// Leading columns that define the row order.
    pub key_columns: usize,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Option<PlotHint>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str], key_columns: usize) -> Self {
        let mut cols: Vec<String> = columns.iter().map(|s| s.to_string()).collect();
        cols.extend(PROVENANCE_COLUMNS.iter().map(|s| s.to_string()));
        ResultTable {
            name: name.to_string(),
            columns: cols,
            key_columns,
            rows: Vec::new(),
            plot: None,
        }
    }

    pub fn with_plot(mut self, x: &str, y: &str, logscale_x: bool, logscale_y: bool) -> Self {
        self.plot = Some(PlotHint {
            x: x.into(),
            y: y.into(),
            logscale_x,
            logscale_y,
        });
        self
    }

    pub fn push(&mut self, mut row: Vec<Cell>, prov: &Provenance) -> Result<()> {
        if row.len() + PROVENANCE_COLUMNS.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len() - PROVENANCE_COLUMNS.len(),
                found: row.len(),
            });
        }
        row.push(Cell::Text(prov.spec_hash.clone()));
        row.push(Cell::Int(prov.seed as i64));
        row.push(Cell::Text(CODE_VERSION.into()));
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Stable sort by the key columns.
    pub fn sort(&mut self) {
        let k = self.key_columns;
        self.rows.sort_by(|a, b| {
            a[..k]
                .iter()
                .zip(&b[..k])
                .map(|(x, y)| x.cmp_key(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn gnuplot_script(&self) -> String {
        let mut s = String::new();
        let csv = format!("{}.csv", self.name);
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set key autotitle columnhead");
        let _ = writeln!(s, "set title '{}'", self.name);
        if let Some(p) = &self.plot {
            if p.logscale_x {
                let _ = writeln!(s, "set logscale x");
            }
            if p.logscale_y {
                let _ = writeln!(s, "set logscale y");
            }
            let _ = writeln!(s, "set xlabel '{}'", p.x);
            let _ = writeln!(s, "set ylabel '{}'", p.y);
            let x = self.column_index(&p.x).map_or(1, |i| i + 1);
            let y = self.column_index(&p.y).map_or(2, |i| i + 1);
            let _ = writeln!(s, "plot '{csv}' using {x}:{y} with points");
        } else {
            let _ = writeln!(s, "plot '{csv}' using 1:2 with points");
        }
        s
    }

    /// Write `<name>.csv` and `<name>.gp` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, self.to_csv()?)?;
        std::fs::write(dir.join(format!("{}.gp", self.name)), self.gnuplot_script())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            spec_hash: "abcd".into(),
            seed: 7,
        }
    }

    #[test]
    fn rows_carry_provenance_and_sort() {
        let mut t = ResultTable::new("t", &["N", "x"], 1).with_plot("N", "x", true, false);
        t.push(vec![Cell::from(64usize), Cell::from(0.5)], &prov()).unwrap();
        t.push(vec![Cell::from(8usize), Cell::from(-0.25)], &prov()).unwrap();
        assert!(t.push(vec![Cell::from(1.0)], &prov()).is_err());
        t.sort();
        let csv = t.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "N,x,spec_hash,seed,code_version");
        assert!(lines[1].starts_with("8,-0.25,abcd,7,intermap-"));
        assert!(t.gnuplot_script().contains("using 1:2"));
    }

    #[test]
    fn floats_round_trip_through_text() {
        let x = 0.1 + 0.2;
        assert_eq!(Cell::from(x).render().parse::<f64>().unwrap(), x);
    }
}
