//! CSV and summary emission.
//!
//! Every CSV starts with a header line, columns keep a fixed order, reals are
//! written as `{:.16e}` (17 significant digits) and integers in decimal, so
//! the bytes depend only on the values.

use crate::dynamics::{DiagnosticsRecord, FluidState};
use crate::error::{Error, Result};
use crate::quantum::ComparisonSample;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Formats one real the way every CSV in this crate does.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv {
            text,
            columns: header.len(),
        }
    }

    /// Appends a row of preformatted cells.
    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn reals(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&x| real(x)).collect();
        self.row(&cells);
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.text)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> Csv {
    let mut csv = Csv::new(&DiagnosticsRecord::HEADER);
    for r in records {
        let mut cells: Vec<String> = r.reals().iter().map(|&x| real(x)).collect();
        cells.push(r.active_cells.to_string());
        csv.row(&cells);
    }
    csv
}

pub fn comparison_csv(samples: &[ComparisonSample]) -> Csv {
    let mut csv = Csv::new(&ComparisonSample::HEADER);
    for s in samples {
        csv.reals(&s.reals());
    }
    csv
}

/// One row per grid point: `x, rho, v` in one dimension.
pub fn fields_csv(state: &FluidState) -> Csv {
    let grid = state.grid();
    let mut csv = Csv::new(&["x", "rho", "v"]);
    let x = grid.axis_coords(0);
    for ((x, r), v) in x.iter().zip(state.rho.values()).zip(state.v.comp(0)) {
        csv.reals(&[*x, *r, *v]);
    }
    csv
}

/// `x, <name>` for a scalar profile.
pub fn profile_csv(x: &[f64], name: &str, values: &[f64]) -> Csv {
    let mut csv = Csv::new(&["x", name]);
    for (x, y) in x.iter().zip(values) {
        csv.reals(&[*x, *y]);
    }
    csv
}

/// `fields_t000123.csv` for sample index 123.
pub fn fields_name(sample: usize) -> String {
    format!("fields_t{sample:06}.csv")
}

/// Pretty JSON with a trailing newline; object keys come out sorted.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    let _ = writeln!(text);
    write_text(path, &text)
}

/// Files written by a run, in the order they were produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        create_dir(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn csv(&mut self, name: &str, csv: &Csv) -> Result<()> {
        let p = self.dir.join(name);
        csv.write(&p)?;
        self.files.push(p);
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let p = self.dir.join(name);
        write_json(&p, value)?;
        self.files.push(p);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_carry_seventeen_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(-2.5), "-2.5000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(real(x).parse::<f64>().unwrap(), x);
        let mut csv = Csv::new(&["a", "b"]);
        csv.reals(&[1.0, 0.0]);
        assert_eq!(csv.as_str(), "a,b\n1.0000000000000000e0,0.0000000000000000e0\n");
    }
}
