//! Benchmark dataset ingestion.
//!
//! Datasets follow the common density-estimation layout: three files per
//! dataset named `<name>.ts.data`, `<name>.valid.data`, `<name>.test.data`,
//! each a plain text matrix of comma-separated small nonnegative integers,
//! one sample per line. Both `<dir>/<name>.ts.data` and
//! `<dir>/<name>/<name>.ts.data` are accepted.

use std::fmt;
use std::path::{Path, PathBuf};

use moat_core::domain::{Assignments, VarDomain};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn suffix(self) -> &'static str {
        match self {
            Split::Train => "ts.data",
            Split::Valid => "valid.data",
            Split::Test => "test.data",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Valid => write!(f, "valid"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// One split of a dataset: a dense row-major assignment matrix.
#[derive(Clone, Debug)]
pub struct Dataset {
    data: Vec<usize>,
    n_cols: usize,
    split: Split,
    path: PathBuf,
}

impl Dataset {
    /// Parses a comma-separated integer matrix. Ragged rows and non-integer
    /// cells are reported with their line number.
    pub fn load(path: &Path, split: Split) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let mut data = Vec::new();
        let mut n_cols = 0usize;
        let mut rows = 0usize;
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut row_len = 0usize;
            for cell in line.split(',') {
                let value: usize = cell.trim().parse().map_err(|_| {
                    CliError::Data(format!(
                        "{}: line {}: cell {:?} is not a nonnegative integer",
                        path.display(),
                        line_no + 1,
                        cell
                    ))
                })?;
                data.push(value);
                row_len += 1;
            }
            if rows == 0 {
                n_cols = row_len;
            } else if row_len != n_cols {
                return Err(CliError::Data(format!(
                    "{}: line {}: {} columns, expected {}",
                    path.display(),
                    line_no + 1,
                    row_len,
                    n_cols
                )));
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(CliError::Data(format!("{}: empty dataset", path.display())));
        }
        Ok(Dataset { data, n_cols, split, path: path.to_path_buf() })
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_cols
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn view(&self) -> Assignments<'_> {
        Assignments::new(&self.data, self.n_cols).expect("dataset is rectangular")
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// Largest value per column, for domain inference.
    fn max_per_column(&self) -> Vec<usize> {
        let mut max = vec![0usize; self.n_cols];
        for row in self.data.chunks_exact(self.n_cols) {
            for (m, &x) in max.iter_mut().zip(row) {
                *m = (*m).max(x);
            }
        }
        max
    }

    /// Errors if any cell falls outside the domain.
    pub fn check_against(&self, domain: &VarDomain) -> Result<(), CliError> {
        if self.n_cols != domain.n() {
            return Err(CliError::Data(format!(
                "{}: {} columns but the model has {} variables",
                self.path.display(),
                self.n_cols,
                domain.n()
            )));
        }
        for (r, row) in self.data.chunks_exact(self.n_cols).enumerate() {
            for (v, &x) in row.iter().enumerate() {
                if x >= domain.cardinality(v) {
                    return Err(CliError::Data(format!(
                        "{}: row {}: value {} exceeds cardinality {} of variable {}",
                        self.path.display(),
                        r + 1,
                        x,
                        domain.cardinality(v),
                        v
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The three standard splits of one benchmark dataset.
#[derive(Clone, Debug)]
pub struct DatasetTriple {
    pub train: Dataset,
    pub valid: Dataset,
    pub test: Dataset,
}

impl DatasetTriple {
    /// Loads `<dir>/<name>.<suffix>`, falling back to
    /// `<dir>/<name>/<name>.<suffix>`.
    pub fn load(dir: &Path, name: &str) -> Result<Self, CliError> {
        let locate = |split: Split| -> Result<Dataset, CliError> {
            let flat = dir.join(format!("{name}.{}", split.suffix()));
            let nested = dir.join(name).join(format!("{name}.{}", split.suffix()));
            let path = if flat.exists() {
                flat
            } else if nested.exists() {
                nested
            } else {
                return Err(CliError::Data(format!(
                    "{} split of dataset {name:?} not found at {} or {}",
                    split,
                    flat.display(),
                    nested.display()
                )));
            };
            Dataset::load(&path, split)
        };
        let triple = DatasetTriple {
            train: locate(Split::Train)?,
            valid: locate(Split::Valid)?,
            test: locate(Split::Test)?,
        };
        if triple.train.n_cols() != triple.valid.n_cols()
            || triple.train.n_cols() != triple.test.n_cols()
        {
            return Err(CliError::Data(format!(
                "dataset {name:?} splits disagree on column count"
            )));
        }
        Ok(triple)
    }

    /// Smallest domain covering all three splits; cardinalities are at
    /// least 2 so constant columns stay modelable.
    pub fn infer_domain(&self) -> Result<VarDomain, CliError> {
        let mut max = self.train.max_per_column();
        for other in [&self.valid, &self.test] {
            for (m, x) in max.iter_mut().zip(other.max_per_column()) {
                *m = (*m).max(x);
            }
        }
        VarDomain::new(max.into_iter().map(|m| (m + 1).max(2)).collect())
            .map_err(CliError::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_comma_separated_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "toy.ts.data", "0,1,0\n1,1,0\n");
        let d = Dataset::load(&path, Split::Train).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.n_cols(), 3);
        assert_eq!(d.row(1), &[1, 1, 0]);
    }

    #[test]
    fn ragged_rows_are_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "bad.ts.data", "0,1\n1\n");
        let err = Dataset::load(&path, Split::Train).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn non_integer_cells_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "bad.ts.data", "0,x\n");
        let err = Dataset::load(&path, Split::Train).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn triple_loading_and_domain_inference() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "toy.ts.data", "0,2\n1,0\n");
        write_file(dir.path(), "toy.valid.data", "0,1\n");
        write_file(dir.path(), "toy.test.data", "1,0\n");
        let t = DatasetTriple::load(dir.path(), "toy").unwrap();
        let domain = t.infer_domain().unwrap();
        assert_eq!(domain.cardinalities(), &[2, 3]);
    }

    #[test]
    fn nested_layout_is_found() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("toy")).unwrap();
        for split in ["ts", "valid", "test"] {
            write_file(&dir.path().join("toy"), &format!("toy.{split}.data"), "0,1\n");
        }
        assert!(DatasetTriple::load(dir.path(), "toy").is_ok());
    }

    #[test]
    fn cardinality_check_names_the_offender() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "toy.ts.data", "0,1\n0,3\n");
        let d = Dataset::load(&path, Split::Train).unwrap();
        let domain = VarDomain::binary(2).unwrap();
        let err = d.check_against(&domain).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }
}
