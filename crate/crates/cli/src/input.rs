use std::path::Path;

use strands_core::ndarray::{Array1, Array2};
use strands_core::{standardize, Dataset, Error};

use crate::error::CliError;

/// A numeric CSV split into predictors and response.
#[derive(Debug, Clone)]
pub struct Table {
    pub names: Vec<String>,
    pub response: String,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl Table {
    pub fn read(path: &Path, response: &str) -> Result<Self, CliError> {
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
        Self::from_reader(file, response).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_reader<R: std::io::Read>(reader: R, response: &str) -> Result<Self, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Usage(format!("malformed header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let target = header
            .iter()
            .position(|h| h == response)
            .ok_or_else(|| CliError::Usage(format!("response column '{response}' not found")))?;
        if header.len() < 2 {
            return Err(CliError::Usage("no predictor columns".into()));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| CliError::Usage(format!("malformed row: {e}")))?;
            for (col, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::Usage(format!(
                        "line {}: column '{}' holds non-numeric value '{cell}'",
                        i + 2,
                        header[col]
                    ))
                })?;
                if !v.is_finite() {
                    return Err(CliError::Usage(format!(
                        "line {}: column '{}' is not finite",
                        i + 2,
                        header[col]
                    )));
                }
                if col == target {
                    ys.push(v);
                } else {
                    xs.push(v);
                }
            }
        }
        let n = ys.len();
        let p = header.len() - 1;
        let x = Array2::from_shape_vec((n, p), xs).map_err(|e| CliError::Usage(e.to_string()))?;
        let names = header
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != target)
            .map(|(_, h)| h.clone())
            .collect();
        Ok(Table {
            names,
            response: response.to_string(),
            x,
            y: Array1::from(ys),
        })
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    /// Standardized dataset; a constant predictor is reported by name.
    pub fn dataset(&self) -> Result<Dataset, CliError> {
        standardize(self.x.view(), self.y.view()).map_err(|e| self.named(e))
    }

    pub fn named(&self, e: Error) -> CliError {
        match e {
            Error::ConstantColumn(j) => CliError::Usage(format!("predictor column '{}' is constant", self.names[j])),
            other => other.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_response_from_predictors() {
        let t = Table::from_reader("a,y,b\n1,2,3\n4,5,6\n".as_bytes(), "y").unwrap();
        assert_eq!(t.names, vec!["a", "b"]);
        assert_eq!(t.y.to_vec(), vec![2.0, 5.0]);
        assert_eq!(t.x.row(1).to_vec(), vec![4.0, 6.0]);
    }

    #[test]
    fn rejects_bad_cells_and_ragged_rows() {
        assert!(Table::from_reader("a,y\n1,x\n".as_bytes(), "y").is_err());
        assert!(Table::from_reader("a,y\n1,2\n3\n".as_bytes(), "y").is_err());
        assert!(Table::from_reader("a,b\n1,2\n".as_bytes(), "y").is_err());
    }
}
