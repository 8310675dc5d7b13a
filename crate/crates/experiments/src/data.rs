//! Numeric CSV datasets.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{ExpError, Result};

/// Covariates and response parsed from a headed, all-numeric CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub covariates: Vec<String>,
    pub response: String,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }
}

fn parse_cell(text: &str, line: usize, column: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| ExpError::Data(format!("line {line}, column `{column}`: `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(ExpError::Data(format!("line {line}, column `{column}`: non-finite value")));
    }
    Ok(v)
}

pub fn parse_dataset<R: Read>(reader: R, response: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let yi = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| ExpError::Data(format!("response column `{response}` not found")))?;
    if headers.len() < 2 {
        return Err(ExpError::Data("dataset needs at least one covariate column".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != headers.len() {
            return Err(ExpError::Data(format!("line {line}: expected {} fields, got {}", headers.len(), rec.len())));
        }
        for (j, cell) in rec.iter().enumerate() {
            let v = parse_cell(cell, line, &headers[j])?;
            if j == yi {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    let n = ys.len();
    if n == 0 {
        return Err(ExpError::Data("dataset has no rows".into()));
    }
    let p = headers.len() - 1;
    Ok(Dataset {
        covariates: headers.iter().enumerate().filter(|&(j, _)| j != yi).map(|(_, h)| h.clone()).collect(),
        response: response.to_string(),
        x: DMatrix::from_row_slice(n, p, &xs),
        y: DVector::from_vec(ys),
    })
}

pub fn read_dataset(path: &Path, response: &str) -> Result<Dataset> {
    let f = std::fs::File::open(path).map_err(|e| ExpError::io(path, e))?;
    parse_dataset(f, response).map_err(|e| match e {
        ExpError::Data(m) => ExpError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Writes covariates then the response, with values in shortest round-trip form.
pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = ds.covariates.clone();
    header.push(ds.response.clone());
    w.write_record(&header)?;
    for i in 0..ds.n() {
        let mut rec: Vec<String> = ds.x.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.y[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| ExpError::io(path, e))
}

/// Numeric matrix from CSV; a first row that does not parse is taken as a header.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let f = std::fs::File::open(path).map_err(|e| ExpError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(f);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|c| c.trim().parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(ExpError::Data(format!("{}: line {}: non-numeric entry", path.display(), i + 1))),
        }
    }
    let n = rows.len();
    if n == 0 {
        return Err(ExpError::Data(format!("{}: no numeric rows", path.display())));
    }
    let p = rows[0].len();
    if let Some(k) = rows.iter().position(|r| r.len() != p) {
        return Err(ExpError::Data(format!("{}: row {} has {} entries, expected {p}", path.display(), k + 1, rows[k].len())));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ExpError::Data(format!("{}: non-finite entry", path.display())));
    }
    Ok(DMatrix::from_row_iterator(n, p, rows.into_iter().flatten()))
}
