//! CSV and JSON output. Complex values always appear as paired `Re_`/`Im_`
//! columns; floats are written in Rust's shortest round-trip form so that
//! identical runs produce identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::dynamics::{Frame, PairField, TimeSeries};
use crate::{Error, Result, C64};

/// A rectangular numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of the named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(&self.headers)?;
        for row in &self.rows {
            if row.len() != self.headers.len() {
                return Err(Error::InvalidParameter(format!(
                    "row has {} entries, header {}",
                    row.len(),
                    self.headers.len()
                )));
            }
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("{path:?}: {v}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { headers, rows })
    }
}

/// `["Re_name", "Im_name"]`.
pub fn complex_headers(name: &str) -> [String; 2] {
    [format!("Re_{name}"), format!("Im_{name}")]
}

/// Columns `t, Re, Im, abs, arg`.
pub fn time_series_table(series: &TimeSeries) -> Table {
    let mut t = Table::new(["t", "Re", "Im", "abs", "arg"]);
    for (&tk, z) in series.times.iter().zip(&series.values) {
        t.push(vec![tk, z.re, z.im, z.norm(), z.arg()]);
    }
    t
}

/// Columns `r, Re_name, Im_name` for a complex profile.
pub fn profile_table(axis: &[f64], values: &[C64], name: &str) -> Table {
    let [re, im] = complex_headers(name);
    let mut t = Table::new(["r".to_string(), re, im]);
    for (&r, z) in axis.iter().zip(values) {
        t.push(vec![r, z.re, z.im]);
    }
    t
}

/// All four components of a one-dimensional field against `r`.
pub fn components_table(field: &PairField) -> Result<Table> {
    if field.frame == Frame::Lab2d {
        return Err(Error::InvalidParameter("components_table expects a one-dimensional field".into()));
    }
    let mut headers = vec!["r".to_string()];
    for name in ["EE", "ES", "SE", "SS"] {
        headers.extend(complex_headers(name));
    }
    let mut t = Table::new(headers);
    for (i, &r) in field.axis.iter().enumerate() {
        let mut row = vec![r];
        for c in field.components() {
            row.extend([c[i].re, c[i].im]);
        }
        t.push(row);
    }
    Ok(t)
}

/// Columns `z1, z2, abs2_EE, arg_EE` for a two-dimensional snapshot, with
/// every `stride`-th grid point along each axis.
pub fn field2d_table(field: &PairField, stride: usize) -> Result<Table> {
    if field.frame != Frame::Lab2d {
        return Err(Error::InvalidParameter("field2d_table expects a lab-frame field".into()));
    }
    let n = field.axis.len();
    let stride = stride.max(1);
    let mut t = Table::new(["z1", "z2", "abs2_EE", "arg_EE"]);
    for i in (0..n).step_by(stride) {
        for j in (0..n).step_by(stride) {
            let z = field.ee[i * n + j];
            t.push(vec![field.axis[i], field.axis[j], z.norm_sqr(), z.arg()]);
        }
    }
    Ok(t)
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
