//! CSV files read by the plotting scripts.
//!
//! `scalars.csv`: `t,total_mass,linf_mean_rho,std_linf,second_moment`.
//! `fields_t<t:.6>.csv`: `x,mean_rho,std_rho,mode_1..mode_K,mean_s`.
//! Comma separated, one header row, LF endings, floats in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::{FieldSnapshot, ScalarRow, SCALAR_HEADER};
use crate::error::{Error, Result};

pub const SCALARS_FILE: &str = "scalars.csv";

pub fn snapshot_file_name(t: f64) -> String {
    format!("fields_t{t:.6}.csv")
}

fn push_row(buf: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            buf.push(',');
        }
        first = false;
        write!(buf, "{v:?}").expect("writing to a String");
    }
    buf.push('\n');
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_scalars(dir: &Path, rows: &[ScalarRow]) -> Result<PathBuf> {
    let mut buf = SCALAR_HEADER.join(",");
    buf.push('\n');
    for r in rows {
        push_row(&mut buf, r.values());
    }
    let path = dir.join(SCALARS_FILE);
    write_file(&path, &buf)?;
    Ok(path)
}

pub fn field_header(k: usize) -> Vec<String> {
    let mut h = vec!["x".to_string(), "mean_rho".into(), "std_rho".into()];
    h.extend((1..=k).map(|m| format!("mode_{m}")));
    h.push("mean_s".into());
    h
}

pub fn write_fields(dir: &Path, snap: &FieldSnapshot) -> Result<PathBuf> {
    let k = snap.modes.len();
    let mut buf = field_header(k).join(",");
    buf.push('\n');
    for i in 0..snap.x.len() {
        let row = [snap.x[i], snap.mean_rho[i], snap.std_rho[i]]
            .into_iter()
            .chain(snap.modes.iter().map(|m| m[i]))
            .chain(std::iter::once(snap.mean_s[i]));
        push_row(&mut buf, row);
    }
    let path = dir.join(snapshot_file_name(snap.t));
    write_file(&path, &buf)?;
    Ok(path)
}

/// Header plus numeric rows of a file written above.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::config(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config(format!("{} row {}: {e}", path.display(), n + 2)))?;
        if row.len() != header.len() {
            return Err(Error::config(format!(
                "{} row {} has {} fields, header has {}",
                path.display(),
                n + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}
