//! CSV field files and atomic writes.
//!
//! Column contract:
//! - 1-D fields: `x,t,value`, x outer, t inner.
//! - d-dimensional fields: `x1,...,xd,t,value`, row-major in that order.
//! - complex fields: `x,t,re,im`.
//! - phase samples: `x,w,s_x,s_xx,time_of_flight`.
//!
//! Floats use the shortest representation that round-trips, so fields read
//! back are bit-identical to the ones written.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Result, WkbError};
use crate::hj::AxisSamples;
use crate::model::{AmplitudeField, SpaceTimeGrid};
use crate::multidim::{AmplitudeFieldD, GridD};

/// Write to a temporary sibling, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| WkbError::Io(format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn field_csv(field: &AmplitudeField) -> String {
    let g = field.grid;
    let mut out = String::with_capacity(32 * g.nx * g.nt);
    out.push_str("x,t,value\n");
    for i in 0..g.nx {
        for n in 0..g.nt {
            out.push_str(&format!(
                "{},{},{}\n",
                g.x(i),
                g.t(n),
                field.values()[[i, n]]
            ));
        }
    }
    out
}

pub fn complex_csv(grid: &SpaceTimeGrid, values: &Array2<Complex64>) -> String {
    let mut out = String::from("x,t,re,im\n");
    for i in 0..grid.nx {
        for n in 0..grid.nt {
            let z = values[[i, n]];
            out.push_str(&format!("{},{},{},{}\n", grid.x(i), grid.t(n), z.re, z.im));
        }
    }
    out
}

pub fn phase_csv(s: &AxisSamples) -> String {
    let mut out = String::from("x,w,s_x,s_xx,time_of_flight\n");
    for i in 0..s.xs.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.xs[i], s.w[i], s.s_x[i], s.s_xx[i], s.time_of_flight[i]
        ));
    }
    out
}

pub fn field_d_csv(field: &AmplitudeFieldD) -> String {
    let g = &field.grid;
    let d = g.dim();
    let mut out = String::new();
    for i in 0..d {
        out.push_str(&format!("x{},", i + 1));
    }
    out.push_str("t,value\n");
    for (idx, v) in field.values().indexed_iter() {
        for i in 0..d {
            out.push_str(&format!("{},", g.x(i, idx[i])));
        }
        out.push_str(&format!("{},{}\n", g.t(idx[d]), v));
    }
    out
}

/// Parse a numeric CSV with the expected header.
pub fn read_table(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let got = lines.next().unwrap_or("");
    if got.split(',').map(str::trim).ne(header.iter().copied()) {
        return Err(WkbError::Io(format!(
            "unexpected CSV header {got:?}, expected {}",
            header.join(",")
        )));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(r, l)| {
            let row = l
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| WkbError::Io(format!("CSV row {}: {e}", r + 2)))?;
            if row.len() != header.len() {
                return Err(WkbError::Io(format!(
                    "CSV row {} has {} columns",
                    r + 2,
                    row.len()
                )));
            }
            Ok(row)
        })
        .collect()
}

fn coordinate_mismatch(what: &str, row: usize) -> WkbError {
    WkbError::Io(format!(
        "stored field: {what} coordinate mismatch at row {}",
        row + 2
    ))
}

/// Read a 1-D field written by [`field_csv`], checking its coordinates.
pub fn read_field_csv(text: &str, order: usize, grid: SpaceTimeGrid) -> Result<AmplitudeField> {
    let rows = read_table(text, &["x", "t", "value"])?;
    if rows.len() != grid.nx * grid.nt {
        return Err(WkbError::Io(format!(
            "stored field has {} rows, grid has {} nodes",
            rows.len(),
            grid.nx * grid.nt
        )));
    }
    let mut values = Array2::zeros(grid.shape());
    for (r, row) in rows.iter().enumerate() {
        let (i, n) = (r / grid.nt, r % grid.nt);
        if row[0] != grid.x(i) {
            return Err(coordinate_mismatch("x", r));
        }
        if row[1] != grid.t(n) {
            return Err(coordinate_mismatch("t", r));
        }
        values[[i, n]] = row[2];
    }
    AmplitudeField::new(order, grid, values)
}

/// Read a d-dimensional field written by [`field_d_csv`].
pub fn read_field_d_csv(text: &str, order: usize, grid: &GridD) -> Result<AmplitudeFieldD> {
    let d = grid.dim();
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.push("t".into());
    header.push("value".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = read_table(text, &header)?;
    let shape = grid.shape();
    let mut values = ArrayD::zeros(IxDyn(&shape));
    if rows.len() != values.len() {
        return Err(WkbError::Io(format!(
            "stored field has {} rows, grid has {} nodes",
            rows.len(),
            values.len()
        )));
    }
    for ((r, (idx, slot)), row) in values.indexed_iter_mut().enumerate().zip(&rows) {
        for i in 0..d {
            if row[i] != grid.x(i, idx[i]) {
                return Err(coordinate_mismatch(&format!("x{}", i + 1), r));
            }
        }
        if row[d] != grid.t(idx[d]) {
            return Err(coordinate_mismatch("t", r));
        }
        *slot = row[d + 1];
    }
    AmplitudeFieldD::new(order, grid.clone(), values)
}
