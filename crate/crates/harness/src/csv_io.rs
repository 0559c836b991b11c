//! CSV emission and parsing. Values are written with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use forwarding_core::{Snapshot, TrajectoryRow64};

use crate::error::{HarnessError, Result};

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "z", "u", "V", "E1", "E2", "z_sq", "w_l2_sq"];
pub const SNAPSHOT_HEADER: [&str; 2] = ["x", "w"];

/// 17 significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_rows<W: Write>(out: W, rows: &[TrajectoryRow64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        w.write_record(r.values().map(format_value))?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<TrajectoryRow64>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(HarnessError::Config(format!("unexpected trajectory header {header:?}")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let mut v = [0.0; 8];
            for (slot, field) in v.iter_mut().zip(rec.iter()) {
                *slot = field
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("bad number `{field}` in trajectory csv")))?;
            }
            Ok(TrajectoryRow64 { t: v[0], z: v[1], u: v[2], v: v[3], e1: v[4], e2: v[5], z_sq: v[6], w_l2_sq: v[7] })
        })
        .collect()
}

pub fn write_snapshot<W: Write>(out: W, snap: &Snapshot<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for (x, v) in snap.x.iter().zip(&snap.w) {
        w.write_record([format_value(*x), format_value(*v)])?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

/// `w_t<time>.csv`, with the time rounded to 1e-9 and printed in its
/// shortest decimal form.
pub fn snapshot_file_name(t: f64) -> String {
    let t = (t * 1e9).round() / 1e9;
    format!("w_t{t}.csv")
}

pub fn write_rows_to(path: &Path, rows: &[TrajectoryRow64]) -> Result<()> {
    let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_rows(std::io::BufWriter::new(f), rows)
}

pub fn read_rows_from(path: &Path) -> Result<Vec<TrajectoryRow64>> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_rows(std::io::BufReader::new(f))
}

pub fn write_snapshot_to(path: &Path, snap: &Snapshot<f64>) -> Result<()> {
    let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_snapshot(std::io::BufWriter::new(f), snap)
}
