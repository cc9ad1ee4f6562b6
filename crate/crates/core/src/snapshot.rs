//! CSV snapshots of field slices with a JSON sidecar carrying the grid.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

/// Sidecar descriptor written next to every snapshot CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDescriptor {
    pub grid: GridSpec,
    /// Slice indices present in the CSV, in file order.
    pub slices: Vec<usize>,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes the requested slices as `t,x1,...,xN,u` rows and the JSON sidecar.
pub fn write_snapshot(f: &ScalarField, slices: &[usize], csv: &Path) -> Result<()> {
    let spec = f.spec();
    if let Some(&bad) = slices.iter().find(|&&i| i >= spec.n_slices()) {
        return Err(Error::InvalidArgument(format!("slice {bad} out of range")));
    }
    let mut w = BufWriter::new(fs::File::create(csv)?);
    let mut header = String::from("t");
    for a in 1..=spec.dim {
        header.push_str(&format!(",x{a}"));
    }
    header.push_str(",u");
    writeln!(w, "{header}")?;
    let mut x = vec![0.0; spec.dim];
    for &i in slices {
        let t = spec.time(i);
        for (j, v) in f.slice(i).iter().enumerate() {
            spec.center(j, &mut x);
            write!(w, "{t:.16e}")?;
            for xa in &x {
                write!(w, ",{xa:.16e}")?;
            }
            writeln!(w, ",{v:.16e}")?;
        }
    }
    w.flush()?;
    let desc = SnapshotDescriptor { grid: spec.clone(), slices: slices.to_vec() };
    fs::write(sidecar_path(csv), serde_json::to_string_pretty(&desc)?)?;
    Ok(())
}

/// Reads a snapshot back: the descriptor and the values of each stored slice.
pub fn read_snapshot(csv: &Path) -> Result<(SnapshotDescriptor, Vec<Vec<f64>>)> {
    let desc: SnapshotDescriptor = serde_json::from_str(&fs::read_to_string(sidecar_path(csv))?)?;
    desc.grid.validate()?;
    let m = desc.grid.slice_len();
    let cols = desc.grid.dim + 2;
    let mut out = vec![Vec::with_capacity(m); desc.slices.len()];
    let reader = BufReader::new(fs::File::open(csv)?);
    for (line_no, line) in reader.lines().enumerate().skip(1) {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(Error::Parse(format!("line {}: expected {cols} columns", line_no + 1)));
        }
        let v: f64 = fields[cols - 1]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))?;
        let row = (line_no - 1) / m;
        if row >= out.len() {
            return Err(Error::Parse("more rows than the descriptor declares".into()));
        }
        out[row].push(v);
    }
    if out.iter().any(|s| s.len() != m) {
        return Err(Error::Parse("fewer rows than the descriptor declares".into()));
    }
    Ok((desc, out))
}
