//! Field dumps.
//!
//! Binary layout: one ASCII header line
//! `RAFTFIELD v1 d n1 [n2 [n3]] boundary` terminated by `\n`, followed by the
//! row-major values as little-endian `f64`. The boundary word is the shared
//! kind (`neumann` or `periodic`), or a comma-separated list for mixed grids.
//! Extents are not stored; the reader checks shape and boundaries against the
//! grid supplied by the caller.

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{Boundary, Grid, ScalarField};
use crate::error::{Error, Result};

const MAGIC: &str = "RAFTFIELD";
const VERSION: &str = "v1";

/// Contents of a field dump before it is attached to a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RawField {
    pub shape: Vec<usize>,
    pub boundaries: Vec<Boundary>,
    pub values: Vec<f64>,
}

impl RawField {
    /// Attaches the values to `grid`, which must match the recorded shape and
    /// boundary kinds.
    pub fn into_field(self, grid: Arc<Grid>) -> Result<ScalarField> {
        if self.shape != grid.shape() {
            return Err(Error::FieldFormat(format!(
                "field shape {:?} does not match grid shape {:?}",
                self.shape,
                grid.shape()
            )));
        }
        let gb: Vec<Boundary> = grid.axes().iter().map(|a| a.boundary).collect();
        if self.boundaries != gb {
            return Err(Error::FieldFormat(format!(
                "field boundaries {:?} do not match grid {:?}",
                self.boundaries, gb
            )));
        }
        ScalarField::new(grid, self.values)
    }
}

fn boundary_word(grid: &Grid) -> String {
    match grid.uniform_boundary() {
        Some(b) => b.as_str().to_string(),
        None => grid.axes().iter().map(|a| a.boundary.as_str()).collect::<Vec<_>>().join(","),
    }
}

pub fn write_raftfield<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let g = field.grid();
    let dims: Vec<String> = g.shape().iter().map(|n| n.to_string()).collect();
    writeln!(out, "{MAGIC} {VERSION} {} {} {}", g.dim(), dims.join(" "), boundary_word(g))?;
    let mut buf = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_raftfield<R: BufRead>(mut input: R) -> Result<RawField> {
    let mut header = Vec::new();
    input.read_until(b'\n', &mut header)?;
    let header = String::from_utf8(header).map_err(|_| Error::FieldFormat("header is not valid UTF-8".into()))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    if words.len() < 4 || words[0] != MAGIC {
        return Err(Error::FieldFormat("missing RAFTFIELD header".into()));
    }
    if words[1] != VERSION {
        return Err(Error::FieldFormat(format!("unsupported version `{}`", words[1])));
    }
    let d: usize = words[2].parse().map_err(|_| Error::FieldFormat(format!("bad dimension `{}`", words[2])))?;
    if !(1..=3).contains(&d) || words.len() != 4 + d {
        return Err(Error::FieldFormat(format!("malformed header `{}`", header.trim_end())));
    }
    let shape = words[3..3 + d]
        .iter()
        .map(|w| w.parse::<usize>().map_err(|_| Error::FieldFormat(format!("bad point count `{w}`"))))
        .collect::<Result<Vec<_>>>()?;
    let bword = words[3 + d];
    let boundaries = if bword.contains(',') {
        let list = bword
            .split(',')
            .map(str::parse::<Boundary>)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::FieldFormat(e.to_string()))?;
        if list.len() != d {
            return Err(Error::FieldFormat(format!("expected {d} boundary kinds, got {}", list.len())));
        }
        list
    } else {
        let b: Boundary = bword.parse().map_err(|e: Error| Error::FieldFormat(e.to_string()))?;
        vec![b; d]
    };
    let count: usize = shape.iter().product();
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * count {
        return Err(Error::FieldFormat(format!("expected {} bytes of data, found {}", 8 * count, bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    Ok(RawField { shape, boundaries, values })
}

/// CSV with one row per point: index columns `i0[,i1]`, coordinate columns
/// `x0[,x1]`, then `value`. Only 1D and 2D fields are supported.
pub fn write_csv<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let g = field.grid();
    let d = g.dim();
    if d > 2 {
        return Err(Error::FieldFormat("CSV output supports d <= 2".into()));
    }
    let idx: Vec<String> = (0..d).map(|i| format!("i{i}")).collect();
    let xs: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},{},value", idx.join(","), xs.join(","))?;
    for (flat, v) in field.values().iter().enumerate() {
        let k = g.multi_index(flat);
        let p = g.point(flat);
        let ks: Vec<String> = k.iter().map(|i| i.to_string()).collect();
        let ps: Vec<String> = p.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(out, "{},{},{v:.17e}", ks.join(","), ps.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Axis};

    #[test]
    fn round_trip_bytes() {
        let g = make_grid(2, &[1.0, 1.0], &[4, 5], Boundary::Neumann).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| x[0] - 2.0 * x[1]).unwrap();
        let mut buf = Vec::new();
        write_raftfield(&f, &mut buf).unwrap();
        assert!(buf.starts_with(b"RAFTFIELD v1 2 4 5 neumann\n"));
        let raw = read_raftfield(&buf[..]).unwrap();
        let back = raw.into_field(g).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn mixed_boundaries_listed() {
        let g = Grid::new(vec![Axis::centered(1.0, 4, Boundary::Neumann), Axis::centered(1.0, 5, Boundary::Periodic)])
            .unwrap();
        let f = ScalarField::zeros(g);
        let mut buf = Vec::new();
        write_raftfield(&f, &mut buf).unwrap();
        assert!(buf.starts_with(b"RAFTFIELD v1 2 4 5 neumann,periodic\n"));
        let raw = read_raftfield(&buf[..]).unwrap();
        assert_eq!(raw.boundaries, vec![Boundary::Neumann, Boundary::Periodic]);
    }

    #[test]
    fn truncated_payload_rejected() {
        let data = b"RAFTFIELD v1 1 4 neumann\n\0\0\0\0\0\0\0\0";
        assert!(matches!(read_raftfield(&data[..]), Err(Error::FieldFormat(_))));
        assert!(read_raftfield(&b"NOPE\n"[..]).is_err());
    }
}
