//! Flat binary snapshots of real field data.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! bytes 0..4    magic "SFLD"
//! bytes 4..8    u32 format version (currently 1)
//! bytes 8..12   u32 grid size n
//! bytes 12..16  u32 component count d
//! then          d × n² little-endian f64, row-major, components consecutive
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, SpectralError};
use crate::field::Field;
use crate::grid::Grid;

const MAGIC: &[u8; 4] = b"SFLD";
const VERSION: u32 = 1;

/// Writes real-valued fields as one snapshot. All fields must share a grid
/// and be real up to 1e-9 of their size.
pub fn write_fields(path: &Path, fields: &[&Field]) -> Result<()> {
    let first = fields
        .first()
        .ok_or_else(|| SpectralError::Snapshot("no fields to write".into()))?;
    let grid = first.grid();
    for f in fields {
        if f.grid().n() != grid.n() {
            return Err(SpectralError::GridMismatch(grid.n(), f.grid().n()));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for f in fields {
        for v in f.real_values(1e-9)? {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a snapshot back into fields.
pub fn read_fields(path: &Path) -> Result<Vec<Field>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 16];
    r.read_exact(&mut head)
        .map_err(|_| SpectralError::Snapshot(format!("{}: truncated header", path.display())))?;
    if &head[0..4] != MAGIC {
        return Err(SpectralError::Snapshot(format!(
            "{}: bad magic {:?}",
            path.display(),
            &head[0..4]
        )));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(SpectralError::Snapshot(format!(
            "{}: unsupported version {version}",
            path.display()
        )));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(head[12..16].try_into().unwrap()) as usize;
    let grid = Grid::new(n)?;

    let mut out = Vec::with_capacity(d);
    let mut buf = vec![0u8; grid.len() * 8];
    for c in 0..d {
        r.read_exact(&mut buf).map_err(|_| {
            SpectralError::Snapshot(format!("{}: truncated component {c}", path.display()))
        })?;
        let vals: Vec<f64> = buf
            .chunks_exact(8)
            .map(|ch| f64::from_le_bytes(ch.try_into().unwrap()))
            .collect();
        out.push(Field::from_real_values(grid, &vals));
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(SpectralError::Snapshot(format!(
            "{}: trailing bytes after {d} components",
            path.display()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("sfld-test-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn roundtrip_two_components() {
        let grid = Grid::new(16).unwrap();
        let f = Field::from_real_point_fn(grid, |x| (x[0]).cos() + 0.3 * (2.0 * x[1]).sin());
        let g = Field::from_real_point_fn(grid, |x| (x[0] + x[1]).sin());
        let path = tmp("roundtrip");
        write_fields(&path, &[&f, &g]).unwrap();
        let back = read_fields(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back[0].sub(&f).c0() <= 1e-15);
        assert!(back[1].sub(&g).c0() <= 1e-15);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rejects_corrupt_header() {
        let path = tmp("corrupt");
        std::fs::write(&path, b"NOPE\0\0\0\0\0\0\0\0\0\0\0\0").unwrap();
        match read_fields(&path) {
            Err(SpectralError::Snapshot(msg)) => assert!(msg.contains("bad magic")),
            other => panic!("expected snapshot error, got {other:?}"),
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rejects_truncation() {
        let grid = Grid::new(8).unwrap();
        let f = Field::from_real_point_fn(grid, |x| x[0].sin());
        let path = tmp("trunc");
        write_fields(&path, &[&f]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(
            read_fields(&path),
            Err(SpectralError::Snapshot(_))
        ));
        std::fs::remove_file(&path).ok();
    }
}
