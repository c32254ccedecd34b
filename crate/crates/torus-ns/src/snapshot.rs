//! Binary field snapshots.
//!
//! Layout: magic `PFLD`, then little-endian `u32` fields `version`, `dim`,
//! `modes`, `layout` (0 = collocation values, 1 = spectral coefficients),
//! followed by little-endian `f64` payload in row-major axis order; complex
//! coefficients are interleaved `re, im`. Vector fields are written one
//! component per file.

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField, VectorField};
use crate::grid::TorusGrid;
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"PFLD";
const VERSION: u32 = 1;

/// Either layout, as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum PfldField {
    Real(RealField),
    Spectral(SpectralField),
}

fn write_header<W: Write>(out: &mut W, grid: TorusGrid, layout: u32) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.modes() as u32).to_le_bytes())?;
    out.write_all(&layout.to_le_bytes())?;
    Ok(())
}

pub fn write_real_field(path: &Path, f: &RealField) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_header(&mut out, f.grid(), 0)?;
    for v in f.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_spectral_field(path: &Path, f: &SpectralField) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_header(&mut out, f.grid(), 1)?;
    for c in f.coeffs() {
        out.write_all(&c.re.to_le_bytes())?;
        out.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

/// Write each component as `<stem>_c<i>.pfld` next to the given path stem.
pub fn write_vector_field(dir: &Path, stem: &str, u: &VectorField) -> Result<Vec<std::path::PathBuf>> {
    let mut paths = Vec::new();
    for (i, c) in u.components().iter().enumerate() {
        let path = dir.join(format!("{stem}_c{i}.pfld"));
        write_spectral_field(&path, c)?;
        paths.push(path);
    }
    Ok(paths)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_field(path: &Path) -> Result<PfldField> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!(
            "bad magic {magic:?} in {}",
            path.display()
        )));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut input)? as usize;
    let modes = read_u32(&mut input)? as usize;
    let layout = read_u32(&mut input)?;
    let grid = TorusGrid::new(dim, modes)?;
    match layout {
        0 => {
            let mut values = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                values.push(read_f64(&mut input)?);
            }
            Ok(PfldField::Real(RealField::new(grid, values)?))
        }
        1 => {
            let mut coeffs = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                let re = read_f64(&mut input)?;
                let im = read_f64(&mut input)?;
                coeffs.push(Complex64::new(re, im));
            }
            Ok(PfldField::Spectral(SpectralField::new(grid, coeffs)?))
        }
        other => Err(Error::Snapshot(format!("unknown layout flag {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::taylor_green;
    use crate::transform::forward_transform;

    #[test]
    fn real_field_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::new(2, 8).unwrap();
        let f = RealField::from_fn(g, |x| x[0].sin() + 0.5 * (2.0 * x[1]).cos());
        let path = dir.path().join("f.pfld");
        write_real_field(&path, &f).unwrap();
        match read_field(&path).unwrap() {
            PfldField::Real(r) => assert_eq!(r, f),
            _ => panic!("wrong layout"),
        }
    }

    #[test]
    fn spectral_vector_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::new(3, 8).unwrap();
        let u = taylor_green(g);
        let paths = write_vector_field(dir.path(), "snap", &u).unwrap();
        assert_eq!(paths.len(), 3);
        for (i, p) in paths.iter().enumerate() {
            match read_field(p).unwrap() {
                PfldField::Spectral(c) => assert_eq!(&c, u.component(i)),
                _ => panic!("wrong layout"),
            }
        }
    }

    #[test]
    fn corrupted_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pfld");
        std::fs::write(&path, b"NOPE\x01\x00\x00\x00").unwrap();
        assert!(matches!(read_field(&path), Err(Error::Snapshot(_))));
    }

    #[test]
    fn header_is_exactly_twenty_bytes_plus_payload() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::new(2, 8).unwrap();
        let f = RealField::zeros(g);
        let path = dir.path().join("z.pfld");
        write_real_field(&path, &f).unwrap();
        let len = std::fs::metadata(&path).unwrap().len();
        assert_eq!(len, 20 + 64 * 8);
        let c = forward_transform(&f);
        let path2 = dir.path().join("zc.pfld");
        write_spectral_field(&path2, &c).unwrap();
        assert_eq!(std::fs::metadata(&path2).unwrap().len(), 20 + 64 * 16);
    }
}
