//! CSF2 binary fields and CSV export.
//!
//! Layout: `b"CSF2"`, `u32` n, `f64` period, then n² little-endian `f64`
//! samples (real) or n² `(re, im)` pairs (complex), row-major.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid2D, ScalarField2D};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"CSF2";

pub fn write_csf2<W: Write>(f: &ScalarField2D, mut w: W) -> Result<()> {
    let g = f.grid();
    let mut buf = Vec::with_capacity(16 + g.len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(g.n() as u32).to_le_bytes());
    buf.extend_from_slice(&g.period().to_le_bytes());
    for v in f.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        if !f.is_real() {
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_csf2<R: Read>(mut r: R) -> Result<ScalarField2D> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing CSF2 header".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let grid = Grid2D::new(n, l)?;
    let body = &bytes[16..];
    let words: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if body.len() % 8 != 0 {
        return Err(Error::Format("truncated sample".into()));
    }
    if words.len() == grid.len() {
        ScalarField2D::from_real(grid, words)
    } else if words.len() == 2 * grid.len() {
        let v = words.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        ScalarField2D::from_complex(grid, v)
    } else {
        Err(Error::Format(format!(
            "{} samples do not match an {n}x{n} grid",
            words.len()
        )))
    }
}

/// Columns `x, y, value` (plus `imag` for complex fields).
pub fn write_csv<W: Write>(f: &ScalarField2D, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let complex = !f.is_real();
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    if complex {
        out.write_record(["x", "y", "value", "imag"]).map_err(csv_err)?;
    } else {
        out.write_record(["x", "y", "value"]).map_err(csv_err)?;
    }
    let g = f.grid();
    for (i, v) in f.values().iter().enumerate() {
        let p = g.point(i);
        let mut rec = vec![p[0].to_string(), p[1].to_string(), v.re.to_string()];
        if complex {
            rec.push(v.im.to_string());
        }
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_real_and_complex() {
        let g = Grid2D::new(64, 5.5).unwrap();
        let f = ScalarField2D::from_fn(g, |p| p[0].sin() + p[1]);
        let mut buf = Vec::new();
        write_csf2(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 64 * 64);
        assert_eq!(read_csf2(&buf[..]).unwrap(), f);

        let c = ScalarField2D::from_fn_complex(g, |p| Complex64::new(p[0], -p[1]));
        let mut buf = Vec::new();
        write_csf2(&c, &mut buf).unwrap();
        assert_eq!(read_csf2(&buf[..]).unwrap(), c);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_csf2(&b"CSF1xxxxxxxxxxxxxx"[..]).is_err());
        let g = Grid2D::new(64, 1.0).unwrap();
        let mut buf = Vec::new();
        write_csf2(&ScalarField2D::zeros(g), &mut buf).unwrap();
        buf.truncate(buf.len() - 8);
        assert!(read_csf2(&buf[..]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = Grid2D::new(64, 1.0).unwrap();
        let mut buf = Vec::new();
        write_csv(&ScalarField2D::zeros(g), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,value\n"));
        assert_eq!(text.lines().count(), 1 + 64 * 64);
    }
}
