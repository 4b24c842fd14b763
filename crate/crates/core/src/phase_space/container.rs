//! Flat binary container for grids and fields, and a CSV dump for small grids.
//!
//! Layout (little-endian): magic `VPLF`, u32 version, f64 L_v, u32 N,
//! 3 x i64 k, 3 x f64 twist, u64 count, then `count` (re, im) f64 pairs.

use std::io::{Read, Write};
use std::sync::Arc;

use super::field::ModeField;
use super::grid::VelocityGrid;
use crate::error::{Error, Result};
use crate::C64;

const MAGIC: &[u8; 4] = b"VPLF";
const VERSION: u32 = 1;

pub fn write_field<W: Write>(mut w: W, h: &ModeField) -> Result<()> {
    let g = h.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&g.half_width().to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    for k in h.k() {
        w.write_all(&k.to_le_bytes())?;
    }
    for t in h.twist() {
        w.write_all(&t.to_le_bytes())?;
    }
    w.write_all(&(h.values().len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * h.values().len());
    for z in h.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const B: usize, R: Read>(r: &mut R) -> Result<[u8; B]> {
    let mut b = [0u8; B];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_field<R: Read>(mut r: R) -> Result<ModeField> {
    if &take::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Format("not a field container (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported container version {version}"
        )));
    }
    let half_width = f64::from_le_bytes(take(&mut r)?);
    let n = u32::from_le_bytes(take(&mut r)?) as usize;
    let mut k = [0i64; 3];
    for c in &mut k {
        *c = i64::from_le_bytes(take(&mut r)?);
    }
    let mut twist = [0f64; 3];
    for c in &mut twist {
        *c = f64::from_le_bytes(take(&mut r)?);
    }
    let count = u64::from_le_bytes(take(&mut r)?) as usize;
    let grid = Arc::new(VelocityGrid::new(half_width, n)?);
    if count != grid.len() {
        return Err(Error::Format(format!(
            "payload has {count} values, grid needs {}",
            grid.len()
        )));
    }
    let mut raw = vec![0u8; 16 * count];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(ModeField::new(grid, values, k)?.with_twist(twist))
}

/// CSV with columns i, j, l, v1, v2, v3, re, im. Intended for N <= 16.
pub fn write_field_csv<W: Write>(w: W, h: &ModeField) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let map = |e: csv::Error| Error::Format(e.to_string());
    wr.write_record(["i", "j", "l", "v1", "v2", "v3", "re", "im"])
        .map_err(map)?;
    let g = h.grid();
    for (idx, z) in h.values().iter().enumerate() {
        let [i, j, l] = g.unravel(idx);
        let v = g.coords(idx);
        wr.write_record(&[
            i.to_string(),
            j.to_string(),
            l.to_string(),
            format!("{:.17e}", v[0]),
            format!("{:.17e}", v[1]),
            format!("{:.17e}", v[2]),
            format!("{:.17e}", z.re),
            format!("{:.17e}", z.im),
        ])
        .map_err(map)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_grid;

    #[test]
    fn round_trip() {
        let g = Arc::new(build_grid(5.0, 8).unwrap());
        let h = ModeField::from_fn(g, [1, -2, 3], |v| C64::new(v[0], v[1] * v[2]))
            .with_twist([0.5, 0.0, -1.0]);
        let mut buf = Vec::new();
        write_field(&mut buf, &h).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 4 + 24 + 24 + 8 + 16 * 512);
        let back = read_field(buf.as_slice()).unwrap();
        assert_eq!(back.k(), [1, -2, 3]);
        assert_eq!(back.twist(), [0.5, 0.0, -1.0]);
        assert_eq!(back.values(), h.values());
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            read_field(&b"XXXXxxxx"[..]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let g = Arc::new(build_grid(5.0, 8).unwrap());
        let h = ModeField::sqrt_maxwellian(g, [0; 3]);
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &h).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 513);
    }
}
