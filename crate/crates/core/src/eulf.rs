//! The EULF binary snapshot format.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! 2D:  "EULF0001" | u32 ndim=2 | u32 nx | u32 ny | f64 lx | f64 ly
//!      | nx·ny f64 samples, row-major (y outer, x inner)
//! 3D:  "EULF0001" | u32 ndim=3 | u32 nx | u32 ny | u32 nz
//!      | f64 lx | f64 ly | f64 lz | u32 ncomp
//!      | ncomp blocks of nx·ny·nz f64 samples (z outermost)
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::field2d::ScalarField2D;
use crate::field3d::{ScalarField3D, VectorField3D};
use crate::grid::{Grid2D, Grid3D};

pub const MAGIC: &[u8; 8] = b"EULF0001";

pub fn write_field2d<W: Write>(mut w: W, field: &ScalarField2D) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(2)?;
    w.write_u32::<LittleEndian>(g.nx() as u32)?;
    w.write_u32::<LittleEndian>(g.ny() as u32)?;
    w.write_f64::<LittleEndian>(g.lx())?;
    w.write_f64::<LittleEndian>(g.ly())?;
    for v in field.values() {
        w.write_f64::<LittleEndian>(*v)?;
    }
    Ok(())
}

pub fn read_field2d<R: Read>(mut r: R) -> Result<ScalarField2D> {
    let ndim = read_header(&mut r)?;
    if ndim != 2 {
        return Err(Error::Format(format!("expected ndim = 2, got {ndim}")));
    }
    let nx = r.read_u32::<LittleEndian>()? as usize;
    let ny = r.read_u32::<LittleEndian>()? as usize;
    let lx = r.read_f64::<LittleEndian>()?;
    let ly = r.read_f64::<LittleEndian>()?;
    let grid = Grid2D::with_periods(nx, ny, lx, ly)?;
    let mut values = vec![0.0; grid.len()];
    r.read_f64_into::<LittleEndian>(&mut values)?;
    ScalarField2D::from_values(grid, values)
}

pub fn write_fields3d<W: Write>(mut w: W, components: &[&ScalarField3D]) -> Result<()> {
    let first = components
        .first()
        .ok_or_else(|| Error::Format("no components to write".into()))?;
    let g = first.grid();
    for c in components {
        if c.grid() != g {
            return Err(Error::grid_mismatch(g, c.grid()));
        }
    }
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(3)?;
    w.write_u32::<LittleEndian>(g.nx() as u32)?;
    w.write_u32::<LittleEndian>(g.ny() as u32)?;
    w.write_u32::<LittleEndian>(g.nz() as u32)?;
    w.write_f64::<LittleEndian>(g.lx())?;
    w.write_f64::<LittleEndian>(g.ly())?;
    w.write_f64::<LittleEndian>(g.lz())?;
    w.write_u32::<LittleEndian>(components.len() as u32)?;
    for c in components {
        for v in c.values() {
            w.write_f64::<LittleEndian>(*v)?;
        }
    }
    Ok(())
}

pub fn write_vector3d<W: Write>(w: W, field: &VectorField3D) -> Result<()> {
    write_fields3d(w, &[field.comp(0), field.comp(1), field.comp(2)])
}

pub fn read_fields3d<R: Read>(mut r: R) -> Result<Vec<ScalarField3D>> {
    let ndim = read_header(&mut r)?;
    if ndim != 3 {
        return Err(Error::Format(format!("expected ndim = 3, got {ndim}")));
    }
    let nx = r.read_u32::<LittleEndian>()? as usize;
    let ny = r.read_u32::<LittleEndian>()? as usize;
    let nz = r.read_u32::<LittleEndian>()? as usize;
    let lx = r.read_f64::<LittleEndian>()?;
    let ly = r.read_f64::<LittleEndian>()?;
    let lz = r.read_f64::<LittleEndian>()?;
    let grid = Grid3D::with_periods(nx, ny, nz, lx, ly, lz)?;
    let ncomp = r.read_u32::<LittleEndian>()? as usize;
    let mut out = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut values = vec![0.0; grid.len()];
        r.read_f64_into::<LittleEndian>(&mut values)?;
        out.push(ScalarField3D::from_values(grid, values)?);
    }
    Ok(out)
}

fn read_header<R: Read>(r: &mut R) -> Result<u32> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(MAGIC)
        )));
    }
    Ok(r.read_u32::<LittleEndian>()?)
}
