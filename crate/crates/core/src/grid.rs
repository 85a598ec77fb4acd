//! Uniform periodic grids in two and three dimensions.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn validate_axis(name: &str, n: usize) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "{name} = {n}: sample counts must be even and at least 8"
        )));
    }
    Ok(())
}

fn validate_period(name: &str, l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidGrid(format!("{name} = {l}: periods must be positive finite")));
    }
    Ok(())
}

/// Signed integer wavenumber for FFT bin `i` of an `n`-point axis.
pub(crate) fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// A uniform periodic grid on `[0, lx) x [0, ly)`.
///
/// Sample points are `x_i = i lx/nx`, `y_j = j ly/ny`. Sample counts must be
/// even and at least 8 so the 2/3-rule and Nyquist handling are well defined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid2D {
    /// Square `2π`-periodic grid.
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        Self::with_periods(nx, ny, TAU, TAU)
    }

    pub fn with_periods(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        validate_axis("nx", nx)?;
        validate_axis("ny", ny)?;
        validate_period("lx", lx)?;
        validate_period("ly", ly)?;
        Ok(Self { nx, ny, lx, ly })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.lx / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.ly / self.ny as f64
    }

    /// Row-major sample index (y outer, x inner).
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Physical wavenumber `2π k / lx` for FFT bin `i`.
    pub(crate) fn kx(&self, i: usize) -> f64 {
        TAU * signed_index(i, self.nx) as f64 / self.lx
    }

    pub(crate) fn ky(&self, j: usize) -> f64 {
        TAU * signed_index(j, self.ny) as f64 / self.ly
    }

    /// True when both axes share the same sample count and period, as the
    /// `(x,y) -> (y,x)` symmetry checks require.
    pub fn is_square(&self) -> bool {
        self.nx == self.ny && self.lx == self.ly
    }
}

impl fmt::Display for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} [{:.6}, {:.6}]", self.nx, self.ny, self.lx, self.ly)
    }
}

/// A uniform periodic grid on `[0, lx) x [0, ly) x [0, lz)`; z is outermost
/// in sample layout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    nx: usize,
    ny: usize,
    nz: usize,
    lx: f64,
    ly: f64,
    lz: f64,
}

impl Grid3D {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        Self::with_periods(nx, ny, nz, TAU, TAU, TAU)
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn with_periods(nx: usize, ny: usize, nz: usize, lx: f64, ly: f64, lz: f64) -> Result<Self> {
        validate_axis("nx", nx)?;
        validate_axis("ny", ny)?;
        validate_axis("nz", nz)?;
        validate_period("lx", lx)?;
        validate_period("ly", ly)?;
        validate_period("lz", lz)?;
        Ok(Self { nx, ny, nz, lx, ly, lz })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn lz(&self) -> f64 {
        self.lz
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.lx / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.ly / self.ny as f64
    }

    pub fn z(&self, k: usize) -> f64 {
        k as f64 * self.lz / self.nz as f64
    }

    /// Sample index with x fastest, z outermost.
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.ny + iy) * self.nx + ix
    }

    pub(crate) fn kx(&self, i: usize) -> f64 {
        TAU * signed_index(i, self.nx) as f64 / self.lx
    }

    pub(crate) fn ky(&self, j: usize) -> f64 {
        TAU * signed_index(j, self.ny) as f64 / self.ly
    }

    pub(crate) fn kz(&self, k: usize) -> f64 {
        TAU * signed_index(k, self.nz) as f64 / self.lz
    }
}

impl fmt::Display for Grid3D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}x{} [{:.6}, {:.6}, {:.6}]",
            self.nx, self.ny, self.nz, self.lx, self.ly, self.lz
        )
    }
}
