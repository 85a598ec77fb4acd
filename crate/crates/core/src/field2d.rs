//! Real scalar fields on periodic 2D grids and their spectral view.
//!
//! Derivatives are computed in spectral space and are exact (to rounding)
//! for band-limited fields. The Nyquist column/row is zeroed in first
//! derivatives, the standard convention for real data.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{signed_index, Grid2D};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Sample `f(x, y)` at the grid points.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid2D, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny() {
            let y = grid.y(iy);
            for ix in 0..grid.nx() {
                values.push(f(grid.x(ix), y));
            }
        }
        Self { grid, values }
    }

    /// Wrap raw row-major samples (y outer, x inner), checking length and finiteness.
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples for grid {}, got {}",
                grid.len(),
                grid,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.idx(ix, iy)]
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::grid_mismatch(self.grid, other.grid));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Apply `f` sample-wise.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self + a * other`; panics on grid mismatch (internal algebra helper).
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch in field algebra");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u + a * v)
            .collect();
        Self { grid: self.grid, values }
    }

    pub fn to_spectral(&self) -> SpectralCoeffs2D {
        SpectralCoeffs2D {
            grid: self.grid,
            coeffs: fft::forward2(&self.values, self.grid.nx(), self.grid.ny()),
        }
    }

    /// Spectral x-derivative.
    pub fn ddx(&self) -> Self {
        let mut s = self.to_spectral();
        s.apply_ddx();
        s.to_physical()
    }

    /// Spectral y-derivative.
    pub fn ddy(&self) -> Self {
        let mut s = self.to_spectral();
        s.apply_ddy();
        s.to_physical()
    }

    /// Both first derivatives from a single forward transform.
    pub fn gradient(&self) -> (Self, Self) {
        let s = self.to_spectral();
        let mut sx = s.clone();
        sx.apply_ddx();
        let mut sy = s;
        sy.apply_ddy();
        (sx.to_physical(), sy.to_physical())
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self) -> Self {
        let mut s = self.to_spectral();
        s.apply_laplacian();
        s.to_physical()
    }

    /// Band-limited interpolation onto another grid with the same periods.
    /// Modes present on both grids are copied; everything else is zero.
    pub fn resample(&self, target: Grid2D) -> Result<Self> {
        if self.grid.lx() != target.lx() || self.grid.ly() != target.ly() {
            return Err(Error::InvalidGrid(format!(
                "resample requires matching periods: {} vs {}",
                self.grid, target
            )));
        }
        let src = self.to_spectral();
        let (snx, sny) = (self.grid.nx(), self.grid.ny());
        let (tnx, tny) = (target.nx(), target.ny());
        // Strictly below both Nyquist frequencies, so every copied mode is
        // unambiguous on both grids.
        let kx_keep = (snx.min(tnx)) as i64 / 2 - 1;
        let ky_keep = (sny.min(tny)) as i64 / 2 - 1;
        let scale = target.len() as f64 / self.grid.len() as f64;
        let mut coeffs = vec![Complex64::default(); target.len()];
        for jt in 0..tny {
            let l = signed_index(jt, tny);
            if l.abs() > ky_keep {
                continue;
            }
            let js = if l >= 0 { l as usize } else { (l + sny as i64) as usize };
            for it in 0..tnx {
                let k = signed_index(it, tnx);
                if k.abs() > kx_keep {
                    continue;
                }
                let is = if k >= 0 { k as usize } else { (k + snx as i64) as usize };
                coeffs[jt * tnx + it] = src.coeffs[js * snx + is] * scale;
            }
        }
        Ok(SpectralCoeffs2D { grid: target, coeffs }.to_physical())
    }
}

macro_rules! impl_field_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &ScalarField2D {
            type Output = ScalarField2D;
            fn $method(self, rhs: &ScalarField2D) -> ScalarField2D {
                assert_eq!(self.grid, rhs.grid, "grid mismatch in field algebra");
                ScalarField2D {
                    grid: self.grid,
                    values: self
                        .values
                        .iter()
                        .zip(&rhs.values)
                        .map(|(a, b)| a $op b)
                        .collect(),
                }
            }
        }
    };
}

impl_field_binop!(Add, add, +);
impl_field_binop!(Sub, sub, -);
impl_field_binop!(Mul, mul, *);

impl std::ops::Neg for &ScalarField2D {
    type Output = ScalarField2D;
    fn neg(self) -> ScalarField2D {
        self.scaled(-1.0)
    }
}

/// Complex amplitudes indexed by integer wavenumbers `(k, l)`, stored as the
/// raw (unnormalized) DFT of the samples, row-major with `l` outer.
#[derive(Clone, Debug)]
pub struct SpectralCoeffs2D {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs2D {
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Normalized amplitude of mode `(k, l)`, so that `sin x` has amplitude
    /// `∓i/2` at `(±1, 0)`.
    pub fn amplitude(&self, k: i64, l: i64) -> Complex64 {
        let nx = self.grid.nx() as i64;
        let ny = self.grid.ny() as i64;
        assert!(k.abs() <= nx / 2 && l.abs() <= ny / 2, "mode out of range");
        let i = k.rem_euclid(nx) as usize;
        let j = l.rem_euclid(ny) as usize;
        self.coeffs[j * self.grid.nx() + i] / self.grid.len() as f64
    }

    /// Inverse transform, keeping the real part.
    pub fn to_physical(&self) -> ScalarField2D {
        ScalarField2D {
            grid: self.grid,
            values: fft::inverse2_real(&self.coeffs, self.grid.nx(), self.grid.ny()),
        }
    }

    /// Total squared amplitude in modes with `max(|k|, |l|) > kmax`.
    pub fn energy_above(&self, kmax: usize) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let norm = (self.grid.len() as f64).powi(2);
        let mut e = 0.0;
        for j in 0..ny {
            let l = signed_index(j, ny).unsigned_abs() as usize;
            for i in 0..nx {
                let k = signed_index(i, nx).unsigned_abs() as usize;
                if k.max(l) > kmax {
                    e += self.coeffs[j * nx + i].norm_sqr() / norm;
                }
            }
        }
        e
    }

    pub(crate) fn apply_ddx(&mut self) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for j in 0..ny {
            for i in 0..nx {
                let c = &mut self.coeffs[j * nx + i];
                if i == nx / 2 {
                    *c = Complex64::default();
                } else {
                    *c *= Complex64::new(0.0, self.grid.kx(i));
                }
            }
        }
    }

    pub(crate) fn apply_ddy(&mut self) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for j in 0..ny {
            let factor = if j == ny / 2 {
                Complex64::default()
            } else {
                Complex64::new(0.0, self.grid.ky(j))
            };
            for i in 0..nx {
                self.coeffs[j * nx + i] *= factor;
            }
        }
    }

    pub(crate) fn apply_laplacian(&mut self) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for j in 0..ny {
            let ky2 = self.grid.ky(j).powi(2);
            for i in 0..nx {
                let k2 = self.grid.kx(i).powi(2) + ky2;
                self.coeffs[j * nx + i] *= -k2;
            }
        }
    }

    /// Invert the Laplacian onto the zero-mean solution; the constant mode
    /// is discarded.
    pub(crate) fn apply_inverse_laplacian(&mut self) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for j in 0..ny {
            let ky2 = self.grid.ky(j).powi(2);
            for i in 0..nx {
                let k2 = self.grid.kx(i).powi(2) + ky2;
                let c = &mut self.coeffs[j * nx + i];
                if k2 == 0.0 {
                    *c = Complex64::default();
                } else {
                    *c /= -k2;
                }
            }
        }
    }

    /// 2/3-rule truncation: zero all modes with `|k| > nx/3` or `|l| > ny/3`.
    pub fn dealias_two_thirds(&mut self) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let kx_keep = (nx / 3) as i64;
        let ky_keep = (ny / 3) as i64;
        for j in 0..ny {
            let l = signed_index(j, ny);
            for i in 0..nx {
                let k = signed_index(i, nx);
                if k.abs() > kx_keep || l.abs() > ky_keep {
                    self.coeffs[j * nx + i] = Complex64::default();
                }
            }
        }
    }

    pub fn zero_mean(&mut self) {
        self.coeffs[0] = Complex64::default();
    }
}

/// Solve `Δψ = rhs` on the torus for the unique zero-mean `ψ`.
///
/// The right-hand side must have (numerically) zero spatial mean for the
/// problem to be solvable; the bound scales with `max |rhs|`.
pub fn solve_poisson(rhs: &ScalarField2D) -> Result<ScalarField2D> {
    let mean = rhs.mean();
    let bound = 1e-10 * rhs.max_abs();
    if mean.abs() > bound {
        return Err(Error::NonZeroMean {
            mean: mean.abs(),
            bound,
        });
    }
    let mut s = rhs.to_spectral();
    s.apply_inverse_laplacian();
    Ok(s.to_physical())
}

/// Poisson solve that silently projects out the constant mode; for solver
/// internals where the right-hand side is zero-mean by construction.
pub(crate) fn solve_poisson_projected(rhs: &ScalarField2D) -> ScalarField2D {
    let mut s = rhs.to_spectral();
    s.apply_inverse_laplacian();
    s.to_physical()
}

/// A complex-valued field stored as two real fields; the Lax operators are
/// real-linear and act componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField2D {
    pub re: ScalarField2D,
    pub im: ScalarField2D,
}

impl ComplexField2D {
    pub fn new(re: ScalarField2D, im: ScalarField2D) -> Result<Self> {
        re.same_grid(&im)?;
        Ok(Self { re, im })
    }

    pub fn from_real(re: ScalarField2D) -> Self {
        let im = ScalarField2D::zeros(re.grid());
        Self { re, im }
    }

    pub fn grid(&self) -> Grid2D {
        self.re.grid()
    }

    /// Pointwise `self - λ·other` for complex `λ`.
    pub fn sub_scaled(&self, lambda: Complex64, other: &Self) -> Self {
        Self {
            re: &self.re - &other.re.scaled(lambda.re).add_scaled(-lambda.im, &other.im),
            im: &self.im - &other.im.scaled(lambda.re).add_scaled(lambda.im, &other.re),
        }
    }

    /// Pointwise complex magnitude.
    pub fn magnitude(&self) -> ScalarField2D {
        let values = self
            .re
            .values()
            .iter()
            .zip(self.im.values())
            .map(|(a, b)| a.hypot(*b))
            .collect();
        ScalarField2D::from_values(self.grid(), values).expect("magnitude of finite fields")
    }
}

/// Re-export used by internal modules that already hold a spectral buffer.
pub(crate) fn inverse_from_coeffs(grid: Grid2D, mut coeffs: Vec<Complex64>) -> ScalarField2D {
    let mut buf = std::mem::take(&mut coeffs);
    fft::fft2(&mut buf, grid.nx(), grid.ny(), FftDirection::Inverse);
    let scale = 1.0 / grid.len() as f64;
    ScalarField2D {
        grid,
        values: buf.iter().map(|c| c.re * scale).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n).unwrap()
    }

    fn max_diff(a: &ScalarField2D, b: &ScalarField2D) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn ddx_of_sin_is_cos() {
        let g = grid(64);
        let f = ScalarField2D::from_fn(g, |x, _| x.sin());
        let expect = ScalarField2D::from_fn(g, |x, _| x.cos());
        assert!(max_diff(&f.ddx(), &expect) < 1e-12);
    }

    #[test]
    fn ddx_of_constant_is_zero() {
        let g = grid(64);
        let f = ScalarField2D::constant(g, 3.0);
        assert!(f.ddx().max_abs() < 1e-13);
    }

    #[test]
    fn ddx_resolves_highest_odd_mode() {
        let g = grid(64);
        let f = ScalarField2D::from_fn(g, |x, _| (31.0 * x).sin());
        let expect = ScalarField2D::from_fn(g, |x, _| 31.0 * (31.0 * x).cos());
        assert!(max_diff(&f.ddx(), &expect) < 1e-10);
    }

    #[test]
    fn ddy_mirrors_ddx() {
        let g = grid(64);
        let f = ScalarField2D::from_fn(g, |_, y| (2.0 * y).sin());
        let expect = ScalarField2D::from_fn(g, |_, y| 2.0 * (2.0 * y).cos());
        assert!(max_diff(&f.ddy(), &expect) < 1e-12);
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = grid(64);
        let f = ScalarField2D::from_fn(g, |x, y| x.sin() * y.sin());
        assert!(max_diff(&f.laplacian(), &f.scaled(-2.0)) < 1e-12);
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = grid(64);
        assert!(ScalarField2D::constant(g, 5.0).laplacian().max_abs() < 1e-13);
    }

    #[test]
    fn laplacian_single_mode() {
        let g = grid(64);
        let f = ScalarField2D::from_fn(g, |x, _| (3.0 * x).cos());
        assert!(max_diff(&f.laplacian(), &f.scaled(-9.0)) < 1e-11);
    }

    #[test]
    fn solve_poisson_inverts_eigenfunction() {
        let g = grid(64);
        let psi = ScalarField2D::from_fn(g, |x, y| x.sin() * y.sin());
        let got = solve_poisson(&psi.scaled(-2.0)).unwrap();
        assert!(max_diff(&got, &psi) < 1e-13);
    }

    #[test]
    fn solve_poisson_of_zero_is_zero() {
        let g = grid(64);
        let got = solve_poisson(&ScalarField2D::zeros(g)).unwrap();
        assert_eq!(got.max_abs(), 0.0);
    }

    #[test]
    fn solve_poisson_rejects_nonzero_mean() {
        let g = grid(64);
        let err = solve_poisson(&ScalarField2D::constant(g, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NonZeroMean { .. }));
    }

    #[test]
    fn spectral_roundtrip_reproduces_coefficients() {
        let g = grid(32);
        let f = ScalarField2D::from_fn(g, |x, y| (2.0 * x).sin() * y.cos() + 0.3 * (5.0 * y).sin());
        let s1 = f.to_spectral();
        let s2 = s1.to_physical().to_spectral();
        let scale = g.len() as f64;
        for (a, b) in s1.coeffs().iter().zip(s2.coeffs()) {
            assert!((a - b).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_fields() {
        let g = grid(16);
        let f = ScalarField2D::from_fn(g, |x, y| (x + 0.2).sin() * (2.0 * y).cos());
        let s = f.to_spectral();
        for l in -7i64..=7 {
            for k in -7i64..=7 {
                let a = s.amplitude(k, l);
                let b = s.amplitude(-k, -l).conj();
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn resample_is_exact_for_bandlimited_fields() {
        let coarse = grid(32);
        let fine = grid(96);
        let f = ScalarField2D::from_fn(coarse, |x, y| (3.0 * x).cos() * (2.0 * y).sin() + x.sin());
        let upsampled = f.resample(fine).unwrap();
        let direct = ScalarField2D::from_fn(fine, |x, y| (3.0 * x).cos() * (2.0 * y).sin() + x.sin());
        assert!(max_diff(&upsampled, &direct) < 1e-12);
    }

    #[test]
    fn from_values_rejects_nan() {
        let g = grid(8);
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(matches!(ScalarField2D::from_values(g, v), Err(Error::NonFinite)));
    }
}
