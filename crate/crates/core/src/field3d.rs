//! Scalar and 3-vector fields on periodic 3D grids with spectral calculus.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid3D;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField3D {
    grid: Grid3D,
    values: Vec<f64>,
}

/// Which axis a derivative acts along.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis3 {
    X,
    Y,
    Z,
}

pub const AXES: [Axis3; 3] = [Axis3::X, Axis3::Y, Axis3::Z];

impl ScalarField3D {
    pub fn zeros(grid: Grid3D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F: Fn(f64, f64, f64) -> f64>(grid: Grid3D, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iz in 0..grid.nz() {
            let z = grid.z(iz);
            for iy in 0..grid.ny() {
                let y = grid.y(iy);
                for ix in 0..grid.nx() {
                    values.push(f(grid.x(ix), y, z));
                }
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid3D, values: Vec<f64>) -> Result<Self> {
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

    pub(crate) fn from_spectral(grid: Grid3D, mut coeffs: Vec<Complex64>) -> Self {
        fft::fft3(&mut coeffs, grid.nx(), grid.ny(), grid.nz(), FftDirection::Inverse);
        let scale = 1.0 / grid.len() as f64;
        Self {
            grid,
            values: coeffs.iter().map(|c| c.re * scale).collect(),
        }
    }

    pub fn grid(&self) -> Grid3D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.grid.idx(ix, iy, iz)]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::grid_mismatch(self.grid, other.grid));
        }
        Ok(())
    }

    /// All three partial derivatives from one forward transform.
    pub fn gradient(&self) -> [Self; 3] {
        let (nx, ny, nz) = (self.grid.nx(), self.grid.ny(), self.grid.nz());
        let spectral = fft::forward3(&self.values, nx, ny, nz);
        AXES.map(|axis| {
            let mut d = spectral.clone();
            apply_derivative(&mut d, self.grid, axis);
            Self {
                grid: self.grid,
                values: fft::inverse3_real(&d, nx, ny, nz),
            }
        })
    }

    /// Single spectral partial derivative.
    pub fn derivative(&self, axis: Axis3) -> Self {
        let (nx, ny, nz) = (self.grid.nx(), self.grid.ny(), self.grid.nz());
        let mut spectral = fft::forward3(&self.values, nx, ny, nz);
        apply_derivative(&mut spectral, self.grid, axis);
        Self {
            grid: self.grid,
            values: fft::inverse3_real(&spectral, nx, ny, nz),
        }
    }
}

fn apply_derivative(coeffs: &mut [Complex64], grid: Grid3D, axis: Axis3) {
    let (nx, ny, nz) = (grid.nx(), grid.ny(), grid.nz());
    for iz in 0..nz {
        for iy in 0..ny {
            let row = (iz * ny + iy) * nx;
            for ix in 0..nx {
                let (k, nyquist) = match axis {
                    Axis3::X => (grid.kx(ix), ix == nx / 2),
                    Axis3::Y => (grid.ky(iy), iy == ny / 2),
                    Axis3::Z => (grid.kz(iz), iz == nz / 2),
                };
                let c = &mut coeffs[row + ix];
                if nyquist {
                    *c = Complex64::default();
                } else {
                    *c *= Complex64::new(0.0, k);
                }
            }
        }
    }
}

macro_rules! impl_field3_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &ScalarField3D {
            type Output = ScalarField3D;
            fn $method(self, rhs: &ScalarField3D) -> ScalarField3D {
                assert_eq!(self.grid, rhs.grid, "grid mismatch in field algebra");
                ScalarField3D {
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

impl_field3_binop!(Add, add, +);
impl_field3_binop!(Sub, sub, -);
impl_field3_binop!(Mul, mul, *);

/// Three scalar components on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField3D {
    comps: [ScalarField3D; 3],
}

impl VectorField3D {
    pub fn zeros(grid: Grid3D) -> Self {
        Self {
            comps: [
                ScalarField3D::zeros(grid),
                ScalarField3D::zeros(grid),
                ScalarField3D::zeros(grid),
            ],
        }
    }

    pub fn new(comps: [ScalarField3D; 3]) -> Result<Self> {
        comps[0].same_grid(&comps[1])?;
        comps[0].same_grid(&comps[2])?;
        Ok(Self { comps })
    }

    pub fn from_fn<F: Fn(f64, f64, f64) -> [f64; 3]>(grid: Grid3D, f: F) -> Self {
        let mut vals = [
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
        ];
        for iz in 0..grid.nz() {
            let z = grid.z(iz);
            for iy in 0..grid.ny() {
                let y = grid.y(iy);
                for ix in 0..grid.nx() {
                    let v = f(grid.x(ix), y, z);
                    for c in 0..3 {
                        vals[c].push(v[c]);
                    }
                }
            }
        }
        let [a, b, c] = vals;
        Self {
            comps: [
                ScalarField3D { grid, values: a },
                ScalarField3D { grid, values: b },
                ScalarField3D { grid, values: c },
            ],
        }
    }

    pub fn grid(&self) -> Grid3D {
        self.comps[0].grid()
    }

    pub fn comp(&self, i: usize) -> &ScalarField3D {
        &self.comps[i]
    }

    pub fn comps(&self) -> &[ScalarField3D; 3] {
        &self.comps
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            comps: [
                self.comps[0].scaled(a),
                self.comps[1].scaled(a),
                self.comps[2].scaled(a),
            ],
        }
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        self.comps[0].same_grid(&other.comps[0])
    }

    /// All nine partials; `result[i][j]` is `∂_j` of component `i`.
    pub fn gradient(&self) -> [[ScalarField3D; 3]; 3] {
        [
            self.comps[0].gradient(),
            self.comps[1].gradient(),
            self.comps[2].gradient(),
        ]
    }
}

macro_rules! impl_vec3_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &VectorField3D {
            type Output = VectorField3D;
            fn $method(self, rhs: &VectorField3D) -> VectorField3D {
                VectorField3D {
                    comps: [
                        &self.comps[0] $op &rhs.comps[0],
                        &self.comps[1] $op &rhs.comps[1],
                        &self.comps[2] $op &rhs.comps[2],
                    ],
                }
            }
        }
    };
}

impl_vec3_binop!(Add, add, +);
impl_vec3_binop!(Sub, sub, -);

/// `(a·∇)b` given the precomputed gradient of `b`.
pub fn advect(a: &VectorField3D, grad_b: &[[ScalarField3D; 3]; 3]) -> VectorField3D {
    let comps = [0, 1, 2].map(|i| {
        let mut acc = &a.comps[0] * &grad_b[i][0];
        acc = &acc + &(&a.comps[1] * &grad_b[i][1]);
        &acc + &(&a.comps[2] * &grad_b[i][2])
    });
    VectorField3D { comps }
}

/// `(α·∇)b` for a constant vector `α`, from the precomputed gradient of `b`.
pub fn shift_from_gradient(alpha: [f64; 3], grad_b: &[[ScalarField3D; 3]; 3]) -> VectorField3D {
    let comps = [0, 1, 2].map(|i| {
        let grid = grad_b[i][0].grid();
        let values = (0..grid.len())
            .map(|s| {
                alpha[0] * grad_b[i][0].values()[s]
                    + alpha[1] * grad_b[i][1].values()[s]
                    + alpha[2] * grad_b[i][2].values()[s]
            })
            .collect();
        ScalarField3D { grid, values }
    });
    VectorField3D { comps }
}

/// Spectral curl.
pub fn curl(u: &VectorField3D) -> VectorField3D {
    let g = u.gradient();
    // (∂y u3 - ∂z u2, ∂z u1 - ∂x u3, ∂x u2 - ∂y u1)
    VectorField3D {
        comps: [
            &g[2][1] - &g[1][2],
            &g[0][2] - &g[2][0],
            &g[1][0] - &g[0][1],
        ],
    }
}

/// Spectral divergence.
pub fn divergence(u: &VectorField3D) -> ScalarField3D {
    let dx = u.comps[0].derivative(Axis3::X);
    let dy = u.comps[1].derivative(Axis3::Y);
    let dz = u.comps[2].derivative(Axis3::Z);
    &(&dx + &dy) + &dz
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_single_mode() {
        let g = Grid3D::cube(16).unwrap();
        let f = ScalarField3D::from_fn(g, |x, _, _| x.sin());
        let got = f.derivative(Axis3::X);
        let expect = ScalarField3D::from_fn(g, |x, _, _| x.cos());
        assert!((&got - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_individual_derivatives() {
        let g = Grid3D::cube(16).unwrap();
        let f = ScalarField3D::from_fn(g, |x, y, z| x.sin() * (2.0 * y).cos() + z.sin());
        let grad = f.gradient();
        for (i, axis) in AXES.iter().enumerate() {
            assert!((&grad[i] - &f.derivative(*axis)).max_abs() < 1e-13);
        }
    }

    #[test]
    fn z_derivative_of_z_independent_field_is_zero() {
        let g = Grid3D::cube(16).unwrap();
        let f = ScalarField3D::from_fn(g, |x, y, _| x.sin() * y.cos());
        assert!(f.derivative(Axis3::Z).max_abs() < 1e-14);
    }

    #[test]
    fn advect_uses_rows_of_the_gradient() {
        let g = Grid3D::cube(16).unwrap();
        let b = VectorField3D::from_fn(g, |x, _, _| [x.sin(), 0.0, 0.0]);
        let a = VectorField3D::from_fn(g, |_, _, _| [1.0, 0.0, 0.0]);
        let got = advect(&a, &b.gradient());
        let expect = ScalarField3D::from_fn(g, |x, _, _| x.cos());
        assert!((got.comp(0) - &expect).max_abs() < 1e-12);
        assert!(got.comp(1).max_abs() < 1e-13);
    }
}
