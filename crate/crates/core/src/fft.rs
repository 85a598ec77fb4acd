//! Internal FFT plumbing: a shared plan cache plus multi-dimensional
//! complex transforms built from batched 1D passes and transposes.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    planner().lock().unwrap().plan_fft(len, direction)
}

/// Out-of-place transpose of a row-major `rows x cols` matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    for r in 0..rows {
        let row = &src[r * cols..(r + 1) * cols];
        for (c, v) in row.iter().enumerate() {
            dst[c * rows + r] = *v;
        }
    }
}

/// In-place 2D transform of an `ny x nx` row-major buffer (unnormalized).
pub(crate) fn fft2(buf: &mut [Complex64], nx: usize, ny: usize, direction: FftDirection) {
    debug_assert_eq!(buf.len(), nx * ny);
    plan(nx, direction).process(buf);
    let mut t = vec![Complex64::default(); buf.len()];
    transpose(buf, &mut t, ny, nx);
    plan(ny, direction).process(&mut t);
    transpose(&t, buf, nx, ny);
}

/// In-place 3D transform of an `nz x ny x nx` row-major buffer (unnormalized).
pub(crate) fn fft3(buf: &mut [Complex64], nx: usize, ny: usize, nz: usize, direction: FftDirection) {
    debug_assert_eq!(buf.len(), nx * ny * nz);
    plan(nx, direction).process(buf);

    let slab = nx * ny;
    let mut t = vec![Complex64::default(); slab];
    let fy = plan(ny, direction);
    for iz in 0..nz {
        let s = &mut buf[iz * slab..(iz + 1) * slab];
        transpose(s, &mut t, ny, nx);
        fy.process(&mut t);
        transpose(&t, s, nx, ny);
    }

    let mut big = vec![Complex64::default(); buf.len()];
    transpose(buf, &mut big, nz, slab);
    plan(nz, direction).process(&mut big);
    transpose(&big, buf, slab, nz);
}

pub(crate) fn forward2(values: &[f64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, nx, ny, FftDirection::Forward);
    buf
}

/// Inverse 2D transform returning the real part, normalized by `1/(nx ny)`.
pub(crate) fn inverse2_real(coeffs: &[Complex64], nx: usize, ny: usize) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft2(&mut buf, nx, ny, FftDirection::Inverse);
    let scale = 1.0 / (nx * ny) as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

pub(crate) fn forward3(values: &[f64], nx: usize, ny: usize, nz: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft3(&mut buf, nx, ny, nz, FftDirection::Forward);
    buf
}

pub(crate) fn inverse3_real(coeffs: &[Complex64], nx: usize, ny: usize, nz: usize) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft3(&mut buf, nx, ny, nz, FftDirection::Inverse);
    let scale = 1.0 / (nx * ny * nz) as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward2_picks_out_single_modes() {
        let (nx, ny) = (8, 8);
        let mut values = vec![0.0; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let x = ix as f64 * std::f64::consts::TAU / nx as f64;
                values[iy * nx + ix] = x.cos();
            }
        }
        let c = forward2(&values, nx, ny);
        // cos x -> half weight at (k,l) = (1,0) and (-1,0).
        let total = (nx * ny) as f64;
        assert!((c[1].re / total - 0.5).abs() < 1e-14);
        assert!((c[nx - 1].re / total - 0.5).abs() < 1e-14);
        assert!(c[0].norm() / total < 1e-14);
    }

    #[test]
    fn roundtrip2_is_identity() {
        let (nx, ny) = (16, 8);
        let values: Vec<f64> = (0..nx * ny).map(|i| (i as f64 * 0.7).sin()).collect();
        let back = inverse2_real(&forward2(&values, nx, ny), nx, ny);
        for (a, b) in values.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip3_is_identity() {
        let (nx, ny, nz) = (8, 16, 8);
        let values: Vec<f64> = (0..nx * ny * nz).map(|i| (i as f64 * 0.3).cos()).collect();
        let back = inverse3_real(&forward3(&values, nx, ny, nz), nx, ny, nz);
        for (a, b) in values.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
