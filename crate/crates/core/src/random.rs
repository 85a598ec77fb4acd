//! Deterministic band-limited random test fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field2d::ScalarField2D;
use crate::field3d::ScalarField3D;
use crate::grid::{Grid2D, Grid3D};

/// Real zero-mean field with modes only in `|k|, |l| <= kmax`, normalized to
/// unit max-abs, fully determined by `seed`.
///
/// `kmax` must not exceed `min(nx, ny)/3` so that quadratic products of the
/// result stay below the 2/3-rule cutoff.
pub fn random_bandlimited(seed: u64, kmax: usize, grid: Grid2D) -> Result<ScalarField2D> {
    let limit = grid.nx().min(grid.ny()) / 3;
    if kmax > limit {
        return Err(Error::KmaxTooLarge { kmax, limit });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let km = kmax as i64;
    // Fill one half-plane and mirror the conjugate so the field is real.
    for l in 0..=km {
        let k_start = if l == 0 { 1 } else { -km };
        for k in k_start..=km {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let i = k.rem_euclid(nx as i64) as usize;
            let j = l.rem_euclid(ny as i64) as usize;
            let i_conj = (-k).rem_euclid(nx as i64) as usize;
            let j_conj = (-l).rem_euclid(ny as i64) as usize;
            coeffs[j * nx + i] = c;
            coeffs[j_conj * nx + i_conj] = c.conj();
        }
    }
    let field = spectral_to_field(grid, coeffs);
    Ok(normalize(field))
}

/// 3D counterpart of [`random_bandlimited`]; same band limit rule per axis.
pub fn random_bandlimited_3d(seed: u64, kmax: usize, grid: Grid3D) -> Result<ScalarField3D> {
    let limit = grid.nx().min(grid.ny()).min(grid.nz()) / 3;
    if kmax > limit {
        return Err(Error::KmaxTooLarge { kmax, limit });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny, nz) = (grid.nx(), grid.ny(), grid.nz());
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let km = kmax as i64;
    for m in 0..=km {
        for l in if m == 0 { 0..=km } else { -km..=km } {
            let k_start = if m == 0 && l == 0 { 1 } else { -km };
            for k in k_start..=km {
                if m == 0 && l == 0 && k < 1 {
                    continue;
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let i = k.rem_euclid(nx as i64) as usize;
                let j = l.rem_euclid(ny as i64) as usize;
                let h = m.rem_euclid(nz as i64) as usize;
                let ic = (-k).rem_euclid(nx as i64) as usize;
                let jc = (-l).rem_euclid(ny as i64) as usize;
                let hc = (-m).rem_euclid(nz as i64) as usize;
                coeffs[(h * ny + j) * nx + i] = c;
                coeffs[(hc * ny + jc) * nx + ic] = c.conj();
            }
        }
    }
    let field = ScalarField3D::from_spectral(grid, coeffs);
    Ok(normalize3(field))
}

fn spectral_to_field(grid: Grid2D, coeffs: Vec<Complex64>) -> ScalarField2D {
    crate::field2d::inverse_from_coeffs(grid, coeffs)
}

fn normalize(f: ScalarField2D) -> ScalarField2D {
    let m = f.max_abs();
    if m > 0.0 {
        f.scaled(1.0 / m)
    } else {
        f
    }
}

fn normalize3(f: ScalarField3D) -> ScalarField3D {
    let m = f.max_abs();
    if m > 0.0 {
        f.scaled(1.0 / m)
    } else {
        f
    }
}
