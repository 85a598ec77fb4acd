//! Independent finite-difference oracle for the 3D Lax operator and the
//! 2D-reduction embedding at production resolution.

use eulerlax_core::field3d::{ScalarField3D, VectorField3D};
use eulerlax_core::lax3d::{commutator_identity_residual, embed_2d_scalar, lax3d_l, ShiftVector};
use eulerlax_core::random::random_bandlimited_3d;
use eulerlax_core::{random_bandlimited, Grid2D, Grid3D};

fn random_vector(seed: u64, kmax: usize, grid: Grid3D) -> VectorField3D {
    let comps =
        [0u64, 1, 2].map(|c| random_bandlimited_3d(seed * 1000 + c, kmax, grid).unwrap());
    VectorField3D::new(comps).unwrap()
}

/// 4th-order central difference along one axis with periodic wrap.
fn fd4(f: &ScalarField3D, axis: usize) -> ScalarField3D {
    let g = f.grid();
    let n = [g.nx(), g.ny(), g.nz()];
    let h = [g.lx() / g.nx() as f64, g.ly() / g.ny() as f64, g.lz() / g.nz() as f64][axis];
    let mut out = vec![0.0; g.len()];
    for iz in 0..g.nz() {
        for iy in 0..g.ny() {
            for ix in 0..g.nx() {
                let mut idx = [ix as i64, iy as i64, iz as i64];
                let mut sample = |off: i64| {
                    let orig = idx[axis];
                    idx[axis] = (orig + off).rem_euclid(n[axis] as i64);
                    let v = f.at(idx[0] as usize, idx[1] as usize, idx[2] as usize);
                    idx[axis] = orig;
                    v
                };
                out[g.idx(ix, iy, iz)] =
                    (-sample(2) + 8.0 * sample(1) - 8.0 * sample(-1) + sample(-2)) / (12.0 * h);
            }
        }
    }
    ScalarField3D::from_values(g, out).unwrap()
}

fn fd4_lax_l(omega: &VectorField3D, phi: &VectorField3D) -> VectorField3D {
    let g = omega.grid();
    let mut comps = Vec::with_capacity(3);
    for i in 0..3 {
        let mut acc = ScalarField3D::zeros(g);
        for j in 0..3 {
            let dphi = fd4(phi.comp(i), j);
            let domega = fd4(omega.comp(i), j);
            acc = &acc + &(&(omega.comp(j) * &dphi) - &(phi.comp(j) * &domega));
        }
        comps.push(acc);
    }
    VectorField3D::new([comps.remove(0), comps.remove(0), comps.remove(0)]).unwrap()
}

#[test]
fn lax3d_matches_finite_difference_oracle_at_production_resolution() {
    let g = Grid3D::cube(128).unwrap();
    let omega = random_vector(71, 2, g);
    let phi = random_vector(72, 2, g);
    let spectral = lax3d_l(&omega, &phi).unwrap();
    let oracle = fd4_lax_l(&omega, &phi);
    let gap = (&spectral - &oracle).max_abs();
    let scale = spectral.max_abs();
    assert!(
        gap < 1e-5 * scale,
        "relative gap {:.3e} (scale {scale:.3e})",
        gap / scale
    );
}

#[test]
fn embedding_a_2d_case_kills_l_at_production_resolution() {
    let g3 = Grid3D::cube(64).unwrap();
    let g2 = Grid2D::new(64, 64).unwrap();
    let omega2 = random_bandlimited(301, 10, g2).unwrap();
    let phi2 = random_bandlimited(302, 10, g2).unwrap();
    let omega = embed_2d_scalar(&omega2, g3).unwrap();
    let phi = embed_2d_scalar(&phi2, g3).unwrap();
    let r = lax3d_l(&omega, &phi).unwrap().max_abs();
    assert!(r < 1e-12, "2D reduction residual {r:.3e}");
}

#[test]
fn commutator_identity_at_production_resolution() {
    let g = Grid3D::cube(64).unwrap();
    let q = random_vector(501, 8, g);
    let omega = random_vector(502, 8, g);
    let phi = random_vector(503, 8, g);
    let a1 = ShiftVector::new([1.0, 2.0, 3.0]);
    let a2 = ShiftVector::new([-1.0, 0.0, 2.0]);
    let r = commutator_identity_residual(&q, &omega, &phi, &a1, &a2).unwrap();
    assert!(r.max_abs() < 1e-7, "residual {:.3e}", r.max_abs());
}
