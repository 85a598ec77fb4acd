//! Dynamics-level checks of the 2D Euler integrator: an independent
//! finite-difference oracle for the right-hand side and the conservation
//! behaviour over a real trajectory.

use eulerlax_core::euler2d::{diagnostics, euler_rhs, integrate_trajectory, FlowState2D};
use eulerlax_core::{random_bandlimited, Grid2D, ScalarField2D};

/// 4th-order central first derivative along x with periodic wrap;
/// independent of the spectral path.
fn fd4_ddx(f: &ScalarField2D) -> ScalarField2D {
    let g = f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let h = g.dx();
    let mut out = vec![0.0; g.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            let v = |off: i64| f.at(((ix as i64 + off).rem_euclid(nx as i64)) as usize, iy);
            out[g.idx(ix, iy)] = (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * h);
        }
    }
    ScalarField2D::from_values(g, out).unwrap()
}

fn fd4_ddy(f: &ScalarField2D) -> ScalarField2D {
    let g = f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let h = g.dy();
    let mut out = vec![0.0; g.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            let v = |off: i64| f.at(ix, ((iy as i64 + off).rem_euclid(ny as i64)) as usize);
            out[g.idx(ix, iy)] = (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * h);
        }
    }
    ScalarField2D::from_values(g, out).unwrap()
}

#[test]
fn rhs_matches_finite_difference_oracle() {
    // Smooth low-band data on a fine grid keeps the FD truncation error of
    // the oracle itself below the comparison tolerance.
    let g = Grid2D::new(512, 512).unwrap();
    let omega = random_bandlimited(2024, 4, g).unwrap();
    let state = FlowState2D::from_vorticity(omega, 0.0).unwrap();

    let spectral = euler_rhs(&state);

    let (ox, oy) = (fd4_ddx(state.omega()), fd4_ddy(state.omega()));
    let (px, py) = (fd4_ddx(state.psi()), fd4_ddy(state.psi()));
    let oracle = &(&py * &ox) - &(&px * &oy); // -{Ψ, Ω}

    let gap = (&spectral - &oracle).max_abs();
    let scale = spectral.max_abs();
    assert!(
        gap < 1e-6 * scale,
        "relative gap {:.3e} (|rhs| = {:.3e})",
        gap / scale,
        scale
    );
}

#[test]
fn hundred_step_run_conserves_invariants() {
    let g = Grid2D::new(64, 64).unwrap();
    let omega = random_bandlimited(99, 8, g).unwrap();
    let state = FlowState2D::from_vorticity(omega, 0.0).unwrap();
    let trajectory = integrate_trajectory(&state, 1e-2, 100);

    let first = diagnostics(&trajectory[0]);
    let last = diagnostics(trajectory.last().unwrap());

    let energy_drift = (last.energy - first.energy).abs() / first.energy;
    let enstrophy_drift = (last.enstrophy - first.enstrophy).abs() / first.enstrophy;
    assert!(energy_drift < 1e-6, "energy drift {energy_drift:.3e}");
    assert!(enstrophy_drift < 1e-6, "enstrophy drift {enstrophy_drift:.3e}");
    assert!(
        last.mean_vorticity.abs() < 1e-13,
        "mean vorticity {:.3e}",
        last.mean_vorticity
    );
}
