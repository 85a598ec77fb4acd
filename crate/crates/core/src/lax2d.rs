//! The 2D Lax operators `L φ = {Ω, φ}`, `A φ = {Ψ, φ}`, their compatibility
//! residual, and isospectral transport of candidate eigenfunctions along
//! Euler trajectories.

use num_complex::Complex64;

use crate::bracket::{poisson_bracket, poisson_bracket_dealiased};
use crate::error::{Error, Result};
use crate::euler2d::FlowState2D;
use crate::field2d::{solve_poisson_projected, ComplexField2D, ScalarField2D};
use crate::mask::{norms, FieldNorms};

/// A candidate eigenfunction with its eigenvalue. The eigenrelation residual
/// `‖{Ω, φ} - λφ‖` is always measured, never assumed.
#[derive(Clone, Debug)]
pub struct LaxEigenfunction2D {
    pub phi: ComplexField2D,
    pub lambda: Complex64,
}

impl LaxEigenfunction2D {
    pub fn real(phi: ScalarField2D, lambda: Complex64) -> Self {
        Self {
            phi: ComplexField2D::from_real(phi),
            lambda,
        }
    }

    /// `‖{Ω, φ} - λφ‖` as norms of the pointwise complex magnitude.
    pub fn residual(&self, omega: &ScalarField2D) -> Result<FieldNorms> {
        let l_phi = lax_l_complex(omega, &self.phi)?;
        let r = l_phi.sub_scaled(self.lambda, &self.phi);
        norms(&r.magnitude(), None)
    }
}

/// `L φ = {Ω, φ}`.
pub fn lax_l(omega: &ScalarField2D, phi: &ScalarField2D) -> Result<ScalarField2D> {
    poisson_bracket(omega, phi)
}

/// `A φ = {Ψ, φ}`.
pub fn lax_a(psi: &ScalarField2D, phi: &ScalarField2D) -> Result<ScalarField2D> {
    poisson_bracket(psi, phi)
}

/// Componentwise `L` on a complex field (the operator is real-linear).
pub fn lax_l_complex(omega: &ScalarField2D, phi: &ComplexField2D) -> Result<ComplexField2D> {
    ComplexField2D::new(lax_l(omega, &phi.re)?, lax_l(omega, &phi.im)?)
}

/// Componentwise `A` on a complex field.
pub fn lax_a_complex(psi: &ScalarField2D, phi: &ComplexField2D) -> Result<ComplexField2D> {
    ComplexField2D::new(lax_a(psi, &phi.re)?, lax_a(psi, &phi.im)?)
}

/// The operator-level compatibility residual
///
/// ```text
/// [{ω_t, φ} + {Ψ, {Ω, φ}} - {Ω, {Ψ, φ}}] - {ω_t + {Ψ, Ω}, φ}
/// ```
///
/// which vanishes identically for any smooth fields (the double-bracket
/// terms collapse by the Jacobi identity), independent of the dynamics.
pub fn compatibility_residual_2d(
    state: &FlowState2D,
    omega_t: &ScalarField2D,
    phi: &ScalarField2D,
) -> Result<ScalarField2D> {
    let omega = state.omega();
    let psi = state.psi();
    omega.same_grid(omega_t)?;
    omega.same_grid(phi)?;

    let term1 = poisson_bracket(omega_t, phi)?;
    let term2 = poisson_bracket(psi, &poisson_bracket(omega, phi)?)?;
    let term3 = poisson_bracket(omega, &poisson_bracket(psi, phi)?)?;
    let lhs = &(&term1 + &term2) - &term3;

    let euler_op = omega_t.add_scaled(1.0, &poisson_bracket(psi, omega)?);
    let rhs = poisson_bracket(&euler_op, phi)?;
    Ok(&lhs - &rhs)
}

/// Integrate `∂_t φ = -{Ψ(t), φ}` along a precomputed flow trajectory with
/// the same RK4 scheme, recomputing the flow's stage values so the coupled
/// integration matches the flow integrator stage for stage.
pub fn transport_phi(
    trajectory: &[FlowState2D],
    phi0: &ScalarField2D,
    dt: f64,
) -> Result<Vec<ScalarField2D>> {
    if trajectory.is_empty() {
        return Err(Error::TrajectoryMismatch("empty trajectory".into()));
    }
    phi0.same_grid(trajectory[0].omega())?;
    for pair in trajectory.windows(2) {
        let spacing = pair[1].time() - pair[0].time();
        if (spacing - dt).abs() > 1e-12 * dt.max(1.0) {
            return Err(Error::TrajectoryMismatch(format!(
                "trajectory spacing {spacing:.6e} does not match dt = {dt:.6e}"
            )));
        }
    }

    let mut phis = Vec::with_capacity(trajectory.len());
    phis.push(phi0.clone());
    for state in &trajectory[..trajectory.len() - 1] {
        let phi = phis.last().unwrap();
        let next = transport_step(state, phi, dt);
        phis.push(next);
    }
    Ok(phis)
}

/// One coupled RK4 step of `(Ω, φ)`; the `Ω` stages mirror
/// [`crate::euler2d::step_rk4`] exactly.
fn transport_step(state: &FlowState2D, phi: &ScalarField2D, dt: f64) -> ScalarField2D {
    let rhs_w = |psi: &ScalarField2D, w: &ScalarField2D| {
        poisson_bracket_dealiased(psi, w).expect("matching grids").scaled(-1.0)
    };
    let rhs_phi = |psi: &ScalarField2D, p: &ScalarField2D| {
        poisson_bracket_dealiased(psi, p).expect("matching grids").scaled(-1.0)
    };

    let w = state.omega();
    let psi1 = state.psi();
    let k1 = rhs_w(psi1, w);
    let l1 = rhs_phi(psi1, phi);

    let w2 = w.add_scaled(0.5 * dt, &k1);
    let p2 = phi.add_scaled(0.5 * dt, &l1);
    let psi2 = solve_poisson_projected(&w2);
    let k2 = rhs_w(&psi2, &w2);
    let l2 = rhs_phi(&psi2, &p2);

    let w3 = w.add_scaled(0.5 * dt, &k2);
    let p3 = phi.add_scaled(0.5 * dt, &l2);
    let psi3 = solve_poisson_projected(&w3);
    let k3 = rhs_w(&psi3, &w3);
    let l3 = rhs_phi(&psi3, &p3);

    let w4 = w.add_scaled(dt, &k3);
    let p4 = phi.add_scaled(dt, &l3);
    let psi4 = solve_poisson_projected(&w4);
    let l4 = rhs_phi(&psi4, &p4);

    let mut sum = l1.add_scaled(2.0, &l2);
    sum = sum.add_scaled(2.0, &l3);
    sum = sum.add_scaled(1.0, &l4);
    phi.add_scaled(dt / 6.0, &sum)
}

/// One row of an isospectrality time series.
#[derive(Clone, Copy, Debug)]
pub struct IsospectralSample {
    pub t: f64,
    pub linf: f64,
    pub l2: f64,
}

/// Residual `‖{Ω(t), φ(t)} - λ φ(t)‖` at every snapshot. Purely descriptive:
/// large residuals are reported, not rejected.
pub fn isospectrality_series(
    trajectory: &[FlowState2D],
    phis: &[ScalarField2D],
    lambda: Complex64,
) -> Result<Vec<IsospectralSample>> {
    if trajectory.len() != phis.len() {
        return Err(Error::TrajectoryMismatch(format!(
            "trajectory has {} states but {} eigenfunction snapshots",
            trajectory.len(),
            phis.len()
        )));
    }
    trajectory
        .iter()
        .zip(phis)
        .map(|(state, phi)| {
            let n = LaxEigenfunction2D::real(phi.clone(), lambda).residual(state.omega())?;
            Ok(IsospectralSample {
                t: state.time(),
                linf: n.linf,
                l2: n.l2,
            })
        })
        .collect()
}
