//! Pseudo-spectral time integration of 2D Euler in vorticity form,
//! `∂_t Ω + {Ψ, Ω} = 0` with `ΔΨ = Ω`, plus a small library of exact
//! steady states.
//!
//! The velocity is `u = (-Ψ_y, Ψ_x)`, so `u·∇Ω = {Ψ, Ω}` under the bracket
//! convention of [`crate::bracket`]. The solver is strictly inviscid; every
//! right-hand side is dealiased with the 2/3 rule and has its mean removed,
//! which conserves the (analytically zero) mean vorticity exactly.

use crate::bracket::poisson_bracket_dealiased;
use crate::error::{Error, Result};
use crate::field2d::{solve_poisson, solve_poisson_projected, ScalarField2D};
use crate::grid::Grid2D;
use std::f64::consts::TAU;

/// A `(Ω, Ψ, t)` triple with `ΔΨ = Ω`.
#[derive(Clone, Debug)]
pub struct FlowState2D {
    omega: ScalarField2D,
    psi: ScalarField2D,
    t: f64,
}

impl FlowState2D {
    /// Build a state from vorticity alone; `Ψ` is the zero-mean solution of
    /// `ΔΨ = Ω`. Fails if `Ω` has a non-zero mean (not solvable on the torus).
    pub fn from_vorticity(omega: ScalarField2D, t: f64) -> Result<Self> {
        let psi = solve_poisson(&omega)?;
        Ok(Self { omega, psi, t })
    }

    /// Build from both potentials, verifying `ΔΨ = Ω` to 1e-10 relative.
    pub fn from_parts(omega: ScalarField2D, psi: ScalarField2D, t: f64) -> Result<Self> {
        omega.same_grid(&psi)?;
        let residual = (&psi.laplacian() - &omega).max_abs();
        let scale = omega.max_abs().max(1e-300);
        if residual > 1e-10 * scale {
            return Err(Error::InvalidParameter(format!(
                "ΔΨ - Ω residual {residual:.3e} exceeds 1e-10 relative to max|Ω| = {scale:.3e}"
            )));
        }
        Ok(Self { omega, psi, t })
    }

    pub fn omega(&self) -> &ScalarField2D {
        &self.omega
    }

    pub fn psi(&self) -> &ScalarField2D {
        &self.psi
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> Grid2D {
        self.omega.grid()
    }
}

/// Exact steady solutions used as verification substrates.
///
/// Any `Ω = G(Ψ)` is steady; these two families keep `G` linear so all the
/// closed forms stay one-line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SteadyStateSpec {
    /// `Ψ = A sin(kx) sin(ly)`, `Ω = -(k²+l²)Ψ` (mode indices on the periodic box).
    LaplacianEigenstate { k: i64, l: i64, amplitude: f64 },
    /// `Ψ = A cos(my)`, `Ω = -m²Ψ`.
    Shear { m: i64, amplitude: f64 },
}

impl SteadyStateSpec {
    pub fn build(&self, grid: Grid2D) -> FlowState2D {
        match *self {
            SteadyStateSpec::LaplacianEigenstate { k, l, amplitude } => {
                let kx = TAU * k as f64 / grid.lx();
                let ky = TAU * l as f64 / grid.ly();
                let mu = kx * kx + ky * ky;
                let psi = ScalarField2D::from_fn(grid, |x, y| {
                    amplitude * (kx * x).sin() * (ky * y).sin()
                });
                let omega = psi.scaled(-mu);
                FlowState2D { omega, psi, t: 0.0 }
            }
            SteadyStateSpec::Shear { m, amplitude } => {
                let ky = TAU * m as f64 / grid.ly();
                let psi = ScalarField2D::from_fn(grid, |_, y| amplitude * (ky * y).cos());
                let omega = psi.scaled(-(ky * ky));
                FlowState2D { omega, psi, t: 0.0 }
            }
        }
    }

    /// Parse `"eigenstate:k=1,l=1,A=1"` or `"shear:m=1,A=0.5"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(msg);
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut k = 1i64;
        let mut l = 1i64;
        let mut m = 1i64;
        let mut amplitude = 1.0f64;
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value in state spec, got `{part}`")))?;
            match key.trim() {
                "k" => k = value.parse().map_err(|e| bad(format!("k: {e}")))?,
                "l" => l = value.parse().map_err(|e| bad(format!("l: {e}")))?,
                "m" => m = value.parse().map_err(|e| bad(format!("m: {e}")))?,
                "A" | "a" | "amp" => {
                    amplitude = value.parse().map_err(|e| bad(format!("A: {e}")))?
                }
                other => return Err(bad(format!("unknown state parameter `{other}`"))),
            }
        }
        match kind.trim() {
            "eigenstate" | "laplacian-eigenstate" => Ok(SteadyStateSpec::LaplacianEigenstate {
                k,
                l,
                amplitude,
            }),
            "shear" => Ok(SteadyStateSpec::Shear { m, amplitude }),
            other => Err(bad(format!("unknown steady state kind `{other}`"))),
        }
    }
}

/// `∂_t Ω = -{Ψ, Ω}` with the dealiased bracket.
pub fn euler_rhs(state: &FlowState2D) -> ScalarField2D {
    rhs_from_parts(&state.psi, &state.omega)
}

fn rhs_from_parts(psi: &ScalarField2D, omega: &ScalarField2D) -> ScalarField2D {
    poisson_bracket_dealiased(psi, omega)
        .expect("state invariant guarantees matching grids")
        .scaled(-1.0)
}

/// Largest stable time step, `0.5 · min(dx, dy) / max|u|`.
pub fn cfl_limit(state: &FlowState2D) -> f64 {
    let (ux, uy) = velocity(state);
    let umax = ux
        .values()
        .iter()
        .zip(uy.values())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    if umax == 0.0 {
        f64::INFINITY
    } else {
        0.5 * state.grid().dx().min(state.grid().dy()) / umax
    }
}

/// Velocity `u = (-Ψ_y, Ψ_x)`.
pub fn velocity(state: &FlowState2D) -> (ScalarField2D, ScalarField2D) {
    let (px, py) = state.psi.gradient();
    (py.scaled(-1.0), px)
}

/// One classical RK4 step on `Ω`, re-solving `Ψ` at every stage.
///
/// A `dt` above the CFL bound is reported through `log::warn!` but the step
/// is still taken. `dt = 0` returns the state unchanged.
pub fn step_rk4(state: &FlowState2D, dt: f64) -> FlowState2D {
    assert!(dt.is_finite() && dt >= 0.0, "dt must be finite and non-negative");
    if dt == 0.0 {
        return state.clone();
    }
    let limit = cfl_limit(state);
    if dt > limit {
        log::warn!("dt = {dt:.3e} exceeds the CFL bound {limit:.3e}; step taken anyway");
    }

    let w = &state.omega;
    let k1 = rhs_from_parts(&state.psi, w);
    let w2 = w.add_scaled(0.5 * dt, &k1);
    let k2 = rhs_from_parts(&solve_poisson_projected(&w2), &w2);
    let w3 = w.add_scaled(0.5 * dt, &k2);
    let k3 = rhs_from_parts(&solve_poisson_projected(&w3), &w3);
    let w4 = w.add_scaled(dt, &k3);
    let k4 = rhs_from_parts(&solve_poisson_projected(&w4), &w4);

    let mut sum = k1.add_scaled(2.0, &k2);
    sum = sum.add_scaled(2.0, &k3);
    sum = sum.add_scaled(1.0, &k4);
    let omega = w.add_scaled(dt / 6.0, &sum);
    let psi = solve_poisson_projected(&omega);
    FlowState2D {
        omega,
        psi,
        t: state.t + dt,
    }
}

/// Integrate `nsteps` RK4 steps, returning all `nsteps + 1` states.
pub fn integrate_trajectory(state0: &FlowState2D, dt: f64, nsteps: usize) -> Vec<FlowState2D> {
    let mut out = Vec::with_capacity(nsteps + 1);
    out.push(state0.clone());
    for _ in 0..nsteps {
        let next = step_rk4(out.last().unwrap(), dt);
        out.push(next);
    }
    out
}

/// Conservation monitors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `½⟨|∇Ψ|²⟩` (domain average).
    pub energy: f64,
    /// `½⟨Ω²⟩`.
    pub enstrophy: f64,
    pub mean_vorticity: f64,
}

pub fn diagnostics(state: &FlowState2D) -> Diagnostics {
    let (px, py) = state.psi.gradient();
    let n = state.grid().len() as f64;
    let energy = 0.5
        * px.values()
            .iter()
            .zip(py.values())
            .map(|(a, b)| a * a + b * b)
            .sum::<f64>()
        / n;
    let enstrophy = 0.5 * state.omega.values().iter().map(|v| v * v).sum::<f64>() / n;
    Diagnostics {
        energy,
        enstrophy,
        mean_vorticity: state.omega.mean(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_bandlimited;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n).unwrap()
    }

    fn eigenstate() -> FlowState2D {
        SteadyStateSpec::LaplacianEigenstate {
            k: 1,
            l: 1,
            amplitude: 1.0,
        }
        .build(grid(64))
    }

    #[test]
    fn eigenstate_satisfies_elliptic_relation() {
        let s = eigenstate();
        let residual = (&s.psi().laplacian() - &s.omega()).max_abs();
        assert!(residual < 1e-10 * s.omega().max_abs());
    }

    #[test]
    fn eigenstate_rhs_vanishes() {
        assert!(euler_rhs(&eigenstate()).max_abs() < 1e-10);
    }

    #[test]
    fn shear_rhs_vanishes() {
        let s = SteadyStateSpec::Shear { m: 1, amplitude: 1.0 }.build(grid(64));
        assert!(euler_rhs(&s).max_abs() < 1e-12);
    }

    #[test]
    fn random_rhs_matches_plain_bracket_within_band() {
        let g = grid(64);
        let omega = random_bandlimited(17, 8, g).unwrap();
        let state = FlowState2D::from_vorticity(omega, 0.0).unwrap();
        let plain = crate::bracket::poisson_bracket(state.psi(), state.omega())
            .unwrap()
            .scaled(-1.0);
        assert!((&euler_rhs(&state) - &plain).max_abs() < 1e-12);
    }

    #[test]
    fn step_fixes_steady_state() {
        let s = eigenstate();
        let next = step_rk4(&s, 1e-2);
        assert!((next.omega() - s.omega()).max_abs() < 1e-10);
        assert!((next.time() - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn zero_dt_is_identity() {
        let g = grid(64);
        let omega = random_bandlimited(3, 8, g).unwrap();
        let s = FlowState2D::from_vorticity(omega, 0.25).unwrap();
        let next = step_rk4(&s, 0.0);
        assert_eq!(next.omega().values(), s.omega().values());
        assert_eq!(next.time(), s.time());
    }

    #[test]
    fn rk4_local_order_is_five() {
        let g = grid(64);
        let omega = random_bandlimited(5, 8, g).unwrap();
        let s = FlowState2D::from_vorticity(omega, 0.0).unwrap();
        let dts = [1e-2, 5e-3, 2.5e-3];
        let errors: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let one = step_rk4(&s, dt);
                let half = step_rk4(&step_rk4(&s, dt / 2.0), dt / 2.0);
                (one.omega() - half.omega()).max_abs()
            })
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 4.5, "observed per-step order {order:.2}");
        }
    }

    #[test]
    fn diagnostics_of_eigenstate() {
        let d = diagnostics(&eigenstate());
        assert!((d.energy - 0.25).abs() < 1e-12);
        assert!((d.enstrophy - 0.5).abs() < 1e-12);
        assert!(d.mean_vorticity.abs() < 1e-14);
    }

    #[test]
    fn diagnostics_of_zero_state() {
        let s = FlowState2D::from_vorticity(ScalarField2D::zeros(grid(32)), 0.0).unwrap();
        let d = diagnostics(&s);
        assert_eq!((d.energy, d.enstrophy, d.mean_vorticity), (0.0, 0.0, 0.0));
    }

    #[test]
    fn cfl_limit_is_infinite_for_rest() {
        let s = FlowState2D::from_vorticity(ScalarField2D::zeros(grid(32)), 0.0).unwrap();
        assert!(cfl_limit(&s).is_infinite());
    }

    #[test]
    fn parse_state_specs() {
        assert_eq!(
            SteadyStateSpec::parse("eigenstate:k=1,l=1,A=1").unwrap(),
            SteadyStateSpec::LaplacianEigenstate { k: 1, l: 1, amplitude: 1.0 }
        );
        assert_eq!(
            SteadyStateSpec::parse("shear:m=2,A=0.5").unwrap(),
            SteadyStateSpec::Shear { m: 2, amplitude: 0.5 }
        );
        assert!(SteadyStateSpec::parse("vortex:k=1").is_err());
        assert!(SteadyStateSpec::parse("eigenstate:q=3").is_err());
    }
}
