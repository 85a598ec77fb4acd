//! The Darboux theorem as a property sweep over the shipped function
//! library and shift family, plus the structural proof identities.

use eulerlax_core::darboux::{
    b3_implies_b4_residual, check_constraints, darboux_verify, darboux_verify_transported,
    gauge_transform, gauge_transform_y, DarbouxCase, DarbouxTolerances, KernelFn,
};
use eulerlax_core::euler2d::{integrate_trajectory, FlowState2D, SteadyStateSpec};
use eulerlax_core::lax2d::transport_phi;
use eulerlax_core::{random_bandlimited, Grid2D};

fn eigenstate(n: usize) -> FlowState2D {
    SteadyStateSpec::LaplacianEigenstate { k: 1, l: 1, amplitude: 1.0 }
        .build(Grid2D::new(n, n).unwrap())
}

const SHIFTS: [f64; 3] = [0.1, 0.25, -0.3];

#[test]
fn darboux_theorem_over_the_function_library() {
    let state = eigenstate(128);
    let tol = DarbouxTolerances::default();
    for g in KernelFn::ALL.iter().filter(|g| g.bounded_away_from_zero()) {
        for h in KernelFn::ALL {
            for c in SHIFTS {
                let case = DarbouxCase::on_steady_state(&state, *g, h, c);
                let report = darboux_verify(&case, 1e-3, &tol).unwrap();
                assert!(
                    report.verdict,
                    "g = {}, h = {}, c = {c}: {:?}",
                    g.name(),
                    h.name(),
                    report.residuals
                );
                assert!(
                    report.mask_fraction >= 0.9,
                    "g = {}, h = {}, c = {c}: kept fraction {}",
                    g.name(),
                    h.name(),
                    report.mask_fraction
                );
            }
        }
    }
}

#[test]
fn gauge_forms_agree_whenever_d1_holds() {
    let state = eigenstate(128);
    let omega = state.omega();
    for g in [KernelFn::ExpQuarter, KernelFn::TwoPlusCos] {
        for h in [KernelFn::Identity, KernelFn::Square, KernelFn::Sin] {
            let f = g.apply(omega);
            let p = h.apply(omega);
            let (ptx, mx) = gauge_transform(&p, &f, omega, 1e-3).unwrap();
            let (pty, my) = gauge_transform_y(&p, &f, omega, 1e-3).unwrap();
            let joint = mx.intersect(&my).unwrap();
            let gap = eulerlax_core::norms(&joint.apply(&(&ptx - &pty)).unwrap(), Some(&joint))
                .unwrap()
                .linf;
            assert!(gap < 1e-8, "g = {}, h = {}: gap {gap:.3e}", g.name(), h.name());
        }
    }
}

#[test]
fn constraint_implication_over_the_shift_family() {
    // The Proposition as a test: whenever an alternative constraint set
    // holds to 1e-9, the main set holds to 1e-7.
    let state = eigenstate(128);
    for c in SHIFTS {
        let big_f = state.omega().scaled(c);
        let r = check_constraints(state.omega(), &big_f, 1e-3, 1e-9).unwrap();
        let alt_set_holds = (r.main1 < 1e-9 && r.alt1 < 1e-9) || (r.main1 < 1e-9 && r.alt2 < 1e-9);
        assert!(alt_set_holds, "c = {c}: alt residuals {:.3e}/{:.3e}", r.alt1, r.alt2);
        assert!(r.main2 < 1e-7, "c = {c}: main residual {:.3e}", r.main2);
    }
}

#[test]
fn constraint_implication_is_not_vacuous() {
    // Negative control: an F unrelated to Ω fails the alternative sets and
    // the main set, so the implication is exercised, not vacuous.
    let state = eigenstate(64);
    let big_f = random_bandlimited(123, 5, state.grid()).unwrap();
    let r = check_constraints(state.omega(), &big_f, 1e-3, 1e-9).unwrap();
    assert!(r.alt1 > 1e-9 && r.main2 > 1e-7);
}

#[test]
fn b3_b4_simplification_on_arbitrary_fields() {
    // Unconditional product-rule identity: holds for fields with no
    // relation at all, on a mask wide enough to control the 1/Ω_x³ scale.
    let g = Grid2D::new(64, 64).unwrap();
    for seed in 0..5 {
        let omega = random_bandlimited(seed, 6, g).unwrap();
        let psi = random_bandlimited(seed + 31, 6, g).unwrap();
        let f = random_bandlimited(seed + 62, 6, g).unwrap().map(|v| v + 2.0);
        let (gap, fraction) = b3_implies_b4_residual(&omega, &psi, &f, 5e-2).unwrap();
        assert!(gap < 1e-8, "seed {seed}: gap {gap:.3e} (mask {fraction:.2})");
    }
}

#[test]
fn b3_b4_on_the_eigenstate_family() {
    let state = eigenstate(128);
    for g in [KernelFn::ExpQuarter, KernelFn::TwoPlusCos] {
        let f = g.apply(state.omega());
        let (gap, fraction) = b3_implies_b4_residual(state.omega(), state.psi(), &f, 1e-3).unwrap();
        assert!(gap < 1e-8, "g = {}: gap {gap:.3e}", g.name());
        assert!(fraction > 0.9);
    }
}

#[test]
fn transported_trajectory_verifies_the_time_equation() {
    // Co-evolve p and f along the steady eigenstate flow and check the
    // rewritten time equation with 4th-order time stencils.
    let state = eigenstate(64);
    let dt = 5e-3;
    let trajectory = integrate_trajectory(&state, dt, 8);
    let case = DarbouxCase::on_steady_state(&state, KernelFn::TwoPlusCos, KernelFn::Square, 0.25);
    let p_traj = transport_phi(&trajectory, &case.p, dt).unwrap();
    let f_traj = transport_phi(&trajectory, &case.f, dt).unwrap();
    let samples = darboux_verify_transported(
        &case.omega,
        &case.psi,
        &case.big_f,
        &p_traj,
        &f_traj,
        dt,
        1e-3,
    )
    .unwrap();
    for s in samples {
        assert!(s.linf < 1e-6, "t = {}: ch2 residual {:.3e}", s.t, s.linf);
    }
}
