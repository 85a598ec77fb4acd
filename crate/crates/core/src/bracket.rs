//! The Poisson bracket `{a, b} = a_x b_y - a_y b_x`.
//!
//! Derivatives are spectral, products pointwise. The plain bracket keeps the
//! full spectrum (residual checks budget for the widened spectrum instead);
//! the dealiased variant applies the 2/3 rule to both factors and the
//! product and is what the time integrators use.

use crate::error::Result;
use crate::field2d::ScalarField2D;

/// `{a, b} = a_x b_y - a_y b_x` with full-spectrum products.
pub fn poisson_bracket(a: &ScalarField2D, b: &ScalarField2D) -> Result<ScalarField2D> {
    a.same_grid(b)?;
    let (ax, ay) = a.gradient();
    let (bx, by) = b.gradient();
    Ok(&(&ax * &by) - &(&ay * &bx))
}

/// `{a, b}` with 2/3-rule truncation of both derivative factors and of the
/// product, and the (analytically zero) mean removed. Used inside time
/// stepping, where aliasing would otherwise feed back into the dynamics.
pub fn poisson_bracket_dealiased(a: &ScalarField2D, b: &ScalarField2D) -> Result<ScalarField2D> {
    a.same_grid(b)?;
    let sa = a.to_spectral();
    let sb = b.to_spectral();

    let deriv = |s: &crate::field2d::SpectralCoeffs2D, along_x: bool| {
        let mut d = s.clone();
        if along_x {
            d.apply_ddx();
        } else {
            d.apply_ddy();
        }
        d.dealias_two_thirds();
        d.to_physical()
    };

    let ax = deriv(&sa, true);
    let ay = deriv(&sa, false);
    let bx = deriv(&sb, true);
    let by = deriv(&sb, false);

    let product = &(&ax * &by) - &(&ay * &bx);
    let mut s = product.to_spectral();
    s.dealias_two_thirds();
    s.zero_mean();
    Ok(s.to_physical())
}
