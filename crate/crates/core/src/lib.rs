//! Pseudo-spectral verification library for the Lax-pair structure of the
//! incompressible Euler equations and the associated Darboux transformation.
//!
//! All fields live on uniform periodic grids. Derivatives are spectral, so
//! operator identities hold to rounding for band-limited inputs; identities
//! involving divisions by fields that can vanish are evaluated with masked
//! norms. The crate is split along the same seams as the mathematics:
//!
//! * [`field2d`], [`bracket`], [`mask`] — scalar fields, the Poisson bracket
//!   `{a,b} = a_x b_y - a_y b_x`, Laplacian and its inverse, masked norms;
//! * [`euler2d`] — vorticity-form 2D Euler with RK4 and exact steady states;
//! * [`lax2d`] — the 2D Lax operators, compatibility residual and transport;
//! * [`darboux`] — the gauge/potential transforms and their verification;
//! * [`field3d`], [`lax3d`] — 3D vector fields, the Childress Lax operators
//!   and the shifted variant with its compatibility equation;
//! * [`eulf`] — binary field snapshots.
//!
//! All operations are pure: input fields are never mutated and results are
//! freshly allocated, so fields can be shared across threads freely.

pub mod bracket;
pub mod darboux;
pub mod error;
pub mod eulf;
pub mod euler2d;
pub mod field2d;
pub mod field3d;
pub mod grid;
pub mod lax2d;
pub mod lax3d;
pub mod mask;
pub mod random;

mod fft;

pub use bracket::{poisson_bracket, poisson_bracket_dealiased};
pub use error::{Error, Result};
pub use field2d::{ComplexField2D, ScalarField2D, SpectralCoeffs2D};
pub use field3d::{ScalarField3D, VectorField3D};
pub use grid::{Grid2D, Grid3D};
pub use mask::{norms, FieldNorms, Mask2D};
pub use random::random_bandlimited;
