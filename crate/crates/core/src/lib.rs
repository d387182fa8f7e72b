//! Numerical realization of the `dbar` complex on the cone
//! `z3^2 = z1 z2`, pulled back to the ball-like domain
//! `B = {|v|^4 + |w|^4 < 1}` in `C^2` with its degenerate metric, together
//! with the weighted and fractional norms needed to test the a-priori and
//! subelliptic estimates on families of compactly supported `(0,1)`-forms.

pub mod error;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod norms;
pub mod operators;
pub mod tolerances;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
