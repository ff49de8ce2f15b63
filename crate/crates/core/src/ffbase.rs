//! Base arithmetic shared by every other module.
//!
//! - [`Field`]: table-driven F_{q^κ} with F_q singled out and a fixed ξ, ξ^{q-1} = -1
//! - [`ThetaPoly`]: dense polynomials in θ, in particular elements of A = F_q[θ]
//! - [`MPoly`]: sparse polynomials in t_1..t_12 and θ with packed monomials
//! - [`KRat`]: quotients with a monic t-free denominator
//! - [`SemiChar`]: semi-characters a ↦ a^k Π χ_{t_i}(a)^{α_i}

mod combinat;
mod field;
mod krat;
mod mpoly;
mod theta;

pub use combinat::{carlitz_coeffs, chi_substitute, digit_sum, digits, gbinom, lucas_binom, monic_polys, polys_below, semichar_eval, SemiChar};
pub use field::{Elem, Field};
pub use krat::KRat;
pub use mpoly::{Accum, MPoly, MixedPoly, Mono, TPoly, NVARS};
pub use theta::ThetaPoly;
