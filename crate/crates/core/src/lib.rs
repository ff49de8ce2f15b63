//! Exact arithmetic around the Carlitz module over A = F_q[θ].
//!
//! - [`ffbase`]: finite fields, polynomials in θ and the t-variables, semi-characters
//! - [`cinf`]: Puiseux series in 1/θ, the Carlitz period, exponential and logarithm
//! - [`goss`]: Goss polynomials, u-expansions and divided derivatives
//! - [`tame`]: tame series in the e_i and their valuations
//! - [`zeta`]: power sums, zeta values and harmonic relations
//! - [`modular`]: the representations ρ*_Σ and Eisenstein series checks

pub mod error;
pub mod cinf;
pub mod ffbase;
pub mod goss;
pub mod modular;
pub mod tame;
pub mod zeta;

pub use error::{Error, Result};
pub use ffbase::{Elem, Field, KRat, MPoly, Mono, SemiChar, ThetaPoly};
