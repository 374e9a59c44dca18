//! Exact bias, derivative and rank computations for polynomials over small
//! prime fields.
//!
//! The crate evaluates polynomials `F_p^n -> F_p` exhaustively and exposes
//! the structural machinery around biased polynomials:
//!
//! - [`poly`]: canonical reduced polynomials, tables, and the text formats.
//! - [`derivative`]: directional and iterated derivatives, cube sums and the
//!   derivative-bias of `d`-fold derivatives.
//! - [`spectral`]: exact bias, character spectra and sampled estimates.
//! - [`factor`]: factors, regions, refinement and strong-regularity search.
//! - [`reductions`]: majority-vote approximators, Fourier peeling, the
//!   derivative-restricted rank oracle and computation certificates.
//! - [`tester`]: the low-degree plus bias concise-representation tester.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod budget;
pub mod cli;
pub mod derivative;
pub mod error;
pub mod factor;
pub mod field;
pub mod poly;
pub mod reductions;
pub mod space;
pub mod spectral;
pub mod tester;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec, Matrix};
pub use poly::{parse_polynomial, FunctionTable, Point, Polynomial};
