//! Polarity coincidence correlation (PCC) toolkit.
//!
//! Estimates correlation from sign agreements alone: for zero-mean Gaussian
//! pairs, `r = sin(pi/2 * E{sgn(x) sgn(y)})`, so counting polarity
//! coincidences and applying a sine map recovers the correlation
//! coefficient — a one-bit estimator that is cheap (XOR + popcount) and
//! robust to heavy-tailed contamination.
//!
//! The crate covers:
//! - [`signs`]: sign extraction and bit-packed sequences with popcount
//!   agreement kernels;
//! - [`estimator`]: the sine-mapped pairwise estimates and full correlation
//!   matrices, real and complex, plus the classical sample-correlation
//!   baseline;
//! - [`psd`]: eigenvalue-based positive-semidefiniteness checks, the 3x3
//!   validity range, attainable sign-correlation ranges, and the exact
//!   identities connecting them;
//! - [`enumeration`]: exhaustive verification over all sign configurations
//!   for small (p, N), plus the canonical non-PSD counterexamples and their
//!   dimension-raising augmentation;
//! - [`sampling`]: deterministic counter-based Gaussian samplers and
//!   Monte Carlo validation of the arcsine relations;
//! - [`cli`]: the `pcc` command-line front end.
//!
//! Estimated matrices of more than three real channels (two complex) can
//! fail to be positive semidefinite even though every pairwise entry is a
//! valid correlation; the [`psd`] and [`enumeration`] modules exist to
//! check, exhibit, and delimit exactly that behavior.
//!
//! # Example
//!
//! ```
//! use pcc::estimator::pcc_matrix_real;
//! use pcc::psd::check_psd;
//! use pcc::signs::SignSequence;
//!
//! # fn main() -> pcc::Result<()> {
//! let x = SignSequence::from_pattern("++-+-+")?;
//! let y = SignSequence::from_pattern("+--+-+")?;
//! let m = pcc_matrix_real(&[x, y])?;
//! let report = check_psd(&m, 1e-9)?;
//! assert!(report.is_psd, "two channels always give a valid correlation matrix");
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod enumeration;
pub mod error;
pub mod estimator;
pub mod psd;
pub mod sampling;
pub mod signs;

pub use error::{Error, Result};
