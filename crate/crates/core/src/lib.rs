//! Fractional differentiation of real-analytic functions through a lifted,
//! commutative shift operator.
//!
//! A Taylor jet is lifted to a coefficient sequence ([`coeffseq`]), embedded
//! in the lifted space ([`lifted`]) where the order-`k` operator is a pure
//! shift, and projected back through `1/Γ`. The result agrees term for term
//! with the Riemann-Liouville differintegral ([`rl`]) while the shifts still
//! compose when the Riemann-Liouville semigroup law fails. [`oracle`] checks
//! the power rule against the integral definition numerically.

pub mod cli;
pub mod coeffseq;
pub mod gamma;
pub mod lifted;
pub mod oracle;
pub mod parser;
pub mod rl;
pub mod series;
pub mod verify;

pub use coeffseq::CoeffSeq;
pub use lifted::LiftedSeq;
pub use series::{GenSeries, Term};
