//! Observable measures of quantum correlations for a qubit paired with a
//! `d`-level system.
//!
//! * [`tensor`]: Kronecker products, partial traces, operator bases and
//!   expectations of copy permutations.
//! * [`states`]: validated density matrices, random states, Bloch
//!   decomposition, one-clean-qubit outputs and the JSON state format.
//! * [`correlations`]: geometric discord, its observable lower bound `Q` and
//!   the squared negativity.
//! * [`measurement`]: `Q` from multi-copy trace functionals or from seven
//!   local projector probabilities, exactly or with shot noise.
//!
//! ```
//! use qcmeasure::correlations::correlation_report;
//! use qcmeasure::states::random_state;
//!
//! # fn main() -> qcmeasure::error::Result<()> {
//! let r = correlation_report(&random_state(2, 4, 1)?);
//! assert!(r.negativity_sq <= r.q && r.q <= r.d_g && r.d_g <= r.d_g_upper);
//! # Ok(())
//! # }
//! ```

pub mod correlations;
pub mod error;
pub mod measurement;
pub mod states;
pub mod tensor;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    mod correlations {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/projectors.md")]
    mod projectors {}
    #[doc = include_str!("../../../book/src/dqc1.md")]
    mod dqc1 {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
