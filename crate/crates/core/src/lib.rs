//! Numerical core for large-deviation bounds and sphere-ensemble Monte Carlo
//! of Curie–Weiss style quantum Ising models.
//!
//! The crate is `no_std` (with `alloc`). Everything that touches files,
//! threads or the command line lives in the `squimld` companion crate.
//!
//! * [`ge`]: the scaled cumulant generating function `c(θ₁, θ₂)`, its
//!   gradient, the Legendre value `k`, the domain `D` and the `Q` root.
//! * [`rate`]: biased sampling of `D`, the rate functions `I₁`, `I₂` and the
//!   four-case asymptotic classifier.
//! * [`wfe`]: critical temperature of the wavefunction-energy model.
//! * [`ensemble`]: wavefunctions on the unit sphere and their observables.
//! * [`mc`]: ratio estimators for thermal averages, the infinite-temperature
//!   oracle and the exactly solvable sphere model.
//! * [`lemmas`]: numerical checks of two integral identities used in proofs.
//!
//! Monte Carlo work is cut into a fixed number of shards, each driven by its
//! own counter-based random stream, so results do not depend on how shards
//! are scheduled. See [`exec`].

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ensemble;
pub mod error;
pub mod exec;
pub mod ge;
pub mod interp;
pub mod lemmas;
pub mod mc;
pub mod optim;
pub mod quad;
pub mod rate;
pub mod wfe;

pub use error::{Error, Result};
