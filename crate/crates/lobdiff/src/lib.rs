//! Semi-Markov mid-price modeling for limit order books.
//!
//! The crate estimates an n-state Markov-renewal model of mid-price changes
//! from Level-1 order book data, evaluates the diffusion-limit coefficients
//! of the rescaled price process in closed form, and verifies them with a
//! built-in path simulator and regression harness.
//!
//! Pipeline, end to end:
//!
//! 1. [`ingest`] parses a LOBSTER message/orderbook file pair into events and
//!    quotes and trims the session edges.
//! 2. [`events`] derives the primitive sequences: mid-price jumps with
//!    sojourn times, queue-event chains, spread statistics, and order-flow
//!    intensities.
//! 3. [`chain`] bins jumps into states and estimates the transition matrix,
//!    stationary distribution, and conditional sojourn means.
//! 4. [`diffusion`] evaluates the limit coefficients sigma*/sqrt(tau*) and
//!    sigma*/sqrt(m_tau) from the fitted model.
//! 5. [`simulate`] generates Markov-renewal paths and checks the functional
//!    CLT predictions by Monte Carlo.
//! 6. [`contlarrad`] and [`stats`] provide the price-up probability surface,
//!    realized volatility, and the regression harness used for validation.

pub mod chain;
pub mod contlarrad;
pub mod diffusion;
mod error;
pub mod events;
pub mod ingest;
pub(crate) mod linalg;
pub(crate) mod math;
pub(crate) mod quad;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
