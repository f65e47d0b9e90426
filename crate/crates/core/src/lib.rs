//! Operator-valued price processes for a stock quoted with a bid-offer
//! spread: symbolic derivation of the process coefficients, Gaussian and
//! spread-jump terminal laws, and martingale pricing.

pub mod algebra;
pub mod error;
pub mod gaussian;
pub mod market;
pub mod pricer;
pub mod spread;
pub mod validate;

pub use error::{ModelError, Result};
pub use gaussian::GaussianModelParams;
pub use market::{MarketState, WavepacketParams};
pub use pricer::{Payoff, PriceReport, Verdict};
pub use spread::{LatticeDistribution, SpreadParams, TerminalLaw};
