//! Arbitrage-free price bounds for European claims on several assets in a
//! multinomial lattice market.

pub mod error;
pub mod linprog;
pub mod market;
pub mod measures;
pub mod payoffs;
pub mod pricer;
pub mod supermodular;

pub use error::{Error, Result};
pub use market::{Asset, Column, MarketParams, MarketSpec, NodeId, Scenario};
pub use measures::Measure;
pub use payoffs::{Certificate, Payoff};
pub use pricer::{Bound, BoundsSurface, InductionOptions, PriceInterval};
pub use supermodular::{FibreWitness, SetFunction};
