//! Sanctioning reputation mechanism: the stage game, closed-form equilibrium
//! bounds, repeated-game simulation with pluggable reputation back-ends,
//! reputation building under incomplete information, and an outer
//! approximation of the perfect public equilibrium payoff set.

pub mod belief;
pub mod bounds;
pub mod error;
pub mod game;
pub mod parallel;
pub mod params;
pub mod ppe;
pub mod registry;
pub mod report;
pub mod reproduce;
pub mod sim;
pub mod tree;

pub use error::{Error, Result};
pub use game::{ClientStrategy, MixedStrategy, Outcome, PayoffPair, ProviderStrategy, PureStrategy};
pub use params::MarketParams;
