//! Odd-Cycle and CHSH nonlocal games: classical and quantum values,
//! parallel repetition, torus blockers, consistent regions and the
//! Monte Carlo estimators built on top of them.

pub mod error;
pub mod experiment;
pub mod game;
pub mod pearls;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod torus;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/games.md")]
    pub struct Games;
    #[doc = include_str!("../../../book/src/quantum.md")]
    pub struct Quantum;
    #[doc = include_str!("../../../book/src/torus.md")]
    pub struct Torus;
    #[doc = include_str!("../../../book/src/pearls.md")]
    pub struct Pearls;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
