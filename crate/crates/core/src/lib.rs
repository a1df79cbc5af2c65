//! Exact probabilities and point-count distributions for tennis scoring
//! systems and best-of alternatives, with efficiency functionals and a
//! seeded Monte-Carlo simulator.

pub mod bestof;
pub mod cli;
pub mod dist;
pub mod efficiency;
pub mod error;
pub mod exact;
pub mod game;
pub mod matchplay;
pub mod output;
pub mod prob;
pub mod set;
pub mod sim;
pub mod system;

pub use error::{Error, Result};
pub use prob::{ServePair, ServeProb};
pub use system::{Params, SystemSpec};
