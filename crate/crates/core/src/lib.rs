//! Event structures with circular causality, the contract games played on
//! them, and the Horn fragment of propositional contract logic.
//!
//! ```
//! use ces_pcl::{dsl, game, model::ParticipantId};
//!
//! let spec = dsl::parse(
//!     "agent A owns a\nagent B owns b\nclause b <- a\nclause a <<- b\n\
//!      payoff A goal {b}\npayoff B goal {a}\n",
//! )
//! .unwrap();
//! assert!(game::agreement(&spec).unwrap());
//! let run = game::simulate_synthesized(&spec, 0).unwrap();
//! assert_eq!(run.play.to_string(), "a b");
//! assert_eq!(run.verdict.participants[&ParticipantId::new("A")].wins, Some(true));
//! ```

pub mod dsl;
pub mod error;
pub mod game;
mod index;
pub mod logic;
pub mod model;
pub mod oracle;

pub use error::Error;
pub use game::{Game, GameVerdict};
pub use logic::{HornTheory, Trace};
pub use model::{Clause, ClauseKind, ContractSpec, EventId, EventSet, ParticipantId, Payoff, Play};
