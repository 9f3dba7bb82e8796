//! Group decision support: weighted-sum scoring of alternatives against a
//! criteria set, and aggregation of decision makers' ranked ballots with the
//! Borda count and Condorcet pairwise majority.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: alternatives, criteria, evaluation matrices and their file
//!   formats.
//! * [`scoring`]: min-max normalization, weighted sums, score-to-ranking.
//! * [`voting`]: profiles, Borda points, pairwise matrices, Condorcet winner
//!   and Copeland completion.
//! * [`session`]: the `setup → balloting → results → closed` workflow.
//! * [`store`] and [`service`]: persistence and serialized per-session
//!   commands.
//! * [`http`]: the JSON API served by `consilium serve`.
//! * [`demo`] and [`cli`]: the ISA walkthrough and the command line.
//!
//! ```
//! use consilium::ranking::Ranking;
//! use consilium::voting::{borda_result, condorcet_result, Ballot, Profile};
//!
//! let profile = Profile::new(
//!     ["A", "B", "C"],
//!     vec![
//!         Ballot::new("ana", Ranking::new(["A", "B", "C"])),
//!         Ballot::new("bo", Ranking::new(["B", "A", "C"])),
//!         Ballot::new("cy", Ranking::new(["B", "C", "A"])),
//!     ],
//! )
//! .unwrap();
//! assert_eq!(borda_result(&profile).ranking.top(), Some("B"));
//! assert_eq!(condorcet_result(&profile).condorcet_winner.as_deref(), Some("B"));
//! ```

pub mod cli;
pub mod demo;
pub mod http;
pub mod model;
pub mod ranking;
pub mod scores;
pub mod scoring;
pub mod service;
pub mod session;
pub mod store;
pub mod voting;

pub use model::{Alternative, Criterion, Direction, EvaluationMatrix};
pub use ranking::Ranking;
pub use scoring::{ScoreReport, ScoreVector};
pub use session::{Phase, Session};
pub use voting::{Ballot, Method, PairwiseMatrix, Profile, VoteResult};
