//! Dynamic-consistency checking for conditional simple temporal networks.
//!
//! A conditional simple temporal network (CSTN) schedules events under
//! binary difference constraints where both events and constraints carry
//! conjunctive labels over boolean propositions; each proposition's value is
//! revealed when its observation event executes. *Dynamic consistency* asks
//! for an execution strategy that satisfies every constraint in every
//! scenario while reacting only to observations already made.
//!
//! The decision procedure expands the network into one STN copy per
//! scenario, ties the copies together with disjunctive reaction constraints
//! parameterized by a rational reaction bound, and decides consistency of
//! the resulting hyper temporal network by computing the least energy
//! progress measure of a two-player game. Finite energies double as a
//! feasible schedule, so positive verdicts come with a strategy that is
//! re-verified before being returned.
//!
//! ```
//! use cstn::format::parse_cstn;
//! use cstn::dc::{check_dc, verify_strategy, dc_epsilon};
//!
//! let g = parse_cstn("\
//! props p
//! node Op observes p
//! node B
//! constraint B - Op <= 5
//! constraint Op - B <= 0
//! ").unwrap();
//! let report = check_dc(&g).unwrap();
//! assert!(report.is_positive());
//! let sigma = report.strategy.unwrap();
//! let eps = dc_epsilon(&g).unwrap();
//! assert!(verify_strategy(&g, &sigma, Some(&eps)).unwrap().all_ok());
//! ```
//!
//! The `examples/` directory walks through each capability: checking,
//! reaction-bound analysis, strategy verification, generators, rounding,
//! game internals, simulation and export. The `cstn` binary exposes the
//! same operations as subcommands.

pub mod cli;
pub mod dc;
pub mod dot;
pub mod format;
pub mod generators;
pub mod hytn;
pub mod label;
pub mod mpg;
pub mod network;
pub mod rational;
pub mod report;
pub mod scenario;
pub mod simulate;
pub mod stn;

pub use dc::{
    check_dc, check_edc, construct_h_epsilon, dc_epsilon, estimate_epsilon_hat, round_schedule,
    verify_strategy, DcReport, DcVerdict, EpsilonHatEstimate, ExecutionStrategy, SolveError,
    VerifyReport,
};
pub use hytn::{Hytn, Hyperarc, HytnSchedule};
pub use label::{Label, Literal};
pub use mpg::{check_hytn_consistency, hytn_to_mpg, solve_energy, Energy, HytnVerdict, Mpg, Owner};
pub use network::{Cstn, CstnNode, LabeledConstraint, Violation};
pub use rational::EpsilonRational;
pub use scenario::Scenario;
pub use stn::Stn;
