//! Reasoning about normative systems written in standard deontic logic.
//!
//! Formulae are translated into an ALC knowledge base, clausified into
//! DL-clauses, and decided by a hypertableau procedure. A brute-force Kripke
//! model search ([`oracle`]) is kept alongside as an independent reference.

pub mod alc;
pub mod cli;
pub mod dlclauses;
pub mod hypertableau;
pub mod oracle;
pub mod sdl;
pub mod tasks;

pub use alc::{build_kb, nnf, phi, phi_inverse, Concept, KnowledgeBase};
pub use dlclauses::{clause_stats, clausify, ClauseSet, DLClause};
pub use hypertableau::{check_model, explain_unsat, solve, Model, Solver, Verdict};
pub use sdl::{negate, parse_formula, parse_system, print_formula, Formula, NormativeSystem};
pub use tasks::{check_consistency, check_guarantee, check_independence, Outcome, TaskResult};
