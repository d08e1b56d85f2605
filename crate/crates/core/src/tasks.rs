//! Consistency, independence and guarantee checks for normative systems.
//!
//! Every task is reduced to one satisfiability question, answered by the
//! pipeline formula -> knowledge base -> DL-clauses -> hypertableau.

use std::fmt;

use thiserror::Error;

use crate::alc::{build_kb, KnowledgeBase};
use crate::dlclauses::{clausify, ClauseSet};
use crate::hypertableau::{Model, SolveError, SolveStats, Solver, Trace, Verdict, DEFAULT_BUDGET};
use crate::sdl::{negate, Formula, NormativeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Consistent,
    Inconsistent,
    Independent,
    NotIndependent,
    Guaranteed,
    NotGuaranteed,
}

impl Outcome {
    /// The affirmative answer of each task.
    pub fn is_positive(self) -> bool {
        matches!(
            self,
            Outcome::Consistent | Outcome::Independent | Outcome::Guaranteed
        )
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Consistent => "CONSISTENT",
            Outcome::Inconsistent => "INCONSISTENT",
            Outcome::Independent => "INDEPENDENT",
            Outcome::NotIndependent => "NOT_INDEPENDENT",
            Outcome::Guaranteed => "GUARANTEED",
            Outcome::NotGuaranteed => "NOT_GUARANTEED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Model(Model),
    Refutation(Trace),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskResult {
    pub outcome: Outcome,
    pub witness: Witness,
    /// The clause set that was decided.
    pub clauses: ClauseSet,
    pub stats: SolveStats,
}

impl TaskResult {
    pub fn model(&self) -> Option<&Model> {
        match &self.witness {
            Witness::Model(m) => Some(m),
            Witness::Refutation(_) => None,
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match &self.witness {
            Witness::Refutation(t) => Some(t),
            Witness::Model(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("line {index} is out of range for a system of {len} formulae")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reasoner {
    pub budget: u64,
    pub reverse_branches: bool,
}

impl Default for Reasoner {
    fn default() -> Self {
        Reasoner {
            budget: DEFAULT_BUDGET,
            reverse_branches: false,
        }
    }
}

impl Reasoner {
    pub fn with_budget(budget: u64) -> Self {
        Reasoner {
            budget,
            ..Reasoner::default()
        }
    }

    /// Satisfiability of `kb`; `sat` / `unsat` name the resulting outcome.
    pub fn decide(
        &self,
        kb: &KnowledgeBase,
        sat: Outcome,
        unsat: Outcome,
    ) -> Result<TaskResult, TaskError> {
        let clauses = clausify(kb);
        let mut solver = Solver::new(&clauses)
            .with_budget(self.budget)
            .reverse_branches(self.reverse_branches)
            .record_trace(true);
        let verdict = solver.solve()?;
        let stats = solver.stats();
        let (outcome, witness) = match verdict {
            Verdict::Sat(m) => (sat, Witness::Model(m)),
            Verdict::Unsat => (unsat, Witness::Refutation(solver.take_trace())),
        };
        Ok(TaskResult {
            outcome,
            witness,
            clauses,
            stats,
        })
    }

    pub fn consistency(&self, n: &NormativeSystem) -> Result<TaskResult, TaskError> {
        self.decide(
            &consistency_kb(n),
            Outcome::Consistent,
            Outcome::Inconsistent,
        )
    }

    pub fn independence(&self, n: &NormativeSystem, index: usize) -> Result<TaskResult, TaskError> {
        let kb = independence_kb(n, index)?;
        self.decide(&kb, Outcome::Independent, Outcome::NotIndependent)
    }

    pub fn guarantee(
        &self,
        n: &NormativeSystem,
        assumption: &Formula,
        goal: &Formula,
    ) -> Result<TaskResult, TaskError> {
        self.decide(
            &guarantee_kb(n, assumption, goal),
            Outcome::NotGuaranteed,
            Outcome::Guaranteed,
        )
    }
}

pub fn consistency_kb(n: &NormativeSystem) -> KnowledgeBase {
    build_kb(n, &[])
}

/// The system without formula `index` (1-based), plus that formula's negation.
pub fn independence_kb(n: &NormativeSystem, index: usize) -> Result<KnowledgeBase, TaskError> {
    let rest = n.without(index).ok_or(TaskError::IndexOutOfRange {
        index,
        len: n.len(),
    })?;
    let removed = &n.formulae[index - 1];
    Ok(build_kb(&rest, &[negate(removed)]))
}

/// The system with `assumption` and a reachable world violating `goal`.
pub fn guarantee_kb(n: &NormativeSystem, assumption: &Formula, goal: &Formula) -> KnowledgeBase {
    build_kb(n, &[assumption.clone(), Formula::dia(negate(goal))])
}

pub fn check_consistency(n: &NormativeSystem) -> Result<TaskResult, TaskError> {
    Reasoner::default().consistency(n)
}

pub fn check_independence(n: &NormativeSystem, index: usize) -> Result<TaskResult, TaskError> {
    Reasoner::default().independence(n, index)
}

pub fn check_guarantee(
    n: &NormativeSystem,
    assumption: &Formula,
    goal: &Formula,
) -> Result<TaskResult, TaskError> {
    Reasoner::default().guarantee(n, assumption, goal)
}
