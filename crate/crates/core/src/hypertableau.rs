//! Hypertableau satisfiability for DL-clause sets.
//!
//! A branch is saturated by three rules, tried in this order on every step:
//!
//! 1. *Hyp*: the first clause (in clause order) with a substitution that
//!    maps its body into the branch and leaves every head atom underived.
//!    An empty head closes the branch, a single atom is added, and several
//!    atoms split the branch, one alternative per head atom.
//! 2. *Exists*: the first derived `exists r.b(s)` with no `r`-successor of
//!    `s` carrying `b` (or `!b`) gets a fresh successor, unless `s` is
//!    blocked.
//! 3. Nothing applies: the branch is open and yields a model.
//!
//! A fresh individual is blocked by its closest ancestor whose label
//! contains its own; descendants of blocked individuals are never expanded.
//! Closed branches backtrack chronologically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::alc::Role;
use crate::dlclauses::{ClauseAtom, ClauseSet, DLClause, Term, TOP};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("step budget of {0} rule applications exhausted")]
    BudgetExhausted(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("clause set is satisfiable; there is no refutation to explain")]
pub struct NotUnsat;

/// Existential atom `exists role.filler` (negated filler when `positive` is false).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Demand {
    pub role: Role,
    pub filler: String,
    pub positive: bool,
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = if self.positive { "" } else { "!" };
        write!(f, "exists {}.{neg}{}", self.role, self.filler)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Named(String),
    Fresh { parent: usize, demand: Demand },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub id: usize,
    pub origin: Origin,
}

impl Individual {
    pub fn parent(&self) -> Option<usize> {
        match &self.origin {
            Origin::Named(_) => None,
            Origin::Fresh { parent, .. } => Some(*parent),
        }
    }
}

/// Unary facts about one individual. Blocking compares whole labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Label {
    pos: BTreeSet<String>,
    neg: BTreeSet<String>,
    demands: BTreeSet<Demand>,
}

impl Label {
    fn is_subset(&self, other: &Label) -> bool {
        self.pos.is_subset(&other.pos)
            && self.neg.is_subset(&other.neg)
            && self.demands.is_subset(&other.demands)
    }
}

/// One branch of the hypertableau.
#[derive(Debug, Clone, Default)]
pub struct TableauState {
    individuals: Vec<Individual>,
    labels: Vec<Label>,
    succ: Vec<Vec<(Role, usize)>>,
    names: BTreeMap<String, usize>,
}

enum Added {
    New,
    Present,
    Clash(String),
}

impl TableauState {
    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn name(&self, id: usize) -> String {
        match &self.individuals[id].origin {
            Origin::Named(n) => n.clone(),
            Origin::Fresh { .. } => format!("n{id}"),
        }
    }

    /// Positive concept names asserted for `id`.
    pub fn concepts(&self, id: usize) -> &BTreeSet<String> {
        &self.labels[id].pos
    }

    fn push_individual(&mut self, origin: Origin) -> usize {
        let id = self.individuals.len();
        if let Origin::Named(n) = &origin {
            self.names.insert(n.clone(), id);
        }
        self.individuals.push(Individual { id, origin });
        self.labels.push(Label::default());
        self.succ.push(Vec::new());
        id
    }

    fn named(&mut self, name: &str) -> usize {
        match self.names.get(name) {
            Some(&id) => id,
            None => self.push_individual(Origin::Named(name.to_string())),
        }
    }

    fn has_concept(&self, name: &str, id: usize) -> bool {
        name == TOP || self.labels[id].pos.contains(name)
    }

    fn add_concept(&mut self, name: &str, id: usize) -> Added {
        if name == TOP || self.labels[id].pos.contains(name) {
            return Added::Present;
        }
        if self.labels[id].neg.contains(name) {
            return Added::Clash(format!("{name}({0}) and !{name}({0})", self.name(id)));
        }
        self.labels[id].pos.insert(name.to_string());
        Added::New
    }

    fn add_negative(&mut self, name: &str, id: usize) -> Added {
        if name == TOP {
            return Added::Clash(format!("!top({})", self.name(id)));
        }
        if self.labels[id].pos.contains(name) {
            return Added::Clash(format!("{name}({0}) and !{name}({0})", self.name(id)));
        }
        self.labels[id].neg.insert(name.to_string());
        Added::New
    }

    fn add_edge(&mut self, role: &Role, from: usize, to: usize) {
        if !self.succ[from].iter().any(|(r, t)| r == role && *t == to) {
            self.succ[from].push((role.clone(), to));
        }
    }

    fn successors<'a>(&'a self, role: &'a Role, id: usize) -> impl Iterator<Item = usize> + 'a {
        self.succ[id]
            .iter()
            .filter(move |(r, _)| r == role)
            .map(|(_, t)| *t)
    }

    fn demand_met(&self, d: &Demand, id: usize) -> bool {
        self.successors(&d.role, id).any(|t| {
            if d.filler == TOP {
                d.positive
            } else if d.positive {
                self.labels[t].pos.contains(&d.filler)
            } else {
                self.labels[t].neg.contains(&d.filler)
            }
        })
    }

    fn ancestors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.individuals[id].parent(), move |&a| {
            self.individuals[a].parent()
        })
    }

    /// Closest strict ancestor whose label contains the label of `id`.
    pub fn direct_blocker(&self, id: usize) -> Option<usize> {
        self.individuals[id].parent()?;
        let label = &self.labels[id];
        self.ancestors(id)
            .find(|&a| label.is_subset(&self.labels[a]))
    }

    /// Blocked directly or through a blocked ancestor.
    pub fn is_blocked(&self, id: usize) -> bool {
        self.direct_blocker(id).is_some()
            || self.ancestors(id).any(|a| self.direct_blocker(a).is_some())
    }

    fn excluded(&self, id: usize) -> bool {
        self.ancestors(id).any(|a| self.direct_blocker(a).is_some())
    }

    fn render(&self, atom: &ClauseAtom, x: usize, y: Option<usize>) -> String {
        let term = |t: &Term| match t {
            Term::X => self.name(x),
            Term::Y => self.name(y.expect("y bound")),
            Term::Ind(a) => a.clone(),
        };
        match atom {
            ClauseAtom::Concept(b, t) => format!("{b}({})", term(t)),
            ClauseAtom::Role(r, s, t) => format!("{r}({},{})", term(s), term(t)),
            ClauseAtom::Exists {
                role,
                filler,
                positive,
                term: t,
            } => {
                let neg = if *positive { "" } else { "!" };
                format!("exists {role}.{neg}{filler}({})", term(t))
            }
        }
    }
}

/// A finite model. Blocked individuals reach their blocker's successors
/// through `loop_backs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub names: Vec<String>,
    pub labels: Vec<BTreeSet<String>>,
    pub edges: Vec<(Role, usize, usize)>,
    pub loop_backs: Vec<(Role, usize, usize)>,
    /// `(blocked, blocker)` pairs, as model indices.
    pub blocked: Vec<(usize, usize)>,
}

impl Model {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn successors<'a>(&'a self, role: &'a Role, i: usize) -> impl Iterator<Item = usize> + 'a {
        self.edges
            .iter()
            .chain(self.loop_backs.iter())
            .filter(move |(r, s, _)| r == role && *s == i)
            .map(|(_, _, t)| *t)
    }

    /// Every individual has at least one successor over `role`.
    pub fn is_serial(&self, role: &Role) -> bool {
        (0..self.len()).all(|i| self.successors(role, i).next().is_some())
    }

    /// Replaces every loop-back edge `s -> u` by an edge to a fresh copy of
    /// `u` that has the same label and the same outgoing edges.
    pub fn unravel_once(&self) -> Model {
        let mut out = self.clone();
        out.loop_backs.clear();
        for (role, s, u) in &self.loop_backs {
            let copy = out.names.len();
            out.names.push(format!("{}'", self.names[*u]));
            out.labels.push(self.labels[*u].clone());
            for (r, from, to) in self.edges.iter() {
                if from == u {
                    out.edges.push((r.clone(), copy, *to));
                }
            }
            for (r, from, to) in self.loop_backs.iter() {
                if from == u {
                    out.loop_backs.push((r.clone(), copy, *to));
                }
            }
            out.edges.push((role.clone(), *s, copy));
        }
        out
    }

    fn holds_unary(&self, atom: &ClauseAtom, i: usize) -> bool {
        match atom {
            ClauseAtom::Concept(b, _) => b == TOP || self.labels[i].contains(b),
            ClauseAtom::Exists {
                role,
                filler,
                positive,
                ..
            } => self.successors(role, i).any(|t| {
                let has = filler == TOP || self.labels[t].contains(filler);
                has == *positive
            }),
            ClauseAtom::Role(..) => unreachable!("binary atom"),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, name) in self.names.iter().enumerate() {
            let label: Vec<&str> = self.labels[i].iter().map(String::as_str).collect();
            write!(f, "{name}: {{{}}}", label.join(", "))?;
            if let Some((_, b)) = self.blocked.iter().find(|(s, _)| *s == i) {
                write!(f, " blocked by {}", self.names[*b])?;
            }
            writeln!(f)?;
        }
        for (r, s, t) in &self.edges {
            writeln!(f, "{r}({},{})", self.names[*s], self.names[*t])?;
        }
        for (r, s, t) in &self.loop_backs {
            writeln!(f, "{r}({},{}) loop-back", self.names[*s], self.names[*t])?;
        }
        Ok(())
    }
}

fn model_of(t: &TableauState) -> Model {
    let ids: Vec<usize> = (0..t.individuals.len())
        .filter(|&i| !t.excluded(i))
        .collect();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut m = Model {
        names: ids.iter().map(|&i| t.name(i)).collect(),
        labels: ids.iter().map(|&i| t.labels[i].pos.clone()).collect(),
        edges: Vec::new(),
        loop_backs: Vec::new(),
        blocked: Vec::new(),
    };
    for &i in &ids {
        match t.direct_blocker(i) {
            Some(b) => {
                m.blocked.push((index[&i], index[&b]));
                for (r, u) in &t.succ[b] {
                    m.loop_backs.push((r.clone(), index[&i], index[u]));
                }
            }
            None => {
                for (r, u) in &t.succ[i] {
                    m.edges.push((r.clone(), index[&i], index[u]));
                }
            }
        }
    }
    m
}

/// True iff every fact holds in `model` and every clause is satisfied
/// under every substitution of model individuals.
pub fn check_model(cs: &ClauseSet, model: &Model) -> bool {
    let facts_ok = cs.facts.iter().all(|fact| match fact {
        ClauseAtom::Role(r, Term::Ind(a), Term::Ind(b)) => {
            match (model.index_of(a), model.index_of(b)) {
                (Some(i), Some(j)) => model.successors(r, i).any(|t| t == j),
                _ => false,
            }
        }
        ClauseAtom::Concept(_, Term::Ind(a))
        | ClauseAtom::Exists {
            term: Term::Ind(a), ..
        } => model
            .index_of(a)
            .is_some_and(|i| model.holds_unary(fact, i)),
        _ => false,
    });
    facts_ok && cs.clauses.iter().all(|c| clause_holds(c, model))
}

fn clause_holds(c: &DLClause, model: &Model) -> bool {
    let at = |t: &Term, x: usize, y: Option<usize>| match t {
        Term::Y => y.expect("y bound"),
        _ => x,
    };
    let holds = |a: &ClauseAtom, x: usize, y: Option<usize>| match a {
        ClauseAtom::Role(..) => true,
        ClauseAtom::Concept(_, t) | ClauseAtom::Exists { term: t, .. } => {
            model.holds_unary(a, at(t, x, y))
        }
    };
    (0..model.len()).all(|x| {
        let ys: Vec<Option<usize>> = match c.role_atom() {
            Some(r) => model.successors(r, x).map(Some).collect(),
            None => vec![None],
        };
        ys.into_iter().all(|y| {
            !c.body.iter().all(|a| holds(a, x, y)) || c.head.iter().any(|a| holds(a, x, y))
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Unsat,
    Sat(Model),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Fact {
        atom: String,
    },
    Derive {
        step: u64,
        clause: usize,
        subst: Vec<(char, String)>,
        atom: String,
    },
    Branch {
        step: u64,
        clause: usize,
        subst: Vec<(char, String)>,
        choice: usize,
        of: usize,
        atom: String,
    },
    Expand {
        step: u64,
        demand: Demand,
        parent: String,
        fresh: String,
    },
    Clash {
        step: u64,
        clause: Option<usize>,
        subst: Vec<(char, String)>,
        reason: String,
    },
    Backtrack {
        step: u64,
    },
    Closed,
}

fn write_subst(f: &mut fmt::Formatter<'_>, subst: &[(char, String)]) -> fmt::Result {
    let parts: Vec<String> = subst.iter().map(|(v, a)| format!("{v}↦{a}")).collect();
    write!(f, "{{{}}}", parts.join(","))
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Fact { atom } => write!(f, "[fact] {atom}"),
            TraceEvent::Derive {
                step,
                clause,
                subst,
                atom,
            } => {
                write!(f, "[step {step}] clause #{clause}, subst ")?;
                write_subst(f, subst)?;
                write!(f, " ⊢ derived {atom}")
            }
            TraceEvent::Branch {
                step,
                clause,
                subst,
                choice,
                of,
                atom,
            } => {
                write!(f, "[step {step}] clause #{clause}, subst ")?;
                write_subst(f, subst)?;
                write!(f, " ⊢ branch {choice}/{of}: {atom}")
            }
            TraceEvent::Expand {
                step,
                demand,
                parent,
                fresh,
            } => write!(
                f,
                "[step {step}] {demand}({parent}) ⊢ derived {}({parent},{fresh})",
                demand.role
            ),
            TraceEvent::Clash {
                step,
                clause,
                subst,
                reason,
            } => {
                write!(f, "[step {step}] ")?;
                if let Some(c) = clause {
                    write!(f, "clause #{c}, subst ")?;
                    write_subst(f, subst)?;
                    f.write_str(" ")?;
                }
                write!(f, "⊢ clash: {reason}")
            }
            TraceEvent::Backtrack { step } => {
                write!(f, "[step {step}] all alternatives closed, backtrack")
            }
            TraceEvent::Closed => f.write_str("all branches closed"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace(pub Vec<TraceEvent>);

impl Trace {
    pub fn events(&self) -> &[TraceEvent] {
        &self.0
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.0 {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Rule applications.
    pub steps: u64,
    /// Largest number of individuals on any branch.
    pub individuals: usize,
    pub branches: u64,
}

struct Match {
    clause: usize,
    x: usize,
    y: Option<usize>,
}

pub struct Solver<'a> {
    cs: &'a ClauseSet,
    budget: u64,
    reverse_branches: bool,
    record: bool,
    stats: SolveStats,
    trace: Vec<TraceEvent>,
}

impl<'a> Solver<'a> {
    pub fn new(cs: &'a ClauseSet) -> Self {
        Solver {
            cs,
            budget: DEFAULT_BUDGET,
            reverse_branches: false,
            record: false,
            stats: SolveStats::default(),
            trace: Vec::new(),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Explore head disjuncts right to left.
    pub fn reverse_branches(mut self, yes: bool) -> Self {
        self.reverse_branches = yes;
        self
    }

    pub fn record_trace(mut self, yes: bool) -> Self {
        self.record = yes;
        self
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    pub fn take_trace(&mut self) -> Trace {
        Trace(std::mem::take(&mut self.trace))
    }

    pub fn solve(&mut self) -> Result<Verdict, SolveError> {
        self.stats = SolveStats::default();
        self.trace.clear();
        let Some(state) = self.initial_state() else {
            self.log(TraceEvent::Closed);
            return Ok(Verdict::Unsat);
        };
        match self.saturate(state)? {
            Some(open) => Ok(Verdict::Sat(model_of(&open))),
            None => {
                self.log(TraceEvent::Closed);
                Ok(Verdict::Unsat)
            }
        }
    }

    fn log(&mut self, e: TraceEvent) {
        if self.record {
            self.trace.push(e);
        }
    }

    fn tick(&mut self) -> Result<u64, SolveError> {
        if self.stats.steps >= self.budget {
            return Err(SolveError::BudgetExhausted(self.budget));
        }
        self.stats.steps += 1;
        Ok(self.stats.steps)
    }

    fn initial_state(&mut self) -> Option<TableauState> {
        let mut t = TableauState::default();
        for fact in &self.cs.facts {
            let ok = match fact {
                ClauseAtom::Concept(b, Term::Ind(a)) => {
                    let id = t.named(a);
                    !matches!(t.add_concept(b, id), Added::Clash(_))
                }
                ClauseAtom::Role(r, Term::Ind(a), Term::Ind(b)) => {
                    let (i, j) = (t.named(a), t.named(b));
                    t.add_edge(r, i, j);
                    true
                }
                ClauseAtom::Exists {
                    role,
                    filler,
                    positive,
                    term: Term::Ind(a),
                } => {
                    let id = t.named(a);
                    t.labels[id].demands.insert(Demand {
                        role: role.clone(),
                        filler: filler.clone(),
                        positive: *positive,
                    });
                    true
                }
                // facts are ground by construction
                _ => true,
            };
            self.log(TraceEvent::Fact {
                atom: fact.to_string(),
            });
            if !ok {
                self.log(TraceEvent::Clash {
                    step: 0,
                    clause: None,
                    subst: vec![],
                    reason: format!("fact {fact} contradicts an earlier fact"),
                });
                return None;
            }
        }
        self.stats.individuals = t.individuals.len();
        Some(t)
    }

    fn find_match(&self, t: &TableauState) -> Option<Match> {
        for (ci, clause) in self.cs.clauses.iter().enumerate() {
            let role = clause.role_atom();
            for x in 0..t.individuals.len() {
                let ys: Vec<Option<usize>> = match role {
                    Some(r) => t.successors(r, x).map(Some).collect(),
                    None => vec![None],
                };
                for y in ys {
                    let bind = |term: &Term| match term {
                        Term::Y => y.expect("y bound by r(x,y)"),
                        _ => x,
                    };
                    let body_ok = clause.body.iter().all(|a| match a {
                        ClauseAtom::Concept(b, term) => t.has_concept(b, bind(term)),
                        ClauseAtom::Role(..) => true,
                        ClauseAtom::Exists { .. } => false,
                    });
                    if !body_ok {
                        continue;
                    }
                    let head_met = clause.head.iter().any(|a| match a {
                        ClauseAtom::Concept(b, term) => t.has_concept(b, bind(term)),
                        ClauseAtom::Exists {
                            role,
                            filler,
                            positive,
                            term,
                        } => t.labels[bind(term)].demands.contains(&Demand {
                            role: role.clone(),
                            filler: filler.clone(),
                            positive: *positive,
                        }),
                        ClauseAtom::Role(..) => false,
                    });
                    if !head_met {
                        return Some(Match { clause: ci, x, y });
                    }
                }
            }
        }
        None
    }

    fn apply(t: &mut TableauState, atom: &ClauseAtom, x: usize, y: Option<usize>) -> Added {
        let bind = |term: &Term| match term {
            Term::Y => y.expect("y bound"),
            _ => x,
        };
        match atom {
            ClauseAtom::Concept(b, term) => t.add_concept(b, bind(term)),
            ClauseAtom::Exists {
                role,
                filler,
                positive,
                term,
            } => {
                let id = bind(term);
                let fresh = t.labels[id].demands.insert(Demand {
                    role: role.clone(),
                    filler: filler.clone(),
                    positive: *positive,
                });
                if fresh {
                    Added::New
                } else {
                    Added::Present
                }
            }
            ClauseAtom::Role(..) => unreachable!("role atoms never occur in heads"),
        }
    }

    fn subst(t: &TableauState, m: &Match) -> Vec<(char, String)> {
        let mut s = vec![('x', t.name(m.x))];
        if let Some(y) = m.y {
            s.push(('y', t.name(y)));
        }
        s
    }

    /// Open saturated branch, or `None` when every branch below closes.
    fn saturate(&mut self, mut t: TableauState) -> Result<Option<TableauState>, SolveError> {
        loop {
            if let Some(m) = self.find_match(&t) {
                let clause = &self.cs.clauses[m.clause];
                let step = self.tick()?;
                let subst = if self.record {
                    Self::subst(&t, &m)
                } else {
                    vec![]
                };
                match clause.head.len() {
                    0 => {
                        self.log(TraceEvent::Clash {
                            step,
                            clause: Some(m.clause + 1),
                            subst,
                            reason: "empty head".into(),
                        });
                        return Ok(None);
                    }
                    1 => {
                        let atom = &clause.head[0];
                        if self.record {
                            let rendered = t.render(atom, m.x, m.y);
                            self.log(TraceEvent::Derive {
                                step,
                                clause: m.clause + 1,
                                subst: subst.clone(),
                                atom: rendered,
                            });
                        }
                        if let Added::Clash(reason) = Self::apply(&mut t, atom, m.x, m.y) {
                            self.log(TraceEvent::Clash {
                                step,
                                clause: Some(m.clause + 1),
                                subst,
                                reason,
                            });
                            return Ok(None);
                        }
                    }
                    n => {
                        let mut order: Vec<usize> = (0..n).collect();
                        if self.reverse_branches {
                            order.reverse();
                        }
                        for (k, &h) in order.iter().enumerate() {
                            let atom = &clause.head[h];
                            let step = if k == 0 { step } else { self.tick()? };
                            self.stats.branches += 1;
                            if self.record {
                                let rendered = t.render(atom, m.x, m.y);
                                self.log(TraceEvent::Branch {
                                    step,
                                    clause: m.clause + 1,
                                    subst: subst.clone(),
                                    choice: k + 1,
                                    of: n,
                                    atom: rendered,
                                });
                            }
                            let mut alt = t.clone();
                            match Self::apply(&mut alt, atom, m.x, m.y) {
                                Added::Clash(reason) => self.log(TraceEvent::Clash {
                                    step,
                                    clause: Some(m.clause + 1),
                                    subst: subst.clone(),
                                    reason,
                                }),
                                _ => {
                                    if let Some(open) = self.saturate(alt)? {
                                        return Ok(Some(open));
                                    }
                                }
                            }
                        }
                        let step = self.stats.steps;
                        self.log(TraceEvent::Backtrack { step });
                        return Ok(None);
                    }
                }
                continue;
            }

            if let Some((parent, demand)) = self.find_unmet_demand(&t) {
                let step = self.tick()?;
                let child = t.push_individual(Origin::Fresh {
                    parent,
                    demand: demand.clone(),
                });
                t.add_edge(&demand.role, parent, child);
                let added = if demand.filler == TOP {
                    Added::New
                } else if demand.positive {
                    t.add_concept(&demand.filler, child)
                } else {
                    t.add_negative(&demand.filler, child)
                };
                self.stats.individuals = self.stats.individuals.max(t.individuals.len());
                if self.record {
                    let (p, c) = (t.name(parent), t.name(child));
                    self.log(TraceEvent::Expand {
                        step,
                        demand,
                        parent: p,
                        fresh: c,
                    });
                }
                if let Added::Clash(reason) = added {
                    self.log(TraceEvent::Clash {
                        step,
                        clause: None,
                        subst: vec![],
                        reason,
                    });
                    return Ok(None);
                }
                continue;
            }

            return Ok(Some(t));
        }
    }

    fn find_unmet_demand(&self, t: &TableauState) -> Option<(usize, Demand)> {
        (0..t.individuals.len()).find_map(|i| {
            let unmet = t.labels[i].demands.iter().find(|d| !t.demand_met(d, i))?;
            if t.is_blocked(i) {
                return None;
            }
            Some((i, unmet.clone()))
        })
    }
}

pub fn solve(cs: &ClauseSet) -> Result<Verdict, SolveError> {
    Solver::new(cs).solve()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error(transparent)]
    NotUnsat(#[from] NotUnsat),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Rule applications of a refutation of `cs`, in the order they happened.
pub fn explain_unsat(cs: &ClauseSet) -> Result<Trace, ExplainError> {
    let mut solver = Solver::new(cs).record_trace(true);
    match solver.solve()? {
        Verdict::Unsat => Ok(solver.take_trace()),
        Verdict::Sat(_) => Err(NotUnsat.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(a: &str) -> Term {
        Term::Ind(a.into())
    }

    fn seriality() -> ClauseSet {
        ClauseSet {
            clauses: vec![DLClause::new(
                vec![],
                vec![ClauseAtom::exists(TOP, true, Term::X)],
            )],
            facts: vec![ClauseAtom::concept(TOP, ind("a0"))],
            aux_names: BTreeSet::new(),
        }
    }

    #[test]
    fn seriality_alone_is_satisfiable_with_blocking() {
        let cs = seriality();
        let mut solver = Solver::new(&cs);
        let Verdict::Sat(model) = solver.solve().unwrap() else {
            panic!("expected sat")
        };
        assert!(solver.stats().individuals <= 3);
        assert_eq!(model.len(), 2);
        assert_eq!(model.blocked, vec![(1, 0)]);
        assert_eq!(model.loop_backs, vec![(Role::accessibility(), 1, 1)]);
        assert!(model.is_serial(&Role::accessibility()));
        assert!(check_model(&cs, &model));
    }

    #[test]
    fn immediate_clash() {
        let cs = ClauseSet {
            clauses: vec![DLClause::new(
                vec![ClauseAtom::concept("p", Term::X)],
                vec![],
            )],
            facts: vec![ClauseAtom::concept("p", ind("a0"))],
            aux_names: BTreeSet::new(),
        };
        assert_eq!(solve(&cs).unwrap(), Verdict::Unsat);
        let trace = explain_unsat(&cs).unwrap();
        let steps: Vec<_> = trace
            .events()
            .iter()
            .filter(|e| !matches!(e, TraceEvent::Fact { .. } | TraceEvent::Closed))
            .collect();
        assert_eq!(steps.len(), 1);
        assert_eq!(
            steps[0].to_string(),
            "[step 1] clause #1, subst {x↦a0} ⊢ clash: empty head"
        );
        assert_eq!(trace.events().last(), Some(&TraceEvent::Closed));
    }

    #[test]
    fn explain_rejects_satisfiable_input() {
        assert_eq!(
            explain_unsat(&seriality()),
            Err(ExplainError::NotUnsat(NotUnsat))
        );
    }

    #[test]
    fn check_model_detects_missing_head() {
        let cs = ClauseSet {
            clauses: vec![DLClause::new(
                vec![ClauseAtom::concept("p", Term::X)],
                vec![ClauseAtom::concept("q", Term::X)],
            )],
            facts: vec![ClauseAtom::concept("p", ind("a0"))],
            aux_names: BTreeSet::new(),
        };
        let bad = Model {
            names: vec!["a0".into()],
            labels: vec![["p".to_string()].into_iter().collect()],
            edges: vec![],
            loop_backs: vec![],
            blocked: vec![],
        };
        assert!(!check_model(&cs, &bad));
        let Verdict::Sat(good) = solve(&cs).unwrap() else {
            panic!()
        };
        assert!(good.labels[0].contains("q"));
        assert!(check_model(&cs, &good));
    }

    #[test]
    fn branching_explores_alternatives() {
        // -> a(x) | b(x);  a(x) -> bot
        let cs = ClauseSet {
            clauses: vec![
                DLClause::new(
                    vec![],
                    vec![
                        ClauseAtom::concept("a", Term::X),
                        ClauseAtom::concept("b", Term::X),
                    ],
                ),
                DLClause::new(vec![ClauseAtom::concept("a", Term::X)], vec![]),
            ],
            facts: vec![ClauseAtom::concept(TOP, ind("a0"))],
            aux_names: BTreeSet::new(),
        };
        for rev in [false, true] {
            let mut s = Solver::new(&cs).reverse_branches(rev);
            let Verdict::Sat(m) = s.solve().unwrap() else {
                panic!()
            };
            assert!(m.labels[0].contains("b"));
            assert!(check_model(&cs, &m));
        }
    }

    #[test]
    fn negative_existential_creates_negated_successor() {
        // a0: exists r.!g, and forall r.g  => unsat
        let cs = ClauseSet {
            clauses: vec![
                DLClause::new(
                    vec![ClauseAtom::concept("o", Term::X)],
                    vec![ClauseAtom::exists("g", false, Term::X)],
                ),
                DLClause::new(
                    vec![
                        ClauseAtom::concept("o", Term::X),
                        ClauseAtom::Role(Role::accessibility(), Term::X, Term::Y),
                    ],
                    vec![ClauseAtom::concept("g", Term::Y)],
                ),
            ],
            facts: vec![ClauseAtom::concept("o", ind("a0"))],
            aux_names: BTreeSet::new(),
        };
        assert_eq!(solve(&cs).unwrap(), Verdict::Unsat);
        let mut weaker = cs.clone();
        weaker.clauses.pop();
        let Verdict::Sat(m) = solve(&weaker).unwrap() else {
            panic!()
        };
        assert!(check_model(&weaker, &m));
        assert!(!m.labels[1].contains("g"));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let cs = seriality();
        assert_eq!(
            Solver::new(&cs).with_budget(1).solve(),
            Err(SolveError::BudgetExhausted(1))
        );
    }

    #[test]
    fn unravelling_keeps_models_valid() {
        let cs = seriality();
        let Verdict::Sat(m) = solve(&cs).unwrap() else {
            panic!()
        };
        let u = m.unravel_once();
        assert!(u.loop_backs.is_empty() || u.len() > m.len());
        assert!(check_model(&cs, &u));
    }

    #[test]
    fn ground_role_facts_are_edges() {
        let cs = ClauseSet {
            clauses: vec![DLClause::new(
                vec![
                    ClauseAtom::concept("p", Term::X),
                    ClauseAtom::Role(Role::accessibility(), Term::X, Term::Y),
                ],
                vec![ClauseAtom::concept("q", Term::Y)],
            )],
            facts: vec![
                ClauseAtom::concept("p", ind("a0")),
                ClauseAtom::Role(Role::accessibility(), ind("a0"), ind("b")),
            ],
            aux_names: BTreeSet::new(),
        };
        let Verdict::Sat(m) = solve(&cs).unwrap() else {
            panic!()
        };
        let b = m.index_of("b").unwrap();
        assert!(m.labels[b].contains("q"));
        assert!(check_model(&cs, &m));
    }
}
