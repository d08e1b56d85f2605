//! Structural transformation of an ALC knowledge base into DL-clauses.
//!
//! A DL-clause is an implication `body -> head` where the body is a
//! conjunction of unary and binary atoms and the head a disjunction that may
//! also contain existential atoms `exists r.b(x)` / `exists r.!b(x)`. Each
//! TBox axiom `C [= D` is read as `top [= nnf(!C | D)`; subconcepts that do
//! not fit the clause shape are named by fresh auxiliary concepts `_q<n>`,
//! which keeps the output linear in the size of the input.
//!
//! Clauses use at most two variables: `x`, and `y` which is only ever bound
//! through a body atom `r(x,y)`. A clause containing `r(x,y)` has no unary
//! head atom on `x`; value restrictions that would need one are named first.
//! The solver's ancestor blocking relies on that shape.

use std::collections::BTreeSet;
use std::fmt;

use crate::alc::{nnf, ABoxAssertion, Concept, KnowledgeBase, Role};
use crate::sdl::AUX_PREFIX;

/// Predicate name standing for the top concept.
pub const TOP: &str = "top";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    X,
    Y,
    Ind(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::X | Term::Y)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::X => f.write_str("x"),
            Term::Y => f.write_str("y"),
            Term::Ind(a) => f.write_str(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClauseAtom {
    /// `b(s)`
    Concept(String, Term),
    /// `r(s,t)`
    Role(Role, Term, Term),
    /// `exists r.b(s)` when `positive`, otherwise `exists r.!b(s)`
    Exists {
        role: Role,
        filler: String,
        positive: bool,
        term: Term,
    },
}

impl ClauseAtom {
    pub fn concept(name: impl Into<String>, t: Term) -> Self {
        ClauseAtom::Concept(name.into(), t)
    }

    pub fn exists(filler: impl Into<String>, positive: bool, t: Term) -> Self {
        ClauseAtom::Exists {
            role: Role::accessibility(),
            filler: filler.into(),
            positive,
            term: t,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            ClauseAtom::Concept(_, t) | ClauseAtom::Exists { term: t, .. } => vec![t],
            ClauseAtom::Role(_, s, t) => vec![s, t],
        }
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| !t.is_var())
    }
}

impl fmt::Display for ClauseAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseAtom::Concept(b, t) => write!(f, "{b}({t})"),
            ClauseAtom::Role(r, s, t) => write!(f, "{r}({s},{t})"),
            ClauseAtom::Exists {
                role,
                filler,
                positive,
                term,
            } => {
                let neg = if *positive { "" } else { "!" };
                write!(f, "exists {role}.{neg}{filler}({term})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DLClause {
    pub body: Vec<ClauseAtom>,
    pub head: Vec<ClauseAtom>,
}

impl DLClause {
    pub fn new(body: Vec<ClauseAtom>, head: Vec<ClauseAtom>) -> Self {
        DLClause { body, head }
    }

    /// The role atom `r(x,y)` of the body, if any.
    pub fn role_atom(&self) -> Option<&Role> {
        self.body.iter().find_map(|a| match a {
            ClauseAtom::Role(r, Term::X, Term::Y) => Some(r),
            _ => None,
        })
    }

    /// Checks the shape invariants the solver depends on.
    pub fn is_well_formed(&self) -> bool {
        let body_ok = self.body.iter().all(|a| match a {
            ClauseAtom::Concept(_, t) => t.is_var(),
            ClauseAtom::Role(_, Term::X, Term::Y) => true,
            _ => false,
        });
        let role_atoms = self
            .body
            .iter()
            .filter(|a| matches!(a, ClauseAtom::Role(..)))
            .count();
        let has_y = role_atoms == 1;
        let vars_ok = self
            .body
            .iter()
            .chain(self.head.iter())
            .flat_map(|a| a.terms())
            .all(|t| match t {
                Term::X => true,
                Term::Y => has_y,
                Term::Ind(_) => false,
            });
        let head_ok = self.head.iter().all(|a| match a {
            ClauseAtom::Role(..) => false,
            ClauseAtom::Exists { term, .. } => *term == Term::X,
            ClauseAtom::Concept(_, t) => !(has_y && *t == Term::X),
        });
        body_ok && role_atoms <= 1 && vars_ok && head_ok
    }

    pub fn atom_count(&self) -> usize {
        self.body.len() + self.head.len()
    }
}

impl fmt::Display for DLClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        if !self.body.is_empty() {
            f.write_str(" ")?;
        }
        f.write_str("-> ")?;
        if self.head.is_empty() {
            return f.write_str("bot");
        }
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClauseSet {
    pub clauses: Vec<DLClause>,
    /// Ground atoms.
    pub facts: Vec<ClauseAtom>,
    pub aux_names: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseStats {
    pub clause_count: usize,
    pub atom_count: usize,
    pub aux_count: usize,
}

pub fn clause_stats(cs: &ClauseSet) -> ClauseStats {
    ClauseStats {
        clause_count: cs.clauses.len(),
        atom_count: cs.clauses.iter().map(DLClause::atom_count).sum::<usize>() + cs.facts.len(),
        aux_count: cs.aux_names.len(),
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        for a in &self.facts {
            writeln!(f, "fact: {a}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Clausifier {
    next_aux: usize,
    aux_names: BTreeSet<String>,
}

fn flatten_or<'a>(c: &'a Concept, out: &mut Vec<&'a Concept>) {
    match c {
        Concept::Or(a, b) => {
            flatten_or(a, out);
            flatten_or(b, out);
        }
        other => out.push(other),
    }
}

fn disjuncts(c: &Concept) -> Vec<&Concept> {
    let mut out = Vec::new();
    flatten_or(c, &mut out);
    out
}

fn push_unique(atoms: &mut Vec<ClauseAtom>, a: ClauseAtom) {
    if !atoms.contains(&a) {
        atoms.push(a);
    }
}

/// Literal filler of an existential restriction: `(name, positive)`.
fn literal(c: &Concept) -> Option<(&str, bool)> {
    match c {
        Concept::Top => Some((TOP, true)),
        Concept::Atomic(a) => Some((a, true)),
        Concept::Not(inner) => match &**inner {
            Concept::Atomic(a) => Some((a, false)),
            _ => None,
        },
        _ => None,
    }
}

impl Clausifier {
    fn fresh(&mut self) -> String {
        let name = format!("{AUX_PREFIX}{}", self.next_aux);
        self.next_aux += 1;
        self.aux_names.insert(name.clone());
        name
    }

    /// Emits clauses stating that `c` holds at `x` whenever `guard` does.
    /// `c` must be in NNF.
    fn encode(&mut self, guard: &[ClauseAtom], c: &Concept, out: &mut Vec<DLClause>) {
        match c {
            Concept::Top => {}
            Concept::And(a, b) => {
                self.encode(guard, a, out);
                self.encode(guard, b, out);
            }
            _ => self.encode_disjunction(guard, c, out),
        }
    }

    fn encode_disjunction(&mut self, guard: &[ClauseAtom], c: &Concept, out: &mut Vec<DLClause>) {
        let parts = disjuncts(c);
        let tautology = parts.iter().any(|d| match d {
            Concept::Top => true,
            Concept::Forall(_, f) => disjuncts(f).iter().any(|g| **g == Concept::Top),
            _ => false,
        });
        if tautology {
            return;
        }
        let foralls = parts
            .iter()
            .filter(|d| matches!(d, Concept::Forall(..)))
            .count();
        let positive_at_x = parts
            .iter()
            .any(|d| matches!(d, Concept::Atomic(_) | Concept::And(..)));
        let inline_forall = foralls == 1 && !positive_at_x;

        let mut body_x: Vec<ClauseAtom> = guard.to_vec();
        let mut role: Option<Role> = None;
        let mut body_y: Vec<ClauseAtom> = Vec::new();
        let mut head_concepts: Vec<ClauseAtom> = Vec::new();
        let mut head_exists: Vec<ClauseAtom> = Vec::new();
        let mut deferred: Vec<(String, Concept)> = Vec::new();

        for d in parts {
            match d {
                Concept::Bottom => {}
                Concept::Atomic(a) => {
                    push_unique(&mut head_concepts, ClauseAtom::concept(a, Term::X))
                }
                Concept::Not(inner) => match &**inner {
                    Concept::Atomic(a) => push_unique(&mut body_x, ClauseAtom::concept(a, Term::X)),
                    _ => unreachable!("input is in negation normal form"),
                },
                Concept::Exists(r, filler) => {
                    if **filler == Concept::Bottom {
                        continue;
                    }
                    let (name, positive) = match literal(filler) {
                        Some((n, p)) => (n.to_string(), p),
                        None => {
                            let q = self.fresh();
                            deferred.push((q.clone(), (**filler).clone()));
                            (q, true)
                        }
                    };
                    push_unique(
                        &mut head_exists,
                        ClauseAtom::Exists {
                            role: r.clone(),
                            filler: name,
                            positive,
                            term: Term::X,
                        },
                    );
                }
                Concept::Forall(r, filler) if inline_forall => {
                    role = Some(r.clone());
                    for g in disjuncts(filler) {
                        match g {
                            Concept::Bottom => {}
                            Concept::Atomic(a) => {
                                push_unique(&mut head_concepts, ClauseAtom::concept(a, Term::Y))
                            }
                            Concept::Not(inner) if matches!(**inner, Concept::Atomic(_)) => {
                                let Concept::Atomic(a) = &**inner else {
                                    unreachable!()
                                };
                                push_unique(&mut body_y, ClauseAtom::concept(a, Term::Y))
                            }
                            other => {
                                let q = self.fresh();
                                push_unique(&mut head_concepts, ClauseAtom::concept(&q, Term::Y));
                                deferred.push((q, other.clone()));
                            }
                        }
                    }
                }
                Concept::Forall(..) | Concept::And(..) => {
                    let q = self.fresh();
                    push_unique(&mut head_concepts, ClauseAtom::concept(&q, Term::X));
                    deferred.push((q, d.clone()));
                }
                Concept::Top | Concept::Or(..) => unreachable!("handled above"),
            }
        }

        let mut body = body_x;
        if let Some(r) = role {
            body.push(ClauseAtom::Role(r, Term::X, Term::Y));
        }
        body.extend(body_y);
        let mut head = head_concepts;
        head.extend(head_exists);
        out.push(DLClause::new(body, head));

        for (q, def) in deferred {
            self.encode(&[ClauseAtom::concept(q, Term::X)], &def, out);
        }
    }
}

/// Translates `kb` into an equisatisfiable clause set. Deterministic,
/// including the numbering of auxiliary concepts.
pub fn clausify(kb: &KnowledgeBase) -> ClauseSet {
    let mut cz = Clausifier::default();
    let mut facts = Vec::new();
    let mut abox_clauses = Vec::new();
    for assertion in &kb.abox {
        match assertion {
            ABoxAssertion::Role(r, a, b) => facts.push(ClauseAtom::Role(
                r.clone(),
                Term::Ind(a.clone()),
                Term::Ind(b.clone()),
            )),
            ABoxAssertion::Concept(c, a) => match nnf(c) {
                Concept::Top => facts.push(ClauseAtom::concept(TOP, Term::Ind(a.clone()))),
                Concept::Atomic(name) => {
                    facts.push(ClauseAtom::concept(name, Term::Ind(a.clone())))
                }
                complex => {
                    let q = cz.fresh();
                    facts.push(ClauseAtom::concept(&q, Term::Ind(a.clone())));
                    cz.encode(
                        &[ClauseAtom::concept(q, Term::X)],
                        &complex,
                        &mut abox_clauses,
                    );
                }
            },
        }
    }

    let mut clauses = Vec::new();
    for ax in &kb.tbox {
        let c = nnf(&Concept::or(Concept::not(ax.lhs.clone()), ax.rhs.clone()));
        cz.encode(&[], &c, &mut clauses);
    }
    clauses.extend(abox_clauses);

    ClauseSet {
        clauses,
        facts,
        aux_names: cz.aux_names,
    }
}
