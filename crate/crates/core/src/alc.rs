//! ALC concepts and the translation of deontic formulae into a knowledge base.
//!
//! Obligation becomes a value restriction over the single accessibility role
//! `r`, permission an existential restriction. Seriality of the accessibility
//! relation is the TBox axiom `top [= exists r.top`.

use std::fmt;

use thiserror::Error;

use crate::sdl::{Formula, NormativeSystem, RESERVED_INDIVIDUAL};

/// The accessibility role introduced by the translation.
pub const ROLE: &str = "r";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Role(pub String);

impl Role {
    pub fn accessibility() -> Self {
        Role(ROLE.to_string())
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Top,
    Bottom,
    Atomic(String),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Forall(Role, Box<Concept>),
    Exists(Role, Box<Concept>),
}

impl Concept {
    pub fn atomic(name: impl Into<String>) -> Self {
        Concept::Atomic(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn and(c: Concept, d: Concept) -> Self {
        Concept::And(Box::new(c), Box::new(d))
    }

    pub fn or(c: Concept, d: Concept) -> Self {
        Concept::Or(Box::new(c), Box::new(d))
    }

    pub fn forall(c: Concept) -> Self {
        Concept::Forall(Role::accessibility(), Box::new(c))
    }

    pub fn exists(c: Concept) -> Self {
        Concept::Exists(Role::accessibility(), Box::new(c))
    }

    /// Left-nested conjunction; `top` when empty.
    pub fn conjunction(cs: impl IntoIterator<Item = Concept>) -> Concept {
        cs.into_iter().reduce(Concept::and).unwrap_or(Concept::Top)
    }

    pub fn node_count(&self) -> usize {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => 1,
            Concept::Not(c) | Concept::Forall(_, c) | Concept::Exists(_, c) => 1 + c.node_count(),
            Concept::And(c, d) | Concept::Or(c, d) => 1 + c.node_count() + d.node_count(),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => true,
            Concept::Not(c) => matches!(**c, Concept::Atomic(_)),
            Concept::And(c, d) | Concept::Or(c, d) => c.is_nnf() && d.is_nnf(),
            Concept::Forall(_, c) | Concept::Exists(_, c) => c.is_nnf(),
        }
    }

    pub fn roles(&self) -> Vec<&Role> {
        let mut out = Vec::new();
        self.collect_roles(&mut out);
        out
    }

    fn collect_roles<'a>(&'a self, out: &mut Vec<&'a Role>) {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => {}
            Concept::Not(c) => c.collect_roles(out),
            Concept::And(c, d) | Concept::Or(c, d) => {
                c.collect_roles(out);
                d.collect_roles(out);
            }
            Concept::Forall(r, c) | Concept::Exists(r, c) => {
                if !out.contains(&r) {
                    out.push(r);
                }
                c.collect_roles(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Concept::Or(..) => 2,
            Concept::And(..) => 3,
            Concept::Not(_) | Concept::Forall(..) | Concept::Exists(..) => 4,
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, sub: &Concept, min_prec: u8) -> fmt::Result {
    if sub.precedence() < min_prec {
        write!(f, "({sub})")
    } else {
        write!(f, "{sub}")
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("top"),
            Concept::Bottom => f.write_str("bot"),
            Concept::Atomic(a) => f.write_str(a),
            Concept::Not(c) => {
                f.write_str("!")?;
                write_operand(f, c, 4)
            }
            Concept::And(c, d) => {
                write_operand(f, c, 3)?;
                f.write_str(" & ")?;
                write_operand(f, d, 4)
            }
            Concept::Or(c, d) => {
                write_operand(f, c, 2)?;
                f.write_str(" | ")?;
                write_operand(f, d, 3)
            }
            Concept::Forall(r, c) => {
                write!(f, "forall {r}.")?;
                write_operand(f, c, 4)
            }
            Concept::Exists(r, c) => {
                write!(f, "exists {r}.")?;
                write_operand(f, c, 4)
            }
        }
    }
}

/// `lhs [= rhs`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TBoxAxiom {
    pub lhs: Concept,
    pub rhs: Concept,
}

impl TBoxAxiom {
    pub fn new(lhs: Concept, rhs: Concept) -> Self {
        TBoxAxiom { lhs, rhs }
    }

    pub fn seriality() -> Self {
        TBoxAxiom::new(Concept::Top, Concept::exists(Concept::Top))
    }

    pub fn is_seriality(&self) -> bool {
        *self == TBoxAxiom::seriality()
    }
}

impl fmt::Display for TBoxAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [= {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ABoxAssertion {
    Concept(Concept, String),
    Role(Role, String, String),
}

impl fmt::Display for ABoxAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ABoxAssertion::Concept(c, a) if c.precedence() >= 4 => write!(f, "{c}({a})"),
            ABoxAssertion::Concept(c, a) => write!(f, "({c})({a})"),
            ABoxAssertion::Role(r, a, b) => write!(f, "{r}({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    pub tbox: Vec<TBoxAxiom>,
    pub abox: Vec<ABoxAssertion>,
}

impl KnowledgeBase {
    /// The same knowledge base with every seriality axiom removed.
    pub fn without_seriality(&self) -> KnowledgeBase {
        KnowledgeBase {
            tbox: self
                .tbox
                .iter()
                .filter(|ax| !ax.is_seriality())
                .cloned()
                .collect(),
            abox: self.abox.clone(),
        }
    }

    pub fn node_count(&self) -> usize {
        let t: usize = self
            .tbox
            .iter()
            .map(|ax| ax.lhs.node_count() + ax.rhs.node_count())
            .sum();
        let a: usize = self
            .abox
            .iter()
            .map(|a| match a {
                ABoxAssertion::Concept(c, _) => c.node_count(),
                ABoxAssertion::Role(..) => 1,
            })
            .sum();
        t + a
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ax in &self.tbox {
            writeln!(f, "tbox: {ax}")?;
        }
        for a in &self.abox {
            writeln!(f, "abox: {a}")?;
        }
        Ok(())
    }
}

/// Structural translation of a modal formula into a concept.
pub fn phi(f: &Formula) -> Concept {
    match f {
        Formula::Top => Concept::Top,
        Formula::Bot => Concept::Bottom,
        Formula::Atom(a) => Concept::Atomic(a.clone()),
        Formula::Not(g) => Concept::not(phi(g)),
        Formula::And(g, h) => Concept::and(phi(g), phi(h)),
        Formula::Or(g, h) => Concept::or(phi(g), phi(h)),
        Formula::Implies(g, h) => Concept::or(Concept::not(phi(g)), phi(h)),
        Formula::Box(g) => Concept::forall(phi(g)),
        Formula::Dia(g) => Concept::exists(phi(g)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("concept mentions role `{0}`; only `r` has a modal reading")]
pub struct ForeignRole(pub String);

/// Reads a single-role concept back as a modal formula.
pub fn phi_inverse(c: &Concept) -> Result<Formula, ForeignRole> {
    Ok(match c {
        Concept::Top => Formula::Top,
        Concept::Bottom => Formula::Bot,
        Concept::Atomic(a) => Formula::Atom(a.clone()),
        Concept::Not(d) => Formula::not(phi_inverse(d)?),
        Concept::And(d, e) => Formula::and(phi_inverse(d)?, phi_inverse(e)?),
        Concept::Or(d, e) => Formula::or(phi_inverse(d)?, phi_inverse(e)?),
        Concept::Forall(r, _) | Concept::Exists(r, _) if r.0 != ROLE => {
            return Err(ForeignRole(r.0.clone()));
        }
        Concept::Forall(_, d) => Formula::boxed(phi_inverse(d)?),
        Concept::Exists(_, d) => Formula::dia(phi_inverse(d)?),
    })
}

/// Negation normal form: negation is pushed down to atomic concepts.
pub fn nnf(c: &Concept) -> Concept {
    match c {
        Concept::Top | Concept::Bottom | Concept::Atomic(_) => c.clone(),
        Concept::And(d, e) => Concept::and(nnf(d), nnf(e)),
        Concept::Or(d, e) => Concept::or(nnf(d), nnf(e)),
        Concept::Forall(r, d) => Concept::Forall(r.clone(), Box::new(nnf(d))),
        Concept::Exists(r, d) => Concept::Exists(r.clone(), Box::new(nnf(d))),
        Concept::Not(d) => negated_nnf(d),
    }
}

/// `nnf(!c)` without building the negation first.
fn negated_nnf(c: &Concept) -> Concept {
    match c {
        Concept::Top => Concept::Bottom,
        Concept::Bottom => Concept::Top,
        Concept::Atomic(_) => Concept::not(c.clone()),
        Concept::Not(d) => nnf(d),
        Concept::And(d, e) => Concept::or(negated_nnf(d), negated_nnf(e)),
        Concept::Or(d, e) => Concept::and(negated_nnf(d), negated_nnf(e)),
        Concept::Forall(r, d) => Concept::Exists(r.clone(), Box::new(negated_nnf(d))),
        Concept::Exists(r, d) => Concept::Forall(r.clone(), Box::new(negated_nnf(d))),
    }
}

/// TBox axiom for a formula that holds in every world. A top-level
/// implication becomes a subsumption between its two sides.
pub fn global_axiom(f: &Formula) -> TBoxAxiom {
    match f {
        Formula::Implies(lhs, rhs) => TBoxAxiom::new(phi(lhs), phi(rhs)),
        other => TBoxAxiom::new(Concept::Top, phi(other)),
    }
}

/// Knowledge base for `n` with `extra` formulae conjoined at the root individual.
pub fn build_kb(n: &NormativeSystem, extra: &[Formula]) -> KnowledgeBase {
    let mut tbox = vec![TBoxAxiom::seriality()];
    tbox.extend(n.global_formulae().map(global_axiom));

    let root = Concept::conjunction(n.local_formulae().chain(extra.iter()).map(phi));
    KnowledgeBase {
        tbox,
        abox: vec![ABoxAssertion::Concept(
            root,
            RESERVED_INDIVIDUAL.to_string(),
        )],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdl::{parse_formula, parse_system};

    fn at(s: &str) -> Concept {
        Concept::atomic(s)
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn phi_follows_mapping_table() {
        assert_eq!(phi(&f("box ~s")), Concept::forall(Concept::not(at("s"))));
        assert_eq!(
            phi(&f("s -> box p")),
            Concept::or(Concept::not(at("s")), Concept::forall(at("p")))
        );
        assert_eq!(phi(&f("dia c")), Concept::exists(at("c")));
        assert_eq!(
            phi(&f("top & bot")),
            Concept::and(Concept::Top, Concept::Bottom)
        );
    }

    #[test]
    fn phi_inverse_reads_back() {
        assert_eq!(
            phi_inverse(&Concept::forall(Concept::not(at("s")))).unwrap(),
            f("box ~s")
        );
        assert_eq!(phi_inverse(&Concept::Top).unwrap(), Formula::Top);
        assert_eq!(phi_inverse(&Concept::exists(at("p"))).unwrap(), f("dia p"));
        // disjunction stays a disjunction
        assert_eq!(
            phi_inverse(&phi(&f("s -> p"))).unwrap(),
            Formula::or(Formula::not(Formula::atom("s")), Formula::atom("p"))
        );
        let foreign = Concept::Forall(Role("q".into()), Box::new(at("s")));
        assert_eq!(
            phi_inverse(&Concept::and(at("p"), foreign)),
            Err(ForeignRole("q".into()))
        );
    }

    #[test]
    fn nnf_cases() {
        assert_eq!(
            nnf(&Concept::not(Concept::forall(at("s")))),
            Concept::exists(Concept::not(at("s")))
        );
        assert_eq!(nnf(&Concept::not(Concept::not(at("p")))), at("p"));
        assert_eq!(
            nnf(&Concept::not(Concept::and(at("s"), at("p")))),
            Concept::or(Concept::not(at("s")), Concept::not(at("p")))
        );
        assert_eq!(nnf(&Concept::not(Concept::Top)), Concept::Bottom);
        assert_eq!(nnf(&Concept::not(Concept::Bottom)), Concept::Top);
        assert_eq!(
            nnf(&Concept::not(Concept::exists(Concept::or(
                at("a"),
                Concept::not(at("b"))
            )))),
            Concept::forall(Concept::and(Concept::not(at("a")), at("b")))
        );
    }

    #[test]
    fn n1_knowledge_base() {
        let n1 = parse_system("n1", "box ~s\ns\ns -> box p\nbox (~s -> ~p)\n").unwrap();
        let kb = build_kb(&n1, &[]);
        assert_eq!(kb.tbox, vec![TBoxAxiom::seriality()]);
        let expected = Concept::conjunction([
            Concept::forall(Concept::not(at("s"))),
            at("s"),
            Concept::or(Concept::not(at("s")), Concept::forall(at("p"))),
            Concept::forall(Concept::or(
                Concept::not(Concept::not(at("s"))),
                Concept::not(at("p")),
            )),
        ]);
        assert_eq!(kb.abox, vec![ABoxAssertion::Concept(expected, "a0".into())]);
        // after normalisation the last conjunct is forall r.(s | !p)
        let ABoxAssertion::Concept(c, _) = &kb.abox[0] else {
            unreachable!()
        };
        let Concept::And(_, last) = nnf(c) else {
            unreachable!()
        };
        assert_eq!(
            *last,
            Concept::forall(Concept::or(at("s"), Concept::not(at("p"))))
        );
    }

    #[test]
    fn empty_system_knowledge_base() {
        let kb = build_kb(&NormativeSystem::new("empty"), &[]);
        assert_eq!(kb.tbox, vec![TBoxAxiom::seriality()]);
        assert_eq!(
            kb.abox,
            vec![ABoxAssertion::Concept(Concept::Top, "a0".into())]
        );
        assert_eq!(kb.to_string(), "tbox: top [= exists r.top\nabox: top(a0)\n");
    }

    #[test]
    fn global_formulae_go_to_tbox() {
        let sys = parse_system(
            "g",
            "global: act_ag1_term & act_ag2_delay -> out_worst\nglobal: box (~s -> ~p)\nj\n",
        )
        .unwrap();
        let kb = build_kb(&sys, &[f("dia ~out_best")]);
        assert_eq!(kb.tbox.len(), 3);
        assert!(kb.tbox[0].is_seriality());
        assert_eq!(
            kb.tbox[1],
            TBoxAxiom::new(
                Concept::and(at("act_ag1_term"), at("act_ag2_delay")),
                at("out_worst")
            )
        );
        assert_eq!(kb.tbox[2].lhs, Concept::Top);
        assert_eq!(
            kb.abox,
            vec![ABoxAssertion::Concept(
                Concept::and(at("j"), Concept::exists(Concept::not(at("out_best")))),
                "a0".into()
            )]
        );
        assert_eq!(kb.without_seriality().tbox.len(), 2);
    }

    #[test]
    fn concept_printing() {
        let kb = build_kb(&parse_system("n", "box ~s\ns -> box p").unwrap(), &[]);
        assert_eq!(
            kb.to_string(),
            "tbox: top [= exists r.top\nabox: (forall r.!s & (!s | forall r.p))(a0)\n"
        );
    }
}
