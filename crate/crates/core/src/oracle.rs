//! Brute-force satisfiability over small serial Kripke models.
//!
//! This is a reference checker for the translation pipeline and shares no
//! code with it. Frames are enumerated in layers: a single root, then each
//! world of layer `i` sees a nonempty set of worlds of layer `i + 1`, and the
//! worlds of the last layer see themselves. A formula of modal depth `d`
//! that has a serial model has one of this shape with at most `d + 1`
//! layers, so the only incompleteness left is the world budget. For the
//! fuzzed family used in the tests (at most four atoms, modal depth two)
//! six worlds are taken as sufficient; a disagreement with the solver is a
//! bug to investigate, not something to resolve here.
//!
//! Formulae required at every world lift the layer limit to the world budget,
//! and for very small world counts every serial relation is tried as well;
//! beyond that, models that need cycles are out of reach.
//!
//! For each frame the formula is grounded into a propositional formula over
//! `(atom, world)` variables and decided by splitting on variables with
//! constant folding.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::sdl::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub worlds: usize,
    /// `(from, to)`, 0-based worlds; world 0 is the evaluation point.
    pub reach: Vec<(usize, usize)>,
    pub valuation: BTreeMap<String, Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atom `{0}` has no valuation in the model")]
pub struct UnknownAtom(pub String);

impl KripkeModel {
    pub fn successors(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        self.reach
            .iter()
            .filter(move |(a, _)| *a == w)
            .map(|(_, b)| *b)
    }

    pub fn is_serial(&self) -> bool {
        (0..self.worlds).all(|w| self.successors(w).next().is_some())
    }
}

impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in 0..self.worlds {
            let true_atoms: Vec<&str> = self
                .valuation
                .iter()
                .filter(|(_, vals)| vals[w])
                .map(|(a, _)| a.as_str())
                .collect();
            let succ: Vec<String> = self.successors(w).map(|v| format!("w{}", v + 1)).collect();
            writeln!(
                f,
                "w{}: {{{}}} -> {}",
                w + 1,
                true_atoms.join(", "),
                succ.join(", ")
            )?;
        }
        Ok(())
    }
}

/// Kripke semantics of `f` at world `w`.
pub fn eval(m: &KripkeModel, w: usize, f: &Formula) -> Result<bool, UnknownAtom> {
    Ok(match f {
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Atom(a) => m.valuation.get(a).ok_or_else(|| UnknownAtom(a.clone()))?[w],
        Formula::Not(g) => !eval(m, w, g)?,
        Formula::And(g, h) => eval(m, w, g)? && eval(m, w, h)?,
        Formula::Or(g, h) => eval(m, w, g)? || eval(m, w, h)?,
        Formula::Implies(g, h) => !eval(m, w, g)? || eval(m, w, h)?,
        Formula::Box(g) => {
            for v in m.successors(w) {
                if !eval(m, v, g)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Dia(g) => {
            for v in m.successors(w) {
                if eval(m, v, g)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Sat(KripkeModel),
    Unsat,
}

impl OracleVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleVerdict::Sat(_))
    }
}

/// Searches serial models with at most `max_worlds` worlds for one that
/// satisfies `f` at its root.
pub fn bounded_sat(f: &Formula, max_worlds: usize) -> OracleVerdict {
    bounded_sat_with_globals(f, &[], max_worlds)
}

/// Like [`bounded_sat`], with `globals` required at every world.
pub fn bounded_sat_with_globals(
    f: &Formula,
    globals: &[Formula],
    max_worlds: usize,
) -> OracleVerdict {
    assert!(max_worlds >= 1, "at least one world is needed");
    let mut atoms = f.atoms();
    for g in globals {
        atoms.extend(g.atoms());
    }
    let atoms: Vec<String> = atoms.into_iter().collect();
    // globals constrain every world, so their depth gives no bound on the layers
    let depth = if globals.is_empty() {
        f.modal_depth()
    } else {
        max_worlds - 1
    };

    for worlds in 1..=max_worlds {
        let mut frames = layered_frames(worlds, depth);
        if !globals.is_empty() && worlds <= FULL_ENUMERATION_WORLDS {
            frames.extend(serial_frames(worlds));
        }
        for frame in frames {
            let g = Grounder {
                atoms: &atoms,
                frame: &frame,
            };
            let mut parts = vec![g.ground(f, 0)];
            for global in globals {
                for w in 0..worlds {
                    parts.push(g.ground(global, w));
                }
            }
            let prop = Prop::and(parts);
            if let Some(assignment) = prop_sat(prop) {
                let valuation = atoms
                    .iter()
                    .enumerate()
                    .map(|(ai, a)| {
                        let vals = (0..worlds)
                            .map(|w| {
                                assignment
                                    .get(&(w * atoms.len() + ai))
                                    .copied()
                                    .unwrap_or(false)
                            })
                            .collect();
                        (a.clone(), vals)
                    })
                    .collect();
                let reach = frame
                    .iter()
                    .enumerate()
                    .flat_map(|(w, succ)| succ.iter().map(move |&v| (w, v)))
                    .collect();
                return OracleVerdict::Sat(KripkeModel {
                    worlds,
                    reach,
                    valuation,
                });
            }
        }
    }
    OracleVerdict::Unsat
}

/// Up to this many worlds, formulae with globals are also tried on every
/// serial relation, which covers models with cycles.
const FULL_ENUMERATION_WORLDS: usize = 3;

/// Every serial relation on `worlds` worlds, by bitmask ascending.
fn serial_frames(worlds: usize) -> Vec<Vec<Vec<usize>>> {
    let bits = worlds * worlds;
    (0u32..1 << bits)
        .map(|mask| {
            (0..worlds)
                .map(|w| {
                    (0..worlds)
                        .filter(|v| mask & (1 << (w * worlds + v)) != 0)
                        .collect()
                })
                .collect::<Vec<Vec<usize>>>()
        })
        .filter(|frame| frame.iter().all(|s| !s.is_empty()))
        .collect()
}

/// Frames on exactly `worlds` worlds with up to `max_depth + 1` layers,
/// as successor lists. Permutations of worlds within a layer are skipped.
fn layered_frames(worlds: usize, max_depth: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if worlds == 1 {
        out.push(vec![vec![0]]);
        return out;
    }
    for layers in 2..=(max_depth + 1).min(worlds) {
        let mut sizes = vec![1];
        compositions(worlds - 1, layers - 1, &mut sizes, &mut |sizes| {
            frames_for_sizes(sizes, &mut out);
        });
    }
    out
}

fn compositions(total: usize, parts: usize, acc: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if parts == 0 {
        if total == 0 {
            emit(acc);
        }
        return;
    }
    for first in 1..=total.saturating_sub(parts - 1) {
        acc.push(first);
        compositions(total - first, parts - 1, acc, emit);
        acc.pop();
    }
}

fn frames_for_sizes(sizes: &[usize], out: &mut Vec<Vec<Vec<usize>>>) {
    let mut starts = Vec::with_capacity(sizes.len());
    let mut n = 0;
    for &s in sizes {
        starts.push(n);
        n += s;
    }
    // per layer boundary, every admissible choice of successor masks
    let mut per_layer: Vec<Vec<Vec<u32>>> = Vec::new();
    for i in 0..sizes.len() - 1 {
        let (here, next) = (sizes[i], sizes[i + 1]);
        let full = (1u32 << next) - 1;
        let mut choices = Vec::new();
        let mut acc = Vec::new();
        masks_nondecreasing(here, 1, full, &mut acc, &mut |masks| {
            if masks.iter().fold(0, |u, m| u | m) == full {
                choices.push(masks.to_vec());
            }
        });
        per_layer.push(choices);
    }
    let mut pick = vec![0usize; per_layer.len()];
    loop {
        let mut frame = vec![Vec::new(); n];
        for (i, choices) in per_layer.iter().enumerate() {
            for (k, mask) in choices[pick[i]].iter().enumerate() {
                let w = starts[i] + k;
                for b in 0..sizes[i + 1] {
                    if mask & (1 << b) != 0 {
                        frame[w].push(starts[i + 1] + b);
                    }
                }
            }
        }
        let last = sizes.len() - 1;
        for k in 0..sizes[last] {
            let w = starts[last] + k;
            frame[w].push(w);
        }
        out.push(frame);

        // odometer over the per-layer choices
        let mut i = 0;
        loop {
            if i == pick.len() {
                return;
            }
            pick[i] += 1;
            if pick[i] < per_layer[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn masks_nondecreasing(
    count: usize,
    min: u32,
    full: u32,
    acc: &mut Vec<u32>,
    emit: &mut impl FnMut(&[u32]),
) {
    if acc.len() == count {
        emit(acc);
        return;
    }
    for m in min..=full {
        acc.push(m);
        masks_nondecreasing(count, m, full, acc, emit);
        acc.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Prop {
    Const(bool),
    Var(usize),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    fn not(p: Prop) -> Prop {
        match p {
            Prop::Const(b) => Prop::Const(!b),
            Prop::Not(q) => *q,
            other => Prop::Not(Box::new(other)),
        }
    }

    fn and(parts: Vec<Prop>) -> Prop {
        let mut kept = Vec::new();
        for p in parts {
            match p {
                Prop::Const(true) => {}
                Prop::Const(false) => return Prop::Const(false),
                other => kept.push(other),
            }
        }
        match kept.len() {
            0 => Prop::Const(true),
            1 => kept.pop().unwrap(),
            _ => Prop::And(kept),
        }
    }

    fn or(parts: Vec<Prop>) -> Prop {
        let mut kept = Vec::new();
        for p in parts {
            match p {
                Prop::Const(false) => {}
                Prop::Const(true) => return Prop::Const(true),
                other => kept.push(other),
            }
        }
        match kept.len() {
            0 => Prop::Const(false),
            1 => kept.pop().unwrap(),
            _ => Prop::Or(kept),
        }
    }

    fn assign(&self, var: usize, value: bool) -> Prop {
        match self {
            Prop::Const(b) => Prop::Const(*b),
            Prop::Var(v) if *v == var => Prop::Const(value),
            Prop::Var(v) => Prop::Var(*v),
            Prop::Not(p) => Prop::not(p.assign(var, value)),
            Prop::And(ps) => Prop::and(ps.iter().map(|p| p.assign(var, value)).collect()),
            Prop::Or(ps) => Prop::or(ps.iter().map(|p| p.assign(var, value)).collect()),
        }
    }

    fn first_var(&self) -> Option<usize> {
        match self {
            Prop::Const(_) => None,
            Prop::Var(v) => Some(*v),
            Prop::Not(p) => p.first_var(),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().find_map(Prop::first_var),
        }
    }
}

/// A satisfying partial assignment; unlisted variables are free.
fn prop_sat(p: Prop) -> Option<BTreeMap<usize, bool>> {
    match p {
        Prop::Const(true) => Some(BTreeMap::new()),
        Prop::Const(false) => None,
        _ => {
            let v = p.first_var().expect("non-constant formula has a variable");
            for value in [false, true] {
                if let Some(mut rest) = prop_sat(p.assign(v, value)) {
                    rest.insert(v, value);
                    return Some(rest);
                }
            }
            None
        }
    }
}

struct Grounder<'a> {
    atoms: &'a [String],
    frame: &'a [Vec<usize>],
}

impl Grounder<'_> {
    fn var(&self, atom: &str, w: usize) -> usize {
        let ai = self
            .atoms
            .iter()
            .position(|a| a == atom)
            .expect("atom collected up front");
        w * self.atoms.len() + ai
    }

    fn ground(&self, f: &Formula, w: usize) -> Prop {
        match f {
            Formula::Top => Prop::Const(true),
            Formula::Bot => Prop::Const(false),
            Formula::Atom(a) => Prop::Var(self.var(a, w)),
            Formula::Not(g) => Prop::not(self.ground(g, w)),
            Formula::And(g, h) => Prop::and(vec![self.ground(g, w), self.ground(h, w)]),
            Formula::Or(g, h) => Prop::or(vec![self.ground(g, w), self.ground(h, w)]),
            Formula::Implies(g, h) => {
                Prop::or(vec![Prop::not(self.ground(g, w)), self.ground(h, w)])
            }
            Formula::Box(g) => {
                Prop::and(self.frame[w].iter().map(|&v| self.ground(g, v)).collect())
            }
            Formula::Dia(g) => Prop::or(self.frame[w].iter().map(|&v| self.ground(g, v)).collect()),
        }
    }
}
