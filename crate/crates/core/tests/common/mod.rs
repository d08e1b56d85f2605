#![allow(dead_code)]

use std::path::PathBuf;

use deontic::{Formula, NormativeSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATOMS: [&str; 4] = ["p", "q", "s", "t"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

/// Random formula over the first `atoms` of [`ATOMS`] with modal depth at
/// most `depth` and roughly `size` nodes.
pub fn formula(rng: &mut impl Rng, atoms: usize, depth: usize, size: usize) -> Formula {
    if size <= 1 {
        return match rng.gen_range(0..20) {
            0 => Formula::Top,
            1 => Formula::Bot,
            _ => Formula::atom(ATOMS[rng.gen_range(0..atoms)]),
        };
    }
    let ops = if depth > 0 { 6 } else { 4 };
    match rng.gen_range(0..ops) {
        0 => Formula::not(formula(rng, atoms, depth, size - 1)),
        1..=3 => {
            let left = rng.gen_range(1..size);
            let a = formula(rng, atoms, depth, left);
            let b = formula(rng, atoms, depth, size - left);
            match rng.gen_range(0..3) {
                0 => Formula::and(a, b),
                1 => Formula::or(a, b),
                _ => Formula::implies(a, b),
            }
        }
        4 => Formula::boxed(formula(rng, atoms, depth - 1, size - 1)),
        _ => Formula::dia(formula(rng, atoms, depth - 1, size - 1)),
    }
}

/// Random system: up to `max_len` formulae, at most four atoms, modal depth two.
pub fn system(rng: &mut impl Rng, max_len: usize) -> NormativeSystem {
    let len = rng.gen_range(1..=max_len);
    let formulae = (0..len)
        .map(|_| {
            let size = rng.gen_range(1..=7);
            formula(rng, 4, 2, size)
        })
        .collect();
    NormativeSystem::from_formulae("fuzz", formulae)
}

pub fn without_implies(f: &Formula) -> bool {
    match f {
        Formula::Top | Formula::Bot | Formula::Atom(_) => true,
        Formula::Implies(..) => false,
        Formula::Not(g) | Formula::Box(g) | Formula::Dia(g) => without_implies(g),
        Formula::And(g, h) | Formula::Or(g, h) => without_implies(g) && without_implies(h),
    }
}

/// Reads a solver model as a Kripke model over `atoms`.
pub fn kripke_of(model: &deontic::Model, atoms: &[String]) -> deontic::oracle::KripkeModel {
    let reach = model
        .edges
        .iter()
        .chain(model.loop_backs.iter())
        .map(|(_, s, t)| (*s, *t))
        .collect();
    let valuation = atoms
        .iter()
        .map(|a| {
            (
                a.clone(),
                model.labels.iter().map(|l| l.contains(a)).collect(),
            )
        })
        .collect();
    deontic::oracle::KripkeModel {
        worlds: model.len(),
        reach,
        valuation,
    }
}

/// The local formulae hold at `a0` and the global ones everywhere.
pub fn model_satisfies(model: &deontic::Model, sys: &NormativeSystem, extra: &[Formula]) -> bool {
    let mut atoms = std::collections::BTreeSet::new();
    for f in sys.formulae.iter().chain(extra) {
        atoms.extend(f.atoms());
    }
    let atoms: Vec<String> = atoms.into_iter().collect();
    let k = kripke_of(model, &atoms);
    let root = model.index_of("a0").expect("root individual");
    let eval = |w, f| deontic::oracle::eval(&k, w, f).expect("all atoms valued");
    sys.local_formulae().chain(extra).all(|f| eval(root, f))
        && sys
            .global_formulae()
            .all(|f| (0..k.worlds).all(|w| eval(w, f)))
}
