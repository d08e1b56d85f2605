mod common;

use std::time::Instant;

use deontic::hypertableau::{check_model, Solver, Verdict};
use deontic::oracle::{bounded_sat, OracleVerdict};
use deontic::{build_kb, clausify, Formula};

#[test]
fn solver_matches_oracle_on_random_systems() {
    let mut rng = common::rng(7);
    let start = Instant::now();
    let mut sat = 0;
    for case in 0..250 {
        let sys = common::system(&mut rng, 5);
        let cs = clausify(&build_kb(&sys, &[]));
        let verdict = Solver::new(&cs).solve().unwrap();
        let oracle = bounded_sat(&Formula::conjunction(sys.formulae.iter().cloned()), 6);
        assert_eq!(verdict.is_sat(), oracle.is_sat(), "case {case}: {sys}");
        if let Verdict::Sat(m) = &verdict {
            sat += 1;
            assert!(check_model(&cs, m), "case {case}: {sys}");
        }
        if let OracleVerdict::Sat(m) = oracle {
            assert!(m.is_serial());
        }
    }
    eprintln!("{sat} sat of 250 in {:?}", start.elapsed());
}
