mod common;

use common::*;
use cqfit::text::{format_cq, format_example, parse_cq, parse_example};
use cqfit::{canonical_cq, canonical_example, Solver};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn solver_agrees_with_enumeration(
        src in arb_example("s", 4, 6),
        dst in arb_example("d", 4, 6),
    ) {
        let s = Solver::default();
        let found = s.find_hom(&src, &dst).unwrap();
        prop_assert_eq!(found.is_some(), brute_hom(&src, &dst));
        if let Some(h) = found {
            prop_assert!(h.is_valid(&src, &dst));
        }
    }

    #[test]
    fn homomorphisms_compose(
        a in arb_example("a", 3, 4),
        b in arb_example("b", 3, 5),
        c in arb_example("c", 3, 6),
    ) {
        let s = Solver::default();
        if let (Some(f), Some(g)) = (s.find_hom(&a, &b).unwrap(), s.find_hom(&b, &c).unwrap()) {
            prop_assert!(f.then(&g).unwrap().is_valid(&a, &c));
        }
    }

    #[test]
    fn example_text_round_trips(e in arb_example("v", 4, 6)) {
        prop_assert_eq!(parse_example(&format_example(&e)).unwrap(), e);
    }

    #[test]
    fn canonical_cq_round_trips(e in arb_example("v", 4, 6)) {
        let q = canonical_cq(&e);
        prop_assert_eq!(canonical_example(&q), e);
        prop_assert_eq!(parse_cq(&format_cq(&q)).unwrap(), q);
    }

    #[test]
    fn containment_is_reflexive_and_follows_homs(
        a in arb_example("a", 3, 5),
        b in arb_example("b", 3, 5),
    ) {
        let s = Solver::default();
        let (qa, qb) = (canonical_cq(&a), canonical_cq(&b));
        prop_assert!(s.contained(&qa, &qa).unwrap());
        prop_assert_eq!(s.contained(&qa, &qb).unwrap(), brute_hom(&b, &a));
    }

    #[test]
    fn evaluation_matches_anchored_search(e in arb_example("v", 4, 6), q in arb_example("x", 3, 3)) {
        let s = Solver::default();
        let cq = canonical_cq(&q);
        let answers = s.evaluate(&cq, e.instance()).unwrap();
        for v in e.domain() {
            let at_v = cqfit::Example::unary(e.instance().clone(), v.clone());
            prop_assert_eq!(answers.contains(&vec![v.clone()]), brute_hom(&q, &at_v));
        }
    }
}

#[test]
fn seeded_corpus_agrees() {
    let mut r = rng(7);
    let s = Solver::default();
    let mut seen = [0usize; 2];
    for _ in 0..500 {
        let a = random_example(&mut r, "s", 4, 6, &UNARY, &BINARY);
        let b = random_example(&mut r, "d", 4, 6, &UNARY, &BINARY);
        let expected = brute_hom(&a, &b);
        assert_eq!(s.hom_exists(&a, &b).unwrap(), expected, "{a:?} -> {b:?}");
        seen[expected as usize] += 1;
    }
    assert!(seen[0] > 50 && seen[1] > 50, "{seen:?}");
}
