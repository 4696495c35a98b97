//! Property tests: reasoning against truth tables, and conflict, diagnosis,
//! query and session invariants against brute force on random DPIs.

mod common;

use common::audit;
use common::{random_dpi, Tt};
use kbdebug::dpi::Mode;
use kbdebug::interactive::{Oracle, Params, Reply, ScriptedOracle, Session};
use kbdebug::logic::{entails, is_consistent, parse_formula, Formula};
use kbdebug::probability::FormulaProbs;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf =
        prop_oneof![prop::sample::select(vec!["p", "q", "r", "s", "t"]).prop_map(Formula::atom), Just(Formula::False),];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::and),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_round_trips(g in arb_formula()) {
        prop_assert_eq!(parse_formula(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn consistency_matches_truth_tables(kb in prop::collection::vec(arb_formula(), 0..5)) {
        let tt = Tt::new(&kb);
        let refs: Vec<&Formula> = kb.iter().collect();
        prop_assert_eq!(is_consistent(&kb), tt.consistent(&refs));
    }

    #[test]
    fn entailment_matches_truth_tables(kb in prop::collection::vec(arb_formula(), 0..4), t in arb_formula()) {
        let tt = Tt::new(kb.iter().chain([&t]));
        let refs: Vec<&Formula> = kb.iter().collect();
        prop_assert_eq!(entails(&kb, &t), tt.entails(&refs, &t));
    }

    #[test]
    fn entailment_is_monotone(kb in prop::collection::vec(arb_formula(), 0..4), g in arb_formula(), t in arb_formula()) {
        if entails(&kb, &t) {
            let mut more = kb.clone();
            more.push(g);
            prop_assert!(entails(&more, &t));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conflicts_are_minimal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dpi = random_dpi(&mut r, 8);
        prop_assert_eq!(audit::qx_minimality(&dpi, &mut r), Ok(()));
    }

    #[test]
    fn diagnoses_are_the_minimal_hitting_sets(seed in any::<u64>()) {
        let dpi = random_dpi(&mut rng(seed), 8);
        prop_assert_eq!(audit::hs_duality(&dpi), Ok(()));
    }

    #[test]
    fn pooled_queries_are_minimal_and_partition(seed in any::<u64>()) {
        let dpi = random_dpi(&mut rng(seed), 7);
        prop_assert_eq!(audit::pool_properties(&dpi), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scripted_sessions_find_the_true_diagnosis(
        seed in any::<u64>(),
        dynamic in any::<bool>(),
        uniform in any::<bool>(),
        varied in any::<bool>(),
    ) {
        let mut r = rng(seed);
        let dpi = random_dpi(&mut r, 7);
        let probs = if uniform { FormulaProbs::uniform(dpi.len()) } else { audit::random_probs(&mut r, dpi.len()) };
        let mode = if dynamic { Mode::Dynamic } else { Mode::Static };
        let params = if varied { audit::random_params(&mut r, mode) } else { Params { mode, ..Params::default() } };
        let report = audit::scripted_run(&dpi, params, probs, &mut r);
        prop_assert!(report.is_ok(), "{}\n{}", report.err().unwrap_or_default(), dpi.to_text());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn skipping_does_not_change_the_outcome(seed in any::<u64>(), dynamic in any::<bool>()) {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut r = rng(seed);
        let dpi = random_dpi(&mut r, 7);
        let truth = common::brute_min_diagnoses(&dpi).into_iter().collect::<Vec<_>>().choose(&mut r).unwrap().clone();
        let mode = if dynamic { Mode::Dynamic } else { Mode::Static };
        let params = Params { mode, pool_size: 2, ..Params::default() };
        let mut oracle = ScriptedOracle::new(truth.clone());
        let mut s = Session::start(dpi.clone(), FormulaProbs::uniform(dpi.len()), params).unwrap();
        let mut steps = 0;
        while !s.is_done() {
            steps += 1;
            prop_assert!(steps < 200);
            if r.gen_bool(0.4) && s.skip().is_ok() {
                prop_assert!(s.pending().unwrap().partition.is_query_partition());
                continue;
            }
            let q = s.pending().unwrap().query.clone();
            let a = oracle.reply(&s, &q).unwrap() == Reply::True;
            s.answer(a).unwrap();
        }
        prop_assert_eq!(&s.solution().unwrap().diagnosis, &truth);
    }
}
