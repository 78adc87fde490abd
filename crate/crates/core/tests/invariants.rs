mod common;

use std::collections::BTreeMap;

use common::random_model;
use hornet_core::engine::{enabled_events, fire};
use hornet_core::multiset::sub_multisets_of_size;
use hornet_core::rate::ratio;
use hornet_core::stochastic::{build_dmc, Limits, StochasticConfig};
use hornet_core::*;
use proptest::prelude::*;

fn ms(v: &[u8]) -> Multiset<u8> {
    Multiset::from_items(v.iter().copied()).unwrap()
}

proptest! {
    #[test]
    fn multiset_add_sub(a in prop::collection::vec(0u8..5, 0..8), b in prop::collection::vec(0u8..5, 0..8)) {
        let (a, b) = (ms(&a), ms(&b));
        let s = a.checked_add(&b).unwrap();
        prop_assert_eq!(s.len(), a.len() + b.len());
        prop_assert!(a.leq(&s) && b.leq(&s));
        prop_assert_eq!(s.sub(&b), a.clone());
        prop_assert_eq!(s, b.checked_add(&a).unwrap());
    }

    #[test]
    fn sub_multisets_are_complete(a in prop::collection::vec(0u8..4, 0..6), k in 0u64..4) {
        let a = ms(&a);
        let subs = sub_multisets_of_size(&a, k);
        for s in &subs {
            prop_assert!(s.leq(&a));
            prop_assert_eq!(s.len(), k);
        }
        // count by brute force over all 0/1 choices of positions
        let items: Vec<u8> = a.expanded().copied().collect();
        let mut all = std::collections::BTreeSet::new();
        for mask in 0u32..(1 << items.len()) {
            let pick: Vec<u8> = (0..items.len()).filter(|i| mask & (1 << i) != 0).map(|i| items[i]).collect();
            if pick.len() as u64 == k {
                all.insert(ms(&pick));
            }
        }
        prop_assert_eq!(subs.len(), all.len());
    }

    #[test]
    fn firing_follows_the_rule(seed in any::<u64>()) {
        let (sys, mu) = random_model(seed);
        for e in enabled_events(&sys, &mu, &Default::default()).unwrap() {
            let theta = e.event.theta();
            let mut delta: BTreeMap<KindName, i64> = BTreeMap::new();
            for (n, ts) in &theta {
                for (t, c) in ts.iter() {
                    let tr = n.transition(t).unwrap();
                    *delta.entry(n.kind_name().clone()).or_default() += c as i64 * (tr.post.len() as i64 - tr.pre.len() as i64);
                }
            }
            for mode in &e.modes {
                prop_assert!(mode.lambda.leq(&mu));
                let next = fire(&mu, &e.event, mode).unwrap();
                prop_assert_eq!(next.checked_add(&mode.lambda).unwrap(), mu.checked_add(&mode.rho).unwrap());
                let count = |m: &NestedMarking| m.iter().map(|(a, n)| (a.marking.len() * n) as i64).sum::<i64>();
                let d: i64 = delta.values().sum();
                prop_assert_eq!(count(&next), count(&mu) + d);
                sys.check_marking(&next).unwrap();
            }
        }
    }

    #[test]
    fn dmc_rows_are_stochastic(seed in any::<u64>()) {
        let (sys, mu) = random_model(seed);
        let limits = Limits { max_states: 500, max_depth: Some(8) };
        let dmc = build_dmc(&sys, &mu, limits, &StochasticConfig::default(), false).unwrap();
        for (s, sum) in dmc.row_sums().iter().enumerate() {
            if dmc.expanded[s] && dmc.outgoing(s).next().is_some() {
                prop_assert_eq!(sum.as_exact().unwrap(), &ratio(1, 1));
            }
        }
        let seq = dmc;
        let par = build_dmc(&sys, &mu, limits, &StochasticConfig::default(), true).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let (system, marking) = random_model(seed);
        let m = Model { system, marking, options: Default::default(), nets: Default::default(), mape: Default::default() };
        let text = print_model(&m);
        let back = parse_model(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back.digest_hex(), m.digest_hex());
    }
}
