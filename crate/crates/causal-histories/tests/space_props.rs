//! Property and oracle tests for history spaces: closure laws, tip
//! preservation, tightness inheritance, and a brute-force cross-check of
//! the causal-completion search.

use std::collections::BTreeSet;

use causal_histories::catalog;
use causal_histories::history::{Arity, History};
use causal_histories::order::EventSet;
use causal_histories::space::{ext_closure, HistorySpace};
use proptest::prelude::*;

fn arb_history() -> impl Strategy<Value = History> {
    // Nonempty partial binary assignments on 3 events.
    (1u64..8, 0u8..8).prop_map(|(mask, bits)| {
        let entries: Vec<(usize, u8)> = (0..3)
            .filter(|&e| mask & (1 << e) != 0)
            .map(|e| (e, (bits >> e) & 1))
            .collect();
        History::from_entries(3, &entries)
    })
}

fn arb_space() -> impl Strategy<Value = HistorySpace> {
    proptest::collection::vec(arb_history(), 1..7).prop_map(|hs| {
        let events = EventSet::new(vec!["A", "B", "C"]).unwrap();
        HistorySpace::new(events, Arity::uniform(3, 2).unwrap(), hs).unwrap()
    })
}

proptest! {
    #[test]
    fn closure_is_idempotent_and_sorted(space in arb_space()) {
        let once = space.ext().to_vec();
        let twice = ext_closure(&once);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn closure_is_monotone(a in arb_space(), extra in arb_history()) {
        let mut bigger = a.histories().to_vec();
        bigger.push(extra);
        let closed_bigger: BTreeSet<History> = ext_closure(&bigger).into_iter().collect();
        for h in a.ext() {
            prop_assert!(closed_bigger.contains(h));
        }
    }

    #[test]
    fn tips_nonempty_for_prime_members(space in arb_space()) {
        let report = space.validate_space();
        let reducible: BTreeSet<&History> =
            report.join_reducible.iter().map(|(h, _, _)| h).collect();
        for (i, h) in space.histories().iter().enumerate() {
            let tips = space.tips_by_index(i);
            prop_assert_eq!(tips & !h.domain_mask(), 0);
            if !reducible.contains(h) {
                prop_assert!(tips != 0, "prime member {:?} lost all tips", h);
            }
        }
    }

    #[test]
    fn adding_a_join_of_members_is_reported(space in arb_space()) {
        let members = space.histories();
        let mut found = None;
        'outer: for (i, a) in members.iter().enumerate() {
            for b in members.iter().skip(i + 1) {
                if a.compatible(b) && !a.leq(b) && !b.leq(a) {
                    let j = a.join(b).unwrap();
                    if space.history_index(&j).is_none() {
                        found = Some(j);
                        break 'outer;
                    }
                }
            }
        }
        prop_assume!(found.is_some());
        let mut extended = members.to_vec();
        extended.push(found.clone().unwrap());
        let bad = HistorySpace::new(
            space.events().clone(),
            space.inputs().clone(),
            extended,
        )
        .unwrap();
        let report = bad.validate_space();
        prop_assert!(report
            .join_reducible
            .iter()
            .any(|(h, _, _)| Some(h) == found.as_ref()));
    }
}

/// All down-closed member subsets of a space, as masks.
fn all_lowerset_masks(space: &HistorySpace) -> Vec<u64> {
    let n = space.len();
    assert!(n <= 16, "exhaustive lowerset scan kept small");
    (0u64..(1 << n))
        .filter(|&mask| {
            (0..n).all(|i| {
                mask & (1 << i) == 0
                    || (0..n).all(|j| {
                        !space.histories()[j].lt(&space.histories()[i]) || mask & (1 << j) != 0
                    })
            })
        })
        .collect()
}

#[test]
fn lowerset_subspaces_preserve_tips_and_inherit_tightness() {
    for space in [
        catalog::theta33(),
        catalog::theta21(),
        catalog::theta7(),
        catalog::middle(),
        catalog::trit1(),
    ] {
        let tight = space.is_tight();
        for mask in all_lowerset_masks(&space) {
            let sub = space.lowerset_subspace(mask).unwrap();
            for h in sub.histories() {
                assert_eq!(
                    sub.tips(h).unwrap(),
                    space.tips(h).unwrap(),
                    "tip set changed in a lowerset subspace"
                );
            }
            if tight {
                assert!(sub.is_tight(), "lowerset of a tight space must be tight");
            }
        }
    }
}

/// Brute-force completion oracle: every join-closed set between Ext(Θ) and
/// the sub-history universe whose prime members form a causally complete
/// space, filtered to inclusion-minimal ones.
fn brute_force_completions(space: &HistorySpace) -> Vec<HistorySpace> {
    let maximals: Vec<History> = space
        .maximal_ext()
        .into_iter()
        .map(|i| space.ext()[i].clone())
        .collect();
    let mut universe: BTreeSet<History> = BTreeSet::new();
    for k in &maximals {
        let dom = k.domain_mask();
        let events: Vec<usize> = (0..space.events().len())
            .filter(|&e| dom & (1 << e) != 0)
            .collect();
        for bits in 1u64..(1 << events.len()) {
            let mask = events
                .iter()
                .enumerate()
                .filter(|&(i, _)| bits & (1 << i) != 0)
                .fold(0u64, |m, (_, &e)| m | (1 << e));
            universe.insert(k.restrict(mask));
        }
    }
    let ext: BTreeSet<History> = space.ext().iter().cloned().collect();
    let slack: Vec<History> = universe.difference(&ext).cloned().collect();
    assert!(slack.len() <= 10, "oracle only runs on small slack");
    let mut candidates: Vec<BTreeSet<History>> = Vec::new();
    for bits in 0u64..(1 << slack.len()) {
        let mut s: BTreeSet<History> = ext.clone();
        for (i, h) in slack.iter().enumerate() {
            if bits & (1 << i) != 0 {
                s.insert(h.clone());
            }
        }
        let as_vec: Vec<History> = s.iter().cloned().collect();
        let closed: BTreeSet<History> = ext_closure(&as_vec).into_iter().collect();
        if closed != s {
            continue;
        }
        // Prime members regenerate the closure; completeness is checked on
        // the resulting space.
        let primes: Vec<History> = as_vec
            .iter()
            .filter(|h| {
                !as_vec.iter().enumerate().any(|(i, a)| {
                    a.lt(h)
                        && as_vec.iter().skip(i + 1).any(|b| {
                            b.lt(h) && a.compatible(b) && &a.join(b).unwrap() == *h
                        })
                })
            })
            .cloned()
            .collect();
        let candidate =
            HistorySpace::new(space.events().clone(), space.inputs().clone(), primes).unwrap();
        if candidate.ext().len() == s.len() && candidate.is_causally_complete() {
            candidates.push(s);
        }
    }
    candidates.sort_by_key(|s| s.len());
    let mut kept: Vec<BTreeSet<History>> = Vec::new();
    for cand in candidates {
        if !kept.iter().any(|k| k.is_subset(&cand)) {
            kept.push(cand);
        }
    }
    let mut out: Vec<HistorySpace> = kept
        .into_iter()
        .map(|s| {
            let as_vec: Vec<History> = s.iter().cloned().collect();
            let primes: Vec<History> = as_vec
                .iter()
                .filter(|h| {
                    !as_vec.iter().enumerate().any(|(i, a)| {
                        a.lt(h)
                            && as_vec.iter().skip(i + 1).any(|b| {
                                b.lt(h) && a.compatible(b) && &a.join(b).unwrap() == *h
                            })
                    })
                })
                .cloned()
                .collect();
            HistorySpace::new(space.events().clone(), space.inputs().clone(), primes).unwrap()
        })
        .collect();
    out.sort_by(|a, b| a.histories().cmp(b.histories()));
    out
}

#[test]
fn completion_search_matches_brute_force_on_small_slack_spaces() {
    for (name, space) in [
        ("fork", catalog::fork()),
        ("theta3", catalog::theta3()),
        ("theta3m", catalog::theta3_mirror()),
        ("theta17", catalog::theta17()),
        ("theta21", catalog::theta21()),
        ("theta7", catalog::theta7()),
        ("middle", catalog::middle()),
        ("total2", catalog::total2()),
        ("discrete2", catalog::discrete2()),
        ("single", catalog::single("A")),
    ] {
        let searched = space.enumerate_causal_completions().unwrap();
        let brute = brute_force_completions(&space);
        assert_eq!(
            searched, brute,
            "completion search disagrees with the brute-force oracle on {name}"
        );
    }
}

#[test]
fn completions_keep_maximal_elements_and_stay_below() {
    for space in [catalog::switch3(), catalog::theta3(), catalog::discrete2()] {
        let max_before: BTreeSet<&History> = space
            .maximal_ext()
            .into_iter()
            .map(|i| &space.ext()[i])
            .collect();
        for c in space.enumerate_causal_completions().unwrap() {
            assert!(c.is_causally_complete());
            assert!(c.le(&space).unwrap());
            assert!(c.validate_space().is_valid());
            let max_after: BTreeSet<History> = c
                .maximal_ext()
                .into_iter()
                .map(|i| c.ext()[i].clone())
                .collect();
            assert_eq!(
                max_after,
                max_before.iter().map(|&h| h.clone()).collect::<BTreeSet<_>>()
            );
        }
    }
}

#[test]
fn composition_preserves_free_choice_and_rejects_shared_events() {
    let a = catalog::single("A");
    let rest = {
        let events = EventSet::new(vec!["B", "C"]).unwrap();
        HistorySpace::new(
            events,
            Arity::uniform(2, 2).unwrap(),
            Arity::uniform(2, 2)
                .unwrap()
                .assignments_on(0b01)
                .into_iter()
                .chain(Arity::uniform(2, 2).unwrap().assignments_on(0b10))
                .collect(),
        )
        .unwrap()
    };
    let par = a.parallel_compose(&rest).unwrap();
    assert!(par.has_free_choice());
    let seq = a.sequential_compose(&rest).unwrap();
    assert!(seq.has_free_choice());
    // Same event name on both sides must be rejected.
    let clash = a.parallel_compose(&catalog::single("A"));
    assert!(clash.is_err());
}

#[test]
fn json_parsing_rejects_malformed_spaces() {
    let bad_inputs = serde_json::json!({
        "events": ["A", "B"],
        "inputs": {"A": 2},
        "histories": [{"A": 0}],
    });
    assert!(HistorySpace::from_json(&bad_inputs).is_err());
    let bad_value = serde_json::json!({
        "events": ["A"],
        "inputs": {"A": 2},
        "histories": [{"A": 5}],
    });
    assert!(HistorySpace::from_json(&bad_value).is_err());
    let unknown_event = serde_json::json!({
        "events": ["A"],
        "inputs": {"A": 2},
        "histories": [{"B": 0}],
    });
    assert!(HistorySpace::from_json(&unknown_event).is_err());
}
