//! Exhaustive cross-checks for the lowerset topology: the gluing
//! dichotomy against brute-forced compatible families, witness stability
//! under shrinking the closure element, and choice-independence of
//! family restriction.

use std::sync::Arc;

use causal_histories::catalog::{builtin_space, BUILTIN_SPACES};
use causal_histories::{
    classical_cover, cover_hierarchy, enumerate_causal_functions, enumerate_covers,
    find_solipsistic_witness, glue_compatible_family, is_sheaf, refines,
    restrict_family_to_cover, solipsistic_cover, standard_cover, validate_solipsistic_witness,
    Arity, CausalFunction, Cover, EventSet, History, HistorySpace, SolipsisticWitness,
};

fn hist(s: &str, width: usize) -> History {
    History::from_digit_string(s, width).unwrap()
}

fn space_from(names: &[&str], sizes: &[u8], rows: &[&str]) -> HistorySpace {
    let events = EventSet::new(names.to_vec()).unwrap();
    let inputs = Arity::new(sizes.to_vec()).unwrap();
    let histories = rows.iter().map(|r| hist(r, names.len())).collect();
    HistorySpace::new(events, inputs, histories).unwrap()
}

/// Smallest non-sheaf space: two overlapping two-event members whose
/// shared middle event forces equal outputs across disjoint downsets.
fn mini_conflict() -> HistorySpace {
    space_from(&["A", "B", "C"], &[1, 1, 1], &["00_", "_00"])
}

/// Non-sheaf space with only 24 nonempty lowersets: binary inputs at B,
/// a single input at A and C.
fn theta3_unary() -> HistorySpace {
    space_from(
        &["A", "B", "C"],
        &[1, 2, 1],
        &["0__", "__0", "00_", "01_", "_00", "_10"],
    )
}

fn rank(mask: u64, m: usize) -> usize {
    (mask & ((1u64 << m) - 1)).count_ones() as usize
}

fn agree(
    n_events: usize,
    mask_a: u64,
    fa: &CausalFunction,
    mask_b: u64,
    fb: &CausalFunction,
) -> bool {
    let mut it = mask_a & mask_b;
    while it != 0 {
        let m = it.trailing_zeros() as usize;
        it &= it - 1;
        for e in 0..n_events {
            if fa.value_at_member(rank(mask_a, m), e) != fb.value_at_member(rank(mask_b, m), e) {
                return false;
            }
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn family_rec(
    space: &Arc<HistorySpace>,
    opens: &[u64],
    fns: &[Vec<CausalFunction>],
    idx: usize,
    chosen: &mut Vec<(u64, CausalFunction)>,
    total: &mut u64,
    failing: &mut u64,
) {
    if idx == opens.len() {
        *total += 1;
        if glue_compatible_family(space, chosen).unwrap().is_none() {
            *failing += 1;
        }
        return;
    }
    let n_events = space.events().len();
    for f in &fns[idx] {
        if chosen
            .iter()
            .all(|(m, g)| agree(n_events, *m, g, opens[idx], f))
        {
            chosen.push((opens[idx], f.clone()));
            family_rec(space, opens, fns, idx + 1, chosen, total, failing);
            chosen.pop();
        }
    }
}

/// All pairwise-compatible families over the cover, with how many fail
/// to glue.
fn count_families(space: &Arc<HistorySpace>, cover: &Cover, outputs: &Arity) -> (u64, u64) {
    let fns: Vec<Vec<CausalFunction>> = cover
        .opens()
        .iter()
        .map(|&m| {
            let sub = Arc::new(space.lowerset_subspace(m).unwrap());
            enumerate_causal_functions(&sub, outputs).unwrap().collect()
        })
        .collect();
    let mut total = 0;
    let mut failing = 0;
    let mut chosen = Vec::new();
    family_rec(
        space,
        cover.opens(),
        &fns,
        0,
        &mut chosen,
        &mut total,
        &mut failing,
    );
    (total, failing)
}

#[test]
fn gluing_dichotomy_by_brute_force() {
    let cases: Vec<(&str, HistorySpace)> = vec![
        ("single", builtin_space("single").unwrap()),
        ("trit1", builtin_space("trit1").unwrap()),
        ("discrete2", builtin_space("discrete2").unwrap()),
        ("middle", builtin_space("middle").unwrap()),
        ("total2", builtin_space("total2").unwrap()),
        ("mini_conflict", mini_conflict()),
        ("theta3_unary", theta3_unary()),
    ];
    for (name, space) in cases {
        let space = Arc::new(space);
        let outputs = Arity::uniform(space.events().len(), 2).unwrap();
        let covers = enumerate_covers(&space).unwrap();
        assert!(!covers.is_empty(), "no covers on {name}");
        let mut any_failing = false;
        for cover in &covers {
            let (total, failing) = count_families(&space, cover, &outputs);
            assert!(total > 0, "no compatible families over a cover of {name}");
            if failing > 0 {
                any_failing = true;
            }
        }
        assert_eq!(
            !any_failing,
            is_sheaf(&space),
            "gluing dichotomy fails on {name}"
        );
    }
}

#[test]
fn witness_survives_shrinking_the_closure_element() {
    let mut hit = 0;
    for name in BUILTIN_SPACES {
        let space = builtin_space(name).unwrap();
        let Some(w) = find_solipsistic_witness(&space) else {
            continue;
        };
        hit += 1;
        for k2 in space.ext() {
            if w.h.leq(k2) && w.h_prime.leq(k2) && k2.leq(&w.k) {
                let shrunk = SolipsisticWitness {
                    k: k2.clone(),
                    ..w.clone()
                };
                assert!(
                    validate_solipsistic_witness(&space, &shrunk),
                    "shrunk witness fails on {name}"
                );
            }
        }
    }
    assert_eq!(hit, 5);
}

#[test]
fn hierarchy_extremes_on_the_reference_spaces() {
    for name in ["trit1", "discrete2", "middle", "total2"] {
        let space = builtin_space(name).unwrap();
        let h = cover_hierarchy(&space).unwrap();
        let min = h.minimum().expect("minimum exists");
        let max = h.maximum().expect("maximum exists");
        assert_eq!(h.covers[min], solipsistic_cover(&space).unwrap(), "{name}");
        assert_eq!(h.covers[max], classical_cover(&space).unwrap(), "{name}");
    }
}

#[test]
fn restriction_is_independent_of_the_containing_open() {
    let middle = Arc::new(builtin_space("middle").unwrap());
    let trit = Arc::new(builtin_space("trit1").unwrap());
    let trit_overlap = {
        let c = enumerate_covers(&trit)
            .unwrap()
            .into_iter()
            .find(|c| c.len() == 3 && c.opens().iter().all(|m| m.count_ones() == 2));
        c.expect("three-open overlapping cover exists")
    };
    let cases: Vec<(Arc<HistorySpace>, Cover, Cover)> = vec![
        (
            middle.clone(),
            standard_cover(&middle).unwrap(),
            solipsistic_cover(&middle).unwrap(),
        ),
        (
            trit.clone(),
            trit_overlap,
            solipsistic_cover(&trit).unwrap(),
        ),
    ];
    for (space, coarse, fine) in cases {
        assert!(refines(&fine, &coarse));
        let outputs = Arity::uniform(space.events().len(), 2).unwrap();
        let outs: Vec<u8> = (0..space.classes().len()).map(|i| (i % 2) as u8).collect();
        let f = CausalFunction::new(space.clone(), outputs, outs).unwrap();
        let family: Vec<(u64, CausalFunction)> = coarse
            .opens()
            .iter()
            .map(|&m| {
                let sub = Arc::new(space.lowerset_subspace(m).unwrap());
                (m, f.restrict(&sub).unwrap())
            })
            .collect();
        let restricted = restrict_family_to_cover(&space, &family, &fine).unwrap();
        for (v, g) in &restricted {
            let mut eligible = 0;
            for (u, fu) in &family {
                if v & !u != 0 {
                    continue;
                }
                eligible += 1;
                let sub = Arc::new(space.lowerset_subspace(*v).unwrap());
                let direct = fu.restrict(&sub).unwrap();
                assert_eq!(direct.class_outputs(), g.class_outputs());
            }
            assert!(eligible >= 1);
        }
        // At least one fine open must have had a genuine choice.
        let multi = fine
            .opens()
            .iter()
            .filter(|&&v| family.iter().filter(|(u, _)| v & !u == 0).count() > 1)
            .count();
        assert!(multi >= 1, "test case exercises no real choice");
    }
}
