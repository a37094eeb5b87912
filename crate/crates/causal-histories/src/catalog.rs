//! Named example spaces used across tests, scenarios, and the CLI.
//!
//! Every space here is on explicitly listed events with small input
//! alphabets; members are written as digit strings over the event list
//! (`_` marks events outside a history's domain).

use std::sync::Arc;

use crate::history::{Arity, History, InputFamily};
use crate::order::{CausalOrder, EventSet};
use crate::space::HistorySpace;

fn build(names: &[&str], sizes: &[u8], rows: &[&str]) -> HistorySpace {
    let events = EventSet::new(names.to_vec()).expect("valid names");
    let inputs = Arity::new(sizes.to_vec()).expect("valid sizes");
    let histories = rows
        .iter()
        .map(|r| History::from_digit_string(r, names.len()).expect("valid digits"))
        .collect();
    HistorySpace::new(events, inputs, histories).expect("valid space")
}

fn induced(names: &[&str], pairs: &[(usize, usize)], sizes: &[u8]) -> HistorySpace {
    let events = EventSet::new(names.to_vec()).expect("valid names");
    let order = CausalOrder::from_pairs(events, pairs).expect("valid pairs");
    let inputs = Arity::new(sizes.to_vec()).expect("valid sizes");
    HistorySpace::induced(&order, inputs).expect("valid space")
}

/// One binary event with the given name.
pub fn single(name: &str) -> HistorySpace {
    induced(&[name], &[], &[2])
}

/// One event with ternary inputs.
pub fn trit1() -> HistorySpace {
    induced(&["A"], &[], &[3])
}

/// Two causally unrelated binary events (no-signalling style).
pub fn discrete2() -> HistorySpace {
    induced(&["A", "B"], &[], &[2, 2])
}

/// Three causally unrelated binary events.
pub fn discrete3() -> HistorySpace {
    induced(&["A", "B", "C"], &[], &[2, 2, 2])
}

/// Two totally ordered binary events, A before B.
pub fn total2() -> HistorySpace {
    induced(&["A", "B"], &[(0, 1)], &[2, 2])
}

/// Three totally ordered binary events, A before B before C.
pub fn total3() -> HistorySpace {
    induced(&["A", "B", "C"], &[(0, 1), (1, 2)], &[2, 2, 2])
}

/// Three binary events with no definite order among them.
pub fn indiscrete3() -> HistorySpace {
    let events = EventSet::new(vec!["A", "B", "C"]).expect("valid names");
    let order = CausalOrder::indiscrete(events);
    HistorySpace::induced(&order, Arity::uniform(3, 2).unwrap()).expect("valid space")
}

/// A first, then B and C with no definite order between them.
pub fn switch3() -> HistorySpace {
    induced(
        &["A", "B", "C"],
        &[(0, 1), (0, 2), (1, 2), (2, 1)],
        &[2, 2, 2],
    )
}

/// A before B, with C unrelated; binary inputs.
pub fn theta33() -> HistorySpace {
    induced(&["A", "B", "C"], &[(0, 1)], &[2, 2, 2])
}

/// Tight but not order-induced: on A=0, B comes before C; on A=1, C
/// comes before B.
pub fn theta101() -> HistorySpace {
    build(
        &["A", "B", "C"],
        &[2, 2, 2],
        &[
            "0__", "1__", // A alone
            "00_", "01_", // A=0: B next
            "1_0", "1_1", // A=1: C next
            "000", "010", "001", "011", // A=0 totals
            "100", "110", "101", "111", // A=1 totals
        ],
    )
}

/// Mirror of `theta101`: on A=0, C comes first; on A=1, B comes first.
pub fn theta101_mirror() -> HistorySpace {
    build(
        &["A", "B", "C"],
        &[2, 2, 2],
        &[
            "0__", "1__",
            "0_0", "0_1", // A=0: C next
            "10_", "11_", // A=1: B next
            "000", "001", "010", "011",
            "100", "101", "110", "111",
        ],
    )
}

/// Causally complete but not tight: two doubleton constraint classes.
pub fn theta21() -> HistorySpace {
    build(
        &["A", "B", "C"],
        &[2, 2, 2],
        &[
            "0__", "1__", "_0_", "__0",
            "01_", "_10", "1_1", "_01",
            "111", "011",
        ],
    )
}

/// Causally complete but not tight: two 3-member constraint classes.
pub fn theta7() -> HistorySpace {
    build(
        &["A", "B", "C"],
        &[2, 2, 2],
        &[
            "0__", "_0_", "__0", "__1",
            "_10", "01_", "_11",
            "1_0", "10_", "1_1",
        ],
    )
}

/// Causally complete with exactly one solipsistic conflict pair.
pub fn theta17() -> HistorySpace {
    build(
        &["A", "B", "C"],
        &[2, 2, 2],
        &[
            "0__", "1__", "_1_", "__0",
            "00_", "10_", "1_1", "_11",
            "001",
        ],
    )
}

/// The meet of the A-before-B and C-before-B order-induced spaces: B's
/// causal past is ambiguous, giving four-member constraint classes.
pub fn theta3() -> HistorySpace {
    build(
        &["A", "B", "C"],
        &[2, 2, 2],
        &[
            "0__", "1__", "__0", "__1",
            "00_", "01_", "10_", "11_",
            "_00", "_10", "_01", "_11",
        ],
    )
}

/// Mirror of `theta3` on rotated roles: C's past is ambiguous between
/// B-before-C and A-before-C.
pub fn theta3_mirror() -> HistorySpace {
    build(
        &["A", "B", "C"],
        &[2, 2, 2],
        &[
            "0__", "1__", "_0_", "_1_",
            "0_0", "0_1", "1_0", "1_1",
            "_00", "_01", "_10", "_11",
        ],
    )
}

/// C first, then A and B independently.
pub fn fork() -> HistorySpace {
    induced(&["A", "B", "C"], &[(2, 0), (2, 1)], &[2, 2, 2])
}

/// A isolated; C before B. One of the two tight spaces below the fork
/// used as a marginal-lift target.
pub fn fork_ab() -> HistorySpace {
    induced(&["A", "B", "C"], &[(2, 1)], &[2, 2, 2])
}

/// B isolated; C before A. The other tight marginal-lift target.
pub fn fork_ba() -> HistorySpace {
    induced(&["A", "B", "C"], &[(2, 0)], &[2, 2, 2])
}

/// Two-event causally complete space strictly between the discrete and
/// total layers: B=1 sees A, B=0 does not.
pub fn middle() -> HistorySpace {
    build(&["A", "B"], &[2, 2], &["0_", "1_", "_0", "01", "11"])
}

/// Five events: A and B first and unrelated, then C after both, then D
/// and E after C on separate branches. D and E take a single fixed input.
pub fn cross() -> HistorySpace {
    induced(
        &["A", "B", "C", "D", "E"],
        &[(0, 2), (1, 2), (2, 3), (2, 4)],
        &[2, 2, 2, 1, 1],
    )
}

/// Builtin registry for the CLI and scenario loaders.
pub fn builtin_space(name: &str) -> Option<HistorySpace> {
    Some(match name {
        "single" => single("A"),
        "trit1" => trit1(),
        "discrete2" => discrete2(),
        "discrete3" => discrete3(),
        "total2" => total2(),
        "total3" => total3(),
        "indiscrete3" => indiscrete3(),
        "switch3" => switch3(),
        "theta33" => theta33(),
        "theta101" => theta101(),
        "theta101m" => theta101_mirror(),
        "theta21" => theta21(),
        "theta7" => theta7(),
        "theta17" => theta17(),
        "theta3" => theta3(),
        "theta3m" => theta3_mirror(),
        "fork" => fork(),
        "fork_ab" => fork_ab(),
        "fork_ba" => fork_ba(),
        "middle" => middle(),
        "cross" => cross(),
        _ => return None,
    })
}

/// Names accepted by [`builtin_space`], in listing order.
pub const BUILTIN_SPACES: &[&str] = &[
    "single",
    "trit1",
    "discrete2",
    "discrete3",
    "total2",
    "total3",
    "indiscrete3",
    "switch3",
    "theta33",
    "theta101",
    "theta101m",
    "theta21",
    "theta7",
    "theta17",
    "theta3",
    "theta3m",
    "fork",
    "fork_ab",
    "fork_ba",
    "middle",
    "cross",
];

/// Shared helper: binary event set plus arity for ad-hoc constructions.
pub fn binary_events(names: &[&str]) -> (Arc<EventSet>, InputFamily) {
    let events = EventSet::new(names.to_vec()).expect("valid names");
    let inputs = Arity::uniform(names.len(), 2).expect("valid arity");
    (events, inputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_are_valid_spaces() {
        for name in BUILTIN_SPACES {
            let space = builtin_space(name).unwrap();
            assert!(
                space.validate_space().is_valid(),
                "{name} has a join-reducible member"
            );
            assert!(!space.is_empty(), "{name} is empty");
        }
        assert!(builtin_space("no_such_space").is_none());
    }

    #[test]
    fn member_counts() {
        let expect = [
            ("single", 2),
            ("trit1", 3),
            ("discrete2", 4),
            ("discrete3", 6),
            ("total2", 6),
            ("total3", 14),
            ("indiscrete3", 8),
            ("switch3", 10),
            ("theta33", 8),
            ("theta101", 14),
            ("theta101m", 14),
            ("theta21", 10),
            ("theta7", 10),
            ("theta17", 9),
            ("theta3", 12),
            ("theta3m", 12),
            ("fork", 10),
            ("fork_ab", 8),
            ("fork_ba", 8),
            ("middle", 5),
            ("cross", 28),
        ];
        for (name, count) in expect {
            assert_eq!(
                builtin_space(name).unwrap().len(),
                count,
                "member count for {name}"
            );
        }
    }

    #[test]
    fn theta17_has_free_choice_and_is_complete() {
        let t = theta17();
        assert!(t.is_causally_complete());
        assert!(t.has_free_choice());
        assert!(!t.is_tight());
        assert_eq!(t.ext().len(), 21);
    }

    #[test]
    fn theta101_is_tight_complete_and_free() {
        for t in [theta101(), theta101_mirror()] {
            assert!(t.is_tight());
            assert!(t.is_causally_complete());
            assert!(t.has_free_choice());
            assert_eq!(t.ext().len(), 14);
        }
    }

    #[test]
    fn middle_space_maximals() {
        let m = middle();
        assert!(m.is_causally_complete());
        assert!(m.has_free_choice());
        let maximals = m.maximal_histories();
        assert_eq!(maximals.len(), 3);
        assert_eq!(m.ext().len(), 7);
    }

    #[test]
    fn cross_shape() {
        let c = cross();
        // A(2) + B(2) + ABC(8) + ABCD(8) + ABCE(8)
        assert_eq!(c.len(), 28);
        assert!(c.is_tight());
        assert!(c.is_causally_complete());
        assert!(c.has_free_choice());
    }
}
