//! Lowerset topology on a history space: enumeration of opens and open
//! covers, the refinement order, gluing of compatible function families,
//! and the conflict-pair witnesses that mark spaces whose contextual
//! functions fail to glue.
//!
//! Opens are lowersets of the member order, encoded as `u64` bitmasks
//! over member indices; every operation here guards the space size
//! accordingly.

use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::func::{CausalFunction, FuncError};
use crate::history::History;
use crate::order::EventId;
use crate::space::{HistorySpace, SpaceError};

/// Member-count ceiling for mask-encoded topology work.
pub const MAX_TOPOLOGY_MEMBERS: usize = 63;

/// Ceiling on the number of lowersets a single space may enumerate.
pub const MAX_LOWERSETS: usize = 100_000;

/// Ceiling on the lowerset count admitted to cover enumeration.
pub const MAX_COVER_LOWERSETS: usize = 63;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("space has more than {0} members")]
    TooManyMembers(usize),
    #[error("lowerset count exceeds bound {0}")]
    BoundExceeded(usize),
    #[error("mask {0:#x} is not a lowerset of the space")]
    NotALowerset(u64),
    #[error("cover opens must be nonempty")]
    EmptyOpen,
    #[error("cover opens {0} and {1} are comparable")]
    ComparableOpens(usize, usize),
    #[error("cover opens do not exhaust the space")]
    UnionIncomplete,
    #[error("function family: {0}")]
    Family(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Func(#[from] FuncError),
}

fn check_size(space: &HistorySpace) -> Result<(), CoverError> {
    if space.len() > MAX_TOPOLOGY_MEMBERS {
        return Err(CoverError::TooManyMembers(MAX_TOPOLOGY_MEMBERS));
    }
    Ok(())
}

fn full_mask(space: &HistorySpace) -> u64 {
    (1u64 << space.len()) - 1
}

/// Whether `mask` selects a down-closed member set.
pub fn is_lowerset(space: &HistorySpace, mask: u64) -> bool {
    if space.len() > MAX_TOPOLOGY_MEMBERS || mask & !full_mask(space) != 0 {
        return false;
    }
    let mut it = mask;
    while it != 0 {
        let i = it.trailing_zeros() as usize;
        it &= it - 1;
        if space.downset_mask(i) & !mask != 0 {
            return false;
        }
    }
    true
}

fn rec_lowersets(
    i: usize,
    cur: u64,
    down: &[u64],
    out: &mut Vec<u64>,
) -> Result<(), CoverError> {
    if i == down.len() {
        if cur != 0 {
            if out.len() >= MAX_LOWERSETS {
                return Err(CoverError::BoundExceeded(MAX_LOWERSETS));
            }
            out.push(cur);
        }
        return Ok(());
    }
    rec_lowersets(i + 1, cur, down, out)?;
    // A member may join only once its strict predecessors are present;
    // canonical member order lists predecessors first.
    if down[i] & !(1 << i) & !cur == 0 {
        rec_lowersets(i + 1, cur | (1 << i), down, out)?;
    }
    Ok(())
}

/// All nonempty lowersets of the member order, sorted by size then mask.
pub fn enumerate_lowersets(space: &HistorySpace) -> Result<Vec<u64>, CoverError> {
    check_size(space)?;
    let down: Vec<u64> = (0..space.len()).map(|i| space.downset_mask(i)).collect();
    let mut out = Vec::new();
    rec_lowersets(0, 0, &down, &mut out)?;
    out.sort_by_key(|&m| (m.count_ones(), m));
    Ok(out)
}

/// Whether a nonempty lowerset is union-prime, i.e. not the union of two
/// strictly smaller lowersets. These are exactly the principal downsets:
/// a lowerset is union-prime iff it has a unique maximal member.
pub fn is_union_prime(space: &HistorySpace, mask: u64) -> bool {
    if mask == 0 || !is_lowerset(space, mask) {
        return false;
    }
    let mut maximal = 0usize;
    let mut it = mask;
    while it != 0 {
        let i = it.trailing_zeros() as usize;
        it &= it - 1;
        let hi = &space.histories()[i];
        let mut jt = mask;
        let mut is_max = true;
        while jt != 0 {
            let j = jt.trailing_zeros() as usize;
            jt &= jt - 1;
            if j != i && hi.lt(&space.histories()[j]) {
                is_max = false;
                break;
            }
        }
        if is_max {
            maximal += 1;
        }
    }
    maximal == 1
}

/// An open cover: pairwise incomparable nonempty lowersets whose union is
/// the whole member set. Opens are kept sorted by size then mask.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cover {
    opens: Vec<u64>,
}

impl Cover {
    pub fn new(space: &HistorySpace, mut opens: Vec<u64>) -> Result<Self, CoverError> {
        check_size(space)?;
        opens.sort_by_key(|&m| (m.count_ones(), m));
        opens.dedup();
        let mut union = 0u64;
        for (i, &m) in opens.iter().enumerate() {
            if m == 0 {
                return Err(CoverError::EmptyOpen);
            }
            if !is_lowerset(space, m) {
                return Err(CoverError::NotALowerset(m));
            }
            for (j, &m2) in opens.iter().enumerate().skip(i + 1) {
                if m & !m2 == 0 || m2 & !m == 0 {
                    return Err(CoverError::ComparableOpens(i, j));
                }
            }
            union |= m;
        }
        if union != full_mask(space) {
            return Err(CoverError::UnionIncomplete);
        }
        Ok(Cover { opens })
    }

    pub fn opens(&self) -> &[u64] {
        &self.opens
    }

    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    /// Opens as arrays of member display strings.
    pub fn to_json(&self, space: &HistorySpace) -> Value {
        Value::Array(
            self.opens
                .iter()
                .map(|&m| lowerset_to_json(space, m))
                .collect(),
        )
    }
}

/// One lowerset as an array of member display strings.
pub fn lowerset_to_json(space: &HistorySpace, mask: u64) -> Value {
    let mut rows = Vec::new();
    let mut it = mask;
    while it != 0 {
        let i = it.trailing_zeros() as usize;
        it &= it - 1;
        rows.push(Value::String(
            space.histories()[i].display(space.events()),
        ));
    }
    Value::Array(rows)
}

/// Downsets of the maximal closure elements, cut to the member set.
pub fn standard_cover(space: &HistorySpace) -> Result<Cover, CoverError> {
    check_size(space)?;
    let opens = space
        .maximal_ext()
        .into_iter()
        .map(|t| {
            let top = &space.ext()[t];
            let mut m = 0u64;
            for (i, h) in space.histories().iter().enumerate() {
                if h.leq(top) {
                    m |= 1 << i;
                }
            }
            m
        })
        .collect();
    Cover::new(space, opens)
}

/// Principal downsets of the maximal members.
pub fn solipsistic_cover(space: &HistorySpace) -> Result<Cover, CoverError> {
    check_size(space)?;
    let opens = space
        .maximal_histories()
        .into_iter()
        .map(|i| space.downset_mask(i))
        .collect();
    Cover::new(space, opens)
}

/// The one-open cover by the whole space.
pub fn classical_cover(space: &HistorySpace) -> Result<Cover, CoverError> {
    check_size(space)?;
    Cover::new(space, vec![full_mask(space)])
}

/// Whether every open of `finer` lies inside some open of `coarser`.
pub fn refines(finer: &Cover, coarser: &Cover) -> bool {
    finer
        .opens
        .iter()
        .all(|&v| coarser.opens.iter().any(|&u| v & !u == 0))
}

fn rec_covers(
    low: &[u64],
    comp: &[u64],
    full: u64,
    first: usize,
    allowed: u64,
    union: u64,
    chosen: &mut Vec<u64>,
    out: &mut Vec<Cover>,
) {
    if union == full {
        out.push(Cover {
            opens: chosen.clone(),
        });
    }
    let mut rest = union;
    let tail = if first >= 64 {
        0
    } else {
        allowed & !((1u64 << first) - 1)
    };
    let mut it = tail;
    while it != 0 {
        let j = it.trailing_zeros() as usize;
        it &= it - 1;
        rest |= low[j];
    }
    if rest != full {
        return;
    }
    let mut it = tail;
    while it != 0 {
        let j = it.trailing_zeros() as usize;
        it &= it - 1;
        chosen.push(low[j]);
        rec_covers(
            low,
            comp,
            full,
            j + 1,
            allowed & !comp[j],
            union | low[j],
            chosen,
            out,
        );
        chosen.pop();
    }
}

/// All open covers whose opens each contain at least one maximal member,
/// in a fixed deterministic order: depth-first inclusion over the
/// lowersets sorted by size then mask, pruning branches that can no
/// longer exhaust the member set.
///
/// Opens lying entirely below the maximal members are excluded from
/// enumeration: every member of such an open also lies in another open
/// of the same cover, so a family's data there is determined by the
/// rest of the family. `Cover::new` itself accepts covers that use
/// such opens.
pub fn enumerate_covers(space: &HistorySpace) -> Result<Vec<Cover>, CoverError> {
    let max_mask = space
        .maximal_histories()
        .into_iter()
        .fold(0u64, |acc, i| acc | (1 << i));
    let low: Vec<u64> = enumerate_lowersets(space)?
        .into_iter()
        .filter(|&m| m & max_mask != 0)
        .collect();
    if low.len() > MAX_COVER_LOWERSETS {
        return Err(CoverError::BoundExceeded(MAX_COVER_LOWERSETS));
    }
    let comp: Vec<u64> = (0..low.len())
        .map(|i| {
            let mut m = 0u64;
            for (j, &l) in low.iter().enumerate() {
                if low[i] & !l == 0 || l & !low[i] == 0 {
                    m |= 1 << j;
                }
            }
            m
        })
        .collect();
    let allowed = if low.len() == 64 {
        u64::MAX
    } else {
        (1u64 << low.len()) - 1
    };
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    rec_covers(
        &low,
        &comp,
        full_mask(space),
        0,
        allowed,
        0,
        &mut chosen,
        &mut out,
    );
    Ok(out)
}

/// All covers of a space together with the immediate refinement steps.
#[derive(Debug, Clone)]
pub struct CoverHierarchy {
    pub covers: Vec<Cover>,
    /// `(i, j)` when `covers[i]` refines `covers[j]` with nothing strictly
    /// between them.
    pub edges: Vec<(usize, usize)>,
}

/// Enumerate the covers of a space and the Hasse diagram of refinement.
pub fn cover_hierarchy(space: &HistorySpace) -> Result<CoverHierarchy, CoverError> {
    let covers = enumerate_covers(space)?;
    let n = covers.len();
    let mut below = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && refines(&covers[i], &covers[j]) {
                below[i][j] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if below[i][j] && !(0..n).any(|k| below[i][k] && below[k][j]) {
                edges.push((i, j));
            }
        }
    }
    Ok(CoverHierarchy { covers, edges })
}

impl CoverHierarchy {
    fn extreme(&self, min: bool) -> Option<usize> {
        let hits: Vec<usize> = (0..self.covers.len())
            .filter(|&i| {
                self.covers.iter().all(|c| {
                    if min {
                        refines(&self.covers[i], c)
                    } else {
                        refines(c, &self.covers[i])
                    }
                })
            })
            .collect();
        match hits.as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }

    /// Index of the unique cover refining every other, if any.
    pub fn minimum(&self) -> Option<usize> {
        self.extreme(true)
    }

    /// Index of the unique cover refined by every other, if any.
    pub fn maximum(&self) -> Option<usize> {
        self.extreme(false)
    }

    /// Hasse diagram in DOT, edges pointing from finer to coarser.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph covers {\n  rankdir=BT;\n");
        for (i, c) in self.covers.iter().enumerate() {
            s.push_str(&format!("  c{i} [label=\"#{i} ({} opens)\"];\n", c.len()));
        }
        for &(i, j) in &self.edges {
            s.push_str(&format!("  c{i} -> c{j};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Position of member `m` within the subspace selected by `mask`.
fn rank(mask: u64, m: usize) -> usize {
    (mask & ((1u64 << m) - 1)).count_ones() as usize
}

/// Member-wise value agreement of two functions on the overlap of their
/// opens. Tip sets agree between a space and its lowerset subspaces, so
/// this is exactly equality of the two restrictions.
fn agree_on_overlap(
    mask_a: u64,
    fa: &CausalFunction,
    mask_b: u64,
    fb: &CausalFunction,
    n_events: usize,
) -> bool {
    let mut it = mask_a & mask_b;
    while it != 0 {
        let m = it.trailing_zeros() as usize;
        it &= it - 1;
        let (ra, rb) = (rank(mask_a, m), rank(mask_b, m));
        for e in 0..n_events {
            if fa.value_at_member(ra, e) != fb.value_at_member(rb, e) {
                return false;
            }
        }
    }
    true
}

/// Glue a compatible family of functions on lowerset opens.
///
/// Returns the unique function on the union of the opens restricting to
/// every family member, or `None` when the merged per-event constraints
/// conflict and no such function exists. Errors on families that are
/// malformed or pairwise incompatible.
pub fn glue_compatible_family(
    space: &Arc<HistorySpace>,
    family: &[(u64, CausalFunction)],
) -> Result<Option<CausalFunction>, CoverError> {
    check_size(space)?;
    if family.is_empty() {
        return Err(CoverError::Family("family is empty".into()));
    }
    let outputs = family[0].1.outputs().clone();
    let n_events = space.events().len();
    for (mask, f) in family {
        if *mask == 0 || !is_lowerset(space, *mask) {
            return Err(CoverError::NotALowerset(*mask));
        }
        if f.outputs() != &outputs {
            return Err(CoverError::Family(
                "family members disagree on output arities".into(),
            ));
        }
        let sub = space.lowerset_subspace(*mask)?;
        if f.space().as_ref() != &sub {
            return Err(CoverError::Family(format!(
                "function is not defined on the subspace of mask {mask:#x}"
            )));
        }
    }
    for (i, (mask_a, fa)) in family.iter().enumerate() {
        for (mask_b, fb) in family.iter().skip(i + 1) {
            if !agree_on_overlap(*mask_a, fa, *mask_b, fb, n_events) {
                return Err(CoverError::Family(
                    "family members disagree on an overlap".into(),
                ));
            }
        }
    }
    let union = family.iter().fold(0u64, |acc, (m, _)| acc | m);
    let usub = Arc::new(space.lowerset_subspace(union)?);
    let sel: Vec<usize> = (0..space.len()).filter(|&i| union & (1 << i) != 0).collect();
    let classes = usub.classes();
    let mut vals = vec![0u8; classes.len()];
    for (c, entry) in classes.entries().iter().enumerate() {
        let mut assigned: Option<u8> = None;
        for &u_idx in &entry.members {
            let theta_idx = sel[u_idx];
            for (mask, f) in family {
                if mask & (1 << theta_idx) == 0 {
                    continue;
                }
                let v = f
                    .value_at_member(rank(*mask, theta_idx), entry.event)
                    .expect("tip sets agree across lowersets of one space");
                match assigned {
                    None => assigned = Some(v),
                    Some(prev) if prev == v => {}
                    Some(_) => return Ok(None),
                }
            }
        }
        vals[c] = assigned.expect("every class member lies in some family open");
    }
    Ok(Some(CausalFunction::new(usub, outputs, vals)?))
}

/// Restrict a family of functions on (at least) the opens of one cover to
/// a finer cover: each target open receives the restriction of a family
/// function whose open contains it. The result is independent of which
/// containing open is chosen.
pub fn restrict_family_to_cover(
    space: &Arc<HistorySpace>,
    family: &[(u64, CausalFunction)],
    target: &Cover,
) -> Result<Vec<(u64, CausalFunction)>, CoverError> {
    check_size(space)?;
    let mut out = Vec::new();
    for &v in target.opens() {
        let Some((_, f)) = family.iter().find(|(u, _)| v & !u == 0) else {
            return Err(CoverError::Family(format!(
                "target open {v:#x} lies in no family open"
            )));
        };
        let sub = Arc::new(space.lowerset_subspace(v)?);
        out.push((v, f.restrict(&sub)?));
    }
    Ok(out)
}

/// A conflict certificate for gluing: a closure element `k`, an event of
/// its domain, and two distinct members below `k` whose outputs at that
/// event are forced equal, yet with no member between their pair and `k`.
/// A space admits such a witness exactly when functions with at least two
/// output values per event fail to form a sheaf over its lowersets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolipsisticWitness {
    pub k: History,
    pub omega: EventId,
    pub h: History,
    pub h_prime: History,
}

impl SolipsisticWitness {
    pub fn to_json(&self, space: &HistorySpace) -> Value {
        json!({
            "k": self.k.display(space.events()),
            "omega": space.events().name(self.omega),
            "h": self.h.display(space.events()),
            "h_prime": self.h_prime.display(space.events()),
        })
    }
}

/// Check every clause of the witness definition.
pub fn validate_solipsistic_witness(space: &HistorySpace, w: &SolipsisticWitness) -> bool {
    if space.ext_index(&w.k).is_none() {
        return false;
    }
    if w.omega >= space.events().len() || w.k.get(w.omega).is_none() {
        return false;
    }
    let (Some(i), Some(j)) = (
        space.history_index(&w.h),
        space.history_index(&w.h_prime),
    ) else {
        return false;
    };
    if i == j || !w.h.leq(&w.k) || !w.h_prime.leq(&w.k) {
        return false;
    }
    let classes = space.classes();
    match (classes.of_tip(i, w.omega), classes.of_tip(j, w.omega)) {
        (Some(a), Some(b)) if a == b => {}
        _ => return false,
    }
    // No member may interpose between the pair and k.
    !space
        .histories()
        .iter()
        .any(|h2| w.h.leq(h2) && w.h_prime.leq(h2) && h2.leq(&w.k))
}

/// First witness in deterministic order: events ascending, then member
/// pairs ascending, then minimal common upper bounds in closure order. A
/// minimal upper bound outside the member set always satisfies the
/// no-interposition clause, and some pair has one whenever any witness
/// exists at all.
pub fn find_solipsistic_witness(space: &HistorySpace) -> Option<SolipsisticWitness> {
    let classes = space.classes();
    let n = space.len();
    for omega in 0..space.events().len() {
        for i in 0..n {
            let Some(ci) = classes.of_tip(i, omega) else {
                continue;
            };
            for j in (i + 1)..n {
                if classes.of_tip(j, omega) != Some(ci) {
                    continue;
                }
                let hi = &space.histories()[i];
                let hj = &space.histories()[j];
                let ubs: Vec<usize> = space
                    .ext()
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| hi.leq(k) && hj.leq(k))
                    .map(|(idx, _)| idx)
                    .collect();
                for &k in &ubs {
                    let kh = &space.ext()[k];
                    let minimal = ubs
                        .iter()
                        .all(|&k2| k2 == k || !space.ext()[k2].lt(kh));
                    if minimal && space.history_index(kh).is_none() {
                        return Some(SolipsisticWitness {
                            k: kh.clone(),
                            omega,
                            h: hi.clone(),
                            h_prime: hj.clone(),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Every witness with the member pair in canonical order, listed by
/// event, pair, then closure element.
pub fn enumerate_solipsistic_witnesses(space: &HistorySpace) -> Vec<SolipsisticWitness> {
    let n = space.len();
    let mut out = Vec::new();
    for omega in 0..space.events().len() {
        for i in 0..n {
            for j in (i + 1)..n {
                for k in space.ext() {
                    let w = SolipsisticWitness {
                        k: k.clone(),
                        omega,
                        h: space.histories()[i].clone(),
                        h_prime: space.histories()[j].clone(),
                    };
                    if validate_solipsistic_witness(space, &w) {
                        out.push(w);
                    }
                }
            }
        }
    }
    out
}

/// Whether functions with at least two output values per event glue over
/// every cover of the lowerset topology. Tight spaces always do.
pub fn is_sheaf(space: &HistorySpace) -> bool {
    find_solipsistic_witness(space).is_none()
}
