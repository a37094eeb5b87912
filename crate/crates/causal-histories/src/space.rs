//! Spaces of input histories: a finite set of partial input assignments
//! closed against validation, its extension closure under compatible joins,
//! tip events, and the constraint classes that determine which causal
//! functions the space supports.
//!
//! Θ denotes the member set, Ext(Θ) its closure under compatible joins.
//! Every member of a well-formed space is join-prime in Ext(Θ): it is not
//! the join of two strictly smaller closure elements. `validate_space`
//! reports violations of that invariant rather than refusing construction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::history::{Arity, History, HistoryError, InputFamily};
use crate::order::{CausalOrder, EventId, EventSet, OrderError};

/// Guard for the completion search: the sub-history universe is capped.
const MAX_COMPLETION_UNIVERSE: usize = 4096;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("history {0} has an empty domain")]
    EmptyDomainHistory(String),
    #[error("history {0} is not a member of the space")]
    NotAMember(String),
    #[error("{0} is not a lowerset of the space")]
    NotALowerset(String),
    #[error("spaces live on different events or inputs")]
    MismatchedSpaces,
    #[error("completion universe has {0} histories (limit {1})")]
    UniverseTooLarge(usize, usize),
    #[error("invalid space JSON: {0}")]
    Json(String),
}

/// One constraint class: histories sharing a tip event that any causal
/// function must treat alike.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub event: EventId,
    /// Indices into the space's history list, ascending.
    pub members: Vec<usize>,
}

/// All constraint classes of a space, listed by (event, least member).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classes {
    entries: Vec<ClassEntry>,
    /// `by_tip[h][e]` is the class of history `h` at tip event `e`.
    by_tip: Vec<Vec<Option<u32>>>,
    /// `ext_tip[k][e]` is the class governing event `e` of closure element
    /// `k`: the class of any tip-history of `e` below `k`.
    ext_tip: Vec<Vec<Option<u32>>>,
}

impl Classes {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &ClassEntry {
        &self.entries[idx]
    }

    pub fn of_tip(&self, hist_idx: usize, event: EventId) -> Option<usize> {
        self.by_tip[hist_idx][event].map(|c| c as usize)
    }

    pub fn of_ext_event(&self, ext_idx: usize, event: EventId) -> Option<usize> {
        self.ext_tip[ext_idx][event].map(|c| c as usize)
    }

    pub fn all_singletons(&self) -> bool {
        self.entries.iter().all(|c| c.members.len() == 1)
    }
}

/// A space of input histories with its cached closure and class structure.
#[derive(Debug, Clone)]
pub struct HistorySpace {
    events: Arc<EventSet>,
    inputs: InputFamily,
    histories: Vec<History>,
    ext: Vec<History>,
    tips: Vec<u64>,
    classes: Classes,
}

impl PartialEq for HistorySpace {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
            && self.inputs == other.inputs
            && self.histories == other.histories
    }
}

impl Eq for HistorySpace {}

/// Closure of a history set under joins of compatible pairs.
pub fn ext_closure(histories: &[History]) -> Vec<History> {
    let mut set: BTreeSet<History> = histories.iter().cloned().collect();
    let mut frontier: Vec<History> = set.iter().cloned().collect();
    while let Some(h) = frontier.pop() {
        let joins: Vec<History> = set
            .iter()
            .filter(|o| h.compatible(o))
            .map(|o| h.join(o).expect("compatible pairs join"))
            .filter(|j| !set.contains(j))
            .collect();
        for j in joins {
            set.insert(j.clone());
            frontier.push(j);
        }
    }
    set.into_iter().collect()
}

impl HistorySpace {
    pub fn new(
        events: Arc<EventSet>,
        inputs: InputFamily,
        histories: Vec<History>,
    ) -> Result<Self, SpaceError> {
        if inputs.len() != events.len() {
            return Err(HistoryError::WidthMismatch(inputs.len(), events.len()).into());
        }
        let mut members: Vec<History> = Vec::new();
        for h in histories {
            h.in_range(&inputs)?;
            if h.is_empty() {
                return Err(SpaceError::EmptyDomainHistory(h.display(&events)));
            }
            members.push(h);
        }
        members.sort();
        members.dedup();
        let ext = ext_closure(&members);
        let tips = compute_tips(&members);
        let classes = compute_classes(&members, &ext, &tips, events.len());
        Ok(HistorySpace {
            events,
            inputs,
            histories: members,
            ext,
            tips,
            classes,
        })
    }

    /// The space induced by a causal order: one family of histories per
    /// event, with domain the event's causal past and all input values.
    pub fn induced(order: &CausalOrder, inputs: InputFamily) -> Result<Self, SpaceError> {
        let events = order.events().clone();
        let mut histories = Vec::new();
        for e in 0..events.len() {
            histories.extend(inputs.assignments_on(order.downset(e)));
        }
        Self::new(events, inputs, histories)
    }

    pub fn events(&self) -> &Arc<EventSet> {
        &self.events
    }

    pub fn inputs(&self) -> &InputFamily {
        &self.inputs
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    pub fn ext(&self) -> &[History] {
        &self.ext
    }

    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    pub fn history_index(&self, h: &History) -> Option<usize> {
        self.histories.binary_search(h).ok()
    }

    pub fn ext_index(&self, h: &History) -> Option<usize> {
        self.ext.binary_search(h).ok()
    }

    /// Tip events of a member: its domain minus the domains of all strictly
    /// smaller members.
    pub fn tips(&self, h: &History) -> Result<u64, SpaceError> {
        let idx = self
            .history_index(h)
            .ok_or_else(|| SpaceError::NotAMember(h.display(&self.events)))?;
        Ok(self.tips[idx])
    }

    pub fn tips_by_index(&self, idx: usize) -> u64 {
        self.tips[idx]
    }

    pub fn classes(&self) -> &Classes {
        &self.classes
    }

    /// Indices of maximal closure elements.
    pub fn maximal_ext(&self) -> Vec<usize> {
        maximal_indices(&self.ext)
    }

    /// Indices of maximal members.
    pub fn maximal_histories(&self) -> Vec<usize> {
        maximal_indices(&self.histories)
    }

    /// Every member has exactly one tip event.
    pub fn is_causally_complete(&self) -> bool {
        self.tips.iter().all(|t| t.count_ones() == 1)
    }

    /// Every constraint class is a singleton.
    pub fn is_tight(&self) -> bool {
        self.classes.all_singletons()
    }

    /// The maximal closure elements are exactly the total assignments.
    pub fn has_free_choice(&self) -> bool {
        let full = self.events.full_mask();
        let max = self.maximal_ext();
        max.len() as u64 == self.inputs.total_count()
            && max
                .iter()
                .all(|&i| self.ext[i].domain_mask() == full)
    }

    /// Reports members that are joins of two strictly smaller closure
    /// elements, as (member, left, right) triples.
    pub fn validate_space(&self) -> SpaceReport {
        let mut join_reducible = Vec::new();
        for h in &self.histories {
            'search: for a in self.ext.iter().filter(|&a| a.lt(h)) {
                for b in self.ext.iter().filter(|&b| b.lt(h)) {
                    if a < b && a.compatible(b) && &a.join(b).expect("compatible") == h {
                        join_reducible.push((h.clone(), a.clone(), b.clone()));
                        break 'search;
                    }
                }
            }
        }
        SpaceReport { join_reducible }
    }

    /// Space refinement: `self` is below `other` when it can emulate it,
    /// i.e. its closure contains the other's. Requires identical events
    /// and inputs.
    pub fn le(&self, other: &HistorySpace) -> Result<bool, SpaceError> {
        if self.events != other.events || self.inputs != other.inputs {
            return Err(SpaceError::MismatchedSpaces);
        }
        let mine: HashSet<&History> = self.ext.iter().collect();
        Ok(other.ext.iter().all(|h| mine.contains(h)))
    }

    /// Union on disjoint event sets: both operands side by side.
    pub fn parallel_compose(&self, other: &HistorySpace) -> Result<HistorySpace, SpaceError> {
        let (events, inputs) = merged_events(self, other)?;
        let n = events.len();
        let shift = self.events.len();
        let mut histories: Vec<History> =
            self.histories.iter().map(|h| h.shift(n, 0)).collect();
        histories.extend(other.histories.iter().map(|h| h.shift(n, shift)));
        HistorySpace::new(events, inputs, histories)
    }

    /// Everything in `self` happens first; `other` starts only after a
    /// maximal closure element of `self` is reached.
    pub fn sequential_compose(&self, other: &HistorySpace) -> Result<HistorySpace, SpaceError> {
        self.conditional_sequential_compose(|_| other.clone())
    }

    /// Sequential composition where the follow-up space may depend on the
    /// completed first stage. Every branch must share events and inputs.
    pub fn conditional_sequential_compose(
        &self,
        mut branch: impl FnMut(&History) -> HistorySpace,
    ) -> Result<HistorySpace, SpaceError> {
        let max = self.maximal_ext();
        let mut branches = Vec::with_capacity(max.len());
        for &k in &max {
            branches.push((self.ext[k].clone(), branch(&self.ext[k])));
        }
        let Some(first) = branches.first() else {
            return Err(SpaceError::MismatchedSpaces);
        };
        if branches
            .iter()
            .any(|(_, b)| b.events != first.1.events || b.inputs != first.1.inputs)
        {
            return Err(SpaceError::MismatchedSpaces);
        }
        let (events, inputs) = merged_events(self, &first.1)?;
        let n = events.len();
        let shift = self.events.len();
        let mut histories: Vec<History> =
            self.histories.iter().map(|h| h.shift(n, 0)).collect();
        for (k, b) in &branches {
            let k_wide = k.shift(n, 0);
            for h in b.histories() {
                histories.push(
                    k_wide
                        .join(&h.shift(n, shift))
                        .expect("disjoint domains are compatible"),
                );
            }
        }
        HistorySpace::new(events, inputs, histories)
    }

    /// The subspace on a down-closed set of members, given as indices.
    pub fn lowerset_subspace(&self, member_mask: u64) -> Result<HistorySpace, SpaceError> {
        let selected: Vec<usize> = (0..self.histories.len())
            .filter(|&i| member_mask & (1 << i) != 0)
            .collect();
        for &i in &selected {
            for j in 0..self.histories.len() {
                if self.histories[j].lt(&self.histories[i]) && member_mask & (1 << j) == 0 {
                    return Err(SpaceError::NotALowerset(format!(
                        "{} is missing {}",
                        self.histories[i].display(&self.events),
                        self.histories[j].display(&self.events)
                    )));
                }
            }
        }
        let histories: Vec<History> =
            selected.iter().map(|&i| self.histories[i].clone()).collect();
        HistorySpace::new(self.events.clone(), self.inputs.clone(), histories)
    }

    /// Principal lowerset of a member, as a member mask.
    pub fn downset_mask(&self, idx: usize) -> u64 {
        let mut m = 0;
        for (j, h) in self.histories.iter().enumerate() {
            if h.leq(&self.histories[idx]) {
                m |= 1 << j;
            }
        }
        m
    }

    /// All minimal causally complete spaces below `self` that keep the
    /// maximal closure elements. Searches by splitting one multi-tip
    /// history at one of its tips, closing, and recursing; the results are
    /// deduplicated by closure and filtered to inclusion-minimal ones.
    pub fn enumerate_causal_completions(&self) -> Result<Vec<HistorySpace>, SpaceError> {
        let max_idx = self.maximal_ext();
        let maximals: Vec<History> = max_idx.iter().map(|&i| self.ext[i].clone()).collect();
        // Sub-history universe: nonempty restrictions of maximal elements.
        let mut universe: BTreeSet<History> = BTreeSet::new();
        for k in &maximals {
            let dom = k.domain_mask();
            let events: Vec<usize> =
                (0..self.events.len()).filter(|&e| dom & (1 << e) != 0).collect();
            for bits in 1u64..(1 << events.len()) {
                let mask = events
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| bits & (1 << i) != 0)
                    .fold(0u64, |m, (_, &e)| m | (1 << e));
                universe.insert(k.restrict(mask));
            }
            if universe.len() > MAX_COMPLETION_UNIVERSE {
                return Err(SpaceError::UniverseTooLarge(
                    universe.len(),
                    MAX_COMPLETION_UNIVERSE,
                ));
            }
        }
        let max_set: BTreeSet<History> = maximals.iter().cloned().collect();

        let start: BTreeSet<History> = self.ext.iter().cloned().collect();
        let mut visited: HashSet<Vec<History>> = HashSet::new();
        let mut complete: Vec<BTreeSet<History>> = Vec::new();
        let mut stack = vec![start];
        while let Some(state) = stack.pop() {
            let key: Vec<History> = state.iter().cloned().collect();
            if !visited.insert(key) {
                continue;
            }
            // Maximal elements must be unchanged.
            let state_max: BTreeSet<History> = {
                let v: Vec<History> = state.iter().cloned().collect();
                maximal_indices(&v).into_iter().map(|i| v[i].clone()).collect()
            };
            if state_max != max_set {
                continue;
            }
            let elems: Vec<History> = state.iter().cloned().collect();
            let primes = prime_elements(&elems);
            // Tip sets relative to the whole closed state.
            let mut branched = false;
            for &p in &primes {
                let h = &elems[p];
                let mut covered = 0u64;
                for other in &elems {
                    if other.lt(h) {
                        covered |= other.domain_mask();
                    }
                }
                let tips = h.domain_mask() & !covered;
                if tips.count_ones() >= 2 {
                    for e in 0..self.events.len() {
                        if tips & (1 << e) == 0 {
                            continue;
                        }
                        let split = h.restrict(h.domain_mask() & !(1 << e));
                        let mut next: Vec<History> = state.iter().cloned().collect();
                        next.push(split);
                        let closed: BTreeSet<History> =
                            ext_closure(&next).into_iter().collect();
                        stack.push(closed);
                    }
                    branched = true;
                    break;
                }
            }
            if !branched {
                complete.push(state);
            }
        }
        // Keep inclusion-minimal closures only.
        complete.sort_by_key(|s| s.len());
        let mut kept: Vec<BTreeSet<History>> = Vec::new();
        for cand in complete {
            if !kept.iter().any(|k| k.is_subset(&cand)) {
                kept.push(cand);
            }
        }
        let mut out = Vec::new();
        for state in kept {
            let elems: Vec<History> = state.iter().cloned().collect();
            let members: Vec<History> = prime_elements(&elems)
                .into_iter()
                .map(|i| elems[i].clone())
                .collect();
            let space = HistorySpace::new(self.events.clone(), self.inputs.clone(), members)?;
            debug_assert_eq!(
                space.ext.len(),
                elems.len(),
                "prime members must regenerate the closed state"
            );
            out.push(space);
        }
        out.sort_by(|a, b| a.histories.cmp(&b.histories));
        Ok(out)
    }

    /// All total input assignments, each a maximal closure element exactly
    /// when the space has free choice.
    pub fn total_assignments(&self) -> Vec<History> {
        self.inputs.assignments_on(self.events.full_mask())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let inputs: serde_json::Map<String, serde_json::Value> = (0..self.events.len())
            .map(|e| {
                (
                    self.events.name(e).to_string(),
                    serde_json::json!(self.inputs.size(e)),
                )
            })
            .collect();
        serde_json::json!({
            "events": self.events.names(),
            "inputs": inputs,
            "histories": self
                .histories
                .iter()
                .map(|h| h.to_json(&self.events))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, SpaceError> {
        let obj = value
            .as_object()
            .ok_or_else(|| SpaceError::Json("expected an object".into()))?;
        let names = obj
            .get("events")
            .and_then(|v| v.as_array())
            .ok_or_else(|| SpaceError::Json("missing `events` array".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| SpaceError::Json("event names must be strings".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let events = EventSet::new(names)?;
        let input_obj = obj
            .get("inputs")
            .and_then(|v| v.as_object())
            .ok_or_else(|| SpaceError::Json("missing `inputs` object".into()))?;
        let mut sizes = vec![0u8; events.len()];
        for (name, v) in input_obj {
            let e = events
                .id(name)
                .ok_or_else(|| SpaceError::Json(format!("unknown event `{name}` in inputs")))?;
            sizes[e] = v
                .as_u64()
                .filter(|&s| s > 0 && s <= 250)
                .ok_or_else(|| SpaceError::Json(format!("bad input size for `{name}`")))?
                as u8;
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(SpaceError::Json("every event needs an input size".into()));
        }
        let inputs = Arity::new(sizes).map_err(SpaceError::History)?;
        let histories = obj
            .get("histories")
            .and_then(|v| v.as_array())
            .ok_or_else(|| SpaceError::Json("missing `histories` array".into()))?
            .iter()
            .map(|v| History::from_json(v, &events).map_err(SpaceError::History))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(events, inputs, histories)
    }

    /// DOT rendering of the member order (or of the closure with
    /// `include_ext`), Hasse edges only, tip events annotated on members.
    pub fn to_dot(&self, include_ext: bool) -> String {
        let nodes: &[History] = if include_ext { &self.ext } else { &self.histories };
        let mut out = String::from("digraph space {\n  rankdir=BT;\n  node [shape=box];\n");
        let label = |h: &History| -> String {
            let base = h.display(&self.events);
            match self.history_index(h) {
                Some(i) => {
                    let tips: Vec<&str> = (0..self.events.len())
                        .filter(|&e| self.tips[i] & (1 << e) != 0)
                        .map(|e| self.events.name(e))
                        .collect();
                    format!("{base}\\ntips: {}", tips.join(","))
                }
                None => base,
            }
        };
        for h in nodes {
            let shape = if self.history_index(h).is_some() {
                ""
            } else {
                " style=dashed"
            };
            let _ = writeln!(out, "  \"{}\"[{}];", label(h), shape.trim());
        }
        for a in nodes {
            for b in nodes {
                if !a.lt(b) {
                    continue;
                }
                let covered = nodes.iter().any(|c| a.lt(c) && c.lt(b));
                if !covered {
                    let _ = writeln!(out, "  \"{}\" -> \"{}\";", label(a), label(b));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Report from `validate_space`.
#[derive(Debug, Clone)]
pub struct SpaceReport {
    /// Members expressible as joins of strictly smaller closure elements,
    /// as (member, left, right).
    pub join_reducible: Vec<(History, History, History)>,
}

impl SpaceReport {
    pub fn is_valid(&self) -> bool {
        self.join_reducible.is_empty()
    }
}

fn merged_events(
    a: &HistorySpace,
    b: &HistorySpace,
) -> Result<(Arc<EventSet>, InputFamily), SpaceError> {
    let mut names: Vec<String> = a.events.names().to_vec();
    names.extend(b.events.names().iter().cloned());
    let events = EventSet::new(names)?;
    let mut sizes = a.inputs.sizes().to_vec();
    sizes.extend_from_slice(b.inputs.sizes());
    Ok((events, Arity::new(sizes).map_err(SpaceError::History)?))
}

fn maximal_indices(histories: &[History]) -> Vec<usize> {
    (0..histories.len())
        .filter(|&i| !histories.iter().any(|o| histories[i].lt(o)))
        .collect()
}

/// Indices of elements that are not joins of two strictly smaller elements.
fn prime_elements(elems: &[History]) -> Vec<usize> {
    (0..elems.len())
        .filter(|&i| {
            let h = &elems[i];
            !elems.iter().enumerate().any(|(a, ha)| {
                ha.lt(h)
                    && elems.iter().skip(a + 1).any(|hb| {
                        hb.lt(h)
                            && ha.compatible(hb)
                            && &ha.join(hb).expect("compatible") == h
                    })
            })
        })
        .collect()
}

fn compute_tips(histories: &[History]) -> Vec<u64> {
    histories
        .iter()
        .map(|h| {
            let mut covered = 0u64;
            for other in histories {
                if other.lt(h) {
                    covered |= other.domain_mask();
                }
            }
            h.domain_mask() & !covered
        })
        .collect()
}

fn compute_classes(
    histories: &[History],
    ext: &[History],
    tips: &[u64],
    n_events: usize,
) -> Classes {
    // Union-find over (history, tip event) pairs, one forest per event.
    let mut parent: Vec<usize> = (0..histories.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut entries = Vec::new();
    let mut by_tip = vec![vec![None; n_events]; histories.len()];
    for e in 0..n_events {
        let members: Vec<usize> = (0..histories.len())
            .filter(|&i| tips[i] & (1 << e) != 0)
            .collect();
        for i in 0..parent.len() {
            parent[i] = i;
        }
        // Two tip-histories sharing an upper bound in the closure are
        // constrained together.
        for (ai, &a) in members.iter().enumerate() {
            for &b in members.iter().skip(ai + 1) {
                if !histories[a].compatible(&histories[b]) {
                    continue;
                }
                let join = histories[a].join(&histories[b]).expect("compatible");
                if ext.iter().any(|k| join.leq(k)) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &m in &members {
            groups.entry(find(&mut parent, m)).or_default().push(m);
        }
        let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
        classes.sort_by_key(|c| c[0]);
        for members in classes {
            let idx = entries.len() as u32;
            for &m in &members {
                by_tip[m][e] = Some(idx);
            }
            entries.push(ClassEntry { event: e, members });
        }
    }
    // Sort entries by (event, least member); rebuild indices.
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by_key(|&i| (entries[i].event, entries[i].members[0]));
    let remap: HashMap<usize, u32> = order
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new as u32))
        .collect();
    let entries: Vec<ClassEntry> = order.iter().map(|&i| entries[i].clone()).collect();
    for row in &mut by_tip {
        for slot in row.iter_mut() {
            if let Some(c) = slot {
                *c = remap[&(*c as usize)];
            }
        }
    }
    // For each closure element and event in its domain, the governing
    // class: the class of a minimal member below it containing the event.
    let mut ext_tip = vec![vec![None; n_events]; ext.len()];
    for (ki, k) in ext.iter().enumerate() {
        let dom = k.domain_mask();
        for e in 0..n_events {
            if dom & (1 << e) == 0 {
                continue;
            }
            let mut found: Option<u32> = None;
            for (hi, h) in histories.iter().enumerate() {
                if h.leq(k) && tips[hi] & (1 << e) != 0 {
                    let c = by_tip[hi][e].expect("tip has a class");
                    debug_assert!(
                        found.is_none() || found == Some(c),
                        "tip-histories of one closure element agree on class"
                    );
                    found = Some(c);
                    if found.is_some() {
                        break;
                    }
                }
            }
            debug_assert!(found.is_some(), "every domain event has a tip-history");
            ext_tip[ki][e] = found;
        }
    }
    Classes {
        entries,
        by_tip,
        ext_tip,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn binary(n: usize) -> InputFamily {
        Arity::uniform(n, 2).unwrap()
    }

    #[test]
    fn total_order_space_on_three_events_has_fourteen_histories() {
        let ev = EventSet::new(vec!["A", "B", "C"]).unwrap();
        let order = CausalOrder::total(ev);
        let space = HistorySpace::induced(&order, binary(3)).unwrap();
        assert_eq!(space.len(), 14);
        assert_eq!(space.ext().len(), 14, "a chain's closure adds nothing");
        assert!(space.is_tight());
        assert!(space.is_causally_complete());
        assert!(space.has_free_choice());
        assert_eq!(space.classes().len(), 2 + 4 + 8);
    }

    #[test]
    fn fork_space_has_ten_histories_and_eighteen_closure_elements() {
        let space = catalog::fork();
        assert_eq!(space.len(), 10);
        assert_eq!(space.ext().len(), 18);
        assert!(space.is_tight());
        assert!(space.is_causally_complete());
        assert!(space.has_free_choice());
    }

    #[test]
    fn discrete_two_event_closure_adds_the_four_totals() {
        let ev = EventSet::new(vec!["A", "B"]).unwrap();
        let order = CausalOrder::discrete(ev);
        let space = HistorySpace::induced(&order, binary(2)).unwrap();
        assert_eq!(space.len(), 4);
        assert_eq!(space.ext().len(), 8);
        let full = space.events().full_mask();
        let totals = space
            .ext()
            .iter()
            .filter(|h| h.domain_mask() == full)
            .count();
        assert_eq!(totals, 4);
    }

    #[test]
    fn validate_reports_join_reducible_members() {
        let ev = EventSet::new(vec!["A", "B"]).unwrap();
        let histories = vec![
            History::from_entries(2, &[(0, 0)]),
            History::from_entries(2, &[(1, 0)]),
            History::from_entries(2, &[(0, 0), (1, 0)]),
        ];
        let space = HistorySpace::new(ev, binary(2), histories).unwrap();
        let report = space.validate_space();
        assert!(!report.is_valid());
        let (h, a, b) = &report.join_reducible[0];
        assert_eq!(a.join(b).unwrap(), *h);
    }

    #[test]
    fn tips_are_within_domains_and_nonempty() {
        for space in [
            catalog::theta33(),
            catalog::switch3(),
            catalog::theta7(),
            catalog::theta21(),
            catalog::theta3(),
            catalog::fork(),
        ] {
            for (i, h) in space.histories().iter().enumerate() {
                let tips = space.tips_by_index(i);
                assert_eq!(tips & !h.domain_mask(), 0);
                assert!(tips != 0, "members have at least one tip: {h:?}");
            }
        }
    }

    #[test]
    fn theta33_shape() {
        let space = catalog::theta33();
        assert_eq!(space.len(), 8);
        assert_eq!(space.ext().len(), 20);
        assert!(space.is_tight());
        assert!(space.is_causally_complete());
        assert!(space.has_free_choice());
        assert_eq!(space.classes().len(), 8);
    }

    #[test]
    fn switch3_shape() {
        let space = catalog::switch3();
        assert_eq!(space.len(), 10);
        assert_eq!(space.ext().len(), 10);
        assert!(space.is_tight());
        assert!(!space.is_causally_complete());
        assert!(space.has_free_choice());
        assert_eq!(space.classes().len(), 18);
    }

    #[test]
    fn theta21_is_complete_but_not_tight() {
        let space = catalog::theta21();
        assert_eq!(space.len(), 10);
        assert!(space.is_causally_complete());
        assert!(!space.is_tight());
        assert_eq!(space.classes().len(), 8);
        // Two doubleton classes, six singletons.
        let sizes: Vec<usize> = space
            .classes()
            .entries()
            .iter()
            .map(|c| c.members.len())
            .collect();
        assert_eq!(sizes.iter().filter(|&&s| s == 2).count(), 2);
        assert_eq!(sizes.iter().filter(|&&s| s == 1).count(), 6);
    }

    #[test]
    fn theta7_has_two_triple_classes() {
        let space = catalog::theta7();
        assert_eq!(space.len(), 10);
        assert!(space.is_causally_complete());
        assert!(!space.is_tight());
        assert_eq!(space.classes().len(), 6);
        let sizes: Vec<usize> = space
            .classes()
            .entries()
            .iter()
            .map(|c| c.members.len())
            .collect();
        assert_eq!(sizes.iter().filter(|&&s| s == 3).count(), 2);
        assert_eq!(sizes.iter().filter(|&&s| s == 1).count(), 4);
    }

    #[test]
    fn theta3_shape() {
        let space = catalog::theta3();
        assert_eq!(space.len(), 12);
        assert_eq!(space.ext().len(), 24);
        assert!(space.is_causally_complete());
        assert!(!space.is_tight());
        // Classes: A 2, C 2, and B merged into 2 four-member classes.
        assert_eq!(space.classes().len(), 6);
        let b = space.events().id("B").unwrap();
        let b_classes: Vec<&ClassEntry> = space
            .classes()
            .entries()
            .iter()
            .filter(|c| c.event == b)
            .collect();
        assert_eq!(b_classes.len(), 2);
        assert!(b_classes.iter().all(|c| c.members.len() == 4));
    }

    #[test]
    fn switch3_has_exactly_four_causal_completions() {
        let space = catalog::switch3();
        let completions = space.enumerate_causal_completions().unwrap();
        assert_eq!(completions.len(), 4);
        for c in &completions {
            assert!(c.is_causally_complete());
            assert!(c.le(&space).unwrap());
            assert!(c.validate_space().is_valid());
            assert_eq!(c.ext().len(), 14);
            assert_eq!(c.classes().len(), 14);
        }
        // Two are order-induced: B before C, or C before B, regardless of
        // the first input.
        let ev = space.events().clone();
        let abc = HistorySpace::induced(
            &CausalOrder::from_pairs(ev.clone(), &[(0, 1), (1, 2)]).unwrap(),
            binary(3),
        )
        .unwrap();
        let acb = HistorySpace::induced(
            &CausalOrder::from_pairs(ev, &[(0, 2), (2, 1)]).unwrap(),
            binary(3),
        )
        .unwrap();
        assert!(completions.contains(&abc));
        assert!(completions.contains(&acb));
        // The other two switch the inner order on the first input.
        assert!(completions.contains(&catalog::theta101()));
        let mirror: Vec<&HistorySpace> = completions
            .iter()
            .filter(|c| **c != abc && **c != acb && **c != catalog::theta101())
            .collect();
        assert_eq!(mirror.len(), 1);
    }

    #[test]
    fn complete_space_is_its_own_unique_completion() {
        let space = catalog::theta33();
        let completions = space.enumerate_causal_completions().unwrap();
        assert_eq!(completions.len(), 1);
        assert_eq!(completions[0], space);
    }

    #[test]
    fn parallel_composition_is_associative_up_to_layout() {
        let a = catalog::single("A");
        let b = catalog::single("B");
        let c = catalog::single("C");
        let left = a.parallel_compose(&b).unwrap().parallel_compose(&c).unwrap();
        let right = a.parallel_compose(&b.parallel_compose(&c).unwrap()).unwrap();
        assert_eq!(left, right);
        assert_eq!(left.len(), 6);
        assert_eq!(left.ext().len(), 26);
    }

    #[test]
    fn sequential_composition_reproduces_switch3() {
        let first = catalog::single("A");
        let ev = EventSet::new(vec!["B", "C"]).unwrap();
        let rest = HistorySpace::induced(&CausalOrder::indiscrete(ev), binary(2)).unwrap();
        let seq = first.sequential_compose(&rest).unwrap();
        assert_eq!(seq, catalog::switch3());
    }

    #[test]
    fn conditional_composition_reproduces_theta101() {
        let first = catalog::single("A");
        let ev = EventSet::new(vec!["B", "C"]).unwrap();
        let bc = HistorySpace::induced(
            &CausalOrder::from_pairs(ev.clone(), &[(0, 1)]).unwrap(),
            binary(2),
        )
        .unwrap();
        let cb = HistorySpace::induced(
            &CausalOrder::from_pairs(ev, &[(1, 0)]).unwrap(),
            binary(2),
        )
        .unwrap();
        let cond = first
            .conditional_sequential_compose(|k| {
                if k.get(0) == Some(0) {
                    bc.clone()
                } else {
                    cb.clone()
                }
            })
            .unwrap();
        assert_eq!(cond, catalog::theta101());
    }

    #[test]
    fn lowerset_subspace_requires_down_closure_and_preserves_tips() {
        let space = catalog::theta33();
        // Downset of a two-event history.
        let idx = space
            .history_index(&History::from_entries(3, &[(0, 0), (1, 0)]))
            .unwrap();
        let mask = space.downset_mask(idx);
        let sub = space.lowerset_subspace(mask).unwrap();
        assert_eq!(sub.len(), 2);
        for h in sub.histories() {
            assert_eq!(
                sub.tips(h).unwrap(),
                space.tips(h).unwrap(),
                "tips must be preserved in lowerset subspaces"
            );
        }
        // A non-down-closed pick errors.
        let top_only = 1 << idx;
        assert!(matches!(
            space.lowerset_subspace(top_only),
            Err(SpaceError::NotALowerset(_))
        ));
    }

    #[test]
    fn space_order_is_closure_containment() {
        let space = catalog::switch3();
        let completions = space.enumerate_causal_completions().unwrap();
        for c in &completions {
            assert!(c.le(&space).unwrap());
            assert!(!space.le(c).unwrap());
        }
        let fork = catalog::fork();
        assert!(!space.le(&fork).unwrap());
        assert!(!fork.le(&space).unwrap());
        let other = catalog::middle();
        assert!(matches!(space.le(&other), Err(SpaceError::MismatchedSpaces)));
    }

    #[test]
    fn induced_spaces_have_free_choice_on_small_binary_orders() {
        let ev = EventSet::new(vec!["A", "B", "C"]).unwrap();
        for order in crate::order::enumerate_orders(&ev, Some(4)).unwrap() {
            let space = HistorySpace::induced(&order, binary(3)).unwrap();
            assert!(space.has_free_choice(), "induced space lost free choice");
            assert!(space.validate_space().is_valid());
        }
    }

    #[test]
    fn json_round_trip_preserves_the_space() {
        for space in [catalog::theta33(), catalog::switch3(), catalog::theta17()] {
            let back = HistorySpace::from_json(&space.to_json()).unwrap();
            assert_eq!(back, space);
        }
    }
}
