//! Finite preorders on named events ("causal orders"), stored as closed
//! relations over bitmasks, together with their lattices of lowersets and
//! exhaustive enumeration of all preorders on a small labeled event set.
//!
//! A causal order is any reflexive transitive relation; antisymmetry is not
//! required, and a cycle between distinct events ("indefinite" causal
//! relation) is legal. Orders on the same event set themselves form a
//! lattice under relation containment: join is the transitive closure of the
//! union, meet is plain intersection (which is already a preorder).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

/// Dense index into an [`EventSet`].
pub type EventId = usize;

/// Hard cap on event count so that event subsets fit in a `u64` bitmask.
pub const MAX_EVENTS: usize = 64;

/// Cap on lowerset enumeration; `2^n` subsets are scanned.
const MAX_LOWERSET_EVENTS: usize = 20;

#[derive(Debug, Error)]
pub enum OrderError {
    #[error("duplicate event name `{0}`")]
    DuplicateEvent(String),
    #[error("empty event name")]
    EmptyEventName,
    #[error("event id {0} out of range for {1} events")]
    BadEventId(EventId, usize),
    #[error("too many events: {0} (limit {1})")]
    TooManyEvents(usize, usize),
    #[error("operands live on different event sets")]
    MismatchedEvents,
    #[error("enumeration over {0} events exceeds the bound of {1}")]
    EnumerationBound(usize, usize),
    #[error("invalid order JSON: {0}")]
    Json(String),
}

/// Immutable list of distinct event names; the position is the event id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventSet {
    names: Vec<String>,
}

impl EventSet {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Arc<Self>, OrderError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_EVENTS {
            return Err(OrderError::TooManyEvents(names.len(), MAX_EVENTS));
        }
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(OrderError::EmptyEventName);
            }
            if !seen.insert(n.clone()) {
                return Err(OrderError::DuplicateEvent(n.clone()));
            }
        }
        Ok(Arc::new(EventSet { names }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: EventId) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.names.iter().position(|n| n == name)
    }

    /// Mask with one bit per event.
    pub fn full_mask(&self) -> u64 {
        if self.names.is_empty() {
            0
        } else {
            (u64::MAX >> (64 - self.names.len())) & u64::MAX
        }
    }
}

/// How two events of a causal order relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    /// The same event.
    Equal,
    /// First strictly precedes second (and not conversely).
    Precedes,
    /// Second strictly precedes first (and not conversely).
    Succeeds,
    /// Related both ways: a cycle between distinct events.
    Indefinite,
    /// Related neither way.
    Unrelated,
}

/// A preorder on an event set, stored reflexively and transitively closed.
///
/// `succ[i]` is the bitmask of all `j` with `i` preceding-or-equal `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CausalOrder {
    events: Arc<EventSet>,
    succ: Vec<u64>,
}

impl CausalOrder {
    /// Builds the least preorder containing the given `(before, after)`
    /// pairs: sets the pairs, adds reflexivity, and closes transitively.
    pub fn from_pairs(
        events: Arc<EventSet>,
        pairs: &[(EventId, EventId)],
    ) -> Result<Self, OrderError> {
        let n = events.len();
        let mut succ = vec![0u64; n];
        for (i, s) in succ.iter_mut().enumerate() {
            *s = 1 << i;
        }
        for &(a, b) in pairs {
            if a >= n {
                return Err(OrderError::BadEventId(a, n));
            }
            if b >= n {
                return Err(OrderError::BadEventId(b, n));
            }
            succ[a] |= 1 << b;
        }
        let mut order = CausalOrder { events, succ };
        order.close();
        Ok(order)
    }

    /// Discrete order: only the reflexive pairs.
    pub fn discrete(events: Arc<EventSet>) -> Self {
        Self::from_pairs(events, &[]).expect("no pairs to validate")
    }

    /// Indiscrete order: every pair related both ways.
    pub fn indiscrete(events: Arc<EventSet>) -> Self {
        let n = events.len();
        let full = events.full_mask();
        CausalOrder {
            events,
            succ: vec![full; n],
        }
    }

    /// Total order in event-id sequence.
    pub fn total(events: Arc<EventSet>) -> Self {
        let n = events.len();
        let pairs: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::from_pairs(events, &pairs).expect("ids in range")
    }

    fn close(&mut self) {
        let n = self.events.len();
        for k in 0..n {
            let reach_k = self.succ[k];
            for i in 0..n {
                if self.succ[i] & (1 << k) != 0 {
                    self.succ[i] |= reach_k;
                }
            }
        }
    }

    pub fn events(&self) -> &Arc<EventSet> {
        &self.events
    }

    /// `a` precedes-or-equals `b`.
    pub fn leq(&self, a: EventId, b: EventId) -> bool {
        self.succ[a] & (1 << b) != 0
    }

    /// Bitmask of all events below-or-equal `b` (its causal past).
    pub fn downset(&self, b: EventId) -> u64 {
        let mut m = 0;
        for i in 0..self.events.len() {
            if self.leq(i, b) {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn classify(&self, a: EventId, b: EventId) -> PairClass {
        if a == b {
            return PairClass::Equal;
        }
        match (self.leq(a, b), self.leq(b, a)) {
            (true, true) => PairClass::Indefinite,
            (true, false) => PairClass::Precedes,
            (false, true) => PairClass::Succeeds,
            (false, false) => PairClass::Unrelated,
        }
    }

    /// True when the relation is antisymmetric: no indefinite pair.
    pub fn is_definite(&self) -> bool {
        let n = self.events.len();
        (0..n).all(|a| (a + 1..n).all(|b| self.classify(a, b) != PairClass::Indefinite))
    }

    /// Relation containment; both orders must share the event set.
    pub fn le(&self, other: &CausalOrder) -> Result<bool, OrderError> {
        if self.events != other.events {
            return Err(OrderError::MismatchedEvents);
        }
        Ok(self
            .succ
            .iter()
            .zip(&other.succ)
            .all(|(a, b)| a & !b == 0))
    }

    /// Least preorder containing both: union then transitive closure.
    pub fn join(&self, other: &CausalOrder) -> Result<CausalOrder, OrderError> {
        if self.events != other.events {
            return Err(OrderError::MismatchedEvents);
        }
        let succ: Vec<u64> = self.succ.iter().zip(&other.succ).map(|(a, b)| a | b).collect();
        let mut order = CausalOrder {
            events: self.events.clone(),
            succ,
        };
        order.close();
        Ok(order)
    }

    /// Intersection; an intersection of preorders is already a preorder.
    pub fn meet(&self, other: &CausalOrder) -> Result<CausalOrder, OrderError> {
        if self.events != other.events {
            return Err(OrderError::MismatchedEvents);
        }
        let succ: Vec<u64> = self.succ.iter().zip(&other.succ).map(|(a, b)| a & b).collect();
        Ok(CausalOrder {
            events: self.events.clone(),
            succ,
        })
    }

    /// All lowersets (down-closed event subsets), empty set included.
    pub fn lowersets(&self) -> Result<LowersetLattice, OrderError> {
        let n = self.events.len();
        if n > MAX_LOWERSET_EVENTS {
            return Err(OrderError::TooManyEvents(n, MAX_LOWERSET_EVENTS));
        }
        let pred: Vec<u64> = (0..n).map(|j| self.downset(j)).collect();
        let mut sets = Vec::new();
        for mask in 0..(1u64 << n) {
            let closed = (0..n).all(|j| mask & (1 << j) == 0 || pred[j] & !mask == 0);
            if closed {
                sets.push(mask);
            }
        }
        sets.sort_by_key(|m| (m.count_ones(), *m));
        Ok(LowersetLattice {
            events: self.events.clone(),
            sets,
        })
    }

    /// Indefinite classes: the partition of events by mutual relatedness.
    /// Classes are listed by their least member, members ascending.
    pub fn indefinite_classes(&self) -> Vec<Vec<EventId>> {
        let n = self.events.len();
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        for a in 0..n {
            if seen[a] {
                continue;
            }
            let mut class = Vec::new();
            for b in 0..n {
                if self.leq(a, b) && self.leq(b, a) {
                    class.push(b);
                    seen[b] = true;
                }
            }
            classes.push(class);
        }
        classes
    }

    /// Hasse diagram in DOT format. Indefinite classes are condensed into
    /// single nodes; edges are the cover relation on the condensation,
    /// drawn from earlier to later.
    pub fn to_dot(&self) -> String {
        let classes = self.indefinite_classes();
        let label = |class: &[EventId]| -> String {
            if class.len() == 1 {
                self.events.name(class[0]).to_string()
            } else {
                let names: Vec<_> = class.iter().map(|&e| self.events.name(e)).collect();
                format!("{{{}}}", names.join(","))
            }
        };
        // Strict order on class representatives.
        let lt = |a: EventId, b: EventId| self.leq(a, b) && !self.leq(b, a);
        let mut out = String::from("digraph order {\n  rankdir=BT;\n  node [shape=box];\n");
        for class in &classes {
            let _ = writeln!(out, "  \"{}\";", label(class));
        }
        for ca in &classes {
            for cb in &classes {
                let (a, b) = (ca[0], cb[0]);
                if !lt(a, b) {
                    continue;
                }
                let covered = classes
                    .iter()
                    .any(|cc| lt(a, cc[0]) && lt(cc[0], b));
                if !covered {
                    let _ = writeln!(out, "  \"{}\" -> \"{}\";", label(ca), label(cb));
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// JSON form: `{"events": [names], "pairs": [[i, j], ...]}` where the
    /// pairs list the full closed relation without reflexive entries.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.events.len();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && self.leq(a, b) {
                    pairs.push(serde_json::json!([a, b]));
                }
            }
        }
        serde_json::json!({
            "events": self.events.names(),
            "pairs": pairs,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, OrderError> {
        let obj = value
            .as_object()
            .ok_or_else(|| OrderError::Json("expected an object".into()))?;
        let names = obj
            .get("events")
            .and_then(|v| v.as_array())
            .ok_or_else(|| OrderError::Json("missing `events` array".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| OrderError::Json("event names must be strings".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let events = EventSet::new(names)?;
        let mut pairs = Vec::new();
        for p in obj
            .get("pairs")
            .and_then(|v| v.as_array())
            .ok_or_else(|| OrderError::Json("missing `pairs` array".into()))?
        {
            let pair = p
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| OrderError::Json("pairs must be [i, j] arrays".into()))?;
            let a = pair[0]
                .as_u64()
                .ok_or_else(|| OrderError::Json("pair entries must be integers".into()))?;
            let b = pair[1]
                .as_u64()
                .ok_or_else(|| OrderError::Json("pair entries must be integers".into()))?;
            pairs.push((a as usize, b as usize));
        }
        Self::from_pairs(events, &pairs)
    }

    /// Canonical key under event relabeling: the least `succ` vector over
    /// all permutations of the events.
    fn canonical_key(&self) -> Vec<u64> {
        let n = self.events.len();
        let mut best: Option<Vec<u64>> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            // p[i] is the new id of old event i.
            let mut succ = vec![0u64; n];
            for a in 0..n {
                for b in 0..n {
                    if self.succ[a] & (1 << b) != 0 {
                        succ[p[a]] |= 1 << p[b];
                    }
                }
            }
            if best.as_ref().is_none_or(|b| succ < *b) {
                best = Some(succ);
            }
        });
        best.unwrap_or_default()
    }
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// The lowersets of a causal order, as bitmasks sorted by size then value.
/// Closed under union and intersection; contains the empty set, which
/// participates in lattice operations but is skipped when displaying.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowersetLattice {
    events: Arc<EventSet>,
    sets: Vec<u64>,
}

impl LowersetLattice {
    pub fn events(&self) -> &Arc<EventSet> {
        &self.events
    }

    pub fn sets(&self) -> &[u64] {
        &self.sets
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.sets.binary_search_by_key(&(mask.count_ones(), mask), |m| (m.count_ones(), *m)).is_ok()
    }

    pub fn nonempty(&self) -> impl Iterator<Item = u64> + '_ {
        self.sets.iter().copied().filter(|&m| m != 0)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// True when every pairwise union and intersection stays inside.
    pub fn is_sublattice(&self) -> bool {
        self.sets.iter().all(|&a| {
            self.sets
                .iter()
                .all(|&b| self.contains(a | b) && self.contains(a & b))
        })
    }

    pub fn names(&self, mask: u64) -> String {
        let names: Vec<_> = (0..self.events.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| self.events.name(i))
            .collect();
        format!("{{{}}}", names.join(","))
    }
}

/// All preorders on the given events, each exactly once, sorted by their
/// closed relation. Errors when the event count exceeds `bound`
/// (`2^(n(n-1))` candidate relations are scanned).
pub fn enumerate_orders(
    events: &Arc<EventSet>,
    bound: Option<usize>,
) -> Result<Vec<CausalOrder>, OrderError> {
    let bound = bound.unwrap_or(4);
    let n = events.len();
    if n > bound {
        return Err(OrderError::EnumerationBound(n, bound));
    }
    // Off-diagonal positions in row-major order.
    let positions: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .collect();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << positions.len()) {
        let mut succ: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for (idx, &(a, b)) in positions.iter().enumerate() {
            if bits & (1 << idx) != 0 {
                succ[a] |= 1 << b;
            }
        }
        // Keep exactly the transitive relations: each preorder is hit once.
        let transitive =
            (0..n).all(|a| (0..n).all(|b| succ[a] & (1 << b) == 0 || succ[b] & !succ[a] == 0));
        if transitive {
            out.push(CausalOrder {
                events: events.clone(),
                succ,
            });
        }
    }
    out.sort_by(|x, y| x.succ.cmp(&y.succ));
    Ok(out)
}

/// One representative per relabeling class of `enumerate_orders`, choosing
/// the order whose canonical key is least.
pub fn enumerate_orders_canonical(
    events: &Arc<EventSet>,
    bound: Option<usize>,
) -> Result<Vec<CausalOrder>, OrderError> {
    let all = enumerate_orders(events, bound)?;
    let mut by_key: BTreeMap<Vec<u64>, CausalOrder> = BTreeMap::new();
    for order in all {
        let key = order.canonical_key();
        let entry = by_key.entry(key.clone()).or_insert_with(|| order.clone());
        if order.succ == key {
            *entry = order;
        }
    }
    Ok(by_key.into_values().collect())
}
