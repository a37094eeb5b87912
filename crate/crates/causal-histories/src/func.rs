//! Causal functions on a history space: per-class output tables, their
//! extended (closure-indexed) form, consistency and continuity checks,
//! joint input-output tables, separability, and composition factorizations.
//!
//! A causal function assigns one output value to each constraint class of
//! its space. Its extension assigns to every closure element `k` the full
//! output history on `dom(k)`, reading each event's value from the class
//! governing that event at `k`. Extension and priming are mutually inverse
//! between causal functions and consistent extended functions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::history::{Arity, History, OutputFamily};
use crate::order::EventId;
use crate::space::{HistorySpace, SpaceError};

#[derive(Debug, Error)]
pub enum FuncError {
    #[error("expected {0} class outputs, got {1}")]
    ClassCountMismatch(usize, usize),
    #[error("output {value} out of range at event {event} (size {size})")]
    ValueOutOfRange { event: EventId, value: u8, size: u8 },
    #[error("outputs must list one size per event")]
    OutputShape,
    #[error("extended function is inconsistent at {0}")]
    Inconsistent(String),
    #[error("extended values must cover the closure exactly")]
    ExtensionShape,
    #[error("space does not satisfy free choice")]
    NotFreeChoice,
    #[error("joint table is not causal for the space: {0}")]
    NotCausal(String),
    #[error("{0} is not a subspace of the function's space")]
    NotASubspace(String),
    #[error("functions live on mismatched spaces or outputs")]
    Mismatched,
    #[error("space is not the expected composition of the given parts")]
    CompositionShape,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid function JSON: {0}")]
    Json(String),
}

/// A causal function: one output value per constraint class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalFunction {
    space: Arc<HistorySpace>,
    outputs: OutputFamily,
    /// Indexed by class index in `space.classes()`.
    outs: Vec<u8>,
}

/// An extended function: one output history per closure element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedFunction {
    space: Arc<HistorySpace>,
    outputs: OutputFamily,
    /// Indexed parallel to `space.ext()`; `values[i]` has the same domain
    /// as the i-th closure element.
    values: Vec<History>,
}

/// Proof that a function cannot arise from any causally complete
/// subspace: an extended input history `k` with, for every event in its
/// domain, a conflicting closure element. Sufficient for inseparability
/// but not necessary: some functions arising from no causally complete
/// subspace admit no such witness (see `is_separable` for the exact
/// check).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InseparabilityWitness {
    pub k: History,
    /// One `(omega, k'_omega, xi_omega)` per event of `dom(k)`, ascending
    /// by event.
    pub components: Vec<(EventId, History, EventId)>,
}

impl CausalFunction {
    pub fn new(
        space: Arc<HistorySpace>,
        outputs: OutputFamily,
        outs: Vec<u8>,
    ) -> Result<Self, FuncError> {
        if outputs.len() != space.events().len() {
            return Err(FuncError::OutputShape);
        }
        let classes = space.classes();
        if outs.len() != classes.len() {
            return Err(FuncError::ClassCountMismatch(classes.len(), outs.len()));
        }
        for (i, &v) in outs.iter().enumerate() {
            let event = classes.entry(i).event;
            if v >= outputs.size(event) {
                return Err(FuncError::ValueOutOfRange {
                    event,
                    value: v,
                    size: outputs.size(event),
                });
            }
        }
        Ok(CausalFunction {
            space,
            outputs,
            outs,
        })
    }

    pub fn space(&self) -> &Arc<HistorySpace> {
        &self.space
    }

    pub fn outputs(&self) -> &OutputFamily {
        &self.outputs
    }

    /// Per-class outputs in canonical class order; doubles as the
    /// function's canonical key.
    pub fn class_outputs(&self) -> &[u8] {
        &self.outs
    }

    /// Output at a member history for one of its tip events.
    pub fn value_at_member(&self, hist_idx: usize, event: EventId) -> Option<u8> {
        self.space
            .classes()
            .of_tip(hist_idx, event)
            .map(|c| self.outs[c])
    }

    /// Output at event `event` of the extended function on closure element
    /// `ext_idx`; `None` when the event is outside its domain.
    pub fn value_at_ext(&self, ext_idx: usize, event: EventId) -> Option<u8> {
        self.space
            .classes()
            .of_ext_event(ext_idx, event)
            .map(|c| self.outs[c])
    }

    /// The output history produced on one closure element.
    pub fn extended_output(&self, ext_idx: usize) -> History {
        let n = self.space.events().len();
        let entries: Vec<(EventId, u8)> = (0..n)
            .filter_map(|e| self.value_at_ext(ext_idx, e).map(|v| (e, v)))
            .collect();
        History::from_entries(n, &entries)
    }

    /// The full extended function.
    pub fn extend(&self) -> ExtendedFunction {
        let values = (0..self.space.ext().len())
            .map(|i| self.extended_output(i))
            .collect();
        ExtendedFunction {
            space: self.space.clone(),
            outputs: self.outputs.clone(),
            values,
        }
    }

    /// Restriction to a lowerset subspace (every member of `sub` must be a
    /// member of this function's space, downward closed within it).
    pub fn restrict(&self, sub: &Arc<HistorySpace>) -> Result<CausalFunction, FuncError> {
        if sub.events() != self.space.events() || sub.inputs() != self.space.inputs() {
            return Err(FuncError::Mismatched);
        }
        for h in sub.histories() {
            if self.space.history_index(h).is_none() {
                return Err(FuncError::NotASubspace(h.display(self.space.events())));
            }
        }
        for other in self.space.histories() {
            if sub.history_index(other).is_none()
                && sub.histories().iter().any(|h| other.lt(h))
            {
                return Err(FuncError::NotASubspace(other.display(self.space.events())));
            }
        }
        let classes = sub.classes();
        let mut outs = Vec::with_capacity(classes.len());
        for i in 0..classes.len() {
            let entry = classes.entry(i);
            let rep = &sub.histories()[entry.members[0]];
            let parent_idx = self.space.history_index(rep).expect("checked above");
            let v = self
                .value_at_member(parent_idx, entry.event)
                .expect("tips preserved in lowerset subspaces");
            outs.push(v);
        }
        CausalFunction::new(sub.clone(), self.outputs.clone(), outs)
    }

    /// Joint input-output rows: each total assignment paired with its full
    /// output history. Requires free choice.
    pub fn to_joint_io(&self) -> Result<Vec<(History, History)>, FuncError> {
        if !self.space.has_free_choice() {
            return Err(FuncError::NotFreeChoice);
        }
        let mut rows = Vec::new();
        for k in self.space.total_assignments() {
            let idx = self.space.ext_index(&k).expect("free choice");
            rows.push((k, self.extended_output(idx)));
        }
        Ok(rows)
    }

    /// CSV rendering of the joint table, inputs then outputs per event.
    pub fn joint_io_csv(&self) -> Result<String, FuncError> {
        let rows = self.to_joint_io()?;
        let events = self.space.events();
        let mut out = String::new();
        let header: Vec<String> = (0..events.len())
            .map(|e| format!("in_{}", events.name(e)))
            .chain((0..events.len()).map(|e| format!("out_{}", events.name(e))))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (k, o) in rows {
            let cells: Vec<String> = (0..events.len())
                .map(|e| k.get(e).expect("total").to_string())
                .chain((0..events.len()).map(|e| o.get(e).expect("total").to_string()))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let events = self.space.events();
        let outputs: serde_json::Map<String, serde_json::Value> = (0..events.len())
            .map(|e| {
                (
                    events.name(e).to_string(),
                    serde_json::json!(self.outputs.size(e)),
                )
            })
            .collect();
        let mut table = serde_json::Map::new();
        for (i, &v) in self.outs.iter().enumerate() {
            let entry = self.space.classes().entry(i);
            let rep = &self.space.histories()[entry.members[0]];
            let key = format!("{}|{}", events.name(entry.event), rep.display(events));
            table.insert(key, serde_json::json!(v));
        }
        serde_json::json!({ "outputs": outputs, "table": table })
    }

    pub fn from_json(
        value: &serde_json::Value,
        space: &Arc<HistorySpace>,
    ) -> Result<Self, FuncError> {
        let obj = value
            .as_object()
            .ok_or_else(|| FuncError::Json("expected an object".into()))?;
        let events = space.events();
        let out_obj = obj
            .get("outputs")
            .and_then(|v| v.as_object())
            .ok_or_else(|| FuncError::Json("missing `outputs`".into()))?;
        let mut sizes = vec![0u8; events.len()];
        for (name, v) in out_obj {
            let e = events
                .id(name)
                .ok_or_else(|| FuncError::Json(format!("unknown event `{name}`")))?;
            sizes[e] = v
                .as_u64()
                .filter(|&s| s > 0 && s <= 250)
                .ok_or_else(|| FuncError::Json(format!("bad output size for `{name}`")))?
                as u8;
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(FuncError::Json("every event needs an output size".into()));
        }
        let outputs = Arity::new(sizes).map_err(|e| FuncError::Json(e.to_string()))?;
        let table = obj
            .get("table")
            .and_then(|v| v.as_object())
            .ok_or_else(|| FuncError::Json("missing `table`".into()))?;
        let classes = space.classes();
        let mut outs = vec![None; classes.len()];
        for (key, v) in table {
            let (event_name, rep_str) = key
                .split_once('|')
                .ok_or_else(|| FuncError::Json(format!("bad table key `{key}`")))?;
            let e = events
                .id(event_name)
                .ok_or_else(|| FuncError::Json(format!("unknown event `{event_name}`")))?;
            let rep = parse_history_display(rep_str, space)
                .ok_or_else(|| FuncError::Json(format!("bad history in key `{key}`")))?;
            let idx = space
                .history_index(&rep)
                .ok_or_else(|| FuncError::Json(format!("`{rep_str}` is not a member")))?;
            let class = classes
                .of_tip(idx, e)
                .ok_or_else(|| FuncError::Json(format!("`{rep_str}` has no tip `{event_name}`")))?;
            let value = v
                .as_u64()
                .filter(|&v| v < 250)
                .ok_or_else(|| FuncError::Json(format!("bad value for key `{key}`")))?;
            outs[class] = Some(value as u8);
        }
        let outs: Option<Vec<u8>> = outs.into_iter().collect();
        let outs = outs.ok_or_else(|| FuncError::Json("table misses a class".into()))?;
        CausalFunction::new(space.clone(), outputs, outs)
    }
}

/// Parses `{A:0,B:1}` as written by `History::display`.
fn parse_history_display(s: &str, space: &HistorySpace) -> Option<History> {
    let inner = s.strip_prefix('{')?.strip_suffix('}')?;
    let events = space.events();
    let mut entries = Vec::new();
    if !inner.is_empty() {
        for part in inner.split(',') {
            let (name, v) = part.split_once(':')?;
            let e = events.id(name.trim())?;
            let v: u8 = v.trim().parse().ok()?;
            entries.push((e, v));
        }
    }
    Some(History::from_entries(events.len(), &entries))
}

impl ExtendedFunction {
    /// Wraps raw per-closure-element output histories after shape checks.
    pub fn new(
        space: Arc<HistorySpace>,
        outputs: OutputFamily,
        values: Vec<History>,
    ) -> Result<Self, FuncError> {
        if outputs.len() != space.events().len() {
            return Err(FuncError::OutputShape);
        }
        if values.len() != space.ext().len() {
            return Err(FuncError::ExtensionShape);
        }
        for (k, v) in space.ext().iter().zip(values.iter()) {
            if v.domain_mask() != k.domain_mask() {
                return Err(FuncError::ExtensionShape);
            }
            v.in_range(&outputs)
                .map_err(|_| FuncError::ExtensionShape)?;
        }
        Ok(ExtendedFunction {
            space,
            outputs,
            values,
        })
    }

    pub fn space(&self) -> &Arc<HistorySpace> {
        &self.space
    }

    pub fn outputs(&self) -> &OutputFamily {
        &self.outputs
    }

    pub fn values(&self) -> &[History] {
        &self.values
    }

    pub fn value(&self, ext_idx: usize) -> &History {
        &self.values[ext_idx]
    }

    /// Restriction agreement on every comparable pair of closure elements.
    pub fn is_consistent(&self) -> bool {
        let ext = self.space.ext();
        for (i, small) in ext.iter().enumerate() {
            for (j, large) in ext.iter().enumerate() {
                if small.lt(large) && !self.values[i].leq(&self.values[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Order-preservation along covering pairs only; agrees with
    /// `is_consistent` by transitivity of restriction.
    pub fn is_continuous(&self) -> bool {
        let ext = self.space.ext();
        for (i, small) in ext.iter().enumerate() {
            for (j, large) in ext.iter().enumerate() {
                if !small.lt(large) {
                    continue;
                }
                let covered = ext.iter().any(|m| small.lt(m) && m.lt(large));
                if !covered && !self.values[i].leq(&self.values[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Recovers the causal function: class outputs read off class
    /// representatives. Errors when the extension is inconsistent.
    pub fn prime(&self) -> Result<CausalFunction, FuncError> {
        if !self.is_consistent() {
            let ext = self.space.ext();
            let bad = ext
                .iter()
                .enumerate()
                .find_map(|(i, small)| {
                    ext.iter().enumerate().find_map(|(j, large)| {
                        (small.lt(large) && !self.values[i].leq(&self.values[j]))
                            .then(|| small.display(self.space.events()))
                    })
                })
                .unwrap_or_default();
            return Err(FuncError::Inconsistent(bad));
        }
        let classes = self.space.classes();
        let mut outs = Vec::with_capacity(classes.len());
        for i in 0..classes.len() {
            let entry = classes.entry(i);
            let rep = &self.space.histories()[entry.members[0]];
            let ext_idx = self.space.ext_index(rep).expect("members are in the closure");
            let v = self.values[ext_idx]
                .get(entry.event)
                .expect("tip is in the domain");
            // Class constancy across members follows from consistency; kept
            // as a defensive check because priming trusts it.
            for &m in &entry.members[1..] {
                let mi = self
                    .space
                    .ext_index(&self.space.histories()[m])
                    .expect("members are in the closure");
                if self.values[mi].get(entry.event) != Some(v) {
                    return Err(FuncError::Inconsistent(
                        self.space.histories()[m].display(self.space.events()),
                    ));
                }
            }
            outs.push(v);
        }
        CausalFunction::new(self.space.clone(), self.outputs.clone(), outs)
    }
}

/// Iterator over every causal function on a space, in ascending canonical
/// key order.
pub struct CausalFunctionIter {
    space: Arc<HistorySpace>,
    outputs: OutputFamily,
    sizes: Vec<u8>,
    current: Option<Vec<u8>>,
}

impl Iterator for CausalFunctionIter {
    type Item = CausalFunction;

    fn next(&mut self) -> Option<CausalFunction> {
        let current = self.current.as_mut()?;
        let item = CausalFunction {
            space: self.space.clone(),
            outputs: self.outputs.clone(),
            outs: current.clone(),
        };
        // Odometer increment, least significant last.
        let mut done = true;
        for i in (0..current.len()).rev() {
            if current[i] + 1 < self.sizes[i] {
                current[i] += 1;
                done = false;
                break;
            }
            current[i] = 0;
        }
        if done {
            self.current = None;
        }
        Some(item)
    }
}

pub fn enumerate_causal_functions(
    space: &Arc<HistorySpace>,
    outputs: &OutputFamily,
) -> Result<CausalFunctionIter, FuncError> {
    if outputs.len() != space.events().len() {
        return Err(FuncError::OutputShape);
    }
    let classes = space.classes();
    let sizes: Vec<u8> = (0..classes.len())
        .map(|i| outputs.size(classes.entry(i).event))
        .collect();
    let current = if sizes.iter().all(|&s| s > 0) {
        Some(vec![0u8; sizes.len()])
    } else {
        None
    };
    Ok(CausalFunctionIter {
        space: space.clone(),
        outputs: outputs.clone(),
        sizes,
        current,
    })
}

/// Product over classes of the output-set size at the class's event.
pub fn count_causal_functions(space: &HistorySpace, outputs: &OutputFamily) -> u128 {
    let classes = space.classes();
    (0..classes.len())
        .map(|i| outputs.size(classes.entry(i).event) as u128)
        .product()
}

/// Builds the causal function matching a joint input-output table on a
/// free-choice space, errors when the table is not causal.
pub fn from_joint_io(
    rows: &[(History, History)],
    space: &Arc<HistorySpace>,
    outputs: &OutputFamily,
) -> Result<CausalFunction, FuncError> {
    check_joint_io_causal(rows, space, outputs)?;
    let totals = space.total_assignments();
    let by_input: BTreeMap<&History, &History> = rows.iter().map(|(k, o)| (k, o)).collect();
    let classes = space.classes();
    let mut outs = vec![None; classes.len()];
    for k in &totals {
        let ext_idx = space.ext_index(k).expect("free choice");
        let o = by_input[k];
        for e in 0..space.events().len() {
            if let Some(c) = classes.of_ext_event(ext_idx, e) {
                outs[c] = Some(o.get(e).expect("total output"));
            }
        }
    }
    let outs: Option<Vec<u8>> = outs.into_iter().collect();
    // Every class governs some event of some total under free choice.
    let outs = outs.ok_or(FuncError::NotFreeChoice)?;
    CausalFunction::new(space.clone(), outputs.clone(), outs)
}

/// A joint table is causal when outputs agree wherever the governing class
/// agrees across totals.
pub fn joint_io_is_causal(
    rows: &[(History, History)],
    space: &HistorySpace,
    outputs: &OutputFamily,
) -> bool {
    check_joint_io_causal(rows, space, outputs).is_ok()
}

fn check_joint_io_causal(
    rows: &[(History, History)],
    space: &HistorySpace,
    outputs: &OutputFamily,
) -> Result<(), FuncError> {
    if !space.has_free_choice() {
        return Err(FuncError::NotFreeChoice);
    }
    if outputs.len() != space.events().len() {
        return Err(FuncError::OutputShape);
    }
    let totals = space.total_assignments();
    let full = space.events().full_mask();
    if rows.len() != totals.len() {
        return Err(FuncError::NotCausal(format!(
            "expected {} rows, got {}",
            totals.len(),
            rows.len()
        )));
    }
    let mut by_input: BTreeMap<&History, &History> = BTreeMap::new();
    for (k, o) in rows {
        if k.domain_mask() != full || o.domain_mask() != full {
            return Err(FuncError::NotCausal("rows must be total".into()));
        }
        o.in_range(outputs).map_err(|_| {
            FuncError::NotCausal(format!("output out of range at {}", o.display(space.events())))
        })?;
        if by_input.insert(k, o).is_some() {
            return Err(FuncError::NotCausal("duplicate input row".into()));
        }
    }
    for k in &totals {
        if !by_input.contains_key(k) {
            return Err(FuncError::NotCausal(format!(
                "missing row for {}",
                k.display(space.events())
            )));
        }
    }
    // Outputs must be constant on each class across all totals.
    let classes = space.classes();
    let mut seen: Vec<Option<u8>> = vec![None; classes.len()];
    for k in &totals {
        let ext_idx = space.ext_index(k).expect("free choice");
        let o = by_input[k];
        for e in 0..space.events().len() {
            let Some(c) = classes.of_ext_event(ext_idx, e) else {
                continue;
            };
            let v = o.get(e).expect("total output");
            match seen[c] {
                None => seen[c] = Some(v),
                Some(prev) if prev == v => {}
                Some(prev) => {
                    return Err(FuncError::NotCausal(format!(
                        "event {} must output {} on {}",
                        space.events().name(e),
                        prev,
                        k.display(space.events())
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Deterministic witness search: `k` by canonical closure order (domain
/// size, then values), per-event candidates by the same order, tie events
/// ascending. Returns the first complete witness. A returned witness
/// proves the function separable from no causally complete subspace; a
/// `None` proves nothing (the converse fails, see `is_separable`).
pub fn find_inseparability_witness(f: &CausalFunction) -> Option<InseparabilityWitness> {
    let space = f.space();
    let ext = space.ext();
    let n = space.events().len();
    'k_loop: for (ki, k) in ext.iter().enumerate() {
        if k.domain_size() < 2 {
            continue;
        }
        let dom = k.domain_mask();
        // If any one-event restriction stays in the closure, consistency
        // forces agreement and no component can exist for that event.
        for e in 0..n {
            if dom & (1 << e) != 0 && space.ext_index(&k.restrict(dom & !(1 << e))).is_some() {
                continue 'k_loop;
            }
        }
        let mut components = Vec::new();
        for e in 0..n {
            if dom & (1 << e) == 0 {
                continue;
            }
            let rest = k.restrict(dom & !(1 << e));
            let mut found = None;
            'cand: for (ci, cand) in ext.iter().enumerate() {
                if ci == ki || !rest.leq(cand) {
                    continue;
                }
                for xi in 0..n {
                    if xi == e || dom & (1 << xi) == 0 {
                        continue;
                    }
                    let mine = f.value_at_ext(ki, xi);
                    let theirs = f.value_at_ext(ci, xi);
                    if mine.is_some() && theirs.is_some() && mine != theirs {
                        found = Some((e, cand.clone(), xi));
                        break 'cand;
                    }
                }
            }
            match found {
                Some(c) => components.push(c),
                None => continue 'k_loop,
            }
        }
        return Some(InseparabilityWitness {
            k: k.clone(),
            components,
        });
    }
    None
}

/// Whether the function's extension agrees with some causal function on
/// the given causally complete space (which must share this space's
/// maximal closure elements, as every completion does). Exact: agreement
/// holds precisely when outputs are constant across the maximal elements
/// covering each of the completion's finer classes.
pub fn arises_from_completion(f: &CausalFunction, completion: &HistorySpace) -> bool {
    let space = f.space();
    let classes = completion.classes();
    let mut assigned: Vec<Option<u8>> = vec![None; classes.len()];
    for &mi in &completion.maximal_ext() {
        let k = &completion.ext()[mi];
        let theta_idx = space
            .ext_index(k)
            .expect("completions preserve maximal closure elements");
        for e in 0..space.events().len() {
            let Some(c) = classes.of_ext_event(mi, e) else {
                continue;
            };
            let v = f.value_at_ext(theta_idx, e).expect("same domain");
            match assigned[c] {
                None => assigned[c] = Some(v),
                Some(prev) if prev == v => {}
                Some(_) => return false,
            }
        }
    }
    true
}

/// Exact separability: the function arises from one of the space's causal
/// completions. Errors only when the completion search exceeds its size
/// guard.
pub fn is_separable(f: &CausalFunction) -> Result<bool, FuncError> {
    let completions = f.space().enumerate_causal_completions()?;
    Ok(completions
        .iter()
        .any(|c| arises_from_completion(f, c)))
}

/// Checks every witness clause against the function.
pub fn validate_witness(f: &CausalFunction, w: &InseparabilityWitness) -> bool {
    let space = f.space();
    let Some(ki) = space.ext_index(&w.k) else {
        return false;
    };
    let dom = w.k.domain_mask();
    let mut remaining = dom;
    for &(e, ref cand, xi) in &w.components {
        if dom & (1 << e) == 0 || remaining & (1 << e) == 0 {
            return false;
        }
        remaining &= !(1 << e);
        let Some(ci) = space.ext_index(cand) else {
            return false;
        };
        let rest = w.k.restrict(dom & !(1 << e));
        if !rest.leq(cand) {
            return false;
        }
        if xi == e || dom & (1 << xi) == 0 {
            return false;
        }
        let (a, b) = (f.value_at_ext(ki, xi), f.value_at_ext(ci, xi));
        if a.is_none() || b.is_none() || a == b {
            return false;
        }
    }
    remaining == 0
}

/// Canonical keys of every function arising from some causal completion.
pub fn separable_keys(
    space: &Arc<HistorySpace>,
    outputs: &OutputFamily,
) -> Result<BTreeSet<Vec<u8>>, FuncError> {
    let completions = space.enumerate_causal_completions()?;
    let mut keys = BTreeSet::new();
    for completion in completions {
        let completion = Arc::new(completion);
        for f in enumerate_causal_functions(&completion, outputs)? {
            // Restrict the completion's extension to this space's closure.
            let values: Vec<History> = space
                .ext()
                .iter()
                .map(|k| {
                    let idx = completion
                        .ext_index(k)
                        .expect("completions contain the original closure");
                    f.extended_output(idx)
                })
                .collect();
            let ext = ExtendedFunction::new(space.clone(), outputs.clone(), values)?;
            let restricted = ext.prime().expect("restrictions stay consistent");
            keys.insert(restricted.outs);
        }
    }
    Ok(keys)
}

/// Number of separable functions on the space.
pub fn count_separable(
    space: &Arc<HistorySpace>,
    outputs: &OutputFamily,
) -> Result<u128, FuncError> {
    Ok(separable_keys(space, outputs)?.len() as u128)
}

fn narrow(h: &History, width: usize, shift: usize) -> History {
    let entries: Vec<(EventId, u8)> = (0..width)
        .filter_map(|e| h.get(e + shift).map(|v| (e, v)))
        .collect();
    History::from_entries(width, &entries)
}

fn split_outputs(
    outputs: &OutputFamily,
    left: usize,
    right: usize,
) -> Result<(OutputFamily, OutputFamily), FuncError> {
    if outputs.len() != left + right {
        return Err(FuncError::CompositionShape);
    }
    let l = Arity::new(outputs.sizes()[..left].to_vec()).map_err(|_| FuncError::OutputShape)?;
    let r = Arity::new(outputs.sizes()[left..].to_vec()).map_err(|_| FuncError::OutputShape)?;
    Ok((l, r))
}

/// Splits a function on a parallel composition into its two independent
/// parts.
pub fn factor_parallel(
    f: &CausalFunction,
    left: &Arc<HistorySpace>,
    right: &Arc<HistorySpace>,
) -> Result<(CausalFunction, CausalFunction), FuncError> {
    let expect = left.parallel_compose(right)?;
    if &expect != f.space().as_ref() {
        return Err(FuncError::CompositionShape);
    }
    let (lo, ro) = split_outputs(f.outputs(), left.events().len(), right.events().len())?;
    let n = f.space().events().len();
    let shift = left.events().len();
    let pick = |sub: &HistorySpace, offset: usize, e_off: usize| -> Result<Vec<u8>, FuncError> {
        let classes = sub.classes();
        (0..classes.len())
            .map(|i| {
                let entry = classes.entry(i);
                let rep = sub.histories()[entry.members[0]].shift(n, offset);
                let idx = f
                    .space()
                    .history_index(&rep)
                    .ok_or(FuncError::CompositionShape)?;
                f.value_at_member(idx, entry.event + e_off)
                    .ok_or(FuncError::CompositionShape)
            })
            .collect()
    };
    let f1 = CausalFunction::new(left.clone(), lo, pick(left, 0, 0)?)?;
    let f2 = CausalFunction::new(right.clone(), ro, pick(right, shift, shift)?)?;
    Ok((f1, f2))
}

/// Inverse of `factor_parallel`.
pub fn compose_parallel(
    f1: &CausalFunction,
    f2: &CausalFunction,
    target: &Arc<HistorySpace>,
) -> Result<CausalFunction, FuncError> {
    let expect = f1.space().parallel_compose(f2.space())?;
    if &expect != target.as_ref() {
        return Err(FuncError::CompositionShape);
    }
    let mut sizes = f1.outputs().sizes().to_vec();
    sizes.extend_from_slice(f2.outputs().sizes());
    let outputs = Arity::new(sizes).map_err(|_| FuncError::OutputShape)?;
    let n = target.events().len();
    let shift = f1.space().events().len();
    let classes = target.classes();
    let mut outs = Vec::with_capacity(classes.len());
    for i in 0..classes.len() {
        let entry = classes.entry(i);
        let rep = &target.histories()[entry.members[0]];
        let v = if entry.event < shift {
            let sub_rep = narrow(rep, shift, 0);
            let idx = f1
                .space()
                .history_index(&sub_rep)
                .ok_or(FuncError::CompositionShape)?;
            f1.value_at_member(idx, entry.event)
        } else {
            let sub_rep = narrow(rep, n - shift, shift);
            let idx = f2
                .space()
                .history_index(&sub_rep)
                .ok_or(FuncError::CompositionShape)?;
            f2.value_at_member(idx, entry.event - shift)
        };
        outs.push(v.ok_or(FuncError::CompositionShape)?);
    }
    CausalFunction::new(target.clone(), outputs, outs)
}

/// Splits a function on a conditional sequential composition into the
/// first-stage function and one branch function per maximal closure
/// element of the first stage (in canonical order).
pub fn factor_conditional(
    f: &CausalFunction,
    first: &Arc<HistorySpace>,
    branches: &[Arc<HistorySpace>],
) -> Result<(CausalFunction, Vec<CausalFunction>), FuncError> {
    let max = first.maximal_ext();
    if branches.len() != max.len() {
        return Err(FuncError::CompositionShape);
    }
    let mut iter = branches.iter();
    let expect = first.conditional_sequential_compose(|_| {
        iter.next().expect("length checked").as_ref().clone()
    })?;
    if &expect != f.space().as_ref() {
        return Err(FuncError::CompositionShape);
    }
    let n = f.space().events().len();
    let nf = first.events().len();
    let (fo, bo) = split_outputs(f.outputs(), nf, n - nf)?;
    let first_classes = first.classes();
    let mut first_outs = Vec::with_capacity(first_classes.len());
    for i in 0..first_classes.len() {
        let entry = first_classes.entry(i);
        let rep = first.histories()[entry.members[0]].shift(n, 0);
        let idx = f
            .space()
            .history_index(&rep)
            .ok_or(FuncError::CompositionShape)?;
        first_outs.push(
            f.value_at_member(idx, entry.event)
                .ok_or(FuncError::CompositionShape)?,
        );
    }
    let f0 = CausalFunction::new(first.clone(), fo, first_outs)?;
    let mut branch_fns = Vec::with_capacity(branches.len());
    for (&k_idx, branch) in max.iter().zip(branches.iter()) {
        let k_wide = first.ext()[k_idx].shift(n, 0);
        let classes = branch.classes();
        let mut outs = Vec::with_capacity(classes.len());
        for i in 0..classes.len() {
            let entry = classes.entry(i);
            let rep = branch.histories()[entry.members[0]].shift(n, nf);
            let member = k_wide.join(&rep).map_err(|_| FuncError::CompositionShape)?;
            let idx = f
                .space()
                .history_index(&member)
                .ok_or(FuncError::CompositionShape)?;
            outs.push(
                f.value_at_member(idx, entry.event + nf)
                    .ok_or(FuncError::CompositionShape)?,
            );
        }
        branch_fns.push(CausalFunction::new(branch.clone(), bo.clone(), outs)?);
    }
    Ok((f0, branch_fns))
}

/// Inverse of `factor_conditional`.
pub fn compose_conditional(
    f0: &CausalFunction,
    branch_fns: &[CausalFunction],
    target: &Arc<HistorySpace>,
) -> Result<CausalFunction, FuncError> {
    let first = f0.space();
    let max = first.maximal_ext();
    if branch_fns.len() != max.len() {
        return Err(FuncError::CompositionShape);
    }
    let mut iter = branch_fns.iter();
    let expect = first.conditional_sequential_compose(|_| {
        iter.next().expect("length checked").space().as_ref().clone()
    })?;
    if &expect != target.as_ref() {
        return Err(FuncError::CompositionShape);
    }
    let Some(any_branch) = branch_fns.first() else {
        return Err(FuncError::CompositionShape);
    };
    if branch_fns
        .iter()
        .any(|b| b.outputs() != any_branch.outputs())
    {
        return Err(FuncError::Mismatched);
    }
    let n = target.events().len();
    let nf = first.events().len();
    let mut sizes = f0.outputs().sizes().to_vec();
    sizes.extend_from_slice(any_branch.outputs().sizes());
    let outputs = Arity::new(sizes).map_err(|_| FuncError::OutputShape)?;
    let classes = target.classes();
    let mut outs = Vec::with_capacity(classes.len());
    for i in 0..classes.len() {
        let entry = classes.entry(i);
        let rep = &target.histories()[entry.members[0]];
        let v = if entry.event < nf {
            let sub_rep = narrow(rep, nf, 0);
            let idx = first
                .history_index(&sub_rep)
                .ok_or(FuncError::CompositionShape)?;
            f0.value_at_member(idx, entry.event)
        } else {
            // Identify the first-stage maximal element under this member.
            let k_part = rep.restrict((1u64 << nf) - 1);
            let k = narrow(&k_part, nf, 0);
            let which = max
                .iter()
                .position(|&m| first.ext()[m] == k)
                .ok_or(FuncError::CompositionShape)?;
            let bf = &branch_fns[which];
            let sub_rep = narrow(rep, n - nf, nf);
            let idx = bf
                .space()
                .history_index(&sub_rep)
                .ok_or(FuncError::CompositionShape)?;
            bf.value_at_member(idx, entry.event - nf)
        };
        outs.push(v.ok_or(FuncError::CompositionShape)?);
    }
    CausalFunction::new(target.clone(), outputs, outs)
}

/// Sequential composition is the conditional one with a constant branch.
pub fn factor_sequential(
    f: &CausalFunction,
    first: &Arc<HistorySpace>,
    second: &Arc<HistorySpace>,
) -> Result<(CausalFunction, Vec<CausalFunction>), FuncError> {
    let branches: Vec<Arc<HistorySpace>> = first
        .maximal_ext()
        .iter()
        .map(|_| second.clone())
        .collect();
    factor_conditional(f, first, &branches)
}

pub fn compose_sequential(
    f0: &CausalFunction,
    branch_fns: &[CausalFunction],
    target: &Arc<HistorySpace>,
) -> Result<CausalFunction, FuncError> {
    compose_conditional(f0, branch_fns, target)
}
