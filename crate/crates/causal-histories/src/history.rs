//! Partial input assignments over a fixed event set, ordered by extension.
//!
//! A history maps a subset of the events (its domain) to input values. Two
//! histories are compatible when they agree on shared events; the join of a
//! compatible pair is their union. Histories are stored as fixed-width byte
//! arrays with a sentinel for events outside the domain, so domain tests and
//! comparisons are flat array scans.

use std::cmp::Ordering;

use thiserror::Error;

use crate::order::{EventId, EventSet};

/// Sentinel marking an event outside a history's domain.
pub const UNDEF: u8 = u8::MAX;

/// Largest legal per-event value count, keeping values clear of [`UNDEF`].
pub const MAX_VALUES: u8 = 250;

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("histories disagree at event {0}")]
    Incompatible(EventId),
    #[error("value {value} out of range at event {event} (size {size})")]
    ValueOutOfRange { event: EventId, value: u8, size: u8 },
    #[error("widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("per-event value count must be 1..={MAX_VALUES}, got {0}")]
    BadArity(u16),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("invalid history JSON: {0}")]
    Json(String),
}

/// Per-event value counts (input or output alphabet sizes).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arity {
    sizes: Vec<u8>,
}

/// Input alphabet sizes per event.
pub type InputFamily = Arity;
/// Output alphabet sizes per event.
pub type OutputFamily = Arity;

impl Arity {
    pub fn new(sizes: Vec<u8>) -> Result<Self, HistoryError> {
        for &s in &sizes {
            if s == 0 || s > MAX_VALUES {
                return Err(HistoryError::BadArity(s as u16));
            }
        }
        Ok(Arity { sizes })
    }

    pub fn uniform(n_events: usize, size: u8) -> Result<Self, HistoryError> {
        Self::new(vec![size; n_events])
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn size(&self, event: EventId) -> u8 {
        self.sizes[event]
    }

    pub fn sizes(&self) -> &[u8] {
        &self.sizes
    }

    /// All assignments whose domain is exactly `mask`, in canonical order.
    pub fn assignments_on(&self, mask: u64) -> Vec<History> {
        let n = self.sizes.len();
        let events: Vec<EventId> = (0..n).filter(|&e| mask & (1 << e) != 0).collect();
        let mut out = vec![History::empty(n)];
        for &e in &events {
            let mut next = Vec::with_capacity(out.len() * self.sizes[e] as usize);
            for h in &out {
                for v in 0..self.sizes[e] {
                    let mut h2 = h.clone();
                    h2.vals[e] = v;
                    next.push(h2);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Number of assignments on the full event set.
    pub fn total_count(&self) -> u64 {
        self.sizes.iter().map(|&s| s as u64).product()
    }
}

/// Partial assignment of values to events; `vals[e] == UNDEF` means `e` is
/// outside the domain.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct History {
    vals: Box<[u8]>,
}

impl History {
    pub fn empty(width: usize) -> Self {
        History {
            vals: vec![UNDEF; width].into_boxed_slice(),
        }
    }

    pub fn from_entries(width: usize, entries: &[(EventId, u8)]) -> Self {
        let mut h = Self::empty(width);
        for &(e, v) in entries {
            assert!(e < width, "event id {e} out of range");
            assert!(v != UNDEF, "value collides with the undefined sentinel");
            h.vals[e] = v;
        }
        h
    }

    pub fn width(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, event: EventId) -> Option<u8> {
        match self.vals[event] {
            UNDEF => None,
            v => Some(v),
        }
    }

    pub fn domain_mask(&self) -> u64 {
        let mut m = 0;
        for (e, &v) in self.vals.iter().enumerate() {
            if v != UNDEF {
                m |= 1 << e;
            }
        }
        m
    }

    pub fn domain_size(&self) -> u32 {
        self.vals.iter().filter(|&&v| v != UNDEF).count() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.vals.iter().all(|&v| v == UNDEF)
    }

    /// Extension order: `self` is a restriction of `other`.
    pub fn leq(&self, other: &History) -> bool {
        self.vals
            .iter()
            .zip(other.vals.iter())
            .all(|(&a, &b)| a == UNDEF || a == b)
    }

    pub fn lt(&self, other: &History) -> bool {
        self != other && self.leq(other)
    }

    /// Agreement on shared events.
    pub fn compatible(&self, other: &History) -> bool {
        self.vals
            .iter()
            .zip(other.vals.iter())
            .all(|(&a, &b)| a == UNDEF || b == UNDEF || a == b)
    }

    /// Union of two compatible histories.
    pub fn join(&self, other: &History) -> Result<History, HistoryError> {
        if self.width() != other.width() {
            return Err(HistoryError::WidthMismatch(self.width(), other.width()));
        }
        let mut vals = self.vals.clone();
        for (e, (&a, &b)) in self.vals.iter().zip(other.vals.iter()).enumerate() {
            match (a, b) {
                (UNDEF, v) => vals[e] = v,
                (_, UNDEF) => {}
                (u, v) if u == v => {}
                _ => return Err(HistoryError::Incompatible(e)),
            }
        }
        Ok(History { vals })
    }

    /// Restriction to the events in `mask`.
    pub fn restrict(&self, mask: u64) -> History {
        let mut vals = self.vals.clone();
        for (e, v) in vals.iter_mut().enumerate() {
            if mask & (1 << e) == 0 {
                *v = UNDEF;
            }
        }
        History { vals }
    }

    /// Range check against an arity family.
    pub fn in_range(&self, arity: &Arity) -> Result<(), HistoryError> {
        if self.width() != arity.len() {
            return Err(HistoryError::WidthMismatch(self.width(), arity.len()));
        }
        for (e, &v) in self.vals.iter().enumerate() {
            if v != UNDEF && v >= arity.size(e) {
                return Err(HistoryError::ValueOutOfRange {
                    event: e,
                    value: v,
                    size: arity.size(e),
                });
            }
        }
        Ok(())
    }

    /// Re-embeds into a wider event set: event `e` here becomes `e + shift`.
    pub fn shift(&self, new_width: usize, shift: usize) -> History {
        let mut h = History::empty(new_width);
        for (e, &v) in self.vals.iter().enumerate() {
            if v != UNDEF {
                h.vals[e + shift] = v;
            }
        }
        h
    }

    /// Readable form like `{A:0,B:1}`, events in id order.
    pub fn display(&self, events: &EventSet) -> String {
        let parts: Vec<String> = self
            .vals
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != UNDEF)
            .map(|(e, &v)| format!("{}:{}", events.name(e), v))
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Digit string over all events, `_` for events outside the domain.
    /// Only usable while every value is a single digit.
    pub fn digit_string(&self) -> String {
        self.vals
            .iter()
            .map(|&v| match v {
                UNDEF => "_".to_string(),
                v if v < 10 => v.to_string(),
                v => format!("[{v}]"),
            })
            .collect()
    }

    pub fn to_json(&self, events: &EventSet) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        for (e, &v) in self.vals.iter().enumerate() {
            if v != UNDEF {
                obj.insert(events.name(e).to_string(), serde_json::json!(v));
            }
        }
        serde_json::Value::Object(obj)
    }

    pub fn from_json(value: &serde_json::Value, events: &EventSet) -> Result<Self, HistoryError> {
        let obj = value
            .as_object()
            .ok_or_else(|| HistoryError::Json("expected an object".into()))?;
        let mut h = History::empty(events.len());
        for (name, v) in obj {
            let e = events
                .id(name)
                .ok_or_else(|| HistoryError::UnknownEvent(name.clone()))?;
            let v = v
                .as_u64()
                .filter(|&v| v < UNDEF as u64)
                .ok_or_else(|| HistoryError::Json(format!("bad value for event `{name}`")))?;
            h.vals[e] = v as u8;
        }
        Ok(h)
    }

    /// Parses a digit string as produced by [`History::digit_string`].
    pub fn from_digit_string(s: &str, width: usize) -> Result<Self, HistoryError> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != width {
            return Err(HistoryError::Json(format!(
                "digit string `{s}` has width {} but {width} events exist",
                chars.len()
            )));
        }
        let mut h = History::empty(width);
        for (e, c) in chars.iter().enumerate() {
            match c {
                '_' => {}
                c if c.is_ascii_digit() => h.vals[e] = *c as u8 - b'0',
                _ => return Err(HistoryError::Json(format!("bad digit `{c}` in `{s}`"))),
            }
        }
        Ok(h)
    }
}

impl std::fmt::Debug for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "h[")?;
        for (i, &v) in self.vals.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match v {
                UNDEF => write!(f, "_")?,
                v => write!(f, "{v}")?,
            }
        }
        write!(f, "]")
    }
}

/// Canonical order: by domain size, then by the value array with the
/// sentinel sorting last. Deterministic listings everywhere rely on this.
impl Ord for History {
    fn cmp(&self, other: &Self) -> Ordering {
        self.domain_size()
            .cmp(&other.domain_size())
            .then_with(|| self.vals.cmp(&other.vals))
    }
}

impl PartialOrd for History {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
