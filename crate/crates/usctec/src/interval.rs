//! Unions of half-open rational subintervals of `[0, 1]`.
//!
//! Row blocks of the data matrix are addressed by their location in `[0, 1)`:
//! the row with index `a*q` lives at location `a`. Storage placements and
//! storage selections are interval sets over these locations.

use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::rational::Rat;

/// A single half-open interval `[start, end)` with `start < end`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Interval {
    pub start: Rat,
    pub end: Rat,
}

impl Interval {
    pub fn new(start: Rat, end: Rat) -> Self {
        assert!(start < end, "empty or inverted interval [{start}, {end})");
        Interval { start, end }
    }

    pub fn length(&self) -> Rat {
        &self.end - &self.start
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A sorted union of pairwise-disjoint, maximal half-open intervals.
///
/// Adjacent intervals are always merged, so two sets are equal iff they cover
/// the same points.
#[derive(Clone, PartialEq, Eq, Debug, Default, Deserialize)]
#[serde(from = "Vec<Interval>")]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Adds `[start, end)`, merging with anything it touches. A degenerate
    /// `start == end` insertion is a no-op.
    pub fn insert(&mut self, start: Rat, end: Rat) {
        if start >= end {
            return;
        }
        self.intervals.push(Interval { start, end });
        self.normalize();
    }

    fn normalize(&mut self) {
        self.intervals
            .sort_by(|a, b| a.start.cmp(&b.start).then(a.end.cmp(&b.end)));
        let mut merged: Vec<Interval> = Vec::with_capacity(self.intervals.len());
        for iv in self.intervals.drain(..) {
            match merged.last_mut() {
                Some(last) if iv.start <= last.end => {
                    if iv.end > last.end {
                        last.end = iv.end;
                    }
                }
                _ => merged.push(iv),
            }
        }
        self.intervals = merged;
    }

    /// Exact union of two sets.
    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = self.clone();
        for iv in &other.intervals {
            out.intervals.push(iv.clone());
        }
        out.normalize();
        out
    }

    /// Total measure, `sum(end - start)`.
    pub fn measure(&self) -> Rat {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// Measure of the intersection with `[0, y)`.
    pub fn measure_below(&self, y: &Rat) -> Rat {
        let mut total = Rat::zero();
        for iv in &self.intervals {
            if &iv.start >= y {
                break;
            }
            let end = if &iv.end < y { iv.end.clone() } else { y.clone() };
            total += end - &iv.start;
        }
        total
    }

    /// Whether every point of `self` is covered by `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals.iter().all(|iv| {
            other
                .intervals
                .iter()
                .any(|o| o.start <= iv.start && iv.end <= o.end)
        })
    }

    pub fn contains(&self, point: &Rat) -> bool {
        self.intervals
            .iter()
            .any(|iv| &iv.start <= point && point < &iv.end)
    }

    /// Largest `y` such that `measure_below(y) <= cap`, or `None` when the
    /// whole set fits under `cap` (no constraint).
    ///
    /// The measure function is flat between stored intervals, so when the cap
    /// is reached exactly at an interval boundary the supremum extends to the
    /// start of the next interval.
    pub fn cap_boundary(&self, cap: &Rat) -> Option<Rat> {
        if &self.measure() <= cap {
            return None;
        }
        let mut used = Rat::zero();
        for iv in &self.intervals {
            let next = &used + iv.length();
            if &next > cap {
                return Some(&iv.start + (cap - &used));
            }
            used = next;
        }
        unreachable!("measure exceeds cap but no interval crossed it")
    }
}

impl From<Vec<Interval>> for IntervalSet {
    fn from(intervals: Vec<Interval>) -> Self {
        let mut set = IntervalSet { intervals };
        set.intervals.retain(|iv| iv.start < iv.end);
        set.normalize();
        set
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        iter.into_iter().collect::<Vec<_>>().into()
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.intervals.len()))?;
        for iv in &self.intervals {
            seq.serialize_element(iv)?;
        }
        seq.end()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}
