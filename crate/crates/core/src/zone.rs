//! Difference-bound matrices with exact rational bounds.
//!
//! Index 0 is the reference clock; clock `c` of the automaton lives at index
//! `c + 1`. Entry `(i, j)` bounds `x_i - x_j`. Every public operation leaves
//! the matrix in canonical (shortest-path closed) form.

use std::cmp::Ordering;
use std::fmt;

use crate::model::{ClockConstraint, ClockValuation, CmpOp};
use crate::time::TimeValue;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite { value: TimeValue, strict: bool },
    Infinite,
}

impl Bound {
    pub fn le(value: TimeValue) -> Self {
        Bound::Finite { value, strict: false }
    }

    pub fn lt(value: TimeValue) -> Self {
        Bound::Finite { value, strict: true }
    }

    pub fn le_zero() -> Self {
        Bound::le(TimeValue::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite { .. })
    }

    pub fn add(&self, other: &Bound) -> Bound {
        match (self, other) {
            (Bound::Finite { value: a, strict: sa }, Bound::Finite { value: b, strict: sb }) => {
                Bound::Finite { value: a + b, strict: *sa || *sb }
            }
            _ => Bound::Infinite,
        }
    }

    fn closed(&self) -> Bound {
        match self {
            Bound::Finite { value, .. } => Bound::le(value.clone()),
            Bound::Infinite => Bound::Infinite,
        }
    }

    /// Whether a difference equal to `value` satisfies this bound.
    pub fn admits(&self, value: &TimeValue) -> bool {
        match self {
            Bound::Infinite => true,
            Bound::Finite { value: b, strict: true } => value < b,
            Bound::Finite { value: b, strict: false } => value <= b,
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Infinite, Bound::Infinite) => Ordering::Equal,
            (Bound::Infinite, _) => Ordering::Greater,
            (_, Bound::Infinite) => Ordering::Less,
            (Bound::Finite { value: a, strict: sa }, Bound::Finite { value: b, strict: sb }) => {
                a.cmp(b).then_with(|| sb.cmp(sa))
            }
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Infinite => write!(f, "<inf"),
            Bound::Finite { value, strict: true } => write!(f, "<{}", value),
            Bound::Finite { value, strict: false } => write!(f, "<={}", value),
        }
    }
}

/// An interval of reals with optional strict endpoints; `hi = None` is unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: TimeValue,
    pub lo_strict: bool,
    pub hi: Option<TimeValue>,
    pub hi_strict: bool,
}

impl Interval {
    pub fn contains(&self, v: &TimeValue) -> bool {
        let above = if self.lo_strict { v > &self.lo } else { v >= &self.lo };
        let below = match &self.hi {
            None => true,
            Some(h) => {
                if self.hi_strict {
                    v < h
                } else {
                    v <= h
                }
            }
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match &self.hi {
            None => false,
            Some(h) => h < &self.lo || (h == &self.lo && (self.lo_strict || self.hi_strict)),
        }
    }

    /// The member of the interval closest to `target`; open endpoints are
    /// approached to within `min(width / 2, slack)`.
    pub fn nearest(&self, target: &TimeValue, slack: &TimeValue) -> TimeValue {
        if self.contains(target) {
            return target.clone();
        }
        let width = self.hi.as_ref().map(|h| h - &self.lo);
        let step = match &width {
            Some(w) => TimeValue::min_of(&(w * &TimeValue::from_ratio(1, 2)), slack),
            None => slack.clone(),
        };
        if target < &self.lo || (target == &self.lo && self.lo_strict) {
            if self.lo_strict {
                &self.lo + &step
            } else {
                self.lo.clone()
            }
        } else {
            let hi = self.hi.clone().expect("target above an unbounded interval is inside it");
            if self.hi_strict {
                &hi - &step
            } else {
                hi
            }
        }
    }

    /// A simple interior-ish member: the lower end when closed, otherwise a point just above it.
    pub fn smallest_member(&self, slack: &TimeValue) -> TimeValue {
        self.nearest(&self.lo, slack)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Zone {
    dim: usize,
    m: Vec<Bound>,
    empty: bool,
}

impl fmt::Debug for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "Zone(empty)");
        }
        write!(f, "Zone[")?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && self.get(i, j).is_finite() {
                    write!(f, " x{}-x{}{}", i, j, self.get(i, j))?;
                }
            }
        }
        write!(f, " ]")
    }
}

impl Zone {
    /// All valuations of `clocks` non-negative clocks.
    pub fn universe(clocks: usize) -> Self {
        let dim = clocks + 1;
        let mut m = vec![Bound::Infinite; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Bound::le_zero();
            m[i] = Bound::le_zero(); // row 0: 0 - x_i <= 0
        }
        Zone { dim, m, empty: false }
    }

    pub fn point(values: &[TimeValue]) -> Self {
        let mut z = Zone::universe(values.len());
        for (c, v) in values.iter().enumerate() {
            z.set(c + 1, 0, Bound::le(v.clone()));
            z.set(0, c + 1, Bound::le(-v.clone()));
        }
        z.canonicalize();
        z
    }

    pub fn from_valuation(v: &ClockValuation) -> Self {
        Zone::point(&v.values)
    }

    pub fn num_clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn get(&self, i: usize, j: usize) -> &Bound {
        &self.m[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    fn canonicalize(&mut self) {
        if self.empty {
            return;
        }
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.m[i * n + k].clone();
                if !ik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let kj = &self.m[k * n + j];
                    if !kj.is_finite() {
                        continue;
                    }
                    let via = ik.add(kj);
                    if via < self.m[i * n + j] {
                        self.m[i * n + j] = via;
                    }
                }
            }
        }
        for i in 0..n {
            if self.m[i * n + i] < Bound::le_zero() {
                self.empty = true;
                return;
            }
        }
    }

    /// Tightens `x_i - x_j` by `b` (indices are matrix indices).
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) {
        if self.empty {
            return;
        }
        if b < *self.get(i, j) {
            self.set(i, j, b);
            self.canonicalize();
        }
    }

    pub fn constrain_atom(&mut self, atom: &ClockConstraint) {
        let c = TimeValue::from_integer(atom.bound as i64);
        let x = atom.clock + 1;
        match atom.op {
            CmpOp::Lt => self.constrain(x, 0, Bound::lt(c)),
            CmpOp::Le => self.constrain(x, 0, Bound::le(c)),
            CmpOp::Gt => self.constrain(0, x, Bound::lt(-c)),
            CmpOp::Ge => self.constrain(0, x, Bound::le(-c)),
        }
    }

    pub fn constrain_guard(&mut self, guard: &[ClockConstraint]) {
        for g in guard {
            self.constrain_atom(g);
        }
    }

    pub fn intersect(&mut self, other: &Zone) {
        assert_eq!(self.dim, other.dim, "zone dimension mismatch");
        if self.empty {
            return;
        }
        if other.empty {
            self.empty = true;
            return;
        }
        let mut changed = false;
        for k in 0..self.m.len() {
            if other.m[k] < self.m[k] {
                self.m[k] = other.m[k].clone();
                changed = true;
            }
        }
        if changed {
            self.canonicalize();
        }
    }

    pub fn intersection(&self, other: &Zone) -> Zone {
        let mut z = self.clone();
        z.intersect(other);
        z
    }

    /// Translates every valuation by `t` (which may be negative).
    pub fn shift(&mut self, t: &TimeValue) {
        if self.empty {
            return;
        }
        let neg = -t.clone();
        for i in 1..self.dim {
            let up = self.get(i, 0).clone();
            if let Bound::Finite { value, strict } = up {
                self.set(i, 0, Bound::Finite { value: value + t, strict });
            }
            let lo = self.get(0, i).clone();
            if let Bound::Finite { value, strict } = lo {
                self.set(0, i, Bound::Finite { value: value + &neg, strict });
            }
        }
        if t.is_negative() {
            // moving left may cross x >= 0
            for i in 1..self.dim {
                let b = self.get(0, i).clone();
                if Bound::le_zero() < b {
                    self.set(0, i, Bound::le_zero());
                }
            }
            self.canonicalize();
        }
    }

    /// Time elapse: all valuations `v + d` with `d >= 0`.
    pub fn up(&mut self) {
        if self.empty {
            return;
        }
        for i in 1..self.dim {
            self.set(i, 0, Bound::Infinite);
        }
    }

    /// Time predecessors: all `v - d >= 0` with `d >= 0`.
    pub fn down(&mut self) {
        if self.empty {
            return;
        }
        let n = self.dim;
        for i in 1..n {
            let mut best = Bound::le_zero();
            for j in 1..n {
                if self.get(j, i) < &best {
                    best = self.get(j, i).clone();
                }
            }
            self.set(0, i, best);
        }
        self.canonicalize();
    }

    pub fn reset(&mut self, clocks: &[usize]) {
        if self.empty {
            return;
        }
        let n = self.dim;
        for &c in clocks {
            let x = c + 1;
            for j in 0..n {
                if j != x {
                    let row0 = self.get(0, j).clone();
                    let col0 = self.get(j, 0).clone();
                    self.set(x, j, row0);
                    self.set(j, x, col0);
                }
            }
            self.set(x, x, Bound::le_zero());
        }
        self.canonicalize();
    }

    /// Removes every constraint on the given clocks (keeping non-negativity).
    pub fn free(&mut self, clocks: &[usize]) {
        if self.empty {
            return;
        }
        let n = self.dim;
        for &c in clocks {
            let x = c + 1;
            for j in 0..n {
                if j != x {
                    self.set(x, j, Bound::Infinite);
                    let b = self.get(j, 0).clone();
                    self.set(j, x, b);
                }
            }
            self.set(0, x, Bound::le_zero());
        }
        self.canonicalize();
    }

    /// Replaces every strict bound by its non-strict counterpart.
    pub fn close(&mut self) {
        for b in self.m.iter_mut() {
            *b = b.closed();
        }
        if !self.empty {
            self.canonicalize();
        }
    }

    /// `self ⊇ other`.
    pub fn includes(&self, other: &Zone) -> bool {
        if other.empty {
            return true;
        }
        if self.empty {
            return false;
        }
        self.m.iter().zip(&other.m).all(|(a, b)| b <= a)
    }

    pub fn contains_point(&self, values: &[TimeValue]) -> bool {
        if self.empty || values.len() + 1 != self.dim {
            return false;
        }
        let at = |i: usize| if i == 0 { TimeValue::zero() } else { values[i - 1].clone() };
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && !self.get(i, j).admits(&(at(i) - at(j))) {
                    return false;
                }
            }
        }
        true
    }

    /// Interval of values taken by one clock over the zone.
    pub fn clock_interval(&self, clock: usize) -> Option<Interval> {
        if self.empty {
            return None;
        }
        let x = clock + 1;
        let (lo, lo_strict) = match self.get(0, x) {
            Bound::Finite { value, strict } => (-value.clone(), *strict),
            Bound::Infinite => (TimeValue::zero(), false),
        };
        let (hi, hi_strict) = match self.get(x, 0) {
            Bound::Finite { value, strict } => (Some(value.clone()), *strict),
            Bound::Infinite => (None, false),
        };
        Some(Interval { lo, lo_strict, hi, hi_strict })
    }

    /// Delays `d >= 0` such that `values + d` lies in the zone.
    pub fn delay_interval(&self, values: &[TimeValue]) -> Option<Interval> {
        if self.empty {
            return None;
        }
        // zone differences between clocks are unaffected by a uniform delay
        let mut probe = Zone::point(values);
        probe.up();
        probe.intersect(self);
        if probe.is_empty() {
            return None;
        }
        let mut lo = TimeValue::zero();
        let mut lo_strict = false;
        let mut hi: Option<TimeValue> = None;
        let mut hi_strict = false;
        for (c, v) in values.iter().enumerate() {
            let x = c + 1;
            if let Bound::Finite { value, strict } = self.get(0, x) {
                let l = -value.clone() - v;
                if l > lo || (l == lo && *strict && !lo_strict) {
                    lo = l;
                    lo_strict = *strict;
                }
            }
            if let Bound::Finite { value, strict } = self.get(x, 0) {
                let h = value - v;
                let tighter = match &hi {
                    None => true,
                    Some(cur) => h < *cur || (h == *cur && *strict && !hi_strict),
                };
                if tighter {
                    hi = Some(h);
                    hi_strict = *strict;
                }
            }
        }
        if values.is_empty() {
            return Some(Interval { lo, lo_strict, hi, hi_strict });
        }
        let iv = Interval { lo, lo_strict, hi, hi_strict };
        if iv.is_empty() {
            None
        } else {
            Some(iv)
        }
    }

    /// Some valuation in the zone, preferring closed lower ends so values stay simple.
    pub fn pick_point(&self) -> Option<Vec<TimeValue>> {
        if self.empty {
            return None;
        }
        let mut z = self.clone();
        let slack = TimeValue::from_ratio(1, 2);
        let mut out = Vec::with_capacity(self.dim - 1);
        for c in 0..self.dim - 1 {
            let iv = z.clock_interval(c)?;
            let v = iv.smallest_member(&slack);
            z.constrain(c + 1, 0, Bound::le(v.clone()));
            z.constrain(0, c + 1, Bound::le(-v.clone()));
            if z.is_empty() {
                return None;
            }
            out.push(v);
        }
        Some(out)
    }

    /// Same zone with one extra clock appended, equal to the reference (value 0).
    pub fn with_fresh_clock(&self) -> Zone {
        let old = self.dim;
        let dim = old + 1;
        let mut m = vec![Bound::Infinite; dim * dim];
        for i in 0..old {
            for j in 0..old {
                m[i * dim + j] = self.get(i, j).clone();
            }
        }
        let z = old;
        for j in 0..old {
            // z - x_j = 0 - x_j and x_j - z = x_j - 0
            m[z * dim + j] = self.get(0, j).clone();
            m[j * dim + z] = self.get(j, 0).clone();
        }
        m[z * dim + z] = Bound::le_zero();
        Zone { dim, m, empty: self.empty }
    }
}
