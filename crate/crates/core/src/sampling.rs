//! The weighted time distribution: a letter is drawn with probability
//! proportional to its delay, then extended to a factor of weight at least `k`.
//!
//! Positions are 0-based.

use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Letter, TimedWord};
use crate::time::TimeValue;

/// Uniform draws are integers in `[0, 2^63)` scaled onto `[0, T)`.
pub const DRAW_BITS: u32 = 63;

pub const DEFAULT_RETRY_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factor {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub letters: Vec<Letter>,
    pub weight: TimeValue,
    /// The word ended before the weight reached `k`.
    pub truncated: bool,
}

impl Factor {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn word(&self) -> TimedWord {
        TimedWord::new(self.letters.clone())
    }

    pub fn overlaps(&self, other: &Factor) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// The smallest factor containing both; they must overlap.
    pub fn union(&self, other: &Factor) -> Factor {
        assert!(self.overlaps(other), "union of disjoint factors");
        let (first, second) = if self.start <= other.start { (self, other) } else { (other, self) };
        let mut letters = first.letters.clone();
        if second.end > first.end {
            let skip = first.end + 1 - second.start;
            letters.extend(second.letters[skip..].iter().cloned());
        }
        let end = first.end.max(second.end);
        let weight = letters.iter().map(|l| &l.delay).sum();
        let truncated = if second.end > first.end { second.truncated } else { first.truncated };
        Factor { start: first.start, end, letters, weight, truncated }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleSet {
    /// Disjoint and ordered by position.
    pub factors: Vec<Factor>,
    /// Spans produced by merging overlapping draws, in the order they happened.
    pub merges: Vec<(usize, usize)>,
    /// Number of factors drawn, including replacements.
    pub draws: usize,
    /// The word was too light for the requested samples.
    pub degenerate: bool,
}

impl SampleSet {
    pub fn empty() -> Self {
        SampleSet { factors: Vec::new(), merges: Vec::new(), draws: 0, degenerate: false }
    }
}

fn two_pow_draw() -> BigInt {
    BigInt::from(1u64) << DRAW_BITS
}

/// The point `T * r / 2^63` of `[0, T)`.
pub fn scale_draw(total: &TimeValue, r: u64) -> TimeValue {
    debug_assert!(r < 1u64 << DRAW_BITS);
    let u = TimeValue::from_big(BigInt::from(r), two_pow_draw());
    total * &u
}

/// Exactly `a * r / 2^63 < b`, in integers when the parts are small.
pub fn draw_below(r: u64, a: &TimeValue, b: &TimeValue) -> bool {
    if let (Some((an, ad)), Some((bn, bd))) = (a.small_parts(), b.small_parts()) {
        let lhs = (r as i128).checked_mul(an as i128).and_then(|x| x.checked_mul(bd as i128));
        let rhs = (bn as i128).checked_mul(ad as i128).and_then(|x| x.checked_mul(1i128 << DRAW_BITS));
        if let (Some(lhs), Some(rhs)) = (lhs, rhs) {
            return lhs < rhs;
        }
    }
    &scale_draw(a, r) < b
}

pub fn draw_u63<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.gen::<u64>() >> (64 - DRAW_BITS)
}

/// The letter whose time interval `[t_{j-1}, t_j)` contains the draw, by binary search.
pub fn position_for_draw(w: &TimedWord, r: u64) -> Option<usize> {
    let total = w.total_weight();
    if total.is_zero() {
        return None;
    }
    Some(w.absolute_times().partition_point(|t| !draw_below(r, &total, t)))
}

pub fn sample_position<R: Rng + ?Sized>(w: &TimedWord, rng: &mut R) -> Result<usize> {
    position_for_draw(w, draw_u63(rng)).ok_or(Error::ZeroWeight)
}

/// The slice starting at `j`, extended just far enough to weigh at least `k`.
pub fn k_factor(w: &TimedWord, j: usize, k: &TimeValue) -> Factor {
    assert!(j < w.len(), "factor start out of range");
    let letters = w.letters();
    let mut weight = TimeValue::zero();
    let mut end = j;
    loop {
        weight += &letters[end].delay;
        if &weight >= k {
            break;
        }
        if end + 1 == letters.len() {
            return Factor { start: j, end, letters: letters[j..=end].to_vec(), weight, truncated: true };
        }
        end += 1;
    }
    Factor { start: j, end, letters: letters[j..=end].to_vec(), weight, truncated: false }
}

fn whole_word(w: &TimedWord) -> Factor {
    Factor {
        start: 0,
        end: w.len().saturating_sub(1),
        letters: w.letters().to_vec(),
        weight: w.total_weight(),
        truncated: true,
    }
}

/// Builds `l` disjoint factors from a sequence of drawn factors.
///
/// Overlapping draws are merged into their union and a replacement is drawn;
/// at most `l + retry_cap` draws are used. Returns `None` when the draws run out.
pub fn assemble(l: usize, retry_cap: usize, next: &mut dyn FnMut() -> Option<Factor>) -> Option<SampleSet> {
    let mut set = SampleSet::empty();
    while set.factors.len() < l {
        if set.draws >= l + retry_cap {
            return None;
        }
        let mut f = next()?;
        set.draws += 1;
        let mut merged = false;
        while let Some(i) = set.factors.iter().position(|g| g.overlaps(&f)) {
            let g = set.factors.remove(i);
            f = g.union(&f);
            merged = true;
        }
        if merged {
            set.merges.push((f.start, f.end));
        }
        let at = set.factors.partition_point(|g| g.start < f.start);
        set.factors.insert(at, f);
    }
    Some(set)
}

/// `l` disjoint factors of weight at least `k` drawn from the weighted time distribution.
///
/// A word lighter than `k`, or one where the retries run out, yields a single
/// degenerate factor holding the whole word.
pub fn sample_factors<R: Rng + ?Sized>(w: &TimedWord, l: usize, k: &TimeValue, rng: &mut R, retry_cap: usize) -> SampleSet {
    assert!(l >= 1, "at least one sample");
    let total = w.total_weight();
    let degenerate = |draws| SampleSet {
        factors: if w.is_empty() { Vec::new() } else { vec![whole_word(w)] },
        merges: Vec::new(),
        draws,
        degenerate: true,
    };
    if total.is_zero() || &total < k {
        return degenerate(0);
    }
    let mut drawn = 0;
    let mut next = || {
        drawn += 1;
        let j = position_for_draw(w, draw_u63(rng)).expect("positive weight");
        Some(k_factor(w, j, k))
    };
    match assemble(l, retry_cap, &mut next) {
        Some(set) => set,
        None => degenerate(drawn),
    }
}

#[derive(Clone, Debug)]
struct Slot {
    start: usize,
    window: Vec<Letter>,
    weight: TimeValue,
}

/// One-pass weighted reservoir sampling of factor windows.
///
/// Each slot keeps letter `i` with probability `tau_i / W_i` (`W_i` the weight
/// seen so far), so its final start is distributed exactly as the offline
/// draw. After the start, the slot buffers letters until its window weighs
/// `k`. The first `l` slots are the samples; the remaining `spare` slots
/// serve as replacement draws when samples overlap.
#[derive(Clone, Debug)]
pub struct ReservoirSampler {
    l: usize,
    k: TimeValue,
    slots: Vec<Option<Slot>>,
    seen_weight: TimeValue,
    position: usize,
}

impl ReservoirSampler {
    pub fn new(l: usize, spare: usize, k: TimeValue) -> Self {
        assert!(l >= 1, "at least one sample");
        ReservoirSampler { l, k, slots: vec![None; l + spare], seen_weight: TimeValue::zero(), position: 0 }
    }

    pub fn letters_seen(&self) -> usize {
        self.position
    }

    pub fn weight_seen(&self) -> &TimeValue {
        &self.seen_weight
    }

    /// Letters currently buffered across all slots.
    pub fn buffered(&self) -> usize {
        self.slots.iter().flatten().map(|s| s.window.len()).sum()
    }

    pub fn push<R: Rng + ?Sized>(&mut self, letter: &Letter, rng: &mut R) {
        let i = self.position;
        self.position += 1;
        self.seen_weight += &letter.delay;
        let positive = !letter.delay.is_zero();
        for slot in self.slots.iter_mut() {
            let take = positive && {
                // keep with probability delay / seen_weight
                draw_below(draw_u63(rng), &self.seen_weight, &letter.delay)
            };
            if take {
                *slot = Some(Slot { start: i, window: vec![letter.clone()], weight: letter.delay.clone() });
            } else if let Some(s) = slot {
                if s.weight < self.k {
                    s.weight += &letter.delay;
                    s.window.push(letter.clone());
                }
            }
        }
    }

    fn factor(&self, slot: &Slot) -> Factor {
        Factor {
            start: slot.start,
            end: slot.start + slot.window.len() - 1,
            letters: slot.window.clone(),
            weight: slot.weight.clone(),
            truncated: slot.weight < self.k,
        }
    }

    /// Factors in slot order, before merging.
    pub fn slot_factors(&self) -> Vec<Factor> {
        self.slots.iter().flatten().map(|s| self.factor(s)).collect()
    }

    /// Merges overlapping samples using spare slots as replacements. A stream
    /// lighter than `k`, or one where the spares run out, gives an empty
    /// degenerate set, since the whole word is not retained.
    pub fn finish(&self) -> SampleSet {
        if self.position == 0 {
            return SampleSet::empty();
        }
        let degenerate = SampleSet { factors: Vec::new(), merges: Vec::new(), draws: 0, degenerate: true };
        if self.seen_weight.is_zero() || self.seen_weight < self.k {
            return degenerate;
        }
        let mut pending = self.slot_factors().into_iter();
        let spare = self.slots.len() - self.l;
        assemble(self.l, spare, &mut || pending.next()).unwrap_or(degenerate)
    }
}

/// Runs the reservoir sampler over a stream of letters.
pub fn reservoir_stream<I, R>(letters: I, l: usize, k: &TimeValue, rng: &mut R, spare: usize) -> SampleSet
where
    I: IntoIterator<Item = Letter>,
    R: Rng + ?Sized,
{
    let mut sampler = ReservoirSampler::new(l, spare, k.clone());
    for letter in letters {
        sampler.push(&letter, rng);
    }
    sampler.finish()
}
