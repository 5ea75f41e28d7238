//! Timed edit distance: deletions and insertions cost the letter's delay,
//! retiming a letter costs the change in delay, and symbols never change.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Letter, TimedWord};
use crate::time::TimeValue;

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 6;

/// One edit, with its position in the word as it stands when the edit is applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Delete { position: usize },
    Insert { position: usize, symbol: String, delay: TimeValue },
    Retime { position: usize, delay: TimeValue },
}

impl EditOp {
    pub fn position(&self) -> usize {
        match self {
            EditOp::Delete { position } | EditOp::Insert { position, .. } | EditOp::Retime { position, .. } => *position,
        }
    }
}

/// An edit together with what it cost on the word it was applied to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostedEdit {
    #[serde(flatten)]
    pub op: EditOp,
    pub cost: TimeValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceResult {
    pub absolute: TimeValue,
    pub relative: TimeValue,
    /// Set when `relative > 1`, which happens once letters must be replaced rather than retimed.
    pub relative_exceeds_one: bool,
    pub script: Vec<CostedEdit>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Step {
    Match,
    Insert,
    Delete,
}

fn delta(a: &Letter, b: &Letter) -> Option<TimeValue> {
    (a.symbol == b.symbol).then(|| a.delay.abs_diff(&b.delay))
}

/// `D / max(weight(w1), weight(w2))`, or 0 when both words weigh nothing.
pub fn relative(absolute: &TimeValue, w1: &TimedWord, w2: &TimedWord) -> TimeValue {
    let norm = TimeValue::max_of(&w1.total_weight(), &w2.total_weight());
    if norm.is_zero() {
        TimeValue::zero()
    } else {
        absolute.div(&norm)
    }
}

fn table(w1: &TimedWord, w2: &TimedWord) -> Vec<Vec<TimeValue>> {
    let (a, b) = (w1.letters(), w2.letters());
    let mut d = vec![vec![TimeValue::zero(); b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        d[i][0] = &d[i - 1][0] + &a[i - 1].delay;
    }
    for j in 1..=b.len() {
        d[0][j] = &d[0][j - 1] + &b[j - 1].delay;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let del = &d[i - 1][j] + &a[i - 1].delay;
            let ins = &d[i][j - 1] + &b[j - 1].delay;
            let mut best = TimeValue::min_of(&del, &ins);
            if let Some(sub) = delta(&a[i - 1], &b[j - 1]) {
                let m = &d[i - 1][j - 1] + &sub;
                if m < best {
                    best = m;
                }
            }
            d[i][j] = best;
        }
    }
    d
}

/// Absolute distance only, in linear memory.
pub fn timed_edit_distance_value(w1: &TimedWord, w2: &TimedWord) -> TimeValue {
    let (a, b) = (w1.letters(), w2.letters());
    let mut prev: Vec<TimeValue> = Vec::with_capacity(b.len() + 1);
    prev.push(TimeValue::zero());
    for l in b {
        let next = prev.last().expect("non-empty") + &l.delay;
        prev.push(next);
    }
    for la in a {
        let mut cur = Vec::with_capacity(b.len() + 1);
        cur.push(&prev[0] + &la.delay);
        for (j, lb) in b.iter().enumerate() {
            let del = &prev[j + 1] + &la.delay;
            let ins = &cur[j] + &lb.delay;
            let mut best = TimeValue::min_of(&del, &ins);
            if let Some(sub) = delta(la, lb) {
                let m = &prev[j] + &sub;
                if m < best {
                    best = m;
                }
            }
            cur.push(best);
        }
        prev = cur;
    }
    prev.pop().expect("non-empty")
}

/// Exact distance with a minimum-cost script turning `w1` into `w2`.
///
/// Walking back from the last cell, a match is preferred to an insertion and
/// an insertion to a deletion, so at equal positions deletions come first.
pub fn timed_edit_distance(w1: &TimedWord, w2: &TimedWord) -> DistanceResult {
    let d = table(w1, w2);
    let (a, b) = (w1.letters(), w2.letters());
    let (mut i, mut j) = (a.len(), b.len());
    let mut steps = Vec::with_capacity(i + j);
    while i > 0 || j > 0 {
        let here = &d[i][j];
        if i > 0 && j > 0 {
            if let Some(sub) = delta(&a[i - 1], &b[j - 1]) {
                if &(&d[i - 1][j - 1] + &sub) == here {
                    steps.push(Step::Match);
                    i -= 1;
                    j -= 1;
                    continue;
                }
            }
        }
        if j > 0 && &(&d[i][j - 1] + &b[j - 1].delay) == here {
            steps.push(Step::Insert);
            j -= 1;
        } else {
            steps.push(Step::Delete);
            i -= 1;
        }
    }
    steps.reverse();

    let mut script = Vec::new();
    let (mut i, mut j, mut pos) = (0, 0, 0);
    for s in steps {
        match s {
            Step::Match => {
                if a[i].delay != b[j].delay {
                    script.push(CostedEdit {
                        op: EditOp::Retime { position: pos, delay: b[j].delay.clone() },
                        cost: a[i].delay.abs_diff(&b[j].delay),
                    });
                }
                i += 1;
                j += 1;
                pos += 1;
            }
            Step::Insert => {
                script.push(CostedEdit {
                    op: EditOp::Insert { position: pos, symbol: b[j].symbol.clone(), delay: b[j].delay.clone() },
                    cost: b[j].delay.clone(),
                });
                j += 1;
                pos += 1;
            }
            Step::Delete => {
                script.push(CostedEdit { op: EditOp::Delete { position: pos }, cost: a[i].delay.clone() });
                i += 1;
            }
        }
    }
    let absolute = d[a.len()][b.len()].clone();
    let rel = relative(&absolute, w1, w2);
    let exceeds = rel > 1;
    DistanceResult { absolute, relative: rel, relative_exceeds_one: exceeds, script }
}

/// Applies the edits in order, returning the new word and the summed cost.
pub fn apply_script(w: &TimedWord, script: &[EditOp]) -> Result<(TimedWord, TimeValue)> {
    let mut letters: Vec<Letter> = w.letters().to_vec();
    let mut cost = TimeValue::zero();
    for op in script {
        match op {
            EditOp::Delete { position } => {
                if *position >= letters.len() {
                    return Err(Error::ScriptPosition { position: *position, len: letters.len() });
                }
                let removed = letters.remove(*position);
                cost += removed.delay;
            }
            EditOp::Insert { position, symbol, delay } => {
                if *position > letters.len() {
                    return Err(Error::ScriptPosition { position: *position, len: letters.len() });
                }
                letters.insert(*position, Letter::new(symbol.clone(), delay.clone()));
                cost += delay;
            }
            EditOp::Retime { position, delay } => {
                let Some(l) = letters.get_mut(*position) else {
                    return Err(Error::ScriptPosition { position: *position, len: letters.len() });
                };
                cost += l.delay.abs_diff(delay);
                l.delay = delay.clone();
            }
        }
    }
    Ok((TimedWord::new(letters), cost))
}

pub fn script_ops(script: &[CostedEdit]) -> Vec<EditOp> {
    script.iter().map(|c| c.op.clone()).collect()
}

/// Minimum over every monotone matching of equal symbols, by exhaustive search.
pub fn brute_force_distance(w1: &TimedWord, w2: &TimedWord, cap: usize) -> Result<TimeValue> {
    for w in [w1, w2] {
        if w.len() > cap {
            return Err(Error::TooLong { len: w.len(), cap });
        }
    }
    fn go(a: &[Letter], b: &[Letter]) -> TimeValue {
        let Some((first, rest)) = a.split_first() else {
            return b.iter().map(|l| &l.delay).sum();
        };
        let mut best = &first.delay + &go(rest, b);
        let mut skipped = TimeValue::zero();
        for (k, l) in b.iter().enumerate() {
            if l.symbol == first.symbol {
                let c = &skipped + &first.delay.abs_diff(&l.delay) + go(rest, &b[k + 1..]);
                if c < best {
                    best = c;
                }
            }
            skipped += &l.delay;
        }
        best
    }
    Ok(go(w1.letters(), w2.letters()))
}
