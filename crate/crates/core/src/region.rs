//! Clock regions for diagonal-free constraints and the reachable region automaton.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ClockConstraint, ClockId, ClockValuation, CmpOp, LocationId, Run, SymbolId, TimedAutomaton};
use crate::time::TimeValue;
use crate::zone::{Bound, Zone};

pub const DEFAULT_REGION_CAP: usize = 1_000_000;

/// A clock region in canonical form.
///
/// `ints[x]` is the integer part of a non-saturated clock (`saturated[x]`
/// means `x > c_x`, with `ints[x]` pinned to `c_x`). Non-saturated clocks are
/// split into `zero_frac` and the classes of `frac_classes`, listed by
/// increasing fractional part; every list is sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Region {
    pub ints: Vec<u32>,
    pub saturated: Vec<bool>,
    pub zero_frac: Vec<ClockId>,
    pub frac_classes: Vec<Vec<ClockId>>,
}

impl Region {
    /// The region of the all-zero valuation.
    pub fn zero(clocks: usize) -> Self {
        Region {
            ints: vec![0; clocks],
            saturated: vec![false; clocks],
            zero_frac: (0..clocks).collect(),
            frac_classes: Vec::new(),
        }
    }

    pub fn num_clocks(&self) -> usize {
        self.ints.len()
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated.iter().all(|&s| s)
    }

    pub fn is_bounded(&self) -> bool {
        !self.saturated.iter().any(|&s| s)
    }

    /// No bounded clock sits on an integer, so the region is not punctual in any clock.
    pub fn is_fleshy(&self) -> bool {
        self.zero_frac.is_empty()
    }

    /// Vertices of the closure of a bounded region: the fractional classes
    /// switched from 0 to 1 from the largest class downwards.
    pub fn closure_corners(&self) -> Vec<ClockValuation> {
        let n = self.frac_classes.len();
        (0..=n)
            .map(|ones| {
                let mut values: Vec<TimeValue> = self.ints.iter().map(|&k| TimeValue::from_integer(k as i64)).collect();
                for class in &self.frac_classes[n - ones..] {
                    for &x in class {
                        values[x] = &values[x] + &TimeValue::one();
                    }
                }
                ClockValuation::from_values(values)
            })
            .collect()
    }

    /// The next region reached by letting time elapse, if any.
    pub fn successor(&self, clock_max: &[u32]) -> Option<Region> {
        let mut next = self.clone();
        if !self.zero_frac.is_empty() {
            let mut moving = Vec::new();
            for &x in &self.zero_frac {
                if self.ints[x] >= clock_max[x] {
                    next.saturated[x] = true;
                    next.ints[x] = clock_max[x];
                } else {
                    moving.push(x);
                }
            }
            next.zero_frac.clear();
            if !moving.is_empty() {
                next.frac_classes.insert(0, moving);
            }
            Some(next)
        } else if let Some(top) = next.frac_classes.pop() {
            for &x in &top {
                next.ints[x] += 1;
            }
            next.zero_frac = top;
            Some(next)
        } else {
            None
        }
    }

    pub fn reset(&self, clocks: &[ClockId]) -> Region {
        if clocks.is_empty() {
            return self.clone();
        }
        let mut next = self.clone();
        for &x in clocks {
            next.ints[x] = 0;
            next.saturated[x] = false;
        }
        for class in next.frac_classes.iter_mut() {
            class.retain(|x| !clocks.contains(x));
        }
        next.frac_classes.retain(|c| !c.is_empty());
        next.zero_frac.retain(|x| !clocks.contains(x));
        next.zero_frac.extend_from_slice(clocks);
        next.zero_frac.sort_unstable();
        next.zero_frac.dedup();
        next
    }

    /// Whether every valuation of the region satisfies the atom.
    pub fn satisfies_atom(&self, atom: &ClockConstraint) -> bool {
        let x = atom.clock;
        let c = atom.bound;
        if self.saturated[x] {
            // c <= c_x < value
            return matches!(atom.op, CmpOp::Gt | CmpOp::Ge);
        }
        let k = self.ints[x];
        if self.zero_frac.contains(&x) {
            match atom.op {
                CmpOp::Lt => k < c,
                CmpOp::Le => k <= c,
                CmpOp::Gt => k > c,
                CmpOp::Ge => k >= c,
            }
        } else {
            // k < value < k + 1
            match atom.op {
                CmpOp::Lt | CmpOp::Le => k < c,
                CmpOp::Gt | CmpOp::Ge => k >= c,
            }
        }
    }

    pub fn satisfies(&self, guard: &[ClockConstraint]) -> bool {
        guard.iter().all(|g| self.satisfies_atom(g))
    }

    /// A canonical member: fractional classes at `i/(n+1)`, saturated clocks at `c_x + 1`.
    pub fn representative(&self) -> ClockValuation {
        let n = self.frac_classes.len() as i64;
        let mut values: Vec<TimeValue> = self.ints.iter().map(|&k| TimeValue::from_integer(k as i64)).collect();
        for (i, class) in self.frac_classes.iter().enumerate() {
            let f = TimeValue::from_ratio(i as i64 + 1, n + 1);
            for &x in class {
                values[x] = &values[x] + &f;
            }
        }
        for (x, &s) in self.saturated.iter().enumerate() {
            if s {
                values[x] = TimeValue::from_integer(self.ints[x] as i64 + 1);
            }
        }
        ClockValuation::from_values(values)
    }

    /// A random member of the region with fractional parts on a `2^-20` grid.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ClockValuation {
        let n = self.frac_classes.len();
        let grid: i64 = 1 << 20;
        let mut fracs: Vec<i64> = Vec::with_capacity(n);
        while fracs.len() < n {
            let f = rng.gen_range(1..grid);
            if !fracs.contains(&f) {
                fracs.push(f);
            }
        }
        fracs.sort_unstable();
        let mut values: Vec<TimeValue> = self.ints.iter().map(|&k| TimeValue::from_integer(k as i64)).collect();
        for (class, f) in self.frac_classes.iter().zip(&fracs) {
            let f = TimeValue::from_ratio(*f, grid);
            for &x in class {
                values[x] = &values[x] + &f;
            }
        }
        for (x, &s) in self.saturated.iter().enumerate() {
            if s {
                let extra = TimeValue::from_ratio(rng.gen_range(1..4 * grid), grid);
                values[x] = TimeValue::from_integer(self.ints[x] as i64) + extra;
            }
        }
        ClockValuation::from_values(values)
    }

    /// The region as a zone.
    pub fn to_zone(&self) -> Zone {
        let n = self.num_clocks();
        let mut z = Zone::universe(n);
        let int = |x: usize| TimeValue::from_integer(self.ints[x] as i64);
        for x in 0..n {
            if self.saturated[x] {
                z.constrain(0, x + 1, Bound::lt(-int(x)));
            } else if self.zero_frac.contains(&x) {
                z.constrain(x + 1, 0, Bound::le(int(x)));
                z.constrain(0, x + 1, Bound::le(-int(x)));
            } else {
                z.constrain(x + 1, 0, Bound::lt(int(x) + TimeValue::one()));
                z.constrain(0, x + 1, Bound::lt(-int(x)));
            }
        }
        // fractional order between consecutive classes
        let mut classes: Vec<&Vec<ClockId>> = Vec::new();
        if !self.zero_frac.is_empty() {
            classes.push(&self.zero_frac);
        }
        classes.extend(self.frac_classes.iter());
        for class in &classes {
            for w in class.windows(2) {
                let (a, b) = (w[0], w[1]);
                let d = int(a) - int(b);
                z.constrain(a + 1, b + 1, Bound::le(d.clone()));
                z.constrain(b + 1, a + 1, Bound::le(-d));
            }
        }
        for pair in classes.windows(2) {
            let (a, b) = (pair[0][0], pair[1][0]);
            // frac(a) < frac(b)  <=>  a - b < int(a) - int(b)
            z.constrain(a + 1, b + 1, Bound::lt(int(a) - int(b)));
        }
        z
    }

    pub fn contains(&self, v: &ClockValuation, clock_max: &[u32]) -> bool {
        region_of(v, clock_max) == *self
    }

    pub fn describe(&self, clocks: &[String]) -> String {
        let mut parts = Vec::new();
        for (x, name) in clocks.iter().enumerate() {
            let k = self.ints[x];
            if self.saturated[x] {
                parts.push(format!("{}>{}", name, k));
            } else if self.zero_frac.contains(&x) {
                parts.push(format!("{}={}", name, k));
            } else {
                parts.push(format!("{}<{}<{}", k, name, k + 1));
            }
        }
        let mut out = parts.join(" & ");
        let ordered: Vec<String> = self
            .frac_classes
            .iter()
            .map(|c| c.iter().map(|&x| clocks[x].as_str()).collect::<Vec<_>>().join("="))
            .collect();
        if ordered.len() > 1 || ordered.iter().any(|c| c.contains('=')) {
            let _ = write!(out, " ; frac {}", ordered.join(" < "));
        }
        out
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.num_clocks()).map(|x| format!("x{}", x)).collect();
        f.write_str(&self.describe(&names))
    }
}

/// The unique region containing `v` under the per-clock maximum constants.
pub fn region_of(v: &ClockValuation, clock_max: &[u32]) -> Region {
    let n = v.values.len();
    let mut ints = vec![0u32; n];
    let mut saturated = vec![false; n];
    let mut zero_frac = Vec::new();
    let mut positive: Vec<(TimeValue, ClockId)> = Vec::new();
    for (x, value) in v.values.iter().enumerate() {
        let cx = TimeValue::from_integer(clock_max[x] as i64);
        if value > &cx {
            saturated[x] = true;
            ints[x] = clock_max[x];
            continue;
        }
        let k = value.floor_int();
        ints[x] = u32::try_from(k).expect("integer part bounded by the max constant");
        let f = value.fract();
        if f.is_zero() {
            zero_frac.push(x);
        } else {
            positive.push((f, x));
        }
    }
    positive.sort();
    let mut frac_classes: Vec<Vec<ClockId>> = Vec::new();
    let mut last: Option<TimeValue> = None;
    for (f, x) in positive {
        if last.as_ref() == Some(&f) {
            frac_classes.last_mut().expect("class exists").push(x);
        } else {
            frac_classes.push(vec![x]);
            last = Some(f);
        }
    }
    Region { ints, saturated, zero_frac, frac_classes }
}

/// `R` followed by every region reached by letting time elapse, in order.
pub fn time_successors(region: &Region, clock_max: &[u32]) -> Vec<Region> {
    let mut out = vec![region.clone()];
    while let Some(next) = out.last().expect("non-empty").successor(clock_max) {
        out.push(next);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RegionState {
    pub location: LocationId,
    pub region: Region,
}

/// `(q, R) -> (q', R')` through the time successor `guard_region` (R'') and transition `transition`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionEdge {
    pub source: usize,
    pub target: usize,
    pub transition: usize,
    pub symbol: SymbolId,
    pub guard_region: Region,
}

#[derive(Clone, Debug)]
pub struct RegionAutomaton {
    pub clock_max: Vec<u32>,
    pub states: Vec<RegionState>,
    pub edges: Vec<RegionEdge>,
    pub initial: Vec<usize>,
    pub is_final: Vec<bool>,
    index: HashMap<RegionState, usize>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl RegionAutomaton {
    /// Number of reachable region states.
    pub fn m(&self) -> usize {
        self.states.len()
    }

    pub fn state_id(&self, location: LocationId, region: &Region) -> Option<usize> {
        self.index.get(&RegionState { location, region: region.clone() }).copied()
    }

    pub fn state_of(&self, location: LocationId, v: &ClockValuation) -> Option<usize> {
        self.state_id(location, &region_of(v, &self.clock_max))
    }

    pub fn outgoing(&self, state: usize) -> impl Iterator<Item = &RegionEdge> {
        self.out[state].iter().map(move |&e| &self.edges[e])
    }

    pub fn outgoing_ids(&self, state: usize) -> &[usize] {
        &self.out[state]
    }

    pub fn incoming_ids(&self, state: usize) -> &[usize] {
        &self.inc[state]
    }

    pub fn incoming(&self, state: usize) -> impl Iterator<Item = &RegionEdge> {
        self.inc[state].iter().map(move |&e| &self.edges[e])
    }

    pub fn successors(&self, state: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.outgoing(state).map(|e| e.target).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn has_transition(&self, source: usize, target: usize, transition: usize) -> bool {
        self.outgoing(source).any(|e| e.target == target && e.transition == transition)
    }

    /// Acceptance of an untimed word, reading the region automaton as a finite automaton.
    pub fn accepts_untimed(&self, symbols: &[SymbolId]) -> bool {
        let mut current: Vec<bool> = vec![false; self.m()];
        for &s in &self.initial {
            current[s] = true;
        }
        for &a in symbols {
            let mut next = vec![false; self.m()];
            for (s, on) in current.iter().enumerate() {
                if *on {
                    for e in self.outgoing(s) {
                        if e.symbol == a {
                            next[e.target] = true;
                        }
                    }
                }
            }
            current = next;
        }
        current.iter().enumerate().any(|(s, on)| *on && self.is_final[s])
    }

    /// Region-state sequence of a concrete run, or `None` if some step has no matching edge.
    pub fn project_run(&self, run: &Run) -> Option<Vec<usize>> {
        let mut path = Vec::with_capacity(run.steps.len() + 1);
        path.push(self.state_of(run.start.location, &run.start.valuation)?);
        for step in &run.steps {
            let next = self.state_of(step.state.location, &step.state.valuation)?;
            let prev = *path.last().expect("non-empty");
            if !self.has_transition(prev, next, step.transition) {
                return None;
            }
            path.push(next);
        }
        Some(path)
    }

    pub fn to_document(&self, automaton: &TimedAutomaton) -> RegionDocument {
        RegionDocument {
            m: self.m(),
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(id, s)| StateDoc {
                    id,
                    location: automaton.locations[s.location].clone(),
                    region: s.region.describe(&automaton.clocks),
                    initial: self.initial.contains(&id),
                    accepting: self.is_final[id],
                })
                .collect(),
            transitions: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    source: e.source,
                    target: e.target,
                    symbol: automaton.alphabet[e.symbol].clone(),
                    transition: e.transition,
                    guard_region: e.guard_region.describe(&automaton.clocks),
                })
                .collect(),
        }
    }

    pub fn to_dot(&self, automaton: &TimedAutomaton) -> String {
        let mut out = String::from("digraph regions {\n  rankdir=LR;\n");
        for (id, s) in self.states.iter().enumerate() {
            let shape = if self.is_final[id] { "doublecircle" } else { "circle" };
            let _ = writeln!(
                out,
                "  s{} [shape={}, label=\"{}\\n{}\"];",
                id,
                shape,
                automaton.locations[s.location],
                s.region.describe(&automaton.clocks)
            );
        }
        for &i in &self.initial {
            let _ = writeln!(out, "  init{} [shape=point];\n  init{} -> s{};", i, i, i);
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.edges {
            if seen.insert((e.source, e.target, e.symbol)) {
                let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", e.source, e.target, automaton.alphabet[e.symbol]);
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StateDoc {
    pub id: usize,
    pub location: String,
    pub region: String,
    pub initial: bool,
    pub accepting: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeDoc {
    pub source: usize,
    pub target: usize,
    pub symbol: String,
    pub transition: usize,
    pub guard_region: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionDocument {
    pub m: usize,
    pub states: Vec<StateDoc>,
    pub transitions: Vec<EdgeDoc>,
}

pub fn build_region_automaton(automaton: &TimedAutomaton) -> Result<RegionAutomaton> {
    build_region_automaton_with_cap(automaton, DEFAULT_REGION_CAP)
}

/// Reachable region automaton from `I x {R_0}`, failing once more than `cap` states exist.
pub fn build_region_automaton_with_cap(automaton: &TimedAutomaton, cap: usize) -> Result<RegionAutomaton> {
    let clock_max = automaton.clock_max.clone();
    let n = automaton.num_clocks();
    let mut states: Vec<RegionState> = Vec::new();
    let mut index: HashMap<RegionState, usize> = HashMap::new();
    let mut edges: Vec<RegionEdge> = Vec::new();
    let mut queue = VecDeque::new();
    let mut initial = Vec::new();

    let mut intern = |s: RegionState, states: &mut Vec<RegionState>, queue: &mut VecDeque<usize>| -> Result<usize> {
        if let Some(&id) = index.get(&s) {
            return Ok(id);
        }
        if states.len() >= cap {
            return Err(Error::ResourceLimit { what: "region automaton states", cap });
        }
        let id = states.len();
        index.insert(s.clone(), id);
        states.push(s);
        queue.push_back(id);
        Ok(id)
    };

    for &q in &automaton.initial {
        let id = intern(RegionState { location: q, region: Region::zero(n) }, &mut states, &mut queue)?;
        if !initial.contains(&id) {
            initial.push(id);
        }
    }
    while let Some(id) = queue.pop_front() {
        let RegionState { location, region } = states[id].clone();
        for r2 in time_successors(&region, &clock_max) {
            for (t_idx, t) in automaton.outgoing(location) {
                if !r2.satisfies(&t.guard) {
                    continue;
                }
                let target = RegionState { location: t.target, region: r2.reset(&t.resets) };
                let tid = intern(target, &mut states, &mut queue)?;
                edges.push(RegionEdge { source: id, target: tid, transition: t_idx, symbol: t.symbol, guard_region: r2.clone() });
            }
        }
    }

    let m = states.len();
    let mut out = vec![Vec::new(); m];
    let mut inc = vec![Vec::new(); m];
    for (e_idx, e) in edges.iter().enumerate() {
        out[e.source].push(e_idx);
        inc[e.target].push(e_idx);
    }
    let is_final = states.iter().map(|s| automaton.is_final[s.location]).collect();
    Ok(RegionAutomaton { clock_max, states, edges, initial, is_final, index, out, inc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::membership_exact;
    use crate::test_support::*;
    use crate::TimedWord;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn val(xs: &[&str]) -> ClockValuation {
        ClockValuation::from_values(xs.iter().map(|s| TimeValue::parse(s).unwrap()).collect())
    }

    /// Independent oracle: regions of a 1-clock or 2-clock partition enumerated by
    /// classifying every valuation on a fine grid.
    fn grid_regions(clock_max: &[u32]) -> BTreeSet<Region> {
        let steps: Vec<TimeValue> = (0..=4 * 12).map(|i| TimeValue::from_ratio(i, 12)).collect();
        let mut out = BTreeSet::new();
        if clock_max.len() == 1 {
            for a in &steps {
                out.insert(region_of(&ClockValuation::from_values(vec![a.clone()]), clock_max));
            }
        } else {
            for a in &steps {
                for b in &steps {
                    out.insert(region_of(&ClockValuation::from_values(vec![a.clone(), b.clone()]), clock_max));
                }
            }
        }
        out
    }

    #[test]
    fn region_of_examples() {
        let r = region_of(&val(&["0"]), &[1]);
        assert_eq!(r, Region::zero(1));
        let half = region_of(&val(&["1/2"]), &[1]);
        assert_eq!(half.frac_classes, vec![vec![0]]);
        assert_eq!(half.ints, vec![0]);
        let high = region_of(&val(&["7/2"]), &[1]);
        assert!(high.saturated[0]);
        assert_eq!(high, region_of(&val(&["2"]), &[1]));
    }

    #[test]
    fn one_clock_partition_has_four_regions() {
        assert_eq!(grid_regions(&[1]).len(), 4);
        // 11 bounded regions, 7 with at least one clock above 1
        assert_eq!(grid_regions(&[1, 1]).len(), 18);
    }

    #[test]
    fn time_successor_examples() {
        let succ = time_successors(&Region::zero(1), &[1]);
        let expected: Vec<Region> = ["0", "1/2", "1", "3/2"].iter().map(|s| region_of(&val(&[s]), &[1])).collect();
        assert_eq!(succ, expected);
        let top = region_of(&val(&["3"]), &[1]);
        assert_eq!(time_successors(&top, &[1]), vec![top.clone()]);
        let two = time_successors(&Region::zero(2), &[1, 1]);
        assert_eq!(two[1], region_of(&val(&["1/3", "1/3"]), &[1, 1]));
    }

    #[test]
    fn representative_and_zone_agree() {
        for r in grid_regions(&[1, 1]) {
            let v = r.representative();
            assert_eq!(region_of(&v, &[1, 1]), r);
            assert!(r.to_zone().contains_point(&v.values));
        }
    }

    #[test]
    fn zone_of_region_is_exact_on_grid() {
        let regions = grid_regions(&[1, 1]);
        let steps: Vec<TimeValue> = (0..=3 * 8).map(|i| TimeValue::from_ratio(i, 8)).collect();
        for r in &regions {
            let z = r.to_zone();
            for a in &steps {
                for b in &steps {
                    let v = ClockValuation::from_values(vec![a.clone(), b.clone()]);
                    assert_eq!(z.contains_point(&v.values), region_of(&v, &[1, 1]) == *r, "{} {:?}", r, v);
                }
            }
        }
    }

    #[test]
    fn samples_stay_in_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in grid_regions(&[1, 1]) {
            for _ in 0..20 {
                assert_eq!(region_of(&r.sample(&mut rng), &[1, 1]), r);
            }
        }
    }

    /// Independent oracle for reachable region states: closure using representatives
    /// and concrete delays on a fine grid instead of symbolic successors.
    fn concrete_closure(a: &TimedAutomaton) -> BTreeSet<RegionState> {
        let delays: Vec<TimeValue> = (0..=4 * 12).map(|i| TimeValue::from_ratio(i, 12)).collect();
        let mut seen = BTreeSet::new();
        let mut stack = Vec::new();
        for &q in &a.initial {
            stack.push((q, ClockValuation::zero(a.num_clocks())));
        }
        while let Some((q, v)) = stack.pop() {
            let rs = RegionState { location: q, region: region_of(&v, &a.clock_max) };
            if !seen.insert(rs.clone()) {
                continue;
            }
            let v = rs.region.representative();
            for d in &delays {
                let w = v.delayed(d);
                for (_, t) in a.outgoing(q) {
                    if t.guard_holds(&w) {
                        stack.push((t.target, w.reset(&t.resets)));
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn reachable_counts_match_concrete_closure() {
        for json in [LOOP_JSON, TWO_CLOCK_JSON, ALTERNATING_JSON, LINEAR_JSON, DIAMOND_JSON, NEVER_RESET_JSON] {
            let a = load(json);
            let ra = build_region_automaton(&a).unwrap();
            let oracle = concrete_closure(&a);
            let built: BTreeSet<RegionState> = ra.states.iter().cloned().collect();
            assert_eq!(built, oracle, "{:?}", a.name);
        }
        assert_eq!(build_region_automaton(&loop_automaton()).unwrap().m(), 1);
    }

    #[test]
    fn automaton_without_transitions_has_one_state() {
        let a = load(
            r#"{"format":"timed-tester/1","alphabet":["a"],"clocks":["x"],"locations":["q0"],
                "initial":["q0"],"final":["q0"],"transitions":[]}"#,
        );
        assert_eq!(build_region_automaton(&a).unwrap().m(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let a = load(TWO_CLOCK_JSON);
        assert!(matches!(build_region_automaton_with_cap(&a, 2), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn edges_are_witnessed_by_guard_regions() {
        let a = load(TWO_CLOCK_JSON);
        let ra = build_region_automaton(&a).unwrap();
        for e in &ra.edges {
            let t = &a.transitions[e.transition];
            let src = &ra.states[e.source];
            assert!(time_successors(&src.region, &ra.clock_max).contains(&e.guard_region));
            assert!(e.guard_region.satisfies(&t.guard));
            assert_eq!(ra.states[e.target].region, e.guard_region.reset(&t.resets));
        }
    }

    #[test]
    fn projection_of_witness_is_a_path() {
        let a = loop_automaton();
        let ra = build_region_automaton(&a).unwrap();
        let w = TimedWord::parse_pairs(&[("a", "1/2"), ("a", "9/10")]);
        let m = membership_exact(&a, &w).unwrap();
        let path = ra.project_run(&m.witness.unwrap()).unwrap();
        assert_eq!(path.len(), 3);
        let empty = Run { start: crate::model::RunState::initial(0, 1), steps: vec![] };
        assert_eq!(ra.project_run(&empty).unwrap(), vec![ra.initial[0]]);
    }

    #[test]
    fn guard_compatibility_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = load(TWO_CLOCK_JSON);
        for r in grid_regions(&a.clock_max) {
            let verdicts: Vec<bool> = a.transitions.iter().map(|t| r.satisfies(&t.guard)).collect();
            for _ in 0..10 {
                let v = r.sample(&mut rng);
                for (t, &expect) in a.transitions.iter().zip(&verdicts) {
                    assert_eq!(t.guard_holds(&v), expect);
                }
            }
        }
    }

    #[test]
    fn dot_and_document_render() {
        let a = load(TWO_CLOCK_JSON);
        let ra = build_region_automaton(&a).unwrap();
        let doc = ra.to_document(&a);
        assert_eq!(doc.m, ra.m());
        assert!(ra.to_dot(&a).starts_with("digraph"));
    }
}
