//! Compatibility of factors with a path of components, decided by zone
//! simulation with concrete delay shifts.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::model::{ClockValuation, Letter, Run, RunState, RunStep, TimedAutomaton, TimedWord};
use crate::region::RegionAutomaton;
use crate::structure::{BarPath, ComponentGraph, NodeKind};
use crate::time::TimeValue;
use crate::zone::{Bound, Zone};

/// One slot of a path as seen by the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotSpec {
    pub node: usize,
    pub states: Vec<usize>,
    pub transient: bool,
    pub exit_state: Option<usize>,
}

/// The slots of a path; a single component gives a one-slot path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotPath {
    pub slots: Vec<SlotSpec>,
    slot_of: HashMap<usize, usize>,
}

impl SlotPath {
    pub fn from_bar(bar: &BarPath, graph: &ComponentGraph) -> Self {
        let slots = bar
            .slots
            .iter()
            .map(|s| SlotSpec {
                node: s.node,
                states: graph.nodes[s.node].states.clone(),
                transient: s.transient,
                exit_state: if s.transient { None } else { s.exit_state },
            })
            .collect();
        Self::new(slots)
    }

    pub fn component(graph: &ComponentGraph, node: usize) -> Self {
        Self::new(vec![SlotSpec {
            node,
            states: graph.nodes[node].states.clone(),
            transient: graph.nodes[node].kind == NodeKind::Transient,
            exit_state: None,
        }])
    }

    fn new(slots: Vec<SlotSpec>) -> Self {
        let mut slot_of = HashMap::new();
        for (i, s) in slots.iter().enumerate() {
            for &st in &s.states {
                slot_of.insert(st, i);
            }
        }
        SlotPath { slots, slot_of }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot_of(&self, state: usize) -> Option<usize> {
        self.slot_of.get(&state).copied()
    }

    /// Whether a letter may take the run from `state` in `slot` to `target`.
    fn step_slot(&self, slot: usize, state: usize, target: usize) -> Option<usize> {
        let to = self.slot_of(target)?;
        let spec = &self.slots[slot];
        if to == slot && !spec.transient {
            return Some(slot);
        }
        if to == slot + 1 && (spec.transient || spec.exit_state == Some(state)) {
            return Some(to);
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anchor {
    TransientState { state: usize },
    InComponent { component: usize, state: Option<usize> },
}

impl Anchor {
    fn at(path: &SlotPath, slot: usize, state: usize) -> Anchor {
        let spec = &path.slots[slot];
        if spec.transient {
            Anchor::TransientState { state }
        } else {
            Anchor::InComponent { component: spec.node, state: Some(state) }
        }
    }
}

#[derive(Clone, Debug)]
struct SearchNode {
    slot: usize,
    state: usize,
    zone: Zone,
    parent: usize,
    edge: usize,
}

/// A start for the search: slot, region state and the zone of valuations.
pub type Start = (usize, usize, Zone);

/// Zone search over `(slot, region state, zone)` with inclusion pruning per key.
pub struct Search<'a> {
    pub ra: &'a RegionAutomaton,
    pub automaton: &'a TimedAutomaton,
    pub path: &'a SlotPath,
}

/// Layers of the search; `layers[p]` holds the nodes after `p` letters.
pub struct Trace {
    layers: Vec<Vec<SearchNode>>,
}

impl Trace {
    /// Number of letters consumed by the longest surviving branch.
    pub fn reached(&self) -> usize {
        self.layers.iter().rposition(|l| !l.is_empty()).unwrap_or(0)
    }

    pub fn complete(&self, letters: usize) -> bool {
        self.layers.len() == letters + 1 && !self.layers[letters].is_empty()
    }

    /// `(slot, state)` pairs alive after `p` letters.
    pub fn alive(&self, p: usize) -> BTreeSet<(usize, usize)> {
        self.layers.get(p).map(|l| l.iter().map(|n| (n.slot, n.state)).collect()).unwrap_or_default()
    }

    fn root_of(&self, p: usize, mut index: usize) -> usize {
        for layer in (1..=p).rev() {
            index = self.layers[layer][index].parent;
        }
        index
    }
}

impl<'a> Search<'a> {
    pub fn new(ra: &'a RegionAutomaton, automaton: &'a TimedAutomaton, path: &'a SlotPath) -> Self {
        Search { ra, automaton, path }
    }

    /// Every state of `slot`, each with its full region as zone.
    pub fn region_starts(&self, slot: usize) -> Vec<Start> {
        self.path.slots[slot].states.iter().map(|&s| (slot, s, self.ra.states[s].region.to_zone())).collect()
    }

    pub fn run(&self, letters: &[Letter], starts: Vec<Start>) -> Trace {
        let mut first: Vec<SearchNode> = Vec::new();
        let mut stored: HashMap<(usize, usize), Vec<Zone>> = HashMap::new();
        for (slot, state, zone) in starts {
            if zone.is_empty() || insert_pruned(&mut stored, (slot, state), &zone) {
                continue;
            }
            first.push(SearchNode { slot, state, zone, parent: usize::MAX, edge: usize::MAX });
        }
        let mut layers = vec![first];
        for letter in letters {
            let prev = layers.last().expect("non-empty");
            if prev.is_empty() {
                break;
            }
            let next = self.expand(prev, letter);
            layers.push(next);
        }
        Trace { layers }
    }

    /// Successors of a layer under one letter, with inclusion pruning.
    fn expand(&self, prev: &[SearchNode], letter: &Letter) -> Vec<SearchNode> {
        let Some(sym) = self.automaton.symbol_id(&letter.symbol) else {
            return Vec::new();
        };
        let mut next = Vec::new();
        let mut stored: HashMap<(usize, usize), Vec<Zone>> = HashMap::new();
        for (pi, node) in prev.iter().enumerate() {
            let mut shifted = node.zone.clone();
            shifted.shift(&letter.delay);
            for &e in self.ra.outgoing_ids(node.state) {
                let edge = &self.ra.edges[e];
                if edge.symbol != sym {
                    continue;
                }
                let Some(slot) = self.path.step_slot(node.slot, node.state, edge.target) else {
                    continue;
                };
                let mut z = shifted.intersection(&edge.guard_region.to_zone());
                if z.is_empty() {
                    continue;
                }
                z.reset(&self.automaton.transitions[edge.transition].resets);
                if insert_pruned(&mut stored, (slot, edge.target), &z) {
                    continue;
                }
                next.push(SearchNode { slot, state: edge.target, zone: z, parent: pi, edge: e });
            }
        }
        next
    }

    /// A concrete run realizing the branch ending at node `index` after `p` letters.
    fn realize(&self, trace: &Trace, letters: &[Letter], p: usize, index: usize) -> (Run, Vec<usize>, Vec<Zone>) {
        let mut chain = Vec::with_capacity(p + 1);
        let mut i = index;
        for layer in (0..=p).rev() {
            chain.push(i);
            if layer > 0 {
                i = trace.layers[layer][i].parent;
            }
        }
        chain.reverse();
        let node = |layer: usize| &trace.layers[layer][chain[layer]];
        let mut point = node(p).zone.pick_point().expect("non-empty zone");
        let mut steps = Vec::with_capacity(p);
        for layer in (1..=p).rev() {
            let here = node(layer);
            let before = node(layer - 1);
            let edge = &self.ra.edges[here.edge];
            let t = &self.automaton.transitions[edge.transition];
            steps.push(RunStep {
                transition: edge.transition,
                state: RunState::new(self.ra.states[here.state].location, ClockValuation::from_values(point.clone())),
            });
            // valuations just before the letter that reset to `point`
            let mut pre = before.zone.clone();
            pre.shift(&letters[layer - 1].delay);
            pre.intersect(&edge.guard_region.to_zone());
            for (c, v) in point.iter().enumerate() {
                if !t.resets.contains(&c) {
                    pre.constrain(c + 1, 0, Bound::le(v.clone()));
                    pre.constrain(0, c + 1, Bound::le(-v.clone()));
                }
            }
            let at_fire = pre.pick_point().expect("pre-image of a reached valuation");
            point = at_fire.iter().map(|v| v - &letters[layer - 1].delay).collect();
        }
        steps.reverse();
        let start_state = node(0).state;
        let run = Run {
            start: RunState::new(self.ra.states[start_state].location, ClockValuation::from_values(point)),
            steps,
        };
        let states = (0..=p).map(|l| node(l).state).collect();
        let zones = (0..=p).map(|l| node(l).zone.clone()).collect();
        (run, states, zones)
    }

    pub fn witness(&self, trace: &Trace, letters: &[Letter], p: usize, index: usize) -> CompatWitness {
        let root = trace.root_of(p, index);
        let first = &trace.layers[0][root];
        let last = &trace.layers[p][index];
        let (run, states, zones) = self.realize(trace, letters, p, index);
        CompatWitness {
            start: Anchor::at(self.path, first.slot, first.state),
            end: Anchor::at(self.path, last.slot, last.state),
            start_slot: first.slot,
            end_slot: last.slot,
            region_path: states,
            zone_trace: zones.iter().map(|z| format!("{:?}", z)).collect(),
            run,
        }
    }

    /// Witness for some node alive after all letters, if any.
    pub fn witness_for(&self, trace: &Trace, letters: &[Letter], pick: impl Fn(usize, usize) -> bool) -> Option<CompatWitness> {
        let p = letters.len();
        if !trace.complete(p) {
            return None;
        }
        let index = trace.layers[p].iter().position(|n| pick(n.slot, n.state))?;
        Some(self.witness(trace, letters, p, index))
    }

    /// Nodes alive after `p` letters whose branch started at the given state.
    pub fn alive_from(&self, trace: &Trace, p: usize, start_state: usize) -> Vec<usize> {
        (0..trace.layers.get(p).map_or(0, |l| l.len()))
            .filter(|&i| trace.layers[0][trace.root_of(p, i)].state == start_state)
            .collect()
    }

    pub fn end_state(&self, trace: &Trace, p: usize, index: usize) -> (usize, usize) {
        let n = &trace.layers[p][index];
        (n.slot, n.state)
    }
}

/// Returns true when `zone` is already covered at `key`; otherwise stores it.
fn insert_pruned(stored: &mut HashMap<(usize, usize), Vec<Zone>>, key: (usize, usize), zone: &Zone) -> bool {
    let list = stored.entry(key).or_default();
    if list.iter().any(|z| z.includes(zone)) {
        return true;
    }
    list.push(zone.clone());
    false
}

/// Evidence that a factor is compatible between two anchors.
#[derive(Clone, Debug, Serialize)]
pub struct CompatWitness {
    pub start: Anchor,
    pub end: Anchor,
    pub start_slot: usize,
    pub end_slot: usize,
    pub region_path: Vec<usize>,
    pub zone_trace: Vec<String>,
    /// A concrete local run over the factor.
    pub run: Run,
}

/// Whether some local run over `u` stays inside component `node`.
pub fn factor_compatible_component(
    u: &TimedWord,
    graph: &ComponentGraph,
    node: usize,
    ra: &RegionAutomaton,
    automaton: &TimedAutomaton,
) -> (bool, Option<CompatWitness>) {
    let path = SlotPath::component(graph, node);
    let search = Search::new(ra, automaton, &path);
    let trace = search.run(u.letters(), search.region_starts(0));
    let witness = search.witness_for(&trace, u.letters(), |_, _| true);
    (witness.is_some(), witness)
}

/// All `(start, end)` anchors on the path between which `u` is compatible.
pub fn a1_pairs(u: &TimedWord, path: &SlotPath, ra: &RegionAutomaton, automaton: &TimedAutomaton) -> BTreeSet<(Anchor, Anchor)> {
    let search = Search::new(ra, automaton, path);
    let mut out = BTreeSet::new();
    for slot in 0..path.len() {
        for &state in &path.slots[slot].states {
            let start = (slot, state, ra.states[state].region.to_zone());
            let trace = search.run(u.letters(), vec![start]);
            if trace.complete(u.len()) {
                for (s, st) in trace.alive(u.len()) {
                    out.insert((Anchor::at(path, slot, state), Anchor::at(path, s, st)));
                }
            }
        }
    }
    out
}

/// Slot pairs `(start, end)` with `start >= from` for which `u` is compatible.
pub fn slot_pairs(u: &[Letter], path: &SlotPath, ra: &RegionAutomaton, automaton: &TimedAutomaton, from: usize) -> Vec<(usize, usize)> {
    let search = Search::new(ra, automaton, path);
    let mut out = Vec::new();
    for slot in from..path.len() {
        let trace = search.run(u, search.region_starts(slot));
        if trace.complete(u.len()) {
            let ends: BTreeSet<usize> = trace.alive(u.len()).into_iter().map(|(s, _)| s).collect();
            out.extend(ends.into_iter().map(|e| (slot, e)));
        }
    }
    out
}

/// Greedy monotone choice of anchors: each factor takes the smallest reachable
/// end slot among starts not before the previous end.
pub fn a2_compatible(
    factors: &[TimedWord],
    path: &SlotPath,
    ra: &RegionAutomaton,
    automaton: &TimedAutomaton,
    want_witness: bool,
) -> (bool, Option<Vec<CompatWitness>>) {
    let search = Search::new(ra, automaton, path);
    let mut current = 0;
    let mut witnesses = Vec::new();
    for u in factors {
        let letters = u.letters();
        let mut best: Option<(usize, usize)> = None;
        for slot in current..path.len() {
            if best.is_some_and(|(_, end)| slot > end) {
                break;
            }
            let trace = search.run(letters, search.region_starts(slot));
            if !trace.complete(letters.len()) {
                continue;
            }
            let end = trace.alive(letters.len()).into_iter().map(|(s, _)| s).min().expect("complete trace");
            if best.is_none_or(|(_, e)| end < e) {
                best = Some((slot, end));
            }
        }
        let Some((start, end)) = best else {
            return (false, None);
        };
        if want_witness {
            let trace = search.run(letters, search.region_starts(start));
            witnesses.push(search.witness_for(&trace, letters, |s, _| s == end).expect("pair was found"));
        }
        current = end;
    }
    (true, want_witness.then_some(witnesses))
}

/// Exact membership along a path, fed one letter at a time; keeps only the
/// current layer of the search.
pub struct OnlineAlong<'a> {
    search: Search<'a>,
    layer: Vec<SearchNode>,
}

impl<'a> OnlineAlong<'a> {
    pub fn new(path: &'a SlotPath, ra: &'a RegionAutomaton, automaton: &'a TimedAutomaton) -> Self {
        let zero = Zone::point(&vec![TimeValue::zero(); automaton.num_clocks()]);
        let layer = if path.is_empty() {
            Vec::new()
        } else {
            ra.initial
                .iter()
                .filter(|&&s| path.slot_of(s) == Some(0))
                .map(|&s| SearchNode { slot: 0, state: s, zone: zero.clone(), parent: usize::MAX, edge: usize::MAX })
                .collect()
        };
        OnlineAlong { search: Search::new(ra, automaton, path), layer }
    }

    pub fn push(&mut self, letter: &Letter) {
        if !self.layer.is_empty() {
            self.layer = self.search.expand(&self.layer, letter);
        }
    }

    pub fn accepted(&self) -> bool {
        self.layer.iter().any(|n| self.search.ra.is_final[n.state])
    }

    /// Number of zones currently held.
    pub fn width(&self) -> usize {
        self.layer.len()
    }
}

/// Exact membership restricted to the path: runs from the initial states at the
/// zero valuation, ending in an accepting state.
pub fn accepts_along(
    w: &TimedWord,
    path: &SlotPath,
    ra: &RegionAutomaton,
    automaton: &TimedAutomaton,
) -> (bool, Option<CompatWitness>) {
    if path.is_empty() {
        return (false, None);
    }
    let zero = Zone::point(&vec![TimeValue::zero(); automaton.num_clocks()]);
    let starts: Vec<Start> = ra
        .initial
        .iter()
        .filter(|&&s| path.slot_of(s) == Some(0))
        .map(|&s| (0, s, zero.clone()))
        .collect();
    let search = Search::new(ra, automaton, path);
    let trace = search.run(w.letters(), starts);
    let witness = search.witness_for(&trace, w.letters(), |_, st| ra.is_final[st]);
    (witness.is_some(), witness)
}
