//! Short connecting words between concrete states of a thick component.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ClockValuation, Letter, Run, RunState, RunStep, TimedAutomaton, TimedWord};
use crate::region::RegionAutomaton;
use crate::structure::{is_thick, ComponentGraph};
use crate::time::TimeValue;
use crate::zone::{Bound, Interval, Zone};

/// A concrete state together with its region-automaton state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Anchored {
    pub state: usize,
    pub run_state: RunState,
}

impl Anchored {
    pub fn new(ra: &RegionAutomaton, run_state: RunState) -> Option<Self> {
        let state = ra.state_of(run_state.location, &run_state.valuation)?;
        Some(Anchored { state, run_state })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Link {
    pub word: TimedWord,
    pub run: Run,
    pub weight: TimeValue,
}

fn slack() -> TimeValue {
    TimeValue::from_ratio(1, 1024)
}

/// Search depth for a link; enough to go to the cycle, around it and on to the target.
pub fn link_depth(m: usize) -> usize {
    3 * m + 8
}

/// Like [`link`] but without the thickness check; states are restricted to `states`.
pub fn link_within(
    ra: &RegionAutomaton,
    automaton: &TimedAutomaton,
    states: &[usize],
    from: &Anchored,
    to: &Anchored,
) -> Result<Link> {
    if from.run_state == to.run_state {
        return Ok(Link { word: TimedWord::empty(), run: Run { start: from.run_state.clone(), steps: Vec::new() }, weight: TimeValue::zero() });
    }
    let inside: HashSet<usize> = states.iter().copied().collect();
    if !inside.contains(&from.state) || !inside.contains(&to.state) {
        return Err(Error::NoLink("state outside the component".into()));
    }
    let target = &to.run_state.valuation.values;
    // nodes: (state, zone, parent, edge)
    let mut nodes: Vec<(usize, Zone, usize, usize)> = vec![(from.state, Zone::from_valuation(&from.run_state.valuation), usize::MAX, usize::MAX)];
    let mut seen: HashMap<usize, Vec<Zone>> = HashMap::new();
    seen.entry(from.state).or_default().push(nodes[0].1.clone());
    let mut frontier = vec![0usize];
    let mut found = None;
    'outer: for _ in 0..link_depth(ra.m()) {
        let mut next = Vec::new();
        for &i in &frontier {
            let (state, zone) = (nodes[i].0, nodes[i].1.clone());
            let mut up = zone;
            up.up();
            for &e in ra.outgoing_ids(state) {
                let edge = &ra.edges[e];
                if !inside.contains(&edge.target) {
                    continue;
                }
                let mut z = up.intersection(&edge.guard_region.to_zone());
                if z.is_empty() {
                    continue;
                }
                z.reset(&automaton.transitions[edge.transition].resets);
                let stored = seen.entry(edge.target).or_default();
                if stored.iter().any(|s| s.includes(&z)) {
                    continue;
                }
                stored.push(z.clone());
                let hit = edge.target == to.state && z.contains_point(target);
                nodes.push((edge.target, z, i, e));
                next.push(nodes.len() - 1);
                if hit {
                    found = Some(nodes.len() - 1);
                    break 'outer;
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let Some(end) = found else {
        return Err(Error::NoLink(format!("no route from state {} to state {}", from.state, to.state)));
    };
    let mut chain = vec![end];
    while nodes[*chain.last().expect("non-empty")].2 != usize::MAX {
        chain.push(nodes[*chain.last().expect("non-empty")].2);
    }
    chain.reverse();
    let zones: Vec<Zone> = chain.iter().map(|&i| nodes[i].1.clone()).collect();
    let edges: Vec<usize> = chain[1..].iter().map(|&i| nodes[i].3).collect();
    let (word, run) = extract(ra, automaton, &zones, &edges, &from.run_state, &to.run_state)?;
    let weight = word.total_weight();
    Ok(Link { word, run, weight })
}

/// Concrete delays along a zone path from `start` to exactly `end`.
fn extract(
    ra: &RegionAutomaton,
    automaton: &TimedAutomaton,
    zones: &[Zone],
    edges: &[usize],
    start: &RunState,
    end: &RunState,
) -> Result<(TimedWord, Run)> {
    let n = edges.len();
    let mut point = end.valuation.values.clone();
    let mut letters = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);
    for i in (1..=n).rev() {
        let edge = &ra.edges[edges[i - 1]];
        let t = &automaton.transitions[edge.transition];
        let mut pre = zones[i - 1].clone();
        pre.up();
        pre.intersect(&edge.guard_region.to_zone());
        for (c, v) in point.iter().enumerate() {
            if !t.resets.contains(&c) {
                pre.constrain(c + 1, 0, Bound::le(v.clone()));
                pre.constrain(0, c + 1, Bound::le(-v.clone()));
            }
        }
        let fire = pre.pick_point().ok_or_else(|| Error::NoLink("empty pre-image".into()))?;
        let before = if i == 1 {
            start.valuation.values.clone()
        } else {
            latest_before(&zones[i - 1], &fire)?
        };
        let delay = if fire.is_empty() { TimeValue::zero() } else { &fire[0] - &before[0] };
        letters.push(Letter::new(automaton.alphabet[t.symbol].clone(), delay));
        steps.push(RunStep { transition: edge.transition, state: RunState::new(t.target, ClockValuation::from_values(point)) });
        point = before;
    }
    letters.reverse();
    steps.reverse();
    Ok((TimedWord::new(letters), Run { start: start.clone(), steps }))
}

/// A point of `zone` on the time line below `fire`, as late as possible.
fn latest_before(zone: &Zone, fire: &[TimeValue]) -> Result<Vec<TimeValue>> {
    if fire.is_empty() {
        return Ok(Vec::new());
    }
    let mut line = Zone::point(fire);
    line.down();
    line.intersect(zone);
    let iv: Interval = line.clock_interval(0).ok_or_else(|| Error::NoLink("unreachable firing point".into()))?;
    let top = iv.hi.clone().unwrap_or_else(|| fire[0].clone());
    let v0 = iv.nearest(&top, &slack());
    let delay = &fire[0] - &v0;
    Ok(fire.iter().map(|v| v - &delay).collect())
}

/// A word leading from `from` to exactly `to` inside a thick component.
pub fn link(
    graph: &ComponentGraph,
    node: usize,
    ra: &RegionAutomaton,
    automaton: &TimedAutomaton,
    from: &Anchored,
    to: &Anchored,
) -> Result<Link> {
    if !is_thick(graph, node, ra, automaton).is_thick() {
        return Err(Error::NotThick(node));
    }
    link_within(ra, automaton, &graph.nodes[node].states, from, to)
}

/// The bound `3·m·B` on link weights.
pub fn link_bound(ra: &RegionAutomaton, automaton: &TimedAutomaton) -> TimeValue {
    TimeValue::from_integer(3 * ra.m() as i64 * automaton.max_constant as i64)
}
