//! Weighted cuts of a word against one component, and the correction they induce.

use serde::Serialize;

use crate::distance::EditOp;
use crate::error::{Error, Result};
use crate::model::{ClockValuation, Letter, Run, RunState, RunStep, TimedAutomaton, TimedWord};
use crate::region::RegionAutomaton;
use crate::structure::{is_thick, ComponentGraph};
use crate::time::TimeValue;
use crate::zone::Bound;

use super::compat::{Search, SlotPath};
use super::link::{link_bound, link_within, Anchored, Link};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    Weak,
    Strong,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cut {
    /// 0-based index of the first letter that does not fit.
    pub position: usize,
    pub cost: TimeValue,
    pub kind: CutKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutDecomposition {
    pub cuts: Vec<Cut>,
    /// Half-open letter ranges of the compatible segments.
    pub segments: Vec<(usize, usize)>,
    pub v: TimeValue,
    pub c_s: TimeValue,
    pub c_w: TimeValue,
}

impl CutDecomposition {
    pub fn h(&self) -> usize {
        self.cuts.len()
    }

    pub fn weak_count(&self) -> usize {
        self.cuts.iter().filter(|c| c.kind == CutKind::Weak).count()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Correction {
    pub word: TimedWord,
    pub cost: TimeValue,
    pub decomposition: CutDecomposition,
    /// Edits turning the input into `word`, positions relative to the word being edited.
    pub script: Vec<EditOp>,
    pub links: Vec<Link>,
    /// A run of the component over `word`.
    pub run: Run,
}

struct Builder<'a> {
    ra: &'a RegionAutomaton,
    automaton: &'a TimedAutomaton,
    states: &'a [usize],
    path: SlotPath,
    out: Vec<Letter>,
    steps: Vec<RunStep>,
    start: Option<RunState>,
    current: Option<Anchored>,
    script: Vec<EditOp>,
    links: Vec<Link>,
    cuts: Vec<Cut>,
    segments: Vec<(usize, usize)>,
    strict: bool,
    fallback_link_cost: TimeValue,
}

fn slack() -> TimeValue {
    TimeValue::from_ratio(1, 1024)
}

impl<'a> Builder<'a> {
    fn anchored(&self, state: RunState) -> Anchored {
        Anchored::new(self.ra, state).expect("valuations stay in the region automaton")
    }

    /// Moves the correction to `target`, splicing a link when needed; returns its weight.
    fn go_to(&mut self, target: &RunState) -> Result<TimeValue> {
        let Some(cur) = self.current.clone() else {
            self.start = Some(target.clone());
            self.current = Some(self.anchored(target.clone()));
            return Ok(TimeValue::zero());
        };
        let to = self.anchored(target.clone());
        let l = match link_within(self.ra, self.automaton, self.states, &cur, &to) {
            Ok(l) => l,
            Err(e) if self.strict => return Err(e),
            Err(_) => {
                // no route: charge the bound and continue from the target
                self.current = Some(to);
                return Ok(self.fallback_link_cost.clone());
            }
        };
        for (letter, step) in l.word.letters().iter().zip(&l.run.steps) {
            self.script.push(EditOp::Insert { position: self.out.len(), symbol: letter.symbol.clone(), delay: letter.delay.clone() });
            self.out.push(letter.clone());
            self.steps.push(step.clone());
        }
        let weight = l.weight.clone();
        if !l.word.is_empty() {
            self.links.push(l);
        }
        self.current = Some(to);
        Ok(weight)
    }

    fn keep(&mut self, letter: &Letter, step: RunStep) {
        self.out.push(letter.clone());
        self.current = Some(self.anchored(step.state.clone()));
        self.steps.push(step);
    }

    fn charge_last(&mut self, cost: TimeValue) {
        if let Some(c) = self.cuts.last_mut() {
            c.cost += cost;
        }
    }

    /// Longest prefix of `letters` compatible with the component, with a concrete run.
    fn segment(&self, letters: &[Letter]) -> (usize, Option<Run>) {
        let search = Search::new(self.ra, self.automaton, &self.path);
        let trace = search.run(letters, search.region_starts(0));
        let reached = trace.reached();
        if reached == 0 {
            return (0, None);
        }
        let mut pick = None;
        for &s in &self.path.slots[0].states {
            if let Some(&i) = search.alive_from(&trace, reached, s).first() {
                pick = Some(i);
                break;
            }
        }
        let w = search.witness(&trace, &letters[..reached], reached, pick.expect("a branch survives"));
        (reached, Some(w.run))
    }

    fn letter_fits_somewhere(&self, letter: &Letter) -> bool {
        let search = Search::new(self.ra, self.automaton, &self.path);
        let trace = search.run(std::slice::from_ref(letter), search.region_starts(0));
        trace.complete(1)
    }

    /// Best retime of a single letter from the current state, or from any state when there is none.
    fn best_retime(&self, letter: &Letter) -> Option<(TimeValue, RunState, RunStep)> {
        let sym = self.automaton.symbol_id(&letter.symbol)?;
        let mut best: Option<(TimeValue, RunState, RunStep)> = None;
        let mut consider = |delay: TimeValue, start: RunState, edge_t: usize| {
            let t = &self.automaton.transitions[edge_t];
            let post = RunState::new(t.target, start.valuation.delayed(&delay).reset(&t.resets));
            let cost = letter.delay.abs_diff(&delay);
            if best.as_ref().is_none_or(|(d, _, _)| cost < letter.delay.abs_diff(d)) {
                best = Some((delay, start, RunStep { transition: edge_t, state: post }));
            }
        };
        let n = self.automaton.num_clocks();
        let sources: Vec<usize> = match &self.current {
            Some(c) => vec![c.state],
            None => self.states.to_vec(),
        };
        for s in sources {
            for &e in self.ra.outgoing_ids(s) {
                let edge = &self.ra.edges[e];
                if edge.symbol != sym || self.states.binary_search(&edge.target).is_err() {
                    continue;
                }
                let guard = edge.guard_region.to_zone();
                match &self.current {
                    Some(c) => {
                        let Some(iv) = guard.delay_interval(&c.run_state.valuation.values) else { continue };
                        let d = iv.nearest(&letter.delay, &slack());
                        consider(d, c.run_state.clone(), edge.transition);
                    }
                    None => {
                        let mut z = self.ra.states[s].region.to_zone().with_fresh_clock();
                        z.up();
                        let mut g = guard.with_fresh_clock();
                        g.free(&[n]);
                        z.intersect(&g);
                        let Some(iv) = z.clock_interval(n) else { continue };
                        if iv.is_empty() {
                            continue;
                        }
                        let d = iv.nearest(&letter.delay, &slack());
                        z.constrain(n + 1, 0, Bound::le(d.clone()));
                        z.constrain(0, n + 1, Bound::le(-d.clone()));
                        let Some(fire) = z.pick_point() else { continue };
                        let start: Vec<TimeValue> = fire[..n].iter().map(|v| v - &d).collect();
                        let start = RunState::new(self.ra.states[s].location, ClockValuation::from_values(start));
                        consider(d, start, edge.transition);
                    }
                }
            }
        }
        best
    }
}

fn plan(w: &TimedWord, graph: &ComponentGraph, node: usize, ra: &RegionAutomaton, automaton: &TimedAutomaton, strict: bool) -> Result<Correction> {
    let states = &graph.nodes[node].states;
    let mut b = Builder {
        ra,
        automaton,
        states,
        path: SlotPath::component(graph, node),
        out: Vec::new(),
        steps: Vec::new(),
        start: None,
        current: None,
        script: Vec::new(),
        links: Vec::new(),
        cuts: Vec::new(),
        segments: Vec::new(),
        strict,
        fallback_link_cost: link_bound(ra, automaton),
    };
    let letters = w.letters();
    let mut pos = 0;
    loop {
        let (len, run) = b.segment(&letters[pos..]);
        b.segments.push((pos, pos + len));
        if let Some(run) = run {
            let cost = b.go_to(&run.start)?;
            b.charge_last(cost);
            for (i, step) in run.steps.into_iter().enumerate() {
                b.keep(&letters[pos + i], step);
            }
        }
        pos += len;
        if pos == letters.len() {
            break;
        }
        let letter = &letters[pos];
        if b.letter_fits_somewhere(letter) {
            b.cuts.push(Cut { position: pos, cost: TimeValue::zero(), kind: CutKind::Weak });
            continue;
        }
        let retime = b.best_retime(letter);
        let keep_retime = retime.as_ref().is_some_and(|(d, _, _)| letter.delay.abs_diff(d) <= letter.delay);
        let mut cost = TimeValue::zero();
        match retime {
            Some((d, start, step)) if keep_retime => {
                cost += b.go_to(&start)?;
                cost += letter.delay.abs_diff(&d);
                b.script.push(EditOp::Retime { position: b.out.len(), delay: d.clone() });
                b.keep(&Letter::new(letter.symbol.clone(), d), step);
            }
            _ => {
                cost += letter.delay.clone();
                b.script.push(EditOp::Delete { position: b.out.len() });
            }
        }
        b.cuts.push(Cut { position: pos, cost, kind: CutKind::Strong });
        pos += 1;
    }
    let v: TimeValue = b.cuts.iter().map(|c| &c.cost).sum();
    let c_s: TimeValue = b.cuts.iter().filter(|c| c.kind == CutKind::Strong).map(|c| &c.cost).sum();
    let c_w: TimeValue = b.cuts.iter().filter(|c| c.kind == CutKind::Weak).map(|c| &c.cost).sum();
    let decomposition = CutDecomposition { cuts: b.cuts, segments: b.segments, v: v.clone(), c_s, c_w };
    let start = b.start.unwrap_or_else(|| {
        let s = states[0];
        RunState::new(ra.states[s].location, ra.states[s].region.representative())
    });
    Ok(Correction {
        word: TimedWord::new(b.out),
        cost: v,
        decomposition,
        script: b.script,
        links: b.links,
        run: Run { start, steps: b.steps },
    })
}

/// Greedy decomposition of `w` into longest compatible segments separated by cuts.
/// Weak cuts cost the link spliced in by the correction; when no link exists
/// (thin components) they are charged `3·m·B`.
pub fn decompose_cuts(w: &TimedWord, graph: &ComponentGraph, node: usize, ra: &RegionAutomaton, automaton: &TimedAutomaton) -> Result<CutDecomposition> {
    Ok(plan(w, graph, node, ra, automaton, false)?.decomposition)
}

/// A word compatible with the thick component `node`, obtained by correcting every cut.
pub fn correct_word(w: &TimedWord, graph: &ComponentGraph, node: usize, ra: &RegionAutomaton, automaton: &TimedAutomaton) -> Result<Correction> {
    if !is_thick(graph, node, ra, automaton).is_thick() {
        return Err(Error::NotThick(node));
    }
    plan(w, graph, node, ra, automaton, true)
}
