//! Word generation, far-word construction with certificates, the experiment
//! runner and the streaming tester.

use std::collections::VecDeque;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{apply_script, timed_edit_distance_value, EditOp};
use crate::error::{Error, Result};
use crate::lp::{Lp, LpOutcome};
use crate::model::{membership_exact, ClockValuation, Letter, RunState, TimedWord};
use crate::sampling::ReservoirSampler;
use crate::structure::NodeKind;
use crate::tester::compat::OnlineAlong;
use crate::tester::{combine, decide_along, sub_seeds, word_tester, Prepared, SampleReport, TesterParams};
use crate::time::TimeValue;
use crate::zone::{Bound, Interval};

/// Words up to this length get the exhaustive distance-to-language check.
pub const SMALL_SCALE_LEN: usize = 8;
pub const DEFAULT_SMALL_SCALE_INSERTIONS: usize = 1;

/// States of the region automaton from which an accepting state is reachable,
/// with the number of steps needed.
fn steps_to_final(p: &Prepared) -> Vec<Option<usize>> {
    let m = p.ra.m();
    let mut dist = vec![None; m];
    let mut queue = VecDeque::new();
    for (s, d) in dist.iter_mut().enumerate() {
        if p.ra.is_final[s] {
            *d = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        let d = dist[s].expect("queued states have a distance");
        for &e in p.ra.incoming_ids(s) {
            let src = p.ra.edges[e].source;
            if dist[src].is_none() {
                dist[src] = Some(d + 1);
                queue.push_back(src);
            }
        }
    }
    dist
}

/// A random delay strictly inside the interval, or its only point.
fn random_delay<R: Rng + ?Sized>(iv: &Interval, cap: &TimeValue, rng: &mut R) -> TimeValue {
    let hi = iv.hi.clone().unwrap_or_else(|| &iv.lo + cap);
    if hi == iv.lo {
        return iv.lo.clone();
    }
    let u = TimeValue::from_ratio(rng.gen_range(1..1024), 1024);
    &iv.lo + &(&(&hi - &iv.lo) * &u)
}

/// A concrete random walk through the region automaton that never leaves the
/// states from which acceptance stays possible.
pub struct Walker<'a> {
    prepared: &'a Prepared,
    to_final: Vec<Option<usize>>,
    state: RunState,
    ra_state: usize,
    node_weight: TimeValue,
    share: TimeValue,
    cap: TimeValue,
}

impl<'a> Walker<'a> {
    pub fn new<R: Rng + ?Sized>(prepared: &'a Prepared, target: &TimeValue, rng: &mut R) -> Result<Self> {
        let to_final = steps_to_final(prepared);
        let starts: Vec<usize> = prepared.ra.initial.iter().copied().filter(|&s| to_final[s].is_some()).collect();
        if starts.is_empty() {
            return Err(Error::EmptyLanguage);
        }
        let s = starts[rng.gen_range(0..starts.len())];
        let st = &prepared.ra.states[s];
        let state = RunState::new(st.location, ClockValuation::zero(prepared.automaton.num_clocks()));
        let share = target.div(&TimeValue::from_integer(prepared.l() as i64));
        let cap = TimeValue::from_integer(prepared.automaton.max_constant.max(1) as i64);
        Ok(Walker { prepared, to_final, state, ra_state: s, node_weight: TimeValue::zero(), share, cap })
    }

    pub fn at_final(&self) -> bool {
        self.prepared.ra.is_final[self.ra_state]
    }

    fn fire(&mut self, edge_id: usize, delay: TimeValue) -> Letter {
        let ra = &self.prepared.ra;
        let edge = &ra.edges[edge_id];
        let t = &self.prepared.automaton.transitions[edge.transition];
        let v = self.state.valuation.delayed(&delay).reset(&t.resets);
        if self.prepared.graph.node_of[edge.target] != self.prepared.graph.node_of[self.ra_state] {
            self.node_weight = TimeValue::zero();
        }
        self.node_weight += &delay;
        self.state = RunState::new(t.target, v);
        self.ra_state = edge.target;
        Letter::new(self.prepared.automaton.alphabet[t.symbol].clone(), delay)
    }

    fn enabled(&self, edge_id: usize) -> Option<Interval> {
        let edge = &self.prepared.ra.edges[edge_id];
        self.to_final[edge.target]?;
        edge.guard_region.to_zone().delay_interval(&self.state.valuation.values)
    }

    /// One random letter, preferring to stay in the current component until its
    /// share of the weight is spent.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Letter> {
        let g = &self.prepared.graph;
        let here = g.node_of[self.ra_state];
        let mut stay = Vec::new();
        let mut leave = Vec::new();
        for &e in self.prepared.ra.outgoing_ids(self.ra_state) {
            if let Some(iv) = self.enabled(e) {
                let target = self.prepared.ra.edges[e].target;
                if g.node_of[target] == here && g.nodes[here].kind == NodeKind::Component {
                    stay.push((e, iv));
                } else {
                    leave.push((e, iv));
                }
            }
        }
        let want_leave = self.node_weight >= self.share;
        let pool = if (want_leave && !leave.is_empty()) || stay.is_empty() { leave } else { stay };
        if pool.is_empty() {
            return None;
        }
        let (e, iv) = &pool[rng.gen_range(0..pool.len())];
        let d = random_delay(iv, &self.cap, rng);
        Some(self.fire(*e, d))
    }

    /// Next letter on a shortest route to an accepting state, with the smallest delays.
    pub fn step_to_final(&mut self) -> Option<Letter> {
        if self.at_final() {
            return None;
        }
        let want = self.to_final[self.ra_state]? - 1;
        let slack = TimeValue::from_ratio(1, 1024);
        for &e in self.prepared.ra.outgoing_ids(self.ra_state) {
            if self.to_final[self.prepared.ra.edges[e].target] == Some(want) {
                if let Some(iv) = self.enabled(e) {
                    let d = iv.smallest_member(&slack);
                    return Some(self.fire(e, d));
                }
            }
        }
        None
    }
}

/// A random accepted word of weight about `target`, checked against exact membership.
pub fn generate_accepted<R: Rng + ?Sized>(prepared: &Prepared, target: &TimeValue, rng: &mut R) -> Result<TimedWord> {
    let mut walker = Walker::new(prepared, target, rng)?;
    let mut w = TimedWord::empty();
    let mut weight = TimeValue::zero();
    while &weight < target {
        match walker.step(rng) {
            Some(l) => {
                weight += &l.delay;
                w.push(l);
            }
            None => break,
        }
    }
    while let Some(l) = walker.step_to_final() {
        w.push(l);
    }
    if !membership_exact(&prepared.automaton, &w)?.accepted {
        return Err(Error::InvalidWord("generated word rejected by exact membership".into()));
    }
    Ok(w)
}

/// A lazily generated accepted word, for streaming.
pub struct AcceptedStream<'a, R: Rng> {
    walker: Walker<'a>,
    rng: R,
    target: TimeValue,
    weight: TimeValue,
    finishing: bool,
}

impl<'a, R: Rng> AcceptedStream<'a, R> {
    pub fn new(prepared: &'a Prepared, target: TimeValue, mut rng: R) -> Result<Self> {
        let walker = Walker::new(prepared, &target, &mut rng)?;
        Ok(AcceptedStream { walker, rng, target, weight: TimeValue::zero(), finishing: false })
    }
}

impl<R: Rng> Iterator for AcceptedStream<'_, R> {
    type Item = Letter;

    fn next(&mut self) -> Option<Letter> {
        if !self.finishing && self.weight < self.target {
            if let Some(l) = self.walker.step(&mut self.rng) {
                self.weight += &l.delay;
                return Some(l);
            }
        }
        self.finishing = true;
        self.walker.step_to_final()
    }
}

// ---------------------------------------------------------------------------
// Far words

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarMode {
    /// One letter inflated far past what any guard allows.
    HeavyLetter,
    /// A run of consecutive letters each inflated past the guards.
    Spread,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FarClaim {
    /// Only the cost of the applied script is known.
    UpperBoundOnly,
    /// The distance to the language is at least `lower_bound`.
    LowerBoundCertified,
    /// The small-scale search found a word of the language at distance `lower_bound`.
    ExactSmallScale,
}

impl FarClaim {
    pub fn label(&self) -> &'static str {
        match self {
            FarClaim::UpperBoundOnly => "upper_bound_only",
            FarClaim::LowerBoundCertified => "lower_bound_certified",
            FarClaim::ExactSmallScale => "exact_small_scale",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FarCertificate {
    pub mode: FarMode,
    pub script: Vec<EditOp>,
    /// Cost of `script`; an upper bound on the distance between the two words.
    pub certified_cost: TimeValue,
    /// Lower bound on the distance from the perturbed word to the language.
    pub lower_bound: TimeValue,
    /// `lower_bound / (T' + lower_bound)`, a lower bound on the relative distance.
    pub relative_lower_bound: TimeValue,
    pub claim: FarClaim,
    /// Value found by the small-scale search, when it ran.
    pub small_scale_value: Option<TimeValue>,
}

/// Per symbol: `None` when no useful transition reads it, `Some(None)` when its
/// delay is unbounded, otherwise the supremum of the delay before it.
pub fn symbol_delay_sups(prepared: &Prepared) -> Vec<Option<Option<TimeValue>>> {
    let ra = &prepared.ra;
    let to_final = steps_to_final(prepared);
    let n = prepared.automaton.num_clocks();
    let mut out: Vec<Option<Option<TimeValue>>> = vec![None; prepared.automaton.alphabet.len()];
    for edge in &ra.edges {
        if to_final[edge.target].is_none() {
            continue;
        }
        let mut z = ra.states[edge.source].region.to_zone().with_fresh_clock();
        z.up();
        let mut g = edge.guard_region.to_zone().with_fresh_clock();
        g.free(&[n]);
        z.intersect(&g);
        let Some(iv) = z.clock_interval(n) else { continue };
        let entry = &mut out[edge.symbol];
        *entry = Some(match (entry.take(), iv.hi) {
            (Some(None), _) | (_, None) => None,
            (None, Some(h)) => Some(h),
            (Some(Some(a)), Some(h)) => Some(TimeValue::max_of(&a, &h)),
        });
    }
    out
}

/// `Σ (τ_i − sup_i)^+`, counting letters no transition can read in full: every
/// letter must be deleted or matched to a letter with a feasible delay.
pub fn strong_lower_bound(w: &TimedWord, prepared: &Prepared, sups: &[Option<Option<TimeValue>>]) -> TimeValue {
    w.letters()
        .iter()
        .map(|l| match prepared.automaton.symbol_id(&l.symbol).and_then(|s| sups[s].clone()) {
            None => l.delay.clone(),
            Some(None) => TimeValue::zero(),
            Some(Some(s)) => TimeValue::max_of(&(&l.delay - &s), &TimeValue::zero()),
        })
        .sum()
}

fn relative_bound(lb: &TimeValue, weight: &TimeValue) -> TimeValue {
    let denom = weight + lb;
    if denom.is_zero() {
        TimeValue::zero()
    } else {
        lb.div(&denom)
    }
}

/// Perturbs an accepted word into one whose certified relative distance to the
/// language exceeds `epsilon`.
pub fn perturb_far<R: Rng + ?Sized>(
    w: &TimedWord,
    prepared: &Prepared,
    epsilon: &TimeValue,
    mode: FarMode,
    rng: &mut R,
) -> Result<(TimedWord, FarCertificate)> {
    let sups = symbol_delay_sups(prepared);
    if epsilon.is_zero() {
        let cert = FarCertificate {
            mode,
            script: Vec::new(),
            certified_cost: TimeValue::zero(),
            lower_bound: TimeValue::zero(),
            relative_lower_bound: TimeValue::zero(),
            claim: FarClaim::UpperBoundOnly,
            small_scale_value: None,
        };
        return Ok((w.clone(), cert));
    }
    let half = TimeValue::from_ratio(1, 2);
    if epsilon.is_negative() || epsilon >= &half {
        return Err(Error::BudgetInfeasible(format!("certified bound stays below 1/2, asked for {}", epsilon)));
    }
    let bounded: Vec<(usize, TimeValue)> = w
        .letters()
        .iter()
        .enumerate()
        .filter_map(|(i, l)| {
            let s = prepared.automaton.symbol_id(&l.symbol).and_then(|s| sups[s].clone())??;
            (l.delay <= s).then_some((i, s))
        })
        .collect();
    if bounded.is_empty() {
        return Err(Error::BudgetInfeasible("no letter has a bounded delay".into()));
    }
    let base_lb = strong_lower_bound(w, prepared, &sups);
    let total = w.total_weight();
    let margin = TimeValue::from_ratio(1, 1024);
    let mut script = Vec::new();
    match mode {
        FarMode::HeavyLetter => {
            // inflating tau_i to s + X gives LB = base + X and T' = T - tau_i + s + X;
            // (base + X) / (T' + base + X) > eps  <=>  X > (eps (T - tau_i + s + base) - base) / (1 - 2 eps)
            let (i, s) = bounded[rng.gen_range(0..bounded.len())].clone();
            let tau = &w.letters()[i].delay;
            let one = TimeValue::one();
            let num = &(epsilon * &(&(&(&total - tau) + &s) + &base_lb)) - &base_lb;
            let x = TimeValue::max_of(&num.div(&(&one - &(epsilon * &TimeValue::from_integer(2)))), &TimeValue::zero()) + &margin;
            script.push(EditOp::Retime { position: i, delay: &s + &x });
        }
        FarMode::Spread => {
            let big = TimeValue::from_integer(8 * prepared.automaton.max_constant.max(1) as i64);
            let start = rng.gen_range(0..bounded.len());
            let order = bounded[start..].iter().chain(bounded[..start].iter().rev());
            let mut lb = base_lb.clone();
            let mut weight = total.clone();
            let mut done = false;
            for (i, s) in order {
                let delay = TimeValue::max_of(&big, &(s * &TimeValue::from_integer(2) + &TimeValue::one()));
                lb += &(&delay - s);
                weight += &(&delay - &w.letters()[*i].delay);
                script.push(EditOp::Retime { position: *i, delay });
                if &relative_bound(&lb, &weight) > epsilon {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(Error::BudgetInfeasible("inflating every letter is not enough".into()));
            }
        }
    }
    let (far, cost) = apply_script(w, &script)?;
    let lower_bound = strong_lower_bound(&far, prepared, &sups);
    let relative_lower_bound = relative_bound(&lower_bound, &far.total_weight());
    let mut claim = if &relative_lower_bound > epsilon { FarClaim::LowerBoundCertified } else { FarClaim::UpperBoundOnly };
    let mut small_scale_value = None;
    if far.len() <= SMALL_SCALE_LEN {
        if let Some(v) = small_distance_to_language(&far, prepared, DEFAULT_SMALL_SCALE_INSERTIONS, Some(&lower_bound))? {
            if v == lower_bound && claim == FarClaim::LowerBoundCertified {
                claim = FarClaim::ExactSmallScale;
            }
            small_scale_value = Some(v);
        }
    }
    let cert = FarCertificate {
        mode,
        script,
        certified_cost: cost,
        lower_bound,
        relative_lower_bound,
        claim,
        small_scale_value,
    };
    Ok((far, cert))
}

// ---------------------------------------------------------------------------
// Small-scale distance to the language

#[derive(Clone, Debug)]
enum Role {
    Kept(TimeValue),
    Inserted,
}

struct SmallSearch<'a> {
    prepared: &'a Prepared,
    w: &'a TimedWord,
    to_final: Vec<Option<usize>>,
    max_insertions: usize,
    floor: Option<TimeValue>,
    best: Option<TimeValue>,
    /// `suffix[i]`: lower bound on what letters `i..` cost, kept or deleted.
    suffix: Vec<TimeValue>,
}

impl SmallSearch<'_> {
    fn done(&self) -> bool {
        matches!((&self.best, &self.floor), (Some(b), Some(f)) if b <= f)
    }

    fn dfs(&mut self, i: usize, state: usize, steps: &mut Vec<(usize, Role)>, deleted: TimeValue, kept_lb: &TimeValue, inserted: usize) {
        if self.done() || self.best.as_ref().is_some_and(|b| &(&(&deleted + kept_lb) + &self.suffix[i]) >= b) {
            return;
        }
        let ra = &self.prepared.ra;
        if i == self.w.len() && ra.is_final[state] {
            if let Some(v) = self.evaluate(steps) {
                let total = v + &deleted;
                if self.best.as_ref().is_none_or(|b| &total < b) {
                    self.best = Some(total);
                }
            }
        }
        if i < self.w.len() {
            let letter = &self.w.letters()[i];
            if let Some(sym) = self.prepared.automaton.symbol_id(&letter.symbol) {
                for &e in ra.outgoing_ids(state) {
                    let edge = &ra.edges[e];
                    if edge.symbol == sym && self.to_final[edge.target].is_some() {
                        steps.push((e, Role::Kept(letter.delay.clone())));
                        let lb = kept_lb + &(&self.suffix[i] - &self.suffix[i + 1]);
                        self.dfs(i + 1, edge.target, steps, deleted.clone(), &lb, inserted);
                        steps.pop();
                    }
                }
            }
        }
        if inserted < self.max_insertions {
            for &e in ra.outgoing_ids(state) {
                if self.to_final[ra.edges[e].target].is_some() {
                    steps.push((e, Role::Inserted));
                    self.dfs(i, ra.edges[e].target, steps, deleted.clone(), kept_lb, inserted + 1);
                    steps.pop();
                }
            }
        }
        if i < self.w.len() {
            let d = &deleted + &self.w.letters()[i].delay;
            self.dfs(i + 1, state, steps, d, kept_lb, inserted);
        }
    }

    /// Cheapest delays along a fixed region path, over the closure of its constraints.
    fn evaluate(&self, steps: &[(usize, Role)]) -> Option<TimeValue> {
        let n = steps.len();
        let clocks = self.prepared.automaton.num_clocks();
        let kept: Vec<usize> = (0..n).filter(|&k| matches!(steps[k].1, Role::Kept(_))).collect();
        let mut lp = Lp::new(n + kept.len());
        let mut last_reset = vec![None::<usize>; clocks];
        for (k, (e, _)) in steps.iter().enumerate() {
            let edge = &self.prepared.ra.edges[*e];
            let zone = edge.guard_region.to_zone();
            // clock c equals the sum of delays after its last reset, up to step k
            let terms = |c: usize| -> Vec<usize> {
                let from = last_reset[c].map_or(0, |r| r + 1);
                (from..=k).collect()
            };
            for i in 0..=clocks {
                for j in 0..=clocks {
                    if i == j {
                        continue;
                    }
                    let Bound::Finite { value, .. } = zone.get(i, j) else { continue };
                    let mut coeffs = vec![TimeValue::zero(); n];
                    if i > 0 {
                        for d in terms(i - 1) {
                            coeffs[d] += &TimeValue::one();
                        }
                    }
                    if j > 0 {
                        for d in terms(j - 1) {
                            coeffs[d] = &coeffs[d] - &TimeValue::one();
                        }
                    }
                    let row: Vec<(usize, TimeValue)> = coeffs.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                    if row.is_empty() {
                        if value.is_negative() {
                            return None;
                        }
                        continue;
                    }
                    lp.le(&row, value.clone());
                }
            }
            for &c in &self.prepared.automaton.transitions[edge.transition].resets {
                last_reset[c] = Some(k);
            }
        }
        for (slot, &k) in kept.iter().enumerate() {
            let Role::Kept(tau) = &steps[k].1 else { unreachable!() };
            let e = n + slot;
            lp.le(&[(k, TimeValue::one()), (e, TimeValue::from_integer(-1))], tau.clone());
            lp.le(&[(k, TimeValue::from_integer(-1)), (e, TimeValue::from_integer(-1))], -tau.clone());
            lp.cost[e] = TimeValue::one();
        }
        for (k, (_, role)) in steps.iter().enumerate() {
            if matches!(role, Role::Inserted) {
                lp.cost[k] = TimeValue::one();
            }
        }
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Distance from `w` to the language over every alignment with at most
/// `max_insertions` inserted letters: an upper bound on the true distance, and
/// equal to it once it meets a lower bound. Returns `None` for an empty language.
/// The search stops early once it reaches `floor`.
pub fn small_distance_to_language(
    w: &TimedWord,
    prepared: &Prepared,
    max_insertions: usize,
    floor: Option<&TimeValue>,
) -> Result<Option<TimeValue>> {
    if w.len() > SMALL_SCALE_LEN {
        return Err(Error::TooLong { len: w.len(), cap: SMALL_SCALE_LEN });
    }
    let sups = symbol_delay_sups(prepared);
    let mut suffix = vec![TimeValue::zero(); w.len() + 1];
    for i in (0..w.len()).rev() {
        suffix[i] = &suffix[i + 1] + &strong_lower_bound(&w.slice(i, i + 1), prepared, &sups);
    }
    let mut search = SmallSearch {
        prepared,
        w,
        to_final: steps_to_final(prepared),
        max_insertions,
        floor: floor.cloned(),
        best: None,
        suffix,
    };
    for &s in &prepared.ra.initial {
        if search.to_final[s].is_some() {
            search.dfs(0, s, &mut Vec::new(), TimeValue::zero(), &TimeValue::zero(), 0);
        }
    }
    Ok(search.best)
}

// ---------------------------------------------------------------------------
// Experiments

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub epsilon: TimeValue,
    pub trials: usize,
    pub seed: u64,
    pub target_weight: TimeValue,
    /// Relative farness the perturbation aims for; defaults to `epsilon`.
    pub budget: Option<TimeValue>,
    pub sample_weight_multiplier: u32,
    pub mode: FarMode,
    pub k_override: Option<TimeValue>,
    /// Fill the wall-time column; off keeps the output reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(epsilon: TimeValue, trials: usize, seed: u64, target_weight: TimeValue) -> Self {
        ExperimentConfig {
            epsilon,
            trials,
            seed,
            target_weight,
            budget: None,
            sample_weight_multiplier: 1,
            mode: FarMode::HeavyLetter,
            k_override: None,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub verdict_accepted: bool,
    /// Whether the tester accepted the far word; `None` when none could be built.
    pub verdict_far: Option<bool>,
    pub k_used: TimeValue,
    pub samples_drawn: usize,
    pub pi_count: usize,
    pub wall_time_us: Option<u128>,
    pub far_claim: Option<FarClaim>,
    pub far_relative_lower_bound: Option<TimeValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub trials: usize,
    pub accepted_rate: f64,
    pub false_rejections: usize,
    pub far_trials: usize,
    pub far_rejections: usize,
    pub far_rejection_rate: f64,
    /// Lower end of the 95% Wilson interval for the far rejection rate.
    pub far_rejection_lower_95: f64,
    pub delta_floor: f64,
}

/// Seed of a trial: its own stream of the base generator.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng.gen()
}

/// Lower end of the Wilson score interval at 95%.
pub fn wilson_lower(successes: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.959_963_984_540_054_f64;
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let centre = p + z * z / (2.0 * n_f);
    let spread = z * (p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt();
    ((centre - spread) / denom).max(0.0)
}

fn run_trial(prepared: &Prepared, params: &TesterParams, config: &ExperimentConfig, trial: usize) -> Result<TrialRow> {
    let seed = trial_seed(config.seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let started = Instant::now();
    let w = generate_accepted(prepared, &config.target_weight, &mut rng)?;
    let good = word_tester(&w, prepared, params, &mut rng, false);
    let budget = config.budget.clone().unwrap_or_else(|| config.epsilon.clone());
    let (far_verdict, claim, rel, far_draws) = match perturb_far(&w, prepared, &budget, config.mode, &mut rng) {
        Ok((far, cert)) => {
            let v = word_tester(&far, prepared, params, &mut rng, false);
            (Some(v.accepted), Some(cert.claim), Some(cert.relative_lower_bound), v.samples_drawn)
        }
        Err(Error::BudgetInfeasible(_)) => (None, None, None, 0),
        Err(e) => return Err(e),
    };
    Ok(TrialRow {
        trial,
        seed,
        verdict_accepted: good.accepted,
        verdict_far: far_verdict,
        k_used: params.k.clone(),
        samples_drawn: good.samples_drawn + far_draws,
        pi_count: prepared.paths.len(),
        wall_time_us: config.timing.then(|| started.elapsed().as_micros()),
        far_claim: claim,
        far_relative_lower_bound: rel,
    })
}

/// Runs the trials in parallel; rows come back in trial order.
pub fn run_experiment(prepared: &Prepared, config: &ExperimentConfig) -> Result<(Vec<TrialRow>, ExperimentSummary)> {
    if config.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut params = prepared.params(config.epsilon.clone(), config.sample_weight_multiplier)?;
    if let Some(k) = &config.k_override {
        params = params.with_k(k.clone());
    }
    let rows: Vec<TrialRow> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(prepared, &params, config, t))
        .collect::<Result<_>>()?;
    let accepted = rows.iter().filter(|r| r.verdict_accepted).count();
    let far: Vec<bool> = rows.iter().filter_map(|r| r.verdict_far).collect();
    let far_rejections = far.iter().filter(|&&a| !a).count();
    let summary = ExperimentSummary {
        trials: rows.len(),
        accepted_rate: accepted as f64 / rows.len() as f64,
        false_rejections: rows.len() - accepted,
        far_trials: far.len(),
        far_rejections,
        far_rejection_rate: if far.is_empty() { 0.0 } else { far_rejections as f64 / far.len() as f64 },
        far_rejection_lower_95: wilson_lower(far_rejections, far.len()),
        delta_floor: params.delta_floor(),
    };
    Ok((rows, summary))
}

pub const CSV_COLUMNS: [&str; 11] = [
    "trial",
    "seed",
    "verdict_accepted",
    "verdict_far",
    "k_used",
    "samples_drawn",
    "pi_count",
    "wall_time_us",
    "far_claim",
    "far_relative_lower_bound",
    "delta_floor",
];

fn verdict_cell(accepted: bool) -> String {
    if accepted { "accept" } else { "reject" }.to_string()
}

/// Writes the rows followed by a summary row whose verdict columns hold rates.
pub fn write_csv<W: Write>(out: W, rows: &[TrialRow], summary: &ExperimentSummary, seed: u64) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wtr.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        wtr.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            verdict_cell(r.verdict_accepted),
            r.verdict_far.map(verdict_cell).unwrap_or_default(),
            r.k_used.to_string(),
            r.samples_drawn.to_string(),
            r.pi_count.to_string(),
            r.wall_time_us.map(|t| t.to_string()).unwrap_or_default(),
            r.far_claim.map(|c| c.label().to_string()).unwrap_or_default(),
            r.far_relative_lower_bound.as_ref().map(|v| v.to_string()).unwrap_or_default(),
            format!("{:.6}", summary.delta_floor),
        ])
        .map_err(io)?;
    }
    wtr.write_record([
        "summary".to_string(),
        seed.to_string(),
        format!("{:.6}", summary.accepted_rate),
        format!("{:.6}", summary.far_rejection_rate),
        rows.first().map(|r| r.k_used.to_string()).unwrap_or_default(),
        rows.iter().map(|r| r.samples_drawn).sum::<usize>().to_string(),
        rows.first().map(|r| r.pi_count.to_string()).unwrap_or_default(),
        String::new(),
        String::new(),
        format!("{:.6}", summary.far_rejection_lower_95),
        format!("{:.6}", summary.delta_floor),
    ])
    .map_err(io)?;
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Streaming

#[derive(Clone, Debug, Serialize)]
pub struct StreamStats {
    pub letters: usize,
    /// Most letters held in sample windows at any point.
    pub peak_buffered: usize,
    /// Most zones held by the exact trackers at any point.
    pub peak_tracked: usize,
}

/// One pass over a stream: reservoir samples per path, plus an exact tracker
/// per path for streams too light to sample.
pub fn stream_test<I>(letters: I, prepared: &Prepared, params: &TesterParams, seed: u64, spare: usize) -> Result<(crate::tester::Verdict, StreamStats)>
where
    I: IntoIterator<Item = Result<Letter>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = sub_seeds(prepared.paths.len(), &mut rng);
    let mut lanes: Vec<(ReservoirSampler, OnlineAlong, ChaCha8Rng)> = prepared
        .paths
        .iter()
        .zip(&seeds)
        .map(|(path, &s)| {
            (
                ReservoirSampler::new(params.l, spare, params.k.clone()),
                OnlineAlong::new(path, &prepared.ra, &prepared.automaton),
                ChaCha8Rng::seed_from_u64(s),
            )
        })
        .collect();
    let mut stats = StreamStats { letters: 0, peak_buffered: 0, peak_tracked: 0 };
    for letter in letters {
        let letter = letter?;
        stats.letters += 1;
        let mut buffered = 0;
        let mut tracked = 0;
        for (sampler, online, lane_rng) in lanes.iter_mut() {
            sampler.push(&letter, lane_rng);
            online.push(&letter);
            buffered += sampler.buffered();
            tracked += online.width();
        }
        stats.peak_buffered = stats.peak_buffered.max(buffered);
        stats.peak_tracked = stats.peak_tracked.max(tracked);
    }
    let outcomes = lanes
        .iter()
        .enumerate()
        .map(|(pi, (sampler, online, _))| {
            let mut samples = sampler.finish();
            if sampler.letters_seen() == 0 {
                samples.degenerate = true;
            }
            if samples.degenerate {
                (SampleReport::new(pi, &samples, online.accepted()), true, None)
            } else {
                decide_along(None, &samples, pi, prepared, false)
            }
        })
        .collect();
    Ok((combine(outcomes, prepared, params), stats))
}

// ---------------------------------------------------------------------------
// Other distances on timed words

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceComparison {
    pub timed_edit: TimeValue,
    /// Largest gap between absolute times; only for words with the same untiming.
    pub max_absolute_gap: Option<TimeValue>,
    /// Untimed edit distance paired with the largest gap between delays.
    pub vector: (usize, Option<TimeValue>),
}

fn untimed_edit(a: &[&str], b: &[&str]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

pub fn compare_distances(w1: &TimedWord, w2: &TimedWord) -> DistanceComparison {
    let (u1, u2) = (w1.untime(), w2.untime());
    let max_gap = |xs: &[TimeValue], ys: &[TimeValue]| {
        xs.iter().zip(ys).map(|(x, y)| x.abs_diff(y)).fold(TimeValue::zero(), |a, b| TimeValue::max_of(&a, &b))
    };
    let same = u1 == u2;
    let delays1: Vec<TimeValue> = w1.letters().iter().map(|l| l.delay.clone()).collect();
    let delays2: Vec<TimeValue> = w2.letters().iter().map(|l| l.delay.clone()).collect();
    DistanceComparison {
        timed_edit: timed_edit_distance_value(w1, w2),
        max_absolute_gap: same.then(|| max_gap(w1.absolute_times(), w2.absolute_times())),
        vector: (untimed_edit(&u1, &u2), (w1.len() == w2.len()).then(|| max_gap(&delays1, &delays2))),
    }
}
