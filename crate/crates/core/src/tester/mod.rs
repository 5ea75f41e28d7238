//! The property tester: compatibility of sampled factors with paths of the
//! component graph, weighted cuts and their correction.

pub mod compat;
pub mod cuts;
pub mod link;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{TimedAutomaton, TimedWord};
use crate::region::{build_region_automaton_with_cap, RegionAutomaton, DEFAULT_REGION_CAP};
use crate::sampling::{sample_factors, SampleSet, DEFAULT_RETRY_CAP};
use crate::structure::{condense, enumerate_paths, is_thick, BarPath, ComponentGraph, ThicknessVerdict, DEFAULT_PATH_CAP};
use crate::time::TimeValue;

pub use compat::{a1_pairs, a2_compatible, accepts_along, factor_compatible_component, Anchor, CompatWitness, SlotPath};
pub use cuts::{correct_word, decompose_cuts, Correction, Cut, CutDecomposition, CutKind};
pub use link::{link, link_bound, Anchored, Link};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TesterParams {
    pub epsilon: TimeValue,
    pub l: usize,
    pub m: usize,
    pub b: u32,
    pub k: TimeValue,
    pub sample_weight_multiplier: u32,
    pub k_overridden: bool,
    pub retry_cap: usize,
}

impl TesterParams {
    /// `k = multiplier · 24·l·m·B / ε`.
    pub fn derive(epsilon: TimeValue, l: usize, m: usize, b: u32, multiplier: u32) -> Result<Self> {
        if epsilon <= 0 || epsilon >= 1 {
            return Err(Error::Config(format!("epsilon must lie in (0,1), got {}", epsilon)));
        }
        if !(1..=2).contains(&multiplier) {
            return Err(Error::Config(format!("sample weight multiplier must be 1 or 2, got {}", multiplier)));
        }
        let base = TimeValue::from_integer(24 * l as i64 * m as i64 * b as i64 * multiplier as i64);
        let k = base.div(&epsilon);
        Ok(TesterParams {
            epsilon,
            l,
            m,
            b,
            k,
            sample_weight_multiplier: multiplier,
            k_overridden: false,
            retry_cap: DEFAULT_RETRY_CAP,
        })
    }

    pub fn with_k(mut self, k: TimeValue) -> Self {
        self.k = k;
        self.k_overridden = true;
        self
    }

    /// The rejection floor of the analysis: `3ε²/5` for one component, else `(3ε³/10l³)^l`.
    pub fn delta_floor(&self) -> f64 {
        let e = self.epsilon.to_f64();
        if self.l <= 1 {
            3.0 * e * e / 5.0
        } else {
            let l = self.l as f64;
            (3.0 * e.powi(3) / (10.0 * l.powi(3))).powi(self.l as i32)
        }
    }
}

/// The automaton with everything the testers need, built once.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub automaton: TimedAutomaton,
    pub ra: RegionAutomaton,
    pub graph: ComponentGraph,
    pub bars: Vec<BarPath>,
    pub paths: Vec<SlotPath>,
    pub thickness: Vec<(usize, ThicknessVerdict)>,
    pub warnings: Vec<String>,
}

impl Prepared {
    pub fn new(automaton: TimedAutomaton) -> Result<Self> {
        Self::with_caps(automaton, DEFAULT_REGION_CAP, DEFAULT_PATH_CAP)
    }

    pub fn with_caps(automaton: TimedAutomaton, region_cap: usize, path_cap: usize) -> Result<Self> {
        let ra = build_region_automaton_with_cap(&automaton, region_cap)?;
        let graph = condense(&ra);
        let enumeration = enumerate_paths(&graph, &ra, path_cap);
        let mut warnings = Vec::new();
        if enumeration.truncated {
            warnings.push(format!("path enumeration truncated at {}", path_cap));
        }
        let thickness: Vec<(usize, ThicknessVerdict)> = graph.components().map(|c| (c, is_thick(&graph, c, &ra, &automaton))).collect();
        for (c, v) in &thickness {
            if !v.is_thick() {
                warnings.push(format!("component {} is {}; guarantees do not apply", c, v.label()));
            }
        }
        let paths = enumeration.paths.iter().map(|b| SlotPath::from_bar(b, &graph)).collect();
        Ok(Prepared { automaton, ra, graph, bars: enumeration.paths, paths, thickness, warnings })
    }

    pub fn l(&self) -> usize {
        self.graph.diameter.max(1)
    }

    pub fn m(&self) -> usize {
        self.ra.m()
    }

    pub fn params(&self, epsilon: TimeValue, multiplier: u32) -> Result<TesterParams> {
        TesterParams::derive(epsilon, self.l(), self.m(), self.automaton.max_constant, multiplier)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleReport {
    pub pi: usize,
    /// Inclusive letter ranges of the factors.
    pub factors: Vec<(usize, usize)>,
    pub draws: usize,
    pub degenerate: bool,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub accepted: bool,
    pub pi_tried: usize,
    pub samples: Vec<SampleReport>,
    pub samples_drawn: usize,
    pub fallback_used: bool,
    pub k_used: TimeValue,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<CompatWitness>>,
}

impl SampleReport {
    pub fn new(pi: usize, samples: &SampleSet, accepted: bool) -> Self {
        SampleReport {
            pi,
            factors: samples.factors.iter().map(|f| (f.start, f.end)).collect(),
            draws: samples.draws,
            degenerate: samples.degenerate,
            accepted,
        }
    }
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        if self.accepted {
            "accept"
        } else {
            "reject"
        }
    }
}

/// Decision along one path given the samples; a degenerate set falls back to
/// exact membership along the path when the word is at hand.
pub fn decide_along(
    w: Option<&TimedWord>,
    samples: &SampleSet,
    pi: usize,
    prepared: &Prepared,
    want_witness: bool,
) -> (SampleReport, bool, Option<Vec<CompatWitness>>) {
    let path = &prepared.paths[pi];
    let report = |accepted| SampleReport::new(pi, samples, accepted);
    if samples.degenerate {
        let Some(w) = w else {
            return (report(false), true, None);
        };
        let (ok, wit) = accepts_along(w, path, &prepared.ra, &prepared.automaton);
        return (report(ok), true, if want_witness { wit.map(|x| vec![x]) } else { None });
    }
    let words: Vec<TimedWord> = samples.factors.iter().map(|f| f.word()).collect();
    let (ok, wit) = a2_compatible(&words, path, &prepared.ra, &prepared.automaton, want_witness);
    (report(ok), false, wit)
}

/// Tester along one path: sample `l` factors of weight `k`, accept iff they are compatible.
pub fn word_tester_along<R: Rng + ?Sized>(
    w: &TimedWord,
    pi: usize,
    prepared: &Prepared,
    params: &TesterParams,
    rng: &mut R,
    want_witness: bool,
) -> (SampleReport, bool, Option<Vec<CompatWitness>>) {
    let samples = sample_factors(w, params.l, &params.k, rng, params.retry_cap);
    decide_along(Some(w), &samples, pi, prepared, want_witness)
}

/// Combines the per-path outcomes: accept iff some path accepts.
pub fn combine(
    outcomes: Vec<(SampleReport, bool, Option<Vec<CompatWitness>>)>,
    prepared: &Prepared,
    params: &TesterParams,
) -> Verdict {
    let pi_tried = outcomes.len();
    let accepted = outcomes.iter().any(|o| o.0.accepted);
    let samples_drawn = outcomes.iter().map(|o| o.0.draws).sum();
    let fallback_used = outcomes.iter().any(|o| o.1);
    let witness = outcomes.iter().find(|o| o.0.accepted).and_then(|o| o.2.clone());
    Verdict {
        accepted,
        pi_tried,
        samples: outcomes.into_iter().map(|o| o.0).collect(),
        samples_drawn,
        fallback_used,
        k_used: params.k.clone(),
        warnings: prepared.warnings.clone(),
        witness,
    }
}

/// One sub-seed per path, drawn up front so the result does not depend on scheduling.
pub fn sub_seeds<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<u64> {
    (0..count).map(|_| rng.gen()).collect()
}

/// Runs the path tester on every path with independent sub-seeds.
pub fn word_tester<R: Rng + ?Sized>(
    w: &TimedWord,
    prepared: &Prepared,
    params: &TesterParams,
    rng: &mut R,
    want_witness: bool,
) -> Verdict {
    let seeds = sub_seeds(prepared.paths.len(), rng);
    let outcomes = seeds
        .par_iter()
        .enumerate()
        .map(|(pi, &seed)| {
            let mut sub = ChaCha8Rng::seed_from_u64(seed);
            word_tester_along(w, pi, prepared, params, &mut sub, want_witness)
        })
        .collect();
    combine(outcomes, prepared, params)
}
