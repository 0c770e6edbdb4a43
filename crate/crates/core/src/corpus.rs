//! Seeded proof corpora pushed through the whole pipeline: kernel check,
//! system-test validation, inlining, and re-checking both certificates.

use serde::{Deserialize, Serialize};

use crate::gen::{proof_sample, rng, ProofSample};
use crate::inline::{compile, is_system_test_proof, to_normal_shape};
use crate::kernel::check_proof;
use crate::par::prelude::*;
use crate::refine::check_refinement;
use crate::syntax::{Formula, Game};

/// Largest game depth handed to the proof generator.
pub const MAX_GAME_DEPTH: usize = 5;

/// The sample for `seed`; game depth cycles through `1..=MAX_GAME_DEPTH`.
pub fn sample(seed: u64) -> ProofSample {
    let depth = 1 + (seed % MAX_GAME_DEPTH as u64) as usize;
    proof_sample(&mut rng(seed), depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub seed: u64,
    /// Accepted with every obligation decided.
    pub accepted: bool,
    pub system_test: bool,
    /// `Err` carries the reason `to_normal_shape` or `compile` gave.
    pub compiled: Result<(), String>,
    pub system: Option<Game>,
    pub is_system: bool,
    pub transfer_rechecks: bool,
    /// `Err` when no refinement certificate could be synthesized.
    pub refinement_rechecks: Result<bool, String>,
}

/// Runs one sample through the pipeline.
pub fn evaluate(seed: u64, s: &ProofSample) -> Outcome {
    let mut out = Outcome {
        seed,
        accepted: false,
        system_test: false,
        compiled: Err("not attempted".into()),
        system: None,
        is_system: false,
        transfer_rechecks: false,
        refinement_rechecks: Err("not attempted".into()),
    };
    out.accepted = check_proof(&s.ctx, &s.proof, &s.goal).fully_discharged();
    if !out.accepted {
        return out;
    }
    out.system_test = is_system_test_proof(&s.ctx, &s.proof, &s.goal);
    if !out.system_test {
        return out;
    }
    let compiled = match to_normal_shape(&s.ctx, &s.proof, &s.goal).and_then(|shape| compile(&shape)) {
        Ok(c) => c,
        Err(e) => {
            out.compiled = Err(e.to_string());
            return out;
        }
    };
    out.compiled = Ok(());
    out.is_system = compiled.system.is_system();
    let (game, post) = match &s.goal {
        Formula::Box(g, p) => ((**g).clone(), (**p).clone()),
        Formula::Diamond(g, p) => (Game::dual((**g).clone()), (**p).clone()),
        _ => unreachable!("to_normal_shape accepts only modal goals"),
    };
    let tgoal = Formula::boxf(compiled.system.clone(), post);
    out.transfer_rechecks = check_proof(&s.ctx, &compiled.transfer, &tgoal).fully_discharged();
    out.refinement_rechecks = match &compiled.refinement {
        Ok(d) => {
            let rgoal = Formula::refine(None, compiled.system.clone(), game);
            Ok(check_refinement(&s.ctx, d, &rgoal).fully_discharged())
        }
        Err(e) => Err(e.to_string()),
    };
    out.system = Some(compiled.system);
    out
}

/// Generates and evaluates the samples for `seeds`.
pub fn evaluate_seeds(seeds: std::ops::Range<u64>) -> Vec<Outcome> {
    seeds.into_par_iter().map(|seed| evaluate(seed, &sample(seed))).collect()
}

/// Sequential reference for [`evaluate_seeds`].
pub fn evaluate_seeds_sequential(seeds: std::ops::Range<u64>) -> Vec<Outcome> {
    seeds.map(|seed| evaluate(seed, &sample(seed))).collect()
}

/// Tallies over a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub generated: usize,
    pub accepted: usize,
    pub system_test: usize,
    pub compiled: usize,
    pub is_system: usize,
    pub transfer: usize,
    pub refinement: usize,
    pub refinement_unsupported: usize,
}

impl Summary {
    pub fn of(outcomes: &[Outcome]) -> Summary {
        let mut s = Summary { generated: outcomes.len(), ..Summary::default() };
        for o in outcomes {
            s.accepted += o.accepted as usize;
            s.system_test += (o.accepted && o.system_test) as usize;
            s.compiled += o.compiled.is_ok() as usize;
            s.is_system += o.is_system as usize;
            s.transfer += o.transfer_rechecks as usize;
            match &o.refinement_rechecks {
                Ok(ok) => s.refinement += *ok as usize,
                Err(_) if o.compiled.is_ok() => s.refinement_unsupported += 1,
                Err(_) => {}
            }
        }
        s
    }
}
