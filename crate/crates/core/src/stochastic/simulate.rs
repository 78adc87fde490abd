use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::engine::{fire, EngineError};
use crate::marking::NestedMarking;
use crate::rate::Prob;
use crate::system::SystemNet;

use super::rates::{firing_probabilities, StochasticConfig, WeightedEvent};

/// Samples values from each visited marking.
pub trait Observer {
    /// Column names of the observed values.
    fn columns(&self) -> Vec<String>;

    /// Called for the initial marking (step 0) and after every firing, with
    /// the events enabled in `mu`.
    fn observe(&mut self, step: usize, mu: &NestedMarking, enabled: &[WeightedEvent]) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    /// Empty for step 0.
    pub event: String,
    /// Digest of the chosen mode's consumed and produced markings.
    pub mode_digest: String,
    pub probability: Option<Prob>,
    pub observed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub columns: Vec<String>,
    pub steps: Vec<TraceStep>,
    pub final_marking: NestedMarking,
    pub deadlocked: bool,
}

fn sample(rng: &mut ChaCha8Rng, enabled: &[WeightedEvent]) -> usize {
    let weights: Vec<f64> = enabled.iter().map(|w| w.probability.to_f64()).collect();
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    enabled.len() - 1
}

/// Runs one seeded trajectory of at most `max_steps` firings.
pub fn simulate(
    sys: &SystemNet,
    mu0: &NestedMarking,
    seed: u64,
    max_steps: usize,
    cfg: &StochasticConfig,
    mut observer: Option<&mut dyn Observer>,
) -> Result<Trace, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mu = mu0.clone();
    let mut enabled = firing_probabilities(sys, &mu, cfg)?;
    let columns = observer.as_ref().map(|o| o.columns()).unwrap_or_default();
    let mut steps = vec![TraceStep {
        step: 0,
        event: String::new(),
        mode_digest: String::new(),
        probability: None,
        observed: observer
            .as_mut()
            .map(|o| o.observe(0, &mu, &enabled))
            .unwrap_or_default(),
    }];
    for step in 1..=max_steps {
        if enabled.is_empty() {
            break;
        }
        let chosen = &enabled[sample(&mut rng, &enabled)];
        let mode = &chosen.modes[rng.gen_range(0..chosen.modes.len())];
        let next = fire(&mu, &chosen.event, mode)?;
        let mode_digest = {
            let text = format!(
                "{}\n{}",
                mode.lambda.canonical_encoding(),
                mode.rho.canonical_encoding()
            );
            hex::encode(&Sha256::digest(text.as_bytes())[..8])
        };
        let event = chosen.event.to_string();
        let probability = Some(chosen.probability.clone());
        mu = next;
        enabled = firing_probabilities(sys, &mu, cfg)?;
        steps.push(TraceStep {
            step,
            event,
            mode_digest,
            probability,
            observed: observer
                .as_mut()
                .map(|o| o.observe(step, &mu, &enabled))
                .unwrap_or_default(),
        });
    }
    Ok(Trace {
        columns,
        steps,
        deadlocked: enabled.is_empty(),
        final_marking: mu,
    })
}
