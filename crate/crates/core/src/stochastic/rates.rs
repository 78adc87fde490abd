use std::collections::BTreeMap;

use crate::engine::{enabled_events, EngineConfig, EngineError, Event, Mode};
use crate::marking::NestedMarking;
use crate::rate::{Arith, Prob, Rate};
use crate::system::SystemNet;

/// How an event's rate is obtained.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum RatePolicy {
    /// System rate times the rates of all synchronised object transitions.
    #[default]
    Product,
    /// Explicit rates per event; events missing from the map fall back to
    /// the product rule.
    Explicit(BTreeMap<Event, Rate>),
}

/// Settings shared by probability computation, DMC construction and
/// simulation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StochasticConfig {
    pub arith: Arith,
    pub policy: RatePolicy,
    pub engine: EngineConfig,
}

impl StochasticConfig {
    pub fn with_arith(arith: Arith) -> Self {
        Self {
            arith,
            ..Self::default()
        }
    }
}

/// Product-rule rate of `ev`.
pub fn event_rate_product(sys: &SystemNet, ev: &Event) -> Result<Rate, EngineError> {
    let base = match ev {
        Event::Sync { transition, .. } => sys
            .transition(transition)
            .ok_or_else(|| EngineError::UnknownTransition(transition.clone()))?
            .rate
            .clone(),
        Event::ObjAutonomous { .. } => sys.pseudo_rate().clone(),
    };
    let mut rate = base;
    for (net, ts) in ev.theta() {
        for (t, n) in ts.iter() {
            let r = net
                .rate(t)
                .ok_or_else(|| crate::object_net::NetError::UnknownTransition(t.clone()))?;
            rate = rate.mul(&r.pow(n));
        }
    }
    Ok(rate)
}

pub fn event_rate(sys: &SystemNet, ev: &Event, policy: &RatePolicy) -> Result<Rate, EngineError> {
    match policy {
        RatePolicy::Explicit(m) if m.contains_key(ev) => Ok(m[ev].clone()),
        _ => event_rate_product(sys, ev),
    }
}

/// An enabled event with its rate and firing probability.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEvent {
    pub event: Event,
    pub modes: Vec<Mode>,
    pub rate: Rate,
    pub probability: Prob,
}

/// `Pr_μ(θ) = Λ(θ) / Σ Λ(θ')` over the enabled events, in canonical order.
pub fn firing_probabilities(
    sys: &SystemNet,
    mu: &NestedMarking,
    cfg: &StochasticConfig,
) -> Result<Vec<WeightedEvent>, EngineError> {
    let enabled = enabled_events(sys, mu, &cfg.engine)?;
    let mut rated = Vec::with_capacity(enabled.len());
    let mut total = Prob::zero(cfg.arith);
    for e in enabled {
        let rate = event_rate(sys, &e.event, &cfg.policy)?;
        total = total.add(&Prob::from_rate(&rate, cfg.arith));
        rated.push((e, rate));
    }
    Ok(rated
        .into_iter()
        .map(|(e, rate)| WeightedEvent {
            probability: Prob::from_rate(&rate, cfg.arith).div(&total),
            event: e.event,
            modes: e.modes,
            rate,
        })
        .collect())
}
