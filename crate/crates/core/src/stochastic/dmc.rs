use std::collections::HashMap;

use rayon::prelude::*;

use crate::engine::{fire, EngineError, Event, Mode};
use crate::marking::NestedMarking;
use crate::rate::{Arith, Prob};
use crate::system::SystemNet;

use super::rates::{firing_probabilities, StochasticConfig};

/// Exploration bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_depth: Option<usize>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_states: 100_000,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmcEdge {
    pub from: usize,
    pub to: usize,
    pub event: Event,
    pub mode: Mode,
    pub probability: Prob,
}

/// The reachability graph decorated with transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    pub arith: Arith,
    /// State 0 is the initial marking; the rest follow in discovery order.
    pub states: Vec<NestedMarking>,
    pub edges: Vec<DmcEdge>,
    /// Whether each state's successors were computed.
    pub expanded: Vec<bool>,
    pub truncated: bool,
}

impl Dmc {
    pub fn initial(&self) -> usize {
        0
    }

    /// Number of reached states whose successors were not explored.
    pub fn frontier(&self) -> usize {
        self.expanded.iter().filter(|e| !**e).count()
    }

    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = &DmcEdge> + '_ {
        self.edges.iter().filter(move |e| e.from == s)
    }

    /// Expanded states without outgoing edges.
    pub fn deadlocks(&self) -> Vec<usize> {
        let mut has_out = vec![false; self.states.len()];
        for e in &self.edges {
            has_out[e.from] = true;
        }
        (0..self.states.len())
            .filter(|&s| self.expanded[s] && !has_out[s])
            .collect()
    }

    /// Sum of outgoing probabilities per state.
    pub fn row_sums(&self) -> Vec<Prob> {
        let mut sums = vec![Prob::zero(self.arith); self.states.len()];
        for e in &self.edges {
            sums[e.from] = sums[e.from].add(&e.probability);
        }
        sums
    }

    pub fn index_of(&self, mu: &NestedMarking) -> Option<usize> {
        self.states.iter().position(|s| s == mu)
    }
}

/// Successors of one state: `(event, mode, probability, target)`.
type Expansion = Vec<(Event, Mode, Prob, NestedMarking)>;

fn expand(sys: &SystemNet, mu: &NestedMarking, cfg: &StochasticConfig) -> Result<Expansion, EngineError> {
    let mut out = Vec::new();
    for w in firing_probabilities(sys, mu, cfg)? {
        let share = w.probability.div_usize(w.modes.len());
        for m in &w.modes {
            let next = fire(mu, &w.event, m)?;
            out.push((w.event.clone(), m.clone(), share.clone(), next));
        }
    }
    Ok(out)
}

/// Breadth-first construction of the DMC from `mu0`.
///
/// With `parallel`, each BFS level is expanded concurrently; states are
/// still numbered in the same order as the sequential run.
pub fn build_dmc(
    sys: &SystemNet,
    mu0: &NestedMarking,
    limits: Limits,
    cfg: &StochasticConfig,
    parallel: bool,
) -> Result<Dmc, EngineError> {
    let mut index: HashMap<NestedMarking, usize> = HashMap::new();
    let mut dmc = Dmc {
        arith: cfg.arith,
        states: vec![mu0.clone()],
        edges: Vec::new(),
        expanded: vec![false],
        truncated: false,
    };
    index.insert(mu0.clone(), 0);
    let mut level = vec![0usize];
    let mut depth = 0usize;
    while !level.is_empty() {
        if limits.max_depth.is_some_and(|d| depth >= d) {
            // a depth-cut state only counts as truncation if it could move
            for &s in &level {
                if expand(sys, &dmc.states[s], cfg)?.is_empty() {
                    dmc.expanded[s] = true;
                } else {
                    dmc.truncated = true;
                }
            }
            break;
        }
        let expansions: Vec<Result<Expansion, EngineError>> = if parallel {
            level.par_iter().map(|&s| expand(sys, &dmc.states[s], cfg)).collect()
        } else {
            level.iter().map(|&s| expand(sys, &dmc.states[s], cfg)).collect()
        };
        let mut next_level = Vec::new();
        for (&s, exp) in level.iter().zip(expansions) {
            let exp = exp?;
            let fresh = exp.iter().filter(|(_, _, _, m)| !index.contains_key(m)).count();
            if dmc.states.len() + fresh > limits.max_states {
                dmc.truncated = true;
                break;
            }
            for (event, mode, probability, m) in exp {
                let to = match index.get(&m) {
                    Some(&i) => i,
                    None => {
                        let i = dmc.states.len();
                        index.insert(m.clone(), i);
                        dmc.states.push(m);
                        dmc.expanded.push(false);
                        next_level.push(i);
                        i
                    }
                };
                dmc.edges.push(DmcEdge {
                    from: s,
                    to,
                    event,
                    mode,
                    probability,
                });
            }
            dmc.expanded[s] = true;
        }
        if dmc.truncated {
            break;
        }
        level = next_level;
        depth += 1;
    }
    Ok(dmc)
}
