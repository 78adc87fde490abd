use thiserror::Error;

use super::dmc::Dmc;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransientError {
    #[error("the chain is truncated ({frontier} unexplored states); pass allow_truncated to analyse it anyway")]
    Truncated { frontier: usize },
}

/// Distribution over states after `steps` steps from the initial state.
///
/// States without outgoing edges (deadlocks, and unexplored states when
/// `allow_truncated` is set) keep their mass.
pub fn transient_distribution(dmc: &Dmc, steps: usize, allow_truncated: bool) -> Result<Vec<f64>, TransientError> {
    if dmc.truncated && !allow_truncated {
        return Err(TransientError::Truncated {
            frontier: dmc.frontier(),
        });
    }
    let n = dmc.states.len();
    let mut has_out = vec![false; n];
    let edges: Vec<(usize, usize, f64)> = dmc
        .edges
        .iter()
        .map(|e| {
            has_out[e.from] = true;
            (e.from, e.to, e.probability.to_f64())
        })
        .collect();
    let mut dist = vec![0.0; n];
    dist[dmc.initial()] = 1.0;
    for _ in 0..steps {
        let mut next = vec![0.0; n];
        for (s, p) in dist.iter().enumerate() {
            if !has_out[s] {
                next[s] += p;
            }
        }
        for &(from, to, p) in &edges {
            next[to] += dist[from] * p;
        }
        dist = next;
    }
    Ok(dist)
}
