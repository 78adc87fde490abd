//! Rates from transformation complexity: `Λ(t) = γ^TC(t)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::NetTerm;
use crate::ids::TransitionId;
use crate::rate::{format_rational, parse_rational, Rate, Rational};
use crate::system::SystemNet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapeError {
    #[error("gamma must lie in [0, 1], got {0}")]
    GammaRange(String),
    #[error("gamma is 0 but `{transition}` has complexity {tc}; its rate would be 0")]
    ZeroRate { transition: TransitionId, tc: usize },
    #[error("unknown system transition `{0}`")]
    UnknownTransition(TransitionId),
    #[error("bad gamma literal `{0}`")]
    BadLiteral(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapeConfig {
    gamma: Rational,
    /// Count every function symbol in guards, not only net operators.
    pub strict: bool,
}

impl MapeConfig {
    pub fn new(gamma: Rational) -> Result<Self, MapeError> {
        if gamma < Rational::zero() || gamma > Rational::one() {
            return Err(MapeError::GammaRange(format_rational(&gamma)));
        }
        Ok(Self { gamma, strict: false })
    }

    pub fn parse(text: &str) -> Result<Self, MapeError> {
        Self::new(parse_rational(text).map_err(|_| MapeError::BadLiteral(text.to_string()))?)
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }
}

/// Operator applications in `t`.
pub fn term_op_count(t: &NetTerm) -> usize {
    t.op_count()
}

/// `TC(t)`: operators in the guard plus operators in every input and output
/// inscription.
pub fn transformation_complexity(sys: &SystemNet, t: &TransitionId, strict: bool) -> Result<usize, MapeError> {
    let tr = sys
        .transition(t)
        .ok_or_else(|| MapeError::UnknownTransition(t.clone()))?;
    let guard = if strict {
        tr.guard.function_symbols()
    } else {
        tr.guard.net_op_count()
    };
    let arcs: usize = tr.inputs().chain(tr.outputs()).map(|(_, e)| term_op_count(e)).sum();
    Ok(guard + arcs)
}

pub fn mape_rate(sys: &SystemNet, t: &TransitionId, cfg: &MapeConfig) -> Result<Rate, MapeError> {
    let tc = transformation_complexity(sys, t, cfg.strict)?;
    if tc == 0 {
        return Ok(Rate::one());
    }
    if cfg.gamma.is_zero() {
        return Err(MapeError::ZeroRate {
            transition: t.clone(),
            tc,
        });
    }
    let r = Rate::new(cfg.gamma.clone()).expect("gamma checked positive");
    Ok(r.pow(tc as u64))
}

/// The net with every transition rate replaced by its MAPE rate.
pub fn apply_mape_rates(sys: &SystemNet, cfg: &MapeConfig) -> Result<SystemNet, MapeError> {
    apply_mape_rates_to(sys, cfg, sys.transitions().keys())
}

/// Like [`apply_mape_rates`] but only for the listed transitions.
pub fn apply_mape_rates_to<'a>(
    sys: &SystemNet,
    cfg: &MapeConfig,
    which: impl IntoIterator<Item = &'a TransitionId>,
) -> Result<SystemNet, MapeError> {
    let mut rates = BTreeMap::new();
    for t in which {
        rates.insert(t.clone(), mape_rate(sys, t, cfg)?);
    }
    Ok(sys.with_rates(&rates))
}
