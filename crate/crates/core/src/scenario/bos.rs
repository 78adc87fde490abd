//! The battle-of-sexes self-adaptation model.
//!
//! One net-token carries both agents' choices as
//! `(a0 XOR[A0,B0] b0) || (a1 XOR[A1,B1] b1)` plus a `restart` transition
//! from the final back to the initial place. A round runs
//!
//! ```text
//! ready --play_xy--> played_xy --reward_xy--> done --reset--> ready
//!                                             done --adapt_a0 / adapt_b0--> done
//! ```
//!
//! `play_xy` synchronises with agent 0's entry `x0` and agent 1's entry
//! `y1`. Outcomes with a zero payoff pair skip the reward place. Rewards
//! add the payoff to the chosen entries' rates. `reset` synchronises with
//! `restart`; the fork and join of the parallel composition fire as
//! object-autonomous events. The adapt transitions replace agent 0's choice
//! by its dominant branch once the branch probability exceeds the
//! threshold. System rates come from the transformation complexity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{ops, AlgebraError, ArithOp, CmpOp, Expr, Guard, NetTerm};
use crate::engine::EngineError;
use crate::ids::{Channel, ObjPlaceId, ObjTransId, TransitionId};
use crate::mape::{apply_mape_rates, MapeConfig, MapeError};
use crate::marking::{Addend, NestedMarking};
use crate::multiset::Multiset;
use crate::object_net::{Kind, NetError, NetRef, ObjTransition, ObjectNet, Origin};
use crate::rate::{format_f64_12, format_rational, ratio, rational_to_f64, Rate, Rational};
use crate::stochastic::{simulate, Observer, StochasticConfig, Trace, WeightedEvent};
use crate::system::{SysTransition, SystemError, SystemNet};

pub const KIND: &str = "Agents";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BosError {
    #[error("payoffs must be non-negative, got {0}")]
    NegativePayoff(String),
    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    Threshold(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Mape(#[from] MapeError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BosParams {
    pub a0: Rate,
    pub b0: Rate,
    pub a1: Rate,
    pub b1: Rate,
    /// `payoff[i][j]` rewards agent 0 choosing `i` (0 = a, 1 = b) and agent 1
    /// choosing `j`, as (agent 0, agent 1).
    pub payoff: [[(Rational, Rational); 2]; 2],
    pub threshold: Rational,
    pub gamma: Rational,
    pub horizon: usize,
}

impl Default for BosParams {
    fn default() -> Self {
        let r = |n: u64| Rate::from_integer(n).expect("positive");
        let p = |a: i64, b: i64| (ratio(a, 1), ratio(b, 1));
        Self {
            a0: r(70),
            b0: r(30),
            a1: r(55),
            b1: r(45),
            payoff: [[p(3, 1), p(0, 0)], [p(0, 0), p(1, 3)]],
            threshold: ratio(4, 5),
            gamma: ratio(1, 2),
            horizon: 200,
        }
    }
}

const CHOICES: [&str; 2] = ["a", "b"];

fn act_name(choice: usize, agent: usize) -> String {
    format!("{}{agent}", CHOICES[choice])
}

fn kind() -> Arc<Kind> {
    let mut places = Vec::new();
    let mut channels = vec![Channel::new("reset")];
    for agent in 0..2 {
        for c in 0..2 {
            let n = act_name(c, agent);
            places.push(ObjPlaceId::new(format!("i_{n}")));
            places.push(ObjPlaceId::new(format!("f_{n}")));
            channels.push(Channel::new(format!("c{n}")));
        }
    }
    Arc::new(Kind::new(KIND, places, 8, channels))
}

fn activity(kind: &Arc<Kind>, name: &str) -> Result<ObjectNet, NetError> {
    ObjectNet::builder(kind.clone())
        .origin(Origin::name(name))
        .arc(
            name,
            &[&format!("i_{name}")],
            &[&format!("f_{name}")],
            Rate::one(),
            Some(&format!("c{name}")),
        )
        .build()
}

/// The initial net-token and the object marking it starts a round with.
pub fn initial_net(p: &BosParams) -> Result<(NetRef, Multiset<ObjPlaceId>), BosError> {
    let k = kind();
    let agent = |i: usize, ra: &Rate, rb: &Rate| -> Result<ObjectNet, BosError> {
        let a = activity(&k, &act_name(0, i))?;
        let b = activity(&k, &act_name(1, i))?;
        Ok(ops::xor(&a, &b, ra, rb)?)
    };
    let left = agent(0, &p.a0, &p.b0)?;
    let right = agent(1, &p.a1, &p.b1)?;
    let both = ops::parallel(&left, &right)?;

    let start = both.source_places()[0].clone();
    let end = both.sink_places()[0].clone();
    let mut transitions = both.transitions().clone();
    transitions.insert(
        ObjTransId::new("restart"),
        ObjTransition {
            pre: Multiset::singleton(end),
            post: Multiset::singleton(start),
            rate: Rate::one(),
            label: Some(Channel::new("reset")),
        },
    );
    let net = both.rebuild(both.places().clone(), transitions, both.origin().clone())?;
    // the marking right after the fork: both choices are open
    let round: Multiset<ObjPlaceId> =
        Multiset::from_items([&left, &right].iter().map(|n| n.source_places()[0].clone())).expect("two tokens");
    Ok((Arc::new(net), round))
}

fn payoff_places(p: &BosParams) -> BTreeMap<(usize, usize), String> {
    let mut out = BTreeMap::new();
    for (i, ci) in CHOICES.iter().enumerate() {
        for (j, cj) in CHOICES.iter().enumerate() {
            let (r0, r1) = &p.payoff[i][j];
            if !r0.is_zero() || !r1.is_zero() {
                out.insert((i, j), format!("played_{ci}{cj}"));
            }
        }
    }
    out
}

fn dominance(keep: &str, other: &str, threshold: &Rational) -> Guard {
    let k = Expr::rate_of("x", keep);
    let o = Expr::rate_of("x", other);
    Guard::cmp(
        CmpOp::Gt,
        Expr::bin(ArithOp::Div, k.clone(), Expr::bin(ArithOp::Add, k, o)),
        Expr::lit(threshold.clone()),
    )
}

/// The system net (with MAPE rates applied) and the initial marking.
pub fn build_bos_model(p: &BosParams) -> Result<(SystemNet, NestedMarking), BosError> {
    for row in &p.payoff {
        for (r0, r1) in row {
            for r in [r0, r1] {
                if *r < Rational::zero() {
                    return Err(BosError::NegativePayoff(format_rational(r)));
                }
            }
        }
    }
    if p.threshold <= Rational::zero() || p.threshold >= Rational::one() {
        return Err(BosError::Threshold(format_rational(&p.threshold)));
    }
    let (net, round) = initial_net(p)?;
    let k = net.kind().clone();
    let x = || NetTerm::var("x", KIND);
    let rewarded = payoff_places(p);

    let mut b = SystemNet::builder().kind(k).place("ready", KIND).place("done", KIND);
    for place in rewarded.values() {
        b = b.place(place.as_str(), KIND);
    }
    for (i, ci) in CHOICES.iter().enumerate() {
        for (j, cj) in CHOICES.iter().enumerate() {
            let name = format!("play_{ci}{cj}");
            let target = rewarded.get(&(i, j)).map(String::as_str).unwrap_or("done");
            let tr = SysTransition::new()
                .input("ready", x())
                .output(target, x())
                .sync(x(), format!("c{}", act_name(i, 0)))
                .sync(x(), format!("c{}", act_name(j, 1)));
            b = b.transition(name, tr);
        }
    }
    for ((i, j), place) in &rewarded {
        let (r0, r1) = &p.payoff[*i][*j];
        let mut term = x();
        if !r0.is_zero() {
            term = NetTerm::update_rate(term, act_name(*i, 0), r0.clone());
        }
        if !r1.is_zero() {
            term = NetTerm::update_rate(term, act_name(*j, 1), r1.clone());
        }
        let name = format!("reward_{}{}", CHOICES[*i], CHOICES[*j]);
        b = b.transition(
            name,
            SysTransition::new().input(place.as_str(), x()).output("done", term),
        );
    }
    b = b.transition(
        "reset",
        SysTransition::new()
            .input("done", x())
            .output("ready", x())
            .sync(x(), "reset"),
    );
    for (keep, other) in [("a0", "b0"), ("b0", "a0")] {
        let tr = SysTransition::new()
            .input("done", x())
            .output("done", NetTerm::fix_choice(x(), keep))
            .guard(dominance(keep, other, &p.threshold));
        b = b.transition(format!("adapt_{keep}"), tr);
    }
    let sys = b.build()?;
    let sys = apply_mape_rates(&sys, &MapeConfig::new(p.gamma.clone())?)?;
    let mu0 = NestedMarking::from_addends([Addend::new("ready", net, round)]).expect("one addend");
    Ok((sys, mu0))
}

/// Whether an agent still chooses or has been fixed to one branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Xor,
    FixedA,
    FixedB,
}

impl Structure {
    pub fn label(self, agent: usize) -> String {
        match self {
            Structure::Xor => "xor".into(),
            Structure::FixedA => format!("fixed-a{agent}"),
            Structure::FixedB => format!("fixed-b{agent}"),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label(0))
    }
}

impl FromStr for Structure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xor" => Ok(Structure::Xor),
            "fixed-a0" | "fixed-a1" => Ok(Structure::FixedA),
            "fixed-b0" | "fixed-b1" => Ok(Structure::FixedB),
            _ => Err(format!("unknown structure `{s}`")),
        }
    }
}

/// Branch probability of option a for one agent and its structure.
pub fn agent_state(net: &ObjectNet, agent: usize) -> (Rational, Structure) {
    let a = net.rate(&ObjTransId::new(act_name(0, agent)));
    let b = net.rate(&ObjTransId::new(act_name(1, agent)));
    match (a, b) {
        (Some(a), Some(b)) => (a.value() / (a.value() + b.value()), Structure::Xor),
        (Some(_), None) => (Rational::one(), Structure::FixedA),
        _ => (Rational::zero(), Structure::FixedB),
    }
}

/// Observation of one marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BosSample {
    pub pr_a0: Rational,
    pub pr_a1: Rational,
    pub structure: Structure,
}

/// Reads the agents' net-token from a BoS marking.
pub fn sample(mu: &NestedMarking) -> Option<BosSample> {
    let (a, _) = mu.iter().next()?;
    let (pr_a0, structure) = agent_state(&a.net, 0);
    let (pr_a1, _) = agent_state(&a.net, 1);
    Some(BosSample {
        pr_a0,
        pr_a1,
        structure,
    })
}

/// Emits `prA0, prA1, structureFlag` and remembers every sample along with
/// whether an adapt event was enabled.
#[derive(Debug, Default)]
pub struct BosObserver {
    pub samples: Vec<(BosSample, bool)>,
}

pub fn adapt_transitions() -> [TransitionId; 2] {
    [TransitionId::new("adapt_a0"), TransitionId::new("adapt_b0")]
}

impl Observer for BosObserver {
    fn columns(&self) -> Vec<String> {
        ["prA0", "prA1", "structureFlag"].map(String::from).to_vec()
    }

    fn observe(&mut self, _step: usize, mu: &NestedMarking, enabled: &[WeightedEvent]) -> Vec<String> {
        let Some(s) = sample(mu) else {
            return vec![String::new(); 3];
        };
        let adapt = adapt_transitions();
        let can_adapt = enabled
            .iter()
            .any(|w| w.event.system_transition().is_some_and(|t| adapt.contains(t)));
        let row = vec![
            format_f64_12(rational_to_f64(&s.pr_a0)),
            format_f64_12(rational_to_f64(&s.pr_a1)),
            s.structure.label(0),
        ];
        self.samples.push((s, can_adapt));
        row
    }
}

/// One seeded run of `p.horizon` steps with the BoS observer attached.
pub fn run_bos(p: &BosParams, seed: u64, cfg: &StochasticConfig) -> Result<(Trace, BosObserver), BosError> {
    let (sys, mu0) = build_bos_model(p)?;
    let mut obs = BosObserver::default();
    let trace = simulate(&sys, &mu0, seed, p.horizon, cfg, Some(&mut obs))?;
    Ok((trace, obs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{enabled_events, fire, EngineConfig};

    fn rate_of(net: &ObjectNet, t: &str) -> String {
        net.rate(&ObjTransId::new(t)).unwrap().to_string()
    }

    #[test]
    fn initial_probabilities() {
        let (_, mu0) = build_bos_model(&BosParams::default()).unwrap();
        let s = sample(&mu0).unwrap();
        assert_eq!(s.pr_a0, ratio(7, 10));
        assert_eq!(s.pr_a1, ratio(11, 20));
        assert_eq!(s.structure, Structure::Xor);
        let (net, _) = initial_net(&BosParams::default()).unwrap();
        assert_eq!(net.display().to_string(), "((a0 XOR[70,30] b0) || (a1 XOR[55,45] b1))");
    }

    fn play(outcome: &str) -> NestedMarking {
        let (sys, mu0) = build_bos_model(&BosParams::default()).unwrap();
        let cfg = EngineConfig::default();
        let mut mu = mu0;
        for t in [format!("play_{outcome}"), format!("reward_{outcome}")] {
            let en = enabled_events(&sys, &mu, &cfg).unwrap();
            let Some(e) = en
                .iter()
                .find(|e| e.event.system_transition().map(|x| x.as_str()) == Some(&t))
            else {
                continue;
            };
            mu = fire(&mu, &e.event, &e.modes[0]).unwrap();
        }
        mu
    }

    #[test]
    fn payoff_updates() {
        let mu = play("aa");
        let net = &mu.iter().next().unwrap().0.net;
        assert_eq!(mu.iter().next().unwrap().0.place.as_str(), "done");
        assert_eq!(
            [
                rate_of(net, "a0"),
                rate_of(net, "b0"),
                rate_of(net, "a1"),
                rate_of(net, "b1")
            ],
            ["73", "30", "56", "45"]
        );
        let mu = play("ab");
        let net = &mu.iter().next().unwrap().0.net;
        assert_eq!(mu.iter().next().unwrap().0.place.as_str(), "done");
        assert_eq!(
            [
                rate_of(net, "a0"),
                rate_of(net, "b0"),
                rate_of(net, "a1"),
                rate_of(net, "b1")
            ],
            ["70", "30", "55", "45"]
        );
    }

    #[test]
    fn mape_rates() {
        let (sys, _) = build_bos_model(&BosParams::default()).unwrap();
        let r = |t: &str| sys.transition(&t.into()).unwrap().rate.value().clone();
        for t in ["play_aa", "play_ab", "play_ba", "play_bb", "reset"] {
            assert_eq!(r(t), ratio(1, 1), "{t}");
        }
        assert_eq!(r("adapt_a0"), ratio(1, 2));
        assert_eq!(r("adapt_b0"), ratio(1, 2));
        assert_eq!(r("reward_aa"), ratio(1, 4));
    }

    fn at_done(a0: u64, b0: u64) -> (SystemNet, NestedMarking) {
        let p = BosParams {
            a0: Rate::from_integer(a0).unwrap(),
            b0: Rate::from_integer(b0).unwrap(),
            ..BosParams::default()
        };
        let (sys, mu0) = build_bos_model(&p).unwrap();
        let a = mu0.iter().next().unwrap().0.clone();
        let mu = NestedMarking::from_addends([Addend::new("done", a.net, a.marking)]).unwrap();
        (sys, mu)
    }

    fn adapt_enabled(sys: &SystemNet, mu: &NestedMarking) -> Vec<String> {
        enabled_events(sys, mu, &EngineConfig::default())
            .unwrap()
            .iter()
            .filter_map(|e| e.event.system_transition().map(|t| t.to_string()))
            .filter(|t| t.starts_with("adapt"))
            .collect()
    }

    #[test]
    fn adapt_follows_the_guard() {
        let (sys, mu) = at_done(80, 20);
        assert!(adapt_enabled(&sys, &mu).is_empty());
        let (sys, mu) = at_done(81, 19);
        assert_eq!(adapt_enabled(&sys, &mu), ["adapt_a0"]);
        let (sys, mu) = at_done(10, 90);
        assert_eq!(adapt_enabled(&sys, &mu), ["adapt_b0"]);
    }

    #[test]
    fn adapt_fixes_agent_zero() {
        let (sys, mu) = at_done(90, 10);
        let en = enabled_events(&sys, &mu, &EngineConfig::default()).unwrap();
        let e = en
            .iter()
            .find(|e| e.event.system_transition().is_some_and(|t| t.as_str() == "adapt_a0"))
            .unwrap();
        let after = fire(&mu, &e.event, &e.modes[0]).unwrap();
        let s = sample(&after).unwrap();
        assert_eq!(s.pr_a0, Rational::one());
        assert_eq!(s.structure, Structure::FixedA);
        let net = &after.iter().next().unwrap().0.net;
        assert_eq!(net.display().to_string(), "(a0 || (a1 XOR[55,45] b1))");
        assert!(adapt_enabled(&sys, &after).is_empty());
    }

    #[test]
    fn symmetric_rates_give_half() {
        let p = BosParams {
            a0: Rate::from_integer(5).unwrap(),
            b0: Rate::from_integer(5).unwrap(),
            ..BosParams::default()
        };
        let (_, mu0) = build_bos_model(&p).unwrap();
        assert_eq!(sample(&mu0).unwrap().pr_a0, ratio(1, 2));
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = BosParams::default();
        p.payoff[0][0].0 = ratio(-1, 1);
        assert!(matches!(build_bos_model(&p), Err(BosError::NegativePayoff(_))));
        let p = BosParams {
            threshold: ratio(1, 1),
            ..BosParams::default()
        };
        assert!(matches!(build_bos_model(&p), Err(BosError::Threshold(_))));
    }
}
