//! Events, the enabling predicate, firing modes and the firing rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraError, Binding, GuardError, NetTerm};
use crate::ids::{Channel, KindName, ObjPlaceId, ObjTransId, PlaceId, TransitionId};
use crate::marking::{Addend, NestedMarking};
use crate::multiset::{multisets_over, sub_multisets_of_size, CountOverflow, Multiset};
use crate::object_net::{NetError, NetRef};
use crate::system::{SysTransition, SystemNet};

pub const DEFAULT_MODE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("event {event} has more than {cap} modes")]
    ModeCap { event: String, cap: usize },
    #[error("guard of `{transition}`: {source}")]
    Guard {
        transition: TransitionId,
        #[source]
        source: GuardError,
    },
    #[error("unknown system transition `{0}`")]
    UnknownTransition(TransitionId),
    #[error("mode of {0} is not enabled in the current marking")]
    NotEnabled(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Overflow(#[from] CountOverflow),
}

/// The synchronisation function `ϑ`: object transitions fired per net.
pub type Theta = BTreeMap<NetRef, Multiset<ObjTransId>>;

/// A firing event.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    /// A system transition under a binding, synchronised with `theta`.
    /// An empty `theta` is a system-autonomous firing.
    Sync {
        transition: TransitionId,
        binding: Binding,
        theta: Theta,
    },
    /// Object transition `transition` firing alone inside a net-token of
    /// `net` on `place`.
    ObjAutonomous {
        place: PlaceId,
        net: NetRef,
        transition: ObjTransId,
    },
}

impl Event {
    /// The system transition, or `None` for object-autonomous events.
    pub fn system_transition(&self) -> Option<&TransitionId> {
        match self {
            Event::Sync { transition, .. } => Some(transition),
            Event::ObjAutonomous { .. } => None,
        }
    }

    /// Object transitions fired, with multiplicity, per net.
    pub fn theta(&self) -> Theta {
        match self {
            Event::Sync { theta, .. } => theta.clone(),
            Event::ObjAutonomous { net, transition, .. } => {
                BTreeMap::from([(net.clone(), Multiset::singleton(transition.clone()))])
            }
        }
    }
}

fn fmt_theta(theta: &Theta, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("[")?;
    for (i, (n, ts)) in theta.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}->{}", n.display(), ts)?;
    }
    f.write_str("]")
}

impl fmt::Display for Event {
    /// `t^{x->N1, y->N2}[]`, `a^{x->N}[N->r]`, `id_{q,N2}[N2->e]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Sync {
                transition,
                binding,
                theta,
            } => {
                write!(f, "{transition}^{binding}")?;
                fmt_theta(theta, f)
            }
            Event::ObjAutonomous { place, net, transition } => {
                write!(f, "id_{{{place},{}}}[{}->{transition}]", net.display(), net.display())
            }
        }
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A firing mode: consumed and produced nested sub-markings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub lambda: NestedMarking,
    pub rho: NestedMarking,
}

/// `event(λ => ρ)`, the trace format of one firing.
pub fn format_firing(ev: &Event, mode: &Mode) -> String {
    format!("{ev}({} => {})", mode.lambda, mode.rho)
}

/// An event together with all its modes in the current marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnabledEvent {
    pub event: Event,
    pub modes: Vec<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Hard limit on the modes of a single event.
    pub mode_cap: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            mode_cap: DEFAULT_MODE_CAP,
        }
    }
}

type Skeleton = Multiset<(PlaceId, NetRef)>;
/// Consumed and produced object tokens.
type Effect = (Multiset<ObjPlaceId>, Multiset<ObjPlaceId>);
type Slots = Vec<(PlaceId, NetRef)>;

fn eval_side<'a>(
    arcs: impl Iterator<Item = (&'a PlaceId, &'a NetTerm)>,
    alpha: &Binding,
) -> Result<Skeleton, AlgebraError> {
    let mut out = Multiset::new();
    for (p, term) in arcs {
        out.insert((p.clone(), term.eval(alpha)?), 1)?;
    }
    Ok(out)
}

fn lookup<'a>(sys: &'a SystemNet, t: &TransitionId) -> Result<&'a SysTransition, EngineError> {
    sys.transition(t)
        .ok_or_else(|| EngineError::UnknownTransition(t.clone()))
}

/// Nets occurring in `mu`, optionally restricted to one place.
fn nets_in(mu: &NestedMarking, place: Option<&PlaceId>, kind: &KindName) -> BTreeSet<NetRef> {
    mu.iter()
        .filter(|(a, _)| place.is_none_or(|p| a.place == *p) && a.net.kind_name() == kind)
        .map(|(a, _)| a.net.clone())
        .collect()
}

/// All bindings of the input variables of `t` to nets present in `mu` for
/// which the input inscriptions can be matched by whole net-tokens.
pub fn enumerate_bindings(sys: &SystemNet, t: &TransitionId, mu: &NestedMarking) -> Result<Vec<Binding>, EngineError> {
    let tr = lookup(sys, t)?;
    let vars: Vec<_> = tr.input_vars().into_iter().collect();
    let mut candidates: Vec<Vec<NetRef>> = Vec::with_capacity(vars.len());
    for v in &vars {
        let direct: BTreeSet<&PlaceId> = tr
            .inputs()
            .filter(|(_, term)| term.as_var().is_some_and(|w| w.name == v.name))
            .map(|(p, _)| p)
            .collect();
        let set = if direct.is_empty() {
            nets_in(mu, None, &v.kind)
        } else {
            let mut it = direct.iter();
            let first = nets_in(mu, Some(it.next().expect("nonempty")), &v.kind);
            it.fold(first, |acc, p| {
                let here = nets_in(mu, Some(p), &v.kind);
                acc.intersection(&here).cloned().collect()
            })
        };
        if set.is_empty() {
            return Ok(Vec::new());
        }
        candidates.push(set.into_iter().collect());
    }

    let skeleton = mu.skeleton();
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let mut alpha = Binding::new();
        for (i, v) in vars.iter().enumerate() {
            alpha.insert(v.name.clone(), candidates[i][idx[i]].clone());
        }
        if let Ok(pre) = eval_side(tr.inputs(), &alpha) {
            if pre.leq(&skeleton) {
                out.push(alpha);
            }
        }
        // odometer over the candidate lists, last variable fastest
        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < candidates[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn label_demand(tr: &SysTransition, alpha: &Binding) -> Result<BTreeMap<NetRef, Multiset<Channel>>, AlgebraError> {
    let mut out: BTreeMap<NetRef, Multiset<Channel>> = BTreeMap::new();
    for (term, c) in &tr.sync {
        let n = term.eval(alpha)?;
        out.entry(n).or_default().insert(c.clone(), 1)?;
    }
    Ok(out)
}

/// Multisets of object transitions of `net` whose label multiset is `demand`.
fn label_matches(net: &NetRef, demand: &Multiset<Channel>) -> Vec<Multiset<ObjTransId>> {
    let mut acc = vec![Multiset::new()];
    for (c, n) in demand.iter() {
        let ts: Vec<ObjTransId> = net
            .transitions()
            .iter()
            .filter(|(_, tr)| tr.label.as_ref() == Some(c))
            .map(|(t, _)| t.clone())
            .collect();
        let options = multisets_over(&ts, n);
        if options.is_empty() {
            return Vec::new();
        }
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for a in &acc {
            for o in &options {
                next.push(a.checked_add(o).expect("bounded by demand"));
            }
        }
        acc = next;
    }
    acc
}

/// Total `pre♯` and `post♯` of `theta` per kind.
fn theta_effect(theta: &Theta) -> Result<BTreeMap<KindName, Effect>, EngineError> {
    let mut out: BTreeMap<KindName, Effect> = BTreeMap::new();
    for (n, ts) in theta {
        let (pre, post) = n.fire_effect(ts)?;
        let e = out.entry(n.kind_name().clone()).or_default();
        e.0 = e.0.checked_add(&pre)?;
        e.1 = e.1.checked_add(&post)?;
    }
    Ok(out)
}

/// All synchronisation functions for `t` under `alpha` whose label
/// multisets match and whose demand does not exceed the kind-level tokens
/// available in `mu`.
pub fn enumerate_theta(
    sys: &SystemNet,
    t: &TransitionId,
    alpha: &Binding,
    mu: &NestedMarking,
) -> Result<Vec<Theta>, EngineError> {
    let tr = lookup(sys, t)?;
    let Ok(demand) = label_demand(tr, alpha) else {
        return Ok(Vec::new());
    };
    let mut acc: Vec<Theta> = vec![BTreeMap::new()];
    for (n, d) in &demand {
        let options = label_matches(n, d);
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for a in &acc {
            for o in &options {
                let mut m = a.clone();
                m.insert(n.clone(), o.clone());
                next.push(m);
            }
        }
        acc = next;
    }
    let mut out = Vec::with_capacity(acc.len());
    for theta in acc {
        let mut ok = true;
        for (k, (pre, _)) in theta_effect(&theta)? {
            if !pre.leq(&mu.proj2_kind(&k)?) {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(theta);
        }
    }
    Ok(out)
}

/// The four conjuncts of the enabling predicate for given input/output
/// skeletons and synchronisation.
fn phi(
    pre: &Skeleton,
    post: &Skeleton,
    theta: &Theta,
    lambda: &NestedMarking,
    rho: &NestedMarking,
) -> Result<bool, EngineError> {
    if lambda.skeleton() != *pre || rho.skeleton() != *post {
        return Ok(false);
    }
    let effect = theta_effect(theta)?;
    let mut kinds: BTreeSet<KindName> = effect.keys().cloned().collect();
    kinds.extend(lambda.iter().map(|(a, _)| a.net.kind_name().clone()));
    kinds.extend(rho.iter().map(|(a, _)| a.net.kind_name().clone()));
    let empty = (Multiset::new(), Multiset::new());
    for k in kinds {
        let (tpre, tpost) = effect.get(&k).unwrap_or(&empty);
        let lam = lambda.proj2_kind(&k)?;
        if !tpre.leq(&lam) {
            return Ok(false);
        }
        let expected = lam.sub(tpre).checked_add(tpost)?;
        if rho.proj2_kind(&k)? != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluates the enabling predicate for `ev` with mode `(lambda, rho)`.
/// The guard is not part of the predicate; see [`enabled_events`].
pub fn check_phi(
    sys: &SystemNet,
    ev: &Event,
    lambda: &NestedMarking,
    rho: &NestedMarking,
) -> Result<bool, EngineError> {
    match ev {
        Event::Sync {
            transition,
            binding,
            theta,
        } => {
            let tr = lookup(sys, transition)?;
            let (Ok(pre), Ok(post)) = (eval_side(tr.inputs(), binding), eval_side(tr.outputs(), binding)) else {
                return Ok(false);
            };
            phi(&pre, &post, theta, lambda, rho)
        }
        Event::ObjAutonomous { place, net, .. } => {
            let sk = Multiset::singleton((place.clone(), net.clone()));
            phi(&sk, &sk, &ev.theta(), lambda, rho)
        }
    }
}

/// Ways to split `count` tokens over `parts` slots.
fn compositions(count: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 0 {
        return if count == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut cur = vec![0u64; parts];
    fn rec(i: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for take in 0..=left {
            cur[i] = take;
            rec(i + 1, left - take, cur, out);
        }
    }
    rec(0, count, &mut cur, &mut out);
    out
}

fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::with_capacity(acc.len() * l.len());
        for a in &acc {
            for x in l {
                let mut v = a.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// Candidate consumed sub-markings: whole net-tokens of `mu` matching `pre`.
fn lambda_candidates(pre: &Skeleton, mu: &NestedMarking) -> Result<Vec<NestedMarking>, EngineError> {
    let mut per_key: Vec<Vec<Vec<Addend>>> = Vec::new();
    for ((p, n), count) in pre.iter() {
        let mut avail: Multiset<Multiset<ObjPlaceId>> = Multiset::new();
        for (a, c) in mu.iter() {
            if a.place == *p && a.net == *n {
                avail.insert(a.marking.clone(), c)?;
            }
        }
        let choices: Vec<Vec<Addend>> = sub_multisets_of_size(&avail, count)
            .into_iter()
            .map(|ms| {
                ms.expanded()
                    .map(|m| Addend::new(p.clone(), n.clone(), m.clone()))
                    .collect()
            })
            .collect();
        if choices.is_empty() {
            return Ok(Vec::new());
        }
        per_key.push(choices);
    }
    let mut out = Vec::new();
    for combo in cartesian(&per_key) {
        out.push(NestedMarking::from_addends(combo.into_iter().flatten())?);
    }
    Ok(out)
}

/// Every distribution of `residual` over `slots`, restricted to slot nets
/// that contain the place. Each result gives one marking per slot.
fn distributions(
    residual: &Multiset<ObjPlaceId>,
    slots: &[(PlaceId, NetRef)],
    budget: usize,
) -> Option<Vec<Vec<Multiset<ObjPlaceId>>>> {
    let mut per_place: Vec<(ObjPlaceId, Vec<usize>, Vec<Vec<u64>>)> = Vec::new();
    let mut estimate: usize = 1;
    for (o, c) in residual.iter() {
        let eligible: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].1.places().contains(o)).collect();
        if eligible.is_empty() {
            return Some(Vec::new());
        }
        let comps = compositions(c, eligible.len());
        estimate = estimate.saturating_mul(comps.len());
        if estimate > budget {
            return None;
        }
        per_place.push((o.clone(), eligible, comps));
    }
    let lists: Vec<Vec<Vec<u64>>> = per_place.iter().map(|(_, _, c)| c.clone()).collect();
    let mut out = Vec::new();
    for choice in cartesian(&lists) {
        let mut marks = vec![Multiset::new(); slots.len()];
        for ((o, eligible, _), split) in per_place.iter().zip(&choice) {
            for (slot, n) in eligible.iter().zip(split) {
                if *n > 0 {
                    marks[*slot].insert(o.clone(), *n).expect("bounded by residual");
                }
            }
        }
        out.push(marks);
    }
    Some(out)
}

fn modes_for(
    pre: &Skeleton,
    post: &Skeleton,
    theta: &Theta,
    mu: &NestedMarking,
    cfg: &EngineConfig,
    describe: &dyn Fn() -> String,
) -> Result<Vec<Mode>, EngineError> {
    let cap_err = || EngineError::ModeCap {
        event: describe(),
        cap: cfg.mode_cap,
    };
    let effect = theta_effect(theta)?;
    let mut slots_by_kind: BTreeMap<KindName, Vec<(PlaceId, NetRef)>> = BTreeMap::new();
    for item in post.expanded() {
        slots_by_kind
            .entry(item.1.kind_name().clone())
            .or_default()
            .push(item.clone());
    }
    let budget = cfg.mode_cap.saturating_mul(64);
    let mut found: BTreeSet<Mode> = BTreeSet::new();
    'lambda: for lambda in lambda_candidates(pre, mu)? {
        let mut kinds: BTreeSet<KindName> = effect.keys().cloned().collect();
        kinds.extend(lambda.iter().map(|(a, _)| a.net.kind_name().clone()));
        kinds.extend(slots_by_kind.keys().cloned());
        let empty = (Multiset::new(), Multiset::new());
        let mut per_kind: Vec<(Slots, Vec<Vec<Multiset<ObjPlaceId>>>)> = Vec::new();
        for k in kinds {
            let (tpre, tpost) = effect.get(&k).unwrap_or(&empty);
            let lam = lambda.proj2_kind(&k)?;
            if !tpre.leq(&lam) {
                continue 'lambda;
            }
            let residual = lam.sub(tpre).checked_add(tpost)?;
            let slots = slots_by_kind.get(&k).cloned().unwrap_or_default();
            if slots.is_empty() {
                if residual.is_empty() {
                    continue;
                }
                continue 'lambda;
            }
            match distributions(&residual, &slots, budget) {
                None => return Err(cap_err()),
                Some(d) if d.is_empty() => continue 'lambda,
                Some(d) => per_kind.push((slots, d)),
            }
        }
        let lists: Vec<Vec<Vec<Multiset<ObjPlaceId>>>> = per_kind.iter().map(|(_, d)| d.clone()).collect();
        for choice in cartesian(&lists) {
            let mut addends = Vec::new();
            for ((slots, _), marks) in per_kind.iter().zip(choice) {
                for ((p, n), m) in slots.iter().zip(marks) {
                    addends.push(Addend::new(p.clone(), n.clone(), m));
                }
            }
            let rho = NestedMarking::from_addends(addends)?;
            found.insert(Mode {
                lambda: lambda.clone(),
                rho,
            });
            if found.len() > cfg.mode_cap {
                return Err(cap_err());
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// All modes of `ev` in `mu`, deduplicated and sorted.
pub fn enumerate_modes(
    sys: &SystemNet,
    ev: &Event,
    mu: &NestedMarking,
    cfg: &EngineConfig,
) -> Result<Vec<Mode>, EngineError> {
    match ev {
        Event::Sync {
            transition,
            binding,
            theta,
        } => {
            let tr = lookup(sys, transition)?;
            let (Ok(pre), Ok(post)) = (eval_side(tr.inputs(), binding), eval_side(tr.outputs(), binding)) else {
                return Ok(Vec::new());
            };
            modes_for(&pre, &post, theta, mu, cfg, &|| ev.to_string())
        }
        Event::ObjAutonomous { .. } => Ok(object_autonomous(mu)?.remove(ev).unwrap_or_default()),
    }
}

fn guard_holds(tr: &SysTransition, t: &TransitionId, alpha: &Binding) -> Result<bool, EngineError> {
    match tr.guard.eval(alpha) {
        Ok(b) => Ok(b),
        // A guard reading a transition the bound net lacks is simply false.
        Err(GuardError::UnknownTransition { .. }) => Ok(false),
        Err(source) => Err(EngineError::Guard {
            transition: t.clone(),
            source,
        }),
    }
}

fn sync_events(
    sys: &SystemNet,
    t: &TransitionId,
    mu: &NestedMarking,
    cfg: &EngineConfig,
    out: &mut Vec<EnabledEvent>,
) -> Result<(), EngineError> {
    let tr = lookup(sys, t)?;
    for alpha in enumerate_bindings(sys, t, mu)? {
        if !guard_holds(tr, t, &alpha)? {
            continue;
        }
        let (Ok(pre), Ok(post)) = (eval_side(tr.inputs(), &alpha), eval_side(tr.outputs(), &alpha)) else {
            continue;
        };
        for theta in enumerate_theta(sys, t, &alpha, mu)? {
            let event = Event::Sync {
                transition: t.clone(),
                binding: alpha.clone(),
                theta: theta.clone(),
            };
            let modes = modes_for(&pre, &post, &theta, mu, cfg, &|| event.to_string())?;
            if !modes.is_empty() {
                out.push(EnabledEvent { event, modes });
            }
        }
    }
    Ok(())
}

/// Object-autonomous events: one per (place, net, unlabelled transition),
/// with one mode per distinct enabling net-token.
fn object_autonomous(mu: &NestedMarking) -> Result<BTreeMap<Event, Vec<Mode>>, EngineError> {
    let mut out: BTreeMap<Event, BTreeSet<Mode>> = BTreeMap::new();
    for (a, _) in mu.iter() {
        for (t, tr) in a.net.transitions() {
            if tr.label.is_some() || !tr.pre.leq(&a.marking) {
                continue;
            }
            let after = a.marking.sub(&tr.pre).checked_add(&tr.post)?;
            let ev = Event::ObjAutonomous {
                place: a.place.clone(),
                net: a.net.clone(),
                transition: t.clone(),
            };
            out.entry(ev).or_default().insert(Mode {
                lambda: NestedMarking::from_addends([a.clone()])?,
                rho: NestedMarking::from_addends([Addend::new(a.place.clone(), a.net.clone(), after)])?,
            });
        }
    }
    Ok(out.into_iter().map(|(e, m)| (e, m.into_iter().collect())).collect())
}

/// `En(μ)`: every event with at least one mode and a satisfied guard, in
/// canonical order.
pub fn enabled_events(
    sys: &SystemNet,
    mu: &NestedMarking,
    cfg: &EngineConfig,
) -> Result<Vec<EnabledEvent>, EngineError> {
    let mut out = Vec::new();
    for t in sys.transitions().keys() {
        sync_events(sys, t, mu, cfg, &mut out)?;
    }
    for (event, modes) in object_autonomous(mu)? {
        out.push(EnabledEvent { event, modes });
    }
    out.sort_by(|a, b| a.event.cmp(&b.event));
    Ok(out)
}

/// `μ' = μ − λ + ρ`.
pub fn fire(mu: &NestedMarking, ev: &Event, mode: &Mode) -> Result<NestedMarking, EngineError> {
    if !mode.lambda.leq(mu) {
        return Err(EngineError::NotEnabled(ev.to_string()));
    }
    Ok(mu.sub(&mode.lambda).checked_add(&mode.rho)?)
}
