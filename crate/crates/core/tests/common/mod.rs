//! Random small models and a brute-force enabling oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use hornet_core::algebra::{CmpOp, Expr};
use hornet_core::engine::{Event, Mode};
use hornet_core::object_net::{ObjTransition, Origin};
use hornet_core::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KIND: &str = "K";

pub fn kind() -> Arc<Kind> {
    Arc::new(Kind::new(
        KIND,
        ["a", "b", "c", "d", "e", "f"].map(ObjPlaceId::new),
        4,
        ["c1", "c2"].map(Channel::new),
    ))
}

fn rate(rng: &mut ChaCha8Rng) -> Rate {
    Rate::from_integer(rng.gen_range(1..=5)).unwrap()
}

fn label(rng: &mut ChaCha8Rng) -> Option<Channel> {
    match rng.gen_range(0..3) {
        0 => None,
        1 => Some(Channel::new("c1")),
        _ => Some(Channel::new("c2")),
    }
}

fn small_ms(rng: &mut ChaCha8Rng, places: &[&str], lo: u64, hi: u64) -> Multiset<ObjPlaceId> {
    let n = rng.gen_range(lo..=hi);
    Multiset::from_items((0..n).map(|_| ObjPlaceId::new(places.choose(rng).unwrap()))).unwrap()
}

/// Net number `slot` (0 or 1) over its own three places, either a chain
/// workflow net or random arcs.
fn random_net(rng: &mut ChaCha8Rng, slot: usize) -> NetRef {
    let places: [&str; 3] = if slot == 0 { ["a", "b", "c"] } else { ["d", "e", "f"] };
    let mut b = ObjectNet::builder(kind()).origin(Origin::name(format!("R{slot}")));
    if rng.gen_bool(0.5) {
        for (i, w) in places.windows(2).enumerate() {
            b = b.transition(
                format!("t{slot}_{i}"),
                ObjTransition {
                    pre: Multiset::singleton(ObjPlaceId::new(w[0])),
                    post: Multiset::singleton(ObjPlaceId::new(w[1])),
                    rate: rate(rng),
                    label: label(rng),
                },
            );
        }
    } else {
        for i in 0..rng.gen_range(1..=3) {
            b = b.transition(
                format!("t{slot}_{i}"),
                ObjTransition {
                    pre: small_ms(rng, &places, 1, 2),
                    post: small_ms(rng, &places, 0, 2),
                    rate: rate(rng),
                    label: label(rng),
                },
            );
        }
        for p in places {
            b = b.place(p);
        }
    }
    Arc::new(b.build().unwrap())
}

/// A random model with at most 3 system places, 2 object nets and 6
/// object-level tokens.
pub fn random_model(seed: u64) -> (SystemNet, NestedMarking) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_nets = rng.gen_range(1..=2);
    let nets: Vec<NetRef> = (0..n_nets).map(|s| random_net(&mut rng, s)).collect();
    let n_places = rng.gen_range(1..=3);
    let places: Vec<String> = (0..n_places).map(|i| format!("p{i}")).collect();
    let mut b = SystemNet::builder().kind(kind());
    for p in &places {
        b = b.place(p.as_str(), KIND);
    }
    for ti in 0..rng.gen_range(1..=2) {
        let x = NetTerm::var("x", KIND);
        let y = NetTerm::var("y", KIND);
        let two = rng.gen_bool(0.4);
        let mut tr = SysTransition::new().input(places.choose(&mut rng).unwrap().as_str(), x.clone());
        if two {
            tr = tr.input(places.choose(&mut rng).unwrap().as_str(), y.clone());
        }
        for _ in 0..rng.gen_range(0..=2) {
            let term = match rng.gen_range(0..4) {
                0 if two => NetTerm::parallel(x.clone(), y.clone()),
                1 => NetTerm::update_rate(x.clone(), "t0_0", rate::ratio(1, 1)),
                2 if two => y.clone(),
                _ => x.clone(),
            };
            tr = tr.output(places.choose(&mut rng).unwrap().as_str(), term);
        }
        let n_sync = [0, 1, 1, 2][rng.gen_range(0..4)];
        for _ in 0..n_sync {
            let term = if two && rng.gen_bool(0.5) { y.clone() } else { x.clone() };
            let c = if rng.gen_bool(0.7) { "c1" } else { "c2" };
            tr = tr.sync(term, c);
        }
        if rng.gen_bool(0.3) {
            tr = tr.guard(Guard::cmp(
                CmpOp::Gt,
                Expr::rate_of("x", "t0_0"),
                Expr::lit(rate::ratio(rng.gen_range(1..=5), 1)),
            ));
        }
        tr = tr.rate(rate(&mut rng));
        b = b.transition(format!("s{ti}"), tr);
    }
    let sys = b.build().unwrap();

    let mut budget = 6u64;
    let mut addends = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let net = nets.choose(&mut rng).unwrap().clone();
        let ps: Vec<&str> = net.places().iter().map(|p| p.as_str()).collect();
        let m = small_ms(&mut rng, &ps, budget.min(1), budget.min(3));
        budget -= m.len();
        addends.push(Addend::new(places.choose(&mut rng).unwrap().as_str(), net, m));
    }
    (sys, NestedMarking::from_addends(addends).unwrap())
}

// ---- oracle ----

type Sk = Multiset<(PlaceId, NetRef)>;

/// Every sub-multiset of `items` (pairs of element and count).
fn all_sub<T: Ord + Clone>(items: &[(T, u64)]) -> Vec<Multiset<T>> {
    let Some(((x, n), rest)) = items.split_first() else {
        return vec![Multiset::new()];
    };
    let mut out = Vec::new();
    for tail in all_sub(rest) {
        for k in 0..=*n {
            let mut m = tail.clone();
            if k > 0 {
                m.insert(x.clone(), k).unwrap();
            }
            out.push(m);
        }
    }
    out
}

/// Every multiset of exactly `size` elements drawn from `elems`.
fn of_size<T: Ord + Clone>(elems: &[T], size: u64) -> Vec<Multiset<T>> {
    if size == 0 {
        return vec![Multiset::new()];
    }
    let Some((x, rest)) = elems.split_first() else {
        return vec![];
    };
    let mut out = Vec::new();
    for k in 0..=size {
        for mut m in of_size(rest, size - k) {
            if k > 0 {
                m.insert(x.clone(), k).unwrap();
            }
            out.push(m);
        }
    }
    out
}

fn skeleton(m: &NestedMarking) -> Sk {
    let mut s = Multiset::new();
    for (a, n) in m.iter() {
        s.insert((a.place.clone(), a.net.clone()), n).unwrap();
    }
    s
}

fn kind_tokens(m: &NestedMarking) -> BTreeMap<KindName, Multiset<ObjPlaceId>> {
    let mut out: BTreeMap<KindName, Multiset<ObjPlaceId>> = BTreeMap::new();
    for (a, n) in m.iter() {
        let e = out.entry(a.net.kind_name().clone()).or_default();
        for _ in 0..n {
            *e = e.checked_add(&a.marking).unwrap();
        }
    }
    out
}

fn theta_totals(
    theta: &BTreeMap<NetRef, Multiset<ObjTransId>>,
) -> BTreeMap<KindName, (Multiset<ObjPlaceId>, Multiset<ObjPlaceId>)> {
    let mut out: BTreeMap<KindName, (Multiset<ObjPlaceId>, Multiset<ObjPlaceId>)> = BTreeMap::new();
    for (net, ts) in theta {
        let e = out.entry(net.kind_name().clone()).or_default();
        for (t, n) in ts.iter() {
            let tr = net.transition(t).unwrap();
            for _ in 0..n {
                e.0 = e.0.checked_add(&tr.pre).unwrap();
                e.1 = e.1.checked_add(&tr.post).unwrap();
            }
        }
    }
    out
}

/// All four conjuncts, written out directly.
fn phi(
    pre: &Sk,
    post: &Sk,
    theta: &BTreeMap<NetRef, Multiset<ObjTransId>>,
    lambda: &NestedMarking,
    rho: &NestedMarking,
) -> bool {
    if skeleton(lambda) != *pre || skeleton(rho) != *post {
        return false;
    }
    let tt = theta_totals(theta);
    let lk = kind_tokens(lambda);
    let rk = kind_tokens(rho);
    let kinds: BTreeSet<&KindName> = tt.keys().chain(lk.keys()).chain(rk.keys()).collect();
    let empty = Multiset::new();
    for k in kinds {
        let (tp, tq) = tt.get(k).map(|(a, b)| (a, b)).unwrap_or((&empty, &empty));
        let l = lk.get(k).unwrap_or(&empty);
        let r = rk.get(k).unwrap_or(&empty);
        if !tp.leq(l) {
            return false;
        }
        if *r != l.sub(tp).checked_add(tq).unwrap() {
            return false;
        }
    }
    true
}

/// Output markings with skeleton `post`, object markings over each net's own
/// places, and `total` object tokens per kind.
fn rho_candidates(post: &Sk, total: &BTreeMap<KindName, u64>) -> Vec<NestedMarking> {
    let slots: Vec<(PlaceId, NetRef)> = post.expanded().cloned().collect();
    let mut out = Vec::new();
    fn rec(
        slots: &[(PlaceId, NetRef)],
        left: &BTreeMap<KindName, u64>,
        acc: &mut Vec<Addend>,
        out: &mut Vec<NestedMarking>,
    ) {
        let Some(((p, n), rest)) = slots.split_first() else {
            if left.values().all(|v| *v == 0) {
                out.push(NestedMarking::from_addends(acc.clone()).unwrap());
            }
            return;
        };
        let k = n.kind_name();
        let avail = *left.get(k).unwrap_or(&0);
        let places: Vec<ObjPlaceId> = n.places().iter().cloned().collect();
        for s in 0..=avail {
            for m in of_size(&places, s) {
                let mut l = left.clone();
                l.insert(k.clone(), avail - s);
                acc.push(Addend::new(p.clone(), n.clone(), m));
                rec(rest, &l, acc, out);
                acc.pop();
            }
        }
    }
    rec(&slots, total, &mut Vec::new(), &mut out);
    out
}

fn eval_side<'a>(arcs: impl Iterator<Item = (&'a PlaceId, &'a NetTerm)>, alpha: &Binding) -> Option<Sk> {
    let mut s = Multiset::new();
    for (p, e) in arcs {
        s.insert((p.clone(), e.eval(alpha).ok()?), 1).unwrap();
    }
    Some(s)
}

/// Enabled events with their modes, found by filtering candidate modes
/// through the enabling predicate.
pub fn oracle(sys: &SystemNet, mu: &NestedMarking) -> BTreeMap<Event, BTreeSet<Mode>> {
    let items: Vec<(Addend, u64)> = mu.iter().map(|(a, n)| (a.clone(), n)).collect();
    let subs: Vec<NestedMarking> = all_sub(&items).into_iter().map(NestedMarking::from_multiset).collect();
    let nets: BTreeSet<NetRef> = mu.iter().map(|(a, _)| a.net.clone()).collect();
    let mut out: BTreeMap<Event, BTreeSet<Mode>> = BTreeMap::new();

    for (t, tr) in sys.transitions() {
        let vars: Vec<Var> = tr.input_vars().into_iter().collect();
        let cand: Vec<NetRef> = nets.iter().cloned().collect();
        let mut assignments: Vec<Binding> = vec![Binding::new()];
        for v in &vars {
            let mut next = Vec::new();
            for a in &assignments {
                for n in cand.iter().filter(|n| *n.kind_name() == v.kind) {
                    next.push(a.clone().with(v.name.clone(), n.clone()));
                }
            }
            assignments = next;
        }
        for alpha in assignments {
            let (Some(pre), Some(post)) = (eval_side(tr.inputs(), &alpha), eval_side(tr.outputs(), &alpha)) else {
                continue;
            };
            match tr.guard.eval(&alpha) {
                Ok(true) => {}
                _ => continue,
            }
            let mut demand: BTreeMap<NetRef, Multiset<Channel>> = BTreeMap::new();
            let mut bad = false;
            for (e, c) in &tr.sync {
                match e.eval(&alpha) {
                    Ok(n) => demand.entry(n).or_default().insert(c.clone(), 1).unwrap(),
                    Err(_) => bad = true,
                }
            }
            if bad {
                continue;
            }
            let mut thetas: Vec<BTreeMap<NetRef, Multiset<ObjTransId>>> = vec![BTreeMap::new()];
            for (n, d) in &demand {
                let ts: Vec<ObjTransId> = n.transitions().keys().cloned().collect();
                let options: Vec<Multiset<ObjTransId>> = of_size(&ts, d.len())
                    .into_iter()
                    .filter(|m| {
                        let mut labels = Multiset::new();
                        for (t, k) in m.iter() {
                            match &n.transition(t).unwrap().label {
                                Some(c) => labels.insert(c.clone(), k).unwrap(),
                                None => return false,
                            }
                        }
                        labels == *d
                    })
                    .collect();
                let mut next = Vec::new();
                for th in &thetas {
                    for o in &options {
                        let mut th = th.clone();
                        th.insert(n.clone(), o.clone());
                        next.push(th);
                    }
                }
                thetas = next;
            }
            for theta in thetas {
                let tt = theta_totals(&theta);
                let mut modes = BTreeSet::new();
                for lambda in subs.iter().filter(|l| skeleton(l) == pre) {
                    let lk = kind_tokens(lambda);
                    let mut total = BTreeMap::new();
                    let kinds: BTreeSet<&KindName> = tt.keys().chain(lk.keys()).collect();
                    let mut ok = true;
                    for k in kinds {
                        let l = lk.get(k).map(|m| m.len()).unwrap_or(0);
                        let (p, q) = tt.get(k).map(|(a, b)| (a.len(), b.len())).unwrap_or((0, 0));
                        if p > l {
                            ok = false;
                        } else {
                            total.insert(k.clone(), l - p + q);
                        }
                    }
                    if !ok {
                        continue;
                    }
                    for rho in rho_candidates(&post, &total) {
                        if phi(&pre, &post, &theta, lambda, &rho) {
                            modes.insert(Mode {
                                lambda: lambda.clone(),
                                rho,
                            });
                        }
                    }
                }
                if !modes.is_empty() {
                    let ev = Event::Sync {
                        transition: t.clone(),
                        binding: alpha.clone(),
                        theta,
                    };
                    out.insert(ev, modes);
                }
            }
        }
    }

    for (a, _) in mu.iter() {
        for (t, otr) in a.net.transitions() {
            if otr.label.is_some() {
                continue;
            }
            let sk = Multiset::singleton((a.place.clone(), a.net.clone()));
            let theta = BTreeMap::from([(a.net.clone(), Multiset::singleton(t.clone()))]);
            let mut modes = BTreeSet::new();
            for lambda in subs.iter().filter(|l| skeleton(l) == sk) {
                let l = lambda.len_tokens();
                let total = BTreeMap::from([(
                    a.net.kind_name().clone(),
                    (l + otr.post.len()).saturating_sub(otr.pre.len()),
                )]);
                if otr.pre.len() > l {
                    continue;
                }
                for rho in rho_candidates(&sk, &total) {
                    if phi(&sk, &sk, &theta, lambda, &rho) {
                        modes.insert(Mode {
                            lambda: lambda.clone(),
                            rho,
                        });
                    }
                }
            }
            if !modes.is_empty() {
                let ev = Event::ObjAutonomous {
                    place: a.place.clone(),
                    net: a.net.clone(),
                    transition: t.clone(),
                };
                out.insert(ev, modes);
            }
        }
    }
    out
}

trait Tokens {
    fn len_tokens(&self) -> u64;
}

impl Tokens for NestedMarking {
    fn len_tokens(&self) -> u64 {
        self.iter().map(|(a, n)| a.marking.len() * n).sum()
    }
}

/// The engine's answer in the oracle's shape.
pub fn engine_view(sys: &SystemNet, mu: &NestedMarking) -> BTreeMap<Event, BTreeSet<Mode>> {
    hornet_core::engine::enabled_events(sys, mu, &Default::default())
        .unwrap()
        .into_iter()
        .map(|e| (e.event, e.modes.into_iter().collect()))
        .collect()
}
