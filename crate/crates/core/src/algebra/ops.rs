//! Built-in interpretations of the workflow operators.
//!
//! Generated nodes are named from a hash of the (sorted) operand digests, so
//! composition is reproducible and commutative up to the rate pairing.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::ids::{ObjPlaceId, ObjTransId};
use crate::multiset::Multiset;
use crate::object_net::{ObjTransition, ObjectNet, Origin};
use crate::rate::{format_rational, Rate, Rational};

use super::AlgebraError;

fn tag(op: &str, a: &ObjectNet, b: &ObjectNet) -> String {
    let (lo, hi) = if a.digest() <= b.digest() { (a, b) } else { (b, a) };
    let mut h = Sha256::new();
    h.update(op.as_bytes());
    h.update(lo.digest());
    h.update(hi.digest());
    hex::encode(h.finalize())[..8].to_string()
}

fn same_kind(a: &ObjectNet, b: &ObjectNet) -> Result<(), AlgebraError> {
    if a.kind_name() != b.kind_name() {
        return Err(AlgebraError::KindMismatch {
            expected: a.kind_name().clone(),
            found: b.kind_name().clone(),
        });
    }
    Ok(())
}

/// Unique source and sink place of a workflow net.
fn workflow_ends(n: &ObjectNet) -> Result<(ObjPlaceId, ObjPlaceId), AlgebraError> {
    let src = n.source_places();
    let snk = n.sink_places();
    match (src.as_slice(), snk.as_slice()) {
        ([i], [f]) if i != f => Ok(((*i).clone(), (*f).clone())),
        _ => Err(AlgebraError::NotWorkflow(n.display().to_string())),
    }
}

fn disjoint(a: &ObjectNet, b: &ObjectNet) -> Result<(), AlgebraError> {
    if let Some(p) = a.places().intersection(b.places()).next() {
        return Err(AlgebraError::Overlap(p.to_string()));
    }
    if let Some(t) = a.transitions().keys().find(|t| b.has_transition(t)) {
        return Err(AlgebraError::Overlap(t.to_string()));
    }
    Ok(())
}

fn ensure_fresh(
    a: &ObjectNet,
    b: &ObjectNet,
    places: &[&ObjPlaceId],
    trans: &[&ObjTransId],
) -> Result<(), AlgebraError> {
    for p in places {
        if a.places().contains(*p) || b.places().contains(*p) {
            return Err(AlgebraError::Overlap(p.to_string()));
        }
    }
    for t in trans {
        if a.has_transition(t) || b.has_transition(t) {
            return Err(AlgebraError::Overlap(t.to_string()));
        }
    }
    Ok(())
}

fn ms(places: &[&ObjPlaceId]) -> Multiset<ObjPlaceId> {
    Multiset::from_items(places.iter().map(|p| (*p).clone())).expect("small")
}

/// AND composition: a fresh initial place forks into both operands' initial
/// places and a join collects both final places into a fresh final place.
pub fn parallel(a: &ObjectNet, b: &ObjectNet) -> Result<ObjectNet, AlgebraError> {
    same_kind(a, b)?;
    let (ia, fa) = workflow_ends(a)?;
    let (ib, fb) = workflow_ends(b)?;
    disjoint(a, b)?;
    let h = tag("par", a, b);
    let i = ObjPlaceId::new(format!("par_i_{h}"));
    let f = ObjPlaceId::new(format!("par_f_{h}"));
    let fork = ObjTransId::new(format!("par_fork_{h}"));
    let join = ObjTransId::new(format!("par_join_{h}"));
    ensure_fresh(a, b, &[&i, &f], &[&fork, &join])?;

    let mut b_ = ObjectNet::builder(a.kind().clone()).origin(Origin::Parallel(
        Arc::new(a.origin().clone()),
        Arc::new(b.origin().clone()),
    ));
    for n in [a, b] {
        for p in n.places() {
            b_ = b_.place(p.clone());
        }
        for (t, tr) in n.transitions() {
            b_ = b_.transition(t.clone(), tr.clone());
        }
    }
    b_ = b_
        .transition(
            fork,
            ObjTransition {
                pre: ms(&[&i]),
                post: ms(&[&ia, &ib]),
                rate: Rate::one(),
                label: None,
            },
        )
        .transition(
            join,
            ObjTransition {
                pre: ms(&[&fa, &fb]),
                post: ms(&[&f]),
                rate: Rate::one(),
                label: None,
            },
        );
    Ok(b_.build()?)
}

/// Rated XOR choice. Both operands share a fresh initial and final place.
///
/// An operand with a single entry transition has its initial place fused
/// with the choice place and that transition becomes the branch entry.
/// Otherwise a fresh entry transition leads from the choice place to the
/// operand's initial place. The branch entries carry `ra` and `rb`.
pub fn xor(a: &ObjectNet, b: &ObjectNet, ra: &Rate, rb: &Rate) -> Result<ObjectNet, AlgebraError> {
    same_kind(a, b)?;
    let ends_a = workflow_ends(a)?;
    let ends_b = workflow_ends(b)?;
    disjoint(a, b)?;
    let h = tag("xor", a, b);
    let i = ObjPlaceId::new(format!("xor_i_{h}"));
    let f = ObjPlaceId::new(format!("xor_f_{h}"));
    ensure_fresh(a, b, &[&i, &f], &[])?;

    let mut places = BTreeSet::from([i.clone(), f.clone()]);
    let mut transitions: BTreeMap<ObjTransId, ObjTransition> = BTreeMap::new();
    let mut entries = Vec::new();
    for (n, (src, snk), rate) in [(a, ends_a, ra), (b, ends_b, rb)] {
        let entry_ts: Vec<&ObjTransId> = n
            .transitions()
            .iter()
            .filter(|(_, tr)| tr.pre.count(&src) > 0)
            .map(|(t, _)| t)
            .collect();
        let fuse_src = entry_ts.len() == 1;
        let rename = |p: &ObjPlaceId| -> ObjPlaceId {
            if *p == snk {
                f.clone()
            } else if fuse_src && *p == src {
                i.clone()
            } else {
                p.clone()
            }
        };
        for p in n.places() {
            places.insert(rename(p));
        }
        for (t, tr) in n.transitions() {
            transitions.insert(
                t.clone(),
                ObjTransition {
                    pre: tr.pre.map(rename)?,
                    post: tr.post.map(rename)?,
                    rate: tr.rate.clone(),
                    label: tr.label.clone(),
                },
            );
        }
        let entry = if fuse_src {
            entry_ts[0].clone()
        } else {
            let e = ObjTransId::new(format!("xor_e_{h}_{}", &n.digest_hex()[..8]));
            if transitions.contains_key(&e) || a.has_transition(&e) || b.has_transition(&e) {
                return Err(AlgebraError::Overlap(e.to_string()));
            }
            transitions.insert(
                e.clone(),
                ObjTransition {
                    pre: ms(&[&i]),
                    post: ms(&[&src]),
                    rate: rate.clone(),
                    label: None,
                },
            );
            e
        };
        transitions.get_mut(&entry).expect("entry exists").rate = rate.clone();
        entries.push(entry);
    }
    let origin = Origin::Xor {
        left: Arc::new(a.origin().clone()),
        right: Arc::new(b.origin().clone()),
        left_entry: entries[0].clone(),
        right_entry: entries[1].clone(),
    };
    Ok(a.rebuild(places, transitions, origin)?)
}

/// Adds `delta` to the rate of `t`.
pub fn update_rate(a: &ObjectNet, t: &ObjTransId, delta: &Rational) -> Result<ObjectNet, AlgebraError> {
    let tr = a
        .transition(t)
        .ok_or_else(|| AlgebraError::UnknownTransition(t.clone()))?;
    let rate = tr.rate.checked_add(delta).map_err(|_| AlgebraError::NonPositiveRate {
        transition: t.clone(),
        rate: format_rational(&(tr.rate.value() + delta)),
    })?;
    let mut transitions = a.transitions().clone();
    transitions.get_mut(t).expect("checked above").rate = rate;
    let origin = match a.origin() {
        o if o.is_xor_entry(t) => o.clone(),
        Origin::Rated { base, shown } => {
            let mut shown = shown.clone();
            shown.insert(t.clone());
            Origin::Rated {
                base: base.clone(),
                shown,
            }
        }
        o => Origin::Rated {
            base: Arc::new(o.clone()),
            shown: BTreeSet::from([t.clone()]),
        },
    };
    Ok(a.rebuild(a.places().clone(), transitions, origin)?)
}

/// Removes the branches competing with `keep` for its choice place, along
/// with every place and transition that only those branches could reach.
pub fn fix_choice(a: &ObjectNet, keep: &ObjTransId) -> Result<ObjectNet, AlgebraError> {
    let no_block = || AlgebraError::NoXorBlock(keep.clone());
    let tr = a
        .transition(keep)
        .ok_or_else(|| AlgebraError::UnknownTransition(keep.clone()))?;
    let choice = match tr.pre.support().collect::<Vec<_>>().as_slice() {
        [p] => (*p).clone(),
        _ => return Err(no_block()),
    };
    let mut removed: BTreeSet<ObjTransId> = a
        .transitions()
        .iter()
        .filter(|(t, tr)| *t != keep && tr.pre.count(&choice) > 0)
        .map(|(t, _)| t.clone())
        .collect();
    if removed.is_empty() {
        return Err(no_block());
    }
    let mut dropped_places: BTreeSet<ObjPlaceId> = BTreeSet::new();
    loop {
        let mut changed = false;
        for p in a.places() {
            if *p == choice || dropped_places.contains(p) {
                continue;
            }
            let mut producers = a.transitions().iter().filter(|(_, tr)| tr.post.count(p) > 0).peekable();
            if producers.peek().is_some() && producers.all(|(t, _)| removed.contains(t)) {
                dropped_places.insert(p.clone());
                changed = true;
            }
        }
        for (t, tr) in a.transitions() {
            if !removed.contains(t) && tr.pre.support().any(|p| dropped_places.contains(p)) {
                removed.insert(t.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let places = a
        .places()
        .iter()
        .filter(|p| !dropped_places.contains(*p))
        .cloned()
        .collect();
    let transitions = a
        .transitions()
        .iter()
        .filter(|(t, _)| !removed.contains(*t))
        .map(|(t, tr)| (t.clone(), tr.clone()))
        .collect();
    let origin = a.origin().collapse_xor(keep).unwrap_or_else(|| Origin::Apply {
        op: Arc::from("fixChoice"),
        args: vec![a.display().to_string(), keep.to_string()],
    });
    Ok(a.rebuild(places, transitions, origin)?)
}
