//! The system net: typed places and transitions inscribed with net terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{AlgebraError, Guard, NetTerm, Var};
use crate::ids::{Channel, KindName, PlaceId, TransitionId, VarName};
use crate::marking::NestedMarking;
use crate::object_net::Kind;
use crate::rate::Rate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("unknown kind `{0}`")]
    UnknownKind(KindName),
    #[error("duplicate kind `{0}`")]
    DuplicateKind(KindName),
    #[error("duplicate place `{0}`")]
    DuplicatePlace(PlaceId),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(TransitionId),
    #[error("transition `{transition}`: unknown place `{place}`")]
    UnknownPlace { transition: TransitionId, place: PlaceId },
    #[error("transition `{transition}`: inscription on `{place}` has kind `{found}`, place holds `{expected}`")]
    ArcKind {
        transition: TransitionId,
        place: PlaceId,
        expected: KindName,
        found: KindName,
    },
    #[error("transition `{transition}`: {source}")]
    Term {
        transition: TransitionId,
        #[source]
        source: AlgebraError,
    },
    #[error("transition `{transition}`: variable `{var}` is not bound by an input arc")]
    FreeVariable { transition: TransitionId, var: VarName },
    #[error("transition `{transition}`: variable `{var}` used with kinds `{a}` and `{b}`")]
    VariableKind {
        transition: TransitionId,
        var: VarName,
        a: KindName,
        b: KindName,
    },
    #[error("transition `{transition}`: channel `{channel}` not declared for kind `{kind}`")]
    UnknownChannel {
        transition: TransitionId,
        channel: Channel,
        kind: KindName,
    },
    #[error("marking: place `{0}` is not declared")]
    MarkingPlace(PlaceId),
    #[error("marking: net `{net}` on `{place}` has kind `{found}`, place holds `{expected}`")]
    MarkingKind {
        place: PlaceId,
        net: String,
        expected: KindName,
        found: KindName,
    },
    #[error("marking: `{place}` in net `{net}` is not a place of that net")]
    MarkingObjectPlace { net: String, place: String },
}

/// A system-net transition with its inscriptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SysTransition {
    /// Input inscriptions; each list is a multiset of terms.
    pub pre: BTreeMap<PlaceId, Vec<NetTerm>>,
    pub post: BTreeMap<PlaceId, Vec<NetTerm>>,
    pub guard: Guard,
    /// Synchronisation label `(e1,c1) + ... + (en,cn)`.
    pub sync: Vec<(NetTerm, Channel)>,
    pub rate: Rate,
}

impl SysTransition {
    pub fn new() -> Self {
        Self {
            pre: BTreeMap::new(),
            post: BTreeMap::new(),
            guard: Guard::True,
            sync: Vec::new(),
            rate: Rate::one(),
        }
    }

    pub fn input(mut self, place: impl Into<PlaceId>, term: NetTerm) -> Self {
        self.pre.entry(place.into()).or_default().push(term);
        self
    }

    pub fn output(mut self, place: impl Into<PlaceId>, term: NetTerm) -> Self {
        self.post.entry(place.into()).or_default().push(term);
        self
    }

    pub fn guard(mut self, guard: Guard) -> Self {
        self.guard = guard;
        self
    }

    pub fn sync(mut self, term: NetTerm, channel: impl Into<Channel>) -> Self {
        self.sync.push((term, channel.into()));
        self
    }

    pub fn rate(mut self, rate: Rate) -> Self {
        self.rate = rate;
        self
    }

    /// Input terms with multiplicity, in place order.
    pub fn inputs(&self) -> impl Iterator<Item = (&PlaceId, &NetTerm)> + '_ {
        self.pre.iter().flat_map(|(p, ts)| ts.iter().map(move |t| (p, t)))
    }

    pub fn outputs(&self) -> impl Iterator<Item = (&PlaceId, &NetTerm)> + '_ {
        self.post.iter().flat_map(|(p, ts)| ts.iter().map(move |t| (p, t)))
    }

    /// Variables of the input inscriptions.
    pub fn input_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (_, t) in self.inputs() {
            t.collect_vars(&mut out);
        }
        out
    }

    /// True when no object transition needs to synchronise.
    pub fn is_autonomous(&self) -> bool {
        self.sync.is_empty()
    }
}

impl Default for SysTransition {
    fn default() -> Self {
        Self::new()
    }
}

/// An algebraic system net over a fixed set of kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemNet {
    kinds: BTreeMap<KindName, Arc<Kind>>,
    places: BTreeMap<PlaceId, KindName>,
    transitions: BTreeMap<TransitionId, SysTransition>,
    pseudo_rate: Rate,
}

impl SystemNet {
    pub fn builder() -> SystemNetBuilder {
        SystemNetBuilder::default()
    }

    pub fn kinds(&self) -> &BTreeMap<KindName, Arc<Kind>> {
        &self.kinds
    }

    pub fn kind(&self, name: &KindName) -> Option<&Arc<Kind>> {
        self.kinds.get(name)
    }

    pub fn places(&self) -> &BTreeMap<PlaceId, KindName> {
        &self.places
    }

    pub fn place_kind(&self, p: &PlaceId) -> Option<&KindName> {
        self.places.get(p)
    }

    pub fn transitions(&self) -> &BTreeMap<TransitionId, SysTransition> {
        &self.transitions
    }

    pub fn transition(&self, t: &TransitionId) -> Option<&SysTransition> {
        self.transitions.get(t)
    }

    /// `Λ(τ)` used for object-autonomous pseudo transitions.
    pub fn pseudo_rate(&self) -> &Rate {
        &self.pseudo_rate
    }

    pub fn with_pseudo_rate(&self, rate: Rate) -> SystemNet {
        SystemNet {
            pseudo_rate: rate,
            ..self.clone()
        }
    }

    /// A copy with the given transition rates replaced.
    pub fn with_rates(&self, rates: &BTreeMap<TransitionId, Rate>) -> SystemNet {
        let mut out = self.clone();
        for (t, r) in rates {
            if let Some(tr) = out.transitions.get_mut(t) {
                tr.rate = r.clone();
            }
        }
        out
    }

    /// Checks that `mu` is well-typed for this net.
    pub fn check_marking(&self, mu: &NestedMarking) -> Result<(), SystemError> {
        for (a, _) in mu.iter() {
            let expected = self
                .places
                .get(&a.place)
                .ok_or_else(|| SystemError::MarkingPlace(a.place.clone()))?;
            if a.net.kind_name() != expected {
                return Err(SystemError::MarkingKind {
                    place: a.place.clone(),
                    net: a.net.display().to_string(),
                    expected: expected.clone(),
                    found: a.net.kind_name().clone(),
                });
            }
            if let Some(p) = a.marking.support().find(|p| !a.net.places().contains(*p)) {
                return Err(SystemError::MarkingObjectPlace {
                    net: a.net.display().to_string(),
                    place: p.to_string(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct SystemNetBuilder {
    kinds: BTreeMap<KindName, Arc<Kind>>,
    places: BTreeMap<PlaceId, KindName>,
    transitions: BTreeMap<TransitionId, SysTransition>,
    pseudo_rate: Option<Rate>,
    error: Option<SystemError>,
}

impl SystemNetBuilder {
    fn fail(&mut self, e: SystemError) {
        self.error.get_or_insert(e);
    }

    pub fn kind(mut self, kind: Arc<Kind>) -> Self {
        if self.kinds.insert(kind.name.clone(), kind.clone()).is_some() {
            self.fail(SystemError::DuplicateKind(kind.name.clone()));
        }
        self
    }

    pub fn place(mut self, p: impl Into<PlaceId>, kind: impl Into<KindName>) -> Self {
        let p = p.into();
        if self.places.insert(p.clone(), kind.into()).is_some() {
            self.fail(SystemError::DuplicatePlace(p));
        }
        self
    }

    pub fn transition(mut self, t: impl Into<TransitionId>, tr: SysTransition) -> Self {
        let t = t.into();
        if self.transitions.insert(t.clone(), tr).is_some() {
            self.fail(SystemError::DuplicateTransition(t));
        }
        self
    }

    pub fn pseudo_rate(mut self, rate: Rate) -> Self {
        self.pseudo_rate = Some(rate);
        self
    }

    pub fn build(self) -> Result<SystemNet, SystemError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        for k in self.places.values() {
            if !self.kinds.contains_key(k) {
                return Err(SystemError::UnknownKind(k.clone()));
            }
        }
        for (name, tr) in &self.transitions {
            check_transition(name, tr, &self.kinds, &self.places)?;
        }
        Ok(SystemNet {
            kinds: self.kinds,
            places: self.places,
            transitions: self.transitions,
            pseudo_rate: self.pseudo_rate.unwrap_or_else(Rate::one),
        })
    }
}

fn check_transition(
    name: &TransitionId,
    tr: &SysTransition,
    kinds: &BTreeMap<KindName, Arc<Kind>>,
    places: &BTreeMap<PlaceId, KindName>,
) -> Result<(), SystemError> {
    let term_err = |source| SystemError::Term {
        transition: name.clone(),
        source,
    };
    let mut var_kinds: BTreeMap<VarName, KindName> = BTreeMap::new();
    let mut record = |v: &Var| -> Result<(), SystemError> {
        if let Some(k) = var_kinds.get(&v.name) {
            if *k != v.kind {
                return Err(SystemError::VariableKind {
                    transition: name.clone(),
                    var: v.name.clone(),
                    a: k.clone(),
                    b: v.kind.clone(),
                });
            }
        }
        if !kinds.contains_key(&v.kind) {
            return Err(SystemError::UnknownKind(v.kind.clone()));
        }
        var_kinds.insert(v.name.clone(), v.kind.clone());
        Ok(())
    };
    let arcs = tr.inputs().chain(tr.outputs());
    for (p, term) in arcs {
        let expected = places.get(p).ok_or_else(|| SystemError::UnknownPlace {
            transition: name.clone(),
            place: p.clone(),
        })?;
        let found = term.kind().map_err(term_err)?;
        if &found != expected {
            return Err(SystemError::ArcKind {
                transition: name.clone(),
                place: p.clone(),
                expected: expected.clone(),
                found,
            });
        }
        for v in term.vars() {
            record(&v)?;
        }
    }
    for (term, c) in &tr.sync {
        let k = term.kind().map_err(term_err)?;
        for v in term.vars() {
            record(&v)?;
        }
        let kind = kinds.get(&k).ok_or_else(|| SystemError::UnknownKind(k.clone()))?;
        if !kind.channels.contains(c) {
            return Err(SystemError::UnknownChannel {
                transition: name.clone(),
                channel: c.clone(),
                kind: k,
            });
        }
    }
    let bound: BTreeSet<VarName> = tr.input_vars().into_iter().map(|v| v.name).collect();
    let mut used: BTreeSet<VarName> = tr.guard.vars();
    for (_, t) in tr.outputs() {
        used.extend(t.vars().into_iter().map(|v| v.name));
    }
    for (t, _) in &tr.sync {
        used.extend(t.vars().into_iter().map(|v| v.name));
    }
    if let Some(v) = used.difference(&bound).next() {
        return Err(SystemError::FreeVariable {
            transition: name.clone(),
            var: v.clone(),
        });
    }
    Ok(())
}

impl fmt::Display for SysTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |m: &BTreeMap<PlaceId, Vec<NetTerm>>| {
            m.iter()
                .map(|(p, ts)| {
                    let ts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                    format!("{p}: {}", ts.join(" + "))
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(
            f,
            "[{}] -> [{}] if {} rate {}",
            side(&self.pre),
            side(&self.post),
            self.guard,
            self.rate
        )
    }
}
