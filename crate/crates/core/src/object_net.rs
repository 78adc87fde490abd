//! Object nets: p/t nets carrying a per-transition rate and channel label.
//!
//! An object net's identity is structural. Two nets are equal when their kind,
//! places, arcs, rates and labels coincide, regardless of insertion order or
//! how they were derived. The identity is a SHA-256 digest over the
//! canonical encoding returned by [`ObjectNet::canonical_encoding`]:
//!
//! ```text
//! kind <len>:<name>
//! place <len>:<name>                      (one line per place, ascending)
//! trans <len>:<name> pre <ms> post <ms> rate <n>/<d> label <len>:<chan>|-
//! ```
//!
//! where `<ms>` lists `<len>:<place>*<count>` entries separated by `,`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ids::{Channel, KindName, ObjPlaceId, ObjTransId};
use crate::multiset::{CountOverflow, Multiset};
use crate::rate::Rate;

/// A net type with its finite place universe.
///
/// The universe consists of the declared places plus `fresh` further slots
/// that operators may occupy with generated place names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kind {
    pub name: KindName,
    pub places: BTreeSet<ObjPlaceId>,
    pub fresh: usize,
    pub channels: BTreeSet<Channel>,
}

impl Kind {
    pub fn new(
        name: impl Into<KindName>,
        places: impl IntoIterator<Item = ObjPlaceId>,
        fresh: usize,
        channels: impl IntoIterator<Item = Channel>,
    ) -> Self {
        Self {
            name: name.into(),
            places: places.into_iter().collect(),
            fresh,
            channels: channels.into_iter().collect(),
        }
    }

    /// `|P_k|`: declared places plus fresh slots.
    pub fn universe_size(&self) -> usize {
        self.places.len() + self.fresh
    }

    /// Whether a net using `places` fits in this universe.
    pub fn admits<'a>(&self, places: impl IntoIterator<Item = &'a ObjPlaceId>) -> bool {
        places.into_iter().filter(|p| !self.places.contains(*p)).count() <= self.fresh
    }
}

/// Upper bound `2^(2^(4|P_k|))` on the number of distinct nets of a kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseBound {
    universe_size: usize,
}

impl UniverseBound {
    /// Values whose binary length exceeds this are not materialised.
    pub const MAX_MATERIALISED_BITS: u64 = 1 << 24;

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    /// The exponent `2^(4|P_k|)`.
    pub fn exponent(&self) -> BigUint {
        BigUint::one() << (4 * self.universe_size)
    }

    /// The bound as an exact integer, or `None` if it has more than
    /// [`Self::MAX_MATERIALISED_BITS`] bits.
    pub fn value(&self) -> Option<BigUint> {
        let shift = 4u64.checked_mul(self.universe_size as u64)?;
        if shift >= 63 || (1u64 << shift) > Self::MAX_MATERIALISED_BITS {
            return None;
        }
        Some(BigUint::one() << (1u64 << shift))
    }
}

impl fmt::Display for UniverseBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) if v.bits() <= 64 => write!(f, "{v}"),
            _ => write!(f, "2^(2^{})", 4 * self.universe_size),
        }
    }
}

pub fn universe_bound(kind: &Kind) -> UniverseBound {
    UniverseBound {
        universe_size: kind.universe_size(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown object transition `{0}`")]
    UnknownTransition(ObjTransId),
    #[error("duplicate object transition `{0}`")]
    DuplicateTransition(ObjTransId),
    #[error("net uses {used} places outside the declared universe of kind `{kind}` (fresh capacity {fresh})")]
    UniverseOverflow { kind: KindName, used: usize, fresh: usize },
    #[error("channel `{channel}` is not declared for kind `{kind}`")]
    UnknownChannel { kind: KindName, channel: Channel },
    #[error(transparent)]
    Overflow(#[from] CountOverflow),
}

/// One transition of an object net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjTransition {
    pub pre: Multiset<ObjPlaceId>,
    pub post: Multiset<ObjPlaceId>,
    pub rate: Rate,
    /// `None` is the no-channel label: the transition fires autonomously.
    pub label: Option<Channel>,
}

/// How a net was obtained; used only for display, never for identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Name(Arc<str>),
    Parallel(Arc<Origin>, Arc<Origin>),
    /// XOR choice; rates are rendered from the current entry transitions.
    Xor {
        left: Arc<Origin>,
        right: Arc<Origin>,
        left_entry: ObjTransId,
        right_entry: ObjTransId,
    },
    Apply {
        op: Arc<str>,
        args: Vec<String>,
    },
    /// `base` with changed rates; the listed transitions render their
    /// current rate, e.g. `N1{c=2}`.
    Rated {
        base: Arc<Origin>,
        shown: BTreeSet<ObjTransId>,
    },
}

impl Origin {
    pub fn name(name: impl AsRef<str>) -> Self {
        Origin::Name(Arc::from(name.as_ref()))
    }

    /// Replaces the XOR node that has `keep` as an entry with the kept side.
    pub(crate) fn collapse_xor(&self, keep: &ObjTransId) -> Option<Origin> {
        match self {
            Origin::Name(_) | Origin::Apply { .. } => None,
            Origin::Rated { base, shown } => base.collapse_xor(keep).map(|b| Origin::Rated {
                base: Arc::new(b),
                shown: shown.clone(),
            }),
            Origin::Xor {
                left,
                right,
                left_entry,
                right_entry,
            } => {
                if left_entry == keep {
                    Some((**left).clone())
                } else if right_entry == keep {
                    Some((**right).clone())
                } else if let Some(l) = left.collapse_xor(keep) {
                    Some(Origin::Xor {
                        left: Arc::new(l),
                        right: right.clone(),
                        left_entry: left_entry.clone(),
                        right_entry: right_entry.clone(),
                    })
                } else {
                    right.collapse_xor(keep).map(|r| Origin::Xor {
                        left: left.clone(),
                        right: Arc::new(r),
                        left_entry: left_entry.clone(),
                        right_entry: right_entry.clone(),
                    })
                }
            }
            Origin::Parallel(a, b) => {
                if let Some(a2) = a.collapse_xor(keep) {
                    Some(Origin::Parallel(Arc::new(a2), b.clone()))
                } else {
                    b.collapse_xor(keep).map(|b2| Origin::Parallel(a.clone(), Arc::new(b2)))
                }
            }
        }
    }

    pub(crate) fn is_xor_entry(&self, t: &ObjTransId) -> bool {
        match self {
            Origin::Name(_) | Origin::Apply { .. } => false,
            Origin::Rated { base, .. } => base.is_xor_entry(t),
            Origin::Xor {
                left,
                right,
                left_entry,
                right_entry,
            } => left_entry == t || right_entry == t || left.is_xor_entry(t) || right.is_xor_entry(t),
            Origin::Parallel(a, b) => a.is_xor_entry(t) || b.is_xor_entry(t),
        }
    }

    fn render(&self, net: &ObjectNet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Name(n) => f.write_str(n),
            Origin::Parallel(a, b) => {
                f.write_str("(")?;
                a.render(net, f)?;
                f.write_str(" || ")?;
                b.render(net, f)?;
                f.write_str(")")
            }
            Origin::Xor {
                left,
                right,
                left_entry,
                right_entry,
            } => {
                let rate = |t: &ObjTransId| net.rate(t).map(|r| r.to_string()).unwrap_or_else(|| "?".into());
                f.write_str("(")?;
                left.render(net, f)?;
                write!(f, " XOR[{},{}] ", rate(left_entry), rate(right_entry))?;
                right.render(net, f)?;
                f.write_str(")")
            }
            Origin::Apply { op, args } => write!(f, "{op}({})", args.join(", ")),
            Origin::Rated { base, shown } => {
                base.render(net, f)?;
                f.write_str("{")?;
                for (i, t) in shown.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match net.rate(t) {
                        Some(r) => write!(f, "{t}={r}")?,
                        None => write!(f, "{t}=?")?,
                    }
                }
                f.write_str("}")
            }
        }
    }
}

/// A p/t net over its kind's place universe, with rates and labels.
#[derive(Clone)]
pub struct ObjectNet {
    kind: Arc<Kind>,
    places: BTreeSet<ObjPlaceId>,
    transitions: BTreeMap<ObjTransId, ObjTransition>,
    origin: Origin,
    digest: [u8; 32],
}

/// Shared handle to an object net; compares by structural identity.
pub type NetRef = Arc<ObjectNet>;

impl PartialEq for ObjectNet {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest
    }
}

impl Eq for ObjectNet {}

impl PartialOrd for ObjectNet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ObjectNet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.digest.cmp(&other.digest)
    }
}

impl Hash for ObjectNet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.digest.hash(state);
    }
}

impl fmt::Debug for ObjectNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObjectNet({} #{})", self.display(), &self.digest_hex()[..8])
    }
}

impl ObjectNet {
    pub fn builder(kind: Arc<Kind>) -> ObjectNetBuilder {
        ObjectNetBuilder {
            kind,
            places: BTreeSet::new(),
            transitions: BTreeMap::new(),
            origin: None,
            duplicate: None,
        }
    }

    pub fn kind(&self) -> &Arc<Kind> {
        &self.kind
    }

    pub fn kind_name(&self) -> &KindName {
        &self.kind.name
    }

    pub fn places(&self) -> &BTreeSet<ObjPlaceId> {
        &self.places
    }

    pub fn transitions(&self) -> &BTreeMap<ObjTransId, ObjTransition> {
        &self.transitions
    }

    pub fn transition(&self, t: &ObjTransId) -> Option<&ObjTransition> {
        self.transitions.get(t)
    }

    pub fn has_transition(&self, t: &ObjTransId) -> bool {
        self.transitions.contains_key(t)
    }

    pub fn rate(&self, t: &ObjTransId) -> Option<&Rate> {
        self.transitions.get(t).map(|tr| &tr.rate)
    }

    pub fn label(&self, t: &ObjTransId) -> Option<&Channel> {
        self.transitions.get(t).and_then(|tr| tr.label.as_ref())
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest)
    }

    /// Same net with a different display origin.
    pub fn with_origin(&self, origin: Origin) -> ObjectNet {
        ObjectNet { origin, ..self.clone() }
    }

    /// Human-readable rendering based on the net's origin.
    pub fn display(&self) -> impl fmt::Display + '_ {
        struct D<'a>(&'a ObjectNet);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.origin.render(self.0, f)
            }
        }
        D(self)
    }

    /// The canonical text encoding hashed into the digest.
    pub fn canonical_encoding(&self) -> String {
        encode(&self.kind.name, &self.places, &self.transitions)
    }

    /// `pre♯(tset)`: the multiset extension of the pre-condition.
    pub fn pre_of(&self, tset: &Multiset<ObjTransId>) -> Result<Multiset<ObjPlaceId>, NetError> {
        self.extend(tset, |tr| &tr.pre)
    }

    /// `post♯(tset)`.
    pub fn post_of(&self, tset: &Multiset<ObjTransId>) -> Result<Multiset<ObjPlaceId>, NetError> {
        self.extend(tset, |tr| &tr.post)
    }

    fn extend(
        &self,
        tset: &Multiset<ObjTransId>,
        side: impl Fn(&ObjTransition) -> &Multiset<ObjPlaceId>,
    ) -> Result<Multiset<ObjPlaceId>, NetError> {
        let mut acc = Multiset::new();
        for (t, n) in tset.iter() {
            let tr = self
                .transitions
                .get(t)
                .ok_or_else(|| NetError::UnknownTransition(t.clone()))?;
            acc = acc.checked_add(&side(tr).scale(n)?)?;
        }
        Ok(acc)
    }

    /// Whether `m` enables the multiset of transitions `tset` concurrently.
    pub fn enabled(&self, m: &Multiset<ObjPlaceId>, tset: &Multiset<ObjTransId>) -> Result<bool, NetError> {
        Ok(self.pre_of(tset)?.leq(m))
    }

    /// Tokens consumed and produced by firing `tset`.
    pub fn fire_effect(
        &self,
        tset: &Multiset<ObjTransId>,
    ) -> Result<(Multiset<ObjPlaceId>, Multiset<ObjPlaceId>), NetError> {
        Ok((self.pre_of(tset)?, self.post_of(tset)?))
    }

    /// Places never produced by any transition.
    pub fn source_places(&self) -> Vec<&ObjPlaceId> {
        self.places
            .iter()
            .filter(|p| self.transitions.values().all(|t| t.post.count(p) == 0))
            .collect()
    }

    /// Places never consumed by any transition.
    pub fn sink_places(&self) -> Vec<&ObjPlaceId> {
        self.places
            .iter()
            .filter(|p| self.transitions.values().all(|t| t.pre.count(p) == 0))
            .collect()
    }

    /// Rebuilds this net with modified parts, re-validating and re-hashing.
    pub(crate) fn rebuild(
        &self,
        places: BTreeSet<ObjPlaceId>,
        transitions: BTreeMap<ObjTransId, ObjTransition>,
        origin: Origin,
    ) -> Result<ObjectNet, NetError> {
        let mut b = ObjectNet::builder(self.kind.clone()).origin(origin);
        for p in places {
            b = b.place(p);
        }
        for (t, tr) in transitions {
            b = b.transition(t, tr);
        }
        b.build()
    }
}

fn push_name(out: &mut String, s: &str) {
    out.push_str(&s.len().to_string());
    out.push(':');
    out.push_str(s);
}

fn push_ms(out: &mut String, m: &Multiset<ObjPlaceId>) {
    for (i, (p, n)) in m.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_name(out, p.as_str());
        out.push('*');
        out.push_str(&n.to_string());
    }
}

fn encode(kind: &KindName, places: &BTreeSet<ObjPlaceId>, transitions: &BTreeMap<ObjTransId, ObjTransition>) -> String {
    let mut out = String::from("kind ");
    push_name(&mut out, kind.as_str());
    out.push('\n');
    for p in places {
        out.push_str("place ");
        push_name(&mut out, p.as_str());
        out.push('\n');
    }
    for (t, tr) in transitions {
        out.push_str("trans ");
        push_name(&mut out, t.as_str());
        out.push_str(" pre ");
        push_ms(&mut out, &tr.pre);
        out.push_str(" post ");
        push_ms(&mut out, &tr.post);
        out.push_str(&format!(
            " rate {}/{}",
            tr.rate.value().numer(),
            tr.rate.value().denom()
        ));
        out.push_str(" label ");
        match &tr.label {
            Some(c) => push_name(&mut out, c.as_str()),
            None => out.push('-'),
        }
        out.push('\n');
    }
    out
}

pub struct ObjectNetBuilder {
    kind: Arc<Kind>,
    places: BTreeSet<ObjPlaceId>,
    transitions: BTreeMap<ObjTransId, ObjTransition>,
    origin: Option<Origin>,
    duplicate: Option<ObjTransId>,
}

impl ObjectNetBuilder {
    pub fn place(mut self, p: impl Into<ObjPlaceId>) -> Self {
        self.places.insert(p.into());
        self
    }

    pub fn transition(mut self, t: impl Into<ObjTransId>, tr: ObjTransition) -> Self {
        let t = t.into();
        if self.transitions.insert(t.clone(), tr).is_some() {
            self.duplicate.get_or_insert(t);
        }
        self
    }

    /// Adds a transition with single-token arcs `pre -> post`.
    pub fn arc(self, t: &str, pre: &[&str], post: &[&str], rate: Rate, label: Option<&str>) -> Self {
        let ms = |xs: &[&str]| Multiset::from_items(xs.iter().map(ObjPlaceId::new)).expect("small");
        self.transition(
            t,
            ObjTransition {
                pre: ms(pre),
                post: ms(post),
                rate,
                label: label.map(Channel::new),
            },
        )
    }

    pub fn origin(mut self, origin: Origin) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn build(mut self) -> Result<ObjectNet, NetError> {
        if let Some(t) = self.duplicate {
            return Err(NetError::DuplicateTransition(t));
        }
        for tr in self.transitions.values() {
            for p in tr.pre.support().chain(tr.post.support()) {
                self.places.insert(p.clone());
            }
            if let Some(c) = &tr.label {
                if !self.kind.channels.contains(c) {
                    return Err(NetError::UnknownChannel {
                        kind: self.kind.name.clone(),
                        channel: c.clone(),
                    });
                }
            }
        }
        if !self.kind.admits(&self.places) {
            let used = self.places.iter().filter(|p| !self.kind.places.contains(*p)).count();
            return Err(NetError::UniverseOverflow {
                kind: self.kind.name.clone(),
                used,
                fresh: self.kind.fresh,
            });
        }
        let encoding = encode(&self.kind.name, &self.places, &self.transitions);
        let digest: [u8; 32] = Sha256::digest(encoding.as_bytes()).into();
        let origin = self
            .origin
            .unwrap_or_else(|| Origin::name(format!("net#{}", &hex::encode(digest)[..8])));
        Ok(ObjectNet {
            kind: self.kind,
            places: self.places,
            transitions: self.transitions,
            origin,
            digest,
        })
    }
}
