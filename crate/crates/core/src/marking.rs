//! Nested markings and their projections.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::ids::{KindName, ObjPlaceId, PlaceId};
use crate::multiset::{CountOverflow, Multiset};
use crate::object_net::NetRef;

/// One net-token `p[N, M]`.
///
/// Ordering is by system place, then net digest, then object marking, which
/// gives the canonical addend order of a [`NestedMarking`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addend {
    pub place: PlaceId,
    pub net: NetRef,
    pub marking: Multiset<ObjPlaceId>,
}

impl Addend {
    pub fn new(place: impl Into<PlaceId>, net: NetRef, marking: Multiset<ObjPlaceId>) -> Self {
        Self {
            place: place.into(),
            net,
            marking,
        }
    }
}

impl fmt::Display for Addend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}, {}]", self.place, self.net.display(), self.marking)
    }
}

impl fmt::Debug for Addend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A nested multiset `Σ p_i[N_i, M_i]`, the global state.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NestedMarking {
    addends: Multiset<Addend>,
}

impl NestedMarking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_addends<I: IntoIterator<Item = Addend>>(items: I) -> Result<Self, CountOverflow> {
        Ok(Self {
            addends: Multiset::from_items(items)?,
        })
    }

    pub fn from_multiset(addends: Multiset<Addend>) -> Self {
        Self { addends }
    }

    pub fn addends(&self) -> &Multiset<Addend> {
        &self.addends
    }

    pub fn is_empty(&self) -> bool {
        self.addends.is_empty()
    }

    /// Number of net-tokens.
    pub fn len(&self) -> u64 {
        self.addends.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Addend, u64)> + '_ {
        self.addends.iter()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CountOverflow> {
        Ok(Self {
            addends: self.addends.checked_add(&other.addends)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            addends: self.addends.sub(&other.addends),
        }
    }

    /// `self ⊑ other`.
    pub fn leq(&self, other: &Self) -> bool {
        self.addends.leq(&other.addends)
    }

    /// `Π¹_N`: the system places holding net-tokens of `net`.
    pub fn proj1(&self, net: &NetRef) -> Multiset<PlaceId> {
        let mut out = Multiset::new();
        for (a, n) in self.addends.iter() {
            if a.net == *net {
                out.insert(a.place.clone(), n).expect("bounded by marking");
            }
        }
        out
    }

    /// `Π²_N`: the sum of markings of all net-tokens of `net`.
    pub fn proj2_net(&self, net: &NetRef) -> Result<Multiset<ObjPlaceId>, CountOverflow> {
        let mut out = Multiset::new();
        for (a, n) in self.addends.iter() {
            if a.net == *net {
                out = out.checked_add(&a.marking.scale(n)?)?;
            }
        }
        Ok(out)
    }

    /// `Π²_k`: the sum of markings of all net-tokens of kind `kind`.
    pub fn proj2_kind(&self, kind: &KindName) -> Result<Multiset<ObjPlaceId>, CountOverflow> {
        let mut out = Multiset::new();
        for (a, n) in self.addends.iter() {
            if a.net.kind_name() == kind {
                out = out.checked_add(&a.marking.scale(n)?)?;
            }
        }
        Ok(out)
    }

    /// The multiset of `(place, net)` pairs, forgetting object markings.
    pub fn skeleton(&self) -> Multiset<(PlaceId, NetRef)> {
        self.addends
            .map(|a| (a.place.clone(), a.net.clone()))
            .expect("bounded by marking")
    }

    /// Deterministic text encoding of the canonical form. Nets appear by
    /// their structural digest, so equal markings encode identically.
    pub fn canonical_encoding(&self) -> String {
        let mut out = String::new();
        for (a, n) in self.addends.iter() {
            out.push_str(&format!(
                "{n}*{}:{}[{}",
                a.place.as_str().len(),
                a.place,
                a.net.digest_hex()
            ));
            for (p, c) in a.marking.iter() {
                out.push_str(&format!(",{}:{}*{c}", p.as_str().len(), p));
            }
            out.push_str("]\n");
        }
        out
    }

    /// Like the `Display` form but naming each net through `name_of`.
    pub fn render(&self, name_of: &dyn Fn(&NetRef) -> String) -> String {
        if self.addends.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .addends
            .iter()
            .map(|(a, n)| {
                let mult = if n > 1 { format!("{n}*") } else { String::new() };
                format!("{mult}{}[{}, {}]", a.place, name_of(&a.net), a.marking)
            })
            .collect();
        parts.join(" + ")
    }

    /// SHA-256 over [`Self::canonical_encoding`].
    pub fn digest_hex(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_encoding().as_bytes()))
    }
}

impl fmt::Display for NestedMarking {
    /// `p[N1, v] + q[N2, s]`, or `0` for the empty marking.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.addends)
    }
}

impl fmt::Debug for NestedMarking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
