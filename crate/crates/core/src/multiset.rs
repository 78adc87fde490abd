//! Finite multisets in canonical sparse form.

use std::collections::btree_map;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A multiplicity exceeded `u64::MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("multiset count overflow")]
pub struct CountOverflow;

/// A finite multiset. Entries with count zero are never stored, so two
/// multisets are equal exactly when their entry maps are equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset<T: Ord> {
    entries: BTreeMap<T, u64>,
}

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: Ord + Clone> Multiset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(x: T) -> Self {
        Self::with_count(x, 1)
    }

    pub fn with_count(x: T, n: u64) -> Self {
        let mut m = Self::new();
        if n > 0 {
            m.entries.insert(x, n);
        }
        m
    }

    /// Builds a multiset counting every item of `items`.
    pub fn from_items<I: IntoIterator<Item = T>>(items: I) -> Result<Self, CountOverflow> {
        let mut m = Self::new();
        for x in items {
            m.insert(x, 1)?;
        }
        Ok(m)
    }

    pub fn from_counts<I: IntoIterator<Item = (T, u64)>>(items: I) -> Result<Self, CountOverflow> {
        let mut m = Self::new();
        for (x, n) in items {
            m.insert(x, n)?;
        }
        Ok(m)
    }

    pub fn count(&self, x: &T) -> u64 {
        self.entries.get(x).copied().unwrap_or(0)
    }

    /// Cardinality `|m|`, the sum of all counts.
    pub fn len(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct elements.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, u64)> + '_ {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    /// Elements with positive count, in ascending order.
    pub fn support(&self) -> impl Iterator<Item = &T> + '_ {
        self.entries.keys()
    }

    /// Every element repeated by its multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = &T> + '_ {
        self.entries
            .iter()
            .flat_map(|(k, &n)| std::iter::repeat_n(k, n as usize))
    }

    pub fn insert(&mut self, x: T, n: u64) -> Result<(), CountOverflow> {
        if n == 0 {
            return Ok(());
        }
        match self.entries.entry(x) {
            btree_map::Entry::Vacant(e) => {
                e.insert(n);
            }
            btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() = e.get().checked_add(n).ok_or(CountOverflow)?;
            }
        }
        Ok(())
    }

    /// Removes up to `n` copies of `x`, returning how many were removed.
    pub fn remove(&mut self, x: &T, n: u64) -> u64 {
        let Some(c) = self.entries.get_mut(x) else {
            return 0;
        };
        let taken = n.min(*c);
        *c -= taken;
        if *c == 0 {
            self.entries.remove(x);
        }
        taken
    }

    /// Component-wise sum.
    pub fn checked_add(&self, other: &Self) -> Result<Self, CountOverflow> {
        let mut out = self.clone();
        for (x, n) in other.iter() {
            out.insert(x.clone(), n)?;
        }
        Ok(out)
    }

    /// Truncated difference: `(a - b)(d) = max(a(d) - b(d), 0)`.
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, n) in other.iter() {
            out.remove(x, n);
        }
        out
    }

    /// `self ⊑ other`, i.e. `self(d) <= other(d)` for every `d`.
    pub fn leq(&self, other: &Self) -> bool {
        self.iter().all(|(x, n)| other.count(x) >= n)
    }

    /// Multiplies every count by `k`.
    pub fn scale(&self, k: u64) -> Result<Self, CountOverflow> {
        let mut out = Self::new();
        for (x, n) in self.iter() {
            out.insert(x.clone(), n.checked_mul(k).ok_or(CountOverflow)?)?;
        }
        Ok(out)
    }

    /// Applies `f` element-wise, summing collisions (the homomorphic extension `f♯`).
    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Result<Multiset<U>, CountOverflow> {
        let mut out = Multiset::new();
        for (x, n) in self.iter() {
            out.insert(f(x), n)?;
        }
        Ok(out)
    }

    /// Keeps only the elements satisfying `pred`.
    pub fn filter(&self, mut pred: impl FnMut(&T) -> bool) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| pred(k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }
}

impl<T: Ord + fmt::Display> fmt::Display for Multiset<T> {
    /// Formal-sum notation: `s + 2*v`, or `0` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("0");
        }
        for (i, (x, n)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if *n == 1 {
                write!(f, "{x}")?;
            } else {
                write!(f, "{n}*{x}")?;
            }
        }
        Ok(())
    }
}

impl<T: Ord + fmt::Debug> fmt::Debug for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// All sub-multisets of `m` with exactly `size` elements, in ascending order.
pub fn sub_multisets_of_size<T: Ord + Clone>(m: &Multiset<T>, size: u64) -> Vec<Multiset<T>> {
    let items: Vec<(T, u64)> = m.iter().map(|(x, n)| (x.clone(), n)).collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(items.len());
    fn rec<T: Ord + Clone>(
        items: &[(T, u64)],
        idx: usize,
        left: u64,
        current: &mut Vec<(T, u64)>,
        out: &mut Vec<Multiset<T>>,
    ) {
        if left == 0 {
            let mut m = Multiset::new();
            for (x, n) in current.iter() {
                m.insert(x.clone(), *n).expect("bounded by source multiset");
            }
            out.push(m);
            return;
        }
        if idx == items.len() {
            return;
        }
        let remaining: u64 = items[idx..].iter().map(|(_, n)| n).sum();
        if remaining < left {
            return;
        }
        let (x, avail) = &items[idx];
        for take in (0..=left.min(*avail)).rev() {
            if take > 0 {
                current.push((x.clone(), take));
            }
            rec(items, idx + 1, left - take, current, out);
            if take > 0 {
                current.pop();
            }
        }
    }
    rec(&items, 0, size, &mut current, &mut out);
    out.sort();
    out
}

/// All multisets of exactly `size` elements drawn (with repetition) from `elems`.
pub fn multisets_over<T: Ord + Clone>(elems: &[T], size: u64) -> Vec<Multiset<T>> {
    let mut out = Vec::new();
    fn rec<T: Ord + Clone>(elems: &[T], idx: usize, left: u64, acc: &mut Multiset<T>, out: &mut Vec<Multiset<T>>) {
        if left == 0 {
            out.push(acc.clone());
            return;
        }
        if idx == elems.len() {
            return;
        }
        for take in (0..=left).rev() {
            if idx + 1 == elems.len() && take != left {
                continue;
            }
            acc.insert(elems[idx].clone(), take).expect("small counts");
            rec(elems, idx + 1, left - take, acc, out);
            acc.remove(&elems[idx], take);
        }
    }
    let mut acc = Multiset::new();
    rec(elems, 0, size, &mut acc, &mut out);
    out.sort();
    out.dedup();
    out
}
