//! Poset containment and copy counting in set families.
//!
//! Containment is the weak (non-induced) notion: an injection `i: P -> F`
//! with `p <_P q  =>  i(p) ⊊ i(q)`. A copy is the image set of such an
//! injection, so a family holding a 4-chain holds one butterfly copy.
//!
//! [`count_copies`] is the exponential reference counter. The butterfly and
//! chain fast paths ([`count_butterflies`], [`count_chains`]) must agree with
//! it on every family.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, is_strict_subset, Mask};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::rational::ExactRational;

/// Largest poset the engine accepts (one word of relation bits per element).
pub const MAX_POSET_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PosetKind {
    Butterfly,
    Chain(usize),
    Vee,
    Wedge,
    Custom,
}

/// Names a poset to build: `butterfly`, `chain:k`, `vee`, `wedge`, or an
/// explicit relation list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PosetSpec {
    Butterfly,
    Chain(usize),
    Vee,
    Wedge,
    Custom {
        size: usize,
        lt: Vec<(usize, usize)>,
    },
}

impl FromStr for PosetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "butterfly" => Ok(PosetSpec::Butterfly),
            "vee" | "V" => Ok(PosetSpec::Vee),
            "wedge" | "lambda" => Ok(PosetSpec::Wedge),
            _ => {
                let k = s
                    .strip_prefix("chain:")
                    .ok_or_else(|| Error::Parse(format!("unknown poset '{s}'")))?;
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad chain length in '{s}'")))?;
                Ok(PosetSpec::Chain(k))
            }
        }
    }
}

/// A finite strict partial order, stored transitively closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    kind: PosetKind,
    /// `below[b]` has bit `a` set iff `a <_P b`.
    below: Vec<u64>,
}

/// `{"size": p, "lt": [[a, b], ...]}` with 0-based elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetJson {
    pub size: usize,
    pub lt: Vec<[usize; 2]>,
}

impl Poset {
    pub fn make(spec: &PosetSpec) -> Result<Poset> {
        match spec {
            PosetSpec::Butterfly => Ok(Poset::butterfly()),
            PosetSpec::Chain(k) => Poset::chain(*k),
            PosetSpec::Vee => Ok(Poset::vee()),
            PosetSpec::Wedge => Ok(Poset::wedge()),
            PosetSpec::Custom { size, lt } => Poset::custom(*size, lt),
        }
    }

    /// `a, b < c, d` with elements numbered `a=0, b=1, c=2, d=3`.
    pub fn butterfly() -> Poset {
        let mut p = Poset::from_relations(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).expect("valid");
        p.kind = PosetKind::Butterfly;
        p
    }

    /// The total order on `k` elements.
    pub fn chain(k: usize) -> Result<Poset> {
        if k == 0 || k > MAX_POSET_SIZE {
            return Err(Error::Range(format!(
                "chain length {k} outside 1..={MAX_POSET_SIZE}"
            )));
        }
        let rel: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
        let mut p = Poset::from_relations(k, &rel)?;
        p.kind = PosetKind::Chain(k);
        Ok(p)
    }

    /// One element below two others.
    pub fn vee() -> Poset {
        let mut p = Poset::from_relations(3, &[(0, 1), (0, 2)]).expect("valid");
        p.kind = PosetKind::Vee;
        p
    }

    /// One element above two others.
    pub fn wedge() -> Poset {
        let mut p = Poset::from_relations(3, &[(0, 2), (1, 2)]).expect("valid");
        p.kind = PosetKind::Wedge;
        p
    }

    /// Transitively closes `lt` and rejects cycles.
    pub fn custom(size: usize, lt: &[(usize, usize)]) -> Result<Poset> {
        Poset::from_relations(size, lt)
    }

    fn from_relations(size: usize, lt: &[(usize, usize)]) -> Result<Poset> {
        if size == 0 || size > MAX_POSET_SIZE {
            return Err(Error::Validation(format!(
                "poset size {size} outside 1..={MAX_POSET_SIZE}"
            )));
        }
        let mut below = vec![0u64; size];
        for &(a, b) in lt {
            if a >= size || b >= size {
                return Err(Error::Validation(format!(
                    "relation ({a},{b}) names an element outside 0..{size}"
                )));
            }
            below[b] |= 1 << a;
        }
        for k in 0..size {
            for b in 0..size {
                if below[b] >> k & 1 == 1 {
                    below[b] |= below[k];
                }
            }
        }
        if let Some(b) = (0..size).find(|&b| below[b] >> b & 1 == 1) {
            return Err(Error::Validation(format!(
                "relations are cyclic through element {b}"
            )));
        }
        Ok(Poset {
            kind: PosetKind::Custom,
            below,
        })
    }

    pub fn from_json(json: &PosetJson) -> Result<Poset> {
        let lt: Vec<(usize, usize)> = json.lt.iter().map(|&[a, b]| (a, b)).collect();
        Poset::custom(json.size, &lt)
    }

    pub fn from_json_str(text: &str) -> Result<Poset> {
        let json: PosetJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Poset::from_json(&json)
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson {
            size: self.size(),
            lt: self.relations().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    pub fn kind(&self) -> &PosetKind {
        &self.kind
    }

    pub fn size(&self) -> usize {
        self.below.len()
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.below[b] >> a & 1 == 1
    }

    /// All strict relations `(a, b)` with `a < b`, sorted.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        let p = self.size();
        let mut out = Vec::new();
        for a in 0..p {
            for b in 0..p {
                if self.lt(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// A linear extension, smallest available index first.
    pub fn linear_extension(&self) -> Vec<usize> {
        let p = self.size();
        let mut placed = 0u64;
        let mut order = Vec::with_capacity(p);
        while order.len() < p {
            let next = (0..p)
                .find(|&b| placed >> b & 1 == 0 && self.below[b] & !placed == 0)
                .expect("acyclic");
            placed |= 1 << next;
            order.push(next);
        }
        order
    }
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PosetKind::Butterfly => write!(f, "butterfly"),
            PosetKind::Chain(k) => write!(f, "chain:{k}"),
            PosetKind::Vee => write!(f, "vee"),
            PosetKind::Wedge => write!(f, "wedge"),
            PosetKind::Custom => write!(f, "custom({})", self.size()),
        }
    }
}

/// Backtracking embedder over a slice of masks, placing poset elements in
/// linear-extension order so only predecessors need checking.
struct Embedder<'a> {
    sets: &'a [Mask],
    order: Vec<usize>,
    /// For each position, the earlier positions holding its predecessors.
    preds: Vec<Vec<usize>>,
    image: Vec<Mask>,
    used: Vec<bool>,
}

impl<'a> Embedder<'a> {
    fn new(sets: &'a [Mask], poset: &Poset) -> Self {
        let order = poset.linear_extension();
        let preds = order
            .iter()
            .enumerate()
            .map(|(pos, &elem)| (0..pos).filter(|&q| poset.lt(order[q], elem)).collect())
            .collect();
        Embedder {
            sets,
            image: vec![0; order.len()],
            used: vec![false; sets.len()],
            order,
            preds,
        }
    }

    /// Calls `visit` on every injection; stops early when it returns false.
    /// Returns false iff stopped early.
    fn run(&mut self, pos: usize, visit: &mut dyn FnMut() -> bool) -> bool {
        if pos == self.order.len() {
            return visit();
        }
        for idx in 0..self.sets.len() {
            if self.used[idx] {
                continue;
            }
            let cand = self.sets[idx];
            if self.preds[pos]
                .iter()
                .all(|&q| is_strict_subset(self.image[q], cand))
            {
                self.used[idx] = true;
                self.image[pos] = cand;
                let go_on = self.run(pos + 1, visit);
                self.used[idx] = false;
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
}

fn embeds(sets: &[Mask], poset: &Poset) -> bool {
    if poset.size() > sets.len() {
        return false;
    }
    let mut e = Embedder::new(sets, poset);
    !e.run(0, &mut || false)
}

/// True iff some order-preserving injection `P -> F` exists.
pub fn contains_poset(family: &SetFamily, poset: &Poset) -> bool {
    embeds(family.sets(), poset)
}

/// Number of order-preserving injections `P -> F` (labelled maps, not
/// copies). Exponential; meant as a cross-check.
pub fn count_injections(family: &SetFamily, poset: &Poset) -> u128 {
    let mut e = Embedder::new(family.sets(), poset);
    let mut count = 0u128;
    e.run(0, &mut || {
        count += 1;
        true
    });
    count
}

/// A number of copies. Arbitrary precision, never negative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CopyCount(BigUint);

impl CopyCount {
    pub fn zero() -> Self {
        CopyCount(BigUint::zero())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u128(&self) -> Option<u128> {
        self.0.to_u128()
    }
}

impl From<u128> for CopyCount {
    fn from(v: u128) -> Self {
        CopyCount(BigUint::from(v))
    }
}

impl From<BigUint> for CopyCount {
    fn from(v: BigUint) -> Self {
        CopyCount(v)
    }
}

impl fmt::Display for CopyCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Visits every `p`-combination of `0..m` whose first index is `first`.
fn for_each_combination_from(m: usize, p: usize, first: usize, visit: &mut dyn FnMut(&[usize])) {
    if p == 0 || first + p > m {
        return;
    }
    let mut idx: Vec<usize> = (first..first + p).collect();
    loop {
        visit(&idx);
        // advance positions 1.. only; position 0 stays at `first`
        let mut pos = p - 1;
        loop {
            if pos == 0 {
                return;
            }
            if idx[pos] < m - (p - pos) {
                idx[pos] += 1;
                for q in pos + 1..p {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
            pos -= 1;
        }
    }
}

/// Reference copy counter: the number of `|P|`-subsets `S ⊆ F` onto which
/// `P` embeds. Exponential in `|P|`.
pub fn count_copies(family: &SetFamily, poset: &Poset) -> CopyCount {
    let sets = family.sets();
    let p = poset.size();
    if p > sets.len() {
        return CopyCount::zero();
    }
    let total: u128 = (0..sets.len())
        .into_par_iter()
        .map(|first| {
            let mut local = 0u128;
            let mut chosen = vec![0 as Mask; p];
            for_each_combination_from(sets.len(), p, first, &mut |idx| {
                for (slot, &i) in chosen.iter_mut().zip(idx) {
                    *slot = sets[i];
                }
                if embeds(&chosen, poset) {
                    local += 1;
                }
            });
            local
        })
        .sum();
    CopyCount::from(total)
}

/// Dispatches to the fast path for butterflies and chains, otherwise to
/// [`count_copies`].
pub fn count_copies_fast(family: &SetFamily, poset: &Poset) -> CopyCount {
    match poset.kind() {
        PosetKind::Butterfly => count_butterflies(family),
        PosetKind::Chain(k) => count_chains(family, *k),
        _ => count_copies(family, poset),
    }
}

/// Row-major bitsets: row `c` marks the members strictly below member `c`.
struct DownSets {
    words: usize,
    bits: Vec<u64>,
}

impl DownSets {
    fn new(sets: &[Mask]) -> Self {
        let m = sets.len();
        let words = m.div_ceil(64).max(1);
        let mut bits = vec![0u64; m * words];
        bits.par_chunks_mut(words).enumerate().for_each(|(c, row)| {
            let top = sets[c];
            // canonical order: strict subsets come earlier
            for (a, &lower) in sets[..c].iter().enumerate() {
                if is_strict_subset(lower, top) {
                    row[a / 64] |= 1 << (a % 64);
                }
            }
        });
        DownSets { words, bits }
    }

    fn row(&self, c: usize) -> &[u64] {
        &self.bits[c * self.words..(c + 1) * self.words]
    }

    fn common(&self, c: usize, d: usize) -> u64 {
        self.row(c)
            .iter()
            .zip(self.row(d))
            .map(|(x, y)| (x & y).count_ones() as u64)
            .sum()
    }
}

#[inline]
fn pairs(k: u64) -> u128 {
    let k = k as u128;
    k * k.saturating_sub(1) / 2
}

/// Butterfly copies: `Σ_{C,D} C(|L(C,D)|, 2)` over unordered member pairs,
/// where `L(C,D)` is the set of members strictly inside both. Each copy has
/// exactly one such top pair, so the sum counts copies, not injections.
pub fn count_butterflies(family: &SetFamily) -> CopyCount {
    let sets = family.sets();
    let down = DownSets::new(sets);
    let tops: Vec<usize> = (0..sets.len())
        .filter(|&c| down.row(c).iter().map(|w| w.count_ones()).sum::<u32>() >= 2)
        .collect();
    let total: u128 = (0..tops.len())
        .into_par_iter()
        .map(|i| {
            tops[i + 1..]
                .iter()
                .map(|&d| pairs(down.common(tops[i], d)))
                .sum::<u128>()
        })
        .sum();
    CopyCount::from(total)
}

/// Butterfly copies that use `pivot` and otherwise only members of `base`.
///
/// Equals `count_butterflies(base ∪ {pivot}) - count_butterflies(base)`.
pub fn count_butterflies_with_pivot(base: &SetFamily, pivot: Mask) -> Result<CopyCount> {
    check_pivot(base, pivot)?;
    Ok(CopyCount::from(pivot_butterflies(
        base.sets(),
        pivot,
        false,
    )))
}

/// True iff adding `pivot` to `base` creates at least one butterfly.
pub fn creates_butterfly(base: &SetFamily, pivot: Mask) -> Result<bool> {
    check_pivot(base, pivot)?;
    Ok(pivot_butterflies(base.sets(), pivot, true) > 0)
}

fn check_pivot(base: &SetFamily, pivot: Mask) -> Result<()> {
    if pivot & !base.full() != 0 {
        return Err(Error::Argument(format!(
            "pivot {:?} leaves [{}]",
            bits::elements(pivot),
            base.n()
        )));
    }
    if base.contains(pivot) {
        return Err(Error::Argument(format!(
            "pivot {:?} already belongs to the base family",
            bits::elements(pivot)
        )));
    }
    Ok(())
}

/// Pivot as a top: for each `D`, pairs of members strictly below both.
/// Pivot as a bottom: for each other bottom `A`, pairs of members strictly
/// above both.
pub(crate) fn pivot_butterflies(base: &[Mask], pivot: Mask, stop_at_first: bool) -> u128 {
    let below: Vec<Mask> = base
        .iter()
        .copied()
        .filter(|&a| is_strict_subset(a, pivot))
        .collect();
    let above: Vec<Mask> = base
        .iter()
        .copied()
        .filter(|&b| is_strict_subset(pivot, b))
        .collect();
    let mut total = 0u128;
    if below.len() >= 2 {
        for &d in base {
            let c = below.iter().filter(|&&a| is_strict_subset(a, d)).count() as u64;
            total += pairs(c);
            if stop_at_first && total > 0 {
                return total;
            }
        }
    }
    if above.len() >= 2 {
        for &a in base {
            let c = above.iter().filter(|&&b| is_strict_subset(a, b)).count() as u64;
            total += pairs(c);
            if stop_at_first && total > 0 {
                return total;
            }
        }
    }
    total
}

/// Copies of `poset` that use `pivot` and otherwise only members of `base`.
pub fn count_copies_with_pivot(base: &SetFamily, pivot: Mask, poset: &Poset) -> Result<CopyCount> {
    check_pivot(base, pivot)?;
    if *poset.kind() == PosetKind::Butterfly {
        return Ok(CopyCount::from(pivot_butterflies(
            base.sets(),
            pivot,
            false,
        )));
    }
    Ok(CopyCount::from(generic_pivot_copies(
        base.sets(),
        pivot,
        poset,
    )))
}

pub(crate) fn generic_pivot_copies(base: &[Mask], pivot: Mask, poset: &Poset) -> u128 {
    let p = poset.size();
    if p == 1 {
        return 1;
    }
    if p - 1 > base.len() {
        return 0;
    }
    let mut count = 0u128;
    let mut chosen = vec![0 as Mask; p];
    chosen[p - 1] = pivot;
    for first in 0..base.len() {
        for_each_combination_from(base.len(), p - 1, first, &mut |idx| {
            for (slot, &i) in chosen.iter_mut().zip(idx) {
                *slot = base[i];
            }
            if embeds(&chosen, poset) {
                count += 1;
            }
        });
    }
    count
}

/// Number of `k`-chains `F_1 ⊊ ... ⊊ F_k` among the members, by dynamic
/// programming over the inclusion order.
pub fn count_chains(family: &SetFamily, k: usize) -> CopyCount {
    if k == 0 {
        return CopyCount::zero();
    }
    match count_chains_u128(family.sets(), k) {
        Some(v) => CopyCount::from(v),
        None => CopyCount::from(count_chains_big(family.sets(), k)),
    }
}

fn count_chains_u128(sets: &[Mask], k: usize) -> Option<u128> {
    let m = sets.len();
    // ways[c * k + len - 1]: chains of `len` members ending at member c
    let mut ways = vec![0u128; m * k];
    let mut total = 0u128;
    for c in 0..m {
        ways[c * k] = 1;
        for a in 0..c {
            if is_strict_subset(sets[a], sets[c]) {
                for len in 1..k {
                    let add = ways[a * k + len - 1];
                    ways[c * k + len] = ways[c * k + len].checked_add(add)?;
                }
            }
        }
        total = total.checked_add(ways[c * k + k - 1])?;
    }
    Some(total)
}

fn count_chains_big(sets: &[Mask], k: usize) -> BigUint {
    let m = sets.len();
    let mut ways = vec![BigUint::zero(); m * k];
    let mut total = BigUint::zero();
    for c in 0..m {
        ways[c * k] = BigUint::from(1u8);
        for a in 0..c {
            if is_strict_subset(sets[a], sets[c]) {
                for len in 1..k {
                    let add = ways[a * k + len - 1].clone();
                    ways[c * k + len] += add;
                }
            }
        }
        total += &ways[c * k + k - 1];
    }
    total
}

/// Members with both a strict subset and a strict superset in the family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiddleFamily(SetFamily);

impl MiddleFamily {
    pub fn family(&self) -> &SetFamily {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn middle_sets(family: &SetFamily) -> MiddleFamily {
    let sets = family.sets();
    let middles = sets
        .iter()
        .copied()
        .filter(|&m| {
            sets.iter().any(|&a| is_strict_subset(a, m))
                && sets.iter().any(|&b| is_strict_subset(m, b))
        })
        .collect();
    MiddleFamily(SetFamily::from_masks_dedup(family.n(), middles))
}

/// Weighted Lubell sum in which each middle member `M` carries the factor
/// `1 + ((|M|-1)(n-|M|-1) - 1) / (|M|(n-|M|))`, evaluated exactly.
///
/// Requires `∅ ∉ F` and `[n] ∉ F`.
pub fn improved_lym_sum(family: &SetFamily) -> Result<ExactRational> {
    let n = family.n() as i64;
    if family.contains(0) || family.contains(family.full()) {
        return Err(Error::Precondition(
            "weighted LYM sum needs a family without the empty set and [n]".into(),
        ));
    }
    let middles = middle_sets(family);
    let mut total = ExactRational::zero();
    for m in family.iter() {
        let size = m.count_ones() as i64;
        let base =
            ExactRational::reciprocal_of(bits::binomial(n as u64, size as u64).expect("n <= 63"));
        let term = if middles.family().contains(m) {
            let weight = ExactRational::integer(1)
                + ExactRational::new((size - 1) * (n - size - 1) - 1, size * (n - size));
            weight * base
        } else {
            base
        };
        total = total + term;
    }
    Ok(total)
}
