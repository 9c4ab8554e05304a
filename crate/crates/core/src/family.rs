//! Set families over `[n]` and the elementary operators on them.
//!
//! A [`SetFamily`] is immutable: every operator returns a new family in
//! canonical order (ascending popcount, then colex).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{self, canonical_key, full_mask, is_strict_subset, layer_masks, Mask, MAX_N};
use crate::error::{Error, Result};
use crate::rational::ExactRational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    n: u32,
    sets: Vec<Mask>,
}

/// On-disk shape of a family: `{"n": 4, "sets": [[1,2],[3]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub n: u32,
    pub sets: Vec<Vec<u32>>,
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Range(format!(
            "ground size n={n} outside 1..={MAX_N}"
        )));
    }
    Ok(())
}

impl SetFamily {
    /// Validating constructor: rejects duplicate masks and bits outside `[n]`.
    pub fn new(n: u32, sets: impl IntoIterator<Item = Mask>) -> Result<Self> {
        check_n(n)?;
        let full = full_mask(n);
        let mut sets: Vec<Mask> = sets.into_iter().collect();
        if let Some(bad) = sets.iter().find(|&&m| m & !full != 0) {
            return Err(Error::Validation(format!(
                "set {:?} uses elements outside [{n}]",
                bits::elements(*bad)
            )));
        }
        sets.sort_unstable_by_key(|&m| canonical_key(m));
        if let Some(w) = sets.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!(
                "duplicate set {:?}",
                bits::elements(w[0])
            )));
        }
        Ok(SetFamily { n, sets })
    }

    /// Builds from masks already known to lie in `[n]`, dropping duplicates.
    pub(crate) fn from_masks_dedup(n: u32, mut sets: Vec<Mask>) -> Self {
        debug_assert!(sets.iter().all(|&m| m & !full_mask(n) == 0));
        sets.sort_unstable_by_key(|&m| canonical_key(m));
        sets.dedup();
        SetFamily { n, sets }
    }

    pub fn from_element_lists(n: u32, lists: &[Vec<u32>]) -> Result<Self> {
        check_n(n)?;
        let mut masks = Vec::with_capacity(lists.len());
        for (idx, list) in lists.iter().enumerate() {
            let mut mask = 0;
            for (pos, &e) in list.iter().enumerate() {
                if e == 0 || e > n {
                    return Err(Error::Validation(format!(
                        "sets[{idx}][{pos}]: element {e} outside 1..={n}"
                    )));
                }
                let bit = bits::element_bit(e);
                if mask & bit != 0 {
                    return Err(Error::Validation(format!(
                        "sets[{idx}][{pos}]: element {e} repeated"
                    )));
                }
                mask |= bit;
            }
            masks.push(mask);
        }
        SetFamily::new(n, masks)
    }

    pub fn empty(n: u32) -> Result<Self> {
        check_n(n)?;
        Ok(SetFamily {
            n,
            sets: Vec::new(),
        })
    }

    /// The full layer `binom([n], k)`.
    pub fn layer(n: u32, k: u32) -> Result<Self> {
        SetFamily::layers(n, &[k])
    }

    /// Union of full layers.
    pub fn layers(n: u32, ks: &[u32]) -> Result<Self> {
        check_n(n)?;
        if let Some(&k) = ks.iter().find(|&&k| k > n) {
            return Err(Error::Range(format!("layer {k} outside 0..={n}")));
        }
        let mut ks = ks.to_vec();
        ks.sort_unstable();
        ks.dedup();
        let sets = ks.iter().flat_map(|&k| layer_masks(n, k)).collect();
        Ok(SetFamily { n, sets })
    }

    /// All `2^n` subsets; only sensible for small `n`.
    pub fn power_set(n: u32) -> Result<Self> {
        let ks: Vec<u32> = (0..=n).collect();
        SetFamily::layers(n, &ks)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Mask] {
        &self.sets
    }

    pub fn iter(&self) -> impl Iterator<Item = Mask> + '_ {
        self.sets.iter().copied()
    }

    pub fn full(&self) -> Mask {
        full_mask(self.n)
    }

    pub fn contains(&self, mask: Mask) -> bool {
        self.sets
            .binary_search_by_key(&canonical_key(mask), |&m| canonical_key(m))
            .is_ok()
    }

    /// `F ∪ {mask}`; errors if `mask` is already present or leaves `[n]`.
    pub fn with_set(&self, mask: Mask) -> Result<Self> {
        if mask & !self.full() != 0 {
            return Err(Error::Validation(format!(
                "set {:?} uses elements outside [{}]",
                bits::elements(mask),
                self.n
            )));
        }
        match self
            .sets
            .binary_search_by_key(&canonical_key(mask), |&m| canonical_key(m))
        {
            Ok(_) => Err(Error::Argument(format!(
                "set {:?} already in family",
                bits::elements(mask)
            ))),
            Err(pos) => {
                let mut sets = self.sets.clone();
                sets.insert(pos, mask);
                Ok(SetFamily { n: self.n, sets })
            }
        }
    }

    pub fn without_set(&self, mask: Mask) -> Self {
        SetFamily {
            n: self.n,
            sets: self.sets.iter().copied().filter(|&m| m != mask).collect(),
        }
    }

    pub fn union(&self, other: &SetFamily) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Argument(format!(
                "ground sizes differ ({} vs {})",
                self.n, other.n
            )));
        }
        let mut sets = self.sets.clone();
        sets.extend_from_slice(&other.sets);
        Ok(SetFamily::from_masks_dedup(self.n, sets))
    }

    /// Members of size `k`, in colex order.
    pub fn members_of_size(&self, k: u32) -> impl Iterator<Item = Mask> + '_ {
        self.iter().filter(move |m| m.count_ones() == k)
    }

    /// `Some(k)` if every member has size `k` (`None` for mixed families;
    /// the empty family reports `None` as well).
    pub fn uniform_size(&self) -> Option<u32> {
        let first = self.sets.first()?.count_ones();
        let last = self.sets.last()?.count_ones();
        (first == last).then_some(first)
    }

    pub fn is_uniform(&self, k: u32) -> bool {
        self.iter().all(|m| m.count_ones() == k)
    }

    fn check_layer(&self, k: u32) -> Result<()> {
        if k > self.n {
            return Err(Error::Range(format!("layer {k} outside 0..={}", self.n)));
        }
        Ok(())
    }

    /// All `k`-sets strictly contained in some member.
    pub fn shadow(&self, k: u32) -> Result<SetFamily> {
        self.check_layer(k)?;
        let top = match self.sets.last() {
            Some(m) => m.count_ones(),
            None => {
                return Ok(SetFamily {
                    n: self.n,
                    sets: Vec::new(),
                })
            }
        };
        if top <= k {
            return Ok(SetFamily {
                n: self.n,
                sets: Vec::new(),
            });
        }
        // Walk down one layer at a time; the level-s frontier holds every
        // s-set that is a member or lies strictly below one.
        let mut frontier: HashSet<Mask> = self.members_of_size(top).collect();
        for s in ((k + 1)..=top).rev() {
            let mut next: HashSet<Mask> = if s - 1 > k {
                self.members_of_size(s - 1).collect()
            } else {
                HashSet::new()
            };
            for &m in &frontier {
                let mut rest = m;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    next.insert(m & !bit);
                    rest &= rest - 1;
                }
            }
            frontier = next;
        }
        Ok(SetFamily::from_masks_dedup(
            self.n,
            frontier.into_iter().collect(),
        ))
    }

    /// All `k`-subsets of `[n]` strictly containing some member.
    pub fn shade(&self, k: u32) -> Result<SetFamily> {
        self.check_layer(k)?;
        let bottom = match self.sets.first() {
            Some(m) => m.count_ones(),
            None => {
                return Ok(SetFamily {
                    n: self.n,
                    sets: Vec::new(),
                })
            }
        };
        if bottom >= k {
            return Ok(SetFamily {
                n: self.n,
                sets: Vec::new(),
            });
        }
        let full = self.full();
        let mut frontier: HashSet<Mask> = self.members_of_size(bottom).collect();
        for s in bottom..k {
            let mut next: HashSet<Mask> = if s + 1 < k {
                self.members_of_size(s + 1).collect()
            } else {
                HashSet::new()
            };
            for &m in &frontier {
                let mut free = full & !m;
                while free != 0 {
                    let bit = free & free.wrapping_neg();
                    next.insert(m | bit);
                    free &= free - 1;
                }
            }
            frontier = next;
        }
        Ok(SetFamily::from_masks_dedup(
            self.n,
            frontier.into_iter().collect(),
        ))
    }

    fn check_shift_pair(&self, i: u32, j: u32) -> Result<()> {
        if i == 0 || j > self.n || i >= j {
            return Err(Error::Argument(format!(
                "shift needs 1 <= i < j <= {}, got i={i}, j={j}",
                self.n
            )));
        }
        Ok(())
    }

    /// The left shift `τ_{i,j}`: each member containing `j` but not `i`
    /// trades `j` for `i` unless the traded set is already a member.
    pub fn shift(&self, i: u32, j: u32) -> Result<SetFamily> {
        self.check_shift_pair(i, j)?;
        let (bi, bj) = (bits::element_bit(i), bits::element_bit(j));
        let sets = self
            .iter()
            .map(|m| {
                if m & bj != 0 && m & bi == 0 {
                    let moved = (m & !bj) | bi;
                    if !self.contains(moved) {
                        return moved;
                    }
                }
                m
            })
            .collect();
        Ok(SetFamily::from_masks_dedup(self.n, sets))
    }

    /// True iff the family is a fixed point of every `τ_{i,j}`, `i < j`.
    pub fn is_left_shifted(&self) -> bool {
        for j in 2..=self.n {
            let bj = bits::element_bit(j);
            for i in 1..j {
                let bi = bits::element_bit(i);
                let moves = self
                    .iter()
                    .any(|m| m & bj != 0 && m & bi == 0 && !self.contains((m & !bj) | bi));
                if moves {
                    return false;
                }
            }
        }
        true
    }

    /// Applies shifts until the family is left shifted.
    pub fn compress(&self) -> SetFamily {
        let mut cur = self.clone();
        loop {
            let mut changed = false;
            for j in 2..=self.n {
                for i in 1..j {
                    let next = cur.shift(i, j).expect("valid shift pair");
                    if next != cur {
                        changed = true;
                        cur = next;
                    }
                }
            }
            if !changed {
                return cur;
            }
        }
    }

    /// `Σ 1 / C(n, |F|)` over the members, exactly.
    pub fn lubell_sum(&self) -> ExactRational {
        let mut per_layer = vec![0u64; self.n as usize + 1];
        for m in self.iter() {
            per_layer[m.count_ones() as usize] += 1;
        }
        per_layer
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| {
                let b = bits::binomial(self.n as u64, k as u64).expect("n <= 63");
                ExactRational::reciprocal_of(b) * ExactRational::integer(c as i64)
            })
            .sum()
    }

    /// Number of members in a longest chain under strict inclusion.
    pub fn longest_chain(&self) -> usize {
        let mut height = vec![0usize; self.sets.len()];
        let mut best = 0;
        for (idx, &m) in self.sets.iter().enumerate() {
            // Canonical order puts every strict subset before its supersets.
            let h = 1
                + (0..idx)
                    .filter(|&p| is_strict_subset(self.sets[p], m))
                    .map(|p| height[p])
                    .max()
                    .unwrap_or(0);
            height[idx] = h;
            best = best.max(h);
        }
        best
    }

    /// No chain of `k + 1` members.
    pub fn is_k_sperner(&self, k: usize) -> bool {
        self.longest_chain() <= k
    }

    /// `{[n] \ F : F ∈ F}`.
    pub fn complement_family(&self) -> SetFamily {
        let full = self.full();
        SetFamily::from_masks_dedup(self.n, self.iter().map(|m| full ^ m).collect())
    }

    /// Relabels the ground set: element `e` becomes `perm[e - 1]`.
    pub fn permute(&self, perm: &[u32]) -> Result<SetFamily> {
        let mut seen = vec![false; self.n as usize];
        if perm.len() != self.n as usize
            || perm.iter().any(|&p| {
                p == 0 || p > self.n || std::mem::replace(&mut seen[p as usize - 1], true)
            })
        {
            return Err(Error::Argument(format!(
                "not a permutation of [{}]: {perm:?}",
                self.n
            )));
        }
        let sets = self
            .iter()
            .map(|m| {
                bits::elements(m)
                    .iter()
                    .fold(0, |acc, &e| acc | bits::element_bit(perm[e as usize - 1]))
            })
            .collect();
        Ok(SetFamily::from_masks_dedup(self.n, sets))
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson {
            n: self.n,
            sets: self.iter().map(bits::elements).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("family serializes")
    }

    pub fn from_json(json: &FamilyJson) -> Result<Self> {
        SetFamily::from_element_lists(json.n, &json.sets)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: FamilyJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        SetFamily::from_json(&json)
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} {{", self.n)?;
        for (idx, m) in self.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (p, e) in bits::elements(m).iter().enumerate() {
                if p > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}
