//! Seeded family generators. Every generator takes the RNG explicitly; use
//! [`rng_from_seed`] for reproducible streams.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::{binomial, full_mask, is_strict_subset, layer_masks, Mask};
use crate::error::{Error, Result};
use crate::family::SetFamily;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest `n` for which generators enumerate `2^[n]` explicitly.
const ENUMERABLE_N: u32 = 20;

/// `size` distinct uniformly random subsets of `[n]`.
pub fn random_family<R: Rng>(rng: &mut R, n: u32, size: usize) -> Result<SetFamily> {
    if n > ENUMERABLE_N {
        return Err(Error::Range(format!(
            "random families need n <= {ENUMERABLE_N}, got {n}"
        )));
    }
    let total = 1usize << n;
    if size > total {
        return Err(Error::Argument(format!(
            "{size} sets requested from 2^[{n}]"
        )));
    }
    SetFamily::new(
        n,
        index::sample(rng, total, size)
            .into_iter()
            .map(|i| i as Mask),
    )
}

/// `size` distinct uniformly random `k`-subsets of `[n]`.
pub fn random_uniform_family<R: Rng>(
    rng: &mut R,
    n: u32,
    k: u32,
    size: usize,
) -> Result<SetFamily> {
    if n > ENUMERABLE_N || k > n {
        return Err(Error::Range(format!(
            "need k <= n <= {ENUMERABLE_N}, got n={n}, k={k}"
        )));
    }
    let layer: Vec<Mask> = layer_masks(n, k).collect();
    if size > layer.len() {
        return Err(Error::Argument(format!(
            "{size} sets requested from a layer of {}",
            layer.len()
        )));
    }
    SetFamily::new(
        n,
        index::sample(rng, layer.len(), size)
            .into_iter()
            .map(|i| layer[i]),
    )
}

/// Layer `k` of `[n]` with `missing` uniformly random members removed.
pub fn layer_with_random_holes<R: Rng>(
    rng: &mut R,
    n: u32,
    k: u32,
    missing: usize,
) -> Result<SetFamily> {
    let total = binomial(n as u64, k as u64).unwrap_or(u128::MAX);
    if (missing as u128) > total {
        return Err(Error::Argument(format!(
            "cannot remove {missing} of {total} sets"
        )));
    }
    random_uniform_family(rng, n, k, total as usize - missing)
}

/// Layer `k` of `[n]` with `missing` members removed, all containing a
/// common random `(k-1)`-set where possible and otherwise sharing as many
/// elements with it as the layer allows.
pub fn layer_with_clustered_holes<R: Rng>(
    rng: &mut R,
    n: u32,
    k: u32,
    missing: usize,
) -> Result<SetFamily> {
    if k == 0 || k > n || n > ENUMERABLE_N {
        return Err(Error::Range(format!(
            "need 1 <= k <= n <= {ENUMERABLE_N}, got n={n}, k={k}"
        )));
    }
    let layer: Vec<Mask> = layer_masks(n, k).collect();
    if missing > layer.len() {
        return Err(Error::Argument(format!(
            "cannot remove {missing} of {} sets",
            layer.len()
        )));
    }
    let mut perm: Vec<u32> = (1..=n).collect();
    perm.shuffle(rng);
    let core: Mask = perm[..k as usize - 1]
        .iter()
        .fold(0, |acc, &e| acc | 1 << (e - 1));
    // closest to the core first, ties broken by a random key
    let mut keyed: Vec<(u32, u64, Mask)> = layer
        .iter()
        .map(|&s| (k - (s & core).count_ones(), rng.gen(), s))
        .collect();
    keyed.sort_unstable();
    let holes: Vec<Mask> = keyed.iter().take(missing).map(|t| t.2).collect();
    let family = SetFamily::new(n, layer)?;
    Ok(holes.into_iter().fold(family, |f, h| f.without_set(h)))
}

/// A 2-Sperner family grown greedily from `attempts` uniformly random
/// subsets of `[n]` (with repetition skipped).
pub fn random_two_sperner<R: Rng>(rng: &mut R, n: u32, attempts: usize) -> Result<SetFamily> {
    if n > ENUMERABLE_N {
        return Err(Error::Range(format!("need n <= {ENUMERABLE_N}, got {n}")));
    }
    let mut order: Vec<Mask> = (0..1u64 << n).collect();
    order.shuffle(rng);
    let mut members: Vec<Mask> = Vec::new();
    // has_below[i]: member i has a member strictly inside it; has_above likewise
    let mut has_below: Vec<bool> = Vec::new();
    let mut has_above: Vec<bool> = Vec::new();
    for &s in order.iter().take(attempts) {
        let mut below = Vec::new();
        let mut above = Vec::new();
        let mut blocked = false;
        for (i, &a) in members.iter().enumerate() {
            if is_strict_subset(a, s) {
                blocked |= has_below[i];
                below.push(i);
            } else if is_strict_subset(s, a) {
                blocked |= has_above[i];
                above.push(i);
            }
            if blocked {
                break;
            }
        }
        if blocked || (!below.is_empty() && !above.is_empty()) {
            continue;
        }
        for &i in &below {
            has_above[i] = true;
        }
        for &i in &above {
            has_below[i] = true;
        }
        members.push(s);
        has_below.push(!below.is_empty());
        has_above.push(!above.is_empty());
    }
    SetFamily::new(n, members)
}

/// Growable bitset rows over member indices.
struct Rows {
    rows: Vec<Vec<u64>>,
}

impl Rows {
    fn set(&mut self, row: usize, bit: usize) {
        let r = &mut self.rows[row];
        if r.len() <= bit / 64 {
            r.resize(bit / 64 + 1, 0);
        }
        r[bit / 64] |= 1 << (bit % 64);
    }

    /// True iff two of the listed rows share a bit.
    fn any_pair_meets(&self, listed: &[usize], scratch: &mut Vec<u64>) -> bool {
        scratch.clear();
        for &i in listed {
            let r = &self.rows[i];
            if scratch.len() < r.len() {
                scratch.resize(r.len(), 0);
            }
            for (acc, &w) in scratch.iter_mut().zip(r) {
                if *acc & w != 0 {
                    return true;
                }
                *acc |= w;
            }
        }
        false
    }
}

/// A butterfly-free family grown greedily from `attempts` uniformly random
/// proper nonempty subsets of `[n]`.
pub fn random_butterfly_free<R: Rng>(rng: &mut R, n: u32, attempts: usize) -> Result<SetFamily> {
    if !(2..=ENUMERABLE_N).contains(&n) {
        return Err(Error::Range(format!(
            "need 2 <= n <= {ENUMERABLE_N}, got {n}"
        )));
    }
    let full = full_mask(n);
    let mut order: Vec<Mask> = (1..full).collect();
    order.shuffle(rng);
    let mut members: Vec<Mask> = Vec::new();
    let mut up = Rows { rows: Vec::new() };
    let mut down = Rows { rows: Vec::new() };
    let mut scratch = Vec::new();
    for &s in order.iter().take(attempts) {
        let below: Vec<usize> = (0..members.len())
            .filter(|&i| is_strict_subset(members[i], s))
            .collect();
        let above: Vec<usize> = (0..members.len())
            .filter(|&i| is_strict_subset(s, members[i]))
            .collect();
        // s on top: two members below s share a further upper bound
        if below.len() >= 2 && up.any_pair_meets(&below, &mut scratch) {
            continue;
        }
        if above.len() >= 2 && down.any_pair_meets(&above, &mut scratch) {
            continue;
        }
        let idx = members.len();
        members.push(s);
        up.rows.push(Vec::new());
        down.rows.push(Vec::new());
        for &i in &below {
            up.set(i, idx);
            down.set(idx, i);
        }
        for &i in &above {
            down.set(i, idx);
            up.set(idx, i);
        }
    }
    SetFamily::new(n, members)
}

/// `base` plus `extra` distinct non-members drawn uniformly.
pub fn random_superset<R: Rng>(rng: &mut R, base: &SetFamily, extra: usize) -> Result<SetFamily> {
    let n = base.n();
    if n > ENUMERABLE_N {
        return Err(Error::Range(format!("need n <= {ENUMERABLE_N}, got {n}")));
    }
    let outside: Vec<Mask> = (0..1u64 << n).filter(|&m| !base.contains(m)).collect();
    if extra > outside.len() {
        return Err(Error::Argument(format!(
            "only {} non-members available",
            outside.len()
        )));
    }
    let chosen = SetFamily::new(
        n,
        index::sample(rng, outside.len(), extra)
            .into_iter()
            .map(|i| outside[i]),
    )?;
    base.union(&chosen)
}

/// A uniformly random permutation of `1..=n`, as used by
/// [`SetFamily::permute`].
pub fn random_permutation<R: Rng>(rng: &mut R, n: u32) -> Vec<u32> {
    let mut perm: Vec<u32> = (1..=n).collect();
    perm.shuffle(rng);
    perm
}
