//! Closed-form extremal quantities and the supersaturation constructions.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bits::{self, binomial, layer_masks, Mask};
use crate::error::{Error, Result};
use crate::family::SetFamily;

fn check_nk(n: u32, k: u32) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Range(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    Ok(())
}

fn binom(n: u32, k: u32) -> u128 {
    binomial(n as u64, k as u64).expect("n <= 63 fits u128")
}

/// Maximum size of a `k`-Sperner family in `2^[n]`: the `k` middle layers
/// starting just above `⌊(n-k)/2⌋`.
pub fn sigma(n: u32, k: u32) -> Result<u128> {
    check_nk(n, k)?;
    let low = (n - k) / 2;
    Ok((1..=k).map(|i| binom(n, low + i)).sum())
}

/// Layer indices of the one or two extremal `k`-Sperner layer unions, lowest
/// first.
pub fn sigma_star_layers(n: u32, k: u32) -> Result<Vec<Vec<u32>>> {
    check_nk(n, k)?;
    let floor = (n - k) / 2;
    let ceil = (n - k).div_ceil(2);
    let upper: Vec<u32> = (1..=k).map(|i| floor + i).collect();
    let lower: Vec<u32> = (0..k).map(|i| ceil + i).collect();
    let mut out = vec![lower, upper];
    out.sort();
    out.dedup();
    Ok(out)
}

/// The families in `Σ*(n, k)`: one when `n + k` is odd, two otherwise.
pub fn sigma_star(n: u32, k: u32) -> Result<Vec<SetFamily>> {
    sigma_star_layers(n, k)?
        .iter()
        .map(|ks| SetFamily::layers(n, ks))
        .collect()
}

/// `(⌈n/2⌉ + 1) · C(⌈n/2⌉, 2)`: butterflies forced by one extra set on top
/// of an extremal butterfly-free family.
pub fn f(n: u32) -> u128 {
    let h = n.div_ceil(2) as u128;
    (h + 1) * (h * h.saturating_sub(1) / 2)
}

/// A `w`-uniform family in which any two members share at most `w - 2`
/// elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeLayer {
    w: u32,
    members: SetFamily,
}

impl CodeLayer {
    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn members(&self) -> &SetFamily {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest pairwise intersection, by direct all-pairs check (0 for
    /// fewer than two members).
    pub fn max_pair_intersection(&self) -> u32 {
        let sets = self.members.sets();
        let mut best = 0;
        for (i, &a) in sets.iter().enumerate() {
            for &b in &sets[i + 1..] {
                best = best.max((a & b).count_ones());
            }
        }
        best
    }

    pub fn satisfies_distance(&self) -> bool {
        self.members.len() < 2 || self.max_pair_intersection() + 2 <= self.w
    }
}

fn element_sum(mask: Mask) -> u64 {
    bits::elements(mask).iter().map(|&e| e as u64).sum()
}

/// Partitions layer `w` by element sum mod `n` and keeps the largest class
/// (smallest residue on ties). Two `w`-sets meeting in `w - 1` elements
/// differ by swapping `a` for `b` with `0 < |a - b| < n`, so they never
/// share a residue.
pub fn residue_code_layer(n: u32, w: u32) -> Result<CodeLayer> {
    if w == 0 || w > n {
        return Err(Error::Range(format!("need 1 <= w <= n, got n={n}, w={w}")));
    }
    let layer: Vec<Mask> = layer_masks(n, w).collect();
    let counts = layer
        .par_chunks(4096)
        .map(|chunk| {
            let mut c = vec![0usize; n as usize];
            for &m in chunk {
                c[(element_sum(m) % n as u64) as usize] += 1;
            }
            c
        })
        .reduce(
            || vec![0usize; n as usize],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let best = (0..n as usize)
        .max_by_key(|&c| (counts[c], std::cmp::Reverse(c)))
        .expect("n >= 1");
    let members = layer
        .into_iter()
        .filter(|&m| element_sum(m) % n as u64 == best as u64)
        .collect::<Vec<_>>();
    Ok(CodeLayer {
        w,
        members: SetFamily::new(n, members)?,
    })
}

/// Greedy scan of layer `w` in colex order, admitting a set when it meets
/// every admitted set in at most `w - 2` elements. Stops at `target`.
pub fn greedy_code_layer(n: u32, w: u32, target: usize) -> Result<CodeLayer> {
    if w > n {
        return Err(Error::Range(format!("need w <= n, got n={n}, w={w}")));
    }
    let mut admitted: Vec<Mask> = Vec::new();
    if target > 0 {
        for m in layer_masks(n, w) {
            if admitted.iter().all(|&a| (a & m).count_ones() + 2 <= w) {
                admitted.push(m);
                if admitted.len() == target {
                    break;
                }
            }
        }
    }
    Ok(CodeLayer {
        w,
        members: SetFamily::new(n, admitted)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Residue,
    Greedy,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "residue" => Ok(Strategy::Residue),
            "greedy" => Ok(Strategy::Greedy),
            _ => Err(Error::Parse(format!(
                "unknown strategy '{s}' (residue|greedy)"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Residue => "residue",
            Strategy::Greedy => "greedy",
        })
    }
}

/// The E-layer the strategy can offer above the middle: layer `⌈n/2⌉ + 1`.
/// Empty when that layer does not exist.
pub fn extra_layer(n: u32, strategy: Strategy) -> Result<CodeLayer> {
    let w = n.div_ceil(2) + 1;
    if w > n {
        return Ok(CodeLayer {
            w,
            members: SetFamily::empty(n)?,
        });
    }
    match strategy {
        Strategy::Residue => residue_code_layer(n, w),
        Strategy::Greedy => greedy_code_layer(n, w, usize::MAX),
    }
}

/// Layers `⌈n/2⌉ - 1` and `⌈n/2⌉` plus `extra` sets from layer `⌈n/2⌉ + 1`
/// pairwise meeting in fewer than `⌈n/2⌉` elements. Holds exactly
/// `extra · f(n)` butterflies.
pub fn build_construction(n: u32, extra: usize, strategy: Strategy) -> Result<SetFamily> {
    if n < 2 {
        return Err(Error::Range(format!("construction needs n >= 2, got {n}")));
    }
    let h = n.div_ceil(2);
    let base = SetFamily::layers(n, &[h - 1, h])?;
    let pool = extra_layer(n, strategy)?;
    if extra > pool.len() {
        return Err(Error::Capacity {
            strategy: strategy.to_string(),
            requested: extra,
            achieved: pool.len(),
        });
    }
    let chosen = SetFamily::new(n, pool.members().iter().take(extra))?;
    base.union(&chosen)
}
