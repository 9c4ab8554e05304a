//! Edge counts in the Johnson-type graph on `k`-sets, the gap encoding of
//! `k`-sets, and censuses of supersets with too few members below them.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{self, binomial, layer_masks, Mask};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::report::{BoundReport, Relation, Verdict};

fn require_uniform(family: &SetFamily, k: u32) -> Result<()> {
    match family.iter().find(|m| m.count_ones() != k) {
        Some(bad) => Err(Error::Precondition(format!(
            "family is not {k}-uniform: member {:?} has size {}",
            bits::elements(bad),
            bad.count_ones()
        ))),
        None => Ok(()),
    }
}

/// Number of unordered member pairs meeting in `k - 1` elements.
pub fn hamming_edges(family: &SetFamily, k: u32) -> Result<u64> {
    require_uniform(family, k)?;
    let full = family.full();
    let twice: u64 = family
        .sets()
        .par_iter()
        .map(|&a| {
            let mut deg = 0u64;
            let mut out = a;
            while out != 0 {
                let drop = out & out.wrapping_neg();
                out &= out - 1;
                let mut add = full & !a;
                while add != 0 {
                    let gain = add & add.wrapping_neg();
                    add &= add - 1;
                    if family.contains((a & !drop) | gain) {
                        deg += 1;
                    }
                }
            }
            deg
        })
        .sum();
    Ok(twice / 2)
}

/// Gap encoding of a `k`-set: entry `j` is the number of non-elements
/// smaller than the `j`-th smallest element. Nondecreasing, within
/// `[0, n - k]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HarperVector(Vec<u32>);

impl HarperVector {
    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Coordinate sum.
    pub fn rank(&self) -> u64 {
        self.0.iter().map(|&y| y as u64).sum()
    }

    /// Vectors obtained by lowering one coordinate by 1 while staying
    /// nondecreasing and nonnegative.
    pub fn lower_covers(&self) -> Vec<HarperVector> {
        let y = &self.0;
        (0..y.len())
            .filter(|&j| y[j] > 0 && (j == 0 || y[j - 1] < y[j]))
            .map(|j| {
                let mut z = y.clone();
                z[j] -= 1;
                HarperVector(z)
            })
            .collect()
    }

    /// Inverse of [`harper_vector`].
    pub fn to_mask(&self) -> Mask {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &y)| acc | bits::element_bit(y + j as u32 + 1))
    }
}

impl fmt::Display for HarperVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Encodes a `k`-subset of `[n]`.
pub fn harper_vector(set: Mask, n: u32, k: u32) -> Result<HarperVector> {
    if set.count_ones() != k {
        return Err(Error::Precondition(format!(
            "set {:?} does not have size {k}",
            bits::elements(set)
        )));
    }
    if set & !bits::full_mask(n) != 0 {
        return Err(Error::Range(format!(
            "set {:?} leaves [{n}]",
            bits::elements(set)
        )));
    }
    Ok(HarperVector(
        bits::elements(set)
            .into_iter()
            .enumerate()
            .map(|(j, e)| e - 1 - j as u32)
            .collect(),
    ))
}

pub fn rank(y: &HarperVector) -> u64 {
    y.rank()
}

/// True iff the encodings of the members are closed under lowering
/// coordinates (within nondecreasing vectors).
pub fn is_downset_encoding(family: &SetFamily, k: u32) -> Result<bool> {
    require_uniform(family, k)?;
    let n = family.n();
    for m in family.iter() {
        let y = harper_vector(m, n, k)?;
        if y.lower_covers()
            .iter()
            .any(|z| !family.contains(z.to_mask()))
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Edge count of a left-shifted `k`-uniform family as the sum of encoding
/// ranks.
pub fn edges_via_rank(family: &SetFamily, k: u32) -> Result<u64> {
    require_uniform(family, k)?;
    if !family.is_left_shifted() {
        return Err(Error::Precondition("family is not left shifted".into()));
    }
    let n = family.n();
    family
        .iter()
        .map(|m| harper_vector(m, n, k).map(|y| y.rank()))
        .sum()
}

/// `e(F) <= δ m n^2`, with hypothesis `m < C(⌊δn⌋, ⌊δn/2⌋)`.
pub fn isoperi_check(family: &SetFamily, k: u32, delta: f64) -> Result<BoundReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Argument(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let edges = hamming_edges(family, k)?;
    let n = family.n();
    let m = family.len() as u128;
    let top = (delta * n as f64).floor() as u64;
    let cap = binomial(top, (delta * n as f64 / 2.0).floor() as u64).unwrap_or(u128::MAX);
    let report = BoundReport::new(
        "isoperimetry",
        n,
        m,
        delta * m as f64 * (n as f64).powi(2),
        Relation::Le,
    )
    .param("k", k)
    .param("delta", delta)
    .param("cap", cap)
    .measured(edges as f64, 0.0, 1.0);
    Ok(if m < cap {
        report
    } else {
        report.hypothesis_not_met("m < C(floor(delta n), floor(delta n / 2))")
    })
}

/// Lower bound `l (2u - l) / 2` on the union of `l` sets of size `u` with
/// pairwise intersections at most 1.
pub fn union_lower_bound(l: u64, u: u64) -> Result<f64> {
    if l > u {
        return Err(Error::Hypothesis(format!("need l <= u, got l={l}, u={u}")));
    }
    Ok(l as f64 * (2.0 * u as f64 - l as f64) / 2.0)
}

/// Threshold rule for the census.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensusMode {
    /// A set at layer `l` is bad with fewer than `(1 - ε)(l - 1)` good
    /// `(l-1)`-subsets.
    Epsilon(f64),
    /// A set at layer `l` is bad with fewer than `l - 2√m` good subsets.
    Sqrt,
}

impl fmt::Display for CensusMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CensusMode::Epsilon(e) => write!(f, "epsilon={e}"),
            CensusMode::Sqrt => f.write_str("sqrt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerCensus {
    pub layer: u32,
    pub threshold: f64,
    pub bad_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub n: u32,
    pub k: u32,
    /// Sets of layer `k` missing from the censused family.
    pub m: u128,
    pub mode: CensusMode,
    /// Layers `k + 1 ..= n`, in order.
    pub layers: Vec<LayerCensus>,
    /// `√m` for the first layer (sqrt mode only).
    pub first_layer_bound: Option<f64>,
    /// `2√m` over all layers above `k` (sqrt mode only).
    pub cumulative_bound: Option<f64>,
    pub verdict: Verdict,
}

impl CensusReport {
    pub fn first_layer_bad(&self) -> u64 {
        self.layers.first().map_or(0, |l| l.bad_count)
    }

    pub fn cumulative_bad(&self) -> u64 {
        self.layers.iter().map(|l| l.bad_count).sum()
    }

    /// The two hard bounds as report rows (sqrt mode), or one unevaluated
    /// row per layer count (epsilon mode).
    pub fn bound_reports(&self) -> Vec<BoundReport> {
        let tag = |r: BoundReport| r.param("k", self.k).param("mode", self.mode);
        match (self.first_layer_bound, self.cumulative_bound) {
            (Some(first), Some(cum)) => {
                let rows = [
                    ("census-first-layer", self.first_layer_bad(), first),
                    ("census-cumulative", self.cumulative_bad(), cum),
                ];
                rows.into_iter()
                    .map(|(name, lhs, rhs)| {
                        let r = tag(BoundReport::new(name, self.n, self.m, rhs, Relation::Le));
                        if self.verdict == Verdict::HypothesisNotMet {
                            let mut r = r.hypothesis_not_met("m <= k^2");
                            r.lhs = Some(lhs as f64);
                            r
                        } else {
                            r.measured(lhs as f64, 0.0, 1.0)
                        }
                    })
                    .collect()
            }
            _ => self
                .layers
                .iter()
                .map(|l| {
                    let mut r = tag(BoundReport::new(
                        format!("census-layer-{}", l.layer),
                        self.n,
                        self.m,
                        0.0,
                        Relation::Le,
                    ))
                    .param("threshold", l.threshold);
                    r.lhs = Some(l.bad_count as f64);
                    r
                })
                .collect(),
        }
    }
}

/// Counts, layer by layer above `k`, the sets with fewer good subsets one
/// layer down than the mode's threshold. Layer `k + 1` is measured against
/// `layer_family`; each higher layer against the non-bad sets of the layer
/// below it.
pub fn bad_superset_census(
    layer_family: &SetFamily,
    k: u32,
    mode: CensusMode,
) -> Result<CensusReport> {
    require_uniform(layer_family, k)?;
    let n = layer_family.n();
    if n > 30 {
        return Err(Error::Range(format!(
            "census enumerates whole layers; n={n} is too large"
        )));
    }
    if let CensusMode::Epsilon(e) = mode {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::Argument(format!(
                "epsilon must lie in [0, 1], got {e}"
            )));
        }
    }
    let layer_size = binomial(n as u64, k as u64).expect("n <= 30");
    let m = layer_size - layer_family.len() as u128;
    let root = (m as f64).sqrt();

    let mut good: Vec<Mask> = layer_family.sets().to_vec();
    let mut layers = Vec::new();
    for l in k + 1..=n {
        let threshold = match mode {
            CensusMode::Epsilon(e) => (1.0 - e) * (l - 1) as f64,
            CensusMode::Sqrt => l as f64 - 2.0 * root,
        };
        // `good` stays sorted: it is filtered from a colex-ordered layer
        let next: Vec<(Mask, bool)> = layer_masks(n, l)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|g| {
                let mut rest = g;
                let mut hits = 0u32;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    rest &= rest - 1;
                    if good.binary_search(&(g & !bit)).is_ok() {
                        hits += 1;
                    }
                }
                (g, (hits as f64) < threshold)
            })
            .collect();
        let bad_count = next.iter().filter(|(_, bad)| *bad).count() as u64;
        layers.push(LayerCensus {
            layer: l,
            threshold,
            bad_count,
        });
        good = next
            .into_iter()
            .filter(|(_, bad)| !bad)
            .map(|(g, _)| g)
            .collect();
    }

    let (first_layer_bound, cumulative_bound, verdict) = match mode {
        CensusMode::Epsilon(_) => (None, None, Verdict::NotEvaluated),
        CensusMode::Sqrt => {
            let first = layers.first().map_or(0, |l| l.bad_count) as f64;
            let cum = layers.iter().map(|l| l.bad_count).sum::<u64>() as f64;
            let verdict = if m > (k as u128).pow(2) {
                Verdict::HypothesisNotMet
            } else if first <= root && cum <= 2.0 * root {
                Verdict::Holds
            } else {
                Verdict::Violated
            };
            (Some(root), Some(2.0 * root), verdict)
        }
    };
    Ok(CensusReport {
        n,
        k,
        m,
        mode,
        layers,
        first_layer_bound,
        cumulative_bound,
        verdict,
    })
}
