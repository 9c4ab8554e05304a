//! Exhaustive searches over small Boolean lattices: the largest family free
//! of a poset, and the fewest copies of a poset among families of a given
//! size.
//!
//! Candidates are the `2^n` subsets in canonical order, and families are
//! compared as sorted index sequences, so "lexicographically least" is well
//! defined and independent of how the search is split across workers.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{binomial, Mask};
use crate::error::{Error, Result};
use crate::extremal::{build_construction, f, sigma, sigma_star, Strategy};
use crate::family::{FamilyJson, SetFamily};
use crate::poset::{count_copies_fast, generic_pivot_copies, pivot_butterflies, Poset, PosetKind};
use crate::random::{random_superset, rng_from_seed};
use crate::report::{BoundReport, Relation};

/// Largest `n` searched exhaustively without an explicit opt-in.
pub const FREE_EXHAUSTIVE_N: u32 = 4;
/// Largest `n` searched exhaustively at all.
pub const MAX_EXHAUSTIVE_N: u32 = 5;
/// Largest `n` for the greedy fallback of [`max_p_free`].
pub const MAX_HEURISTIC_N: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    MaxFree,
    MinCopies,
}

/// A family attaining a search optimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub family: SetFamily,
    pub objective: BigUint,
    pub kind: WitnessKind,
    /// Set when the search was not exhaustive.
    pub heuristic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessJson {
    pub kind: WitnessKind,
    pub objective: String,
    pub heuristic: bool,
    pub family: FamilyJson,
}

impl Witness {
    /// Recomputes the objective from the family.
    pub fn reevaluate(&self, poset: &Poset) -> BigUint {
        match self.kind {
            WitnessKind::MaxFree => BigUint::from(self.family.len()),
            WitnessKind::MinCopies => count_copies_fast(&self.family, poset).value().clone(),
        }
    }

    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            kind: self.kind,
            objective: self.objective.to_string(),
            heuristic: self.heuristic,
            family: self.family.to_json(),
        }
    }
}

/// Copies of `poset` using `pivot` plus members of `base`.
fn pivot_copies(base: &[Mask], pivot: Mask, poset: &Poset, stop_at_first: bool) -> u128 {
    match poset.kind() {
        PosetKind::Butterfly => pivot_butterflies(base, pivot, stop_at_first),
        _ => generic_pivot_copies(base, pivot, poset),
    }
}

fn candidates(n: u32) -> Vec<Mask> {
    SetFamily::power_set(n).expect("n checked").sets().to_vec()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    /// Permit the exhaustive `min_copies` search at `n = 5`.
    pub allow_large: bool,
}

fn scale_gate(n: u32, opts: SearchOptions) -> Result<()> {
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::Scale(format!(
            "exhaustive search is limited to n <= {MAX_EXHAUSTIVE_N}, got n={n}"
        )));
    }
    if n > FREE_EXHAUSTIVE_N && !opts.allow_large {
        return Err(Error::Scale(format!(
            "n={n} needs an explicit opt-in (allow_large / --allow-large)"
        )));
    }
    Ok(())
}

struct FreeSearch<'a> {
    cands: &'a [Mask],
    poset: &'a Poset,
    chosen: Vec<Mask>,
    best: Vec<Mask>,
}

impl FreeSearch<'_> {
    fn run(&mut self, next: usize) {
        let remaining = self.cands.len() - next;
        if self.chosen.len() + remaining <= self.best.len() {
            return;
        }
        if next == self.cands.len() {
            self.best = self.chosen.clone();
            return;
        }
        let c = self.cands[next];
        if pivot_copies(&self.chosen, c, self.poset, true) == 0 {
            self.chosen.push(c);
            self.run(next + 1);
            self.chosen.pop();
        }
        self.run(next + 1);
    }
}

/// A largest family in `2^[n]` containing no copy of `poset`.
///
/// Exhaustive for `n <= 5`, returning the lexicographically least optimum.
/// For `5 < n <= 12` a greedy pass from the middle layers outward gives a
/// lower bound flagged `heuristic`.
pub fn max_p_free(n: u32, poset: &Poset) -> Result<Witness> {
    if n == 0 || n > crate::bits::MAX_N {
        return Err(Error::Range(format!("n={n} outside 1..=63")));
    }
    if n > MAX_EXHAUSTIVE_N {
        if n > MAX_HEURISTIC_N {
            return Err(Error::Scale(format!(
                "no search available for n={n} (limit {MAX_HEURISTIC_N})"
            )));
        }
        let family = greedy_free(n, poset)?;
        return Ok(Witness {
            objective: BigUint::from(family.len()),
            family,
            kind: WitnessKind::MaxFree,
            heuristic: true,
        });
    }
    let cands = candidates(n);
    let seed = greedy_free(n, poset)?;
    let mut search = FreeSearch {
        cands: &cands,
        poset,
        chosen: Vec::new(),
        // placeholder one below the greedy size: the first family found of
        // each larger size replaces it, so ties keep the lex-least
        best: vec![0; seed.len().saturating_sub(1)],
    };
    search.run(0);
    let family = SetFamily::new(n, search.best)?;
    Ok(Witness {
        objective: BigUint::from(family.len()),
        family,
        kind: WitnessKind::MaxFree,
        heuristic: false,
    })
}

fn greedy_free(n: u32, poset: &Poset) -> Result<SetFamily> {
    let mut order = candidates(n);
    order.sort_by_key(|&m| {
        (
            (2 * m.count_ones() as i64 - n as i64).abs(),
            crate::bits::canonical_key(m),
        )
    });
    let mut chosen = Vec::new();
    for c in order {
        if pivot_copies(&chosen, c, poset, true) == 0 {
            chosen.push(c);
        }
    }
    SetFamily::new(n, chosen)
}

/// Lexicographic rank of a strictly increasing index sequence among all
/// `k`-combinations of `0..universe`.
pub fn combination_rank(idx: &[usize], universe: usize) -> u128 {
    let k = idx.len();
    let mut rank = 0u128;
    let mut start = 0;
    for (pos, &v) in idx.iter().enumerate() {
        for skipped in start..v {
            rank += binom(universe - skipped - 1, k - pos - 1);
        }
        start = v + 1;
    }
    rank
}

/// Inverse of [`combination_rank`].
pub fn combination_unrank(mut rank: u128, k: usize, universe: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut v = 0;
    for pos in 0..k {
        loop {
            let sub = binom(universe - v - 1, k - pos - 1);
            if rank < sub {
                break;
            }
            rank -= sub;
            v += 1;
        }
        out.push(v);
        v += 1;
    }
    out
}

fn binom(n: usize, k: usize) -> u128 {
    binomial(n as u64, k as u64).expect("small binomial")
}

/// Result of searching one rank interval; also the checkpoint file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub rank_start: u64,
    pub rank_end: u64,
    pub best_objective: Option<u64>,
    pub best_family: Option<FamilyJson>,
}

impl Checkpoint {
    pub fn from_json_str(text: &str) -> Result<Checkpoint> {
        let cp: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("checkpoint: {e}")))?;
        if cp.rank_start > cp.rank_end {
            return Err(Error::Validation(
                "checkpoint rank_start exceeds rank_end".into(),
            ));
        }
        if cp.best_objective.is_some() != cp.best_family.is_some() {
            return Err(Error::Validation(
                "checkpoint needs both best_objective and best_family, or neither".into(),
            ));
        }
        if let Some(fam) = &cp.best_family {
            SetFamily::from_json(fam)?;
        }
        Ok(cp)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

#[derive(Debug, Clone, Default)]
pub struct MinCopiesOptions {
    pub search: SearchOptions,
    /// Number of rank intervals; defaults to `min(total, 64)`.
    pub chunks: Option<usize>,
    /// Directory for per-interval checkpoint files; finished intervals found
    /// there are not searched again.
    pub checkpoint_dir: Option<PathBuf>,
}

struct ChunkSearch<'a> {
    cands: &'a [Mask],
    poset: &'a Poset,
    size: usize,
    lo: u128,
    hi: u128,
    shared: &'a AtomicU64,
    chosen: Vec<Mask>,
    idx: Vec<usize>,
    best: Option<(u64, Vec<usize>)>,
}

impl ChunkSearch<'_> {
    fn bound(&self) -> u64 {
        self.best.as_ref().map_or(u64::MAX, |b| b.0)
    }

    fn run(&mut self, start: usize, mut rank: u128, count: u64) {
        let pos = self.chosen.len();
        if pos == self.size {
            if count < self.bound() {
                self.best = Some((count, self.idx.clone()));
                self.shared.fetch_min(count, Ordering::Relaxed);
            }
            return;
        }
        let n_cands = self.cands.len();
        for v in start..=n_cands - (self.size - pos) {
            let sub = binom(n_cands - v - 1, self.size - pos - 1);
            if rank >= self.hi {
                return;
            }
            if rank + sub > self.lo {
                let add = pivot_copies(&self.chosen, self.cands[v], self.poset, false) as u64;
                let c = count.saturating_add(add);
                // ties with another worker's best are kept: they may be
                // lexicographically smaller
                if c < self.bound() && c <= self.shared.load(Ordering::Relaxed) {
                    self.chosen.push(self.cands[v]);
                    self.idx.push(v);
                    self.run(v + 1, rank, c);
                    self.chosen.pop();
                    self.idx.pop();
                }
            }
            rank += sub;
        }
    }
}

fn poset_tag(poset: &Poset) -> String {
    match poset.kind() {
        PosetKind::Custom => {
            let rel: Vec<String> = poset
                .relations()
                .iter()
                .map(|(a, b)| format!("{a}.{b}"))
                .collect();
            format!("custom{}_{}", poset.size(), rel.join("_"))
        }
        _ => poset.to_string().replace(':', ""),
    }
}

fn checkpoint_path(dir: &Path, n: u32, size: usize, poset: &Poset, lo: u128, hi: u128) -> PathBuf {
    dir.join(format!(
        "min-copies-n{n}-s{size}-{}-{lo}-{hi}.json",
        poset_tag(poset)
    ))
}

/// Fewest copies of `poset` over all `size`-member families in `2^[n]`,
/// with the lexicographically least minimizer.
///
/// Exhaustive: `n <= 4` freely, `n = 5` behind `allow_large`, larger `n`
/// is a scale error. The search space is split into rank intervals searched
/// independently; the result does not depend on the interval count or the
/// thread count.
pub fn min_copies(n: u32, size: usize, poset: &Poset, opts: &MinCopiesOptions) -> Result<Witness> {
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    scale_gate(n, opts.search)?;
    let cands = candidates(n);
    if size > cands.len() {
        return Err(Error::Argument(format!("size {size} exceeds 2^{n}")));
    }
    let total = binom(cands.len(), size);
    let chunks = opts.chunks.unwrap_or(64).clamp(1, total as usize);
    let shared = AtomicU64::new(u64::MAX);
    if let Some(dir) = &opts.checkpoint_dir {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }

    let results: Vec<Option<(u64, Vec<usize>)>> = (0..chunks)
        .into_par_iter()
        .map(|i| -> Result<Option<(u64, Vec<usize>)>> {
            let lo = total * i as u128 / chunks as u128;
            let hi = total * (i as u128 + 1) / chunks as u128;
            let path = opts
                .checkpoint_dir
                .as_ref()
                .map(|d| checkpoint_path(d, n, size, poset, lo, hi));
            if let Some(p) = path.as_ref().filter(|p| p.exists()) {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                let cp = Checkpoint::from_json_str(&text)?;
                if (cp.rank_start as u128, cp.rank_end as u128) != (lo, hi) {
                    return Err(Error::Validation(format!(
                        "{} covers another interval",
                        p.display()
                    )));
                }
                return Ok(match (cp.best_objective, cp.best_family) {
                    (Some(obj), Some(fam)) => {
                        let family = SetFamily::from_json(&fam)?;
                        if family.len() != size {
                            return Err(Error::Validation(format!(
                                "{}: wrong family size",
                                p.display()
                            )));
                        }
                        let idx = family
                            .iter()
                            .map(|m| {
                                cands
                                    .binary_search_by_key(&crate::bits::canonical_key(m), |&c| {
                                        crate::bits::canonical_key(c)
                                    })
                                    .expect("in power set")
                            })
                            .collect();
                        shared.fetch_min(obj, Ordering::Relaxed);
                        Some((obj, idx))
                    }
                    _ => None,
                });
            }
            let mut search = ChunkSearch {
                cands: &cands,
                poset,
                size,
                lo,
                hi,
                shared: &shared,
                chosen: Vec::with_capacity(size),
                idx: Vec::with_capacity(size),
                best: None,
            };
            search.run(0, 0, 0);
            if let Some(p) = path {
                let cp = Checkpoint {
                    rank_start: lo as u64,
                    rank_end: hi as u64,
                    best_objective: search.best.as_ref().map(|b| b.0),
                    best_family: search.best.as_ref().map(|b| {
                        SetFamily::new(n, b.1.iter().map(|&i| cands[i]))
                            .expect("valid")
                            .to_json()
                    }),
                };
                fs::write(&p, cp.to_json_string())
                    .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            }
            Ok(search.best)
        })
        .collect::<Result<_>>()?;

    let (objective, idx) = results
        .into_iter()
        .flatten()
        .min()
        .expect("the interval holding the optimum always reports it");
    Ok(Witness {
        family: SetFamily::new(n, idx.iter().map(|&i| cands[i]))?,
        objective: BigUint::from(objective),
        kind: WitnessKind::MinCopies,
        heuristic: false,
    })
}

/// Random-superset audit of the lower bound `(|F| - Σ(n,2)) f(n)` on
/// butterflies, and of the exact count of the residue construction.
///
/// For each `E` in `0..=e_max` emits a `prop1-random` row (minimum
/// butterfly count over `trials` random supersets of a random extremal
/// family, against `E f(n)`) and a `prop1-construction` row (exact count of
/// the construction, against `E f(n)`).
pub fn audit_prop1(n: u32, e_max: usize, trials: usize, seed: u64) -> Result<Vec<BoundReport>> {
    if !(2..=12).contains(&n) {
        return Err(Error::Range(format!("audit needs 2 <= n <= 12, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let extremal = sigma_star(n, 2)?;
    let base_size = sigma(n, 2)?;
    let room = (1u128 << n) - base_size;
    let cost = f(n);
    let mut out = Vec::new();
    for e in 0..=e_max {
        let target = e as u128 * cost;
        let row = BoundReport::new("prop1-random", n, e as u128, target as f64, Relation::Ge)
            .param("trials", trials)
            .param("seed", seed);
        if e as u128 > room {
            out.push(row.hypothesis_not_met("E <= 2^n - sigma(n,2)"));
        } else {
            let mut least: Option<u128> = None;
            for _ in 0..trials {
                let base = &extremal[rng.gen_range(0..extremal.len())];
                let fam = random_superset(&mut rng, base, e)?;
                let c = crate::poset::count_butterflies(&fam)
                    .to_u128()
                    .expect("fits");
                least = Some(least.map_or(c, |l| l.min(c)));
            }
            out.push(match least {
                Some(c) => row.measured_exact(c, target),
                None => row,
            });
        }

        let row = BoundReport::new(
            "prop1-construction",
            n,
            e as u128,
            target as f64,
            Relation::Eq,
        )
        .param("strategy", Strategy::Residue);
        out.push(match build_construction(n, e, Strategy::Residue) {
            Ok(fam) => {
                let c = crate::poset::count_butterflies(&fam)
                    .to_u128()
                    .expect("fits");
                row.measured_exact(c, target)
            }
            Err(Error::Capacity { achieved, .. }) => row
                .param("capacity", achieved)
                .hypothesis_not_met("E within the residue layer"),
            Err(e) => return Err(e),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;

    #[test]
    fn ranks_roundtrip() {
        let universe = 9;
        let k = 4;
        let total = binom(universe, k);
        for r in 0..total {
            let idx = combination_unrank(r, k, universe);
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(combination_rank(&idx, universe), r);
        }
        assert_eq!(combination_unrank(0, 3, 5), vec![0, 1, 2]);
        assert_eq!(combination_unrank(9, 3, 5), vec![2, 3, 4]);
    }

    #[test]
    fn max_free_examples() {
        let b = Poset::butterfly();
        let w = max_p_free(4, &b).unwrap();
        assert_eq!(w.objective, BigUint::from(10u32));
        assert!(sigma_star(4, 2).unwrap().contains(&w.family));
        assert!(!w.heuristic);

        let w = max_p_free(2, &b).unwrap();
        assert_eq!(w.objective, BigUint::from(4u32));
        assert_eq!(w.family, SetFamily::power_set(2).unwrap());

        let w = max_p_free(3, &Poset::chain(2).unwrap()).unwrap();
        assert_eq!(w.objective, BigUint::from(3u32));
        assert_eq!(w.reevaluate(&b), w.objective);
    }

    #[test]
    fn max_free_gating() {
        let b = Poset::butterfly();
        let w = max_p_free(5, &b).unwrap();
        assert_eq!(w.objective, BigUint::from(sigma(5, 2).unwrap()));
        let w = max_p_free(6, &b).unwrap();
        assert!(w.heuristic);
        assert!(w.objective >= BigUint::from(sigma(6, 2).unwrap()));
        assert!(matches!(max_p_free(64, &b), Err(Error::Range(_))));
    }

    #[test]
    fn min_copies_examples() {
        let b = Poset::butterfly();
        let opts = MinCopiesOptions::default();
        assert_eq!(
            min_copies(4, 10, &b, &opts).unwrap().objective,
            BigUint::from(0u32)
        );
        let w = min_copies(2, 4, &b, &opts).unwrap();
        assert_eq!(w.objective, BigUint::from(0u32));
        let w = min_copies(4, 11, &b, &opts).unwrap();
        assert!(w.objective <= BigUint::from(3u32));
        assert_eq!(w.reevaluate(&b), w.objective);
        assert!(matches!(min_copies(6, 3, &b, &opts), Err(Error::Scale(_))));
        assert!(matches!(min_copies(5, 3, &b, &opts), Err(Error::Scale(_))));
    }

    #[test]
    fn min_copies_ignores_chunking() {
        let b = Poset::butterfly();
        let one = min_copies(
            4,
            12,
            &b,
            &MinCopiesOptions {
                chunks: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let many = min_copies(
            4,
            12,
            &b,
            &MinCopiesOptions {
                chunks: Some(37),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn checkpoints_resume() {
        let dir = std::env::temp_dir().join(format!("posetlab-cp-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let b = Poset::butterfly();
        let opts = MinCopiesOptions {
            chunks: Some(5),
            checkpoint_dir: Some(dir.clone()),
            ..Default::default()
        };
        let first = min_copies(4, 11, &b, &opts).unwrap();
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 5);
        let again = min_copies(4, 11, &b, &opts).unwrap();
        assert_eq!(first, again);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn checkpoint_parsing() {
        let cp = Checkpoint::from_json_str(
            r#"{"rank_start":0,"rank_end":4,"best_objective":1,"best_family":{"n":2,"sets":[[1]]}}"#,
        )
        .unwrap();
        assert_eq!(cp.best_objective, Some(1));
        assert!(Checkpoint::from_json_str(
            r#"{"rank_start":5,"rank_end":4,"best_objective":null,"best_family":null}"#
        )
        .is_err());
        assert!(Checkpoint::from_json_str(
            r#"{"rank_start":0,"rank_end":4,"best_objective":1,"best_family":null}"#
        )
        .is_err());
        assert!(matches!(
            Checkpoint::from_json_str("{"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn audit_examples() {
        let rows = audit_prop1(4, 1, 5, 11).unwrap();
        assert!(rows.iter().all(|r| r.verdict == Verdict::Holds), "{rows:?}");
        let cons = rows
            .iter()
            .find(|r| r.name == "prop1-construction" && r.m == 1)
            .unwrap();
        assert_eq!(cons.lhs, Some(3.0));
        let rows = audit_prop1(6, 2, 3, 5).unwrap();
        let cons = rows
            .iter()
            .find(|r| r.name == "prop1-construction" && r.m == 2)
            .unwrap();
        assert_eq!(cons.lhs, Some(24.0));
        assert!(rows.iter().all(|r| r.verdict == Verdict::Holds));
        let rows = audit_prop1(5, 0, 2, 1).unwrap();
        assert!(rows.iter().all(|r| r.lhs == Some(0.0)));
    }
}
