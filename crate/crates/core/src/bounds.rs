//! Real-argument binomials, the shadow-deficit functions `x(l, m)` and
//! `g(l, m)`, and right-hand-side evaluators for the stability inequalities.
//!
//! `x(l, m)` is the root `x >= l - 1` of `C(x, l) = m`, and
//! `g(l, m) = C(x, l-1) - C(x, l) = C(x, l-1) - m`. For `m = 0` both the
//! shadow bound and `g` are taken to be 0 (the empty family).

use std::fmt;
use std::str::FromStr;

use crate::bits::binomial;
use crate::error::{Error, Result};
use crate::extremal::sigma;
use crate::report::{BoundReport, Relation, Verdict};

/// Relative slack used when comparing two evaluations of `x` or `g`.
pub const REL_TOL: f64 = 1e-9;

/// `x (x-1) ... (x-l+1) / l!`. `gen_binom(x, 0) = 1`.
pub fn gen_binom(x: f64, l: u32) -> f64 {
    let mut value = 1.0f64;
    for i in 0..l {
        // multiply before dividing: stays exact while integer x keeps the
        // running value below 2^53
        value = value * (x - i as f64) / (i as f64 + 1.0);
    }
    value
}

/// Root `x >= l - 1` of `gen_binom(x, l) = m`, by bisection on
/// `[l - 1, l + m]`. `x_of(l, 0) = l - 1`.
pub fn x_of(l: u32, m: u128) -> f64 {
    assert!(l >= 1, "x_of needs l >= 1");
    let lo0 = l as f64 - 1.0;
    if m == 0 {
        return lo0;
    }
    let target = m as f64;
    let (mut lo, mut hi) = (lo0, l as f64 + target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gen_binom(mid, l) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs() * 1e-3 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `C(x, l-1) - m` at `x = x_of(l, m)`.
pub fn g_of(l: u32, m: u128) -> f64 {
    if m == 0 {
        return 0.0;
    }
    gen_binom(x_of(l, m), l - 1) - m as f64
}

/// The same quantity via `((2l - x - 1) / (x - l + 1)) · m`.
pub fn g_of_ratio_form(l: u32, m: u128) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let x = x_of(l, m);
    let l = l as f64;
    (2.0 * l - x - 1.0) / (x - l + 1.0) * m as f64
}

/// Size of the terms subtracted inside `g(l, m)`; the natural scale for
/// comparing two evaluations of `g`.
pub fn g_scale(l: u32, m: u128) -> f64 {
    if m == 0 {
        return 1.0;
    }
    gen_binom(x_of(l, m), l - 1).abs().max(m as f64)
}

/// Certified lower bound on the `(l-1)`-shadow of any `m` distinct `l`-sets:
/// `C(x_of(l, m), l - 1)`, and 0 for `m = 0`.
pub fn lovasz_shadow_lb(l: u32, m: u128) -> f64 {
    if m == 0 {
        return 0.0;
    }
    gen_binom(x_of(l, m), l - 1)
}

fn binom_u128(n: u64, k: u64) -> Option<u128> {
    binomial(n, k)
}

fn within(x: f64, threshold: f64) -> bool {
    x <= threshold + REL_TOL * threshold.abs().max(1.0)
}

/// Smallest `l` from which `g(l, ·)` is certified increasing on
/// `x(l, m) <= (2 - eps) l`: the log-derivative of `g` in `x` is at least
/// `(l-1)/x - 1/(2l-1-x)`, positive once `eps l^2 - 3l + 1 > 0`.
pub fn monotone_from(eps: f64) -> u32 {
    assert!(eps > 0.0 && eps < 2.0, "eps must lie in (0, 2)");
    ((3.0 + (9.0 - 4.0 * eps).sqrt()) / (2.0 * eps)).floor() as u32 + 1
}

/// Default `eps` for the monotonicity item of [`prop_change_report`].
pub const MONOTONE_EPS: f64 = 0.5;

/// Evaluates the six structural properties of `x` and `g` at `(l, m)`,
/// using `m1 <= m` as the split point for superadditivity and as the
/// smaller argument for monotonicity. The threshold item is reported twice:
/// under the exact algebraic threshold `x <= (4l-3)/3`, and (advisory)
/// under the looser `x <= 4l/3`, where it can fail.
pub fn prop_change_report(l: u32, m: u128, m1: u128) -> Result<Vec<BoundReport>> {
    if l == 0 {
        return Err(Error::Argument("l must be at least 1".into()));
    }
    if m1 > m {
        return Err(Error::Argument(format!("need m1 <= m, got m1={m1}, m={m}")));
    }
    let lf = l as f64;
    let x = x_of(l, m);
    let g = g_of(l, m);
    let scale = g_scale(l, m);
    let mut out = Vec::with_capacity(7);

    let r = BoundReport::new("prop2-i", l, m, x_of(l + 1, m), Relation::Le).param("x", x);
    out.push(match binom_u128(2 * l as u64, l as u64) {
        Some(cap) if m <= cap => r.measured(x, REL_TOL, 1.0),
        _ => r.hypothesis_not_met("m <= C(2l, l)"),
    });

    let r = BoundReport::new("prop2-ii", l, m, 0.0, Relation::Ge).param("x", x);
    out.push(if within(x, 2.0 * lf - 1.0) {
        r.measured(g, REL_TOL, scale)
    } else {
        r.hypothesis_not_met("x(l,m) <= 2l-1")
    });

    let split = g_of(l, m1) + g_of(l, m - m1);
    let r = BoundReport::new("prop2-iii", l, m, g, Relation::Ge).param("m1", m1);
    out.push(if within(x, 2.0 * lf - 1.0) {
        let s = scale.max(g_scale(l, m1)).max(g_scale(l, m - m1));
        r.measured(split, REL_TOL, s)
    } else {
        r.hypothesis_not_met("x(l,m) <= 2l-1")
    });

    let r = BoundReport::new("prop2-iv", l, m, g_of(l + 1, m), Relation::Le);
    out.push(match binom_u128(2 * l as u64 - 1, l as u64) {
        Some(cap) if m <= cap => r.measured(g, REL_TOL, scale.max(g_scale(l + 1, m))),
        _ => r.hypothesis_not_met("m <= C(2l-1, l)"),
    });

    let l0 = monotone_from(MONOTONE_EPS);
    let r = BoundReport::new("prop2-v", l, m, g, Relation::Le)
        .param("m1", m1)
        .param("eps", MONOTONE_EPS)
        .param("l0", l0);
    out.push(if l >= l0 && within(x, (2.0 - MONOTONE_EPS) * lf) {
        r.measured(g_of(l, m1), REL_TOL, scale.max(g_scale(l, m1)))
    } else {
        r.hypothesis_not_met("l >= l0(eps) and x(l,m) <= (2-eps)l")
    });

    let exact = (4.0 * lf - 3.0) / 3.0;
    let r = BoundReport::new("prop2-vi", l, m, 2.0 * m as f64, Relation::Ge)
        .param("x", x)
        .param("threshold", exact);
    out.push(if within(x, exact) {
        r.measured(g, REL_TOL, scale)
    } else {
        r.hypothesis_not_met("x(l,m) <= (4l-3)/3")
    });

    let literal = 4.0 * lf / 3.0;
    let r = BoundReport::new("prop2-vi-literal", l, m, 2.0 * m as f64, Relation::Ge)
        .param("x", x)
        .param("threshold", literal)
        .advisory();
    out.push(if within(x, literal) {
        r.measured(g, REL_TOL, scale)
    } else {
        r.hypothesis_not_met("x(l,m) <= 4l/3")
    });

    Ok(out)
}

/// `m` values for the grid at `l`: `points` log-spaced values in
/// `[1, 2 C(2l, l)]` plus the hypothesis boundaries `C(2l-1, l)` and
/// `C(2l, l)`, sorted and deduplicated.
pub fn grid_masses(l: u32, points: usize) -> Vec<u128> {
    let cap = binom_u128(2 * l as u64, l as u64).expect("l <= 60");
    let top = (2 * cap) as f64;
    let mut ms: Vec<u128> = (0..points)
        .map(|j| {
            let t = if points > 1 {
                j as f64 / (points - 1) as f64
            } else {
                0.0
            };
            (top.ln() * t).exp().round().max(1.0) as u128
        })
        .collect();
    ms.push(binom_u128(2 * l as u64 - 1, l as u64).expect("l <= 60"));
    ms.push(cap);
    ms.sort_unstable();
    ms.dedup();
    ms
}

/// [`prop_change_report`] over `l_min..=l_max` and [`grid_masses`], with
/// split point `m1 = ⌊m/3⌋`.
pub fn prop_grid(l_min: u32, l_max: u32, points: usize) -> Result<Vec<BoundReport>> {
    if l_min < 1 || l_min > l_max || l_max > 60 {
        return Err(Error::Argument(format!(
            "grid needs 1 <= l_min <= l_max <= 60, got {l_min}:{l_max}"
        )));
    }
    let mut out = Vec::new();
    for l in l_min..=l_max {
        for m in grid_masses(l, points) {
            out.extend(prop_change_report(l, m, m / 3)?);
        }
    }
    Ok(out)
}

/// Named right-hand sides `Σ(n,2) - (deficit)` of the stability bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityBound {
    /// `Σ(n,2) - 1.9 m / n` for 2-Sperner families far from the middle.
    WeakStab,
    /// `Σ(n,2) - g(⌈n/2⌉ + 1, m)` for 2-Sperner families.
    SpernerStab,
    /// `Σ(n,2) - m / 4` for butterfly-free families.
    ButterflyStab4,
    /// `Σ(n,2) - m / 6` for butterfly-free families.
    ButterflyStab6,
    /// `Σ(n,2) - |M| / 3` with `m = |M|` the number of middle sets.
    CorButt,
}

impl StabilityBound {
    pub const ALL: [StabilityBound; 5] = [
        StabilityBound::WeakStab,
        StabilityBound::SpernerStab,
        StabilityBound::ButterflyStab4,
        StabilityBound::ButterflyStab6,
        StabilityBound::CorButt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StabilityBound::WeakStab => "weakstab",
            StabilityBound::SpernerStab => "spernerstab",
            StabilityBound::ButterflyStab4 => "butterflystab_4",
            StabilityBound::ButterflyStab6 => "butterflystab_6",
            StabilityBound::CorButt => "cor_butt",
        }
    }

    /// Hypotheses of the inequality; recorded, never enforced.
    pub fn hypothesis(self) -> &'static str {
        match self {
            StabilityBound::WeakStab => {
                "F 2-Sperner; m = missing middle-layer sets or members off the middle layers"
            }
            StabilityBound::SpernerStab => {
                "F 2-Sperner; |F \\ F*| >= m for every F* in Sigma*(n,2); m <= C((1-eps)n, floor(n/2)); n >= n0(eps)"
            }
            StabilityBound::ButterflyStab4 => {
                "F butterfly-free; |F \\ F*| >= m for every F* in Sigma*(n,2); log m = o(n)"
            }
            StabilityBound::ButterflyStab6 => {
                "F butterfly-free; |F \\ F*| >= m for every F* in Sigma*(n,2); m = o(C(n/2 + log n, n/2))"
            }
            StabilityBound::CorButt => {
                "F butterfly-free; empty set and [n] not in F; m = |M| middle sets; n >= 8"
            }
        }
    }
}

impl FromStr for StabilityBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StabilityBound::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown stability bound '{s}'")))
    }
}

impl fmt::Display for StabilityBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates the named right-hand side at `(n, m)`. The report's verdict is
/// `not-evaluated` until a measured family size is attached with
/// [`BoundReport::measured`].
pub fn stability_rhs(bound: StabilityBound, n: u32, m: u128) -> Result<BoundReport> {
    let base = sigma(n, 2)? as f64;
    let mf = m as f64;
    let rhs = match bound {
        StabilityBound::WeakStab => base - 1.9 * mf / n as f64,
        StabilityBound::SpernerStab => base - g_of(n.div_ceil(2) + 1, m),
        StabilityBound::ButterflyStab4 => base - mf / 4.0,
        StabilityBound::ButterflyStab6 => base - mf / 6.0,
        StabilityBound::CorButt => base - mf / 3.0,
    };
    let report = BoundReport::new(bound.name(), n, m, rhs, Relation::Le)
        .param("sigma", base)
        .param("hypothesis", bound.hypothesis());
    debug_assert_eq!(report.verdict, Verdict::NotEvaluated);
    Ok(report)
}
