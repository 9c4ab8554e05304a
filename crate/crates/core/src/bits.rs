//! Word-sized subsets of `[n]`.
//!
//! Element `i` (1-based) lives at bit `i - 1`, so a subset of `[n]` with
//! `n <= 63` always fits in one `u64` and numeric order on masks is colex
//! order on sets.

/// A subset of `[n]` packed into a machine word.
pub type Mask = u64;

/// Largest supported ground-set size.
pub const MAX_N: u32 = 63;

#[inline]
pub fn full_mask(n: u32) -> Mask {
    debug_assert!(n <= MAX_N);
    (1u64 << n) - 1
}

#[inline]
pub fn element_bit(element: u32) -> Mask {
    debug_assert!((1..=64).contains(&element));
    1u64 << (element - 1)
}

/// Builds a mask from 1-based elements. Duplicates are absorbed.
pub fn mask_of(elements: &[u32]) -> Mask {
    elements.iter().fold(0, |acc, &e| acc | element_bit(e))
}

/// The 1-based elements of `mask` in ascending order.
pub fn elements(mask: Mask) -> Vec<u32> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        out.push(rest.trailing_zeros() + 1);
        rest &= rest - 1;
    }
    out
}

#[inline]
pub fn is_strict_subset(a: Mask, b: Mask) -> bool {
    a & !b == 0 && a != b
}

#[inline]
pub fn is_subset(a: Mask, b: Mask) -> bool {
    a & !b == 0
}

/// Sort key of the canonical order: popcount first, then colex.
#[inline]
pub fn canonical_key(mask: Mask) -> (u32, Mask) {
    (mask.count_ones(), mask)
}

/// All `k`-subsets of `[n]` in colex order (Gosper's hack).
pub fn layer_masks(n: u32, k: u32) -> LayerIter {
    LayerIter::new(n, k)
}

pub struct LayerIter {
    next: Option<Mask>,
    limit: u128,
}

impl LayerIter {
    fn new(n: u32, k: u32) -> Self {
        let next = if k > n {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some(full_mask(k))
        };
        LayerIter {
            next,
            limit: 1u128 << n,
        }
    }
}

impl Iterator for LayerIter {
    type Item = Mask;

    fn next(&mut self) -> Option<Mask> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur as u128 + low as u128;
            let ones = (((ripple as u64 ^ cur) >> 2) / low) as u128;
            let succ = ripple | ones;
            (succ < self.limit).then_some(succ as Mask)
        };
        Some(cur)
    }
}

/// Binomial coefficient as `u128`; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}
