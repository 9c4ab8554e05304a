use proptest::prelude::*;

use posetlab_core::bits::{full_mask, Mask};
use posetlab_core::bounds::{g_of, g_of_ratio_form, g_scale, gen_binom, x_of};
use posetlab_core::extremal::f;
use posetlab_core::isoperimetry::{
    edges_via_rank, hamming_edges, harper_vector, is_downset_encoding,
};
use posetlab_core::oracle::{max_p_free, min_copies, MinCopiesOptions};
use posetlab_core::random::{random_superset, rng_from_seed};
use posetlab_core::{
    contains_poset, count_butterflies, count_butterflies_with_pivot, count_chains, count_copies,
    count_copies_with_pivot, count_injections, creates_butterfly, sigma, sigma_star,
    union_lower_bound, ExactRational, Poset, SetFamily,
};

fn family(max_n: u32, max_len: usize) -> impl Strategy<Value = SetFamily> {
    (1..=max_n).prop_flat_map(move |n| {
        proptest::collection::btree_set(0..(1u64 << n), 0..=max_len.min(1 << n))
            .prop_map(move |s| SetFamily::new(n, s).unwrap())
    })
}

fn uniform_family(max_n: u32, max_len: usize) -> impl Strategy<Value = (SetFamily, u32)> {
    (2..=max_n).prop_flat_map(move |n| {
        (1..n).prop_flat_map(move |k| {
            let layer: Vec<Mask> = posetlab_core::bits::layer_masks(n, k).collect();
            let len = layer.len();
            proptest::sample::subsequence(layer, 0..=max_len.min(len))
                .prop_map(move |s| (SetFamily::new(n, s).unwrap(), k))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn butterfly_counters_agree(f in family(6, 24)) {
        let fast = count_butterflies(&f).to_u128().unwrap();
        prop_assert_eq!(fast, count_copies(&f, &Poset::butterfly()).to_u128().unwrap());
        prop_assert_eq!(fast * 4, count_injections(&f, &Poset::butterfly()));
    }

    #[test]
    fn chain_counter_agrees(f in family(5, 20), k in 1usize..5) {
        let chain = Poset::chain(k).unwrap();
        prop_assert_eq!(count_chains(&f, k), count_copies(&f, &chain));
    }

    #[test]
    fn pivot_is_a_difference(f in family(6, 20), pick in any::<u64>()) {
        let pivot = pick & full_mask(f.n());
        prop_assume!(!f.contains(pivot));
        let with = f.with_set(pivot).unwrap();
        let diff = count_butterflies(&with).to_u128().unwrap() - count_butterflies(&f).to_u128().unwrap();
        prop_assert_eq!(count_butterflies_with_pivot(&f, pivot).unwrap().to_u128().unwrap(), diff);
        prop_assert_eq!(creates_butterfly(&f, pivot).unwrap(), diff > 0);
        let vee = Poset::vee();
        let vdiff = count_copies(&with, &vee).to_u128().unwrap() - count_copies(&f, &vee).to_u128().unwrap();
        prop_assert_eq!(count_copies_with_pivot(&f, pivot, &vee).unwrap().to_u128().unwrap(), vdiff);
    }

    #[test]
    fn chain_containment_is_sperner_failure(f in family(6, 30), k in 1usize..5) {
        prop_assert_eq!(contains_poset(&f, &Poset::chain(k + 1).unwrap()), !f.is_k_sperner(k));
        prop_assert_eq!(f.longest_chain() > k, !f.is_k_sperner(k));
    }

    #[test]
    fn butterflies_survive_relabelling_and_complement(f in family(6, 24), seed in any::<u64>()) {
        let perm = posetlab_core::random::random_permutation(&mut rng_from_seed(seed), f.n());
        let c = count_butterflies(&f);
        prop_assert_eq!(&count_butterflies(&f.permute(&perm).unwrap()), &c);
        prop_assert_eq!(&count_butterflies(&f.complement_family()), &c);
    }

    #[test]
    fn shadow_and_shade_are_dual(f in family(7, 30), k in 0u32..8) {
        let n = f.n();
        prop_assume!(k <= n);
        let shadow = f.shadow(k).unwrap();
        let dual = f.complement_family().shade(n - k).unwrap().complement_family();
        prop_assert_eq!(shadow, dual);
    }

    #[test]
    fn shifts_keep_size_and_raise_edges((f, k) in uniform_family(9, 30), i in 1u32..10, j in 1u32..10) {
        let n = f.n();
        prop_assume!(i < j && j <= n);
        let g = f.shift(i, j).unwrap();
        prop_assert_eq!(g.len(), f.len());
        prop_assert!(g.is_uniform(k) || g.is_empty());
        prop_assert!(hamming_edges(&g, k).unwrap() >= hamming_edges(&f, k).unwrap());
        let c = f.compress();
        prop_assert!(c.is_left_shifted());
        prop_assert_eq!(edges_via_rank(&c, k).unwrap(), hamming_edges(&c, k).unwrap());
        prop_assert!(is_downset_encoding(&c, k).unwrap());
    }

    #[test]
    fn downset_iff_shifted((f, k) in uniform_family(7, 20)) {
        prop_assert_eq!(is_downset_encoding(&f, k).unwrap(), f.is_left_shifted());
    }

    #[test]
    fn harper_vectors_are_valid((f, k) in uniform_family(10, 10)) {
        for m in f.iter() {
            let y = harper_vector(m, f.n(), k).unwrap();
            let e = y.entries();
            prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(e.iter().all(|&v| v <= f.n() - k));
            prop_assert_eq!(y.to_mask(), m);
        }
    }

    #[test]
    fn json_roundtrip(f in family(8, 30)) {
        prop_assert_eq!(SetFamily::from_json_str(&f.to_json_string()).unwrap(), f);
    }

    #[test]
    fn lubell_bounded_on_sperner(f in family(7, 40), k in 1usize..4) {
        prop_assume!(f.is_k_sperner(k));
        prop_assert!(f.lubell_sum() <= ExactRational::integer(k as i64));
    }

    #[test]
    fn x_inverts_gen_binom(l in 1u32..40, m in 1u64..1_000_000_000) {
        let x = x_of(l, m as u128);
        prop_assert!(x >= l as f64 - 1.0);
        prop_assert!((gen_binom(x, l) - m as f64).abs() <= 1e-9 * m as f64);
        let scale = g_scale(l, m as u128);
        prop_assert!((g_of(l, m as u128) - g_of_ratio_form(l, m as u128)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn union_bound_holds(seed in any::<u64>(), u in 2u64..6, count in 1usize..12) {
        use rand::seq::SliceRandom;
        let n = 12u32;
        let mut layer: Vec<Mask> = posetlab_core::bits::layer_masks(n, u as u32).collect();
        layer.shuffle(&mut rng_from_seed(seed));
        let mut system: Vec<Mask> = Vec::new();
        for s in layer {
            if system.len() == count {
                break;
            }
            if system.iter().all(|&t| (s & t).count_ones() <= 1) {
                system.push(s);
            }
        }
        let l = system.len() as u64;
        prop_assume!(l >= 1 && l <= u);
        let union = system.iter().fold(0, |a, &s| a | s).count_ones() as f64;
        prop_assert!(union_lower_bound(l, u).unwrap() <= union);
    }

    #[test]
    fn random_supersets_meet_lower_bound(n in 4u32..8, extra in 0usize..4, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        for base in sigma_star(n, 2).unwrap() {
            let fam = random_superset(&mut rng, &base, extra).unwrap();
            prop_assert!(count_butterflies(&fam).to_u128().unwrap() >= extra as u128 * f(n));
        }
    }
}

#[test]
fn min_copies_is_monotone_and_label_free() {
    let b = Poset::butterfly();
    let opts = MinCopiesOptions::default();
    for n in 2..=4u32 {
        let mut last = 0u128;
        for size in 0..=(1usize << n) {
            let w = min_copies(n, size, &b, &opts).unwrap();
            let obj: u128 = w.objective.to_string().parse().unwrap();
            assert!(obj >= last, "n={n}, size={size}");
            last = obj;
            assert_eq!(w.family.len(), size);
            let reversed: Vec<u32> = (1..=n).rev().collect();
            assert_eq!(
                count_butterflies(&w.family.permute(&reversed).unwrap()).to_u128(),
                Some(obj)
            );
            assert_eq!(
                count_butterflies(&w.family.complement_family()).to_u128(),
                Some(obj)
            );
        }
    }
}

#[test]
fn max_free_dominates_middle_layers() {
    let b = Poset::butterfly();
    for n in 2..=5 {
        let w = max_p_free(n, &b).unwrap();
        assert!(w.objective >= sigma(n, 2).unwrap().into());
        assert_eq!(count_butterflies(&w.family).to_u128(), Some(0));
    }
    assert_eq!(max_p_free(4, &b).unwrap().objective, 10u32.into());
}
