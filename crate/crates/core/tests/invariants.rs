//! Randomized cross-module invariants: the embedding is a complete scaling
//! invariant, deciders return witnesses that actually map one point onto the
//! other, canonicalization is orbit-constant, and serialization is lossless.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relu_ident_core::embedding::{
    algebraic_realization, embedding_realization_at, validate_block_partition,
};
use relu_ident_core::equivalence::{
    canonical_form, check_ps_equivalent, check_scaling_equivalent, permute, rescale, Permutation,
    PsDecision, Rescaling, ScalingDecision, DEFAULT_PS_BUDGET,
};
use relu_ident_core::io::{network_from_json, network_to_json, Network};
use relu_ident_core::recovery::snap_rational;
use relu_ident_core::sampling::random_params;
use relu_ident_core::scalar::{rat, Rat, Scalar};
use relu_ident_core::{embed, Architecture};

fn arch_widths() -> impl Strategy<Value = Vec<usize>> {
    (1usize..=3, prop::collection::vec(1usize..=4, 1..=2), 1usize..=3).prop_map(
        |(d, hidden, k)| {
            let mut w = vec![d];
            w.extend(hidden);
            w.push(k);
            w
        },
    )
}

fn random_rescaling(arch: &Architecture, seed: u64) -> Rescaling<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths = arch.widths();
    let factors = widths[1..widths.len() - 1]
        .iter()
        .map(|&w| {
            (0..w)
                .map(|_| rat(rng.random_range(1..=9), rng.random_range(1..=9)))
                .collect()
        })
        .collect();
    Rescaling::new(factors).unwrap()
}

fn random_permutation(arch: &Architecture, seed: u64) -> Permutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths = arch.widths();
    let maps = widths[1..widths.len() - 1]
        .iter()
        .map(|&w| {
            let mut m: Vec<usize> = (0..w).collect();
            m.shuffle(&mut rng);
            m
        })
        .collect();
    Permutation::new(maps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn embedding_is_invariant_under_rescaling(widths in arch_widths(), seed in any::<u64>()) {
        let arch = Architecture::new(widths).unwrap();
        let p = random_params(&arch, seed);
        let s = random_rescaling(&arch, seed ^ 0xa5a5);
        let e_p = embed(&p).unwrap();
        let e_q = embed(&rescale(&p, &s)).unwrap();
        prop_assert!(e_p.same_phi(&e_q));
        prop_assert!(validate_block_partition(e_p.index(), e_p.chains()));
    }

    #[test]
    fn realization_computed_three_ways_agrees(widths in arch_widths(), seed in any::<u64>()) {
        let arch = Architecture::new(widths).unwrap();
        let p = random_params(&arch, seed);
        let e = embed(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
        for _ in 0..5 {
            let x: Vec<Rat> = (0..arch.input_dim())
                .map(|_| rat(rng.random_range(-8..=8), rng.random_range(1..=4)))
                .collect();
            let forward = p.realization(&x);
            prop_assert_eq!(&forward, &algebraic_realization(&p, &x));
            prop_assert_eq!(&forward, &embedding_realization_at(&p, &e, &x).unwrap());
        }
    }

    #[test]
    fn scaling_witness_maps_exactly(widths in arch_widths(), seed in any::<u64>()) {
        let arch = Architecture::new(widths).unwrap();
        let p = random_params(&arch, seed);
        let s = random_rescaling(&arch, seed ^ 0x1234);
        let q = rescale(&p, &s);
        match check_scaling_equivalent(&p, &q).unwrap() {
            ScalingDecision::Equivalent(r) => prop_assert_eq!(rescale(&p, &r), q),
            other => prop_assert!(false, "expected scaling equivalence, got {:?}", other),
        }
    }

    #[test]
    fn ps_witness_maps_exactly(widths in arch_widths(), seed in any::<u64>()) {
        let arch = Architecture::new(widths).unwrap();
        let p = random_params(&arch, seed);
        let s = random_rescaling(&arch, seed ^ 0x8d8d);
        let pi = random_permutation(&arch, seed ^ 0x4e4e);
        let q = permute(&rescale(&p, &s), &pi);
        match check_ps_equivalent(&p, &q, DEFAULT_PS_BUDGET).unwrap() {
            PsDecision::Equivalent(w) => {
                prop_assert_eq!(rescale(&permute(&p, &w.perm), &w.rescaling), q);
            }
            other => prop_assert!(false, "expected PS equivalence, got {:?}", other),
        }
    }

    #[test]
    fn canonical_form_is_constant_on_scaling_orbits(widths in arch_widths(), seed in any::<u64>()) {
        let arch = Architecture::new(widths).unwrap();
        let p = random_params(&arch, seed);
        let s = random_rescaling(&arch, seed ^ 0x6060);
        let (c, _) = canonical_form(&p).unwrap();
        let (c_scaled, _) = canonical_form(&rescale(&p, &s)).unwrap();
        prop_assert_eq!(&c, &c_scaled);
        let (c_again, _) = canonical_form(&c).unwrap();
        prop_assert_eq!(&c, &c_again);
    }

    #[test]
    fn json_round_trip_is_lossless(widths in arch_widths(), seed in any::<u64>()) {
        let arch = Architecture::new(widths).unwrap();
        let p = random_params(&arch, seed);
        match network_from_json(&network_to_json(&Network::Exact(p.clone()))).unwrap() {
            Network::Exact(back) => prop_assert_eq!(back, p.clone()),
            _ => prop_assert!(false, "scalar mode changed in transit"),
        }
        let pf = p.to_f64();
        match network_from_json(&network_to_json(&Network::Float(pf.clone()))).unwrap() {
            Network::Float(back) => prop_assert_eq!(back, pf),
            _ => prop_assert!(false, "scalar mode changed in transit"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn snapping_recovers_small_rationals(num in -64i64..=64, den in 1i64..=64) {
        let exact = rat(num, den);
        prop_assert_eq!(snap_rational(exact.to_f64(), 1e-9), exact);
    }
}
