use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_rational::BigRational;
use proptest::prelude::*;
use tower_dimers::interlacing::{arrays_to_matching, Configuration};
use tower_dimers::lattice::build_tower;
use tower_dimers::shuffle::{
    initial_config, sample_configuration, sample_tower, step_with_order, JumpSource, Round, StepRandomness, SweepOrder,
};

/// Coin flips that depend only on the particle they are asked about.
struct Keyed {
    seed: u64,
    calls: u64,
}

impl JumpSource for Keyed {
    fn jump(&mut self, round: Round, level: u32, index: usize) -> bool {
        self.calls += 1;
        let mut h = DefaultHasher::new();
        (self.seed, round == Round::Y, level, index).hash(&mut h);
        h.finish() % 3 == 0
    }
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn run_keyed(n: u32, seed: u64, order: SweepOrder) -> Configuration {
    let mut c = initial_config();
    for s in 0..n {
        c = step_with_order(&c, &mut Keyed { seed: seed ^ s as u64, calls: 0 }, order).unwrap();
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn samples_are_valid_matchings(n in 1u32..7, seed in any::<u64>(), p in 1i64..5, q in 1i64..5) {
        let (a, b) = (ratio(p, q), ratio(q, p + 1));
        let m = sample_tower(n, &a, &b, seed).unwrap();
        m.check_perfect().unwrap();
        let g = build_tower(n, &a, &b).unwrap();
        prop_assert!(m.weight(&g).is_ok());
    }

    #[test]
    fn particles_move_by_zero_or_one(n in 1u32..7, seed in any::<u64>()) {
        let one = ratio(1, 1);
        let mut r = StepRandomness::new(seed, &one, &one);
        let c = sample_configuration(n, &mut r).unwrap();
        let d = step_with_order(&c, &mut r, SweepOrder::Ascending).unwrap();
        for k in 1..=n + 1 {
            let (old, new) = (c.level(k), d.level(k));
            for (a, b) in old.y.iter().zip(&new.y).chain(old.x.iter().zip(&new.x)) {
                prop_assert!(*b == *a || *b == *a + 1);
            }
        }
    }

    #[test]
    fn sweep_order_is_irrelevant(n in 1u32..8, seed in any::<u64>()) {
        prop_assert_eq!(run_keyed(n, seed, SweepOrder::Ascending), run_keyed(n, seed, SweepOrder::Descending));
    }

    #[test]
    fn seeds_determine_samples(n in 1u32..6, seed in any::<u64>()) {
        let (a, b) = (ratio(2, 1), ratio(1, 2));
        prop_assert_eq!(sample_tower(n, &a, &b, seed).unwrap(), sample_tower(n, &a, &b, seed).unwrap());
    }
}

#[test]
fn keyed_source_hits_every_level() {
    let c = run_keyed(5, 9, SweepOrder::Ascending);
    let g = build_tower(5, &ratio(1, 1), &ratio(1, 1)).unwrap();
    arrays_to_matching(&c, &g).unwrap();
    let mut k = Keyed { seed: 1, calls: 0 };
    step_with_order(&c, &mut k, SweepOrder::Ascending).unwrap();
    assert!(k.calls > 0);
}

#[test]
fn zero_size_is_rejected() {
    assert!(sample_tower(0, &ratio(1, 1), &ratio(1, 1), 0).is_err());
}
