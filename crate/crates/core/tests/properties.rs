mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sprouts_core::engine::{couple_children, order_children};
use sprouts_core::oracle::Oracle;
use sprouts_core::{canonical_form, canonize, children, simplify, Engine, Position, Store};

use common::{random_land, random_position};

fn position(seed: u64) -> Position {
    random_position(&mut ChaCha8Rng::seed_from_u64(seed), 4, 14)
}

fn engine() -> Engine {
    Engine::new(Arc::new(Store::new()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let p = position(seed);
        let text = p.render().unwrap();
        let back = Position::parse(&text).unwrap();
        prop_assert_eq!(back.render().unwrap(), text);
    }

    #[test]
    fn canonical_form_is_idempotent(seed in any::<u64>()) {
        let c = canonical_form(&position(seed));
        let again = canonical_form(&c.position);
        prop_assert_eq!(&again.key, &c.key);
        prop_assert_eq!(c.position.render().unwrap(), c.key.as_str());
    }

    #[test]
    fn simplify_is_idempotent(seed in any::<u64>()) {
        let p = position(seed);
        let once = simplify(&p);
        let twice = simplify(&once);
        prop_assert_eq!(once.render().unwrap(), twice.render().unwrap());
        prop_assert!(once.total_lives() <= p.total_lives());
    }

    #[test]
    fn key_ignores_land_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_land(&mut rng, 8);
        let b = random_land(&mut rng, 8);
        prop_assert_eq!(canonize(&Position::join([&a, &b])), canonize(&Position::join([&b, &a])));
    }

    #[test]
    fn children_have_fewer_lives(seed in any::<u64>()) {
        let p = position(seed);
        for c in children(&p) {
            prop_assert!(c.total_lives() < p.total_lives());
        }
    }

    #[test]
    fn ordering_is_a_stable_permutation(seed in any::<u64>(), nim in 0u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let land = random_land(&mut rng, 10);
        let ordered = couple_children(&land, nim);
        let mut shuffled = ordered.clone();
        shuffled.shuffle(&mut rng);
        order_children(&mut shuffled);
        let keys = |v: &[sprouts_core::engine::Child]| {
            v.iter().map(|c| (c.key.to_string(), c.nim)).collect::<Vec<_>>()
        };
        prop_assert_eq!(keys(&shuffled), keys(&ordered));
        let nim_moves = ordered.iter().filter(|c| c.nim < nim).count();
        prop_assert_eq!(nim_moves as u32, nim);
    }

    #[test]
    fn engine_matches_oracle(seed in any::<u64>(), nim in 0u32..4) {
        let p = position(seed);
        let want = Oracle::default().outcome(&p, nim).unwrap();
        prop_assert_eq!(engine().outcome(&p, nim).unwrap(), want);
    }

    #[test]
    fn nimber_is_mex_of_children(seed in any::<u64>()) {
        let p = canonical_form(&position(seed)).position;
        let mut oracle = Oracle::default();
        let n = oracle.nimber(&p).unwrap();
        let below: Vec<u32> = children(&p).iter().map(|c| oracle.nimber(c).unwrap()).collect();
        prop_assert!(!below.contains(&n));
        for k in 0..n {
            prop_assert!(below.contains(&k));
        }
        prop_assert_eq!(engine().nimber(&p).unwrap(), n);
    }

    #[test]
    fn table_text_round_trips(seed in any::<u64>()) {
        let store = Arc::new(Store::new());
        Engine::new(store.clone()).nimber(&position(seed)).unwrap();
        let text = store.to_text();
        let back = Store::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.len(), store.len());
    }
}
