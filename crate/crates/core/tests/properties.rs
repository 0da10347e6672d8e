use coalition_forge::rsg::{adamant_value, coalition_value};
use coalition_forge::{
    coalition_sum, coalition_utilities, formed_partitions, is_better, is_nash, is_weak_criterion,
    is_weak_exact, player_share, profile_utility, udp, CPartition, GameConfig, StrategyProfile,
};
use proptest::prelude::*;

fn config(n: usize, eta: f64) -> GameConfig {
    if eta == 0.0 {
        GameConfig::without_adamant(n).unwrap()
    } else {
        GameConfig::new(n, eta).unwrap()
    }
}

fn eta() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 1e-3..0.1f64, 0.1..3.0f64, 3.0..1e3f64]
}

/// Players with equal tags share a coalition.
fn partition(max_n: usize) -> impl Strategy<Value = CPartition> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0..n, n).prop_map(move |tags| {
            let mut blocks = vec![0u32; n];
            for (p, &t) in tags.iter().enumerate() {
                blocks[t] |= 1 << p;
            }
            blocks.retain(|&b| b != 0);
            CPartition::from_masks(n, blocks).unwrap()
        })
    })
}

fn profile(max_n: usize) -> impl Strategy<Value = StrategyProfile> {
    (1..=max_n).prop_flat_map(|n| {
        let full = (1u32 << n) - 1;
        prop::collection::vec(0..=full, n).prop_map(move |raw| {
            let wishes = raw.iter().enumerate().map(|(p, &w)| w | 1 << p).collect();
            StrategyProfile::from_masks(wishes).unwrap()
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn shares_are_conserved(p in partition(6), eta in eta()) {
        let cfg = config(p.n(), eta);
        let outcome = coalition_utilities(&p, &cfg).unwrap();
        let shares = player_share(&p, &cfg).unwrap();
        for (c, u) in p.coalitions().zip(&outcome.coalition_utilities) {
            prop_assert!((shares.total_over(c) - u).abs() <= 1e-12);
        }
        let total: f64 = shares.as_slice().iter().sum();
        prop_assert!((total - coalition_sum(&p, &cfg).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn payoffs_are_continuous_at_thresholds(k in 2usize..=6, eps in 1e-12..1e-6f64) {
        let edge = (k - 1) as f64 / k as f64;
        let below = config(k, edge - eps);
        let above = config(k, edge + eps);
        prop_assert!((coalition_value(k, &below) - coalition_value(k, &above)).abs() <= 4.0 * eps);
        prop_assert!((adamant_value(k, &below) - adamant_value(k, &above)).abs() <= 4.0 * eps);
    }

    #[test]
    fn payoffs_fall_with_more_coalitions_and_stronger_adamant(
        k in 1usize..6, eta in 1e-3..10.0f64, bump in 0.0..1.0f64,
    ) {
        let cfg = config(6, eta);
        let stronger = config(6, eta + bump);
        prop_assert!(coalition_value(k + 1, &cfg) <= coalition_value(k, &cfg));
        prop_assert!(coalition_value(k, &stronger) <= coalition_value(k, &cfg));
        prop_assert!(adamant_value(k, &stronger) >= adamant_value(k, &cfg));
        prop_assert_eq!(adamant_value(k, &cfg) > 0.0, cfg.is_significant(k));
    }

    #[test]
    fn formation_commutes_with_relabeling(
        (p, perm) in profile(6).prop_flat_map(|p| { let n = p.n(); (Just(p), permutation(n)) }),
    ) {
        let mut direct: Vec<CPartition> =
            formed_partitions(&p).partitions.iter().map(|q| q.relabel(&perm)).collect();
        let mut relabeled = formed_partitions(&p.relabel(&perm)).partitions;
        direct.sort();
        relabeled.sort();
        prop_assert_eq!(direct, relabeled);
    }

    #[test]
    fn utilities_follow_relabeling(
        (p, perm) in profile(6).prop_flat_map(|p| { let n = p.n(); (Just(p), permutation(n)) }),
        eta in eta(),
    ) {
        let cfg = config(p.n(), eta);
        let before = profile_utility(&p, &cfg).unwrap();
        let after = profile_utility(&p.relabel(&perm), &cfg).unwrap();
        for player in 1..=p.n() {
            prop_assert!((before.get(player) - after.get(perm[player - 1] + 1)).abs() <= 1e-15);
        }
    }

    #[test]
    fn equilibrium_is_relabeling_invariant(
        (p, perm) in profile(4).prop_flat_map(|p| { let n = p.n(); (Just(p), permutation(n)) }),
        eta in eta(),
    ) {
        let cfg = config(p.n(), eta);
        prop_assert_eq!(is_nash(&p, &cfg).unwrap(), is_nash(&p.relabel(&perm), &cfg).unwrap());
    }

    #[test]
    fn lone_deviation_splits_one_coalition(p in partition(6), seed in 0usize..6) {
        let player = seed % p.n() + 1;
        let split = udp(&p, player).unwrap();
        let own = p.coalition_of(player).unwrap();
        if own.size() == 1 {
            prop_assert_eq!(&split, &p);
        } else {
            prop_assert_eq!(split.k(), p.k() + 1);
            prop_assert_eq!(split.coalition_of(player).unwrap().size(), 1);
            prop_assert!(is_better(&p, &split).unwrap());
            prop_assert!(!is_better(&split, &p).unwrap());
        }
    }

    #[test]
    fn coarsening_is_a_strict_order(a in partition(5), b in partition(5)) {
        prop_assert!(!is_better(&a, &a).unwrap());
        if a.n() == b.n() {
            prop_assert!(!(is_better(&a, &b).unwrap() && is_better(&b, &a).unwrap()));
        }
    }

    #[test]
    fn weakness_criterion_is_sufficient(p in partition(6), eta in eta()) {
        if is_weak_criterion(&p) {
            prop_assert!(is_weak_exact(&p, &config(p.n(), eta)).unwrap());
        }
    }

    #[test]
    fn text_forms_round_trip(p in partition(6), q in profile(6)) {
        prop_assert_eq!(p.to_string().parse::<CPartition>().unwrap(), p);
        prop_assert_eq!(q.to_string().parse::<StrategyProfile>().unwrap(), q);
    }
}
