mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use perseus_core::filter::{chebyshev_distance, filter_beliefs, filter_beliefs_plain, is_similar};
use perseus_core::parser::write_pomdp;
use perseus_core::sampler::{sample_successor, BeliefSet, Provenance};
use perseus_core::solver::{backup, perseus_stage, value_at};
use perseus_core::{belief_update, parse_pomdp, BeliefVector};

use common::*;

fn model_dims() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 1usize..=5, 1usize..=3, 1usize..=3)
}

fn belief_strategy(dim: usize) -> impl Strategy<Value = BeliefVector> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], dim)
        .prop_filter("some mass", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| BeliefVector::from_weights(w).unwrap())
}

fn belief_set_strategy() -> impl Strategy<Value = BeliefSet> {
    (2usize..6).prop_flat_map(|dim| {
        prop::collection::vec(
            prop::collection::vec(0u8..5, dim).prop_filter("some mass", |w| w.iter().any(|&x| x > 0)),
            0..60,
        )
        .prop_map(|rows| {
            // coarse weights produce exact and near duplicates
            let beliefs = rows
                .into_iter()
                .map(|w| BeliefVector::from_weights(w.into_iter().map(f64::from).collect()).unwrap())
                .collect();
            BeliefSet::new(beliefs, Provenance::default())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn belief_update_stays_on_the_simplex((seed, ns, na, no) in model_dims(), a_pick in any::<usize>(), o_pick in any::<usize>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, ns, na, no);
        let b = random_belief(&mut rng, ns);
        let (a, o) = (a_pick % na, o_pick % no);
        if let Ok(next) = belief_update(&model, &b, a, o) {
            prop_assert!(next.as_slice().iter().all(|&p| p >= 0.0));
            prop_assert!((next.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        } else {
            prop_assert!(model.observation_probability(&b, a, o) == 0.0);
        }
    }

    #[test]
    fn belief_update_is_consistent_with_the_joint((seed, ns, na, no) in model_dims()) {
        // p(s'|b,a,o) p(o|b,a) = Σ_s b(s) T(s,a,s') O(a,s',o)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, ns, na, no);
        let b = random_belief(&mut rng, ns);
        for a in 0..na {
            for o in 0..no {
                let p_o = model.observation_probability(&b, a, o);
                let Ok(next) = belief_update(&model, &b, a, o) else { continue };
                for s2 in 0..ns {
                    let joint: f64 = (0..ns)
                        .map(|s| b.as_slice()[s] * model.transition(s, a, s2) * model.observation(a, s2, o))
                        .sum();
                    prop_assert!((next.as_slice()[s2] * p_o - joint).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaling_the_prior_does_not_change_the_update((seed, ns, na, no) in model_dims(), scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, ns, na, no);
        let b = random_belief(&mut rng, ns);
        let scaled = BeliefVector::from_weights(b.as_slice().iter().map(|p| p * scale).collect()).unwrap();
        for a in 0..na {
            for o in 0..no {
                if let (Ok(x), Ok(y)) = (belief_update(&model, &b, a, o), belief_update(&model, &scaled, a, o)) {
                    prop_assert!(chebyshev_distance(x.as_slice(), y.as_slice()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampled_successor_is_a_valid_belief((seed, ns, na, no) in model_dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, ns, na, no);
        let b = BeliefVector::uniform(ns);
        let s = seed as usize % ns;
        let step = sample_successor(&model, &b, s, &mut rng).unwrap();
        prop_assert!(model.transition(s, step.action, step.next_state) > 0.0);
        prop_assert!(model.observation(step.action, step.next_state, step.observation) > 0.0);
        prop_assert!((step.belief.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn similarity_is_symmetric_and_reflexive(a in belief_strategy(4), b in belief_strategy(4), t in 0.001f64..0.999) {
        prop_assert_eq!(is_similar(&a, &b, t).unwrap(), is_similar(&b, &a, t).unwrap());
        prop_assert!(is_similar(&a, &a, t).unwrap());
    }

    #[test]
    fn filter_separates_covers_and_is_idempotent(set in belief_set_strategy(), t in prop::sample::select(vec![0.001, 0.01, 0.1, 0.3])) {
        let (kept, report) = filter_beliefs(&set, t).unwrap();
        prop_assert!(report.kept_indices.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(report.kept_count, kept.len());
        for (i, x) in kept.iter().enumerate() {
            for y in &kept.beliefs[i + 1..] {
                prop_assert!(chebyshev_distance(x.as_slice(), y.as_slice()) >= t);
            }
        }
        for (i, b) in set.iter().enumerate() {
            if report.kept_indices.binary_search(&i).is_err() {
                prop_assert!(kept.iter().any(|k| chebyshev_distance(k.as_slice(), b.as_slice()) < t));
            }
        }
        let (again, _) = filter_beliefs(&kept, t).unwrap();
        prop_assert_eq!(&again, &kept);
        let (plain, plain_report) = filter_beliefs_plain(&set, t).unwrap();
        prop_assert_eq!(plain, kept);
        prop_assert_eq!(plain_report.kept_indices, report.kept_indices);
    }

    #[test]
    fn larger_thresholds_keep_no_more(set in belief_set_strategy()) {
        let counts: Vec<usize> = [0.001, 0.01, 0.05, 0.1, 0.3, 0.6]
            .iter()
            .map(|&t| filter_beliefs(&set, t).unwrap().1.kept_count)
            .collect();
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{:?}", counts);
    }

    #[test]
    fn writer_output_parses_back_to_the_same_model((seed, ns, na, no) in model_dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, ns, na, no);
        let back = parse_pomdp(&write_pomdp(&model)).unwrap();
        prop_assert_eq!(back.discount(), model.discount());
        for a in 0..na {
            for s in 0..ns {
                prop_assert_eq!(back.transition_row(a, s), model.transition_row(a, s));
                prop_assert_eq!(back.observation_row(a, s), model.observation_row(a, s));
                for s2 in 0..ns {
                    prop_assert_eq!(back.reward(s, a, s2), model.reward(s, a, s2));
                }
            }
        }
    }

    #[test]
    fn backup_matches_enumeration((seed, ns, na, no) in model_dims(), size in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, ns, na, no);
        let v = random_value_function(&mut rng, ns, na, size);
        let b = random_belief(&mut rng, ns);
        let alpha = backup(&model, &v, &b);
        let oracle = brute_force_backup_value(&model, &v, &b);
        prop_assert!((alpha.value(&b) - oracle).abs() < 1e-10, "{} vs {}", alpha.value(&b), oracle);
    }

    #[test]
    fn stage_never_lowers_a_belief_value((seed, ns, na, no) in model_dims(), n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, ns, na, no);
        let set = BeliefSet::new((0..n).map(|_| random_belief(&mut rng, ns)).collect(), Provenance::default());
        let mut v = perseus_core::solver::initial_value_function(&model);
        for _ in 0..5 {
            let next = perseus_stage(&model, &set, &v, &mut rng);
            prop_assert!(next.len() <= set.len());
            for b in set.iter() {
                prop_assert!(value_at(&next, b).0 >= value_at(&v, b).0 - 1e-9);
            }
            v = next;
        }
    }
}
