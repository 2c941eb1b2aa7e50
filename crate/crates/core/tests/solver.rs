mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use perseus_core::benchmarks::build_tiger;
use perseus_core::rng::{stream_rng, SOLVER_STREAM};
use perseus_core::sampler::sample_belief_set;
use perseus_core::solver::{
    backup, initial_value_function, perseus_stage, perseus_stage_with_stats, solve, value_at, SolveConfig,
    StopReason,
};
use perseus_core::{BeliefVector, RngSeed};

use common::*;

#[test]
fn backup_matches_enumeration_on_a_three_state_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let model = random_model(&mut rng, 3, 2, 2);
        let v = random_value_function(&mut rng, 3, 2, 4);
        let b = random_belief(&mut rng, 3);
        let got = backup(&model, &v, &b).value(&b);
        let want = brute_force_backup_value(&model, &v, &b);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn tiger_corner_backup_matches_enumeration() {
    let tiger = build_tiger();
    let v = initial_value_function(&tiger);
    let b = BeliefVector::point(2, 0);
    assert_eq!(brute_force_backup_value(&tiger, &v, &b), -1890.0);
    assert!((backup(&tiger, &v, &b).value(&b) + 1890.0).abs() < 1e-9);
}

#[test]
fn exact_tiger_oracle_is_sane() {
    let h = horizon_for(0.95, 100.0, 1e-3);
    assert!(0.95f64.powi(h as i32) * 100.0 / 0.05 < 1e-3);
    let v = tiger_exact_value(0.5, 0.95, h);
    let longer = tiger_exact_value(0.5, 0.95, h + 50);
    assert!((v - longer).abs() < 1e-3);
    // the uniform belief is worth listening at, and a known corner opens the other door
    assert!(v > 0.0 && v < 10.0 / 0.05);
    let corner = tiger_exact_value(1.0, 0.95, h);
    assert!((corner - (10.0 + 0.95 * v)).abs() < 1e-6);
}

#[test]
fn stage_on_converged_tiger_keeps_per_belief_maximizers() {
    let tiger = build_tiger();
    let set = sample_belief_set(&tiger, 200, RngSeed(4));
    let config = SolveConfig {
        convergence_threshold: Some(1e-12),
        max_iterations: Some(2000),
        ..SolveConfig::default()
    };
    let solved = solve(&tiger, &set, &config).unwrap();
    let v = solved.value_function;
    let mut rng = stream_rng(RngSeed(4), SOLVER_STREAM);
    let (next, stats) = perseus_stage_with_stats(&tiger, &set, &v, &mut rng);
    assert!(next.len() <= set.len());
    for b in set.iter() {
        let (before, _) = value_at(&v, b);
        let (after, _) = value_at(&next, b);
        assert!(after >= before - 1e-9);
        assert!(after - before < 1e-6, "converged function still improved by {}", after - before);
    }
    if stats.improved == 0 {
        // every kept vector is some belief's maximizer in v
        for alpha in next.alphas() {
            assert!(v.alphas().contains(alpha));
        }
    }
}

#[test]
fn values_stay_below_the_reward_bound() {
    let tiger = build_tiger();
    let set = sample_belief_set(&tiger, 300, RngSeed(8));
    let bound = tiger.max_reward() / (1.0 - tiger.discount()) + 1e-6;
    let mut v = initial_value_function(&tiger);
    let mut rng = stream_rng(RngSeed(8), SOLVER_STREAM);
    for _ in 0..60 {
        v = perseus_stage(&tiger, &set, &v, &mut rng);
        assert!(set.iter().all(|b| value_at(&v, b).0 <= bound));
    }
}

#[test]
fn solve_is_reproducible() {
    let tiger = build_tiger();
    let set = sample_belief_set(&tiger, 300, RngSeed(2));
    let config = SolveConfig {
        seed: RngSeed(9),
        ..SolveConfig::default()
    };
    let a = solve(&tiger, &set, &config).unwrap();
    let b = solve(&tiger, &set, &config).unwrap();
    assert_eq!(a.value_function, b.value_function);
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.trace.len(), a.iterations);
    assert_eq!(a.stop_reason, StopReason::Converged);
    let strip = |r: &perseus_core::solver::SolveResult| -> Vec<(usize, f64, f64, usize)> {
        r.trace
            .iter()
            .map(|t| (t.policy_size, t.convergence, t.sum_vb, t.backups))
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn hallway2_stages_are_monotone() {
    let m = hallway2();
    let set = sample_belief_set(&m, 200, RngSeed(3));
    let mut v = initial_value_function(&m);
    let mut rng = stream_rng(RngSeed(3), SOLVER_STREAM);
    for _ in 0..10 {
        let next = perseus_stage(&m, &set, &v, &mut rng);
        assert!(next.len() <= set.len());
        for b in set.iter() {
            assert!(value_at(&next, b).0 >= value_at(&v, b).0 - 1e-9);
            assert!(value_at(&next, b).0 <= 1.0 / (1.0 - 0.95) + 1e-6);
        }
        v = next;
    }
}
