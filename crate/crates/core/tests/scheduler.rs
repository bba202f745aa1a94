use mtcsim_core::scheduler::*;
use mtcsim_core::utility::UtilitySpec;

fn elastic(r0: f64, r_max: f64) -> UtilitySpec {
    UtilitySpec::Elastic { r0, r_max }
}

fn user(id: u32, m2m: bool, utility: UtilitySpec, rates: Vec<f64>) -> SchedUser {
    SchedUser {
        id,
        m2m,
        utility,
        per_rb_rate: rates,
    }
}

#[test]
fn backhaul_estimation_reference_points() {
    assert_eq!(estimate_backhaul_rbs(0.0, 250_000.0, 50).unwrap(), 0);
    assert_eq!(estimate_backhaul_rbs(1_000_000.0, 250_000.0, 50).unwrap(), 4);
    assert_eq!(estimate_backhaul_rbs(1_010_000.0, 250_000.0, 50).unwrap(), 5);
    // capped at the grid size
    assert_eq!(estimate_backhaul_rbs(1e9, 250_000.0, 50).unwrap(), 50);
    assert!(estimate_backhaul_rbs(1.0, 0.0, 50).is_err());
    assert!(estimate_backhaul_rbs(-1.0, 1.0, 50).is_err());
}

#[test]
fn backhaul_estimation_matches_independent_arithmetic() {
    // criterion: ceil-division semantics on 100 random cases, checked
    // against a repeated-subtraction oracle
    let mut x = 0x12345u64;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..100 {
        let avg = 1e4 + next() * 1e6;
        let total = next() * 3e7;
        let got = estimate_backhaul_rbs(total, avg, 10_000).unwrap();
        let mut k = 0usize;
        while (k as f64) * avg < total {
            k += 1;
        }
        assert_eq!(got, k, "total={total} avg={avg}");
    }
}

#[test]
fn lambda_zero_gives_rb_to_h2h() {
    let problem = SchedulingProblem {
        users: vec![
            user(0, false, elastic(1.0, 10.0), vec![1.0]),
            user(1, true, elastic(1.0, 10.0), vec![1.0]),
        ],
        lambda: 0.0,
        rbs: vec![0],
    };
    let res = max_utility_schedule(&problem).unwrap();
    assert_eq!(res.assignment, vec![Some(0)]);
}

#[test]
fn saturated_users_leave_rbs_idle() {
    // a hard-real-time step that a single RB can never cross: zero
    // marginal everywhere, so every RB stays unassigned
    let problem = SchedulingProblem {
        users: vec![user(0, false, UtilitySpec::HardRealTime { threshold: 100.0 }, vec![1.0; 3])],
        lambda: 1.0,
        rbs: vec![0, 1, 2],
    };
    let res = max_utility_schedule(&problem).unwrap();
    assert!(res.assignment.iter().all(Option::is_none));
    assert_eq!(res.objective, 0.0);
}

#[test]
fn greedy_matches_oracle_on_orthogonal_elastic_instance() {
    let problem = SchedulingProblem {
        users: vec![
            user(0, false, elastic(0.5, 4.0), vec![1.0, 0.0]),
            user(1, false, elastic(0.5, 4.0), vec![0.0, 1.0]),
        ],
        lambda: 1.0,
        rbs: vec![0, 1],
    };
    let greedy = max_utility_schedule(&problem).unwrap();
    let oracle = brute_force_schedule(&problem).unwrap();
    assert_eq!(greedy.assignment, vec![Some(0), Some(1)]);
    assert_eq!(greedy.objective, oracle.objective);
}

#[test]
fn hard_real_time_pooling_defeats_greedy_and_gap_is_visible() {
    // both users need two pooled RBs to cross the step; the greedy
    // marginal of a single RB is zero, so it idles while the oracle pools
    let problem = SchedulingProblem {
        users: vec![
            user(0, false, UtilitySpec::HardRealTime { threshold: 2.0 }, vec![1.0, 1.0]),
            user(1, false, UtilitySpec::HardRealTime { threshold: 2.0 }, vec![1.0, 1.0]),
        ],
        lambda: 1.0,
        rbs: vec![0, 1],
    };
    let greedy = max_utility_schedule(&problem).unwrap();
    let oracle = brute_force_schedule(&problem).unwrap();
    assert_eq!(greedy.objective, 0.0);
    assert_eq!(oracle.objective, 1.0);
    assert_eq!(oracle.rates.iter().filter(|&&r| r == 2.0).count(), 1);
}

#[test]
fn objective_recomputation_is_consistent() {
    let problem = SchedulingProblem {
        users: vec![
            user(0, false, elastic(1e5, 1e6), vec![4e5; 4]),
            user(1, true, elastic(1e5, 1e6), vec![2e5; 4]),
        ],
        lambda: 0.7,
        rbs: vec![0, 1, 2, 3],
    };
    let res = max_utility_schedule(&problem).unwrap();
    let recomputed = objective_of(&problem, &res.assignment).unwrap();
    assert!((res.objective - recomputed).abs() < 1e-9);
    // manual check of one known assignment
    let manual = objective_of(&problem, &[Some(0), Some(0), None, Some(1)]).unwrap();
    let u0 = (1.0f64 + 8e5 / 1e5).ln() / (1.0f64 + 10.0).ln();
    let u1 = (1.0f64 + 2e5 / 1e5).ln() / (1.0f64 + 10.0).ln();
    assert!((manual - (u0 + 0.7 * u1)).abs() < 1e-12);
}

#[test]
fn idle_rbs_imply_nonpositive_marginals_for_concave_instances() {
    let problem = SchedulingProblem {
        users: vec![
            user(0, false, elastic(1.0, 3.0), vec![2.0; 5]),
            user(1, true, elastic(1.0, 3.0), vec![2.0; 5]),
        ],
        lambda: 1.0,
        rbs: vec![0, 1, 2, 3, 4],
    };
    let res = max_utility_schedule(&problem).unwrap();
    for (pos, holder) in res.assignment.iter().enumerate() {
        if holder.is_none() {
            for (u, usr) in problem.users.iter().enumerate() {
                let m = usr
                    .utility
                    .marginal(res.rates[u], usr.per_rb_rate[pos])
                    .unwrap();
                assert!(m <= 0.0, "idle RB {pos} but user {u} has marginal {m}");
            }
        }
    }
}

#[test]
fn m2m_rb_share_is_nondecreasing_in_lambda() {
    // paired instances across a lambda grid: the number of RBs granted
    // to M2M devices never shrinks as lambda grows
    let mk = |lambda| SchedulingProblem {
        users: vec![
            user(0, false, elastic(1e5, 5e6), vec![5e5; 10]),
            user(1, false, elastic(1e5, 5e6), vec![3e5; 10]),
            user(2, true, elastic(1e5, 2e6), vec![4e5; 10]),
            user(3, true, elastic(1e5, 2e6), vec![2e5; 10]),
        ],
        lambda,
        rbs: (0..10).collect(),
    };
    let mut prev = 0usize;
    for lambda in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let res = max_utility_schedule(&mk(lambda)).unwrap();
        let m2m_rbs = res
            .assignment
            .iter()
            .flatten()
            .filter(|&&u| mk(lambda).users[u].m2m)
            .count();
        assert!(m2m_rbs >= prev, "lambda {lambda}: {m2m_rbs} < {prev}");
        prev = m2m_rbs;
    }
}

#[test]
fn invalid_problems_are_rejected() {
    let bad_lambda = SchedulingProblem {
        users: vec![],
        lambda: 1.5,
        rbs: vec![],
    };
    assert!(max_utility_schedule(&bad_lambda).is_err());
    let bad_rates = SchedulingProblem {
        users: vec![user(0, false, elastic(1.0, 2.0), vec![1.0])],
        lambda: 0.5,
        rbs: vec![0, 1],
    };
    assert!(max_utility_schedule(&bad_rates).is_err());
    let negative = SchedulingProblem {
        users: vec![user(0, false, elastic(1.0, 2.0), vec![-1.0])],
        lambda: 0.5,
        rbs: vec![0],
    };
    assert!(max_utility_schedule(&negative).is_err());
}

#[test]
fn brute_force_guard_rejects_large_instances() {
    let problem = SchedulingProblem {
        users: (0..4)
            .map(|i| user(i, false, elastic(1.0, 2.0), vec![1.0; 10]))
            .collect(),
        lambda: 1.0,
        rbs: (0..10).collect(),
    };
    assert!(brute_force_schedule(&problem).is_err());
}
