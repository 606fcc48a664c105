//! Structural invariants as property tests. Each property draws a seed and
//! builds a random small instance from it.

use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use valmat::apps::{solve_recoverable_robust_interval, CongestionInstance, IntervalUncertainty};
use valmat::bruteforce::{brute_v_geq_k, brute_v_leq_k, DEFAULT_LIMIT};
use valmat::greedy::{is_local_minimum, minimize_valuated, minimizer_bases};
use valmat::matroid::{
    check_base_exchange, check_matroid_axioms, dual_matroid, make_uniform, ExplicitBaseFamily, MatroidOracle,
};
use valmat::mflow::solve_m_geq_k_w;
use valmat::primitives::{modular_sum, subset_to_vector, vector_to_subset};
use valmat::random::{random_matroid, random_valuation, random_weights};
use valmat::valuated::{
    check_valuated_exchange, dual_valuation, from_matroid_and_weights, intersection_constraint_valuation,
    laminar_penalty, split_stacked, stacked_intersection, MnatFunction, ValuationOracle,
};
use valmat::viap::{solve_v_geq_k, verify_solution};
use valmat::vmi::{solve_v_geq_k_via_dual, solve_v_in, solve_v_leq_k};
use valmat::{ExtValue, Rational, Subset};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn exhaustive_min(omega: &ValuationOracle) -> ExtValue {
    omega
        .domain(1 << 20)
        .unwrap()
        .into_iter()
        .map(|(_, v)| ExtValue::Finite(v))
        .min()
        .unwrap()
}

fn matroid_function(m: &MatroidOracle, w: &[Rational]) -> MnatFunction {
    let n = m.ground_size();
    let (m2, w2) = (m.clone(), w.to_vec());
    MnatFunction::from_fn(
        vec![0; n],
        vec![1; n],
        m.some_base().to_vector(),
        move |x| match vector_to_subset(x) {
            Some(s) if m2.is_base(&s) => ExtValue::Finite(modular_sum(&w2, &s)),
            _ => ExtValue::Infinite,
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn matroids_satisfy_axioms_and_duality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=7);
        let m = random_matroid(&mut r, n, 4).unwrap();
        let d = dual_matroid(&m);
        prop_assert!(check_matroid_axioms(&m).unwrap());
        prop_assert_eq!(m.rank() + d.rank(), n);
        let mut comp: Vec<Subset> = m.enumerate_bases().unwrap().iter().map(|b| b.complement()).collect();
        let mut dual = d.enumerate_bases().unwrap();
        comp.sort_by_key(|s| s.bits());
        dual.sort_by_key(|s| s.bits());
        prop_assert_eq!(comp, dual);
    }

    #[test]
    fn sets_and_zero_one_vectors_correspond(bits in any::<u32>(), n in 1usize..=32) {
        let s = Subset::from_bits(n, u128::from(bits) & ((1u128 << n) - 1));
        prop_assert_eq!(vector_to_subset(&subset_to_vector(&s)), Some(s));
    }

    #[test]
    fn valuations_and_their_duals_satisfy_exchange(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let o = random_valuation(&mut r, n, 3).unwrap();
        prop_assert!(check_valuated_exchange(&o).unwrap());
        prop_assert!(check_valuated_exchange(&dual_valuation(&o)).unwrap());
        for (x, v) in o.domain(1 << 16).unwrap() {
            prop_assert_eq!(o.value(&x), ExtValue::Finite(v.clone()));
            prop_assert_eq!(o.value(&x), ExtValue::Finite(v));
        }
    }

    #[test]
    fn intersection_constraint_support_is_a_matroid(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let indep = random_matroid(&mut r, n, 3).unwrap();
        let rank = r.gen_range(0..=2 * n);
        let Ok(o) = intersection_constraint_valuation(2, &indep, rank) else { return Ok(()) };
        let support: Vec<Subset> = o.domain(1 << 16).unwrap().into_iter().map(|(x, _)| x).collect();
        for x in &support {
            prop_assert!(indep.is_independent(&stacked_intersection(x, 2, n)));
        }
        prop_assert!(check_base_exchange(&ExplicitBaseFamily::new(2 * n, support).unwrap()).unwrap());
    }

    #[test]
    fn laminar_penalty_charges_the_common_part(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let copies = r.gen_range(2..=3);
        let w = random_weights(&mut r, n, 0, 6);
        let rank = r.gen_range(0..=copies * n);
        let o = laminar_penalty(&w, copies, rank).unwrap();
        for (x, v) in o.domain(1 << 16).unwrap() {
            prop_assert_eq!(x.len(), rank);
            prop_assert_eq!(v, modular_sum(&w, &stacked_intersection(&x, copies, n)));
            prop_assert_eq!(split_stacked(&x, copies, n).len(), copies);
        }
    }

    #[test]
    fn descent_reaches_the_global_minimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=7);
        let o = random_valuation(&mut r, n, 4).unwrap();
        let (x, v) = minimize_valuated(&o).unwrap();
        prop_assert_eq!(v.clone(), exhaustive_min(&o));
        prop_assert_eq!(o.value(&x), v);
        prop_assert!(is_local_minimum(&o, None, &x));
        prop_assert!(check_base_exchange(&minimizer_bases(&o, 1 << 16).unwrap()).unwrap());
    }

    #[test]
    fn overlap_cost_is_monotone_and_matches_the_dual_route(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let o1 = random_valuation(&mut r, n, 4).unwrap();
        let o2 = random_valuation(&mut r, n, 4).unwrap();
        let mut last = ExtValue::Finite(Rational::zero() - Rational::from_integer(1_000_000.into()));
        for k in 0..=o1.rank().min(o2.rank()) + 1 {
            let sol = solve_v_geq_k(&o1, &o2, k).unwrap();
            prop_assert_eq!(&sol.value, &solve_v_geq_k_via_dual(&o1, &o2, k).unwrap().value);
            prop_assert!(sol.value >= last);
            if sol.is_optimal() {
                prop_assert!(sol.x1.intersection(&sol.x2).len() >= k);
                prop_assert!(verify_solution(&sol, sol.witness.as_ref().unwrap().matched.len(), &o1, &o2));
            }
            last = sol.value;
        }
    }

    #[test]
    fn uniform_independence_bounds_the_overlap(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let o1 = random_valuation(&mut r, n, 3).unwrap();
        let o2 = random_valuation(&mut r, n, 3).unwrap();
        let k = r.gen_range(0..=n);
        let tuple = solve_v_in(&[o1.clone(), o2.clone()], &make_uniform(n, k).unwrap()).unwrap();
        let pair = solve_v_leq_k(&o1, &o2, k).unwrap();
        prop_assert_eq!(&tuple.value, &pair.value);
        prop_assert_eq!(&pair.value, &brute_v_leq_k(&o1, &o2, k, DEFAULT_LIMIT).unwrap().value);
    }

    #[test]
    fn flow_solver_agrees_with_augmenting_paths_on_sets(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let m1 = random_matroid(&mut r, n, 3).unwrap();
        let m2 = random_matroid(&mut r, n, 3).unwrap();
        let w1 = random_weights(&mut r, n, -8, 8);
        let w2 = random_weights(&mut r, n, -8, 8);
        let k = r.gen_range(0..=m1.rank().min(m2.rank()));
        let zero = vec![Rational::zero(); n];
        let flow = solve_m_geq_k_w(&matroid_function(&m1, &w1), &matroid_function(&m2, &w2), k as i64, &zero).unwrap();
        let o1 = from_matroid_and_weights(&m1, &w1).unwrap();
        let o2 = from_matroid_and_weights(&m2, &w2).unwrap();
        prop_assert_eq!(flow.value, solve_v_geq_k(&o1, &o2, k).unwrap().value);
    }

    #[test]
    fn standard_congestion_model_totals_match(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let players = r.gen_range(1..=3);
        let matroids: Vec<MatroidOracle> = (0..players).map(|_| random_matroid(&mut r, n, 2).unwrap()).collect();
        let costs: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let mut c = 0i64;
                (0..=players).map(|_| { c += r.gen_range(0..=4); Rational::from_integer(c.into()) }).collect()
            })
            .collect();
        let inst = CongestionInstance::from_standard_model(&matroids, &costs).unwrap();
        let state: Vec<Subset> = matroids.iter().map(|m| m.some_base()).collect();
        let mut direct = Rational::zero();
        for x in &state {
            for v in x.iter() {
                let users = state.iter().filter(|y| y.contains(v)).count();
                direct += &costs[v][users];
            }
        }
        prop_assert_eq!(inst.total_cost(&state), ExtValue::Finite(direct));
    }

    #[test]
    fn upper_bound_is_the_worst_case_scenario(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let m = random_matroid(&mut r, n, 3).unwrap();
        let o1 = from_matroid_and_weights(&m, &random_weights(&mut r, n, -6, 6)).unwrap();
        let lower = random_weights(&mut r, n, -5, 5);
        let upper: Vec<Rational> = lower.iter().map(|l| l + Rational::from_integer(r.gen_range(0..=4).into())).collect();
        let k = r.gen_range(0..=m.rank());
        let robust = solve_recoverable_robust_interval(&o1, &IntervalUncertainty::new(lower.clone(), upper.clone()).unwrap(), k).unwrap();
        for _ in 0..10 {
            let w: Vec<Rational> = lower
                .iter()
                .zip(&upper)
                .map(|(l, u)| l + (u - l) * Rational::new(r.gen_range(0..=4).into(), 4.into()))
                .collect();
            let scenario = from_matroid_and_weights(&m, &w).unwrap();
            let inner = brute_v_geq_k(&o1, &scenario, k, DEFAULT_LIMIT).unwrap().value;
            prop_assert!(inner <= robust.value);
        }
        let worst = from_matroid_and_weights(&m, &upper).unwrap();
        prop_assert_eq!(brute_v_geq_k(&o1, &worst, k, DEFAULT_LIMIT).unwrap().value, robust.value);
    }
}
