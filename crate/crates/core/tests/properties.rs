use nalgebra::{DMatrix, DVector};
use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vilab::conditions::{
    check_sequence_condition, classify_conditions, classify_operator, minty_residual, reevaluate_witness, sequence_value, Condition,
    DEFAULT_MU, SLACK_TOL,
};
use vilab::games::{check_minty_optimality, Objective};
use vilab::merit::{dual_gap_over, gap, probe_points, proj_residual};
use vilab::problems::all_problems;
use vilab::projection::{extra_grad_proj_map, grad_proj_map};
use vilab::solvers::{solve_are, solve_eg};
use vilab::{Error, FeasibleSet, Operator, SolverConfig, VIProblem, Vector};

fn leaf_set() -> impl Strategy<Value = FeasibleSet> {
    prop_oneof![
        (1usize..5)
            .prop_flat_map(|n| (vec(-2.0..2.0f64, n), vec(0.0..3.0f64, n)))
            .prop_map(|(lo, w)| {
                let lo = DVector::from_vec(lo);
                let hi = &lo + DVector::from_vec(w);
                FeasibleSet::new_box(lo, hi).unwrap()
            }),
        (1usize..5)
            .prop_flat_map(|n| (vec(-2.0..2.0f64, n), 0.1..3.0f64))
            .prop_map(|(c, r)| FeasibleSet::new_ball(DVector::from_vec(c), r).unwrap()),
        (1usize..6).prop_map(|n| FeasibleSet::new_simplex(n).unwrap()),
    ]
}

fn any_set() -> impl Strategy<Value = FeasibleSet> {
    prop_oneof![
        3 => leaf_set(),
        1 => vec(leaf_set(), 2..4).prop_map(|parts| FeasibleSet::new_product(parts).unwrap()),
    ]
}

/// Gaussian point with scale 3, mostly outside small sets.
fn wild_point(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    DVector::from_fn(n, |_, _| 3.0 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
}

fn registry() -> Vec<VIProblem> {
    all_problems().into_iter().map(|r| r.problem).collect()
}

fn monotone_registry() -> Vec<VIProblem> {
    all_problems()
        .into_iter()
        .filter(|r| r.tags.iter().any(|t| t == "monotone"))
        .map(|r| r.problem)
        .collect()
}

const PAIRWISE: [Condition; 5] = [
    Condition::Monotone,
    Condition::StronglyMonotone,
    Condition::PseudoMonotone,
    Condition::StrongPseudo,
    Condition::QuasiMonotone,
];

fn affine_box_problem(entries: &[f64], offset: &[f64]) -> VIProblem {
    let n = offset.len();
    VIProblem::new(
        "random-affine",
        Operator::affine(DMatrix::from_row_slice(n, n, entries), DVector::from_column_slice(offset)).unwrap(),
        FeasibleSet::cube(n, -1.0, 1.0).unwrap(),
    )
    .unwrap()
}

fn affine_2d() -> impl Strategy<Value = VIProblem> {
    (vec(-2.0..2.0f64, 4), vec(-1.0..1.0f64, 2)).prop_map(|(a, b)| affine_box_problem(&a, &b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_is_nonexpansive(set in any_set(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (wild_point(&mut rng, set.dim()), wild_point(&mut rng, set.dim()));
        let (pa, pb) = (set.project(&a).unwrap(), set.project(&b).unwrap());
        prop_assert!((&pa - &pb).norm() <= (&a - &b).norm() + 1e-12);
    }
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_feasible(set in any_set(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = set.project(&wild_point(&mut rng, set.dim())).unwrap();
        prop_assert!((set.project(&p).unwrap() - &p).norm() <= 1e-12);
        prop_assert!(set.distance(&p).unwrap() <= 1e-9);
        prop_assert!(set.distance(&set.center()).unwrap() <= 1e-12);
    }

    #[test]
    fn projection_optimality_inequality(set in any_set(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = wild_point(&mut rng, set.dim());
        let p = set.project(&a).unwrap();
        for _ in 0..20 {
            let y = set.sample(&mut rng);
            prop_assert!((&a - &p).dot(&(&y - &p)) <= 1e-10);
        }
    }

    #[test]
    fn linear_minimize_beats_every_sample(set in any_set(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = wild_point(&mut rng, set.dim());
        let (v, min) = set.linear_minimize(&d).unwrap();
        prop_assert!(set.distance(&v).unwrap() <= 1e-9);
        prop_assert!((d.dot(&v) - min).abs() <= 1e-12 * (1.0 + min.abs()));
        for _ in 0..50 {
            prop_assert!(min <= d.dot(&set.sample(&mut rng)) + 1e-12);
        }
    }

    #[test]
    fn maps_give_descent_and_feasibility(seed in any::<u64>(), t in 0.05..1.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in registry() {
            let x = p.set().sample(&mut rng);
            let fx = p.eval(&x).unwrap();
            let m = grad_proj_map(&p, &x, t).unwrap();
            let d = &m - &x;
            prop_assert!(d.dot(&fx) <= -d.norm_squared() / t + 1e-10);
            let mp = extra_grad_proj_map(&p, &x, t).unwrap();
            prop_assert!(p.set().distance(&mp).unwrap() <= 1e-9);
            // the optimality inequality for M built from the projection
            let y = p.set().sample(&mut rng);
            prop_assert!((&y - &m).dot(&(&m - &x + fx * t)) >= -1e-10);
        }
    }

    #[test]
    fn gap_dominates_scaled_residual(seed in any::<u64>(), t in 0.05..1.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in registry() {
            let x = p.set().sample(&mut rng);
            let g = gap(&p, &x).unwrap();
            let r = proj_residual(&p, &x, t).unwrap();
            prop_assert!(g >= 0.0);
            // t <F(x), x - M> >= ||x - M||^2
            prop_assert!(g >= r / t - 1e-12, "{}: G={g} P={r}", p.name());
            prop_assert_eq!(g <= 1e-8, r <= 1e-8);
        }
    }

    #[test]
    fn dual_gap_grows_with_the_sample_set(seed in any::<u64>(), cut in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in registry() {
            let x = p.set().sample(&mut rng);
            let pts: Vec<Vector> = (0..200).map(|_| p.set().sample(&mut rng)).collect();
            let small = dual_gap_over(&p, &x, &pts[..cut]).unwrap();
            let large = dual_gap_over(&p, &x, &pts).unwrap();
            prop_assert!(small <= large);
        }
    }

    #[test]
    fn dual_gap_below_gap_for_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in monotone_registry() {
            let x = p.set().sample(&mut rng);
            let pts: Vec<Vector> = (0..100).map(|_| p.set().sample(&mut rng)).collect();
            prop_assert!(dual_gap_over(&p, &x, &pts).unwrap() <= gap(&p, &x).unwrap() + 1e-12);
        }
    }

    #[test]
    fn non_solutions_move(seed in any::<u64>(), t in 0.05..1.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in registry() {
            let x = p.set().sample(&mut rng);
            if gap(&p, &x).unwrap() > 1e-3 {
                prop_assert!(grad_proj_map(&p, &x, t).unwrap() != x);
            }
        }
    }

    #[test]
    fn are_distance_to_minty_solution_is_nonincreasing(seed in any::<u64>(), frac in 0.1..0.9f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in monotone_registry() {
            let l = p.lipschitz().unwrap();
            let x0 = p.set().sample(&mut rng);
            let traj = solve_are(&p, &SolverConfig::new(frac / l, 60), &x0).unwrap();
            let sol = &p.declared_solutions()[0];
            let dist: Vec<f64> = (0..traj.len()).map(|k| (traj.x(k) - sol).norm()).collect();
            for w in dist.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-8, "{}: {w:?}", p.name());
            }
            // (1 - tau^2) sum_k ||x_h - x^k||^2 <= ||x^0 - x*||^2
            let bound = (&x0 - sol).norm_squared() / (traj.len() as f64 * (1.0 - traj.tau * traj.tau));
            prop_assert!(traj.min_residual_sq() <= bound + 1e-8);
        }
    }

    #[test]
    fn are_order_one_is_extra_gradient(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in registry() {
            let mut c = SolverConfig::new(1.0 / p.lipschitz().unwrap(), 40);
            c.strict_step = false;
            let x0 = p.set().sample(&mut rng);
            let (a, e) = (solve_are(&p, &c, &x0).unwrap(), solve_eg(&p, &c, &x0).unwrap());
            prop_assert!((a.final_x() - e.final_x()).amax() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monotone_pass_implies_pseudo_monotone_pass(p in affine_2d(), seed in any::<u64>()) {
        let reports = match classify_operator(&p, 400, seed, DEFAULT_MU) {
            Ok(r) => r,
            // no strong solution found for the candidate-based checks
            Err(Error::NoCandidates(_)) => classify_conditions(&p, &PAIRWISE, 400, seed, DEFAULT_MU).unwrap(),
            Err(e) => panic!("{e}"),
        };
        let verdict = |c| reports.iter().find(|r| r.condition == c).unwrap().verdict;
        if verdict(Condition::Monotone).is_satisfied() {
            prop_assert!(verdict(Condition::PseudoMonotone).is_satisfied());
            prop_assert!(verdict(Condition::QuasiMonotone).is_satisfied());
        }
        if verdict(Condition::StronglyMonotone).is_satisfied() {
            prop_assert!(verdict(Condition::Monotone).is_satisfied());
        }
        for r in &reports {
            if let Some(w) = &r.witness {
                let again = reevaluate_witness(&p, r).unwrap().unwrap();
                prop_assert!((again - w.value).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn sampled_minty_pass_gives_local_minty_pass(p in affine_2d(), seed in any::<u64>(), t in 0.05..1.0f64) {
        // a strong solution found by extra-gradient is the natural candidate
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = p.lipschitz_or_estimate(0).unwrap();
        let x0 = p.set().sample(&mut rng);
        let cand = solve_eg(&p, &SolverConfig::new(0.5 / l, 2000), &x0).unwrap().final_x();
        if minty_residual(&p, &cand, 441, 0).unwrap() == 0.0 {
            // every probe point, taken as an orbit term, satisfies the local condition
            for q in probe_points(&p, 441, 0) {
                prop_assert!(sequence_value(&p, Condition::LocalMinty, &q, &cand, t, 1.0).unwrap() >= -SLACK_TOL);
            }
        }
    }

    #[test]
    fn local_minty_star_implies_gp_star(
        p in affine_2d(),
        seed in any::<u64>(),
        t in 0.05..1.0f64,
        delta in 0.01..3.0f64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = p.set().sample(&mut rng);
        let cands: Vec<Vector> = (0..4).map(|_| p.set().sample(&mut rng)).collect();
        let lm = check_sequence_condition(&p, Condition::LocalMintyStar, &start, t, delta, 50, &cands).unwrap();
        let gp = check_sequence_condition(&p, Condition::GpStar, &start, t, delta, 50, &cands).unwrap();
        for (a, b) in lm.orbits[0].candidates.iter().zip(&gp.orbits[0].candidates) {
            if a.satisfied {
                prop_assert!(b.satisfied);
            }
        }
    }

    #[test]
    fn minty_optimality_never_contradicts(
        a in vec(-2.0..2.0f64, 4),
        b in vec(-1.0..1.0f64, 2),
        seed in any::<u64>(),
    ) {
        // f(x) = 1/2 x^T S x + b^T x with S the symmetric part of a
        let m = DMatrix::from_row_slice(2, 2, &a);
        let s = (&m + m.transpose()) * 0.5;
        let (s1, s2) = (s.clone(), s.clone());
        let bv = DVector::from_vec(b);
        let (b1, b2) = (bv.clone(), bv.clone());
        let f = Objective::new(move |x: &Vector| 0.5 * x.dot(&(&s1 * x)) + b1.dot(x))
            .with_gradient(move |x: &Vector| &s2 * x + &b2);
        let set = FeasibleSet::cube(2, -1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let c = set.sample(&mut rng);
            prop_assert!(check_minty_optimality(&f, &set, &c, 121, 0).unwrap().is_consistent());
        }
        // the exact minimizer over the box, when S is positive definite, passes both
        if s.symmetric_eigenvalues().min() > 0.1 {
            let l = s.symmetric_eigenvalues().max();
            let p = affine_box_problem(s.as_slice(), bv.as_slice());
            let x = solve_eg(&p, &SolverConfig::new(0.5 / l, 5000), &set.center()).unwrap().final_x();
            let r = check_minty_optimality(&f, &set, &x, 121, 0).unwrap();
            prop_assert!(r.global_pass.verdict.is_satisfied());
        }
    }
}

#[test]
fn linear_minimize_matches_fine_grid() {
    let sets = [
        FeasibleSet::cube(1, -1.0, 1.0).unwrap(),
        FeasibleSet::cube(2, -1.0, 1.0).unwrap(),
        FeasibleSet::unit_ball(2, 1.0).unwrap(),
        FeasibleSet::new_simplex(2).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for set in sets {
        // spacing 1e-3 on a unit-length axis span of 2
        let budget = 2001usize.pow(set.dim() as u32);
        let grid = set.grid(budget);
        for _ in 0..3 {
            let d = wild_point(&mut rng, set.dim());
            let (_, min) = set.linear_minimize(&d).unwrap();
            let grid_min = grid.iter().map(|p| d.dot(p)).fold(f64::INFINITY, f64::min);
            assert!(min <= grid_min + 1e-12);
            assert!(grid_min - min <= 1e-6 * d.norm().max(1.0), "{set:?}: {grid_min} vs {min}");
        }
    }
}

#[test]
fn declared_solutions_are_fixed_points() {
    for p in registry() {
        for sol in p.declared_solutions() {
            for t in [0.1, 0.5, 1.0] {
                assert!((grad_proj_map(&p, sol, t).unwrap() - sol).norm() <= 1e-10, "{}", p.name());
                assert!(gap(&p, sol).unwrap() <= 1e-8);
                assert!(proj_residual(&p, sol, t).unwrap() <= 1e-8);
            }
        }
    }
}
