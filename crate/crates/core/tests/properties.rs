use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use votetrade_core::equilibrium::satisfies_lower_bound;
use votetrade_core::distributions::{kde_from_survey, Bandwidth, OrdinalScale, SurveyRecord};
use votetrade_core::simulator::SimMode;
use votetrade_core::*;

const N: usize = 11;

fn solve(dist: &Distribution, mode: Mode) -> EquilibriumSolution {
    solve_equilibrium(dist, &SolverOptions::default(), mode).unwrap()
}

fn probability(dist: &Distribution, theta: &StrategyProfile, mode: Mode) -> f64 {
    beneficial_trade_probability(dist, theta, N, mode).unwrap().beneficial_probability
}

fn symmetric_kde() -> Distribution {
    let mut records = Vec::new();
    for (a, b) in [(7, 5), (6, 6), (2, 5), (6, 1), (5, 5)] {
        records.push(SurveyRecord { response_1: a, response_2: b });
        records.push(SurveyRecord { response_1: 8 - a, response_2: 8 - b });
    }
    kde_from_survey(&records, Bandwidth::Fixed(0.3), OrdinalScale::default()).unwrap()
}

#[test]
fn transposed_density_transposes_the_equilibrium() {
    let dist = Distribution::quadrant_constant([0.1, 0.4, 0.3, 0.2]).unwrap();
    for mode in [Mode::Myopic, Mode::Groupwide] {
        let direct = solve(&dist, mode);
        let swapped = solve(&dist.transposed(), mode);
        assert!(direct.theta_star.transposed().distance(&swapped.theta_star) < 1e-6);
        assert_abs_diff_eq!(
            probability(&dist, &direct.theta_star, mode),
            probability(&dist.transposed(), &swapped.theta_star, mode),
            epsilon = 1e-8
        );
    }
}

#[test]
fn point_symmetric_densities_ignore_the_mode() {
    for dist in [
        Distribution::uniform(),
        Distribution::product_tent(),
        Distribution::product_vee(),
        symmetric_kde(),
    ] {
        let myopic = solve(&dist, Mode::Myopic);
        let group = solve(&dist, Mode::Groupwide);
        assert!(myopic.theta_star.distance(&StrategyProfile::naive()) < 1e-8);
        assert!(group.theta_star.distance(&StrategyProfile::naive()) < 1e-8);
        assert_abs_diff_eq!(
            probability(&dist, &myopic.theta_star, Mode::Myopic),
            probability(&dist, &group.theta_star, Mode::Groupwide),
            epsilon = 1e-9
        );
    }
}

#[test]
fn welfare_rises_with_concentration_at_the_extremes() {
    let mut last = probability(&Distribution::uniform(), &StrategyProfile::naive(), Mode::Myopic);
    for alpha in [2, 4, 6, 8] {
        let dist = Distribution::product_power(alpha).unwrap();
        let p = probability(&dist, &solve(&dist, Mode::Myopic).theta_star, Mode::Myopic);
        assert!(p > last, "α = {alpha}: {p} after {last}");
        last = p;
    }
}

#[test]
fn welfare_boundary_parallels_the_wedge_at_equilibrium() {
    for dist in [
        Distribution::quadrant_constant([0.1, 0.4, 0.3, 0.2]).unwrap(),
        Distribution::product_power(4).unwrap(),
        Distribution::product_tent(),
    ] {
        for mode in [Mode::Myopic, Mode::Groupwide] {
            let sol = solve(&dist, mode);
            let set = WelfareBoundarySet::from_evaluation(&sol.evaluation());
            for t in TradeType::ALL {
                if !sol.undefined[t.slot()] {
                    assert_abs_diff_eq!(set.slope(t).atan(), sol.theta_star.angle(t), epsilon = 1e-5);
                }
            }
        }
    }
}

#[test]
fn simulation_does_not_depend_on_thread_count() {
    let dist = Distribution::product_power(4).unwrap();
    let theta = solve(&dist, Mode::Myopic).theta_star;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&dist, &theta, N, SimMode::AllPairs, 5000, 17, None).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn simulated_trades_are_beneficial_at_the_analytic_rate() {
    let uniform = Distribution::uniform();
    let skewed = Distribution::quadrant_constant([0.1, 0.4, 0.3, 0.2]).unwrap();
    for (dist, theta) in [
        (&uniform, StrategyProfile::naive()),
        (&skewed, solve(&skewed, Mode::Myopic).theta_star),
    ] {
        let report = beneficial_trade_probability(dist, &theta, N, Mode::Myopic).unwrap();
        let sim = simulate(dist, &theta, N, SimMode::SingleTrade, 1_000_000, 5, Some(&report.coefficients)).unwrap();
        let b = sim.beneficial_fraction.unwrap();
        assert!(b.agrees_with(report.executed_trade_probability, 3.0), "{b:?} vs {}", report.executed_trade_probability);
    }
}

fn quadrant_weights() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.05f64..1.0).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.map(|v| v / s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrant_constant_equilibria_are_fixed_points(w in quadrant_weights()) {
        let dist = Distribution::quadrant_constant(w).unwrap();
        for mode in [Mode::Myopic, Mode::Groupwide] {
            let sol = solve(&dist, mode);
            prop_assert!(sol.converged);
            prop_assert!(sol.evaluation().residual() <= 1e-7);
            prop_assert!(satisfies_lower_bound(&sol.theta_star, sol.theta_min));
        }
    }

    #[test]
    fn welfare_probabilities_are_probabilities(w in quadrant_weights()) {
        let dist = Distribution::quadrant_constant(w).unwrap();
        let sol = solve(&dist, Mode::Myopic);
        let r = beneficial_trade_probability(&dist, &sol.theta_star, N, Mode::Myopic).unwrap();
        for p in [
            r.beneficial_probability,
            r.offer_weighted_probability,
            r.unconditional_probability,
            r.executed_trade_probability,
        ] {
            prop_assert!((0.0..=1.0).contains(&p), "{p}");
        }
        prop_assert!(r.unconditional_probability <= r.offer_weighted_probability + 1e-12);
        for (k, t) in TradeType::ALL.iter().enumerate() {
            prop_assert!(r.beneficial_masses[k] <= r.role_masses[t.role() as usize] + 1e-12);
        }
    }

    #[test]
    fn transposition_commutes_with_welfare(w in quadrant_weights()) {
        let dist = Distribution::quadrant_constant(w).unwrap();
        let theta = solve(&dist, Mode::Myopic).theta_star;
        prop_assert!(
            (probability(&dist, &theta, Mode::Myopic)
                - probability(&dist.transposed(), &theta.transposed(), Mode::Myopic))
            .abs()
                < 1e-8
        );
    }
}
