//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use votetrade_core::distributions::{kde_from_survey, Bandwidth, OrdinalScale, SurveyRecord};
use votetrade_core::equilibrium::{Game, ProfileEvaluation};
use votetrade_core::io::{read_survey_csv, write_survey_csv};
use votetrade_core::simulator::{empirical_effective_q, empirical_pivot_frequency, empirical_trade_value};
use votetrade_core::*;

const N: usize = 11;

// Pinned tolerances.
const UNIFORM_ANGLE_TOL: f64 = 1e-6;
const UNIFORM_RESIDUAL_TOL: f64 = 1e-6;
const UNIFORM_SOLVE_BUDGET: Duration = Duration::from_secs(1);
const UNIFORM_WELFARE_TOL: f64 = 1e-3;
const WELFARE_BUDGET: Duration = Duration::from_secs(30);
const HEADLINE_TOL: f64 = 0.01;
const VEE_WELFARE_MAX: f64 = 1e-6;
const SYMMETRY_FACTOR: f64 = 10.0;
const NE_SAMPLES: usize = 1000;
const NE_BAND: f64 = 1e-3;
const MC_TRIALS: u64 = 1_000_000;
const MC_SIGMAS: f64 = 3.0;
const MC_BUDGET: Duration = Duration::from_secs(60);
const KDE_MASS_TOL: f64 = 1e-6;
const KDE_QUADRANT_TOL: f64 = 0.05;
const STARTS: usize = 10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn skewed() -> Distribution {
    Distribution::quadrant_constant([0.1, 0.4, 0.3, 0.2]).unwrap()
}

fn builtins() -> Vec<(&'static str, Distribution)> {
    vec![
        ("uniform", Distribution::uniform()),
        ("quadrant-constant", skewed()),
        ("product-power-4", Distribution::product_power(4).unwrap()),
        ("product-tent", Distribution::product_tent()),
        ("product-vee", Distribution::product_vee()),
    ]
}

fn solve(dist: &Distribution, mode: Mode) -> Result<EquilibriumSolution, String> {
    solve_equilibrium(dist, &SolverOptions::default(), mode).map_err(|e| e.to_string())
}

fn welfare_at(dist: &Distribution, mode: Mode) -> Result<(EquilibriumSolution, WelfareReport), String> {
    let sol = solve(dist, mode)?;
    let report = beneficial_trade_probability(dist, &sol.theta_star, N, mode).map_err(|e| e.to_string())?;
    Ok((sol, report))
}

fn headline(dist: &Distribution, target: f64, tol: f64) -> Outcome {
    let (_, r) = welfare_at(dist, Mode::Myopic)?;
    let p = r.beneficial_probability;
    check((p - target).abs() <= tol, format!("P = {p:.4}, target {target} ± {tol}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sol = solve(&Distribution::uniform(), Mode::Myopic)?;
    let elapsed = start.elapsed();
    let dev = sol.theta_star.angles().iter().map(|a| (a - FRAC_PI_4).abs()).fold(0.0, f64::max);
    check(
        dev <= UNIFORM_ANGLE_TOL && sol.residual <= UNIFORM_RESIDUAL_TOL && elapsed <= UNIFORM_SOLVE_BUDGET,
        format!(
            "max |θ - π/4| = {dev:.1e}, residual {:.1e}, {:.3}s (limits {UNIFORM_ANGLE_TOL:e}, {UNIFORM_RESIDUAL_TOL:e}, {:?})",
            sol.residual,
            elapsed.as_secs_f64(),
            UNIFORM_SOLVE_BUDGET
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let r = beneficial_trade_probability(&Distribution::uniform(), &StrategyProfile::naive(), N, Mode::Myopic)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let p = r.beneficial_probability;
    check(
        (p - 1.0 / 9.0).abs() <= UNIFORM_WELFARE_TOL && elapsed <= WELFARE_BUDGET,
        format!("P = {p:.6}, target 1/9 ± {UNIFORM_WELFARE_TOL}, {:.3}s", elapsed.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let dist = skewed();
    let (sol, r) = welfare_at(&dist, Mode::Myopic)?;
    let p = r.beneficial_probability;
    let green = sol.theta_star.offered_roles(0.8, 0.4);
    let white = sol.theta_star.offered_roles(-0.9, 0.4);
    check(
        (p - 0.185).abs() <= HEADLINE_TOL && green.both() && !white.any(),
        format!(
            "P = {p:.4}, target 0.185 ± {HEADLINE_TOL}; (0.8,0.4) both = {}, (-0.9,0.4) none = {}",
            green.both(),
            !white.any()
        ),
    )
}

fn criterion_4() -> Outcome {
    headline(&Distribution::product_power(4).unwrap(), 0.95, HEADLINE_TOL)
}

fn criterion_5() -> Outcome {
    let (_, tent) = welfare_at(&Distribution::product_tent(), Mode::Myopic)?;
    let (_, vee) = welfare_at(&Distribution::product_vee(), Mode::Myopic)?;
    let (pt, pv) = (tent.beneficial_probability, vee.beneficial_probability);
    check(
        (pt - 0.245).abs() <= HEADLINE_TOL && pv < VEE_WELFARE_MAX,
        format!("tent P = {pt:.4} (target 0.245 ± {HEADLINE_TOL}), vee P = {pv:.1e} (< {VEE_WELFARE_MAX:e})"),
    )
}

/// Point-symmetric survey: every response (a, b) is paired with (8-a, 8-b).
fn symmetric_kde() -> Distribution {
    let base = [(7, 6, 9), (6, 7, 5), (5, 7, 3), (7, 3, 4), (2, 6, 6), (6, 1, 2), (5, 5, 7), (3, 6, 3)];
    let mut records = Vec::new();
    for (a, b, count) in base {
        for _ in 0..count {
            records.push(SurveyRecord { response_1: a, response_2: b });
            records.push(SurveyRecord { response_1: 8 - a, response_2: 8 - b });
        }
    }
    kde_from_survey(&records, Bandwidth::Auto, OrdinalScale::default()).unwrap()
}

fn naive_residual(dist: &Distribution, mode: Mode) -> Result<(f64, f64), String> {
    let game = Game::new(dist, N, mode).map_err(|e| e.to_string())?;
    let r = game.evaluate(&StrategyProfile::naive()).map_err(|e| e.to_string())?.residual();
    Ok((r, SYMMETRY_FACTOR * game.tolerance))
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, dist) in [
        ("tent", Distribution::product_tent()),
        ("vee", Distribution::product_vee()),
        ("symmetric kde", symmetric_kde()),
    ] {
        for mode in [Mode::Myopic, Mode::Groupwide] {
            let (r, limit) = naive_residual(&dist, mode)?;
            ok &= r <= limit;
            lines.push(format!("{name}/{mode:?} {r:.1e}≤{limit:.0e}"));
        }
    }
    check(ok, lines.join(", "))
}

/// Angle of `(x, y)` from the gain axis of `trade`, and its radius.
fn polar(trade: TradeType, x: f64, y: f64) -> (f64, f64) {
    let (gain, other) = match trade.role() {
        Role::GivesT2 => (x.abs(), y.abs()),
        Role::GivesT1 => (y.abs(), x.abs()),
    };
    (other.atan2(gain), x.hypot(y))
}

/// Counts sign violations of the trade value inside and outside each wedge,
/// ignoring points within `NE_BAND` of the wedge boundary.
fn strict_ne_violations(eval: &ProfileEvaluation, seed: u64) -> Result<(usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut checked = 0;
    let br = eval.best_response();
    for trade in TradeType::ALL {
        if br.undefined[trade.slot()] {
            continue;
        }
        let theta = eval.profile.angle(trade);
        let (sx, sy) = trade.quadrant().signs();
        let (mut inside, mut outside) = (0, 0);
        let mut draws = 0;
        while (inside < NE_SAMPLES || outside < NE_SAMPLES) && draws < 200 * NE_SAMPLES {
            draws += 1;
            let (x, y) = (sx * rng.random::<f64>(), sy * rng.random::<f64>());
            if x == 0.0 || y == 0.0 {
                continue;
            }
            let (phi, r) = polar(trade, x, y);
            if r * (phi - theta).sin().abs() <= NE_BAND {
                continue;
            }
            let interior = phi < theta;
            if (interior && inside >= NE_SAMPLES) || (!interior && outside >= NE_SAMPLES) {
                continue;
            }
            if interior != eval.profile.offers(trade, x, y) {
                violations += 1;
            }
            let ev = eval
                .trade_expected_value(trade, UtilityPair::new(x, y).unwrap())
                .map_err(|e| e.to_string())?;
            if interior {
                inside += 1;
                violations += usize::from(ev <= 0.0);
            } else {
                outside += 1;
                violations += usize::from(ev >= 0.0);
            }
            checked += 1;
        }
        // A wedge at 0 or π/2 leaves one side empty up to the band.
        let reachable = |count: usize| count == NE_SAMPLES || !(0.01..=FRAC_PI_2 - 0.01).contains(&theta);
        if !reachable(inside) || !reachable(outside) {
            return Err(format!("R{} sampled only {inside}/{outside} points", trade.index()));
        }
    }
    Ok((violations, checked))
}

fn criterion_7() -> Outcome {
    let mut cases = builtins();
    cases.push(("symmetric kde", symmetric_kde()));
    cases.push(("survey kde", survey_kde()?.0));
    let mut total = 0;
    let mut bad = 0;
    let mut equilibria = 0;
    for (k, (name, dist)) in cases.iter().enumerate() {
        for mode in [Mode::Myopic, Mode::Groupwide] {
            let sol = solve(dist, mode).map_err(|e| format!("{name}/{mode:?}: {e}"))?;
            let (v, c) = strict_ne_violations(&sol.evaluation(), k as u64)?;
            bad += v;
            total += c;
            equilibria += 1;
        }
    }
    check(bad == 0, format!("{bad} violations in {total} points over {equilibria} equilibria, band {NE_BAND}"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let uniform = Distribution::uniform();
    let naive = StrategyProfile::naive();
    let trade = TradeType::new(1).unwrap();
    let u = UtilityPair::new(0.8, 0.2).unwrap();
    let analytic = Game::new(&uniform, N, Mode::Myopic)
        .and_then(|g| g.evaluate(&naive))
        .and_then(|e| e.trade_expected_value(trade, u))
        .map_err(|e| e.to_string())?;
    let value = empirical_trade_value(&uniform, &naive, N, trade, u, MC_TRIALS, 8).map_err(|e| e.to_string())?;
    let pivot_exact = 126.0 / 512.0;
    let pivot = empirical_pivot_frequency(&uniform, N, Issue::T1, MC_TRIALS, 9).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let zv = (value.mean - analytic) / value.std_error;
    let zp = (pivot.mean - pivot_exact) / pivot.std_error;
    check(
        (analytic - 0.14766).abs() < 1e-5 && zv.abs() <= MC_SIGMAS && zp.abs() <= MC_SIGMAS && elapsed <= MC_BUDGET,
        format!(
            "value {:.5} ± {:.5} vs {analytic:.5} (z = {zv:.2}); pivot {:.5} ± {:.5} vs {pivot_exact:.5} (z = {zp:.2}); {:.1}s",
            value.mean,
            value.std_error,
            pivot.mean,
            pivot.std_error,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, (name, dist)) in builtins().into_iter().enumerate() {
        let sol = solve(&dist, Mode::Groupwide)?;
        let exact = effective_q(&dist, &sol.theta_star, N).map_err(|e| e.to_string())?;
        let sim = empirical_effective_q(&dist, &sol.theta_star, N, MC_TRIALS, 90 + k as u64).map_err(|e| e.to_string())?;
        let z = [
            (sim[0].mean - exact.q1_plus) / sim[0].std_error,
            (sim[1].mean - exact.q2_plus) / sim[1].std_error,
        ];
        ok &= z.iter().all(|z| z.abs() <= MC_SIGMAS);
        lines.push(format!("{name} z = ({:.2}, {:.2})", z[0], z[1]));
    }
    let power = Distribution::product_power(4).unwrap();
    let (_, myopic) = welfare_at(&power, Mode::Myopic)?;
    let (_, group) = welfare_at(&power, Mode::Groupwide)?;
    let (pm, pg) = (myopic.beneficial_probability, group.beneficial_probability);
    ok &= pg < pm;
    lines.push(format!("α=4 groupwide {pg:.4} < myopic {pm:.4}"));
    check(ok, lines.join(", "))
}

/// Synthetic 7-point survey, written to CSV and read back. Responses avoid
/// the neutral midpoint so every record has a quadrant. Returns the density
/// and the sample quadrant frequencies.
fn survey_kde() -> Result<(Distribution, [f64; 4]), String> {
    let cells = [
        ((6, 6), 36),
        ((7, 5), 24),
        ((2, 6), 15),
        ((1, 7), 10),
        ((2, 2), 30),
        ((3, 1), 15),
        ((6, 2), 12),
        ((5, 1), 8),
    ];
    let records: Vec<SurveyRecord> = cells
        .iter()
        .flat_map(|&((a, b), c)| std::iter::repeat_n(SurveyRecord { response_1: a, response_2: b }, c))
        .collect();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("survey.csv");
    write_survey_csv(&path, &records).map_err(|e| e.to_string())?;
    let scale = OrdinalScale::default();
    let read = read_survey_csv(&path, scale).map_err(|e| e.to_string())?;
    let mut freq = [0.0; 4];
    for r in &read {
        let q = Quadrant::of(scale.to_utility(r.response_1), scale.to_utility(r.response_2));
        freq[q.index()] += 1.0 / read.len() as f64;
    }
    let dist = kde_from_survey(&read, Bandwidth::Auto, scale).map_err(|e| e.to_string())?;
    Ok((dist, freq))
}

fn criterion_10() -> Outcome {
    let (dist, freq) = survey_kde()?;
    let report = validate(&dist, KDE_MASS_TOL);
    let quad_dev = report
        .quadrant_masses
        .iter()
        .zip(freq)
        .map(|(m, f)| (m - f).abs())
        .fold(0.0, f64::max);
    let mut ok = report.passed && (report.total_mass - 1.0).abs() <= KDE_MASS_TOL && quad_dev <= KDE_QUADRANT_TOL;
    let mut ne = Vec::new();
    for mode in [Mode::Myopic, Mode::Groupwide] {
        let sol = solve(&dist, mode)?;
        let (v, c) = strict_ne_violations(&sol.evaluation(), 100)?;
        ok &= v == 0;
        ne.push(format!("{mode:?} {v}/{c}"));
    }
    let mut counts = Vec::new();
    for (name, d) in builtins() {
        for mode in [Mode::Myopic, Mode::Groupwide] {
            let opts = SolverOptions { starts: STARTS, ..Default::default() };
            let set = find_equilibria(&d, &opts, mode).map_err(|e| e.to_string())?;
            ok &= set.solutions.len() == 1 && set.failures.is_empty();
            if set.solutions.len() != 1 || !set.failures.is_empty() {
                counts.push(format!("{name}/{mode:?}: {} solutions, {} failed starts", set.solutions.len(), set.failures.len()));
            }
        }
    }
    let multi = if counts.is_empty() {
        format!("one equilibrium from {STARTS} starts on all builtins in both modes")
    } else {
        counts.join("; ")
    };
    check(
        ok,
        format!(
            "survey kde mass {:.8}, max quadrant deviation {quad_dev:.4} (≤ {KDE_QUADRANT_TOL}), NE violations {}; {multi}",
            report.total_mass,
            ne.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("uniform equilibrium", criterion_1),
        ("uniform welfare", criterion_2),
        ("quadrant-constant welfare and offer sets", criterion_3),
        ("product-power α=4 welfare", criterion_4),
        ("tent and vee welfare", criterion_5),
        ("point symmetry fixes naive", criterion_6),
        ("strict equilibrium signs", criterion_7),
        ("simulator matches trade value and pivot", criterion_8),
        ("groupwide vote shares", criterion_9),
        ("survey ingestion and uniqueness", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.2}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
