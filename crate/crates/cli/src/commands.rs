use std::path::{Path, PathBuf};

use serde::Serialize;
use votetrade_core::distributions::{Distribution, OrdinalScale};
use votetrade_core::equilibrium::{find_equilibria, solve_equilibrium, EquilibriumError, Game, ProfileEvaluation};
use votetrade_core::io::{
    self, region_mask, welfare_mask, write_grid_file, BandwidthParam, DistributionSpec, IoError, KdeParams,
    SolutionFile,
};
use votetrade_core::simulator::{empirical_effective_q, simulate as run_simulation, trial_records, Estimate, SimulationError};
use votetrade_core::welfare::{WelfareError, WelfareReport};
use votetrade_core::{
    effective_q, validate, EquilibriumSolution, Mode, SimMode, SimulationReport, SolverOptions, ValidationReport,
    WelfareBoundarySet,
};

use crate::{ExportGridArgs, GameArgs, GridKind, IngestArgs, SimulateArgs, SolveArgs, WelfareArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_IO: u8 = 3;

const DEFAULT_N: usize = 11;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Distribution(_) | IoError::Spec(_) => EXIT_USAGE,
            IoError::Io { .. } | IoError::Json { .. } | IoError::BadRows { .. } | IoError::Empty { .. } => EXIT_IO,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EquilibriumError> for Failure {
    fn from(e: EquilibriumError) -> Self {
        let code = match e {
            EquilibriumError::InvalidCommitteeSize(_) | EquilibriumError::InvalidOptions(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        let mut message = e.to_string();
        if let EquilibriumError::NonConvergence { last, residuals } = &e {
            let tail: Vec<String> = residuals.iter().rev().take(5).rev().map(|r| format!("{r:.3e}")).collect();
            message.push_str(&format!("\nlast residuals: {}\nlast profile: {:?}", tail.join(" "), last.angles()));
        }
        Failure { code, message }
    }
}

impl From<WelfareError> for Failure {
    fn from(e: WelfareError) -> Self {
        match e {
            WelfareError::Equilibrium(e) => e.into(),
            other => Failure {
                code: EXIT_NUMERICAL,
                message: other.to_string(),
            },
        }
    }
}

impl From<SimulationError> for Failure {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::NoTrials => usage(e.to_string()),
            SimulationError::Equilibrium(e) => e.into(),
            other => Failure {
                code: EXIT_NUMERICAL,
                message: other.to_string(),
            },
        }
    }
}

fn write_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn check_grid(resolution: usize) -> Result<usize, Failure> {
    if resolution < 2 {
        return Err(usage(format!("--grid must be at least 2, got {resolution}")));
    }
    Ok(resolution)
}

fn solver_options(game: &GameArgs, starts: usize) -> SolverOptions {
    SolverOptions {
        n: game.n.unwrap_or(DEFAULT_N),
        tolerance: game.tol,
        max_iterations: game.max_iter,
        starts,
        seed: game.seed,
        ..Default::default()
    }
}

/// An equilibrium either read from a solution file or solved inline, and
/// its evaluation under the given distribution.
fn equilibrium(dist: &Distribution, game: &GameArgs, solution: Option<&Path>) -> Result<ProfileEvaluation, Failure> {
    let Some(path) = solution else {
        let sol = solve_equilibrium(dist, &solver_options(game, 1), game.mode.unwrap_or_default())?;
        return Ok(sol.evaluation());
    };
    let file: SolutionFile = io::read_json(path)?;
    let sol = file.solution;
    if game.n.is_some_and(|n| n != sol.n) || game.mode.is_some_and(|m| m != sol.mode) {
        return Err(usage(format!(
            "--n/--mode disagree with {} (n = {}, mode = {:?})",
            path.display(),
            sol.n,
            sol.mode
        )));
    }
    let eval = Game::new(dist, sol.n, sol.mode)?.evaluate(&sol.theta_star)?;
    if eval.table != sol.mass_table {
        return Err(usage(format!(
            "{} was not solved for the distribution {}",
            path.display(),
            game.dist.display()
        )));
    }
    Ok(eval)
}

pub fn solve(args: SolveArgs) -> Result<(), Failure> {
    if args.starts == 0 {
        return Err(usage("--starts must be at least 1"));
    }
    let dist = io::load_distribution(&args.game.dist)?;
    let mode = args.game.mode.unwrap_or_default();
    let opts = solver_options(&args.game, args.starts);
    let file = if args.starts == 1 {
        SolutionFile::new(solve_equilibrium(&dist, &opts, mode)?)
    } else {
        let set = find_equilibria(&dist, &opts, mode)?;
        for (k, msg) in &set.failures {
            eprintln!("start {k}: {msg}");
        }
        let mut solutions = set.solutions.into_iter();
        let first: EquilibriumSolution = solutions.next().ok_or_else(|| Failure {
            code: EXIT_NUMERICAL,
            message: format!("none of {} starts converged", args.starts),
        })?;
        let mut file = SolutionFile::new(first);
        file.other_equilibria = solutions.map(|s| s.theta_star).collect();
        file
    };
    io::write_json(&args.out, &file)?;
    eprintln!(
        "residual {:.2e} after {} iterations; {} distinct equilibria",
        file.solution.residual,
        file.solution.iterations,
        1 + file.other_equilibria.len()
    );
    Ok(())
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

pub fn welfare(args: WelfareArgs) -> Result<(), Failure> {
    let grid = args.grid.map(check_grid).transpose()?;
    let dist = io::load_distribution(&args.game.dist)?;
    let eval = equilibrium(&dist, &args.game, args.solution.as_deref())?;
    let report = WelfareReport::from_evaluation(&dist, &eval, dist.default_tolerance())?;
    io::write_json(&args.out, &report)?;
    if let Some(res) = grid {
        let theta = eval.profile;
        write_grid_file(&sibling(&args.out, "-regions.csv"), res, "region mask (bit k-1 set inside R_k)", |x, y| {
            f64::from(region_mask(&theta, x, y))
        })?;
        let set = WelfareBoundarySet::from_evaluation(&eval);
        write_grid_file(
            &sibling(&args.out, "-welfare.csv"),
            res,
            "welfare mask (1 gives t2, 2 gives t1, 4 t2 offer beneficial, 8 t1 offer beneficial)",
            |x, y| f64::from(welfare_mask(&set, x, y)),
        )?;
    }
    eprintln!("beneficial probability {:.4}", report.beneficial_probability);
    Ok(())
}

#[derive(Serialize)]
struct VoteShareCheck {
    analytic: [f64; 2],
    empirical: [Estimate; 2],
    z: [f64; 2],
    within_three_se: bool,
}

#[derive(Serialize)]
struct SimulationOutput {
    #[serde(flatten)]
    report: SimulationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    vote_shares: Option<VoteShareCheck>,
}

pub fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let dist = io::load_distribution(&args.game.dist)?;
    let eval = equilibrium(&dist, &args.game, args.solution.as_deref())?;
    let sim_mode = args.sim_mode.unwrap_or(match eval.mode {
        Mode::Myopic => SimMode::SingleTrade,
        Mode::Groupwide => SimMode::AllPairs,
    });
    let set = WelfareBoundarySet::from_evaluation(&eval);
    let seed = args.game.seed;
    let report = run_simulation(&dist, &eval.profile, eval.n, sim_mode, args.trials, seed, Some(&set))?;
    let vote_shares = if sim_mode == SimMode::AllPairs {
        let exact = effective_q(&dist, &eval.profile, eval.n).map_err(EquilibriumError::from)?;
        let analytic = [exact.q1_plus, exact.q2_plus];
        let empirical = empirical_effective_q(&dist, &eval.profile, eval.n, args.trials, seed)?;
        let z = [0, 1].map(|k| (empirical[k].mean - analytic[k]) / empirical[k].std_error);
        Some(VoteShareCheck {
            analytic,
            empirical,
            z,
            within_three_se: z.iter().all(|z| z.abs() <= 3.0),
        })
    } else {
        None
    };
    let records = args
        .dump
        .as_ref()
        .map(|_| trial_records(&dist, &eval.profile, eval.n, sim_mode, args.dump_count.min(args.trials), seed));
    io::write_json(&args.out, &SimulationOutput { report, vote_shares })?;
    if let (Some(path), Some(records)) = (&args.dump, records) {
        io::write_json(path, &records)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestReport {
    records: usize,
    bandwidth: [f64; 2],
    #[serde(flatten)]
    validation: ValidationReport,
}

pub fn ingest(args: IngestArgs) -> Result<(), Failure> {
    let grid = args.grid.map(check_grid).transpose()?;
    let bandwidth = match args.bandwidth.parse::<f64>() {
        Ok(h) => BandwidthParam::Fixed(h),
        Err(_) => BandwidthParam::Named(args.bandwidth.clone()),
    };
    let csv = std::fs::canonicalize(&args.csv).map_err(|e| write_failure(&args.csv, e))?;
    let spec = DistributionSpec {
        family: votetrade_core::distributions::Family::Kde,
        params: serde_json::to_value(KdeParams {
            csv: csv.clone(),
            scale: args.scale,
            bandwidth: Some(bandwidth),
        })
        .map_err(|e| usage(e.to_string()))?,
    };
    let records = io::read_survey_csv(&csv, OrdinalScale::new(args.scale[0], args.scale[1]).map_err(IoError::from)?)?;
    let dist = io::build_distribution(&spec, Path::new("."))?;
    let Distribution::Kde(kde) = &dist else {
        unreachable!("kde spec builds a kde");
    };
    let validation = validate(&dist, args.tol);
    let passed = validation.passed;
    let report = IngestReport {
        records: records.len(),
        bandwidth: kde.bandwidth(),
        validation,
    };
    // A failed validation still leaves its report behind, but no spec.
    io::write_json(&args.report.unwrap_or_else(|| sibling(&args.out, "-validation.json")), &report)?;
    if !passed {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!("validation failed: {}", report.validation.failures.join("; ")),
        });
    }
    io::write_json(&args.out, &spec)?;
    if let Some(res) = grid {
        write_grid_file(&sibling(&args.out, "-density.csv"), res, "density", |x, y| dist.density_unchecked(x, y))?;
    }
    eprintln!(
        "{} records, mass {:.8}, quadrant masses {:?}",
        report.records, report.validation.total_mass, report.validation.quadrant_masses
    );
    Ok(())
}

pub fn export_grid(args: ExportGridArgs) -> Result<(), Failure> {
    let res = check_grid(args.grid)?;
    let dist = io::load_distribution(&args.game.dist)?;
    match args.kind {
        GridKind::Density => write_grid_file(&args.out, res, "density", |x, y| dist.density_unchecked(x, y))?,
        GridKind::Regions => {
            let theta = equilibrium(&dist, &args.game, args.solution.as_deref())?.profile;
            write_grid_file(&args.out, res, "region mask (bit k-1 set inside R_k)", |x, y| {
                f64::from(region_mask(&theta, x, y))
            })?
        }
        GridKind::Welfare => {
            let set = WelfareBoundarySet::from_evaluation(&equilibrium(&dist, &args.game, args.solution.as_deref())?);
            write_grid_file(
                &args.out,
                res,
                "welfare mask (1 gives t2, 2 gives t1, 4 t2 offer beneficial, 8 t1 offer beneficial)",
                |x, y| f64::from(welfare_mask(&set, x, y)),
            )?
        }
    }
    Ok(())
}
