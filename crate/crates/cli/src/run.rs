//! `simulate` and `analyze`: a configured PDE run and its post-processing.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use shadow_hopf::analyze::{
    antiphase_score, extract_periods, write_analysis_csv, AnalysisSummary, PeriodEstimate,
};
use shadow_hopf::config::ExperimentConfig;
use shadow_hopf::simulate::{make_initial, run, Grid, Trajectory};
use shadow_hopf::spectrum::hopf_point;
use shadow_hopf::{build_profile, Params, Sign};

use crate::Record;

/// Default length of the start-up transient dropped before period extraction.
pub const DEFAULT_SKIP: f64 = 10.0;
/// Default window on which layer anti-phase is scored.
pub const DEFAULT_ANTIPHASE_WINDOW: (f64, f64) = (0.0, 200.0);

/// A finished run and where it was written.
pub struct SimulationOutput {
    pub config: ExperimentConfig,
    pub grid: Grid,
    pub trajectory: Trajectory,
    pub summary: Record,
    pub dir: PathBuf,
}

/// Runs `config` and writes `config.txt`, `trajectory.csv`,
/// `snapshots.csv` (when snapshots are requested) and `summary.txt` to `dir`.
pub fn simulate(config: &ExperimentConfig, dir: &Path) -> anyhow::Result<SimulationOutput> {
    config.validate()?;
    let params = config.params()?;
    let grid = config.grid()?;
    let initial = make_initial(&config.initial_kind()?, config.eps, &grid, config.xi0)?;
    let started = Instant::now();
    let trajectory = run(&initial, &params, &grid, &config.run_options())?;
    let elapsed = started.elapsed().as_secs_f64();

    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.txt"), config.to_text())?;
    write_with(
        &dir.join("trajectory.csv"),
        |w| Ok(trajectory.write_csv(w)?),
    )?;
    if !trajectory.snapshots.is_empty() {
        write_with(&dir.join("snapshots.csv"), |w| {
            Ok(trajectory.write_snapshots_csv(&grid, w)?)
        })?;
    }
    let summary = run_summary(config, &params, &grid, &trajectory, elapsed)?;
    fs::write(dir.join("summary.txt"), summary.to_kv())?;
    Ok(SimulationOutput {
        config: config.clone(),
        grid,
        trajectory,
        summary,
        dir: dir.to_path_buf(),
    })
}

fn run_summary(
    config: &ExperimentConfig,
    params: &Params,
    grid: &Grid,
    traj: &Trajectory,
    elapsed: f64,
) -> anyhow::Result<Record> {
    let last = traj
        .final_state
        .as_ref()
        .context("run produced no final state")?;
    let stationary = build_profile(config.eps, config.n, Sign::Minus)?.sample(grid.nodes());
    let (lo, hi) = last
        .u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });

    let mut r = Record::default();
    r.num("eps", config.eps);
    r.num("tau", config.tau);
    r.text("n", config.n);
    r.num("t_end", last.t);
    r.text("records", traj.len());
    r.num("final_mean_u", *traj.mean_u.last().unwrap_or(&f64::NAN));
    r.num("final_xi", last.xi);
    r.num("final_u_min", lo);
    r.num("final_u_max", hi);
    r.num("distance_to_stationary", sup_distance(&last.u, &stationary));
    let alive = traj
        .layers
        .iter()
        .filter(|l| l.last().copied().flatten().is_some())
        .count();
    r.text("initial_layers", traj.layers.len());
    r.text("final_layers", alive);
    let h = hopf_point(params, config.n)?;
    if h.valid {
        r.num("tau_n", h.tau_n);
        r.num("exact_period", h.period);
    }
    r.num("runtime_s", elapsed);
    Ok(r)
}

/// `max_i |a_i - b_i|`.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Where the exact period used for relative errors comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactPeriod {
    Given(f64),
    Computed {
        eps: f64,
        n: u32,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
}

impl ExactPeriod {
    pub fn resolve(self) -> anyhow::Result<f64> {
        match self {
            ExactPeriod::Given(p) if p > 0.0 && p.is_finite() => Ok(p),
            ExactPeriod::Given(p) => {
                Err(crate::UsageError(format!("exact period {p} must be positive")).into())
            }
            ExactPeriod::Computed {
                eps,
                n,
                alpha,
                beta,
                gamma,
            } => {
                let params = Params::new(eps, 1.0, alpha, beta, gamma)?;
                let h = hopf_point(&params, n)?;
                if !h.valid {
                    return Err(shadow_hopf::Error::HypothesisViolated {
                        chi: h.chi_n,
                        delta: h.delta,
                    }
                    .into());
                }
                Ok(h.period)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub exact_period: f64,
    pub skip: f64,
    pub window: (f64, f64),
}

/// Analysis of a trajectory: the period table when the mean oscillates, and
/// the anti-phase score when at least two layers were tracked.
pub struct AnalysisOutput {
    pub periods: Option<PeriodEstimate>,
    pub summary: Option<AnalysisSummary>,
    pub antiphase: Option<f64>,
    pub record: Record,
}

/// Period extraction failures are kept in the output rather than raised, so
/// that callers scoring only anti-phase still get a result;
/// [`AnalysisOutput::require_periods`] turns them back into an error.
pub fn analyze(traj: &Trajectory, opts: &AnalysisOptions) -> AnalysisOutput {
    let periods = extract_periods(&traj.times, &traj.mean_u, opts.skip);
    let antiphase = match traj.layers.as_slice() {
        [first, second, ..] => antiphase_score(&traj.times, first, second, opts.window).ok(),
        _ => None,
    };
    let mut record = Record::default();
    record.num("exact_period", opts.exact_period);
    record.num("skip", opts.skip);
    let (periods, summary) = match periods {
        Ok(est) => {
            let s = AnalysisSummary::new(&est, opts.exact_period, antiphase);
            record.num("first_period", s.first_period);
            record.num("first_relative_error_pct", s.first_relative_error_pct);
            record.num("final_relative_error_pct", s.final_relative_error_pct);
            record.text("cycles", s.cycles);
            (Some(est), Some(s))
        }
        Err(e) => {
            record.text("periods", format!("unavailable ({e})"));
            (None, None)
        }
    };
    if let Some(score) = antiphase {
        record.num("antiphase_window_start", opts.window.0);
        record.num("antiphase_window_end", opts.window.1);
        record.num("antiphase_score", score);
        record.text(
            "antiphase",
            score < shadow_hopf::analyze::ANTIPHASE_THRESHOLD,
        );
    }
    AnalysisOutput {
        periods,
        summary,
        antiphase,
        record,
    }
}

impl AnalysisOutput {
    pub fn require_periods(&self, traj: &Trajectory, skip: f64) -> anyhow::Result<&PeriodEstimate> {
        match &self.periods {
            Some(p) => Ok(p),
            None => Err(extract_periods(&traj.times, &traj.mean_u, skip)
                .expect_err("extraction is deterministic")
                .into()),
        }
    }

    /// Writes `analysis.csv` (when periods exist) and `analysis_summary.txt`.
    pub fn write(&self, dir: &Path, exact_period: f64) -> anyhow::Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        if let Some(est) = &self.periods {
            write_with(&dir.join("analysis.csv"), |w| {
                Ok(write_analysis_csv(w, est, exact_period)?)
            })?;
        }
        fs::write(dir.join("analysis_summary.txt"), self.record.to_kv())?;
        Ok(())
    }
}

pub fn read_trajectory(path: &Path) -> anyhow::Result<Trajectory> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Trajectory::read_csv(BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn write_with(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}
