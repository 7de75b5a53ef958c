//! `reproduce`: named experiments with their acceptance bands.
//!
//! Each preset writes into its own directory under the output root and ends
//! with a `summary.txt` of the measured quantities and a `check.txt` listing
//! every banded quantity and its verdict.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use shadow_hopf::analyze::{oscillation_amplitude, relative_error_series, ANTIPHASE_THRESHOLD};
use shadow_hopf::config::ExperimentConfig;
use shadow_hopf::spectrum::{hopf_asymptotics, hopf_point};
use shadow_hopf::Params;

use crate::run::{
    analyze, simulate, write_with, AnalysisOptions, SimulationOutput, DEFAULT_ANTIPHASE_WINDOW,
    DEFAULT_SKIP,
};
use crate::{sig17, Record, UsageError};

pub const PRESET_NAMES: [&str; 7] = ["a1", "b1", "c1", "d1", "fig4", "fig5", "sweep"];

/// Grid of the asymptotics sweep (single layer).
pub const SWEEP_EPS: [f64; 5] = [0.1, 0.08, 0.06, 0.05, 0.04];
/// Largest admissible `|ratio - 1|` at the smallest sweep `ε`.
pub const SWEEP_TOLERANCE: f64 = 0.05;
/// Snapshot every 100 time units at the default step.
const SNAPSHOT_STRIDE: usize = 10_000;

/// One banded quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Check {
    pub fn new(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lo,
            hi,
        }
    }

    /// Inside `[lo, hi]`; a NaN value always fails.
    pub fn pass(&self) -> bool {
        self.value >= self.lo && self.value <= self.hi
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}={} in [{}, {}]",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            sig17(self.value),
            self.lo,
            self.hi
        )
    }
}

#[derive(Clone, Debug)]
pub struct PresetReport {
    pub name: String,
    pub dir: PathBuf,
    pub record: Record,
    pub checks: Vec<Check>,
}

impl PresetReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn write(&self) -> anyhow::Result<()> {
        let mut text: String = self.checks.iter().map(|c| format!("{c}\n")).collect();
        text.push_str(&format!("pass={}\n", self.pass()));
        fs::write(self.dir.join("check.txt"), text)?;
        fs::write(self.dir.join("summary.txt"), self.record.to_kv())?;
        Ok(())
    }
}

/// Expands `all` and rejects unknown names.
pub fn resolve_presets(names: &[String]) -> Result<Vec<&'static str>, UsageError> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(PRESET_NAMES);
            continue;
        }
        match PRESET_NAMES.iter().find(|p| **p == name.as_str()) {
            Some(p) => out.push(*p),
            None => {
                return Err(UsageError(format!(
                    "unknown preset {name:?}; expected one of {} or all",
                    PRESET_NAMES.join(", ")
                )))
            }
        }
    }
    out.dedup();
    Ok(out)
}

/// Runs the presets concurrently, each into `root/<name>`; results keep the
/// order of `names`.
pub fn reproduce_all(names: &[&str], root: &Path) -> Vec<anyhow::Result<PresetReport>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = names
            .iter()
            .map(|name| scope.spawn(move || reproduce(name, &root.join(name))))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(anyhow::anyhow!("preset thread panicked")))
            })
            .collect()
    })
}

pub fn reproduce(name: &str, dir: &Path) -> anyhow::Result<PresetReport> {
    let report = match name {
        "a1" => preset_a1(dir)?,
        "b1" => preset_b1(dir)?,
        "c1" => preset_two_layer("c1", dir)?,
        "d1" => preset_two_layer("d1", dir)?,
        "fig4" => preset_fig4(dir)?,
        "fig5" => preset_fig5(dir)?,
        "sweep" => sweep(dir)?,
        other => return Err(UsageError(format!("unknown preset {other:?}")).into()),
    };
    report.write()?;
    Ok(report)
}

fn table_config(name: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(name).expect("table preset");
    cfg.snapshot_stride = Some(SNAPSHOT_STRIDE);
    cfg
}

fn exact_period(cfg: &ExperimentConfig) -> anyhow::Result<f64> {
    let h = hopf_point(&cfg.params()?, cfg.n)?;
    anyhow::ensure!(h.valid, "hypothesis violated for the preset parameters");
    Ok(h.period)
}

fn options(exact: f64) -> AnalysisOptions {
    AnalysisOptions {
        exact_period: exact,
        skip: DEFAULT_SKIP,
        window: DEFAULT_ANTIPHASE_WINDOW,
    }
}

fn report(
    name: &str,
    sim: &SimulationOutput,
    mut record: Record,
    checks: Vec<Check>,
) -> PresetReport {
    let mut merged = sim.summary.clone();
    merged.0.append(&mut record.0);
    PresetReport {
        name: name.into(),
        dir: sim.dir.clone(),
        record: merged,
        checks,
    }
}

/// Slope of the least-squares line through `(i, y_i)`.
pub fn trend_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    if y.len() < 2 {
        return f64::NAN;
    }
    let mx = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (v - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Period bands shared by `a1` and `fig5`.
fn period_checks(
    sim: &SimulationOutput,
    exact: f64,
    dir: &Path,
) -> anyhow::Result<(Record, Vec<Check>)> {
    let out = analyze(&sim.trajectory, &options(exact));
    out.write(dir, exact)?;
    let est = out.require_periods(&sim.trajectory, DEFAULT_SKIP)?;
    let errors = relative_error_series(est, exact);
    write_with(&dir.join("relative_error.csv"), |w| {
        use std::io::Write;
        writeln!(w, "t,relative_error_pct")?;
        for (t, e) in est.peak_times[1..].iter().zip(&errors) {
            writeln!(w, "{t},{e}")?;
        }
        Ok(())
    })?;
    let mut record = out.record.clone();
    let slope = trend_slope(&errors);
    record.num("relative_error_trend_per_cycle", slope);
    let checks = vec![
        Check::new("first_period", est.first_period, 37.0, 39.0),
        Check::new("first_relative_error_pct", errors[0], 1.1, 3.1),
        Check::new(
            "final_relative_error_pct",
            *errors.last().unwrap(),
            1.9,
            3.9,
        ),
        Check::new("relative_error_trend_per_cycle", slope, 0.0, f64::INFINITY),
    ];
    Ok((record, checks))
}

fn preset_a1(dir: &Path) -> anyhow::Result<PresetReport> {
    let cfg = table_config("a1");
    let sim = simulate(&cfg, dir)?;
    let (record, mut checks) = period_checks(&sim, exact_period(&cfg)?, dir)?;
    let distance: f64 = sim
        .summary
        .get("distance_to_stationary")
        .unwrap_or("NaN")
        .parse()?;
    checks.push(Check::new("distance_to_stationary", distance, 0.0, 0.05));
    Ok(report("a1", &sim, record, checks))
}

fn preset_fig4(dir: &Path) -> anyhow::Result<PresetReport> {
    let mut cfg = table_config("a1");
    cfg.t_end = 100.0;
    cfg.snapshot_stride = None;
    let sim = simulate(&cfg, dir)?;
    let exact = exact_period(&cfg)?;
    let out = analyze(&sim.trajectory, &options(exact));
    out.write(dir, exact)?;
    let est = out.require_periods(&sim.trajectory, DEFAULT_SKIP)?;
    let checks = vec![Check::new("first_period", est.first_period, 37.0, 39.0)];
    Ok(report("fig4", &sim, out.record.clone(), checks))
}

fn preset_fig5(dir: &Path) -> anyhow::Result<PresetReport> {
    let mut cfg = table_config("a1");
    cfg.snapshot_stride = None;
    let sim = simulate(&cfg, dir)?;
    let (record, checks) = period_checks(&sim, exact_period(&cfg)?, dir)?;
    Ok(report("fig5", &sim, record, checks))
}

/// Amplitudes of `∫u` one exact period wide around `t = 50` and `t = 300`.
///
/// With the table's initial data the growing oscillation expels the layer
/// through the boundary well before `t = 300`, after which the solution
/// relaxes to the constant state. The last full cycle before that exit is
/// therefore scored as well, together with the distance from `u_1^-`.
fn preset_b1(dir: &Path) -> anyhow::Result<PresetReport> {
    let cfg = table_config("b1");
    let sim = simulate(&cfg, dir)?;
    let exact = exact_period(&cfg)?;
    let traj = &sim.trajectory;
    let early = oscillation_amplitude(&traj.times, &traj.mean_u, 50.0, exact)?;
    let late = oscillation_amplitude(&traj.times, &traj.mean_u, 300.0, exact)?;
    let exit = layer_exit_time(traj).unwrap_or(cfg.t_end);
    let before_exit = if exit - 1.5 * exact >= 50.0 + 0.5 * exact {
        oscillation_amplitude(&traj.times, &traj.mean_u, exit - exact, exact)?
    } else {
        f64::NAN
    };
    let distance: f64 = sim
        .summary
        .get("distance_to_stationary")
        .unwrap_or("NaN")
        .parse()?;
    let mut record = Record::default();
    record.num("amplitude_t50", early);
    record.num("amplitude_t300", late);
    record.num("amplitude_growth", late / early);
    record.num("layer_exit_time", exit);
    record.num("amplitude_before_exit", before_exit);
    record.num("amplitude_growth_before_exit", before_exit / early);
    let checks = vec![
        Check::new("amplitude_growth", late / early, 1.0, f64::INFINITY),
        Check::new(
            "amplitude_growth_before_exit",
            before_exit / early,
            1.0,
            f64::INFINITY,
        ),
        Check::new("distance_to_stationary", distance, 0.05, f64::INFINITY),
    ];
    fs::write(dir.join("analysis_summary.txt"), record.to_kv())?;
    Ok(report("b1", &sim, record, checks))
}

/// First recorded time at which some tracked layer no longer exists.
pub fn layer_exit_time(traj: &shadow_hopf::simulate::Trajectory) -> Option<f64> {
    (0..traj.len())
        .find(|&k| traj.layers.iter().any(|l| l[k].is_none()))
        .map(|k| traj.times[k])
}

/// Anti-phase of the two layers early on; `d1` must also settle to the
/// constant state `u = 1/√2`.
fn preset_two_layer(name: &str, dir: &Path) -> anyhow::Result<PresetReport> {
    let cfg = table_config(name);
    let sim = simulate(&cfg, dir)?;
    // The two-layer solution has the same Hopf period as the one-layer one at 2ε.
    let exact = exact_period(&cfg)?;
    let out = analyze(&sim.trajectory, &options(exact));
    out.write(dir, exact)?;
    let score = out
        .antiphase
        .context("fewer than two layers tracked on the anti-phase window")?;
    let mut checks = vec![Check::new(
        "antiphase_score",
        score,
        -1.0,
        ANTIPHASE_THRESHOLD,
    )];
    if name == "d1" {
        let last = sim
            .trajectory
            .final_state
            .as_ref()
            .context("no final state")?;
        let spread = last
            .u
            .iter()
            .fold(0.0_f64, |m, v| m.max((v - FRAC_1_SQRT_2).abs()));
        checks.push(Check::new("final_distance_to_constant", spread, 0.0, 1e-2));
    }
    Ok(report(name, &sim, out.record.clone(), checks))
}

/// Exact-over-asymptotic ratios of period, `τ₁` and `χ₁` along [`SWEEP_EPS`].
pub fn sweep_rows() -> anyhow::Result<Vec<[f64; 4]>> {
    SWEEP_EPS
        .iter()
        .map(|&eps| {
            let params = Params::new(eps, 1.0, 0.5, 0.5, 0.5)?;
            let h = hopf_point(&params, 1)?;
            let a = hopf_asymptotics(1, eps, &params);
            Ok([eps, h.period / a.period, h.tau_n / a.tau, h.chi_n / a.chi])
        })
        .collect()
}

fn sweep(dir: &Path) -> anyhow::Result<PresetReport> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let rows = sweep_rows()?;
    write_with(&dir.join("sweep.csv"), |w| {
        use std::io::Write;
        writeln!(w, "eps,period_ratio,tau_ratio,chi_ratio")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{}",
                sig17(r[0]),
                sig17(r[1]),
                sig17(r[2]),
                sig17(r[3])
            )?;
        }
        Ok(())
    })?;
    let mut record = Record::default();
    let mut checks = Vec::new();
    let last = rows.len() - 1;
    for (col, label) in [(1, "period"), (2, "tau"), (3, "chi")] {
        let gaps: Vec<f64> = rows.iter().map(|r| (r[col] - 1.0).abs()).collect();
        let monotone = gaps[last - 2..].windows(2).all(|w| w[1] < w[0]);
        record.num(&format!("{label}_ratio_at_smallest_eps"), rows[last][col]);
        checks.push(Check::new(
            &format!("{label}_ratio_gap"),
            gaps[last],
            0.0,
            SWEEP_TOLERANCE,
        ));
        checks.push(Check::new(
            &format!("{label}_ratio_monotone"),
            if monotone { 1.0 } else { 0.0 },
            1.0,
            1.0,
        ));
    }
    Ok(PresetReport {
        name: "sweep".into(),
        dir: dir.to_path_buf(),
        record,
        checks,
    })
}
