//! Post-processing of trajectories: oscillation periods, relative errors,
//! layer positions, anti-phase correlation and the formal layer predictor.

use std::f64::consts::SQRT_2;
use std::io::Write;

use crate::error::{Error, Result};
use crate::simulate::Grid;
use crate::stationary::Sign;

/// Scores below this are reported as anti-phase.
pub const ANTIPHASE_THRESHOLD: f64 = -0.5;

/// Per-cycle periods from successive maxima.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodEstimate {
    pub first_period: f64,
    pub periods: Vec<f64>,
    /// Interpolated times of the maxima used.
    pub peak_times: Vec<f64>,
    pub method: &'static str,
}

fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..values.len() {
        let (a, b) = (values[i - 1], values[i]);
        if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
            out.push(times[i - 1] + (times[i] - times[i - 1]) * a / (a - b));
        }
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Subtracts a centered moving average with half-width `half` samples.
/// Within `half` samples of either end, where no full window fits, the trend
/// is held at the nearest full-window value rather than shrinking the window,
/// which would drag the trend toward the signal and bend nearby peaks.
fn detrend(values: &[f64], half: usize) -> Vec<f64> {
    let n = values.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + values[i];
    }
    if n <= 2 * half {
        let mean = prefix[n] / n as f64;
        return values.iter().map(|v| v - mean).collect();
    }
    let width = (2 * half + 1) as f64;
    (0..n)
        .map(|i| {
            let c = i.clamp(half, n - 1 - half);
            values[i] - (prefix[c + half + 1] - prefix[c - half]) / width
        })
        .collect()
}

/// Peak-to-peak periods of a sampled, possibly drifting oscillation.
///
/// Samples before `times[0] + skip` are dropped. A coarse period guess from
/// zero crossings of the mean-removed signal sets a moving-average window of
/// 1.5 guesses; maxima of the detrended signal that dominate a ±guess/4
/// neighbourhood are refined by a parabola through three samples.
pub fn extract_periods(times: &[f64], values: &[f64], skip: f64) -> Result<PeriodEstimate> {
    if times.len() != values.len() {
        return Err(Error::InsufficientData(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let Some(&t_first) = times.first() else {
        return Err(Error::TooFewCycles { found: 0 });
    };
    let start = times.partition_point(|&t| t < t_first + skip);
    let (t, v) = (&times[start..], &values[start..]);
    if t.len() < 5 {
        return Err(Error::TooFewCycles { found: 0 });
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let crossings = zero_crossings(t, &centered);
    if crossings.len() < 2 {
        return Err(Error::TooFewCycles { found: 0 });
    }
    let guess = 2.0 * median(crossings.windows(2).map(|w| w[1] - w[0]).collect());
    let step = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let half = ((0.75 * guess / step).round() as usize).max(1);
    let quarter = ((0.25 * guess / step).round() as usize).max(1);
    let d = detrend(v, half);

    let mut peaks = Vec::new();
    if d.len() > 2 * quarter {
        for i in quarter..d.len() - quarter {
            let di = d[i];
            if di <= 0.0 || di <= d[i - 1] {
                continue;
            }
            if (i - quarter..=i + quarter).any(|j| d[j] > di) {
                continue;
            }
            let (a, c) = (d[i - 1], d[i + 1]);
            let curv = a - 2.0 * di + c;
            let offset = if curv < 0.0 {
                0.5 * (a - c) / curv
            } else {
                0.0
            };
            let h = if offset >= 0.0 {
                t[i + 1] - t[i]
            } else {
                t[i] - t[i - 1]
            };
            peaks.push(t[i] + offset * h);
        }
    }
    if peaks.len() < 2 {
        return Err(Error::TooFewCycles { found: peaks.len() });
    }
    let periods: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(PeriodEstimate {
        first_period: periods[0],
        periods,
        peak_times: peaks,
        method: "peak-to-peak, moving-average detrended, quadratic refinement",
    })
}

/// `100·(1 - period_i/exact)` per cycle.
pub fn relative_error_series(est: &PeriodEstimate, exact_period: f64) -> Vec<f64> {
    est.periods
        .iter()
        .map(|p| 100.0 * (1.0 - p / exact_period))
        .collect()
}

/// Sign-change abscissae of `u` by linear interpolation between nodes.
pub fn sign_changes(u: &[f64], grid: &Grid) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..u.len() {
        let (a, b) = (u[i - 1], u[i]);
        if a == 0.0 && i == 1 {
            out.push(grid.x(0));
        }
        if b == 0.0 {
            if a != 0.0 && i + 1 < u.len() && u[i + 1] != 0.0 && u[i + 1].signum() != a.signum() {
                out.push(grid.x(i));
            }
            continue;
        }
        if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
            out.push(grid.x(i - 1) + grid.dx() * a / (a - b));
        }
    }
    out
}

/// Layer positions matched to `expected` by nearest neighbour; a slot with
/// no remaining sign change is `None` (the layer has been annihilated).
pub fn layer_positions(u: &[f64], grid: &Grid, expected: &[f64]) -> Vec<Option<f64>> {
    let found = sign_changes(u, grid);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (e, x) in expected.iter().enumerate() {
        for (f, y) in found.iter().enumerate() {
            pairs.push(((x - y).abs(), e, f));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![None; expected.len()];
    let mut used = vec![false; found.len()];
    for (_, e, f) in pairs {
        if out[e].is_none() && !used[f] {
            out[e] = Some(found[f]);
            used[f] = true;
        }
    }
    out
}

/// Pearson correlation of two layer series over `t ∈ [window.0, window.1]`,
/// using only records where both layers exist.
pub fn antiphase_score(
    times: &[f64],
    first: &[Option<f64>],
    second: &[Option<f64>],
    window: (f64, f64),
) -> Result<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(first.iter().zip(second))
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .filter_map(|(_, (x, y))| Some(((*x)?, (*y)?)))
        .unzip();
    if a.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} records with both layers in [{}, {}]",
            a.len(),
            window.0,
            window.1
        )));
    }
    pearson(&a, &b)
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::InsufficientData(
            "a layer series has zero variance".into(),
        ));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Formal layer positions of the small-amplitude Hopf orbit of `u_n^±`:
/// `(1+2l)/(2n) - sign·(-1)^l·3√2·ε·r·sin(λ_{I,n}t)`.
pub fn predicted_layers(n: u32, eps: f64, lambda_in: f64, r: f64, t: f64, sign: Sign) -> Vec<f64> {
    let shift = 3.0 * SQRT_2 * eps * r * (lambda_in * t).sin();
    (0..n)
        .map(|l| {
            let alternating = if l % 2 == 0 { 1.0 } else { -1.0 };
            (1.0 + 2.0 * l as f64) / (2.0 * n as f64) - sign.value() * alternating * shift
        })
        .collect()
}

/// Half the peak-to-peak range of `values` over `t ∈ [center - width/2, center + width/2]`.
pub fn oscillation_amplitude(
    times: &[f64],
    values: &[f64],
    center: f64,
    width: f64,
) -> Result<f64> {
    let (lo, hi) = (center - 0.5 * width, center + 0.5 * width);
    if times.first().is_none_or(|&t| t > lo) || times.last().is_none_or(|&t| t < hi) {
        return Err(Error::InsufficientData(format!(
            "series does not cover [{lo}, {hi}]"
        )));
    }
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (t, v) in times.iter().zip(values) {
        if *t >= lo && *t <= hi {
            min = min.min(*v);
            max = max.max(*v);
        }
    }
    Ok(0.5 * (max - min))
}

/// `cycle,period,relative_error_pct`.
pub fn write_analysis_csv<W: Write>(
    mut w: W,
    est: &PeriodEstimate,
    exact_period: f64,
) -> Result<()> {
    writeln!(w, "cycle,period,relative_error_pct")?;
    for (i, (p, e)) in est
        .periods
        .iter()
        .zip(relative_error_series(est, exact_period))
        .enumerate()
    {
        writeln!(w, "{},{},{}", i + 1, p, e)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisSummary {
    pub first_period: f64,
    pub exact_period: f64,
    pub first_relative_error_pct: f64,
    pub final_relative_error_pct: f64,
    pub cycles: usize,
    pub antiphase_score: Option<f64>,
}

impl AnalysisSummary {
    pub fn new(est: &PeriodEstimate, exact_period: f64, antiphase_score: Option<f64>) -> Self {
        let errors = relative_error_series(est, exact_period);
        Self {
            first_period: est.first_period,
            exact_period,
            first_relative_error_pct: errors[0],
            final_relative_error_pct: *errors.last().unwrap_or(&errors[0]),
            cycles: est.periods.len(),
            antiphase_score,
        }
    }

    /// `key=value` lines.
    pub fn write_kv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "first_period={}", self.first_period)?;
        writeln!(w, "exact_period={}", self.exact_period)?;
        writeln!(
            w,
            "first_relative_error_pct={}",
            self.first_relative_error_pct
        )?;
        writeln!(
            w,
            "final_relative_error_pct={}",
            self.final_relative_error_pct
        )?;
        writeln!(w, "cycles={}", self.cycles)?;
        if let Some(s) = self.antiphase_score {
            writeln!(w, "antiphase_score={s}")?;
            writeln!(w, "antiphase={}", s < ANTIPHASE_THRESHOLD)?;
        }
        Ok(())
    }
}
