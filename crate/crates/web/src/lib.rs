//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function has a plain-Rust counterpart returning
//! `Result<_, String>` so that the logic is testable off the browser.

use shadow_hopf::analyze::extract_periods;
use shadow_hopf::config::{ExperimentConfig, InitialSpec};
use shadow_hopf::simulate::{make_initial, run};
use shadow_hopf::spectrum::{hopf_point, mu_extremes, track_pair, transversality};
use shadow_hopf::{build_profile, Params, Sign};
use wasm_bindgen::prelude::*;

/// Longest simulated span the page may request, to keep the tab responsive.
pub const MAX_DEMO_TIME: f64 = 3000.0;

fn params(eps: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Params, String> {
    Params::new(eps, 1.0, alpha, beta, gamma).map_err(|e| e.to_string())
}

/// `key=value` lines describing the Hopf point of the `n`-layer solution.
pub fn hopf_summary_text(
    eps: f64,
    n: u32,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<String, String> {
    let p = params(eps, alpha, beta, gamma)?;
    let h = hopf_point(&p, n).map_err(|e| e.to_string())?;
    let mut out = format!(
        "rho={}\nchi_n={}\ndelta={}\nvalid={}\nmu0={}\n",
        h.profile.rho(),
        h.chi_n,
        h.delta,
        h.valid,
        mu_extremes(&h.profile).0
    );
    if h.valid {
        let t = transversality(&p, n).map_err(|e| e.to_string())?;
        out.push_str(&format!(
            "tau_n={}\nlambda_in={}\nperiod={}\nd_re_dtau={}\n",
            h.tau_n, h.lambda_in, h.period, t.d_re_dtau
        ));
    }
    Ok(out)
}

/// Interleaved `x, u` samples of `u_n^-` on `nodes` points.
pub fn profile_points(eps: f64, n: u32, nodes: usize) -> Result<Vec<f64>, String> {
    if nodes < 2 {
        return Err("need at least 2 nodes".into());
    }
    let p = build_profile(eps, n, Sign::Minus).map_err(|e| e.to_string())?;
    let u = p.sample(nodes);
    let dx = 1.0 / (nodes - 1) as f64;
    Ok(u.iter()
        .enumerate()
        .flat_map(|(i, v)| [i as f64 * dx, *v])
        .collect())
}

/// Interleaved `τ, Re λ, Im λ` along the complex pair across
/// `[tau_lo, tau_hi]`, followed by the crossing `τ*` as the last entry.
pub fn pair_points(
    eps: f64,
    n: u32,
    alpha: f64,
    beta: f64,
    gamma: f64,
    tau_lo: f64,
    tau_hi: f64,
) -> Result<Vec<f64>, String> {
    let p = params(eps, alpha, beta, gamma)?;
    let track = track_pair(&p, n, tau_lo, tau_hi).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = track
        .path
        .iter()
        .flat_map(|(t, z)| [*t, z.re, z.im])
        .collect();
    out.push(track.tau_star);
    Ok(out)
}

/// Interleaved `t, ∫u` of a run from the table's initial data; the first
/// entry is the first extracted period (NaN when there are too few cycles).
pub fn mean_points(eps: f64, tau: f64, t_end: f64, two_layer: bool) -> Result<Vec<f64>, String> {
    if !(t_end > 0.0 && t_end <= MAX_DEMO_TIME) {
        return Err(format!("t_end must lie in (0, {MAX_DEMO_TIME}]"));
    }
    let initial = if two_layer {
        InitialSpec::NearTwoLayer
    } else {
        InitialSpec::PerturbedSingleLayer
    };
    let cfg = ExperimentConfig::with_defaults(eps, tau, t_end, initial);
    cfg.validate().map_err(|e| e.to_string())?;
    let go = || -> shadow_hopf::Result<Vec<f64>> {
        let grid = cfg.grid()?;
        let state = make_initial(&cfg.initial_kind()?, eps, &grid, cfg.xi0)?;
        let traj = run(&state, &cfg.params()?, &grid, &cfg.run_options())?;
        let first =
            extract_periods(&traj.times, &traj.mean_u, 10.0).map_or(f64::NAN, |e| e.first_period);
        let mut out = vec![first];
        out.extend(
            traj.times
                .iter()
                .zip(&traj.mean_u)
                .flat_map(|(t, m)| [*t, *m]),
        );
        Ok(out)
    };
    go().map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn hopf_summary(
    eps: f64,
    n: u32,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<String, JsError> {
    hopf_summary_text(eps, n, alpha, beta, gamma).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn profile_curve(eps: f64, n: u32, nodes: usize) -> Result<Vec<f64>, JsError> {
    profile_points(eps, n, nodes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn pair_path(
    eps: f64,
    n: u32,
    alpha: f64,
    beta: f64,
    gamma: f64,
    tau_lo: f64,
    tau_hi: f64,
) -> Result<Vec<f64>, JsError> {
    pair_points(eps, n, alpha, beta, gamma, tau_lo, tau_hi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate_mean(eps: f64, tau: f64, t_end: f64, two_layer: bool) -> Result<Vec<f64>, JsError> {
    mean_points(eps, tau, t_end, two_layer).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn summary_contains_reference_values() {
        let s = hopf_summary_text(0.2, 1, 0.5, 0.5, 0.5).unwrap();
        assert!(s.contains("tau_n=6.38284090106766"));
        assert!(s.contains("valid=true"));
        assert!(hopf_summary_text(0.4, 1, 0.5, 0.5, 0.5).is_err());
    }

    #[test]
    fn profile_is_interleaved() {
        let pts = profile_points(0.2, 1, 11).unwrap();
        assert_eq!(pts.len(), 22);
        assert_eq!(pts[0], 0.0);
        assert!((pts[20] - 1.0).abs() < 1e-15);
        assert!(pts[1] < 0.0 && pts[21] > 0.0);
    }

    #[test]
    fn pair_crossing_matches_tau_n() {
        let pts = pair_points(0.2, 1, 0.5, 0.5, 0.5, 5.0, 8.0).unwrap();
        assert_eq!(pts.len() % 3, 1);
        assert!((pts.last().unwrap() - 6.3828409010676614).abs() < 1e-9);
    }

    #[test]
    fn short_simulation() {
        let pts = mean_points(0.2, 6.0, 100.0, false).unwrap();
        assert!((37.0..39.0).contains(&pts[0]), "{}", pts[0]);
        assert_eq!((pts.len() - 1) % 2, 0);
        assert!(mean_points(0.2, 6.0, 1e6, false).is_err());
    }
}
