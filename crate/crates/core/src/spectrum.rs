//! Exact and asymptotic spectral data of the linearization about an
//! `n`-layer stationary solution: the cubic `g(λ, τ)`, the Hopf point,
//! eigenvalue tracking, transversality and the simplicity margin.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::cubic::{complex_pair, Cubic};
use crate::error::{Error, Result};
use crate::stationary::{build_profile, chi, Params, Sign, StationaryProfile};

/// An eigenvalue `λ_R + iλ_I`.
pub type SpectralPoint = Complex64;

const PAIR_SAMPLES: usize = 65;
const POLE_TOL: f64 = 1e-14;

/// `(1 - ρ²)²`.
fn s_squared(p: &StationaryProfile) -> f64 {
    p.one_minus_rho2().powi(2)
}

/// The extreme eigenvalues `μ₀ > 0 > μ_n` of `L`, roots of
/// `μ² + 2μ - 3(1-ρ²)² = 0`.
pub fn mu_extremes(p: &StationaryProfile) -> (f64, f64) {
    let s3 = 3.0 * s_squared(p);
    let root = (1.0 + s3).sqrt();
    (s3 / (1.0 + root), -1.0 - root)
}

/// Leading-order asymptotics of the `j`-th eigenvalue `μ_j` of `L` about an
/// `n`-layer solution as `ε → 0`.
pub fn mu_asymptotic(j: u32, n: u32, eps: f64) -> f64 {
    let ne = n as f64 * eps;
    let (j, n_f) = (j as f64, n as f64);
    if j < n_f {
        96.0 * (j * PI / (2.0 * n_f)).cos().powi(2) * (-SQRT_2 / ne).exp()
    } else if j < 2.0 * n_f {
        -1.5 + 12.0 * ((j - n_f) * PI / n_f).cos() * (-1.0 / (SQRT_2 * ne)).exp()
    } else if j == 2.0 * n_f {
        -2.0 - 96.0 * (-SQRT_2 / ne).exp()
    } else {
        -2.0 - (j - 2.0 * n_f).powi(2) * PI * PI * eps * eps
    }
}

/// Coefficients of `g(λ, τ)`, whose roots are the eigenvalues of the
/// nonlocal problem outside the spectrum of `L`.
pub fn cubic_coeffs(params: &Params, p: &StationaryProfile) -> Cubic {
    let r = params.tau() / params.gamma();
    let s = s_squared(p);
    let delta = params.delta();
    Cubic::new(
        r,
        2.0 * r + 1.0,
        delta + 2.0 - 3.0 * r * s,
        3.0 * delta * p.one_minus_mass2() - 3.0 * s,
    )
}

/// Roots of the cubic; see [`Cubic::roots`].
pub fn cubic_roots(c: &Cubic) -> Result<Vec<SpectralPoint>> {
    c.roots()
}

/// Exact Hopf data of the `n`-layer solution.
#[derive(Clone, Debug, PartialEq)]
pub struct HopfData {
    pub n: u32,
    pub tau_n: f64,
    pub lambda_in: f64,
    pub period: f64,
    pub chi_n: f64,
    pub delta: f64,
    /// Discriminant `(2(δ+2) - 3δ(1-∫u²))² + 24(δ+2)(1-ρ²)²`.
    pub discriminant: f64,
    /// `χ_n < δ`; when false the remaining fields are not meaningful.
    pub valid: bool,
    /// Relative gap between the two closed-form routes to `τ_n`.
    pub consistency: f64,
    pub profile: StationaryProfile,
}

/// Closed-form `τ_n`, `λ_{I,n}` and period.
///
/// With `Z = λ_I² + 3(1-ρ²)²`, the pure-imaginary root condition reduces to
/// `Z² + BZ - 6(δ+2)(1-ρ²)² = 0`; the positive root gives
/// `τ_n = (δ+2)γ/Z`. Both `Z` and `λ_I²` are formed in rationalized
/// versions so that neither subtracts nearly equal quantities when the
/// layers are sharp.
pub fn hopf_point(params: &Params, n: u32) -> Result<HopfData> {
    let profile = build_profile(params.eps(), n, Sign::Minus)?;
    let delta = params.delta();
    let gamma = params.gamma();
    let s = s_squared(&profile);
    let w = profile.one_minus_mass2();
    let chi_n = chi(&profile);
    let b = 2.0 * (delta + 2.0) - 3.0 * delta * w;
    let discriminant = b * b + 24.0 * (delta + 2.0) * s;
    let root = discriminant.sqrt();
    let valid = chi_n < delta;

    let z = if b > 0.0 {
        12.0 * (delta + 2.0) * s / (b + root)
    } else {
        0.5 * (root - b)
    };
    let lambda2 = if b + 6.0 * s > 0.0 {
        18.0 * s * (delta * w - s) / (root + b + 6.0 * s)
    } else {
        z - 3.0 * s
    };
    let tau_n = (delta + 2.0) * gamma / z;
    let tau_check = (delta + 2.0) * gamma / (lambda2 + 3.0 * s);
    let consistency = ((tau_n - tau_check) / tau_n).abs();
    let lambda_in = if valid { lambda2.sqrt() } else { f64::NAN };

    Ok(HopfData {
        n,
        tau_n,
        lambda_in,
        period: 2.0 * PI / lambda_in,
        chi_n,
        delta,
        discriminant,
        valid,
        consistency,
        profile,
    })
}

fn require_valid(h: &HopfData) -> Result<()> {
    if h.valid {
        Ok(())
    } else {
        Err(Error::HypothesisViolated {
            chi: h.chi_n,
            delta: h.delta,
        })
    }
}

/// Small-`ε` leading-order forms of the period, `τ_n` and `χ_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopfAsymptotics {
    pub period: f64,
    pub tau: f64,
    pub chi: f64,
}

pub fn hopf_asymptotics(n: u32, eps: f64, params: &Params) -> HopfAsymptotics {
    let delta = params.delta();
    let ne = n as f64 * eps;
    let a = SQRT_2 * ne;
    HopfAsymptotics {
        period: PI / 12.0 * ((delta + 2.0) / delta).sqrt() * a.powf(-0.5) * (1.0 / a).exp(),
        tau: params.gamma() * (delta + 2.0) / 192.0 * (SQRT_2 / ne).exp(),
        chi: 16.0 * SQRT_2 / ne * (-SQRT_2 / ne).exp(),
    }
}

/// The complex root with positive imaginary part at the given parameters.
pub fn pair_at(params: &Params, p: &StationaryProfile) -> Result<SpectralPoint> {
    let roots = cubic_coeffs(params, p).roots()?;
    complex_pair(&roots).ok_or(Error::NoComplexPair { tau: params.tau() })
}

/// Output of [`track_pair`].
#[derive(Clone, Debug)]
pub struct PairTrack {
    /// Where `Re` of the pair vanishes.
    pub tau_star: f64,
    /// `(τ, λ)` samples across the bracket.
    pub path: Vec<(f64, SpectralPoint)>,
}

/// Follows the complex pair across `[tau_lo, tau_hi]` and bisects for the
/// `τ` at which it crosses the imaginary axis.
pub fn track_pair(params: &Params, n: u32, tau_lo: f64, tau_hi: f64) -> Result<PairTrack> {
    if !(tau_lo > 0.0 && tau_hi > tau_lo) {
        return Err(Error::InvalidParams(format!(
            "tau bracket [{tau_lo}, {tau_hi}] must satisfy 0 < lo < hi"
        )));
    }
    let profile = build_profile(params.eps(), n, Sign::Minus)?;
    let re_at = |tau: f64| -> Result<SpectralPoint> { pair_at(&params.with_tau(tau)?, &profile) };

    let path = (0..PAIR_SAMPLES)
        .map(|i| {
            let tau = tau_lo + (tau_hi - tau_lo) * i as f64 / (PAIR_SAMPLES - 1) as f64;
            re_at(tau).map(|z| (tau, z))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut lo, mut hi) = (tau_lo, tau_hi);
    let (re_lo, re_hi) = (path[0].1.re, path[PAIR_SAMPLES - 1].1.re);
    if re_lo.signum() == re_hi.signum() || re_lo == 0.0 || re_hi == 0.0 {
        if re_lo == 0.0 {
            return Ok(PairTrack { tau_star: lo, path });
        }
        if re_hi == 0.0 {
            return Ok(PairTrack { tau_star: hi, path });
        }
        return Err(Error::NoSignChange { lo, hi });
    }
    let lo_negative = re_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let re = re_at(mid)?.re;
        if re == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (re < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(PairTrack {
        tau_star: 0.5 * (lo + hi),
        path,
    })
}

/// Speed of the pair at the crossing, `dλ/dτ = (ζ_R + iζ_I)/Δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransversalityData {
    pub d_re_dtau: f64,
    pub d_im_dtau: f64,
    pub zeta_r: f64,
    pub zeta_i: f64,
    pub delta_denominator: f64,
}

/// `dλ/dτ = -g_τ/g_λ` at `(iλ_{I,n}, τ_n)` in closed form.
///
/// With `r = τ_n/γ` and `Z = λ² + 3(1-ρ²)²`, the crossing relation
/// `rZ = δ + 2` turns `g_λ(iλ)` into `-2rλ² + 2i(2r+1)λ`, giving
///
/// ```text
/// Δ   = γλ²(4r²λ² + (4r+2)²)
/// ζ_R = λ²(12r(1-ρ²)² + 2Z)
/// ζ_I = -2λ³(4r + 2 + rZ)
/// ```
pub fn transversality(params: &Params, n: u32) -> Result<TransversalityData> {
    let h = hopf_point(params, n)?;
    require_valid(&h)?;
    let gamma = params.gamma();
    let r = h.tau_n / gamma;
    let lam = h.lambda_in;
    let lam2 = lam * lam;
    let s = s_squared(&h.profile);
    let z = lam2 + 3.0 * s;
    let c = 4.0 * r + 2.0;
    let zeta_r = lam2 * (12.0 * r * s + 2.0 * z);
    let zeta_i = -2.0 * lam2 * lam * (c + r * z);
    let denom = gamma * lam2 * (4.0 * r * r * lam2 + c * c);
    Ok(TransversalityData {
        d_re_dtau: zeta_r / denom,
        d_im_dtau: zeta_i / denom,
        zeta_r,
        zeta_i,
        delta_denominator: denom,
    })
}

/// The closed-form `(L - λ)⁻¹[1] = (-(3+λ) + 3u²)/(λ² + 2λ - 3(1-ρ²)²)`.
#[derive(Clone, Debug)]
pub struct ResolventField<'a> {
    profile: &'a StationaryProfile,
    lambda: Complex64,
    inv_denominator: Complex64,
}

pub fn resolvent_one(p: &StationaryProfile, lambda: SpectralPoint) -> Result<ResolventField<'_>> {
    let s3 = 3.0 * s_squared(p);
    let denom = lambda * lambda + 2.0 * lambda - s3;
    if denom.norm() <= POLE_TOL * (lambda.norm_sqr() + 2.0 * lambda.norm() + s3).max(1.0) {
        return Err(Error::Pole {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok(ResolventField {
        profile: p,
        lambda,
        inv_denominator: 1.0 / denom,
    })
}

impl ResolventField<'_> {
    pub fn eval(&self, x: f64) -> Complex64 {
        let u = self.profile.eval(x);
        (3.0 * u * u - 3.0 - self.lambda) * self.inv_denominator
    }

    pub fn sample(&self, nodes: usize) -> Vec<Complex64> {
        let last = (nodes.max(2) - 1) as f64;
        (0..nodes).map(|i| self.eval(i as f64 / last)).collect()
    }

    /// `⟨(L - λ)⁻¹[1], 1⟩`, using the closed form of `∫u²`.
    pub fn integral(&self) -> Complex64 {
        (3.0 * self.profile.mass2() - 3.0 - self.lambda) * self.inv_denominator
    }
}

/// `h(λ) = 1 - αβ/(τλ+γ)·⟨(L-λ)⁻¹[1], 1⟩`; its zeros off the spectrum of `L`
/// are the zeros of `g(·, τ)`.
pub fn h_function(
    params: &Params,
    p: &StationaryProfile,
    lambda: SpectralPoint,
) -> Result<Complex64> {
    let lin = lambda * params.tau() + params.gamma();
    if lin.norm() <= POLE_TOL * (params.tau() * lambda.norm() + params.gamma()) {
        return Err(Error::Pole {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let field = resolvent_one(p, lambda)?;
    Ok(1.0 - field.integral() * (params.alpha() * params.beta()) / lin)
}

/// Imaginary part of the nondegeneracy expression at `iλ_{I,n}`; its
/// positivity shows the Hopf pair is algebraically simple.
pub fn simplicity_margin(params: &Params, n: u32) -> Result<f64> {
    let h = hopf_point(params, n)?;
    require_valid(&h)?;
    let lam = h.lambda_in;
    Ok(6.0 * lam * h.profile.one_minus_mass2()
        + 4.0 * lam * (h.delta + 2.0) * params.gamma() / (params.alpha() * params.beta()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// Every eigenvalue in the open left half-plane.
    Stable,
    /// Exactly at the Hopf point.
    Critical,
    /// The complex pair has crossed into the right half-plane.
    HopfUnstable,
    /// Unstable through exponentially small positive real eigenvalues only.
    Metastable,
}

impl StabilityVerdict {
    pub fn is_asymptotically_stable(self) -> bool {
        self == StabilityVerdict::Stable
    }

    pub fn label(self) -> &'static str {
        match self {
            StabilityVerdict::Stable => "stable",
            StabilityVerdict::Critical => "critical",
            StabilityVerdict::HopfUnstable => "hopf-unstable",
            StabilityVerdict::Metastable => "metastable",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub verdict: StabilityVerdict,
    pub tau: f64,
    pub tau_n: f64,
    /// The complex root of `g(·, τ)` with positive imaginary part, if any.
    pub pair: Option<SpectralPoint>,
    /// Exact `μ₀`.
    pub mu0: f64,
    /// Asymptotic `μ₀`.
    pub mu0_asymptotic: f64,
    /// Asymptotic magnitude of the largest remaining positive eigenvalue
    /// `μ₁` of `L` (only for `n ≥ 2`).
    pub mu1_asymptotic: Option<f64>,
}

pub fn classify_stability(params: &Params, n: u32) -> Result<StabilityReport> {
    let h = hopf_point(params, n)?;
    require_valid(&h)?;
    let tau = params.tau();
    let verdict = if tau == h.tau_n {
        StabilityVerdict::Critical
    } else if tau > h.tau_n {
        StabilityVerdict::HopfUnstable
    } else if n == 1 {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::Metastable
    };
    let pair = complex_pair(&cubic_coeffs(params, &h.profile).roots()?);
    Ok(StabilityReport {
        verdict,
        tau,
        tau_n: h.tau_n,
        pair,
        mu0: mu_extremes(&h.profile).0,
        mu0_asymptotic: mu_asymptotic(0, n, params.eps()),
        mu1_asymptotic: (n >= 2).then(|| mu_asymptotic(1, n, params.eps())),
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::oracle::{dominant_eig, resolvent_residual, DiscreteOperator, NonlocalOperator};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TAU1: f64 = 6.3828409010676614;
    const PERIOD1: f64 = 38.929920651496360;

    fn reference_params(eps: f64, tau: f64) -> Params {
        Params::new(eps, tau, 0.5, 0.5, 0.5).unwrap()
    }

    #[test]
    fn mu_extremes_vieta_and_limit() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let (m0, mn) = mu_extremes(&p);
        let s = p.one_minus_rho2().powi(2);
        assert!(m0 > 0.0 && mn < 0.0);
        assert_relative_eq!(m0 + mn, -2.0, max_relative = 1e-15);
        assert_relative_eq!(m0 * mn, -3.0 * s, max_relative = 1e-14);
        let sharp = build_profile(0.02, 1, Sign::Minus).unwrap();
        let (m0, mn) = mu_extremes(&sharp);
        assert!(m0 < 1e-10 && (mn + 2.0).abs() < 1e-10);
    }

    #[test]
    fn mu0_matches_power_iteration() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let op = DiscreteOperator::linearized(&p, 2001).unwrap();
        let est = dominant_eig(&op, None).unwrap();
        let (m0, _) = mu_extremes(&p);
        assert!(
            (est.value / m0 - 1.0).abs() < 1e-3,
            "{} vs {}",
            est.value,
            m0
        );
    }

    #[test]
    fn mu_asymptotic_branches() {
        let (n, eps) = (2, 0.05);
        let e1 = (-SQRT_2 / (n as f64 * eps)).exp();
        let e2 = (-1.0 / (SQRT_2 * n as f64 * eps)).exp();
        assert_relative_eq!(mu_asymptotic(0, n, eps), 96.0 * e1, max_relative = 1e-15);
        assert_relative_eq!(
            mu_asymptotic(2, n, eps),
            -1.5 + 12.0 * e2,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            mu_asymptotic(4, n, eps),
            -2.0 - 96.0 * e1,
            max_relative = 1e-15
        );
        let far = -2.0 - 9.0 * PI * PI * eps * eps;
        assert_relative_eq!(mu_asymptotic(7, n, eps), far, max_relative = 1e-15);

        let p = build_profile(0.05, 1, Sign::Minus).unwrap();
        let ratio = mu_extremes(&p).0 / mu_asymptotic(0, 1, 0.05);
        assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn hopf_point_values() {
        let h = hopf_point(&reference_params(0.2, 1.0), 1).unwrap();
        assert!(h.valid);
        assert_relative_eq!(h.tau_n, TAU1, max_relative = 1e-12);
        assert_relative_eq!(h.period, PERIOD1, max_relative = 1e-12);
        assert!(h.consistency < 1e-13);
        assert_relative_eq!(h.period * h.lambda_in, 2.0 * PI, max_relative = 1e-15);

        let h2 = hopf_point(&reference_params(0.1, 1.0), 2).unwrap();
        assert_relative_eq!(h2.tau_n, TAU1, max_relative = 1e-12);
        assert_relative_eq!(h2.period, PERIOD1, max_relative = 1e-12);
    }

    #[test]
    fn hopf_point_solves_cubic() {
        for &(eps, n) in &[(0.2, 1), (0.1, 2), (0.08, 1), (0.05, 1), (0.04, 2)] {
            let h = hopf_point(&reference_params(eps, 1.0), n).unwrap();
            let cubic = cubic_coeffs(&reference_params(eps, h.tau_n), &h.profile);
            let z = Complex64::new(0.0, h.lambda_in);
            assert!(
                cubic.eval(z).norm() < 1e-10 * cubic.scale(z).max(1.0),
                "eps {eps}"
            );
            let pair = pair_at(&reference_params(eps, h.tau_n), &h.profile).unwrap();
            assert!(pair.re.abs() < 1e-10 * h.lambda_in.max(1.0));
            assert!((pair.im - h.lambda_in).abs() < 1e-10 * h.lambda_in.max(1.0));
        }
    }

    #[test]
    fn hypothesis_violation_is_flagged() {
        // Tiny δ pushes χ above δ.
        let params = Params::new(0.3, 1.0, 0.01, 0.01, 1.0).unwrap();
        let h = hopf_point(&params, 1).unwrap();
        assert!(!h.valid && h.chi_n >= h.delta);
        assert!(matches!(
            transversality(&params, 1),
            Err(Error::HypothesisViolated { .. })
        ));
        assert!(classify_stability(&params, 1).is_err());
    }

    #[test]
    fn cubic_coefficient_facts() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let c = cubic_coeffs(&reference_params(0.2, 3.0), &p);
        assert!(c.c0 > 0.0);
        // τ → 0 leaves a quadratic with two finite roots.
        let q = Cubic::new(0.0, c.c2 - 2.0 * c.c3, c.c1, c.c0);
        let roots = q.roots().unwrap();
        assert_eq!(roots.len(), 2);
        for z in roots {
            assert!(q.eval(z).norm() < 1e-12);
        }
    }

    #[test]
    fn large_tau_roots_approach_l_spectrum() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let (m0, mn) = mu_extremes(&p);
        let roots = cubic_coeffs(&reference_params(0.2, 1e9), &p).roots().unwrap();
        for target in [0.0, m0, mn] {
            let d = roots
                .iter()
                .map(|z| (z - target).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-3, "target {target}: {roots:?}");
        }
    }

    #[test]
    fn track_pair_brackets_the_crossing() {
        let params = reference_params(0.2, 1.0);
        let t = track_pair(&params, 1, 0.9 * TAU1, 1.1 * TAU1).unwrap();
        assert!((t.tau_star / TAU1 - 1.0).abs() < 1e-10);
        assert!(t.path[0].1.re < 0.0 && t.path.last().unwrap().1.re > 0.0);
        // Imaginary part decreasing through the crossing.
        assert!(t.path.windows(2).all(|w| w[1].1.im < w[0].1.im));
        assert!(matches!(
            track_pair(&params, 1, 0.5 * TAU1, 0.9 * TAU1),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn single_crossing_over_six_decades() {
        let h = hopf_point(&reference_params(0.2, 1.0), 1).unwrap();
        let mut signs = Vec::new();
        for i in 0..10_000 {
            let tau = h.tau_n * 10f64.powf(-3.0 + 6.0 * i as f64 / 9_999.0);
            let params = reference_params(0.2, tau);
            let c = cubic_coeffs(&params, &h.profile);
            let roots = c.roots().unwrap();
            assert!(roots.iter().any(|z| z.im == 0.0 && z.re < 0.0));
            assert!(c.eval(Complex64::new(0.0, 0.0)).norm() > 0.0);
            if let Some(z) = complex_pair(&roots) {
                signs.push(z.re > 0.0);
            }
        }
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn transversality_matches_finite_difference() {
        let params = reference_params(0.2, 1.0);
        let t = transversality(&params, 1).unwrap();
        assert!(t.d_re_dtau > 0.0 && t.d_im_dtau < 0.0 && t.delta_denominator > 0.0);
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let step = 1e-4 * TAU1;
        let hi = pair_at(&params.with_tau(TAU1 + step).unwrap(), &p).unwrap();
        let lo = pair_at(&params.with_tau(TAU1 - step).unwrap(), &p).unwrap();
        let fd = (hi - lo) / (2.0 * step);
        assert_relative_eq!(fd.re, t.d_re_dtau, max_relative = 1e-4);
        assert_relative_eq!(fd.im, t.d_im_dtau, max_relative = 1e-4);
        // Same quantity straight from the implicit function theorem.
        let c = cubic_coeffs(&params.with_tau(TAU1).unwrap(), &p);
        let z = Complex64::new(0.0, hopf_point(&params, 1).unwrap().lambda_in);
        let g_tau = (z * z * z + 2.0 * z * z - 3.0 * p.one_minus_rho2().powi(2) * z) / 0.5;
        let ift = -g_tau / c.derivative(z);
        assert_relative_eq!(ift.re, t.d_re_dtau, max_relative = 1e-10);
        assert_relative_eq!(ift.im, t.d_im_dtau, max_relative = 1e-10);
    }

    #[test]
    fn simplicity_margin_positive_and_linear() {
        for n in 1..=2 {
            for eps in [0.1, 0.08, 0.06, 0.05, 0.04] {
                let m = simplicity_margin(&reference_params(eps / n as f64, 1.0), n).unwrap();
                assert!(m > 0.0);
            }
        }
        let params = reference_params(0.2, 1.0);
        let h = hopf_point(&params, 1).unwrap();
        let m = simplicity_margin(&params, 1).unwrap();
        let unit = 6.0 * h.profile.one_minus_mass2() + 4.0 * (h.delta + 2.0) * 0.5 / 0.25;
        assert_relative_eq!(m / h.lambda_in, unit, max_relative = 1e-14);
    }

    #[test]
    fn h_vanishes_at_hopf_point() {
        let h = hopf_point(&reference_params(0.2, 1.0), 1).unwrap();
        let params = reference_params(0.2, h.tau_n);
        let v = h_function(&params, &h.profile, Complex64::new(0.0, h.lambda_in)).unwrap();
        assert!(v.norm() < 1e-10, "{v}");
        let far = h_function(&params, &h.profile, Complex64::new(-100.0, 0.0)).unwrap();
        assert!((far - 1.0).norm() < 0.1);
    }

    #[test]
    fn h_and_cubic_agree() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let params = reference_params(0.2, 5.0);
        let c = cubic_coeffs(&params, &p);
        let s3 = 3.0 * p.one_minus_rho2().powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let h = h_function(&params, &p, z).unwrap();
            let via_h =
                h * (z * params.tau() + params.gamma()) * (z * z + 2.0 * z - s3) / params.gamma();
            let g = c.eval(z);
            assert!(
                (via_h - g).norm() <= 1e-10 * g.norm().max(c.scale(z)),
                "z = {z}"
            );
        }
    }

    #[test]
    fn poles_are_rejected() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let (m0, mn) = mu_extremes(&p);
        assert!(resolvent_one(&p, Complex64::new(m0, 0.0)).is_err());
        assert!(resolvent_one(&p, Complex64::new(mn, 0.0)).is_err());
        let params = reference_params(0.2, 5.0);
        assert!(h_function(&params, &p, Complex64::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn resolvent_closed_form_values() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let lambda = Complex64::new(0.1, 0.2);
        let field = resolvent_one(&p, lambda).unwrap();
        let s3 = 3.0 * p.one_minus_rho2().powi(2);
        let expect =
            (-3.0 - lambda + 3.0 * p.rho().powi(2)) / (lambda * lambda + 2.0 * lambda - s3);
        assert!((field.eval(0.0) - expect).norm() < 1e-14);
    }

    #[test]
    fn resolvent_residual_on_fine_grid() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let op = DiscreteOperator::linearized(&p, 10_001).unwrap();
        let (m0, _) = mu_extremes(&p);
        for lambda in [Complex64::new(0.1, 0.2), Complex64::new(m0 + 10.0, 0.0)] {
            let phi = resolvent_one(&p, lambda).unwrap().sample(10_001);
            let r = resolvent_residual(&op, lambda, &phi);
            assert!(r < 1e-5, "lambda {lambda}: residual {r}");
        }
        let h = hopf_point(&reference_params(0.2, 1.0), 1).unwrap();
        let lambda = Complex64::new(0.0, h.lambda_in);
        let phi = resolvent_one(&p, lambda).unwrap().sample(10_001);
        assert!(resolvent_residual(&op, lambda, &phi) < 1e-5);
    }

    #[test]
    fn discrete_nonlocal_pair_matches() {
        let h = hopf_point(&reference_params(0.2, 1.0), 1).unwrap();
        let op = NonlocalOperator {
            local: DiscreteOperator::linearized(&h.profile, 2001).unwrap(),
            tau: h.tau_n,
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
        };
        let z = op
            .eigenvalue_near(Complex64::new(0.0, h.lambda_in))
            .unwrap();
        assert!(z.re.abs() < 1e-3 * h.lambda_in, "{z}");
        assert!((z.im / h.lambda_in - 1.0).abs() < 1e-3, "{z}");
        // It is a genuine eigenpair of the assembled block operator.
        let phi: Vec<Complex64> = op
            .resolvent_one(z)
            .unwrap()
            .iter()
            .map(|v| v * 0.5)
            .collect();
        let (a_phi, a_eta) = op.apply(&phi, Complex64::new(1.0, 0.0));
        let worst = a_phi
            .iter()
            .zip(&phi)
            .map(|(a, x)| (a - z * x).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8 && (a_eta - z).norm() < 1e-8);
    }

    #[test]
    fn stability_classification() {
        let s = classify_stability(&reference_params(0.2, 6.0), 1).unwrap();
        assert_eq!(s.verdict, StabilityVerdict::Stable);
        assert!(s.pair.unwrap().re < 0.0);
        let u = classify_stability(&reference_params(0.2, 6.7), 1).unwrap();
        assert_eq!(u.verdict, StabilityVerdict::HopfUnstable);
        assert!(u.pair.unwrap().re > 0.0);
        for tau in [0.1, 6.0, 6.7, 100.0] {
            let r = classify_stability(&reference_params(0.1, tau), 2).unwrap();
            assert!(!r.verdict.is_asymptotically_stable());
            assert!(r.mu1_asymptotic.is_some());
        }
    }

    #[test]
    fn asymptotic_exponent_identity() {
        let params = reference_params(0.05, 1.0);
        let a = hopf_asymptotics(1, 0.05, &params);
        let lhs = (a.tau / (0.5 * 2.5) * 192.0).ln();
        assert_relative_eq!(lhs, SQRT_2 / 0.05, max_relative = 1e-14);
    }

    #[test]
    fn asymptotic_ratios_tend_to_one() {
        let eps_grid = [0.1, 0.08, 0.06, 0.05, 0.04];
        let mut ratios = Vec::new();
        for eps in eps_grid {
            let params = reference_params(eps, 1.0);
            let h = hopf_point(&params, 1).unwrap();
            let a = hopf_asymptotics(1, eps, &params);
            ratios.push([h.period / a.period, h.tau_n / a.tau, h.chi_n / a.chi]);
        }
        for k in 0..3 {
            let dev: Vec<f64> = ratios.iter().map(|r| (r[k] - 1.0).abs()).collect();
            assert!(dev[4] < 0.05, "quantity {k}: {dev:?}");
            assert!(dev[2] > dev[3] && dev[3] > dev[4], "quantity {k}: {dev:?}");
        }
    }
}
