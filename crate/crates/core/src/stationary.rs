//! Exact `n`-layer stationary solutions
//! `u(x) = ±sqrt(2k²/(1+k²)) sn((2nx+1)K(k), k)`, with `k` fixed by
//! `sqrt(1+k²) K(k) = 1/(2nε)`.

use std::f64::consts::PI;

use crate::elliptic::{ellip_e, ellip_k, jacobi_with_k, Modulus};
use crate::error::{Error, Result};

const BISECTION_MAX_ITER: usize = 200;

/// The five positive constants of the shadow system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    eps: f64,
    tau: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl Params {
    pub fn new(eps: f64, tau: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let mut bad = Vec::new();
        for (name, v) in [
            ("eps", eps),
            ("tau", tau),
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} = {v} must be positive and finite"));
            }
        }
        if bad.is_empty() {
            Ok(Self {
                eps,
                tau,
                alpha,
                beta,
                gamma,
            })
        } else {
            Err(Error::InvalidParams(bad.join("; ")))
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `δ = αβ/γ`.
    pub fn delta(&self) -> f64 {
        self.alpha * self.beta / self.gamma
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.eps, tau, self.alpha, self.beta, self.gamma)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(eps, self.tau, self.alpha, self.beta, self.gamma)
    }
}

/// Which of the two mirror-image solutions `u_n^+` / `u_n^-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

fn modulus_residual(m1: f64, target: f64) -> f64 {
    let m = Modulus::new(m1).expect("bisection stays inside (0, 1]");
    (2.0 - m1).sqrt() * ellip_k(m) - target
}

/// The unique modulus with `sqrt(1+k²) K(k) = 1/(2nε)`.
///
/// The left side is strictly decreasing in `m1 = 1 - k²`, running from `+∞`
/// at `m1 → 0` down to `π/2` at `m1 = 1`. Bisection runs on `ln m1` so that
/// exponentially small `m1` is resolved to full relative precision.
pub fn solve_modulus(eps: f64, n: u32) -> Result<Modulus> {
    let bound = 1.0 / (n as f64 * PI);
    if n == 0 || !(eps > 0.0 && eps < bound) {
        return Err(Error::NoStationarySolution { eps, n, bound });
    }
    let target = 1.0 / (2.0 * n as f64 * eps);

    let mut lo = f64::MIN_POSITIVE.ln();
    let mut hi = 0.0_f64;
    if modulus_residual(lo.exp(), target) < 0.0 {
        return Err(Error::ModulusUnderflow { eps });
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modulus_residual(mid.exp(), target) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Of the two bracketing points, keep the one with the smaller residual.
    let (m_lo, m_hi) = (lo.exp(), hi.exp().min(1.0));
    let m1 = if modulus_residual(m_lo, target).abs() <= modulus_residual(m_hi, target).abs() {
        m_lo
    } else {
        m_hi
    };
    Modulus::new(m1)
}

/// Exact data of one `n`-layer stationary solution.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryProfile {
    n: u32,
    eps: f64,
    sign: Sign,
    modulus: Modulus,
    k_integral: f64,
    e_integral: f64,
    rho: f64,
    mass2: f64,
    one_minus_mass2: f64,
    layers: Vec<f64>,
}

/// Solves for the modulus and assembles the profile.
pub fn build_profile(eps: f64, n: u32, sign: Sign) -> Result<StationaryProfile> {
    let modulus = solve_modulus(eps, n)?;
    let k_integral = ellip_k(modulus);
    let e_integral = ellip_e(modulus);
    let (m1, k2) = (modulus.m1(), modulus.k2());
    let rho = (2.0 * k2 / (2.0 - m1)).sqrt();
    let ratio = e_integral / k_integral;
    let mass2 = 2.0 / (2.0 - m1) * (1.0 - ratio);
    let one_minus_mass2 = (2.0 * ratio - m1) / (2.0 - m1);
    let layers = (0..n)
        .map(|l| (1.0 + 2.0 * l as f64) / (2.0 * n as f64))
        .collect();
    Ok(StationaryProfile {
        n,
        eps,
        sign,
        modulus,
        k_integral,
        e_integral,
        rho,
        mass2,
        one_minus_mass2,
        layers,
    })
}

impl StationaryProfile {
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn sign(&self) -> Sign {
        self.sign
    }
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }
    /// `K(k_n)`.
    pub fn k_integral(&self) -> f64 {
        self.k_integral
    }
    /// `E(k_n)`.
    pub fn e_integral(&self) -> f64 {
        self.e_integral
    }
    /// `ρ = |u_n(0)| = sqrt(2k²/(1+k²))`.
    pub fn rho(&self) -> f64 {
        self.rho
    }
    /// `1 - ρ² = (1-k²)/(1+k²)`, formed from `m1` without cancellation.
    pub fn one_minus_rho2(&self) -> f64 {
        let m1 = self.modulus.m1();
        m1 / (2.0 - m1)
    }
    /// `∫₀¹ u² dx`.
    pub fn mass2(&self) -> f64 {
        self.mass2
    }
    /// `1 - ∫₀¹ u² dx = (2E/K - 1 + k²)/(1+k²)`.
    pub fn one_minus_mass2(&self) -> f64 {
        self.one_minus_mass2
    }
    /// Layer abscissae `(1+2l)/(2n)`.
    pub fn layers(&self) -> &[f64] {
        &self.layers
    }

    /// `u(x)` on `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let arg = (2.0 * self.n as f64 * x + 1.0) * self.k_integral;
        self.sign.value() * self.rho * jacobi_with_k(arg, self.modulus, self.k_integral).sn
    }

    /// `u'(x)`, from `sn' = cn dn`.
    pub fn derivative(&self, x: f64) -> f64 {
        let scale = 2.0 * self.n as f64 * self.k_integral;
        let j = jacobi_with_k(
            (2.0 * self.n as f64 * x + 1.0) * self.k_integral,
            self.modulus,
            self.k_integral,
        );
        self.sign.value() * self.rho * scale * j.cn * j.dn
    }

    /// Samples `u` at `nodes` equispaced points including both ends.
    pub fn sample(&self, nodes: usize) -> Vec<f64> {
        let last = (nodes.max(2) - 1) as f64;
        (0..nodes).map(|i| self.eval(i as f64 / last)).collect()
    }
}

/// `∫₀¹ u_n² dx = (2/(1+k²))(1 - E/K)`.
pub fn mass_squared(p: &StationaryProfile) -> f64 {
    p.mass2()
}

/// `χ_n = (1-k²)² K / ((1+k²)(2E - (1-k²)K))`.
pub fn chi(p: &StationaryProfile) -> f64 {
    let m1 = p.modulus().m1();
    let (kk, e) = (p.k_integral(), p.e_integral());
    m1 * m1 * kk / ((2.0 - m1) * (2.0 * e - m1 * kk))
}
