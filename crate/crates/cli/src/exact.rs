//! `exact`: closed-form Hopf data of one stationary solution.

use shadow_hopf::spectrum::{
    classify_stability, hopf_asymptotics, hopf_point, mu_asymptotic, mu_extremes,
    simplicity_margin, transversality,
};
use shadow_hopf::{Params, Result};

use crate::{Record, EXIT_HYPOTHESIS, EXIT_OK};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactInput {
    pub eps: f64,
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// When given, the stability verdict at this `τ` is added.
    pub tau: Option<f64>,
}

impl ExactInput {
    /// The reproduction defaults `α = β = γ = 0.5`.
    pub fn new(eps: f64, n: u32) -> Self {
        Self {
            eps,
            n,
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
            tau: None,
        }
    }
}

/// The full record and the exit code it warrants: `EXIT_HYPOTHESIS` when
/// `χ_n ≥ δ`, in which case only the quantities that remain defined are listed.
pub fn exact_record(input: &ExactInput) -> Result<(Record, u8)> {
    // τ does not enter the Hopf data; any positive value serves.
    let params = Params::new(
        input.eps,
        input.tau.unwrap_or(1.0),
        input.alpha,
        input.beta,
        input.gamma,
    )?;
    let n = input.n;
    let h = hopf_point(&params, n)?;
    let p = &h.profile;
    let asym = hopf_asymptotics(n, input.eps, &params);
    let (mu0, mu_n) = mu_extremes(p);

    let mut r = Record::default();
    r.num("eps", input.eps);
    r.text("n", n);
    r.num("alpha", input.alpha);
    r.num("beta", input.beta);
    r.num("gamma", input.gamma);
    r.num("k", p.modulus().k());
    r.num("m1", p.modulus().m1());
    r.num("rho", p.rho());
    r.num("one_minus_mass2", p.one_minus_mass2());
    r.num("chi_n", h.chi_n);
    r.num("delta", h.delta);
    r.text("valid", h.valid);
    r.num("chi_asym", asym.chi);
    r.num("mu0", mu0);
    r.num("mu_n", mu_n);
    r.num("mu0_asym", mu_asymptotic(0, n, input.eps));
    if !h.valid {
        return Ok((r, EXIT_HYPOTHESIS));
    }
    r.num("tau_n", h.tau_n);
    r.num("lambda_in", h.lambda_in);
    r.num("period", h.period);
    r.num("tau_asym", asym.tau);
    r.num("period_asym", asym.period);
    r.num("discriminant", h.discriminant);
    let tr = transversality(&params, n)?;
    r.num("d_re_dtau", tr.d_re_dtau);
    r.num("d_im_dtau", tr.d_im_dtau);
    r.num("simplicity_margin", simplicity_margin(&params, n)?);
    if let Some(tau) = input.tau {
        let report = classify_stability(&params, n)?;
        r.num("tau", tau);
        r.text("stability", report.verdict.label());
        if let Some(pair) = report.pair {
            r.num("pair_re", pair.re);
            r.num("pair_im", pair.im);
        }
    }
    Ok((r, EXIT_OK))
}
