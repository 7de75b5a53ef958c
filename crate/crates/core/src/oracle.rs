//! Independent brute-force verifiers: quadrature, discretized operators,
//! shift-inverted power iteration and resolvent residuals.
//!
//! Nothing here feeds the closed-form results; these routines exist so the
//! closed forms can be checked against something computed a different way.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stationary::StationaryProfile;
use crate::tridiag::TridiagonalLu;

const GAUSS_ORDER: usize = 16;
const SIMPSON_MAX_DEPTH: u32 = 48;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = n * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite 16-point Gauss–Legendre quadrature over `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre_rule(GAUSS_ORDER);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let panel: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * f(mid + 0.5 * h * x))
            .sum();
        total += 0.5 * h * panel;
    }
    total
}

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut total = f(a) + f(b);
    for i in 1..m {
        total += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    total * h / 3.0
}

/// Trapezoid rule on equispaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dx * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    struct Worst(f64);
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
        worst: &mut Worst,
    ) -> f64 {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 {
            if delta.abs() > 15.0 * tol {
                worst.0 = worst.0.max(delta.abs() / 15.0);
            }
            return left + right + delta / 15.0;
        }
        recurse(
            f,
            (a, fa),
            (lm, flm),
            (m, fm),
            left,
            0.5 * tol,
            depth - 1,
            worst,
        ) + recurse(
            f,
            (m, fm),
            (rm, frm),
            (b, fb),
            right,
            0.5 * tol,
            depth - 1,
            worst,
        )
    }

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut worst = Worst(0.0);
    let value = recurse(
        &f,
        (a, fa),
        (m, fm),
        (b, fb),
        whole,
        tol,
        SIMPSON_MAX_DEPTH,
        &mut worst,
    );
    if !value.is_finite() || worst.0 > tol {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            estimate: if value.is_finite() {
                worst.0
            } else {
                f64::INFINITY
            },
        });
    }
    Ok(value)
}

/// A tridiagonal discretization of `ε²∂ₓₓ + V(x)` on `[0, 1]` with Neumann
/// ends closed by ghost-node reflection.
///
/// The matrix is not symmetric, but it is self-adjoint for the trapezoid
/// inner product, which is what [`DiscreteOperator::inner`] uses.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteOperator {
    /// `ε²D₂ + diag(potential)` on `potential.len()` equispaced nodes.
    pub fn with_potential(eps: f64, potential: &[f64]) -> Result<Self> {
        let n = potential.len();
        if n < 3 {
            return Err(Error::InvalidParams(
                "operator needs at least 3 nodes".into(),
            ));
        }
        let dx = 1.0 / (n - 1) as f64;
        let r = eps * eps / (dx * dx);
        let mut lower = vec![r; n];
        let mut upper = vec![r; n];
        upper[0] = 2.0 * r;
        lower[n - 1] = 2.0 * r;
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        let diag = potential.iter().map(|v| v - 2.0 * r).collect();
        Ok(Self {
            lower,
            diag,
            upper,
            weights: trapezoid_weights(n, dx),
        })
    }

    /// The linearization `L = ε²∂ₓₓ + 1 - 3u²` about a stationary profile.
    pub fn linearized(p: &StationaryProfile, nodes: usize) -> Result<Self> {
        let potential: Vec<f64> = p.sample(nodes).iter().map(|u| 1.0 - 3.0 * u * u).collect();
        Self::with_potential(p.eps(), &potential)
    }

    /// A diagonal operator; the inner product is the plain Euclidean one.
    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        Self {
            lower: vec![0.0; n],
            diag: entries.to_vec(),
            upper: vec![0.0; n],
            weights: vec![1.0; n],
        }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.apply_generic(v)
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.apply_generic(v)
    }

    fn apply_generic<T>(&self, v: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let n = self.size();
        assert_eq!(v.len(), n, "vector has the wrong length");
        (0..n)
            .map(|i| {
                let mut s = v[i] * self.diag[i];
                if i > 0 {
                    s = s + v[i - 1] * self.lower[i];
                }
                if i + 1 < n {
                    s = s + v[i + 1] * self.upper[i];
                }
                s
            })
            .collect()
    }

    /// Weighted inner product `Σ wᵢ aᵢ bᵢ`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a)
            .zip(b)
            .map(|((w, x), y)| w * x * y)
            .sum()
    }

    /// Upper bound on the spectrum from Gershgorin discs.
    pub fn gershgorin_upper(&self) -> f64 {
        (0..self.size())
            .map(|i| self.diag[i] + self.lower[i].abs() + self.upper[i].abs())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Solves `(A - λ) x = rhs` for complex `λ`.
    pub fn solve_shifted(&self, lambda: Complex64, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.size();
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        let mut x = rhs.to_vec();
        let mut prev_c = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let l = if i == 0 { 0.0 } else { self.lower[i] };
            let pivot = self.diag[i] - lambda - prev_c * l;
            if pivot.norm() == 0.0 {
                return Err(Error::Pole {
                    re: lambda.re,
                    im: lambda.im,
                });
            }
            if i > 0 {
                x[i] = x[i] - x[i - 1] * l;
            }
            x[i] /= pivot;
            prev_c = if i + 1 < n {
                self.upper[i] / pivot
            } else {
                Complex64::new(0.0, 0.0)
            };
            c[i] = prev_c;
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - c[i] * x[i + 1];
        }
        Ok(x)
    }
}

fn trapezoid_weights(n: usize, dx: f64) -> Vec<f64> {
    let mut w = vec![dx; n];
    w[0] = 0.5 * dx;
    w[n - 1] = 0.5 * dx;
    w
}

/// Result of [`dominant_eig`].
#[derive(Clone, Copy, Debug)]
pub struct EigenEstimate {
    pub value: f64,
    /// `‖Av - λv‖ / ‖v‖` in the operator's inner product.
    pub residual: f64,
    pub iterations: usize,
}

/// Largest eigenvalue of a self-adjoint tridiagonal operator by power
/// iteration on `(σ - A)⁻¹`.
///
/// `shift` is `σ`; it must lie above the spectrum and defaults to the
/// Gershgorin bound plus one. Inverting the shifted operator makes the
/// convergence rate independent of the grid size.
pub fn dominant_eig(op: &DiscreteOperator, shift: Option<f64>) -> Result<EigenEstimate> {
    const MAX_ITER: usize = 20_000;
    let n = op.size();
    let sigma = shift.unwrap_or_else(|| op.gershgorin_upper() + 1.0);
    let lower: Vec<f64> = op.lower.iter().map(|v| -v).collect();
    let upper: Vec<f64> = op.upper.iter().map(|v| -v).collect();
    let diag: Vec<f64> = op.diag.iter().map(|d| sigma - d).collect();
    let lu = TridiagonalLu::new(&lower, &diag, &upper)?;
    let scale = op
        .diag
        .iter()
        .zip(&op.lower)
        .zip(&op.upper)
        .map(|((d, l), u)| d.abs() + l.abs() + u.abs())
        .fold(0.0, f64::max);

    // A start vector with no symmetry, so it overlaps every eigenvector.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i as f64) * 0.7 + 0.3).sin())
        .collect();
    let mut value = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITER {
        lu.solve_in_place(&mut v);
        let norm = op.inner(&v, &v).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let av = op.apply(&v);
        value = op.inner(&v, &av);
        let r: Vec<f64> = av.iter().zip(&v).map(|(a, x)| a - value * x).collect();
        residual = op.inner(&r, &r).sqrt();
        if residual <= 1e-9 * value.abs().max(1.0) + 1e-13 * scale {
            return Ok(EigenEstimate {
                value,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITER,
        residual: if value.is_finite() {
            residual
        } else {
            f64::INFINITY
        },
    })
}

/// `max |((A - λ)φ - 1)ᵢ|` over interior nodes.
pub fn resolvent_residual(op: &DiscreteOperator, lambda: Complex64, phi: &[Complex64]) -> f64 {
    let a_phi = op.apply_complex(phi);
    let n = op.size();
    (1..n - 1)
        .map(|i| (a_phi[i] - lambda * phi[i] - 1.0).norm())
        .fold(0.0, f64::max)
}

/// The discretized nonlocal operator
/// `(φ, η) ↦ (Lφ - αη, (β⟨φ, 1⟩ - γη)/τ)` on `N + 1` unknowns.
#[derive(Clone, Debug)]
pub struct NonlocalOperator {
    pub local: DiscreteOperator,
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl NonlocalOperator {
    pub fn apply(&self, phi: &[Complex64], eta: Complex64) -> (Vec<Complex64>, Complex64) {
        let mut out = self.local.apply_complex(phi);
        out.iter_mut().for_each(|z| *z -= eta * self.alpha);
        let mean: Complex64 = self.local.weights.iter().zip(phi).map(|(w, z)| z * w).sum();
        (out, (mean * self.beta - eta * self.gamma) / self.tau)
    }

    /// The scalar reduction `1 - αβ/(τλ+γ)·⟨(L - λ)⁻¹1, 1⟩` of the discrete problem.
    pub fn reduced(&self, lambda: Complex64) -> Result<Complex64> {
        let phi = self.resolvent_one(lambda)?;
        let inner: Complex64 = self
            .local
            .weights
            .iter()
            .zip(&phi)
            .map(|(w, z)| z * w)
            .sum();
        Ok(1.0 - inner * (self.alpha * self.beta) / (lambda * self.tau + self.gamma))
    }

    pub fn resolvent_one(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        let ones = vec![Complex64::new(1.0, 0.0); self.local.size()];
        self.local.solve_shifted(lambda, &ones)
    }

    /// An eigenvalue near `guess`, by secant iteration on [`Self::reduced`].
    pub fn eigenvalue_near(&self, guess: Complex64) -> Result<Complex64> {
        const MAX_ITER: usize = 100;
        let mut z0 = guess;
        let mut z1 = guess * (1.0 + 1e-4) + Complex64::new(0.0, 1e-6);
        let mut f0 = self.reduced(z0)?;
        let mut f1 = self.reduced(z1)?;
        for _ in 0..MAX_ITER {
            let denom = f1 - f0;
            if denom.norm() == 0.0 {
                break;
            }
            let z2 = z1 - f1 * (z1 - z0) / denom;
            z0 = z1;
            f0 = f1;
            z1 = z2;
            f1 = self.reduced(z1)?;
            if (z1 - z0).norm() <= 1e-14 * z1.norm().max(1e-300) {
                return Ok(z1);
            }
        }
        if f1.norm() < 1e-10 {
            return Ok(z1);
        }
        Err(Error::NonConvergence {
            iterations: MAX_ITER,
            residual: f1.norm(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::{build_profile, Sign};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre_rule(GAUSS_ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // Exact through degree 31.
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((q - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn simple_integrals() {
        let third = 1.0 / 3.0;
        assert!((quadrature(|x| x * x, 0.0, 1.0, 1e-13).unwrap() - third).abs() < 1e-12);
        assert!((simpson(|x| x * x, 0.0, 1.0, 10) - third).abs() < 1e-15);
        assert!((gauss_legendre(f64::exp, 0.0, 1.0, 4) - (1f64.exp() - 1.0)).abs() < 1e-14);
        let samples: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        assert!((trapezoid(&samples, 0.01) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quadrature_reports_failure() {
        assert!(matches!(
            quadrature(|x| 1.0 / x, 0.0, 1.0, 1e-10),
            Err(Error::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn operator_is_linear() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let op = DiscreteOperator::linearized(&p, 101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..101).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..101).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (s, t) = (0.7, -1.3);
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect();
        let lhs = op.apply(&combo);
        let (la, lb) = (op.apply(&a), op.apply(&b));
        let scale = op.gershgorin_upper().abs().max(4.0 * 0.04 * 1e4);
        for i in 0..101 {
            assert!((lhs[i] - (s * la[i] + t * lb[i])).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn operator_is_self_adjoint_in_trapezoid_product() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let op = DiscreteOperator::linearized(&p, 51).unwrap();
        let a: Vec<f64> = (0..51).map(|i| (i as f64 * 0.3).cos()).collect();
        let b: Vec<f64> = (0..51).map(|i| (i as f64 * 0.17).sin() + 0.2).collect();
        let lhs = op.inner(&op.apply(&a), &b);
        let rhs = op.inner(&a, &op.apply(&b));
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn dominant_eig_of_neumann_laplacian_is_zero() {
        let op = DiscreteOperator::with_potential(0.2, &[0.0; 201]).unwrap();
        let est = dominant_eig(&op, None).unwrap();
        assert!(est.value.abs() < 1e-9, "value {}", est.value);
    }

    #[test]
    fn dominant_eig_of_diagonal() {
        let op = DiscreteOperator::diagonal(&[-3.0, 1.5, 0.2, -7.0]);
        let est = dominant_eig(&op, None).unwrap();
        assert!((est.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn constant_coefficient_resolvent() {
        // Potential f'(ρ) everywhere: φ = 1/(f'(ρ) - λ) is exact.
        let rho: f64 = 0.8;
        let fp = 1.0 - 3.0 * rho * rho;
        let op = DiscreteOperator::with_potential(0.2, &vec![fp; 1001]).unwrap();
        let lambda = Complex64::new(0.1, 0.2);
        let phi = vec![1.0 / (fp - lambda); 1001];
        // Roundoff scale: |entries of L| ~ 4ε²/dx² times |φ|.
        assert!(resolvent_residual(&op, lambda, &phi) < 1e-16 * 4.0 * 0.04 * 1e6 * 10.0);
    }

    #[test]
    fn complex_solve_round_trip() {
        let p = build_profile(0.2, 1, Sign::Minus).unwrap();
        let op = DiscreteOperator::linearized(&p, 301).unwrap();
        let lambda = Complex64::new(0.05, 0.3);
        let rhs: Vec<Complex64> = (0..301)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.5).cos()))
            .collect();
        let x = op.solve_shifted(lambda, &rhs).unwrap();
        let back = op.apply_complex(&x);
        for i in 0..301 {
            assert!((back[i] - lambda * x[i] - rhs[i]).norm() < 1e-9);
        }
    }
}
