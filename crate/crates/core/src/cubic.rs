//! Roots of real cubics `c3 λ³ + c2 λ² + c1 λ + c0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_POLISH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cubic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Cubic {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((z * self.c3 + self.c2) * z + self.c1) * z + self.c0
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        (z * (3.0 * self.c3) + 2.0 * self.c2) * z + self.c1
    }

    /// Sum of term magnitudes at `z`; the roundoff scale of [`Cubic::eval`].
    pub fn scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        ((self.c3.abs() * r + self.c2.abs()) * r + self.c1.abs()) * r + self.c0.abs()
    }

    fn residual_ok(&self, z: Complex64) -> bool {
        self.eval(z).norm() <= RESIDUAL_TOL * self.scale(z).max(1.0)
    }

    /// All roots; real roots ascending first, then a complex pair with the
    /// positive imaginary part first. A zero leading coefficient falls back
    /// to the quadratic and returns two roots.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let mut roots = if self.c3 == 0.0 {
            if self.c2 == 0.0 {
                return Err(Error::InvalidParams(
                    "cubic degenerates below degree two".into(),
                ));
            }
            quadratic_roots(self.c2, self.c1, self.c0).to_vec()
        } else {
            self.cubic_roots_raw()
        };

        for z in roots.iter_mut() {
            *z = self.polish(*z);
        }
        if roots.len() == 3 && roots[1].im != 0.0 {
            roots[2] = roots[1].conj();
        }
        let worst = roots
            .iter()
            .map(|z| self.eval(*z).norm() / self.scale(*z).max(1.0))
            .fold(0.0, f64::max);
        if worst > RESIDUAL_TOL {
            return Err(Error::IllConditioned { residual: worst });
        }

        roots.sort_by(|a, b| {
            let ka = (a.im != 0.0, a.re, -a.im);
            let kb = (b.im != 0.0, b.re, -b.im);
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(roots)
    }

    fn cubic_roots_raw(&self) -> Vec<Complex64> {
        let b = self.c2 / self.c3;
        let c = self.c1 / self.c3;
        let d = self.c0 / self.c3;
        let shift = b / 3.0;
        let p = c - b * shift;
        let q = 2.0 * shift * shift * shift - shift * c + d;
        let disc = 0.25 * q * q + p * p * p / 27.0;

        if disc > 0.0 {
            let a = -q.signum() * (0.5 * q.abs() + disc.sqrt()).cbrt();
            let t = if a == 0.0 { 0.0 } else { a - p / (3.0 * a) };
            let real = self.polish_real(t - shift);
            // Deflate (λ - r) out of the cubic.
            let a2 = self.c3;
            let a1 = self.c2 + self.c3 * real;
            let a0 = self.c1 + a1 * real;
            let [z1, z2] = quadratic_roots(a2, a1, a0);
            vec![Complex64::new(real, 0.0), z1, z2]
        } else {
            let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
            let arg = if m == 0.0 {
                0.0
            } else {
                (3.0 * q / (p * m)).clamp(-1.0, 1.0)
            };
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| {
                    let t = m * (theta - 2.0 * PI * k as f64 / 3.0).cos();
                    Complex64::new(self.polish_real(t - shift), 0.0)
                })
                .collect()
        }
    }

    fn polish_real(&self, mut x: f64) -> f64 {
        let f = |x: f64| ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0;
        let df = |x: f64| (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1;
        let mut fx = f(x);
        for _ in 0..MAX_POLISH {
            let d = df(x);
            if d == 0.0 || fx == 0.0 {
                break;
            }
            let next = x - fx / d;
            let fn_ = f(next);
            if fn_.abs() >= fx.abs() {
                break;
            }
            x = next;
            fx = fn_;
        }
        x
    }

    fn polish(&self, mut z: Complex64) -> Complex64 {
        let is_real = z.im == 0.0;
        for i in 0..MAX_POLISH {
            if i > 0 && self.residual_ok(z) {
                break;
            }
            let d = self.derivative(z);
            if d.norm() == 0.0 {
                break;
            }
            let next = z - self.eval(z) / d;
            if self.eval(next).norm() >= self.eval(z).norm() {
                break;
            }
            z = next;
        }
        if is_real {
            z.im = 0.0;
        }
        z
    }
}

/// Roots of `a x² + b x + c` with real coefficients, `a != 0`.
fn quadratic_roots(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { s } else { -s });
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q / a, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a.abs());
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// The root with positive imaginary part, if the roots contain a complex pair.
pub fn complex_pair(roots: &[Complex64]) -> Option<Complex64> {
    roots.iter().copied().find(|z| z.im > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Cubic with prescribed roots `r` and `p ± iq`, scaled by `lead`.
    fn from_roots(lead: f64, r: f64, p: f64, q: f64) -> Cubic {
        // (λ - r)(λ² - 2pλ + p² + q²)
        let s = p * p + q * q;
        Cubic::new(
            lead,
            lead * (-2.0 * p - r),
            lead * (s + 2.0 * p * r),
            lead * (-r * s),
        )
    }

    #[test]
    fn three_real_roots() {
        // (λ-1)(λ-2)(λ+3) = λ³ - 7λ + 6
        let roots = Cubic::new(1.0, 0.0, -7.0, 6.0).roots().unwrap();
        let want = [-3.0, 1.0, 2.0];
        for (z, w) in roots.iter().zip(want) {
            assert!((z.re - w).abs() < 1e-14 && z.im == 0.0);
        }
    }

    #[test]
    fn pair_and_real_root() {
        let cubic = from_roots(2.0, -2.0, 0.0, 0.16);
        let roots = cubic.roots().unwrap();
        assert!((roots[0] - c(-2.0, 0.0)).norm() < 1e-14);
        assert!((roots[1] - c(0.0, 0.16)).norm() < 1e-14);
        assert_eq!(roots[2], roots[1].conj());
        assert_eq!(complex_pair(&roots), Some(roots[1]));
    }

    #[test]
    fn quadratic_fallback() {
        // τ = 0: c3 = 0, λ² + 3λ + 2 = 0
        let roots = Cubic::new(0.0, 1.0, 3.0, 2.0).roots().unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].re + 2.0).abs() < 1e-15 && (roots[1].re + 1.0).abs() < 1e-15);
        assert!(Cubic::new(0.0, 0.0, 1.0, 1.0).roots().is_err());
    }

    #[test]
    fn triple_root() {
        // (λ+1)³
        let roots = Cubic::new(1.0, 3.0, 3.0, 1.0).roots().unwrap();
        for z in roots {
            assert!((z + 1.0).norm() < 1e-5);
        }
    }

    #[test]
    fn zero_root() {
        let roots = Cubic::new(1.0, 2.0, -0.5, 0.0).roots().unwrap();
        assert!(roots.iter().any(|z| z.norm() < 1e-15));
    }

    proptest! {
        #[test]
        fn recovers_prescribed_roots(
            lead in 0.1f64..1e6,
            r in -10.0f64..10.0,
            p in -5.0f64..5.0,
            q in 0.01f64..5.0,
        ) {
            let cubic = from_roots(lead, r, p, q);
            let roots = cubic.roots().unwrap();
            let pair = complex_pair(&roots).unwrap();
            prop_assert!((pair - c(p, q)).norm() < 1e-8 * (1.0 + r.abs() + p.abs() + q));
            prop_assert!(roots.iter().any(|z| (z - c(r, 0.0)).norm() < 1e-8 * (1.0 + r.abs())));
            for z in &roots {
                prop_assert!(cubic.eval(*z).norm() <= 1e-10 * cubic.scale(*z).max(1.0));
            }
        }

        #[test]
        fn conjugate_symmetry(c3 in 0.01f64..100.0, c2 in -10.0f64..10.0, c1 in -10.0f64..10.0, c0 in -10.0f64..10.0) {
            let roots = Cubic::new(c3, c2, c1, c0).roots().unwrap();
            let nonreal: Vec<_> = roots.iter().filter(|z| z.im != 0.0).collect();
            prop_assert!(nonreal.is_empty() || nonreal.len() == 2);
            if nonreal.len() == 2 {
                prop_assert_eq!(*nonreal[0], nonreal[1].conj());
            }
        }
    }
}
