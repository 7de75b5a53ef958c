//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything here is parameterised by the complementary parameter
//! `m1 = 1 - k^2` rather than by `k`, so that sharp layers (where `1 - k^2`
//! is exponentially small) stay representable.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 40;
/// Landen descent stops once the transformed modulus squared drops below this.
const LANDEN_MODULUS_SQ: f64 = 1e-16;

/// Elliptic modulus stored through its complementary parameter `m1 = 1 - k^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulus {
    m1: f64,
}

impl Modulus {
    /// `m1` must lie in `(0, 1]`; `m1 = 1` is the circular case `k = 0`.
    pub fn new(m1: f64) -> Result<Self> {
        if m1 > 0.0 && m1 <= 1.0 {
            Ok(Self { m1 })
        } else {
            Err(Error::InvalidModulus { m1 })
        }
    }

    pub fn from_k(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::InvalidModulus { m1: 1.0 - k * k });
        }
        Self::new((1.0 - k) * (1.0 + k))
    }

    /// Complementary parameter `1 - k^2`.
    pub fn m1(self) -> f64 {
        self.m1
    }

    /// Parameter `k^2`.
    pub fn k2(self) -> f64 {
        1.0 - self.m1
    }

    pub fn k(self) -> f64 {
        self.k2().sqrt()
    }

    /// Complementary modulus `k' = sqrt(1 - k^2)`.
    pub fn k_prime(self) -> f64 {
        self.m1.sqrt()
    }

    /// The modulus with `k` and `k'` exchanged. `None` when `k = 0`.
    pub fn complement(self) -> Option<Self> {
        Self::new(self.k2()).ok()
    }
}

/// AGM of `(1, b0)` together with `sum_{n>=0} 2^(n-1) c_n^2`, `c_0^2` given.
fn agm_with_sum(b0: f64, c0_sq: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = b0;
    let mut sum = 0.5 * c0_sq;
    let mut weight = 0.5;
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= 4.0 * (a.next_up() - a) {
            break;
        }
        let c = 0.5 * (a - b);
        weight *= 2.0;
        sum += weight * c * c;
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a_next;
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind, `K(k)`.
pub fn ellip_k(m: Modulus) -> f64 {
    let (agm, _) = agm_with_sum(m.k_prime(), 0.0);
    FRAC_PI_2 / agm
}

/// Complete elliptic integral of the second kind, `E(k)`.
pub fn ellip_e(m: Modulus) -> f64 {
    if m.m1() >= 0.5 {
        let (agm, sum) = agm_with_sum(m.k_prime(), m.k2());
        FRAC_PI_2 / agm * (1.0 - sum)
    } else {
        // Legendre's relation E K' + E' K - K K' = pi/2 with E' = K'(1 - S'),
        // rearranged to E = pi/(2K') + K S'. Both terms are positive, so the
        // cancellation in K(1 - S) near k -> 1 never happens.
        let k = ellip_k(m);
        let (agm_c, sum_c) = agm_with_sum(m.k(), m.m1());
        let k_c = FRAC_PI_2 / agm_c;
        FRAC_PI_2 / k_c + k * sum_c
    }
}

/// Both complete integrals at once.
pub fn ellip_ke(m: Modulus) -> (f64, f64) {
    (ellip_k(m), ellip_e(m))
}

/// Values of the three Jacobi elliptic functions at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `sn`, `cn`, `dn` at `x` by descending Landen transformation.
pub fn jacobi(x: f64, m: Modulus) -> Jacobi {
    jacobi_with_k(x, m, ellip_k(m))
}

/// Same as [`jacobi`] with `K(k)` supplied by the caller.
pub fn jacobi_with_k(x: f64, m: Modulus, quarter_period: f64) -> Jacobi {
    if m.m1() == 1.0 {
        return Jacobi {
            sn: x.sin(),
            cn: x.cos(),
            dn: 1.0,
        };
    }

    // Reduce into [-2K, 2K], then fold onto [-K, K] with sn(2K - x) = sn(x).
    let kk = quarter_period;
    let mut r = x - 4.0 * kk * (x / (4.0 * kk)).round();
    let mut cn_sign = 1.0;
    if r > kk {
        r = 2.0 * kk - r;
        cn_sign = -1.0;
    } else if r < -kk {
        r = -2.0 * kk - r;
        cn_sign = -1.0;
    }

    let mut a = vec![1.0_f64];
    let mut c = vec![m.k()];
    let mut b = m.k_prime();
    while a.len() <= AGM_MAX_ITER {
        let ratio = c[c.len() - 1] / a[a.len() - 1];
        if ratio * ratio < LANDEN_MODULUS_SQ {
            break;
        }
        let (a_last, b_last) = (a[a.len() - 1], b);
        a.push(0.5 * (a_last + b_last));
        c.push(0.5 * (a_last - b_last));
        b = (a_last * b_last).sqrt();
    }

    let levels = a.len() - 1;
    let mut phi = (levels as f64).exp2() * a[levels] * r;
    for i in (1..=levels).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }

    let (sn, cn) = phi.sin_cos();
    // dn² = 1 - k²sn² = m1 + k²cn², free of cancellation near sn = ±1.
    let dn = (m.m1() + m.k2() * cn * cn).sqrt();
    Jacobi {
        sn,
        cn: cn_sign * cn,
        dn,
    }
}

pub fn sn(x: f64, m: Modulus) -> f64 {
    jacobi(x, m).sn
}

pub fn cn(x: f64, m: Modulus) -> f64 {
    jacobi(x, m).cn
}

pub fn dn(x: f64, m: Modulus) -> f64 {
    jacobi(x, m).dn
}
