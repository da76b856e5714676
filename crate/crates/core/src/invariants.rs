//! Curvature invariants `I₁ … I₉` and the β, α and Lazutkin-invariant
//! expansions built from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DEFAULT_RESOLUTION};
use crate::real::Real;

const CONVERGENCE_TOL: f64 = 1e-10;
const MAX_QUADRATURE_N: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I3")]
    pub i3: f64,
    #[serde(rename = "I5")]
    pub i5: f64,
    #[serde(rename = "I7")]
    pub i7: f64,
    #[serde(rename = "I9")]
    pub i9: f64,
    pub quadrature_n: usize,
}

impl InvariantSet {
    pub fn as_array(&self) -> [f64; 5] {
        [self.i1, self.i3, self.i5, self.i7, self.i9]
    }

    fn from_array(v: [f64; 5], quadrature_n: usize) -> Self {
        Self { i1: v[0], i3: v[1], i5: v[2], i7: v[3], i9: v[4], quadrature_n }
    }

    /// Exact values for the circle of radius `r`.
    pub fn circle(r: f64) -> Self {
        Self::from_array(
            [
                2.0 * PI * r,
                2.0 * PI * r.cbrt(),
                18.0 * PI / r.cbrt(),
                18.0 * PI / r,
                281.0 * PI / 22400.0 * r.powf(-5.0 / 3.0),
            ],
            0,
        )
    }
}

/// Odd Taylor coefficients `β(ω) = Σ β_k ω^k / k!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaExpansion<R = f64> {
    pub beta1: R,
    pub beta3: R,
    pub beta5: R,
    pub beta7: R,
    pub beta9: R,
}

impl<R: Real> BetaExpansion<R> {
    pub fn as_array(&self) -> [R; 5] {
        [self.beta1, self.beta3, self.beta5, self.beta7, self.beta9]
    }

    pub fn to_f64(&self) -> BetaExpansion<f64> {
        BetaExpansion {
            beta1: self.beta1.to_f64(),
            beta3: self.beta3.to_f64(),
            beta5: self.beta5.to_f64(),
            beta7: self.beta7.to_f64(),
            beta9: self.beta9.to_f64(),
        }
    }

    /// Divided coefficients `β_k / k!` for `k = 1, 3, …, 9`.
    fn divided(&self) -> [R; 5] {
        let f = |x: f64| R::from_f64(x);
        let b = self.as_array();
        [b[0], b[1] / f(6.0), b[2] / f(120.0), b[3] / f(5040.0), b[4] / f(362880.0)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaExpansion<R = f64> {
    pub alpha0: R,
    pub alpha1: R,
    pub alpha2: R,
    pub alpha3: R,
    /// Perimeter `ℓ₀`; the expansion is in powers of `c + ℓ₀`.
    pub ell0: R,
}

impl<R: Real> AlphaExpansion<R> {
    pub fn as_array(&self) -> [R; 4] {
        [self.alpha0, self.alpha1, self.alpha2, self.alpha3]
    }
}

/// Coefficients of the caustic length in powers of the Lazutkin invariant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausticLengthCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

fn rho_integrands(d: &[f64]) -> [f64; 5] {
    let (r, r1, r2, r3) = (d[0], d[1], d[2], d[3]);
    let c = r.cbrt();
    let p1 = r1 * r1;
    let p2 = r2 * r2;
    let i9 = 281.0 / 44800.0 / (r * c * c)
        + (281.0 / 8400.0 * p1 + 167.0 / 4200.0 * p2 + r3 * r3 / 42.0) / (r.powi(3) * c * c)
        + 473.0 / 4725.0 * r2 * p2 / (r.powi(4) * c * c)
        - (11.0 / 120.0 * p1 * p1 + 473.0 / 945.0 * p1 * p2) / (r.powi(5) * c * c)
        + 781.0 / 1458.0 * p1 * p1 * p1 / (r.powi(7) * c * c);
    [
        r,
        c,
        9.0 / c + 8.0 * p1 / (r * r * c),
        9.0 / r + 24.0 * (p1 + p2) / r.powi(3) - 40.0 * p1 * p1 / r.powi(5),
        i9,
    ]
}

fn curvature_integrands(j: &[f64; 4]) -> [f64; 5] {
    let (k, k1, k2, k3) = (j[0], j[1], j[2], j[3]);
    let c = k.cbrt();
    // k^{m/3} for integer m
    let kp = |m: i32| k.powi(m.div_euclid(3)) * c.powi(m.rem_euclid(3));
    let (q1, q2) = (k1 * k1, k2 * k2);
    let i9 = 281.0 / 44800.0 * kp(8) + 281.0 / 8400.0 * q1 / kp(4) + 167.0 / 4200.0 * q2 / kp(10)
        - 167.0 / 700.0 * q1 * k2 / kp(13)
        + k3 * k3 / (42.0 * kp(16))
        + 559.0 / 2100.0 * q1 * q1 / kp(16)
        - 473.0 / 4725.0 * q2 * k2 / kp(19)
        - 10.0 / 21.0 * k3 * k1 * k2 / kp(19)
        + 5.0 / 7.0 * k3 * q1 * k1 / kp(22)
        + 13142.0 / 4725.0 * q1 * q2 / kp(22)
        - 10777.0 / 1575.0 * q1 * q1 * k2 / kp(25)
        + 521897.0 / 127575.0 * q1 * q1 * q1 / kp(28);
    [
        1.0,
        kp(2),
        9.0 * kp(4) + 8.0 * q1 / kp(8),
        9.0 * k * k + 24.0 * q1 / (k * k) + 24.0 * q2 / k.powi(4) - 144.0 * q1 * k2 / k.powi(5)
            + 176.0 * q1 * q1 / k.powi(6),
        i9,
    ]
}

fn sum_integrands(n: usize, mut f: impl FnMut(usize) -> [f64; 5]) -> [f64; 5] {
    let mut acc = [0.0; 5];
    for j in 0..n {
        for (a, v) in acc.iter_mut().zip(f(j)) {
            *a += v;
        }
    }
    acc
}

/// Invariants in the tangent-angle form at a fixed number of nodes.
pub fn invariants_at(domain: &Domain, n: usize) -> [f64; 5] {
    let h = 2.0 * PI / n as f64;
    sum_integrands(n, |j| rho_integrands(&domain.rho_derivatives(h * j as f64, 3))).map(|v| v * h)
}

/// Invariants in the arc-length form (curvature and its `s`-derivatives).
pub fn invariants_arclength_at(domain: &Domain, n: usize) -> [f64; 5] {
    let h = domain.total_length() / n as f64;
    sum_integrands(n, |j| curvature_integrands(&domain.curvature_jets(h * j as f64))).map(|v| v * h)
}

fn check_positive(v: &[f64; 5]) -> Result<()> {
    const NAMES: [&str; 5] = ["I1", "I3", "I5", "I7", "I9"];
    for (name, &value) in NAMES.iter().zip(v) {
        if !(value > 0.0) {
            return Err(Error::NonPositiveInvariant { name, value });
        }
    }
    Ok(())
}

/// Trapezoid invariants at `n` nodes, accepted once doubling changes every
/// value by less than `1e-10` relative; `n` is doubled until that holds.
pub fn compute_invariants(domain: &Domain, n: usize) -> Result<InvariantSet> {
    let mut n = n.max(16);
    let mut cur = invariants_at(domain, n);
    loop {
        let next = invariants_at(domain, 2 * n);
        let change = cur
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if change < CONVERGENCE_TOL {
            check_positive(&cur)?;
            return Ok(InvariantSet::from_array(cur, n));
        }
        if 2 * n >= MAX_QUADRATURE_N {
            return Err(Error::NonConvergent { what: "curvature invariants", change, n: 2 * n });
        }
        n *= 2;
        cur = next;
    }
}

pub fn compute_invariants_default(domain: &Domain) -> Result<InvariantSet> {
    compute_invariants(domain, DEFAULT_RESOLUTION)
}

pub fn beta_coefficients(inv: &InvariantSet) -> BetaExpansion {
    beta_from_invariants(inv.as_array())
}

/// [`beta_coefficients`] in any scalar type, from `[I1, I3, I5, I7, I9]`.
pub fn beta_from_invariants<R: Real>(i: [R; 5]) -> BetaExpansion<R> {
    let f = |x: f64| R::from_f64(x);
    let [i1, i3, i5, i7, i9] = i;
    BetaExpansion {
        beta1: -i1,
        beta3: i3.powi(3) / f(4.0),
        beta5: -(i3.powi(4) * i5) / f(144.0),
        beta7: i3.powi(5) * (f(14.0) * i5 * i5 - f(81.0) * i3 * i7) / f(25920.0),
        beta9: -(f(7.0)
            * i3.powi(6)
            * (i3 * i3 * i9 - i3 * i5 * i7 / f(5600.0) + f(7.0) * i5.powi(3) / f(583200.0))),
    }
}

pub fn alpha_coefficients(inv: &InvariantSet) -> AlphaExpansion {
    alpha_from_invariants(inv.as_array())
}

/// [`alpha_coefficients`] in any scalar type, from `[I1, I3, I5, I7, I9]`.
pub fn alpha_from_invariants<R: Real>(i: [R; 5]) -> AlphaExpansion<R> {
    let f = |x: f64| R::from_f64(x);
    let [i1, i3, i5, i7, i9] = i;
    let s2 = f(2.0).sqrt();
    let r3 = i3.sqrt();
    AlphaExpansion {
        alpha0: f(4.0) * s2 / (f(3.0) * i3 * r3),
        alpha1: s2 * i5 / (f(135.0) * i3.powi(3) * r3),
        alpha2: (f(72.0) * i3 * i7 + f(7.0) * i5 * i5) / (f(56700.0) * s2 * i3.powi(5) * r3),
        alpha3: (f(261273600.0) * i3 * i3 * i9 + f(21384.0) * i3 * i5 * i7 + f(1001.0) * i5.powi(3))
            / (f(826686000.0) * s2 * i3.powi(7) * r3),
        ell0: i1,
    }
}

pub fn caustic_length_coeffs(inv: &InvariantSet) -> CausticLengthCoeffs {
    let t = 1.5f64;
    CausticLengthCoeffs {
        a: 0.5 * t.powf(2.0 / 3.0) * inv.i3,
        b: t.cbrt() * inv.i5 / 720.0,
        c: inv.i7 / 11200.0,
        d: t.powf(2.0 / 3.0) * inv.i9 / 90.0,
    }
}

/// `Σ β_k ω^k / k!` through `ω⁹`.
pub fn beta_series_eval<R: Real>(b: &BetaExpansion<R>, omega: R) -> R {
    let c = b.divided();
    let w2 = omega * omega;
    omega * (c[0] + w2 * (c[1] + w2 * (c[2] + w2 * (c[3] + w2 * c[4]))))
}

/// Derivative of [`beta_series_eval`] in `ω`.
pub fn beta_series_derivative<R: Real>(b: &BetaExpansion<R>, omega: R) -> R {
    let c = b.divided();
    let f = |x: f64| R::from_f64(x);
    let w2 = omega * omega;
    c[0] + w2 * (f(3.0) * c[1] + w2 * (f(5.0) * c[2] + w2 * (f(7.0) * c[3] + w2 * f(9.0) * c[4])))
}

/// `(c + ℓ₀)^{3/2} (α₀ + α₁u + α₂u² + α₃u³)` with `u = c + ℓ₀`; NaN below `-ℓ₀`.
pub fn alpha_series_eval<R: Real>(a: &AlphaExpansion<R>, c: R) -> R {
    let u = c + a.ell0;
    if u < R::zero() {
        return R::from_f64(f64::NAN);
    }
    u * u.sqrt() * (a.alpha0 + u * (a.alpha1 + u * (a.alpha2 + u * a.alpha3)))
}

/// `L(ω) = ωβ'(ω) − β(ω)` through `ω⁹`.
pub fn lazutkin_of_rotation(inv: &InvariantSet, omega: f64) -> f64 {
    let (i3, i5, i7, i9) = (inv.i3, inv.i5, inv.i7, inv.i9);
    let w2 = omega * omega;
    let w3 = w2 * omega;
    w3 * (i3.powi(3) / 12.0 - i3.powi(4) * i5 / 4320.0 * w2
        + i3.powi(5) * (14.0 * i5 * i5 - 81.0 * i3 * i7) / 21772800.0 * w2 * w2
        - i3.powi(6) * (4082400.0 * i3 * i3 * i9 - 729.0 * i3 * i5 * i7 + 49.0 * i5.powi(3))
            / 26453952000.0
            * w2
            * w2
            * w2)
}

/// Inverse series `ω(L)` through `L^{7/3}`.
pub fn rotation_of_lazutkin(inv: &InvariantSet, l: f64) -> f64 {
    let (i3, i5, i7, i9) = (inv.i3, inv.i5, inv.i7, inv.i9);
    let t1 = 1.5f64.cbrt();
    let t2 = t1 * t1;
    let l1 = l.cbrt();
    t1 * 2.0 / i3 * l1
        + i5 / (90.0 * i3 * i3) * l
        + t2 * (243.0 * i3 * i7 + 14.0 * i5 * i5) / (340200.0 * i3.powi(3)) * l * l1 * l1
        + t1 * (5443200.0 * i3 * i3 * i9 + 243.0 * i3 * i5 * i7 + 7.0 * i5.powi(3))
            / (30618000.0 * i3.powi(4))
            * l
            * l
            * l1
}

/// `I₃³ − 4π² I₁`, non-positive with equality exactly for discs.
pub fn isoperimetric_defect(inv: &InvariantSet) -> f64 {
    inv.i3.powi(3) - 4.0 * PI * PI * inv.i1
}
