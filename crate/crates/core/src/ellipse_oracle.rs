//! Closed-form ground truth for elliptic and circular tables: elliptic
//! integrals, invariants, β coefficients, confocal caustics and the
//! (β₁, β₃) → (a, h) recovery.
//!
//! Elliptic integrals use the modulus convention,
//! `K(k) = ∫_0^{π/2} dθ / sqrt(1 - k² sin² θ)`.

use crate::error::{Error, Result};
use crate::invariants::BetaExpansion;
use crate::real::Real;

const AGM_MAX_ITER: usize = 64;

fn check_modulus(function: &'static str, k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k.abs()) || k.is_nan() {
        return Err(Error::DomainError { function, value: k });
    }
    Ok(())
}

/// AGM sequence for modulus `k`: returns `(a_N, sum_n 2^{n-1} c_n^2)`.
fn agm<R: Real>(k: R) -> (R, R) {
    let two = R::from_f64(2.0);
    let mut a = R::one();
    let mut b = (R::one() - k * k).sqrt();
    let mut sum = k * k / two;
    let mut pow = R::one() / two;
    for _ in 0..AGM_MAX_ITER {
        let c = (a - b) / two;
        let a_next = (a + b) / two;
        let b_next = (a * b).sqrt();
        pow *= two;
        sum += pow * c * c;
        a = a_next;
        b = b_next;
        if c.abs() <= R::epsilon() * a {
            break;
        }
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind.
pub fn complete_k<R: Real>(k: R) -> Result<R> {
    check_modulus("K", k.to_f64())?;
    let (a, _) = agm(k);
    Ok(R::pi() / (R::from_f64(2.0) * a))
}

/// Complete elliptic integral of the second kind.
pub fn complete_e<R: Real>(k: R) -> Result<R> {
    check_modulus("E", k.to_f64())?;
    let (a, sum) = agm(k);
    let kk = R::pi() / (R::from_f64(2.0) * a);
    Ok(kk * (R::one() - sum))
}

/// Incomplete elliptic integral of the first kind `F(z, k)` for any real
/// amplitude, by the descending Landen (AGM) transformation.
pub fn incomplete_f<R: Real>(z: R, k: R) -> Result<R> {
    check_modulus("F", k.to_f64())?;
    let two = R::from_f64(2.0);
    let two_pi = R::pi() * two;
    let mut a = R::one();
    let mut b = (R::one() - k * k).sqrt();
    let mut phi = z;
    let mut scale = R::one();
    for _ in 0..AGM_MAX_ITER {
        let (s, c) = phi.sin_cos();
        let mut theta = (b * s).atan2(a * c);
        // keep theta on the branch continuous with phi
        let turns = ((phi - theta) / two_pi).to_f64().round();
        theta += two_pi * R::from_f64(turns);
        phi += theta;
        scale *= two;
        let c_n = (a - b) / two;
        let a_next = (a + b) / two;
        b = (a * b).sqrt();
        a = a_next;
        if c_n.abs() <= R::epsilon() * a {
            break;
        }
    }
    Ok(phi / (scale * a))
}

/// `f(x) = (1 - x²) K(x)³ / E(x)`, strictly decreasing on [0, 1).
pub fn uniqueness_functional<R: Real>(x: R) -> Result<R> {
    let k = complete_k(x)?;
    let e = complete_e(x)?;
    Ok((R::one() - x * x) * k * k * k / e)
}

/// Ellipse with major semiaxis `a` and eccentricity `h`.
///
/// Internally the boundary is oriented so that tangent angle 0 sits at a
/// major-axis vertex; see [`EllipseParams::to_domain_frame`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseParams {
    pub a: f64,
    pub h: f64,
}

impl EllipseParams {
    pub fn new(a: f64, h: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidSpec(format!("major semiaxis must be positive, got {a}")));
        }
        if !(0.0..1.0).contains(&h) {
            return Err(Error::InvalidSpec(format!("eccentricity must lie in [0, 1), got {h}")));
        }
        Ok(Self { a, h })
    }

    pub fn b(&self) -> f64 {
        self.a * (1.0 - self.h * self.h).sqrt()
    }

    /// `μ₀` with `cosh μ₀ = 1/h`; `None` for the circle.
    pub fn mu0(&self) -> Option<f64> {
        (self.h > 0.0).then(|| (1.0 / self.h).acosh())
    }

    pub fn foci(&self) -> [(f64, f64); 2] {
        [(self.a * self.h, 0.0), (-self.a * self.h, 0.0)]
    }

    /// Semi-axes `(A, B)` of the confocal ellipse `E_μ`.
    pub fn confocal_axes(&self, mu: f64) -> (f64, f64) {
        let c = self.a * self.h;
        (c * mu.cosh(), c * mu.sinh())
    }

    /// Map standard coordinates (major axis along X, centre at origin) into
    /// the normalised domain frame, where the vertex `(a, 0)` sits at the
    /// origin with positive tangent `(1, 0)`.
    pub fn to_domain_frame(&self, x: f64, y: f64) -> (f64, f64) {
        (y, self.a - x)
    }

    fn check_mu(&self, mu: f64) -> Result<f64> {
        let mu0 = self
            .mu0()
            .ok_or(Error::DomainError { function: "confocal caustic (circle has none)", value: mu })?;
        if !(mu > 0.0 && mu < mu0) {
            return Err(Error::DomainError { function: "confocal caustic", value: mu });
        }
        Ok(mu0)
    }

    /// Reflection angle at the vertex `(a, 0)` of the counter-clockwise orbit
    /// tangent to `E_μ`.
    pub fn tangent_launch_angle(&self, mu: f64) -> Result<f64> {
        self.check_mu(mu)?;
        let (ca, cb) = self.confocal_axes(mu);
        let slope = (cb * cb / (self.a * self.a - ca * ca)).sqrt();
        // direction (-1, slope) in the standard frame, (slope, 1) in the domain frame
        Ok(1.0f64.atan2(slope))
    }
}

/// `(I₁, I₃, I₅)` from the elliptic-integral closed forms, scaled to `a`.
pub fn ellipse_invariants(params: &EllipseParams) -> Result<(f64, f64, f64)> {
    let h = params.h;
    let k = complete_k(h)?;
    let e = complete_e(h)?;
    let w = 1.0 - h * h;
    let a = params.a;
    let i1 = 4.0 * e * a;
    let i3 = 4.0 * w.cbrt() * k * a.cbrt();
    let i5 = 36.0 / w.cbrt() * (-15.0 * e + 8.0 * (2.0 - h * h) * k) / a.cbrt();
    Ok((i1, i3, i5))
}

/// Closed-form β coefficients (as `β_k`, i.e. multiplied back by `k!`).
pub fn ellipse_beta_series<R: Real>(a: R, h: R) -> Result<BetaExpansion<R>> {
    let k = complete_k(h)?;
    let e = complete_e(h)?;
    let f = R::from_f64;
    let h2 = h * h;
    let h4 = h2 * h2;
    let w = R::one() - h2;
    let k2 = k * k;
    let k3 = k2 * k;
    let c1 = -f(4.0) * e;
    let c3 = f(8.0) / f(3.0) * w * k3;
    let c5 = f(8.0) / f(15.0) * w * k2 * k2 * (f(15.0) * e - f(8.0) * (f(2.0) - h2) * k);
    let c7 = f(16.0) / f(315.0)
        * w
        * k2
        * k3
        * (f(630.0) * e * e - f(630.0) * (f(2.0) - h2) * k * e
            + (f(136.0) * h4 - f(631.0) * h2 + f(631.0)) * k2);
    let bracket = f(75600.0) * (h2 - f(2.0)) * k * e * e
        + f(4.0) * (h2 - f(2.0)) * (f(992.0) * h4 - f(5741.0) * h2 + f(5741.0)) * k3
        + f(1323.0) * (f(24.0) * h4 - f(109.0) * h2 + f(109.0)) * k2 * e
        + f(52920.0) * e * e * e;
    let c9 = -(f(8.0) * (h2 - R::one()) * k3 * k3 * bracket / f(2835.0));
    let fact = |n: u32| (1..=n).fold(R::one(), |acc, j| acc * f(j as f64));
    Ok(BetaExpansion {
        beta1: c1 * a,
        beta3: c3 * fact(3) * a,
        beta5: c5 * fact(5) * a,
        beta7: c7 * fact(7) * a,
        beta9: c9 * fact(9) * a,
    })
}

/// Perimeter of the confocal ellipse `E_μ`: `4 a h cosh μ E(1/cosh μ)`.
pub fn caustic_length(params: &EllipseParams, mu: f64) -> Result<f64> {
    params.check_mu(mu)?;
    let (ca, _) = params.confocal_axes(mu);
    Ok(4.0 * ca * complete_e(1.0 / mu.cosh())?)
}

/// Rotation number (fraction of the perimeter per bounce) of orbits tangent
/// to `E_μ`.
///
/// The amplitude is written as `2 atan(sqrt(cosh²μ₀ - I) / (sqrt(I) tanh μ₀))`,
/// which has the same sine as the printed arcsin form but selects the branch
/// beyond π/2 for caustics far from the boundary.
pub fn rotation_of_caustic(params: &EllipseParams, mu: f64) -> Result<f64> {
    let mu0 = params.check_mu(mu)?;
    let i = mu.cosh().powi(2);
    let c0 = mu0.cosh().powi(2);
    let modulus = 1.0 / i.sqrt();
    let amplitude = 2.0 * ((c0 - i).sqrt() / (i.sqrt() * mu0.tanh())).atan();
    Ok(incomplete_f(amplitude, modulus)? / (4.0 * complete_k(modulus)?))
}

/// Invert [`rotation_of_caustic`] by bisection (ω is decreasing in μ).
pub fn caustic_of_rotation(params: &EllipseParams, omega: f64) -> Result<f64> {
    let mu0 = params.mu0().ok_or(Error::DomainError { function: "caustic_of_rotation", value: omega })?;
    if !(omega > 0.0 && omega < 0.5) {
        return Err(Error::DomainError { function: "caustic_of_rotation", value: omega });
    }
    let (mut lo, mut hi) = (mu0 * 1e-9, mu0 * (1.0 - 1e-15));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rotation_of_caustic(params, mid)? > omega {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * mu0 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Recover `(a, h)` from `(β₁, β₃)` using `β₃ / (-4 β₁) = f(h)` and
/// `β₁ = -4 a E(h)`.
pub fn recover_ellipse(beta1: f64, beta3: f64) -> Result<EllipseParams> {
    if !(beta1 < 0.0 && beta3 > 0.0) {
        return Err(Error::DomainError { function: "recover_ellipse", value: beta1 });
    }
    let target = beta3 / (-4.0 * beta1);
    let f0 = uniqueness_functional(0.0)?;
    if target > f0 * (1.0 + 1e-12) {
        return Err(Error::DomainError { function: "recover_ellipse", value: target });
    }
    if target >= f0 {
        return EllipseParams::new(-beta1 / (4.0 * complete_e(0.0)?), 0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if uniqueness_functional(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let h = 0.5 * (lo + hi);
    EllipseParams::new(-beta1 / (4.0 * complete_e(h)?), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gauss;
    use crate::real::DoubleDouble;
    use std::f64::consts::PI;

    fn k_by_quadrature(k: f64) -> f64 {
        adaptive_gauss(0.0, PI / 2.0, 1e-15, &mut |t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt())
            .unwrap()
    }

    fn e_by_quadrature(k: f64) -> f64 {
        adaptive_gauss(0.0, PI / 2.0, 1e-15, &mut |t| (1.0 - k * k * t.sin().powi(2)).sqrt()).unwrap()
    }

    #[test]
    fn circle_values() {
        assert_eq!(complete_k(0.0).unwrap(), PI / 2.0);
        assert_eq!(complete_e(0.0).unwrap(), PI / 2.0);
        assert!((uniqueness_functional(0.0).unwrap() - PI * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn agm_matches_quadrature() {
        for k in [0.1, 0.5, 0.8, 0.95] {
            assert!((complete_k(k).unwrap() - k_by_quadrature(k)).abs() < 1e-12, "K({k})");
            assert!((complete_e(k).unwrap() - e_by_quadrature(k)).abs() < 1e-12, "E({k})");
        }
    }

    #[test]
    fn incomplete_f_matches_quadrature_and_k() {
        for k in [0.3, 0.5, 0.9] {
            assert!((incomplete_f(PI / 2.0, k).unwrap() - complete_k(k).unwrap()).abs() < 1e-13);
            for z in [0.2, 1.0, 1.5, 2.5, 4.0] {
                let q = adaptive_gauss(0.0, z, 1e-15, &mut |t| {
                    1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt()
                })
                .unwrap();
                assert!((incomplete_f(z, k).unwrap() - q).abs() < 1e-12, "F({z},{k})");
            }
        }
    }

    #[test]
    fn double_double_agm_agrees_with_f64() {
        let k = DoubleDouble::from_f64(0.5);
        let kk = complete_k(k).unwrap();
        let ee = complete_e(k).unwrap();
        assert!((kk.to_f64() - complete_k(0.5).unwrap()).abs() < 1e-15);
        assert!((ee.to_f64() - complete_e(0.5).unwrap()).abs() < 1e-15);
        // Legendre relation at k = k' = 1/sqrt 2: 2EK - K^2 = pi/2
        let k = DoubleDouble::from_f64(0.5).sqrt();
        let kk = complete_k(k).unwrap();
        let ee = complete_e(k).unwrap();
        let lhs = DoubleDouble::from_f64(2.0) * ee * kk - kk * kk;
        assert!((lhs - DoubleDouble::pi() / DoubleDouble::from_f64(2.0)).abs().to_f64() < 1e-30);
    }

    #[test]
    fn domain_errors() {
        assert!(complete_k(1.0).is_err());
        assert!(complete_e(1.5).is_err());
        assert!(EllipseParams::new(1.0, 1.0).is_err());
        assert!(EllipseParams::new(-1.0, 0.2).is_err());
        let p = EllipseParams::new(1.0, 0.5).unwrap();
        assert!(caustic_length(&p, 2.0).is_err());
        assert!(rotation_of_caustic(&p, 0.0).is_err());
    }

    #[test]
    fn closed_form_invariants_circle_limit() {
        let (i1, i3, i5) = ellipse_invariants(&EllipseParams::new(1.0, 0.0).unwrap()).unwrap();
        assert!((i1 - 2.0 * PI).abs() < 1e-14);
        assert!((i3 - 2.0 * PI).abs() < 1e-14);
        assert!((i5 - 18.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn invariants_scale_with_semiaxis() {
        let (i1, i3, i5) = ellipse_invariants(&EllipseParams::new(1.0, 0.5).unwrap()).unwrap();
        let (j1, j3, j5) = ellipse_invariants(&EllipseParams::new(2.0, 0.5).unwrap()).unwrap();
        assert!((j1 / i1 - 2.0).abs() < 1e-14);
        assert!((j3 / i3 - 2f64.cbrt()).abs() < 1e-14);
        assert!((j5 / i5 - 1.0 / 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn beta_series_circle_limit_and_rescaling() {
        let b = ellipse_beta_series(1.0, 0.0).unwrap();
        let expected = [-2.0 * PI, 2.0 * PI.powi(3), -2.0 * PI.powi(5), 2.0 * PI.powi(7), -2.0 * PI.powi(9)];
        for (got, want) in b.as_array().iter().zip(expected) {
            assert!((got - want).abs() < 1e-10 * want.abs(), "{got} vs {want}");
        }
        let b1 = ellipse_beta_series(1.0, 0.4).unwrap();
        let b2 = ellipse_beta_series(1.7, 0.4).unwrap();
        for (x, y) in b1.as_array().iter().zip(b2.as_array()) {
            assert!((y - 1.7 * x).abs() < 1e-12 * y.abs());
        }
    }

    #[test]
    fn beta_series_printed_fifth_order_term() {
        let h: f64 = 0.5;
        let b = ellipse_beta_series(1.0, h).unwrap();
        let (k, e) = (complete_k(h).unwrap(), complete_e(h).unwrap());
        let c5 = 8.0 / 15.0 * (1.0 - h * h) * k.powi(4) * (15.0 * e - 8.0 * (2.0 - h * h) * k);
        assert!((b.beta5 / 120.0 - c5).abs() < 1e-13 * c5.abs());
        let beta3 = 16.0 * (1.0 - h * h) * k.powi(3);
        assert!((b.beta3 - beta3).abs() < 1e-13 * beta3);
    }

    #[test]
    fn caustics_accumulate_on_boundary() {
        let p = EllipseParams::new(1.0, 0.5).unwrap();
        let mu0 = p.mu0().unwrap();
        let near = mu0 * (1.0 - 1e-9);
        let ell0 = 4.0 * complete_e(0.5).unwrap();
        assert!((caustic_length(&p, near).unwrap() - ell0).abs() < 1e-6);
        assert!(rotation_of_caustic(&p, near).unwrap() < 1e-3);
        // monotone decreasing in mu, values in (0, 1/2)
        let mut last = 0.5;
        for j in 1..20 {
            let w = rotation_of_caustic(&p, mu0 * j as f64 / 20.0).unwrap();
            assert!(w > 0.0 && w < last, "{j}: {w}");
            last = w;
        }
    }

    #[test]
    fn caustic_of_rotation_inverts() {
        let p = EllipseParams::new(1.0, 0.5).unwrap();
        for omega in [0.02, 0.05, 0.2, 0.35] {
            let mu = caustic_of_rotation(&p, omega).unwrap();
            assert!((rotation_of_caustic(&p, mu).unwrap() - omega).abs() < 1e-12);
        }
    }

    #[test]
    fn uniqueness_functional_is_decreasing() {
        let mut last = f64::INFINITY;
        for j in 0..10 {
            let v = uniqueness_functional(j as f64 / 10.0).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn recovers_hidden_ellipses() {
        for (a, h) in [(1.3, 0.4), (0.5, 0.0), (2.0, 0.8), (1.0, 0.1)] {
            let b = ellipse_beta_series(a, h).unwrap();
            let got = recover_ellipse(b.beta1, b.beta3).unwrap();
            assert!((got.a - a).abs() < 1e-8 && (got.h - h).abs() < 1e-8, "{a},{h} -> {got:?}");
        }
    }
}
