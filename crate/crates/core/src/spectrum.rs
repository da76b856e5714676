//! Maximal marked length spectrum: for a rotation number `p/q` the longest
//! closed inscribed polygon winding `p` times with `q` vertices.
//!
//! The total length is maximized over lifted curve parameters
//! `t_0 < t_1 < … < t_{q-1} < t_0 + 2πp` by damped Newton iteration. The
//! Hessian of the length is cyclic tridiagonal; it is assembled densely and
//! factored by Cholesky after shifting `-H` to be positive definite.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ellipse_oracle::ellipse_beta_series;
use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainSpec};
use crate::invariants::{beta_coefficients, beta_series_eval, compute_invariants};
use crate::real::{DoubleDouble, Real};

/// Position and first two parameter derivatives of a closed curve.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint<R> {
    pub pos: [R; 2],
    pub d1: [R; 2],
    pub d2: [R; 2],
}

/// A closed curve with period `2π` in its parameter.
pub trait ClosedCurve<R: Real>: Sync {
    fn point(&self, t: R) -> CurvePoint<R>;
    /// Perimeter, used to scale tolerances.
    fn perimeter(&self) -> R;
}

/// A [`Domain`] parametrized by tangent angle.
pub struct DomainCurve<'a>(pub &'a Domain);

impl ClosedCurve<f64> for DomainCurve<'_> {
    fn point(&self, t: f64) -> CurvePoint<f64> {
        let d = self.0.rho_derivatives(t, 1);
        let (s, c) = t.sin_cos();
        let (x, y) = self.0.point_at(t);
        CurvePoint {
            pos: [x, y],
            d1: [d[0] * c, d[0] * s],
            d2: [d[1] * c - d[0] * s, d[1] * s + d[0] * c],
        }
    }

    fn perimeter(&self) -> f64 {
        self.0.total_length()
    }
}

/// `(a cos t, b sin t)`, generic over the scalar type.
pub struct EllipseCurve<R> {
    pub a: R,
    pub b: R,
    pub perimeter: R,
}

impl<R: Real> ClosedCurve<R> for EllipseCurve<R> {
    fn point(&self, t: R) -> CurvePoint<R> {
        let (s, c) = t.sin_cos();
        CurvePoint {
            pos: [self.a * c, self.b * s],
            d1: [-(self.a * s), self.b * c],
            d2: [-(self.a * c), -(self.b * s)],
        }
    }

    fn perimeter(&self) -> R {
        self.perimeter
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Stationarity tolerance relative to the perimeter.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Randomly perturbed restarts on top of the two equally spaced starts.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iter: 200, restarts: 2, seed: 0 }
    }
}

/// Optimizer output in the curve's own parameter and scalar type.
#[derive(Clone, Debug)]
pub struct RawOrbit<R> {
    pub params: Vec<R>,
    pub length: R,
    pub residual: R,
    pub iterations: usize,
    pub history: Vec<R>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub p: u32,
    pub q: u32,
    /// Lifted arc-length coordinates `x_0 < … < x_{q-1}`; `x_q = x_0 + p ℓ₀`.
    pub lifted_points: Vec<f64>,
    /// Lifted tangent angles of the vertices.
    pub tangent_angles: Vec<f64>,
    pub total_length: f64,
    pub residual: f64,
    pub iterations: usize,
    pub objective_history: Vec<f64>,
}

impl PeriodicOrbit {
    pub fn beta(&self) -> f64 {
        -self.total_length / self.q as f64
    }

    /// Incoming and outgoing angles from the tangent at each vertex.
    pub fn reflection_angles(&self, domain: &Domain) -> Vec<(f64, f64)> {
        let q = self.tangent_angles.len();
        let shift = TAU * self.p as f64;
        let at = |i: usize| {
            if i < q {
                self.tangent_angles[i]
            } else {
                self.tangent_angles[i - q] + shift
            }
        };
        let unit = |a: f64, b: f64| {
            let (pa, pb) = (domain.point_at(a), domain.point_at(b));
            let (dx, dy) = (pb.0 - pa.0, pb.1 - pa.1);
            let l = dx.hypot(dy);
            (dx / l, dy / l)
        };
        (0..q)
            .map(|i| {
                let t = self.tangent_angles[i];
                let prev = if i == 0 { at(q - 1) - shift } else { at(i - 1) };
                let tan = domain.tangent_at(t);
                let u_in = unit(prev, t);
                let u_out = unit(t, at(i + 1));
                let angle = |u: (f64, f64)| (tan.0 * u.1 - tan.1 * u.0).atan2(tan.0 * u.0 + tan.1 * u.1);
                // incoming angle measured between the arriving ray and the tangent
                (-angle(u_in), angle(u_out))
            })
            .collect()
    }
}

pub fn check_rotation(p: u32, q: u32) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidRotation { p, q, reason: "q must be at least 2" });
    }
    if p == 0 || 2 * p > q {
        return Err(Error::InvalidRotation { p, q, reason: "need 0 < p/q <= 1/2" });
    }
    if gcd(p, q) != 1 {
        return Err(Error::InvalidRotation { p, q, reason: "p and q must be coprime" });
    }
    Ok(())
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

struct Eval<R> {
    length: R,
    grad: Vec<R>,
    hess: Vec<Vec<R>>,
    residual: R,
}

fn dot<R: Real>(a: [R; 2], b: [R; 2]) -> R {
    a[0] * b[0] + a[1] * b[1]
}

fn closing_shift<R: Real>(p: u32) -> R {
    R::pi() * R::from_f64(2.0 * p as f64)
}

fn param_at<R: Real>(t: &[R], i: usize, shift: R) -> R {
    if i < t.len() {
        t[i]
    } else {
        t[i - t.len()] + shift
    }
}

fn total_length<R: Real, C: ClosedCurve<R> + ?Sized>(curve: &C, t: &[R], p: u32) -> R {
    let q = t.len();
    let shift = closing_shift::<R>(p);
    let pts: Vec<[R; 2]> = (0..=q).map(|i| curve.point(param_at(t, i, shift)).pos).collect();
    (0..q)
        .map(|i| {
            let dx = pts[i + 1][0] - pts[i][0];
            let dy = pts[i + 1][1] - pts[i][1];
            (dx * dx + dy * dy).sqrt()
        })
        .sum()
}

fn evaluate<R: Real, C: ClosedCurve<R> + ?Sized>(curve: &C, t: &[R], p: u32) -> Eval<R> {
    let q = t.len();
    let shift = closing_shift::<R>(p);
    let cps: Vec<CurvePoint<R>> = (0..=q).map(|i| curve.point(param_at(t, i, shift))).collect();
    let mut grad = vec![R::zero(); q];
    let mut hess = vec![vec![R::zero(); q]; q];
    let mut length = R::zero();
    for i in 0..q {
        let (a, b) = (&cps[i], &cps[i + 1]);
        let d = [b.pos[0] - a.pos[0], b.pos[1] - a.pos[1]];
        let l = dot(d, d).sqrt();
        let u = [d[0] / l, d[1] / l];
        let (ua, ub) = (dot(u, a.d1), dot(u, b.d1));
        let l00 = -dot(u, a.d2) + (dot(a.d1, a.d1) - ua * ua) / l;
        let l01 = -(dot(a.d1, b.d1) - ua * ub) / l;
        let l11 = dot(u, b.d2) + (dot(b.d1, b.d1) - ub * ub) / l;
        let k = (i + 1) % q;
        length += l;
        grad[i] -= ua;
        grad[k] += ub;
        hess[i][i] += l00;
        hess[k][k] += l11;
        hess[i][k] += l01;
        hess[k][i] += l01;
    }
    let residual = (0..q)
        .map(|i| grad[i].abs() / dot(cps[i].d1, cps[i].d1).sqrt())
        .fold(R::zero(), |m, v| m.max(v));
    Eval { length, grad, hess, residual }
}

fn is_monotone<R: Real>(t: &[R], p: u32) -> bool {
    let q = t.len();
    let shift = closing_shift::<R>(p);
    (0..q).all(|i| param_at(t, i + 1, shift) > t[i])
}

/// Solve `(A + μI) x = b` for symmetric `A` by Cholesky; `None` if not positive definite.
fn cholesky_solve<R: Real>(a: &[Vec<R>], mu: R, b: &[R]) -> Option<Vec<R>> {
    let n = b.len();
    let mut l = vec![vec![R::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            if i == j {
                s += mu;
            }
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > R::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// Ascent direction from the shifted Newton system `(-H + μI) d = g`.
fn newton_direction<R: Real>(ev: &Eval<R>) -> Vec<R> {
    let q = ev.grad.len();
    let neg: Vec<Vec<R>> = ev.hess.iter().map(|row| row.iter().map(|&v| -v).collect()).collect();
    let scale = (0..q).map(|i| ev.hess[i][i].abs()).fold(R::zero(), |m, v| m.max(v));
    let mut mu = R::epsilon().sqrt() * scale;
    for _ in 0..60 {
        if let Some(d) = cholesky_solve(&neg, mu, &ev.grad) {
            return d;
        }
        mu = if mu > R::zero() { mu * R::from_f64(4.0) } else { R::epsilon() };
    }
    let s = R::one() / scale.max(R::epsilon());
    ev.grad.iter().map(|&g| g * s).collect()
}

/// Local maximizer of the polygon length from one starting configuration.
pub fn maximize_from<R: Real, C: ClosedCurve<R> + ?Sized>(
    curve: &C,
    p: u32,
    start: Vec<R>,
    tol: R,
    max_iter: usize,
) -> RawOrbit<R> {
    let mut t = start;
    let mut ev = evaluate(curve, &t, p);
    let mut history = vec![ev.length];
    let slack = R::epsilon() * R::from_f64(16.0);
    let mut iterations = 0;
    while iterations < max_iter && !(ev.residual <= tol) {
        iterations += 1;
        let newton = newton_direction(&ev);
        let gscale = R::one()
            / (0..t.len()).map(|i| ev.hess[i][i].abs()).fold(R::epsilon(), |m, v| m.max(v));
        let ascent: Vec<R> = ev.grad.iter().map(|&g| g * gscale).collect();
        let mut accepted = None;
        'dirs: for dir in [&newton, &ascent] {
            let mut step = R::one();
            for _ in 0..40 {
                let cand: Vec<R> = t.iter().zip(dir.iter()).map(|(&x, &d)| x + step * d).collect();
                if is_monotone(&cand, p) {
                    let len = total_length(curve, &cand, p);
                    if len >= ev.length - slack * ev.length.abs() {
                        accepted = Some(cand);
                        break 'dirs;
                    }
                }
                step *= R::from_f64(0.5);
            }
        }
        let Some(cand) = accepted else { break };
        let next = evaluate(curve, &cand, p);
        if next.length < ev.length && !(next.residual < ev.residual) {
            break;
        }
        t = cand;
        ev = next;
        history.push(ev.length);
    }
    RawOrbit { params: t, length: ev.length, residual: ev.residual, iterations, history }
}

/// Best of the equally spaced starts `t_i = t_0 + 2πpi/q` (`t_0` at 0 and a
/// half-spacing offset) plus seeded random perturbations of them.
pub fn maximize_multistart<R: Real, C: ClosedCurve<R> + ?Sized>(
    curve: &C,
    p: u32,
    q: u32,
    equal_start: impl Fn(R) -> Vec<R>,
    opts: &SpectrumOptions,
) -> Result<RawOrbit<R>> {
    check_rotation(p, q)?;
    let tol = curve.perimeter() * R::from_f64(opts.rel_tol);
    let spacing = TAU * p as f64 / q as f64;
    let mut starts = vec![equal_start(R::zero()), equal_start(R::from_f64(0.5 * spacing / p as f64))];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((p as u64) << 32 | q as u64));
    for r in 0..opts.restarts {
        let base = &starts[r % 2];
        let perturbed: Vec<R> = base
            .iter()
            .map(|&x| x + R::from_f64(rng.gen_range(-0.2..0.2) * spacing / p as f64))
            .collect();
        starts.push(perturbed);
    }
    let mut best: Option<RawOrbit<R>> = None;
    let mut fallback: Option<RawOrbit<R>> = None;
    for start in starts.into_iter().filter(|s| is_monotone(s, p)) {
        let orbit = maximize_from(curve, p, start, tol, opts.max_iter);
        if orbit.residual <= tol {
            if best.as_ref().map_or(true, |b| orbit.length > b.length) {
                best = Some(orbit);
            }
        } else if fallback.as_ref().map_or(true, |b| orbit.residual < b.residual) {
            fallback = Some(orbit);
        }
    }
    best.ok_or_else(|| {
        let f = fallback.expect("at least one start");
        Error::NoConvergence { p, q, residual: f.residual.to_f64(), iterations: f.iterations }
    })
}

/// Maximal-length periodic orbit with rotation number `p/q` on `domain`.
pub fn max_periodic_orbit(
    domain: &Domain,
    p: u32,
    q: u32,
    opts: &SpectrumOptions,
) -> Result<PeriodicOrbit> {
    check_rotation(p, q)?;
    let l0 = domain.total_length();
    let curve = DomainCurve(domain);
    let equal = |offset: f64| {
        (0..q)
            .map(|i| domain.phi_of_s(offset * l0 / TAU + i as f64 * p as f64 * l0 / q as f64))
            .collect::<Vec<f64>>()
    };
    let raw = maximize_multistart(&curve, p, q, equal, opts)?;
    Ok(PeriodicOrbit {
        p,
        q,
        lifted_points: raw.params.iter().map(|&t| domain.s_of_phi(t)).collect(),
        tangent_angles: raw.params.clone(),
        total_length: raw.length,
        residual: raw.residual,
        iterations: raw.iterations,
        objective_history: raw.history,
    })
}

pub fn marked_length(domain: &Domain, p: u32, q: u32) -> Result<f64> {
    Ok(max_periodic_orbit(domain, p, q, &SpectrumOptions::default())?.total_length)
}

/// `β(p/q) = -ML(p/q) / q`.
pub fn beta_at_rational(domain: &Domain, p: u32, q: u32) -> Result<f64> {
    Ok(-marked_length(domain, p, q)? / q as f64)
}

/// Maximal `p/q` length on the ellipse `(a cos t, b sin t)` in double-double.
pub fn max_length_ellipse_dd(
    a: DoubleDouble,
    h: DoubleDouble,
    p: u32,
    q: u32,
    opts: &SpectrumOptions,
) -> Result<RawOrbit<DoubleDouble>> {
    let b = a * (DoubleDouble::one() - h * h).sqrt();
    let perimeter = a * DoubleDouble::from_f64(4.0) * crate::ellipse_oracle::complete_e(h)?;
    let curve = EllipseCurve { a, b, perimeter };
    let two_pi = DoubleDouble::pi() * DoubleDouble::from_f64(2.0);
    let equal = |offset: DoubleDouble| {
        (0..q)
            .map(|i| offset + two_pi * DoubleDouble::from_f64((i as u64 * p as u64) as f64) / DoubleDouble::from_f64(q as f64))
            .collect::<Vec<_>>()
    };
    maximize_multistart(&curve, p, q, equal, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub p: u32,
    pub q: u32,
    pub omega: f64,
    pub beta_numeric: f64,
    pub beta_series: f64,
    /// `β_numeric − β_series`, evaluated in the working precision.
    pub residual: f64,
    pub stationarity: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub rows: Vec<SpectrumRow>,
    /// Least-squares slope of `ln|residual|` against `ln ω` (integrable domains only).
    pub fitted_exponent: Option<f64>,
    pub precision: String,
}

/// Least-squares slope of `ln|y|` against `ln x`, skipping zero entries.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// β at each rational by direct maximization against the ninth-order series.
///
/// Circles and ellipses run in double-double against the closed-form series;
/// other domains run in `f64` against the invariant-based series.
pub fn compare_spectrum_vs_series(
    domain: &Domain,
    rationals: &[(u32, u32)],
    opts: &SpectrumOptions,
) -> Result<SpectrumComparison> {
    for &(p, q) in rationals {
        check_rotation(p, q)?;
    }
    let integrable = match *domain.spec() {
        DomainSpec::Circle { radius } => Some((radius, 0.0)),
        DomainSpec::Ellipse { a, h } => Some((a, h)),
        DomainSpec::Fourier { .. } => None,
    };
    let rows: Vec<SpectrumRow> = if let Some((a, h)) = integrable {
        let (a, h) = (DoubleDouble::from_f64(a), DoubleDouble::from_f64(h));
        let series = ellipse_beta_series(a, h)?;
        let dd_opts = SpectrumOptions { rel_tol: 1e-26, restarts: 0, ..opts.clone() };
        rationals
            .par_iter()
            .map(|&(p, q)| {
                let orbit = max_length_ellipse_dd(a, h, p, q, &dd_opts)?;
                let qd = DoubleDouble::from_f64(q as f64);
                let omega = DoubleDouble::from_f64(p as f64) / qd;
                let numeric = -orbit.length / qd;
                let approx = beta_series_eval(&series, omega);
                Ok(SpectrumRow {
                    p,
                    q,
                    omega: omega.to_f64(),
                    beta_numeric: numeric.to_f64(),
                    beta_series: approx.to_f64(),
                    residual: (numeric - approx).to_f64(),
                    stationarity: orbit.residual.to_f64(),
                    iterations: orbit.iterations,
                })
            })
            .collect::<Result<_>>()?
    } else {
        let series = beta_coefficients(&compute_invariants(domain, domain.resolution())?);
        rationals
            .par_iter()
            .map(|&(p, q)| {
                let orbit = max_periodic_orbit(domain, p, q, opts)?;
                let omega = p as f64 / q as f64;
                let approx = beta_series_eval(&series, omega);
                Ok(SpectrumRow {
                    p,
                    q,
                    omega,
                    beta_numeric: orbit.beta(),
                    beta_series: approx,
                    residual: orbit.beta() - approx,
                    stationarity: orbit.residual,
                    iterations: orbit.iterations,
                })
            })
            .collect::<Result<_>>()?
    };
    let fitted_exponent = integrable.and_then(|_| {
        let xs: Vec<f64> = rows.iter().map(|r| r.omega).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.residual).collect();
        loglog_slope(&xs, &ys)
    });
    let precision = if integrable.is_some() { "double-double" } else { "f64" };
    Ok(SpectrumComparison { rows, fitted_exponent, precision: precision.into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_domain;
    use std::f64::consts::PI;

    fn opts() -> SpectrumOptions {
        SpectrumOptions::default()
    }

    #[test]
    fn rotation_checks() {
        assert!(check_rotation(1, 2).is_ok());
        assert!(check_rotation(2, 4).is_err());
        assert!(check_rotation(2, 3).is_err());
        assert!(check_rotation(0, 3).is_err());
        assert!(check_rotation(1, 1).is_err());
    }

    #[test]
    fn circle_polygons() {
        let d = build_domain(&DomainSpec::circle(1.0), 256).unwrap();
        for q in [2u32, 3, 5, 9] {
            let o = max_periodic_orbit(&d, 1, q, &opts()).unwrap();
            let exact = 2.0 * q as f64 * (PI / q as f64).sin();
            assert!((o.total_length - exact).abs() < 1e-12, "q={q}");
        }
        let d2 = build_domain(&DomainSpec::circle(2.0), 256).unwrap();
        assert!((beta_at_rational(&d2, 1, 4).unwrap() + 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ellipse_major_axis() {
        let d = build_domain(&DomainSpec::ellipse(1.0, 0.5), 2048).unwrap();
        let o = max_periodic_orbit(&d, 1, 2, &opts()).unwrap();
        assert!((o.total_length - 4.0).abs() < 1e-10);
        assert!((o.beta() + 2.0).abs() < 1e-10);
    }

    #[test]
    fn orbit_invariants_on_perturbed_circle() {
        let d = build_domain(&DomainSpec::fourier(1.0, &[(2, 0.08), (3, 0.03)], &[(5, 0.01)]), 1024)
            .unwrap();
        let o = max_periodic_orbit(&d, 2, 7, &opts()).unwrap();
        assert!(o.residual < 1e-10 * d.total_length());
        assert!(o.lifted_points.windows(2).all(|w| w[1] > w[0]));
        assert!(o.lifted_points[6] < o.lifted_points[0] + 2.0 * d.total_length());
        for (a, b) in o.reflection_angles(&d) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let h = &o.objective_history;
        assert!(h.windows(2).all(|w| w[1] >= w[0] - 1e-14 * w[0]));
    }

    #[test]
    fn double_double_circle_matches_sine() {
        let one = DoubleDouble::one();
        let o = max_length_ellipse_dd(one, DoubleDouble::zero(), 1, 7, &SpectrumOptions {
            rel_tol: 1e-28,
            restarts: 0,
            ..opts()
        })
        .unwrap();
        let exact = DoubleDouble::from_f64(14.0) * (DoubleDouble::pi() / DoubleDouble::from_f64(7.0)).sin();
        assert!((o.length - exact).abs().to_f64() < 1e-28);
    }

    #[test]
    fn loglog_fit() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(7)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 7.0).abs() < 1e-12);
    }
}
