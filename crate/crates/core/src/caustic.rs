//! Caustic probes and the Lazutkin invariant.
//!
//! For a convex caustic with radius of curvature `r(φ)`, the two tangent
//! lines at tangent angles `φ ± Δ` meet at a point `P`. The Lazutkin
//! quantity of that configuration is
//!
//! ```text
//! L = |P − A| + |P − B| − |arc AB|,
//! ```
//!
//! with `A`, `B` the tangency points and the arc the one visible from `P`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::ellipse_oracle::{caustic_length, complete_e, EllipseParams};
use crate::error::{Error, Result};
use crate::geometry::{ellipse_point_by_normal, ellipse_rho_derivatives, Domain, DomainSpec};
use crate::quadrature::{adaptive_gauss, GaussLegendre};
use crate::real::Real;

const TANGENCY_SAMPLES: usize = 4096;

/// A convex caustic candidate: an ellipse with semi-axes `(A, B)` (major axis
/// aligned with the domain's first vertex normal) centred at `center` in the
/// domain frame. A circle is the case `A = B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausticProbe {
    pub semi_axes: (f64, f64),
    pub center: (f64, f64),
    pub length: f64,
}

impl CausticProbe {
    /// Confocal ellipse `E_μ` inside the ellipse `params`.
    pub fn confocal(params: &EllipseParams, mu: f64) -> Result<Self> {
        let length = caustic_length(params, mu)?;
        Ok(Self { semi_axes: params.confocal_axes(mu), center: (0.0, params.a), length })
    }

    /// Circle of radius `rho0` concentric with the disc of radius `radius`.
    pub fn concentric(radius: f64, rho0: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho0 < radius) {
            return Err(Error::DomainError { function: "concentric caustic", value: rho0 });
        }
        Ok(Self { semi_axes: (rho0, rho0), center: (0.0, radius), length: TAU * rho0 })
    }

    /// Parse `confocal:mu=<μ>`, `confocal:frac=<μ/μ₀>` or `circle:r=<ρ₀>`
    /// against the given domain.
    pub fn parse(text: &str, spec: &DomainSpec) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("unrecognised probe '{text}'"));
        let (kind, arg) = text.split_once(':').ok_or_else(bad)?;
        let (key, value) = arg.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match (kind.trim(), key.trim(), spec) {
            ("confocal", key, DomainSpec::Ellipse { a, h }) => {
                let params = EllipseParams::new(*a, *h)?;
                let mu = match key {
                    "mu" => value,
                    "frac" => value * params.mu0().ok_or_else(bad)?,
                    _ => return Err(bad()),
                };
                Self::confocal(&params, mu)
            }
            ("circle", "r", DomainSpec::Circle { radius }) => Self::concentric(*radius, value),
            _ => Err(bad()),
        }
    }

    /// Point of the probe with tangent angle `φ`.
    pub fn point_at(&self, phi: f64) -> (f64, f64) {
        let (x, y) = ellipse_point_by_normal(self.semi_axes.0, self.semi_axes.1, phi);
        (self.center.0 + y, self.center.1 - x)
    }

    /// `[r, r', …, r^{(order)}]` at tangent angle `φ`.
    pub fn rho_derivatives(&self, phi: f64, order: usize) -> Vec<f64> {
        ellipse_rho_derivatives(self.semi_axes.0, self.semi_axes.1, phi, order)
    }

    pub fn rho(&self, phi: f64) -> f64 {
        self.rho_derivatives(phi, 0)[0]
    }

    /// Arc length of the probe between tangent angles `t0 < t1`.
    pub fn arc_length(&self, t0: f64, t1: f64) -> Result<f64> {
        adaptive_gauss(t0, t1, 1e-15 * self.length, &mut |t| self.rho(t))
            .ok_or(Error::QuadratureFailure("caustic arc length"))
    }
}

/// Exact `L(φ, Δ)`, written as
/// `(2 / cos Δ) ∫_{-Δ}^{Δ} r(φ+u) sin((Δ+u)/2) sin((Δ−u)/2) du`, which is
/// free of the cancellation between tangent lengths and arc length.
pub fn lazutkin_integral(probe: &CausticProbe, phi: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return Err(Error::OutOfRange { what: "delta", value: delta, lo: 0.0, hi: PI / 2.0 });
    }
    // each half is integrated in the distance `v` from its endpoint, so that
    // `sin(v/2)` carries no cancellation near the tangency points
    let rough = GaussLegendre::<f64>::new(12).integrate(-delta, delta, |u| {
        probe.rho(phi + u) * (0.5 * (delta + u)).sin() * (0.5 * (delta - u)).sin()
    });
    let scale = rough.max(0.25 * probe.rho(phi) * delta.powi(3));
    let mut v = 0.0;
    for side in [-1.0, 1.0] {
        v += adaptive_gauss(0.0, delta, 0.5e-13 * scale, &mut |w: f64| {
            probe.rho(phi + side * (delta - w)) * (0.5 * w).sin() * (delta - 0.5 * w).sin()
        })
        .ok_or(Error::QuadratureFailure("lazutkin integral"))?;
    }
    Ok(2.0 * v / delta.cos())
}

/// Truncated series of `L` in `Δ` through `Δ⁹` from `[r, r', …, r⁽⁶⁾]`.
pub fn lazutkin_series_l_of_delta(r: &[f64], delta: f64) -> f64 {
    let (r0, r2, r4, r6) = (r[0], r[2], r[4], r[6]);
    let d2 = delta * delta;
    let d3 = d2 * delta;
    d3 * (2.0 / 3.0 * r0
        + d2 * ((r2 + 4.0 * r0) / 15.0
            + d2 * ((3.0 * r4 + 32.0 * r2 + 136.0 * r0) / 1260.0
                + d2 * (r6 + 20.0 * r4 + 232.0 * r2 + 992.0 * r0) / 22680.0)))
}

/// Inverse series `Δ(L)` through `L^{7/3}` from `[r, r', …, r⁽⁶⁾]`.
pub fn delta_series_of_l(r: &[f64], l: f64) -> f64 {
    let (r0, r2, r4, r6) = (r[0], r[2], r[4], r[6]);
    let t1 = 1.5f64.cbrt();
    let t2 = t1 * t1;
    let c = r0.cbrt();
    let l1 = l.cbrt();
    t1 / c * l1 + (-r2 - 4.0 * r0) / (20.0 * r0 * r0) * l
        + t2 * (-15.0 * r4 * r0 + 288.0 * r0 * r2 + 56.0 * r2 * r2 + 216.0 * r0 * r0)
            / (8400.0 * r0.powi(3) * c * c)
            * l
            * l1
            * l1
        + t1 * (-5.0 * r6 * r0 * r0 + 260.0 * r4 * r0 * r0 - 1976.0 * r0 * r0 * r2
            - 1224.0 * r0 * r2 * r2
            - 182.0 * r2.powi(3)
            + 90.0 * r4 * r0 * r2
            - 288.0 * r0.powi(3))
            / (100800.0 * r0.powi(5) * c)
            * l
            * l
            * l1
}

/// Tangency data of the two tangent lines from a boundary point to a probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tangency {
    /// Probe tangent angles of `A` and `B`, with `t_a < t_b` spanning the visible arc.
    pub t_a: f64,
    pub t_b: f64,
    pub segment_a: f64,
    pub segment_b: f64,
    pub visible_arc: f64,
}

impl Tangency {
    pub fn mid_angle(&self) -> f64 {
        0.5 * (self.t_a + self.t_b)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.t_b - self.t_a)
    }

    pub fn lazutkin_q(&self) -> f64 {
        self.segment_a + self.segment_b - self.visible_arc
    }
}

fn tangency_function(probe: &CausticProbe, p: (f64, f64), t: f64) -> f64 {
    let c = probe.point_at(t);
    let (s, co) = t.sin_cos();
    co * (p.1 - c.1) - s * (p.0 - c.0)
}

fn refine_root(probe: &CausticProbe, p: (f64, f64), mut lo: f64, mut hi: f64) -> f64 {
    let g = |t| tangency_function(probe, p, t);
    let g_lo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == (g_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Tangent lines from the boundary point at tangent angle `theta`.
pub fn tangency_from(domain: &Domain, probe: &CausticProbe, theta: f64) -> Result<Tangency> {
    let p = domain.point_at(theta);
    let n = TANGENCY_SAMPLES;
    let grid: Vec<f64> = (0..=n).map(|j| theta - PI + TAU * j as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| tangency_function(probe, p, t)).collect();
    let roots: Vec<f64> = (0..n)
        .filter(|&j| (vals[j] < 0.0) != (vals[j + 1] < 0.0))
        .map(|j| refine_root(probe, p, grid[j], grid[j + 1]))
        .collect();
    if roots.len() != 2 {
        return Err(Error::TangencyNotFound);
    }
    let (r0, r1) = (roots[0], roots[1]);
    // the visible arc is where P lies on the outer side of the tangent line
    let (t_a, t_b) = if tangency_function(probe, p, 0.5 * (r0 + r1)) < 0.0 {
        (r0, r1)
    } else {
        (r1, r0 + TAU)
    };
    let dist = |t: f64| {
        let c = probe.point_at(t);
        (p.0 - c.0).hypot(p.1 - c.1)
    };
    Ok(Tangency {
        t_a,
        t_b,
        segment_a: dist(t_a),
        segment_b: dist(t_b),
        visible_arc: probe.arc_length(t_a, t_b)?,
    })
}

/// `|P − A| + |P − B| − |arc AB|` for the boundary point at tangent angle `theta`.
pub fn geometric_lazutkin_q(domain: &Domain, probe: &CausticProbe, theta: f64) -> Result<f64> {
    Ok(tangency_from(domain, probe, theta)?.lazutkin_q())
}

/// [`lazutkin_integral`] at the `(φ, Δ)` seen from the boundary point at `theta`.
pub fn lazutkin_integral_at(domain: &Domain, probe: &CausticProbe, theta: f64) -> Result<f64> {
    let t = tangency_from(domain, probe, theta)?;
    lazutkin_integral(probe, t.mid_angle(), t.half_width())
}

/// Lazutkin quantity of the confocal caustic `E_μ` of the ellipse
/// `(a cos t, b sin t)`, seen from the boundary point with parameter `t`,
/// in closed form up to one arc-length quadrature. Works in any precision.
pub fn confocal_lazutkin_q<R: Real>(a: R, h: R, mu: R, t: R) -> R {
    let f = |x: f64| R::from_f64(x);
    let half = f(0.5);
    let (em, ep) = ((-mu).exp(), mu.exp());
    let ca = a * h * (ep + em) * half;
    let cb = a * h * (ep - em) * half;
    let b = a * (R::one() - h * h).sqrt();
    let (st, ct) = t.sin_cos();
    let p = (a * ct, b * st);
    let (u, v) = (p.0 / ca, p.1 / cb);
    let gamma = v.atan2(u);
    let delta = (u * u + v * v - R::one()).sqrt().atan2(R::one());
    let seg = |s: R| {
        let (ss, cs) = s.sin_cos();
        let (dx, dy) = (p.0 - ca * cs, p.1 - cb * ss);
        (dx * dx + dy * dy).sqrt()
    };
    let rule = GaussLegendre::<R>::new(24);
    let arc = rule.integrate_composite(gamma - delta, gamma + delta, 4, |s| {
        let (ss, cs) = s.sin_cos();
        (ca * ca * ss * ss + cb * cb * cs * cs).sqrt()
    });
    seg(gamma - delta) + seg(gamma + delta) - arc
}

/// Perimeter of `E_μ` in any precision.
pub fn confocal_caustic_length<R: Real>(a: R, h: R, mu: R) -> Result<R> {
    let (em, ep) = ((-mu).exp(), mu.exp());
    let cosh = (ep + em) * R::from_f64(0.5);
    Ok(R::from_f64(4.0) * a * h * cosh * complete_e(R::one() / cosh)?)
}
