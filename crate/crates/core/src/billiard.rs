//! The billiard map in `(s, φ)` coordinates: `s` is arc length, `φ ∈ (0, π)`
//! the angle of the outgoing ray measured from the positive tangent.
//!
//! Rotation numbers are fractions of the perimeter advanced per bounce.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(s: f64, phi: f64) -> Self {
        Self { s, phi }
    }

    /// Same boundary point, reversed direction.
    pub fn reversed(&self) -> Self {
        Self { s: self.s, phi: PI - self.phi }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<PhasePoint>,
    /// Arc length in the universal cover; non-decreasing.
    pub lifted_s: Vec<f64>,
    pub total_length: f64,
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

/// Unit chord direction and length between tangent angles `t0`, `t1`.
fn chord(domain: &Domain, t0: f64, t1: f64) -> ((f64, f64), f64) {
    let d = sub(domain.point_at(t1), domain.point_at(t0));
    let l = d.0.hypot(d.1);
    ((d.0 / l, d.1 / l), l)
}

fn check_distinct(domain: &Domain, s0: f64, s1: f64) -> Result<()> {
    let l0 = domain.total_length();
    let gap = (s1 - s0).rem_euclid(l0);
    if gap.min(l0 - gap) <= 1e-14 * l0 {
        return Err(Error::CoincidentPoints { s0, s1 });
    }
    Ok(())
}

/// Euclidean distance between the boundary points at arc lengths `s0`, `s1`.
pub fn chord_length(domain: &Domain, s0: f64, s1: f64) -> Result<f64> {
    check_distinct(domain, s0, s1)?;
    Ok(chord(domain, domain.phi_of_s(s0), domain.phi_of_s(s1)).1)
}

/// `(∂ℓ/∂s0, ∂ℓ/∂s1)`.
pub fn chord_length_partials(domain: &Domain, s0: f64, s1: f64) -> Result<(f64, f64)> {
    check_distinct(domain, s0, s1)?;
    let (t0, t1) = (domain.phi_of_s(s0), domain.phi_of_s(s1));
    Ok(chord_partials_at_angles(domain, t0, t1))
}

pub(crate) fn chord_partials_at_angles(domain: &Domain, t0: f64, t1: f64) -> (f64, f64) {
    let (u, _) = chord(domain, t0, t1);
    (-dot(domain.tangent_at(t0), u), dot(domain.tangent_at(t1), u))
}

/// One bounce from tangent angle `theta` with reflection angle `phi`;
/// returns the new (lifted, `> theta`) tangent angle and reflection angle.
pub fn step_angles(domain: &Domain, theta: f64, phi: f64) -> Result<(f64, f64)> {
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::OutOfRange { what: "phi", value: phi, lo: 0.0, hi: PI });
    }
    let alpha = theta + phi;
    let dir = (alpha.cos(), alpha.sin());
    let p = domain.point_at(theta);
    let f = |psi: f64| cross(dir, sub(domain.point_at(psi), p));

    let eps = 1e-3 * phi.min(PI - phi);
    let (mut lo, mut hi) = (theta + eps, theta + TAU - eps);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::RootNotBracketed { s: domain.s_of_phi(theta), phi });
    }
    let mut psi = (theta + 2.0 * phi).clamp(lo, hi);
    for _ in 0..200 {
        let v = f(psi);
        if v < 0.0 {
            lo = psi;
        } else if v > 0.0 {
            hi = psi;
        } else {
            break;
        }
        let slope = domain.rho(psi) * (psi - alpha).sin();
        let mut next = psi - v / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let done = (next - psi).abs() <= 4.0 * f64::EPSILON * psi.abs().max(1.0);
        psi = next;
        if done || hi - lo <= 4.0 * f64::EPSILON * psi.abs().max(1.0) {
            break;
        }
    }
    Ok((psi, psi - alpha))
}

/// The billiard map on the phase cylinder; `s` of the result lies in `[0, ℓ₀)`.
pub fn step(domain: &Domain, p: PhasePoint) -> Result<PhasePoint> {
    let (psi, phi) = step_angles(domain, domain.phi_of_s(p.s), p.phi)?;
    let s = domain.s_of_phi(psi).rem_euclid(domain.total_length());
    Ok(PhasePoint { s, phi })
}

/// `n` bounces from `p0`, tracking the lift of `s`.
pub fn iterate(domain: &Domain, p0: PhasePoint, n: usize) -> Result<Trajectory> {
    let l0 = domain.total_length();
    let mut theta = domain.phi_of_s(p0.s);
    let mut phi = p0.phi;
    let mut points = vec![p0];
    let mut lifted_s = vec![p0.s];
    for _ in 0..n {
        let (t, f) = step_angles(domain, theta, phi)?;
        // keep the angle small so the lift does not lose precision
        let turns = (t / TAU).floor();
        theta = t - turns * TAU;
        phi = f;
        let last = *lifted_s.last().unwrap();
        let base = last - last.rem_euclid(l0);
        let mut s = base + domain.s_of_phi(theta);
        if s < last {
            s += l0;
        }
        lifted_s.push(s);
        points.push(PhasePoint { s: s.rem_euclid(l0), phi });
    }
    Ok(Trajectory { points, lifted_s, total_length: l0 })
}

fn bump(t: f64) -> f64 {
    (-1.0 / (t * (1.0 - t))).exp()
}

/// Weighted Birkhoff average of the per-bounce advance `Δs / ℓ₀`. The smooth
/// window `exp(-1/(t(1-t)))` makes the error decay faster than any power of
/// `n` for quasi-periodic orbits; for one step it is the plain advance.
pub fn rotation_number_estimate(traj: &Trajectory) -> f64 {
    let n = traj.lifted_s.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let w = bump((i as f64 + 0.5) / n as f64);
        num += w * (traj.lifted_s[i + 1] - traj.lifted_s[i]);
        den += w;
    }
    num / (den * traj.total_length)
}

/// Plain average `(s_n − s_0) / (n ℓ₀)`.
pub fn rotation_number_plain(traj: &Trajectory) -> f64 {
    let n = traj.lifted_s.len() - 1;
    (traj.lifted_s[n] - traj.lifted_s[0]) / (n as f64 * traj.total_length)
}

/// Lazutkin coordinates `(x, y)` with `x ∈ [0, 1)`.
pub fn lazutkin_coordinates(domain: &Domain, p: PhasePoint) -> (f64, f64) {
    let theta = domain.phi_of_s(p.s);
    let x = domain.lazutkin_x_lifted(theta).rem_euclid(1.0);
    (x, lazutkin_y(domain, theta, p.phi))
}

pub fn lazutkin_y(domain: &Domain, theta: f64, phi: f64) -> f64 {
    4.0 * domain.rho(theta).cbrt() * (0.5 * phi).sin() / domain.lazutkin_perimeter()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainSpec};

    fn circle(r: f64) -> Domain {
        build_domain(&DomainSpec::circle(r), 256).unwrap()
    }

    #[test]
    fn circle_chords() {
        let d = circle(1.0);
        assert!((chord_length(&d, 0.0, PI).unwrap() - 2.0).abs() < 1e-15);
        for n in [3usize, 7, 20] {
            let l = chord_length(&d, 0.3, 0.3 + TAU / n as f64).unwrap();
            assert!((l - 2.0 * (PI / n as f64).sin()).abs() < 1e-14);
        }
        assert!(matches!(chord_length(&d, 1.0, 1.0 + TAU), Err(Error::CoincidentPoints { .. })));
    }

    #[test]
    fn partials_match_finite_differences() {
        let d = build_domain(&DomainSpec::fourier(1.0, &[(2, 0.15)], &[(3, 0.05)]), 512).unwrap();
        let h = 1e-5;
        let (s0, s1) = (0.4, 2.9);
        let (a, b) = chord_length_partials(&d, s0, s1).unwrap();
        let fa = (chord_length(&d, s0 + h, s1).unwrap() - chord_length(&d, s0 - h, s1).unwrap())
            / (2.0 * h);
        let fb = (chord_length(&d, s0, s1 + h).unwrap() - chord_length(&d, s0, s1 - h).unwrap())
            / (2.0 * h);
        assert!((a - fa).abs() < 1e-8 && (b - fb).abs() < 1e-8);
    }

    #[test]
    fn circle_step_is_rotation() {
        let d = circle(2.0);
        let p = step(&d, PhasePoint::new(1.0, 0.4)).unwrap();
        assert!((p.s - (1.0 + 2.0 * 2.0 * 0.4)).abs() < 1e-12);
        assert!((p.phi - 0.4).abs() < 1e-12);
    }

    #[test]
    fn time_reversal() {
        let d = build_domain(&DomainSpec::ellipse(1.0, 0.6), 2048).unwrap();
        let p = PhasePoint::new(0.7, 1.1);
        let q = step(&d, p).unwrap();
        let back = step(&d, q.reversed()).unwrap();
        assert!((back.s - p.s).abs() < 1e-9);
        assert!((back.phi - (PI - p.phi)).abs() < 1e-9);
    }

    #[test]
    fn ellipse_axis_two_periodic() {
        let d = build_domain(&DomainSpec::ellipse(1.0, 0.5), 2048).unwrap();
        let p = step(&d, PhasePoint::new(0.0, PI / 2.0)).unwrap();
        assert!((p.s - d.total_length() / 2.0).abs() < 1e-9);
        assert!((p.phi - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn generating_function_law() {
        let d = build_domain(&DomainSpec::ellipse(1.0, 0.7), 2048).unwrap();
        let mut theta = 0.2;
        let mut phi = 0.9;
        for _ in 0..50 {
            let (t, f) = step_angles(&d, theta, phi).unwrap();
            let (a, b) = chord_partials_at_angles(&d, theta, t);
            assert!((a + phi.cos()).abs() < 1e-9);
            assert!((b - f.cos()).abs() < 1e-9);
            theta = t;
            phi = f;
        }
    }

    #[test]
    fn rotation_estimates() {
        let d = circle(1.0);
        let traj = iterate(&d, PhasePoint::new(0.0, PI / 3.0), 300).unwrap();
        assert!((rotation_number_estimate(&traj) - 1.0 / 3.0).abs() < 1e-12);
        let one = iterate(&d, PhasePoint::new(0.5, 0.2), 1).unwrap();
        let adv = (one.lifted_s[1] - one.lifted_s[0]) / d.total_length();
        assert!((rotation_number_estimate(&one) - adv).abs() < 1e-15);
        assert!((rotation_number_plain(&one) - adv).abs() < 1e-15);
    }

    #[test]
    fn circle_lazutkin_coordinates() {
        let d = circle(1.0);
        let (x, y) = lazutkin_coordinates(&d, PhasePoint::new(1.0, 0.8));
        assert!((x - 1.0 / TAU).abs() < 1e-14);
        assert!((y - 2.0 / PI * 0.4f64.sin()).abs() < 1e-14);
        assert!(lazutkin_y(&d, 0.0, 0.0) == 0.0);
    }
}
