//! Verification suites for the two integrable tables, checked against their
//! closed forms.

use std::f64::consts::PI;

use crate::billiard::{iterate, rotation_number_estimate, step, PhasePoint};
use crate::caustic::{geometric_lazutkin_q, CausticProbe};
use crate::ellipse_oracle::{
    complete_e, complete_k, ellipse_beta_series, ellipse_invariants, recover_ellipse,
    rotation_of_caustic, EllipseParams,
};
use crate::error::Result;
use crate::geometry::{build_domain, Domain, DomainSpec};
use crate::invariants::{
    beta_coefficients, compute_invariants, isoperimetric_defect, lazutkin_of_rotation,
};
use crate::report::{Check, VerifyReport, SCHEMA_VERSION};
use crate::spectrum::{max_periodic_orbit, SpectrumOptions};

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, name: &str, value: f64, tolerance: f64, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: value.is_finite() && value <= tolerance,
            value,
            tolerance,
            detail,
        });
    }

    fn fail(&mut self, name: &str, err: impl std::fmt::Display) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: false,
            value: f64::NAN,
            tolerance: 0.0,
            detail: err.to_string(),
        });
    }

    fn finish(self, suite: &str, spec: DomainSpec, invariants: [f64; 5]) -> VerifyReport {
        let passed = self.checks.iter().all(|c| c.passed);
        VerifyReport {
            schema: SCHEMA_VERSION,
            suite: suite.to_string(),
            domain: spec,
            invariants,
            checks: self.checks,
            passed,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}

/// Rotation number of the orbit launched from the major vertex tangent to `E_μ`.
pub fn caustic_orbit_rotation(domain: &Domain, params: &EllipseParams, mu: f64, steps: usize) -> Result<f64> {
    let phi0 = params.tangent_launch_angle(mu)?;
    let traj = iterate(domain, PhasePoint::new(0.0, phi0), steps)?;
    Ok(rotation_number_estimate(&traj))
}

pub fn verify_circle(radius: f64, quadrature_n: usize) -> Result<VerifyReport> {
    let spec = DomainSpec::circle(radius);
    let domain = build_domain(&spec, quadrature_n)?;
    let inv = compute_invariants(&domain, quadrature_n)?;
    let r13 = radius.cbrt();
    let exact = [
        2.0 * PI * radius,
        2.0 * PI * r13,
        18.0 * PI / r13,
        18.0 * PI / radius,
        281.0 * PI / 22400.0 / (radius * r13 * r13),
    ];
    let mut s = Suite::new();
    s.check(
        "invariants I1..I9 vs closed form",
        max_rel(&inv.as_array(), &exact),
        1e-10,
        format!("{:?}", inv.as_array()),
    );

    let beta = beta_coefficients(&inv).as_array();
    let taylor: Vec<f64> = (0..5)
        .map(|j| -2.0 * radius * (-1f64).powi(j) * PI.powi(2 * j + 1))
        .collect();
    s.check("beta coefficients vs -2R sin(pi w)", max_rel(&beta, &taylor), 1e-9, String::new());

    let defect = isoperimetric_defect(&inv);
    s.check("isoperimetric defect vanishes", defect.abs(), 1e-10 * inv.i3.powi(3), format!("{defect:e}"));

    let w: f64 = 0.02;
    let x = PI * w;
    let l_exact = 2.0 * radius * (x.sin() - x * x.cos());
    s.check(
        "L(omega) series vs exact at omega=0.02",
        (lazutkin_of_rotation(&inv, w) - l_exact).abs() / l_exact,
        1e-12,
        String::new(),
    );

    for q in [2u32, 3, 5] {
        let name = format!("marked length 1/{q} vs polygon");
        match max_periodic_orbit(&domain, 1, q, &SpectrumOptions::default()) {
            Ok(o) => {
                let exact = 2.0 * radius * q as f64 * (PI / q as f64).sin();
                s.check(&name, rel(o.total_length, exact), 1e-10, format!("{}", o.total_length));
            }
            Err(e) => s.fail(&name, e),
        }
    }

    let mut p = PhasePoint::new(0.3, 0.7);
    let mut drift: f64 = 0.0;
    for _ in 0..200 {
        p = step(&domain, p)?;
        drift = drift.max((p.phi - 0.7).abs());
    }
    s.check("reflection angle conserved", drift, 1e-10, String::new());

    let theta: f64 = 0.25;
    let probe = CausticProbe::concentric(radius, radius * theta.cos())?;
    let q_exact = 2.0 * radius * (theta.sin() - theta * theta.cos());
    let q = geometric_lazutkin_q(&domain, &probe, 1.0)?;
    s.check("Lazutkin invariant of concentric caustic", rel(q, q_exact), 1e-10, format!("{q}"));

    Ok(s.finish("circle", spec, inv.as_array()))
}

pub fn verify_ellipse(h: f64, quadrature_n: usize) -> Result<VerifyReport> {
    let params = EllipseParams::new(1.0, h)?;
    let spec = DomainSpec::ellipse(1.0, h);
    let domain = build_domain(&spec, quadrature_n)?;
    let inv = compute_invariants(&domain, quadrature_n)?;
    let mut s = Suite::new();

    let (c1, c3, c5) = ellipse_invariants(&params)?;
    s.check(
        "I1, I3, I5 vs elliptic closed forms",
        max_rel(&[inv.i1, inv.i3, inv.i5], &[c1, c3, c5]),
        1e-8,
        format!("K={} E={}", complete_k(h)?, complete_e(h)?),
    );

    let b = beta_coefficients(&inv).as_array();
    let c = ellipse_beta_series(1.0, h)?.as_array();
    s.check("beta1, beta3, beta5 vs closed form", max_rel(&b[..3], &c[..3]), 1e-8, String::new());
    s.check("beta7, beta9 vs closed form", max_rel(&b[3..], &c[3..]), 1e-6, String::new());

    let defect = isoperimetric_defect(&inv);
    if h > 0.0 {
        s.check("isoperimetric defect negative", defect + 1e-6, 0.0, format!("{defect:e}"));
    }

    match max_periodic_orbit(&domain, 1, 2, &SpectrumOptions::default()) {
        Ok(o) => s.check("1/2 orbit is the major axis", (o.total_length - 4.0).abs(), 1e-10, String::new()),
        Err(e) => s.fail("1/2 orbit is the major axis", e),
    }

    let recovered = recover_ellipse(b[0], b[1])?;
    s.check(
        "recover (a, h) from beta1, beta3",
        (recovered.a - 1.0).abs().max((recovered.h - h).abs()),
        1e-8,
        format!("a={} h={}", recovered.a, recovered.h),
    );

    if let Some(mu0) = params.mu0() {
        let mu = 0.8 * mu0;
        let formula = rotation_of_caustic(&params, mu)?;
        let orbit = caustic_orbit_rotation(&domain, &params, mu, 2000)?;
        s.check(
            "caustic rotation number, formula vs orbit",
            (formula - orbit).abs(),
            1e-4,
            format!("formula={formula} orbit={orbit}"),
        );

        let probe = CausticProbe::confocal(&params, mu)?;
        let qs: Vec<f64> = (0..16)
            .map(|j| geometric_lazutkin_q(&domain, &probe, 2.0 * PI * j as f64 / 16.0))
            .collect::<Result<_>>()?;
        let (lo, hi) = qs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        s.check("Lazutkin invariant constant on caustic", hi - lo, 1e-7, format!("Q={}", qs[0]));
    }

    Ok(s.finish("ellipse", spec, inv.as_array()))
}
