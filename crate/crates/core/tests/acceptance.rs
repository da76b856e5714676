//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use billiard_core::billiard::{chord_length_partials, lazutkin_y, step, step_angles};
use billiard_core::caustic::{
    confocal_caustic_length, confocal_lazutkin_q, delta_series_of_l, geometric_lazutkin_q,
    lazutkin_series_l_of_delta, CausticProbe,
};
use billiard_core::ellipse_oracle::{
    caustic_of_rotation, complete_e, complete_k, ellipse_beta_series, ellipse_invariants,
    recover_ellipse, rotation_of_caustic,
};
use billiard_core::invariants::{
    alpha_from_invariants, alpha_series_eval, beta_coefficients, compute_invariants,
    isoperimetric_defect,
};
use billiard_core::spectrum::{
    compare_spectrum_vs_series, loglog_slope, max_periodic_orbit, SpectrumOptions,
};
use billiard_core::verify::caustic_orbit_rotation;
use billiard_core::{build_domain, DomainSpec, DoubleDouble, EllipseParams, PhasePoint, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}

fn dd(x: f64) -> DoubleDouble {
    DoubleDouble::from_f64(x)
}

fn perturbed_circle() -> DomainSpec {
    DomainSpec::fourier(1.0, &[(2, 0.02)], &[])
}

fn circle_invariants() -> Outcome {
    let start = Instant::now();
    let d = build_domain(&DomainSpec::circle(1.0), 2048)?;
    let inv = compute_invariants(&d, 2048)?;
    let secs = start.elapsed().as_secs_f64();
    let exact = [2.0 * PI, 2.0 * PI, 18.0 * PI, 18.0 * PI, 281.0 * PI / 22400.0];
    let err = max_rel(&inv.as_array(), &exact);
    Ok((err < 1e-10 && secs < 1.0, format!("max rel err {err:.2e}, {secs:.3} s")))
}

fn circle_betas() -> Outcome {
    let d = build_domain(&DomainSpec::circle(1.0), 2048)?;
    let beta = beta_coefficients(&compute_invariants(&d, 2048)?).as_array();
    let exact: Vec<f64> = (0..5).map(|j| -2.0 * (-1f64).powi(j) * PI.powi(2 * j + 1)).collect();
    let err = max_rel(&beta, &exact);
    Ok((err < 1e-9, format!("max rel err {err:.2e}")))
}

fn ellipse_cross_validation() -> Outcome {
    let params = EllipseParams::new(1.0, 0.5)?;
    let d = build_domain(&DomainSpec::ellipse(1.0, 0.5), 2048)?;
    let inv = compute_invariants(&d, 2048)?;
    let (c1, c3, c5) = ellipse_invariants(&params)?;
    let e_inv = max_rel(&[inv.i1, inv.i3, inv.i5], &[c1, c3, c5]);
    let b = beta_coefficients(&inv).as_array();
    let c = ellipse_beta_series(1.0, 0.5)?.as_array();
    let e_low = max_rel(&b[..3], &c[..3]);
    let e_high = max_rel(&b[3..], &c[3..]);
    Ok((
        e_inv < 1e-8 && e_low < 1e-8 && e_high < 1e-6,
        format!("I1,I3,I5 {e_inv:.2e}; beta1..5 {e_low:.2e}; beta7,9 {e_high:.2e}"),
    ))
}

fn spectrum_vs_series() -> Outcome {
    let start = Instant::now();
    let d = build_domain(&DomainSpec::ellipse(1.0, 0.5), 2048)?;
    let rationals: Vec<(u32, u32)> = (10..=40).map(|q| (1, q)).collect();
    let cmp = compare_spectrum_vs_series(&d, &rationals, &SpectrumOptions::default())?;
    let secs = start.elapsed().as_secs_f64();
    let slope = cmp.fitted_exponent.unwrap_or(f64::NAN);
    let (first, last) = (&cmp.rows[0], &cmp.rows[cmp.rows.len() - 1]);
    Ok((
        slope >= 10.0 && secs < 60.0,
        format!(
            "fitted exponent {slope:.3}; residual {:.2e} at q=10, {:.2e} at q=40; {secs:.1} s",
            first.residual, last.residual
        ),
    ))
}

fn slope_at_zero() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec) in [
        ("circle", DomainSpec::circle(1.0)),
        ("ellipse", DomainSpec::ellipse(1.0, 0.5)),
        ("perturbed", perturbed_circle()),
    ] {
        let d = build_domain(&spec, 2048)?;
        let o = max_periodic_orbit(&d, 1, 60, &SpectrumOptions::default())?;
        let l0 = d.total_length();
        let abs = (o.total_length - l0).abs();
        ok &= abs / l0 < 1e-3;
        detail.push(format!("{name} abs {abs:.2e} rel {:.2e}", abs / l0));
    }
    Ok((ok, detail.join("; ")))
}

fn random_fourier(rng: &mut ChaCha8Rng) -> DomainSpec {
    let budget = 0.8 / (2..=6).map(|n| (n * n) as f64).sum::<f64>();
    let cos: Vec<(u32, f64)> = (2..=6).map(|n| (n, budget * rng.gen_range(-1.0..1.0))).collect();
    let sin: Vec<(u32, f64)> = (2..=6).map(|n| (n, budget * rng.gen_range(-1.0..1.0))).collect();
    DomainSpec::fourier(1.0, &cos, &sin)
}

fn isoperimetric_corollary() -> Outcome {
    let mut circle_worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        let d = build_domain(&DomainSpec::circle(r), 1024)?;
        circle_worst = circle_worst.max(isoperimetric_defect(&compute_invariants(&d, 1024)?).abs());
    }
    let d = build_domain(&DomainSpec::ellipse(1.0, 0.3), 2048)?;
    let ellipse = isoperimetric_defect(&compute_invariants(&d, 2048)?);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random_worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let d = build_domain(&random_fourier(&mut rng), 512)?;
        random_worst = random_worst.max(isoperimetric_defect(&compute_invariants(&d, 512)?));
    }
    Ok((
        circle_worst <= 1e-10 && ellipse < -1e-6 && random_worst < -1e-6,
        format!("circles |D| <= {circle_worst:.2e}; ellipse {ellipse:.3e}; random max {random_worst:.3e}"),
    ))
}

fn caustic_series_orders() -> Outcome {
    let probe = CausticProbe::concentric(1.0, 0.7)?;
    let r = probe.rho_derivatives(0.3, 6);
    let deltas = [0.2, 0.1, 0.05];
    let mut l_res = Vec::new();
    let mut ls = Vec::new();
    let mut d_res = Vec::new();
    for &delta in &deltas {
        let x = dd(delta);
        let exact = dd(2.0 * r[0]) * (x.tan() - x);
        l_res.push((dd(lazutkin_series_l_of_delta(&r, delta)) - exact).to_f64());
        ls.push(exact.to_f64());
        d_res.push(delta_series_of_l(&r, exact.to_f64()) - delta);
    }
    let s_l = loglog_slope(&deltas, &l_res).unwrap_or(f64::NAN);
    let s_d = loglog_slope(&ls, &d_res).unwrap_or(f64::NAN);
    Ok((
        (s_l - 11.0).abs() <= 0.5 && (s_d - 3.0).abs() <= 0.5,
        format!("L(delta) residual slope {s_l:.3}; delta(L) residual slope in L {s_d:.3}"),
    ))
}

fn lazutkin_duality() -> Outcome {
    let (a, h) = (1.0, 0.5);
    let params = EllipseParams::new(a, h)?;
    let d = build_domain(&DomainSpec::ellipse(a, h), 2048)?;
    let inv = compute_invariants(&d, 2048)?;
    let (hd, one) = (dd(h), DoubleDouble::one());
    let (k, e) = (complete_k(hd)?, complete_e(hd)?);
    let w = one - hd * hd;
    let i1 = dd(4.0) * e;
    let i3 = dd(4.0) * w.cbrt() * k;
    let i5 = dd(36.0) / w.cbrt() * (dd(-15.0) * e + dd(8.0) * (dd(2.0) - hd * hd) * k);
    let alpha = alpha_from_invariants([i1, i3, i5, dd(inv.i7), dd(inv.i9)]);
    let mut res = Vec::new();
    let mut detail = Vec::new();
    for omega in [0.05, 0.025] {
        let mu = caustic_of_rotation(&params, omega)?;
        let q = confocal_lazutkin_q(dd(a), hd, dd(mu), dd(0.3));
        let gamma = confocal_caustic_length(dd(a), hd, dd(mu))?;
        let r = (q - alpha_series_eval(&alpha, -gamma)).to_f64();
        let probe = CausticProbe::confocal(&params, mu)?;
        let q64 = geometric_lazutkin_q(&d, &probe, 1.1)?;
        if (q64 - q.to_f64()).abs() > 1e-12 {
            return Ok((false, format!("geometric Q {q64} disagrees with closed form {}", q.to_f64())));
        }
        detail.push(format!("omega {omega}: Q {:.6e} residual {r:.2e}", q.to_f64()));
        res.push(r.abs());
    }
    let ratio = res[0] / res[1];
    detail.push(format!("ratio {ratio:.1}"));
    Ok((ratio >= 16.0, detail.join("; ")))
}

fn rotation_consistency() -> Outcome {
    let params = EllipseParams::new(1.0, 0.5)?;
    let mu0 = params.mu0().unwrap();
    let d = build_domain(&DomainSpec::ellipse(1.0, 0.5), 2048)?;
    let mut worst: f64 = 0.0;
    for frac in [0.6, 0.8, 0.95] {
        let mu = frac * mu0;
        let diff = (rotation_of_caustic(&params, mu)? - caustic_orbit_rotation(&d, &params, mu, 2000)?).abs();
        worst = worst.max(diff);
    }
    Ok((worst < 1e-4, format!("max |formula - orbit| {worst:.2e}")))
}

fn uniqueness_recovery() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, h) in [(1.0, 0.3), (1.5, 0.6)] {
        let b = ellipse_beta_series(a, h)?.as_array();
        let e = recover_ellipse(b[0], b[1])?;
        worst = worst.max((e.a - a).abs()).max((e.h - h).abs());
    }
    Ok((worst < 1e-8, format!("max error {worst:.2e}")))
}

fn generating_function_law() -> Outcome {
    let specs = [DomainSpec::circle(1.0), DomainSpec::ellipse(1.0, 0.5), perturbed_circle()];
    let domains = specs.iter().map(|s| build_domain(s, 2048)).collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let d = &domains[i % domains.len()];
        let p = PhasePoint::new(rng.gen_range(0.0..d.total_length()), rng.gen_range(0.01..PI - 0.01));
        let next = step(d, p)?;
        let (d0, d1) = chord_length_partials(d, p.s, next.s)?;
        worst = worst.max((d0 + p.phi.cos()).abs()).max((d1 - next.phi.cos()).abs());
    }
    Ok((worst < 1e-9, format!("max deviation {worst:.2e}")))
}

fn lazutkin_near_integrability() -> Outcome {
    let d = build_domain(&DomainSpec::ellipse(1.0, 0.5), 2048)?;
    let ys = [0.02, 0.01, 0.005];
    let thetas: Vec<f64> = (0..16).map(|j| 2.0 * PI * j as f64 / 16.0 + 0.1).collect();
    let mut res = Vec::new();
    for &y in &ys {
        let mut worst: f64 = 0.0;
        for &theta in &thetas {
            let phi = 2.0 * (y * d.lazutkin_perimeter() / (4.0 * d.rho(theta).cbrt())).asin();
            let (psi, _) = step_angles(&d, theta, phi)?;
            let advance = d.lazutkin_x_lifted(psi) - d.lazutkin_x_lifted(theta);
            worst = worst.max((advance - lazutkin_y(&d, theta, phi)).abs());
        }
        res.push(worst);
    }
    let ratios = [res[0] / res[1], res[1] / res[2]];
    Ok((
        ratios.iter().all(|&r| r >= 6.4),
        format!("residuals {:.2e} {:.2e} {:.2e}; ratios {:.2} {:.2}", res[0], res[1], res[2], ratios[0], ratios[1]),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 circle invariants", circle_invariants),
        ("2 circle beta chain", circle_betas),
        ("3 ellipse cross-validation", ellipse_cross_validation),
        ("4 spectrum vs series", spectrum_vs_series),
        ("5 slope at zero", slope_at_zero),
        ("6 isoperimetric corollary", isoperimetric_corollary),
        ("7 caustic series orders", caustic_series_orders),
        ("8 Lazutkin invariant duality", lazutkin_duality),
        ("9 rotation number consistency", rotation_consistency),
        ("10 uniqueness recovery", uniqueness_recovery),
        ("11 generating-function law", generating_function_law),
        ("12 Lazutkin near-integrability", lazutkin_near_integrability),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!passed);
        println!("{} criterion {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
