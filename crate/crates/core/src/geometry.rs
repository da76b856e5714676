//! Strictly convex closed curves in tangent-angle form.
//!
//! A domain is described by its radius of curvature `ρ(φ)`, where `φ` is the
//! angle of the positive (counter-clockwise) tangent. The boundary is placed
//! so that `φ = 0` sits at the origin with tangent `(1, 0)`:
//!
//! ```text
//! x(φ) = ∫_0^φ ρ cos,   y(φ) = ∫_0^φ ρ sin,   s(φ) = ∫_0^φ ρ.
//! ```
//!
//! Fourier domains omit harmonic 1, so the curve closes for any coefficients.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::jet::Jet;

pub const DEFAULT_RESOLUTION: usize = 2048;
const MAX_HARMONIC: u32 = 4096;
const ELLIPSE_FFT_SIZE: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        h: f64,
    },
    Fourier {
        mean: f64,
        #[serde(default, with = "harmonic_map")]
        cos: BTreeMap<u32, f64>,
        #[serde(default, with = "harmonic_map")]
        sin: BTreeMap<u32, f64>,
    },
}

/// Harmonic maps are written with string keys, `{"2": 0.05}`.
mod harmonic_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, f64>, s: S) -> Result<S::Ok, S::Error> {
        let keyed: BTreeMap<String, f64> = map.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        keyed.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, f64>, D::Error> {
        let keyed = BTreeMap::<String, f64>::deserialize(d)?;
        keyed
            .into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<u32>()
                    .map(|n| (n, v))
                    .map_err(|_| D::Error::custom(format!("harmonic index '{k}' is not an integer")))
            })
            .collect()
    }
}

impl DomainSpec {
    pub fn circle(radius: f64) -> Self {
        DomainSpec::Circle { radius }
    }

    pub fn ellipse(a: f64, h: f64) -> Self {
        DomainSpec::Ellipse { a, h }
    }

    pub fn fourier(mean: f64, cos: &[(u32, f64)], sin: &[(u32, f64)]) -> Self {
        DomainSpec::Fourier {
            mean,
            cos: cos.iter().copied().collect(),
            sin: sin.iter().copied().collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain spec serializes")
    }

    /// Homothety by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            DomainSpec::Circle { radius } => DomainSpec::Circle { radius: radius * lambda },
            DomainSpec::Ellipse { a, h } => DomainSpec::Ellipse { a: a * lambda, h: *h },
            DomainSpec::Fourier { mean, cos, sin } => DomainSpec::Fourier {
                mean: mean * lambda,
                cos: cos.iter().map(|(&n, &c)| (n, c * lambda)).collect(),
                sin: sin.iter().map(|(&n, &c)| (n, c * lambda)).collect(),
            },
        }
    }

    pub fn is_circle(&self) -> bool {
        match self {
            DomainSpec::Circle { .. } => true,
            DomainSpec::Ellipse { h, .. } => *h == 0.0,
            DomainSpec::Fourier { cos, sin, .. } => {
                cos.values().chain(sin.values()).all(|&c| c == 0.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match *self {
            DomainSpec::Circle { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad(format!("radius must be positive, got {radius}"));
                }
            }
            DomainSpec::Ellipse { a, h } => {
                if !(a > 0.0 && a.is_finite()) {
                    return bad(format!("major semiaxis must be positive, got {a}"));
                }
                if !(0.0..1.0).contains(&h) {
                    return bad(format!("eccentricity must lie in [0, 1), got {h}"));
                }
            }
            DomainSpec::Fourier { mean, ref cos, ref sin } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return bad(format!("mean radius of curvature must be positive, got {mean}"));
                }
                for (&n, &c) in cos.iter().chain(sin.iter()) {
                    if n < 2 {
                        return bad(format!(
                            "harmonic {n} is not allowed (series start at harmonic 2)"
                        ));
                    }
                    if n > MAX_HARMONIC {
                        return bad(format!("harmonic {n} exceeds {MAX_HARMONIC}"));
                    }
                    if !c.is_finite() {
                        return bad(format!("coefficient of harmonic {n} is not finite"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Derivatives `ρ, ρ', …, ρ^{(order)}` at normal angle `φ` of the ellipse
/// with semi-axes `a ≥ b`, where `ρ = a²b² / (a² cos²φ + b² sin²φ)^{3/2}`.
pub fn ellipse_rho_derivatives(a: f64, b: f64, phi: f64, order: usize) -> Vec<f64> {
    let g0 = 0.5 * (a * a + b * b);
    let g1 = 0.5 * (a * a - b * b);
    let g: Vec<f64> = (0..=order)
        .map(|j| {
            let base = g1 * 2f64.powi(j as i32) * (2.0 * phi + j as f64 * PI / 2.0).cos();
            if j == 0 {
                g0 + base
            } else {
                base
            }
        })
        .collect();
    Jet::from_derivatives(&g).powf(-1.5).scale(a * a * b * b).derivatives()
}

/// Point with outward normal angle `φ` on the centred ellipse with semi-axes
/// `(a, b)` along `(X, Y)`.
pub fn ellipse_point_by_normal(a: f64, b: f64, phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let d = (a * a * c * c + b * b * s * s).sqrt();
    (a * a * c / d, b * b * s / d)
}

#[derive(Clone, Debug)]
enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Fourier,
}

/// Immutable boundary with precomputed arc-length table.
#[derive(Clone, Debug)]
pub struct Domain {
    spec: DomainSpec,
    shape: Shape,
    rho: FourierSeries,
    rho_cbrt: FourierSeries,
    total_length: f64,
    phi_to_s: Vec<f64>,
}

pub fn build_domain(spec: &DomainSpec, resolution: usize) -> Result<Domain> {
    Domain::new(spec, resolution)
}

impl Domain {
    pub fn new(spec: &DomainSpec, resolution: usize) -> Result<Self> {
        if resolution < 64 || resolution % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "resolution must be even and at least 64, got {resolution}"
            )));
        }
        spec.validate()?;
        let (shape, rho) = match *spec {
            DomainSpec::Circle { radius } => {
                (Shape::Circle { radius }, FourierSeries::new(radius, vec![], vec![]))
            }
            DomainSpec::Ellipse { a, h } => {
                let b = a * (1.0 - h * h).sqrt();
                let m = ELLIPSE_FFT_SIZE.max(resolution.next_power_of_two());
                let samples: Vec<f64> = (0..m)
                    .map(|j| ellipse_rho_derivatives(a, b, TAU * j as f64 / m as f64, 0)[0])
                    .collect();
                let mut series = FourierSeries::from_samples(&samples);
                // harmonic 1 vanishes by symmetry; drop the rounding residue
                if series.cos.len() > 1 {
                    series.cos[1] = 0.0;
                    series.sin[1] = 0.0;
                }
                (Shape::Ellipse { a, b }, series)
            }
            DomainSpec::Fourier { mean, ref cos, ref sin } => {
                let top = cos.keys().chain(sin.keys()).copied().max().unwrap_or(0) as usize;
                let mut cv = vec![0.0; top + 1];
                let mut sv = vec![0.0; top + 1];
                for (&n, &c) in cos {
                    cv[n as usize] = c;
                }
                for (&n, &c) in sin {
                    sv[n as usize] = c;
                }
                (Shape::Fourier, FourierSeries::new(mean, cv, sv))
            }
        };

        let dense = resolution.max(32 * rho.max_harmonic());
        let (phi_min, min_rho) = (0..dense)
            .map(|j| {
                let phi = TAU * j as f64 / dense as f64;
                (phi, rho.eval(phi))
            })
            .fold((0.0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        if min_rho <= 0.0 {
            return Err(Error::NonConvex { phi: phi_min, min_rho });
        }

        let m = 8192usize.max((64 * rho.max_harmonic()).next_power_of_two());
        let cbrt_samples: Vec<f64> =
            (0..m).map(|j| rho.eval(TAU * j as f64 / m as f64).cbrt()).collect();
        let rho_cbrt = FourierSeries::from_samples(&cbrt_samples);

        let total_length = TAU * rho.mean;
        let phi_to_s =
            (0..=resolution).map(|j| rho.primitive(TAU * j as f64 / resolution as f64)).collect();
        Ok(Self { spec: spec.clone(), shape, rho, rho_cbrt, total_length, phi_to_s })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Perimeter `ℓ₀`.
    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn rho_series(&self) -> &FourierSeries {
        &self.rho
    }

    pub fn resolution(&self) -> usize {
        self.phi_to_s.len() - 1
    }

    pub fn rho(&self, phi: f64) -> f64 {
        match self.shape {
            Shape::Circle { radius } => radius,
            Shape::Ellipse { a, b } => ellipse_rho_derivatives(a, b, phi, 0)[0],
            Shape::Fourier => self.rho.eval(phi),
        }
    }

    /// `[ρ, ρ', …, ρ^{(order)}]` at `φ`, exact.
    pub fn rho_derivatives(&self, phi: f64, order: usize) -> Vec<f64> {
        match self.shape {
            Shape::Circle { radius } => {
                let mut v = vec![0.0; order + 1];
                v[0] = radius;
                v
            }
            Shape::Ellipse { a, b } => ellipse_rho_derivatives(a, b, phi, order),
            Shape::Fourier => (0..=order).map(|j| self.rho.derivative(phi, j)).collect(),
        }
    }

    /// Boundary point at tangent angle `φ` (any real).
    pub fn point_at(&self, phi: f64) -> (f64, f64) {
        match self.shape {
            Shape::Circle { radius } => (radius * phi.sin(), radius * (1.0 - phi.cos())),
            Shape::Ellipse { a, b } => {
                let (x, y) = ellipse_point_by_normal(a, b, phi);
                (y, a - x)
            }
            Shape::Fourier => self.rho.moment_primitives(phi),
        }
    }

    /// Unit tangent at `φ`.
    pub fn tangent_at(&self, phi: f64) -> (f64, f64) {
        let (s, c) = phi.sin_cos();
        (c, s)
    }

    /// Lifted arc length `s(φ)` for any real `φ`, with `s(φ + 2π) = s(φ) + ℓ₀`.
    pub fn s_of_phi(&self, phi: f64) -> f64 {
        self.rho.primitive(phi)
    }

    /// Inverse of [`Domain::s_of_phi`] on the whole real line.
    pub fn phi_of_s(&self, s: f64) -> f64 {
        let turns = (s / self.total_length).floor();
        let r = s - turns * self.total_length;
        let n = self.resolution();
        let j = self.phi_to_s.partition_point(|&v| v <= r).clamp(1, n) - 1;
        let h = TAU / n as f64;
        let (mut lo, mut hi) = (h * j as f64, h * (j + 1) as f64);
        let (s_lo, s_hi) = (self.phi_to_s[j], self.phi_to_s[j + 1]);
        let mut phi = lo + h * (r - s_lo) / (s_hi - s_lo);
        for _ in 0..60 {
            let f = self.rho.primitive(phi) - r;
            if f > 0.0 {
                hi = phi;
            } else {
                lo = phi;
            }
            let step = f / self.rho.eval(phi);
            let mut next = phi - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - phi).abs() <= 1e-15 * (1.0 + phi.abs());
            phi = next;
            if done {
                break;
            }
        }
        phi + TAU * turns
    }

    pub fn arclength_of_phi(&self, phi: f64) -> Result<f64> {
        if !(-1e-12..=TAU + 1e-12).contains(&phi) {
            return Err(Error::OutOfRange { what: "phi", value: phi, lo: 0.0, hi: TAU });
        }
        Ok(self.s_of_phi(phi))
    }

    pub fn phi_of_arclength(&self, s: f64) -> Result<f64> {
        let l = self.total_length;
        if !(-1e-12 * l..=l * (1.0 + 1e-12)).contains(&s) {
            return Err(Error::OutOfRange { what: "s", value: s, lo: 0.0, hi: l });
        }
        if s >= l {
            return Ok(TAU);
        }
        Ok(self.phi_of_s(s.max(0.0)))
    }

    /// `(k, dk/ds, d²k/ds², d³k/ds³)` at tangent angle `φ`.
    pub fn curvature_jets_at_phi(&self, phi: f64) -> [f64; 4] {
        let rho = Jet::from_derivatives(&self.rho_derivatives(phi, 3));
        let k = rho.recip();
        let mut out = [0.0; 4];
        let mut cur = k.clone();
        for slot in out.iter_mut() {
            *slot = cur.value();
            if cur.order() == 0 {
                break;
            }
            // d/ds = k d/dφ
            let d = cur.derivative();
            cur = d.mul(&k.truncate(d.order()));
        }
        out
    }

    /// `(k, dk/ds, d²k/ds², d³k/ds³)` at arc length `s`.
    pub fn curvature_jets(&self, s: f64) -> [f64; 4] {
        self.curvature_jets_at_phi(self.phi_of_s(s))
    }

    /// `∫_0^{2π} ρ^{1/3} dφ`, the Lazutkin perimeter.
    pub fn lazutkin_perimeter(&self) -> f64 {
        TAU * self.rho_cbrt.mean
    }

    /// Unreduced Lazutkin coordinate `C⁻¹ ∫_0^φ ρ^{1/3}`, increasing by 1 per turn.
    pub fn lazutkin_x_lifted(&self, phi: f64) -> f64 {
        self.rho_cbrt.primitive(phi) / self.lazutkin_perimeter()
    }

    /// Reference circle check used by verification suites.
    pub fn is_circle(&self) -> bool {
        self.spec.is_circle()
    }
}
