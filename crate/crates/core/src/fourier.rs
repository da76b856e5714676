//! Real trigonometric series `f(φ) = mean + Σ_{n≥2} (c_n cos nφ + s_n sin nφ)`
//! with the exact primitives needed for arc length and boundary position.

use rustfft::{num_complex::Complex, FftPlanner};

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    pub mean: f64,
    /// `cos[n]`, `sin[n]` hold the coefficients of harmonic `n`; index 0 is unused.
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let len = cos.len().max(sin.len()).max(1);
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(len, 0.0);
        sin.resize(len, 0.0);
        cos[0] = 0.0;
        sin[0] = 0.0;
        Self { mean, cos, sin }
    }

    /// Coefficients from `m` uniform samples `f(2πj/m)` by FFT; the tail at
    /// rounding level is trimmed.
    pub fn from_samples(samples: &[f64]) -> Self {
        let m = samples.len();
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let scale = 2.0 / m as f64;
        let mean = buf[0].re / m as f64;
        let top = m / 2 - 1;
        let mut cos: Vec<f64> = (0..=top).map(|n| buf[n].re * scale).collect();
        let mut sin: Vec<f64> = (0..=top).map(|n| -buf[n].im * scale).collect();
        let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let floor = 8.0 * f64::EPSILON * peak;
        let last = (1..=top).rev().find(|&n| cos[n].abs().max(sin[n].abs()) > floor).unwrap_or(0);
        cos.truncate(last + 1);
        sin.truncate(last + 1);
        Self::new(mean, cos, sin)
    }

    pub fn max_harmonic(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.derivative(phi, 0)
    }

    /// `f^{(j)}(φ)`.
    pub fn derivative(&self, phi: f64, j: usize) -> f64 {
        let shift = j as f64 * std::f64::consts::FRAC_PI_2;
        let mut acc = if j == 0 { self.mean } else { 0.0 };
        for n in 2..self.cos.len() {
            let nf = n as f64;
            let (s, c) = (nf * phi + shift).sin_cos();
            acc += nf.powi(j as i32) * (self.cos[n] * c + self.sin[n] * s);
        }
        acc
    }

    /// `∫_0^φ f`.
    pub fn primitive(&self, phi: f64) -> f64 {
        let mut acc = self.mean * phi;
        for n in 2..self.cos.len() {
            let nf = n as f64;
            let (s, c) = (nf * phi).sin_cos();
            acc += (self.cos[n] * s + self.sin[n] * (1.0 - c)) / nf;
        }
        acc
    }

    /// `(∫_0^φ f cos, ∫_0^φ f sin)`; closed for every φ = 2πk because harmonic 1 is absent.
    pub fn moment_primitives(&self, phi: f64) -> (f64, f64) {
        let (s1, c1) = phi.sin_cos();
        let mut x = self.mean * s1;
        let mut y = self.mean * (1.0 - c1);
        for n in 2..self.cos.len() {
            let (cn, sn) = (self.cos[n], self.sin[n]);
            if cn == 0.0 && sn == 0.0 {
                continue;
            }
            let p = (n + 1) as f64;
            let m = (n - 1) as f64;
            let (sp, cp) = (p * phi).sin_cos();
            let (sm, cm) = (m * phi).sin_cos();
            x += 0.5 * cn * (sp / p + sm / m) + 0.5 * sn * ((1.0 - cp) / p + (1.0 - cm) / m);
            y += 0.5 * cn * ((1.0 - cp) / p - (1.0 - cm) / m) + 0.5 * sn * (sm / m - sp / p);
        }
        (x, y)
    }

    /// Shift the argument: returns `g(φ) = f(φ + φ0)`.
    pub fn shifted(&self, phi0: f64) -> Self {
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        for n in 2..cos.len() {
            let (s, c) = (n as f64 * phi0).sin_cos();
            let (a, b) = (self.cos[n], self.sin[n]);
            cos[n] = a * c + b * s;
            sin[n] = b * c - a * s;
        }
        Self { mean: self.mean, cos, sin }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gauss;
    use std::f64::consts::PI;

    fn sample() -> FourierSeries {
        FourierSeries::new(1.0, vec![0.0, 0.0, 0.1, -0.03], vec![0.0, 0.0, 0.02, 0.0, 0.01])
    }

    #[test]
    fn fft_recovers_coefficients() {
        let f = sample();
        let m = 64;
        let samples: Vec<f64> = (0..m).map(|j| f.eval(2.0 * PI * j as f64 / m as f64)).collect();
        let g = FourierSeries::from_samples(&samples);
        assert!((g.mean - 1.0).abs() < 1e-15);
        assert_eq!(g.max_harmonic(), 4);
        for n in 2..=4 {
            assert!((g.cos[n] - f.cos[n]).abs() < 1e-15);
            assert!((g.sin[n] - f.sin[n]).abs() < 1e-15);
        }
    }

    #[test]
    fn primitives_match_quadrature() {
        let f = sample();
        for phi in [0.3, 2.0, 5.5] {
            let q = adaptive_gauss(0.0, phi, 1e-15, &mut |t| f.eval(t)).unwrap();
            assert!((f.primitive(phi) - q).abs() < 1e-13);
            let qx = adaptive_gauss(0.0, phi, 1e-15, &mut |t| f.eval(t) * t.cos()).unwrap();
            let qy = adaptive_gauss(0.0, phi, 1e-15, &mut |t| f.eval(t) * t.sin()).unwrap();
            let (x, y) = f.moment_primitives(phi);
            assert!((x - qx).abs() < 1e-13 && (y - qy).abs() < 1e-13);
        }
        let (x, y) = f.moment_primitives(2.0 * PI);
        assert!(x.abs() < 1e-14 && y.abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = sample();
        let h = 1e-4;
        for j in 0..3 {
            let fd = (f.derivative(1.1 + h, j) - f.derivative(1.1 - h, j)) / (2.0 * h);
            assert!((fd - f.derivative(1.1, j + 1)).abs() < 1e-6);
        }
    }

    #[test]
    fn shift_is_translation() {
        let f = sample();
        let g = f.shifted(0.7);
        for phi in [0.0, 1.0, 4.0] {
            assert!((g.eval(phi) - f.eval(phi + 0.7)).abs() < 1e-14);
        }
    }
}
