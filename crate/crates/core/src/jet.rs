//! Truncated Taylor jets `f(x0 + t) = sum_j c_j t^j`, used to get exact
//! derivatives of closed-form radius-of-curvature functions and of the
//! curvature expressed in arc length.

use crate::real::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<R: Real> {
    coeffs: Vec<R>,
}

impl<R: Real> Jet<R> {
    pub fn constant(value: R, order: usize) -> Self {
        let mut coeffs = vec![R::zero(); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// Build a jet from derivative values `f, f', f'', ...`.
    pub fn from_derivatives(derivs: &[R]) -> Self {
        let mut fact = R::one();
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                if j > 1 {
                    fact *= R::from_f64(j as f64);
                }
                d / fact
            })
            .collect();
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> R {
        self.coeffs[0]
    }

    /// `f^{(j)}(x0)` for `j = 0..=order`.
    pub fn derivatives(&self) -> Vec<R> {
        let mut fact = R::one();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if j > 1 {
                    fact *= R::from_f64(j as f64);
                }
                c * fact
            })
            .collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self { coeffs: self.coeffs[..=order.min(self.order())].to_vec() }
    }

    /// d/dx, which lowers the order by one.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::constant(R::zero(), 0);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|j| self.coeffs[j] * R::from_f64(j as f64))
            .collect();
        Self { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum())
            .collect();
        Self { coeffs }
    }

    pub fn scale(&self, s: R) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self { coeffs: (0..=n).map(|j| self.coeffs[j] + other.coeffs[j]).collect() }
    }

    /// `f^alpha` for `f(x0) > 0`, via the recurrence from `f h' = alpha f' h`.
    pub fn powf(&self, alpha: R) -> Self {
        let f = &self.coeffs;
        let n = self.order();
        let mut h = vec![R::zero(); n + 1];
        h[0] = f[0].powf(alpha);
        for k in 1..=n {
            let mut acc = R::zero();
            for j in 1..=k {
                let w = alpha * R::from_f64(j as f64) - R::from_f64((k - j) as f64);
                acc += w * f[j] * h[k - j];
            }
            h[k] = acc / (R::from_f64(k as f64) * f[0]);
        }
        Self { coeffs: h }
    }

    pub fn recip(&self) -> Self {
        self.powf(-R::one())
    }
}
