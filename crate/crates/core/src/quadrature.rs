//! Quadrature rules: periodic trapezoid for smooth 2π-periodic integrands and
//! Gauss–Legendre (fixed and adaptive) for finite intervals.

use crate::real::Real;

/// `∫_0^{2π} f` by the N-point periodic trapezoidal rule.
pub fn periodic_trapezoid<R: Real>(n: usize, mut f: impl FnMut(R) -> R) -> R {
    let two_pi = R::pi() * R::from_f64(2.0);
    let h = two_pi / R::from_f64(n as f64);
    let sum: R = (0..n).map(|j| f(h * R::from_f64(j as f64))).sum();
    sum * h
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre<R: Real> {
    nodes: Vec<R>,
    weights: Vec<R>,
}

impl<R: Real> GaussLegendre<R> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = R::from_f64(guess);
            let mut dp = R::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= R::epsilon() * R::from_f64(4.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            nodes.push(x);
            weights.push(R::from_f64(2.0) / ((R::one() - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: R, b: R, mut f: impl FnMut(R) -> R) -> R {
        let half = (b - a) / R::from_f64(2.0);
        let mid = (a + b) / R::from_f64(2.0);
        let s: R = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        s * half
    }

    /// Composite rule over `panels` equal subintervals.
    pub fn integrate_composite(&self, a: R, b: R, panels: usize, mut f: impl FnMut(R) -> R) -> R {
        let h = (b - a) / R::from_f64(panels as f64);
        (0..panels)
            .map(|k| {
                let lo = a + h * R::from_f64(k as f64);
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre<R: Real>(n: usize, x: R) -> (R, R) {
    let mut p0 = R::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = R::from_f64(k as f64);
        let p2 = ((R::from_f64(2.0) * kf - R::one()) * x * p1 - (kf - R::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = R::from_f64(n as f64);
    let d = nf * (x * p1 - p0) / (x * x - R::one());
    (p1, d)
}

/// Adaptive bisection with a 12-point Gauss–Legendre base rule.
/// Returns `None` when the depth budget is exhausted before `tol` is met.
pub fn adaptive_gauss(
    a: f64,
    b: f64,
    tol: f64,
    f: &mut impl FnMut(f64) -> f64,
) -> Option<f64> {
    let rule = GaussLegendre::<f64>::new(12);
    let whole = rule.integrate(a, b, &mut *f);
    adaptive_step(&rule, a, b, whole, tol, 40, f)
}

fn adaptive_step(
    rule: &GaussLegendre<f64>,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    f: &mut impl FnMut(f64) -> f64,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, &mut *f);
    let right = rule.integrate(m, b, &mut *f);
    let refined = left + right;
    if (refined - whole).abs() <= tol.max(4.0 * f64::EPSILON * refined.abs()) {
        return Some(refined);
    }
    if depth == 0 {
        return None;
    }
    let l = adaptive_step(rule, a, m, left, 0.5 * tol, depth - 1, f)?;
    let r = adaptive_step(rule, m, b, right, 0.5 * tol, depth - 1, f)?;
    Some(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::DoubleDouble;

    #[test]
    fn trapezoid_is_spectral_for_periodic() {
        // ∫ exp(cos t) dt = 2π I0(1); I0(1) = 1.2660658777520082
        let v = periodic_trapezoid(32, |t: f64| t.cos().exp());
        assert!((v - 2.0 * std::f64::consts::PI * 1.2660658777520082).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(6);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_double_double() {
        let rule = GaussLegendre::<DoubleDouble>::new(30);
        let v = rule.integrate(DoubleDouble::zero(), DoubleDouble::one(), |x| x.exp());
        let e = DoubleDouble::one().exp() - DoubleDouble::one();
        assert!((v - e).abs().to_f64() < 1e-30);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive_gauss(-1.0, 1.0, 1e-13, &mut |x| 1.0 / (1e-4 + x * x)).unwrap();
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-9 * exact);
    }
}
