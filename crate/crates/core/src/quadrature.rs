//! One-dimensional rules and compensated accumulation.
//!
//! Gauss-Legendre and Gauss-Hermite nodes come from `gauss-quad`; everything
//! here just rescales them and keeps sums reproducible.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = KahanSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*x));
        }
        acc.value()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let mut acc = ComplexSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(f(*x) * *w);
        }
        acc.value()
    }
}

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).expect("nonzero")
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule1d {
    let rule = GaussLegendre::new(nz(n));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let (nodes, weights) = rule
        .as_node_weight_pairs()
        .iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .unzip();
    Rule1d { nodes, weights }
}

/// Gauss-Hermite rule for `∫ f(x) e^{-x²/(2s²)} dx`, returned with the
/// Gaussian folded *out* of the weights: `Σ w_i f(x_i)` approximates the
/// plain integral `∫ f(x) dx` for `f` that carries its own Gaussian decay of
/// scale `s`.
pub fn gauss_hermite_scaled(n: usize, s: f64) -> Rule1d {
    let rule = GaussHermite::new(nz(n));
    let c = std::f64::consts::SQRT_2 * s;
    let (nodes, weights) = rule
        .as_node_weight_pairs()
        .iter()
        .map(|(x, w)| (c * x, c * w * (x * x).exp()))
        .unzip();
    Rule1d { nodes, weights }
}

/// Periodic trapezoid rule with `n` nodes on `[a, a + period)`.
pub fn trapezoid_periodic(n: usize, a: f64, period: f64) -> Rule1d {
    let h = period / n as f64;
    Rule1d {
        nodes: (0..n).map(|k| a + h * k as f64).collect(),
        weights: vec![h; n],
    }
}

/// Normalized trapezoid rule on the circle `[0, 2π)`: weights sum to one.
pub fn circle_rule(n: usize) -> Rule1d {
    Rule1d {
        nodes: (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
        weights: vec![1.0 / n as f64; n],
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn compensated_sum_complex(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let mut acc = ComplexSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Evaluates `f` on every index in parallel, then reduces sequentially in
/// index order so the result does not depend on the thread schedule.
pub fn par_weighted_sum<F>(weights: &[f64], f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let values: Vec<Complex64> = (0..weights.len())
        .into_par_iter()
        .map(|i| f(i) * weights[i])
        .collect();
    compensated_sum_complex(values)
}

pub fn par_weighted_sum_real<F>(weights: &[f64], f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let values: Vec<f64> = (0..weights.len())
        .into_par_iter()
        .map(|i| f(i) * weights[i])
        .collect();
    compensated_sum(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(5, 0.0, 2.0);
        assert_abs_diff_eq!(r.integrate(|x| x.powi(7)), 32.0, epsilon = 1e-12);
    }

    #[test]
    fn hermite_scaled_integrates_gaussian() {
        let s = 0.7;
        let r = gauss_hermite_scaled(40, s);
        let exact = (2.0 * PI).sqrt() * s;
        assert_abs_diff_eq!(
            r.integrate(|x| (-x * x / (2.0 * s * s)).exp()),
            exact,
            epsilon = 1e-12
        );
    }

    #[test]
    fn trapezoid_kills_fourier_modes() {
        let r = circle_rule(16);
        let z = r.integrate_complex(|x| Complex64::from_polar(1.0, 3.0 * x));
        assert!(z.norm() < 1e-14);
        assert_abs_diff_eq!(r.integrate(|_| 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert_abs_diff_eq!(compensated_sum(v), 4e-16, epsilon = 1e-30);
    }
}
