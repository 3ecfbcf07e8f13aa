use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::TraceCurve;
use crate::error::{EquiheatError, Result};

/// Small-time models for a trace curve `y(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// Weighted log-log least squares for `c t^{-α}`.
    PowerLaw,
    /// `t^{-α}(c₀ + c₁ t^{1/2} + c₂ t + c₃ t^{3/2})`, plus `c_L t^{-α+1/2} log^p(1/t)` when
    /// `log_power = p > 0`; `α` by variable projection.
    WithCorrections { log_power: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub model: FitModel,
    pub exponent: f64,
    pub exponent_err: f64,
    pub coefficient: f64,
    pub coefficient_err: f64,
    /// Remaining linear coefficients in basis order.
    pub corrections: Vec<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub dof: usize,
    /// Covariance of `(α, c₀, c₁, ...)`, scaled by `rss / dof`.
    pub covariance: Vec<Vec<f64>>,
}

const ALPHA_RANGE: (f64, f64) = (-0.5, 2.5);

fn sigmas(curve: &TraceCurve) -> Vec<f64> {
    curve
        .points
        .iter()
        .map(|p| p.bound.max(1e-12 * p.value.abs()).max(f64::MIN_POSITIVE))
        .collect()
}

fn basis(alpha: f64, t: f64, log_power: u32) -> Vec<f64> {
    let base = t.powf(-alpha);
    let mut b = vec![base, base * t.sqrt(), base * t, base * t * t.sqrt()];
    if log_power > 0 {
        b.push(base * t.sqrt() * (1.0 / t).ln().powi(log_power as i32));
    }
    b
}

/// Weighted linear least squares with column equilibration.
fn solve_linear(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let mut scaled = a.clone();
    let scales: Vec<f64> = (0..a.ncols())
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let x = svd
        .solve(y, 1e-14)
        .map_err(|e| EquiheatError::Fit(format!("least squares failed: {e}")))?;
    let coef = DVector::from_iterator(x.len(), x.iter().zip(&scales).map(|(c, s)| c / s));
    let r = a * &coef - y;
    Ok((coef, r.norm_squared()))
}

fn design(ts: &[f64], sig: &[f64], alpha: f64, log_power: u32) -> DMatrix<f64> {
    let p = basis(alpha, 1.0, log_power).len();
    DMatrix::from_fn(ts.len(), p, |i, j| {
        basis(alpha, ts[i], log_power)[j] / sig[i]
    })
}

fn covariance(j: &DMatrix<f64>, s2: f64) -> Vec<Vec<f64>> {
    let jtj = j.transpose() * j;
    let inv = jtj
        .clone()
        .pseudo_inverse(1e-14 * jtj.norm())
        .unwrap_or_else(|_| DMatrix::zeros(jtj.nrows(), jtj.ncols()));
    (0..inv.nrows())
        .map(|a| (0..inv.ncols()).map(|b| s2 * inv[(a, b)]).collect())
        .collect()
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn fit_corrections(curve: &TraceCurve, log_power: u32) -> Result<PowerLawFit> {
    let ts = curve.ts();
    let sig = sigmas(curve);
    let y = DVector::from_iterator(
        ts.len(),
        curve.points.iter().zip(&sig).map(|(p, s)| p.value / s),
    );
    let p = basis(0.0, 1.0, log_power).len() + 1;
    if ts.len() <= p {
        return Err(EquiheatError::Fit(format!(
            "{} points cannot determine {p} parameters",
            ts.len()
        )));
    }
    let rss = |alpha: f64| {
        solve_linear(&design(&ts, &sig, alpha, log_power), &y)
            .map(|r| r.1)
            .unwrap_or(f64::INFINITY)
    };
    let steps = 300;
    let h = (ALPHA_RANGE.1 - ALPHA_RANGE.0) / steps as f64;
    let scan: Vec<(f64, f64)> = (0..=steps)
        .map(|k| {
            let a = ALPHA_RANGE.0 + h * k as f64;
            (a, rss(a))
        })
        .collect();
    // Exponents half an integer apart can fit equally well with a vanishing
    // leading term; keep local minima whose leading term is present.
    let (i_min, t_min) =
        ts.iter().enumerate().fold(
            (0, f64::INFINITY),
            |b, (i, t)| if *t < b.1 { (i, *t) } else { b },
        );
    let y_min = curve.points[i_min].value.abs();
    let leading = |alpha: f64| {
        solve_linear(&design(&ts, &sig, alpha, log_power), &y)
            .map(|(c, _)| (c[0] * t_min.powf(-alpha)).abs() >= 1e-3 * y_min)
            .unwrap_or(false)
    };
    let is_min = |k: usize| {
        let r = scan[k].1;
        (k == 0 || r <= scan[k - 1].1) && (k == steps || r <= scan[k + 1].1)
    };
    let best = (0..=steps)
        .filter(|&k| scan[k].1.is_finite() && is_min(k) && leading(scan[k].0))
        .min_by(|&a, &b| scan[a].1.total_cmp(&scan[b].1))
        .or_else(|| (0..=steps).min_by(|&a, &b| scan[a].1.total_cmp(&scan[b].1)))
        .map(|k| scan[k].0)
        .unwrap_or(0.0);
    let alpha = golden(rss, best - h, best + h, 1e-12);
    let a = design(&ts, &sig, alpha, log_power);
    let (coef, rss_val) = solve_linear(&a, &y)?;
    // Jacobian in (α, c): ∂/∂α of the model is -ln t times it.
    let model = &a * &coef;
    let mut j = DMatrix::zeros(ts.len(), p);
    for i in 0..ts.len() {
        j[(i, 0)] = -ts[i].ln() * model[i];
    }
    j.view_mut((0, 1), (ts.len(), p - 1)).copy_from(&a);
    let dof = ts.len() - p;
    let cov = covariance(&j, rss_val / dof as f64);
    Ok(PowerLawFit {
        model: FitModel::WithCorrections { log_power },
        exponent: alpha,
        exponent_err: cov[0][0].max(0.0).sqrt(),
        coefficient: coef[0],
        coefficient_err: cov[1][1].max(0.0).sqrt(),
        corrections: coef.iter().skip(1).copied().collect(),
        rss: rss_val,
        dof,
        covariance: cov,
    })
}

fn fit_power_law(curve: &TraceCurve) -> Result<PowerLawFit> {
    let n = curve.points.len();
    if n < 3 {
        return Err(EquiheatError::Fit(format!(
            "{n} points cannot determine a power law"
        )));
    }
    if curve.points.iter().any(|p| !(p.value > 0.0)) {
        return Err(EquiheatError::Fit(
            "log-log fit needs positive values".into(),
        ));
    }
    let sig = sigmas(curve);
    let a = DMatrix::from_fn(n, 2, |i, j| {
        let w = curve.points[i].value / sig[i];
        if j == 0 {
            w
        } else {
            -curve.points[i].t.ln() * w
        }
    });
    let y = DVector::from_iterator(
        n,
        curve
            .points
            .iter()
            .zip(&sig)
            .map(|(p, s)| p.value.ln() * p.value / s),
    );
    let (x, rss) = solve_linear(&a, &y)?;
    let cov = covariance(&a, rss / (n - 2) as f64);
    let c = x[0].exp();
    Ok(PowerLawFit {
        model: FitModel::PowerLaw,
        exponent: x[1],
        exponent_err: cov[1][1].max(0.0).sqrt(),
        coefficient: c,
        coefficient_err: c * cov[0][0].max(0.0).sqrt(),
        corrections: Vec::new(),
        rss,
        dof: n - 2,
        covariance: vec![vec![cov[1][1], cov[1][0]], vec![cov[0][1], cov[0][0]]],
    })
}

/// Fit the small-time behaviour of a trace curve.
pub fn fit_small_time(curve: &TraceCurve, model: FitModel) -> Result<PowerLawFit> {
    match model {
        FitModel::PowerLaw => fit_power_law(curve),
        FitModel::WithCorrections { log_power } => fit_corrections(curve, log_power),
    }
}

/// Smallest `C` with `|y(t) - c t^{-α}| ≤ C t^{-α+1/2} log^{Λ-1}(1/t)` on the
/// grid.
pub fn remainder_envelope(curve: &TraceCurve, fit: &PowerLawFit, lambda: usize) -> f64 {
    curve
        .points
        .iter()
        .map(|p| {
            let lead = fit.coefficient * p.t.powf(-fit.exponent);
            let scale = p.t.powf(-fit.exponent + 0.5)
                * (1.0 / p.t).ln().powi(lambda.saturating_sub(1) as i32);
            (p.value - lead).abs() / scale
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::{default_grid, trace_curve, TracePoint};
    use super::*;
    use crate::group::HalfInt;
    use crate::space::{SpaceKind, SpaceModel};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn synthetic(f: impl Fn(f64) -> f64) -> TraceCurve {
        TraceCurve {
            space: SpaceKind::Torus1,
            sigma: HalfInt::from_int(0),
            points: default_grid()
                .into_iter()
                .map(|t| TracePoint {
                    t,
                    value: f(t),
                    bound: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn recovers_synthetic_exponent() {
        let c = synthetic(|t| 2.5 * t.powf(-0.75) * (1.0 - 0.3 * t.sqrt() + 0.1 * t));
        let f = fit_small_time(&c, FitModel::WithCorrections { log_power: 0 }).unwrap();
        assert_abs_diff_eq!(f.exponent, 0.75, epsilon = 1e-8);
        assert_abs_diff_eq!(f.coefficient, 2.5, epsilon = 1e-7);
    }

    #[test]
    fn constant_curve_has_zero_exponent() {
        for c in [synthetic(|_| 1.0), synthetic(|t| (-4.0 * t).exp())] {
            let f = fit_small_time(&c, FitModel::WithCorrections { log_power: 0 }).unwrap();
            assert!(f.exponent.abs() < 1e-3, "{f:?}");
            assert_abs_diff_eq!(f.coefficient, 1.0, epsilon = 1e-2);
        }
    }

    #[test]
    fn power_law_on_exact_monomial() {
        let c = synthetic(|t| 3.0 * t.powf(-1.5));
        let f = fit_small_time(&c, FitModel::PowerLaw).unwrap();
        assert_abs_diff_eq!(f.exponent, 1.5, epsilon = 1e-10);
        assert_abs_diff_eq!(f.coefficient, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn sphere_weights() {
        let s = SpaceModel::s2();
        for m in 0..3 {
            let curve = trace_curve(&s, HalfInt::from_int(m), &default_grid()).unwrap();
            for lp in [0, 1] {
                let f =
                    fit_small_time(&curve, FitModel::WithCorrections { log_power: lp }).unwrap();
                assert!((f.exponent - 0.5).abs() < 0.02, "m={m} lp={lp}: {f:?}");
                assert!(
                    (f.coefficient / (PI.sqrt() / 2.0) - 1.0).abs() < 0.02,
                    "m={m}: {f:?}"
                );
            }
            let f = fit_small_time(&curve, FitModel::WithCorrections { log_power: 1 }).unwrap();
            assert!(remainder_envelope(&curve, &f, 2).is_finite());
        }
    }

    #[test]
    fn too_few_points() {
        let mut c = synthetic(|t| t);
        c.points.truncate(3);
        assert!(matches!(
            fit_small_time(&c, FitModel::WithCorrections { log_power: 0 }),
            Err(EquiheatError::Fit(_))
        ));
    }
}
