//! `k_f(g,h) = Σ_γ f(g⁻¹γh)` for finite lattices in SU(2) and for `2πℤⁿ`
//! acting on `ℝⁿ`, and Poincaré series on `2πℤ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::FiniteLattice;
use crate::error::{EquiheatError, Result};
use crate::group::{GroupElement, GroupModel, Quaternion};
use crate::heat::HeatKernelSeries;
use crate::quadrature::KahanSum;

/// Largest radius of the doubling schedule.
const MAX_RADIUS: i64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Periodized {
    pub value: f64,
    pub tail_bound: f64,
    /// Lattice radius of the partial sum; `None` for finite `Γ`.
    pub radius: Option<i64>,
    pub terms: usize,
}

/// `|f(x)| ≤ amplitude · e^{-|x|²/(4t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMajorant {
    pub amplitude: f64,
    pub t: f64,
}

impl GaussianMajorant {
    /// The Euclidean heat kernel `(4πt)^{-n/2} e^{-|x|²/4t}`.
    pub fn heat(t: f64, dim: usize) -> Self {
        GaussianMajorant {
            amplitude: (4.0 * PI * t).powf(-(dim as f64) / 2.0),
            t,
        }
    }
}

/// `Σ_{γ∈Γ} p_t(g⁻¹γh)` with the SU(2) heat kernel.
pub fn kernel_periodization_finite(
    lattice: &FiniteLattice,
    t: f64,
    g: &Quaternion,
    h: &Quaternion,
) -> Result<Periodized> {
    let model = GroupModel::su2();
    let p = HeatKernelSeries::new(&model, t)?;
    let gi = g.inverse();
    let mut acc = KahanSum::default();
    for gamma in &lattice.elements {
        acc.add(p.eval(&GroupElement::Quat(gi * *gamma * *h)));
    }
    Ok(Periodized {
        value: acc.value(),
        tail_bound: lattice.order() as f64 * p.tail_bound,
        radius: None,
        terms: lattice.order(),
    })
}

/// Partial Gaussian sum `Σ_{|k|≤R} e^{-(θ+2πk)²/4t}` and the bound on the rest.
fn gaussian_1d(theta: f64, t: f64, r: i64) -> (f64, f64) {
    let mut acc = KahanSum::default();
    for k in -r..=r {
        let x = theta + 2.0 * PI * k as f64;
        acc.add((-x * x / (4.0 * t)).exp());
    }
    // For |k| > R, |θ+2πk| ≥ X + 2π(|k|−R−1) with X = 2π(R+1) − |θ|; convexity
    // of x² gives a geometric majorant on each side.
    let x = 2.0 * PI * (r + 1) as f64 - theta.abs();
    let tail = 2.0 * (-x * x / (4.0 * t)).exp() / (1.0 - (-PI * x / t).exp());
    (acc.value(), tail)
}

fn torus_bound(theta: &[f64], maj: &GaussianMajorant, r: i64) -> f64 {
    let parts: Vec<(f64, f64)> = theta.iter().map(|th| gaussian_1d(*th, maj.t, r)).collect();
    let full: f64 = parts.iter().map(|(p, t)| p + t).product();
    let inner: f64 = parts.iter().map(|(p, _)| p).product();
    maj.amplitude * (full - inner).max(0.0)
}

/// `Σ_{k∈ℤⁿ} f(θ + 2πk)` for `n ∈ {1, 2}` with a certified Gaussian tail.
/// Radii double from 1 until the tail bound is below `tol`.
pub fn kernel_periodization_torus<F>(
    f: F,
    majorant: GaussianMajorant,
    theta: &[f64],
    tol: f64,
) -> Result<Periodized>
where
    F: Fn(&[f64]) -> f64,
{
    if theta.is_empty() || theta.len() > 2 {
        return Err(EquiheatError::Domain(format!(
            "torus lattices of rank {} are not bundled",
            theta.len()
        )));
    }
    if !(majorant.t > 0.0) || !(majorant.amplitude >= 0.0) || !(tol > 0.0) {
        return Err(EquiheatError::Domain(
            "majorant needs t > 0, amplitude ≥ 0, tol > 0".into(),
        ));
    }
    // Reduce θ into [-π, π]; the lattice sum is invariant.
    let theta: Vec<f64> = theta
        .iter()
        .map(|x| x - 2.0 * PI * (x / (2.0 * PI)).round())
        .collect();
    let mut r = 1i64;
    let mut history = Vec::new();
    loop {
        let tail = torus_bound(&theta, &majorant, r);
        history.push((r, tail));
        if tail <= tol {
            let mut acc = KahanSum::default();
            let mut terms = 0usize;
            let mut x = theta.clone();
            if theta.len() == 1 {
                for k in -r..=r {
                    x[0] = theta[0] + 2.0 * PI * k as f64;
                    acc.add(f(&x));
                    terms += 1;
                }
            } else {
                for k1 in -r..=r {
                    for k2 in -r..=r {
                        x[0] = theta[0] + 2.0 * PI * k1 as f64;
                        x[1] = theta[1] + 2.0 * PI * k2 as f64;
                        acc.add(f(&x));
                        terms += 1;
                    }
                }
            }
            return Ok(Periodized {
                value: acc.value(),
                tail_bound: tail,
                radius: Some(r),
                terms,
            });
        }
        if r >= MAX_RADIUS {
            let delta = critical_exponent(theta.len(), r);
            return Err(EquiheatError::Convergence(format!(
                "tail bound {tail:e} above {tol:e} at radius {r}; critical exponent probe δ ≈ {delta:.3}"
            )));
        }
        r *= 2;
    }
}

/// Slope of `ln N(R)` against `R`, `N(R) = #{k ∈ ℤⁿ : 2π|k| ≤ R}`, over the
/// radii `R = 2π·2^i`, `2^i ≤ rmax`.
fn critical_exponent(dim: usize, rmax: i64) -> f64 {
    let mut pts = Vec::new();
    let mut m = 1i64;
    while m <= rmax {
        let n = match dim {
            1 => (2 * m + 1) as f64,
            _ => (-m..=m)
                .map(|k1| {
                    let s = ((m * m - k1 * k1) as f64).sqrt().floor() as i64;
                    (2 * s + 1) as f64
                })
                .sum(),
        };
        pts.push((2.0 * PI * m as f64, n.ln()));
        m *= 2;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    crate::oscillatory::ls_slope(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareRow {
    pub s: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
    /// `coth(πs)` when `p = q`.
    pub oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub p: f64,
    pub q: f64,
    pub rows: Vec<PoincareRow>,
    /// Fitted slope of `ln N(R)` against `R`.
    pub critical_exponent: f64,
}

/// `P(s, p, q) = Σ_{k∈ℤ} e^{-s|p − q − 2πk|}` on `2πℤ` acting on `ℝ`.
pub fn poincare_probe(s_values: &[f64], p: f64, q: f64) -> Result<PoincareReport> {
    if s_values.is_empty() || s_values.iter().any(|s| !(*s > 0.0)) {
        return Err(EquiheatError::Domain("Poincaré probe needs s > 0".into()));
    }
    let d0 = p - q;
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let ratio = (-2.0 * PI * s).exp();
        let mut acc = KahanSum::default();
        let mut terms = 0usize;
        let mut r = 0i64;
        let tail = loop {
            let ks: &[i64] = if r == 0 { &[0] } else { &[r, -r] };
            for &k in ks {
                acc.add((-s * (d0 - 2.0 * PI * k as f64).abs()).exp());
                terms += 1;
            }
            // Beyond radius r each side is geometric with ratio e^{-2πs}.
            let x = 2.0 * PI * (r + 1) as f64 - d0.abs();
            let tail = 2.0 * (-s * x).exp() / (1.0 - ratio);
            if tail <= 1e-16 * acc.value() {
                break tail;
            }
            if r >= 100_000_000 {
                return Err(EquiheatError::Convergence(format!(
                    "Poincaré series at s = {s} not converged at radius {r}"
                )));
            }
            r += 1;
        };
        rows.push(PoincareRow {
            s,
            value: acc.value(),
            tail_bound: tail,
            terms,
            oracle: (d0 == 0.0).then(|| 1.0 / (PI * s).tanh()),
        });
    }
    Ok(PoincareReport {
        p,
        q,
        rows,
        critical_exponent: critical_exponent(1, MAX_RADIUS),
    })
}
