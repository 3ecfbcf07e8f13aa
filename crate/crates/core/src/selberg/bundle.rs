//! Bochner-Laplace heat traces on the charge-`n` line bundles over
//! `S² = SU(2)/U(1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{EquiheatError, Result};
use crate::group::{GroupElement, GroupModel, HaarRule, HalfInt, Quaternion, Subgroup};
use crate::heat::{bundle_kernel_with, HeatKernelSeries};
use crate::quadrature::{circle_rule, gauss_legendre, KahanSum};
use crate::space::SpaceKind;
use crate::traces::{
    certified_sum, default_grid, fit_small_time, FitModel, PowerLawFit, TraceCurve, TracePoint,
    TraceValue, DEFAULT_MAX_LEVELS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleLevel {
    pub l: i64,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Spectrum of `Δ_σ` on the charge-`n` bundle: `l(l+1) − n²`, `l ≥ |n|`,
/// multiplicity `2l+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleSpectrum {
    pub charge: i64,
    pub lambda_sigma: f64,
}

impl BundleSpectrum {
    pub fn new(charge: i64) -> Self {
        BundleSpectrum {
            charge,
            lambda_sigma: (charge * charge) as f64,
        }
    }

    pub fn levels(&self, count: usize) -> Vec<BundleLevel> {
        let n = self.charge.abs();
        (n..n + count as i64)
            .map(|l| BundleLevel {
                l,
                eigenvalue: (l * (l + 1) - n * n) as f64,
                multiplicity: (2 * l + 1) as usize,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BundleRoute {
    Spectral,
    Kernel,
}

/// `tr e^{-tΔ_σ}` on the charge-`n` bundle.
pub fn bundle_heat_trace(charge: i64, t: f64, route: BundleRoute) -> Result<TraceValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(EquiheatError::Domain(format!(
            "t must be positive, got {t}"
        )));
    }
    let n = charge.abs();
    match route {
        BundleRoute::Spectral => certified_sum(n as u64, DEFAULT_MAX_LEVELS, |l| {
            let l = l as f64;
            let nn = (n * n) as f64;
            (2.0 * l + 1.0) * (-t * (l * (l + 1.0) - nn)).exp()
        }),
        BundleRoute::Kernel => kernel_route(charge, t),
    }
}

/// Section `s(x)` of `SU(2) → S²` taking the north pole to `x`.
fn section(c: f64, phi: f64) -> Quaternion {
    let theta = c.clamp(-1.0, 1.0).acos();
    Quaternion::from_axis_angle([-phi.sin(), phi.cos(), 0.0], theta)
}

/// `∫_{S²} tr h_t^σ(s(x)⁻¹ s(x)) dA/4π`.
fn kernel_route(charge: i64, t: f64) -> Result<TraceValue> {
    let model = GroupModel::su2();
    let p = HeatKernelSeries::new(&model, t)?;
    let sigma = HalfInt::from_int(charge);
    let cr = gauss_legendre(3, -1.0, 1.0);
    let pr = circle_rule(4);
    let mut acc = KahanSum::default();
    for (c, wc) in cr.nodes.iter().zip(&cr.weights) {
        for (phi, wp) in pr.nodes.iter().zip(&pr.weights) {
            let s = section(*c, *phi);
            let g = GroupElement::Quat(s.inverse() * s);
            let h = bundle_kernel_with(&model, &p, sigma, &g)?;
            acc.add(0.5 * wc * wp * h.re);
        }
    }
    Ok(TraceValue {
        value: acc.value(),
        bound: p.tail_bound * (t * (charge * charge) as f64).exp(),
        levels: p.levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleFit {
    pub charge: i64,
    /// `e^{-tλ_σ} tr e^{-tΔ_σ}` on the grid.
    pub curve: TraceCurve,
    pub fit: PowerLawFit,
}

/// Small-time fit of `e^{-tλ_σ} tr e^{-tΔ_σ}` on `grid` (default `0.1·2^{-k}`).
pub fn bundle_leading_fit(charge: i64, grid: Option<&[f64]>) -> Result<BundleFit> {
    let default = default_grid();
    let grid = grid.unwrap_or(&default);
    let spec = BundleSpectrum::new(charge);
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let v = bundle_heat_trace(charge, t, BundleRoute::Spectral)?;
        let damp = (-t * spec.lambda_sigma).exp();
        points.push(TracePoint {
            t,
            value: damp * v.value,
            bound: damp * v.bound,
        });
    }
    let curve = TraceCurve {
        space: SpaceKind::Sphere2,
        sigma: HalfInt::from_int(charge),
        points,
    };
    let fit = fit_small_time(&curve, FitModel::WithCorrections { log_power: 0 })?;
    Ok(BundleFit { charge, curve, fit })
}

/// Embedding of SU(2) of radius 2 into `ℝ⁴`.
fn embed(q: &Quaternion) -> [f64; 4] {
    [2.0 * q.w, 2.0 * q.x, 2.0 * q.y, 2.0 * q.z]
}

fn quat(g: &GroupElement) -> Quaternion {
    g.quat().expect("SU(2) element")
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fd<F: Fn(f64) -> Quaternion>(curve: F) -> [f64; 4] {
    let h = 1e-6;
    let (a, b) = (embed(&curve(h)), embed(&curve(-h)));
    std::array::from_fn(|i| (a[i] - b[i]) / (2.0 * h))
}

/// `ṽol(Ξ/𝕂)` for `𝕂 = U(1)` acting on `T*SU(2)` by right translation, with
/// the heat fields of left translation: `vol(G) · avg_g ∫_{V(g)^⊥} F̂ / |𝒪_g|`.
/// Returns the value and the change under node refinement.
pub fn bundle_gaussian_volume(nodes: usize) -> Result<(f64, f64)> {
    if nodes < 4 {
        return Err(EquiheatError::Domain(
            "Gaussian volume needs at least 4 nodes".into(),
        ));
    }
    let eval = |n: usize| -> Result<f64> {
        let model = GroupModel::su2();
        let haar = HaarRule::euler(&model, n, n, n);
        let circle = Subgroup::Circle;
        let period = Subgroup::circle_period(&model);
        let fibre = gauss_legendre(96, -8.0, 8.0);
        let mut acc = KahanSum::default();
        for (g, w) in haar.nodes.iter().zip(&haar.weights) {
            let q = quat(g);
            let v = fd(|s| q * quat(&circle.element(&model, s)));
            let heat: Vec<[f64; 4]> = (0..3)
                .map(|i| {
                    fd(|s| {
                        let mut z = [0.0; 3];
                        z[i] = s;
                        quat(&model.exp(&z).expect("three coordinates")) * q
                    })
                })
                .collect();
            // Orthonormal basis of span(heat) ∩ V^⊥ by Gram-Schmidt.
            let vn = dot(&v, &v).sqrt();
            let vhat = v.map(|x| x / vn);
            let mut basis: Vec<[f64; 4]> = Vec::new();
            for c in &heat {
                let mut u = *c;
                let pv = dot(&u, &vhat);
                u = std::array::from_fn(|i| u[i] - pv * vhat[i]);
                for b in &basis {
                    let pb = dot(&u, b);
                    u = std::array::from_fn(|i| u[i] - pb * b[i]);
                }
                let nu = dot(&u, &u).sqrt();
                if nu > 1e-6 && basis.len() < 2 {
                    basis.push(u.map(|x| x / nu));
                }
            }
            if basis.len() != 2 {
                return Err(EquiheatError::GeometryIncomplete(
                    "annihilator of the circle orbit is not two-dimensional".into(),
                ));
            }
            // F̂(g, ξ) = e^{-|Cᵀξ|²} over ξ = a u₁ + b u₂.
            let gauss = fibre.integrate(|a| {
                fibre.integrate(|b| {
                    let xi: [f64; 4] = std::array::from_fn(|i| a * basis[0][i] + b * basis[1][i]);
                    let c2: f64 = heat.iter().map(|c| dot(c, &xi).powi(2)).sum();
                    (-c2).exp()
                })
            });
            let orbit = period * vn;
            acc.add(w * gauss / orbit);
        }
        Ok(model.volume * acc.value() / haar.total_mass())
    };
    let fine = eval(nodes)?;
    let coarse = eval(nodes / 2 + 1)?;
    Ok((fine, (fine - coarse).abs()))
}

/// Leading coefficient `d_σ ∫_ℍ tr π_σ · ṽol / (2π)^{n−κ}` of
/// `e^{-tλ_σ} tr e^{-tΔ_σ} ~ c t^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundlePrediction {
    pub charge: i64,
    pub exponent: f64,
    pub sigma_dimension: usize,
    /// `∫_ℍ tr π_σ(k k₁⁻¹)` over the principal isotropy `ℍ = {e}`.
    pub multiplicity_factor: f64,
    pub gaussian_volume: f64,
    pub gaussian_volume_error: f64,
    pub coefficient: f64,
}

pub fn bundle_prediction(charge: i64, nodes: usize) -> Result<BundlePrediction> {
    // The right U(1) action on T*SU(2) is free: ℍ = {e}, so the integral is
    // the character at the identity.
    let sigma = crate::group::IrrepInfo::charge(HalfInt::from_int(charge));
    let multiplicity_factor = sigma.character(&GroupModel::su2().identity()).re;
    let (vol, err) = bundle_gaussian_volume(nodes)?;
    // n = dim SU(2) = 3, κ = dim U(1) − dim ℍ = 1.
    let codim = 2.0;
    let d = sigma.dimension;
    Ok(BundlePrediction {
        charge,
        exponent: codim / 2.0,
        sigma_dimension: d,
        multiplicity_factor,
        gaussian_volume: vol,
        gaussian_volume_error: err,
        coefficient: d as f64 * multiplicity_factor * vol / (2.0 * PI).powf(codim),
    })
}
