//! Heat kernels on the model groups as truncated Peter-Weyl series.
//!
//! `p_t(g) = Σ_ρ d_ρ e^{-tλ_ρ} χ_ρ(g)` is the kernel of `e^{-tΔ}` against
//! *normalized* Haar measure, so `∫ p_t = 1`; the Riemannian heat kernel is
//! `p_t / vol(G)`.

mod bounds;
mod isotypic;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EquiheatError, Result};
use crate::group::{GroupElement, GroupKind, GroupModel, HaarRule, HalfInt, IrrepInfo};
use crate::quadrature::KahanSum;

pub use bounds::{
    gaussian_bound_fit, gaussian_bound_fit_with_slack, k_averaged_bound_check, langlands_probe,
    BoundFitResult, KAveragedCheck, LanglandsExpansion, LanglandsSample, DEFAULT_SLACK,
};
pub(crate) use isotypic::bundle_kernel_with;
pub use isotypic::{bundle_kernel, h_sigma_kernel, h_sigma_kernel_with, quotient_distance};

/// Relative tolerance for the certified tail.
pub const TAIL_RTOL: f64 = 1e-12;
pub const DEFAULT_MAX_LEVELS: usize = 200_000;

/// A truncated Peter-Weyl series for `p_t` with a certified tail bound.
///
/// Levels group the irreducibles by Casimir: weight `±n` on a circle factor,
/// spin `n/2` on SU(2), spin `n` on SO(3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelSeries {
    pub model: GroupModel,
    pub t: f64,
    /// Number of levels kept (per circle factor on tori).
    pub levels: usize,
    /// Largest Casimir value kept.
    pub cutoff: f64,
    /// Bound on `|p_t(g) - partial sum|`, uniform in `g`.
    pub tail_bound: f64,
    /// Partial sum at the identity.
    pub identity_value: f64,
}

/// `Σ_{ρ in level n} d_ρ² e^{-tλ_ρ}`; for tori, one circle factor.
fn level_mass(kind: GroupKind, n: usize, t: f64) -> f64 {
    let x = n as f64;
    match kind {
        GroupKind::U1 | GroupKind::T2 => {
            let m = if n == 0 { 1.0 } else { 2.0 };
            m * (-t * x * x).exp()
        }
        GroupKind::Su2 => (x + 1.0).powi(2) * (-t * x * (x + 2.0) / 4.0).exp(),
        GroupKind::So3 => (2.0 * x + 1.0).powi(2) * (-t * x * (x + 1.0)).exp(),
    }
}

fn level_casimir(kind: GroupKind, n: usize) -> f64 {
    let x = n as f64;
    match kind {
        GroupKind::U1 | GroupKind::T2 => x * x,
        GroupKind::Su2 => x * (x + 2.0) / 4.0,
        GroupKind::So3 => x * (x + 1.0),
    }
}

fn estimated_levels(kind: GroupKind, t: f64) -> usize {
    let c = if kind == GroupKind::Su2 { 0.25 } else { 1.0 };
    (45.0 / (c * t)).sqrt().ceil() as usize + 2
}

impl HeatKernelSeries {
    pub fn new(model: &GroupModel, t: f64) -> Result<Self> {
        Self::with_max_levels(model, t, DEFAULT_MAX_LEVELS)
    }

    pub fn with_max_levels(model: &GroupModel, t: f64, max_levels: usize) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(EquiheatError::Domain(format!(
                "heat time must be positive, got {t}"
            )));
        }
        let kind = model.kind;
        // On T² the product of two factor errors must stay below the target.
        let rtol = if kind == GroupKind::T2 {
            TAIL_RTOL / 4.0
        } else {
            TAIL_RTOL
        };
        let mut sum = KahanSum::default();
        let mut n = 0;
        let (levels, factor_tail) = loop {
            if n >= max_levels {
                return Err(EquiheatError::Truncation {
                    required: estimated_levels(kind, t).max(max_levels + 1),
                    max: max_levels,
                });
            }
            let tn = level_mass(kind, n, t);
            sum.add(tn);
            let (a, b) = (level_mass(kind, n + 1, t), level_mass(kind, n + 2, t));
            // Consecutive ratios of these sequences decrease, so the tail
            // from level n+1 is dominated by a geometric series.
            let r = if a > 0.0 { b / a } else { 0.0 };
            if n >= 1 && r < 1.0 {
                let tail = a / (1.0 - r);
                if tail < rtol * sum.value() {
                    break (n + 1, tail);
                }
            }
            n += 1;
        };
        let s = sum.value();
        let (identity_value, tail_bound) = match kind {
            GroupKind::T2 => (s * s, 2.0 * s * factor_tail + factor_tail * factor_tail),
            _ => (s, factor_tail),
        };
        Ok(HeatKernelSeries {
            model: model.clone(),
            t,
            levels,
            cutoff: match kind {
                GroupKind::T2 => 2.0 * level_casimir(kind, levels - 1),
                _ => level_casimir(kind, levels - 1),
            },
            tail_bound,
            identity_value,
        })
    }

    /// `p_t(g)` relative to normalized Haar measure.
    pub fn eval(&self, g: &GroupElement) -> f64 {
        let t = self.t;
        match (self.model.kind, g) {
            (GroupKind::U1, GroupElement::Torus(a)) => circle_series(t, a[0], self.levels),
            (GroupKind::T2, GroupElement::Torus(a)) => {
                circle_series(t, a[0], self.levels) * circle_series(t, a[1], self.levels)
            }
            (GroupKind::Su2 | GroupKind::So3, GroupElement::Quat(q)) => {
                let w = q.w.clamp(-1.0, 1.0);
                let so3 = self.model.kind == GroupKind::So3;
                let top = if so3 {
                    2 * (self.levels - 1)
                } else {
                    self.levels - 1
                };
                let mut acc = KahanSum::default();
                let (mut prev, mut cur) = (0.0, 1.0);
                for n in 0..=top {
                    if !so3 || n % 2 == 0 {
                        let x = n as f64;
                        acc.add((x + 1.0) * (-t * x * (x + 2.0) / 4.0).exp() * cur);
                    }
                    let next = 2.0 * w * cur - prev;
                    prev = cur;
                    cur = next;
                }
                acc.value()
            }
            _ => panic!("element does not belong to {}", self.model.name()),
        }
    }

    /// Value together with the certified truncation bound.
    pub fn eval_with_bound(&self, g: &GroupElement) -> (f64, f64) {
        (self.eval(g), self.tail_bound)
    }

    /// Riemannian heat kernel `p_t / vol(G)`.
    pub fn riemannian(&self, g: &GroupElement) -> f64 {
        self.eval(g) / self.model.volume
    }

    /// The irreducibles kept in the partial sum.
    pub fn terms(&self) -> Vec<IrrepInfo> {
        match self.model.kind {
            GroupKind::Su2 => (0..self.levels)
                .map(|n| IrrepInfo::spin(HalfInt::from_twice(n as i64)))
                .collect(),
            GroupKind::So3 => (0..self.levels)
                .map(|n| IrrepInfo::spin(HalfInt::from_int(n as i64)))
                .collect(),
            _ => self
                .model
                .irrep_data(self.cutoff.max(0.5))
                .unwrap_or_default(),
        }
    }
}

fn circle_series(t: f64, theta: f64, levels: usize) -> f64 {
    let mut acc = KahanSum::default();
    acc.add(1.0);
    for n in 1..levels {
        let x = n as f64;
        acc.add(2.0 * (-t * x * x).exp() * (x * theta).cos());
    }
    acc.value()
}

/// `p_t(g)` with the default truncation budget.
pub fn heat_kernel_eval(model: &GroupModel, t: f64, g: &GroupElement) -> Result<f64> {
    Ok(HeatKernelSeries::new(model, t)?.eval(g))
}

/// Wrapped-Gaussian form of the U(1) kernel from Poisson summation,
/// `2π (4πt)^{-1/2} Σ_m e^{-(θ+2πm)²/4t}`.
pub fn wrapped_gaussian(t: f64, theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut acc = KahanSum::default();
    let mmax = (1.0 + (40.0 * t).sqrt() / PI).ceil() as i64 + 1;
    for m in -mmax..=mmax {
        let x = theta + 2.0 * PI * m as f64;
        acc.add((-x * x / (4.0 * t)).exp());
    }
    2.0 * PI * acc.value() / (4.0 * PI * t).sqrt()
}

/// `max_g |(p_t ⋆ p_s)(g) - p_{t+s}(g)|` over `samples`, with the convolution
/// `∫ p_t(h) p_s(h⁻¹g) dh` evaluated by a Haar rule exact for the product.
pub fn semigroup_residual(
    model: &GroupModel,
    t: f64,
    s: f64,
    samples: &[GroupElement],
) -> Result<f64> {
    let (pt, ps, pts) = (
        HeatKernelSeries::new(model, t)?,
        HeatKernelSeries::new(model, s)?,
        HeatKernelSeries::new(model, t + s)?,
    );
    let band = match model.kind {
        GroupKind::Su2 => (pt.levels + ps.levels) as f64 / 2.0,
        _ => (pt.levels + ps.levels) as f64,
    };
    let rule = HaarRule::exact_for(model, band);
    let mut worst: f64 = 0.0;
    for g in samples {
        let conv = rule.integrate_real(|h| pt.eval(h) * ps.eval(&model.mul(&model.inv(h), g)));
        worst = worst.max((conv - pts.eval(g)).abs());
    }
    Ok(worst)
}

/// A CSV row of kernel evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub t: f64,
    pub dist: f64,
    pub value: f64,
    pub tail_bound: f64,
}

pub fn kernel_rows(
    model: &GroupModel,
    t_grid: &[f64],
    g_grid: &[GroupElement],
) -> Result<Vec<KernelRow>> {
    let mut rows = Vec::with_capacity(t_grid.len() * g_grid.len());
    for &t in t_grid {
        let p = HeatKernelSeries::new(model, t)?;
        for g in g_grid {
            rows.push(KernelRow {
                t,
                dist: model.distance_from_identity(g),
                value: p.eval(g),
                tail_bound: p.tail_bound,
            });
        }
    }
    Ok(rows)
}

/// Writes kernel evaluations with columns `t,dist,value,tail_bound`.
pub fn write_kernel_csv(path: &Path, rows: &[KernelRow]) -> Result<()> {
    crate::export::write_csv(path, rows)
}
