use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{h_sigma_kernel, quotient_distance, HeatKernelSeries};
use crate::error::{EquiheatError, Result};
use crate::group::{GroupElement, GroupKind, GroupModel, IrrepInfo, Subgroup};

/// Constants of a Gaussian envelope
/// `|p_t(g)| ≤ a t^{-d/q} e^{ωt} e^{-b(|g|^q/t)^{1/(q-1)}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFitResult {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub q: u32,
    pub dimension: usize,
    /// `max(0, max (|p| - tail)/envelope - 1)` over the grid.
    pub residual: f64,
    /// Largest `|p|/envelope` over grid points resolved above the tail bound.
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub worst_dist: f64,
    pub grid_points: usize,
}

impl BoundFitResult {
    pub fn envelope(&self, t: f64, dist: f64) -> f64 {
        self.log_envelope(t, dist).exp()
    }

    fn log_envelope(&self, t: f64, dist: f64) -> f64 {
        self.a.ln() - self.dimension as f64 / 2.0 * t.ln() + self.omega * t
            - self.b * dist * dist / t
    }
}

fn require_q2(q: u32) -> Result<()> {
    if q == 2 {
        Ok(())
    } else {
        Err(EquiheatError::NotInstantiated(q))
    }
}

/// Element at distance `r` from the identity along a fixed direction.
fn probe_element(model: &GroupModel, r: f64) -> Result<GroupElement> {
    let dir: Vec<f64> = match model.kind {
        GroupKind::U1 => vec![1.0],
        GroupKind::T2 => vec![0.6, 0.8],
        GroupKind::Su2 | GroupKind::So3 => vec![0.48, 0.6, 0.64],
    };
    model.exp(&dir.iter().map(|c| c * r).collect::<Vec<_>>())
}

struct GridPoint {
    t: f64,
    dist: f64,
    value: f64,
    tail: f64,
}

/// Default ratio between `a` and the largest normalized diagonal value.
pub const DEFAULT_SLACK: f64 = 16.0;

/// Fits `(a, b, ω)` of the Gaussian envelope on a `(t, |g|)` grid.
///
/// `ω` is the least-squares growth rate of `t^{d/2} p_t(e)`, `a` is
/// [`DEFAULT_SLACK`] times the largest normalized diagonal value, and `b` the
/// largest value for which no grid point certifiably exceeds the envelope (a
/// point is a certified violation when `|p| - tail > envelope`).
pub fn gaussian_bound_fit(
    model: &GroupModel,
    t_grid: &[f64],
    dist_grid: &[f64],
    q: u32,
) -> Result<BoundFitResult> {
    gaussian_bound_fit_with_slack(model, t_grid, dist_grid, q, DEFAULT_SLACK)
}

pub fn gaussian_bound_fit_with_slack(
    model: &GroupModel,
    t_grid: &[f64],
    dist_grid: &[f64],
    q: u32,
    slack: f64,
) -> Result<BoundFitResult> {
    require_q2(q)?;
    if !(slack >= 1.0) {
        return Err(EquiheatError::Domain(format!(
            "slack must be at least 1, got {slack}"
        )));
    }
    if t_grid.is_empty() || dist_grid.is_empty() {
        return Err(EquiheatError::Domain(
            "bound fit needs nonempty t and |g| grids".into(),
        ));
    }
    if let Some(r) = dist_grid
        .iter()
        .find(|r| **r < 0.0 || **r > model.injectivity_radius + 1e-12)
    {
        return Err(EquiheatError::Domain(format!(
            "|g| = {r} outside [0, {}]",
            model.injectivity_radius
        )));
    }
    let d = model.dimension as f64;
    let mut diag = Vec::with_capacity(t_grid.len());
    let mut pts = Vec::new();
    for &t in t_grid {
        let p = HeatKernelSeries::new(model, t)?;
        diag.push((t, (p.identity_value * t.powf(d / 2.0)).ln()));
        for &r in dist_grid {
            let g = probe_element(model, r)?;
            pts.push(GridPoint {
                t,
                dist: model.distance_from_identity(&g),
                value: p.eval(&g).abs(),
                tail: p.tail_bound,
            });
        }
    }
    let omega = if diag.len() >= 2 {
        let n = diag.len() as f64;
        let mt = diag.iter().map(|x| x.0).sum::<f64>() / n;
        let my = diag.iter().map(|x| x.1).sum::<f64>() / n;
        let sxx: f64 = diag.iter().map(|x| (x.0 - mt).powi(2)).sum();
        let sxy: f64 = diag.iter().map(|x| (x.0 - mt) * (x.1 - my)).sum();
        if sxx > 0.0 {
            (sxy / sxx).max(0.0)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let a0 = diag
        .iter()
        .map(|(t, y)| y - omega * t)
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let mut fit = BoundFitResult {
        a: slack * a0,
        b: 0.0,
        omega,
        q,
        dimension: model.dimension,
        residual: 0.0,
        worst_ratio: 0.0,
        worst_t: 0.0,
        worst_dist: 0.0,
        grid_points: pts.len(),
    };
    let violation = |fit: &BoundFitResult| -> Option<(f64, &GridPoint)> {
        let mut worst: Option<(f64, &GridPoint)> = None;
        for p in &pts {
            let excess = p.value - p.tail;
            if excess <= 0.0 {
                continue;
            }
            let lr = excess.ln() - fit.log_envelope(p.t, p.dist);
            if lr > 0.0 && worst.is_none_or(|w| lr > w.0) {
                worst = Some((lr, p));
            }
        }
        worst
    };
    if let Some((_, p)) = violation(&fit) {
        return Err(EquiheatError::BoundViolation {
            t: p.t,
            dist: p.dist,
            value: p.value,
            envelope: fit.envelope(p.t, p.dist),
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        fit.b = mid;
        if violation(&fit).is_none() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    fit.b = lo;
    let mut worst = (0.0, 0.0, 0.0);
    let mut residual: f64 = 0.0;
    for p in &pts {
        let env = fit.envelope(p.t, p.dist);
        residual = residual.max((p.value - p.tail) / env - 1.0);
        if p.value > 10.0 * p.tail {
            let r = p.value / env;
            if r > worst.0 {
                worst = (r, p.t, p.dist);
            }
        }
    }
    fit.residual = residual.max(0.0);
    (fit.worst_ratio, fit.worst_t, fit.worst_dist) = worst;
    Ok(fit)
}

/// Outcome of the `K`-averaged bound `|H^σ(g)| ≤ d_σ² · envelope(t, d(gK, K))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KAveragedCheck {
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub worst_dist: f64,
    pub samples: usize,
}

/// Checks the isotypic kernels of `p_t` against the fitted envelope with the
/// quotient distance `d(gK, K)` in place of `|g|`.
pub fn k_averaged_bound_check(
    model: &GroupModel,
    subgroup: Subgroup,
    sigma: &IrrepInfo,
    fit: &BoundFitResult,
    t_grid: &[f64],
    samples: &[GroupElement],
) -> Result<KAveragedCheck> {
    let d2 = (sigma.dimension * sigma.dimension) as f64;
    let mut out = KAveragedCheck {
        worst_ratio: 0.0,
        worst_t: 0.0,
        worst_dist: 0.0,
        samples: 0,
    };
    for &t in t_grid {
        let p = HeatKernelSeries::new(model, t)?;
        for g in samples {
            let h = h_sigma_kernel(model, subgroup, &p, sigma, g)?;
            let dist = quotient_distance(model, subgroup, g);
            let env = d2 * fit.envelope(t, dist);
            let excess = h.norm() - d2 * p.tail_bound;
            let ratio = excess.max(0.0) / env;
            out.samples += 1;
            if ratio > out.worst_ratio {
                out.worst_ratio = ratio;
                out.worst_t = t;
                out.worst_dist = dist;
            }
            if ratio > 1.0 {
                return Err(EquiheatError::BoundViolation {
                    t,
                    dist,
                    value: h.norm(),
                    envelope: env,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanglandsSample {
    pub t: f64,
    pub dist: f64,
    /// `p_t(g) t^{d/2} e^{|g|²/4t} / vol(G)`.
    pub ratio: f64,
    pub rel_err: f64,
}

/// Leading small-time behaviour of the Riemannian heat kernel,
/// `p_t(g) ~ t^{-d/q} e^{-b|g|²/t} c₀(g)` with `q = 2`, `b = 1/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanglandsExpansion {
    pub dimension: usize,
    pub q: u32,
    pub b: f64,
    /// `c₀(e)` estimated at the smallest `t` and `|g|`.
    pub c0: f64,
    /// `(4π)^{-d/2}`.
    pub c0_target: f64,
    pub samples: Vec<LanglandsSample>,
    /// Largest relative deviation from the target at the smallest `t`.
    pub max_rel_err: f64,
}

/// Normalized ratios `p_t(g) t^{d/2} e^{|g|²/4t} / vol(G)` on the grid.
/// Fails when the ratios at the smallest `t` stray more than `tol` from
/// `(4π)^{-d/2}`.
pub fn langlands_probe(
    model: &GroupModel,
    t_grid: &[f64],
    dist_grid: &[f64],
    tol: f64,
) -> Result<LanglandsExpansion> {
    if t_grid.is_empty() || dist_grid.is_empty() {
        return Err(EquiheatError::Domain(
            "langlands probe needs nonempty grids".into(),
        ));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= 0.1)) {
        return Err(EquiheatError::Domain(format!(
            "probe times must lie in (0, 0.1], got {t}"
        )));
    }
    if let Some(r) = dist_grid
        .iter()
        .find(|r| **r < 0.0 || **r >= model.injectivity_radius)
    {
        return Err(EquiheatError::Domain(format!(
            "|g| = {r} outside the injectivity ball"
        )));
    }
    let d = model.dimension as f64;
    let target = (4.0 * PI).powf(-d / 2.0);
    let mut samples = Vec::new();
    for &t in t_grid {
        let p = HeatKernelSeries::new(model, t)?;
        for &r in dist_grid {
            let g = probe_element(model, r)?;
            let dist = model.distance_from_identity(&g);
            let ratio =
                p.eval(&g) * t.powf(d / 2.0) * (dist * dist / (4.0 * t)).exp() / model.volume;
            samples.push(LanglandsSample {
                t,
                dist,
                ratio,
                rel_err: (ratio - target).abs() / target,
            });
        }
    }
    let tmin = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let at_min: Vec<_> = samples.iter().filter(|s| s.t == tmin).collect();
    let c0 = at_min
        .iter()
        .min_by(|a, b| a.dist.total_cmp(&b.dist))
        .map(|s| s.ratio)
        .unwrap_or(f64::NAN);
    let worst = at_min
        .iter()
        .max_by(|a, b| a.rel_err.total_cmp(&b.rel_err))
        .copied()
        .copied();
    let max_rel_err = worst.map_or(0.0, |w| w.rel_err);
    if let Some(w) = worst {
        if !(w.rel_err <= tol) {
            return Err(EquiheatError::ExpansionViolation {
                t: w.t,
                ratio: w.ratio,
                target,
            });
        }
    }
    Ok(LanglandsExpansion {
        dimension: model.dimension,
        q: 2,
        b: 0.25,
        c0,
        c0_target: target,
        samples,
        max_rel_err,
    })
}
