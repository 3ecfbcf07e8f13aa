//! Probes for the heat operator of a group acting on itself by right
//! translation, in canonical coordinates at the identity.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::composite;
use crate::error::{EquiheatError, Result};
use crate::group::{norm, GroupElement, GroupKind, GroupModel, IrrepInfo, Quaternion};
use crate::heat::HeatKernelSeries;
use crate::quadrature::{circle_rule, compensated_sum, compensated_sum_complex, gauss_legendre};
use crate::space::{richardson, smooth_step, FD_STEP};

/// `α'(y) = ½(erfc((|y| - R)/w) - erfc((|y| + R)/w))`, an even entire
/// function of `|y|` that is `≈ 1` on the ball of radius `R - 3w`.
pub fn chart_window(y: &[f64], radius: f64, width: f64) -> f64 {
    let r = norm(y);
    0.5 * (erfc((r - radius) / width) - erfc((r + radius) / width))
}

/// Window `α'` used by the probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChartWindow {
    /// [`chart_window`] with plateau radius `R` and edge width `w`.
    Plateau { radius: f64, width: f64 },
    /// `e^{-|y|²/2s²}`.
    Gaussian { scale: f64 },
}

impl ChartWindow {
    pub fn value(&self, y: &[f64]) -> f64 {
        match *self {
            ChartWindow::Plateau { radius, width } => chart_window(y, radius, width),
            ChartWindow::Gaussian { scale } => {
                let r = norm(y);
                (-r * r / (2.0 * scale * scale)).exp()
            }
        }
    }
}

/// Window of each group. On SU(2) it is below `1e-17` on the boundary of
/// the injectivity ball; on the groups of injectivity radius `π` it is
/// below `3e-9` there.
pub fn window_for(model: &GroupModel) -> ChartWindow {
    match model.kind {
        GroupKind::Su2 => ChartWindow::Plateau {
            radius: 2.0,
            width: 0.7,
        },
        _ => ChartWindow::Gaussian { scale: 0.5 },
    }
}

fn model_window(model: &GroupModel, y: &[f64]) -> f64 {
    window_for(model).value(y)
}

/// Nodes `ζ` and weights for `∫ f(ζ) dζ` over the ball `|ζ| < radius`.
fn ball_rule(dim: usize, radius: f64, n_r: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if dim == 1 {
        let r = composite(-radius, radius, 2.0 * radius / n_r as f64 * 4.0);
        return (r.nodes.iter().map(|x| vec![*x]).collect(), r.weights);
    }
    if dim == 2 {
        let r = composite(-radius, radius, radius / 4.0);
        let mut nodes = Vec::with_capacity(r.len() * r.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (a, wa) in r.nodes.iter().zip(&r.weights) {
            for (b, wb) in r.nodes.iter().zip(&r.weights) {
                nodes.push(vec![*a, *b]);
                weights.push(wa * wb);
            }
        }
        return (nodes, weights);
    }
    let rr = gauss_legendre(n_r, 0.0, radius);
    let cr = gauss_legendre(n_r / 2, -1.0, 1.0);
    let pr = circle_rule(n_r);
    let mut nodes = Vec::with_capacity(rr.len() * cr.len() * pr.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (r, wr) in rr.nodes.iter().zip(&rr.weights) {
        for (c, wc) in cr.nodes.iter().zip(&cr.weights) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for (p, wp) in pr.nodes.iter().zip(&pr.weights) {
                nodes.push(vec![r * s * p.cos(), r * s * p.sin(), r * c]);
                weights.push(wr * wc * wp * 2.0 * PI * r * r);
            }
        }
    }
    (nodes, weights)
}

fn unit(direction: &[f64], dim: usize) -> Result<Vec<f64>> {
    let n = norm(direction);
    if direction.len() != dim || !(n > 0.0) {
        return Err(EquiheatError::Domain(format!(
            "direction must be a nonzero vector of length {dim}"
        )));
    }
    Ok(direction.iter().map(|v| v / n).collect())
}

/// One precomputed node: chart displacement `φ(exp(x)g) - x` and weight.
struct Node {
    shift: Vec<f64>,
    weight: f64,
}

fn fourier(nodes: &[Node], xi: &[f64]) -> Complex64 {
    compensated_sum_complex(nodes.iter().map(|n| {
        let ph: f64 = n.shift.iter().zip(xi).map(|(a, b)| a * b).sum();
        Complex64::from_polar(n.weight, ph)
    }))
}

// ---- symbol decay ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolProbeConfig {
    pub t: f64,
    /// Base point in canonical coordinates.
    pub x: Vec<f64>,
    pub direction: Vec<f64>,
    pub xi_max: f64,
    pub samples: usize,
    pub max_order: u32,
}

impl SymbolProbeConfig {
    pub fn new(model: &GroupModel, t: f64, xi_max: f64, max_order: u32) -> Self {
        let d = model.dimension;
        let x: Vec<f64> = [0.3, -0.2, 0.1][..d].to_vec();
        let direction: Vec<f64> = [1.0, 0.5, -0.25][..d].to_vec();
        SymbolProbeConfig {
            t,
            x,
            direction,
            xi_max,
            samples: 81,
            max_order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolRow {
    pub xi: f64,
    pub modulus: f64,
}

/// `C_N = max |a| (1 + |ξ|²)^N` and whether the outer quarter of the grid
/// stays below the inner maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub order: u32,
    pub constant: f64,
    pub inner_max: f64,
    pub outer_max: f64,
    pub worst_xi: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub group: GroupKind,
    pub t: f64,
    pub rows: Vec<SymbolRow>,
    pub fits: Vec<DecayFit>,
}

impl SymbolReport {
    pub fn check(&self) -> Result<()> {
        match self.fits.iter().find(|f| !f.passed) {
            None => Ok(()),
            Some(f) => Err(EquiheatError::DecayViolation {
                xi: f.worst_xi,
                detail: format!(
                    "order {}: outer envelope {:e} exceeds inner maximum {:e}",
                    f.order, f.outer_max, f.inner_max
                ),
            }),
        }
    }
}

/// `|a_f(x, ξ)|` along a ray for `f = p_t`, where
/// `a_f(x, ξ) = e^{-ix·ξ} ∫_G e^{iφ(exp(x) g)·ξ} α'(φ(exp(x) g)) f(g) dg`.
pub fn symbol_probe(model: &GroupModel, cfg: &SymbolProbeConfig) -> Result<SymbolReport> {
    let d = model.dimension;
    if cfg.x.len() != d || cfg.samples < 8 || !(cfg.xi_max > 0.0) {
        return Err(EquiheatError::Domain(
            "symbol probe needs a base point of the group dimension, ξ_max > 0 and ≥ 8 samples"
                .into(),
        ));
    }
    let dir = unit(&cfg.direction, d)?;
    let heat = HeatKernelSeries::new(model, cfg.t)?;
    let x_el = model.exp(&cfg.x)?;
    let (zs, ws) = ball_rule(d, model.injectivity_radius, 64);
    let nodes: Vec<Node> = zs
        .par_iter()
        .zip(&ws)
        .filter_map(|(z, w)| {
            let g = model.exp(z).ok()?;
            let y = model.log(&model.mul(&x_el, &g)).ok()?;
            let win = model_window(model, &y);
            let weight = w * model.haar_density_canonical(z) * heat.eval(&g) * win;
            let shift = y.iter().zip(&cfg.x).map(|(a, b)| a - b).collect();
            Some(Node { shift, weight })
        })
        .collect();
    let rows: Vec<SymbolRow> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let s = cfg.xi_max * k as f64 / (cfg.samples - 1) as f64;
            let xi: Vec<f64> = dir.iter().map(|v| v * s).collect();
            SymbolRow {
                xi: s,
                modulus: fourier(&nodes, &xi).norm(),
            }
        })
        .collect();
    let split = (3 * rows.len()) / 4;
    let fits = (0..=cfg.max_order)
        .map(|n| {
            let env: Vec<f64> = rows
                .iter()
                .map(|r| r.modulus * (1.0 + r.xi * r.xi).powi(n as i32))
                .collect();
            let inner = env[..split].iter().copied().fold(0.0, f64::max);
            let (wi, outer) = env[split..]
                .iter()
                .enumerate()
                .fold(
                    (0, 0.0),
                    |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc },
                );
            DecayFit {
                order: n,
                constant: inner.max(outer),
                inner_max: inner,
                outer_max: outer,
                worst_xi: rows[split + wi].xi,
                passed: outer <= inner,
            }
        })
        .collect();
    Ok(SymbolReport {
        group: model.kind,
        t: cfg.t,
        rows,
        fits,
    })
}

// ---- rescaled b-amplitude --------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BAmplitudeConfig {
    pub ts: Vec<f64>,
    pub xis: Vec<f64>,
    pub x: Vec<f64>,
    pub direction: Vec<f64>,
    /// Support radius `R` of the cutoff `β`.
    pub radius: f64,
}

impl BAmplitudeConfig {
    pub fn new(model: &GroupModel) -> Self {
        let d = model.dimension;
        BAmplitudeConfig {
            ts: vec![0.8, 0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001],
            xis: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0],
            x: [0.2, -0.1, 0.15][..d].to_vec(),
            direction: [1.0, 0.5, -0.25][..d].to_vec(),
            radius: 0.9 * model.injectivity_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BAmplitudeRow {
    pub t: f64,
    pub xi: f64,
    pub re: f64,
    pub im: f64,
    /// `α'(x) e^{-|Aᵀξ|²}`.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BAmplitudeReport {
    pub group: GroupKind,
    pub rows: Vec<BAmplitudeRow>,
    /// `sup |b|` over all `(t, ξ)` on the grid.
    pub sup: f64,
    /// `max_ξ |b - limit|` at each `t`.
    pub limit_gaps: Vec<(f64, f64)>,
}

/// `β(g) = 1` for `|g| ≤ R/2`, `0` for `|g| ≥ edge`.
fn cutoff_beta(r: f64, radius: f64, edge: f64) -> f64 {
    1.0 - smooth_step((r - 0.5 * radius) / (edge - 0.5 * radius))
}

/// Rescaled amplitudes `b(x, ξ/√t)` with `f = p_t β`, computed in the
/// variable `g = exp(√t η)`.
pub fn b_amplitude_probe(model: &GroupModel, cfg: &BAmplitudeConfig) -> Result<BAmplitudeReport> {
    let d = model.dimension;
    if cfg.x.len() != d || !(cfg.radius > 0.0) || cfg.radius >= model.injectivity_radius {
        return Err(EquiheatError::Domain(
            "b-amplitude probe needs a base point of the group dimension and 0 < R < inj".into(),
        ));
    }
    let dir = unit(&cfg.direction, d)?;
    let x_el = model.exp(&cfg.x)?;
    // Linearization A of η ↦ φ(exp(x) exp(η)) at 0.
    let a_cols: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            richardson(FD_STEP, |h| {
                let mut e = vec![0.0; d];
                e[j] = h;
                let g = model.exp(&e).expect("small step");
                model.log(&model.mul(&x_el, &g)).expect("inside the chart")
            })
        })
        .collect();
    let a = DMatrix::from_fn(d, d, |i, j| a_cols[j][i]);
    let alpha_x = model_window(model, &cfg.x);
    let mut rows = Vec::new();
    let mut limit_gaps = Vec::new();
    for &t in &cfg.ts {
        let heat = HeatKernelSeries::new(model, t)?;
        let st = t.sqrt();
        let reach = (12.0f64).min(cfg.radius / st);
        let (zs, ws) = ball_rule(d, reach, 64);
        let nodes: Vec<Node> = zs
            .par_iter()
            .zip(&ws)
            .filter_map(|(eta, w)| {
                let zeta: Vec<f64> = eta.iter().map(|v| v * st).collect();
                let r = norm(&zeta);
                let beta = cutoff_beta(r, cfg.radius, cfg.radius);
                if beta == 0.0 {
                    return None;
                }
                let g = model.exp(&zeta).ok()?;
                let y = model.log(&model.mul(&x_el, &g)).ok()?;
                let weight = w
                    * st.powi(d as i32)
                    * model.haar_density_canonical(&zeta)
                    * heat.eval(&g)
                    * beta
                    * model_window(model, &y);
                let shift = y.iter().zip(&cfg.x).map(|(p, q)| (p - q) / st).collect();
                Some(Node { shift, weight })
            })
            .collect();
        let mut gap: f64 = 0.0;
        for &s in &cfg.xis {
            let xi: Vec<f64> = dir.iter().map(|v| v * s).collect();
            let b = fourier(&nodes, &xi);
            let atxi = a.transpose() * nalgebra::DVector::from_column_slice(&xi);
            let limit = alpha_x * (-atxi.norm_squared()).exp();
            gap = gap.max((b - limit).norm());
            rows.push(BAmplitudeRow {
                t,
                xi: s,
                re: b.re,
                im: b.im,
                limit,
            });
        }
        limit_gaps.push((t, gap));
    }
    let sup = rows
        .iter()
        .map(|r| Complex64::new(r.re, r.im).norm())
        .fold(0.0, f64::max);
    Ok(BAmplitudeReport {
        group: model.kind,
        rows,
        sup,
        limit_gaps,
    })
}

// ---- cutoff insensitivity --------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub group: GroupKind,
    pub sigma: String,
    pub t: f64,
    pub radius: f64,
    /// `d_σ ∫ p_t β χ_σ` with `β` switching off over `[R/2, R]`.
    pub with_cutoff: f64,
    /// Same with `β'` switching off over `[R/2, 3R/4]`.
    pub with_alternative: f64,
    pub difference: f64,
    /// `|d_σ ∫ p_t χ_σ - d_σ ∫ p_t β χ_σ|`.
    pub tail: f64,
}

/// Radial nodes `g` and weights for class functions under normalized Haar
/// measure, with `|g|` for each node.
fn class_rule(model: &GroupModel) -> Vec<(GroupElement, f64, f64)> {
    let width = 0.02;
    match model.kind {
        GroupKind::U1 => {
            let r = composite(-PI, PI, width);
            r.nodes
                .iter()
                .zip(&r.weights)
                .map(|(a, w)| (GroupElement::torus(&[*a]), w / (2.0 * PI), a.abs()))
                .collect()
        }
        GroupKind::T2 => {
            let r = composite(-PI, PI, 0.05);
            let mut out = Vec::new();
            for (a, wa) in r.nodes.iter().zip(&r.weights) {
                for (b, wb) in r.nodes.iter().zip(&r.weights) {
                    out.push((
                        GroupElement::torus(&[*a, *b]),
                        wa * wb / (4.0 * PI * PI),
                        (a * a + b * b).sqrt(),
                    ));
                }
            }
            out
        }
        GroupKind::Su2 | GroupKind::So3 => {
            let (top, scale) = if model.kind == GroupKind::Su2 {
                (PI, 2.0 / PI)
            } else {
                (0.5 * PI, 4.0 / PI)
            };
            let r = composite(0.0, top, width);
            r.nodes
                .iter()
                .zip(&r.weights)
                .map(|(psi, w)| {
                    let q = Quaternion::new(psi.cos(), 0.0, 0.0, psi.sin());
                    (
                        GroupElement::Quat(q),
                        w * scale * psi.sin().powi(2),
                        2.0 * psi,
                    )
                })
                .collect()
        }
    }
}

/// Compares the traced quantity `d_σ ∫ p_t β χ_σ dg` for two cutoffs that
/// agree on the ball of radius `R/2`.
pub fn cutoff_insensitivity(
    model: &GroupModel,
    sigma: &IrrepInfo,
    t: f64,
    radius: f64,
) -> Result<CutoffReport> {
    if !(radius > 0.0) || radius >= model.injectivity_radius {
        return Err(EquiheatError::Domain(format!(
            "cutoff radius must lie in (0, {}), got {radius}",
            model.injectivity_radius
        )));
    }
    let heat = HeatKernelSeries::new(model, t)?;
    let dim = sigma.dimension as f64;
    let nodes = class_rule(model);
    let vals: Vec<(f64, f64, f64)> = nodes
        .par_iter()
        .map(|(g, w, r)| {
            let f = w * dim * heat.eval(g) * sigma.character(g).re;
            let b1 = cutoff_beta(*r, radius, radius);
            let b2 = cutoff_beta(*r, radius, 0.75 * radius);
            (f * b1, f * (b1 - b2), f * (1.0 - b1))
        })
        .collect();
    let with_cutoff = compensated_sum(vals.iter().map(|v| v.0));
    let difference = compensated_sum(vals.iter().map(|v| v.1)).abs();
    let tail = compensated_sum(vals.iter().map(|v| v.2)).abs();
    Ok(CutoffReport {
        group: model.kind,
        sigma: sigma.label.to_string(),
        t,
        radius,
        with_cutoff,
        with_alternative: with_cutoff - compensated_sum(vals.iter().map(|v| v.1)),
        difference,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::HalfInt;

    #[test]
    fn window_is_even_and_flat() {
        assert!((chart_window(&[0.0], 1.5, 0.25) - 1.0).abs() < 1e-12);
        let (a, b) = (
            chart_window(&[0.4], 1.5, 0.25),
            chart_window(&[-0.4], 1.5, 0.25),
        );
        assert!((a - b).abs() < 1e-15);
        assert!(window_for(&GroupModel::su2()).value(&[0.0, 0.0, 2.0 * PI]) < 1e-17);
        for m in [GroupModel::u1(), GroupModel::t2(), GroupModel::so3()] {
            let y = vec![PI / (m.dimension as f64).sqrt(); m.dimension];
            assert!(window_for(&m).value(&y) < 3e-9);
        }
    }

    #[test]
    fn symbol_decays_on_circle() {
        let m = GroupModel::u1();
        let r = symbol_probe(&m, &SymbolProbeConfig::new(&m, 1.0, 20.0, 4)).unwrap();
        r.check().unwrap();
        assert!(r.rows[0].modulus > 0.1);
    }

    #[test]
    fn symbol_decays_on_su2() {
        let m = GroupModel::su2();
        let r = symbol_probe(&m, &SymbolProbeConfig::new(&m, 0.5, 10.0, 4)).unwrap();
        r.check().unwrap();
    }

    #[test]
    fn symbol_at_zero_matches_heat_mass() {
        // At ξ = 0 and x = 0 the symbol is ∫ α'(g) p_t(g) dg.
        let m = GroupModel::u1();
        let mut cfg = SymbolProbeConfig::new(&m, 1.0, 5.0, 0);
        cfg.x = vec![0.0];
        let r = symbol_probe(&m, &cfg).unwrap();
        let heat = HeatKernelSeries::new(&m, 1.0).unwrap();
        let rule = gauss_legendre(400, -PI, PI);
        let want = rule.integrate(|a| {
            (-a * a / 0.5).exp() * heat.eval(&GroupElement::torus(&[a])) / (2.0 * PI)
        });
        assert!((r.rows[0].modulus - want).abs() < 1e-12);
    }

    #[test]
    fn b_amplitude_bounded_and_converges() {
        for m in [GroupModel::u1(), GroupModel::su2()] {
            let r = b_amplitude_probe(&m, &BAmplitudeConfig::new(&m)).unwrap();
            assert!(r.sup <= 1.0 + 1e-9, "{:?} sup {}", m.kind, r.sup);
            let last = r.limit_gaps.last().unwrap().1;
            assert!(last < 0.02, "{:?}: {:?}", m.kind, r.limit_gaps);
        }
    }

    #[test]
    fn torus_probes_factor() {
        let m = GroupModel::t2();
        let r = symbol_probe(&m, &SymbolProbeConfig::new(&m, 0.5, 10.0, 4)).unwrap();
        r.check().unwrap();
        // At ξ = 0 the symbol is the product of the circle masses.
        let mut cfg = SymbolProbeConfig::new(&m, 1.0, 5.0, 0);
        cfg.x = vec![0.0, 0.0];
        let r = symbol_probe(&m, &cfg).unwrap();
        let heat = HeatKernelSeries::new(&m, 1.0).unwrap();
        let rule = gauss_legendre(200, -PI, PI);
        let want = rule.integrate(|a| {
            rule.integrate(|b| {
                (-(a * a + b * b) / 0.5).exp() * heat.eval(&GroupElement::torus(&[a, b]))
            })
        }) / (4.0 * PI * PI);
        assert!(
            (r.rows[0].modulus - want).abs() < 1e-10,
            "{} {want}",
            r.rows[0].modulus
        );
        let b = b_amplitude_probe(&m, &BAmplitudeConfig::new(&m)).unwrap();
        assert!(b.sup <= 1.0 + 1e-9, "sup {}", b.sup);
    }

    #[test]
    fn cutoff_change_is_invisible_on_su2() {
        let m = GroupModel::su2();
        for j in [0, 1, 2] {
            let s = IrrepInfo::spin(HalfInt::from_twice(j));
            for t in [0.05, 0.02, 0.01] {
                let r = cutoff_insensitivity(&m, &s, t, 6.0).unwrap();
                assert!(r.difference < 1e-10, "{r:?}");
                let exact = (s.dimension as f64).powi(2) * (-t * s.casimir).exp();
                assert!((r.with_cutoff - exact).abs() < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn circle_cutoff_needs_small_time() {
        let m = GroupModel::u1();
        let s = IrrepInfo::weight(1);
        let r = cutoff_insensitivity(&m, &s, 0.01, 3.0).unwrap();
        assert!(r.difference < 1e-10, "{r:?}");
        let r = cutoff_insensitivity(&m, &s, 0.05, 3.0).unwrap();
        assert!(r.difference > 1e-10, "{r:?}");
    }

    #[test]
    fn rejects_radius_beyond_injectivity() {
        let m = GroupModel::so3();
        let s = IrrepInfo::spin(HalfInt::from_int(0));
        assert!(cutoff_insensitivity(&m, &s, 0.1, 4.0).is_err());
    }
}
