//! Oscillatory integrals `I(μ)` over `T*M × 𝕂` and their stationary-phase
//! limit.
//!
//! The phase is `Φ(p, ξ, k₁, k) = (φ(k₁k·p) - φ(p))·ξ` in the principal chart
//! and `I(μ) = ∫ e^{iΦ/μ} a d(T*M) dk₁ dk`. Amplitudes are products
//! `a = b(p) ρ((k₁, k)·p) e^{-c|ξ|²} v(k₁, k)` where `ρ` is the chart cutoff.
//!
//! On spaces where `𝕂` shifts one angle (T¹, T², S²) the integral reduces to
//! `I(μ) = μ ∫ e^{-cμ²η²} Ĝ(η) dη` with `G` the profile of the amplitude in the
//! chart displacement `s = φ((k₁, k)·p) - φ(p)` along the orbit. `Ĝ` is smooth and
//! decays fast, so the direct value stays accurate as `μ → 0` without node
//! counts growing like `1/μ`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EquiheatError, Result};
use crate::group::{norm, GroupElement, HaarRule, HalfInt, IrrepInfo};
use crate::quadrature::{
    circle_rule, compensated_sum_complex, gauss_hermite_scaled, gauss_legendre, Rule1d,
};
use crate::space::{smooth_step, SpaceKind, SpaceModel, FD_STEP};
use crate::symplectic::{
    zero_level_integral, CotangentPoint, PrincipalIsotropy, VolumeMethod, ZeroLevelIntegral,
};

pub mod probes;

pub type BaseFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GroupFn = Arc<dyn Fn(&GroupElement, &GroupElement) -> Complex64 + Send + Sync>;

/// Order `k` of the chart cutoff `((1 + cos x)/2)^k`.
pub const CUTOFF_ORDER: i32 = 4;

fn bump(a: f64) -> f64 {
    (0.5 * (1.0 + a.cos())).powi(CUTOFF_ORDER)
}

/// Chart cutoff `ρ` in principal coordinates. It vanishes to order
/// `2·CUTOFF_ORDER` on the chart boundary.
pub fn chart_cutoff(space: &SpaceModel, x: &[f64]) -> f64 {
    match space.kind {
        SpaceKind::Torus1 => bump(x[0]),
        SpaceKind::Torus2 => bump(x[0]) * bump(x[1]),
        SpaceKind::Sphere2 => x[0].sin().powi(2 * CUTOFF_ORDER) * bump(x[1]),
        SpaceKind::Su2BothSided => {
            let r = norm(x);
            if r >= 2.0 * PI {
                0.0
            } else {
                bump(0.5 * r)
            }
        }
    }
}

/// Product amplitude `a(p, ξ, k₁, k) = b(p) ρ((k₁, k)·p) e^{-c|ξ|²} v(k₁, k)`.
#[derive(Clone)]
pub struct ProductAmplitude {
    /// `b` on the principal chart; should vanish where `ρ` does.
    pub base: BaseFn,
    /// `c > 0`.
    pub xi_decay: f64,
    pub group: GroupFn,
    /// Spectral band of `v` in each factor.
    pub group_band: f64,
    pub label: String,
}

impl fmt::Debug for ProductAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductAmplitude")
            .field("label", &self.label)
            .field("xi_decay", &self.xi_decay)
            .field("group_band", &self.group_band)
            .finish()
    }
}

impl ProductAmplitude {
    pub fn new(base: BaseFn, xi_decay: f64, group: GroupFn, group_band: f64) -> Result<Self> {
        if !(xi_decay > 0.0) || !xi_decay.is_finite() {
            return Err(EquiheatError::Domain(format!(
                "xi decay must be positive, got {xi_decay}"
            )));
        }
        Ok(ProductAmplitude {
            base,
            xi_decay,
            group,
            group_band: group_band.max(0.0),
            label: "custom".into(),
        })
    }

    /// `b = ρ`, `c = 1`, `v = 1`.
    pub fn standard(space: &SpaceModel) -> Self {
        let s = space.clone();
        ProductAmplitude {
            base: Arc::new(move |x| chart_cutoff(&s, x)),
            xi_decay: 1.0,
            group: Arc::new(|_, _| Complex64::new(1.0, 0.0)),
            group_band: 0.0,
            label: "standard".into(),
        }
    }

    /// A seeded random amplitude: `b = ρ·(1 + small trigonometric terms)`,
    /// `c ∈ [0.6, 1.5]` and `v` a short sum of characters.
    pub fn random(space: &SpaceModel, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = rng.gen_range(0.6..1.5);
        let amp: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.25..0.25)).collect();
        let phase: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let beta: Vec<Complex64> = (0..3)
            .map(|_| Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)))
            .collect();
        let s = space.clone();
        let kind = space.kind;
        let base: BaseFn = Arc::new(move |x: &[f64]| {
            let mut f = 1.0;
            match kind {
                SpaceKind::Su2BothSided => {
                    for i in 0..3 {
                        f += amp[i] * (0.5 * x[i] + phase[i]).sin();
                    }
                }
                _ => {
                    for (i, xi) in x.iter().enumerate() {
                        f += amp[2 * i] * (xi + phase[2 * i]).cos()
                            + amp[2 * i + 1] * (2.0 * xi + phase[2 * i + 1]).cos();
                    }
                }
            }
            f * chart_cutoff(&s, x)
        });
        let (group, band): (GroupFn, f64) = match kind {
            SpaceKind::Su2BothSided => {
                let half = IrrepInfo::spin(HalfInt::from_twice(1));
                let one = IrrepInfo::spin(HalfInt::from_int(1));
                (
                    Arc::new(move |k1: &GroupElement, k: &GroupElement| {
                        Complex64::new(1.0, 0.0)
                            + beta[0] * half.character(k1) * half.character(k)
                            + beta[1] * one.character(k1) * one.character(k)
                            + beta[2] * one.character(k1)
                    }),
                    2.0,
                )
            }
            _ => (
                Arc::new(move |k1: &GroupElement, k: &GroupElement| {
                    let a = k1.angles().map_or(0.0, |v| v[0]);
                    let b = k.angles().map_or(0.0, |v| v[0]);
                    Complex64::new(1.0, 0.0)
                        + beta[0] * Complex64::from_polar(1.0, a - b)
                        + beta[1] * Complex64::from_polar(1.0, 2.0 * a)
                        + beta[2] * Complex64::from_polar(1.0, b + 2.0 * a)
                }),
                3.0,
            ),
        };
        ProductAmplitude {
            base,
            xi_decay: c,
            group,
            group_band: band,
            label: format!("random({seed})"),
        }
    }

    /// `a(p, ξ, k₁, k)`; zero when `(k₁, k)·p` leaves the principal chart.
    pub fn eval(
        &self,
        space: &SpaceModel,
        x: &[f64],
        xi: &[f64],
        k1: &GroupElement,
        k: &GroupElement,
    ) -> Complex64 {
        let Some(y) = space.act_kk(k1, k, x) else {
            return Complex64::new(0.0, 0.0);
        };
        let xi2: f64 = xi.iter().map(|v| v * v).sum();
        (self.group)(k1, k)
            * ((self.base)(x) * chart_cutoff(space, &y) * (-self.xi_decay * xi2).exp())
    }

    /// `u(p, ξ) = b(p) ρ(p) e^{-c|ξ|²}`, the `T*M` factor on `Reg C`.
    pub fn restricted(&self, space: &SpaceModel, pt: &CotangentPoint) -> f64 {
        let xi2: f64 = pt.xi.iter().map(|v| v * v).sum();
        (self.base)(&pt.p) * chart_cutoff(space, &pt.p) * (-self.xi_decay * xi2).exp()
    }
}

#[derive(Debug, Clone)]
pub struct OscillatorySpec {
    pub space: SpaceModel,
    pub amplitude: ProductAmplitude,
    pub mu_grid: Vec<f64>,
}

/// `μ = 10^{-k/4}`, `k = 4..=16`.
pub fn default_mu_grid() -> Vec<f64> {
    (4..=16).map(|k| 10f64.powf(-(k as f64) / 4.0)).collect()
}

impl OscillatorySpec {
    pub fn new(space: SpaceModel, amplitude: ProductAmplitude) -> Self {
        OscillatorySpec {
            space,
            amplitude,
            mu_grid: default_mu_grid(),
        }
    }
}

/// `κ = dim 𝕂 - dim ℍ`.
pub fn transverse_kappa(space: &SpaceModel) -> usize {
    space.kk_dimension() - PrincipalIsotropy::for_space(space).dimension()
}

fn orbit_axis(space: &SpaceModel) -> Result<usize> {
    match space.kind {
        SpaceKind::Torus1 | SpaceKind::Torus2 => Ok(0),
        SpaceKind::Sphere2 => Ok(1),
        SpaceKind::Su2BothSided => Err(EquiheatError::Domain(
            "direct evaluation needs a circle action; su2 supports the leading term only".into(),
        )),
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(EquiheatError::Domain(format!(
            "μ must be positive, got {mu}"
        )));
    }
    Ok(())
}

// ---- direct evaluation -----------------------------------------------------

const PANEL_NODES: usize = 16;

pub(crate) fn composite(a: f64, b: f64, width: f64) -> Rule1d {
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut out = Rule1d {
        nodes: Vec::with_capacity(panels * PANEL_NODES),
        weights: Vec::with_capacity(panels * PANEL_NODES),
    };
    for p in 0..panels {
        let r = gauss_legendre(PANEL_NODES, a + h * p as f64, a + h * (p + 1) as f64);
        out.nodes.extend(r.nodes);
        out.weights.extend(r.weights);
    }
    out
}

/// Profile `G(s)` on a composite rule over `s ∈ (-2π, 2π)`.
struct Profile {
    rule: Rule1d,
    values: Vec<Complex64>,
}

struct Resolution {
    eta_max: f64,
    x_nodes: usize,
    other_nodes: usize,
}

const COARSE: Resolution = Resolution {
    eta_max: 64.0,
    x_nodes: 128,
    other_nodes: 48,
};
const FINE: Resolution = Resolution {
    eta_max: 96.0,
    x_nodes: 192,
    other_nodes: 72,
};

fn profile(spec: &OscillatorySpec, res: &Resolution) -> Result<Profile> {
    let space = &spec.space;
    let axis = orbit_axis(space)?;
    let amp = &spec.amplitude;
    let c = amp.xi_decay;
    let bx = space.param_box();
    let n = space.dimension;
    // The remaining cotangent directions carry ∫ e^{-cξ²} dξ each.
    let xi_rest = (PI / c).sqrt().powi(n as i32 - 1);
    let others: Vec<(usize, Rule1d)> = (0..n)
        .filter(|i| *i != axis)
        .map(|i| (i, gauss_legendre(res.other_nodes, bx[i].0, bx[i].1)))
        .collect();
    let band = amp.group_band;
    let theta = circle_rule((4.0 * band).ceil() as usize + 4);
    let rule = composite(-2.0 * PI, 2.0 * PI, 8.0 / res.eta_max);
    let values: Vec<Complex64> = rule
        .nodes
        .par_iter()
        .map(|&s| {
            // V(s) = ∫ v(θ₁, s - θ₁) dθ₁/2π, then ds/2π from dθ₁dθ/4π².
            let v = theta.integrate_complex(|t1| {
                (amp.group)(&GroupElement::torus(&[t1]), &GroupElement::torus(&[s - t1]))
            }) / (2.0 * PI);
            let (lo, hi) = ((-PI).max(-PI - s), PI.min(PI - s));
            if hi <= lo {
                return Complex64::new(0.0, 0.0);
            }
            let xr = gauss_legendre(res.x_nodes, lo, hi);
            let mut x = vec![0.0; n];
            let mut total = 0.0;
            let stack = |x: &mut Vec<f64>| {
                let mut acc = 0.0;
                for (xa, wa) in xr.nodes.iter().zip(&xr.weights) {
                    x[axis] = *xa;
                    let b = (amp.base)(x);
                    x[axis] = xa + s;
                    let r = chart_cutoff(space, x);
                    x[axis] = *xa;
                    acc += wa * b * r;
                }
                acc
            };
            match others.as_slice() {
                [] => total = stack(&mut x),
                [(i, r)] => {
                    for (xo, wo) in r.nodes.iter().zip(&r.weights) {
                        x[*i] = *xo;
                        total += wo * stack(&mut x);
                    }
                }
                _ => unreachable!("orbit spaces have dimension at most two"),
            }
            v * (total * xi_rest)
        })
        .collect();
    Ok(Profile { rule, values })
}

struct Spectrum {
    rule: Rule1d,
    values: Vec<Complex64>,
    tail: f64,
    eta_max: f64,
}

fn spectrum(p: &Profile, window: Option<f64>, eta_max: f64) -> Spectrum {
    let g: Vec<Complex64> = p
        .rule
        .nodes
        .iter()
        .zip(&p.values)
        .zip(&p.rule.weights)
        .map(|((s, v), w)| {
            let chi = window.map_or(1.0, |d| 1.0 - smooth_step((s.abs() - d) / d));
            v * (w * chi)
        })
        .collect();
    let transform = |eta: f64| -> Complex64 {
        compensated_sum_complex(
            p.rule
                .nodes
                .iter()
                .zip(&g)
                .map(|(s, gv)| gv * Complex64::from_polar(1.0, s * eta)),
        )
    };
    let rule = composite(-eta_max, eta_max, 1.0);
    let values: Vec<Complex64> = rule.nodes.par_iter().map(|e| transform(*e)).collect();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = rule
        .nodes
        .iter()
        .zip(&values)
        .filter(|(e, _)| e.abs() > 0.75 * eta_max)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    Spectrum {
        rule,
        values,
        tail: if peak > 0.0 { tail } else { 0.0 },
        eta_max,
    }
}

impl Spectrum {
    fn integral(&self, mu: f64, c: f64, eps: Option<f64>) -> Complex64 {
        let terms = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .zip(&self.values)
            .map(|((e, w), v)| {
                let xi = mu * e;
                let psi = eps.map_or(1.0, |eps| 1.0 - smooth_step((eps * xi).abs() - 1.0));
                v * (w * (-c * xi * xi).exp() * psi)
            });
        compensated_sum_complex(terms) * mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectValue {
    pub re: f64,
    pub im: f64,
    /// Coarse-fine difference plus the truncated spectral tail.
    pub error: f64,
}

impl DirectValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Direct evaluator holding the profile spectra at two resolutions.
pub struct DirectIntegrator {
    coarse: Spectrum,
    fine: Spectrum,
    xi_decay: f64,
}

impl DirectIntegrator {
    pub fn new(spec: &OscillatorySpec) -> Result<Self> {
        Self::build(spec, None)
    }

    /// `(k₁, k)` restricted to a smooth window `|s| ≲ δ` around the fixed
    /// point set.
    pub fn localized(spec: &OscillatorySpec, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || delta >= PI {
            return Err(EquiheatError::Domain(format!(
                "window must lie in (0, π), got {delta}"
            )));
        }
        Self::build(spec, Some(delta))
    }

    fn build(spec: &OscillatorySpec, window: Option<f64>) -> Result<Self> {
        let pc = profile(spec, &COARSE)?;
        let pf = profile(spec, &FINE)?;
        Ok(DirectIntegrator {
            coarse: spectrum(&pc, window, COARSE.eta_max),
            fine: spectrum(&pf, window, FINE.eta_max),
            xi_decay: spec.amplitude.xi_decay,
        })
    }

    fn eval_with(&self, mu: f64, eps: Option<f64>) -> Result<DirectValue> {
        check_mu(mu)?;
        let f = self.fine.integral(mu, self.xi_decay, eps);
        let c = self.coarse.integral(mu, self.xi_decay, eps);
        let tail = mu * self.fine.tail * self.fine.eta_max;
        let error = (f - c).norm() + tail;
        if !f.re.is_finite() || !f.im.is_finite() {
            return Err(EquiheatError::Quadrature(format!(
                "non-finite oscillatory integral at μ = {mu}"
            )));
        }
        Ok(DirectValue {
            re: f.re,
            im: f.im,
            error,
        })
    }

    pub fn eval(&self, mu: f64) -> Result<DirectValue> {
        self.eval_with(mu, None)
    }

    /// The integral with `ψ(εξ)` inserted on the orbit covector, where
    /// `ψ = 1` on `[-1, 1]` and vanishes outside `[-2, 2]`.
    pub fn eval_regularized(&self, mu: f64, eps: f64) -> Result<DirectValue> {
        if !(eps > 0.0) {
            return Err(EquiheatError::Domain(format!(
                "ε must be positive, got {eps}"
            )));
        }
        self.eval_with(mu, Some(eps))
    }
}

pub fn integral_direct(spec: &OscillatorySpec, mu: f64) -> Result<DirectValue> {
    DirectIntegrator::new(spec)?.eval(mu)
}

// ---- leading term ----------------------------------------------------------

/// Hessian at `0` by the four-point formula with one Richardson step.
fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, m: usize, h: f64) -> DMatrix<f64> {
    let at = |h: f64| {
        DMatrix::from_fn(m, m, |i, j| {
            let mut z = vec![0.0; m];
            let mut g = |a: f64, b: f64| {
                z.iter_mut().for_each(|v| *v = 0.0);
                z[i] += a;
                z[j] += b;
                f(&z)
            };
            (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h * h)
        })
    };
    let (a, b) = (at(h), at(h / 2.0));
    (b * 4.0 - a) / 3.0
}

/// `|det Φ''|^{1/2}` of the phase in the directions transverse to `Reg C`
/// at the base point `x` (with `ℍ`-fibre point at the identity).
pub fn transverse_hessian_det(space: &SpaceModel, x: &[f64]) -> Result<f64> {
    let kg = &space.k_group;
    let det = match space.kind {
        SpaceKind::Su2BothSided => {
            let h = fd_hessian(
                |z| {
                    let Ok(k1) = kg.exp(&z[..3]) else { return 0.0 };
                    let e = kg.identity();
                    match space.act_kk(&k1, &e, x) {
                        Some(y) => space
                            .param_diff(x, &y)
                            .iter()
                            .zip(&z[3..])
                            .map(|(d, v)| d * v)
                            .sum(),
                        None => 0.0,
                    }
                },
                6,
                FD_STEP,
            );
            h.determinant()
        }
        _ => {
            let axis = orbit_axis(space)?;
            let h = fd_hessian(
                |z| {
                    let k = GroupElement::torus(&[z[0]]);
                    let e = kg.identity();
                    match space.act_kk(&e, &k, x) {
                        Some(y) => space.param_diff(x, &y)[axis] * z[1],
                        None => 0.0,
                    }
                },
                2,
                FD_STEP,
            );
            h.determinant()
        }
    };
    if !(det.abs() > 1e-12) {
        return Err(EquiheatError::SingularStratum(format!(
            "transverse Hessian degenerate at {x:?} (det = {det:e})"
        )));
    }
    Ok(det.abs().sqrt())
}

/// `L₀ = ∫_{Reg C} a / |det Φ''|^{1/2}` so that
/// `I(μ) ~ (2πμ)^κ L₀`.
pub fn leading_l0(spec: &OscillatorySpec) -> Result<Complex64> {
    let space = &spec.space;
    let amp = &spec.amplitude;
    match space.kind {
        SpaceKind::Su2BothSided => {
            let rr = gauss_legendre(48, 0.0, 2.0 * PI);
            let cr = gauss_legendre(24, -1.0, 1.0);
            let pr = circle_rule(48);
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (r, wr) in rr.nodes.iter().zip(&rr.weights) {
                for (c, wc) in cr.nodes.iter().zip(&cr.weights) {
                    for (p, wp) in pr.nodes.iter().zip(&pr.weights) {
                        let s = (1.0 - c * c).max(0.0).sqrt();
                        nodes.push(vec![r * s * p.cos(), r * s * p.sin(), r * c]);
                        weights.push(wr * wc * wp * 2.0 * PI * r * r);
                    }
                }
            }
            let kg = &space.k_group;
            let rule = HaarRule::exact_for(kg, 2.0 * amp.group_band + 2.0);
            let vol = kg.volume;
            let vals: Vec<Result<Complex64>> = nodes
                .par_iter()
                .map(|x| {
                    let b = (amp.base)(x) * chart_cutoff(space, x);
                    if b == 0.0 {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let d = transverse_hessian_det(space, x)?;
                    let g = GroupElement::Quat(match space.param_to_point(x) {
                        crate::space::SpacePoint::Group(q) => q,
                        _ => unreachable!(),
                    });
                    let zero = [0.0; 3];
                    let inner = rule.integrate(|k| {
                        let k1 = kg.conjugate(&g, k);
                        amp.eval(space, x, &zero, &k1, k)
                    });
                    Ok(inner / (vol * d))
                })
                .collect();
            let mut out = Vec::with_capacity(vals.len());
            for (v, w) in vals.into_iter().zip(&weights) {
                out.push(v? * *w);
            }
            Ok(compensated_sum_complex(out))
        }
        _ => {
            let axis = orbit_axis(space)?;
            let bx = space.param_box();
            let n = space.dimension;
            let c = amp.xi_decay;
            let rules: Vec<Rule1d> = (0..n)
                .map(|i| {
                    if i == axis {
                        gauss_legendre(256, bx[i].0, bx[i].1)
                    } else {
                        gauss_legendre(96, bx[i].0, bx[i].1)
                    }
                })
                .collect();
            let fibre = gauss_hermite_scaled(32, (0.5 / c).sqrt());
            let theta = circle_rule((4.0 * amp.group_band).ceil() as usize + 4);
            let mut nodes = vec![(vec![], 1.0)];
            for r in &rules {
                nodes = nodes
                    .into_iter()
                    .flat_map(|(x, w): (Vec<f64>, f64)| {
                        r.nodes.iter().zip(&r.weights).map(move |(a, b)| {
                            let mut y = x.clone();
                            y.push(*a);
                            (y, w * b)
                        })
                    })
                    .collect();
            }
            let vals: Vec<Result<Complex64>> = nodes
                .par_iter()
                .map(|(x, w)| {
                    if (amp.base)(x) * chart_cutoff(space, x) == 0.0 {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let d = transverse_hessian_det(space, x)?;
                    let mut acc = Complex64::new(0.0, 0.0);
                    let fib_nodes: Vec<(Vec<f64>, f64)> = if n == 1 {
                        vec![(vec![0.0], 1.0)]
                    } else {
                        fibre
                            .nodes
                            .iter()
                            .zip(&fibre.weights)
                            .map(|(v, fw)| {
                                let mut xi = vec![0.0; n];
                                xi[1 - axis] = *v;
                                (xi, *fw)
                            })
                            .collect()
                    };
                    for (t1, wt) in theta.nodes.iter().zip(&theta.weights) {
                        let k1 = GroupElement::torus(&[*t1]);
                        let k = GroupElement::torus(&[-*t1]);
                        for (xi, fw) in &fib_nodes {
                            acc += amp.eval(space, x, xi, &k1, &k) * (wt * fw);
                        }
                    }
                    // dθ₁dθ/4π² leaves dθ₁/2π (the circle rule) over 2π.
                    Ok(acc * (*w / (2.0 * PI * d)))
                })
                .collect();
            let mut out = Vec::with_capacity(vals.len());
            for v in vals {
                out.push(v?);
            }
            Ok(compensated_sum_complex(out))
        }
    }
}

// ---- comparison ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscRow {
    pub mu: f64,
    pub re: f64,
    pub im: f64,
    /// `I(μ) / ((2πμ)^κ L₀)`, by modulus.
    pub ratio: f64,
    pub err: f64,
}

/// `|ratio - 1| ≈ C μ log^p(1/μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderFit {
    pub log_power: u32,
    pub constant: f64,
    /// Largest `|ratio - 1| / (μ log^p(1/μ))` on the grid.
    pub envelope: f64,
    pub misfit: f64,
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscResult {
    pub space: SpaceKind,
    pub amplitude: String,
    pub kappa: usize,
    pub l0_re: f64,
    pub l0_im: f64,
    pub rows: Vec<OscRow>,
    /// Least-squares slope of `log |I|` against `log μ`.
    pub slope: f64,
    pub remainder: RemainderFit,
}

impl OscResult {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::export::write_csv(path, &self.rows)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        crate::export::write_json(path, self)
    }

    pub fn max_ratio_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.ratio - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn fit_remainder(rows: &[OscRow]) -> RemainderFit {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.mu, (r.ratio - 1.0).abs(), r.err))
        .filter(|(mu, d, e)| *d > 10.0 * e && *d > 0.0 && *mu < 1.0)
        .map(|(mu, d, _)| (mu, d))
        .collect();
    let fit = |p: u32| {
        let res: Vec<f64> = pts
            .iter()
            .map(|(mu, d)| d.ln() - mu.ln() - p as f64 * (1.0 / mu).ln().ln())
            .collect();
        let m = if res.is_empty() {
            0.0
        } else {
            res.iter().sum::<f64>() / res.len() as f64
        };
        let misfit = res.iter().map(|r| (r - m).powi(2)).sum::<f64>();
        let envelope = rows
            .iter()
            .filter(|r| r.mu < 1.0)
            .map(|r| (r.ratio - 1.0).abs() / (r.mu * (1.0 / r.mu).ln().powi(p as i32)))
            .fold(0.0, f64::max);
        RemainderFit {
            log_power: p,
            constant: m.exp(),
            envelope,
            misfit,
            used: pts.len(),
        }
    };
    let (a, b) = (fit(0), fit(1));
    if b.misfit < 0.99 * a.misfit {
        b
    } else {
        a
    }
}

/// Direct values against `(2πμ)^κ L₀` on the spec's `μ` grid.
pub fn asymptotic_compare(spec: &OscillatorySpec) -> Result<OscResult> {
    if spec.mu_grid.len() < 2 {
        return Err(EquiheatError::Domain(
            "μ grid needs at least two points".into(),
        ));
    }
    let kappa = transverse_kappa(&spec.space);
    let l0 = leading_l0(spec)?;
    if l0.norm() < 1e-300 {
        return Err(EquiheatError::Domain("leading coefficient vanishes".into()));
    }
    let di = DirectIntegrator::new(spec)?;
    let mut rows = Vec::with_capacity(spec.mu_grid.len());
    for &mu in &spec.mu_grid {
        let v = di.eval(mu)?;
        let lead = (2.0 * PI * mu).powi(kappa as i32) * l0.norm();
        rows.push(OscRow {
            mu,
            re: v.re,
            im: v.im,
            ratio: v.value().norm() / lead,
            err: v.error / lead,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.mu.ln()).collect();
    let ly: Vec<f64> = rows
        .iter()
        .map(|r| Complex64::new(r.re, r.im).norm().ln())
        .collect();
    Ok(OscResult {
        space: spec.space.kind,
        amplitude: spec.amplitude.label.clone(),
        kappa,
        l0_re: l0.re,
        l0_im: l0.im,
        slope: ls_slope(&lx, &ly),
        remainder: fit_remainder(&rows),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRow {
    pub mu: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub delta: f64,
    pub rows: Vec<LocalizationRow>,
    /// Fitted `N` in `|I - I_loc| ≤ C μ^N`.
    pub order: f64,
}

/// `|I(μ) - I_loc(μ)|` with `(k₁, k)` cut down to a window of half-width
/// `δ` around the fixed-point set.
pub fn localization_probe(
    spec: &OscillatorySpec,
    delta: f64,
    mus: &[f64],
) -> Result<LocalizationReport> {
    let full = DirectIntegrator::new(spec)?;
    let loc = DirectIntegrator::localized(spec, delta)?;
    let mut rows = Vec::new();
    for &mu in mus {
        let a = full.eval(mu)?;
        let b = loc.eval(mu)?;
        rows.push(LocalizationRow {
            mu,
            difference: (a.value() - b.value()).norm(),
        });
    }
    let used: Vec<&LocalizationRow> = rows.iter().filter(|r| r.difference > 1e-13).collect();
    if used.len() < 2 {
        return Err(EquiheatError::Fit(
            "localization differences fall below the quadrature floor".into(),
        ));
    }
    let lx: Vec<f64> = used.iter().map(|r| r.mu.ln()).collect();
    let ly: Vec<f64> = used.iter().map(|r| r.difference.ln()).collect();
    Ok(LocalizationReport {
        delta,
        order: ls_slope(&lx, &ly),
        rows,
    })
}

// ---- disintegration --------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisintegrationCheck {
    pub l0_re: f64,
    pub l0_im: f64,
    pub h_integral_re: f64,
    pub h_integral_im: f64,
    pub zero_level: ZeroLevelIntegral,
    /// `|L₀ - ∫_ℍ v · ∫_{Reg Ξ} u / vol 𝒪|`.
    pub difference: f64,
}

/// `∫_ℍ v(h) dh` over the principal isotropy group.
pub fn h_integral(spec: &OscillatorySpec) -> Complex64 {
    let amp = &spec.amplitude;
    PrincipalIsotropy::for_space(&spec.space)
        .integrate(4.0 * amp.group_band + 4.0, |k1, k| (amp.group)(k1, k))
}

/// Compares `L₀` with the product of the `ℍ` integral of `v` and the
/// zero-level integral of `u`.
pub fn disintegration_check(
    spec: &OscillatorySpec,
    method: VolumeMethod,
    budget: usize,
) -> Result<DisintegrationCheck> {
    let l0 = leading_l0(spec)?;
    let h = h_integral(spec);
    let space = spec.space.clone();
    let amp = spec.amplitude.clone();
    let z = zero_level_integral(
        &spec.space,
        move |pt| amp.restricted(&space, pt),
        method,
        budget,
    )?;
    let prod = h * z.estimate;
    Ok(DisintegrationCheck {
        l0_re: l0.re,
        l0_im: l0.im,
        h_integral_re: h.re,
        h_integral_im: h.im,
        difference: (l0 - prod).norm(),
        zero_level: z,
    })
}

#[cfg(test)]
mod tests;
