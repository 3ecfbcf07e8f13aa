//! Momentum maps of the cotangent-lifted `𝕂`-action, isotropy data, orbit
//! volumes and the Gaussian volume of the regular zero level.
//!
//! Cotangent points live in the principal chart of [`SpaceModel`]. Covectors
//! are measured with the dual metric; `d(Reg Ξ)` is the Riemannian measure of
//! the base times Lebesgue measure on the annihilator fibre.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EquiheatError, Result};
use crate::group::{GroupElement, GroupModel, HaarRule, IrrepInfo};
use crate::quadrature::{
    circle_rule, gauss_hermite_scaled, gauss_legendre, par_weighted_sum_real, trapezoid_periodic,
};
use crate::space::{richardson, SpaceKind, SpaceModel};

/// Singular values below this are zero.
pub const RANK_ZERO: f64 = 1e-8;
/// Singular values above this are nonzero; the band in between is ambiguous.
pub const RANK_NONZERO: f64 = 1e-6;

const FIBER_NODES: usize = 32;
const FHAT_NODES: usize = 96;
const FHAT_BOX: f64 = 18.0;
const MC_STREAMS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentPoint {
    /// Base point in principal coordinates.
    pub p: Vec<f64>,
    /// Covector components in the same coordinates.
    pub xi: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(p: Vec<f64>, xi: Vec<f64>) -> Self {
        CotangentPoint { p, xi }
    }

    pub fn zero_section(p: Vec<f64>) -> Self {
        let n = p.len();
        CotangentPoint {
            p,
            xi: vec![0.0; n],
        }
    }
}

/// Principal isotropy group `ℍ ⊂ 𝕂` of the bundled actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrincipalIsotropy {
    /// `{(θ, -θ)}` in `T¹ × T¹`.
    AntiDiagonalCircle,
    /// `{(h, h)}` in `SU(2) × SU(2)`.
    DiagonalSu2,
}

impl PrincipalIsotropy {
    pub fn for_space(space: &SpaceModel) -> Self {
        match space.kind {
            SpaceKind::Su2BothSided => PrincipalIsotropy::DiagonalSu2,
            _ => PrincipalIsotropy::AntiDiagonalCircle,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            PrincipalIsotropy::AntiDiagonalCircle => 1,
            PrincipalIsotropy::DiagonalSu2 => 3,
        }
    }

    /// Riemannian volume in the product metric of `𝕂`.
    pub fn volume(&self) -> f64 {
        match self {
            PrincipalIsotropy::AntiDiagonalCircle => 2.0 * PI * 2f64.sqrt(),
            PrincipalIsotropy::DiagonalSu2 => 16.0 * PI * PI * 2.0 * 2f64.sqrt(),
        }
    }

    /// Normalized Haar integral over `ℍ` of `f(k₁, k)`, exact for integrands
    /// whose spectrum lies below `band`.
    pub fn integrate<F>(&self, band: f64, f: F) -> Complex64
    where
        F: Fn(&GroupElement, &GroupElement) -> Complex64 + Sync,
    {
        match self {
            PrincipalIsotropy::AntiDiagonalCircle => {
                let rule = circle_rule(band.max(0.0).ceil() as usize * 2 + 2);
                let pairs: Vec<(GroupElement, GroupElement)> = rule
                    .nodes
                    .iter()
                    .map(|s| (GroupElement::torus(&[*s]), GroupElement::torus(&[-*s])))
                    .collect();
                crate::quadrature::par_weighted_sum(&rule.weights, |i| f(&pairs[i].0, &pairs[i].1))
            }
            PrincipalIsotropy::DiagonalSu2 => {
                let rule = HaarRule::exact_for(&GroupModel::su2(), band);
                rule.integrate(|h| f(h, h))
            }
        }
    }

    /// `[(π_σ ⊗ π_σ)|ℍ : 1] = ∫_ℍ χ̄_σ(k₁) χ̄_σ(k)`.
    pub fn multiplicity(&self, sigma: &IrrepInfo) -> Result<usize> {
        let band = 2.0 * sigma.casimir.sqrt() + 2.0;
        let z = self.integrate(band, |k1, k| {
            (sigma.character(k1) * sigma.character(k)).conj()
        });
        let r = z.re.round();
        if (z.re - r).abs() > 1e-9 || z.im.abs() > 1e-9 || r < 0.0 {
            return Err(EquiheatError::NonIntegral {
                label: sigma.label.to_string(),
                value: z.re,
            });
        }
        Ok(r as usize)
    }
}

/// `J_X(p, ξ) = ξ(X̃_p)` for `X` in orthonormal coordinates of `Lie(𝕂)`.
pub fn momentum_eval(space: &SpaceModel, pt: &CotangentPoint, x: &[f64]) -> Result<f64> {
    if x.len() != space.kk_dimension() {
        return Err(EquiheatError::Domain(format!(
            "expected {} Lie coordinates",
            space.kk_dimension()
        )));
    }
    let v = space.fundamental_fields(&pt.p);
    let field = &v * DVector::from_column_slice(x);
    Ok(field.iter().zip(&pt.xi).map(|(a, b)| a * b).sum())
}

/// Singular values of the fundamental-field map `Lie(𝕂) → T_pM` measured in
/// an orthonormal frame, with the rank classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub ambiguous: bool,
}

struct Frame {
    /// Cholesky factor of the metric, `g = L Lᵀ`.
    l: DMatrix<f64>,
    /// SVD of `W = Lᵀ V`, padded with zero columns to be at least square.
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    kk_dim: usize,
}

/// Fundamental fields in the isometric embedding of the space.
fn embedded_fields(space: &SpaceModel, p: &[f64]) -> DMatrix<f64> {
    let m = space.kk_dimension();
    let base = space.param_to_point(p);
    let e0 = space.embed(&base);
    let mut v = DMatrix::zeros(e0.len(), m);
    for j in 0..m {
        let col = richardson(crate::space::FD_STEP, |h| {
            let mut y = vec![0.0; m];
            y[j] = h;
            let (k1, k) = space.kk_exp(&y).expect("dimension");
            space.embed(&space.act_kk_point(&k1, &k, &base))
        });
        for i in 0..e0.len() {
            v[(i, j)] = col[i];
        }
    }
    v
}

fn frame(space: &SpaceModel, p: &[f64]) -> Result<Frame> {
    let g = space.param_metric(p);
    let l = g
        .clone()
        .cholesky()
        .ok_or_else(|| EquiheatError::SingularStratum(format!("degenerate chart metric at {p:?}")))?
        .l();
    let v = space.fundamental_fields(p);
    let (n, m) = v.shape();
    let mut w = DMatrix::zeros(n, m.max(n));
    w.view_mut((0, 0), (n, m)).copy_from(&(l.transpose() * v));
    Ok(Frame {
        l,
        svd: SVD::new(w, true, false),
        kk_dim: m,
    })
}

fn profile_of(f: &Frame) -> RankProfile {
    profile_from_values(f.svd.singular_values.iter().copied(), f.kk_dim)
}

fn profile_from_values(values: impl Iterator<Item = f64>, kk_dim: usize) -> RankProfile {
    let mut sv: Vec<f64> = values.collect();
    sv.resize(kk_dim.max(sv.len()), 0.0);
    sv.truncate(kk_dim);
    sv.sort_by(|a, b| b.total_cmp(a));
    let rank = sv.iter().filter(|s| **s > RANK_NONZERO).count();
    let ambiguous = sv.iter().any(|s| *s >= RANK_ZERO && *s <= RANK_NONZERO);
    RankProfile {
        singular_values: sv,
        rank,
        ambiguous,
    }
}

/// Rank profile at a point given in principal coordinates; valid on the
/// chart boundary as well (poles of S²).
pub fn orbit_rank(space: &SpaceModel, p: &[f64]) -> Result<RankProfile> {
    let v = embedded_fields(space, p);
    let m = v.ncols();
    Ok(profile_from_values(v.singular_values().iter().copied(), m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    /// Dimension of principal orbits.
    pub kappa: usize,
    /// Number of distinct isotropy dimensions met.
    pub lambda: usize,
    pub isotropy_dims: Vec<usize>,
    pub principal: PrincipalIsotropy,
    pub ambiguous: usize,
    pub samples: usize,
}

fn random_param(space: &SpaceModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = space
            .param_box()
            .iter()
            .map(|(a, b)| rng.gen_range(*a..*b))
            .collect();
        if space.kind != SpaceKind::Su2BothSided || crate::group::norm(&x) < 2.0 * PI * 0.95 {
            return x;
        }
    }
}

/// Ranks of the orbit map over random points and the special points of the
/// space. `κ` is the maximal rank, `Λ` the number of isotropy dimensions.
pub fn isotropy_analysis(space: &SpaceModel, samples: usize, seed: u64) -> Result<IsotropyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = (0..samples)
        .map(|_| random_param(space, &mut rng))
        .collect();
    points.extend(space.special_points());
    let mut ambiguous = 0;
    let mut ranks = Vec::new();
    for p in &points {
        let prof = orbit_rank(space, p)?;
        if prof.ambiguous {
            ambiguous += 1;
            continue;
        }
        ranks.push(prof.rank);
    }
    let kappa = *ranks
        .iter()
        .max()
        .ok_or_else(|| EquiheatError::SingularStratum("every sample was rank-ambiguous".into()))?;
    let mut dims: Vec<usize> = ranks.iter().map(|r| space.kk_dimension() - r).collect();
    dims.sort_unstable();
    dims.dedup();
    let principal = PrincipalIsotropy::for_space(space);
    if space.kk_dimension() - kappa != principal.dimension() {
        return Err(EquiheatError::GeometryIncomplete(format!(
            "principal isotropy of {} has dimension {}, rank analysis gives {}",
            space.name(),
            principal.dimension(),
            space.kk_dimension() - kappa
        )));
    }
    Ok(IsotropyReport {
        kappa,
        lambda: dims.len(),
        isotropy_dims: dims,
        principal,
        ambiguous,
        samples: points.len(),
    })
}

fn principal_kappa(space: &SpaceModel) -> usize {
    space.kk_dimension() - PrincipalIsotropy::for_space(space).dimension()
}

/// Riemannian volume of the `𝕂`-orbit through `p`:
/// `pdet(fundamental fields) · vol(𝕂)/vol(ℍ)`.
pub fn orbit_volume(space: &SpaceModel, pt: &CotangentPoint) -> Result<f64> {
    let prof = orbit_rank(space, &pt.p)?;
    let kappa = principal_kappa(space);
    if prof.ambiguous || prof.rank < kappa {
        return Err(EquiheatError::SingularStratum(format!(
            "orbit through {:?} has rank {} < {kappa}",
            pt.p, prof.rank
        )));
    }
    let pdet: f64 = prof.singular_values[..kappa].iter().product();
    Ok(pdet * space.kk_volume() / PrincipalIsotropy::for_space(space).volume())
}

/// Orbit volume from the cotangent-lifted fields `(V, -(∂V)ᵀξ)` measured with
/// the Euclidean metric of the chart on `T*M`.
pub fn orbit_volume_lifted(space: &SpaceModel, pt: &CotangentPoint) -> Result<f64> {
    let n = space.dimension;
    let m = space.kk_dimension();
    let v = space.fundamental_fields(&pt.p);
    let mut lifted = DMatrix::zeros(2 * n, m);
    lifted.view_mut((0, 0), (n, m)).copy_from(&v);
    for i in 0..n {
        let dv = richardson(1e-4, |h| {
            let mut q = pt.p.clone();
            q[i] += h;
            space.fundamental_fields(&q).as_slice().to_vec()
        });
        let dv = DMatrix::from_column_slice(n, m, &dv);
        for j in 0..m {
            let c: f64 = (0..n).map(|a| dv[(a, j)] * pt.xi[a]).sum();
            lifted[(n + i, j)] = -c;
        }
    }
    let mut ev: Vec<f64> = lifted.singular_values().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let kappa = principal_kappa(space);
    if ev[kappa - 1] <= RANK_NONZERO {
        return Err(EquiheatError::SingularStratum(format!(
            "lifted orbit through {:?} is degenerate",
            pt.p
        )));
    }
    let pdet: f64 = ev.iter().take_while(|s| **s > RANK_NONZERO).product();
    Ok(pdet * space.kk_volume() / PrincipalIsotropy::for_space(space).volume())
}

/// Annihilator of the orbit directions at `p`, as an `n × (n-κ)` matrix whose
/// columns are covectors orthonormal for the dual metric.
pub fn annihilator_basis(space: &SpaceModel, p: &[f64]) -> Result<DMatrix<f64>> {
    let f = frame(space, p)?;
    let prof = profile_of(&f);
    if prof.ambiguous {
        return Err(EquiheatError::SingularStratum(format!(
            "rank at {p:?} is ambiguous"
        )));
    }
    let n = space.dimension;
    let u = f.svd.u.as_ref().expect("left singular vectors");
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|i| f.svd.singular_values[*i] < RANK_ZERO)
        .map(|i| &f.l * u.column(i))
        .collect();
    if cols.is_empty() {
        return Ok(DMatrix::zeros(n, 0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// `F̂(p, ξ) = (4π)^{-d/2} ∫ e^{i Σ c^j_l ζ_l ξ_j} e^{-|ζ|²/4} dζ` by product
/// Gauss-Legendre quadrature on `|ζ_l| ≤ 18`, with the Jacobian at its
/// `t → 0` value 1.
pub fn f_hat(space: &SpaceModel, pt: &CotangentPoint) -> f64 {
    let c = space.heat_fields(&pt.p);
    let v = c.transpose() * DVector::from_column_slice(&pt.xi);
    let norm = (4.0 * PI).sqrt();
    v.iter()
        .map(|vl| {
            let rule = gauss_legendre(
                FHAT_NODES + (6.0 * vl.abs()).ceil() as usize,
                -FHAT_BOX,
                FHAT_BOX,
            );
            rule.integrate(|z| (vl * z).cos() * (-z * z / 4.0).exp()) / norm
        })
        .product()
}

/// Closed form `e^{-|Cᵀξ|²}` of [`f_hat`].
pub fn f_hat_closed(space: &SpaceModel, pt: &CotangentPoint) -> f64 {
    let c = space.heat_fields(&pt.p);
    let v = c.transpose() * DVector::from_column_slice(&pt.xi);
    (-v.norm_squared()).exp()
}

/// Quadrature sample of `Reg Ξ` carrying the weights of `d(Reg Ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegXiSample {
    pub points: Vec<CotangentPoint>,
    pub weights: Vec<f64>,
    /// Orbit volume at each point.
    pub orbit_volumes: Vec<f64>,
    /// Base nodes dropped as singular or rank-ambiguous.
    pub discarded: usize,
    /// Largest `|J_X|` over the sample and the basis of `Lie(𝕂)`.
    pub max_momentum: f64,
}

struct BaseNode {
    p: Vec<f64>,
    weight: f64,
}

fn base_nodes(space: &SpaceModel, count: usize) -> Vec<BaseNode> {
    let per = |d: u32| ((count as f64).powf(1.0 / d as f64).ceil() as usize).max(4);
    let mut out = Vec::new();
    match space.kind {
        SpaceKind::Torus1 => {
            let r = trapezoid_periodic(per(1), -PI, 2.0 * PI);
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                out.push(BaseNode {
                    p: vec![*x],
                    weight: *w,
                });
            }
        }
        SpaceKind::Torus2 => {
            let r = trapezoid_periodic(per(2), -PI, 2.0 * PI);
            for (x, wx) in r.nodes.iter().zip(&r.weights) {
                for (y, wy) in r.nodes.iter().zip(&r.weights) {
                    out.push(BaseNode {
                        p: vec![*x, *y],
                        weight: wx * wy,
                    });
                }
            }
        }
        SpaceKind::Sphere2 => {
            let n = per(2);
            let (th, ph) = (
                gauss_legendre(n, 0.0, PI),
                trapezoid_periodic(n, -PI, 2.0 * PI),
            );
            for (a, wa) in th.nodes.iter().zip(&th.weights) {
                for (b, wb) in ph.nodes.iter().zip(&ph.weights) {
                    let p = vec![*a, *b];
                    let weight = wa * wb * space.param_density(&p);
                    out.push(BaseNode { p, weight });
                }
            }
        }
        SpaceKind::Su2BothSided => {
            let n = per(3);
            let rr = gauss_legendre(n, 0.0, 2.0 * PI);
            let ct = gauss_legendre(n, -1.0, 1.0);
            let ph = trapezoid_periodic(n, 0.0, 2.0 * PI);
            for (r, wr) in rr.nodes.iter().zip(&rr.weights) {
                for (c, wc) in ct.nodes.iter().zip(&ct.weights) {
                    let s = (1.0 - c * c).sqrt();
                    for (f, wf) in ph.nodes.iter().zip(&ph.weights) {
                        let p = vec![r * s * f.cos(), r * s * f.sin(), r * c];
                        let weight = wr * wc * wf * r * r * space.param_density(&p);
                        out.push(BaseNode { p, weight });
                    }
                }
            }
        }
    }
    out
}

/// Fibre nodes over `p`: covectors in the annihilator with Lebesgue weights.
fn fiber_nodes(space: &SpaceModel, p: &[f64], kappa: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let basis = annihilator_basis(space, p)?;
    let k = basis.ncols();
    if k != space.dimension - kappa {
        return Err(EquiheatError::SingularStratum(format!(
            "fibre dimension {k} at {p:?}"
        )));
    }
    let n = space.dimension;
    if k == 0 {
        return Ok(vec![(vec![0.0; n], 1.0)]);
    }
    let rule = gauss_hermite_scaled(FIBER_NODES, 1.0 / 2f64.sqrt());
    let mut out = vec![(DVector::zeros(n), 1.0)];
    for a in 0..k {
        let col = basis.column(a).into_owned();
        out = out
            .into_iter()
            .flat_map(|(xi, w)| {
                let col = col.clone();
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(move |(s, ws)| (&xi + &col * *s, w * ws))
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    Ok(out
        .into_iter()
        .map(|(xi, w)| (xi.as_slice().to_vec(), w))
        .collect())
}

type FibreNodes = Vec<(Vec<f64>, f64)>;

/// Deterministic quadrature sample of `Reg Ξ` with about `budget` nodes.
pub fn sample_regular_zero_level(space: &SpaceModel, budget: usize) -> Result<RegXiSample> {
    if budget < 64 {
        return Err(EquiheatError::Domain(format!(
            "budget {budget} is too small"
        )));
    }
    let kappa = principal_kappa(space);
    let per_base = if space.dimension > kappa {
        FIBER_NODES.pow((space.dimension - kappa) as u32)
    } else {
        1
    };
    let base = base_nodes(space, (budget / per_base).max(16));
    let per_node: Vec<Option<(FibreNodes, f64)>> = base
        .par_iter()
        .map(|b| {
            let pt = CotangentPoint::zero_section(b.p.clone());
            let vol = orbit_volume(space, &pt).ok()?;
            let fib = fiber_nodes(space, &b.p, kappa).ok()?;
            Some((fib, vol))
        })
        .collect();
    let mut sample = RegXiSample {
        points: Vec::new(),
        weights: Vec::new(),
        orbit_volumes: Vec::new(),
        discarded: 0,
        max_momentum: 0.0,
    };
    let m = space.kk_dimension();
    for (b, node) in base.iter().zip(per_node) {
        let Some((fib, vol)) = node else {
            sample.discarded += 1;
            continue;
        };
        let v = space.fundamental_fields(&b.p);
        for (xi, w) in fib {
            for j in 0..m {
                let j_val: f64 = (0..space.dimension).map(|i| v[(i, j)] * xi[i]).sum();
                sample.max_momentum = sample.max_momentum.max(j_val.abs());
            }
            sample.points.push(CotangentPoint::new(b.p.clone(), xi));
            sample.weights.push(b.weight * w);
            sample.orbit_volumes.push(vol);
        }
    }
    Ok(sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeMethod {
    Quadrature,
    MonteCarlo { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroLevelIntegral {
    pub estimate: f64,
    pub error_bar: f64,
    pub method: VolumeMethod,
    pub budget: usize,
    pub discarded: usize,
}

fn quadrature_integral<F>(space: &SpaceModel, f: &F, budget: usize) -> Result<(f64, usize)>
where
    F: Fn(&CotangentPoint) -> f64 + Sync,
{
    let s = sample_regular_zero_level(space, budget)?;
    let w: Vec<f64> = s
        .weights
        .iter()
        .zip(&s.orbit_volumes)
        .map(|(w, v)| w / v)
        .collect();
    Ok((par_weighted_sum_real(&w, |i| f(&s.points[i])), s.discarded))
}

fn mc_stream<F>(space: &SpaceModel, f: &F, n: usize, seed: u64, stream: u64) -> (f64, usize)
where
    F: Fn(&CotangentPoint) -> f64 + Sync,
{
    let kappa = principal_kappa(space);
    let bx = space.param_box();
    let box_vol: f64 = bx.iter().map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let d = bx.len();
    // Jittered strata: one uniform point per cell of a regular grid.
    let cells = ((n as f64).powf(1.0 / d as f64).floor() as usize).max(1);
    let total = cells.pow(d as u32);
    let pts: Vec<Vec<f64>> = (0..total)
        .map(|mut c| {
            bx.iter()
                .map(|(a, b)| {
                    let i = c % cells;
                    c /= cells;
                    a + (b - a) * (i as f64 + rng.gen::<f64>()) / cells as f64
                })
                .collect()
        })
        .collect();
    let vals: Vec<Option<f64>> = pts
        .par_iter()
        .map(|p| {
            if space.kind == SpaceKind::Su2BothSided && crate::group::norm(p) >= 2.0 * PI {
                return Some(0.0);
            }
            let pt0 = CotangentPoint::zero_section(p.clone());
            let vol = orbit_volume(space, &pt0).ok()?;
            let fib = fiber_nodes(space, p, kappa).ok()?;
            let inner: f64 = fib
                .iter()
                .map(|(xi, w)| w * f(&CotangentPoint::new(p.clone(), xi.clone())))
                .sum();
            Some(inner * space.param_density(p) / vol)
        })
        .collect();
    let discarded = vals.iter().filter(|v| v.is_none()).count();
    let sum: f64 = crate::quadrature::compensated_sum(vals.into_iter().flatten());
    (sum * box_vol / total as f64, discarded)
}

/// `∫_{Reg Ξ} f / vol 𝒪 d(Reg Ξ)`.
///
/// Quadrature reports the difference against a rule with an eighth of the
/// budget as its error bar; Monte Carlo uses independent seeded streams and
/// reports the standard error of their mean.
pub fn zero_level_integral<F>(
    space: &SpaceModel,
    f: F,
    method: VolumeMethod,
    budget: usize,
) -> Result<ZeroLevelIntegral>
where
    F: Fn(&CotangentPoint) -> f64 + Sync,
{
    match method {
        VolumeMethod::Quadrature => {
            let (fine, discarded) = quadrature_integral(space, &f, budget)?;
            let (coarse, _) = quadrature_integral(space, &f, (budget / 8).max(64))?;
            Ok(ZeroLevelIntegral {
                estimate: fine,
                error_bar: (fine - coarse).abs(),
                method,
                budget,
                discarded,
            })
        }
        VolumeMethod::MonteCarlo { seed } => {
            let per = (budget / MC_STREAMS as usize).max(16);
            let runs: Vec<(f64, usize)> = (0..MC_STREAMS)
                .map(|s| mc_stream(space, &f, per, seed, s))
                .collect();
            let k = runs.len() as f64;
            let mean = runs.iter().map(|r| r.0).sum::<f64>() / k;
            let var = runs.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (k - 1.0);
            let discarded = runs.iter().map(|r| r.1).sum();
            Ok(ZeroLevelIntegral {
                estimate: mean,
                error_bar: (var / k).sqrt(),
                method,
                budget,
                discarded,
            })
        }
    }
}

/// Gaussian volume `ṽol = ∫_{Reg Ξ} α F̂ / vol 𝒪 d(Reg Ξ)` with the partition
/// of unity scaled by `alpha_scale`.
pub fn gaussian_volume(
    space: &SpaceModel,
    method: VolumeMethod,
    budget: usize,
    alpha_scale: f64,
) -> Result<ZeroLevelIntegral> {
    zero_level_integral(space, |pt| alpha_scale * f_hat(space, pt), method, budget)
}

/// Reference values of the Gaussian volume for the bundled spaces.
pub fn gaussian_volume_reference(space: &SpaceModel) -> f64 {
    match space.kind {
        SpaceKind::Torus1 | SpaceKind::Su2BothSided => 1.0,
        SpaceKind::Torus2 => 2.0 * PI.powf(1.5),
        SpaceKind::Sphere2 => PI.powf(1.5),
    }
}

/// Critical-set data entering the leading heat-trace coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalGeometry {
    pub space: SpaceKind,
    pub dimension: usize,
    pub kappa: usize,
    pub lambda: usize,
    pub principal: PrincipalIsotropy,
    pub gaussian_volume: f64,
    pub gaussian_volume_error: f64,
}

pub fn critical_geometry(space: &SpaceModel, budget: usize, seed: u64) -> Result<CriticalGeometry> {
    let iso = isotropy_analysis(space, 64, seed)?;
    let vol = gaussian_volume(space, VolumeMethod::Quadrature, budget, 1.0)?;
    Ok(CriticalGeometry {
        space: space.kind,
        dimension: space.dimension,
        kappa: iso.kappa,
        lambda: iso.lambda,
        principal: iso.principal,
        gaussian_volume: vol.estimate,
        gaussian_volume_error: vol.error_bar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::HalfInt;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn isotropy_of_bundled_spaces() {
        let cases = [
            (SpaceModel::t1(), 1, 1),
            (SpaceModel::t2(), 1, 1),
            (SpaceModel::s2(), 1, 2),
            (SpaceModel::su2(), 3, 1),
        ];
        for (s, kappa, lambda) in cases {
            let r = isotropy_analysis(&s, 32, 7).unwrap();
            assert_eq!((r.kappa, r.lambda), (kappa, lambda), "{}", s.name());
            assert_eq!(r.ambiguous, 0);
        }
    }

    #[test]
    fn orbit_volumes() {
        let t1 = SpaceModel::t1();
        assert_abs_diff_eq!(
            orbit_volume(&t1, &CotangentPoint::zero_section(vec![0.4])).unwrap(),
            2.0 * PI,
            epsilon = 1e-8
        );
        let s2 = SpaceModel::s2();
        for th in [0.3, 1.2, 2.9] {
            let v = orbit_volume(&s2, &CotangentPoint::zero_section(vec![th, 0.5])).unwrap();
            assert_abs_diff_eq!(v, 2.0 * PI * f64::sin(th), epsilon = 1e-8);
        }
        let su2 = SpaceModel::su2();
        let v = orbit_volume(&su2, &CotangentPoint::zero_section(vec![0.5, -1.0, 2.2])).unwrap();
        assert_abs_diff_eq!(v, 16.0 * PI * PI, epsilon = 1e-6);
    }

    #[test]
    fn poles_are_singular() {
        let s2 = SpaceModel::s2();
        let e = orbit_volume(&s2, &CotangentPoint::zero_section(vec![0.0, 0.0])).unwrap_err();
        assert!(matches!(e, EquiheatError::SingularStratum(_)));
    }

    #[test]
    fn lifted_orbit_volume_grows_with_the_covector() {
        // Rotation fields are linear in the stereographic-free (θ, φ) chart
        // only through sin θ, so the lift picks up ξ_θ.
        let s2 = SpaceModel::s2();
        let mut last = 0.0;
        for r in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let v = orbit_volume_lifted(&s2, &CotangentPoint::new(vec![1.0, 0.2], vec![0.0, r]))
                .unwrap();
            assert!(v >= last - 1e-9, "{r}: {v} < {last}");
            last = v;
        }
        let t1 = SpaceModel::t1();
        let a = orbit_volume_lifted(&t1, &CotangentPoint::new(vec![0.1], vec![0.0])).unwrap();
        let b = orbit_volume_lifted(&t1, &CotangentPoint::new(vec![0.1], vec![3.0])).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
    }

    #[test]
    fn f_hat_matches_closed_form() {
        let s2 = SpaceModel::s2();
        for (p, xi) in [
            (vec![0.7, 0.1], vec![0.3, 0.0]),
            (vec![2.0, -1.0], vec![1.5, 0.4]),
        ] {
            let pt = CotangentPoint::new(p, xi);
            assert_abs_diff_eq!(f_hat(&s2, &pt), f_hat_closed(&s2, &pt), epsilon = 1e-10);
        }
    }

    #[test]
    fn gaussian_volumes() {
        for s in [
            SpaceModel::t1(),
            SpaceModel::t2(),
            SpaceModel::s2(),
            SpaceModel::su2(),
        ] {
            let v = gaussian_volume(&s, VolumeMethod::Quadrature, 20_000, 1.0).unwrap();
            let r = gaussian_volume_reference(&s);
            assert!(
                (v.estimate / r - 1.0).abs() < 1e-6,
                "{}: {} vs {r}",
                s.name(),
                v.estimate
            );
            assert_eq!(v.discarded, 0);
        }
    }

    #[test]
    fn gaussian_volume_monte_carlo() {
        let s = SpaceModel::su2();
        let v = gaussian_volume(&s, VolumeMethod::MonteCarlo { seed: 11 }, 200_000, 1.0).unwrap();
        assert!((v.estimate - 1.0).abs() < 0.01, "{v:?}");
        assert!((v.estimate - 1.0).abs() < 5.0 * v.error_bar + 1e-12);
    }

    #[test]
    fn gaussian_volume_scales_with_partition() {
        let s = SpaceModel::s2();
        let a = gaussian_volume(&s, VolumeMethod::Quadrature, 4_000, 1.0)
            .unwrap()
            .estimate;
        let b = gaussian_volume(&s, VolumeMethod::Quadrature, 4_000, 2.0)
            .unwrap()
            .estimate;
        assert_abs_diff_eq!(b, 2.0 * a, epsilon = 1e-12);
    }

    #[test]
    fn zero_level_momentum_vanishes() {
        for s in [SpaceModel::t1(), SpaceModel::s2(), SpaceModel::su2()] {
            let sample = sample_regular_zero_level(&s, 2_000).unwrap();
            assert!(
                sample.max_momentum < 1e-8,
                "{}: {}",
                s.name(),
                sample.max_momentum
            );
        }
    }

    #[test]
    fn multiplicities() {
        let circle = PrincipalIsotropy::AntiDiagonalCircle;
        for m in [-2, 0, 3] {
            assert_eq!(circle.multiplicity(&IrrepInfo::weight(m)).unwrap(), 1);
        }
        let diag = PrincipalIsotropy::DiagonalSu2;
        for tw in 0..4 {
            assert_eq!(
                diag.multiplicity(&IrrepInfo::spin(HalfInt::from_twice(tw)))
                    .unwrap(),
                1
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn momentum_is_linear_in_the_lie_argument(
            th in 0.2f64..2.9, ph in -3.0f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0,
            x in -1.0f64..1.0, y in -1.0f64..1.0,
        ) {
            let s = SpaceModel::s2();
            let pt = CotangentPoint::new(vec![th, ph], vec![a, b]);
            let j = |v: &[f64]| momentum_eval(&s, &pt, v).unwrap();
            let lhs = j(&[x + 2.0 * y, 3.0 * x - y]);
            let rhs = x * j(&[1.0, 3.0]) + y * j(&[2.0, -1.0]);
            prop_assert!((lhs - rhs).abs() < 1e-8);
        }

        #[test]
        fn momentum_of_translations_is_the_covector(x in -3.0f64..3.0, xi in -5.0f64..5.0) {
            let s = SpaceModel::t1();
            let j = momentum_eval(&s, &CotangentPoint::new(vec![x], vec![xi]), &[1.0, 0.0]).unwrap();
            prop_assert!((j - xi).abs() < 1e-8);
        }
    }
}
