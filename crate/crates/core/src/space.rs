//! Compact homogeneous model spaces with their `K`- and `𝕂 = K×K`-actions.
//!
//! Each space carries two coordinate systems:
//!
//! * a *principal chart* (`param`): one chart covering the space up to a null
//!   set, used for momentum maps, zero-level sampling and the oscillatory
//!   phase. T¹ and T² use angles, S² uses spherical coordinates `(θ, φ)` and
//!   SU(2) canonical coordinates at the identity.
//! * an *atlas* with a smooth partition of unity, used for chart-wise
//!   integration of kernel diagonals: two arcs on T¹ (products of them on T²),
//!   two stereographic charts on S², canonical charts at `±1` on SU(2).
//!
//! `𝕂` acts by `(k₁, k)·p = k₁k·p` on T¹, T² (first factor) and S² (rotations
//! about the z-axis), and by `(k₁, k)·g = k₁ g k⁻¹` on SU(2).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{EquiheatError, Result};
use crate::group::{centered_angle, GroupElement, GroupModel, HalfInt, IrrepInfo, Quaternion};
use crate::quadrature::{gauss_legendre, trapezoid_periodic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    Torus1,
    Torus2,
    Sphere2,
    Su2BothSided,
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::Torus1 => "t1",
            SpaceKind::Torus2 => "t2",
            SpaceKind::Sphere2 => "s2",
            SpaceKind::Su2BothSided => "su2",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = EquiheatError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t1" => Ok(SpaceKind::Torus1),
            "t2" => Ok(SpaceKind::Torus2),
            "s2" => Ok(SpaceKind::Sphere2),
            "su2" => Ok(SpaceKind::Su2BothSided),
            other => Err(EquiheatError::UnknownModel(other.to_string())),
        }
    }
}

/// A point of a model space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpacePoint {
    Circle(f64),
    Torus([f64; 2]),
    Sphere([f64; 3]),
    Group(Quaternion),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceModel {
    pub kind: SpaceKind,
    pub dimension: usize,
    /// The acting group `K`.
    pub k_group: GroupModel,
    /// The group `G` whose heat kernel acts on the space (`M = G/K'`).
    pub heat_group: GroupModel,
    /// Riemannian volume.
    pub volume: f64,
}

/// Central finite difference with one Richardson step.
pub(crate) fn richardson<F>(h: f64, f: F) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let d = |h: f64| -> Vec<f64> {
        let (a, b) = (f(h), f(-h));
        a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    let (d1, d2) = (d(h), d(h / 2.0));
    d1.iter()
        .zip(&d2)
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect()
}

pub const FD_STEP: f64 = 1e-5;

const ARC_GAP: f64 = 0.15;
const CAP_Z: f64 = 0.9;
const BALL_GAP: f64 = 0.45 * PI;

pub(crate) fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

fn circle_alpha0(p: f64) -> f64 {
    1.0 - smooth_step((centered_angle(p).abs() - ARC_GAP) / (PI - 2.0 * ARC_GAP))
}

fn sphere_alpha0(p: &[f64; 3]) -> f64 {
    smooth_step((p[2] + CAP_Z) / (2.0 * CAP_Z))
}

fn su2_alpha0(q: &Quaternion) -> f64 {
    let r = 2.0 * q.half_angle();
    1.0 - smooth_step((r - (PI - BALL_GAP)) / (2.0 * BALL_GAP))
}

impl SpaceModel {
    pub fn new(kind: SpaceKind) -> Self {
        let (dimension, k_group, heat_group, volume) = match kind {
            SpaceKind::Torus1 => (1, GroupModel::u1(), GroupModel::u1(), 2.0 * PI),
            SpaceKind::Torus2 => (2, GroupModel::u1(), GroupModel::t2(), 4.0 * PI * PI),
            SpaceKind::Sphere2 => (2, GroupModel::u1(), GroupModel::so3(), 4.0 * PI),
            SpaceKind::Su2BothSided => (3, GroupModel::su2(), GroupModel::su2(), 16.0 * PI * PI),
        };
        SpaceModel {
            kind,
            dimension,
            k_group,
            heat_group,
            volume,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::new(name.parse()?))
    }

    pub fn t1() -> Self {
        Self::new(SpaceKind::Torus1)
    }

    pub fn t2() -> Self {
        Self::new(SpaceKind::Torus2)
    }

    pub fn s2() -> Self {
        Self::new(SpaceKind::Sphere2)
    }

    pub fn su2() -> Self {
        Self::new(SpaceKind::Su2BothSided)
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Irreducible representation of `K` with the given label (weight for the
    /// circle, spin for SU(2)).
    pub fn k_irrep(&self, label: HalfInt) -> Result<IrrepInfo> {
        match self.kind {
            SpaceKind::Su2BothSided => Ok(IrrepInfo::spin(label.abs())),
            _ if label.is_integer() => Ok(IrrepInfo::weight(label.twice() / 2)),
            _ => Err(EquiheatError::Domain(format!(
                "K = U(1) has no irrep {label}"
            ))),
        }
    }

    pub fn kk_dimension(&self) -> usize {
        2 * self.k_group.dimension
    }

    /// Riemannian volume of `𝕂 = K × K` with the product metric.
    pub fn kk_volume(&self) -> f64 {
        self.k_group.volume * self.k_group.volume
    }

    // ---- principal chart -------------------------------------------------

    /// Coordinate box of the principal chart.
    pub fn param_box(&self) -> Vec<(f64, f64)> {
        match self.kind {
            SpaceKind::Torus1 => vec![(-PI, PI)],
            SpaceKind::Torus2 => vec![(-PI, PI), (-PI, PI)],
            SpaceKind::Sphere2 => vec![(0.0, PI), (-PI, PI)],
            SpaceKind::Su2BothSided => vec![(-2.0 * PI, 2.0 * PI); 3],
        }
    }

    pub fn param_to_point(&self, x: &[f64]) -> SpacePoint {
        match self.kind {
            SpaceKind::Torus1 => SpacePoint::Circle(x[0]),
            SpaceKind::Torus2 => SpacePoint::Torus([x[0], x[1]]),
            SpaceKind::Sphere2 => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                SpacePoint::Sphere([st * cp, st * sp, ct])
            }
            SpaceKind::Su2BothSided => {
                let r = crate::group::norm(x);
                SpacePoint::Group(Quaternion::from_axis_angle([x[0], x[1], x[2]], r))
            }
        }
    }

    pub fn point_to_param(&self, p: &SpacePoint) -> Result<Vec<f64>> {
        match (self.kind, p) {
            (SpaceKind::Torus1, SpacePoint::Circle(a)) => Ok(vec![centered_angle(*a)]),
            (SpaceKind::Torus2, SpacePoint::Torus(a)) => {
                Ok(vec![centered_angle(a[0]), centered_angle(a[1])])
            }
            (SpaceKind::Sphere2, SpacePoint::Sphere(v)) => {
                Ok(vec![v[2].clamp(-1.0, 1.0).acos(), v[1].atan2(v[0])])
            }
            (SpaceKind::Su2BothSided, SpacePoint::Group(q)) => {
                self.k_group.log(&GroupElement::Quat(*q))
            }
            _ => Err(EquiheatError::Domain(
                "point does not belong to the space".into(),
            )),
        }
    }

    /// `b - a` in principal coordinates, with angular coordinates wrapped.
    pub fn param_diff(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match self.kind {
            SpaceKind::Torus1 | SpaceKind::Torus2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| centered_angle(y - x))
                .collect(),
            SpaceKind::Sphere2 => vec![b[0] - a[0], centered_angle(b[1] - a[1])],
            SpaceKind::Su2BothSided => a.iter().zip(b).map(|(x, y)| y - x).collect(),
        }
    }

    /// Riemannian metric in principal coordinates.
    pub fn param_metric(&self, x: &[f64]) -> DMatrix<f64> {
        match self.kind {
            SpaceKind::Torus1 | SpaceKind::Torus2 => {
                DMatrix::identity(self.dimension, self.dimension)
            }
            SpaceKind::Sphere2 => {
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, x[0].sin().powi(2)])
            }
            SpaceKind::Su2BothSided => {
                // Radial direction has unit length; tangential directions are
                // scaled by sin(r/2)/(r/2).
                let r = crate::group::norm(x);
                let s2 = self.k_group.canonical_jacobian(x);
                let mut g = DMatrix::identity(3, 3) * s2;
                if r > 1e-12 {
                    for i in 0..3 {
                        for j in 0..3 {
                            g[(i, j)] += (1.0 - s2) * x[i] * x[j] / (r * r);
                        }
                    }
                }
                g
            }
        }
    }

    /// Riemannian density `√det g` in principal coordinates.
    pub fn param_density(&self, x: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::Torus1 | SpaceKind::Torus2 => 1.0,
            SpaceKind::Sphere2 => x[0].sin().abs(),
            SpaceKind::Su2BothSided => self.k_group.canonical_jacobian(x),
        }
    }

    /// `𝕂`-element `exp(Y)` for `Y` in the orthonormal basis of `Lie(K) ⊕ Lie(K)`.
    pub fn kk_exp(&self, y: &[f64]) -> Result<(GroupElement, GroupElement)> {
        let d = self.k_group.dimension;
        if y.len() != 2 * d {
            return Err(EquiheatError::Domain(format!(
                "expected {} Lie coordinates",
                2 * d
            )));
        }
        Ok((self.k_group.exp(&y[..d])?, self.k_group.exp(&y[d..])?))
    }

    /// Principal coordinates of `(k₁, k)·p`, or `None` if the image leaves the
    /// principal chart.
    pub fn act_kk(&self, k1: &GroupElement, k: &GroupElement, x: &[f64]) -> Option<Vec<f64>> {
        match (self.kind, k1, k) {
            (SpaceKind::Torus1, GroupElement::Torus(a), GroupElement::Torus(b)) => {
                Some(vec![centered_angle(x[0] + a[0] + b[0])])
            }
            (SpaceKind::Torus2, GroupElement::Torus(a), GroupElement::Torus(b)) => {
                Some(vec![centered_angle(x[0] + a[0] + b[0]), x[1]])
            }
            (SpaceKind::Sphere2, GroupElement::Torus(a), GroupElement::Torus(b)) => {
                Some(vec![x[0], centered_angle(x[1] + a[0] + b[0])])
            }
            (SpaceKind::Su2BothSided, GroupElement::Quat(a), GroupElement::Quat(b)) => {
                let g = self.param_to_point(x);
                let SpacePoint::Group(q) = g else { return None };
                let h = *a * q * b.inverse();
                self.k_group.log(&GroupElement::Quat(h)).ok()
            }
            _ => None,
        }
    }

    /// `(k₁, k)·p` on points.
    pub fn act_kk_point(&self, k1: &GroupElement, k: &GroupElement, p: &SpacePoint) -> SpacePoint {
        match (p, k1, k) {
            (SpacePoint::Circle(x), GroupElement::Torus(a), GroupElement::Torus(b)) => {
                SpacePoint::Circle(x + a[0] + b[0])
            }
            (SpacePoint::Torus(x), GroupElement::Torus(a), GroupElement::Torus(b)) => {
                SpacePoint::Torus([x[0] + a[0] + b[0], x[1]])
            }
            (SpacePoint::Sphere(v), GroupElement::Torus(a), GroupElement::Torus(b)) => {
                let (s, c) = (a[0] + b[0]).sin_cos();
                SpacePoint::Sphere([c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]])
            }
            (SpacePoint::Group(q), GroupElement::Quat(a), GroupElement::Quat(b)) => {
                SpacePoint::Group(*a * *q * b.inverse())
            }
            _ => panic!("group element does not act on {}", self.name()),
        }
    }

    /// Isometric embedding into Euclidean space.
    pub fn embed(&self, p: &SpacePoint) -> Vec<f64> {
        match p {
            SpacePoint::Circle(x) => vec![x.cos(), x.sin()],
            SpacePoint::Torus(x) => vec![x[0].cos(), x[0].sin(), x[1].cos(), x[1].sin()],
            SpacePoint::Sphere(v) => v.to_vec(),
            // SU(2) has radius 2.
            SpacePoint::Group(q) => vec![2.0 * q.w, 2.0 * q.x, 2.0 * q.y, 2.0 * q.z],
        }
    }

    /// Principal coordinates of `exp(ζ)·p` for the heat group `G`.
    pub fn act_heat(&self, zeta: &[f64], x: &[f64]) -> Option<Vec<f64>> {
        match self.kind {
            SpaceKind::Torus1 | SpaceKind::Torus2 => Some(
                x.iter()
                    .zip(zeta)
                    .map(|(a, b)| centered_angle(a + b))
                    .collect(),
            ),
            SpaceKind::Sphere2 => {
                let SpacePoint::Sphere(v) = self.param_to_point(x) else {
                    return None;
                };
                let q = Quaternion::from_axis_angle(
                    [zeta[0], zeta[1], zeta[2]],
                    crate::group::norm(zeta),
                );
                let w = q.rotate(v);
                self.point_to_param(&SpacePoint::Sphere(w)).ok()
            }
            SpaceKind::Su2BothSided => {
                // Right translation g ↦ g exp(ζ).
                let SpacePoint::Group(q) = self.param_to_point(x) else {
                    return None;
                };
                let e = Quaternion::from_axis_angle(
                    [zeta[0], zeta[1], zeta[2]],
                    crate::group::norm(zeta),
                );
                self.k_group.log(&GroupElement::Quat(q * e)).ok()
            }
        }
    }

    /// Fundamental vector fields of the orthonormal basis of `Lie(𝕂)` in
    /// principal coordinates: an `n × dim 𝕂` matrix.
    pub fn fundamental_fields(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.kk_dimension();
        let mut v = DMatrix::zeros(self.dimension, m);
        for j in 0..m {
            let col = richardson(FD_STEP, |h| {
                let mut y = vec![0.0; m];
                y[j] = h;
                let (k1, k) = self.kk_exp(&y).expect("dimension");
                let img = self.act_kk(&k1, &k, x).unwrap_or_else(|| x.to_vec());
                self.param_diff(x, &img)
            });
            for i in 0..self.dimension {
                v[(i, j)] = col[i];
            }
        }
        v
    }

    /// First-order coefficients `c^j_l(p)` of `φ(exp(ζ)·p) - φ(p)` for the
    /// orthonormal basis of `Lie(G)`: an `n × dim G` matrix.
    pub fn heat_fields(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.heat_group.dimension;
        let mut c = DMatrix::zeros(self.dimension, d);
        for l in 0..d {
            let col = richardson(FD_STEP, |h| {
                let mut z = vec![0.0; d];
                z[l] = h;
                let img = self.act_heat(&z, x).unwrap_or_else(|| x.to_vec());
                self.param_diff(x, &img)
            });
            for i in 0..self.dimension {
                c[(i, l)] = col[i];
            }
        }
        c
    }

    /// Points on lower-dimensional orbits (the poles of S²).
    pub fn special_points(&self) -> Vec<Vec<f64>> {
        match self.kind {
            SpaceKind::Sphere2 => vec![vec![0.0, 0.0], vec![PI, 0.0]],
            _ => Vec::new(),
        }
    }

    // ---- atlas -------------------------------------------------------------

    pub fn chart_count(&self) -> usize {
        match self.kind {
            SpaceKind::Torus2 => 4,
            _ => 2,
        }
    }

    /// Point with chart coordinates `y` in chart `ι`.
    pub fn chart_point(&self, iota: usize, y: &[f64]) -> SpacePoint {
        match self.kind {
            SpaceKind::Torus1 => SpacePoint::Circle(y[0] + if iota == 1 { PI } else { 0.0 }),
            SpaceKind::Torus2 => SpacePoint::Torus([
                y[0] + if iota & 1 == 1 { PI } else { 0.0 },
                y[1] + if iota & 2 == 2 { PI } else { 0.0 },
            ]),
            SpaceKind::Sphere2 => {
                let r2 = y[0] * y[0] + y[1] * y[1];
                let z = (1.0 - r2) / (1.0 + r2);
                let s = if iota == 0 { 1.0 } else { -1.0 };
                SpacePoint::Sphere([2.0 * y[0] / (1.0 + r2), 2.0 * y[1] / (1.0 + r2), s * z])
            }
            SpaceKind::Su2BothSided => {
                let q = Quaternion::from_axis_angle([y[0], y[1], y[2]], crate::group::norm(y));
                SpacePoint::Group(if iota == 0 { q } else { -q })
            }
        }
    }

    /// Density of *normalized* Riemannian measure with respect to Lebesgue
    /// measure in chart coordinates.
    pub fn chart_density(&self, _iota: usize, y: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::Torus1 => 1.0 / (2.0 * PI),
            SpaceKind::Torus2 => 1.0 / (4.0 * PI * PI),
            SpaceKind::Sphere2 => {
                let r2 = y[0] * y[0] + y[1] * y[1];
                4.0 / (1.0 + r2).powi(2) / (4.0 * PI)
            }
            SpaceKind::Su2BothSided => self.k_group.haar_density_canonical(y),
        }
    }

    /// Partition of unity subordinate to the atlas.
    pub fn partition(&self, iota: usize, p: &SpacePoint) -> f64 {
        let a0 = match (self.kind, p) {
            (SpaceKind::Torus1, SpacePoint::Circle(a)) => circle_alpha0(*a),
            (SpaceKind::Torus2, SpacePoint::Torus(a)) => {
                let (u, v) = (circle_alpha0(a[0]), circle_alpha0(a[1]));
                let fu = if iota & 1 == 1 { 1.0 - u } else { u };
                let fv = if iota & 2 == 2 { 1.0 - v } else { v };
                return fu * fv;
            }
            (SpaceKind::Sphere2, SpacePoint::Sphere(v)) => sphere_alpha0(v),
            (SpaceKind::Su2BothSided, SpacePoint::Group(q)) => su2_alpha0(q),
            _ => panic!("point does not belong to {}", self.name()),
        };
        if iota == 0 {
            a0
        } else {
            1.0 - a0
        }
    }

    /// Lebesgue quadrature on a chart-coordinate region containing the
    /// support of `α_ι`. `n` sets the per-direction node count.
    pub fn chart_rule(&self, iota: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let _ = iota;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match self.kind {
            SpaceKind::Torus1 => {
                let r = gauss_legendre(n, ARC_GAP - PI, PI - ARC_GAP);
                for (x, w) in r.nodes.iter().zip(&r.weights) {
                    nodes.push(vec![*x]);
                    weights.push(*w);
                }
            }
            SpaceKind::Torus2 => {
                let r = gauss_legendre(n, ARC_GAP - PI, PI - ARC_GAP);
                for (x, wx) in r.nodes.iter().zip(&r.weights) {
                    for (y, wy) in r.nodes.iter().zip(&r.weights) {
                        nodes.push(vec![*x, *y]);
                        weights.push(wx * wy);
                    }
                }
            }
            SpaceKind::Sphere2 => {
                let rmax = ((1.0 + CAP_Z) / (1.0 - CAP_Z)).sqrt();
                let rr = gauss_legendre(n, 0.0, rmax);
                let ph = trapezoid_periodic(n, 0.0, 2.0 * PI);
                for (r, wr) in rr.nodes.iter().zip(&rr.weights) {
                    for (p, wp) in ph.nodes.iter().zip(&ph.weights) {
                        nodes.push(vec![r * p.cos(), r * p.sin()]);
                        weights.push(wr * wp * r);
                    }
                }
            }
            SpaceKind::Su2BothSided => {
                let rr = gauss_legendre(n, 0.0, PI + BALL_GAP);
                let ct = gauss_legendre(n / 2 + 2, -1.0, 1.0);
                let ph = trapezoid_periodic(n / 2 + 2, 0.0, 2.0 * PI);
                for (r, wr) in rr.nodes.iter().zip(&rr.weights) {
                    for (c, wc) in ct.nodes.iter().zip(&ct.weights) {
                        let s = (1.0 - c * c).max(0.0).sqrt();
                        for (p, wp) in ph.nodes.iter().zip(&ph.weights) {
                            nodes.push(vec![r * s * p.cos(), r * s * p.sin(), r * c]);
                            weights.push(wr * wc * wp * r * r);
                        }
                    }
                }
            }
        }
        (nodes, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn all() -> Vec<SpaceModel> {
        vec![
            SpaceModel::t1(),
            SpaceModel::t2(),
            SpaceModel::s2(),
            SpaceModel::su2(),
        ]
    }

    #[test]
    fn atlas_integrates_the_constant() {
        for s in all() {
            let mut total = 0.0;
            for iota in 0..s.chart_count() {
                let (nodes, w) = s.chart_rule(iota, 160);
                total += nodes
                    .iter()
                    .zip(&w)
                    .map(|(y, w)| {
                        w * s.partition(iota, &s.chart_point(iota, y)) * s.chart_density(iota, y)
                    })
                    .sum::<f64>();
            }
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn principal_chart_volume() {
        // ∫ √det g over the principal box reproduces vol(M).
        let s = SpaceModel::s2();
        let (a, b) = (
            gauss_legendre(40, 0.0, PI),
            trapezoid_periodic(8, -PI, 2.0 * PI),
        );
        let v: f64 = a
            .nodes
            .iter()
            .zip(&a.weights)
            .map(|(t, w)| w * b.weights.iter().sum::<f64>() * s.param_density(&[*t, 0.0]))
            .sum();
        assert_abs_diff_eq!(v, 4.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn sphere_rotation_field_at_equator() {
        let s = SpaceModel::s2();
        let v = s.fundamental_fields(&[PI / 2.0, 0.3]);
        for j in 0..2 {
            assert_abs_diff_eq!(v[(0, j)], 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(v[(1, j)], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn su2_metric_density_matches_jacobian() {
        let s = SpaceModel::su2();
        let x = [0.7, -1.1, 2.0];
        assert_abs_diff_eq!(
            s.param_metric(&x).determinant().sqrt(),
            s.param_density(&x),
            epsilon = 1e-12
        );
    }

    #[test]
    fn point_round_trip() {
        let s = SpaceModel::s2();
        let x = s.point_to_param(&s.param_to_point(&[1.1, -2.0])).unwrap();
        assert_abs_diff_eq!(x[0], 1.1, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], -2.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn partition_sums_to_one(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            for s in all() {
                let p = match s.kind {
                    SpaceKind::Torus1 => SpacePoint::Circle(a),
                    SpaceKind::Torus2 => SpacePoint::Torus([a, b]),
                    SpaceKind::Sphere2 => s.param_to_point(&[(a + 3.0) / 6.0 * PI, b]),
                    SpaceKind::Su2BothSided => s.param_to_point(&[a, b, c]),
                };
                let total: f64 = (0..s.chart_count()).map(|i| s.partition(i, &p)).sum();
                prop_assert!((total - 1.0).abs() < 1e-14);
            }
        }
    }
}
