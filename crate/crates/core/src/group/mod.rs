//! Compact model groups: U(1), the 2-torus, SU(2) and SO(3).
//!
//! Metric normalization: the bi-invariant metric is fixed so that the
//! Laplacian acts on the matrix coefficients of an irreducible
//! representation by its Casimir value, `n²` on the U(1) weight `n` and
//! `j(j+1)` on SU(2) spin `j`. With this choice SU(2) is the round 3-sphere
//! of radius 2 (volume 16π², injectivity radius 2π), SO(3) is its quotient
//! by ±1 (volume 8π², injectivity radius π) and each circle factor has
//! length 2π. The orthonormal Lie algebra basis of SU(2) generates unit
//! speed rotations of R³, so `exp(ζ)` is the rotation by `|ζ|` about `ζ/|ζ|`.
//!
//! Haar measures are normalized to total mass 1. The Riemannian volume is
//! kept alongside (`GroupModel::volume`) for the places where the two meet.

mod element;
mod haar;
mod irreps;
mod subgroup;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EquiheatError, Result};

pub(crate) use element::{centered_angle, reduce_angle};
pub use element::{GroupElement, Quaternion};
pub use haar::HaarRule;
pub use irreps::{chebyshev_u, HalfInt, IrrepInfo, IrrepLabel};
pub use subgroup::Subgroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    U1,
    T2,
    Su2,
    So3,
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::U1 => "u1",
            GroupKind::T2 => "t2",
            GroupKind::Su2 => "su2",
            GroupKind::So3 => "so3",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupKind {
    type Err = EquiheatError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u1" => Ok(GroupKind::U1),
            "t2" => Ok(GroupKind::T2),
            "su2" => Ok(GroupKind::Su2),
            "so3" => Ok(GroupKind::So3),
            other => Err(EquiheatError::UnknownModel(other.to_string())),
        }
    }
}

/// A compact model group together with its metric normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub kind: GroupKind,
    pub dimension: usize,
    pub basis_labels: Vec<String>,
    /// Scale `c` with Casimir(ρ) = c · (standard value); fixed to 1.
    pub metric_normalization: f64,
    pub injectivity_radius: f64,
    /// Riemannian volume under the fixed metric.
    pub volume: f64,
}

impl GroupModel {
    pub fn new(kind: GroupKind) -> Self {
        let (dimension, injectivity_radius, volume) = match kind {
            GroupKind::U1 => (1, PI, 2.0 * PI),
            GroupKind::T2 => (2, PI, 4.0 * PI * PI),
            GroupKind::Su2 => (3, 2.0 * PI, 16.0 * PI * PI),
            GroupKind::So3 => (3, PI, 8.0 * PI * PI),
        };
        GroupModel {
            kind,
            dimension,
            basis_labels: (1..=dimension).map(|i| format!("X{i}")).collect(),
            metric_normalization: 1.0,
            injectivity_radius,
            volume,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::new(name.parse()?))
    }

    pub fn u1() -> Self {
        Self::new(GroupKind::U1)
    }

    pub fn t2() -> Self {
        Self::new(GroupKind::T2)
    }

    pub fn su2() -> Self {
        Self::new(GroupKind::Su2)
    }

    pub fn so3() -> Self {
        Self::new(GroupKind::So3)
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.kind, GroupKind::U1 | GroupKind::T2)
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::U1 => GroupElement::Torus(vec![0.0]),
            GroupKind::T2 => GroupElement::Torus(vec![0.0, 0.0]),
            GroupKind::Su2 | GroupKind::So3 => GroupElement::Quat(Quaternion::IDENTITY),
        }
    }

    fn canonical(&self, q: Quaternion) -> GroupElement {
        let q = q.normalized();
        match self.kind {
            GroupKind::So3 if q.w < 0.0 => GroupElement::Quat(-q),
            _ => GroupElement::Quat(q),
        }
    }

    pub fn from_quaternion(&self, q: Quaternion) -> GroupElement {
        self.canonical(q)
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (a, b) {
            (GroupElement::Torus(x), GroupElement::Torus(y)) => {
                GroupElement::Torus(x.iter().zip(y).map(|(u, v)| reduce_angle(u + v)).collect())
            }
            (GroupElement::Quat(p), GroupElement::Quat(q)) => self.canonical(*p * *q),
            _ => panic!("mixed group elements"),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        match a {
            GroupElement::Torus(x) => {
                GroupElement::Torus(x.iter().map(|u| reduce_angle(-u)).collect())
            }
            GroupElement::Quat(q) => self.canonical(q.inverse()),
        }
    }

    /// `k g k⁻¹`.
    pub fn conjugate(&self, k: &GroupElement, g: &GroupElement) -> GroupElement {
        self.mul(&self.mul(k, g), &self.inv(k))
    }

    /// Exponential map in the orthonormal basis.
    pub fn exp(&self, zeta: &[f64]) -> Result<GroupElement> {
        if zeta.len() != self.dimension {
            return Err(EquiheatError::Domain(format!(
                "{} expects {} exponential coordinates, got {}",
                self.name(),
                self.dimension,
                zeta.len()
            )));
        }
        Ok(match self.kind {
            GroupKind::U1 | GroupKind::T2 => GroupElement::torus(zeta),
            GroupKind::Su2 | GroupKind::So3 => {
                let r = norm(zeta);
                self.canonical(Quaternion::from_axis_angle([zeta[0], zeta[1], zeta[2]], r))
            }
        })
    }

    /// Inverse of [`GroupModel::exp`] on the open injectivity ball.
    pub fn log(&self, g: &GroupElement) -> Result<Vec<f64>> {
        let out_of_radius = |d: f64| {
            EquiheatError::Domain(format!(
                "log requested at distance {d} >= injectivity radius {} on {}",
                self.injectivity_radius,
                self.name()
            ))
        };
        match (self.kind, g) {
            (GroupKind::U1 | GroupKind::T2, GroupElement::Torus(a)) => {
                let z: Vec<f64> = a.iter().map(|x| centered_angle(*x)).collect();
                if z.iter().any(|x| x.abs() >= PI - 1e-14) {
                    return Err(out_of_radius(norm(&z)));
                }
                Ok(z)
            }
            (GroupKind::Su2 | GroupKind::So3, GroupElement::Quat(q)) => {
                let mut q = *q;
                if self.kind == GroupKind::So3 && q.w < 0.0 {
                    q = -q;
                }
                let psi = q.half_angle();
                let r = 2.0 * psi;
                if r >= self.injectivity_radius - 1e-12 {
                    return Err(out_of_radius(r));
                }
                let v = q.vector();
                let s = norm(&v);
                if s < 1e-300 {
                    return Ok(vec![0.0; 3]);
                }
                Ok(v.iter().map(|c| c / s * r).collect())
            }
            _ => Err(EquiheatError::Domain(
                "element does not belong to model".into(),
            )),
        }
    }

    /// Geodesic distance `|g| = d(g, e)` for the bi-invariant metric.
    pub fn distance_from_identity(&self, g: &GroupElement) -> f64 {
        match g {
            GroupElement::Torus(a) => {
                norm(&a.iter().map(|x| centered_angle(*x)).collect::<Vec<_>>())
            }
            GroupElement::Quat(q) => {
                let psi = q.half_angle();
                match self.kind {
                    GroupKind::So3 => 2.0 * psi.min(PI - psi),
                    _ => 2.0 * psi,
                }
            }
        }
    }

    pub fn distance(&self, g: &GroupElement, h: &GroupElement) -> f64 {
        self.distance_from_identity(&self.mul(&self.inv(g), h))
    }

    /// Density of Lebesgue measure in canonical coordinates relative to the
    /// Riemannian volume, normalized so that it equals 1 at ζ = 0.
    pub fn canonical_jacobian(&self, zeta: &[f64]) -> f64 {
        match self.kind {
            GroupKind::U1 | GroupKind::T2 => 1.0,
            GroupKind::Su2 | GroupKind::So3 => {
                let h = 0.5 * norm(zeta);
                if h < 1e-8 {
                    1.0 - h * h / 3.0
                } else {
                    let s = h.sin() / h;
                    s * s
                }
            }
        }
    }

    /// Normalized Haar density `Ψ*(d_G)` in canonical coordinates.
    pub fn haar_density_canonical(&self, zeta: &[f64]) -> f64 {
        self.canonical_jacobian(zeta) / self.volume
    }

    /// All irreducible representations with Casimir value at most `cutoff`.
    pub fn irrep_data(&self, cutoff: f64) -> Result<Vec<IrrepInfo>> {
        if !(cutoff > 0.0) {
            return Err(EquiheatError::Domain(format!(
                "cutoff must be positive, got {cutoff}"
            )));
        }
        Ok(irreps::enumerate(self.kind, cutoff))
    }

    pub fn irrep(&self, label: IrrepLabel) -> Result<IrrepInfo> {
        irreps::info(self.kind, label)
    }

    pub fn trivial_irrep(&self) -> IrrepInfo {
        let label = match self.kind {
            GroupKind::U1 => IrrepLabel::Weight(0),
            GroupKind::T2 => IrrepLabel::Weight2(0, 0),
            GroupKind::Su2 | GroupKind::So3 => IrrepLabel::Spin(HalfInt::from_twice(0)),
        };
        IrrepInfo::new(label, 1, 0.0)
    }

    pub fn character(&self, rho: &IrrepInfo, g: &GroupElement) -> Complex64 {
        irreps::character(&rho.label, g)
    }

    /// Normalized Haar integral using a rule exact for integrands whose
    /// spectrum lies below `band` (weight for tori, spin for SU(2)/SO(3)).
    pub fn haar_integrate<F>(&self, band: f64, phi: F) -> Complex64
    where
        F: Fn(&GroupElement) -> Complex64 + Sync,
    {
        HaarRule::exact_for(self, band).integrate(phi)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn exp_of_zero_is_identity() {
        for m in [
            GroupModel::u1(),
            GroupModel::t2(),
            GroupModel::su2(),
            GroupModel::so3(),
        ] {
            let g = m.exp(&vec![0.0; m.dimension]).unwrap();
            assert_eq!(m.distance_from_identity(&g), 0.0);
        }
    }

    #[test]
    fn su2_exp_reaches_minus_one_at_two_pi() {
        // Matrix exponential oracle: exp(s·iσ₁/2) = cos(s/2) + i sin(s/2) σ₁.
        let m = GroupModel::su2();
        let g = m.exp(&[2.0 * PI, 0.0, 0.0]).unwrap().quat().unwrap();
        assert_abs_diff_eq!(g.w, -1.0, epsilon = 1e-14);
        let g = m.exp(&[PI, 0.0, 0.0]).unwrap().quat().unwrap();
        assert_abs_diff_eq!(g.x, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.w, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn u1_exp_is_the_angle() {
        let m = GroupModel::u1();
        let g = m.exp(&[PI / 2.0]).unwrap();
        assert_abs_diff_eq!(g.angles().unwrap()[0], PI / 2.0);
    }

    #[test]
    fn log_outside_radius_is_a_domain_error() {
        let m = GroupModel::su2();
        let minus_one = GroupElement::Quat(-Quaternion::IDENTITY);
        assert!(matches!(m.log(&minus_one), Err(EquiheatError::Domain(_))));
        let so3 = GroupModel::so3();
        let half_turn = so3.exp(&[0.0, PI, 0.0]).unwrap();
        assert!(so3.log(&half_turn).is_err());
    }

    #[test]
    fn geodesic_distance_along_subgroup() {
        let m = GroupModel::su2();
        let g = m.exp(&[0.1, -0.2, 0.2]).unwrap();
        assert_abs_diff_eq!(m.distance_from_identity(&g), 0.3, epsilon = 1e-14);
    }

    #[test]
    fn jacobian_is_one_at_origin() {
        for m in [GroupModel::u1(), GroupModel::su2()] {
            assert_eq!(m.canonical_jacobian(&vec![0.0; m.dimension]), 1.0);
        }
    }

    fn arb_zeta(r: f64) -> impl Strategy<Value = [f64; 3]> {
        prop::array::uniform3(-r..r)
    }

    proptest! {
        #[test]
        fn log_inverts_exp_su2(z in arb_zeta(3.5)) {
            let m = GroupModel::su2();
            prop_assume!(norm(&z) < m.injectivity_radius - 1e-3);
            let back = m.log(&m.exp(&z).unwrap()).unwrap();
            for i in 0..3 {
                prop_assert!((back[i] - z[i]).abs() < 1e-10);
            }
        }

        #[test]
        fn log_inverts_exp_so3(z in arb_zeta(1.8)) {
            let m = GroupModel::so3();
            prop_assume!(norm(&z) < m.injectivity_radius - 1e-3);
            let back = m.log(&m.exp(&z).unwrap()).unwrap();
            for i in 0..3 {
                prop_assert!((back[i] - z[i]).abs() < 1e-10);
            }
        }

        #[test]
        fn conjugation_invariance(a in arb_zeta(6.0), b in arb_zeta(6.0)) {
            for m in [GroupModel::su2(), GroupModel::so3()] {
                let g = m.exp(&a).unwrap();
                let k = m.exp(&b).unwrap();
                let d1 = m.distance_from_identity(&g);
                let d2 = m.distance_from_identity(&m.conjugate(&k, &g));
                prop_assert!((d1 - d2).abs() < 1e-10);
            }
        }

        #[test]
        fn distance_is_a_metric(a in arb_zeta(6.0), b in arb_zeta(6.0), c in arb_zeta(6.0)) {
            let m = GroupModel::su2();
            let (g, h, k) = (m.exp(&a).unwrap(), m.exp(&b).unwrap(), m.exp(&c).unwrap());
            prop_assert!((m.distance(&g, &h) - m.distance(&h, &g)).abs() < 1e-10);
            prop_assert!(m.distance(&g, &k) <= m.distance(&g, &h) + m.distance(&h, &k) + 1e-10);
        }

        #[test]
        fn quaternions_stay_unit(a in arb_zeta(6.0), b in arb_zeta(6.0)) {
            let m = GroupModel::su2();
            let g = m.mul(&m.exp(&a).unwrap(), &m.exp(&b).unwrap());
            prop_assert!((g.quat().unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }
}
