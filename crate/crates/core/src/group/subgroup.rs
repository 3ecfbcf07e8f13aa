use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    GroupElement, GroupKind, GroupModel, HaarRule, HalfInt, IrrepInfo, IrrepLabel, Quaternion,
};
use crate::error::{EquiheatError, Result};
use crate::quadrature::trapezoid_periodic;

/// A closed subgroup `K` of a model group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subgroup {
    /// `K = G`.
    Whole,
    /// The one-parameter circle `exp(sX₃)`.
    Circle,
    /// The `i`-th circle factor of a torus.
    TorusFactor(usize),
}

impl Subgroup {
    pub fn dimension(&self, model: &GroupModel) -> usize {
        match self {
            Subgroup::Whole => model.dimension,
            _ => 1,
        }
    }

    /// Period of the circle parameter.
    pub fn circle_period(model: &GroupModel) -> f64 {
        match model.kind {
            GroupKind::Su2 => 4.0 * PI,
            _ => 2.0 * PI,
        }
    }

    /// The element of `K` with parameter `s`.
    pub fn element(&self, model: &GroupModel, s: f64) -> GroupElement {
        let factor = match self {
            Subgroup::TorusFactor(i) => Some(*i),
            _ if !matches!(model.kind, GroupKind::Su2 | GroupKind::So3) => Some(0),
            _ => None,
        };
        match factor {
            Some(i) => {
                let mut a = vec![0.0; model.dimension];
                a[i] = s;
                GroupElement::torus(&a)
            }
            None => model.from_quaternion(Quaternion::from_axis_angle([0.0, 0.0, 1.0], s)),
        }
    }

    pub fn validate(&self, model: &GroupModel) -> Result<()> {
        match (self, model.kind) {
            (Subgroup::TorusFactor(i), GroupKind::U1 | GroupKind::T2) if *i < model.dimension => {
                Ok(())
            }
            (Subgroup::TorusFactor(_), _) => Err(EquiheatError::Domain(format!(
                "{} has no such torus factor",
                model.name()
            ))),
            _ => Ok(()),
        }
    }

    /// Normalized Haar rule on `K`, exact for `K`-frequencies up to `band`.
    pub fn rule(&self, model: &GroupModel, band: f64) -> HaarRule {
        match self {
            Subgroup::Whole => HaarRule::exact_for(model, band),
            _ => {
                let period = Self::circle_period(model);
                let n = (2.0 * band.max(0.0)).ceil() as usize + 2;
                let r = trapezoid_periodic(n, 0.0, period);
                HaarRule {
                    nodes: r.nodes.iter().map(|s| self.element(model, *s)).collect(),
                    weights: r.weights.iter().map(|w| w / period).collect(),
                }
            }
        }
    }

    /// Character of the irreducible `σ` of `K`, evaluated at `k ∈ K`.
    pub fn character(&self, sigma: &IrrepInfo, k: &GroupElement) -> Complex64 {
        match (self, sigma.label, k) {
            (Subgroup::TorusFactor(i), IrrepLabel::Weight(n), GroupElement::Torus(a)) => {
                Complex64::from_polar(1.0, n as f64 * a[*i])
            }
            _ => sigma.character(k),
        }
    }

    /// Irreducible representation of `K` attached to a half-integer label:
    /// spin for `K = SU(2)`, charge for the circle, weight for torus factors.
    pub fn irrep(&self, model: &GroupModel, label: HalfInt) -> Result<IrrepInfo> {
        match (self, model.kind) {
            (Subgroup::Whole, _) => match model.kind {
                GroupKind::U1 if label.is_integer() => Ok(IrrepInfo::weight(label.twice() / 2)),
                GroupKind::Su2 | GroupKind::So3 => model.irrep(IrrepLabel::Spin(label)),
                _ => Err(EquiheatError::Domain(format!(
                    "no irrep {label} of {}",
                    model.name()
                ))),
            },
            (Subgroup::Circle, GroupKind::Su2) => Ok(IrrepInfo::charge(label)),
            (Subgroup::Circle, GroupKind::So3) if label.is_integer() => {
                Ok(IrrepInfo::charge(label))
            }
            (Subgroup::TorusFactor(_) | Subgroup::Circle, GroupKind::U1 | GroupKind::T2)
                if label.is_integer() =>
            {
                Ok(IrrepInfo::weight(label.twice() / 2))
            }
            _ => Err(EquiheatError::Domain(format!(
                "no irrep {label} of the {self:?} subgroup of {}",
                model.name()
            ))),
        }
    }
}
