use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GroupElement, GroupKind};
use crate::error::{EquiheatError, Result};

/// A nonnegative or signed half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(&self) -> i64 {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(&self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(&self) -> HalfInt {
        HalfInt(self.0.abs())
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IrrepLabel {
    /// Weight `n` of U(1): `e^{iθ} ↦ e^{inθ}`.
    Weight(i64),
    /// Weight pair of the 2-torus.
    Weight2(i64, i64),
    /// Spin `j` of SU(2) (integer for SO(3)).
    Spin(HalfInt),
    /// Charge `m` of the circle subgroup `exp(sX₃)`: `exp(sX₃) ↦ e^{ims}`.
    Charge(HalfInt),
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Weight(n) => write!(f, "weight {n}"),
            IrrepLabel::Weight2(a, b) => write!(f, "weight ({a},{b})"),
            IrrepLabel::Spin(j) => write!(f, "spin {j}"),
            IrrepLabel::Charge(m) => write!(f, "charge {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrepInfo {
    pub label: IrrepLabel,
    pub dimension: usize,
    pub casimir: f64,
}

impl IrrepInfo {
    pub fn new(label: IrrepLabel, dimension: usize, casimir: f64) -> Self {
        IrrepInfo {
            label,
            dimension,
            casimir,
        }
    }

    pub fn spin(j: HalfInt) -> Self {
        let jv = j.value();
        IrrepInfo::new(
            IrrepLabel::Spin(j),
            (j.twice() + 1) as usize,
            jv * (jv + 1.0),
        )
    }

    pub fn weight(n: i64) -> Self {
        IrrepInfo::new(IrrepLabel::Weight(n), 1, (n * n) as f64)
    }

    pub fn charge(m: HalfInt) -> Self {
        IrrepInfo::new(IrrepLabel::Charge(m), 1, m.value() * m.value())
    }

    pub fn character(&self, g: &GroupElement) -> Complex64 {
        character(&self.label, g)
    }

    pub fn is_trivial(&self) -> bool {
        match self.label {
            IrrepLabel::Weight(n) => n == 0,
            IrrepLabel::Weight2(a, b) => a == 0 && b == 0,
            IrrepLabel::Spin(j) | IrrepLabel::Charge(j) => j.twice() == 0,
        }
    }
}

pub(super) fn info(kind: GroupKind, label: IrrepLabel) -> Result<IrrepInfo> {
    match (kind, label) {
        (GroupKind::U1, IrrepLabel::Weight(n)) => Ok(IrrepInfo::weight(n)),
        (GroupKind::T2, IrrepLabel::Weight2(a, b)) => {
            Ok(IrrepInfo::new(label, 1, (a * a + b * b) as f64))
        }
        (GroupKind::Su2, IrrepLabel::Spin(j)) if j.twice() >= 0 => Ok(IrrepInfo::spin(j)),
        (GroupKind::So3, IrrepLabel::Spin(j)) if j.twice() >= 0 && j.is_integer() => {
            Ok(IrrepInfo::spin(j))
        }
        _ => Err(EquiheatError::Domain(format!(
            "{label} is not an irreducible representation of {kind}"
        ))),
    }
}

pub(super) fn enumerate(kind: GroupKind, cutoff: f64) -> Vec<IrrepInfo> {
    let mut out = Vec::new();
    match kind {
        GroupKind::U1 => {
            let nmax = cutoff.sqrt().floor() as i64;
            for n in 0..=nmax {
                out.push(IrrepInfo::weight(n));
                if n > 0 {
                    out.push(IrrepInfo::weight(-n));
                }
            }
        }
        GroupKind::T2 => {
            let nmax = cutoff.sqrt().floor() as i64;
            for a in -nmax..=nmax {
                for b in -nmax..=nmax {
                    if ((a * a + b * b) as f64) <= cutoff {
                        out.push(IrrepInfo::new(
                            IrrepLabel::Weight2(a, b),
                            1,
                            (a * a + b * b) as f64,
                        ));
                    }
                }
            }
            out.sort_by(|x, y| x.casimir.total_cmp(&y.casimir));
        }
        GroupKind::Su2 | GroupKind::So3 => {
            let step = if kind == GroupKind::So3 { 2 } else { 1 };
            let mut twice = 0;
            loop {
                let rho = IrrepInfo::spin(HalfInt::from_twice(twice));
                if rho.casimir > cutoff {
                    break;
                }
                out.push(rho);
                twice += step;
            }
        }
    }
    out
}

/// Chebyshev polynomial of the second kind, `U_n(x)`, by recurrence.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub(super) fn character(label: &IrrepLabel, g: &GroupElement) -> Complex64 {
    match (label, g) {
        (IrrepLabel::Weight(n), GroupElement::Torus(a)) => {
            Complex64::from_polar(1.0, *n as f64 * a[0])
        }
        (IrrepLabel::Weight2(p, q), GroupElement::Torus(a)) => {
            Complex64::from_polar(1.0, *p as f64 * a[0] + *q as f64 * a[1])
        }
        // χ_j = sin((2j+1)ψ)/sin ψ = U_{2j}(cos ψ).
        (IrrepLabel::Spin(j), GroupElement::Quat(q)) => {
            Complex64::new(chebyshev_u(j.twice() as usize, q.w.clamp(-1.0, 1.0)), 0.0)
        }
        // exp(sX₃) = cos(s/2) + sin(s/2)k, so e^{ims} = (w + iz)^{2m}.
        (IrrepLabel::Charge(m), GroupElement::Quat(q)) => {
            Complex64::new(q.w, q.z).powi(m.twice() as i32)
        }
        (IrrepLabel::Charge(m), GroupElement::Torus(a)) if m.is_integer() => {
            Complex64::from_polar(1.0, m.value() * a[0])
        }
        _ => panic!("character {label} evaluated on a foreign element"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn su2_low_spins() {
        let m = GroupModel::su2();
        let irreps = m.irrep_data(2.0).unwrap();
        assert_eq!(irreps[0].dimension, 1);
        assert_eq!(irreps[0].casimir, 0.0);
        // Casimir oracle: Σ (σ_i/2)² = 3/4 on C².
        assert_eq!(irreps[1].dimension, 2);
        assert_abs_diff_eq!(irreps[1].casimir, 0.75);
        assert_eq!(irreps.len(), 3);
    }

    #[test]
    fn so3_has_only_integer_spins() {
        let irreps = GroupModel::so3().irrep_data(12.0).unwrap();
        assert!(irreps
            .iter()
            .all(|r| matches!(r.label, IrrepLabel::Spin(j) if j.is_integer())));
        assert_eq!(irreps.len(), 4);
    }

    #[test]
    fn u1_enumeration_is_complete() {
        let irreps = GroupModel::u1().irrep_data(4.0).unwrap();
        assert_eq!(irreps.len(), 5);
    }

    #[test]
    fn nonpositive_cutoff_is_rejected() {
        assert!(GroupModel::su2().irrep_data(0.0).is_err());
    }

    #[test]
    fn character_at_identity_is_dimension() {
        let m = GroupModel::su2();
        for rho in m.irrep_data(30.0).unwrap() {
            assert_abs_diff_eq!(rho.character(&m.identity()).re, rho.dimension as f64);
        }
    }

    #[test]
    fn characters_bounded_by_dimension() {
        let m = GroupModel::su2();
        for k in 0..50 {
            let g = m.exp(&[0.1 * k as f64, 0.3, -0.2]).unwrap();
            for rho in m.irrep_data(20.0).unwrap() {
                assert!(rho.character(&g).norm() <= rho.dimension as f64 + 1e-12);
            }
        }
    }
}
