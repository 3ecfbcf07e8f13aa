use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

/// Unit quaternion `w + x i + y j + z k`, used for SU(2) and SO(3).
///
/// The SU(2) matrix is `[[w + i z, -y + i x], [y + i x, w - i z]]`, so the
/// diagonal torus `diag(e^{iθ}, e^{-iθ})` is `cos θ + sin θ k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if n == 0.0 {
            return Self::IDENTITY;
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Quaternion::new(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Quaternion::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn inverse(self) -> Self {
        self.conj()
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Rotates a vector of R³ by the SO(3) image of this quaternion.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let p = Quaternion::new(0.0, v[0], v[1], v[2]);
        let r = *self * p * self.conj();
        [r.x, r.y, r.z]
    }

    /// Half rotation angle `ψ ∈ [0, π]`, i.e. `w = cos ψ`.
    pub fn half_angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        v.atan2(self.w)
    }

    pub fn distance_to(&self, other: &Quaternion) -> f64 {
        let d = Quaternion::new(
            self.w - other.w,
            self.x - other.x,
            self.y - other.y,
            self.z - other.z,
        );
        d.norm()
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// An element of one of the bundled groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GroupElement {
    /// Angles in `[0, 2π)`, one per circle factor.
    Torus(Vec<f64>),
    /// Unit quaternion. For SO(3) the representative has `w ≥ 0`.
    Quat(Quaternion),
}

pub(crate) fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * std::f64::consts::PI);
    if r >= 2.0 * std::f64::consts::PI {
        0.0
    } else {
        r
    }
}

/// Maps an angle to `(-π, π]`.
pub(crate) fn centered_angle(a: f64) -> f64 {
    let r = reduce_angle(a);
    if r > std::f64::consts::PI {
        r - 2.0 * std::f64::consts::PI
    } else {
        r
    }
}

impl GroupElement {
    pub fn torus(angles: &[f64]) -> Self {
        GroupElement::Torus(angles.iter().map(|a| reduce_angle(*a)).collect())
    }

    pub fn quat(&self) -> Option<Quaternion> {
        match self {
            GroupElement::Quat(q) => Some(*q),
            GroupElement::Torus(_) => None,
        }
    }

    pub fn angles(&self) -> Option<&[f64]> {
        match self {
            GroupElement::Torus(a) => Some(a),
            GroupElement::Quat(_) => None,
        }
    }
}
