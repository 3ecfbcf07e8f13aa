use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GroupElement, GroupKind, GroupModel, Quaternion};
use crate::quadrature::{circle_rule, gauss_legendre, par_weighted_sum};

/// Normalized Haar quadrature: positive weights summing to one.
///
/// Tori use the periodic trapezoid rule. SU(2) and SO(3) use the Euler
/// parametrization `g = e^{αX₃} e^{βX₂} e^{γX₃}` with a trapezoid rule in α
/// and γ and Gauss-Legendre in `cos β`. For SU(2), α ∈ [0, 2π) and
/// γ ∈ [0, 4π); for SO(3) both run over [0, 2π). A rule built by
/// [`HaarRule::exact_for`] with band `J` integrates every matrix coefficient of
/// spin ≤ `J` exactly (node counts `J+2`, `2J+2`, `J+2` in α, γ, cos β).
#[derive(Debug, Clone)]
pub struct HaarRule {
    pub nodes: Vec<GroupElement>,
    pub weights: Vec<f64>,
}

impl HaarRule {
    pub fn exact_for(model: &GroupModel, band: f64) -> Self {
        let band = band.max(0.0);
        let jb = band.ceil() as usize;
        match model.kind {
            GroupKind::U1 => Self::torus(&[jb + 1]),
            GroupKind::T2 => Self::torus(&[jb + 1, jb + 1]),
            GroupKind::Su2 => Self::euler(model, jb + 2, (2.0 * band).ceil() as usize + 2, jb + 2),
            GroupKind::So3 => Self::euler(model, jb + 2, jb + 2, jb + 2),
        }
    }

    pub fn torus(counts: &[usize]) -> Self {
        let rules: Vec<_> = counts.iter().map(|n| circle_rule(*n)).collect();
        let mut nodes = vec![Vec::new()];
        let mut weights = vec![1.0];
        for r in &rules {
            let mut nn = Vec::with_capacity(nodes.len() * r.len());
            let mut ww = Vec::with_capacity(nodes.len() * r.len());
            for (n, w) in nodes.iter().zip(&weights) {
                for (x, v) in r.nodes.iter().zip(&r.weights) {
                    let mut a: Vec<f64> = n.clone();
                    a.push(*x);
                    nn.push(a);
                    ww.push(w * v);
                }
            }
            nodes = nn;
            weights = ww;
        }
        HaarRule {
            nodes: nodes.into_iter().map(GroupElement::Torus).collect(),
            weights,
        }
    }

    pub fn euler(model: &GroupModel, n_alpha: usize, n_gamma: usize, n_beta: usize) -> Self {
        let gamma_period = if model.kind == GroupKind::Su2 {
            4.0 * PI
        } else {
            2.0 * PI
        };
        let beta_rule = gauss_legendre(n_beta, -1.0, 1.0);
        let mut nodes = Vec::with_capacity(n_alpha * n_gamma * n_beta);
        let mut weights = Vec::with_capacity(nodes.capacity());
        // ∫ sin β dβ = 2 over [0, π].
        let w0 = 1.0 / (n_alpha as f64 * n_gamma as f64 * 2.0);
        for ia in 0..n_alpha {
            let alpha = 2.0 * PI * ia as f64 / n_alpha as f64;
            let qa = Quaternion::from_axis_angle([0.0, 0.0, 1.0], alpha);
            for (cb, wb) in beta_rule.nodes.iter().zip(&beta_rule.weights) {
                let beta = cb.clamp(-1.0, 1.0).acos();
                let qb = qa * Quaternion::from_axis_angle([0.0, 1.0, 0.0], beta);
                for ig in 0..n_gamma {
                    let gamma = gamma_period * ig as f64 / n_gamma as f64;
                    let q = qb * Quaternion::from_axis_angle([0.0, 0.0, 1.0], gamma);
                    nodes.push(model.from_quaternion(q));
                    weights.push(w0 * wb);
                }
            }
        }
        HaarRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        crate::quadrature::compensated_sum(self.weights.iter().copied())
    }

    /// Parallel evaluation with an index-ordered compensated reduction.
    pub fn integrate<F>(&self, phi: F) -> Complex64
    where
        F: Fn(&GroupElement) -> Complex64 + Sync,
    {
        par_weighted_sum(&self.weights, |i| phi(&self.nodes[i]))
    }

    pub fn integrate_real<F>(&self, phi: F) -> f64
    where
        F: Fn(&GroupElement) -> f64 + Sync,
    {
        crate::quadrature::par_weighted_sum_real(&self.weights, |i| phi(&self.nodes[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{HalfInt, IrrepInfo};
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_positive_and_normalized() {
        for m in [
            GroupModel::u1(),
            GroupModel::t2(),
            GroupModel::su2(),
            GroupModel::so3(),
        ] {
            let r = HaarRule::exact_for(&m, 6.0);
            assert!(r.weights.iter().all(|w| *w > 0.0));
            assert_abs_diff_eq!(r.total_mass(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_integrates_to_one() {
        let m = GroupModel::su2();
        let z = m.haar_integrate(0.0, |_| Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn u1_fourier_mode_vanishes() {
        let m = GroupModel::u1();
        let z = m.haar_integrate(1.0, |g| Complex64::from_polar(1.0, g.angles().unwrap()[0]));
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn schur_orthogonality_su2() {
        let m = GroupModel::su2();
        let reps = m.irrep_data(12.0).unwrap();
        let rule = HaarRule::exact_for(&m, 7.0);
        for a in &reps {
            for b in &reps {
                let z = rule.integrate(|g| a.character(g) * b.character(g).conj());
                let expect = if a.label == b.label { 1.0 } else { 0.0 };
                assert!(
                    (z.re - expect).abs() < 1e-10 && z.im.abs() < 1e-10,
                    "{a:?} {b:?} {z}"
                );
            }
        }
    }

    #[test]
    fn nontrivial_characters_integrate_to_zero() {
        for m in [GroupModel::su2(), GroupModel::so3()] {
            let rule = HaarRule::exact_for(&m, 6.0);
            for rho in m.irrep_data(30.0).unwrap().iter().skip(1) {
                assert!(rule.integrate(|g| rho.character(g)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn haar_is_left_and_right_invariant() {
        let m = GroupModel::su2();
        let rule = HaarRule::exact_for(&m, 8.0);
        // A non-class band-limited test function: a matrix-coefficient product.
        let phi = |g: &GroupElement| {
            let q = g.quat().unwrap();
            Complex64::new(q.x * q.x * q.w + q.y * q.z * 2.0 + q.z.powi(4), q.x * q.y)
        };
        let base = rule.integrate(phi);
        let h = m.exp(&[0.4, -1.1, 2.0]).unwrap();
        let left = rule.integrate(|g| phi(&m.mul(&h, g)));
        let right = rule.integrate(|g| phi(&m.mul(g, &h)));
        assert!((left - base).norm() < 1e-12);
        assert!((right - base).norm() < 1e-12);
    }

    #[test]
    fn spin_half_character_squared() {
        let m = GroupModel::su2();
        let half = IrrepInfo::spin(HalfInt::from_twice(1));
        let z = m.haar_integrate(2.0, |g| half.character(g) * half.character(g));
        assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-12);
    }
}
