use num_complex::Complex64;

use super::HeatKernelSeries;
use crate::error::{EquiheatError, Result};
use crate::group::{
    centered_angle, GroupElement, GroupKind, GroupModel, HalfInt, IrrepInfo, IrrepLabel, Subgroup,
};
use crate::quadrature::par_weighted_sum;

/// Spectral band of `p_t` in the units of [`crate::group::HaarRule::exact_for`].
fn series_band(p: &HeatKernelSeries) -> f64 {
    match p.model.kind {
        GroupKind::Su2 => (p.levels - 1) as f64 / 2.0,
        _ => (p.levels - 1) as f64,
    }
}

fn sigma_band(sigma: &IrrepInfo) -> f64 {
    match sigma.label {
        IrrepLabel::Weight(n) => n.unsigned_abs() as f64,
        IrrepLabel::Weight2(a, b) => a.unsigned_abs().max(b.unsigned_abs()) as f64,
        IrrepLabel::Spin(j) | IrrepLabel::Charge(j) => j.abs().value(),
    }
}

/// `H^σ_f(g) = d_σ² ∫_K ∫_K f(k₁⁻¹ g k⁻¹) χ̄_σ(k₁) χ̄_σ(k) dk dk₁` for the heat
/// kernel `f = p_t`, by a double Haar rule on `K` matched to the series band.
pub fn h_sigma_kernel(
    model: &GroupModel,
    subgroup: Subgroup,
    p: &HeatKernelSeries,
    sigma: &IrrepInfo,
    g: &GroupElement,
) -> Result<Complex64> {
    let band = series_band(p) + sigma_band(sigma) + 1.0;
    h_sigma_kernel_with(
        model,
        subgroup,
        |h| Complex64::new(p.eval(h), 0.0),
        sigma,
        g,
        band,
    )
}

/// [`h_sigma_kernel`] for an arbitrary `f`, with the `K`-band of
/// `k ↦ f(k₁⁻¹ g k⁻¹) χ̄_σ(k)` supplied by the caller.
pub fn h_sigma_kernel_with<F>(
    model: &GroupModel,
    subgroup: Subgroup,
    f: F,
    sigma: &IrrepInfo,
    g: &GroupElement,
    band: f64,
) -> Result<Complex64>
where
    F: Fn(&GroupElement) -> Complex64 + Sync,
{
    subgroup.validate(model)?;
    let rule = subgroup.rule(model, band);
    if rule.len().saturating_mul(rule.len()) > 400_000_000 {
        return Err(EquiheatError::Quadrature(format!(
            "double K-rule with {} nodes per factor exceeds the budget",
            rule.len()
        )));
    }
    let d2 = (sigma.dimension * sigma.dimension) as f64;
    let inv: Vec<GroupElement> = rule.nodes.iter().map(|k| model.inv(k)).collect();
    let chi_bar: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|k| subgroup.character(sigma, k).conj())
        .collect();
    let pairs = rule.len() * rule.len();
    let n = rule.len();
    let weights: Vec<f64> = (0..pairs)
        .map(|i| rule.weights[i / n] * rule.weights[i % n])
        .collect();
    let z = par_weighted_sum(&weights, |i| {
        let (i1, i2) = (i / n, i % n);
        let h = model.mul(&model.mul(&inv[i1], g), &inv[i2]);
        f(&h) * chi_bar[i1] * chi_bar[i2]
    });
    Ok(z * d2)
}

/// Distance `d(gK, K)` in the quotient metric of `G/K`.
pub fn quotient_distance(_model: &GroupModel, subgroup: Subgroup, g: &GroupElement) -> f64 {
    match (subgroup, g) {
        (Subgroup::Whole, _) => 0.0,
        (Subgroup::TorusFactor(_) | Subgroup::Circle, GroupElement::Torus(a)) => {
            let i = if let Subgroup::TorusFactor(i) = subgroup {
                i
            } else {
                0
            };
            a.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| centered_angle(*x).powi(2))
                .sum::<f64>()
                .sqrt()
        }
        (Subgroup::Circle, GroupElement::Quat(q)) => {
            // gK ↦ g e₃ g⁻¹ identifies G/K with the unit sphere.
            let n = q.rotate([0.0, 0.0, 1.0]);
            n[2].clamp(-1.0, 1.0).acos()
        }
        _ => panic!("subgroup does not match element"),
    }
}

/// Kernel of the Bochner-Laplace heat semigroup on the charge-`m` line bundle
/// over `SU(2)/U(1)`:
/// `h_t^σ(g) = e^{tm²} ∫∫ p_t(k⁻¹ g k₁) χ_σ(k) χ̄_σ(k₁) dk₁ dk`.
pub fn bundle_kernel(
    model: &GroupModel,
    charge: HalfInt,
    t: f64,
    g: &GroupElement,
) -> Result<Complex64> {
    if model.kind != GroupKind::Su2 {
        return Err(EquiheatError::Domain(
            "bundle kernels are bundled for SU(2)/U(1) only".into(),
        ));
    }
    let p = HeatKernelSeries::new(model, t)?;
    bundle_kernel_with(model, &p, charge, g)
}

pub(crate) fn bundle_kernel_with(
    model: &GroupModel,
    p: &HeatKernelSeries,
    charge: HalfInt,
    g: &GroupElement,
) -> Result<Complex64> {
    let sigma = IrrepInfo::charge(charge);
    let k = Subgroup::Circle;
    let rule = k.rule(model, series_band(p) + charge.abs().value() + 1.0);
    let n = rule.len();
    let chi: Vec<Complex64> = rule.nodes.iter().map(|x| k.character(&sigma, x)).collect();
    let inv: Vec<GroupElement> = rule.nodes.iter().map(|x| model.inv(x)).collect();
    let weights: Vec<f64> = (0..n * n)
        .map(|i| rule.weights[i / n] * rule.weights[i % n])
        .collect();
    let z = par_weighted_sum(&weights, |i| {
        let (a, b) = (i / n, i % n);
        let h = model.mul(&model.mul(&inv[a], g), &rule.nodes[b]);
        chi[a] * chi[b].conj() * p.eval(&h)
    });
    Ok(z * (p.t * sigma.casimir).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn u1_projection_is_a_single_mode() {
        // Fourier projection oracle: weight-m part of p_t.
        let m = GroupModel::u1();
        let p = HeatKernelSeries::new(&m, 0.3).unwrap();
        for wt in [-2i64, 0, 1, 3] {
            let sigma = IrrepInfo::weight(wt);
            for th in [0.0, 0.7, 2.5] {
                let g = GroupElement::torus(&[th]);
                let h = h_sigma_kernel(&m, Subgroup::Whole, &p, &sigma, &g).unwrap();
                let expect =
                    Complex64::from_polar((-0.3 * (wt * wt) as f64).exp(), -(wt as f64) * th);
                assert!((h - expect).norm() < 1e-12, "{wt} {th} {h}");
            }
        }
    }

    #[test]
    fn trivial_sigma_fixes_bi_invariant_functions() {
        // w² + z² is invariant under both translations by exp(sX₃).
        let m = GroupModel::su2();
        let f = |h: &GroupElement| {
            let q = h.quat().unwrap();
            Complex64::new((q.w * q.w + q.z * q.z).powi(2) + 0.3, 0.0)
        };
        let sigma = IrrepInfo::charge(HalfInt::from_twice(0));
        let g = m.exp(&[0.3, -1.2, 0.5]).unwrap();
        let h = h_sigma_kernel_with(&m, Subgroup::Circle, f, &sigma, &g, 4.0).unwrap();
        assert!((h - f(&g)).norm() < 1e-12);
    }

    #[test]
    fn su2_spin_half_trace_at_identity() {
        // tr π(H^σ) = H^σ(e) = d_σ² e^{-tλ_σ} for K = G.
        let m = GroupModel::su2();
        let t = 1.0;
        let p = HeatKernelSeries::new(&m, t).unwrap();
        let sigma = IrrepInfo::spin(HalfInt::from_twice(1));
        let h = h_sigma_kernel(&m, Subgroup::Whole, &p, &sigma, &m.identity()).unwrap();
        assert_abs_diff_eq!(h.re, 4.0 * (-0.75 * t).exp(), epsilon = 1e-10);
        assert!(h.im.abs() < 1e-12);
    }

    #[test]
    fn isotypic_kernel_lives_in_the_sigma_block() {
        let m = GroupModel::su2();
        let p = HeatKernelSeries::new(&m, 1.5).unwrap();
        let sigma = IrrepInfo::charge(HalfInt::from_int(1));
        let rule = Subgroup::Circle.rule(&m, 2.0);
        let g = m.exp(&[0.4, 0.9, -0.2]).unwrap();
        for tau in [0i64, 1, 2, -1] {
            let other = IrrepInfo::charge(HalfInt::from_int(tau));
            // Right K-Fourier coefficient of k ↦ H(g k).
            let c = rule.integrate(|k| {
                h_sigma_kernel(&m, Subgroup::Circle, &p, &sigma, &m.mul(&g, k)).unwrap()
                    * Subgroup::Circle.character(&other, k)
            });
            if tau == 1 {
                assert!(c.norm() > 1e-3);
            } else {
                assert!(c.norm() < 1e-11, "{tau} {c}");
            }
        }
    }

    #[test]
    fn bundle_kernel_trivial_charge_at_identity() {
        let m = GroupModel::su2();
        let t = 0.4;
        let h = bundle_kernel(&m, HalfInt::from_int(0), t, &m.identity()).unwrap();
        let oracle: f64 = (0..60)
            .map(|j| (2 * j + 1) as f64 * (-t * (j * (j + 1)) as f64).exp())
            .sum();
        assert_abs_diff_eq!(h.re, oracle, epsilon = 1e-10);
    }

    #[test]
    fn bundle_kernel_covariance() {
        let m = GroupModel::su2();
        let charge = HalfInt::from_int(1);
        let sigma = IrrepInfo::charge(charge);
        let t = 0.3;
        let g = m.exp(&[0.7, -0.4, 1.1]).unwrap();
        let k = Subgroup::Circle.element(&m, 1.3);
        let k1 = Subgroup::Circle.element(&m, 4.0);
        let lhs = bundle_kernel(&m, charge, t, &g).unwrap();
        let moved = m.mul(&m.mul(&m.inv(&k), &g), &k1);
        let rhs = Subgroup::Circle.character(&sigma, &k)
            * bundle_kernel(&m, charge, t, &moved).unwrap()
            * Subgroup::Circle.character(&sigma, &k1).conj();
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn quotient_distance_on_sphere() {
        let m = GroupModel::su2();
        let g = m.exp(&[0.8, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            quotient_distance(&m, Subgroup::Circle, &g),
            0.8,
            epsilon = 1e-12
        );
        let k = Subgroup::Circle.element(&m, 2.0);
        assert!(quotient_distance(&m, Subgroup::Circle, &k) < 1e-7);
    }
}
