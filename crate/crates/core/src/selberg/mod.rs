//! Finite uniform subgroups of SU(2), the Selberg trace formula on
//! `L²(Γ\G)`, kernel periodization and Bochner-Laplace traces on line bundles
//! over the sphere.
//!
//! Volumes use normalized Haar measure on `G`, on the maximal torus `T` and
//! on `T\G`, so `vol(Γ\G) = 1/|Γ|` and both sides of the trace formula carry
//! the same overall factor as with the Riemannian normalization.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EquiheatError, Result};
use crate::group::{GroupElement, GroupModel, HalfInt, IrrepInfo, Quaternion, Subgroup};
use crate::heat::{h_sigma_kernel, HeatKernelSeries};
use crate::quadrature::{circle_rule, compensated_sum, gauss_legendre, KahanSum};

mod bundle;
mod periodize;

pub use bundle::{
    bundle_gaussian_volume, bundle_heat_trace, bundle_leading_fit, bundle_prediction, BundleFit,
    BundlePrediction, BundleRoute, BundleSpectrum,
};
pub use periodize::{
    kernel_periodization_finite, kernel_periodization_torus, poincare_probe, GaussianMajorant,
    Periodized, PoincareReport, PoincareRow,
};

/// Relative tolerance for the spectral tail.
const SPECTRAL_RTOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyClass {
    pub representative: Quaternion,
    pub size: usize,
    pub central: bool,
    /// `|Γ_γ|`.
    pub centralizer_order: usize,
    /// `G_γ`: `SU(2)` for central classes, the maximal torus otherwise.
    pub centralizer: String,
    /// `vol(Γ_γ\G_γ)` under normalized Haar measure on `G_γ`.
    pub volume: f64,
}

/// Cyclic subgroup `Z_N = {diag(e^{2πik/N}, e^{-2πik/N})}` of SU(2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteLattice {
    pub name: String,
    pub elements: Vec<Quaternion>,
    pub classes: Vec<ConjugacyClass>,
}

fn is_central(q: &Quaternion) -> bool {
    (q.x * q.x + q.y * q.y + q.z * q.z).sqrt() < 1e-12
}

impl FiniteLattice {
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(EquiheatError::Domain("Z_N needs N ≥ 1".into()));
        }
        let elements: Vec<Quaternion> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Quaternion::new(a.cos(), 0.0, 0.0, a.sin())
            })
            .collect();
        // Γ is abelian: every element is its own class and Γ_γ = Γ.
        let classes = elements
            .iter()
            .map(|q| {
                let central = is_central(q);
                ConjugacyClass {
                    representative: *q,
                    size: 1,
                    central,
                    centralizer_order: n,
                    centralizer: if central { "SU(2)" } else { "maximal torus" }.into(),
                    volume: 1.0 / n as f64,
                }
            })
            .collect();
        Ok(FiniteLattice {
            name: if n == 1 { "e".into() } else { format!("z{n}") },
            elements,
            classes,
        })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1).expect("N = 1")
    }

    /// `e`, `trivial` or `zN`.
    pub fn by_name(name: &str) -> Result<Self> {
        let s = name.trim().to_ascii_lowercase();
        if s == "e" || s == "trivial" {
            return Ok(Self::trivial());
        }
        match s.strip_prefix('z').and_then(|r| r.parse::<usize>().ok()) {
            Some(n) if n >= 1 => Self::cyclic(n),
            _ => Err(EquiheatError::UnknownModel(name.to_string())),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// `vol(Γ\G)` under normalized Haar measure.
    pub fn covolume(&self) -> f64 {
        1.0 / self.order() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeMultiplicity {
    pub spin: HalfInt,
    /// Character average `(1/|Γ|) Σ χ_j(γ)`, rounded.
    pub multiplicity: usize,
    /// Weight count `#{m : γ fixes the weight-m line for all γ}`.
    pub by_weights: usize,
    pub residual: f64,
}

fn spin_character(j: HalfInt, q: &Quaternion) -> f64 {
    IrrepInfo::spin(j).character(&GroupElement::Quat(*q)).re
}

/// `m_j = dim V_j^Γ` for every spin with `j(j+1) ≤ cutoff`.
pub fn lattice_multiplicities(
    lattice: &FiniteLattice,
    cutoff: f64,
) -> Result<Vec<LatticeMultiplicity>> {
    if !(cutoff >= 0.0) {
        return Err(EquiheatError::Domain(format!(
            "cutoff must be ≥ 0, got {cutoff}"
        )));
    }
    let n = lattice.order() as i64;
    let mut out = Vec::new();
    let mut twice = 0i64;
    loop {
        let j = HalfInt::from_twice(twice);
        let jv = j.value();
        if jv * (jv + 1.0) > cutoff {
            break;
        }
        let avg = compensated_sum(lattice.elements.iter().map(|q| spin_character(j, q))) / n as f64;
        let r = avg.round();
        let residual = (avg - r).abs();
        if residual > 1e-10 || r < 0.0 {
            return Err(EquiheatError::NonIntegral {
                label: format!("spin {j}"),
                value: avg,
            });
        }
        // Weights 2m ∈ {-2j, ..., 2j} step 2; γ_k acts on the weight-m line by
        // e^{2πi·2mk/N}.
        let by_weights = (-twice..=twice)
            .step_by(2)
            .filter(|m2| m2.rem_euclid(n) == 0)
            .count();
        out.push(LatticeMultiplicity {
            spin: j,
            multiplicity: r as usize,
            by_weights,
            residual,
        });
        twice += 1;
    }
    Ok(out)
}

/// Test function on `G` for the trace formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SelbergKernel {
    /// `f = p_t`.
    Heat,
    /// `f = H^σ_{p_t}` for the charge-`m` character of the circle `K`.
    Isotypic { charge: HalfInt },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassContribution {
    pub representative: Quaternion,
    pub central: bool,
    pub volume: f64,
    pub orbital_integral: f64,
    /// Difference against the orbital integral at half the node count.
    pub orbital_error: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTerm {
    pub spin: HalfInt,
    pub multiplicity: usize,
    /// `tr π_j(f)`.
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelbergReport {
    pub lattice: String,
    pub kernel: SelbergKernel,
    pub t: f64,
    pub normalization: String,
    pub spectral: f64,
    pub spectral_bound: f64,
    pub geometric: f64,
    pub geometric_error: f64,
    pub residual: f64,
    pub classes: Vec<ClassContribution>,
    /// Spectral terms with nonzero multiplicity and trace above `1e-16`.
    pub spectral_terms: Vec<SpectralTerm>,
}

impl SelbergReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        crate::export::write_json(path, self)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(EquiheatError::Domain(format!(
            "t must be positive, got {t}"
        )));
    }
    Ok(())
}

/// `tr π_j(f)` for the bundled kernels.
fn spectral_trace_term(kernel: SelbergKernel, j: HalfInt, t: f64) -> f64 {
    let jv = j.value();
    let decay = (-t * jv * (jv + 1.0)).exp();
    match kernel {
        SelbergKernel::Heat => (2.0 * jv + 1.0) * decay,
        SelbergKernel::Isotypic { charge } => {
            let ok = charge.abs().twice() <= j.twice() && (j.twice() - charge.twice()) % 2 == 0;
            if ok {
                decay
            } else {
                0.0
            }
        }
    }
}

fn spectral_side(
    lattice: &FiniteLattice,
    kernel: SelbergKernel,
    t: f64,
) -> Result<(f64, f64, Vec<SpectralTerm>)> {
    let n = lattice.order() as f64;
    let mut sum = KahanSum::default();
    let mut terms = Vec::new();
    let majorant = |twice: i64| {
        let j = twice as f64 / 2.0;
        (2.0 * j + 1.0).powi(2) * (-t * j * (j + 1.0)).exp()
    };
    let mut twice = 0i64;
    loop {
        let j = HalfInt::from_twice(twice);
        let avg = compensated_sum(lattice.elements.iter().map(|q| spin_character(j, q))) / n;
        let m = avg.round();
        if (avg - m).abs() > 1e-10 {
            return Err(EquiheatError::NonIntegral {
                label: format!("spin {j}"),
                value: avg,
            });
        }
        let tr = spectral_trace_term(kernel, j, t);
        if m > 0.0 && tr > 1e-16 {
            terms.push(SpectralTerm {
                spin: j,
                multiplicity: m as usize,
                trace: tr,
            });
        }
        sum.add(m * tr);
        // m_j tr π_j(f) ≤ (2j+1)² e^{-tλ_j}, log-concave past its peak.
        let (a, b) = (majorant(twice + 1), majorant(twice + 2));
        if b < a {
            let tail = a / (1.0 - b / a);
            if tail <= SPECTRAL_RTOL * sum.value().abs().max(1e-300) {
                return Ok((sum.value(), tail, terms));
            }
        }
        if twice > 2_000_000 {
            return Err(EquiheatError::Truncation {
                required: twice as usize,
                max: 2_000_000,
            });
        }
        twice += 1;
    }
}

/// `∫_{G_γ\G} f(g⁻¹γg)`: the conjugates of `γ = (cos ψ, sin ψ e₃)` are
/// `(cos ψ, sin ψ n)` with `n` uniform on the sphere.
fn orbital_integral<F>(f: &F, gamma: &Quaternion, nodes: usize) -> f64
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    if is_central(gamma) {
        return f(&GroupElement::Quat(*gamma));
    }
    let psi = gamma.half_angle();
    let s = psi.sin() * gamma.z.signum();
    let cr = gauss_legendre(nodes, -1.0, 1.0);
    let pr = circle_rule(2 * nodes);
    let mut acc = KahanSum::default();
    for (c, wc) in cr.nodes.iter().zip(&cr.weights) {
        let r = (1.0 - c * c).max(0.0).sqrt();
        for (p, wp) in pr.nodes.iter().zip(&pr.weights) {
            let q = Quaternion::new(gamma.w, s * r * p.cos(), s * r * p.sin(), s * c);
            acc.add(0.5 * wc * wp * f(&GroupElement::Quat(q)));
        }
    }
    acc.value()
}

/// Spectral and geometric sides of the trace formula on `L²(Γ\G)`.
pub fn selberg_sides(
    lattice: &FiniteLattice,
    kernel: SelbergKernel,
    t: f64,
) -> Result<SelbergReport> {
    check_t(t)?;
    let model = GroupModel::su2();
    let heat = HeatKernelSeries::new(&model, t)?;
    let (spectral, spectral_bound, spectral_terms) = spectral_side(lattice, kernel, t)?;
    let f = |g: &GroupElement| -> f64 {
        match kernel {
            SelbergKernel::Heat => heat.eval(g),
            SelbergKernel::Isotypic { charge } => h_sigma_kernel(
                &model,
                Subgroup::Circle,
                &heat,
                &IrrepInfo::charge(charge),
                g,
            )
            .map(|z: Complex64| z.re)
            .unwrap_or(f64::NAN),
        }
    };
    // The integrand is a polynomial of degree ≤ levels in n.
    let nodes = heat.levels + 4;
    let mut classes = Vec::with_capacity(lattice.classes.len());
    for c in &lattice.classes {
        let fine = orbital_integral(&f, &c.representative, nodes);
        let coarse = orbital_integral(&f, &c.representative, nodes / 2 + 2);
        if !fine.is_finite() {
            return Err(EquiheatError::Quadrature(format!(
                "orbital integral at {:?} is not finite",
                c.representative
            )));
        }
        classes.push(ClassContribution {
            representative: c.representative,
            central: c.central,
            volume: c.volume,
            orbital_integral: fine,
            orbital_error: (fine - coarse).abs(),
            contribution: c.volume * c.size as f64 * fine,
        });
    }
    let geometric = compensated_sum(classes.iter().map(|c| c.contribution));
    let geometric_error = classes
        .iter()
        .map(|c| c.volume * c.orbital_error)
        .sum::<f64>()
        + heat.tail_bound;
    if geometric_error > 1e-9 * geometric.abs().max(1e-300) {
        return Err(EquiheatError::Quadrature(format!(
            "orbital integrals refined to {geometric_error:e} only (nodes {nodes})"
        )));
    }
    let residual = (spectral - geometric).abs() / spectral.abs().max(1e-300);
    Ok(SelbergReport {
        lattice: lattice.name.clone(),
        kernel,
        t,
        normalization: "normalized Haar on G, T and T\\G; vol(Γ\\G) = 1/|Γ|".into(),
        spectral,
        spectral_bound,
        geometric,
        geometric_error,
        residual,
        classes,
        spectral_terms,
    })
}
