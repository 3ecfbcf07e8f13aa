//! Equivariant heat traces `tr π(H^σ_{p_t})` on the model spaces, computed
//! spectrally and by chart-wise integration of kernel diagonals, with
//! small-time fits and the predicted leading term.
//!
//! Spectral data per space and `K`-irrep `σ` (weight `m`, or spin for SU(2)):
//!
//! | space | trace |
//! |-------|-------|
//! | T¹ | `e^{-tm²}` |
//! | T² | `e^{-tm²} Σ_b e^{-tb²}` |
//! | S² | `Σ_{l ≥ |m|} e^{-t l(l+1)}` |
//! | SU(2) | `d_σ² e^{-tλ_σ}` |

mod fit;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use fit::{fit_small_time, remainder_envelope, FitModel, PowerLawFit};

use crate::error::{EquiheatError, Result};
use crate::export::{write_csv, write_json};
use crate::group::{HalfInt, IrrepInfo};
use crate::heat::{HeatKernelSeries, TAIL_RTOL};
use crate::space::{SpaceKind, SpaceModel, SpacePoint};
use crate::symplectic::CriticalGeometry;

pub use crate::heat::DEFAULT_MAX_LEVELS;

/// A value with a certified bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceValue {
    pub value: f64,
    pub bound: f64,
    pub levels: usize,
}

/// `Σ_{l ≥ start} term(l)` for log-concave positive terms, stopped once the
/// geometric majorant of the tail falls below `TAIL_RTOL` of the sum.
pub(crate) fn certified_sum<F>(start: u64, max_levels: usize, term: F) -> Result<TraceValue>
where
    F: Fn(u64) -> f64,
{
    let mut sum = crate::quadrature::KahanSum::default();
    let mut l = start;
    let mut levels = 0usize;
    loop {
        let a = term(l);
        sum.add(a);
        levels += 1;
        let (b, c) = (term(l + 1), term(l + 2));
        if b < a && b > 0.0 {
            let r = c / b;
            if r < 1.0 {
                let tail = b / (1.0 - r);
                let s = sum.value();
                if tail <= TAIL_RTOL * s.abs() || tail < f64::MIN_POSITIVE {
                    return Ok(TraceValue {
                        value: s,
                        bound: tail,
                        levels,
                    });
                }
            }
        } else if b == 0.0 {
            return Ok(TraceValue {
                value: sum.value(),
                bound: 0.0,
                levels,
            });
        }
        if levels >= max_levels {
            return Err(EquiheatError::Truncation {
                required: levels + 1,
                max: max_levels,
            });
        }
        l += 1;
    }
}

/// `Σ_{n ∈ ℤ} e^{-tn²}`.
pub(crate) fn theta(t: f64) -> Result<TraceValue> {
    let tail = certified_sum(1, DEFAULT_MAX_LEVELS, |n| (-t * (n * n) as f64).exp())?;
    Ok(TraceValue {
        value: 1.0 + 2.0 * tail.value,
        bound: 2.0 * tail.bound,
        levels: tail.levels + 1,
    })
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(EquiheatError::Domain(format!(
            "t must be positive, got {t}"
        )));
    }
    Ok(())
}

fn weight_of(space: &SpaceModel, sigma: HalfInt) -> Result<i64> {
    if !sigma.is_integer() {
        return Err(EquiheatError::Domain(format!(
            "{} has integer weights only, got {sigma}",
            space.name()
        )));
    }
    Ok(sigma.twice() / 2)
}

/// One eigenvalue of the Laplacian together with the dimension of the
/// `σ ⊗ σ`-isotypic part of its eigenspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenLevel {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub isotypic_dimension: usize,
}

/// The first `count` eigenvalues of `M` with their `σ`-isotypic dimensions.
pub fn eigen_levels(space: &SpaceModel, sigma: HalfInt, count: usize) -> Result<Vec<EigenLevel>> {
    let mut out = Vec::with_capacity(count);
    match space.kind {
        SpaceKind::Torus1 => {
            let m = weight_of(space, sigma)?;
            for n in 0..count as i64 {
                let mult = if n == 0 { 1 } else { 2 };
                out.push(EigenLevel {
                    eigenvalue: (n * n) as f64,
                    multiplicity: mult,
                    isotypic_dimension: usize::from(m.abs() == n),
                });
            }
        }
        SpaceKind::Torus2 => {
            let m = weight_of(space, sigma)?;
            let mut values: Vec<(i64, usize, usize)> = Vec::new();
            let r = (count as f64).sqrt().ceil() as i64 + 2;
            for a in -r..=r {
                for b in -r..=r {
                    let lam = a * a + b * b;
                    let iso = usize::from(a == m);
                    match values.iter_mut().find(|v| v.0 == lam) {
                        Some(v) => {
                            v.1 += 1;
                            v.2 += iso;
                        }
                        None => values.push((lam, 1, iso)),
                    }
                }
            }
            values.sort_unstable();
            out.extend(
                values
                    .into_iter()
                    .take(count)
                    .map(|(l, mu, iso)| EigenLevel {
                        eigenvalue: l as f64,
                        multiplicity: mu,
                        isotypic_dimension: iso,
                    }),
            );
        }
        SpaceKind::Sphere2 => {
            let m = weight_of(space, sigma)?;
            for l in 0..count as i64 {
                out.push(EigenLevel {
                    eigenvalue: (l * (l + 1)) as f64,
                    multiplicity: (2 * l + 1) as usize,
                    isotypic_dimension: usize::from(l >= m.abs()),
                });
            }
        }
        SpaceKind::Su2BothSided => {
            let s = sigma.abs().twice();
            for n in 0..count as i64 {
                let j = n as f64 / 2.0;
                let d = (n + 1) as usize;
                out.push(EigenLevel {
                    eigenvalue: j * (j + 1.0),
                    multiplicity: d * d,
                    isotypic_dimension: if n == s { d * d } else { 0 },
                });
            }
        }
    }
    Ok(out)
}

/// Spectral trace `Σ_λ dim(E_λ)_{σ⊗σ} e^{-tλ}` with a certified tail bound.
pub fn spectral_trace(space: &SpaceModel, sigma: HalfInt, t: f64) -> Result<TraceValue> {
    check_t(t)?;
    match space.kind {
        SpaceKind::Torus1 => {
            let m = weight_of(space, sigma)? as f64;
            Ok(TraceValue {
                value: (-t * m * m).exp(),
                bound: 0.0,
                levels: 1,
            })
        }
        SpaceKind::Torus2 => {
            let m = weight_of(space, sigma)? as f64;
            let th = theta(t)?;
            let f = (-t * m * m).exp();
            Ok(TraceValue {
                value: f * th.value,
                bound: f * th.bound,
                levels: th.levels,
            })
        }
        SpaceKind::Sphere2 => {
            let m = weight_of(space, sigma)?.unsigned_abs();
            certified_sum(m, DEFAULT_MAX_LEVELS, |l| (-t * (l * (l + 1)) as f64).exp())
        }
        SpaceKind::Su2BothSided => {
            let s = space.k_irrep(sigma)?;
            let d = s.dimension as f64;
            Ok(TraceValue {
                value: d * d * (-t * s.casimir).exp(),
                bound: 0.0,
                levels: 1,
            })
        }
    }
}

/// Trace of the full heat semigroup on `M`, the sum of [`spectral_trace`]
/// over all `σ`.
pub fn full_heat_trace(space: &SpaceModel, t: f64) -> Result<TraceValue> {
    check_t(t)?;
    match space.kind {
        SpaceKind::Torus1 => theta(t),
        SpaceKind::Torus2 => {
            let th = theta(t)?;
            Ok(TraceValue {
                value: th.value * th.value,
                bound: 2.0 * th.value * th.bound + th.bound * th.bound,
                levels: th.levels,
            })
        }
        SpaceKind::Sphere2 => certified_sum(0, DEFAULT_MAX_LEVELS, |l| {
            (2 * l + 1) as f64 * (-t * (l * (l + 1)) as f64).exp()
        }),
        SpaceKind::Su2BothSided => {
            let p = HeatKernelSeries::new(&space.heat_group, t)?;
            Ok(TraceValue {
                value: p.identity_value,
                bound: p.tail_bound,
                levels: p.levels,
            })
        }
    }
}

/// Fully normalized associated Legendre functions `N_l^m(x)`, `l = m..=lmax`,
/// with `∫_{-1}^{1} N_l^m(x)² dx = 1`.
pub fn normalized_legendre(m: usize, lmax: usize, x: f64) -> Vec<f64> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (0.5f64).sqrt();
    for k in 1..=m {
        pmm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    let mut out = vec![pmm];
    if lmax == m {
        return out;
    }
    out.push(x * ((2 * m + 3) as f64).sqrt() * pmm);
    let mf = m as f64;
    for l in m + 2..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        let n = out.len();
        out.push(a * (x * out[n - 1] - out[n - 2] / a_prev));
    }
    out
}

pub type DiagonalKernel = Box<dyn Fn(&SpacePoint) -> f64 + Send + Sync>;

/// Kernel diagonal of the heat semigroup (all of it for `sigma = None`, the
/// `σ ⊗ σ`-isotypic part otherwise) with respect to normalized measure on `M`.
pub fn diagonal_heat_kernel(
    space: &SpaceModel,
    sigma: Option<HalfInt>,
    t: f64,
) -> Result<DiagonalKernel> {
    check_t(t)?;
    match (space.kind, sigma) {
        (SpaceKind::Sphere2, Some(s)) => {
            let m = weight_of(space, s)?.unsigned_abs() as usize;
            let full = full_heat_trace(space, t)?;
            let lmax = (m + full.levels + 2).max(m + 1);
            let decay: Vec<f64> = (m..=lmax)
                .map(|l| (-t * (l * (l + 1)) as f64).exp())
                .collect();
            Ok(Box::new(move |p| {
                let SpacePoint::Sphere(v) = p else {
                    panic!("not a point of S²")
                };
                let n = normalized_legendre(m, lmax, v[2].clamp(-1.0, 1.0));
                // 4π |Y_l^m|² = 2 N_l^m(cos θ)².
                n.iter().zip(&decay).map(|(a, e)| 2.0 * a * a * e).sum()
            }))
        }
        (_, Some(s)) => {
            let c = spectral_trace(space, s, t)?.value;
            Ok(Box::new(move |_| c))
        }
        (_, None) => {
            let c = full_heat_trace(space, t)?.value;
            Ok(Box::new(move |_| c))
        }
    }
}

/// `Σ_ι ∫ α_ι(p) K(p, p) j_ι(p) dp` over the atlas of `M`, with `n` nodes
/// per chart direction.
pub fn kernel_diagonal_trace<F>(space: &SpaceModel, diag: F, n: usize) -> Result<f64>
where
    F: Fn(&SpacePoint) -> f64 + Sync,
{
    if n < 8 {
        return Err(EquiheatError::Domain(format!(
            "need at least 8 nodes per direction, got {n}"
        )));
    }
    let mut total = crate::quadrature::KahanSum::default();
    for iota in 0..space.chart_count() {
        let (nodes, weights) = space.chart_rule(iota, n);
        let s = crate::quadrature::par_weighted_sum_real(&weights, |i| {
            let y = &nodes[i];
            let p = space.chart_point(iota, y);
            space.partition(iota, &p) * diag(&p) * space.chart_density(iota, y)
        });
        total.add(s);
    }
    Ok(total.value())
}

/// `t_k = t0 · 2^{-k}` for `k = 0..=kmax`.
pub fn dyadic_grid(t0: f64, kmax: usize) -> Vec<f64> {
    (0..=kmax).map(|k| t0 * 0.5f64.powi(k as i32)).collect()
}

/// The default small-time grid `0.1 · 2^{-k}`, `k = 0..=12`.
pub fn default_grid() -> Vec<f64> {
    dyadic_grid(0.1, 12)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCurve {
    pub space: SpaceKind,
    pub sigma: HalfInt,
    pub points: Vec<TracePoint>,
}

impl TraceCurve {
    pub fn ts(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_csv(path, &self.points)
    }
}

pub fn trace_curve(space: &SpaceModel, sigma: HalfInt, grid: &[f64]) -> Result<TraceCurve> {
    if grid.is_empty() {
        return Err(EquiheatError::Domain("empty t grid".into()));
    }
    let points = grid
        .iter()
        .map(|&t| {
            spectral_trace(space, sigma, t).map(|v| TracePoint {
                t,
                value: v.value,
                bound: v.bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceCurve {
        space: space.kind,
        sigma,
        points,
    })
}

/// Leading term `c t^{-(n-κ)/2}` predicted from the critical geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingPrediction {
    pub exponent: f64,
    pub coefficient: f64,
    pub sigma_dimension: usize,
    pub multiplicity: usize,
    pub gaussian_volume: f64,
}

/// `c = d_{σ⊗σ} [(π_σ⊗π_σ)|ℍ : 1] ṽol / (2π)^{n-κ}` and exponent `(n-κ)/2`.
pub fn predicted_leading(
    space: &SpaceModel,
    sigma: HalfInt,
    geometry: &CriticalGeometry,
) -> Result<LeadingPrediction> {
    if geometry.space != space.kind {
        return Err(EquiheatError::GeometryIncomplete(format!(
            "geometry was computed for {}, not {}",
            geometry.space,
            space.name()
        )));
    }
    if !(geometry.gaussian_volume > 0.0) || geometry.kappa > geometry.dimension {
        return Err(EquiheatError::GeometryIncomplete(
            "Gaussian volume or orbit dimension missing".into(),
        ));
    }
    let irrep: IrrepInfo = space.k_irrep(sigma)?;
    let multiplicity = geometry.principal.multiplicity(&irrep)?;
    let d = irrep.dimension * irrep.dimension;
    let codim = (geometry.dimension - geometry.kappa) as i32;
    Ok(LeadingPrediction {
        exponent: codim as f64 / 2.0,
        coefficient: d as f64 * multiplicity as f64 * geometry.gaussian_volume
            / (2.0 * std::f64::consts::PI).powi(codim),
        sigma_dimension: irrep.dimension,
        multiplicity,
        gaussian_volume: geometry.gaussian_volume,
    })
}

/// Everything the `trace` report writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub curve: TraceCurve,
    pub fit: PowerLawFit,
    pub prediction: Option<LeadingPrediction>,
}

impl TraceReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::critical_geometry;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn h(n: i64) -> HalfInt {
        HalfInt::from_int(n)
    }

    #[test]
    fn trivial_weight_on_circle_is_one() {
        for t in [1e-4, 0.1, 3.0] {
            assert_eq!(
                spectral_trace(&SpaceModel::t1(), h(0), t).unwrap().value,
                1.0
            );
        }
    }

    #[test]
    fn sphere_weight_zero_at_t_one() {
        // Direct sum oracle.
        let oracle: f64 = (0..40).map(|l| (-((l * (l + 1)) as f64)).exp()).sum();
        let v = spectral_trace(&SpaceModel::s2(), h(0), 1.0).unwrap();
        assert!((v.value - oracle).abs() <= v.bound + 1e-15);
        assert_abs_diff_eq!(v.value, 1.1380, epsilon = 5e-4);
    }

    #[test]
    fn su2_spin_one_limit() {
        let s = SpaceModel::su2();
        let v = spectral_trace(&s, h(1), 1e-3).unwrap().value;
        assert_abs_diff_eq!(v, 9.0 * (-2e-3f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn tail_bound_dominates_the_truncation_error() {
        let s = SpaceModel::s2();
        let t = 1e-3;
        let v = spectral_trace(&s, h(1), t).unwrap();
        let long: f64 = (1..5000u64)
            .map(|l| (-t * (l * (l + 1)) as f64).exp())
            .sum();
        assert!((long - v.value).abs() <= v.bound + 1e-12 * long);
    }

    #[test]
    fn truncation_is_reported() {
        let e = certified_sum(0, 10, |l| (-1e-6 * (l * l) as f64).exp()).unwrap_err();
        assert!(matches!(e, EquiheatError::Truncation { .. }));
    }

    #[test]
    fn sigma_traces_sum_to_the_full_trace() {
        let t = 0.2;
        for s in [SpaceModel::t1(), SpaceModel::t2(), SpaceModel::s2()] {
            let sum: f64 = (-60..=60)
                .map(|m| spectral_trace(&s, h(m), t).unwrap().value)
                .sum();
            assert_abs_diff_eq!(sum, full_heat_trace(&s, t).unwrap().value, epsilon = 1e-10);
        }
        let su2 = SpaceModel::su2();
        let sum: f64 = (0..80)
            .map(|tw| {
                spectral_trace(&su2, HalfInt::from_twice(tw), t)
                    .unwrap()
                    .value
            })
            .sum();
        assert_abs_diff_eq!(sum, full_heat_trace(&su2, t).unwrap().value, epsilon = 1e-9);
    }

    #[test]
    fn eigen_levels_reproduce_traces() {
        let t = 0.7;
        for (s, m) in [
            (SpaceModel::t1(), 2),
            (SpaceModel::t2(), 1),
            (SpaceModel::s2(), 2),
        ] {
            let lv = eigen_levels(&s, h(m), 60).unwrap();
            let sum: f64 = lv
                .iter()
                .map(|l| l.isotypic_dimension as f64 * (-t * l.eigenvalue).exp())
                .sum();
            assert_abs_diff_eq!(
                sum,
                spectral_trace(&s, h(m), t).unwrap().value,
                epsilon = 1e-12
            );
            assert!(lv.iter().all(|l| l.isotypic_dimension <= l.multiplicity));
        }
        let lv = eigen_levels(&SpaceModel::s2(), h(0), 4).unwrap();
        assert_eq!(
            lv.iter().map(|l| l.multiplicity).collect::<Vec<_>>(),
            vec![1, 3, 5, 7]
        );
    }

    #[test]
    fn normalized_legendre_is_orthonormal() {
        let r = crate::quadrature::gauss_legendre(60, -1.0, 1.0);
        let m = 2;
        let vals: Vec<Vec<f64>> = r
            .nodes
            .iter()
            .map(|x| normalized_legendre(m, 8, *x))
            .collect();
        for a in 0..7 {
            for b in 0..7 {
                let ip: f64 = vals
                    .iter()
                    .zip(&r.weights)
                    .map(|(v, w)| w * v[a] * v[b])
                    .sum();
                assert_abs_diff_eq!(ip, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kernel_diagonal_agrees_with_spectral_trace() {
        for t in [0.05, 0.2, 1.0] {
            for (s, m) in [
                (SpaceModel::t1(), 1),
                (SpaceModel::t2(), 2),
                (SpaceModel::s2(), 0),
                (SpaceModel::s2(), 2),
                (SpaceModel::su2(), 1),
            ] {
                let sigma = if s.kind == SpaceKind::Su2BothSided {
                    HalfInt::from_twice(m)
                } else {
                    h(m)
                };
                let diag = diagonal_heat_kernel(&s, Some(sigma), t).unwrap();
                let k = kernel_diagonal_trace(&s, diag, 160).unwrap();
                let v = spectral_trace(&s, sigma, t).unwrap().value;
                assert!(
                    (k - v).abs() < 1e-8 * v,
                    "{} m={m} t={t}: {k} vs {v}",
                    s.name()
                );
            }
        }
    }

    #[test]
    fn full_kernel_diagonal_on_the_circle() {
        let s = SpaceModel::t1();
        let diag = diagonal_heat_kernel(&s, None, 0.5).unwrap();
        let oracle: f64 = (-30i64..=30).map(|n| (-0.5 * (n * n) as f64).exp()).sum();
        assert_abs_diff_eq!(
            kernel_diagonal_trace(&s, diag, 160).unwrap(),
            oracle,
            epsilon = 1e-9
        );
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        let s = SpaceModel::s2();
        let z = kernel_diagonal_trace(
            &s,
            |p: &SpacePoint| {
                if let SpacePoint::Sphere(v) = p {
                    v[2]
                } else {
                    0.0
                }
            },
            96,
        )
        .unwrap();
        assert!(z.abs() < 1e-12);
    }

    #[test]
    fn leading_predictions_match_spectral_limits() {
        let t = 1e-4;
        for (s, m, exact_alpha) in [
            (SpaceModel::t1(), 1, 0.0),
            (SpaceModel::s2(), 1, 0.5),
            (SpaceModel::su2(), 1, 0.0),
        ] {
            let geo = critical_geometry(&s, 20_000, 3).unwrap();
            let sigma = if s.kind == SpaceKind::Su2BothSided {
                HalfInt::from_twice(m)
            } else {
                h(m)
            };
            let pred = predicted_leading(&s, sigma, &geo).unwrap();
            assert_eq!(pred.exponent, exact_alpha);
            let scaled = spectral_trace(&s, sigma, t).unwrap().value * t.powf(pred.exponent);
            assert!(
                (scaled / pred.coefficient - 1.0).abs() < 0.02,
                "{}: {scaled} vs {}",
                s.name(),
                pred.coefficient
            );
        }
        let geo = critical_geometry(&SpaceModel::s2(), 20_000, 3).unwrap();
        let pred = predicted_leading(&SpaceModel::s2(), h(0), &geo).unwrap();
        assert_abs_diff_eq!(pred.coefficient, PI.sqrt() / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn curve_csv_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        trace_curve(&SpaceModel::s2(), h(1), &default_grid())
            .unwrap()
            .write_csv(&path)
            .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,value,bound\n"));
        assert_eq!(text.lines().count(), 14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn traces_are_positive_and_decreasing(t in 1e-3f64..2.0, m in -3i64..=3) {
            for s in [SpaceModel::t1(), SpaceModel::t2(), SpaceModel::s2()] {
                let a = spectral_trace(&s, h(m), t).unwrap().value;
                let b = spectral_trace(&s, h(m), 1.1 * t).unwrap().value;
                prop_assert!(a > 0.0 && b <= a);
            }
        }
    }
}
