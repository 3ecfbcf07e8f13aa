//! Benchmark fixtures shared by the criterion targets in `benches/`.

use equiheat::group::{GroupElement, GroupModel, Quaternion};

/// Sample points on SU(2) at increasing distance from the identity.
pub fn su2_samples(count: usize) -> Vec<GroupElement> {
    let model = GroupModel::su2();
    (0..count)
        .map(|i| {
            let a = 0.1 + 5.0 * i as f64 / count.max(1) as f64;
            model.from_quaternion(Quaternion::from_axis_angle([0.3, -0.5, 0.8], a))
        })
        .collect()
}

/// The default dyadic grid truncated to `k ≤ kmax`.
pub fn short_grid(kmax: usize) -> Vec<f64> {
    equiheat::traces::dyadic_grid(0.1, kmax)
}
