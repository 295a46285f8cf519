//! Homogeneous gauge distances, calibration, and ball sampling.
//!
//! Both gauge kinds are built from the layer-wise Euclidean norms
//! `a = |x^(1)|` and `b = |x^(2)|^{1/2}`:
//!
//! * `gauge_max`: `N(x) = max(a, eps * b)`
//! * `gauge_sum`: `N(x) = a + eps * b`
//!
//! Left invariance `ρ(ux, uy) = ρ(x, y)` holds by construction since
//! `ρ(x, y) = N(x^{-1} y)`, homogeneity `N(δ_r x) = r N(x)` by the weight
//! split, and symmetry because the layer norms are even. The triangle
//! inequality depends on the layer weight `eps`, which [`calibrate`] pins
//! down by a seeded bisection over sampled triples.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::group::GradedAlgebra;
use crate::math;
use crate::rng;

/// Slack tolerated when testing the triangle inequality during calibration.
pub const TRIANGLE_SLACK: f64 = -1e-12;

/// Homogeneous quasi-norm kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    /// `max(|x^(1)|, eps |x^(2)|^{1/2})`
    Max,
    /// `|x^(1)| + eps |x^(2)|^{1/2}`
    Sum,
}

/// A calibrated homogeneous distance on a step-2 graded group.
#[derive(Debug, Clone)]
pub struct HomogeneousDistance {
    algebra: Arc<GradedAlgebra>,
    kind: GaugeKind,
    epsilon: f64,
}

/// Outcome of a calibration run; persisting this alongside the seed makes
/// the chosen gauge reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub kind: GaugeKind,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    /// Minimum of `d(x,y) + d(y,z) - d(x,z)` over the sampled triples at the
    /// returned epsilon (nonnegative up to rounding when calibration holds).
    pub worst_slack: f64,
}

impl HomogeneousDistance {
    /// A gauge with an explicitly chosen layer weight.
    pub fn new(algebra: Arc<GradedAlgebra>, kind: GaugeKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "layer weight must be positive and finite, got {epsilon}"
            )));
        }
        Ok(HomogeneousDistance { algebra, kind, epsilon })
    }

    /// The same gauge transported to another algebra (used when passing to
    /// adapted graded coordinates; layer-wise orthogonal changes of basis
    /// leave both gauge kinds invariant).
    pub fn for_algebra(&self, algebra: Arc<GradedAlgebra>) -> Self {
        HomogeneousDistance { algebra, kind: self.kind, epsilon: self.epsilon }
    }

    pub fn algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Layer norms `(|x^(1)|, |x^(2)|^overall)` of a coordinate vector.
    #[inline]
    fn layer_parts(&self, x: &[f64]) -> (f64, f64) {
        let m1 = self.algebra.m1();
        let a = math::norm2(&x[..m1]);
        let b = math::sqrt(math::norm2(&x[m1..]));
        (a, b)
    }

    /// Homogeneous quasi-norm of `x` (distance to the identity).
    pub fn norm(&self, x: &[f64]) -> f64 {
        let (a, b) = self.layer_parts(x);
        match self.kind {
            GaugeKind::Max => a.max(self.epsilon * b),
            GaugeKind::Sum => a + self.epsilon * b,
        }
    }

    /// `ρ(x, y) = N(x^{-1} y)`.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let q = self.algebra.q();
        if x.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: x.len() });
        }
        if y.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: y.len() });
        }
        let mut diff = vec![0.0; q];
        self.diff_into(x, y, &mut diff);
        Ok(self.norm(&diff))
    }

    /// `x^{-1} y` into `out` without allocating.
    #[inline]
    pub(crate) fn diff_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let xin: Vec<f64> = x.iter().map(|v| -v).collect();
        self.algebra.multiply_into(&xin, y, out);
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, x: &[f64], y: &[f64], scratch: &mut [f64]) -> f64 {
        self.diff_into(x, y, scratch);
        self.norm(scratch)
    }

    /// Per-coordinate half-widths of the tight bounding box of `B_r`:
    /// `r` on weight-1 coordinates and `(r / eps)^2` on weight-2 ones.
    pub fn ball_half_widths(&self, r: f64) -> Vec<f64> {
        let q = self.algebra.q();
        (0..q)
            .map(|i| {
                if self.algebra.weight(i) == 1 {
                    r
                } else {
                    (r / self.epsilon) * (r / self.epsilon)
                }
            })
            .collect()
    }

    /// Draws `n` points of `B(center, r)` by rejection from the bounding box
    /// translated by `center`; deterministic given the seed.
    pub fn sample_ball(
        &self,
        center: &[f64],
        r: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        let q = self.algebra.q();
        if center.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: center.len() });
        }
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {r}")));
        }
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return Ok(out);
        }
        let widths = self.ball_half_widths(r);
        let mut rng = rng::stream(seed, 0);
        let mut xi = vec![0.0; q];
        let mut point = vec![0.0; q];
        let mut attempted: usize = 0;
        while out.len() < n {
            attempted += 1;
            for i in 0..q {
                xi[i] = rng::symmetric(&mut rng, widths[i]);
            }
            if self.norm(&xi) < r {
                self.algebra.multiply_into(center, &xi, &mut point);
                out.push(point.clone());
            }
            if attempted >= 10_000 && (out.len() as f64) < attempted as f64 * 1e-4 {
                return Err(Error::SamplingFailed { accepted: out.len(), attempted });
            }
        }
        Ok(out)
    }
}

/// Finds the largest layer weight in (0, 1] for which the triangle
/// inequality holds on `samples` seeded random triples (slack above
/// [`TRIANGLE_SLACK`]), by testing 1 first and bisecting otherwise.
/// Deterministic given the seed: the triples are drawn once and reused for
/// every tested weight.
pub fn calibrate(
    algebra: Arc<GradedAlgebra>,
    kind: GaugeKind,
    samples: usize,
    seed: u64,
) -> Result<(HomogeneousDistance, CalibrationReport)> {
    if samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least 10000 triples, got {samples}"
        )));
    }
    let q = algebra.q();
    let mut rng = rng::stream(seed, 0);
    // For each triple precompute the layer parts of the three displacement
    // vectors; every candidate epsilon is then O(1) per triple.
    let mut parts: Vec<[(f64, f64); 3]> = Vec::with_capacity(samples);
    let mut x = vec![0.0; q];
    let mut y = vec![0.0; q];
    let mut z = vec![0.0; q];
    let mut diff = vec![0.0; q];
    let probe = HomogeneousDistance::new(algebra.clone(), kind, 1.0)?;
    for _ in 0..samples {
        for i in 0..q {
            x[i] = rng::symmetric(&mut rng, 1.0);
            y[i] = rng::symmetric(&mut rng, 1.0);
            z[i] = rng::symmetric(&mut rng, 1.0);
        }
        probe.diff_into(&x, &y, &mut diff);
        let xy = probe.layer_parts(&diff);
        probe.diff_into(&y, &z, &mut diff);
        let yz = probe.layer_parts(&diff);
        probe.diff_into(&x, &z, &mut diff);
        let xz = probe.layer_parts(&diff);
        parts.push([xy, yz, xz]);
    }
    let slack_at = |eps: f64| -> f64 {
        let gauge = |(a, b): (f64, f64)| match kind {
            GaugeKind::Max => a.max(eps * b),
            GaugeKind::Sum => a + eps * b,
        };
        let mut worst = f64::INFINITY;
        for [xy, yz, xz] in &parts {
            let slack = gauge(*xy) + gauge(*yz) - gauge(*xz);
            if slack < worst {
                worst = slack;
            }
        }
        worst
    };
    let feasible = |eps: f64| slack_at(eps) >= TRIANGLE_SLACK;

    let epsilon = if feasible(1.0) {
        1.0
    } else {
        let mut lo = 2.0_f64.powi(-20);
        if !feasible(lo) {
            return Err(Error::CalibrationFailed { worst_slack: slack_at(lo) });
        }
        let mut hi = 1.0;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let report = CalibrationReport { kind, epsilon, samples, seed, worst_slack: slack_at(epsilon) };
    Ok((HomogeneousDistance { algebra, kind, epsilon }, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_subgroup_sum_gauge_formula() {
        let pi = GradedAlgebra::vertical_subgroup();
        let d = HomogeneousDistance::new(pi, GaugeKind::Sum, 1.0).unwrap();
        assert_eq!(d.norm(&[1.0, 0.0]), 1.0);
        assert_eq!(d.norm(&[1.0, 1.0]), 2.0);
        assert_eq!(d.norm(&[0.0, 0.0]), 0.0);
        // abelian difference (-1, 1): 1 + 1
        assert_eq!(d.distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(d.distance(&[0.7, -0.3], &[0.7, -0.3]).unwrap(), 0.0);
    }

    #[test]
    fn norm_vanishes_only_at_identity() {
        let h1 = GradedAlgebra::heisenberg();
        for kind in [GaugeKind::Max, GaugeKind::Sum] {
            let d = HomogeneousDistance::new(h1.clone(), kind, 0.5).unwrap();
            assert_eq!(d.norm(&[0.0, 0.0, 0.0]), 0.0);
            assert!(d.norm(&[0.0, 0.0, 1e-9]) > 0.0);
            assert!(d.norm(&[1e-9, 0.0, 0.0]) > 0.0);
        }
    }

    #[test]
    fn homogeneity_and_left_invariance() {
        let h1 = GradedAlgebra::heisenberg();
        let d = HomogeneousDistance::new(h1.clone(), GaugeKind::Max, 0.8).unwrap();
        let mut rng = crate::rng::stream(11, 0);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| crate::rng::symmetric(&mut rng, 2.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| crate::rng::symmetric(&mut rng, 2.0)).collect();
            let u: Vec<f64> = (0..3).map(|_| crate::rng::symmetric(&mut rng, 2.0)).collect();
            let r = 0.1 + crate::rng::symmetric(&mut rng, 0.05).abs() + 1.5;
            let xr = h1.dilate(r, &x).unwrap();
            assert!((d.norm(&xr) - r * d.norm(&x)).abs() <= 1e-12 * (1.0 + d.norm(&xr)));
            let ux = h1.multiply(&u, &x).unwrap();
            let uy = h1.multiply(&u, &y).unwrap();
            let lhs = d.distance(&ux, &uy).unwrap();
            let rhs = d.distance(&x, &y).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }

    #[test]
    fn calibration_is_trivial_on_abelian_groups() {
        let pi = GradedAlgebra::vertical_subgroup();
        let (d, report) = calibrate(pi, GaugeKind::Sum, 10_000, 7).unwrap();
        assert_eq!(d.epsilon(), 1.0);
        assert!(report.worst_slack >= TRIANGLE_SLACK);
    }

    #[test]
    fn calibration_is_deterministic_and_reusable() {
        let h1 = GradedAlgebra::heisenberg();
        let (d1, r1) = calibrate(h1.clone(), GaugeKind::Sum, 10_000, 42).unwrap();
        let (_d2, r2) = calibrate(h1.clone(), GaugeKind::Sum, 10_000, 42).unwrap();
        assert_eq!(r1, r2);
        // The sum gauge on H^1 admits no uniform eps: triples like
        // (1,0,0), (0,d,0) force eps <= sqrt(d) through the bracket cross
        // term, so the calibrated weight depends on the sampled worst case.
        // It is still positive, feasible on the sample, and seed-stable.
        assert!(d1.epsilon() < 1.0);
        assert!(d1.epsilon() > 0.0);
        assert!(r1.worst_slack >= TRIANGLE_SLACK);
        // the max gauge on H^1 is provably a distance at eps = 1
        let (dmax, _) = calibrate(h1, GaugeKind::Max, 10_000, 42).unwrap();
        assert_eq!(dmax.epsilon(), 1.0);
    }

    #[test]
    fn calibration_rejects_small_sample_counts() {
        let h1 = GradedAlgebra::heisenberg();
        assert!(matches!(
            calibrate(h1, GaugeKind::Max, 100, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sampled_ball_points_satisfy_the_predicate() {
        let h1 = GradedAlgebra::heisenberg();
        let d = HomogeneousDistance::new(h1, GaugeKind::Max, 1.0).unwrap();
        let center = [0.5, -0.25, 1.0];
        let pts = d.sample_ball(&center, 0.3, 500, 9).unwrap();
        assert_eq!(pts.len(), 500);
        for p in &pts {
            assert!(d.distance(&center, p).unwrap() < 0.3);
        }
        assert!(d.sample_ball(&center, 0.3, 0, 9).unwrap().is_empty());
        assert!(d.sample_ball(&center, 0.0, 1, 9).is_err());
    }

    #[test]
    fn sampled_balls_nest_and_dilate() {
        let h1 = GradedAlgebra::heisenberg();
        let d = HomogeneousDistance::new(h1.clone(), GaugeKind::Max, 1.0).unwrap();
        let id = [0.0, 0.0, 0.0];
        let pts = d.sample_ball(&id, 1.0, 300, 3).unwrap();
        for p in &pts {
            // nesting: B_1 ⊂ B_2
            assert!(d.norm(p) < 2.0);
            // homogeneity maps samples of B_1 into B_{1/4}
            let shrunk = h1.dilate(0.25, p).unwrap();
            assert!(d.norm(&shrunk) < 0.25 + 1e-15);
        }
    }
}
