//! Implicit polynomial submanifolds and their pointwise degree.
//!
//! A submanifold is the zero set of `k` polynomials with exact symbolic
//! Jacobian and Hessian oracles. The pointwise degree is computed by three
//! independent routes that must agree at every queried point of a step-2
//! group:
//!
//! 1. `2p - h`, with `h = dim(T_xΣ ∩ H_x𝔾)` read off the kernel of the
//!    Jacobian restricted to the horizontal frame columns;
//! 2. Gromov's flag count `D'(x) = Σ_j j · m'_j(x)` with the flag dimensions
//!    obtained from stacked-rank intersections;
//! 3. the weighted degree of the tangent `p`-vector expressed in the
//!    left-invariant frame at the point.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::group::GradedAlgebra;
use crate::linalg;
use crate::math;
use crate::multivector::PVector;
use crate::poly::{CompiledPoly, Polynomial};
use crate::rng;

/// A point belongs to the level set when `|f|_inf` is at most this.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// Target residual for Newton projection onto the level set.
pub const NEWTON_TOL: f64 = 1e-12;

const NEWTON_MAX_ITERS: usize = 50;

/// Classification of a point of the submanifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    /// The horizontal restriction of the differential is surjective.
    NonHorizontal,
    /// Horizontal in codimension at least two.
    Horizontal,
    /// Horizontal in codimension one.
    Characteristic,
}

/// Level set `f^{-1}(0)` of a polynomial map with exact derivative oracles.
#[derive(Debug, Clone)]
pub struct ImplicitSubmanifold {
    algebra: Arc<GradedAlgebra>,
    f: Vec<Polynomial>,
    grad: Vec<Vec<Polynomial>>,
    hess: Vec<Vec<Vec<Polynomial>>>,
    compiled_f: Vec<CompiledPoly>,
    compiled_grad: Vec<Vec<CompiledPoly>>,
    rank_tol: f64,
}

/// Pointwise degree data; all three degree routes are reported and equal.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeReport {
    pub point: Vec<f64>,
    /// `dim(T_xΣ ∩ H_x𝔾)`.
    pub h: usize,
    /// Gromov flag dimensions `(m'_1, m'_2)`.
    pub flag_dims: [usize; 2],
    pub degree: u32,
    pub gromov_degree: u32,
    pub tangent_pvector_degree: u32,
    pub class: PointClass,
}

/// Output of [`ImplicitSubmanifold::degree_map`].
#[derive(Debug, Clone)]
pub struct DegreeMapReport {
    pub reports: Vec<DegreeReport>,
    pub max_degree: u32,
    /// Seeds whose Newton projection or degree computation failed.
    pub failures: usize,
    /// Pairs `(i, j)` of report indices with `|x_i - x_j| <= audit_radius`
    /// and `degree(x_j) < degree(x_i)`; grid artifacts to be inspected, not
    /// hard errors (the degree only needs to be lower semicontinuous in the
    /// limit).
    pub semicontinuity_flags: Vec<(usize, usize)>,
}

impl ImplicitSubmanifold {
    pub fn new(algebra: Arc<GradedAlgebra>, f: Vec<Polynomial>) -> Result<Self> {
        let q = algebra.q();
        let k = f.len();
        if k == 0 || k >= q {
            return Err(Error::InvalidParameter(format!(
                "codimension must lie in 1..{q}, got {k}"
            )));
        }
        for p in &f {
            if p.nvars() != q {
                return Err(Error::DimensionMismatch { expected: q, got: p.nvars() });
            }
        }
        let grad: Vec<Vec<Polynomial>> = f.iter().map(|p| p.gradient()).collect();
        let hess: Vec<Vec<Vec<Polynomial>>> =
            grad.iter().map(|g| g.iter().map(|d| d.gradient()).collect()).collect();
        let compiled_f = f.iter().map(|p| p.compile()).collect();
        let compiled_grad =
            grad.iter().map(|g| g.iter().map(|d| d.compile()).collect()).collect();
        Ok(ImplicitSubmanifold {
            algebra,
            f,
            grad,
            hess,
            compiled_f,
            compiled_grad,
            rank_tol: linalg::RANK_REL_TOL,
        })
    }

    /// Parses `k` polynomial strings in variables `x1..xq`.
    pub fn from_strings(algebra: Arc<GradedAlgebra>, equations: &[&str]) -> Result<Self> {
        let q = algebra.q();
        let f = equations
            .iter()
            .map(|s| Polynomial::parse(s, q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(algebra, f)
    }

    /// Overrides the relative singular-value threshold used for every rank
    /// decision (default [`linalg::RANK_REL_TOL`]).
    pub fn with_rank_tolerance(mut self, tol: f64) -> Self {
        self.rank_tol = tol;
        self
    }

    pub fn algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.f
    }

    /// Codimension `k`.
    pub fn codim(&self) -> usize {
        self.f.len()
    }

    /// Manifold dimension `p = q - k`.
    pub fn dim(&self) -> usize {
        self.algebra.q() - self.f.len()
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tol
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.compiled_f.iter().map(|p| p.eval(x)).collect()
    }

    #[inline]
    pub(crate) fn value_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.compiled_f) {
            *o = p.eval(x);
        }
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        self.compiled_f.iter().fold(0.0, |m, p| m.max(math::abs(p.eval(x))))
    }

    pub fn is_on_manifold(&self, x: &[f64]) -> bool {
        self.residual(x) <= ON_MANIFOLD_TOL
    }

    /// Exact Jacobian `df(x)`, `k x q`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let q = self.algebra.q();
        let k = self.codim();
        let mut j = DMatrix::zeros(k, q);
        for (i, row) in self.compiled_grad.iter().enumerate() {
            for (c, d) in row.iter().enumerate() {
                j[(i, c)] = d.eval(x);
            }
        }
        j
    }

    #[inline]
    pub(crate) fn jacobian_into(&self, x: &[f64], out: &mut [f64]) {
        let q = self.algebra.q();
        for (i, row) in self.compiled_grad.iter().enumerate() {
            for (c, d) in row.iter().enumerate() {
                out[i * q + c] = d.eval(x);
            }
        }
    }

    /// Exact Hessian of component `i`, `q x q`, symmetric.
    pub fn hessian(&self, i: usize, x: &[f64]) -> DMatrix<f64> {
        let q = self.algebra.q();
        let mut h = DMatrix::zeros(q, q);
        for (r, row) in self.hess[i].iter().enumerate() {
            for (c, d) in row.iter().enumerate() {
                h[(r, c)] = d.eval(x);
            }
        }
        h
    }

    pub(crate) fn hessian_polys(&self, i: usize) -> &Vec<Vec<Polynomial>> {
        &self.hess[i]
    }

    pub(crate) fn gradient_polys(&self, i: usize) -> &Vec<Polynomial> {
        &self.grad[i]
    }

    /// Finite-difference Jacobian for validating the symbolic oracle; never
    /// used by the blow-up pipeline itself.
    pub fn jacobian_fd(&self, x: &[f64], step: f64) -> DMatrix<f64> {
        let q = self.algebra.q();
        let k = self.codim();
        let mut j = DMatrix::zeros(k, q);
        let mut xp = x.to_vec();
        for c in 0..q {
            let x0 = x[c];
            xp[c] = x0 + step;
            let fp = self.value(&xp);
            xp[c] = x0 - step;
            let fm = self.value(&xp);
            xp[c] = x0;
            for i in 0..k {
                j[(i, c)] = (fp[i] - fm[i]) / (2.0 * step);
            }
        }
        j
    }

    fn check_point(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let q = self.algebra.q();
        if x.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: x.len() });
        }
        let residual = self.residual(x);
        if residual > ON_MANIFOLD_TOL {
            return Err(Error::OffManifold { residual });
        }
        let j = self.jacobian(x);
        let rank = linalg::rank(&j, self.rank_tol);
        if rank != self.codim() {
            return Err(Error::RankDeficient { rank, expected: self.codim() });
        }
        Ok(j)
    }

    /// Orthonormal basis of `ker df(x)` (the coordinate tangent space).
    pub fn tangent_basis(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let kernel = self.tangent_matrix(x)?;
        Ok((0..kernel.ncols()).map(|c| kernel.column(c).iter().copied().collect()).collect())
    }

    pub(crate) fn tangent_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let j = self.check_point(x)?;
        let (_, kernel) = linalg::domain_split(&j, self.rank_tol);
        debug_assert_eq!(kernel.ncols(), self.dim());
        Ok(kernel)
    }

    /// Rank of the differential restricted to the horizontal subspace,
    /// i.e. `κ = rank(Y_j f^i(x))` over the first `m1` frame columns.
    pub(crate) fn horizontal_rank(&self, x: &[f64], jacobian: &DMatrix<f64>) -> usize {
        let frame = self.algebra.frame_matrix(x);
        let b = jacobian * &frame;
        let m1 = self.algebra.m1();
        let bh = b.view((0, 0), (self.codim(), m1)).clone_owned();
        linalg::rank(&bh, self.rank_tol)
    }

    fn class_from_kappa(&self, kappa: usize) -> PointClass {
        if kappa == self.codim() {
            PointClass::NonHorizontal
        } else if self.codim() == 1 {
            PointClass::Characteristic
        } else {
            PointClass::Horizontal
        }
    }

    /// Classifies `x` as non-horizontal, horizontal, or characteristic.
    pub fn classify(&self, x: &[f64]) -> Result<PointClass> {
        let j = self.check_point(x)?;
        Ok(self.class_from_kappa(self.horizontal_rank(x, &j)))
    }

    /// Pointwise degree by all three routes; they must agree.
    pub fn pointwise_degree(&self, x: &[f64]) -> Result<DegreeReport> {
        let j = self.check_point(x)?;
        let p = self.dim();
        let m1 = self.algebra.m1();

        // route (a): h from the kernel of the horizontally restricted
        // differential, degree = 2p - h
        let kappa = self.horizontal_rank(x, &j);
        let h = m1 - kappa;
        let from_codim = (2 * p - h) as u32;

        // route (b): Gromov flag via stacked-rank intersections
        let (_, tangent) = linalg::domain_split(&j, self.rank_tol);
        let frame = self.algebra.frame_matrix(x);
        let horizontal = frame.view((0, 0), (self.algebra.q(), m1)).clone_owned();
        let m1p = linalg::intersection_dim(&tangent, &horizontal, self.rank_tol);
        let m2p = p - m1p;
        let gromov = (m1p + 2 * m2p) as u32;

        // route (c): weighted degree of the tangent p-vector in the frame
        let frame_inv = self.algebra.frame_inverse_matrix(x);
        let in_frame = frame_inv * &tangent;
        let cols: Vec<Vec<f64>> =
            (0..in_frame.ncols()).map(|c| in_frame.column(c).iter().copied().collect()).collect();
        let col_refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let tau = PVector::wedge(self.algebra.clone(), &col_refs)?;
        let pvector = tau.degree()?;

        if from_codim != gromov || from_codim != pvector {
            return Err(Error::DegreeRouteMismatch {
                point: x.to_vec(),
                from_codim,
                gromov,
                pvector,
                h,
            });
        }
        Ok(DegreeReport {
            point: x.to_vec(),
            h,
            flag_dims: [m1p, m2p],
            degree: from_codim,
            gromov_degree: gromov,
            tangent_pvector_degree: pvector,
            class: self.class_from_kappa(kappa),
        })
    }

    /// Damped Gauss-Newton projection of a seed onto the level set.
    pub fn newton_project(&self, seed: &[f64]) -> Result<Vec<f64>> {
        let q = self.algebra.q();
        if seed.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: seed.len() });
        }
        let k = self.codim();
        let mut x = seed.to_vec();
        let mut fval = vec![0.0; k];
        let mut jac = vec![0.0; k * q];
        let mut gram = vec![0.0; k * k];
        let mut lambda = vec![0.0; k];
        self.value_into(&x, &mut fval);
        let mut res = math::norm_inf(&fval);
        for _ in 0..NEWTON_MAX_ITERS {
            if res <= NEWTON_TOL {
                return Ok(x);
            }
            self.jacobian_into(&x, &mut jac);
            // solve (J J^T) λ = f, step = J^T λ
            for i in 0..k {
                for j2 in 0..k {
                    let mut acc = 0.0;
                    for c in 0..q {
                        acc += jac[i * q + c] * jac[j2 * q + c];
                    }
                    gram[i * k + j2] = acc;
                }
                lambda[i] = fval[i];
            }
            linalg::solve_in_place(&mut gram, &mut lambda, k, 1)?;
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let mut trial = x.clone();
                for c in 0..q {
                    let mut step = 0.0;
                    for i in 0..k {
                        step += jac[i * q + c] * lambda[i];
                    }
                    trial[c] -= scale * step;
                }
                self.value_into(&trial, &mut fval);
                let trial_res = math::norm_inf(&fval);
                if trial_res < res {
                    x = trial;
                    res = trial_res;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonFailed { attempts: NEWTON_MAX_ITERS });
            }
        }
        if res <= NEWTON_TOL {
            Ok(x)
        } else {
            Err(Error::NewtonFailed { attempts: NEWTON_MAX_ITERS })
        }
    }

    /// Projects every seed, reports per-point degrees, the empirical maximum,
    /// and the lower-semicontinuity audit over `audit_radius`-neighbors.
    pub fn degree_map(&self, seeds: &[Vec<f64>], audit_radius: f64) -> DegreeMapReport {
        let mut reports = Vec::new();
        let mut failures = 0usize;
        for seed in seeds {
            match self.newton_project(seed).and_then(|x| self.pointwise_degree(&x)) {
                Ok(report) => reports.push(report),
                Err(_) => failures += 1,
            }
        }
        let max_degree = reports.iter().map(|r| r.degree).max().unwrap_or(0);
        let mut flags = Vec::new();
        for i in 0..reports.len() {
            for j in 0..reports.len() {
                if i == j {
                    continue;
                }
                let dist2: f64 = reports[i]
                    .point
                    .iter()
                    .zip(&reports[j].point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if math::sqrt(dist2) <= audit_radius && reports[j].degree < reports[i].degree {
                    flags.push((i, j));
                }
            }
        }
        DegreeMapReport { reports, max_degree, failures, semicontinuity_flags: flags }
    }

    /// Seeded random on-manifold points near `x`: coordinate box seeds
    /// (half-width scaled by the weight) projected by Newton.
    pub fn sample_patch(
        &self,
        x: &[f64],
        half_extent: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        let q = self.algebra.q();
        if x.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: x.len() });
        }
        if !(half_extent > 0.0) {
            return Err(Error::InvalidParameter(String::from("half_extent must be positive")));
        }
        let mut rng = rng::stream(seed, 1);
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0usize;
        while out.len() < n {
            attempts += 1;
            if attempts > 50 * n.max(1) {
                return Err(Error::NewtonFailed { attempts });
            }
            let seed_pt: Vec<f64> = (0..q)
                .map(|i| {
                    let w = if self.algebra.weight(i) == 1 {
                        half_extent
                    } else {
                        half_extent * half_extent
                    };
                    x[i] + rng::symmetric(&mut rng, w)
                })
                .collect();
            if let Ok(p) = self.newton_project(&seed_pt) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_h1() -> ImplicitSubmanifold {
        ImplicitSubmanifold::from_strings(GradedAlgebra::heisenberg(), &["x3"]).unwrap()
    }

    fn paraboloid_h1() -> ImplicitSubmanifold {
        ImplicitSubmanifold::from_strings(GradedAlgebra::heisenberg(), &["x3 - x1^2 - x2^2"])
            .unwrap()
    }

    #[test]
    fn tangent_basis_of_plane_at_origin() {
        let sigma = plane_h1();
        let basis = sigma.tangent_basis(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(v[2].abs() < 1e-12);
        }
    }

    #[test]
    fn tangent_basis_rejects_off_manifold_points() {
        let sigma = plane_h1();
        assert!(matches!(
            sigma.tangent_basis(&[0.0, 0.0, 0.5]),
            Err(Error::OffManifold { .. })
        ));
    }

    #[test]
    fn rank_deficiency_is_reported() {
        // f = t^2 has a singular differential on its zero set
        let sigma =
            ImplicitSubmanifold::from_strings(GradedAlgebra::heisenberg(), &["x3^2"]).unwrap();
        assert!(matches!(
            sigma.pointwise_degree(&[1.0, 1.0, 0.0]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn kernel_property_on_sampled_surface_points() {
        let sigma = paraboloid_h1();
        let pts = sigma.sample_patch(&[0.0, 0.0, 0.0], 0.8, 50, 5).unwrap();
        for p in pts {
            let j = sigma.jacobian(&p);
            for v in sigma.tangent_basis(&p).unwrap() {
                let vv = DMatrix::from_column_slice(3, 1, &v);
                assert!((j.clone() * vv).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn plane_degrees_match_the_codimension_one_formula() {
        let sigma = plane_h1();
        let at0 = sigma.pointwise_degree(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(at0.degree, 2); // Q - 2
        assert_eq!(at0.class, PointClass::Characteristic);
        assert_eq!(at0.h, 2);
        let off = sigma.pointwise_degree(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(off.degree, 3); // Q - 1
        assert_eq!(off.class, PointClass::NonHorizontal);
        assert_eq!(off.h, 1);
        assert_eq!(off.flag_dims, [1, 1]);
    }

    #[test]
    fn vertical_subgroup_as_level_set_has_constant_degree() {
        let sigma =
            ImplicitSubmanifold::from_strings(GradedAlgebra::heisenberg(), &["x1"]).unwrap();
        for pt in [[0.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.0, -2.0, 3.0]] {
            let r = sigma.pointwise_degree(&pt).unwrap();
            assert_eq!(r.degree, 3);
            assert_eq!(r.class, PointClass::NonHorizontal);
        }
    }

    #[test]
    fn paraboloid_characteristic_set_is_the_origin() {
        let sigma = paraboloid_h1();
        assert_eq!(
            sigma.classify(&[0.0, 0.0, 0.0]).unwrap(),
            PointClass::Characteristic
        );
        // Xf = -2x - y and Yf = -2y + x vanish jointly only at 0
        let p = sigma.newton_project(&[0.3, -0.4, 0.0]).unwrap();
        assert_eq!(sigma.classify(&p).unwrap(), PointClass::NonHorizontal);
    }

    #[test]
    fn degree_map_of_plane_grid() {
        let sigma = plane_h1();
        let mut seeds = Vec::new();
        let n = 5;
        for i in 0..n {
            for j in 0..n {
                let x = -0.5 + i as f64 / (n - 1) as f64;
                let y = -0.5 + j as f64 / (n - 1) as f64;
                seeds.push(vec![x, y, 0.0]);
            }
        }
        let map = sigma.degree_map(&seeds, 0.3);
        assert_eq!(map.failures, 0);
        assert_eq!(map.max_degree, 3);
        let low: Vec<_> = map.reports.iter().filter(|r| r.degree == 2).collect();
        assert_eq!(low.len(), 1);
        assert!(math::norm2(&low[0].point) < 1e-12);
        // the only flagged pairs point at the characteristic origin
        for (_, j) in &map.semicontinuity_flags {
            assert_eq!(map.reports[*j].degree, 2);
        }
    }

    #[test]
    fn symbolic_jacobian_matches_finite_differences() {
        let sigma = paraboloid_h1();
        let x = [0.37, -0.81, 0.37 * 0.37 + 0.81 * 0.81];
        let j = sigma.jacobian(&x);
        let jfd = sigma.jacobian_fd(&x, 1e-6);
        assert!((j - jfd).amax() < 1e-8);
    }

    #[test]
    fn newton_projection_lands_on_the_level_set() {
        let sigma = paraboloid_h1();
        let p = sigma.newton_project(&[0.5, 0.5, 3.0]).unwrap();
        assert!(sigma.residual(&p) <= NEWTON_TOL);
    }

    #[test]
    fn construction_validates_inputs() {
        let h1 = GradedAlgebra::heisenberg();
        assert!(ImplicitSubmanifold::from_strings(h1.clone(), &[]).is_err());
        assert!(ImplicitSubmanifold::from_strings(h1.clone(), &["x1", "x2", "x3"]).is_err());
        assert!(ImplicitSubmanifold::from_strings(h1, &["x5"]).is_err());
    }
}
