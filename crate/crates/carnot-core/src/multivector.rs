//! Sparse exterior algebra over a graded basis.
//!
//! A `p`-vector is stored as a map from basis blades (bitmasks over the
//! `q` basis directions) to coefficients. The weighted degree of a blade is
//! the sum of the dilation weights of its indices; the degree of a nonzero
//! `p`-vector is the maximum blade degree over its support.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::group::GradedAlgebra;
use crate::math;

/// Coefficients at or below this magnitude are dropped when a `p`-vector is
/// assembled from floating-point wedges; degree is discontinuous in the
/// coefficients, so the cutoff is fixed and documented rather than adaptive.
pub const ZERO_TOL: f64 = 1e-12;

/// Element of `Λ_p` over the graded basis, sparse over blades.
#[derive(Debug, Clone)]
pub struct PVector {
    algebra: Arc<GradedAlgebra>,
    grade: usize,
    comps: BTreeMap<u32, f64>,
}

impl PVector {
    /// Antisymmetric multilinear expansion of `v_1 ∧ ... ∧ v_p` over the
    /// graded basis. Returns the zero `p`-vector iff the inputs are
    /// linearly dependent (up to the documented coefficient cutoff).
    pub fn wedge(algebra: Arc<GradedAlgebra>, vectors: &[&[f64]]) -> Result<PVector> {
        let q = algebra.q();
        let p = vectors.len();
        if p == 0 || p > q {
            return Err(Error::InvalidParameter(alloc::format!(
                "wedge takes between 1 and {q} vectors, got {p}"
            )));
        }
        for v in vectors {
            if v.len() != q {
                return Err(Error::DimensionMismatch { expected: q, got: v.len() });
            }
        }
        let mut comps: BTreeMap<u32, f64> = BTreeMap::new();
        comps.insert(0, 1.0);
        for v in vectors {
            let mut next: BTreeMap<u32, f64> = BTreeMap::new();
            for (mask, coeff) in &comps {
                for (i, vi) in v.iter().enumerate() {
                    if *vi == 0.0 {
                        continue;
                    }
                    let bit = 1u32 << i;
                    if mask & bit != 0 {
                        continue;
                    }
                    // sign of moving e_i past the higher set bits of mask
                    let higher = (mask >> (i + 1)).count_ones();
                    let sign = if higher % 2 == 0 { 1.0 } else { -1.0 };
                    let entry = next.entry(mask | bit).or_insert(0.0);
                    *entry += sign * coeff * vi;
                }
            }
            comps = next;
        }
        comps.retain(|_, c| math::abs(*c) > ZERO_TOL);
        Ok(PVector { algebra, grade: p, comps })
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Blade components as (sorted 0-based index tuples, coefficient).
    pub fn components(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.comps.iter().map(|(mask, c)| {
            let idx: Vec<usize> = (0..32).filter(|i| mask & (1 << i) != 0).collect();
            (idx, *c)
        })
    }

    fn blade_degree(&self, mask: u32) -> u32 {
        (0..self.algebra.q())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.algebra.weight(i))
            .sum()
    }

    /// `max { d_J : τ_J != 0 }`; undefined for the zero vector.
    pub fn degree(&self) -> Result<u32> {
        self.comps
            .keys()
            .map(|m| self.blade_degree(*m))
            .max()
            .ok_or(Error::ZeroPVector)
    }

    /// Retains exactly the blades of weighted degree `r` (possibly none).
    pub fn project_degree(&self, r: u32) -> PVector {
        PVector {
            algebra: self.algebra.clone(),
            grade: self.grade,
            comps: self
                .comps
                .iter()
                .filter(|(m, _)| self.blade_degree(**m) == r)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &PVector) -> Result<PVector> {
        if self.grade != rhs.grade {
            return Err(Error::DimensionMismatch { expected: self.grade, got: rhs.grade });
        }
        if self.algebra != rhs.algebra {
            return Err(Error::AlgebraMismatch);
        }
        let mut comps = self.comps.clone();
        for (m, c) in &rhs.comps {
            let e = comps.entry(*m).or_insert(0.0);
            *e += c;
            if *e == 0.0 {
                comps.remove(m);
            }
        }
        Ok(PVector { algebra: self.algebra.clone(), grade: self.grade, comps })
    }

    pub fn scale(&self, s: f64) -> PVector {
        if s == 0.0 {
            return PVector { algebra: self.algebra.clone(), grade: self.grade, comps: BTreeMap::new() };
        }
        PVector {
            algebra: self.algebra.clone(),
            grade: self.grade,
            comps: self.comps.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    /// Max-norm of the coefficients.
    pub fn max_abs_coeff(&self) -> f64 {
        self.comps.values().fold(0.0, |m, c| m.max(math::abs(*c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_vec(q: usize, i: usize) -> Vec<f64> {
        (0..q).map(|j| (j == i) as u8 as f64).collect()
    }

    #[test]
    fn basis_wedge_on_h1() {
        let h1 = GradedAlgebra::heisenberg();
        let w1 = basis_vec(3, 0);
        let w2 = basis_vec(3, 1);
        let tau = PVector::wedge(h1, &[&w1, &w2]).unwrap();
        let comps: Vec<_> = tau.components().collect();
        assert_eq!(comps, vec![(vec![0, 1], 1.0)]);
    }

    #[test]
    fn wedge_of_equal_vectors_vanishes() {
        let h1 = GradedAlgebra::heisenberg();
        let v = [0.3, -0.2, 0.9];
        let tau = PVector::wedge(h1, &[&v, &v]).unwrap();
        assert!(tau.is_zero());
        assert!(matches!(tau.degree(), Err(Error::ZeroPVector)));
    }

    #[test]
    fn bilinear_expansion_with_reordering_sign() {
        let h1 = GradedAlgebra::heisenberg();
        // (W1 + W3) ∧ W2 = W1∧W2 - W2∧W3
        let a = [1.0, 0.0, 1.0];
        let w2 = basis_vec(3, 1);
        let tau = PVector::wedge(h1, &[&a, &w2]).unwrap();
        let comps: Vec<_> = tau.components().collect();
        assert_eq!(comps, vec![(vec![0, 1], 1.0), (vec![1, 2], -1.0)]);
    }

    #[test]
    fn degrees_on_h1() {
        let h1 = GradedAlgebra::heisenberg();
        let w1 = basis_vec(3, 0);
        let w2 = basis_vec(3, 1);
        let w3 = basis_vec(3, 2);
        let t12 = PVector::wedge(h1.clone(), &[&w1, &w2]).unwrap();
        let t13 = PVector::wedge(h1.clone(), &[&w1, &w3]).unwrap();
        assert_eq!(t12.degree().unwrap(), 2);
        assert_eq!(t13.degree().unwrap(), 3);
        let sum = t12.add(&t13).unwrap();
        assert_eq!(sum.degree().unwrap(), 3);
        // degree is scale invariant
        assert_eq!(sum.scale(-17.25).degree().unwrap(), 3);
    }

    #[test]
    fn degree_projection_partitions() {
        let h1 = GradedAlgebra::heisenberg();
        let w1 = basis_vec(3, 0);
        let w2 = basis_vec(3, 1);
        let w3 = basis_vec(3, 2);
        let t12 = PVector::wedge(h1.clone(), &[&w1, &w2]).unwrap();
        let t13 = PVector::wedge(h1.clone(), &[&w1, &w3]).unwrap();
        let tau = t12.add(&t13).unwrap();
        let p3 = tau.project_degree(3);
        assert_eq!(p3.components().collect::<Vec<_>>(), vec![(vec![0, 2], 1.0)]);
        assert!(tau.project_degree(5).is_zero());
        // Σ_r (τ)_r = τ
        let q = tau.degree().unwrap();
        let mut acc = tau.project_degree(0);
        for r in 1..=q {
            acc = acc.add(&tau.project_degree(r)).unwrap();
        }
        assert_eq!(
            acc.components().collect::<Vec<_>>(),
            tau.components().collect::<Vec<_>>()
        );
    }

    #[test]
    fn simple_blade_degree_is_two_p_minus_h() {
        // in H^1 x H^1: h weight-1 directions and (p-h) weight-2 directions
        let hh = GradedAlgebra::double_heisenberg();
        let v1 = basis_vec(6, 0); // weight 1
        let v2 = basis_vec(6, 3); // weight 1
        let u1 = basis_vec(6, 4); // weight 2
        let tau = PVector::wedge(hh, &[&v1, &v2, &u1]).unwrap();
        let p = 3;
        let h = 2;
        assert_eq!(tau.degree().unwrap(), (2 * p - h) as u32);
    }

    #[test]
    fn wedge_validates_inputs() {
        let h1 = GradedAlgebra::heisenberg();
        assert!(PVector::wedge(h1.clone(), &[]).is_err());
        let short = [1.0, 0.0];
        assert!(PVector::wedge(h1.clone(), &[&short]).is_err());
        let v = [1.0, 0.0, 0.0];
        assert!(PVector::wedge(h1, &[&v, &v, &v, &v]).is_err());
    }
}
