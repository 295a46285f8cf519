//! Step-2 graded Lie algebras and their groups in exponential coordinates.
//!
//! An algebra is `V1 ⊕ V2` with `[V1, V1] ⊆ V2` and `[·, V2] = 0`; the group
//! law is the exact step-2 Baker–Campbell–Hausdorff product
//! `x · y = x + y + ½ [x, y]`, which on the Heisenberg group with
//! `[W1, W2] = 2 W3` reproduces the classical law
//! `(x,y,t)(x',y',t') = (x+x', y+y', t+t'+xy'-yx')`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Structure constants and layer split of a step-2 graded nilpotent algebra.
///
/// Coordinates `1..=m1` have weight 1 (the horizontal layer `V1`), the
/// remaining `m2` have weight 2. Brackets of basis vectors land in `V2`
/// only, so the Jacobi identity holds structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedAlgebra {
    m1: usize,
    m2: usize,
    /// `consts[k2 * m1 * m1 + i * m1 + j]` is the coefficient of
    /// `W_{m1 + k2 + 1}` in `[W_{i+1}, W_{j+1}]` (0-based `i`, `j`, `k2`).
    consts: Vec<f64>,
    stratified: bool,
}

impl GradedAlgebra {
    /// Builds an algebra from sparse bracket entries `(i, j, k, value)`
    /// meaning `[W_i, W_j] = value * W_k + ...` with 1-based indices,
    /// `i, j <= m1 < k <= m1 + m2`. The antisymmetric counterpart of each
    /// entry is filled in automatically; listing both `(i,j,k,v)` and
    /// `(j,i,k,v')` with `v' != -v` is an error.
    pub fn new(m1: usize, m2: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        if m1 == 0 {
            return Err(Error::InvalidAlgebra(String::from("m1 must be at least 1")));
        }
        let q = m1 + m2;
        let mut consts = vec![0.0; m1 * m1 * m2];
        let mut set = vec![false; m1 * m1 * m2];
        for &(i, j, k, value) in entries {
            if i == 0 || j == 0 || i > m1 || j > m1 {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket entry ({i},{j},{k}): i and j must lie in 1..={m1}"
                )));
            }
            if k <= m1 || k > q {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket entry ({i},{j},{k}): k must lie in {}..={q} (brackets land in V2)",
                    m1 + 1
                )));
            }
            if i == j && value != 0.0 {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket entry ({i},{i},{k}): [W_i, W_i] must vanish"
                )));
            }
            let k2 = k - m1 - 1;
            let idx = k2 * m1 * m1 + (i - 1) * m1 + (j - 1);
            let idx_t = k2 * m1 * m1 + (j - 1) * m1 + (i - 1);
            if set[idx] && consts[idx] != value {
                return Err(Error::InvalidAlgebra(format!(
                    "conflicting entries for bracket ({i},{j},{k})"
                )));
            }
            if set[idx_t] && consts[idx_t] != -value {
                return Err(Error::InvalidAlgebra(format!(
                    "entries for ({i},{j},{k}) and ({j},{i},{k}) break antisymmetry"
                )));
            }
            consts[idx] = value;
            consts[idx_t] = -value;
            set[idx] = true;
            set[idx_t] = true;
        }
        Ok(Self::from_dense(m1, m2, consts))
    }

    fn from_dense(m1: usize, m2: usize, consts: Vec<f64>) -> Self {
        let stratified = Self::check_stratified(m1, m2, &consts);
        GradedAlgebra { m1, m2, consts, stratified }
    }

    /// `[V1, V1] = V2` holds iff the bracket images span all of `V2`.
    fn check_stratified(m1: usize, m2: usize, consts: &[f64]) -> bool {
        if m2 == 0 {
            return true;
        }
        let pairs = m1 * (m1 - 1) / 2;
        if pairs == 0 {
            return false;
        }
        let mut images = DMatrix::zeros(m2, pairs);
        let mut col = 0;
        for i in 0..m1 {
            for j in (i + 1)..m1 {
                for k2 in 0..m2 {
                    images[(k2, col)] = consts[k2 * m1 * m1 + i * m1 + j];
                }
                col += 1;
            }
        }
        linalg::rank(&images, linalg::RANK_REL_TOL) == m2
    }

    /// The first Heisenberg group H^1 in coordinates `(x, y, t)` with
    /// `[W1, W2] = 2 W3`, matching the law `(x,y,t)(x',y',t') =
    /// (x+x', y+y', t+t'+xy'-yx')` and dilations `(rx, ry, r^2 t)`.
    pub fn heisenberg() -> Arc<Self> {
        Arc::new(Self::new(2, 1, &[(1, 2, 3, 2.0)]).unwrap())
    }

    /// The vertical subgroup of H^1 as a standalone abelian graded group in
    /// coordinates `(y, t)`, weight 1 and 2. Merely graded, not stratified.
    pub fn vertical_subgroup() -> Arc<Self> {
        Arc::new(Self::new(1, 1, &[]).unwrap())
    }

    /// H^1 x H^1 in coordinates `(x1, y1, x2, y2, t1, t2)`, the factor laws
    /// acting componentwise.
    pub fn double_heisenberg() -> Arc<Self> {
        Arc::new(Self::new(4, 2, &[(1, 2, 5, 2.0), (3, 4, 6, 2.0)]).unwrap())
    }

    /// Free step-2 group on `m1` generators: `[W_i, W_j] = W_{pair(i,j)}`
    /// for `i < j`, one second-layer coordinate per pair.
    pub fn free_step_two(m1: usize) -> Arc<Self> {
        let mut entries = Vec::new();
        let mut k = m1 + 1;
        for i in 1..=m1 {
            for j in (i + 1)..=m1 {
                entries.push((i, j, k, 1.0));
                k += 1;
            }
        }
        Arc::new(Self::new(m1, m1 * (m1 - 1) / 2, &entries).unwrap())
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    /// Topological dimension `q = m1 + m2`.
    pub fn q(&self) -> usize {
        self.m1 + self.m2
    }

    /// Homogeneous dimension `Q = m1 + 2 m2`.
    pub fn homogeneous_dimension(&self) -> u32 {
        (self.m1 + 2 * self.m2) as u32
    }

    /// Dilation weight of coordinate `i` (0-based): 1 on `V1`, 2 on `V2`.
    pub fn weight(&self, i: usize) -> u32 {
        if i < self.m1 {
            1
        } else {
            2
        }
    }

    pub fn weights(&self) -> Vec<u32> {
        (0..self.q()).map(|i| self.weight(i)).collect()
    }

    /// Whether the bracket-generating condition `[V1, V1] = V2` holds;
    /// recorded at construction, no behavior differs.
    pub fn is_stratified(&self) -> bool {
        self.stratified
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        debug_assert!(i < self.m1 && j < self.m1 && k >= self.m1 && k < self.q());
        self.consts[(k - self.m1) * self.m1 * self.m1 + i * self.m1 + j]
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.q() {
            return Err(Error::DimensionMismatch { expected: self.q(), got: v.len() });
        }
        Ok(())
    }

    /// `[a, b]` into `out`; only `V2` components can be nonzero and only the
    /// `V1` components of the inputs contribute (step 2).
    pub fn bracket_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.q());
        for x in out.iter_mut() {
            *x = 0.0;
        }
        for k2 in 0..self.m2 {
            let base = k2 * self.m1 * self.m1;
            let mut acc = 0.0;
            for i in 0..self.m1 {
                let ai = a[i];
                if ai == 0.0 {
                    continue;
                }
                for j in 0..self.m1 {
                    let c = self.consts[base + i * self.m1 + j];
                    if c != 0.0 {
                        acc += ai * b[j] * c;
                    }
                }
            }
            out[self.m1 + k2] = acc;
        }
    }

    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(a)?;
        self.check_len(b)?;
        let mut out = vec![0.0; self.q()];
        self.bracket_into(a, b, &mut out);
        Ok(out)
    }

    /// Exponential-coordinate product `x · y = x + y + ½ [x, y]`.
    pub fn multiply_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.q());
        for i in 0..self.m1 {
            out[i] = x[i] + y[i];
        }
        for k2 in 0..self.m2 {
            let base = k2 * self.m1 * self.m1;
            let mut acc = 0.0;
            for i in 0..self.m1 {
                let xi = x[i];
                if xi == 0.0 {
                    continue;
                }
                for j in 0..self.m1 {
                    let c = self.consts[base + i * self.m1 + j];
                    if c != 0.0 {
                        acc += xi * y[j] * c;
                    }
                }
            }
            let k = self.m1 + k2;
            out[k] = x[k] + y[k] + 0.5 * acc;
        }
    }

    pub fn multiply(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let mut out = vec![0.0; self.q()];
        self.multiply_into(x, y, &mut out);
        Ok(out)
    }

    /// In exponential coordinates `x^{-1} = -x`.
    pub fn inverse_coords(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| -v).collect()
    }

    pub fn dilate_into(&self, r: f64, x: &[f64], out: &mut [f64]) {
        for i in 0..self.m1 {
            out[i] = r * x[i];
        }
        let r2 = r * r;
        for k in self.m1..self.q() {
            out[k] = r2 * x[k];
        }
    }

    /// Dilation `δ_r`: weight-1 coordinates scale by `r`, weight-2 by `r²`.
    pub fn dilate(&self, r: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("dilation factor must be positive, got {r}")));
        }
        let mut out = vec![0.0; self.q()];
        self.dilate_into(r, x, &mut out);
        Ok(out)
    }

    /// Left-invariant frame at `x`: column `i` is `d/ds|_0 (x · s e_i)`,
    /// i.e. `e_i + ½ [x, e_i]`. Unipotent, so its determinant is 1; at the
    /// identity it is the identity matrix.
    pub fn frame_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let q = self.q();
        let mut m = DMatrix::identity(q, q);
        for j in 0..self.m1 {
            for k2 in 0..self.m2 {
                let base = k2 * self.m1 * self.m1;
                let mut acc = 0.0;
                for i in 0..self.m1 {
                    let c = self.consts[base + i * self.m1 + j];
                    if c != 0.0 {
                        acc += x[i] * c;
                    }
                }
                m[(self.m1 + k2, j)] = 0.5 * acc;
            }
        }
        m
    }

    /// Inverse of the frame matrix in closed form: `I - ½ ad_x` (the ad map
    /// is 2-step nilpotent).
    pub fn frame_inverse_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = self.frame_matrix(x);
        for j in 0..self.m1 {
            for k in self.m1..self.q() {
                m[(k, j)] = -m[(k, j)];
            }
        }
        m
    }

    /// Regrades the algebra with a user-supplied complement of `V2`:
    /// `complement` holds `m1` columns of length `q`, the new first-layer
    /// basis expressed in the old one. Returns the regraded algebra and the
    /// `q x q` change-of-basis matrix (new basis vectors as columns; the
    /// `V2` basis is kept).
    pub fn regrade(&self, complement: &DMatrix<f64>) -> Result<(GradedAlgebra, DMatrix<f64>)> {
        let q = self.q();
        if complement.nrows() != q || complement.ncols() != self.m1 {
            return Err(Error::DimensionMismatch { expected: q * self.m1, got: complement.nrows() * complement.ncols() });
        }
        let top = complement.view((0, 0), (self.m1, self.m1)).clone_owned();
        if linalg::rank(&top, linalg::RANK_REL_TOL) != self.m1 {
            return Err(Error::InvalidAlgebra(String::from(
                "complement does not project isomorphically onto V1",
            )));
        }
        let mut basis = DMatrix::identity(q, q);
        basis.view_mut((0, 0), (q, self.m1)).copy_from(complement);
        let mut consts = vec![0.0; self.m1 * self.m1 * self.m2];
        let mut scratch = vec![0.0; q];
        for a in 0..self.m1 {
            for b in (a + 1)..self.m1 {
                let ca: Vec<f64> = (0..q).map(|i| basis[(i, a)]).collect();
                let cb: Vec<f64> = (0..q).map(|i| basis[(i, b)]).collect();
                self.bracket_into(&ca, &cb, &mut scratch);
                for k2 in 0..self.m2 {
                    let v = scratch[self.m1 + k2];
                    consts[k2 * self.m1 * self.m1 + a * self.m1 + b] = v;
                    consts[k2 * self.m1 * self.m1 + b * self.m1 + a] = -v;
                }
            }
        }
        Ok((Self::from_dense(self.m1, self.m2, consts), basis))
    }
}

/// Element of the group in graded (exponential) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    algebra: Arc<GradedAlgebra>,
    coords: Vec<f64>,
}

impl GroupPoint {
    pub fn new(algebra: Arc<GradedAlgebra>, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != algebra.q() {
            return Err(Error::DimensionMismatch { expected: algebra.q(), got: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(String::from("coordinates must be finite")));
        }
        Ok(GroupPoint { algebra, coords })
    }

    pub fn identity(algebra: Arc<GradedAlgebra>) -> Self {
        let q = algebra.q();
        GroupPoint { algebra, coords: vec![0.0; q] }
    }

    pub fn algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn check_same_algebra(&self, other: &GroupPoint) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    pub fn multiply(&self, other: &GroupPoint) -> Result<GroupPoint> {
        self.check_same_algebra(other)?;
        let coords = self.algebra.multiply(&self.coords, &other.coords)?;
        Ok(GroupPoint { algebra: self.algebra.clone(), coords })
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint {
            algebra: self.algebra.clone(),
            coords: self.algebra.inverse_coords(&self.coords),
        }
    }

    pub fn dilate(&self, r: f64) -> Result<GroupPoint> {
        let coords = self.algebra.dilate(r, &self.coords)?;
        Ok(GroupPoint { algebra: self.algebra.clone(), coords })
    }

    pub fn frame(&self) -> TangentFrame {
        TangentFrame { matrix: self.algebra.frame_matrix(&self.coords), point: self.clone() }
    }
}

/// Left-invariant frame `Y_1(x), ..., Y_q(x)` as matrix columns; the first
/// `m1` columns span the horizontal subspace at the point, the rest span
/// the second-layer subspace.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    point: GroupPoint,
    matrix: DMatrix<f64>,
}

impl TangentFrame {
    pub fn point(&self) -> &GroupPoint {
        &self.point
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().lu().determinant()
    }

    /// The `q x m1` block spanning the horizontal subspace.
    pub fn horizontal_block(&self) -> DMatrix<f64> {
        let q = self.matrix.nrows();
        let m1 = self.point.algebra.m1();
        self.matrix.view((0, 0), (q, m1)).clone_owned()
    }
}
