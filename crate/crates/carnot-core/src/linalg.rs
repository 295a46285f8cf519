//! Small dense linear algebra helpers on top of `nalgebra`.
//!
//! Every factorization-based decision (rank, kernel, complement) goes through
//! a singular value threshold relative to the largest singular value, and
//! every returned basis vector is sign-fixed (first nonzero entry positive)
//! so repeated calls are bit-identical.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::math;

/// Default relative singular-value threshold for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Entries below this magnitude do not count as a "first nonzero" when
/// fixing basis-vector signs.
const SIGN_EPS: f64 = 1e-12;

pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        let mut sign = 1.0;
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if math::abs(v) > SIGN_EPS {
                if v < 0.0 {
                    sign = -1.0;
                }
                break;
            }
        }
        if sign < 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}

/// Numerical rank with the given relative threshold.
pub(crate) fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, b| a.max(*b));
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * max).count()
}

/// Splits the domain of `m` into (row-space basis, kernel basis), both
/// orthonormal, columns sign-fixed, ordered by decreasing singular value.
pub(crate) fn domain_split(m: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = m.ncols();
    if m.nrows() == 0 {
        let mut id = DMatrix::identity(n, n);
        fix_column_signs(&mut id);
        return (DMatrix::zeros(n, 0), id);
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("svd requested v_t");
    let sv = &svd.singular_values;
    let max = sv.iter().fold(0.0_f64, |a, b| a.max(*b));
    let r = if max == 0.0 {
        0
    } else {
        sv.iter().filter(|s| **s > rel_tol * max).count()
    };
    // Rows of vt beyond the computed ones (when nrows < ncols) are not
    // returned by nalgebra's thin SVD, so complete the kernel explicitly.
    let mut range = DMatrix::zeros(n, r);
    for j in 0..r {
        for i in 0..n {
            range[(i, j)] = vt[(j, i)];
        }
    }
    let kernel = orthonormal_complement(&range);
    let mut range = range;
    fix_column_signs(&mut range);
    (range, kernel)
}

/// Orthonormal basis of the orthogonal complement of the column span.
/// `basis` must have orthonormal (or at least full-rank) columns.
pub(crate) fn orthonormal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let l = basis.ncols();
    if l == 0 {
        let mut id = DMatrix::identity(n, n);
        fix_column_signs(&mut id);
        return id;
    }
    if l >= n {
        return DMatrix::zeros(n, 0);
    }
    // Kernel of the transpose: right singular vectors for the zero block.
    let svd = basis.transpose().svd(false, true);
    let vt = svd.v_t.expect("svd requested v_t");
    let mut out = DMatrix::zeros(n, n - l);
    // The thin SVD returns min(l, n) = l rows of vt; Gram-Schmidt the
    // coordinate axes against the span to complete deterministically.
    if vt.nrows() >= n {
        for j in 0..(n - l) {
            for i in 0..n {
                out[(i, j)] = vt[(l + j, i)];
            }
        }
    } else {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n - l);
        for axis in 0..n {
            if cols.len() == n - l {
                break;
            }
            let mut v: Vec<f64> = (0..n).map(|i| if i == axis { 1.0 } else { 0.0 }).collect();
            // remove the span of `basis`
            for j in 0..l {
                let dot: f64 = (0..n).map(|i| basis[(i, j)] * v[i]).sum();
                for i in 0..n {
                    v[i] -= dot * basis[(i, j)];
                }
            }
            // remove previously accepted columns
            for c in &cols {
                let dot: f64 = (0..n).map(|i| c[i] * v[i]).sum();
                for i in 0..n {
                    v[i] -= dot * c[i];
                }
            }
            let nv = math::norm2(&v);
            if nv > 1e-10 {
                for x in v.iter_mut() {
                    *x /= nv;
                }
                cols.push(v);
            }
        }
        debug_assert_eq!(cols.len(), n - l);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                out[(i, j)] = c[i];
            }
        }
    }
    fix_column_signs(&mut out);
    out
}

/// dim(span A ∩ span B) via rank of the stacked system.
pub(crate) fn intersection_dim(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> usize {
    let da = rank(a, rel_tol);
    let db = rank(b, rel_tol);
    let n = a.nrows();
    let mut stacked = DMatrix::zeros(n, a.ncols() + b.ncols());
    stacked.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    stacked.view_mut((0, a.ncols()), (n, b.ncols())).copy_from(b);
    let ds = rank(&stacked, rel_tol);
    da + db - ds
}

/// Solves the square system `a x = b` in place via Gaussian elimination with
/// partial pivoting. `a` is row-major `n x n`, `b` has `m` stacked
/// right-hand sides of length `n` (column-major by rhs: `b[rhs * n + i]`).
/// Allocation-free; intended for tiny systems inside sampling loops.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize, m: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * m);
    for col in 0..n {
        let mut piv = col;
        let mut best = math::abs(a[col * n + col]);
        for row in (col + 1)..n {
            let v = math::abs(a[row * n + col]);
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return Err(Error::RankDeficient { rank: col, expected: n });
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            for rhs in 0..m {
                b.swap(rhs * n + col, rhs * n + piv);
            }
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for j in (col + 1)..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            for rhs in 0..m {
                b[rhs * n + row] -= f * b[rhs * n + col];
            }
        }
    }
    for rhs in 0..m {
        for col in (0..n).rev() {
            let mut acc = b[rhs * n + col];
            for j in (col + 1)..n {
                acc -= a[col * n + j] * b[rhs * n + j];
            }
            b[rhs * n + col] = acc / a[col * n + col];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_split_of_projection() {
        // df = dt on R^3: kernel is the xy-plane.
        let m = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
        let (range, kernel) = domain_split(&m, RANK_REL_TOL);
        assert_eq!(range.ncols(), 1);
        assert_eq!(kernel.ncols(), 2);
        for j in 0..2 {
            assert!(math::abs(kernel[(2, j)]) < 1e-12);
        }
    }

    #[test]
    fn split_of_zero_matrix_is_identity_kernel() {
        let m = DMatrix::zeros(2, 4);
        let (range, kernel) = domain_split(&m, RANK_REL_TOL);
        assert_eq!(range.ncols(), 0);
        assert_eq!(kernel.ncols(), 4);
        let gram = kernel.transpose() * &kernel;
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let basis = DMatrix::from_column_slice(3, 1, &[0.6, 0.8, 0.0]);
        let comp = orthonormal_complement(&basis);
        assert_eq!(comp.ncols(), 2);
        let cross = basis.transpose() * &comp;
        assert!(cross.amax() < 1e-12);
        let gram = comp.transpose() * &comp;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn intersection_of_planes() {
        // span{e1,e2} ∩ span{e2,e3} = span{e2}
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(intersection_dim(&a, &b, RANK_REL_TOL), 1);
    }

    #[test]
    fn small_solver_matches_lu() {
        let mut a = [2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let mut b = [8.0, -11.0, -3.0];
        solve_in_place(&mut a, &mut b, 3, 1).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-12);
        assert!((b[1] - 3.0).abs() < 1e-12);
        assert!((b[2] - -1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_solver_reports_rank() {
        let mut a = [1.0, 2.0, 2.0, 4.0];
        let mut b = [1.0, 2.0];
        assert!(matches!(
            solve_in_place(&mut a, &mut b, 2, 1),
            Err(Error::RankDeficient { .. })
        ));
    }
}
