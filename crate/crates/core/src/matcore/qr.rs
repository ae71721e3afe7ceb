//! Householder QR for tall matrices.

use super::matrix::DenseMatrix;
use crate::error::{ensure_arg, Result};

/// Compact Householder factorization `A = H_0 H_1 ... H_{n-1} [R; 0]`.
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    /// Upper triangle holds R; the strict lower part is scratch.
    factored: DenseMatrix,
    /// Reflector `j` is `I - beta_j v_j v_jᵀ` acting on rows `j..rows`.
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl HouseholderQr {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        ensure_arg!(m >= n, "thin QR needs rows >= cols, got {m}x{n}");
        let mut work = a.clone();
        let mut reflectors = Vec::with_capacity(n);
        for j in 0..n {
            let mut v: Vec<f64> = (j..m).map(|i| work.get(i, j)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                reflectors.push((v, 0.0));
                continue;
            }
            let alpha = if v[0] > 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            apply_reflector(&mut work, j, &v, beta, j);
            // Column j below the diagonal is now zero up to rounding.
            work.set(j, j, alpha);
            for i in j + 1..m {
                work.set(i, j, 0.0);
            }
            reflectors.push((v, beta));
        }
        Ok(Self { rows: m, cols: n, factored: work, reflectors })
    }

    /// `(Q, R)` with `Q` of shape `rows x cols` and `diag(R) >= 0`.
    pub fn into_thin(self) -> (DenseMatrix, DenseMatrix) {
        let (m, n) = (self.rows, self.cols);
        let mut q = DenseMatrix::zeros(m, n);
        for i in 0..n {
            q.set(i, i, 1.0);
        }
        for j in (0..n).rev() {
            let (v, beta) = &self.reflectors[j];
            apply_reflector(&mut q, j, v, *beta, j);
        }
        let mut r = DenseMatrix::zeros(n, n);
        for i in 0..n {
            r.row_mut(i)[i..].copy_from_slice(&self.factored.row(i)[i..n]);
        }
        for i in 0..n {
            if r.get(i, i) < 0.0 {
                r.row_mut(i).iter_mut().for_each(|x| *x = -*x);
                for row in 0..m {
                    let x = q.get(row, i);
                    q.set(row, i, -x);
                }
            }
        }
        (q, r)
    }

    /// Orthonormal basis of the orthogonal complement of `range(Q)`:
    /// the trailing `rows - cols` columns of the full Householder Q.
    pub fn complement(&self) -> DenseMatrix {
        let (m, n) = (self.rows, self.cols);
        let mut out = DenseMatrix::zeros(m, m - n);
        for c in 0..m - n {
            out.set(n + c, c, 1.0);
        }
        for j in (0..n).rev() {
            let (v, beta) = &self.reflectors[j];
            apply_reflector(&mut out, j, v, *beta, 0);
        }
        out
    }
}

/// Applies `I - beta v vᵀ` to rows `offset..` and columns `col_start..` of `mat`.
fn apply_reflector(mat: &mut DenseMatrix, offset: usize, v: &[f64], beta: f64, col_start: usize) {
    if beta == 0.0 {
        return;
    }
    let cols = mat.ncols();
    if col_start >= cols {
        return;
    }
    let mut w = vec![0.0; cols - col_start];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        let row = &mat.row(offset + i)[col_start..];
        for (wc, &x) in w.iter_mut().zip(row) {
            *wc += vi * x;
        }
    }
    for (i, &vi) in v.iter().enumerate() {
        let scale = beta * vi;
        if scale == 0.0 {
            continue;
        }
        let row = &mut mat.row_mut(offset + i)[col_start..];
        for (x, &wc) in row.iter_mut().zip(&w) {
            *x -= scale * wc;
        }
    }
}

/// Thin QR with nonnegative diagonal in `R`. Requires `rows >= cols`.
pub fn thin_qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    Ok(HouseholderQr::new(a)?.into_thin())
}

/// Orthonormal basis of `range(basis)^⊥` for a tall orthonormal-column `basis`.
pub fn orthogonal_complement(basis: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(HouseholderQr::new(basis)?.complement())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::random::{gaussian_map, RandomStream};

    fn assert_qr_contract(a: &DenseMatrix, tol: f64) {
        let (q, r) = thin_qr(a).unwrap();
        assert_eq!(q.shape(), a.shape());
        assert!(q.orthonormality_defect() <= tol, "QᵀQ defect {}", q.orthonormality_defect());
        let resid = q.matmul(&r).unwrap().sub(a).unwrap().frobenius_norm();
        assert!(resid <= tol * a.frobenius_norm(), "reconstruction {resid}");
        for i in 0..r.nrows() {
            assert!(r.get(i, i) >= 0.0);
            for j in 0..i {
                assert_eq!(r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn identity_factors_trivially() {
        let (q, r) = thin_qr(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(q, DenseMatrix::identity(4));
        assert_eq!(r, DenseMatrix::identity(4));
    }

    #[test]
    fn single_column() {
        let (q, r) = thin_qr(&DenseMatrix::column_vector(&[3.0, 4.0])).unwrap();
        assert!((q.get(0, 0) - 0.6).abs() < 1e-15 && (q.get(1, 0) - 0.8).abs() < 1e-15);
        assert!((r.get(0, 0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn random_tall_matrix() {
        let a = gaussian_map(20, 6, RandomStream::new(5, 5)).unwrap();
        assert_qr_contract(&a, 1e-12);
    }

    #[test]
    fn rank_deficient_and_wide() {
        let mut a = gaussian_map(10, 4, RandomStream::new(6, 0)).unwrap();
        for i in 0..10 {
            let v = a.get(i, 0) * 2.0;
            a.set(i, 2, v);
            a.set(i, 3, 0.0);
        }
        let (q, r) = thin_qr(&a).unwrap();
        let resid = q.matmul(&r).unwrap().sub(&a).unwrap().frobenius_norm();
        assert!(resid <= 1e-12 * a.frobenius_norm());
        assert!(thin_qr(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn complement_spans_the_rest() {
        let a = gaussian_map(9, 3, RandomStream::new(8, 0)).unwrap();
        let (q, _) = thin_qr(&a).unwrap();
        let qc = orthogonal_complement(&q).unwrap();
        assert_eq!(qc.shape(), (9, 6));
        let full = q.hstack(&qc).unwrap();
        assert!(full.orthonormality_defect() < 1e-13);
    }
}
