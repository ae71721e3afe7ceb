//! Singular value decomposition and the Moore–Penrose pseudo-inverse.
//!
//! Tall inputs are reduced by Householder QR, then the square triangular
//! factor is diagonalized with one-sided (Hestenes) Jacobi rotations. Jacobi
//! gives singular values to high relative accuracy, which the exact-rank and
//! Eckart–Young checks in this crate depend on.

use super::matrix::DenseMatrix;
use super::qr::thin_qr;
use crate::error::{ensure_arg, Result};

const MAX_SWEEPS: usize = 80;

/// `A = U diag(sigma) Vᵀ` with `sigma` nonincreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.scale_columns(&self.sigma).matmul_t(&self.v).expect("factor shapes agree by construction")
    }

    /// Keeps the leading `r` triplets.
    pub fn truncated(&self, r: usize) -> Svd {
        Svd { u: self.u.columns(0..r), sigma: self.sigma[..r].to_vec(), v: self.v.columns(0..r) }
    }
}

/// Thin SVD of `a`; with `rank = Some(r)` only the leading `r` triplets are kept.
pub fn svd(a: &DenseMatrix, rank: Option<usize>) -> Result<Svd> {
    let p = a.nrows().min(a.ncols());
    if let Some(r) = rank {
        ensure_arg!(r <= p, "requested rank {r} exceeds min(rows, cols) = {p}");
    }
    let full = if a.nrows() >= a.ncols() {
        tall_svd(a)?
    } else {
        let t = tall_svd(&a.transpose())?;
        Svd { u: t.v, sigma: t.sigma, v: t.u }
    };
    Ok(match rank {
        Some(r) if r < p => full.truncated(r),
        _ => full,
    })
}

fn tall_svd(a: &DenseMatrix) -> Result<Svd> {
    let (q, r) = thin_qr(a)?;
    let (ur, sigma, v) = jacobi_square(&r);
    let u = q.matmul(&ur)?;
    Ok(Svd { u, sigma, v })
}

/// One-sided Jacobi on a square matrix. Rows of `g` are the columns of the
/// input, so every rotation touches two contiguous rows.
fn jacobi_square(r: &DenseMatrix) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
    let n = r.nrows();
    let mut g = r.transpose();
    let mut vt = DenseMatrix::identity(n);
    let tol = f64::EPSILON * n as f64;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (rp, rq) = two_rows(&mut g, p, q);
                    dot3(rp, rq)
                };
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                {
                    let (rp, rq) = two_rows(&mut g, p, q);
                    rotate(rp, rq, c, s);
                }
                let (vp, vq) = two_rows(&mut vt, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| norm(g.row(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &j in &order {
        let s = norms[j];
        let candidate: Vec<f64> = if s > 0.0 { g.row(j).iter().map(|x| x / s).collect() } else { vec![0.0; n] };
        u_cols.push(orthonormalize_against(candidate, &u_cols));
    }
    let ur = DenseMatrix::from_fn(n, n, |i, j| u_cols[j][i]);
    let v = DenseMatrix::from_fn(n, n, |i, j| vt.get(order[j], i));
    (ur, sigma, v)
}

fn two_rows(m: &mut DenseMatrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let cols = m.ncols();
    let (head, tail) = m.as_mut_slice().split_at_mut(q * cols);
    (&mut head[p * cols..(p + 1) * cols], &mut tail[..cols])
}

fn dot3(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mut aa = [0.0; 4];
    let mut bb = [0.0; 4];
    let mut ab = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            aa[l] += x[l] * x[l];
            bb[l] += y[l] * y[l];
            ab[l] += x[l] * y[l];
        }
    }
    let mut s = (aa.iter().sum::<f64>(), bb.iter().sum::<f64>(), ab.iter().sum::<f64>());
    for (x, y) in ra.iter().zip(rb) {
        s.0 += x * x;
        s.1 += y * y;
        s.2 += x * y;
    }
    s
}

fn rotate(p: &mut [f64], q: &mut [f64], c: f64, s: f64) {
    for (x, y) in p.iter_mut().zip(q.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Two passes of Gram–Schmidt against `basis`. If the candidate collapses
/// (zero or rounding-level singular value), the standard basis vector with
/// the largest residual takes its place.
fn orthonormalize_against(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Vec<f64> {
    let project_out = |v: &mut Vec<f64>| {
        for _ in 0..2 {
            for b in basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
    };
    project_out(&mut v);
    let nv = norm(&v);
    if nv > 0.5 {
        v.iter_mut().for_each(|x| *x /= nv);
        return v;
    }
    let n = v.len();
    let mut best = (0.0, vec![0.0; n]);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        project_out(&mut e);
        let ne = norm(&e);
        if ne > best.0 {
            best = (ne, e);
        }
        if ne > 0.7 {
            break;
        }
    }
    let (ne, mut e) = best;
    e.iter_mut().for_each(|x| *x /= ne);
    e
}

/// Default relative cutoff `max(rows, cols) * eps`.
pub fn default_pinv_tolerance(a: &DenseMatrix) -> f64 {
    a.nrows().max(a.ncols()) as f64 * f64::EPSILON
}

/// Moore–Penrose pseudo-inverse. Singular values at or below
/// `tol * sigma_max` are treated as zero; `None` uses the default cutoff.
pub fn pseudo_inverse(a: &DenseMatrix, tol: Option<f64>) -> Result<DenseMatrix> {
    Ok(pseudo_inverse_with_rank(a, tol)?.0)
}

/// Pseudo-inverse together with the numerical rank it kept.
pub fn pseudo_inverse_with_rank(a: &DenseMatrix, tol: Option<f64>) -> Result<(DenseMatrix, usize)> {
    let tol = tol.unwrap_or_else(|| default_pinv_tolerance(a));
    ensure_arg!(tol >= 0.0 && tol.is_finite(), "pseudo-inverse tolerance must be finite and >= 0");
    let dec = svd(a, None)?;
    let smax = dec.sigma.first().copied().unwrap_or(0.0);
    let rank = dec.sigma.iter().take_while(|&&s| s > tol * smax && s > 0.0).count();
    if rank == 0 {
        return Ok((DenseMatrix::zeros(a.ncols(), a.nrows()), 0));
    }
    let inv: Vec<f64> = dec.sigma[..rank].iter().map(|s| 1.0 / s).collect();
    let vr = dec.v.columns(0..rank).scale_columns(&inv);
    let pinv = vr.matmul_t(&dec.u.columns(0..rank))?;
    Ok((pinv, rank))
}
