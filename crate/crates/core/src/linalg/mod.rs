//! Dense kernels behind the singular value decomposition.
//!
//! The operator matrix is a scaled Cauchy matrix, so its singular values can
//! be computed to high relative accuracy even far below `eps * sigma_max`:
//! a structured rank-revealing LU, a column-pivoted QR of the left factor and
//! one-sided Jacobi on what remains.

pub(crate) mod cauchy;
pub(crate) mod jacobi;
pub(crate) mod qr;

pub(crate) use cauchy::cauchy_rrd;
pub(crate) use jacobi::one_sided_jacobi;
pub(crate) use qr::pivoted_qr;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
