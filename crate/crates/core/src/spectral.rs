//! Singular system of the discrete operator, index conventions, ROI norms,
//! decay fits and monotonicity checks.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, RoiParam};
use crate::linalg::{cauchy_rrd, dot, one_sided_jacobi, pivoted_qr};
use crate::operator::{weighted_norm, DiscreteOperator, SampledGrid};

/// Default relative rank threshold, `sigma > DEFAULT_RANK_TOL * sigma_max`.
pub const DEFAULT_RANK_TOL: f64 = 1e-20;
/// Number of smallest retained triples mapped to `n = 1, 2, ...`.
pub const DEFAULT_TAIL_LEN: usize = 9;
pub const DEFAULT_HEAD_LEN: usize = 6;

/// Singular pair with `M u = sigma v`; `u` on the object grid, `v` on the data grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SingularSystem {
    pub triples: Vec<Triple>,
    pub object_grid: SampledGrid,
    pub data_grid: SampledGrid,
    pub step: f64,
    pub geometry: Geometry,
    pub tail_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub amplitude: f64,
    pub rate: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub index_anchor: i64,
}

/// A tail triple: asymptotic index `n` and 0-based position in the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailEntry {
    pub n: i64,
    pub index: usize,
}

impl SingularSystem {
    /// Assembles a system from precomputed triples (sorted descending, vectors
    /// normalized in the step-weighted norm).
    pub fn from_parts(
        triples: Vec<Triple>,
        object_grid: SampledGrid,
        data_grid: SampledGrid,
        geometry: Geometry,
    ) -> Result<Self> {
        for t in &triples {
            if t.u.len() != object_grid.count {
                return Err(Error::DimensionMismatch { expected: object_grid.count, got: t.u.len() });
            }
            if t.v.len() != data_grid.count {
                return Err(Error::DimensionMismatch { expected: data_grid.count, got: t.v.len() });
            }
        }
        if triples.windows(2).any(|w| w[1].sigma > w[0].sigma) {
            return Err(Error::InvalidArgument("singular values must be sorted descending".into()));
        }
        let tail_len = DEFAULT_TAIL_LEN.min(triples.len());
        Ok(Self { triples, object_grid, data_grid, step: object_grid.step, geometry, tail_len })
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.triples.iter().map(|t| t.sigma).collect()
    }

    pub fn with_tail_len(mut self, tail_len: usize) -> Result<Self> {
        check_tail_len(self.len(), tail_len)?;
        self.tail_len = tail_len;
        Ok(self)
    }

    /// Asymptotic index of the 0-based triple `k`: `n = 1` sits `tail_len`
    /// places from the end, the accumulation point 1 is at `n -> -inf`.
    pub fn asymptotic_index(&self, k: usize) -> i64 {
        k as i64 + 1 - (self.len() as i64 - self.tail_len as i64)
    }

    /// Position of asymptotic index `n`, if it is within the system.
    pub fn position_of(&self, n: i64) -> Option<usize> {
        let k = n - 1 + (self.len() as i64 - self.tail_len as i64);
        (k >= 0 && (k as usize) < self.len()).then_some(k as usize)
    }

    pub fn count_below(&self, threshold: f64) -> usize {
        self.triples.iter().filter(|t| t.sigma < threshold).count()
    }

    /// Largest step-weighted residual `||M u - sigma v||` over all triples.
    pub fn max_residual(&self, op: &DiscreteOperator) -> f64 {
        self.triples
            .par_iter()
            .map(|t| {
                let mu = &op.matrix * nalgebra::DVector::from_column_slice(&t.u);
                let r: Vec<f64> = mu.iter().zip(&t.v).map(|(a, b)| a - t.sigma * b).collect();
                weighted_norm(&r, self.step)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Largest entry of `|G - I|` over the Gram matrices of `{u}` and `{v}`.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut worst: f64 = 0.0;
                for j in i..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    let gu = self.step * dot(&self.triples[i].u, &self.triples[j].u);
                    let gv = self.step * dot(&self.triples[i].v, &self.triples[j].v);
                    worst = worst.max((gu - id).abs()).max((gv - id).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }
}

fn check_tail_len(len: usize, tail_len: usize) -> Result<()> {
    if tail_len == 0 || tail_len > len {
        return Err(Error::InvalidArgument(format!(
            "tail length {tail_len} must lie in 1..={len}"
        )));
    }
    Ok(())
}

fn sign_anchor(u: &[f64], range: std::ops::Range<usize>) -> Option<usize> {
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 64.0 * f64::EPSILON * peak;
    range.into_iter().find(|&k| u[k].abs() > floor)
}

/// Singular system of `op` with every triple whose `sigma` exceeds
/// `rank_tol * sigma_max`.
///
/// The kernel `step / (pi (y_j - x_i))` is a Cauchy matrix; the decomposition
/// goes through a structured rank-revealing factorization and therefore
/// resolves singular values far below `eps * sigma_max` with small relative
/// error. Vectors are normalized in the step-weighted norm and `u` is made
/// positive at its first resolved sample in `(a2, a3)`.
pub fn compute_svd(op: &DiscreteOperator, rank_tol: f64) -> Result<SingularSystem> {
    if !(rank_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("rank_tol must be >= 0, got {rank_tol}")));
    }
    let xs = op.data_grid.points();
    let ys = op.object_grid.points();
    let (m, n) = (xs.len(), ys.len());
    let max_entry = op.matrix.iter().fold(0.0f64, |a, v| a.max(v.abs())) * PI / op.step;
    let floor = (rank_tol * f64::EPSILON / ((m * n) as f64).sqrt()).max(1e-140) * max_entry;
    let rrd = cauchy_rrd(&xs, &ys, op.step / PI, floor);
    let r = rrd.d.len();
    let mut triples = Vec::new();
    if r > 0 {
        let xd: Vec<Vec<f64>> = rrd
            .x_cols
            .iter()
            .zip(&rrd.d)
            .map(|(c, d)| c.iter().map(|v| v * d).collect())
            .collect();
        let qr = pivoted_qr(xd);
        let wt: Vec<Vec<f64>> = (0..r)
            .into_par_iter()
            .map(|k| {
                let mut col = vec![0.0; n];
                for l in k..r {
                    let c = qr.r[k][l];
                    for (o, y) in col.iter_mut().zip(&rrd.yt_rows[qr.perm[l]]) {
                        *o += c * y;
                    }
                }
                col
            })
            .collect();
        let jac = one_sided_jacobi(wt)?;
        let w = op.step.sqrt();
        triples = (0..r)
            .into_par_iter()
            .filter(|&k| jac.sigma[k] > 0.0)
            .map(|k| {
                let u: Vec<f64> = jac.left[k].iter().map(|x| x / w).collect();
                let mut v = vec![0.0; m];
                for (qc, c) in qr.q_cols.iter().zip(&jac.right[k]) {
                    for (o, q) in v.iter_mut().zip(qc) {
                        *o += c * q;
                    }
                }
                v.iter_mut().for_each(|x| *x /= w);
                Triple { sigma: jac.sigma[k], u, v }
            })
            .collect();
    }

    let g = op.geometry;
    let overlap = op.object_grid.indices_within(g.a2, g.a3);
    for t in triples.iter_mut() {
        if let Some(k) = sign_anchor(&t.u, overlap.clone()) {
            if t.u[k] < 0.0 {
                t.u.iter_mut().for_each(|x| *x = -*x);
                t.v.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }

    let mut sys = SingularSystem::from_parts(triples, op.object_grid, op.data_grid, g)?;
    let rel = reconstruction_error(op, &sys);
    if !(rel <= 1e-10) {
        return Err(Error::Decomposition(format!("reconstruction error {rel:e} too large")));
    }
    let smax = sys.triples.first().map_or(0.0, |t| t.sigma);
    sys.triples.retain(|t| t.sigma > rank_tol * smax);
    sys.tail_len = DEFAULT_TAIL_LEN.min(sys.len());
    Ok(sys)
}

/// `||M - sum sigma v u^T||_F / ||M||_F` in the Euclidean matrix norm.
pub fn reconstruction_error(op: &DiscreteOperator, sys: &SingularSystem) -> f64 {
    let norm = op.matrix.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let r = sys.len();
    if r == 0 {
        return 1.0;
    }
    let vs = DMatrix::from_fn(op.rows(), r, |i, k| sys.triples[k].v[i] * sys.triples[k].sigma);
    let us = DMatrix::from_fn(op.cols(), r, |j, k| sys.triples[k].u[j]);
    let approx = vs * us.transpose() * sys.step;
    (&op.matrix - approx).norm() / norm
}

/// Plain one-sided Jacobi SVD of an arbitrary matrix, Euclidean-normalized.
/// `u` has the column dimension, `v` the row dimension.
pub fn dense_svd(matrix: &DMatrix<f64>, rank_tol: f64) -> Result<Vec<Triple>> {
    if !(rank_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("rank_tol must be >= 0, got {rank_tol}")));
    }
    let cols: Vec<Vec<f64>> = matrix.column_iter().map(|c| c.iter().copied().collect()).collect();
    let jac = one_sided_jacobi(cols)?;
    let smax = jac.sigma.first().copied().unwrap_or(0.0);
    Ok(jac
        .sigma
        .iter()
        .zip(jac.left)
        .zip(jac.right)
        .take_while(|((&s, _), _)| s > 0.0 && s > rank_tol * smax)
        .map(|((&sigma, v), u)| Triple { sigma, u, v })
        .collect())
}

pub fn tail_index_map(sys: &SingularSystem, tail_len: usize) -> Result<Vec<TailEntry>> {
    check_tail_len(sys.len(), tail_len)?;
    let start = sys.len() - tail_len;
    Ok((0..tail_len).map(|i| TailEntry { n: i as i64 + 1, index: start + i }).collect())
}

/// Least squares of `ln y` against `n`.
pub fn fit_exponential(points: &[(i64, f64)]) -> Result<TailFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points for a fit, got {}",
            points.len()
        )));
    }
    if let Some(&(n, y)) = points.iter().find(|(_, y)| !(*y > 0.0)) {
        return Err(Error::InvalidArgument(format!("non-positive value {y} at n = {n}")));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit abscissae are all equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1.ln() - intercept - slope * p.0 as f64).powi(2)).sum();
    Ok(TailFit {
        amplitude: intercept.exp(),
        rate: -slope,
        residual: (ss / k).sqrt(),
        index_anchor: points[0].0,
    })
}

/// Step-weighted norm of `values` restricted to object samples in `(a2, a3 - mu)`.
pub fn roi_restricted_norm(
    grid: &SampledGrid,
    geom: &Geometry,
    values: &[f64],
    mu: RoiParam,
) -> Result<f64> {
    mu.check(geom)?;
    if values.len() != grid.count {
        return Err(Error::DimensionMismatch { expected: grid.count, got: values.len() });
    }
    let hi = mu.roi_end(geom);
    let range = grid.indices_within(geom.a2, hi);
    if range.is_empty() {
        return Err(Error::EmptyRoi { lo: geom.a2, hi });
    }
    Ok(weighted_norm(&values[range], grid.step))
}

/// `||chi_mu u_k||` for the 0-based triple `k`.
pub fn roi_norm(sys: &SingularSystem, k: usize, mu: RoiParam) -> Result<f64> {
    let t = sys
        .triples
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("triple {k} out of range")))?;
    roi_restricted_norm(&sys.object_grid, &sys.geometry, &t.u, mu)
}

/// Fit of `sigma_n ~ A exp(-rate n)` over the tail; the anchor is the
/// 1-based discrete index of `n = 1`.
pub fn sigma_tail_fit(sys: &SingularSystem) -> Result<TailFit> {
    let tail = tail_index_map(sys, sys.tail_len)?;
    let pts: Vec<(i64, f64)> = tail.iter().map(|e| (e.n, sys.triples[e.index].sigma)).collect();
    let mut fit = fit_exponential(&pts)?;
    fit.index_anchor = tail[0].index as i64 + 1;
    Ok(fit)
}

/// Fit of the ROI norms over the tail against `(n pi)^{-1/2} B exp(-rate n)`:
/// the algebraic prefactor is divided out before the log-linear fit, so
/// `rate` estimates `beta_mu` and `amplitude` estimates `B`.
pub fn roi_norm_tail_fit(sys: &SingularSystem, mu: RoiParam) -> Result<TailFit> {
    let tail = tail_index_map(sys, sys.tail_len)?;
    let mut pts = Vec::with_capacity(tail.len());
    for e in &tail {
        let r = roi_norm(sys, e.index, mu)?;
        pts.push((e.n, r * (e.n as f64 * PI).sqrt()));
    }
    let mut fit = fit_exponential(&pts)?;
    fit.index_anchor = tail[0].index as i64 + 1;
    Ok(fit)
}

/// Fit of `1 - sigma` against `|n|` for `n = -1, ..., -head_len`, the triples
/// just above the tail anchor.
pub fn near_one_tail_fit(sys: &SingularSystem, head_len: usize) -> Result<TailFit> {
    if head_len < 2 {
        return Err(Error::InvalidArgument(format!("head_len must be >= 2, got {head_len}")));
    }
    let mut pts = Vec::with_capacity(head_len);
    for n in 1..=head_len as i64 {
        let k = sys.position_of(-n).ok_or_else(|| {
            Error::InvalidArgument(format!("no triple with asymptotic index {}", -n))
        })?;
        let s = sys.triples[k].sigma;
        if s >= 1.0 {
            return Err(Error::InvalidArgument(format!("sigma {s} >= 1 at n = {}", -n)));
        }
        pts.push((n, 1.0 - s));
    }
    let mut fit = fit_exponential(&pts)?;
    fit.index_anchor = -1;
    Ok(fit)
}

/// True iff the samples of `values` inside `(a2, a3)` are strictly increasing
/// once the vector is oriented to be positive at its first resolved sample.
pub fn is_monotone_on_overlap(grid: &SampledGrid, geom: &Geometry, values: &[f64]) -> bool {
    let range = grid.indices_within(geom.a2, geom.a3);
    let Some(anchor) = sign_anchor(values, range.clone()) else {
        return false;
    };
    let s = values[anchor].signum();
    let seg = &values[range];
    seg.len() >= 2 && seg.windows(2).all(|w| s * w[1] > s * w[0])
}

pub fn check_monotone(sys: &SingularSystem, k: usize) -> bool {
    sys.triples
        .get(k)
        .is_some_and(|t| is_monotone_on_overlap(&sys.object_grid, &sys.geometry, &t.u))
}

/// `n_discrete,n_asymptotic,sigma,roi_norm_mu{mu}...`, one row per triple.
pub fn write_spectrum_csv<W: Write>(
    sys: &SingularSystem,
    mus: &[RoiParam],
    mut out: W,
) -> Result<()> {
    let mut header = String::from("n_discrete,n_asymptotic,sigma");
    for mu in mus {
        header.push_str(&format!(",roi_norm_mu{}", mu.mu()));
    }
    let io = |e: std::io::Error| Error::InvalidArgument(format!("write failed: {e}"));
    writeln!(out, "{header}").map_err(io)?;
    for k in 0..sys.len() {
        let mut line = format!("{},{},{:.17e}", k + 1, sys.asymptotic_index(k), sys.triples[k].sigma);
        for mu in mus {
            line.push_str(&format!(",{:.17e}", roi_norm(sys, k, *mu)?));
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::build_operator;

    fn small_op() -> DiscreteOperator {
        build_operator(&Geometry::new(0.0, 2.0, 6.0, 8.0).unwrap(), 1.0, 0.5).unwrap()
    }

    fn synthetic(sigmas: &[f64]) -> SingularSystem {
        let g = Geometry::new(0.0, 2.0, 6.0, 8.0).unwrap();
        let og = SampledGrid::new(1.5, 1.0, 7).unwrap();
        let dg = SampledGrid::new(0.0, 1.0, 7).unwrap();
        let triples = sigmas
            .iter()
            .map(|&s| Triple { sigma: s, u: vec![0.0; 7], v: vec![0.0; 7] })
            .collect();
        SingularSystem::from_parts(triples, og, dg, g).unwrap()
    }

    #[test]
    fn small_system_is_consistent() {
        let op = small_op();
        let sys = compute_svd(&op, 0.0).unwrap();
        assert_eq!(sys.len(), 7);
        assert!(sys.max_residual(&op) < 1e-13);
        assert!(sys.gram_deviation() < 1e-13);
        assert!(reconstruction_error(&op, &sys) < 1e-14);
        for w in sys.sigmas().windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn matches_eigenvalues_of_normal_matrix() {
        let op = small_op();
        let sys = compute_svd(&op, 0.0).unwrap();
        let ata = op.matrix.transpose() * &op.matrix;
        let mut ev: Vec<f64> = ata.symmetric_eigen().eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        for (s, e) in sys.sigmas().iter().zip(&ev) {
            assert!((s - e).abs() < 1e-10, "{s} vs {e}");
        }
    }

    #[test]
    fn agrees_with_dense_path() {
        let op = small_op();
        let sys = compute_svd(&op, 0.0).unwrap();
        let dense = dense_svd(&op.matrix, 0.0).unwrap();
        for (a, b) in sys.triples.iter().zip(&dense) {
            assert!((a.sigma - b.sigma).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_has_no_triples() {
        assert!(dense_svd(&DMatrix::zeros(5, 4), 0.0).unwrap().is_empty());
    }

    #[test]
    fn sign_convention() {
        let op = small_op();
        let sys = compute_svd(&op, 0.0).unwrap();
        let first = op.object_grid.indices_within(2.0, 6.0).start;
        for t in &sys.triples {
            assert!(t.u[first] > 0.0);
        }
    }

    #[test]
    fn rank_tol_filters_relative_to_the_largest() {
        let op = small_op();
        let all = compute_svd(&op, 0.0).unwrap();
        let some = compute_svd(&op, 1e-3).unwrap();
        let smax = all.triples[0].sigma;
        assert_eq!(some.len(), all.sigmas().iter().filter(|&&s| s > 1e-3 * smax).count());
        assert!(compute_svd(&op, 2.0).unwrap().is_empty());
        assert!(compute_svd(&op, -1.0).is_err());
    }

    #[test]
    fn tail_map() {
        let sys = synthetic(&[0.9, 0.5, 0.1, 0.01]);
        let m = tail_index_map(&sys, 1).unwrap();
        assert_eq!(m, vec![TailEntry { n: 1, index: 3 }]);
        let m = tail_index_map(&sys, 3).unwrap();
        assert_eq!(m.iter().map(|e| e.index).collect::<Vec<_>>(), vec![1, 2, 3]);
        for w in m.windows(2) {
            assert!(sys.triples[w[1].index].sigma < sys.triples[w[0].index].sigma);
        }
        assert!(tail_index_map(&sys, 5).is_err());
        let sys = sys.with_tail_len(2).unwrap();
        assert_eq!(sys.asymptotic_index(0), -1);
        assert_eq!(sys.asymptotic_index(2), 1);
        assert_eq!(sys.position_of(0), Some(1));
        assert_eq!(sys.position_of(-1), Some(0));
        assert_eq!(sys.position_of(-2), None);
    }

    #[test]
    fn exponential_fit_exact_model() {
        let pts: Vec<(i64, f64)> = (1..=9).map(|n| (n, 3.0 * (-2.0 * n as f64).exp())).collect();
        let f = fit_exponential(&pts).unwrap();
        assert!((f.amplitude - 3.0).abs() < 1e-12);
        assert!((f.rate - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        let f = fit_exponential(&[(1, 0.5), (3, 0.1)]).unwrap();
        assert!(f.residual < 1e-15);
        assert!((f.amplitude * (-f.rate).exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_fit_errors() {
        assert!(fit_exponential(&[(1, 1.0)]).is_err());
        assert!(fit_exponential(&[(1, 1.0), (2, 0.0)]).is_err());
        assert!(fit_exponential(&[(1, 1.0), (2, -1.0)]).is_err());
    }

    #[test]
    fn near_one_fit_on_exact_model() {
        // n = -4..-1, then n = 0 and the single tail triple n = 1
        let mut s: Vec<f64> = (1..=4).rev().map(|n| 1.0 - 2.0 * (-4.0 * n as f64).exp()).collect();
        s.extend([0.5, 0.3]);
        let sys = synthetic(&s).with_tail_len(1).unwrap();
        let f = near_one_tail_fit(&sys, 4).unwrap();
        assert!((f.rate - 4.0).abs() < 1e-9, "{}", f.rate);
        assert!((f.amplitude - 2.0).abs() < 1e-8);
        let f2 = near_one_tail_fit(&sys, 2).unwrap();
        assert!(f2.residual < 1e-12);
        assert!(near_one_tail_fit(&sys, 1).is_err());
        assert!(near_one_tail_fit(&sys, 5).is_err());
        let bad = synthetic(&[1.0, 0.9, 0.5, 0.1]).with_tail_len(1).unwrap();
        assert!(near_one_tail_fit(&bad, 2).is_err());
    }

    #[test]
    fn roi_norm_masks() {
        let g = Geometry::new(0.0, 2.0, 6.0, 8.0).unwrap();
        let og = SampledGrid::new(1.5, 1.0, 7).unwrap();
        let mu = RoiParam::new(&g, 1.0).unwrap();
        // samples at 2.5, 3.5, 4.5 lie in (2, 5)
        let v = [9.0, 1.0, 1.0, 1.0, 9.0, 9.0, 9.0];
        assert!((roi_restricted_norm(&og, &g, &v, mu).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        let outside = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        assert_eq!(roi_restricted_norm(&og, &g, &outside, mu).unwrap(), 0.0);
        let narrow = RoiParam::new(&g, 3.6).unwrap();
        assert!(matches!(roi_restricted_norm(&og, &g, &v, narrow), Err(Error::EmptyRoi { .. })));
    }

    #[test]
    fn roi_norm_of_unit_vectors_is_at_most_one() {
        let op = small_op();
        let sys = compute_svd(&op, 0.0).unwrap();
        let mu = RoiParam::new(&sys.geometry, 3.4).unwrap();
        for k in 0..sys.len() {
            assert!(roi_norm(&sys, k, mu).unwrap() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn monotone_checks() {
        let g = Geometry::new(0.0, 2.0, 6.0, 8.0).unwrap();
        let og = SampledGrid::new(1.5, 1.0, 7).unwrap();
        assert!(!is_monotone_on_overlap(&og, &g, &[1.0; 7]));
        assert!(is_monotone_on_overlap(&og, &g, &[0.0, 1.0, 2.0, 3.0, 4.0, -1.0, 0.0]));
        assert!(is_monotone_on_overlap(&og, &g, &[0.0, -1.0, -2.0, -3.0, -4.0, 5.0, 0.0]));
        assert!(!is_monotone_on_overlap(&og, &g, &[0.0, 1.0, 2.0, 1.5, 4.0, 0.0, 0.0]));
    }

    #[test]
    fn spectrum_csv_layout() {
        let op = small_op();
        let sys = compute_svd(&op, 0.0).unwrap().with_tail_len(3).unwrap();
        let mu = RoiParam::new(&sys.geometry, 1.0).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&sys, &[mu], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n_discrete,n_asymptotic,sigma,roi_norm_mu1");
        assert!(lines.next().unwrap().starts_with("1,-3,"));
        assert_eq!(text.lines().count(), 8);
    }
}
