use rayon::prelude::*;

use super::dot;

/// Thin `A P = Q R` for `A` given as columns (m x r, m >= r).
pub(crate) struct PivotedQr {
    /// Orthonormal columns of `Q`, each of length m.
    pub q_cols: Vec<Vec<f64>>,
    /// Row-major upper triangular `R`, r x r.
    pub r: Vec<Vec<f64>>,
    /// Column `k` of `A P` is column `perm[k]` of `A`.
    pub perm: Vec<usize>,
}

fn norm_sq(v: &[f64]) -> f64 {
    dot(v, v)
}

/// Householder QR choosing the remaining column of largest norm at each step.
///
/// Norms are recomputed exactly rather than downdated: the columns are
/// strongly graded and downdating loses the small ones.
pub(crate) fn pivoted_qr(mut a: Vec<Vec<f64>>) -> PivotedQr {
    let r_count = a.len();
    let m = a.first().map_or(0, |c| c.len());
    debug_assert!(m >= r_count);
    let mut perm: Vec<usize> = (0..r_count).collect();
    let mut norms: Vec<f64> = a.iter().map(|c| norm_sq(c)).collect();
    let mut taus = vec![0.0; r_count];
    let mut diag = vec![0.0; r_count];

    for k in 0..r_count {
        let mut best = k;
        for j in k + 1..r_count {
            if norms[j] > norms[best] {
                best = j;
            }
        }
        a.swap(k, best);
        norms.swap(k, best);
        perm.swap(k, best);

        let (head, tail) = a.split_at_mut(k + 1);
        let v = &mut head[k][k..];
        let x0 = v[0];
        let nx = norm_sq(v).sqrt();
        if nx == 0.0 {
            diag[k] = 0.0;
            taus[k] = 0.0;
            continue;
        }
        let beta = if x0 >= 0.0 { -nx } else { nx };
        let tau = (beta - x0) / beta;
        let s = 1.0 / (x0 - beta);
        v[0] = 1.0;
        for e in v[1..].iter_mut() {
            *e *= s;
        }
        diag[k] = beta;
        taus[k] = tau;
        let v: &[f64] = v;

        tail.par_iter_mut().zip(norms[k + 1..].par_iter_mut()).for_each(|(col, nrm)| {
            let c = &mut col[k..];
            let w = tau * dot(v, c);
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci -= w * vi;
            }
            *nrm = norm_sq(&c[1..]);
        });
    }

    let mut r = vec![vec![0.0; r_count]; r_count];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = diag[i];
        for j in i + 1..r_count {
            row[j] = a[j][i];
        }
    }

    let a = &a;
    let taus = &taus;
    let q_cols: Vec<Vec<f64>> = (0..r_count)
        .into_par_iter()
        .map(|j| {
            let mut q = vec![0.0; m];
            q[j] = 1.0;
            for k in (0..=j).rev() {
                let v = &a[k][k..];
                let c = &mut q[k..];
                // v[0] is the implicit unit entry stored in place.
                let w = taus[k] * dot(v, c);
                for (ci, vi) in c.iter_mut().zip(v) {
                    *ci -= w * vi;
                }
            }
            q
        })
        .collect();

    PivotedQr { q_cols, r, perm }
}
