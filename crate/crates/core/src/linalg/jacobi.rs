use rayon::prelude::*;

use super::dot;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Output of one-sided Jacobi on the columns of `B` (length p each, q of
/// them): `B V = [sigma_k * left_k]`, sorted by descending `sigma`.
pub(crate) struct JacobiSvd {
    pub sigma: Vec<f64>,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
}

struct Column {
    w: Vec<f64>,
    v: Vec<f64>,
    norm_sq: f64,
}

/// Orthogonalizes one pair; returns whether a rotation was applied.
fn rotate(p: &mut Column, q: &mut Column, tol: f64) -> bool {
    let a = p.norm_sq;
    let b = q.norm_sq;
    if a == 0.0 || b == 0.0 {
        return false;
    }
    let c = dot(&p.w, &q.w);
    if c.abs() <= tol * (a.sqrt() * b.sqrt()) {
        return false;
    }
    let zeta = (b - a) / (2.0 * c);
    let t = if zeta.abs() > 1e150 {
        0.5 / zeta
    } else if zeta == 0.0 {
        1.0
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = cs * t;
    let (mut na, mut nb) = (0.0, 0.0);
    for (x, y) in p.w.iter_mut().zip(q.w.iter_mut()) {
        let (xp, yp) = (cs * *x - sn * *y, sn * *x + cs * *y);
        *x = xp;
        *y = yp;
        na += xp * xp;
        nb += yp * yp;
    }
    p.norm_sq = na;
    q.norm_sq = nb;
    for (x, y) in p.v.iter_mut().zip(q.v.iter_mut()) {
        let (xp, yp) = (cs * *x - sn * *y, sn * *x + cs * *y);
        *x = xp;
        *y = yp;
    }
    true
}

/// Hestenes one-sided Jacobi with a round-robin pairing, so that all pairs
/// of a round are disjoint and can be rotated in parallel. The schedule is
/// fixed, hence the result does not depend on the thread count.
pub(crate) fn one_sided_jacobi(cols: Vec<Vec<f64>>) -> Result<JacobiSvd> {
    let q = cols.len();
    let p = cols.first().map_or(0, |c| c.len());
    let tol = f64::EPSILON * (p.max(1) as f64).sqrt();
    let mut slots: Vec<Option<Column>> = cols
        .into_iter()
        .enumerate()
        .map(|(k, w)| {
            let mut v = vec![0.0; q];
            v[k] = 1.0;
            let norm_sq = dot(&w, &w);
            Some(Column { w, v, norm_sq })
        })
        .collect();

    let size = q + q % 2;
    let mut order: Vec<usize> = (0..size).collect();
    let mut converged = q < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Decomposition(format!(
                "one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        let mut rotated = 0usize;
        for _ in 0..size - 1 {
            let mut pairs: Vec<(usize, usize, Column, Column)> = (0..size / 2)
                .filter_map(|i| {
                    let (x, y) = (order[i], order[size - 1 - i]);
                    if x >= q || y >= q {
                        return None;
                    }
                    let (lo, hi) = (x.min(y), x.max(y));
                    Some((lo, hi, slots[lo].take().unwrap(), slots[hi].take().unwrap()))
                })
                .collect();
            rotated += pairs
                .par_iter_mut()
                .map(|(_, _, a, b)| usize::from(rotate(a, b, tol)))
                .sum::<usize>();
            for (lo, hi, a, b) in pairs {
                slots[lo] = Some(a);
                slots[hi] = Some(b);
            }
            let last = order.pop().unwrap();
            order.insert(1, last);
        }
        converged = rotated == 0;
    }

    let mut out: Vec<(f64, Vec<f64>, Vec<f64>)> = slots
        .into_iter()
        .map(|c| {
            let c = c.unwrap();
            let s = dot(&c.w, &c.w).sqrt();
            let left = if s > 0.0 { c.w.iter().map(|x| x / s).collect() } else { c.w };
            (s, left, c.v)
        })
        .collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut svd = JacobiSvd { sigma: Vec::new(), left: Vec::new(), right: Vec::new() };
    for (s, l, r) in out {
        svd.sigma.push(s);
        svd.left.push(l);
        svd.right.push(r);
    }
    Ok(svd)
}
