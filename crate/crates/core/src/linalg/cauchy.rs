use rayon::prelude::*;

/// `M = X diag(d) Y^T` with `X` (m x r) unit lower triangular up to a row
/// permutation and `Y^T` (r x n) unit upper triangular up to a column
/// permutation. Both factors are stored column by column.
pub(crate) struct RankRevealing {
    pub x_cols: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    pub yt_rows: Vec<Vec<f64>>,
}

struct Pivot {
    value: f64,
    row: usize,
    col: usize,
}

fn better(a: Pivot, b: Pivot) -> Pivot {
    // Deterministic tie-break so the parallel reduction is order independent.
    if b.value > a.value || (b.value == a.value && (b.col, b.row) < (a.col, a.row)) {
        b
    } else {
        a
    }
}

fn column_max(col: &[f64], from: usize, col_index: usize) -> Pivot {
    let mut p = Pivot { value: -1.0, row: from, col: col_index };
    for (i, v) in col.iter().enumerate().skip(from) {
        if v.abs() > p.value {
            p = Pivot { value: v.abs(), row: i, col: col_index };
        }
    }
    p
}

/// Gaussian elimination with complete pivoting on `scale / (y_j - x_i)`.
///
/// Every Schur complement of a Cauchy matrix is again Cauchy-like, so the
/// update is an entrywise product with exactly computed ratios of
/// differences. This keeps each entry accurate to a few ulps no matter how
/// much cancellation a plain update would suffer. Elimination stops once the
/// largest remaining unscaled entry is at most `floor`.
pub(crate) fn cauchy_rrd(xs: &[f64], ys: &[f64], scale: f64, floor: f64) -> RankRevealing {
    let m = xs.len();
    let n = ys.len();
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    let mut rp: Vec<usize> = (0..m).collect();
    let mut cp: Vec<usize> = (0..n).collect();
    let mut g: Vec<Vec<f64>> =
        (0..n).map(|j| xs.iter().map(|&x| 1.0 / (ys[j] - x)).collect()).collect();
    let mut d = Vec::new();

    let mut pivot = g
        .par_iter()
        .enumerate()
        .map(|(j, c)| column_max(c, 0, j))
        .reduce(|| Pivot { value: -1.0, row: 0, col: usize::MAX }, better);

    let steps = m.min(n);
    let mut rf = vec![0.0; m];
    for k in 0..steps {
        if !(pivot.value > floor) {
            break;
        }
        let (pi, pj) = (pivot.row, pivot.col);
        if pi != k {
            for col in g.iter_mut() {
                col.swap(k, pi);
            }
            xs.swap(k, pi);
            rp.swap(k, pi);
        }
        if pj != k {
            g.swap(k, pj);
            ys.swap(k, pj);
            cp.swap(k, pj);
        }
        let piv = g[k][k];
        d.push(scale * piv);

        // L column k below the diagonal and U row k right of it.
        for v in g[k][k + 1..].iter_mut() {
            *v /= piv;
        }
        for col in g[k + 1..].iter_mut() {
            col[k] /= piv;
        }

        let (xk, yk) = (xs[k], ys[k]);
        for i in k + 1..m {
            rf[i] = (xs[i] - xk) / (yk - xs[i]);
        }
        let rf = &rf;
        let ys_ref = &ys;
        pivot = g[k + 1..]
            .par_iter_mut()
            .enumerate()
            .map(|(off, col)| {
                let j = k + 1 + off;
                let cf = (yk - ys_ref[j]) / (ys_ref[j] - xk);
                for i in k + 1..m {
                    col[i] *= rf[i] * cf;
                }
                column_max(col, k + 1, j)
            })
            .reduce(|| Pivot { value: -1.0, row: 0, col: usize::MAX }, better);
    }

    let r = d.len();
    let mut x_cols = vec![vec![0.0; m]; r];
    for (k, xc) in x_cols.iter_mut().enumerate() {
        xc[rp[k]] = 1.0;
        for i in k + 1..m {
            xc[rp[i]] = g[k][i];
        }
    }
    let mut yt_rows = vec![vec![0.0; n]; r];
    for (k, yr) in yt_rows.iter_mut().enumerate() {
        yr[cp[k]] = 1.0;
        for j in k + 1..n {
            yr[cp[j]] = g[j][k];
        }
    }
    RankRevealing { x_cols, d, yt_rows }
}
