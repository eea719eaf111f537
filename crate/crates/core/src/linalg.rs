//! Thin wrappers around the dense SVD kernel.

use nalgebra::{DMatrix, DMatrixView, SVD};

/// Singular triplets ordered by descending singular value.
pub(crate) struct SortedSvd {
    pub singular_values: Vec<f64>,
    /// `m × p` left singular vectors, `p = min(m, n)`.
    pub u: DMatrix<f64>,
    /// `p × n`, row `l` is the `l`-th right singular vector.
    pub v_t: DMatrix<f64>,
}

pub(crate) fn svd_sorted(m: DMatrix<f64>) -> SortedSvd {
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if order.iter().enumerate().all(|(pos, &idx)| pos == idx) {
        return SortedSvd {
            singular_values: sv.iter().copied().collect(),
            u,
            v_t,
        };
    }
    let singular_values = order.iter().map(|&i| sv[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]);
    SortedSvd {
        singular_values,
        u,
        v_t,
    }
}

/// Singular values only, descending.
pub(crate) fn singular_values_desc(m: DMatrixView<'_, f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.into_owned().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Flips column signs so that each column's entry of largest magnitude is
/// positive. Ties go to the smallest row index.
pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (r, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = r;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}
