//! Tensor Q-rank, Q-spectral and Q-nuclear norms and the proximal operator of
//! the Q-nuclear norm.
//!
//! All functionals act on the transformed tensor `G = T ×₃ Q`, one frontal
//! slice `G⁽ⁱ⁾` per column of `Q`. Per-slice SVDs are independent and run in
//! parallel; every reduction across slices happens sequentially in slice order,
//! so results do not depend on the thread count.

use nalgebra::DMatrixView;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{singular_values_desc, svd_sorted};
use crate::orth::{pca_q, OrthoMatrix};
use crate::tensor3::Tensor3;

/// Default relative threshold for numerical Q-rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Q-singular values: the singular values of every transformed slice,
/// descending within each slice.
#[derive(Debug, Clone, PartialEq)]
pub struct QSingularValues {
    slices: Vec<Vec<f64>>,
}

impl QSingularValues {
    pub fn slices(&self) -> &[Vec<f64>] {
        &self.slices
    }

    /// Largest value over all slices (0 when everything vanishes).
    pub fn max(&self) -> f64 {
        self.slices
            .iter()
            .filter_map(|s| s.first().copied())
            .fold(0.0, f64::max)
    }

    /// Sum over all slices, accumulated in slice order.
    pub fn sum(&self) -> f64 {
        self.slices.iter().map(|s| s.iter().sum::<f64>()).sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.slices
            .iter()
            .map(|s| s.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    /// All values flattened and sorted descending.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.slices.iter().flatten().copied().collect();
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }
}

fn transform(t: &Tensor3, q: &OrthoMatrix) -> Result<Tensor3> {
    t.mode3_product(q.as_matrix())
}

/// Singular values of every frontal slice of `t ×₃ Q`.
pub fn q_singular_values(t: &Tensor3, q: &OrthoMatrix) -> Result<QSingularValues> {
    let g = transform(t, q)?;
    let (n1, n2, r) = g.dims();
    let p = n1.min(n2);
    let slices = (0..r)
        .into_par_iter()
        .map(|i| {
            let s = g.slice(i);
            if s.iter().all(|&v| v == 0.0) {
                vec![0.0; p]
            } else {
                singular_values_desc(s)
            }
        })
        .collect();
    Ok(QSingularValues { slices })
}

/// Numerical tensor Q-rank: the number of Q-singular values above
/// `tol · σ_max`, summed over the `r` transformed slices.
pub fn tensor_q_rank(t: &Tensor3, q: &OrthoMatrix, tol: f64) -> Result<usize> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("rank tolerance must be > 0, got {tol}")));
    }
    let sv = q_singular_values(t, q)?;
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(0);
    }
    let cut = tol * smax;
    Ok(sv
        .slices
        .iter()
        .map(|s| s.iter().filter(|&&v| v > cut).count())
        .sum())
}

/// `‖T‖_{Q,*}`: sum of all Q-singular values.
pub fn q_nuclear_norm(t: &Tensor3, q: &OrthoMatrix) -> Result<f64> {
    Ok(q_singular_values(t, q)?.sum())
}

/// `‖T‖_{Q,σ}`: the largest Q-singular value.
pub fn q_spectral_norm(t: &Tensor3, q: &OrthoMatrix) -> Result<f64> {
    Ok(q_singular_values(t, q)?.max())
}

/// Singular value thresholding of one slice, written into `out`.
fn shrink_slice(s: DMatrixView<'_, f64>, lambda: f64, out: &mut [f64]) {
    // every singular value is at most the Frobenius norm
    if s.norm() <= lambda {
        out.fill(0.0);
        return;
    }
    let svd = svd_sorted(s.into_owned());
    let keep = svd.singular_values.iter().take_while(|&&v| v > lambda).count();
    if keep == 0 {
        out.fill(0.0);
        return;
    }
    let mut us = svd.u.columns(0, keep).into_owned();
    for (c, mut col) in us.column_iter_mut().enumerate() {
        col *= svd.singular_values[c] - lambda;
    }
    let x = us * svd.v_t.rows(0, keep);
    out.copy_from_slice(x.as_slice());
}

/// Proximal step of `λ‖·‖_{Q,*}`:
///
/// 1. `G = T ×₃ Q`;
/// 2. each slice `G⁽ⁱ⁾ = U S Vᵀ` becomes `U (S - λI)₊ Vᵀ`;
/// 3. `X = G_shrunk ×₃ Qᵀ + T ×₃ (I - QQᵀ)`.
///
/// Step 3 is evaluated as `T - (G - G_shrunk) ×₃ Qᵀ`, which needs no
/// `n3 × n3` matrix. For square `Q` the result is the exact minimizer of
/// `λ‖X‖_{Q,*} + ½‖X - T‖_F²`; for a thin `Q` the component of `T` outside the
/// column space of `Q` passes through unchanged.
pub fn prox_q_nuclear(t: &Tensor3, q: &OrthoMatrix, lambda: f64) -> Result<Tensor3> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite and >= 0, got {lambda}"
        )));
    }
    let g = transform(t, q)?;
    if lambda == 0.0 {
        return Ok(t.clone());
    }
    let (n1, n2, r) = g.dims();
    let s = n1 * n2;
    // removed[i] = G⁽ⁱ⁾ - SVT(G⁽ⁱ⁾)
    let mut removed = vec![0.0; s * r];
    removed
        .par_chunks_mut(s)
        .enumerate()
        .for_each(|(i, out)| {
            shrink_slice(g.slice(i), lambda, out);
            for (o, &v) in out.iter_mut().zip(g.slice(i).iter()) {
                *o = v - *o;
            }
        });
    let removed = Tensor3::from_vec((n1, n2, r), removed)?;
    let back = removed.mode3_product(&q.as_matrix().transpose())?;
    Ok(t - &back)
}

/// `rank_PCA(T̂) - ‖T̂‖_{PCA,*}` where `T̂` is `t` rescaled to unit
/// Q-spectral norm and `Q = PCA(t, 3, min(n1·n2, n3))`. Nonnegative up to
/// rounding.
pub fn envelope_gap(t: &Tensor3, tol: f64) -> Result<f64> {
    if t.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let (n1, n2, n3) = t.dims();
    let q = pca_q(t, (n1 * n2).min(n3))?;
    let spectral = q_spectral_norm(t, &q)?;
    let scaled = t.scaled(1.0 / spectral);
    let rank = tensor_q_rank(&scaled, &q, tol)?;
    let nuclear = q_nuclear_norm(&scaled, &q)?;
    Ok(rank as f64 - nuclear)
}
