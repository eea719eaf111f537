//! Test-only oracles, independent of the library's SVD path.
#![allow(dead_code)]

use qrank_core::{DMatrix, ObservationMask, Tensor3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(dims: (usize, usize, usize), rng: &mut ChaCha8Rng) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| rng.sample(StandardNormal))
}

pub fn random_dims(rng: &mut ChaCha8Rng, max: (usize, usize, usize)) -> (usize, usize, usize) {
    (
        rng.random_range(1..=max.0),
        rng.random_range(1..=max.1),
        rng.random_range(1..=max.2),
    )
}

/// One-sided Jacobi SVD. Returns `(U, σ, V)` with `σ` descending, `U` `m × p`
/// and `V` `n × p`, `p = min(m, n)`. Columns of `U` belonging to zero
/// singular values are zero.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    if a.nrows() < a.ncols() {
        let (u, s, v) = jacobi_svd(&a.transpose());
        return (v, s, u);
    }
    let (m, n) = (a.nrows(), a.ncols());
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    alpha += w[(i, p)] * w[(i, p)];
                    beta += w[(i, q)] * w[(i, q)];
                    gamma += w[(i, p)] * w[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = DMatrix::from_fn(m, n, |i, c| {
        let j = order[c];
        if norms[j] > 0.0 {
            w[(i, j)] / norms[j]
        } else {
            0.0
        }
    });
    let v = DMatrix::from_fn(n, n, |i, c| v[(i, order[c])]);
    (u, s, v)
}

pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    jacobi_svd(a).1
}

pub fn nuclear(a: &DMatrix<f64>) -> f64 {
    singular_values(a).iter().sum()
}

/// Matrix singular value thresholding via the Jacobi SVD.
pub fn svt(a: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let (u, s, v) = jacobi_svd(a);
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for (j, &sj) in s.iter().enumerate() {
        let shrunk = (sj - lambda).max(0.0);
        if shrunk > 0.0 {
            out += shrunk * u.column(j) * v.column(j).transpose();
        }
    }
    out
}

/// Frontal slice `k` as an owned matrix, read entry by entry.
pub fn slice(t: &Tensor3, k: usize) -> DMatrix<f64> {
    let (n1, n2, _) = t.dims();
    DMatrix::from_fn(n1, n2, |i, j| t.get(i, j, k))
}

/// Transformed slices `Σ_k T(:,:,k) Q[k, c]`, computed by explicit sums.
pub fn transformed_slices(t: &Tensor3, q: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let (n1, n2, n3) = t.dims();
    (0..q.ncols())
        .map(|c| {
            DMatrix::from_fn(n1, n2, |i, j| (0..n3).map(|k| t.get(i, j, k) * q[(k, c)]).sum())
        })
        .collect()
}

/// `‖T‖_{Q,*}` through the Jacobi oracle.
pub fn q_nuclear_oracle(t: &Tensor3, q: &DMatrix<f64>) -> f64 {
    transformed_slices(t, q).iter().map(nuclear).sum()
}

/// Independent per-slice matrix-completion ADMM:
/// `min Σ_k ‖X_k‖_*  s.t.  X_k + E_k = Y_k,  P_Ω(E_k) = 0`, run on every
/// slice with the same penalty schedule and stopping rule as the tensor
/// solver.
pub struct SliceAdmm {
    pub rho: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub eps: f64,
    pub max_iters: usize,
}

impl SliceAdmm {
    pub fn run(&self, y: &Tensor3, mask: &ObservationMask) -> Tensor3 {
        let (n1, n2, n3) = y.dims();
        let observed = |i: usize, j: usize, k: usize| mask.contains(i + 1, j + 1, k + 1);
        let ys: Vec<DMatrix<f64>> = (0..n3).map(|k| slice(y, k)).collect();
        let mut xs = vec![DMatrix::<f64>::zeros(n1, n2); n3];
        let mut es = xs.clone();
        let mut zs = xs.clone();
        let mut mu = self.mu0;
        for _ in 0..self.max_iters {
            let (mut dx, mut de, mut df) = (0.0_f64, 0.0_f64, 0.0_f64);
            for k in 0..n3 {
                let target = &ys[k] - &es[k] + &zs[k] / mu;
                let x = svt(&target, 1.0 / mu);
                let e_arg = &ys[k] - &x + &zs[k] / mu;
                let e = DMatrix::from_fn(n1, n2, |i, j| {
                    if observed(i, j, k) {
                        0.0
                    } else {
                        e_arg[(i, j)]
                    }
                });
                let feas = &ys[k] - &x - &e;
                zs[k] += mu * &feas;
                dx = dx.max((&x - &xs[k]).amax());
                de = de.max((&e - &es[k]).amax());
                df = df.max(feas.amax());
                xs[k] = x;
                es[k] = e;
            }
            mu = (self.rho * mu).min(self.mu_max);
            if dx <= self.eps && de <= self.eps && df <= self.eps {
                break;
            }
        }
        Tensor3::from_fn((n1, n2, n3), |i, j, k| xs[k][(i, j)])
    }
}
