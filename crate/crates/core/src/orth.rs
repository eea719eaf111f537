//! Column-orthonormal transforms `Q ∈ R^{n3×r}` and their constructors.
//!
//! Every [`OrthoMatrix`] satisfies `QᵀQ = I_r` and a sign convention: in each
//! column the entry of largest magnitude is positive (ties go to the smallest
//! row index). The adaptive choice is [`pca_q`], the leading right singular
//! vectors of the mode-3 unfolding; [`identity_q`], [`dct_matrix`] and
//! [`random_orthonormal`] are the fixed alternatives.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{fix_column_signs, svd_sorted};
use crate::tensor3::Tensor3;

/// Orthonormality tolerance enforced on every constructor output.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMatrix {
    m: DMatrix<f64>,
}

impl OrthoMatrix {
    /// Wraps an arbitrary matrix after checking `max |QᵀQ - I| ≤ tol`. The sign
    /// convention is applied to the stored copy.
    pub fn from_matrix(mut m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.ncols() == 0 || m.ncols() > m.nrows() {
            return Err(Error::RankOutOfRange {
                r: m.ncols(),
                max: m.nrows(),
            });
        }
        if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        let deviation = orthonormality_deviation(&m);
        if deviation > tol {
            return Err(Error::NotOrthonormal { deviation });
        }
        fix_column_signs(&mut m);
        Ok(Self { m })
    }

    /// Applies the sign convention to a matrix known to be orthonormal.
    fn from_trusted(mut m: DMatrix<f64>) -> Self {
        fix_column_signs(&mut m);
        debug_assert!(orthonormality_deviation(&m) <= ORTHONORMAL_TOL);
        Self { m }
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.m.nrows() == self.m.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// `QQᵀ`, the orthogonal projector onto the column space.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.m * self.m.transpose()
    }

    /// `‖QQᵀ - PPᵀ‖_F`: compares column spaces, ignoring the basis chosen.
    pub fn projector_distance(&self, other: &OrthoMatrix) -> Result<f64> {
        if self.rows() != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} rows",
                self.rows(),
                other.rows()
            )));
        }
        if self.cols() == other.cols() {
            // ‖QQᵀ - PPᵀ‖_F² = 2‖(I - PPᵀ)Q‖_F² for equal column counts
            let resid = &self.m - &other.m * (other.m.transpose() * &self.m);
            return Ok(std::f64::consts::SQRT_2 * resid.norm());
        }
        Ok((self.projector() - other.projector()).norm())
    }

    /// `Q · R` for an `r × r'` orthonormal `R`: the same kind of transform with
    /// a rotated (or truncated) basis.
    pub fn rotate(&self, r: &OrthoMatrix) -> Result<OrthoMatrix> {
        if r.rows() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "cannot rotate {} columns by a {}x{} matrix",
                self.cols(),
                r.rows(),
                r.cols()
            )));
        }
        Ok(Self::from_trusted(&self.m * &r.m))
    }

    /// `max |QᵀQ - I|`.
    pub fn deviation(&self) -> f64 {
        orthonormality_deviation(&self.m)
    }
}

fn orthonormality_deviation(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let r = gram.nrows();
    (&gram - DMatrix::<f64>::identity(r, r)).amax()
}

fn check_rank(r: usize, max: usize) -> Result<()> {
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { r, max });
    }
    Ok(())
}

/// The PCA operator: the `r` leading right singular vectors of `unfold3(t)`,
/// ordered by descending singular value. The zero tensor maps to the first
/// `r` identity columns.
///
/// When `σ_r = σ_{r+1}` the subspace is not unique and any basis is returned;
/// compare results through [`OrthoMatrix::projector_distance`].
pub fn pca_q(t: &Tensor3, r: usize) -> Result<OrthoMatrix> {
    let (n1, n2, n3) = t.dims();
    check_rank(r, (n1 * n2).min(n3))?;
    if t.is_zero() {
        return identity_q(n3, r);
    }
    let svd = svd_sorted(t.unfold3());
    let v = svd.v_t.rows(0, r).transpose();
    Ok(OrthoMatrix::from_trusted(v))
}

/// Orthonormalized `n × r` standard Gaussian matrix, seeded.
pub fn random_orthonormal(n: usize, r: usize, seed: u64) -> Result<OrthoMatrix> {
    check_rank(r, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(n, r, |_, _| rng.sample(StandardNormal));
    let q = g.qr().q();
    Ok(OrthoMatrix::from_trusted(q))
}

/// Orthonormal DCT-II basis: `Q[k][l] = c_l cos(π (2k+1) l / (2n))` (0-based),
/// `c_0 = √(1/n)`, `c_l = √(2/n)` otherwise.
pub fn dct_matrix(n: usize) -> Result<OrthoMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("DCT size must be positive".into()));
    }
    let nf = n as f64;
    let m = DMatrix::from_fn(n, n, |k, l| {
        let c = if l == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        c * (PI * (2 * k + 1) as f64 * l as f64 / (2.0 * nf)).cos()
    });
    Ok(OrthoMatrix::from_trusted(m))
}

/// First `r` columns of `I_n`.
pub fn identity_q(n: usize, r: usize) -> Result<OrthoMatrix> {
    check_rank(r, n)?;
    Ok(OrthoMatrix {
        m: DMatrix::identity(n, r),
    })
}

/// `‖unfold3(t) · Q‖_{2,1}`: the sum of column norms, which equals
/// `Σ_i ‖G⁽ⁱ⁾‖_F` for `G = t ×₃ Q`.
pub fn l21_of_unfolding(t: &Tensor3, q: &OrthoMatrix) -> Result<f64> {
    let g = t.mode3_product(q.as_matrix())?;
    let (n1, n2, r) = g.dims();
    let s = n1 * n2;
    Ok((0..r)
        .map(|k| {
            g.data()[k * s..(k + 1) * s]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .sum())
}
