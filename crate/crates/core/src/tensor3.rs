//! Dense real 3-order tensors, the mode-3 algebra and observation masks.
//!
//! Entries are stored slice-major: the third index `k` is outermost, then the
//! column `j`, then the row `i`. A frontal slice is therefore a contiguous
//! column-major `n1 × n2` block, and the mode-3 unfolding (`n1·n2 × n3`,
//! column `k` = slice `k` flattened column-major) shares the exact same memory
//! layout as the tensor itself.
//!
//! [`Tensor3`] accessors are 0-based. [`ObservationMask`] triples are 1-based,
//! as are the text formats in [`crate::io`].

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

/// Tensor dimensions `(n1, n2, n3)`.
pub type Dims = (usize, usize, usize);

fn check_dims(dims: Dims) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return Err(Error::InvalidDims(dims));
    }
    Ok(())
}

/// A dense real `n1 × n2 × n3` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

impl Tensor3 {
    /// All-zero tensor.
    ///
    /// # Panics
    /// If any dimension is zero.
    pub fn zeros(dims: Dims) -> Self {
        check_dims(dims).expect("tensor dimensions must be positive");
        Self {
            dims,
            data: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    /// Builds a tensor from data in storage order, validating length and
    /// finiteness.
    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        check_dims(dims)?;
        let len = dims.0 * dims.1 * dims.2;
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "expected {len} entries for dims {dims:?}, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { dims, data })
    }

    /// Builds a tensor by evaluating `f(i, j, k)` (0-based) at every entry.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        for k in 0..dims.2 {
            for j in 0..dims.1 {
                for i in 0..dims.0 {
                    let off = t.offset(i, j, k);
                    t.data[off] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Raw data in storage order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + j * self.dims.0 + k * self.dims.0 * self.dims.1
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let off = self.offset(i, j, k);
        self.data[off] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Frontal slice `T(:, :, k)` as a borrowed `n1 × n2` matrix view.
    pub fn slice(&self, k: usize) -> DMatrixView<'_, f64> {
        let (n1, n2, _) = self.dims;
        let s = n1 * n2;
        DMatrixView::from_slice(&self.data[k * s..(k + 1) * s], n1, n2)
    }

    /// Mode-3 unfolding: an `n1·n2 × n3` matrix whose column `k` is slice `k`
    /// flattened column-major (row index `i + j·n1`).
    pub fn unfold3(&self) -> DMatrix<f64> {
        let (n1, n2, n3) = self.dims;
        DMatrix::from_column_slice(n1 * n2, n3, &self.data)
    }

    /// Inverse of [`Tensor3::unfold3`].
    pub fn fold3(m: &DMatrix<f64>, dims: Dims) -> Result<Self> {
        check_dims(dims)?;
        if m.nrows() != dims.0 * dims.1 || m.ncols() != dims.2 {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold a {}x{} matrix into {dims:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self {
            dims,
            data: m.as_slice().to_vec(),
        })
    }

    /// Mode-3 product `T ×₃ Q` for `Q ∈ R^{n3×r}`, defined by
    /// `unfold3(T ×₃ Q) = unfold3(T) · Q`. The result is `n1 × n2 × r`.
    pub fn mode3_product(&self, q: &DMatrix<f64>) -> Result<Self> {
        let (n1, n2, n3) = self.dims;
        if q.nrows() != n3 {
            return Err(Error::DimensionMismatch(format!(
                "mode-3 product needs {n3} rows, matrix has {}",
                q.nrows()
            )));
        }
        if q.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "mode-3 product with an empty matrix".into(),
            ));
        }
        let unfolded = DMatrixView::from_slice(&self.data, n1 * n2, n3);
        let prod = unfolded * q;
        Ok(Self {
            dims: (n1, n2, q.ncols()),
            data: prod.as_slice().to_vec(),
        })
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Entrywise inner product `⟨a, b⟩`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// `max |a - b|` over all entries.
    pub fn inf_norm_diff(&self, other: &Self) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Keeps the observed entries and zeroes everything else.
    pub fn project_omega(&self, mask: &ObservationMask) -> Result<Self> {
        self.project_where(mask, true)
    }

    /// Keeps the unobserved entries and zeroes the observed ones.
    pub fn project_omega_complement(&self, mask: &ObservationMask) -> Result<Self> {
        self.project_where(mask, false)
    }

    fn project_where(&self, mask: &ObservationMask, keep_observed: bool) -> Result<Self> {
        if mask.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "mask dims {:?} vs tensor dims {:?}",
                mask.dims(),
                self.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&mask.observed)
            .map(|(&v, &obs)| if obs == keep_observed { v } else { 0.0 })
            .collect();
        Ok(Self {
            dims: self.dims,
            data,
        })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        assert_eq!(self.dims, other.dims, "tensor dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    fn same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dims, other.dims, "tensor dimension mismatch");
        Self {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: f64) -> Tensor3 {
        self.scaled(rhs)
    }
}

/// The observed index set Ω.
///
/// Triples are 1-based, sorted lexicographically and duplicate-free. A dense
/// membership table in tensor storage order backs the projections.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMask {
    dims: Dims,
    indices: Vec<(usize, usize, usize)>,
    observed: Vec<bool>,
}

impl ObservationMask {
    /// Validates and sorts the given 1-based triples. Out-of-range entries and
    /// duplicates are rejected.
    pub fn new(dims: Dims, mut indices: Vec<(usize, usize, usize)>) -> Result<Self> {
        check_dims(dims)?;
        let (n1, n2, n3) = dims;
        let mut observed = vec![false; n1 * n2 * n3];
        for &(i, j, k) in &indices {
            if i == 0 || j == 0 || k == 0 || i > n1 || j > n2 || k > n3 {
                return Err(Error::InvalidMask(format!(
                    "index ({i}, {j}, {k}) outside dims {dims:?}"
                )));
            }
            let off = (i - 1) + (j - 1) * n1 + (k - 1) * n1 * n2;
            if observed[off] {
                return Err(Error::InvalidMask(format!("duplicate index ({i}, {j}, {k})")));
            }
            observed[off] = true;
        }
        indices.sort_unstable();
        Ok(Self {
            dims,
            indices,
            observed,
        })
    }

    /// Builds a mask from a membership table in tensor storage order.
    pub fn from_storage_flags(dims: Dims, observed: Vec<bool>) -> Result<Self> {
        check_dims(dims)?;
        let (n1, n2, n3) = dims;
        if observed.len() != n1 * n2 * n3 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} flags, got {}",
                n1 * n2 * n3,
                observed.len()
            )));
        }
        let mut indices = Vec::new();
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n3 {
                    if observed[i + j * n1 + k * n1 * n2] {
                        indices.push((i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        Ok(Self {
            dims,
            indices,
            observed,
        })
    }

    pub fn full(dims: Dims) -> Self {
        let n = dims.0 * dims.1 * dims.2;
        Self::from_storage_flags(dims, vec![true; n]).expect("valid dims")
    }

    pub fn empty(dims: Dims) -> Self {
        let n = dims.0 * dims.1 * dims.2;
        Self::from_storage_flags(dims, vec![false; n]).expect("valid dims")
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Sorted 1-based triples.
    pub fn indices(&self) -> &[(usize, usize, usize)] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `|Ω| / (n1·n2·n3)`.
    pub fn sampling_rate(&self) -> f64 {
        self.indices.len() as f64 / self.observed.len() as f64
    }

    /// Membership test for a 1-based triple.
    pub fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        let (n1, n2, n3) = self.dims;
        if i == 0 || j == 0 || k == 0 || i > n1 || j > n2 || k > n3 {
            return false;
        }
        self.observed[(i - 1) + (j - 1) * n1 + (k - 1) * n1 * n2]
    }

    /// Membership flags in tensor storage order.
    pub fn storage_flags(&self) -> &[bool] {
        &self.observed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn ramp(dims: Dims) -> Tensor3 {
        let n = dims.0 * dims.1 * dims.2;
        Tensor3::from_vec(dims, (0..n).map(|v| (v as f64).sin() + 0.25).collect()).unwrap()
    }

    #[test]
    fn unfold_scalar_slices() {
        let t = Tensor3::from_vec((1, 1, 3), vec![1.5, -2.0, 7.0]).unwrap();
        let m = t.unfold3();
        assert_eq!(m, DMatrix::from_row_slice(1, 3, &[1.5, -2.0, 7.0]));
        assert_eq!(Tensor3::fold3(&m, (1, 1, 3)).unwrap(), t);
    }

    #[test]
    fn unfold_zero_and_layout() {
        let z = Tensor3::zeros((2, 3, 4));
        assert_eq!(z.unfold3(), DMatrix::zeros(6, 4));
        let t = ramp((2, 3, 4));
        let m = t.unfold3();
        for k in 0..4 {
            for j in 0..3 {
                for i in 0..2 {
                    assert_eq!(m[(i + j * 2, k)], t.get(i, j, k));
                }
            }
        }
        assert_eq!(Tensor3::fold3(&m, (2, 3, 4)).unwrap(), t);
    }

    #[test]
    fn fold_rejects_bad_shape() {
        let m = DMatrix::<f64>::zeros(5, 4);
        assert!(matches!(
            Tensor3::fold3(&m, (2, 3, 4)),
            Err(Error::DimensionMismatch(_))
        ));
        assert_eq!(
            Tensor3::fold3(&DMatrix::zeros(6, 4), (2, 3, 4)).unwrap(),
            Tensor3::zeros((2, 3, 4))
        );
    }

    #[test]
    fn from_vec_validates() {
        assert!(matches!(
            Tensor3::from_vec((1, 1, 2), vec![1.0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert_eq!(
            Tensor3::from_vec((1, 1, 2), vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        );
        assert!(Tensor3::from_vec((0, 1, 2), vec![]).is_err());
    }

    #[test]
    fn mode3_identity_and_zero() {
        let t = ramp((2, 2, 3));
        assert_eq!(t.mode3_product(&DMatrix::identity(3, 3)).unwrap(), t);
        let q = DMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        let z = Tensor3::zeros((2, 2, 3)).mode3_product(&q).unwrap();
        assert_eq!(z.dims(), (2, 2, 2));
        assert!(z.is_zero());
        assert!(t.mode3_product(&DMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn mode3_rotation_keeps_frobenius() {
        let t = ramp((2, 2, 3));
        let (c, s) = (0.3_f64.cos(), 0.3_f64.sin());
        let q = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let g = t.mode3_product(&q).unwrap();
        assert!((g.frobenius() - t.frobenius()).abs() < 1e-12);
        // slice-wise accumulation of the transformed energy
        let slice_energy: f64 = (0..3).map(|k| g.slice(k).norm_squared()).sum();
        assert!((slice_energy - t.frobenius().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn frobenius_basic() {
        assert_eq!(Tensor3::zeros((2, 2, 2)).frobenius(), 0.0);
        let ones = Tensor3::from_fn((2, 2, 2), |_, _, _| 1.0);
        assert!((ones.frobenius() - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn projections() {
        let dims = (2, 2, 2);
        let ones = Tensor3::from_fn(dims, |_, _, _| 1.0);
        assert!(ones.project_omega(&ObservationMask::empty(dims)).unwrap().is_zero());
        assert_eq!(ones.project_omega(&ObservationMask::full(dims)).unwrap(), ones);
        let single = ObservationMask::new(dims, vec![(1, 1, 1)]).unwrap();
        let p = ones.project_omega(&single).unwrap();
        assert_eq!(p.frobenius(), 1.0);
        assert_eq!(p.get(0, 0, 0), 1.0);

        assert_eq!(
            ones.project_omega_complement(&ObservationMask::empty(dims)).unwrap(),
            ones
        );
        assert!(ones
            .project_omega_complement(&ObservationMask::full(dims))
            .unwrap()
            .is_zero());
        let wrong = ObservationMask::full((2, 2, 3));
        assert!(ones.project_omega(&wrong).is_err());
        assert!(ones.project_omega_complement(&wrong).is_err());
    }

    #[test]
    fn inf_norm_diff_cases() {
        let dims = (2, 2, 2);
        let z = Tensor3::zeros(dims);
        let ones = Tensor3::from_fn(dims, |_, _, _| 1.0);
        assert_eq!(z.inf_norm_diff(&z).unwrap(), 0.0);
        assert_eq!(z.inf_norm_diff(&ones).unwrap(), 1.0);
        let mut b = ones.clone();
        b.set(1, 0, 1, 1.0 + 1e-9);
        assert!((b.inf_norm_diff(&ones).unwrap() - 1e-9).abs() < 1e-15);
        assert!(z.inf_norm_diff(&Tensor3::zeros((2, 2, 3))).is_err());
    }

    #[test]
    fn mask_validation() {
        let dims = (2, 2, 2);
        assert!(ObservationMask::new(dims, vec![(3, 1, 1)]).is_err());
        assert!(ObservationMask::new(dims, vec![(0, 1, 1)]).is_err());
        assert!(ObservationMask::new(dims, vec![(1, 1, 1), (1, 1, 1)]).is_err());
        let m = ObservationMask::new(dims, vec![(2, 1, 1), (1, 2, 2), (1, 1, 2)]).unwrap();
        assert_eq!(m.indices(), &[(1, 1, 2), (1, 2, 2), (2, 1, 1)]);
        assert!((m.sampling_rate() - 3.0 / 8.0).abs() < 1e-15);
        assert!(m.contains(1, 2, 2) && !m.contains(2, 2, 2));
        let again = ObservationMask::from_storage_flags(dims, m.storage_flags().to_vec()).unwrap();
        assert_eq!(again, m);
    }
}
