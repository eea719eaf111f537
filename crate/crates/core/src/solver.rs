//! ADMM tensor completion with an adaptive or fixed transform.
//!
//! Solves `min ‖X‖_{Q,*}  s.t.  X + E = Y,  P_Ω(E) = 0` with `Q` either fixed
//! or refreshed as `PCA(Y - E + Z/μ, 3, r)` every `K` iterations. One
//! iteration `k ≥ 1` performs, in order:
//!
//! ```text
//! Q_k = PCA(Y - E_{k-1} + Z_{k-1}/μ_{k-1}, 3, r)   if (k - 1) mod K == 0, else Q_{k-1}
//! X_k = Prox_{1/μ_{k-1}, ‖·‖_{Q_k,*}}(Y - E_{k-1} + Z_{k-1}/μ_{k-1})
//! E_k = P_Ω̄(Y - X_k + Z_{k-1}/μ_{k-1})
//! Z_k = Z_{k-1} + μ_{k-1}(Y - X_k - E_k)
//! μ_k = min(ρ μ_{k-1}, μ_max)
//! ```
//!
//! and stops once `‖X_k - X_{k-1}‖_∞`, `‖E_k - E_{k-1}‖_∞` and
//! `‖Y - X_k - E_k‖_∞` are all at most `ε`, or after `max_iters`.

use crate::error::{Error, Result};
use crate::orth::{identity_q, pca_q, OrthoMatrix};
use crate::qnorm::{prox_q_nuclear, q_nuclear_norm};
use crate::tensor3::{Dims, ObservationMask, Tensor3};

/// How the transform evolves during the solve.
#[derive(Debug, Clone, PartialEq)]
pub enum QMode {
    /// PCA refresh every `refresh_period` iterations.
    Adaptive,
    /// Keep the given transform throughout.
    Fixed(OrthoMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Penalty growth factor, `> 1`.
    pub rho: f64,
    pub mu0: f64,
    pub mu_max: f64,
    /// Stopping tolerance on all three ∞-norm residuals.
    pub eps: f64,
    /// `K`: iterations between PCA refreshes in adaptive mode.
    pub refresh_period: usize,
    /// Number of transform columns; `None` means `min(n1·n2, n3)`.
    pub rank: Option<usize>,
    pub max_iters: usize,
    pub q_mode: QMode,
    /// Seed for randomized transforms built from this configuration.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.1,
            mu0: 1e-4,
            mu_max: 1e10,
            eps: 1e-8,
            refresh_period: 1,
            rank: None,
            max_iters: 500,
            q_mode: QMode::Adaptive,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Checks the parameters against tensor dimensions and returns the
    /// effective number of transform columns.
    pub fn validate(&self, dims: Dims) -> Result<usize> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.rho.is_finite() || self.rho <= 1.0 {
            return bad(format!("rho must be > 1, got {}", self.rho));
        }
        if self.mu0.is_nan() || self.mu0 <= 0.0 || !self.mu_max.is_finite() || self.mu0 > self.mu_max {
            return bad(format!(
                "need 0 < mu0 <= mu_max, got mu0={} mu_max={}",
                self.mu0, self.mu_max
            ));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return bad(format!("eps must be > 0, got {}", self.eps));
        }
        if self.refresh_period == 0 {
            return bad("refresh period K must be >= 1".into());
        }
        let (n1, n2, n3) = dims;
        let max_rank = (n1 * n2).min(n3);
        let r = match (&self.q_mode, self.rank) {
            (QMode::Fixed(q), rank) => {
                if q.rows() != n3 {
                    return Err(Error::DimensionMismatch(format!(
                        "transform has {} rows, tensor has n3 = {n3}",
                        q.rows()
                    )));
                }
                if let Some(r) = rank {
                    if r != q.cols() {
                        return bad(format!(
                            "rank {r} disagrees with the fixed transform's {} columns",
                            q.cols()
                        ));
                    }
                }
                q.cols()
            }
            (QMode::Adaptive, Some(r)) => r,
            (QMode::Adaptive, None) => max_rank,
        };
        if r == 0 || (matches!(self.q_mode, QMode::Adaptive) && r > max_rank) {
            return Err(Error::RankOutOfRange { r, max: max_rank });
        }
        Ok(r)
    }
}

/// Convergence diagnostics of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// `‖Y - X_k - E_k‖_∞` per iteration.
    pub res_feas: Vec<f64>,
    /// `‖X_k - X_{k-1}‖_∞` per iteration.
    pub res_x: Vec<f64>,
    /// `‖E_k - E_{k-1}‖_∞` per iteration.
    pub res_e: Vec<f64>,
    /// `μ_k` after each iteration's update.
    pub mu: Vec<f64>,
    pub final_mu: f64,
    /// `‖Q_k Q_kᵀ - Q_{k-1} Q_{k-1}ᵀ‖_F` at every refresh.
    pub q_drift: Vec<f64>,
    pub converged: bool,
    /// `P_Ω(E_k) = 0` held exactly at every iteration.
    pub e_off_mask: bool,
    pub final_q: OrthoMatrix,
}

impl SolverReport {
    /// Last feasibility residual, or infinity when no iteration ran.
    pub fn final_feasibility(&self) -> f64 {
        self.res_feas.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn final_drift(&self) -> Option<f64> {
        self.q_drift.last().copied()
    }

    /// Per-iteration residual table, header `iter,res_feas,res_x,res_e,mu`.
    pub fn residual_csv(&self) -> String {
        let mut out = String::from("iter,res_feas,res_x,res_e,mu\n");
        for k in 0..self.iterations {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                k + 1,
                self.res_feas[k],
                self.res_x[k],
                self.res_e[k],
                self.mu[k]
            ));
        }
        out
    }
}

/// Read-only view of the iterates handed to an observer after iteration `k`.
pub struct IterationState<'a> {
    pub k: usize,
    pub x: &'a Tensor3,
    pub e: &'a Tensor3,
    pub z: &'a Tensor3,
    pub q: &'a OrthoMatrix,
    /// `μ_{k-1}`, the penalty used during iteration `k`.
    pub mu_used: f64,
}

/// Completes `y` (zero off the mask) and returns the final `X` with a report.
pub fn admm_complete(
    y: &Tensor3,
    mask: &ObservationMask,
    cfg: &SolverConfig,
) -> Result<(Tensor3, SolverReport)> {
    admm_complete_observed(y, mask, cfg, |_| {})
}

/// [`admm_complete`] with a callback invoked after every iteration.
pub fn admm_complete_observed(
    y: &Tensor3,
    mask: &ObservationMask,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&IterationState<'_>),
) -> Result<(Tensor3, SolverReport)> {
    let dims = y.dims();
    if mask.dims() != dims {
        return Err(Error::DimensionMismatch(format!(
            "mask dims {:?} vs tensor dims {dims:?}",
            mask.dims()
        )));
    }
    let r = cfg.validate(dims)?;
    check_zero_off_mask(y, mask)?;

    let (adaptive, mut q) = match &cfg.q_mode {
        QMode::Adaptive => (true, identity_q(dims.2, r)?),
        QMode::Fixed(q) => (false, q.clone()),
    };

    let mut x = Tensor3::zeros(dims);
    let mut e = Tensor3::zeros(dims);
    let mut z = Tensor3::zeros(dims);
    let mut mu = cfg.mu0;

    let mut report = SolverReport {
        iterations: 0,
        res_feas: Vec::new(),
        res_x: Vec::new(),
        res_e: Vec::new(),
        mu: Vec::new(),
        final_mu: mu,
        q_drift: Vec::new(),
        converged: false,
        e_off_mask: true,
        final_q: q.clone(),
    };

    for k in 1..=cfg.max_iters {
        let inv_mu = 1.0 / mu;
        let mut target = y - &e;
        target.axpy(inv_mu, &z);

        if adaptive && (k - 1) % cfg.refresh_period == 0 {
            let fresh = pca_q(&target, r)?;
            report.q_drift.push(fresh.projector_distance(&q)?);
            q = fresh;
        }

        let x_new = prox_q_nuclear(&target, &q, inv_mu)?;

        let mut e_arg = y - &x_new;
        e_arg.axpy(inv_mu, &z);
        let e_new = e_arg.project_omega_complement(mask)?;

        let mut feas = y - &x_new;
        feas.axpy(-1.0, &e_new);
        z.axpy(mu, &feas);

        let res_feas = feas.max_abs();
        let res_x = x_new.inf_norm_diff(&x)?;
        let res_e = e_new.inf_norm_diff(&e)?;
        x = x_new;
        e = e_new;

        if report.e_off_mask && !vanishes_on_mask(&e, mask) {
            report.e_off_mask = false;
        }

        observer(&IterationState {
            k,
            x: &x,
            e: &e,
            z: &z,
            q: &q,
            mu_used: mu,
        });

        mu = (cfg.rho * mu).min(cfg.mu_max);

        report.iterations = k;
        report.res_feas.push(res_feas);
        report.res_x.push(res_x);
        report.res_e.push(res_e);
        report.mu.push(mu);

        if res_feas <= cfg.eps && res_x <= cfg.eps && res_e <= cfg.eps {
            report.converged = true;
            break;
        }
    }

    report.final_mu = mu;
    report.final_q = q;
    Ok((x, report))
}

/// Runs [`admm_complete`] with the transform held fixed at `q`.
pub fn fixed_q_complete(
    y: &Tensor3,
    mask: &ObservationMask,
    q: &OrthoMatrix,
    cfg: &SolverConfig,
) -> Result<(Tensor3, SolverReport)> {
    let cfg = SolverConfig {
        q_mode: QMode::Fixed(q.clone()),
        rank: None,
        ..cfg.clone()
    };
    admm_complete(y, mask, &cfg)
}

/// The completion objective `‖X‖_{Q,*}`.
pub fn objective_value(x: &Tensor3, q: &OrthoMatrix) -> Result<f64> {
    q_nuclear_norm(x, q)
}

fn check_zero_off_mask(y: &Tensor3, mask: &ObservationMask) -> Result<()> {
    let (n1, n2, _) = y.dims();
    for (off, (&v, &obs)) in y.data().iter().zip(mask.storage_flags()).enumerate() {
        if !obs && v != 0.0 {
            let i = off % n1;
            let j = (off / n1) % n2;
            let k = off / (n1 * n2);
            return Err(Error::OffMaskEntry(i + 1, j + 1, k + 1));
        }
    }
    Ok(())
}

fn vanishes_on_mask(e: &Tensor3, mask: &ObservationMask) -> bool {
    e.data()
        .iter()
        .zip(mask.storage_flags())
        .all(|(&v, &obs)| !obs || v == 0.0)
}
