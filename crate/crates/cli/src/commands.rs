use anyhow::{bail, ensure, Context, Result};
use qrank_core::bench::{bernoulli_mask, derive_seed, psnr as psnr_of, run_grid, synth_low_qrank};
use qrank_core::io::{format_mask, format_tensor};
use qrank_core::orth::{dct_matrix, identity_q, pca_q, random_orthonormal};
use qrank_core::qnorm::q_singular_values;
use qrank_core::solver::admm_complete_observed;
use qrank_core::{DMatrix, OrthoMatrix, QMode, SolverConfig, Tensor3};

use crate::files::{read_mask, read_q, read_tensor, write_atomic};
use crate::{CompleteArgs, GridArgs, PsnrArgs, QModeArg, SolverArgs, SpectrumArgs, SynthArgs};

fn base_config(s: &SolverArgs) -> SolverConfig {
    SolverConfig {
        rho: s.rho,
        mu0: s.mu0,
        mu_max: s.mu_max,
        eps: s.eps,
        refresh_period: s.k,
        max_iters: s.max_iters,
        ..SolverConfig::default()
    }
}

/// Builds a fixed transform for `t`; `None` for adaptive mode.
fn fixed_transform(
    mode: QModeArg,
    q_file: Option<&std::path::Path>,
    t: &Tensor3,
    r: Option<usize>,
    seed: u64,
) -> Result<Option<OrthoMatrix>> {
    let (n1, n2, n3) = t.dims();
    if mode != QModeArg::File && q_file.is_some() {
        bail!("--q-file requires --q-mode file");
    }
    let cols = r.unwrap_or((n1 * n2).min(n3));
    ensure!(cols >= 1 && cols <= n3, "--r must be in 1..={n3}, got {cols}");
    let q = match mode {
        QModeArg::Adaptive => return Ok(None),
        QModeArg::Identity => identity_q(n3, cols)?,
        QModeArg::Random => random_orthonormal(n3, cols, seed)?,
        QModeArg::Dct => {
            let full = dct_matrix(n3)?;
            if cols == n3 {
                full
            } else {
                let m: DMatrix<f64> = full.as_matrix().columns(0, cols).into_owned();
                OrthoMatrix::from_matrix(m, 1e-10)?
            }
        }
        QModeArg::File => {
            let path = q_file.context("--q-mode file needs --q-file")?;
            let q = read_q(path)?;
            ensure!(
                q.rows() == n3,
                "{}: transform has {} rows but the tensor has n3 = {n3}",
                path.display(),
                q.rows()
            );
            if let Some(r) = r {
                ensure!(r == q.cols(), "--r {r} disagrees with the {} columns in {}", q.cols(), path.display());
            }
            q
        }
    };
    Ok(Some(q))
}

pub fn complete(a: CompleteArgs) -> Result<()> {
    let y = read_tensor(&a.input)?;
    let mask = read_mask(&a.mask)?;
    ensure!(
        mask.dims() == y.dims(),
        "mask dims {:?} do not match tensor dims {:?}",
        mask.dims(),
        y.dims()
    );
    let mut cfg = base_config(&a.solver);
    cfg.seed = a.seed;
    match fixed_transform(a.q_mode, a.q_file.as_deref(), &y, a.r, a.seed)? {
        Some(q) => cfg.q_mode = QMode::Fixed(q),
        None => cfg.rank = a.r,
    }

    let verbose = a.verbose;
    let (x, report) = admm_complete_observed(&y, &mask, &cfg, |s| {
        if verbose {
            let feas = (&(&y - s.x) - s.e).max_abs();
            eprintln!("iter {} mu {:e} res_feas {:e}", s.k, s.mu_used, feas);
        }
    })?;

    write_atomic(&a.output, &format_tensor(&x))?;
    if let Some(path) = &a.report {
        write_atomic(path, &report.residual_csv())?;
    }
    let last = report.iterations.saturating_sub(1);
    let residual = if report.iterations == 0 {
        f64::INFINITY
    } else {
        report.res_feas[last].max(report.res_x[last]).max(report.res_e[last])
    };
    println!(
        "converged={} iters={} residual={:e}",
        report.converged, report.iterations, residual
    );
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let (truth, _) = synth_low_qrank(a.n1, a.n2, a.n3, a.r0, derive_seed(a.seed, &[0]))?;
    let mask = bernoulli_mask(truth.dims(), a.p, derive_seed(a.seed, &[1]))?;
    let observed = truth.project_omega(&mask)?;
    write_atomic(&a.out_true, &format_tensor(&truth))?;
    write_atomic(&a.out_observed, &format_tensor(&observed))?;
    write_atomic(&a.out_mask, &format_mask(&mask))?;
    println!("observed={} p={:.6}", mask.len(), mask.sampling_rate());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    ensure!(!items.is_empty(), "{flag} is empty");
    items
        .iter()
        .map(|s| s.parse().map_err(|_| anyhow::anyhow!("{flag}: cannot parse '{s}'")))
        .collect()
}

pub fn grid(a: GridArgs) -> Result<()> {
    let p: Vec<f64> = parse_list("--p-list", &a.p_list)?;
    let r: Vec<usize> = parse_list("--r-list", &a.r_list)?;
    let cfg = base_config(&a.solver);
    let result = run_grid(a.n, &p, &r, a.trials, &cfg, a.seed)?;
    write_atomic(&a.out, &result.to_csv())?;
    let failed: usize = result.cells.iter().map(|c| c.failed()).sum();
    println!("cells={} failed_trials={failed}", result.cells.len());
    Ok(())
}

pub fn psnr(a: PsnrArgs) -> Result<()> {
    let x = read_tensor(&a.x)?;
    let reference = read_tensor(&a.reference)?;
    println!("{:.2}", psnr_of(&x, &reference)?);
    Ok(())
}

pub fn spectrum(a: SpectrumArgs) -> Result<()> {
    let t = read_tensor(&a.input)?;
    let q = match fixed_transform(a.q_mode, a.q_file.as_deref(), &t, a.r, a.seed)? {
        Some(q) => q,
        None => {
            let (n1, n2, n3) = t.dims();
            pca_q(&t, a.r.unwrap_or((n1 * n2).min(n3)))?
        }
    };
    let mut values = q_singular_values(&t, &q)?.sorted_desc();
    if let Some(n) = a.top {
        values.truncate(n);
    }
    let text: String = values.iter().map(|v| format!("{v:e}\n")).collect();
    if let Some(path) = &a.output {
        write_atomic(path, &text)?;
    }
    print!("{text}");
    Ok(())
}
