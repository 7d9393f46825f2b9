//! Low-rank + sparse quaternion matrix completion (QQR-QNN-SR) by ADMM.
//!
//! The model is
//!
//! ```text
//! min ‖D‖_* + λ‖W‖_1   s.t.  X = L·D·R,  LᴴL = I,  R·Rᴴ = I,
//!                            P_Ω(X) = P_Ω(M),  W = T(X)
//! ```
//!
//! where `T` is the left-handed quaternion DCT. One iteration runs, in order,
//! [`update_lr`], [`update_d`], [`update_x`], [`update_w`] and
//! [`update_multipliers`]:
//!
//! 1. one CQSVD-QQR sweep on `B = X + Y/μ` refreshes `L` and `R`;
//! 2. `D ← SVT_{1/μ}(Lᴴ·B·Rᴴ)`;
//! 3. `X ← ½(L·D·R − Y/μ + T⁻¹(W + Z/μ))`, then observed entries reset to `M`;
//! 4. `W ← S_{4λ/μ}(T(X) − Z/μ)` (entrywise quaternion shrinkage);
//! 5. `Y += μ(X − L·D·R)`, `Z += μ(W − T(X))`, `μ ← min(γμ, μ_max)`.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cqsvd::qqr_sweep;
use crate::error::{Error, Result};
use crate::linalg::svt;
use crate::mask::Mask;
use crate::matrix::QuatMatrix;
use crate::qdct::{fqdct_l, iqdct_l, QdctConfig};
use crate::quaternion::Quaternion;

/// Observed data `M` with its mask Ω. Entries outside Ω are zero.
#[derive(Debug, Clone)]
pub struct Observation {
    data: QuatMatrix,
    mask: Mask,
}

impl Observation {
    /// Pairs data with a mask, zeroing every unobserved entry of `data`.
    pub fn new(mut data: QuatMatrix, mask: Mask) -> Result<Self> {
        if data.shape() != mask.shape() {
            return Err(Error::DimensionMismatch {
                op: "observation",
                left: data.shape(),
                right: mask.shape(),
            });
        }
        if mask.observed_count() == 0 {
            return Err(Error::EmptyMask);
        }
        for (m, n) in unobserved(&mask) {
            data.set(m, n, Quaternion::ZERO);
        }
        Ok(Self { data, mask })
    }

    pub fn data(&self) -> &QuatMatrix {
        &self.data
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }
}

fn unobserved(mask: &Mask) -> impl Iterator<Item = (usize, usize)> + '_ {
    let (rows, cols) = mask.shape();
    (0..rows)
        .flat_map(move |m| (0..cols).map(move |n| (m, n)))
        .filter(|&(m, n)| !mask.is_observed(m, n))
}

/// Built-in rank presets by missing ratio: 50% → 125, 70% → 85, 80% → 65, 90% → 45.
pub const RANK_BY_MISSING_RATIO: [(f64, usize); 4] = [(0.5, 125), (0.7, 85), (0.8, 65), (0.9, 45)];

/// Preset rank for the tabulated missing ratio closest to `mr`.
pub fn default_rank_for_missing_ratio(mr: f64) -> usize {
    RANK_BY_MISSING_RATIO
        .iter()
        .min_by(|a, b| (a.0 - mr).abs().total_cmp(&(b.0 - mr).abs()))
        .map(|&(_, r)| r)
        .expect("table is not empty")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weight λ of the ℓ1 term on `T(X)`.
    pub lambda: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub gamma: f64,
    /// Factor rank `r`.
    pub rank: usize,
    /// Stop when `‖Xᵗ⁺¹ − Xᵗ‖_F / ‖Xᵗ‖_F < tol`.
    pub tol: f64,
    pub it_max: usize,
    pub qdct: QdctConfig,
    /// `false` drops the `W`/`Z` machinery, leaving the pure low-rank model.
    pub sparse: bool,
}

impl SolverConfig {
    /// Random-missing defaults: λ = 0.1, μ⁰ = 0.05, γ = 1.15, μ_max = 1e8.
    pub fn new(rank: usize) -> Self {
        Self {
            lambda: 0.1,
            mu0: 0.05,
            mu_max: 1e8,
            gamma: 1.15,
            rank,
            tol: 1e-5,
            it_max: 300,
            qdct: QdctConfig::default(),
            sparse: true,
        }
    }

    /// Defaults for a mask with missing ratio `mr`, rank from the preset table.
    pub fn for_missing_ratio(mr: f64) -> Self {
        Self::new(default_rank_for_missing_ratio(mr))
    }

    /// Block-missing preset: λ = 0.5, γ = 1.6, r = 190.
    pub fn block_missing() -> Self {
        Self {
            lambda: 0.5,
            gamma: 1.6,
            ..Self::new(190)
        }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.rank < 1 || self.rank > rows.min(cols) {
            return Err(Error::InvalidRank {
                rank: self.rank,
                rows,
                cols,
            });
        }
        if self.sparse && !(self.lambda > 0.0) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.mu0 > 0.0) || !self.mu0.is_finite() {
            return bad(format!("mu0 must be positive, got {}", self.mu0));
        }
        if !(self.mu_max >= self.mu0) {
            return bad(format!("mu_max ({}) must be at least mu0 ({})", self.mu_max, self.mu0));
        }
        if !(self.gamma >= 1.0) {
            return bad(format!("gamma must be at least 1, got {}", self.gamma));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.it_max < 1 {
            return bad("it_max must be at least 1".into());
        }
        self.qdct.validate()
    }
}

/// All ADMM iterates.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: QuatMatrix,
    pub w: QuatMatrix,
    pub y: QuatMatrix,
    pub z: QuatMatrix,
    pub l: QuatMatrix,
    pub d: QuatMatrix,
    pub r: QuatMatrix,
    pub mu: f64,
    pub t: usize,
    /// `L·D·R` for the current factors, once computed.
    ldr: Option<QuatMatrix>,
    /// `T(X)` for the current `X`, once computed.
    tx: Option<QuatMatrix>,
    /// `T̂ᴴ` by-product of the last `update_lr` sweep.
    sweep_core: Option<QuatMatrix>,
    lowrank_residual: f64,
    sparse_residual: f64,
}

impl SolverState {
    /// `X⁰ = M`, `W⁰ = Y⁰ = Z⁰ = 0`, identity-shaped `L⁰, D⁰, R⁰`, `μ = μ⁰`.
    pub fn new(obs: &Observation, cfg: &SolverConfig) -> Self {
        let (rows, cols) = obs.data.shape();
        let r = cfg.rank;
        Self {
            x: obs.data.clone(),
            w: QuatMatrix::zeros(rows, cols),
            y: QuatMatrix::zeros(rows, cols),
            z: QuatMatrix::zeros(rows, cols),
            l: QuatMatrix::eye(rows, r),
            d: QuatMatrix::identity(r),
            r: QuatMatrix::eye(r, cols),
            mu: cfg.mu0,
            t: 0,
            ldr: None,
            tx: None,
            sweep_core: None,
            lowrank_residual: f64::NAN,
            sparse_residual: f64::NAN,
        }
    }

    /// `X + Y/μ`.
    fn shifted_x(&self) -> QuatMatrix {
        let mut b = self.x.clone();
        b.add_scaled(1.0 / self.mu, &self.y);
        b
    }

    fn low_rank(&mut self) -> &QuatMatrix {
        if self.ldr.is_none() {
            self.ldr = Some(&(&self.l * &self.d) * &self.r);
        }
        self.ldr.as_ref().expect("just set")
    }

    fn transformed_x(&mut self, cfg: &QdctConfig) -> &QuatMatrix {
        if self.tx.is_none() {
            self.tx = Some(fqdct_l(&self.x, cfg));
        }
        self.tx.as_ref().expect("just set")
    }

    /// `‖X − L·D·R‖_F` after the last multiplier update.
    pub fn lowrank_residual(&self) -> f64 {
        self.lowrank_residual
    }

    /// `‖W − T(X)‖_F` after the last multiplier update.
    pub fn sparse_residual(&self) -> f64 {
        self.sparse_residual
    }
}

/// One CQSVD-QQR sweep on `X + Y/μ` starting from the current `R`.
pub fn update_lr(state: &mut SolverState) {
    let b = state.shifted_x();
    let (l, r, core) = qqr_sweep(&b, &state.r);
    state.l = l;
    state.r = r;
    state.sweep_core = Some(core);
    state.ldr = None;
}

/// `D ← SVT_{1/μ}(D̃)` with `D̃ = Lᴴ·(X + Y/μ)·Rᴴ`.
pub fn update_d(state: &mut SolverState) {
    let b = state.shifted_x();
    let d_tilde = &state.l.h_matmul(&b).expect("factor shapes") * &state.r.conj_transpose();
    if let Some(core) = state.sweep_core.take() {
        debug_assert!(
            (&core - &d_tilde).fro_norm() <= 1e-6 * b.fro_norm().max(1.0),
            "explicit core disagrees with the QR by-product"
        );
    }
    state.d = svt(&d_tilde, 1.0 / state.mu);
    state.ldr = None;
}

/// `X ← ½(L·D·R − Y/μ + T⁻¹(W + Z/μ))` (or `L·D·R − Y/μ` without the sparse
/// term), then `X ← P_Ωc(X) + P_Ω(M)`.
pub fn update_x(state: &mut SolverState, obs: &Observation, cfg: &SolverConfig) {
    let inv_mu = 1.0 / state.mu;
    let mut x = state.low_rank().clone();
    x.add_scaled(-inv_mu, &state.y);
    if cfg.sparse {
        let mut wz = state.w.clone();
        wz.add_scaled(inv_mu, &state.z);
        x.add_scaled(1.0, &iqdct_l(&wz, &cfg.qdct));
        x = x.scale(0.5);
    }
    let (rows, cols) = x.shape();
    for m in 0..rows {
        for n in 0..cols {
            if obs.mask.is_observed(m, n) {
                x.set(m, n, obs.data.get(m, n));
            }
        }
    }
    state.x = x;
    state.tx = None;
}

/// Quaternion soft threshold `S_p(q) = q/|q|·max(|q| − p, 0)`, `S_p(0) = 0`.
#[inline]
pub fn soft_threshold(q: Quaternion, p: f64) -> Quaternion {
    let n = q.norm();
    if n <= p || n == 0.0 {
        Quaternion::ZERO
    } else {
        q.scale((n - p) / n)
    }
}

/// Entrywise [`soft_threshold`].
pub fn soft_threshold_matrix(a: &QuatMatrix, p: f64) -> QuatMatrix {
    a.map(|q| soft_threshold(q, p))
}

/// `W ← S_{4λ/μ}(T(X) − Z/μ)`. No-op when the sparse term is disabled.
pub fn update_w(state: &mut SolverState, cfg: &SolverConfig) {
    if !cfg.sparse {
        return;
    }
    let inv_mu = 1.0 / state.mu;
    let mut arg = state.transformed_x(&cfg.qdct).clone();
    arg.add_scaled(-inv_mu, &state.z);
    state.w = soft_threshold_matrix(&arg, 4.0 * cfg.lambda * inv_mu);
}

/// `Y += μ(X − L·D·R)`, `Z += μ(W − T(X))`, `μ ← min(γμ, μ_max)`.
pub fn update_multipliers(state: &mut SolverState, cfg: &SolverConfig) {
    let mu = state.mu;
    state.low_rank();
    let lowrank_gap = &state.x - state.ldr.as_ref().expect("cached");
    state.lowrank_residual = lowrank_gap.fro_norm();
    state.y.add_scaled(mu, &lowrank_gap);
    if cfg.sparse {
        state.transformed_x(&cfg.qdct);
        let sparse_gap = &state.w - state.tx.as_ref().expect("cached");
        state.sparse_residual = sparse_gap.fro_norm();
        state.z.add_scaled(mu, &sparse_gap);
    } else {
        state.sparse_residual = 0.0;
    }
    state.mu = (cfg.gamma * mu).min(cfg.mu_max);
}

/// `‖X − X_prev‖_F / max(‖X_prev‖_F, 1e-12)`.
pub fn relative_change(prev_x: &QuatMatrix, x: &QuatMatrix) -> f64 {
    (x - prev_x).fro_norm() / prev_x.fro_norm().max(1e-12)
}

pub fn stop_check(prev_x: &QuatMatrix, x: &QuatMatrix, t: usize, cfg: &SolverConfig) -> bool {
    t >= cfg.it_max || relative_change(prev_x, x) < cfg.tol
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    /// Penalty μᵗ used during the iteration.
    pub mu: f64,
    pub rel_change: f64,
    pub lowrank_residual: f64,
    pub sparse_residual: f64,
}

impl IterationRecord {
    pub const CSV_HEADER: &'static str = "t,mu,rel_change,lowrank_residual,sparse_residual";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e}",
            self.t, self.mu, self.rel_change, self.lowrank_residual, self.sparse_residual
        )
    }
}

/// Writes a trace as CSV with [`IterationRecord::CSV_HEADER`].
pub fn write_trace_csv<W: Write>(mut out: W, records: &[IterationRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", IterationRecord::CSV_HEADER)?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub rel_change: f64,
    pub lowrank_residual: f64,
    pub sparse_residual: f64,
    pub wall_time_secs: f64,
    pub config: SolverConfig,
}

pub fn solve(obs: &Observation, cfg: &SolverConfig) -> Result<(QuatMatrix, SolveReport)> {
    solve_with(obs, cfg, |_, _| {})
}

/// [`solve`] with a hook called after every iteration.
pub fn solve_with(
    obs: &Observation,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&IterationRecord, &SolverState),
) -> Result<(QuatMatrix, SolveReport)> {
    let (rows, cols) = obs.data.shape();
    cfg.validate(rows, cols)?;
    let started = Instant::now();
    let mut state = SolverState::new(obs, cfg);

    let (record, converged) = loop {
        let prev_x = state.x.clone();
        let mu = state.mu;
        update_lr(&mut state);
        update_d(&mut state);
        update_x(&mut state, obs, cfg);
        update_w(&mut state, cfg);
        update_multipliers(&mut state, cfg);
        state.t += 1;

        if !state.x.is_finite() {
            return Err(Error::Solver(format!("non-finite iterate at t = {}", state.t)));
        }
        let record = IterationRecord {
            t: state.t,
            mu,
            rel_change: relative_change(&prev_x, &state.x),
            lowrank_residual: state.lowrank_residual,
            sparse_residual: state.sparse_residual,
        };
        observe(&record, &state);
        if stop_check(&prev_x, &state.x, state.t, cfg) {
            break (record, record.rel_change < cfg.tol);
        }
    };

    let report = SolveReport {
        iterations: state.t,
        converged,
        rel_change: record.rel_change,
        lowrank_residual: record.lowrank_residual,
        sparse_residual: record.sparse_residual,
        wall_time_secs: started.elapsed().as_secs_f64(),
        config: *cfg,
    };
    Ok((state.x, report))
}
