//! Parallel parameter sweeps. Cells are independent runs; results come back
//! in cell order whatever the execution order.

use dform_core::dynamics::{run_cell, PhaseRow, SolverConfig, SweepCell, SyncConfig};
use dform_core::{PhysicalParams, Spectral, SpectralField};
use rayon::prelude::*;

/// Worker count: `DFORM_THREADS` if set to a positive integer, otherwise
/// rayon's default.
pub fn thread_limit() -> Option<usize> {
    std::env::var("DFORM_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` inside a pool capped by [`thread_limit`].
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit() {
        b = b.num_threads(n);
    }
    match b.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub fn parallel_sweep(
    sp: &Spectral,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    sync: &SyncConfig,
    u0: &SpectralField,
    cells: &[SweepCell],
) -> Vec<PhaseRow> {
    with_pool(|| cells.par_iter().map(|c| run_cell(sp, params, cfg, sync, u0, c)).collect())
}
