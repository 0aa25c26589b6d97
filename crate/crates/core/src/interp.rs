//! Finite-rank interpolant operators `J_h` and their approximation constants.
//!
//! All three kinds are evaluated exactly in Fourier space, so the output for a
//! band-limited input does not depend on the grid resolution as long as the
//! grid can represent it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::spectral::Spectral;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterpolantKind {
    /// Orthogonal projection onto modes with `|k|²/κ₀² ≤ max_shell`.
    Modal { max_shell: u64 },
    /// Means over an `N×N` array of square cells, extended piecewise
    /// constant, truncated at wavenumber `π/h` and mean-removed.
    VolumeElements { cells: usize },
    /// Box averages of half-width `radius·h` centred at the `N×N` nodes
    /// `x = jh`, extended piecewise constant over node-centred cells, then
    /// truncated and mean-removed like [`InterpolantKind::VolumeElements`].
    NodalLocalAverage { nodes: usize, radius: f64 },
}

impl InterpolantKind {
    pub fn name(&self) -> &'static str {
        match self {
            InterpolantKind::Modal { .. } => "modal",
            InterpolantKind::VolumeElements { .. } => "volume",
            InterpolantKind::NodalLocalAverage { .. } => "nodal",
        }
    }

    /// The integer resolution parameter (`max_shell` or `N`).
    pub fn resolution(&self) -> u64 {
        match *self {
            InterpolantKind::Modal { max_shell } => max_shell,
            InterpolantKind::VolumeElements { cells } => cells as u64,
            InterpolantKind::NodalLocalAverage { nodes, .. } => nodes as u64,
        }
    }
}

/// Smallest constants found for `|Jφ−φ| ≤ c₁h|∇φ| + c₂h²|Δφ|` and
/// `|∇(Jφ−φ)| ≤ c̃₁|∇φ| + c̃₂h|Δφ|`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ApproxConstants {
    pub c1: f64,
    pub c2: f64,
    pub c1t: f64,
    pub c2t: f64,
}

impl ApproxConstants {
    /// `c_J = c₁ + c₂²/2`
    pub fn c_j(&self) -> f64 {
        self.c1 + self.c2 * self.c2 / 2.0
    }
}

/// Result of [`estimate_approx_constants`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimate {
    pub constants: ApproxConstants,
    pub samples: usize,
    /// Samples that could not constrain the constants (zero right-hand sides).
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolantSpec {
    kind: InterpolantKind,
    length: f64,
    constants: Option<ApproxConstants>,
}

/// Smallest sum of two squares strictly above `m`.
fn next_shell(m: u64) -> u64 {
    let mut s = m + 1;
    loop {
        let mut a = 0u64;
        while a * a <= s {
            let r = s - a * a;
            let b = (r as f64).sqrt() as u64;
            if (b.saturating_sub(1)..=b + 1).any(|b| b * b == r) {
                return s;
            }
            a += 1;
        }
        s += 1;
    }
}

fn isqrt(m: u64) -> u64 {
    let mut r = (m as f64).sqrt() as u64;
    while r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl InterpolantSpec {
    pub fn new(kind: InterpolantKind, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter { name: "L", reason: format!("length must be positive, got {length}") });
        }
        match kind {
            InterpolantKind::Modal { max_shell: 0 } => {
                return Err(Error::InvalidParameter { name: "interp", reason: "modal cutoff must be ≥ 1".into() })
            }
            InterpolantKind::VolumeElements { cells: n } | InterpolantKind::NodalLocalAverage { nodes: n, .. } if n < 2 => {
                return Err(Error::InvalidParameter { name: "interp", reason: format!("need at least 2 cells per side, got {n}") })
            }
            InterpolantKind::NodalLocalAverage { radius, .. } if !(radius > 0.0 && radius <= 0.5) => {
                return Err(Error::InvalidParameter { name: "interp", reason: format!("stencil radius {radius} outside (0, 1/2]") })
            }
            _ => {}
        }
        Ok(InterpolantSpec { kind, length, constants: None })
    }

    pub fn modal(max_shell: u64, length: f64) -> Result<Self> {
        Self::new(InterpolantKind::Modal { max_shell }, length)
    }

    pub fn volume(cells: usize, length: f64) -> Result<Self> {
        Self::new(InterpolantKind::VolumeElements { cells }, length)
    }

    /// Nodal local averages with the default stencil radius `h/4`.
    pub fn nodal(nodes: usize, length: f64) -> Result<Self> {
        Self::new(InterpolantKind::NodalLocalAverage { nodes, radius: 0.25 }, length)
    }

    pub fn kind(&self) -> InterpolantKind {
        self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn constants(&self) -> Option<ApproxConstants> {
        self.constants
    }

    pub fn with_constants(mut self, c: ApproxConstants) -> Self {
        self.constants = Some(c);
        self
    }

    fn kappa0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Length scale: `λ_{m+1}^{-1/2}` for the modal projection, `L/N` otherwise.
    pub fn h(&self) -> f64 {
        match self.kind {
            InterpolantKind::Modal { max_shell } => 1.0 / (self.kappa0() * (next_shell(max_shell) as f64).sqrt()),
            InterpolantKind::VolumeElements { cells: n } | InterpolantKind::NodalLocalAverage { nodes: n, .. } => {
                self.length / n as f64
            }
        }
    }

    /// Real dimension of the range, counted over both components.
    pub fn rank(&self) -> usize {
        match self.kind {
            InterpolantKind::Modal { max_shell } => {
                let r = isqrt(max_shell) as i64;
                let mut count = 0;
                for a in -r..=r {
                    for b in -r..=r {
                        let s = (a * a + b * b) as u64;
                        if s > 0 && s <= max_shell {
                            count += 1;
                        }
                    }
                }
                2 * count
            }
            InterpolantKind::VolumeElements { cells: n } | InterpolantKind::NodalLocalAverage { nodes: n, .. } => {
                let m = if n % 2 == 0 { n - 1 } else { n };
                2 * (m * m - 1)
            }
        }
    }

    /// Rejects grids that cannot represent the interpolant.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        grid.ensure_same(&Grid::new(grid.n(), self.length)?).map_err(|_| Error::GridMismatch {
            left: format!("interpolant on L={}", self.length),
            right: grid.describe(),
        })?;
        let (needed, ok) = match self.kind {
            InterpolantKind::Modal { max_shell } => {
                let r = isqrt(max_shell);
                (format!("modal shell {max_shell}"), (r as usize) < grid.n() / 2)
            }
            InterpolantKind::VolumeElements { cells: n } | InterpolantKind::NodalLocalAverage { nodes: n, .. } => {
                (format!("{n}x{n} {}", self.kind.name()), n <= grid.n())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InterpolantTooFine { interp: needed, field: grid.describe() })
        }
    }

    /// Per-axis weights `(w(k), c)` where the sampled functional of mode `k`
    /// is `w(k₁)w(k₂)·exp(2πi k·j/N)` at cell or node `j`.
    fn sample_weights(&self, grid: &Grid, n_cells: usize) -> Vec<Complex64> {
        let n = grid.n();
        (0..n)
            .map(|i| {
                let k = grid.wavenumber(i) as f64;
                match self.kind {
                    // cell [jh, (j+1)h): mean of exp(iκ₀kx) is sinc(πk/N)·exp(iπk/N)·exp(2πikj/N)
                    InterpolantKind::VolumeElements { .. } => {
                        let t = PI * k / n_cells as f64;
                        Complex64::from_polar(sinc(t), t)
                    }
                    InterpolantKind::NodalLocalAverage { radius, .. } => {
                        Complex64::new(sinc(2.0 * PI * k * radius / n_cells as f64), 0.0)
                    }
                    InterpolantKind::Modal { .. } => Complex64::new(1.0, 0.0),
                }
            })
            .collect()
    }

    /// Aliased sample spectrum `F(m) = Σ_{k ≡ m mod N} w(k₁)w(k₂) û(k)`.
    fn folded(&self, u: &[Complex64], grid: &Grid, n_cells: usize, w: &[Complex64]) -> Vec<Complex64> {
        let n = grid.n();
        let mut f = vec![ZERO; n_cells * n_cells];
        for i1 in 0..n {
            let m1 = (grid.wavenumber(i1).rem_euclid(n_cells as i64)) as usize;
            for i2 in 0..n {
                let z = u[i1 * n + i2];
                if z == ZERO {
                    continue;
                }
                let m2 = (grid.wavenumber(i2).rem_euclid(n_cells as i64)) as usize;
                f[m1 * n_cells + m2] += z * w[i1] * w[i2];
            }
        }
        f
    }

    /// Cell means (volume elements) or node averages (nodal) of both
    /// components, `[j₁*N + j₂]`. Errors for the modal kind.
    pub fn cell_means(&self, sp: &Spectral, u: &SpectralField) -> Result<[Vec<f64>; 2]> {
        let grid = *sp.grid();
        grid.ensure_same(u.grid())?;
        self.check_grid(&grid)?;
        let nc = match self.kind {
            InterpolantKind::Modal { .. } => {
                return Err(Error::InvalidParameter { name: "interp", reason: "the modal projection has no cell means".into() })
            }
            InterpolantKind::VolumeElements { cells: n } | InterpolantKind::NodalLocalAverage { nodes: n, .. } => n,
        };
        let w = self.sample_weights(&grid, nc);
        let mut out = [vec![0.0; nc * nc], vec![0.0; nc * nc]];
        // separable inverse DFT of the folded spectrum
        let tw: Vec<Complex64> = (0..nc).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / nc as f64)).collect();
        for c in 0..2 {
            let f = self.folded(u.component(c), &grid, nc, &w);
            let mut rows = vec![ZERO; nc * nc];
            for m1 in 0..nc {
                for j2 in 0..nc {
                    rows[m1 * nc + j2] = (0..nc).map(|m2| f[m1 * nc + m2] * tw[(m2 * j2) % nc]).sum();
                }
            }
            for j1 in 0..nc {
                for j2 in 0..nc {
                    let z: Complex64 = (0..nc).map(|m1| rows[m1 * nc + j2] * tw[(m1 * j1) % nc]).sum();
                    out[c][j1 * nc + j2] = z.re;
                }
            }
        }
        Ok(out)
    }

    /// `J φ`. Linear, finite rank, zero mean.
    pub fn apply(&self, sp: &Spectral, u: &SpectralField) -> Result<SpectralField> {
        let grid = *sp.grid();
        grid.ensure_same(u.grid())?;
        self.check_grid(&grid)?;
        match self.kind {
            InterpolantKind::Modal { max_shell } => {
                let mut out = u.clone();
                let factors: Vec<f64> = (0..grid.len())
                    .map(|i| {
                        let (a, b) = grid.wavevector(i);
                        if ((a * a + b * b) as u64) <= max_shell {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                out.scale_modes(&factors);
                Ok(out)
            }
            InterpolantKind::VolumeElements { cells: nc } | InterpolantKind::NodalLocalAverage { nodes: nc, .. } => {
                let w = self.sample_weights(&grid, nc);
                let n = grid.n();
                // piecewise-constant extension over cells of width h: factor
                // sinc(πK/N), with the half-cell shift for volume elements
                let ext: Vec<Complex64> = (0..n)
                    .map(|i| {
                        let k = grid.wavenumber(i) as f64;
                        let t = PI * k / nc as f64;
                        match self.kind {
                            InterpolantKind::VolumeElements { .. } => Complex64::from_polar(sinc(t), -t),
                            _ => Complex64::new(sinc(t), 0.0),
                        }
                    })
                    .collect();
                // truncation at π/h keeps |K_i| < N/2
                let keep = |k: i64| 2 * k.abs() < nc as i64;
                let mut comps = [vec![ZERO; grid.len()], vec![ZERO; grid.len()]];
                for c in 0..2 {
                    let f = self.folded(u.component(c), &grid, nc, &w);
                    for i1 in 0..n {
                        let k1 = grid.wavenumber(i1);
                        if !keep(k1) {
                            continue;
                        }
                        let m1 = k1.rem_euclid(nc as i64) as usize;
                        for i2 in 0..n {
                            let k2 = grid.wavenumber(i2);
                            if !keep(k2) || (k1, k2) == (0, 0) {
                                continue;
                            }
                            let m2 = k2.rem_euclid(nc as i64) as usize;
                            comps[c][i1 * n + i2] = ext[i1] * ext[i2] * f[m1 * nc + m2];
                        }
                    }
                }
                let [a, b] = comps;
                let mut out = SpectralField::from_parts_unchecked(grid, a, b);
                out.symmetrize();
                Ok(out)
            }
        }
    }
}

pub fn apply_interpolant(j: &InterpolantSpec, sp: &Spectral, u: &SpectralField) -> Result<SpectralField> {
    j.apply(sp, u)
}

pub fn h_of(j: &InterpolantSpec) -> f64 {
    j.h()
}

/// Minimizes `x + y` over `x, y ≥ 0` subject to `x·a_i + y·b_i ≥ e_i` for
/// every sample. Returns `None` if a sample has `e > 0` but `a = b = 0`.
///
/// With `x(y) = max(0, max_i (e_i − y b_i)/a_i)` the objective `y + x(y)`
/// is convex and piecewise linear in `y`, so the optimum sits at the lower
/// end of the feasible `y` range or at a breakpoint of the upper envelope
/// of the lines `(e_i − y b_i)/a_i`.
pub fn minimize_pair(samples: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let mut y_min: f64 = 0.0;
    // line: value = alpha − beta·y
    let mut lines: Vec<(f64, f64)> = Vec::new();
    for &(e, a, b) in samples {
        if e <= 0.0 {
            continue;
        }
        if a > 0.0 {
            lines.push((e / a, b / a));
        } else if b > 0.0 {
            y_min = y_min.max(e / b);
        } else {
            return None;
        }
    }
    if lines.is_empty() {
        return Some((0.0, y_min));
    }
    // upper hull by slope: sort by −beta ascending (steepest descent first)
    lines.sort_by(|p, q| q.1.total_cmp(&p.1).then(p.0.total_cmp(&q.0)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &l in &lines {
        while let Some(&top) = hull.last() {
            if top.1 == l.1 {
                // same slope: keep the higher intercept
                if l.0 >= top.0 {
                    hull.pop();
                    continue;
                }
                break;
            }
            if hull.len() >= 2 {
                let prev = hull[hull.len() - 2];
                // top is useless if l overtakes prev before top does
                let x_prev_top = (prev.0 - top.0) / (prev.1 - top.1);
                let x_prev_l = (prev.0 - l.0) / (prev.1 - l.1);
                if x_prev_l <= x_prev_top {
                    hull.pop();
                    continue;
                }
            }
            break;
        }
        if hull.last().is_none_or(|top| top.1 != l.1 || l.0 > top.0) {
            hull.push(l);
        }
    }
    let envelope = |y: f64| lines.iter().map(|&(al, be)| al - be * y).fold(0.0, f64::max);
    let mut candidates = vec![y_min];
    for w in hull.windows(2) {
        let y = (w[0].0 - w[1].0) / (w[0].1 - w[1].1);
        if y.is_finite() && y > y_min {
            candidates.push(y);
        }
    }
    // where the envelope reaches zero
    let y_zero = lines.iter().filter(|l| l.1 > 0.0).map(|l| l.0 / l.1).fold(0.0, f64::max);
    if y_zero > y_min && lines.iter().all(|l| l.1 > 0.0) {
        candidates.push(y_zero);
    }
    let mut best: Option<(f64, f64)> = None;
    for y in candidates {
        let x = envelope(y);
        if best.is_none_or(|(bx, by)| x + y < bx + by) {
            best = Some((x, y));
        }
    }
    best
}

/// Constraint triples `(error, a, b)` of one field for the two estimates
/// (`error ≤ c·a + c'·b`); `None` when both right-hand norms vanish.
pub type ApproxSample = [(f64, f64, f64); 2];

pub fn approx_sample(j: &InterpolantSpec, sp: &Spectral, phi: &SpectralField) -> Result<Option<ApproxSample>> {
    let h = j.h();
    let err = &j.apply(sp, phi)? - phi;
    let grad = sp.sobolev_norm(phi, 0.5);
    let lap = sp.sobolev_norm(phi, 1.0);
    if grad == 0.0 && lap == 0.0 {
        return Ok(None);
    }
    Ok(Some([(sp.sobolev_norm(&err, 0.0), h * grad, h * h * lap), (sp.sobolev_norm(&err, 0.5), grad, h * lap)]))
}

/// Smallest constants consistent with per-field results of [`approx_sample`].
pub fn fit_approx_constants(samples: &[Option<ApproxSample>]) -> Result<ConstantEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let kept: Vec<&ApproxSample> = samples.iter().flatten().collect();
    let first: Vec<(f64, f64, f64)> = kept.iter().map(|s| s[0]).collect();
    let second: Vec<(f64, f64, f64)> = kept.iter().map(|s| s[1]).collect();
    let degenerate = || Error::Condition("interpolant error with vanishing right-hand side".into());
    let (c1, c2) = minimize_pair(&first).ok_or_else(degenerate)?;
    let (c1t, c2t) = minimize_pair(&second).ok_or_else(degenerate)?;
    Ok(ConstantEstimate {
        constants: ApproxConstants { c1, c2, c1t, c2t },
        samples: samples.len(),
        skipped: samples.len() - kept.len(),
    })
}

/// Smallest `(c₁, c₂)` and `(c̃₁, c̃₂)` over a sample ensemble, minimizing
/// `c₁ + c₂` and `c̃₁ + c̃₂` separately.
pub fn estimate_approx_constants<I>(j: &InterpolantSpec, sp: &Spectral, samples: I) -> Result<ConstantEstimate>
where
    I: IntoIterator<Item = SpectralField>,
{
    let per_field = samples.into_iter().map(|phi| approx_sample(j, sp, &phi)).collect::<Result<Vec<_>>>()?;
    fit_approx_constants(&per_field)
}
