//! Empirical checks of the identities and functional inequalities of the
//! bilinear term, and the parameter thresholds built from the measured
//! constants.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::ensemble::EnsembleSpec;
use crate::field::SpectralField;
use crate::interp::ApproxConstants;
use crate::spectral::Spectral;
use crate::{Error, Result};

/// The inequalities whose constants are estimated. Each ratio is the left
/// side divided by the right side with constant one; where the inequality
/// holds for all test functions `w ∈ H`, the maximizing `w` is used, so
/// `|(B(u,v),w)|/|w|` becomes `|B(u,v)|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum InequalityId {
    /// `‖u‖_∞ ≤ c_A |u|^{1/2}|Au|^{1/2}`
    Agmon,
    /// `‖u‖_{L⁴} ≤ c_S |A^{1/4}u|`
    Sobolev,
    /// `|A^{1/4}u| ≤ c̃_L |u|^{1/2}‖u‖^{1/2}`
    LadyzhenskayaTilde,
    /// `‖u‖_{L⁴} ≤ c_L |u|^{1/2}‖u‖^{1/2}`
    Ladyzhenskaya,
    /// `|B(u,v)| ≤ c |u|^{1/2}‖u‖^{1/2}‖v‖^{1/2}|Av|^{1/2}`
    A46a,
    /// `|B(u,v)| ≤ c |u|^{1/2}|Au|^{1/2}‖v‖`
    A46b,
    /// `|B(w,u)| ≤ c_T ‖w‖‖u‖ log(e|Au|/(κ₀‖u‖))^{1/2}`
    Titi,
    /// `|B(w,u)| ≤ c_B ‖w‖‖u‖ log(e|Aw|/(κ₀‖w‖))^{1/2}`
    Brezis,
    /// `|A^{1/2}B(u,v)| ≤ c(|A^{3/4}u||A^{3/4}v| + |u|^{1/2}|Au|^{1/2}|Av|)`
    HalfB12,
    /// `|A^{1/2}B(u,v)| ≤ c(|A^{1/2}u||A^{1/2}v|^{1/2}|A^{3/2}v|^{1/2} + |A^{1/4}u||A^{5/4}v|)`
    HalfB13,
    /// `κ₀|u| ≤ ‖u‖`
    PoincareV,
    /// `κ₀‖u‖ ≤ |Au|`
    PoincareA,
}

impl InequalityId {
    pub const ALL: [InequalityId; 12] = [
        InequalityId::Agmon,
        InequalityId::Sobolev,
        InequalityId::LadyzhenskayaTilde,
        InequalityId::Ladyzhenskaya,
        InequalityId::A46a,
        InequalityId::A46b,
        InequalityId::Titi,
        InequalityId::Brezis,
        InequalityId::HalfB12,
        InequalityId::HalfB13,
        InequalityId::PoincareV,
        InequalityId::PoincareA,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::Agmon => "agmon",
            InequalityId::Sobolev => "sobolev",
            InequalityId::LadyzhenskayaTilde => "ladyzhenskaya_tilde",
            InequalityId::Ladyzhenskaya => "ladyzhenskaya",
            InequalityId::A46a => "bilinear_a",
            InequalityId::A46b => "bilinear_b",
            InequalityId::Titi => "titi",
            InequalityId::Brezis => "brezis_gallouet",
            InequalityId::HalfB12 => "half_b_1",
            InequalityId::HalfB13 => "half_b_2",
            InequalityId::PoincareV => "poincare_v",
            InequalityId::PoincareA => "poincare_a",
        }
    }

    pub fn parse(s: &str) -> Option<InequalityId> {
        Self::ALL.into_iter().find(|i| i.as_str() == s)
    }

    /// Whether the ratio involves a pair `(u, v)` rather than one field.
    pub fn is_binary(self) -> bool {
        matches!(
            self,
            InequalityId::A46a | InequalityId::A46b | InequalityId::Titi | InequalityId::Brezis | InequalityId::HalfB12 | InequalityId::HalfB13
        )
    }
}

/// `(∫|u|⁴)^{1/4}` by grid quadrature; exact when `4·kmax < n`.
pub fn l4_norm(sp: &Spectral, u: &SpectralField) -> f64 {
    let [a, b] = sp.to_physical(u);
    let n = a.len() as f64;
    let area = sp.grid().length().powi(2);
    let s: f64 = a.iter().zip(&b).map(|(x, y)| (x * x + y * y).powi(2)).sum();
    (s * area / n).powf(0.25)
}

/// `log(e·ratio)^{1/2}` with the ratio clamped to at least one.
fn log_factor(ratio: f64) -> f64 {
    (1.0 + ratio.max(1.0).ln()).sqrt()
}

fn quotient(lhs: f64, rhs: f64) -> Option<f64> {
    if rhs > 0.0 && rhs.is_finite() && lhs.is_finite() {
        Some(lhs / rhs)
    } else {
        None
    }
}

/// Left side over right side (constant one) for `u` and, for the binary
/// inequalities, `v`. `None` for a degenerate sample.
pub fn inequality_ratio(id: InequalityId, sp: &Spectral, u: &SpectralField, v: &SpectralField) -> Result<Option<f64>> {
    let k0 = sp.grid().kappa0();
    let n = |f: &SpectralField, a: f64| sp.sobolev_norm(f, a);
    let r = match id {
        InequalityId::Agmon => quotient(sp.linf(u), (n(u, 0.0) * n(u, 1.0)).sqrt()),
        InequalityId::Sobolev => quotient(l4_norm(sp, u), n(u, 0.25)),
        InequalityId::LadyzhenskayaTilde => quotient(n(u, 0.25), (n(u, 0.0) * n(u, 0.5)).sqrt()),
        InequalityId::Ladyzhenskaya => quotient(l4_norm(sp, u), (n(u, 0.0) * n(u, 0.5)).sqrt()),
        InequalityId::PoincareV => quotient(k0 * n(u, 0.0), n(u, 0.5)),
        InequalityId::PoincareA => quotient(k0 * n(u, 0.5), n(u, 1.0)),
        InequalityId::A46a => {
            let b = sp.norm_h(&sp.bilinear(u, v)?);
            quotient(b, (n(u, 0.0) * n(u, 0.5) * n(v, 0.5) * n(v, 1.0)).sqrt())
        }
        InequalityId::A46b => {
            let b = sp.norm_h(&sp.bilinear(u, v)?);
            quotient(b, (n(u, 0.0) * n(u, 1.0)).sqrt() * n(v, 0.5))
        }
        InequalityId::Titi => {
            // u plays w, v plays u: |B(u,v)| ≤ c‖u‖‖v‖ log(e|Av|/(κ₀‖v‖))^{1/2}
            let b = sp.norm_h(&sp.bilinear(u, v)?);
            let (vv, av) = (n(v, 0.5), n(v, 1.0));
            if vv == 0.0 {
                None
            } else {
                quotient(b, n(u, 0.5) * vv * log_factor(av / (k0 * vv)))
            }
        }
        InequalityId::Brezis => {
            let b = sp.norm_h(&sp.bilinear(u, v)?);
            let (uv, au) = (n(u, 0.5), n(u, 1.0));
            if uv == 0.0 {
                None
            } else {
                quotient(b, uv * n(v, 0.5) * log_factor(au / (k0 * uv)))
            }
        }
        InequalityId::HalfB12 => {
            let b = n(&sp.bilinear(u, v)?, 0.5);
            quotient(b, n(u, 0.75) * n(v, 0.75) + (n(u, 0.0) * n(u, 1.0)).sqrt() * n(v, 1.0))
        }
        InequalityId::HalfB13 => {
            let b = n(&sp.bilinear(u, v)?, 0.5);
            quotient(b, n(u, 0.5) * (n(v, 0.5) * n(v, 1.5)).sqrt() + n(u, 0.25) * n(v, 1.25))
        }
    };
    Ok(r)
}

/// Sample `i` of an inequality ensemble: `(u, v)` from members `2i`, `2i+1`.
fn sample_pair(sp: &Spectral, ens: &EnsembleSpec, i: usize) -> (SpectralField, SpectralField) {
    (ens.member(sp, 2 * i), ens.member(sp, 2 * i + 1))
}

/// Ratio of `id` on sample `i` of `ens`; `None` when degenerate.
pub fn inequality_sample(id: InequalityId, sp: &Spectral, ens: &EnsembleSpec, i: usize) -> Result<Option<f64>> {
    let (u, v) = sample_pair(sp, ens, i);
    inequality_ratio(id, sp, &u, &v)
}

/// Identity violations on triple `i` of `ens` (members `3i`, `3i+1`, `3i+2`).
pub fn identity_sample(sp: &Spectral, ens: &EnsembleSpec, i: usize) -> Result<IdentityReport> {
    identity_violations(sp, &ens.member(sp, 3 * i), &ens.member(sp, 3 * i + 1), &ens.member(sp, 3 * i + 2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityEstimate {
    pub id: InequalityId,
    /// Largest ratio over the ensemble.
    pub constant: f64,
    pub samples: usize,
    /// Samples with a vanishing right side.
    pub skipped: usize,
}

/// The smallest constant making `id` hold on `ens.size` samples.
pub fn estimate_inequality_constant(id: InequalityId, sp: &Spectral, ens: &EnsembleSpec) -> Result<InequalityEstimate> {
    ens.validate(sp)?;
    let mut constant: f64 = 0.0;
    let mut skipped = 0;
    for i in 0..ens.size {
        match inequality_sample(id, sp, ens, i)? {
            Some(r) => constant = constant.max(r),
            None => skipped += 1,
        }
    }
    if skipped == ens.size {
        return Err(Error::Condition(format!("every sample of {} is degenerate", id.as_str())));
    }
    Ok(InequalityEstimate { id, constant, samples: ens.size, skipped })
}

/// Number of samples of `ens` whose ratio exceeds `constant`.
pub fn count_violations(id: InequalityId, constant: f64, sp: &Spectral, ens: &EnsembleSpec) -> Result<usize> {
    ens.validate(sp)?;
    let mut count = 0;
    for i in 0..ens.size {
        if inequality_sample(id, sp, ens, i)?.is_some_and(|r| r > constant) {
            count += 1;
        }
    }
    Ok(count)
}

/// Largest relative violations of the bilinear identities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityReport {
    /// `|(B(u,v),w) + (B(u,w),v)| / (|B(u,v)||w| + |B(u,w)||v|)`
    pub flip: f64,
    /// `|(B(u,u),Au)| / (|B(u,u)||Au|)`
    pub ortho: f64,
    /// `|(B(v,v),Au) + (B(v,u),Av) + (B(u,v),Av)|` over the sum of the
    /// absolute values of the three terms
    pub moveu: f64,
    pub samples: usize,
}

impl IdentityReport {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn passed(&self) -> bool {
        self.flip < Self::TOLERANCE && self.ortho < Self::TOLERANCE && self.moveu < Self::TOLERANCE
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value.abs() / scale
    } else {
        value.abs()
    }
}

/// Evaluates the identities on `ens.size` triples `(u, v, w)` taken from
/// members `3i`, `3i+1`, `3i+2`.
pub fn check_identity_suite(sp: &Spectral, ens: &EnsembleSpec) -> Result<IdentityReport> {
    ens.validate(sp)?;
    let mut rep = IdentityReport { samples: ens.size, ..Default::default() };
    for i in 0..ens.size {
        rep = rep.merge(&identity_sample(sp, ens, i)?);
    }
    rep.samples = ens.size;
    Ok(rep)
}

/// Relative violations for one triple.
pub fn identity_violations(sp: &Spectral, u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<IdentityReport> {
    let buv = sp.bilinear(u, v)?;
    let buw = sp.bilinear(u, w)?;
    let flip = relative(
        buv.inner(w) + buw.inner(v),
        sp.norm_h(&buv) * sp.norm_h(w) + sp.norm_h(&buw) * sp.norm_h(v),
    );
    let buu = sp.bilinear(u, u)?;
    let au = sp.stokes_apply(u, 1.0)?;
    let ortho = relative(buu.inner(&au), sp.norm_h(&buu) * sp.norm_h(&au));
    let av = sp.stokes_apply(v, 1.0)?;
    let terms = [sp.bilinear(v, v)?.inner(&au), sp.bilinear(v, u)?.inner(&av), buv.inner(&av)];
    let moveu = relative(terms.iter().sum(), terms.iter().map(|t| t.abs()).sum());
    Ok(IdentityReport { flip, ortho, moveu, samples: 1 })
}

impl IdentityReport {
    /// Componentwise maximum; sample counts add.
    pub fn merge(&self, other: &IdentityReport) -> IdentityReport {
        IdentityReport {
            flip: self.flip.max(other.flip),
            ortho: self.ortho.max(other.ortho),
            moveu: self.moveu.max(other.moveu),
            samples: self.samples + other.samples,
        }
    }
}

/// `𝓛_N = (8 + 2π log N)^{1/2}/(2π)`
pub fn lemma_constant(n: f64) -> f64 {
    (8.0 + 2.0 * core::f64::consts::PI * n.ln()).sqrt() / (2.0 * core::f64::consts::PI)
}

/// Right side `𝓛_N|∇φ| + (√π κ₀ N)^{-1}|Δφ|` of the sup-norm lemma.
pub fn lemma_rhs(sp: &Spectral, phi: &SpectralField, n: f64) -> f64 {
    lemma_rhs_from(sp.sobolev_norm(phi, 0.5), sp.sobolev_norm(phi, 1.0), sp.grid().kappa0(), n)
}

/// [`lemma_rhs`] from precomputed `|∇φ|` and `|Δφ|`.
fn lemma_rhs_from(grad: f64, lap: f64, k0: f64, n: f64) -> f64 {
    lemma_constant(n) * grad + lap / (core::f64::consts::PI.sqrt() * k0 * n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub samples: usize,
    pub checks: usize,
    pub violations: usize,
    /// Largest `‖φ‖_∞ / rhs` seen.
    pub worst_ratio: f64,
    pub worst_n: f64,
}

/// Checks `‖φ‖_∞ ≤ 𝓛_N|∇φ| + (√πκ₀N)^{-1}|Δφ|` for every member of a
/// scalar ensemble and every `N` in `n_set`.
pub fn check_linf_lemma(sp: &Spectral, ens: &EnsembleSpec, n_set: &[f64]) -> Result<LemmaReport> {
    ens.validate(sp)?;
    if let Some(&bad) = n_set.iter().find(|&&n| !(n > 0.0 && n.is_finite())) {
        return Err(Error::InvalidParameter { name: "N", reason: format!("lemma parameter must be positive, got {bad}") });
    }
    let mut rep = LemmaReport { samples: 0, checks: 0, violations: 0, worst_ratio: 0.0, worst_n: f64::NAN };
    for phi in ens.members(sp) {
        rep = rep.merge(&lemma_member(sp, &phi, n_set));
    }
    Ok(rep)
}

/// The lemma checks for a single field.
pub fn lemma_member(sp: &Spectral, phi: &SpectralField, n_set: &[f64]) -> LemmaReport {
    let mut rep = LemmaReport { samples: 1, checks: 0, violations: 0, worst_ratio: 0.0, worst_n: f64::NAN };
    let sup = sp.linf(phi);
    let (grad, lap, k0) = (sp.sobolev_norm(phi, 0.5), sp.sobolev_norm(phi, 1.0), sp.grid().kappa0());
    for &n in n_set {
        let rhs = lemma_rhs_from(grad, lap, k0, n);
        rep.checks += 1;
        if sup > rhs {
            rep.violations += 1;
        }
        if rhs > 0.0 && sup / rhs > rep.worst_ratio {
            rep.worst_ratio = sup / rhs;
            rep.worst_n = n;
        }
    }
    rep
}

impl LemmaReport {
    /// Counts add; the worst case is kept.
    pub fn merge(&self, other: &LemmaReport) -> LemmaReport {
        let worst = if other.worst_ratio > self.worst_ratio { other } else { self };
        LemmaReport {
            samples: self.samples + other.samples,
            checks: self.checks + other.checks,
            violations: self.violations + other.violations,
            worst_ratio: worst.worst_ratio,
            worst_n: worst.worst_n,
        }
    }
}

/// Constants of the nonlinear estimates entering the thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearConstants {
    pub c_t: f64,
    pub c_b: f64,
    /// Attractor bound `|Au| ≤ c₀νκ₀²G³`.
    pub c0: f64,
}

impl NonlinearConstants {
    pub fn inflated(&self, factor: f64) -> Self {
        NonlinearConstants { c_t: self.c_t * factor, c_b: self.c_b * factor, c0: self.c0 * factor }
    }
}

/// Parameter region in which the synchronization and W-map results apply.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleRegion {
    pub grashof: f64,
    pub kappa0: f64,
    /// `c₃ = (2c_Tc₀)^{1/3}`
    pub c3: f64,
    /// `μ > 6c_T G log(c₃G)`
    pub mu_min_sync: f64,
    pub c_j: f64,
    /// `c₁² + c₂`
    pub c_w: f64,
    pub c4: f64,
    pub c5: f64,
    pub warnings: Vec<String>,
}

impl AdmissibleRegion {
    /// `h < (2μκ₀²c_J)^{-1/2}` for synchronization.
    pub fn h_max(&self, mu: f64) -> f64 {
        (2.0 * mu * self.kappa0 * self.kappa0 * self.c_j).sqrt().recip()
    }

    /// `h < (4μκ₀²(c₁²+c₂))^{-1/2}`, equivalent to `2μh²κ₀²(c₁²+c₂) < 1/2`.
    pub fn h_max_w(&self, mu: f64) -> f64 {
        (4.0 * mu * self.kappa0 * self.kappa0 * self.c_w).sqrt().recip()
    }

    /// `(c₄K² log(c₅K²), 2c₄K² log(c₅K²))`
    pub fn mu_range_w(&self, k: f64) -> (f64, f64) {
        let lo = self.c4 * k * k * (self.c5 * k * k).ln();
        (lo, 2.0 * lo)
    }

    /// Both synchronization conditions, strictly.
    pub fn sync_admissible(&self, mu: f64, h: f64) -> bool {
        mu > self.mu_min_sync && h < self.h_max(mu)
    }
}

pub fn admissible_region(grashof: f64, kappa0: f64, c: &NonlinearConstants, j: &ApproxConstants) -> Result<AdmissibleRegion> {
    let positive = |name: &'static str, x: f64| {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {x}") })
        }
    };
    positive("grashof", grashof)?;
    positive("kappa0", kappa0)?;
    positive("c_T", c.c_t)?;
    positive("c_B", c.c_b)?;
    positive("c0", c.c0)?;
    let mut warnings = Vec::new();
    if grashof < 1.0 {
        warnings.push(format!("G = {grashof} is below 1; the thresholds assume G ≥ 1"));
    }
    let c3 = (2.0 * c.c_t * c.c0).cbrt();
    let mu_min_sync = 6.0 * c.c_t * grashof * (c3 * grashof).ln();
    let s = c.c_t + c.c_b + 1.0;
    Ok(AdmissibleRegion {
        grashof,
        kappa0,
        c3,
        mu_min_sync,
        c_j: j.c_j(),
        c_w: j.c1 * j.c1 + j.c2,
        c4: 80.0 * s * s,
        c5: 8f64.sqrt() * s,
        warnings,
    })
}

#[cfg(test)]
mod tests;
