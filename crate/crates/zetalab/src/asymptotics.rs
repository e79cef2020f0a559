//! Families of zeta functions: normalized-limit estimation (delta_i and
//! lambda_f), essential/negligible splits, very-exactness diagnostics, the
//! basic inequalities, limit zeta functions, Brauer-Siegel ratios,
//! Euler-Kronecker limits, central-point data, and base-change towers.
//!
//! Classifications here are labeled diagnostics computed from finitely many
//! members, never proofs of asymptotic statements.

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::lfun::{q_pow_half_quad, q_pow_half_rational, LfunError, ZetaFunction};
use crate::qpoly::{eval_quad, rat_i64, rat_pow, rat_to_f64, QPoly, QuadExt, Rat};

/// Default classification tolerance.
pub const DEFAULT_CONV_TOL: f64 = 1e-3;
/// Default identity-check tolerance.
pub const DEFAULT_EVAL_TOL: f64 = 1e-9;
/// Cap on the shared truncation depth F.
pub const MAX_TRUNCATION: usize = 64;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("a family needs at least 4 members, got {0}")]
    TooFewMembers(usize),
    #[error("every weight was classified negligible")]
    AllNegligible,
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("s = {s} outside the admissible interval ({lo}, {hi})")]
    SOutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("operation needs explicit factor data, but the family holds summaries only")]
    MissingFactorData,
    #[error("phi at m = {m} is {value}, negative")]
    NegativePhi { m: usize, value: f64 },
    #[error("family members disagree: {0}")]
    MixedFamily(String),
    #[error(transparent)]
    Lfun(#[from] LfunError),
}

/// One member's summary: total degree, per-weight degrees, and Dirichlet
/// data to a shared depth.
#[derive(Debug, Clone)]
pub struct MemberSummary {
    pub label: String,
    pub d_tilde: usize,
    /// Degree of the weight-i factor for i = 0..=w (0 when absent).
    pub degrees: Vec<usize>,
    /// Lambda_1..Lambda_F of the full zeta (not normalized).
    pub lambdas: Vec<f64>,
    /// Per-weight signed Lambda breakdown (index i holds the weight-i
    /// factor's contribution), present when built from explicit factors.
    pub lambdas_by_weight: Option<Vec<Vec<f64>>>,
}

/// A family of zeta summaries sharing q, the weight range, and the sign
/// vector epsilon.
#[derive(Debug, Clone)]
pub struct FamilyRecord {
    pub q: u64,
    pub w: u32,
    /// epsilon_i for i = 0..=w; +1 recorded for absent weights.
    pub epsilon: Vec<i8>,
    pub members: Vec<MemberSummary>,
    pub f_depth: usize,
    /// The zeta functions themselves when available.
    pub zetas: Option<Vec<ZetaFunction>>,
}

impl FamilyRecord {
    /// Build from explicit zeta functions, keeping them for the operations
    /// that evaluate members directly (Brauer-Siegel ratios, central data).
    pub fn from_zetas(
        zetas: Vec<ZetaFunction>,
        f_depth: Option<usize>,
    ) -> Result<FamilyRecord, FamilyError> {
        if zetas.is_empty() {
            return Err(FamilyError::TooFewMembers(0));
        }
        let q = zetas[0].q();
        let w = zetas.iter().map(|z| z.max_weight()).max().unwrap();
        let mut epsilon = vec![1i8; w as usize + 1];
        for z in &zetas {
            if z.q() != q {
                return Err(FamilyError::MixedFamily("different base field sizes".into()));
            }
            for (lf, eps) in z.factors() {
                let i = lf.weight() as usize;
                if epsilon[i] != 1 && epsilon[i] != *eps {
                    return Err(FamilyError::MixedFamily(format!(
                        "sign at weight {i} differs between members"
                    )));
                }
                epsilon[i] = *eps;
            }
        }
        let max_d = zetas.iter().map(|z| z.total_degree()).max().unwrap();
        let f_depth = f_depth.unwrap_or_else(|| (2 * max_d).clamp(1, MAX_TRUNCATION));
        let members = zetas
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let mut degrees = vec![0usize; w as usize + 1];
                let mut by_weight = vec![vec![0.0; f_depth]; w as usize + 1];
                for (lf, eps) in z.factors() {
                    let i = lf.weight() as usize;
                    degrees[i] = lf.degree();
                    let lam = lf.lambda_coeffs(f_depth);
                    for (f, v) in lam.values.iter().enumerate() {
                        by_weight[i][f] = *eps as f64 * rat_to_f64(v);
                    }
                }
                let lambdas = (0..f_depth)
                    .map(|f| by_weight.iter().map(|seq| seq[f]).sum())
                    .collect();
                MemberSummary {
                    label: format!("member-{k}"),
                    d_tilde: z.total_degree(),
                    degrees,
                    lambdas,
                    lambdas_by_weight: Some(by_weight),
                }
            })
            .collect();
        Ok(FamilyRecord { q, w, epsilon, members, f_depth, zetas: Some(zetas) })
    }

    pub fn from_summaries(
        q: u64,
        w: u32,
        epsilon: Vec<i8>,
        members: Vec<MemberSummary>,
    ) -> Result<FamilyRecord, FamilyError> {
        if epsilon.len() != w as usize + 1 {
            return Err(FamilyError::MixedFamily(format!(
                "epsilon has {} entries for max weight {w}",
                epsilon.len()
            )));
        }
        let f_depth = members.iter().map(|m| m.lambdas.len()).min().unwrap_or(0);
        Ok(FamilyRecord { q, w, epsilon, members, f_depth, zetas: None })
    }

    /// Raised when the tail half shows no degree growth (max d_tilde <
    /// 2 min d_tilde): d_tilde -> infinity is diagnosed, not assumed.
    pub fn growth_warning(&self) -> bool {
        let n = self.members.len();
        if n < 2 {
            return true;
        }
        let tail = &self.members[n / 2..];
        let max = tail.iter().map(|m| m.d_tilde).max().unwrap();
        let min = tail.iter().map(|m| m.d_tilde).min().unwrap();
        max < 2 * min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    NotExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goodness {
    Good,
    Bad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeryExact {
    VeryExact,
    Inconclusive,
    NotVeryExact,
}

impl VeryExact {
    pub fn as_str(self) -> &'static str {
        match self {
            VeryExact::VeryExact => "very_exact",
            VeryExact::Inconclusive => "inconclusive",
            VeryExact::NotVeryExact => "not_very_exact",
        }
    }
}

/// Estimated limits with convergence diagnostics and classifications.
#[derive(Debug, Clone)]
pub struct AsymptoticData {
    pub q: u64,
    pub w: u32,
    pub epsilon: Vec<i8>,
    pub f_depth: usize,
    pub d_tilde_last: usize,
    /// delta_i estimates (last member) with the max successive difference
    /// over the tail half as diagnostics.
    pub deltas: Vec<f64>,
    pub delta_diag: Vec<f64>,
    /// lambda_f estimates (last member, full zeta) and diagnostics.
    pub lambdas: Vec<f64>,
    pub lambda_diag: Vec<f64>,
    /// lambda_f from the essential part only (needs factor data).
    pub lambdas_essential: Option<Vec<f64>>,
    /// Negligible weight set I and the essential max weight w_e.
    pub negligible: Vec<u32>,
    pub w_essential: u32,
    pub exactness: Exactness,
    pub goodness: Goodness,
    pub very_exact: VeryExact,
    pub growth_warning: bool,
}

impl AsymptoticData {
    /// The lambda sequence for essential-strip evaluations.
    pub fn essential_lambdas(&self) -> &[f64] {
        self.lambdas_essential.as_deref().unwrap_or(&self.lambdas)
    }

    pub fn epsilon_essential(&self) -> i8 {
        self.epsilon[self.w_essential as usize]
    }
}

/// Limit estimation: the value at the largest-d member, with the maximum
/// absolute successive difference over the tail half as the convergence
/// diagnostic. No extrapolation.
pub fn estimate_limits(fam: &FamilyRecord, conv_tol: f64) -> Result<AsymptoticData, FamilyError> {
    let n = fam.members.len();
    if n < 4 {
        return Err(FamilyError::TooFewMembers(n));
    }
    let f_depth = fam.f_depth;
    let wn = fam.w as usize + 1;
    let last = &fam.members[n - 1];
    let dl = last.d_tilde as f64;

    let tail_diag = |seq: &[f64]| -> f64 {
        let start = seq.len() / 2;
        seq.windows(2)
            .skip(start.saturating_sub(1))
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    };

    let mut deltas = Vec::with_capacity(wn);
    let mut delta_diag = Vec::with_capacity(wn);
    for i in 0..wn {
        let seq: Vec<f64> =
            fam.members.iter().map(|m| m.degrees[i] as f64 / m.d_tilde as f64).collect();
        deltas.push(last.degrees[i] as f64 / dl);
        delta_diag.push(tail_diag(&seq));
    }
    let mut lambdas = Vec::with_capacity(f_depth);
    let mut lambda_diag = Vec::with_capacity(f_depth);
    for f in 0..f_depth {
        let seq: Vec<f64> =
            fam.members.iter().map(|m| m.lambdas[f] / m.d_tilde as f64).collect();
        lambdas.push(last.lambdas[f] / dl);
        lambda_diag.push(tail_diag(&seq));
    }

    let exact = delta_diag.iter().chain(&lambda_diag).all(|d| *d < conv_tol);
    let exactness = if exact { Exactness::Exact } else { Exactness::NotExact };
    let goodness = if lambdas.iter().all(|l| l.abs() < conv_tol) {
        Goodness::Bad
    } else {
        Goodness::Good
    };

    let (negligible, w_essential) = split_negligible(fam, &deltas, conv_tol)?;

    let lambdas_essential = last.lambdas_by_weight.as_ref().map(|bw| {
        (0..f_depth)
            .map(|f| {
                bw.iter()
                    .enumerate()
                    .filter(|(i, _)| !negligible.contains(&(*i as u32)))
                    .map(|(_, seq)| seq[f])
                    .sum::<f64>()
                    / dl
            })
            .collect::<Vec<f64>>()
    });

    let mut data = AsymptoticData {
        q: fam.q,
        w: fam.w,
        epsilon: fam.epsilon.clone(),
        f_depth,
        d_tilde_last: last.d_tilde,
        deltas,
        delta_diag,
        lambdas,
        lambda_diag,
        lambdas_essential,
        negligible,
        w_essential,
        exactness,
        goodness,
        very_exact: VeryExact::Inconclusive,
        growth_warning: fam.growth_warning(),
    };
    data.very_exact = very_exact_check(&data).verdict;
    Ok(data)
}

/// Negligible weights: delta below the tolerance outright, or a decreasing
/// trend over the tail half. (Degree sequences like 1/(2g+2) never drop
/// under a fixed threshold at desk scale, but their trend is unambiguous.)
fn split_negligible(
    fam: &FamilyRecord,
    deltas_last: &[f64],
    conv_tol: f64,
) -> Result<(Vec<u32>, u32), FamilyError> {
    let n = fam.members.len();
    let tail_start = n / 2;
    let mut negligible = Vec::new();
    let mut essential_max: Option<u32> = None;
    for (i, dl) in deltas_last.iter().enumerate() {
        // weights that never appear are vacuous, neither negligible nor
        // essential
        if fam.members.iter().all(|m| m.degrees[i] == 0) {
            continue;
        }
        if *dl < conv_tol {
            negligible.push(i as u32);
            continue;
        }
        let seq: Vec<f64> =
            fam.members.iter().map(|m| m.degrees[i] as f64 / m.d_tilde as f64).collect();
        let tail = &seq[tail_start..];
        let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let dropping = tail.last().unwrap() < &(0.9 * tail.first().unwrap());
        if nonincreasing && dropping {
            negligible.push(i as u32);
        } else {
            essential_max = Some(essential_max.map_or(i as u32, |m| m.max(i as u32)));
        }
    }
    Ok((negligible, essential_max.ok_or(FamilyError::AllNegligible)?))
}

/// The essential/negligible split with the per-member coefficient check:
/// |lambda_f(full) - lambda_f(essential)| must stay within
/// sum over negligible i of (d_{i,k}/d_tilde_k) q^(f i/2).
#[derive(Debug, Clone)]
pub struct EssentialSplit {
    pub negligible: Vec<u32>,
    pub w_essential: u32,
    /// Per member: worst ratio of |difference| to the bound (<= 1 passes).
    pub coefneg_worst: Vec<f64>,
}

pub fn essential_split(
    fam: &FamilyRecord,
    data: &AsymptoticData,
) -> Result<EssentialSplit, FamilyError> {
    let mut coefneg_worst = Vec::new();
    if fam.members.first().map_or(false, |m| m.lambdas_by_weight.is_some()) {
        for m in &fam.members {
            let bw = m.lambdas_by_weight.as_ref().unwrap();
            let mut worst: f64 = 0.0;
            for f in 1..=fam.f_depth {
                let full: f64 = m.lambdas[f - 1] / m.d_tilde as f64;
                let ess: f64 = bw
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !data.negligible.contains(&(*i as u32)))
                    .map(|(_, seq)| seq[f - 1])
                    .sum::<f64>()
                    / m.d_tilde as f64;
                let mut bound = 0.0;
                for &i in &data.negligible {
                    let di = m.degrees[i as usize] as f64;
                    bound += di / m.d_tilde as f64 * (fam.q as f64).powf(f as f64 * i as f64 / 2.0);
                }
                let diff = (full - ess).abs();
                if bound > 0.0 {
                    worst = worst.max(diff / bound);
                } else if diff > 1e-12 {
                    worst = f64::INFINITY;
                }
            }
            coefneg_worst.push(worst);
        }
    }
    Ok(EssentialSplit {
        negligible: data.negligible.clone(),
        w_essential: data.w_essential,
        coefneg_worst,
    })
}

/// Very-exactness diagnostic on the partial sums sum |lambda_f| q^(-f w_e/2).
#[derive(Debug, Clone)]
pub struct VeryExactReport {
    pub verdict: VeryExact,
    pub partial_sums: Vec<f64>,
    /// Largest term ratio over the tail half (geometric decay when < 1).
    pub tail_ratio: f64,
}

pub fn very_exact_check(data: &AsymptoticData) -> VeryExactReport {
    let q = data.q as f64;
    let we = data.w_essential as f64;
    let lam = data.essential_lambdas();
    let terms: Vec<f64> = lam
        .iter()
        .enumerate()
        .map(|(i, l)| l.abs() * q.powf(-we * (i + 1) as f64 / 2.0))
        .collect();
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let tail = &terms[terms.len() / 2..];
    let max_all = terms.iter().cloned().fold(0.0, f64::max);
    let mut tail_ratio: f64 = 0.0;
    for w in tail.windows(2) {
        if w[0] > 1e-300 {
            tail_ratio = tail_ratio.max(w[1] / w[0]);
        }
    }

    if max_all < 1e-12 {
        return VeryExactReport { verdict: VeryExact::VeryExact, partial_sums, tail_ratio };
    }
    // positivity route: eps_we sign(lambda_f) = 1 for every full-zeta
    // coefficient forces convergence (curve zetas: lambda_f = N_f/d >= 0)
    let eps = data.epsilon_essential() as f64;
    if data.lambdas.iter().all(|l| eps * l >= -1e-12) {
        return VeryExactReport { verdict: VeryExact::VeryExact, partial_sums, tail_ratio };
    }
    // geometric decay over the tail half
    if tail_ratio > 0.0 && tail_ratio < 0.95 {
        return VeryExactReport { verdict: VeryExact::VeryExact, partial_sums, tail_ratio };
    }
    // terms bounded away from zero
    let tail_mean = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
    if tail_mean > 0.1 * max_all && max_all > 1e-6 {
        return VeryExactReport { verdict: VeryExact::NotVeryExact, partial_sums, tail_ratio };
    }
    VeryExactReport { verdict: VeryExact::Inconclusive, partial_sums, tail_ratio }
}

/// The basic inequality for L-function-like data:
/// sum_{j<=b} (1 - j/(b+1)) lambda_j q^(-w_e j/2) <= 1/2.
#[derive(Debug, Clone)]
pub struct BasicIneqL {
    pub b: usize,
    pub lhs: f64,
    pub slack: f64,
    /// Truncated b -> infinity form, present when a corollary hypothesis
    /// (very exact, or lambda_j >= 0) holds.
    pub limit_sum: Option<f64>,
    pub limit_slack: Option<f64>,
}

pub fn basic_inequality_l(data: &AsymptoticData, b: usize) -> Result<BasicIneqL, FamilyError> {
    // hypothesis: the essential part is a single L-function family
    for i in 0..=data.w {
        if i != data.w_essential && !data.negligible.contains(&i) && data.deltas[i as usize] > 0.0 {
            return Err(FamilyError::HypothesisNotMet(format!(
                "weight {i} is essential alongside w_e = {}",
                data.w_essential
            )));
        }
    }
    if data.epsilon_essential() != 1 {
        return Err(FamilyError::HypothesisNotMet(
            "essential factor enters with epsilon = -1".into(),
        ));
    }
    if b == 0 || b > data.f_depth {
        return Err(FamilyError::DomainError(format!("b = {b} outside 1..={}", data.f_depth)));
    }
    let q = data.q as f64;
    let we = data.w_essential as f64;
    let lam = data.essential_lambdas();
    let mut lhs = 0.0;
    for j in 1..=b {
        lhs += (1.0 - j as f64 / (b as f64 + 1.0)) * lam[j - 1] * q.powf(-we * j as f64 / 2.0);
    }
    let hypothesis = data.very_exact == VeryExact::VeryExact || lam.iter().all(|l| *l >= -1e-12);
    let (limit_sum, limit_slack) = if hypothesis {
        let s: f64 = lam
            .iter()
            .enumerate()
            .map(|(i, l)| l * q.powf(-we * (i + 1) as f64 / 2.0))
            .sum();
        (Some(s), Some(0.5 - s))
    } else {
        (None, None)
    };
    Ok(BasicIneqL { b, lhs, slack: 0.5 - lhs, limit_sum, limit_slack })
}

/// Two-sided basic inequality for zeta families at real s in
/// (w_e/2, (w_e+1)/2).
#[derive(Debug, Clone)]
pub struct ZetaIneq {
    pub s: f64,
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    /// Geometric bound on the truncation tail of mid.
    pub tail_bound: f64,
    pub ordering_ok: bool,
}

pub fn basic_inequality_zeta(data: &AsymptoticData, s: f64) -> Result<ZetaIneq, FamilyError> {
    let lo = data.w_essential as f64 / 2.0;
    let hi = (data.w_essential as f64 + 1.0) / 2.0;
    if !(s > lo && s < hi) {
        return Err(FamilyError::SOutOfRange { s, lo, hi });
    }
    let q = data.q as f64;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for i in 0..=data.w_essential {
        if data.negligible.contains(&i) {
            continue;
        }
        let di = data.deltas[i as usize];
        let eps = data.epsilon[i as usize] as f64;
        let r = q.powf(s - i as f64 / 2.0);
        lower -= di / (r - eps);
        upper += di / (r + eps);
    }
    let lam = data.essential_lambdas();
    let mut mid = 0.0;
    for (i, l) in lam.iter().enumerate() {
        mid += l * q.powf(-s * (i + 1) as f64);
    }
    // |lambda_f| <= q^(f w_e/2) after essential normalization
    let ratio = q.powf(data.w_essential as f64 / 2.0 - s);
    let tail_bound = ratio.powi(lam.len() as i32 + 1) / (1.0 - ratio);
    let ordering_ok = lower - tail_bound <= mid && mid <= upper + tail_bound;
    Ok(ZetaIneq { s, lower, mid, upper, tail_bound, ordering_ok })
}

/// The limit zeta function of an asymptotically exact family:
/// log zeta_lim(s) = sum lambda_f/f q^(-fs), convergent for Re s > w_e/2 and
/// continuous up to the boundary for very exact families.
#[derive(Debug, Clone)]
pub struct LimitZeta {
    pub q: u64,
    pub w_essential: u32,
    pub lambdas: Vec<f64>,
    pub very_exact: bool,
}

impl LimitZeta {
    pub fn from_data(data: &AsymptoticData) -> LimitZeta {
        LimitZeta {
            q: data.q,
            w_essential: data.w_essential,
            lambdas: data.essential_lambdas().to_vec(),
            very_exact: data.very_exact == VeryExact::VeryExact,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LimitLogValue {
    pub value: Complex64,
    pub tail_bound: f64,
    /// Boundary evaluations carry an empirical, non-rigorous tail estimate.
    pub rigorous: bool,
}

pub fn limit_log_zeta(lz: &LimitZeta, s: Complex64) -> Result<LimitLogValue, FamilyError> {
    let q = lz.q as f64;
    let we2 = lz.w_essential as f64 / 2.0;
    let on_boundary = (s.re - we2).abs() < 1e-14;
    if s.re < we2 - 1e-14 || (on_boundary && !lz.very_exact) {
        return Err(FamilyError::DomainError(format!(
            "Re s = {} not in the convergence domain (w_e/2 = {we2}, very_exact = {})",
            s.re, lz.very_exact
        )));
    }
    let lnq = q.ln();
    let mut value = Complex64::new(0.0, 0.0);
    for (i, l) in lz.lambdas.iter().enumerate() {
        let f = (i + 1) as f64;
        value += l / f * (-s * lnq * f).exp();
    }
    let f_max = lz.lambdas.len();
    let (tail_bound, rigorous) = if s.re > we2 + 1e-14 {
        // |lambda_f| <= q^(f w_e/2): geometric tail
        let r = q.powf(we2 - s.re);
        (r.powi(f_max as i32 + 1) / ((1.0 - r) * (f_max + 1) as f64), true)
    } else {
        // boundary: extrapolate the observed terms geometrically
        let t = |i: usize| lz.lambdas[i].abs() * q.powf(-we2 * (i + 1) as f64) / (i + 1) as f64;
        let last = t(f_max - 1);
        let prev = if f_max >= 2 { t(f_max - 2) } else { last };
        let ratio = if prev > 0.0 { (last / prev).min(0.99) } else { 0.5 };
        (last * ratio / (1.0 - ratio), false)
    };
    Ok(LimitLogValue { value, tail_bound, rigorous })
}

/// Per-member Brauer-Siegel ratios log zeta_{e,k}(s)/d_tilde_k against the
/// limit value.
#[derive(Debug, Clone)]
pub struct BsReport {
    pub s: Complex64,
    /// (d_tilde, ratio, |ratio - limit|) per member.
    pub rows: Vec<(usize, Complex64, f64)>,
    pub limit: Complex64,
    pub limit_tail: f64,
    /// Deviations non-increasing over the tail half.
    pub converging: bool,
    /// |log zeta_n(s)|/d_tilde of the last member's negligible part, when
    /// the full-zeta form applies (2 Re s not an integer).
    pub negligible_part_last: Option<f64>,
}

pub fn brauer_siegel_ratio(
    fam: &FamilyRecord,
    data: &AsymptoticData,
    s: Complex64,
) -> Result<BsReport, FamilyError> {
    let zetas = fam.zetas.as_ref().ok_or(FamilyError::MissingFactorData)?;
    let we2 = data.w_essential as f64 / 2.0;
    if s.re <= we2 {
        return Err(FamilyError::SOutOfRange {
            s: s.re,
            lo: we2,
            hi: (data.w_essential as f64 + 1.0) / 2.0,
        });
    }
    let lz = LimitZeta::from_data(data);
    let lim = limit_log_zeta(&lz, s)?;
    let mut rows = Vec::with_capacity(zetas.len());
    let mut negligible_part_last = None;
    for z in zetas {
        let essential_factors: Vec<_> = z
            .factors()
            .iter()
            .filter(|(lf, _)| !data.negligible.contains(&lf.weight()))
            .cloned()
            .collect();
        let ess = ZetaFunction::new(essential_factors)?;
        let d = z.total_degree() as f64;
        let ratio = ess.log_value(s)? / d;
        rows.push((z.total_degree(), ratio, (ratio - lim.value).norm()));
        let half_integer = (2.0 * s.re - (2.0 * s.re).round()).abs() < 1e-12 && s.im == 0.0;
        if !half_integer {
            let neg_factors: Vec<_> = z
                .factors()
                .iter()
                .filter(|(lf, _)| data.negligible.contains(&lf.weight()))
                .cloned()
                .collect();
            if !neg_factors.is_empty() {
                let neg = ZetaFunction::new(neg_factors)?;
                negligible_part_last = Some(neg.log_value(s)?.norm() / d);
            }
        }
    }
    let devs: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let tail = &devs[devs.len() / 2..];
    let converging = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(BsReport {
        s,
        rows,
        limit: lim.value,
        limit_tail: lim.tail_bound,
        converging,
        negligible_part_last,
    })
}

/// Euler-Kronecker limit of a curve family from phi estimates:
/// -sum phi_f f log(q)/(q^f - 1), with a geometric tail bound.
pub fn ek_limit(phi: &[f64], q: u64) -> Result<(f64, f64), FamilyError> {
    for (i, p) in phi.iter().enumerate() {
        if *p < 0.0 {
            return Err(FamilyError::NegativePhi { m: i + 1, value: *p });
        }
    }
    let lnq = (q as f64).ln();
    let mut value = 0.0;
    for (i, p) in phi.iter().enumerate() {
        let f = (i + 1) as f64;
        value -= p * f * lnq / ((q as f64).powf(f) - 1.0);
    }
    // phi_f f <= q^(f/2) - 1 by the basic inequality, so each tail term is
    // below log(q) q^(-f/2)
    let r = (q as f64).powf(-0.5);
    let tail = lnq * r.powi(phi.len() as i32 + 1) / (1.0 - r);
    Ok((value, tail))
}

/// Order of vanishing and leading Taylor coefficient at the central point
/// s = w_e/2 (u_0 = q^(-w_e/2)).
#[derive(Debug, Clone)]
pub struct CentralData {
    /// Signed multiplicity sum eps_i mult_i(u_0).
    pub r: i64,
    /// Leading coefficient of zeta(s) = c (s - w_e/2)^r + ...
    pub c: f64,
    pub log_abs_c: f64,
}

pub fn central_data(zeta: &ZetaFunction, w_essential: u32) -> CentralData {
    let q = zeta.q();
    let lnq = (q as f64).ln();
    let u0f = (q as f64).powf(-(w_essential as f64) / 2.0);
    let mut r: i64 = 0;
    let mut log_abs = 0.0f64;
    let mut sign = 1.0f64;
    for (lf, eps) in zeta.factors() {
        let ef = *eps as f64;
        let value = if lf.weight() == w_essential && lf.plus_point_multiplicity() > 0 {
            let m = lf.plus_point_multiplicity();
            r += *eps as i64 * m as i64;
            central_cofactor_value(lf.coeffs(), q, w_essential, m)
        } else {
            // u_0 is not a root of this factor: plain value
            lf.eval(Complex64::new(u0f, 0.0)).re
        };
        log_abs += ef * value.abs().ln();
        if value < 0.0 {
            sign = -sign; // eps = +-1 leaves the sign parity unchanged
        }
    }
    // chain rule: u - u_0 = -u_0 log(q) (s - w_e/2) + O((s - w_e/2)^2)
    let scale = -u0f * lnq;
    if r != 0 && scale < 0.0 && r % 2 != 0 {
        sign = -sign;
    }
    let log_abs_c = log_abs + r as f64 * scale.abs().ln();
    CentralData { r, c: sign * log_abs_c.exp(), log_abs_c }
}

/// g(u_0) where L(u) = (u - u_0)^m g(u), by exact polynomial division.
fn central_cofactor_value(coeffs: &[Rat], q: u64, w_e: u32, m: usize) -> f64 {
    let poly = QPoly::new(coeffs.to_vec());
    if let Some(rpow) = q_pow_half_rational(q, w_e as u64) {
        // L = (1 - q^(w/2) u)^m Q(u) = (-q^(w/2))^m (u - u_0)^m Q(u)
        let lin = QPoly::new(vec![Rat::one(), -rpow.clone()]);
        let mut quot = poly;
        for _ in 0..m {
            quot = quot.exact_div(&lin).expect("certified multiplicity divides");
        }
        let u0 = Rat::one() / &rpow;
        let val = rat_to_f64(&quot.eval(&u0));
        (-rat_to_f64(&rpow)).powi(m as i32) * val
    } else {
        // L = (1 - q^w u^2)^m Q(u); at u_0 the conjugate linear factor
        // contributes (-q^(w/2))(1 + q^(w/2) u_0) = -2 q^(w/2) per peel
        let pair = QPoly::new(vec![Rat::one(), Rat::zero(), -rat_pow(&rat_i64(q as i64), w_e as u64)]);
        let mut quot = poly;
        for _ in 0..m {
            quot = quot.exact_div(&pair).expect("certified multiplicity divides");
        }
        let qw_half = q_pow_half_quad(q, w_e as u64);
        let inv_b = Rat::one() / (&qw_half.b * rat_i64(q as i64));
        let u0 = QuadExt::new(Rat::zero(), inv_b, q);
        let val = eval_quad(&quot, &u0).to_f64();
        (-2.0 * (q as f64).powf(w_e as f64 / 2.0)).powi(m as i32) * val
    }
}

/// One place's row in an ingested base-change tower table.
#[derive(Debug, Clone)]
pub struct TowerPlace {
    pub place_deg: usize,
    pub a_v: i64,
    pub bad: bool,
    /// phi_{v,m} for m = 1, 2, ...
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TowerTable {
    pub q: u64,
    pub nu: f64,
    pub places: Vec<TowerPlace>,
}

#[derive(Debug, Clone)]
pub struct BaseChangeOut {
    /// lambda_1..lambda_F, normalized by nu + 4.
    pub lambdas: Vec<f64>,
    /// Left side of the base-change inequality, bounded by (nu+4)/2.
    pub inequality_sum: f64,
    pub inequality_slack: f64,
    pub warnings: Vec<String>,
}

/// Normalized Dirichlet coefficients of a base-change family from an
/// ingested phi table:
/// lambda_f = (1/(nu+4)) sum_{m k d_v = f} m d_v phi_{v,m} (alpha_v^{mk} + bar^{mk}),
/// plus the slack of
/// sum m d_v phi_{v,m} tau_{v,m} q^(-m d_v) / (1 - tau_{v,m} q^(-m d_v)) <= (nu+4)/2.
pub fn base_change_lambda(table: &TowerTable, f_max: usize) -> Result<BaseChangeOut, FamilyError> {
    if table.nu < 0.0 {
        return Err(FamilyError::DomainError(format!("nu = {} < 0", table.nu)));
    }
    for pl in &table.places {
        for (i, p) in pl.phi.iter().enumerate() {
            if *p < 0.0 {
                return Err(FamilyError::NegativePhi { m: i + 1, value: *p });
            }
        }
    }
    let norm_const = table.nu + 4.0;
    let mut lambdas = vec![0.0f64; f_max];
    let mut warnings = Vec::new();
    let mut ineq_sum = 0.0f64;
    for pl in &table.places {
        let dv = pl.place_deg;
        let norm = (table.q as f64).powi(dv as i32);
        for (mi, phi) in pl.phi.iter().enumerate() {
            let m = mi + 1;
            if *phi == 0.0 {
                continue;
            }
            let mut k = 1usize;
            while m * k * dv <= f_max {
                let f = m * k * dv;
                let tau = crate::surface::trace_power(pl.a_v, norm as u64, !pl.bad, m * k) as f64;
                lambdas[f - 1] += (m * dv) as f64 * phi * tau / norm_const;
                k += 1;
            }
            let tau_m = crate::surface::trace_power(pl.a_v, norm as u64, !pl.bad, m) as f64;
            let x = tau_m * norm.powi(-(m as i32));
            let denom = 1.0 - x;
            if denom <= 0.0 {
                warnings.push(format!(
                    "inequality term skipped at place degree {dv}, m = {m}: denominator {denom} <= 0"
                ));
                continue;
            }
            ineq_sum += (m * dv) as f64 * phi * x / denom;
        }
    }
    Ok(BaseChangeOut {
        lambdas,
        inequality_sum: ineq_sum,
        inequality_slack: norm_const / 2.0 - ineq_sum,
        warnings,
    })
}
