//! Zero measures on (-pi, pi], trigonometric moments, the limit density
//! M_lim(x) = 1 - 2 sum lambda_k cos(kx) q^(-w k/2), the curve specialization
//! through h_k(x), histogram comparison, and central multiplicity ratios.
//!
//! Normalization convention, fixed by the zeroth moment: measures have total
//! mass 1 and densities integrate to 1 against dx/(2pi).

use crate::lfun::LFunction;

/// Empirical zero-angle measure of an L-function: sorted angles in
/// (-pi, pi] with multiplicities summing to the degree.
#[derive(Debug, Clone)]
pub struct ZeroMeasure {
    pub angles: Vec<(f64, usize)>,
    pub total: usize,
}

/// Angles from the cached roots: theta is the argument of rho q^(w/2).
pub fn zero_measure(lf: &LFunction) -> ZeroMeasure {
    let mut angles: Vec<(f64, usize)> = Vec::new();
    for r in lf.roots() {
        // merge exactly repeated angles (exact mode produces them)
        if let Some(last) = angles.last_mut() {
            if last.0 == r.theta {
                last.1 += r.multiplicity;
                continue;
            }
        }
        angles.push((r.theta, r.multiplicity));
    }
    angles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // adjacent equal angles can appear after sorting too
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (t, m) in angles {
        if let Some(last) = merged.last_mut() {
            if last.0 == t {
                last.1 += m;
                continue;
            }
        }
        merged.push((t, m));
    }
    ZeroMeasure { angles: merged, total: lf.degree() }
}

impl ZeroMeasure {
    /// Conjugate symmetry: every (theta, m) with theta not in {0, pi} has a
    /// matching (-theta, m) within the tolerance.
    pub fn conjugate_symmetric(&self, tol: f64) -> bool {
        for (t, m) in &self.angles {
            if t.abs() < tol || (t - std::f64::consts::PI).abs() < tol {
                continue;
            }
            let found = self
                .angles
                .iter()
                .any(|(t2, m2)| (t2 + t).abs() < tol && m2 == m);
            if !found {
                return false;
            }
        }
        true
    }
}

/// (1/d) sum m_k cos(m theta_k); the zeroth moment is exactly 1. Paired
/// with the Dirichlet side through d * moment(mu, m) = -Lambda_m q^(-wm/2).
pub fn moment(mu: &ZeroMeasure, m: u32) -> f64 {
    if mu.total == 0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let s: f64 = mu
        .angles
        .iter()
        .map(|(t, mult)| *mult as f64 * (m as f64 * t).cos())
        .sum();
    s / mu.total as f64
}

/// Sine moments vanish identically by conjugate symmetry.
pub fn sine_moment(mu: &ZeroMeasure, m: u32) -> f64 {
    if mu.total == 0 {
        return 0.0;
    }
    let s: f64 = mu
        .angles
        .iter()
        .map(|(t, mult)| *mult as f64 * (m as f64 * t).sin())
        .sum();
    s / mu.total as f64
}

/// Density samples on the uniform periodic grid x_j = -pi + 2 pi j/N.
#[derive(Debug, Clone)]
pub struct DensitySamples {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation: usize,
    /// Bound on the dropped series tail (empirical for boundary data).
    pub tail_bound: f64,
    /// Set when the very-exact hypothesis was not established; the series
    /// is then a formal truncation.
    pub formal: bool,
}

pub const DEFAULT_GRID: usize = 4096;

pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect()
}

/// M_lim(x) = 1 - 2 sum_{k<=F} lambda_k cos(kx) q^(-wk/2).
pub fn limit_density(
    lambdas: &[f64],
    q: u64,
    w_essential: u32,
    grid_n: usize,
    very_exact: bool,
) -> DensitySamples {
    let grid = uniform_grid(grid_n);
    let qf = q as f64;
    let we = w_essential as f64;
    let coeffs: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| l * qf.powf(-we * (i + 1) as f64 / 2.0))
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|x| {
            let mut v = 1.0;
            for (i, c) in coeffs.iter().enumerate() {
                v -= 2.0 * c * ((i + 1) as f64 * x).cos();
            }
            v
        })
        .collect();
    // the dropped tail is 2 sum_{k>F} |coeff_k|, estimated geometrically
    // from the last observed terms
    let tail_bound = empirical_tail(&coeffs);
    DensitySamples { grid, values, truncation: lambdas.len(), tail_bound, formal: !very_exact }
}

fn empirical_tail(coeffs: &[f64]) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let last = coeffs[n - 1].abs();
    let prev = if n >= 2 { coeffs[n - 2].abs() } else { last };
    let ratio = if prev > 0.0 { (last / prev).min(0.9) } else { 0.5 };
    2.0 * last * ratio / (1.0 - ratio)
}

/// Curve-family density M(x) = 1 - sum_k k phi_k h_k(x) with
/// h_k(x) = (q^(k/2) cos(kx) - 1)/(q^k + 1 - 2 q^(k/2) cos(kx)).
///
/// Since |h_k| <= 1/(q^(k/2) - 1), the computed samples obey
/// min M >= 1 - S_F with S_F = sum_{k<=F} k phi_k/(q^(k/2) - 1), and the
/// limit data satisfy S_infinity <= 1 (the basic inequality). The reported
/// tail bound therefore covers both the finite-data defect max(0, S_F - 1)
/// and the dropped series tail under the remaining budget max(0, 1 - S_F).
pub fn curve_limit_density(phi: &[f64], q: u64, grid_n: usize) -> DensitySamples {
    let grid = uniform_grid(grid_n);
    let qf = q as f64;
    let values: Vec<f64> = grid
        .iter()
        .map(|x| {
            let mut v = 1.0;
            for (i, p) in phi.iter().enumerate() {
                let k = (i + 1) as f64;
                let c = (k * x).cos();
                let hk = (qf.powf(k / 2.0) * c - 1.0) / (qf.powf(k) + 1.0 - 2.0 * qf.powf(k / 2.0) * c);
                v -= k * p * hk;
            }
            v
        })
        .collect();
    let f_max = phi.len();
    let s_f: f64 = phi
        .iter()
        .enumerate()
        .map(|(i, p)| (i + 1) as f64 * p.abs() / (qf.powf((i + 1) as f64 / 2.0) - 1.0))
        .sum();
    let tail_bound = (s_f - 1.0).max(0.0) + (1.0 - s_f).max(0.0);
    DensitySamples { grid, values, truncation: f_max, tail_bound, formal: false }
}

/// lambda_f = (1/2) sum_{m | f} m phi_m: the curve-normalization bridge
/// between place counts and Dirichlet coefficients (per 2g, not g).
pub fn lambda_from_phi(phi: &[f64]) -> Vec<f64> {
    let n = phi.len();
    (1..=n)
        .map(|f| {
            let mut s = 0.0;
            for m in 1..=f {
                if f % m == 0 {
                    s += m as f64 * phi[m - 1];
                }
            }
            s / 2.0
        })
        .collect()
}

/// (1/2pi) integral of the sampled density against cos(mx) by the periodic
/// rectangle rule (spectrally accurate for trigonometric integrands).
pub fn density_cosine_moment(density: &DensitySamples, m: u32) -> f64 {
    let n = density.grid.len() as f64;
    density
        .grid
        .iter()
        .zip(&density.values)
        .map(|(x, v)| v * (m as f64 * x).cos())
        .sum::<f64>()
        / n
}

/// Per-bin comparison of empirical zero masses against the predicted
/// density integral.
#[derive(Debug, Clone)]
pub struct HistogramReport {
    /// Max |empirical - predicted| over bins, one entry per measure.
    pub max_deviation: Vec<f64>,
    /// Last measure's table: (bin_lo, bin_hi, empirical, predicted).
    pub bins: Vec<(f64, f64, f64, f64)>,
    /// Warning when bins > d/2 for the last measure.
    pub bin_too_fine: bool,
}

pub fn histogram_compare(
    measures: &[ZeroMeasure],
    density: &DensitySamples,
    bins: usize,
) -> HistogramReport {
    assert!(bins >= 1, "need at least one bin");
    assert!(!measures.is_empty(), "need at least one measure");
    let two_pi = 2.0 * std::f64::consts::PI;
    // predicted mass per bin from the grid samples
    let mut predicted = vec![0.0f64; bins];
    let n = density.grid.len() as f64;
    for (x, v) in density.grid.iter().zip(&density.values) {
        let idx = (((x + std::f64::consts::PI) / two_pi * bins as f64) as usize).min(bins - 1);
        predicted[idx] += v / n;
    }
    let mut max_deviation = Vec::with_capacity(measures.len());
    let mut last_bins = Vec::new();
    for (mi, mu) in measures.iter().enumerate() {
        let mut empirical = vec![0.0f64; bins];
        for (t, mult) in &mu.angles {
            // theta in (-pi, pi]: right-closed bins, top bin absorbs pi
            let frac = (t + std::f64::consts::PI) / two_pi;
            let idx = ((frac * bins as f64).ceil() as usize).clamp(1, bins) - 1;
            empirical[idx] += *mult as f64 / mu.total.max(1) as f64;
        }
        let dev = empirical
            .iter()
            .zip(&predicted)
            .map(|(e, p)| (e - p).abs())
            .fold(0.0, f64::max);
        max_deviation.push(dev);
        if mi == measures.len() - 1 {
            last_bins = (0..bins)
                .map(|k| {
                    let lo = -std::f64::consts::PI + two_pi * k as f64 / bins as f64;
                    let hi = lo + two_pi / bins as f64;
                    (lo, hi, empirical[k], predicted[k])
                })
                .collect();
        }
    }
    let bin_too_fine = bins > measures.last().unwrap().total / 2;
    HistogramReport { max_deviation, bins: last_bins, bin_too_fine }
}

/// Central multiplicity ratios r_k/d_tilde_k with a tail trend diagnostic;
/// the vanishing of the trend is a soft (asymptotic) expectation for very
/// exact families, reported but never asserted.
#[derive(Debug, Clone)]
pub struct RankRatioReport {
    pub ratios: Vec<f64>,
    /// Max ratio over the tail half.
    pub tail_max: f64,
    /// Ratios non-increasing over the tail half.
    pub trending_down: bool,
}

pub fn rank_ratio(central_r: &[i64], d_tildes: &[usize]) -> RankRatioReport {
    let ratios: Vec<f64> = central_r
        .iter()
        .zip(d_tildes)
        .map(|(r, d)| *r as f64 / (*d).max(1) as f64)
        .collect();
    let tail = &ratios[ratios.len() / 2..];
    let tail_max = tail.iter().cloned().fold(0.0, f64::max);
    let trending_down = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    RankRatioReport { ratios, tail_max, trending_down }
}

/// Slack of the family cosine inequality
/// sum lambda_k cos(kx) q^(-wk/2) <= 1/2 on the grid; equals M(x)/2.
pub fn cosine_inequality_slack(
    lambdas: &[f64],
    q: u64,
    w_essential: u32,
    grid_n: usize,
) -> Vec<(f64, f64)> {
    let qf = q as f64;
    let we = w_essential as f64;
    uniform_grid(grid_n)
        .into_iter()
        .map(|x| {
            let mut s = 0.0;
            for (i, l) in lambdas.iter().enumerate() {
                let k = (i + 1) as f64;
                s += l * (k * x).cos() * qf.powf(-we * k / 2.0);
            }
            (x, 0.5 - s)
        })
        .collect()
}
