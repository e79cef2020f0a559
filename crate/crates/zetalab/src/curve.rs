//! Zeta functions of curves over F_q from brute-force point counts:
//! hyperelliptic models y^2 = f(x) in odd characteristic, numerator
//! reconstruction P(u), the class number h = P(1), and Euler-Kronecker
//! constants from the Taylor expansion of zeta'/zeta at s = 1.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::field::{
    extension_field, factor_poly, Embedding, FieldError, FieldSpec, UniPoly, FIELD_SIZE_GUARD,
};
use crate::lfun::{validate_lfunction, LFunction, LfunError, Mode, ZetaFunction};
use crate::qpoly::{format_rat, rat_i64, rat_pow, rat_to_f64, Rat};

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("hyperelliptic point counting requires odd characteristic, got p = {0}")]
    EvenCharacteristic(u64),
    #[error("f must be squarefree (gcd(f, f') = 1)")]
    NotSquarefree,
    #[error("size guard exceeded: {0}")]
    SizeGuardExceeded(String),
    #[error("expected exactly {expected} point counts, got {got}")]
    WrongCountLength { expected: usize, got: usize },
    #[error("reconstructed coefficient a_{0} is not an integer")]
    NonIntegerCoefficient(usize),
    #[error("h = P(1) = {0} is not positive; counts are not from a curve")]
    NonPositiveClassNumber(BigInt),
    #[error("Moebius inversion gives Phi_{f} = {value}, not a non-negative integer")]
    NegativePhi { f: usize, value: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Lfun(#[from] LfunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    HyperellipticOddChar,
    EllipticWeierstrass,
}

/// A smooth hyperelliptic model y^2 = f(x) over F_q, p odd, f squarefree of
/// degree 2g+1 or 2g+2.
#[derive(Debug, Clone)]
pub struct CurveModel {
    pub kind: CurveKind,
    pub base: FieldSpec,
    pub f: UniPoly,
    pub genus: usize,
}

impl CurveModel {
    pub fn new(base: FieldSpec, f: UniPoly) -> Result<CurveModel, CurveError> {
        if base.p == 2 {
            return Err(CurveError::EvenCharacteristic(2));
        }
        if f.deg() < 1 || f.is_zero() {
            return Err(CurveError::NotSquarefree);
        }
        if !base.poly_is_squarefree(&f) {
            return Err(CurveError::NotSquarefree);
        }
        let deg = f.deg();
        let genus = (deg - 1) / 2;
        let kind = if deg == 3 {
            CurveKind::EllipticWeierstrass
        } else {
            CurveKind::HyperellipticOddChar
        };
        Ok(CurveModel { kind, base, f, genus })
    }

    /// N_f: points of the smooth projective model over F_{q^f}, by the
    /// quadratic character: each affine x contributes 1 + chi(f(x)) (so one
    /// point when f(x) = 0), plus the points at infinity (one for odd
    /// deg f; for even deg f, two when the leading coefficient is a square
    /// in F_{q^f} and none otherwise).
    pub fn count_points(&self, f_ext: u32) -> Result<u64, CurveError> {
        let big_e = self.base.e * f_ext;
        let size = (self.base.p as u128).pow(big_e);
        if size > FIELD_SIZE_GUARD as u128 {
            return Err(CurveError::SizeGuardExceeded(format!(
                "enumerating q^{f_ext} = {size} elements"
            )));
        }
        let big = if f_ext == 1 {
            self.base.clone()
        } else {
            extension_field(&self.base, f_ext)?
        };
        let emb = Embedding::new(&self.base, &big)?;
        let coeffs: Vec<_> = self.f.coeffs.iter().map(|c| emb.apply(c)).collect();
        let chi = big.quadratic_character_table();
        let mut count: i64 = 0;
        for idx in 0..big.q {
            let x = big.from_index(idx);
            let mut acc = big.zero();
            for c in coeffs.iter().rev() {
                acc = big.mul(&acc, &x);
                acc = big.add(&acc, c);
            }
            count += 1 + chi[big.index(&acc) as usize] as i64;
        }
        if self.f.deg() % 2 == 1 {
            count += 1;
        } else {
            let lead = emb.apply(&self.f.leading(&self.base));
            if chi[big.index(&lead) as usize] == 1 {
                count += 2;
            }
        }
        Ok(count as u64)
    }
}


/// A curve zeta function assembled from point counts.
#[derive(Debug, Clone)]
pub struct CurveZeta {
    /// The brute-force or ingested counts N_1..N_B (B >= g).
    pub counts: Vec<u64>,
    /// Numerator P(u): weight 1, degree 2g, exact integer coefficients.
    pub numerator: LFunction,
    /// Class number h = P(1) = |Pic^0|.
    pub h: BigInt,
    /// Euler-Kronecker constants gamma^0..gamma^K at s = 1.
    pub gammas: Vec<f64>,
}

/// Default truncation order for the cached Euler-Kronecker expansion.
pub const DEFAULT_GAMMA_ORDER: usize = 8;

impl CurveZeta {
    pub fn genus(&self) -> usize {
        self.numerator.degree() / 2
    }

    pub fn q(&self) -> u64 {
        self.numerator.q()
    }

    /// The full zeta function P(u)/((1-u)(1-qu)) as a signed factor product.
    pub fn zeta(&self) -> ZetaFunction {
        let q = self.q();
        let l0 = validate_lfunction(q, 0, vec![Rat::one(), -Rat::one()], Mode::Exact)
            .expect("1-u is a valid weight-0 factor");
        let l2 = validate_lfunction(q, 2, vec![Rat::one(), -rat_i64(q as i64)], Mode::Exact)
            .expect("1-qu is a valid weight-2 factor");
        ZetaFunction::new(vec![(l0, -1), (self.numerator.clone(), 1), (l2, -1)])
            .expect("weights 0 < 1 < 2")
    }

    /// N_f predicted by the numerator polynomial: Lambda_f(P) + 1 + q^f.
    pub fn predicted_count(&self, f: usize) -> BigInt {
        let lam = self.numerator.lambda_coeffs(f);
        let v = &lam.values[f - 1] + Rat::one() + rat_pow(&rat_i64(self.q() as i64), f as u64);
        debug_assert!(v.denom().is_one());
        v.numer().clone()
    }
}

/// Reconstruct the zeta numerator from counts N_1..N_g: Lambda_f(P) =
/// N_f - 1 - q^f for f <= g, extended to degree 2g by the functional-equation
/// coefficient symmetry a_{2g-i} = q^(g-i) a_i, then validated (weight 1).
pub fn zeta_from_counts(
    q: u64,
    genus: usize,
    counts: &[u64],
    mode: Mode,
) -> Result<CurveZeta, CurveError> {
    if counts.len() != genus {
        return Err(CurveError::WrongCountLength { expected: genus, got: counts.len() });
    }
    // power sums of reciprocal roots: p_f = -Lambda_f
    let mut psums: Vec<Rat> = Vec::with_capacity(genus);
    for (i, &n) in counts.iter().enumerate() {
        let f = (i + 1) as u64;
        let lam = rat_i64(n as i64) - Rat::one() - rat_pow(&rat_i64(q as i64), f);
        psums.push(-lam);
    }
    // Newton's identities, incrementally, for a_1..a_g
    let mut a: Vec<Rat> = Vec::with_capacity(genus);
    for k in 1..=genus {
        let mut s = psums[k - 1].clone();
        for i in 1..k {
            s += &a[i - 1] * &psums[k - i - 1];
        }
        a.push(-s / rat_i64(k as i64));
    }
    let mut coeffs = vec![Rat::one()];
    coeffs.extend(a.iter().cloned());
    // a_{2g-i} = q^(g-i) a_i for i = g-1 .. 0
    for i in (0..genus).rev() {
        let v = &coeffs[i] * rat_pow(&rat_i64(q as i64), (genus - i) as u64);
        coeffs.push(v);
    }
    for (i, c) in coeffs.iter().enumerate() {
        if !c.denom().is_one() {
            return Err(CurveError::NonIntegerCoefficient(i));
        }
    }
    let numerator = validate_lfunction(q, 1, coeffs.clone(), mode)?;
    let h: Rat = coeffs.iter().sum();
    let h = h.numer().clone();
    if !h.is_positive() {
        return Err(CurveError::NonPositiveClassNumber(h));
    }
    let gammas = euler_kronecker_from_numerator(&numerator, DEFAULT_GAMMA_ORDER);
    Ok(CurveZeta { counts: counts.to_vec(), numerator, h, gammas })
}

/// Count points of a model and build its zeta function.
pub fn zeta_from_model(model: &CurveModel, mode: Mode) -> Result<CurveZeta, CurveError> {
    let mut counts = Vec::with_capacity(model.genus);
    for f in 1..=model.genus {
        counts.push(model.count_points(f as u32)?);
    }
    zeta_from_counts(model.base.q, model.genus, &counts, mode)
}

/// Euler-Kronecker constants gamma^0..gamma^K of a curve zeta.
pub fn euler_kronecker(z: &CurveZeta, k_max: usize) -> Vec<f64> {
    euler_kronecker_from_numerator(&z.numerator, k_max)
}

/// Taylor coefficients of zeta'/zeta(s) + 1/(s-1) at s = 1, computed by
/// exact series manipulation in eps = s - 1 with u = (1/q) e^(-eps log q).
/// Coefficients live in Q[log q] until the final evaluation, so no
/// cancellation happens near the pole.
pub fn euler_kronecker_from_numerator(numerator: &LFunction, k_max: usize) -> Vec<f64> {
    let q = numerator.q();
    let series = euler_kronecker_series(&numerator.coeffs().to_vec(), q, k_max);
    let lnq = (q as f64).ln();
    series.iter().map(|lp| eval_lpoly(lp, lnq)).collect()
}

/// Exact-symbolic gamma coefficients in Q[L], L standing for log q.
/// Returns k_max + 1 polynomials-in-L as rational coefficient vectors.
pub fn euler_kronecker_series(p_coeffs: &[Rat], q: u64, k_max: usize) -> Vec<Vec<Rat>> {
    let n = k_max + 1;
    // u(eps) = (1/q) sum (-L)^m eps^m / m!
    let qinv = Rat::one() / rat_i64(q as i64);
    let mut u = LSeries::zero(n);
    let mut fact = Rat::one();
    for m in 0..n {
        if m > 0 {
            fact *= rat_i64(m as i64);
        }
        // coefficient of eps^m: (1/q) (-1)^m L^m / m!
        let mut lp = vec![Rat::zero(); m + 1];
        let sign = if m % 2 == 0 { Rat::one() } else { -Rat::one() };
        lp[m] = &qinv * sign / &fact;
        u.coeffs[m] = lp;
    }
    // L * u(eps)
    let lu = u.mul_l();

    // P(u(eps)) and P'(u(eps)) by series Horner
    let p_at_u = compose_poly(p_coeffs, &u, n);
    let dp_coeffs: Vec<Rat> = p_coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * rat_i64(i as i64))
        .collect();
    let dp_at_u = compose_poly(&dp_coeffs, &u, n);

    // piece 1: -L u P'(u)/P(u)
    let piece1 = lu.mul(&dp_at_u).div(&p_at_u).neg();
    // piece 2: -L u/(1 - u)
    let one_minus_u = LSeries::constant(Rat::one(), n).sub(&u);
    let piece2 = lu.div(&one_minus_u).neg();
    // piece 3: the regularized pole factor -L q u/(1 - q u) + 1/eps
    //        = L/2 - sum_{m>=2} (B_m/m!) L^m eps^(m-1)
    let bern = bernoulli(n + 1);
    let mut piece3 = LSeries::zero(n);
    {
        let mut lp = vec![Rat::zero(); 2];
        lp[1] = Rat::new(BigInt::one(), BigInt::from(2));
        piece3.coeffs[0] = lp; // L/2
    }
    for m in 2..=n {
        if bern[m].is_zero() {
            continue;
        }
        let fact: Rat = (1..=m as i64).map(rat_i64).product();
        let mut lp = vec![Rat::zero(); m + 1];
        lp[m] = -&bern[m] / &fact;
        piece3.coeffs[m - 1] = add_lpoly(&piece3.coeffs[m - 1], &lp);
    }

    piece1.add(&piece2).add(&piece3).coeffs
}

/// Bernoulli numbers B_0..B_n (B_1 = -1/2 convention), by the recurrence
/// sum_{j=0}^{m} C(m+1, j) B_j = 0.
fn bernoulli(n: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rat::one());
            continue;
        }
        let mut s = Rat::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            s += Rat::from_integer(binom.clone()) * bj;
            binom = &binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        // C(m+1, m) = m+1
        b.push(-s / rat_i64((m + 1) as i64));
    }
    b
}

/// Truncated power series in eps with coefficients in Q[L].
#[derive(Debug, Clone)]
struct LSeries {
    coeffs: Vec<Vec<Rat>>,
}

fn add_lpoly(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    while out.last().map_or(false, |c| c.is_zero()) {
        out.pop();
    }
    out
}

fn mul_lpoly(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn eval_lpoly(a: &[Rat], l: f64) -> f64 {
    let mut acc = 0.0;
    for c in a.iter().rev() {
        acc = acc * l + rat_to_f64(c);
    }
    acc
}

impl LSeries {
    fn zero(n: usize) -> LSeries {
        LSeries { coeffs: vec![vec![]; n] }
    }

    fn constant(c: Rat, n: usize) -> LSeries {
        let mut s = LSeries::zero(n);
        s.coeffs[0] = vec![c];
        s
    }

    fn order(&self) -> usize {
        self.coeffs.len()
    }

    fn add(&self, o: &LSeries) -> LSeries {
        LSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| add_lpoly(a, b))
                .collect(),
        }
    }

    fn sub(&self, o: &LSeries) -> LSeries {
        self.add(&o.neg())
    }

    fn neg(&self) -> LSeries {
        LSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|a| a.iter().map(|c| -c.clone()).collect())
                .collect(),
        }
    }

    fn mul(&self, o: &LSeries) -> LSeries {
        let n = self.order();
        let mut out = LSeries::zero(n);
        for i in 0..n {
            if self.coeffs[i].is_empty() {
                continue;
            }
            for j in 0..n - i {
                if o.coeffs[j].is_empty() {
                    continue;
                }
                let prod = mul_lpoly(&self.coeffs[i], &o.coeffs[j]);
                out.coeffs[i + j] = add_lpoly(&out.coeffs[i + j], &prod);
            }
        }
        out
    }

    /// Multiply by the symbol L.
    fn mul_l(&self) -> LSeries {
        LSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|a| {
                    if a.is_empty() {
                        vec![]
                    } else {
                        let mut v = vec![Rat::zero()];
                        v.extend(a.iter().cloned());
                        v
                    }
                })
                .collect(),
        }
    }

    /// Division by a series whose constant term is a nonzero rational.
    fn div(&self, o: &LSeries) -> LSeries {
        let n = self.order();
        assert_eq!(o.coeffs[0].len(), 1, "divisor constant term must be rational");
        let b0 = o.coeffs[0][0].clone();
        assert!(!b0.is_zero());
        let mut out = LSeries::zero(n);
        for k in 0..n {
            let mut acc = self.coeffs[k].clone();
            for i in 0..k {
                if out.coeffs[i].is_empty() || o.coeffs[k - i].is_empty() {
                    continue;
                }
                let prod = mul_lpoly(&out.coeffs[i], &o.coeffs[k - i]);
                let neg: Vec<Rat> = prod.iter().map(|c| -c.clone()).collect();
                acc = add_lpoly(&acc, &neg);
            }
            out.coeffs[k] = acc.iter().map(|c| c / &b0).collect();
        }
        out
    }
}

/// P(u(eps)) truncated, by Horner over the series ring.
fn compose_poly(p: &[Rat], u: &LSeries, n: usize) -> LSeries {
    let mut acc = LSeries::zero(n);
    for c in p.iter().rev() {
        acc = acc.mul(u);
        acc.coeffs[0] = add_lpoly(&acc.coeffs[0], &[c.clone()]);
    }
    acc
}

/// Depth to which finite-member phi_f = Phi_f/g estimates carry information:
/// the limit values satisfy f phi_f <= q^(f/2) - 1, while a single curve's
/// ratio Phi_f/g grows like q^f/(f g), so estimates past ~2 log_q(g) are
/// dominated by the member's own point growth rather than the family limit.
pub fn meaningful_phi_depth(q: u64, genus: usize) -> usize {
    let g = genus.max(1) as f64;
    let depth = (2.0 * g.ln() / (q as f64).ln()).ceil() as usize;
    depth.clamp(2, 8)
}

/// Moebius inversion of N_f = sum_{m|f} m Phi_m; every Phi_f must come out
/// a non-negative integer.
pub fn phi_from_counts(counts: &[u64]) -> Result<Vec<BigInt>, CurveError> {
    let mut phis: Vec<BigInt> = Vec::with_capacity(counts.len());
    for f in 1..=counts.len() {
        let mut s = Rat::zero();
        for m in 1..=f {
            if f % m == 0 {
                let mu = moebius_i64((f / m) as u64);
                if mu != 0 {
                    s += rat_i64(mu) * rat_i64(counts[m - 1] as i64);
                }
            }
        }
        let phi = s / rat_i64(f as i64);
        if !phi.denom().is_one() || phi.is_negative() {
            return Err(CurveError::NegativePhi { f, value: format_rat(&phi) });
        }
        phis.push(phi.numer().clone());
    }
    Ok(phis)
}

fn moebius_i64(n: u64) -> i64 {
    let mut m = n;
    let mut count = 0;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return 0;
            }
            count += 1;
        }
        d += 1;
    }
    if m > 1 {
        count += 1;
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All squarefree monic polynomials of the given degree over the field, in
/// deterministic index order (batch-mode enumeration).
pub fn squarefree_monic_polys(
    field: &FieldSpec,
    degree: usize,
) -> Result<Vec<UniPoly>, CurveError> {
    let total = (field.q as u128).pow(degree as u32);
    if total > FIELD_SIZE_GUARD as u128 {
        return Err(CurveError::SizeGuardExceeded(format!(
            "enumerating {total} polynomials"
        )));
    }
    let mut out = Vec::new();
    let mut idx = vec![0u64; degree];
    loop {
        let mut coeffs: Vec<_> = idx.iter().map(|&i| field.from_index(i)).collect();
        coeffs.push(field.one());
        let f = UniPoly { coeffs };
        if field.poly_is_squarefree(&f) {
            out.push(f);
        }
        let mut i = 0;
        while i < degree {
            idx[i] += 1;
            if idx[i] < field.q {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == degree {
            break;
        }
    }
    Ok(out)
}

/// Places (monic irreducible factors with multiplicity) dividing f.
pub fn bad_places(field: &FieldSpec, f: &UniPoly) -> Result<Vec<(UniPoly, usize)>, CurveError> {
    Ok(factor_poly(field, f)?)
}
