//! Exact univariate polynomial arithmetic over the rationals, plus the
//! quadratic extension Q(sqrt(q)) needed for sign evaluations at points
//! like 2*q^(w/2) when q^w is not a perfect square.
//!
//! Everything here is exact: `BigRational` coefficients end to end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_int(n: &BigInt) -> Rat {
    Rat::from_integer(n.clone())
}

/// q^k for a rational base computed by repeated squaring (k >= 0).
pub fn rat_pow(base: &Rat, mut k: u64) -> Rat {
    let mut acc = Rat::one();
    let mut b = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        k >>= 1;
    }
    acc
}

/// Parse "3/4", "-7" or "0" into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(n))
        }
    }
}

/// Render a rational as "n" or "n/d".
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // Ratio<BigInt>'s ToPrimitive does the bit-scaled conversion, correct
    // for numerators and denominators of any size.
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Dense polynomial over Q, coefficients low-to-high, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    pub coeffs: Vec<Rat>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly { coeffs: vec![Rat::one()] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat_i64(i as i64))
            .collect();
        QPoly::new(coeffs)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        QPoly::new(out)
    }

    pub fn neg(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn scale(&self, k: &Rat) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Euclidean division; panics on division by zero.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let lead_inv = Rat::one() / d.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() < d.coeffs.len() {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let q = &rem[i] * &lead_inv;
            quot[i - dd] = q.clone();
            for (j, c) in d.coeffs.iter().enumerate() {
                let t = &q * c;
                rem[i - dd + j] -= t;
            }
        }
        (QPoly::new(quot), QPoly::new(rem))
    }

    /// Exact division; returns None if a nonzero remainder is left.
    pub fn exact_div(&self, d: &QPoly) -> Option<QPoly> {
        let (q, r) = self.div_rem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let inv = Rat::one() / self.leading();
        self.scale(&inv)
    }

    /// Monic gcd. Computed by the subresultant pseudo-remainder sequence
    /// over the integers (after clearing denominators), which keeps
    /// coefficient growth polynomial where plain rational Euclid explodes.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let a = to_int_primitive(self);
        let b = to_int_primitive(other);
        let g = int_gcd_subresultant(a, b);
        let q = QPoly::new(g.into_iter().map(Rat::from_integer).collect());
        q.monic()
    }

    /// Squarefree part self / gcd(self, self').
    pub fn squarefree_part(&self) -> QPoly {
        if self.deg() == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        if g.deg() == 0 {
            return self.monic();
        }
        self.exact_div(&g).expect("gcd divides").monic()
    }

    /// Yun's squarefree decomposition: returns [(factor, multiplicity)] with
    /// the factors squarefree, pairwise coprime, product-with-multiplicity
    /// equal to self up to the leading coefficient.
    pub fn squarefree_decomposition(&self) -> Vec<(QPoly, usize)> {
        let f = self.monic();
        if f.deg() == 0 {
            return vec![];
        }
        let df = f.derivative();
        let a0 = f.gcd(&df);
        if a0.deg() == 0 {
            return vec![(f, 1)];
        }
        let mut out = Vec::new();
        let mut b = f.exact_div(&a0).unwrap();
        let mut c = df.exact_div(&a0).unwrap();
        let mut d = c.sub(&b.derivative());
        let mut i = 1usize;
        while b.deg() > 0 {
            let a = b.gcd(&d);
            if a.deg() > 0 {
                out.push((a.clone(), i));
            }
            b = b.exact_div(&a).unwrap();
            c = d.exact_div(&a).unwrap();
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rat_to_f64).collect()
    }
}

/// Power sums p_1..p_n of the roots of the monic polynomial
/// T^d + c[0] T^(d-1) + ... + c[d-1], by Newton's identities.
pub fn power_sums_from_monic(c: &[Rat], n: usize) -> Vec<Rat> {
    let d = c.len();
    let mut p: Vec<Rat> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut s = Rat::zero();
        for i in 1..k.min(d + 1) {
            // c_i * p_{k-i}
            s += &c[i - 1] * &p[k - i - 1];
        }
        if k <= d {
            s += &c[k - 1] * rat_i64(k as i64);
        }
        p.push(-s);
    }
    p
}

/// Inverse direction: monic coefficients c_1..c_d from power sums p_1..p_d.
pub fn monic_from_power_sums(p: &[Rat]) -> Vec<Rat> {
    let d = p.len();
    let mut c: Vec<Rat> = Vec::with_capacity(d);
    for k in 1..=d {
        let mut s = p[k - 1].clone();
        for i in 1..k {
            s += &c[i - 1] * &p[k - i - 1];
        }
        c.push(-s / rat_i64(k as i64));
    }
    c
}

/// Primitive integer coefficient vector of a nonzero rational polynomial
/// (denominators cleared, content divided out, positive leading sign).
fn to_int_primitive(p: &QPoly) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for c in &p.coeffs {
        let d = c.denom();
        let g = gcd_int(&lcm, d);
        lcm = &lcm / &g * d;
    }
    let mut ints: Vec<BigInt> = p
        .coeffs
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    let mut content = BigInt::zero();
    for c in &ints {
        content = gcd_int(&content, c);
    }
    if !content.is_zero() && !content.is_one() {
        for c in ints.iter_mut() {
            *c = &*c / &content;
        }
    }
    if ints.last().map_or(false, |c| c.sign() == num_bigint::Sign::Minus) {
        for c in ints.iter_mut() {
            *c = -&*c;
        }
    }
    ints
}

fn gcd_int(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.gcd(b)
}

fn int_deg(p: &[BigInt]) -> usize {
    p.len().saturating_sub(1)
}

fn int_trim(p: &mut Vec<BigInt>) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

/// lc(b)^(deg a - deg b + 1) * a mod b over the integers. The scaling power
/// is exact even when intermediate leading terms vanish (the skipped rounds
/// are compensated at the end), which the subresultant divisions rely on.
fn int_pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = int_deg(b);
    let lb = b.last().unwrap().clone();
    let mut pending = int_deg(a) as i64 - db as i64 + 1;
    while !r.is_empty() && int_deg(&r) >= db && r.len() > db {
        let lr = r.last().unwrap().clone();
        let k = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c = &*c * &lb;
        }
        for (j, bc) in b.iter().enumerate() {
            r[k + j] -= bc * &lr;
        }
        int_trim(&mut r);
        pending -= 1;
    }
    for _ in 0..pending.max(0) {
        for c in r.iter_mut() {
            *c = &*c * &lb;
        }
    }
    r
}

fn int_primitive_part(mut p: Vec<BigInt>) -> Vec<BigInt> {
    let mut content = BigInt::zero();
    for c in &p {
        content = gcd_int(&content, c);
    }
    if !content.is_zero() && !content.is_one() {
        for c in p.iter_mut() {
            *c = &*c / &content;
        }
    }
    p
}

/// Subresultant polynomial remainder sequence gcd for primitive inputs.
fn int_gcd_subresultant(a: Vec<BigInt>, b: Vec<BigInt>) -> Vec<BigInt> {
    let (mut a, mut b) = if int_deg(&a) >= int_deg(&b) { (a, b) } else { (b, a) };
    if b.is_empty() {
        return a;
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = int_deg(&a) - int_deg(&b);
        let rem = int_pseudo_rem(&a, &b);
        if rem.is_empty() {
            return int_primitive_part(b);
        }
        if int_deg(&rem) == 0 {
            return vec![BigInt::one()];
        }
        a = b;
        // divide the remainder by g * h^delta (exact in the subresultant PRS)
        let mut divisor = g.clone();
        for _ in 0..delta {
            divisor *= &h;
        }
        b = rem.into_iter().map(|c| c / &divisor).collect();
        g = a.last().unwrap().clone();
        // h = g^delta * h^(1 - delta)
        if delta == 0 {
            // h unchanged
        } else {
            let mut gp = BigInt::one();
            for _ in 0..delta {
                gp *= &g;
            }
            let mut hp = BigInt::one();
            for _ in 0..delta.saturating_sub(1) {
                hp *= &h;
            }
            h = gp / hp;
        }
    }
}

/// An element a + b*sqrt(disc) of Q(sqrt(disc)), disc a positive integer.
/// Representation is not assumed canonical when disc is a perfect square;
/// arithmetic and exact sign evaluation work either way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExt {
    pub a: Rat,
    pub b: Rat,
    pub disc: u64,
}

impl QuadExt {
    pub fn rational(a: Rat, disc: u64) -> Self {
        QuadExt { a, b: Rat::zero(), disc }
    }

    pub fn new(a: Rat, b: Rat, disc: u64) -> Self {
        QuadExt { a, b, disc }
    }

    pub fn zero(disc: u64) -> Self {
        QuadExt::rational(Rat::zero(), disc)
    }

    pub fn is_zero(&self) -> bool {
        // a + b*sqrt(d) = 0 with d > 0: either both zero, or d is a perfect
        // square of a rational that cancels a against b.
        if self.a.is_zero() && self.b.is_zero() {
            return true;
        }
        if self.a.is_zero() || self.b.is_zero() {
            return false;
        }
        if self.a.is_positive() == self.b.is_positive() {
            return false;
        }
        &self.a * &self.a == &self.b * &self.b * rat_i64(self.disc as i64)
    }

    pub fn add(&self, o: &QuadExt) -> QuadExt {
        QuadExt::new(&self.a + &o.a, &self.b + &o.b, self.disc)
    }

    pub fn neg(&self) -> QuadExt {
        QuadExt::new(-self.a.clone(), -self.b.clone(), self.disc)
    }

    pub fn mul(&self, o: &QuadExt) -> QuadExt {
        let d = rat_i64(self.disc as i64);
        QuadExt::new(
            &self.a * &o.a + &self.b * &o.b * d,
            &self.a * &o.b + &self.b * &o.a,
            self.disc,
        )
    }

    pub fn mul_rat(&self, r: &Rat) -> QuadExt {
        QuadExt::new(&self.a * r, &self.b * r, self.disc)
    }

    /// Exact sign: -1, 0, +1.
    pub fn sign(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let sa = if self.a.is_zero() { 0 } else if self.a.is_positive() { 1 } else { -1 };
        let sb = if self.b.is_zero() { 0 } else if self.b.is_positive() { 1 } else { -1 };
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: compare a^2 against b^2 * disc.
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * rat_i64(self.disc as i64);
        if lhs == rhs {
            0
        } else if lhs > rhs {
            sa
        } else {
            sb
        }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.a) + rat_to_f64(&self.b) * (self.disc as f64).sqrt()
    }
}

/// Evaluate a rational polynomial at a QuadExt point.
pub fn eval_quad(p: &QPoly, x: &QuadExt) -> QuadExt {
    let mut acc = QuadExt::zero(x.disc);
    for c in p.coeffs.iter().rev() {
        acc = acc.mul(x).add(&QuadExt::rational(c.clone(), x.disc));
    }
    acc
}

/// Sturm chain of a polynomial (intended for squarefree input).
pub struct SturmChain {
    chain: Vec<QPoly>,
}

impl SturmChain {
    pub fn new(f: &QPoly) -> Self {
        let mut chain = vec![f.clone(), f.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(r.neg());
        }
        SturmChain { chain }
    }

    fn variations_at(&self, x: &QuadExt) -> usize {
        let mut count = 0;
        let mut last = 0i32;
        for p in &self.chain {
            let s = eval_quad(p, x).sign();
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct real roots in the open interval (lo, hi).
    /// Assumes f(lo) != 0 and f(hi) != 0.
    pub fn count_roots_in(&self, lo: &QuadExt, hi: &QuadExt) -> usize {
        self.variations_at(lo).saturating_sub(self.variations_at(hi))
    }
}
