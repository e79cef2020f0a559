//! Arithmetic in F_q and its extensions F_{q^f} (q = p^e, desk scale),
//! univariate polynomials over these fields, irreducible enumeration, and
//! trial-division factorization.
//!
//! Extension towers are always built over the prime field: F_{q^f} is
//! F_p[t]/(modulus of degree e*f), with the subfield embedding computed
//! once from the kernel of Frobenius^e - id. Moduli are chosen
//! deterministically (lexicographically smallest monic irreducible,
//! constant term first), so every run reproduces the same tower.

use thiserror::Error;

/// Elements larger than this never get enumerated.
pub const FIELD_SIZE_GUARD: u64 = 1 << 22;
/// FieldSpec construction guard on q = p^e.
pub const FIELD_SPEC_GUARD: u64 = 1 << 20;
/// Max degree for exhaustive irreducible enumeration.
pub const IRREDUCIBLE_DEGREE_GUARD: usize = 12;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("size guard exceeded: {0}")]
    SizeGuardExceeded(String),
    #[error("no subfield embedding: {0}")]
    NoSubfieldEmbedding(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// An element of F_{p^e}: coordinate vector of length e over F_p in the
/// modulus basis, coordinates reduced mod p.
pub type Elt = Vec<u64>;

/// F_q with q = p^e, carrying its deterministically chosen modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u64,
    pub e: u32,
    pub q: u64,
    /// Monic irreducible of degree e over F_p, constant term first.
    pub modulus: Vec<u64>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// Build F_{p^e} with the lexicographically smallest monic irreducible
    /// modulus of degree e (constant term first).
    pub fn new(p: u64, e: u32) -> Result<FieldSpec, FieldError> {
        Self::with_guard(p, e, FIELD_SPEC_GUARD)
    }

    /// Like `new`, with a caller-chosen size guard; enumeration-scale
    /// extension fields go up to FIELD_SIZE_GUARD.
    pub fn with_guard(p: u64, e: u32, guard: u64) -> Result<FieldSpec, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::InvalidArgument("extension degree e must be >= 1".into()));
        }
        let mut q: u64 = 1;
        for _ in 0..e {
            q = q.checked_mul(p).filter(|&v| v <= guard).ok_or_else(|| {
                FieldError::SizeGuardExceeded(format!("q = {p}^{e} exceeds {guard}"))
            })?;
        }
        let modulus = deterministic_modulus(p, e as usize);
        Ok(FieldSpec { p, e, q, modulus })
    }

    pub fn zero(&self) -> Elt {
        vec![0; self.e as usize]
    }

    pub fn one(&self) -> Elt {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    /// The class of t, generating the field over F_p when e > 1.
    pub fn gen(&self) -> Elt {
        let mut v = self.zero();
        if self.e > 1 {
            v[1] = 1;
        }
        v
    }

    pub fn is_zero(&self, x: &Elt) -> bool {
        x.iter().all(|&c| c == 0)
    }

    pub fn from_int(&self, n: i64) -> Elt {
        let mut v = self.zero();
        v[0] = n.rem_euclid(self.p as i64) as u64;
        v
    }

    /// Mixed-radix index in [0, q): sum x_i p^i.
    pub fn index(&self, x: &Elt) -> u64 {
        let mut idx = 0u64;
        for &c in x.iter().rev() {
            idx = idx * self.p + c;
        }
        idx
    }

    pub fn from_index(&self, mut idx: u64) -> Elt {
        let mut v = self.zero();
        for c in v.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        v
    }

    /// All field elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Elt> + '_ {
        (0..self.q).map(move |i| self.from_index(i))
    }

    pub fn add(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(&x, &y)| (x + self.p - y) % self.p).collect()
    }

    pub fn neg(&self, a: &Elt) -> Elt {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        let e = self.e as usize;
        if e == 1 {
            return vec![a[0] * b[0] % self.p];
        }
        // schoolbook product, then reduction by the monic modulus
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        self.reduce(&mut prod);
        prod
    }

    fn reduce(&self, prod: &mut Vec<u64>) {
        let e = self.e as usize;
        for i in (e..prod.len()).rev() {
            let c = prod[i];
            if c != 0 {
                prod[i] = 0;
                // t^e = -(m_0 + m_1 t + ... + m_{e-1} t^{e-1})
                for j in 0..e {
                    let m = self.modulus[j];
                    if m != 0 {
                        let sub = c * m % self.p;
                        prod[i - e + j] = (prod[i - e + j] + self.p - sub) % self.p;
                    }
                }
            }
        }
        prod.resize(e, 0);
    }

    pub fn pow(&self, a: &Elt, mut k: u64) -> Elt {
        let mut acc = self.one();
        let mut b = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            k >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &Elt) -> Elt {
        assert!(!self.is_zero(a), "inverse of zero");
        self.pow(a, self.q - 2)
    }

    pub fn frobenius(&self, a: &Elt) -> Elt {
        self.pow(a, self.p)
    }

    /// Quadratic character values indexed by element index:
    /// chi(0) = 0, chi(square) = 1, chi(non-square) = -1. Odd p only.
    pub fn quadratic_character_table(&self) -> Vec<i8> {
        assert!(self.p != 2, "quadratic character needs odd characteristic");
        let mut table = vec![-1i8; self.q as usize];
        table[0] = 0;
        for i in 1..self.q {
            let x = self.from_index(i);
            let sq = self.mul(&x, &x);
            table[self.index(&sq) as usize] = 1;
        }
        table
    }
}

/// Polynomial helpers over F_p (dense, constant first) for modulus selection.
mod fp {
    pub fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut prod = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        rem(&mut prod, m, p);
        prod
    }

    /// prod mod m in place (m monic).
    pub fn rem(prod: &mut Vec<u64>, m: &[u64], p: u64) {
        let dm = m.len() - 1;
        trim(prod);
        while prod.len() > dm {
            let c = *prod.last().unwrap();
            let top = prod.len() - 1;
            if c != 0 {
                for (j, &mj) in m.iter().enumerate() {
                    let idx = top - dm + j;
                    let sub = c * mj % p;
                    prod[idx] = (prod[idx] + p - sub) % p;
                }
            }
            prod.pop();
            trim(prod);
        }
    }

    pub fn pow_mod(base: &[u64], mut k: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = base.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                acc = mul_mod(&acc, &b, m, p);
            }
            b = mul_mod(&b, &b, m, p);
            k >>= 1;
        }
        acc
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let lead_inv = inv_mod_p(*y.last().unwrap(), p);
            let ym: Vec<u64> = y.iter().map(|&c| c * lead_inv % p).collect();
            let mut r = x.clone();
            rem(&mut r, &ym, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn inv_mod_p(a: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        let mut b = a % p;
        let mut k = p - 2;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            k >>= 1;
        }
        acc
    }
}

/// Irreducibility over F_p: x^(p^e) = x mod f, and gcd(x^(p^(e/l)) - x, f) = 1
/// for every prime l dividing e (distinct-degree style test).
fn is_irreducible_fp(f: &[u64], p: u64) -> bool {
    let e = f.len() - 1;
    let x = vec![0u64, 1];
    let frob_power = |k: usize| -> Vec<u64> {
        let mut acc = x.clone();
        for _ in 0..k {
            acc = fp::pow_mod(&acc, p, f, p);
        }
        acc
    };
    let xq = frob_power(e);
    if !poly_sub_fp(&xq, &x, p).is_empty() {
        return false;
    }
    let mut m = e;
    let mut primes = vec![];
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            primes.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for l in primes {
        let sub = frob_power(e / l);
        let diff = poly_sub_fp(&sub, &x, p);
        if diff.is_empty() {
            return false;
        }
        let g = fp::gcd(&diff, f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn poly_sub_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    fp::trim(&mut out);
    out
}

/// The degree-`factor` extension F_{q^factor} of `base`, built over the prime
/// field, allowed up to the enumeration guard.
pub fn extension_field(base: &FieldSpec, factor: u32) -> Result<FieldSpec, FieldError> {
    if factor == 1 {
        return Ok(base.clone());
    }
    FieldSpec::with_guard(base.p, base.e * factor, FIELD_SIZE_GUARD)
}

/// The deterministic modulus for F_{p^e}: t itself for e = 1, else the
/// lexicographically smallest monic irreducible of degree e.
pub fn deterministic_modulus(p: u64, e: usize) -> Vec<u64> {
    if e == 1 {
        vec![0, 1]
    } else {
        smallest_irreducible_fp(p, e)
    }
}

/// Lexicographically smallest monic irreducible of degree e over F_p,
/// constant-first coefficient order.
fn smallest_irreducible_fp(p: u64, e: usize) -> Vec<u64> {
    let mut coeffs = vec![0u64; e + 1];
    coeffs[e] = 1;
    loop {
        if coeffs[0] != 0 && is_irreducible_fp(&coeffs, p) {
            return coeffs;
        }
        // advance (c_0, ..., c_{e-1}) lexicographically: c_0 is most
        // significant, so increment from the tail.
        let mut i = e - 1;
        loop {
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            if i == 0 {
                unreachable!("an irreducible of every degree exists");
            }
            i -= 1;
        }
    }
}

/// Ring homomorphism F_{p^e} -> F_{p^(e*f)}, computed once per field pair.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub small: FieldSpec,
    pub big: FieldSpec,
    /// Powers 1, alpha, ..., alpha^(e-1) of the image of the small generator.
    gen_powers: Vec<Elt>,
}

impl Embedding {
    /// The canonical embedding: alpha is the lexicographically smallest root
    /// of the small modulus inside the fixed field of Frobenius^e.
    pub fn new(small: &FieldSpec, big: &FieldSpec) -> Result<Embedding, FieldError> {
        if small.p != big.p {
            return Err(FieldError::NoSubfieldEmbedding("different characteristic".into()));
        }
        if big.e % small.e != 0 {
            return Err(FieldError::NoSubfieldEmbedding(format!(
                "degree {} does not divide {}",
                small.e, big.e
            )));
        }
        if small.e == big.e {
            // identical deterministic modulus: identity map
            let mut gen_powers = Vec::with_capacity(small.e as usize);
            let mut acc = big.one();
            for _ in 0..small.e {
                gen_powers.push(acc.clone());
                acc = big.mul(&acc, &big.gen());
            }
            return Ok(Embedding { small: small.clone(), big: big.clone(), gen_powers });
        }

        let p = big.p;
        let ebig = big.e as usize;
        // Columns of Frobenius^e_small - id in the power basis.
        let mut cols: Vec<Elt> = Vec::with_capacity(ebig);
        for j in 0..ebig {
            let mut basis = big.zero();
            basis[j] = 1;
            let mut img = basis.clone();
            for _ in 0..small.e {
                img = big.frobenius(&img);
            }
            cols.push(big.sub(&img, &basis));
        }
        let kernel = kernel_basis(&cols, p, ebig);
        let count = (p as u128).pow(kernel.len() as u32);
        if count > FIELD_SIZE_GUARD as u128 {
            return Err(FieldError::SizeGuardExceeded("subfield enumeration too large".into()));
        }
        let mut best: Option<Elt> = None;
        let mut combo = vec![0u64; kernel.len()];
        loop {
            let mut alpha = big.zero();
            for (c, k) in combo.iter().zip(&kernel) {
                if *c != 0 {
                    for (i, &ki) in k.iter().enumerate() {
                        alpha[i] = (alpha[i] + c * ki) % p;
                    }
                }
            }
            if big.is_zero(&eval_fp_poly_in(big, &small.modulus, &alpha)) {
                match &best {
                    None => best = Some(alpha),
                    Some(b) if alpha < *b => best = Some(alpha),
                    _ => {}
                }
            }
            let mut i = 0;
            while i < combo.len() {
                combo[i] += 1;
                if combo[i] < p {
                    break;
                }
                combo[i] = 0;
                i += 1;
            }
            if i == combo.len() {
                break;
            }
        }
        let alpha = best.ok_or_else(|| {
            FieldError::NoSubfieldEmbedding("modulus has no root in the subfield".into())
        })?;
        let mut gen_powers = Vec::with_capacity(small.e as usize);
        let mut acc = big.one();
        for _ in 0..small.e {
            gen_powers.push(acc.clone());
            acc = big.mul(&acc, &alpha);
        }
        Ok(Embedding { small: small.clone(), big: big.clone(), gen_powers })
    }

    pub fn apply(&self, x: &Elt) -> Elt {
        let mut out = self.big.zero();
        for (xi, pw) in x.iter().zip(&self.gen_powers) {
            if *xi != 0 {
                let mut scaled = pw.clone();
                for c in scaled.iter_mut() {
                    *c = *c * xi % self.big.p;
                }
                out = self.big.add(&out, &scaled);
            }
        }
        out
    }
}

/// Evaluate a polynomial with F_p coefficients at a point of `field`.
fn eval_fp_poly_in(field: &FieldSpec, poly: &[u64], x: &Elt) -> Elt {
    let mut acc = field.zero();
    for &c in poly.iter().rev() {
        acc = field.mul(&acc, x);
        acc[0] = (acc[0] + c) % field.p;
    }
    acc
}

/// Kernel basis of the matrix whose columns are given, over F_p.
fn kernel_basis(cols: &[Elt], p: u64, n: usize) -> Vec<Elt> {
    let m = cols.len();
    let mut a: Vec<Vec<u64>> = (0..n).map(|i| (0..m).map(|j| cols[j][i]).collect()).collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..m {
        if let Some(pr) = (r..n).find(|&i| a[i][c] != 0) {
            a.swap(r, pr);
            let inv = fp::inv_mod_p(a[r][c], p);
            for x in a[r].iter_mut() {
                *x = *x * inv % p;
            }
            for i in 0..n {
                if i != r && a[i][c] != 0 {
                    let f = a[i][c];
                    for j in 0..m {
                        let sub = f * a[r][j] % p;
                        a[i][j] = (a[i][j] + p - sub) % p;
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == n {
                break;
            }
        }
    }
    let mut basis = Vec::new();
    for free in 0..m {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; m];
        v[free] = 1;
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = (p - a[row][free] % p) % p;
        }
        basis.push(v);
    }
    basis
}

/// Univariate polynomial over F_q: coefficients constant-term first, no
/// trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    pub coeffs: Vec<Elt>,
}

impl UniPoly {
    pub fn new(field: &FieldSpec, mut coeffs: Vec<Elt>) -> UniPoly {
        while coeffs.last().map_or(false, |c| field.is_zero(c)) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> UniPoly {
        UniPoly { coeffs: vec![] }
    }

    pub fn from_ints(field: &FieldSpec, v: &[i64]) -> UniPoly {
        UniPoly::new(field, v.iter().map(|&c| field.from_int(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

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

    pub fn leading(&self, field: &FieldSpec) -> Elt {
        self.coeffs.last().cloned().unwrap_or_else(|| field.zero())
    }
}

impl FieldSpec {
    pub fn poly_add(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = vec![self.zero(); n];
        for (i, c) in a.coeffs.iter().enumerate() {
            out[i] = self.add(&out[i], c);
        }
        for (i, c) in b.coeffs.iter().enumerate() {
            out[i] = self.add(&out[i], c);
        }
        UniPoly::new(self, out)
    }

    pub fn poly_neg(&self, a: &UniPoly) -> UniPoly {
        UniPoly::new(self, a.coeffs.iter().map(|c| self.neg(c)).collect())
    }

    pub fn poly_sub(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        self.poly_add(a, &self.poly_neg(b))
    }

    pub fn poly_mul(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        if a.is_zero() || b.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![self.zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                let t = self.mul(x, y);
                out[i + j] = self.add(&out[i + j], &t);
            }
        }
        UniPoly::new(self, out)
    }

    pub fn poly_scale(&self, a: &UniPoly, k: &Elt) -> UniPoly {
        UniPoly::new(self, a.coeffs.iter().map(|c| self.mul(c, k)).collect())
    }

    pub fn poly_divrem(&self, a: &UniPoly, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        if a.coeffs.len() < d.coeffs.len() {
            return (UniPoly::zero(), a.clone());
        }
        let lead_inv = self.inv(&d.leading(self));
        let mut rem = a.coeffs.clone();
        let mut quot = vec![self.zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if self.is_zero(&rem[i]) {
                continue;
            }
            let qc = self.mul(&rem[i], &lead_inv);
            for (j, c) in d.coeffs.iter().enumerate() {
                let t = self.mul(&qc, c);
                rem[i - dd + j] = self.sub(&rem[i - dd + j], &t);
            }
            quot[i - dd] = qc;
        }
        (UniPoly::new(self, quot), UniPoly::new(self, rem))
    }

    pub fn poly_gcd(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = self.poly_divrem(&x, &y);
            x = y;
            y = r;
        }
        if x.is_zero() {
            x
        } else {
            let inv = self.inv(&x.leading(self));
            self.poly_scale(&x, &inv)
        }
    }

    pub fn poly_derivative(&self, a: &UniPoly) -> UniPoly {
        if a.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        let coeffs = a
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| {
                let k = self.from_int(i as i64);
                self.mul(c, &k)
            })
            .collect();
        UniPoly::new(self, coeffs)
    }

    pub fn poly_eval(&self, a: &UniPoly, x: &Elt) -> Elt {
        let mut acc = self.zero();
        for c in a.coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc = self.add(&acc, c);
        }
        acc
    }

    pub fn poly_is_squarefree(&self, a: &UniPoly) -> bool {
        if a.is_zero() {
            return false;
        }
        let d = self.poly_derivative(a);
        if d.is_zero() {
            return a.deg() == 0;
        }
        self.poly_gcd(a, &d).deg() == 0
    }

    /// Multiplicity of the monic irreducible pi in nonzero a.
    pub fn poly_valuation(&self, a: &UniPoly, pi: &UniPoly) -> usize {
        let mut v = 0;
        let mut cur = a.clone();
        while !cur.is_zero() {
            let (q, r) = self.poly_divrem(&cur, pi);
            if !r.is_zero() {
                break;
            }
            v += 1;
            cur = q;
        }
        v
    }
}

/// Multiplicative log/Zech tables over a small odd-characteristic field,
/// for allocation-free character sums in index space.
///
/// Elements are their mixed-radix indices; nonzero elements are powers of a
/// fixed generator g, and addition uses the Zech logarithm
/// z(k) = log(1 + g^k).
pub struct ZechField {
    pub q: u64,
    order: u32,
    /// log[idx] for idx in 1..q (log[0] unused).
    log: Vec<u32>,
    /// zech[k] = log(1 + g^k), or SENTINEL when 1 + g^k = 0.
    zech: Vec<u32>,
}

const ZECH_SENTINEL: u32 = u32::MAX;

impl ZechField {
    pub fn new(field: &FieldSpec) -> ZechField {
        assert!(field.p != 2, "Zech tables are used for odd characteristic only");
        let q = field.q;
        let order = (q - 1) as u32;
        // find a generator: smallest index whose order is q - 1
        let mut gen = None;
        'search: for idx in 2..q {
            let g = field.from_index(idx);
            // order check through the prime factorization of q - 1
            let mut m = q - 1;
            let mut primes = vec![];
            let mut d = 2;
            while d * d <= m {
                if m % d == 0 {
                    primes.push(d);
                    while m % d == 0 {
                        m /= d;
                    }
                }
                d += 1;
            }
            if m > 1 {
                primes.push(m);
            }
            for l in primes {
                if field.pow(&g, (q - 1) / l) == field.one() {
                    continue 'search;
                }
            }
            gen = Some(g);
            break;
        }
        let g = gen.expect("multiplicative group of a finite field is cyclic");
        let mut log = vec![0u32; q as usize];
        let mut powers = vec![field.one(); (q - 1) as usize];
        let mut cur = field.one();
        for k in 0..order {
            log[field.index(&cur) as usize] = k;
            powers[k as usize] = cur.clone();
            cur = field.mul(&cur, &g);
        }
        let one = field.one();
        let mut zech = vec![0u32; (q - 1) as usize];
        for k in 0..order {
            let plus = field.add(&powers[k as usize], &one);
            let idx = field.index(&plus);
            zech[k as usize] = if idx == 0 { ZECH_SENTINEL } else { log[idx as usize] };
        }
        ZechField { q, order, log, zech }
    }

    #[inline]
    pub fn log_of(&self, idx: u64) -> Option<u32> {
        if idx == 0 {
            None
        } else {
            Some(self.log[idx as usize])
        }
    }

    /// log(g^a + g^b), or None when the sum is zero.
    #[inline]
    fn add_logs(&self, a: u32, b: u32) -> Option<u32> {
        let diff = (b + self.order - a) % self.order;
        let z = self.zech[diff as usize];
        if z == ZECH_SENTINEL {
            None
        } else {
            Some((a + z) % self.order)
        }
    }

    /// log(g^a + x) where x may be zero (None).
    #[inline]
    fn add_opt(&self, a: Option<u32>, b: Option<u32>) -> Option<u32> {
        match (a, b) {
            (None, x) => x,
            (x, None) => x,
            (Some(a), Some(b)) => self.add_logs(a, b),
        }
    }

    /// Quadratic character of g^k: +1 for even k, -1 for odd; chi(0) = 0.
    #[inline]
    fn chi_of(&self, v: Option<u32>) -> i64 {
        match v {
            None => 0,
            Some(k) => 1 - 2 * ((k & 1) as i64),
        }
    }

    /// sum over x in F_q of chi(x^3 + a x + b), with a, b given as element
    /// indices. This is q - #affine points of y^2 = x^3 + ax + b, i.e.
    /// a_v - 1 + (q + 1 - count) bookkeeping is left to the caller.
    pub fn cubic_character_sum(&self, a_idx: u64, b_idx: u64) -> i64 {
        let la = self.log_of(a_idx);
        let lb = self.log_of(b_idx);
        // x = 0 term
        let mut s = self.chi_of(lb);
        for lx in 0..self.order {
            let x3 = Some((3 * lx) % self.order);
            let ax = la.map(|a| (a + lx) % self.order);
            let v = self.add_opt(self.add_opt(x3, ax), lb);
            s += self.chi_of(v);
        }
        s
    }
}

fn moebius(n: u64) -> i64 {
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

/// Number of monic irreducibles of degree d over F_q by necklace counting:
/// (1/d) sum_{m | d} mu(m) q^(d/m).
pub fn irreducible_count(q: u64, d: usize) -> u64 {
    let d = d as u64;
    let mut total: i128 = 0;
    for m in 1..=d {
        if d % m == 0 {
            let mu = moebius(m) as i128;
            if mu != 0 {
                total += mu * (q as i128).pow((d / m) as u32);
            }
        }
    }
    (total / d as i128) as u64
}

/// Complete list of monic irreducibles over F_q grouped by degree 1..=D,
/// asserted against the necklace formula.
pub fn irreducibles_up_to(
    field: &FieldSpec,
    max_deg: usize,
) -> Result<Vec<Vec<UniPoly>>, FieldError> {
    if max_deg > IRREDUCIBLE_DEGREE_GUARD {
        return Err(FieldError::SizeGuardExceeded(format!(
            "irreducible enumeration degree {max_deg} > {IRREDUCIBLE_DEGREE_GUARD}"
        )));
    }
    let mut out: Vec<Vec<UniPoly>> = Vec::with_capacity(max_deg);
    for d in 1..=max_deg {
        let candidates = (field.q as u128).pow(d as u32);
        if candidates > FIELD_SIZE_GUARD as u128 {
            return Err(FieldError::SizeGuardExceeded(format!(
                "q^{d} = {candidates} candidate polynomials"
            )));
        }
        let mut level = Vec::new();
        let mut idx = vec![0u64; d];
        loop {
            let mut coeffs: Vec<Elt> = idx.iter().map(|&i| field.from_index(i)).collect();
            coeffs.push(field.one());
            let cand = UniPoly { coeffs };
            if trial_division_irreducible(field, &cand, &out) {
                level.push(cand);
            }
            let mut i = 0;
            while i < d {
                idx[i] += 1;
                if idx[i] < field.q {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        assert_eq!(
            level.len() as u64,
            irreducible_count(field.q, d),
            "irreducible count mismatch at degree {d} over F_{}",
            field.q
        );
        out.push(level);
    }
    Ok(out)
}

/// Irreducibility by trial division against complete lower-degree lists
/// (lower[k] holds degree k+1 irreducibles).
fn trial_division_irreducible(field: &FieldSpec, f: &UniPoly, lower: &[Vec<UniPoly>]) -> bool {
    let d = f.deg();
    if d == 1 {
        return true;
    }
    for level in lower.iter().take(d / 2) {
        for pi in level {
            let (_, r) = field.poly_divrem(f, pi);
            if r.is_zero() {
                return false;
            }
        }
    }
    true
}

/// Complete factorization of a nonzero polynomial into monic irreducibles
/// with multiplicity, by trial division in increasing degree; the product of
/// the factors reproduces f up to its leading coefficient.
pub fn factor_poly(field: &FieldSpec, f: &UniPoly) -> Result<Vec<(UniPoly, usize)>, FieldError> {
    if f.is_zero() {
        return Err(FieldError::InvalidArgument("cannot factor the zero polynomial".into()));
    }
    if f.deg() > 64 {
        return Err(FieldError::SizeGuardExceeded(format!("degree {} > 64", f.deg())));
    }
    let inv = field.inv(&f.leading(field));
    let mut rest = field.poly_scale(f, &inv);
    let mut out: Vec<(UniPoly, usize)> = Vec::new();
    let mut d = 1usize;
    while rest.deg() >= 1 {
        if rest.deg() < 2 * d {
            out.push((rest.clone(), 1));
            break;
        }
        let candidates = (field.q as u128).pow(d as u32);
        if candidates > FIELD_SIZE_GUARD as u128 {
            return Err(FieldError::SizeGuardExceeded(format!(
                "trial division needs q^{d} = {candidates} candidates"
            )));
        }
        let mut idx = vec![0u64; d];
        loop {
            let mut coeffs: Vec<Elt> = idx.iter().map(|&i| field.from_index(i)).collect();
            coeffs.push(field.one());
            let pi = UniPoly { coeffs };
            let mut mult = 0usize;
            loop {
                let (q, r) = field.poly_divrem(&rest, &pi);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                mult += 1;
            }
            if mult > 0 {
                out.push((pi, mult));
            }
            if rest.deg() < 2 * d {
                break;
            }
            let mut i = 0;
            while i < d {
                idx[i] += 1;
                if idx[i] < field.q {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        d += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_field_examples() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        assert_eq!(f2.modulus, vec![0, 1]);
        assert_eq!(f2.q, 2);
        // unique irreducible quadratic over F_2: t^2 + t + 1
        let f4 = FieldSpec::new(2, 2).unwrap();
        assert_eq!(f4.modulus, vec![1, 1, 1]);
        // lexicographically smallest monic irreducible quadratic over F_5:
        // oracle = exhaustive root check over all 25 candidates
        let f25 = FieldSpec::new(5, 2).unwrap();
        let mut expected = None;
        'outer: for c0 in 0..5u64 {
            for c1 in 0..5u64 {
                let has_root = (0..5u64).any(|x| (x * x + c1 * x + c0) % 5 == 0);
                if !has_root {
                    expected = Some(vec![c0, c1, 1]);
                    break 'outer;
                }
            }
        }
        assert_eq!(f25.modulus, expected.unwrap());
        assert!(matches!(FieldSpec::new(6, 1), Err(FieldError::NotPrime(6))));
        assert!(matches!(FieldSpec::new(2, 40), Err(FieldError::SizeGuardExceeded(_))));
    }

    #[test]
    fn field_axioms_spot_check() {
        let f = FieldSpec::new(3, 3).unwrap();
        let xs: Vec<Elt> = [5u64, 11, 19, 2, 25].iter().map(|&i| f.from_index(i)).collect();
        for a in &xs {
            for b in &xs {
                for c in &xs {
                    assert_eq!(f.mul(&f.mul(a, b), c), f.mul(a, &f.mul(b, c)));
                    assert_eq!(
                        f.mul(a, &f.add(b, c)),
                        f.add(&f.mul(a, b), &f.mul(a, c))
                    );
                }
            }
        }
        for i in 1..f.q {
            let x = f.from_index(i);
            assert_eq!(f.mul(&x, &f.inv(&x)), f.one());
        }
    }

    #[test]
    fn frobenius_is_additive_and_fixes_fp() {
        let f = FieldSpec::new(5, 2).unwrap();
        for i in 0..f.q {
            for j in 0..f.q {
                let a = f.from_index(i);
                let b = f.from_index(j);
                assert_eq!(
                    f.frobenius(&f.add(&a, &b)),
                    f.add(&f.frobenius(&a), &f.frobenius(&b))
                );
            }
        }
        let mut fixed = 0;
        for i in 0..f.q {
            let a = f.from_index(i);
            if f.frobenius(&a) == a {
                fixed += 1;
                assert_eq!(a[1], 0);
            }
        }
        assert_eq!(fixed, 5);
    }

    #[test]
    fn embedding_is_homomorphic() {
        let small = FieldSpec::new(2, 2).unwrap();
        let big = FieldSpec::new(2, 4).unwrap();
        let emb = Embedding::new(&small, &big).unwrap();
        assert_eq!(emb.apply(&small.zero()), big.zero());
        assert_eq!(emb.apply(&small.one()), big.one());
        for i in 0..small.q {
            for j in 0..small.q {
                let a = small.from_index(i);
                let b = small.from_index(j);
                assert_eq!(
                    emb.apply(&small.mul(&a, &b)),
                    big.mul(&emb.apply(&a), &emb.apply(&b))
                );
                assert_eq!(
                    emb.apply(&small.add(&a, &b)),
                    big.add(&emb.apply(&a), &emb.apply(&b))
                );
            }
        }
        // Frobenius commutation: embed(x)^q = embed(x^q)
        for i in 0..small.q {
            let a = small.from_index(i);
            assert_eq!(
                big.pow(&emb.apply(&a), small.q),
                emb.apply(&small.pow(&a, small.q))
            );
        }
        let images: std::collections::HashSet<Vec<u64>> =
            (0..small.q).map(|i| emb.apply(&small.from_index(i))).collect();
        assert_eq!(images.len(), small.q as usize);
    }

    #[test]
    fn embedding_odd_characteristic() {
        let small = FieldSpec::new(3, 1).unwrap();
        let big = FieldSpec::new(3, 2).unwrap();
        let emb = Embedding::new(&small, &big).unwrap();
        for i in 0..small.q {
            for j in 0..small.q {
                let a = small.from_index(i);
                let b = small.from_index(j);
                assert_eq!(
                    emb.apply(&small.mul(&a, &b)),
                    big.mul(&emb.apply(&a), &emb.apply(&b))
                );
            }
        }
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        // F_2, D = 3: counts per degree [2, 1, 2]
        let f2 = FieldSpec::new(2, 1).unwrap();
        let irr = irreducibles_up_to(&f2, 3).unwrap();
        assert_eq!(irr[0].len(), 2);
        assert_eq!(irr[1].len(), 1);
        assert_eq!(irr[2].len(), 2);
        // F_5, D = 1: the five monic linear polynomials
        let f5 = FieldSpec::new(5, 1).unwrap();
        let irr5 = irreducibles_up_to(&f5, 1).unwrap();
        assert_eq!(irr5[0].len(), 5);
        // F_3 degree 4: (81 - 9)/4 = 18
        assert_eq!(irreducible_count(3, 4), 18);
        let f3 = FieldSpec::new(3, 1).unwrap();
        let irr3 = irreducibles_up_to(&f3, 4).unwrap();
        assert_eq!(irr3[3].len(), 18);
        // over an extension field
        let f4 = FieldSpec::new(2, 2).unwrap();
        let irr4 = irreducibles_up_to(&f4, 2).unwrap();
        assert_eq!(irr4[0].len(), 4);
        assert_eq!(irr4[1].len(), irreducible_count(4, 2) as usize);
        assert!(irreducibles_up_to(&f3, 13).is_err());
    }

    #[test]
    fn factorization_examples() {
        // t^3 + 3 over F_5 = (t + 2)(t^2 + 3t + 4); root check: 3^3 = 27 = -3
        let f5 = FieldSpec::new(5, 1).unwrap();
        let f = UniPoly::from_ints(&f5, &[3, 0, 0, 1]);
        let factors = factor_poly(&f5, &f).unwrap();
        assert_eq!(
            factors,
            vec![
                (UniPoly::from_ints(&f5, &[2, 1]), 1),
                (UniPoly::from_ints(&f5, &[4, 3, 1]), 1)
            ]
        );
        // t^2 over F_3 = (t)^2
        let f3 = FieldSpec::new(3, 1).unwrap();
        let t2 = UniPoly::from_ints(&f3, &[0, 0, 1]);
        assert_eq!(
            factor_poly(&f3, &t2).unwrap(),
            vec![(UniPoly::from_ints(&f3, &[0, 1]), 2)]
        );
    }

    #[test]
    fn factorization_reconstructs_random_products() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        let mut state = 12345u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for _ in 0..40 {
            let d = 1 + (rand() % 8) as usize;
            let mut coeffs: Vec<Elt> = (0..d).map(|_| f3.from_index(rand() % 3)).collect();
            coeffs.push(f3.one());
            let f = UniPoly::new(&f3, coeffs);
            let factors = factor_poly(&f3, &f).unwrap();
            let mut prod = UniPoly::from_ints(&f3, &[1]);
            for (pi, m) in &factors {
                for _ in 0..*m {
                    prod = f3.poly_mul(&prod, pi);
                }
            }
            assert_eq!(prod, f);
            for (pi, m) in &factors {
                assert_eq!(f3.poly_valuation(&f, pi), *m);
            }
        }
    }
}

#[cfg(test)]
mod zech_tests {
    use super::*;

    #[test]
    fn zech_character_sum_matches_table_route() {
        for (p, e) in [(5u64, 1u32), (7, 1), (3, 2), (5, 2)] {
            let f = FieldSpec::new(p, e).unwrap();
            let zf = ZechField::new(&f);
            let chi = f.quadratic_character_table();
            for a_idx in [0u64, 1, 2, f.q - 1] {
                for b_idx in [0u64, 1, 3 % f.q] {
                    let a = f.from_index(a_idx);
                    let b = f.from_index(b_idx);
                    let mut expect = 0i64;
                    for xi in 0..f.q {
                        let x = f.from_index(xi);
                        let x3 = f.mul(&x, &f.mul(&x, &x));
                        let v = f.add(&x3, &f.add(&f.mul(&a, &x), &b));
                        expect += chi[f.index(&v) as usize] as i64;
                    }
                    assert_eq!(
                        zf.cubic_character_sum(a_idx, b_idx),
                        expect,
                        "mismatch at q={} a={a_idx} b={b_idx}",
                        f.q
                    );
                }
            }
        }
    }
}
