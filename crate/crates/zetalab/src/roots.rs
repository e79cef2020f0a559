//! Simultaneous root finding for real-coefficient polynomials by the
//! Aberth–Ehrlich iteration with Newton polishing.
//!
//! Repeated roots are never fed to this solver directly: callers first split
//! off multiplicities exactly (Yun over Q), so every polynomial arriving here
//! is squarefree and the iteration attains close to machine precision.

use num_complex::Complex64;

/// All complex roots of the polynomial c[0] + c[1] x + ... + c[n] x^n.
/// Coefficients must satisfy c[0] != 0 and c[n] != 0 (callers strip zeros
/// and factor out powers of x beforehand).
pub fn all_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)];
    }
    if n == 2 {
        return quadratic_roots(coeffs[0], coeffs[1], coeffs[2]);
    }

    // Initial guesses on a circle of radius the geometric mean of the root
    // moduli, with an asymmetric phase so symmetric configurations do not
    // stall the iteration.
    let radius = (coeffs[0].abs() / coeffs[n].abs()).powf(1.0 / n as f64);
    let radius = if radius.is_finite() && radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.437;
            radius * Complex64::new(ang.cos(), ang.sin()) * (1.0 + 1e-3 * (k as f64 % 7.0))
        })
        .collect();

    let max_iter = 400;
    for _ in 0..max_iter {
        let mut max_step = 0.0f64;
        let snapshot = z.clone();
        for i in 0..n {
            let (p, dp) = eval_with_derivative(coeffs, snapshot[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { Complex64::new(1e-3, 1e-3) };
            let mut rep = Complex64::new(0.0, 0.0);
            for (j, zj) in snapshot.iter().enumerate() {
                if j != i {
                    let diff = snapshot[i] - zj;
                    if diff.norm() > 0.0 {
                        rep += 1.0 / diff;
                    }
                }
            }
            let denom = 1.0 - newton * rep;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] -= step;
            let rel = step.norm() / z[i].norm().max(1.0);
            max_step = max_step.max(rel);
        }
        if max_step < 1e-15 {
            break;
        }
    }

    // A few Newton steps per root sharpen the last digits.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(coeffs, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
    z
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<Complex64> {
    let disc = Complex64::new(c1 * c1 - 4.0 * c2 * c0, 0.0);
    let sq = disc.sqrt();
    // Citardauq pairing avoids cancellation.
    let q = if c1 >= 0.0 { -(Complex64::new(c1, 0.0) + sq) / 2.0 } else { -(Complex64::new(c1, 0.0) - sq) / 2.0 };
    if q.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    vec![q / c2, Complex64::new(c0, 0.0) / q]
}

fn eval_with_derivative(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Unevaluated double-double value hi + lo (Dekker/Knuth error-free
/// transformations), giving ~106 bits in the Horner accumulations below.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd { hi: p, lo: f64::mul_add(a, b, -p) }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let s = Self::two_sum(self.hi, o.hi);
        Self::quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let p = Self::two_prod(self.hi, o.hi);
        Self::quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Newton polish of an approximate simple root against double-double
/// coefficients (pairs hi + lo). The extended-precision Horner removes the
/// f64 evaluation noise that caps accuracy near clustered roots; the step
/// itself is formed in f64, which is plenty once P is evaluated cleanly.
pub fn polish_root_dd(coeffs: &[(f64, f64)], z0: Complex64, iterations: usize) -> Complex64 {
    let mut z = z0;
    for _ in 0..iterations {
        let zr = Dd::from_f64(z.re);
        let zi = Dd::from_f64(z.im);
        let mut pre = Dd::from_f64(0.0);
        let mut pim = Dd::from_f64(0.0);
        let mut dre = Dd::from_f64(0.0);
        let mut dim = Dd::from_f64(0.0);
        for &(hi, lo) in coeffs.iter().rev() {
            // derivative accumulates first: d = d*z + p
            let t_re = dre.mul(zr).add(dim.mul(zi).neg()).add(pre);
            let t_im = dre.mul(zi).add(dim.mul(zr)).add(pim);
            dre = t_re;
            dim = t_im;
            // p = p*z + c
            let n_re = pre.mul(zr).add(pim.mul(zi).neg()).add(Dd { hi, lo });
            let n_im = pre.mul(zi).add(pim.mul(zr));
            pre = n_re;
            pim = n_im;
        }
        let p = Complex64::new(pre.to_f64(), pim.to_f64());
        let dp = Complex64::new(dre.to_f64(), dim.to_f64());
        if dp.norm() == 0.0 {
            return z;
        }
        let step = p / dp;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            return z;
        }
        z = next;
        if step.norm() <= 1e-17 * z.norm().max(1e-300) {
            break;
        }
    }
    z
}
