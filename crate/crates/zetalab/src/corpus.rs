//! Deterministic random fixtures: validated L-functions built as exact
//! products of circle-root factors, and random trigonometric test
//! polynomials. Seeded generation keeps property-style tests and the
//! acceptance suite reproducible.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lfun::{validate_lfunction, LFunction, Mode, TrigPolynomial};
use crate::qpoly::{rat_i64, rat_pow, QPoly, Rat};

/// A random validated L-function over (q, w): an exact product of conjugate
/// pair factors 1 - c u + q^w u^2 with rational c strictly inside
/// (-2 q^(w/2), 2 q^(w/2)), plus occasional circle-point factors. All roots
/// land exactly on |u| = q^(-w/2), so validation always succeeds.
pub fn random_lfunction(rng: &mut ChaCha8Rng, q: u64, w: u32, max_pairs: usize) -> LFunction {
    let pairs = rng.gen_range(1..=max_pairs.max(1));
    let qw = rat_pow(&rat_i64(q as i64), w as u64);
    // |c| < 2 q^(w/2): sample numerators of c = j/8
    let bound = (16.0 * (q as f64).powf(w as f64 / 2.0)).floor() as i64;
    let mut poly = QPoly::one();
    for _ in 0..pairs {
        if rng.gen_bool(0.15) {
            // (1 - q^w u^2): a conjugate pair of circle points at theta = 0, pi
            let factor = QPoly::new(vec![Rat::one(), Rat::zero(), -qw.clone()]);
            poly = poly.mul(&factor);
            continue;
        }
        let j = loop {
            let j = rng.gen_range(-(bound - 1)..bound);
            if j != 0 || rng.gen_bool(0.2) {
                break j;
            }
        };
        let c = Rat::new(j.into(), 8.into());
        let factor = QPoly::new(vec![Rat::one(), -c, qw.clone()]);
        poly = poly.mul(&factor);
    }
    validate_lfunction(q, w, poly.coeffs.clone(), Mode::default())
        .expect("constructed circle-root polynomial validates")
}

/// Random even trigonometric polynomial with Y <= y_max.
pub fn random_trig_poly(rng: &mut ChaCha8Rng, y_max: usize) -> TrigPolynomial {
    let y = rng.gen_range(1..=y_max.max(1));
    let v: Vec<f64> = (0..=y).map(|_| rng.gen_range(-2.0..2.0)).collect();
    TrigPolynomial::new(v).expect("finite coefficients")
}

/// The standard seeded corpus: n functions drawn over q in {2,3,4,5,9} and
/// w in {0,1,2}, degrees up to 2*max_pairs.
pub fn corpus(seed: u64, n: usize, max_pairs: usize) -> Vec<LFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qs = [2u64, 3, 4, 5, 9];
    let ws = [0u32, 1, 2];
    (0..n)
        .map(|_| {
            let q = qs[rng.gen_range(0..qs.len())];
            let w = ws[rng.gen_range(0..ws.len())];
            random_lfunction(&mut rng, q, w, max_pairs)
        })
        .collect()
}
