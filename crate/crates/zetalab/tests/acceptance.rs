//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with:
//!   cargo test --release --test acceptance -- --nocapture
//!
//! Criteria with runtime budgets are measured in release mode.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zetalab::asymptotics::{
    basic_inequality_zeta, brauer_siegel_ratio, ek_limit, estimate_limits, Exactness,
    FamilyRecord, Goodness, VeryExact, DEFAULT_CONV_TOL,
};
use zetalab::corpus::{corpus, random_trig_poly};
use zetalab::curve::{
    euler_kronecker, meaningful_phi_depth, phi_from_counts, squarefree_monic_polys,
    zeta_from_counts, zeta_from_model, CurveModel,
};
use zetalab::field::{FieldSpec, UniPoly};
use zetalab::lfun::{
    drinfeld_slack, explicit_formula_trig, stark_identity, validate_lfunction, Mode,
    ZetaFunction,
};
use zetalab::qpoly::{rat_i64, rat_to_f64, QPoly};
use zetalab::surface::{ell_lfunction, EllipticSurface};
use zetalab::zero_dist::{
    curve_limit_density, density_cosine_moment, limit_density, moment, sine_moment, zero_measure,
};

fn criterion(n: u32, desc: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("acceptance criterion {n:2}: {status} - {desc}{}",
        if detail.is_empty() { String::new() } else { format!(" ({detail})") });
    assert!(pass, "criterion {n} failed: {desc} {detail}");
}

/// Shared corpus: 200 seeded random validated L-functions, d <= 40,
/// q in {2,3,4,5,9}, w in {0,1,2}.
fn acceptance_corpus() -> Vec<zetalab::LFunction> {
    corpus(0xACCE97, 200, 20)
}

#[test]
fn criterion_01_explicit_formula() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for lf in acceptance_corpus() {
        let trig = random_trig_poly(&mut rng, 10);
        let (lhs, rhs) = explicit_formula_trig(&lf, &trig);
        worst = worst.max((lhs - rhs).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        1,
        "explicit-formula identity over 200 random L-functions, |lhs - rhs| <= 1e-9",
        worst <= 1e-9 && elapsed < 10.0,
        &format!("worst gap {worst:.3e}, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_stark_identity() {
    let corpus = acceptance_corpus();
    let mut worst_forms: f64 = 0.0;
    for lf in &corpus {
        let w = lf.weight() as f64;
        let z = ZetaFunction::from_lfunction(lf.clone());
        for k in 0..5 {
            let s = Complex64::new(w / 2.0 + 0.7 + 0.15 * k as f64, 0.1 * k as f64);
            let st = stark_identity(&z, s, 10).unwrap();
            let scale = st.mid.norm().max(1.0);
            worst_forms = worst_forms.max((st.lhs - st.mid).norm() / scale);
        }
    }
    // third form at K = 10^4 on a subsample (cost is K * degree per point)
    let mut worst_third: f64 = 0.0;
    for lf in corpus.iter().step_by(10) {
        let w = lf.weight() as f64;
        let z = ZetaFunction::from_lfunction(lf.clone());
        let s = Complex64::new(w / 2.0 + 1.0, 0.3);
        let st = stark_identity(&z, s, 10_000).unwrap();
        worst_third = worst_third.max((st.rhs - st.mid).norm());
    }
    criterion(
        2,
        "Stark identity: forms 1,2 agree to 1e-12; theta-translate form within 1e-6 at K = 10^4",
        worst_forms <= 1e-12 && worst_third <= 1e-6,
        &format!("forms gap {worst_forms:.3e}, third-form residual {worst_third:.3e}"),
    );
}

#[test]
fn criterion_03_drinfeld_inequality() {
    let mut worst = f64::INFINITY;
    for lf in acceptance_corpus() {
        for b in 1..=16 {
            worst = worst.min(drinfeld_slack(&lf, b));
        }
    }
    criterion(
        3,
        "per-function Drinfeld inequality, b = 1..16, slack >= -1e-9",
        worst >= -1e-9,
        &format!("min slack {worst:.3e}"),
    );
}

#[test]
fn criterion_04_curve_pipeline_exhaustive() {
    let start = Instant::now();
    let base = FieldSpec::new(3, 1).unwrap();
    let polys = squarefree_monic_polys(&base, 5).unwrap();
    assert_eq!(polys.len(), 162); // 3^5 - 3^4 squarefree monics
    let mut checked = 0usize;
    for f in &polys {
        let model = CurveModel::new(base.clone(), f.clone()).unwrap();
        // exact-mode RH certificate and integrality run inside the pipeline
        let z = zeta_from_model(&model, Mode::Exact).unwrap();
        for fi in 3..=4u32 {
            let predicted = z.predicted_count(fi as usize);
            let brute = model.count_points(fi).unwrap();
            assert_eq!(
                predicted,
                brute.into(),
                "N_{fi} mismatch for f = {:?}",
                f.coeffs
            );
        }
        checked += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        4,
        "exhaustive genus-2 pipeline over F_3: exact RH + N_3, N_4 overdetermination",
        checked == 162 && elapsed < 120.0,
        &format!("{checked} curves, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_05_pinned_curve_values() {
    // y^2 = x^3 - x over F_3: P = 1 + 3u^2, h = 4 (oracle: exhaustive count)
    let base = FieldSpec::new(3, 1).unwrap();
    let model = CurveModel::new(base.clone(), UniPoly::from_ints(&base, &[0, -1, 0, 1])).unwrap();
    let z1 = zeta_from_model(&model, Mode::Exact).unwrap();
    let ok1 = z1.numerator.coeffs() == [rat_i64(1), rat_i64(0), rat_i64(3)]
        && z1.h == 4.into()
        && z1.counts == vec![4];
    // ingested counts (q=2, g=1, N_1=3): P = 1 + 2u^2, h = 3
    let z2 = zeta_from_counts(2, 1, &[3], Mode::Exact).unwrap();
    let ok2 = z2.numerator.coeffs() == [rat_i64(1), rat_i64(0), rat_i64(2)] && z2.h == 3.into();
    criterion(
        5,
        "pinned curve values: (F_3, y^2 = x^3 - x) and ingested (q=2, N_1=3)",
        ok1 && ok2,
        "",
    );
}

#[test]
fn criterion_06_elliptic_surface_pinned() {
    let start = Instant::now();
    let f5 = FieldSpec::new(5, 1).unwrap();
    let e = EllipticSurface::new(
        f5.clone(),
        UniPoly::from_ints(&f5, &[0, 1]),
        UniPoly::from_ints(&f5, &[1]),
    )
    .unwrap();
    // ell_lfunction reconstructs from Lambda_1..Lambda_d and verifies the
    // four extra coefficients against the place side
    let data = ell_lfunction(&e).unwrap();
    let a1 = rat_to_f64(&data.lfun.coeffs()[1]);
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        6,
        "elliptic surface y^2 = x^3 + tx + 1 over F_5(t): n_E = 5, deg L = 1, |a_1| = 5",
        data.n_e == 5
            && data.lfun.degree() == 1
            && a1.abs() == 5.0
            && data.lambdas.len() == 5
            && elapsed < 30.0,
        &format!("a_1 = {a1}, omega = {}, {elapsed:.2}s", data.omega),
    );
}

#[test]
fn criterion_07_moment_pairing() {
    // pinned convention (oracle-derived): d * moment(mu, m) = -Lambda_m q^(-wm/2)
    let mut worst: f64 = 0.0;
    let mut worst_sine: f64 = 0.0;
    for lf in acceptance_corpus() {
        let d = lf.degree();
        let mu = zero_measure(&lf);
        let lam = lf.lambda_coeffs(2 * d);
        let q = lf.q() as f64;
        let w = lf.weight() as f64;
        for m in 1..=2 * d {
            let lhs = d as f64 * moment(&mu, m as u32);
            let rhs = -rat_to_f64(&lam.values[m - 1]) * q.powf(-w * m as f64 / 2.0);
            worst = worst.max((lhs - rhs).abs());
            worst_sine = worst_sine.max(sine_moment(&mu, m as u32).abs() * d as f64);
        }
        assert!((moment(&mu, 0) - 1.0).abs() < 1e-15);
    }
    criterion(
        7,
        "moment pairing d*moment(mu,m) = -Lambda_m q^(-wm/2) to 1e-9, sine moments 0",
        worst <= 1e-9 && worst_sine <= 1e-9,
        &format!("worst pairing gap {worst:.3e}, worst sine {worst_sine:.3e}"),
    );
}

#[test]
fn criterion_08_synthetic_family_exactness() {
    // copies of one fixed L: ratios constant; BS ratio = limit within the
    // rigorous truncation tail; density moments reproduce base moments
    let base = QPoly::new(vec![rat_i64(1), rat_i64(0), rat_i64(2)]);
    let mut zetas = Vec::new();
    for k in [1usize, 2, 3, 4, 6, 8] {
        let mut p = QPoly::one();
        for _ in 0..k {
            p = p.mul(&base);
        }
        let lf = validate_lfunction(2, 1, p.coeffs.clone(), Mode::Exact).unwrap();
        zetas.push(ZetaFunction::from_lfunction(lf));
    }
    let fam = FamilyRecord::from_zetas(zetas, Some(32)).unwrap();
    let data = estimate_limits(&fam, DEFAULT_CONV_TOL).unwrap();
    let mut bs_ok = true;
    let mut worst_dev: f64 = 0.0;
    for k in 0..5 {
        let s = Complex64::new(1.3 + 0.1 * k as f64, 0.0);
        let rep = brauer_siegel_ratio(&fam, &data, s).unwrap();
        for (_, _, dev) in &rep.rows {
            worst_dev = worst_dev.max(*dev);
            if *dev > rep.limit_tail + 1e-12 {
                bs_ok = false;
            }
        }
    }
    // density vs base moments
    let lf = validate_lfunction(2, 1, base.coeffs.clone(), Mode::Exact).unwrap();
    let lam = lf.lambda_coeffs(16);
    let lambdas: Vec<f64> = lam.values.iter().map(|v| rat_to_f64(v) / 2.0).collect();
    let density = limit_density(&lambdas, 2, 1, 2048, true);
    let mu = zero_measure(&lf);
    let mut worst_moment: f64 = 0.0;
    for m in 0..=8u32 {
        let from_density = density_cosine_moment(&density, m);
        let from_measure = moment(&mu, m);
        worst_moment = worst_moment.max((from_density - from_measure).abs());
    }
    criterion(
        8,
        "single-base family: BS ratios = limit (within rigorous tail), density moments to 1e-6",
        bs_ok && worst_moment <= 1e-6,
        &format!("worst BS deviation {worst_dev:.3e}, worst moment gap {worst_moment:.3e}"),
    );
}

#[test]
fn criterion_09_paper_fixture_family() {
    // (1 - q^(-s))^k: exact, asymptotically good, not very exact, lambda_f = -1
    let factor = QPoly::new(vec![rat_i64(1), rat_i64(-1)]);
    let mut zetas = Vec::new();
    for k in [2usize, 4, 6, 8, 12, 16] {
        let mut p = QPoly::one();
        for _ in 0..k {
            p = p.mul(&factor);
        }
        let lf = validate_lfunction(2, 0, p.coeffs.clone(), Mode::Exact).unwrap();
        zetas.push(ZetaFunction::from_lfunction(lf));
    }
    let fam = FamilyRecord::from_zetas(zetas, Some(12)).unwrap();
    let data = estimate_limits(&fam, DEFAULT_CONV_TOL).unwrap();
    let lambdas_ok = data.lambdas.iter().all(|l| *l == -1.0);
    criterion(
        9,
        "paper fixture (1 - q^(-s))^k: exact, good, not very exact, lambda_f = -1 exactly",
        data.exactness == Exactness::Exact
            && data.goodness == Goodness::Good
            && data.very_exact == VeryExact::NotVeryExact
            && lambdas_ok,
        &format!(
            "classified ({:?}, {:?}, {})",
            data.exactness,
            data.goodness,
            data.very_exact.as_str()
        ),
    );
}

#[test]
fn criterion_10_genus_growing_curve_family() {
    // one curve per genus g = 1..5 over F_3 (first squarefree monic of
    // degree 2g+1, deterministic)
    let base = FieldSpec::new(3, 1).unwrap();
    let mut zetas = Vec::new();
    let mut curve_zetas = Vec::new();
    for g in 1..=5usize {
        let f = squarefree_monic_polys(&base, 2 * g + 1).unwrap().remove(0);
        let model = CurveModel::new(base.clone(), f).unwrap();
        let cz = zeta_from_model(&model, Mode::Exact).unwrap();
        zetas.push(cz.zeta());
        curve_zetas.push(cz);
    }
    let fam = FamilyRecord::from_zetas(zetas, Some(24)).unwrap();
    let data = estimate_limits(&fam, DEFAULT_CONV_TOL).unwrap();

    // ordering lower <= mid <= upper at sampled s in (1/2, 1)
    let mut ordering_ok = true;
    for s in [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95] {
        let r = basic_inequality_zeta(&data, s).unwrap();
        if !r.ordering_ok {
            ordering_ok = false;
        }
    }

    // Euler-Kronecker values against the phi-limit (reported, soft trend);
    // phi estimates carry information only to ~2 log_q(g) depth
    let last = curve_zetas.last().unwrap();
    let depth = meaningful_phi_depth(3, last.genus());
    let counts: Vec<u64> = (1..=depth)
        .map(|f| {
            let v = last.predicted_count(f);
            v.to_string().parse::<u64>().unwrap()
        })
        .collect();
    let phis = phi_from_counts(&counts).unwrap();
    let g_last = last.genus() as f64;
    let phi_norm: Vec<f64> =
        phis.iter().map(|p| p.to_string().parse::<f64>().unwrap() / g_last).collect();
    let (ek_lim, _tail) = ek_limit(&phi_norm, 3).unwrap();
    let gammas: Vec<f64> = curve_zetas
        .iter()
        .map(|z| euler_kronecker(z, 0)[0] / z.genus() as f64)
        .collect();
    let gaps: Vec<f64> = gammas.iter().map(|g| (g - ek_lim).abs()).collect();
    let trend_soft = gaps.windows(2).skip(gaps.len() / 2 - 1).all(|w| w[1] <= w[0] + 0.5);
    if !trend_soft {
        println!("  note: Euler-Kronecker trend soft check inconclusive at desk scale: {gaps:?}");
    }
    let ek_finite = gammas.iter().all(|g| g.is_finite()) && ek_lim.is_finite();

    // curve-route density nonnegative within tail bound
    let density = curve_limit_density(&phi_norm, 3, 4096);
    let min = density.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let density_ok = min >= -2.0 * density.tail_bound - 1e-9;

    criterion(
        10,
        "F_3 genus 1..5 family: zeta-inequality ordering, EK comparison, density nonnegative",
        ordering_ok && ek_finite && density_ok,
        &format!(
            "EK limit {ek_lim:.4}, gamma/g gaps {:?}, density min {min:.3e} (tail {:.3e})",
            gaps.iter().map(|g| (g * 1e3).round() / 1e3).collect::<Vec<_>>(),
            density.tail_bound
        ),
    );
}
