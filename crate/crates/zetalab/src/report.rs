//! Command orchestration: ingest curve/surface/family specifications, run
//! the analysis pipelines, and emit deterministic JSON reports plus CSV
//! plot-data files.
//!
//! Exit-code contract: 0 = all hard checks passed, 2 = a hard check failed
//! (validation, overdetermination, identity mismatch), 3 = input error.
//! Soft checks (asymptotic trends, conjecture comparators) only ever add
//! warnings.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::asymptotics::{
    base_change_lambda, basic_inequality_l, basic_inequality_zeta, brauer_siegel_ratio,
    central_data, ek_limit, essential_split, estimate_limits, limit_log_zeta, AsymptoticData,
    FamilyRecord, LimitZeta, MemberSummary, TowerPlace, TowerTable, VeryExact, DEFAULT_CONV_TOL,
};
use crate::curve::{
    euler_kronecker_from_numerator, phi_from_counts, squarefree_monic_polys, zeta_from_counts,
    zeta_from_model, CurveModel, CurveZeta,
};
use crate::field::{FieldSpec, UniPoly};
use crate::lfun::{prime_power, validate_lfunction, Mode, ZetaFunction, DEFAULT_RH_TOL};
use crate::qpoly::{format_rat, parse_rat};
use crate::surface::{ell_lfunction, EllipticSurface, Place};
use crate::zero_dist::{
    cosine_inequality_slack, histogram_compare, limit_density, rank_ratio, zero_measure,
    DensitySamples, ZeroMeasure,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Exit code 3: unreadable or malformed input.
    #[error("input error: {0}")]
    Input(String),
    /// Exit code 2: a hard check failed; the message names the object.
    #[error("hard check failed: {0}")]
    HardCheck(String),
    #[error("missing report section: {0}")]
    MissingSection(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::HardCheck(_) => 2,
            _ => 3,
        }
    }
}

/// Tolerance overrides shared by all commands.
#[derive(Debug, Clone)]
pub struct Tolerances {
    pub rh_tol: f64,
    pub eval_tol: f64,
    pub conv_tol: f64,
    pub stark_k: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rh_tol: DEFAULT_RH_TOL,
            eval_tol: 1e-9,
            conv_tol: DEFAULT_CONV_TOL,
            stark_k: crate::lfun::DEFAULT_STARK_K,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CommandSpec {
    Validate { input: PathBuf, exact: bool },
    CurveZeta { q: u64, genus: usize, poly: Option<String>, counts: Option<String>, batch_degree: Option<usize> },
    EllLfun { p: u64, e: u32, a: String, b: String },
    FamilyReport { input: PathBuf, tower: Option<PathBuf> },
    ZeroDensity { input: PathBuf, grid: usize },
    ZeroHist { input: PathBuf, bins: usize, grid: usize },
    BsReport { input: PathBuf, s: Vec<f64> },
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::Validate { .. } => "validate",
            CommandSpec::CurveZeta { .. } => "curve-zeta",
            CommandSpec::EllLfun { .. } => "ell-lfun",
            CommandSpec::FamilyReport { .. } => "family-report",
            CommandSpec::ZeroDensity { .. } => "zero-density",
            CommandSpec::ZeroHist { .. } => "zero-hist",
            CommandSpec::BsReport { .. } => "bs-report",
        }
    }
}

/// A fully resolved job: command, output directory, seed (echoed for
/// reproducibility of any random fixtures), tolerances.
#[derive(Debug, Clone)]
pub struct JobSpec {
    pub command: CommandSpec,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub tolerances: Tolerances,
}

/// Deterministic report: identical inputs, seed, and tolerances produce
/// byte-identical JSON (sections live in a sorted-key map and no timestamps
/// are recorded).
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    pub version: String,
    pub seed: u64,
    pub sections: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(command: &str, digest: String, seed: u64) -> Report {
        Report {
            command: command.to_string(),
            input_digest: digest,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            sections: Map::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "input_digest": self.input_digest,
            "version": self.version,
            "seed": self.seed,
            "sections": Value::Object(self.sections.clone()),
            "warnings": self.warnings,
        })
    }
}

/// 12-significant-digit formatting for bit-stable CSV output.
pub fn fmt_sig(v: f64) -> String {
    format!("{:.11e}", v)
}

fn digest_files(paths: &[&Path]) -> Result<String, RunError> {
    let mut hasher = Sha256::new();
    for p in paths {
        let bytes = fs::read(p)
            .map_err(|e| RunError::Input(format!("cannot read {}: {e}", p.display())))?;
        hasher.update(&bytes);
    }
    Ok(hex_string(&hasher.finalize()))
}

fn digest_args(parts: &[String]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update(b"\x1f");
    }
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run a job, writing report.json and the command's CSV files to the output
/// directory.
pub fn run(job: &JobSpec) -> Result<Report, RunError> {
    fs::create_dir_all(&job.out_dir)?;
    let report = match &job.command {
        CommandSpec::Validate { input, exact } => run_validate(job, input, *exact)?,
        CommandSpec::CurveZeta { q, genus, poly, counts, batch_degree } => {
            run_curve_zeta(job, *q, *genus, poly.as_deref(), counts.as_deref(), *batch_degree)?
        }
        CommandSpec::EllLfun { p, e, a, b } => run_ell_lfun(job, *p, *e, a, b)?,
        CommandSpec::FamilyReport { input, tower } => {
            run_family_report(job, input, tower.as_deref())?
        }
        CommandSpec::ZeroDensity { input, grid } => run_zero_density(job, input, *grid)?,
        CommandSpec::ZeroHist { input, bins, grid } => run_zero_hist(job, input, *bins, *grid)?,
        CommandSpec::BsReport { input, s } => run_bs_report(job, input, s)?,
    };
    let path = job.out_dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report.to_json())
        .map_err(|e| RunError::Input(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(report)
}

// ---------------------------------------------------------------- schemas

#[derive(Debug, Deserialize)]
struct LfunRecordJson {
    label: String,
    q: u64,
    w: u32,
    coeffs: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct ZetaFactorJson {
    w: u32,
    epsilon: i8,
    coeffs: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct ZetaRecordJson {
    label: String,
    q: u64,
    factors: Vec<ZetaFactorJson>,
}

#[derive(Debug, Deserialize)]
struct SummaryMemberJson {
    d_tilde: usize,
    degrees: Vec<usize>,
    lambdas: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct SummaryFamilyJson {
    q: u64,
    w: u32,
    epsilon: Vec<i8>,
    members: Vec<SummaryMemberJson>,
}

#[derive(Debug, Deserialize)]
struct TowerPlaceJson {
    place_deg: usize,
    a_v: i64,
    bad: bool,
    phi_vm: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct TowerJson {
    q: u64,
    nu: f64,
    phi: Vec<TowerPlaceJson>,
}

fn parse_coeffs(label: &str, coeffs: &[String]) -> Result<Vec<crate::qpoly::Rat>, RunError> {
    coeffs
        .iter()
        .map(|s| {
            parse_rat(s).ok_or_else(|| {
                RunError::Input(format!("{label}: cannot parse coefficient {s:?} as a rational"))
            })
        })
        .collect()
}

fn mode_for(job: &JobSpec, exact: bool) -> Mode {
    if exact {
        Mode::Exact
    } else {
        Mode::Numeric { rh_tol: job.tolerances.rh_tol }
    }
}

/// Parse a family file: a JSON array of L-function or zeta records, or an
/// object of normalized summaries.
fn load_family(job: &JobSpec, path: &Path) -> Result<FamilyRecord, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Input(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    match &value {
        Value::Array(items) => {
            let mut zetas = Vec::new();
            for item in items {
                if item.get("factors").is_some() {
                    let rec: ZetaRecordJson = serde_json::from_value(item.clone())
                        .map_err(|e| RunError::Input(format!("zeta record: {e}")))?;
                    let mut factors = Vec::new();
                    for f in &rec.factors {
                        let coeffs = parse_coeffs(&rec.label, &f.coeffs)?;
                        let lf = validate_lfunction(rec.q, f.w, coeffs, mode_for(job, false))
                            .map_err(|e| {
                                RunError::HardCheck(format!("{} (weight {}): {e}", rec.label, f.w))
                            })?;
                        factors.push((lf, f.epsilon));
                    }
                    let z = ZetaFunction::new(factors)
                        .map_err(|e| RunError::HardCheck(format!("{}: {e}", rec.label)))?;
                    zetas.push(z);
                } else {
                    let rec: LfunRecordJson = serde_json::from_value(item.clone())
                        .map_err(|e| RunError::Input(format!("L-function record: {e}")))?;
                    let coeffs = parse_coeffs(&rec.label, &rec.coeffs)?;
                    let lf = validate_lfunction(rec.q, rec.w, coeffs, mode_for(job, false))
                        .map_err(|e| RunError::HardCheck(format!("{}: {e}", rec.label)))?;
                    zetas.push(ZetaFunction::from_lfunction(lf));
                }
            }
            FamilyRecord::from_zetas(zetas, None)
                .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))
        }
        Value::Object(_) => {
            let fam: SummaryFamilyJson = serde_json::from_value(value)
                .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
            let members = fam
                .members
                .into_iter()
                .enumerate()
                .map(|(k, m)| MemberSummary {
                    label: format!("member-{k}"),
                    d_tilde: m.d_tilde,
                    degrees: m.degrees,
                    lambdas: m.lambdas,
                    lambdas_by_weight: None,
                })
                .collect();
            FamilyRecord::from_summaries(fam.q, fam.w, fam.epsilon, members)
                .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))
        }
        _ => Err(RunError::Input(format!("{}: expected array or object", path.display()))),
    }
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), RunError> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------- validate

fn run_validate(job: &JobSpec, input: &Path, exact: bool) -> Result<Report, RunError> {
    let digest = digest_files(&[input])?;
    let mut report = Report::new("validate", digest, job.seed);
    let text = fs::read_to_string(input)
        .map_err(|e| RunError::Input(format!("cannot read {}: {e}", input.display())))?;
    let records: Vec<LfunRecordJson> = serde_json::from_str(&text)
        .map_err(|e| RunError::Input(format!("{}: {e}", input.display())))?;
    let mut rows = Vec::new();
    for rec in &records {
        let coeffs = parse_coeffs(&rec.label, &rec.coeffs)?;
        let lf = validate_lfunction(rec.q, rec.w, coeffs, mode_for(job, exact))
            .map_err(|e| RunError::HardCheck(format!("{}: {e}", rec.label)))?;
        // per-record root dump: "theta,multiplicity"
        let root_rows: Vec<String> = lf
            .roots()
            .iter()
            .map(|r| format!("{},{}", fmt_sig(r.theta), r.multiplicity))
            .collect();
        write_csv(
            &job.out_dir.join(format!("roots_{}.csv", sanitize(&rec.label))),
            "theta,multiplicity",
            &root_rows,
        )?;
        rows.push(json!({
            "label": rec.label,
            "q": rec.q,
            "w": rec.w,
            "degree": lf.degree(),
            "omega": lf.root_number(),
            "distinct_roots": lf.roots().len(),
            "max_circle_deviation": lf.roots().iter().map(|r| {
                let expect = (rec.q as f64).powf(-(rec.w as f64)/2.0);
                ((r.value.norm() - expect).abs() / expect * 1e15).round() / 1e15
            }).fold(0.0, f64::max),
        }));
    }
    report.sections.insert("lfunctions".into(), Value::Array(rows));
    Ok(report)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

// ---------------------------------------------------------------- curves

fn parse_int_list(s: &str) -> Result<Vec<i64>, RunError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map_err(|e| RunError::Input(format!("cannot parse {x:?} as an integer: {e}")))
        })
        .collect()
}

fn curve_json(z: &CurveZeta) -> Value {
    json!({
        "counts": z.counts,
        "numerator_coeffs": z.numerator.coeffs().iter().map(format_rat).collect::<Vec<_>>(),
        "h": z.h.to_string(),
        "gamma": z.gammas,
        "genus": z.genus(),
    })
}

fn run_curve_zeta(
    job: &JobSpec,
    q: u64,
    genus: usize,
    poly: Option<&str>,
    counts: Option<&str>,
    batch_degree: Option<usize>,
) -> Result<Report, RunError> {
    let digest = digest_args(&[
        q.to_string(),
        genus.to_string(),
        poly.unwrap_or("").to_string(),
        counts.unwrap_or("").to_string(),
        batch_degree.map(|d| d.to_string()).unwrap_or_default(),
    ]);
    let mut report = Report::new("curve-zeta", digest, job.seed);
    let (p, e) = prime_power(q).ok_or_else(|| RunError::Input(format!("q = {q} is not a prime power")))?;

    if let Some(degree) = batch_degree {
        // batch mode: all squarefree monic f of the given degree
        let field = FieldSpec::new(p, e).map_err(|er| RunError::Input(er.to_string()))?;
        let polys =
            squarefree_monic_polys(&field, degree).map_err(|er| RunError::Input(er.to_string()))?;
        let mut rows = Vec::new();
        for f in &polys {
            let model = CurveModel::new(field.clone(), f.clone())
                .map_err(|er| RunError::Input(er.to_string()))?;
            let z = zeta_from_model(&model, Mode::Exact)
                .map_err(|er| RunError::HardCheck(format!("batch curve {:?}: {er}", poly_ints(&field, f))))?;
            rows.push(json!({
                "poly": poly_ints(&field, f),
                "counts": z.counts,
                "numerator_coeffs": z.numerator.coeffs().iter().map(format_rat).collect::<Vec<_>>(),
                "h": z.h.to_string(),
            }));
        }
        report.sections.insert("batch".into(), json!({
            "degree": degree,
            "count": rows.len(),
            "curves": rows,
        }));
        return Ok(report);
    }

    let z = if let Some(cs) = counts {
        let ns = parse_int_list(cs)?;
        if ns.iter().any(|n| *n < 0) {
            return Err(RunError::Input("point counts must be non-negative".into()));
        }
        let ns: Vec<u64> = ns.iter().map(|n| *n as u64).collect();
        zeta_from_counts(q, genus, &ns, Mode::Exact)
            .map_err(|er| RunError::HardCheck(format!("ingested counts: {er}")))?
    } else if let Some(ps) = poly {
        let ints = parse_int_list(ps)?;
        let field = FieldSpec::new(p, e).map_err(|er| RunError::Input(er.to_string()))?;
        let f = UniPoly::new(&field, ints.iter().map(|&c| field.from_index(c.rem_euclid(q as i64) as u64)).collect());
        let model =
            CurveModel::new(field, f).map_err(|er| RunError::Input(er.to_string()))?;
        if model.genus != genus {
            return Err(RunError::Input(format!(
                "polynomial has genus {}, --genus says {genus}",
                model.genus
            )));
        }
        zeta_from_model(&model, Mode::Exact)
            .map_err(|er| RunError::HardCheck(format!("curve y^2 = f(x): {er}")))?
    } else {
        return Err(RunError::Input("curve-zeta needs --poly, --counts, or --batch-degree".into()));
    };
    report.sections.insert("curve".into(), curve_json(&z));
    Ok(report)
}

/// Coefficients as element indices, for reporting.
fn poly_ints(field: &FieldSpec, f: &UniPoly) -> Vec<u64> {
    f.coeffs.iter().map(|c| field.index(c)).collect()
}

// ---------------------------------------------------------------- surfaces

fn run_ell_lfun(job: &JobSpec, p: u64, e: u32, a: &str, b: &str) -> Result<Report, RunError> {
    let digest = digest_args(&[p.to_string(), e.to_string(), a.to_string(), b.to_string()]);
    let mut report = Report::new("ell-lfun", digest, job.seed);
    let field = FieldSpec::new(p, e).map_err(|er| RunError::Input(er.to_string()))?;
    let to_poly = |s: &str| -> Result<UniPoly, RunError> {
        let ints = parse_int_list(s)?;
        Ok(UniPoly::new(
            &field,
            ints.iter().map(|&c| field.from_index(c.rem_euclid(field.q as i64) as u64)).collect(),
        ))
    };
    let surface = EllipticSurface::new(field.clone(), to_poly(a)?, to_poly(b)?)
        .map_err(|er| RunError::Input(er.to_string()))?;
    let data = ell_lfunction(&surface)
        .map_err(|er| RunError::HardCheck(format!("E: y^2 = x^3 + A x + B: {er}")))?;
    let places: Vec<Value> = data
        .bad_places
        .iter()
        .map(|r| {
            let place = match &r.place {
                Place::Finite(pi) => json!(poly_ints(&field, pi)),
                Place::Infinity => json!("infinity"),
            };
            json!({
                "place": place,
                "degree": r.degree,
                "type": r.reduction.as_str(),
                "n_v": r.n_v,
                "a_v": r.a_v,
            })
        })
        .collect();
    report.sections.insert("ell_lfun".into(), json!({
        "n_E": data.n_e,
        "degree": data.lfun.degree(),
        "coeffs": data.lfun.coeffs().iter().map(format_rat).collect::<Vec<_>>(),
        "omega": data.omega,
        "lambdas": data.lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "places": places,
    }));
    Ok(report)
}

// ---------------------------------------------------------------- families

fn classification_json(data: &AsymptoticData) -> Value {
    json!({
        "exact": matches!(data.exactness, crate::asymptotics::Exactness::Exact),
        "good": matches!(data.goodness, crate::asymptotics::Goodness::Good),
        "very_exact": data.very_exact.as_str(),
        "negligible_weights": data.negligible,
        "w_essential": data.w_essential,
        "d_tilde_last": data.d_tilde_last,
        "growth_warning": data.growth_warning,
        "deltas": data.deltas,
        "delta_diagnostics": data.delta_diag,
    })
}

fn run_family_report(
    job: &JobSpec,
    input: &Path,
    tower: Option<&Path>,
) -> Result<Report, RunError> {
    let mut paths: Vec<&Path> = vec![input];
    if let Some(t) = tower {
        paths.push(t);
    }
    let digest = digest_files(&paths)?;
    let mut report = Report::new("family-report", digest, job.seed);
    let fam = load_family(job, input)?;
    let data = estimate_limits(&fam, job.tolerances.conv_tol)
        .map_err(|e| RunError::Input(e.to_string()))?;
    if data.growth_warning {
        report.warnings.push("degree growth not visible over the tail half".into());
    }
    report.sections.insert("classification".into(), classification_json(&data));

    // lambda table CSV: f,lambda,diagnostic
    let rows: Vec<String> = data
        .lambdas
        .iter()
        .zip(&data.lambda_diag)
        .enumerate()
        .map(|(i, (l, d))| format!("{},{},{}", i + 1, fmt_sig(*l), fmt_sig(*d)))
        .collect();
    write_csv(&job.out_dir.join("lambda.csv"), "f,lambda,diagnostic", &rows)?;
    report.sections.insert("lambda_table".into(), json!({
        "f": (1..=data.f_depth).collect::<Vec<_>>(),
        "lambda": data.lambdas,
        "diagnostic": data.lambda_diag,
    }));

    let split = essential_split(&fam, &data).map_err(|e| RunError::Input(e.to_string()))?;
    if let Some(worst) = split.coefneg_worst.iter().cloned().fold(None::<f64>, |a, b| Some(a.map_or(b, |x| x.max(b)))) {
        report.sections.insert("coefficient_negligibility".into(), json!({
            "per_member_worst_ratio": split.coefneg_worst,
        }));
        if worst > 1.0 + 1e-9 {
            return Err(RunError::HardCheck(format!(
                "negligible-part coefficient bound violated (ratio {worst})"
            )));
        }
    }

    // basic inequalities
    let mut ineq = Map::new();
    match basic_inequality_l(&data, 16.min(data.f_depth)) {
        Ok(r) => {
            ineq.insert("l_form".into(), json!({
                "b": r.b, "lhs": r.lhs, "slack": r.slack,
                "limit_sum": r.limit_sum, "limit_slack": r.limit_slack,
            }));
            if r.slack < -job.tolerances.eval_tol {
                return Err(RunError::HardCheck(format!(
                    "basic inequality (L form) violated: slack = {}",
                    r.slack
                )));
            }
        }
        Err(e) => {
            report.warnings.push(format!("L-form basic inequality skipped: {e}"));
        }
    }
    let we = data.w_essential as f64;
    let mut zeta_rows = Vec::new();
    for k in 1..=5 {
        let s = we / 2.0 + k as f64 / 12.0;
        if s >= (we + 1.0) / 2.0 {
            break;
        }
        let r = basic_inequality_zeta(&data, s).map_err(|e| RunError::Input(e.to_string()))?;
        if !r.ordering_ok {
            return Err(RunError::HardCheck(format!(
                "basic inequality (zeta form) ordering violated at s = {s}"
            )));
        }
        zeta_rows.push(json!({
            "s": r.s, "lower": r.lower, "mid": r.mid, "upper": r.upper,
            "tail_bound": r.tail_bound,
        }));
    }
    ineq.insert("zeta_form".into(), Value::Array(zeta_rows));
    report.sections.insert("inequalities".into(), Value::Object(ineq));

    // curve-type families: Euler-Kronecker comparison through phi estimates
    if data.negligible == vec![0, 2]
        && data.w_essential == 1
        && data.lambdas.iter().all(|l| *l >= -1e-9)
    {
        if let Some(zetas) = &fam.zetas {
            let last = &fam.members[fam.members.len() - 1];
            let g_last_int = (last.degrees[1] / 2).max(1);
            let depth = crate::curve::meaningful_phi_depth(fam.q, g_last_int).min(fam.f_depth);
            let counts: Vec<u64> =
                last.lambdas[..depth].iter().map(|l| l.round().max(0.0) as u64).collect();
            match phi_from_counts(&counts) {
                Ok(phis) => {
                    let g_last = last.degrees[1] as f64 / 2.0;
                    let phi_norm: Vec<f64> = phis
                        .iter()
                        .map(|p| p.to_string().parse::<f64>().unwrap_or(0.0) / g_last)
                        .collect();
                    let (limit, tail) =
                        ek_limit(&phi_norm, fam.q).map_err(|e| RunError::Input(e.to_string()))?;
                    let mut gammas = Vec::new();
                    for z in zetas {
                        let numerator = z
                            .factors()
                            .iter()
                            .find(|(lf, _)| lf.weight() == 1)
                            .map(|(lf, _)| lf.clone());
                        if let Some(numer) = numerator {
                            let g = numer.degree() as f64 / 2.0;
                            let gamma0 = euler_kronecker_from_numerator(&numer, 0)[0];
                            gammas.push(json!({
                                "genus": g,
                                "gamma0": gamma0,
                                "gamma0_over_g": gamma0 / g.max(1.0),
                            }));
                        }
                    }
                    // soft trend check: |gamma0/g - limit| non-increasing
                    let gaps: Vec<f64> = gammas
                        .iter()
                        .map(|g| (g["gamma0_over_g"].as_f64().unwrap() - limit).abs())
                        .collect();
                    let tail_gaps = &gaps[gaps.len() / 2..];
                    let trending = tail_gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9);
                    if !trending {
                        report
                            .warnings
                            .push("Euler-Kronecker gap to the phi-limit is not yet monotone (soft check)".into());
                    }
                    report.sections.insert("euler_kronecker".into(), json!({
                        "phi_estimates": phi_norm,
                        "limit": limit,
                        "limit_tail": tail,
                        "per_member": gammas,
                        "gaps": gaps,
                    }));
                }
                Err(e) => report.warnings.push(format!("phi inversion skipped: {e}")),
            }
        }
    }

    if let Some(tower_path) = tower {
        let text = fs::read_to_string(tower_path)
            .map_err(|e| RunError::Input(format!("cannot read {}: {e}", tower_path.display())))?;
        let tj: TowerJson = serde_json::from_str(&text)
            .map_err(|e| RunError::Input(format!("{}: {e}", tower_path.display())))?;
        let table = TowerTable {
            q: tj.q,
            nu: tj.nu,
            places: tj
                .phi
                .into_iter()
                .map(|p| TowerPlace { place_deg: p.place_deg, a_v: p.a_v, bad: p.bad, phi: p.phi_vm })
                .collect(),
        };
        let out = base_change_lambda(&table, fam.f_depth.max(8))
            .map_err(|e| RunError::Input(e.to_string()))?;
        for w in &out.warnings {
            report.warnings.push(format!("tower: {w}"));
        }
        let rows: Vec<String> = out
            .lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{},{}", i + 1, fmt_sig(*l)))
            .collect();
        write_csv(&job.out_dir.join("tower_lambda.csv"), "f,lambda", &rows)?;
        report.sections.insert("tower".into(), json!({
            "nu": table.nu,
            "lambda": out.lambdas,
            "inequality_sum": out.inequality_sum,
            "inequality_slack": out.inequality_slack,
        }));
        if out.inequality_slack < -job.tolerances.eval_tol {
            report.warnings.push(format!(
                "base-change inequality slack negative ({}): finite data need not satisfy the asymptotic bound",
                out.inequality_slack
            ));
        }
    }
    Ok(report)
}

fn density_csv(job: &JobSpec, density: &DensitySamples, name: &str) -> Result<(), RunError> {
    let rows: Vec<String> = density
        .grid
        .iter()
        .zip(&density.values)
        .map(|(x, v)| format!("{},{}", fmt_sig(*x), fmt_sig(*v)))
        .collect();
    write_csv(&job.out_dir.join(name), "x,value", &rows)
}

fn family_density(
    job: &JobSpec,
    fam: &FamilyRecord,
    data: &AsymptoticData,
    grid: usize,
) -> DensitySamples {
    let _ = job;
    limit_density(
        data.essential_lambdas(),
        fam.q,
        data.w_essential,
        grid,
        data.very_exact == VeryExact::VeryExact,
    )
}

fn run_zero_density(job: &JobSpec, input: &Path, grid: usize) -> Result<Report, RunError> {
    let digest = digest_files(&[input])?;
    let mut report = Report::new("zero-density", digest, job.seed);
    let fam = load_family(job, input)?;
    let data = estimate_limits(&fam, job.tolerances.conv_tol)
        .map_err(|e| RunError::Input(e.to_string()))?;
    report.sections.insert("classification".into(), classification_json(&data));
    let density = family_density(job, &fam, &data, grid);
    if density.formal {
        report.warnings.push(
            "very-exactness not established: the density series is a formal truncation".into(),
        );
    }
    let min = density.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -2.0 * density.tail_bound - job.tolerances.eval_tol {
        report.warnings.push(format!(
            "density dips to {min}, below the -2*tail_bound margin {}",
            -2.0 * density.tail_bound
        ));
    }
    density_csv(job, &density, "density.csv")?;
    report.sections.insert("density".into(), json!({
        "grid_points": density.grid.len(),
        "truncation": density.truncation,
        "tail_bound": density.tail_bound,
        "min_value": min,
        "formal": density.formal,
    }));
    // cosine inequality sweep: x,slack
    let slacks = cosine_inequality_slack(data.essential_lambdas(), fam.q, data.w_essential, grid);
    let rows: Vec<String> = slacks
        .iter()
        .map(|(x, s)| format!("{},{}", fmt_sig(*x), fmt_sig(*s)))
        .collect();
    write_csv(&job.out_dir.join("inequality_sweep.csv"), "x,slack", &rows)?;
    let min_slack = slacks.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
    report.sections.insert("cosine_inequality".into(), json!({
        "min_slack": min_slack,
        "tail_bound": density.tail_bound,
    }));
    if min_slack < -density.tail_bound - job.tolerances.eval_tol {
        report.warnings.push(format!(
            "family cosine inequality slack {min_slack} below the tail margin (soft check)"
        ));
    }
    Ok(report)
}

/// Zero measures of the essential-weight factors of each member.
fn member_measures(fam: &FamilyRecord, data: &AsymptoticData) -> Result<Vec<ZeroMeasure>, RunError> {
    let zetas = fam.zetas.as_ref().ok_or_else(|| {
        RunError::Input("zero measures need explicit factor data, not summaries".into())
    })?;
    let mut out = Vec::new();
    for z in zetas {
        let lf = z
            .factors()
            .iter()
            .find(|(lf, _)| lf.weight() == data.w_essential)
            .map(|(lf, _)| lf);
        if let Some(lf) = lf {
            out.push(zero_measure(lf));
        }
    }
    if out.is_empty() {
        return Err(RunError::Input("no essential-weight factors found".into()));
    }
    Ok(out)
}

fn run_zero_hist(job: &JobSpec, input: &Path, bins: usize, grid: usize) -> Result<Report, RunError> {
    let digest = digest_files(&[input])?;
    let mut report = Report::new("zero-hist", digest, job.seed);
    let fam = load_family(job, input)?;
    let data = estimate_limits(&fam, job.tolerances.conv_tol)
        .map_err(|e| RunError::Input(e.to_string()))?;
    let density = family_density(job, &fam, &data, grid);
    let measures = member_measures(&fam, &data)?;
    let rep = histogram_compare(&measures, &density, bins);
    if rep.bin_too_fine {
        report.warnings.push(format!(
            "bins = {bins} exceeds d/2 for the last member; expect noisy bins"
        ));
    }
    let rows: Vec<String> = rep
        .bins
        .iter()
        .map(|(lo, hi, e, p)| {
            format!("{},{},{},{}", fmt_sig(*lo), fmt_sig(*hi), fmt_sig(*e), fmt_sig(*p))
        })
        .collect();
    write_csv(&job.out_dir.join("histogram.csv"), "bin_lo,bin_hi,empirical,predicted", &rows)?;
    report.sections.insert("histogram".into(), json!({
        "bins": bins,
        "max_deviation_per_member": rep.max_deviation,
        "last_member_table_rows": rep.bins.len(),
    }));
    Ok(report)
}

fn run_bs_report(job: &JobSpec, input: &Path, s_list: &[f64]) -> Result<Report, RunError> {
    let digest = digest_files(&[input])?;
    let mut report = Report::new("bs-report", digest, job.seed);
    let fam = load_family(job, input)?;
    let data = estimate_limits(&fam, job.tolerances.conv_tol)
        .map_err(|e| RunError::Input(e.to_string()))?;
    report.sections.insert("classification".into(), classification_json(&data));
    let default_s = data.w_essential as f64 / 2.0 + 0.25;
    let points: Vec<f64> = if s_list.is_empty() { vec![default_s] } else { s_list.to_vec() };
    let mut all_rows = Vec::new();
    let mut sections = Vec::new();
    for &s in &points {
        let rep = brauer_siegel_ratio(&fam, &data, Complex64::new(s, 0.0))
            .map_err(|e| RunError::Input(e.to_string()))?;
        for (k, (d, ratio, gap)) in rep.rows.iter().enumerate() {
            all_rows.push(format!(
                "{},{},{},{},{}",
                k,
                d,
                fmt_sig(ratio.re),
                fmt_sig(rep.limit.re),
                fmt_sig(*gap)
            ));
        }
        if !rep.converging {
            report
                .warnings
                .push(format!("BS deviations not monotone over the tail at s = {s} (soft check)"));
        }
        sections.push(json!({
            "s": s,
            "limit": rep.limit.re,
            "limit_tail": rep.limit_tail,
            "gaps": rep.rows.iter().map(|r| r.2).collect::<Vec<_>>(),
            "negligible_part_last": rep.negligible_part_last,
        }));
    }
    write_csv(&job.out_dir.join("bs_ratios.csv"), "k,d_tilde,ratio,limit,gap", &all_rows)?;
    report.sections.insert("brauer_siegel".into(), Value::Array(sections));

    // central-point data and the rank-ratio soft check
    if let Some(zetas) = &fam.zetas {
        let centrals: Vec<_> =
            zetas.iter().map(|z| central_data(z, data.w_essential)).collect();
        let rs: Vec<i64> = centrals.iter().map(|c| c.r).collect();
        let ds: Vec<usize> = zetas.iter().map(|z| z.total_degree()).collect();
        let rr = rank_ratio(&rs, &ds);
        if data.very_exact == VeryExact::VeryExact
            && data.epsilon_essential() == 1
            && !rr.trending_down
            && rr.tail_max > 0.0
        {
            report
                .warnings
                .push("central multiplicity ratios not trending down (soft check)".into());
        }
        // upper-bound comparator at the central point (soft): for very exact
        // families with eps = +1, log|c|/d should not exceed log zeta_lim(w_e/2)
        let mut comparator = None;
        if data.very_exact == VeryExact::VeryExact && data.epsilon_essential() == 1 {
            let lz = LimitZeta::from_data(&data);
            if let Ok(lim) =
                limit_log_zeta(&lz, Complex64::new(data.w_essential as f64 / 2.0, 0.0))
            {
                let last = centrals.last().unwrap();
                let lhs = last.log_abs_c / ds.last().copied().unwrap_or(1) as f64;
                if lhs > lim.value.re + lim.tail_bound + 0.1 {
                    report.warnings.push(format!(
                        "central-value ratio {lhs} above the limit bound {} (soft comparator)",
                        lim.value.re
                    ));
                }
                comparator = Some(json!({
                    "log_abs_c_over_d_last": lhs,
                    "limit_log_zeta_central": lim.value.re,
                    "limit_tail": lim.tail_bound,
                    "rigorous_tail": lim.rigorous,
                }));
            }
        }
        report.sections.insert("central".into(), json!({
            "r": rs,
            "log_abs_c": centrals.iter().map(|c| c.log_abs_c).collect::<Vec<_>>(),
            "rank_ratios": rr.ratios,
            "rank_ratio_tail_max": rr.tail_max,
            "upper_bound_comparator": comparator,
        }));
    }
    Ok(report)
}

/// Re-emit a CSV kind from a finished report (plot-data export).
pub fn emit_plotdata(report: &Report, kind: &str, out: &Path) -> Result<(), RunError> {
    match kind {
        "lambda" => {
            let sec = report
                .sections
                .get("lambda_table")
                .ok_or_else(|| RunError::MissingSection("lambda_table".into()))?;
            let f = sec["f"].as_array().unwrap();
            let l = sec["lambda"].as_array().unwrap();
            let d = sec["diagnostic"].as_array().unwrap();
            let rows: Vec<String> = f
                .iter()
                .zip(l.iter().zip(d))
                .map(|(f, (l, d))| {
                    format!(
                        "{},{},{}",
                        f.as_u64().unwrap(),
                        fmt_sig(l.as_f64().unwrap()),
                        fmt_sig(d.as_f64().unwrap())
                    )
                })
                .collect();
            write_csv(out, "f,lambda,diagnostic", &rows)
        }
        other => Err(RunError::MissingSection(other.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn job(cmd: CommandSpec, dir: &Path) -> JobSpec {
        JobSpec {
            command: cmd,
            out_dir: dir.to_path_buf(),
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn validate_fixture_roundtrip() {
        let dir = tmpdir();
        let input = dir.path().join("lfuns.json");
        fs::write(
            &input,
            r#"[
              {"label": "curve-f2", "q": 2, "w": 1, "coeffs": ["1", "0", "2"]},
              {"label": "triv", "q": 5, "w": 0, "coeffs": ["1", "-1"]}
            ]"#,
        )
        .unwrap();
        let j = job(CommandSpec::Validate { input: input.clone(), exact: true }, dir.path());
        let rep = run(&j).unwrap();
        let recs = rep.sections["lfunctions"].as_array().unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0]["omega"], 1);
        assert_eq!(recs[1]["omega"], -1);
        assert!(dir.path().join("roots_curve-f2.csv").exists());
        assert!(dir.path().join("report.json").exists());
        // determinism: run twice, byte-identical report
        let first = fs::read(dir.path().join("report.json")).unwrap();
        run(&j).unwrap();
        let second = fs::read(dir.path().join("report.json")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn validate_rejects_bad_record() {
        let dir = tmpdir();
        let input = dir.path().join("bad.json");
        fs::write(&input, r#"[{"label": "bad", "q": 2, "w": 1, "coeffs": ["1", "3"]}]"#).unwrap();
        let j = job(CommandSpec::Validate { input, exact: false }, dir.path());
        let err = run(&j).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("bad"));
    }

    #[test]
    fn curve_zeta_counts_mode() {
        let dir = tmpdir();
        let j = job(
            CommandSpec::CurveZeta {
                q: 2,
                genus: 1,
                poly: None,
                counts: Some("3".into()),
                batch_degree: None,
            },
            dir.path(),
        );
        let rep = run(&j).unwrap();
        let sec = &rep.sections["curve"];
        assert_eq!(sec["numerator_coeffs"], json!(["1", "0", "2"]));
        assert_eq!(sec["h"], "3");
    }

    #[test]
    fn ell_lfun_fixture() {
        let dir = tmpdir();
        let j = job(
            CommandSpec::EllLfun { p: 5, e: 1, a: "0,1".into(), b: "1".into() },
            dir.path(),
        );
        let rep = run(&j).unwrap();
        let sec = &rep.sections["ell_lfun"];
        assert_eq!(sec["n_E"], 5);
        assert_eq!(sec["degree"], 1);
        assert_eq!(sec["coeffs"], json!(["1", "-5"]));
        assert_eq!(sec["omega"], -1);
    }

    #[test]
    fn family_report_lambda_minus_one() {
        // the (1 - q^(-s))^k family: exact, good, not very exact
        let dir = tmpdir();
        let input = dir.path().join("family.json");
        let mut records = Vec::new();
        for k in [2usize, 4, 6, 8, 12, 16] {
            // (1-u)^k coefficients: binomials with alternating signs
            let mut coeffs = vec![1i64];
            for i in 1..=k {
                let prev = coeffs[i - 1];
                coeffs.push(-prev * (k as i64 - i as i64 + 1) / i as i64);
            }
            let strs: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
            records.push(json!({"label": format!("pow{k}"), "q": 2, "w": 0, "coeffs": strs}));
        }
        fs::write(&input, serde_json::to_string(&records).unwrap()).unwrap();
        let j = job(CommandSpec::FamilyReport { input, tower: None }, dir.path());
        let rep = run(&j).unwrap();
        let cls = &rep.sections["classification"];
        assert_eq!(cls["exact"], true);
        assert_eq!(cls["good"], true);
        assert_eq!(cls["very_exact"], "not_very_exact");
        assert!(dir.path().join("lambda.csv").exists());
    }

    #[test]
    fn summary_family_ingest() {
        let dir = tmpdir();
        let input = dir.path().join("summary.json");
        fs::write(
            &input,
            r#"{
              "q": 2, "w": 0, "epsilon": [1],
              "members": [
                {"d_tilde": 2, "degrees": [2], "lambdas": [-2, -2, -2, -2]},
                {"d_tilde": 4, "degrees": [4], "lambdas": [-4, -4, -4, -4]},
                {"d_tilde": 8, "degrees": [8], "lambdas": [-8, -8, -8, -8]},
                {"d_tilde": 16, "degrees": [16], "lambdas": [-16, -16, -16, -16]}
              ]
            }"#,
        )
        .unwrap();
        let j = job(CommandSpec::FamilyReport { input, tower: None }, dir.path());
        let rep = run(&j).unwrap();
        assert_eq!(rep.sections["classification"]["very_exact"], "not_very_exact");
    }

    #[test]
    fn missing_input_is_exit_3() {
        let dir = tmpdir();
        let j = job(
            CommandSpec::Validate { input: dir.path().join("nope.json"), exact: false },
            dir.path(),
        );
        let err = run(&j).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn emit_plotdata_missing_section() {
        let rep = Report::new("x", "d".into(), 0);
        let err = emit_plotdata(&rep, "lambda", Path::new("/tmp/nope.csv")).unwrap_err();
        assert!(matches!(err, RunError::MissingSection(_)));
    }
}
