//! End-to-end verification runs and their JSON reports.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::counting::{count_critical_rank_one, expected_codim};
use crate::critical_space::{critical_space, membership_residual, span_rank, span_residual, CriticalSpace};
use crate::error::{Error, Result};
use crate::format::TensorFormat;
use crate::linalg::{hermitian_svd_baseline, C64};
use crate::pairing::binary_d;
use crate::solver::{
    als_critical_rank_k, solve_critical_rank_one, w_tensor, AlsConfig, AlsResult, CriticalPoint,
    SolveOutput, TrackerConfig,
};
use crate::tensor::{random_tensor, Tensor, VectorTuple};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest number of homotopy paths `verify` is willing to track.
pub const MAX_VERIFY_PATHS: u128 = 100_000;

/// Every tolerance a report checks against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative singular value threshold for numerical ranks.
    pub rank: f64,
    /// Critical space membership residual.
    pub membership: f64,
    /// Newton residual of a critical point.
    pub newton: f64,
    /// Relative distance of `f` to the span of its critical tensors.
    pub span: f64,
    /// Lower bound on the singular value gap at a measured rank.
    pub min_gap: f64,
    pub perpendicularity: f64,
    /// Matching against the SVD for matrices.
    pub svd_match: f64,
    /// ALS points count as critical below this criticality residual ...
    pub als_criticality: f64,
    /// ... and must then lie in `H_f` up to this.
    pub als_membership: f64,
    /// Eckart–Young objective agreement, relative to `‖f‖²`.
    pub eckart_young: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-8,
            membership: 1e-8,
            newton: 1e-10,
            span: 1e-8,
            min_gap: 1e4,
            perpendicularity: 1e-8,
            svd_match: 1e-6,
            als_criticality: 1e-8,
            als_membership: 1e-6,
            eckart_young: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub als_restarts: usize,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new() -> Self {
        Self {
            tolerances: Tolerances::default(),
            als_restarts: 10,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: Value,
    /// `"<= 1e-8"`, `"== 6"`, …
    pub requirement: String,
    /// `theorem`, `count` or `observation`.
    pub kind: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: &'static str,
    pub command: String,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub data: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub errors: Vec<String>,
    pub passed: bool,
}

impl Report {
    fn new(command: &str, format: Option<&TensorFormat>, seed: Option<u64>, tol: &Tolerances) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            format: format.map(|f| f.to_string()),
            seed,
            tolerances: tol.clone(),
            data: Map::new(),
            assertions: Vec::new(),
            errors: Vec::new(),
            passed: true,
        }
    }

    fn put(&mut self, key: &str, v: Value) {
        self.data.insert(key.into(), v);
    }

    fn check(&mut self, name: &str, kind: &'static str, passed: bool, value: Value, requirement: String) {
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            value,
            requirement,
            kind,
        });
    }

    fn at_most(&mut self, name: &str, kind: &'static str, value: f64, tol: f64) {
        self.check(name, kind, value <= tol, json!(value), format!("<= {tol:e}"));
    }

    fn equal(&mut self, name: &str, kind: &'static str, value: usize, want: usize) {
        self.check(name, kind, value == want, json!(value), format!("== {want}"));
    }

    fn error(&mut self, stage: &str, e: &Error) {
        self.passed = false;
        self.errors.push(format!("{stage}: {e}"));
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn bigint_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn tuple_json(t: &VectorTuple) -> Value {
    t.vectors()
        .iter()
        .map(|v| v.iter().map(|&z| complex_json(z)).collect::<Vec<_>>())
        .collect()
}

pub fn point_json(p: &CriticalPoint) -> Value {
    json!({
        "tuple": tuple_json(&p.tuple),
        "scale": p.scale.map(complex_json),
        "newton_residual": p.newton_residual,
        "membership_residual": p.membership_residual,
        "perpendicularity": p.perpendicularity,
        "isotropic": p.isotropic,
    })
}

pub fn solve_json(out: &SolveOutput) -> Value {
    let s = &out.stats;
    json!({
        "paths": s.paths.to_string(),
        "finite": s.finite,
        "at_infinity": s.at_infinity,
        "singular": s.singular,
        "failed": s.failed,
        "duplicates": s.duplicates,
        "retracked": s.retracked,
        "warning": out.warning,
        "points": out.points.iter().map(point_json).collect::<Vec<_>>(),
    })
}

pub fn als_json(r: &AlsResult) -> Value {
    json!({
        "objective": r.objective,
        "criticality_residual": r.criticality_residual,
        "sweeps": r.sweeps,
        "converged": r.converged,
        "restart": r.restart,
        "max_term_norm": r.max_term_norm,
        "terms": r.terms.iter().map(|t| json!({"coeff": t.coeff, "vectors": t.vectors})).collect::<Vec<_>>(),
    })
}

pub fn critspace_json(cs: &CriticalSpace) -> Value {
    json!({
        "dim_t": cs.format.dim_t(),
        "dim": cs.dim(),
        "codim": cs.codim,
        "gap": finite_or_null(cs.gap),
        "min_kept_relative": cs.min_kept_relative,
        "singular_values": cs.singular_values,
    })
}

/// `D^N`, the number of homotopy paths for `format`, if it fits.
pub fn path_count(format: &TensorFormat) -> Option<u128> {
    (format.total_degree() as u128).checked_pow(format.segre_dim() as u32)
}

fn tracker(seed: u64, cfg: &RunConfig) -> TrackerConfig {
    TrackerConfig {
        seed,
        threads: cfg.threads,
        ..TrackerConfig::default()
    }
}

fn critspace_stage(r: &mut Report, f: &Tensor, tol: &Tolerances) -> Option<CriticalSpace> {
    match critical_space(f, tol.rank) {
        Ok(cs) => {
            r.put("critical_space", critspace_json(&cs));
            Some(cs)
        }
        Err(e) => {
            r.error("critical_space", &e);
            None
        }
    }
}

/// Runs the solver and the checks every critical point must pass.
fn solver_stage(r: &mut Report, f: &Tensor, seed: u64, cfg: &RunConfig) -> Option<SolveOutput> {
    let tol = &cfg.tolerances;
    let format = f.format();
    match path_count(format) {
        Some(p) if p <= MAX_VERIFY_PATHS => {}
        p => {
            let n = p.map_or("more than 2^128".to_string(), |p| p.to_string());
            r.put("solver", json!({ "skipped": format!("{n} paths exceed {MAX_VERIFY_PATHS}") }));
            return None;
        }
    }
    let out = match solve_critical_rank_one(f, &tracker(seed, cfg)) {
        Ok(out) => out,
        Err(e) => {
            r.error("solver", &e);
            return None;
        }
    };
    r.put("solver", solve_json(&out));
    let count = count_critical_rank_one(format);
    r.put("count", bigint_json(&count));
    let want = count.to_usize().unwrap_or(usize::MAX);
    r.equal("points_equal_count", "count", out.points.len(), want);
    r.equal("non_isotropic_points", "count", out.non_isotropic().count(), want);
    let worst = |g: &dyn Fn(&CriticalPoint) -> f64| out.points.iter().map(g).fold(0.0, f64::max);
    r.at_most("point_newton_residual", "theorem", worst(&|p| p.newton_residual), tol.newton);
    r.at_most("point_membership", "theorem", worst(&|p| p.membership_residual), tol.membership);
    r.at_most(
        "point_perpendicularity",
        "theorem",
        worst(&|p| p.perpendicularity.unwrap_or(0.0)),
        tol.perpendicularity,
    );
    Some(out)
}

/// Rank of the span of the scaled critical tensors and the distance from
/// `f` to it. Returns `(rank, residual)`.
fn span_stage(r: &mut Report, f: &Tensor, out: &SolveOutput, tol: &Tolerances) -> Option<(usize, f64)> {
    let tensors: Vec<Tensor> = out.non_isotropic().map(|p| p.tensor.clone()).collect();
    let rank = match span_rank(f.format(), &tensors, tol.rank) {
        Ok(rank) => rank,
        Err(e) => {
            r.error("span", &e);
            return None;
        }
    };
    let residual = match span_residual(&tensors, f) {
        Ok((res, _)) => res,
        Err(e) => {
            r.error("span", &e);
            return None;
        }
    };
    r.put(
        "span",
        json!({
            "rank": rank.rank,
            "gap": finite_or_null(rank.gap),
            "singular_values": rank.singular_values,
            "f_residual": residual,
        }),
    );
    Some((rank.rank, residual))
}

fn matrix_stage(r: &mut Report, f: &Tensor, out: &SolveOutput, tol: &Tolerances) -> Result<()> {
    let svd = hermitian_svd_baseline(&f.to_matrix()?)?;
    let k = svd.sigma.len();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let u: Vec<f64> = svd.u.column(i).iter().copied().collect();
        let v: Vec<f64> = svd.v.column(i).iter().copied().collect();
        let pair = VectorTuple::from_real(&[u, v])?;
        let best = out
            .points
            .iter()
            .filter_map(|p| {
                let c = p.scale?;
                Some(p.tuple.projective_distance(&pair).max((c.norm() - svd.sigma[i]).abs() / svd.sigma[0]))
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    r.put("singular_values", json!(svd.sigma));
    r.at_most("points_match_svd", "theorem", worst, tol.svd_match);
    Ok(())
}

fn binary_stage(r: &mut Report, f: &Tensor, cs: &CriticalSpace, tol: &Tolerances) -> Result<()> {
    let df = binary_d(f)?;
    let dnorm = df.norm();
    let mut worst: f64 = 0.0;
    for h in cs.basis_tensors() {
        worst = worst.max(h.inner(&df)?.norm() / (h.norm() * dnorm));
    }
    r.equal("critical_space_is_d_perp_dim", "theorem", cs.dim(), f.format().dim_t() - 1);
    r.at_most("critical_space_is_d_perp", "theorem", worst, tol.rank);
    Ok(())
}

fn als_stage(r: &mut Report, f: &Tensor, seed: u64, cfg: &RunConfig) {
    let tol = &cfg.tolerances;
    let als_cfg = AlsConfig {
        seed,
        restarts: cfg.als_restarts.max(1),
        ..AlsConfig::default()
    };
    let svd = f.to_matrix().ok().and_then(|a| hermitian_svd_baseline(&a).ok());
    let f2 = f.norm() * f.norm();
    let mut results = Vec::new();
    for k in 1..=2 {
        let res = match als_critical_rank_k(f, k, &als_cfg) {
            Ok(res) => res,
            Err(e) => {
                r.error(&format!("als k={k}"), &e);
                continue;
            }
        };
        let mut entry = als_json(&res);
        let membership = if res.g.is_zero() {
            None
        } else {
            membership_residual(f, &res.g).ok()
        };
        entry["membership_residual"] = json!(membership);
        if res.criticality_residual <= tol.als_criticality {
            if let Some(m) = membership {
                r.at_most(&format!("als_k{k}_membership"), "theorem", m, tol.als_membership);
            }
            if let Some(svd) = svd.as_ref().filter(|s| k < s.sigma.len()) {
                let tail: f64 = svd.sigma[k..].iter().map(|s| s * s).sum();
                entry["eckart_young_tail"] = json!(tail);
                r.at_most(
                    &format!("als_k{k}_eckart_young"),
                    "theorem",
                    (res.objective - tail).abs() / f2,
                    tol.eckart_young,
                );
            }
        }
        entry["k"] = json!(k);
        results.push(entry);
    }
    r.put("als", Value::Array(results));
}

/// The full chain of checks on a random real tensor of `format`.
pub fn cmd_verify(format: &TensorFormat, seed: u64, cfg: &RunConfig) -> Report {
    let tol = &cfg.tolerances;
    let mut r = Report::new("verify", Some(format), Some(seed), tol);
    let f = random_tensor(format, seed, true);
    r.put("dim_t", json!(format.dim_t()));
    r.put("theorem_triangle_ok", json!(format.theorem_triangle_ok()));
    r.put("all_triangle_ok", json!(format.all_triangle_ok()));
    let expected = expected_codim(format);
    r.put("expected_codim", json!(expected.value));

    let cs = critspace_stage(&mut r, &f, tol);
    if let Some(cs) = &cs {
        if format.theorem_triangle_ok() {
            r.equal("codim", "theorem", cs.codim, expected.value);
            r.check(
                "codim_gap",
                "theorem",
                cs.gap >= tol.min_gap,
                finite_or_null(cs.gap),
                format!(">= {:e}", tol.min_gap),
            );
        }
        if format.factors() == 1 && format.dim(0) == 2 {
            if let Err(e) = binary_stage(&mut r, &f, cs, tol) {
                r.error("binary", &e);
            }
        }
    }
    match membership_residual(&f, &f) {
        Ok(m) => r.at_most("f_membership", "theorem", m, tol.membership),
        Err(e) => r.error("f_membership", &e),
    }

    if let Some(out) = solver_stage(&mut r, &f, seed, cfg) {
        if let Some((rank, residual)) = span_stage(&mut r, &f, &out, tol) {
            if let (Some(cs), true) = (&cs, format.all_triangle_ok()) {
                r.equal("span_rank_equals_dim", "theorem", rank, cs.dim());
            }
            let kind = if format.theorem_triangle_ok() { "theorem" } else { "observation" };
            r.at_most("f_in_span", kind, residual, tol.span);
        }
        if format.is_matrix() {
            if let Err(e) = matrix_stage(&mut r, &f, &out, tol) {
                r.error("matrix", &e);
            }
        }
    }
    als_stage(&mut r, &f, seed, cfg);
    r
}

/// The `2x2x4` experiment: `dim H_f = 8`, eight critical rank-one tensors
/// spanning only a 7-dimensional space, and `f` inside that span.
pub fn cmd_remark224(seed: u64, cfg: &RunConfig) -> Report {
    let tol = &cfg.tolerances;
    let format = TensorFormat::ordinary(&[2, 2, 4]).expect("valid format");
    let mut r = Report::new("remark224", Some(&format), Some(seed), tol);
    let f = random_tensor(&format, seed, true);
    let cs = critspace_stage(&mut r, &f, tol);
    if let Some(cs) = &cs {
        r.equal("dim_critical_space", "theorem", cs.dim(), 8);
    }
    if let Some(out) = solver_stage(&mut r, &f, seed, cfg) {
        r.equal("count", "count", out.points.len(), 8);
        if let Some((rank, residual)) = span_stage(&mut r, &f, &out, tol) {
            r.equal("span_rank", "theorem", rank, 7);
            if let Some(cs) = &cs {
                r.put("surjectivity_fails", json!(rank < cs.dim()));
            }
            r.at_most("f_in_span", "observation", residual, tol.span);
        }
    }
    r
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub seed: u64,
    pub restarts: usize,
    pub sweeps: usize,
    /// Keep every `stride`-th trajectory sample.
    pub stride: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 3,
            sweeps: 10_000,
            stride: 100,
        }
    }
}

/// Rank-2 ALS on the W tensor: the objective goes to zero while the terms
/// blow up, so no best rank-2 approximation exists.
pub fn cmd_demo_wtensor(demo: &DemoConfig, tol: &Tolerances) -> Report {
    let f = w_tensor();
    let mut r = Report::new("demo-wtensor", Some(f.format()), Some(demo.seed), tol);
    let cfg = AlsConfig {
        seed: demo.seed,
        restarts: demo.restarts.max(1),
        max_sweeps: demo.sweeps.max(1),
        record_trajectory: true,
        ..AlsConfig::default()
    };
    let res = match als_critical_rank_k(&f, 2, &cfg) {
        Ok(res) => res,
        Err(e) => {
            r.error("als", &e);
            return r;
        }
    };
    let fnorm = f.norm();
    let stride = demo.stride.max(1);
    let n = res.trajectory.len();
    let trajectory: Vec<Value> = res
        .trajectory
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == stride - 1 || *i + 1 == n)
        .map(|(i, s)| json!({"sweep": i + 1, "objective": s.objective, "max_term_norm": s.max_term_norm}))
        .collect();
    r.put("f_norm", json!(fnorm));
    r.put("als", als_json(&res));
    r.put("trajectory", Value::Array(trajectory));
    let f2 = fnorm * fnorm;
    r.check(
        "objective_small",
        "observation",
        res.objective < 0.01 * f2,
        json!(res.objective),
        format!("< {:e}", 0.01 * f2),
    );
    r.check(
        "terms_diverge",
        "observation",
        res.max_term_norm > 10.0 * fnorm,
        json!(res.max_term_norm),
        format!("> {:e}", 10.0 * fnorm),
    );
    r
}

pub fn cmd_count(format: &TensorFormat) -> Value {
    let e = expected_codim(format);
    json!({
        "format": format.to_string(),
        "count": bigint_json(&count_critical_rank_one(format)),
        "expected_codim": e.value,
        "dim_t": format.dim_t(),
        "all_triangle_ok": format.all_triangle_ok(),
    })
}

pub fn cmd_critspace(f: &Tensor, tol: &Tolerances) -> Result<Value> {
    let cs = critical_space(f, tol.rank)?;
    let mut v = critspace_json(&cs);
    v["format"] = json!(f.format().to_string());
    v["expected_codim"] = json!(expected_codim(f.format()).value);
    v["f_membership"] = json!(membership_residual(f, f)?);
    v["basis"] = cs
        .basis
        .columns()
        .into_iter()
        .map(|c| c.into_iter().map(complex_json).collect::<Vec<_>>())
        .collect();
    Ok(v)
}
