//! Command-line front end. [`run`] returns the process exit code:
//! 0 when every assertion passed, 1 when one failed, 2 on usage or configuration errors.

use crate::eigen::{log_estimate_check, minimize_with_tables, verify_eigen_properties, EigenConfig};
use crate::error::{Error, Result};
use crate::forms::{energy, lp_pow, pohozaev_defect, smooth_profile};
use crate::grid::{FormTables, GridDomain, GridFunction, Shape};
use crate::kernel::KernelSpec;
use crate::operator::{
    derivative_consistency, eval_frac_plap, eval_log_plap, eval_log_plap_zero, small_s_limit_study, QuadratureSpec,
};
use crate::report::Report;
use crate::specfun::{b_sign_threshold, classical_const, Params};
use crate::suites::{run_suite, Suite, SuiteConfig};
use crate::testfn::{Bump, Gaussian, OddGaussian, TestFunction};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "loglap", version, about = "Fractional logarithmic p-Laplacian toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write data here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true, env = "LOGLAP_THREADS")]
    threads: Option<usize>,
    /// Directory for weight-table cache files.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Print the geometric thresholds next to the domain diameter on stderr.
    #[arg(long, global = true)]
    paper_thresholds: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Dimension N.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true, value_enum)]
    shape: Option<ShapeKind>,
    /// interval: lo,hi; box: x0,x1,y0,y1; disc: cx,cy,radius.
    #[arg(long = "box", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    bbox: Option<Vec<f64>>,
    /// Grid spacing.
    #[arg(long, global = true)]
    h: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// C, B, ω_N, the classical constants, s₀ and the two radii.
    Constants,
    /// Tabulate K, k± and the commutator residual on log-spaced radii.
    Kernel {
        #[arg(long, default_value_t = 1e-3)]
        r_min: f64,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Evaluate the operators pointwise or run an operator study.
    Op {
        #[arg(long, value_enum, default_value = "gaussian")]
        function: FnKind,
        /// Evaluation point, comma separated; repeat for several.
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long, value_enum, default_value = "eval")]
        study: OpStudy,
        #[arg(long, value_delimiter = ',')]
        h_list: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        s_list: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Energy breakdown of one grid function.
    Energy {
        #[arg(long, value_enum, default_value = "random")]
        function: GridFnKind,
    },
    /// Run a named verification suite.
    Verify {
        suite: Option<String>,
        /// List the suite names and the operation each one runs.
        #[arg(long)]
        list: bool,
        #[arg(long)]
        samples: Option<usize>,
        /// Exponent of the Díaz–Saa suite.
        #[arg(long)]
        r: Option<f64>,
        /// Exponent of the gn suite.
        #[arg(long)]
        q: Option<f64>,
        /// ε of the Picone check.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Solve for the first eigenpair and verify its properties.
    Eigen {
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        residual_tol: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Mesh and parameter sweeps.
    Study {
        #[arg(value_enum)]
        kind: StudyKind,
        #[arg(long, value_delimiter = ',')]
        h_list: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        s_list: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "gaussian")]
        function: FnKind,
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ShapeKind {
    Interval,
    Box,
    Disc,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FnKind {
    Gaussian,
    Bump,
    OddGaussian,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum GridFnKind {
    Random,
    Smooth,
    Tent,
    Zero,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OpStudy {
    Eval,
    Derivative,
    SmallS,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum StudyKind {
    /// λ₁ over a list of grid spacings.
    EigenMesh,
    /// Distance to the classical operator as s → 0.
    SmallS,
    /// Finite differences in the order against the direct evaluation.
    Derivative,
    /// Constants over a list of s values.
    ConstantsS,
}

/// Structured-text run configuration. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamSpec,
    pub domain: DomainSpec,
    pub quadrature: QuadOverrides,
    pub eigen: Option<EigenConfig>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub s: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: Option<String>,
    #[serde(rename = "box")]
    pub bbox: Option<Vec<f64>>,
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadOverrides {
    pub inner_cutoff: Option<f64>,
    pub outer_radius: Option<f64>,
    pub radial_nodes_per_level: Option<usize>,
    pub levels: Option<usize>,
    pub target_tol: Option<f64>,
}

/// Flags merged over the config file.
struct Resolved {
    file: RunConfig,
    common: Common,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

impl Resolved {
    fn params(&self) -> Result<Params> {
        let n = self.common.n.or(self.file.params.n).ok_or_else(|| usage("missing N (--N or params.N)"))?;
        let s = self.common.s.or(self.file.params.s).ok_or_else(|| usage("missing s (--s or params.s)"))?;
        let p = self.common.p.or(self.file.params.p).ok_or_else(|| usage("missing p (--p or params.p)"))?;
        Params::new(n, s, p)
    }

    fn seed(&self) -> u64 {
        self.common.seed.or(self.file.seed).unwrap_or(0)
    }

    fn format(&self, default: Format) -> Result<Format> {
        if let Some(f) = self.common.format {
            return Ok(f);
        }
        match self.file.format.as_deref() {
            None => Ok(default),
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(usage(format!("format: unknown value '{other}'"))),
        }
    }

    fn shape(&self, n: usize) -> Result<Shape> {
        let kind = match (self.common.shape, self.file.domain.shape.as_deref()) {
            (Some(k), _) => k,
            (None, Some(name)) => ShapeKind::from_str(name, true).map_err(|_| usage(format!("domain.shape: unknown '{name}'")))?,
            (None, None) if n == 1 => ShapeKind::Interval,
            (None, None) => ShapeKind::Box,
        };
        let b = self.common.bbox.clone().or_else(|| self.file.domain.bbox.clone());
        let want = |k: usize, what: &str, default: Vec<f64>| -> Result<Vec<f64>> {
            let v = b.clone().unwrap_or(default);
            if v.len() != k {
                return Err(usage(format!("box: {what} needs {k} numbers, got {}", v.len())));
            }
            Ok(v)
        };
        let shape = match kind {
            ShapeKind::Interval => {
                let v = want(2, "interval", vec![0.0, 0.3])?;
                Shape::Interval { lo: v[0], hi: v[1] }
            }
            ShapeKind::Box => {
                let v = want(4, "box", vec![0.0, 0.3, 0.0, 0.3])?;
                Shape::Box { lo: [v[0], v[2]], hi: [v[1], v[3]] }
            }
            ShapeKind::Disc => {
                let v = want(3, "disc", vec![0.0, 0.0, 0.15])?;
                Shape::Disc { center: [v[0], v[1]], radius: v[2] }
            }
        };
        if shape.dim() != n {
            return Err(usage(format!("shape: a {} is {}-dimensional but N = {n}", shape.name(), shape.dim())));
        }
        Ok(shape)
    }

    fn h(&self, n: usize) -> f64 {
        self.common.h.or(self.file.domain.h).unwrap_or(if n == 1 { 0.003 } else { 0.015 })
    }

    fn domain(&self, params: &Params) -> Result<Arc<GridDomain>> {
        let n = params.dim();
        Ok(Arc::new(GridDomain::build(self.shape(n)?, self.h(n))?))
    }

    fn tables(&self, params: &Params) -> Result<FormTables> {
        let dom = self.domain(params)?;
        match &self.common.cache {
            Some(dir) => FormTables::assemble_cached(dom, *params, dir),
            None => FormTables::assemble(dom, *params),
        }
    }

    fn quadrature(&self, n: usize, tol: Option<f64>) -> Result<QuadratureSpec> {
        let o = &self.file.quadrature;
        let mut q = QuadratureSpec::for_dim(n);
        if let Some(v) = o.inner_cutoff {
            q.inner_cutoff = v;
        }
        if o.outer_radius.is_some() {
            q.outer_radius = o.outer_radius;
        }
        if let Some(v) = o.radial_nodes_per_level {
            q.radial_nodes_per_level = v;
        }
        if let Some(v) = o.levels {
            q.levels = v;
        }
        if let Some(v) = tol.or(o.target_tol) {
            q.target_tol = v;
        }
        q.validate(n)?;
        Ok(q)
    }

    fn eigen(&self) -> EigenConfig {
        let mut c = self.file.eigen.unwrap_or_default();
        if let Some(seed) = self.common.seed.or(self.file.seed) {
            c.seed = seed;
        }
        c
    }
}

/// A cell of a CSV row.
#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Default)]
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
    fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

struct Outcome {
    json: Value,
    table: Table,
    pass: bool,
    default_format: Format,
}

impl Outcome {
    fn json(json: Value, table: Table, pass: bool) -> Self {
        Outcome { json, table, pass, default_format: Format::Json }
    }
}

fn report_table(r: &Report) -> Table {
    let mut t = Table::new(&["check", "item", "pass", "lhs", "rhs", "margin", "count"]);
    for it in &r.items {
        t.rows.push(vec![
            Cell::Text(r.check.clone()),
            Cell::Text(it.name.clone()),
            Cell::Bool(it.pass),
            Cell::Num(it.lhs),
            Cell::Num(it.rhs),
            Cell::Num(it.margin),
            Cell::Int(it.count as i64),
        ]);
    }
    t
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn test_function(kind: FnKind, n: usize) -> Box<dyn TestFunction> {
    match kind {
        FnKind::Gaussian => Box::new(Gaussian::unit(n)),
        FnKind::Bump => Box::new(Bump::unit(n)),
        FnKind::OddGaussian => Box::new(OddGaussian { center: vec![0.0; n] }),
    }
}

fn parse_points(at: &[String], n: usize) -> Result<Vec<Vec<f64>>> {
    if at.is_empty() {
        return Ok(vec![vec![0.0; n]]);
    }
    at.iter()
        .map(|s| {
            let v: Vec<f64> = s
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| usage(format!("at: '{s}' is not a point"))))
                .collect::<Result<_>>()?;
            if v.len() != n {
                return Err(usage(format!("at: '{s}' has {} coordinates, N = {n}", v.len())));
            }
            Ok(v)
        })
        .collect()
}

fn print_thresholds(params: &Params, diam: Option<f64>) {
    let s0 = b_sign_threshold(params.dim(), params.p()).map(|v| format!("{v:.10}")).unwrap_or_else(|_| "none".into());
    eprintln!("e^(-1/sp) = {:.10}", params.positivity_threshold());
    eprintln!("e^(B/p)   = {:.10}", params.sign_change_radius());
    eprintln!("s0        = {s0}");
    if let Some(d) = diam {
        eprintln!("diam      = {d:.10}");
        eprintln!(
            "diam < e^(-1/sp): {}; diam < e^(B/p): {}; B >= 0: {}",
            d < params.positivity_threshold(),
            d < params.sign_change_radius(),
            params.b() >= 0.0
        );
    }
}

fn cmd_constants(cfg: &Resolved) -> Result<Outcome> {
    let prm = cfg.params()?;
    let (cn, rho) = classical_const(prm.dim(), prm.p())?;
    let s0 = b_sign_threshold(prm.dim(), prm.p()).ok();
    let json = json!({
        "N": prm.dim(), "s": prm.s(), "p": prm.p(),
        "C": prm.c(), "B": prm.b(), "omega_N": prm.omega(),
        "C_N_p": cn, "rho_N_p": rho, "s0": s0,
        "r_star": prm.sign_change_radius(), "positivity_threshold": prm.positivity_threshold(),
    });
    let mut t = Table::new(&["N", "s", "p", "C", "B", "omega_N", "C_N_p", "rho_N_p", "s0", "r_star", "positivity_threshold"]);
    t.rows.push(vec![
        Cell::Int(prm.dim() as i64),
        Cell::Num(prm.s()),
        Cell::Num(prm.p()),
        Cell::Num(prm.c()),
        Cell::Num(prm.b()),
        Cell::Num(prm.omega()),
        Cell::Num(cn),
        Cell::Num(rho),
        Cell::Num(s0.unwrap_or(f64::NAN)),
        Cell::Num(prm.sign_change_radius()),
        Cell::Num(prm.positivity_threshold()),
    ]);
    Ok(Outcome::json(json, t, true))
}

fn cmd_kernel(cfg: &Resolved, r_min: f64, r_max: f64, count: usize) -> Result<Outcome> {
    let prm = cfg.params()?;
    if !(r_min > 0.0 && r_max > r_min && count >= 2) {
        return Err(usage("kernel: need 0 < r-min < r-max and count >= 2"));
    }
    let k = KernelSpec::new(prm);
    let mut t = Table::new(&["r", "K", "k_plus", "k_minus", "commutator_relative"]);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let r = r_min * (r_max / r_min).powf(i as f64 / (count - 1) as f64);
        let full = k.kernel_full(r)?;
        let (kp, km) = k.kernel_parts(r)?;
        let rel = k.commutator_relative(r)?;
        worst = worst.max(rel.abs());
        t.rows.push(vec![Cell::Num(r), Cell::Num(full), Cell::Num(kp), Cell::Num(km), Cell::Num(rel)]);
        rows.push(json!({"r": r, "K": full, "k_plus": kp, "k_minus": km, "commutator_relative": rel}));
    }
    let pass = worst <= 1e-10;
    Ok(Outcome::json(json!({"params": prm, "rows": rows, "max_commutator_relative": worst, "pass": pass}), t, pass))
}

fn cmd_op(
    cfg: &Resolved,
    function: FnKind,
    at: &[String],
    study: OpStudy,
    h_list: Option<Vec<f64>>,
    s_list: Option<Vec<f64>>,
    tol: Option<f64>,
) -> Result<Outcome> {
    let prm = cfg.params()?;
    let n = prm.dim();
    let q = cfg.quadrature(n, tol)?;
    let u = test_function(function, n);
    let points = parse_points(at, n)?;
    match study {
        OpStudy::Eval => {
            let mut t = Table::new(&["x", "frac", "frac_err", "log", "log_err", "log_zero", "log_zero_err"]);
            let mut rows = Vec::new();
            for x in &points {
                let f = eval_frac_plap(u.as_ref(), x, prm.s(), prm.p(), &q)?;
                let l = eval_log_plap(u.as_ref(), x, prm.s(), prm.p(), &q)?;
                let z = eval_log_plap_zero(u.as_ref(), x, prm.p(), &q)?;
                let xs = x.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ");
                t.rows.push(vec![
                    Cell::Text(xs),
                    Cell::Num(f.value),
                    Cell::Num(f.error_estimate),
                    Cell::Num(l.value),
                    Cell::Num(l.error_estimate),
                    Cell::Num(z.value),
                    Cell::Num(z.error_estimate),
                ]);
                rows.push(json!({"x": x, "frac": f, "log": l, "log_zero": z}));
            }
            Ok(Outcome::json(json!({"params": prm, "rows": rows}), t, true))
        }
        OpStudy::Derivative => derivative_outcome(u.as_ref(), &points[0], &prm, h_list, &q),
        OpStudy::SmallS => small_s_outcome(u.as_ref(), &points, &prm, s_list, &q),
    }
}

fn derivative_outcome(
    u: &dyn TestFunction,
    x: &[f64],
    prm: &Params,
    h_list: Option<Vec<f64>>,
    q: &QuadratureSpec,
) -> Result<Outcome> {
    let hs = h_list.unwrap_or_else(|| vec![0.08, 0.04, 0.02, 0.01]);
    let st = derivative_consistency(u, x, prm.s(), prm.p(), &hs, q)?;
    let mut t = Table::new(&["h", "fd_value", "direct_value", "abs_err", "noise_floor"]);
    for (r, f) in st.rows.iter().zip(&st.noise_floor) {
        t.rows.push(vec![Cell::Num(r.h), Cell::Num(r.fd_value), Cell::Num(r.direct_value), Cell::Num(r.abs_err), Cell::Num(*f)]);
    }
    let pass = st.slope.is_some_and(|s| (1.7..=2.3).contains(&s));
    Ok(Outcome::json(json!({"params": prm, "x": x, "study": st, "pass": pass}), t, pass))
}

fn small_s_outcome(
    u: &dyn TestFunction,
    points: &[Vec<f64>],
    prm: &Params,
    s_list: Option<Vec<f64>>,
    q: &QuadratureSpec,
) -> Result<Outcome> {
    let ss = s_list.unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.02]);
    let rows = small_s_limit_study(u, points, prm.p(), &ss, q)?;
    let mut t = Table::new(&["s", "sup_err", "quad_err"]);
    for r in &rows {
        t.rows.push(vec![Cell::Num(r.s), Cell::Num(r.sup_err), Cell::Num(r.quad_err)]);
    }
    let pass = rows.windows(2).all(|w| w[1].sup_err < w[0].sup_err);
    Ok(Outcome::json(json!({"p": prm.p(), "points": points, "rows": rows, "strictly_decreasing": pass}), t, pass))
}

fn cmd_energy(cfg: &Resolved, function: GridFnKind) -> Result<Outcome> {
    let prm = cfg.params()?;
    let tables = cfg.tables(&prm)?;
    let dom = tables.domain.clone();
    let u = match function {
        GridFnKind::Random => GridFunction::random(dom, cfg.seed()),
        GridFnKind::Smooth => {
            let f = smooth_profile(dom.shape(), cfg.seed());
            GridFunction::from_fn(dom, f)
        }
        GridFnKind::Tent => GridFunction::tent(dom),
        GridFnKind::Zero => GridFunction::zeros(dom),
    };
    let e = energy(&u, &tables)?;
    let norm = lp_pow(&u, prm.p());
    let defect = pohozaev_defect(&u, &tables)?;
    let mut t = Table::new(&["Jplus", "Jminus", "Js", "total", "lp_norm_p", "pohozaev_defect"]);
    t.rows.push(vec![
        Cell::Num(e.j_plus),
        Cell::Num(e.j_minus),
        Cell::Num(e.j_s),
        Cell::Num(e.total),
        Cell::Num(norm),
        Cell::Num(defect),
    ]);
    let json = json!({
        "params": prm, "domain": tables.domain.fingerprint(), "energy": e,
        "lp_norm_p": norm, "pohozaev_defect": defect,
    });
    Ok(Outcome::json(json, t, true))
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cfg: &Resolved,
    suite: Option<String>,
    list: bool,
    samples: Option<usize>,
    r: Option<f64>,
    q: Option<f64>,
    eps: Option<f64>,
) -> Result<Outcome> {
    if list {
        let mut t = Table::new(&["suite", "operation"]);
        let mut arr = Vec::new();
        for s in Suite::ALL {
            t.rows.push(vec![Cell::Text(s.name().into()), Cell::Text(s.operation().into())]);
            arr.push(json!({"suite": s.name(), "operation": s.operation()}));
        }
        return Ok(Outcome::json(Value::Array(arr), t, true));
    }
    let name = suite.ok_or_else(|| usage("verify: name a suite or pass --list"))?;
    let suite: Suite = name.parse()?;
    let prm = cfg.params()?;
    let n = prm.dim();
    let mut sc = SuiteConfig::new(prm, cfg.shape(n)?, cfg.h(n));
    sc.samples = samples.or(cfg.file.samples).unwrap_or(sc.samples);
    sc.seed = cfg.seed();
    sc.gn_q = q;
    sc.diaz_r = r;
    if let Some(e) = eps {
        sc.picone_eps = e;
    }
    sc.eigen = cfg.eigen();
    sc.cache = cfg.common.cache.clone();
    let rep = run_suite(suite, &sc)?;
    let pass = rep.pass;
    Ok(Outcome::json(to_value(&rep), report_table(&rep), pass))
}

fn cmd_eigen(
    cfg: &Resolved,
    restarts: Option<usize>,
    max_iter: Option<usize>,
    residual_tol: Option<f64>,
    eps: f64,
) -> Result<Outcome> {
    let prm = cfg.params()?;
    let tables = cfg.tables(&prm)?;
    let mut ec = cfg.eigen();
    if let Some(v) = restarts {
        ec.restarts = v;
    }
    if let Some(v) = max_iter {
        ec.max_iter = v;
    }
    if let Some(v) = residual_tol {
        ec.residual_tol = v;
    }
    let res = minimize_with_tables(&tables, &ec)?;
    let rep = verify_eigen_properties(&res, &tables, eps, cfg.seed())?;
    let dom = &tables.domain;
    let center: Vec<f64> = match dom.shape() {
        Shape::Disc { center, .. } => center.to_vec(),
        s => s.bounding_box().iter().map(|(a, b)| 0.5 * (a + b)).collect(),
    };
    let r = dom.diam() / 8.0;
    let log_est = log_estimate_check(&res, &tables, &center, r, 4.0 * r, 0.5).ok();
    let mut t = Table::new(&["index", "x", "u"]);
    for (i, v) in res.u.values.iter().enumerate() {
        let xs = dom.center(i).iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ");
        t.rows.push(vec![Cell::Int(i as i64), Cell::Text(xs), Cell::Num(*v)]);
    }
    let pass = rep.pass && res.converged;
    let json = json!({"result": res, "report": rep, "log_estimate": log_est});
    Ok(Outcome::json(json, t, pass))
}

fn cmd_study(
    cfg: &Resolved,
    kind: StudyKind,
    h_list: Option<Vec<f64>>,
    s_list: Option<Vec<f64>>,
    function: FnKind,
    at: &[String],
) -> Result<Outcome> {
    let mut out = match kind {
        StudyKind::EigenMesh => {
            let prm = cfg.params()?;
            let n = prm.dim();
            let shape = cfg.shape(n)?;
            let hs = h_list.unwrap_or_else(|| vec![0.006, 0.003, 0.0015]);
            let ec = cfg.eigen();
            let mut t = Table::new(&["h", "n_cells", "lambda", "abs_increment", "residual", "converged"]);
            let mut rows = Vec::new();
            let mut prev: Option<f64> = None;
            let mut incs = Vec::new();
            for h in hs {
                let dom = Arc::new(GridDomain::build(shape.clone(), h)?);
                let tables = FormTables::assemble(dom.clone(), prm)?;
                let res = minimize_with_tables(&tables, &ec)?;
                let inc = prev.map(|l| (res.lambda - l).abs());
                if let Some(i) = inc {
                    incs.push(i);
                }
                prev = Some(res.lambda);
                t.rows.push(vec![
                    Cell::Num(h),
                    Cell::Int(dom.len() as i64),
                    Cell::Num(res.lambda),
                    Cell::Num(inc.unwrap_or(f64::NAN)),
                    Cell::Num(res.residual),
                    Cell::Bool(res.converged),
                ]);
                rows.push(json!({"h": h, "n_cells": dom.len(), "lambda": res.lambda, "abs_increment": inc,
                                 "residual": res.residual, "converged": res.converged}));
            }
            let pass = incs.windows(2).all(|w| w[1] < w[0]);
            Outcome::json(json!({"params": prm, "rows": rows, "increments_decreasing": pass}), t, pass)
        }
        StudyKind::SmallS | StudyKind::Derivative => {
            let prm = cfg.params()?;
            let n = prm.dim();
            let q = cfg.quadrature(n, None)?;
            let u = test_function(function, n);
            let points = parse_points(at, n)?;
            match kind {
                StudyKind::SmallS => small_s_outcome(u.as_ref(), &points, &prm, s_list, &q)?,
                _ => derivative_outcome(u.as_ref(), &points[0], &prm, h_list, &q)?,
            }
        }
        StudyKind::ConstantsS => {
            let n = cfg.common.n.or(cfg.file.params.n).ok_or_else(|| usage("missing N (--N or params.N)"))?;
            let p = cfg.common.p.or(cfg.file.params.p).ok_or_else(|| usage("missing p (--p or params.p)"))?;
            let ss = s_list.unwrap_or_else(|| (1..20).map(|k| k as f64 * 0.05).collect());
            let mut t = Table::new(&["s", "C", "B", "r_star", "positivity_threshold"]);
            let mut rows = Vec::new();
            for s in ss {
                let prm = Params::new(n, s, p)?;
                t.rows.push(vec![
                    Cell::Num(s),
                    Cell::Num(prm.c()),
                    Cell::Num(prm.b()),
                    Cell::Num(prm.sign_change_radius()),
                    Cell::Num(prm.positivity_threshold()),
                ]);
                rows.push(json!({"s": s, "C": prm.c(), "B": prm.b(), "r_star": prm.sign_change_radius(),
                                 "positivity_threshold": prm.positivity_threshold()}));
            }
            Outcome::json(json!({"N": n, "p": p, "rows": rows}), t, true)
        }
    };
    out.default_format = Format::Csv;
    Ok(out)
}

fn dispatch(cli: Cli, cfg: &Resolved) -> Result<Outcome> {
    match cli.command {
        Command::Constants => cmd_constants(cfg),
        Command::Kernel { r_min, r_max, count } => cmd_kernel(cfg, r_min, r_max, count),
        Command::Op { function, at, study, h_list, s_list, tol } => cmd_op(cfg, function, &at, study, h_list, s_list, tol),
        Command::Energy { function } => cmd_energy(cfg, function),
        Command::Verify { suite, list, samples, r, q, eps } => cmd_verify(cfg, suite, list, samples, r, q, eps),
        Command::Eigen { restarts, max_iter, residual_tol, eps } => cmd_eigen(cfg, restarts, max_iter, residual_tol, eps),
        Command::Study { kind, h_list, s_list, function, at } => cmd_study(cfg, kind, h_list, s_list, function, &at),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ToleranceNotMet { .. } | Error::NoSignChange { .. } => 1,
        _ => 2,
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", p.display())))
        }
    }
}

fn execute(cli: Cli) -> Result<(Outcome, Resolved)> {
    let file = load_config(&cli.common.config)?;
    let cfg = Resolved { file, common: cli.common.clone() };
    if cfg.common.paper_thresholds {
        if let Ok(prm) = cfg.params() {
            let diam = cfg.domain(&prm).ok().map(|d| d.diam());
            print_thresholds(&prm, diam);
        }
    }
    let out = match cfg.common.threads {
        Some(0) => return Err(usage("threads must be positive")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| usage(format!("threads: {e}")))?;
            pool.install(|| dispatch(cli, &cfg))?
        }
        None => dispatch(cli, &cfg)?,
    };
    Ok((out, cfg))
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (out, cfg) = match execute(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let fmt = match cfg.format(out.default_format) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = match fmt {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Csv => out.table.render(),
    };
    let dest = cfg.common.output.clone().or(cfg.file.output.clone());
    let written = match dest {
        Some(path) => std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 2;
    }
    if !out.pass {
        eprintln!("assertion failed; see the report for details");
        return 1;
    }
    0
}
