//! Run configuration, batch drivers and delimited-text output.
//!
//! Config files are TOML with three flat sections:
//!
//! ```toml
//! [run]
//! problem = "sod_1d"
//! scheme = "p0p2"
//! nx = 100
//!
//! [adaptivity]
//! enabled = true
//! s_ref = 1.0
//!
//! [output]
//! directory = "out"
//! cadence = 10
//! ```
//!
//! Keys left out take the problem's defaults; `section.key=value` overrides
//! are applied on top of the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adaptivity::AdaptiveConfig;
use crate::entropy::EntropyStats;
use crate::error::{Error, Result};
use crate::problems::{self, ProblemSpec};
use crate::scalar::{lit, to_f64, Real};
use crate::solver::{Solver, SolverConfig, StepReport};
use crate::steppers::{clip_dt, Scheme, SchemeKind};

/// `|S|` below this counts as zero in histograms.
pub const ZERO_BIN: f64 = 1e-14;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STEP: i32 = 3;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::StepFailed { .. } | Error::UnphysicalState { .. } | Error::SingularSystem => EXIT_STEP,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub problem: String,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// "f64" or "f32"
    #[serde(default = "default_precision")]
    pub precision: String,
    /// Also evolve eta and report the augmented S.
    #[serde(default)]
    pub augmented: bool,
}

fn default_scheme() -> String {
    "p0p2".into()
}

fn default_precision() -> String {
    "f64".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptivitySection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_ref: Option<f64>,
    #[serde(default)]
    pub low_order: usize,
    #[serde(default = "yes")]
    pub pad: bool,
}

impl Default for AdaptivitySection {
    fn default() -> Self {
        AdaptivitySection {
            enabled: false,
            s_ref: None,
            low_order: 0,
            pad: true,
        }
    }
}

fn yes() -> bool {
    true
}

pub const FIELD_NAMES: [&str; 4] = ["averages", "primitives", "entropy", "order"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub directory: String,
    /// Snapshot every this many steps; 0 writes the final state only.
    #[serde(default)]
    pub cadence: usize,
    /// Extra snapshot times; steps are shortened to land on them.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_fields")]
    pub fields: Vec<String>,
    /// Adds a log10|S| column.
    #[serde(default)]
    pub log_entropy: bool,
    /// Per-step statistics in `steps.csv`.
    #[serde(default = "yes")]
    pub step_log: bool,
}

fn default_dir() -> String {
    "out".into()
}

fn default_fields() -> Vec<String> {
    FIELD_NAMES.iter().map(|s| s.to_string()).collect()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: default_dir(),
            cadence: 0,
            times: Vec::new(),
            fields: default_fields(),
            log_entropy: false,
            step_log: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    #[serde(default)]
    pub adaptivity: AdaptivitySection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub spec: ProblemSpec,
    pub scheme: Scheme,
    pub n: [usize; 2],
    pub cfl: f64,
    pub t_max: f64,
    pub adaptivity: Option<AdaptiveConfig<f64>>,
    pub augmented: bool,
    pub single: bool,
    pub output: OutputSection,
}

impl RunConfig {
    /// Every key set to the problem's default.
    pub fn for_problem(name: &str) -> Result<Self> {
        let spec = problems::lookup(name)?;
        Ok(RunConfig {
            run: RunSection {
                problem: spec.name.into(),
                scheme: default_scheme(),
                nx: Some(spec.default_n[0]),
                ny: Some(spec.default_n[1]),
                cfl: Some(spec.cfl),
                t_max: Some(spec.t_max),
                precision: default_precision(),
                augmented: false,
            },
            adaptivity: AdaptivitySection {
                enabled: false,
                s_ref: spec.s_ref,
                ..Default::default()
            },
            output: OutputSection::default(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Applies `section.key=value` overrides. Values are read as TOML and
    /// fall back to plain strings.
    pub fn with_overrides(&self, sets: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(&self.to_text()).expect("config round-trips");
        for s in sets {
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{s}' is not key=value")))?;
            let (section, key) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("override key '{key}' needs a section, e.g. run.cfl")))?;
            let value = value.trim();
            let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.to_string()));
            let sec = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match sec {
                toml::Value::Table(t) => {
                    t.insert(key.to_string(), parsed);
                }
                _ => return Err(Error::Config(format!("'{section}' is not a section"))),
            }
        }
        RunConfig::parse(&toml::to_string(&table).expect("table serialises"))
    }

    /// Validates against the catalog and fills defaults.
    pub fn resolve(&self) -> Result<RunPlan> {
        let spec = problems::lookup(&self.run.problem).map_err(|_| {
            Error::Config(format!(
                "unknown problem '{}'; valid problems: {}",
                self.run.problem,
                problems::names().join(", ")
            ))
        })?;
        let scheme: Scheme = self.run.scheme.parse()?;
        let nx = self.run.nx.unwrap_or(spec.default_n[0]);
        let ny = if spec.dim == 1 { 1 } else { self.run.ny.unwrap_or(spec.default_n[1]) };
        if nx == 0 || ny == 0 {
            return Err(Error::Config("grid sizes must be positive".into()));
        }
        let cfl = self.run.cfl.unwrap_or(spec.cfl);
        let t_max = self.run.t_max.unwrap_or(spec.t_max);
        if !(cfl > 0.0 && cfl.is_finite()) {
            return Err(Error::Config(format!("cfl must be positive, got {cfl}")));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be non-negative, got {t_max}")));
        }
        let single = match self.run.precision.as_str() {
            "f64" => false,
            "f32" => true,
            other => return Err(Error::Config(format!("unknown precision '{other}'; valid: f64, f32"))),
        };
        for f in &self.output.fields {
            if !FIELD_NAMES.contains(&f.as_str()) {
                return Err(Error::Config(format!(
                    "unknown output field '{f}'; valid: {}",
                    FIELD_NAMES.join(", ")
                )));
            }
        }
        let adaptivity = if self.adaptivity.enabled {
            let deg = match scheme.kind {
                SchemeKind::Ader { deg } => deg,
                SchemeKind::Rk3 => return Err(Error::Config("adaptivity needs scheme p0p1 or p0p2".into())),
            };
            let s_ref = self
                .adaptivity
                .s_ref
                .ok_or_else(|| Error::Config(format!("adaptivity.s_ref is required for {}", spec.name)))?;
            let a = AdaptiveConfig {
                s_ref,
                low_order_m: self.adaptivity.low_order,
                enable_pad: self.adaptivity.pad,
            };
            a.validate(deg).map_err(|e| Error::Config(e.to_string()))?;
            Some(a)
        } else {
            None
        };
        Ok(RunPlan {
            spec,
            scheme,
            n: [nx, ny],
            cfl,
            t_max,
            adaptivity,
            augmented: self.run.augmented,
            single,
            output: self.output.clone(),
        })
    }
}

impl RunPlan {
    pub fn solver<T: Real>(&self) -> Result<Solver<T>> {
        let mut cfg = SolverConfig::new(self.scheme, self.cfl, self.t_max);
        cfg.augmented = self.augmented;
        cfg.adaptivity = self.adaptivity.map(|a| AdaptiveConfig {
            s_ref: lit(a.s_ref),
            low_order_m: a.low_order_m,
            enable_pad: a.enable_pad,
        });
        Solver::from_problem(&self.spec, self.n, cfg)
    }

    fn full_order(&self) -> u8 {
        self.scheme.order() as u8
    }

    fn grid_label(&self) -> String {
        if self.spec.dim == 1 {
            format!("{}", self.n[0])
        } else {
            format!("{}x{}", self.n[0], self.n[1])
        }
    }
}

/// Final outcome of a `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub wall_seconds: f64,
    pub files: Vec<PathBuf>,
    pub final_stats: Option<EntropyStats>,
    pub totals: Vec<f64>,
    pub l1_error: Option<f64>,
    pub max_budget_residual: f64,
    pub max_reduced_fraction: f64,
    pub marked_steps: usize,
    pub mean_s_l1: f64,
}

impl RunSummary {
    pub fn to_text(&self, plan: &RunPlan) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", plan.spec.name);
        let _ = writeln!(s, "scheme = {}", plan.scheme);
        let _ = writeln!(s, "grid = {}", plan.grid_label());
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "time = {:?}", self.t);
        let _ = writeln!(s, "wall_seconds = {:.3}", self.wall_seconds);
        let _ = writeln!(s, "totals = {}", join(&self.totals));
        if let Some(st) = &self.final_stats {
            let _ = writeln!(
                s,
                "entropy = min {:e}, max {:e}, l1 {:e}, positive_l1 {:e}, flagged {}",
                st.min, st.max, st.l1, st.positive_l1, st.flagged
            );
        }
        let _ = writeln!(s, "mean_s_l1 = {:e}", self.mean_s_l1);
        if let Some(e) = self.l1_error {
            let _ = writeln!(s, "l1_density_error = {e:e}");
        }
        let _ = writeln!(s, "max_budget_residual = {:e}", self.max_budget_residual);
        let _ = writeln!(s, "max_reduced_fraction = {:.6}", self.max_reduced_fraction);
        let _ = writeln!(s, "steps_with_marks = {}", self.marked_steps);
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

/// Runs `cfg` and writes snapshots, the step log and the summary.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let plan = cfg.resolve()?;
    if plan.single {
        run_plan::<f32>(&plan)
    } else {
        run_plan::<f64>(&plan)
    }
}

pub fn run_plan<T: Real>(plan: &RunPlan) -> Result<RunSummary> {
    let dir = PathBuf::from(&plan.output.directory);
    fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let mut solver = plan.solver::<T>()?;
    let mut times: Vec<f64> = plan.output.times.iter().copied().filter(|&t| t > 0.0 && t < plan.t_max).collect();
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();
    let mut next_time = 0;
    let mut files = Vec::new();
    let mut log = String::new();
    if plan.output.step_log {
        log.push_str("step,t,dt,s_min,s_max,s_l1,s_positive_l1,flagged,marked,reduced,pad,budget_residual\n");
    }
    let mut summary = RunSummary {
        steps: 0,
        t: 0.0,
        wall_seconds: 0.0,
        files: Vec::new(),
        final_stats: None,
        totals: Vec::new(),
        l1_error: None,
        max_budget_residual: 0.0,
        max_reduced_fraction: 0.0,
        marked_steps: 0,
        mean_s_l1: 0.0,
    };
    let mut last: Option<StepReport<T>> = None;
    let full = plan.full_order();
    let outcome = (|| -> Result<()> {
        while !solver.done() {
            let mut dt = solver.next_dt()?;
            let mut hit = false;
            if next_time < times.len() {
                let target: T = lit(times[next_time]);
                if solver.t + dt >= target {
                    dt = clip_dt(solver.t, dt, target);
                    hit = true;
                }
            }
            let r = solver.step_dt(dt)?;
            if hit {
                solver.t = lit(times[next_time]);
                next_time += 1;
            }
            let nc = r.orders.len() as f64;
            summary.max_budget_residual = summary.max_budget_residual.max(r.budget_residual);
            summary.max_reduced_fraction = summary.max_reduced_fraction.max(r.reduced_count(full) as f64 / nc);
            if r.marked_count() > 0 {
                summary.marked_steps += 1;
            }
            if plan.output.step_log {
                let st = &r.entropy.stats;
                let _ = writeln!(
                    log,
                    "{},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{},{},{:?}",
                    r.step,
                    to_f64(r.t),
                    to_f64(r.dt),
                    st.min,
                    st.max,
                    st.l1,
                    st.positive_l1,
                    st.flagged,
                    r.marked_count(),
                    r.reduced_count(full),
                    r.pad.iter().filter(|&&p| p).count(),
                    r.budget_residual
                );
            }
            let periodic = plan.output.cadence > 0 && solver.step % plan.output.cadence == 0;
            if (periodic || hit) && !solver.done() {
                files.push(write_snapshot(&dir, plan, &solver, Some(&r))?);
            }
            last = Some(r);
        }
        Ok(())
    })();
    if plan.output.step_log {
        let p = dir.join("steps.csv");
        fs::write(&p, &log)?;
        files.push(p);
    }
    outcome?;
    files.push(write_snapshot(&dir, plan, &solver, last.as_ref())?);
    summary.steps = solver.step;
    summary.t = to_f64(solver.t);
    summary.final_stats = last.as_ref().map(|r| r.entropy.stats);
    summary.totals = solver.totals().into_iter().map(to_f64).collect();
    summary.l1_error = if plan.spec.has_exact() {
        solver.l1_density_error(&plan.spec).ok()
    } else {
        None
    };
    summary.mean_s_l1 = solver.mean_s_l1();
    summary.wall_seconds = start.elapsed().as_secs_f64();
    let p = dir.join("summary.txt");
    files.push(p.clone());
    summary.files = files;
    fs::write(&p, summary.to_text(plan))?;
    Ok(summary)
}

fn snapshot_name(plan: &RunPlan, step: usize) -> String {
    format!("{}_{}_{}_{step:06}.csv", plan.spec.name, plan.scheme, plan.grid_label())
}

/// Writes one snapshot: `#` header lines then comma-separated rows, one per
/// cell, row-major with x fastest.
pub fn write_snapshot<T: Real>(dir: &Path, plan: &RunPlan, solver: &Solver<T>, report: Option<&StepReport<T>>) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(plan, solver.step));
    fs::write(&path, snapshot_text(plan, solver, report))?;
    Ok(path)
}

pub fn snapshot_text<T: Real>(plan: &RunPlan, solver: &Solver<T>, report: Option<&StepReport<T>>) -> String {
    let sys = solver.sys();
    let dim = plan.spec.dim;
    let grid = solver.field.grid;
    let want = |f: &str| plan.output.fields.iter().any(|x| x == f);
    let mut s = String::new();
    let _ = writeln!(s, "# problem = {}", plan.spec.name);
    let _ = writeln!(s, "# scheme = {}", plan.scheme);
    let _ = writeln!(s, "# grid = {}", plan.grid_label());
    let _ = writeln!(s, "# time = {:?}", to_f64(solver.t));
    let _ = writeln!(s, "# step = {}", solver.step);
    let totals: Vec<f64> = solver.totals().into_iter().map(to_f64).collect();
    let _ = writeln!(s, "# totals = {}", join(&totals));
    let mut cols: Vec<&str> = vec!["x"];
    if dim == 2 {
        cols.push("y");
    }
    if want("averages") {
        cols.extend(if dim == 1 { &["rho", "mom_x", "energy"][..] } else { &["rho", "mom_x", "mom_y", "energy"][..] });
    }
    if want("primitives") {
        cols.extend(if dim == 1 { &["density", "vel_x", "pressure"][..] } else { &["density", "vel_x", "vel_y", "pressure"][..] });
    }
    let entropy = report.filter(|_| want("entropy"));
    if entropy.is_some() {
        cols.push("S");
        if plan.output.log_entropy {
            cols.push("log10_abs_S");
        }
        if report.is_some_and(|r| r.entropy_trial.is_some()) {
            cols.push("S_trial");
        }
        if report.is_some_and(|r| r.entropy_augmented.is_some()) {
            cols.push("S_augmented");
        }
    }
    let order = report.filter(|_| want("order"));
    if order.is_some() {
        cols.extend(["order", "marked", "pad"]);
    }
    let _ = writeln!(s, "{}", cols.join(","));
    let m = sys.m();
    let mut row: Vec<String> = Vec::with_capacity(cols.len());
    for id in 0..grid.ncells() {
        row.clear();
        let (i, j) = grid.cell_ij(id);
        let c = grid.center(i, j);
        row.push(format!("{:?}", to_f64(c[0])));
        if dim == 2 {
            row.push(format!("{:?}", to_f64(c[1])));
        }
        let u = solver.field.cell(id);
        if want("averages") {
            row.extend((0..m).map(|v| format!("{:?}", to_f64(u[v]))));
        }
        if want("primitives") {
            match sys.conserved_to_primitive(u) {
                Ok(p) => row.extend((0..m).map(|v| format!("{:?}", to_f64(p[v])))),
                Err(_) => row.extend((0..m).map(|_| "nan".to_string())),
            }
        }
        if let Some(r) = entropy {
            let v = to_f64(r.entropy.values[id]);
            row.push(format!("{v:?}"));
            if plan.output.log_entropy {
                row.push(format!("{:?}", v.abs().max(ZERO_BIN).log10()));
            }
            if let Some(t) = &r.entropy_trial {
                row.push(format!("{:?}", to_f64(t.values[id])));
            }
            if let Some(a) = &r.entropy_augmented {
                row.push(format!("{:?}", to_f64(a.values[id])));
            }
        }
        if let Some(r) = order {
            row.push(r.orders[id].to_string());
            row.push(u8::from(r.marked[id]).to_string());
            row.push(u8::from(r.pad[id]).to_string());
        }
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Header value of a snapshot.
pub fn snapshot_header<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# ")?.strip_prefix(key)?.trim_start().strip_prefix('=').map(str::trim))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
    pub error_rate: Option<f64>,
    pub s_l1: f64,
    pub s_rate: Option<f64>,
    pub steps: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub scheme: Scheme,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("# problem = {}\n# scheme = {}\n", self.problem, self.scheme);
        s.push_str("n,l1_error,rate,s_l1,s_rate,steps\n");
        let r = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{},{:e},{},{}",
                row.n,
                row.error,
                r(row.error_rate),
                row.s_l1,
                r(row.s_rate),
                row.steps
            );
        }
        s
    }
}

/// `log2(a / b)` for successive dyadic grids.
pub fn dyadic_rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Density L1 error and time-averaged `||S||_1` on each grid (square grids
/// in 2D). Rates are `log2` of successive ratios.
pub fn converge(base: &RunConfig, grids: &[usize]) -> Result<ConvergenceReport> {
    let plan0 = base.resolve()?;
    if !plan0.spec.has_exact() {
        return Err(Error::Config(format!("problem '{}' has no exact solution", plan0.spec.name)));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in grids {
        let mut plan = plan0.clone();
        plan.n = [n, if plan.spec.dim == 1 { 1 } else { n }];
        let start = Instant::now();
        let (error, s_l1, steps) = if plan.single {
            converge_one::<f32>(&plan)?
        } else {
            converge_one::<f64>(&plan)?
        };
        let prev = rows.last();
        rows.push(ConvergenceRow {
            n,
            error,
            error_rate: prev.map(|p| dyadic_rate(p.error, error) / (n as f64 / p.n as f64).log2()),
            s_l1,
            s_rate: prev.map(|p| dyadic_rate(p.s_l1, s_l1) / (n as f64 / p.n as f64).log2()),
            steps,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ConvergenceReport {
        problem: plan0.spec.name.into(),
        scheme: plan0.scheme,
        rows,
    })
}

fn converge_one<T: Real>(plan: &RunPlan) -> Result<(f64, f64, usize)> {
    let mut s = plan.solver::<T>()?;
    s.run_to_end()?;
    Ok((s.l1_density_error(&plan.spec)?, s.mean_s_l1(), s.step))
}

/// Decade histogram of `|S|` with a separate zero bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub zero: usize,
    /// `(lower edge, count)` per decade `[10^k, 10^(k+1))`, ascending.
    pub bins: Vec<(f64, usize)>,
    pub flagged: usize,
    pub total: usize,
    /// `(percentile, |S|)` over the non-zero samples.
    pub percentiles: Vec<(f64, f64)>,
}

impl Histogram {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut zero = 0;
        let mut flagged = 0;
        let mut total = 0;
        let mut nz = Vec::new();
        for v in values {
            total += 1;
            let a = v.abs();
            if !a.is_finite() {
                flagged += 1;
            } else if a < ZERO_BIN {
                zero += 1;
            } else {
                nz.push(a);
            }
        }
        nz.sort_by(|a, b| a.total_cmp(b));
        let mut bins: Vec<(f64, usize)> = Vec::new();
        for &a in &nz {
            let edge = 10f64.powi(a.log10().floor() as i32);
            match bins.last_mut() {
                Some((e, c)) if *e == edge => *c += 1,
                _ => bins.push((edge, 1)),
            }
        }
        let percentiles = if nz.is_empty() {
            Vec::new()
        } else {
            [50.0, 90.0, 99.0, 99.9]
                .iter()
                .map(|&p| {
                    let k = ((p / 100.0) * (nz.len() - 1) as f64).round() as usize;
                    (p, nz[k])
                })
                .collect()
        };
        Histogram {
            zero,
            bins,
            flagged,
            total,
            percentiles,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("bin,lower,upper,count\n");
        let _ = writeln!(s, "zero,0,{ZERO_BIN:e},{}", self.zero);
        for (e, c) in &self.bins {
            let _ = writeln!(s, "decade,{e:e},{:e},{c}", e * 10.0);
        }
        if self.flagged > 0 {
            let _ = writeln!(s, "flagged,inf,inf,{}", self.flagged);
        }
        for (p, v) in &self.percentiles {
            let _ = writeln!(s, "# p{p} = {v:e}");
        }
        if let (Some(lo), Some(hi)) = (self.percentile(90.0), self.percentile(99.9)) {
            let _ = writeln!(s, "# suggested S_ref between {lo:e} and {hi:e}");
        }
        s
    }

    pub fn percentile(&self, p: f64) -> Option<f64> {
        self.percentiles.iter().find(|x| x.0 == p).map(|x| x.1)
    }
}

/// Runs `cfg` (no snapshots) and pools `|S|` of every cell and step.
pub fn entropy_histogram(cfg: &RunConfig) -> Result<Histogram> {
    let plan = cfg.resolve()?;
    if plan.single {
        histogram_run::<f32>(&plan)
    } else {
        histogram_run::<f64>(&plan)
    }
}

fn histogram_run<T: Real>(plan: &RunPlan) -> Result<Histogram> {
    let mut solver = plan.solver::<T>()?;
    let mut values = Vec::new();
    solver.run(|_, r| {
        values.extend(r.entropy.values.iter().map(|&v| to_f64(v)));
        Ok(())
    })?;
    Ok(Histogram::from_values(values))
}

/// Table printed by `list-problems`.
pub fn problem_table() -> String {
    let mut s = String::from("name,dim,domain,t_max,cfl,default_grid,s_ref\n");
    for p in problems::catalog() {
        let domain = if p.dim == 1 {
            format!("[{}:{}]", p.lo[0], p.hi[0])
        } else {
            format!("[{}:{}]x[{}:{}]", p.lo[0], p.hi[0], p.lo[1], p.hi[1])
        };
        let grid = if p.dim == 1 {
            p.default_n[0].to_string()
        } else {
            format!("{}x{}", p.default_n[0], p.default_n[1])
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.name,
            p.dim,
            domain,
            p.t_max,
            p.cfl,
            grid,
            p.s_ref.map(|v| v.to_string()).unwrap_or_default()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_problem_round_trips_through_the_config() {
        for spec in problems::catalog() {
            let cfg = RunConfig::for_problem(spec.name).unwrap();
            let back = RunConfig::parse(&cfg.to_text()).unwrap();
            assert_eq!(back, cfg);
            let plan = back.resolve().unwrap();
            assert_eq!(plan.spec, spec);
            assert_eq!(plan.n, spec.default_n);
            assert_eq!(plan.cfl, spec.cfl);
            assert_eq!(plan.t_max, spec.t_max);
            assert_eq!(back.adaptivity.s_ref, spec.s_ref);
        }
    }

    #[test]
    fn minimal_file_takes_problem_defaults() {
        let cfg = RunConfig::parse("[run]\nproblem = \"test_123\"\n").unwrap();
        let plan = cfg.resolve().unwrap();
        assert_eq!(plan.n, [200, 1]);
        assert_eq!(plan.t_max, 0.15);
        assert_eq!(plan.scheme, Scheme::p0p2());
        assert!(plan.adaptivity.is_none());
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::for_problem("sod_1d").unwrap();
        let o = cfg
            .with_overrides(&[
                "run.scheme=p0p1".into(),
                "run.nx = 50".into(),
                "adaptivity.enabled=true".into(),
                "adaptivity.s_ref=2.5".into(),
                "output.directory=/tmp/x y".into(),
            ])
            .unwrap();
        assert_eq!(o.run.scheme, "p0p1");
        assert_eq!(o.run.nx, Some(50));
        assert_eq!(o.output.directory, "/tmp/x y");
        let plan = o.resolve().unwrap();
        assert_eq!(plan.adaptivity.unwrap().s_ref, 2.5);
        assert!(matches!(cfg.with_overrides(&["cfl=1".into()]), Err(Error::Config(_))));
        assert!(matches!(cfg.with_overrides(&["run.bogus=1".into()]), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let base = RunConfig::for_problem("sod_1d").unwrap();
        let e = base.with_overrides(&["run.scheme=weno5".into()]).unwrap().resolve().unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        assert!(e.to_string().contains("p0p1, p0p2, rk3"), "{e}");
        let e = base.with_overrides(&["run.problem=nope".into()]).unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("sod_1d"));
        for bad in ["run.cfl=-1", "run.precision=f16", "output.fields=[\"x\"]"] {
            let e = base.with_overrides(&[bad.into()]).unwrap().resolve().unwrap_err();
            assert_eq!(exit_code(&e), EXIT_CONFIG, "{bad}");
        }
        let e = base
            .with_overrides(&["adaptivity.enabled=true".into(), "run.scheme=rk3".into(), "adaptivity.s_ref=1".into()])
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let e = base.with_overrides(&["adaptivity.enabled=true".into()]).unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("s_ref"));
    }

    #[test]
    fn exit_codes() {
        let step = Error::StepFailed {
            step: 3,
            cell: Some(1),
            reason: "x".into(),
        };
        assert_eq!(exit_code(&step), EXIT_STEP);
        assert_eq!(exit_code(&Error::UnknownProblem("a".into())), EXIT_CONFIG);
    }

    #[test]
    fn histogram_bins() {
        let h = Histogram::from_values([0.0, 1e-16, 0.5, 0.7, 3.0, -20.0, f64::INFINITY]);
        assert_eq!(h.zero, 2);
        assert_eq!(h.flagged, 1);
        assert_eq!(h.bins, vec![(0.1, 2), (1.0, 1), (10.0, 1)]);
        assert_eq!(h.total, 7);
        assert_eq!(h.percentile(50.0), Some(3.0));
        let u = Histogram::from_values(vec![0.0; 10]);
        assert_eq!(u.zero, 10);
        assert!(u.bins.is_empty());
    }

    #[test]
    fn header_lookup() {
        let t = "# problem = sod_1d\n# totals = 1.5,2\nx,rho\n0.5,1\n";
        assert_eq!(snapshot_header(t, "totals"), Some("1.5,2"));
        assert_eq!(snapshot_header(t, "step"), None);
    }

    #[test]
    fn table_lists_all_problems() {
        assert_eq!(problem_table().lines().count(), 13);
    }
}
