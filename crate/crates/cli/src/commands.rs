//! Argument definitions and the subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use einstein_forge::catalog::{
    catalog_list, catalog_verify_all, find, load_entry, verify_entry, CatalogEntry, CatalogReport, VerifyOverrides,
    DEFAULT_DOMAIN, DEFAULT_TOL,
};
use einstein_forge::classify::{classify_warp, drop_instance, drop_polynomial};
use einstein_forge::conformal::conformally_einstein_residual_opts;
use einstein_forge::curvature::{einstein_residual_opts, scalar_on};
use einstein_forge::dsl::MetricEnvelope;
use einstein_forge::grid::DEFAULT_GRID;
use einstein_forge::odes::{
    beltrami_profile, extremal_profile, solve_brinkmann, solve_extremal, solve_ft, solve_iterated_warp,
    BrinkmannProblem, ExtremalParams, FtProblem, IteratedWarpProblem, TrajectoryTable,
};
use einstein_forge::{ConformalPair, DomainBox};

use crate::report::{Outcome, RunReport};

#[derive(Parser, Debug)]
#[command(name = "einstein-forge", version)]
#[command(about = "Check Einstein metrics and solve the ODEs behind conformally Einstein products")]
pub struct Cli {
    /// Add wall-clock time to the JSON report (makes output non-reproducible)
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the Einstein (or conformally Einstein) condition on a grid
    Verify(VerifyArgs),
    /// Integrate one of the ODE families
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Completeness type of warped profiles with data (n, k̄, k, c)
    Classify(ClassifyArgs),
    /// Exact coefficients of the drop-lemma polynomials
    Droplemma(DropArgs),
    /// Built-in fixtures with expected outcomes
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Meridian profiles of surfaces of revolution as CSV
    #[command(subcommand)]
    Profile(ProfileCommand),
}

/// Shared grid options.
#[derive(Args, Debug, Serialize)]
pub struct GridArgs {
    /// Number of Halton grid points
    #[arg(long)]
    pub grid: Option<usize>,

    /// Residual tolerance
    #[arg(long, env = "EINSTEIN_FORGE_TOL")]
    pub tol: Option<f64>,

    /// Evaluate grid points on all cores (results are identical)
    #[arg(long)]
    pub parallel: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Ric = λ g for the metric itself
    Einstein,
    /// φ⁻² g is Einstein, checked through the trace-free equation on g
    Conformal,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    /// Metric text, e.g. "sphere(3)"
    #[arg(long, group = "source")]
    pub metric: Option<String>,

    /// File holding metric text or a {"metric", "domain"} JSON envelope
    #[arg(long, group = "source")]
    pub file: Option<PathBuf>,

    /// Name of a built-in catalog entry
    #[arg(long, group = "source")]
    pub catalog: Option<String>,

    /// Domain override, coord=lo:hi (repeatable)
    #[arg(long, value_parser = parse_domain)]
    pub domain: Vec<(String, f64, f64)>,

    #[arg(long, value_enum, default_value = "einstein")]
    pub mode: Mode,

    /// Conformal function φ on the given metric (conformal mode); without it
    /// the metric must be a top-level conformal(s, g) with φ = 1/s
    #[arg(long)]
    pub phi: Option<String>,

    #[command(flatten)]
    pub grid: GridArgs,
}

fn parse_domain(text: &str) -> std::result::Result<(String, f64, f64), String> {
    let (name, range) = text.split_once('=').ok_or("expected coord=lo:hi")?;
    let (lo, hi) = range.split_once(':').ok_or("expected coord=lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((name.trim().to_string(), lo, hi))
}

#[derive(Subcommand, Debug)]
pub enum SolveCommand {
    /// φ''' + εkφ' = 0
    Brinkmann(BrinkmannArgs),
    /// f'' = εk*f
    Ft(FtArgs),
    /// K''' + KK' = 0
    Extremal(ExtremalArgs),
    /// uu'' + (n−2)/2 u'² + du² = k(n−2)/2
    Warp(WarpArgs),
}

/// Integration span and output.
#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SpanArgs {
    /// End of the integration span (the start is the initial point)
    #[arg(long, default_value_t = 10.0)]
    pub to: f64,

    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,

    /// Drift tolerance for the first integrals
    #[arg(long, env = "EINSTEIN_FORGE_TOL")]
    pub tol: Option<f64>,

    /// Write the trajectory as CSV to this path
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct BrinkmannArgs {
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub phi0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dphi0: f64,
    /// Defaults to −εkφ₀
    #[arg(long)]
    pub ddphi0: Option<f64>,
    #[command(flatten)]
    pub span: SpanArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct FtArgs {
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long)]
    pub k_star: f64,
    #[arg(long, default_value_t = 1.0)]
    pub f0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub df0: f64,
    #[command(flatten)]
    pub span: SpanArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ExtremalArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub d: f64,
    /// Initial K; defaults to the largest turning point
    #[arg(long, requires = "dk0")]
    pub k0: Option<f64>,
    #[arg(long, requires = "k0")]
    pub dk0: Option<f64>,
    #[command(flatten)]
    pub span: SpanArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct WarpArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub d: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long)]
    pub u0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub du0: f64,
    #[command(flatten)]
    pub span: SpanArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub kbar: f64,
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub c: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct DropArgs {
    /// Check a single m instead of the range 2..=m-max
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, default_value_t = 20)]
    pub m_max: u32,
    /// Also evaluate the instance (n, α, β), e.g. --instance 4,1,0.25
    #[arg(long, value_delimiter = ',')]
    pub instance: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
pub enum CatalogCommand {
    /// Names, citations and expectations
    List,
    /// One entry as JSON
    Show { name: String },
    /// Check one entry (name or JSON file), or all with --all
    Verify(CatalogVerifyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CatalogVerifyArgs {
    /// Entry name or path to an entry file
    #[arg(required_unless_present = "all")]
    pub name: Option<String>,
    #[arg(long, conflicts_with = "name")]
    pub all: bool,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Subcommand, Debug)]
pub enum ProfileCommand {
    /// Extremal surface dt² + a'²dx² with 2a'' + a² = c
    Figure1(Figure1Args),
    /// The surface dt² + 576t⁻⁶dx²
    Beltrami(BeltramiArgs),
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct Figure1Args {
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value_t = -4.0 / 3.0)]
    pub d: f64,
    #[arg(long, default_value_t = 8.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BeltramiArgs {
    #[arg(long, default_value_t = 6.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Verify(a) => cmd_verify(&a),
        Command::Solve(s) => cmd_solve(s),
        Command::Classify(a) => cmd_classify(&a),
        Command::Droplemma(a) => cmd_droplemma(&a),
        Command::Catalog(c) => cmd_catalog(c),
        Command::Profile(p) => cmd_profile(p),
    }
}

fn inputs<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn outcome(inputs: Value, pass: bool, summary: Value, message: String) -> Result<Outcome> {
    Ok(Outcome {
        report: RunReport::new(inputs, pass, summary),
        message,
    })
}

fn tolerance(tol: Option<f64>) -> Result<f64> {
    let tol = tol.unwrap_or(DEFAULT_TOL);
    if tol.is_nan() || tol <= 0.0 {
        bail!("tolerance must be positive, got {tol}");
    }
    Ok(tol)
}

fn apply_domain(domain: &mut DomainBox, overrides: &[(String, f64, f64)]) -> Result<()> {
    for (name, lo, hi) in overrides {
        domain.set(name, *lo, *hi)?;
    }
    Ok(())
}

fn catalog_entry(name_or_path: &str) -> Result<CatalogEntry> {
    let path = Path::new(name_or_path);
    if name_or_path.ends_with(".json") && path.exists() {
        return Ok(load_entry(path)?);
    }
    Ok(find(name_or_path)?.clone())
}

fn catalog_summary(rep: &CatalogReport) -> String {
    let lambda = rep.lambda_hat.map(|l| format!(", λ̂ = {l:.10}")).unwrap_or_default();
    format!(
        "{}: {} [{}] residual {:.3e} on {} points{lambda}",
        rep.name,
        if rep.pass { "PASS" } else { "FAIL" },
        rep.expectation,
        rep.residual,
        rep.grid
    )
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let tol = tolerance(a.grid.tol)?;
    let count = a.grid.grid.unwrap_or(DEFAULT_GRID);
    if let (Some(name), Mode::Einstein) = (&a.catalog, a.mode) {
        let mut entry = catalog_entry(name)?;
        for (coord, lo, hi) in &a.domain {
            entry.domain.insert(coord.clone(), [*lo, *hi]);
        }
        let ov = VerifyOverrides {
            grid: Some(count),
            tol: Some(tol),
            parallel: a.grid.parallel,
        };
        let rep = verify_entry(&entry, &ov)?;
        let message = catalog_summary(&rep);
        return outcome(inputs(a), rep.pass, serde_json::to_value(&rep)?, message);
    }

    let (spec, mut domain) = match (&a.metric, &a.file, &a.catalog) {
        (Some(text), _, _) => MetricEnvelope::from_text(text)?.build(DEFAULT_DOMAIN)?,
        (_, Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            MetricEnvelope::from_text(&text)?.build(DEFAULT_DOMAIN)?
        }
        (_, _, Some(name)) => catalog_entry(name)?.build()?,
        _ => bail!("one of --metric, --file or --catalog is required"),
    };
    apply_domain(&mut domain, &a.domain)?;
    let grid = domain.halton(count);

    match a.mode {
        Mode::Einstein => {
            let rep = einstein_residual_opts(&spec, &grid, tol, a.grid.parallel)?;
            let message = format!(
                "{}: λ̂ = {:.10}, max |Ric − λ̂g| = {:.3e} on {} points (tol {tol:e})",
                if rep.pass { "Einstein" } else { "not Einstein" },
                rep.lambda_hat,
                rep.max_residual,
                rep.points
            );
            outcome(inputs(a), rep.pass, serde_json::to_value(&rep)?, message)
        }
        Mode::Conformal => {
            let pair = match &a.phi {
                Some(phi) => ConformalPair::new(spec.clone(), scalar_on(&spec, phi)?),
                None => ConformalPair::from_spec(&spec)
                    .ok_or_else(|| anyhow!("conformal mode needs --phi or a top-level conformal(s, g) metric"))?,
            };
            let rep = conformally_einstein_residual_opts(&pair, &grid, tol, a.grid.parallel)?;
            let message = format!(
                "{}: max trace-free residual {:.3e} on {} points (tol {tol:e})",
                if rep.pass {
                    "conformally Einstein"
                } else {
                    "not conformally Einstein"
                },
                rep.max_residual,
                rep.points
            );
            outcome(inputs(a), rep.pass, serde_json::to_value(&rep)?, message)
        }
    }
}

fn span_of(x0: f64, s: &SpanArgs) -> Result<[f64; 2]> {
    if s.to == x0 {
        bail!("empty integration span");
    }
    Ok([x0, s.to])
}

fn emit(table: Option<TrajectoryTable>, path: &Option<PathBuf>) -> Result<Value> {
    match (table, path) {
        (Some(t), Some(p)) => {
            let file = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            t.write_csv(file)?;
            Ok(json!(p.display().to_string()))
        }
        _ => Ok(Value::Null),
    }
}

fn cmd_solve(s: SolveCommand) -> Result<Outcome> {
    match s {
        SolveCommand::Brinkmann(a) => {
            let tol = tolerance(a.span.tol)?;
            let p = BrinkmannProblem {
                eps: a.eps,
                k: a.k,
                phi0: a.phi0,
                dphi0: a.dphi0,
                ddphi0: a.ddphi0,
            };
            let sol = solve_brinkmann(&p, span_of(0.0, &a.span)?, a.span.step)?;
            let csv = emit(a.span.emit.as_ref().map(|_| sol.table(&p)), &a.span.emit)?;
            let pass = sol.drift < tol;
            let message = format!("{:?} family, k* = {}, drift {:.3e}", sol.family, sol.k_star, sol.drift);
            let summary = json!({
                "family": sol.family,
                "k_star": sol.k_star,
                "drift": sol.drift,
                "steps": sol.t.len(),
                "csv": csv,
            });
            outcome(inputs(&a), pass, summary, message)
        }
        SolveCommand::Ft(a) => {
            let tol = tolerance(a.span.tol)?;
            let p = FtProblem::from_initial(a.eps, a.k_star, a.f0, a.df0);
            let sol = solve_ft(&p, span_of(0.0, &a.span)?, a.span.step)?;
            let csv = emit(a.span.emit.as_ref().map(|_| sol.table(&p)), &a.span.emit)?;
            let pass = sol.drift < tol * (1.0 + sol.k_bar.abs());
            let message = format!(
                "{:?}, k̄ = {}, drift {:.3e}, max deviation from closed form {:.3e}",
                sol.family, sol.k_bar, sol.drift, sol.closed_form_error
            );
            let summary = json!({
                "family": sol.family,
                "k_bar": sol.k_bar,
                "drift": sol.drift,
                "closed_form_error": sol.closed_form_error,
                "csv": csv,
            });
            outcome(inputs(&a), pass, summary, message)
        }
        SolveCommand::Extremal(a) => {
            let tol = tolerance(a.span.tol)?;
            let p = match (a.k0, a.dk0) {
                (Some(k0), Some(dk0)) => ExtremalParams::new(a.c, a.d, k0, dk0)?,
                _ => ExtremalParams::from_turning_point(a.c, a.d)?,
            };
            let sol = solve_extremal(&p, span_of(0.0, &a.span)?, a.span.step)?;
            let csv = emit(a.span.emit.as_ref().map(|_| sol.table()), &a.span.emit)?;
            let pass = sol.c_drift < tol && sol.d_drift < tol;
            let message = format!(
                "K in [{:.10}, {:.10}], drift c {:.3e}, d {:.3e}, {} zeros of K'",
                sol.k_min,
                sol.k_max,
                sol.c_drift,
                sol.d_drift,
                sol.dk_zero_crossings.len()
            );
            let summary = json!({
                "k0": p.k0,
                "k_min": sol.k_min,
                "k_max": sol.k_max,
                "c_drift": sol.c_drift,
                "d_drift": sol.d_drift,
                "dk_zero_crossings": sol.dk_zero_crossings,
                "csv": csv,
            });
            outcome(inputs(&a), pass, summary, message)
        }
        SolveCommand::Warp(a) => {
            let tol = tolerance(a.span.tol)?;
            let p = IteratedWarpProblem::new(a.n, a.k, a.d, a.x0, a.u0, a.du0)?;
            let sol = solve_iterated_warp(&p, span_of(a.x0, &a.span)?, a.span.step)?;
            let csv = emit(a.span.emit.as_ref().map(|_| sol.table()), &a.span.emit)?;
            let verdict = classify_warp(p.n, p.k_bar(), p.k, sol.c).ok();
            let pass = sol.c_drift < tol * (1.0 + sol.c.abs()) && sol.e_drift < tol * (1.0 + sol.e.abs());
            let message = format!(
                "c = {}, e = {}, drift {:.3e}/{:.3e}, λ = {}{}",
                sol.c,
                sol.e,
                sol.c_drift,
                sol.e_drift,
                p.lambda(),
                sol.truncated_at
                    .map(|x| format!(", u reached 0 at x = {x}"))
                    .unwrap_or_default()
            );
            let summary = json!({
                "c": sol.c,
                "e": sol.e,
                "k_bar": p.k_bar(),
                "lambda": p.lambda(),
                "c_drift": sol.c_drift,
                "e_drift": sol.e_drift,
                "truncated_at": sol.truncated_at,
                "du_zero_crossings": sol.du_zero_crossings,
                "classification": verdict,
                "csv": csv,
            });
            outcome(inputs(&a), pass, summary, message)
        }
    }
}

fn cmd_classify(a: &ClassifyArgs) -> Result<Outcome> {
    let v = classify_warp(a.n, a.kbar, a.k, a.c)?;
    let roots: Vec<String> = v
        .roots
        .iter()
        .map(|r| format!("{} (order {})", r.value, r.order))
        .collect();
    let message = format!("{:?}: roots [{}]; {}", v.kind, roots.join(", "), v.explanation);
    outcome(inputs(a), true, serde_json::to_value(&v)?, message)
}

fn cmd_droplemma(a: &DropArgs) -> Result<Outcome> {
    let ms: Vec<u32> = match a.m {
        Some(m) => vec![m],
        None => (2..=a.m_max).collect(),
    };
    let reports = ms
        .iter()
        .map(|&m| drop_polynomial(m))
        .collect::<einstein_forge::Result<Vec<_>>>()?;
    let mut pass = reports
        .iter()
        .all(|r| r.no_positive_zero && r.parity_positive && r.recursion_holds);
    let instance = match &a.instance {
        Some(v) => {
            if v.len() != 3 {
                bail!("--instance takes three values n,α,β; got {}", v.len());
            }
            if v[0].fract() != 0.0 || v[0] < 0.0 {
                bail!("instance dimension must be a non-negative integer, got {}", v[0]);
            }
            let d = drop_instance(v[0] as usize, v[1], v[2])?;
            pass &= d.a_root_consistent;
            Some(d)
        }
        None => None,
    };
    let message = format!(
        "m = {}..{}: coefficients {} nonnegative with parity pattern{}",
        ms[0],
        ms[ms.len() - 1],
        if pass { "all" } else { "NOT all" },
        instance
            .as_ref()
            .map(|d| format!(
                "; instance A = {}, g(A) = {:.3e}, γ_A = {}, γ_B = {}",
                d.a, d.g_at_a, d.gamma_a, d.gamma_b
            ))
            .unwrap_or_default()
    );
    let summary = json!({ "polynomials": reports, "instance": instance });
    outcome(inputs(a), pass, summary, message)
}

fn cmd_catalog(c: CatalogCommand) -> Result<Outcome> {
    match c {
        CatalogCommand::List => {
            let list = catalog_list();
            let message = list
                .iter()
                .map(|l| format!("{:<28} {}", l.name, l.expectation))
                .collect::<Vec<_>>()
                .join("\n");
            outcome(json!({}), true, serde_json::to_value(&list)?, message)
        }
        CatalogCommand::Show { name } => {
            let entry = catalog_entry(&name)?;
            let message = format!("{}: {}\n  {}", entry.name, entry.metric, entry.citation);
            outcome(json!({ "name": name }), true, serde_json::to_value(&entry)?, message)
        }
        CatalogCommand::Verify(a) => {
            let ov = VerifyOverrides {
                grid: a.grid.grid,
                tol: Some(tolerance(a.grid.tol)?),
                parallel: a.grid.parallel,
            };
            let reports = match &a.name {
                Some(name) if !a.all => vec![verify_entry(&catalog_entry(name)?, &ov)?],
                _ => catalog_verify_all(&ov)?,
            };
            let pass = reports.iter().all(|r| r.pass);
            let failed = reports.iter().filter(|r| !r.pass).count();
            let mut lines: Vec<String> = reports.iter().map(catalog_summary).collect();
            lines.push(format!("{} of {} entries pass", reports.len() - failed, reports.len()));
            let summary = if reports.len() == 1 {
                serde_json::to_value(&reports[0])?
            } else {
                serde_json::to_value(&reports)?
            };
            outcome(inputs(&a), pass, summary, lines.join("\n"))
        }
    }
}

fn cmd_profile(p: ProfileCommand) -> Result<Outcome> {
    let (args, profile, path) = match p {
        ProfileCommand::Figure1(a) => {
            let prof = extremal_profile(a.c, a.d, a.t_end, a.step)?;
            (inputs(&a), prof, a.emit)
        }
        ProfileCommand::Beltrami(a) => {
            let prof = beltrami_profile(a.t_end, a.samples)?;
            (inputs(&a), prof, a.emit)
        }
    };
    let csv = emit(Some(profile.table()), &path)?;
    let cones: Vec<String> = profile
        .axis_points
        .iter()
        .filter(|p| !p.smooth)
        .map(|p| format!("t = {:.8} (K = {:.10}, slope {:.6})", p.t, p.k, p.slope))
        .collect();
    let message = format!(
        "{} profile from t₀ = {:.10}, K(t₀) = {:.10}, {} rows{}{}",
        profile.kind,
        profile.t0,
        profile.k_at_t0,
        profile.rows.len(),
        profile
            .truncated_at
            .map(|t| format!(", cut at t = {t}"))
            .unwrap_or_default(),
        if cones.is_empty() {
            String::new()
        } else {
            format!(", singular circles at {}", cones.join("; "))
        }
    );
    let summary = json!({
        "kind": profile.kind,
        "t0": profile.t0,
        "k_at_t0": profile.k_at_t0,
        "rows": profile.rows.len(),
        "truncated_at": profile.truncated_at,
        "axis_points": profile.axis_points,
        "csv": csv,
    });
    outcome(args, true, summary, message)
}
