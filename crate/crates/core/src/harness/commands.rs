//! The subcommands of the command-line tool. Each writes its CSV rows and
//! JSON summary under the output directory and returns the summaries.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use super::checks::{check_adjoint, check_dbar_squared, check_fractional, check_geometry, check_structure};
use super::config::Config;
use super::estimate::{EstimateCase, EstimateId};
use super::friedrichs::{friedrichs_grid, friedrichs_study, FriedrichsOperator};
use super::output::{emit, file_stem, read_summaries, to_json, Summary};
use super::sweep::{derive_seeds, origin_family, run_sweeps, EstimateReport};
use crate::error::{Error, Result};
use crate::fields::{make_test_form, TestFormSpec};
use crate::geometry::OrderReport;

pub const GEOMETRY_SAMPLES: usize = 10_000;
pub const DBAR_SQUARED_FUNCTIONS: usize = 20;
pub const ADJOINT_PAIRS: usize = 20;
pub const DEFAULT_CHECK_N: usize = 32;
pub const DEFAULT_ADJOINT_N: [usize; 2] = [16, 32];
/// Support radius of the Friedrichs fields.
pub const FRIEDRICHS_RADIUS: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Context {
    pub config: Config,
    /// `--n` from the command line, overriding every default resolution.
    pub n: Option<Vec<usize>>,
    pub out: PathBuf,
}

impl Context {
    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn check_n(&self) -> usize {
        self.n.as_ref().and_then(|n| n.first().copied()).unwrap_or(DEFAULT_CHECK_N)
    }

    fn sweep_n(&self) -> Vec<usize> {
        self.n.clone().unwrap_or_else(|| self.config.n.clone())
    }
}

fn check_summary(case: &str, parameters: serde_json::Value, n_list: Vec<usize>, pass: bool, details: serde_json::Value) -> Summary {
    Summary {
        case: case.into(),
        parameters,
        n_list,
        max_ratio: None,
        stable: pass,
        rows_csv: String::new(),
        pass,
        details,
    }
}

pub fn check_geometry_cmd(ctx: &Context) -> Result<Summary> {
    let n = ctx.check_n();
    let r = check_geometry(ctx.seed(), GEOMETRY_SAMPLES, n)?;
    let s = check_summary(
        "check-geometry",
        json!({"seed": ctx.seed(), "samples": GEOMETRY_SAMPLES}),
        vec![n],
        r.pass,
        to_json(&r)?,
    );
    emit(&ctx.out, "check-geometry", &[&r], s)
}

#[derive(Serialize)]
struct AnnulusRow {
    equation: &'static str,
    j: u32,
    gamma_lo: f64,
    gamma_hi: f64,
    count: usize,
    max: f64,
}

fn annulus_rows<'a>(equation: &'static str, r: &'a OrderReport) -> impl Iterator<Item = AnnulusRow> + 'a {
    r.annuli.iter().map(move |a| AnnulusRow {
        equation,
        j: a.j,
        gamma_lo: a.gamma_lo,
        gamma_hi: a.gamma_hi,
        count: a.count,
        max: a.max,
    })
}

/// `dbar dbar = 0` and the structure equations.
pub fn check_operators_cmd(ctx: &Context) -> Result<Summary> {
    let n = ctx.check_n();
    let sq = check_dbar_squared(ctx.seed(), DBAR_SQUARED_FUNCTIONS)?;
    let st = check_structure(ctx.seed(), n)?;
    let rows: Vec<AnnulusRow> = annulus_rows("bar", &st.bar)
        .chain(annulus_rows("star", &st.star))
        .chain(annulus_rows("comm", &st.comm))
        .collect();
    let pass = sq.pass && st.pass;
    let s = check_summary(
        "check-operators",
        json!({"seed": ctx.seed(), "functions": DBAR_SQUARED_FUNCTIONS}),
        vec![n],
        pass,
        json!({"dbar_squared": to_json(&sq)?, "structure": to_json(&st)?}),
    );
    emit(&ctx.out, "check-operators", &rows, s)
}

#[derive(Serialize)]
struct AdjointRow {
    u_seed: u64,
    f_seed: u64,
    n: usize,
    relative: f64,
    order: f64,
}

pub fn check_adjoint_cmd(ctx: &Context) -> Result<Summary> {
    let ns = match &ctx.n {
        Some(n) if n.len() >= 2 => n.clone(),
        Some(n) => vec![n[0], 2 * n[0]],
        None => DEFAULT_ADJOINT_N.to_vec(),
    };
    let r = check_adjoint(ctx.seed(), ADJOINT_PAIRS, &ns)?;
    let rows: Vec<AdjointRow> = r
        .pairs
        .iter()
        .flat_map(|p| {
            ns.iter().zip(&p.relative).map(|(&n, &relative)| AdjointRow {
                u_seed: p.u_seed,
                f_seed: p.f_seed,
                n,
                relative,
                order: p.order,
            })
        })
        .collect();
    let s = check_summary(
        "check-adjoint",
        json!({"seed": ctx.seed(), "pairs": ADJOINT_PAIRS}),
        ns.clone(),
        r.pass,
        json!({"min_order": r.min_order}),
    );
    emit(&ctx.out, "check-adjoint", &rows, s)
}

pub fn check_norms_cmd(ctx: &Context) -> Result<Summary> {
    let r = check_fractional(ctx.seed())?;
    let s = check_summary("check-norms", json!({"seed": ctx.seed()}), Vec::new(), r.pass, to_json(&r)?);
    emit(&ctx.out, "check-norms", &[&r], s)
}

#[derive(Serialize)]
struct FriedrichsCsvRow {
    field_seed: u64,
    operator: &'static str,
    eps: f64,
    residual: f64,
    reference: f64,
}

pub fn friedrichs_cmd(ctx: &Context) -> Result<Summary> {
    let cfg = &ctx.config;
    let eps = &cfg.friedrichs_eps;
    let tol = cfg.friedrichs_tolerances();
    let grid = friedrichs_grid(FRIEDRICHS_RADIUS, eps)?;
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    for seed in derive_seeds(cfg.seed, cfg.friedrichs_fields) {
        let spec = TestFormSpec::centered(FRIEDRICHS_RADIUS, 1, cfg.poly_degree, seed);
        let f = make_test_form(&spec, &grid)?;
        for t in friedrichs_study(&f, &FriedrichsOperator::FIRST_ORDER, eps, &tol)? {
            rows.extend(t.rows.iter().map(|r| FriedrichsCsvRow {
                field_seed: seed,
                operator: t.operator.name(),
                eps: r.eps,
                residual: r.residual,
                reference: t.reference,
            }));
            tables.push((seed, t));
        }
    }
    let worst = tables.iter().map(|t| t.1.final_over_initial).fold(0.0, f64::max);
    let details: Vec<_> = tables
        .iter()
        .map(|(seed, t)| {
            json!({
                "field_seed": seed,
                "operator": t.operator.name(),
                "observed_order": t.observed_order,
                "worst_step": t.worst_step,
                "final_over_initial": t.final_over_initial,
                "decreasing": t.decreasing,
                "pass": t.pass,
            })
        })
        .collect();
    let s = Summary {
        case: "friedrichs".into(),
        parameters: json!({
            "seed": cfg.seed,
            "fields": cfg.friedrichs_fields,
            "eps": eps,
            "support_radius": FRIEDRICHS_RADIUS,
            "step": tol.step,
            "final_over_initial": tol.final_over_initial,
        }),
        n_list: vec![grid.n()],
        max_ratio: Some(worst),
        stable: tables.iter().all(|t| t.1.decreasing),
        rows_csv: String::new(),
        pass: !tables.is_empty() && tables.iter().all(|t| t.1.pass),
        details: serde_json::Value::Array(details),
    };
    emit(&ctx.out, "friedrichs", &rows, s)
}

fn family(cfg: &Config, id: EstimateId) -> Vec<TestFormSpec> {
    let count = if id == EstimateId::E4 { cfg.e4_forms } else { cfg.forms };
    origin_family(&derive_seeds(cfg.seed, count), &cfg.radii, cfg.vanishing_order, cfg.poly_degree)
}

fn report_summary(ctx: &Context, prefix: &str, r: &EstimateReport, ns: &[usize]) -> Result<Summary> {
    let cfg = &ctx.config;
    let label = r.case.label();
    let s = Summary {
        case: label.clone(),
        parameters: json!({
            "epsilon": r.case.eps,
            "p": r.case.p,
            "seed": cfg.seed,
            "forms": family(cfg, r.case.id).len() / cfg.radii.len().max(1),
            "radii": cfg.radii,
            "vanishing_order": cfg.vanishing_order,
            "poly_degree": cfg.poly_degree,
            "pad_factor": cfg.pad_factor,
        }),
        n_list: ns.to_vec(),
        max_ratio: r.summary.max_ratio,
        stable: r.summary.stable,
        rows_csv: String::new(),
        pass: r.summary.pass,
        details: to_json(&r.summary)?,
    };
    emit(&ctx.out, &format!("{prefix}{}", file_stem(&label)), &r.rows, s)
}

fn sweep_cases(ctx: &Context, cases: &[EstimateCase], prefix: &str) -> Result<Vec<Summary>> {
    let ns = ctx.sweep_n();
    let opts = ctx.config.sweep_options();
    let mut out = Vec::new();
    let (wide, tight): (Vec<EstimateCase>, Vec<EstimateCase>) = cases.iter().partition(|c| c.id == EstimateId::E4);
    for group in [tight, wide] {
        let Some(first) = group.first() else { continue };
        let fam = family(&ctx.config, first.id);
        for r in run_sweeps(&group, &fam, &ns, &opts)? {
            out.push(report_summary(ctx, prefix, &r, &ns)?);
        }
    }
    Ok(out)
}

pub fn estimate_cmd(ctx: &Context, case: EstimateCase) -> Result<Summary> {
    case.validate()?;
    Ok(sweep_cases(ctx, &[case], "estimate_")?.remove(0))
}

/// E1-E3 and the configured E4 cases.
pub fn sweep_cmd(ctx: &Context) -> Result<Vec<Summary>> {
    let mut cases: Vec<EstimateCase> = [EstimateId::E1, EstimateId::E2, EstimateId::E3]
        .into_iter()
        .map(EstimateCase::plain)
        .collect::<Result<_>>()?;
    cases.extend(ctx.config.e4_cases()?);
    sweep_cases(ctx, &cases, "sweep_")
}

#[derive(Serialize)]
struct ReportRow {
    file: String,
    case: String,
    max_ratio: Option<f64>,
    stable: bool,
    pass: bool,
}

/// Collects the summaries already in the output directory.
pub fn report_cmd(ctx: &Context) -> Result<Summary> {
    let found = read_summaries(&ctx.out)?;
    if found.is_empty() {
        return Err(Error::InvalidInput(format!("no summaries in {}", ctx.out.display())));
    }
    let rows: Vec<ReportRow> = found
        .iter()
        .map(|(p, s)| ReportRow {
            file: p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            case: s.case.clone(),
            max_ratio: s.max_ratio,
            stable: s.stable,
            pass: s.pass,
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    let s = Summary {
        case: "report".into(),
        parameters: json!({"summaries": rows.len()}),
        n_list: Vec::new(),
        max_ratio: rows.iter().filter_map(|r| r.max_ratio).reduce(f64::max),
        stable: rows.iter().all(|r| r.stable),
        rows_csv: String::new(),
        pass,
        details: json!(rows.iter().map(|r| json!({"case": r.case, "pass": r.pass})).collect::<Vec<_>>()),
    };
    emit(&ctx.out, "report", &rows, s)
}
