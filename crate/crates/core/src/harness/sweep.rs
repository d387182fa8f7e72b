use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{estimate_grid, evaluate_cases, EstimateCase, EstimateId};
use crate::error::{Error, Result};
use crate::fields::{make_test_form, TestFormSpec};
use crate::norms::DEFAULT_PAD_FACTOR;
use crate::tolerances::{REFINEMENT_DRIFT, TREND_VIOLATION};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub pad_factor: f64,
    /// Allowed relative change of the max ratio between resolutions.
    pub drift: f64,
    /// Allowed relative growth of the max ratio from one radius to the next
    /// smaller one.
    pub trend: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            pad_factor: DEFAULT_PAD_FACTOR,
            drift: REFINEMENT_DRIFT,
            trend: TREND_VIOLATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Degenerate,
    Error,
}

/// One form evaluated at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub case: String,
    pub seed: u64,
    pub radius: f64,
    pub vanishing_order: u32,
    pub poly_degree: u32,
    pub n: usize,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub status: RowStatus,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMax {
    pub key: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub per_radius_max: Vec<GroupMax>,
    pub per_resolution_max: Vec<GroupMax>,
    /// Largest relative change of the max ratio between consecutive
    /// resolutions.
    pub drift: f64,
    /// Largest relative growth of the max ratio as the radius shrinks.
    pub trend_step: f64,
    pub evaluated: usize,
    pub degenerate: usize,
    pub errors: usize,
    pub stable: bool,
    pub trend_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub case: EstimateCase,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// `count` seeds derived from `base`.
pub fn derive_seeds(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| base.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
        .collect()
}

/// Every seed at every radius, centered at the origin.
pub fn origin_family(seeds: &[u64], radii: &[f64], vanishing_order: u32, degree: u32) -> Vec<TestFormSpec> {
    seeds
        .iter()
        .flat_map(|&s| {
            radii
                .iter()
                .map(move |&r| TestFormSpec::centered(r, vanishing_order, degree, s))
        })
        .collect()
}

pub fn run_sweep(case: EstimateCase, family: &[TestFormSpec], resolutions: &[usize]) -> Result<EstimateReport> {
    Ok(run_sweeps(&[case], family, resolutions, &SweepOptions::default())?.remove(0))
}

/// Evaluates every case on every `(spec, n)` pair. Cases sharing a grid
/// layout share one sampled form and one pass over it.
pub fn run_sweeps(
    cases: &[EstimateCase],
    family: &[TestFormSpec],
    resolutions: &[usize],
    opts: &SweepOptions,
) -> Result<Vec<EstimateReport>> {
    if family.is_empty() {
        return Err(Error::InvalidInput("sweep family is empty".into()));
    }
    if cases.is_empty() {
        return Err(Error::InvalidInput("no estimate cases to sweep".into()));
    }
    if resolutions.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "a sweep needs at least two resolutions, got {resolutions:?}"
        )));
    }
    for c in cases {
        c.validate()?;
    }
    for s in family {
        s.validate()?;
    }

    let tight: Vec<usize> = (0..cases.len()).filter(|&i| cases[i].id != EstimateId::E4).collect();
    let wide: Vec<usize> = (0..cases.len()).filter(|&i| cases[i].id == EstimateId::E4).collect();
    let groups: Vec<(EstimateId, Vec<usize>)> = [(EstimateId::E1, tight), (EstimateId::E4, wide)]
        .into_iter()
        .filter(|g| !g.1.is_empty())
        .collect();

    let mut order: Vec<(usize, usize)> = (0..family.len())
        .flat_map(|s| resolutions.iter().map(move |&n| (s, n)))
        .collect();
    order.sort_by(|a, b| {
        let (x, y) = (&family[a.0], &family[b.0]);
        x.seed
            .cmp(&y.seed)
            .then(x.support_radius.total_cmp(&y.support_radius))
            .then(a.1.cmp(&b.1))
    });

    let results: Vec<Vec<(usize, Result<(f64, f64)>)>> = order
        .par_iter()
        .map(|&(s, n)| {
            let spec = &family[s];
            let mut out = Vec::with_capacity(cases.len());
            for (layout, members) in &groups {
                let group: Vec<EstimateCase> = members.iter().map(|&i| cases[i]).collect();
                let evaluated = estimate_grid(spec, n, *layout, opts.pad_factor)
                    .and_then(|g| make_test_form(spec, &g))
                    .and_then(|f| evaluate_cases(&group, &f, opts.pad_factor));
                match evaluated {
                    Ok(sides) => out.extend(members.iter().copied().zip(sides.into_iter().map(Ok))),
                    Err(e) => out.extend(members.iter().map(|&i| (i, Err(e.clone())))),
                }
            }
            out
        })
        .collect();

    let mut rows: Vec<Vec<SweepRow>> = vec![Vec::new(); cases.len()];
    for (&(s, n), res) in order.iter().zip(results) {
        let spec = &family[s];
        for (i, r) in res {
            let mut row = SweepRow {
                case: cases[i].label(),
                seed: spec.seed,
                radius: spec.support_radius,
                vanishing_order: spec.vanishing_order,
                poly_degree: spec.polynomial_degree,
                n,
                lhs: None,
                rhs: None,
                ratio: None,
                status: RowStatus::Ok,
                message: String::new(),
            };
            match r {
                Ok((l, rh)) => {
                    row.lhs = Some(l);
                    row.rhs = Some(rh);
                    if rh > 0.0 {
                        row.ratio = Some(l / rh);
                    } else {
                        row.status = RowStatus::Degenerate;
                    }
                }
                Err(e) => {
                    row.status = RowStatus::Error;
                    row.message = e.to_string();
                }
            }
            rows[i].push(row);
        }
    }

    Ok(cases
        .iter()
        .zip(rows)
        .map(|(c, rows)| EstimateReport {
            case: *c,
            summary: summarize(&rows, opts),
            rows,
        })
        .collect())
}

fn group_max<K: Ord + Copy>(rows: &[SweepRow], key: impl Fn(&SweepRow) -> K) -> BTreeMap<K, f64> {
    let mut out = BTreeMap::new();
    for r in rows {
        if let Some(q) = r.ratio {
            let e = out.entry(key(r)).or_insert(f64::NEG_INFINITY);
            *e = f64::max(*e, q);
        }
    }
    out
}

pub fn summarize(rows: &[SweepRow], opts: &SweepOptions) -> SweepSummary {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().reduce(f64::max);
    let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);

    // radii keyed by their bit patterns are ordered like the values since all are positive
    let by_radius = group_max(rows, |r| r.radius.to_bits());
    let by_n = group_max(rows, |r| r.n);

    let per_n: Vec<f64> = by_n.values().copied().collect();
    let drift = per_n
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[0].abs())
        .fold(0.0, f64::max);
    let shrinking: Vec<f64> = by_radius.values().rev().copied().collect();
    let trend_step = shrinking
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).max(0.0))
        .fold(0.0, f64::max);

    let errors = rows.iter().filter(|r| r.status == RowStatus::Error).count();
    let degenerate = rows.iter().filter(|r| r.status == RowStatus::Degenerate).count();
    let finite = max_ratio.is_some_and(f64::is_finite);
    let stable = drift.is_finite() && drift <= opts.drift;
    let trend_ok = trend_step.is_finite() && trend_step <= opts.trend;
    SweepSummary {
        max_ratio,
        mean_ratio,
        per_radius_max: by_radius
            .iter()
            .map(|(&k, &m)| GroupMax {
                key: f64::from_bits(k),
                max_ratio: m,
            })
            .collect(),
        per_resolution_max: by_n
            .iter()
            .map(|(&k, &m)| GroupMax {
                key: k as f64,
                max_ratio: m,
            })
            .collect(),
        drift,
        trend_step,
        evaluated: ratios.len(),
        degenerate,
        errors,
        stable,
        trend_ok,
        pass: finite && stable && trend_ok && errors == 0,
    }
}
