use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Ball, Grid, MollifyPlan, OneForm, Representation, ScalarField};
use crate::geometry::det_g;
use crate::norms::{weighted_l2_norm, FieldRef};
use crate::operators::{apply_frame_field, dbar_oneform, dbar_star, two_form_to_frame, FrameField};
use crate::tolerances::{FRIEDRICHS_FINAL_OVER_INITIAL, FRIEDRICHS_STEP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FriedrichsOperator {
    /// Multiplication by `exp(i x1) / (1 + gamma^2)`.
    Multiply,
    L1,
    L2,
    Lbar1,
    Lbar2,
    /// `dbar` of a form, as its frame coefficient.
    DbarCurl,
    DbarStar,
}

impl FriedrichsOperator {
    /// The first-order operators of the acceptance protocol.
    pub const FIRST_ORDER: [FriedrichsOperator; 6] = [
        FriedrichsOperator::L1,
        FriedrichsOperator::L2,
        FriedrichsOperator::Lbar1,
        FriedrichsOperator::Lbar2,
        FriedrichsOperator::DbarCurl,
        FriedrichsOperator::DbarStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Multiply => "multiply",
            Self::L1 => "L1",
            Self::L2 => "L2",
            Self::Lbar1 => "Lbar1",
            Self::Lbar2 => "Lbar2",
            Self::DbarCurl => "dbar",
            Self::DbarStar => "dbar_star",
        }
    }

    fn needs_form(self) -> bool {
        matches!(self, Self::DbarCurl | Self::DbarStar)
    }
}

impl fmt::Display for FriedrichsOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FriedrichsOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Multiply]
            .into_iter()
            .chain(Self::FIRST_ORDER)
            .find(|o| o.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown operator {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsRow {
    pub eps: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsTable {
    pub operator: FriedrichsOperator,
    pub rows: Vec<FriedrichsRow>,
    /// `||Df||`, the scale of the residuals.
    pub reference: f64,
    /// Convergence order fitted on the two smallest radii.
    pub observed_order: f64,
    /// Largest `residual[k+1] / residual[k]`.
    pub worst_step: f64,
    pub final_over_initial: f64,
    pub decreasing: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedrichsTolerances {
    /// Allowed growth per step.
    pub step: f64,
    /// Required `final / initial`.
    pub final_over_initial: f64,
}

impl Default for FriedrichsTolerances {
    fn default() -> Self {
        Self {
            step: FRIEDRICHS_STEP,
            final_over_initial: FRIEDRICHS_FINAL_OVER_INITIAL,
        }
    }
}

fn multiplier(p: crate::geometry::Point) -> C64 {
    let x = p.to_real();
    C64::from_polar(1.0 / (1.0 + p.gamma().powi(2)), x[0])
}

/// `D` applied to the frame coefficients `comps` (one for a scalar field).
fn apply(op: FriedrichsOperator, comps: &[ScalarField]) -> Result<Vec<ScalarField>> {
    let field = |f: FrameField| comps.iter().map(|c| apply_frame_field(c, f)).collect();
    Ok(match op {
        FriedrichsOperator::Multiply => comps.iter().map(|c| c.multiply_by(multiplier)).collect(),
        FriedrichsOperator::L1 => field(FrameField::L1),
        FriedrichsOperator::L2 => field(FrameField::L2),
        FriedrichsOperator::Lbar1 => field(FrameField::Lbar1),
        FriedrichsOperator::Lbar2 => field(FrameField::Lbar2),
        FriedrichsOperator::DbarCurl | FriedrichsOperator::DbarStar => {
            let [a, b] = comps else {
                return Err(Error::InvalidInput(format!("{op} acts on forms, not scalar fields")));
            };
            let form = OneForm::from_components(a.clone(), b.clone(), Representation::Frame);
            if op == FriedrichsOperator::DbarCurl {
                vec![two_form_to_frame(&dbar_oneform(&form))]
            } else {
                vec![dbar_star(&form)?]
            }
        }
    })
}

/// `||a - b||^2` in `L^2(X)`.
fn diff_sq(a: &ScalarField, b: &ScalarField) -> f64 {
    let grid: &Grid = a.grid();
    let support = match (a.support(), b.support()) {
        (Some(x), Some(y)) => Some(Ball::union(x, y)),
        _ => None,
    };
    let mut total = 0.0;
    grid.for_each_in(support, |idx, ijkl| {
        let d = (a.values()[idx] - b.values()[idx]).norm_sqr();
        if d > 0.0 && grid.in_mask(idx) {
            total += 0.5 * d * det_g(grid.point_at(ijkl));
        }
    });
    total * grid.cell_volume()
}

fn table(op: FriedrichsOperator, rows: Vec<FriedrichsRow>, reference: f64, tol: &FriedrichsTolerances) -> FriedrichsTable {
    let worst_step = rows
        .windows(2)
        .map(|w| w[1].residual / w[0].residual)
        .fold(0.0, f64::max);
    let final_over_initial = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.residual / a.residual,
        _ => f64::NAN,
    };
    let observed_order = match rows.as_slice() {
        [.., a, b] => (a.residual / b.residual).ln() / (a.eps / b.eps).ln(),
        _ => f64::NAN,
    };
    let decreasing = rows.len() >= 2 && worst_step <= 1.0 + tol.step;
    FriedrichsTable {
        operator: op,
        reference,
        observed_order,
        worst_step,
        final_over_initial,
        decreasing,
        pass: decreasing && final_over_initial <= tol.final_over_initial,
        rows,
    }
}

/// Residuals `||D(chi_eps * f) - D f||_{L^2(X)}` along `eps_list`, for each
/// operator. Forms are mollified coefficientwise in the frame.
pub fn friedrichs_study<'a>(
    f: impl Into<FieldRef<'a>>,
    ops: &[FriedrichsOperator],
    eps_list: &[f64],
    tol: &FriedrichsTolerances,
) -> Result<Vec<FriedrichsTable>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("no mollifier radii".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) || !(eps_list[eps_list.len() - 1] > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mollifier radii must be positive and decreasing, got {eps_list:?}"
        )));
    }
    let comps: Vec<ScalarField> = match f.into() {
        FieldRef::Scalar(s) => vec![s.clone()],
        FieldRef::Form(form) => form.as_frame().components().to_vec(),
    };
    if let Some(op) = ops.iter().find(|o| o.needs_form() && comps.len() != 2) {
        return Err(Error::InvalidInput(format!("{op} acts on forms, not scalar fields")));
    }

    let plan = MollifyPlan::new(&comps.iter().collect::<Vec<_>>(), eps_list[0])?;
    let exact: Vec<Vec<ScalarField>> = ops.iter().map(|&op| apply(op, &comps)).collect::<Result<_>>()?;
    let reference: Vec<f64> = exact
        .iter()
        .map(|outs| outs.iter().map(|o| weighted_l2_norm(o, 0.0).value.powi(2)).sum::<f64>().sqrt())
        .collect();
    let mut rows: Vec<Vec<FriedrichsRow>> = vec![Vec::new(); ops.len()];
    for &eps in eps_list {
        let smooth = plan.apply(eps)?;
        for (k, &op) in ops.iter().enumerate() {
            let outs = apply(op, &smooth)?;
            let residual = outs.iter().zip(&exact[k]).map(|(a, b)| diff_sq(a, b)).sum::<f64>().sqrt();
            rows[k].push(FriedrichsRow { eps, residual });
        }
    }
    Ok(ops
        .iter()
        .zip(rows)
        .zip(reference)
        .map(|((&op, rows), r)| table(op, rows, r, tol))
        .collect())
}

/// Window centered at the origin fine enough for the smallest radius
/// (`h = min_eps / 2`) and wide enough that the largest one keeps the
/// mollified support four cells inside.
pub fn friedrichs_grid(support_radius: f64, eps_list: &[f64]) -> Result<Grid> {
    let min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eps_list.iter().copied().fold(0.0, f64::max);
    if !(min > 0.0 && min.is_finite()) {
        return Err(Error::InvalidInput(format!("bad mollifier radii {eps_list:?}")));
    }
    let h = min / 2.0;
    let half = support_radius + max + 4.0 * h;
    let mut n = (2.0 * half / h - 1e-9).ceil() as usize;
    n += n % 2;
    Grid::window(n, crate::geometry::Point::ORIGIN, n as f64 * h / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_test_form, TestFormSpec};
    use crate::geometry::Point;

    #[test]
    fn grid_matches_protocol() {
        let g = friedrichs_grid(0.1, &[0.2, 0.1, 0.05, 0.025]).unwrap();
        assert_eq!(g.n(), 56);
        assert!((g.h() - 0.0125).abs() < 1e-15);
        assert!(!g.has_mask());
    }

    #[test]
    fn radii_are_checked() {
        let g = Grid::window(16, Point::ORIGIN, 0.4).unwrap();
        let u = ScalarField::from_fn_in(&g, Ball::new(Point::ORIGIN, 0.1), |_| C64::new(1.0, 0.0));
        let tol = FriedrichsTolerances::default();
        let ops = [FriedrichsOperator::L1];
        assert!(matches!(friedrichs_study(&u, &ops, &[0.1, 0.2], &tol), Err(Error::InvalidInput(_))));
        assert!(matches!(friedrichs_study(&u, &ops, &[0.01], &tol), Err(Error::UnderResolved(_))));
        assert!(matches!(
            friedrichs_study(&u, &[FriedrichsOperator::DbarStar], &[0.1], &tol),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn zeroth_and_first_order_converge() {
        let eps = [0.16, 0.08, 0.04];
        let spec = TestFormSpec {
            center: Point::from_real([0.05, 0.0, 0.0, 0.0]),
            ..TestFormSpec::centered(0.12, 1, 1, 4)
        };
        let g = Grid::window(40, Point::from_real([0.05, 0.0, 0.0, 0.0]), 0.4).unwrap();
        let f = make_test_form(&spec, &g).unwrap();
        let u = f.component(0);
        let ops = [FriedrichsOperator::Multiply, FriedrichsOperator::L1];
        let t = friedrichs_study(&u, &ops, &eps, &FriedrichsTolerances::default()).unwrap();
        for tab in &t {
            assert!(tab.decreasing, "{tab:?}");
            assert!(tab.observed_order >= 1.0, "{tab:?}");
        }
    }
}
