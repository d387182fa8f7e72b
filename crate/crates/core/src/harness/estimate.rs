use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::stencil::{gradient, wirtinger_from_gradient};
use crate::fields::{Grid, OneForm, TestFormSpec};
use crate::geometry::FrameCoeffs;
use crate::norms::{lp_norm, sobolev_fractional_norms, Coefficients};
use crate::operators::{check_interior_support, dbar_point, dstar_point, FrameField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimateId {
    E1,
    E2,
    E3,
    E4,
}

impl EstimateId {
    pub const ALL: [EstimateId; 4] = [EstimateId::E1, EstimateId::E2, EstimateId::E3, EstimateId::E4];
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for EstimateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E1" => Ok(Self::E1),
            "E2" => Ok(Self::E2),
            "E3" => Ok(Self::E3),
            "E4" => Ok(Self::E4),
            other => Err(Error::InvalidCase(format!("unknown estimate {other:?}, expected E1..E4"))),
        }
    }
}

/// An estimate to test, with `(eps, p)` for E4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCase {
    pub id: EstimateId,
    pub eps: Option<f64>,
    pub p: Option<f64>,
}

impl EstimateCase {
    pub fn new(id: EstimateId, eps: Option<f64>, p: Option<f64>) -> Result<Self> {
        let case = Self { id, eps, p };
        case.validate()?;
        Ok(case)
    }

    pub fn plain(id: EstimateId) -> Result<Self> {
        Self::new(id, None, None)
    }

    pub fn subelliptic(eps: f64, p: f64) -> Result<Self> {
        Self::new(EstimateId::E4, Some(eps), Some(p))
    }

    pub fn validate(&self) -> Result<()> {
        match (self.id, self.eps, self.p) {
            (EstimateId::E4, Some(eps), Some(p)) => {
                if !(0.0..=1.0).contains(&eps) {
                    return Err(Error::InvalidCase(format!("E4 needs 0 <= epsilon <= 1, got {eps}")));
                }
                let bound = 4.0 / (2.0 - eps);
                if !(p > bound) {
                    return Err(Error::InvalidCase(format!(
                        "E4 needs p > 4/(2-epsilon) = {bound:.4} at epsilon = {eps}, got p = {p}"
                    )));
                }
                Ok(())
            }
            (EstimateId::E4, _, _) => Err(Error::InvalidCase("E4 needs both epsilon and p".into())),
            (_, None, None) => Ok(()),
            (id, _, _) => Err(Error::InvalidCase(format!("{id} takes no epsilon or p"))),
        }
    }

    /// Stable label such as `E1` or `E4(eps=0.5,p=4)`.
    pub fn label(&self) -> String {
        match (self.eps, self.p) {
            (Some(e), Some(p)) => format!("{}(eps={e},p={p})", self.id),
            _ => self.id.to_string(),
        }
    }
}

impl fmt::Display for EstimateCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Squared norms gathered in one pass over the support. All use the volume
/// `(1/2)|g| dx^4` except `w1_sq`, which is the `gamma^4`-weighted Euclidean
/// quadrature of the frame coefficients and their first partials.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EstimateTerms {
    pub lbar_sq: f64,
    pub l_sq: f64,
    pub dbar_sq: f64,
    pub dstar_sq: f64,
    /// `||gamma^{-2} f||^2`
    pub xi2_sq: f64,
    /// `||gamma^{-1} f||^2`
    pub xi1_sq: f64,
    pub gamma_dbar_sq: f64,
    pub gamma_dstar_sq: f64,
    pub w1_sq: f64,
}

impl EstimateTerms {
    /// `(LHS, RHS)` for E1 to E3.
    pub fn sides(&self, id: EstimateId) -> Option<(f64, f64)> {
        let rhs1 = self.dbar_sq + self.dstar_sq + self.xi2_sq;
        match id {
            EstimateId::E1 => Some((self.lbar_sq, rhs1)),
            EstimateId::E2 => Some((self.l_sq + self.lbar_sq, rhs1)),
            EstimateId::E3 => Some((self.w1_sq, self.gamma_dbar_sq + self.gamma_dstar_sq + self.xi1_sq)),
            EstimateId::E4 => None,
        }
    }
}

pub fn estimate_terms(f: &OneForm) -> Result<EstimateTerms> {
    check_interior_support(f)?;
    let fr = f.as_frame();
    let co = f.as_coordinate();
    let (grid, f1, f2) = fr.raw();
    let (_, c1, c2) = co.raw();
    let support = fr.support().map(|b| b.grown(2.0 * grid.h()));
    let mut t = EstimateTerms::default();
    grid.for_each_in(support, |idx, ijkl| {
        if !grid.in_mask(idx) {
            return;
        }
        let g1 = gradient(f1, grid, idx, ijkl);
        let g2 = gradient(f2, grid, idx, ijkl);
        let z1 = f1[idx];
        let z2 = f2[idx];
        let fsq = z1.norm_sqr() + z2.norm_sqr();
        let dsq: f64 = g1.iter().chain(&g2).map(|z| z.norm_sqr()).sum();
        if fsq == 0.0 && dsq == 0.0 {
            return;
        }
        let p = grid.point_at(ijkl);
        let fc = FrameCoeffs::at(p);
        let vol = 0.5 * fc.det;
        let gamma2 = p.gamma().powi(2);

        let d1 = wirtinger_from_gradient(g1);
        let d2 = wirtinger_from_gradient(g2);
        let mut lbar = 0.0;
        let mut l = 0.0;
        for d in [&d1, &d2] {
            for j in 0..2 {
                lbar += FrameField::antiholomorphic(j).apply(&fc, d).norm_sqr();
                l += FrameField::holomorphic(j).apply(&fc, d).norm_sqr();
            }
        }
        let e1 = wirtinger_from_gradient(gradient(c1, grid, idx, ijkl));
        let e2 = wirtinger_from_gradient(gradient(c2, grid, idx, ijkl));
        // frame coefficient of dbar f is F / sqrt|g|
        let bar = 0.5 * dbar_point(&e1, &e2).norm_sqr();
        let star = dstar_point(p, fc.det, &e1, &e2).norm_sqr() * vol;

        t.lbar_sq += lbar * vol;
        t.l_sq += l * vol;
        t.dbar_sq += bar;
        t.dstar_sq += star;
        t.gamma_dbar_sq += gamma2 * bar;
        t.gamma_dstar_sq += gamma2 * star;
        t.xi2_sq += fsq * vol / (gamma2 * gamma2);
        t.xi1_sq += fsq * vol / gamma2;
        t.w1_sq += (fsq + dsq) * gamma2 * gamma2;
    });
    let dv = grid.cell_volume();
    for x in [
        &mut t.lbar_sq,
        &mut t.l_sq,
        &mut t.dbar_sq,
        &mut t.dstar_sq,
        &mut t.xi2_sq,
        &mut t.xi1_sq,
        &mut t.gamma_dbar_sq,
        &mut t.gamma_dstar_sq,
        &mut t.w1_sq,
    ] {
        *x *= dv;
    }
    Ok(t)
}

/// `(LHS, RHS)` for every case in `cases`, sharing the pass over the
/// support and the fractional-norm transforms.
pub fn evaluate_cases(cases: &[EstimateCase], f: &OneForm, pad_factor: f64) -> Result<Vec<(f64, f64)>> {
    for c in cases {
        c.validate()?;
    }
    let terms = estimate_terms(f)?;
    let mut eps_list: Vec<f64> = cases.iter().filter_map(|c| c.eps).collect();
    eps_list.sort_by(f64::total_cmp);
    eps_list.dedup();
    let w_eps = if eps_list.is_empty() {
        Vec::new()
    } else {
        sobolev_fractional_norms(f, &eps_list, true, pad_factor, Coefficients::Frame)?
    };
    cases
        .iter()
        .map(|c| match (c.id, c.eps, c.p) {
            (EstimateId::E4, Some(eps), Some(p)) => {
                let lhs = w_eps
                    .iter()
                    .find(|v| v.parameters.eps == Some(eps))
                    .map(|v| v.value)
                    .expect("every order was evaluated");
                let rhs = terms.dbar_sq.sqrt() + terms.dstar_sq.sqrt() + lp_norm(f, p)?.value;
                Ok((lhs, rhs))
            }
            (id, _, _) => Ok(terms.sides(id).expect("E1 to E3 have closed sides")),
        })
        .collect()
}

pub fn evaluate_estimate(case: &EstimateCase, f: &OneForm) -> Result<(f64, f64)> {
    Ok(evaluate_cases(std::slice::from_ref(case), f, crate::norms::DEFAULT_PAD_FACTOR)?[0])
}

/// Grid on which the sweep samples `spec` at resolution `n`.
///
/// E1 to E3 use a window hugging the support with four empty cells per
/// face. E4 widens it so the fractional norm needs no further padding.
pub fn estimate_grid(spec: &TestFormSpec, n: usize, id: EstimateId, pad_factor: f64) -> Result<Grid> {
    let r = spec.support_radius;
    let half = match id {
        EstimateId::E4 => 1.05 * pad_factor * r,
        _ => {
            if n <= 16 {
                return Err(Error::InvalidInput(format!("sweep resolution must exceed 16, got {n}")));
            }
            r / (1.0 - 8.0 / n as f64)
        }
    };
    Grid::window(n, spec.center, half)
}
