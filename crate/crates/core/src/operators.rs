//! The `dbar` complex on the cone in the `(v, w)` chart: `dbar` on functions
//! and `(0,1)`-forms, the formal adjoint from the divergence formula, the
//! frame vector fields, commutators and the frame decomposition residuals.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::stencil::wirtinger_at;
use crate::fields::{zeroed, Ball, Grid, OneForm, Representation, ScalarField};
use crate::geometry::{adjugate, det_g, FrameCoeffs, Point};
use crate::tolerances::EXPANSION_CUTOFF;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

// slots of `wirtinger_at`
const DV: usize = 0;
const DVB: usize = 1;
const DW: usize = 2;
const DWB: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameField {
    L1,
    L2,
    Lbar1,
    Lbar2,
}

impl FrameField {
    pub const ALL: [FrameField; 4] = [FrameField::L1, FrameField::L2, FrameField::Lbar1, FrameField::Lbar2];

    pub fn holomorphic(i: usize) -> Self {
        [FrameField::L1, FrameField::L2][i]
    }

    pub fn antiholomorphic(i: usize) -> Self {
        [FrameField::Lbar1, FrameField::Lbar2][i]
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameField::L1 => "L1",
            FrameField::L2 => "L2",
            FrameField::Lbar1 => "Lbar1",
            FrameField::Lbar2 => "Lbar2",
        }
    }

    #[inline]
    pub(crate) fn apply(self, fc: &FrameCoeffs, d: &[C64; 4]) -> C64 {
        match self {
            FrameField::L1 => fc.apply_l(0, d[DV], d[DW]),
            FrameField::L2 => fc.apply_l(1, d[DV], d[DW]),
            FrameField::Lbar1 => fc.apply_lbar(0, d[DVB], d[DWB]),
            FrameField::Lbar2 => fc.apply_lbar(1, d[DVB], d[DWB]),
        }
    }
}

/// Leading term of an operator and, for decomposition checks, what is left
/// after subtracting it.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorOutput<T> {
    pub principal: T,
    pub residual: Option<T>,
}

/// `dbar` of the `dvbar ^ dwbar` coefficient: `d c2/dvbar - d c1/dwbar`.
#[inline]
pub(crate) fn dbar_point(dc1: &[C64; 4], dc2: &[C64; 4]) -> C64 {
    dc2[DVB] - dc1[DWB]
}

/// Formal adjoint from coordinate data at `p`:
/// `-(1/|g|) sum_{k,l} A_kl d c_l / dz_k` with `A = |g| g^{-1}`, whose rows
/// are divergence free so the product rule leaves only these terms.
#[inline]
pub(crate) fn dstar_point(p: Point, det: f64, dc1: &[C64; 4], dc2: &[C64; 4]) -> C64 {
    let a = adjugate(p);
    -(a[0][0] * dc1[DV] + a[0][1] * dc2[DV] + a[1][0] * dc1[DW] + a[1][1] * dc2[DW]) / det
}

fn assert_same_grid(a: &Grid, b: &Grid) {
    assert_eq!(a, b, "fields live on different grids");
}

pub fn dbar_function(u: &ScalarField) -> OneForm {
    let grid = u.grid();
    let support = u.support().map(|b| b.grown(2.0 * grid.h()));
    let mut a = zeroed(grid.len());
    let mut b = zeroed(grid.len());
    grid.for_each_in(support, |idx, ijkl| {
        if grid.in_mask(idx) {
            let d = wirtinger_at(u.values(), grid, idx, ijkl);
            a[idx] = d[DVB];
            b[idx] = d[DWB];
        }
    });
    OneForm::from_raw(grid, Representation::Coordinate, a, b, support)
}

/// The `dvbar ^ dwbar` coefficient of `dbar f`.
pub fn dbar_oneform(f: &OneForm) -> ScalarField {
    let co = f.as_coordinate();
    let (grid, c1, c2) = co.raw();
    let support = co.support().map(|b| b.grown(2.0 * grid.h()));
    let mut out = zeroed(grid.len());
    grid.for_each_in(support, |idx, ijkl| {
        if grid.in_mask(idx) {
            let d1 = wirtinger_at(c1, grid, idx, ijkl);
            let d2 = wirtinger_at(c2, grid, idx, ijkl);
            out[idx] = dbar_point(&d1, &d2);
        }
    });
    ScalarField::from_values(grid, out, support)
}

/// Coefficient against `conj(omega_1) ^ conj(omega_2) = sqrt|g| dvbar ^ dwbar`.
pub fn two_form_to_frame(coeff: &ScalarField) -> ScalarField {
    coeff.multiply_by(|p| C64::new(1.0 / det_g(p).sqrt(), 0.0))
}

/// Fails unless every nonzero sample sits at least two cells inside the box
/// and the mask along each axis.
pub fn check_interior_support(f: &OneForm) -> Result<()> {
    let (grid, c1, c2) = f.raw();
    let mut bad = None;
    grid.for_each_in(f.support(), |idx, ijkl| {
        if bad.is_none() && (c1[idx] != ZERO || c2[idx] != ZERO) && !grid.is_deep_interior(ijkl, 2) {
            bad = Some(grid.point_at(ijkl));
        }
    });
    match bad {
        None => Ok(()),
        Some(p) => Err(Error::SupportViolation(format!(
            "form is nonzero at {:?}, within two cells of the grid or mask edge",
            p.to_real()
        ))),
    }
}

pub fn dbar_star(f: &OneForm) -> Result<ScalarField> {
    check_interior_support(f)?;
    let co = f.as_coordinate();
    let (grid, c1, c2) = co.raw();
    let support = co.support().map(|b| b.grown(2.0 * grid.h()));
    let mut out = zeroed(grid.len());
    grid.for_each_in(support, |idx, ijkl| {
        if grid.in_mask(idx) {
            let d1 = wirtinger_at(c1, grid, idx, ijkl);
            let d2 = wirtinger_at(c2, grid, idx, ijkl);
            let p = grid.point_at(ijkl);
            out[idx] = dstar_point(p, det_g(p), &d1, &d2);
        }
    });
    Ok(ScalarField::from_values(grid, out, support))
}

pub fn apply_frame_field(u: &ScalarField, which: FrameField) -> ScalarField {
    let grid = u.grid();
    let support = u.support().map(|b| b.grown(2.0 * grid.h()));
    let mut out = zeroed(grid.len());
    grid.for_each_in(support, |idx, ijkl| {
        if grid.in_mask(idx) {
            let d = wirtinger_at(u.values(), grid, idx, ijkl);
            let fc = FrameCoeffs::at(grid.point_at(ijkl));
            out[idx] = which.apply(&fc, &d);
        }
    });
    ScalarField::from_values(grid, out, support)
}

/// `L_j (Lbar_k u) - Lbar_k (L_j u)`.
pub fn commutator_principal(j: usize, k: usize, u: &ScalarField) -> ScalarField {
    let lj = FrameField::holomorphic(j);
    let lk = FrameField::antiholomorphic(k);
    let a = apply_frame_field(&apply_frame_field(u, lk), lj);
    let b = apply_frame_field(&apply_frame_field(u, lj), lk);
    a.sub(&b)
}

/// Pointwise expansion of `[L_j, Lbar_k]` against `L1, L2, Lbar1, Lbar2`.
#[derive(Debug, Clone)]
pub struct CommutatorOutput {
    /// The commutator applied to each probe.
    pub principal: Vec<ScalarField>,
    /// Coefficient fields of `L1, L2, Lbar1, Lbar2`.
    pub coefficients: [ScalarField; 4],
    /// Points with a fit: at least two cells inside the box and the mask.
    pub evaluated: usize,
    /// Points left out because every first-order probe value was negligible.
    pub skipped: usize,
    fitted: Vec<bool>,
}

impl CommutatorOutput {
    /// `(point, coefficient)` samples at evaluated points, for
    /// [`crate::geometry::verify_xi_order`].
    pub fn coefficient_samples(&self, which: usize) -> Vec<(Point, C64)> {
        let f = &self.coefficients[which];
        let grid = f.grid();
        let mut out = Vec::new();
        grid.for_each_in(None, |idx, ijkl| {
            if self.fitted[idx] {
                out.push((grid.point_at(ijkl), f.values()[idx]));
            }
        });
        out
    }
}

pub fn commutator(j: usize, k: usize, u: &ScalarField) -> Result<CommutatorOutput> {
    commutator_expansion(j, k, std::slice::from_ref(u))
}

/// Least-squares expansion shared across several probe functions. With a
/// single probe this is the minimum-norm fit.
pub fn commutator_expansion(j: usize, k: usize, probes: &[ScalarField]) -> Result<CommutatorOutput> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("commutator needs at least one probe".into()));
    }
    if j > 1 || k > 1 {
        return Err(Error::InvalidInput(format!("frame indices must be 0 or 1, got ({j}, {k})")));
    }
    let grid = probes[0].grid().clone();
    for p in probes {
        assert_same_grid(&grid, p.grid());
    }
    let principal: Vec<ScalarField> = probes.iter().map(|u| commutator_principal(j, k, u)).collect();
    let first: Vec<[ScalarField; 4]> = probes
        .iter()
        .map(|u| FrameField::ALL.map(|w| apply_frame_field(u, w)))
        .collect();
    let scale = first
        .iter()
        .flat_map(|fs| fs.iter().map(|f| f.max_abs()))
        .fold(0.0, f64::max);

    let mut coeff = [(); 4].map(|_| zeroed(grid.len()));
    let mut fitted = vec![false; grid.len()];
    let mut evaluated = 0;
    let mut skipped = 0;
    grid.for_each_in(None, |idx, ijkl| {
        if !grid.is_deep_interior(ijkl, 2) {
            return;
        }
        let rows: Vec<Vector4<C64>> = first
            .iter()
            .map(|fs| Vector4::new(fs[0].values()[idx], fs[1].values()[idx], fs[2].values()[idx], fs[3].values()[idx]))
            .collect();
        let biggest = rows.iter().flat_map(|r| r.iter().map(|z| z.norm())).fold(0.0, f64::max);
        if !(biggest > 1e-12 * scale) {
            skipped += 1;
            return;
        }
        let mut normal = Matrix4::<C64>::zeros();
        let mut rhs = Vector4::<C64>::zeros();
        for (r, c) in rows.iter().zip(&principal) {
            let rc = r.map(|z| z.conj());
            normal += rc * r.transpose();
            rhs += rc * c.values()[idx];
        }
        let x = pseudo_solve(&normal, &rhs);
        for t in 0..4 {
            coeff[t][idx] = x[t];
        }
        fitted[idx] = true;
        evaluated += 1;
    });
    let coefficients = coeff.map(|v| ScalarField::from_values(&grid, v, None));
    Ok(CommutatorOutput {
        principal,
        coefficients,
        evaluated,
        skipped,
        fitted,
    })
}

/// `N^+ b` for Hermitian positive semidefinite `N`, dropping eigenvalues
/// below [`EXPANSION_CUTOFF`] times the largest.
fn pseudo_solve(normal: &Matrix4<C64>, rhs: &Vector4<C64>) -> Vector4<C64> {
    let eig = normal.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut x = Vector4::<C64>::zeros();
    for (t, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > EXPANSION_CUTOFF * top {
            let q = eig.eigenvectors.column(t);
            let proj = q.dotc(rhs);
            x += q * (proj / lambda);
        }
    }
    x
}

/// Principal parts and residuals of `dbar f` (frame `(0,2)` coefficient) and
/// `dbar^* f` in the frame.
#[derive(Debug, Clone)]
pub struct FrameDecomposition {
    /// Principal `Lbar1 f2 - Lbar2 f1`.
    pub bar: OperatorOutput<ScalarField>,
    /// Principal `-(L1 f1 + L2 f2)`.
    pub star: OperatorOutput<ScalarField>,
    /// The frame form the decomposition was taken of.
    pub form: OneForm,
}

impl FrameDecomposition {
    /// Samples `(p, residual / max(|f1|, |f2|))` at points where the
    /// form is at least `floor` times its maximum and the stencils are
    /// centered.
    pub fn scaled_residuals(&self, floor: f64) -> (Vec<(Point, C64)>, Vec<(Point, C64)>) {
        let (grid, f1, f2) = self.form.raw();
        let top = self.form.max_abs();
        let mut bar = Vec::new();
        let mut star = Vec::new();
        let rb = self.bar.residual.as_ref().expect("decomposition carries residuals");
        let rs = self.star.residual.as_ref().expect("decomposition carries residuals");
        grid.for_each_in(self.form.support(), |idx, ijkl| {
            let size = f1[idx].norm().max(f2[idx].norm());
            if size < floor * top || size == 0.0 || !grid.is_deep_interior(ijkl, 2) {
                return;
            }
            let p = grid.point_at(ijkl);
            // the samples feed verify_xi_order with k = -2
            bar.push((p, rb.values()[idx] / size));
            star.push((p, rs.values()[idx] / size));
        });
        (bar, star)
    }
}

pub fn frame_decomposition_residual(f: &OneForm) -> Result<FrameDecomposition> {
    check_interior_support(f)?;
    let fr = f.as_frame();
    let co = f.as_coordinate();
    let (grid, f1, f2) = fr.raw();
    let (_, c1, c2) = co.raw();
    let support: Option<Ball> = fr.support().map(|b| b.grown(2.0 * grid.h()));
    let len = grid.len();
    let mut bar_p = zeroed(len);
    let mut bar_r = zeroed(len);
    let mut star_p = zeroed(len);
    let mut star_r = zeroed(len);
    grid.for_each_in(support, |idx, ijkl| {
        if !grid.in_mask(idx) {
            return;
        }
        let p = grid.point_at(ijkl);
        let fc = FrameCoeffs::at(p);
        let df1 = wirtinger_at(f1, grid, idx, ijkl);
        let df2 = wirtinger_at(f2, grid, idx, ijkl);
        let dc1 = wirtinger_at(c1, grid, idx, ijkl);
        let dc2 = wirtinger_at(c2, grid, idx, ijkl);

        let bar_full = dbar_point(&dc1, &dc2) / fc.det.sqrt();
        let bp = FrameField::Lbar1.apply(&fc, &df2) - FrameField::Lbar2.apply(&fc, &df1);
        bar_p[idx] = bp;
        bar_r[idx] = bar_full - bp;

        let star_full = dstar_point(p, fc.det, &dc1, &dc2);
        let sp = -(FrameField::L1.apply(&fc, &df1) + FrameField::L2.apply(&fc, &df2));
        star_p[idx] = sp;
        star_r[idx] = star_full - sp;
    });
    let field = |v| ScalarField::from_values(grid, v, support);
    Ok(FrameDecomposition {
        bar: OperatorOutput {
            principal: field(bar_p),
            residual: Some(field(bar_r)),
        },
        star: OperatorOutput {
            principal: field(star_p),
            residual: Some(field(star_r)),
        },
        form: fr.into_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, TestFormSpec, make_test_form};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn window() -> Grid {
        Grid::window(12, Point::ORIGIN, 0.6).unwrap()
    }

    #[test]
    fn dbar_function_examples() {
        let g = window();
        let hol = dbar_function(&ScalarField::from_fn(&g, |p| p.v));
        assert!(hol.max_abs() < 1e-13);
        let vb = dbar_function(&ScalarField::from_fn(&g, |p| p.v.conj()));
        assert!(vb.component_values(0).iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-13));
        assert!(vb.component_values(1).iter().all(|z| z.norm() < 1e-13));
        let ww = dbar_function(&ScalarField::from_fn(&g, |p| p.w * p.w.conj()));
        g.for_each_in(None, |idx, ijkl| {
            if g.is_deep_interior(ijkl, 1) {
                assert!(ww.component_values(0)[idx].norm() < 1e-13);
                assert!((ww.component_values(1)[idx] - g.point_at(ijkl).w).norm() < 1e-12);
            }
        });
    }

    #[test]
    fn dbar_oneform_example() {
        let g = window();
        let f = OneForm::from_fn(&g, Representation::Coordinate, None, |p| (ZERO, p.v.conj()));
        let d = dbar_oneform(&f);
        assert!(d.values().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-13));
    }

    #[test]
    fn zero_form_gives_zero() {
        let g = window();
        let z = OneForm::zeros(&g, Representation::Frame);
        assert_eq!(dbar_star(&z).unwrap().max_abs(), 0.0);
        let dec = frame_decomposition_residual(&z).unwrap();
        assert_eq!(dec.bar.principal.max_abs(), 0.0);
        assert_eq!(dec.star.residual.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn support_violation_at_box_edge() {
        let g = window();
        let f = OneForm::from_fn(&g, Representation::Coordinate, None, |p| (p.v, ZERO));
        assert!(matches!(dbar_star(&f), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn frame_field_on_axis() {
        // at (1, 0) the frame is diag(2, 1): L1 = (1/2) d/dv
        let fc = FrameCoeffs::at(Point::new(c(1.0, 0.0), ZERO));
        let d = [c(3.0, 1.0), c(-2.0, 0.5), c(7.0, 0.0), c(0.0, 4.0)];
        assert!((FrameField::L1.apply(&fc, &d) - d[DV] * 0.5).norm() < 1e-15);
        assert!((FrameField::L2.apply(&fc, &d) - d[DW]).norm() < 1e-15);
    }

    #[test]
    fn antiholomorphic_fields_kill_holomorphic() {
        let g = window();
        let u = ScalarField::from_fn(&g, |p| p.v * p.w + p.w * p.w * 2.0);
        for w in [FrameField::Lbar1, FrameField::Lbar2] {
            let out = apply_frame_field(&u, w);
            assert!(out.max_abs() < 1e-10, "{}", out.max_abs());
        }
    }

    #[test]
    fn commutator_of_constant_vanishes() {
        let g = window();
        let u = ScalarField::from_fn(&g, |_| c(2.0, 0.0));
        assert_eq!(commutator_principal(0, 1, &u).max_abs(), 0.0);
    }

    #[test]
    fn commutator_antisymmetry_for_real_u() {
        let g = window();
        let u = ScalarField::from_fn(&g, |p| c(p.v.re * p.w.im + p.v.norm_sqr(), 0.0));
        let a = commutator_principal(0, 1, &u);
        let b = commutator_principal(1, 0, &u);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x.conj() + y).norm() <= 1e-9 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn decomposition_adds_up() {
        let g = Grid::window(16, Point::ORIGIN, 0.6).unwrap();
        let f = make_test_form(&TestFormSpec::centered(0.45, 1, 2, 3), &g).unwrap();
        let dec = frame_decomposition_residual(&f).unwrap();
        let full_bar = two_form_to_frame(&dbar_oneform(&f));
        let full_star = dbar_star(&f).unwrap();
        let sum_bar = dec.bar.principal.add(dec.bar.residual.as_ref().unwrap());
        let sum_star = dec.star.principal.add(dec.star.residual.as_ref().unwrap());
        for idx in 0..g.len() {
            assert!((sum_bar.values()[idx] - full_bar.values()[idx]).norm() <= 1e-12 * (1.0 + full_bar.values()[idx].norm()));
            assert!((sum_star.values()[idx] - full_star.values()[idx]).norm() <= 1e-12 * (1.0 + full_star.values()[idx].norm()));
        }
    }
}
