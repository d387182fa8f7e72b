//! Verification checks behind the `check-*` subcommands and the acceptance
//! suite.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::estimate::{estimate_grid, EstimateId};
use crate::error::Result;
use crate::fields::{make_test_form, Ball, Grid, OneForm, ScalarField, TestForm, TestFormSpec};
use crate::geometry::{
    conj_transpose, covering_map, det_g, frame_growth_exponents, identity_defect, mat_mul, metric_at,
    random_point_in_shell, transpose, verify_xi_order, AnnulusScheme, FrameCoeffs, OrderReport, Point,
};
use crate::norms::{euclidean_h1_norm, sobolev_fractional_norm, sobolev_integer_norm, weighted_l2_norm};
use crate::operators::{
    commutator_expansion, dbar_function, dbar_oneform, dbar_star, frame_decomposition_residual,
};
use crate::tolerances::*;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryCheck {
    pub samples: usize,
    pub det_max_rel: f64,
    pub inverse_max_abs: f64,
    pub inverse_samples: usize,
    pub frame_max_abs: f64,
    pub gamma_cover_max_abs: f64,
    pub alpha_slope: f64,
    pub beta_slope: f64,
    pub grid_n: usize,
    pub grid_mask_points: usize,
    pub grid_mask_exact: bool,
    pub pass: bool,
}

/// Metric, inverse, frame and covering identities on `samples` seeded points
/// of `B`, frame growth exponents, and the mask of the `n`-point domain grid.
pub fn check_geometry(seed: u64, samples: usize, grid_n: usize) -> Result<GeometryCheck> {
    let mut r = rng(seed, 1);
    let mut det_max_rel: f64 = 0.0;
    let mut inverse_max_abs: f64 = 0.0;
    let mut inverse_samples = 0;
    let mut frame_max_abs: f64 = 0.0;
    let mut cover: f64 = 0.0;
    for _ in 0..samples {
        let p = loop {
            let p = random_point_in_shell(&mut r, 2f64.powi(-9), 1.0);
            if p.is_interior() {
                break p;
            }
        };
        let m = metric_at(p);
        det_max_rel = det_max_rel.max((m.det_g - m.direct_det()).abs() / m.det_g);
        if m.gamma > INVERSE_MIN_GAMMA {
            let ginv = m.inverse()?;
            inverse_max_abs = inverse_max_abs.max(identity_defect(&mat_mul(&m.g, &ginv)));
            inverse_samples += 1;
        }
        if m.gamma > FRAME_MIN_GAMMA {
            let fr = FrameCoeffs::at(p).frame();
            let ginv = m.inverse()?;
            let dual = identity_defect(&mat_mul(&fr.alpha, &transpose(&fr.beta)));
            let orth = identity_defect(&mat_mul(&mat_mul(&fr.alpha, &ginv), &conj_transpose(&fr.alpha)));
            frame_max_abs = frame_max_abs.max(dual).max(orth);
        }
        let (z1, z2, _) = covering_map(p);
        cover = cover.max((m.gamma * m.gamma - (z1.norm() + z2.norm())).abs());
    }
    let fit = frame_growth_exponents(&mut rng(seed, 2), AnnulusScheme { first: 1, last: 7 }, 500);

    let grid = Grid::domain(grid_n)?;
    let mut exact = true;
    grid.for_each_in(None, |idx, ijkl| {
        let p = grid.point_at(ijkl);
        exact &= grid.in_mask(idx) == p.is_interior() && p.gamma() > 0.0;
    });
    let grid_mask_points = grid.mask_count();

    let pass = det_max_rel <= DET_REL
        && inverse_max_abs <= INVERSE_ABS
        && frame_max_abs <= FRAME_ABS
        && cover <= GAMMA_COVER_ABS
        && (fit.alpha_slope - 1.0).abs() <= SLOPE_TOL
        && (fit.beta_slope + 1.0).abs() <= SLOPE_TOL
        && exact
        && grid_mask_points > 0;
    Ok(GeometryCheck {
        samples,
        det_max_rel,
        inverse_max_abs,
        inverse_samples,
        frame_max_abs,
        gamma_cover_max_abs: cover,
        alpha_slope: fit.alpha_slope,
        beta_slope: fit.beta_slope,
        grid_n,
        grid_mask_points,
        grid_mask_exact: exact,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbarSquaredCheck {
    pub functions: usize,
    pub points_checked: usize,
    pub nonzero_points: usize,
    pub max_abs: f64,
    /// `max |dbar dbar u| h^2 / max |u|` on smooth data.
    pub smooth_max_rel: f64,
    pub pass: bool,
}

/// Cubic polynomial in `v, vbar, w, wbar` with small integer coefficients.
fn integer_cubic(r: &mut ChaCha8Rng) -> impl Fn(Point) -> C64 {
    let mut terms = Vec::new();
    for a in 0..=3u32 {
        for b in 0..=3 - a {
            for c in 0..=3 - a - b {
                for d in 0..=3 - a - b - c {
                    let k = C64::new(r.gen_range(-3..=3) as f64, r.gen_range(-3..=3) as f64);
                    terms.push(([a, b, c, d], k));
                }
            }
        }
    }
    move |p: Point| {
        let base = [p.v, p.v.conj(), p.w, p.w.conj()];
        terms
            .iter()
            .map(|(e, k)| {
                let mut m = *k;
                for (z, &n) in base.iter().zip(e) {
                    for _ in 0..n {
                        m *= z;
                    }
                }
                m
            })
            .sum()
    }
}

fn dbar_dbar(u: &ScalarField) -> ScalarField {
    dbar_oneform(&dbar_function(u))
}

/// `dbar dbar u = 0` bitwise for `count` seeded integer cubics on a dyadic
/// grid, where every sample and difference is exact, plus a rounding-level
/// check on smooth data.
pub fn check_dbar_squared(seed: u64, count: usize) -> Result<DbarSquaredCheck> {
    let grid = Grid::window(16, Point::ORIGIN, 0.5)?;
    let mut r = rng(seed, 3);
    let mut points = 0;
    let mut nonzero = 0;
    let mut max_abs: f64 = 0.0;
    for _ in 0..count {
        let poly = integer_cubic(&mut r);
        let dd = dbar_dbar(&ScalarField::from_fn(&grid, poly));
        grid.for_each_in(None, |idx, ijkl| {
            if grid.is_deep_interior(ijkl, 2) {
                points += 1;
                let z = dd.values()[idx];
                if z != C64::new(0.0, 0.0) {
                    nonzero += 1;
                    max_abs = max_abs.max(z.norm());
                }
            }
        });
    }

    let smooth = Grid::window(16, Point::from_real([0.11, -0.07, 0.05, 0.13]), 0.3)?;
    let u = ScalarField::from_fn(&smooth, |p| {
        let [a, b, c, d] = p.to_real();
        C64::new((a + 2.0 * c).sin() * (b * d).cos(), (a * b - d).exp())
    });
    let dd = dbar_dbar(&u);
    let mut smooth_max: f64 = 0.0;
    smooth.for_each_in(None, |idx, ijkl| {
        if smooth.is_deep_interior(ijkl, 2) {
            smooth_max = smooth_max.max(dd.values()[idx].norm());
        }
    });
    let smooth_max_rel = smooth_max * smooth.h().powi(2) / u.max_abs();
    Ok(DbarSquaredCheck {
        functions: count,
        points_checked: points,
        nonzero_points: nonzero,
        max_abs,
        smooth_max_rel,
        pass: nonzero == 0 && points > 0 && smooth_max_rel <= DBAR_SQUARED_SMOOTH,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointPair {
    pub u_seed: u64,
    pub f_seed: u64,
    /// `|<dbar u, f> - <u, dbar^* f>| / (||dbar u|| ||f||)` per resolution.
    pub relative: Vec<f64>,
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointCheck {
    pub resolutions: Vec<usize>,
    pub pairs: Vec<AdjointPair>,
    pub min_order: f64,
    pub pass: bool,
}

/// Discrete `(<dbar u, f>, <u, dbar^* f>)` in `L^2(X)`, frame pairing.
pub fn adjoint_pairing(u: &ScalarField, f: &OneForm) -> Result<(C64, C64, f64)> {
    let du = dbar_function(u);
    let du_frame = du.as_frame();
    let fr = f.as_frame();
    let star = dbar_star(f)?;
    let grid = u.grid();
    let support = match (du.support(), star.support()) {
        (Some(a), Some(b)) => Some(Ball::union(a, b)),
        _ => None,
    };
    let mut left = C64::new(0.0, 0.0);
    let mut right = C64::new(0.0, 0.0);
    grid.for_each_in(support, |idx, ijkl| {
        if !grid.in_mask(idx) {
            return;
        }
        let w = 0.5 * det_g(grid.point_at(ijkl));
        left += (du_frame.component_values(0)[idx] * fr.component_values(0)[idx].conj()
            + du_frame.component_values(1)[idx] * fr.component_values(1)[idx].conj())
            * w;
        right += u.values()[idx] * star.values()[idx].conj() * w;
    });
    let dv = grid.cell_volume();
    let scale = weighted_l2_norm(&du, 0.0).value * weighted_l2_norm(f, 0.0).value;
    Ok((left * dv, right * dv, scale))
}

/// Adjoint pairing residual on `count` seeded `(u, f)` pairs, supported in
/// the ball of radius 1/2 about the origin, at each resolution of a fixed
/// window.
pub fn check_adjoint(seed: u64, count: usize, resolutions: &[usize]) -> Result<AdjointCheck> {
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let u_seed = seed.wrapping_add(2 * i);
        let f_seed = seed.wrapping_add(2 * i + 1);
        let tu = TestForm::new(TestFormSpec::centered(0.5, 0, 2, u_seed))?;
        let fspec = TestFormSpec::centered(0.5, 1, 2, f_seed);
        let mut relative = Vec::with_capacity(resolutions.len());
        for &n in resolutions {
            let grid = Grid::window(n, Point::ORIGIN, 0.75)?;
            let u = ScalarField::from_fn_in(&grid, tu.spec().ball(), |p| tu.eval_at(p).0);
            let f = make_test_form(&fspec, &grid)?;
            let (l, r, scale) = adjoint_pairing(&u, &f)?;
            relative.push((l - r).norm() / scale);
        }
        let order = match (relative.first(), relative.last(), resolutions.first(), resolutions.last()) {
            (Some(a), Some(b), Some(&n0), Some(&n1)) if n1 != n0 => (a / b).ln() / (n1 as f64 / n0 as f64).ln(),
            _ => f64::NAN,
        };
        pairs.push(AdjointPair {
            u_seed,
            f_seed,
            relative,
            order,
        });
    }
    let min_order = pairs.iter().map(|p| p.order).fold(f64::INFINITY, f64::min);
    Ok(AdjointCheck {
        resolutions: resolutions.to_vec(),
        pass: !pairs.is_empty() && min_order >= ADJOINT_MIN_ORDER,
        pairs,
        min_order,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureCheck {
    pub n: usize,
    pub bar: OrderReport,
    pub star: OrderReport,
    pub comm: OrderReport,
    pub bar_spread: f64,
    pub star_spread: f64,
    pub comm_spread: f64,
    pub pass: bool,
}

/// Fraction of the form's maximum below which residual samples are dropped.
const RESIDUAL_FLOOR: f64 = 1e-2;

/// Lower-order terms of the frame expressions for `dbar`, `dbar^*` and the
/// commutators `[L_j, Lbar_k]`, scaled by `gamma^2`, on one window per dyadic
/// annulus.
pub fn check_structure(seed: u64, n: usize) -> Result<StructureCheck> {
    let scheme = AnnulusScheme::default();
    let mut bar = Vec::new();
    let mut star = Vec::new();
    let mut comm = Vec::new();
    for j in scheme.first..=scheme.last {
        let (lo, hi) = AnnulusScheme::bounds(j);
        let inside = |p: &Point| (lo..hi).contains(&p.gamma());
        let rho = 1.2 * hi;
        let spec = TestFormSpec::centered(rho, 1, 2, seed.wrapping_add(j as u64));
        let grid = estimate_grid(&spec, n, EstimateId::E1, 2.0)?;
        let f = make_test_form(&spec, &grid)?;
        let dec = frame_decomposition_residual(&f)?;
        let (b, s) = dec.scaled_residuals(RESIDUAL_FLOOR);
        bar.extend(b.into_iter().filter(|x| inside(&x.0)));
        star.extend(s.into_iter().filter(|x| inside(&x.0)));
        drop(dec);

        let probes: Vec<ScalarField> = [
            |p: Point| p.v,
            |p: Point| p.v.conj(),
            |p: Point| p.w,
            |p: Point| p.w.conj(),
        ]
        .iter()
        .map(|g| ScalarField::from_fn(&grid, g))
        .collect();
        for a in 0..2 {
            for k in 0..2 {
                let out = commutator_expansion(a, k, &probes)?;
                for which in 0..4 {
                    comm.extend(out.coefficient_samples(which).into_iter().filter(|x| inside(&x.0)));
                }
            }
        }
    }
    let bar = verify_xi_order(&bar, -2)?;
    let star = verify_xi_order(&star, -2)?;
    let comm = verify_xi_order(&comm, -2)?;
    let ok = |r: &OrderReport| r.populated_count() >= MIN_ANNULI && r.spread() <= ANNULUS_SPREAD;
    Ok(StructureCheck {
        n,
        pass: ok(&bar) && ok(&star) && ok(&comm),
        bar_spread: bar.spread(),
        star_spread: star.spread(),
        comm_spread: comm.spread(),
        bar,
        star,
        comm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalCheck {
    /// Order zero against the weighted `L^2` quadrature.
    pub identity_rel: f64,
    /// Unweighted order one against the finite-difference `H^1` norm, worst
    /// over the seeded fields.
    pub h1_rel: f64,
    /// Gaussian at order 1/2 against its Fourier-side integral.
    pub gaussian_rel: f64,
    pub gaussian_numeric: f64,
    pub gaussian_closed: f64,
    pub pass: bool,
}

/// `int_0^inf (1 + rho^2)^eps exp(-s^2 rho^2) rho^3 d rho` by composite
/// Simpson.
pub fn gaussian_radial_integral(s: f64, eps: f64) -> f64 {
    let top = 12.0 / s;
    let steps = 20_000;
    let dr = top / steps as f64;
    let f = |r: f64| (1.0 + r * r).powf(eps) * (-(s * r).powi(2)).exp() * r.powi(3);
    let mut acc = f(0.0) + f(top);
    for i in 1..steps {
        acc += f(i as f64 * dr) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * dr / 3.0
}

/// `exp(-|x|^2 / (2 s^2))` has `int |Lambda^eps f|^2 = 2 pi^2 s^8 J(s, eps)`.
pub fn gaussian_fractional_sq(s: f64, eps: f64) -> f64 {
    2.0 * std::f64::consts::PI.powi(2) * s.powi(8) * gaussian_radial_integral(s, eps)
}

/// Smooth compactly supported field: a squared bump times a few seeded
/// low-frequency plane waves.
fn smooth_bump_field(grid: &Grid, radius: f64, r: &mut ChaCha8Rng) -> ScalarField {
    let waves: Vec<([f64; 4], C64)> = (0..3)
        .map(|_| {
            let k = std::array::from_fn(|_| r.gen_range(-1.0..=1.0) / radius);
            (k, C64::new(r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0)))
        })
        .collect();
    let c = grid.center();
    ScalarField::from_fn_in(grid, Ball { center: c, radius }, |p| {
        let x = p.to_real();
        let s2 = (0..4).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>() / (radius * radius);
        if s2 >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        let bump = (2.0 - 2.0 / (1.0 - s2)).exp();
        waves
            .iter()
            .map(|(k, a)| a * C64::from_polar(bump, (0..4).map(|i| k[i] * x[i]).sum::<f64>()))
            .sum()
    })
}

pub fn check_fractional(seed: u64) -> Result<FractionalCheck> {
    let spec = TestFormSpec::centered(0.3, 1, 2, seed);
    let grid = estimate_grid(&spec, 24, EstimateId::E4, 2.0)?;
    let f = make_test_form(&spec, &grid)?;
    let w0 = sobolev_fractional_norm(&f, 0.0, true)?.value;
    let l2 = sobolev_integer_norm(&f, 0, 0.0)?.value;
    let identity_rel = (w0 - l2).abs() / l2;

    let grid = Grid::window(40, Point::ORIGIN, 1.0)?;
    let mut r = rng(seed, 4);
    let mut h1_rel: f64 = 0.0;
    for _ in 0..3 {
        let u = smooth_bump_field(&grid, 15.5 * grid.h(), &mut r);
        let spectral = sobolev_fractional_norm(&u, 1.0, false)?.value;
        let fd = euclidean_h1_norm(&u);
        h1_rel = h1_rel.max((spectral - fd).abs() / fd);
    }

    let grid = Grid::window(32, Point::ORIGIN, 1.0)?;
    let s = 1.5 * grid.h();
    let g = ScalarField::from_fn(&grid, |p| C64::new((-p.gamma().powi(2) / (2.0 * s * s)).exp(), 0.0));
    let numeric = sobolev_fractional_norm(&g, 0.5, false)?.value.powi(2);
    let closed = gaussian_fractional_sq(s, 0.5);
    let gaussian_rel = (numeric - closed).abs() / closed;

    Ok(FractionalCheck {
        identity_rel,
        h1_rel,
        gaussian_rel,
        gaussian_numeric: numeric,
        gaussian_closed: closed,
        pass: identity_rel <= FRACTIONAL_IDENTITY
            && h1_rel <= FRACTIONAL_H1_REL
            && gaussian_rel <= FRACTIONAL_GAUSSIAN_REL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_small() {
        let c = check_geometry(7, 500, 8).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn dbar_squared_vanishes_exactly() {
        let c = check_dbar_squared(1, 3).unwrap();
        assert_eq!(c.nonzero_points, 0);
        assert!(c.points_checked > 0);
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn gaussian_integral_at_zero_order() {
        // eps = 0 reduces to int |f|^2 = pi^2 s^4
        let s = 0.3;
        let v = gaussian_fractional_sq(s, 0.0);
        assert!((v - std::f64::consts::PI.powi(2) * s.powi(4)).abs() < 1e-10 * v);
    }

    #[test]
    fn fractional_validation() {
        let c = check_fractional(2).unwrap();
        assert!(c.pass, "{c:?}");
    }
}
