//! Independent oracles for operators, norms and estimate sides.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use conedbar::fields::{make_test_form, Ball, Grid, OneForm, Representation, ScalarField, TestFormSpec};
use conedbar::harness::checks::{gaussian_fractional_sq, gaussian_radial_integral};
use conedbar::harness::{estimate_grid, estimate_terms, evaluate_estimate, EstimateCase, EstimateId};
use conedbar::norms::{lp_norm, sobolev_fractional_norm, weighted_l2_norm};
use conedbar::operators::{dbar_function, dbar_star};
use conedbar::geometry::Point;
use conedbar::C64;

/// Value with its Wirtinger derivatives in `v` and `w`.
#[derive(Clone, Copy, Debug)]
struct Dual {
    f: C64,
    dv: C64,
    dw: C64,
}

impl Dual {
    fn constant(f: C64) -> Self {
        Self { f, dv: C64::new(0.0, 0.0), dw: C64::new(0.0, 0.0) }
    }

    fn real(x: f64) -> Self {
        Self::constant(C64::new(x, 0.0))
    }

    fn chain(self, g: C64, dg: C64) -> Self {
        Self { f: g, dv: dg * self.dv, dw: dg * self.dw }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { f: self.f + o.f, dv: self.dv + o.dv, dw: self.dw + o.dw }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        self + (-o)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { f: -self.f, dv: -self.dv, dw: -self.dw }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            f: self.f * o.f,
            dv: self.dv * o.f + self.f * o.dv,
            dw: self.dw * o.f + self.f * o.dw,
        }
    }
}

struct Vars {
    v: Dual,
    vb: Dual,
    w: Dual,
    wb: Dual,
}

fn vars(p: Point) -> Vars {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    Vars {
        v: Dual { f: p.v, dv: one, dw: zero },
        vb: Dual::constant(p.v.conj()),
        w: Dual { f: p.w, dv: zero, dw: one },
        wb: Dual::constant(p.w.conj()),
    }
}

const CENTER: [f64; 4] = [0.35, 0.1, -0.2, 0.25];
const RADIUS: f64 = 0.2;

/// `(1 - s)^4` with `s = |x - c|^2 / R^2`.
fn bump(x: &Vars) -> Dual {
    let c = Point::from_real(CENTER);
    let dv = x.v - Dual::constant(c.v);
    let dvb = x.vb - Dual::constant(c.v.conj());
    let dw = x.w - Dual::constant(c.w);
    let dwb = x.wb - Dual::constant(c.w.conj());
    let s = (dv * dvb + dw * dwb) * Dual::real(1.0 / (RADIUS * RADIUS));
    let sr = s.f.re;
    if sr >= 1.0 {
        return Dual::real(0.0);
    }
    s.chain(C64::new((1.0 - sr).powi(4), 0.0), C64::new(-4.0 * (1.0 - sr).powi(3), 0.0))
}

/// Coordinate coefficients of the test form.
fn coefficients(p: Point) -> (Dual, Dual) {
    let x = vars(p);
    let b = bump(&x);
    let p1 = x.vb * x.w + Dual::constant(C64::new(0.0, 0.5));
    let p2 = x.v * x.wb * x.wb - x.w;
    (b * p1, b * p2)
}

/// `dbar^*` in divergence form, `-(1/|g|) (d_v (A c)_1 + d_w (A c)_2)`, with
/// the adjugate written out here.
fn dstar_divergence(p: Point) -> C64 {
    let x = vars(p);
    let (c1, c2) = coefficients(p);
    let a11 = x.v * x.vb + Dual::real(4.0) * x.w * x.wb;
    let a12 = -(x.v * x.wb);
    let a21 = -(x.vb * x.w);
    let a22 = Dual::real(4.0) * x.v * x.vb + x.w * x.wb;
    let p1 = a11 * c1 + a12 * c2;
    let p2 = a21 * c1 + a22 * c2;
    let a = p.v.norm_sqr();
    let b = p.w.norm_sqr();
    let det = 16.0 * a * b + 4.0 * a * a + 4.0 * b * b;
    -(p1.dv + p2.dw) / det
}

fn dstar_error(n: usize) -> (f64, f64) {
    let center = Point::from_real(CENTER);
    let grid = Grid::window(n, center, 0.3).unwrap();
    let ball = Ball::new(center, RADIUS);
    let f = OneForm::from_fn(&grid, Representation::Coordinate, Some(ball), |p| {
        let (a, b) = coefficients(p);
        (a.f, b.f)
    });
    let out = dbar_star(&f).unwrap();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for idx in 0..grid.len() {
        let exact = dstar_divergence(grid.point(idx));
        err = err.max((out.values()[idx] - exact).norm());
        scale = scale.max(exact.norm());
    }
    (err, scale)
}

#[test]
fn dbar_star_matches_divergence_form() {
    let (e16, s) = dstar_error(16);
    let (e32, _) = dstar_error(32);
    assert!(s > 0.0);
    assert!(e32 / s < 5e-2, "relative error {}", e32 / s);
    assert!(e16 / e32 > 3.0, "errors {e16} -> {e32}");
}

/// Fourth-order central difference along real axis `a`.
fn d4(u: &ScalarField, ijkl: [usize; 4], a: usize) -> C64 {
    let g = u.grid();
    let at = |k: isize| {
        let mut q = ijkl;
        q[a] = (q[a] as isize + k) as usize;
        u.get(q)
    };
    (at(-2) - at(-1) * 8.0 + at(1) * 8.0 - at(2)) / (12.0 * g.h())
}

fn dbar_stencil_gap(n: usize) -> f64 {
    let center = Point::from_real(CENTER);
    let grid = Grid::window(n, center, 0.3).unwrap();
    let u = ScalarField::from_fn_in(&grid, Ball::new(center, RADIUS), |p| {
        let (a, b) = coefficients(p);
        a.f + b.f * C64::new(0.0, 1.0)
    });
    let du = dbar_function(&u).to_coordinate();
    let mut gap: f64 = 0.0;
    for idx in 0..grid.len() {
        let ijkl = grid.unravel(idx);
        if !grid.is_deep_interior(ijkl, 2) {
            continue;
        }
        let d: [C64; 4] = std::array::from_fn(|a| d4(&u, ijkl, a));
        let i = C64::new(0.0, 1.0);
        let vb = (d[0] + i * d[1]) * 0.5;
        let wb = (d[2] + i * d[3]) * 0.5;
        gap = gap.max((du.component_values(0)[idx] - vb).norm());
        gap = gap.max((du.component_values(1)[idx] - wb).norm());
    }
    gap
}

#[test]
fn dbar_agrees_with_fourth_order_stencil() {
    let g16 = dbar_stencil_gap(16);
    let g32 = dbar_stencil_gap(32);
    assert!(g32 > 0.0);
    assert!(g16 / g32 > 3.0, "gaps {g16} -> {g32}");
}

#[test]
fn volume_of_the_domain() {
    // int_B (1/2)|g| dx^4 in polar coordinates of (|v|^2, |w|^2)
    let exact = PI * PI * (4.0 + PI) / 4.0;
    let err = |n| {
        let grid = Grid::domain(n).unwrap();
        let one = ScalarField::from_fn(&grid, |_| C64::new(1.0, 0.0));
        (weighted_l2_norm(&one, 0.0).value.powi(2) - exact).abs() / exact
    };
    let (e24, e48) = (err(24), err(48));
    assert!(e48 < 0.02, "relative error {e48}");
    assert!(e48 < e24, "{e24} -> {e48}");
}

#[test]
fn gaussian_integral_closed_forms() {
    for s in [0.05f64, 0.2, 1.0] {
        let zero = 1.0 / (2.0 * s.powi(4));
        let one = zero + 1.0 / s.powi(6);
        assert!((gaussian_radial_integral(s, 0.0) - zero).abs() / zero < 1e-9);
        assert!((gaussian_radial_integral(s, 1.0) - one).abs() / one < 1e-9);
    }
}

#[test]
fn gaussian_order_one_spectral_norm() {
    let grid = Grid::window(32, Point::ORIGIN, 1.0).unwrap();
    let s = 1.5 * grid.h();
    let g = ScalarField::from_fn(&grid, |p| C64::new((-p.gamma().powi(2) / (2.0 * s * s)).exp(), 0.0));
    let numeric = sobolev_fractional_norm(&g, 1.0, false).unwrap().value.powi(2);
    let closed = PI * PI * (s.powi(4) + 2.0 * s * s);
    assert!((gaussian_fractional_sq(s, 1.0) - closed).abs() / closed < 1e-9);
    assert!((numeric - closed).abs() / closed < 0.01, "{numeric} vs {closed}");
}

#[test]
fn holder_chain() {
    let spec = TestFormSpec::centered(0.4, 1, 3, 11);
    let grid = estimate_grid(&spec, 20, EstimateId::E1, 2.0).unwrap();
    let f = make_test_form(&spec, &grid).unwrap();
    let nsq = f.pointwise_norm_sqr();
    let indicator = ScalarField::from_values(
        &grid,
        nsq.values().iter().map(|z| C64::new(if z.re > 0.0 { 1.0 } else { 0.0 }, 0.0)).collect(),
        f.support(),
    );
    let vol = weighted_l2_norm(&indicator, 0.0).value.powi(2);
    let l2 = weighted_l2_norm(&f, 0.0).value;
    assert!((lp_norm(&f, 2.0).unwrap().value - l2).abs() <= 1e-12 * l2);
    let ps = [2.0, 3.0, 4.0, 8.0];
    let norms: Vec<f64> = ps.iter().map(|&p| lp_norm(&f, p).unwrap().value).collect();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let bound = vol.powf(1.0 / ps[i] - 1.0 / ps[j]) * norms[j];
            assert!(norms[i] <= bound * (1.0 + 1e-12), "p={} q={}", ps[i], ps[j]);
        }
    }
}

#[test]
fn e2_dominates_e1() {
    for seed in 0..4 {
        let spec = TestFormSpec::centered(0.3, 2, 2, seed);
        let grid = estimate_grid(&spec, 24, EstimateId::E1, 2.0).unwrap();
        let f = make_test_form(&spec, &grid).unwrap();
        let t = estimate_terms(&f).unwrap();
        let (l1, r1) = t.sides(EstimateId::E1).unwrap();
        let (l2, r2) = t.sides(EstimateId::E2).unwrap();
        assert!(l2 >= l1);
        assert_eq!(r1, r2);
    }
}

#[test]
fn ratios_are_scale_invariant() {
    let z = C64::new(-2.5, 1.75);
    let cases = [
        EstimateCase::plain(EstimateId::E1).unwrap(),
        EstimateCase::plain(EstimateId::E2).unwrap(),
        EstimateCase::plain(EstimateId::E3).unwrap(),
        EstimateCase::subelliptic(0.5, 4.0).unwrap(),
    ];
    let spec = TestFormSpec::centered(0.25, 1, 2, 5);
    for case in cases {
        let grid = estimate_grid(&spec, 20, case.id, 2.0).unwrap();
        let f = make_test_form(&spec, &grid).unwrap();
        let (l, r) = evaluate_estimate(&case, &f).unwrap();
        let (ls, rs) = evaluate_estimate(&case, &f.scale(z)).unwrap();
        let q = (ls / rs) / (l / r);
        assert!((q - 1.0).abs() < 1e-9, "{case}: {q}");
        let k = if case.id == EstimateId::E4 { 1 } else { 2 };
        assert!((ls / l - z.norm().powi(k)).abs() < 1e-9 * z.norm().powi(k), "{case}");
    }
}
