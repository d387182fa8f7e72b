use conedbar::fields::{Ball, Grid, OneForm, Representation, ScalarField};
use conedbar::geometry::{det_g, identity_defect, mat_mul, metric_at, Point};
use conedbar::harness::{derive_seeds, EstimateCase};
use conedbar::norms::{lp_norm, sobolev_fractional_norm, weighted_l2_norm};
use conedbar::C64;
use proptest::prelude::*;

fn point_in_b() -> impl Strategy<Value = Point> {
    prop::array::uniform4(-0.99f64..0.99)
        .prop_map(Point::from_real)
        .prop_filter("inside B", |p| p.is_interior() && p.gamma() > 1e-6)
}

fn c64() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b))
}

/// A random smooth field on a small window away from the origin.
fn field(grid: &Grid, k: [f64; 4], a: C64) -> ScalarField {
    let c = grid.center();
    ScalarField::from_fn(grid, |p| {
        let x = p.to_real();
        let phase: f64 = (0..4).map(|i| k[i] * (x[i] - c[i])).sum();
        let r2: f64 = (0..4).map(|i| (x[i] - c[i]).powi(2)).sum();
        a * C64::from_polar((-r2 * 20.0).exp(), phase)
    })
}

fn window() -> Grid {
    Grid::window(8, Point::from_real([0.3, -0.2, 0.25, 0.1]), 0.2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_closed_form(p in point_in_b()) {
        let m = metric_at(p);
        let d = det_g(p);
        prop_assert!((m.direct_det() - d).abs() <= 1e-12 * d);
        prop_assert!(d > 0.0);
    }

    #[test]
    fn inverse_is_inverse(p in point_in_b()) {
        prop_assume!(p.gamma() > 0.1);
        let m = metric_at(p);
        let inv = m.inverse().unwrap();
        prop_assert!(identity_defect(&mat_mul(&m.g, &inv)) <= 1e-10);
    }

    #[test]
    fn frame_round_trip(a in c64(), b in c64(), k in prop::array::uniform4(-5.0f64..5.0)) {
        let g = window();
        let f = OneForm::from_components(field(&g, k, a), field(&g, k, b), Representation::Coordinate);
        let back = f.to_frame().to_coordinate();
        for i in 0..2 {
            for (x, y) in f.component_values(i).iter().zip(back.component_values(i)) {
                prop_assert!((x - y).norm() <= 1e-10 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn norms_are_homogeneous(a in c64(), z in c64(), k in prop::array::uniform4(-5.0f64..5.0), wt in -2.0f64..2.0) {
        prop_assume!(z.norm() > 1e-3);
        let g = window();
        let u = field(&g, k, a);
        let n = weighted_l2_norm(&u, wt).value;
        let nz = weighted_l2_norm(&u.scale(z), wt).value;
        prop_assert!((nz - z.norm() * n).abs() <= 1e-12 * (1.0 + nz));
        let f = OneForm::from_components(u.clone(), u.scale(z), Representation::Frame);
        for p in [2.0, 3.0, 8.0] {
            let l = lp_norm(&f, p).unwrap().value;
            let lz = lp_norm(&f.scale(z), p).unwrap().value;
            prop_assert!((lz - z.norm() * l).abs() <= 1e-12 * (1.0 + lz));
        }
    }

    #[test]
    fn triangle_inequality(a in c64(), b in c64(), k1 in prop::array::uniform4(-5.0f64..5.0), k2 in prop::array::uniform4(-5.0f64..5.0)) {
        let g = window();
        let (u, w) = (field(&g, k1, a), field(&g, k2, b));
        let s = u.add(&w);
        for wt in [-1.0, 0.0, 1.5] {
            let lhs = weighted_l2_norm(&s, wt).value;
            prop_assert!(lhs <= (weighted_l2_norm(&u, wt).value + weighted_l2_norm(&w, wt).value) * (1.0 + 1e-12));
        }
        let fu = OneForm::from_components(u.clone(), w.clone(), Representation::Frame);
        let fw = OneForm::from_components(w, u, Representation::Frame);
        for p in [2.0, 4.0, 8.0] {
            let lhs = lp_norm(&fu.add(&fw), p).unwrap().value;
            let rhs = lp_norm(&fu, p).unwrap().value + lp_norm(&fw, p).unwrap().value;
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn e4_constraint(eps in 0.0f64..=1.0, p in 1.0f64..10.0) {
        let ok = EstimateCase::subelliptic(eps, p).is_ok();
        prop_assert_eq!(ok, p > 4.0 / (2.0 - eps));
    }

    #[test]
    fn derived_seeds_are_distinct(base in any::<u64>()) {
        let mut s = derive_seeds(base, 200);
        s.sort_unstable();
        s.dedup();
        prop_assert_eq!(s.len(), 200);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fractional_norm_grows_with_order(a in c64(), k in prop::array::uniform4(-8.0f64..8.0)) {
        prop_assume!(a.norm() > 1e-3);
        let center = Point::from_real([0.3, -0.2, 0.25, 0.1]);
        let g = Grid::window(20, center, 0.3).unwrap();
        let c = g.center();
        let u = ScalarField::from_fn_in(&g, Ball::new(center, 0.15), |p| {
            let x = p.to_real();
            let r2: f64 = (0..4).map(|i| (x[i] - c[i]).powi(2)).sum();
            let s = r2 / 0.0225;
            if s >= 1.0 {
                return C64::new(0.0, 0.0);
            }
            a * C64::from_polar((1.0 - s).powi(4), (0..4).map(|i| k[i] * x[i]).sum::<f64>())
        });
        let mut last = 0.0;
        for eps in [0.0, 0.25, 0.5, 1.0] {
            let v = sobolev_fractional_norm(&u, eps, false).unwrap().value;
            prop_assert!(v >= last * (1.0 - 1e-12));
            last = v;
        }
    }
}
