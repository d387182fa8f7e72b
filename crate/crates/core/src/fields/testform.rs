use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{Ball, Grid};
use super::{OneForm, Representation};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Highest supported polynomial degree.
pub const MAX_DEGREE: u32 = 8;

/// Parameters of one seeded test `(0,1)`-form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFormSpec {
    #[serde(with = "point_serde")]
    pub center: Point,
    pub support_radius: f64,
    pub vanishing_order: u32,
    pub polynomial_degree: u32,
    pub seed: u64,
}

mod point_serde {
    use super::Point;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Point, s: S) -> Result<S::Ok, S::Error> {
        p.to_real().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point, D::Error> {
        Ok(Point::from_real(<[f64; 4]>::deserialize(d)?))
    }
}

impl TestFormSpec {
    pub fn centered(support_radius: f64, vanishing_order: u32, polynomial_degree: u32, seed: u64) -> Self {
        Self {
            center: Point::ORIGIN,
            support_radius,
            vanishing_order,
            polynomial_degree,
            seed,
        }
    }

    pub fn ball(&self) -> Ball {
        Ball::new(self.center, self.support_radius)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.support_radius > 0.0 && self.support_radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "support radius must be positive, got {}",
                self.support_radius
            )));
        }
        if self.polynomial_degree > MAX_DEGREE {
            return Err(Error::InvalidInput(format!(
                "polynomial degree {} exceeds {MAX_DEGREE}",
                self.polynomial_degree
            )));
        }
        let reach = ball_reach(self.center, self.support_radius);
        if reach >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "support ball reaches |v|^4 + |w|^4 = {reach:.4} >= 1, not inside B"
            )));
        }
        Ok(())
    }
}

/// Max of `|v|^4 + |w|^4` over the closed ball.
fn ball_reach(center: Point, r: f64) -> f64 {
    let a = center.v.norm();
    let b = center.w.norm();
    let steps = 2048;
    (0..=steps)
        .map(|t| {
            let th = std::f64::consts::FRAC_PI_2 * t as f64 / steps as f64;
            // the grid of angles can miss the maximum by a hair
            let x = a + r * th.cos() + 1e-3 * r;
            let y = b + r * th.sin() + 1e-3 * r;
            x.powi(4) + y.powi(4)
        })
        .fold(0.0, f64::max)
}

/// Compiled test form: seeded polynomials, weight and bump.
#[derive(Debug, Clone)]
pub struct TestForm {
    spec: TestFormSpec,
    /// Exponents of `v, vbar, w, wbar`.
    monomials: Vec<[u32; 4]>,
    coeffs: [Vec<C64>; 2],
}

impl TestForm {
    pub fn new(spec: TestFormSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.polynomial_degree;
        let mut monomials = Vec::new();
        for total in 0..=d {
            for a in 0..=total {
                for b in 0..=total - a {
                    for c in 0..=total - a - b {
                        monomials.push([a, b, c, total - a - b - c]);
                    }
                }
            }
        }
        let coeffs = std::array::from_fn(|comp| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(comp as u64 + 1);
            monomials
                .iter()
                .map(|_| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                .collect()
        });
        Ok(Self {
            spec,
            monomials,
            coeffs,
        })
    }

    pub fn spec(&self) -> &TestFormSpec {
        &self.spec
    }

    /// Frame coefficients `(f1, f2)` at a point.
    pub fn eval_at(&self, p: Point) -> (C64, C64) {
        let c = self.spec.center.to_real();
        let x = p.to_real();
        let s2 = (0..4).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>() / self.spec.support_radius.powi(2);
        if s2 >= 1.0 {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let bump = (1.0 - 1.0 / (1.0 - s2)).exp();
        let weight = bump * p.gamma().powi(self.spec.vanishing_order as i32);
        let d = self.spec.polynomial_degree as usize;
        let powers = |z: C64| {
            let mut out = [C64::new(0.0, 0.0); MAX_DEGREE as usize + 1];
            let mut acc = C64::new(1.0, 0.0);
            for slot in out.iter_mut().take(d + 1) {
                *slot = acc;
                acc *= z;
            }
            out
        };
        let pv = powers(p.v);
        let pvb = powers(p.v.conj());
        let pw = powers(p.w);
        let pwb = powers(p.w.conj());
        let mut f = [C64::new(0.0, 0.0); 2];
        for (m, e) in self.monomials.iter().enumerate() {
            let mono = pv[e[0] as usize] * pvb[e[1] as usize] * pw[e[2] as usize] * pwb[e[3] as usize];
            f[0] += self.coeffs[0][m] * mono;
            f[1] += self.coeffs[1][m] * mono;
        }
        (f[0] * weight, f[1] * weight)
    }

    pub fn sample(&self, grid: &Grid) -> OneForm {
        OneForm::from_fn(grid, Representation::Frame, Some(self.spec.ball()), |p| self.eval_at(p))
    }
}

/// Frame-representation sample of the seeded form described by `spec`.
pub fn make_test_form(spec: &TestFormSpec, grid: &Grid) -> Result<OneForm> {
    Ok(TestForm::new(*spec)?.sample(grid))
}
