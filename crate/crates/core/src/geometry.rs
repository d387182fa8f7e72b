//! Pointwise geometry of the cone `z3^2 = z1 z2` pulled back to the
//! `(v, w)` chart: covering map, degenerate Hermitian metric, the weight
//! `gamma`, and the Cholesky orthonormal frame.
//!
//! The metric matrix `g` acts on column vectors of `(1,0)` components, so a
//! tangent vector `X = a d/dv + b d/dw` has `|X|^2 = X^* g X`. Its inverse
//! pairs `(1,0)`-form coefficient rows: `|r|^2 = r g^{-1} r^*`.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub v: C64,
    pub w: C64,
}

impl Point {
    pub const ORIGIN: Point = Point { v: ZERO, w: ZERO };

    pub fn new(v: C64, w: C64) -> Self {
        Self { v, w }
    }

    /// From real coordinates `v = x1 + i x2`, `w = x3 + i x4`.
    pub fn from_real(x: [f64; 4]) -> Self {
        Self {
            v: C64::new(x[0], x[1]),
            w: C64::new(x[2], x[3]),
        }
    }

    pub fn to_real(self) -> [f64; 4] {
        [self.v.re, self.v.im, self.w.re, self.w.im]
    }

    pub fn gamma(self) -> f64 {
        (self.v.norm_sqr() + self.w.norm_sqr()).sqrt()
    }

    /// Membership in `B = {|v|^4 + |w|^4 < 1}`.
    pub fn is_interior(self) -> bool {
        let a = self.v.norm_sqr();
        let b = self.w.norm_sqr();
        a * a + b * b < 1.0
    }
}

/// `(v, w) -> (v^2, w^2, v w)`.
pub fn covering_map(p: Point) -> (C64, C64, C64) {
    (p.v * p.v, p.w * p.w, p.v * p.w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    pub g: Mat2,
    pub det_g: f64,
    pub g_inv: Option<Mat2>,
    pub gamma: f64,
}

impl MetricData {
    pub fn inverse(&self) -> Result<Mat2> {
        self.g_inv
            .ok_or_else(|| Error::DegenerateMetric("g has no inverse at the origin".into()))
    }

    /// `g11 g22 - |g12|^2`, computed from the matrix entries.
    pub fn direct_det(&self) -> f64 {
        (self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]).re
    }
}

/// Closed form `|g| = 16|v|^2|w|^2 + 4|v|^4 + 4|w|^4`.
#[inline]
pub fn det_g(p: Point) -> f64 {
    let a = p.v.norm_sqr();
    let b = p.w.norm_sqr();
    16.0 * a * b + 4.0 * a * a + 4.0 * b * b
}

/// Adjugate of `g`, i.e. `|g| g^{-1}`. Polynomial in `v, w`, defined everywhere.
#[inline]
pub fn adjugate(p: Point) -> Mat2 {
    let a = p.v.norm_sqr();
    let b = p.w.norm_sqr();
    let off = p.v * p.w.conj();
    [
        [C64::new(a + 4.0 * b, 0.0), -off],
        [-off.conj(), C64::new(4.0 * a + b, 0.0)],
    ]
}

pub fn metric_at(p: Point) -> MetricData {
    let a = p.v.norm_sqr();
    let b = p.w.norm_sqr();
    let off = p.v * p.w.conj();
    let g = [
        [C64::new(4.0 * a + b, 0.0), off],
        [off.conj(), C64::new(a + 4.0 * b, 0.0)],
    ];
    let det = det_g(p);
    let g_inv = (det > 0.0).then(|| {
        let adj = adjugate(p);
        let s = 1.0 / det;
        [[adj[0][0] * s, adj[0][1] * s], [adj[1][0] * s, adj[1][1] * s]]
    });
    MetricData {
        g,
        det_g: det,
        g_inv,
        gamma: p.gamma(),
    }
}

/// Orthonormal `(1,0)` coframe and its dual frame at a point.
///
/// Row `i` of `alpha` holds the coefficients of `omega_i` against `(dv, dw)`;
/// row `i` of `beta` holds the coefficients of `L_i` against `(d/dv, d/dw)`.
/// `alpha` is upper triangular with positive real diagonal and
/// `alpha^* alpha = g`; `beta = (alpha^T)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub alpha: Mat2,
    pub beta: Mat2,
}

/// Frame entries in the triangular gauge, without the matrix wrapping.
/// `alpha = [[a11, a12], [0, a22]]`, `beta = [[1/a11, 0], [b21, 1/a22]]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FrameCoeffs {
    pub a11: f64,
    pub a12: C64,
    pub a22: f64,
    pub b11: f64,
    pub b21: C64,
    pub b22: f64,
    /// `|g|`
    pub det: f64,
}

impl FrameCoeffs {
    /// Caller guarantees `p` is not the origin.
    #[inline]
    pub fn at(p: Point) -> Self {
        let a = p.v.norm_sqr();
        let b = p.w.norm_sqr();
        let g11 = 4.0 * a + b;
        let g12 = p.v * p.w.conj();
        let det = 16.0 * a * b + 4.0 * a * a + 4.0 * b * b;
        let a11 = g11.sqrt();
        let a12 = g12 / a11;
        let a22 = (det / g11).sqrt();
        let b11 = 1.0 / a11;
        let b22 = 1.0 / a22;
        let b21 = -a12 * (b11 * b22);
        Self {
            a11,
            a12,
            a22,
            b11,
            b21,
            b22,
            det,
        }
    }

    pub fn frame(&self) -> Frame {
        Frame {
            alpha: [[C64::new(self.a11, 0.0), self.a12], [ZERO, C64::new(self.a22, 0.0)]],
            beta: [[C64::new(self.b11, 0.0), ZERO], [self.b21, C64::new(self.b22, 0.0)]],
        }
    }

    /// Coordinate `(0,1)` coefficients from frame coefficients:
    /// `c_k = sum_i f_i conj(alpha_ik)`.
    #[inline]
    pub fn frame_to_coord(&self, f1: C64, f2: C64) -> (C64, C64) {
        (f1 * self.a11, f1 * self.a12.conj() + f2 * self.a22)
    }

    /// Inverse of [`Self::frame_to_coord`]: `f_i = sum_k conj(beta_ik) c_k`.
    #[inline]
    pub fn coord_to_frame(&self, c1: C64, c2: C64) -> (C64, C64) {
        (c1 * self.b11, c1 * self.b21.conj() + c2 * self.b22)
    }

    /// `L_i u` from the holomorphic Wirtinger derivatives `(u_v, u_w)`.
    #[inline]
    pub fn apply_l(&self, i: usize, u_v: C64, u_w: C64) -> C64 {
        match i {
            0 => u_v * self.b11,
            _ => self.b21 * u_v + u_w * self.b22,
        }
    }

    /// `conj(L_i) u` from the antiholomorphic derivatives `(u_vbar, u_wbar)`.
    #[inline]
    pub fn apply_lbar(&self, i: usize, u_vb: C64, u_wb: C64) -> C64 {
        match i {
            0 => u_vb * self.b11,
            _ => self.b21.conj() * u_vb + u_wb * self.b22,
        }
    }
}

pub fn frame_at(p: Point) -> Result<Frame> {
    if det_g(p) <= 0.0 {
        return Err(Error::DegenerateMetric(format!(
            "no orthonormal frame at ({}, {})",
            p.v, p.w
        )));
    }
    Ok(FrameCoeffs::at(p).frame())
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn conj_transpose(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Max-entry distance from the identity.
pub fn identity_defect(a: &Mat2) -> f64 {
    let id = [[ONE, ZERO], [ZERO, ONE]];
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - id[i][j]).norm());
        }
    }
    m
}

pub fn max_entry(a: &Mat2) -> f64 {
    a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dyadic annulus index set: annulus `j` is `gamma in [2^{-j-1}, 2^{-j})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnnulusScheme {
    pub first: u32,
    pub last: u32,
}

impl Default for AnnulusScheme {
    fn default() -> Self {
        Self { first: 1, last: 8 }
    }
}

impl AnnulusScheme {
    pub fn bounds(j: u32) -> (f64, f64) {
        let hi = 2f64.powi(-(j as i32));
        (hi / 2.0, hi)
    }

    pub fn index_of(&self, gamma: f64) -> Option<u32> {
        if !(gamma > 0.0) {
            return None;
        }
        // gamma in [2^{-j-1}, 2^{-j})  <=>  j = floor(-log2(gamma))
        let mut j = (-gamma.log2()).floor() as i64;
        // guard the floor against rounding at the edges
        let hi = 2f64.powi(-(j as i32));
        if gamma >= hi {
            j -= 1;
        } else if gamma < hi / 2.0 {
            j += 1;
        }
        (j >= self.first as i64 && j <= self.last as i64).then_some(j as u32)
    }

    pub fn len(&self) -> usize {
        (self.last + 1 - self.first) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.last < self.first
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusStat {
    pub j: u32,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub count: usize,
    /// Max of `gamma^{-k} |value|` over samples in the annulus.
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub k: i32,
    pub annuli: Vec<AnnulusStat>,
    pub overall_max: f64,
    /// Samples falling outside every annulus of the scheme.
    pub outside: usize,
}

impl OrderReport {
    pub fn populated(&self) -> impl Iterator<Item = &AnnulusStat> {
        self.annuli.iter().filter(|a| a.count > 0)
    }

    pub fn populated_count(&self) -> usize {
        self.populated().count()
    }

    /// Bounded by `bound` on every populated annulus.
    pub fn passes(&self, bound: f64) -> bool {
        self.overall_max.is_finite() && self.populated().all(|a| a.max <= bound)
    }

    /// Largest over smallest nonzero populated annulus maximum.
    pub fn spread(&self) -> f64 {
        let maxima: Vec<f64> = self.populated().map(|a| a.max).collect();
        if maxima.is_empty() {
            return f64::NAN;
        }
        let hi = maxima.iter().cloned().fold(0.0, f64::max);
        let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }
}

/// Per-annulus maxima of `gamma^{-k} |value|`.
pub fn verify_xi_order(samples: &[(Point, C64)], k: i32) -> Result<OrderReport> {
    verify_xi_order_with(samples, k, AnnulusScheme::default())
}

pub fn verify_xi_order_with(
    samples: &[(Point, C64)],
    k: i32,
    scheme: AnnulusScheme,
) -> Result<OrderReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample list".into()));
    }
    let mut annuli: Vec<AnnulusStat> = (scheme.first..=scheme.last)
        .map(|j| {
            let (lo, hi) = AnnulusScheme::bounds(j);
            AnnulusStat {
                j,
                gamma_lo: lo,
                gamma_hi: hi,
                count: 0,
                max: 0.0,
            }
        })
        .collect();
    let mut outside = 0;
    let mut overall: f64 = 0.0;
    for (p, value) in samples {
        let gamma = p.gamma();
        if gamma == 0.0 {
            return Err(Error::InvalidInput("sample at the origin".into()));
        }
        match scheme.index_of(gamma) {
            Some(j) => {
                let stat = &mut annuli[(j - scheme.first) as usize];
                let scaled = gamma.powi(-k) * value.norm();
                stat.count += 1;
                stat.max = stat.max.max(scaled);
                overall = overall.max(scaled);
            }
            None => outside += 1,
        }
    }
    Ok(OrderReport {
        k,
        annuli,
        overall_max: overall,
        outside,
    })
}

/// Uniformly random direction in R^4 scaled to a radius drawn log-uniformly
/// from `[lo, hi)`.
pub fn random_point_in_shell<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Point {
    let x = loop {
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let r2: f64 = x.iter().map(|c| c * c).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            break x.map(|c| c / r);
        }
    };
    let t: f64 = rng.gen();
    let radius = lo * (hi / lo).powf(t);
    Point::from_real(x.map(|c| c * radius))
}

/// Least-squares slopes of `log max|alpha|` and `log max|beta|` against
/// `log gamma`, sampled over the dyadic annuli of `scheme`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub alpha_slope: f64,
    pub beta_slope: f64,
    pub samples: usize,
}

pub fn frame_growth_exponents<R: Rng>(
    rng: &mut R,
    scheme: AnnulusScheme,
    per_annulus: usize,
) -> GrowthFit {
    let mut xs = Vec::new();
    let mut ya = Vec::new();
    let mut yb = Vec::new();
    for j in scheme.first..=scheme.last {
        let (lo, hi) = AnnulusScheme::bounds(j);
        for _ in 0..per_annulus {
            let p = random_point_in_shell(rng, lo, hi);
            let fr = FrameCoeffs::at(p).frame();
            xs.push(p.gamma().ln());
            ya.push(max_entry(&fr.alpha).ln());
            yb.push(max_entry(&fr.beta).ln());
        }
    }
    GrowthFit {
        alpha_slope: ls_slope(&xs, &ya),
        beta_slope: ls_slope(&xs, &yb),
        samples: xs.len(),
    }
}

pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
