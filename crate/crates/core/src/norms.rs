//! Norms on `X`, computed on the `(v, w)` chart: weighted `L^{2,k}`, `L^p`,
//! frame-derivative norms, integer weighted Sobolev norms and the spectral
//! fractional norm.
//!
//! The volume of `X` pulls back to `(1/2) |g| dx^4` (the covering is
//! two-to-one). Form norms use frame coefficients unless stated otherwise.

use std::fmt;
use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{fft4, frequency, partial_derivative, zeroed, Axis, Grid, OneForm, Representation, ScalarField};
use crate::fields::stencil::wirtinger_at;
use crate::geometry::{det_g, AnnulusScheme, FrameCoeffs, Point};
use crate::operators::FrameField;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Samples below this fraction of the field maximum count as empty when
/// locating the support for the spectral norm.
const SPECTRAL_SUPPORT_FLOOR: f64 = 1e-12;

/// Empty cells required between the support and the box faces before a
/// spectral multiplier is applied.
const WRAP_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    L2k,
    Lp,
    LbarL,
    Wsk,
    Weps,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NormKind::L2k => "L2k",
            NormKind::Lp => "Lp",
            NormKind::LbarL => "LbarL",
            NormKind::Wsk => "Wsk",
            NormKind::Weps => "Weps",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeKind {
    /// `L1, L2`
    Holomorphic,
    /// `Lbar1, Lbar2`
    Antiholomorphic,
}

/// Which coefficients of a form a norm is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficients {
    Frame,
    Coordinate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub k: Option<f64>,
    pub p: Option<f64>,
    pub s: Option<u32>,
    pub eps: Option<f64>,
    pub weighted: Option<bool>,
    pub derivative: Option<DerivativeKind>,
}

impl fmt::Display for NormParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(s) = self.s {
            parts.push(format!("s={s}"));
        }
        if let Some(k) = self.k {
            parts.push(format!("k={k}"));
        }
        if let Some(p) = self.p {
            parts.push(format!("p={p}"));
        }
        if let Some(e) = self.eps {
            parts.push(format!("eps={e}"));
        }
        if let Some(w) = self.weighted {
            parts.push(format!("weighted={w}"));
        }
        if let Some(d) = self.derivative {
            parts.push(format!("field={d:?}"));
        }
        f.write_str(&parts.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub kind: NormKind,
    pub parameters: NormParams,
    /// Points per axis of the quadrature grid.
    pub n: usize,
    /// Set when a negative weight meets a field whose innermost dyadic
    /// contributions do not decay.
    pub possibly_divergent: bool,
}

impl NormValue {
    fn new(value: f64, kind: NormKind, parameters: NormParams, n: usize) -> Self {
        Self {
            value,
            kind,
            parameters,
            n,
            possibly_divergent: false,
        }
    }
}

/// Writes `kind, parameters, n, value` rows with a header.
pub fn write_norm_csv<W: Write>(w: W, rows: &[NormValue]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["kind", "parameters", "n", "value"])?;
    for r in rows {
        out.write_record([
            r.kind.to_string(),
            r.parameters.to_string(),
            r.n.to_string(),
            format!("{:e}", r.value),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Either kind of sampled field.
#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Form(&'a OneForm),
}

impl<'a> From<&'a ScalarField> for FieldRef<'a> {
    fn from(f: &'a ScalarField) -> Self {
        FieldRef::Scalar(f)
    }
}

impl<'a> From<&'a OneForm> for FieldRef<'a> {
    fn from(f: &'a OneForm) -> Self {
        FieldRef::Form(f)
    }
}

impl FieldRef<'_> {
    fn grid(&self) -> &Grid {
        match self {
            FieldRef::Scalar(f) => f.grid(),
            FieldRef::Form(f) => f.grid(),
        }
    }

    /// Scalar components the norm is summed over.
    fn components(&self, coeffs: Coefficients) -> Vec<ScalarField> {
        match self {
            FieldRef::Scalar(f) => vec![(*f).clone()],
            FieldRef::Form(f) => {
                let repr = match coeffs {
                    Coefficients::Frame => Representation::Frame,
                    Coefficients::Coordinate => Representation::Coordinate,
                };
                f.to_representation(repr).components().to_vec()
            }
        }
    }
}

/// `sum_i |f_i|^2` at every grid point, over frame coefficients for forms.
fn pointwise_sqr(f: FieldRef<'_>) -> (Vec<f64>, Option<crate::fields::Ball>) {
    match f {
        FieldRef::Scalar(s) => (s.values().iter().map(|z| z.norm_sqr()).collect(), s.support()),
        FieldRef::Form(form) => {
            let fr = form.as_frame();
            let sq = fr
                .component_values(0)
                .iter()
                .zip(fr.component_values(1))
                .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
                .collect();
            (sq, fr.support())
        }
    }
}

pub fn weighted_l2_norm<'a>(f: impl Into<FieldRef<'a>>, k: f64) -> NormValue {
    let f = f.into();
    let grid = f.grid();
    let (sq, support) = pointwise_sqr(f);
    let scheme = AnnulusScheme { first: 0, last: 30 };
    let mut shells = vec![0.0; scheme.len()];
    let mut total = 0.0;
    grid.for_each_in(support, |idx, ijkl| {
        if sq[idx] == 0.0 || !grid.in_mask(idx) {
            return;
        }
        let p = grid.point_at(ijkl);
        let gamma = p.gamma();
        let term = 0.5 * gamma.powf(2.0 * k) * sq[idx] * det_g(p);
        total += term;
        if let Some(j) = scheme.index_of(gamma) {
            shells[j as usize] += term;
        }
    });
    let mut out = NormValue::new(
        (total * grid.cell_volume()).sqrt(),
        NormKind::L2k,
        NormParams {
            k: Some(k),
            ..Default::default()
        },
        grid.n(),
    );
    if k < 0.0 {
        out.possibly_divergent = tail_not_decaying(&shells);
    }
    out
}

/// The two innermost populated dyadic shells carry non-decreasing mass.
fn tail_not_decaying(shells: &[f64]) -> bool {
    let populated: Vec<f64> = shells.iter().cloned().filter(|&c| c > 0.0).collect();
    match populated.as_slice() {
        [.., outer, inner] => inner >= outer,
        _ => false,
    }
}

pub fn lp_norm(f: &OneForm, p: f64) -> Result<NormValue> {
    if !(p >= 2.0) {
        return Err(Error::InvalidInput(format!("L^p norm needs p >= 2, got {p}")));
    }
    let grid = f.grid();
    let (sq, support) = pointwise_sqr(f.into());
    let mut total = 0.0;
    grid.for_each_in(support, |idx, ijkl| {
        if sq[idx] == 0.0 || !grid.in_mask(idx) {
            return;
        }
        total += 0.5 * sq[idx].powf(p / 2.0) * det_g(grid.point_at(ijkl));
    });
    Ok(NormValue::new(
        (total * grid.cell_volume()).powf(1.0 / p),
        NormKind::Lp,
        NormParams {
            p: Some(p),
            ..Default::default()
        },
        grid.n(),
    ))
}

/// `(sum_{i,j} ||gamma^a X_j f_i||^2)^{1/2}` with `X` the holomorphic or
/// antiholomorphic frame fields.
pub fn frame_derivative_norm(f: &OneForm, which: DerivativeKind, weight_power: f64) -> NormValue {
    let fr = f.as_frame();
    let grid = fr.grid();
    let fields = match which {
        DerivativeKind::Holomorphic => [FrameField::L1, FrameField::L2],
        DerivativeKind::Antiholomorphic => [FrameField::Lbar1, FrameField::Lbar2],
    };
    let support = fr.support().map(|b| b.grown(2.0 * grid.h()));
    let mut total = 0.0;
    grid.for_each_in(support, |idx, ijkl| {
        if !grid.in_mask(idx) {
            return;
        }
        let p = grid.point_at(ijkl);
        let fc = FrameCoeffs::at(p);
        let mut acc = 0.0;
        for i in 0..2 {
            let d = wirtinger_at(fr.component_values(i), grid, idx, ijkl);
            for x in fields {
                acc += x.apply(&fc, &d).norm_sqr();
            }
        }
        if acc > 0.0 {
            total += 0.5 * p.gamma().powf(2.0 * weight_power) * acc * fc.det;
        }
    });
    NormValue::new(
        (total * grid.cell_volume()).sqrt(),
        NormKind::LbarL,
        NormParams {
            k: Some(weight_power),
            derivative: Some(which),
            ..Default::default()
        },
        grid.n(),
    )
}

/// `sum_i int gamma^{2k} |g_i|^2 gamma^4 dx^4` over the given scalar fields.
fn gamma4_quadrature(fields: &[ScalarField], k: f64) -> f64 {
    let Some(first) = fields.first() else { return 0.0 };
    let grid = first.grid();
    let mut total = 0.0;
    for f in fields {
        grid.for_each_in(f.support(), |idx, ijkl| {
            let z = f.values()[idx];
            if z == ZERO || !grid.in_mask(idx) {
                return;
            }
            let gamma = grid.point_at(ijkl).gamma();
            total += gamma.powf(2.0 * k + 4.0) * z.norm_sqr();
        });
    }
    total * grid.cell_volume()
}

/// All mixed partials `d^l f` with `|l| <= s`, each multi-index once.
fn derivatives_up_to(f: &ScalarField, s: u32) -> Vec<ScalarField> {
    let mut out = vec![f.clone()];
    let mut frontier = vec![(f.clone(), 0usize)];
    for _ in 0..s {
        let mut next = Vec::new();
        for (g, last) in &frontier {
            for a in *last..4 {
                next.push((partial_derivative(g, Axis::ALL[a]), a));
            }
        }
        out.extend(next.iter().map(|(g, _)| g.clone()));
        frontier = next;
    }
    out
}

pub fn sobolev_integer_norm<'a>(f: impl Into<FieldRef<'a>>, s: u32, k: f64) -> Result<NormValue> {
    sobolev_integer_norm_with(f, s, k, Coefficients::Frame)
}

pub fn sobolev_integer_norm_with<'a>(
    f: impl Into<FieldRef<'a>>,
    s: u32,
    k: f64,
    coeffs: Coefficients,
) -> Result<NormValue> {
    if s > 2 {
        return Err(Error::UnderResolved(format!(
            "second-order stencils cannot resolve W^{{{s},k}}; s <= 2 supported"
        )));
    }
    let f = f.into();
    let n = f.grid().n();
    let mut total = 0.0;
    for comp in f.components(coeffs) {
        total += gamma4_quadrature(&derivatives_up_to(&comp, s), k);
    }
    Ok(NormValue::new(
        total.sqrt(),
        NormKind::Wsk,
        NormParams {
            s: Some(s),
            k: Some(k),
            ..Default::default()
        },
        n,
    ))
}

/// Padded spectral workspace for one scalar component.
struct Spectrum {
    m: usize,
    pad: usize,
    data: Vec<C64>,
}

fn spectrum(f: &ScalarField, pad_factor: f64) -> Result<Option<Spectrum>> {
    let grid = f.grid();
    let n = grid.n();
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(None);
    }
    let floor = SPECTRAL_SUPPORT_FLOOR * top;
    let mut lo = [usize::MAX; 4];
    let mut hi = [0usize; 4];
    grid.for_each_in(None, |idx, ijkl| {
        if f.values()[idx].norm() > floor {
            for a in 0..4 {
                lo[a] = lo[a].min(ijkl[a]);
                hi[a] = hi[a].max(ijkl[a]);
            }
        }
    });
    let margin = (0..4).map(|a| lo[a].min(n - 1 - hi[a])).min().unwrap();
    if margin < WRAP_CELLS {
        return Err(Error::WraparoundRisk(format!(
            "support comes within {margin} cells of the box edge; need {WRAP_CELLS}"
        )));
    }
    let extent = (0..4).map(|a| hi[a] + 1 - lo[a]).max().unwrap();
    let want = (pad_factor * extent as f64).ceil() as usize;
    let mut m = n.max(want);
    m += m % 2;
    let pad = (m - n) / 2;
    let mut data = zeroed(m.pow(4));
    grid.for_each_in(None, |idx, ijkl| {
        let z = f.values()[idx];
        if z != ZERO {
            let t = ((((ijkl[0] + pad) * m + ijkl[1] + pad) * m + ijkl[2] + pad) * m) + ijkl[3] + pad;
            data[t] = z;
        }
    });
    fft4(&mut data, m, false);
    Ok(Some(Spectrum { m, pad, data }))
}

/// `int |Lambda^eps f|^2 (gamma^4) dx^4` from a forward spectrum.
fn multiplier_quadrature(grid: &Grid, sp: &Spectrum, eps: f64, weighted: bool) -> f64 {
    let m = sp.m;
    let h = grid.h();
    let freq: Vec<f64> = (0..m).map(|k| frequency(k, m, h).powi(2)).collect();
    let mut work = sp.data.clone();
    if eps != 0.0 {
        for (t, z) in work.iter_mut().enumerate() {
            let (i, j, k, l) = (t / (m * m * m), (t / (m * m)) % m, (t / m) % m, t % m);
            let zeta2 = freq[i] + freq[j] + freq[k] + freq[l];
            *z *= (1.0 + zeta2).powf(eps / 2.0);
        }
    }
    fft4(&mut work, m, true);
    let c = grid.center();
    let half = grid.half_width();
    let coord = |a: usize, i: usize| c[a] - half + (i as f64 - sp.pad as f64 + 0.5) * h;
    let mut total = 0.0;
    for (t, z) in work.iter().enumerate() {
        let ijkl = [t / (m * m * m), (t / (m * m)) % m, (t / m) % m, t % m];
        let w = if weighted {
            let g2: f64 = (0..4).map(|a| coord(a, ijkl[a]).powi(2)).sum();
            g2 * g2
        } else {
            1.0
        };
        total += w * z.norm_sqr();
    }
    total * grid.cell_volume()
}

/// Padding factor used by [`sobolev_fractional_norm`].
pub const DEFAULT_PAD_FACTOR: f64 = 2.0;

pub fn sobolev_fractional_norm<'a>(f: impl Into<FieldRef<'a>>, eps: f64, weighted: bool) -> Result<NormValue> {
    Ok(sobolev_fractional_norms(f, &[eps], weighted, DEFAULT_PAD_FACTOR, Coefficients::Frame)?.remove(0))
}

/// Fractional norms at several orders sharing one forward transform per
/// component.
pub fn sobolev_fractional_norms<'a>(
    f: impl Into<FieldRef<'a>>,
    eps_list: &[f64],
    weighted: bool,
    pad_factor: f64,
    coeffs: Coefficients,
) -> Result<Vec<NormValue>> {
    for &e in eps_list {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::InvalidInput(format!("fractional order must lie in [0, 1], got {e}")));
        }
    }
    if !(pad_factor >= 2.0) {
        return Err(Error::InvalidInput(format!("padding factor must be at least 2, got {pad_factor}")));
    }
    let f = f.into();
    let grid = f.grid().clone();
    let mut totals = vec![0.0; eps_list.len()];
    for comp in f.components(coeffs) {
        if let Some(sp) = spectrum(&comp, pad_factor)? {
            for (t, &e) in totals.iter_mut().zip(eps_list) {
                *t += multiplier_quadrature(&grid, &sp, e, weighted);
            }
        }
    }
    Ok(eps_list
        .iter()
        .zip(totals)
        .map(|(&e, t)| {
            NormValue::new(
                t.sqrt(),
                NormKind::Weps,
                NormParams {
                    eps: Some(e),
                    weighted: Some(weighted),
                    ..Default::default()
                },
                grid.n(),
            )
        })
        .collect())
}

/// Euclidean `(int |f|^2 + sum_a |d_a f|^2 dx^4)^{1/2}` summed over
/// components, the finite-difference counterpart of the unweighted order-one
/// spectral norm.
pub fn euclidean_h1_norm<'a>(f: impl Into<FieldRef<'a>>) -> f64 {
    let f = f.into();
    let grid = f.grid();
    let mut total = 0.0;
    for comp in f.components(Coefficients::Frame) {
        for d in derivatives_up_to(&comp, 1) {
            total += d.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    (total * grid.cell_volume()).sqrt()
}

/// Quadrature weight `(1/2)|g| h^4` of a grid point, exposed for oracles.
pub fn volume_weight(grid: &Grid, p: Point) -> f64 {
    0.5 * det_g(p) * grid.cell_volume()
}
