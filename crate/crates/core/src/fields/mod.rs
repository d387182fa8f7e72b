//! Sampled fields on 4-D grids: scalar functions, `(0,1)`-forms in the
//! coordinate and frame representations, finite differences, the seeded
//! test-form generator, mollification and snapshots.

mod fft;
mod grid;
mod mollify;
mod snapshot;
pub(crate) mod stencil;
mod testform;

pub use fft::{fft4, frequency};
pub use grid::{Ball, Grid, RowSegment, DOMAIN_HALF_WIDTH};
pub use mollify::{mollify, mollify_many, MollifyPlan, Mollifier};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use testform::{make_test_form, TestForm, TestFormSpec};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::geometry::FrameCoeffs;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Zero-filled buffer backed by zeroed pages, so untouched regions of a
/// large grid cost no resident memory.
pub(crate) fn zeroed(len: usize) -> Vec<C64> {
    if len == 0 {
        return Vec::new();
    }
    let layout = std::alloc::Layout::array::<C64>(len).expect("buffer size overflow");
    // SAFETY: Complex<f64> is repr(C) over two f64, and all-zero bits are 0.0.
    unsafe {
        let ptr = std::alloc::alloc_zeroed(layout) as *mut C64;
        if ptr.is_null() {
            std::alloc::handle_alloc_error(layout);
        }
        Vec::from_raw_parts(ptr, len, len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
    X3,
    X4,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::X1, Axis::X2, Axis::X3, Axis::X4];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wirtinger {
    DV,
    DVbar,
    DW,
    DWbar,
}

impl Wirtinger {
    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<C64>,
    support: Option<Ball>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: zeroed(grid.len()),
            support: None,
        }
    }

    /// Samples `f` at every masked point.
    pub fn from_fn<F: Fn(crate::geometry::Point) -> C64>(grid: &Grid, f: F) -> Self {
        let mut out = Self::zeros(grid);
        grid.for_each_in(None, |idx, ijkl| {
            if grid.in_mask(idx) {
                out.values[idx] = f(grid.point_at(ijkl));
            }
        });
        out
    }

    /// Samples `f` at masked points inside `ball`; zero elsewhere.
    pub fn from_fn_in<F: Fn(crate::geometry::Point) -> C64>(grid: &Grid, ball: Ball, f: F) -> Self {
        let mut out = Self::zeros(grid);
        out.support = Some(ball);
        grid.for_each_in(Some(ball), |idx, ijkl| {
            if grid.in_mask(idx) {
                out.values[idx] = f(grid.point_at(ijkl));
            }
        });
        out
    }

    /// Values outside the mask are zeroed.
    pub fn from_values(grid: &Grid, mut values: Vec<C64>, support: Option<Ball>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match grid");
        if grid.has_mask() {
            for (idx, z) in values.iter_mut().enumerate() {
                if !grid.in_mask(idx) {
                    *z = ZERO;
                }
            }
        }
        Self {
            grid: grid.clone(),
            values,
            support,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn support(&self) -> Option<Ball> {
        self.support
    }

    pub fn with_support(mut self, support: Option<Ball>) -> Self {
        self.support = support;
        self
    }

    pub fn get(&self, ijkl: [usize; 4]) -> C64 {
        self.values[self.grid.index(ijkl)]
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
            support: self.support,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let support = match (self.support, other.support) {
            (Some(a), Some(b)) => Some(a.union(b)),
            _ => None,
        };
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            support,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Pointwise `phi(point) * self`.
    pub fn multiply_by<F: Fn(crate::geometry::Point) -> C64>(&self, phi: F) -> Self {
        let mut out = Self::zeros(&self.grid);
        out.support = self.support;
        self.grid.for_each_in(self.support, |idx, ijkl| {
            let z = self.values[idx];
            if z != ZERO {
                out.values[idx] = z * phi(self.grid.point_at(ijkl));
            }
        });
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Ball where derivatives of this field may be nonzero.
    pub(crate) fn derived_support(&self) -> Option<Ball> {
        self.support.map(|b| b.grown(2.0 * self.grid.h()))
    }
}

pub fn partial_derivative(f: &ScalarField, axis: Axis) -> ScalarField {
    let grid = &f.grid;
    let a = axis.index();
    let mut out = ScalarField::zeros(grid);
    out.support = f.derived_support();
    grid.for_each_in(out.support, |idx, ijkl| {
        if grid.in_mask(idx) {
            out.values[idx] = stencil::partial(&f.values, grid, idx, ijkl[a], a);
        }
    });
    out
}

pub fn wirtinger(f: &ScalarField, which: Wirtinger) -> ScalarField {
    let grid = &f.grid;
    let mut out = ScalarField::zeros(grid);
    out.support = f.derived_support();
    let slot = which.slot();
    grid.for_each_in(out.support, |idx, ijkl| {
        if grid.in_mask(idx) {
            out.values[idx] = stencil::wirtinger_at(&f.values, grid, idx, ijkl)[slot];
        }
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// Coefficients of `dvbar`, `dwbar`.
    Coordinate,
    /// Coefficients of `conj(omega_1)`, `conj(omega_2)`.
    Frame,
}

/// A `(0,1)`-form sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    grid: Grid,
    repr: Representation,
    c: [Vec<C64>; 2],
    support: Option<Ball>,
}

impl OneForm {
    pub fn zeros(grid: &Grid, repr: Representation) -> Self {
        Self {
            grid: grid.clone(),
            repr,
            c: [zeroed(grid.len()), zeroed(grid.len())],
            support: None,
        }
    }

    pub fn from_components(a: ScalarField, b: ScalarField, repr: Representation) -> Self {
        assert_eq!(a.grid, b.grid, "components live on different grids");
        let support = match (a.support, b.support) {
            (Some(x), Some(y)) => Some(x.union(y)),
            _ => None,
        };
        Self {
            grid: a.grid,
            repr,
            c: [a.values, b.values],
            support,
        }
    }

    /// Samples both coefficients from `f` at masked points, inside `ball`
    /// when given.
    pub fn from_fn<F>(grid: &Grid, repr: Representation, ball: Option<Ball>, f: F) -> Self
    where
        F: Fn(crate::geometry::Point) -> (C64, C64),
    {
        let mut out = Self::zeros(grid, repr);
        out.support = ball;
        grid.for_each_in(ball, |idx, ijkl| {
            if grid.in_mask(idx) {
                let (a, b) = f(grid.point_at(ijkl));
                out.c[0][idx] = a;
                out.c[1][idx] = b;
            }
        });
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn support(&self) -> Option<Ball> {
        self.support
    }

    pub fn with_support(mut self, support: Option<Ball>) -> Self {
        self.support = support;
        self
    }

    pub fn component_values(&self, i: usize) -> &[C64] {
        &self.c[i]
    }

    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.c[i].clone(),
            support: self.support,
        }
    }

    pub fn components(&self) -> [ScalarField; 2] {
        [self.component(0), self.component(1)]
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            repr: self.repr,
            c: [
                self.c[0].iter().map(|x| x * z).collect(),
                self.c[1].iter().map(|x| x * z).collect(),
            ],
            support: self.support,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let other = other.to_representation(self.repr);
        let a = self.component(0).add(&other.component(0));
        let b = self.component(1).add(&other.component(1));
        Self::from_components(a, b, self.repr)
    }

    pub fn to_representation(&self, repr: Representation) -> Self {
        match repr {
            Representation::Coordinate => self.to_coordinate(),
            Representation::Frame => self.to_frame(),
        }
    }

    pub fn to_frame(&self) -> Self {
        if self.repr == Representation::Frame {
            return self.clone();
        }
        self.convert(Representation::Frame, |fc, a, b| fc.coord_to_frame(a, b))
    }

    pub fn to_coordinate(&self) -> Self {
        if self.repr == Representation::Coordinate {
            return self.clone();
        }
        self.convert(Representation::Coordinate, |fc, a, b| fc.frame_to_coord(a, b))
    }

    /// Borrowing variants of the conversions, avoiding a copy when the
    /// representation already matches.
    pub(crate) fn as_frame(&self) -> std::borrow::Cow<'_, Self> {
        match self.repr {
            Representation::Frame => std::borrow::Cow::Borrowed(self),
            Representation::Coordinate => std::borrow::Cow::Owned(self.to_frame()),
        }
    }

    pub(crate) fn as_coordinate(&self) -> std::borrow::Cow<'_, Self> {
        match self.repr {
            Representation::Coordinate => std::borrow::Cow::Borrowed(self),
            Representation::Frame => std::borrow::Cow::Owned(self.to_coordinate()),
        }
    }

    fn convert<F>(&self, repr: Representation, op: F) -> Self
    where
        F: Fn(&FrameCoeffs, C64, C64) -> (C64, C64),
    {
        let grid = &self.grid;
        let mut out = Self::zeros(grid, repr);
        out.support = self.support;
        grid.for_each_in(self.support, |idx, ijkl| {
            let (a, b) = (self.c[0][idx], self.c[1][idx]);
            if a == ZERO && b == ZERO {
                return;
            }
            let fc = FrameCoeffs::at(grid.point_at(ijkl));
            let (x, y) = op(&fc, a, b);
            out.c[0][idx] = x;
            out.c[1][idx] = y;
        });
        out
    }

    /// Pointwise norm squared `|f1|^2 + |f2|^2` of the frame coefficients.
    pub fn pointwise_norm_sqr(&self) -> ScalarField {
        let fr = self.as_frame();
        let values = fr.c[0]
            .iter()
            .zip(&fr.c[1])
            .map(|(a, b)| C64::new(a.norm_sqr() + b.norm_sqr(), 0.0))
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
            support: self.support,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c[0]
            .iter()
            .zip(&self.c[1])
            .map(|(a, b)| a.norm().max(b.norm()))
            .fold(0.0, f64::max)
    }

    pub(crate) fn raw(&self) -> (&Grid, &[C64], &[C64]) {
        (&self.grid, &self.c[0], &self.c[1])
    }

    pub(crate) fn from_raw(grid: &Grid, repr: Representation, a: Vec<C64>, b: Vec<C64>, support: Option<Ball>) -> Self {
        Self {
            grid: grid.clone(),
            repr,
            c: [a, b],
            support,
        }
    }
}
