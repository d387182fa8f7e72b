//! Finite-difference stencils shared by every derivative in the crate.

use num_complex::Complex64 as C64;

use super::grid::Grid;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// First partial along `axis` at linear index `idx`, whose coordinate along
/// that axis is `i`.
///
/// Centered where both neighbours are sampled inside the mask, one-sided
/// second order (`(-3 f0 + 4 f1 - f2) / 2h`) where only one side is, and a
/// plain first difference when only a single neighbour exists.
#[inline(always)]
pub(crate) fn partial(vals: &[C64], grid: &Grid, idx: usize, i: usize, axis: usize) -> C64 {
    let n = grid.n();
    let s = grid.stride(axis);
    let inv2h = 0.5 / grid.h();
    let minus = i >= 1 && grid.in_mask(idx - s);
    let plus = i + 1 < n && grid.in_mask(idx + s);
    match (minus, plus) {
        (true, true) => (vals[idx + s] - vals[idx - s]) * inv2h,
        (false, true) => {
            if i + 2 < n && grid.in_mask(idx + 2 * s) {
                (vals[idx] * -3.0 + vals[idx + s] * 4.0 - vals[idx + 2 * s]) * inv2h
            } else {
                (vals[idx + s] - vals[idx]) * (2.0 * inv2h)
            }
        }
        (true, false) => {
            if i >= 2 && grid.in_mask(idx - 2 * s) {
                (vals[idx] * 3.0 - vals[idx - s] * 4.0 + vals[idx - 2 * s]) * inv2h
            } else {
                (vals[idx] - vals[idx - s]) * (2.0 * inv2h)
            }
        }
        (false, false) => ZERO,
    }
}

/// All four real partials at a point.
#[inline(always)]
pub(crate) fn gradient(vals: &[C64], grid: &Grid, idx: usize, ijkl: [usize; 4]) -> [C64; 4] {
    [
        partial(vals, grid, idx, ijkl[0], 0),
        partial(vals, grid, idx, ijkl[1], 1),
        partial(vals, grid, idx, ijkl[2], 2),
        partial(vals, grid, idx, ijkl[3], 3),
    ]
}

/// Wirtinger derivatives from real partials, ordered
/// `[d/dv, d/dvbar, d/dw, d/dwbar]`.
#[inline(always)]
pub(crate) fn wirtinger_from_gradient(d: [C64; 4]) -> [C64; 4] {
    let i = C64::new(0.0, 1.0);
    [
        (d[0] - i * d[1]) * 0.5,
        (d[0] + i * d[1]) * 0.5,
        (d[2] - i * d[3]) * 0.5,
        (d[2] + i * d[3]) * 0.5,
    ]
}

/// Wirtinger derivatives straight from samples.
#[inline(always)]
pub(crate) fn wirtinger_at(vals: &[C64], grid: &Grid, idx: usize, ijkl: [usize; 4]) -> [C64; 4] {
    wirtinger_from_gradient(gradient(vals, grid, idx, ijkl))
}
