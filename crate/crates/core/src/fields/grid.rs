use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Default half-width of the box covering `B`.
pub const DOMAIN_HALF_WIDTH: f64 = 1.05;

/// Cell-centered uniform grid on a box `center + [-L, L]^4` in the real
/// coordinates `(x1, x2, x3, x4) = (Re v, Im v, Re w, Im w)`.
///
/// Linear index is axis-major: `((i * n + j) * n + k) * n + l`, axis 0
/// slowest. The mask marks membership in `B`; it is `None` when the whole
/// box lies inside `B`.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    half_width: f64,
    center: [f64; 4],
    h: f64,
    mask: Option<Arc<[bool]>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_width == other.half_width && self.center == other.center
    }
}

/// A ball in R^4 known to contain the nonzero set of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: [f64; 4],
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Self {
            center: center.to_real(),
            radius,
        }
    }

    pub fn grown(self, by: f64) -> Self {
        Self {
            radius: self.radius + by,
            ..self
        }
    }

    /// Smallest ball of this family containing both.
    pub fn union(self, other: Ball) -> Ball {
        let d = dist(self.center, other.center);
        if d + other.radius <= self.radius {
            return self;
        }
        if d + self.radius <= other.radius {
            return other;
        }
        Ball {
            center: self.center,
            radius: d + other.radius.max(self.radius),
        }
    }
}

pub(crate) fn dist(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A run of consecutive linear indices along the fastest axis.
#[derive(Debug, Clone, Copy)]
pub struct RowSegment {
    pub start: usize,
    pub len: usize,
    /// Indices of the first point of the run.
    pub ijkl: [usize; 4],
}

impl Grid {
    /// The default domain grid on `[-1.05, 1.05]^4`.
    pub fn domain(n: usize) -> Result<Self> {
        Self::window(n, Point::ORIGIN, DOMAIN_HALF_WIDTH)
    }

    pub fn window(n: usize, center: Point, half_width: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("grid needs n >= 4, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(format!("bad half-width {half_width}")));
        }
        let c = center.to_real();
        let h = 2.0 * half_width / n as f64;
        // cell-centered: the origin must not be a sample point
        let hits_origin = c.iter().all(|&ca| {
            let t = (half_width - ca) / h - 0.5;
            t >= 0.0 && t < n as f64 && (t - t.round()).abs() < 1e-9
        });
        if hits_origin {
            return Err(Error::InvalidInput(
                "grid would sample the origin; use an even n or shift the window".into(),
            ));
        }
        let mut grid = Self {
            n,
            half_width,
            center: c,
            h,
            mask: None,
        };
        if !grid.box_inside_b() {
            let mask: Vec<bool> = (0..grid.len()).map(|idx| grid.point(idx).is_interior()).collect();
            grid.mask = Some(mask.into());
        }
        Ok(grid)
    }

    fn box_inside_b(&self) -> bool {
        // max of |v|^4 + |w|^4 over the box is attained at a corner
        let lo = |a: usize| (self.center[a].abs() + self.half_width).powi(2);
        let v2 = lo(0) + lo(1);
        let w2 = lo(2) + lo(3);
        v2 * v2 + w2 * w2 < 1.0
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn center(&self) -> [f64; 4] {
        self.center
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(4)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Euclidean volume of one cell.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(4)
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow(3 - axis as u32)
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.center[axis] - self.half_width + (i as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn index(&self, ijkl: [usize; 4]) -> usize {
        ((ijkl[0] * self.n + ijkl[1]) * self.n + ijkl[2]) * self.n + ijkl[3]
    }

    #[inline]
    pub fn unravel(&self, mut idx: usize) -> [usize; 4] {
        let n = self.n;
        let l = idx % n;
        idx /= n;
        let k = idx % n;
        idx /= n;
        let j = idx % n;
        [idx / n, j, k, l]
    }

    #[inline]
    pub fn real_coords(&self, ijkl: [usize; 4]) -> [f64; 4] {
        std::array::from_fn(|a| self.coord(a, ijkl[a]))
    }

    #[inline]
    pub fn point_at(&self, ijkl: [usize; 4]) -> Point {
        Point::from_real(self.real_coords(ijkl))
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        self.point_at(self.unravel(idx))
    }

    #[inline]
    pub fn in_mask(&self, idx: usize) -> bool {
        match &self.mask {
            None => true,
            Some(m) => m[idx],
        }
    }

    pub fn has_mask(&self) -> bool {
        self.mask.is_some()
    }

    pub fn mask_count(&self) -> usize {
        match &self.mask {
            None => self.len(),
            Some(m) => m.iter().filter(|&&b| b).count(),
        }
    }

    /// Whether the grid point at `ijkl` is at least `cells` steps from the
    /// box faces and from every masked-out point along each axis.
    pub fn is_deep_interior(&self, ijkl: [usize; 4], cells: usize) -> bool {
        let n = self.n;
        if ijkl.iter().any(|&i| i < cells || i + cells >= n) {
            return false;
        }
        if self.mask.is_none() {
            return true;
        }
        let idx = self.index(ijkl);
        (0..4).all(|a| {
            let s = self.stride(a);
            (0..=cells).all(|d| self.in_mask(idx + d * s) && self.in_mask(idx - d * s))
        })
    }

    /// Row segments covering every grid point within `ball` (all points when
    /// `ball` is `None`).
    pub fn segments(&self, ball: Option<Ball>) -> Vec<RowSegment> {
        let n = self.n;
        let mut out = Vec::new();
        let Some(ball) = ball else {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.push(RowSegment {
                            start: self.index([i, j, k, 0]),
                            len: n,
                            ijkl: [i, j, k, 0],
                        });
                    }
                }
            }
            return out;
        };
        let r = ball.radius * (1.0 + 1e-12) + 1e-12;
        let c = ball.center;
        let range = |axis: usize, half: f64| -> Option<(usize, usize)> {
            let x0 = self.coord(axis, 0);
            let lo = ((c[axis] - half - x0) / self.h).ceil().max(0.0);
            let hi = ((c[axis] + half - x0) / self.h).floor().min(n as f64 - 1.0);
            (hi >= lo).then_some((lo as usize, hi as usize))
        };
        let Some((i0, i1)) = range(0, r) else { return out };
        for i in i0..=i1 {
            let d0 = self.coord(0, i) - c[0];
            let r1 = r * r - d0 * d0;
            if r1 < 0.0 {
                continue;
            }
            let Some((j0, j1)) = range(1, r1.sqrt()) else { continue };
            for j in j0..=j1 {
                let d1 = self.coord(1, j) - c[1];
                let r2 = r1 - d1 * d1;
                if r2 < 0.0 {
                    continue;
                }
                let Some((k0, k1)) = range(2, r2.sqrt()) else { continue };
                for k in k0..=k1 {
                    let d2 = self.coord(2, k) - c[2];
                    let r3 = r2 - d2 * d2;
                    if r3 < 0.0 {
                        continue;
                    }
                    let Some((l0, l1)) = range(3, r3.sqrt()) else { continue };
                    out.push(RowSegment {
                        start: self.index([i, j, k, l0]),
                        len: l1 - l0 + 1,
                        ijkl: [i, j, k, l0],
                    });
                }
            }
        }
        out
    }

    /// Visit `(linear index, ijkl)` for every point in `ball` in index order.
    #[inline]
    pub fn for_each_in<F: FnMut(usize, [usize; 4])>(&self, ball: Option<Ball>, mut f: F) {
        for seg in self.segments(ball) {
            let mut ijkl = seg.ijkl;
            for t in 0..seg.len {
                ijkl[3] = seg.ijkl[3] + t;
                f(seg.start + t, ijkl);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centered_domain_avoids_origin() {
        let g = Grid::domain(16).unwrap();
        let h = g.h();
        for i in 0..16 {
            let x = g.coord(0, i);
            assert!(x != 0.0);
            // odd multiple of h/2
            let t = x / (h / 2.0);
            assert!((t - t.round()).abs() < 1e-9 && (t.round() as i64) % 2 != 0);
        }
        assert!(Grid::window(15, Point::ORIGIN, 1.0).is_err());
    }

    #[test]
    fn mask_matches_b() {
        let g = Grid::domain(12).unwrap();
        assert!(g.has_mask());
        for idx in 0..g.len() {
            assert_eq!(g.in_mask(idx), g.point(idx).is_interior());
        }
        let w = Grid::window(8, Point::ORIGIN, 0.5).unwrap();
        assert!(!w.has_mask());
    }

    #[test]
    fn segments_cover_ball_exactly() {
        let g = Grid::window(14, Point::ORIGIN, 1.0).unwrap();
        let ball = Ball {
            center: [0.1, -0.2, 0.05, 0.3],
            radius: 0.55,
        };
        let mut seen = vec![false; g.len()];
        g.for_each_in(Some(ball), |idx, ijkl| {
            assert_eq!(g.index(ijkl), idx);
            seen[idx] = true;
        });
        for idx in 0..g.len() {
            let inside = dist(g.point(idx).to_real(), ball.center) <= ball.radius;
            assert_eq!(seen[idx], inside, "idx {idx}");
        }
        let mut count = 0;
        g.for_each_in(None, |_, _| count += 1);
        assert_eq!(count, g.len());
    }

    #[test]
    fn unravel_roundtrip() {
        let g = Grid::window(6, Point::ORIGIN, 0.3).unwrap();
        for idx in [0, 1, 17, 555, g.len() - 1] {
            assert_eq!(g.index(g.unravel(idx)), idx);
        }
    }
}
