use num_complex::Complex64 as C64;

use super::fft::fft4;
use super::{zeroed, Ball, Grid, ScalarField, ZERO};
use crate::error::{Error, Result};

/// Discrete approximation of the identity: the bump `exp(-1/(1-|y|^2))`
/// scaled to radius `eps` and sampled on the grid lattice, with weights
/// normalized to sum to one.
#[derive(Debug, Clone)]
pub struct Mollifier {
    eps: f64,
    h: f64,
    reach: usize,
    taps: Vec<([i32; 4], f64)>,
}

impl Mollifier {
    pub fn new(eps: f64, h: f64) -> Result<Self> {
        if !(eps > 0.0) || eps < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::UnderResolved(format!(
                "mollifier radius {eps} is below 2h = {}",
                2.0 * h
            )));
        }
        let reach = (eps / h).ceil() as i32;
        let mut taps = Vec::new();
        for a in -reach..=reach {
            for b in -reach..=reach {
                for c in -reach..=reach {
                    for d in -reach..=reach {
                        let r2 = ((a * a + b * b + c * c + d * d) as f64) * (h / eps).powi(2);
                        if r2 < 1.0 {
                            taps.push(([a, b, c, d], (-1.0 / (1.0 - r2)).exp()));
                        }
                    }
                }
            }
        }
        let total: f64 = taps.iter().map(|t| t.1).sum();
        for t in &mut taps {
            t.1 /= total;
        }
        Ok(Self {
            eps,
            h,
            reach: reach as usize,
            taps,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Sum of the discrete weights, i.e. the quadrature of `chi_eps`.
    pub fn mass(&self) -> f64 {
        self.taps.iter().map(|t| t.1).sum()
    }

    pub fn tap_count(&self) -> usize {
        self.taps.len()
    }

    /// Direct convolution at one grid point, treating out-of-box samples
    /// as zero.
    pub fn apply_at(&self, f: &ScalarField, ijkl: [usize; 4]) -> C64 {
        let grid = f.grid();
        let n = grid.n() as i64;
        let mut acc = ZERO;
        for (k, w) in &self.taps {
            let mut src = [0usize; 4];
            let mut inside = true;
            for a in 0..4 {
                let x = ijkl[a] as i64 - k[a] as i64;
                if x < 0 || x >= n {
                    inside = false;
                    break;
                }
                src[a] = x as usize;
            }
            if inside {
                acc += f.get(src) * *w;
            }
        }
        acc
    }

    fn kernel_array(&self, m: usize) -> Vec<C64> {
        let mut out = zeroed(m.pow(4));
        let wrap = |k: i32| k.rem_euclid(m as i32) as usize;
        for (k, w) in &self.taps {
            let idx = ((wrap(k[0]) * m + wrap(k[1])) * m + wrap(k[2])) * m + wrap(k[3]);
            out[idx] += C64::new(*w, 0.0);
        }
        out
    }
}

/// Index bounding box of the nonzero samples, or `None` for a zero field.
fn nonzero_box(f: &ScalarField) -> Option<([usize; 4], [usize; 4])> {
    let grid = f.grid();
    let mut lo = [usize::MAX; 4];
    let mut hi = [0usize; 4];
    let mut any = false;
    grid.for_each_in(f.support(), |idx, ijkl| {
        if f.values()[idx] != ZERO {
            any = true;
            for a in 0..4 {
                lo[a] = lo[a].min(ijkl[a]);
                hi[a] = hi[a].max(ijkl[a]);
            }
        }
    });
    any.then_some((lo, hi))
}

/// Spectra of fields on one grid, padded so that circular convolution with
/// any kernel up to `max_eps` matches the zero-extended one.
pub struct MollifyPlan {
    grid: Grid,
    supports: Vec<Option<Ball>>,
    reach: usize,
    pad: usize,
    m: usize,
    spectra: Vec<Option<Vec<C64>>>,
}

impl MollifyPlan {
    pub fn new(fields: &[&ScalarField], max_eps: f64) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(Error::InvalidInput("nothing to mollify".into()));
        };
        let grid = first.grid();
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(Error::InvalidInput("fields live on different grids".into()));
        }
        let n = grid.n();
        let reach = Mollifier::new(max_eps, grid.h())?.reach;
        let boxes: Vec<_> = fields.iter().map(|f| nonzero_box(f)).collect();
        let margin = boxes
            .iter()
            .flatten()
            .map(|(lo, hi)| (0..4).map(|a| lo[a].min(n - 1 - hi[a])).min().unwrap())
            .min()
            .unwrap_or(n);
        let pad = reach.saturating_sub(margin);
        let m = n + 2 * pad;
        let spectra = fields
            .iter()
            .zip(&boxes)
            .map(|(f, b)| {
                b.map(|_| {
                    let mut fhat = zeroed(m.pow(4));
                    grid.for_each_in(f.support(), |idx, ijkl| {
                        let z = f.values()[idx];
                        if z != ZERO {
                            fhat[Self::slot(ijkl, pad, m)] = z;
                        }
                    });
                    fft4(&mut fhat, m, false);
                    fhat
                })
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            supports: fields.iter().map(|f| f.support()).collect(),
            reach,
            pad,
            m,
            spectra,
        })
    }

    fn slot(ijkl: [usize; 4], pad: usize, m: usize) -> usize {
        (((ijkl[0] + pad) * m + ijkl[1] + pad) * m + ijkl[2] + pad) * m + ijkl[3] + pad
    }

    /// Every planned field mollified at radius `eps`, in plan order.
    pub fn apply(&self, eps: f64) -> Result<Vec<ScalarField>> {
        let grid = &self.grid;
        let k = Mollifier::new(eps, grid.h())?;
        if k.reach > self.reach {
            return Err(Error::InvalidInput(format!("radius {eps} exceeds the planned reach")));
        }
        let m = self.m;
        let mut khat = None;
        let mut out = Vec::with_capacity(self.spectra.len());
        for (spec, support) in self.spectra.iter().zip(&self.supports) {
            let support = support.map(|b| b.grown(eps));
            let Some(fhat) = spec else {
                out.push(ScalarField::zeros(grid).with_support(support));
                continue;
            };
            let khat = khat.get_or_insert_with(|| {
                let mut kk = k.kernel_array(m);
                fft4(&mut kk, m, false);
                kk
            });
            let mut work: Vec<C64> = khat.iter().zip(fhat).map(|(a, b)| a * b).collect();
            fft4(&mut work, m, true);
            let mut values = zeroed(grid.len());
            grid.for_each_in(support, |idx, ijkl| {
                if grid.in_mask(idx) {
                    values[idx] = work[Self::slot(ijkl, self.pad, m)];
                }
            });
            out.push(ScalarField::from_values(grid, values, support));
        }
        Ok(out)
    }
}

/// Mollify at several radii with one forward transform of `f`.
pub fn mollify_many(f: &ScalarField, eps_list: &[f64]) -> Result<Vec<ScalarField>> {
    let h = f.grid().h();
    for &e in eps_list {
        Mollifier::new(e, h)?;
    }
    let Some(max_eps) = eps_list.iter().copied().reduce(f64::max) else {
        return Ok(Vec::new());
    };
    let plan = MollifyPlan::new(&[f], max_eps)?;
    eps_list.iter().map(|&e| Ok(plan.apply(e)?.remove(0))).collect()
}

pub fn mollify(f: &ScalarField, eps: f64) -> Result<ScalarField> {
    Ok(mollify_many(f, &[eps])?.pop().expect("one radius in, one field out"))
}
