use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// Lines gathered per batch for the strided axes.
const BATCH: usize = 64;

/// In-place 4-D DFT of an `m^4` axis-major array. The inverse is scaled by
/// `1 / m^4` so that a forward/inverse pair is the identity.
pub fn fft4(data: &mut [C64], m: usize, inverse: bool) {
    assert_eq!(data.len(), m.pow(4), "fft4 expects an m^4 array");
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // contiguous axis
    fft.process_with_scratch(data, &mut scratch);

    let mut buf = vec![C64::new(0.0, 0.0); BATCH * m];
    for axis in 0..3 {
        let stride = m.pow(3 - axis as u32);
        let block = stride * m;
        for base in (0..data.len()).step_by(block) {
            let mut off = 0;
            while off < stride {
                let width = BATCH.min(stride - off);
                for i in 0..m {
                    let row = base + i * stride + off;
                    for t in 0..width {
                        buf[t * m + i] = data[row + t];
                    }
                }
                fft.process_with_scratch(&mut buf[..width * m], &mut scratch);
                for i in 0..m {
                    let row = base + i * stride + off;
                    for t in 0..width {
                        data[row + t] = buf[t * m + i];
                    }
                }
                off += width;
            }
        }
    }

    if inverse {
        let s = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }
}

/// Angular frequency of DFT bin `k` on `m` samples of spacing `h`.
#[inline]
pub fn frequency(k: usize, m: usize, h: f64) -> f64 {
    let signed = if 2 * k <= m { k as f64 } else { k as f64 - m as f64 };
    2.0 * std::f64::consts::PI * signed / (m as f64 * h)
}
