//! 3-D complex FFT on the cubic lattice, built from cached 1-D rustfft plans.
//!
//! Convention: `backward` is the unnormalized synthesis
//! u(x_j) = sum_xi c_xi exp(i xi . x_j), `forward` is analysis with the
//! 1/n^3 factor, so forward(backward(c)) == c up to rounding.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static PLAN_CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

impl Fft3 {
    pub fn get(n: usize) -> Arc<Fft3> {
        let cache = PLAN_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    n,
                    fwd: planner.plan_fft_forward(n),
                    inv: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    /// Spectral -> physical, in place, unnormalized synthesis.
    pub fn backward(&self, data: &mut [Complex64]) {
        self.transform(data, false, 1.0);
    }

    /// Physical -> spectral, in place, includes the 1/n^3 factor.
    pub fn forward(&self, data: &mut [Complex64]) {
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        self.transform(data, true, scale);
    }

    fn transform(&self, data: &mut [Complex64], forward: bool, scale: f64) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "shape mismatch");
        let plan = if forward { &self.fwd } else { &self.inv };

        // Axis x: contiguous lines, one task per plane.
        data.par_chunks_mut(n * n).for_each_init(
            || vec![Complex64::default(); plan.get_inplace_scratch_len()],
            |scratch, plane| {
                for line in plane.chunks_mut(n) {
                    plan.process_with_scratch(line, scratch);
                }
            },
        );

        // Axes y and z: transform n lines at a time through an n x n
        // staging block so both gather and scatter stream over contiguous
        // n-element runs. Group g owns lines with bases base0 + j,
        // j = 0..n, element stride `stride`; groups touch disjoint memory.
        for (stride, group_stride) in [(n, n * n), (n * n, n)] {
            // normalization rides on the very last scatter
            let s = if stride == n * n { scale } else { 1.0 };
            let ptr = SendPtr(data.as_mut_ptr());
            (0..n).into_par_iter().for_each_init(
                || {
                    (
                        vec![Complex64::default(); n * n],
                        vec![Complex64::default(); plan.get_inplace_scratch_len()],
                    )
                },
                |(buf, scratch), g| {
                    let wrapped = ptr;
                    let p = wrapped.0;
                    let base0 = g * group_stride;
                    unsafe {
                        for k in 0..n {
                            let row = p.add(base0 + k * stride);
                            for j in 0..n {
                                *buf.get_unchecked_mut(j * n + k) = *row.add(j);
                            }
                        }
                        for line in buf.chunks_mut(n) {
                            plan.process_with_scratch(line, scratch);
                        }
                        for k in 0..n {
                            let row = p.add(base0 + k * stride);
                            for j in 0..n {
                                *row.add(j) = *buf.get_unchecked(j * n + k) * s;
                            }
                        }
                    }
                },
            );
        }
    }
}

#[derive(Clone, Copy)]
struct SendPtr(*mut Complex64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}
