//! Multi-dimensional complex FFTs on row-major grids, built from rustfft's
//! one-dimensional transforms.

use super::grid::Grid;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Lines shorter than this are transformed serially.
const PAR_THRESHOLD: usize = 1 << 14;

fn transform_lines(lines: &mut [Complex64], n: usize, inverse: bool) {
    if lines.len() >= PAR_THRESHOLD {
        // the per-line transform is deterministic, so splitting the batch
        // over threads does not change a single bit of the output
        let chunk = (lines.len() / rayon::current_num_threads().max(1) / n).max(1) * n;
        lines.par_chunks_mut(chunk).for_each(|c| {
            let f = plan(n, inverse);
            f.process(c);
        });
    } else {
        plan(n, inverse).process(lines);
    }
}

/// In-place DFT over every axis.  The forward transform is unnormalised;
/// the inverse divides by `N^d`, so `inverse ∘ forward = id`.
pub fn fft_nd(buf: &mut [Complex64], grid: &Grid, inverse: bool) {
    let n = grid.n();
    let d = grid.dim();
    assert_eq!(buf.len(), grid.len());
    // last axis: contiguous lines
    transform_lines(buf, n, inverse);
    if d > 1 {
        let mut scratch = vec![Complex64::new(0.0, 0.0); buf.len()];
        for axis in 0..d - 1 {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = stride * n;
            // gather lines along `axis` into contiguous storage
            let mut line = 0;
            for b in (0..buf.len()).step_by(block) {
                for s in 0..stride {
                    let base = line * n;
                    for k in 0..n {
                        scratch[base + k] = buf[b + s + k * stride];
                    }
                    line += 1;
                }
            }
            transform_lines(&mut scratch, n, inverse);
            let mut line = 0;
            for b in (0..buf.len()).step_by(block) {
                for s in 0..stride {
                    let base = line * n;
                    for k in 0..n {
                        buf[b + s + k * stride] = scratch[base + k];
                    }
                    line += 1;
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / buf.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}
