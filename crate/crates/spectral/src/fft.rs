//! 2-D transforms built from cached 1-D FFT plans.
//!
//! Forward transform normalization is 1/n², so f(x) = Σ_k f̂(k) e^{ik·x} and a
//! single cosine mode has coefficients of exactly 1/2 at ±k. Plans are cached
//! per length behind a mutex; the transforms themselves run on the caller's
//! thread and are deterministic regardless of how many threads share the cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

struct PlanPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<PlanPair> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PlanPair>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(PlanPair {
                forward: planner.plan_fft(n, FftDirection::Forward),
                inverse: planner.plan_fft(n, FftDirection::Inverse),
            })
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2_with(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    debug_assert_eq!(data.len(), n * n);
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    // Transform along x₂ (contiguous rows), then along x₁ via transpose.
    for row in data.chunks_exact_mut(n) {
        plan.process_with_scratch(row, &mut scratch);
    }
    transpose(data, n);
    for row in data.chunks_exact_mut(n) {
        plan.process_with_scratch(row, &mut scratch);
    }
    transpose(data, n);
}

/// In-place forward transform: values → coefficients (normalized by 1/n²).
pub fn forward(data: &mut [Complex64], n: usize) {
    let p = plans(n);
    fft2_with(data, n, &p.forward);
    let scale = 1.0 / (n * n) as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// In-place inverse transform: coefficients → values (no scaling).
pub fn inverse(data: &mut [Complex64], n: usize) {
    let p = plans(n);
    fft2_with(data, n, &p.inverse);
}
