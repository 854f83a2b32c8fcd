//! Uniform grids on the periodic box [0, 2π)².
//!
//! A grid of size n stores n×n samples at x_j = 2πj/n and the dual lattice of
//! integer frequencies k ∈ [−n/2, n/2)². Arrays are row-major with the first
//! index along x₁: `data[i * n + j] = f(x₁ = 2πi/n, x₂ = 2πj/n)`, and the same
//! layout holds for coefficient arrays with `coef[a * n + b] = f̂(freq(a), freq(b))`.

use crate::error::{Result, SpectralError};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Square periodic grid. Cheap to copy; carries only the resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// n must be a power of two and at least 8 so every band machine below has
    /// room for at least one dyadic shell.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::BadGridSize(n));
        }
        Ok(Grid { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of points (and of retained Fourier modes), n².
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest frequency fully paired under conjugation, n/2 − 1. The row at
    /// −n/2 (its own negative mod n) is carried by transforms but every band
    /// profile vanishes there, so construction content never touches it.
    #[inline]
    pub fn max_freq(&self) -> usize {
        self.n / 2 - 1
    }

    /// Integer frequency of array index a: a for a < n/2, a − n otherwise.
    #[inline]
    pub fn freq_of_index(&self, a: usize) -> i64 {
        debug_assert!(a < self.n);
        if a < self.n / 2 {
            a as i64
        } else {
            a as i64 - self.n as i64
        }
    }

    /// Array index of integer frequency k (taken mod n).
    #[inline]
    pub fn index_of_freq(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of the (a, b) mode or sample pair.
    #[inline]
    pub fn at(&self, a: usize, b: usize) -> usize {
        a * self.n + b
    }

    /// Grid coordinate of sample index j.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        TWO_PI * j as f64 / self.n as f64
    }

    /// Grid spacing 2π/n.
    #[inline]
    pub fn dx(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    /// Frequency pair of a flat coefficient index.
    #[inline]
    pub fn freqs_of_flat(&self, idx: usize) -> [i64; 2] {
        let a = idx / self.n;
        let b = idx % self.n;
        [self.freq_of_index(a), self.freq_of_index(b)]
    }

    /// Flat coefficient index of a frequency pair.
    #[inline]
    pub fn flat_of_freqs(&self, k: [i64; 2]) -> usize {
        self.index_of_freq(k[0]) * self.n + self.index_of_freq(k[1])
    }

    /// Visit every mode as (flat index, [k₁, k₂]).
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [i64; 2])) {
        let n = self.n;
        for a in 0..n {
            let ka = self.freq_of_index(a);
            for b in 0..n {
                f(a * n + b, [ka, self.freq_of_index(b)]);
            }
        }
    }

    /// Visit every sample as (flat index, [x₁, x₂]).
    pub fn for_each_point(&self, mut f: impl FnMut(usize, [f64; 2])) {
        let n = self.n;
        for i in 0..n {
            let xi = self.x(i);
            for j in 0..n {
                f(i * n + j, [xi, self.x(j)]);
            }
        }
    }
}
