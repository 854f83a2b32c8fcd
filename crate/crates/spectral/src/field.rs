//! Scalar fields carrying both grid values and Fourier coefficients.
//!
//! A `Field` is an immutable value: whichever representation it was built from
//! is stored, and the other is produced on first use and cached (the two stay
//! synchronized by construction — there is no mutation API). All operations
//! return new fields. Values are complex so that oscillatory packets e^{iλξ}θ
//! are first-class; real fields are recognized by `max_imag`/`conj_sym_gap`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::fft;
use crate::grid::{Grid, TWO_PI};

#[derive(Debug)]
pub struct Field {
    grid: Grid,
    vals: OnceLock<Vec<Complex64>>,
    coef: OnceLock<Vec<Complex64>>,
}

impl Clone for Field {
    fn clone(&self) -> Self {
        Field {
            grid: self.grid,
            vals: self.vals.clone(),
            coef: self.coef.clone(),
        }
    }
}

impl Field {
    pub fn from_values(grid: Grid, vals: Vec<Complex64>) -> Self {
        assert_eq!(vals.len(), grid.len(), "value buffer does not match grid");
        let cell = OnceLock::new();
        cell.set(vals).ok();
        Field {
            grid,
            vals: cell,
            coef: OnceLock::new(),
        }
    }

    pub fn from_coeffs(grid: Grid, coef: Vec<Complex64>) -> Self {
        assert_eq!(coef.len(), grid.len(), "coefficient buffer does not match grid");
        let cell = OnceLock::new();
        cell.set(coef).ok();
        Field {
            grid,
            vals: OnceLock::new(),
            coef: cell,
        }
    }

    pub fn from_real_values(grid: Grid, vals: &[f64]) -> Self {
        assert_eq!(vals.len(), grid.len());
        Self::from_values(grid, vals.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Sample a function of the grid point.
    pub fn from_point_fn(grid: Grid, mut f: impl FnMut([f64; 2]) -> Complex64) -> Self {
        let mut vals = vec![Complex64::default(); grid.len()];
        grid.for_each_point(|idx, x| vals[idx] = f(x));
        Self::from_values(grid, vals)
    }

    /// Samples a real-valued function on the grid points.
    pub fn from_real_point_fn(grid: Grid, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        Self::from_point_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Build directly in frequency space from a function of the mode.
    pub fn from_mode_fn(grid: Grid, mut f: impl FnMut([i64; 2]) -> Complex64) -> Self {
        let mut coef = vec![Complex64::default(); grid.len()];
        grid.for_each_mode(|idx, k| coef[idx] = f(k));
        Self::from_coeffs(grid, coef)
    }

    pub fn zero(grid: Grid) -> Self {
        Self::from_coeffs(grid, vec![Complex64::default(); grid.len()])
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        let mut coef = vec![Complex64::default(); grid.len()];
        coef[0] = c;
        Self::from_coeffs(grid, coef)
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Grid values (computed from coefficients on first use).
    pub fn values(&self) -> &[Complex64] {
        self.vals.get_or_init(|| {
            let mut data = self
                .coef
                .get()
                .expect("field has neither values nor coefficients")
                .clone();
            fft::inverse(&mut data, self.grid.n());
            data
        })
    }

    /// Fourier coefficients (computed from values on first use).
    pub fn coeffs(&self) -> &[Complex64] {
        self.coef.get_or_init(|| {
            let mut data = self
                .vals
                .get()
                .expect("field has neither values nor coefficients")
                .clone();
            fft::forward(&mut data, self.grid.n());
            data
        })
    }

    fn zip_binary(
        &self,
        other: &Field,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Field {
        assert_eq!(self.grid, other.grid, "field grids differ");
        // Prefer a side both already have to avoid gratuitous transforms;
        // fall back to coefficients (linear ops are representation-agnostic).
        let both_vals = self.vals.get().is_some() && other.vals.get().is_some();
        let both_coef = self.coef.get().is_some() && other.coef.get().is_some();
        if both_coef || !both_vals {
            let data = self
                .coeffs()
                .iter()
                .zip(other.coeffs())
                .map(|(&a, &b)| f(a, b))
                .collect();
            Field::from_coeffs(self.grid, data)
        } else {
            let data = self
                .values()
                .iter()
                .zip(other.values())
                .map(|(&a, &b)| f(a, b))
                .collect();
            Field::from_values(self.grid, data)
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_binary(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_binary(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Field {
        if self.coef.get().is_some() || self.vals.get().is_none() {
            Field::from_coeffs(self.grid, self.coeffs().iter().map(|&c| c * s).collect())
        } else {
            Field::from_values(self.grid, self.values().iter().map(|&v| v * s).collect())
        }
    }

    pub fn scale_re(&self, s: f64) -> Field {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Pointwise product, formed in value space (no dealiasing here; callers
    /// that need alias control project afterwards).
    pub fn mul(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "field grids differ");
        let data = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(&a, &b)| a * b)
            .collect();
        Field::from_values(self.grid, data)
    }

    pub fn conj(&self) -> Field {
        if self.vals.get().is_some() {
            Field::from_values(self.grid, self.values().iter().map(|v| v.conj()).collect())
        } else {
            // conj in value space = conj + frequency negation in coefficient space
            let g = self.grid;
            let src = self.coeffs();
            let mut data = vec![Complex64::default(); g.len()];
            g.for_each_mode(|idx, k| {
                data[g.flat_of_freqs([-k[0], -k[1]])] = src[idx].conj();
            });
            Field::from_coeffs(g, data)
        }
    }

    /// Real part as a field.
    pub fn re(&self) -> Field {
        Field::from_values(
            self.grid,
            self.values()
                .iter()
                .map(|v| Complex64::new(v.re, 0.0))
                .collect(),
        )
    }

    /// Multiply each coefficient by a function of the integer frequency.
    pub fn map_modes(&self, mut f: impl FnMut([i64; 2], Complex64) -> Complex64) -> Field {
        let g = self.grid;
        let src = self.coeffs();
        let mut data = vec![Complex64::default(); g.len()];
        g.for_each_mode(|idx, k| data[idx] = f(k, src[idx]));
        Field::from_coeffs(g, data)
    }

    /// ∂/∂x_axis via multiplication by i·k_axis.
    pub fn dx(&self, axis: usize) -> Field {
        assert!(axis < 2);
        self.map_modes(|k, c| Complex64::new(0.0, k[axis] as f64) * c)
    }

    /// Δ⁻¹ with the mean mode mapped to zero.
    pub fn laplace_inv(&self) -> Field {
        self.map_modes(|k, c| {
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            if k2 == 0.0 {
                Complex64::default()
            } else {
                -c / k2
            }
        })
    }

    /// Zero every mode with max(|k₁|, |k₂|) ≥ n/3 (the 2/3 dealiasing rule).
    pub fn dealias(&self) -> Field {
        let cut = (self.grid.n() / 3) as i64;
        self.map_modes(|k, c| {
            if k[0].abs() >= cut || k[1].abs() >= cut {
                Complex64::default()
            } else {
                c
            }
        })
    }

    /// Moves the field to another grid by copying shared Fourier modes:
    /// spectral truncation when shrinking, zero-padding when growing. Exact
    /// in both directions for content the smaller grid resolves; Nyquist
    /// rows of the smaller grid are dropped rather than folded.
    pub fn resample(&self, to: Grid) -> Field {
        if to.n() == self.grid.n() {
            return self.clone();
        }
        let src = self.coeffs();
        let keep = (self.grid.max_freq().min(to.max_freq())) as i64;
        let mut out = vec![Complex64::default(); to.len()];
        to.for_each_mode(|idx, k| {
            if k[0].abs() <= keep && k[1].abs() <= keep {
                out[idx] = src[self.grid.flat_of_freqs(k)];
            }
        });
        Field::from_coeffs(to, out)
    }

    /// Mean value over the box, i.e. the k = 0 coefficient.
    pub fn mean(&self) -> Complex64 {
        self.coeffs()[0]
    }

    /// Grid-max modulus. This is the working C⁰ norm; it under-reports only by
    /// whatever lives between grid points, which bandlimited content does not.
    pub fn c0(&self) -> f64 {
        self.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// L²(𝕋²) norm computed spectrally: 2π · √(Σ|f̂|²).
    pub fn l2(&self) -> f64 {
        TWO_PI * self.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ∫ f dx = (2π)² f̂(0).
    pub fn integral(&self) -> Complex64 {
        self.mean() * TWO_PI * TWO_PI
    }

    /// |value-side energy − coefficient-side energy| / energy: the Parseval
    /// identity across the two cached representations.
    pub fn parseval_gap(&self) -> f64 {
        let n2 = self.grid.len() as f64;
        let ev: f64 = self.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / n2;
        let ec: f64 = self.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        let denom = ev.max(ec).max(f64::MIN_POSITIVE);
        (ev - ec).abs() / denom
    }

    /// Largest |Im value| on the grid.
    pub fn max_imag(&self) -> f64 {
        self.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Largest violation of f̂(−k) = conj f̂(k) (negation taken mod n, so the
    /// Nyquist rows pair with themselves).
    pub fn conj_sym_gap(&self) -> f64 {
        let g = self.grid;
        let c = self.coeffs();
        let mut worst: f64 = 0.0;
        g.for_each_mode(|idx, k| {
            let neg = g.flat_of_freqs([-k[0], -k[1]]);
            worst = worst.max((c[idx] - c[neg].conj()).norm());
        });
        worst
    }

    /// Relative L² mass at modes where `keep` is false.
    pub fn mass_outside(&self, mut keep: impl FnMut([i64; 2]) -> bool) -> f64 {
        let mut out = 0.0;
        let mut tot = 0.0;
        let c = self.coeffs();
        self.grid.for_each_mode(|idx, k| {
            let e = c[idx].norm_sqr();
            tot += e;
            if !keep(k) {
                out += e;
            }
        });
        if tot == 0.0 {
            0.0
        } else {
            (out / tot).sqrt()
        }
    }

    /// Coefficients with modulus above `tol`, as (k, coefficient) pairs in
    /// deterministic mode order. Handy for evaluating low-mode fields off-grid.
    pub fn sparse_modes(&self, tol: f64) -> Vec<([i64; 2], Complex64)> {
        let mut out = Vec::new();
        let c = self.coeffs();
        self.grid.for_each_mode(|idx, k| {
            if c[idx].norm() > tol {
                out.push((k, c[idx]));
            }
        });
        out
    }

    /// Evaluate the Fourier series at an arbitrary point. Cost is the number
    /// of retained modes; intended for low-mode fields (velocities after
    /// mollification) and single-point queries.
    pub fn eval_at(&self, x: [f64; 2], modes: &[([i64; 2], Complex64)]) -> Complex64 {
        let mut acc = Complex64::default();
        for &(k, c) in modes {
            let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        acc
    }

    /// Real values, erroring if the imaginary part exceeds `tol` (absolute).
    pub fn real_values(&self, tol: f64) -> Result<Vec<f64>> {
        let worst = self.max_imag();
        if worst > tol {
            return Err(SpectralError::Snapshot(format!(
                "field is not real: max |Im| = {worst:.3e} > {tol:.1e}"
            )));
        }
        Ok(self.values().iter().map(|v| v.re).collect())
    }
}
