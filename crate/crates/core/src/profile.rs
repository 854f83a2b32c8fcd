//! The prescribed energy budget in time and the wave-family time partition.
//!
//! The budget's square root is a mollified plateau: with Ψ the cumulative
//! integral of the standard unit bump,
//!
//! ```text
//!     e^{1/2}(t) = sqrt(2·K·scale) · [ Ψ((t − (a − 3τ̂))/τ̂) − Ψ((t − (b + 3τ̂))/τ̂) ]
//! ```
//!
//! for the interval [a, b]. The two transition windows never overlap, so the
//! profile equals its plateau value 2·K·scale identically on [a, b] ± 2τ̂ and
//! vanishes identically outside [a, b] ± 4τ̂ — both facts are exact branch
//! decisions, not approximations. The caller picks `scale` so that the
//! plateau dominates K times the coefficient level it must cancel; the step
//! re-checks that inequality against its own ledger.
//!
//! The partition splits each wave family in time: η_k(t) = χ_k/√(Σ_j χ_j²)
//! with χ(s) a plateau cutoff equal to 1 on |s| ≤ 1/3 and supported in
//! |s| ≤ 2/3, so Σ_k η_k² = 1 wherever any χ is alive and each η_k lives on
//! [kτ − 2τ/3, kτ + 2τ/3].

use std::sync::OnceLock;

use scalarforge_spectral::band::{bump, smooth_step};

use crate::error::{CoreError, Result};
use crate::quad::gauss_legendre;

const PANEL: f64 = 0.125;
const PANEL_NODES: usize = 16;

fn reference_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(PANEL_NODES))
}

/// ∫_{−1}^{y} bump, by the same panelized quadrature for every y so that the
/// normalized cumulative hits exactly 1 at y = 1.
fn bump_cumulative(y: f64) -> f64 {
    let (xs, ws) = reference_nodes();
    let mut acc = 0.0;
    let mut left = -1.0;
    while left < y {
        let right = (left + PANEL).min(y);
        let mid = 0.5 * (left + right);
        let half = 0.5 * (right - left);
        for (x, w) in xs.iter().zip(ws) {
            acc += half * w * bump(mid + half * x);
        }
        left = right;
    }
    acc
}

fn bump_total() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| bump_cumulative(1.0))
}

/// Normalized bump CDF: 0 for y ≤ −1, 1 for y ≥ 1, smooth and strictly
/// increasing in between.
fn psi(y: f64) -> f64 {
    if y <= -1.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        bump_cumulative(y) / bump_total()
    }
}

/// Normalized bump itself (the derivative of [`psi`]).
fn eta(y: f64) -> f64 {
    bump(y) / bump_total()
}

fn eta_prime(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let d = 1.0 - y * y;
    bump(y) * (-2.0 * y / (d * d)) / bump_total()
}

/// Smooth nonnegative energy budget supported just beyond a time interval.
#[derive(Debug, Clone, Copy)]
pub struct EnergyProfile {
    a: f64,
    b: f64,
    tau_hat: f64,
    /// Value of e^{1/2} on the plateau.
    amplitude: f64,
}

impl EnergyProfile {
    pub fn new(interval: [f64; 2], tau_hat: f64, scale: f64, k_const: f64) -> Result<Self> {
        let [a, b] = interval;
        if !(a <= b) {
            return Err(CoreError::Config(format!(
                "energy interval must be ordered, got [{a}, {b}]"
            )));
        }
        if !(tau_hat > 0.0) {
            return Err(CoreError::Config(format!(
                "time scale must be positive, got {tau_hat}"
            )));
        }
        if !(scale >= 0.0) || !(k_const >= 1.0) {
            return Err(CoreError::Config(format!(
                "need scale >= 0 and K >= 1, got scale={scale}, K={k_const}"
            )));
        }
        Ok(EnergyProfile {
            a,
            b,
            tau_hat,
            amplitude: (2.0 * k_const * scale).sqrt(),
        })
    }

    /// e^{1/2}(t); exactly `amplitude` on the plateau, exactly 0 off support.
    pub fn sqrt_at(&self, t: f64) -> f64 {
        let up = psi((t - (self.a - 3.0 * self.tau_hat)) / self.tau_hat);
        let down = psi((t - (self.b + 3.0 * self.tau_hat)) / self.tau_hat);
        self.amplitude * (up - down)
    }

    pub fn at(&self, t: f64) -> f64 {
        let s = self.sqrt_at(t);
        s * s
    }

    /// The plateau value 2·K·scale of e(t).
    pub fn plateau(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    /// Closure of {e > 0}: interval ± 4τ̂.
    pub fn support(&self) -> [f64; 2] {
        [self.a - 4.0 * self.tau_hat, self.b + 4.0 * self.tau_hat]
    }

    /// Where e(t) equals its plateau exactly: interval ± 2τ̂.
    pub fn plateau_interval(&self) -> [f64; 2] {
        [self.a - 2.0 * self.tau_hat, self.b + 2.0 * self.tau_hat]
    }

    pub fn interval(&self) -> [f64; 2] {
        [self.a, self.b]
    }

    pub fn tau_hat(&self) -> f64 {
        self.tau_hat
    }

    /// Check the budget lower bound e ≥ K·level on interval ± τ̂. Since the
    /// plateau region contains that neighborhood, this is a plateau-value
    /// comparison, not a scan.
    pub fn dominates(&self, level: f64, k_const: f64) -> bool {
        self.plateau() >= k_const * level
    }

    /// sup_t |d^r/dt^r e^{1/2}| for r = 0, 1, 2. The transition windows are
    /// disjoint, so the sups factor through the mollifier's own extrema,
    /// sampled densely on its compact support.
    pub fn derivative_sups(&self) -> [f64; 3] {
        let samples = 20_001;
        let mut eta_max: f64 = 0.0;
        let mut eta_prime_max: f64 = 0.0;
        for i in 0..samples {
            let y = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            eta_max = eta_max.max(eta(y).abs());
            eta_prime_max = eta_prime_max.max(eta_prime(y).abs());
        }
        [
            self.amplitude,
            self.amplitude * eta_max / self.tau_hat,
            self.amplitude * eta_prime_max / (self.tau_hat * self.tau_hat),
        ]
    }
}

/// Quadratic partition of unity on the time axis with period τ.
#[derive(Debug, Clone, Copy)]
pub struct TimePartition {
    tau: f64,
}

/// The plateau cutoff: 1 on |s| ≤ 1/3, supported in |s| ≤ 2/3.
pub fn chi(s: f64) -> f64 {
    smooth_step((s.abs() - 1.0 / 3.0) * 3.0)
}

impl TimePartition {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(CoreError::Config(format!(
                "partition period must be positive, got {tau}"
            )));
        }
        Ok(TimePartition { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Indices whose cutoff is alive at time t (at most two).
    pub fn active(&self, t: f64) -> Vec<i64> {
        let s = t / self.tau;
        let lo = (s - 2.0 / 3.0).ceil() as i64;
        let hi = (s + 2.0 / 3.0).floor() as i64;
        (lo..=hi).filter(|k| chi(s - *k as f64) > 0.0).collect()
    }

    fn sum_sq(&self, t: f64) -> f64 {
        self.active(t)
            .into_iter()
            .map(|k| {
                let c = chi(t / self.tau - k as f64);
                c * c
            })
            .sum()
    }

    /// η_k(t) = χ_k / √(Σ_j χ_j²).
    pub fn weight(&self, k: i64, t: f64) -> Result<f64> {
        let c = chi(t / self.tau - k as f64);
        if c == 0.0 {
            return Ok(0.0);
        }
        let total = self.sum_sq(t);
        if total <= 0.0 {
            return Err(CoreError::PartitionGap {
                t0: t,
                t1: t,
                min_sum: total,
            });
        }
        Ok(c / total.sqrt())
    }

    /// Closed support of η_k: [kτ − 2τ/3, kτ + 2τ/3].
    pub fn support(&self, k: i64) -> [f64; 2] {
        let c = k as f64 * self.tau;
        [c - 2.0 * self.tau / 3.0, c + 2.0 * self.tau / 3.0]
    }
}
