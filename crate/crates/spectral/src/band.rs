//! Smooth frequency-band cutoffs and projections.
//!
//! Three shapes cover everything the construction needs:
//!
//! * `LowPass { q }` — equal to 1 for |ξ| ≤ (5/4)·2^q, vanishing past 2^{q+1};
//!   squared, this is the mollifier behind θ_ε = P²_{≤q} θ.
//! * `WaveBall { lambda, parity, sign }` — the packet band: a ball centered at
//!   sign·10^parity·λ·ξ⁽¹⁾, identically 1 within a quarter of its radius and
//!   supported within half, realized by the fixed profile η̂_{≈1} in the
//!   rescaled variable ξ ↦ sign·10^{−parity}λ^{−1}ξ.
//! * `Annulus { lambda }` — the stress envelope [λ/3, 40λ], with smooth skirts
//!   [λ/4, λ/3] and [40λ, 42λ]; outer skirt included in the resolution check.
//!
//! All profiles are C^∞ functions of |·| built from the standard bump
//! exp(−1/(1−t²)), so projected fields keep Schwartz-class spatial kernels.

use num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::field::Field;
use crate::grid::Grid;

/// exp(−1/s) continued by 0 — the building block of every cutoff here.
#[inline]
fn half_bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C^∞ step: 1 for s ≤ 0, 0 for s ≥ 1, strictly monotone between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = half_bump(1.0 - s);
        let b = half_bump(s);
        a / (a + b)
    }
}

/// The standard bump exp(−1/(1−t²)) on (−1, 1), not normalized.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// ∫ bump = 0.443993816168…, computed once by Simpson refinement.
pub fn bump_mass() -> f64 {
    use std::sync::OnceLock;
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let m = 1 << 20;
        let h = 2.0 / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            let a = -1.0 + i as f64 * h;
            acc += h / 6.0 * (bump(a) + 4.0 * bump(a + 0.5 * h) + bump(a + h));
        }
        acc
    })
}

/// Frequency-band specification. `dir` is the lattice direction ξ⁽¹⁾ of the
/// wave scheme; it enters only the `WaveBall` shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandSpec {
    LowPass {
        q: u32,
    },
    WaveBall {
        lambda: u32,
        dir: [i64; 2],
        parity: u8,
        sign: i8,
    },
    Annulus {
        lambda: u32,
    },
}

impl BandSpec {
    /// Cutoff value at a (real) frequency vector.
    pub fn eval(&self, k: [f64; 2]) -> f64 {
        let r = (k[0] * k[0] + k[1] * k[1]).sqrt();
        match *self {
            BandSpec::LowPass { q } => {
                let base = (1u64 << q) as f64;
                // 1 on [0, 1.25·2^q], 0 past 2^{q+1}
                smooth_step((r / base - 1.25) / 0.75)
            }
            BandSpec::WaveBall {
                lambda,
                dir,
                parity,
                sign,
            } => {
                let scale = (sign as f64) / (10f64.powi(parity as i32) * lambda as f64);
                let sx = k[0] * scale;
                let sy = k[1] * scale;
                let dx = sx - dir[0] as f64;
                let dy = sy - dir[1] as f64;
                let dist = (dx * dx + dy * dy).sqrt();
                let rdir = ((dir[0] * dir[0] + dir[1] * dir[1]) as f64).sqrt();
                // 1 within rdir/4 of ξ⁽¹⁾, 0 beyond rdir/2
                smooth_step((dist / rdir - 0.25) * 4.0)
            }
            BandSpec::Annulus { lambda } => {
                let l = lambda as f64;
                let inner = 1.0 - smooth_step((r - l / 4.0) / (l / 3.0 - l / 4.0));
                let outer = smooth_step((r - 40.0 * l) / (2.0 * l));
                inner * outer
            }
        }
    }

    /// True when the cutoff is exactly 1 at this frequency.
    pub fn on_plateau(&self, k: [f64; 2]) -> bool {
        let r = (k[0] * k[0] + k[1] * k[1]).sqrt();
        match *self {
            BandSpec::LowPass { q } => r <= 1.25 * (1u64 << q) as f64,
            BandSpec::WaveBall {
                lambda,
                dir,
                parity,
                sign,
            } => {
                let scale = (sign as f64) / (10f64.powi(parity as i32) * lambda as f64);
                let dx = k[0] * scale - dir[0] as f64;
                let dy = k[1] * scale - dir[1] as f64;
                let rdir = ((dir[0] * dir[0] + dir[1] * dir[1]) as f64).sqrt();
                (dx * dx + dy * dy).sqrt() <= rdir / 4.0
            }
            BandSpec::Annulus { lambda } => {
                let l = lambda as f64;
                (l / 3.0..=40.0 * l).contains(&r)
            }
        }
    }

    /// Outer radius of the support.
    pub fn outer_radius(&self) -> f64 {
        match *self {
            BandSpec::LowPass { q } => (1u64 << (q + 1)) as f64,
            BandSpec::WaveBall {
                lambda,
                dir,
                parity,
                ..
            } => {
                let rdir = ((dir[0] * dir[0] + dir[1] * dir[1]) as f64).sqrt();
                10f64.powi(parity as i32) * lambda as f64 * rdir * 1.5
            }
            BandSpec::Annulus { lambda } => 42.0 * lambda as f64,
        }
    }

    /// Verify the support fits under the grid's max frequency.
    pub fn check_resolved(&self, grid: Grid) -> Result<()> {
        let outer = self.outer_radius();
        if outer > grid.max_freq() as f64 {
            let lambda = match *self {
                BandSpec::LowPass { q } => (1u64 << q) as f64,
                BandSpec::WaveBall { lambda, .. } | BandSpec::Annulus { lambda } => lambda as f64,
            };
            return Err(SpectralError::BandUnresolved {
                lambda,
                outer,
                max_freq: grid.max_freq(),
            });
        }
        Ok(())
    }

    /// Apply the cutoff as a Fourier multiplier. Errors rather than aliasing
    /// when the band does not fit on the grid.
    pub fn project(&self, f: &Field) -> Result<Field> {
        self.check_resolved(f.grid())?;
        Ok(f.map_modes(|k, c| {
            let w = self.eval([k[0] as f64, k[1] as f64]);
            if w == 0.0 {
                Complex64::default()
            } else {
                c * w
            }
        }))
    }

    /// Apply the *squared* cutoff (the mollifier form P²).
    pub fn project_sq(&self, f: &Field) -> Result<Field> {
        self.check_resolved(f.grid())?;
        Ok(f.map_modes(|k, c| {
            let w = self.eval([k[0] as f64, k[1] as f64]);
            if w == 0.0 {
                Complex64::default()
            } else {
                c * w * w
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_endpoints_and_smoothness() {
        assert_eq!(smooth_step(-1.0), 1.0);
        assert_eq!(smooth_step(0.0), 1.0);
        assert_eq!(smooth_step(1.0), 0.0);
        assert_eq!(smooth_step(2.0), 0.0);
        let mid = smooth_step(0.5);
        assert!((mid - 0.5).abs() < 1e-12, "symmetric midpoint");
        assert!(smooth_step(0.25) > smooth_step(0.75));
    }

    #[test]
    fn bump_mass_value() {
        // Classical constant for exp(-1/(1-t^2)) on (-1,1).
        assert!((bump_mass() - 0.443993816168).abs() < 1e-9);
    }

    #[test]
    fn lowpass_plateau_is_exact() {
        let g = Grid::new(64).unwrap();
        let spec = BandSpec::LowPass { q: 3 };
        // Content at |k| <= 10 = 1.25*8 passes untouched.
        let f = Field::from_mode_fn(g, |k| {
            if k == [3, -2] || k == [-3, 2] || k == [0, 10] || k == [0, -10] {
                Complex64::new(0.5, 0.0)
            } else {
                Complex64::default()
            }
        });
        let p = spec.project(&f).unwrap();
        assert!(p.sub(&f).c0() < 1e-14);
        // And content past 2^{q+1} = 16 dies.
        let hi = Field::from_mode_fn(g, |k| {
            if k[0].abs().max(k[1].abs()) == 20 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        assert!(spec.project(&hi).unwrap().l2() < 1e-14);
    }

    #[test]
    fn projection_is_contractive_and_plateau_idempotent() {
        let g = Grid::new(128).unwrap();
        let spec = BandSpec::Annulus { lambda: 1 }; // plateau [1/3, 40], skirt to 42
        let f = Field::from_mode_fn(g, |k| {
            Complex64::new(1.0 / (1.0 + (k[0] * k[0] + k[1] * k[1]) as f64), 0.0)
        });
        let once = spec.project(&f).unwrap();
        assert!(once.l2() <= f.l2() * (1.0 + 1e-12));
        // On plateau-supported content the projection is the identity, hence idempotent.
        let plate = Field::from_mode_fn(g, |k| {
            if k[0].abs() + k[1].abs() == 5 {
                Complex64::new(1.0, 0.25)
            } else {
                Complex64::default()
            }
        });
        let p1 = spec.project(&plate).unwrap();
        let p2 = spec.project(&p1).unwrap();
        assert!(p1.sub(&plate).c0() < 1e-13);
        assert!(p2.sub(&p1).c0() < 1e-13);
    }

    #[test]
    fn wave_ball_centers() {
        let spec = BandSpec::WaveBall {
            lambda: 8,
            dir: [1, 0],
            parity: 1,
            sign: -1,
        };
        // center at -10*8*(1,0) = (-80, 0); plateau radius 20, support 40
        assert_eq!(spec.eval([-80.0, 0.0]), 1.0);
        assert_eq!(spec.eval([-80.0, 19.9]), 1.0);
        assert_eq!(spec.eval([-80.0, 41.0]), 0.0);
        assert!(spec.eval([-80.0, 30.0]) > 0.0);
        assert_eq!(spec.eval([80.0, 0.0]), 0.0);
        assert!((spec.outer_radius() - 120.0).abs() < 1e-12);
    }

    #[test]
    fn unresolved_band_is_an_error() {
        let g = Grid::new(64).unwrap();
        let spec = BandSpec::Annulus { lambda: 1 }; // outer 42 > 31
        let f = Field::zero(g);
        match spec.project(&f) {
            Err(SpectralError::BandUnresolved { max_freq: 31, .. }) => {}
            other => panic!("expected BandUnresolved, got {other:?}"),
        }
    }
}
