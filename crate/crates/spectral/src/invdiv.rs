//! Order −1 inverse divergence on mean-zero fields.
//!
//! R^l = ∂^l Δ⁻¹ f solves ∂_l R^l = f; in frequency space R̂^l(k) = −i k^l f̂(k)/|k|².
//! The operator gains one power of the frequency where f lives, which is the
//! whole point: fields supported near |ξ| ≈ λ come back a factor λ⁻¹ smaller.
//! Callers may pass the band they believe f lives in; it is verified, never
//! imposed — silently projecting would falsify ∂_l R^l = f.

use num_complex::Complex64;

use crate::band::BandSpec;
use crate::error::{Result, SpectralError};
use crate::field::Field;
use crate::vec2::VectorField;

/// Relative mean-size threshold above which the input is rejected.
pub const MEAN_TOL: f64 = 1e-12;

/// Relative spectral mass allowed outside a declared band.
pub const BAND_LEAK_TOL: f64 = 1e-9;

pub fn inverse_divergence(f: &Field, expected_band: Option<&BandSpec>) -> Result<VectorField> {
    let scale = f.l2().max(f64::MIN_POSITIVE);
    let rel_mean = f.mean().norm() * (crate::grid::TWO_PI) / scale;
    if rel_mean > MEAN_TOL {
        return Err(SpectralError::NonzeroMean { rel: rel_mean });
    }
    if let Some(band) = expected_band {
        band.check_resolved(f.grid())?;
        let leak = f.mass_outside(|k| band.eval([k[0] as f64, k[1] as f64]) > 0.0);
        if leak > BAND_LEAK_TOL {
            return Err(SpectralError::OutsideBand { rel: leak });
        }
    }
    let gx = f.map_modes(|k, c| {
        let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        if k2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(0.0, -k[0] as f64 / k2) * c
        }
    });
    let gy = f.map_modes(|k, c| {
        let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        if k2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(0.0, -k[1] as f64 / k2) * c
        }
    });
    Ok(VectorField::new(gx, gy))
}
