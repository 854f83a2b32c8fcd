//! Two-scale regularization of the incoming state.
//!
//! Spatially, fields are smoothed by the squared low-pass P²_{≤q}, which is
//! exactly the identity on modes below (5/4)·2^q and exactly zero past
//! 2^{q+1}; the smoothed fields therefore live comfortably on a coarse grid,
//! where phase transport and flow tracing run cheaply. In time, stress
//! coefficients are additionally averaged along the coarse flow
//! ([`crate::flow::flow_average`]), which regularizes the advective time
//! derivative — the only one the construction can afford to bound.
//!
//! All constructors validate grid resolvability up front so the returned
//! time-indexed fields cannot fail later; the mollifier never aliases.

use scalarforge_spectral::{BandSpec, Field, Grid, SpectralError, VectorField};

use crate::error::{CoreError, Result};
use crate::flow::{AverageSpec, flow_average};
use crate::timefn::{TimeField, TimeVec};

/// Verify that the cutoff 2^{q+1} fits on both the source and target grids.
fn check_cutoff(q: u32, src: Grid, dst: Grid) -> Result<()> {
    let cutoff = 1u64 << (q + 1);
    for g in [src, dst] {
        if cutoff > g.max_freq() as u64 {
            return Err(CoreError::Spectral(SpectralError::CutoffUnresolved {
                cutoff,
                max_freq: g.max_freq(),
            }));
        }
    }
    Ok(())
}

/// ε_t must sit strictly below the stress time scale τ̂ for the time average
/// to stay inside one stress epoch.
pub fn check_time_scales(eps_t: f64, tau_hat: f64) -> Result<()> {
    if eps_t >= tau_hat {
        return Err(CoreError::TimeScaleOrder { eps_t, tau_hat });
    }
    Ok(())
}

/// The two regularization lengths and the low-pass exponent realizing them.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct MollificationScales {
    /// Spatial scale ε_x = (B N^{1/L} Ξ)⁻¹, shared by θ, u, and the stress.
    pub eps_x: f64,
    /// Flow-averaging window ε_t = B⁻¹ (NΞ)⁻¹ e_R^{−1/2}.
    pub eps_t: f64,
    /// The sharpness constant B the scales were computed with.
    pub big_b: f64,
    /// Low-pass exponent with 2^q ≈ 1/ε_x, so P²_{≤q} smooths at scale ε_x.
    pub q: u32,
}

/// Picks the mollification scales for one step: spatial smoothing one factor
/// of N^{1/L} inside the input frequency scale, time averaging one factor of
/// N inside the advective time 1/(Ξ e_v^{1/2}) — checked, since everything
/// downstream assumes the average never mixes stress epochs.
pub fn compute_scales(
    xi: f64,
    ev: f64,
    er: f64,
    l: usize,
    big_n: f64,
    big_b: f64,
) -> Result<MollificationScales> {
    if big_b < 1.0 || !big_b.is_finite() {
        return Err(CoreError::Config(format!(
            "mollification sharpness must be at least 1, got {big_b}"
        )));
    }
    let eps_x = 1.0 / (big_b * big_n.powf(1.0 / l as f64) * xi);
    let eps_t = 1.0 / (big_b * big_n * xi * er.sqrt());
    check_time_scales(eps_t, 1.0 / (xi * ev.sqrt()))?;
    let q = (1.0 / eps_x).log2().ceil() as u32;
    Ok(MollificationScales {
        eps_x,
        eps_t,
        big_b,
        q,
    })
}

/// Smallest power-of-two resolution on which P²_{≤q} is resolvable with
/// headroom (support 2^{q+1} at half the Nyquist range), clamped to the fine
/// resolution.
pub fn coarse_resolution(q: u32, fine_n: usize) -> usize {
    let wanted = 1usize << (q + 3);
    wanted.max(64).min(fine_n)
}

fn spatial(f: &Field, q: u32, coarse: Grid) -> Field {
    BandSpec::LowPass { q }
        .project_sq(f)
        .expect("cutoff resolvability checked at construction")
        .resample(coarse)
}

/// θ_ε = P²_{≤q} θ on the coarse grid.
pub fn mollify_scalar(src: &TimeField, q: u32, coarse: Grid, cap: usize) -> Result<TimeField> {
    check_cutoff(q, src.at(0.0).grid(), coarse)?;
    let src = src.clone();
    Ok(TimeField::new(cap, move |t| {
        spatial(&src.at(t), q, coarse)
    }))
}

/// u_ε = P²_{≤q} u on the coarse grid, component by component.
pub fn mollify_velocity(src: &TimeVec, q: u32, coarse: Grid, cap: usize) -> Result<TimeVec> {
    check_cutoff(q, src.at(0.0).grid(), coarse)?;
    let src = src.clone();
    Ok(TimeVec::new(cap, move |t| {
        let v = src.at(t);
        VectorField::new(spatial(&v.x, q, coarse), spatial(&v.y, q, coarse))
    }))
}

/// The full two-scale regularization of a scalar coefficient: P²_{≤q} in
/// space, then a normalized bump-weighted average over flow lines of `u_eps`
/// through each grid point, over the window [−eps_t, eps_t].
pub fn flow_regularize(
    src: &TimeField,
    q: u32,
    u_eps: &TimeVec,
    eps_t: f64,
    coarse: Grid,
    avg: AverageSpec,
    cap: usize,
) -> Result<TimeField> {
    if eps_t <= 0.0 {
        return Err(CoreError::Config(format!(
            "averaging window must be positive, got {eps_t}"
        )));
    }
    let smooth = mollify_scalar(src, q, coarse, cap)?;
    let u_eps = u_eps.clone();
    Ok(TimeField::new(cap, move |t| {
        flow_average(&smooth, &u_eps, t, eps_t, coarse, avg)
    }))
}

/// Spectral zero-padding back to the fine grid (exact for mollified content).
pub fn upsample(src: &TimeField, fine: Grid, cap: usize) -> TimeField {
    let src = src.clone();
    TimeField::new(cap, move |t| src.at(t).resample(fine))
}

/// Component-wise [`upsample`].
pub fn upsample_velocity(src: &TimeVec, fine: Grid, cap: usize) -> TimeVec {
    let src = src.clone();
    TimeVec::new(cap, move |t| {
        let v = src.at(t);
        VectorField::new(v.x.resample(fine), v.y.resample(fine))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn constants_survive_both_scales_exactly() {
        let fine = Grid::new(64).unwrap();
        let coarse = Grid::new(32).unwrap();
        let c = Complex64::new(1.375, 0.0);
        let theta = TimeField::new(4, move |_| Field::constant(Grid::new(64).unwrap(), c));
        let u = TimeVec::steady(VectorField::new(
            Field::from_real_point_fn(coarse, |x| 0.2 * x[1].sin()),
            Field::from_real_point_fn(coarse, |x| 0.1 * x[0].cos()),
        ));
        let smooth = flow_regularize(
            &theta,
            2,
            &u,
            0.05,
            coarse,
            AverageSpec::default(),
            4,
        )
        .unwrap();
        let got = smooth.at(0.7);
        assert!(got.sub(&Field::constant(coarse, c)).c0() < 1e-14);
        let _ = fine;
    }

    #[test]
    fn low_modes_pass_untouched_and_high_modes_die() {
        let fine = Grid::new(128).unwrap();
        let coarse = Grid::new(64).unwrap();
        let q = 3; // plateau to 10, support to 16
        let theta = TimeField::steady(Field::from_mode_fn(fine, |k| {
            if k == [3, -1] || k == [-3, 1] {
                Complex64::new(0.4, 0.0)
            } else if k == [20, 0] || k == [-20, 0] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        }));
        let smooth = mollify_scalar(&theta, q, coarse, 2).unwrap();
        let out = smooth.at(0.0);
        assert_eq!(out.grid(), coarse);
        let expect = Field::from_mode_fn(coarse, |k| {
            if k == [3, -1] || k == [-3, 1] {
                Complex64::new(0.4, 0.0)
            } else {
                Complex64::default()
            }
        });
        assert!(out.sub(&expect).c0() < 1e-14);
    }

    #[test]
    fn unresolvable_cutoff_is_rejected() {
        let fine = Grid::new(64).unwrap();
        let coarse = Grid::new(16).unwrap(); // max_freq 7 < 2^{3+1}
        let theta = TimeField::steady(Field::zero(fine));
        match mollify_scalar(&theta, 3, coarse, 2).map(|_| ()) {
            Err(CoreError::Spectral(SpectralError::CutoffUnresolved { max_freq: 7, .. })) => {}
            other => panic!("expected CutoffUnresolved, got {other:?}"),
        }
    }

    #[test]
    fn upsample_is_a_section_of_downsample() {
        let fine = Grid::new(128).unwrap();
        let coarse = Grid::new(32).unwrap();
        let src = TimeField::steady(Field::from_mode_fn(coarse, |k| {
            if k[0].abs() > 10 || k[1].abs() > 10 {
                return Complex64::default();
            }
            Complex64::new(
                1.0 / (1.0 + (k[0] * k[0] + k[1] * k[1]) as f64),
                0.1 * k[0] as f64,
            )
        }));
        let up = upsample(&src, fine, 2);
        let back = up.at(0.3).resample(coarse);
        assert!(back.sub(&src.at(0.3)).c0() < 1e-13);
    }

    #[test]
    fn scale_selection_matches_hand_values() {
        // Ξ = 16, e_v = e_R = 1, N = 8, L = 2, B = 10.
        let s = compute_scales(16.0, 1.0, 1.0, 2, 8.0, 10.0).unwrap();
        let expect_x = 1.0 / (10.0 * 8.0f64.sqrt() * 16.0);
        assert!((s.eps_x - expect_x).abs() < 1e-18);
        assert!((s.eps_t - 1.0 / 1280.0).abs() < 1e-18);
        assert_eq!(s.q, 9); // 1/ε_x ≈ 452.5, next power of two is 512
        assert_eq!(coarse_resolution(s.q, 8192), 4096);
        assert_eq!(coarse_resolution(3, 512), 64);
        assert_eq!(coarse_resolution(3, 32), 32);
    }

    #[test]
    fn time_average_wider_than_the_advective_time_is_rejected() {
        // e_v large ⇒ advective time tiny; N = 1 gives no room.
        match compute_scales(4.0, 1e6, 1e-6, 2, 1.0, 1.0) {
            Err(CoreError::TimeScaleOrder { .. }) => {}
            other => panic!("expected TimeScaleOrder, got {other:?}"),
        }
    }

    #[test]
    fn time_scale_order_is_enforced() {
        assert!(check_time_scales(0.01, 0.5).is_ok());
        match check_time_scales(0.5, 0.3) {
            Err(CoreError::TimeScaleOrder { eps_t, tau_hat }) => {
                assert_eq!(eps_t, 0.5);
                assert_eq!(tau_hat, 0.3);
            }
            other => panic!("expected TimeScaleOrder, got {other:?}"),
        }
    }
}
