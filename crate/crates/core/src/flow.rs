//! The coarse-scale flow and flow-line averaging.
//!
//! Characteristics of the mollified velocity, dX/ds = u_ε(t+s, X), are traced
//! with fixed-step RK4; off-grid velocity samples come from periodic bicubic
//! (Catmull–Rom) interpolation. Averaging a field along these flow lines with
//! a normalized smooth weight is the time-direction half of the two-scale
//! regularization: it commutes with constants exactly and damps the advective
//! time derivative rather than the plain one.

use num_complex::Complex64;

use scalarforge_spectral::band::bump;
use scalarforge_spectral::{Field, Grid, TWO_PI};

use crate::quad::gauss_legendre_on;
use crate::timefn::{TimeField, TimeVec};

/// A point carried by the flow: time advances by exactly the parameter.
#[derive(Clone, Copy, Debug)]
pub struct FlowPoint {
    pub t: f64,
    pub x: [f64; 2],
}

fn cr_weights(t: f64) -> [f64; 4] {
    // Catmull–Rom cubic through four consecutive samples.
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t + 2.0 * t2 - t3),
        0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
        0.5 * (t + 4.0 * t2 - 3.0 * t3),
        0.5 * (-t2 + t3),
    ]
}

/// Periodic bicubic sample of a grid field at an arbitrary point.
pub fn sample_bicubic(f: &Field, x: [f64; 2]) -> Complex64 {
    let g = f.grid();
    let n = g.n() as i64;
    let vals = f.values();
    let scale = n as f64 / TWO_PI;

    let mut base = [0i64; 2];
    let mut w = [[0.0; 4]; 2];
    for ax in 0..2 {
        let u = x[ax].rem_euclid(TWO_PI) * scale;
        let i = u.floor();
        w[ax] = cr_weights(u - i);
        base[ax] = i as i64;
    }
    let mut acc = Complex64::default();
    for (di, &wi) in w[0].iter().enumerate() {
        let row = ((base[0] + di as i64 - 1).rem_euclid(n)) as usize * g.n();
        for (dj, &wj) in w[1].iter().enumerate() {
            let col = ((base[1] + dj as i64 - 1).rem_euclid(n)) as usize;
            acc += vals[row + col] * (wi * wj);
        }
    }
    acc
}

fn velocities(u: &TimeVec, t: f64, pts: &[[f64; 2]], out: &mut Vec<[f64; 2]>) {
    let slice = u.at(t);
    out.clear();
    out.extend(pts.iter().map(|&p| {
        [
            sample_bicubic(&slice.x, p).re,
            sample_bicubic(&slice.y, p).re,
        ]
    }));
}

/// Advance a batch of positions from time `t` by parameter `s` (either sign)
/// in `steps` RK4 steps. Positions are kept unwrapped; samplers reduce mod 2π.
pub fn advance_points(u: &TimeVec, t: f64, pts: &mut [[f64; 2]], s: f64, steps: usize) {
    let steps = steps.max(1);
    let h = s / steps as f64;
    let m = pts.len();
    let mut stage = vec![[0.0; 2]; m];
    let (mut k1, mut k2, mut k3, mut k4) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for step in 0..steps {
        let t0 = t + h * step as f64;
        velocities(u, t0, pts, &mut k1);
        for i in 0..m {
            stage[i] = [
                pts[i][0] + 0.5 * h * k1[i][0],
                pts[i][1] + 0.5 * h * k1[i][1],
            ];
        }
        velocities(u, t0 + 0.5 * h, &stage, &mut k2);
        for i in 0..m {
            stage[i] = [
                pts[i][0] + 0.5 * h * k2[i][0],
                pts[i][1] + 0.5 * h * k2[i][1],
            ];
        }
        velocities(u, t0 + 0.5 * h, &stage, &mut k3);
        for i in 0..m {
            stage[i] = [pts[i][0] + h * k3[i][0], pts[i][1] + h * k3[i][1]];
        }
        velocities(u, t0 + h, &stage, &mut k4);
        for i in 0..m {
            for ax in 0..2 {
                pts[i][ax] +=
                    h / 6.0 * (k1[i][ax] + 2.0 * k2[i][ax] + 2.0 * k3[i][ax] + k4[i][ax]);
            }
        }
    }
}

/// Trace a single flow point.
pub fn advance_flow(u: &TimeVec, t: f64, x: [f64; 2], s: f64, steps: usize) -> FlowPoint {
    let mut pts = [x];
    advance_points(u, t, &mut pts, s, steps);
    FlowPoint {
        t: t + s,
        x: pts[0],
    }
}

/// Resolution knobs for [`flow_average`].
#[derive(Clone, Copy, Debug)]
pub struct AverageSpec {
    /// Gauss nodes across the averaging window.
    pub nodes: usize,
    /// RK4 steps per characteristic trace.
    pub rk_steps: usize,
}

impl Default for AverageSpec {
    fn default() -> Self {
        AverageSpec {
            nodes: 6,
            rk_steps: 4,
        }
    }
}

/// Average `field` along flow lines of `u` through (t, x), over the window
/// s ∈ [−eps_t, eps_t], with the standard bump as weight. The quadrature
/// weights are normalized to sum to exactly 1, so a field that is constant in
/// space and time averages to the same constant to rounding error.
pub fn flow_average(
    field: &TimeField,
    u: &TimeVec,
    t: f64,
    eps_t: f64,
    grid: Grid,
    spec: AverageSpec,
) -> Field {
    let (s_nodes, s_weights) = gauss_legendre_on(spec.nodes, -eps_t, eps_t);
    let raw: Vec<f64> = s_nodes
        .iter()
        .zip(&s_weights)
        .map(|(&s, &w)| w * bump(s / eps_t))
        .collect();
    let total: f64 = raw.iter().sum();

    let mut acc = vec![Complex64::default(); grid.len()];
    let mut pts = Vec::with_capacity(grid.len());
    for (i, &s) in s_nodes.iter().enumerate() {
        let weight = raw[i] / total;
        pts.clear();
        grid.for_each_point(|_, x| pts.push(x));
        advance_points(u, t, &mut pts, s, spec.rk_steps);
        let slice = field.at(t + s);
        for (a, &p) in acc.iter_mut().zip(pts.iter()) {
            *a += sample_bicubic(&slice, p) * weight;
        }
    }
    Field::from_values(grid, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalarforge_spectral::{Grid, VectorField};

    #[test]
    fn zero_velocity_is_the_identity() {
        let g = Grid::new(32).unwrap();
        let u = TimeVec::steady(VectorField::zero(g));
        let p = advance_flow(&u, 0.3, [1.0, 2.0], 0.7, 8);
        assert_eq!(p.t, 1.0);
        assert!((p.x[0] - 1.0).abs() < 1e-15 && (p.x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_velocity_translates_exactly() {
        let g = Grid::new(32).unwrap();
        let u = TimeVec::steady(VectorField::new(
            Field::constant(g, Complex64::new(0.3, 0.0)),
            Field::constant(g, Complex64::new(-0.2, 0.0)),
        ));
        let p = advance_flow(&u, 0.0, [0.5, 6.0], 2.0, 5);
        assert!((p.x[0] - (0.5 + 0.6)).abs() < 1e-13);
        assert!((p.x[1] - (6.0 - 0.4)).abs() < 1e-13);
    }

    fn shear() -> TimeVec {
        let g = Grid::new(64).unwrap();
        TimeVec::steady(VectorField::new(
            Field::from_real_point_fn(g, |x| -x[1].sin()),
            Field::zero(g),
        ))
    }

    #[test]
    fn steady_shear_matches_fine_step_reference() {
        let u = shear();
        let reference = advance_flow(&u, 0.0, [1.0, 0.8], 0.1, 4096);
        let coarse = advance_flow(&u, 0.0, [1.0, 0.8], 0.1, 32);
        let err = ((coarse.x[0] - reference.x[0]).powi(2)
            + (coarse.x[1] - reference.x[1]).powi(2))
        .sqrt();
        assert!(err < 1e-8, "err = {err:.3e}");
    }

    #[test]
    fn time_stepping_is_fourth_order() {
        // Spatially uniform, time-varying velocity: interpolation is exact, so
        // the measured error is purely the time integrator's.
        let u = TimeVec::new(64, |t| {
            let g = Grid::new(16).unwrap();
            VectorField::new(
                Field::constant(g, Complex64::new(t.cos(), 0.0)),
                Field::constant(g, Complex64::new(0.5 * (2.0 * t).sin(), 0.0)),
            )
        });
        let start = [2.4, 1.3];
        let exact = [
            start[0] + 1.0f64.sin(),
            start[1] + 0.25 * (1.0 - 2.0f64.cos()),
        ];
        let err_at = |steps: usize| {
            let p = advance_flow(&u, 0.0, start, 1.0, steps);
            ((p.x[0] - exact[0]).powi(2) + (p.x[1] - exact[1]).powi(2)).sqrt()
        };
        let e8 = err_at(8);
        let e16 = err_at(16);
        let ratio = e8 / e16;
        assert!(
            (10.0..=24.0).contains(&ratio),
            "halving the step cut the error by {ratio:.2}, expected ≈ 16"
        );
    }

    #[test]
    fn averaging_preserves_constants_exactly() {
        let g = Grid::new(32).unwrap();
        let u = TimeVec::steady(VectorField::new(
            Field::from_real_point_fn(g, |x| 0.4 * (x[1] + 1.0).cos()),
            Field::from_real_point_fn(g, |x| 0.3 * x[0].sin()),
        ));
        let c = Complex64::new(2.75, 0.0);
        let field = TimeField::new(8, move |_| Field::constant(Grid::new(32).unwrap(), c));
        let avg = flow_average(&field, &u, 0.2, 0.05, g, AverageSpec::default());
        assert!(avg.sub(&Field::constant(g, c)).c0() < 1e-14);
    }

    #[test]
    fn still_fluid_average_is_symmetric_in_time() {
        // With u = 0 and a field affine in t, the even weight kills the slope.
        let g = Grid::new(32).unwrap();
        let u = TimeVec::steady(VectorField::zero(g));
        let field = TimeField::new(16, move |t| {
            Field::from_real_point_fn(Grid::new(32).unwrap(), move |x| {
                (1.0 + 3.0 * t) * x[0].cos()
            })
        });
        let t0 = 0.4;
        let avg = flow_average(&field, &u, t0, 0.01, g, AverageSpec::default());
        let expect = Field::from_real_point_fn(g, |x| (1.0 + 3.0 * t0) * x[0].cos());
        assert!(avg.sub(&expect).c0() < 1e-12);
    }
}
