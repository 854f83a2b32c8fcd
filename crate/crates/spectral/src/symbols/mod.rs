//! Fourier multipliers m(ξ) defining the drift u = T[θ], û(ξ) = m(ξ)θ̂(ξ).
//!
//! Every symbol here is degree-0 homogeneous, divergence-free (ξ·m(ξ) = 0),
//! and real in the sense m(−ξ) = conj m(ξ); [`Symbol2::validate`] checks all
//! three on random samples so custom expression symbols get the same
//! guarantees as the builtins. The parity split m = (even + odd)/parts drives
//! the construction (which consumes the even part through direction pairs)
//! and the conservation diagnostics (which require a purely odd symbol).
//!
//! Three-dimensional multipliers are provided as plain evaluators
//! ([`Symbol3`]): the grid machinery here is two-dimensional, so they
//! participate in symbol-level checks only.

pub mod expr;
pub mod pair;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpectralError};
use crate::field::Field;
use crate::vec2::VectorField;

use expr::Expr;

/// Behaviour of a multiplier under ξ ↦ −ξ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug)]
enum Kind {
    /// m(ξ) = i(−ξ₂, ξ₁)/|ξ|: odd, the perpendicular Riesz pair.
    Riesz,
    /// m(ξ) = (ξ₁ξ₂, −ξ₁²)/|ξ|²: even, from the porous-medium closure.
    Porous,
    Custom(Box<(Expr, Expr)>),
    /// Projection of an inner symbol onto its even or odd part.
    Part(Box<Kind>, Parity),
}

/// A validated-on-demand 2-d multiplier.
#[derive(Clone, Debug)]
pub struct Symbol2 {
    name: String,
    kind: Kind,
}

impl Symbol2 {
    /// Looks up a builtin by its config name.
    pub fn builtin(name: &str) -> Result<Symbol2> {
        match name {
            "sqg" => Ok(Symbol2 {
                name: name.to_string(),
                kind: Kind::Riesz,
            }),
            "ipm" | "ipm2d" => Ok(Symbol2 {
                name: name.to_string(),
                kind: Kind::Porous,
            }),
            other => Err(SpectralError::UnknownSymbol(other.to_string())),
        }
    }

    pub fn sqg() -> Symbol2 {
        Symbol2::builtin("sqg").unwrap()
    }

    pub fn ipm() -> Symbol2 {
        Symbol2::builtin("ipm2d").unwrap()
    }

    /// Parses a custom symbol from one expression string per component.
    /// Parsing only; run [`Symbol2::validate`] before trusting it.
    pub fn custom(name: &str, comp1: &str, comp2: &str) -> Result<Symbol2> {
        let e1 = Expr::parse(comp1)?;
        let e2 = Expr::parse(comp2)?;
        Ok(Symbol2 {
            name: name.to_string(),
            kind: Kind::Custom(Box::new((e1, e2))),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// m(ξ). The origin is excluded from every multiplier's domain; we return
    /// 0 there, which is also how [`Symbol2::apply`] treats the mean mode.
    pub fn eval(&self, xi: [f64; 2]) -> [Complex64; 2] {
        if xi[0] == 0.0 && xi[1] == 0.0 {
            return [Complex64::ZERO; 2];
        }
        eval_kind(&self.kind, xi)
    }

    /// The even part ξ ↦ (m(ξ) + m(−ξ))/2 as a symbol in its own right.
    pub fn even_part(&self) -> Symbol2 {
        Symbol2 {
            name: format!("{}.even", self.name),
            kind: Kind::Part(Box::new(self.kind.clone()), Parity::Even),
        }
    }

    /// The odd part ξ ↦ (m(ξ) − m(−ξ))/2.
    pub fn odd_part(&self) -> Symbol2 {
        Symbol2 {
            name: format!("{}.odd", self.name),
            kind: Kind::Part(Box::new(self.kind.clone()), Parity::Odd),
        }
    }

    /// Checks reality, ξ·m(ξ) = 0, and degree-0 homogeneity on `samples`
    /// random frequencies. Tolerance 1e-12, relative where a scale exists.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let xi = sample_xi2(&mut rng);
            let m = self.eval(xi);
            let m_neg = self.eval([-xi[0], -xi[1]]);
            let mag = norm2(&m).max(1e-300);

            let reality = ((m_neg[0] - m[0].conj()).norm().powi(2)
                + (m_neg[1] - m[1].conj()).norm().powi(2))
            .sqrt();
            if reality > 1e-12 * mag.max(1.0) {
                return Err(self.invariant_err("reality", xi, reality));
            }

            let div = (Complex64::new(xi[0], 0.0) * m[0] + Complex64::new(xi[1], 0.0) * m[1])
                .norm();
            let xi_len = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            if div > 1e-12 * mag * xi_len {
                return Err(self.invariant_err("divergence-free", xi, div));
            }

            for s in [2.0, 0.5, rng.gen_range(0.1..10.0)] {
                let ms = self.eval([s * xi[0], s * xi[1]]);
                let drift = ((ms[0] - m[0]).norm().powi(2) + (ms[1] - m[1]).norm().powi(2)).sqrt();
                if drift > 1e-12 * mag.max(1.0) {
                    return Err(self.invariant_err("degree-0 homogeneity", xi, drift));
                }
            }
        }
        Ok(())
    }

    fn invariant_err(&self, what: &'static str, xi: [f64; 2], err: f64) -> SpectralError {
        SpectralError::SymbolInvariant {
            name: self.name.clone(),
            what,
            xi0: xi[0],
            xi1: xi[1],
            err,
        }
    }

    /// Sampled sup of |even part| over random frequencies.
    pub fn max_even_part(&self, samples: usize, seed: u64) -> f64 {
        self.even_part().max_modulus(samples, seed)
    }

    /// Sampled sup of |odd part| over random frequencies.
    pub fn max_odd_part(&self, samples: usize, seed: u64) -> f64 {
        self.odd_part().max_modulus(samples, seed)
    }

    fn max_modulus(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sup: f64 = 0.0;
        for _ in 0..samples {
            let xi = sample_xi2(&mut rng);
            sup = sup.max(norm2(&self.eval(xi)));
        }
        sup
    }

    /// True when the even part vanishes identically (up to sampling at
    /// 1e-10); such symbols admit no direction pair and are the ones the
    /// conservation identities apply to.
    pub fn is_odd(&self, seed: u64) -> bool {
        self.max_even_part(1000, seed) <= 1e-10
    }

    /// u = T[θ]: multiplies each Fourier coefficient by m(k). The mean mode
    /// is sent to zero, and so are the Nyquist rows k₁ = −n/2 or k₂ = −n/2,
    /// which have no conjugate partner on the grid and would otherwise break
    /// the reality of u.
    pub fn apply(&self, theta: &Field) -> VectorField {
        let grid = theta.grid();
        let nyq = -(grid.n() as i64) / 2;
        let ux = theta.map_modes(|k, c| {
            if k[0] == nyq || k[1] == nyq {
                Complex64::ZERO
            } else {
                self.eval([k[0] as f64, k[1] as f64])[0] * c
            }
        });
        let uy = theta.map_modes(|k, c| {
            if k[0] == nyq || k[1] == nyq {
                Complex64::ZERO
            } else {
                self.eval([k[0] as f64, k[1] as f64])[1] * c
            }
        });
        VectorField::new(ux, uy)
    }
}

fn eval_kind(kind: &Kind, xi: [f64; 2]) -> [Complex64; 2] {
    match kind {
        Kind::Riesz => {
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            [
                Complex64::new(0.0, -xi[1] / r),
                Complex64::new(0.0, xi[0] / r),
            ]
        }
        Kind::Porous => {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            [
                Complex64::new(xi[0] * xi[1] / r2, 0.0),
                Complex64::new(-xi[0] * xi[0] / r2, 0.0),
            ]
        }
        Kind::Custom(exprs) => [exprs.0.eval(xi), exprs.1.eval(xi)],
        Kind::Part(inner, parity) => {
            let p = eval_kind(inner, xi);
            let q = eval_kind(inner, [-xi[0], -xi[1]]);
            let sign = match parity {
                Parity::Even => 1.0,
                Parity::Odd => -1.0,
            };
            [(p[0] + sign * q[0]) * 0.5, (p[1] + sign * q[1]) * 0.5]
        }
    }
}

fn sample_xi2(rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let xi = [rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)];
        if xi[0] * xi[0] + xi[1] * xi[1] >= 0.25 {
            return xi;
        }
    }
}

fn norm2(m: &[Complex64; 2]) -> f64 {
    (m[0].norm_sqr() + m[1].norm_sqr()).sqrt()
}

/// Three-dimensional multipliers, evaluator-only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol3 {
    /// m(ξ) = (ξ₁ξ₃, ξ₂ξ₃, −ξ₁²−ξ₂²)/|ξ|².
    Porous3d,
    /// The magneto-geostrophic multiplier
    /// m(ξ) = (ξ₂ξ₃|ξ|² + ξ₁ξ₂²ξ₃, −ξ₁ξ₃|ξ|² + ξ₂³ξ₃, −ξ₂²(ξ₁² + ξ₂²))
    ///        / (ξ₃²|ξ|² + ξ₂⁴),
    /// extended by m(ξ₁, ξ₂, 0) = 0. Unbounded along curved frequency paths.
    Mg,
}

impl Symbol3 {
    pub fn builtin(name: &str) -> Result<Symbol3> {
        match name {
            "ipm3d" => Ok(Symbol3::Porous3d),
            "mg" => Ok(Symbol3::Mg),
            other => Err(SpectralError::UnknownSymbol(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Symbol3::Porous3d => "ipm3d",
            Symbol3::Mg => "mg",
        }
    }

    pub fn eval(&self, xi: [f64; 3]) -> [f64; 3] {
        if xi == [0.0; 3] {
            return [0.0; 3];
        }
        match self {
            Symbol3::Porous3d => {
                let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                [
                    xi[0] * xi[2] / r2,
                    xi[1] * xi[2] / r2,
                    -(xi[0] * xi[0] + xi[1] * xi[1]) / r2,
                ]
            }
            Symbol3::Mg => {
                if xi[2] == 0.0 {
                    return [0.0; 3];
                }
                let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                let denom = xi[2] * xi[2] * r2 + xi[1].powi(4);
                [
                    (xi[1] * xi[2] * r2 + xi[0] * xi[1] * xi[1] * xi[2]) / denom,
                    (-xi[0] * xi[2] * r2 + xi[1].powi(3) * xi[2]) / denom,
                    -(xi[1] * xi[1]) * (xi[0] * xi[0] + xi[1] * xi[1]) / denom,
                ]
            }
        }
    }

    /// Same invariant sweep as [`Symbol2::validate`]. These symbols are real
    /// and even, so reality reduces to m(−ξ) = m(ξ).
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let xi = loop {
                let v = [
                    rng.gen_range(-8.0..8.0f64),
                    rng.gen_range(-8.0..8.0),
                    rng.gen_range(-8.0..8.0),
                ];
                if v.iter().map(|c| c * c).sum::<f64>() >= 0.25 {
                    break v;
                }
            };
            let m = self.eval(xi);
            let m_neg = self.eval([-xi[0], -xi[1], -xi[2]]);
            let mag = m.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);

            let reality = m
                .iter()
                .zip(&m_neg)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if reality > 1e-12 * mag.max(1.0) {
                return Err(self.invariant_err("reality", xi, reality));
            }

            let div = (xi[0] * m[0] + xi[1] * m[1] + xi[2] * m[2]).abs();
            let xi_len = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
            if div > 1e-12 * mag * xi_len {
                return Err(self.invariant_err("divergence-free", xi, div));
            }

            for s in [2.0, 0.5] {
                let ms = self.eval([s * xi[0], s * xi[1], s * xi[2]]);
                let drift = ms
                    .iter()
                    .zip(&m)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if drift > 1e-12 * mag.max(1.0) {
                    return Err(self.invariant_err("degree-0 homogeneity", xi, drift));
                }
            }
        }
        Ok(())
    }

    fn invariant_err(&self, what: &'static str, xi: [f64; 3], err: f64) -> SpectralError {
        SpectralError::SymbolInvariant {
            name: format!("{} (3d, at xi3={})", self.name(), xi[2]),
            what,
            xi0: xi[0],
            xi1: xi[1],
            err,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn riesz_hand_values() {
        let m = Symbol2::sqg();
        let v = m.eval([1.0, 0.0]);
        assert!(close(v[0], Complex64::ZERO, 1e-15));
        assert!(close(v[1], Complex64::new(0.0, 1.0), 1e-15));
        let v = m.eval([0.0, 1.0]);
        assert!(close(v[0], Complex64::new(0.0, -1.0), 1e-15));
        assert!(close(v[1], Complex64::ZERO, 1e-15));
    }

    #[test]
    fn porous_hand_values() {
        let m = Symbol2::ipm();
        let v = m.eval([1.0, 0.0]);
        assert!(close(v[0], Complex64::ZERO, 1e-15));
        assert!(close(v[1], Complex64::new(-1.0, 0.0), 1e-15));
        let v = m.eval([0.0, 1.0]);
        assert!(close(v[0], Complex64::ZERO, 1e-15));
        assert!(close(v[1], Complex64::ZERO, 1e-15));
        let v = m.eval([1.0, 1.0]);
        assert!(close(v[0], Complex64::new(0.5, 0.0), 1e-15));
        assert!(close(v[1], Complex64::new(-0.5, 0.0), 1e-15));
    }

    #[test]
    fn builtins_pass_validation() {
        Symbol2::sqg().validate(1000, 7).unwrap();
        Symbol2::ipm().validate(1000, 7).unwrap();
        Symbol3::builtin("ipm3d").unwrap().validate(1000, 7).unwrap();
        Symbol3::builtin("mg").unwrap().validate(1000, 7).unwrap();
    }

    #[test]
    fn validation_rejects_bad_symbols() {
        // constant vector: real and degree-0, but not divergence-free
        let m = Symbol2::custom("const", "1", "0").unwrap();
        match m.validate(100, 3) {
            Err(SpectralError::SymbolInvariant { what, .. }) => {
                assert_eq!(what, "divergence-free")
            }
            other => panic!("expected divergence failure, got {other:?}"),
        }
        // i(ξ₂, −ξ₁) without the |ξ| normalisation: fails only homogeneity
        let m = Symbol2::custom("unnorm", "i*xi2", "-i*xi1").unwrap();
        match m.validate(100, 3) {
            Err(SpectralError::SymbolInvariant { what, .. }) => {
                assert_eq!(what, "degree-0 homogeneity")
            }
            other => panic!("expected homogeneity failure, got {other:?}"),
        }
    }

    #[test]
    fn parity_split_is_exact() {
        let sqg = Symbol2::sqg();
        assert!(sqg.max_even_part(500, 11) <= 1e-14);
        assert!(sqg.is_odd(11));

        let ipm = Symbol2::ipm();
        assert!(ipm.max_odd_part(500, 11) <= 1e-14);
        assert!(!ipm.is_odd(11));

        // a mixed symbol: odd Riesz plus even porous, written as expressions
        let mixed = Symbol2::custom(
            "mixed",
            "i*(-xi2)/sqrt(xi1^2+xi2^2) + xi1*xi2/(xi1^2+xi2^2)",
            "i*xi1/sqrt(xi1^2+xi2^2) - xi1^2/(xi1^2+xi2^2)",
        )
        .unwrap();
        mixed.validate(500, 5).unwrap();
        let even = mixed.even_part();
        let odd = mixed.odd_part();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let xi = sample_xi2(&mut rng);
            let sqg_v = Symbol2::sqg().eval(xi);
            let ipm_v = Symbol2::ipm().eval(xi);
            let e = even.eval(xi);
            let o = odd.eval(xi);
            let s = mixed.eval(xi);
            for a in 0..2 {
                assert!(close(e[a], ipm_v[a], 1e-14));
                assert!(close(o[a], sqg_v[a], 1e-14));
                assert!(close(e[a] + o[a], s[a], 1e-14));
            }
        }
    }

    #[test]
    fn apply_matches_closed_form_drift() {
        // θ = cos x₁ under the Riesz pair: u = (0, -sin x₁)
        let grid = Grid::new(32).unwrap();
        let theta = Field::from_real_point_fn(grid, |x| x[0].cos());
        let u = Symbol2::sqg().apply(&theta);
        let want_y = Field::from_real_point_fn(grid, |x| -x[0].sin());
        assert!(u.component(0).c0() <= 1e-13);
        assert!(u.component(1).sub(&want_y).c0() <= 1e-13);
        // exactly divergence-free coefficient by coefficient
        assert!(u.div_defect_per_mode() <= 1e-13);
    }

    #[test]
    fn apply_zeroes_mean_and_nyquist() {
        let grid = Grid::new(16).unwrap();
        let nyq = -(grid.n() as i64) / 2;
        let theta = Field::from_mode_fn(grid, |k| {
            if k == [0, 0] || k[0] == nyq {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::ZERO
            }
        });
        let u = Symbol2::ipm().apply(&theta);
        assert!(u.c0() <= 1e-14);
    }

    #[test]
    fn porous3d_hand_value() {
        let m = Symbol3::builtin("ipm3d").unwrap();
        let v = m.eval([1.0, 0.0, 0.0]);
        assert!((v[0] - 0.0).abs() <= 1e-15);
        assert!((v[1] - 0.0).abs() <= 1e-15);
        assert!((v[2] + 1.0).abs() <= 1e-15);
    }

    #[test]
    fn mg_hand_value_and_plane_extension() {
        let m = Symbol3::builtin("mg").unwrap();
        let v = m.eval([1.0, 1.0, 1.0]);
        assert!((v[0] - 1.0).abs() <= 1e-15);
        assert!((v[1] + 0.5).abs() <= 1e-15);
        assert!((v[2] + 0.5).abs() <= 1e-15);
        assert_eq!(m.eval([3.0, -2.0, 0.0]), [0.0; 3]);
    }

    #[test]
    fn mg_is_unbounded_along_curved_paths() {
        // along ξ(ζ) = (ζ², ζ, 1) the third component grows like ζ²/2
        let m = Symbol3::builtin("mg").unwrap();
        let norm = |z: f64| {
            let v = m.eval([z * z, z, 1.0]);
            v.iter().map(|c| c * c).sum::<f64>().sqrt()
        };
        let at10 = norm(10.0);
        let at100 = norm(100.0);
        assert!(at10 > 25.0);
        assert!(at100 > 50.0 * at10);
        // while along straight rays it stays finite (degree-0)
        let v = m.eval([1e6, 1e6, 1e6]);
        let one = m.eval([1.0, 1.0, 1.0]);
        let drift: f64 = v
            .iter()
            .zip(&one)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(drift <= 1e-9);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(
            Symbol2::builtin("mg"),
            Err(SpectralError::UnknownSymbol(_))
        ));
        assert!(matches!(
            Symbol3::builtin("sqg"),
            Err(SpectralError::UnknownSymbol(_))
        ));
    }
}
