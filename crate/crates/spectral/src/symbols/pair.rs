//! Direction pairs and the pointwise stress decomposition R = c_J·A + c_B·B.
//!
//! For an even-part-carrying multiplier, a plane wave along ξ contributes the
//! constant vector A(ξ) = m(ξ) + m(−ξ) to the quadratic flux. The
//! construction needs two integer directions whose A-vectors span the plane;
//! every symmetric stress then splits pointwise into coefficients (c_J, c_B)
//! against that basis. Selection over an integer ball is fully deterministic
//! so that runs are reproducible bit for bit.

use crate::error::{Result, SpectralError};
use crate::field::Field;
use crate::symbols::Symbol2;
use crate::vec2::VectorField;

/// Two frequency directions with spanning flux vectors A, B and the inverse
/// of M = [A|B] for pointwise decomposition.
#[derive(Clone, Copy, Debug)]
pub struct DirectionPair {
    xi1: [i64; 2],
    xi2: [i64; 2],
    a: [f64; 2],
    b: [f64; 2],
    det: f64,
    /// rows of M⁻¹: coefficients come out as c_J = inv[0]·R, c_B = inv[1]·R
    inv: [[f64; 2]; 2],
}

/// The constants the decomposition feeds into the rest of the construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructionConstants {
    /// ‖c_J·A‖- and ‖c_B·B‖-type bound: max over rows of ‖row‖₁·‖vector‖_∞.
    pub k1: f64,
    /// max row sum of |M⁻¹|: how large coefficients get per unit stress.
    pub coeff_norm: f64,
    /// amplitude-smallness budget 1/‖A‖_∞ + ‖row₁‖₁ of the pair.
    pub z_dec: f64,
    /// energy-profile floor constant, 2·z_dec.
    pub k0: f64,
}

impl DirectionPair {
    /// Deterministic search over integer frequencies |ξ| ≤ radius.
    ///
    /// Candidates are the canonical representatives of ±ξ (the
    /// lexicographically greater one), ordered by |ξ|² ascending and then
    /// lexicographically descending; the pair maximising |det[A|B]| wins,
    /// with strict comparison so ties keep the earlier pair. Symbols with no
    /// even part anywhere in the ball are reported as [`OddMultiplier`];
    /// balls whose A-vectors never span give [`SingularPair`].
    ///
    /// [`OddMultiplier`]: SpectralError::OddMultiplier
    /// [`SingularPair`]: SpectralError::SingularPair
    pub fn select(sym: &Symbol2, radius: f64) -> Result<DirectionPair> {
        let r = radius.floor() as i64;
        let r2 = radius * radius;
        let mut cands: Vec<[i64; 2]> = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                let canonical = x > 0 || (x == 0 && y > 0);
                if canonical && ((x * x + y * y) as f64) <= r2 {
                    cands.push([x, y]);
                }
            }
        }
        cands.sort_by_key(|&[x, y]| (x * x + y * y, std::cmp::Reverse((x, y))));

        let mut flux = Vec::with_capacity(cands.len());
        let mut max_flux: f64 = 0.0;
        for &xi in &cands {
            let a = even_flux(sym, xi)?;
            max_flux = max_flux.max(a[0].hypot(a[1]));
            flux.push(a);
        }
        if max_flux <= 1e-10 {
            return Err(SpectralError::OddMultiplier);
        }

        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..cands.len() {
            for j in (i + 1)..cands.len() {
                let det = flux[i][0] * flux[j][1] - flux[i][1] * flux[j][0];
                if best.map_or(true, |(_, _, d)| det.abs() > d.abs()) {
                    best = Some((i, j, det));
                }
            }
        }
        let (i, j, det) = best.expect("ball of radius >= 1 has at least two candidates");
        if det.abs() <= 1e-10 {
            return Err(SpectralError::SingularPair { det });
        }
        DirectionPair::from_parts(cands[i], cands[j], flux[i], flux[j])
    }

    /// The same pair for explicitly chosen directions.
    pub fn from_directions(sym: &Symbol2, xi1: [i64; 2], xi2: [i64; 2]) -> Result<DirectionPair> {
        DirectionPair::from_parts(xi1, xi2, even_flux(sym, xi1)?, even_flux(sym, xi2)?)
    }

    /// Assembles a pair from raw flux vectors (diagnostics and tests).
    pub fn from_parts(xi1: [i64; 2], xi2: [i64; 2], a: [f64; 2], b: [f64; 2]) -> Result<DirectionPair> {
        let det = a[0] * b[1] - a[1] * b[0];
        if det.abs() <= 1e-10 {
            return Err(SpectralError::SingularPair { det });
        }
        // M = [[a0, b0], [a1, b1]], columns A and B
        let inv = [[b[1] / det, -b[0] / det], [-a[1] / det, a[0] / det]];
        Ok(DirectionPair {
            xi1,
            xi2,
            a,
            b,
            det,
            inv,
        })
    }

    /// The same pair with the roles of the two directions exchanged: the wave
    /// direction of the next step is ξ⁽²⁾ and the leftover flux lands on ξ⁽¹⁾.
    /// Steps alternate between a pair and its swap.
    pub fn swapped(&self) -> DirectionPair {
        DirectionPair::from_parts(self.xi2, self.xi1, self.b, self.a)
            .expect("swap keeps |det| unchanged")
    }

    pub fn xi1(&self) -> [i64; 2] {
        self.xi1
    }

    pub fn xi2(&self) -> [i64; 2] {
        self.xi2
    }

    pub fn a(&self) -> [f64; 2] {
        self.a
    }

    pub fn b(&self) -> [f64; 2] {
        self.b
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn constants(&self) -> ConstructionConstants {
        let row1 = self.inv[0][0].abs() + self.inv[0][1].abs();
        let row2 = self.inv[1][0].abs() + self.inv[1][1].abs();
        let a_inf = self.a[0].abs().max(self.a[1].abs());
        let b_inf = self.b[0].abs().max(self.b[1].abs());
        let z_dec = 1.0 / a_inf + row1;
        ConstructionConstants {
            k1: (row1 * a_inf).max(row2 * b_inf),
            coeff_norm: row1.max(row2),
            z_dec,
            k0: 2.0 * z_dec,
        }
    }

    /// Pointwise coefficients of a single vector: R = c_J·A + c_B·B.
    pub fn coeffs(&self, r: [f64; 2]) -> (f64, f64) {
        (
            self.inv[0][0] * r[0] + self.inv[0][1] * r[1],
            self.inv[1][0] * r[0] + self.inv[1][1] * r[1],
        )
    }

    /// Pointwise coefficient fields of a vector field.
    pub fn decompose(&self, r: &VectorField) -> (Field, Field) {
        let grid = r.grid();
        let vx = r.component(0).values();
        let vy = r.component(1).values();
        let mut cj = Vec::with_capacity(vx.len());
        let mut cb = Vec::with_capacity(vx.len());
        for (x, y) in vx.iter().zip(vy.iter()) {
            cj.push(x * self.inv[0][0] + y * self.inv[0][1]);
            cb.push(x * self.inv[1][0] + y * self.inv[1][1]);
        }
        (Field::from_values(grid, cj), Field::from_values(grid, cb))
    }

    /// Rebuilds c_J·A + c_B·B; inverse of [`DirectionPair::decompose`].
    pub fn recompose(&self, cj: &Field, cb: &Field) -> VectorField {
        VectorField::new(
            cj.scale_re(self.a[0]).add(&cb.scale_re(self.b[0])),
            cj.scale_re(self.a[1]).add(&cb.scale_re(self.b[1])),
        )
    }
}

/// A(ξ) = m(ξ) + m(−ξ), checked real.
fn even_flux(sym: &Symbol2, xi: [i64; 2]) -> Result<[f64; 2]> {
    let x = [xi[0] as f64, xi[1] as f64];
    let p = sym.eval(x);
    let q = sym.eval([-x[0], -x[1]]);
    let a = [p[0] + q[0], p[1] + q[1]];
    let imag = a[0].im.abs().max(a[1].im.abs());
    if imag > 1e-10 * (1.0 + a[0].norm().max(a[1].norm())) {
        return Err(SpectralError::SymbolInvariant {
            name: sym.name().to_string(),
            what: "reality",
            xi0: x[0],
            xi1: x[1],
            err: imag,
        });
    }
    Ok([a[0].re, a[1].re])
}
