//! Two-component vector fields (velocities, stresses in divergence form).

use num_complex::Complex64;

use crate::field::Field;
use crate::grid::Grid;

#[derive(Clone, Debug)]
pub struct VectorField {
    pub x: Field,
    pub y: Field,
}

impl VectorField {
    pub fn new(x: Field, y: Field) -> Self {
        assert_eq!(x.grid(), y.grid(), "component grids differ");
        VectorField { x, y }
    }

    pub fn zero(grid: Grid) -> Self {
        VectorField {
            x: Field::zero(grid),
            y: Field::zero(grid),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.x.grid()
    }

    pub fn component(&self, axis: usize) -> &Field {
        match axis {
            0 => &self.x,
            1 => &self.y,
            _ => panic!("axis out of range"),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.x.add(&other.x), self.y.add(&other.y))
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.x.sub(&other.x), self.y.sub(&other.y))
    }

    pub fn scale(&self, s: Complex64) -> VectorField {
        VectorField::new(self.x.scale(s), self.y.scale(s))
    }

    pub fn scale_re(&self, s: f64) -> VectorField {
        VectorField::new(self.x.scale_re(s), self.y.scale_re(s))
    }

    /// ∂₁ f₁ + ∂₂ f₂.
    pub fn divergence(&self) -> Field {
        self.x.dx(0).add(&self.y.dx(1))
    }

    /// u · ∇f, assembled pointwise in value space.
    pub fn dot_grad(&self, f: &Field) -> Field {
        self.x.mul(&f.dx(0)).add(&self.y.mul(&f.dx(1)))
    }

    /// θ u as a vector (flux form).
    pub fn mul_scalar(&self, f: &Field) -> VectorField {
        VectorField::new(self.x.mul(f), self.y.mul(f))
    }

    /// Pointwise sup of the Euclidean modulus.
    pub fn c0(&self) -> f64 {
        self.x
            .values()
            .iter()
            .zip(self.y.values())
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest per-mode |k · û(k)| — the divergence-free defect, coefficient
    /// by coefficient, with no norm weighting.
    pub fn div_defect_per_mode(&self) -> f64 {
        let g = self.grid();
        let cx = self.x.coeffs();
        let cy = self.y.coeffs();
        let mut worst: f64 = 0.0;
        g.for_each_mode(|idx, k| {
            let d = cx[idx] * k[0] as f64 + cy[idx] * k[1] as f64;
            worst = worst.max(d.norm());
        });
        worst
    }

    /// The complementary Hodge piece: the gradient part k (k·F̂)/|k|² mode by
    /// mode, zero at k = 0. Its divergence equals the divergence of the whole
    /// field exactly, coefficient by coefficient, so replacing a flux by its
    /// gradient part never changes what the flux feeds into a scalar balance.
    pub fn gradient_part(&self) -> VectorField {
        let g = self.grid();
        let cx = self.x.coeffs();
        let cy = self.y.coeffs();
        let mut ox = vec![Complex64::default(); g.len()];
        let mut oy = vec![Complex64::default(); g.len()];
        g.for_each_mode(|idx, k| {
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            if k2 > 0.0 {
                let kdot = (cx[idx] * k[0] as f64 + cy[idx] * k[1] as f64) / k2;
                ox[idx] = kdot * k[0] as f64;
                oy[idx] = kdot * k[1] as f64;
            }
        });
        VectorField::new(Field::from_coeffs(g, ox), Field::from_coeffs(g, oy))
    }

    /// Hodge projection onto divergence-free fields (kills the gradient part
    /// mode by mode). Used to tidy roundoff, not to hide structure: callers
    /// assert the defect first.
    pub fn project_div_free(&self) -> VectorField {
        let g = self.grid();
        let cx = self.x.coeffs();
        let cy = self.y.coeffs();
        let mut ox = vec![Complex64::default(); g.len()];
        let mut oy = vec![Complex64::default(); g.len()];
        g.for_each_mode(|idx, k| {
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            if k2 == 0.0 {
                ox[idx] = cx[idx];
                oy[idx] = cy[idx];
            } else {
                let kdot = (cx[idx] * k[0] as f64 + cy[idx] * k[1] as f64) / k2;
                ox[idx] = cx[idx] - kdot * k[0] as f64;
                oy[idx] = cy[idx] - kdot * k[1] as f64;
            }
        });
        VectorField::new(Field::from_coeffs(g, ox), Field::from_coeffs(g, oy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    #[test]
    fn divergence_of_gradient_field() {
        let g = Grid::new(16).unwrap();
        let f = crate::field::Field::from_point_fn(g, |x| Complex64::new(x[0].cos(), 0.0));
        let v = VectorField::new(f.dx(0), f.dx(1));
        let lap = v.divergence();
        let expect = f.scale_re(-1.0);
        assert!(lap.sub(&expect).c0() < 1e-12);
    }

    #[test]
    fn hodge_split_is_exact_and_divergence_preserving() {
        let g = Grid::new(16).unwrap();
        let a = crate::field::Field::from_point_fn(g, |x| {
            Complex64::new((x[0] + 2.0 * x[1]).cos(), 0.0)
        });
        let b = crate::field::Field::from_point_fn(g, |x| {
            Complex64::new((2.0 * x[0] - x[1]).sin() + 0.3, 0.0)
        });
        let v = VectorField::new(a, b);
        let grad = v.gradient_part();
        let sol = v.project_div_free();
        assert!(grad.add(&sol).sub(&v).c0() < 1e-13);
        assert!(sol.div_defect_per_mode() < 1e-13);
        assert!(
            grad.divergence().sub(&v.divergence()).c0() < 1e-12,
            "gradient part must carry the full divergence"
        );
        // The k = 0 coefficient of the gradient part vanishes by definition.
        assert!(grad.x.mean().norm() < 1e-15 && grad.y.mean().norm() < 1e-15);
    }
}
