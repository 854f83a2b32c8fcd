//! Transported phase functions.
//!
//! Each wave family (k, ±) rides a phase ξ_I(t, x) = L_I(x) + ξ̃_I(t, x) whose
//! linear part L_I(x) = ±10^{[k]} ξ⁽¹⁾·x is fixed at the family's birth time
//! kτ and whose periodic part solves the coarse-scale transport equation
//!
//! ```text
//! (∂_t + u_ε·∇) ξ̃_I = −(±10^{[k]}) (u_ε · ξ⁽¹⁾),   ξ̃_I(kτ, ·) = 0,
//! ```
//!
//! by a spectral method of lines with RK4 in time and dealiased products.
//!
//! Evaluation is order-independent: the solver only ever integrates along the
//! fixed time lattice t_m = kτ + m·dt and finishes with a single partial RK4
//! step to the requested time, so the value at any t is a pure function of t.
//! Every 64th lattice node is retained, plus the most recent one, which makes
//! sequential sweeps cheap without unbounded memory.
//!
//! The minus-sign family is the exact negation of the plus family (the
//! equation is linear and negation is exact in floating point), so only one
//! integration runs per k.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use scalarforge_spectral::{Field, Grid, VectorField};

use crate::error::{CoreError, Result};
use crate::timefn::TimeVec;

/// Cache every this-many lattice nodes.
const NODE_STRIDE: i64 = 64;

/// One k-family of phases; both signs are served from the same integration.
pub struct PhaseFamily {
    u: TimeVec,
    grid: Grid,
    dir: [i64; 2],
    k: i64,
    ten_p: f64,
    birth: f64,
    dt: f64,
    nodes: RefCell<BTreeMap<i64, Rc<Field>>>,
    hot: RefCell<Option<(i64, Rc<Field>)>>,
}

impl PhaseFamily {
    /// `u` must be resolvable on `grid` for every queried time; `dt` is the
    /// integration step (well below both the family lifetime and the velocity
    /// time scale).
    pub fn new(u: TimeVec, grid: Grid, dir: [i64; 2], k: i64, tau: f64, dt: f64) -> PhaseFamily {
        assert!(dt > 0.0, "integration step must be positive");
        assert!(dir != [0, 0], "direction must be a nonzero lattice vector");
        PhaseFamily {
            u,
            grid,
            dir,
            k,
            ten_p: 10f64.powi(k.rem_euclid(2) as i32),
            birth: k as f64 * tau,
            dt,
            nodes: RefCell::new(BTreeMap::new()),
            hot: RefCell::new(None),
        }
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    /// [k] = k mod 2: the digit position of this family's frequency decade.
    pub fn parity(&self) -> u8 {
        self.k.rem_euclid(2) as u8
    }

    pub fn birth(&self) -> f64 {
        self.birth
    }

    pub fn dir(&self) -> [i64; 2] {
        self.dir
    }

    /// The scalar multiplier of the linear part: sign·10^{[k]}.
    pub fn factor(&self, sign: i8) -> f64 {
        sign as f64 * self.ten_p
    }

    /// ∇L_I, the frozen initial phase gradient.
    pub fn linear_gradient(&self, sign: i8) -> [f64; 2] {
        let f = self.factor(sign);
        [f * self.dir[0] as f64, f * self.dir[1] as f64]
    }

    /// λ·∇L_I as an exact lattice vector.
    pub fn lattice(&self, lambda: u32, sign: i8) -> [i64; 2] {
        let f = sign as i64 * 10i64.pow(self.parity() as u32) * lambda as i64;
        [f * self.dir[0], f * self.dir[1]]
    }

    fn plateau_bound(&self) -> f64 {
        let d = ((self.dir[0] * self.dir[0] + self.dir[1] * self.dir[1]) as f64).sqrt();
        0.25 * self.ten_p * d
    }

    fn forcing(&self, u: &VectorField) -> Field {
        u.x.scale_re(self.dir[0] as f64)
            .add(&u.y.scale_re(self.dir[1] as f64))
            .scale_re(-self.ten_p)
    }

    fn rhs(&self, t: f64, y: &Field) -> Field {
        let u = self.u.at(t);
        self.forcing(&u).sub(&u.dot_grad(y)).dealias()
    }

    fn rk4_step(&self, y: &Field, t: f64, h: f64) -> Result<Field> {
        let k1 = self.rhs(t, y);
        let k2 = self.rhs(t + 0.5 * h, &y.add(&k1.scale_re(0.5 * h)));
        let k3 = self.rhs(t + 0.5 * h, &y.add(&k2.scale_re(0.5 * h)));
        let k4 = self.rhs(t + h, &y.add(&k3.scale_re(h)));
        let next = y.add(
            &k1.add(&k2.scale_re(2.0))
                .add(&k3.scale_re(2.0))
                .add(&k4)
                .scale_re(h / 6.0),
        );
        self.check_plateau(&next, t + h)?;
        Ok(next)
    }

    fn check_plateau(&self, y: &Field, t: f64) -> Result<()> {
        let drift = VectorField::new(y.dx(0), y.dx(1)).c0();
        let bound = self.plateau_bound();
        if drift > bound {
            return Err(CoreError::PhaseEscape {
                k: self.k,
                sign: 1,
                drift: drift / bound,
                t,
            });
        }
        Ok(())
    }

    /// ξ̃₊ at lattice node m, integrating from the nearest known node.
    fn node(&self, m: i64) -> Result<Rc<Field>> {
        if m == 0 {
            return Ok(Rc::new(Field::zero(self.grid)));
        }
        if let Some((hm, f)) = &*self.hot.borrow() {
            if *hm == m {
                return Ok(f.clone());
            }
        }
        if let Some(f) = self.nodes.borrow().get(&m) {
            return Ok(f.clone());
        }

        let dirn = m.signum();
        let mut idx = 0i64;
        let mut y = Rc::new(Field::zero(self.grid));
        {
            let nodes = self.nodes.borrow();
            let aligned = if dirn > 0 {
                nodes.range(1..=m).next_back()
            } else {
                nodes.range(m..=-1).next()
            };
            if let Some((&i, f)) = aligned {
                idx = i;
                y = f.clone();
            }
        }
        if let Some((hm, f)) = &*self.hot.borrow() {
            if hm.signum() == dirn && hm.abs() <= m.abs() && hm.abs() > idx.abs() {
                idx = *hm;
                y = f.clone();
            }
        }

        let h = dirn as f64 * self.dt;
        while idx != m {
            let t0 = self.birth + idx as f64 * self.dt;
            y = Rc::new(self.rk4_step(&y, t0, h)?);
            idx += dirn;
            if idx % NODE_STRIDE == 0 {
                self.nodes.borrow_mut().insert(idx, y.clone());
            }
        }
        *self.hot.borrow_mut() = Some((m, y.clone()));
        Ok(y)
    }

    /// The periodic part ξ̃_I(t, ·).
    pub fn tilde(&self, t: f64, sign: i8) -> Result<Field> {
        let s = t - self.birth;
        let m = (s / self.dt).trunc() as i64;
        let rem = s - m as f64 * self.dt;
        let at_node = self.node(m)?;
        let plus = if rem.abs() <= 1e-13 * self.dt.max(s.abs()) {
            (*at_node).clone()
        } else {
            let t0 = self.birth + m as f64 * self.dt;
            self.rk4_step(&at_node, t0, rem)?
        };
        Ok(if sign < 0 { plus.scale_re(-1.0) } else { plus })
    }

    /// ∇ξ_I(t, ·) = sign·10^{[k]} ξ⁽¹⁾ + ∇ξ̃_I.
    pub fn gradient(&self, t: f64, sign: i8) -> Result<VectorField> {
        let tilde = self.tilde(t, sign)?;
        let lin = self.linear_gradient(sign);
        Ok(VectorField::new(
            tilde
                .dx(0)
                .add(&Field::constant(self.grid, lin[0].into())),
            tilde
                .dx(1)
                .add(&Field::constant(self.grid, lin[1].into())),
        ))
    }

    /// Sup of the finite-difference transport residual
    /// ∂_t^{FD} ξ̃ + u_ε·∇ξ̃ + sign·10^{[k]}(u_ε·ξ⁽¹⁾) at time t.
    pub fn transport_residual(&self, t: f64, sign: i8, fd_dt: f64) -> Result<f64> {
        let fwd = self.tilde(t + fd_dt, sign)?;
        let bwd = self.tilde(t - fd_dt, sign)?;
        let dt_term = fwd.sub(&bwd).scale_re(0.5 / fd_dt);
        let here = self.tilde(t, sign)?;
        let u = self.u.at(t);
        let residual = dt_term
            .add(&u.dot_grad(&here).dealias())
            .sub(&self.forcing(&u).scale_re(sign as f64).dealias());
        Ok(residual.c0())
    }
}
