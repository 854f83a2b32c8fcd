//! Assembly of the new stress after a wave step.
//!
//! Everything here is bookkeeping for one identity. Writing θ₁ = θ + Θ,
//! u₁ = u + U, the updated defect against the output flux c_B·B + R₁ is
//!
//! ```text
//!   D = ∂_t θ₁ + ∇·(θ₁ ∘ u₁) − ∇·(c_B∘B + R₁),
//! ```
//!
//! with the time derivative taken by the one global difference stencil and
//! every flux in divergence form. Substituting the incoming closure
//! ∂_t θ + ∇·(θ∘u) = ∇·(c_A·A + R_J) and splitting the wave flux into the
//! pieces below makes D vanish identically — not asymptotically — because
//! each term the waves cannot represent is measured and carried:
//!
//! ```text
//!   R_T = ∇Δ⁻¹[ ∂_t Θ + ∇·(Θ ∘ u_ε) ]                    (transport)
//!   R_L = 𝒢[ θ_ε ∘ U ]                                    (low shift)
//!   R_H = 𝒢[ Θ ∘ U − Σ_k 2Re(θ̃_k ∘ conj ũ_k) ]           (off-diagonal)
//!   R_M = Θ∘(u−u_ε) + (θ−θ_ε)∘U + (c_A−c̃_A)·A + (R_J−R_ε) (mollification)
//!   R_S = Σ_k θ_k²∘(A(∇ξ_k) − A)                          (phase drift)
//!       + Σ_k [ 2Re(θ̃_k ∘ conj ũ_k) − θ_k²∘A(∇ξ_k) ]      (packet loss)
//! ```
//!
//! where 𝒢 extracts the gradient part (divergence-equal by construction),
//! A(∇ξ)(x) = m(∇ξ(x)) + m(−∇ξ(x)) is the even symbol at the transported
//! frequency, and R_ε = c_J·A + c_B·B reassembles the regularized frame
//! coefficients of R_J. The diagonal flux Σ_k 2Re(θ̃_k conj ũ_k) appears
//! twice with opposite signs, so what actually survives in ∇·R₁ is the full
//! product Θ∘U minus Σ_k θ_k²·A = e(1+ε)·A; the constant e·A is
//! divergence-free and e·ε = −(c̃_A + c_J) by the amplitude choice, closing
//! the ledger against the mollified input flux.

use std::rc::Rc;

use num_complex::Complex64;
use scalarforge_spectral::invdiv::inverse_divergence;
use scalarforge_spectral::{Field, Symbol2, VectorField};

use crate::compound::coeff_flux;
use crate::error::Result;
use crate::timefn::{TimeField, TimeVec};
use crate::wave::{two_re, WaveEngine, WaveSlice};
use crate::FD_DT;

/// The time-dependent fields a stress assembly reads. All live on the
/// synthesis grid; the coarse-grid history stays inside the wave engine.
pub struct StressInputs {
    pub theta: TimeField,
    pub u: TimeVec,
    pub theta_eps: TimeField,
    pub u_eps: TimeVec,
    /// Incoming A-frame coefficient and its space-time regularization.
    pub c_a: TimeField,
    pub c_a_reg: TimeField,
    /// Regularized frame coefficients of the incoming stress.
    pub c_j: TimeField,
    pub c_b: TimeField,
    pub r_j: TimeVec,
}

/// Sup norms of the individual families at one time.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct StressBreakdown {
    pub transport: f64,
    pub low: f64,
    pub high: f64,
    pub mollification: f64,
    pub phase_drift: f64,
    pub packet_loss: f64,
    pub total: f64,
}

/// R₁(t) with its per-family accounting.
pub struct StressSlice {
    pub t: f64,
    pub r1: VectorField,
    pub c0: StressBreakdown,
}

pub struct StressAssembler {
    engine: Rc<WaveEngine>,
    inputs: StressInputs,
}

/// m(g) + m(−g) at a real gradient field, pointwise.
fn even_symbol_at(sym: &Symbol2, grad: &VectorField) -> VectorField {
    let gx = grad.x.values();
    let gy = grad.y.values();
    let mut ax = Vec::with_capacity(gx.len());
    let mut ay = Vec::with_capacity(gx.len());
    for (a, b) in gx.iter().zip(gy) {
        let xi = [a.re, b.re];
        let plus = sym.eval(xi);
        let minus = sym.eval([-xi[0], -xi[1]]);
        ax.push(plus[0] + minus[0]);
        ay.push(plus[1] + minus[1]);
    }
    let g = grad.x.grid();
    VectorField::new(Field::from_values(g, ax), Field::from_values(g, ay))
}

impl StressAssembler {
    pub fn new(engine: Rc<WaveEngine>, inputs: StressInputs) -> Self {
        StressAssembler { engine, inputs }
    }

    pub fn engine(&self) -> &Rc<WaveEngine> {
        &self.engine
    }

    pub fn inputs(&self) -> &StressInputs {
        &self.inputs
    }

    /// R_ε = c_J·A + c_B·B from the regularized coefficients.
    pub fn r_eps(&self, t: f64) -> VectorField {
        let pair = self.engine.pair();
        coeff_flux(&self.inputs.c_j.at(t), pair.a())
            .add(&coeff_flux(&self.inputs.c_b.at(t), pair.b()))
    }

    /// Transport stress: the anti-divergence of ∂_t Θ + ∇·(Θ ∘ u_ε), using
    /// the same difference stencil as the defect probes. The source is
    /// divergence-form except for its mean mode, which is pure stencil noise
    /// (the waves are mean-free at every time) amplified by 1/2h; it is
    /// removed before inversion since constants never reach the defect.
    pub fn transport(&self, t: f64) -> Result<VectorField> {
        let h = FD_DT;
        let dtheta = self
            .engine
            .theta_total(t + h)?
            .sub(&self.engine.theta_total(t - h)?)
            .scale_re(1.0 / (2.0 * h));
        let slice = self.engine.slice(t)?;
        let flux = self.inputs.u_eps.at(t).mul_scalar(&slice.theta);
        let src = dtheta.add(&flux.divergence());
        let centered = src.sub(&Field::constant(src.grid(), src.mean()));
        Ok(inverse_divergence(&centered, None)?)
    }

    /// Low-shift stress: the gradient part of θ_ε ∘ U.
    pub fn low_interaction(&self, t: f64) -> Result<VectorField> {
        let slice = self.engine.slice(t)?;
        Ok(self.low_with(&slice, t))
    }

    fn low_with(&self, slice: &WaveSlice, t: f64) -> VectorField {
        slice
            .u
            .mul_scalar(&self.inputs.theta_eps.at(t))
            .gradient_part()
    }

    /// Diagonal data shared by the off-diagonal and self-interaction
    /// families: (Σ_k 2Re(θ̃_k ∘ conj ũ_k), phase-drift sum, packet-loss sum).
    fn diagonal_pieces(&self, slice: &WaveSlice) -> (VectorField, VectorField, VectorField) {
        let g = self.engine.fine();
        let sym = self.engine.symbol();
        let a = self.engine.pair().a();
        let a_const = VectorField::new(
            Field::constant(g, Complex64::new(a[0], 0.0)),
            Field::constant(g, Complex64::new(a[1], 0.0)),
        );
        let mut diag = VectorField::zero(g);
        let mut drift = VectorField::zero(g);
        let mut loss = VectorField::zero(g);
        for fam in &slice.families {
            let corrected = fam.corrected_amplitude();
            let demod = fam.demodulated_drift();
            let term = VectorField::new(
                two_re(&corrected.mul(&demod.x.conj())),
                two_re(&corrected.mul(&demod.y.conj())),
            );
            let theta_sq = fam.amplitude.mul(&fam.amplitude);
            let a_pw = even_symbol_at(sym, &fam.phase_gradient());
            drift = drift.add(&a_pw.sub(&a_const).mul_scalar(&theta_sq));
            loss = loss.add(&term.sub(&a_pw.mul_scalar(&theta_sq)));
            diag = diag.add(&term);
        }
        (diag, drift, loss)
    }

    /// Mollification stress: the four directly-formed gap fluxes.
    fn mollification_with(&self, slice: &WaveSlice, t: f64) -> VectorField {
        let du = self.inputs.u.at(t).sub(&self.inputs.u_eps.at(t));
        let dtheta = self.inputs.theta.at(t).sub(&self.inputs.theta_eps.at(t));
        let dc = self.inputs.c_a.at(t).sub(&self.inputs.c_a_reg.at(t));
        du.mul_scalar(&slice.theta)
            .add(&slice.u.mul_scalar(&dtheta))
            .add(&coeff_flux(&dc, self.engine.pair().a()))
            .add(&self.inputs.r_j.at(t).sub(&self.r_eps(t)))
    }

    pub fn mollification_gap(&self, t: f64) -> Result<VectorField> {
        let slice = self.engine.slice(t)?;
        Ok(self.mollification_with(&slice, t))
    }

    /// R₁(t) = R_T + R_L + R_H + R_M + R_S, with per-family sup norms.
    pub fn assemble(&self, t: f64) -> Result<StressSlice> {
        let r_t = self.transport(t)?;
        let slice = self.engine.slice(t)?;
        let r_l = self.low_with(&slice, t);
        let (diag, drift, loss) = self.diagonal_pieces(&slice);
        let r_h = slice
            .u
            .mul_scalar(&slice.theta)
            .sub(&diag)
            .gradient_part();
        let r_m = self.mollification_with(&slice, t);
        let c0 = StressBreakdown {
            transport: r_t.c0(),
            low: r_l.c0(),
            high: r_h.c0(),
            mollification: r_m.c0(),
            phase_drift: drift.c0(),
            packet_loss: loss.c0(),
            total: 0.0,
        };
        let r1 = r_t
            .add(&r_l)
            .add(&r_h)
            .add(&r_m)
            .add(&drift)
            .add(&loss);
        let c0 = StressBreakdown {
            total: r1.c0(),
            ..c0
        };
        Ok(StressSlice { t, r1, c0 })
    }
}
