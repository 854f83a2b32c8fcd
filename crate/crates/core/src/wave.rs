//! Synthesis of the high-frequency corrective waves.
//!
//! One step works with a single integer direction ξ⁽¹⁾. Wave indices are
//! pairs I = (k, f): k counts time cells of width τ and fixes the frequency
//! decade 10^(k mod 2), f = ±1 picks the conjugate. Only the f = +1 half is
//! ever built; the other half is its bitwise conjugate in coefficient space.
//! Each half-wave is
//!
//! ```text
//!     Θ_I = P_I[ e^{iλξ_I} θ_I ],      U_I = T[Θ_I],
//! ```
//!
//! with P_I the ball projection around λ·10^(k mod 2)·ξ⁽¹⁾, ξ_I the
//! transported phase (linear part plus periodic correction, integrated on the
//! coarse grid and lifted spectrally) and θ_I the real amplitude
//!
//! ```text
//!     θ_I = e^{1/2}(t) · η_k(t) · sqrt(1 + ε),      ε = −(c̃_A + c_J)/e(t).
//! ```
//!
//! The sign of ε is what closes the books: summed over conjugate pairs the
//! diagonal wave flux carries Σ_k θ_I²·A = e(1+ε)·A, the constant part e·A
//! drops from the divergence, and the rest cancels the mollified input flux
//! (c̃_A + c_J)·A. For that cancellation to survive discretization, ε, the
//! amplitudes, and the flux coefficients they oppose must all live on the
//! same grid: the engine therefore takes the cancel field on the synthesis
//! grid and evaluates sqrt(1 + ε) pointwise there, so Σ_I θ_I² = e(1 + ε)
//! holds at every sample to rounding. Projection losses never spoil this —
//! they are measured after the fact through the corrected amplitudes
//! θ̃_I = e^{−iλξ_I}Θ_I and charged to the self-interaction stress.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::rc::Rc;

use num_complex::Complex64;
use scalarforge_spectral::invdiv::inverse_divergence;
use scalarforge_spectral::{BandSpec, DirectionPair, Field, Grid, Symbol2, VectorField};

use crate::error::{CoreError, Result};
use crate::profile::{EnergyProfile, TimePartition};
use crate::timefn::{TimeField, TimeVec};

/// 2·Re f as a field with exactly zero imaginary part.
pub fn two_re(f: &Field) -> Field {
    Field::from_values(
        f.grid(),
        f.values()
            .iter()
            .map(|v| Complex64::new(2.0 * v.re, 0.0))
            .collect(),
    )
}

/// The f = +1 half of one wave family, fully synthesized at a fixed time.
pub struct FamilyWave {
    pub k: i64,
    pub lambda: u32,
    /// λ·ξ̂_I — the exact integer carrier mode.
    pub lattice: [i64; 2],
    /// ξ̂_I = ±10^(k mod 2)·ξ⁽¹⁾ as the linear phase gradient.
    pub linear: [f64; 2],
    /// θ_I on the synthesis grid, real.
    pub amplitude: Field,
    /// Periodic phase correction ξ̃_I, lifted to the synthesis grid.
    pub xi_tilde: Field,
    pub ball: BandSpec,
    /// Θ_I, band-projected.
    pub theta_wave: Field,
    /// U_I = T[Θ_I].
    pub u_wave: VectorField,
}

impl FamilyWave {
    /// e^{iλξ_I}: the lattice mode evaluated through exact integer angles,
    /// times the pointwise factor e^{iλξ̃_I}. Unimodular by construction.
    pub fn modulation(&self) -> Field {
        let g = self.amplitude.grid();
        let lam = self.lambda as f64;
        let per = self.xi_tilde.values();
        let mut vals = vec![Complex64::default(); g.len()];
        g.for_each_point(|idx, x| {
            let angle = self.lattice[0] as f64 * x[0]
                + self.lattice[1] as f64 * x[1]
                + lam * per[idx].re;
            vals[idx] = Complex64::new(angle.cos(), angle.sin());
        });
        Field::from_values(g, vals)
    }

    /// ∇ξ_I = ξ̂_I + ∇ξ̃_I, real-valued.
    pub fn phase_gradient(&self) -> VectorField {
        let g = self.amplitude.grid();
        let base_x = Field::constant(g, Complex64::new(self.linear[0], 0.0));
        let base_y = Field::constant(g, Complex64::new(self.linear[1], 0.0));
        VectorField::new(
            base_x.add(&self.xi_tilde.dx(0)),
            base_y.add(&self.xi_tilde.dx(1)),
        )
    }

    /// θ̃_I = e^{−iλξ_I} Θ_I; equals θ_I exactly when the projection was
    /// lossless, and absorbs the clipped tails otherwise.
    pub fn corrected_amplitude(&self) -> Field {
        self.modulation().conj().mul(&self.theta_wave)
    }

    /// δθ_I = θ̃_I − θ_I.
    pub fn delta_theta(&self) -> Field {
        self.corrected_amplitude().sub(&self.amplitude)
    }

    /// ũ_I = e^{−iλξ_I} U_I componentwise.
    pub fn demodulated_drift(&self) -> VectorField {
        let conj_mod = self.modulation().conj();
        VectorField::new(
            conj_mod.mul(&self.u_wave.x),
            conj_mod.mul(&self.u_wave.y),
        )
    }

    /// m(∇ξ_I) evaluated pointwise at the real phase gradient.
    pub fn drift_coefficient(&self, sym: &Symbol2) -> VectorField {
        let grad = self.phase_gradient();
        let gx = grad.x.values();
        let gy = grad.y.values();
        let mut mx = Vec::with_capacity(gx.len());
        let mut my = Vec::with_capacity(gx.len());
        for (a, b) in gx.iter().zip(gy) {
            let m = sym.eval([a.re, b.re]);
            mx.push(m[0]);
            my.push(m[1]);
        }
        let g = self.amplitude.grid();
        VectorField::new(Field::from_values(g, mx), Field::from_values(g, my))
    }

    /// δu_I = ũ_I − θ_I·m(∇ξ_I).
    pub fn delta_drift(&self, sym: &Symbol2) -> VectorField {
        self.demodulated_drift()
            .sub(&self.drift_coefficient(sym).mul_scalar(&self.amplitude))
    }

    /// W_I with ∇·W_I = Θ_I, verified against the family ball.
    pub fn potential(&self) -> Result<VectorField> {
        Ok(inverse_divergence(&self.theta_wave, Some(&self.ball))?)
    }

    /// Frequency-support interval of the ball, as radii from the origin.
    fn radial_support(&self) -> [f64; 2] {
        match self.ball {
            BandSpec::WaveBall {
                lambda,
                dir,
                parity,
                ..
            } => {
                let d = ((dir[0] * dir[0] + dir[1] * dir[1]) as f64).sqrt();
                let center = 10f64.powi(parity as i32) * lambda as f64 * d;
                [0.5 * center, 1.5 * center]
            }
            _ => unreachable!("family bands are always wave balls"),
        }
    }
}

/// All waves alive at one time, plus their real-valued totals.
pub struct WaveSlice {
    pub t: f64,
    pub families: Vec<FamilyWave>,
    /// Θ = Σ_k 2 Re Θ_{(k,+)}.
    pub theta: Field,
    /// U = Σ_k 2 Re U_{(k,+)}.
    pub u: VectorField,
}

impl WaveSlice {
    /// Families of adjacent k alternate decades, so their balls must never
    /// touch; report whether every pair of distinct supports is disjoint.
    pub fn bands_disjoint(&self) -> bool {
        for (i, a) in self.families.iter().enumerate() {
            for b in &self.families[i + 1..] {
                let [alo, ahi] = a.radial_support();
                let [blo, bhi] = b.radial_support();
                if ahi >= blo && bhi >= alo {
                    return false;
                }
            }
        }
        true
    }
}

/// Builds wave slices for one step: one direction, one λ, one energy budget.
pub struct WaveEngine {
    sym: Symbol2,
    pair: DirectionPair,
    fine: Grid,
    coarse: Grid,
    lambda: u32,
    profile: EnergyProfile,
    partition: TimePartition,
    /// c̃_A + c_J on the synthesis (fine) grid — the flux to cancel.
    cancel: TimeField,
    /// Transporting drift on the coarse grid, for the phase flows.
    u_coarse: TimeVec,
    phase_dt: f64,
    phases: RefCell<BTreeMap<i64, Rc<crate::phase::PhaseFamily>>>,
    slices: RefCell<VecDeque<(u64, Rc<WaveSlice>)>>,
}

const SLICE_CACHE: usize = 2;

impl WaveEngine {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sym: Symbol2,
        pair: DirectionPair,
        fine: Grid,
        coarse: Grid,
        lambda: u32,
        profile: EnergyProfile,
        partition: TimePartition,
        cancel: TimeField,
        u_coarse: TimeVec,
        phase_dt: f64,
    ) -> Result<Self> {
        if lambda == 0 {
            return Err(CoreError::Config("wave frequency must be positive".into()));
        }
        if !(phase_dt > 0.0) {
            return Err(CoreError::Config(format!(
                "phase integrator step must be positive, got {phase_dt}"
            )));
        }
        Ok(WaveEngine {
            sym,
            pair,
            fine,
            coarse,
            lambda,
            profile,
            partition,
            cancel,
            u_coarse,
            phase_dt,
            phases: RefCell::new(BTreeMap::new()),
            slices: RefCell::new(VecDeque::new()),
        })
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn pair(&self) -> &DirectionPair {
        &self.pair
    }

    pub fn symbol(&self) -> &Symbol2 {
        &self.sym
    }

    pub fn fine(&self) -> Grid {
        self.fine
    }

    pub fn coarse(&self) -> Grid {
        self.coarse
    }

    pub fn profile(&self) -> &EnergyProfile {
        &self.profile
    }

    pub fn partition(&self) -> &TimePartition {
        &self.partition
    }

    /// The transported phase family for cell k, created on first use.
    pub fn family(&self, k: i64) -> Rc<crate::phase::PhaseFamily> {
        self.phases
            .borrow_mut()
            .entry(k)
            .or_insert_with(|| {
                Rc::new(crate::phase::PhaseFamily::new(
                    self.u_coarse.clone(),
                    self.coarse,
                    self.pair.xi1(),
                    k,
                    self.partition.tau(),
                    self.phase_dt,
                ))
            })
            .clone()
    }

    /// ε(x) = −(c̃_A + c_J)/e(t) on the synthesis grid, with its sup norm.
    /// Only meaningful where the budget is alive.
    pub fn epsilon(&self, t: f64) -> Result<(Vec<f64>, f64)> {
        let e_val = self.profile.at(t);
        if e_val == 0.0 {
            return Ok((vec![0.0; self.fine.len()], 0.0));
        }
        let cancel = self.cancel.at(t);
        let mut sup = 0.0f64;
        let eps: Vec<f64> = cancel
            .values()
            .iter()
            .map(|c| {
                let e = -c.re / e_val;
                sup = sup.max(e.abs());
                e
            })
            .collect();
        if sup > 0.5 {
            return Err(CoreError::EpsilonTooLarge { sup, t });
        }
        Ok((eps, sup))
    }

    /// θ_I for I = (k, +1): e^{1/2}(t)·η_k(t)·sqrt(1 + ε(x)), real, on the
    /// synthesis grid. `None` when the budget or the cutoff makes it vanish.
    pub fn amplitude(&self, k: i64, t: f64) -> Result<Option<Field>> {
        let e_sqrt = self.profile.sqrt_at(t);
        if e_sqrt == 0.0 {
            return Ok(None);
        }
        let eta = self.partition.weight(k, t)?;
        if eta == 0.0 {
            return Ok(None);
        }
        let (eps, _) = self.epsilon(t)?;
        let vals: Vec<f64> = eps.iter().map(|e| e_sqrt * eta * (1.0 + e).sqrt()).collect();
        Ok(Some(Field::from_real_values(self.fine, &vals)))
    }

    fn synthesize(&self, k: i64, t: f64) -> Result<Option<FamilyWave>> {
        let Some(amplitude) = self.amplitude(k, t)? else {
            return Ok(None);
        };
        let fam = self.family(k);
        let xi_tilde = fam.tilde(t, 1)?.resample(self.fine);
        let lattice = fam.lattice(self.lambda, 1);
        let linear = fam.linear_gradient(1);
        let ball = BandSpec::WaveBall {
            lambda: self.lambda,
            dir: fam.dir(),
            parity: fam.parity(),
            sign: 1,
        };
        let wave = FamilyWave {
            k,
            lambda: self.lambda,
            lattice,
            linear,
            amplitude,
            xi_tilde,
            ball,
            theta_wave: Field::zero(self.fine),
            u_wave: VectorField::zero(self.fine),
        };
        let carrier = wave.modulation().mul(&wave.amplitude);
        let theta_wave = wave.ball.project(&carrier)?;
        let u_wave = self.sym.apply(&theta_wave);
        Ok(Some(FamilyWave {
            theta_wave,
            u_wave,
            ..wave
        }))
    }

    /// Full detail at time t, cached shallowly (the stress assembly probes
    /// one t at a time; the time-difference probes use [`Self::theta_total`]).
    pub fn slice(&self, t: f64) -> Result<Rc<WaveSlice>> {
        let key = t.to_bits();
        if let Some((_, s)) = self.slices.borrow().iter().find(|(k, _)| *k == key) {
            return Ok(s.clone());
        }
        let mut families = Vec::new();
        for k in self.partition.active(t) {
            if let Some(f) = self.synthesize(k, t)? {
                families.push(f);
            }
        }
        let mut tv = vec![0.0; self.fine.len()];
        let mut ux = vec![0.0; self.fine.len()];
        let mut uy = vec![0.0; self.fine.len()];
        for f in &families {
            for (acc, v) in tv.iter_mut().zip(f.theta_wave.values()) {
                *acc += 2.0 * v.re;
            }
            for (acc, v) in ux.iter_mut().zip(f.u_wave.x.values()) {
                *acc += 2.0 * v.re;
            }
            for (acc, v) in uy.iter_mut().zip(f.u_wave.y.values()) {
                *acc += 2.0 * v.re;
            }
        }
        let slice = Rc::new(WaveSlice {
            t,
            families,
            theta: Field::from_real_values(self.fine, &tv),
            u: VectorField::new(
                Field::from_real_values(self.fine, &ux),
                Field::from_real_values(self.fine, &uy),
            ),
        });
        let mut cache = self.slices.borrow_mut();
        cache.push_back((key, slice.clone()));
        while cache.len() > SLICE_CACHE {
            cache.pop_front();
        }
        Ok(slice)
    }

    /// Θ(t) alone, without retaining per-family data — the lean path for
    /// time-difference probes.
    pub fn theta_total(&self, t: f64) -> Result<Field> {
        if let Some((_, s)) = self
            .slices
            .borrow()
            .iter()
            .find(|(k, _)| *k == t.to_bits())
        {
            return Ok(s.theta.clone());
        }
        let mut tv = vec![0.0; self.fine.len()];
        for k in self.partition.active(t) {
            if let Some(f) = self.synthesize(k, t)? {
                for (acc, v) in tv.iter_mut().zip(f.theta_wave.values()) {
                    *acc += 2.0 * v.re;
                }
            }
        }
        Ok(Field::from_real_values(self.fine, &tv))
    }
}
