//! Expansion of convolution operators applied to high-frequency wave packets.
//!
//! For an input Θ = e^{iλξ(x)} θ(x) and a Fourier multiplier T with symbol K̂,
//!
//! ```text
//! T[Θ](x) = e^{iλξ(x)} ( θ(x)·K̂(λ∇ξ(x)) + δ(x) ),
//! ```
//!
//! i.e. the operator acts, to leading order, as pointwise multiplication by
//! the symbol frozen at the local frequency λ∇ξ(x). Everything downstream
//! leans on the error δ being O(λ⁻¹).
//!
//! δ is computed two independent ways:
//!
//! * [`expand_exact`] — conjugation: δ := e^{−iλξ}·T[Θ] − θ·K̂(λ∇ξ), with T
//!   applied spectrally. The reconstruction identity then holds to transform
//!   roundoff by construction, and δ carries no quadrature error.
//! * [`expand_quadrature`] — the explicit double integral
//!
//!   ```text
//!   δ(x) = ∫₀¹ dr ∂_r ∫ e^{−iλ∇ξ(x)·h} e^{iZ(r,x,h)} θ(x−rh) K(h) dh,
//!   Z(r,x,h) = rλ ∫₀¹ hᵃhᵇ ∂_a∂_b ξ(x−sh) (1−s) ds,
//!   ```
//!
//!   quadrated in (r, h, s) for an absolutely integrable kernel. It serves as
//!   a cross-check of the conjugation path at sampled points, not as the
//!   production route.
//!
//! [`decay_study`] sweeps λ and fits the slope of log‖δ‖_{C⁰} against log λ;
//! the expected slope is −1.

use num_complex::Complex64;

use scalarforge_spectral::{BandSpec, Field, Grid, Symbol2, VectorField};

use crate::error::{CoreError, Result};
use crate::quad::gauss_legendre_on;

/// A single high-frequency packet e^{iλξ} θ with phase ξ(x) = ξ̂·x + ξ̃(x).
///
/// λ·ξ̂ must be a lattice vector so that e^{iλξ} is globally defined on the
/// torus, and the amplitude must be band-limited below λ/10 so the packet
/// occupies a clean frequency ball.
pub struct WavePacket {
    lambda: i64,
    linear: [f64; 2],
    lattice: [i64; 2],
    periodic: Option<Field>,
    amplitude: Field,
}

impl WavePacket {
    pub fn new(
        lambda: i64,
        linear: [f64; 2],
        periodic: Option<Field>,
        amplitude: Field,
    ) -> Result<WavePacket> {
        if lambda < 1 {
            return Err(CoreError::Config(format!(
                "packet frequency must be a positive integer, got {lambda}"
            )));
        }
        let mut lattice = [0i64; 2];
        for ax in 0..2 {
            let exact = lambda as f64 * linear[ax];
            let rounded = exact.round();
            if (exact - rounded).abs() > 1e-9 {
                return Err(CoreError::Config(format!(
                    "λ·ξ̂ must be integral for a globally defined phase; component {ax} is {exact}"
                )));
            }
            lattice[ax] = rounded as i64;
        }
        if let Some(p) = &periodic {
            if p.grid() != amplitude.grid() {
                return Err(CoreError::Config(
                    "phase perturbation and amplitude live on different grids".into(),
                ));
            }
            if p.max_imag() > 1e-10 {
                return Err(CoreError::Config(
                    "phase perturbation must be real".into(),
                ));
            }
        }
        let cap = lambda as f64 / 10.0;
        let rel = amplitude.mass_outside(|k| ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt() <= cap);
        if rel > 1e-8 {
            return Err(CoreError::Spectral(
                scalarforge_spectral::SpectralError::OutsideBand { rel },
            ));
        }
        Ok(WavePacket {
            lambda,
            linear,
            lattice,
            periodic,
            amplitude,
        })
    }

    pub fn grid(&self) -> Grid {
        self.amplitude.grid()
    }

    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    pub fn amplitude(&self) -> &Field {
        &self.amplitude
    }

    pub fn periodic(&self) -> Option<&Field> {
        self.periodic.as_ref()
    }

    /// The packet with phase −ξ and amplitude conj θ.
    pub fn conjugate(&self) -> WavePacket {
        WavePacket {
            lambda: self.lambda,
            linear: [-self.linear[0], -self.linear[1]],
            lattice: [-self.lattice[0], -self.lattice[1]],
            periodic: self.periodic.as_ref().map(|p| p.scale_re(-1.0)),
            amplitude: self.amplitude.conj(),
        }
    }

    /// ∇ξ = ξ̂ + ∇ξ̃ as a (real-valued) vector field on the grid.
    pub fn phase_gradient(&self) -> VectorField {
        let g = self.grid();
        let base_x = Field::constant(g, Complex64::new(self.linear[0], 0.0));
        let base_y = Field::constant(g, Complex64::new(self.linear[1], 0.0));
        match &self.periodic {
            None => VectorField::new(base_x, base_y),
            Some(p) => VectorField::new(base_x.add(&p.dx(0)), base_y.add(&p.dx(1))),
        }
    }

    /// e^{iλξ} on the grid: the lattice mode e^{i(λξ̂)·x} exactly, times the
    /// pointwise factor e^{iλξ̃}.
    pub fn modulation(&self) -> Field {
        let g = self.grid();
        let lam = self.lambda as f64;
        let per = self.periodic.as_ref().map(|p| p.values());
        let mut vals = vec![Complex64::default(); g.len()];
        g.for_each_point(|idx, x| {
            let mut angle = self.lattice[0] as f64 * x[0] + self.lattice[1] as f64 * x[1];
            if let Some(p) = per {
                angle += lam * p[idx].re;
            }
            vals[idx] = Complex64::new(angle.cos(), angle.sin());
        });
        Field::from_values(g, vals)
    }

    /// Θ = e^{iλξ} θ.
    pub fn modulated(&self) -> Field {
        self.modulation().mul(&self.amplitude)
    }

    /// e^{−iλξ} f, pointwise.
    pub fn demodulate(&self, f: &Field) -> Field {
        self.modulation().conj().mul(f)
    }
}

/// The operator being expanded. Band projections and drift multipliers cover
/// the construction; `Multiplier` admits arbitrary scalar symbols (used with
/// closed-form kernels when cross-checking against quadrature).
pub enum PacketOp<'a> {
    Drift(&'a Symbol2),
    Band(&'a BandSpec),
    Multiplier(&'a dyn Fn([f64; 2]) -> Complex64),
}

impl PacketOp<'_> {
    pub fn components(&self) -> usize {
        match self {
            PacketOp::Drift(_) => 2,
            _ => 1,
        }
    }

    /// K̂ at a continuous frequency vector, one value per output component.
    pub fn symbol_at(&self, k: [f64; 2]) -> Vec<Complex64> {
        match self {
            PacketOp::Drift(sym) => sym.eval(k).to_vec(),
            PacketOp::Band(band) => vec![Complex64::new(band.eval(k), 0.0)],
            PacketOp::Multiplier(f) => vec![f(k)],
        }
    }

    /// Apply T spectrally on the grid.
    pub fn apply(&self, f: &Field) -> Result<Vec<Field>> {
        Ok(match self {
            PacketOp::Drift(sym) => {
                let v = sym.apply(f);
                vec![v.x, v.y]
            }
            PacketOp::Band(band) => vec![band.project(f)?],
            PacketOp::Multiplier(m) => {
                vec![f.map_modes(|k, c| c * m([k[0] as f64, k[1] as f64]))]
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    ExactConjugation,
    Quadrature { r_nodes: usize, h_nodes: usize },
}

/// The two sides of the expansion, one field per operator component. For
/// `expand_quadrature` the fields live on the subsampled evaluation grid.
pub struct Expansion {
    pub leading: Vec<Field>,
    pub error: Vec<Field>,
    pub method: Method,
}

impl Expansion {
    /// The single (leading, error) pair of a scalar operator.
    pub fn single(&self) -> (&Field, &Field) {
        assert_eq!(self.leading.len(), 1, "operator has multiple components");
        (&self.leading[0], &self.error[0])
    }

    /// e^{iλξ}(leading + error), component by component.
    pub fn reconstruct(&self, packet: &WavePacket) -> Vec<Field> {
        let modulation = packet.modulation();
        self.leading
            .iter()
            .zip(&self.error)
            .map(|(l, e)| modulation.mul(&l.add(e)))
            .collect()
    }
}

/// Expand T[Θ] by exact conjugation: apply T spectrally, unwind the phase,
/// subtract the frozen-symbol term. The reconstruction identity is exact by
/// construction; the content of the lemma is that `error` is small.
pub fn expand_exact(op: &PacketOp, packet: &WavePacket) -> Result<Expansion> {
    let out = op.apply(&packet.modulated())?;
    let grad = packet.phase_gradient();
    let gx = grad.x.values();
    let gy = grad.y.values();
    let th = packet.amplitude.values();
    let lam = packet.lambda as f64;
    let g = packet.grid();

    let ncomp = op.components();
    let mut leading_vals = vec![vec![Complex64::default(); g.len()]; ncomp];
    for idx in 0..g.len() {
        let freq = [lam * gx[idx].re, lam * gy[idx].re];
        let sym = op.symbol_at(freq);
        for c in 0..ncomp {
            leading_vals[c][idx] = th[idx] * sym[c];
        }
    }

    let mut leading = Vec::with_capacity(ncomp);
    let mut error = Vec::with_capacity(ncomp);
    for (c, vals) in leading_vals.into_iter().enumerate() {
        let lead = Field::from_values(g, vals);
        let demod = packet.demodulate(&out[c]);
        error.push(demod.sub(&lead));
        leading.push(lead);
    }
    Ok(Expansion {
        leading,
        error,
        method: Method::ExactConjugation,
    })
}

/// An L¹-normalized Gaussian kernel, the standard absolutely integrable
/// stand-in for a frequency-localized operator at scale λ.
pub struct GaussianKernel {
    pub sigma: f64,
}

impl GaussianKernel {
    /// Spatial scale 2/λ, matching a kernel essentially supported on |h| ~ λ⁻¹.
    pub fn for_lambda(lambda: i64) -> GaussianKernel {
        GaussianKernel {
            sigma: 2.0 / lambda as f64,
        }
    }

    /// K̂(k) = exp(−σ²|k|²/2); K̂(0) = 1 since K has unit mass.
    pub fn hat(&self, k: [f64; 2]) -> f64 {
        (-0.5 * self.sigma * self.sigma * (k[0] * k[0] + k[1] * k[1])).exp()
    }

    /// K(h) = (2πσ²)⁻¹ exp(−|h|²/2σ²).
    pub fn spatial(&self, h: [f64; 2]) -> f64 {
        let s2 = self.sigma * self.sigma;
        (-(h[0] * h[0] + h[1] * h[1]) / (2.0 * s2)).exp()
            / (2.0 * std::f64::consts::PI * s2)
    }

    /// Radius beyond which K falls below `rel` times its peak.
    pub fn support_radius(&self, rel: f64) -> f64 {
        self.sigma * (-2.0 * rel.ln()).sqrt()
    }
}

/// Quadrature resolution for [`expand_quadrature`].
pub struct QuadSpec {
    /// Gauss nodes for the outer r-integral on [0, 1].
    pub r_nodes: usize,
    /// Gauss nodes per axis for the h-integral over the truncated square.
    pub h_nodes: usize,
    /// Gauss nodes for the s-integral inside Z.
    pub s_nodes: usize,
    /// Evaluate δ at every `stride`-th grid point per axis.
    pub stride: usize,
    /// Truncate the kernel where it falls below this fraction of its peak.
    pub trunc: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            r_nodes: 8,
            h_nodes: 48,
            s_nodes: 12,
            stride: 16,
            trunc: 1e-14,
        }
    }
}

/// Quadrate the explicit error formula for a Gaussian kernel at a subsampled
/// set of grid points. Returns an expansion on the subsampled grid; compare
/// its `error` against [`expand_exact`] (with the matching `Multiplier` op)
/// restricted to the same points.
pub fn expand_quadrature(
    kernel: &GaussianKernel,
    packet: &WavePacket,
    quad: &QuadSpec,
) -> Result<Expansion> {
    let g = packet.grid();
    let n = g.n();
    if quad.stride == 0 || n % quad.stride != 0 {
        return Err(CoreError::Config(format!(
            "stride {} does not divide the grid size {n}",
            quad.stride
        )));
    }
    let sub = Grid::new(n / quad.stride).map_err(scalarforge_spectral::SpectralError::from)?;
    let lam = packet.lambda as f64;

    let radius = kernel.support_radius(quad.trunc);
    let (h_nodes, h_weights) = gauss_legendre_on(quad.h_nodes, -radius, radius);
    let (r_nodes, r_weights) = gauss_legendre_on(quad.r_nodes, 0.0, 1.0);
    let (s_nodes, s_weights) = gauss_legendre_on(quad.s_nodes, 0.0, 1.0);

    let amp_tol = 1e-14 * (1.0 + packet.amplitude.c0());
    let amp_modes = packet.amplitude.sparse_modes(amp_tol);
    let phase_modes = packet
        .periodic
        .as_ref()
        .map(|p| p.sparse_modes(1e-14 * (1.0 + p.c0())))
        .unwrap_or_default();

    let grad = packet.phase_gradient();
    let gx = grad.x.values();
    let gy = grad.y.values();
    let th = packet.amplitude.values();

    // θ(y) and ∇θ(y) off-grid, one exponential per retained mode.
    let eval_amp = |y: [f64; 2]| -> (Complex64, Complex64, Complex64) {
        let mut f = Complex64::default();
        let mut d0 = Complex64::default();
        let mut d1 = Complex64::default();
        for &(k, c) in &amp_modes {
            let angle = k[0] as f64 * y[0] + k[1] as f64 * y[1];
            let e = c * Complex64::new(angle.cos(), angle.sin());
            f += e;
            d0 += Complex64::new(0.0, k[0] as f64) * e;
            d1 += Complex64::new(0.0, k[1] as f64) * e;
        }
        (f, d0, d1)
    };
    // hᵃhᵇ ∂_a∂_b ξ̃(y): only the periodic part has curvature.
    let eval_hess_quad = |y: [f64; 2], h: [f64; 2]| -> f64 {
        let mut acc = 0.0;
        for &(k, c) in &phase_modes {
            let kh = k[0] as f64 * h[0] + k[1] as f64 * h[1];
            let angle = k[0] as f64 * y[0] + k[1] as f64 * y[1];
            // ∂_a∂_b e^{ik·y} = −k_a k_b e^{ik·y}; the field is real, keep Re.
            acc -= kh * kh * (c * Complex64::new(angle.cos(), angle.sin())).re;
        }
        acc
    };

    let mut leading_vals = vec![Complex64::default(); sub.len()];
    let mut delta_vals = vec![Complex64::default(); sub.len()];
    let nh = h_nodes.len();

    for bi in 0..sub.n() {
        for bj in 0..sub.n() {
            let sub_idx = bi * sub.n() + bj;
            let fine_idx = g.at(bi * quad.stride, bj * quad.stride);
            let x = [g.x(bi * quad.stride), g.x(bj * quad.stride)];
            let freq = [lam * gx[fine_idx].re, lam * gy[fine_idx].re];
            leading_vals[sub_idx] = th[fine_idx] * kernel.hat(freq);

            // Per h-node, everything that does not depend on r.
            let mut weight = vec![Complex64::default(); nh * nh];
            let mut curvature = vec![0.0; nh * nh];
            for (ai, &ha) in h_nodes.iter().enumerate() {
                for (aj, &hb) in h_nodes.iter().enumerate() {
                    let h = [ha, hb];
                    let osc = -(freq[0] * ha + freq[1] * hb);
                    let base = kernel.spatial(h) * h_weights[ai] * h_weights[aj];
                    weight[ai * nh + aj] =
                        Complex64::new(osc.cos(), osc.sin()) * base;
                    // W(x,h) = ∫₀¹ hᵃhᵇ ∂_a∂_b ξ(x−sh) (1−s) ds, so Z = rλW.
                    let mut w = 0.0;
                    for (si, &s) in s_nodes.iter().enumerate() {
                        let y = [x[0] - s * ha, x[1] - s * hb];
                        w += s_weights[si] * (1.0 - s) * eval_hess_quad(y, h);
                    }
                    curvature[ai * nh + aj] = w;
                }
            }

            let mut delta = Complex64::default();
            for (ri, &r) in r_nodes.iter().enumerate() {
                let mut inner = Complex64::default();
                for (ai, &ha) in h_nodes.iter().enumerate() {
                    for (aj, &hb) in h_nodes.iter().enumerate() {
                        let w = curvature[ai * nh + aj];
                        let y = [x[0] - r * ha, x[1] - r * hb];
                        let (f, d0, d1) = eval_amp(y);
                        // ∂_r of e^{irλW} θ(x−rh): Z is linear in r.
                        let dr = Complex64::new(0.0, lam * w) * f - (ha * d0 + hb * d1);
                        let zphase = r * lam * w;
                        inner += weight[ai * nh + aj]
                            * Complex64::new(zphase.cos(), zphase.sin())
                            * dr;
                    }
                }
                delta += r_weights[ri] * inner;
            }
            delta_vals[sub_idx] = delta;
        }
    }

    Ok(Expansion {
        leading: vec![Field::from_values(sub, leading_vals)],
        error: vec![Field::from_values(sub, delta_vals)],
        method: Method::Quadrature {
            r_nodes: quad.r_nodes,
            h_nodes: quad.h_nodes,
        },
    })
}

/// Restrict a fine-grid field to every `stride`-th point (values only; used to
/// compare exact-conjugation output against quadrature output).
pub fn subsample(f: &Field, stride: usize) -> Result<Field> {
    let g = f.grid();
    if stride == 0 || g.n() % stride != 0 {
        return Err(CoreError::Config(format!(
            "stride {stride} does not divide the grid size {}",
            g.n()
        )));
    }
    let sub = Grid::new(g.n() / stride).map_err(scalarforge_spectral::SpectralError::from)?;
    let vals = f.values();
    let mut out = vec![Complex64::default(); sub.len()];
    for bi in 0..sub.n() {
        for bj in 0..sub.n() {
            out[bi * sub.n() + bj] = vals[g.at(bi * stride, bj * stride)];
        }
    }
    Ok(Field::from_values(sub, out))
}

/// Hard spectral truncation to |k| ≤ radius — for building packet amplitudes.
pub fn bandlimit(f: &Field, radius: f64) -> Field {
    f.map_modes(|k, c| {
        if ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt() <= radius {
            c
        } else {
            Complex64::default()
        }
    })
}

#[derive(Clone, Debug)]
pub struct DecayRow {
    pub lambda: i64,
    pub delta_theta_c0: f64,
    pub delta_u_c0: f64,
}

/// λ-sweep of the expansion error for a fixed phase and amplitude.
pub struct DecayStudy {
    pub rows: Vec<DecayRow>,
    /// Fitted d log‖δθ‖ / d log λ; `None` when the errors sit at roundoff
    /// (linear phase), in which case the CSV reports `exact`.
    pub slope_theta: Option<f64>,
    pub slope_u: Option<f64>,
}

impl DecayStudy {
    pub fn csv(&self) -> String {
        let fmt = |s: Option<f64>| match s {
            Some(v) => format!("{v:.6}"),
            None => "exact".to_string(),
        };
        let mut out = String::from("lambda,delta_theta_c0,delta_u_c0,slope_theta,slope_u\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.9e},{:.9e},{},{}\n",
                row.lambda,
                row.delta_theta_c0,
                row.delta_u_c0,
                fmt(self.slope_theta),
                fmt(self.slope_u),
            ));
        }
        out
    }
}

fn fit_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0.ln()).sum();
    let sy: f64 = points.iter().map(|p| p.1.ln()).sum();
    let sxx: f64 = points.iter().map(|p| p.0.ln().powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.0.ln() * p.1.ln()).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Sweep λ over `lambdas` with a fixed direction, phase perturbation, and
/// amplitude (re-band-limited to λ/10 at each λ). δθ comes from the packet
/// band projection, δu from the drift symbol.
pub fn decay_study(
    grid: Grid,
    sym: &Symbol2,
    dir: [i64; 2],
    periodic: &Field,
    amplitude: &Field,
    lambdas: &[i64],
) -> Result<DecayStudy> {
    if lambdas.len() < 3 {
        return Err(CoreError::Config(
            "a decay study needs at least three frequencies".into(),
        ));
    }
    if periodic.grid() != grid || amplitude.grid() != grid {
        return Err(CoreError::Config(
            "phase and amplitude must live on the study grid".into(),
        ));
    }
    let mut rows = Vec::new();
    for &lam in lambdas {
        let packet = WavePacket::new(
            lam,
            [dir[0] as f64, dir[1] as f64],
            Some(periodic.clone()),
            bandlimit(amplitude, lam as f64 / 10.0),
        )?;
        let ball = BandSpec::WaveBall {
            lambda: u32::try_from(lam)
                .map_err(|_| CoreError::Config(format!("frequency {lam} out of range")))?,
            dir,
            parity: 0,
            sign: 1,
        };
        let band_exp = expand_exact(&PacketOp::Band(&ball), &packet)?;
        let drift_exp = expand_exact(&PacketOp::Drift(sym), &packet)?;
        rows.push(DecayRow {
            lambda: lam,
            delta_theta_c0: band_exp.error[0].c0(),
            delta_u_c0: VectorField::new(drift_exp.error[0].clone(), drift_exp.error[1].clone())
                .c0(),
        });
    }
    let floor = 1e-13 * (1.0 + amplitude.c0());
    let slope_of = |pick: fn(&DecayRow) -> f64| -> Option<f64> {
        if rows.iter().any(|r| pick(r) <= floor) {
            None
        } else {
            Some(fit_log_slope(
                &rows
                    .iter()
                    .map(|r| (r.lambda as f64, pick(r)))
                    .collect::<Vec<_>>(),
            ))
        }
    };
    Ok(DecayStudy {
        slope_theta: slope_of(|r| r.delta_theta_c0),
        slope_u: slope_of(|r| r.delta_u_c0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_packet(grid: Grid, lambda: i64, wiggle: f64, amp_radius: f64) -> WavePacket {
        let periodic = Field::from_real_point_fn(grid, |x| {
            wiggle * (x[0].sin() + 0.6 * (x[0] + x[1]).cos())
        });
        let amplitude = bandlimit(
            &Field::from_real_point_fn(grid, |x| {
                1.0 + 0.5 * x[0].cos() + 0.3 * (x[1] + 0.4 * x[0]).sin()
            }),
            amp_radius,
        );
        WavePacket::new(lambda, [1.0, 0.0], Some(periodic), amplitude).unwrap()
    }

    #[test]
    fn linear_phase_constant_amplitude_is_exact() {
        let g = Grid::new(64).unwrap();
        let packet = WavePacket::new(
            8,
            [1.0, 0.0],
            None,
            Field::constant(g, Complex64::new(1.0, 0.0)),
        )
        .unwrap();
        let sym = Symbol2::ipm();
        let exp = expand_exact(&PacketOp::Drift(&sym), &packet).unwrap();
        assert!(exp.error[0].c0() < 1e-13 && exp.error[1].c0() < 1e-13);

        let ball = BandSpec::WaveBall {
            lambda: 8,
            dir: [1, 0],
            parity: 0,
            sign: 1,
        };
        let exp = expand_exact(&PacketOp::Band(&ball), &packet).unwrap();
        assert!(exp.error[0].c0() < 1e-13);
        // and the leading factor is exactly 1 at the ball center
        assert!(exp.leading[0].sub(packet.amplitude()).c0() < 1e-13);

        let kernel = GaussianKernel::for_lambda(8);
        let op = |k: [f64; 2]| Complex64::new(kernel.hat(k), 0.0);
        let exp = expand_exact(&PacketOp::Multiplier(&op), &packet).unwrap();
        assert!(exp.error[0].c0() < 1e-13);
    }

    #[test]
    fn zero_amplitude_gives_zero_expansion() {
        let g = Grid::new(32).unwrap();
        let packet = WavePacket::new(4, [0.0, 1.0], None, Field::zero(g)).unwrap();
        let sym = Symbol2::sqg();
        let exp = expand_exact(&PacketOp::Drift(&sym), &packet).unwrap();
        for c in 0..2 {
            assert_eq!(exp.leading[c].c0(), 0.0);
            assert_eq!(exp.error[c].c0(), 0.0);
        }
    }

    #[test]
    fn reconstruction_identity_holds_for_every_op() {
        let g = Grid::new(128).unwrap();
        let packet = lattice_packet(g, 32, 0.1, 3.0);
        let sqg = Symbol2::sqg();
        let ipm = Symbol2::ipm();
        let ball = BandSpec::WaveBall {
            lambda: 32,
            dir: [1, 0],
            parity: 0,
            sign: 1,
        };
        let annulus = BandSpec::Annulus { lambda: 1 };
        let kernel = GaussianKernel::for_lambda(32);
        let gauss = |k: [f64; 2]| Complex64::new(kernel.hat(k), 0.0);
        let ops: Vec<PacketOp> = vec![
            PacketOp::Drift(&sqg),
            PacketOp::Drift(&ipm),
            PacketOp::Band(&ball),
            PacketOp::Band(&annulus),
            PacketOp::Multiplier(&gauss),
        ];
        let theta_mod = packet.modulated();
        for op in &ops {
            let direct = op.apply(&theta_mod).unwrap();
            let exp = expand_exact(op, &packet).unwrap();
            let rebuilt = exp.reconstruct(&packet);
            for (d, r) in direct.iter().zip(&rebuilt) {
                let scale = 1.0 + d.c0();
                assert!(
                    d.sub(r).c0() <= 1e-12 * scale,
                    "reconstruction broke: {} vs scale {}",
                    d.sub(r).c0(),
                    scale
                );
            }
        }
    }

    #[test]
    fn conjugate_packet_gives_conjugate_expansion() {
        let g = Grid::new(128).unwrap();
        let packet = lattice_packet(g, 32, 0.08, 3.0);
        let conj = packet.conjugate();

        let sym = Symbol2::ipm();
        let a = expand_exact(&PacketOp::Drift(&sym), &packet).unwrap();
        let b = expand_exact(&PacketOp::Drift(&sym), &conj).unwrap();
        for c in 0..2 {
            assert!(b.leading[c].sub(&a.leading[c].conj()).c0() < 1e-13);
            assert!(b.error[c].sub(&a.error[c].conj()).c0() < 1e-13);
        }

        let ball_plus = BandSpec::WaveBall {
            lambda: 32,
            dir: [1, 0],
            parity: 0,
            sign: 1,
        };
        let ball_minus = BandSpec::WaveBall {
            lambda: 32,
            dir: [1, 0],
            parity: 0,
            sign: -1,
        };
        let a = expand_exact(&PacketOp::Band(&ball_plus), &packet).unwrap();
        let b = expand_exact(&PacketOp::Band(&ball_minus), &conj).unwrap();
        assert!(b.leading[0].sub(&a.leading[0].conj()).c0() < 1e-13);
        assert!(b.error[0].sub(&a.error[0].conj()).c0() < 1e-13);
    }

    #[test]
    fn plateau_band_leading_is_the_amplitude_bitwise() {
        let g = Grid::new(128).unwrap();
        // |∇ξ̃| ≤ 0.08·2 ≤ 1/4 = plateau radius for dir (1,0)
        let packet = lattice_packet(g, 32, 0.04, 3.0);
        let ball = BandSpec::WaveBall {
            lambda: 32,
            dir: [1, 0],
            parity: 0,
            sign: 1,
        };
        let grad = packet.phase_gradient();
        let lam = packet.lambda() as f64;
        for idx in 0..g.len() {
            let k = [
                lam * grad.x.values()[idx].re,
                lam * grad.y.values()[idx].re,
            ];
            assert!(ball.on_plateau(k), "phase gradient left the plateau");
        }
        let exp = expand_exact(&PacketOp::Band(&ball), &packet).unwrap();
        assert_eq!(exp.leading[0].values(), packet.amplitude().values());
    }

    #[test]
    fn quadrature_matches_exact_conjugation() {
        let g = Grid::new(128).unwrap();
        let packet = lattice_packet(g, 32, 0.1, 3.0);
        let kernel = GaussianKernel::for_lambda(32);
        let spec = QuadSpec {
            h_nodes: 40,
            stride: 16,
            ..QuadSpec::default()
        };
        let quad = expand_quadrature(&kernel, &packet, &spec).unwrap();
        let op = |k: [f64; 2]| Complex64::new(kernel.hat(k), 0.0);
        let exact = expand_exact(&PacketOp::Multiplier(&op), &packet).unwrap();
        let exact_sub = subsample(&exact.error[0], spec.stride).unwrap();
        let scale = exact_sub.c0();
        assert!(scale > 1e-6, "test has no signal: ‖δ‖ = {scale:.3e}");
        let diff = quad.error[0].sub(&exact_sub).c0();
        assert!(
            diff <= 1e-4 * scale,
            "quadrature drifted from conjugation: rel {:.3e}",
            diff / scale
        );
    }

    #[test]
    fn r_refinement_converges_monotonically() {
        let g = Grid::new(128).unwrap();
        // stronger wiggle so the r-dependence carries weight
        let packet = lattice_packet(g, 32, 0.25, 3.0);
        let kernel = GaussianKernel::for_lambda(32);
        let op = |k: [f64; 2]| Complex64::new(kernel.hat(k), 0.0);
        let exact = expand_exact(&PacketOp::Multiplier(&op), &packet).unwrap();
        let exact_sub = subsample(&exact.error[0], 16).unwrap();

        let mut errs = Vec::new();
        for r_nodes in [1, 2, 4, 8] {
            let spec = QuadSpec {
                r_nodes,
                h_nodes: 40,
                stride: 16,
                ..QuadSpec::default()
            };
            let quad = expand_quadrature(&kernel, &packet, &spec).unwrap();
            errs.push(quad.error[0].sub(&exact_sub).c0());
        }
        for w in errs.windows(2) {
            assert!(
                w[1] <= w[0] * 1.000001,
                "r-refinement failed to shrink the gap: {errs:?}"
            );
        }
    }

    #[test]
    fn errors_decay_as_one_over_lambda() {
        let g = Grid::new(256).unwrap();
        // The phase gradient must visit the band's skirt: on the plateau the
        // symbol is flat and the band error decays superpolynomially instead
        // of like λ⁻¹ (δ's leading term carries ∇K̂(λ∇ξ)).
        let periodic = Field::from_real_point_fn(g, |x| 0.35 * x[0].sin() + 0.18 * x[1].cos());
        let amplitude =
            Field::from_real_point_fn(g, |x| 1.0 + 0.4 * x[0].cos() + 0.2 * x[1].sin());
        let sym = Symbol2::ipm();
        let study = decay_study(g, &sym, [1, 0], &periodic, &amplitude, &[16, 32, 64]).unwrap();
        assert_eq!(study.rows.len(), 3);
        let st = study.slope_theta.expect("band error above roundoff");
        let su = study.slope_u.expect("drift error above roundoff");
        assert!((-1.5..=-0.5).contains(&st), "slope_theta = {st}");
        assert!((-1.5..=-0.5).contains(&su), "slope_u = {su}");
        let csv = study.csv();
        assert!(csv.starts_with("lambda,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn linear_phase_study_reports_exact() {
        let g = Grid::new(256).unwrap();
        let periodic = Field::zero(g);
        let amplitude = Field::constant(g, Complex64::new(1.0, 0.0));
        let sym = Symbol2::ipm();
        let study = decay_study(g, &sym, [1, 0], &periodic, &amplitude, &[16, 32, 64]).unwrap();
        assert!(study.slope_theta.is_none());
        assert!(study.csv().contains("exact"));
    }
}
