//! Measurement: norms, residual defects, conservation series, and the
//! rigidity identities for odd multipliers.
//!
//! Everything here is read-only: functions take finished states or
//! trajectories and return numbers. The two norms that matter most are
//!
//! * the `H⁻¹`-type defect norm `sup_{k≠0} |f̂(k)|/|k|` — the natural size of
//!   a residual that is promised to be a divergence, since `∇·R` divided by
//!   `|k|` recovers the size of `R` itself; and
//! * the levels audit, which replays every claimed `C⁰` bound on a compound
//!   state (spatial and advective, through order `L`) and reports the
//!   measured/budget table.
//!
//! The odd-multiplier functions (`hamiltonian_series`, `commutator_check`)
//! implement the conservation side: for a purely odd symbol the operator
//! `T_l` is antisymmetric, which makes `H = ∫θLθ` with `L̂(ξ) = |ξ|⁻¹ℓ(ξ)` a
//! conserved quantity and turns the transport trilinear form into a
//! commutator. Both are checked against direct quadrature, never asserted
//! from theory.

use num_complex::Complex64;
use scalarforge_spectral::{Field, Symbol2, VectorField};

use crate::compound::CompoundSolution;
use crate::error::{CoreError, Result};
use crate::quad::gauss_legendre_on;
use crate::step::FrequencyEnergyLevels;
use crate::timefn::{TimeField, TimeVec};
use crate::FD_DT;

/// `sup_{k≠0} |f̂(k)|/|k|` and the mode attaining it.
pub fn h_minus_one_sup(f: &Field) -> (f64, [i64; 2]) {
    let mut worst = 0.0f64;
    let mut mode = [0i64, 0];
    let coeffs = f.coeffs();
    f.grid().for_each_mode(|idx, k| {
        let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        if k2 > 0.0 {
            let w = coeffs[idx].norm() / k2.sqrt();
            if w > worst {
                worst = w;
                mode = k;
            }
        }
    });
    (worst, mode)
}

/// `2π (Σ_{k≠0} |f̂(k)|²/|k|²)^{1/2}` — the ℓ²-flavoured companion of
/// [`h_minus_one_sup`], normalized like [`Field::l2`].
pub fn h_minus_one_l2(f: &Field) -> f64 {
    let mut sum = 0.0f64;
    let coeffs = f.coeffs();
    f.grid().for_each_mode(|idx, k| {
        let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        if k2 > 0.0 {
            sum += coeffs[idx].norm_sqr() / k2;
        }
    });
    std::f64::consts::TAU * sum.sqrt()
}

/// Residual of the compound balance law at one time, in several norms.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct DefectReport {
    pub t: f64,
    /// `sup |D̂(k)|/|k|` of the defect.
    pub h_sup: f64,
    /// Mode attaining `h_sup`.
    pub worst_mode: [i64; 2],
    /// ℓ²-weighted companion norm of the defect.
    pub h_l2: f64,
    /// Raw L² norm of the defect.
    pub l2: f64,
    /// `sup |k·F̂|/|k|` of the residual stress flux alone (no coefficient
    /// part) — the size of what the defect is measured against.
    pub scale_r: f64,
    /// Same for the full flux `c·V + R`.
    pub scale_flux: f64,
    /// `h_sup / scale_r`, the headline relative defect.
    pub rel: f64,
}

/// Measures `∂_tθ + ∂_l(θu^l) − ∂_l(cV^l + R^l)` at time `t`, the time
/// derivative taken with the shared centered stencil.
pub fn residual_defect(sol: &CompoundSolution, t: f64) -> DefectReport {
    let d = sol.defect(t);
    let (h_sup, worst_mode) = h_minus_one_sup(&d);
    let h_l2 = h_minus_one_l2(&d);
    let l2 = d.l2();
    let (scale_r, _) = h_minus_one_sup(&sol.stress.at(t).divergence());
    let (scale_flux, _) = h_minus_one_sup(&sol.stress_flux(t).divergence());
    let rel = if scale_r > 0.0 {
        h_sup / scale_r
    } else if h_sup == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    DefectReport {
        t,
        h_sup,
        worst_mode,
        h_l2,
        l2,
        scale_r,
        scale_flux,
        rel,
    }
}

/// `max_{|α|=k} ‖∂^α f‖_{C⁰}` over the `k+1` distinct derivative words.
pub fn grad_sup(f: &Field, k: usize) -> f64 {
    if k == 0 {
        return f.c0();
    }
    let mut worst = 0.0f64;
    for i in 0..=k {
        let mut g = f.clone();
        for _ in 0..(k - i) {
            g = g.dx(0);
        }
        for _ in 0..i {
            g = g.dx(1);
        }
        worst = worst.max(g.c0());
    }
    worst
}

/// Componentwise [`grad_sup`] of a vector field.
pub fn vec_grad_sup(v: &VectorField, k: usize) -> f64 {
    grad_sup(v.component(0), k).max(grad_sup(v.component(1), k))
}

/// `∂_t f + u·∇f` with the shared centered stencil in time.
fn advective(f: &TimeField, u: &VectorField, t: f64) -> Field {
    let plus = f.at(t + FD_DT);
    let minus = f.at(t - FD_DT);
    let dt = plus.sub(&minus).scale_re(1.0 / (2.0 * FD_DT));
    dt.add(&u.dot_grad(&f.at(t)))
}

fn advective_comp(v: &TimeVec, u: &VectorField, t: f64, axis: usize) -> Field {
    let plus = v.at(t + FD_DT);
    let minus = v.at(t - FD_DT);
    let dt = plus
        .component(axis)
        .sub(minus.component(axis))
        .scale_re(1.0 / (2.0 * FD_DT));
    dt.add(&u.dot_grad(v.at(t).component(axis)))
}

/// One measured row of the levels audit.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LevelRow {
    pub what: &'static str,
    pub t: f64,
    pub measured: f64,
    pub budget: f64,
}

/// The full measured/budget table for a compound state.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LevelsAudit {
    pub rows: Vec<LevelRow>,
    /// Largest measured/budget ratio across the table.
    pub worst_ratio: f64,
}

const GRAD_TH_U: [&str; 4] = [
    "|(θ,u)|",
    "|∇(θ,u)|",
    "|∇²(θ,u)|",
    "|∇³(θ,u)|",
];
const GRAD_C: [&str; 4] = ["|c|", "|∇c|", "|∇²c|", "|∇³c|"];
const GRAD_R: [&str; 4] = ["|R|", "|∇R|", "|∇²R|", "|∇³R|"];
const ADV_C: [&str; 3] = ["|D̄_t c|", "|∇D̄_t c|", "|∇²D̄_t c|"];
const ADV_R: [&str; 3] = ["|D̄_t R|", "|∇D̄_t R|", "|∇²D̄_t R|"];

/// Replays every claimed bound of `levels` on `sol` at the given times:
/// spatial gradients of `θ` and `u` through order `L` against `Ξ^k e_v^{1/2}`,
/// of the coefficient against `Ξ^k e_R` and the residual stress against
/// `Ξ^k e_J`, advective derivatives of both stress pieces against the same
/// budgets carrying one extra `Ξ e_v^{1/2}`, and the multiplier relation
/// `u = T[θ]`. The first row whose measurement exceeds its budget aborts
/// with `LevelsViolated`; otherwise the full table is returned.
pub fn check_levels(
    sol: &CompoundSolution,
    sym: &Symbol2,
    levels: &FrequencyEnergyLevels,
    times: &[f64],
) -> Result<LevelsAudit> {
    levels.validate()?;
    let l = levels.l;
    let mut rows = Vec::new();
    let mut push = |what: &'static str, t: f64, measured: f64, budget: f64| -> Result<()> {
        if measured > budget {
            return Err(CoreError::LevelsViolated {
                what,
                measured,
                budget,
            });
        }
        rows.push(LevelRow {
            what,
            t,
            measured,
            budget,
        });
        Ok(())
    };
    for &t in times {
        let theta = sol.theta.at(t);
        let u = sol.u.at(t);
        let coeff = sol.coeff.at(t);
        let stress = sol.stress.at(t);

        let induced = sym.apply(&theta);
        let gap = u.sub(&induced).c0();
        push("|u − T[θ]|", t, gap, 1e-10 * u.c0().max(1.0))?;

        for k in 1..=l {
            let measured = grad_sup(&theta, k) + vec_grad_sup(&u, k);
            push(GRAD_TH_U[k], t, measured, levels.xi.powi(k as i32) * levels.ev.sqrt())?;
        }
        for k in 0..=l {
            let budget = levels.xi.powi(k as i32);
            push(GRAD_C[k], t, grad_sup(&coeff, k), budget * levels.er)?;
            push(GRAD_R[k], t, vec_grad_sup(&stress, k), budget * levels.ej)?;
        }
        let adv_unit = levels.xi * levels.ev.sqrt();
        let dc = advective(&sol.coeff, &u, t);
        let dr = [
            advective_comp(&sol.stress, &u, t, 0),
            advective_comp(&sol.stress, &u, t, 1),
        ];
        for k in 0..l {
            let budget = adv_unit * levels.xi.powi(k as i32);
            push(ADV_C[k], t, grad_sup(&dc, k), budget * levels.er)?;
            let dr_sup = grad_sup(&dr[0], k).max(grad_sup(&dr[1], k));
            push(ADV_R[k], t, dr_sup, budget * levels.ej)?;
        }
    }
    let worst_ratio = rows
        .iter()
        .map(|r| if r.budget > 0.0 { r.measured / r.budget } else { 0.0 })
        .fold(0.0f64, f64::max);
    Ok(LevelsAudit { rows, worst_ratio })
}

/// Hölder seminorm estimate: sup over dyadic grid separations `h = 2^j·dx`
/// (both axes) of `|f(x+he) − f(x)|/h^α`. A lower bound on the true
/// seminorm; the bias is the price of working on a grid.
pub fn holder_estimate(f: &Field, alpha: f64) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let vals = f.values();
    let dx = grid.dx();
    let mut worst = 0.0f64;
    let mut stride = 1usize;
    while stride <= n / 2 {
        let h = stride as f64 * dx;
        let scale = 1.0 / h.powf(alpha);
        for i in 0..n {
            let row = i * n;
            let shifted_row = ((i + stride) % n) * n;
            for j in 0..n {
                let v = vals[row + j];
                let right = (vals[row + (j + stride) % n] - v).norm();
                let up = (vals[shifted_row + j] - v).norm();
                worst = worst.max(right.max(up) * scale);
            }
        }
        stride *= 2;
    }
    worst
}

/// One requested Hölder exponent with its estimate and the interpolation
/// ceiling `‖f‖^{1−α}‖∇f‖^α` it must sit below.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct HolderRow {
    pub alpha: f64,
    pub estimate: f64,
    pub interpolation_bound: f64,
}

/// `C⁰`, gradient, advective-derivative, and Hölder measurements of a
/// time-indexed scalar at one time.
#[derive(Clone, Debug, serde::Serialize)]
pub struct NormsReport {
    pub t: f64,
    pub c0: f64,
    pub grad_c0: f64,
    pub advective_c0: f64,
    pub holder: Vec<HolderRow>,
}

pub fn norms_report(f: &TimeField, u: &TimeVec, t: f64, alphas: &[f64]) -> NormsReport {
    let now = f.at(t);
    let c0 = now.c0();
    let grad_c0 = grad_sup(&now, 1);
    let advective_c0 = advective(f, &u.at(t), t).c0();
    let holder = alphas
        .iter()
        .map(|&alpha| HolderRow {
            alpha,
            estimate: holder_estimate(&now, alpha),
            interpolation_bound: c0.powf(1.0 - alpha) * (2.0 * grad_c0).powf(alpha),
        })
        .collect();
    NormsReport {
        t,
        c0,
        grad_c0,
        advective_c0,
        holder,
    }
}

fn require_odd(sym: &Symbol2) -> Result<()> {
    let even = sym.max_even_part();
    if even > 1e-10 {
        return Err(CoreError::NotOdd(sym.name().to_string(), even));
    }
    Ok(())
}

/// `L̂(k) = −i (m(k)·k^⊥)/|k|²` — the multiplier of the self-adjoint
/// operator `L` with `u = T[θ]` and `L̂(ξ) = |ξ|⁻¹ℓ(ξ)`. Divergence-freeness
/// pins `m` to the direction `k^⊥ = (−k₂, k₁)`, and oddness makes `m`
/// purely imaginary, so the result is real.
pub fn hamiltonian_multiplier(sym: &Symbol2, k: [i64; 2]) -> f64 {
    let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
    if k2 == 0.0 {
        return 0.0;
    }
    let m = sym.eval([k[0] as f64, k[1] as f64]);
    let dot = m[0] * (-k[1] as f64) + m[1] * (k[0] as f64);
    (Complex64::new(0.0, -1.0) * dot).re / k2
}

/// `H = ∫θLθ = (2π)² Σ_{k≠0} |θ̂(k)|² L̂(k)`.
pub fn hamiltonian(theta: &Field, sym: &Symbol2) -> Result<f64> {
    require_odd(sym)?;
    let coeffs = theta.coeffs();
    let mut sum = 0.0f64;
    theta.grid().for_each_mode(|idx, k| {
        if k != [0, 0] {
            sum += coeffs[idx].norm_sqr() * hamiltonian_multiplier(sym, k);
        }
    });
    Ok(sum * (2.0 * std::f64::consts::PI).powi(2))
}

/// `H(t)` along a trajectory. Errors with `NotOdd` when the symbol has an
/// even part: the conservation statement only holds for odd multipliers.
pub fn hamiltonian_series(traj: &[(f64, Field)], sym: &Symbol2) -> Result<Vec<(f64, f64)>> {
    traj.iter()
        .map(|(t, theta)| Ok((*t, hamiltonian(theta, sym)?)))
        .collect()
}

/// `∫ f g dx` for real-content fields.
fn inner(f: &Field, g: &Field) -> f64 {
    f.mul(g).integral().re
}

/// The transport trilinear form `∫ θ (T_l[θ]) ∂_lφ dx` evaluated directly
/// and through its commutator rewriting
/// `½ (∫ θ T_l[θ] ∂_lφ − ∫ θ T_l[θ ∂_lφ])`,
/// which agree exactly when every `T_l` is antisymmetric — that is, when the
/// multiplier is odd. Returns `(direct, rewritten, relative difference)`.
pub fn commutator_check(theta: &Field, phi: &Field, sym: &Symbol2) -> Result<(f64, f64, f64)> {
    require_odd(sym)?;
    let u = sym.apply(theta);
    let direct = inner(theta, &u.dot_grad(phi));
    let mut inside = 0.0f64;
    for l in 0..2 {
        let weighted = theta.mul(&phi.dx(l));
        inside += inner(theta, sym.apply(&weighted).component(l));
    }
    let rewritten = 0.5 * (direct - inside);
    let scale = direct.abs().max(rewritten.abs()).max(1e-300);
    Ok((direct, rewritten, (direct - rewritten).abs() / scale))
}

/// Fourth-order centered time stencil — used where the quadratic defect
/// tolerance of the shared first-order probes would dominate the answer.
fn dt4(f: &TimeField, t: f64) -> Field {
    let h = FD_DT;
    let p2 = f.at(t + 2.0 * h);
    let p1 = f.at(t + h);
    let m1 = f.at(t - h);
    let m2 = f.at(t - 2.0 * h);
    p1.sub(&m1)
        .scale_re(8.0)
        .sub(&p2.sub(&m2))
        .scale_re(1.0 / (12.0 * h))
}

/// The degenerate-constraint functional split into its pieces.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct DegenerateReport {
    /// `∫∫ f ∂_tφ dx dt`.
    pub linear: f64,
    /// `∫∫ f T^l[f] ∂_lφ dx dt`.
    pub quadratic: f64,
    pub total: f64,
    /// Worst relative misalignment of `∇φ` with the required direction.
    pub residue: f64,
}

/// Evaluates `∫ f ∂_tφ + f T^l[f] ∂_lφ dx dt` over `window`, first checking
/// that `∇φ` stays parallel to the lattice direction `xi0` (the regime in
/// which the functional constrains weak limits). Time integration is
/// Gauss–Legendre with `nodes` points; `∂_tφ` uses a fourth-order stencil.
pub fn degenerate_constraint(
    f: &TimeField,
    phi: &TimeField,
    sym: &Symbol2,
    xi0: [i64; 2],
    window: [f64; 2],
    nodes: usize,
) -> Result<DegenerateReport> {
    let (ts, ws) = gauss_legendre_on(nodes, window[0], window[1]);
    let perp = [-xi0[1] as f64, xi0[0] as f64];
    let mut residue = 0.0f64;
    let mut linear = 0.0f64;
    let mut quadratic = 0.0f64;
    for (&t, &w) in ts.iter().zip(&ws) {
        let phi_t = phi.at(t);
        let gx = phi_t.dx(0);
        let gy = phi_t.dx(1);
        let ortho = gx.scale_re(perp[0]).add(&gy.scale_re(perp[1])).c0();
        let size = gx.c0().max(gy.c0());
        if size > 0.0 {
            residue = residue.max(ortho / size);
        }
        let f_t = f.at(t);
        linear += w * inner(&f_t, &dt4(phi, t));
        quadratic += w * inner(&f_t, &sym.apply(&f_t).dot_grad(&phi_t));
    }
    if residue > 1e-12 {
        return Err(CoreError::NotParallel(residue));
    }
    Ok(DegenerateReport {
        linear,
        quadratic,
        total: linear + quadratic,
        residue,
    })
}

/// `E(t) = ∫θ²` along a trajectory.
pub fn energy_series(traj: &[(f64, Field)]) -> Vec<(f64, f64)> {
    traj.iter()
        .map(|(t, theta)| {
            let l2 = theta.l2();
            (*t, l2 * l2)
        })
        .collect()
}

/// Mean of `θ` along a trajectory.
pub fn mean_series(traj: &[(f64, Field)]) -> Vec<(f64, f64)> {
    traj.iter().map(|(t, theta)| (*t, theta.mean().re)).collect()
}

/// Worst per-mode divergence coefficient, relative to the field size.
pub fn divergence_check(u: &VectorField) -> f64 {
    let scale = u.c0();
    if scale == 0.0 {
        return 0.0;
    }
    u.div_defect_per_mode() / scale
}

/// `∫∫ (θ − f) φ dx dt` over `window`, with the a-priori bound
/// `Σ_k ‖W_k‖_{C⁰} · sup_t ‖∇φ(t)‖_{L¹}` from the stored wave potentials.
/// Returns `(pairing, bound)`.
pub fn weak_pairing(
    f: &TimeField,
    theta: &TimeField,
    phi: &TimeField,
    window: [f64; 2],
    nodes: usize,
    w_sums: &[f64],
) -> (f64, f64) {
    let (ts, ws) = gauss_legendre_on(nodes, window[0], window[1]);
    let mut pairing = 0.0f64;
    let mut grad_l1 = 0.0f64;
    for (&t, &w) in ts.iter().zip(&ws) {
        let diff = theta.at(t).sub(&f.at(t));
        let phi_t = phi.at(t);
        pairing += w * inner(&diff, &phi_t);
        let gx = phi_t.dx(0);
        let gy = phi_t.dx(1);
        let vx = gx.values();
        let vy = gy.values();
        let mut mass = 0.0f64;
        for (a, b) in vx.iter().zip(vy.iter()) {
            mass += (a.norm_sqr() + b.norm_sqr()).sqrt();
        }
        let cell = phi_t.grid().dx();
        grad_l1 = grad_l1.max(mass * cell * cell);
    }
    let bound: f64 = w_sums.iter().sum::<f64>() * grad_l1;
    (pairing, bound)
}
