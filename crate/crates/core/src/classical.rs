//! Linear (low-excitation) dynamics of cavity, emitter A and ensemble, the
//! weakly driven steady state and the polariton structure of the effective
//! two-mode problem.
//!
//! Amplitudes `y = (α, β_A, β_1 … β_N)` obey `dy/dt = -i K y - i η e_0` with
//! the complex symmetric matrix
//!
//! ```text
//!     | Δ_c - iκ   g_A          Gᵀ |
//! K = | g_A        Δ_A - iγ_A   Vᵀ |
//!     | G          V            M  |
//! ```
//!
//! written in the frame of the drive laser when one is present, otherwise in
//! the frame rotating at `ω_A`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cslinalg::SOLVE_RESIDUAL_TOL;
use crate::elimination::EffectiveParams;
use crate::ode::{integrate_with, Rk4Options};
use crate::{CouplingSet, Error, Result, Subsystem, C64};

/// Soft bound on ensemble amplitudes for the linear picture to hold.
pub const LOW_EXCITATION_BOUND: f64 = 0.3;

/// Default relative per-step error tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    pub alpha: C64,
    pub beta_a: C64,
    pub beta: DVector<C64>,
}

impl ClassicalState {
    pub fn new(alpha: C64, beta_a: C64, beta: DVector<C64>) -> Self {
        Self { alpha, beta_a, beta }
    }

    /// Subsystem-only state with `n` unexcited ensemble emitters.
    pub fn subsystem(alpha: C64, beta_a: C64, n: usize) -> Self {
        Self { alpha, beta_a, beta: DVector::zeros(n) }
    }

    fn to_vector(&self) -> DVector<C64> {
        let mut y = DVector::zeros(self.beta.len() + 2);
        y[0] = self.alpha;
        y[1] = self.beta_a;
        y.rows_mut(2, self.beta.len()).copy_from(&self.beta);
        y
    }

    fn from_vector(y: &DVector<C64>) -> Self {
        Self { alpha: y[0], beta_a: y[1], beta: y.rows(2, y.len() - 2).into_owned() }
    }

    /// `|α|² + |β_A|² + ‖β‖²`.
    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta_a.norm_sqr() + self.beta.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveSpec {
    pub eta: f64,
    pub omega_l: f64,
}

impl DriveSpec {
    pub fn new(eta: f64, omega_l: f64) -> Result<Self> {
        if !(eta >= 0.0) || !eta.is_finite() || !omega_l.is_finite() {
            return Err(Error::InvalidParameter(format!("drive strength {eta} must be finite and >= 0")));
        }
        Ok(Self { eta, omega_l })
    }

    /// Laser-frame detunings `(Δ̃_c, Δ̃_A, Δ̃_B)`.
    pub fn detunings(&self, sub: &Subsystem, delta_b: f64) -> (f64, f64, f64) {
        let shift = sub.omega_a - self.omega_l;
        (sub.delta_c() + shift, shift, delta_b + shift)
    }

    /// Amount added to every diagonal detuning when moving from the `ω_A`
    /// frame into the laser frame.
    fn shift(&self, omega_a: f64) -> f64 {
        omega_a - self.omega_l
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    /// Soft-check messages (low-excitation bound, step heuristic).
    pub warnings: Vec<String>,
}

/// Full `(N+2) × (N+2)` matrix `K`; `shift` is added to every detuning.
pub fn full_matrix(sub: &Subsystem, couplings: &CouplingSet, shift: f64) -> DMatrix<C64> {
    let n = couplings.n();
    let mut k = DMatrix::zeros(n + 2, n + 2);
    k[(0, 0)] = C64::new(sub.delta_c() + shift, -sub.kappa);
    k[(1, 1)] = C64::new(shift, -sub.gamma_a);
    k[(0, 1)] = C64::from(couplings.g_a);
    k[(1, 0)] = C64::from(couplings.g_a);
    for j in 0..n {
        k[(0, j + 2)] = couplings.g[j];
        k[(j + 2, 0)] = couplings.g[j];
        k[(1, j + 2)] = couplings.v[j];
        k[(j + 2, 1)] = couplings.v[j];
        for l in 0..n {
            k[(j + 2, l + 2)] = couplings.m[(j, l)];
        }
        k[(j + 2, j + 2)] += shift;
    }
    k
}

/// Effective `2 × 2` matrix; `shift` is added to both detunings.
pub fn effective_matrix(p: &EffectiveParams, shift: f64) -> DMatrix<C64> {
    let c = p.coupling();
    DMatrix::from_row_slice(2, 2, &[
        C64::new(p.delta_c_eff + shift, -p.kappa_eff), c,
        c, C64::new(p.delta_a_eff + shift, -p.gamma_a_eff),
    ])
}

fn integrate_linear(
    k: DMatrix<C64>,
    eta: f64,
    y0: DVector<C64>,
    opts: &Rk4Options,
) -> Result<ClassicalTrajectory> {
    let mut warnings = Vec::new();
    if opts.rel_tol.is_none() {
        let scale = k.iter().fold(0.0f64, |m, z| m.max(z.norm())) * k.nrows() as f64;
        if opts.dt * scale > 1.0 {
            warnings.push(format!("fixed step dt = {} is large against matrix scale {scale:.3e}", opts.dt));
        }
    }
    let mk = k.map(|z| -C64::i() * z);
    let drive = C64::new(0.0, -eta);
    let rhs = |_t: f64, y: &DVector<C64>| {
        let mut d = &mk * y;
        d[0] += drive;
        d
    };
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut max_beta = 0.0f64;
    integrate_with(rhs, y0, opts, |t, y| {
        let s = ClassicalState::from_vector(y);
        max_beta = s.beta.iter().fold(max_beta, |m, z| m.max(z.norm()));
        times.push(t);
        states.push(s);
        Ok(())
    })?;
    if max_beta >= LOW_EXCITATION_BOUND {
        warnings.push(format!("ensemble amplitude reached {max_beta:.3}, beyond the low-excitation regime"));
    }
    Ok(ClassicalTrajectory { times, states, warnings })
}

/// Integrate the full linear system with RK4.
pub fn integrate_full_classical(
    sub: &Subsystem,
    couplings: &CouplingSet,
    initial: &ClassicalState,
    drive: Option<&DriveSpec>,
    opts: &Rk4Options,
) -> Result<ClassicalTrajectory> {
    if initial.beta.len() != couplings.n() {
        return Err(Error::DimensionMismatch { expected: couplings.n(), got: initial.beta.len() });
    }
    let shift = drive.map_or(0.0, |d| d.shift(sub.omega_a));
    let k = full_matrix(sub, couplings, shift);
    integrate_linear(k, drive.map_or(0.0, |d| d.eta), initial.to_vector(), opts)
}

/// Integrate the effective two-mode system.
pub fn integrate_effective_classical(
    p: &EffectiveParams,
    alpha: C64,
    beta_a: C64,
    drive: Option<&DriveSpec>,
    opts: &Rk4Options,
) -> Result<ClassicalTrajectory> {
    let omega_a = p.omega_a_eff - p.delta_a_eff;
    let shift = drive.map_or(0.0, |d| d.shift(omega_a));
    let k = effective_matrix(p, shift);
    let y0 = DVector::from_vec(vec![alpha, beta_a]);
    integrate_linear(k, drive.map_or(0.0, |d| d.eta), y0, opts)
}

/// Effective parameters by reducing the linear equations of motion.
///
/// Substitutes the stationary ensemble amplitudes into the subsystem
/// equations through a Schur complement of `K`, independently of
/// [`crate::elimination::effective_params`].
pub fn eliminate_classical(sub: &Subsystem, couplings: &CouplingSet) -> Result<EffectiveParams> {
    let n = couplings.n();
    let k = full_matrix(sub, couplings, 0.0);
    let k_ss = k.view((0, 0), (2, 2)).into_owned();
    if n == 0 {
        return Ok(params_from_reduced(sub, &k_ss));
    }
    let k_bs = k.view((2, 0), (n, 2)).into_owned();
    let k_sb = k.view((0, 2), (2, n)).into_owned();
    let m = k.view((2, 2), (n, n)).into_owned();
    let x = m.clone().lu().solve(&k_bs).ok_or(Error::EliminationSingular { residual: f64::INFINITY })?;
    let residual = (&m * &x - &k_bs).norm() / k_bs.norm().max(f64::MIN_POSITIVE);
    if !(residual <= SOLVE_RESIDUAL_TOL) {
        return Err(Error::EliminationSingular { residual });
    }
    let reduced = k_ss - k_sb * x;
    Ok(params_from_reduced(sub, &reduced))
}

fn params_from_reduced(sub: &Subsystem, r: &DMatrix<C64>) -> EffectiveParams {
    let delta_c_eff = r[(0, 0)].re;
    let delta_a_eff = r[(1, 1)].re;
    EffectiveParams {
        delta_c_eff,
        delta_a_eff,
        g_a_eff: r[(0, 1)].re,
        kappa_eff: -r[(0, 0)].im,
        gamma_a_eff: -r[(1, 1)].im,
        mu: -r[(0, 1)].im,
        omega_c_eff: sub.omega_a + delta_c_eff,
        omega_a_eff: sub.omega_a + delta_a_eff,
    }
}

fn solve_resonant(k: DMatrix<C64>, rhs: DVector<C64>) -> Result<DVector<C64>> {
    let scale = k.norm();
    let lu = k.clone().lu();
    let x = lu.solve(&rhs).ok_or(Error::ResonanceSingular)?;
    let det = lu.determinant();
    if !(det.norm() > 1e-14 * scale.powi(k.nrows() as i32)) || x.iter().any(|z| !z.is_finite()) {
        return Err(Error::ResonanceSingular);
    }
    Ok(x)
}

/// Steady state `(α, β_A)` of the driven effective system.
pub fn driven_steady_state(p: &EffectiveParams, drive: &DriveSpec) -> Result<(C64, C64)> {
    let omega_a = p.omega_a_eff - p.delta_a_eff;
    let k = effective_matrix(p, drive.shift(omega_a));
    let x = solve_resonant(k, DVector::from_vec(vec![C64::from(-drive.eta), C64::from(0.0)]))?;
    Ok((x[0], x[1]))
}

/// Steady state of the driven full linear system.
pub fn full_steady_state(sub: &Subsystem, couplings: &CouplingSet, drive: &DriveSpec) -> Result<ClassicalState> {
    let k = full_matrix(sub, couplings, drive.shift(sub.omega_a));
    let mut rhs = DVector::zeros(k.nrows());
    rhs[0] = C64::from(-drive.eta);
    Ok(ClassicalState::from_vector(&solve_resonant(k, rhs)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    /// Steady state of the effective system with frozen parameters.
    Exact,
    /// Sum over the two polariton poles; needs `ω_A^eff = ω_c^eff`.
    Polariton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub omega_l: f64,
    pub t_c: f64,
}

/// `T_c(ω_L) = (κ²/η²)|α^st|²` on the given laser grid.
pub fn transmission_spectrum(
    p: &EffectiveParams,
    kappa_bare: f64,
    eta: f64,
    omegas: &[f64],
    mode: SpectrumMode,
) -> Result<Vec<SpectrumPoint>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("drive strength {eta} must be > 0 for a spectrum")));
    }
    let norm = kappa_bare * kappa_bare;
    match mode {
        SpectrumMode::Exact => omegas
            .iter()
            .map(|&w| {
                let (alpha, _) = driven_steady_state(p, &DriveSpec::new(eta, w)?)?;
                Ok(SpectrumPoint { omega_l: w, t_c: norm * alpha.norm_sqr() / (eta * eta) })
            })
            .collect(),
        SpectrumMode::Polariton => {
            let a = polariton_analysis(p)?;
            Ok(omegas
                .iter()
                .map(|&w| {
                    let amp = a.z_plus / C64::new(w - a.omega_plus, a.gamma_plus)
                        + a.z_minus / C64::new(w - a.omega_minus, a.gamma_minus);
                    SpectrumPoint { omega_l: w, t_c: norm * amp.norm_sqr() }
                })
                .collect())
        }
    }
}

/// Spectrum from the full linear system at each laser frequency, without
/// freezing the ensemble response at the emitter frequency.
pub fn transmission_spectrum_laser_frame(
    sub: &Subsystem,
    couplings: &CouplingSet,
    eta: f64,
    omegas: &[f64],
) -> Result<Vec<SpectrumPoint>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("drive strength {eta} must be > 0 for a spectrum")));
    }
    let norm = sub.kappa * sub.kappa;
    omegas
        .iter()
        .map(|&w| {
            let st = full_steady_state(sub, couplings, &DriveSpec::new(eta, w)?)?;
            Ok(SpectrumPoint { omega_l: w, t_c: norm * st.alpha.norm_sqr() / (eta * eta) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolaritonAnalysis {
    pub omega0: f64,
    pub xi_plus: C64,
    pub xi_minus: C64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Cavity admixture of each polariton. Diverges at the exceptional point.
    pub z_plus: C64,
    pub z_minus: C64,
    /// `Γ_+` at vanishing coherent coupling.
    pub gamma_plus_onset: f64,
    /// Whether `Γ_+` is locally nonincreasing in `g_A^eff`.
    pub gamma_plus_nonincreasing: bool,
}

/// Eigenvalues `(ξ_+, ξ_-)` of `T = [[-κ, -ig - μ], [-ig - μ, -γ]]`.
pub fn polariton_eigenvalues(kappa: f64, gamma: f64, g: f64, mu: f64) -> (C64, C64) {
    let c = C64::new(g, -mu);
    let half = 0.5 * (kappa - gamma);
    let mut disc = C64::from(half * half) - c * c;
    if disc.im == 0.0 {
        disc.im = 0.0;
    }
    let root = disc.sqrt();
    let mean = C64::from(-0.5 * (kappa + gamma));
    (mean - root, mean + root)
}

fn gamma_plus_at(kappa: f64, gamma: f64, g: f64, mu: f64) -> f64 {
    -polariton_eigenvalues(kappa, gamma, g, mu).0.re
}

/// Eigenvector of the 2 × 2 matrix `t` for eigenvalue `xi`, or `None` when
/// `t - xi` vanishes.
fn eigenvector(t: &[[C64; 2]; 2], xi: C64) -> Option<[C64; 2]> {
    let a = [t[0][1], xi - t[0][0]];
    let b = [xi - t[1][1], t[1][0]];
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    if na == 0.0 && nb == 0.0 {
        None
    } else if na >= nb {
        Some(a)
    } else {
        Some(b)
    }
}

/// Polariton linewidths, frequencies and admixtures at resonance.
pub fn polariton_analysis(p: &EffectiveParams) -> Result<PolaritonAnalysis> {
    let detuning = p.omega_a_eff - p.omega_c_eff;
    let scale = 1.0 + p.omega_a_eff.abs().max(p.omega_c_eff.abs());
    if detuning.abs() > 1e-12 * scale {
        return Err(Error::Unsupported(format!(
            "polariton analysis needs omega_a_eff = omega_c_eff (detuning {detuning:e})"
        )));
    }
    let omega0 = 0.5 * (p.omega_a_eff + p.omega_c_eff);
    let (kappa, gamma, g, mu) = (p.kappa_eff, p.gamma_a_eff, p.g_a_eff, p.mu);
    let (xi_plus, xi_minus) = polariton_eigenvalues(kappa, gamma, g, mu);

    let off = C64::new(-mu, -g);
    let t = [[C64::from(-kappa), off], [off, C64::from(-gamma)]];
    let u_plus = eigenvector(&t, xi_plus).unwrap_or([C64::from(1.0), C64::from(0.0)]);
    let u_minus = eigenvector(&t, xi_minus).unwrap_or([C64::from(0.0), C64::from(1.0)]);
    let det = u_plus[0] * u_minus[1] - u_minus[0] * u_plus[1];
    let z_plus = u_plus[0] * u_minus[1] / det;
    let z_minus = -u_minus[0] * u_plus[1] / det;

    let h = 1e-6 * g.abs().max(1.0);
    let lo = (g - h).max(0.0);
    let stencil_ok =
        gamma_plus_at(kappa, gamma, g + h, mu) <= gamma_plus_at(kappa, gamma, lo, mu) + 1e-9;

    Ok(PolaritonAnalysis {
        omega0,
        xi_plus,
        xi_minus,
        gamma_plus: -xi_plus.re,
        gamma_minus: -xi_minus.re,
        omega_plus: omega0 - xi_plus.im,
        omega_minus: omega0 - xi_minus.im,
        z_plus,
        z_minus,
        gamma_plus_onset: gamma_plus_at(kappa, gamma, 0.0, mu),
        gamma_plus_nonincreasing: stencil_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::effective_params;
    use crate::model::SingleEmitter;

    fn sub(kappa: f64, gamma_a: f64, delta_c: f64) -> Subsystem {
        Subsystem { omega_a: 0.0, omega_c: delta_c, kappa, gamma_a }
    }

    fn dispersive() -> (Subsystem, CouplingSet) {
        let e = SingleEmitter { delta_b: 100.0, gamma_b: 1.0, omega_ab: 5.0, gamma_ab: 0.0, g_a: 0.0, g_b: 10.0 };
        (sub(1.0, 1.0, 0.0), CouplingSet::single(&e))
    }

    #[test]
    fn decoupled_cavity_decays() {
        let (kappa, dc) = (0.4, 1.3);
        let c = CouplingSet::decoupled(2, 5.0, 1.0, 0.0);
        let s = sub(kappa, 0.2, dc);
        let init = ClassicalState::subsystem(C64::from(1.0), C64::from(0.0), 2);
        let t_end = 5.0 / kappa;
        let traj = integrate_full_classical(&s, &c, &init, None, &Rk4Options::adaptive(0.05, t_end, 1e-10)).unwrap();
        let exact = (C64::new(-kappa, -dc) * t_end).exp();
        assert!((traj.states.last().unwrap().alpha - exact).norm() < 1e-8);
    }

    #[test]
    fn rabi_without_ensemble() {
        let g = 0.7;
        let c = CouplingSet::decoupled(0, 0.0, 0.0, g);
        let init = ClassicalState::subsystem(C64::from(1.0), C64::from(0.0), 0);
        let traj =
            integrate_full_classical(&sub(0.0, 0.0, 0.0), &c, &init, None, &Rk4Options::adaptive(0.05, 10.0, 1e-10))
                .unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.alpha - C64::from((g * t).cos())).norm() < 1e-8);
            assert!((s.beta_a - C64::new(0.0, -(g * t).sin())).norm() < 1e-8);
        }
    }

    #[test]
    fn norm_decays_monotonically() {
        let e = SingleEmitter { delta_b: 3.0, gamma_b: 1.0, omega_ab: 0.6, gamma_ab: 0.5, g_a: 0.4, g_b: 1.2 };
        let c = CouplingSet::single(&e);
        let init = ClassicalState::new(C64::from(0.3), C64::new(0.0, 0.2), DVector::from_element(1, C64::from(0.1)));
        let traj =
            integrate_full_classical(&sub(0.3, 0.8, 0.5), &c, &init, None, &Rk4Options::adaptive(0.02, 20.0, 1e-9))
                .unwrap();
        for w in traj.states.windows(2) {
            assert!(w[1].norm_sqr() <= w[0].norm_sqr() + 1e-12);
        }
    }

    #[test]
    fn driven_ensemble_tracks_stationary_relation() {
        let (s, c) = dispersive();
        let drive = DriveSpec::new(0.05, 0.3).unwrap();
        let init = ClassicalState::subsystem(C64::from(0.0), C64::from(0.0), 1);
        let traj = integrate_full_classical(&s, &c, &init, Some(&drive), &Rk4Options::adaptive(0.01, 30.0, 1e-10))
            .unwrap();
        let last = traj.states.last().unwrap();
        let (_, _, db) = drive.detunings(&s, c.delta_b());
        let m_tilde = C64::new(db, -c.gamma_b());
        let beta_st = -(c.g[0] * last.alpha + c.v[0] * last.beta_a) / m_tilde;
        assert!((last.beta[0] - beta_st).norm() < 1e-6);
        let st = full_steady_state(&s, &c, &drive).unwrap();
        assert!((st.alpha - last.alpha).norm() < 1e-6);
    }

    #[test]
    fn schur_reduction_matches_forms() {
        let (s, c) = dispersive();
        let a = eliminate_classical(&s, &c).unwrap();
        let b = effective_params(&c, &s).unwrap();
        for (x, y) in [(a.g_a_eff, b.g_a_eff), (a.mu, b.mu), (a.kappa_eff, b.kappa_eff), (a.gamma_a_eff, b.gamma_a_eff)]
        {
            assert!((x - y).abs() < 1e-12 * y.abs().max(1.0));
        }
        let bare = eliminate_classical(&s, &CouplingSet::decoupled(3, 2.0, 1.0, 0.5)).unwrap();
        assert_eq!(bare, EffectiveParams::bare(&s, 0.5));
    }

    #[test]
    fn effective_rabi_and_envelope() {
        let p = EffectiveParams::resonant(1.5, 0.0, 0.0, 0.0, 0.0);
        let traj = integrate_effective_classical(&p, C64::from(1.0), C64::from(0.0), None, &Rk4Options::adaptive(0.05, 8.0, 1e-10))
            .unwrap();
        for (t, st) in traj.times.iter().zip(&traj.states) {
            assert!((st.alpha.norm() - (1.5 * t).cos().abs()).abs() < 1e-8);
        }
    }

    #[test]
    fn full_vs_effective_dispersive() {
        // Ensemble starts on the slow manifold so no initial slip is excited.
        let (s, c) = dispersive();
        let p = effective_params(&c, &s).unwrap();
        let opts = Rk4Options::adaptive(0.01, 10.0 / s.gamma_a, 1e-9);
        for (a0, b0) in [(C64::from(1.0), C64::from(0.0)), (C64::from(0.0), C64::from(1.0))] {
            let beta = crate::elimination::adiabatic_ensemble(&c, a0, b0).unwrap();
            let full = integrate_full_classical(&s, &c, &ClassicalState::new(a0, b0, beta), None, &opts).unwrap();
            let eff = integrate_effective_classical(&p, a0, b0, None, &opts).unwrap();
            let peak = full.states.iter().map(|st| st.alpha.norm()).fold(0.0, f64::max);
            let diff =
                full.states.iter().zip(&eff.states).map(|(a, b)| (a.alpha - b.alpha).norm()).fold(0.0, f64::max);
            assert!(peak > 0.1);
            assert!(diff < 0.02 * peak, "diff {diff} peak {peak}");
        }
    }

    #[test]
    fn steady_state_closed_form() {
        let p = EffectiveParams { delta_c_eff: 0.3, delta_a_eff: -0.2, omega_c_eff: 0.3, omega_a_eff: -0.2, ..EffectiveParams::resonant(1.1, 0.4, 1.5, 0.7, 0.0) };
        let d = DriveSpec::new(0.2, 0.15).unwrap();
        let (alpha, _) = driven_steady_state(&p, &d).unwrap();
        let da = C64::new(p.omega_a_eff - d.omega_l, -p.gamma_a_eff);
        let dc = C64::new(p.omega_c_eff - d.omega_l, -p.kappa_eff);
        let oracle = d.eta * da / (p.coupling() * p.coupling() - da * dc);
        assert!((alpha - oracle).norm() < 1e-12);
    }

    #[test]
    fn bare_cavity_resonance_transmits_fully() {
        let p = EffectiveParams::resonant(0.0, 0.0, 2.0, 1.0, 4.0);
        let sp = transmission_spectrum(&p, 2.0, 0.1, &[4.0], SpectrumMode::Exact).unwrap();
        assert!((sp[0].t_c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn split_resonance_value() {
        let p = EffectiveParams::resonant(2.0, 0.0, 2.0, 1.0, 0.0);
        let (alpha, _) = driven_steady_state(&p, &DriveSpec::new(0.1, 0.0).unwrap()).unwrap();
        assert!((alpha - C64::new(0.0, -0.1 / 6.0)).norm() < 1e-15);
        let sp = transmission_spectrum(&p, 2.0, 0.1, &[0.0], SpectrumMode::Exact).unwrap();
        assert!((sp[0].t_c - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn undamped_degeneracy_is_singular() {
        let p = EffectiveParams::resonant(1.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(driven_steady_state(&p, &DriveSpec::new(0.1, 1.0).unwrap()), Err(Error::ResonanceSingular)));
    }

    #[test]
    fn laser_frame_spectrum_equals_reduced_per_frequency() {
        let (s, c) = dispersive();
        let omegas = [-2.0, -0.5, 0.0, 0.7, 3.0];
        let exact = transmission_spectrum_laser_frame(&s, &c, 0.01, &omegas).unwrap();
        for (pt, &w) in exact.iter().zip(&omegas) {
            // Parameters re-evaluated with the ensemble shifted into the laser frame.
            let shift = s.omega_a - w;
            let p = effective_params(&c.shifted(shift), &s).unwrap();
            let x = effective_matrix(&p, shift).lu().solve(&DVector::from_vec(vec![C64::from(-0.01), C64::from(0.0)])).unwrap();
            let t_c = x[0].norm_sqr() / (0.01 * 0.01);
            assert!((pt.t_c - t_c).abs() < 1e-12 * t_c.max(1e-3));
        }
        let frozen = transmission_spectrum(&effective_params(&c, &s).unwrap(), 1.0, 0.01, &omegas, SpectrumMode::Exact)
            .unwrap();
        for (a, b) in exact.iter().zip(&frozen) {
            assert!((a.t_c - b.t_c).abs() < 0.05 * a.t_c.max(b.t_c));
        }
    }

    #[test]
    fn polariton_examples() {
        let a = polariton_analysis(&EffectiveParams::resonant(2.0, 0.0, 2.0, 1.0, 0.0)).unwrap();
        assert!((a.gamma_plus - 1.5).abs() < 1e-14 && (a.gamma_minus - 1.5).abs() < 1e-14);
        assert!((a.omega_plus - 3.75f64.sqrt()).abs() < 1e-14);
        assert!((a.omega_minus + 3.75f64.sqrt()).abs() < 1e-14);

        let ep = polariton_analysis(&EffectiveParams::resonant(0.5, 0.0, 2.0, 1.0, 0.0)).unwrap();
        assert!((ep.xi_plus - ep.xi_minus).norm() < 1e-8);
        assert!((ep.xi_plus.re + 1.5).abs() < 1e-12);

        let a = polariton_analysis(&EffectiveParams::resonant(2.0, 0.5, 2.0, 1.0, 0.0)).unwrap();
        // √(-3.5 + 2i) = 0.515329445184959 + 1.940506232165884i
        let (re, im) = (0.515_329_445_184_959, 1.940_506_232_165_884);
        assert!((a.gamma_plus - 1.5 - re).abs() < 1e-12 && (a.gamma_minus - 1.5 + re).abs() < 1e-12);
        assert!((a.omega_plus - im).abs() < 1e-12 && (a.omega_minus + im).abs() < 1e-12);
        assert!((a.gamma_plus_onset - (1.5 + 0.5f64.sqrt())).abs() < 1e-12);
        assert!(a.gamma_plus_nonincreasing);
        assert!((a.z_plus + a.z_minus - C64::from(1.0)).norm() < 1e-12);
    }

    #[test]
    fn weak_coupling_labels() {
        let a = polariton_analysis(&EffectiveParams::resonant(0.0, 0.0, 2.0, 1.0, 0.0)).unwrap();
        assert_eq!((a.gamma_plus, a.gamma_minus), (2.0, 1.0));
        assert!((a.z_plus - C64::from(1.0)).norm() < 1e-15);
        let eq = polariton_analysis(&EffectiveParams::resonant(0.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        assert!((eq.z_plus + eq.z_minus - C64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn off_resonance_polariton_rejected() {
        let mut p = EffectiveParams::resonant(1.0, 0.0, 1.0, 1.0, 0.0);
        p.omega_c_eff = 0.5;
        assert!(matches!(polariton_analysis(&p), Err(Error::Unsupported(_))));
        assert!(transmission_spectrum(&p, 1.0, 0.1, &[0.0], SpectrumMode::Polariton).is_err());
    }

    #[test]
    fn polariton_and_exact_spectra_agree() {
        let omegas: Vec<f64> = (0..201).map(|i| -6.0 + 0.06 * i as f64).collect();
        for &(g, mu) in &[(2.0, 0.0), (2.0, 0.5), (0.3, 0.2), (1.0, -0.4)] {
            let p = EffectiveParams::resonant(g, mu, 2.0, 1.0, 0.0);
            let a = transmission_spectrum(&p, 2.0, 0.1, &omegas, SpectrumMode::Exact).unwrap();
            let b = transmission_spectrum(&p, 2.0, 0.1, &omegas, SpectrumMode::Polariton).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.t_c - y.t_c).abs() < 1e-10, "g={g} mu={mu} w={}", x.omega_l);
            }
        }
    }
}
