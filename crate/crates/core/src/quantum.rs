//! Dense Lindblad master equations for the full cavity + A + ensemble system
//! and for the effective cavity + A system.
//!
//! Hilbert space ordering is photon ⊗ A ⊗ B₁ ⊗ … ⊗ B_N with the first factor
//! most significant. Spin basis: 0 = ground, 1 = excited.
//!
//! A rate matrix `Γ` over lowering channels `c_y` enters as
//! `Σ_xy Γ_xy (2 c_y ρ c_x† - {c_x† c_y, ρ})`, so a lone rate `γ` empties a
//! population as `e^{-2γt}`. `Γ` is diagonalised into independent jump
//! operators before use.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::classical::DriveSpec;
use crate::elimination::{effective_params, validity_report, DissipatorModes, EffectiveParams, ValidityOptions, Verdict};
use crate::ode::{integrate_with, Rk4Options};
use crate::{CouplingSet, Error, Result, Subsystem, C64};

pub const DEFAULT_DIM_CAP: usize = 256;

/// Tolerance below which negative rate-matrix eigenvalues are clipped.
pub const PSD_TOL: f64 = 1e-10;

pub type DensityMatrix = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HilbertSpec {
    pub photon_cutoff: usize,
    pub n_spins_b: usize,
}

impl HilbertSpec {
    pub fn new(photon_cutoff: usize, n_spins_b: usize) -> Result<Self> {
        Self::with_cap(photon_cutoff, n_spins_b, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(photon_cutoff: usize, n_spins_b: usize, cap: usize) -> Result<Self> {
        if photon_cutoff < 1 {
            return Err(Error::InvalidParameter("photon cutoff must be >= 1".into()));
        }
        let h = Self { photon_cutoff, n_spins_b };
        let dim = (n_spins_b < 40)
            .then(|| (photon_cutoff + 1).checked_mul(1usize << (n_spins_b + 1)))
            .flatten()
            .unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(h)
    }

    pub fn dim(&self) -> usize {
        (self.photon_cutoff + 1) << (self.n_spins_b + 1)
    }

    /// Dimension of photon ⊗ A.
    pub fn subsystem_dim(&self) -> usize {
        2 * (self.photon_cutoff + 1)
    }

    fn factor_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.photon_cutoff + 1, 2];
        dims.extend(std::iter::repeat_n(2, self.n_spins_b));
        dims
    }

    /// Basis index of photon number `n`, A state `s_a` and ensemble bits
    /// (B₁ first).
    pub fn index(&self, n: usize, s_a: usize, spins_b: &[usize]) -> usize {
        let mut idx = n * 2 + s_a;
        for &s in spins_b {
            idx = idx * 2 + s;
        }
        idx
    }
}

fn annihilation(n_max: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    a
}

fn sigma_minus() -> DMatrix<C64> {
    let mut s = DMatrix::zeros(2, 2);
    s[(0, 1)] = C64::from(1.0);
    s
}

fn embed(dims: &[usize], site: usize, op: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::from(1.0));
    for (k, &d) in dims.iter().enumerate() {
        out = if k == site { out.kronecker(op) } else { out.kronecker(&DMatrix::identity(d, d)) };
    }
    out
}

fn dagger(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.adjoint()
}

#[derive(Debug, Clone)]
pub struct Jump {
    pub rate: f64,
    pub op: DMatrix<C64>,
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    /// Dimensions of the space the model acts on (`n_spins_b = 0` for
    /// effective models).
    pub hilbert: HilbertSpec,
    pub hamiltonian: DMatrix<C64>,
    /// Lowering channels `c_y` the rate matrix refers to.
    pub channels: Vec<DMatrix<C64>>,
    pub rate_matrix: DMatrix<f64>,
    /// Independent jumps from diagonalising the rate matrix.
    pub jumps: Vec<Jump>,
    /// Photon annihilation and A lowering operators.
    pub a: DMatrix<C64>,
    pub sigma_a: DMatrix<C64>,
    /// Lowering operators of the ensemble spins.
    pub sigma_b: Vec<DMatrix<C64>>,
    number_ops: [DMatrix<C64>; 3],
    h_nh: DMatrix<C64>,
    h_nh_adj: DMatrix<C64>,
    sandwich: Vec<(f64, DMatrix<C64>, DMatrix<C64>)>,
}

fn check_hermitian(h: &DMatrix<C64>) -> Result<()> {
    let err = (h - h.adjoint()).norm();
    if err > 1e-12 * h.norm().max(1.0) {
        return Err(Error::Unphysical(format!("Hamiltonian is not Hermitian (deviation {err:.3e})")));
    }
    Ok(())
}

impl LindbladModel {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        hilbert: HilbertSpec,
        hamiltonian: DMatrix<C64>,
        channels: Vec<DMatrix<C64>>,
        rate_matrix: DMatrix<f64>,
        jumps: Vec<Jump>,
        a: DMatrix<C64>,
        sigma_a: DMatrix<C64>,
        sigma_b: Vec<DMatrix<C64>>,
    ) -> Result<Self> {
        check_hermitian(&hamiltonian)?;
        let mut h_nh = hamiltonian.clone();
        let mut sandwich = Vec::with_capacity(jumps.len());
        for j in &jumps {
            if j.rate == 0.0 {
                continue;
            }
            let dag = dagger(&j.op);
            h_nh -= (&dag * &j.op) * C64::new(0.0, j.rate);
            sandwich.push((2.0 * j.rate, j.op.clone(), dag));
        }
        let h_nh_adj = h_nh.adjoint();
        let d = hamiltonian.nrows();
        let excited_b = sigma_b.iter().fold(DMatrix::zeros(d, d), |acc, s| acc + dagger(s) * s);
        let number_ops = [dagger(&a) * &a, dagger(&sigma_a) * &sigma_a, excited_b];
        Ok(Self {
            hilbert,
            hamiltonian,
            channels,
            rate_matrix,
            jumps,
            a,
            sigma_a,
            sigma_b,
            number_ops,
            h_nh,
            h_nh_adj,
            sandwich,
        })
    }

    /// Build from a Hamiltonian, lowering channels and their rate matrix.
    fn from_rates(
        hilbert: HilbertSpec,
        hamiltonian: DMatrix<C64>,
        channels: Vec<DMatrix<C64>>,
        rate_matrix: DMatrix<f64>,
        a: DMatrix<C64>,
        sigma_a: DMatrix<C64>,
        sigma_b: Vec<DMatrix<C64>>,
    ) -> Result<Self> {
        let asym = (&rate_matrix - rate_matrix.transpose()).norm();
        if asym > 1e-12 * rate_matrix.norm().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let eig = SymmetricEigen::new(rate_matrix.clone());
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        let d = hamiltonian.nrows();
        let jumps = (0..channels.len())
            .map(|k| {
                let mut op = DMatrix::zeros(d, d);
                for (y, c) in channels.iter().enumerate() {
                    let u = eig.eigenvectors[(y, k)];
                    if u != 0.0 {
                        op += c * C64::from(u);
                    }
                }
                Jump { rate: eig.eigenvalues[k].max(0.0), op }
            })
            .collect();
        Self::assemble(hilbert, hamiltonian, channels, rate_matrix, jumps, a, sigma_a, sigma_b)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// `dρ/dt`.
    pub fn generator(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = (&self.h_nh * rho - rho * &self.h_nh_adj) * C64::new(0.0, -1.0);
        for (r2, l, ld) in &self.sandwich {
            out += (l * rho * ld) * C64::from(*r2);
        }
        out
    }

    /// Smallest eigenvalue of the rate matrix.
    pub fn min_rate_eigenvalue(&self) -> f64 {
        if self.rate_matrix.is_empty() {
            return 0.0;
        }
        SymmetricEigen::new(self.rate_matrix.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The full model: cavity, A and every ensemble spin with all coherent and
/// collective dissipative couplings. With a drive it is written in the laser
/// frame.
pub fn build_full_model(
    sub: &Subsystem,
    couplings: &CouplingSet,
    hilbert: HilbertSpec,
    drive: Option<&DriveSpec>,
) -> Result<LindbladModel> {
    let n = couplings.n();
    if hilbert.n_spins_b != n {
        return Err(Error::DimensionMismatch { expected: n, got: hilbert.n_spins_b });
    }
    if couplings.g.iter().any(|z| z.im != 0.0) {
        return Err(Error::Unsupported("complex cavity couplings to the ensemble".into()));
    }
    let dims = hilbert.factor_dims();
    let a = embed(&dims, 0, &annihilation(hilbert.photon_cutoff));
    let sm = sigma_minus();
    let sigma_a = embed(&dims, 1, &sm);
    let sigma_b: Vec<_> = (0..n).map(|j| embed(&dims, 2 + j, &sm)).collect();

    let shift = drive.map_or(0.0, |d| sub.omega_a - d.omega_l);
    let energies = couplings.ensemble_energies();
    let rates = couplings.ensemble_rates();
    let ad = dagger(&a);
    let sad = dagger(&sigma_a);

    let mut h = (&ad * &a) * C64::from(sub.delta_c() + shift) + (&sad * &sigma_a) * C64::from(shift);
    let mut coupled = &sigma_a * C64::from(couplings.g_a);
    for j in 0..n {
        coupled += &sigma_b[j] * couplings.g[j];
    }
    let tc = &ad * coupled;
    h += &tc + tc.adjoint();
    for j in 0..n {
        let sjd = dagger(&sigma_b[j]);
        h += (&sjd * &sigma_b[j]) * C64::from(energies[(j, j)] + shift);
        let x = (&sjd * &sigma_a) * C64::from(couplings.omega_ab[j]);
        h += &x + x.adjoint();
        for l in 0..n {
            if l != j {
                h += (&sjd * &sigma_b[l]) * C64::from(energies[(j, l)]);
            }
        }
    }
    if let Some(d) = drive {
        h += (&a + &ad) * C64::from(d.eta);
    }

    let mut gamma = DMatrix::zeros(n + 2, n + 2);
    gamma[(0, 0)] = sub.kappa;
    gamma[(1, 1)] = sub.gamma_a;
    for j in 0..n {
        gamma[(1, j + 2)] = couplings.gamma_ab[j];
        gamma[(j + 2, 1)] = couplings.gamma_ab[j];
        for l in 0..n {
            gamma[(j + 2, l + 2)] = rates[(j, l)];
        }
    }
    let mut channels = vec![a.clone(), sigma_a.clone()];
    channels.extend(sigma_b.iter().cloned());
    LindbladModel::from_rates(hilbert, h, channels, gamma, a, sigma_a, sigma_b)
}

fn effective_operators(n_max: usize) -> Result<(HilbertSpec, DMatrix<C64>, DMatrix<C64>)> {
    let hilbert = HilbertSpec::new(n_max, 0)?;
    let dims = hilbert.factor_dims();
    Ok((hilbert, embed(&dims, 0, &annihilation(n_max)), embed(&dims, 1, &sigma_minus())))
}

fn effective_hamiltonian(p: &EffectiveParams, a: &DMatrix<C64>, s: &DMatrix<C64>, drive: Option<&DriveSpec>) -> DMatrix<C64> {
    let omega_a = p.omega_a_eff - p.delta_a_eff;
    let shift = drive.map_or(0.0, |d| omega_a - d.omega_l);
    let ad = dagger(a);
    let sd = dagger(s);
    let mut h = (&ad * a) * C64::from(p.delta_c_eff + shift) + (&sd * s) * C64::from(p.delta_a_eff + shift);
    let x = (&ad * s) * C64::from(p.g_a_eff);
    h += &x + x.adjoint();
    if let Some(d) = drive {
        h += (a + &ad) * C64::from(d.eta);
    }
    h
}

/// Effective cavity + A model with the joint dissipator of rate matrix
/// `[[κ^eff, μ], [μ, γ_A^eff]]`.
pub fn build_effective_model(p: &EffectiveParams, n_max: usize, drive: Option<&DriveSpec>) -> Result<LindbladModel> {
    let (hilbert, a, s) = effective_operators(n_max)?;
    let h = effective_hamiltonian(p, &a, &s, drive);
    let r = p.rate_matrix();
    let gamma = DMatrix::from_row_slice(2, 2, &[r[0][0], r[0][1], r[1][0], r[1][1]]);
    LindbladModel::from_rates(hilbert, h, vec![a.clone(), s.clone()], gamma, a, s, Vec::new())
}

/// The same effective model assembled from the jump operators `L_±`.
pub fn build_effective_model_from_modes(
    p: &EffectiveParams,
    modes: &DissipatorModes,
    n_max: usize,
    drive: Option<&DriveSpec>,
) -> Result<LindbladModel> {
    let (hilbert, a, s) = effective_operators(n_max)?;
    let h = effective_hamiltonian(p, &a, &s, drive);
    let jumps = modes
        .jump_coefficients
        .iter()
        .zip([modes.gamma_plus, modes.gamma_minus])
        .map(|(c, rate)| Jump { rate, op: &a * C64::from(c[0]) + &s * C64::from(c[1]) })
        .collect();
    let r = p.rate_matrix();
    let gamma = DMatrix::from_row_slice(2, 2, &[r[0][0], r[0][1], r[1][0], r[1][1]]);
    LindbladModel::assemble(hilbert, h, vec![a.clone(), s.clone()], gamma, jumps, a, s, Vec::new())
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Vacuum,
    /// Emitter A excited, everything else in the ground state.
    AExcited,
    /// Truncated, renormalised coherent cavity state; emitters in the ground state.
    Coherent(C64),
    /// Pure state `c_g |G⟩ + α |1_c⟩ + β_A |e_A⟩ + Σ β_j |e_j⟩`.
    SingleExcitation { ground: C64, alpha: C64, beta_a: C64, beta: Vec<C64> },
}

impl InitialState {
    pub fn density_matrix(&self, hilbert: &HilbertSpec) -> Result<DensityMatrix> {
        let d = hilbert.dim();
        let n = hilbert.n_spins_b;
        let ground = vec![0; n];
        let mut psi = DVector::<C64>::zeros(d);
        match self {
            Self::Vacuum => psi[0] = C64::from(1.0),
            Self::AExcited => psi[hilbert.index(0, 1, &ground)] = C64::from(1.0),
            Self::Coherent(alpha) => {
                let mut amp = C64::from(1.0);
                for k in 0..=hilbert.photon_cutoff {
                    if k > 0 {
                        amp *= alpha / (k as f64).sqrt();
                    }
                    psi[hilbert.index(k, 0, &ground)] = amp;
                }
            }
            Self::SingleExcitation { ground: c0, alpha, beta_a, beta } => {
                if beta.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: beta.len() });
                }
                psi[0] = *c0;
                psi[hilbert.index(1, 0, &ground)] = *alpha;
                psi[hilbert.index(0, 1, &ground)] = *beta_a;
                for (j, b) in beta.iter().enumerate() {
                    let mut spins = ground.clone();
                    spins[j] = 1;
                    psi[hilbert.index(0, 0, &spins)] = *b;
                }
            }
        }
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("initial state has zero norm".into()));
        }
        psi /= C64::from(norm);
        Ok(&psi * psi.adjoint())
    }
}

/// Trace over the ensemble spins, leaving photon ⊗ A.
pub fn partial_trace_b(rho: &DensityMatrix, hilbert: &HilbertSpec) -> Result<DensityMatrix> {
    let d = hilbert.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho.nrows() });
    }
    let nb = 1usize << hilbert.n_spins_b;
    let ds = hilbert.subsystem_dim();
    Ok(DMatrix::from_fn(ds, ds, |i, j| (0..nb).map(|m| rho[(i * nb + m, j * nb + m)]).sum()))
}

/// `½ Σ |eigenvalues(a - b)|` for Hermitian `a`, `b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = a - b;
    let herm = (&diff + diff.adjoint()) * C64::from(0.5);
    0.5 * SymmetricEigen::new(herm).eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub t: f64,
    pub a: C64,
    pub sigma_a: C64,
    pub photon_number: f64,
    pub excited_a: f64,
    /// Total ensemble excitation.
    pub excited_b: f64,
    pub trace: f64,
}

fn expect(op: &DMatrix<C64>, rho: &DMatrix<C64>) -> C64 {
    // Tr(op ρ) without forming the product.
    let mut s = C64::from(0.0);
    for i in 0..op.nrows() {
        for k in 0..op.ncols() {
            let o = op[(i, k)];
            if o != C64::from(0.0) {
                s += o * rho[(k, i)];
            }
        }
    }
    s
}

impl LindbladModel {
    pub fn observables(&self, t: f64, rho: &DensityMatrix) -> Observables {
        let a = expect(&self.a, rho);
        let sigma_a = expect(&self.sigma_a, rho);
        let [n_c, n_a, n_b] = &self.number_ops;
        let photon_number = expect(n_c, rho).re;
        let excited_a = expect(n_a, rho).re;
        let excited_b = expect(n_b, rho).re;
        Observables { t, a, sigma_a, photon_number, excited_a, excited_b, trace: rho.trace().re }
    }
}

#[derive(Debug, Clone)]
pub struct QuantumTrajectory {
    pub observables: Vec<Observables>,
    pub final_state: DensityMatrix,
    pub max_trace_drift: f64,
    /// Most negative eigenvalue of the final state.
    pub min_eigenvalue: f64,
    pub warnings: Vec<String>,
}

/// Density-matrix sanity: dimensions, Hermiticity (1e-10) and unit trace (1e-8).
pub fn check_density(rho: &DensityMatrix, dim: usize) -> Result<()> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho.nrows() });
    }
    let herm = (rho - rho.adjoint()).norm();
    if herm > 1e-10 {
        return Err(Error::Unphysical(format!("density matrix not Hermitian (deviation {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr - C64::from(1.0)).norm() > 1e-8 {
        return Err(Error::Unphysical(format!("density matrix trace {tr} != 1")));
    }
    Ok(())
}

/// Evolve `rho0` and record observables on the output grid. The trace is
/// monitored, not renormalised.
pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, opts: &Rk4Options) -> Result<QuantumTrajectory> {
    check_density(rho0, model.dim())?;
    let mut observables = Vec::new();
    let mut max_drift = 0.0f64;
    let final_state = integrate_with(
        |_t, rho: &DMatrix<C64>| model.generator(rho),
        rho0.clone(),
        opts,
        |t, rho| {
            let obs = model.observables(t, rho);
            max_drift = max_drift.max((obs.trace - 1.0).abs());
            if max_drift > 1e-8 {
                return Err(Error::Integration(format!("trace drifted by {max_drift:.3e} at t = {t}")));
            }
            let herm = (rho - rho.adjoint()).norm();
            if herm > 1e-10 {
                return Err(Error::Integration(format!("Hermiticity lost ({herm:.3e}) at t = {t}")));
            }
            observables.push(obs);
            Ok(())
        },
    )?;
    let herm = (&final_state + final_state.adjoint()) * C64::from(0.5);
    let min_eigenvalue = SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if min_eigenvalue < -1e-7 {
        warnings.push(format!("final state has eigenvalue {min_eigenvalue:.3e}"));
    }
    Ok(QuantumTrajectory { observables, final_state, max_trace_drift: max_drift, min_eigenvalue, warnings })
}

/// Relax to the stationary state by integrating until `‖dρ/dt‖ < tol`.
///
/// Runs in windows of `1 / min_rate` up to `20 / min_rate`, where `min_rate`
/// is the smallest nonzero jump rate.
pub fn steady_state(model: &LindbladModel, rho0: &DensityMatrix, dt: f64, tol: f64) -> Result<DensityMatrix> {
    let min_rate = model.jumps.iter().map(|j| j.rate).filter(|&r| r > 1e-12).fold(f64::INFINITY, f64::min);
    if !min_rate.is_finite() {
        return Err(Error::Unsupported("steady state of a model without dissipation".into()));
    }
    let window = 1.0 / min_rate;
    let mut rho = rho0.clone();
    for _ in 0..20 {
        rho = evolve(model, &rho, &Rk4Options::adaptive(dt.min(window), window, 1e-10))?.final_state;
        if model.generator(&rho).norm() < tol {
            return Ok(rho);
        }
    }
    let residual = model.generator(&rho).norm();
    Err(Error::Integration(format!("steady state not reached: residual {residual:.3e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub effective: EffectiveParams,
    pub verdict: Verdict,
    pub max_trace_distance: f64,
    pub max_alpha_diff: f64,
    pub max_sigma_diff: f64,
    pub max_photon_number_diff: f64,
    pub max_excited_a_diff: f64,
    /// Largest magnitude of any compared expectation value over the run.
    pub peak: f64,
    /// Largest compared discrepancy divided by `peak`.
    pub relative_discrepancy: f64,
}

/// Run the full model and the effective model from the reduced initial state
/// and compare the subsystem dynamics.
pub fn compare_full_vs_effective(
    sub: &Subsystem,
    couplings: &CouplingSet,
    hilbert: HilbertSpec,
    initial: &InitialState,
    opts: &Rk4Options,
) -> Result<ComparisonReport> {
    let p = effective_params(couplings, sub)?;
    let verdict = validity_report(couplings, sub, &ValidityOptions::default())?.verdict;
    let full = build_full_model(sub, couplings, hilbert, None)?;
    let eff = build_effective_model(&p, hilbert.photon_cutoff, None)?;
    let rho0 = initial.density_matrix(&hilbert)?;
    let rho0_s = partial_trace_b(&rho0, &hilbert)?;

    let mut full_obs = Vec::new();
    let mut reduced = Vec::new();
    integrate_with(|_t, r: &DMatrix<C64>| full.generator(r), rho0, opts, |t, r| {
        full_obs.push(full.observables(t, r));
        reduced.push(partial_trace_b(r, &hilbert)?);
        Ok(())
    })?;
    let mut eff_obs = Vec::new();
    let mut dist = 0.0f64;
    let mut k = 0;
    integrate_with(|_t, r: &DMatrix<C64>| eff.generator(r), rho0_s, opts, |t, r| {
        eff_obs.push(eff.observables(t, r));
        dist = dist.max(trace_distance(&reduced[k], r));
        k += 1;
        Ok(())
    })?;

    let mut report = ComparisonReport {
        effective: p,
        verdict,
        max_trace_distance: dist,
        max_alpha_diff: 0.0,
        max_sigma_diff: 0.0,
        max_photon_number_diff: 0.0,
        max_excited_a_diff: 0.0,
        peak: 0.0,
        relative_discrepancy: 0.0,
    };
    for (f, e) in full_obs.iter().zip(&eff_obs) {
        report.max_alpha_diff = report.max_alpha_diff.max((f.a - e.a).norm());
        report.max_sigma_diff = report.max_sigma_diff.max((f.sigma_a - e.sigma_a).norm());
        report.max_photon_number_diff = report.max_photon_number_diff.max((f.photon_number - e.photon_number).abs());
        report.max_excited_a_diff = report.max_excited_a_diff.max((f.excited_a - e.excited_a).abs());
        report.peak = report.peak.max(f.a.norm()).max(f.sigma_a.norm()).max(f.photon_number).max(f.excited_a);
    }
    let worst = report
        .max_alpha_diff
        .max(report.max_sigma_diff)
        .max(report.max_photon_number_diff)
        .max(report.max_excited_a_diff);
    report.relative_discrepancy = if report.peak > 0.0 { worst / report.peak } else { worst };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::diagonalize_dissipator;
    use crate::model::SingleEmitter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sub(kappa: f64, gamma_a: f64, delta_c: f64) -> Subsystem {
        Subsystem { omega_a: 0.0, omega_c: delta_c, kappa, gamma_a }
    }

    fn random_density(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let x = DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let rho = &x * x.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    #[test]
    fn hilbert_dimensions() {
        let h = HilbertSpec::new(2, 1).unwrap();
        assert_eq!(h.dim(), 12);
        assert_eq!(h.index(1, 0, &[1]), 5);
        assert!(matches!(HilbertSpec::new(3, 6), Err(Error::DimensionCap { dim: 512, cap: 256 })));
        assert!(HilbertSpec::new(0, 1).is_err());
    }

    #[test]
    fn jaynes_cummings_without_ensemble() {
        let c = CouplingSet::decoupled(0, 0.0, 0.0, 0.3);
        let m = build_full_model(&sub(0.1, 0.2, 0.0), &c, HilbertSpec::new(2, 0).unwrap(), None).unwrap();
        assert_eq!(m.dim(), 6);
        assert_eq!(m.jumps.iter().filter(|j| j.rate > 0.0).count(), 2);
        let h = HilbertSpec::new(2, 0).unwrap();
        // ⟨1,g| H |0,e⟩ = g_A
        assert!((m.hamiltonian[(h.index(1, 0, &[]), h.index(0, 1, &[]))] - C64::from(0.3)).norm() < 1e-15);
    }

    #[test]
    fn collective_rate_bound_enforced() {
        let e = SingleEmitter { delta_b: 1.0, gamma_b: 1.0, omega_ab: 0.0, gamma_ab: 1.5, g_a: 0.0, g_b: 0.0 };
        let r = build_full_model(&sub(0.1, 1.0, 0.0), &CouplingSet::single(&e), HilbertSpec::new(1, 1).unwrap(), None);
        assert!(matches!(r, Err(Error::NotPositiveSemidefinite(_))));
    }

    #[test]
    fn vacuum_is_stationary() {
        let e = SingleEmitter { delta_b: 3.0, gamma_b: 1.0, omega_ab: 0.5, gamma_ab: 0.3, g_a: 0.2, g_b: 0.7 };
        let h = HilbertSpec::new(2, 1).unwrap();
        let m = build_full_model(&sub(0.1, 0.2, 0.4), &CouplingSet::single(&e), h, None).unwrap();
        let rho0 = InitialState::Vacuum.density_matrix(&h).unwrap();
        let traj = evolve(&m, &rho0, &Rk4Options::fixed(0.1, 5.0)).unwrap();
        assert!((&traj.final_state - &rho0).norm() < 1e-12);
    }

    #[test]
    fn lone_emitter_decay_rate() {
        let gamma = 0.3;
        let c = CouplingSet::decoupled(0, 0.0, 0.0, 0.0);
        let h = HilbertSpec::new(1, 0).unwrap();
        let m = build_full_model(&sub(0.0, gamma, 0.0), &c, h, None).unwrap();
        let rho0 = InitialState::AExcited.density_matrix(&h).unwrap();
        let traj = evolve(&m, &rho0, &Rk4Options::adaptive(0.05, 5.0, 1e-10)).unwrap();
        for o in &traj.observables {
            assert!((o.excited_a - (-2.0 * gamma * o.t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        let g = 0.5;
        let c = CouplingSet::decoupled(0, 0.0, 0.0, g);
        let h = HilbertSpec::new(2, 0).unwrap();
        let m = build_full_model(&sub(0.0, 0.0, 0.0), &c, h, None).unwrap();
        let rho0 = InitialState::AExcited.density_matrix(&h).unwrap();
        let period = std::f64::consts::PI / g;
        let traj = evolve(&m, &rho0, &Rk4Options::adaptive(0.02, 5.0 * period, 1e-10)).unwrap();
        for o in &traj.observables {
            // Population oscillates as cos²(g t) = (1 + cos 2g t)/2.
            let oracle = (g * o.t).cos().powi(2);
            assert!((o.excited_a - oracle).abs() < 1e-4);
        }
    }

    #[test]
    fn partial_trace_cases() {
        let h = HilbertSpec::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho_s = random_density(4, &mut rng);
        let mut ground = DMatrix::zeros(4, 4);
        ground[(0, 0)] = C64::from(1.0);
        let product = rho_s.kronecker(&ground);
        assert_eq!(partial_trace_b(&product, &h).unwrap(), rho_s);

        let mixed = DMatrix::<C64>::identity(16, 16) / C64::from(16.0);
        let red = partial_trace_b(&mixed, &h).unwrap();
        assert!((red - DMatrix::<C64>::identity(4, 4) / C64::from(4.0)).norm() < 1e-15);

        let rho = random_density(16, &mut rng);
        assert!((partial_trace_b(&rho, &h).unwrap().trace() - C64::from(1.0)).norm() < 1e-12);
        assert!(partial_trace_b(&rho_s, &h).is_err());
    }

    #[test]
    fn effective_model_from_modes_agrees() {
        let p = EffectiveParams::resonant(2.0, 0.5, 2.0, 1.0, 0.0);
        let a = build_effective_model(&p, 2, None).unwrap();
        let modes = diagonalize_dissipator(&p).unwrap();
        let b = build_effective_model_from_modes(&p, &modes, 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(6, &mut rng);
        assert!((a.generator(&rho) - b.generator(&rho)).norm() < 1e-10);
        assert!(a.min_rate_eigenvalue() >= 0.0);
    }

    #[test]
    fn effective_psd_violation() {
        let p = EffectiveParams::resonant(1.0, 2.0, 1.0, 1.0, 0.0);
        assert!(matches!(build_effective_model(&p, 1, None), Err(Error::NotPositiveSemidefinite(_))));
    }

    #[test]
    fn decoupled_comparison_is_exact() {
        let c = CouplingSet::decoupled(1, 5.0, 1.0, 0.2);
        let h = HilbertSpec::new(2, 1).unwrap();
        let r = compare_full_vs_effective(&sub(0.05, 0.05, 0.0), &c, h, &InitialState::AExcited, &Rk4Options::adaptive(0.05, 20.0, 1e-10))
            .unwrap();
        assert!(r.relative_discrepancy < 1e-8);
        assert!(r.max_trace_distance < 1e-8);
    }

    #[test]
    fn weak_drive_matches_classical_spectrum() {
        use crate::classical::{transmission_spectrum, SpectrumMode};
        let p = EffectiveParams::resonant(1.0, 0.3, 2.0, 1.0, 0.0);
        let eta = 1e-3;
        for &w in &[-1.0, 0.0, 0.8] {
            let d = DriveSpec::new(eta, w).unwrap();
            let m = build_effective_model(&p, 2, Some(&d)).unwrap();
            let rho0 = InitialState::Vacuum.density_matrix(&m.hilbert).unwrap();
            let ss = steady_state(&m, &rho0, 0.05, 1e-12).unwrap();
            let t_q = 4.0 * m.observables(0.0, &ss).a.norm_sqr() / (eta * eta);
            let t_c = transmission_spectrum(&p, 2.0, eta, &[w], SpectrumMode::Exact).unwrap()[0].t_c;
            assert!((t_q - t_c).abs() < 0.01 * t_c, "w={w}: {t_q} vs {t_c}");
        }
    }
}
