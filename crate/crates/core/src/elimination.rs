//! Effective parameters of the cavity + emitter-A subsystem after the
//! ensemble has been eliminated, and the diagnostics that tell whether the
//! elimination is trustworthy.
//!
//! With `M` the ensemble matrix and `G`, `V` the cavity and A couplings, the
//! effective parameters are built from the three bilinear forms `GᵀM⁻¹G`,
//! `GᵀM⁻¹V`, `VᵀM⁻¹V`:
//!
//! ```text
//! Δ_c^eff = Δ_c - Re GᵀM⁻¹G      κ^eff   = κ   + Im GᵀM⁻¹G
//! Δ_A^eff =     - Re VᵀM⁻¹V      γ_A^eff = γ_A + Im VᵀM⁻¹V
//! g_A^eff = g_A - Re GᵀM⁻¹V      μ       =       Im GᵀM⁻¹V
//! ```

use nalgebra::linalg::Schur;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cslinalg::{decompose_complex_symmetric, SymmetricSolver};
use crate::model::SingleEmitter;
use crate::{CouplingSet, Error, Result, Subsystem, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub delta_c_eff: f64,
    pub delta_a_eff: f64,
    pub g_a_eff: f64,
    pub kappa_eff: f64,
    pub gamma_a_eff: f64,
    pub mu: f64,
    /// Lab-frame cavity frequency `ω_A + Δ_c^eff`.
    pub omega_c_eff: f64,
    /// Lab-frame emitter frequency `ω_A + Δ_A^eff`.
    pub omega_a_eff: f64,
}

impl EffectiveParams {
    /// Parameters given directly, with A and the cavity resonant at `omega0`.
    pub fn resonant(g_a_eff: f64, mu: f64, kappa_eff: f64, gamma_a_eff: f64, omega0: f64) -> Self {
        Self {
            delta_c_eff: 0.0,
            delta_a_eff: 0.0,
            g_a_eff,
            kappa_eff,
            gamma_a_eff,
            mu,
            omega_c_eff: omega0,
            omega_a_eff: omega0,
        }
    }

    /// The subsystem without any ensemble.
    pub fn bare(sub: &Subsystem, g_a: f64) -> Self {
        Self {
            delta_c_eff: sub.delta_c(),
            delta_a_eff: 0.0,
            g_a_eff: g_a,
            kappa_eff: sub.kappa,
            gamma_a_eff: sub.gamma_a,
            mu: 0.0,
            omega_c_eff: sub.omega_c,
            omega_a_eff: sub.omega_a,
        }
    }

    /// Complex exchange coupling `g_A^eff - iμ`.
    pub fn coupling(&self) -> C64 {
        C64::new(self.g_a_eff, -self.mu)
    }

    /// `[[κ^eff, μ], [μ, γ_A^eff]]` over (photon, A).
    pub fn rate_matrix(&self) -> [[f64; 2]; 2] {
        [[self.kappa_eff, self.mu], [self.mu, self.gamma_a_eff]]
    }

    fn from_forms(sub: &Subsystem, g_a: f64, gmg: C64, gmv: C64, vmv: C64) -> Self {
        let delta_c_eff = sub.delta_c() - gmg.re;
        let delta_a_eff = -vmv.re;
        Self {
            delta_c_eff,
            delta_a_eff,
            g_a_eff: g_a - gmv.re,
            kappa_eff: sub.kappa + gmg.im,
            gamma_a_eff: sub.gamma_a + vmv.im,
            mu: gmv.im,
            omega_c_eff: sub.omega_a + delta_c_eff,
            omega_a_eff: sub.omega_a + delta_a_eff,
        }
    }
}

/// The three bilinear forms `(GᵀM⁻¹G, GᵀM⁻¹V, VᵀM⁻¹V)`.
pub fn bilinear_forms(couplings: &CouplingSet) -> Result<(C64, C64, C64)> {
    if couplings.n() == 0 {
        return Ok(Default::default());
    }
    let solver = SymmetricSolver::new(&couplings.m)?;
    let mg = solver.solve(&couplings.g)?;
    let mv = solver.solve(&couplings.v)?;
    Ok((couplings.g.dot(&mg), couplings.g.dot(&mv), couplings.v.dot(&mv)))
}

/// Effective parameters for any ensemble size.
pub fn effective_params(couplings: &CouplingSet, sub: &Subsystem) -> Result<EffectiveParams> {
    let (gmg, gmv, vmv) = bilinear_forms(couplings)?;
    Ok(EffectiveParams::from_forms(sub, couplings.g_a, gmg, gmv, vmv))
}

/// Closed-form effective parameters for a single ensemble emitter.
pub fn effective_params_single(p: &SingleEmitter, sub: &Subsystem) -> Result<EffectiveParams> {
    let SingleEmitter { delta_b, gamma_b, omega_ab, gamma_ab, g_a, g_b } = *p;
    let denom = delta_b * delta_b + gamma_b * gamma_b;
    if denom == 0.0 {
        return Err(Error::DegenerateEnsemble);
    }
    let g_a_eff = g_a - g_b * (omega_ab * delta_b + gamma_ab * gamma_b) / denom;
    let gamma_a_eff = sub.gamma_a
        + (gamma_b * (omega_ab * omega_ab - gamma_ab * gamma_ab) - 2.0 * delta_b * omega_ab * gamma_ab) / denom;
    let kappa_eff = sub.kappa + g_b * g_b * gamma_b / denom;
    let mu = g_b * (gamma_b * omega_ab - delta_b * gamma_ab) / denom;
    let delta_a_eff =
        -((omega_ab * omega_ab - gamma_ab * gamma_ab) * delta_b + 2.0 * omega_ab * gamma_ab * gamma_b) / denom;
    let delta_c_eff = sub.delta_c() - g_b * g_b * delta_b / denom;
    Ok(EffectiveParams {
        delta_c_eff,
        delta_a_eff,
        g_a_eff,
        kappa_eff,
        gamma_a_eff,
        mu,
        omega_c_eff: sub.omega_a + delta_c_eff,
        omega_a_eff: sub.omega_a + delta_a_eff,
    })
}

fn require_single(couplings: &CouplingSet) -> Result<SingleEmitter> {
    couplings
        .as_single()
        .ok_or_else(|| Error::Unsupported(format!("single-emitter analysis needs N = 1, got N = {}", couplings.n())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingModification {
    /// `g_A^eff - g_A`.
    pub delta_g_a: f64,
    /// Contribution of the coherent dipole coupling, `∝ Δ_B Ω_AB`.
    pub coherent_term: f64,
    /// Contribution of the dissipative dipole coupling, `∝ γ_B γ_AB`.
    pub dissipative_term: f64,
}

pub fn coupling_modification(couplings: &CouplingSet) -> Result<CouplingModification> {
    let p = require_single(couplings)?;
    let denom = p.delta_b * p.delta_b + p.gamma_b * p.gamma_b;
    if denom == 0.0 {
        return Err(Error::DegenerateEnsemble);
    }
    let coherent_term = -p.g_b * p.omega_ab * p.delta_b / denom;
    let dissipative_term = -p.g_b * p.gamma_ab * p.gamma_b / denom;
    Ok(CouplingModification { delta_g_a: coherent_term + dissipative_term, coherent_term, dissipative_term })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinewidthModification {
    /// `κ^eff - κ`, never negative.
    pub delta_kappa: f64,
    /// `γ_A^eff - γ_A = broadening - narrowing`.
    pub delta_gamma_a: f64,
    /// `δγ_A = γ_A [γ_B g - Δ_B f]² / (Δ_B² + γ_B²)`.
    pub broadening: f64,
    /// `γ_A f²`.
    pub narrowing: f64,
}

pub fn linewidth_modification(couplings: &CouplingSet) -> Result<LinewidthModification> {
    let p = require_single(couplings)?;
    if !(p.gamma_b > 0.0) {
        return Err(Error::InvalidParameter("linewidth split needs gamma_b > 0".into()));
    }
    let denom = p.delta_b * p.delta_b + p.gamma_b * p.gamma_b;
    let delta_kappa = p.g_b * p.g_b * p.gamma_b / denom;
    // γ_A g = Ω_AB √(γ_A/γ_B) etc.; the γ_A factors cancel.
    let lever = p.gamma_b * p.omega_ab - p.delta_b * p.gamma_ab;
    let broadening = lever * lever / (p.gamma_b * denom);
    let narrowing = p.gamma_ab * p.gamma_ab / p.gamma_b;
    Ok(LinewidthModification { delta_kappa, delta_gamma_a: broadening - narrowing, broadening, narrowing })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipatorModes {
    /// `α ∈ [0, 2π)` with `tan α = 2μ / (κ^eff - γ_A^eff)`.
    pub mixing_angle: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// Rows are the (photon, A) coefficients of `L_+` and `L_-`.
    pub jump_coefficients: [[f64; 2]; 2],
}

/// Rewrite the joint dissipator as two independent decay channels `L_±`.
pub fn diagonalize_dissipator(p: &EffectiveParams) -> Result<DissipatorModes> {
    let (k, g, mu) = (p.kappa_eff, p.gamma_a_eff, p.mu);
    if k < 0.0 || g < 0.0 {
        return Err(Error::Unphysical(format!("negative effective rates kappa_eff = {k}, gamma_a_eff = {g}")));
    }
    let mean = 0.5 * (k + g);
    let half_diff = 0.5 * (k - g);
    let radius = half_diff.hypot(mu);
    let gamma_plus = mean + radius;
    // Product form avoids cancellation in mean - radius.
    let det = k * g - mu * mu;
    let gamma_minus = if gamma_plus > 0.0 { det / gamma_plus } else { 0.0 };
    if gamma_minus < -1e-12 * gamma_plus.max(1.0) {
        return Err(Error::Unphysical(format!("gamma_minus = {gamma_minus} < 0 (kappa_eff·gamma_a_eff < mu²)")));
    }
    let mut alpha = (2.0 * mu).atan2(k - g);
    if alpha < 0.0 {
        alpha += 2.0 * std::f64::consts::PI;
    }
    let (s, c) = (0.5 * alpha).sin_cos();
    Ok(DissipatorModes {
        mixing_angle: alpha,
        gamma_plus,
        gamma_minus,
        jump_coefficients: [[c, s], [-s, c]],
    })
}

/// Thresholds for turning ratios into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityThresholds {
    pub pass: f64,
    pub marginal: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self { pass: 0.1, marginal: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Marginal,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityOptions {
    /// Mean photon number setting the scale of `α`.
    pub n_bar: f64,
    pub thresholds: ValidityThresholds,
    /// Subsystem amplitudes `(α, β_A)` for the retardation estimate.
    pub state: Option<(C64, C64)>,
}

impl Default for ValidityOptions {
    fn default() -> Self {
        Self { n_bar: 1.0, thresholds: ValidityThresholds::default(), state: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    /// Eigenvalues `λ_j` of `B = -iM`.
    pub eigenvalues: Vec<C64>,
    /// `max_j max(|Re x_jᵀV|, |Im x_jᵀV|) / |λ_j|`; for one emitter this is
    /// `max(|Ω_AB|, |γ_AB|) / |Δ_B - iγ_B|`.
    pub dipole_ratio: f64,
    /// `max_j |x_jᵀG| √n̄ / |λ_j|`.
    pub cavity_ratio: f64,
    /// `max_j max(|x_jᵀV|, |x_jᵀG| √n̄) / |λ_j|`.
    pub max_coupling_ratio: f64,
    /// `|Δ_c^eff - iκ^eff|`, `|Δ_A^eff - iγ_A^eff|`, `√n̄ |g_A^eff - iμ|`,
    /// each over `min_j |λ_j|`.
    pub scale_separation_ratios: [f64; 3],
    /// `‖β_ret‖ / ‖β_ad‖` for the supplied subsystem state.
    pub retardation_ratio: Option<f64>,
    /// For one emitter: the largest of the explicit composite conditions
    /// divided by `|Δ_B - iγ_B|`.
    pub single_emitter_ratio: Option<f64>,
    /// `min_j |x_jᵀx_j|` of the decomposition (0 when it failed).
    pub condition_metric: f64,
    /// Set when the eigendecomposition was unreliable and ratios fall back to
    /// norm bounds.
    pub degraded: bool,
    pub thresholds: ValidityThresholds,
    pub verdict: Verdict,
}

impl ValidityReport {
    fn checked_ratios(&self) -> impl Iterator<Item = f64> + '_ {
        [self.dipole_ratio, self.max_coupling_ratio]
            .into_iter()
            .chain(self.scale_separation_ratios)
            .chain(self.retardation_ratio)
    }
}

fn verdict_for(max_ratio: f64, t: &ValidityThresholds) -> Verdict {
    if max_ratio < t.pass {
        Verdict::Pass
    } else if max_ratio < t.marginal {
        Verdict::Marginal
    } else {
        Verdict::Fail
    }
}

/// `β_ad = -M⁻¹(Gα + Vβ_A)`: ensemble amplitudes slaved to the subsystem.
pub fn adiabatic_ensemble(couplings: &CouplingSet, alpha: C64, beta_a: C64) -> Result<DVector<C64>> {
    let solver = SymmetricSolver::new(&couplings.m)?;
    let rhs = &couplings.g * alpha + &couplings.v * beta_a;
    Ok(-solver.solve(&rhs)?)
}

/// Leading retardation correction to [`adiabatic_ensemble`].
///
/// Evaluates `Σ_j x_j/λ_j² {x_jᵀG [(Δ_c^eff - iκ^eff)α + (g^eff - iμ)β_A]
/// + x_jᵀV [(Δ_A^eff - iγ_A^eff)β_A + (g^eff - iμ)α]}` through
/// `Σ_j x_j x_jᵀ/λ_j² = B⁻² = -M⁻²`, so no eigendecomposition is needed.
pub fn retarded_ensemble(
    couplings: &CouplingSet,
    p: &EffectiveParams,
    alpha: C64,
    beta_a: C64,
) -> Result<DVector<C64>> {
    let solver = SymmetricSolver::new(&couplings.m)?;
    let cav = C64::new(p.delta_c_eff, -p.kappa_eff) * alpha + p.coupling() * beta_a;
    let emi = C64::new(p.delta_a_eff, -p.gamma_a_eff) * beta_a + p.coupling() * alpha;
    let rhs = &couplings.g * cav + &couplings.v * emi;
    let once = solver.solve(&rhs)?;
    Ok(-solver.solve(&once)?)
}

/// Quantify how far the elimination conditions are satisfied.
pub fn validity_report(couplings: &CouplingSet, sub: &Subsystem, opts: &ValidityOptions) -> Result<ValidityReport> {
    let p = effective_params(couplings, sub)?;
    let b = couplings.m.map(|z| -C64::i() * z);
    let sqrt_n = opts.n_bar.max(0.0).sqrt();
    let decoupled = couplings.g.iter().chain(couplings.v.iter()).all(|z| z.norm() == 0.0);

    let (eigenvalues, dipole_ratio, cavity_ratio, max_coupling_ratio, metric, degraded) = if couplings.n() == 0 {
        (Vec::new(), 0.0, 0.0, 0.0, 1.0, false)
    } else {
        match decompose_complex_symmetric(&b) {
            Ok(d) => {
                let (mut dip, mut cav, mut max) = (0.0f64, 0.0f64, 0.0f64);
                for j in 0..d.len() {
                    let x = d.vector(j);
                    let lam = d.eigenvalues[j].norm();
                    let xv = x.dot(&couplings.v);
                    let xg = x.dot(&couplings.g).norm() * sqrt_n;
                    dip = dip.max(xv.re.abs().max(xv.im.abs()) / lam);
                    cav = cav.max(xg / lam);
                    max = max.max(xv.norm().max(xg) / lam);
                }
                (d.eigenvalues.iter().copied().collect::<Vec<_>>(), dip, cav, max, d.condition_metric, false)
            }
            Err(Error::DecompositionUnreliable { .. }) => {
                let eig: Vec<C64> = Schur::new(b.clone()).unpack().1.diagonal().iter().copied().collect();
                let lam_min = eig.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
                let v = couplings.v.norm();
                let g = couplings.g.norm() * sqrt_n;
                (eig, v / lam_min, g / lam_min, v.max(g) / lam_min, 0.0, true)
            }
            Err(e) => return Err(e),
        }
    };

    let lam_min = eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let scale_separation_ratios = if decoupled {
        [0.0; 3]
    } else {
        [
            C64::new(p.delta_c_eff, -p.kappa_eff).norm() / lam_min,
            C64::new(p.delta_a_eff, -p.gamma_a_eff).norm() / lam_min,
            sqrt_n * p.coupling().norm() / lam_min,
        ]
    };

    let retardation_ratio = match opts.state {
        Some((alpha, beta_a)) => {
            let ad = adiabatic_ensemble(couplings, alpha, beta_a)?.norm();
            let ret = retarded_ensemble(couplings, &p, alpha, beta_a)?.norm();
            Some(if ad > 0.0 { ret / ad } else if ret > 0.0 { f64::INFINITY } else { 0.0 })
        }
        None => None,
    };

    let single_emitter_ratio = couplings.as_single().map(|s| {
        let scale = C64::new(s.delta_b, -s.gamma_b).norm();
        let terms = [
            C64::new(s.omega_ab, -s.gamma_ab).norm(),
            s.g_b.abs() * sqrt_n,
            scale_separation_ratios[0] * lam_min,
            scale_separation_ratios[1] * lam_min,
            scale_separation_ratios[2] * lam_min,
        ];
        terms.into_iter().fold(0.0, f64::max) / scale
    });

    let mut report = ValidityReport {
        eigenvalues,
        dipole_ratio,
        cavity_ratio,
        max_coupling_ratio,
        scale_separation_ratios,
        retardation_ratio,
        single_emitter_ratio,
        condition_metric: metric,
        degraded,
        thresholds: opts.thresholds,
        verdict: Verdict::Fail,
    };
    let worst = report.checked_ratios().fold(0.0, f64::max);
    report.verdict = verdict_for(worst, &opts.thresholds);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sub(kappa: f64, gamma_a: f64, delta_c: f64) -> Subsystem {
        Subsystem { omega_a: 0.0, omega_c: delta_c, kappa, gamma_a }
    }

    fn single(delta_b: f64, gamma_b: f64, omega_ab: f64, gamma_ab: f64, g_a: f64, g_b: f64) -> SingleEmitter {
        SingleEmitter { delta_b, gamma_b, omega_ab, gamma_ab, g_a, g_b }
    }

    fn assert_params_close(a: &EffectiveParams, b: &EffectiveParams, rel: f64) {
        let pairs = [
            (a.delta_c_eff, b.delta_c_eff),
            (a.delta_a_eff, b.delta_a_eff),
            (a.g_a_eff, b.g_a_eff),
            (a.kappa_eff, b.kappa_eff),
            (a.gamma_a_eff, b.gamma_a_eff),
            (a.mu, b.mu),
            (a.omega_c_eff, b.omega_c_eff),
            (a.omega_a_eff, b.omega_a_eff),
        ];
        for (x, y) in pairs {
            assert!((x - y).abs() <= rel * x.abs().max(y.abs()).max(1e-300) + 1e-15, "{x} vs {y}");
        }
    }

    #[test]
    fn decoupled_ensemble_leaves_bare_values() {
        let s = sub(0.7, 0.3, 1.5);
        let c = CouplingSet::decoupled(3, 4.0, 1.0, 0.25);
        let p = effective_params(&c, &s).unwrap();
        assert_eq!(p, EffectiveParams::bare(&s, 0.25));
    }

    #[test]
    fn dissipative_example() {
        let s = sub(1.0, 1.0, 0.0);
        let e = single(0.0, 10.0, 0.0, 1.0, 0.0, 5.0);
        let p = effective_params(&CouplingSet::single(&e), &s).unwrap();
        assert!((p.g_a_eff + 0.5).abs() < 1e-14);
        assert!((p.gamma_a_eff - 0.9).abs() < 1e-14);
        assert!((p.kappa_eff - 3.5).abs() < 1e-14);
        assert!(p.mu.abs() < 1e-15);
        assert_params_close(&p, &effective_params_single(&e, &s).unwrap(), 1e-12);
    }

    #[test]
    fn dispersive_example() {
        let s = sub(1.0, 1.0, 0.0);
        let e = single(100.0, 1.0, 5.0, 0.0, 0.0, 10.0);
        let p = effective_params(&CouplingSet::single(&e), &s).unwrap();
        let d = 10001.0;
        assert!((p.g_a_eff - (-5000.0 / d)).abs() < 1e-14);
        assert!((p.g_a_eff + 0.49995).abs() < 1e-6);
        assert!((p.mu - 0.0049995).abs() < 1e-8);
        assert!((p.kappa_eff - 1.0 - 0.0099990).abs() < 1e-8);
        assert!((p.gamma_a_eff - 1.0 - 0.0024998).abs() < 1e-7);
        assert_params_close(&p, &effective_params_single(&e, &s).unwrap(), 1e-12);
    }

    #[test]
    fn only_cavity_coupling_survives() {
        let s = sub(0.5, 0.2, 0.0);
        let e = single(3.0, 2.0, 0.0, 0.0, 0.4, 1.5);
        let p = effective_params_single(&e, &s).unwrap();
        assert_eq!(p.g_a_eff, 0.4);
        assert_eq!(p.mu, 0.0);
        assert!((p.kappa_eff - (0.5 + 2.25 * 2.0 / 13.0)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_single_emitter() {
        let e = single(0.0, 0.0, 1.0, 0.0, 0.0, 1.0);
        assert!(matches!(effective_params_single(&e, &sub(1.0, 1.0, 0.0)), Err(Error::DegenerateEnsemble)));
        assert!(matches!(
            effective_params(&CouplingSet::single(&e), &sub(1.0, 1.0, 0.0)),
            Err(Error::EliminationSingular { .. })
        ));
    }

    #[test]
    fn coupling_split() {
        let c = CouplingSet::single(&single(0.0, 2.0, 3.0, 0.4, 0.0, 1.0));
        let m = coupling_modification(&c).unwrap();
        assert_eq!(m.coherent_term, 0.0);
        let p = effective_params(&c, &sub(1.0, 1.0, 0.0)).unwrap();
        assert!((m.delta_g_a - p.g_a_eff).abs() < 1e-12);

        // Large detuning, purely coherent coupling: Δg = -g_B Ω/Δ_B asymptotically.
        let (db, gb, om, g_b) = (1e3, 1.0, 0.7, 2.0);
        let m = coupling_modification(&CouplingSet::single(&single(db, gb, om, 0.0, 0.0, g_b))).unwrap();
        let asym = -g_b * om / db;
        assert!(((m.delta_g_a - asym) / asym).abs() < 1e-5);

        let two = CouplingSet::decoupled(2, 1.0, 1.0, 0.0);
        assert!(matches!(coupling_modification(&two), Err(Error::Unsupported(_))));
    }

    #[test]
    fn narrowing_point_kills_broadening_and_mu() {
        // γ_B Ω = Δ_B γ_AB
        let c = CouplingSet::single(&single(4.0, 2.0, 0.6, 0.3, 0.1, 1.3));
        let l = linewidth_modification(&c).unwrap();
        assert!(l.broadening.abs() < 1e-15);
        let p = effective_params(&c, &sub(1.0, 1.0, 0.0)).unwrap();
        assert!(p.mu.abs() < 1e-15);
        assert!((l.delta_gamma_a + 0.3 * 0.3 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn resonant_linewidth_change_is_g2_minus_f2() {
        let (ga, gb) = (0.5f64, 2.0f64);
        let (g, f) = (0.8, 0.6);
        let s = (ga * gb).sqrt();
        let c = CouplingSet::single(&single(0.0, gb, s * g, s * f, 0.0, 1.0));
        let l = linewidth_modification(&c).unwrap();
        assert!((l.delta_gamma_a / ga - (g * g - f * f)).abs() < 1e-14);
    }

    #[test]
    fn mu_identity_on_dispersive_example() {
        let c = CouplingSet::single(&single(100.0, 1.0, 5.0, 0.0, 0.0, 10.0));
        let l = linewidth_modification(&c).unwrap();
        let p = effective_params(&c, &sub(1.0, 1.0, 0.0)).unwrap();
        assert!(((l.delta_kappa * l.broadening).sqrt() - p.mu.abs()).abs() < 1e-15);
        assert!((l.delta_kappa - 0.0099990).abs() < 1e-7 && (l.broadening - 0.0024998).abs() < 1e-7);
    }

    #[test]
    fn dissipator_examples() {
        let d = diagonalize_dissipator(&EffectiveParams::resonant(0.0, 0.0, 2.0, 1.0, 0.0)).unwrap();
        assert_eq!((d.gamma_plus, d.gamma_minus, d.mixing_angle), (2.0, 1.0, 0.0));
        assert_eq!(d.jump_coefficients[0], [1.0, 0.0]);

        let d = diagonalize_dissipator(&EffectiveParams::resonant(0.0, 0.5, 2.0, 1.0, 0.0)).unwrap();
        assert!((d.gamma_plus - (1.5 + 0.5f64.sqrt())).abs() < 1e-14);
        assert!((d.gamma_minus - (1.5 - 0.5f64.sqrt())).abs() < 1e-14);
        assert!((d.mixing_angle - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((d.gamma_plus * d.gamma_minus - 1.75).abs() < 1e-14);

        let bad = EffectiveParams::resonant(0.0, 2.0, 1.0, 1.0, 0.0);
        assert!(matches!(diagonalize_dissipator(&bad), Err(Error::Unphysical(_))));
    }

    #[test]
    fn dissipator_modes_diagonalise_rate_matrix() {
        for &(k, g, mu) in &[(2.0, 1.0, 0.5), (1.0, 3.0, -0.7), (0.4, 0.4, 0.2), (1.0, 2.0, 0.0), (5.0, 0.1, -0.6)] {
            let p = EffectiveParams::resonant(0.0, mu, k, g, 0.0);
            let d = diagonalize_dissipator(&p).unwrap();
            let r = DMatrix::from_row_slice(2, 2, &[k, mu, mu, g]);
            let l = DMatrix::from_row_slice(2, 2, &[
                d.jump_coefficients[0][0], d.jump_coefficients[0][1],
                d.jump_coefficients[1][0], d.jump_coefficients[1][1],
            ]);
            let rebuilt = l.transpose() * DMatrix::from_diagonal(&DVector::from_vec(vec![d.gamma_plus, d.gamma_minus])) * &l;
            assert!((rebuilt - r).norm() < 1e-12, "k={k} g={g} mu={mu}");
            assert!(d.mixing_angle >= 0.0 && d.mixing_angle < 2.0 * std::f64::consts::PI);
        }
    }

    #[test]
    fn validity_examples() {
        let opts = ValidityOptions::default();
        let r = validity_report(&CouplingSet::decoupled(2, 5.0, 1.0, 0.3), &sub(1.0, 1.0, 0.0), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.max_coupling_ratio, 0.0);
        assert_eq!(r.scale_separation_ratios, [0.0; 3]);

        let c = CouplingSet::single(&single(100.0, 1.0, 5.0, 0.0, 0.0, 0.0));
        let r = validity_report(&c, &sub(0.5, 0.5, 0.0), &opts).unwrap();
        assert!((r.dipole_ratio - 5.0 / 10001f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Pass);

        let c = CouplingSet::single(&single(0.0, 1.0, 5.0, 0.0, 0.0, 0.0));
        let r = validity_report(&c, &sub(0.5, 0.5, 0.0), &opts).unwrap();
        assert!((r.dipole_ratio - 5.0).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn single_emitter_composite_matches_general_ratios() {
        let c = CouplingSet::single(&single(20.0, 1.0, 1.0, 0.2, 0.2, 1.0));
        let r = validity_report(&c, &sub(0.05, 0.05, 0.0), &ValidityOptions::default()).unwrap();
        let general = r.max_coupling_ratio.max(r.scale_separation_ratios.iter().copied().fold(0.0, f64::max));
        assert!((r.single_emitter_ratio.unwrap() - general).abs() < 1e-12);
    }

    #[test]
    fn retardation_via_spectrum_matches_direct() {
        // Three coupled ensemble emitters with distinct eigenvalues.
        let m = DMatrix::from_row_slice(3, 3, &[
            C64::new(30.0, -1.0), C64::new(0.8, -0.3), C64::new(-0.4, -0.1),
            C64::new(0.8, -0.3), C64::new(25.0, -1.0), C64::new(0.5, -0.2),
            C64::new(-0.4, -0.1), C64::new(0.5, -0.2), C64::new(35.0, -1.0),
        ]);
        let g = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(-0.3, 0.0)]);
        let v = DVector::from_vec(vec![C64::new(0.7, -0.1), C64::new(-0.2, -0.05), C64::new(0.4, 0.02)]);
        let c = CouplingSet::new(m, g, v, 0.3).unwrap();
        let s = sub(0.1, 0.05, 0.2);
        let p = effective_params(&c, &s).unwrap();
        let (alpha, beta) = (C64::new(0.6, 0.2), C64::new(-0.1, 0.4));
        let direct = retarded_ensemble(&c, &p, alpha, beta).unwrap();

        let d = decompose_complex_symmetric(&c.m.map(|z| -C64::i() * z)).unwrap();
        let cav = C64::new(p.delta_c_eff, -p.kappa_eff) * alpha + p.coupling() * beta;
        let emi = C64::new(p.delta_a_eff, -p.gamma_a_eff) * beta + p.coupling() * alpha;
        let mut spectral = DVector::zeros(3);
        for j in 0..3 {
            let x = d.vector(j);
            let lam = d.eigenvalues[j];
            spectral += &x * ((x.dot(&c.g) * cav + x.dot(&c.v) * emi) / (lam * lam));
        }
        assert!((spectral - &direct).norm() < 1e-12 * direct.norm());

        let ad = adiabatic_ensemble(&c, alpha, beta).unwrap();
        let mut spectral_ad = DVector::zeros(3);
        for j in 0..3 {
            let x = d.vector(j);
            spectral_ad += &x * (C64::i() * (x.dot(&c.g) * alpha + x.dot(&c.v) * beta) / d.eigenvalues[j]);
        }
        assert!((spectral_ad - ad).norm() < 1e-12);
    }
}
