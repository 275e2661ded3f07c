//! Configuration file schema and its resolution into core types.
//!
//! A config is TOML. A physical system is given by the three sections
//! `[cavity]`, `[emitter_a]` and `[ensemble_b]` (plus optional
//! `[couplings]` overrides); alternatively `[effective]` supplies effective
//! subsystem parameters directly. `[dipole]` describes a single emitter pair
//! and is only used by sweeps.

use std::path::Path;

use cavelim::dipole::{dipole_coupling, PairGeometry};
use cavelim::elimination::{effective_params, EffectiveParams};
use cavelim::model::{build_couplings, validate_spec, Cavity, CouplingOverrides, EmitterA, EnsembleB, Severity};
use cavelim::{CouplingSet, Subsystem, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Every rate and frequency is divided by this before use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<Cavity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitter_a: Option<EmitterA>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_b: Option<EnsembleB>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective: Option<EffectiveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole: Option<DipoleSection>,
}

/// Effective subsystem parameters given directly, in the frame of `ω_A^eff`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveSection {
    pub g_a_eff: f64,
    #[serde(default)]
    pub mu: f64,
    pub kappa_eff: f64,
    pub gamma_a_eff: f64,
    #[serde(default)]
    pub omega_c_eff: f64,
    /// Defaults to `omega_c_eff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_a_eff: Option<f64>,
    /// Bare cavity linewidth used to normalise spectra; defaults to `kappa_eff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_bare: Option<f64>,
}

/// A single emitter pair for dipole-coupling sweeps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleSection {
    pub theta: f64,
    /// `k r`.
    pub xi: f64,
    #[serde(default = "one")]
    pub gamma_a: f64,
    #[serde(default = "one")]
    pub gamma_b: f64,
}

fn one() -> f64 {
    1.0
}

/// A validated physical system with its derived couplings.
#[derive(Debug, Clone)]
pub struct System {
    pub sub: Subsystem,
    pub couplings: CouplingSet,
    pub warnings: Vec<String>,
}

/// Effective parameters together with the system they came from, if any.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: EffectiveParams,
    pub kappa_bare: f64,
    pub system: Option<System>,
}

pub fn load(path: &Path) -> CliResult<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<Config, toml::de::Error> {
    toml::from_str(text)
}

pub fn from_table(table: toml::Table) -> CliResult<Config> {
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::config(e.to_string()))
}

impl Config {
    fn scale(&self) -> CliResult<f64> {
        match self.reference_rate {
            None => Ok(1.0),
            Some(r) if r > 0.0 && r.is_finite() => Ok(1.0 / r),
            Some(r) => Err(CliError::config(format!("reference_rate {r} must be > 0"))),
        }
    }

    pub fn has_system(&self) -> bool {
        self.cavity.is_some() || self.emitter_a.is_some() || self.ensemble_b.is_some()
    }

    pub fn system(&self) -> CliResult<System> {
        let (Some(cavity), Some(emitter_a), Some(ensemble_b)) = (&self.cavity, &self.emitter_a, &self.ensemble_b)
        else {
            let missing: Vec<&str> = [
                ("[cavity]", self.cavity.is_none()),
                ("[emitter_a]", self.emitter_a.is_none()),
                ("[ensemble_b]", self.ensemble_b.is_none()),
            ]
            .iter()
            .filter(|x| x.1)
            .map(|x| x.0)
            .collect();
            return Err(CliError::config(format!("missing section(s) {}", missing.join(", "))));
        };
        let mut spec = SystemSpec {
            cavity: cavity.clone(),
            emitter_a: emitter_a.clone(),
            ensemble_b: ensemble_b.clone(),
            couplings: self.couplings.clone(),
        };
        if let Some(r) = self.reference_rate {
            spec = spec.scaled(r)?;
        }
        let diags = validate_spec(&spec);
        let errors: Vec<String> =
            diags.iter().filter(|d| d.severity == Severity::Error).map(|d| d.message.clone()).collect();
        if !errors.is_empty() {
            return Err(CliError::config(errors.join("; ")));
        }
        let warnings = diags.iter().filter(|d| d.severity == Severity::Warning).map(|d| d.message.clone()).collect();
        let couplings = build_couplings(&spec)?;
        Ok(System { sub: spec.subsystem(), couplings, warnings })
    }

    /// Effective parameters from `[effective]` or by eliminating the system.
    pub fn resolve(&self) -> CliResult<Resolved> {
        match (&self.effective, self.has_system()) {
            (Some(_), true) => Err(CliError::config("give either [effective] or a system, not both")),
            (Some(e), false) => {
                let s = self.scale()?;
                let omega_a = e.omega_a_eff.unwrap_or(e.omega_c_eff);
                let fields = [
                    ("g_a_eff", e.g_a_eff),
                    ("mu", e.mu),
                    ("kappa_eff", e.kappa_eff),
                    ("gamma_a_eff", e.gamma_a_eff),
                    ("omega_c_eff", e.omega_c_eff),
                    ("omega_a_eff", omega_a),
                ];
                if let Some((name, _)) = fields.iter().find(|f| !f.1.is_finite()) {
                    return Err(CliError::config(format!("effective.{name} must be finite")));
                }
                if e.kappa_eff < 0.0 || e.gamma_a_eff < 0.0 {
                    return Err(CliError::config("effective linewidths must be >= 0"));
                }
                let params = EffectiveParams {
                    delta_c_eff: s * (e.omega_c_eff - omega_a),
                    delta_a_eff: 0.0,
                    g_a_eff: s * e.g_a_eff,
                    kappa_eff: s * e.kappa_eff,
                    gamma_a_eff: s * e.gamma_a_eff,
                    mu: s * e.mu,
                    omega_c_eff: s * e.omega_c_eff,
                    omega_a_eff: s * omega_a,
                };
                let kappa_bare = s * e.kappa_bare.unwrap_or(e.kappa_eff);
                if !(kappa_bare > 0.0) {
                    return Err(CliError::config("effective.kappa_bare must be > 0"));
                }
                Ok(Resolved { params, kappa_bare, system: None })
            }
            (None, true) => {
                let system = self.system()?;
                let params = effective_params(&system.couplings, &system.sub)?;
                Ok(Resolved { params, kappa_bare: system.sub.kappa, system: Some(system) })
            }
            (None, false) => Err(CliError::config("config defines neither a system nor [effective] parameters")),
        }
    }

    /// `(g, f, Ω, γ)` for the `[dipole]` pair.
    pub fn dipole_values(&self) -> CliResult<Option<[f64; 4]>> {
        let Some(d) = &self.dipole else { return Ok(None) };
        let c = dipole_coupling(PairGeometry::new(d.xi, d.theta)?, d.gamma_a, d.gamma_b)?;
        Ok(Some([c.g_dimless, c.f_dimless, c.omega, c.gamma]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISPERSIVE: &str = r#"
        [cavity]
        omega = 0.0
        kappa = 1.0
        g0_a = 1.0
        g0_b = 10.0
        [emitter_a]
        omega = 0.0
        gamma = 1.0
        [ensemble_b]
        omega = 100.0
        gamma = 1.0
        [couplings]
        g_a = 0.0
        g_b = [10.0]
        omega_ab = [5.0]
        gamma_ab = [0.0]
    "#;

    #[test]
    fn dispersive_fixture_resolves() {
        let r = parse(DISPERSIVE).unwrap().resolve().unwrap();
        assert!((r.params.g_a_eff + 0.49995).abs() < 1e-6);
        assert_eq!(r.kappa_bare, 1.0);
    }

    #[test]
    fn reference_rate_scales_everything() {
        let text = format!("reference_rate = 2.0\n{DISPERSIVE}");
        let a = parse(DISPERSIVE).unwrap().resolve().unwrap().params;
        let b = parse(&text).unwrap().resolve().unwrap().params;
        assert!((2.0 * b.g_a_eff - a.g_a_eff).abs() < 1e-14);
        assert!((2.0 * b.kappa_eff - a.kappa_eff).abs() < 1e-14);
    }

    #[test]
    fn unknown_field_reports_location() {
        let err = parse("[cavity]\nomega = 1.0\nkapa = 2.0\n").unwrap_err().to_string();
        assert!(err.contains("kapa"), "{err}");
        assert!(err.contains("line 3") || err.contains("3 |"), "{err}");
    }

    #[test]
    fn partial_system_is_rejected() {
        let c = parse("[cavity]\nomega = 0.0\nkappa = 1.0\ng0_a = 1.0\ng0_b = 1.0\n").unwrap();
        assert!(matches!(c.resolve(), Err(CliError::Config(m)) if m.contains("[emitter_a]")));
    }

    #[test]
    fn effective_section_sets_frame() {
        let c = parse("[effective]\ng_a_eff = 2.0\nmu = 0.5\nkappa_eff = 2.0\ngamma_a_eff = 1.0\nomega_c_eff = 3.0\n")
            .unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.params.delta_c_eff, 0.0);
        assert_eq!(r.params.omega_a_eff, 3.0);
        assert_eq!(r.kappa_bare, 2.0);
    }

    #[test]
    fn negative_g0_is_a_config_error() {
        let text = DISPERSIVE.replace("g0_b = 10.0", "g0_b = -1.0");
        assert!(matches!(parse(&text).unwrap().resolve(), Err(CliError::Config(_))));
    }
}
