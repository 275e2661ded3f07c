//! Physical parameters of the cavity, emitter A and ensemble B, and the
//! coupling structures derived from them.
//!
//! All frequencies and rates are dimensionless (units of a reference rate,
//! conventionally γ_B) and lengths are in units of the cavity wavelength.
//! The rotating frame is fixed to ω_A, so detunings are `Δ_c = ω_c - ω_A` and
//! `Δ_B = ω_B - ω_A`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dipole::{dipole_coupling, PairGeometry};
use crate::{Error, Result, C64};

pub type Vec3 = [f64; 3];

fn default_axis() -> Vec3 {
    [0.0, 1.0, 0.0]
}

fn default_wavelength() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterA {
    pub omega: f64,
    pub gamma: f64,
    #[serde(default)]
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleB {
    pub omega: f64,
    pub gamma: f64,
    #[serde(default)]
    pub positions: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cavity {
    pub omega: f64,
    pub kappa: f64,
    pub g0_a: f64,
    pub g0_b: f64,
    /// Direction of the standing-wave modulation.
    #[serde(default = "default_axis")]
    pub axis: Vec3,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
}

impl Cavity {
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    fn unit_axis(&self) -> Option<Vec3> {
        let n = norm(self.axis);
        (n > 0.0 && n.is_finite()).then(|| [self.axis[0] / n, self.axis[1] / n, self.axis[2] / n])
    }

    /// `cos(k · axis·r)` mode profile at position `r`.
    pub fn profile(&self, r: Vec3) -> f64 {
        let u = self.unit_axis().unwrap_or_else(default_axis);
        (self.wavenumber() * dot(u, r)).cos()
    }
}

/// Explicit coupling values that replace the geometry-derived ones.
///
/// Useful for reproducing parameter sets quoted directly in terms of
/// couplings rather than positions. Any field left unset is derived from
/// geometry as usual.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingOverrides {
    pub g_a: Option<f64>,
    pub g_b: Option<Vec<f64>>,
    pub omega_ab: Option<Vec<f64>>,
    pub gamma_ab: Option<Vec<f64>>,
    pub omega_bb: Option<Vec<Vec<f64>>>,
    pub gamma_bb: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub cavity: Cavity,
    pub emitter_a: EmitterA,
    pub ensemble_b: EnsembleB,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingOverrides>,
}

impl SystemSpec {
    pub fn delta_c(&self) -> f64 {
        self.cavity.omega - self.emitter_a.omega
    }

    pub fn delta_b(&self) -> f64 {
        self.ensemble_b.omega - self.emitter_a.omega
    }

    pub fn n_emitters(&self) -> usize {
        if !self.ensemble_b.positions.is_empty() {
            return self.ensemble_b.positions.len();
        }
        self.couplings.as_ref().and_then(|o| o.g_b.as_ref()).map_or(0, Vec::len)
    }

    pub fn subsystem(&self) -> Subsystem {
        Subsystem {
            omega_a: self.emitter_a.omega,
            omega_c: self.cavity.omega,
            kappa: self.cavity.kappa,
            gamma_a: self.emitter_a.gamma,
        }
    }

    /// Copy with every frequency, rate and coupling divided by `reference_rate`.
    pub fn scaled(&self, reference_rate: f64) -> Result<Self> {
        if !(reference_rate > 0.0) || !reference_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("reference rate {reference_rate} must be > 0")));
        }
        let s = 1.0 / reference_rate;
        let mut out = self.clone();
        out.cavity.omega *= s;
        out.cavity.kappa *= s;
        out.cavity.g0_a *= s;
        out.cavity.g0_b *= s;
        out.emitter_a.omega *= s;
        out.emitter_a.gamma *= s;
        out.ensemble_b.omega *= s;
        out.ensemble_b.gamma *= s;
        if let Some(o) = out.couplings.as_mut() {
            let scale_vec = |v: &mut Option<Vec<f64>>| v.iter_mut().flatten().for_each(|x| *x *= s);
            let scale_mat =
                |v: &mut Option<Vec<Vec<f64>>>| v.iter_mut().flatten().flatten().for_each(|x| *x *= s);
            if let Some(g) = o.g_a.as_mut() {
                *g *= s;
            }
            scale_vec(&mut o.g_b);
            scale_vec(&mut o.omega_ab);
            scale_vec(&mut o.gamma_ab);
            scale_mat(&mut o.omega_bb);
            scale_mat(&mut o.gamma_bb);
        }
        Ok(out)
    }
}

/// Bare parameters of the retained subsystem (cavity + emitter A).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subsystem {
    pub omega_a: f64,
    pub omega_c: f64,
    pub kappa: f64,
    pub gamma_a: f64,
}

impl Subsystem {
    pub fn delta_c(&self) -> f64 {
        self.omega_c - self.omega_a
    }
}

/// Ensemble reduced to one emitter, described directly by its couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleEmitter {
    pub delta_b: f64,
    pub gamma_b: f64,
    pub omega_ab: f64,
    pub gamma_ab: f64,
    pub g_a: f64,
    pub g_b: f64,
}

/// The ensemble matrix `M`, cavity couplings `G`, A-B couplings `V` and the
/// cavity coupling of A.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    /// `M_jj = Δ_B - iγ_B`, `M_jl = Ω_jl - iγ_jl`.
    pub m: DMatrix<C64>,
    /// `g_j`.
    pub g: DVector<C64>,
    /// `V_j = Ω_jA - iγ_jA`.
    pub v: DVector<C64>,
    pub omega_ab: DVector<f64>,
    pub gamma_ab: DVector<f64>,
    pub g_a: f64,
}

impl CouplingSet {
    /// Assemble from parts. `M` must be square and symmetric to 1e-12 relative;
    /// an empty ensemble is allowed.
    pub fn new(m: DMatrix<C64>, g: DVector<C64>, v: DVector<C64>, g_a: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidParameter("ensemble matrix must be square".into()));
        }
        for len in [g.len(), v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let asym = (&m - m.transpose()).norm() / m.norm().max(f64::MIN_POSITIVE);
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        let omega_ab = v.map(|z| z.re);
        let gamma_ab = v.map(|z| -z.im);
        Ok(Self { m, g, v, omega_ab, gamma_ab, g_a })
    }

    pub fn single(p: &SingleEmitter) -> Self {
        let m = DMatrix::from_element(1, 1, C64::new(p.delta_b, -p.gamma_b));
        let g = DVector::from_element(1, C64::new(p.g_b, 0.0));
        let v = DVector::from_element(1, C64::new(p.omega_ab, -p.gamma_ab));
        Self::new(m, g, v, p.g_a).expect("1x1 matrix is symmetric")
    }

    /// Ensemble with no coupling to the subsystem.
    pub fn decoupled(n: usize, delta_b: f64, gamma_b: f64, g_a: f64) -> Self {
        let m = DMatrix::from_diagonal_element(n, n, C64::new(delta_b, -gamma_b));
        Self::new(m, DVector::zeros(n), DVector::zeros(n), g_a).expect("diagonal matrix is symmetric")
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn delta_b(&self) -> f64 {
        self.m[(0, 0)].re
    }

    pub fn gamma_b(&self) -> f64 {
        -self.m[(0, 0)].im
    }

    /// Real symmetric matrix of ensemble decay rates `γ_jl` (diagonal `γ_B`).
    pub fn ensemble_rates(&self) -> DMatrix<f64> {
        self.m.map(|z| -z.im)
    }

    /// Real symmetric matrix of ensemble exchange couplings (diagonal `Δ_B`).
    pub fn ensemble_energies(&self) -> DMatrix<f64> {
        self.m.map(|z| z.re)
    }

    /// The same couplings seen from a frame shifted by `shift` (adds `shift` to
    /// every diagonal entry of `M`).
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for j in 0..self.n() {
            out.m[(j, j)] += shift;
        }
        out
    }

    /// The single ensemble emitter view, when `N = 1`.
    pub fn as_single(&self) -> Option<SingleEmitter> {
        (self.n() == 1).then(|| SingleEmitter {
            delta_b: self.delta_b(),
            gamma_b: self.gamma_b(),
            omega_ab: self.omega_ab[0],
            gamma_ab: self.gamma_ab[0],
            g_a: self.g_a,
            g_b: self.g[0].re,
        })
    }
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Derive `M`, `G`, `V` and `g_A` from positions, then apply any overrides.
pub fn build_couplings(spec: &SystemSpec) -> Result<CouplingSet> {
    let n = spec.n_emitters();
    if n == 0 {
        return Err(Error::InvalidParameter("ensemble B needs at least one emitter".into()));
    }
    let cav = &spec.cavity;
    let k = cav.wavenumber();
    let gamma_a = spec.emitter_a.gamma;
    let gamma_b = spec.ensemble_b.gamma;
    let over = spec.couplings.clone().unwrap_or_default();
    let positions = &spec.ensemble_b.positions;
    let has_geometry = !positions.is_empty();

    let check_len = |name: &str, len: usize| {
        if len == n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("override {name} has {len} entries, expected {n}")))
        }
    };
    let need_geometry = |name: &str| {
        Error::InvalidParameter(format!("no positions given and no {name} override"))
    };

    let g: Vec<f64> = match &over.g_b {
        Some(gb) => {
            check_len("g_b", gb.len())?;
            gb.clone()
        }
        None if has_geometry => positions.iter().map(|&r| cav.g0_b * cav.profile(r)).collect(),
        None => return Err(need_geometry("g_b")),
    };
    let g_a = over.g_a.unwrap_or_else(|| cav.g0_a * cav.profile(spec.emitter_a.position));

    let mut v: Vec<C64> = Vec::with_capacity(n);
    if over.omega_ab.is_none() || over.gamma_ab.is_none() {
        if !has_geometry {
            return Err(need_geometry("omega_ab/gamma_ab"));
        }
        for &r in positions {
            let geom = PairGeometry::from_separation(sub(r, spec.emitter_a.position), k)?;
            let c = dipole_coupling(geom, gamma_a, gamma_b)?;
            v.push(C64::new(c.omega, -c.gamma));
        }
    } else {
        v.resize(n, C64::new(0.0, 0.0));
    }
    if let Some(om) = &over.omega_ab {
        check_len("omega_ab", om.len())?;
        v.iter_mut().zip(om).for_each(|(z, &o)| z.re = o);
    }
    if let Some(ga) = &over.gamma_ab {
        check_len("gamma_ab", ga.len())?;
        v.iter_mut().zip(ga).for_each(|(z, &y)| z.im = -y);
    }

    let mut m = DMatrix::from_diagonal_element(n, n, C64::new(spec.delta_b(), -gamma_b));
    if n > 1 {
        if over.omega_bb.is_none() || over.gamma_bb.is_none() {
            if !has_geometry {
                return Err(need_geometry("omega_bb/gamma_bb"));
            }
            for j in 0..n {
                for l in (j + 1)..n {
                    let geom = PairGeometry::from_separation(sub(positions[l], positions[j]), k)?;
                    let c = dipole_coupling(geom, gamma_b, gamma_b)?;
                    let z = C64::new(c.omega, -c.gamma);
                    m[(j, l)] = z;
                    m[(l, j)] = z;
                }
            }
        }
        let apply = |m: &mut DMatrix<C64>, table: &Vec<Vec<f64>>, name: &str, real: bool| -> Result<()> {
            if table.len() != n || table.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidParameter(format!("override {name} must be {n}x{n}")));
            }
            for j in 0..n {
                for l in (j + 1)..n {
                    let x = table[j][l];
                    for (a, b) in [(j, l), (l, j)] {
                        if real {
                            m[(a, b)].re = x;
                        } else {
                            m[(a, b)].im = -x;
                        }
                    }
                }
            }
            Ok(())
        };
        if let Some(t) = &over.omega_bb {
            apply(&mut m, t, "omega_bb", true)?;
        }
        if let Some(t) = &over.gamma_bb {
            apply(&mut m, t, "gamma_bb", false)?;
        }
    }

    let g = DVector::from_iterator(n, g.into_iter().map(|x| C64::new(x, 0.0)));
    CouplingSet::new(m, g, DVector::from_vec(v), g_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, message: message.into() }
    }

    fn warning(message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Check every invariant of a [`SystemSpec`]. An empty list means the spec is
/// consistent; warnings do not prevent use.
pub fn validate_spec(spec: &SystemSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let finite = [
        ("cavity.omega", spec.cavity.omega),
        ("cavity.kappa", spec.cavity.kappa),
        ("cavity.g0_a", spec.cavity.g0_a),
        ("cavity.g0_b", spec.cavity.g0_b),
        ("cavity.wavelength", spec.cavity.wavelength),
        ("emitter_a.omega", spec.emitter_a.omega),
        ("emitter_a.gamma", spec.emitter_a.gamma),
        ("ensemble_b.omega", spec.ensemble_b.omega),
        ("ensemble_b.gamma", spec.ensemble_b.gamma),
    ];
    for (name, x) in finite {
        if !x.is_finite() {
            out.push(Diagnostic::error(format!("{name} is not finite")));
        }
    }
    for (name, x) in [
        ("emitter_a.gamma", spec.emitter_a.gamma),
        ("ensemble_b.gamma", spec.ensemble_b.gamma),
        ("cavity.kappa", spec.cavity.kappa),
    ] {
        if x < 0.0 {
            out.push(Diagnostic::error(format!("negative decay rate {name} = {x}")));
        }
    }
    for (name, x) in [("cavity.g0_a", spec.cavity.g0_a), ("cavity.g0_b", spec.cavity.g0_b)] {
        if !(x > 0.0) {
            out.push(Diagnostic::error(format!("peak coupling {name} = {x} must be > 0")));
        }
    }
    if !(spec.cavity.wavelength > 0.0) {
        out.push(Diagnostic::error("cavity.wavelength must be > 0"));
    }
    if spec.cavity.unit_axis().is_none() {
        out.push(Diagnostic::error("cavity.axis must be a nonzero vector"));
    }
    if spec.n_emitters() == 0 {
        out.push(Diagnostic::error("ensemble B needs at least one emitter"));
    }

    let positions = &spec.ensemble_b.positions;
    for (j, &r) in positions.iter().enumerate() {
        if r.iter().any(|x| !x.is_finite()) {
            out.push(Diagnostic::error(format!("ensemble_b.positions[{j}] is not finite")));
        }
        if norm(sub(r, spec.emitter_a.position)) == 0.0 {
            out.push(Diagnostic::error(format!("ensemble_b.positions[{j}] coincides with emitter A")));
        }
        for (l, &s) in positions.iter().enumerate().skip(j + 1) {
            if norm(sub(r, s)) == 0.0 {
                out.push(Diagnostic::error(format!("ensemble_b.positions[{j}] and [{l}] coincide")));
            }
        }
    }

    if let Some(o) = &spec.couplings {
        let n = spec.n_emitters();
        for (name, v) in [("g_b", &o.g_b), ("omega_ab", &o.omega_ab), ("gamma_ab", &o.gamma_ab)] {
            if let Some(v) = v {
                if v.len() != n {
                    out.push(Diagnostic::error(format!("couplings.{name} has {} entries, expected {n}", v.len())));
                }
            }
        }
        for (name, t) in [("omega_bb", &o.omega_bb), ("gamma_bb", &o.gamma_bb)] {
            if let Some(t) = t {
                if t.len() != n || t.iter().any(|r| r.len() != n) {
                    out.push(Diagnostic::error(format!("couplings.{name} must be {n}x{n}")));
                } else if (0..n).any(|j| (0..n).any(|l| t[j][l] != t[l][j])) {
                    out.push(Diagnostic::error(format!("couplings.{name} must be symmetric")));
                }
            }
        }
        if positions.is_empty()
            && (o.omega_ab.is_none() || o.gamma_ab.is_none() || (n > 1 && (o.omega_bb.is_none() || o.gamma_bb.is_none())))
        {
            out.push(Diagnostic::error("without positions every ensemble coupling must be given explicitly"));
        }
    }

    let (ga, gb) = (spec.emitter_a.gamma, spec.ensemble_b.gamma);
    let (g0a, g0b) = (spec.cavity.g0_a, spec.cavity.g0_b);
    if ga > 0.0 && gb > 0.0 && g0a > 0.0 && g0b > 0.0 {
        let expected = (ga / gb).sqrt();
        let actual = g0a / g0b;
        if ((actual - expected) / expected).abs() > 0.01 {
            out.push(Diagnostic::warning(format!(
                "g0_a/g0_b = {actual:.6} differs from sqrt(gamma_a/gamma_b) = {expected:.6} by more than 1%"
            )));
        }
    }
    out
}
