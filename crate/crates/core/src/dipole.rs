//! Free-space dipole-dipole interaction between two z-polarised emitters.
//!
//! The complex coupling is
//!
//! ```text
//! V = -(3√(γ_A γ_B)/2) · ( sin²θ e^{iξ}/ξ + (3cos²θ - 1)(e^{iξ}/ξ³ - i e^{iξ}/ξ²) )
//! ```
//!
//! with `ξ = k r` and `θ` the polar angle from the dipole (z) axis. The real
//! part is the coherent exchange `Ω`, minus the imaginary part is the
//! correlated decay rate `γ_AB`. Dividing both by `√(γ_A γ_B)` gives the
//! geometry-only functions `g` and `f`.

use serde::Serialize;

use crate::{Error, Result};

/// Angle at which the near-field terms of the interaction vanish.
pub const MAGIC_ANGLE: f64 = 0.955_316_618_124_509_3; // arccos(1/√3)

/// Below this ξ the dissipative part uses its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-2;

/// Display clamp for `g` in emitted map data.
pub const G_DISPLAY_CLAMP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    /// Retarded phase `k r`.
    pub xi: f64,
    /// Polar angle from the z axis, in `[0, π]`.
    pub theta: f64,
    /// `cos θ`, kept separately so mirrored geometries give identical values.
    pub cos_theta: f64,
}

impl PairGeometry {
    pub fn new(xi: f64, theta: f64) -> Result<Self> {
        Self::check_xi(xi)?;
        Ok(Self { xi, theta, cos_theta: theta.cos() })
    }

    pub fn from_cos(xi: f64, cos_theta: f64) -> Result<Self> {
        Self::check_xi(xi)?;
        if !(-1.0..=1.0).contains(&cos_theta) {
            return Err(Error::InvalidParameter(format!("cos θ = {cos_theta} outside [-1, 1]")));
        }
        Ok(Self { xi, theta: cos_theta.acos(), cos_theta })
    }

    fn check_xi(xi: f64) -> Result<()> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::SingularGeometry(format!("separation phase ξ = {xi} must be > 0")));
        }
        Ok(())
    }

    /// Geometry of the separation vector `r = r_b - r_a` for wave number `k`.
    pub fn from_separation(r: [f64; 3], k: f64) -> Result<Self> {
        let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if dist == 0.0 {
            return Err(Error::SingularGeometry("coincident emitter positions".into()));
        }
        Self::from_cos(k * dist, (r[2] / dist).clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipoleCoupling {
    /// Coherent part `Ω_AB = Re V`.
    pub omega: f64,
    /// Dissipative part `γ_AB = -Im V`.
    pub gamma: f64,
    /// `Ω_AB / √(γ_A γ_B)`.
    pub g_dimless: f64,
    /// `γ_AB / √(γ_A γ_B)`.
    pub f_dimless: f64,
}

/// `sin ξ/ξ³ - cos ξ/ξ²`, which tends to 1/3 as ξ → 0.
fn near_field_sine(xi: f64) -> f64 {
    if xi < SERIES_THRESHOLD {
        // Σ_m (-1)^m (2m+2)/(2m+3)! ξ^{2m}
        let x2 = xi * xi;
        let mut term_factorial = 6.0; // (2m+3)! at m = 0
        let mut power = 1.0;
        let mut sum = 0.0;
        for m in 0..6 {
            let mf = m as f64;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (2.0 * mf + 2.0) / term_factorial * power;
            power *= x2;
            term_factorial *= (2.0 * mf + 4.0) * (2.0 * mf + 5.0);
        }
        sum
    } else {
        let (s, c) = xi.sin_cos();
        s / (xi * xi * xi) - c / (xi * xi)
    }
}

/// Dimensionless `(g, f)` at the given geometry.
pub fn dimensionless(geom: PairGeometry) -> (f64, f64) {
    let xi = geom.xi;
    let (s_xi, c_xi) = xi.sin_cos();
    let cos_t = geom.cos_theta;
    let sin2 = 1.0 - cos_t * cos_t;
    let aniso = 3.0 * cos_t * cos_t - 1.0;

    let g = -1.5 * (sin2 * c_xi / xi + aniso * (c_xi / (xi * xi * xi) + s_xi / (xi * xi)));
    let f = 1.5 * (sin2 * s_xi / xi + aniso * near_field_sine(xi));
    (g, f)
}

/// Evaluate the pair interaction for decay rates `gamma_a`, `gamma_b`.
pub fn dipole_coupling(geom: PairGeometry, gamma_a: f64, gamma_b: f64) -> Result<DipoleCoupling> {
    if !(geom.xi > 0.0) {
        return Err(Error::SingularGeometry(format!("separation phase ξ = {} must be > 0", geom.xi)));
    }
    if gamma_a < 0.0 || gamma_b < 0.0 {
        return Err(Error::InvalidParameter("decay rates must be non-negative".into()));
    }
    let (g, f) = dimensionless(geom);
    let scale = (gamma_a * gamma_b).sqrt();
    Ok(DipoleCoupling { omega: scale * g, gamma: scale * f, g_dimless: g, f_dimless: f })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapPoint {
    pub theta: f64,
    pub xi: f64,
    pub g: f64,
    pub f: f64,
}

/// Tabulate `g` and `f` over a `θ × ξ` grid, row-major in θ.
///
/// Values are exact; use [`MapPoint::display`] to apply the plot clamp.
pub fn coupling_map(thetas: &[f64], xis: &[f64]) -> Result<Vec<MapPoint>> {
    if thetas.is_empty() || xis.is_empty() {
        return Err(Error::InvalidParameter("coupling map grids must be nonempty".into()));
    }
    let mut out = Vec::with_capacity(thetas.len() * xis.len());
    for &theta in thetas {
        for &xi in xis {
            let (g, f) = dimensionless(PairGeometry::new(xi, theta)?);
            out.push(MapPoint { theta, xi, g, f });
        }
    }
    Ok(out)
}

impl MapPoint {
    /// Copy with `g` clamped to the display window.
    pub fn display(self) -> Self {
        Self { g: self.g.clamp(-G_DISPLAY_CLAMP, G_DISPLAY_CLAMP), ..self }
    }
}
