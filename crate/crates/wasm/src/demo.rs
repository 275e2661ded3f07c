//! Plain-Rust computations behind the browser demo.

use cavelim::classical::{polariton_eigenvalues, transmission_spectrum, SpectrumMode};
use cavelim::dipole::{dimensionless, PairGeometry, G_DISPLAY_CLAMP};
use cavelim::elimination::EffectiveParams;

/// Values per row returned by [`polariton_curves`].
pub const CURVE_STRIDE: usize = 5;

fn grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>, String> {
    if count < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
        return Err(format!("bad grid {min}..{max} with {count} points"));
    }
    let step = (max - min) / (count - 1) as f64;
    Ok((0..count).map(|i| min + step * i as f64).collect())
}

/// `T_c` on a laser grid for resonant effective parameters.
#[allow(clippy::too_many_arguments)]
pub fn transmission(
    g: f64,
    mu: f64,
    kappa: f64,
    gamma: f64,
    eta: f64,
    omega_min: f64,
    omega_max: f64,
    count: usize,
    polariton: bool,
) -> Result<Vec<f64>, String> {
    let p = EffectiveParams::resonant(g, mu, kappa, gamma, 0.0);
    let mode = if polariton { SpectrumMode::Polariton } else { SpectrumMode::Exact };
    let omegas = grid(omega_min, omega_max, count)?;
    let pts = transmission_spectrum(&p, kappa, eta, &omegas, mode).map_err(|e| e.to_string())?;
    Ok(pts.into_iter().map(|q| q.t_c).collect())
}

/// Rows of `[g, Γ+, Γ-, ω+, ω-]` for `g` from 0 to `g_max`.
pub fn polariton_curves(mu: f64, kappa: f64, gamma: f64, g_max: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(kappa >= 0.0 && gamma >= 0.0) {
        return Err("linewidths must be >= 0".into());
    }
    let mut out = Vec::with_capacity(CURVE_STRIDE * count);
    for g in grid(0.0, g_max, count)? {
        let (xp, xm) = polariton_eigenvalues(kappa, gamma, g, mu);
        out.extend([g, -xp.re, -xm.re, -xp.im, -xm.im]);
    }
    Ok(out)
}

/// Row-major `height × width` image of `g` or `f` in the plane containing
/// the dipole axis (vertical), spanning `|x|, |z| <= xi_max` in units of
/// `1/k`. Pixels at the origin or outside `xi_max` are NaN.
pub fn dipole_image(width: usize, height: usize, xi_max: f64, dissipative: bool, clamp: bool) -> Result<Vec<f64>, String> {
    if width == 0 || height == 0 || !(xi_max > 0.0) {
        return Err("image needs positive size and radius".into());
    }
    let coord = |i: usize, n: usize| xi_max * (2 * i as i64 + 1 - n as i64) as f64 / n as f64;
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        let z = -coord(row, height);
        for col in 0..width {
            let x = coord(col, width);
            let xi = x.hypot(z);
            if xi > xi_max || xi == 0.0 {
                out.push(f64::NAN);
                continue;
            }
            let (g, f) = dimensionless(PairGeometry::from_cos(xi, z / xi).map_err(|e| e.to_string())?);
            out.push(match (dissipative, clamp) {
                (true, _) => f,
                (false, true) => g.clamp(-G_DISPLAY_CLAMP, G_DISPLAY_CLAMP),
                (false, false) => g,
            });
        }
    }
    Ok(out)
}
