//! Classical fourth-order Runge-Kutta with optional step-doubling control.
//!
//! Output is produced on the uniform grid `0, dt, 2dt, …, t_end`. With a
//! relative tolerance set, each output interval is covered by sub-steps whose
//! local error (full step vs two half steps) stays below the tolerance; the
//! sub-step is halved on rejection.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

pub trait OdeState: Clone {
    /// `self + h * k`.
    fn axpy(&self, h: f64, k: &Self) -> Self;
    fn max_abs(&self) -> f64;
    fn max_abs_diff(&self, other: &Self) -> f64;
}

macro_rules! impl_ode_state {
    ($t:ty) => {
        impl OdeState for $t {
            fn axpy(&self, h: f64, k: &Self) -> Self {
                let mut out = self.clone();
                out.zip_apply(k, |a, b| *a += b * h);
                out
            }

            fn max_abs(&self) -> f64 {
                self.iter().fold(0.0, |m, z| m.max(z.norm()))
            }

            fn max_abs_diff(&self, other: &Self) -> f64 {
                self.iter().zip(other.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
            }
        }
    };
}

impl_ode_state!(DVector<C64>);
impl_ode_state!(DMatrix<C64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4Options {
    pub dt: f64,
    pub t_end: f64,
    /// Relative local error tolerance; `None` for fixed steps.
    pub rel_tol: Option<f64>,
    /// Maximum number of halvings of `dt` before giving up.
    pub max_halvings: u32,
}

impl Rk4Options {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, rel_tol: None, max_halvings: 0 }
    }

    pub fn adaptive(dt: f64, t_end: f64, rel_tol: f64) -> Self {
        Self { dt, t_end, rel_tol: Some(rel_tol), max_halvings: 30 }
    }

    fn validate(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step {} must be > 0", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("end time {} must be >= 0", self.t_end)));
        }
        Ok((self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

pub fn rk4_step<S: OdeState>(f: &mut impl FnMut(f64, &S) -> S, t: f64, y: &S, h: f64) -> S {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &y.axpy(0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &y.axpy(0.5 * h, &k2));
    let k4 = f(t + h, &y.axpy(h, &k3));
    let mut out = y.axpy(h / 6.0, &k1);
    out = out.axpy(h / 3.0, &k2);
    out = out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4)
}

/// Integrate `dy/dt = f(t, y)`, calling `observe` at every output time
/// (including `t = 0`). Returns the final state.
pub fn integrate_with<S: OdeState>(
    mut f: impl FnMut(f64, &S) -> S,
    y0: S,
    opts: &Rk4Options,
    mut observe: impl FnMut(f64, &S) -> Result<()>,
) -> Result<S> {
    let steps = opts.validate()?;
    let mut y = y0;
    observe(0.0, &y)?;
    let mut h_sub = opts.dt;
    for step in 0..steps {
        let t0 = step as f64 * opts.dt;
        let t1 = ((step + 1) as f64 * opts.dt).min(opts.t_end);
        match opts.rel_tol {
            None => y = rk4_step(&mut f, t0, &y, t1 - t0),
            Some(tol) => {
                let min_h = opts.dt / 2f64.powi(opts.max_halvings as i32);
                let mut t = t0;
                while t1 - t > 1e-12 * opts.dt {
                    let h = h_sub.min(t1 - t);
                    let full = rk4_step(&mut f, t, &y, h);
                    let half = rk4_step(&mut f, t, &y, 0.5 * h);
                    let two_half = rk4_step(&mut f, t + 0.5 * h, &half, 0.5 * h);
                    let err = full.max_abs_diff(&two_half);
                    let scale = two_half.max_abs().max(y.max_abs());
                    if err <= tol * scale || err == 0.0 {
                        y = two_half;
                        t += h;
                        if err < tol * scale / 32.0 {
                            h_sub = (2.0 * h_sub).min(opts.dt);
                        }
                    } else {
                        h_sub = 0.5 * h;
                        if h_sub < min_h {
                            return Err(Error::Integration(format!(
                                "step size underflow at t = {t}: local error {err:.3e}"
                            )));
                        }
                    }
                }
            }
        }
        observe(t1, &y)?;
    }
    Ok(y)
}

/// Integrate and keep every output state.
pub fn integrate<S: OdeState>(f: impl FnMut(f64, &S) -> S, y0: S, opts: &Rk4Options) -> Result<Trajectory<S>> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    integrate_with(f, y0, opts, |t, y| {
        times.push(t);
        states.push(y.clone());
        Ok(())
    })?;
    Ok(Trajectory { times, states })
}
