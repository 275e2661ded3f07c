//! Parameter sweeps over a base configuration.
//!
//! A sweep file names a base config (path or inline table), one or more axes
//! and the quantities to record:
//!
//! ```toml
//! base = "system.toml"
//! outputs = ["g_a_eff", "mu", "verdict"]
//! max_points = 10000
//!
//! [[axes]]
//! path = "ensemble_b.omega"
//! start = 10.0
//! stop = 100.0
//! count = 10
//!
//! [[axes]]
//! path = "couplings.omega_ab.0"
//! values = [0.0, 5.0]
//! ```
//!
//! The grid is the Cartesian product of the axes with the first axis
//! varying slowest. Array elements are addressed by numeric path segments.

use std::path::{Path, PathBuf};

use cavelim::classical::{polariton_analysis, transmission_spectrum, PolaritonAnalysis, SpectrumMode};
use cavelim::elimination::{validity_report, ValidityOptions, ValidityReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{self, Config, Resolved};
use crate::error::{CliError, CliResult};
use crate::output::fmt_f64;

pub const DEFAULT_MAX_POINTS: usize = 100_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseRef {
    Path(PathBuf),
    Inline(toml::Table),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// Laser grid used for spectrum summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSettings {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub eta: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self { min: -10.0, max: 10.0, count: 2001, eta: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: BaseRef,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    #[serde(default)]
    pub spectrum: SpectrumSettings,
}

fn default_max_points() -> usize {
    DEFAULT_MAX_POINTS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Effective,
    Polariton,
    Validity,
    Spectrum,
    Dipole,
}

/// Every quantity a sweep can record, with its group.
const QUANTITIES: &[(&str, Group)] = &[
    ("delta_c_eff", Group::Effective),
    ("delta_a_eff", Group::Effective),
    ("g_a_eff", Group::Effective),
    ("kappa_eff", Group::Effective),
    ("gamma_a_eff", Group::Effective),
    ("mu", Group::Effective),
    ("omega_c_eff", Group::Effective),
    ("omega_a_eff", Group::Effective),
    ("gamma_plus", Group::Polariton),
    ("gamma_minus", Group::Polariton),
    ("omega_plus", Group::Polariton),
    ("omega_minus", Group::Polariton),
    ("gamma_plus_onset", Group::Polariton),
    ("verdict", Group::Validity),
    ("dipole_ratio", Group::Validity),
    ("cavity_ratio", Group::Validity),
    ("max_coupling_ratio", Group::Validity),
    ("condition_metric", Group::Validity),
    ("t_c_max", Group::Spectrum),
    ("omega_at_max", Group::Spectrum),
    ("peak_count", Group::Spectrum),
    ("g", Group::Dipole),
    ("f", Group::Dipole),
    ("omega_pair", Group::Dipole),
    ("gamma_pair", Group::Dipole),
];

const DEFAULT_OUTPUTS: &[&str] =
    &["delta_c_eff", "delta_a_eff", "g_a_eff", "kappa_eff", "gamma_a_eff", "mu", "omega_c_eff", "omega_a_eff"];

/// A sweep ready to run: base table, expanded axes and output selection.
#[derive(Debug)]
pub struct Plan {
    pub spec: SweepSpec,
    pub base: toml::Table,
    pub axes: Vec<(String, Vec<f64>)>,
    pub outputs: Vec<(String, Group)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coords: Vec<f64>,
    pub result: Result<Vec<String>, String>,
}

pub fn load(path: &Path) -> CliResult<Plan> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec: SweepSpec = toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    plan(spec, dir)
}

pub fn plan(spec: SweepSpec, dir: &Path) -> CliResult<Plan> {
    let base = match &spec.base {
        BaseRef::Inline(t) => t.clone(),
        BaseRef::Path(p) => {
            let full = if p.is_absolute() { p.clone() } else { dir.join(p) };
            let text = std::fs::read_to_string(&full).map_err(|e| CliError::io(&full, e))?;
            text.parse::<toml::Table>().map_err(|e| CliError::config(format!("{}: {e}", full.display())))?
        }
    };
    config::from_table(base.clone())?;

    if spec.axes.is_empty() {
        return Err(CliError::config("sweep needs at least one axis"));
    }
    let axes = spec.axes.iter().map(expand_axis).collect::<CliResult<Vec<_>>>()?;
    let total = axes.iter().try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len()));
    match total {
        Some(t) if t <= spec.max_points => {}
        _ => {
            return Err(CliError::config(format!(
                "sweep grid has {} points, above the cap of {}",
                total.map_or("too many".to_string(), |t| t.to_string()),
                spec.max_points
            )))
        }
    }

    let names: Vec<String> = if spec.outputs.is_empty() {
        DEFAULT_OUTPUTS.iter().map(|s| s.to_string()).collect()
    } else {
        spec.outputs.clone()
    };
    let outputs = names
        .into_iter()
        .map(|n| match QUANTITIES.iter().find(|q| q.0 == n) {
            Some(&(_, g)) => Ok((n, g)),
            None => Err(CliError::config(format!(
                "unknown sweep output `{n}`; known: {}",
                QUANTITIES.iter().map(|q| q.0).collect::<Vec<_>>().join(", ")
            ))),
        })
        .collect::<CliResult<Vec<_>>>()?;
    let s = &spec.spectrum;
    if outputs.iter().any(|o| o.1 == Group::Spectrum) && (s.count == 0 || !(s.max >= s.min) || !(s.eta > 0.0)) {
        return Err(CliError::config("[spectrum] needs count >= 1, max >= min and eta > 0"));
    }
    Ok(Plan { spec, base, axes, outputs })
}

fn expand_axis(a: &Axis) -> CliResult<(String, Vec<f64>)> {
    if a.path.is_empty() {
        return Err(CliError::config("axis path is empty"));
    }
    let values = match (&a.values, a.start, a.stop, a.count) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(start), Some(stop), Some(count)) => linspace(start, stop, count),
        _ => {
            return Err(CliError::config(format!(
                "axis `{}` needs either `values` or all of `start`, `stop`, `count`",
                a.path
            )))
        }
    };
    if values.is_empty() {
        return Err(CliError::config(format!("axis `{}` has no values", a.path)));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(CliError::config(format!("axis `{}` has non-finite values", a.path)));
    }
    Ok((a.path.clone(), values))
}

/// `count` evenly spaced points including both ends.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| if i == count - 1 { stop } else { start + step * i as f64 }).collect()
        }
    }
}

/// Set a float at a dotted path, creating tables as needed.
pub fn set_path(table: &mut toml::Table, path: &str, value: f64) -> Result<(), String> {
    let segs: Vec<&str> = path.split('.').collect();
    if segs.iter().any(|s| s.is_empty()) {
        return Err(format!("malformed path `{path}`"));
    }
    let mut root = toml::Value::Table(std::mem::take(table));
    let result = set_in(&mut root, &segs, value);
    if let toml::Value::Table(t) = root {
        *table = t;
    }
    result
}

fn set_in(root: &mut toml::Value, segs: &[&str], value: f64) -> Result<(), String> {
    let mut cur = root;
    for (i, seg) in segs.iter().enumerate() {
        let here = segs[..=i].join(".");
        cur = match cur {
            toml::Value::Table(t) => t.entry(seg.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let k: usize = seg.parse().map_err(|_| format!("`{here}`: expected an array index"))?;
                let len = a.len();
                a.get_mut(k).ok_or_else(|| format!("`{here}`: index {k} out of range for length {len}"))?
            }
            _ => return Err(format!("`{here}` does not address a table or array")),
        };
    }
    *cur = toml::Value::Float(value);
    Ok(())
}

impl Plan {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.1.len()).product()
    }

    pub fn coords(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, (_, values)) in self.axes.iter().enumerate().rev() {
            out[k] = values[index % values.len()];
            index /= values.len();
        }
        out
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["index".to_string()];
        h.extend(self.axes.iter().map(|a| a.0.clone()));
        h.push("status".into());
        h.extend(self.outputs.iter().map(|o| o.0.clone()));
        h
    }

    pub fn evaluate(&self, index: usize) -> Row {
        let coords = self.coords(index);
        let result = self.evaluate_at(&coords);
        Row { coords, result }
    }

    fn evaluate_at(&self, coords: &[f64]) -> Result<Vec<String>, String> {
        let mut table = self.base.clone();
        for ((path, _), &x) in self.axes.iter().zip(coords) {
            set_path(&mut table, path, x)?;
        }
        let cfg = config::from_table(table).map_err(|e| e.to_string())?;
        Evaluator::new(&cfg, &self.spec.spectrum).values(&self.outputs)
    }

    /// Evaluate every point on `threads` workers; rows come back in grid order.
    pub fn run(&self, threads: usize) -> CliResult<Vec<Row>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
        Ok(pool.install(|| (0..self.len()).into_par_iter().map(|i| self.evaluate(i)).collect()))
    }

    pub fn csv_rows(&self, rows: &[Row]) -> Vec<Vec<String>> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                let mut out = vec![i.to_string()];
                out.extend(r.coords.iter().map(|&x| fmt_f64(x)));
                match &r.result {
                    Ok(values) => {
                        out.push("ok".into());
                        out.extend(values.iter().cloned());
                    }
                    Err(e) => {
                        out.push(format!("error: {e}"));
                        out.extend(std::iter::repeat_n(String::new(), self.outputs.len()));
                    }
                }
                out
            })
            .collect()
    }
}

/// Lazily computes the groups a point needs.
struct Evaluator<'a> {
    cfg: &'a Config,
    spectrum: &'a SpectrumSettings,
    resolved: Option<Resolved>,
    polariton: Option<PolaritonAnalysis>,
    validity: Option<ValidityReport>,
    summary: Option<[f64; 3]>,
    dipole: Option<[f64; 4]>,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &'a Config, spectrum: &'a SpectrumSettings) -> Self {
        Self { cfg, spectrum, resolved: None, polariton: None, validity: None, summary: None, dipole: None }
    }

    fn resolved(&mut self) -> Result<&Resolved, String> {
        if self.resolved.is_none() {
            self.resolved = Some(self.cfg.resolve().map_err(|e| e.to_string())?);
        }
        Ok(self.resolved.as_ref().unwrap())
    }

    fn values(mut self, outputs: &[(String, Group)]) -> Result<Vec<String>, String> {
        outputs.iter().map(|(name, group)| self.value(name, *group)).collect()
    }

    fn value(&mut self, name: &str, group: Group) -> Result<String, String> {
        let x = match group {
            Group::Effective => {
                let p = self.resolved()?.params;
                match name {
                    "delta_c_eff" => p.delta_c_eff,
                    "delta_a_eff" => p.delta_a_eff,
                    "g_a_eff" => p.g_a_eff,
                    "kappa_eff" => p.kappa_eff,
                    "gamma_a_eff" => p.gamma_a_eff,
                    "mu" => p.mu,
                    "omega_c_eff" => p.omega_c_eff,
                    _ => p.omega_a_eff,
                }
            }
            Group::Polariton => {
                if self.polariton.is_none() {
                    let p = self.resolved()?.params;
                    self.polariton = Some(polariton_analysis(&p).map_err(|e| e.to_string())?);
                }
                let a = self.polariton.as_ref().unwrap();
                match name {
                    "gamma_plus" => a.gamma_plus,
                    "gamma_minus" => a.gamma_minus,
                    "omega_plus" => a.omega_plus,
                    "omega_minus" => a.omega_minus,
                    _ => a.gamma_plus_onset,
                }
            }
            Group::Validity => {
                if self.validity.is_none() {
                    let sys = self
                        .resolved()?
                        .system
                        .as_ref()
                        .ok_or("validity needs a system, not [effective] parameters")?;
                    let r = validity_report(&sys.couplings, &sys.sub, &ValidityOptions::default())
                        .map_err(|e| e.to_string())?;
                    self.validity = Some(r);
                }
                let v = self.validity.as_ref().unwrap();
                match name {
                    "verdict" => return Ok(verdict_str(v)),
                    "dipole_ratio" => v.dipole_ratio,
                    "cavity_ratio" => v.cavity_ratio,
                    "max_coupling_ratio" => v.max_coupling_ratio,
                    _ => v.condition_metric,
                }
            }
            Group::Spectrum => {
                if self.summary.is_none() {
                    let (p, kappa) = {
                        let r = self.resolved()?;
                        (r.params, r.kappa_bare)
                    };
                    let s = self.spectrum;
                    let omegas = linspace(s.min, s.max, s.count);
                    let pts = transmission_spectrum(&p, kappa, s.eta, &omegas, SpectrumMode::Exact)
                        .map_err(|e| e.to_string())?;
                    self.summary = Some(summarise(&pts.iter().map(|q| (q.omega_l, q.t_c)).collect::<Vec<_>>()));
                }
                let [t_max, w_max, peaks] = self.summary.unwrap();
                match name {
                    "t_c_max" => t_max,
                    "omega_at_max" => w_max,
                    _ => return Ok(format!("{}", peaks as usize)),
                }
            }
            Group::Dipole => {
                if self.dipole.is_none() {
                    let d = self.cfg.dipole_values().map_err(|e| e.to_string())?;
                    self.dipole = Some(d.ok_or("dipole outputs need a [dipole] section")?);
                }
                let [g, f, om, ga] = self.dipole.unwrap();
                match name {
                    "g" => g,
                    "f" => f,
                    "omega_pair" => om,
                    _ => ga,
                }
            }
        };
        Ok(fmt_f64(x))
    }
}

fn verdict_str(v: &ValidityReport) -> String {
    serde_json::to_value(v.verdict).ok().and_then(|x| x.as_str().map(str::to_string)).unwrap_or_default()
}

/// `[max T_c, ω at the max, number of interior local maxima]`.
pub fn summarise(pts: &[(f64, f64)]) -> [f64; 3] {
    let (w_max, t_max) = pts.iter().copied().fold((f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let peaks = pts.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1).count();
    [t_max, w_max, peaks as f64]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_path_creates_and_indexes() {
        let mut t: toml::Table = "[couplings]\nomega_ab = [1.0, 2.0]\n".parse().unwrap();
        set_path(&mut t, "couplings.omega_ab.1", 7.0).unwrap();
        set_path(&mut t, "effective.mu", 0.5).unwrap();
        assert_eq!(t["couplings"]["omega_ab"][1].as_float(), Some(7.0));
        assert_eq!(t["effective"]["mu"].as_float(), Some(0.5));
        assert!(set_path(&mut t, "couplings.omega_ab.5", 1.0).unwrap_err().contains("out of range"));
    }

    #[test]
    fn grid_order_first_axis_slowest() {
        let spec: SweepSpec = toml::from_str(
            r#"
            base = { effective = { g_a_eff = 1.0, kappa_eff = 1.0, gamma_a_eff = 1.0 } }
            [[axes]]
            path = "effective.mu"
            values = [0.0, 0.1]
            [[axes]]
            path = "effective.g_a_eff"
            start = 0.0
            stop = 1.0
            count = 3
            "#,
        )
        .unwrap();
        let p = plan(spec, Path::new(".")).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.coords(0), vec![0.0, 0.0]);
        assert_eq!(p.coords(2), vec![0.0, 1.0]);
        assert_eq!(p.coords(3), vec![0.1, 0.0]);
    }

    #[test]
    fn cap_is_checked_before_work() {
        let spec: SweepSpec = toml::from_str(
            r#"
            base = { effective = { g_a_eff = 1.0, kappa_eff = 1.0, gamma_a_eff = 1.0 } }
            max_points = 10
            [[axes]]
            path = "effective.mu"
            start = 0.0
            stop = 1.0
            count = 11
            "#,
        )
        .unwrap();
        assert!(matches!(plan(spec, Path::new(".")), Err(CliError::Config(m)) if m.contains("cap")));
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(-1.0, 2.0, 4);
        assert_eq!(v, vec![-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(linspace(3.0, 5.0, 1), vec![3.0]);
    }

    #[test]
    fn summary_counts_interior_maxima() {
        let pts: Vec<(f64, f64)> = [0.0, 1.0, 0.5, 2.0, 0.1].iter().enumerate().map(|(i, &t)| (i as f64, t)).collect();
        assert_eq!(summarise(&pts), [2.0, 3.0, 2.0]);
    }
}
