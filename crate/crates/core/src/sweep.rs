//! Single-point reports and two-parameter sweeps over preparation angles and
//! model parameters, with exact and shot-sampled columns.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::{entanglement_exact, speed_from_correlator_estimates, variance_h};
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::fitting::{echo_samples, fit_quadratic_decay, reference_alpha_grid, speed_from_fit, FitResult, Weighting};
use crate::gates::{angles_from_model, ModelParams, PauliAxis};
use crate::protocols::{correlator_circuit, pauli_measure_circuit, PrepAngles};
use crate::sampling::{mean_pm1, parity, run_shots, Estimate, RngSeed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Entanglement,
    Speed,
    EchoFit,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entanglement" | "entangle" => Ok(Mode::Entanglement),
            "speed" => Ok(Mode::Speed),
            "echo-fit" => Ok(Mode::EchoFit),
            _ => Err(Error::invalid(format!("unknown mode {s:?} (expected entanglement, speed or echo-fit)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Entanglement => "entanglement",
            Mode::Speed => "speed",
            Mode::EchoFit => "echo-fit",
        })
    }
}

/// A sweepable parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Param {
    #[serde(rename = "theta0")]
    Theta0,
    #[serde(rename = "theta1")]
    Theta1,
    #[serde(rename = "phi0")]
    Phi0,
    #[serde(rename = "phi1")]
    Phi1,
    #[serde(rename = "J")]
    J,
    #[serde(rename = "d")]
    D,
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "theta0" => Param::Theta0,
            "theta1" => Param::Theta1,
            "phi0" => Param::Phi0,
            "phi1" => Param::Phi1,
            "J" => Param::J,
            "d" => Param::D,
            _ => return Err(Error::invalid(format!("unknown sweep parameter {s:?}"))),
        })
    }
}

/// Full parameter assignment of one evaluation point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointParams {
    pub prep: PrepAngles,
    pub model: ModelParams,
}

impl PointParams {
    pub fn with(mut self, p: Param, value: f64) -> Self {
        match p {
            Param::Theta0 => self.prep.theta0 = value,
            Param::Theta1 => self.prep.theta1 = value,
            Param::Phi0 => self.prep.phi0 = value,
            Param::Phi1 => self.prep.phi1 = value,
            Param::J => self.model.j = value,
            Param::D => self.model.d = value,
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub mode: Mode,
    pub vary: (Param, Param),
    /// `(start, stop, step)` shared by both varied parameters.
    pub range: (f64, f64, f64),
    pub fixed: PointParams,
    /// `None` evaluates the exact column only.
    pub shots: Option<u64>,
    pub seed: RngSeed,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.vary.0 == self.vary.1 {
            return Err(Error::invalid("the two varied parameters must differ"));
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shot count must be positive"));
        }
        grid(self.range.0, self.range.1, self.range.2).map(|_| ())
    }

    pub fn points(&self) -> Result<Vec<(f64, f64, PointParams)>> {
        self.validate()?;
        let g = grid(self.range.0, self.range.1, self.range.2)?;
        Ok(g.iter()
            .flat_map(|&p1| g.iter().map(move |&p2| (p1, p2)))
            .map(|(p1, p2)| (p1, p2, self.fixed.with(self.vary.0, p1).with(self.vary.1, p2)))
            .collect())
    }
}

/// `start, start + step, …` up to `stop`; `stop` itself is included when the
/// span is a whole number of steps (to within 1e-9 of a step).
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(Error::invalid(format!("bad grid ({start}, {stop}, {step}): step must be positive")));
    }
    if stop < start {
        return Err(Error::invalid(format!("empty grid: stop {stop} < start {start}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p1: f64,
    pub p2: f64,
    pub exact: f64,
    pub sampled: Option<f64>,
    pub std_error: Option<f64>,
}

/// Exact value of `mode` at `p`: entanglement distance of qubit 0, or `v/γ`.
pub fn exact_value(mode: Mode, p: &PointParams) -> Result<f64> {
    match mode {
        Mode::Entanglement => Ok(entanglement_exact(&p.prep, &angles_from_model(&p.model), 0)?.e),
        Mode::Speed | Mode::EchoFit => Ok(variance_h(&p.prep, &p.model)?.v_over_gamma),
    }
}

/// Shot-based estimate of `mode` at `p`.
///
/// Entanglement uses the three single-Pauli protocols on qubit 0, speed uses
/// the three pair-correlator protocols, and echo-fit fits the echo decay on
/// the reference α grid. Errors propagate by the delta method.
pub fn sampled_value(mode: Mode, p: &PointParams, shots: u64, seed: RngSeed) -> Result<Estimate> {
    match mode {
        Mode::Entanglement => {
            let g = angles_from_model(&p.model);
            let mut m = [Estimate::pm1(0.0, shots); 3];
            for axis in PauliAxis::ALL {
                let c = pauli_measure_circuit(&p.prep, &g, 0, axis)?;
                m[axis.index()] = mean_pm1(&run_shots(&c, shots, seed.derive(axis.index() as u64))?, 0)?;
            }
            let e = 1.0 - m.iter().map(|e| e.value * e.value).sum::<f64>();
            let se = m.iter().map(|e| (2.0 * e.value * e.std_error).powi(2)).sum::<f64>().sqrt();
            Ok(Estimate { value: e, std_error: se, shots })
        }
        Mode::Speed => {
            let mut c = [Estimate::pm1(0.0, shots); 3];
            for axis in PauliAxis::ALL {
                let counts = run_shots(&correlator_circuit(&p.prep, axis), shots, seed.derive(axis.index() as u64))?;
                c[axis.index()] = parity(&counts)?;
            }
            Ok(speed_from_correlator_estimates(c, p.model.j, p.model.d))
        }
        Mode::EchoFit => Ok(echo_fit_estimate(p, shots, seed)?.1),
    }
}

/// Shot-sampled echo fit and the resulting `v/γ` estimate. The error follows
/// from `Var(c) = Σα⁴se² / (Σα⁴)²` and `v = 2|J|√c`.
pub fn echo_fit_estimate(p: &PointParams, shots: u64, seed: RngSeed) -> Result<(FitResult, Estimate)> {
    let samples = echo_samples(&p.prep, p.model.d, &reference_alpha_grid(), Some(shots), seed)?;
    let fit = fit_quadratic_decay(&samples, Weighting::Unweighted)?;
    let den: f64 = samples.iter().map(|s| s.alpha.powi(4)).sum();
    let var_c = samples.iter().map(|s| s.alpha.powi(4) * s.std_error.powi(2)).sum::<f64>() / (den * den);
    let v = speed_from_fit(&fit, p.model.j)?;
    let se = if fit.c > 0.0 { p.model.j.abs() * (var_c / fit.c).sqrt() } else { 0.0 };
    Ok((fit, Estimate { value: v, std_error: se, shots }))
}

/// Fits the echo decay at `p` along the XXZ line with anisotropy `p.model.d`.
pub fn echo_fit(p: &PointParams, shots: Option<u64>, seed: RngSeed, weighting: Weighting) -> Result<FitResult> {
    let samples = echo_samples(&p.prep, p.model.d, &reference_alpha_grid(), shots, seed)?;
    fit_quadratic_decay(&samples, weighting)
}

pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    let points = spec.points()?;
    try_map_indexed(&points, exec, |i, &(p1, p2, params)| {
        let exact = exact_value(spec.mode, &params)?;
        let est = spec
            .shots
            .map(|n| sampled_value(spec.mode, &params, n, spec.seed.derive(i as u64)))
            .transpose()?;
        Ok(SweepRow { p1, p2, exact, sampled: est.map(|e| e.value), std_error: est.map(|e| e.std_error) })
    })
}

pub const CSV_HEADER: [&str; 5] = ["p1", "p2", "exact", "sampled", "std_error"];
pub const CSV_DIGITS: usize = 12;

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let f = |x: f64| crate::fmt::sig(x, CSV_DIGITS);
    for r in rows {
        w.write_record([
            f(r.p1),
            f(r.p2),
            f(r.exact),
            r.sampled.map(f).unwrap_or_default(),
            r.std_error.map(f).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Echo-fit details reported in both curvature conventions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoFitReport {
    pub fit: FitResult,
    /// Fit of the noise-free echo on the same grid.
    pub noise_free: FitResult,
    pub v_over_gamma_fit: f64,
}

/// JSON summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    pub params: PointParams,
    pub exact: f64,
    pub sampled: Option<f64>,
    pub std_error: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub echo_fit: Option<EchoFitReport>,
}

impl Report {
    /// `(sampled − exact)/std_error`, when both are available and the error is nonzero.
    pub fn z_score(&self) -> Option<f64> {
        match (self.sampled, self.std_error) {
            (Some(s), Some(se)) if se > 0.0 => Some((s - self.exact) / se),
            _ => None,
        }
    }
}

pub fn run_single(mode: Mode, p: &PointParams, shots: Option<u64>, seed: RngSeed) -> Result<Report> {
    let exact = exact_value(mode, p)?;
    let (sampled, std_error, echo) = match mode {
        Mode::EchoFit => {
            let noise_free = echo_fit(p, None, seed, Weighting::Unweighted)?;
            let (fit, est) = match shots {
                Some(n) => {
                    let (fit, est) = echo_fit_estimate(p, n, seed)?;
                    (fit, Some(est))
                }
                None => (noise_free, None),
            };
            let v = speed_from_fit(&fit, p.model.j)?;
            (Some(v), est.map(|e| e.std_error), Some(EchoFitReport { fit, noise_free, v_over_gamma_fit: v }))
        }
        _ => {
            let est = shots.map(|n| sampled_value(mode, p, n, seed)).transpose()?;
            (est.map(|e| e.value), est.map(|e| e.std_error), None)
        }
    };
    Ok(Report { mode, params: *p, exact, sampled, std_error, seed: seed.0, echo_fit: echo })
}
