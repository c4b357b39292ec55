//! Recovery of the energy variance from the small-time decay of the echo.
//!
//! The model is `|S|² = 1 − c·α²` anchored at `(0, 1)`, with `α = 2Jt`. Since
//! `|S|² ≈ 1 − t²⟨ΔH²⟩`, the curvature per unit `(Jt)²` is `4c = ⟨ΔH²⟩/J²`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::GateAngles;
use crate::protocols::{echo_circuit, PrepAngles};
use crate::sampling::{prob00, run_shots, RngSeed};

/// Curvatures more negative than this are treated as a failed fit, not noise.
pub const NEGATIVE_CURVATURE_TOL: f64 = 1e-12;

/// Rounding allowance on `s2 ∈ [0, 1]` for noise-free samples.
const S2_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub alpha: f64,
    pub s2: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// `c` in `|S|² = 1 − c·α²`.
    pub c: f64,
    pub rms_residual: f64,
    /// `⟨ΔH²⟩/J²` reading `c` per unit `α²`, i.e. treating `α` as if it were `Jt`.
    pub var_h_per_alpha2: f64,
    /// `⟨ΔH²⟩/J² = 4c`, the reading consistent with `α = 2Jt`.
    pub var_h_per_jt2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Weighting {
    #[default]
    Unweighted,
    /// Weights `1/max(std_error, floor)²`.
    InverseVariance { floor: f64 },
}

/// Closed-form least squares for the one-parameter model:
/// `c = Σ wᵢαᵢ²(1 − s2ᵢ) / Σ wᵢαᵢ⁴`.
pub fn fit_quadratic_decay(samples: &[DecaySample], weighting: Weighting) -> Result<FitResult> {
    if samples.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 samples, got {}", samples.len())));
    }
    if let Some(s) = samples.iter().find(|s| !(s.alpha.is_finite() && s.s2.is_finite() && s.std_error.is_finite() && s.std_error >= 0.0)) {
        return Err(Error::invalid(format!("bad decay sample {s:?}")));
    }
    if let Some(s) = samples.iter().find(|s| (s.s2.min(1.0 - s.s2)) < -(3.0 * s.std_error + S2_SLACK)) {
        return Err(Error::invalid(format!("decay sample outside [0, 1] by more than 3 standard errors: {s:?}")));
    }
    let weight = |s: &DecaySample| match weighting {
        Weighting::Unweighted => 1.0,
        Weighting::InverseVariance { floor } => 1.0 / s.std_error.max(floor).powi(2),
    };
    let (num, den) = samples.iter().fold((0.0, 0.0), |(n, d), s| {
        let (w, a2) = (weight(s), s.alpha * s.alpha);
        (n + w * a2 * (1.0 - s.s2), d + w * a2 * a2)
    });
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateFit("all alphas are zero".into()));
    }
    let c = num / den;
    let rms_residual = (samples
        .iter()
        .map(|s| (s.s2 - (1.0 - c * s.alpha * s.alpha)).powi(2))
        .sum::<f64>()
        / samples.len() as f64)
        .sqrt();
    Ok(FitResult { c, rms_residual, var_h_per_alpha2: c, var_h_per_jt2: 4.0 * c })
}

/// `v/γ = |J|·sqrt(⟨ΔH²⟩/J²)` in the `α = 2Jt` reading.
pub fn speed_from_fit(f: &FitResult, j: f64) -> Result<f64> {
    if f.var_h_per_jt2 < -NEGATIVE_CURVATURE_TOL {
        return Err(Error::FitQuality(format!(
            "negative curvature c = {:e}: the echo grows away from α = 0",
            f.c
        )));
    }
    Ok(j.abs() * f.var_h_per_jt2.max(0.0).sqrt())
}

/// The α grid `−3π/32 … 3π/32` in steps of `π/128`.
pub fn reference_alpha_grid() -> Vec<f64> {
    let step = std::f64::consts::PI / 128.0;
    (-12..=12).map(|k| k as f64 * step).collect()
}

/// Echo samples along the XXZ line `αx = αy = α`, `αz = dα`. `shots = None`
/// gives the noise-free return probability with zero error bars.
pub fn echo_samples(a: &PrepAngles, d: f64, alphas: &[f64], shots: Option<u64>, seed: RngSeed) -> Result<Vec<DecaySample>> {
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let circuit = echo_circuit(a, &GateAngles::xxz(alpha, d));
            match shots {
                None => Ok(DecaySample { alpha, s2: crate::sampling::exact_prob00(&circuit)?, std_error: 0.0 }),
                Some(n) => {
                    let est = prob00(&run_shots(&circuit, n, seed.derive(i as u64))?)?;
                    Ok(DecaySample { alpha, s2: est.value, std_error: est.std_error })
                }
            }
        })
        .collect()
}

pub fn write_samples_csv<W: Write>(samples: &[DecaySample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<DecaySample>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    r.deserialize().map(|row| Ok(row?)).collect()
}
