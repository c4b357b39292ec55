//! Shot sampling of circuits and the estimators built on shot counts.
//!
//! Samples are drawn from the exact final outcome distribution with
//! `ChaCha8Rng` seeded through `SeedableRng::seed_from_u64`, so counts are
//! reproducible across platforms for a given seed.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::Circuit;

pub const DEFAULT_SHOTS: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Independent seed for the `index`-th point of a sweep.
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15))))
    }
}

// SplitMix64 finalizer (Steele, Lea & Flood 2014).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outcome histogram of one protocol run. Keys are bitstrings over the measured
/// qubits, in measurement order (leftmost = first measured qubit).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShotCounts {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl ShotCounts {
    pub fn new(shots: u64, counts: BTreeMap<String, u64>) -> Result<Self> {
        if shots == 0 {
            return Err(Error::invalid("shot count must be positive"));
        }
        let total: u64 = counts.values().sum();
        if total != shots {
            return Err(Error::invalid(format!("counts sum to {total}, expected {shots}")));
        }
        let mut width = None;
        for key in counts.keys() {
            if key.is_empty() || !key.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::invalid(format!("bad outcome key {key:?}")));
            }
            match width {
                None => width = Some(key.len()),
                Some(w) if w != key.len() => {
                    return Err(Error::invalid("outcome keys have different lengths"))
                }
                _ => {}
            }
        }
        Ok(Self { shots, counts })
    }

    /// Convenience constructor from `(key, count)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (k, n) in pairs {
            *counts.entry(k.to_string()).or_insert(0) += n;
        }
        let shots = counts.values().sum();
        Self::new(shots, counts)
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn n_bits(&self) -> usize {
        self.counts.keys().next().map_or(0, String::len)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("string keys and integers serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl<'de> Deserialize<'de> for ShotCounts {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            shots: u64,
            counts: BTreeMap<String, u64>,
        }
        let raw = Raw::deserialize(de)?;
        ShotCounts::new(raw.shots, raw.counts).map_err(serde::de::Error::custom)
    }
}

/// A shot-based estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub shots: u64,
}

impl Estimate {
    /// Estimate of a ±1-valued observable: `std_error = sqrt((1 − m²)/shots)`.
    pub fn pm1(value: f64, shots: u64) -> Self {
        let var = (1.0 - value * value).max(0.0);
        Self { value, std_error: (var / shots as f64).sqrt(), shots }
    }

    /// Estimate of a probability: `std_error = sqrt(p(1 − p)/shots)`.
    pub fn probability(p: f64, shots: u64) -> Self {
        let var = (p * (1.0 - p)).max(0.0);
        Self { value: p, std_error: (var / shots as f64).sqrt(), shots }
    }
}

/// Simulates `circuit` exactly and draws `shots` outcomes of its measured qubits.
pub fn run_shots(circuit: &Circuit, shots: u64, seed: RngSeed) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::invalid("shot count must be positive"));
    }
    let probs = circuit.exact_distribution()?;
    let width = circuit.measured().len();
    let cumulative: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("non-empty distribution");

    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let mut tally = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        tally[k] += 1;
    }

    let counts = tally
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(k, n)| (outcome_key(k, width), n))
        .collect();
    ShotCounts::new(shots, counts)
}

/// Bitstring for outcome index `k`: character `i` is bit `i` of `k`.
pub fn outcome_key(k: usize, width: usize) -> String {
    (0..width).map(|i| if k >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// `(N₀ − N₁)/shots` over the bit at `position` of each key.
pub fn mean_pm1(counts: &ShotCounts, position: usize) -> Result<Estimate> {
    if position >= counts.n_bits() {
        return Err(Error::invalid(format!(
            "bit position {position} out of range for {}-bit outcomes",
            counts.n_bits()
        )));
    }
    let signed: i64 = counts
        .counts()
        .iter()
        .map(|(k, &n)| if k.as_bytes()[position] == b'0' { n as i64 } else { -(n as i64) })
        .sum();
    Ok(Estimate::pm1(signed as f64 / counts.shots() as f64, counts.shots()))
}

/// `(N₀₀ − N₀₁ − N₁₀ + N₁₁)/shots`.
pub fn parity(counts: &ShotCounts) -> Result<Estimate> {
    require_two_bits(counts)?;
    let signed: i64 = counts
        .counts()
        .iter()
        .map(|(k, &n)| if k == "00" || k == "11" { n as i64 } else { -(n as i64) })
        .sum();
    Ok(Estimate::pm1(signed as f64 / counts.shots() as f64, counts.shots()))
}

/// `N₀₀/shots`.
pub fn prob00(counts: &ShotCounts) -> Result<Estimate> {
    require_two_bits(counts)?;
    Ok(Estimate::probability(counts.get("00") as f64 / counts.shots() as f64, counts.shots()))
}

fn require_two_bits(counts: &ShotCounts) -> Result<()> {
    if counts.n_bits() != 2 {
        return Err(Error::invalid(format!("expected 2-bit outcomes, got {}-bit", counts.n_bits())));
    }
    Ok(())
}

/// Noise-free `P(0) − P(1)` on the first measured qubit.
pub fn exact_mean_pm1(circuit: &Circuit) -> Result<f64> {
    let p = circuit.exact_distribution()?;
    Ok(p.iter().enumerate().map(|(k, p)| if k & 1 == 0 { *p } else { -p }).sum())
}

/// Noise-free parity of the first two measured qubits.
pub fn exact_parity(circuit: &Circuit) -> Result<f64> {
    let p = circuit.exact_distribution()?;
    if p.len() != 4 {
        return Err(Error::invalid("parity needs exactly two measured qubits"));
    }
    Ok(p[0] - p[1] - p[2] + p[3])
}

/// Noise-free `P(00)`.
pub fn exact_prob00(circuit: &Circuit) -> Result<f64> {
    let p = circuit.exact_distribution()?;
    if p.len() != 4 {
        return Err(Error::invalid("return probability needs exactly two measured qubits"));
    }
    Ok(p[0])
}
