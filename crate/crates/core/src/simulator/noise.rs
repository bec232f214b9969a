//! Bitstring counts, readout-error injection, and mitigation by
//! calibration-matrix inversion.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::simulator::StateVector;

/// Shot counts per measured bitstring (qubit 0 leftmost).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsTable {
    n_qubits: usize,
    shots: u64,
    seed: u64,
    counts: BTreeMap<String, u64>,
}

impl CountsTable {
    pub fn from_index_counts(n_qubits: usize, seed: u64, index_counts: Vec<u64>) -> Self {
        let shots = index_counts.iter().sum();
        let mut counts = BTreeMap::new();
        for (idx, &c) in index_counts.iter().enumerate() {
            if c > 0 {
                counts.insert(StateVector::bitstring(idx, n_qubits), c);
            }
        }
        Self {
            n_qubits,
            shots,
            seed,
            counts,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// Counts indexed by basis state.
    pub fn index_counts(&self) -> Vec<u64> {
        let mut out = vec![0u64; 1 << self.n_qubits];
        for (bits, &c) in &self.counts {
            let idx = usize::from_str_radix(bits, 2).expect("keys are binary strings");
            out[idx] += c;
        }
        out
    }

    /// Empirical probability vector.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.shots as f64;
        self.index_counts()
            .iter()
            .map(|&c| c as f64 / total)
            .collect()
    }
}

/// Flips every bit of every shot independently: 0 -> 1 with `p01`,
/// 1 -> 0 with `p10`.
pub fn apply_readout_error(
    counts: &CountsTable,
    p01: f64,
    p10: f64,
    seed: u64,
) -> Result<CountsTable> {
    for (name, p) in [("p01", p01), ("p10", p10)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!(
                "{name} = {p} outside [0, 1]"
            )));
        }
    }
    let n = counts.n_qubits();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut corrupted = vec![0u64; 1 << n];
    // BTreeMap iteration keeps the shot order deterministic
    for (bits, &c) in counts.counts() {
        let idx = usize::from_str_radix(bits, 2).expect("binary key");
        for _ in 0..c {
            let mut out = 0usize;
            for pos in 0..n {
                let bit = (idx >> (n - 1 - pos)) & 1;
                let flip = if bit == 0 {
                    rng.gen::<f64>() < p01
                } else {
                    rng.gen::<f64>() < p10
                };
                let new_bit = bit ^ usize::from(flip);
                out |= new_bit << (n - 1 - pos);
            }
            corrupted[out] += 1;
        }
    }
    Ok(CountsTable::from_index_counts(n, seed, corrupted))
}

/// Tensor-product calibration matrix of independent bit-flip channels;
/// entry `(measured, true)` is the probability of reading `measured` when the
/// register held `true`. Columns sum to one.
pub fn bitflip_calibration(n_qubits: usize, p01: f64, p10: f64) -> Result<Array2<f64>> {
    for (name, p) in [("p01", p01), ("p10", p10)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!("{name} = {p} outside [0, 1]")));
        }
    }
    let dim = 1usize << n_qubits;
    let mut cal = Array2::zeros((dim, dim));
    for truth in 0..dim {
        for measured in 0..dim {
            let mut p = 1.0;
            for pos in 0..n_qubits {
                let t = (truth >> pos) & 1;
                let m = (measured >> pos) & 1;
                p *= match (t, m) {
                    (0, 0) => 1.0 - p01,
                    (0, 1) => p01,
                    (1, 0) => p10,
                    _ => 1.0 - p10,
                };
            }
            cal[[measured, truth]] = p;
        }
    }
    Ok(cal)
}

/// Recovers quasi-probabilities by solving `calibration * p_true = p_measured`.
/// Entries may be slightly negative; the total stays 1 because the columns of
/// the calibration matrix sum to 1.
pub fn mitigate_readout(counts: &CountsTable, calibration: &Array2<f64>) -> Result<Vec<f64>> {
    let dim = 1usize << counts.n_qubits();
    if calibration.nrows() != dim || calibration.ncols() != dim {
        return Err(Error::Dimension(format!(
            "calibration is {}x{}, expected {dim}x{dim}",
            calibration.nrows(),
            calibration.ncols()
        )));
    }
    for col in 0..dim {
        let s: f64 = (0..dim).map(|row| calibration[[row, col]]).sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "calibration column {col} sums to {s}, not 1"
            )));
        }
    }
    let measured = Array1::from_vec(counts.frequencies());
    let recovered = linalg::solve(calibration, &measured)?;
    Ok(recovered.to_vec())
}
