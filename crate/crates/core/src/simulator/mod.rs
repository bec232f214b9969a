//! Statevector simulation of small qubit registers.
//!
//! Bit ordering: qubit 0 is the leftmost character of a bitstring and the
//! most significant amplitude index, matching the dense Fock-space oracle.

mod measure;
mod noise;

pub use measure::{
    sample_counts, sampled_expectation, GroupTerm, MeasurementPlan, PreparedGroup, SamplerOptions,
};
pub use noise::{apply_readout_error, bitflip_calibration, mitigate_readout, CountsTable};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliString, PauliSum};

const NORM_TOLERANCE: f64 = 1e-10;

/// Normalized complex amplitudes over the 2^n computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state |0...0>.
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || dim & (dim - 1) != 0 {
            return Err(Error::Dimension(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let state = Self { n_qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!(
                "state norm {norm} deviates from 1 beyond {NORM_TOLERANCE:e}"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "states on {} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Measurement probabilities per basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Renders a basis index with qubit 0 leftmost.
    pub fn bitstring(index: usize, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| {
                if (index >> (n_qubits - 1 - q)) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let shift = self.n_qubits - 1 - q;
        let stride = 1usize << shift;
        let dim = self.amps.len();
        let mut base = 0usize;
        while base < dim {
            for offset in 0..stride {
                let i0 = base + offset;
                let i1 = i0 + stride;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += stride << 1;
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cshift = self.n_qubits - 1 - control;
        let tshift = self.n_qubits - 1 - target;
        for i in 0..self.amps.len() {
            if (i >> cshift) & 1 == 1 && (i >> tshift) & 1 == 0 {
                self.amps.swap(i, i | (1 << tshift));
            }
        }
    }

    /// Applies the particle-number-conserving two-qubit block
    /// `diag(1, [[cos t, e^{i p} sin t], [e^{-i p} sin t, -cos t]], 1)`
    /// on the pair `(a, b)` with `a` the more significant qubit.
    fn apply_a_gate(&mut self, qa: usize, qb: usize, theta: f64, phi: f64) {
        let ashift = self.n_qubits - 1 - qa;
        let bshift = self.n_qubits - 1 - qb;
        let cos = Complex64::new(theta.cos(), 0.0);
        let sin_p = Complex64::cis(phi) * theta.sin();
        let sin_m = Complex64::cis(-phi) * theta.sin();
        for i in 0..self.amps.len() {
            // visit each {|01>, |10>} pair once, from its |01> member
            if (i >> ashift) & 1 == 0 && (i >> bshift) & 1 == 1 {
                let j = (i | (1 << ashift)) & !(1 << bshift);
                let a01 = self.amps[i];
                let a10 = self.amps[j];
                self.amps[i] = cos * a01 + sin_p * a10;
                self.amps[j] = sin_m * a01 - cos * a10;
            }
        }
    }
}

/// One circuit instruction. Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X { q: usize },
    Ry { q: usize, theta: f64 },
    Rz { q: usize, phi: f64 },
    Cnot { control: usize, target: usize },
    A { a: usize, b: usize, theta: f64, phi: f64 },
}

impl Gate {
    fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| -> Result<()> {
            if q >= n_qubits {
                Err(Error::Dimension(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            Gate::X { q } | Gate::Ry { q, .. } | Gate::Rz { q, .. } => check(q),
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::Validation("CNOT needs distinct qubits".into()));
                }
                Ok(())
            }
            Gate::A { a, b, .. } => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(Error::Validation("A gate needs distinct qubits".into()));
                }
                Ok(())
            }
        }
    }
}

/// An ordered gate sequence on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn x(&mut self, q: usize) -> Result<&mut Self> {
        self.push(Gate::X { q })
    }

    pub fn ry(&mut self, q: usize, theta: f64) -> Result<&mut Self> {
        self.push(Gate::Ry { q, theta })
    }

    pub fn rz(&mut self, q: usize, phi: f64) -> Result<&mut Self> {
        self.push(Gate::Rz { q, phi })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate::Cnot { control, target })
    }

    pub fn a_gate(&mut self, a: usize, b: usize, theta: f64, phi: f64) -> Result<&mut Self> {
        self.push(Gate::A { a, b, theta, phi })
    }

    /// A new circuit with `extra` appended.
    pub fn extended(&self, extra: &[Gate]) -> Result<Circuit> {
        let mut out = self.clone();
        for g in extra {
            out.push(*g)?;
        }
        Ok(out)
    }
}

/// Applies the circuit to `initial` (default |0...0>).
pub fn run_circuit(circuit: &Circuit, initial: Option<&StateVector>) -> Result<StateVector> {
    let mut state = match initial {
        Some(s) => {
            if s.n_qubits() != circuit.n_qubits() {
                return Err(Error::Dimension(format!(
                    "initial state on {} qubits, circuit on {}",
                    s.n_qubits(),
                    circuit.n_qubits()
                )));
            }
            s.clone()
        }
        None => StateVector::zero_state(circuit.n_qubits()),
    };
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    for gate in &circuit.gates {
        match *gate {
            Gate::X { q } => state.apply_single(q, [[zero, one], [one, zero]]),
            Gate::Ry { q, theta } => {
                let (s, c) = (theta / 2.0).sin_cos();
                state.apply_single(
                    q,
                    [
                        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                    ],
                )
            }
            Gate::Rz { q, phi } => state.apply_single(
                q,
                [
                    [Complex64::cis(-phi / 2.0), zero],
                    [zero, Complex64::cis(phi / 2.0)],
                ],
            ),
            Gate::Cnot { control, target } => state.apply_cnot(control, target),
            Gate::A { a, b, theta, phi } => state.apply_a_gate(a, b, theta, phi),
        }
    }
    Ok(state)
}

/// Applies one Pauli string: |out> = P |in>.
pub(crate) fn apply_pauli(state: &StateVector, string: &PauliString) -> Result<StateVector> {
    if string.len() != state.n_qubits() {
        return Err(Error::Dimension(format!(
            "string of length {} on {} qubits",
            string.len(),
            state.n_qubits()
        )));
    }
    let n = state.n_qubits();
    let mut flip_mask = 0usize;
    for q in 0..n {
        match string.letter(q) {
            PauliLetter::X | PauliLetter::Y => flip_mask |= 1 << (n - 1 - q),
            _ => {}
        }
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); state.dim()];
    for (idx, &amp) in state.amplitudes().iter().enumerate() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut phase = Complex64::new(1.0, 0.0);
        for q in 0..n {
            let bit = (idx >> (n - 1 - q)) & 1;
            match string.letter(q) {
                PauliLetter::Y => {
                    // Y|0> = i|1>, Y|1> = -i|0>
                    phase *= if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                }
                PauliLetter::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
                _ => {}
            }
        }
        amps[idx ^ flip_mask] += phase * amp;
    }
    Ok(StateVector {
        n_qubits: n,
        amps,
    })
}

/// `<s| op |s>` for an arbitrary (not necessarily Hermitian) Pauli sum.
pub fn exact_transition(state: &StateVector, op: &PauliSum) -> Result<Complex64> {
    if op.n_qubits() != state.n_qubits() {
        return Err(Error::Dimension(format!(
            "operator on {} qubits, state on {}",
            op.n_qubits(),
            state.n_qubits()
        )));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (string, coeff) in op.terms() {
        let applied = apply_pauli(state, string)?;
        total += coeff * state.inner(&applied)?;
    }
    Ok(total)
}

/// `<s| h |s>` for a Hermitian `h`; the vanishing imaginary residue is
/// checked and discarded.
pub fn exact_expectation(state: &StateVector, h: &PauliSum) -> Result<f64> {
    if !h.is_hermitian(1e-10) {
        return Err(Error::Validation(
            "expectation of a non-Hermitian operator".into(),
        ));
    }
    let value = exact_transition(state, h)?;
    if value.im.abs() > 1e-10 {
        return Err(Error::Validation(format!(
            "expectation has imaginary residue {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `F(a, b) = |<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}
