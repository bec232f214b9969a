//! Shot-based estimation of Hermitian Pauli sums.
//!
//! Each commuting group is rotated into the computational basis, bitstrings
//! are sampled, and every string's expectation is read off from bit parities.
//! Qubit-wise groups need only single-qubit rotations; general commuting
//! groups get a basis change synthesized from a stabilizer tableau.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::pauli::{group_commuting, CommutationKind, PauliLetter, PauliString, PauliSum};
use crate::seeding::derive_seed;
use crate::simulator::noise::{apply_readout_error, bitflip_calibration, mitigate_readout};
use crate::simulator::{run_circuit, Circuit, CountsTable, Gate, StateVector};

/// One measurable string after the group's basis change: a Z-string over
/// `index_mask` (basis-index bits) with a conjugation sign.
#[derive(Debug, Clone)]
pub struct GroupTerm {
    pub string: PauliString,
    pub coeff: f64,
    pub index_mask: usize,
    pub sign: f64,
}

/// A commuting group with the gate sequence that diagonalizes it.
#[derive(Debug, Clone)]
pub struct PreparedGroup {
    pub rotation: Vec<Gate>,
    pub terms: Vec<GroupTerm>,
}

/// A Hermitian observable compiled into simultaneously measurable groups.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    n_qubits: usize,
    groups: Vec<PreparedGroup>,
}

impl MeasurementPlan {
    pub fn new(h: &PauliSum, kind: CommutationKind) -> Result<Self> {
        if !h.is_hermitian(1e-10) {
            return Err(Error::Validation(
                "measurement plans require Hermitian observables".into(),
            ));
        }
        let mut groups = Vec::new();
        for group in group_commuting(h, kind)? {
            let strings: Vec<(PauliString, f64)> = group
                .terms()
                .iter()
                .map(|(s, c)| (s.clone(), c.re))
                .collect();
            let prepared = match kind {
                CommutationKind::QubitWise => prepare_qubit_wise(h.n_qubits(), &strings),
                CommutationKind::General => prepare_general(h.n_qubits(), &strings)?,
            };
            groups.push(prepared);
        }
        Ok(Self {
            n_qubits: h.n_qubits(),
            groups,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[PreparedGroup] {
        &self.groups
    }
}

/// Mask over basis-index bits for the Z-support of a rotated string;
/// qubit q occupies index bit `n - 1 - q`.
fn index_mask(n_qubits: usize, qubit_mask: u64) -> usize {
    let mut mask = 0usize;
    for q in 0..n_qubits {
        if (qubit_mask >> q) & 1 == 1 {
            mask |= 1 << (n_qubits - 1 - q);
        }
    }
    mask
}

fn prepare_qubit_wise(n_qubits: usize, strings: &[(PauliString, f64)]) -> PreparedGroup {
    // shared single-qubit basis: the unique non-identity letter per position
    let mut basis = vec![PauliLetter::I; n_qubits];
    for (s, _) in strings {
        for q in 0..n_qubits {
            if s.letter(q) != PauliLetter::I {
                basis[q] = s.letter(q);
            }
        }
    }
    let mut rotation = Vec::new();
    for (q, letter) in basis.iter().enumerate() {
        match letter {
            // X -> Z via H; Y -> Z via S^+ then H; both sign-free
            PauliLetter::X => rotation.extend(clifford_to_gates(&[CliffordOp::H(q)])),
            PauliLetter::Y => {
                rotation.extend(clifford_to_gates(&[CliffordOp::Sdg(q), CliffordOp::H(q)]))
            }
            _ => {}
        }
    }
    let terms = strings
        .iter()
        .map(|(s, c)| {
            let mut qubit_mask = 0u64;
            for q in 0..n_qubits {
                if s.letter(q) != PauliLetter::I {
                    qubit_mask |= 1 << q;
                }
            }
            GroupTerm {
                string: s.clone(),
                coeff: *c,
                index_mask: index_mask(n_qubits, qubit_mask),
                sign: 1.0,
            }
        })
        .collect();
    PreparedGroup { rotation, terms }
}

/// Hadamard up to a global phase: Rz(pi) then Ry(pi/2).
fn hadamard_gates(q: usize) -> [Gate; 2] {
    [
        Gate::Rz {
            q,
            phi: std::f64::consts::PI,
        },
        Gate::Ry {
            q,
            theta: std::f64::consts::FRAC_PI_2,
        },
    ]
}

/// A Pauli string as `(-1)^neg * prod_q W(x_q, z_q)` with
/// `W(1,0) = X, W(1,1) = Y, W(0,1) = Z`.
#[derive(Debug, Clone, Copy)]
struct SymplecticPauli {
    x: u64,
    z: u64,
    neg: bool,
}

impl SymplecticPauli {
    fn from_string(s: &PauliString) -> Self {
        let mut x = 0u64;
        let mut z = 0u64;
        for q in 0..s.len() {
            match s.letter(q) {
                PauliLetter::X => x |= 1 << q,
                PauliLetter::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                PauliLetter::Z => z |= 1 << q,
                PauliLetter::I => {}
            }
        }
        Self { x, z, neg: false }
    }

    fn bit(v: u64, q: usize) -> bool {
        (v >> q) & 1 == 1
    }

    /// Conjugation rules for H, S, S^+ and CNOT in the W-convention above.
    fn conjugate(&mut self, op: CliffordOp) {
        match op {
            CliffordOp::H(q) => {
                if Self::bit(self.x, q) && Self::bit(self.z, q) {
                    self.neg = !self.neg; // Y -> -Y
                }
                let xb = self.x & (1 << q);
                let zb = self.z & (1 << q);
                self.x = (self.x & !(1 << q)) | (zb >> q << q);
                self.z = (self.z & !(1 << q)) | (xb >> q << q);
            }
            CliffordOp::S(q) => {
                if Self::bit(self.x, q) && Self::bit(self.z, q) {
                    self.neg = !self.neg; // Y -> -X
                }
                self.z ^= self.x & (1 << q);
            }
            CliffordOp::Sdg(q) => {
                if Self::bit(self.x, q) && !Self::bit(self.z, q) {
                    self.neg = !self.neg; // X -> -Y
                }
                self.z ^= self.x & (1 << q);
            }
            CliffordOp::Cnot(c, t) => {
                let xc = Self::bit(self.x, c);
                let zt = Self::bit(self.z, t);
                let xt = Self::bit(self.x, t);
                let zc = Self::bit(self.z, c);
                if xc && zt && (xt == zc) {
                    self.neg = !self.neg;
                }
                if xc {
                    self.x ^= 1 << t;
                }
                if zt {
                    self.z ^= 1 << c;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum CliffordOp {
    H(usize),
    S(usize),
    Sdg(usize),
    Cnot(usize, usize),
}

fn clifford_to_gates(ops: &[CliffordOp]) -> Vec<Gate> {
    let mut gates = Vec::new();
    for op in ops {
        match *op {
            CliffordOp::H(q) => gates.extend(hadamard_gates(q)),
            CliffordOp::S(q) => gates.push(Gate::Rz {
                q,
                phi: std::f64::consts::FRAC_PI_2,
            }),
            CliffordOp::Sdg(q) => gates.push(Gate::Rz {
                q,
                phi: -std::f64::consts::FRAC_PI_2,
            }),
            CliffordOp::Cnot(c, t) => gates.push(Gate::Cnot {
                control: c,
                target: t,
            }),
        }
    }
    gates
}

/// Synthesizes a Clifford that maps every string of a commuting group to a
/// signed Z-string. Clears one row at a time: CNOTs shrink its X support to
/// one qubit, S and CZ strip its Z letters, then a Hadamard turns the
/// remaining X into Z. Cleared rows stay diagonal because they commute with
/// the row being cleared.
fn prepare_general(n_qubits: usize, strings: &[(PauliString, f64)]) -> Result<PreparedGroup> {
    let mut rows: Vec<SymplecticPauli> = strings
        .iter()
        .map(|(s, _)| SymplecticPauli::from_string(s))
        .collect();
    let mut ops: Vec<CliffordOp> = Vec::new();
    let apply = |rows: &mut Vec<SymplecticPauli>, ops: &mut Vec<CliffordOp>, op: CliffordOp| {
        for r in rows.iter_mut() {
            r.conjugate(op);
        }
        ops.push(op);
    };

    loop {
        let Some(i) = rows.iter().position(|r| r.x != 0) else {
            break;
        };
        let q = rows[i].x.trailing_zeros() as usize;
        // shrink the X support of row i onto q
        for p in 0..n_qubits {
            if p != q && SymplecticPauli::bit(rows[i].x, p) {
                apply(&mut rows, &mut ops, CliffordOp::Cnot(q, p));
            }
        }
        // strip Z letters of row i
        if SymplecticPauli::bit(rows[i].z, q) {
            apply(&mut rows, &mut ops, CliffordOp::S(q));
        }
        for p in 0..n_qubits {
            if p != q && SymplecticPauli::bit(rows[i].z, p) {
                // CZ(q, p) = H(p) CNOT(q, p) H(p)
                apply(&mut rows, &mut ops, CliffordOp::H(p));
                apply(&mut rows, &mut ops, CliffordOp::Cnot(q, p));
                apply(&mut rows, &mut ops, CliffordOp::H(p));
            }
        }
        debug_assert_eq!(rows[i].x, 1 << q);
        debug_assert_eq!(rows[i].z, 0);
        apply(&mut rows, &mut ops, CliffordOp::H(q));
        debug_assert_eq!(rows[i].x, 0);
    }

    let terms = strings
        .iter()
        .zip(&rows)
        .map(|((s, c), r)| {
            debug_assert_eq!(r.x, 0);
            GroupTerm {
                string: s.clone(),
                coeff: *c,
                index_mask: index_mask(n_qubits, r.z),
                sign: if r.neg { -1.0 } else { 1.0 },
            }
        })
        .collect();
    Ok(PreparedGroup {
        rotation: clifford_to_gates(&ops),
        terms,
    })
}

/// Inverse-CDF sampling of `shots` bitstrings from the state's probabilities.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> CountsTable {
    let probs = state.probabilities();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0f64;
    for p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = match cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
            Ok(i) => (i + 1).min(probs.len() - 1),
            Err(i) => i.min(probs.len() - 1),
        };
        counts[idx] += 1;
    }
    CountsTable::from_index_counts(state.n_qubits(), seed, counts)
}

/// How shots are taken and post-processed.
#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub shots: u64,
    /// Readout bit-flip probabilities (p01, p10) injected after sampling.
    pub readout: Option<(f64, f64)>,
    /// Undo the readout channel by calibration-matrix inversion.
    pub mitigate: bool,
}

impl SamplerOptions {
    pub fn exact_shots(shots: u64) -> Self {
        Self {
            shots,
            readout: None,
            mitigate: false,
        }
    }
}

/// Estimates `<circuit| H |circuit>` by running one sampled circuit per
/// group. Returns the estimate and its propagated binomial standard error.
pub fn sampled_expectation(
    circuit: &Circuit,
    plan: &MeasurementPlan,
    opts: &SamplerOptions,
    seed: u64,
) -> Result<(f64, f64)> {
    if plan.groups.is_empty() {
        return Err(Error::Validation("measurement plan has no groups".into()));
    }
    if opts.shots < 1 {
        return Err(Error::Validation("need at least one shot".into()));
    }
    let state = run_circuit(circuit, None)?;
    let mut value = 0.0f64;
    let mut variance = 0.0f64;
    for (gi, group) in plan.groups.iter().enumerate() {
        let rotated = if group.rotation.is_empty() {
            state.clone()
        } else {
            let mut rot = Circuit::new(plan.n_qubits);
            for g in &group.rotation {
                rot.push(*g)?;
            }
            run_circuit(&rot, Some(&state))?
        };
        let mut counts = sample_counts(&rotated, opts.shots, derive_seed(seed, 2 * gi as u64));
        if let Some((p01, p10)) = opts.readout {
            counts = apply_readout_error(&counts, p01, p10, derive_seed(seed, 2 * gi as u64 + 1))?;
        }
        let weights: Vec<f64> = if opts.mitigate {
            let (p01, p10) = opts.readout.unwrap_or((0.0, 0.0));
            let calibration = bitflip_calibration(plan.n_qubits, p01, p10)?;
            mitigate_readout(&counts, &calibration)?
        } else {
            let total = counts.shots() as f64;
            counts
                .index_counts()
                .iter()
                .map(|&c| c as f64 / total)
                .collect()
        };
        for term in &group.terms {
            let mut est = 0.0f64;
            for (idx, w) in weights.iter().enumerate() {
                let parity = (idx & term.index_mask).count_ones() & 1;
                est += if parity == 1 { -w } else { *w };
            }
            est *= term.sign;
            value += term.coeff * est;
            variance += term.coeff * term.coeff * (1.0 - est * est).max(0.0) / opts.shots as f64;
        }
    }
    Ok((value, variance.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::build_hubbard;
    use crate::pauli::jordan_wigner;
    use crate::simulator::{exact_expectation, fidelity};
    use num_complex::Complex64;

    fn zsum(n: usize, s: &str) -> PauliSum {
        PauliSum::from_terms(
            n,
            vec![(PauliString::parse(s).unwrap(), Complex64::new(1.0, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_outcome_has_zero_stderr() {
        let plan = MeasurementPlan::new(&zsum(1, "Z"), CommutationKind::QubitWise).unwrap();
        let circuit = Circuit::new(1);
        let (est, err) =
            sampled_expectation(&circuit, &plan, &SamplerOptions::exact_shots(64), 1).unwrap();
        assert_eq!(est, 1.0);
        assert_eq!(err, 0.0);
    }

    #[test]
    fn hubbard_plan_runs_three_circuits() {
        let h = jordan_wigner(&build_hubbard(2, 1.0, 3.0).unwrap(), 4).unwrap();
        let plan = MeasurementPlan::new(&h, CommutationKind::QubitWise).unwrap();
        assert_eq!(plan.num_groups(), 3);
    }

    #[test]
    fn clifford_conjugation_rules_match_dense_matrices() {
        use ndarray::Array2;
        let eye = Array2::<Complex64>::eye(2);
        let x = ndarray::array![
            [Complex64::new(0., 0.), Complex64::new(1., 0.)],
            [Complex64::new(1., 0.), Complex64::new(0., 0.)]
        ];
        let y = ndarray::array![
            [Complex64::new(0., 0.), Complex64::new(0., -1.)],
            [Complex64::new(0., 1.), Complex64::new(0., 0.)]
        ];
        let z = ndarray::array![
            [Complex64::new(1., 0.), Complex64::new(0., 0.)],
            [Complex64::new(0., 0.), Complex64::new(-1., 0.)]
        ];
        let h = ndarray::array![
            [Complex64::new(1., 0.), Complex64::new(1., 0.)],
            [Complex64::new(1., 0.), Complex64::new(-1., 0.)]
        ]
        .map(|c| c / 2.0f64.sqrt());
        let s = ndarray::array![
            [Complex64::new(1., 0.), Complex64::new(0., 0.)],
            [Complex64::new(0., 0.), Complex64::new(0., 1.)]
        ];
        let paulis = [&eye, &x, &y, &z];

        let kron = |a: &Array2<Complex64>, b: &Array2<Complex64>| -> Array2<Complex64> {
            let mut out = Array2::zeros((a.nrows() * b.nrows(), a.ncols() * b.ncols()));
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    for k in 0..b.nrows() {
                        for l in 0..b.ncols() {
                            out[[i * b.nrows() + k, j * b.ncols() + l]] = a[[i, j]] * b[[k, l]];
                        }
                    }
                }
            }
            out
        };
        let adj = |m: &Array2<Complex64>| m.t().map(|c| c.conj());
        // CNOT with control qubit 0 (MSB)
        let mut cnot01 = Array2::<Complex64>::zeros((4, 4));
        for (r, c) in [(0usize, 0usize), (1, 1), (2, 3), (3, 2)] {
            cnot01[[r, c]] = Complex64::new(1.0, 0.0);
        }

        let letters = ['I', 'X', 'Y', 'Z'];
        for (i, p0) in paulis.iter().enumerate() {
            for (j, p1) in paulis.iter().enumerate() {
                // string letters: qubit 0 -> letters[i], qubit 1 -> letters[j]
                let string =
                    PauliString::parse(&format!("{}{}", letters[i], letters[j])).unwrap();
                let dense = kron(p0, p1);
                let cases: Vec<(CliffordOp, Array2<Complex64>)> = vec![
                    (CliffordOp::H(0), kron(&h, &eye)),
                    (CliffordOp::H(1), kron(&eye, &h)),
                    (CliffordOp::S(0), kron(&s, &eye)),
                    (CliffordOp::S(1), kron(&eye, &s)),
                    (CliffordOp::Sdg(0), kron(&adj(&s), &eye)),
                    (CliffordOp::Cnot(0, 1), cnot01.clone()),
                ];
                for (op, u) in cases {
                    let mut sym = SymplecticPauli::from_string(&string);
                    sym.conjugate(op);
                    let expected = u.dot(&dense).dot(&adj(&u));
                    // rebuild the predicted Pauli from (x, z, neg)
                    let mut predicted = Array2::<Complex64>::eye(1);
                    for q in 0..2 {
                        let xb = SymplecticPauli::bit(sym.x, q);
                        let zb = SymplecticPauli::bit(sym.z, q);
                        let w = match (xb, zb) {
                            (false, false) => &eye,
                            (true, false) => &x,
                            (true, true) => &y,
                            (false, true) => &z,
                        };
                        predicted = kron(&predicted, w);
                    }
                    if sym.neg {
                        predicted = predicted.map(|c| -c);
                    }
                    let max = (&expected - &predicted)
                        .iter()
                        .map(|c| c.norm())
                        .fold(0.0f64, f64::max);
                    assert!(
                        max < 1e-12,
                        "conjugation rule broken for {string} under {op:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn general_group_rotation_diagonalizes() {
        // {XX, YY, ZZ} commute only in the general sense
        let sum = PauliSum::from_terms(
            2,
            vec![
                (PauliString::parse("XX").unwrap(), Complex64::new(0.7, 0.0)),
                (PauliString::parse("YY").unwrap(), Complex64::new(0.5, 0.0)),
                (PauliString::parse("ZZ").unwrap(), Complex64::new(0.3, 0.0)),
            ],
        )
        .unwrap();
        let plan = MeasurementPlan::new(&sum, CommutationKind::General).unwrap();
        assert_eq!(plan.num_groups(), 1);
        let group = &plan.groups()[0];

        // V P V^+ must equal sign * Z(mask) on every basis state
        let mut rot = Circuit::new(2);
        for g in &group.rotation {
            rot.push(*g).unwrap();
        }
        for term in &group.terms {
            // check on a batch of random states: <s|P|s> == <V s| sign Z(mask) |V s>
            let mut rng = ChaCha12Rng::seed_from_u64(17 + term.index_mask as u64);
            for _ in 0..20 {
                let raw: Vec<Complex64> = (0..4)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                let s =
                    StateVector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect())
                        .unwrap();
                let lhs = exact_expectation(
                    &s,
                    &PauliSum::from_terms(
                        2,
                        vec![(term.string.clone(), Complex64::new(1.0, 0.0))],
                    )
                    .unwrap(),
                )
                .unwrap();
                let rotated = run_circuit(&rot, Some(&s)).unwrap();
                let mut rhs = 0.0;
                for (idx, amp) in rotated.amplitudes().iter().enumerate() {
                    let parity = (idx & term.index_mask).count_ones() & 1;
                    rhs += amp.norm_sqr() * if parity == 1 { -1.0 } else { 1.0 };
                }
                rhs *= term.sign;
                assert!((lhs - rhs).abs() < 1e-10, "string {} mask {:#b} sign {}", term.string, term.index_mask, term.sign);
            }
        }
    }

    #[test]
    fn sampled_matches_exact_for_hubbard_groups() {
        let h = jordan_wigner(&build_hubbard(2, 1.0, 3.0).unwrap(), 4).unwrap();
        let mut circuit = Circuit::new(4);
        circuit.x(0).unwrap().x(2).unwrap();
        circuit.a_gate(0, 1, 0.6, -0.3).unwrap();
        circuit.a_gate(2, 3, -1.1, 0.8).unwrap();
        circuit.cnot(1, 2).unwrap();
        circuit.cnot(1, 3).unwrap();
        let state = run_circuit(&circuit, None).unwrap();
        let exact = exact_expectation(&state, &h).unwrap();

        for kind in [CommutationKind::QubitWise, CommutationKind::General] {
            let plan = MeasurementPlan::new(&h, kind).unwrap();
            let (est, err) = sampled_expectation(
                &circuit,
                &plan,
                &SamplerOptions::exact_shots(200_000),
                12345,
            )
            .unwrap();
            assert!(
                (est - exact).abs() < 5.0 * err.max(1e-4),
                "{kind:?}: est {est} exact {exact} err {err}"
            );
        }
    }

    #[test]
    fn stderr_scales_as_inverse_sqrt_shots() {
        let h = jordan_wigner(&build_hubbard(2, 1.0, 3.0).unwrap(), 4).unwrap();
        let plan = MeasurementPlan::new(&h, CommutationKind::QubitWise).unwrap();
        let mut circuit = Circuit::new(4);
        circuit.x(0).unwrap().x(2).unwrap();
        circuit.a_gate(0, 1, 0.9, 0.2).unwrap();
        circuit.a_gate(2, 3, -0.4, 1.0).unwrap();
        circuit.cnot(1, 2).unwrap();
        circuit.cnot(1, 3).unwrap();

        let mut points = Vec::new();
        for (i, &shots) in [100u64, 1000, 10_000, 100_000].iter().enumerate() {
            let (_, err) = sampled_expectation(
                &circuit,
                &plan,
                &SamplerOptions::exact_shots(shots),
                900 + i as u64,
            )
            .unwrap();
            points.push(((shots as f64).ln(), err.ln()));
        }
        // least-squares slope over the log-log points
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(
            (slope + 0.5).abs() < 0.1,
            "stderr slope {slope} deviates from -1/2"
        );
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let h = jordan_wigner(&build_hubbard(2, 1.0, 3.0).unwrap(), 4).unwrap();
        let plan = MeasurementPlan::new(&h, CommutationKind::QubitWise).unwrap();
        let mut circuit = Circuit::new(4);
        circuit.x(0).unwrap().x(2).unwrap();
        circuit.a_gate(0, 1, 0.9, 0.2).unwrap();
        let opts = SamplerOptions::exact_shots(4096);
        let a = sampled_expectation(&circuit, &plan, &opts, 77).unwrap();
        let b = sampled_expectation(&circuit, &plan, &opts, 77).unwrap();
        assert_eq!(a, b);
        let c = sampled_expectation(&circuit, &plan, &opts, 78).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn basis_change_preserves_probability_of_rotated_string() {
        // fidelity sanity for the Hadamard built from Ry/Rz: H|0> has equal weights
        let mut c = Circuit::new(1);
        for g in hadamard_gates(0) {
            c.push(g).unwrap();
        }
        let s = run_circuit(&c, None).unwrap();
        let probs = s.probabilities();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
        // and H X H = Z: |+> rotates to |0>
        let mut cx = Circuit::new(1);
        cx.push(hadamard_gates(0)[0]).unwrap();
        cx.push(hadamard_gates(0)[1]).unwrap();
        let plus = run_circuit(&cx, None).unwrap();
        let mut back = Circuit::new(1);
        for g in hadamard_gates(0) {
            back.push(g).unwrap();
        }
        let round = run_circuit(&back, Some(&plus)).unwrap();
        let zero = StateVector::zero_state(1);
        assert!((fidelity(&round, &zero).unwrap() - 1.0).abs() < 1e-12);
    }
}
