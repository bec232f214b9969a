//! Brute-force oracle: dense matrices of ladder operators on the full Fock
//! space, sector-resolved spectra, and the exact Lehmann Green's function.
//!
//! Basis-index convention matches the simulator: the occupation of mode `j`
//! is bit `n - 1 - j` of the index, so mode 0 is the leftmost character of a
//! bitstring and the most significant bit.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, ModeLabeling};
use crate::greens::GreensFunctionData;
use crate::linalg;
use crate::simulator::StateVector;

fn occupied(index: usize, mode: usize, n_modes: usize) -> bool {
    (index >> (n_modes - 1 - mode)) & 1 == 1
}

fn jw_sign(index: usize, mode: usize, n_modes: usize) -> f64 {
    let mut parity = 0u32;
    for k in 0..mode {
        parity ^= ((index >> (n_modes - 1 - k)) & 1) as u32;
    }
    if parity == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Dense matrix of a fermionic operator on the 2^n-dimensional Fock space.
pub fn dense_matrix(op: &FermionOperator, n_modes: usize) -> Result<Array2<Complex64>> {
    if op.n_modes() > n_modes {
        return Err(Error::Dimension(format!(
            "operator on {} modes does not fit {} modes",
            op.n_modes(),
            n_modes
        )));
    }
    let dim = 1usize << n_modes;
    let mut out = Array2::zeros((dim, dim));
    for term in op.terms() {
        for col in 0..dim {
            let mut index = col;
            let mut amp = term.coefficient;
            let mut alive = true;
            for factor in term.factors.iter().rev() {
                let occ = occupied(index, factor.mode, n_modes);
                if factor.dagger == occ {
                    alive = false;
                    break;
                }
                amp *= jw_sign(index, factor.mode, n_modes);
                index ^= 1 << (n_modes - 1 - factor.mode);
            }
            if alive {
                out[[index, col]] += amp;
            }
        }
    }
    Ok(out)
}

/// Expectation `<state| op |state>` evaluated through the dense matrix.
pub fn dense_expectation(op: &FermionOperator, state: &StateVector) -> Result<Complex64> {
    let m = dense_matrix(op, state.n_qubits())?;
    let amps = Array1::from_iter(state.amplitudes().iter().cloned());
    let applied = m.dot(&amps);
    Ok(amps
        .iter()
        .zip(applied.iter())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Eigenpairs of one `(N, S_z)` symmetry block. Eigenvectors are stored as
/// columns over the block's own basis states.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub n_particles: usize,
    /// Twice the spin projection, kept integral.
    pub sz_twice: i32,
    /// Full-space basis indices spanning the block.
    pub basis_states: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<Complex64>,
}

impl SectorSpectrum {
    /// Embeds eigenvector `i` into the full 2^n-dimensional space.
    pub fn state_vector(&self, i: usize, n_modes: usize) -> StateVector {
        let dim = 1usize << n_modes;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (row, &basis_index) in self.basis_states.iter().enumerate() {
            amps[basis_index] = self.eigenvectors[[row, i]];
        }
        StateVector::from_amplitudes(amps).expect("sector eigenvectors are normalized")
    }
}

fn particle_number(index: usize, n_modes: usize) -> usize {
    (0..n_modes).filter(|&m| occupied(index, m, n_modes)).count()
}

fn sz_twice_of_index(index: usize, labeling: &ModeLabeling) -> i32 {
    let n = labeling.n_modes();
    (0..n)
        .filter(|&m| occupied(index, m, n))
        .map(|m| labeling.sz_twice(m))
        .sum()
}

/// Full diagonalization of `h` restricted to each `(N, S_z)` block.
///
/// Fails if `h` does not commute with the dense number and spin-projection
/// operators within 1e-10.
pub fn sector_spectra(
    h: &FermionOperator,
    labeling: &ModeLabeling,
) -> Result<Vec<SectorSpectrum>> {
    let n_modes = labeling.n_modes();
    let dim = 1usize << n_modes;
    let hm = dense_matrix(h, n_modes)?;

    let mut number = Array2::<Complex64>::zeros((dim, dim));
    let mut sz = Array2::<Complex64>::zeros((dim, dim));
    for b in 0..dim {
        number[[b, b]] = Complex64::new(particle_number(b, n_modes) as f64, 0.0);
        sz[[b, b]] = Complex64::new(sz_twice_of_index(b, labeling) as f64 / 2.0, 0.0);
    }
    for (name, diag) in [("particle number", &number), ("S_z", &sz)] {
        let comm = hm.dot(diag) - diag.dot(&hm);
        let max = comm.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if max > 1e-10 {
            return Err(Error::Validation(format!(
                "Hamiltonian does not conserve {name}: |[H, O]| = {max:e}"
            )));
        }
    }

    let mut blocks: Vec<((usize, i32), Vec<usize>)> = Vec::new();
    for b in 0..dim {
        let key = (particle_number(b, n_modes), sz_twice_of_index(b, labeling));
        match blocks.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(b),
            None => blocks.push((key, vec![b])),
        }
    }
    blocks.sort_by_key(|(k, _)| *k);

    let mut spectra = Vec::new();
    for ((n_particles, sz_twice), basis_states) in blocks {
        let k = basis_states.len();
        let mut sub = Array2::<Complex64>::zeros((k, k));
        for (i, &bi) in basis_states.iter().enumerate() {
            for (j, &bj) in basis_states.iter().enumerate() {
                sub[[i, j]] = hm[[bi, bj]];
            }
        }
        let (w, v) = linalg::eigh(&sub)?;
        let eigenvectors = canonicalize_columns(v, &w);
        spectra.push(SectorSpectrum {
            n_particles,
            sz_twice,
            basis_states,
            eigenvalues: w.to_vec(),
            eigenvectors,
        });
    }
    Ok(spectra)
}

/// Deterministic eigenvector phases: within each (near-)degenerate block the
/// LAPACK output is already orthonormal, so it remains only to fix each
/// column's overall phase by making its largest-magnitude entry real positive.
fn canonicalize_columns(mut v: Array2<Complex64>, w: &Array1<f64>) -> Array2<Complex64> {
    for j in 0..v.ncols() {
        let _ = &w;
        let mut best = 0usize;
        let mut best_mag = -1.0f64;
        for i in 0..v.nrows() {
            let mag = v[[i, j]].norm();
            if mag > best_mag + 1e-12 {
                best_mag = mag;
                best = i;
            }
        }
        let pivot = v[[best, j]];
        if pivot.norm() > 0.0 {
            let phase = pivot / pivot.norm();
            for i in 0..v.nrows() {
                v[[i, j]] /= phase;
            }
        }
    }
    v
}

/// Lowest eigenpair of the requested `(N, S_z)` sector, embedded in the full
/// space.
pub fn ground_state(
    h: &FermionOperator,
    labeling: &ModeLabeling,
    n_particles: usize,
    sz_twice: i32,
) -> Result<(f64, StateVector)> {
    let spectra = sector_spectra(h, labeling)?;
    let sector = spectra
        .iter()
        .find(|s| s.n_particles == n_particles && s.sz_twice == sz_twice)
        .ok_or_else(|| {
            Error::Validation(format!(
                "no sector with N={n_particles}, 2Sz={sz_twice}"
            ))
        })?;
    Ok((
        sector.eigenvalues[0],
        sector.state_vector(0, labeling.n_modes()),
    ))
}

/// Exact retarded Green's function for the probe pair `(c_alpha, c_beta)`
/// (both passed as annihilation-type operators), assembled from the full
/// sector spectra:
///
/// `G(w) = sum_{N+1} <0|c_a|E><E|c_b^+|0> / (w + E0 - E + i eta)
///       + sum_{N-1} <0|c_b^+|E><E|c_a|0> / (w - E0 + E + i eta)`.
pub fn exact_gf(
    h: &FermionOperator,
    labeling: &ModeLabeling,
    probe_alpha: &FermionOperator,
    probe_beta: &FermionOperator,
    omega: &[f64],
    eta: f64,
) -> Result<GreensFunctionData> {
    if eta <= 0.0 {
        return Err(Error::Validation(format!("broadening must be positive, got {eta}")));
    }
    let n_modes = labeling.n_modes();
    let n_half = labeling.n_sites(); // half filling
    let spectra = sector_spectra(h, labeling)?;
    let (e0, ground) = ground_state(h, labeling, n_half, 0)?;
    let g_amps = Array1::from_iter(ground.amplitudes().iter().cloned());

    let alpha_on_ground = dense_matrix(probe_alpha, n_modes)?.dot(&g_amps);
    let beta_on_ground = dense_matrix(probe_beta, n_modes)?.dot(&g_amps);
    let alpha_dag_on_ground = dense_matrix(&probe_alpha.adjoint(), n_modes)?.dot(&g_amps);
    let beta_dag_on_ground = dense_matrix(&probe_beta.adjoint(), n_modes)?.dot(&g_amps);

    let mut g = vec![Complex64::new(0.0, 0.0); omega.len()];
    for sector in &spectra {
        let add = sector.n_particles == n_half + 1;
        let remove = n_half > 0 && sector.n_particles == n_half - 1;
        if !add && !remove {
            continue;
        }
        for i in 0..sector.eigenvalues.len() {
            let state = sector.state_vector(i, n_modes);
            let e_amps = Array1::from_iter(state.amplitudes().iter().cloned());
            if add {
                // numerator <0|c_a|E><E|c_b^+|0> = conj(<E|c_a^+|0>) <E|c_b^+|0>
                let amp_b: Complex64 = e_amps
                    .iter()
                    .zip(beta_dag_on_ground.iter())
                    .map(|(e, v)| e.conj() * v)
                    .sum();
                let amp_a: Complex64 = e_amps
                    .iter()
                    .zip(alpha_dag_on_ground.iter())
                    .map(|(e, v)| e.conj() * v)
                    .sum();
                let num = amp_a.conj() * amp_b;
                if num.norm() > 0.0 {
                    let de = sector.eigenvalues[i] - e0;
                    for (k, &w) in omega.iter().enumerate() {
                        g[k] += num / Complex64::new(w - de, eta);
                    }
                }
            }
            if remove {
                // numerator <0|c_b^+|E><E|c_a|0> = conj(<E|c_b|0>) <E|c_a|0>
                let amp_b: Complex64 = e_amps
                    .iter()
                    .zip(beta_on_ground.iter())
                    .map(|(e, v)| e.conj() * v)
                    .sum();
                let amp_a: Complex64 = e_amps
                    .iter()
                    .zip(alpha_on_ground.iter())
                    .map(|(e, v)| e.conj() * v)
                    .sum();
                let num = amp_b.conj() * amp_a;
                if num.norm() > 0.0 {
                    let de = e0 - sector.eigenvalues[i];
                    for (k, &w) in omega.iter().enumerate() {
                        g[k] += num / Complex64::new(w - de, eta);
                    }
                }
            }
        }
    }
    GreensFunctionData::new(omega.to_vec(), eta, g)
}
