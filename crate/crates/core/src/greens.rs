//! Lehmann assembly of the retarded Green's function from equation-of-motion
//! energies and spectroscopic amplitudes.
//!
//! For a probe pair `(c_a, c_b)` the numerators are
//! `conj(gamma_n(a)) gamma_n(b)` in the particle sector with
//! `gamma_n(s) = <0|O_n c_s^+|0> / sqrt(<0|O_n O_n^+|0>)`, and
//! `delta_n(a) conj(delta_n(b))` in the hole sector with
//! `delta_n(s) = <0|O_n^+ c_s|0> / sqrt(<0|O_n^+ O_n|0>)`. Both sectors put
//! their pole at `omega = lambda_n`, the GEP eigenvalue.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{momentum_mode, FermionOperator, Spin};
use crate::pauli::jordan_wigner;
use crate::qeom::{normalized_excitation, ExcitationBasis, QeomSolution, Sector};
use crate::simulator::{exact_transition, StateVector};

/// Normalized transition amplitude of one excited state against one probe.
#[derive(Debug, Clone)]
pub struct SpectroscopicAmplitude {
    pub state_index: usize,
    pub sector: Sector,
    /// Pole position: the GEP eigenvalue of the state.
    pub pole: f64,
    /// One amplitude per probe, in the order the probes were supplied.
    pub amplitudes: Vec<Complex64>,
}

/// Frequency grid with the complex retarded function on it.
#[derive(Debug, Clone)]
pub struct GreensFunctionData {
    omega: Vec<f64>,
    eta: f64,
    values: Vec<Complex64>,
}

impl GreensFunctionData {
    pub fn new(omega: Vec<f64>, eta: f64, values: Vec<Complex64>) -> Result<Self> {
        if eta <= 0.0 {
            return Err(Error::Validation(format!(
                "broadening must be positive, got {eta}"
            )));
        }
        if omega.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} grid points but {} values",
                omega.len(),
                values.len()
            )));
        }
        Ok(Self { omega, eta, values })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `A(omega) = -Im G(omega) / pi`.
    pub fn spectral_function(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|g| -g.im / std::f64::consts::PI)
            .collect()
    }

    /// Trapezoid integral of the spectral function over the whole grid.
    pub fn spectral_weight(&self) -> f64 {
        let a = self.spectral_function();
        let mut total = 0.0;
        for i in 1..self.omega.len() {
            total += 0.5 * (a[i] + a[i - 1]) * (self.omega[i] - self.omega[i - 1]);
        }
        total
    }
}

/// An evenly spaced frequency grid, inclusive of the endpoint.
pub fn frequency_grid(omega_min: f64, omega_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(omega_min < omega_max) {
        return Err(Error::Validation(format!(
            "need omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    if step <= 0.0 {
        return Err(Error::Validation(format!("step must be positive, got {step}")));
    }
    let n = ((omega_max - omega_min) / step).round() as usize;
    Ok((0..=n).map(|i| omega_min + step * i as f64).collect())
}

/// The momentum-space probe pair `(c_{k,spin_a}, c_{k,spin_b})`; the second
/// operator enters the particle-sector amplitudes through its adjoint. The
/// `(Up, Down)` default pairs the hole probe of one spin species with the
/// particle probe of the other.
pub fn k_space_pair(k: f64, spins: (Spin, Spin)) -> (FermionOperator, FermionOperator) {
    (momentum_mode(k, spins.0), momentum_mode(k, spins.1))
}

/// Normalized amplitudes of every solved state against every probe
/// (annihilation-type operators). Particle states use `c^+`, hole states `c`.
pub fn amplitudes(
    ground: &StateVector,
    solution: &QeomSolution,
    basis: &ExcitationBasis,
    probes: &[FermionOperator],
) -> Result<Vec<SpectroscopicAmplitude>> {
    let n = basis.n_modes();
    let mut out = Vec::with_capacity(solution.len());
    for i in 0..solution.len() {
        let sector = solution.sectors[i];
        let op_dag = normalized_excitation(&solution.eigenvectors[i], basis, ground, sector)?;
        let op = op_dag.adjoint();
        let mut amps = Vec::with_capacity(probes.len());
        for probe in probes {
            let value = match sector {
                // gamma = <0| O_n c^+ |0>, O_n = adjoint of the excitation
                Sector::Particle => {
                    let prod = op.multiply(&probe.adjoint())?;
                    exact_transition(ground, &jordan_wigner(&prod, n)?)?
                }
                // delta = <0| O_n^+ c |0>
                Sector::Hole => {
                    let prod = op_dag.multiply(probe)?;
                    exact_transition(ground, &jordan_wigner(&prod, n)?)?
                }
            };
            amps.push(value);
        }
        out.push(SpectroscopicAmplitude {
            state_index: i,
            sector,
            pole: solution.eigenvalues[i],
            amplitudes: amps,
        });
    }
    Ok(out)
}

/// Assembles `G(omega)` for the probe pair from amplitudes computed against
/// `[probe_a, probe_b]` (in that order).
pub fn lehmann_gf(
    amps: &[SpectroscopicAmplitude],
    omega: &[f64],
    eta: f64,
) -> Result<GreensFunctionData> {
    if eta <= 0.0 {
        return Err(Error::Validation(format!(
            "broadening must be positive, got {eta}"
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); omega.len()];
    for amp in amps {
        if amp.amplitudes.len() != 2 {
            return Err(Error::Dimension(format!(
                "state {} carries {} amplitudes, expected 2 (alpha, beta)",
                amp.state_index,
                amp.amplitudes.len()
            )));
        }
        let numerator = match amp.sector {
            // <0|c_a|E><E|c_b^+|0> = conj(gamma(a)) gamma(b)
            Sector::Particle => amp.amplitudes[0].conj() * amp.amplitudes[1],
            // <0|c_b^+|E><E|c_a|0> = conj(delta(b)) delta(a)
            Sector::Hole => amp.amplitudes[1].conj() * amp.amplitudes[0],
        };
        if numerator.norm() == 0.0 {
            continue;
        }
        for (i, &w) in omega.iter().enumerate() {
            values[i] += numerator / Complex64::new(w - amp.pole, eta);
        }
    }
    GreensFunctionData::new(omega.to_vec(), eta, values)
}

/// Within-sector overlaps `|<m|n>|` of the normalized excited states; exact
/// eigenstates would be orthogonal, so nonzero values diagnose the method's
/// approximation quality.
pub fn state_overlaps(
    ground: &StateVector,
    solution: &QeomSolution,
    basis: &ExcitationBasis,
) -> Result<Vec<(usize, usize, f64)>> {
    let n = basis.n_modes();
    let mut ops = Vec::with_capacity(solution.len());
    for i in 0..solution.len() {
        ops.push(normalized_excitation(
            &solution.eigenvectors[i],
            basis,
            ground,
            solution.sectors[i],
        )?);
    }
    let mut out = Vec::new();
    for i in 0..solution.len() {
        for j in i + 1..solution.len() {
            if solution.sectors[i] != solution.sectors[j] {
                // different particle-number sectors are orthogonal exactly
                out.push((i, j, 0.0));
                continue;
            }
            let overlap_op = match solution.sectors[i] {
                // <m|n> = <0| O_m O_n^+ |0>
                Sector::Particle => ops[i].adjoint().multiply(&ops[j])?,
                // hole states are generated by O_n: <m|n> = <0| O_m^+ O_n... |0>
                Sector::Hole => ops[i].multiply(&ops[j].adjoint())?,
            };
            let value = exact_transition(ground, &jordan_wigner(&overlap_op, n)?)?;
            out.push((i, j, value.norm()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdiag::{exact_gf, ground_state};
    use crate::fermion::{build_hubbard, ModeLabeling};
    use crate::pauli::CommutationKind;
    use crate::qeom::{
        build_matrices, default_charged_basis, solve_gep, EstimationMode, PreparedGround,
        EXACT_TRUNCATION,
    };
    use crate::vqe::{build_ansatz, minimize, MinimizeOptions, VqeProblem};

    struct Setup {
        h: FermionOperator,
        labeling: ModeLabeling,
        ground: PreparedGround,
        basis: ExcitationBasis,
        solution: QeomSolution,
    }

    fn setup() -> Setup {
        let h = build_hubbard(2, 1.0, 3.0).unwrap();
        let labeling = ModeLabeling::dimer();
        let (_, state) = ground_state(&h, &labeling, 2, 0).unwrap();
        let ground = PreparedGround::from_state(state);
        let basis = default_charged_basis();
        let m = build_matrices(&ground, &basis, &h, &EstimationMode::Exact, 0).unwrap();
        let solution = solve_gep(&m, EXACT_TRUNCATION).unwrap();
        Setup {
            h,
            labeling,
            ground,
            basis,
            solution,
        }
    }

    #[test]
    fn single_pole_values() {
        let amp = SpectroscopicAmplitude {
            state_index: 0,
            sector: Sector::Particle,
            pole: 3.0,
            amplitudes: vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        };
        let gf = lehmann_gf(&[amp], &[3.0, 1e6, -1e6], 0.5).unwrap();
        // at the pole: 1 / (i eta) = -2i
        assert!((gf.values()[0] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!(gf.values()[1].norm() < 2e-6);
        assert!(gf.values()[2].norm() < 2e-6);

        // Lorentzian peak height of the spectral function: 1 / (pi eta)
        let a = gf.spectral_function();
        assert!((a[0] - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn eta_must_be_positive() {
        assert!(matches!(
            lehmann_gf(&[], &[0.0], 0.0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            frequency_grid(1.0, 0.0, 0.1),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            frequency_grid(0.0, 1.0, 0.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn halving_eta_doubles_isolated_peaks() {
        let amp = SpectroscopicAmplitude {
            state_index: 0,
            sector: Sector::Particle,
            pole: 3.0,
            amplitudes: vec![Complex64::new(0.8, 0.0), Complex64::new(0.8, 0.0)],
        };
        let tall = lehmann_gf(std::slice::from_ref(&amp), &[3.0], 0.05).unwrap();
        let short = lehmann_gf(std::slice::from_ref(&amp), &[3.0], 0.1).unwrap();
        let ratio = tall.spectral_function()[0] / short.spectral_function()[0];
        assert!((ratio - 2.0).abs() < 0.01 * 2.0);
    }

    #[test]
    fn matched_down_probe_amplitudes_and_sum_rule() {
        let s = setup();
        for k in [0.0, std::f64::consts::PI] {
            let probe = momentum_mode(k, Spin::Down);
            let amps = amplitudes(
                s.ground.state(),
                &s.solution,
                &s.basis,
                std::slice::from_ref(&probe),
            )
            .unwrap();
            let total: f64 = amps.iter().map(|a| a.amplitudes[0].norm_sqr()).sum();
            assert!((total - 1.0).abs() < 1e-6, "k={k}: sum rule {total}");
        }
    }

    #[test]
    fn orthogonal_spin_probe_gives_zero_amplitudes() {
        let s = setup();
        // an up-spin creation cannot reach the S_z = -1/2 particle states
        let probe = FermionOperator::annihilation(4, s.labeling.index(2, Spin::Up)).unwrap();
        let amps = amplitudes(
            s.ground.state(),
            &s.solution,
            &s.basis,
            std::slice::from_ref(&probe),
        )
        .unwrap();
        for a in amps.iter().filter(|a| a.sector == Sector::Particle) {
            assert!(a.amplitudes[0].norm() < 1e-10);
        }
    }

    #[test]
    fn amplitudes_match_oracle_overlaps() {
        let s = setup();
        let probe = momentum_mode(std::f64::consts::PI, Spin::Down);
        let amps = amplitudes(
            s.ground.state(),
            &s.solution,
            &s.basis,
            std::slice::from_ref(&probe),
        )
        .unwrap();

        let spectra = crate::exactdiag::sector_spectra(&s.h, &s.labeling).unwrap();
        let (_, oracle_ground) = ground_state(&s.h, &s.labeling, 2, 0).unwrap();
        let dense_probe_dag =
            crate::exactdiag::dense_matrix(&probe.adjoint(), 4).unwrap();
        let dense_probe = crate::exactdiag::dense_matrix(&probe, 4).unwrap();
        let g = ndarray::Array1::from_iter(oracle_ground.amplitudes().iter().cloned());

        for amp in &amps {
            // locate the oracle eigenstate at the same energy; the basis
            // targets S_z = -1/2 particle and S_z = +1/2 hole states
            let (target_n, target_sz2, energy) = match amp.sector {
                Sector::Particle => (3usize, -1i32, -1.0 + amp.pole),
                Sector::Hole => (1usize, 1i32, -1.0 - amp.pole),
            };
            let sector = spectra
                .iter()
                .find(|sp| {
                    sp.n_particles == target_n
                        && sp.sz_twice == target_sz2
                        && sp.eigenvalues.iter().any(|e| (e - energy).abs() < 1e-7)
                })
                .unwrap();
            let idx = sector
                .eigenvalues
                .iter()
                .position(|e| (e - energy).abs() < 1e-7)
                .unwrap();
            let state = sector.state_vector(idx, 4);
            let e = ndarray::Array1::from_iter(state.amplitudes().iter().cloned());
            let oracle_amp = match amp.sector {
                Sector::Particle => {
                    let v = dense_probe_dag.dot(&g);
                    e.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>()
                }
                Sector::Hole => {
                    let v = dense_probe.dot(&g);
                    e.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>()
                }
            };
            assert!(
                (amp.amplitudes[0].norm() - oracle_amp.norm()).abs() < 1e-8,
                "{:?} pole {}: |{}| vs |{}|",
                amp.sector,
                amp.pole,
                amp.amplitudes[0],
                oracle_amp
            );
        }
    }

    #[test]
    fn matched_gf_matches_oracle_pointwise() {
        let s = setup();
        let omega = frequency_grid(-10.0, 10.0, 0.01).unwrap();
        for k in [0.0, std::f64::consts::PI] {
            let probe = momentum_mode(k, Spin::Down);
            let amps = amplitudes(
                s.ground.state(),
                &s.solution,
                &s.basis,
                &[probe.clone(), probe.clone()],
            )
            .unwrap();
            let gf = lehmann_gf(&amps, &omega, 0.5).unwrap();
            let oracle = exact_gf(&s.h, &s.labeling, &probe, &probe, &omega, 0.5).unwrap();
            let max_diff = gf
                .values()
                .iter()
                .zip(oracle.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(max_diff < 1e-6, "k={k}: pointwise diff {max_diff}");

            // retarded analyticity on the diagonal
            for g in gf.values() {
                assert!(g.im <= 1e-12);
            }
            for a in gf.spectral_function() {
                assert!(a >= -1e-12);
            }
        }
    }

    #[test]
    fn mixed_spin_pair_vanishes_by_selection_rules() {
        let s = setup();
        let omega = frequency_grid(-10.0, 10.0, 0.05).unwrap();
        for k in [0.0, std::f64::consts::PI] {
            let (alpha, beta) = k_space_pair(k, (Spin::Up, Spin::Down));
            let amps = amplitudes(s.ground.state(), &s.solution, &s.basis, &[alpha.clone(), beta.clone()])
                .unwrap();
            let gf = lehmann_gf(&amps, &omega, 0.5).unwrap();
            let oracle = exact_gf(&s.h, &s.labeling, &alpha, &beta, &omega, 0.5).unwrap();
            for (a, b) in gf.values().iter().zip(oracle.values()) {
                assert!((a - b).norm() < 1e-10);
                assert!(a.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn spectral_weight_integral() {
        let s = setup();
        // small eta keeps the Lorentzian tails inside [-50, 50]
        let eta = 0.05;
        let omega = frequency_grid(-50.0, 50.0, 0.01).unwrap();
        let probe = momentum_mode(0.0, Spin::Down);
        let amps = amplitudes(
            s.ground.state(),
            &s.solution,
            &s.basis,
            &[probe.clone(), probe],
        )
        .unwrap();
        let gf = lehmann_gf(&amps, &omega, eta).unwrap();
        let total: f64 = amps.iter().map(|a| a.amplitudes[0].norm_sqr()).sum();
        assert!(
            (gf.spectral_weight() - total).abs() < 1e-3,
            "integral {} vs sum {}",
            gf.spectral_weight(),
            total
        );
    }

    #[test]
    fn exact_mode_states_are_orthogonal() {
        let s = setup();
        let overlaps = state_overlaps(s.ground.state(), &s.solution, &s.basis).unwrap();
        assert_eq!(overlaps.len(), 6);
        for (i, j, v) in overlaps {
            assert!(v <= 1e-8, "overlap |<{i}|{j}>| = {v}");
        }
    }
}
