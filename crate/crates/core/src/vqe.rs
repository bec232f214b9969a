//! Ground-state preparation: the particle-number-conserving ansatz, grouped
//! energy estimation, and two optimizers (Nelder-Mead for exact energies,
//! SPSA for shot-sampled ones).

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::fermion::FermionOperator;
use crate::pauli::{jordan_wigner, CommutationKind, PauliSum};
use crate::seeding::{derive_seed, mix};
use crate::simulator::{
    exact_expectation, run_circuit, sampled_expectation, Circuit, MeasurementPlan, SamplerOptions,
    StateVector,
};

/// The four ansatz angles, stored unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzParameters {
    pub theta1: f64,
    pub phi1: f64,
    pub theta2: f64,
    pub phi2: f64,
}

impl AnsatzParameters {
    pub fn new(theta1: f64, phi1: f64, theta2: f64, phi2: f64) -> Self {
        Self {
            theta1,
            phi1,
            theta2,
            phi2,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.theta1, self.phi1, self.theta2, self.phi2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// The 4-qubit ansatz: X on qubits 0 and 2 set N = 2 and S_z = 0, one
/// number-conserving block per spin species, then two CNOTs entangle the
/// spin sectors.
pub fn build_ansatz(p: &AnsatzParameters) -> Circuit {
    let mut c = Circuit::new(4);
    c.x(0).unwrap();
    c.x(2).unwrap();
    c.a_gate(0, 1, p.theta1, p.phi1).unwrap();
    c.a_gate(2, 3, p.theta2, p.phi2).unwrap();
    c.cnot(1, 2).unwrap();
    c.cnot(1, 3).unwrap();
    c
}

/// How the cost function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyMode {
    Exact,
    Sampled,
}

/// Which classical optimizer drives the minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    /// Derivative-free local simplex (Nelder-Mead).
    Simplex,
    /// Simultaneous-perturbation stochastic approximation.
    Spsa,
}

/// The Hamiltonian compiled for both exact and grouped sampled evaluation.
#[derive(Debug, Clone)]
pub struct VqeProblem {
    hamiltonian: PauliSum,
    plan: MeasurementPlan,
}

impl VqeProblem {
    pub fn new(h: &FermionOperator, grouping: CommutationKind) -> Result<Self> {
        let hamiltonian = jordan_wigner(h, h.n_modes())?;
        let plan = MeasurementPlan::new(&hamiltonian, grouping)?;
        Ok(Self { hamiltonian, plan })
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    /// Number of sampled circuits a single cost evaluation runs.
    pub fn circuits_per_evaluation(&self) -> usize {
        self.plan.num_groups()
    }

    /// Cost function; sampled mode also returns the standard error.
    pub fn energy(
        &self,
        p: &AnsatzParameters,
        mode: EnergyMode,
        sampler: &SamplerOptions,
        seed: u64,
    ) -> Result<(f64, Option<f64>)> {
        let circuit = build_ansatz(p);
        match mode {
            EnergyMode::Exact => {
                let state = run_circuit(&circuit, None)?;
                Ok((exact_expectation(&state, &self.hamiltonian)?, None))
            }
            EnergyMode::Sampled => {
                let (value, err) = sampled_expectation(&circuit, &self.plan, sampler, seed)?;
                Ok((value, Some(err)))
            }
        }
    }

    /// Statevector energy of the ansatz at `p` regardless of mode.
    pub fn theoretical_energy(&self, p: &AnsatzParameters) -> Result<f64> {
        let state = run_circuit(&build_ansatz(p), None)?;
        exact_expectation(&state, &self.hamiltonian)
    }

    pub fn state(&self, p: &AnsatzParameters) -> Result<StateVector> {
        run_circuit(&build_ansatz(p), None)
    }
}

/// One optimizer step as recorded in the trace.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub iteration: usize,
    pub energy: f64,
    pub stderr: Option<f64>,
    pub params: AnsatzParameters,
    /// Statevector energy at the same parameters.
    pub theoretical: f64,
}

/// Per-restart optimization history.
#[derive(Debug, Clone, Default)]
pub struct VqeTrace {
    pub points: Vec<TracePoint>,
}

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    pub mode: EnergyMode,
    pub optimizer: OptimizerKind,
    pub max_iter: usize,
    pub sampler: SamplerOptions,
    pub seed: u64,
    pub n_restarts: usize,
}

impl MinimizeOptions {
    pub fn exact_defaults(seed: u64) -> Self {
        Self {
            mode: EnergyMode::Exact,
            optimizer: OptimizerKind::Simplex,
            max_iter: 500,
            sampler: SamplerOptions::exact_shots(8192),
            seed,
            n_restarts: 10,
        }
    }

    pub fn sampled_defaults(seed: u64) -> Self {
        Self {
            mode: EnergyMode::Sampled,
            optimizer: OptimizerKind::Spsa,
            max_iter: 200,
            sampler: SamplerOptions::exact_shots(8192),
            seed,
            n_restarts: 10,
        }
    }
}

/// Result of a multi-restart minimization.
#[derive(Debug, Clone)]
pub struct VqeOutcome {
    pub best_params: AnsatzParameters,
    /// Estimated energy used to rank restarts.
    pub best_energy: f64,
    pub best_restart: usize,
    pub traces: Vec<VqeTrace>,
}

/// Best-of-restarts minimization; restart `r` draws its start uniformly from
/// `[-pi, pi)^4` with seed derived from `(seed, r)`.
pub fn minimize(problem: &VqeProblem, opts: &MinimizeOptions) -> Result<VqeOutcome> {
    if opts.max_iter < 1 {
        return Err(Error::Validation("max_iter must be at least 1".into()));
    }
    if opts.n_restarts < 1 {
        return Err(Error::Validation("n_restarts must be at least 1".into()));
    }
    let mut best: Option<(f64, AnsatzParameters, usize)> = None;
    let mut traces = Vec::with_capacity(opts.n_restarts);
    for restart in 0..opts.n_restarts {
        let restart_seed = derive_seed(opts.seed, mix(&[1, restart as u64]));
        let mut rng = ChaCha12Rng::seed_from_u64(restart_seed);
        let start = AnsatzParameters::from_array([
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        ]);
        let (params, trace) = match opts.optimizer {
            OptimizerKind::Simplex => {
                nelder_mead(problem, opts, start, restart_seed, INITIAL_STEP, 0)?
            }
            OptimizerKind::Spsa => spsa(problem, opts, start, restart_seed)?,
        };
        // rank restarts by a fresh estimate at the returned parameters
        let (final_energy, _) = problem.energy(
            &params,
            opts.mode,
            &opts.sampler,
            derive_seed(restart_seed, mix(&[2])),
        )?;
        traces.push(trace);
        if best.map_or(true, |(e, _, _)| final_energy < e) {
            best = Some((final_energy, params, restart));
        }
    }
    let (mut best_energy, mut best_params, best_restart) = best.expect("at least one restart");

    // a second simplex with a tight starting step squeezes out the last few
    // digits; the coarse restarts alone leave the state ~1e-6 off
    if opts.optimizer == OptimizerKind::Simplex {
        let polish_seed = derive_seed(opts.seed, mix(&[6]));
        let offset = traces[best_restart].points.len();
        let (params, polish_trace) = nelder_mead(
            problem,
            opts,
            best_params,
            polish_seed,
            POLISH_STEP,
            offset,
        )?;
        let (energy, _) = problem.energy(
            &params,
            opts.mode,
            &opts.sampler,
            derive_seed(polish_seed, mix(&[2])),
        )?;
        if energy <= best_energy {
            best_energy = energy;
            best_params = params;
            traces[best_restart].points.extend(polish_trace.points);
        }
    }
    Ok(VqeOutcome {
        best_params,
        best_energy,
        best_restart,
        traces,
    })
}

const INITIAL_STEP: f64 = 0.5;
const POLISH_STEP: f64 = 1e-3;

fn record(
    problem: &VqeProblem,
    trace: &mut VqeTrace,
    iteration: usize,
    energy: f64,
    stderr: Option<f64>,
    params: AnsatzParameters,
) -> Result<()> {
    let theoretical = problem.theoretical_energy(&params)?;
    trace.points.push(TracePoint {
        iteration,
        energy,
        stderr,
        params,
        theoretical,
    });
    Ok(())
}

/// Standard Nelder-Mead with reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2). The trace records the best vertex per
/// iteration, so its energy column is monotone.
fn nelder_mead(
    problem: &VqeProblem,
    opts: &MinimizeOptions,
    start: AnsatzParameters,
    seed: u64,
    step: f64,
    iteration_offset: usize,
) -> Result<(AnsatzParameters, VqeTrace)> {
    const DIM: usize = 4;
    const FTOL: f64 = 1e-15;

    let mut eval_count = 0u64;
    let mut eval = |x: &[f64; DIM]| -> Result<f64> {
        eval_count += 1;
        let (e, _) = problem.energy(
            &AnsatzParameters::from_array(*x),
            opts.mode,
            &opts.sampler,
            derive_seed(seed, mix(&[3, eval_count])),
        )?;
        Ok(e)
    };

    let mut simplex: Vec<([f64; DIM], f64)> = Vec::with_capacity(DIM + 1);
    let x0 = start.to_array();
    let f0 = eval(&x0)?;
    simplex.push((x0, f0));
    for d in 0..DIM {
        let mut x = x0;
        x[d] += step;
        let f = eval(&x)?;
        simplex.push((x, f));
    }

    let mut trace = VqeTrace::default();
    for iteration in iteration_offset..iteration_offset + opts.max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        record(
            problem,
            &mut trace,
            iteration,
            simplex[0].1,
            None,
            AnsatzParameters::from_array(simplex[0].0),
        )?;
        if (simplex[DIM].1 - simplex[0].1).abs() < FTOL {
            break;
        }

        let mut centroid = [0.0; DIM];
        for v in &simplex[..DIM] {
            for d in 0..DIM {
                centroid[d] += v.0[d] / DIM as f64;
            }
        }
        let worst = simplex[DIM];
        let blend = |a: f64| -> [f64; DIM] {
            let mut x = [0.0; DIM];
            for d in 0..DIM {
                x[d] = centroid[d] + a * (centroid[d] - worst.0[d]);
            }
            x
        };

        let xr = blend(1.0);
        let fr = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = blend(2.0);
            let fe = eval(&xe)?;
            simplex[DIM] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[DIM - 1].1 {
            simplex[DIM] = (xr, fr);
        } else {
            let xc = blend(-0.5);
            let fc = eval(&xc)?;
            if fc < worst.1 {
                simplex[DIM] = (xc, fc);
            } else {
                // shrink towards the best vertex
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    for d in 0..DIM {
                        v.0[d] = best[d] + 0.5 * (v.0[d] - best[d]);
                    }
                    v.1 = eval(&v.0)?;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    Ok((AnsatzParameters::from_array(simplex[0].0), trace))
}

/// SPSA with the canonical gain exponents `a_k ~ (k+1+A)^-0.602`,
/// `c_k ~ (k+1)^-0.101`, `A = 0.1 max_iter`, `c = 0.1`; the scale `a` is
/// calibrated so the first step moves at most 0.3 rad per component.
fn spsa(
    problem: &VqeProblem,
    opts: &MinimizeOptions,
    start: AnsatzParameters,
    seed: u64,
) -> Result<(AnsatzParameters, VqeTrace)> {
    const DIM: usize = 4;
    const ALPHA: f64 = 0.602;
    const GAMMA: f64 = 0.101;
    const C: f64 = 0.1;
    const FIRST_STEP: f64 = 0.3;

    let big_a = 0.1 * opts.max_iter as f64;
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, mix(&[4])));
    let mut eval_count = 0u64;

    let mut theta = start.to_array();
    let eval = |x: &[f64; DIM], count: &mut u64| -> Result<(f64, f64)> {
        *count += 1;
        let (e, err) = problem.energy(
            &AnsatzParameters::from_array(*x),
            opts.mode,
            &opts.sampler,
            derive_seed(seed, mix(&[5, *count])),
        )?;
        Ok((e, err.unwrap_or(0.0)))
    };

    // calibrate the gain from a few gradient probes at the start point
    let mut grad_mag = 0.0f64;
    const PROBES: usize = 5;
    for _ in 0..PROBES {
        let delta: [f64; DIM] = std::array::from_fn(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
        let mut plus = theta;
        let mut minus = theta;
        for d in 0..DIM {
            plus[d] += C * delta[d];
            minus[d] -= C * delta[d];
        }
        let (ep, _) = eval(&plus, &mut eval_count)?;
        let (em, _) = eval(&minus, &mut eval_count)?;
        grad_mag += ((ep - em) / (2.0 * C)).abs() / PROBES as f64;
    }
    let a = FIRST_STEP * (1.0 + big_a).powf(ALPHA) / grad_mag.max(1e-6);

    let mut trace = VqeTrace::default();
    for k in 0..opts.max_iter {
        let ak = a / (k as f64 + 1.0 + big_a).powf(ALPHA);
        let ck = C / (k as f64 + 1.0).powf(GAMMA);
        let delta: [f64; DIM] = std::array::from_fn(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
        let mut plus = theta;
        let mut minus = theta;
        for d in 0..DIM {
            plus[d] += ck * delta[d];
            minus[d] -= ck * delta[d];
        }
        let (ep, err_p) = eval(&plus, &mut eval_count)?;
        let (em, _) = eval(&minus, &mut eval_count)?;
        let slope = (ep - em) / (2.0 * ck);
        for d in 0..DIM {
            theta[d] -= ak * slope * delta[d];
        }
        record(
            problem,
            &mut trace,
            k,
            0.5 * (ep + em),
            Some(err_p),
            AnsatzParameters::from_array(theta),
        )?;
    }
    Ok((AnsatzParameters::from_array(theta), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdiag;
    use crate::fermion::{build_hubbard, ModeLabeling};
    use crate::simulator::fidelity;

    fn problem() -> VqeProblem {
        VqeProblem::new(&build_hubbard(2, 1.0, 3.0).unwrap(), CommutationKind::QubitWise).unwrap()
    }

    #[test]
    fn ansatz_conserves_particle_number_and_spin() {
        let labeling = ModeLabeling::dimer();
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let p = AnsatzParameters::from_array(std::array::from_fn(|_| {
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
            }));
            let state = run_circuit(&build_ansatz(&p), None).unwrap();
            for (idx, amp) in state.amplitudes().iter().enumerate() {
                let n: u32 = idx.count_ones();
                let sz: i32 = (0..4)
                    .filter(|&m| (idx >> (3 - m)) & 1 == 1)
                    .map(|m| labeling.sz_twice(m))
                    .sum();
                if n != 2 || sz != 0 {
                    assert_eq!(
                        *amp,
                        num_complex::Complex64::new(0.0, 0.0),
                        "leakage at index {idx}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_angles_give_a_basis_state() {
        let p = AnsatzParameters::new(0.0, 0.0, 0.0, 0.0);
        let state = run_circuit(&build_ansatz(&p), None).unwrap();
        let nonzero: Vec<usize> = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-12)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero, vec![0b1010]);
        assert!((state.amplitudes()[0b1010].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_energy_is_variationally_bounded() {
        let prob = problem();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = AnsatzParameters::from_array(std::array::from_fn(|_| {
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
            }));
            let (e, _) = prob
                .energy(&p, EnergyMode::Exact, &SamplerOptions::exact_shots(1), 0)
                .unwrap();
            assert!(e >= -1.0 - 1e-9, "energy {e} below the ground energy");
        }
    }

    #[test]
    fn exact_simplex_reaches_the_ground_state() {
        let prob = problem();
        let opts = MinimizeOptions::exact_defaults(11);
        let out = minimize(&prob, &opts).unwrap();
        assert!(
            (out.best_energy + 1.0).abs() < 1e-4,
            "best energy {}",
            out.best_energy
        );

        let labeling = ModeLabeling::dimer();
        let h = build_hubbard(2, 1.0, 3.0).unwrap();
        let (_, exact_ground) = exactdiag::ground_state(&h, &labeling, 2, 0).unwrap();
        let state = prob.state(&out.best_params).unwrap();
        let f = fidelity(&state, &exact_ground).unwrap();
        assert!(f >= 0.9999, "fidelity {f}");
    }

    #[test]
    fn simplex_trace_is_monotone() {
        let prob = problem();
        let opts = MinimizeOptions {
            n_restarts: 1,
            ..MinimizeOptions::exact_defaults(3)
        };
        let out = minimize(&prob, &opts).unwrap();
        let trace = &out.traces[0];
        assert!(!trace.points.is_empty());
        for w in trace.points.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-12);
        }
    }

    #[test]
    fn spsa_steps_shrink() {
        // exact-mode SPSA isolates the gain schedule from shot noise
        let prob = problem();
        let opts = MinimizeOptions {
            n_restarts: 1,
            max_iter: 300,
            mode: EnergyMode::Exact,
            optimizer: OptimizerKind::Spsa,
            ..MinimizeOptions::sampled_defaults(19)
        };
        let out = minimize(&prob, &opts).unwrap();
        let points = &out.traces[0].points;
        let displacement = |a: &TracePoint, b: &TracePoint| -> f64 {
            a.params
                .to_array()
                .iter()
                .zip(b.params.to_array())
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let early: f64 = points
            .windows(2)
            .take(20)
            .map(|w| displacement(&w[0], &w[1]))
            .sum::<f64>()
            / 20.0;
        let late: f64 = points
            .windows(2)
            .skip(points.len() - 21)
            .map(|w| displacement(&w[0], &w[1]))
            .sum::<f64>()
            / 20.0;
        assert!(
            late < 0.2 * early,
            "displacements did not decay: early {early}, late {late}"
        );
    }

    #[test]
    fn fixed_seed_reproduces_the_trace() {
        let prob = problem();
        let opts = MinimizeOptions {
            n_restarts: 2,
            max_iter: 40,
            ..MinimizeOptions::sampled_defaults(123)
        };
        let a = minimize(&prob, &opts).unwrap();
        let b = minimize(&prob, &opts).unwrap();
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.best_energy, b.best_energy);
        for (ta, tb) in a.traces.iter().zip(&b.traces) {
            assert_eq!(ta.points.len(), tb.points.len());
            for (pa, pb) in ta.points.iter().zip(&tb.points) {
                assert_eq!(pa.energy, pb.energy);
                assert_eq!(pa.params, pb.params);
            }
        }
    }

    #[test]
    fn sampled_energy_at_converged_parameters() {
        let prob = problem();
        let exact_opts = MinimizeOptions::exact_defaults(2);
        let best = minimize(&prob, &exact_opts).unwrap().best_params;
        let (e, err) = prob
            .energy(
                &best,
                EnergyMode::Sampled,
                &SamplerOptions::exact_shots(8192),
                555,
            )
            .unwrap();
        let err = err.unwrap();
        assert!(err > 0.0);
        assert!(
            (e + 1.0).abs() < 3.0 * err,
            "sampled energy {e} more than 3 sigma ({err}) from -1"
        );
    }
}
