//! Charged excitations from the equation-of-motion method: the double-
//! commutator matrices, the generalized eigenvalue problem with an indefinite
//! metric, sector classification by metric signature, and Rayleigh-quotient
//! refinement of the eigenvalues.
//!
//! The particle and hole spectra come out of one solve: for eigenvector `X`
//! with eigenvalue `lambda`, a positive metric form `<X|B|X>` marks an
//! `N+1` state with `lambda = E^{N+1} - E0`, a negative one marks an `N-1`
//! state with `lambda = E0 - E^{N-1}`. Either way the Green's function has a
//! pole at `omega = lambda`.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{
    commutator, double_commutator, FermionOperator, LadderOp, LadderTerm, ModeLabeling, Spin,
};
use crate::linalg;
use crate::pauli::{jordan_wigner, CommutationKind};
use crate::seeding::{derive_seed, mix};
use crate::simulator::{
    exact_transition, run_circuit, sampled_expectation, Circuit, MeasurementPlan, SamplerOptions,
    StateVector,
};

/// Metric truncation threshold used in exact mode.
pub const EXACT_TRUNCATION: f64 = 1e-6;
/// Metric truncation threshold used with shot-sampled matrices.
pub const SAMPLED_TRUNCATION: f64 = 1e-2;

/// An ordered set of elementary charged-excitation operators, each raising
/// the particle number by one.
#[derive(Debug, Clone)]
pub struct ExcitationBasis {
    n_modes: usize,
    ops: Vec<FermionOperator>,
}

impl ExcitationBasis {
    pub fn new(ops: Vec<FermionOperator>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Validation("excitation basis must be non-empty".into()))?;
        let n_modes = first.n_modes();
        for (i, op) in ops.iter().enumerate() {
            if op.n_modes() != n_modes {
                return Err(Error::Dimension(format!(
                    "basis operator {i} acts on {} modes, expected {n_modes}",
                    op.n_modes()
                )));
            }
            if op.num_terms() != 1 {
                return Err(Error::Validation(format!(
                    "basis operator {i} is not a single product"
                )));
            }
            let term = op.terms().next().expect("one term");
            if term.particle_change() != 1 {
                return Err(Error::Validation(format!(
                    "basis operator {i} changes particle number by {}, expected +1",
                    term.particle_change()
                )));
            }
        }
        Ok(Self { n_modes, ops })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[FermionOperator] {
        &self.ops
    }

    /// `O_n^+ = sum_mu X_mu E_mu` for a coefficient vector `X`.
    pub fn combine(&self, x: &[Complex64]) -> Result<FermionOperator> {
        if x.len() != self.ops.len() {
            return Err(Error::Dimension(format!(
                "coefficient vector of length {}, basis of size {}",
                x.len(),
                self.ops.len()
            )));
        }
        let mut out = FermionOperator::zero(self.n_modes);
        for (c, op) in x.iter().zip(&self.ops) {
            out = out.add(&op.scale(*c))?;
        }
        Ok(out)
    }
}

/// The four dimer operators used throughout: all lower `S_z` by 1/2, so the
/// solve targets `N+1` states with `S_z = -1/2` and `N-1` states with
/// `S_z = +1/2`.
pub fn default_charged_basis() -> ExcitationBasis {
    let l = ModeLabeling::dimer();
    let n = l.n_modes();
    let one = Complex64::new(1.0, 0.0);
    let product = |factors: Vec<LadderOp>| {
        FermionOperator::from_terms(n, vec![LadderTerm::new(one, factors)]).expect("valid modes")
    };
    let e0 = product(vec![
        LadderOp::create(l.index(1, Spin::Down)),
        LadderOp::create(l.index(1, Spin::Up)),
        LadderOp::annihilate(l.index(2, Spin::Up)),
    ]);
    let e1 = product(vec![
        LadderOp::create(l.index(2, Spin::Down)),
        LadderOp::create(l.index(1, Spin::Down)),
        LadderOp::annihilate(l.index(2, Spin::Down)),
    ]);
    let e2 = product(vec![
        LadderOp::create(l.index(2, Spin::Down)),
        LadderOp::create(l.index(1, Spin::Down)),
        LadderOp::create(l.index(2, Spin::Up)),
        LadderOp::annihilate(l.index(1, Spin::Up)),
        LadderOp::annihilate(l.index(2, Spin::Down)),
    ]);
    let e3 = product(vec![LadderOp::create(l.index(2, Spin::Down))]);
    ExcitationBasis::new(vec![e0, e1, e2, e3]).expect("default basis is well formed")
}

/// Ground state available as a statevector and, when it came from an ansatz,
/// as the circuit that prepares it. Shot-sampled estimation needs the
/// circuit; exact estimation works from the state alone (validation mode
/// feeds the oracle eigenvector here).
#[derive(Debug, Clone)]
pub struct PreparedGround {
    circuit: Option<Circuit>,
    state: StateVector,
}

impl PreparedGround {
    pub fn from_circuit(circuit: Circuit) -> Result<Self> {
        let state = run_circuit(&circuit, None)?;
        Ok(Self {
            circuit: Some(circuit),
            state,
        })
    }

    pub fn from_state(state: StateVector) -> Self {
        Self {
            circuit: None,
            state,
        }
    }

    pub fn circuit(&self) -> Option<&Circuit> {
        self.circuit.as_ref()
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

/// How matrix elements are estimated.
#[derive(Debug, Clone, Copy)]
pub enum EstimationMode {
    Exact,
    /// Each element is averaged over `n_realizations` independent grouped
    /// estimates of `shots` each.
    Sampled {
        sampler: SamplerOptions,
        n_realizations: usize,
        grouping: CommutationKind,
    },
}

/// The equation-of-motion matrices; `a[(mu,nu)] = <0|[E_mu^+, H, E_nu]|0>`,
/// `b[(mu,nu)] = <0|[E_mu^+, E_nu]|0>`, with per-element standard errors in
/// sampled mode.
#[derive(Debug, Clone)]
pub struct QeomMatrices {
    pub a: Array2<Complex64>,
    pub b: Array2<Complex64>,
    pub a_stderr: Option<Array2<f64>>,
    pub b_stderr: Option<Array2<f64>>,
}

impl QeomMatrices {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `(M + M^+) / 2` on both matrices, combining standard errors.
    pub fn hermitized(&self) -> QeomMatrices {
        let herm = |m: &Array2<Complex64>| {
            let mut out = m.clone();
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out[[i, j]] = (m[[i, j]] + m[[j, i]].conj()) * 0.5;
                }
            }
            out
        };
        let herm_err = |e: &Option<Array2<f64>>| {
            e.as_ref().map(|e| {
                let mut out = e.clone();
                for i in 0..e.nrows() {
                    for j in 0..e.ncols() {
                        out[[i, j]] =
                            0.5 * (e[[i, j]].powi(2) + e[[j, i]].powi(2)).sqrt();
                    }
                }
                out
            })
        };
        QeomMatrices {
            a: herm(&self.a),
            b: herm(&self.b),
            a_stderr: herm_err(&self.a_stderr),
            b_stderr: herm_err(&self.b_stderr),
        }
    }
}

/// Estimates `<0|op|0>` for a generally non-Hermitian `op` by measuring its
/// Hermitian and anti-Hermitian parts separately. Returns the estimate and
/// its standard error (zero in exact mode).
pub fn estimate_transition(
    op: &FermionOperator,
    ground: &PreparedGround,
    mode: &EstimationMode,
    seed: u64,
) -> Result<(Complex64, f64)> {
    let n = op.n_modes();
    match mode {
        EstimationMode::Exact => {
            let val = exact_transition(ground.state(), &jordan_wigner(op, n)?)?;
            Ok((val, 0.0))
        }
        EstimationMode::Sampled {
            sampler,
            n_realizations,
            grouping,
        } => {
            let adj = op.adjoint();
            let herm = op.add(&adj)?.scale(Complex64::new(0.5, 0.0));
            let anti = op
                .sub(&adj)?
                .scale(Complex64::new(0.0, -0.5)); // (op - op^+) / (2i), Hermitian
            let mut parts = [Complex64::new(0.0, 0.0); 2];
            let mut vars = [0.0f64; 2];
            for (pi, part) in [&herm, &anti].into_iter().enumerate() {
                if part.is_zero() {
                    continue;
                }
                let sum = jordan_wigner(part, n)?;
                if sum.is_zero() {
                    continue;
                }
                let circuit = ground.circuit().ok_or_else(|| {
                    Error::Validation(
                        "sampled estimation needs a circuit-prepared ground state".into(),
                    )
                })?;
                let plan = MeasurementPlan::new(&sum, *grouping)?;
                let mut estimates = Vec::with_capacity(*n_realizations);
                let mut binomial_var = 0.0f64;
                for r in 0..*n_realizations {
                    let (est, err) = sampled_expectation(
                        circuit,
                        &plan,
                        sampler,
                        derive_seed(seed, mix(&[pi as u64, r as u64])),
                    )?;
                    estimates.push(est);
                    binomial_var += err * err;
                }
                let m = estimates.len() as f64;
                let mean = estimates.iter().sum::<f64>() / m;
                let scatter_var = if estimates.len() > 1 {
                    estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0) / m
                } else {
                    0.0
                };
                // the realization scatter estimates the same variance as the
                // per-shot binomial propagation; take the larger of the two so
                // an unlucky scatter draw cannot understate the error
                parts[pi] = Complex64::new(mean, 0.0);
                vars[pi] = scatter_var.max(binomial_var / (m * m));
            }
            let value = parts[0] + Complex64::new(0.0, 1.0) * parts[1];
            Ok((value, (vars[0] + vars[1]).sqrt()))
        }
    }
}

/// Builds the EOM matrices over `basis` for Hamiltonian `h` on the prepared
/// ground state. Every element is estimated independently with its own
/// derived seed; sampled matrices are left un-Hermitized here.
pub fn build_matrices(
    ground: &PreparedGround,
    basis: &ExcitationBasis,
    h: &FermionOperator,
    mode: &EstimationMode,
    seed: u64,
) -> Result<QeomMatrices> {
    if !h.is_hermitian(1e-10) {
        return Err(Error::Validation(
            "EOM matrices need a Hermitian Hamiltonian".into(),
        ));
    }
    if basis.n_modes() != h.n_modes() {
        return Err(Error::Dimension(format!(
            "basis on {} modes, Hamiltonian on {}",
            basis.n_modes(),
            h.n_modes()
        )));
    }
    let m = basis.len();
    let mut a = Array2::zeros((m, m));
    let mut b = Array2::zeros((m, m));
    let mut a_err = Array2::zeros((m, m));
    let mut b_err = Array2::zeros((m, m));
    for mu in 0..m {
        let dag = basis.ops()[mu].adjoint();
        for nu in 0..m {
            let a_op = double_commutator(&dag, h, &basis.ops()[nu])?;
            let b_op = commutator(&dag, &basis.ops()[nu])?;
            let (av, ae) = estimate_element(
                &a_op,
                ground,
                mode,
                derive_seed(seed, mix(&[10, mu as u64, nu as u64])),
            )?;
            let (bv, be) = estimate_element(
                &b_op,
                ground,
                mode,
                derive_seed(seed, mix(&[11, mu as u64, nu as u64])),
            )?;
            a[[mu, nu]] = av;
            b[[mu, nu]] = bv;
            a_err[[mu, nu]] = ae;
            b_err[[mu, nu]] = be;
        }
    }
    let sampled = matches!(mode, EstimationMode::Sampled { .. });
    Ok(QeomMatrices {
        a,
        b,
        a_stderr: sampled.then_some(a_err),
        b_stderr: sampled.then_some(b_err),
    })
}

/// Which charge sector an eigenvector describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Particle,
    Hole,
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sector::Particle => write!(f, "particle"),
            Sector::Hole => write!(f, "hole"),
        }
    }
}

/// Eigenpairs of `A X = lambda B X`, ascending in `lambda`.
#[derive(Debug, Clone)]
pub struct QeomSolution {
    pub eigenvalues: Vec<f64>,
    /// Coefficient vectors over the excitation basis, unit 2-norm.
    pub eigenvectors: Vec<Array1<Complex64>>,
    pub sectors: Vec<Sector>,
    /// Metric forms `<X|B|X>` whose signs set the sectors.
    pub b_norms: Vec<f64>,
}

impl QeomSolution {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Canonical-orthogonalization solve of the generalized eigenvalue problem:
/// eigendecompose `B`, drop metric eigenvalues below `truncation`, rescale by
/// `|b|^(-1/2)` keeping the signature `S`, and diagonalize `S^-1`-weighted
/// `A' = T^+ A T` as the ordinary problem `(S A') Y = lambda Y`.
pub fn solve_gep(m: &QeomMatrices, truncation: f64) -> Result<QeomSolution> {
    let dim = m.dim();
    let herm_defect = linalg::hermiticity_defect(&m.a).max(linalg::hermiticity_defect(&m.b));
    if herm_defect > 1e-9 {
        return Err(Error::Validation(format!(
            "matrices must be Hermitized before solving (defect {herm_defect:e})"
        )));
    }
    let (b_eigs, b_vecs) = linalg::eigh(&m.b)?;
    let kept: Vec<usize> = (0..dim).filter(|&i| b_eigs[i].abs() >= truncation).collect();
    if kept.is_empty() {
        return Err(Error::EmptyGep(truncation));
    }
    let k = kept.len();
    let mut transform = Array2::<Complex64>::zeros((dim, k));
    let mut signature = Array1::<f64>::zeros(k);
    for (col, &i) in kept.iter().enumerate() {
        let scale = 1.0 / b_eigs[i].abs().sqrt();
        signature[col] = b_eigs[i].signum();
        for row in 0..dim {
            transform[[row, col]] = b_vecs[[row, i]] * scale;
        }
    }
    let t_adj = transform.t().map(|c| c.conj());
    let a_reduced = t_adj.dot(&m.a).dot(&transform);
    // multiply rows by the signature: (S A') Y = lambda Y
    let mut pencil = a_reduced.clone();
    for row in 0..k {
        for col in 0..k {
            pencil[[row, col]] *= signature[row];
        }
    }
    let (raw_vals, raw_vecs) = linalg::eig(&pencil)?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| raw_vals[i].re.partial_cmp(&raw_vals[j].re).unwrap());

    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    let mut sectors = Vec::with_capacity(k);
    let mut b_norms = Vec::with_capacity(k);
    for &idx in &order {
        let lambda = raw_vals[idx];
        if lambda.im.abs() > 1e-6 * (1.0 + lambda.re.abs()) {
            return Err(Error::Numerical(format!(
                "eigenvalue {lambda} has a large imaginary part; the metric may be too noisy"
            )));
        }
        let y = raw_vecs.column(idx).to_owned();
        let x = transform.dot(&y);
        let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Numerical("zero eigenvector from the solver".into()));
        }
        let x = x.map(|c| c / norm);
        let bx = m.b.dot(&x);
        let q: Complex64 = x.iter().zip(bx.iter()).map(|(a, b)| a.conj() * b).sum();
        let q = q.re;
        eigenvalues.push(lambda.re);
        sectors.push(if q >= 0.0 { Sector::Particle } else { Sector::Hole });
        b_norms.push(q);
        eigenvectors.push(canonical_phase(x));
    }
    Ok(QeomSolution {
        eigenvalues,
        eigenvectors,
        sectors,
        b_norms,
    })
}

/// Fixes the arbitrary eigenvector phase: largest-magnitude coefficient made
/// real positive, ties broken by the lowest index.
fn canonical_phase(x: Array1<Complex64>) -> Array1<Complex64> {
    let mut best = 0usize;
    let mut best_mag = -1.0f64;
    for (i, c) in x.iter().enumerate() {
        if c.norm() > best_mag + 1e-12 {
            best_mag = c.norm();
            best = i;
        }
    }
    let pivot = x[best];
    if pivot.norm() == 0.0 {
        return x;
    }
    let phase = pivot / pivot.norm();
    x.map(|c| c / phase)
}

/// The stationary functional `(X^+ A X) / (X^+ B X)` evaluated directly;
/// at a GEP eigenvector it reproduces the eigenvalue, and on noisy matrices
/// it is a steadier energy estimate than the eigenvalue itself.
pub fn rayleigh_refine(x: &Array1<Complex64>, m: &QeomMatrices) -> Result<f64> {
    let ax = m.a.dot(x);
    let bx = m.b.dot(x);
    let num: Complex64 = x.iter().zip(ax.iter()).map(|(a, b)| a.conj() * b).sum();
    let den: Complex64 = x.iter().zip(bx.iter()).map(|(a, b)| a.conj() * b).sum();
    if den.norm() <= 1e-10 {
        return Err(Error::Degenerate(format!(
            "metric form {den} too small for the Rayleigh quotient"
        )));
    }
    Ok((num / den).re)
}

/// Linearized standard error of the Rayleigh quotient at `x`, propagated
/// from independent per-element uncertainties of `A` and `B`.
pub fn rayleigh_stderr(x: &Array1<Complex64>, m: &QeomMatrices) -> Result<f64> {
    let (Some(a_err), Some(b_err)) = (&m.a_stderr, &m.b_stderr) else {
        return Ok(0.0);
    };
    let energy = rayleigh_refine(x, m)?;
    let bx = m.b.dot(x);
    let den: Complex64 = x.iter().zip(bx.iter()).map(|(a, b)| a.conj() * b).sum();
    let den = den.norm();
    let mut var = 0.0f64;
    for i in 0..x.len() {
        for j in 0..x.len() {
            let weight = (x[i].norm() * x[j].norm() / den).powi(2);
            var += weight * (a_err[[i, j]].powi(2) + energy * energy * b_err[[i, j]].powi(2));
        }
    }
    Ok(var.sqrt())
}

/// `O_n^+ = sum_mu X_mu E_mu`, rescaled so the generated state has unit norm:
/// `<0|O_n O_n^+|0>` for particle states, `<0|O_n^+ O_n|0>` for hole states.
pub fn normalized_excitation(
    x: &Array1<Complex64>,
    basis: &ExcitationBasis,
    ground: &StateVector,
    sector: Sector,
) -> Result<FermionOperator> {
    let op_dag = basis.combine(x.as_slice().expect("contiguous"))?;
    if op_dag.is_zero() {
        return Err(Error::Degenerate("zero excitation operator".into()));
    }
    let op = op_dag.adjoint();
    let norm_op = match sector {
        Sector::Particle => op.multiply(&op_dag)?,
        Sector::Hole => op_dag.multiply(&op)?,
    };
    let norm_sqr = exact_transition(ground, &jordan_wigner(&norm_op, basis.n_modes())?)?.re;
    if norm_sqr <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "excited-state norm^2 = {norm_sqr:e}"
        )));
    }
    Ok(op_dag.scale(Complex64::new(1.0 / norm_sqr.sqrt(), 0.0)))
}
