//! Symbolic algebra of fermionic ladder operators.
//!
//! Operators are stored as sums of normal-ordered products: all creation
//! factors first (ascending mode index), then all annihilation factors
//! (descending mode index). Reordering tracks the fermionic sign from
//! `{c_i, c_j^+} = delta_ij`, `{c_i, c_j} = 0`, so two operators are equal
//! iff their canonical term maps are equal.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped during simplification.
pub const COEFF_TOLERANCE: f64 = 1e-12;

/// A single creation (`dagger = true`) or annihilation factor on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderOp {
    pub mode: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }

    /// Canonical position: creations ascending in mode, then annihilations
    /// descending, so number operators keep positive coefficients
    /// (`n_i n_j = c+_i c+_j c_j c_i` for `i < j`).
    fn order_key(self) -> (u8, usize) {
        if self.dagger {
            (0, self.mode)
        } else {
            (1, usize::MAX - self.mode)
        }
    }
}

impl PartialOrd for LadderOp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LadderOp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl fmt::Display for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "c+_{}", self.mode)
        } else {
            write!(f, "c_{}", self.mode)
        }
    }
}

/// One product of ladder factors with a complex coefficient. An empty factor
/// list is a multiple of the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderTerm {
    pub coefficient: Complex64,
    pub factors: Vec<LadderOp>,
}

impl LadderTerm {
    pub fn new(coefficient: Complex64, factors: Vec<LadderOp>) -> Self {
        Self {
            coefficient,
            factors,
        }
    }

    pub fn identity(coefficient: Complex64) -> Self {
        Self {
            coefficient,
            factors: Vec::new(),
        }
    }

    /// Net particle-number change of the product (creations minus annihilations).
    pub fn particle_change(&self) -> i64 {
        self.factors
            .iter()
            .map(|f| if f.dagger { 1 } else { -1 })
            .sum()
    }
}

/// Labels each mode of the spin-1/2 chain: up-spin sites first, then
/// down-spin sites, so the dimer basis order is
/// `{|1,up>, |2,up>, |1,down>, |2,down>} -> {0,1,2,3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLabeling {
    n_sites: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spin::Up => write!(f, "up"),
            Spin::Down => write!(f, "down"),
        }
    }
}

impl ModeLabeling {
    pub fn new(n_sites: usize) -> Self {
        Self { n_sites }
    }

    /// The two-site labeling used throughout.
    pub fn dimer() -> Self {
        Self::new(2)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    /// Mode index of `(site, spin)`; sites are 1-based to match the physics labels.
    pub fn index(&self, site: usize, spin: Spin) -> usize {
        assert!(site >= 1 && site <= self.n_sites, "site out of range");
        match spin {
            Spin::Up => site - 1,
            Spin::Down => self.n_sites + site - 1,
        }
    }

    pub fn site_spin(&self, mode: usize) -> (usize, Spin) {
        assert!(mode < self.n_modes(), "mode out of range");
        if mode < self.n_sites {
            (mode + 1, Spin::Up)
        } else {
            (mode - self.n_sites + 1, Spin::Down)
        }
    }

    /// 2*S_z carried by an electron in `mode` (+1 for up, -1 for down).
    pub fn sz_twice(&self, mode: usize) -> i32 {
        match self.site_spin(mode).1 {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }
}

/// A sum of normal-ordered ladder products over a fixed set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    terms: BTreeMap<Vec<LadderOp>, Complex64>,
}

impl FermionOperator {
    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_modes: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        Self { n_modes, terms }
    }

    pub fn creation(n_modes: usize, mode: usize) -> Result<Self> {
        Self::from_terms(
            n_modes,
            vec![LadderTerm::new(
                Complex64::new(1.0, 0.0),
                vec![LadderOp::create(mode)],
            )],
        )
    }

    pub fn annihilation(n_modes: usize, mode: usize) -> Result<Self> {
        Self::from_terms(
            n_modes,
            vec![LadderTerm::new(
                Complex64::new(1.0, 0.0),
                vec![LadderOp::annihilate(mode)],
            )],
        )
    }

    /// The occupation operator `c+_mode c_mode`.
    pub fn number(n_modes: usize, mode: usize) -> Result<Self> {
        Self::from_terms(
            n_modes,
            vec![LadderTerm::new(
                Complex64::new(1.0, 0.0),
                vec![LadderOp::create(mode), LadderOp::annihilate(mode)],
            )],
        )
    }

    /// Builds an operator from arbitrary products; the result is normal-ordered
    /// and collected immediately.
    pub fn from_terms(n_modes: usize, raw: Vec<LadderTerm>) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for term in raw {
            for f in &term.factors {
                if f.mode >= n_modes {
                    return Err(Error::Dimension(format!(
                        "mode {} out of range for {} modes",
                        f.mode, n_modes
                    )));
                }
            }
            normal_order_into(term.coefficient, &term.factors, &mut terms);
        }
        drop_small(&mut terms);
        Ok(Self { n_modes, terms })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = LadderTerm> + '_ {
        self.terms
            .iter()
            .map(|(f, c)| LadderTerm::new(*c, f.clone()))
    }

    fn check_same_modes(&self, other: &Self) -> Result<()> {
        if self.n_modes != other.n_modes {
            return Err(Error::Dimension(format!(
                "operators act on {} vs {} modes",
                self.n_modes, other.n_modes
            )));
        }
        Ok(())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        drop_small(&mut out.terms);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_modes(other)?;
        let mut out = self.clone();
        for (f, c) in &other.terms {
            *out.terms.entry(f.clone()).or_insert(Complex64::ZERO) += c;
        }
        drop_small(&mut out.terms);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Distributed product, canonically simplified.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_modes(other)?;
        let mut terms = BTreeMap::new();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &other.terms {
                let mut factors = fa.clone();
                factors.extend_from_slice(fb);
                normal_order_into(ca * cb, &factors, &mut terms);
            }
        }
        drop_small(&mut terms);
        Ok(Self {
            n_modes: self.n_modes,
            terms,
        })
    }

    /// Reversed factor order, toggled daggers, conjugated coefficients.
    pub fn adjoint(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (f, c) in &self.terms {
            let factors: Vec<LadderOp> = f.iter().rev().map(|op| op.adjoint()).collect();
            normal_order_into(c.conj(), &factors, &mut terms);
        }
        drop_small(&mut terms);
        Self {
            n_modes: self.n_modes,
            terms,
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = self
            .sub(&self.adjoint())
            .expect("adjoint preserves n_modes");
        diff.terms.values().all(|c| c.norm() <= tol)
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &FermionOperator, b: &FermionOperator) -> Result<FermionOperator> {
    a.multiply(b)?.sub(&b.multiply(a)?)
}

/// `{a, b} = ab + ba`.
pub fn anticommutator(a: &FermionOperator, b: &FermionOperator) -> Result<FermionOperator> {
    a.multiply(b)?.add(&b.multiply(a)?)
}

/// The symmetrized double commutator `[a, h, b] = ([[a,h],b] + [a,[h,b]]) / 2`,
/// which is Hermitian whenever `h` is and `b = a^+`.
pub fn double_commutator(
    a: &FermionOperator,
    h: &FermionOperator,
    b: &FermionOperator,
) -> Result<FermionOperator> {
    let left = commutator(&commutator(a, h)?, b)?;
    let right = commutator(a, &commutator(h, b)?)?;
    Ok(left.add(&right)?.scale(Complex64::new(0.5, 0.0)))
}

/// Open-chain Fermi-Hubbard Hamiltonian
/// `-t sum_sigma sum_<i,i+1> (c+_{i,sigma} c_{i+1,sigma} + h.c.) + U sum_i n_{i,up} n_{i,down}`.
pub fn build_hubbard(n_sites: usize, t: f64, u: f64) -> Result<FermionOperator> {
    if !(t.is_finite() && u.is_finite()) {
        return Err(Error::Validation(format!(
            "hopping and interaction must be finite, got t={t}, U={u}"
        )));
    }
    if n_sites < 1 {
        return Err(Error::Validation("need at least one site".into()));
    }
    let labeling = ModeLabeling::new(n_sites);
    let n_modes = labeling.n_modes();
    let mut terms = Vec::new();
    for site in 1..n_sites {
        for spin in [Spin::Up, Spin::Down] {
            let i = labeling.index(site, spin);
            let j = labeling.index(site + 1, spin);
            terms.push(LadderTerm::new(
                Complex64::new(-t, 0.0),
                vec![LadderOp::create(i), LadderOp::annihilate(j)],
            ));
            terms.push(LadderTerm::new(
                Complex64::new(-t, 0.0),
                vec![LadderOp::create(j), LadderOp::annihilate(i)],
            ));
        }
    }
    for site in 1..=n_sites {
        let up = labeling.index(site, Spin::Up);
        let dn = labeling.index(site, Spin::Down);
        terms.push(LadderTerm::new(
            Complex64::new(u, 0.0),
            vec![
                LadderOp::create(up),
                LadderOp::annihilate(up),
                LadderOp::create(dn),
                LadderOp::annihilate(dn),
            ],
        ));
    }
    FermionOperator::from_terms(n_modes, terms)
}

/// Momentum-space annihilation operator `(c_{1,sigma} + e^{ik} c_{2,sigma}) / sqrt(2)`
/// of the dimer. `k = 0` and `k = pi` give the exact coefficients +-1/sqrt(2).
pub fn momentum_mode(k: f64, spin: Spin) -> FermionOperator {
    let labeling = ModeLabeling::dimer();
    let phase = if k == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if (k - std::f64::consts::PI).abs() < 1e-12 {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::cis(k)
    };
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    FermionOperator::from_terms(
        labeling.n_modes(),
        vec![
            LadderTerm::new(
                inv_sqrt2,
                vec![LadderOp::annihilate(labeling.index(1, spin))],
            ),
            LadderTerm::new(
                phase * inv_sqrt2,
                vec![LadderOp::annihilate(labeling.index(2, spin))],
            ),
        ],
    )
    .expect("dimer modes in range")
}

fn drop_small(terms: &mut BTreeMap<Vec<LadderOp>, Complex64>) {
    terms.retain(|_, c| c.norm() > COEFF_TOLERANCE);
}

/// Rewrites `coeff * factors` as a sum of canonically ordered products and
/// accumulates it into `terms`. Swapping distinct factors flips the sign;
/// swapping `c_i c+_i` additionally spawns the contracted identity term, and
/// repeated identical factors vanish.
fn normal_order_into(
    coeff: Complex64,
    factors: &[LadderOp],
    terms: &mut BTreeMap<Vec<LadderOp>, Complex64>,
) {
    let mut stack: Vec<(Complex64, Vec<LadderOp>)> = vec![(coeff, factors.to_vec())];
    'outer: while let Some((c, f)) = stack.pop() {
        for i in 0..f.len().saturating_sub(1) {
            let (l, r) = (f[i], f[i + 1]);
            if l.mode == r.mode && l.dagger == r.dagger {
                continue 'outer; // nilpotency: the whole product vanishes
            }
            if l <= r {
                continue;
            }
            let mut swapped = f.clone();
            swapped.swap(i, i + 1);
            stack.push((-c, swapped));
            if !l.dagger && r.dagger && l.mode == r.mode {
                // c_i c+_i = 1 - c+_i c_i
                let mut contracted = f.clone();
                contracted.drain(i..=i + 1);
                stack.push((c, contracted));
            }
            continue 'outer;
        }
        *terms.entry(f).or_insert(Complex64::ZERO) += c;
    }
}

fn format_coeff(c: Complex64) -> String {
    if c.im.abs() <= COEFF_TOLERANCE {
        format!("({})", c.re)
    } else if c.re.abs() <= COEFF_TOLERANCE {
        format!("({}i)", c.im)
    } else if c.im < 0.0 {
        format!("({}{}i)", c.re, c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(factors, c)| {
                if factors.is_empty() {
                    format_coeff(*c)
                } else {
                    let ops: Vec<String> = factors.iter().map(|op| op.to_string()).collect();
                    format!("{} {}", format_coeff(*c), ops.join(" "))
                }
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}
