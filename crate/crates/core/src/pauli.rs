//! Pauli-string algebra, the Jordan-Wigner encoding, and partitioning of
//! observables into simultaneously measurable groups.
//!
//! Conventions: qubit `j` hosts fermionic mode `j`; the leftmost letter of a
//! string is qubit 0. Creation operators map as
//! `c+_j -> Z_0 ... Z_{j-1} (X_j - i Y_j) / 2`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, COEFF_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(PauliLetter::I),
            'X' => Ok(PauliLetter::X),
            'Y' => Ok(PauliLetter::Y),
            'Z' => Ok(PauliLetter::Z),
            other => Err(Error::Validation(format!("not a Pauli letter: {other}"))),
        }
    }

    /// Single-qubit product `self * other` as `(i^phase, letter)`.
    fn mul(self, other: Self) -> (u8, Self) {
        use PauliLetter::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }
}

/// A fixed-length word over {I, X, Y, Z}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            letters: vec![PauliLetter::I; n_qubits],
        }
    }

    pub fn new(letters: Vec<PauliLetter>) -> Self {
        Self { letters }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(PauliLetter::from_char)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == PauliLetter::I)
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        self.letters[qubit]
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "Pauli strings of length {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// True iff the strings commute as operators: the number of positions
    /// where both letters are non-identity and different is even.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        let anticommuting = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != PauliLetter::I && b != PauliLetter::I && a != b)
            .count();
        Ok(anticommuting % 2 == 0)
    }

    /// True iff the strings commute letter by letter (equal or identity at
    /// every position), i.e. they share a tensor-product eigenbasis.
    pub fn qubit_wise_commutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self
            .letters
            .iter()
            .zip(&other.letters)
            .all(|(&a, &b)| a == b || a == PauliLetter::I || b == PauliLetter::I))
    }

    /// Letter-wise product with the accumulated phase in {1, i, -1, -i}.
    pub fn multiply(&self, other: &Self) -> Result<(Complex64, PauliString)> {
        self.check_len(other)?;
        let mut phase = 0u8;
        let mut letters = Vec::with_capacity(self.len());
        for (&a, &b) in self.letters.iter().zip(&other.letters) {
            let (p, l) = a.mul(b);
            phase = (phase + p) % 4;
            letters.push(l);
        }
        let unit = match phase {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Ok((unit, PauliString { letters }))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// A complex linear combination of Pauli strings, kept sorted and merged.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(PauliString, Complex64)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<(PauliString, Complex64)>) -> Result<Self> {
        for (s, _) in &terms {
            if s.len() != n_qubits {
                return Err(Error::Dimension(format!(
                    "string {} in a {}-qubit sum",
                    s, n_qubits
                )));
            }
        }
        let mut sum = Self { n_qubits, terms };
        sum.simplify();
        Ok(sum)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(PauliString, Complex64)] {
        &self.terms
    }

    fn simplify(&mut self) {
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(PauliString, Complex64)> = Vec::with_capacity(self.terms.len());
        for (s, c) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((last, acc)) if *last == s => *acc += c,
                _ => merged.push((s, c)),
            }
        }
        merged.retain(|(_, c)| c.norm() > COEFF_TOLERANCE);
        self.terms = merged;
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for (_, c) in &mut out.terms {
            *c *= factor;
        }
        out.simplify();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "sums on {} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PauliSum::from_terms(self.n_qubits, terms)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "sums on {} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (phase, s) = sa.multiply(sb)?;
                terms.push((s, ca * cb * phase));
            }
        }
        PauliSum::from_terms(self.n_qubits, terms)
    }

    /// Every Pauli string is self-adjoint, so the adjoint just conjugates
    /// coefficients.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(s, c)| (s.clone(), c.conj()))
            .collect();
        Self {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    /// Hermitian iff every coefficient is real (after simplification).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|(_, c)| c.im.abs() <= tol)
    }

    /// Coefficient of the identity string, if present.
    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(s, _)| s.is_identity())
            .map(|(_, c)| *c)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(s, c)| {
                if c.im.abs() <= COEFF_TOLERANCE {
                    format!("({}) {}", c.re, s)
                } else {
                    format!("({}{}{}i) {}", c.re, if c.im < 0.0 { "" } else { "+" }, c.im, s)
                }
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// Jordan-Wigner image of a fermionic operator on `n_modes` qubits.
pub fn jordan_wigner(op: &FermionOperator, n_modes: usize) -> Result<PauliSum> {
    if op.n_modes() > n_modes {
        return Err(Error::Dimension(format!(
            "operator on {} modes does not fit {} qubits",
            op.n_modes(),
            n_modes
        )));
    }
    let half = Complex64::new(0.5, 0.0);
    let mut total = Vec::new();
    for term in op.terms() {
        // product over factors, left to right
        let mut acc: Vec<(PauliString, Complex64)> =
            vec![(PauliString::identity(n_modes), term.coefficient)];
        for factor in &term.factors {
            let j = factor.mode;
            let mut xs = vec![PauliLetter::I; n_modes];
            let mut ys = vec![PauliLetter::I; n_modes];
            for q in 0..j {
                xs[q] = PauliLetter::Z;
                ys[q] = PauliLetter::Z;
            }
            xs[j] = PauliLetter::X;
            ys[j] = PauliLetter::Y;
            let y_coeff = if factor.dagger {
                Complex64::new(0.0, -0.5)
            } else {
                Complex64::new(0.0, 0.5)
            };
            let branches = [
                (PauliString::new(xs), half),
                (PauliString::new(ys), y_coeff),
            ];
            let mut next = Vec::with_capacity(acc.len() * 2);
            for (s, c) in &acc {
                for (bs, bc) in &branches {
                    let (phase, prod) = s.multiply(bs)?;
                    next.push((prod, c * bc * phase));
                }
            }
            acc = next;
        }
        total.extend(acc);
    }
    PauliSum::from_terms(n_modes, total)
}

/// Which notion of commutativity a measurement group requires.
///
/// Qubit-wise groups are diagonalized by single-qubit rotations alone and are
/// the default; general groups are coarser but need an entangling basis change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutationKind {
    QubitWise,
    General,
}

impl Default for CommutationKind {
    fn default() -> Self {
        CommutationKind::QubitWise
    }
}

/// Greedy first-fit partition of the sum's strings into mutually commuting
/// groups. Strings are visited in descending |coefficient| order with
/// lexicographic tie-breaking, so the partition is deterministic.
pub fn group_commuting(h: &PauliSum, kind: CommutationKind) -> Result<Vec<PauliSum>> {
    let mut order: Vec<&(PauliString, Complex64)> = h.terms().iter().collect();
    order.sort_by(|a, b| {
        b.1.norm()
            .partial_cmp(&a.1.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    let compatible = |a: &PauliString, b: &PauliString| -> Result<bool> {
        match kind {
            CommutationKind::QubitWise => a.qubit_wise_commutes(b),
            CommutationKind::General => a.commutes(b),
        }
    };
    let mut groups: Vec<Vec<(PauliString, Complex64)>> = Vec::new();
    'strings: for (s, c) in order {
        for g in groups.iter_mut() {
            let mut fits = true;
            for (member, _) in g.iter() {
                if !compatible(s, member)? {
                    fits = false;
                    break;
                }
            }
            if fits {
                g.push((s.clone(), *c));
                continue 'strings;
            }
        }
        groups.push(vec![(s.clone(), *c)]);
    }
    groups
        .into_iter()
        .map(|g| PauliSum::from_terms(h.n_qubits(), g))
        .collect()
}
