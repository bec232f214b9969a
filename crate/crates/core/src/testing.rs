//! Helpers shared by unit tests across modules.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::fermion::{FermionOperator, LadderOp, LadderTerm};

/// A small random operator with up to 3 terms of up to 3 factors each.
pub fn random_operator(rng: &mut ChaCha12Rng, n_modes: usize) -> FermionOperator {
    let n_terms = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        let n_factors = rng.gen_range(0..=3);
        let factors: Vec<LadderOp> = (0..n_factors)
            .map(|_| LadderOp {
                mode: rng.gen_range(0..n_modes),
                dagger: rng.gen_bool(0.5),
            })
            .collect();
        let coeff = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        terms.push(LadderTerm::new(coeff, factors));
    }
    FermionOperator::from_terms(n_modes, terms).unwrap()
}
