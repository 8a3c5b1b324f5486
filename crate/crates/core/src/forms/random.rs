use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FormIndex, Monomial, PolyForm};
use crate::scalar::Scalar;

/// A seeded form with small rational coefficients on a random subset of the
/// (index, monomial) pairs of total degree ≤ `degree`.
pub fn random_form<S: Scalar>(dim: usize, form_degree: usize, degree: usize, seed: u64) -> PolyForm<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PolyForm::zero(dim, form_degree);
    for index in FormIndex::all(dim, form_degree) {
        for mono in Monomial::all_up_to(dim, degree) {
            if rng.random_bool(0.4) {
                let den = rng.random_range(1..=5);
                let num = rng.random_range(-9..=9);
                if num != 0 {
                    out.add_term(index, mono, S::from_ratio(num, den));
                }
            }
        }
    }
    out
}
