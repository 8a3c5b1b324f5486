//! Exact positive spectra of the zero-trace problem on the unit square and
//! the unit cube, from separation of variables.

use crate::scalar::binomial;

/// Number of independent positive eigenforms of δd on zero-trace ℓ-forms of
/// the unit d-cube with wave-number vector m, all sharing the eigenvalue
/// π²|m|². With z zero entries and n = d − z nonzero ones, the coexact part
/// has dimension binom(n − 1, ℓ − z).
pub fn mode_multiplicity(m: &[usize], l: usize) -> usize {
    let z = m.iter().filter(|&&v| v == 0).count();
    let n = m.len() - z;
    if n == 0 || l < z || l - z > n - 1 {
        return 0;
    }
    binomial(n - 1, l - z) as usize
}

/// The lowest `count` positive eigenvalues with multiplicity, ascending.
pub fn reference_eigenvalues(dim: usize, l: usize, count: usize) -> Vec<f64> {
    if count == 0 || l >= dim {
        return Vec::new();
    }
    // Grow the wave-number box until the list is certainly complete: every
    // eigenvalue ≤ π²·K² comes from vectors with entries ≤ K.
    let mut k = 2usize;
    loop {
        let mut sums: Vec<usize> = Vec::new();
        let mut m = vec![0usize; dim];
        loop {
            let mult = mode_multiplicity(&m, l);
            let s: usize = m.iter().map(|v| v * v).sum();
            sums.extend(std::iter::repeat_n(s, mult));
            let mut axis = 0;
            while axis < dim {
                m[axis] += 1;
                if m[axis] <= k {
                    break;
                }
                m[axis] = 0;
                axis += 1;
            }
            if axis == dim {
                break;
            }
        }
        sums.sort_unstable();
        if sums.len() >= count && sums[count - 1] <= k * k {
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            return sums[..count].iter().map(|&s| pi2 * s as f64).collect();
        }
        k *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multiplicity by brute force: ℓ-form components I carry cosines along
    /// I and sines elsewhere, so sin factors need nonzero wave numbers. The
    /// frequency-m complex is exact, which gives the coexact count as an
    /// alternating sum of component counts.
    fn brute(m: &[usize], l: usize) -> usize {
        let d = m.len();
        if m.iter().all(|&v| v == 0) {
            return 0;
        }
        let count = |k: usize| -> i64 {
            (0u32..(1 << d))
                .filter(|mask| mask.count_ones() as usize == k)
                .filter(|mask| (0..d).all(|i| (mask >> i) & 1 == 1 || m[i] > 0))
                .count() as i64
        };
        let total: i64 = (0..=l).map(|j| if (l - j) % 2 == 0 { count(j) } else { -count(j) }).sum();
        total as usize
    }

    #[test]
    fn multiplicities_match_enumeration() {
        for d in 1..=3 {
            for l in 0..d {
                let mut m = vec![0usize; d];
                loop {
                    assert_eq!(mode_multiplicity(&m, l), brute(&m, l), "m={m:?} l={l}");
                    let mut axis = 0;
                    while axis < d {
                        m[axis] += 1;
                        if m[axis] <= 3 {
                            break;
                        }
                        m[axis] = 0;
                        axis += 1;
                    }
                    if axis == d {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn classical_lists() {
        let pi2 = std::f64::consts::PI.powi(2);
        let scaled = |v: Vec<f64>| v.iter().map(|x| (x / pi2).round() as usize).collect::<Vec<_>>();
        assert_eq!(scaled(reference_eigenvalues(2, 0, 4)), vec![2, 5, 5, 8]);
        assert_eq!(scaled(reference_eigenvalues(2, 1, 6)), vec![1, 1, 2, 4, 4, 5]);
        assert_eq!(scaled(reference_eigenvalues(3, 1, 9)), vec![2, 2, 2, 3, 3, 5, 5, 5, 5]);
        assert_eq!(scaled(reference_eigenvalues(3, 2, 4)), vec![1, 1, 1, 2]);
        assert!(reference_eigenvalues(2, 2, 3).is_empty());
    }
}
