//! Reduced states and the pure-state concurrence `C = √(2[1 − Tr ρ₁²])`.

use nalgebra::Complex;

use crate::basis::{outer, Atom, AtomOperator, Ket, Operator, LEVELS};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Largest concurrence of two four-level systems, `√(3/2)`.
pub fn max_concurrence<T: Real>() -> T {
    lit::<T>(1.5).sqrt()
}

/// Traces out the other atom.
pub fn partial_trace<T: Real>(rho: &Operator<T>, keep: Atom) -> AtomOperator<T> {
    let mut r = AtomOperator::zeros();
    for a in 0..LEVELS {
        for b in 0..LEVELS {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..LEVELS {
                acc += match keep {
                    Atom::First => rho[(LEVELS * a + k, LEVELS * b + k)],
                    Atom::Second => rho[(LEVELS * k + a, LEVELS * k + b)],
                };
            }
            r[(a, b)] = acc;
        }
    }
    r
}

/// Concurrence of a normalized pure state.
pub fn concurrence<T: Real>(psi: &Ket<T>) -> Result<T> {
    concurrence_with(psi, Atom::First)
}

/// Concurrence computed from the reduced state of `keep`.
pub fn concurrence_with<T: Real>(psi: &Ket<T>, keep: Atom) -> Result<T> {
    let n = psi.norm();
    if (n - T::one()).abs() > lit(1e-10) {
        return Err(Error::NotNormalized { norm: to_f64(n) });
    }
    let r = partial_trace(&outer(psi, psi), keep);
    let purity = (r * r).trace().re;
    Ok((lit::<T>(2.0) * (T::one() - purity)).max(T::zero()).sqrt())
}

/// `Σ_i |i,i⟩ / 2`, which attains [`max_concurrence`].
pub fn maximally_entangled<T: Real>() -> Ket<T> {
    let half: T = lit(0.5);
    let mut k = Ket::zeros();
    for i in 1..=LEVELS {
        k[crate::basis::ProductBasis::index(i, i)] = Complex::new(half, T::zero());
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{antisym_ket, product_ket};

    #[test]
    fn product_state_reduces_to_pure_state() {
        let r = partial_trace(&outer(&product_ket::<f64>(1, 2), &product_ket(1, 2)), Atom::First);
        let mut e = AtomOperator::<f64>::zeros();
        e[(0, 0)] = Complex::new(1.0, 0.0);
        assert_eq!(r, e);
        let r2 = partial_trace(&outer(&product_ket::<f64>(1, 2), &product_ket(1, 2)), Atom::Second);
        assert_eq!(r2[(1, 1)].re, 1.0);
        assert_eq!(concurrence(&product_ket::<f64>(3, 4)).unwrap(), 0.0);
    }

    #[test]
    fn antisymmetric_state_reduces_to_even_mixture() {
        let a2 = antisym_ket::<f64>(2);
        let r = partial_trace(&outer(&a2, &a2), Atom::First);
        for (k, expect) in [0.0, 0.5, 0.0, 0.5].iter().enumerate() {
            assert!((r[(k, k)].re - expect).abs() < 1e-15);
        }
        assert!((concurrence(&a2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximal_state_and_normalization() {
        let m = maximally_entangled::<f64>();
        assert!((concurrence(&m).unwrap() - max_concurrence::<f64>()).abs() < 1e-12);
        assert!(matches!(concurrence(&(m * Complex::new(2.0, 0.0))), Err(Error::NotNormalized { .. })));
    }
}
