//! Product basis `|i, j⟩ = |i₁⟩ ⊗ |j₂⟩` of the two-atom Hilbert space.
//!
//! Levels are labelled `1..=4`: `1, 2, 3` are the `m_j = −1, 0, +1` sublevels
//! of the excited triplet and `4` is the ground state.

use nalgebra::{Complex, SMatrix, SVector};

use crate::scalar::{inv_sqrt2, lit, Real};

pub const LEVELS: usize = 4;
pub const DIM: usize = LEVELS * LEVELS;
pub const GROUND_LEVEL: usize = 4;
/// Position of `|4,4⟩`.
pub const GROUND_INDEX: usize = 15;

/// State vector on the 16-dimensional two-atom space.
pub type Ket<T> = SVector<Complex<T>, DIM>;
/// Dense operator on the two-atom space.
pub type Operator<T> = SMatrix<Complex<T>, DIM, DIM>;
/// Dense operator on one atom.
pub type AtomOperator<T> = SMatrix<Complex<T>, LEVELS, LEVELS>;

/// Which atom an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    First,
    Second,
}

impl Atom {
    pub const BOTH: [Atom; 2] = [Atom::First, Atom::Second];
}

/// Fixed ordering of the 16 product states.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProductBasis;

impl ProductBasis {
    /// `index(i, j) = 4(i − 1) + (j − 1)` for levels `i, j ∈ 1..=4`.
    pub const fn index(i: usize, j: usize) -> usize {
        assert!(i >= 1 && i <= LEVELS && j >= 1 && j <= LEVELS);
        LEVELS * (i - 1) + (j - 1)
    }

    /// Inverse of [`ProductBasis::index`].
    pub const fn levels(index: usize) -> (usize, usize) {
        (index / LEVELS + 1, index % LEVELS + 1)
    }

    pub fn label(index: usize) -> String {
        let (i, j) = Self::levels(index);
        format!("|{i},{j}>")
    }

    /// Number of excited atoms in a basis state.
    pub fn excitations(index: usize) -> usize {
        let (i, j) = Self::levels(index);
        usize::from(i != GROUND_LEVEL) + usize::from(j != GROUND_LEVEL)
    }
}

pub fn product_ket<T: Real>(i: usize, j: usize) -> Ket<T> {
    let mut k = Ket::zeros();
    k[ProductBasis::index(i, j)] = Complex::new(T::one(), T::zero());
    k
}

pub fn ground_ket<T: Real>() -> Ket<T> {
    product_ket(GROUND_LEVEL, GROUND_LEVEL)
}

/// `|a_i⟩ = (|i,4⟩ − |4,i⟩)/√2`.
pub fn antisym_ket<T: Real>(i: usize) -> Ket<T> {
    (product_ket::<T>(i, GROUND_LEVEL) - product_ket(GROUND_LEVEL, i)) * Complex::new(inv_sqrt2::<T>(), T::zero())
}

/// `|s_i⟩ = (|i,4⟩ + |4,i⟩)/√2`.
pub fn sym_ket<T: Real>(i: usize) -> Ket<T> {
    (product_ket::<T>(i, GROUND_LEVEL) + product_ket(GROUND_LEVEL, i)) * Complex::new(inv_sqrt2::<T>(), T::zero())
}

/// `|ψ⟩⟨φ|`.
pub fn outer<T: Real>(psi: &Ket<T>, phi: &Ket<T>) -> Operator<T> {
    psi * phi.adjoint()
}

pub fn projector<T: Real>(psi: &Ket<T>) -> Operator<T> {
    outer(psi, psi)
}

/// Lifts a single-atom operator to the two-atom space.
pub fn embed<T: Real>(atom: Atom, a: &AtomOperator<T>) -> Operator<T> {
    let one = Complex::new(T::one(), T::zero());
    Operator::from_fn(|r, c| {
        let (r1, r2) = (r / LEVELS, r % LEVELS);
        let (c1, c2) = (c / LEVELS, c % LEVELS);
        match atom {
            Atom::First if r2 == c2 => a[(r1, c1)] * one,
            Atom::Second if r1 == c1 => a[(r2, c2)] * one,
            _ => Complex::new(T::zero(), T::zero()),
        }
    })
}

/// `|i⟩⟨4|` on one atom.
pub fn atom_raising<T: Real>(level: usize) -> AtomOperator<T> {
    let mut a = AtomOperator::zeros();
    a[(level - 1, GROUND_LEVEL - 1)] = Complex::new(T::one(), T::zero());
    a
}

/// `S_i^{+(μ)} = |i_μ⟩⟨4_μ|`.
pub fn raising<T: Real>(level: usize, atom: Atom) -> Operator<T> {
    embed(atom, &atom_raising(level))
}

/// `S_i^{−(μ)} = |4_μ⟩⟨i_μ|`.
pub fn lowering<T: Real>(level: usize, atom: Atom) -> Operator<T> {
    raising::<T>(level, atom).adjoint()
}

/// Total number of excited atoms, `N = Σ_{i,μ} S_i^+ S_i^-`.
pub fn excitation_number<T: Real>() -> Operator<T> {
    Operator::from_fn(|r, c| {
        if r == c {
            Complex::new(lit(ProductBasis::excitations(r) as f64), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_bijective() {
        let mut seen = [false; DIM];
        for i in 1..=4 {
            for j in 1..=4 {
                let k = ProductBasis::index(i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(ProductBasis::levels(k), (i, j));
            }
        }
        assert_eq!(ProductBasis::index(4, 4), GROUND_INDEX);
    }

    #[test]
    fn raising_maps_ground_to_excited() {
        let s = raising::<f64>(2, Atom::Second);
        let out = s * ground_ket::<f64>();
        assert_eq!(out, product_ket(4, 2));
        let s = raising::<f64>(3, Atom::First);
        assert_eq!(s * product_ket::<f64>(4, 1), product_ket(3, 1));
        assert_eq!(s * product_ket::<f64>(1, 1), Ket::zeros());
    }

    #[test]
    fn collective_kets_are_orthonormal() {
        let kets: Vec<Ket<f64>> =
            (1..=3).map(antisym_ket).chain((1..=3).map(sym_ket)).collect();
        for (a, ka) in kets.iter().enumerate() {
            for (b, kb) in kets.iter().enumerate() {
                let ip = ka.dotc(kb);
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip.re - expect).abs() < 1e-15 && ip.im.abs() < 1e-15);
            }
        }
    }
}
