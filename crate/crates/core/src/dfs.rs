//! The decoherence-free subspace `V = span{|4,4⟩, |a₁⟩, |a₂⟩, |a₃⟩}`.
//!
//! Exact decoherence freedom holds only as `R → 0`; at finite distance the
//! antisymmetric states leak at `2Γ_a^i`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::basis::{antisym_ket, ground_ket, outer, Ket, Operator, DIM};
use crate::couplings::{CouplingSet, Geometry};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_dissipator, unvectorize, vectorize, Superoperator, SUPER_DIM};
use crate::scalar::{lit, Real};
use crate::spectral::{psi_state, Symmetry};

/// Orthonormal set of kets spanning a subspace of the two-atom space.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<T: Real> {
    vectors: Vec<Ket<T>>,
}

impl<T: Real> SubspaceBasis<T> {
    /// Checks orthonormality to `1e-10`.
    pub fn new(vectors: Vec<Ket<T>>) -> Result<Self> {
        let tol: T = lit(1e-10);
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let ip = a.dotc(b);
                let expect = if i == j { T::one() } else { T::zero() };
                if (ip.re - expect).abs() > tol || ip.im.abs() > tol {
                    return Err(Error::Invalid(format!("basis vectors {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(Self { vectors })
    }

    /// `{|4,4⟩, |a₁⟩, |a₂⟩, |a₃⟩}`.
    pub fn dfs() -> Self {
        let mut v = vec![ground_ket()];
        v.extend((1..=3).map(antisym_ket));
        Self { vectors: v }
    }

    pub fn vectors(&self) -> &[Ket<T>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn projector(&self) -> Operator<T> {
        self.vectors.iter().fold(Operator::zeros(), |p, v| p + outer(v, v))
    }

    /// Orthonormal basis of `End(V)` in vectorized form, as columns.
    pub fn operator_space(&self) -> DMatrix<Complex<T>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(SUPER_DIM, n * n);
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                m.set_column(i * n + j, &vectorize(&outer(a, b)));
            }
        }
        m
    }
}

/// Kernel of a superoperator.
#[derive(Debug, Clone)]
pub struct NullSpace<T: Real> {
    pub dimension: usize,
    /// Orthonormal (Hilbert-Schmidt) kernel elements.
    pub basis: Vec<Operator<T>>,
    /// All singular values, ascending.
    pub singular_values: Vec<T>,
    /// Absolute threshold used.
    pub threshold: T,
    /// Set when the first retained singular value is within `10×threshold`.
    pub ill_conditioned: bool,
}

/// Right singular vectors of `l`, paired with singular values, ascending.
fn right_singular_pairs<T: Real>(l: &Superoperator<T>) -> Vec<(T, DVector<Complex<T>>)> {
    let svd = l.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut pairs: Vec<(T, DVector<Complex<T>>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, v_t.row(k).adjoint()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs
}

/// Kernel of `diss` from its SVD; `rel_tol` is relative to the largest singular value.
pub fn dissipator_null_space<T: Real>(diss: &Superoperator<T>, rel_tol: T) -> NullSpace<T> {
    let pairs = right_singular_pairs(diss);
    let smax = pairs.last().map(|p| p.0).unwrap_or_else(T::zero);
    let threshold = if smax > T::zero() { rel_tol * smax } else { rel_tol };
    let dimension = pairs.iter().take_while(|p| p.0 < threshold).count();
    let ten: T = lit(10.0);
    let ill_conditioned = pairs.get(dimension).is_some_and(|p| p.0 < ten * threshold)
        || (dimension > 0 && pairs[dimension - 1].0 * ten > threshold);
    let basis = pairs[..dimension].iter().map(|(_, v)| unvectorize(v)).collect();
    NullSpace {
        dimension,
        basis,
        singular_values: pairs.iter().map(|p| p.0).collect(),
        threshold,
        ill_conditioned,
    }
}

/// Default relative tolerance for [`dissipator_null_space`].
pub fn default_null_tolerance<T: Real>() -> T {
    lit(1e-10)
}

/// The `k` slowest right singular vectors of `l`, as columns.
pub fn slowest_subspace<T: Real>(l: &Superoperator<T>, k: usize) -> DMatrix<Complex<T>> {
    let pairs = right_singular_pairs(l);
    let mut m = DMatrix::zeros(SUPER_DIM, k);
    for (c, (_, v)) in pairs.iter().take(k).enumerate() {
        m.set_column(c, v);
    }
    m
}

/// Principal angles (radians, ascending) between the column spans of two
/// matrices with orthonormal columns.
pub fn principal_angles<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> Vec<T> {
    let m = a.adjoint() * b;
    let svd = m.svd(false, false);
    let mut angles: Vec<T> = svd
        .singular_values
        .iter()
        .map(|&c| c.min(T::one()).max(-T::one()).acos())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    angles
}

/// `‖(I − P) H P‖₂`; zero exactly when the subspace is invariant under `H`.
pub fn invariance_defect<T: Real>(h: &Operator<T>, basis: &SubspaceBasis<T>) -> T {
    let p = basis.projector();
    let q = Operator::<T>::identity() - p;
    let m = q * h * p;
    m.singular_values().iter().copied().fold(T::zero(), |a, b| a.max(b))
}

/// `−⟨⟨P|L|P⟩⟩` for `P = |ψ⟩⟨ψ|`: the initial population decay rate of `ψ`.
pub fn projected_decay_rate<T: Real>(diss: &Superoperator<T>, psi: &Ket<T>) -> T {
    let p = vectorize(&outer(psi, psi));
    let lp = diss * &p;
    -p.dotc(&lp).re / p.norm_squared()
}

/// Projected decay rates `2Γ^i` of the three degenerate eigenstates of one block.
pub fn projected_rates<T: Real>(cs: &CouplingSet<T>, geom: &Geometry<T>, sym: Symmetry) -> [T; 3] {
    let d = build_dissipator(cs);
    std::array::from_fn(|i| projected_decay_rate(&d, &psi_state(sym, i + 1, geom)))
}

/// Leakage rates `2Γ_a^i` of the antisymmetric eigenstates out of `V`.
pub fn dfs_leakage_rate<T: Real>(cs: &CouplingSet<T>, geom: &Geometry<T>) -> [T; 3] {
    projected_rates(cs, geom, Symmetry::Antisymmetric)
}

/// Counterpart of [`dfs_leakage_rate`] for the symmetric states (`2Γ_s^i`).
pub fn symmetric_decay_rate<T: Real>(cs: &CouplingSet<T>, geom: &Geometry<T>) -> [T; 3] {
    projected_rates(cs, geom, Symmetry::Symmetric)
}

/// Hilbert-Schmidt orthonormality check of an operator list, used in tests and diagnostics.
pub fn gram_defect<T: Real>(ops: &[Operator<T>]) -> T {
    let mut worst = T::zero();
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate() {
            let ip = (a.adjoint() * b).trace();
            let expect = if i == j { T::one() } else { T::zero() };
            worst = worst.max((ip - Complex::new(expect, T::zero())).norm_sqr().sqrt());
        }
    }
    worst
}

const _: () = assert!(DIM * DIM == SUPER_DIM);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::projector;
    use crate::couplings::closed_form_couplings;
    use crate::hamiltonians::{apply, build_h_a, build_h_omega};
    use std::f64::consts::PI;

    #[test]
    fn finite_distance_kernel_is_ground_state() {
        let g = Geometry::new(2.0 * PI * 0.1, 1.0, 0.5).unwrap();
        let d = build_dissipator(&closed_form_couplings(&g).unwrap());
        let ns = dissipator_null_space(&d, 1e-10);
        assert_eq!(ns.dimension, 1);
        assert!(!ns.ill_conditioned);
        let k = ns.basis[0];
        let g44 = projector(&ground_ket::<f64>());
        assert!((k.trace().norm() - 1.0).abs() < 1e-10);
        let ratio = k[(15, 15)];
        assert!((k - g44 * ratio).norm() < 1e-10);
    }

    #[test]
    fn zero_distance_kernel_is_end_v() {
        let d = build_dissipator(&CouplingSet::<f64>::zero_distance_limit());
        let ns = dissipator_null_space(&d, 1e-10);
        assert_eq!(ns.dimension, 16);
        let v = SubspaceBasis::dfs();
        for op in &ns.basis {
            let p = v.projector();
            assert!((p * op * p - op).norm() < 1e-10);
        }
        assert!(gram_defect(&ns.basis) < 1e-10);
    }

    #[test]
    fn zero_map_kernel_is_everything() {
        let d = Superoperator::<f64>::zeros(SUPER_DIM, SUPER_DIM);
        assert_eq!(dissipator_null_space(&d, 1e-10).dimension, SUPER_DIM);
    }

    #[test]
    fn dfs_is_invariant() {
        let g = Geometry::new(0.7, 2.1, 3.3).unwrap();
        let cs = closed_form_couplings(&g).unwrap();
        let h = build_h_a(1.7) + build_h_omega(&cs);
        assert!(invariance_defect(&h, &SubspaceBasis::dfs()) < 1e-12);
        let mut r = Operator::<f64>::zeros();
        r[(15, 0)] = Complex::new(1.0, 0.0);
        r[(0, 15)] = Complex::new(1.0, 0.0);
        assert!(invariance_defect(&r, &SubspaceBasis::dfs()) > 0.5);
    }

    #[test]
    fn leakage_matches_closed_form_rates() {
        let g = Geometry::new(2.0 * PI * 0.1, 0.4, 1.0).unwrap();
        let cs = closed_form_couplings(&g).unwrap();
        let a = dfs_leakage_rate(&cs, &g);
        let s = symmetric_decay_rate(&cs, &g);
        for i in 0..3 {
            assert!((a[i] - 2.0 * cs.decay.antisym[i]).abs() < 1e-10);
            assert!((s[i] - 2.0 * cs.decay.sym[i]).abs() < 1e-10);
            assert!(a[i] < 0.2);
        }
    }

    #[test]
    fn principal_angles_of_identical_spans_vanish() {
        let v = SubspaceBasis::<f64>::dfs().operator_space();
        let angles = principal_angles(&v, &v);
        assert_eq!(angles.len(), 16);
        assert!(angles.iter().all(|a| a.abs() < 1e-7));
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let k = ground_ket::<f64>();
        assert!(SubspaceBasis::new(vec![k, k]).is_err());
        assert!(SubspaceBasis::new(vec![k * Complex::new(2.0, 0.0)]).is_err());
    }

    #[test]
    fn projected_rate_is_population_loss() {
        let g = Geometry::new(1.1, 1.0, 0.0).unwrap();
        let cs = closed_form_couplings(&g).unwrap();
        let d = build_dissipator(&cs);
        let psi = antisym_ket::<f64>(2);
        let out = apply(&d, &projector(&psi));
        let rate = projected_decay_rate(&d, &psi);
        assert!((psi.dotc(&(out * psi)).re + rate).abs() < 1e-12);
    }
}
