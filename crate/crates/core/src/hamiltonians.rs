//! Two-atom Hamiltonians and the Lindblad generator.
//!
//! Hamiltonians are 16×16 matrices in the [`ProductBasis`](crate::basis::ProductBasis)
//! with `ħ = 1` and energies in units of `γ`. The common optical frequency `ω₀`
//! is removed everywhere, so `H_A` only carries the Zeeman ladder.
//!
//! Superoperators act on `vec(ρ)` with column-major stacking
//! (`vec(ρ)[16·c + r] = ρ[r, c]`), so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)` and the
//! coherent part reads `−i(I ⊗ H − Hᵀ ⊗ I)`.

use nalgebra::{Complex, DMatrix, DVector, SMatrix};
use serde::{Deserialize, Serialize};

use crate::basis::{lowering, raising, Atom, Operator, ProductBasis, DIM, GROUND_LEVEL};
use crate::couplings::{CouplingSet, Geometry};
use crate::scalar::{cis, cplx, imag_unit, lit, real, Real};

/// Dimension of the space of two-atom operators.
pub const SUPER_DIM: usize = DIM * DIM;

/// Dense 256×256 matrix on column-stacked density operators.
pub type Superoperator<T> = DMatrix<Complex<T>>;

/// 6×6 rate matrix over the jump operators `S_i^{−(μ)}`.
pub type KossakowskiMatrix<T> = SMatrix<Complex<T>, 6, 6>;

/// Relative laser phase `e^{i k_L·r_μ}` between the two atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum LaserPhase<T> {
    /// Both atoms see the same field (no gradient).
    #[default]
    Equal,
    /// Phase from propagation along `+z`: atom 2 acquires `η cos θ`.
    Propagation,
    /// Explicit phase of atom 2 relative to atom 1.
    Explicit(T),
}

/// Continuous-wave laser drive in the frame rotating at the laser frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig<T> {
    /// `Ω_x(r₁)` in units of `γ`.
    pub omega_x: Complex<T>,
    /// `Ω_y(r₁)` in units of `γ`.
    pub omega_y: Complex<T>,
    /// Detuning `Δ₂ = ω_L − ω₂` from the `m_j = 0` sublevel.
    pub delta2: T,
    /// Zeeman splitting `δ` of the excited triplet (signed).
    pub zeeman: T,
    #[serde(default)]
    pub phase: LaserPhase<T>,
}

impl<T: Real> DriveConfig<T> {
    pub fn x_polarized(rabi: T) -> Self {
        Self { omega_x: real(rabi), ..Self::undriven() }
    }

    pub fn y_polarized(rabi: T) -> Self {
        Self { omega_y: real(rabi), ..Self::undriven() }
    }

    pub fn undriven() -> Self {
        let zero = real(T::zero());
        Self {
            omega_x: zero,
            omega_y: zero,
            delta2: T::zero(),
            zeeman: T::zero(),
            phase: LaserPhase::Equal,
        }
    }

    /// Detunings `(Δ₁, Δ₂, Δ₃)` with `Δ₁ = Δ₂ + δ`, `Δ₃ = Δ₂ − δ`.
    pub fn detunings(&self) -> [T; 3] {
        [self.delta2 + self.zeeman, self.delta2, self.delta2 - self.zeeman]
    }

    fn atom_phase(&self, atom: Atom, geom: &Geometry<T>) -> Complex<T> {
        let phase = match (atom, self.phase) {
            (Atom::First, _) | (_, LaserPhase::Equal) => T::zero(),
            (Atom::Second, LaserPhase::Propagation) => geom.eta * geom.theta.cos(),
            (Atom::Second, LaserPhase::Explicit(p)) => p,
        };
        cis(phase)
    }
}

/// Diagonal operator `Σ_μ Σ_i e_i S_i^{+(μ)} S_i^{−(μ)}` from single-atom level energies.
fn diagonal_from_levels<T: Real>(level_energy: [T; 4]) -> Operator<T> {
    let mut h = Operator::zeros();
    for k in 0..DIM {
        let (i, j) = ProductBasis::levels(k);
        h[(k, k)] = real(level_energy[i - 1] + level_energy[j - 1]);
    }
    h
}

/// Free Hamiltonian with `ω₀` removed: `ω₁ = −δ`, `ω₂ = 0`, `ω₃ = +δ`.
pub fn build_h_a<T: Real>(zeeman: T) -> Operator<T> {
    diagonal_from_levels([-zeeman, T::zero(), zeeman, T::zero()])
}

/// Vacuum-mediated exchange `H_Ω = −Σ_ij [Ω_ij S_i^{+(2)} S_j^{−(1)} + h.c.]`.
pub fn build_h_omega<T: Real>(cs: &CouplingSet<T>) -> Operator<T> {
    let mut h = Operator::zeros();
    for i in 1..=3 {
        for j in 1..=3 {
            // S_i^{+(2)} S_j^{−(1)} = |4,i⟩⟨j,4|
            let to = ProductBasis::index(GROUND_LEVEL, i);
            let from = ProductBasis::index(j, GROUND_LEVEL);
            let w = cs.omega[(i - 1, j - 1)];
            h[(to, from)] -= w;
            h[(from, to)] -= w.conj();
        }
    }
    h
}

/// Rotating-frame `H̃_A + H̃_L` for a transverse laser propagating along `+z`.
///
/// The field couples `S₁⁺` through `Ω_x + iΩ_y` and `S₃⁺` through `−Ω_x + iΩ_y`;
/// the `m_j = 0` transition is not driven.
pub fn build_h_laser<T: Real>(drive: &DriveConfig<T>, geom: &Geometry<T>) -> Operator<T> {
    let [d1, d2, d3] = drive.detunings();
    let mut h = diagonal_from_levels([-d1, -d2, -d3, T::zero()]);
    let i = imag_unit::<T>();
    for atom in Atom::BOTH {
        let phase = drive.atom_phase(atom, geom);
        let ox = drive.omega_x * phase;
        let oy = drive.omega_y * phase;
        let c1 = ox + i * oy;
        let c3 = -ox + i * oy;
        let drive_op = raising::<T>(1, atom) * c1 + raising::<T>(3, atom) * c3;
        h -= drive_op + drive_op.adjoint();
    }
    h
}

/// `V_rf(t) = 2δ(t) Σ_μ (S₃⁺S₃⁻ − S₁⁺S₁⁻)` with `δ(t) = δ₀ cos(ω_rf t + φ_rf)`.
///
/// With `ω₀` removed the RF-dressed free Hamiltonian is `V_rf` alone.
pub fn build_h_rf<T: Real>(delta0: T, omega_rf: T, phi_rf: T, t: T) -> Operator<T> {
    build_h_a(rf_zeeman(delta0, omega_rf, phi_rf, t))
}

/// Instantaneous effective Zeeman splitting `2δ(t)` of the RF field.
pub fn rf_zeeman<T: Real>(delta0: T, omega_rf: T, phi_rf: T, t: T) -> T {
    lit::<T>(2.0) * delta0 * (omega_rf * t + phi_rf).cos()
}

/// Jump operators ordered `(atom 1; i = 1,2,3)`, then `(atom 2; i = 1,2,3)`.
fn jump_operators<T: Real>() -> [Operator<T>; 6] {
    let op = |k: usize| {
        let atom = if k < 3 { Atom::First } else { Atom::Second };
        lowering::<T>(k % 3 + 1, atom)
    };
    std::array::from_fn(op)
}

/// `K = [[γ·I, Γ], [Γ, γ·I]]` in the jump-operator ordering of the dissipator.
pub fn kossakowski_matrix<T: Real>(cs: &CouplingSet<T>) -> KossakowskiMatrix<T> {
    let mut k = KossakowskiMatrix::identity();
    for i in 0..3 {
        for j in 0..3 {
            let g = cs.gamma_cross[(i, j)];
            // K_{(2,i),(1,j)} = Γ_ij, K_{(1,j),(2,i)} = Γ_ij*
            k[(3 + i, j)] = g;
            k[(j, 3 + i)] = g.conj();
        }
    }
    k
}

/// `D = Σ_kl K_kl A_k† A_l`: the anti-Hermitian part of the effective
/// Hamiltonian is `−iD`, so a state `ψ` loses population at `2⟨ψ|D|ψ⟩`.
pub fn decay_operator<T: Real>(cs: &CouplingSet<T>) -> Operator<T> {
    let k = kossakowski_matrix(cs);
    let jumps = jump_operators::<T>();
    let mut d = Operator::zeros();
    for (kk, ak) in jumps.iter().enumerate() {
        for (ll, al) in jumps.iter().enumerate() {
            d += ak.adjoint() * al * k[(kk, ll)];
        }
    }
    d
}

/// Adds `coeff · (Bᵀ ⊗ A)`, i.e. the map `ρ ↦ coeff · AρB`.
fn add_sandwich<T: Real>(
    l: &mut Superoperator<T>,
    coeff: Complex<T>,
    a: &Operator<T>,
    b: &Operator<T>,
) {
    let nz_a: Vec<(usize, usize, Complex<T>)> = nonzeros(a);
    let nz_b: Vec<(usize, usize, Complex<T>)> = nonzeros(b);
    for &(bc, bc2, bv) in &nz_b {
        // (Bᵀ)[c', c] = B[c, c']: output column c' = bc2, input column c = bc.
        let bv = bv * coeff;
        for &(ar, ac, av) in &nz_a {
            l[(bc2 * DIM + ar, bc * DIM + ac)] += av * bv;
        }
    }
}

fn nonzeros<T: Real>(m: &Operator<T>) -> Vec<(usize, usize, Complex<T>)> {
    let mut out = Vec::new();
    for c in 0..DIM {
        for r in 0..DIM {
            let v = m[(r, c)];
            if v.re != T::zero() || v.im != T::zero() {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// Lindblad dissipator `Σ_kl K_kl (2 A_l ρ A_k† − A_k†A_l ρ − ρ A_k†A_l)`.
///
/// Single-atom terms decay each excited sublevel at `2γ`; the off-diagonal
/// blocks carry the collective rates `Γ_ii` and the cross rates `Γ_ij`.
pub fn build_dissipator<T: Real>(cs: &CouplingSet<T>) -> Superoperator<T> {
    let k = kossakowski_matrix(cs);
    let jumps = jump_operators::<T>();
    let ident = Operator::<T>::identity();
    let two: Complex<T> = real(lit(2.0));
    let mut l = Superoperator::zeros(SUPER_DIM, SUPER_DIM);
    for (kk, ak) in jumps.iter().enumerate() {
        let ak_dag = ak.adjoint();
        for (ll, al) in jumps.iter().enumerate() {
            let rate = k[(kk, ll)];
            if rate.re == T::zero() && rate.im == T::zero() {
                continue;
            }
            let m = ak_dag * al;
            add_sandwich(&mut l, rate * two, al, &ak_dag);
            add_sandwich(&mut l, -rate, &m, &ident);
            add_sandwich(&mut l, -rate, &ident, &m);
        }
    }
    l
}

/// `−i(I ⊗ H − Hᵀ ⊗ I)`.
pub fn commutator_superoperator<T: Real>(h: &Operator<T>) -> Superoperator<T> {
    let mut l = Superoperator::zeros(SUPER_DIM, SUPER_DIM);
    let ident = Operator::<T>::identity();
    let i = imag_unit::<T>();
    add_sandwich(&mut l, -i, h, &ident);
    add_sandwich(&mut l, i, &ident, h);
    l
}

/// Full generator `L = −i(I ⊗ H − Hᵀ ⊗ I) + L_γ`.
pub fn build_liouvillian<T: Real>(h: &Operator<T>, diss: &Superoperator<T>) -> Superoperator<T> {
    commutator_superoperator(h) + diss
}

/// Column-major `vec(ρ)`.
pub fn vectorize<T: Real>(rho: &Operator<T>) -> DVector<Complex<T>> {
    DVector::from_column_slice(rho.as_slice())
}

pub fn unvectorize<T: Real>(v: &DVector<Complex<T>>) -> Operator<T> {
    Operator::from_column_slice(v.as_slice())
}

/// Applies a superoperator to an operator.
pub fn apply<T: Real>(l: &Superoperator<T>, rho: &Operator<T>) -> Operator<T> {
    unvectorize(&(l * vectorize(rho)))
}

/// Row vector `t` with `t · vec(ρ) = Tr ρ`.
pub fn trace_functional<T: Real>() -> DVector<Complex<T>> {
    let mut t = DVector::zeros(SUPER_DIM);
    for r in 0..DIM {
        t[r * DIM + r] = cplx(T::one(), T::zero());
    }
    t
}

/// `‖Tr ∘ L‖₂`; zero for a trace-preserving generator.
pub fn trace_defect<T: Real>(l: &Superoperator<T>) -> T {
    (l.transpose() * trace_functional::<T>()).norm()
}

/// `‖H − H†‖` (Frobenius).
pub fn hermiticity_defect<T: Real>(h: &Operator<T>) -> T {
    (h - h.adjoint()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{antisym_ket, excitation_number, ground_ket, product_ket, projector, sym_ket};
    use crate::couplings::closed_form_couplings;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn geom() -> Geometry<f64> {
        Geometry::new(2.0 * PI * 0.13, 1.1, 0.7).unwrap()
    }

    #[test]
    fn free_hamiltonian_zeeman_ladder() {
        let h = build_h_a(1.0_f64);
        assert_eq!(h[(ProductBasis::index(1, 4), ProductBasis::index(1, 4))].re, -1.0);
        assert_eq!(h[(ProductBasis::index(3, 4), ProductBasis::index(3, 4))].re, 1.0);
        assert_eq!(h[(ProductBasis::index(1, 3), ProductBasis::index(1, 3))].re, 0.0);
        let h0 = build_h_a(0.0_f64);
        assert_eq!(h0, Operator::zeros());
    }

    #[test]
    fn exchange_hamiltonian_structure() {
        let cs = closed_form_couplings(&geom()).unwrap();
        let h = build_h_omega(&cs);
        assert!(hermiticity_defect(&h) < 1e-12);
        for i in 1..=3 {
            for j in 1..=3 {
                let a_i = antisym_ket::<f64>(i);
                let a_j = antisym_ket::<f64>(j);
                let s_i = sym_ket::<f64>(i);
                let s_j = sym_ket::<f64>(j);
                assert!((a_i.dotc(&(h * s_j))).norm() < 1e-14);
                let aa = a_i.dotc(&(h * a_j));
                assert!((aa - cs.omega[(i - 1, j - 1)]).norm() < 1e-12);
                let ss = s_i.dotc(&(h * s_j));
                assert!((ss + cs.omega[(i - 1, j - 1)]).norm() < 1e-12);
            }
        }
        // ground and doubly excited states are untouched
        assert!((h * ground_ket::<f64>()).norm() < 1e-15);
        assert!((h * product_ket::<f64>(1, 3)).norm() < 1e-15);
    }

    #[test]
    fn hamiltonians_conserve_excitation_number() {
        let cs = closed_form_couplings(&geom()).unwrap();
        let h = build_h_a(0.7) + build_h_omega(&cs);
        let n = excitation_number::<f64>();
        assert!((h * n - n * h).norm() < 1e-12);
    }

    #[test]
    fn laser_polarization_selection() {
        let g = Geometry::along_x(2.0 * PI * 0.1);
        let cs = closed_form_couplings(&g).unwrap();
        let _ = cs;
        let s = 1.0 / 2.0_f64.sqrt();
        let psi_plus = (antisym_ket::<f64>(1) + antisym_ket::<f64>(3)) * Complex::new(s, 0.0);
        let psi_minus = (antisym_ket::<f64>(1) - antisym_ket::<f64>(3)) * Complex::new(s, 0.0);
        let hy = build_h_laser(&DriveConfig::y_polarized(5.0), &g);
        let hx = build_h_laser(&DriveConfig::x_polarized(5.0), &g);
        for k in 0..DIM {
            if ProductBasis::excitations(k) == 2 {
                assert!((hy * psi_plus)[k].norm() < 1e-14);
                assert!((hx * psi_minus)[k].norm() < 1e-14);
            }
        }
        let idx = ProductBasis::index(2, 4);
        assert_eq!(hy[(idx, 15)].norm(), 0.0);
        assert_eq!(hx[(idx, 15)].norm(), 0.0);
        assert!(hermiticity_defect(&hy) < 1e-14);
    }

    #[test]
    fn undriven_laser_frame_commutes_with_exchange() {
        let cs = closed_form_couplings(&geom()).unwrap();
        let hl = build_h_laser(&DriveConfig::<f64>::undriven(), &geom());
        let ho = build_h_omega(&cs);
        assert!((hl * ho - ho * hl).norm() < 1e-12);
    }

    #[test]
    fn rf_hamiltonian_entries() {
        let (d0, w, ph) = (0.8, 3.0, 0.4);
        let t_node = (FRAC_PI_2 - ph) / w;
        assert!(build_h_rf(d0, w, ph, t_node).norm() < 1e-14);
        let t = 0.3;
        let h = build_h_rf(d0, w, ph, t);
        let dt = d0 * (w * t + ph).cos();
        let i34 = ProductBasis::index(3, 4);
        let i14 = ProductBasis::index(1, 4);
        assert!((h[(i34, i34)].re - 2.0 * dt).abs() < 1e-14);
        assert!((h[(i14, i14)].re + 2.0 * dt).abs() < 1e-14);
        assert_eq!(h[(ProductBasis::index(2, 4), ProductBasis::index(2, 4))].re, 0.0);
        assert_eq!(h[(15, 15)].re, 0.0);
    }

    #[test]
    fn dissipator_preserves_trace_and_ground_state() {
        let cs = closed_form_couplings(&geom()).unwrap();
        let d = build_dissipator(&cs);
        assert!(trace_defect(&d) < 1e-12);
        let g = projector(&ground_ket::<f64>());
        assert!(apply(&d, &g).norm() < 1e-15);
    }

    #[test]
    fn single_atom_decay_rate_is_two_gamma() {
        let cs = CouplingSet::<f64> { gamma_cross: nalgebra::Matrix3::zeros(), ..closed_form_couplings(&geom()).unwrap() };
        let d = build_dissipator(&cs);
        let rho = projector(&product_ket::<f64>(1, 4));
        let out = apply(&d, &rho);
        assert!((out[(4 * 0 + 3, 3)].re + 2.0).abs() < 1e-14);
        assert!((out[(15, 15)].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn vectorization_convention() {
        let mut rho = Operator::<f64>::zeros();
        rho[(2, 5)] = Complex::new(1.0, 0.0);
        let v = vectorize(&rho);
        assert_eq!(v[5 * DIM + 2].re, 1.0);
        assert_eq!(unvectorize(&v), rho);
    }
}
