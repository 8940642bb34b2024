//! Single-qubit control inside the antisymmetric subspace.
//!
//! The qubit is `{|ψ_a²⟩, |ψ_a³⟩}` for atoms aligned along `x`, with `|ψ_a²⟩`
//! at the north pole of the Bloch sphere. A static Zeeman splitting rotates
//! about an axis in the `x-z` plane; a resonant RF field gives arbitrary axes
//! in the `x-y` plane.

use std::sync::Arc;

use nalgebra::{Complex, Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::basis::{outer, Ket, Operator};
use crate::couplings::{energy_shifts, Geometry};
use crate::dynamics::{evolve, evolve_piecewise, output_grid, DensityMatrix, Generator, IntegratorOptions, Trajectory};
use crate::error::{domain, Result};
use crate::hamiltonians::{build_dissipator, build_h_a, build_h_omega, build_liouvillian, commutator_superoperator, rf_zeeman};
use crate::couplings::closed_form_couplings;
use crate::scalar::{cis, cplx, imag_unit, lit, real, Real};
use crate::spectral::{psi_state, Symmetry};

pub type BlochVector<T> = Vector3<T>;

/// Traceless 2×2 Hamiltonian on the qubit, in units of `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitHamiltonian<T: Real> {
    pub matrix: Matrix2<Complex<T>>,
}

impl<T: Real> QubitHamiltonian<T> {
    /// Removes the trace of `m`.
    pub fn from_matrix(m: Matrix2<Complex<T>>) -> Self {
        let half = m.trace() * real(lit::<T>(0.5));
        Self { matrix: m - Matrix2::identity() * half }
    }

    /// Pauli components `h` with `H = h·σ`.
    pub fn pauli(&self) -> Vector3<T> {
        let m = &self.matrix;
        let half: T = lit(0.5);
        Vector3::new(m[(0, 1)].re, -m[(0, 1)].im, (m[(0, 0)].re - m[(1, 1)].re) * half)
    }

    /// Rotation rate `Ω` with `H = Ω n̂·σ/2`.
    pub fn rate(&self) -> T {
        self.pauli().norm() * lit(2.0)
    }

    /// Unit rotation axis `n̂`; `+z` when `H = 0`.
    pub fn axis(&self) -> Vector3<T> {
        let p = self.pauli();
        let n = p.norm();
        if n == T::zero() {
            Vector3::z()
        } else {
            p / n
        }
    }

    /// `exp(−iHt)`.
    pub fn unitary(&self, t: T) -> Matrix2<Complex<T>> {
        let half_angle = self.rate() * t * lit(0.5);
        let n = self.axis();
        let (s, c) = half_angle.sin_cos();
        let i = imag_unit::<T>();
        let ns = Matrix2::new(
            real(n.z),
            cplx(n.x, -n.y),
            cplx(n.x, n.y),
            real(-n.z),
        );
        Matrix2::identity() * real(c) - ns * (i * real(s))
    }

    /// Rotates `b` about `n̂` by `Ωt`.
    pub fn rotate(&self, b: &BlochVector<T>, t: T) -> BlochVector<T> {
        let n = self.axis();
        let (s, c) = (self.rate() * t).sin_cos();
        b * c + n.cross(b) * s + n * (n.dot(b) * (T::one() - c))
    }
}

/// Bloch vector of a 2×2 density matrix.
pub fn bloch_of_qubit<T: Real>(q: &Matrix2<Complex<T>>) -> BlochVector<T> {
    let two: T = lit(2.0);
    Vector3::new(two * q[(0, 1)].re, -two * q[(0, 1)].im, q[(0, 0)].re - q[(1, 1)].re)
}

/// Qubit basis `[|ψ_a²⟩, |ψ_a³⟩]` for atoms along `x`.
pub fn qubit_basis<T: Real>() -> [Ket<T>; 2] {
    let g = Geometry::along_x(T::one());
    [psi_state(Symmetry::Antisymmetric, 2, &g), psi_state(Symmetry::Antisymmetric, 3, &g)]
}

/// `B_N = Tr[σ P̂ρP̂]` with `P̂` the projector onto the qubit subspace.
pub fn bloch_vector<T: Real>(rho: &Operator<T>) -> BlochVector<T> {
    let b = qubit_basis::<T>();
    let q = Matrix2::from_fn(|i, j| b[i].dotc(&(rho * b[j])));
    bloch_of_qubit(&q)
}

/// `[[−(Ω_N−Ω_F)/2, −δ], [−δ, (Ω_N−Ω_F)/2]]`.
pub fn static_qubit_hamiltonian<T: Real>(eta: T, delta: T) -> Result<QubitHamiltonian<T>> {
    let (f, n) = energy_shifts(eta)?;
    let half: T = lit(0.5);
    let d = (n - f) * half;
    Ok(QubitHamiltonian { matrix: Matrix2::new(real(-d), real(-delta), real(-delta), real(d)) })
}

/// Zeeman splitting that places `target` on the orbit of `+z`.
pub fn delta_for_target<T: Real>(target: &Vector3<T>, eta: T) -> Result<T> {
    if (target.norm() - T::one()).abs() > lit(1e-9) {
        return Err(domain("delta_for_target", format!("target has norm {}, expected 1", target.norm())));
    }
    if target.x.abs() < lit(1e-12) {
        return Err(domain("delta_for_target", "S_x = 0 requires an infinite splitting"));
    }
    let (f, n) = energy_shifts(eta)?;
    let two: T = lit(2.0);
    Ok((T::one() - target.z) / (two * target.x.abs()) * (f - n).abs() * target.x.signum())
}

/// Rotating-wave generator `[[Δ_rf/2, −δ₀e^{iφ}], [−δ₀e^{−iφ}, −Δ_rf/2]]`.
pub fn rf_qubit_hamiltonian<T: Real>(delta0: T, phi_rf: T, detuning_rf: T) -> QubitHamiltonian<T> {
    let half: T = lit(0.5);
    let off = cis(phi_rf) * real(-delta0);
    QubitHamiltonian { matrix: Matrix2::new(real(detuning_rf * half), off, off.conj(), real(-detuning_rf * half)) }
}

/// One RF pulse `δ(t) = δ₀ cos(ω_rf t + φ_rf)` with `t` the absolute lab time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfSegment<T> {
    pub delta0: T,
    pub omega_rf: T,
    pub phi_rf: T,
    pub duration: T,
}

impl<T: Real> RfSegment<T> {
    /// Segment with `ω_rf = (Ω_N − Ω_F) + Δ_rf`.
    pub fn tuned(eta: T, delta0: T, phi_rf: T, detuning_rf: T, duration: T) -> Result<Self> {
        if !(delta0 >= T::zero()) || !(duration >= T::zero()) {
            return Err(domain("RfSegment", "delta0 and duration must be non-negative"));
        }
        let (f, n) = energy_shifts(eta)?;
        Ok(Self { delta0, omega_rf: n - f + detuning_rf, phi_rf, duration })
    }

    /// RWA generator of this segment in a frame rotating at `frame`.
    ///
    /// Only defined when the segment oscillates at the frame frequency;
    /// otherwise the generator is not static.
    pub fn rwa_hamiltonian(&self, eta: T, frame: T) -> Result<QubitHamiltonian<T>> {
        if (self.omega_rf - frame).abs() > lit::<T>(1e-12) * frame.abs().max(T::one()) {
            return Err(domain("rwa_hamiltonian", "segment frequency differs from the frame frequency"));
        }
        let (f, n) = energy_shifts(eta)?;
        Ok(rf_qubit_hamiltonian(self.delta0, self.phi_rf, frame - (n - f)))
    }
}

/// Full-model run reported in the qubit picture.
#[derive(Debug, Clone)]
pub struct QubitRun<T: Real> {
    /// Lab-frame (ω₀ removed) density operators.
    pub trajectory: Trajectory<T>,
    /// `B_N(t)`, in the rotating frame for RF runs.
    pub bloch: Vec<BlochVector<T>>,
    /// Population of the qubit subspace.
    pub qubit_population: Vec<T>,
}

fn qubit_population<T: Real>(rho: &Operator<T>) -> T {
    let b = qubit_basis::<T>();
    b.iter().fold(T::zero(), |acc, k| acc + k.dotc(&(rho * k)).re)
}

/// Full master-equation evolution from `|ψ_a²⟩` with a static splitting `δ`.
pub fn simulate_static_bloch<T: Real>(
    eta: T,
    delta: T,
    t_end: T,
    dt_out: T,
    opts: &IntegratorOptions,
) -> Result<QubitRun<T>> {
    let geom = Geometry::along_x(eta);
    let cs = closed_form_couplings(&geom)?;
    let h = build_h_a(delta) + build_h_omega(&cs);
    let gen = Generator::constant(build_liouvillian(&h, &build_dissipator(&cs)));
    let rho0 = DensityMatrix::pure(&qubit_basis::<T>()[0])?;
    let trajectory = evolve(&gen, &rho0, t_end, dt_out, opts)?;
    let bloch = trajectory.states.iter().map(|r| bloch_vector(r.matrix())).collect();
    let qubit_population = trajectory.states.iter().map(|r| qubit_population(r.matrix())).collect();
    Ok(QubitRun { trajectory, bloch, qubit_population })
}

/// `U ρ U†` with `U = exp(iωt|ψ_a³⟩⟨ψ_a³|)`: the frame in which the RWA generator is static.
pub fn to_rotating_frame<T: Real>(rho: &Operator<T>, omega: T, t: T) -> Operator<T> {
    let k3 = qubit_basis::<T>()[1];
    let u = Operator::identity() + outer(&k3, &k3) * (cis(omega * t) - real(T::one()));
    u * rho * u.adjoint()
}

/// Generator of one RF pulse on top of a static splitting `zeeman`, no RWA.
pub fn rf_generator<T: Real>(geom: &Geometry<T>, zeeman: T, seg: &RfSegment<T>) -> Result<Generator<T>> {
    let cs = closed_form_couplings(geom)?;
    let base = build_liouvillian(&(build_h_a(zeeman) + build_h_omega(&cs)), &build_dissipator(&cs));
    let seg = *seg;
    let modulation = Arc::new(move |t: T| rf_zeeman(seg.delta0, seg.omega_rf, seg.phi_rf, t));
    Ok(Generator::constant(base).with_term(commutator_superoperator(&build_h_a(T::one())), modulation))
}

/// Full 16-level evolution from `|ψ_a²⟩` through a sequence of RF pulses,
/// without the rotating-wave approximation.
///
/// Bloch vectors are reported in the frame rotating at `frame_frequency`.
pub fn simulate_rf_sequence<T: Real>(
    eta: T,
    segments: &[RfSegment<T>],
    frame_frequency: T,
    dt_out: T,
    opts: &IntegratorOptions,
) -> Result<QubitRun<T>> {
    let geom = Geometry::along_x(eta);
    let pieces = segments
        .iter()
        .map(|seg| Ok((rf_generator(&geom, T::zero(), seg)?, seg.duration)))
        .collect::<Result<Vec<_>>>()?;
    let rho0 = DensityMatrix::pure(&qubit_basis::<T>()[0])?;
    let trajectory = evolve_piecewise(&pieces, &rho0, dt_out, opts)?;
    let bloch = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, r)| bloch_vector(&to_rotating_frame(r.matrix(), frame_frequency, t)))
        .collect();
    let qubit_population = trajectory.states.iter().map(|r| qubit_population(r.matrix())).collect();
    Ok(QubitRun { trajectory, bloch, qubit_population })
}

/// A single resonant (or detuned) pulse of length `t_end`.
pub fn simulate_rf_transfer<T: Real>(
    eta: T,
    delta0: T,
    phi_rf: T,
    detuning_rf: T,
    t_end: T,
    dt_out: T,
    opts: &IntegratorOptions,
) -> Result<QubitRun<T>> {
    let seg = RfSegment::tuned(eta, delta0, phi_rf, detuning_rf, t_end)?;
    simulate_rf_sequence(eta, &[seg], seg.omega_rf, dt_out, opts)
}

/// Bloch trajectory of the ideal rotating-wave model for the same schedule and output grid.
pub fn rwa_sequence_bloch<T: Real>(
    eta: T,
    segments: &[RfSegment<T>],
    frame_frequency: T,
    dt_out: T,
) -> Result<Vec<(T, BlochVector<T>)>> {
    let mut b = Vector3::z();
    let mut t0 = T::zero();
    let mut out = vec![(t0, b)];
    for seg in segments {
        let h = seg.rwa_hamiltonian(eta, frame_frequency)?;
        let grid = output_grid(seg.duration, dt_out)?;
        for &t in &grid[1..] {
            out.push((t0 + t, h.rotate(&b, t)));
        }
        b = h.rotate(&b, seg.duration);
        t0 += seg.duration;
    }
    Ok(out)
}

/// Bloch trajectory of the static 2×2 model from `+z`.
pub fn static_model_bloch<T: Real>(eta: T, delta: T, times: &[T]) -> Result<Vec<BlochVector<T>>> {
    let h = static_qubit_hamiltonian(eta, delta)?;
    let psi0 = Vector2::new(real(T::one()), real(T::zero()));
    Ok(times
        .iter()
        .map(|&t| {
            let psi = h.unitary(t) * psi0;
            bloch_of_qubit(&(psi * psi.adjoint()))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ground_ket;
    use crate::spectral::{block_matrix, bohr_frequency};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn static_axis_matches_closed_form() {
        let eta = 2.0 * PI * 0.1;
        for &delta in &[0.0, 3.15, -4.0] {
            let h = static_qubit_hamiltonian(eta, delta).unwrap();
            let (f, n) = energy_shifts(eta).unwrap();
            let wb = bohr_frequency(eta, delta).unwrap();
            let expect = -Vector3::new(2.0 * delta, 0.0, n - f) / wb;
            assert!((h.axis() - expect).norm() < 1e-12);
            assert!((h.rate() - wb).abs() < 1e-12);
            let ev = h.matrix.symmetric_eigenvalues();
            assert!(((ev[0] - ev[1]).abs() - wb).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_block_is_decoupled_from_a2_in_plane() {
        let g = Geometry::along_x(2.0 * PI * 0.1);
        let cs = closed_form_couplings(&g).unwrap();
        let h = build_h_a(3.0) + build_h_omega(&cs);
        let k = [
            psi_state::<f64>(Symmetry::Antisymmetric, 1, &g),
            psi_state(Symmetry::Antisymmetric, 2, &g),
            psi_state(Symmetry::Antisymmetric, 3, &g),
        ];
        let m = nalgebra::Matrix3::from_fn(|i, j| k[i].dotc(&(h * k[j])));
        assert!(m[(0, 2)].norm() < 1e-14);
        assert!(m[(0, 1)].norm() < 1e-14);
        assert!((m[(1, 2)].re + 3.0).abs() < 1e-12);
        let _ = block_matrix(&h, Symmetry::Antisymmetric);
    }

    #[test]
    fn bloch_vector_of_basis_states() {
        let [p2, p3] = qubit_basis::<f64>();
        assert!((bloch_vector(&outer(&p2, &p2)) - Vector3::z()).norm() < 1e-14);
        assert!((bloch_vector(&outer(&p3, &p3)) + Vector3::z()).norm() < 1e-14);
        let g = ground_ket::<f64>();
        assert!(bloch_vector(&outer(&g, &g)).norm() < 1e-14);
        let s = 1.0 / 2.0_f64.sqrt();
        let plus = (p2 + p3) * Complex::new(s, 0.0);
        assert!((bloch_vector(&outer(&plus, &plus)) - Vector3::x()).norm() < 1e-14);
        let plus_y = (p2 + p3 * Complex::new(0.0, 1.0)) * Complex::new(s, 0.0);
        assert!((bloch_vector(&outer(&plus_y, &plus_y)) - Vector3::y()).norm() < 1e-14);
    }

    #[test]
    fn rotation_matches_unitary() {
        let h = rf_qubit_hamiltonian(0.7, 1.1, 0.4);
        let psi0 = Vector2::new(Complex::new(0.6, 0.0), Complex::new(0.0, 0.8));
        let b0 = bloch_of_qubit(&(psi0 * psi0.adjoint()));
        for k in 0..10 {
            let t = 0.37 * k as f64;
            let psi = h.unitary(t) * psi0;
            let b = bloch_of_qubit(&(psi * psi.adjoint()));
            assert!((b - h.rotate(&b0, t)).norm() < 1e-12);
        }
    }

    #[test]
    fn rf_axis_and_pi_pulse() {
        let h = rf_qubit_hamiltonian(1.0, PI, 0.0);
        assert!((h.axis() - Vector3::x()).norm() < 1e-12);
        assert!((h.rate() - 2.0).abs() < 1e-12);
        let b = h.rotate(&Vector3::z(), PI / h.rate());
        assert!((b + Vector3::z()).norm() < 1e-12);
        for &phi in &[0.0_f64, 0.5, 2.0, 4.0] {
            let n = rf_qubit_hamiltonian(0.3, phi, 0.0).axis();
            assert!(n.z.abs() < 1e-14);
            assert!((n - Vector3::new(-phi.cos(), phi.sin(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn target_delta_formula() {
        let eta = 2.0 * PI * 0.1;
        let (f, n) = energy_shifts(eta).unwrap();
        assert!((delta_for_target(&Vector3::new(1.0, 0.0, 0.0), eta).unwrap() - (f - n).abs() / 2.0).abs() < 1e-12);
        assert!(delta_for_target(&Vector3::new(0.0, 1.0, 0.0), eta).is_err());
        assert!(delta_for_target(&Vector3::new(0.5, 0.0, 0.0), eta).is_err());
        let s = Vector3::new(1e-3, 0.0, (1.0f64 - 1e-6).sqrt());
        assert!(delta_for_target(&s, eta).unwrap().abs() < 1e-2);
    }

    #[test]
    fn target_is_reached_by_static_rotation() {
        let eta = 2.0 * PI * 0.1;
        let s = Vector3::new(-0.3, 0.5, -0.8).normalize();
        let delta = delta_for_target(&s, eta).unwrap();
        let h = static_qubit_hamiltonian(eta, delta).unwrap();
        let period = 2.0 * PI / h.rate();
        let dist = |t: f64| (h.rotate(&Vector3::z(), t) - s).norm();
        let n = 4000;
        let k = (0..n).min_by(|&a, &b| dist(a as f64 * period / n as f64).partial_cmp(&dist(b as f64 * period / n as f64)).unwrap()).unwrap();
        let (mut lo, mut hi) = ((k as f64 - 1.0) * period / n as f64, (k as f64 + 1.0) * period / n as f64);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if dist(m1) < dist(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        assert!(dist(0.5 * (lo + hi)) < 1e-6);
    }

    #[test]
    fn no_rf_amplitude_leaves_bloch_vector_at_north_pole() {
        let eta = 2.0 * PI * 0.05;
        let run = simulate_rf_transfer(eta, 0.0, PI, 0.0, FRAC_PI_2, 0.25, &Default::default()).unwrap();
        for b in &run.bloch {
            assert!(b.x.abs() < 1e-9 && b.y.abs() < 1e-9 && b.z > 0.9);
        }
    }

    #[test]
    fn static_field_with_zero_splitting_is_stationary() {
        let run = simulate_static_bloch(2.0 * PI * 0.1, 0.0, 0.5, 0.1, &Default::default()).unwrap();
        for b in &run.bloch {
            assert!(b.x.abs() < 1e-12 && b.y.abs() < 1e-12);
        }
    }
}
