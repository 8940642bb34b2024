//! Eigenstructure of `H_A + H_Ω` in the single-excitation manifold.
//!
//! The manifold splits into an antisymmetric block spanned by `|a_i⟩` and a
//! symmetric block spanned by `|s_i⟩`; `H_Ω` acts with opposite sign on them.

use std::fmt;

use nalgebra::{Complex, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::basis::{antisym_ket, sym_ket, Ket};
use crate::couplings::{closed_form_couplings, energy_shifts, CouplingSet, Geometry};
use crate::error::{domain, Result};
use crate::hamiltonians::{build_h_a, build_h_omega, decay_operator};
use crate::scalar::{cis, inv_sqrt2, lit, real, Real};

/// Exchange symmetry of a single-excitation state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Antisymmetric,
    Symmetric,
}

impl Symmetry {
    pub const BOTH: [Symmetry; 2] = [Symmetry::Antisymmetric, Symmetry::Symmetric];

    /// `|a_i⟩` or `|s_i⟩`.
    pub fn ket<T: Real>(self, level: usize) -> Ket<T> {
        match self {
            Symmetry::Antisymmetric => antisym_ket(level),
            Symmetry::Symmetric => sym_ket(level),
        }
    }

    fn tag(self) -> char {
        match self {
            Symmetry::Antisymmetric => 'a',
            Symmetry::Symmetric => 's',
        }
    }

    fn sign<T: Real>(self) -> T {
        match self {
            Symmetry::Antisymmetric => T::one(),
            Symmetry::Symmetric => -T::one(),
        }
    }
}

/// Which family a [`CollectiveState`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateLabel {
    /// `|a_i⟩`, `|s_i⟩`.
    Bare(Symmetry, usize),
    /// Eigenstates `ψ^i` of `H_Ω`.
    Degenerate(Symmetry, usize),
    /// Eigenstates `φ^i` of `H_A + H_Ω`.
    Dressed(Symmetry, usize),
    Ground,
    DoublyExcited(usize, usize),
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateLabel::Bare(s, i) => write!(f, "{}{i}", s.tag()),
            StateLabel::Degenerate(s, i) => write!(f, "psi_{}{i}", s.tag()),
            StateLabel::Dressed(s, i) => write!(f, "phi_{}{i}", s.tag()),
            StateLabel::Ground => write!(f, "ground"),
            StateLabel::DoublyExcited(i, j) => write!(f, "|{i},{j}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState<T: Real> {
    pub label: StateLabel,
    pub ket: Ket<T>,
}

/// One eigenstate with its frequency shift and population decay rate `2Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLine<T: Real> {
    pub state: CollectiveState<T>,
    pub shift: T,
    pub decay_rate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    pub antisym: Vec<SpectralLine<T>>,
    pub sym: Vec<SpectralLine<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn block(&self, s: Symmetry) -> &[SpectralLine<T>] {
        match s {
            Symmetry::Antisymmetric => &self.antisym,
            Symmetry::Symmetric => &self.sym,
        }
    }

    pub fn shifts(&self, s: Symmetry) -> [T; 3] {
        let b = self.block(s);
        [b[0].shift, b[1].shift, b[2].shift]
    }

    pub fn decay_rates(&self, s: Symmetry) -> [T; 3] {
        let b = self.block(s);
        [b[0].decay_rate, b[1].decay_rate, b[2].decay_rate]
    }
}

/// Closed forms available when both atoms lie in the `x-y` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSpectrum<T: Real> {
    /// `Λ_a^i` in the planar labelling (`Λ_a^1 = Ω_F`).
    pub lambda_a: [T; 3],
    pub lambda_s: [T; 3],
    pub omega_b: T,
    pub mixing_a: T,
    pub mixing_s: T,
    pub phi_a: [Ket<T>; 3],
    pub phi_s: [Ket<T>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegenerateSpectrum<T: Real> {
    /// Numerical eigenpairs of each block, sorted by ascending shift.
    pub numeric: Spectrum<T>,
    /// Present when `θ = π/2`.
    pub planar: Option<PlanarSpectrum<T>>,
}

/// `|ψ^±⟩ = (e^{iφ}|x_1⟩ ± e^{−iφ}|x_3⟩)/√2`.
pub fn psi_pm<T: Real>(sym: Symmetry, plus: bool, phi: T) -> Ket<T> {
    let s = real(inv_sqrt2::<T>());
    let k1 = sym.ket::<T>(1) * cis(phi);
    let k3 = sym.ket::<T>(3) * cis(-phi);
    if plus {
        (k1 + k3) * s
    } else {
        (k1 - k3) * s
    }
}

/// Degenerate eigenstates `|ψ^i⟩` of `H_Ω`, `i = 1, 2, 3`.
///
/// `ψ^1` and `ψ^2` share the shift `±Ω_F`; `ψ^3` carries `±Ω_N`.
pub fn psi_state<T: Real>(sym: Symmetry, i: usize, geom: &Geometry<T>) -> Ket<T> {
    let (st, ct) = geom.theta.sin_cos();
    let x2 = sym.ket::<T>(2);
    let minus = psi_pm(sym, false, geom.phi);
    match i {
        1 => x2 * real(st) - minus * real(ct),
        2 => psi_pm(sym, true, geom.phi),
        3 => x2 * real(ct) + minus * real(st),
        _ => panic!("state index {i} out of range 1..=3"),
    }
}

/// Rotates a ket so that its largest-magnitude component is real and positive.
pub fn fix_phase<T: Real>(ket: &Ket<T>) -> Ket<T> {
    let mut best = 0;
    let mut max = T::zero();
    for (k, c) in ket.iter().enumerate() {
        let m = nalgebra::ComplexField::modulus(*c);
        // ties go to the lowest index
        if m > max * (T::one() + lit(1e-9)) {
            max = m;
            best = k;
        }
    }
    if max == T::zero() {
        return *ket;
    }
    let c = ket[best];
    ket * (c.conj() / real(max))
}

fn line<T: Real>(label: StateLabel, ket: Ket<T>, shift: T, decay: &crate::basis::Operator<T>) -> SpectralLine<T> {
    let rate = lit::<T>(2.0) * ket.dotc(&(decay * ket)).re;
    SpectralLine { state: CollectiveState { label, ket }, shift, decay_rate: rate }
}

/// Closed-form eigensystem of `H_Ω` with `δ = 0`.
pub fn degenerate_eigensystem<T: Real>(geom: &Geometry<T>) -> Result<Spectrum<T>> {
    let cs = closed_form_couplings(geom)?;
    let (f, n) = (cs.omega_f, cs.omega_n);
    let block = |sym: Symmetry| {
        let rates = match sym {
            Symmetry::Antisymmetric => cs.decay.antisym,
            Symmetry::Symmetric => cs.decay.sym,
        };
        let sign = sym.sign::<T>();
        [f, f, n]
            .iter()
            .enumerate()
            .map(|(k, &shift)| SpectralLine {
                state: CollectiveState {
                    label: StateLabel::Degenerate(sym, k + 1),
                    ket: psi_state(sym, k + 1, geom),
                },
                shift: sign * shift,
                decay_rate: lit::<T>(2.0) * rates[k],
            })
            .collect()
    };
    Ok(Spectrum { antisym: block(Symmetry::Antisymmetric), sym: block(Symmetry::Symmetric) })
}

/// Matrix of an operator in the `{|x_1⟩, |x_2⟩, |x_3⟩}` basis of one block.
pub fn block_matrix<T: Real>(op: &crate::basis::Operator<T>, sym: Symmetry) -> Matrix3<Complex<T>> {
    let kets: [Ket<T>; 3] = std::array::from_fn(|i| sym.ket(i + 1));
    Matrix3::from_fn(|i, j| kets[i].dotc(&(op * kets[j])))
}

fn numeric_block<T: Real>(
    h: &crate::basis::Operator<T>,
    decay: &crate::basis::Operator<T>,
    sym: Symmetry,
) -> Vec<SpectralLine<T>> {
    let m = block_matrix(h, sym);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let kets: [Ket<T>; 3] = std::array::from_fn(|i| sym.ket(i + 1));
    order
        .iter()
        .enumerate()
        .map(|(rank, &col)| {
            let v: Vector3<Complex<T>> = eig.eigenvectors.column(col).into();
            let ket = fix_phase(&(kets[0] * v[0] + kets[1] * v[1] + kets[2] * v[2]));
            line(StateLabel::Dressed(sym, rank + 1), ket, eig.eigenvalues[col], decay)
        })
        .collect()
}

/// Numerical eigensystem of `H_A(δ) + H_Ω`, plus closed forms for in-plane geometries.
pub fn nondegenerate_eigensystem<T: Real>(geom: &Geometry<T>, delta: T) -> Result<NondegenerateSpectrum<T>> {
    let cs = closed_form_couplings(geom)?;
    let numeric = numeric_spectrum(&cs, delta);
    let in_plane = (geom.theta - T::frac_pi_2()).abs() < lit(1e-12);
    let planar = if in_plane { Some(planar_spectrum(geom, delta)?) } else { None };
    Ok(NondegenerateSpectrum { numeric, planar })
}

/// Numerical eigensystem for an explicit coupling set.
pub fn numeric_spectrum<T: Real>(cs: &CouplingSet<T>, delta: T) -> Spectrum<T> {
    let h = build_h_a(delta) + build_h_omega(cs);
    let d = decay_operator(cs);
    Spectrum {
        antisym: numeric_block(&h, &d, Symmetry::Antisymmetric),
        sym: numeric_block(&h, &d, Symmetry::Symmetric),
    }
}

/// `ω_B = √(4δ² + (Ω_F − Ω_N)²)`.
pub fn bohr_frequency<T: Real>(eta: T, delta: T) -> Result<T> {
    if !(eta > T::zero()) {
        return Err(domain("bohr_frequency", format!("eta = {eta} must be positive")));
    }
    let (f, n) = energy_shifts(eta)?;
    Ok(bohr_from_shifts(f, n, delta))
}

fn bohr_from_shifts<T: Real>(f: T, n: T, delta: T) -> T {
    let four: T = lit(4.0);
    (four * delta * delta + (f - n) * (f - n)).sqrt()
}

/// Mixing angle `ϑ ∈ [0, π/2]` with `tan 2ϑ = 2|δ| / gap`.
pub fn mixing_angle<T: Real>(delta: T, gap: T) -> T {
    let two: T = lit(2.0);
    (two * delta.abs()).atan2(gap) / two
}

/// Closed-form shifts and dressed states for `θ = π/2`.
pub fn planar_spectrum<T: Real>(geom: &Geometry<T>, delta: T) -> Result<PlanarSpectrum<T>> {
    let (f, n) = energy_shifts(geom.eta)?;
    let half: T = lit(0.5);
    let wb = bohr_from_shifts(f, n, delta);
    let mean = (f + n) * half;
    let xi = if delta < T::zero() { -T::one() } else { T::one() };
    let ta = mixing_angle(delta, f - n);
    let ts = mixing_angle(delta, n - f);
    let (sa, ca) = ta.sin_cos();
    let (ss, cs) = ts.sin_cos();

    let pa = psi_pm::<T>(Symmetry::Antisymmetric, true, geom.phi);
    let ma = psi_pm::<T>(Symmetry::Antisymmetric, false, geom.phi);
    let ps = psi_pm::<T>(Symmetry::Symmetric, true, geom.phi);
    let ms = psi_pm::<T>(Symmetry::Symmetric, false, geom.phi);

    Ok(PlanarSpectrum {
        lambda_a: [f, mean - wb * half, mean + wb * half],
        lambda_s: [-f, -mean + wb * half, -mean - wb * half],
        omega_b: wb,
        mixing_a: ta,
        mixing_s: ts,
        phi_a: [
            antisym_ket(2),
            pa * real(xi * sa) + ma * real(ca),
            pa * real(-xi * ca) + ma * real(sa),
        ],
        phi_s: [
            sym_ket(2),
            ps * real(-xi * cs) + ms * real(ss),
            ps * real(xi * ss) + ms * real(cs),
        ],
    })
}

/// `Λ_a^i` at one point of a `(l, z)` plane containing the `z` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint<T> {
    /// In-plane coordinate along `e_φ`, units of `λ₀`.
    pub l: T,
    /// Coordinate along `e_z`, units of `λ₀`.
    pub z: T,
    /// Sorted antisymmetric shifts.
    pub lambda_a: [T; 3],
}

/// Antisymmetric shifts on the grid `l × z` (units of `λ₀`) for the plane containing `e_φ`.
pub fn energy_surface<T: Real>(ls: &[T], zs: &[T], delta: T, phi: T) -> Result<Vec<SurfacePoint<T>>> {
    let mut out = Vec::with_capacity(ls.len() * zs.len());
    for &l in ls {
        for &z in zs {
            let r = (l * l + z * z).sqrt();
            if r == T::zero() {
                return Err(domain("energy_surface", "grid contains the origin l = z = 0"));
            }
            let theta = l.abs().atan2(z);
            let mut ph = if l < T::zero() { phi + T::pi() } else { phi };
            ph = ph.rem_euclid_two_pi();
            let geom = Geometry::from_r_over_lambda(r, theta, ph)?;
            let cs = closed_form_couplings(&geom)?;
            let spec = numeric_spectrum(&cs, delta);
            out.push(SurfacePoint { l, z, lambda_a: spec.shifts(Symmetry::Antisymmetric) });
        }
    }
    Ok(out)
}

trait WrapAngle {
    fn rem_euclid_two_pi(self) -> Self;
}

impl<T: Real> WrapAngle for T {
    fn rem_euclid_two_pi(self) -> T {
        let tau = T::two_pi();
        let r = self % tau;
        let r = if r < T::zero() { r + tau } else { r };
        if r >= tau {
            T::zero()
        } else {
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{excitation_number, Operator};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn overlap(a: &Ket<f64>, b: &Ket<f64>) -> f64 {
        a.dotc(b).norm()
    }

    #[test]
    fn degenerate_states_are_eigenstates() {
        for &(theta, phi) in &[(0.3, 0.2), (1.2, 4.0), (FRAC_PI_2, 0.0), (2.9, 5.5)] {
            let g = Geometry::new(2.0 * PI * 0.17, theta, phi).unwrap();
            let cs = closed_form_couplings(&g).unwrap();
            let h = build_h_omega(&cs);
            let spec = degenerate_eigensystem(&g).unwrap();
            for s in Symmetry::BOTH {
                for l in spec.block(s) {
                    let k = l.state.ket;
                    assert!((h * k - k * real(l.shift)).norm() < 1e-12, "{s:?} {}", l.state.label);
                }
            }
        }
    }

    #[test]
    fn degenerate_rates_match_decay_operator() {
        let g = Geometry::new(2.0 * PI * 0.23, 0.8, 1.9).unwrap();
        let cs = closed_form_couplings(&g).unwrap();
        let d = decay_operator(&cs);
        let spec = degenerate_eigensystem(&g).unwrap();
        for s in Symmetry::BOTH {
            for l in spec.block(s) {
                let r = 2.0 * l.state.ket.dotc(&(d * l.state.ket)).re;
                assert!((r - l.decay_rate).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn planar_closed_forms_match_numerics() {
        for &delta in &[1.0, -0.7, 3.15] {
            for &r in &[0.05, 0.1, 0.3, 0.8] {
                let g = Geometry::new(2.0 * PI * r, FRAC_PI_2, 0.6).unwrap();
                let ns = nondegenerate_eigensystem(&g, delta).unwrap();
                let p = ns.planar.as_ref().unwrap();
                let h = build_h_a(delta) + build_h_omega(&closed_form_couplings(&g).unwrap());
                for (k, lam) in p.lambda_a.iter().enumerate() {
                    let v = p.phi_a[k];
                    assert!((h * v - v * real(*lam)).norm() < 1e-10, "a{k} r={r} d={delta}");
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                }
                for (k, lam) in p.lambda_s.iter().enumerate() {
                    let v = p.phi_s[k];
                    assert!((h * v - v * real(*lam)).norm() < 1e-10, "s{k} r={r} d={delta}");
                }
                let mut sorted = p.lambda_a;
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let num = ns.numeric.shifts(Symmetry::Antisymmetric);
                for k in 0..3 {
                    assert!((sorted[k] - num[k]).abs() < 1e-10);
                }
                let gap = num[2] - num[0];
                assert!((gap - p.omega_b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn small_zeeman_limit_recovers_degenerate_states() {
        let g = Geometry::new(2.0 * PI * 0.1, FRAC_PI_2, 0.3).unwrap();
        let p = planar_spectrum(&g, 1e-7).unwrap();
        for i in 0..3 {
            let psi = psi_state(Symmetry::Antisymmetric, i + 1, &g);
            assert!((overlap(&p.phi_a[i], &psi) - 1.0).abs() < 1e-9);
            let psi = psi_state(Symmetry::Symmetric, i + 1, &g);
            assert!((overlap(&p.phi_s[i], &psi) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn shifts_do_not_depend_on_azimuth() {
        let base = nondegenerate_eigensystem(&Geometry::new(1.3, 0.9, 0.0).unwrap(), 0.8).unwrap();
        for k in 1..10 {
            let g = Geometry::new(1.3, 0.9, 0.6 * k as f64).unwrap();
            let s = nondegenerate_eigensystem(&g, 0.8).unwrap();
            for sym in Symmetry::BOTH {
                let (a, b) = (base.numeric.shifts(sym), s.numeric.shifts(sym));
                for i in 0..3 {
                    assert!((a[i] - b[i]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bohr_frequency_limits() {
        let eta = 2.0 * PI * 0.2;
        let (f, n) = energy_shifts(eta).unwrap();
        assert!((bohr_frequency(eta, 0.0).unwrap() - (f - n).abs()).abs() < 1e-14);
        assert!(bohr_frequency(0.0_f64, 1.0).is_err());
        assert!(bohr_frequency(-1.0_f64, 1.0).is_err());
    }

    #[test]
    fn full_space_is_block_diagonal() {
        let g = Geometry::new(2.0, 1.0, 2.0).unwrap();
        let cs = closed_form_couplings(&g).unwrap();
        let h: Operator<f64> = build_h_a(0.5) + build_h_omega(&cs);
        let n = excitation_number::<f64>();
        assert!((h * n - n * h).norm() < 1e-12);
        let spec = numeric_spectrum(&cs, 0.5);
        for s in Symmetry::BOTH {
            for l in spec.block(s) {
                let k = l.state.ket;
                assert!((h * k - k * real(l.shift)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn phase_convention() {
        let k = psi_state::<f64>(Symmetry::Antisymmetric, 2, &Geometry::new(1.0, 1.0, 1.0).unwrap());
        let k = k * Complex::new(0.0, -1.0);
        let f = fix_phase(&k);
        let big = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let c = f.iter().find(|c| (c.norm() - big).abs() < 1e-12).unwrap();
        assert!(c.im.abs() < 1e-14 && c.re > 0.0);
    }

    #[test]
    fn surface_rejects_origin_and_is_azimuth_invariant() {
        assert!(energy_surface(&[0.0_f64], &[0.0], 1.0, 0.0).is_err());
        let ls = [-0.2_f64, 0.1, 0.3];
        let zs = [-0.1, 0.0, 0.25];
        let a = energy_surface(&ls, &zs, 1.0, 0.0).unwrap();
        let b = energy_surface(&ls, &zs, 1.0, 2.2).unwrap();
        for (p, q) in a.iter().zip(&b) {
            for i in 0..3 {
                assert!((p.lambda_a[i] - q.lambda_a[i]).abs() < 1e-10);
            }
        }
    }
}
