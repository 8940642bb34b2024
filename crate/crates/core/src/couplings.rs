//! Vacuum-induced coherent couplings `Ω_ij` and collective decay rates `Γ_ij`
//! between the two atoms.
//!
//! All quantities are in units of the single-atom rate `γ` (half the total
//! decay rate of an excited sublevel) with `ħ = 1`. Distances enter only
//! through `η = k₀R = 2πR/λ₀`.
//!
//! Two independent routes are provided: contraction of the dipole vectors with
//! the retarded dipole tensor ([`couplings_from_tensor`]) and the explicit
//! trigonometric forms ([`closed_form_couplings`]).

use nalgebra::{Complex, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{cis, cplx, inv_sqrt2, lit, real, Real};

/// Below this separation the `1/η³` ratios are summed as power series.
const SERIES_CUTOFF: f64 = 0.5;
/// Highest numerator power kept in the series.
const SERIES_ORDER: usize = 30;

/// Relative position of atom 2 with respect to atom 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry<T> {
    /// `η = k₀R`.
    pub eta: T,
    /// Polar angle of the separation vector, `[0, π]`.
    pub theta: T,
    /// Azimuth of the separation vector, `[0, 2π)`.
    pub phi: T,
}

impl<T: Real> Geometry<T> {
    pub fn new(eta: T, theta: T, phi: T) -> Result<Self> {
        if !(eta.is_finite() && theta.is_finite() && phi.is_finite()) {
            return Err(domain("geometry", "non-finite component"));
        }
        if eta < T::zero() {
            return Err(domain("geometry", format!("eta = {eta} is negative")));
        }
        if theta < T::zero() || theta > T::pi() {
            return Err(domain("geometry", format!("theta = {theta} outside [0, pi]")));
        }
        if phi < T::zero() || phi >= T::two_pi() {
            return Err(domain("geometry", format!("phi = {phi} outside [0, 2pi)")));
        }
        Ok(Self { eta, theta, phi })
    }

    /// Separation given as a fraction of the mean transition wavelength.
    pub fn from_r_over_lambda(r_over_lambda: T, theta: T, phi: T) -> Result<Self> {
        Self::new(T::two_pi() * r_over_lambda, theta, phi)
    }

    /// Atoms side by side along `e_x` (`θ = π/2`, `φ = 0`).
    pub fn along_x(eta: T) -> Self {
        Self { eta, theta: T::frac_pi_2(), phi: T::zero() }
    }

    pub fn r_over_lambda(&self) -> T {
        self.eta / T::two_pi()
    }

    /// Unit vector along the separation.
    pub fn unit_vector(&self) -> Vector3<T> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    fn require_positive_eta(&self, what: &'static str) -> Result<()> {
        if self.eta > T::zero() {
            Ok(())
        } else {
            Err(domain(what, format!("eta = {} must be positive", self.eta)))
        }
    }
}

/// Transition dipoles `d_i = ⟨i|d̂|4⟩` of the `S₀ ↔ P₁` scheme in units of the
/// reduced matrix element.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSet<T: Real> {
    pub d: [Vector3<Complex<T>>; 3],
}

impl<T: Real> DipoleSet<T> {
    /// `d₁ = ε⁺`, `d₂ = e_z`, `d₃ = −ε⁻` with `ε^± = (e_x ± i e_y)/√2`.
    pub fn standard() -> Self {
        let s = inv_sqrt2::<T>();
        let z = T::zero();
        let eps_plus = Vector3::new(cplx(s, z), cplx(z, s), cplx(z, z));
        let eps_minus = Vector3::new(cplx(s, z), cplx(z, -s), cplx(z, z));
        let e_z = Vector3::new(cplx(z, z), cplx(z, z), cplx(T::one(), z));
        Self { d: [eps_plus, e_z, -eps_minus] }
    }

    /// `d_i^T M d_j^*` for a real symmetric 3×3 tensor `M`.
    pub fn contract(&self, m: &Matrix3<T>, i: usize, j: usize) -> Complex<T> {
        let mc = m.map(real);
        let dj = self.d[j].map(|z| z.conj());
        (self.d[i].transpose() * mc * dj)[(0, 0)]
    }
}

/// Decay-rate coefficients `Γ_a^i`, `Γ_s^i` of the antisymmetric and symmetric
/// eigenstates. The states decay at twice these values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRates<T> {
    pub antisym: [T; 3],
    pub sym: [T; 3],
}

/// All coupling constants for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet<T: Real> {
    /// `Ω_ij` (row `i`, column `j`), Hermitian.
    pub omega: Matrix3<Complex<T>>,
    /// `Γ_ij` (row `i`, column `j`), Hermitian.
    pub gamma_cross: Matrix3<Complex<T>>,
    /// Shift of the doubly degenerate pair, `λ_a^{1,2} = Ω_F`.
    pub omega_f: T,
    /// Shift of the third antisymmetric state, `λ_a^3 = Ω_N`.
    pub omega_n: T,
    pub decay: DecayRates<T>,
}

impl<T: Real> CouplingSet<T> {
    /// The dissipative couplings in the `R → 0` limit: `Γ_ij → δ_ij`.
    ///
    /// The coherent shifts diverge in this limit and are left at zero; the set
    /// is only meaningful for building dissipators.
    pub fn zero_distance_limit() -> Self {
        Self {
            omega: Matrix3::zeros(),
            gamma_cross: Matrix3::identity(),
            omega_f: T::zero(),
            omega_n: T::zero(),
            decay: DecayRates { antisym: [T::zero(); 3], sym: [lit(2.0); 3] },
        }
    }
}

/// `scale · [poly(η) + sin_poly(η)·sin η + cos_poly(η)·cos η] / η³`.
///
/// Ascending coefficients. Near the origin the numerator is expanded term by
/// term so that the leading cancellations happen exactly.
struct TrigRatio {
    scale: f64,
    poly: &'static [f64],
    sin_poly: &'static [f64],
    cos_poly: &'static [f64],
}

impl TrigRatio {
    fn eval<T: Real>(&self, eta: T) -> T {
        if eta < lit(SERIES_CUTOFF) {
            self.series(eta)
        } else {
            self.direct(eta)
        }
    }

    fn direct<T: Real>(&self, eta: T) -> T {
        let horner = |c: &[f64]| c.iter().rev().fold(T::zero(), |acc, &x| acc * eta + lit(x));
        let (s, c) = eta.sin_cos();
        let num = horner(self.poly) + horner(self.sin_poly) * s + horner(self.cos_poly) * c;
        lit::<T>(self.scale) * num / (eta * eta * eta)
    }

    fn series<T: Real>(&self, eta: T) -> T {
        let coeffs = self.numerator_series();
        // Σ_k c_k η^{k-3}; the k < 3 terms carry the (possibly divergent) tail.
        let regular = coeffs[3..]
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * eta + lit(c));
        let singular = lit::<T>(coeffs[0]) / (eta * eta * eta)
            + lit::<T>(coeffs[1]) / (eta * eta)
            + lit::<T>(coeffs[2]) / eta;
        lit::<T>(self.scale) * (regular + singular)
    }

    fn numerator_series(&self) -> [f64; SERIES_ORDER + 1] {
        let mut sin_t = [0.0; SERIES_ORDER + 1];
        let mut cos_t = [0.0; SERIES_ORDER + 1];
        let mut fact = 1.0;
        for k in 0..=SERIES_ORDER {
            if k > 0 {
                fact *= k as f64;
            }
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 1 {
                sin_t[k] = sign / fact;
            } else {
                cos_t[k] = sign / fact;
            }
        }
        let mut out = [0.0; SERIES_ORDER + 1];
        for (p, &a) in self.poly.iter().enumerate() {
            out[p] += a;
        }
        for (p, &a) in self.sin_poly.iter().enumerate() {
            for k in 0..=SERIES_ORDER - p {
                out[p + k] += a * sin_t[k];
            }
        }
        for (p, &a) in self.cos_poly.iter().enumerate() {
            for k in 0..=SERIES_ORDER - p {
                out[p + k] += a * cos_t[k];
            }
        }
        // Exact cancellations of the η^{-3..-1} terms leave rounding residue
        // that would otherwise be amplified by 1/η³.
        for c in out.iter_mut().take(3) {
            if c.abs() < 1e-12 {
                *c = 0.0;
            }
        }
        out
    }
}

// Radial parts of the dipole tensor: A = (1/η + i/η² − 1/η³)e^{iη},
// B = (1/η + 3i/η² − 3/η³)e^{iη}.
const TENSOR_A_RE: TrigRatio =
    TrigRatio { scale: 1.0, poly: &[], sin_poly: &[0.0, -1.0], cos_poly: &[-1.0, 0.0, 1.0] };
const TENSOR_A_IM: TrigRatio =
    TrigRatio { scale: 1.0, poly: &[], sin_poly: &[-1.0, 0.0, 1.0], cos_poly: &[0.0, 1.0] };
const TENSOR_B_RE: TrigRatio =
    TrigRatio { scale: 1.0, poly: &[], sin_poly: &[0.0, -3.0], cos_poly: &[-3.0, 0.0, 1.0] };
const TENSOR_B_IM: TrigRatio =
    TrigRatio { scale: 1.0, poly: &[], sin_poly: &[-3.0, 0.0, 1.0], cos_poly: &[0.0, 3.0] };

// Explicit coupling forms: Ω₃₁ = W(η) sin²θ e^{-2iφ}, Ω₁₁ = P(η) + W(η) cos2θ / 2,
// and the same with G, Q for the decay rates.
const OMEGA_W: TrigRatio =
    TrigRatio { scale: 0.75, poly: &[], sin_poly: &[0.0, -3.0], cos_poly: &[-3.0, 0.0, 1.0] };
const OMEGA_P: TrigRatio =
    TrigRatio { scale: 0.375, poly: &[], sin_poly: &[0.0, -1.0], cos_poly: &[-1.0, 0.0, 3.0] };
const GAMMA_G: TrigRatio =
    TrigRatio { scale: 0.75, poly: &[], sin_poly: &[-3.0, 0.0, 1.0], cos_poly: &[0.0, 3.0] };
const GAMMA_Q: TrigRatio =
    TrigRatio { scale: 0.375, poly: &[], sin_poly: &[-1.0, 0.0, 3.0], cos_poly: &[0.0, 1.0] };

const SHIFT_F: TrigRatio =
    TrigRatio { scale: -1.5, poly: &[], sin_poly: &[0.0, 1.0], cos_poly: &[1.0, 0.0, -1.0] };
const SHIFT_N: TrigRatio =
    TrigRatio { scale: 3.0, poly: &[], sin_poly: &[0.0, 1.0], cos_poly: &[1.0] };

const RATE_A12: TrigRatio = TrigRatio {
    scale: 0.5,
    poly: &[0.0, 0.0, 0.0, 2.0],
    sin_poly: &[3.0, 0.0, -3.0],
    cos_poly: &[0.0, -3.0],
};
const RATE_A3: TrigRatio =
    TrigRatio { scale: 1.0, poly: &[0.0, 0.0, 0.0, 1.0], sin_poly: &[-3.0], cos_poly: &[0.0, 3.0] };
const RATE_S12: TrigRatio = TrigRatio {
    scale: 0.5,
    poly: &[0.0, 0.0, 0.0, 2.0],
    sin_poly: &[-3.0, 0.0, 3.0],
    cos_poly: &[0.0, 3.0],
};
const RATE_S3: TrigRatio =
    TrigRatio { scale: 1.0, poly: &[0.0, 0.0, 0.0, 1.0], sin_poly: &[3.0], cos_poly: &[0.0, -3.0] };

/// Retarded dipole tensor normalized so that `d_i^T Re(χ) d_j^*` is `Ω_ij / γ`
/// and `d_i^T Im(χ) d_j^*` is `Γ_ij / γ`:
/// `χ_kl = (3/2)[δ_kl A(η) − R̂_k R̂_l B(η)]`.
pub fn chi_tensor<T: Real>(geom: &Geometry<T>) -> Result<Matrix3<Complex<T>>> {
    geom.require_positive_eta("chi_tensor")?;
    let eta = geom.eta;
    let a = cplx(TENSOR_A_RE.eval(eta), TENSOR_A_IM.eval(eta));
    let b = cplx(TENSOR_B_RE.eval(eta), TENSOR_B_IM.eval(eta));
    let r = geom.unit_vector();
    let three_halves: T = lit(1.5);
    Ok(Matrix3::from_fn(|k, l| {
        let delta = if k == l { a } else { Complex::new(T::zero(), T::zero()) };
        (delta - b * (r[k] * r[l])) * three_halves
    }))
}

/// `Ω_ij = d_i^T Re(χ) d_j^*`, `Γ_ij = d_i^T Im(χ) d_j^*`.
pub fn couplings_from_tensor<T: Real>(geom: &Geometry<T>) -> Result<CouplingSet<T>> {
    let chi = chi_tensor(geom)?;
    let dipoles = DipoleSet::standard();
    let re = chi.map(|z| z.re);
    let im = chi.map(|z| z.im);
    let omega = Matrix3::from_fn(|i, j| dipoles.contract(&re, i, j));
    let gamma_cross = Matrix3::from_fn(|i, j| dipoles.contract(&im, i, j));
    Ok(CouplingSet {
        omega,
        gamma_cross,
        omega_f: SHIFT_F.eval(geom.eta),
        omega_n: SHIFT_N.eval(geom.eta),
        decay: collective_decay_rates(geom.eta)?,
    })
}

/// The explicit trigonometric expressions for `Ω_ij` and `Γ_ij`.
///
/// The `cot θ` factors are folded into `sin θ cos θ` so the forms stay regular
/// for atoms aligned with the quantization axis.
pub fn closed_form_couplings<T: Real>(geom: &Geometry<T>) -> Result<CouplingSet<T>> {
    geom.require_positive_eta("closed_form_couplings")?;
    let eta = geom.eta;
    let w = OMEGA_W.eval(eta);
    let p = OMEGA_P.eval(eta);
    let g = GAMMA_G.eval(eta);
    let q = GAMMA_Q.eval(eta);
    Ok(CouplingSet {
        omega: explicit_matrix(w, p, geom),
        gamma_cross: explicit_matrix(g, q, geom),
        omega_f: SHIFT_F.eval(eta),
        omega_n: SHIFT_N.eval(eta),
        decay: collective_decay_rates(eta)?,
    })
}

fn explicit_matrix<T: Real>(w: T, p: T, geom: &Geometry<T>) -> Matrix3<Complex<T>> {
    let (st, ct) = geom.theta.sin_cos();
    let two: T = lit(2.0);
    let cos2t = ct * ct - st * st;
    let sqrt2 = two.sqrt();

    let m11 = p + w * cos2t / two;
    // X₃₁ = w sin²θ e^{-2iφ}
    let m31 = cis(-two * geom.phi) * (w * st * st);
    // X₂₁ = −√2 cot θ X₃₁ e^{iφ} = −√2 w sinθ cosθ e^{-iφ}
    let m21 = cis(-geom.phi) * (-sqrt2 * w * st * ct);
    // X₂₂ = X₁₁ − (2cot²θ − 1) X₃₁ e^{2iφ} = X₁₁ − w (2cos²θ − sin²θ)
    let m22 = m11 - w * (two * ct * ct - st * st);
    let m32 = -m21;

    let d11 = real(m11);
    let d22 = real(m22);
    Matrix3::new(
        d11, m21.conj(), m31.conj(),
        m21, d22, m32.conj(),
        m31, m32, d11,
    )
}

/// Energy shifts `(Ω_F, Ω_N)` of the antisymmetric eigenstates.
pub fn energy_shifts<T: Real>(eta: T) -> Result<(T, T)> {
    if eta <= T::zero() {
        return Err(domain("energy_shifts", format!("eta = {eta} must be positive")));
    }
    Ok((SHIFT_F.eval(eta), SHIFT_N.eval(eta)))
}

/// `Γ_a^i` and `Γ_s^i` for `i = 1, 2, 3` (`Γ^1 = Γ^2` identically).
pub fn collective_decay_rates<T: Real>(eta: T) -> Result<DecayRates<T>> {
    if eta <= T::zero() {
        return Err(domain("collective_decay_rates", format!("eta = {eta} must be positive")));
    }
    let a12 = RATE_A12.eval(eta);
    let s12 = RATE_S12.eval(eta);
    Ok(DecayRates {
        antisym: [a12, a12, RATE_A3.eval(eta)],
        sym: [s12, s12, RATE_S3.eval(eta)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, rel: f64, abs: f64) {
        assert!((a - b).abs() <= abs.max(rel * a.abs().max(b.abs())), "{a} vs {b}");
    }

    #[test]
    fn dipoles_are_orthonormal() {
        let d = DipoleSet::<f64>::standard();
        for i in 0..3 {
            for j in 0..3 {
                let ip = d.d[i].dotc(&d.d[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - expect).abs() < 1e-15 && ip.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn series_and_direct_agree_at_cutoff() {
        for ratio in [&RATE_A12, &RATE_A3, &RATE_S12, &RATE_S3, &GAMMA_G, &GAMMA_Q, &OMEGA_W, &SHIFT_F] {
            for eta in [0.3, 0.45, 0.5] {
                let s: f64 = ratio.series(eta);
                let d: f64 = ratio.direct(eta);
                close(s, d, 1e-12, 1e-13);
            }
        }
    }

    #[test]
    fn chi_rejects_nonpositive_eta() {
        let g = Geometry { eta: 0.0, theta: 1.0, phi: 0.0 };
        assert!(matches!(chi_tensor(&g), Err(crate::Error::Domain { .. })));
        let g = Geometry { eta: -1.0, theta: 1.0, phi: 0.0 };
        assert!(closed_form_couplings(&g).is_err());
        assert!(collective_decay_rates(-0.1).is_err());
    }

    #[test]
    fn chi_is_symmetric_with_imaginary_part() {
        let g = Geometry::along_x(2.0 * PI * 0.3);
        let chi = chi_tensor(&g).unwrap();
        assert_eq!(chi, chi.transpose());
        assert!(chi.iter().any(|z| z.im.abs() > 1e-3));
    }

    #[test]
    fn chi_along_z_has_no_xy_component() {
        let g = Geometry::new(1.3, 0.0, 0.7).unwrap();
        let chi = chi_tensor(&g).unwrap();
        assert_eq!(chi[(0, 1)], Complex::new(0.0, 0.0));
    }

    #[test]
    fn tensor_route_matches_explicit_forms_in_plane() {
        let g = Geometry::along_x(2.0 * PI * 0.3);
        let a = couplings_from_tensor(&g).unwrap();
        let b = closed_form_couplings(&g).unwrap();
        for (i, j) in [(0, 0), (2, 0)] {
            close(a.omega[(i, j)].re, b.omega[(i, j)].re, 1e-12, 0.0);
            close(a.gamma_cross[(i, j)].re, b.gamma_cross[(i, j)].re, 1e-12, 0.0);
        }
    }

    #[test]
    fn cross_terms_vanish_along_z() {
        for theta in [0.0, PI] {
            let g = Geometry::new(0.9, theta, 0.3).unwrap();
            for cs in [couplings_from_tensor(&g).unwrap(), closed_form_couplings(&g).unwrap()] {
                for (i, j) in [(1, 0), (2, 0), (2, 1)] {
                    assert!(cs.omega[(i, j)].norm() < 1e-14);
                    assert!(cs.gamma_cross[(i, j)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn short_distance_limits() {
        let g = Geometry::along_x(1e-6);
        let cs = closed_form_couplings(&g).unwrap();
        close(cs.gamma_cross[(0, 0)].re, 1.0, 0.0, 1e-10);
        assert!(cs.gamma_cross[(2, 0)].norm() < 1e-10);
        let r = collective_decay_rates(1e-6_f64).unwrap();
        for i in 0..3 {
            assert!(r.antisym[i].abs() < 1e-10);
            close(r.sym[i], 2.0, 0.0, 1e-10);
        }
    }

    #[test]
    fn shift_envelopes() {
        // Ω_N falls off as 1/η² and Ω_F as 1/η far from the origin.
        let mut max_n = 0.0_f64;
        let mut max_f = 0.0_f64;
        for k in 0..2000 {
            let eta = 200.0 + k as f64 * 0.01;
            let (f, n) = energy_shifts(eta).unwrap();
            max_n = max_n.max((n * eta * eta).abs());
            max_f = max_f.max((f * eta).abs());
        }
        close(max_n, 3.0, 1e-3, 0.0);
        close(max_f, 1.5, 1e-3, 0.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::new(1.0, -0.1, 0.0).is_err());
        assert!(Geometry::new(1.0, 0.5, 2.0 * PI).is_err());
        assert!(Geometry::new(f64::NAN, 0.5, 0.0).is_err());
        let g = Geometry::from_r_over_lambda(0.1, FRAC_PI_2, 0.0).unwrap();
        close(g.eta, 2.0 * PI * 0.1, 1e-15, 1e-15);
    }

    #[test]
    fn single_precision_scalar() {
        let g = Geometry::<f32>::along_x(2.0 * std::f32::consts::PI * 0.1);
        let a = couplings_from_tensor(&g).unwrap();
        let b = closed_form_couplings(&g).unwrap();
        assert!((a.omega[(2, 0)] - b.omega[(2, 0)]).norm() < 1e-3);
        let c = closed_form_couplings(&Geometry::<f64>::along_x(2.0 * PI * 0.1)).unwrap();
        assert!((b.decay.antisym[0] as f64 - c.decay.antisym[0]).abs() < 1e-4);
    }
}
