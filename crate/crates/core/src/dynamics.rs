//! Time evolution of the two-atom density operator.
//!
//! The master equation is integrated on `vec(ρ)` with an adaptive
//! Dormand-Prince 5(4) scheme that lands exactly on every output time, or by
//! repeated application of `exp(L Δt)` for static generators.

use std::sync::Arc;

use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{ground_ket, outer, Ket, Operator, DIM};
use crate::couplings::{closed_form_couplings, Geometry};
use crate::dfs::dissipator_null_space;
use crate::error::{domain, Error, Result};
use crate::hamiltonians::{
    build_dissipator, build_h_laser, build_h_omega, build_liouvillian, unvectorize, vectorize,
    DriveConfig, Superoperator, SUPER_DIM,
};
use crate::scalar::{lit, real, to_f64, Real};
use crate::spectral::{psi_state, Symmetry};

/// Validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real>(Operator<T>);

/// Deviations of a density operator from the physical constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics<T> {
    pub trace_error: T,
    pub hermiticity_error: T,
    pub min_eigenvalue: T,
}

impl<T: Real> Diagnostics<T> {
    /// Trace to `1e-9`, Hermiticity to `1e-10`, eigenvalues above `−1e-8`.
    pub fn is_physical(&self) -> bool {
        self.trace_error <= lit(1e-9) && self.hermiticity_error <= lit(1e-10) && self.min_eigenvalue >= lit(-1e-8)
    }
}

pub fn diagnostics<T: Real>(rho: &Operator<T>) -> Diagnostics<T> {
    let herm = (rho - rho.adjoint()).norm();
    let sym = (rho + rho.adjoint()) * real(lit::<T>(0.5));
    let min = sym.symmetric_eigenvalues().iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    Diagnostics { trace_error: (rho.trace() - real(T::one())).norm_sqr().sqrt(), hermiticity_error: herm, min_eigenvalue: min }
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(rho: Operator<T>) -> Result<Self> {
        let d = diagnostics(&rho);
        if !d.is_physical() {
            return Err(Error::Invalid(format!(
                "not a density matrix: trace error {}, hermiticity error {}, min eigenvalue {}",
                d.trace_error, d.hermiticity_error, d.min_eigenvalue
            )));
        }
        Ok(Self(rho))
    }

    /// Wraps without checks; used for integrator output.
    pub fn from_unchecked(rho: Operator<T>) -> Self {
        Self(rho)
    }

    pub fn pure(psi: &Ket<T>) -> Result<Self> {
        let n = psi.norm();
        if (n - T::one()).abs() > lit(1e-10) {
            return Err(Error::NotNormalized { norm: to_f64(n) });
        }
        Ok(Self(outer(psi, psi)))
    }

    pub fn ground() -> Self {
        let g = ground_ket();
        Self(outer(&g, &g))
    }

    pub fn matrix(&self) -> &Operator<T> {
        &self.0
    }

    pub fn into_inner(self) -> Operator<T> {
        self.0
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn population(&self, psi: &Ket<T>) -> T {
        psi.dotc(&(self.0 * psi)).re
    }

    /// `⟨φ|ρ|ψ⟩`.
    pub fn coherence(&self, phi: &Ket<T>, psi: &Ket<T>) -> Complex<T> {
        phi.dotc(&(self.0 * psi))
    }

    pub fn diagnostics(&self) -> Diagnostics<T> {
        diagnostics(&self.0)
    }
}

/// Time-dependent scalar multiplying one generator term.
pub type Modulation<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `L(t) = L₀ + Σ_k f_k(t) L_k`.
#[derive(Clone)]
pub struct Generator<T: Real> {
    base: Superoperator<T>,
    terms: Vec<(Superoperator<T>, Modulation<T>)>,
}

impl<T: Real> std::fmt::Debug for Generator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Generator").field("modulated_terms", &self.terms.len()).finish()
    }
}

impl<T: Real> Generator<T> {
    pub fn constant(l: Superoperator<T>) -> Self {
        Self { base: l, terms: Vec::new() }
    }

    pub fn with_term(mut self, l: Superoperator<T>, f: Modulation<T>) -> Self {
        self.terms.push((l, f));
        self
    }

    pub fn is_static(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn base(&self) -> &Superoperator<T> {
        &self.base
    }

    /// `out = L(t) y`.
    fn apply(&self, t: T, y: &DVector<Complex<T>>, out: &mut DVector<Complex<T>>) {
        out.gemv(real(T::one()), &self.base, y, real(T::zero()));
        for (l, f) in &self.terms {
            out.gemv(real(f(t)), l, y, real(T::one()));
        }
    }

    /// `L(t)` as a dense matrix.
    pub fn at(&self, t: T) -> Superoperator<T> {
        let mut l = self.base.clone();
        for (m, f) in &self.terms {
            l += m * real(f(t));
        }
        l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest permitted step; `0` means unbounded.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, max_step: 0.0, max_steps: 10_000_000 }
    }
}

/// Snapshots of `ρ(t)` on a monotone time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix<T>> {
        self.states.last()
    }

    pub fn populations(&self, psi: &Ket<T>) -> Vec<T> {
        self.states.iter().map(|r| r.population(psi)).collect()
    }

    /// Worst-case constraint violations over all snapshots.
    pub fn worst_diagnostics(&self) -> Diagnostics<T> {
        let mut w = Diagnostics { trace_error: T::zero(), hermiticity_error: T::zero(), min_eigenvalue: T::max_value().unwrap() };
        for s in &self.states {
            let d = s.diagnostics();
            w.trace_error = w.trace_error.max(d.trace_error);
            w.hermiticity_error = w.hermiticity_error.max(d.hermiticity_error);
            w.min_eigenvalue = w.min_eigenvalue.min(d.min_eigenvalue);
        }
        w
    }

    /// Appends another trajectory, dropping its first snapshot if it repeats the last time.
    pub fn extend(&mut self, other: Trajectory<T>) {
        let skip = match (self.times.last(), other.times.first()) {
            (Some(a), Some(b)) if *a == *b => 1,
            _ => 0,
        };
        self.times.extend(other.times.into_iter().skip(skip));
        self.states.extend(other.states.into_iter().skip(skip));
    }
}

/// `0, dt, 2dt, …` up to and including `t_end`.
pub fn output_grid<T: Real>(t_end: T, dt_out: T) -> Result<Vec<T>> {
    if !(t_end >= T::zero()) || !(dt_out > T::zero()) {
        return Err(domain("output_grid", format!("need t_end >= 0 and dt_out > 0, got {t_end}, {dt_out}")));
    }
    let n = (t_end / dt_out + lit(1e-9)).floor().to_usize().unwrap_or(0);
    let mut g: Vec<T> = (0..=n).map(|k| dt_out * lit(k as f64)).collect();
    let last = *g.last().unwrap();
    if t_end - last > dt_out * lit(1e-9) {
        g.push(t_end);
    } else {
        *g.last_mut().unwrap() = t_end;
    }
    Ok(g)
}

/// Integrates from `rho0` at `t = 0`, recording `ρ` every `dt_out` up to `t_end`.
pub fn evolve<T: Real>(
    gen: &Generator<T>,
    rho0: &DensityMatrix<T>,
    t_end: T,
    dt_out: T,
    opts: &IntegratorOptions,
) -> Result<Trajectory<T>> {
    let grid = output_grid(t_end, dt_out)?;
    evolve_at(gen, rho0, &grid, opts)
}

/// Integrates through the ascending `times`, starting from `rho0` at `times[0]`.
pub fn evolve_at<T: Real>(
    gen: &Generator<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
    opts: &IntegratorOptions,
) -> Result<Trajectory<T>> {
    if times.is_empty() {
        return Ok(Trajectory { times: Vec::new(), states: Vec::new() });
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(domain("evolve", "output times must be ascending"));
    }
    let mut stepper = Dopri5::new(gen, vectorize(rho0.matrix()), times[0], opts);
    let mut states = vec![rho0.clone()];
    for &t in &times[1..] {
        stepper.advance_to(t)?;
        states.push(DensityMatrix::from_unchecked(hermitize(&unvectorize(&stepper.y))));
    }
    Ok(Trajectory { times: times.to_vec(), states })
}

/// Runs consecutive `(generator, duration)` pieces, each sampled every `dt_out`
/// from its own start; piece boundaries are always recorded.
pub fn evolve_piecewise<T: Real>(
    pieces: &[(Generator<T>, T)],
    rho0: &DensityMatrix<T>,
    dt_out: T,
    opts: &IntegratorOptions,
) -> Result<Trajectory<T>> {
    let mut rho = rho0.clone();
    let mut t0 = T::zero();
    let mut trajectory = Trajectory { times: vec![t0], states: vec![rho.clone()] };
    for (gen, duration) in pieces {
        let times: Vec<T> = output_grid(*duration, dt_out)?.into_iter().map(|t| t0 + t).collect();
        let part = evolve_at(gen, &rho, &times, opts)?;
        rho = part.last().cloned().unwrap_or(rho);
        t0 += *duration;
        trajectory.extend(part);
    }
    Ok(trajectory)
}

/// Propagates with `exp(L Δt)`; only for static generators on a uniform grid.
pub fn evolve_expm<T: Real>(l: &Superoperator<T>, rho0: &DensityMatrix<T>, t_end: T, dt_out: T) -> Result<Trajectory<T>> {
    let grid = output_grid(t_end, dt_out)?;
    let step = (l * real(dt_out)).exp();
    let mut y = vectorize(rho0.matrix());
    let mut states = vec![rho0.clone()];
    for w in grid.windows(2) {
        let h = w[1] - w[0];
        y = if (h - dt_out).abs() <= dt_out * lit(1e-9) { &step * &y } else { (l * real(h)).exp() * &y };
        states.push(DensityMatrix::from_unchecked(hermitize(&unvectorize(&y))));
    }
    Ok(Trajectory { times: grid, states })
}

fn hermitize<T: Real>(m: &Operator<T>) -> Operator<T> {
    (m + m.adjoint()) * real(lit::<T>(0.5))
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri5<'a, T: Real> {
    gen: &'a Generator<T>,
    y: DVector<Complex<T>>,
    t: T,
    h: T,
    k: [DVector<Complex<T>>; 7],
    fsal_valid: bool,
    opts: IntegratorOptions,
    steps: usize,
}

impl<'a, T: Real> Dopri5<'a, T> {
    fn new(gen: &'a Generator<T>, y: DVector<Complex<T>>, t: T, opts: &IntegratorOptions) -> Self {
        let zero = || DVector::zeros(SUPER_DIM);
        Self {
            gen,
            y,
            t,
            h: T::zero(),
            k: std::array::from_fn(|_| zero()),
            fsal_valid: false,
            opts: *opts,
            steps: 0,
        }
    }

    fn initial_step(&mut self) -> T {
        // Hairer-Wanner starting step heuristic.
        let rtol: T = lit(self.opts.rtol);
        let atol: T = lit(self.opts.atol);
        let mut f0 = DVector::zeros(SUPER_DIM);
        self.gen.apply(self.t, &self.y, &mut f0);
        let scale = |v: &DVector<Complex<T>>, y: &DVector<Complex<T>>| {
            let mut s = T::zero();
            for (a, b) in v.iter().zip(y.iter()) {
                let w = atol + rtol * b.norm_sqr().sqrt();
                let r = a.norm_sqr().sqrt() / w;
                s += r * r;
            }
            (s / lit(SUPER_DIM as f64)).sqrt()
        };
        let d0 = scale(&self.y, &self.y);
        let d1 = scale(&f0, &self.y);
        let small: T = lit(1e-5);
        let h0 = if d0 < small || d1 < small { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
        let y1 = &self.y + &f0 * real(h0);
        let mut f1 = DVector::zeros(SUPER_DIM);
        self.gen.apply(self.t + h0, &y1, &mut f1);
        let d2 = scale(&(&f1 - &f0), &self.y) / h0;
        let m = d1.max(d2);
        let h1 = if m <= lit(1e-15) { (h0 * lit(1e-3)).max(lit(1e-6)) } else { (lit::<T>(0.01) / m).powf(lit(0.2)) };
        (h0 * lit(100.0)).min(h1)
    }

    fn advance_to(&mut self, t_out: T) -> Result<()> {
        if self.h == T::zero() {
            self.h = self.initial_step();
        }
        let max_step: T = lit(self.opts.max_step);
        let rtol: T = lit(self.opts.rtol);
        let atol: T = lit(self.opts.atol);
        let eps: T = lit(16.0 * f64::EPSILON);
        while self.t < t_out {
            if self.steps >= self.opts.max_steps {
                return Err(Error::TooManySteps { t: to_f64(self.t), max_steps: self.opts.max_steps });
            }
            let mut h = self.h;
            if max_step > T::zero() {
                h = h.min(max_step);
            }
            let remaining = t_out - self.t;
            let landing = h >= remaining;
            if landing {
                h = remaining;
            }
            if h <= eps * self.t.abs().max(T::one()) {
                if landing {
                    self.t = t_out;
                    break;
                }
                return Err(Error::StepSizeUnderflow { t: to_f64(self.t), h: to_f64(h) });
            }

            if !self.fsal_valid {
                let (k0, _) = self.k.split_at_mut(1);
                self.gen.apply(self.t, &self.y, &mut k0[0]);
            }
            let mut stage = DVector::zeros(SUPER_DIM);
            for s in 1..7 {
                stage.copy_from(&self.y);
                for (j, &a) in A[s].iter().enumerate().take(s) {
                    if a != 0.0 {
                        stage.axpy(real(h * lit(a)), &self.k[j], real(T::one()));
                    }
                }
                let ts = self.t + h * lit(C[s]);
                let (head, tail) = self.k.split_at_mut(s);
                let _ = head;
                self.gen.apply(ts, &stage, &mut tail[0]);
            }
            // stage now holds the fifth-order solution (row 6 of A).
            let mut err_sq = T::zero();
            for i in 0..SUPER_DIM {
                let mut e = Complex::new(T::zero(), T::zero());
                for (j, &ej) in E.iter().enumerate() {
                    if ej != 0.0 {
                        e += self.k[j][i] * real(lit::<T>(ej));
                    }
                }
                let e = e * real(h);
                let w = atol + rtol * self.y[i].norm_sqr().sqrt().max(stage[i].norm_sqr().sqrt());
                let r = e.norm_sqr().sqrt() / w;
                err_sq += r * r;
            }
            let err = (err_sq / lit(SUPER_DIM as f64)).sqrt();
            if !err.is_finite() {
                return Err(Error::NonFinite { t: to_f64(self.t) });
            }
            self.steps += 1;
            let fac = if err == T::zero() {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
            };
            if err <= T::one() {
                self.t = if landing { t_out } else { self.t + h };
                self.y.copy_from(&stage);
                let (first, rest) = self.k.split_at_mut(6);
                std::mem::swap(&mut first[0], &mut rest[0]);
                self.fsal_valid = true;
                // A landing step may be artificially short; keep the prior estimate.
                if !landing || fac < T::one() {
                    self.h = h * fac;
                }
            } else {
                self.h = h * fac.min(T::one());
                self.fsal_valid = true;
                // k[0] still holds L(t) y for the unchanged state.
            }
        }
        Ok(())
    }
}

/// The unique stationary state of `l`.
pub fn steady_state<T: Real>(l: &Superoperator<T>) -> Result<DensityMatrix<T>> {
    let mut basis = stationary_basis(l);
    match basis.len() {
        1 => Ok(DensityMatrix::from_unchecked(basis.pop().unwrap())),
        d => Err(Error::DegenerateKernel { dimension: d }),
    }
}

/// Kernel of `l` as Hermitian operators; the first carries unit trace when
/// possible and the rest are made traceless.
pub fn stationary_basis<T: Real>(l: &Superoperator<T>) -> Vec<Operator<T>> {
    let ns = dissipator_null_space(l, lit(1e-10));
    let mut ops: Vec<Operator<T>> = ns.basis;
    // Fold the phase freedom so that a single kernel vector becomes Hermitian with trace 1.
    if let Some(pos) = ops.iter().position(|o| o.trace().norm_sqr().sqrt() > lit(1e-8)) {
        ops.swap(0, pos);
        let tr0 = ops[0].trace();
        let first = ops[0] / tr0;
        for o in ops.iter_mut().skip(1) {
            let tr = o.trace();
            *o -= first * tr;
        }
        ops[0] = first;
    }
    ops.iter().map(hermitize).collect()
}

/// Laser polarization of the population scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    X,
    Y,
}

/// Result of [`drive_to_antisymmetric`].
#[derive(Debug, Clone)]
pub struct DrivenRun<T: Real> {
    pub trajectory: Trajectory<T>,
    /// Populations of `ψ_a^1, ψ_a^2, ψ_a^3` per snapshot.
    pub antisym_populations: Vec<[T; 3]>,
}

/// Generator for a CW laser drive of atoms in the geometry `geom`.
pub fn laser_generator<T: Real>(geom: &Geometry<T>, drive: &DriveConfig<T>) -> Result<Generator<T>> {
    let cs = closed_form_couplings(geom)?;
    let h = build_h_laser(drive, geom) + build_h_omega(&cs);
    Ok(Generator::constant(build_liouvillian(&h, &build_dissipator(&cs))))
}

/// Drives both atoms (aligned along `x`) from `|4,4⟩` with a resonant laser.
pub fn drive_to_antisymmetric<T: Real>(
    pol: Polarization,
    rabi: T,
    eta: T,
    t_end: T,
    dt_out: T,
    opts: &IntegratorOptions,
) -> Result<DrivenRun<T>> {
    let geom = Geometry::along_x(eta);
    let drive = match pol {
        Polarization::X => DriveConfig::x_polarized(rabi),
        Polarization::Y => DriveConfig::y_polarized(rabi),
    };
    let gen = laser_generator(&geom, &drive)?;
    let trajectory = evolve(&gen, &DensityMatrix::ground(), t_end, dt_out, opts)?;
    let kets: [Ket<T>; 3] = std::array::from_fn(|i| psi_state(Symmetry::Antisymmetric, i + 1, &geom));
    let antisym_populations =
        trajectory.states.iter().map(|r| std::array::from_fn(|i| r.population(&kets[i]))).collect();
    Ok(DrivenRun { trajectory, antisym_populations })
}

/// `c_∞/(2Γ_a) · (1 − e^{−2Γ_a t})`.
pub fn approx_antisym_population<T: Real>(t: T, gamma_a: T, c_inf: T) -> Result<T> {
    if !(gamma_a > T::zero()) {
        return Err(domain("approx_antisym_population", format!("gamma_a = {gamma_a} must be positive")));
    }
    let two: T = lit(2.0);
    Ok(c_inf / (two * gamma_a) * (T::one() - (-two * gamma_a * t).exp()))
}

/// Late-time feeding rate `C_a = 2Γ_a · p_st` from a stationary population.
pub fn feeding_rate<T: Real>(gamma_a: T, stationary_population: T) -> T {
    lit::<T>(2.0) * gamma_a * stationary_population
}

const _: () = assert!(DIM * DIM == SUPER_DIM);
