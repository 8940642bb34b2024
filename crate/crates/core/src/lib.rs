//! Two dipole-dipole interacting `S₀ ↔ P₁` atoms: collective couplings, the
//! decoherence-free subspace spanned by the antisymmetric single-excitation
//! states, laser population of that subspace, and qubit control inside it.
//!
//! Every numerical routine is generic over the real scalar type (see
//! [`Real`]); the `*64` aliases below fix it to `f64`, which is what the
//! tolerances quoted throughout the tests assume.

pub mod basis;
pub mod control;
pub mod couplings;
pub mod dfs;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hamiltonians;
pub mod scalar;
pub mod spectral;

pub use couplings::{
    chi_tensor, closed_form_couplings, collective_decay_rates, couplings_from_tensor,
    energy_shifts, CouplingSet, DecayRates, DipoleSet, Geometry,
};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Geometry64 = Geometry<f64>;
pub type CouplingSet64 = CouplingSet<f64>;
pub type DecayRates64 = DecayRates<f64>;
pub type Ket64 = basis::Ket<f64>;
pub type Operator64 = basis::Operator<f64>;
pub type Superoperator64 = hamiltonians::Superoperator<f64>;
pub type DriveConfig64 = hamiltonians::DriveConfig<f64>;
pub type DensityMatrix64 = dynamics::DensityMatrix<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type Generator64 = dynamics::Generator<f64>;
pub type NullSpace64 = dfs::NullSpace<f64>;
pub type SubspaceBasis64 = dfs::SubspaceBasis<f64>;
pub type Spectrum64 = spectral::Spectrum<f64>;
pub type PlanarSpectrum64 = spectral::PlanarSpectrum<f64>;
pub type QubitHamiltonian64 = control::QubitHamiltonian<f64>;
pub type BlochVector64 = control::BlochVector<f64>;
pub type RfSegment64 = control::RfSegment<f64>;
