//! Cavity QED coupled to a topological atom mirror through a chiral waveguide.
//!
//! Single-excitation effective Hamiltonian, spectral analysis, dynamics,
//! scattering, dissipation channels and disorder ensembles.

pub mod config;
pub mod dissipation;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod response;
pub mod spectral;

pub use error::{Error, Result};
pub use hamiltonian::{
    build_full_heff, build_mirror_heff, full_heff, mirror_heff, Component, EffectiveHamiltonian,
    HamiltonianKind,
};
pub use params::{DisorderSpec, MirrorRealization, Preset, SystemParams};
