//! Simulation and verification library for the periodic b-family of
//! shallow-water equations (Camassa-Holm at b = 2, Degasperis-Procesi at
//! b = 3, arbitrary real b), in two equivalent realizations:
//!
//! * the Eulerian nonlocal evolution u_t = -A⁻¹[u(Au)_x + b(Au)u_x] on a
//!   Fourier collocation grid, and
//! * the Lagrangian geodesic flow (φ_t, v_t) = (v, -P_φ(v)) on the
//!   diffeomorphism group of the circle,
//!
//! together with executable diagnostics for the structural identities the
//! flow is supposed to respect: the transported-momentum conservation law
//! (m ∘ φ) φₓᵇ = m₀, the integrated regularity identity, H¹ energy (exactly
//! conserved when b = 2 and only then), mean conservation for every b, and
//! spectral-decay monitoring. The exponential map of the flow is exposed with
//! its scaling identity, its differential at 0, and a geodesic-shooting
//! inverse.

pub mod config;
pub mod diagnostics;
pub mod diffeo;
pub mod error;
pub mod euler;
pub mod expmap;
pub mod field;
pub mod geodesic;
pub mod oracles;
pub mod sampling;
pub mod spectral;

pub use config::{BParam, Guards, InitialCondition, Mode, PStrategy, SolverConfig, TerminationStatus};
pub use diffeo::Diffeo;
pub use error::{Error, Result};
pub use field::{GridField, Spectrum};
