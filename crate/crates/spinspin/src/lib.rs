//! Rotational-orbital dynamics of two gravitationally interacting triaxial
//! ellipsoids.
//!
//! The crate implements the planar model hierarchy for a binary of rigid
//! ellipsoids whose spin axes are perpendicular to the orbit plane:
//!
//! * **Keplerian spin-orbit** - the orbit is the analytic two-body ellipse
//!   and each body's rotation couples only to the orbit (`V2`).
//! * **Keplerian spin-spin** - the rotations also couple to each other
//!   through the next term of the potential (`V4`).
//! * **Full spin-orbit / spin-spin** - the orbit itself evolves together
//!   with the rotations through the shared potential.
//!
//! Each model runs conservatively or with tidal dissipation (instantaneous
//! MacDonald torque or its orbit average). On top of the propagation layer
//! the crate provides resonant averaged models for the (1:1,1:1), (3:2,3:2)
//! and (1:1,3:2) spin-spin resonances: coefficient tables, equilibrium
//! solving, 4x4 linearization, eigenvalues and `(a, e)` stability maps, plus
//! Poincare-section generation for phase portraits and long dissipative
//! runs.
//!
//! Everything works in normalized units: `M1 + M2 = 1`, `C1 + C2 = 1`,
//! reference orbital period `2*pi` (so the mean motion is 1 and `G = a0^3`).

pub mod bodies;
pub mod config;
pub mod dynamics;
pub mod integrate;
pub mod kepler;
pub mod poincare;
pub mod potential;
pub mod series;
pub mod stability;

pub use bodies::{derive, BodyPairParams, DerivedParams, ParamsError};
pub use dynamics::{
    averaged_dissipation, hamiltonian, orbital_elements, rhs_full, rhs_keplerian,
    total_angular_momentum, DissipationSpec, DynamicsError, FullState, SpinState,
};
pub use integrate::{
    propagate, propagate_with_events, Event, EventDirection, IntegrateError, IntegratorConfig,
    Method, Trajectory,
};
pub use kepler::{kepler_state, solve_kepler, KeplerError, KeplerState, TWO_PI};
pub use potential::{grad_exact, v2_exact, v4_exact, Coupling, PotentialInput};
pub use series::v_expanded;
pub use stability::{
    coefficients, equilibria, linearize, stability_map, Equilibrium, ResonanceCoefficients,
    ResonanceSpec, StabilityReport,
};
