//! Right-hand sides of the model hierarchy.
//!
//! Two families are provided. The *full* problem evolves the orbit and the
//! rotations together through the shared potential; the *Keplerian* problem
//! freezes the orbit on the analytic two-body solution and evolves only the
//! rotation angles. Either family can run conservatively, with the direct
//! tidal torque `-delta_j C_j (a/r)^6 (thetadot_j - fdot)`, or with its
//! orbit-averaged form `-gammabar_j (thetadot_j - mubar_j)`.
//!
//! Note on the averaged torque: each body's drag acts on its own rotation
//! rate, `-gammabar_j (thetadot_j - mubar_j)` with no cross terms; that is
//! what the orbit average of the instantaneous torque produces (the test
//! suite verifies it by one-period quadrature), so a body-2 torque written
//! against `thetadot_1` would be inconsistent with the unaveraged model.

use crate::bodies::BodyPairParams;
use crate::kepler::kepler_state;
use crate::potential::{grad_exact, v_total, Coupling, PotentialInput};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("separation must be positive, got r = {0}")]
    NonPositiveSeparation(f64),
    #[error("instantaneous semimajor axis is not positive (a = {0}): orbit is unbound")]
    Unbound(f64),
    #[error("orbital-element denominator is zero (parabolic state)")]
    ZeroDenominator,
    #[error("dissipative constant must be nonnegative, got {0}")]
    NegativeDissipation(f64),
    #[error("eccentricity must satisfy 0 <= e < 1, got {0}")]
    EccentricityOutOfRange(f64),
}

/// Phase point of the full problem in polar orbital coordinates plus the two
/// rotation states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState {
    pub r: f64,
    pub f: f64,
    pub pr: f64,
    pub pf: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl FullState {
    pub fn to_array(self) -> [f64; 8] {
        [
            self.r,
            self.f,
            self.pr,
            self.pf,
            self.theta1,
            self.theta2,
            self.p1,
            self.p2,
        ]
    }

    pub fn from_array(y: &[f64; 8]) -> Self {
        Self {
            r: y[0],
            f: y[1],
            pr: y[2],
            pf: y[3],
            theta1: y[4],
            theta2: y[5],
            p1: y[6],
            p2: y[7],
        }
    }

    /// Full-problem initial condition: orbit at the pericenter of the
    /// reference ellipse, spins from the given seed.
    pub fn at_pericenter(params: &BodyPairParams, spin: &SpinState) -> Self {
        Self {
            r: params.a0 * (1.0 - params.e0),
            f: 0.0,
            pr: 0.0,
            pf: params.reference_pf(),
            theta1: spin.theta1,
            theta2: spin.theta2,
            p1: spin.p1,
            p2: spin.p2,
        }
    }
}

/// Rotation state of the Keplerian problem (the orbit is a function of time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub theta1: f64,
    pub theta2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl SpinState {
    pub fn to_array(self) -> [f64; 4] {
        [self.theta1, self.theta2, self.p1, self.p2]
    }

    pub fn from_array(y: &[f64; 4]) -> Self {
        Self {
            theta1: y[0],
            theta2: y[1],
            p1: y[2],
            p2: y[3],
        }
    }
}

/// Orbit-averaged dissipation coefficients of both bodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragedCoefficients {
    pub gammabar1: f64,
    pub gammabar2: f64,
    pub mubar1: f64,
    pub mubar2: f64,
}

/// Eccentricity factors of the averaged MacDonald torque:
/// `<(a/r)^6> = (1-e^2)^(-9/2) (1 + 3 e^2 + 3/8 e^4)` and the drift frequency
/// `mubar = n (1-e^2)^(-3/2) (1 + 15/2 e^2 + 45/8 e^4 + 5/16 e^6) / (1 + 3 e^2 + 3/8 e^4)`
/// with `n = 1`.
pub fn eccentricity_factors(e: f64) -> Result<(f64, f64), DynamicsError> {
    if !(0.0..1.0).contains(&e) {
        return Err(DynamicsError::EccentricityOutOfRange(e));
    }
    let e2 = e * e;
    let one_m = 1.0 - e2;
    let poly_gamma = 1.0 + 3.0 * e2 + 0.375 * e2 * e2;
    let avg_ar6 = poly_gamma / one_m.powf(4.5);
    let poly_mu = 1.0 + 7.5 * e2 + 45.0 / 8.0 * e2 * e2 + 5.0 / 16.0 * e2 * e2 * e2;
    let mubar = poly_mu / (one_m.powf(1.5) * poly_gamma);
    Ok((avg_ar6, mubar))
}

/// Averaged dissipation coefficients for eccentricity `e` and dissipative
/// constants `(delta_j, C_j)`. `mubar1 = mubar2` always.
pub fn averaged_dissipation_at(
    e: f64,
    delta1: f64,
    delta2: f64,
    c1: f64,
    c2: f64,
) -> Result<AveragedCoefficients, DynamicsError> {
    for d in [delta1, delta2] {
        if d < 0.0 {
            return Err(DynamicsError::NegativeDissipation(d));
        }
    }
    let (avg_ar6, mubar) = eccentricity_factors(e)?;
    Ok(AveragedCoefficients {
        gammabar1: delta1 * c1 * avg_ar6,
        gammabar2: delta2 * c2 * avg_ar6,
        mubar1: mubar,
        mubar2: mubar,
    })
}

/// Averaged dissipation coefficients on the reference orbit of `params`.
pub fn averaged_dissipation(
    params: &BodyPairParams,
    delta1: f64,
    delta2: f64,
) -> Result<AveragedCoefficients, DynamicsError> {
    averaged_dissipation_at(params.e0, delta1, delta2, params.c1, params.c2)
}

/// Tidal dissipation selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DissipationSpec {
    /// Conservative dynamics.
    None,
    /// Instantaneous MacDonald torque `-delta_j C_j (a/r)^6 (thetadot_j - fdot)`.
    /// In the full problem `a` is recomputed from the state at every
    /// derivative evaluation.
    Direct { delta1: f64, delta2: f64 },
    /// Orbit-averaged torque `-gammabar_j (thetadot_j - mubar_j)` with the
    /// coefficients frozen on the reference orbit.
    Averaged {
        delta1: f64,
        delta2: f64,
        gammabar1: f64,
        gammabar2: f64,
        mubar1: f64,
        mubar2: f64,
    },
}

impl DissipationSpec {
    pub fn none() -> Self {
        DissipationSpec::None
    }

    pub fn direct(delta1: f64, delta2: f64) -> Result<Self, DynamicsError> {
        for d in [delta1, delta2] {
            if d < 0.0 {
                return Err(DynamicsError::NegativeDissipation(d));
            }
        }
        Ok(DissipationSpec::Direct { delta1, delta2 })
    }

    pub fn averaged(
        params: &BodyPairParams,
        delta1: f64,
        delta2: f64,
    ) -> Result<Self, DynamicsError> {
        let avg = averaged_dissipation(params, delta1, delta2)?;
        Ok(DissipationSpec::Averaged {
            delta1,
            delta2,
            gammabar1: avg.gammabar1,
            gammabar2: avg.gammabar2,
            mubar1: avg.mubar1,
            mubar2: avg.mubar2,
        })
    }

    /// Averaged dissipation specified through the effective rates
    /// `gammabar_j`; the underlying `delta_j` are recovered by inverting the
    /// orbit average on the reference orbit.
    pub fn averaged_from_rates(
        params: &BodyPairParams,
        gammabar1: f64,
        gammabar2: f64,
    ) -> Result<Self, DynamicsError> {
        for g in [gammabar1, gammabar2] {
            if g < 0.0 {
                return Err(DynamicsError::NegativeDissipation(g));
            }
        }
        let (avg_ar6, _) = eccentricity_factors(params.e0)?;
        Self::averaged(
            params,
            gammabar1 / (params.c1 * avg_ar6),
            gammabar2 / (params.c2 * avg_ar6),
        )
    }

    /// Direct dissipation specified through the effective averaged rates.
    pub fn direct_from_rates(
        params: &BodyPairParams,
        gammabar1: f64,
        gammabar2: f64,
    ) -> Result<Self, DynamicsError> {
        for g in [gammabar1, gammabar2] {
            if g < 0.0 {
                return Err(DynamicsError::NegativeDissipation(g));
            }
        }
        let (avg_ar6, _) = eccentricity_factors(params.e0)?;
        Self::direct(
            gammabar1 / (params.c1 * avg_ar6),
            gammabar2 / (params.c2 * avg_ar6),
        )
    }

    pub fn deltas(&self) -> (f64, f64) {
        match *self {
            DissipationSpec::None => (0.0, 0.0),
            DissipationSpec::Direct { delta1, delta2 }
            | DissipationSpec::Averaged { delta1, delta2, .. } => (delta1, delta2),
        }
    }

    /// Effective averaged rates of this spec at eccentricity `e`
    /// (`(0, 0, mubar, mubar)` in the conservative case).
    pub fn averaged_rates_at(
        &self,
        e: f64,
        c1: f64,
        c2: f64,
    ) -> Result<AveragedCoefficients, DynamicsError> {
        match *self {
            DissipationSpec::None => averaged_dissipation_at(e, 0.0, 0.0, c1, c2),
            DissipationSpec::Direct { delta1, delta2 } => {
                averaged_dissipation_at(e, delta1, delta2, c1, c2)
            }
            DissipationSpec::Averaged { delta1, delta2, .. } => {
                averaged_dissipation_at(e, delta1, delta2, c1, c2)
            }
        }
    }
}

/// Instantaneous semimajor axis from the orbital part of a full-problem
/// state, derived from the orbital energy:
/// `a = -a0^3 M1^2 M2^2 r^2 / (pf^2 - 2 a0^3 M1^2 M2^2 r + pr^2 r^2)`.
pub fn instantaneous_a(params: &BodyPairParams, state: &FullState) -> Result<f64, DynamicsError> {
    if state.r <= 0.0 {
        return Err(DynamicsError::NonPositiveSeparation(state.r));
    }
    let gmu2 = params.g() * params.mu() * params.mu();
    let den = state.pf * state.pf - 2.0 * gmu2 * state.r + state.pr * state.pr * state.r * state.r;
    if den == 0.0 {
        return Err(DynamicsError::ZeroDenominator);
    }
    let a = -gmu2 * state.r * state.r / den;
    if !a.is_finite() {
        return Err(DynamicsError::ZeroDenominator);
    }
    if a <= 0.0 {
        return Err(DynamicsError::Unbound(a));
    }
    Ok(a)
}

/// Osculating `(a, e)` of a full-problem state.
///
/// The eccentricity comes from the angular-momentum relation
/// `pf = mu sqrt(G (M1+M2) a (1 - e^2))`; radicand values within `1e-14`
/// below zero are circular-orbit roundoff and clamp to `e = 0`.
pub fn orbital_elements(
    params: &BodyPairParams,
    state: &FullState,
) -> Result<(f64, f64), DynamicsError> {
    let a = instantaneous_a(params, state)?;
    let mu = params.mu();
    // M1 + M2 = 1 in normalized units.
    let radicand = 1.0 - state.pf * state.pf / (mu * mu * params.g() * a);
    let e = if radicand <= 0.0 {
        0.0
    } else {
        radicand.sqrt().min(1.0 - f64::EPSILON)
    };
    Ok((a, e))
}

/// Hamiltonian of the full problem.
pub fn hamiltonian(params: &BodyPairParams, coupling: Coupling, state: &FullState) -> f64 {
    let mu = params.mu();
    let kinetic = state.pr * state.pr / (2.0 * mu)
        + state.pf * state.pf / (2.0 * mu * state.r * state.r)
        + state.p1 * state.p1 / (2.0 * params.c1)
        + state.p2 * state.p2 / (2.0 * params.c2);
    let input = PotentialInput {
        theta1: state.theta1,
        theta2: state.theta2,
        r: state.r,
        f: state.f,
    };
    kinetic + v_total(params, &input, coupling).expect("r > 0 along trajectories")
}

/// Total angular momentum `P_f = pf + p1 + p2`, conserved by the
/// conservative full problem.
#[inline]
pub fn total_angular_momentum(state: &FullState) -> f64 {
    state.pf + state.p1 + state.p2
}

/// Time derivative of the full-problem state.
pub fn rhs_full(
    params: &BodyPairParams,
    coupling: Coupling,
    diss: &DissipationSpec,
    state: &FullState,
) -> Result<FullState, DynamicsError> {
    if state.r <= 0.0 {
        return Err(DynamicsError::NonPositiveSeparation(state.r));
    }
    let mu = params.mu();
    let input = PotentialInput {
        theta1: state.theta1,
        theta2: state.theta2,
        r: state.r,
        f: state.f,
    };
    let grad = grad_exact(params, &input, coupling)
        .map_err(|_| DynamicsError::NonPositiveSeparation(state.r))?;

    let fdot = state.pf / (mu * state.r * state.r);
    let theta1_dot = state.p1 / params.c1;
    let theta2_dot = state.p2 / params.c2;

    let (torque1, torque2) = match *diss {
        DissipationSpec::None => (0.0, 0.0),
        DissipationSpec::Direct { delta1, delta2 } => {
            let a = instantaneous_a(params, state)?;
            let ar6 = (a / state.r).powi(6);
            (
                delta1 * params.c1 * ar6 * (theta1_dot - fdot),
                delta2 * params.c2 * ar6 * (theta2_dot - fdot),
            )
        }
        DissipationSpec::Averaged {
            gammabar1,
            gammabar2,
            mubar1,
            mubar2,
            ..
        } => (
            gammabar1 * (theta1_dot - mubar1),
            gammabar2 * (theta2_dot - mubar2),
        ),
    };

    Ok(FullState {
        r: state.pr / mu,
        f: fdot,
        pr: state.pf * state.pf / (mu * state.r * state.r * state.r) - grad.dr,
        pf: -grad.df,
        theta1: theta1_dot,
        theta2: theta2_dot,
        p1: -grad.dtheta1 - torque1,
        p2: -grad.dtheta2 - torque2,
    })
}

/// Time derivative of the Keplerian-problem spin state at time `t`.
///
/// The orbit is the analytic Kepler solution of the reference ellipse; only
/// the coupling part of the potential torques the rotations (`V0` does not
/// depend on the angles).
pub fn rhs_keplerian(
    params: &BodyPairParams,
    coupling: Coupling,
    diss: &DissipationSpec,
    t: f64,
    state: &SpinState,
) -> SpinState {
    let ks = kepler_state(params, t);
    let input = PotentialInput {
        theta1: state.theta1,
        theta2: state.theta2,
        r: ks.r,
        f: ks.f,
    };
    let grad = grad_exact(params, &input, coupling).expect("Kepler solution keeps r > 0");

    let theta1_dot = state.p1 / params.c1;
    let theta2_dot = state.p2 / params.c2;

    let (torque1, torque2) = match *diss {
        DissipationSpec::None => (0.0, 0.0),
        DissipationSpec::Direct { delta1, delta2 } => {
            let ar6 = (params.a0 / ks.r).powi(6);
            (
                delta1 * params.c1 * ar6 * (theta1_dot - ks.fdot),
                delta2 * params.c2 * ar6 * (theta2_dot - ks.fdot),
            )
        }
        DissipationSpec::Averaged {
            gammabar1,
            gammabar2,
            mubar1,
            mubar2,
            ..
        } => (
            gammabar1 * (theta1_dot - mubar1),
            gammabar2 * (theta2_dot - mubar2),
        ),
    };

    SpinState {
        theta1: theta1_dot,
        theta2: theta2_dot,
        p1: -grad.dtheta1 - torque1,
        p2: -grad.dtheta2 - torque2,
    }
}

/// Hamiltonian of the Keplerian problem (explicitly time dependent, so not
/// conserved; used for consistency checks only).
pub fn hamiltonian_keplerian(
    params: &BodyPairParams,
    coupling: Coupling,
    t: f64,
    state: &SpinState,
) -> f64 {
    let ks = kepler_state(params, t);
    let input = PotentialInput {
        theta1: state.theta1,
        theta2: state.theta2,
        r: ks.r,
        f: ks.f,
    };
    let mut v = crate::potential::v2_exact(params, &input).expect("r > 0");
    if coupling == Coupling::SpinSpin {
        v += crate::potential::v4_exact(params, &input).expect("r > 0");
    }
    state.p1 * state.p1 / (2.0 * params.c1) + state.p2 * state.p2 / (2.0 * params.c2) + v
}

/// Full-problem right-hand side as an array function for the integrator.
/// Invalid regions (non-positive separation or unbound instantaneous orbit)
/// map to NaN derivatives, which the step controller rejects.
pub fn full_system(
    params: BodyPairParams,
    coupling: Coupling,
    diss: DissipationSpec,
) -> impl Fn(f64, &[f64; 8]) -> [f64; 8] {
    move |_t, y| {
        let state = FullState::from_array(y);
        match rhs_full(&params, coupling, &diss, &state) {
            Ok(d) => d.to_array(),
            Err(_) => [f64::NAN; 8],
        }
    }
}

/// Keplerian-problem right-hand side as an array function for the integrator.
pub fn keplerian_system(
    params: BodyPairParams,
    coupling: Coupling,
    diss: DissipationSpec,
) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |t, y| {
        let state = SpinState::from_array(y);
        rhs_keplerian(&params, coupling, &diss, t, &state).to_array()
    }
}
