//! Mutual gravitational potential of the two ellipsoids.
//!
//! `V = V0 + V_per` with `V0 = -G M1 M2 / r` the point-mass part and
//! `V_per = V2 + chi V4` the shape coupling. `V2` keeps the rotation angles
//! of the two bodies in separate terms (spin-orbit coupling only); `V4`
//! couples them. All partial derivatives are hand-derived closed forms; a
//! finite-difference oracle in the tests guards against transcription errors.

use crate::bodies::BodyPairParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("separation must be positive, got r = {0}")]
    NonPositiveSeparation(f64),
}

/// Selects the coupling order of `V_per`: `V2` alone (spin-orbit) or
/// `V2 + V4` (spin-spin).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// chi = 0: each body couples to the orbit only.
    SpinOrbit,
    /// chi = 1: the rotational motions couple through `V4`.
    SpinSpin,
}

impl Coupling {
    #[inline]
    pub fn chi(self) -> f64 {
        match self {
            Coupling::SpinOrbit => 0.0,
            Coupling::SpinSpin => 1.0,
        }
    }

    pub fn from_chi(chi: u8) -> Option<Self> {
        match chi {
            0 => Some(Coupling::SpinOrbit),
            1 => Some(Coupling::SpinSpin),
            _ => None,
        }
    }
}

/// Evaluation point for the potential: rotation angles and orbital polar
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialInput {
    pub theta1: f64,
    pub theta2: f64,
    pub r: f64,
    pub f: f64,
}

/// Partial derivatives of the selected potential.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PotentialGradient {
    pub dtheta1: f64,
    pub dtheta2: f64,
    pub dr: f64,
    pub df: f64,
}

/// Keplerian part `V0 = -G M1 M2 / r`.
#[inline]
pub fn v0(params: &BodyPairParams, r: f64) -> f64 {
    -params.g() * params.mu() / r
}

/// Amplitudes of the `V4` bracket, independent of `(r, f, theta)`.
struct V4Amplitudes {
    constant: f64,
    /// cos(2 theta_1 - 2 f)
    a1: f64,
    /// cos(4 theta_1 - 4 f)
    b1: f64,
    /// cos(2 theta_2 - 2 f)
    a2: f64,
    /// cos(4 theta_2 - 4 f)
    b2: f64,
    /// cos(2 theta_1 - 2 theta_2)
    e: f64,
    /// cos(2 theta_1 + 2 theta_2 - 4 f)
    f: f64,
}

fn v4_amplitudes(p: &BodyPairParams) -> V4Amplitudes {
    let mass_ratio_21 = p.m2 / p.m1;
    let mass_ratio_12 = p.m1 / p.m2;
    V4Amplitudes {
        constant: 12.0 * p.q1 * p.q2
            + 15.0 / 7.0
                * (mass_ratio_21 * p.d1 * p.d1
                    + 2.0 * mass_ratio_21 * p.q1 * p.q1
                    + mass_ratio_12 * p.d2 * p.d2
                    + 2.0 * mass_ratio_12 * p.q2 * p.q2),
        a1: p.d1 * p.m2 * (20.0 * p.q2 / p.m2 + 100.0 / 7.0 * p.q1 / p.m1),
        b1: p.d1 * p.m2 * 25.0 * p.d1 / p.m1,
        a2: p.d2 * p.m1 * (20.0 * p.q1 / p.m1 + 100.0 / 7.0 * p.q2 / p.m2),
        b2: p.d2 * p.m1 * 25.0 * p.d2 / p.m2,
        e: 6.0 * p.d1 * p.d2,
        f: 70.0 * p.d1 * p.d2,
    }
}

/// `V2` in the exact `(r, f)` form.
pub fn v2_exact(params: &BodyPairParams, input: &PotentialInput) -> Result<f64, PotentialError> {
    if input.r <= 0.0 {
        return Err(PotentialError::NonPositiveSeparation(input.r));
    }
    let g = params.g();
    let r3 = input.r * input.r * input.r;
    Ok(-g * params.m2 / (4.0 * r3)
        * (params.q1 + 3.0 * params.d1 * (2.0 * input.theta1 - 2.0 * input.f).cos())
        - g * params.m1 / (4.0 * r3)
            * (params.q2 + 3.0 * params.d2 * (2.0 * input.theta2 - 2.0 * input.f).cos()))
}

/// `V4` in the exact `(r, f)` form, including the constant block and all five
/// cosine families.
pub fn v4_exact(params: &BodyPairParams, input: &PotentialInput) -> Result<f64, PotentialError> {
    if input.r <= 0.0 {
        return Err(PotentialError::NonPositiveSeparation(input.r));
    }
    let amp = v4_amplitudes(params);
    let r5 = input.r.powi(5);
    let bracket = amp.constant
        + amp.a1 * (2.0 * input.theta1 - 2.0 * input.f).cos()
        + amp.b1 * (4.0 * input.theta1 - 4.0 * input.f).cos()
        + amp.a2 * (2.0 * input.theta2 - 2.0 * input.f).cos()
        + amp.b2 * (4.0 * input.theta2 - 4.0 * input.f).cos()
        + amp.e * (2.0 * input.theta1 - 2.0 * input.theta2).cos()
        + amp.f * (2.0 * input.theta1 + 2.0 * input.theta2 - 4.0 * input.f).cos();
    Ok(-3.0 * params.g() / (64.0 * r5) * bracket)
}

/// Full potential `V0 + V2 + chi V4`.
pub fn v_total(
    params: &BodyPairParams,
    input: &PotentialInput,
    coupling: Coupling,
) -> Result<f64, PotentialError> {
    let mut v = v0(params, input.r) + v2_exact(params, input)?;
    if coupling == Coupling::SpinSpin {
        v += v4_exact(params, input)?;
    }
    Ok(v)
}

/// Analytic partials of `V0 + V2 + chi V4` with respect to
/// `(theta1, theta2, r, f)`.
pub fn grad_exact(
    params: &BodyPairParams,
    input: &PotentialInput,
    coupling: Coupling,
) -> Result<PotentialGradient, PotentialError> {
    if input.r <= 0.0 {
        return Err(PotentialError::NonPositiveSeparation(input.r));
    }
    let g = params.g();
    let r = input.r;
    let r3 = r * r * r;
    let r4 = r3 * r;

    let (s1, c1) = (2.0 * input.theta1 - 2.0 * input.f).sin_cos();
    let (s2, c2) = (2.0 * input.theta2 - 2.0 * input.f).sin_cos();

    // V0 contributes only to the radial derivative.
    let mut grad = PotentialGradient {
        dtheta1: 0.0,
        dtheta2: 0.0,
        dr: g * params.mu() / (r * r),
        df: 0.0,
    };

    // V2 = -(G M2 / 4 r^3)(q1 + 3 d1 cos(2th1-2f)) - (G M1 / 4 r^3)(...)
    let v2_t1 = 3.0 * g * params.m2 * params.d1 / (2.0 * r3) * s1;
    let v2_t2 = 3.0 * g * params.m1 * params.d2 / (2.0 * r3) * s2;
    grad.dtheta1 += v2_t1;
    grad.dtheta2 += v2_t2;
    grad.dr += 3.0 * g * params.m2 / (4.0 * r4) * (params.q1 + 3.0 * params.d1 * c1)
        + 3.0 * g * params.m1 / (4.0 * r4) * (params.q2 + 3.0 * params.d2 * c2);
    grad.df += -v2_t1 - v2_t2;

    if coupling == Coupling::SpinSpin {
        let amp = v4_amplitudes(params);
        let r5 = r4 * r;
        let r6 = r5 * r;
        let pref = -3.0 * g / 64.0;

        let (s1_4, c1_4) = (4.0 * input.theta1 - 4.0 * input.f).sin_cos();
        let (s2_4, c2_4) = (4.0 * input.theta2 - 4.0 * input.f).sin_cos();
        let (s_diff, c_diff) = (2.0 * input.theta1 - 2.0 * input.theta2).sin_cos();
        let (s_sum, c_sum) = (2.0 * input.theta1 + 2.0 * input.theta2 - 4.0 * input.f).sin_cos();

        let bracket = amp.constant
            + amp.a1 * c1
            + amp.b1 * c1_4
            + amp.a2 * c2
            + amp.b2 * c2_4
            + amp.e * c_diff
            + amp.f * c_sum;

        grad.dtheta1 += pref / r5
            * (-2.0 * amp.a1 * s1
                - 4.0 * amp.b1 * s1_4
                - 2.0 * amp.e * s_diff
                - 2.0 * amp.f * s_sum);
        grad.dtheta2 += pref / r5
            * (-2.0 * amp.a2 * s2 - 4.0 * amp.b2 * s2_4 + 2.0 * amp.e * s_diff
                - 2.0 * amp.f * s_sum);
        grad.dr += -5.0 * pref / r6 * bracket;
        grad.df += pref / r5
            * (2.0 * amp.a1 * s1
                + 4.0 * amp.b1 * s1_4
                + 2.0 * amp.a2 * s2
                + 4.0 * amp.b2 * s2_4
                + 4.0 * amp.f * s_sum);
    }

    Ok(grad)
}
