//! Physical parameters of the two ellipsoids and the normalized unit system.
//!
//! Units are normalized so that `M1 + M2 = 1`, `C1 + C2 = 1` and the orbital
//! period of the reference Keplerian orbit is `2*pi`. Kepler's third law then
//! fixes the gravitational constant to `G = a0^3` and the mean motion to
//! `n = 1`. All downstream modules assume inputs in these units.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validation failures for [`BodyPairParams`]. Each variant names the
/// violated inequality.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("M1 + M2 = 1 violated: M1 + M2 = {0}")]
    MassNormalization(f64),
    #[error("C1 + C2 = 1 violated: C1 + C2 = {0}")]
    InertiaNormalization(f64),
    #[error("0 <= d{index} violated: d{index} = {value}")]
    NegativeOblateness { index: u8, value: f64 },
    #[error("d{index} <= C{index} violated: d{index} = {d}, C{index} = {c}")]
    OblatenessExceedsInertia { index: u8, d: f64, c: f64 },
    #[error("C{index} <= 1 violated: C{index} = {c}")]
    InertiaTooLarge { index: u8, c: f64 },
    #[error("C{index} > 0 violated: C{index} = {c}")]
    InertiaNotPositive { index: u8, c: f64 },
    #[error("d{index} <= q{index} violated: d{index} = {d}, q{index} = {q}")]
    FlatteningBelowOblateness { index: u8, d: f64, q: f64 },
    #[error("q{index} <= 2 C{index} violated: q{index} = {q}, C{index} = {c}")]
    FlatteningTooLarge { index: u8, q: f64, c: f64 },
    #[error("0 <= e < 1 violated: e = {0}")]
    EccentricityOutOfRange(f64),
    #[error("a > 0 violated: a = {0}")]
    SemimajorAxisNotPositive(f64),
    #[error("parameter {0} is not finite")]
    NotFinite(&'static str),
}

/// Masses, polar moments of inertia, shape parameters `d_j = B_j - A_j`,
/// `q_j = 2 C_j - B_j - A_j` and the reference orbit `(a0, e0)`, all in
/// normalized units.
///
/// Construct through [`BodyPairParams::new`], which rejects any parameter set
/// violating the normalization or shape constraints. Every consumer of a
/// `BodyPairParams` may assume the invariants hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyPairParams {
    pub m1: f64,
    pub m2: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub q1: f64,
    pub q2: f64,
    /// Reference semimajor axis; fixes the unit system through `G = a0^3`.
    pub a0: f64,
    /// Reference eccentricity of the Keplerian orbit.
    pub e0: f64,
}

/// Normalization tolerance on `M1 + M2 = 1` and `C1 + C2 = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

impl BodyPairParams {
    /// Validates and constructs a parameter set. Fails fast: every invariant
    /// is checked here so downstream code never re-validates.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m1: f64,
        m2: f64,
        c1: f64,
        c2: f64,
        d1: f64,
        d2: f64,
        q1: f64,
        q2: f64,
        a0: f64,
        e0: f64,
    ) -> Result<Self, ParamsError> {
        let params = Self {
            m1,
            m2,
            c1,
            c2,
            d1,
            d2,
            q1,
            q2,
            a0,
            e0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        for (name, v) in [
            ("M1", self.m1),
            ("M2", self.m2),
            ("C1", self.c1),
            ("C2", self.c2),
            ("d1", self.d1),
            ("d2", self.d2),
            ("q1", self.q1),
            ("q2", self.q2),
            ("a", self.a0),
            ("e", self.e0),
        ] {
            if !v.is_finite() {
                return Err(ParamsError::NotFinite(name));
            }
        }
        if ((self.m1 + self.m2) - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ParamsError::MassNormalization(self.m1 + self.m2));
        }
        if ((self.c1 + self.c2) - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ParamsError::InertiaNormalization(self.c1 + self.c2));
        }
        for (index, d, q, c) in [
            (1u8, self.d1, self.q1, self.c1),
            (2, self.d2, self.q2, self.c2),
        ] {
            if c <= 0.0 {
                return Err(ParamsError::InertiaNotPositive { index, c });
            }
            if c > 1.0 {
                return Err(ParamsError::InertiaTooLarge { index, c });
            }
            if d < 0.0 {
                return Err(ParamsError::NegativeOblateness { index, value: d });
            }
            if d > c {
                return Err(ParamsError::OblatenessExceedsInertia { index, d, c });
            }
            if q < d {
                return Err(ParamsError::FlatteningBelowOblateness { index, d, q });
            }
            if q > 2.0 * c {
                return Err(ParamsError::FlatteningTooLarge { index, q, c });
            }
        }
        if !(0.0..1.0).contains(&self.e0) {
            return Err(ParamsError::EccentricityOutOfRange(self.e0));
        }
        if self.a0 <= 0.0 {
            return Err(ParamsError::SemimajorAxisNotPositive(self.a0));
        }
        Ok(())
    }

    /// Gravitational constant in normalized units, `G = a0^3`.
    #[inline]
    pub fn g(&self) -> f64 {
        self.a0 * self.a0 * self.a0
    }

    /// Reduced mass `mu = M1 M2`.
    #[inline]
    pub fn mu(&self) -> f64 {
        self.m1 * self.m2
    }

    /// Orbital angular momentum of the reference Keplerian orbit,
    /// `p_f = mu a0^2 sqrt(1 - e0^2)`.
    #[inline]
    pub fn reference_pf(&self) -> f64 {
        self.mu() * self.a0 * self.a0 * (1.0 - self.e0 * self.e0).sqrt()
    }

    pub fn derived(&self) -> DerivedParams {
        derive(self)
    }

    /// Built-in preset for the binary asteroid (617) Patroclus-Menoetius.
    pub fn patroclus_menoetius() -> Self {
        Self::new(
            0.56, 0.44, 0.6, 0.4, 0.0482, 0.0321, 0.2226, 0.1443, 18.2, 0.02,
        )
        .expect("preset satisfies all constraints")
    }
}

/// Quantities derived from a validated [`BodyPairParams`].
///
/// `lambda_j`, `sigma_j`, `qhat_j` are the non-dimensional shape/inertia
/// ratios `3 (mu/M_j)(d_j/C_j)`, `(1/3) C_j/(mu a^2)` and `q_j/(M_j a^2)`.
/// They are exposed for completeness but drive no dynamics here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub g: f64,
    pub mu: f64,
    /// Mean motion of the reference orbit; identically 1 in these units.
    pub n: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub qhat1: f64,
    pub qhat2: f64,
}

/// Computes the derived unit-system quantities. Pure and deterministic;
/// satisfies `C1 * sigma2 == C2 * sigma1` (both equal `C1 C2 / (3 mu a^2)`).
pub fn derive(params: &BodyPairParams) -> DerivedParams {
    let mu = params.mu();
    let a2 = params.a0 * params.a0;
    DerivedParams {
        g: params.g(),
        mu,
        n: 1.0,
        lambda1: 3.0 * mu / params.m1 * params.d1 / params.c1,
        lambda2: 3.0 * mu / params.m2 * params.d2 / params.c2,
        sigma1: params.c1 / (3.0 * mu * a2),
        sigma2: params.c2 / (3.0 * mu * a2),
        qhat1: params.q1 / (params.m1 * a2),
        qhat2: params.q2 / (params.m2 * a2),
    }
}
