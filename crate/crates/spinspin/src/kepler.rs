//! Two-body Keplerian motion in normalized units.
//!
//! With `n = 1` the mean anomaly coincides with time and the orbit starts at
//! pericenter (`f(0) = 0`). The inversion of Kepler's equation uses Newton
//! iteration seeded with `E0 = M + e sin M`, falling back to bisection when
//! Newton stalls; the residual tolerance is `1e-14`.

use crate::bodies::BodyPairParams;
use thiserror::Error;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Residual tolerance for `E - e sin E - M`.
pub const KEPLER_TOL: f64 = 1e-14;

const NEWTON_MAX_ITER: usize = 50;
const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeplerError {
    #[error("eccentricity must satisfy 0 <= e < 1, got {0}")]
    EccentricityOutOfRange(f64),
}

/// Instantaneous state of the Keplerian orbit at time `t` (= mean anomaly).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerState {
    pub t: f64,
    /// Eccentric anomaly, continuous in `t` (no reduction mod 2*pi).
    pub eccentric_anomaly: f64,
    /// Separation `r = a (1 - e cos E)`.
    pub r: f64,
    /// True anomaly, continuous in `t`: `f(t + 2*pi) = f(t) + 2*pi`.
    pub f: f64,
    /// `df/dt = a^2 sqrt(1 - e^2) / r^2`.
    pub fdot: f64,
    /// Radial momentum `mu rdot`.
    pub pr: f64,
    /// Angular momentum `mu r^2 fdot`, constant along the orbit.
    pub pf: f64,
}

/// Inverts Kepler's equation `E - e sin E = M` for the eccentric anomaly.
///
/// `E` is continuous in `M`: no branch reduction is performed, so `M` and the
/// returned `E` advance together across multiples of `2*pi`.
pub fn solve_kepler(e: f64, mean_anomaly: f64) -> Result<f64, KeplerError> {
    if !(0.0..1.0).contains(&e) {
        return Err(KeplerError::EccentricityOutOfRange(e));
    }
    let m = mean_anomaly;
    let residual = |x: f64| x - e * x.sin() - m;

    let mut x = m + e * m.sin();
    for _ in 0..NEWTON_MAX_ITER {
        let r = residual(x);
        if r.abs() < KEPLER_TOL {
            return Ok(x);
        }
        let dr = 1.0 - e * x.cos();
        x -= r / dr;
    }
    if residual(x).abs() < KEPLER_TOL {
        return Ok(x);
    }

    // Bisection fallback on the bracket [M - e, M + e], which always contains
    // the root since |E - M| = |e sin E| <= e.
    let (mut lo, mut hi) = (m - e, m + e);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() < KEPLER_TOL || (hi - lo) < f64::EPSILON * (1.0 + m.abs()) {
            return Ok(mid);
        }
        if r > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// True anomaly from the eccentric anomaly, continuous across revolutions.
///
/// Uses `f = E + 2 atan(beta sin E / (1 - beta cos E))` with
/// `beta = e / (1 + sqrt(1 - e^2))`; the correction term is bounded, so no
/// quadrant bookkeeping is needed.
pub fn true_anomaly(e: f64, eccentric_anomaly: f64) -> f64 {
    let beta = e / (1.0 + (1.0 - e * e).sqrt());
    let (s, c) = eccentric_anomaly.sin_cos();
    eccentric_anomaly + 2.0 * (beta * s / (1.0 - beta * c)).atan()
}

/// Keplerian orbital state at time `t` for the reference orbit `(a0, e0)`.
pub fn kepler_state(params: &BodyPairParams, t: f64) -> KeplerState {
    let a = params.a0;
    let e = params.e0;
    let mu = params.mu();
    // e was validated at construction, so the inversion cannot fail.
    let big_e = solve_kepler(e, t).expect("validated eccentricity");
    let (s, c) = big_e.sin_cos();
    let r = a * (1.0 - e * c);
    let f = true_anomaly(e, big_e);
    let fdot = a * a * (1.0 - e * e).sqrt() / (r * r);
    // rdot = a e sin E * Edot with Edot = 1 / (1 - e cos E).
    let rdot = a * e * s / (1.0 - e * c);
    KeplerState {
        t,
        eccentric_anomaly: big_e,
        r,
        f,
        fdot,
        pr: mu * rdot,
        pf: mu * r * r * fdot,
    }
}
