//! Resonant averaged models and their linear stability.
//!
//! For a spin-spin resonance `(m1:n1, m2:n2)` the slow angles are
//! `phi_j = 2 theta_j - 2 (m_j/n_j) t`. Averaging the expanded potential
//! over time leaves a two-degree-of-freedom system whose torques are sine
//! series in `phi_1`, `phi_2` with coefficients `K_1..K_5`, `L_1..L_5`
//! ([`coefficients`], closed forms per resonance). The same coefficients are
//! also derivable by averaging the term table of [`crate::series`]
//! ([`coefficients_from_series`]); the two routes are independent and the
//! test suite holds them to 1e-12 relative agreement.
//!
//! Sign conventions of the body-2 equation: every term comes from
//! differentiating the averaged potential with respect to `phi_2`, so the
//! decoupled `L1`, `L2`, `L3` terms drive `sin(phi_2)` (never `phi_1`) and
//! the `L5` term enters with a flipped sign relative to `K5`, from the
//! derivative of `cos(phi_1 - phi_2)`.

use crate::bodies::BodyPairParams;
use crate::dynamics::{AveragedCoefficients, DissipationSpec, DynamicsError};
use crate::potential::Coupling;
use crate::series::{SeriesTerm, V2_SERIES, V4_SERIES};
use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("unsupported resonance {0}:{1},{2}:{3} (supported: 1:1,1:1  3:2,3:2  1:1,3:2)")]
    UnsupportedResonance(i32, i32, i32, i32),
    #[error("cannot parse resonance spec '{0}', expected 'm1:n1,m2:n2'")]
    ParseResonance(String),
    #[error("invalid stability-map grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// One of the three supported spin-spin resonances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResonanceSpec {
    m1: i32,
    n1: i32,
    m2: i32,
    n2: i32,
}

impl ResonanceSpec {
    pub const SYNCHRONOUS: ResonanceSpec = ResonanceSpec {
        m1: 1,
        n1: 1,
        m2: 1,
        n2: 1,
    };
    pub const THREE_HALVES: ResonanceSpec = ResonanceSpec {
        m1: 3,
        n1: 2,
        m2: 3,
        n2: 2,
    };
    pub const MIXED: ResonanceSpec = ResonanceSpec {
        m1: 1,
        n1: 1,
        m2: 3,
        n2: 2,
    };

    pub fn new(m1: i32, n1: i32, m2: i32, n2: i32) -> Result<Self, StabilityError> {
        let spec = ResonanceSpec { m1, n1, m2, n2 };
        if spec == Self::SYNCHRONOUS || spec == Self::THREE_HALVES || spec == Self::MIXED {
            Ok(spec)
        } else {
            Err(StabilityError::UnsupportedResonance(m1, n1, m2, n2))
        }
    }

    #[inline]
    pub fn parts(&self) -> (i32, i32, i32, i32) {
        (self.m1, self.n1, self.m2, self.n2)
    }

    /// Rotation rate `m_j / n_j` of body `j` in the resonance.
    #[inline]
    pub fn rate(&self, body: usize) -> f64 {
        match body {
            1 => self.m1 as f64 / self.n1 as f64,
            2 => self.m2 as f64 / self.n2 as f64,
            _ => panic!("body index must be 1 or 2"),
        }
    }

    /// Resonant angles `phi_j = 2 theta_j - 2 (m_j/n_j) t`.
    pub fn resonant_angles(&self, theta1: f64, theta2: f64, t: f64) -> (f64, f64) {
        (
            2.0 * theta1 - 2.0 * self.rate(1) * t,
            2.0 * theta2 - 2.0 * self.rate(2) * t,
        )
    }
}

impl fmt::Display for ResonanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{}:{}", self.m1, self.n1, self.m2, self.n2)
    }
}

impl FromStr for ResonanceSpec {
    type Err = StabilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || StabilityError::ParseResonance(s.to_string());
        let (first, second) = s.split_once(',').ok_or_else(err)?;
        let parse_pair = |p: &str| -> Result<(i32, i32), StabilityError> {
            let (m, n) = p.trim().split_once(':').ok_or_else(err)?;
            Ok((
                m.trim().parse().map_err(|_| err())?,
                n.trim().parse().map_err(|_| err())?,
            ))
        };
        let (m1, n1) = parse_pair(first)?;
        let (m2, n2) = parse_pair(second)?;
        ResonanceSpec::new(m1, n1, m2, n2)
    }
}

/// Parameters entering the resonant coefficients. For the reference system
/// this mirrors [`BodyPairParams`]; stability maps sweep `a` and `e` while
/// `g` stays pinned to the template's unit normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceContext {
    pub g: f64,
    pub a: f64,
    pub e: f64,
    pub m1: f64,
    pub m2: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl From<&BodyPairParams> for ResonanceContext {
    fn from(p: &BodyPairParams) -> Self {
        Self {
            g: p.g(),
            a: p.a0,
            e: p.e0,
            m1: p.m1,
            m2: p.m2,
            c1: p.c1,
            c2: p.c2,
            d1: p.d1,
            d2: p.d2,
            q1: p.q1,
            q2: p.q2,
        }
    }
}

/// Amplitudes of the averaged resonant torques.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceCoefficients {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
}

/// Closed-form resonant coefficients. `K4 = L4` and `K5 = L5` in all three
/// resonances.
pub fn coefficients(ctx: &ResonanceContext, spec: ResonanceSpec) -> ResonanceCoefficients {
    let (g, a, e) = (ctx.g, ctx.a, ctx.e);
    let e2 = e * e;
    let a3 = a.powi(3);
    let a5 = a.powi(5);
    let (d1, d2, q1, q2, m1, m2) = (ctx.d1, ctx.d2, ctx.q1, ctx.q2, ctx.m1, ctx.m2);

    if spec == ResonanceSpec::SYNCHRONOUS {
        ResonanceCoefficients {
            k1: 3.0 * d1 * g * m2 / (2.0 * a3) * (1.0 - 2.5 * e2),
            k2: (75.0 * d1 * g * m2 * q1 / (56.0 * a5 * m1) + 15.0 * d1 * g * q2 / (8.0 * a5))
                * (1.0 + e2),
            k3: 75.0 * d1 * d1 * g * m2 / (16.0 * a5 * m1) * (1.0 - 11.0 * e2),
            k4: 105.0 * d1 * d2 * g / (16.0 * a5) * (1.0 - 11.0 * e2),
            k5: (9.0 + 45.0 * e2) * d1 * d2 * g / (16.0 * a5),
            l1: 3.0 * d2 * g * m1 / (2.0 * a3) * (1.0 - 2.5 * e2),
            l2: (75.0 * d2 * g * m1 * q2 / (56.0 * a5 * m2) + 15.0 * d2 * g * q1 / (8.0 * a5))
                * (1.0 + e2),
            l3: 75.0 * d2 * d2 * g * m1 / (16.0 * a5 * m2) * (1.0 - 11.0 * e2),
            l4: 105.0 * d1 * d2 * g / (16.0 * a5) * (1.0 - 11.0 * e2),
            l5: (9.0 + 45.0 * e2) * d1 * d2 * g / (16.0 * a5),
        }
    } else if spec == ResonanceSpec::THREE_HALVES {
        ResonanceCoefficients {
            k1: 21.0 * d1 * e * g * m2 / (4.0 * a3),
            k2: 675.0 * d1 * e * g * m2 * q1 / (112.0 * a5 * m1)
                + 135.0 * d1 * e * g * q2 / (16.0 * a5),
            k3: 3825.0 * d1 * d1 * e2 * g * m2 / (32.0 * a5 * m1),
            k4: 5355.0 * d1 * d2 * e2 * g / (32.0 * a5),
            k5: 45.0 * d1 * d2 * e2 * g / (16.0 * a5) + 9.0 * d1 * d2 * g / (16.0 * a5),
            l1: 21.0 * d2 * e * g * m1 / (4.0 * a3),
            l2: 675.0 * d2 * e * g * m1 * q2 / (112.0 * a5 * m2)
                + 135.0 * d2 * e * g * q1 / (16.0 * a5),
            l3: 3825.0 * d2 * d2 * e2 * g * m1 / (32.0 * a5 * m2),
            l4: 5355.0 * d1 * d2 * e2 * g / (32.0 * a5),
            l5: 45.0 * d1 * d2 * e2 * g / (16.0 * a5) + 9.0 * d1 * d2 * g / (16.0 * a5),
        }
    } else {
        // (1:1, 3:2)
        ResonanceCoefficients {
            k1: 3.0 * d1 * g * m2 / (2.0 * a3) * (1.0 - 2.5 * e2),
            k2: (75.0 * d1 * g * m2 * q1 / (56.0 * a5 * m1) + 15.0 * d1 * g * q2 / (8.0 * a5))
                * (1.0 + e2),
            k3: 75.0 * d1 * d1 * g * m2 / (16.0 * a5 * m1) * (1.0 - 11.0 * e2),
            k4: 1365.0 * d1 * d2 * e * g / (32.0 * a5),
            k5: 45.0 * d1 * d2 * e * g / (32.0 * a5),
            l1: 21.0 * d2 * e * g * m1 / (4.0 * a3),
            l2: 135.0 * d2 * e * g * q1 / (16.0 * a5)
                + 675.0 * d2 * e * g * m1 * q2 / (112.0 * a5 * m2),
            l3: 3825.0 * d2 * d2 * e2 * g * m1 / (32.0 * a5 * m2),
            l4: 1365.0 * d1 * d2 * e * g / (32.0 * a5),
            l5: 45.0 * d1 * d2 * e * g / (32.0 * a5),
        }
    }
}

fn term_amplitude(term: &SeriesTerm, ctx: &ResonanceContext) -> f64 {
    let mut amp = term.num as f64 / term.den as f64;
    amp *= ctx.e.powi(term.e_pow as i32);
    amp *= ctx.d1.powi(term.d1_pow as i32);
    amp *= ctx.d2.powi(term.d2_pow as i32);
    amp *= ctx.q1.powi(term.q1_pow as i32);
    amp *= ctx.q2.powi(term.q2_pow as i32);
    amp *= ctx.m1.powi(term.m1_pow as i32);
    amp *= ctx.m2.powi(term.m2_pow as i32);
    amp * ctx.g / ctx.a.powi(term.a_pow as i32)
}

/// Resonant coefficients obtained by time-averaging the expanded potential:
/// substitute `theta_j = (m_j/n_j) t + phi_j / 2` into every table term,
/// keep the terms whose time frequency vanishes, and read the torque
/// amplitudes off the surviving cosine groups. Independent of
/// [`coefficients`]; used as its cross-check.
pub fn coefficients_from_series(
    ctx: &ResonanceContext,
    spec: ResonanceSpec,
) -> ResonanceCoefficients {
    let (m1, n1, m2, n2) = spec.parts();
    let mut out = ResonanceCoefficients {
        k1: 0.0,
        k2: 0.0,
        k3: 0.0,
        k4: 0.0,
        k5: 0.0,
        l1: 0.0,
        l2: 0.0,
        l3: 0.0,
        l4: 0.0,
        l5: 0.0,
    };

    let mut scan = |table: &[SeriesTerm], first_order: bool| {
        for term in table {
            // Time frequency after substitution, scaled by n1*n2 to stay in
            // integer arithmetic.
            let freq = term.t_mult as i32 * n1 * n2
                + term.th1_mult as i32 * m1 * n2
                + term.th2_mult as i32 * m2 * n1;
            if freq != 0 {
                continue;
            }
            // phi multipliers (theta multipliers are even by construction).
            let mut s1 = term.th1_mult as i32 / 2;
            let mut s2 = term.th2_mult as i32 / 2;
            if s1 < 0 || (s1 == 0 && s2 < 0) {
                s1 = -s1;
                s2 = -s2;
            }
            let a = term_amplitude(term, ctx);
            match (s1, s2, first_order) {
                (0, 0, _) => {} // constant after averaging; no torque
                (1, 0, true) => out.k1 += -2.0 * a,
                (1, 0, false) => out.k2 += -2.0 * a,
                (2, 0, false) => out.k3 += -4.0 * a,
                (0, 1, true) => out.l1 += -2.0 * a,
                (0, 1, false) => out.l2 += -2.0 * a,
                (0, 2, false) => out.l3 += -4.0 * a,
                (1, 1, false) => {
                    out.k4 += -2.0 * a;
                    out.l4 += -2.0 * a;
                }
                (1, -1, false) => {
                    out.k5 += -2.0 * a;
                    out.l5 += -2.0 * a;
                }
                other => unreachable!("unexpected resonant group {other:?}"),
            }
        }
    };
    scan(&V2_SERIES, true);
    scan(&V4_SERIES, false);
    out
}

/// A stationary point of the averaged system (`J1 = J2 = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub phi1: f64,
    pub phi2: f64,
    /// Max absolute value of the two critical equations at `(phi1, phi2)`.
    pub residual: f64,
}

/// Result of an equilibrium search.
#[derive(Debug, Clone, Default)]
pub struct EquilibriumSearch {
    pub equilibria: Vec<Equilibrium>,
    /// Seeds from which Newton failed to converge.
    pub failed_seeds: Vec<(f64, f64)>,
}

/// Linear stability of one equilibrium.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityReport {
    pub equilibrium: Equilibrium,
    /// Linearization in the state order `(xi1, xi2, J1, J2)`.
    pub matrix: [[f64; 4]; 4],
    /// Eigenvalues sorted by (real, imaginary) part.
    pub eigenvalues: [(f64, f64); 4],
    pub max_real: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x % two_pi;
    if y > std::f64::consts::PI {
        y -= two_pi;
    } else if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

/// The two critical equations `g_j(phi1, phi2) = 0` of the averaged system,
/// including the dissipative drives `gammabar_j (m_j/n_j - mubar_j)`.
fn critical_system(
    co: &ResonanceCoefficients,
    chi: f64,
    drive: (f64, f64),
    phi1: f64,
    phi2: f64,
) -> (f64, f64) {
    let g1 = co.k1 * phi1.sin()
        + chi
            * (co.k2 * phi1.sin()
                + co.k3 * (2.0 * phi1).sin()
                + co.k4 * (phi1 + phi2).sin()
                + co.k5 * (phi1 - phi2).sin())
        + drive.0;
    let g2 = co.l1 * phi2.sin()
        + chi
            * (co.l2 * phi2.sin() + co.l3 * (2.0 * phi2).sin() + co.l4 * (phi1 + phi2).sin()
                - co.l5 * (phi1 - phi2).sin())
        + drive.1;
    (g1, g2)
}

fn critical_jacobian(co: &ResonanceCoefficients, chi: f64, phi1: f64, phi2: f64) -> [[f64; 2]; 2] {
    let c_sum = (phi1 + phi2).cos();
    let c_diff = (phi1 - phi2).cos();
    [
        [
            (co.k1 + chi * co.k2) * phi1.cos()
                + 2.0 * chi * co.k3 * (2.0 * phi1).cos()
                + chi * co.k4 * c_sum
                + chi * co.k5 * c_diff,
            chi * (co.k4 * c_sum - co.k5 * c_diff),
        ],
        [
            chi * (co.l4 * c_sum - co.l5 * c_diff),
            (co.l1 + chi * co.l2) * phi2.cos()
                + 2.0 * chi * co.l3 * (2.0 * phi2).cos()
                + chi * co.l4 * c_sum
                + chi * co.l5 * c_diff,
        ],
    ]
}

fn drive_terms(
    ctx: &ResonanceContext,
    spec: ResonanceSpec,
    diss: &DissipationSpec,
) -> Result<(AveragedCoefficients, (f64, f64)), StabilityError> {
    let rates = diss.averaged_rates_at(ctx.e, ctx.c1, ctx.c2)?;
    let drive = (
        rates.gammabar1 * (spec.rate(1) - rates.mubar1),
        rates.gammabar2 * (spec.rate(2) - rates.mubar2),
    );
    Ok((rates, drive))
}

const NEWTON_TOL: f64 = 1e-13;
const DEDUP_TOL: f64 = 1e-8;

fn newton_solve(
    co: &ResonanceCoefficients,
    chi: f64,
    drive: (f64, f64),
    seed: (f64, f64),
) -> Option<(f64, f64, f64)> {
    let (mut p1, mut p2) = seed;
    let norm = |g: (f64, f64)| g.0.abs().max(g.1.abs());
    let mut g = critical_system(co, chi, drive, p1, p2);
    for _ in 0..100 {
        if norm(g) < NEWTON_TOL {
            return Some((wrap_angle(p1), wrap_angle(p2), norm(g)));
        }
        let j = critical_jacobian(co, chi, p1, p2);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dx1 = -(j[1][1] * g.0 - j[0][1] * g.1) / det;
        let dx2 = -(-j[1][0] * g.0 + j[0][0] * g.1) / det;
        // Damped update: halve the step until the residual decreases.
        let mut lambda = 1.0;
        let mut advanced = false;
        for _ in 0..8 {
            let trial = (p1 + lambda * dx1, p2 + lambda * dx2);
            let gt = critical_system(co, chi, drive, trial.0, trial.1);
            if norm(gt) < norm(g) {
                (p1, p2) = trial;
                g = gt;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    if norm(g) < NEWTON_TOL {
        Some((wrap_angle(p1), wrap_angle(p2), norm(g)))
    } else {
        None
    }
}

/// Finds equilibria of the averaged system.
///
/// Conservative case: the four points `(0,0), (0,pi), (pi,0), (pi,pi)` are
/// always returned (they solve the critical equations identically), plus any
/// extra Newton-converged solutions from `extra_seeds`. Dissipative case:
/// damped Newton from the four trivial points and `extra_seeds`; an empty
/// result means the dissipative drive exceeds the restoring torques.
pub fn equilibria(
    ctx: &ResonanceContext,
    spec: ResonanceSpec,
    coupling: Coupling,
    diss: &DissipationSpec,
    extra_seeds: &[(f64, f64)],
) -> Result<EquilibriumSearch, StabilityError> {
    let co = coefficients(ctx, spec);
    let chi = coupling.chi();
    let (_, drive) = drive_terms(ctx, spec, diss)?;
    let conservative = drive.0 == 0.0 && drive.1 == 0.0;

    let mut search = EquilibriumSearch::default();
    let push = |eq: Equilibrium, search: &mut EquilibriumSearch| {
        let dist = |a: f64, b: f64| wrap_angle(a - b).abs();
        if !search
            .equilibria
            .iter()
            .any(|e| dist(e.phi1, eq.phi1) < DEDUP_TOL && dist(e.phi2, eq.phi2) < DEDUP_TOL)
        {
            search.equilibria.push(eq);
        }
    };

    let pi = std::f64::consts::PI;
    let trivial = [(0.0, 0.0), (0.0, pi), (pi, 0.0), (pi, pi)];

    if conservative {
        for (p1, p2) in trivial {
            let g = critical_system(&co, chi, drive, p1, p2);
            push(
                Equilibrium {
                    phi1: p1,
                    phi2: p2,
                    residual: g.0.abs().max(g.1.abs()),
                },
                &mut search,
            );
        }
        for &seed in extra_seeds {
            match newton_solve(&co, chi, drive, seed) {
                Some((p1, p2, res)) => push(
                    Equilibrium {
                        phi1: p1,
                        phi2: p2,
                        residual: res,
                    },
                    &mut search,
                ),
                None => search.failed_seeds.push(seed),
            }
        }
    } else {
        // Fast no-solution check for the uncoupled problem: each equation is
        // K1 sin(phi1) + drive = 0 on its own.
        if chi == 0.0 && (drive.0.abs() > co.k1.abs() || drive.1.abs() > co.l1.abs()) {
            search.failed_seeds.extend(trivial);
            search.failed_seeds.extend(extra_seeds);
            return Ok(search);
        }
        for seed in trivial.iter().copied().chain(extra_seeds.iter().copied()) {
            match newton_solve(&co, chi, drive, seed) {
                Some((p1, p2, res)) => push(
                    Equilibrium {
                        phi1: p1,
                        phi2: p2,
                        residual: res,
                    },
                    &mut search,
                ),
                None => search.failed_seeds.push(seed),
            }
        }
    }
    Ok(search)
}

fn sort_eigenvalues(eigs: &mut [Complex64; 4]) {
    eigs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

/// Linearizes the averaged system at an equilibrium and computes the
/// eigenvalues of the 4x4 matrix.
///
/// At a conservative equilibrium located at the origin the characteristic
/// polynomial is the biquadratic `x^4 + alpha x^2 + beta`, solved in closed
/// form; every other case goes through a general dense eigenvalue routine.
pub fn linearize(
    ctx: &ResonanceContext,
    spec: ResonanceSpec,
    coupling: Coupling,
    diss: &DissipationSpec,
    eq: &Equilibrium,
) -> Result<StabilityReport, StabilityError> {
    let co = coefficients(ctx, spec);
    let chi = coupling.chi();
    let (rates, _) = drive_terms(ctx, spec, diss)?;

    let j = critical_jacobian(&co, chi, eq.phi1, eq.phi2);
    let (a1, b1) = (-j[0][0], -j[0][1]);
    let (a2, b2) = (-j[1][0], -j[1][1]);
    let alpha = -2.0 * (a1 / ctx.c1 + b2 / ctx.c2);
    let beta = 4.0 / (ctx.c1 * ctx.c2) * (a1 * b2 - a2 * b1);

    let matrix = [
        [0.0, 0.0, 2.0 / ctx.c1, 0.0],
        [0.0, 0.0, 0.0, 2.0 / ctx.c2],
        [a1, b1, -rates.gammabar1 / ctx.c1, 0.0],
        [a2, b2, 0.0, -rates.gammabar2 / ctx.c2],
    ];

    let conservative = rates.gammabar1 == 0.0 && rates.gammabar2 == 0.0;
    let at_origin = wrap_angle(eq.phi1).abs() < 1e-9 && wrap_angle(eq.phi2).abs() < 1e-9;

    let mut eigs: [Complex64; 4];
    if conservative && at_origin {
        // x^2 = (-alpha +- sqrt(alpha^2 - 4 beta)) / 2
        let disc = Complex64::new(alpha * alpha - 4.0 * beta, 0.0).sqrt();
        let x2_plus = (Complex64::new(-alpha, 0.0) + disc) / 2.0;
        let x2_minus = (Complex64::new(-alpha, 0.0) - disc) / 2.0;
        let xp = x2_plus.sqrt();
        let xm = x2_minus.sqrt();
        eigs = [xp, -xp, xm, -xm];
    } else {
        let m = Matrix4::from_fn(|r, c| matrix[r][c]);
        let ev = m.complex_eigenvalues();
        eigs = [ev[0], ev[1], ev[2], ev[3]];
    }
    sort_eigenvalues(&mut eigs);
    let max_real = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);

    Ok(StabilityReport {
        equilibrium: *eq,
        matrix,
        eigenvalues: [
            (eigs[0].re, eigs[0].im),
            (eigs[1].re, eigs[1].im),
            (eigs[2].re, eigs[2].im),
            (eigs[3].re, eigs[3].im),
        ],
        max_real,
        a1,
        a2,
        b1,
        b2,
        alpha,
        beta,
    })
}

/// Grid specification for [`stability_map`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MapSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub na: usize,
    pub ne: usize,
    /// Equilibrium label: the trivial point (or Newton seed) to follow
    /// across the grid.
    pub equilibrium: (f64, f64),
}

impl MapSpec {
    fn validate(&self) -> Result<(), StabilityError> {
        if self.na < 2 || self.ne < 2 {
            return Err(StabilityError::InvalidGrid(format!(
                "grid must be at least 2x2, got {}x{}",
                self.na, self.ne
            )));
        }
        if !(self.a_min > 0.0 && self.a_max >= self.a_min) {
            return Err(StabilityError::InvalidGrid(format!(
                "semimajor-axis range [{}, {}] invalid",
                self.a_min, self.a_max
            )));
        }
        if !(0.0..1.0).contains(&self.e_min)
            || !(0.0..1.0).contains(&self.e_max)
            || self.e_max < self.e_min
        {
            return Err(StabilityError::InvalidGrid(format!(
                "eccentricity range [{}, {}] invalid",
                self.e_min, self.e_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellStatus {
    Ok,
    /// The labeled equilibrium does not exist at this grid point.
    Missing,
}

#[derive(Debug, Clone)]
pub struct MapCell {
    pub a: f64,
    pub e: f64,
    pub status: CellStatus,
    pub report: Option<StabilityReport>,
}

/// Maximum real eigenvalue part of the labeled equilibrium over an `(a, e)`
/// grid. Cells are row-major with `a` as the outer axis; each cell is an
/// independent task and the output order is deterministic.
///
/// The sweep varies `a` and `e` as parameters of the coefficient formulas
/// while `G` stays fixed by the template's unit system, so maps taken around
/// a reference system remain in that system's units.
pub fn stability_map(
    params: &BodyPairParams,
    spec: ResonanceSpec,
    coupling: Coupling,
    diss: &DissipationSpec,
    map: &MapSpec,
) -> Result<Vec<MapCell>, StabilityError> {
    map.validate()?;
    let template = ResonanceContext::from(params);
    let cells: Vec<(usize, usize)> = (0..map.na)
        .flat_map(|i| (0..map.ne).map(move |j| (i, j)))
        .collect();

    cells
        .into_par_iter()
        .map(|(i, j)| {
            let a = if map.na == 1 {
                map.a_min
            } else {
                map.a_min + (map.a_max - map.a_min) * i as f64 / (map.na - 1) as f64
            };
            let e = if map.ne == 1 {
                map.e_min
            } else {
                map.e_min + (map.e_max - map.e_min) * j as f64 / (map.ne - 1) as f64
            };
            let ctx = ResonanceContext { a, e, ..template };
            let search = equilibria(&ctx, spec, coupling, diss, &[map.equilibrium])?;
            // Follow the equilibrium continuously connected to the label:
            // nearest found solution within a quarter turn.
            let target = map.equilibrium;
            let nearest = search
                .equilibria
                .iter()
                .map(|eq| {
                    let d = wrap_angle(eq.phi1 - target.0)
                        .abs()
                        .max(wrap_angle(eq.phi2 - target.1).abs());
                    (d, *eq)
                })
                .filter(|(d, _)| *d < std::f64::consts::FRAC_PI_2)
                .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            match nearest {
                Some((_, eq)) => {
                    let report = linearize(&ctx, spec, coupling, diss, &eq)?;
                    Ok(MapCell {
                        a,
                        e,
                        status: CellStatus::Ok,
                        report: Some(report),
                    })
                }
                None => Ok(MapCell {
                    a,
                    e,
                    status: CellStatus::Missing,
                    report: None,
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn patroclus_ctx(e: f64) -> ResonanceContext {
        let p = BodyPairParams::patroclus_menoetius();
        ResonanceContext {
            e,
            ..ResonanceContext::from(&p)
        }
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn resonance_parsing_and_display() {
        let spec: ResonanceSpec = "1:1,1:1".parse().unwrap();
        assert_eq!(spec, ResonanceSpec::SYNCHRONOUS);
        assert_eq!(
            "3:2,3:2".parse::<ResonanceSpec>().unwrap(),
            ResonanceSpec::THREE_HALVES
        );
        assert_eq!(
            "1:1,3:2".parse::<ResonanceSpec>().unwrap(),
            ResonanceSpec::MIXED
        );
        assert_eq!(ResonanceSpec::MIXED.to_string(), "1:1,3:2");
        assert!("2:1,1:1".parse::<ResonanceSpec>().is_err());
        assert!("nonsense".parse::<ResonanceSpec>().is_err());
    }

    #[test]
    fn first_body_spherical_kills_k_coefficients() {
        let p = BodyPairParams::new(
            0.56, 0.44, 0.6, 0.4, 0.0, 0.0321, 0.2226, 0.1443, 18.2, 0.02,
        )
        .unwrap();
        let co = coefficients(&ResonanceContext::from(&p), ResonanceSpec::SYNCHRONOUS);
        assert_eq!(co.k1, 0.0);
        assert_eq!(co.k2, 0.0);
        assert_eq!(co.k3, 0.0);
        assert_eq!(co.k4, 0.0);
        assert_eq!(co.k5, 0.0);
        assert_eq!(co.l4, 0.0);
        assert_eq!(co.l5, 0.0);
        assert!(co.l1 > 0.0 && co.l2 > 0.0 && co.l3 > 0.0);
    }

    #[test]
    fn three_halves_circular_limit() {
        let ctx = patroclus_ctx(0.0);
        let co = coefficients(&ctx, ResonanceSpec::THREE_HALVES);
        assert_eq!(co.k1, 0.0);
        assert_eq!(co.k2, 0.0);
        assert_eq!(co.k3, 0.0);
        assert_eq!(co.k4, 0.0);
        let expected = 9.0 * ctx.d1 * ctx.d2 * ctx.g / (16.0 * ctx.a.powi(5));
        assert!(rel_close(co.k5, expected, 1e-15));
        assert!(rel_close(co.l5, expected, 1e-15));
    }

    #[test]
    fn synchronous_k1_closed_form() {
        let ctx = patroclus_ctx(0.02);
        let co = coefficients(&ctx, ResonanceSpec::SYNCHRONOUS);
        let expected = 3.0 * 0.0482 * ctx.g * 0.44 / (2.0 * ctx.a.powi(3)) * (1.0 - 2.5 * 0.0004);
        assert!(rel_close(co.k1, expected, 1e-15));
    }

    #[test]
    fn printed_formulas_match_series_average() {
        for e in [0.0, 0.02, 0.1, 0.27, 0.5] {
            let ctx = patroclus_ctx(e);
            for spec in [
                ResonanceSpec::SYNCHRONOUS,
                ResonanceSpec::THREE_HALVES,
                ResonanceSpec::MIXED,
            ] {
                let a = coefficients(&ctx, spec);
                let b = coefficients_from_series(&ctx, spec);
                for (x, y, name) in [
                    (a.k1, b.k1, "k1"),
                    (a.k2, b.k2, "k2"),
                    (a.k3, b.k3, "k3"),
                    (a.k4, b.k4, "k4"),
                    (a.k5, b.k5, "k5"),
                    (a.l1, b.l1, "l1"),
                    (a.l2, b.l2, "l2"),
                    (a.l3, b.l3, "l3"),
                    (a.l4, b.l4, "l4"),
                    (a.l5, b.l5, "l5"),
                ] {
                    assert!(
                        (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300),
                        "{spec} e={e} {name}: {x} vs {y}"
                    );
                }
            }
        }
    }

    #[test]
    fn coefficient_sign_pattern() {
        // k4 = l4 and k5 = l5 in all three resonances; sign thresholds at
        // e = sqrt(2/5) and 1/sqrt(11) for the synchronous case.
        for e in [0.0, 0.1, 0.3, 0.6, 0.7] {
            let ctx = patroclus_ctx(e);
            for spec in [
                ResonanceSpec::SYNCHRONOUS,
                ResonanceSpec::THREE_HALVES,
                ResonanceSpec::MIXED,
            ] {
                let co = coefficients(&ctx, spec);
                assert_eq!(co.k4, co.l4, "{spec} e={e}");
                assert_eq!(co.k5, co.l5, "{spec} e={e}");
            }
            let co = coefficients(&ctx, ResonanceSpec::SYNCHRONOUS);
            assert!(co.k2 > 0.0 && co.l2 > 0.0 && co.k5 > 0.0 && co.l5 > 0.0);
            assert_eq!(co.k1 > 0.0, e < (2.0f64 / 5.0).sqrt(), "e={e}");
            assert_eq!(co.k3 > 0.0, e < 1.0 / 11.0f64.sqrt(), "e={e}");
            assert_eq!(co.k4 > 0.0, e < 1.0 / 11.0f64.sqrt(), "e={e}");
            if e > 0.0 {
                let co32 = coefficients(&ctx, ResonanceSpec::THREE_HALVES);
                for v in [
                    co32.k1, co32.k2, co32.k3, co32.k4, co32.k5, co32.l1, co32.l2, co32.l3,
                    co32.l4, co32.l5,
                ] {
                    assert!(v > 0.0, "e={e}");
                }
            }
        }
    }

    #[test]
    fn conservative_equilibria_are_the_four_corners() {
        let ctx = patroclus_ctx(0.02);
        let search = equilibria(
            &ctx,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinSpin,
            &DissipationSpec::None,
            &[],
        )
        .unwrap();
        assert_eq!(search.equilibria.len(), 4);
        for eq in &search.equilibria {
            assert!(eq.residual < 1e-15, "residual {}", eq.residual);
        }
    }

    #[test]
    fn conservative_extra_seeds_merge_into_corners() {
        // Newton from generic seeds lands on the trivial corners for the
        // Patroclus coefficients; duplicates are merged.
        let ctx = patroclus_ctx(0.02);
        let search = equilibria(
            &ctx,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinSpin,
            &DissipationSpec::None,
            &[(0.4, 0.3), (-0.5, 2.9), (2.8, -0.2)],
        )
        .unwrap();
        assert!(search.failed_seeds.is_empty());
        assert_eq!(search.equilibria.len(), 4);
    }

    #[test]
    fn uncoupled_dissipative_equilibrium_closed_form() {
        let p = BodyPairParams::patroclus_menoetius();
        let ctx = ResonanceContext::from(&p);
        let diss = DissipationSpec::averaged(&p, 1e-3, 2e-3).unwrap();
        let search = equilibria(
            &ctx,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinOrbit,
            &diss,
            &[],
        )
        .unwrap();
        assert!(!search.equilibria.is_empty());
        let co = coefficients(&ctx, ResonanceSpec::SYNCHRONOUS);
        let rates = diss.averaged_rates_at(ctx.e, ctx.c1, ctx.c2).unwrap();
        let expected_phi1 = (-rates.gammabar1 * (1.0 - rates.mubar1) / co.k1).asin();
        let near_origin = search
            .equilibria
            .iter()
            .min_by(|a, b| a.phi1.abs().partial_cmp(&b.phi1.abs()).unwrap())
            .unwrap();
        assert!((near_origin.phi1 - expected_phi1).abs() < 1e-12);
    }

    #[test]
    fn dissipation_beyond_restoring_torque_yields_no_equilibrium() {
        let p = BodyPairParams::patroclus_menoetius();
        let ctx = ResonanceContext::from(&p);
        // mubar(0.02) - 1 ~ 6e-4 so gammabar ~ 1e3 overwhelms K1 ~ 0.03.
        let diss = DissipationSpec::averaged(&p, 1e6, 1e6).unwrap();
        let search = equilibria(
            &ctx,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinOrbit,
            &diss,
            &[],
        )
        .unwrap();
        assert!(search.equilibria.is_empty());
        assert!(!search.failed_seeds.is_empty());
    }

    #[test]
    fn coupled_dissipative_equilibrium_near_origin() {
        let p = BodyPairParams::patroclus_menoetius();
        let ctx = ResonanceContext::from(&p);
        let diss = DissipationSpec::averaged(&p, 1e-3, 1e-3).unwrap();
        let search = equilibria(
            &ctx,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinSpin,
            &diss,
            &[],
        )
        .unwrap();
        let eq = search
            .equilibria
            .iter()
            .min_by(|a, b| {
                (a.phi1.abs() + a.phi2.abs())
                    .partial_cmp(&(b.phi1.abs() + b.phi2.abs()))
                    .unwrap()
            })
            .expect("equilibrium near the origin");
        assert!(eq.phi1 != 0.0 && eq.phi1.abs() < 0.1);
        assert!(eq.residual < 1e-12);
        // Residual substitution through an independent evaluation.
        let co = coefficients(&ctx, ResonanceSpec::SYNCHRONOUS);
        let rates = diss.averaged_rates_at(ctx.e, ctx.c1, ctx.c2).unwrap();
        let g1 = co.k1 * eq.phi1.sin()
            + co.k2 * eq.phi1.sin()
            + co.k3 * (2.0 * eq.phi1).sin()
            + co.k4 * (eq.phi1 + eq.phi2).sin()
            + co.k5 * (eq.phi1 - eq.phi2).sin()
            + rates.gammabar1 * (1.0 - rates.mubar1);
        assert!(g1.abs() < 1e-12);
    }

    #[test]
    fn synchronous_origin_stable_below_coefficient_threshold() {
        // Purely imaginary spectrum for e < 1/sqrt(11) (chi = 1).
        for e in [0.0, 0.1, 0.2, 0.3] {
            let ctx = patroclus_ctx(e);
            let eq = Equilibrium {
                phi1: 0.0,
                phi2: 0.0,
                residual: 0.0,
            };
            let report = linearize(
                &ctx,
                ResonanceSpec::SYNCHRONOUS,
                Coupling::SpinSpin,
                &DissipationSpec::None,
                &eq,
            )
            .unwrap();
            assert!(report.max_real.abs() <= 1e-10, "e={e}: {}", report.max_real);
        }
    }

    #[test]
    fn three_halves_origin_stable_for_all_eccentricities() {
        for k in 0..10 {
            let e = 0.1 * k as f64;
            let ctx = patroclus_ctx(e);
            let eq = Equilibrium {
                phi1: 0.0,
                phi2: 0.0,
                residual: 0.0,
            };
            for coupling in [Coupling::SpinOrbit, Coupling::SpinSpin] {
                let report = linearize(
                    &ctx,
                    ResonanceSpec::THREE_HALVES,
                    coupling,
                    &DissipationSpec::None,
                    &eq,
                )
                .unwrap();
                assert!(report.max_real.abs() <= 1e-10, "e={e}: {}", report.max_real);
            }
        }
    }

    #[test]
    fn uncoupled_origin_flips_at_two_fifths() {
        let eq = Equilibrium {
            phi1: 0.0,
            phi2: 0.0,
            residual: 0.0,
        };
        let max_real_at = |e: f64| {
            linearize(
                &patroclus_ctx(e),
                ResonanceSpec::SYNCHRONOUS,
                Coupling::SpinOrbit,
                &DissipationSpec::None,
                &eq,
            )
            .unwrap()
            .max_real
        };
        assert!(max_real_at(0.632).abs() <= 1e-10);
        assert!(max_real_at(0.633) > 1e-3);
    }

    #[test]
    fn dissipative_uncoupled_eigenvalues_closed_form() {
        let p = BodyPairParams::patroclus_menoetius();
        let ctx = ResonanceContext::from(&p);
        let co = coefficients(&ctx, ResonanceSpec::SYNCHRONOUS);
        // gammabar at half the stability bound sqrt(8 K1 C1).
        let gb1 = 0.5 * (8.0 * co.k1 * ctx.c1).sqrt();
        let gb2 = 0.5 * (8.0 * co.l1 * ctx.c2).sqrt();
        let diss = DissipationSpec::averaged_from_rates(&p, gb1, gb2).unwrap();
        let rates = diss.averaged_rates_at(ctx.e, ctx.c1, ctx.c2).unwrap();
        let search = equilibria(
            &ctx,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinOrbit,
            &diss,
            &[],
        )
        .unwrap();
        let eq = search
            .equilibria
            .iter()
            .min_by(|a, b| {
                (a.phi1.abs() + a.phi2.abs())
                    .partial_cmp(&(b.phi1.abs() + b.phi2.abs()))
                    .unwrap()
            })
            .unwrap();
        let report = linearize(
            &ctx,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinOrbit,
            &diss,
            eq,
        )
        .unwrap();
        assert!(report.max_real < 0.0);
        // Closed-form eigenvalues.
        let mut expected: Vec<Complex64> = Vec::new();
        for (gb, c, q, phi) in [
            (rates.gammabar1, ctx.c1, co.k1, eq.phi1),
            (rates.gammabar2, ctx.c2, co.l1, eq.phi2),
        ] {
            let half =
                Complex64::new((gb / c) * (gb / c) - 8.0 * q * phi.cos() / c, 0.0).sqrt() / 2.0;
            let base = Complex64::new(-gb / (2.0 * c), 0.0);
            expected.push(base + half);
            expected.push(base - half);
        }
        expected.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        for (got, want) in report.eigenvalues.iter().zip(&expected) {
            let err = (Complex64::new(got.0, got.1) - want).norm();
            assert!(err <= 1e-10 * want.norm(), "{got:?} vs {want}");
        }
    }

    #[test]
    fn conservative_origin_eigenvalues_satisfy_biquadratic() {
        for e in [0.0, 0.1, 0.25] {
            let ctx = patroclus_ctx(e);
            let eq = Equilibrium {
                phi1: 0.0,
                phi2: 0.0,
                residual: 0.0,
            };
            let report = linearize(
                &ctx,
                ResonanceSpec::SYNCHRONOUS,
                Coupling::SpinSpin,
                &DissipationSpec::None,
                &eq,
            )
            .unwrap();
            for (re, im) in report.eigenvalues {
                let x = Complex64::new(re, im);
                let residual = x.powu(4) + report.alpha * x.powu(2) + report.beta;
                let scale = report.beta.abs().max(report.alpha.abs());
                assert!(residual.norm() <= 1e-10 * scale, "e={e}");
            }
        }
    }

    /// The general eigenvalue route must agree with the biquadratic at
    /// conservative non-origin equilibria too (same block structure).
    #[test]
    fn general_route_satisfies_biquadratic_at_other_corners() {
        let ctx = patroclus_ctx(0.02);
        let pi = std::f64::consts::PI;
        for corner in [(0.0, pi), (pi, 0.0), (pi, pi)] {
            let eq = Equilibrium {
                phi1: corner.0,
                phi2: corner.1,
                residual: 0.0,
            };
            let report = linearize(
                &ctx,
                ResonanceSpec::SYNCHRONOUS,
                Coupling::SpinSpin,
                &DissipationSpec::None,
                &eq,
            )
            .unwrap();
            for (re, im) in report.eigenvalues {
                let x = Complex64::new(re, im);
                let residual = x.powu(4) + report.alpha * x.powu(2) + report.beta;
                let scale = report.beta.abs().max(report.alpha.abs()).max(1e-300);
                assert!(residual.norm() <= 1e-9 * scale, "corner {corner:?}");
            }
        }
    }

    proptest! {
        /// Discriminant identity: alpha^2 - 4 beta equals
        /// 4 (a1/C1 - b2/C2)^2 + 16 a2 b1 / (C1 C2) at any equilibrium of
        /// any parameter draw.
        #[test]
        fn discriminant_identity(
            p in crate::bodies::tests::valid_params(),
            phi1 in -3.2f64..3.2,
            phi2 in -3.2f64..3.2,
        ) {
            let ctx = ResonanceContext::from(&p);
            let eq = Equilibrium { phi1, phi2, residual: 0.0 };
            let report = linearize(
                &ctx,
                ResonanceSpec::SYNCHRONOUS,
                Coupling::SpinSpin,
                &DissipationSpec::None,
                &eq,
            ).unwrap();
            let lhs = report.alpha * report.alpha - 4.0 * report.beta;
            let rhs = 4.0 * (report.a1 / ctx.c1 - report.b2 / ctx.c2).powi(2)
                + 16.0 * report.a2 * report.b1 / (ctx.c1 * ctx.c2);
            // Relative to the magnitudes entering the cancellation.
            let scale = (report.alpha * report.alpha)
                .max(4.0 * report.beta.abs())
                .max(rhs.abs())
                .max(1e-300);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        /// At the origin a2 b1 = (K4 - K5)^2 >= 0.
        #[test]
        fn cross_product_is_square_at_origin(p in crate::bodies::tests::valid_params()) {
            let ctx = ResonanceContext::from(&p);
            let co = coefficients(&ctx, ResonanceSpec::SYNCHRONOUS);
            let eq = Equilibrium { phi1: 0.0, phi2: 0.0, residual: 0.0 };
            let report = linearize(
                &ctx,
                ResonanceSpec::SYNCHRONOUS,
                Coupling::SpinSpin,
                &DissipationSpec::None,
                &eq,
            ).unwrap();
            let expected = (co.k4 - co.k5) * (co.k4 - co.k5);
            let scale = expected.abs().max(1e-300);
            prop_assert!((report.a2 * report.b1 - expected).abs() <= 1e-12 * scale);
            prop_assert!(report.a2 * report.b1 >= 0.0);
        }
    }

    #[test]
    fn map_conservative_origin_is_flat_zero() {
        let p = BodyPairParams::patroclus_menoetius();
        let map = MapSpec {
            a_min: 15.0,
            a_max: 30.0,
            e_min: 0.0,
            e_max: 0.29,
            na: 4,
            ne: 4,
            equilibrium: (0.0, 0.0),
        };
        let cells = stability_map(
            &p,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinSpin,
            &DissipationSpec::None,
            &map,
        )
        .unwrap();
        assert_eq!(cells.len(), 16);
        for cell in &cells {
            assert_eq!(cell.status, CellStatus::Ok);
            assert!(cell.report.unwrap().max_real.abs() <= 1e-10);
        }
    }

    #[test]
    fn map_missing_equilibrium_cells_are_flagged() {
        let p = BodyPairParams::patroclus_menoetius();
        // e > 0 throughout so the dissipative drift term never vanishes.
        let map = MapSpec {
            a_min: 15.0,
            a_max: 30.0,
            e_min: 0.1,
            e_max: 0.3,
            na: 2,
            ne: 2,
            equilibrium: (0.0, 0.0),
        };
        let diss = DissipationSpec::averaged(&p, 1e6, 1e6).unwrap();
        let cells = stability_map(
            &p,
            ResonanceSpec::SYNCHRONOUS,
            Coupling::SpinOrbit,
            &diss,
            &map,
        )
        .unwrap();
        assert!(cells
            .iter()
            .all(|c| c.status == CellStatus::Missing && c.report.is_none()));
    }

    #[test]
    fn map_rejects_bad_grid() {
        let p = BodyPairParams::patroclus_menoetius();
        let map = MapSpec {
            a_min: 15.0,
            a_max: 30.0,
            e_min: 0.0,
            e_max: 0.3,
            na: 1,
            ne: 4,
            equilibrium: (0.0, 0.0),
        };
        assert!(matches!(
            stability_map(
                &p,
                ResonanceSpec::SYNCHRONOUS,
                Coupling::SpinSpin,
                &DissipationSpec::None,
                &map
            ),
            Err(StabilityError::InvalidGrid(_))
        ));
    }
}
