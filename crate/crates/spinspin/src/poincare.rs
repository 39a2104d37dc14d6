//! Poincare sections and long-run diagnostics.
//!
//! Keplerian models use the stroboscopic section `t mod 2*pi = 0` (the
//! integrator lands on the section times exactly by step clipping). The full
//! problem has no fixed period once the orbit evolves, so its section is the
//! pericenter passage `r sin f = 0` crossed from below; each crossing is
//! annotated with the osculating `(a, e)`.

use crate::bodies::BodyPairParams;
use crate::dynamics::{
    full_system, keplerian_system, orbital_elements, DissipationSpec, FullState, SpinState,
};
use crate::integrate::{
    propagate_events_observed, propagate_sampled, EventDirection, IntegrateError, IntegratorConfig,
};
use crate::kepler::TWO_PI;
use crate::potential::Coupling;
use rayon::prelude::*;
use serde::Serialize;

/// One section crossing. `theta1`/`theta2` are reduced to `[0, pi)` (the
/// dynamics is pi-periodic in each rotation angle); the raw accumulated
/// angles are kept for winding-number diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectionPoint {
    pub k: usize,
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub p1: f64,
    pub p2: f64,
    pub theta1_raw: f64,
    pub theta2_raw: f64,
    /// Osculating semimajor axis (full problem only).
    pub a: Option<f64>,
    /// Osculating eccentricity (full problem only).
    pub e: Option<f64>,
}

/// Seeds and horizon of a phase portrait.
#[derive(Debug, Clone, Serialize)]
pub struct PortraitSpec {
    pub seeds: Vec<SpinState>,
    /// Number of orbital periods to integrate each seed (one section point
    /// is produced per period, plus the initial point `k = 0`).
    pub n_sections: usize,
}

/// Per-seed section output. A propagation failure is recorded without
/// aborting the remaining seeds; points collected up to the failure are
/// retained.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed_index: usize,
    pub seed: SpinState,
    pub points: Vec<SectionPoint>,
    pub error: Option<String>,
}

/// Reduces a rotation angle to `[0, pi)`.
#[inline]
pub fn reduce_angle(theta: f64) -> f64 {
    theta.rem_euclid(std::f64::consts::PI)
}

fn spin_point(k: usize, t: f64, state: &SpinState) -> SectionPoint {
    SectionPoint {
        k,
        t,
        theta1: reduce_angle(state.theta1),
        theta2: reduce_angle(state.theta2),
        p1: state.p1,
        p2: state.p2,
        theta1_raw: state.theta1,
        theta2_raw: state.theta2,
        a: None,
        e: None,
    }
}

fn full_point(params: &BodyPairParams, k: usize, t: f64, state: &FullState) -> SectionPoint {
    let elements = orbital_elements(params, state).ok();
    SectionPoint {
        k,
        t,
        theta1: reduce_angle(state.theta1),
        theta2: reduce_angle(state.theta2),
        p1: state.p1,
        p2: state.p2,
        theta1_raw: state.theta1,
        theta2_raw: state.theta2,
        a: elements.map(|(a, _)| a),
        e: elements.map(|(_, e)| e),
    }
}

/// Stroboscopic sections of a Keplerian model: the state at `t = 2 pi k`,
/// `k = 0..=n_sections`, for every seed. Seeds run in parallel; output order
/// follows the seed order.
pub fn section_keplerian(
    params: &BodyPairParams,
    coupling: Coupling,
    diss: &DissipationSpec,
    spec: &PortraitSpec,
    cfg: &IntegratorConfig,
) -> Vec<SeedRun> {
    spec.seeds
        .par_iter()
        .enumerate()
        .map(|(seed_index, seed)| {
            let rhs = keplerian_system(*params, coupling, *diss);
            let mut points = Vec::with_capacity(spec.n_sections + 1);
            points.push(spin_point(0, 0.0, seed));
            let mut y = seed.to_array();
            let mut error = None;
            for k in 1..=spec.n_sections {
                let t0 = (k - 1) as f64 * TWO_PI;
                let t1 = k as f64 * TWO_PI;
                match crate::integrate::propagate_observed(&rhs, y, t0, t1, cfg, |_, _| {}) {
                    Ok((t_end, y_end)) => {
                        debug_assert_eq!(t_end, t1);
                        y = y_end;
                        points.push(spin_point(k, t_end, &SpinState::from_array(&y)));
                    }
                    Err(e) => {
                        error = Some(e.to_string());
                        break;
                    }
                }
            }
            SeedRun {
                seed_index,
                seed: *seed,
                points,
                error,
            }
        })
        .collect()
}

/// Pericenter sections of the full problem. Each seed starts at the
/// pericenter of the reference orbit (`f(0) = 0`) with the given spin state
/// and is integrated for `n_sections` reference periods; every rising zero
/// of `r sin f` becomes a section point with osculating elements attached.
pub fn section_full(
    params: &BodyPairParams,
    coupling: Coupling,
    diss: &DissipationSpec,
    spec: &PortraitSpec,
    cfg: &IntegratorConfig,
) -> Vec<SeedRun> {
    spec.seeds
        .par_iter()
        .enumerate()
        .map(|(seed_index, seed)| {
            let rhs = full_system(*params, coupling, *diss);
            let initial = FullState::at_pericenter(params, seed);
            let mut points = Vec::with_capacity(spec.n_sections + 1);
            points.push(full_point(params, 0, 0.0, &initial));
            let t_max = spec.n_sections as f64 * TWO_PI;
            let mut k = 0usize;
            let result = propagate_events_observed(
                &rhs,
                initial.to_array(),
                0.0,
                t_max,
                cfg,
                |_t, y| y[0] * y[1].sin(),
                EventDirection::Rising,
                |event| {
                    k += 1;
                    points.push(full_point(
                        params,
                        k,
                        event.t,
                        &FullState::from_array(&event.state),
                    ));
                },
            );
            SeedRun {
                seed_index,
                seed: *seed,
                points,
                error: result.err().map(|e| e.to_string()),
            }
        })
        .collect()
}

/// Time series of the osculating elements `(t, a, e)` along a full-problem
/// trajectory started at pericenter, sampled every `cadence` time units.
pub fn element_history(
    params: &BodyPairParams,
    coupling: Coupling,
    diss: &DissipationSpec,
    seed: &SpinState,
    t_max: f64,
    cadence: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, f64, f64)>, IntegrateError> {
    let rhs = full_system(*params, coupling, *diss);
    let initial = FullState::at_pericenter(params, seed);
    let traj = propagate_sampled(&rhs, initial.to_array(), 0.0, t_max, cfg, cadence)?;
    Ok(traj
        .t
        .iter()
        .zip(&traj.y)
        .filter_map(|(&t, y)| {
            orbital_elements(params, &FullState::from_array(y))
                .ok()
                .map(|(a, e)| (t, a, e))
        })
        .collect())
}

/// Mean of the last `n` section points in `(theta1, p1, theta2, p2)`,
/// used as the end-state marker of dissipative runs. Angles are averaged
/// after reduction, unwrapped around the final point to avoid boundary
/// artifacts.
pub fn end_state_marker(points: &[SectionPoint], n: usize) -> Option<(f64, f64, f64, f64)> {
    if points.is_empty() {
        return None;
    }
    let tail = &points[points.len().saturating_sub(n)..];
    let pivot = (tail[tail.len() - 1].theta1, tail[tail.len() - 1].theta2);
    let pi = std::f64::consts::PI;
    let unwrap = |x: f64, anchor: f64| {
        let mut d = (x - anchor) % pi;
        if d > pi / 2.0 {
            d -= pi;
        } else if d < -pi / 2.0 {
            d += pi;
        }
        anchor + d
    };
    let len = tail.len() as f64;
    let mut acc = (0.0, 0.0, 0.0, 0.0);
    for p in tail {
        acc.0 += unwrap(p.theta1, pivot.0);
        acc.1 += p.p1;
        acc.2 += unwrap(p.theta2, pivot.1);
        acc.3 += p.p2;
    }
    Some((acc.0 / len, acc.1 / len, acc.2 / len, acc.3 / len))
}
