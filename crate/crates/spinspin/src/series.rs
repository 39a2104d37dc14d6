//! Time-expanded form of the coupling potential, truncated at second order
//! in the eccentricity.
//!
//! Each term is stored as a machine-readable record: a rational amplitude,
//! integer powers of `e`, `d_j`, `q_j`, `M_j` and `a`, and the integer
//! multipliers of `t`, `theta_1`, `theta_2` inside the cosine. The table
//! feeds three consumers: the truncated evaluator [`v_expanded`], the
//! `dump-potential` CSV export, and the resonant-averaging route in
//! [`crate::stability`].

use crate::bodies::BodyPairParams;

/// One cosine term of the expanded potential:
/// `(num/den) G e^e_pow d1^.. d2^.. q1^.. q2^.. M1^m1_pow M2^m2_pow / a^a_pow
///  * cos(t_mult t + th1_mult theta1 + th2_mult theta2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesTerm {
    pub num: i32,
    pub den: i32,
    pub e_pow: u8,
    pub d1_pow: u8,
    pub d2_pow: u8,
    pub q1_pow: u8,
    pub q2_pow: u8,
    pub m1_pow: i8,
    pub m2_pow: i8,
    pub a_pow: u8,
    pub t_mult: i8,
    pub th1_mult: i8,
    pub th2_mult: i8,
}

impl SeriesTerm {
    /// Amplitude of the cosine (everything except the cosine itself).
    pub fn amplitude(&self, p: &BodyPairParams) -> f64 {
        let mut amp = self.num as f64 / self.den as f64;
        amp *= p.e0.powi(self.e_pow as i32);
        amp *= p.d1.powi(self.d1_pow as i32);
        amp *= p.d2.powi(self.d2_pow as i32);
        amp *= p.q1.powi(self.q1_pow as i32);
        amp *= p.q2.powi(self.q2_pow as i32);
        amp *= p.m1.powi(self.m1_pow as i32);
        amp *= p.m2.powi(self.m2_pow as i32);
        amp * p.g() / p.a0.powi(self.a_pow as i32)
    }

    /// Cosine argument at `(t, theta1, theta2)`.
    #[inline]
    pub fn argument(&self, t: f64, theta1: f64, theta2: f64) -> f64 {
        self.t_mult as f64 * t + self.th1_mult as f64 * theta1 + self.th2_mult as f64 * theta2
    }

    pub fn eval(&self, p: &BodyPairParams, t: f64, theta1: f64, theta2: f64) -> f64 {
        self.amplitude(p) * self.argument(t, theta1, theta2).cos()
    }
}

#[allow(clippy::too_many_arguments)]
const fn t3(
    num: i32,
    den: i32,
    e: u8,
    d1: u8,
    d2: u8,
    q1: u8,
    q2: u8,
    m1: i8,
    m2: i8,
    t: i8,
    th1: i8,
    th2: i8,
) -> SeriesTerm {
    SeriesTerm {
        num,
        den,
        e_pow: e,
        d1_pow: d1,
        d2_pow: d2,
        q1_pow: q1,
        q2_pow: q2,
        m1_pow: m1,
        m2_pow: m2,
        a_pow: 3,
        t_mult: t,
        th1_mult: th1,
        th2_mult: th2,
    }
}

#[allow(clippy::too_many_arguments)]
const fn t5(
    num: i32,
    den: i32,
    e: u8,
    d1: u8,
    d2: u8,
    q1: u8,
    q2: u8,
    m1: i8,
    m2: i8,
    t: i8,
    th1: i8,
    th2: i8,
) -> SeriesTerm {
    SeriesTerm {
        num,
        den,
        e_pow: e,
        d1_pow: d1,
        d2_pow: d2,
        q1_pow: q1,
        q2_pow: q2,
        m1_pow: m1,
        m2_pow: m2,
        a_pow: 5,
        t_mult: t,
        th1_mult: th1,
        th2_mult: th2,
    }
}

/// First coupling term (`1/a^3` family) expanded to `O(e^2)`.
pub const V2_SERIES: [SeriesTerm; 18] = [
    t3(-1, 4, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0),
    t3(-3, 8, 2, 0, 0, 1, 0, 0, 1, 0, 0, 0),
    t3(-1, 4, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0),
    t3(-3, 8, 2, 0, 0, 0, 1, 1, 0, 0, 0, 0),
    t3(-3, 4, 1, 0, 0, 1, 0, 0, 1, 1, 0, 0),
    t3(-3, 4, 1, 0, 0, 0, 1, 1, 0, 1, 0, 0),
    t3(-9, 8, 2, 0, 0, 1, 0, 0, 1, 2, 0, 0),
    t3(-9, 8, 2, 0, 0, 0, 1, 1, 0, 2, 0, 0),
    t3(3, 8, 1, 1, 0, 0, 0, 0, 1, 1, -2, 0),
    t3(-3, 4, 0, 1, 0, 0, 0, 0, 1, 2, -2, 0),
    t3(15, 8, 2, 1, 0, 0, 0, 0, 1, 2, -2, 0),
    t3(-21, 8, 1, 1, 0, 0, 0, 0, 1, 3, -2, 0),
    t3(-51, 8, 2, 1, 0, 0, 0, 0, 1, 4, -2, 0),
    t3(3, 8, 1, 0, 1, 0, 0, 1, 0, 1, 0, -2),
    t3(-3, 4, 0, 0, 1, 0, 0, 1, 0, 2, 0, -2),
    t3(15, 8, 2, 0, 1, 0, 0, 1, 0, 2, 0, -2),
    t3(-21, 8, 1, 0, 1, 0, 0, 1, 0, 3, 0, -2),
    t3(-51, 8, 2, 0, 1, 0, 0, 1, 0, 4, 0, -2),
];

/// Second coupling term (`1/a^5` family) expanded to `O(e^2)`.
pub const V4_SERIES: [SeriesTerm; 68] = [
    t5(-45, 448, 0, 0, 2, 0, 0, 1, -1, 0, 0, 0),
    t5(-225, 448, 2, 0, 2, 0, 0, 1, -1, 0, 0, 0),
    t5(-45, 448, 0, 2, 0, 0, 0, -1, 1, 0, 0, 0),
    t5(-225, 448, 2, 2, 0, 0, 0, -1, 1, 0, 0, 0),
    t5(-45, 224, 0, 0, 0, 2, 0, -1, 1, 0, 0, 0),
    t5(-225, 224, 2, 0, 0, 2, 0, -1, 1, 0, 0, 0),
    t5(-9, 16, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    t5(-45, 16, 2, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    t5(-45, 224, 0, 0, 0, 0, 2, 1, -1, 0, 0, 0),
    t5(-225, 224, 2, 0, 0, 0, 2, 1, -1, 0, 0, 0),
    t5(-225, 448, 1, 0, 2, 0, 0, 1, -1, 1, 0, 0),
    t5(-225, 448, 1, 2, 0, 0, 0, -1, 1, 1, 0, 0),
    t5(-225, 224, 1, 0, 0, 2, 0, -1, 1, 1, 0, 0),
    t5(-45, 16, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0),
    t5(-225, 224, 1, 0, 0, 0, 2, 1, -1, 1, 0, 0),
    t5(-225, 224, 2, 0, 2, 0, 0, 1, -1, 2, 0, 0),
    t5(-225, 224, 2, 2, 0, 0, 0, -1, 1, 2, 0, 0),
    t5(-225, 112, 2, 0, 0, 2, 0, -1, 1, 2, 0, 0),
    t5(-45, 8, 2, 0, 0, 1, 1, 0, 0, 2, 0, 0),
    t5(-225, 112, 2, 0, 0, 0, 2, 1, -1, 2, 0, 0),
    t5(-75, 128, 2, 2, 0, 0, 0, -1, 1, 2, -4, 0),
    t5(225, 128, 1, 2, 0, 0, 0, -1, 1, 3, -4, 0),
    t5(-75, 64, 0, 2, 0, 0, 0, -1, 1, 4, -4, 0),
    t5(825, 64, 2, 2, 0, 0, 0, -1, 1, 4, -4, 0),
    t5(-975, 128, 1, 2, 0, 0, 0, -1, 1, 5, -4, 0),
    t5(-3825, 128, 2, 2, 0, 0, 0, -1, 1, 6, -4, 0),
    t5(-75, 224, 1, 1, 0, 1, 0, -1, 1, 1, -2, 0),
    t5(-15, 32, 1, 1, 0, 0, 1, 0, 0, 1, -2, 0),
    t5(-75, 112, 0, 1, 0, 1, 0, -1, 1, 2, -2, 0),
    t5(-75, 112, 2, 1, 0, 1, 0, -1, 1, 2, -2, 0),
    t5(-15, 16, 0, 1, 0, 0, 1, 0, 0, 2, -2, 0),
    t5(-15, 16, 2, 1, 0, 0, 1, 0, 0, 2, -2, 0),
    t5(-675, 224, 1, 1, 0, 1, 0, -1, 1, 3, -2, 0),
    t5(-135, 32, 1, 1, 0, 0, 1, 0, 0, 3, -2, 0),
    t5(-3975, 448, 2, 1, 0, 1, 0, -1, 1, 4, -2, 0),
    t5(-795, 64, 2, 1, 0, 0, 1, 0, 0, 4, -2, 0),
    t5(-225, 448, 2, 1, 0, 1, 0, -1, 1, 0, 2, 0),
    t5(-45, 64, 2, 1, 0, 0, 1, 0, 0, 0, 2, 0),
    t5(-75, 128, 2, 0, 2, 0, 0, 1, -1, 2, 0, -4),
    t5(225, 128, 1, 0, 2, 0, 0, 1, -1, 3, 0, -4),
    t5(-75, 64, 0, 0, 2, 0, 0, 1, -1, 4, 0, -4),
    t5(825, 64, 2, 0, 2, 0, 0, 1, -1, 4, 0, -4),
    t5(-975, 128, 1, 0, 2, 0, 0, 1, -1, 5, 0, -4),
    t5(-3825, 128, 2, 0, 2, 0, 0, 1, -1, 6, 0, -4),
    t5(-15, 32, 1, 0, 1, 1, 0, 0, 0, 1, 0, -2),
    t5(-75, 224, 1, 0, 1, 0, 1, 1, -1, 1, 0, -2),
    t5(-15, 16, 0, 0, 1, 1, 0, 0, 0, 2, 0, -2),
    t5(-15, 16, 2, 0, 1, 1, 0, 0, 0, 2, 0, -2),
    t5(-75, 112, 0, 0, 1, 0, 1, 1, -1, 2, 0, -2),
    t5(-75, 112, 2, 0, 1, 0, 1, 1, -1, 2, 0, -2),
    t5(-135, 32, 1, 0, 1, 1, 0, 0, 0, 3, 0, -2),
    t5(-675, 224, 1, 0, 1, 0, 1, 1, -1, 3, 0, -2),
    t5(-795, 64, 2, 0, 1, 1, 0, 0, 0, 4, 0, -2),
    t5(-3975, 448, 2, 0, 1, 0, 1, 1, -1, 4, 0, -2),
    t5(-105, 64, 2, 1, 1, 0, 0, 0, 0, 2, -2, -2),
    t5(315, 64, 1, 1, 1, 0, 0, 0, 0, 3, -2, -2),
    t5(-105, 32, 0, 1, 1, 0, 0, 0, 0, 4, -2, -2),
    t5(1155, 32, 2, 1, 1, 0, 0, 0, 0, 4, -2, -2),
    t5(-1365, 64, 1, 1, 1, 0, 0, 0, 0, 5, -2, -2),
    t5(-5355, 64, 2, 1, 1, 0, 0, 0, 0, 6, -2, -2),
    t5(-9, 32, 0, 1, 1, 0, 0, 0, 0, 0, 2, -2),
    t5(-45, 32, 2, 1, 1, 0, 0, 0, 0, 0, 2, -2),
    t5(-45, 64, 1, 1, 1, 0, 0, 0, 0, 1, 2, -2),
    t5(-45, 32, 2, 1, 1, 0, 0, 0, 0, 2, 2, -2),
    t5(-45, 64, 2, 0, 1, 1, 0, 0, 0, 0, 0, 2),
    t5(-225, 448, 2, 0, 1, 0, 1, 1, -1, 0, 0, 2),
    t5(-45, 64, 1, 1, 1, 0, 0, 0, 0, 1, -2, 2),
    t5(-45, 32, 2, 1, 1, 0, 0, 0, 0, 2, -2, 2),
];

/// Evaluates the expanded `(V2, V4)` pair at `(theta1, theta2, t)`.
///
/// With `order2 = true` the full table is used (all terms through `e^2`);
/// with `order2 = false` the `e^2` rows are dropped, leaving the first-order
/// truncation.
pub fn v_expanded(
    params: &BodyPairParams,
    theta1: f64,
    theta2: f64,
    t: f64,
    order2: bool,
) -> (f64, f64) {
    let keep = |term: &SeriesTerm| order2 || term.e_pow < 2;
    let v2 = V2_SERIES
        .iter()
        .filter(|t| keep(t))
        .map(|term| term.eval(params, t, theta1, theta2))
        .sum();
    let v4 = V4_SERIES
        .iter()
        .filter(|t| keep(t))
        .map(|term| term.eval(params, t, theta1, theta2))
        .sum();
    (v2, v4)
}
