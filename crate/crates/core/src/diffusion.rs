//! Shift diffusions with periodic piecewise-constant drift.
//!
//! The drift is `μ_j` on `[j, j+1)` (indices mod m) and the diffusion
//! coefficient is 1. Watching the process at integer crossings gives a mod-m
//! walk without holds, whose probabilities follow from the scale function.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{self, WalkSpec};
use crate::roots;

/// Tolerance on `|p_i - 1/2|` for the case split of the m = 3 inversion.
pub const HALF_TOL: f64 = 1e-10;

/// Relative tolerance on `Πp - Πq` accepted as recurrent by the inversion.
pub const RECURRENCE_TOL: f64 = 1e-9;

/// Largest denominator tried when `θ` is rational.
const MAX_DENOMINATOR: u32 = 12;

/// `r(u) = (e^{2u} - 1)/u`, with `r(0) = 2`.
pub fn r_func(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        // 2 + 2u + 4u²/3 + 2u³/3
        2.0 + u * (2.0 + u * (4.0 / 3.0 + u * (2.0 / 3.0)))
    } else {
        (2.0 * u).exp_m1() / u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftProfile {
    pub mu: Vec<f64>,
}

impl DriftProfile {
    pub fn new(mu: Vec<f64>) -> Result<DriftProfile> {
        if mu.is_empty() {
            return Err(Error::InvalidSpec("drift profile needs m >= 1".into()));
        }
        if let Some(bad) = mu.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec(format!("drift {bad} is not finite")));
        }
        Ok(DriftProfile { mu })
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    /// `μ_k` for any integer `k`, read periodically.
    pub fn at(&self, k: i64) -> f64 {
        self.mu[k.rem_euclid(self.m() as i64) as usize]
    }

    pub fn total(&self) -> f64 {
        self.mu.iter().sum()
    }
}

/// `p_j = r(μ_{j-1}) / (r(μ_{j-1}) + r(-μ_j))`, `q_j = 1 - p_j`.
pub fn embedded_probs(d: &DriftProfile) -> WalkSpec {
    let p: Vec<f64> = (0..d.m() as i64)
        .map(|j| {
            let left = r_func(d.at(j - 1));
            left / (left + r_func(-d.at(j)))
        })
        .collect();
    let q = (0..d.m() as i64)
        .map(|j| {
            let right = r_func(-d.at(j));
            right / (r_func(d.at(j - 1)) + right)
        })
        .collect();
    WalkSpec::new(d.m(), p, q).expect("embedded probabilities lie in (0, 1)")
}

/// The scale function at the integer `n`, normalised so that `S(0) = 0`.
pub fn scale_at_integers(d: &DriftProfile, n: i64) -> f64 {
    if n > 0 {
        let mut cum = 0.0f64;
        let mut s = 0.0;
        for k in 0..n {
            cum += d.at(k);
            s += r_func(d.at(k)) * (-2.0 * cum).exp();
        }
        s
    } else {
        // -Σ_{k=n}^{-1} r(μ_k) exp(2 Σ_{j=k+1}^{-1} μ_j)
        let mut cum = 0.0f64;
        let mut s = 0.0;
        for k in (n..0).rev() {
            s -= r_func(d.at(k)) * (2.0 * cum).exp();
            cum += d.at(k);
        }
        s
    }
}

/// Scale function values on a window of integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleTable {
    pub values: BTreeMap<i64, f64>,
}

impl ScaleTable {
    pub fn build(d: &DriftProfile, lo: i64, hi: i64) -> ScaleTable {
        ScaleTable {
            values: (lo..=hi).map(|n| (n, scale_at_integers(d, n))).collect(),
        }
    }

    /// Probability of hitting `n + 1` before `n - 1` from `n`.
    pub fn up_probability(&self, n: i64) -> Option<f64> {
        let (lo, mid, hi) = (
            self.values.get(&(n - 1))?,
            self.values.get(&n)?,
            self.values.get(&(n + 1))?,
        );
        Some((mid - lo) / (hi - lo))
    }
}

/// `ρ = exp(2 Σ μ_j)`.
pub fn diffusion_rho(d: &DriftProfile) -> f64 {
    (2.0 * d.total()).exp()
}

/// `1 / (1 + exp(-2 Σ μ_j))`.
pub fn diffusion_p_star(d: &DriftProfile) -> f64 {
    1.0 / (1.0 + (-2.0 * d.total()).exp())
}

/// Probability that Brownian motion with drift `mu` started at 0 hits `b`
/// before `a`.
pub fn anderson_hit_prob(mu: f64, a: f64, b: f64) -> Result<f64> {
    if !(a < 0.0 && b > 0.0) {
        return Err(Error::InvalidSpec(format!("need a < 0 < b, got a = {a}, b = {b}")));
    }
    if mu.abs() < 1e-12 {
        return Ok(-a / (b - a));
    }
    let num = (2.0 * a * mu).exp_m1();
    let den = (-2.0 * (b - a) * mu).exp_m1();
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionCase {
    /// every `p_i` is one half
    AllHalf,
    /// exactly one `p_i` is one half
    OneHalf,
    /// no `p_i` is one half
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootRoute {
    /// `θ = j/k` and the equation was solved as a polynomial in `w^{1/k}`
    Polynomial,
    Transcendental,
}

/// Solved drift triple with the intermediate quantities used to get it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inversion {
    pub profile: DriftProfile,
    pub case: InversionCase,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub w: Option<f64>,
    pub route: Option<RootRoute>,
}

fn is_half(p: f64) -> bool {
    (p - 0.5).abs() <= HALF_TOL
}

/// Drift rates of the recurrent m = 3 shift diffusion whose embedded walk
/// has up-probabilities `(p0, p1, p2)`.
pub fn invert_drifts_m3(p0: f64, p1: f64, p2: f64) -> Result<Inversion> {
    let walk = WalkSpec::from_up_probs(vec![p0, p1, p2])?;
    let excess = game::relative_excess(&walk);
    if excess.abs() > RECURRENCE_TOL {
        let (pp, qq): (f64, f64) = (walk.p().iter().product(), walk.q().iter().product());
        return Err(Error::NotRecurrent(pp - qq));
    }
    let p = [p0, p1, p2];
    let halves: Vec<usize> = (0..3).filter(|&i| is_half(p[i])).collect();
    match halves.len() {
        0 => invert_general(p),
        1 => {
            // relabel so that the half sits in class 2
            let k = (halves[0] + 1) % 3;
            let rot = [p[k], p[(k + 1) % 3], p[(k + 2) % 3]];
            let x = solve_one_half(rot[0])?;
            let local = [0.0, x, -x];
            let mu = (0..3).map(|j| local[(j + 3 - k) % 3]).collect();
            Ok(Inversion {
                profile: DriftProfile::new(mu)?,
                case: InversionCase::OneHalf,
                theta: None,
                alpha: None,
                w: None,
                route: None,
            })
        }
        // two halves force the third by recurrence
        _ => Ok(Inversion {
            profile: DriftProfile::new(vec![0.0; 3])?,
            case: InversionCase::AllHalf,
            theta: None,
            alpha: None,
            w: None,
            route: None,
        }),
    }
}

/// Solve `p0/q0 = (1 - e^{-2x})/(2x)`; the right side is `r(-x)/2`,
/// strictly decreasing in `x`.
fn solve_one_half(p0: f64) -> Result<f64> {
    let target = p0 / (1.0 - p0);
    let f = |x: f64| 0.5 * r_func(-x) - target;
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Ok(0.0);
    }
    let step = if f0 > 0.0 { 0.5 } else { -0.5 };
    let (a, b) = roots::scan_for_sign_change(f, 0.0, step, f0, 200)
        .ok_or_else(|| Error::RootBracket(format!("no drift reproduces p0 = {p0}")))?;
    roots::bisect(f, a.min(b), a.max(b), 1e-15)
}

fn invert_general(p: [f64; 3]) -> Result<Inversion> {
    let q = p.map(|x| 1.0 - x);
    let theta = (1.0 - q[1] / p[1]) / (1.0 - p[0] / q[0]);
    let alpha = q[2] / p[2] * theta;
    let (w, route) = match rational(theta) {
        Some((j, k)) => match polynomial_root(alpha, j, k) {
            Ok(w) => (w, RootRoute::Polynomial),
            Err(_) => (transcendental_root(alpha, theta)?, RootRoute::Transcendental),
        },
        None => (transcendental_root(alpha, theta)?, RootRoute::Transcendental),
    };
    let mu1 = 0.5 * w.ln();
    let profile = DriftProfile::new(vec![-(1.0 - theta) * mu1, mu1, -theta * mu1])?;
    Ok(Inversion {
        profile,
        case: InversionCase::General,
        theta: Some(theta),
        alpha: Some(alpha),
        w: Some(w),
        route: Some(route),
    })
}

/// `θ = j/k` with `0 < j < k <= MAX_DENOMINATOR`, if it is one.
fn rational(theta: f64) -> Option<(u32, u32)> {
    (2..=MAX_DENOMINATOR).find_map(|k| {
        let j = (theta * k as f64).round();
        let close = (theta * k as f64 - j).abs() < 1e-12;
        (close && j > 0.0 && j < k as f64).then_some((j as u32, k))
    })
}

/// Root other than 1 of `α z^k - z^j + 1 - α`, returned as `w = z^k`.
fn polynomial_root(alpha: f64, j: u32, k: u32) -> Result<f64> {
    let mut coeffs = vec![0.0; k as usize + 1];
    coeffs[0] = 1.0 - alpha;
    coeffs[j as usize] -= 1.0;
    coeffs[k as usize] += alpha;
    // divide out (z - 1)
    let n = coeffs.len();
    let mut quotient = vec![0.0; n - 1];
    let mut carry = 0.0;
    for i in (1..n).rev() {
        carry += coeffs[i];
        quotient[i - 1] = carry;
    }
    let h = |t: f64| {
        let z = t.exp();
        quotient.iter().rev().fold(0.0, |acc, c| acc * z + c)
    };
    let z = root_in_log_space(h)?.exp();
    Ok(z.powi(k as i32))
}

/// Root other than 1 of `α w - w^θ + 1 - α`, solved in `t = ln w`.
fn transcendental_root(alpha: f64, theta: f64) -> Result<f64> {
    let h = |t: f64| {
        if t == 0.0 {
            alpha - theta
        } else {
            (alpha * t.exp_m1() - (theta * t).exp_m1()) / t
        }
    };
    Ok(root_in_log_space(h)?.exp())
}

/// Sign change of `h` away from `t = 0`, searching both directions.
fn root_in_log_space<F: Fn(f64) -> f64>(h: F) -> Result<f64> {
    let h0 = h(0.0);
    if h0 == 0.0 {
        return Err(Error::RootBracket("root at w = 1 is double; no second root".into()));
    }
    for step in [1e-3, -1e-3] {
        if let Some((a, b)) = roots::scan_for_sign_change(&h, 0.0, step, h0, 80) {
            return roots::bisect(&h, a.min(b), a.max(b), 1e-15);
        }
    }
    Err(Error::RootBracket(format!(
        "no sign change of the deflated equation found (value {h0:e} at w = 1)"
    )))
}
