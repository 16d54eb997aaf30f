//! Random and deterministic mixtures of two games.
//!
//! A random mixture of two mod-m games is again a mod-m game, so its
//! verdict follows from the product criterion. For two fair Parrondo games
//! the winning condition is equivalent to positivity of a degree-`2r`
//! polynomial `Q` (`r = m - 1`) on `x > a`, which has a double root at `a`.
//!
//! Periodic schedules such as `AB` or `AABB` are analysed exactly on the
//! product chain (class mod m) × (phase mod L).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{self, make_parrondo, GameClass, ParrondoSpec, WalkSpec};
use crate::linalg::{self, Matrix};
use crate::roots;

const HOLD_TOL: f64 = 1e-12;

/// Relative magnitude below which a coefficient counts as zero for Descartes.
pub const SIGN_ZERO_REL: f64 = 1e-12;

/// Random mixture of two Parrondo games with the same period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureProblem {
    pub game_a: ParrondoSpec,
    pub game_b: ParrondoSpec,
    /// probability of playing `game_a` at each step
    pub pi: f64,
}

/// Odds ratios of a mixture, with the game of larger off-lattice probability
/// playing the role of `(p, p')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureOdds {
    pub x: f64,
    pub y: f64,
    pub x_hat: f64,
    pub y_hat: f64,
    pub x_bar: f64,
    pub y_bar: f64,
    /// `(1 - π)/π` with `π` the weight of the `(x, y)` game
    pub lambda: f64,
}

impl MixtureProblem {
    pub fn new(game_a: ParrondoSpec, game_b: ParrondoSpec, pi: f64) -> Result<MixtureProblem> {
        if game_a.m != game_b.m {
            return Err(Error::PeriodMismatch {
                left: game_a.m,
                right: game_b.m,
            });
        }
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "mixing probability {pi} must lie strictly between 0 and 1"
            )));
        }
        Ok(MixtureProblem { game_a, game_b, pi })
    }

    pub fn m(&self) -> usize {
        self.game_a.m
    }

    /// `(upper game, lower game, weight of upper game)`, ordered so that the
    /// lower game has the smaller off-lattice probability.
    pub fn canonical(&self) -> (ParrondoSpec, ParrondoSpec, f64) {
        if self.game_b.p_off > self.game_a.p_off {
            (self.game_b, self.game_a, 1.0 - self.pi)
        } else {
            (self.game_a, self.game_b, self.pi)
        }
    }

    pub fn odds(&self) -> MixtureOdds {
        let (upper, lower, w) = self.canonical();
        let lambda = (1.0 - w) / w;
        let bar = |u: f64, l: f64| (u + lambda * l) / ((1.0 - u) + lambda * (1.0 - l));
        MixtureOdds {
            x: upper.x(),
            y: upper.y(),
            x_hat: lower.x(),
            y_hat: lower.y(),
            x_bar: bar(upper.p_off, lower.p_off),
            y_bar: bar(upper.p_on, lower.p_on),
            lambda,
        }
    }

    pub fn mixed_walk(&self) -> Result<WalkSpec> {
        game::mix_random(&make_parrondo(&self.game_a)?, &make_parrondo(&self.game_b)?, self.pi)
    }

    /// The polynomial whose positivity at `x` decides the verdict when both
    /// games are fair.
    pub fn certificate(&self) -> Result<QPolynomial> {
        let m = self.m();
        if m < 2 {
            return Err(Error::InvalidSpec("certificate needs m >= 2".into()));
        }
        let o = self.odds();
        Ok(q_polynomial(o.x_hat, o.lambda, m - 1))
    }
}

/// `y - x^(1-m)`: zero, positive or negative for fair, winning or losing.
pub fn fairness_odds_check(spec: &ParrondoSpec) -> f64 {
    spec.y() - spec.x().powi(1 - spec.m as i32)
}

pub fn mixture_verdict(mp: &MixtureProblem, tol: f64) -> Result<GameClass> {
    Ok(game::classify(&mp.mixed_walk()?, tol))
}

/// Coefficients `q_0 .. q_2r` of `Q(x)` in increasing degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QPolynomial {
    pub r: usize,
    pub a: f64,
    pub lam: f64,
    pub coeffs: Vec<f64>,
    pub sign_changes: usize,
}

impl QPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        horner(&derivative(&self.coeffs), x)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        horner(&derivative(&derivative(&self.coeffs)), x)
    }

    /// Largest coefficient magnitude, the scale for zero tests.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |s, c| s.max(c.abs()))
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &k)| i as f64 * k).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `a·b - c·d` with the rounding error of `c·d` recovered by an fma.
fn diff_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = (-c).mul_add(d, cd);
    a.mul_add(b, -cd) + err
}

/// Number of strict sign alternations among the coefficients, skipping
/// those below `SIGN_ZERO_REL` times the largest magnitude.
pub fn descartes_sign_changes(coeffs: &[f64]) -> usize {
    let scale = coeffs.iter().fold(0.0f64, |s, c| s.max(c.abs()));
    let threshold = SIGN_ZERO_REL * scale;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &c in coeffs {
        if c.abs() <= threshold {
            continue;
        }
        if last != 0.0 && c.signum() != last.signum() {
            changes += 1;
        }
        last = c;
    }
    changes
}

/// The mixture polynomial for lower-game odds `a`, mixing odds `lam` and
/// `r = m - 1`.
pub fn q_polynomial(a: f64, lam: f64, r: usize) -> QPolynomial {
    let ar = a.powi(r as i32);
    let l1 = 1.0 + lam;
    let inv = l1 + 1.0 / a;
    let up = l1 + a;
    let mut coeffs = Vec::with_capacity(2 * r + 1);
    for j in 0..r {
        let first = (l1 + ar) * inv.powi(j as i32) * lam.powi((r - j) as i32);
        let second = up.powi((r - j) as i32) * lam.powi(j as i32 + 1);
        coeffs.push(binomial(r, j) * ar * (first - second));
    }
    coeffs.push(diff_of_products(
        l1 + ar,
        (l1 * a + 1.0).powi(r as i32),
        l1 * ar + 1.0,
        up.powi(r as i32),
    ));
    for j in r + 1..=2 * r {
        let k = j - r;
        let first = inv.powi(k as i32) * lam.powi((2 * r - j + 1) as i32);
        let second = (l1 + 1.0 / ar) * up.powi((2 * r - j) as i32) * lam.powi(k as i32);
        coeffs.push(binomial(r, k) * ar * (first - second));
    }
    let sign_changes = descartes_sign_changes(&coeffs);
    QPolynomial {
        r,
        a,
        lam,
        coeffs,
        sign_changes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QDiagnostics {
    pub q_at_a: f64,
    pub qp_at_a: f64,
    pub qpp_at_a: f64,
    pub largest_positive_root: f64,
}

/// Divide by `(x - root)`, dropping the remainder.
fn deflate(c: &[f64], root: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n - 1];
    let mut carry = 0.0;
    for i in (1..n).rev() {
        carry = c[i] + carry * root;
        out[i - 1] = carry;
    }
    out
}

const ROOT_GRID: usize = 4000;

pub fn q_diagnostics(qp: &QPolynomial) -> Result<QDiagnostics> {
    let a = qp.a;
    let scale = qp.scale();
    if scale == 0.0 {
        return Err(Error::RootBracket("Q vanishes identically".into()));
    }
    let q_at_a = qp.eval(a);
    let qp_at_a = qp.derivative(a);
    let qpp_at_a = qp.second_derivative(a);

    let mut rest = deflate(&deflate(&qp.coeffs, a), a);
    let rest_scale = rest.iter().fold(0.0f64, |s, c| s.max(c.abs()));
    while rest.len() > 1 && rest.last().is_some_and(|c| c.abs() <= SIGN_ZERO_REL * rest_scale) {
        rest.pop();
    }
    let largest_positive_root = if rest.len() <= 1 {
        a
    } else {
        let lead = *rest.last().unwrap();
        let bound = 1.0
            + rest[..rest.len() - 1]
                .iter()
                .map(|c| (c / lead).abs())
                .fold(0.0f64, f64::max);
        if bound <= a {
            a
        } else {
            let f = |x: f64| horner(&rest, x);
            let lo = a * (1.0 + 1e-9) + 1e-12;
            let ratio = (bound / lo).ln() / ROOT_GRID as f64;
            let mut hi_x = bound;
            let mut hi_f = f(bound);
            let mut found = None;
            for k in (0..ROOT_GRID).rev() {
                let x = lo * (ratio * k as f64).exp();
                let fx = f(x);
                if fx == 0.0 {
                    found = Some(x);
                    break;
                }
                if fx.signum() != hi_f.signum() {
                    found = Some(roots::bisect(f, x, hi_x, 1e-14)?);
                    break;
                }
                hi_x = x;
                hi_f = fx;
            }
            found.unwrap_or(a)
        }
    };
    Ok(QDiagnostics {
        q_at_a,
        qp_at_a,
        qpp_at_a,
        largest_positive_root,
    })
}

/// A deterministic periodic schedule over the two games `A` and `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternSchedule {
    pattern: String,
}

impl PatternSchedule {
    pub fn new(pattern: &str) -> Result<PatternSchedule> {
        let pattern = pattern.trim().to_ascii_uppercase();
        if pattern.is_empty() || !pattern.chars().all(|c| c == 'A' || c == 'B') {
            return Err(Error::InvalidSpec(format!(
                "schedule {pattern:?} must be a nonempty string over {{A, B}}"
            )));
        }
        Ok(PatternSchedule { pattern })
    }

    pub fn period(&self) -> usize {
        self.pattern.len()
    }

    pub fn as_str(&self) -> &str {
        &self.pattern
    }

    /// `true` when phase `k` plays game `A`.
    pub fn plays_a(&self, k: usize) -> bool {
        self.pattern.as_bytes()[k % self.period()] == b'A'
    }
}

/// Transition matrix on (phase, class), state index `phase * m + class`.
pub fn pattern_chain(a: &WalkSpec, b: &WalkSpec, sched: &PatternSchedule) -> Result<Matrix> {
    if a.m() != b.m() {
        return Err(Error::PeriodMismatch {
            left: a.m(),
            right: b.m(),
        });
    }
    let m = a.m();
    let l = sched.period();
    let mut chain = Matrix::zeros(m * l);
    for phase in 0..l {
        let g = if sched.plays_a(phase) { a } else { b };
        let next = (phase + 1) % l;
        for i in 0..m {
            let row = phase * m + i;
            chain[(row, next * m + (i + 1) % m)] += g.p()[i];
            chain[(row, next * m + (i + m - 1) % m)] += g.q()[i];
            chain[(row, next * m + i)] += g.r(i);
        }
    }
    Ok(chain)
}

/// Exact long-run gain per play of the schedule, started at fortune 0 in
/// phase 0.
///
/// When the product chain splits into parity classes (even m with no
/// holds), the gain is that of the class containing the starting state.
pub fn pattern_gain(a: &WalkSpec, b: &WalkSpec, sched: &PatternSchedule) -> Result<f64> {
    let chain = pattern_chain(a, b, sched)?;
    let m = a.m();
    let n = chain.dim();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(s) = stack.pop() {
        for t in 0..n {
            if chain[(s, t)] > 0.0 && !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    let reach: Vec<usize> = (0..n).filter(|&s| seen[s]).collect();
    let pi = linalg::stationary_distribution(&chain.select(&reach))?;
    let (da, db) = (a.drift(), b.drift());
    Ok(reach
        .iter()
        .zip(&pi)
        .map(|(&s, w)| {
            let (phase, class) = (s / m, s % m);
            let drift = if sched.plays_a(phase) { da[class] } else { db[class] };
            w * drift
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartParity {
    Even,
    Odd,
}

/// Up/down product ratio of the two-step `[AB]` walk on states of the given
/// parity: `(a_0 b_1)(a_2 b_3)... / (1-a_0)(1-b_1)...` for even starts.
pub fn alternation_quotient(a: &WalkSpec, b: &WalkSpec, start: StartParity) -> Result<f64> {
    if a.m() != b.m() {
        return Err(Error::PeriodMismatch {
            left: a.m(),
            right: b.m(),
        });
    }
    let m = a.m();
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidSpec(format!(
            "alternation quotient needs even m, got {m}"
        )));
    }
    for w in [a, b] {
        if let Some((class, hold)) = w.first_hold(HOLD_TOL) {
            return Err(Error::NonzeroHold { class, hold });
        }
    }
    let offset = match start {
        StartParity::Even => 0,
        StartParity::Odd => 1,
    };
    let mut log_ratio = 0.0;
    for k in 0..m / 2 {
        let i = (2 * k + offset) % m;
        let j = (i + 1) % m;
        log_ratio += a.p()[i].ln() + b.p()[j].ln() - a.q()[i].ln() - b.q()[j].ln();
    }
    Ok(log_ratio.exp())
}
