//! Walk specifications and the fair/winning/losing trichotomy.
//!
//! A mod-m walk moves up from a state congruent to `j` with probability
//! `p[j]`, down with `q[j]` and holds with `r[j] = 1 - p[j] - q[j]`. Every
//! quantity in this module is a function of the two products `Πp` and `Πq`,
//! which are accumulated in log space so that long periods or extreme
//! probabilities do not underflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{hitting, stationary};

/// Default relative tolerance for the fairness test.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Slack allowed when checking `p + q <= 1`.
const SUM_SLACK: f64 = 1e-12;

/// Parse a probability written as a decimal (`"0.75"`) or a ratio of
/// integers (`"3/4"`).
///
/// Ratios are parsed as integers and divided once, so the result is the
/// correctly rounded `f64` whenever numerator and denominator fit in 53 bits.
pub fn parse_probability(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: i64 = num.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            let den: i64 = den.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            if den == 0 {
                return Err(Error::Parse(s.into()));
            }
            num as f64 / den as f64
        }
        None => s.parse::<f64>().map_err(|_| Error::Parse(s.into()))?,
    };
    if !value.is_finite() {
        return Err(Error::Parse(s.into()));
    }
    Ok(value)
}

/// A probability as it appears in JSON input: a number or a string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ProbValue {
    Num(f64),
    Text(String),
}

impl ProbValue {
    fn value(&self) -> Result<f64> {
        match self {
            ProbValue::Num(x) => Ok(*x),
            ProbValue::Text(s) => parse_probability(s),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawWalk {
    m: usize,
    p: Vec<ProbValue>,
    q: Vec<ProbValue>,
}

impl TryFrom<RawWalk> for WalkSpec {
    type Error = Error;

    fn try_from(raw: RawWalk) -> Result<Self> {
        let p = raw.p.iter().map(ProbValue::value).collect::<Result<Vec<_>>>()?;
        let q = raw.q.iter().map(ProbValue::value).collect::<Result<Vec<_>>>()?;
        WalkSpec::new(raw.m, p, q)
    }
}

/// A mod-m random walk `G(m, p, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWalk")]
pub struct WalkSpec {
    m: usize,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl WalkSpec {
    /// Build a walk, checking `0 < p_j`, `0 < q_j` and `p_j + q_j <= 1`.
    pub fn new(m: usize, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidSpec("period m must be at least 1".into()));
        }
        if p.len() != m || q.len() != m {
            return Err(Error::InvalidSpec(format!(
                "expected {m} probabilities per direction, got p: {}, q: {}",
                p.len(),
                q.len()
            )));
        }
        for (j, (&pj, &qj)) in p.iter().zip(&q).enumerate() {
            if !(pj.is_finite() && qj.is_finite()) || pj <= 0.0 || qj <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "class {j}: need p_j q_j != 0 with p_j, q_j > 0 (p = {pj}, q = {qj})"
                )));
            }
            if pj + qj > 1.0 + SUM_SLACK {
                return Err(Error::InvalidSpec(format!(
                    "class {j}: p_j + q_j = {} exceeds 1",
                    pj + qj
                )));
            }
        }
        Ok(WalkSpec { m, p, q })
    }

    /// A walk that never holds, `q_j = 1 - p_j`.
    pub fn from_up_probs(p: Vec<f64>) -> Result<Self> {
        let q = p.iter().map(|x| 1.0 - x).collect();
        WalkSpec::new(p.len(), p, q)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Hold probability of class `j`, clamped at zero.
    pub fn r(&self, j: usize) -> f64 {
        (1.0 - self.p[j] - self.q[j]).max(0.0)
    }

    pub fn holds(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.r(j)).collect()
    }

    /// True when no class has a hold probability above `tol`.
    pub fn has_no_holds(&self, tol: f64) -> bool {
        (0..self.m).all(|j| self.r(j) <= tol)
    }

    /// Index of a class whose hold exceeds `tol`, if any.
    pub(crate) fn first_hold(&self, tol: f64) -> Option<(usize, f64)> {
        (0..self.m).map(|j| (j, self.r(j))).find(|&(_, r)| r > tol)
    }

    /// Per-class drift `p_j - q_j`.
    pub fn drift(&self) -> Vec<f64> {
        self.p.iter().zip(&self.q).map(|(p, q)| p - q).collect()
    }

    /// `(ln Πp, ln Πq)`.
    pub fn log_products(&self) -> (f64, f64) {
        let lp = self.p.iter().map(|x| x.ln()).sum();
        let lq = self.q.iter().map(|x| x.ln()).sum();
        (lp, lq)
    }

    /// Exchange the up and down probabilities (reflect the walk).
    pub fn swap(&self) -> WalkSpec {
        WalkSpec {
            m: self.m,
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }

    /// Parameters cyclically shifted so that class `k` becomes class 0.
    pub fn rotate(&self, k: usize) -> WalkSpec {
        let m = self.m;
        WalkSpec {
            m,
            p: (0..m).map(|j| self.p[(j + k) % m]).collect(),
            q: (0..m).map(|j| self.q[(j + k) % m]).collect(),
        }
    }
}

/// A Parrondo game `G(m, p, p')`: `p_on` is used on the lattice `mZ`,
/// `p_off` everywhere else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParrondo")]
pub struct ParrondoSpec {
    pub m: usize,
    #[serde(rename = "p")]
    pub p_off: f64,
    #[serde(rename = "pp")]
    pub p_on: f64,
}

#[derive(Debug, Deserialize)]
struct RawParrondo {
    m: usize,
    p: ProbValue,
    pp: ProbValue,
}

impl TryFrom<RawParrondo> for ParrondoSpec {
    type Error = Error;

    fn try_from(raw: RawParrondo) -> Result<Self> {
        ParrondoSpec::new(raw.m, raw.p.value()?, raw.pp.value()?)
    }
}

impl ParrondoSpec {
    pub fn new(m: usize, p_off: f64, p_on: f64) -> Result<Self> {
        let spec = ParrondoSpec { m, p_off, p_on };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidSpec("period m must be at least 1".into()));
        }
        for (name, x) in [("p", self.p_off), ("p'", self.p_on)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "{name} = {x} must lie strictly between 0 and 1"
                )));
            }
        }
        if (self.p_off - self.p_on).abs() >= 1.0 {
            return Err(Error::InvalidSpec("|p - p'| must be below 1".into()));
        }
        Ok(())
    }

    /// Odds `x = p/q` off the lattice.
    pub fn x(&self) -> f64 {
        self.p_off / (1.0 - self.p_off)
    }

    /// Odds `y = p'/q'` on the lattice.
    pub fn y(&self) -> f64 {
        self.p_on / (1.0 - self.p_on)
    }
}

/// Expand a Parrondo game into its per-class walk. Class 0 carries `p_on`.
pub fn make_parrondo(spec: &ParrondoSpec) -> Result<WalkSpec> {
    spec.validate()?;
    let p = (0..spec.m)
        .map(|j| if j == 0 { spec.p_on } else { spec.p_off })
        .collect();
    WalkSpec::from_up_probs(p)
}

/// The fair Parrondo game with off-lattice odds `x`:
/// `q = 1/(1+x)` and `p' = 1/(1+x^(m-1))`.
pub fn fair_family(m: usize, x: f64) -> Result<ParrondoSpec> {
    if m == 0 || !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "fair family needs m >= 1 and x > 0 (m = {m}, x = {x})"
        )));
    }
    let p_off = x / (1.0 + x);
    let p_on = 1.0 / (1.0 + x.powi(m as i32 - 1));
    ParrondoSpec::new(m, p_off, p_on)
}

/// Recurrent / transient-up / transient-down verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameClass {
    Fair,
    Winning,
    Losing,
}

impl GameClass {
    /// Winning and losing exchanged, fair fixed.
    pub fn flip(self) -> GameClass {
        match self {
            GameClass::Fair => GameClass::Fair,
            GameClass::Winning => GameClass::Losing,
            GameClass::Losing => GameClass::Winning,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GameClass::Fair => "fair",
            GameClass::Winning => "winning",
            GameClass::Losing => "losing",
        }
    }
}

impl std::fmt::Display for GameClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `Πp / Πq`.
pub fn rho(w: &WalkSpec) -> f64 {
    let (lp, lq) = w.log_products();
    (lp - lq).exp()
}

/// `(Πp - Πq) / (Πp + Πq)`, computed without forming either product.
pub fn relative_excess(w: &WalkSpec) -> f64 {
    let (lp, lq) = w.log_products();
    (0.5 * (lp - lq)).tanh()
}

/// Classify the walk. `tol` is relative to `Πp + Πq`.
pub fn classify(w: &WalkSpec, tol: f64) -> GameClass {
    classify_excess(relative_excess(w), tol)
}

pub(crate) fn classify_excess(excess: f64, tol: f64) -> GameClass {
    if excess.abs() <= tol {
        GameClass::Fair
    } else if excess > 0.0 {
        GameClass::Winning
    } else {
        GameClass::Losing
    }
}

/// Success probability of the walk embedded on `mZ`: `ρ / (1 + ρ)`.
pub fn p_star(w: &WalkSpec) -> f64 {
    let (lp, lq) = w.log_products();
    1.0 / (1.0 + (lq - lp).exp())
}

/// The random mixture that plays `a` with probability `pi` and `b` otherwise.
pub fn mix_random(a: &WalkSpec, b: &WalkSpec, pi: f64) -> Result<WalkSpec> {
    if a.m != b.m {
        return Err(Error::PeriodMismatch { left: a.m, right: b.m });
    }
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::InvalidSpec(format!("mixing probability {pi} outside [0, 1]")));
    }
    let comb = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(u, v)| pi * u + (1.0 - pi) * v).collect() };
    WalkSpec::new(a.m, comb(&a.p, &b.p), comb(&a.q, &b.q))
}

/// Everything the `analyze` command reports for one walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub game: WalkSpec,
    pub rho: f64,
    pub p_star: f64,
    pub tau0: f64,
    /// Asymptotic gain from the cofactor-weighted drift.
    pub lambda: f64,
    /// Asymptotic gain from the renewal identity `m(2p* - 1)/τ₀`.
    pub lambda_renewal: f64,
    pub lambda_difference: f64,
    pub class: GameClass,
}

impl GainReport {
    pub fn compute(w: &WalkSpec, tol: f64) -> Result<GainReport> {
        let tau = hitting::expected_interoccurrence(w)?;
        let lambda = stationary::asymptotic_gain_cofactor(w)?;
        let lambda_renewal = hitting::gain_via_renewal(w)?;
        Ok(GainReport {
            game: w.clone(),
            rho: rho(w),
            p_star: p_star(w),
            tau0: tau.tau0(),
            lambda,
            lambda_renewal,
            lambda_difference: lambda - lambda_renewal,
            class: classify(w, tol),
        })
    }
}

/// The three ε-perturbed game families of the Harmer–Abbott simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonFamily {
    /// `G(3, 1/2 - ε, 1/2 - ε)`
    GameA,
    /// `G(3, 3/4 - ε, 1/10 - ε)`
    GameB,
    /// Even random mixture of the two, `G(3, 5/8 - ε, 3/10 - ε)`
    Mixed,
}

impl EpsilonFamily {
    pub fn spec(self, eps: f64) -> Result<ParrondoSpec> {
        let (p, pp) = match self {
            EpsilonFamily::GameA => (0.5, 0.5),
            EpsilonFamily::GameB => (0.75, 0.1),
            EpsilonFamily::Mixed => (0.625, 0.3),
        };
        ParrondoSpec::new(3, p - eps, pp - eps)
    }

    pub fn walk(self, eps: f64) -> Result<WalkSpec> {
        make_parrondo(&self.spec(eps)?)
    }

    pub fn name(self) -> &'static str {
        match self {
            EpsilonFamily::GameA => "game-a",
            EpsilonFamily::GameB => "game-b",
            EpsilonFamily::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for EpsilonFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "game-a" | "a" => Ok(EpsilonFamily::GameA),
            "game-b" | "b" => Ok(EpsilonFamily::GameB),
            "mixed" | "mix" => Ok(EpsilonFamily::Mixed),
            _ => Err(Error::InvalidSpec(format!("unknown family {s:?}"))),
        }
    }
}
