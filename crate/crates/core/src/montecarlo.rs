//! Monte Carlo estimates of gain, embedded success probability and mean
//! renewal gap.
//!
//! Replica `i` draws from ChaCha8 seeded with `seed` on stream `i`, so the
//! result does not depend on how replicas are scheduled across threads.
//! Per-replica statistics are merged in replica order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{self, WalkSpec};
use crate::hitting;
use crate::mixture::{self, PatternSchedule};
use crate::stationary;

pub const DEFAULT_BURN_IN: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub steps: u64,
    pub replicas: u64,
    pub seed: u64,
    pub burn_in: u64,
}

impl SimConfig {
    pub fn new(steps: u64, replicas: u64, seed: u64) -> SimConfig {
        SimConfig {
            steps,
            replicas,
            seed,
            burn_in: DEFAULT_BURN_IN.min(steps.saturating_sub(1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps <= self.burn_in {
            return Err(Error::InvalidSpec(format!(
                "steps ({}) must exceed burn-in ({})",
                self.steps, self.burn_in
            )));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidSpec("need at least one replica".into()));
        }
        Ok(())
    }
}

/// What to simulate.
#[derive(Debug, Clone, PartialEq)]
pub enum SimGame {
    Walk(WalkSpec),
    /// deterministic periodic schedule over two games
    Pattern {
        a: WalkSpec,
        b: WalkSpec,
        sched: PatternSchedule,
    },
    /// play `a` with probability `pi`, independently at each step
    RandomMix {
        a: WalkSpec,
        b: WalkSpec,
        pi: f64,
    },
}

impl SimGame {
    fn m(&self) -> usize {
        match self {
            SimGame::Walk(w) => w.m(),
            SimGame::Pattern { a, .. } | SimGame::RandomMix { a, .. } => a.m(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SimGame::Walk(_) => Ok(()),
            SimGame::Pattern { a, b, .. } | SimGame::RandomMix { a, b, .. } if a.m() != b.m() => {
                Err(Error::PeriodMismatch {
                    left: a.m(),
                    right: b.m(),
                })
            }
            SimGame::RandomMix { pi, .. } if !(0.0..=1.0).contains(pi) => {
                Err(Error::InvalidSpec(format!("mixing probability {pi} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Whether the renewal gaps are i.i.d., so that `p*` and `τ₀` apply.
    fn has_renewal_structure(&self) -> bool {
        !matches!(self, SimGame::Pattern { .. })
    }
}

const TWO_64: f64 = 18_446_744_073_709_551_616.0;

fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else {
        (p * TWO_64) as u64
    }
}

/// Integer thresholds per class: step up if `u < up`, down if `u < moves`.
#[derive(Debug, Clone)]
struct Thresholds {
    up: Vec<u64>,
    moves: Vec<u64>,
    always_moves: Vec<bool>,
}

impl Thresholds {
    fn of(w: &WalkSpec) -> Thresholds {
        let moves: Vec<f64> = (0..w.m()).map(|j| w.p()[j] + w.q()[j]).collect();
        Thresholds {
            up: w.p().iter().map(|&p| threshold(p)).collect(),
            moves: moves.iter().map(|&s| threshold(s)).collect(),
            always_moves: (0..w.m()).map(|j| w.r(j) <= 0.0).collect(),
        }
    }

    #[inline]
    fn step(&self, class: usize, u: u64) -> i64 {
        if u < self.up[class] {
            1
        } else if self.always_moves[class] || u < self.moves[class] {
            -1
        } else {
            0
        }
    }
}

enum Stepper {
    Single(Thresholds),
    Pattern(Thresholds, Thresholds, PatternSchedule),
    Random(Thresholds, Thresholds, u64),
}

impl Stepper {
    fn new(game: &SimGame) -> Stepper {
        match game {
            SimGame::Walk(w) => Stepper::Single(Thresholds::of(w)),
            SimGame::Pattern { a, b, sched } => Stepper::Pattern(Thresholds::of(a), Thresholds::of(b), sched.clone()),
            SimGame::RandomMix { a, b, pi } => Stepper::Random(Thresholds::of(a), Thresholds::of(b), threshold(*pi)),
        }
    }

    #[inline]
    fn step(&self, t: u64, class: usize, rng: &mut ChaCha8Rng) -> i64 {
        match self {
            Stepper::Single(th) => th.step(class, rng.next_u64()),
            Stepper::Pattern(a, b, sched) => {
                let th = if sched.plays_a(t as usize % sched.period()) {
                    a
                } else {
                    b
                };
                th.step(class, rng.next_u64())
            }
            Stepper::Random(a, b, pick) => {
                let th = if rng.next_u64() < *pick { a } else { b };
                th.step(class, rng.next_u64())
            }
        }
    }
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ReplicaStats {
    slope: f64,
    gaps: Moments,
    successes: u64,
}

fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_replica(stepper: &Stepper, m: usize, cfg: &SimConfig, index: u64) -> ReplicaStats {
    let mut rng = replica_rng(cfg.seed, index);
    let mut s: i64 = 0;
    let mut s_burn = 0;
    let mut anchor: i64 = 0;
    let mut anchor_time: u64 = 0;
    let mut stats = ReplicaStats::default();
    let mi = m as i64;
    let mut t = 0;
    loop {
        if t == cfg.burn_in {
            s_burn = s;
        }
        let class = s.rem_euclid(mi) as usize;
        let ds = stepper.step(t, class, &mut rng);
        t += 1;
        s += ds;
        if t == cfg.steps {
            stats.slope = (s - s_burn) as f64 / (cfg.steps - cfg.burn_in) as f64;
        }
        if ds == 0 {
            continue;
        }
        let off = s - anchor;
        if off == mi || off == -mi {
            stats.gaps.push((t - anchor_time) as f64);
            if off > 0 {
                stats.successes += 1;
            }
            // the gap open at the horizon is finished, so that the number of
            // gaps is a stopping time and the pooled ratio is unbiased
            if t >= cfg.steps {
                break;
            }
            anchor = s;
            anchor_time = t;
        }
    }
    stats
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub mean_slope: f64,
    pub stderr: f64,
    pub p_star_hat: f64,
    pub p_star_stderr: f64,
    pub tau0_hat: f64,
    pub tau0_stderr: f64,
    pub renewals: u64,
    pub replica_count: u64,
    pub total_steps: u64,
}

pub fn simulate(game: &SimGame, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    game.validate()?;
    let stepper = Stepper::new(game);
    let m = game.m();
    let per_replica: Vec<ReplicaStats> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| run_replica(&stepper, m, cfg, i))
        .collect();

    let mut slopes = Moments::default();
    let mut gaps = Moments::default();
    let mut successes = 0;
    for r in &per_replica {
        slopes.push(r.slope);
        gaps.merge(&r.gaps);
        successes += r.successes;
    }
    let n = gaps.count;
    let p_hat = if n > 0 { successes as f64 / n as f64 } else { f64::NAN };
    let p_se = if n > 0 {
        (p_hat * (1.0 - p_hat) / n as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(SimResult {
        mean_slope: slopes.mean,
        stderr: slopes.stderr(),
        p_star_hat: p_hat,
        p_star_stderr: p_se,
        tau0_hat: if n > 0 { gaps.mean } else { f64::NAN },
        tau0_stderr: if n > 0 { gaps.stderr() } else { f64::NAN },
        renewals: n,
        replica_count: cfg.replicas,
        total_steps: cfg.replicas * cfg.steps,
    })
}

/// Fortune after each step of one replica, starting with `S_0 = 0`.
pub fn trace(game: &SimGame, steps: u64, seed: u64, replica: u64) -> Result<Vec<i64>> {
    game.validate()?;
    let stepper = Stepper::new(game);
    let mi = game.m() as i64;
    let mut rng = replica_rng(seed, replica);
    let mut path = Vec::with_capacity(steps as usize + 1);
    let mut s = 0i64;
    path.push(s);
    for t in 0..steps {
        s += stepper.step(t, s.rem_euclid(mi) as usize, &mut rng);
        path.push(s);
    }
    Ok(path)
}

/// Simulation result alongside the exact values it estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub sim: SimResult,
    pub lambda: f64,
    pub lambda_renewal: Option<f64>,
    pub z_slope: f64,
    pub z_slope_renewal: Option<f64>,
    pub p_star: Option<f64>,
    pub z_p_star: Option<f64>,
    pub tau0: Option<f64>,
    pub z_tau0: Option<f64>,
}

fn z_score(est: f64, exact: f64, se: f64) -> f64 {
    let d = est - exact;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

pub fn estimate_vs_exact(game: &SimGame, cfg: &SimConfig) -> Result<Comparison> {
    let sim = simulate(game, cfg)?;
    let walk = match game {
        SimGame::Walk(w) => Some(w.clone()),
        SimGame::RandomMix { a, b, pi } => Some(game::mix_random(a, b, *pi)?),
        SimGame::Pattern { .. } => None,
    };
    let lambda = match (game, &walk) {
        (SimGame::Pattern { a, b, sched }, _) => mixture::pattern_gain(a, b, sched)?,
        (_, Some(w)) => stationary::asymptotic_gain_cofactor(w)?,
        _ => unreachable!(),
    };
    let mut cmp = Comparison {
        sim,
        lambda,
        lambda_renewal: None,
        z_slope: z_score(sim.mean_slope, lambda, sim.stderr),
        z_slope_renewal: None,
        p_star: None,
        z_p_star: None,
        tau0: None,
        z_tau0: None,
    };
    if let (Some(w), true) = (&walk, game.has_renewal_structure()) {
        let lr = hitting::gain_via_renewal(w)?;
        let ps = game::p_star(w);
        let t0 = hitting::expected_interoccurrence(w)?.tau0();
        cmp.lambda_renewal = Some(lr);
        cmp.z_slope_renewal = Some(z_score(sim.mean_slope, lr, sim.stderr));
        cmp.p_star = Some(ps);
        cmp.z_p_star = Some(z_score(sim.p_star_hat, ps, sim.p_star_stderr));
        cmp.tau0 = Some(t0);
        cmp.z_tau0 = Some(z_score(sim.tau0_hat, t0, sim.tau0_stderr));
    }
    Ok(cmp)
}
