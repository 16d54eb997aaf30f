//! Expected first-passage times to the lattice `mZ`.
//!
//! `τ_j` is the expected time for a walk started at `j` to reach `±m`. The
//! first-step equations over `j = m-1, ..., -(m-1)` form a Jacobi
//! (tridiagonal) system; `τ₀` is the mean gap between successive renewals
//! of the embedded walk on `mZ` and gives the gain `m(2p* - 1)/τ₀`.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{self, WalkSpec};
use crate::linalg::{self, Matrix};

/// The system `Hτ = rhs` with `H` stored by diagonals.
///
/// Rows run over the states `m-1, ..., 1, 0, -1, ..., -(m-1)`. Holding
/// classes are handled by normalising `p_j, q_j` by `p_j + q_j` and putting
/// `1/(p_j + q_j)` on the right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingSystem {
    m: usize,
    /// `lower[k]` sits in row `k+1`, column `k` (the `-p` entries)
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// `upper[k]` sits in row `k`, column `k+1` (the `-q` entries)
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl HittingSystem {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// State represented by row `k`.
    pub fn state(&self, k: usize) -> i64 {
        self.m as i64 - 1 - k as i64
    }

    pub fn dense(&self) -> Matrix {
        let n = self.dim();
        let mut h = Matrix::identity(n);
        for k in 0..n {
            h[(k, k)] = self.diag[k];
        }
        for k in 0..n.saturating_sub(1) {
            h[(k + 1, k)] = self.lower[k];
            h[(k, k + 1)] = self.upper[k];
        }
        h
    }
}

/// Expected hitting times, ordered from state `m-1` down to `-(m-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauVector {
    pub tau: Vec<f64>,
}

impl TauVector {
    pub fn tau0(&self) -> f64 {
        self.tau[self.tau.len() / 2]
    }
}

impl Serialize for TauVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.tau.serialize(s)
    }
}

pub fn hitting_system(w: &WalkSpec) -> HittingSystem {
    let m = w.m();
    let n = 2 * m - 1;
    let class = |s: i64| s.rem_euclid(m as i64) as usize;
    let mut lower = Vec::with_capacity(n - 1);
    let mut upper = Vec::with_capacity(n - 1);
    let mut rhs = Vec::with_capacity(n);
    for k in 0..n {
        let s = m as i64 - 1 - k as i64;
        let j = class(s);
        let move_prob = w.p()[j] + w.q()[j];
        if k > 0 {
            lower.push(-w.p()[j] / move_prob);
        }
        if k + 1 < n {
            upper.push(-w.q()[j] / move_prob);
        }
        rhs.push(1.0 / move_prob);
    }
    HittingSystem {
        m,
        lower,
        diag: vec![1.0; n],
        upper,
        rhs,
    }
}

pub fn solve_hitting(h: &HittingSystem) -> Result<TauVector> {
    let tau = linalg::solve_tridiagonal(&h.lower, &h.diag, &h.upper, &h.rhs)
        .map_err(|_| Error::Singular("hitting-time system"))?;
    Ok(TauVector { tau })
}

pub fn expected_interoccurrence(w: &WalkSpec) -> Result<TauVector> {
    solve_hitting(&hitting_system(w))
}

/// `λ = m (2p* - 1) / τ₀`.
pub fn gain_via_renewal(w: &WalkSpec) -> Result<f64> {
    let tau0 = expected_interoccurrence(w)?.tau0();
    Ok(w.m() as f64 * (2.0 * game::p_star(w) - 1.0) / tau0)
}
