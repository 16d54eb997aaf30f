//! Congruence-class chain of a mod-m walk and its stationary law.
//!
//! The class process `S_n mod m` is a cyclic Markov chain with matrix `C`.
//! Its stationary probabilities are proportional to the diagonal cofactors
//! of `I - C` (Mihoc), and the asymptotic gain is the stationary average of
//! the per-class drift. Cofactors are available two ways: determinants of
//! minors, and the alternating sum over non-adjacent `p_i q_{i+1}` pairs.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::WalkSpec;
use crate::linalg::{self, Matrix};

/// Largest period accepted by the determinant route.
pub const MAX_DET_PERIOD: usize = 64;

const HOLD_TOL: f64 = 1e-12;

/// Transition matrix of the congruence classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruenceMatrix {
    m: usize,
    entries: Matrix,
}

impl CongruenceMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// Diagonal cofactors `γ_1m .. γ_mm` of `I - C`; `gammas[i]` belongs to class `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CofactorSet {
    pub gammas: Vec<f64>,
    pub total: f64,
}

impl CofactorSet {
    fn from_gammas(gammas: Vec<f64>) -> CofactorSet {
        let total = gammas.iter().sum();
        CofactorSet { gammas, total }
    }
}

impl Serialize for CofactorSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.gammas.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryVector {
    pub pi: Vec<f64>,
}

impl Serialize for StationaryVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pi.serialize(s)
    }
}

/// Per-class drift `b_j = p_j - q_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftVector {
    pub b: Vec<f64>,
}

impl DriftVector {
    pub fn of(w: &WalkSpec) -> DriftVector {
        DriftVector { b: w.drift() }
    }
}

/// Row `i` has `p_i` at column `i+1`, `q_i` at `i-1` and `r_i` on the
/// diagonal, indices mod m. For `m <= 2` coinciding targets add up.
pub fn congruence_matrix(w: &WalkSpec) -> CongruenceMatrix {
    let m = w.m();
    let mut c = Matrix::zeros(m);
    for i in 0..m {
        c[(i, (i + 1) % m)] += w.p()[i];
        c[(i, (i + m - 1) % m)] += w.q()[i];
        c[(i, i)] += w.r(i);
    }
    CongruenceMatrix { m, entries: c }
}

/// Diagonal cofactors of `I - C` as determinants of principal minors.
pub fn diag_cofactors_det(c: &CongruenceMatrix) -> Result<CofactorSet> {
    if c.m > MAX_DET_PERIOD {
        return Err(Error::InvalidSpec(format!(
            "determinant route is capped at m = {MAX_DET_PERIOD}, got {}",
            c.m
        )));
    }
    let a = c.entries.identity_minus();
    let gammas = (0..c.m).map(|i| a.minor(i, i).det()).collect();
    Ok(CofactorSet::from_gammas(gammas))
}

/// The first diagonal cofactor `γ_1m` from the inclusion–exclusion series
///
/// `1 - Σ p_i q_{i+1} + Σ p_i q_{i+1} p_j q_{j+1} - ...`
///
/// over sets of pairwise non-adjacent `i` in `1..=m-2`.
fn first_cofactor_series(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len();
    // prev2 / prev1 hold the series truncated to pairs below i-1 / i
    let (mut prev2, mut prev1) = (1.0, 1.0);
    for i in 1..m.saturating_sub(1) {
        let next = prev1 - p[i] * q[i + 1] * prev2;
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}

/// Diagonal cofactors from the closed-form series; the `k`-th cofactor is
/// the first one of the walk rotated by `k` classes.
pub fn diag_cofactors_closed(w: &WalkSpec) -> Result<CofactorSet> {
    if let Some((class, hold)) = w.first_hold(HOLD_TOL) {
        return Err(Error::NonzeroHold { class, hold });
    }
    let gammas = (0..w.m())
        .map(|k| {
            let r = w.rotate(k);
            first_cofactor_series(r.p(), r.q())
        })
        .collect();
    Ok(CofactorSet::from_gammas(gammas))
}

/// Normalise cofactors into stationary probabilities.
pub fn stationary(cs: &CofactorSet) -> Result<StationaryVector> {
    if cs.total.is_nan() || cs.total <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "cofactor sum {} is not positive; chain is reducible or invalid",
            cs.total
        )));
    }
    Ok(StationaryVector {
        pi: cs.gammas.iter().map(|g| g / cs.total).collect(),
    })
}

pub fn stationary_of(w: &WalkSpec) -> Result<StationaryVector> {
    stationary(&diag_cofactors_det(&congruence_matrix(w))?)
}

/// `λ_m = Σ γ_im (p_{i-1} - q_{i-1}) / γ_·m`.
pub fn asymptotic_gain_cofactor(w: &WalkSpec) -> Result<f64> {
    let cs = diag_cofactors_det(&congruence_matrix(w))?;
    if cs.total.is_nan() || cs.total <= 0.0 {
        return Err(Error::Singular("cofactor sum vanished"));
    }
    let weighted: f64 = cs.gammas.iter().zip(w.drift()).map(|(g, b)| g * b).sum();
    Ok(weighted / cs.total)
}

/// Every cofactor `Δ_ij` of `I - C`.
pub fn cofactor_matrix(c: &CongruenceMatrix) -> Matrix {
    let a = c.entries.identity_minus();
    let m = c.m;
    let mut out = Matrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] = if m == 1 { 1.0 } else { a.cofactor(i, j) };
        }
    }
    out
}

/// Column sums `Δ_·j` of the cofactor matrix.
pub fn cofactor_column_sums(c: &CongruenceMatrix) -> Vec<f64> {
    let d = cofactor_matrix(c);
    (0..c.m).map(|j| (0..c.m).map(|i| d[(i, j)]).sum()).collect()
}

/// Blocks of the period-2 chain for even m, with even classes listed first.
#[derive(Debug, Clone, Serialize)]
pub struct Period2 {
    /// even classes to odd classes
    pub a: Matrix,
    /// odd classes to even classes
    pub b: Matrix,
    pub ab: Matrix,
    pub ba: Matrix,
    /// stationary vector of `AB` (even classes 0, 2, ...)
    pub delta: Vec<f64>,
    /// stationary vector of `BA` (odd classes 1, 3, ...)
    pub rho: Vec<f64>,
}

pub fn period2_decompose(c: &CongruenceMatrix) -> Result<Period2> {
    let m = c.m;
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidSpec(format!(
            "period-2 decomposition needs even m, got {m}"
        )));
    }
    for i in 0..m {
        let hold = c.entries[(i, i)];
        if m > 2 && hold > HOLD_TOL {
            return Err(Error::NonzeroHold { class: i, hold });
        }
    }
    if m == 2 {
        // each class only reaches the other one; holds would sit on the diagonal
        for i in 0..2 {
            let off = c.entries[(i, 1 - i)];
            if (1.0 - off) > HOLD_TOL {
                return Err(Error::NonzeroHold {
                    class: i,
                    hold: 1.0 - off,
                });
            }
        }
    }
    let k = m / 2;
    let mut a = Matrix::zeros(k);
    let mut b = Matrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = c.entries[(2 * i, 2 * j + 1)];
            b[(i, j)] = c.entries[(2 * i + 1, 2 * j)];
        }
    }
    let ab = a.mul(&b);
    let ba = b.mul(&a);
    let delta = linalg::stationary_distribution(&ab)?;
    let rho = linalg::stationary_distribution(&ba)?;
    Ok(Period2 {
        a,
        b,
        ab,
        ba,
        delta,
        rho,
    })
}

/// The slices `2γ/γ_·m` of the even and odd classes, which the period-2
/// stationary vectors must equal.
pub fn period2_cofactor_slices(cs: &CofactorSet) -> (Vec<f64>, Vec<f64>) {
    let scale = 2.0 / cs.total;
    let even = cs.gammas.iter().step_by(2).map(|g| g * scale).collect();
    let odd = cs.gammas.iter().skip(1).step_by(2).map(|g| g * scale).collect();
    (even, odd)
}
