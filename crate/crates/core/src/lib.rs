//! Exact and simulated analysis of mod-m random walks and Parrondo games.
//!
//! A mod-m walk moves up with probability `p_j`, down with `q_j` and holds
//! with `r_j = 1 - p_j - q_j` when its fortune is congruent to `j`. The
//! modules compute its classification, stationary class distribution,
//! asymptotic gain by two independent routes, random and periodic mixtures,
//! the diffusion analogue, and Monte Carlo estimates of all of these.

pub mod diffusion;
pub mod error;
pub mod game;
pub mod hitting;
pub mod linalg;
pub mod mixture;
pub mod montecarlo;
pub mod roots;
pub mod stationary;

pub use error::{Error, Result};
pub use game::{classify, make_parrondo, p_star, rho, GainReport, GameClass, ParrondoSpec, WalkSpec};
