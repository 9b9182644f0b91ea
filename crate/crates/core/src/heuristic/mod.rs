//! Constructive feasible-solution heuristics.

mod cmwp;
mod kout;

pub use cmwp::{cmwp_solve, grow, select_regime, CmwpConfig, DijkstraFrontier, Regime};
pub use kout::{cap_solve, catsp_solve, cmp_solve, cstsp_solve, DEFAULT_SEARCH_BUDGET};
