//! How often random k-out subgraphs contain perfect matchings and Hamilton cycles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionParams;
use crate::error::{Error, Result};
use crate::graph::{adjacency, neighbors};
use crate::hamilton::{directed_cycle, undirected_cycle};
use crate::heuristic::DEFAULT_SEARCH_BUDGET;
use crate::instance::rng::{derive_seed, seeded_rng};
use crate::instance::{generate, k_out_subgraph, GenerateOptions, GraphKind, Orientation};
use crate::matching::{hopcroft_karp, matching_size, max_matching_general};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    /// perfect matching in the bipartite 2-out graph
    Matching2outBip,
    /// perfect matching in the 2-out graph on `K_n`
    Matching2out,
    /// Hamilton cycle in the 3-out graph on `K_n`
    Ham3out,
    /// directed Hamilton cycle in the 2-in-2-out digraph
    Ham2in2out,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Matching2outBip => "matching2out_bip",
            Structure::Matching2out => "matching2out",
            Structure::Ham3out => "ham3out",
            Structure::Ham2in2out => "ham2in2out",
        }
    }
}

/// Whether the k-out subgraph of one seeded instance contains the structure.
pub fn structure_present(structure: Structure, n: usize, seed: u64) -> Result<bool> {
    let params = DistributionParams::new(1.0, 1.0, 1)?;
    let (kind, k, orientation) = match structure {
        Structure::Matching2outBip => (GraphKind::Bipartite, 2, Orientation::Undirected),
        Structure::Matching2out => (GraphKind::Complete, 2, Orientation::Undirected),
        Structure::Ham3out => (GraphKind::Complete, 3, Orientation::Undirected),
        Structure::Ham2in2out => (GraphKind::Digraph, 2, Orientation::InAndOut),
    };
    if structure == Structure::Matching2out && n % 2 == 1 {
        return Err(Error::Argument(format!("a perfect matching needs even n, got {n}")));
    }
    let inst = generate(kind, n, params, seed, GenerateOptions::default())?;
    let k = k.min(kind.degree(n));
    let sub = k_out_subgraph(&inst, k, orientation)?;
    let adj = neighbors(&adjacency(&inst, &sub));
    let mut rng = seeded_rng(derive_seed(seed, &[0x5e]));
    Ok(match structure {
        Structure::Matching2outBip => hopcroft_karp(n, n, &adj).iter().all(Option::is_some),
        Structure::Matching2out => matching_size(&max_matching_general(&adj)) == n / 2,
        Structure::Ham3out => undirected_cycle(&adj, DEFAULT_SEARCH_BUDGET, &mut rng).cycle.is_some(),
        Structure::Ham2in2out => directed_cycle(&adj, DEFAULT_SEARCH_BUDGET, &mut rng).cycle.is_some(),
    })
}

/// Fraction of `trials` seeded instances whose k-out subgraph (ignoring
/// costs) contains the structure.
pub fn success_rate(structure: Structure, n: usize, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Parameter("success_rate needs at least one trial".into()));
    }
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| structure_present(structure, n, derive_seed(seed, &[t as u64])))
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_bipartite_is_always_matched() {
        assert_eq!(success_rate(Structure::Matching2outBip, 2, 10, 3).unwrap(), 1.0);
    }

    #[test]
    fn moderate_sizes_succeed() {
        for s in [Structure::Matching2outBip, Structure::Matching2out, Structure::Ham3out, Structure::Ham2in2out] {
            let rate = success_rate(s, 100, 10, 11).unwrap();
            assert!(rate >= 0.8, "{} {rate}", s.name());
            assert_eq!(rate, success_rate(s, 100, 10, 11).unwrap());
        }
    }

    #[test]
    fn odd_matching_is_rejected() {
        assert!(matches!(success_rate(Structure::Matching2out, 5, 1, 0), Err(Error::Argument(_))));
    }
}
