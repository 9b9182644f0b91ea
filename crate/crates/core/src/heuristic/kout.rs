//! Assignment, matching and tour heuristics on k-out subgraphs of the
//! cheap-edge graph `{e : c_i(e) <= C_i / n}`.
//!
//! Every vertex keeps its k incident cheap edges that are smallest by its
//! own split value; perfect matchings and Hamilton cycles of that sparse
//! subgraph automatically meet the budgets, since each of their n (or n/2)
//! edges costs at most `C_i / n`.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{adjacency, neighbors};
use crate::hamilton::{directed_cycle, undirected_cycle, HamiltonSearch};
use crate::instance::rng::{derive_seed, seeded_rng};
use crate::instance::{filter_edges, k_out_select, BudgetVector, EdgeSet, FilterMode, FilterSpec, GraphKind, Instance, Orientation};
use crate::matching::{hopcroft_karp, max_matching_general};
use crate::solution::{Solution, SolutionKind};

/// Node-expansion budget for Hamilton searches when none is given.
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

fn require(inst: &Instance, kind: GraphKind, problem: &str, budgets: &BudgetVector) -> Result<()> {
    if inst.kind() != kind {
        return Err(Error::KindMismatch(format!("{problem} needs a {} instance, got {}", kind.name(), inst.kind().name())));
    }
    if budgets.len() != inst.r() {
        return Err(Error::Dimension { expected: inst.r(), got: budgets.len() });
    }
    if !inst.has_splits() {
        return Err(Error::State(format!("{problem} needs split values; generate the instance with splits")));
    }
    Ok(())
}

fn cheap_edges(inst: &Instance, budgets: &BudgetVector) -> Result<(EdgeSet, Vec<bool>)> {
    let spec = FilterSpec::new(FilterMode::E0, inst.n() as f64)?;
    let set = filter_edges(inst, budgets, &spec)?;
    let mask = set.mask(inst.edge_count());
    Ok((set, mask))
}

fn search_rng(inst: &Instance, tag: u64) -> ChaCha8Rng {
    seeded_rng(derive_seed(inst.seed(), &[tag]))
}

/// Perfect matching of `K_{n,n}` from the 2-out subgraph of the cheap edges.
pub fn cap_solve(inst: &Instance, budgets: &BudgetVector) -> Result<Solution> {
    require(inst, GraphKind::Bipartite, "cap", budgets)?;
    let n = inst.n();
    let (cheap, mask) = cheap_edges(inst, budgets)?;
    if cheap.is_empty() {
        return Ok(Solution::infeasible(SolutionKind::BipartiteMatching, inst.r(), "cap_2out", "empty_filter"));
    }
    let bipartite_perfect = |set: &EdgeSet| -> Option<Vec<usize>> {
        let adj = neighbors(&adjacency(inst, set));
        let mate = hopcroft_karp(n, n, &adj);
        mate.iter()
            .enumerate()
            .map(|(x, y)| y.map(|y| x * n + y))
            .collect::<Option<Vec<_>>>()
    };
    let sub = k_out_select(inst, 2, Orientation::Undirected, Some(&mask))?;
    let (edges, method, fallback) = match bipartite_perfect(&sub) {
        Some(e) => (e, "cap_2out", false),
        None => match bipartite_perfect(&cheap) {
            Some(e) => (e, "cap_filtered", true),
            None => {
                return Ok(Solution::infeasible(SolutionKind::BipartiteMatching, inst.r(), "cap_2out", "no_perfect_matching")
                    .with_stat("filtered_edges", cheap.len())
                    .with_stat("subgraph_edges", sub.len()))
            }
        },
    };
    let mut edges = edges;
    edges.sort_unstable();
    Ok(Solution::from_structure(inst, budgets, SolutionKind::BipartiteMatching, edges, Vec::new(), method)
        .with_stat("fallback", fallback)
        .with_stat("filtered_edges", cheap.len())
        .with_stat("subgraph_edges", sub.len()))
}

/// Perfect matching of `K_n` from the 2-out subgraph of the cheap edges.
pub fn cmp_solve(inst: &Instance, budgets: &BudgetVector) -> Result<Solution> {
    require(inst, GraphKind::Complete, "cmp", budgets)?;
    let n = inst.n();
    if n % 2 == 1 {
        return Err(Error::Argument(format!("cmp needs an even number of vertices, got {n}")));
    }
    let (cheap, mask) = cheap_edges(inst, budgets)?;
    if cheap.is_empty() {
        return Ok(Solution::infeasible(SolutionKind::Matching, inst.r(), "cmp_2out", "empty_filter"));
    }
    let perfect = |set: &EdgeSet| -> Option<Vec<usize>> {
        let mate = max_matching_general(&neighbors(&adjacency(inst, set)));
        let mut edges = Vec::with_capacity(n / 2);
        for (v, w) in mate.iter().enumerate() {
            let w = (*w)?;
            if v < w {
                edges.push(inst.edge_index(v, w).expect("distinct vertices"));
            }
        }
        Some(edges)
    };
    let sub = k_out_select(inst, 2, Orientation::Undirected, Some(&mask))?;
    let (mut edges, method, fallback) = match perfect(&sub) {
        Some(e) => (e, "cmp_2out", false),
        None => match perfect(&cheap) {
            Some(e) => (e, "cmp_filtered", true),
            None => {
                return Ok(Solution::infeasible(SolutionKind::Matching, inst.r(), "cmp_2out", "no_perfect_matching")
                    .with_stat("filtered_edges", cheap.len())
                    .with_stat("subgraph_edges", sub.len()))
            }
        },
    };
    edges.sort_unstable();
    Ok(Solution::from_structure(inst, budgets, SolutionKind::Matching, edges, Vec::new(), method)
        .with_stat("fallback", fallback)
        .with_stat("filtered_edges", cheap.len())
        .with_stat("subgraph_edges", sub.len()))
}

fn tour_solution(
    inst: &Instance,
    budgets: &BudgetVector,
    kind: SolutionKind,
    cycle: Vec<usize>,
    method: &str,
) -> Solution {
    let n = cycle.len();
    let edges = (0..n)
        .map(|i| inst.edge_index(cycle[i], cycle[(i + 1) % n]).expect("cycle uses graph edges"))
        .collect();
    Solution::from_structure(inst, budgets, kind, edges, cycle, method)
}

/// Hamilton cycle of `K_n` from the 3-out subgraph of the cheap edges,
/// retried on the 4-out subgraph when the search budget runs out.
pub fn cstsp_solve(inst: &Instance, budgets: &BudgetVector, search_budget: u64) -> Result<Solution> {
    require(inst, GraphKind::Complete, "cstsp", budgets)?;
    if inst.n() < 3 {
        return Err(Error::Argument("cstsp needs at least 3 vertices".into()));
    }
    let (cheap, mask) = cheap_edges(inst, budgets)?;
    let mut rng = search_rng(inst, 3);
    let mut spent = 0;
    for k in [3, 4] {
        let sub = k_out_select(inst, k, Orientation::Undirected, Some(&mask))?;
        let search: HamiltonSearch = undirected_cycle(&neighbors(&adjacency(inst, &sub)), search_budget, &mut rng);
        spent += search.expansions;
        if let Some(cycle) = search.cycle {
            return Ok(tour_solution(inst, budgets, SolutionKind::Tour, cycle, &format!("cstsp_{k}out"))
                .with_stat("k", k)
                .with_stat("expansions", spent)
                .with_stat("restarts", search.restarts)
                .with_stat("filtered_edges", cheap.len())
                .with_stat("subgraph_edges", sub.len()));
        }
    }
    Ok(Solution::infeasible(SolutionKind::Tour, inst.r(), "cstsp_3out", "search_exhausted")
        .with_stat("expansions", spent)
        .with_stat("filtered_edges", cheap.len()))
}

/// Directed Hamilton cycle from the 2-in-2-out sub-digraph of the cheap arcs,
/// retried on 3-in-3-out when the search budget runs out.
pub fn catsp_solve(inst: &Instance, budgets: &BudgetVector, search_budget: u64) -> Result<Solution> {
    require(inst, GraphKind::Digraph, "catsp", budgets)?;
    let (cheap, mask) = cheap_edges(inst, budgets)?;
    let mut rng = search_rng(inst, 4);
    let mut spent = 0;
    let n = inst.n();
    for k in [2, 3] {
        let k = k.min(n - 1);
        let sub = k_out_select(inst, k, Orientation::InAndOut, Some(&mask))?;
        let search = directed_cycle(&neighbors(&adjacency(inst, &sub)), search_budget, &mut rng);
        spent += search.expansions;
        if let Some(cycle) = search.cycle {
            return Ok(tour_solution(inst, budgets, SolutionKind::DirectedTour, cycle, &format!("catsp_{k}in{k}out"))
                .with_stat("k", k)
                .with_stat("expansions", spent)
                .with_stat("filtered_edges", cheap.len())
                .with_stat("subgraph_edges", sub.len()));
        }
    }
    Ok(Solution::infeasible(SolutionKind::DirectedTour, inst.r(), "catsp_2in2out", "search_exhausted")
        .with_stat("expansions", spent)
        .with_stat("filtered_edges", cheap.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionParams;
    use crate::instance::{generate, EdgeRecord, GenerateOptions};
    use crate::solution::verify;

    fn params() -> DistributionParams {
        DistributionParams::new(1.0, 1.0, 1).unwrap()
    }

    #[test]
    fn single_edge_assignment() {
        let inst = Instance::from_edges(
            GraphKind::Bipartite,
            1,
            params(),
            0,
            vec![EdgeRecord { u: 0, v: 0, weight: 3.0, costs: vec![1.0] }],
            Some(vec![[3.0, 4.0]]),
        )
        .unwrap();
        let sol = cap_solve(&inst, &BudgetVector::new(vec![2.0]).unwrap()).unwrap();
        assert!(sol.feasible);
        assert_eq!(sol.edge_ids, vec![0]);
        let none = cap_solve(&inst, &BudgetVector::new(vec![0.5]).unwrap()).unwrap();
        assert_eq!(none.reason.as_deref(), Some("empty_filter"));
    }

    #[test]
    fn two_vertex_matching_and_digon() {
        let inst = generate(GraphKind::Complete, 2, params(), 1, GenerateOptions::default()).unwrap();
        let big = BudgetVector::new(vec![1e9]).unwrap();
        let sol = cmp_solve(&inst, &big).unwrap();
        assert!(sol.feasible && sol.edge_ids == vec![0]);
        let odd = generate(GraphKind::Complete, 3, params(), 1, GenerateOptions::default()).unwrap();
        assert!(matches!(cmp_solve(&odd, &big), Err(Error::Argument(_))));
        let tri = cstsp_solve(&odd, &big, 1000).unwrap();
        assert!(tri.feasible);
        assert_eq!(verify(&odd, &big, &tri, (0, 0)), Ok(()));
        let di = generate(GraphKind::Digraph, 2, params(), 1, GenerateOptions::default()).unwrap();
        let cyc = catsp_solve(&di, &big, 1000).unwrap();
        assert!(cyc.feasible);
        assert_eq!(verify(&di, &big, &cyc, (0, 0)), Ok(()));
    }

    #[test]
    fn kind_and_split_errors() {
        let inst = generate(GraphKind::Complete, 4, params(), 1, GenerateOptions::default()).unwrap();
        let b = BudgetVector::new(vec![4.0]).unwrap();
        assert!(matches!(cap_solve(&inst, &b), Err(Error::KindMismatch(_))));
        let bare = inst.without_splits();
        assert!(matches!(cmp_solve(&bare, &b), Err(Error::State(_))));
    }

    #[test]
    fn moderate_instances_verify() {
        let n = 120;
        for seed in 0..5 {
            let b = BudgetVector::new(vec![n as f64]).unwrap();
            for kind in [GraphKind::Bipartite, GraphKind::Complete, GraphKind::Digraph] {
                let inst = generate(kind, n, params(), seed, GenerateOptions::default()).unwrap();
                let sols = match kind {
                    GraphKind::Bipartite => vec![cap_solve(&inst, &b).unwrap()],
                    GraphKind::Complete => vec![cmp_solve(&inst, &b).unwrap(), cstsp_solve(&inst, &b, DEFAULT_SEARCH_BUDGET).unwrap()],
                    GraphKind::Digraph => vec![catsp_solve(&inst, &b, DEFAULT_SEARCH_BUDGET).unwrap()],
                };
                for sol in sols {
                    assert!(sol.feasible, "{kind:?} seed {seed}: {:?}", sol.reason);
                    assert_eq!(verify(&inst, &b, &sol, (0, n - 1)), Ok(()));
                }
            }
        }
    }
}
