//! Exact oracles for small instances: Pareto label setting for the
//! budget-constrained shortest path and branch-and-bound enumeration for
//! constrained perfect matchings and Hamilton cycles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BudgetVector, EdgeId, GraphKind, Instance, Vertex};
use crate::solution::{canonical_totals, Solution, SolutionKind};

/// Method tag carried by every oracle solution.
pub const METHOD: &str = "exact";

/// Relative slack for partial-sum pruning. Leaves are always re-checked with
/// canonical sums, so the slack only widens the search.
const PRUNE_SLACK: f64 = 1e-12;

/// Optimal objective value, or the fact that no structure meets the budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimum {
    Value(f64),
    Infeasible,
}

impl Optimum {
    pub fn value(self) -> Option<f64> {
        match self {
            Optimum::Value(v) => Some(v),
            Optimum::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, Optimum::Value(_))
    }
}

/// Size caps for the oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactLimits {
    pub label_cap: usize,
    pub bipartite_max_n: usize,
    pub complete_matching_max_n: usize,
    pub tsp_max_n: usize,
    /// Disabling dominance keeps every budget-feasible simple-path label;
    /// only useful for cross-checking the dominance rule on tiny graphs.
    pub dominance: bool,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self { label_cap: 10_000_000, bipartite_max_n: 12, complete_matching_max_n: 16, tsp_max_n: 12, dominance: true }
    }
}

fn check_budgets(inst: &Instance, budgets: &BudgetVector) -> Result<()> {
    if budgets.len() != inst.r() {
        return Err(Error::Dimension { expected: inst.r(), got: budgets.len() });
    }
    Ok(())
}

fn within(partial: f64, cap: f64) -> bool {
    partial <= cap + PRUNE_SLACK * cap.abs()
}

/// A label of the multi-criteria search.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoLabel {
    pub vertex: Vertex,
    pub weight: f64,
    pub costs: Vec<f64>,
    pub parent_label: Option<usize>,
}

impl ParetoLabel {
    /// Weak dominance: no worse in weight and in every cost.
    fn covers(&self, other: &ParetoLabel) -> bool {
        self.weight <= other.weight && self.costs.iter().zip(&other.costs).all(|(a, b)| a <= b)
    }
}

struct HeapKey {
    weight: f64,
    costs: Vec<f64>,
    vertex: Vertex,
    label: usize,
}

impl HeapKey {
    fn lex(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then_with(|| {
                self.costs
                    .iter()
                    .zip(&other.costs)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .then(self.vertex.cmp(&other.vertex))
            .then(self.label.cmp(&other.label))
    }
}

impl PartialEq for HeapKey {
    fn eq(&self, other: &Self) -> bool {
        self.lex(other).is_eq()
    }
}
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    // Reversed so that BinaryHeap pops the lexicographically smallest label.
    fn cmp(&self, other: &Self) -> Ordering {
        other.lex(self)
    }
}

/// Minimum-weight `source`–`target` path of a complete graph subject to the
/// budgets, by label setting over Pareto-optimal (weight, costs) labels.
pub fn pareto_shortest_path(
    inst: &Instance,
    budgets: &BudgetVector,
    source: Vertex,
    target: Vertex,
    limits: &ExactLimits,
) -> Result<(Optimum, Solution)> {
    if inst.kind() != GraphKind::Complete {
        return Err(Error::KindMismatch(format!("path oracle needs a complete instance, got {}", inst.kind().name())));
    }
    check_budgets(inst, budgets)?;
    let n = inst.n();
    if source >= n || target >= n || source == target {
        return Err(Error::Argument(format!("terminals ({source}, {target}) must be distinct vertices below {n}")));
    }
    let caps = budgets.components();
    let r = inst.r();

    let mut labels: Vec<ParetoLabel> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut heap = BinaryHeap::new();
    let mut on_path = vec![false; n];

    labels.push(ParetoLabel { vertex: source, weight: 0.0, costs: vec![0.0; r], parent_label: None });
    alive.push(true);
    at_vertex[source].push(0);
    heap.push(HeapKey { weight: 0.0, costs: vec![0.0; r], vertex: source, label: 0 });

    let mut processed = 0u64;
    while let Some(key) = heap.pop() {
        let id = key.label;
        if !alive[id] {
            continue;
        }
        processed += 1;
        let u = labels[id].vertex;
        if u == target {
            let mut vertices = Vec::new();
            let mut cursor = Some(id);
            while let Some(l) = cursor {
                vertices.push(labels[l].vertex);
                cursor = labels[l].parent_label;
            }
            vertices.reverse();
            let edges: Vec<EdgeId> =
                vertices.windows(2).map(|p| inst.edge_index(p[0], p[1]).expect("complete graph")).collect();
            let sol = Solution::from_structure(inst, budgets, SolutionKind::Path, edges, vertices, METHOD)
                .with_stat("labels_created", labels.len())
                .with_stat("labels_processed", processed);
            debug_assert!(sol.feasible);
            return Ok((Optimum::Value(sol.total_weight), sol));
        }

        on_path.iter_mut().for_each(|b| *b = false);
        let mut cursor = Some(id);
        while let Some(l) = cursor {
            on_path[labels[l].vertex] = true;
            cursor = labels[l].parent_label;
        }

        for v in 0..n {
            if on_path[v] {
                continue;
            }
            let e = inst.edge_index(u, v).expect("complete graph");
            let costs: Vec<f64> = labels[id].costs.iter().zip(inst.costs(e)).map(|(a, b)| a + b).collect();
            if costs.iter().zip(caps).any(|(c, cap)| c > cap) {
                continue;
            }
            let cand = ParetoLabel { vertex: v, weight: labels[id].weight + inst.weight(e), costs, parent_label: Some(id) };
            if limits.dominance {
                if at_vertex[v].iter().any(|&l| labels[l].covers(&cand)) {
                    continue;
                }
                at_vertex[v].retain(|&l| {
                    let keep = !cand.covers(&labels[l]);
                    if !keep {
                        alive[l] = false;
                    }
                    keep
                });
            }
            if labels.len() >= limits.label_cap {
                return Err(Error::Resource(format!(
                    "label cap {} exceeded at n = {n}; use a smaller instance",
                    limits.label_cap
                )));
            }
            let new_id = labels.len();
            heap.push(HeapKey { weight: cand.weight, costs: cand.costs.clone(), vertex: v, label: new_id });
            labels.push(cand);
            alive.push(true);
            at_vertex[v].push(new_id);
        }
    }
    let sol = Solution::infeasible(SolutionKind::Path, r, METHOD, "no_feasible_path")
        .with_stat("labels_created", labels.len())
        .with_stat("labels_processed", processed);
    Ok((Optimum::Infeasible, sol))
}

/// Shared incumbent-tracking state for the enumeration oracles.
struct Search<'a> {
    inst: &'a Instance,
    caps: &'a [f64],
    best: f64,
    best_edges: Option<Vec<EdgeId>>,
    kind: SolutionKind,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, budgets: &'a BudgetVector, kind: SolutionKind) -> Self {
        Self { inst, caps: budgets.components(), best: f64::INFINITY, best_edges: None, kind, nodes: 0 }
    }

    fn bound_ok(&self, lower: f64) -> bool {
        lower < self.best + PRUNE_SLACK * self.best.abs()
    }

    fn costs_ok(&self, partial: &[f64]) -> bool {
        partial.iter().zip(self.caps).all(|(c, cap)| within(*c, *cap))
    }

    fn offer(&mut self, edges: &[EdgeId]) {
        let (w, c) = canonical_totals(self.inst, self.kind, edges);
        if c.iter().zip(self.caps).all(|(a, b)| a <= b) && w < self.best {
            self.best = w;
            self.best_edges = Some(edges.to_vec());
        }
    }

    fn finish(self, budgets: &BudgetVector, vertices: impl FnOnce(&[EdgeId]) -> Vec<Vertex>) -> (Optimum, Solution) {
        let nodes = self.nodes;
        match self.best_edges {
            Some(mut edges) => {
                let verts = vertices(&edges);
                if self.kind != SolutionKind::Tour && self.kind != SolutionKind::DirectedTour {
                    edges.sort_unstable();
                }
                let sol = Solution::from_structure(self.inst, budgets, self.kind, edges, verts, METHOD)
                    .with_stat("search_nodes", nodes);
                (Optimum::Value(sol.total_weight), sol)
            }
            None => (
                Optimum::Infeasible,
                Solution::infeasible(self.kind, self.inst.r(), METHOD, "no_feasible_structure")
                    .with_stat("search_nodes", nodes),
            ),
        }
    }
}

fn add_costs(acc: &mut [f64], costs: &[f64]) {
    acc.iter_mut().zip(costs).for_each(|(a, c)| *a += c);
}

fn sub_costs(acc: &mut [f64], costs: &[f64]) {
    acc.iter_mut().zip(costs).for_each(|(a, c)| *a -= c);
}

/// Minimum-weight perfect matching subject to the budgets, for bipartite
/// instances (assignment) or complete instances with an even vertex count.
pub fn exact_matching(inst: &Instance, budgets: &BudgetVector, limits: &ExactLimits) -> Result<(Optimum, Solution)> {
    check_budgets(inst, budgets)?;
    let n = inst.n();
    match inst.kind() {
        GraphKind::Bipartite => {
            if n > limits.bipartite_max_n {
                return Err(Error::Resource(format!(
                    "assignment oracle is capped at n = {}, got {n}",
                    limits.bipartite_max_n
                )));
            }
            let mut s = Search::new(inst, budgets, SolutionKind::BipartiteMatching);
            // Row minima give an admissible completion bound.
            let row_min: Vec<f64> = (0..n)
                .map(|x| (0..n).map(|y| inst.weight(x * n + y)).fold(f64::INFINITY, f64::min))
                .collect();
            let mut suffix = vec![0.0; n + 1];
            for x in (0..n).rev() {
                suffix[x] = suffix[x + 1] + row_min[x];
            }
            let mut used = vec![false; n];
            let mut edges = Vec::with_capacity(n);
            let mut costs = vec![0.0; inst.r()];
            assign(&mut s, 0, 0.0, &suffix, &mut used, &mut edges, &mut costs);
            Ok(s.finish(budgets, |_| Vec::new()))
        }
        GraphKind::Complete => {
            if n % 2 == 1 {
                return Err(Error::Argument(format!("perfect matching needs an even vertex count, got {n}")));
            }
            if n > limits.complete_matching_max_n {
                return Err(Error::Resource(format!(
                    "matching oracle is capped at n = {}, got {n}",
                    limits.complete_matching_max_n
                )));
            }
            let mut s = Search::new(inst, budgets, SolutionKind::Matching);
            let min_inc: Vec<f64> = (0..n)
                .map(|u| (0..n).filter(|&v| v != u).map(|v| inst.weight(inst.edge_index(u, v).unwrap())).fold(f64::INFINITY, f64::min))
                .collect();
            let mut matched = vec![false; n];
            let mut edges = Vec::with_capacity(n / 2);
            let mut costs = vec![0.0; inst.r()];
            pair_up(&mut s, 0.0, &min_inc, &mut matched, &mut edges, &mut costs);
            Ok(s.finish(budgets, |_| Vec::new()))
        }
        GraphKind::Digraph => Err(Error::KindMismatch("matching oracle needs a bipartite or complete instance".into())),
    }
}

fn assign(
    s: &mut Search,
    x: usize,
    weight: f64,
    suffix: &[f64],
    used: &mut [bool],
    edges: &mut Vec<EdgeId>,
    costs: &mut [f64],
) {
    s.nodes += 1;
    let n = used.len();
    if x == n {
        s.offer(edges);
        return;
    }
    let mut order: Vec<usize> = (0..n).filter(|&y| !used[y]).collect();
    order.sort_by(|&a, &b| s.inst.weight(x * n + a).total_cmp(&s.inst.weight(x * n + b)));
    for y in order {
        let e = x * n + y;
        let w = weight + s.inst.weight(e);
        if !s.bound_ok(w + suffix[x + 1]) {
            break;
        }
        add_costs(costs, s.inst.costs(e));
        if s.costs_ok(costs) {
            used[y] = true;
            edges.push(e);
            assign(s, x + 1, w, suffix, used, edges, costs);
            edges.pop();
            used[y] = false;
        }
        sub_costs(costs, s.inst.costs(e));
    }
}

fn pair_up(s: &mut Search, weight: f64, min_inc: &[f64], matched: &mut [bool], edges: &mut Vec<EdgeId>, costs: &mut [f64]) {
    s.nodes += 1;
    let Some(u) = matched.iter().position(|m| !m) else {
        s.offer(edges);
        return;
    };
    // Each remaining pair contributes at least half of both endpoints' minima.
    let rest: f64 = (u + 1..matched.len()).filter(|&v| !matched[v]).map(|v| min_inc[v]).sum::<f64>();
    let mut order: Vec<(Vertex, EdgeId)> = (u + 1..matched.len())
        .filter(|&v| !matched[v])
        .map(|v| (v, s.inst.edge_index(u, v).unwrap()))
        .collect();
    order.sort_by(|a, b| s.inst.weight(a.1).total_cmp(&s.inst.weight(b.1)));
    matched[u] = true;
    for (v, e) in order {
        let w = weight + s.inst.weight(e);
        // the bound depends on v, so it is not monotone along `order`
        if !s.bound_ok(w + 0.5 * (rest - min_inc[v])) {
            continue;
        }
        add_costs(costs, s.inst.costs(e));
        if s.costs_ok(costs) {
            matched[v] = true;
            edges.push(e);
            pair_up(s, w, min_inc, matched, edges, costs);
            edges.pop();
            matched[v] = false;
        }
        sub_costs(costs, s.inst.costs(e));
    }
    matched[u] = false;
}

/// Minimum-weight Hamilton cycle subject to the budgets, on complete graphs
/// (undirected tours) or digraphs (directed tours).
pub fn exact_tsp(inst: &Instance, budgets: &BudgetVector, limits: &ExactLimits) -> Result<(Optimum, Solution)> {
    check_budgets(inst, budgets)?;
    let n = inst.n();
    let kind = match inst.kind() {
        GraphKind::Complete => SolutionKind::Tour,
        GraphKind::Digraph => SolutionKind::DirectedTour,
        GraphKind::Bipartite => return Err(Error::KindMismatch("tour oracle needs a complete or digraph instance".into())),
    };
    if kind == SolutionKind::Tour && n < 3 {
        return Err(Error::Argument(format!("an undirected tour needs at least 3 vertices, got {n}")));
    }
    if n > limits.tsp_max_n {
        return Err(Error::Resource(format!("tour oracle is capped at n = {}, got {n}", limits.tsp_max_n)));
    }
    let r = inst.r();
    let arc = |u: Vertex, v: Vertex| inst.edge_index(u, v).expect("distinct vertices");
    let mut min_w = vec![f64::INFINITY; n];
    let mut min_c = vec![vec![f64::INFINITY; r]; n];
    for u in 0..n {
        for v in (0..n).filter(|&v| v != u) {
            let e = arc(u, v);
            min_w[u] = min_w[u].min(inst.weight(e));
            for (m, c) in min_c[u].iter_mut().zip(inst.costs(e)) {
                *m = m.min(*c);
            }
        }
    }
    let mut s = Search::new(inst, budgets, kind);
    let mut tour = vec![0usize];
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut edges = Vec::with_capacity(n);
    let mut costs = vec![0.0; r];
    let ctx = TourCtx { n, min_w: &min_w, min_c: &min_c, undirected: kind == SolutionKind::Tour };
    extend_tour(&mut s, &ctx, 0.0, &mut tour, &mut visited, &mut edges, &mut costs);
    Ok(s.finish(budgets, |edges| {
        let mut verts = vec![0];
        for &e in &edges[..edges.len() - 1] {
            let (a, b) = inst.endpoints(e);
            let last = *verts.last().unwrap();
            verts.push(if a == last { b } else { a });
        }
        verts
    }))
}

struct TourCtx<'a> {
    n: usize,
    min_w: &'a [f64],
    min_c: &'a [Vec<f64>],
    undirected: bool,
}

fn extend_tour(
    s: &mut Search,
    ctx: &TourCtx,
    weight: f64,
    tour: &mut Vec<Vertex>,
    visited: &mut [bool],
    edges: &mut Vec<EdgeId>,
    costs: &mut [f64],
) {
    s.nodes += 1;
    let n = ctx.n;
    let last = *tour.last().unwrap();
    if tour.len() == n {
        // Each undirected tour is met in both directions; keep one.
        if ctx.undirected && tour[1] > tour[n - 1] {
            return;
        }
        let e = s.inst.edge_index(last, 0).unwrap();
        edges.push(e);
        s.offer(edges);
        edges.pop();
        return;
    }
    let mut rest_w = 0.0;
    let mut rest_c = vec![0.0; costs.len()];
    for v in (0..n).filter(|&v| !visited[v]) {
        rest_w += ctx.min_w[v];
        add_costs(&mut rest_c, &ctx.min_c[v]);
    }
    let mut order: Vec<(Vertex, EdgeId)> =
        (0..n).filter(|&v| !visited[v]).map(|v| (v, s.inst.edge_index(last, v).unwrap())).collect();
    order.sort_by(|a, b| s.inst.weight(a.1).total_cmp(&s.inst.weight(b.1)));
    for (v, e) in order {
        let w = weight + s.inst.weight(e);
        if !s.bound_ok(w + rest_w) {
            break;
        }
        add_costs(costs, s.inst.costs(e));
        let feasible = costs
            .iter()
            .zip(&rest_c)
            .zip(s.caps)
            .all(|((c, rc), cap)| within(c + rc, *cap));
        if feasible {
            visited[v] = true;
            tour.push(v);
            edges.push(e);
            extend_tour(s, ctx, w, tour, visited, edges, costs);
            edges.pop();
            tour.pop();
            visited[v] = false;
        }
        sub_costs(costs, s.inst.costs(e));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionParams;
    use crate::instance::{generate, EdgeRecord, GenerateOptions};
    use crate::solution::verify;
    use proptest::prelude::*;

    fn p1() -> DistributionParams {
        DistributionParams::new(1.0, 1.0, 1).unwrap()
    }

    fn triangle() -> Instance {
        let rec = |u, v, w: f64, c: f64| EdgeRecord { u, v, weight: w, costs: vec![c] };
        Instance::from_edges(GraphKind::Complete, 3, p1(), 0, vec![rec(0, 1, 1.0, 5.0), rec(1, 2, 1.0, 5.0), rec(0, 2, 5.0, 1.0)], None)
            .unwrap()
    }

    fn b(c: &[f64]) -> BudgetVector {
        BudgetVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn triangle_paths() {
        let lim = ExactLimits::default();
        let t = triangle();
        let (o, sol) = pareto_shortest_path(&t, &b(&[6.0]), 0, 2, &lim).unwrap();
        assert_eq!(o, Optimum::Value(5.0));
        assert_eq!(sol.vertices, vec![0, 2]);
        let (o, sol) = pareto_shortest_path(&t, &b(&[10.0]), 0, 2, &lim).unwrap();
        assert_eq!(o, Optimum::Value(2.0));
        assert_eq!(sol.vertices, vec![0, 1, 2]);
        assert_eq!(sol.method, "exact");
        let (o, sol) = pareto_shortest_path(&t, &b(&[0.5]), 0, 2, &lim).unwrap();
        assert_eq!(o, Optimum::Infeasible);
        assert!(!sol.feasible);
    }

    #[test]
    fn label_cap_is_a_resource_error() {
        let inst = generate(GraphKind::Complete, 9, p1(), 3, GenerateOptions::without_splits()).unwrap();
        let lim = ExactLimits { label_cap: 5, ..ExactLimits::default() };
        assert!(matches!(pareto_shortest_path(&inst, &b(&[1e9]), 0, 8, &lim), Err(Error::Resource(_))));
    }

    #[test]
    fn assignment_examples() {
        let lim = ExactLimits::default();
        let one = Instance::from_edges(
            GraphKind::Bipartite,
            1,
            p1(),
            0,
            vec![EdgeRecord { u: 0, v: 0, weight: 3.0, costs: vec![1.0] }],
            None,
        )
        .unwrap();
        assert_eq!(exact_matching(&one, &b(&[2.0]), &lim).unwrap().0, Optimum::Value(3.0));

        let rec = |u, v, w: f64, c: f64| EdgeRecord { u, v, weight: w, costs: vec![c] };
        let two = Instance::from_edges(
            GraphKind::Bipartite,
            2,
            p1(),
            0,
            vec![rec(0, 0, 1.0, 9.0), rec(0, 1, 2.0, 1.0), rec(1, 0, 2.0, 1.0), rec(1, 1, 1.0, 9.0)],
            None,
        )
        .unwrap();
        let (o, sol) = exact_matching(&two, &b(&[3.0]), &lim).unwrap();
        assert_eq!(o, Optimum::Value(4.0));
        assert_eq!(sol.total_costs, vec![2.0]);
        assert_eq!(exact_matching(&two, &b(&[1.0]), &lim).unwrap().0, Optimum::Infeasible);
    }

    #[test]
    fn caps_are_resource_errors() {
        let lim = ExactLimits::default();
        let big = generate(GraphKind::Bipartite, 13, p1(), 0, GenerateOptions::without_splits()).unwrap();
        assert!(matches!(exact_matching(&big, &b(&[1.0]), &lim), Err(Error::Resource(_))));
        let big = generate(GraphKind::Digraph, 13, p1(), 0, GenerateOptions::without_splits()).unwrap();
        assert!(matches!(exact_tsp(&big, &b(&[1.0]), &lim), Err(Error::Resource(_))));
        let odd = generate(GraphKind::Complete, 5, p1(), 0, GenerateOptions::without_splits()).unwrap();
        assert!(matches!(exact_matching(&odd, &b(&[1.0]), &lim), Err(Error::Argument(_))));
    }

    /// O(n^3) Hungarian algorithm with potentials, as an unconstrained oracle.
    fn hungarian(cost: &[Vec<f64>]) -> f64 {
        let n = cost.len();
        let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
        let (mut p, mut way) = (vec![0usize; n + 1], vec![0usize; n + 1]);
        for i in 1..=n {
            p[0] = i;
            let mut j0 = 0;
            let mut minv = vec![f64::INFINITY; n + 1];
            let mut used = vec![false; n + 1];
            loop {
                used[j0] = true;
                let i0 = p[j0];
                let mut delta = f64::INFINITY;
                let mut j1 = 0;
                for j in 1..=n {
                    if !used[j] {
                        let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                        if cur < minv[j] {
                            minv[j] = cur;
                            way[j] = j0;
                        }
                        if minv[j] < delta {
                            delta = minv[j];
                            j1 = j;
                        }
                    }
                }
                for j in 0..=n {
                    if used[j] {
                        u[p[j]] += delta;
                        v[j] -= delta;
                    } else {
                        minv[j] -= delta;
                    }
                }
                j0 = j1;
                if p[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                p[j0] = p[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
    }

    #[test]
    fn unbounded_budgets_match_hungarian() {
        let lim = ExactLimits::default();
        for seed in 0..20 {
            let n = 3 + (seed as usize % 6);
            let inst = generate(GraphKind::Bipartite, n, p1(), seed, GenerateOptions::without_splits()).unwrap();
            let cost: Vec<Vec<f64>> = (0..n).map(|x| (0..n).map(|y| inst.weight(x * n + y)).collect()).collect();
            let (o, _) = exact_matching(&inst, &b(&[1e300]), &lim).unwrap();
            let h = hungarian(&cost);
            assert!((o.value().unwrap() - h).abs() <= 1e-12 * h, "seed {seed}");
        }
    }

    fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }

    fn brute_tsp(inst: &Instance, budgets: &BudgetVector) -> Option<f64> {
        let n = inst.n();
        let mut perms = Vec::new();
        permutations(&mut (1..n).collect(), 0, &mut perms);
        let kind = if inst.kind() == GraphKind::Complete { SolutionKind::Tour } else { SolutionKind::DirectedTour };
        perms
            .into_iter()
            .filter_map(|p| {
                let mut cyc = vec![0];
                cyc.extend(p);
                let ids: Vec<_> = (0..n).map(|i| inst.edge_index(cyc[i], cyc[(i + 1) % n]).unwrap()).collect();
                let (w, c) = canonical_totals(inst, kind, &ids);
                budgets.admits(&c).then_some(w)
            })
            .min_by(f64::total_cmp)
    }

    #[test]
    fn tsp_matches_enumeration() {
        let lim = ExactLimits::default();
        for seed in 0..12 {
            let kind = if seed % 2 == 0 { GraphKind::Complete } else { GraphKind::Digraph };
            let n = 3 + seed as usize % 5;
            let params = DistributionParams::new(1.0, 1.0, 2).unwrap();
            let inst = generate(kind, n, params, seed, GenerateOptions::without_splits()).unwrap();
            for budget in [0.5, 1.0, 2.0, 1e9] {
                let bv = b(&[budget, budget]);
                let (o, sol) = exact_tsp(&inst, &bv, &lim).unwrap();
                assert_eq!(o.value(), brute_tsp(&inst, &bv), "seed {seed} budget {budget}");
                if o.is_feasible() {
                    assert_eq!(verify(&inst, &bv, &sol, (0, 0)), Ok(()));
                }
            }
        }
    }

    fn brute_matching(inst: &Instance, budgets: &BudgetVector) -> Option<f64> {
        fn rec(inst: &Instance, budgets: &BudgetVector, used: &mut [bool], ids: &mut Vec<EdgeId>, best: &mut Option<f64>) {
            let Some(u) = used.iter().position(|m| !m) else {
                let (w, c) = canonical_totals(inst, SolutionKind::Matching, ids);
                if budgets.admits(&c) && best.is_none_or(|b| w < b) {
                    *best = Some(w);
                }
                return;
            };
            used[u] = true;
            for v in u + 1..used.len() {
                if !used[v] {
                    used[v] = true;
                    ids.push(inst.edge_index(u, v).unwrap());
                    rec(inst, budgets, used, ids, best);
                    ids.pop();
                    used[v] = false;
                }
            }
            used[u] = false;
        }
        let mut best = None;
        rec(inst, budgets, &mut vec![false; inst.n()], &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn complete_matching_matches_enumeration() {
        let lim = ExactLimits::default();
        for seed in 0..300 {
            let n = 2 + 2 * (seed as usize % 4);
            let params = DistributionParams::new(0.5, 1.0, 2).unwrap();
            let inst = generate(GraphKind::Complete, n, params, seed, GenerateOptions::without_splits()).unwrap();
            for budget in [0.3, 1.0, 3.0, 1e9] {
                let bv = b(&[budget, budget]);
                assert_eq!(exact_matching(&inst, &bv, &lim).unwrap().0.value(), brute_matching(&inst, &bv), "seed {seed} budget {budget}");
            }
        }
    }

    #[test]
    fn unbounded_tsp_n9_matches_enumeration() {
        let inst = generate(GraphKind::Complete, 9, p1(), 77, GenerateOptions::without_splits()).unwrap();
        let bv = b(&[1e300]);
        assert_eq!(exact_tsp(&inst, &bv, &ExactLimits::default()).unwrap().0.value(), brute_tsp(&inst, &bv));
    }

    #[test]
    fn three_vertex_tour() {
        let t = triangle();
        let (o, _) = exact_tsp(&t, &b(&[11.0]), &ExactLimits::default()).unwrap();
        assert_eq!(o, Optimum::Value(7.0));
        let (o, _) = exact_tsp(&t, &b(&[10.0]), &ExactLimits::default()).unwrap();
        assert_eq!(o, Optimum::Infeasible);
    }

    /// Cheapest walk by budget-indexed dynamic programming over integer costs.
    fn budget_dp(inst: &Instance, budget: usize, s: Vertex, t: Vertex) -> Option<f64> {
        let n = inst.n();
        let mut f = vec![vec![f64::INFINITY; n]; budget + 1];
        for c in 0..=budget {
            if c > 0 {
                f[c] = f[c - 1].clone();
            }
            f[c][s] = 0.0;
            for _ in 0..n {
                for u in 0..n {
                    for v in (0..n).filter(|&v| v != u) {
                        let e = inst.edge_index(u, v).unwrap();
                        let k = inst.costs(e)[0] as usize;
                        if k <= c && f[c - k][u] + inst.weight(e) < f[c][v] {
                            f[c][v] = f[c - k][u] + inst.weight(e);
                        }
                    }
                }
            }
        }
        f[budget][t].is_finite().then_some(f[budget][t])
    }

    fn integer_cost_copy(inst: &Instance) -> Instance {
        let edges = inst
            .edges()
            .map(|e| EdgeRecord { u: e.u, v: e.v, weight: e.weight, costs: vec![(e.costs[0] * 3.0).round()] })
            .collect();
        Instance::from_edges(inst.kind(), inst.n(), *inst.params(), inst.seed(), edges, None).unwrap()
    }

    #[test]
    fn pareto_matches_budget_dp() {
        let lim = ExactLimits::default();
        for seed in 0..60 {
            let n = 3 + seed as usize % 8;
            let raw = generate(GraphKind::Complete, n, p1(), seed, GenerateOptions::without_splits()).unwrap();
            let inst = integer_cost_copy(&raw);
            for budget in [1usize, 2, 3, 5, 8] {
                let (o, _) = pareto_shortest_path(&inst, &b(&[budget as f64]), 0, n - 1, &lim).unwrap();
                let dp = budget_dp(&inst, budget, 0, n - 1);
                match (o.value(), dp) {
                    (Some(a), Some(d)) => assert!((a - d).abs() <= 1e-12 * d.max(1.0), "seed {seed}"),
                    (a, d) => assert_eq!(a, d, "seed {seed} budget {budget}"),
                }
            }
        }
    }

    #[test]
    fn dominance_does_not_change_the_optimum() {
        let plain = ExactLimits::default();
        let all = ExactLimits { dominance: false, ..plain };
        for seed in 0..30 {
            let n = 3 + seed as usize % 6;
            let params = DistributionParams::new(1.0, 1.0, 2).unwrap();
            let inst = generate(GraphKind::Complete, n, params, seed, GenerateOptions::without_splits()).unwrap();
            let bv = b(&[1.0, 1.5]);
            let a = pareto_shortest_path(&inst, &bv, 0, n - 1, &plain).unwrap().0;
            let c = pareto_shortest_path(&inst, &bv, 0, n - 1, &all).unwrap().0;
            assert_eq!(a, c, "seed {seed}");
        }
    }

    fn monotone(a: Optimum, b: Optimum) -> bool {
        match (a, b) {
            (Optimum::Value(x), Optimum::Value(y)) => y <= x,
            (Optimum::Infeasible, _) => true,
            (Optimum::Value(_), Optimum::Infeasible) => false,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn enlarging_a_budget_never_hurts(seed in 0u64..1_000_000, n in 3usize..8, c0 in 0.05f64..3.0, c1 in 0.05f64..3.0, grow in 1.0f64..4.0, which in 0usize..2) {
            let lim = ExactLimits::default();
            let params = DistributionParams::new(1.0, 1.0, 2).unwrap();
            let small = b(&[c0, c1]);
            let mut bigger = vec![c0, c1];
            bigger[which] *= grow;
            let big = b(&bigger);
            let inst = generate(GraphKind::Complete, n, params, seed, GenerateOptions::without_splits()).unwrap();
            let f = |bv: &BudgetVector| pareto_shortest_path(&inst, bv, 0, n - 1, &lim).unwrap().0;
            prop_assert!(monotone(f(&small), f(&big)));
            let g = |bv: &BudgetVector| exact_tsp(&inst, bv, &lim).unwrap().0;
            prop_assert!(monotone(g(&small), g(&big)));
            let bip = generate(GraphKind::Bipartite, n, params, seed, GenerateOptions::without_splits()).unwrap();
            let h = |bv: &BudgetVector| exact_matching(&bip, bv, &lim).unwrap().0;
            prop_assert!(monotone(h(&small), h(&big)));
        }
    }
}
