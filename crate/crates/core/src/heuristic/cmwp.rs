//! Constrained minimum-weight path by two depth-capped Dijkstra growths on
//! the cheap-edge subgraph, joined through a shared vertex or a bridging edge.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionParams;
use crate::error::{Error, Result};
use crate::instance::{filter_probability, BudgetVector, EdgeId, FilterMode, FilterSpec, GraphKind, Instance, Vertex};
use crate::solution::{Solution, SolutionKind};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// Knobs for [`cmwp_solve`]. Unset fields take the regime defaults:
/// `L = 10 ln n` (dense) or `20 ln n` (sparse), `m = floor(n/3)`,
/// `depth_cap = max(1, floor(L))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmwpConfig {
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub m: Option<usize>,
    pub depth_cap: Option<usize>,
    /// E0 keeps costs up to `C_i / (divisor_factor * L)`
    pub divisor_factor: f64,
    pub regime: Regime,
    /// on failure, double L and retry up to three times
    pub relax: bool,
    pub source: Option<Vertex>,
    pub target: Option<Vertex>,
}

impl Default for CmwpConfig {
    fn default() -> Self {
        Self {
            l: None,
            m: None,
            depth_cap: None,
            divisor_factor: 3.0,
            regime: Regime::Auto,
            relax: false,
            source: None,
            target: None,
        }
    }
}

/// Regime decision for a given instance size and budget: sparse when
/// `n p < ln^2 n` with `p` the E0 probability at `L = 10 ln n`.
pub fn select_regime(n: usize, budgets: &BudgetVector, params: &DistributionParams, divisor_factor: f64) -> Result<Regime> {
    let ln_n = (n as f64).ln();
    let p = filter_probability(budgets, params, divisor_factor * 10.0 * ln_n)?;
    Ok(if n as f64 * p < ln_n * ln_n { Regime::Sparse } else { Regime::Dense })
}

/// State of one Dijkstra growth.
#[derive(Debug, Clone)]
pub struct DijkstraFrontier {
    pub root: Vertex,
    /// settlement order, root first
    pub settled: Vec<Vertex>,
    pub dist: Vec<f64>,
    pub tree_parent: Vec<usize>,
    pub parent_edge: Vec<EdgeId>,
    pub depth: Vec<usize>,
    /// cut size between settled and unsettled vertices after each settlement
    pub frontier_edge_count: Vec<usize>,
    pub rejected: Vec<Vertex>,
    is_settled: Vec<bool>,
}

impl DijkstraFrontier {
    pub fn is_settled(&self, v: Vertex) -> bool {
        self.is_settled[v]
    }

    pub fn height(&self) -> usize {
        self.settled.iter().map(|&v| self.depth[v]).max().unwrap_or(0)
    }

    /// Tree path root..v as vertices and edges.
    pub fn path_to(&self, v: Vertex) -> (Vec<Vertex>, Vec<EdgeId>) {
        let mut verts = vec![v];
        let mut edges = Vec::new();
        let mut cur = v;
        while self.tree_parent[cur] != NONE {
            edges.push(self.parent_edge[cur]);
            cur = self.tree_parent[cur];
            verts.push(cur);
        }
        verts.reverse();
        edges.reverse();
        (verts, edges)
    }
}

/// Dense Dijkstra from `root` over edges with `allowed[e]`, settling the root
/// and up to `m` further vertices. Vertices at depth `depth_cap` are settled
/// but never become parents. With `degree_cap`, a vertex whose allowed edges
/// to unsettled vertices number at least the cap is rejected for good.
pub fn grow(
    inst: &Instance,
    allowed: &[bool],
    root: Vertex,
    m: usize,
    depth_cap: usize,
    degree_cap: Option<f64>,
) -> DijkstraFrontier {
    let n = inst.n();
    let mut f = DijkstraFrontier {
        root,
        settled: Vec::with_capacity(m + 1),
        dist: vec![f64::INFINITY; n],
        tree_parent: vec![NONE; n],
        parent_edge: vec![NONE; n],
        depth: vec![0; n],
        frontier_edge_count: Vec::with_capacity(m + 1),
        rejected: Vec::new(),
        is_settled: vec![false; n],
    };
    let mut rejected = vec![false; n];
    let mut cut = 0usize;
    f.dist[root] = 0.0;
    while f.settled.len() <= m {
        let mut v = NONE;
        let mut best = f64::INFINITY;
        for u in 0..n {
            if !f.is_settled[u] && !rejected[u] && f.dist[u] < best {
                best = f.dist[u];
                v = u;
            }
        }
        if v == NONE {
            break;
        }
        let mut to_settled = 0usize;
        let mut to_open = 0usize;
        for w in 0..n {
            if w != v && allowed[inst.edge_index(v, w).expect("distinct vertices")] {
                if f.is_settled[w] {
                    to_settled += 1;
                } else {
                    to_open += 1;
                }
            }
        }
        if let Some(cap) = degree_cap {
            if v != root && to_open as f64 >= cap {
                rejected[v] = true;
                f.rejected.push(v);
                continue;
            }
        }
        f.is_settled[v] = true;
        f.settled.push(v);
        cut = cut + to_open - to_settled;
        f.frontier_edge_count.push(cut);
        if f.depth[v] >= depth_cap {
            continue;
        }
        let dv = f.dist[v];
        for w in 0..n {
            if w == v || f.is_settled[w] || rejected[w] {
                continue;
            }
            let e = inst.edge_index(v, w).expect("distinct vertices");
            if !allowed[e] {
                continue;
            }
            let nd = dv + inst.weight(e);
            if nd < f.dist[w] {
                f.dist[w] = nd;
                f.tree_parent[w] = v;
                f.parent_edge[w] = e;
                f.depth[w] = f.depth[v] + 1;
            }
        }
    }
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Join {
    Through,
    E0,
    E2,
    E1,
}

impl Join {
    fn name(self) -> &'static str {
        match self {
            Join::Through => "through_vertex",
            Join::E0 => "e0_edge",
            Join::E2 => "e2_edge",
            Join::E1 => "e1_edge",
        }
    }
}

pub fn cmwp_solve(inst: &Instance, budgets: &BudgetVector, config: &CmwpConfig) -> Result<Solution> {
    if inst.kind() != GraphKind::Complete {
        return Err(Error::KindMismatch(format!("cmwp needs a complete instance, got {}", inst.kind().name())));
    }
    if budgets.len() != inst.r() {
        return Err(Error::Dimension { expected: inst.r(), got: budgets.len() });
    }
    let n = inst.n();
    let source = config.source.unwrap_or(0);
    let target = config.target.unwrap_or(n - 1);
    if source >= n || target >= n {
        return Err(Error::Argument(format!("terminals ({source}, {target}) out of range for n = {n}")));
    }
    if source == target {
        return Err(Error::Argument("source and target coincide".into()));
    }
    if !(config.divisor_factor > 0.0) {
        return Err(Error::Parameter("divisor_factor must be positive".into()));
    }
    let attempts = if config.relax { 4 } else { 1 };
    let mut last = None;
    for relaxation in 0..attempts {
        let mut sol = attempt(inst, budgets, config, source, target, relaxation)?;
        sol.set_stat("relaxations", relaxation);
        if sol.feasible {
            return Ok(sol);
        }
        last = Some(sol);
    }
    Ok(last.expect("at least one attempt"))
}

fn attempt(
    inst: &Instance,
    budgets: &BudgetVector,
    config: &CmwpConfig,
    source: Vertex,
    target: Vertex,
    relaxation: u32,
) -> Result<Solution> {
    let n = inst.n();
    let ln_n = (n as f64).ln().max(1.0);
    let regime = match config.regime {
        Regime::Auto => select_regime(n, budgets, inst.params(), config.divisor_factor)?,
        r => r,
    };
    let base_l = config.l.unwrap_or(if regime == Regime::Sparse { 20.0 * ln_n } else { 10.0 * ln_n });
    if !(base_l > 0.0) {
        return Err(Error::Parameter(format!("L must be positive, got {base_l}")));
    }
    let l = base_l * f64::from(1u32 << relaxation);
    let m = config.m.unwrap_or(n / 3).max(1);
    let depth_cap = config.depth_cap.unwrap_or((l.floor() as usize).max(1));
    let divisor = config.divisor_factor * l;
    let p = filter_probability(budgets, inst.params(), divisor)?;
    let np = n as f64 * p;
    let degree_cap = (regime == Regime::Sparse).then_some(2.0 * np);

    let e0 = FilterSpec::new(FilterMode::E0, divisor)?;
    let t0 = e0.thresholds(budgets);
    let allowed: Vec<bool> = (0..inst.edge_count()).map(|e| e0.admits_with(&t0, inst.costs(e))).collect();

    let side1 = grow(inst, &allowed, source, m, depth_cap, degree_cap);
    let side2 = grow(inst, &allowed, target, m, depth_cap, degree_cap);

    // cheapest join: a shared settled vertex, else a crossing edge
    let mut best = (f64::INFINITY, NONE, NONE, NONE, Join::Through);
    for &x in &side1.settled {
        if side2.is_settled(x) {
            let total = side1.dist[x] + side2.dist[x];
            if total < best.0 {
                best = (total, x, x, NONE, Join::Through);
            }
        }
    }
    let crossing = |keep: &dyn Fn(EdgeId) -> bool, tag: Join, best: &mut (f64, usize, usize, usize, Join)| {
        for &u in &side1.settled {
            for &v in &side2.settled {
                if u == v {
                    continue;
                }
                let e = inst.edge_index(u, v).expect("distinct vertices");
                if keep(e) {
                    let total = side1.dist[u] + inst.weight(e) + side2.dist[v];
                    if total < best.0 {
                        *best = (total, u, v, e, tag);
                    }
                }
            }
        }
    };
    crossing(&|e| allowed[e], Join::E0, &mut best);
    if best.1 == NONE {
        let band = FilterSpec::new(FilterMode::E1Band, l)?;
        let tb = band.thresholds(budgets);
        let in_band = |e: EdgeId| band.admits_with(&tb, inst.costs(e));
        let light = 1.0 / np;
        crossing(&|e| in_band(e) && inst.weight(e) <= light, Join::E2, &mut best);
        if best.1 == NONE {
            crossing(&in_band, Join::E1, &mut best);
        }
    }

    let stats = |sol: Solution| {
        sol.with_stat("regime", if regime == Regime::Sparse { "sparse" } else { "dense" })
            .with_stat("L", l)
            .with_stat("m", m)
            .with_stat("depth_cap", depth_cap)
            .with_stat("p", p)
            .with_stat("settled_source", side1.settled.len())
            .with_stat("settled_target", side2.settled.len())
            .with_stat("tree_height_source", side1.height())
            .with_stat("tree_height_target", side2.height())
            .with_stat("frontier_edges_source", side1.frontier_edge_count.last().copied().unwrap_or(0))
            .with_stat("frontier_edges_target", side2.frontier_edge_count.last().copied().unwrap_or(0))
            .with_stat("rejected", side1.rejected.len() + side2.rejected.len())
    };

    let (_, u, v, bridge, join) = best;
    if u == NONE {
        return Ok(stats(Solution::infeasible(SolutionKind::Path, inst.r(), "cmwp", "disconnected")));
    }
    let (mut verts, _) = side1.path_to(u);
    let (mut back, _) = side2.path_to(v);
    back.reverse();
    if join == Join::Through {
        back.remove(0);
    }
    verts.extend(back);
    let verts = drop_loops(verts);
    let edges: Vec<EdgeId> = verts
        .windows(2)
        .map(|w| inst.edge_index(w[0], w[1]).expect("consecutive vertices differ"))
        .collect();
    let mut sol = Solution::from_structure(inst, budgets, SolutionKind::Path, edges, verts, "cmwp");
    sol.set_stat("join", join.name());
    if bridge != NONE {
        sol.set_stat("bridge_weight", inst.weight(bridge));
        sol.set_stat("bridge_within_20_over_np", inst.weight(bridge) <= 20.0 / np);
    }
    Ok(stats(sol))
}

/// Shortcuts a walk to a simple path by cutting out every closed sub-walk.
fn drop_loops(walk: Vec<Vertex>) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::with_capacity(walk.len());
    for v in walk {
        if let Some(i) = out.iter().position(|&x| x == v) {
            out.truncate(i + 1);
        } else {
            out.push(v);
        }
    }
    out
}
