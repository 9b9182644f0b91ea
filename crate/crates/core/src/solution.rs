//! Solutions and their independent verification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::instance::{BudgetVector, EdgeId, GraphKind, Instance, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Path,
    BipartiteMatching,
    Matching,
    Tour,
    DirectedTour,
}

impl SolutionKind {
    pub fn name(self) -> &'static str {
        match self {
            SolutionKind::Path => "path",
            SolutionKind::BipartiteMatching => "bipartite_matching",
            SolutionKind::Matching => "matching",
            SolutionKind::Tour => "tour",
            SolutionKind::DirectedTour => "directed_tour",
        }
    }

    pub fn graph_kind(self) -> GraphKind {
        match self {
            SolutionKind::Path | SolutionKind::Matching | SolutionKind::Tour => GraphKind::Complete,
            SolutionKind::BipartiteMatching => GraphKind::Bipartite,
            SolutionKind::DirectedTour => GraphKind::Digraph,
        }
    }
}

/// A path, matching or tour with its totals.
///
/// For paths and tours `edge_ids` is in traversal order and `vertices` lists
/// the visited vertices (the tour does not repeat its start). Matchings keep
/// `edge_ids` sorted and leave `vertices` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub kind: SolutionKind,
    pub edge_ids: Vec<EdgeId>,
    pub vertices: Vec<Vertex>,
    pub total_weight: f64,
    pub total_costs: Vec<f64>,
    pub feasible: bool,
    pub method: String,
    pub stats: BTreeMap<String, Value>,
    pub reason: Option<String>,
}

/// Weight and cost totals in canonical summation order: traversal order for
/// paths, ascending edge id for everything else.
pub fn canonical_totals(inst: &Instance, kind: SolutionKind, edge_ids: &[EdgeId]) -> (f64, Vec<f64>) {
    let mut ids = edge_ids.to_vec();
    if kind != SolutionKind::Path {
        ids.sort_unstable();
    }
    let mut w = 0.0;
    let mut c = vec![0.0; inst.r()];
    for e in ids {
        w += inst.weight(e);
        for (acc, x) in c.iter_mut().zip(inst.costs(e)) {
            *acc += x;
        }
    }
    (w, c)
}

impl Solution {
    /// Builds a solution from a structure, computing totals and checking the budget.
    pub fn from_structure(
        inst: &Instance,
        budgets: &BudgetVector,
        kind: SolutionKind,
        edge_ids: Vec<EdgeId>,
        vertices: Vec<Vertex>,
        method: &str,
    ) -> Self {
        let (total_weight, total_costs) = canonical_totals(inst, kind, &edge_ids);
        let feasible = budgets.admits(&total_costs);
        Self {
            kind,
            edge_ids,
            vertices,
            total_weight,
            total_costs,
            feasible,
            method: method.to_string(),
            stats: BTreeMap::new(),
            reason: (!feasible).then(|| "over_budget".to_string()),
        }
    }

    /// An empty infeasible result carrying a reason tag.
    pub fn infeasible(kind: SolutionKind, r: usize, method: &str, reason: &str) -> Self {
        Self {
            kind,
            edge_ids: Vec::new(),
            vertices: Vec::new(),
            total_weight: f64::INFINITY,
            total_costs: vec![f64::INFINITY; r],
            feasible: false,
            method: method.to_string(),
            stats: BTreeMap::new(),
            reason: Some(reason.to_string()),
        }
    }

    pub fn with_stat(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.stats.insert(key.to_string(), value.into());
        self
    }

    pub fn set_stat(&mut self, key: &str, value: impl Into<Value>) {
        self.stats.insert(key.to_string(), value.into());
    }

    /// Endpoint pairs, oriented along the traversal for paths and tours.
    pub fn edge_pairs(&self, inst: &Instance) -> Vec<(Vertex, Vertex)> {
        match self.kind {
            SolutionKind::Path | SolutionKind::Tour if !self.vertices.is_empty() => {
                let k = self.vertices.len();
                self.edge_ids
                    .iter()
                    .enumerate()
                    .map(|(i, _)| (self.vertices[i], self.vertices[(i + 1) % k]))
                    .collect()
            }
            _ => self.edge_ids.iter().map(|&e| inst.endpoints(e)).collect(),
        }
    }

    pub fn to_json(&self, inst: &Instance) -> Value {
        let finite = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        let mut v = json!({
            "kind": self.kind.name(),
            "method": self.method,
            "feasible": self.feasible,
            "weight": finite(self.total_weight),
            "costs": self.total_costs.iter().map(|&c| finite(c)).collect::<Vec<_>>(),
            "edges": self.edge_pairs(inst).iter().map(|&(u, v)| json!([u, v])).collect::<Vec<_>>(),
            "stats": Value::Object(self.stats.clone().into_iter().collect()),
        });
        if let Some(reason) = &self.reason {
            v["reason"] = json!(reason);
        }
        v
    }
}

/// Re-checks a solution from the raw instance: declared structure, reported
/// totals (up to one unit in the last place per summed edge) and budgets.
/// `terminals` applies to paths only.
pub fn verify(
    inst: &Instance,
    budgets: &BudgetVector,
    sol: &Solution,
    terminals: (Vertex, Vertex),
) -> Result<(), String> {
    if sol.kind.graph_kind() != inst.kind() {
        return Err(format!("{} solution on a {} instance", sol.kind.name(), inst.kind().name()));
    }
    let n = inst.n();
    let m = inst.edge_count();
    if sol.edge_ids.iter().any(|&e| e >= m) {
        return Err("edge id out of range".into());
    }
    let mut sorted = sol.edge_ids.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err("repeated edge".into());
    }
    match sol.kind {
        SolutionKind::Path => check_path(inst, &sol.edge_ids, terminals)?,
        SolutionKind::BipartiteMatching => {
            if sol.edge_ids.len() != n {
                return Err(format!("assignment has {} edges, expected {n}", sol.edge_ids.len()));
            }
            let mut left = vec![false; n];
            let mut right = vec![false; n];
            for &e in &sol.edge_ids {
                let (x, y) = inst.endpoints(e);
                if std::mem::replace(&mut left[x], true) || std::mem::replace(&mut right[y], true) {
                    return Err("vertex matched twice".into());
                }
            }
        }
        SolutionKind::Matching => {
            if n % 2 == 1 || sol.edge_ids.len() != n / 2 {
                return Err(format!("matching has {} edges on {n} vertices", sol.edge_ids.len()));
            }
            let mut hit = vec![false; n];
            for &e in &sol.edge_ids {
                let (u, v) = inst.endpoints(e);
                if std::mem::replace(&mut hit[u], true) || std::mem::replace(&mut hit[v], true) {
                    return Err("vertex matched twice".into());
                }
            }
        }
        SolutionKind::Tour | SolutionKind::DirectedTour => check_cycle(inst, &sol.edge_ids, sol.kind)?,
    }

    let mut w = 0.0f64;
    let mut c = vec![0.0f64; inst.r()];
    let mut w_abs = 0.0f64;
    for &e in &sol.edge_ids {
        w += inst.weight(e);
        w_abs += inst.weight(e).abs();
        for (acc, x) in c.iter_mut().zip(inst.costs(e)) {
            *acc += x;
        }
    }
    let tol = |scale: f64| sol.edge_ids.len().max(1) as f64 * f64::EPSILON * scale;
    if (w - sol.total_weight).abs() > tol(w_abs) {
        return Err(format!("reported weight {} differs from recomputed {w}", sol.total_weight));
    }
    if sol.total_costs.len() != c.len() {
        return Err("cost vector has the wrong dimension".into());
    }
    for (reported, actual) in sol.total_costs.iter().zip(&c) {
        if (reported - actual).abs() > tol(*actual) {
            return Err(format!("reported cost {reported} differs from recomputed {actual}"));
        }
    }
    if sol.feasible && !budgets.admits(&sol.total_costs) {
        return Err("marked feasible but exceeds a budget".into());
    }
    Ok(())
}

fn check_path(inst: &Instance, edges: &[EdgeId], (s, t): (Vertex, Vertex)) -> Result<(), String> {
    if edges.is_empty() {
        return Err("empty path".into());
    }
    let mut seen = vec![false; inst.n()];
    let mut cur = s;
    seen[s] = true;
    for &e in edges {
        let (a, b) = inst.endpoints(e);
        cur = if a == cur {
            b
        } else if b == cur {
            a
        } else {
            return Err(format!("edge ({a}, {b}) does not continue the path at {cur}"));
        };
        if std::mem::replace(&mut seen[cur], true) {
            return Err(format!("path revisits vertex {cur}"));
        }
    }
    if cur != t {
        return Err(format!("path ends at {cur}, expected {t}"));
    }
    Ok(())
}

fn check_cycle(inst: &Instance, edges: &[EdgeId], kind: SolutionKind) -> Result<(), String> {
    let n = inst.n();
    if edges.len() != n || (kind == SolutionKind::Tour && n < 3) {
        return Err(format!("tour has {} edges on {n} vertices", edges.len()));
    }
    // successor walk from vertex 0 must return after exactly n steps
    let mut adj: Vec<Vec<(Vertex, EdgeId)>> = vec![Vec::new(); n];
    for &e in edges {
        let (u, v) = inst.endpoints(e);
        adj[u].push((v, e));
        if kind == SolutionKind::Tour {
            adj[v].push((u, e));
        }
    }
    let want = if kind == SolutionKind::Tour { 2 } else { 1 };
    if adj.iter().any(|a| a.len() != want) {
        return Err("vertex with wrong degree in tour".into());
    }
    let mut prev_edge = usize::MAX;
    let mut cur = 0;
    for step in 0..n {
        let &(next, e) = adj[cur].iter().find(|&&(_, e)| e != prev_edge).ok_or("dead end in tour")?;
        prev_edge = e;
        cur = next;
        if cur == 0 && step + 1 < n {
            return Err("tour closes before visiting every vertex".into());
        }
    }
    if cur != 0 {
        return Err("tour does not close".into());
    }
    Ok(())
}
