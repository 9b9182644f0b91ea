//! Random weighted-and-costed complete graphs, bipartite graphs and digraphs.
//!
//! Storage is dense: per-edge arrays indexed by the canonical edge rank, no
//! adjacency lists. Complete graphs use upper-triangular rank order, bipartite
//! graphs rank `(x, y)` as `x * n + y`, digraphs rank arc `(u, v)` as
//! `u * (n - 1) + v'` where `v'` skips the diagonal.

pub mod io;
pub mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{exp_inverse_cdf, pow_fast, DistributionParams};
use crate::error::{Error, Result};

pub type Vertex = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Complete,
    Bipartite,
    Digraph,
}

impl GraphKind {
    pub(crate) fn tag(self) -> u8 {
        match self {
            GraphKind::Complete => 0,
            GraphKind::Bipartite => 1,
            GraphKind::Digraph => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(GraphKind::Complete),
            1 => Some(GraphKind::Bipartite),
            2 => Some(GraphKind::Digraph),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Complete => "complete",
            GraphKind::Bipartite => "bipartite",
            GraphKind::Digraph => "digraph",
        }
    }

    pub fn edge_count(self, n: usize) -> usize {
        match self {
            GraphKind::Complete => n * n.saturating_sub(1) / 2,
            GraphKind::Bipartite => n * n,
            GraphKind::Digraph => n * n.saturating_sub(1),
        }
    }

    /// Number of edges incident to (or leaving) a vertex.
    pub fn degree(self, n: usize) -> usize {
        match self {
            GraphKind::Bipartite => n,
            _ => n.saturating_sub(1),
        }
    }

    /// Canonical rank of edge `(u, v)`; `None` for loops or out-of-range ids.
    /// Complete graphs accept either orientation.
    #[inline]
    pub fn edge_index(self, n: usize, u: Vertex, v: Vertex) -> Option<EdgeId> {
        if u >= n || v >= n {
            return None;
        }
        match self {
            GraphKind::Complete => {
                if u == v {
                    return None;
                }
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                Some(tri_offset(n, a) + (b - a - 1))
            }
            GraphKind::Bipartite => Some(u * n + v),
            GraphKind::Digraph => {
                if u == v {
                    return None;
                }
                Some(u * (n - 1) + if v > u { v - 1 } else { v })
            }
        }
    }

    #[inline]
    pub fn endpoints(self, n: usize, e: EdgeId) -> (Vertex, Vertex) {
        match self {
            GraphKind::Complete => {
                // largest u with tri_offset(n, u) <= e
                let nf = n as f64;
                let disc = (2.0 * nf - 1.0).powi(2) - 8.0 * e as f64;
                let mut u = ((2.0 * nf - 1.0 - disc.max(0.0).sqrt()) / 2.0).floor() as usize;
                u = u.min(n.saturating_sub(2));
                while u > 0 && tri_offset(n, u) > e {
                    u -= 1;
                }
                while u + 1 < n && tri_offset(n, u + 1) <= e {
                    u += 1;
                }
                (u, u + 1 + (e - tri_offset(n, u)))
            }
            GraphKind::Bipartite => (e / n, e % n),
            GraphKind::Digraph => {
                let u = e / (n - 1);
                let r = e % (n - 1);
                (u, if r >= u { r + 1 } else { r })
            }
        }
    }
}

#[inline]
fn tri_offset(n: usize, u: usize) -> usize {
    u * (2 * n - u - 1) / 2
}

/// Cost thresholds `C_1..C_r`; their product is recomputed on every call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetVector {
    components: Vec<f64>,
}

impl BudgetVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Parameter("budget vector must have at least one component".into()));
        }
        if let Some(c) = components.iter().find(|c| !(**c > 0.0)) {
            return Err(Error::Parameter(format!("budget components must be positive, got {c}")));
        }
        Ok(Self { components })
    }

    /// `r` equal components whose product is `delta`.
    pub fn from_product(delta: f64, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Parameter("r must be at least 1".into()));
        }
        Self::new(vec![delta.powf(1.0 / r as f64); r])
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.components.iter().product()
    }

    pub fn ln_delta(&self) -> f64 {
        self.components.iter().map(|c| c.ln()).sum()
    }

    pub fn scaled(&self, divisor: f64) -> Vec<f64> {
        self.components.iter().map(|c| c / divisor).collect()
    }

    pub fn admits(&self, costs: &[f64]) -> bool {
        costs.iter().zip(&self.components).all(|(c, b)| c <= b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterMode {
    /// every cost at most `C_i / scale`
    E0,
    /// every cost in `(C_i / scale, 2 C_i / scale]`
    E1Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub mode: FilterMode,
    pub scale: f64,
}

impl FilterSpec {
    pub fn new(mode: FilterMode, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Parameter(format!("filter scale must be positive, got {scale}")));
        }
        Ok(Self { mode, scale })
    }

    /// Per-dimension thresholds for a budget vector.
    pub fn thresholds(&self, budgets: &BudgetVector) -> Vec<f64> {
        budgets.scaled(self.scale)
    }

    #[inline]
    pub fn admits_with(&self, thresholds: &[f64], costs: &[f64]) -> bool {
        match self.mode {
            FilterMode::E0 => costs.iter().zip(thresholds).all(|(c, t)| c <= t),
            FilterMode::E1Band => costs.iter().zip(thresholds).all(|(c, t)| *c > *t && *c <= 2.0 * t),
        }
    }
}

/// Sorted set of canonical edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeSet(Vec<EdgeId>);

impl EdgeSet {
    pub fn from_sorted(ids: Vec<EdgeId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Self(ids)
    }

    pub fn from_unsorted(mut ids: Vec<EdgeId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn mask(&self, edge_count: usize) -> Vec<bool> {
        let mut m = vec![false; edge_count];
        self.0.iter().for_each(|&e| m[e] = true);
        m
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

/// One edge as supplied to [`Instance::from_edges`] or read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub u: Vertex,
    pub v: Vertex,
    pub weight: f64,
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EdgeView<'a> {
    pub id: EdgeId,
    pub u: Vertex,
    pub v: Vertex,
    pub weight: f64,
    pub costs: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    kind: GraphKind,
    n: usize,
    params: DistributionParams,
    seed: u64,
    weights: Vec<f64>,
    costs: Vec<f64>,
    splits: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy)]
pub struct GenerateOptions {
    pub with_splits: bool,
    pub memory_limit_bytes: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self { with_splits: true, memory_limit_bytes: 8 << 30 }
    }
}

impl GenerateOptions {
    pub fn without_splits() -> Self {
        Self { with_splits: false, ..Self::default() }
    }
}

const GEN_CHUNK: usize = 1 << 15;

/// Bytes needed to hold an instance in memory.
pub fn required_bytes(kind: GraphKind, n: usize, r: usize, with_splits: bool) -> u64 {
    let per_edge = 8 + 8 * r + if with_splits { 16 } else { 0 };
    kind.edge_count(n) as u64 * per_edge as u64
}

/// Draws a random instance. Edge `e` takes two split draws `z_1, z_2` of
/// `(2 Z)^alpha` and `r` cost draws of `Z^beta`; its weight is `min(z_1, z_2)`,
/// which is distributed as `Z^alpha`. Splits are kept only when requested,
/// the weights are the same either way.
pub fn generate(
    kind: GraphKind,
    n: usize,
    params: DistributionParams,
    seed: u64,
    options: GenerateOptions,
) -> Result<Instance> {
    params.validate()?;
    if n < 2 {
        return Err(Error::Argument(format!("instances need n >= 2, got {n}")));
    }
    let need = required_bytes(kind, n, params.r, options.with_splits);
    if need > options.memory_limit_bytes {
        return Err(Error::Capacity { required_bytes: need, limit_bytes: options.memory_limit_bytes });
    }
    let m = kind.edge_count(n);
    let r = params.r;
    let key = rng::instance_key(seed, kind, n);
    let draws = rng::draws_per_edge(r);
    let mut weights = vec![0.0; m];
    let mut costs = vec![0.0; m * r];
    let mut splits = if options.with_splits { vec![[0.0; 2]; m] } else { Vec::new() };

    let fill = |chunk: usize, w: &mut [f64], c: &mut [f64], s: Option<&mut [[f64; 2]]>| {
        let mut stream = rng::EdgeStream::at_edge(key, draws, chunk * GEN_CHUNK);
        let mut s = s;
        for i in 0..w.len() {
            let z1 = pow_fast(2.0 * exp_inverse_cdf(stream.next_unit()), params.alpha);
            let z2 = pow_fast(2.0 * exp_inverse_cdf(stream.next_unit()), params.alpha);
            w[i] = z1.min(z2);
            if let Some(s) = s.as_deref_mut() {
                s[i] = [z1, z2];
            }
            for ci in &mut c[i * r..(i + 1) * r] {
                *ci = pow_fast(exp_inverse_cdf(stream.next_unit()), params.beta);
            }
        }
    };

    if options.with_splits {
        weights
            .par_chunks_mut(GEN_CHUNK)
            .zip(costs.par_chunks_mut(GEN_CHUNK * r))
            .zip(splits.par_chunks_mut(GEN_CHUNK))
            .enumerate()
            .for_each(|(i, ((w, c), s))| fill(i, w, c, Some(s)));
    } else {
        weights
            .par_chunks_mut(GEN_CHUNK)
            .zip(costs.par_chunks_mut(GEN_CHUNK * r))
            .enumerate()
            .for_each(|(i, (w, c))| fill(i, w, c, None));
    }

    Ok(Instance {
        kind,
        n,
        params,
        seed,
        weights,
        costs,
        splits: options.with_splits.then_some(splits),
    })
}

impl Instance {
    /// Builds an instance from an explicit edge list. Every canonical edge must
    /// appear exactly once; complete-graph edges may be given in either orientation.
    pub fn from_edges(
        kind: GraphKind,
        n: usize,
        params: DistributionParams,
        seed: u64,
        edges: Vec<EdgeRecord>,
        splits: Option<Vec<[f64; 2]>>,
    ) -> Result<Self> {
        params.validate()?;
        if n < 1 || (kind != GraphKind::Bipartite && n < 2) {
            return Err(Error::Argument(format!("too few vertices for a {} instance: {n}", kind.name())));
        }
        let m = kind.edge_count(n);
        if edges.len() != m {
            return Err(Error::Format(format!("{} instance on {n} vertices needs {m} edges, got {}", kind.name(), edges.len())));
        }
        if let Some(s) = &splits {
            if s.len() != m {
                return Err(Error::Format(format!("expected {m} split pairs, got {}", s.len())));
            }
        }
        let r = params.r;
        let mut weights = vec![f64::NAN; m];
        let mut costs = vec![0.0; m * r];
        let mut placed_splits = splits.as_ref().map(|_| vec![[0.0; 2]; m]);
        let mut seen = vec![false; m];
        for (i, rec) in edges.into_iter().enumerate() {
            let e = kind
                .edge_index(n, rec.u, rec.v)
                .ok_or_else(|| Error::Format(format!("edge ({}, {}) is not an edge of the instance", rec.u, rec.v)))?;
            if seen[e] {
                return Err(Error::Format(format!("edge ({}, {}) appears twice", rec.u, rec.v)));
            }
            seen[e] = true;
            if rec.costs.len() != r {
                return Err(Error::Dimension { expected: r, got: rec.costs.len() });
            }
            if !(rec.weight >= 0.0) || rec.costs.iter().any(|c| !(*c >= 0.0)) {
                return Err(Error::Format(format!("edge ({}, {}) has a negative or NaN value", rec.u, rec.v)));
            }
            weights[e] = rec.weight;
            costs[e * r..(e + 1) * r].copy_from_slice(&rec.costs);
            if let (Some(dst), Some(src)) = (placed_splits.as_mut(), splits.as_ref()) {
                let mut pair = src[i];
                // a complete-graph edge given as (v, u) with v > u carries its splits swapped
                if kind == GraphKind::Complete && rec.u > rec.v {
                    pair.swap(0, 1);
                }
                dst[e] = pair;
            }
        }
        Ok(Self { kind, n, params, seed, weights, costs, splits: placed_splits })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.params.r
    }

    pub fn params(&self) -> &DistributionParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn edge_index(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        self.kind.edge_index(self.n, u, v)
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.kind.endpoints(self.n, e)
    }

    #[inline]
    pub fn weight(&self, e: EdgeId) -> f64 {
        self.weights[e]
    }

    #[inline]
    pub fn costs(&self, e: EdgeId) -> &[f64] {
        let r = self.params.r;
        &self.costs[e * r..(e + 1) * r]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_splits(&self) -> bool {
        self.splits.is_some()
    }

    #[inline]
    pub fn split(&self, e: EdgeId) -> Option<[f64; 2]> {
        self.splits.as_ref().map(|s| s[e])
    }

    pub fn splits(&self) -> Option<&[[f64; 2]]> {
        self.splits.as_deref()
    }

    /// Drops the stored split values.
    pub fn without_splits(mut self) -> Self {
        self.splits = None;
        self
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeView<'_>> + '_ {
        (0..self.edge_count()).map(move |id| {
            let (u, v) = self.endpoints(id);
            EdgeView { id, u, v, weight: self.weights[id], costs: self.costs(id) }
        })
    }
}

/// Edges passing a cost filter.
pub fn filter_edges(inst: &Instance, budgets: &BudgetVector, spec: &FilterSpec) -> Result<EdgeSet> {
    if budgets.len() != inst.r() {
        return Err(Error::Dimension { expected: inst.r(), got: budgets.len() });
    }
    let thresholds = spec.thresholds(budgets);
    Ok(EdgeSet::from_sorted(
        (0..inst.edge_count()).filter(|&e| spec.admits_with(&thresholds, inst.costs(e))).collect(),
    ))
}

/// Probability that an edge has every cost at most `C_i / divisor`:
/// `prod_i (1 - exp(-(C_i/divisor)^(1/beta)))`.
pub fn filter_probability(budgets: &BudgetVector, params: &DistributionParams, divisor: f64) -> Result<f64> {
    if !(divisor > 0.0) {
        return Err(Error::Parameter(format!("divisor must be positive, got {divisor}")));
    }
    Ok(budgets
        .components()
        .iter()
        .map(|c| -(-(c / divisor).powf(1.0 / params.beta)).exp_m1())
        .product())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// each vertex keeps its k smallest incident edges (complete or bipartite)
    Undirected,
    /// each vertex keeps its k smallest out-arcs (digraph)
    Out,
    /// each vertex keeps its k smallest out-arcs and k smallest in-arcs (digraph)
    InAndOut,
}

/// The k-out subgraph: each vertex keeps the k incident edges that are smallest
/// by its own split value. Ties go to the smaller edge id.
pub fn k_out_subgraph(inst: &Instance, k: usize, orientation: Orientation) -> Result<EdgeSet> {
    if k < 1 || k > inst.kind().degree(inst.n()) {
        return Err(Error::Argument(format!(
            "k must lie in [1, {}], got {k}",
            inst.kind().degree(inst.n())
        )));
    }
    k_out_select(inst, k, orientation, None)
}

/// As [`k_out_subgraph`] restricted to the edges with `allowed[e]`; vertices
/// with fewer than k allowed edges keep all of them.
pub fn k_out_select(inst: &Instance, k: usize, orientation: Orientation, allowed: Option<&[bool]>) -> Result<EdgeSet> {
    let splits = inst
        .splits()
        .ok_or_else(|| Error::State("k-out selection needs split values; regenerate with splits".into()))?;
    let n = inst.n();
    let kind = inst.kind();
    match (kind, orientation) {
        (GraphKind::Complete | GraphKind::Bipartite, Orientation::Undirected) => {}
        (GraphKind::Digraph, Orientation::Out | Orientation::InAndOut) => {}
        _ => {
            return Err(Error::Argument(format!("orientation {orientation:?} does not apply to {} instances", kind.name())))
        }
    }
    let ok = |e: EdgeId| allowed.map_or(true, |a| a[e]);
    let mut picked = Vec::with_capacity(2 * n * k);
    let mut best = KSmallest::new(k);

    // (owner side, vertex) pairs; side 0 reads split[0], side 1 reads split[1]
    let sides: &[usize] = match (kind, orientation) {
        (GraphKind::Digraph, Orientation::Out) => &[0],
        (GraphKind::Complete, _) => &[2],
        _ => &[0, 1],
    };
    for &side in sides {
        for v in 0..n {
            best.clear();
            match (kind, side) {
                (GraphKind::Complete, _) => {
                    for w in 0..n {
                        if w == v {
                            continue;
                        }
                        let e = kind.edge_index(n, v, w).expect("distinct vertices");
                        if ok(e) {
                            let z = if v < w { splits[e][0] } else { splits[e][1] };
                            best.offer(z, e);
                        }
                    }
                }
                (GraphKind::Bipartite, 0) => {
                    for y in 0..n {
                        let e = v * n + y;
                        if ok(e) {
                            best.offer(splits[e][0], e);
                        }
                    }
                }
                (GraphKind::Bipartite, _) => {
                    for x in 0..n {
                        let e = x * n + v;
                        if ok(e) {
                            best.offer(splits[e][1], e);
                        }
                    }
                }
                (GraphKind::Digraph, 0) => {
                    for w in 0..n {
                        if let Some(e) = kind.edge_index(n, v, w) {
                            if ok(e) {
                                best.offer(splits[e][0], e);
                            }
                        }
                    }
                }
                (GraphKind::Digraph, _) => {
                    for w in 0..n {
                        if let Some(e) = kind.edge_index(n, w, v) {
                            if ok(e) {
                                best.offer(splits[e][1], e);
                            }
                        }
                    }
                }
            }
            picked.extend(best.ids());
        }
    }
    Ok(EdgeSet::from_unsorted(picked))
}

/// Keeps the k smallest `(value, id)` pairs seen.
struct KSmallest {
    k: usize,
    items: Vec<(f64, EdgeId)>,
}

impl KSmallest {
    fn new(k: usize) -> Self {
        Self { k, items: Vec::with_capacity(k + 1) }
    }

    fn clear(&mut self) {
        self.items.clear();
    }

    #[inline]
    fn offer(&mut self, z: f64, e: EdgeId) {
        let less = |a: &(f64, EdgeId), b: &(f64, EdgeId)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        if self.items.len() == self.k {
            if !less(&(z, e), &self.items[self.k - 1]) {
                return;
            }
            self.items.pop();
        }
        let pos = self.items.partition_point(|it| less(it, &(z, e)));
        self.items.insert(pos, (z, e));
    }

    fn ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.items.iter().map(|it| it.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::OrderStatQuery;
    use crate::numeric::RunningStats;

    fn p(alpha: f64, beta: f64, r: usize) -> DistributionParams {
        DistributionParams::new(alpha, beta, r).unwrap()
    }

    #[test]
    fn edge_indexing_roundtrips() {
        for kind in [GraphKind::Complete, GraphKind::Bipartite, GraphKind::Digraph] {
            for n in 2..12 {
                let m = kind.edge_count(n);
                let mut seen = vec![false; m];
                for u in 0..n {
                    for v in 0..n {
                        if let Some(e) = kind.edge_index(n, u, v) {
                            let (a, b) = kind.endpoints(n, e);
                            match kind {
                                GraphKind::Complete => assert_eq!((a, b), (u.min(v), u.max(v))),
                                _ => assert_eq!((a, b), (u, v)),
                            }
                            seen[e] = true;
                        }
                    }
                }
                assert!(seen.iter().all(|&s| s), "{kind:?} n={n}");
            }
        }
        // large complete graph: the float inverse must still land exactly
        let n = 100_000;
        for e in [0, 1, 99_998, 99_999, 4_999_949_999, 4_999_950_000 - 1] {
            let (u, v) = GraphKind::Complete.endpoints(n, e);
            assert_eq!(GraphKind::Complete.edge_index(n, u, v), Some(e));
        }
    }

    #[test]
    fn edge_counts() {
        let inst = generate(GraphKind::Complete, 3, p(1.0, 1.0, 1), 1, GenerateOptions::default()).unwrap();
        assert_eq!(inst.edge_count(), 3);
        assert_eq!(GraphKind::Bipartite.edge_count(5), 25);
        assert_eq!(GraphKind::Digraph.edge_count(5), 20);
        assert!(generate(GraphKind::Complete, 1, p(1.0, 1.0, 1), 1, GenerateOptions::default()).is_err());
    }

    #[test]
    fn generation_is_deterministic_and_split_consistent() {
        let a = generate(GraphKind::Digraph, 40, p(0.5, 0.7, 2), 9, GenerateOptions::default()).unwrap();
        let b = generate(GraphKind::Digraph, 40, p(0.5, 0.7, 2), 9, GenerateOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = generate(GraphKind::Digraph, 40, p(0.5, 0.7, 2), 9, GenerateOptions::without_splits()).unwrap();
        assert_eq!(a.weights(), c.weights());
        for e in 0..a.edge_count() {
            let [z1, z2] = a.split(e).unwrap();
            assert_eq!(a.weight(e), z1.min(z2));
            assert_eq!(a.costs(e).len(), 2);
        }
        let d = generate(GraphKind::Digraph, 40, p(0.5, 0.7, 2), 10, GenerateOptions::default()).unwrap();
        assert_ne!(a.weights(), d.weights());
    }

    #[test]
    fn chunking_does_not_change_values() {
        // more edges than one generation chunk
        let inst = generate(GraphKind::Bipartite, 200, p(1.0, 1.0, 1), 3, GenerateOptions::default()).unwrap();
        let key = rng::instance_key(3, GraphKind::Bipartite, 200);
        let e = 39_999;
        let mut s = rng::EdgeStream::at_edge(key, 3, e);
        let z1 = 2.0 * exp_inverse_cdf(s.next_unit());
        let z2 = 2.0 * exp_inverse_cdf(s.next_unit());
        let c = exp_inverse_cdf(s.next_unit());
        assert_eq!(inst.split(e).unwrap(), [z1, z2]);
        assert_eq!(inst.costs(e), &[c]);
    }

    #[test]
    fn capacity_error_reports_bytes() {
        let opts = GenerateOptions { with_splits: true, memory_limit_bytes: 1000 };
        match generate(GraphKind::Complete, 100, p(1.0, 1.0, 1), 1, opts) {
            Err(Error::Capacity { required_bytes, .. }) => assert_eq!(required_bytes, 4950 * 32),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bipartite_mean_weight_is_one() {
        let inst = generate(GraphKind::Bipartite, 500, p(1.0, 1.0, 1), 7, GenerateOptions::default()).unwrap();
        let mut s = RunningStats::default();
        inst.weights().iter().for_each(|&w| s.push(w));
        assert!((s.mean() - 1.0).abs() < 3.0 * s.stderr(), "mean {} se {}", s.mean(), s.stderr());
    }

    #[test]
    fn budget_vector_product() {
        let b = BudgetVector::new(vec![2.0, 3.0, 0.5]).unwrap();
        assert_eq!(b.delta(), 3.0);
        assert!((b.ln_delta() - 3f64.ln()).abs() < 1e-15);
        assert!(BudgetVector::new(vec![1.0, 0.0]).is_err());
        assert!(BudgetVector::new(vec![]).is_err());
        let eq = BudgetVector::from_product(8.0, 3).unwrap();
        assert!((eq.delta() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn filter_extremes() {
        let inst = generate(GraphKind::Complete, 30, p(1.0, 1.0, 2), 5, GenerateOptions::default()).unwrap();
        let max_cost = (0..inst.edge_count()).flat_map(|e| inst.costs(e).to_vec()).fold(0.0, f64::max);
        let all = BudgetVector::new(vec![max_cost + 1.0; 2]).unwrap();
        let keep = filter_edges(&inst, &all, &FilterSpec::new(FilterMode::E0, 1.0).unwrap()).unwrap();
        assert_eq!(keep.len(), inst.edge_count());
        let min_cost = (0..inst.edge_count()).flat_map(|e| inst.costs(e).to_vec()).fold(f64::INFINITY, f64::min);
        let none = BudgetVector::new(vec![min_cost / 2.0; 2]).unwrap();
        assert!(filter_edges(&inst, &none, &FilterSpec::new(FilterMode::E0, 1.0).unwrap()).unwrap().is_empty());
        assert!(filter_edges(&inst, &BudgetVector::new(vec![1.0]).unwrap(), &FilterSpec::new(FilterMode::E0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn filter_probability_examples() {
        let b = BudgetVector::new(vec![2f64.ln()]).unwrap();
        assert!((filter_probability(&b, &p(1.0, 1.0, 1), 1.0).unwrap() - 0.5).abs() < 1e-15);
        let tiny = BudgetVector::new(vec![1e-12]).unwrap();
        assert!(filter_probability(&tiny, &p(1.0, 1.0, 1), 1.0).unwrap() < 1e-11);
        assert!(filter_probability(&b, &p(1.0, 1.0, 1), 0.0).is_err());
    }

    #[test]
    fn filter_probability_sandwich() {
        for r in 1..=3 {
            for &beta in &[0.5, 1.0] {
                for i in 1..=20 {
                    let divisor = 7.0;
                    // every (C_i/divisor)^(1/beta) <= 1
                    let c = divisor * (i as f64 / 20.0).powf(beta);
                    let comps: Vec<f64> = (0..r).map(|j| c * (1.0 - 0.1 * j as f64)).collect();
                    let b = BudgetVector::new(comps).unwrap();
                    let prob = filter_probability(&b, &p(1.0, beta, r), divisor).unwrap();
                    let upper = b.delta().powf(1.0 / beta) / divisor.powf(r as f64 / beta);
                    let lower = upper / 2f64.powi(r as i32);
                    assert!(lower <= prob * (1.0 + 1e-12) && prob <= upper * (1.0 + 1e-12), "r={r} beta={beta} i={i}");
                }
            }
        }
    }

    #[test]
    fn e0_and_band_are_disjoint() {
        let inst = generate(GraphKind::Complete, 60, p(1.0, 0.5, 2), 11, GenerateOptions::default()).unwrap();
        let b = BudgetVector::new(vec![1.0, 2.0]).unwrap();
        for scale in [0.5, 1.0, 3.0] {
            let e0 = filter_edges(&inst, &b, &FilterSpec::new(FilterMode::E0, scale).unwrap()).unwrap();
            let e1 = filter_edges(&inst, &b, &FilterSpec::new(FilterMode::E1Band, scale).unwrap()).unwrap();
            assert!(e0.is_disjoint(&e1));
        }
    }

    #[test]
    fn keep_fraction_in_linear_band() {
        // r = 1, beta = 1: keep fraction of c <= x sits in [x/2, x] for x <= 1
        let inst = generate(GraphKind::Bipartite, 300, p(1.0, 1.0, 1), 2, GenerateOptions::without_splits()).unwrap();
        for &x in &[0.05, 0.2, 0.6, 1.0] {
            let b = BudgetVector::new(vec![x * 3.0]).unwrap();
            let kept = filter_edges(&inst, &b, &FilterSpec::new(FilterMode::E0, 3.0).unwrap()).unwrap();
            let frac = kept.len() as f64 / inst.edge_count() as f64;
            assert!(frac >= x / 2.0 && frac <= x, "x={x} frac={frac}");
        }
    }

    #[test]
    fn k_out_small_and_degree() {
        let inst = generate(GraphKind::Bipartite, 2, p(1.0, 1.0, 1), 1, GenerateOptions::default()).unwrap();
        assert_eq!(k_out_subgraph(&inst, 2, Orientation::Undirected).unwrap().len(), 4);
        assert!(k_out_subgraph(&inst, 3, Orientation::Undirected).is_err());
        assert!(k_out_subgraph(&inst, 1, Orientation::Out).is_err());
        let bare = inst.clone().without_splits();
        assert!(matches!(k_out_subgraph(&bare, 1, Orientation::Undirected), Err(Error::State(_))));
    }

    #[test]
    fn k_out_every_vertex_keeps_own_choices() {
        let n = 500;
        let inst = generate(GraphKind::Bipartite, n, p(1.0, 1.0, 1), 4, GenerateOptions::default()).unwrap();
        let set = k_out_subgraph(&inst, 2, Orientation::Undirected).unwrap();
        let mut deg_x = vec![0; n];
        let mut deg_y = vec![0; n];
        for e in set.iter() {
            let (x, y) = inst.endpoints(e);
            deg_x[x] += 1;
            deg_y[y] += 1;
        }
        assert!(deg_x.iter().chain(&deg_y).all(|&d| d >= 2));
        // each x's own two smallest z_1 edges are present
        for x in 0..n {
            let mut row: Vec<(f64, usize)> = (0..n).map(|y| (inst.split(x * n + y).unwrap()[0], x * n + y)).collect();
            row.sort_by(|a, b| a.0.total_cmp(&b.0));
            assert!(set.contains(row[0].1) && set.contains(row[1].1));
        }
    }

    #[test]
    fn k_out_digraph_in_and_out() {
        let n = 60;
        let inst = generate(GraphKind::Digraph, n, p(1.0, 1.0, 1), 4, GenerateOptions::default()).unwrap();
        let set = k_out_subgraph(&inst, 2, Orientation::InAndOut).unwrap();
        let mut outd = vec![0; n];
        let mut ind = vec![0; n];
        for e in set.iter() {
            let (u, v) = inst.endpoints(e);
            outd[u] += 1;
            ind[v] += 1;
        }
        assert!(outd.iter().all(|&d| d >= 2) && ind.iter().all(|&d| d >= 2));
        let out_only = k_out_subgraph(&inst, 2, Orientation::Out).unwrap();
        assert_eq!(out_only.len(), 2 * n);
    }

    #[test]
    fn k_out_ties_prefer_smaller_edge() {
        let params = p(1.0, 1.0, 1);
        let edges = (0..3)
            .map(|e| {
                let (u, v) = GraphKind::Complete.endpoints(4, e);
                EdgeRecord { u, v, weight: 1.0, costs: vec![1.0] }
            })
            .chain((3..6).map(|e| {
                let (u, v) = GraphKind::Complete.endpoints(4, e);
                EdgeRecord { u, v, weight: 1.0, costs: vec![1.0] }
            }))
            .collect();
        let inst = Instance::from_edges(GraphKind::Complete, 4, params, 0, edges, Some(vec![[1.0, 1.0]; 6])).unwrap();
        let set = k_out_subgraph(&inst, 1, Orientation::Undirected).unwrap();
        // vertex 0 -> edge 0 (0,1); 1 -> edge 0; 2 -> edge 1 (0,2); 3 -> edge 2 (0,3)
        assert_eq!(set.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn minimum_split_matches_order_statistic() {
        let n = 500;
        let inst = generate(GraphKind::Complete, n, p(1.0, 1.0, 1), 21, GenerateOptions::default()).unwrap();
        let mut s = RunningStats::default();
        for v in 0..n {
            let mut best = f64::INFINITY;
            for w in 0..n {
                if let Some(e) = inst.edge_index(v, w) {
                    let z = inst.split(e).unwrap();
                    best = best.min(if v < w { z[0] } else { z[1] });
                }
            }
            s.push(best);
        }
        let want = crate::distributions::split_order_stat_mean(&OrderStatQuery::new(499, 1, 1.0).unwrap(), true).unwrap();
        assert!((s.mean() - want).abs() < 3.0 * s.stderr(), "mean {} want {want} se {}", s.mean(), s.stderr());
    }

    #[test]
    fn from_edges_validation() {
        let params = p(1.0, 1.0, 1);
        let rec = |u, v| EdgeRecord { u, v, weight: 1.0, costs: vec![1.0] };
        assert!(Instance::from_edges(GraphKind::Complete, 3, params, 0, vec![rec(0, 1), rec(1, 2)], None).is_err());
        assert!(Instance::from_edges(GraphKind::Complete, 3, params, 0, vec![rec(0, 1), rec(1, 0), rec(1, 2)], None).is_err());
        let ok = Instance::from_edges(GraphKind::Complete, 3, params, 0, vec![rec(2, 1), rec(0, 1), rec(0, 2)], None).unwrap();
        assert_eq!(ok.edge_count(), 3);
        let bad_dim = vec![rec(0, 1), rec(0, 2), EdgeRecord { u: 1, v: 2, weight: 1.0, costs: vec![] }];
        assert!(Instance::from_edges(GraphKind::Complete, 3, params, 0, bad_dim, None).is_err());
    }
}
