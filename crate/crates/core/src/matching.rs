//! Maximum-cardinality matchings: Hopcroft–Karp for bipartite graphs and
//! Edmonds' blossom contraction for general graphs.

use std::collections::VecDeque;

const NONE: usize = usize::MAX;

/// Maximum bipartite matching. `adj[x]` lists right vertices adjacent to left
/// vertex `x`. Returns the right partner of each left vertex.
pub fn hopcroft_karp(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut mate_l = vec![NONE; n_left];
    let mut mate_r = vec![NONE; n_right];
    let mut dist = vec![0usize; n_left];
    let mut it = vec![0usize; n_left];
    let mut queue = VecDeque::with_capacity(n_left);

    loop {
        // layered BFS from free left vertices
        queue.clear();
        for x in 0..n_left {
            if mate_l[x] == NONE {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = NONE;
            }
        }
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                let x2 = mate_r[y];
                if x2 == NONE {
                    found = true;
                } else if dist[x2] == NONE {
                    dist[x2] = dist[x] + 1;
                    queue.push_back(x2);
                }
            }
        }
        if !found {
            break;
        }
        it.iter_mut().for_each(|i| *i = 0);
        for x in 0..n_left {
            if mate_l[x] == NONE {
                augment(x, adj, &mut mate_l, &mut mate_r, &mut dist, &mut it);
            }
        }
    }
    mate_l.into_iter().map(|y| (y != NONE).then_some(y)).collect()
}

/// Iterative layered DFS for one augmenting path starting at free vertex `root`.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    let mut stack = vec![root];
    while let Some(&x) = stack.last() {
        if it[x] == adj[x].len() {
            dist[x] = NONE;
            stack.pop();
            if let Some(&p) = stack.last() {
                it[p] += 1;
            }
            continue;
        }
        let y = adj[x][it[x]];
        let x2 = mate_r[y];
        if x2 == NONE {
            // flip the path recorded on the stack
            let mut y = y;
            for &xs in stack.iter().rev() {
                let prev = mate_l[xs];
                mate_l[xs] = y;
                mate_r[y] = xs;
                y = prev;
            }
            return true;
        }
        if dist[x2] != NONE && dist[x2] == dist[x] + 1 {
            stack.push(x2);
        } else {
            it[x] += 1;
        }
    }
    false
}

/// Maximum matching in a general graph with symmetric adjacency lists.
/// Returns each vertex's partner.
pub fn max_matching_general(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut b = Blossom::new(n);
    // greedy start
    for v in 0..n {
        if b.mate[v] == NONE {
            if let Some(&w) = adj[v].iter().find(|&&w| w != v && b.mate[w] == NONE) {
                b.mate[v] = w;
                b.mate[w] = v;
            }
        }
    }
    for root in 0..n {
        if b.mate[root] == NONE {
            let end = b.find_path(adj, root);
            let mut v = end;
            while v != NONE {
                let pv = b.parent[v];
                let ppv = b.mate[pv];
                b.mate[v] = pv;
                b.mate[pv] = v;
                v = ppv;
            }
        }
    }
    b.mate.into_iter().map(|w| (w != NONE).then_some(w)).collect()
}

struct Blossom {
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    mark: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Blossom {
    fn new(n: usize) -> Self {
        Self {
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            mark: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&mut self, mut a: usize, mut b: usize) -> usize {
        self.mark.iter_mut().for_each(|m| *m = false);
        loop {
            a = self.base[a];
            self.mark[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if self.mark[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// BFS over alternating trees; returns a free vertex reached from `root`
    /// with `parent` links describing the augmenting path, or NONE.
    fn find_path(&mut self, adj: &[Vec<usize>], root: usize) -> usize {
        let n = adj.len();
        self.used.iter_mut().for_each(|u| *u = false);
        self.parent.iter_mut().for_each(|p| *p = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in &adj[v] {
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return to;
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        NONE
    }
}

/// Number of matched pairs in a mate vector from [`max_matching_general`].
pub fn matching_size(mate: &[Option<usize>]) -> usize {
    mate.iter().filter(|m| m.is_some()).count() / 2
}
