//! Hamilton cycle search in sparse random graphs.
//!
//! Undirected graphs use rotation–extension: grow a path greedily, and when
//! the endpoint has no fresh neighbor, rotate the path about one of the
//! endpoint's on-path neighbors to expose a new endpoint. Digraphs start from
//! a cycle factor (a bipartite perfect matching between out- and in-copies)
//! and merge cycles by exchanging successors along random alternating walks,
//! accepting exchanges that add cycles only with small probability. Both
//! searches count node expansions and stop at a fixed budget.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::matching::hopcroft_karp;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonSearch {
    /// vertices in cycle order, or `None` when the budget ran out
    pub cycle: Option<Vec<usize>>,
    pub expansions: u64,
    pub restarts: u64,
}

/// Rotation–extension search on an undirected graph given by symmetric
/// neighbor lists.
pub fn undirected_cycle(adj: &[Vec<usize>], budget: u64, rng: &mut ChaCha8Rng) -> HamiltonSearch {
    let n = adj.len();
    let mut out = HamiltonSearch { cycle: None, expansions: 0, restarts: 0 };
    if n < 3 || adj.iter().any(|a| a.len() < 2) {
        return out;
    }
    let mut sorted: Vec<Vec<usize>> = adj.to_vec();
    sorted.iter_mut().for_each(|a| {
        a.sort_unstable();
        a.dedup();
    });
    let adj = &sorted;
    let stall_limit = 50 * n as u64;
    let mut pos = vec![NONE; n];
    let mut path: Vec<usize> = Vec::with_capacity(n);
    let mut fresh: Vec<usize> = Vec::new();

    'restart: loop {
        path.iter().for_each(|&v| pos[v] = NONE);
        path.clear();
        let start = rng.random_range(0..n);
        pos[start] = 0;
        path.push(start);
        let mut stall = 0u64;
        loop {
            if out.expansions >= budget {
                return out;
            }
            out.expansions += 1;
            let x = *path.last().expect("path is never empty");

            // extension, preferring the fresh neighbor with fewest fresh neighbors
            fresh.clear();
            let mut best = usize::MAX;
            for &y in &adj[x] {
                if pos[y] == NONE {
                    let d = adj[y].iter().filter(|&&z| pos[z] == NONE).count();
                    if d < best {
                        best = d;
                        fresh.clear();
                    }
                    if d == best {
                        fresh.push(y);
                    }
                }
            }
            if !fresh.is_empty() {
                let y = fresh[rng.random_range(0..fresh.len())];
                pos[y] = path.len();
                path.push(y);
                stall = 0;
                continue;
            }
            if path.len() == n && adj[x].binary_search(&path[0]).is_ok() {
                out.cycle = Some(path.clone());
                return out;
            }

            stall += 1;
            if stall > stall_limit {
                out.restarts += 1;
                continue 'restart;
            }
            let len = path.len();
            // switch ends now and then so both endpoints get rotated
            if rng.random_range(0..4) == 0 {
                path.reverse();
                for (i, &v) in path.iter().enumerate() {
                    pos[v] = i;
                }
                continue;
            }
            let on_path = adj[x].iter().filter(|&&y| pos[y] != NONE && pos[y] + 2 < len).count();
            if on_path == 0 {
                path.reverse();
                for (i, &v) in path.iter().enumerate() {
                    pos[v] = i;
                }
                continue;
            }
            let pick = rng.random_range(0..on_path);
            let y = *adj[x]
                .iter()
                .filter(|&&y| pos[y] != NONE && pos[y] + 2 < len)
                .nth(pick)
                .expect("pick is in range");
            let i = pos[y];
            path[i + 1..].reverse();
            for (j, &v) in path.iter().enumerate().skip(i + 1) {
                pos[v] = j;
            }
        }
    }
}

/// Cycle-factor patching on a digraph given by sorted out-neighbor lists.
pub fn directed_cycle(out_adj: &[Vec<usize>], budget: u64, rng: &mut ChaCha8Rng) -> HamiltonSearch {
    let n = out_adj.len();
    let mut res = HamiltonSearch { cycle: None, expansions: 0, restarts: 0 };
    if n < 2 {
        return res;
    }
    let mut adj: Vec<Vec<usize>> = out_adj.to_vec();
    adj.iter_mut().for_each(|a| {
        a.sort_unstable();
        a.dedup();
    });
    let factor = hopcroft_karp(n, n, &adj);
    if factor.iter().any(|s| s.is_none()) {
        return res;
    }
    let mut succ: Vec<usize> = factor.into_iter().map(|s| s.expect("perfect")).collect();
    let mut pred = vec![0; n];
    for (v, &s) in succ.iter().enumerate() {
        pred[s] = v;
    }
    let mut cyc = vec![0usize; n];
    let mut cycles = label_cycles(&succ, &mut cyc);
    let mut stamp = vec![0u64; n];
    let mut slot = vec![0usize; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut saved: Vec<usize> = Vec::with_capacity(n);
    let mut round = 0u64;

    while cycles > 1 {
        // Random alternating walk x_0, x_1, ...: x_i takes the successor of
        // x_{i+1}. It closes when some x_k can take the successor of x_0, or of
        // an earlier x_j, giving a successor exchange along x_j..x_k.
        round += 1;
        chain.clear();
        let a = rng.random_range(0..n);
        chain.push(a);
        stamp[a] = round;
        slot[a] = 0;
        let mut closed_at = None;
        while chain.len() <= n {
            if res.expansions >= budget {
                return res;
            }
            res.expansions += 1;
            let x = *chain.last().expect("chain starts non-empty");
            let options = adj[x].len() - usize::from(adj[x].binary_search(&succ[x]).is_ok());
            if options == 0 {
                break;
            }
            let mut pick = rng.random_range(0..options);
            let mut t = NONE;
            for &y in &adj[x] {
                if y == succ[x] {
                    continue;
                }
                if pick == 0 {
                    t = y;
                    break;
                }
                pick -= 1;
            }
            let y = pred[t];
            if stamp[y] == round {
                closed_at = Some(slot[y]);
                break;
            }
            stamp[y] = round;
            slot[y] = chain.len();
            chain.push(y);
        }
        let Some(j) = closed_at else { continue };
        let cycle = &chain[j..];
        if cycle.len() < 2 {
            continue;
        }
        saved.clear();
        saved.extend(cycle.iter().map(|&x| succ[x]));
        let k = cycle.len();
        for i in 0..k {
            succ[cycle[i]] = saved[(i + 1) % k];
        }
        let after = label_cycles(&succ, &mut cyc);
        let accept = after <= cycles || rng.random::<f64>() < (-2.0 * (after - cycles) as f64).exp();
        if accept {
            for &x in cycle {
                pred[succ[x]] = x;
            }
            cycles = after;
        } else {
            for i in 0..k {
                succ[cycle[i]] = saved[i];
            }
            label_cycles(&succ, &mut cyc);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut v = 0;
    for _ in 0..n {
        order.push(v);
        v = succ[v];
    }
    res.cycle = Some(order);
    res
}

fn label_cycles(succ: &[usize], cyc: &mut [usize]) -> usize {
    cyc.iter_mut().for_each(|c| *c = NONE);
    let mut count = 0;
    for s in 0..succ.len() {
        if cyc[s] != NONE {
            continue;
        }
        let mut v = s;
        while cyc[v] == NONE {
            cyc[v] = count;
            v = succ[v];
        }
        count += 1;
    }
    count
}
