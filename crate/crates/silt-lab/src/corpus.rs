//! Seeded random corpora of posets and filtration functions.
//!
//! These generators back the property suites and the CLI `--seed` flag.
//! Generated posets always satisfy the construction invariants (acyclic,
//! irredundant covers); generated functions are order-preserving by
//! construction.

use crate::extint::ExtInt;
use crate::poset::{FinitePoset, NodeId};
use rand::rngs::StdRng;
use rand::{Rng as _, SeedableRng};

pub type Rng = StdRng;

pub fn rng(seed: u64) -> Rng {
    StdRng::seed_from_u64(seed)
}

/// Random poset with at most `max_nodes` nodes, as a transitively reduced
/// random DAG.
pub fn random_poset(rng: &mut Rng, max_nodes: usize) -> FinitePoset {
    let n = rng.gen_range(0..=max_nodes);
    random_dag(rng, n, 0.35)
}

fn random_dag(rng: &mut Rng, n: usize, p_edge: f64) -> FinitePoset {
    let mut reach = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p_edge) {
                edges.push((i, j));
                reach[i][j] = true;
            }
        }
    }
    // transitive closure, then keep only non-implied edges
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let covers: Vec<(NodeId, NodeId)> = edges
        .iter()
        .filter(|&&(i, j)| !(0..n).any(|k| k != i && k != j && reach[i][k] && reach[k][j]))
        .map(|&(i, j)| (NodeId(i), NodeId(j)))
        .collect();
    let names = (0..n).map(|i| format!("n{i}")).collect();
    FinitePoset::from_ids(names, covers, None).expect("reduced DAG is a valid poset")
}

/// Random poset in which every connected component has a unique minimal
/// node (the shape of spectra windows of local-ish rings).
pub fn random_unique_min_poset(rng: &mut Rng, max_nodes: usize) -> FinitePoset {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let blocks = if n >= 4 && rng.gen_bool(0.3) { 2 } else { 1 };
    let mut names: Vec<String> = Vec::new();
    let mut covers: Vec<(NodeId, NodeId)> = Vec::new();
    let mut offset = 0usize;
    let split = if blocks == 2 { n / 2 } else { n };
    for b in 0..blocks {
        let size = if b == 0 { split.max(1) } else { (n - split).max(1) };
        let inner = random_dag(rng, size - 1, 0.4);
        let root = offset;
        names.push(format!("r{b}"));
        for i in 0..size - 1 {
            names.push(format!("b{b}n{i}"));
        }
        for &(a, c) in inner.covers() {
            covers.push((NodeId(offset + 1 + a.0), NodeId(offset + 1 + c.0)));
        }
        for m in inner.minimal_nodes() {
            covers.push((NodeId(root), NodeId(offset + 1 + m.0)));
        }
        if size == 1 {
            // lone root, nothing to attach
        }
        offset += size;
    }
    FinitePoset::from_ids(names, covers, None).expect("rooted blocks form a valid poset")
}

/// Random poset of height at most one.
pub fn random_height1_poset(rng: &mut Rng, max_nodes: usize) -> FinitePoset {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let mins = rng.gen_range(1..=n);
    let names = (0..n)
        .map(|i| {
            if i < mins {
                format!("p{i}")
            } else {
                format!("m{i}")
            }
        })
        .collect();
    let mut covers = Vec::new();
    for j in mins..n {
        for i in 0..mins {
            if rng.gen_bool(0.6) {
                covers.push((NodeId(i), NodeId(j)));
            }
        }
    }
    FinitePoset::from_ids(names, covers, None).expect("bipartite covers form a valid poset")
}

/// Random order-preserving function with finite values in `[lo, hi]`.
pub fn random_op_function(rng: &mut Rng, poset: &FinitePoset, lo: i64, hi: i64) -> Vec<ExtInt> {
    let n = poset.len();
    let mut f = vec![lo; n];
    let mut order: Vec<NodeId> = poset.nodes().collect();
    order.sort_by_key(|&p| poset.height(p));
    for &p in &order {
        let floor = poset
            .nodes()
            .filter(|&q| poset.lt(q, p))
            .map(|q| f[q.0])
            .max()
            .unwrap_or(lo);
        f[p.0] = (floor + rng.gen_range(0..=2)).min(hi).max(floor);
    }
    f.into_iter().map(ExtInt::Fin).collect()
}

/// Random strictly increasing function starting at `lo`.
pub fn random_strict_function(rng: &mut Rng, poset: &FinitePoset, lo: i64) -> Vec<ExtInt> {
    let n = poset.len();
    let mut f = vec![lo; n];
    let mut order: Vec<NodeId> = poset.nodes().collect();
    order.sort_by_key(|&p| poset.height(p));
    for &p in &order {
        let floor = poset
            .nodes()
            .filter(|&q| poset.lt(q, p))
            .map(|q| f[q.0] + 1)
            .max()
            .unwrap_or(lo);
        f[p.0] = floor + rng.gen_range(0..=1);
    }
    f.into_iter().map(ExtInt::Fin).collect()
}
