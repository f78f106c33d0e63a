//! Finite posets modeling windows of prime spectra.
//!
//! A poset is stored by its irredundant cover relation (the saturated
//! length-1 chains). Construction validates acyclicity and irredundancy;
//! everything downstream (heights, catenarity, codimension functions,
//! filtration combinatorics) reads the poset through the precomputed
//! reachability closure, so values are immutable and cheap to share.

use crate::ring::{MonomialRing, VarSet};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Index of a node inside a [`FinitePoset`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("cover relation has a cycle through `{0}`")]
    CycleDetected(String),
    #[error("cover ({0}, {1}) is implied by transitivity")]
    RedundantCover(String, String),
}

/// A finite poset given by nodes and saturated covers, with optional
/// per-node labels recording the variable set of a monomial prime.
#[derive(Clone, PartialEq, Eq)]
pub struct FinitePoset {
    names: Vec<String>,
    covers: Vec<(NodeId, NodeId)>,
    labels: Vec<Option<VarSet>>,
    // reachability closure: le[a][b] == true iff a <= b
    le: Vec<Vec<bool>>,
    heights: Vec<usize>,
    components: Vec<Vec<NodeId>>,
    component_of: Vec<usize>,
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinitePoset({} nodes", self.names.len())?;
        for (a, b) in &self.covers {
            write!(f, ", {} < {}", self.names[a.0], self.names[b.0])?;
        }
        write!(f, ")")
    }
}

/// A codimension function: increases by exactly one along every cover,
/// normalized so that each connected component has minimum value zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CodimFunction {
    pub values: Vec<i64>,
}

/// Witness for a failed catenarity check: two saturated chains between the
/// same endpoints with distinct lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatenaryWitness {
    pub lower: NodeId,
    pub upper: NodeId,
    pub short_chain: Vec<NodeId>,
    pub long_chain: Vec<NodeId>,
}

/// Error of the codimension solver, carrying a cycle of covers along which
/// the increments do not balance.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no codimension function: inconsistent cycle of {} covers", cycle.len())]
pub struct NoCodimensionFunction {
    pub cycle: Vec<(NodeId, NodeId)>,
}

impl FinitePoset {
    /// Builds a validated poset from node names and named cover pairs.
    pub fn new(nodes: Vec<String>, covers: Vec<(String, String)>) -> Result<Self, PosetError> {
        Self::build(nodes, covers, true)
    }

    /// Builds a poset from cover data that is allowed to fail the
    /// irredundancy invariant. Catenarity and codimension checks then read
    /// the supplied pairs as claimed saturated chains, so inconsistent
    /// claims surface as their witnesses instead of a construction error.
    pub fn from_claimed_covers(
        nodes: Vec<String>,
        covers: Vec<(String, String)>,
    ) -> Result<Self, PosetError> {
        Self::build(nodes, covers, false)
    }

    fn build(
        nodes: Vec<String>,
        covers: Vec<(String, String)>,
        strict: bool,
    ) -> Result<Self, PosetError> {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(PosetError::DuplicateNode(n.clone()));
            }
        }
        let mut pairs = Vec::with_capacity(covers.len());
        for (a, b) in &covers {
            let ia = *index
                .get(a)
                .ok_or_else(|| PosetError::UnknownNode(a.clone()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| PosetError::UnknownNode(b.clone()))?;
            pairs.push((NodeId(ia), NodeId(ib)));
        }
        Self::assemble(nodes, pairs, None, strict)
    }

    pub(crate) fn from_ids(
        names: Vec<String>,
        covers: Vec<(NodeId, NodeId)>,
        labels: Option<Vec<Option<VarSet>>>,
    ) -> Result<Self, PosetError> {
        Self::assemble(names, covers, labels, true)
    }

    fn assemble(
        names: Vec<String>,
        covers: Vec<(NodeId, NodeId)>,
        labels: Option<Vec<Option<VarSet>>>,
        strict: bool,
    ) -> Result<Self, PosetError> {
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(a, b) in &covers {
            if a == b {
                return Err(PosetError::CycleDetected(names[a.0].clone()));
            }
            adj[a.0].push(b.0);
            indeg[b.0] += 1;
        }

        // Kahn topological sort; leftovers witness a cycle.
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        let mut indeg_w = indeg.clone();
        while let Some(v) = queue.pop_front() {
            topo.push(v);
            for &w in &adj[v] {
                indeg_w[w] -= 1;
                if indeg_w[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if topo.len() != n {
            let stuck = (0..n).find(|&i| indeg_w[i] > 0).unwrap();
            return Err(PosetError::CycleDetected(names[stuck].clone()));
        }

        // A cover (a, b) is redundant iff b is reachable from a in >= 2 steps.
        if strict {
            for &(a, b) in &covers {
                let mut stack: Vec<usize> =
                    adj[a.0].iter().copied().filter(|&w| w != b.0).collect();
                let mut seen = vec![false; n];
                for &w in &stack {
                    seen[w] = true;
                }
                while let Some(v) = stack.pop() {
                    if v == b.0 {
                        return Err(PosetError::RedundantCover(
                            names[a.0].clone(),
                            names[b.0].clone(),
                        ));
                    }
                    for &w in &adj[v] {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
        }

        // Reflexive-transitive closure along reverse topological order.
        let mut le = vec![vec![false; n]; n];
        for &v in topo.iter().rev() {
            le[v][v] = true;
            for &w in &adj[v] {
                let row_w = le[w].clone();
                let row_v = &mut le[v];
                for k in 0..n {
                    row_v[k] |= row_w[k];
                }
            }
        }

        // Longest chain ending at each node.
        let mut heights = vec![0usize; n];
        for &v in &topo {
            for &w in &adj[v] {
                heights[w] = heights[w].max(heights[v] + 1);
            }
        }

        // Components of the comparability graph = components of covers.
        let mut component_of = vec![usize::MAX; n];
        let mut components = Vec::new();
        let mut und = vec![Vec::new(); n];
        for &(a, b) in &covers {
            und[a.0].push(b.0);
            und[b.0].push(a.0);
        }
        for start in 0..n {
            if component_of[start] != usize::MAX {
                continue;
            }
            let c = components.len();
            let mut comp = Vec::new();
            let mut stack = vec![start];
            component_of[start] = c;
            while let Some(v) = stack.pop() {
                comp.push(NodeId(v));
                for &w in &und[v] {
                    if component_of[w] == usize::MAX {
                        component_of[w] = c;
                        stack.push(w);
                    }
                }
            }
            comp.sort();
            components.push(comp);
        }

        let labels = labels.unwrap_or_else(|| vec![None; n]);
        Ok(FinitePoset {
            names,
            covers,
            labels,
            le,
            heights,
            components,
            component_of,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.names.len()).map(NodeId)
    }

    pub fn name(&self, p: NodeId) -> &str {
        &self.names[p.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name).map(NodeId)
    }

    pub fn label(&self, p: NodeId) -> Option<VarSet> {
        self.labels[p.0]
    }

    pub fn covers(&self) -> &[(NodeId, NodeId)] {
        &self.covers
    }

    /// `p <= q` in the partial order.
    pub fn le(&self, p: NodeId, q: NodeId) -> bool {
        self.le[p.0][q.0]
    }

    pub fn lt(&self, p: NodeId, q: NodeId) -> bool {
        p != q && self.le(p, q)
    }

    pub fn comparable(&self, p: NodeId, q: NodeId) -> bool {
        self.le(p, q) || self.le(q, p)
    }

    /// Length of the longest chain ending at `node`.
    pub fn height(&self, node: NodeId) -> usize {
        self.heights[node.0]
    }

    /// Length of the longest chain in the whole poset (0 for empty).
    pub fn total_height(&self) -> usize {
        self.heights.iter().copied().max().unwrap_or(0)
    }

    /// The up-set `V(p) = {q : q >= p}`.
    pub fn up_set(&self, p: NodeId) -> BTreeSet<NodeId> {
        self.nodes().filter(|&q| self.le(p, q)).collect()
    }

    /// Nodes covering `p`, i.e. the minimal elements of `V(p) \ {p}`.
    pub fn covers_of(&self, p: NodeId) -> Vec<NodeId> {
        self.covers
            .iter()
            .filter(|&&(a, _)| a == p)
            .map(|&(_, b)| b)
            .collect()
    }

    pub fn minimal_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&p| self.height(p) == 0).collect()
    }

    pub fn is_up_set(&self, set: &BTreeSet<NodeId>) -> bool {
        set.iter()
            .all(|&p| self.nodes().all(|q| !self.lt(p, q) || set.contains(&q)))
    }

    pub fn is_antichain<'a, I: IntoIterator<Item = &'a NodeId>>(&self, set: I) -> bool {
        let v: Vec<NodeId> = set.into_iter().copied().collect();
        for (i, &p) in v.iter().enumerate() {
            for &q in &v[i + 1..] {
                if self.comparable(p, q) {
                    return false;
                }
            }
        }
        true
    }

    /// Partition of the nodes into connected components of the
    /// comparability graph.
    pub fn connected_components(&self) -> &[Vec<NodeId>] {
        &self.components
    }

    pub fn component_of(&self, p: NodeId) -> usize {
        self.component_of[p.0]
    }

    /// Checks that all saturated chains between any comparable pair have
    /// equal length; returns a witness pair on failure.
    pub fn is_catenary(&self) -> Result<(), CatenaryWitness> {
        let n = self.len();
        for p in 0..n {
            // longest & shortest cover-path distances from p, with parents
            let mut longest = vec![i64::MIN; n];
            let mut shortest = vec![i64::MAX; n];
            let mut par_long = vec![usize::MAX; n];
            let mut par_short = vec![usize::MAX; n];
            longest[p] = 0;
            shortest[p] = 0;
            let order: Vec<usize> = self.topo_order();
            for &v in &order {
                if longest[v] == i64::MIN {
                    continue;
                }
                for &(a, b) in &self.covers {
                    if a.0 != v {
                        continue;
                    }
                    if longest[v] + 1 > longest[b.0] {
                        longest[b.0] = longest[v] + 1;
                        par_long[b.0] = v;
                    }
                    if shortest[v] + 1 < shortest[b.0] {
                        shortest[b.0] = shortest[v] + 1;
                        par_short[b.0] = v;
                    }
                }
            }
            for q in 0..n {
                if longest[q] != i64::MIN && longest[q] != shortest[q] {
                    let chain = |parents: &[usize]| {
                        let mut c = vec![NodeId(q)];
                        let mut cur = q;
                        while cur != p {
                            cur = parents[cur];
                            c.push(NodeId(cur));
                        }
                        c.reverse();
                        c
                    };
                    return Err(CatenaryWitness {
                        lower: NodeId(p),
                        upper: NodeId(q),
                        short_chain: chain(&par_short),
                        long_chain: chain(&par_long),
                    });
                }
            }
        }
        Ok(())
    }

    fn topo_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.covers {
            indeg[b.0] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            out.push(v);
            for &(a, b) in &self.covers {
                if a.0 == v {
                    indeg[b.0] -= 1;
                    if indeg[b.0] == 0 {
                        queue.push_back(b.0);
                    }
                }
            }
        }
        out
    }

    /// Solves `values(q) = values(p) + 1` on all covers by component-wise
    /// propagation, normalizing each component's minimum to zero.
    pub fn codimension_functions(&self) -> Result<CodimFunction, NoCodimensionFunction> {
        let n = self.len();
        let mut values = vec![0i64; n];
        let mut assigned = vec![false; n];
        // undirected adjacency with increments, plus the originating cover
        let mut adj: Vec<Vec<(usize, i64, (NodeId, NodeId))>> = vec![Vec::new(); n];
        for &(a, b) in &self.covers {
            adj[a.0].push((b.0, 1, (a, b)));
            adj[b.0].push((a.0, -1, (a, b)));
        }
        for comp in &self.components {
            let root = comp[0].0;
            if assigned[root] {
                continue;
            }
            assigned[root] = true;
            values[root] = 0;
            let mut parent: Vec<Option<usize>> = vec![None; n];
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, inc, cov) in &adj[v] {
                    if !assigned[w] {
                        assigned[w] = true;
                        values[w] = values[v] + inc;
                        parent[w] = Some(v);
                        queue.push_back(w);
                    } else if values[w] != values[v] + inc {
                        // reconstruct the inconsistent cycle: tree paths from
                        // v and w to their meeting point, plus the bad cover
                        let mut cycle = vec![cov];
                        let path = |mut x: usize, parent: &[Option<usize>]| {
                            let mut nodes = vec![x];
                            while let Some(px) = parent[x] {
                                nodes.push(px);
                                x = px;
                            }
                            nodes
                        };
                        let pv = path(v, &parent);
                        let pw = path(w, &parent);
                        let meet = pv
                            .iter()
                            .find(|x| pw.contains(x))
                            .copied()
                            .unwrap_or(root);
                        let mut walk = |p: &[usize]| {
                            for pair in p.windows(2) {
                                if pair[0] == meet || pair[1] == meet && false {
                                    break;
                                }
                                let (x, y) = (pair[0], pair[1]);
                                let cov = self
                                    .covers
                                    .iter()
                                    .find(|&&(a, b)| {
                                        (a.0 == x && b.0 == y) || (a.0 == y && b.0 == x)
                                    })
                                    .copied()
                                    .unwrap();
                                cycle.push(cov);
                                if pair[1] == meet {
                                    break;
                                }
                            }
                        };
                        walk(&pv);
                        walk(&pw);
                        cycle.dedup();
                        return Err(NoCodimensionFunction { cycle });
                    }
                }
            }
            let min = comp.iter().map(|&p| values[p.0]).min().unwrap();
            for &p in comp {
                values[p.0] -= min;
            }
        }
        Ok(CodimFunction { values })
    }
}

impl CodimFunction {
    /// Verifies `values(q) = values(p) + 1` on all covers of `poset`.
    pub fn is_valid_on(&self, poset: &FinitePoset) -> bool {
        poset
            .covers()
            .iter()
            .all(|&(a, b)| self.values[b.0] == self.values[a.0] + 1)
    }
}

/// The computable window of the spectrum of a monomial quotient ring: the
/// monomial primes `(x_i : i in S)` containing the defining ideal, ordered
/// by inclusion. Labels record the variable subsets. For a polynomial ring
/// this is the full Boolean lattice of variable subsets.
pub fn spec_window(ring: &MonomialRing) -> FinitePoset {
    let n = ring.num_vars();
    let candidates: Vec<VarSet> = (0u64..(1 << n))
        .map(VarSet)
        .filter(|s| s.intersect(ring.inverted()).is_empty())
        .filter(|s| {
            ring.relations()
                .iter()
                .all(|m| m.support().intersect(*s).non_empty())
        })
        .collect();
    let names: Vec<String> = candidates.iter().map(|s| ring.prime_name(*s)).collect();
    let mut covers = Vec::new();
    for (i, s) in candidates.iter().enumerate() {
        for (j, t) in candidates.iter().enumerate() {
            if s.is_subset(*t) && t.len() == s.len() + 1 {
                covers.push((NodeId(i), NodeId(j)));
            }
        }
    }
    let labels = candidates.iter().map(|&s| Some(s)).collect();
    FinitePoset::from_ids(names, covers, Some(labels))
        .expect("window poset is a sub-lattice of a Boolean lattice")
}
