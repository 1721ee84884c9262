//! Rooted class hierarchy with derived per-node quantities.
//!
//! Nodes are identified by their index in construction order. The tree is
//! immutable after construction, so a `Hierarchy` can be shared freely across
//! threads. Information content is measured in nats:
//! `info(y) = ln |L| - ln |L(y)|`, where `L(y)` is the set of leaves under
//! `y`, so the root carries zero information and every leaf carries `ln |L|`.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::util::check_len;

#[derive(Debug, Clone)]
pub struct Hierarchy {
    names: Vec<String>,
    name_index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    leaf_count: Vec<usize>,
    info: Vec<f64>,
    /// Leaf node indices in ascending order; fixes the layout of leaf-indexed
    /// parameter vectors.
    leaves: Vec<usize>,
    /// Breadth-first order from the root: parents always precede children.
    topo: Vec<usize>,
    /// Node index -> position among leaves (ascending), if the node is a leaf.
    leaf_pos: Vec<Option<usize>>,
    /// Node index -> position among non-root nodes (ascending index order).
    nonroot_pos: Vec<Option<usize>>,
    root: usize,
    max_depth: usize,
    unary_allowed: bool,
}

impl Hierarchy {
    /// Builds a hierarchy from `(child-name, parent-name)` rows.
    ///
    /// Exactly one row must have no parent: the root. Node indices follow row
    /// order and children lists are ordered by child index. Unless
    /// `allow_unary_chains` is set, an internal node with a single child is
    /// rejected, which keeps information content strictly increasing along
    /// every edge.
    pub fn from_edges<S: AsRef<str>>(
        edges: &[(S, Option<S>)],
        allow_unary_chains: bool,
    ) -> Result<Self> {
        let n = edges.len();
        let mut names = Vec::with_capacity(n);
        let mut name_index = HashMap::with_capacity(n);
        for (name, _) in edges {
            let name = name.as_ref().to_owned();
            if name_index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::DuplicateName(name));
            }
            names.push(name);
        }

        let mut root = None;
        let mut parent = vec![None; n];
        for (i, (_, p)) in edges.iter().enumerate() {
            match p {
                None => match root {
                    None => root = Some(i),
                    Some(r) => {
                        return Err(Error::MultipleRoots(names[r].clone(), names[i].clone()))
                    }
                },
                Some(p) => {
                    let p = p.as_ref();
                    let pi = *name_index.get(p).ok_or_else(|| Error::UnknownParent {
                        child: names[i].clone(),
                        parent: p.to_owned(),
                    })?;
                    parent[i] = Some(pi);
                }
            }
        }
        let root = root.ok_or(Error::NoRoot)?;

        let mut children = vec![Vec::new(); n];
        for i in 0..n {
            if let Some(p) = parent[i] {
                children[p].push(i);
            }
        }

        // Breadth-first traversal doubles as the cycle check: nodes whose
        // parent chain does not reach the root are never visited.
        let mut depth = vec![0usize; n];
        let mut topo = Vec::with_capacity(n);
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(y) = queue.pop_front() {
            topo.push(y);
            for &c in &children[y] {
                depth[c] = depth[y] + 1;
                queue.push_back(c);
            }
        }
        if topo.len() != n {
            let seen: std::collections::HashSet<usize> = topo.iter().copied().collect();
            let missing = (0..n).find(|i| !seen.contains(i)).unwrap();
            return Err(Error::Cycle(names[missing].clone()));
        }

        if !allow_unary_chains {
            if let Some(y) = (0..n).find(|&y| children[y].len() == 1) {
                return Err(Error::UnaryChain(names[y].clone()));
            }
        }

        let mut leaf_count = vec![0usize; n];
        for &y in topo.iter().rev() {
            if children[y].is_empty() {
                leaf_count[y] = 1;
            } else {
                leaf_count[y] = children[y].iter().map(|&c| leaf_count[c]).sum();
            }
        }

        let total = leaf_count[root] as f64;
        let info: Vec<f64> = leaf_count
            .iter()
            .map(|&c| total.ln() - (c as f64).ln())
            .collect();

        let leaves: Vec<usize> = (0..n).filter(|&y| children[y].is_empty()).collect();
        let mut leaf_pos = vec![None; n];
        for (k, &y) in leaves.iter().enumerate() {
            leaf_pos[y] = Some(k);
        }
        let mut nonroot_pos = vec![None; n];
        let mut k = 0;
        for y in 0..n {
            if y != root {
                nonroot_pos[y] = Some(k);
                k += 1;
            }
        }
        let max_depth = depth.iter().copied().max().unwrap_or(0);

        Ok(Self {
            names,
            name_index,
            parent,
            children,
            depth,
            leaf_count,
            info,
            leaves,
            topo,
            leaf_pos,
            nonroot_pos,
            root,
            max_depth,
            unary_allowed: allow_unary_chains,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn unary_allowed(&self) -> bool {
        self.unary_allowed
    }

    pub fn name(&self, y: usize) -> &str {
        &self.names[y]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn parent(&self, y: usize) -> Option<usize> {
        self.parent[y]
    }

    pub fn children(&self, y: usize) -> &[usize] {
        &self.children[y]
    }

    pub fn depth(&self, y: usize) -> usize {
        self.depth[y]
    }

    pub fn leaf_count(&self, y: usize) -> usize {
        self.leaf_count[y]
    }

    pub fn info(&self, y: usize) -> f64 {
        self.info[y]
    }

    pub fn info_all(&self) -> &[f64] {
        &self.info
    }

    pub fn is_leaf(&self, y: usize) -> bool {
        self.children[y].is_empty()
    }

    /// Leaf node indices in ascending order.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    /// Position of leaf `y` within the ascending leaf layout.
    pub fn leaf_position(&self, y: usize) -> Option<usize> {
        self.leaf_pos[y]
    }

    /// Position of non-root node `y` within the ascending non-root layout.
    pub fn nonroot_position(&self, y: usize) -> Option<usize> {
        self.nonroot_pos[y]
    }

    /// Breadth-first order from the root; parents precede children.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn check_node(&self, y: usize) -> Result<()> {
        if y >= self.num_nodes() {
            return Err(Error::NodeOutOfRange {
                index: y,
                num_nodes: self.num_nodes(),
            });
        }
        Ok(())
    }

    /// True iff `u` is an (inclusive) ancestor of `v`.
    pub fn is_ancestor(&self, u: usize, v: usize) -> bool {
        let mut v = v;
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap();
        }
        v == u
    }

    /// Ancestor path of `y` ordered from the root down to `y` (inclusive).
    pub fn path_from_root(&self, y: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.depth[y] + 1);
        let mut cur = Some(y);
        while let Some(u) = cur {
            path.push(u);
            cur = self.parent[u];
        }
        path.reverse();
        path
    }

    /// Inclusive ancestor set of `y`, ascending by index.
    pub fn ancestors(&self, y: usize) -> Result<Vec<usize>> {
        self.check_node(y)?;
        let mut a = self.path_from_root(y);
        a.sort_unstable();
        Ok(a)
    }

    /// Inclusive descendant set of `y`, ascending by index.
    pub fn descendants(&self, y: usize) -> Result<Vec<usize>> {
        self.check_node(y)?;
        let mut out = Vec::with_capacity(self.leaf_count[y]);
        let mut stack = vec![y];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend_from_slice(&self.children[u]);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Leaves under `y`, ascending by index.
    pub fn leaves_under(&self, y: usize) -> Result<Vec<usize>> {
        Ok(self
            .descendants(y)?
            .into_iter()
            .filter(|&u| self.is_leaf(u))
            .collect())
    }

    /// Children of the parent of `y`; the root is its own only sibling.
    pub fn siblings(&self, y: usize) -> Result<Vec<usize>> {
        self.check_node(y)?;
        Ok(match self.parent[y] {
            Some(p) => self.children[p].clone(),
            None => vec![y],
        })
    }

    /// Lowest common ancestor via depth-equalising parent walks.
    pub fn lca(&self, u: usize, v: usize) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        let (mut u, mut v) = (u, v);
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].unwrap();
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap();
        }
        while u != v {
            u = self.parent[u].unwrap();
            v = self.parent[v].unwrap();
        }
        Ok(u)
    }

    /// `out[y] = sum of x over the inclusive descendants of y`, in O(|Y|).
    pub fn sum_over_descendants(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x, self.num_nodes())?;
        let mut out = x.to_vec();
        for &y in self.topo.iter().rev() {
            if let Some(p) = self.parent[y] {
                out[p] += out[y];
            }
        }
        Ok(out)
    }

    /// `out[y] = sum of x over the inclusive ancestors of y`, in O(|Y|).
    pub fn sum_over_ancestors(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x, self.num_nodes())?;
        let mut out = x.to_vec();
        for &y in self.topo.iter() {
            if let Some(p) = self.parent[y] {
                out[y] += out[p];
            }
        }
        Ok(out)
    }

    /// Samples an antichain covering all leaves by top-down truncation.
    ///
    /// Walking down from the root, each internal node below the root is
    /// truncated (emitted) with probability `p_cut`, otherwise the walk
    /// recurses; leaves are always emitted. The root itself is never a
    /// member of the cut unless it is the only node.
    pub fn random_cut(&self, p_cut: f64, seed: u64) -> Result<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.random_cut_with(p_cut, &mut rng)
    }

    /// As [`Hierarchy::random_cut`] but drawing from a caller-owned stream.
    /// Bernoulli draws happen in depth-first preorder with children visited
    /// in ascending index order.
    pub fn random_cut_with<R: Rng + ?Sized>(&self, p_cut: f64, rng: &mut R) -> Result<Vec<usize>> {
        if !(0.0..=1.0).contains(&p_cut) {
            return Err(Error::InvalidHyperParameter(format!(
                "p_cut must lie in [0, 1], got {p_cut}"
            )));
        }
        if self.is_leaf(self.root) {
            return Ok(vec![self.root]);
        }
        let mut cut = Vec::new();
        let mut stack = vec![self.root];
        while let Some(y) = stack.pop() {
            // Reverse push so children are visited in ascending order.
            for &c in self.children[y].iter().rev() {
                if self.is_leaf(c) {
                    cut.push(c);
                } else if rng.random_bool(p_cut) {
                    cut.push(c);
                } else {
                    stack.push(c);
                }
            }
        }
        cut.sort_unstable();
        Ok(cut)
    }
}

/// Deepest ancestor of `y` (by name) that exists in `sub`.
///
/// `sub`'s node names must be a subset of `full`'s, closed under ancestors;
/// the shared root guarantees the walk terminates.
pub fn project_to_subtree(full: &Hierarchy, sub: &Hierarchy, y: usize) -> Result<usize> {
    full.check_node(y)?;
    let mut cur = y;
    loop {
        if let Some(s) = sub.index_of(full.name(cur)) {
            return Ok(s);
        }
        match full.parent(cur) {
            Some(p) => cur = p,
            None => return Err(Error::NoSharedAncestor(y)),
        }
    }
}

/// Precomputed projection of every node of `full` onto `sub`.
#[derive(Debug, Clone)]
pub struct SubtreeProjection {
    map: Vec<usize>,
}

impl SubtreeProjection {
    pub fn new(full: &Hierarchy, sub: &Hierarchy) -> Result<Self> {
        let mut map = vec![usize::MAX; full.num_nodes()];
        for &y in full.topological_order() {
            map[y] = match sub.index_of(full.name(y)) {
                Some(s) => s,
                None => match full.parent(y) {
                    Some(p) => map[p],
                    None => return Err(Error::NoSharedAncestor(y)),
                },
            };
        }
        Ok(Self { map })
    }

    pub fn project(&self, y: usize) -> usize {
        self.map[y]
    }
}

/// Sub-hierarchy keeping only nodes at depth `<= level`, preserving names
/// and relative node order.
pub fn truncate_at_depth(h: &Hierarchy, level: usize) -> Result<Hierarchy> {
    let edges: Vec<(String, Option<String>)> = (0..h.num_nodes())
        .filter(|&y| h.depth(y) <= level)
        .map(|y| {
            (
                h.name(y).to_owned(),
                h.parent(y).map(|p| h.name(p).to_owned()),
            )
        })
        .collect();
    Hierarchy::from_edges(&edges, h.unary_allowed())
}

/// Canonical five-node test fixture: root -> {a, b}, a -> {a1, a2}.
/// Node indices: 0=root, 1=a, 2=b, 3=a1, 4=a2; leaves {2, 3, 4}.
#[cfg(test)]
pub(crate) fn t1() -> Hierarchy {
    Hierarchy::from_edges(
        &[
            ("root", None),
            ("a", Some("root")),
            ("b", Some("root")),
            ("a1", Some("a")),
            ("a2", Some("a")),
        ],
        false,
    )
    .unwrap()
}
