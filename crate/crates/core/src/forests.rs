//! Admissible forest graphs over cluster points and external points:
//! representation, the admissibility clauses, exhaustive enumeration, and
//! per-forest analytic contributions.
//!
//! Vertices are numbered globally: first all cluster points (clusters in
//! order, points in canonical order inside each cluster), then the external
//! points. Enumeration mirrors the kernel recursion: the lowest vertex of
//! the current first cluster fans out to a subset of the remaining external
//! points and to a sub-configuration meeting every absorbed cluster, and the
//! absorbed vertices join the first cluster.

use serde::{Deserialize, Serialize};

use crate::configurations::{ClusterFamily, PointConfiguration};
use crate::error::{Error, Result};

/// Origin of a forest vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "origin")]
pub enum VertexTag {
    Cluster { cluster: usize, index: usize },
    External { index: usize },
}

/// A graph over the vertices of a cluster family plus external points.
/// Construction validates structure only; admissibility is a separate check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestGraph {
    sizes: Vec<usize>,
    n_external: usize,
    /// Sorted list of (low, high) vertex pairs.
    edges: Vec<(usize, usize)>,
}

impl ForestGraph {
    pub fn new(sizes: Vec<usize>, n_external: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if sizes.is_empty() || sizes.iter().any(|&l| l == 0) {
            return Err(Error::Domain("cluster sizes must be positive".into()));
        }
        let v = sizes.iter().sum::<usize>() + n_external;
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return Err(Error::Structural(format!("self-loop at vertex {}", e.0)));
            }
            if e.0 >= v || e.1 >= v {
                return Err(Error::Structural(format!(
                    "edge ({}, {}) references an unregistered vertex (only {v} exist)",
                    e.0, e.1
                )));
            }
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Structural("duplicate edge".into()));
        }
        Ok(ForestGraph { sizes, n_external, edges })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_external(&self) -> usize {
        self.n_external
    }

    pub fn vertex_count(&self) -> usize {
        self.sizes.iter().sum::<usize>() + self.n_external
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Cluster index of a vertex, or `None` for an external vertex.
    pub fn cluster_of(&self, v: usize) -> Option<usize> {
        let mut offset = 0;
        for (i, &l) in self.sizes.iter().enumerate() {
            if v < offset + l {
                return Some(i);
            }
            offset += l;
        }
        None
    }

    pub fn tag_of(&self, v: usize) -> VertexTag {
        let mut offset = 0;
        for (i, &l) in self.sizes.iter().enumerate() {
            if v < offset + l {
                return VertexTag::Cluster { cluster: i, index: v - offset };
            }
            offset += l;
        }
        VertexTag::External { index: v - offset }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let v = self.vertex_count();
        let adj = self.adjacency();
        let mut seen = vec![false; v];
        let mut out = Vec::new();
        for s in 0..v {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// First admissibility clause violated by a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A connected component contains a cycle.
    Cycle,
    /// An edge joins two vertices of the same cluster.
    IntraClusterEdge { edge: (usize, usize) },
    /// A component contains no cluster point.
    TreeWithoutClusterPoint { component: Vec<usize> },
    /// The lowest cluster represented in a component has more than one point
    /// in it.
    RootNotUnique { component: Vec<usize>, cluster: usize },
    /// A parent vertex on a root-to-leaf path is not the only point of its
    /// cluster connected to the child's cluster (or external point).
    PathCondition { parent: usize, child: usize },
    /// Collapsing each cluster to one vertex does not leave a single
    /// connected tree.
    CollapseNotTree,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Cycle => write!(f, "graph contains a cycle"),
            Violation::IntraClusterEdge { edge } => {
                write!(f, "edge ({}, {}) joins vertices of the same cluster", edge.0, edge.1)
            }
            Violation::TreeWithoutClusterPoint { component } => {
                write!(f, "component {component:?} contains no cluster point")
            }
            Violation::RootNotUnique { component, cluster } => write!(
                f,
                "component {component:?} has several points of its lowest cluster {cluster}"
            ),
            Violation::PathCondition { parent, child } => write!(
                f,
                "vertex {parent} is not the only point of its cluster linked to the target of {child}"
            ),
            Violation::CollapseNotTree => {
                write!(f, "collapsing clusters does not give a connected tree")
            }
        }
    }
}

/// Check the admissibility clauses in order and return the first violated
/// one, or `None` if the forest is admissible.
pub fn admissibility_violation(f: &ForestGraph) -> Option<Violation> {
    let comps = f.components();
    // acyclic: every component has |edges| = |vertices| - 1
    let total_edges = f.edges().len();
    let tree_edge_total: usize = comps.iter().map(|c| c.len() - 1).sum();
    if total_edges != tree_edge_total {
        return Some(Violation::Cycle);
    }
    for &(a, b) in f.edges() {
        if let (Some(i), Some(j)) = (f.cluster_of(a), f.cluster_of(b)) {
            if i == j {
                return Some(Violation::IntraClusterEdge { edge: (a, b) });
            }
        }
    }
    // root clause per component
    let mut roots = Vec::with_capacity(comps.len());
    for comp in &comps {
        let clusters: Vec<(usize, usize)> = comp
            .iter()
            .filter_map(|&v| f.cluster_of(v).map(|c| (c, v)))
            .collect();
        if clusters.is_empty() {
            return Some(Violation::TreeWithoutClusterPoint { component: comp.clone() });
        }
        let lowest = clusters.iter().map(|&(c, _)| c).min().unwrap();
        let in_lowest: Vec<usize> = clusters
            .iter()
            .filter(|&&(c, _)| c == lowest)
            .map(|&(_, v)| v)
            .collect();
        if in_lowest.len() != 1 {
            return Some(Violation::RootNotUnique { component: comp.clone(), cluster: lowest });
        }
        roots.push(in_lowest[0]);
    }
    // path condition: orient each tree away from its root and check every
    // parent-child pair whose parent is a cluster point
    let adj = f.adjacency();
    for &root in &roots {
        let mut parent = vec![usize::MAX; f.vertex_count()];
        let mut stack = vec![root];
        parent[root] = root;
        let mut order = Vec::new();
        while let Some(u) = stack.pop() {
            order.push(u);
            for &w in &adj[u] {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    stack.push(w);
                }
            }
        }
        for &c in &order {
            if c == root {
                continue;
            }
            let p = parent[c];
            let Some(pc) = f.cluster_of(p) else { continue };
            match f.cluster_of(c) {
                Some(cc) => {
                    // p must be the only point of its cluster joined to any
                    // point of c's cluster, anywhere in the forest
                    for &(a, b) in f.edges() {
                        let pair = (f.cluster_of(a), f.cluster_of(b));
                        let bad = match pair {
                            (Some(i), Some(j)) if i == pc && j == cc => a != p,
                            (Some(i), Some(j)) if j == pc && i == cc => b != p,
                            _ => false,
                        };
                        if bad {
                            return Some(Violation::PathCondition { parent: p, child: c });
                        }
                    }
                }
                None => {
                    // p must be the only point of its cluster joined to the
                    // external vertex c
                    for &(a, b) in f.edges() {
                        let bad = (b == c && f.cluster_of(a) == Some(pc) && a != p)
                            || (a == c && f.cluster_of(b) == Some(pc) && b != p);
                        if bad {
                            return Some(Violation::PathCondition { parent: p, child: c });
                        }
                    }
                }
            }
        }
    }
    // collapse clause: clusters identified, parallel edges merged, result
    // must be one tree on m + n vertices
    let m = f.sizes().len();
    let n = f.n_external();
    let super_of = |v: usize| match f.tag_of(v) {
        VertexTag::Cluster { cluster, .. } => cluster,
        VertexTag::External { index } => m + index,
    };
    let mut collapsed: Vec<(usize, usize)> = f
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (super_of(a), super_of(b));
            (x.min(y), x.max(y))
        })
        .collect();
    collapsed.sort_unstable();
    collapsed.dedup();
    if collapsed.len() != m + n - 1 {
        return Some(Violation::CollapseNotTree);
    }
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            p[x] = find(p, p[x]);
        }
        p[x]
    }
    for &(a, b) in &collapsed {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return Some(Violation::CollapseNotTree);
        }
        parent[ra] = rb;
    }
    None
}

pub fn is_admissible(f: &ForestGraph) -> bool {
    admissibility_violation(f).is_none()
}

/// Roots of an admissible forest: one vertex per component, the unique
/// point of the lowest cluster represented in it.
pub fn roots(f: &ForestGraph) -> Result<Vec<usize>> {
    if let Some(v) = admissibility_violation(f) {
        return Err(Error::Domain(format!("forest is not admissible: {v}")));
    }
    let mut out = Vec::new();
    for comp in f.components() {
        let lowest = comp.iter().filter_map(|&v| f.cluster_of(v)).min().unwrap();
        out.push(*comp.iter().find(|&&v| f.cluster_of(v) == Some(lowest)).unwrap());
    }
    out.sort_unstable();
    Ok(out)
}

struct Walker<'a> {
    cluster_masks: Vec<u32>,
    edges: Vec<(usize, usize)>,
    visitor: &'a mut dyn FnMut(&[(usize, usize)]),
}

impl Walker<'_> {
    /// `first`: vertex mask of the current merged first cluster;
    /// `rest`: indices into `cluster_masks` of untouched clusters;
    /// `gamma`: mask of the remaining external vertices.
    fn rec(&mut self, first: u32, rest: &[usize], gamma: u32) {
        if first == 0 {
            if rest.is_empty() && gamma == 0 {
                (self.visitor)(&self.edges);
            }
            return;
        }
        let x1 = first.trailing_zeros() as usize;
        let first_rem = first & !(1u32 << x1);
        // xi runs over subsets of gamma (descending, ending at 0)
        let mut xi = gamma;
        loop {
            for imask in 0..(1u32 << rest.len()) {
                let picked: Vec<usize> = (0..rest.len())
                    .filter(|&j| imask >> j & 1 == 1)
                    .map(|j| rest[j])
                    .collect();
                let sub_rest: Vec<usize> = (0..rest.len())
                    .filter(|&j| imask >> j & 1 == 0)
                    .map(|j| rest[j])
                    .collect();
                self.pick_eta(x1, first_rem, &picked, 0, 0, &sub_rest, xi, gamma);
            }
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & gamma;
        }
    }

    /// Choose a nonempty subset of each cluster in `picked` (the asterisk
    /// constraint), then branch on the assembled neighborhood.
    #[allow(clippy::too_many_arguments)]
    fn pick_eta(
        &mut self,
        x1: usize,
        first_rem: u32,
        picked: &[usize],
        pi: usize,
        eta: u32,
        sub_rest: &[usize],
        xi: u32,
        gamma: u32,
    ) {
        if pi == picked.len() {
            let neighbors = eta | xi;
            let before = self.edges.len();
            let mut nb = neighbors;
            while nb != 0 {
                let y = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                self.edges.push((x1.min(y), x1.max(y)));
            }
            let full_i: u32 = picked.iter().map(|&i| self.cluster_masks[i]).fold(0, |a, b| a | b);
            self.rec(first_rem | full_i | xi, sub_rest, gamma & !xi);
            self.edges.truncate(before);
            return;
        }
        let cm = self.cluster_masks[picked[pi]];
        let mut s = cm;
        loop {
            // nonempty subsets only
            self.pick_eta(x1, first_rem, picked, pi + 1, eta | s, sub_rest, xi, gamma);
            s = (s - 1) & cm;
            if s == 0 {
                break;
            }
        }
    }
}

fn check_cap(sizes: &[usize], n_external: usize, cap: usize) -> Result<()> {
    if sizes.is_empty() || sizes.iter().any(|&l| l == 0) {
        return Err(Error::Domain("cluster sizes must be positive".into()));
    }
    let v = sizes.iter().sum::<usize>() + n_external;
    if v > cap {
        return Err(Error::Resource(format!(
            "instance has {v} vertices, above the cap of {cap}"
        )));
    }
    if cap > 20 {
        return Err(Error::Resource(format!("vertex cap {cap} above the hard limit of 20")));
    }
    Ok(())
}

/// Walk every admissible forest once, passing its edge list to `visitor`.
pub fn walk_forests(
    sizes: &[usize],
    n_external: usize,
    cap: usize,
    visitor: &mut dyn FnMut(&[(usize, usize)]),
) -> Result<()> {
    check_cap(sizes, n_external, cap)?;
    let mut cluster_masks = Vec::with_capacity(sizes.len());
    let mut offset = 0usize;
    for &l in sizes {
        let mask = ((1u32 << l) - 1) << offset;
        cluster_masks.push(mask);
        offset += l;
    }
    let gamma = if n_external == 0 {
        0
    } else {
        ((1u32 << n_external) - 1) << offset
    };
    let first = cluster_masks[0];
    let rest: Vec<usize> = (1..sizes.len()).collect();
    let mut walker = Walker { cluster_masks, edges: Vec::new(), visitor };
    walker.rec(first, &rest, gamma);
    Ok(())
}

/// Number of admissible forests, by enumeration.
pub fn count_forests(sizes: &[usize], n_external: usize, cap: usize) -> Result<u64> {
    let mut count = 0u64;
    walk_forests(sizes, n_external, cap, &mut |_| count += 1)?;
    Ok(count)
}

/// All admissible forests, materialized and sorted by edge list.
pub fn enumerate_forests(sizes: &[usize], n_external: usize, cap: usize) -> Result<Vec<ForestGraph>> {
    let mut out = Vec::new();
    walk_forests(sizes, n_external, cap, &mut |edges| {
        out.push(
            ForestGraph::new(sizes.to_vec(), n_external, edges.to_vec())
                .expect("builder emits structurally valid graphs"),
        );
    })?;
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(out)
}

/// Analytic contribution of a forest: `h^(number of vertices)` times the
/// product of `nu` over its edges, with vertex coordinates supplied in
/// global vertex order.
pub fn contribution_g_nu(
    f: &ForestGraph,
    positions: &[Vec<f64>],
    h: f64,
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    if positions.len() != f.vertex_count() {
        return Err(Error::Domain(format!(
            "{} positions supplied for {} vertices",
            positions.len(),
            f.vertex_count()
        )));
    }
    let mut acc = h.powi(f.vertex_count() as i32);
    for &(a, b) in f.edges() {
        acc *= nu(&positions[a], &positions[b]);
    }
    Ok(acc)
}

/// Positions of all vertices of a (family, gamma) instance in global vertex
/// order.
pub fn instance_positions(family: &ClusterFamily, gamma: &PointConfiguration) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for c in family.clusters() {
        out.extend(c.points().iter().cloned());
    }
    out.extend(gamma.points().iter().cloned());
    out
}

/// Sum of analytic contributions over all admissible forests of the
/// instance.
pub fn sum_contributions(
    family: &ClusterFamily,
    gamma: &PointConfiguration,
    h: f64,
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
    cap: usize,
) -> Result<f64> {
    let sizes = family.sizes();
    let positions = instance_positions(family, gamma);
    let mut total = 0.0;
    let n = gamma.len();
    walk_forests(&sizes, n, cap, &mut |edges| {
        let mut term = h.powi(positions.len() as i32);
        for &(a, b) in edges {
            term *= nu(&positions[a], &positions[b]);
        }
        total += term;
    })?;
    Ok(total)
}
