//! Undirected simple graphs and the topology measurements used by the
//! experiments: BFS hop distances, diameter, clustering coefficient and
//! connected components.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};

/// Hop distance reported by [`bfs_distances`] for vertices outside the
/// source's component.
pub const UNREACHABLE: u32 = u32::MAX;

/// Undirected simple graph over dense vertex ids `0..n`.
///
/// Stored in compressed sparse row form; every adjacency list is sorted,
/// which fixes iteration order for everything downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
        }
    }

    /// Builds a graph from per-vertex neighbor lists, checking simplicity
    /// and symmetry. Lists need not be sorted.
    pub fn from_adjacency(mut adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let n = adjacency.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidGraph(format!(
                        "duplicate edge {i}-{}",
                        w[0]
                    )));
                }
            }
            if let Some(&last) = list.last() {
                if last >= n {
                    return Err(Error::VertexOutOfRange { id: last, n });
                }
            }
            if list.binary_search(&i).is_ok() {
                return Err(Error::InvalidGraph(format!("self-loop at {i}")));
            }
            offsets.push(offsets[i] + list.len());
        }
        let neighbors: Vec<usize> = adjacency.into_iter().flatten().collect();
        let g = Graph { offsets, neighbors };
        for u in 0..n {
            for &v in g.neighbors(u) {
                if !g.has_edge(v, u) {
                    return Err(Error::InvalidGraph(format!(
                        "asymmetric adjacency: {u}->{v} without {v}->{u}"
                    )));
                }
            }
        }
        Ok(g)
    }

    /// Builds a graph from an undirected edge list. Each edge must appear
    /// once, in either orientation.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::VertexOutOfRange { id, n });
                }
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self::from_adjacency(adjacency)
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Subgraph induced by `vertices`; vertex `i` of the result is
    /// `vertices[i]` of `self`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let adjacency = vertices
            .iter()
            .map(|&v| {
                self.neighbors(v)
                    .iter()
                    .filter_map(|&w| (local[w] != usize::MAX).then_some(local[w]))
                    .collect()
            })
            .collect();
        Graph::from_adjacency(adjacency).expect("induced subgraph of a simple graph is simple")
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || largest_component(self).len() == self.vertex_count()
    }
}

/// Hop distances from `source`; [`UNREACHABLE`] outside its component.
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.vertex_count()];
    let mut queue = VecDeque::new();
    bfs_into(g, source, &mut dist, &mut queue);
    dist
}

fn bfs_into(g: &Graph, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    dist.fill(UNREACHABLE);
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
}

/// Connected components, each sorted ascending, ordered by smallest member.
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        let mut members = Vec::new();
        seen[root] = true;
        stack.push(root);
        while let Some(u) = stack.pop() {
            members.push(u);
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Vertex set of a largest connected component (sorted). Ties go to the
/// component holding the smallest vertex id.
pub fn largest_component(g: &Graph) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for c in connected_components(g) {
        // components arrive ordered by smallest member, so strict `>` keeps
        // the earliest on ties
        if c.len() > best.len() {
            best = c;
        }
    }
    best
}

/// Maximum eccentricity within the largest connected component, by
/// all-pairs BFS. A disconnected input is measured on its largest
/// component and logged.
pub fn diameter(g: &Graph) -> Result<u32> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::param(format!(
            "diameter needs at least 2 vertices, got {n}"
        )));
    }
    let components = connected_components(g);
    if components.len() > 1 {
        log::warn!(
            "graph has {} components; diameter taken over the largest",
            components.len()
        );
    }
    let component = largest_component(g);
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    let mut best = 0;
    for &s in &component {
        bfs_into(g, s, &mut dist, &mut queue);
        for &v in &component {
            best = best.max(dist[v]);
        }
    }
    Ok(best)
}

/// Average local clustering coefficient. Vertices of degree < 2 count as 0.
pub fn clustering_coefficient(g: &Graph) -> f64 {
    let n = g.vertex_count();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = (0..n).map(|v| local_clustering(g, v)).sum();
    total / n as f64
}

/// Fraction of neighbor pairs of `v` that are adjacent.
pub fn local_clustering(g: &Graph, v: usize) -> f64 {
    let nbrs = g.neighbors(v);
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (a, &u) in nbrs.iter().enumerate() {
        // count w in nbrs[a+1..] adjacent to u, by merging two sorted lists
        let rest = &nbrs[a + 1..];
        let un = g.neighbors(u);
        let (mut i, mut j) = (0, 0);
        while i < rest.len() && j < un.len() {
            match rest[i].cmp(&un[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    links += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    links as f64 / (d * (d - 1) / 2) as f64
}

/// Histogram of shortest-path hop counts over a set of vertex pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathLengthDistribution {
    pub histogram: BTreeMap<u32, u64>,
    pub total: u64,
    /// Pairs with no connecting path; not part of `histogram`.
    pub unreachable: u64,
}

impl PathLengthDistribution {
    pub fn record(&mut self, hops: u32) {
        if hops == UNREACHABLE {
            self.unreachable += 1;
        } else {
            *self.histogram.entry(hops).or_insert(0) += 1;
            self.total += 1;
        }
    }

    pub fn merge(&mut self, other: &PathLengthDistribution) {
        for (&l, &c) in &other.histogram {
            *self.histogram.entry(l).or_insert(0) += c;
        }
        self.total += other.total;
        self.unreachable += other.unreachable;
    }

    pub fn count(&self, hops: u32) -> u64 {
        self.histogram.get(&hops).copied().unwrap_or(0)
    }

    /// Cumulative fraction of recorded pairs with length <= `hops`.
    pub fn cdf(&self, hops: u32) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let below: u64 = self.histogram.range(..=hops).map(|(_, c)| c).sum();
        below as f64 / self.total as f64
    }
}

/// BFS distances for the given `(source, target)` pairs, binned by length.
pub fn shortest_path_distribution(
    g: &Graph,
    pairs: &[(usize, usize)],
) -> Result<PathLengthDistribution> {
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    for &(s, t) in pairs {
        for id in [s, t] {
            if id >= n {
                return Err(Error::VertexOutOfRange { id, n });
            }
        }
        if s == t {
            return Err(Error::param(format!("pair ({s},{t}) has source = target")));
        }
    }
    // one BFS per distinct source
    order.sort_by_key(|&i| pairs[i].0);
    let mut out = PathLengthDistribution::default();
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    let mut current = usize::MAX;
    for i in order {
        let (s, t) = pairs[i];
        if s != current {
            bfs_into(g, s, &mut dist, &mut queue);
            current = s;
        }
        out.record(dist[t]);
    }
    Ok(out)
}

/// Dense all-pairs hop-distance table, for repeated lookups on desk-scale
/// graphs.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceTable {
    pub fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            bfs_into(g, s, &mut dist[s * n..(s + 1) * n], &mut queue);
        }
        DistanceTable { n, dist }
    }

    #[inline]
    pub fn get(&self, s: usize, t: usize) -> u32 {
        self.dist[s * self.n + t]
    }

    /// Largest finite distance among pairs inside `vertices`.
    pub fn max_within(&self, vertices: &[usize]) -> u32 {
        let mut best = 0;
        for &s in vertices {
            for &t in vertices {
                let d = self.get(s, t);
                if d != UNREACHABLE {
                    best = best.max(d);
                }
            }
        }
        best
    }
}
