//! Greedy routing over embedded coordinates.
//!
//! A message is forwarded to the unvisited neighbor closest (Euclidean) to
//! the target's coordinates. It carries the list of vertices it has
//! visited and fails once every neighbor of the current vertex is on it.

use rand::Rng as _;

use crate::embedding::{squared_distance, Coordinates};
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, DistanceTable, Graph, UNREACHABLE};
use crate::seeds::{Rng, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    ReachedTarget,
    AllNeighborsVisited,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ReachedTarget => "reached_target",
            Termination::AllNeighborsVisited => "all_neighbors_visited",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteResult {
    pub source: usize,
    pub target: usize,
    pub success: bool,
    /// Vertices traversed, starting at `source`.
    pub hops: Vec<usize>,
    /// BFS hop distance from source to target.
    pub shortest_length: u32,
    pub termination: Termination,
}

impl RouteResult {
    pub fn path_length(&self) -> usize {
        self.hops.len() - 1
    }

    /// `path_length / shortest_length` for delivered messages.
    pub fn stretch(&self) -> Option<f64> {
        self.success
            .then(|| self.path_length() as f64 / self.shortest_length as f64)
    }
}

/// Reusable visited-set storage; generation stamps avoid clearing per route.
#[derive(Debug, Clone)]
pub struct Router {
    stamp: Vec<u32>,
    generation: u32,
    ties: Vec<usize>,
}

impl Router {
    pub fn new(n: usize) -> Self {
        Router {
            stamp: vec![0; n],
            generation: 0,
            ties: Vec::new(),
        }
    }

    fn next_generation(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
    }

    /// Routes one message; `shortest_length` is the known BFS distance.
    pub fn route(
        &mut self,
        g: &Graph,
        coords: &Coordinates,
        source: usize,
        target: usize,
        shortest_length: u32,
        rng: &mut Rng,
    ) -> Result<RouteResult> {
        let n = g.vertex_count();
        check_endpoints(n, source, target)?;
        if coords.len() != n {
            return Err(Error::param(format!(
                "coordinates have {} rows, graph has {n} vertices",
                coords.len()
            )));
        }
        if self.stamp.len() != n {
            *self = Router::new(n);
        }
        self.next_generation();
        let goal = coords.row(target);
        let mut hops = vec![source];
        self.stamp[source] = self.generation;
        let mut current = source;
        let termination = loop {
            if current == target {
                break Termination::ReachedTarget;
            }
            let nbrs = g.neighbors(current);
            // the target is at distance zero from itself; deliver even when
            // another vertex shares its coordinates
            if nbrs.binary_search(&target).is_ok() {
                hops.push(target);
                current = target;
                continue;
            }
            let mut best = f64::INFINITY;
            self.ties.clear();
            for &w in nbrs {
                if self.stamp[w] == self.generation {
                    continue;
                }
                let d = squared_distance(coords.row(w), goal);
                if d < best {
                    best = d;
                    self.ties.clear();
                    self.ties.push(w);
                } else if d == best {
                    self.ties.push(w);
                }
            }
            let next = match self.ties.len() {
                0 => break Termination::AllNeighborsVisited,
                1 => self.ties[0],
                k => self.ties[rng.gen_range(0..k)],
            };
            self.stamp[next] = self.generation;
            hops.push(next);
            current = next;
        };
        Ok(RouteResult {
            source,
            target,
            success: termination == Termination::ReachedTarget,
            hops,
            shortest_length,
            termination,
        })
    }
}

fn check_endpoints(n: usize, source: usize, target: usize) -> Result<()> {
    for id in [source, target] {
        if id >= n {
            return Err(Error::VertexOutOfRange { id, n });
        }
    }
    if source == target {
        return Err(Error::param(format!(
            "source and target are both {source}"
        )));
    }
    Ok(())
}

/// Routes one message greedily from `source` to `target`. Exact distance
/// ties between candidate neighbors are broken uniformly with `rng`.
pub fn greedy_route(
    g: &Graph,
    coords: &Coordinates,
    source: usize,
    target: usize,
    rng: &mut Rng,
) -> Result<RouteResult> {
    check_endpoints(g.vertex_count(), source, target)?;
    let shortest = bfs_distances(g, source)[target];
    Router::new(g.vertex_count()).route(g, coords, source, target, shortest, rng)
}

/// Where trial shortest-path lengths come from.
pub enum HopLengths<'a> {
    /// Precomputed all-pairs table.
    Table(&'a DistanceTable),
    /// One BFS per trial.
    Bfs,
}

/// Routes `n_trials` ordered pairs drawn uniformly from `component`
/// (source != target). Trial `i` draws its pair and tie-breaks from the
/// stream `stream.derive("trial", i)`.
pub fn run_trials(
    g: &Graph,
    coords: &Coordinates,
    component: &[usize],
    n_trials: usize,
    lengths: HopLengths<'_>,
    stream: &RngStream,
) -> Result<Vec<RouteResult>> {
    if n_trials == 0 {
        return Ok(Vec::new());
    }
    if component.len() < 2 {
        return Err(Error::param("routing needs at least 2 vertices"));
    }
    let mut router = Router::new(g.vertex_count());
    let mut results = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let mut rng = stream.derive("trial", i as u64).rng();
        let s = component[rng.gen_range(0..component.len())];
        let t = loop {
            let t = component[rng.gen_range(0..component.len())];
            if t != s {
                break t;
            }
        };
        let shortest = match lengths {
            HopLengths::Table(table) => table.get(s, t),
            HopLengths::Bfs => bfs_distances(g, s)[t],
        };
        debug_assert_ne!(shortest, UNREACHABLE, "pairs are drawn within one component");
        results.push(router.route(g, coords, s, t, shortest, &mut rng)?);
    }
    Ok(results)
}

/// Fraction of delivered messages.
pub fn success_rate(results: &[RouteResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Undefined("success rate of zero trials"));
    }
    let ok = results.iter().filter(|r| r.success).count();
    Ok(ok as f64 / results.len() as f64)
}

/// Mean stretch over delivered messages; `None` when nothing was delivered.
pub fn stretch(results: &[RouteResult]) -> Option<f64> {
    let (sum, count) = results
        .iter()
        .filter_map(RouteResult::stretch)
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_coords(n: usize) -> Coordinates {
        Coordinates::from_rows(1, (0..n).map(|i| i as f64).collect()).unwrap()
    }

    fn rng() -> Rng {
        RngStream::new(1).rng()
    }

    fn done(len: usize, shortest: u32, success: bool) -> RouteResult {
        RouteResult {
            source: 0,
            target: 1,
            success,
            hops: (0..=len).collect(),
            shortest_length: shortest,
            termination: if success {
                Termination::ReachedTarget
            } else {
                Termination::AllNeighborsVisited
            },
        }
    }

    #[test]
    fn neighbor_target_is_one_hop() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let coords = Coordinates::from_rows(2, vec![0.0, 0.0, 5.0, 5.0, -1.0, 0.0]).unwrap();
        let r = greedy_route(&g, &coords, 0, 1, &mut rng()).unwrap();
        assert!(r.success);
        assert_eq!(r.hops, vec![0, 1]);
        assert_eq!(r.stretch(), Some(1.0));
    }

    #[test]
    fn monotone_line_is_followed() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = greedy_route(&g, &line_coords(4), 0, 3, &mut rng()).unwrap();
        assert_eq!(r.hops, vec![0, 1, 2, 3]);
        assert_eq!(r.shortest_length, 3);
        assert_eq!(r.stretch(), Some(1.0));
    }

    #[test]
    fn star_routes_through_hub() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let coords = Coordinates::from_rows(1, vec![0.0, 3.0, -2.0, 7.0, 1.0, 4.0]).unwrap();
        let r = greedy_route(&g, &coords, 2, 5, &mut rng()).unwrap();
        assert!(r.success);
        assert_eq!(r.hops, vec![2, 0, 5]);
    }

    #[test]
    fn dead_end_fails() {
        // 2 - 1 - 0 - 3 - 4; the target's coordinate lures the message to 2
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 3), (3, 4)]).unwrap();
        let coords = Coordinates::from_rows(1, vec![0.0, 1.0, 2.0, -1.0, 2.1]).unwrap();
        let r = greedy_route(&g, &coords, 0, 4, &mut rng()).unwrap();
        assert!(!r.success);
        assert_eq!(r.termination, Termination::AllNeighborsVisited);
        assert_eq!(r.hops, vec![0, 1, 2]);
        assert_eq!(r.stretch(), None);
    }

    #[test]
    fn ties_are_broken_by_the_rng() {
        // 0 has two neighbours equidistant from the target
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let coords = Coordinates::from_rows(2, vec![0.0, 0.0, 1.0, 1.0, 1.0, -1.0, 2.0, 0.0]).unwrap();
        let mut seen = [false; 3];
        for seed in 0..64 {
            let mut r = RngStream::new(seed).rng();
            let res = greedy_route(&g, &coords, 0, 3, &mut r).unwrap();
            assert!(res.success);
            seen[res.hops[1]] = true;
        }
        assert!(seen[1] && seen[2]);
    }

    #[test]
    fn invalid_endpoints() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let c = line_coords(2);
        assert!(greedy_route(&g, &c, 0, 0, &mut rng()).is_err());
        assert!(greedy_route(&g, &c, 0, 2, &mut rng()).is_err());
    }

    #[test]
    fn metric_examples() {
        let all_ok = vec![done(1, 1, true), done(1, 1, true)];
        assert_eq!(success_rate(&all_ok).unwrap(), 1.0);
        assert_eq!(stretch(&all_ok), Some(1.0));
        let mixed = vec![done(1, 1, true), done(3, 1, true), done(4, 2, true), done(2, 1, false)];
        assert_eq!(success_rate(&mixed).unwrap(), 0.75);
        assert_eq!(stretch(&[done(4, 2, true)]), Some(2.0));
        assert_eq!(stretch(&[done(1, 1, true), done(4, 2, true)]), Some(1.5));
        assert!(success_rate(&[]).is_err());
        assert_eq!(stretch(&[done(2, 1, false)]), None);
    }

    #[test]
    fn trials_on_complete_graph() {
        let n = 8;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        let coords = Coordinates::from_rows(2, (0..2 * n).map(|i| (i * 7 % 5) as f64).collect()).unwrap();
        let comp: Vec<usize> = (0..n).collect();
        let stream = RngStream::new(4);
        assert!(run_trials(&g, &coords, &comp, 0, HopLengths::Bfs, &stream).unwrap().is_empty());
        let res = run_trials(&g, &coords, &comp, 200, HopLengths::Bfs, &stream).unwrap();
        assert!(res.iter().all(|r| r.success && r.path_length() == 1 && r.source != r.target));
        assert_eq!(success_rate(&res).unwrap(), 1.0);
        let table = DistanceTable::new(&g);
        let again = run_trials(&g, &coords, &comp, 200, HopLengths::Table(&table), &stream).unwrap();
        assert_eq!(res, again);
    }
}
