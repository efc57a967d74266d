//! Seeded generators for the two network families: rewired ring lattices
//! (Watts–Strogatz) and preferential attachment with a degree offset
//! (generalized Barabási–Albert).

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seeds::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsParams {
    pub n: usize,
    /// Even lattice degree; each vertex links to its `k` nearest.
    pub k: usize,
    /// Per-edge rewiring probability.
    pub p: f64,
    pub seed: u64,
}

impl WsParams {
    pub fn validate(&self) -> Result<()> {
        check_lattice(self.n, self.k)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::param(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaParams {
    pub n: usize,
    /// Edges added with every new vertex.
    pub m_links: usize,
    /// Attachment offset: targets are chosen with weight `degree + k0`.
    pub k0: f64,
    pub seed: u64,
}

impl BaParams {
    pub fn validate(&self) -> Result<()> {
        if self.m_links < 1 {
            return Err(Error::param("m_links must be >= 1"));
        }
        if self.n <= self.m_links {
            return Err(Error::param(format!(
                "n must exceed m_links ({} <= {})",
                self.n, self.m_links
            )));
        }
        if !(self.k0 > -(self.m_links as f64)) {
            return Err(Error::param(format!(
                "k0 must satisfy k0 > -m_links for positive attachment weights (k0 = {}, m_links = {})",
                self.k0, self.m_links
            )));
        }
        Ok(())
    }

    /// Degree exponent the model is built to produce, `3 + k0 / m_links`.
    pub fn gamma(&self) -> f64 {
        3.0 + self.k0 / self.m_links as f64
    }
}

fn check_lattice(n: usize, k: usize) -> Result<()> {
    if !k.is_multiple_of(2) {
        return Err(Error::param(format!("k must be even, got {k}")));
    }
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "k must satisfy 0 < k < n (k = {k}, n = {n})"
        )));
    }
    Ok(())
}

fn lattice_adjacency(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::with_capacity(k); n];
    for i in 0..n {
        for off in 1..=k / 2 {
            let j = (i + off) % n;
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    adj
}

/// Ring of `n` vertices, each joined to the `k/2` nearest on either side.
pub fn ring_lattice(n: usize, k: usize) -> Result<Graph> {
    check_lattice(n, k)?;
    Graph::from_adjacency(lattice_adjacency(n, k))
}

/// Ring lattice whose edges are each rewired with probability `p`.
///
/// Lattice edges are visited by source vertex ascending, then clockwise
/// offset `1..=k/2`. A rewired edge keeps its source and moves its far end
/// to a uniformly drawn vertex, redrawing on self-loops and duplicates.
pub fn watts_strogatz(params: &WsParams) -> Result<Graph> {
    params.validate()?;
    let WsParams { n, k, p, seed } = *params;
    let mut adj = lattice_adjacency(n, k);
    let mut rng = RngStream::new(seed).derive("ws", 0).rng();
    for u in 0..n {
        for off in 1..=k / 2 {
            if !rng.gen_bool(p) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                // no admissible target
                continue;
            }
            let v = (u + off) % n;
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            remove(&mut adj[u], v);
            remove(&mut adj[v], u);
            adj[u].push(w);
            adj[w].push(u);
        }
    }
    Graph::from_adjacency(adj)
}

fn remove(list: &mut Vec<usize>, x: usize) {
    let pos = list
        .iter()
        .position(|&y| y == x)
        .expect("lattice edge present at its rewiring turn");
    list.swap_remove(pos);
}

/// Offset that gives degree exponent `gamma`: `k0 = (gamma - 3) * m_links`.
pub fn gamma_to_k0(gamma: f64, m_links: usize) -> Result<f64> {
    if !(gamma > 2.0) {
        return Err(Error::param(format!(
            "gamma must exceed 2 so that k0 > -m_links, got {gamma}"
        )));
    }
    Ok((gamma - 3.0) * m_links as f64)
}

/// Large-n fraction of vertices with degree `k` under attachment weight
/// `degree + k0`: `P(m) = (2 + a) / (m + k0 + 2 + a)` with `a = k0 / m`, then
/// `P(k + 1) / P(k) = (k + k0) / (k + k0 + 3 + a)`. The tail decays as
/// `k^-(3 + a)` but only slowly reaches that slope.
pub fn ba_degree_probability(k: usize, m_links: usize, k0: f64) -> f64 {
    if k < m_links || m_links == 0 {
        return 0.0;
    }
    let m = m_links as f64;
    let a = k0 / m;
    let mut p = (2.0 + a) / (m + k0 + 2.0 + a);
    for j in m_links..k {
        let j = j as f64;
        p *= (j + k0) / (j + k0 + 3.0 + a);
    }
    p
}

/// Preferential attachment with weight `degree + k0`.
///
/// Starts from a complete graph on `m_links + 1` vertices; every later
/// vertex links to `m_links` distinct existing vertices, drawn one at a
/// time with weights renormalized after each pick.
pub fn generalized_ba(params: &BaParams) -> Result<Graph> {
    params.validate()?;
    let BaParams { n, m_links, k0, seed } = *params;
    let core = m_links + 1;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut weights = Fenwick::new(n);
    for u in 0..core {
        for v in 0..core {
            if u != v {
                adj[u].push(v);
            }
        }
        weights.set(u, m_links as f64 + k0);
    }
    let mut rng = RngStream::new(seed).derive("ba", 0).rng();
    let mut picked = Vec::with_capacity(m_links);
    for v in core..n {
        picked.clear();
        for _ in 0..m_links {
            let r = rng.gen::<f64>() * weights.total();
            let u = weights.find(r);
            picked.push(u);
            // excluded until this vertex's picks are done
            weights.set(u, 0.0);
        }
        for &u in &picked {
            adj[u].push(v);
            adj[v].push(u);
            weights.set(u, adj[u].len() as f64 + k0);
        }
        weights.set(v, m_links as f64 + k0);
    }
    Graph::from_adjacency(adj)
}

/// Binary indexed tree over non-negative weights with prefix-sum search.
struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0.0; n + 1],
            values: vec![0.0; n],
        }
    }

    fn set(&mut self, i: usize, value: f64) {
        let delta = value - self.values[i];
        self.values[i] = value;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut s = 0.0;
        let mut j = self.tree.len() - 1;
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }

    /// Index `i` with prefix(i) <= r < prefix(i + 1), skipping zero weights.
    fn find(&self, mut r: f64) -> usize {
        let n = self.values.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= r {
                pos = next;
                r -= self.tree[next];
            }
            step >>= 1;
        }
        // rounding can land on a zero-weight slot or past the end
        let mut i = pos.min(n - 1);
        while self.values[i] <= 0.0 {
            i = if i == 0 { n - 1 } else { i - 1 };
        }
        i
    }
}

/// Discrete maximum-likelihood power-law exponent for the values `>= kmin`.
///
/// Maximizes `-N ln zeta(gamma, kmin) - gamma * sum(ln k)` over
/// `gamma` in (1, 20) by golden-section search.
pub fn fit_power_law_exponent(degrees: &[usize], kmin: usize) -> Result<f64> {
    if kmin < 1 {
        return Err(Error::param("kmin must be >= 1"));
    }
    let tail: Vec<f64> = degrees
        .iter()
        .filter(|&&k| k >= kmin)
        .map(|&k| k as f64)
        .collect();
    if tail.is_empty() {
        return Err(Error::param("no degrees at or above kmin"));
    }
    let count = tail.len() as f64;
    let log_sum: f64 = tail.iter().map(|k| k.ln()).sum();
    let q = kmin as f64;
    let neg_ll = |g: f64| count * hurwitz_zeta(g, q).ln() + g * log_sum;

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1.0 + 1e-6, 20.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (neg_ll(c), neg_ll(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = neg_ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = neg_ll(d);
        }
    }
    Ok((a + b) / 2.0)
}

/// `sum_{j>=0} (j + q)^-s` for `s > 1`, `q > 0`: direct sum then
/// Euler–Maclaurin tail.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const DIRECT: usize = 16;
    // B2k / (2k)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut sum = 0.0;
    for j in 0..DIRECT {
        sum += (j as f64 + q).powf(-s);
    }
    let a = DIRECT as f64 + q;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2)
    let mut rising = s;
    let mut power = a.powf(-s - 1.0);
    for (idx, b) in B.iter().enumerate() {
        sum += b * rising * power;
        let k = idx as f64 + 1.0;
        rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
        power /= a * a;
    }
    sum
}
