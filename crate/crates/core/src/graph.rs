//! Undirected simple graph with a fixed node set.
//!
//! Edges are stored twice: as a set of normalized `(min, max)` pairs for
//! constant-time membership tests, and as per-node sorted neighbor lists so
//! that intersections and neighbor sums walk nodes in ascending order.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    pairs: HashSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.adj == other.adj
    }
}

impl Eq for Graph {}

#[inline]
fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Maximum number of edges of a simple graph on `n` nodes.
pub fn max_edges(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Maps a linear index in `0..n(n-1)/2` to the pair `(i, j)`, `i < j`,
/// enumerating row by row.
fn pair_from_index(n: usize, mut idx: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
        i += 1;
    }
}

/// Node labels per connected component, numbered in order of each
/// component's smallest node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<usize>,
    pub count: usize,
}

impl ComponentLabeling {
    /// Sizes of each component, indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

impl Graph {
    /// Edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            pairs: HashSet::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.insert_unchecked(i, j);
            }
        }
        g
    }

    /// Builds a graph from an edge list, rejecting duplicates and self-loops.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    /// Uniform random simple graph with exactly `m` edges (the G(n, M)
    /// model). With `require_connected`, draws are repeated until the graph
    /// is connected, up to `max_retries` attempts in total.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        m: usize,
        rng: &mut R,
        require_connected: bool,
        max_retries: usize,
    ) -> Result<Self> {
        let total = max_edges(n);
        if m == 0 {
            return Err(Error::InfeasibleEdgeCount {
                n,
                m,
                reason: "need at least one edge",
            });
        }
        if m > total {
            return Err(Error::InfeasibleEdgeCount {
                n,
                m,
                reason: "exceeds n(n-1)/2",
            });
        }
        if require_connected && m + 1 < n {
            return Err(Error::InfeasibleEdgeCount {
                n,
                m,
                reason: "fewer than n-1 edges cannot connect",
            });
        }
        let attempts = max_retries.max(1);
        for _ in 0..attempts {
            let mut g = Graph::empty(n);
            let mut chosen = rand::seq::index::sample(rng, total, m).into_vec();
            chosen.sort_unstable();
            for idx in chosen {
                let (i, j) = pair_from_index(n, idx);
                g.insert_unchecked(i, j);
            }
            if !require_connected || g.connected_components().count == 1 {
                return Ok(g);
            }
        }
        Err(Error::ConnectivityNotAchieved(attempts))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.pairs.len()
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(Error::NodeOutOfRange { node: i, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&key(i, j))
    }

    /// Sorted neighbors of `i`.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.check_node(i)?;
        Ok(&self.adj[i])
    }

    /// Sorted neighbors of `i`; panics if `i` is out of range.
    #[inline]
    pub fn neighbors_of(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// `|N_i ∩ N_j|` via a merge over the sorted neighbor lists.
    pub fn common_neighbor_count(&self, i: usize, j: usize) -> Result<usize> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        let (a, b) = (&self.adj[i], &self.adj[j]);
        let (mut p, mut q, mut count) = (0, 0, 0);
        while p < a.len() && q < b.len() {
            match a[p].cmp(&b[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    p += 1;
                    q += 1;
                }
            }
        }
        Ok(count)
    }

    /// Common-neighbor counts of `i` with every node, by walking paths of
    /// length two. `counts[i]` is `deg(i)` and is meaningless to callers.
    pub fn common_neighbor_counts_from(&self, i: usize, counts: &mut Vec<u32>) {
        counts.clear();
        counts.resize(self.n, 0);
        for &l in &self.adj[i] {
            for &m in &self.adj[l] {
                counts[m] += 1;
            }
        }
    }

    fn insert_unchecked(&mut self, i: usize, j: usize) {
        self.pairs.insert(key(i, j));
        let pos = self.adj[i].binary_search(&j).unwrap_err();
        self.adj[i].insert(pos, j);
        let pos = self.adj[j].binary_search(&i).unwrap_err();
        self.adj[j].insert(pos, i);
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if self.has_edge(i, j) {
            return Err(Error::EdgeExists(i, j));
        }
        self.insert_unchecked(i, j);
        self.debug_check();
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if !self.pairs.remove(&key(i, j)) {
            return Err(Error::EdgeMissing(i, j));
        }
        let pos = self.adj[i]
            .binary_search(&j)
            .expect("adjacency out of sync");
        self.adj[i].remove(pos);
        let pos = self.adj[j]
            .binary_search(&i)
            .expect("adjacency out of sync");
        self.adj[j].remove(pos);
        self.debug_check();
        Ok(())
    }

    /// All edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Breadth-first component labeling.
    pub fn connected_components(&self) -> ComponentLabeling {
        const UNSEEN: usize = usize::MAX;
        let mut labels = vec![UNSEEN; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if labels[start] != UNSEEN {
                continue;
            }
            labels[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if labels[v] == UNSEEN {
                        labels[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        ComponentLabeling { labels, count }
    }

    /// Checks symmetry, zero diagonal, sortedness and the edge count.
    pub fn check_invariants(&self) -> bool {
        let mut half_degree_sum = 0;
        for (i, nb) in self.adj.iter().enumerate() {
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &j in nb {
                if j == i || j >= self.n || self.adj[j].binary_search(&i).is_err() {
                    return false;
                }
                if !self.pairs.contains(&key(i, j)) {
                    return false;
                }
            }
            half_degree_sum += nb.len();
        }
        half_degree_sum == 2 * self.pairs.len()
    }

    #[inline]
    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        if self.n <= 32 {
            debug_assert!(self.check_invariants(), "graph invariants violated");
        }
    }

    /// Renders the edge-list snapshot: a `# n=<n> m=<m> t=<t>` header then
    /// one `i j` line per edge with `i < j`, lexicographically ordered.
    pub fn to_edge_list(&self, t: u64) -> String {
        let mut s = String::new();
        writeln!(s, "# n={} m={} t={}", self.n, self.edge_count(), t).unwrap();
        for (i, j) in self.edges() {
            writeln!(s, "{i} {j}").unwrap();
        }
        s
    }

    /// Parses the format written by [`Graph::to_edge_list`], returning the
    /// graph and its time stamp.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<(Graph, u64)> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))??;
        let (n, m, t) = parse_header(&header)?;
        let mut g = Graph::empty(n);
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.and_then(|s| s.parse().ok()).ok_or_else(|| {
                    Error::Parse(format!("bad edge on line {}: {line:?}", lineno + 2))
                })
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() || i >= j {
                return Err(Error::Parse(format!(
                    "bad edge on line {}: {line:?}",
                    lineno + 2
                )));
            }
            g.add_edge(i, j)?;
        }
        if g.edge_count() != m {
            return Err(Error::Parse(format!(
                "header declares m={m} but {} edges were read",
                g.edge_count()
            )));
        }
        Ok((g, t))
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, u64)> {
    let bad = || Error::Parse(format!("bad header: {header:?}"));
    let rest = header.strip_prefix("# ").ok_or_else(bad)?;
    let mut fields = rest.split(' ');
    let mut field = |name: &str| -> Result<u64> {
        fields
            .next()
            .and_then(|f| f.strip_prefix(name))
            .and_then(|f| f.strip_prefix('='))
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)
    };
    let n = field("n")? as usize;
    let m = field("m")? as usize;
    let t = field("t")?;
    Ok((n, m, t))
}
