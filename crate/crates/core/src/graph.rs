//! Acyclic mixed graphs with directed and multidirected edges.
//!
//! Vertices are `0..p` in memory. Everything that crosses a file or a
//! terminal boundary (JSON, DOT, `Display`, error messages) uses `1..=p`.

use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `G = (V, D, H)`: `p` vertices, directed edges `i -> j`, and multidirected
/// edges, each a sorted set of at least two vertices sharing a hidden parent.
///
/// Overlapping multidirected edges are allowed; identical ones collapse.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct MixedGraph {
    p: usize,
    directed: BTreeSet<(usize, usize)>,
    multi: BTreeSet<Vec<usize>>,
}

impl MixedGraph {
    pub fn new<D, H>(p: usize, directed: D, multi: H) -> Result<Self>
    where
        D: IntoIterator<Item = (usize, usize)>,
        H: IntoIterator<Item = Vec<usize>>,
    {
        let mut g = MixedGraph::empty(p);
        for (i, j) in directed {
            g.add_directed(i, j)?;
        }
        for h in multi {
            g.add_multi(h)?;
        }
        Ok(g)
    }

    /// Same as [`MixedGraph::new`] with 1-based vertex labels.
    pub fn from_one_based<D, H>(p: usize, directed: D, multi: H) -> Result<Self>
    where
        D: IntoIterator<Item = (usize, usize)>,
        H: IntoIterator<Item = Vec<usize>>,
    {
        let dec = |v: usize| {
            v.checked_sub(1)
                .ok_or(Error::VertexOutOfRange { vertex: v, p })
        };
        let directed = directed
            .into_iter()
            .map(|(i, j)| Ok((dec(i)?, dec(j)?)))
            .collect::<Result<Vec<_>>>()?;
        let multi = multi
            .into_iter()
            .map(|h| h.into_iter().map(dec).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MixedGraph::new(p, directed, multi)
    }

    pub fn empty(p: usize) -> Self {
        MixedGraph {
            p,
            directed: BTreeSet::new(),
            multi: BTreeSet::new(),
        }
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.p {
            return Err(Error::VertexOutOfRange {
                vertex: v + 1,
                p: self.p,
            });
        }
        Ok(())
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_vertex(from)?;
        self.check_vertex(to)?;
        if from == to {
            return Err(Error::SelfLoop(from + 1));
        }
        self.directed.insert((from, to));
        Ok(())
    }

    pub fn remove_directed(&mut self, from: usize, to: usize) -> bool {
        self.directed.remove(&(from, to))
    }

    pub fn add_multi(&mut self, mut edge: Vec<usize>) -> Result<()> {
        for &v in &edge {
            self.check_vertex(v)?;
        }
        edge.sort_unstable();
        edge.dedup();
        if edge.len() < 2 {
            return Err(Error::DegenerateEdge(edge.iter().map(|v| v + 1).collect()));
        }
        self.multi.insert(edge);
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    /// Multidirected edges, each sorted ascending.
    pub fn multi(&self) -> &BTreeSet<Vec<usize>> {
        &self.multi
    }

    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        self.directed.contains(&(from, to))
    }

    pub fn parents(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.directed
            .iter()
            .filter(move |&&(_, j)| j == v)
            .map(|&(i, _)| i)
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.directed
            .range((v, 0)..(v + 1, 0))
            .map(|&(_, j)| j)
    }

    /// Same vertex count and directed edges, multidirected edges replaced.
    pub fn with_multi<H>(&self, multi: H) -> Result<Self>
    where
        H: IntoIterator<Item = Vec<usize>>,
    {
        MixedGraph::new(self.p, self.directed.iter().copied(), multi)
    }

    /// Kahn's algorithm, smallest available vertex first so the order is
    /// deterministic. `None` when the directed part has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indegree = vec![0usize; self.p];
        for &(_, j) in &self.directed {
            indegree[j] += 1;
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..self.p)
            .filter(|&v| indegree[v] == 0)
            .map(Reverse)
            .collect();
        let mut order = Vec::with_capacity(self.p);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for c in self.children(v) {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        (order.len() == self.p).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// First `(parent, child)` pair joined by both a directed edge and a
    /// multidirected edge.
    pub fn find_bow(&self) -> Option<(usize, usize)> {
        self.directed.iter().copied().find(|&(i, j)| {
            self.multi
                .iter()
                .any(|h| h.binary_search(&i).is_ok() && h.binary_search(&j).is_ok())
        })
    }

    pub fn is_bow_free(&self) -> bool {
        self.find_bow().is_none()
    }

    pub fn bidirected_subdivision(&self) -> BidirectedGraph {
        let mut bg = BidirectedGraph::empty(self.p);
        for h in &self.multi {
            for (a, &i) in h.iter().enumerate() {
                for &j in &h[a + 1..] {
                    bg.insert(i, j);
                }
            }
        }
        bg
    }

    /// `reach[v][u]` is true when a directed path (possibly of length zero)
    /// leads from `u` to `v`.
    pub fn ancestor_closure(&self) -> Vec<Vec<bool>> {
        let mut parents = vec![Vec::new(); self.p];
        for &(i, j) in &self.directed {
            parents[j].push(i);
        }
        (0..self.p)
            .map(|v| {
                let mut seen = vec![false; self.p];
                let mut stack = vec![v];
                seen[v] = true;
                while let Some(u) = stack.pop() {
                    for &w in &parents[u] {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
                seen
            })
            .collect()
    }

    /// Shortest directed path `from ⇒* to`, inclusive of both ends.
    pub fn directed_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.p];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for c in self.children(u) {
                if prev[c] == usize::MAX {
                    prev[c] = u;
                    queue.push_back(c);
                }
            }
        }
        None
    }

    /// Searches for a k-trek between the tuple's vertices and returns one
    /// witness if it exists. Sources need not be distinct.
    pub fn find_k_trek(&self, tuple: &VertexTuple) -> Result<Option<TrekWitness>> {
        tuple.validate(self.p)?;
        let reach = self.ancestor_closure();
        let sinks = tuple.vertices();

        let common = (0..self.p).find(|&s| sinks.iter().all(|&t| reach[t][s]));
        if let Some(s) = common {
            let paths = sinks
                .iter()
                .map(|&t| self.directed_path(s, t).expect("reachable by closure"))
                .collect();
            return Ok(Some(TrekWitness {
                top: TrekTop::Vertex(s),
                paths,
            }));
        }

        for h in &self.multi {
            let sources: Option<Vec<usize>> = sinks
                .iter()
                .map(|&t| h.iter().copied().find(|&s| reach[t][s]))
                .collect();
            if let Some(sources) = sources {
                let paths = sources
                    .iter()
                    .zip(sinks)
                    .map(|(&s, &t)| self.directed_path(s, t).expect("reachable by closure"))
                    .collect();
                return Ok(Some(TrekWitness {
                    top: TrekTop::Hidden(h.clone()),
                    paths,
                }));
            }
        }
        Ok(None)
    }

    pub fn has_k_trek(&self, tuple: &VertexTuple) -> Result<bool> {
        Ok(self.find_k_trek(tuple)?.is_some())
    }

    /// Graphviz rendering: directed edges solid, each multidirected edge as
    /// a dashed star out of a synthetic node `H1`, `H2`, ...
    pub fn to_dot(&self, labels: Option<&[String]>) -> String {
        let name = |v: usize| match labels {
            Some(l) => l[v].clone(),
            None => (v + 1).to_string(),
        };
        let mut out = String::from("digraph G {\n");
        for v in 0..self.p {
            out.push_str(&format!("  \"{}\";\n", name(v)));
        }
        for &(i, j) in &self.directed {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", name(i), name(j)));
        }
        for (k, h) in self.multi.iter().enumerate() {
            let hidden = format!("H{}", k + 1);
            out.push_str(&format!(
                "  \"{hidden}\" [shape=circle, style=dashed, label=\"{hidden}\"];\n"
            ));
            for &v in h {
                out.push_str(&format!("  \"{hidden}\" -> \"{}\" [style=dashed];\n", name(v)));
            }
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p = {}", self.p)?;
        for &(i, j) in &self.directed {
            writeln!(f, "{} -> {}", i + 1, j + 1)?;
        }
        for h in &self.multi {
            let members: Vec<String> = h.iter().map(|v| (v + 1).to_string()).collect();
            writeln!(f, "({}) <-*->", members.join(","))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    p: usize,
    #[serde(default)]
    directed: Vec<[usize; 2]>,
    #[serde(default)]
    multi: Vec<Vec<usize>>,
}

impl TryFrom<GraphJson> for MixedGraph {
    type Error = Error;

    fn try_from(raw: GraphJson) -> Result<Self> {
        MixedGraph::from_one_based(
            raw.p,
            raw.directed.into_iter().map(|[i, j]| (i, j)),
            raw.multi,
        )
    }
}

impl From<MixedGraph> for GraphJson {
    fn from(g: MixedGraph) -> Self {
        GraphJson {
            p: g.p,
            directed: g.directed.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            multi: g
                .multi
                .iter()
                .map(|h| h.iter().map(|v| v + 1).collect())
                .collect(),
        }
    }
}

/// Where a k-trek's paths start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrekTop {
    Vertex(usize),
    Hidden(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrekWitness {
    pub top: TrekTop,
    /// One directed path per tuple entry, source first, sink last.
    pub paths: Vec<Vec<usize>>,
}

/// Ordered distinct vertices `(i_1, ..., i_k)`, `k >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexTuple(Vec<usize>);

impl VertexTuple {
    pub fn new(vertices: Vec<usize>, p: usize) -> Result<Self> {
        let t = VertexTuple(vertices);
        t.validate(p)?;
        Ok(t)
    }

    pub fn from_one_based(labels: &[usize], p: usize) -> Result<Self> {
        let vertices = labels
            .iter()
            .map(|&v| v.checked_sub(1).ok_or(Error::VertexOutOfRange { vertex: v, p }))
            .collect::<Result<Vec<_>>>()?;
        VertexTuple::new(vertices, p)
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.0.len() < 2 {
            return Err(Error::TupleTooShort(self.0.len()));
        }
        let mut seen = BTreeSet::new();
        for &v in &self.0 {
            if v >= p {
                return Err(Error::VertexOutOfRange { vertex: v + 1, p });
            }
            if !seen.insert(v) {
                return Err(Error::RepeatedVertex(v + 1));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }
}

/// `G' = (V, ∅, B)`: undirected adjacency between vertices that share a
/// hidden parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BidirectedGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl BidirectedGraph {
    pub fn empty(p: usize) -> Self {
        BidirectedGraph {
            adj: vec![BTreeSet::new(); p],
        }
    }

    pub fn new<I>(p: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut bg = BidirectedGraph::empty(p);
        for (i, j) in pairs {
            for v in [i, j] {
                if v >= p {
                    return Err(Error::VertexOutOfRange { vertex: v + 1, p });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i + 1));
            }
            bg.insert(i, j);
        }
        Ok(bg)
    }

    fn insert(&mut self, i: usize, j: usize) {
        self.adj[i].insert(j);
        self.adj[j].insert(i);
    }

    pub fn p(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(&j)
    }

    /// Pairs `(i, j)` with `i < j`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.range(i + 1..).map(move |&j| (i, j)))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.iter().all(BTreeSet::is_empty)
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(a, &i)| {
            vertices[a + 1..].iter().all(|&j| self.contains(i, j))
        })
    }

    /// Maximal cliques with at least two vertices (Bron–Kerbosch with
    /// Tomita pivoting). Each clique sorted, list sorted.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut r = Vec::new();
        let p: BTreeSet<usize> = (0..self.p()).collect();
        self.bron_kerbosch(&mut r, p, BTreeSet::new(), &mut out);
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        out
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<usize>,
        mut p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            if r.len() >= 2 {
                out.push(r.clone());
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(&x)
            .copied()
            .max_by_key(|&u| p.intersection(&self.adj[u]).count())
            .expect("p or x non-empty");
        let candidates: Vec<usize> = p.difference(&self.adj[pivot]).copied().collect();
        for v in candidates {
            let nb = &self.adj[v];
            r.push(v);
            self.bron_kerbosch(
                r,
                p.intersection(nb).copied().collect(),
                x.intersection(nb).copied().collect(),
                out,
            );
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }
}
