//! Edge orientation engines: the online random and two-choice rules, an
//! exact offline orientation with bounded in-degree via path reversal, and
//! the greedy in-degree coloring built on top of it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph_state::VertexId;
use crate::{Error, Result};

/// Direction of an edge record `(u, v)`: `Uv` points u → v (head `v`),
/// `Vu` points v → u (head `u`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Uv,
    Vu,
}

impl Direction {
    #[inline]
    pub fn head(self, u: VertexId, v: VertexId) -> VertexId {
        match self {
            Direction::Uv => v,
            Direction::Vu => u,
        }
    }

    #[inline]
    pub fn tail(self, u: VertexId, v: VertexId) -> VertexId {
        match self {
            Direction::Uv => u,
            Direction::Vu => v,
        }
    }
}

/// Fair-coin orientation, independent across rounds.
#[inline]
pub fn random_orient<R: Rng>(rng: &mut R) -> Direction {
    if rng.random::<bool>() {
        Direction::Uv
    } else {
        Direction::Vu
    }
}

/// Orients toward the endpoint of strictly lower current in-degree; ties go
/// to a fair coin.
#[inline]
pub fn two_choice_orient<R: Rng>(
    u: VertexId,
    v: VertexId,
    in_degree: &[u32],
    rng: &mut R,
) -> Direction {
    let (du, dv) = (in_degree[u.index()], in_degree[v.index()]);
    match du.cmp(&dv) {
        std::cmp::Ordering::Less => Direction::Vu,
        std::cmp::Ordering::Greater => Direction::Uv,
        std::cmp::Ordering::Equal => random_orient(rng),
    }
}

/// An orientation of a simple edge list together with its in-degree ledger.
#[derive(Debug, Clone)]
pub struct Orientation {
    /// The simple edge list that was oriented (duplicates collapsed).
    pub edges: Vec<(u32, u32)>,
    pub directions: Vec<Direction>,
    pub in_degree: Vec<u32>,
}

impl Orientation {
    pub fn head(&self, edge: usize) -> u32 {
        let (u, v) = self.edges[edge];
        self.directions[edge].head(VertexId(u), VertexId(v)).0
    }

    pub fn max_in_degree(&self) -> u32 {
        self.in_degree.iter().copied().max().unwrap_or(0)
    }

    /// Recomputes the ledger from the directions and checks it.
    pub fn validate(&self) -> bool {
        let mut ledger = vec![0u32; self.in_degree.len()];
        for (i, _) in self.edges.iter().enumerate() {
            ledger[self.head(i) as usize] += 1;
        }
        ledger == self.in_degree
    }
}

/// Certificate that no orientation with max in-degree `r` exists: a vertex
/// set inducing more than `r · |U|` edges.
#[derive(Debug, Clone)]
pub struct DensityWitness {
    pub vertices: Vec<u32>,
    pub induced_edges: usize,
}

/// Result of the exact offline orientation.
#[derive(Debug, Clone)]
pub enum OrientationOutcome {
    Feasible(Orientation),
    Infeasible(DensityWitness),
}

impl OrientationOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OrientationOutcome::Feasible(_))
    }
}

/// Collapses duplicates and self-loops out of an edge list, keeping first
/// occurrences in order.
pub fn collapse_edges(n: usize, edges: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    let mut out = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u == v || u as usize >= n || v as usize >= n {
            continue;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        if seen.insert(key) {
            out.push((u, v));
        }
    }
    out
}

/// Exact test for orientability with max in-degree at most `r`.
///
/// Duplicates are collapsed first. Starts from a deterministic two-choice
/// greedy orientation, then repeatedly relieves any vertex with in-degree
/// above `r` by a BFS along reversed edges to a vertex with spare capacity,
/// flipping the path. If some overloaded vertex has no such path, the set
/// of vertices reachable backwards from it induces more than `r · |U|`
/// edges, which is returned as the [`DensityWitness`].
pub fn exact_r_orientation(n: usize, edges: &[(u32, u32)], r: u32) -> OrientationOutcome {
    let edges = collapse_edges(n, edges);
    let m = edges.len();
    let mut directions = Vec::with_capacity(m);
    let mut in_degree = vec![0u32; n];

    for &(u, v) in &edges {
        let dir = match in_degree[u as usize].cmp(&in_degree[v as usize]) {
            std::cmp::Ordering::Less => Direction::Vu,
            std::cmp::Ordering::Greater => Direction::Uv,
            std::cmp::Ordering::Equal => {
                if u < v {
                    Direction::Vu
                } else {
                    Direction::Uv
                }
            }
        };
        let head = dir.head(VertexId(u), VertexId(v));
        in_degree[head.index()] += 1;
        directions.push(dir);
    }

    // incoming edge ids per vertex, kept in sync while flipping
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        let head = directions[i].head(VertexId(u), VertexId(v));
        incoming[head.index()].push(i as u32);
    }

    let mut overloaded: std::collections::VecDeque<u32> = (0..n as u32)
        .filter(|&v| in_degree[v as usize] > r)
        .collect();
    let mut visited = vec![false; n];
    let mut via_edge = vec![u32::MAX; n];

    while let Some(w) = overloaded.pop_front() {
        while in_degree[w as usize] > r {
            // BFS from w along reversed incoming edges toward spare capacity
            for f in visited.iter_mut() {
                *f = false;
            }
            let mut queue = std::collections::VecDeque::new();
            visited[w as usize] = true;
            queue.push_back(w);
            let mut target = None;
            'bfs: while let Some(x) = queue.pop_front() {
                for &eid in &incoming[x as usize] {
                    let (a, b) = edges[eid as usize];
                    let tail = directions[eid as usize].tail(VertexId(a), VertexId(b)).0;
                    if !visited[tail as usize] {
                        visited[tail as usize] = true;
                        via_edge[tail as usize] = eid;
                        if in_degree[tail as usize] < r {
                            target = Some(tail);
                            break 'bfs;
                        }
                        queue.push_back(tail);
                    }
                }
            }
            let Some(t) = target else {
                let vertices: Vec<u32> =
                    (0..n as u32).filter(|&v| visited[v as usize]).collect();
                let induced = induced_edge_count(&edges, &visited);
                return OrientationOutcome::Infeasible(DensityWitness {
                    vertices,
                    induced_edges: induced,
                });
            };
            // flip the path from t back to w
            let mut cur = t;
            while cur != w {
                let eid = via_edge[cur as usize] as usize;
                let (a, b) = edges[eid];
                let old_head = directions[eid].head(VertexId(a), VertexId(b)).0;
                let new_head = directions[eid].tail(VertexId(a), VertexId(b)).0;
                directions[eid] = match directions[eid] {
                    Direction::Uv => Direction::Vu,
                    Direction::Vu => Direction::Uv,
                };
                in_degree[old_head as usize] -= 1;
                in_degree[new_head as usize] += 1;
                let pos = incoming[old_head as usize]
                    .iter()
                    .position(|&e| e == eid as u32)
                    .expect("incoming list out of sync");
                incoming[old_head as usize].swap_remove(pos);
                incoming[new_head as usize].push(eid as u32);
                cur = old_head;
            }
        }
    }

    OrientationOutcome::Feasible(Orientation {
        edges,
        directions,
        in_degree,
    })
}

fn induced_edge_count(edges: &[(u32, u32)], member: &[bool]) -> usize {
    edges
        .iter()
        .filter(|&&(u, v)| member[u as usize] && member[v as usize])
        .count()
}

/// Colors the edges of an orientation with max in-degree at most `r` so
/// that at each vertex all incoming edges receive pairwise distinct colors
/// from `{0, .., r-1}`. Every color class then has per-vertex in-degree at
/// most 1.
pub fn greedy_indeg_coloring(orientation: &Orientation, r: u32) -> Result<Vec<u32>> {
    let n = orientation.in_degree.len();
    for (v, &d) in orientation.in_degree.iter().enumerate() {
        if d > r {
            return Err(Error::InDegreeCap {
                vertex: v as u32,
                found: d,
                cap: r,
            });
        }
    }
    let mut next_color = vec![0u32; n];
    let mut colors = Vec::with_capacity(orientation.edges.len());
    for i in 0..orientation.edges.len() {
        let head = orientation.head(i) as usize;
        colors.push(next_color[head]);
        next_color[head] += 1;
    }
    Ok(colors)
}
