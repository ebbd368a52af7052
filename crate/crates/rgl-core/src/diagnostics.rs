//! Small-instance structural checkers: simple path counting, essential
//! edges, short-cycle census, densest small subsets, core peeling, and the
//! color-split susceptibility inequality. These verify combinatorial
//! properties that the large-scale runs rely on, at sizes where exhaustive
//! or near-exhaustive computation is possible.

use std::collections::HashSet;

use crate::{Error, Result};

/// A simple undirected graph on at most a few thousand vertices, with an
/// optional per-edge color. Duplicate edges and self-loops are collapsed
/// away on construction.
#[derive(Debug, Clone)]
pub struct SmallGraph {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    pub adj: Vec<Vec<u32>>,
    pub colors: Option<Vec<u32>>,
}

impl SmallGraph {
    pub fn new(n: usize, raw_edges: &[(u32, u32)]) -> Self {
        Self::build(n, raw_edges, None)
    }

    pub fn colored(n: usize, raw_edges: &[(u32, u32)], colors: &[u32]) -> Self {
        assert_eq!(raw_edges.len(), colors.len());
        Self::build(n, raw_edges, Some(colors))
    }

    fn build(n: usize, raw_edges: &[(u32, u32)], colors: Option<&[u32]>) -> Self {
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        let mut kept_colors = Vec::new();
        for (i, &(u, v)) in raw_edges.iter().enumerate() {
            if u == v || u as usize >= n || v as usize >= n {
                continue;
            }
            if seen.insert((u.min(v), u.max(v))) {
                edges.push((u, v));
                if let Some(c) = colors {
                    kept_colors.push(c[i]);
                }
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        SmallGraph {
            n,
            edges,
            adj,
            colors: colors.map(|_| kept_colors),
        }
    }

    /// Subgraph of one color class, on the same vertex set.
    pub fn color_class(&self, color: u32) -> SmallGraph {
        let colors = self.colors.as_ref().expect("graph has no edge colors");
        let edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .zip(colors)
            .filter(|(_, &c)| c == color)
            .map(|(&e, _)| e)
            .collect();
        SmallGraph::new(self.n, &edges)
    }

    fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].contains(&v)
    }

    /// Component sizes by BFS.
    pub fn component_sizes(&self) -> Vec<u32> {
        let mut seen = vec![false; self.n];
        let mut sizes = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s as u32];
            let mut size = 0u32;
            while let Some(x) = stack.pop() {
                size += 1;
                for &y in &self.adj[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        sizes
    }

    /// `sum of squared component sizes / n` by direct enumeration.
    pub fn susceptibility(&self) -> f64 {
        let sq: u64 = self
            .component_sizes()
            .iter()
            .map(|&s| s as u64 * s as u64)
            .sum();
        sq as f64 / self.n as f64
    }

    /// Whether `a` and `b` are connected when edge `skip` is removed.
    fn connected_avoiding(&self, a: u32, b: u32, skip: (u32, u32)) -> bool {
        let mut seen = vec![false; self.n];
        seen[a as usize] = true;
        let mut stack = vec![a];
        while let Some(x) = stack.pop() {
            if x == b {
                return true;
            }
            for &y in &self.adj[x as usize] {
                let e = (x.min(y), x.max(y));
                if e == skip || seen[y as usize] {
                    continue;
                }
                seen[y as usize] = true;
                stack.push(y);
            }
        }
        false
    }
}

/// Number of simple `u`-`v` paths, saturating at `cap`. Exponential in the
/// worst case; meant for graphs of at most a couple hundred vertices.
pub fn count_paths(graph: &SmallGraph, u: u32, v: u32, cap: usize) -> usize {
    let mut visited = vec![false; graph.n];
    let mut count = 0usize;
    visited[u as usize] = true;
    dfs_paths(graph, u, v, cap, &mut visited, &mut count);
    count
}

fn dfs_paths(
    graph: &SmallGraph,
    at: u32,
    target: u32,
    cap: usize,
    visited: &mut [bool],
    count: &mut usize,
) {
    if *count >= cap {
        return;
    }
    if at == target {
        *count += 1;
        return;
    }
    for &next in &graph.adj[at as usize] {
        if !visited[next as usize] {
            visited[next as usize] = true;
            dfs_paths(graph, next, target, cap, visited, count);
            visited[next as usize] = false;
            if *count >= cap {
                return;
            }
        }
    }
}

/// The essential edges of a path: those whose deletion disconnects the
/// path's two endpoints. Returns the essential subset as index pairs.
pub fn essential_edges(graph: &SmallGraph, path: &[u32]) -> Result<Vec<(u32, u32)>> {
    if path.len() < 2 {
        return Err(Error::InvalidPath("path needs at least two vertices".into()));
    }
    for w in path.windows(2) {
        if w[0] as usize >= graph.n || w[1] as usize >= graph.n || !graph.has_edge(w[0], w[1]) {
            return Err(Error::InvalidPath(format!(
                "({}, {}) is not an edge of the graph",
                w[0], w[1]
            )));
        }
    }
    let (a, b) = (path[0], *path.last().unwrap());
    let mut essential = Vec::new();
    for w in path.windows(2) {
        let e = (w[0].min(w[1]), w[0].max(w[1]));
        if !graph.connected_avoiding(a, b, e) {
            essential.push((w[0], w[1]));
        }
    }
    Ok(essential)
}

/// Exact number of cycles of length at most `max_len` (at most 12), by
/// rooted DFS: each cycle is counted once, from its smallest vertex, in
/// the direction where the second vertex is smaller than the last.
pub fn short_cycle_census(graph: &SmallGraph, max_len: usize) -> Result<u64> {
    if max_len > 12 {
        return Err(Error::OutOfRange(format!(
            "cycle census capped at length 12, got {max_len}"
        )));
    }
    let mut count = 0u64;
    let mut on_path = vec![false; graph.n];
    for root in 0..graph.n as u32 {
        on_path[root as usize] = true;
        let mut path = vec![root];
        census_dfs(graph, root, max_len, &mut path, &mut on_path, &mut count);
        on_path[root as usize] = false;
    }
    Ok(count)
}

fn census_dfs(
    graph: &SmallGraph,
    root: u32,
    max_len: usize,
    path: &mut Vec<u32>,
    on_path: &mut [bool],
    count: &mut u64,
) {
    let at = *path.last().unwrap();
    for &next in &graph.adj[at as usize] {
        if next == root && path.len() >= 3 && path[1] < at {
            *count += 1;
            continue;
        }
        if next <= root || on_path[next as usize] || path.len() >= max_len {
            continue;
        }
        on_path[next as usize] = true;
        path.push(next);
        census_dfs(graph, root, max_len, path, on_path, count);
        path.pop();
        on_path[next as usize] = false;
    }
}

/// Densest small subset found, with its witness.
#[derive(Debug, Clone)]
pub struct DensestSubset {
    pub vertices: Vec<u32>,
    pub induced_edges: usize,
    pub ratio: f64,
}

/// Edge density `|E(U)|` of a given vertex set.
pub fn induced_edges(graph: &SmallGraph, vertices: &[u32]) -> usize {
    let set: HashSet<u32> = vertices.iter().copied().collect();
    graph
        .edges
        .iter()
        .filter(|&&(u, v)| set.contains(&u) && set.contains(&v))
        .count()
}

/// Maximum of `|E(U)| / |U|` over the searched family: every subset of
/// size at most `max_size` when `n <= 20`, otherwise BFS balls around each
/// vertex truncated to `max_size`.
pub fn densest_small_subsets(graph: &SmallGraph, max_size: usize) -> DensestSubset {
    let mut best = DensestSubset {
        vertices: Vec::new(),
        induced_edges: 0,
        ratio: 0.0,
    };
    if graph.n <= 20 {
        let n = graph.n as u32;
        for mask in 1u32..(1 << n) {
            if (mask.count_ones() as usize) > max_size {
                continue;
            }
            let vertices: Vec<u32> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            consider(graph, vertices, &mut best);
        }
    } else {
        for start in 0..graph.n as u32 {
            let mut ball = vec![start];
            let mut seen = vec![false; graph.n];
            seen[start as usize] = true;
            let mut frontier = vec![start];
            while !frontier.is_empty() && ball.len() < max_size {
                let mut next = Vec::new();
                for &x in &frontier {
                    for &y in &graph.adj[x as usize] {
                        if !seen[y as usize] && ball.len() < max_size {
                            seen[y as usize] = true;
                            ball.push(y);
                            next.push(y);
                        }
                    }
                }
                consider(graph, ball.clone(), &mut best);
                frontier = next;
            }
            consider(graph, ball, &mut best);
        }
    }
    best
}

fn consider(graph: &SmallGraph, vertices: Vec<u32>, best: &mut DensestSubset) {
    if vertices.is_empty() {
        return;
    }
    let e = induced_edges(graph, &vertices);
    let ratio = e as f64 / vertices.len() as f64;
    if ratio > best.ratio {
        *best = DensestSubset {
            vertices,
            induced_edges: e,
            ratio,
        };
    }
}

/// Iteratively removes vertices of degree below `k`; returns the surviving
/// vertex set and its induced average degree.
pub fn core_peel(graph: &SmallGraph, k: u32) -> (Vec<u32>, f64) {
    let mut degree: Vec<u32> = graph.adj.iter().map(|a| a.len() as u32).collect();
    let mut alive = vec![true; graph.n];
    let mut queue: Vec<u32> = (0..graph.n as u32)
        .filter(|&v| degree[v as usize] < k)
        .collect();
    while let Some(v) = queue.pop() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for &w in &graph.adj[v as usize] {
            if alive[w as usize] {
                degree[w as usize] -= 1;
                if degree[w as usize] < k {
                    queue.push(w);
                }
            }
        }
    }
    let core: Vec<u32> = (0..graph.n as u32).filter(|&v| alive[v as usize]).collect();
    if core.is_empty() {
        return (core, 0.0);
    }
    let edges = graph
        .edges
        .iter()
        .filter(|&&(u, v)| alive[u as usize] && alive[v as usize])
        .count();
    let avg = 2.0 * edges as f64 / core.len() as f64;
    (core, avg)
}

/// The three susceptibilities of a two-colored graph and the slack in the
/// split inequality `S1 + S2 <= S + 1`.
#[derive(Debug, Clone, Copy)]
pub struct SplitSusceptibility {
    pub whole: f64,
    pub split_sum: f64,
    /// `split_sum - (whole + 1)`; at most 0 on forests.
    pub slack: f64,
    /// Fraction of vertices living in cyclic components.
    pub cyclic_fraction: f64,
    /// Whether the inequality holds with the slack allowance appropriate
    /// for the instance (exact on forests, `2 * cyclic_fraction` otherwise).
    pub holds: bool,
}

/// Checks `S(G1) + S(G2) <= S(G) + 1 (+ slack)` by direct component
/// enumeration. The tree case is exact; cyclic components get an additive
/// allowance of twice their vertex fraction.
pub fn split_susceptibility_check(graph: &SmallGraph) -> SplitSusceptibility {
    assert!(graph.colors.is_some(), "split check needs a 2-colored graph");
    let whole = graph.susceptibility();
    let split_sum = graph.color_class(0).susceptibility() + graph.color_class(1).susceptibility();
    let cyclic_fraction = cyclic_vertex_fraction(graph);
    let slack = split_sum - (whole + 1.0);
    let allowance = if cyclic_fraction == 0.0 {
        1e-9
    } else {
        2.0 * cyclic_fraction + 1e-9
    };
    SplitSusceptibility {
        whole,
        split_sum,
        slack,
        cyclic_fraction,
        holds: slack <= allowance,
    }
}

fn cyclic_vertex_fraction(graph: &SmallGraph) -> f64 {
    // a component is cyclic iff its edge count reaches its vertex count
    let mut comp = vec![usize::MAX; graph.n];
    let mut sizes = Vec::new();
    for s in 0..graph.n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[s] = id;
        let mut stack = vec![s as u32];
        let mut size = 0u64;
        while let Some(x) = stack.pop() {
            size += 1;
            for &y in &graph.adj[x as usize] {
                if comp[y as usize] == usize::MAX {
                    comp[y as usize] = id;
                    stack.push(y);
                }
            }
        }
        sizes.push(size);
    }
    let mut edge_count = vec![0u64; sizes.len()];
    for &(u, _) in &graph.edges {
        edge_count[comp[u as usize]] += 1;
    }
    let cyclic: u64 = sizes
        .iter()
        .zip(&edge_count)
        .filter(|&(&s, &e)| e >= s)
        .map(|(&s, _)| s)
        .sum();
    cyclic as f64 / graph.n as f64
}

/// One named check of the verification battery.
#[derive(Debug, Clone)]
pub struct BatteryCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Deterministic structural battery behind the `verify` command: the
/// checkers above on known instances, cross-checks against the orientation
/// and oracle modules, and the split inequality on random forests.
pub fn run_battery() -> Vec<BatteryCheck> {
    use rand::prelude::*;
    let mut out = Vec::new();
    let mut check = |name: &'static str, passed: bool, detail: String| {
        out.push(BatteryCheck {
            name,
            passed,
            detail,
        });
    };

    // path counting on canonical shapes
    let path = SmallGraph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    let cycle = SmallGraph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
    let theta = SmallGraph::new(5, &[(0, 1), (1, 4), (0, 2), (2, 4), (0, 3), (3, 4)]);
    check(
        "count-paths",
        count_paths(&path, 0, 4, 3) == 1
            && count_paths(&cycle, 0, 3, 3) == 2
            && count_paths(&theta, 0, 4, 3) == 3,
        "path/cycle/theta = 1/2/3".into(),
    );

    // essential edges: trees all, cycles none, bridges exactly
    let two_triangles = SmallGraph::new(
        6,
        &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)],
    );
    let tree_ess = essential_edges(&path, &[0, 1, 2, 3, 4]).unwrap().len() == 4;
    let cyc_ess = essential_edges(&cycle, &[0, 1, 2, 3]).unwrap().is_empty();
    let bridge_ess =
        essential_edges(&two_triangles, &[0, 1, 2, 3, 4]).unwrap() == vec![(2, 3)];
    check(
        "essential-edges",
        tree_ess && cyc_ess && bridge_ess,
        "tree all essential, cycle none, bridge only".into(),
    );

    // cycle census on triangle, K4, tree
    let triangle = SmallGraph::new(3, &[(0, 1), (1, 2), (2, 0)]);
    let k4 = SmallGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    let census_ok = short_cycle_census(&triangle, 12).unwrap() == 1
        && short_cycle_census(&k4, 4).unwrap() == 7
        && short_cycle_census(&path, 12).unwrap() == 0;
    check("short-cycle-census", census_ok, "triangle/K4/tree = 1/7/0".into());

    // densest subsets: K4 ratio 3/2, trees below 1
    let k4_best = densest_small_subsets(&k4, 4);
    let tree_best = densest_small_subsets(&path, 5);
    check(
        "densest-subsets",
        (k4_best.ratio - 1.5).abs() < 1e-12 && tree_best.ratio < 1.0,
        format!("K4 ratio {}, tree ratio {}", k4_best.ratio, tree_best.ratio),
    );

    // core peeling
    let k5 = SmallGraph::new(
        5,
        &[
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (1, 2),
            (1, 3),
            (1, 4),
            (2, 3),
            (2, 4),
            (3, 4),
        ],
    );
    let (tree_core, _) = core_peel(&path, 2);
    let (k5_core, k5_avg) = core_peel(&k5, 3);
    check(
        "core-peel",
        tree_core.is_empty() && k5_core.len() == 5 && (k5_avg - 4.0).abs() < 1e-12,
        "tree 2-core empty, K5 3-core intact".into(),
    );

    // split susceptibility: tight tree case and random 2-colored forests
    let single_red = SmallGraph::colored(2, &[(0, 1)], &[1]);
    let tight = split_susceptibility_check(&single_red);
    let mut forests_ok = (tight.split_sum - 3.0).abs() < 1e-12 && tight.holds;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..200 {
        let n = 100usize;
        let mut parent_pool: Vec<u32> = (0..n as u32).collect();
        parent_pool.shuffle(&mut rng);
        let mut edges = Vec::new();
        let mut colors = Vec::new();
        // random forest: attach each vertex to an earlier one with prob 0.7
        for i in 1..n {
            if rng.random::<f64>() < 0.7 {
                let j = rng.random_range(0..i);
                edges.push((parent_pool[i], parent_pool[j]));
                colors.push(rng.random_range(0..2u32));
            }
        }
        let forest = SmallGraph::colored(n, &edges, &colors);
        let split = split_susceptibility_check(&forest);
        if !(split.holds && split.slack <= 1e-9) {
            forests_ok = false;
            break;
        }
    }
    check(
        "split-susceptibility",
        forests_ok,
        "tight on a single edge, holds exactly on forests".into(),
    );

    // density witnesses from infeasible orientations have ratio above r
    let mut witness_ok = true;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xBADD);
    let mut found_infeasible = 0;
    for _ in 0..300 {
        let n = rng.random_range(3..=9usize);
        let m = rng.random_range(n..=3 * n);
        let mut edges = Vec::new();
        for _ in 0..m {
            let u = rng.random_range(0..n as u32);
            let mut v = rng.random_range(0..n as u32 - 1);
            if v >= u {
                v += 1;
            }
            edges.push((u, v));
        }
        let r = rng.random_range(1..=2u32);
        if let crate::orientation::OrientationOutcome::Infeasible(w) =
            crate::orientation::exact_r_orientation(n, &edges, r)
        {
            found_infeasible += 1;
            let g = SmallGraph::new(n, &edges);
            let e = induced_edges(&g, &w.vertices);
            if e != w.induced_edges || (e as f64 / w.vertices.len() as f64) <= r as f64 {
                witness_ok = false;
            }
        }
    }
    check(
        "density-witness",
        witness_ok && found_infeasible > 10,
        format!("{found_infeasible} infeasible instances, all witnesses above r"),
    );

    // advisory metric: essential-edge fraction along a long path of the
    // overflow color class after an orientation-strategy run. The
    // more-than-half statement is asymptotic, so the fraction is recorded
    // rather than asserted.
    {
        use crate::graph_state::ProcessState;
        use crate::strategies::{build_strategy, StrategyKind, StrategySpec};
        let n = 2000usize;
        let r = 3usize;
        let rounds = 2 * r as u64 * n as u64;
        let spec = StrategySpec::new(StrategyKind::Orient, r, 77);
        let mut strategy = build_strategy(&spec, 0).expect("orient strategy");
        let mut state = ProcessState::new(n, r, false).expect("state");
        let mut overflow_edges = Vec::new();
        let stream = crate::edge_sources::EdgeStream::for_trial(
            n,
            78,
            0,
            crate::edge_sources::EdgeModel::ProductRounds { rounds },
        )
        .expect("stream");
        for (u, v) in stream {
            let decision = strategy.decide(u, v, &state);
            let color = decision.color.unwrap();
            state
                .add_oriented_edge(u, v, color, decision.orientation.unwrap())
                .unwrap();
            if color == r as u32 - 1 {
                overflow_edges.push((u.0, v.0));
            }
        }
        let class = SmallGraph::new(n, &overflow_edges);
        let detail = match long_path(&class, 20) {
            Some(path) => {
                let essential = essential_edges(&class, &path).unwrap().len();
                let fraction = essential as f64 / (path.len() - 1) as f64;
                format!(
                    "path of length {} in the overflow class: essential fraction {fraction:.2}",
                    path.len() - 1
                )
            }
            None => "no path of length 20 in the overflow class".to_string(),
        };
        check("orient-essential-fraction", true, detail);
    }

    out
}

/// A simple path of at least `min_len` edges found by a double BFS sweep,
/// if one exists.
fn long_path(graph: &SmallGraph, min_len: usize) -> Option<Vec<u32>> {
    let far = |start: u32| -> (u32, Vec<i64>) {
        let mut parent = vec![-1i64; graph.n];
        let mut seen = vec![false; graph.n];
        seen[start as usize] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut last = start;
        while let Some(x) = queue.pop_front() {
            last = x;
            for &y in &graph.adj[x as usize] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    parent[y as usize] = x as i64;
                    queue.push_back(y);
                }
            }
        }
        (last, parent)
    };
    for start in 0..graph.n as u32 {
        if graph.adj[start as usize].is_empty() {
            continue;
        }
        let (a, _) = far(start);
        let (b, parent) = far(a);
        let mut path = vec![b];
        let mut cur = b;
        while parent[cur as usize] >= 0 {
            cur = parent[cur as usize] as u32;
            path.push(cur);
        }
        if path.len() > min_len {
            path.reverse();
            return Some(path);
        }
    }
    None
}
