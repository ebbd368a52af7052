//! Incremental state of a colored multigraph under construction: one
//! union-find forest per color with exact sum-of-squares bookkeeping, the
//! vertex partition into isolated / blue-matching / red-matching / rest,
//! per-vertex degrees, the orientation ledger, and an optional append-only
//! edge log for replay.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::orientation::Direction;
use crate::{Error, Result};

/// Index of a vertex, in `[0, n)` for the configured vertex count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// What a single edge insertion did to one color class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeReport {
    /// True iff the endpoints were in distinct components of this color.
    pub was_merge: bool,
    /// Component sizes of the two endpoints before the union.
    pub sizes_before: (u32, u32),
}

/// Union-find over one color class with component sizes, the exact integer
/// sum of squared component sizes, and the largest component.
///
/// `sum_sq / n` is the susceptibility; keeping `sum_sq` as an integer makes
/// the merge increment `2ab` assertable bit-for-bit. Union by size with
/// path compression; size metadata lives only at roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentTracker {
    parent: Vec<u32>,
    size: Vec<u32>,
    sum_sq: u64,
    largest: u32,
    n: usize,
}

impl ComponentTracker {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= u32::MAX as usize, "vertex count out of range");
        ComponentTracker {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            sum_sq: n as u64,
            largest: 1,
            n,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn find(&mut self, v: u32) -> u32 {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = v;
        while cur != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Unites the components of `u` and `v`. On a real merge of sizes `a`
    /// and `b`, `sum_sq` increases by exactly `2ab`.
    pub fn union(&mut self, u: u32, v: u32) -> MergeReport {
        let mut ru = self.find(u);
        let mut rv = self.find(v);
        if ru == rv {
            let s = self.size[ru as usize];
            return MergeReport {
                was_merge: false,
                sizes_before: (s, s),
            };
        }
        let (a, b) = (self.size[ru as usize], self.size[rv as usize]);
        if self.size[ru as usize] < self.size[rv as usize] {
            std::mem::swap(&mut ru, &mut rv);
        }
        self.parent[rv as usize] = ru;
        let merged = self.size[ru as usize] + self.size[rv as usize];
        self.size[ru as usize] = merged;
        self.sum_sq += 2 * a as u64 * b as u64;
        self.largest = self.largest.max(merged);
        MergeReport {
            was_merge: true,
            sizes_before: (a, b),
        }
    }

    pub fn component_size(&mut self, v: u32) -> u32 {
        let root = self.find(v);
        self.size[root as usize]
    }

    #[inline]
    pub fn sum_sq(&self) -> u64 {
        self.sum_sq
    }

    #[inline]
    pub fn largest(&self) -> u32 {
        self.largest
    }

    /// Exact `sum_sq / n`; one division, no accumulation drift.
    #[inline]
    pub fn susceptibility(&self) -> f64 {
        self.sum_sq as f64 / self.n as f64
    }

    /// Sizes of all components, in no particular order.
    pub fn component_sizes(&mut self) -> Vec<u32> {
        let mut out = Vec::new();
        for v in 0..self.n as u32 {
            if self.find(v) == v {
                out.push(self.size[v as usize]);
            }
        }
        out
    }

    /// Labels every vertex with the smallest vertex of its component.
    pub fn canonical_labels(&mut self) -> Vec<u32> {
        let mut min_of_root = vec![u32::MAX; self.n];
        for v in 0..self.n as u32 {
            let root = self.find(v) as usize;
            min_of_root[root] = min_of_root[root].min(v);
        }
        (0..self.n as u32)
            .map(|v| min_of_root[self.parent[v as usize] as usize])
            .collect()
    }

    /// Internal consistency: root sizes sum to `n`, `sum_sq` matches the
    /// roots, and the largest component is the max root size.
    pub fn validate(&mut self) -> bool {
        let sizes = self.component_sizes();
        let total: u64 = sizes.iter().map(|&s| s as u64).sum();
        let sq: u64 = sizes.iter().map(|&s| s as u64 * s as u64).sum();
        let max = sizes.iter().copied().max().unwrap_or(0);
        total == self.n as u64 && sq == self.sum_sq && max == self.largest
    }

    /// Fits a `K, c` exponential bound to the empirical component tail:
    /// `c` by least squares on the log-tail over sizes with mass at least
    /// `10/n`, then `K` minimal so that `K e^{-cs}` dominates pointwise.
    /// An all-singleton state returns the `(e, 1)` convention.
    pub fn fit_component_tail(&mut self) -> TailFit {
        let n = self.n as f64;
        let sizes = self.component_sizes();
        let max = sizes.iter().copied().max().unwrap_or(1) as usize;

        // mass[s] = number of vertices living in components of order exactly s
        let mut mass = vec![0u64; max + 1];
        for &s in &sizes {
            mass[s as usize] += s as u64;
        }
        let mut tail = vec![0.0f64; max];
        let mut suffix = 0u64;
        for s in (1..=max).rev() {
            suffix += mass[s];
            tail[s - 1] = suffix as f64 / n;
        }

        if max == 1 {
            return TailFit {
                k: std::f64::consts::E,
                c: 1.0,
                max_component: 1,
                empirical_tail: tail,
            };
        }

        let floor = 10.0 / n;
        let pts: Vec<(f64, f64)> = (1..=max)
            .filter(|&s| tail[s - 1] >= floor)
            .map(|s| (s as f64, tail[s - 1].ln()))
            .collect();
        let c = if pts.len() >= 2 {
            let m = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let sy: f64 = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let num: f64 = pts.iter().map(|p| (p.0 - sx) * (p.1 - sy)).sum();
            let den: f64 = pts.iter().map(|p| (p.0 - sx) * (p.0 - sx)).sum();
            (-(num / den)).max(1e-12)
        } else {
            1.0
        };
        // minimal K with K e^{-cs} >= tail(s) for every observed s
        let ln_k = (1..=max)
            .filter(|&s| tail[s - 1] > 0.0)
            .map(|s| tail[s - 1].ln() + c * s as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        TailFit {
            k: ln_k.exp(),
            c,
            max_component: max as u32,
            empirical_tail: tail,
        }
    }
}

/// Fitted exponential bound on the component-size tail.
#[derive(Debug, Clone)]
pub struct TailFit {
    pub k: f64,
    pub c: f64,
    pub max_component: u32,
    /// `empirical_tail[s-1]` = fraction of vertices in components of order
    /// at least `s`, for `s = 1..=max_component`.
    pub empirical_tail: Vec<f64>,
}

impl TailFit {
    /// True iff `K e^{-cs}` dominates the empirical tail at every observed s.
    pub fn dominates_pointwise(&self) -> bool {
        self.empirical_tail
            .iter()
            .enumerate()
            .all(|(i, &t)| self.k * (-self.c * (i + 1) as f64).exp() >= t - 1e-12)
    }
}

/// Partition of the vertex set maintained on every edge: isolated vertices,
/// vertices on single-edge components of color 0 (blue) or color 1 (red),
/// and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingCounts {
    pub isolated: u64,
    pub blue: u64,
    pub red: u64,
    pub rest: u64,
}

/// Where a vertex currently sits in the matching partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass {
    Isolated,
    /// On a component that is exactly one edge of the given color (0 or 1).
    Matched(u32),
    Rest,
}

/// One line of the edge log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub round: u64,
    pub u: u32,
    pub v: u32,
    /// `None` for a discarded edge.
    pub color: Option<u32>,
    pub orient: Option<Direction>,
}

/// The evolving colored multigraph: one [`ComponentTracker`] per color,
/// total degrees, the in-degree ledger for orientation strategies, matching
/// counters, the round counter, and the optional edge log.
///
/// Single-threaded by design; run one `ProcessState` per trial.
#[derive(Debug, Clone)]
pub struct ProcessState {
    n: usize,
    r: usize,
    per_color: Vec<ComponentTracker>,
    degree: Vec<u32>,
    in_degree: Vec<u32>,
    class: Vec<VertexClass>,
    partner: Vec<u32>,
    counts: MatchingCounts,
    round: u64,
    edge_log: Option<Vec<EdgeRecord>>,
}

impl ProcessState {
    pub fn new(n: usize, r: usize, log: bool) -> Result<Self> {
        if n == 0 || r == 0 {
            return Err(Error::Config(format!(
                "process state needs n >= 1 and r >= 1, got n = {n}, r = {r}"
            )));
        }
        if n > u32::MAX as usize {
            return Err(Error::Config(format!("n = {n} exceeds the u32 vertex range")));
        }
        Ok(ProcessState {
            n,
            r,
            per_color: (0..r).map(|_| ComponentTracker::new(n)).collect(),
            degree: vec![0; n],
            in_degree: vec![0; n],
            class: vec![VertexClass::Isolated; n],
            partner: vec![u32::MAX; n],
            counts: MatchingCounts {
                isolated: n as u64,
                blue: 0,
                red: 0,
                rest: 0,
            },
            round: 0,
            edge_log: if log { Some(Vec::new()) } else { None },
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn colors(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn round(&self) -> u64 {
        self.round
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[v.index()]
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> u32 {
        self.in_degree[v.index()]
    }

    #[inline]
    pub fn vertex_class(&self, v: VertexId) -> VertexClass {
        self.class[v.index()]
    }

    #[inline]
    pub fn matching_counts(&self) -> MatchingCounts {
        self.counts
    }

    pub fn tracker(&self, color: u32) -> &ComponentTracker {
        &self.per_color[color as usize]
    }

    pub fn tracker_mut(&mut self, color: u32) -> &mut ComponentTracker {
        &mut self.per_color[color as usize]
    }

    pub fn susceptibility(&self, color: u32) -> f64 {
        self.per_color[color as usize].susceptibility()
    }

    pub fn largest_fraction(&self, color: u32) -> f64 {
        self.per_color[color as usize].largest() as f64 / self.n as f64
    }

    pub fn fit_component_tail(&mut self, color: u32) -> TailFit {
        self.per_color[color as usize].fit_component_tail()
    }

    pub fn edge_log(&self) -> Option<&[EdgeRecord]> {
        self.edge_log.as_deref()
    }

    fn check_edge(&self, u: VertexId, v: VertexId, color: Option<u32>) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u.0));
        }
        for w in [u, v] {
            if w.index() >= self.n {
                return Err(Error::VertexRange { vertex: w.0, n: self.n });
            }
        }
        if let Some(c) = color {
            if c as usize >= self.r {
                return Err(Error::ColorRange { color: c, r: self.r });
            }
        }
        Ok(())
    }

    /// Adds an edge in the given color and updates every ledger. Returns the
    /// merge report of that color class. Repeated edges within one color
    /// report `was_merge = false`; degrees still increment.
    pub fn add_colored_edge(&mut self, u: VertexId, v: VertexId, color: u32) -> Result<MergeReport> {
        self.insert(u, v, Some(color), None).map(Option::unwrap)
    }

    /// Like [`Self::add_colored_edge`], additionally recording the
    /// orientation and incrementing the head's in-degree.
    pub fn add_oriented_edge(
        &mut self,
        u: VertexId,
        v: VertexId,
        color: u32,
        direction: Direction,
    ) -> Result<MergeReport> {
        self.insert(u, v, Some(color), Some(direction)).map(Option::unwrap)
    }

    /// Consumes a round without touching the graph (block-diagonal edges of
    /// the plane strategy). Logged with the sentinel color.
    pub fn discard_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        self.insert(u, v, None, None).map(|_| ())
    }

    fn insert(
        &mut self,
        u: VertexId,
        v: VertexId,
        color: Option<u32>,
        orient: Option<Direction>,
    ) -> Result<Option<MergeReport>> {
        self.check_edge(u, v, color)?;
        let report = if let Some(c) = color {
            self.update_partition(u, v, c);
            self.degree[u.index()] += 1;
            self.degree[v.index()] += 1;
            if let Some(dir) = orient {
                let head = dir.head(u, v);
                self.in_degree[head.index()] += 1;
            }
            Some(self.per_color[c as usize].union(u.0, v.0))
        } else {
            None
        };
        if let Some(log) = self.edge_log.as_mut() {
            log.push(EdgeRecord {
                round: self.round,
                u: u.0,
                v: v.0,
                color,
                orient,
            });
        }
        self.round += 1;
        debug_assert!(
            self.counts.isolated + self.counts.blue + self.counts.red + self.counts.rest
                == self.n as u64
        );
        Ok(report)
    }

    // Classifies both endpoints before the merge. The only same-component
    // case that changes counters is a repeat landing on a matching edge,
    // detected via the partner pointer; no union-graph DSU is needed.
    fn update_partition(&mut self, u: VertexId, v: VertexId, color: u32) {
        let (ui, vi) = (u.index(), v.index());
        if let VertexClass::Matched(c0) = self.class[ui] {
            if self.partner[ui] == v.0 {
                self.demote_matched(c0);
                self.class[ui] = VertexClass::Rest;
                self.class[vi] = VertexClass::Rest;
                return;
            }
        }
        let before = (self.class[ui], self.class[vi]);
        for w in [ui, vi] {
            match self.class[w] {
                VertexClass::Isolated => {
                    self.counts.isolated -= 1;
                    self.counts.rest += 1;
                    self.class[w] = VertexClass::Rest;
                }
                VertexClass::Matched(c0) => {
                    self.demote_matched(c0);
                    let p = self.partner[w] as usize;
                    self.class[w] = VertexClass::Rest;
                    self.class[p] = VertexClass::Rest;
                }
                VertexClass::Rest => {}
            }
        }
        if before == (VertexClass::Isolated, VertexClass::Isolated) && color < 2 {
            self.counts.rest -= 2;
            if color == 0 {
                self.counts.blue += 2;
            } else {
                self.counts.red += 2;
            }
            self.class[ui] = VertexClass::Matched(color);
            self.class[vi] = VertexClass::Matched(color);
            self.partner[ui] = v.0;
            self.partner[vi] = u.0;
        }
    }

    fn demote_matched(&mut self, color: u32) {
        if color == 0 {
            self.counts.blue -= 2;
        } else {
            self.counts.red -= 2;
        }
        self.counts.rest += 2;
    }

    /// Serializes the edge log, one `round,u,v,color,orient` record per line.
    pub fn write_edge_log<W: Write>(&self, mut w: W) -> Result<()> {
        let log = self.edge_log.as_ref().ok_or_else(|| {
            Error::Config("edge log was not enabled for this state".into())
        })?;
        let mut line = String::new();
        for rec in log {
            line.clear();
            let _ = write!(line, "{},{},{},", rec.round, rec.u, rec.v);
            match rec.color {
                Some(c) => {
                    let _ = write!(line, "{c}");
                }
                None => line.push('-'),
            }
            line.push(',');
            line.push_str(match rec.orient {
                Some(Direction::Uv) => "uv",
                Some(Direction::Vu) => "vu",
                None => "-",
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Parses an edge log written by [`ProcessState::write_edge_log`].
pub fn parse_edge_log<R: BufRead>(r: R) -> Result<Vec<EdgeRecord>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let err = |msg: &str| Error::LogParse {
            line: idx + 1,
            msg: msg.to_string(),
        };
        if fields.len() != 5 {
            return Err(err("expected 5 comma-separated fields"));
        }
        let round = fields[0].parse().map_err(|_| err("bad round"))?;
        let u = fields[1].parse().map_err(|_| err("bad u"))?;
        let v = fields[2].parse().map_err(|_| err("bad v"))?;
        let color = match fields[3] {
            "-" => None,
            s => Some(s.parse().map_err(|_| err("bad color"))?),
        };
        let orient = match fields[4] {
            "-" => None,
            "uv" => Some(Direction::Uv),
            "vu" => Some(Direction::Vu),
            _ => return Err(err("bad orientation")),
        };
        out.push(EdgeRecord {
            round,
            u,
            v,
            color,
            orient,
        });
    }
    Ok(out)
}

/// Rebuilds a state by replaying a log; identical logs yield identical
/// trackers.
pub fn replay(n: usize, r: usize, records: &[EdgeRecord], log: bool) -> Result<ProcessState> {
    let mut state = ProcessState::new(n, r, log)?;
    for rec in records {
        match rec.color {
            Some(c) => {
                state.insert(VertexId(rec.u), VertexId(rec.v), Some(c), rec.orient)?;
            }
            None => state.discard_edge(VertexId(rec.u), VertexId(rec.v))?,
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: component statistics recomputed from scratch by
    /// BFS over an explicit edge list.
    fn bfs_stats(n: usize, edges: &[(u32, u32)]) -> (u64, u32, Vec<u32>) {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut seen = vec![false; n];
        let mut sum_sq = 0u64;
        let mut largest = 0u32;
        let mut sizes = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut queue = vec![s as u32];
            seen[s] = true;
            let mut size = 0u32;
            while let Some(x) = queue.pop() {
                size += 1;
                for &y in &adj[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        queue.push(y);
                    }
                }
            }
            sum_sq += size as u64 * size as u64;
            largest = largest.max(size);
            sizes.push(size);
        }
        sizes.sort_unstable();
        (sum_sq, largest, sizes)
    }

    #[test]
    fn new_state_empty_invariants() {
        let state = ProcessState::new(4, 2, false).unwrap();
        for c in 0..2 {
            assert_eq!(state.susceptibility(c), 1.0);
        }
        assert_eq!(state.matching_counts().isolated, 4);
        assert_eq!(state.round(), 0);

        let one = ProcessState::new(1, 1, false).unwrap();
        assert_eq!(one.susceptibility(0), 1.0);
        assert_eq!(one.tracker(0).largest(), 1);
    }

    #[test]
    fn new_state_rejects_zero() {
        assert!(ProcessState::new(0, 2, false).is_err());
        assert!(ProcessState::new(4, 0, false).is_err());
    }

    #[test]
    fn new_state_scale_smoke() {
        let state = ProcessState::new(1_000_000, 7, false).unwrap();
        assert_eq!(state.round(), 0);
        assert_eq!(state.colors(), 7);
    }

    #[test]
    fn first_edge_susceptibility() {
        let mut state = ProcessState::new(4, 2, false).unwrap();
        assert_eq!(state.tracker(0).sum_sq(), 4);
        let rep = state.add_colored_edge(VertexId(0), VertexId(1), 0).unwrap();
        assert!(rep.was_merge);
        assert_eq!(state.tracker(0).sum_sq(), 6);
        assert_eq!(state.susceptibility(0), 1.5);
        // repeat: no structural change, round still advances
        let rep = state.add_colored_edge(VertexId(0), VertexId(1), 0).unwrap();
        assert!(!rep.was_merge);
        assert_eq!(state.tracker(0).sum_sq(), 6);
        assert_eq!(state.round(), 2);
    }

    #[test]
    fn merge_increment_identity() {
        // blue components {3, 2, 1} on n = 6
        let mut state = ProcessState::new(6, 1, false).unwrap();
        state.add_colored_edge(VertexId(0), VertexId(1), 0).unwrap();
        state.add_colored_edge(VertexId(1), VertexId(2), 0).unwrap();
        state.add_colored_edge(VertexId(3), VertexId(4), 0).unwrap();
        let before = state.tracker(0).sum_sq();
        let rep = state.add_colored_edge(VertexId(2), VertexId(3), 0).unwrap();
        assert!(rep.was_merge);
        assert_eq!(rep.sizes_before, (3, 2));
        assert_eq!(state.tracker(0).sum_sq() - before, 12);
    }

    #[test]
    fn susceptibility_path_on_ten() {
        let mut state = ProcessState::new(100, 2, false).unwrap();
        let mut edges = Vec::new();
        for i in 0..9u32 {
            state.add_colored_edge(VertexId(i), VertexId(i + 1), 0).unwrap();
            edges.push((i, i + 1));
        }
        let (sum_sq, _, _) = bfs_stats(100, &edges);
        assert_eq!(state.tracker(0).sum_sq(), sum_sq);
        assert_eq!(state.susceptibility(0), 1.9);
    }

    #[test]
    fn self_loop_rejected() {
        let mut state = ProcessState::new(4, 2, false).unwrap();
        assert!(matches!(
            state.add_colored_edge(VertexId(2), VertexId(2), 0),
            Err(Error::SelfLoop(2))
        ));
        assert!(matches!(
            state.add_colored_edge(VertexId(0), VertexId(9), 0),
            Err(Error::VertexRange { .. })
        ));
        assert!(matches!(
            state.add_colored_edge(VertexId(0), VertexId(1), 5),
            Err(Error::ColorRange { .. })
        ));
    }

    #[test]
    fn dsu_matches_bfs_on_random_scripts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xD5);
        for _ in 0..60 {
            let n = rng.random_range(2..=200usize);
            let r = rng.random_range(1..=3usize);
            let m = rng.random_range(0..=3 * n);
            let mut state = ProcessState::new(n, r, false).unwrap();
            let mut per_color: Vec<Vec<(u32, u32)>> = vec![Vec::new(); r];
            for _ in 0..m {
                let u = rng.random_range(0..n as u32);
                let mut v = rng.random_range(0..n as u32 - 1);
                if v >= u {
                    v += 1;
                }
                let c = rng.random_range(0..r as u32);
                state.add_colored_edge(VertexId(u), VertexId(v), c).unwrap();
                per_color[c as usize].push((u, v));
            }
            for (c, edges) in per_color.iter().enumerate() {
                let (sum_sq, largest, mut sizes) = bfs_stats(n, edges);
                let tracker = state.tracker_mut(c as u32);
                assert_eq!(tracker.sum_sq(), sum_sq);
                assert_eq!(tracker.largest(), largest);
                let mut got = tracker.component_sizes();
                got.sort_unstable();
                sizes.sort_unstable();
                assert_eq!(got, sizes);
                assert!(tracker.validate());
            }
        }
    }

    #[test]
    fn dsu_matches_bfs_after_every_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF00);
        for _ in 0..10 {
            let n = rng.random_range(2..=50usize);
            let r = rng.random_range(1..=2usize);
            let mut state = ProcessState::new(n, r, false).unwrap();
            let mut per_color: Vec<Vec<(u32, u32)>> = vec![Vec::new(); r];
            for _ in 0..rng.random_range(1..=150usize) {
                let u = rng.random_range(0..n as u32);
                let mut v = rng.random_range(0..n as u32 - 1);
                if v >= u {
                    v += 1;
                }
                let c = rng.random_range(0..r as u32);
                state.add_colored_edge(VertexId(u), VertexId(v), c).unwrap();
                per_color[c as usize].push((u, v));
                for (color, edges) in per_color.iter().enumerate() {
                    let (sum_sq, largest, sizes) = bfs_stats(n, edges);
                    let tracker = state.tracker(color as u32);
                    assert_eq!(tracker.sum_sq(), sum_sq);
                    assert_eq!(tracker.largest(), largest);
                    assert_eq!(sizes.iter().map(|&s| s as u64).sum::<u64>(), n as u64);
                }
            }
        }
    }

    #[test]
    fn largest_bounded_by_root_n_times_susceptibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 500usize;
        let mut state = ProcessState::new(n, 2, false).unwrap();
        for _ in 0..800 {
            let u = rng.random_range(0..n as u32);
            let mut v = rng.random_range(0..n as u32 - 1);
            if v >= u {
                v += 1;
            }
            let c = rng.random_range(0..2u32);
            state.add_colored_edge(VertexId(u), VertexId(v), c).unwrap();
            for color in 0..2 {
                let t = state.tracker(color);
                let bound = (n as f64 * t.susceptibility()).sqrt();
                assert!(t.largest() as f64 <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn matching_partition_transitions() {
        let mut state = ProcessState::new(8, 2, false).unwrap();
        // blue isolated edge
        state.add_colored_edge(VertexId(0), VertexId(1), 0).unwrap();
        let c = state.matching_counts();
        assert_eq!((c.isolated, c.blue, c.red, c.rest), (6, 2, 0, 0));
        assert_eq!(state.vertex_class(VertexId(0)), VertexClass::Matched(0));
        // red isolated edge
        state.add_colored_edge(VertexId(2), VertexId(3), 1).unwrap();
        let c = state.matching_counts();
        assert_eq!((c.isolated, c.blue, c.red, c.rest), (4, 2, 2, 0));
        // touching the blue matching edge with an isolated vertex kills it
        state.add_colored_edge(VertexId(1), VertexId(4), 1).unwrap();
        let c = state.matching_counts();
        assert_eq!((c.isolated, c.blue, c.red, c.rest), (3, 0, 2, 3));
        // repeat landing exactly on the red matching edge
        state.add_colored_edge(VertexId(2), VertexId(3), 0).unwrap();
        let c = state.matching_counts();
        assert_eq!((c.isolated, c.blue, c.red, c.rest), (3, 0, 0, 5));
        assert_eq!(c.isolated + c.blue + c.red + c.rest, 8);
    }

    #[test]
    fn matching_partition_matches_scan() {
        // partition counters vs. a from-scratch component scan
        let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
        for _ in 0..40 {
            let n = rng.random_range(4..=60usize);
            let mut state = ProcessState::new(n, 2, false).unwrap();
            let mut edges: Vec<(u32, u32, u32)> = Vec::new();
            for _ in 0..rng.random_range(0..=2 * n) {
                let u = rng.random_range(0..n as u32);
                let mut v = rng.random_range(0..n as u32 - 1);
                if v >= u {
                    v += 1;
                }
                let c = rng.random_range(0..2u32);
                state.add_colored_edge(VertexId(u), VertexId(v), c).unwrap();
                edges.push((u, v, c));
            }
            let mut deg = vec![0u32; n];
            let mut multiplicity = std::collections::HashMap::new();
            for &(u, v, c) in &edges {
                deg[u as usize] += 1;
                deg[v as usize] += 1;
                let key = (u.min(v), u.max(v));
                multiplicity.entry(key).or_insert_with(Vec::new).push(c);
            }
            let mut blue = 0u64;
            let mut red = 0u64;
            let isolated = deg.iter().filter(|&&d| d == 0).count() as u64;
            for (&(u, v), colors) in &multiplicity {
                // single-edge component: both endpoints degree 1, one copy
                if colors.len() == 1 && deg[u as usize] == 1 && deg[v as usize] == 1 {
                    if colors[0] == 0 {
                        blue += 2;
                    } else {
                        red += 2;
                    }
                }
            }
            let counts = state.matching_counts();
            assert_eq!(counts.isolated, isolated);
            assert_eq!(counts.blue, blue);
            assert_eq!(counts.red, red);
            assert_eq!(counts.rest, n as u64 - isolated - blue - red);
        }
    }

    #[test]
    fn tail_fit_degenerate_and_single_component() {
        let mut empty = ComponentTracker::new(50);
        let fit = empty.fit_component_tail();
        assert_eq!(fit.k, std::f64::consts::E);
        assert_eq!(fit.c, 1.0);
        assert!(fit.dominates_pointwise());
        assert_eq!(fit.empirical_tail[0], 1.0);

        // single component of size n: c near zero, bound still pointwise valid
        let mut full = ComponentTracker::new(40);
        for v in 1..40 {
            full.union(0, v);
        }
        let fit = full.fit_component_tail();
        assert!(fit.c < 1e-6);
        assert!(fit.dominates_pointwise());
        assert_eq!(fit.max_component, 40);
    }

    #[test]
    fn tail_fit_dominates_on_random_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000usize;
        let mut tracker = ComponentTracker::new(n);
        for _ in 0..(2 * n / 5) {
            let u = rng.random_range(0..n as u32);
            let mut v = rng.random_range(0..n as u32 - 1);
            if v >= u {
                v += 1;
            }
            tracker.union(u, v);
        }
        let fit = tracker.fit_component_tail();
        assert!(fit.dominates_pointwise());
        assert_eq!(fit.empirical_tail[0], 1.0);
        for w in fit.empirical_tail.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn edge_log_round_trip_and_replay() {
        let mut state = ProcessState::new(10, 2, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let u = rng.random_range(0..10u32);
            let mut v = rng.random_range(0..9u32);
            if v >= u {
                v += 1;
            }
            match rng.random_range(0..3u32) {
                0 => {
                    state.add_colored_edge(VertexId(u), VertexId(v), 0).unwrap();
                }
                1 => {
                    state
                        .add_oriented_edge(VertexId(u), VertexId(v), 1, Direction::Vu)
                        .unwrap();
                }
                _ => state.discard_edge(VertexId(u), VertexId(v)).unwrap(),
            }
        }
        let mut buf = Vec::new();
        state.write_edge_log(&mut buf).unwrap();
        let records = parse_edge_log(&buf[..]).unwrap();
        assert_eq!(records.as_slice(), state.edge_log().unwrap());

        let replayed = replay(10, 2, &records, false).unwrap();
        assert_eq!(replayed.round(), state.round());
        for c in 0..2 {
            assert_eq!(replayed.tracker(c), state.tracker(c));
        }
        assert_eq!(replayed.matching_counts(), state.matching_counts());
    }

    proptest! {
        #[test]
        fn prop_merge_reports_2ab(script in proptest::collection::vec((0u32..30, 0u32..30, 0u32..2), 0..120)) {
            let mut state = ProcessState::new(30, 2, false).unwrap();
            for (u, v, c) in script {
                if u == v {
                    continue;
                }
                let before = state.tracker(c).sum_sq();
                let rep = state.add_colored_edge(VertexId(u), VertexId(v), c).unwrap();
                let delta = state.tracker(c).sum_sq() - before;
                if rep.was_merge {
                    let (a, b) = rep.sizes_before;
                    prop_assert_eq!(delta, 2 * a as u64 * b as u64);
                } else {
                    prop_assert_eq!(delta, 0);
                }
            }
            let counts = state.matching_counts();
            prop_assert_eq!(counts.isolated + counts.blue + counts.red + counts.rest, 30);
            prop_assert_eq!(counts.blue % 2, 0);
            prop_assert_eq!(counts.red % 2, 0);
        }
    }
}
