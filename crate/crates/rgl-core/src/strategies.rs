//! The coloring policies behind one contract: given the process state and an
//! incoming edge, produce a color, optionally an orientation, and an audit
//! tag. The offline orientation pipeline lives here too, since it is the
//! offline counterpart of the online rules.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edge_sources::strategy_rng;
use crate::graph_state::{ComponentTracker, ProcessState, VertexClass, VertexId};
use crate::oracles::{build_projective_plane, is_prime, ProjectivePlane};
use crate::orientation::{
    exact_r_orientation, greedy_indeg_coloring, random_orient, DensityWitness, Direction,
    OrientationOutcome,
};
use crate::{Error, Result};

/// Which policy to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StrategyKind {
    /// Color every edge uniformly at random.
    RandomColoring,
    /// Randomly orient, then color by the head's new in-degree, capped.
    Orient,
    /// Two colors; answer adjacent isolated monochromatic edges with the
    /// opposite color, otherwise flip a fair coin.
    IsolatedMatching,
    /// Collect the whole stream, orient offline with max in-degree `r`,
    /// color greedily, then delete each edge with probability `epsilon`.
    OfflineOrientation { epsilon: f64 },
    /// `r = q^2 + q + 1` colors; color by the line through the endpoint
    /// blocks, discarding intra-block edges.
    ProjectivePlane { q: u32 },
    /// Two colors by table lookup on the endpoint blocks.
    BlockMatrix { a1: Vec<Vec<u8>> },
    /// All red until round `t n`, then red exactly inside the touched set.
    AdaptiveTwoPhase { t: f64 },
}

impl StrategyKind {
    /// The `k x k` split with ones on the top-left `t x t` block.
    pub fn block_matrix_top_left(k: usize, t: usize) -> StrategyKind {
        let a1 = (0..k)
            .map(|i| (0..k).map(|j| u8::from(i < t && j < t)).collect())
            .collect();
        StrategyKind::BlockMatrix { a1 }
    }
}

/// A policy plus color count and seed; part of the experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub r: usize,
    #[serde(default)]
    pub seed: u64,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind, r: usize, seed: u64) -> Self {
        StrategySpec { kind, r, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::Config("strategies need r >= 1".into()));
        }
        match &self.kind {
            StrategyKind::RandomColoring | StrategyKind::Orient => Ok(()),
            StrategyKind::IsolatedMatching => {
                if self.r != 2 {
                    return Err(Error::Config(format!(
                        "isolated-matching needs r = 2, got {}",
                        self.r
                    )));
                }
                Ok(())
            }
            StrategyKind::OfflineOrientation { epsilon } => {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::Config(format!(
                        "deletion rate {epsilon} outside [0, 1]"
                    )));
                }
                Ok(())
            }
            StrategyKind::ProjectivePlane { q } => {
                if !is_prime(*q) {
                    return Err(Error::NotPrime(*q));
                }
                let want = (*q as usize) * (*q as usize) + *q as usize + 1;
                if self.r != want {
                    return Err(Error::Config(format!(
                        "plane of order {q} needs r = {want}, got {}",
                        self.r
                    )));
                }
                Ok(())
            }
            StrategyKind::BlockMatrix { a1 } => {
                if self.r != 2 {
                    return Err(Error::Config("block-matrix coloring needs r = 2".into()));
                }
                let k = a1.len();
                if k == 0 || a1.iter().any(|row| row.len() != k) {
                    return Err(Error::Config("block matrix must be square".into()));
                }
                for (i, row) in a1.iter().enumerate() {
                    for (j, &entry) in row.iter().enumerate() {
                        if entry > 1 {
                            return Err(Error::Config("block matrix entries must be 0/1".into()));
                        }
                        if entry != a1[j][i] {
                            return Err(Error::Config("block matrix must be symmetric".into()));
                        }
                    }
                }
                Ok(())
            }
            StrategyKind::AdaptiveTwoPhase { t } => {
                if self.r != 2 {
                    return Err(Error::Config("adaptive two-phase needs r = 2".into()));
                }
                if !(*t > 0.0 && *t < 0.5) {
                    return Err(Error::Config(format!(
                        "phase switch coefficient {t} outside (0, 1/2)"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Audit tag recording which case of a policy fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RationaleTag {
    UniformRandom,
    OrientBelowCap,
    OrientOverflow,
    IsolatedNeighborBlue,
    IsolatedNeighborRed,
    TieRandom,
    FreshRandom,
    PlaneLine,
    PlaneDiscard,
    BlockTable,
    PhaseOneRed,
    BothInR,
    NotBothInR,
}

/// What a strategy decided for one incoming edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    /// `None` discards the edge (it still consumes a round).
    pub color: Option<u32>,
    pub orientation: Option<Direction>,
    pub rationale: RationaleTag,
}

/// Online coloring policy. Colors are 0-based; two-color strategies use
/// color 0 for blue and color 1 for red.
pub trait Strategy: Send {
    fn decide(&mut self, u: VertexId, v: VertexId, state: &ProcessState) -> Decision;
}

/// Instantiates the online strategy for one trial. Offline orientation has
/// no online decision rule; the lab routes it through
/// [`offline_orientation_coloring`] instead.
pub fn build_strategy(spec: &StrategySpec, trial: u64) -> Result<Box<dyn Strategy>> {
    spec.validate()?;
    let rng = strategy_rng(spec.seed, trial);
    match &spec.kind {
        StrategyKind::RandomColoring => Ok(Box::new(RandomColoring {
            r: spec.r as u32,
            rng,
        })),
        StrategyKind::Orient => Ok(Box::new(OrientStrategy {
            r: spec.r as u32,
            rng,
        })),
        StrategyKind::IsolatedMatching => Ok(Box::new(IsolatedMatching { rng })),
        StrategyKind::ProjectivePlane { q } => Ok(Box::new(PlaneStrategy {
            plane: build_projective_plane(*q)?,
        })),
        StrategyKind::BlockMatrix { a1 } => Ok(Box::new(BlockMatrixStrategy { a1: a1.clone() })),
        StrategyKind::AdaptiveTwoPhase { t } => Ok(Box::new(AdaptiveTwoPhase {
            t: *t,
            fixed: None,
        })),
        StrategyKind::OfflineOrientation { .. } => Err(Error::Config(
            "offline orientation is not an online strategy; run the offline pipeline".into(),
        )),
    }
}

pub struct RandomColoring {
    r: u32,
    rng: ChaCha8Rng,
}

impl Strategy for RandomColoring {
    fn decide(&mut self, _u: VertexId, _v: VertexId, _state: &ProcessState) -> Decision {
        Decision {
            color: Some(self.rng.random_range(0..self.r)),
            orientation: None,
            rationale: RationaleTag::UniformRandom,
        }
    }
}

/// Random orientation; let `d` be the head's new in-degree. Colors are
/// 1-based `d` capped at `r` in the usual description; 0-based here, so
/// color `d - 1` below the cap and `r - 1` past it. The in-degree ledger
/// counts every processed edge, repeats included.
pub struct OrientStrategy {
    r: u32,
    rng: ChaCha8Rng,
}

impl Strategy for OrientStrategy {
    fn decide(&mut self, u: VertexId, v: VertexId, state: &ProcessState) -> Decision {
        let dir = random_orient(&mut self.rng);
        let head = dir.head(u, v);
        let d = state.in_degree(head) + 1;
        let (color, rationale) = if d < self.r {
            (d - 1, RationaleTag::OrientBelowCap)
        } else {
            (self.r - 1, RationaleTag::OrientOverflow)
        };
        Decision {
            color: Some(color),
            orientation: Some(dir),
            rationale,
        }
    }
}

/// Two-color avoidance via isolated monochromatic edges. The incident
/// matching colors are read from the pre-edge state; an edge landing on
/// both endpoints of one matching edge therefore sees that single color
/// and answers with the other.
pub struct IsolatedMatching {
    rng: ChaCha8Rng,
}

impl Strategy for IsolatedMatching {
    fn decide(&mut self, u: VertexId, v: VertexId, state: &ProcessState) -> Decision {
        let mut blue_adjacent = false;
        let mut red_adjacent = false;
        for w in [u, v] {
            match state.vertex_class(w) {
                VertexClass::Matched(0) => blue_adjacent = true,
                VertexClass::Matched(_) => red_adjacent = true,
                _ => {}
            }
        }
        let (color, rationale) = match (blue_adjacent, red_adjacent) {
            (true, false) => (1, RationaleTag::IsolatedNeighborBlue),
            (false, true) => (0, RationaleTag::IsolatedNeighborRed),
            (true, true) => (self.rng.random_range(0..2), RationaleTag::TieRandom),
            (false, false) => (self.rng.random_range(0..2), RationaleTag::FreshRandom),
        };
        Decision {
            color: Some(color),
            orientation: None,
            rationale,
        }
    }
}

/// Coloring by projective-plane incidence on vertex blocks. Block `i` is
/// the residue class `v mod r`, so block sizes differ by at most one.
pub struct PlaneStrategy {
    plane: ProjectivePlane,
}

impl Strategy for PlaneStrategy {
    fn decide(&mut self, u: VertexId, v: VertexId, _state: &ProcessState) -> Decision {
        let r = self.plane.order as u32;
        let (bu, bv) = (u.0 % r, v.0 % r);
        if bu == bv {
            return Decision {
                color: None,
                orientation: None,
                rationale: RationaleTag::PlaneDiscard,
            };
        }
        Decision {
            color: Some(self.plane.line_through(bu, bv)),
            orientation: None,
            rationale: RationaleTag::PlaneLine,
        }
    }
}

/// Deterministic two-coloring by a 0/1 block matrix: color 0 where `A1`
/// has a 1 on the endpoint blocks, color 1 otherwise.
pub struct BlockMatrixStrategy {
    a1: Vec<Vec<u8>>,
}

impl Strategy for BlockMatrixStrategy {
    fn decide(&mut self, u: VertexId, v: VertexId, _state: &ProcessState) -> Decision {
        let k = self.a1.len() as u32;
        let (bu, bv) = ((u.0 % k) as usize, (v.0 % k) as usize);
        Decision {
            color: Some(if self.a1[bu][bv] == 1 { 0 } else { 1 }),
            orientation: None,
            rationale: RationaleTag::BlockTable,
        }
    }
}

/// Red for the first `floor(t n)` rounds; then `R` is frozen to the set of
/// vertices with positive degree and an edge is red exactly when both
/// endpoints lie in `R`. Edges at the boundary round are phase one.
pub struct AdaptiveTwoPhase {
    t: f64,
    fixed: Option<Vec<bool>>,
}

impl AdaptiveTwoPhase {
    /// Size of the frozen set, once fixed.
    pub fn fixed_set_size(&self) -> Option<usize> {
        self.fixed
            .as_ref()
            .map(|set| set.iter().filter(|&&b| b).count())
    }
}

impl Strategy for AdaptiveTwoPhase {
    fn decide(&mut self, u: VertexId, v: VertexId, state: &ProcessState) -> Decision {
        let switch = (self.t * state.n() as f64).floor() as u64;
        if state.round() < switch {
            return Decision {
                color: Some(1),
                orientation: None,
                rationale: RationaleTag::PhaseOneRed,
            };
        }
        let fixed = self.fixed.get_or_insert_with(|| {
            (0..state.n())
                .map(|w| state.degree(VertexId(w as u32)) >= 1)
                .collect()
        });
        let both_in = fixed[u.index()] && fixed[v.index()];
        if both_in {
            Decision {
                color: Some(1),
                orientation: None,
                rationale: RationaleTag::BothInR,
            }
        } else {
            Decision {
                color: Some(0),
                orientation: None,
                rationale: RationaleTag::NotBothInR,
            }
        }
    }
}

/// Result of the offline avoidance pipeline on one input graph.
#[derive(Debug, Clone)]
pub enum OfflineOutcome {
    Colored(OfflineColoring),
    /// The input was not `r`-orientable; the witness set certifies it.
    Infeasible(DensityWitness),
}

#[derive(Debug, Clone)]
pub struct OfflineColoring {
    /// Collapsed simple edge list that was oriented and colored.
    pub edges: Vec<(u32, u32)>,
    /// Per-edge color from the greedy in-degree coloring.
    pub colors: Vec<u32>,
    /// Which edges survived the epsilon-deletion.
    pub survived: Vec<bool>,
    /// Largest surviving component per color.
    pub largest_per_color: Vec<u32>,
    /// Susceptibility of each surviving color class.
    pub susceptibility_per_color: Vec<f64>,
}

/// Offline avoidance: exact `r`-orientation, greedy in-degree coloring,
/// then independent deletion of each edge with probability `epsilon`,
/// measuring what survives per color.
pub fn offline_orientation_coloring<R: Rng>(
    n: usize,
    edges: &[(u32, u32)],
    r: u32,
    epsilon: f64,
    rng: &mut R,
) -> Result<OfflineOutcome> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Config(format!("deletion rate {epsilon} outside [0, 1]")));
    }
    let orientation = match exact_r_orientation(n, edges, r) {
        OrientationOutcome::Feasible(o) => o,
        OrientationOutcome::Infeasible(w) => return Ok(OfflineOutcome::Infeasible(w)),
    };
    let colors = greedy_indeg_coloring(&orientation, r)?;
    let survived: Vec<bool> = (0..orientation.edges.len())
        .map(|_| rng.random::<f64>() >= epsilon)
        .collect();
    let mut trackers: Vec<ComponentTracker> =
        (0..r as usize).map(|_| ComponentTracker::new(n)).collect();
    for (i, &(u, v)) in orientation.edges.iter().enumerate() {
        if survived[i] {
            trackers[colors[i] as usize].union(u, v);
        }
    }
    Ok(OfflineOutcome::Colored(OfflineColoring {
        edges: orientation.edges,
        colors,
        survived,
        largest_per_color: trackers.iter().map(|t| t.largest()).collect(),
        susceptibility_per_color: trackers.iter().map(|t| t.susceptibility()).collect(),
    }))
}
