//! Projective planes of prime order over `F_q`: points and lines are the
//! 1- and 2-dimensional subspaces of `F_q^3`. The line set partitions the
//! edges of `K_{q^2+q+1}` into cliques of order `q + 1`, which is exactly
//! what the plane coloring strategy needs.

use crate::edge_sources::{pair_count, pair_index};
use crate::{Error, Result};

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone)]
pub struct ProjectivePlane {
    pub q: u32,
    /// `q^2 + q + 1`, the number of points and of lines.
    pub order: usize,
    /// Each line as a sorted list of point indices, `q + 1` per line.
    pub lines: Vec<Vec<u32>>,
    /// Line through each unordered point pair, indexed by colex pair rank.
    pair_to_line: Vec<u32>,
}

impl ProjectivePlane {
    /// The unique line containing two distinct points.
    #[inline]
    pub fn line_through(&self, a: u32, b: u32) -> u32 {
        debug_assert_ne!(a, b);
        self.pair_to_line[pair_index(a, b) as usize]
    }
}

/// Canonical representatives of the 1-dimensional subspaces of `F_q^3`:
/// `(1, y, z)`, then `(0, 1, z)`, then `(0, 0, 1)`.
fn canonical_points(q: u32) -> Vec<[u32; 3]> {
    let mut pts = Vec::with_capacity((q * q + q + 1) as usize);
    for y in 0..q {
        for z in 0..q {
            pts.push([1, y, z]);
        }
    }
    for z in 0..q {
        pts.push([0, 1, z]);
    }
    pts.push([0, 0, 1]);
    pts
}

pub fn build_projective_plane(q: u32) -> Result<ProjectivePlane> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q > 251 {
        return Err(Error::OutOfRange(format!(
            "projective plane of order {q} is beyond desk scale"
        )));
    }
    let points = canonical_points(q);
    let order = points.len();
    debug_assert_eq!(order as u32, q * q + q + 1);

    // the line with normal w collects the points orthogonal to w mod q
    let mut lines = Vec::with_capacity(order);
    for normal in &points {
        let mut line: Vec<u32> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                (p[0] * normal[0] + p[1] * normal[1] + p[2] * normal[2]) % q == 0
            })
            .map(|(i, _)| i as u32)
            .collect();
        line.sort_unstable();
        if line.len() != (q + 1) as usize {
            return Err(Error::Config(format!(
                "degenerate line of size {} in plane of order {q}",
                line.len()
            )));
        }
        lines.push(line);
    }

    let mut pair_to_line = vec![u32::MAX; pair_count(order) as usize];
    for (idx, line) in lines.iter().enumerate() {
        for (i, &a) in line.iter().enumerate() {
            for &b in &line[i + 1..] {
                let slot = &mut pair_to_line[pair_index(a, b) as usize];
                if *slot != u32::MAX {
                    return Err(Error::Config(format!(
                        "points {a}, {b} lie on two lines of the order-{q} plane"
                    )));
                }
                *slot = idx as u32;
            }
        }
    }
    if pair_to_line.contains(&u32::MAX) {
        return Err(Error::Config(format!(
            "point pair not covered by any line in the order-{q} plane"
        )));
    }

    Ok(ProjectivePlane {
        q,
        order,
        lines,
        pair_to_line,
    })
}
