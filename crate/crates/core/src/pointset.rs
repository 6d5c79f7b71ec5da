//! Spatial indexing for sphere point clouds.
//!
//! Points are embedded in R^3 via stereographic projection, where the
//! chordal metric becomes plain Euclidean distance, and binned into a cubic
//! grid.  Nearest-neighbour queries expand in Chebyshev rings around the
//! query cell: every point in a cell at ring k is at least (k-1)*cell away,
//! so a search can stop as soon as that lower bound passes the best hit or
//! the caller's cap.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math;
use crate::moebius::SpherePoint;

#[derive(Debug, Clone)]
pub struct ChordalIndex {
    cell: f64,
    bins: BTreeMap<(i32, i32, i32), Vec<u32>>,
    pts: Vec<[f64; 3]>,
}

impl ChordalIndex {
    /// Cell size should be at least the tolerance the index is queried at;
    /// queries within one cell then only ever touch the 3^3 neighbourhood.
    pub fn new(cell: f64) -> Self {
        debug_assert!(cell > 0.0);
        ChordalIndex {
            cell,
            bins: BTreeMap::new(),
            pts: Vec::new(),
        }
    }

    pub fn with_points(cell: f64, points: &[SpherePoint]) -> Self {
        let mut idx = ChordalIndex::new(cell);
        for p in points {
            idx.insert(*p);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    fn key_of(&self, v: [f64; 3]) -> (i32, i32, i32) {
        (
            math::floor(v[0] / self.cell) as i32,
            math::floor(v[1] / self.cell) as i32,
            math::floor(v[2] / self.cell) as i32,
        )
    }

    pub fn insert(&mut self, p: SpherePoint) {
        let v = p.to_unit_vec3();
        let id = self.pts.len() as u32;
        self.pts.push(v);
        self.bins.entry(self.key_of(v)).or_default().push(id);
    }

    /// Inserts unless an existing point lies within `tol`; returns whether
    /// the point was new.  Requires tol <= cell so ring 1 suffices.
    pub fn insert_if_absent(&mut self, p: SpherePoint, tol: f64) -> bool {
        debug_assert!(tol <= self.cell + 1e-15);
        if self.min_dist_capped(p, tol).is_some() {
            return false;
        }
        self.insert(p);
        true
    }

    /// Distance to the nearest indexed point if it is <= cap, else None.
    pub fn min_dist_capped(&self, p: SpherePoint, cap: f64) -> Option<f64> {
        if self.pts.is_empty() {
            return None;
        }
        let v = p.to_unit_vec3();
        let q = self.key_of(v);
        let mut best = f64::INFINITY;
        // The embedding lives in [-1,1]^3, so rings past the grid span are empty.
        let span = (2.0 / self.cell) as i32 + 2;
        let mut k: i32 = 0;
        while k <= span {
            let lower = (k - 1).max(0) as f64 * self.cell;
            if lower > cap || lower >= best {
                break;
            }
            self.scan_ring(q, k, v, &mut best);
            k += 1;
        }
        if best <= cap {
            Some(best)
        } else {
            None
        }
    }

    /// Unconditional nearest distance; infinity only for an empty index.
    pub fn min_dist(&self, p: SpherePoint) -> f64 {
        self.min_dist_capped(p, f64::INFINITY).unwrap_or(f64::INFINITY)
    }

    fn scan_ring(&self, q: (i32, i32, i32), k: i32, v: [f64; 3], best: &mut f64) {
        for dx in -k..=k {
            for dy in -k..=k {
                for dz in -k..=k {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != k {
                        continue;
                    }
                    let key = (q.0 + dx, q.1 + dy, q.2 + dz);
                    if let Some(ids) = self.bins.get(&key) {
                        for &id in ids {
                            let w = self.pts[id as usize];
                            let d = dist3(v, w);
                            if d < *best {
                                *best = d;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    math::sqrt(dx * dx + dy * dy + dz * dz)
}

/// Distance from q to the segment [a, b] in the sphere's ambient space,
/// where chordal distance is plain Euclidean distance.
pub fn seg_dist3(q: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let aq = [q[0] - a[0], q[1] - a[1], q[2] - a[2]];
    let ab2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = if ab2 > 0.0 {
        ((aq[0] * ab[0] + aq[1] * ab[1] + aq[2] * ab[2]) / ab2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist3(q, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

/// sup over `from` of the distance to the nearest point of `to`, unless it
/// exceeds `cap` at some point, in which case None (early exit).
pub fn directed_hausdorff_capped(
    from: &[SpherePoint],
    to: &ChordalIndex,
    cap: f64,
) -> Option<f64> {
    let mut worst: f64 = 0.0;
    for p in from {
        let d = to.min_dist_capped(*p, cap)?;
        if d > worst {
            worst = d;
        }
    }
    Some(worst)
}

/// Symmetric Hausdorff distance with early exit past `cap`.
pub fn hausdorff_capped(a: &[SpherePoint], b: &[SpherePoint], cap: f64) -> Option<f64> {
    // Cell size of cap keeps ring searches shallow; floor it so tiny caps do
    // not explode the grid extent.
    let cell = cap.clamp(1e-4, 0.25);
    let ib = ChordalIndex::with_points(cell, b);
    let ia = ChordalIndex::with_points(cell, a);
    let d1 = directed_hausdorff_capped(a, &ib, cap)?;
    let d2 = directed_hausdorff_capped(b, &ia, cap)?;
    Some(d1.max(d2))
}

/// Exact symmetric Hausdorff distance (no cap).  Brute force: the indexed
/// ring search degenerates when distances are large relative to the cell,
/// and this is only called on modest reporting-size sets.
pub fn hausdorff(a: &[SpherePoint], b: &[SpherePoint]) -> f64 {
    let va: Vec<[f64; 3]> = a.iter().map(|p| p.to_unit_vec3()).collect();
    let vb: Vec<[f64; 3]> = b.iter().map(|p| p.to_unit_vec3()).collect();
    let directed = |from: &[[f64; 3]], to: &[[f64; 3]]| -> f64 {
        let mut worst: f64 = 0.0;
        for p in from {
            let mut best = f64::INFINITY;
            for q in to {
                let d = dist3(*p, *q);
                if d < best {
                    best = d;
                }
            }
            if best > worst {
                worst = best;
            }
        }
        worst
    };
    directed(&va, &vb).max(directed(&vb, &va))
}

/// Order-preserving dedup at tolerance `tol`: keeps the first of any
/// cluster of mutually close points.
pub fn dedup(points: &[SpherePoint], tol: f64) -> Vec<SpherePoint> {
    let mut idx = ChordalIndex::new(tol.max(1e-12));
    let mut out = Vec::new();
    for p in points {
        if idx.insert_if_absent(*p, tol) {
            out.push(*p);
        }
    }
    out
}
