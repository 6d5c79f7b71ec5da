//! Two-chart raster model of the sphere for component detection.
//!
//! Chart 0 is the square |Re z|, |Im z| < 2; chart 1 is the same window in
//! the coordinate w = 1/z.  Every sphere point is interior to at least one
//! chart, and the annulus 1/2 <= |z| <= 2 is seen by both, which is where
//! regions are glued.  The complement of the (dilated) sample is flood
//! filled per chart with 4-connectivity and merged by union-find.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::moebius::SpherePoint;

const CHART_HALF: f64 = 2.0;
/// Tracked regions must cover this fraction of the combined chart pixels;
/// smaller pockets are real but below desk-scale sampling quality.
pub const TRACK_FRACTION: f64 = 0.001;

const UNMARKED: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct RegionInfo {
    pub id: usize,
    /// Free cells across both charts (overlap counted in each).
    pub cells: usize,
    /// Deepest interior cell, as a sphere point.
    pub witness: SpherePoint,
    pub tracked: bool,
}

#[derive(Debug, Clone)]
pub struct SphereRaster {
    pub resolution: usize,
    dilation: usize,
    marked: [Vec<bool>; 2],
    labels: [Vec<u32>; 2],
    final_of_label: Vec<usize>,
    regions: Vec<RegionInfo>,
}

fn chart_coord(chart: usize, p: SpherePoint) -> Option<Complex64> {
    let z = match (chart, p) {
        (0, SpherePoint::Finite(z)) => z,
        (0, SpherePoint::Infinity) => return None,
        (1, SpherePoint::Finite(z)) => {
            if z.norm_sqr() == 0.0 {
                return None;
            }
            z.inv()
        }
        (1, SpherePoint::Infinity) => Complex64::new(0.0, 0.0),
        _ => unreachable!(),
    };
    (z.re >= -CHART_HALF && z.re < CHART_HALF && z.im >= -CHART_HALF && z.im < CHART_HALF)
        .then_some(z)
}

fn cell_of(z: Complex64, res: usize) -> (usize, usize) {
    let step = 2.0 * CHART_HALF / res as f64;
    let col = math::floor((z.re + CHART_HALF) / step) as usize;
    let row = math::floor((CHART_HALF - z.im) / step) as usize;
    (col.min(res - 1), row.min(res - 1))
}

fn cell_center(chart: usize, col: usize, row: usize, res: usize) -> SpherePoint {
    let step = 2.0 * CHART_HALF / res as f64;
    let z = Complex64::new(
        -CHART_HALF + (col as f64 + 0.5) * step,
        CHART_HALF - (row as f64 + 0.5) * step,
    );
    match chart {
        0 => SpherePoint::Finite(z),
        _ => {
            if z.norm_sqr() == 0.0 {
                SpherePoint::Infinity
            } else {
                SpherePoint::Finite(z.inv())
            }
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut r = x;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut c = x;
        while self.parent[c as usize] != r {
            let next = self.parent[c as usize];
            self.parent[c as usize] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, keeping ids stable under merge order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Rasterizes the sample on both charts and flood-fills the complement.
/// Dilation grows with resolution so the marked band keeps a constant
/// chordal width: refining the grid sharpens region boundaries without
/// opening gaps between consecutive sample points.
pub fn detect_components(points: &[SpherePoint], resolution: usize) -> Result<SphereRaster> {
    detect_components_dilated(points, resolution, resolution.div_ceil(128))
}

pub fn detect_components_dilated(
    points: &[SpherePoint],
    resolution: usize,
    dilation: usize,
) -> Result<SphereRaster> {
    if points.is_empty() {
        return Err(Error::invalid("component detection needs a nonempty sample"));
    }
    if resolution < 16 {
        return Err(Error::invalid("raster resolution must be at least 16"));
    }
    let res = resolution;
    let n = res * res;
    let mut marked = [vec![false; n], vec![false; n]];
    for p in points {
        for chart in 0..2 {
            let Some(z) = chart_coord(chart, *p) else {
                continue;
            };
            let (c0, r0) = cell_of(z, res);
            let d = dilation as isize;
            for dr in -d..=d {
                for dc in -d..=d {
                    let (c, r) = (c0 as isize + dc, r0 as isize + dr);
                    if c >= 0 && r >= 0 && (c as usize) < res && (r as usize) < res {
                        marked[chart][r as usize * res + c as usize] = true;
                    }
                }
            }
        }
    }

    // Per-chart flood fill with labels unique across charts.
    let mut labels = [vec![UNMARKED; n], vec![UNMARKED; n]];
    let mut next_label: u32 = 0;
    let mut stack: Vec<usize> = Vec::new();
    for chart in 0..2 {
        for start in 0..n {
            if marked[chart][start] || labels[chart][start] != UNMARKED {
                continue;
            }
            let label = next_label;
            next_label += 1;
            labels[chart][start] = label;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (r, c) = (idx / res, idx % res);
                let mut push = |rr: usize, cc: usize, labels: &mut [Vec<u32>; 2]| {
                    let j = rr * res + cc;
                    if !marked[chart][j] && labels[chart][j] == UNMARKED {
                        labels[chart][j] = label;
                        stack.push(j);
                    }
                };
                if r > 0 {
                    push(r - 1, c, &mut labels);
                }
                if r + 1 < res {
                    push(r + 1, c, &mut labels);
                }
                if c > 0 {
                    push(r, c - 1, &mut labels);
                }
                if c + 1 < res {
                    push(r, c + 1, &mut labels);
                }
            }
        }
    }

    // Glue charts through the overlap annulus.
    let mut uf = UnionFind::new(next_label as usize);
    for idx in 0..n {
        if marked[0][idx] || labels[0][idx] == UNMARKED {
            continue;
        }
        let (r, c) = (idx / res, idx % res);
        let center = match cell_center(0, c, r, res) {
            SpherePoint::Finite(z) => z,
            SpherePoint::Infinity => continue,
        };
        let m = center.norm();
        if !(0.5..=2.0).contains(&m) {
            continue;
        }
        let w = center.inv();
        if let Some(zw) = chart_coord(1, SpherePoint::Finite(center)) {
            debug_assert!((zw - w).norm() < 1e-12);
            let (cc, rr) = cell_of(zw, res);
            let j = rr * res + cc;
            if !marked[1][j] && labels[1][j] != UNMARKED {
                uf.union(labels[0][idx], labels[1][j]);
            }
        }
    }

    // Final ids in order of first appearance, chart 0 then chart 1.
    let mut final_of_root: Vec<Option<usize>> = vec![None; next_label as usize];
    let mut order: Vec<u32> = Vec::new();
    for chart in 0..2 {
        for idx in 0..n {
            let l = labels[chart][idx];
            if l == UNMARKED {
                continue;
            }
            let root = uf.find(l);
            if final_of_root[root as usize].is_none() {
                final_of_root[root as usize] = Some(order.len());
                order.push(root);
            }
        }
    }
    let mut final_of_label: Vec<usize> = vec![usize::MAX; next_label as usize];
    for l in 0..next_label {
        final_of_label[l as usize] = final_of_root[uf.find(l) as usize].unwrap();
    }

    // Cell counts and BFS depth witnesses.
    let region_count = order.len();
    let mut cells = vec![0usize; region_count];
    for chart in 0..2 {
        for idx in 0..n {
            let l = labels[chart][idx];
            if l != UNMARKED {
                cells[final_of_label[l as usize]] += 1;
            }
        }
    }
    let mut best_depth = vec![-1i32; region_count];
    let mut witness = vec![SpherePoint::Infinity; region_count];
    for chart in 0..2 {
        let dist = bfs_depth(&marked[chart], res);
        for idx in 0..n {
            let l = labels[chart][idx];
            if l == UNMARKED {
                continue;
            }
            let f = final_of_label[l as usize];
            if dist[idx] > best_depth[f] {
                best_depth[f] = dist[idx];
                witness[f] = cell_center(chart, idx % res, idx / res, res);
            }
        }
    }

    let min_cells = ((2 * n) as f64 * TRACK_FRACTION) as usize;
    let regions = (0..region_count)
        .map(|id| RegionInfo {
            id,
            cells: cells[id],
            witness: witness[id],
            tracked: cells[id] >= min_cells.max(1),
        })
        .collect();

    Ok(SphereRaster {
        resolution: res,
        dilation,
        marked,
        labels,
        final_of_label,
        regions,
    })
}

/// 4-connected BFS distance from marked cells and the chart border.
fn bfs_depth(marked: &[bool], res: usize) -> Vec<i32> {
    let n = res * res;
    let mut dist = vec![i32::MAX; n];
    let mut queue: Vec<usize> = Vec::new();
    for idx in 0..n {
        let (r, c) = (idx / res, idx % res);
        let border = r == 0 || c == 0 || r == res - 1 || c == res - 1;
        if marked[idx] {
            dist[idx] = 0;
            queue.push(idx);
        } else if border {
            dist[idx] = 1;
            queue.push(idx);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let idx = queue[head];
        head += 1;
        let (r, c) = (idx / res, idx % res);
        let d = dist[idx];
        let relax = |j: usize, dist: &mut Vec<i32>, queue: &mut Vec<usize>| {
            if dist[j] == i32::MAX {
                dist[j] = d + 1;
                queue.push(j);
            }
        };
        if r > 0 {
            relax(idx - res, &mut dist, &mut queue);
        }
        if r + 1 < res {
            relax(idx + res, &mut dist, &mut queue);
        }
        if c > 0 {
            relax(idx - 1, &mut dist, &mut queue);
        }
        if c + 1 < res {
            relax(idx + 1, &mut dist, &mut queue);
        }
    }
    for d in dist.iter_mut() {
        if *d == i32::MAX {
            *d = 0;
        }
    }
    dist
}

impl SphereRaster {
    pub fn regions(&self) -> &[RegionInfo] {
        &self.regions
    }

    pub fn tracked_regions(&self) -> impl Iterator<Item = &RegionInfo> {
        self.regions.iter().filter(|r| r.tracked)
    }

    pub fn tracked_count(&self) -> usize {
        self.regions.iter().filter(|r| r.tracked).count()
    }

    pub fn untracked_ids(&self) -> Vec<usize> {
        self.regions
            .iter()
            .filter(|r| !r.tracked)
            .map(|r| r.id)
            .collect()
    }

    /// Region containing the point, or None when it lands on the marked
    /// band in every chart that sees it.
    pub fn locate(&self, p: SpherePoint) -> Option<usize> {
        for chart in 0..2 {
            let Some(z) = chart_coord(chart, p) else {
                continue;
            };
            let (c, r) = cell_of(z, self.resolution);
            let idx = r * self.resolution + c;
            let l = self.labels[chart][idx];
            if !self.marked[chart][idx] && l != UNMARKED {
                return Some(self.final_of_label[l as usize]);
            }
        }
        None
    }

    /// Region ids seen within a small ring around the point's cells: for a
    /// sample point on a boundary this lists the regions it borders.
    pub fn adjacent_region_ids(&self, p: SpherePoint) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let radius = (self.dilation + 1) as isize;
        for chart in 0..2 {
            let Some(z) = chart_coord(chart, p) else {
                continue;
            };
            let (c0, r0) = cell_of(z, self.resolution);
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    let (c, r) = (c0 as isize + dc, r0 as isize + dr);
                    if c < 0 || r < 0 {
                        continue;
                    }
                    let (c, r) = (c as usize, r as usize);
                    if c >= self.resolution || r >= self.resolution {
                        continue;
                    }
                    let idx = r * self.resolution + c;
                    let l = self.labels[chart][idx];
                    if !self.marked[chart][idx] && l != UNMARKED {
                        out.insert(self.final_of_label[l as usize]);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::chordal_dist;

    fn circle_sample(n: usize) -> Vec<SpherePoint> {
        (0..n)
            .map(|k| {
                let t = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
                SpherePoint::finite(math::cos(t), math::sin(t))
            })
            .collect()
    }

    fn real_line_sample(n: usize) -> Vec<SpherePoint> {
        (0..n)
            .map(|k| {
                let theta = core::f64::consts::PI * (2.0 * k as f64 / n as f64 - 1.0);
                if math::abs(theta.abs() - core::f64::consts::PI) < 1e-12 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::finite(math::sin(theta / 2.0) / math::cos(theta / 2.0), 0.0)
                }
            })
            .collect()
    }

    #[test]
    fn unit_circle_gives_inside_and_outside() {
        let raster = detect_components(&circle_sample(512), 128).unwrap();
        assert_eq!(raster.tracked_count(), 2);
        let inside = raster.locate(SpherePoint::finite(0.0, 0.0)).unwrap();
        let outside = raster.locate(SpherePoint::Infinity).unwrap();
        assert_ne!(inside, outside);
        assert_eq!(raster.locate(SpherePoint::finite(3.0, 0.0)), Some(outside));
        assert_eq!(
            raster.locate(SpherePoint::finite(0.2, -0.3)),
            Some(inside)
        );
    }

    #[test]
    fn two_points_leave_one_region() {
        let pts = [SpherePoint::finite(0.0, 0.0), SpherePoint::Infinity];
        let raster = detect_components(&pts, 96).unwrap();
        assert_eq!(raster.tracked_count(), 1);
        let a = raster.locate(SpherePoint::finite(1.0, 0.0)).unwrap();
        let b = raster.locate(SpherePoint::finite(-5.0, 5.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn real_line_splits_half_planes_across_charts() {
        let raster = detect_components(&real_line_sample(1024), 128).unwrap();
        assert_eq!(raster.tracked_count(), 2);
        let upper = raster.locate(SpherePoint::finite(0.0, 1.0)).unwrap();
        let lower = raster.locate(SpherePoint::finite(0.0, -1.0)).unwrap();
        assert_ne!(upper, lower);
        // Points far out in either half plane glue through the second chart
        // (chart 0 cannot see them; 1/z swaps the half planes).
        assert_eq!(raster.locate(SpherePoint::finite(3.0, 4.0)), Some(upper));
        assert_eq!(raster.locate(SpherePoint::finite(-3.0, -4.0)), Some(lower));
    }

    #[test]
    fn witnesses_sit_deep_inside_regions() {
        let raster = detect_components(&real_line_sample(1024), 128).unwrap();
        for region in raster.tracked_regions() {
            match region.witness {
                SpherePoint::Finite(z) => {
                    assert!(z.im.abs() > 0.3, "witness too close to the line: {z}")
                }
                SpherePoint::Infinity => panic!("witness at infinity for a half plane"),
            }
            assert_eq!(raster.locate(region.witness), Some(region.id));
        }
    }

    #[test]
    fn boundary_points_are_adjacent_to_both_half_planes() {
        let raster = detect_components(&real_line_sample(1024), 128).unwrap();
        let adj = raster.adjacent_region_ids(SpherePoint::finite(0.3, 0.0));
        assert_eq!(adj.len(), 2);
        let adj_inf = raster.adjacent_region_ids(SpherePoint::Infinity);
        assert_eq!(adj_inf.len(), 2);
        // An interior point is adjacent to its own region only.
        let adj_interior = raster.adjacent_region_ids(SpherePoint::finite(0.0, 1.5));
        assert_eq!(adj_interior.len(), 1);
    }

    #[test]
    fn region_count_is_stable_under_doubling() {
        let pts = circle_sample(1024);
        let low = detect_components(&pts, 96).unwrap();
        let high = detect_components(&pts, 192).unwrap();
        assert_eq!(low.tracked_count(), high.tracked_count());
    }

    #[test]
    fn chart_coords_cover_every_point() {
        let pts = [
            SpherePoint::finite(0.0, 0.0),
            SpherePoint::finite(1.9, -1.9),
            SpherePoint::finite(100.0, 3.0),
            SpherePoint::Infinity,
            SpherePoint::finite(0.0, 2.0),
        ];
        for p in pts {
            assert!(
                chart_coord(0, p).is_some() || chart_coord(1, p).is_some(),
                "{p} not covered"
            );
        }
    }

    #[test]
    fn cell_centers_invert_cell_of() {
        for (col, row) in [(0usize, 0usize), (63, 63), (17, 40)] {
            let p = cell_center(0, col, row, 64);
            let SpherePoint::Finite(z) = p else {
                panic!()
            };
            assert_eq!(cell_of(z, 64), (col, row));
            // Chart-1 center round trip stays in the same chart-1 cell.
            let q = cell_center(1, col, row, 64);
            let z1 = chart_coord(1, q).unwrap();
            assert_eq!(cell_of(z1, 64), (col, row));
            assert!(chordal_dist(p, p) == 0.0);
        }
    }
}
