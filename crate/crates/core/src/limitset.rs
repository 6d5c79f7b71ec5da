//! Limit-set sampling, quasicircle extraction with cyclic ordering, and
//! viewport rasterization.
//!
//! Points are harvested as attracting fixed points of enumerated words.
//! When a word's image disc bound drops below the prune threshold the
//! subtree is cut and the word's orbit point stands in for everything
//! below it.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fuchsian::{self, FixedAngles};
use crate::group::{enumerate_from, GroupSpec, Letter, Step, Word};
use crate::math;
use crate::moebius::{chordal_dist, MoebiusMap, SpherePoint};
use crate::pointset::{self, ChordalIndex};
use crate::tolerances::TOL_PT;

/// How a sample point was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointTag {
    /// Attracting (or parabolic) fixed point of an enumerated word.
    FixedPoint,
    /// Image of the base point under a pruned word.
    Orbit,
}

#[derive(Debug, Clone)]
pub struct LimitSample {
    points: Vec<SpherePoint>,
    tags: Vec<PointTag>,
    pub depth: u32,
    pub prune_eps: f64,
}

impl LimitSample {
    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn tags(&self) -> &[PointTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Worst symmetric Hausdorff defect between the sample and its image
    /// under a generator; None when some generator pushes past `cap`.
    pub fn invariance_defect(&self, spec: &GroupSpec, cap: f64) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for gen in spec.generators() {
            let d = crate::group::sample_invariance_defect(&gen.map, &self.points, cap)?;
            worst = worst.max(d);
        }
        Some(worst)
    }
}

const BASE_POINT: SpherePoint = SpherePoint::Finite(Complex64::new(0.0, 0.0));

/// Raw harvest over the subtree of `prefix`: no dedup, deterministic
/// depth-first order.  The pieces from the identity's one-letter subtrees
/// concatenate (in slot order) to the full traversal, which is how the
/// caller may parallelize.
pub fn collect_raw(
    spec: &GroupSpec,
    prefix: &Word,
    depth: u32,
    prune_eps: f64,
) -> Result<Vec<(SpherePoint, PointTag)>> {
    let mut out: Vec<(SpherePoint, PointTag)> = Vec::new();
    enumerate_from(spec, prefix, depth, |w| {
        if w.is_empty() {
            return Step::Continue;
        }
        if let Some(p) = w.map.limit_fixed_point() {
            out.push((p, PointTag::FixedPoint));
        }
        if w.radius < prune_eps {
            out.push((w.map.apply(BASE_POINT), PointTag::Orbit));
            return Step::Prune;
        }
        Step::Continue
    })?;
    Ok(out)
}

/// Dedup a raw harvest into a sample, first occurrence wins.
pub fn assemble(
    raw: impl IntoIterator<Item = (SpherePoint, PointTag)>,
    depth: u32,
    prune_eps: f64,
) -> Result<LimitSample> {
    let mut index = ChordalIndex::new(TOL_PT);
    let mut points = Vec::new();
    let mut tags = Vec::new();
    for (p, t) in raw {
        if index.insert_if_absent(p, TOL_PT) {
            points.push(p);
            tags.push(t);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyGroup);
    }
    Ok(LimitSample {
        points,
        tags,
        depth,
        prune_eps,
    })
}

/// Attracting fixed points of all non-elliptic words up to `depth`, with
/// derivative pruning at chordal radius `prune_eps`.
pub fn compute_limit(spec: &GroupSpec, depth: u32, prune_eps: f64) -> Result<LimitSample> {
    if depth < 1 {
        return Err(Error::invalid("limit sampling needs depth >= 1"));
    }
    // Slot-partitioned traversal: identical output whether the partitions
    // run here sequentially or on worker threads upstream.
    let mut raw = Vec::new();
    for slot in 0..spec.rank() * 2 {
        let prefix = spec.word(&[Letter::from_slot(slot)])?;
        raw.extend(collect_raw(spec, &prefix, depth, prune_eps)?);
    }
    assemble(raw, depth, prune_eps)
}

/// Cyclically ordered boundary sample of a quasi-Fuchsian subgroup's limit
/// set.  `witness` is an interior point of a complementary region, also
/// used as the projection pole for the simplicity check.
#[derive(Debug, Clone)]
pub struct Quasicircle {
    points: Vec<SpherePoint>,
    witness: SpherePoint,
}

/// Rough cap on stored quasicircle points.  Ordered samples are thinned by
/// accumulated chordal arc, so dense runs shrink to an even step while
/// points bracketing sparse stretches survive and the inscribed polyline
/// stays close to the curve everywhere.
pub const MAX_QUASICIRCLE_POINTS: usize = 2048;

impl Quasicircle {
    /// Validates simplicity in the witness projection and normalizes the
    /// orientation so the stored order is positive there.
    pub fn from_ordered_points(points: Vec<SpherePoint>, witness: SpherePoint) -> Result<Self> {
        if points.len() < crate::tolerances::MIN_QUASICIRCLE_POINTS {
            return Err(Error::InsufficientSample {
                got: points.len(),
                need: crate::tolerances::MIN_QUASICIRCLE_POINTS,
            });
        }
        let proj = witness_projection(witness)?;
        let plane = project_all(&proj, &points)?;
        let mut points = points;
        if signed_area(&plane) < 0.0 {
            points.reverse();
        }
        let plane = project_all(&proj, &points)?;
        if !polygon_is_simple(&plane) {
            return Err(Error::OrderingFailed);
        }
        Ok(Quasicircle { points, witness })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn witness(&self) -> SpherePoint {
        self.witness
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self, cell: f64) -> ChordalIndex {
        ChordalIndex::with_points(cell, &self.points)
    }

    /// Largest gap left by `cover` along this curve: the directed Hausdorff
    /// distance from the curve sample into the covering set.
    pub fn covering_defect(&self, cover: &[SpherePoint], cap: f64) -> Option<f64> {
        let idx = ChordalIndex::with_points(cap.clamp(1e-4, 0.25), cover);
        pointset::directed_hausdorff_capped(&self.points, &idx, cap)
    }

    /// True when every query lies within `tol` of the closed polyline
    /// through the stored points.  Testing against the polyline rather
    /// than the vertex set keeps the answer honest where the boundary
    /// sample is chordally sparse (near poles of the harvesting words).
    /// Each search resumes just behind the previous hit, so cyclically
    /// coherent query streams cost near-linear time in total.
    pub fn covers_curve<I>(&self, queries: I, tol: f64) -> bool
    where
        I: IntoIterator<Item = SpherePoint>,
    {
        let verts: Vec<[f64; 3]> = self.points.iter().map(|p| p.to_unit_vec3()).collect();
        let n = verts.len();
        // A point within tol of the polyline is within tol + longest
        // edge / 2 of some vertex, so a capped vertex query rejects far
        // queries without scanning segments.
        let mut max_edge = 0.0f64;
        for i in 0..n {
            max_edge = max_edge.max(chordal_dist(self.points[i], self.points[(i + 1) % n]));
        }
        let cap = tol + max_edge * 0.5 + 1e-12;
        let index = ChordalIndex::with_points(cap.clamp(1e-4, 0.25), &self.points);
        let mut hint = 0usize;
        for q in queries {
            if index.min_dist_capped(q, cap).is_none() {
                return false;
            }
            let qv = q.to_unit_vec3();
            let mut found = false;
            for k in 0..n {
                let i = (hint + n - 2 + k) % n;
                if pointset::seg_dist3(qv, verts[i], verts[(i + 1) % n]) <= tol {
                    hint = i;
                    found = true;
                    break;
                }
            }
            if !found {
                return false;
            }
        }
        true
    }
}

/// Möbius map sending the witness to infinity, so the curve becomes a
/// bounded planar polygon.
pub fn witness_projection(witness: SpherePoint) -> Result<MoebiusMap> {
    match witness {
        SpherePoint::Infinity => Ok(MoebiusMap::identity()),
        SpherePoint::Finite(w) => MoebiusMap::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            -w,
        ),
    }
}

fn project_all(proj: &MoebiusMap, points: &[SpherePoint]) -> Result<Vec<Complex64>> {
    points
        .iter()
        .map(|p| match proj.apply(*p) {
            SpherePoint::Finite(z) => Ok(z),
            SpherePoint::Infinity => Err(Error::OrderingFailed),
        })
        .collect()
}

fn signed_area(poly: &[Complex64]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        acc += p.re * q.im - q.re * p.im;
    }
    acc / 2.0
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 * o2 < 0.0) && (o3 * o4 < 0.0)
}

/// No two non-adjacent edges of the closed polygon properly cross.
pub fn polygon_is_simple(poly: &[Complex64]) -> bool {
    let n = poly.len();
    if n < 4 {
        return true;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 2)..n {
            // Skip the shared-vertex neighbour, including the wrap pair.
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Interior point of the fattest complementary region: the candidate
/// direction (over a fixed Fibonacci sphere grid) farthest from the sample.
pub fn far_witness(points: &[SpherePoint]) -> SpherePoint {
    const CANDIDATES: usize = 2000;
    let idx = ChordalIndex::with_points(0.05, points);
    let golden = core::f64::consts::PI * (3.0 - math::sqrt(5.0));
    let mut best = SpherePoint::Infinity;
    let mut best_d = -1.0;
    for i in 0..CANDIDATES {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / CANDIDATES as f64;
        let r = math::sqrt((1.0 - z * z).max(0.0));
        let phi = golden * i as f64;
        let cand = SpherePoint::from_unit_vec3([r * math::cos(phi), r * math::sin(phi), z]);
        let d = idx.min_dist_capped(cand, 2.1).unwrap_or(0.0);
        if d > best_d {
            best_d = d;
            best = cand;
        }
    }
    best
}

/// Thins a cyclically ordered sample to about `cap` points by accumulated
/// chordal arc.  A point is kept once at least `perimeter / cap` of arc has
/// passed since the last keeper, so any original edge longer than the step
/// keeps an endpoint on each side within one step.
fn arc_decimate(points: &[SpherePoint], cap: usize) -> Vec<SpherePoint> {
    if points.len() <= cap {
        return points.to_vec();
    }
    let n = points.len();
    let mut perimeter = 0.0;
    for i in 0..n {
        perimeter += chordal_dist(points[i], points[(i + 1) % n]);
    }
    let step = perimeter / cap as f64;
    let mut kept = Vec::with_capacity(cap + 1);
    kept.push(points[0]);
    let mut acc = 0.0;
    for i in 1..n {
        acc += chordal_dist(points[i - 1], points[i]);
        if acc >= step {
            kept.push(points[i]);
            acc = 0.0;
        }
    }
    kept
}

/// Thins an unordered sample to at most `cap` points with a chordal net,
/// widening the net cell until the survivors fit.  Keeps first-seen
/// representatives, so the result is deterministic in input order.
fn net_thin(points: &[SpherePoint], cap: usize) -> Vec<SpherePoint> {
    if points.len() <= cap {
        return points.to_vec();
    }
    let mut tol = 1.0 / cap as f64;
    loop {
        let mut index = ChordalIndex::new(tol);
        let mut kept = Vec::new();
        for &p in points {
            if index.insert_if_absent(p, tol) {
                kept.push(p);
            }
        }
        if kept.len() <= cap {
            return kept;
        }
        tol *= 1.6;
    }
}

/// Orders a deduplicated boundary sample into a cyclic polygon.  When model
/// angles are supplied (one per point) the cyclic order is theirs; without
/// them the points are projected from the witness, sorted by angle around
/// their centroid, and smoothed by 2-opt before validation.
pub fn order_boundary_sample(
    points: &[SpherePoint],
    witness: SpherePoint,
    angles: Option<&[f64]>,
) -> Result<Quasicircle> {
    if points.len() < crate::tolerances::MIN_QUASICIRCLE_POINTS {
        return Err(Error::InsufficientSample {
            got: points.len(),
            need: crate::tolerances::MIN_QUASICIRCLE_POINTS,
        });
    }
    let ordered: Vec<SpherePoint> = match angles {
        Some(angles) => {
            debug_assert_eq!(angles.len(), points.len());
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&i, &j| angles[i].total_cmp(&angles[j]));
            order.into_iter().map(|i| points[i]).collect()
        }
        None => {
            let points = net_thin(points, 2 * MAX_QUASICIRCLE_POINTS);
            let points = &points[..];
            let proj = witness_projection(witness)?;
            let plane = project_all(&proj, points)?;
            let n = plane.len() as f64;
            let centroid = plane.iter().sum::<Complex64>() / n;
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&i, &j| {
                let ai = math::atan2(plane[i].im - centroid.im, plane[i].re - centroid.re);
                let aj = math::atan2(plane[j].im - centroid.im, plane[j].re - centroid.re);
                ai.total_cmp(&aj)
            });
            let mut cycle: Vec<Complex64> = order.iter().map(|&i| plane[i]).collect();
            let mut perm = order;
            two_opt_smooth(&mut cycle, &mut perm);
            perm.into_iter().map(|i| points[i]).collect()
        }
    };
    let ordered = arc_decimate(&ordered, MAX_QUASICIRCLE_POINTS);
    Quasicircle::from_ordered_points(ordered, witness)
}

/// Full 2-opt: reverse any run that shortens the tour, to local optimum.
/// A 2-opt-optimal tour in the plane has no crossing edges, so a dense
/// sample of a Jordan curve comes out in traversal order even when the
/// centroid angle sort interleaves folded arms.
fn two_opt_smooth(cycle: &mut [Complex64], perm: &mut [usize]) {
    let n = cycle.len();
    if n < 5 {
        return;
    }
    const SWEEPS: usize = 200;
    for _ in 0..SWEEPS {
        let mut improved = false;
        for i in 0..n - 2 {
            let a = cycle[i];
            let b = cycle[i + 1];
            let dab = (a - b).norm();
            let jmax = if i == 0 { n - 1 } else { n };
            for j in i + 2..jmax {
                let c = cycle[j];
                let d = cycle[(j + 1) % n];
                let old = dab + (c - d).norm();
                let new = (a - c).norm() + (b - d).norm();
                if new + 1e-12 < old {
                    cycle[i + 1..=j].reverse();
                    perm[i + 1..=j].reverse();
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Limit sample of the subgroup generated by the named generators, ordered
/// into a quasicircle.  When the subgroup carries a full model the cyclic
/// order comes from the boundary correspondence; otherwise from the
/// projection procedure.
pub fn subgroup_quasicircle(
    spec: &GroupSpec,
    sub_labels: &[&str],
    depth: u32,
) -> Result<Quasicircle> {
    let sub = spec.subgroup(sub_labels)?;
    let prune = crate::tolerances::PRUNE_EPS;
    // Harvest points with their model angles where available.
    let mut index = ChordalIndex::new(TOL_PT);
    let mut points: Vec<SpherePoint> = Vec::new();
    let mut angles: Vec<Option<f64>> = Vec::new();
    for slot in 0..sub.rank() * 2 {
        let prefix = sub.word(&[Letter::from_slot(slot)])?;
        enumerate_from(&sub, &prefix, depth, |w| {
            let mut verdict = Step::Continue;
            if w.radius < prune {
                verdict = Step::Prune;
            }
            let Some(p) = w.map.limit_fixed_point() else {
                return verdict;
            };
            if !index.insert_if_absent(p, TOL_PT) {
                return verdict;
            }
            let angle = sub
                .phi_of_word(&w.to_word())
                .ok()
                .and_then(|phi| boundary_angle_of(&phi));
            points.push(p);
            angles.push(angle);
            verdict
        })?;
    }
    if points.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let witness = far_witness(&points);
    if angles.iter().all(|a| a.is_some()) {
        let angle_vals: Vec<f64> = angles.into_iter().map(|a| a.unwrap()).collect();
        order_boundary_sample(&points, witness, Some(&angle_vals))
    } else {
        order_boundary_sample(&points, witness, None)
    }
}

/// Attracting (or parabolic) boundary angle of a real model map.
fn boundary_angle_of(phi: &MoebiusMap) -> Option<f64> {
    match fuchsian::real_fixed_angles(phi) {
        Ok(Some(FixedAngles::Two { attracting, .. })) => Some(attracting),
        Ok(Some(FixedAngles::One(a))) => Some(a),
        _ => None,
    }
}

/// Axis-aligned plane window for rasterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Viewport {
    pub fn square(center: Complex64, half: f64) -> Self {
        Viewport {
            x_min: center.re - half,
            y_min: center.im - half,
            x_max: center.re + half,
            y_max: center.im + half,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x_min && z.re < self.x_max && z.im >= self.y_min && z.im < self.y_max
    }
}

/// Row-major bit raster; row 0 is the top of the image.
#[derive(Debug, Clone, PartialEq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    bits: Vec<bool>,
}

impl Bitmap {
    pub fn new(width: usize, height: usize) -> Self {
        Bitmap {
            width,
            height,
            bits: alloc::vec![false; width * height],
        }
    }

    pub fn set(&mut self, col: usize, row: usize) {
        if col < self.width && row < self.height {
            self.bits[row * self.width + col] = true;
        }
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn lit_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn lit_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |row| {
            (0..self.width).filter_map(move |col| self.get(col, row).then_some((col, row)))
        })
    }
}

/// One-pixel stamps for every finite sample point inside the viewport.
pub fn rasterize(points: &[SpherePoint], viewport: Viewport, width: usize, height: usize) -> Bitmap {
    let mut bmp = Bitmap::new(width, height);
    let dx = (viewport.x_max - viewport.x_min) / width as f64;
    let dy = (viewport.y_max - viewport.y_min) / height as f64;
    if dx <= 0.0 || dy <= 0.0 {
        return bmp;
    }
    for p in points {
        let SpherePoint::Finite(z) = p else { continue };
        if !viewport.contains(*z) {
            continue;
        }
        let col = math::floor((z.re - viewport.x_min) / dx) as usize;
        let row = math::floor((viewport.y_max - z.im) / dy) as usize;
        bmp.set(col.min(width - 1), row.min(height - 1));
    }
    bmp
}

impl GroupSpec {
    /// Spec restricted to a subset of generators, keeping their model
    /// entries and the relevant adjunction history.
    pub fn subgroup(&self, labels: &[&str]) -> Result<GroupSpec> {
        let mut gens = Vec::with_capacity(labels.len());
        let mut model: Vec<(&str, MoebiusMap)> = Vec::new();
        let mut square_only: Vec<&str> = Vec::new();
        for &l in labels {
            let idx = self.index_of(l)?;
            gens.push((l, self.generators()[idx].map));
            if let Some(m) = self.fuchsian_model() {
                match m.entry(idx) {
                    crate::group::ModelEntry::Direct(phi) => model.push((l, phi)),
                    crate::group::ModelEntry::SquareOnly(phi_sq) => {
                        square_only.push(l);
                        model.push((l, phi_sq));
                    }
                    crate::group::ModelEntry::Absent => {}
                }
            }
        }
        let mut sub = GroupSpec::from_maps(&gens)?;
        if !model.is_empty() {
            sub = sub.with_fuchsian_model(&model)?;
            // Degrade the adjoined entries back to square-only coverage.
            for l in square_only {
                sub.degrade_model_entry(l)?;
            }
        }
        for adj in self.adjunctions() {
            if labels.contains(&adj.label.as_str()) {
                sub.push_adjunction_record(adj.clone());
            }
        }
        Ok(sub)
    }
}
