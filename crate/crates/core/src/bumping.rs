//! Bumping sets: where component closures meet.
//!
//! The set is computed twice and the two routes are required to agree.
//! Algebraically, the common stabilizer of the collection is sampled by
//! enumeration, its membership closed over with a subgroup graph, and the
//! fixed points of every member word are collected.  Numerically, the
//! sampled quasicircles are intersected by chordal proximity.  Divergence
//! beyond tolerance is an error, never silently reconciled.

use alloc::format;
use alloc::vec::Vec;

use crate::components::{bump_candidates, ComponentRecord};
use crate::error::{Error, Result};
use crate::group::{self, GroupSpec, Step, Word};
use crate::moebius::{chordal_dist, Fixed, SpherePoint};
use crate::pointset::{self, ChordalIndex};
use crate::stallings::SubgroupGraph;
use crate::tolerances::{TOL_BUMP, TOL_GAP, TOL_STAB};

/// How large the intersection of the closures is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CardinalityClass {
    /// Exactly two points; the only possibility for three or more
    /// components, since every circle on the sphere separates.
    TwoPoint(SpherePoint, SpherePoint),
    /// Infinite but a proper subset of each boundary.
    InfiniteProper,
    /// The entire shared boundary circle.
    FullBoundary,
}

#[derive(Debug, Clone)]
pub struct BumpRecord {
    pub component_ids: Vec<usize>,
    /// Deduplicated algebraic bump sample (exact fixed points).
    pub bump_points: Vec<SpherePoint>,
    pub cardinality_class: CardinalityClass,
    /// Reduced generating list of the sampled common stabilizer.
    pub common_stabilizer_words: Vec<Word>,
    /// Enumeration depth behind the common-stabilizer search, so an empty
    /// result reads as "empty at this depth", never "provably empty".
    pub search_depth: u32,
}

/// Words up to the depth stabilizing every listed component, reduced to a
/// generating list.  The membership closure makes this cheap: a word built
/// from earlier keepers is skipped without touching the curves.
fn common_stabilizer_all(
    spec: &GroupSpec,
    records: &[&ComponentRecord],
    depth: u32,
) -> Result<(SubgroupGraph, Vec<Word>)> {
    let mut graph = SubgroupGraph::new(spec.rank());
    let mut kept: Vec<Word> = Vec::new();
    group::enumerate(spec, depth, |w| {
        if w.letters.is_empty() || graph.accepts(w.letters) {
            return Step::Continue;
        }
        let map = *w.map;
        let fixes_all = records.iter().all(|rec| {
            rec.quasicircle.covers_curve(
                rec.quasicircle.points().iter().map(move |p| map.apply(*p)),
                TOL_STAB,
            )
        });
        if fixes_all {
            graph.add_word(w.letters);
            kept.push(w.to_word());
        }
        Step::Continue
    })?;
    Ok((graph, kept))
}

/// Reduced generating list for the subgroup stabilizing both components.
pub fn common_stabilizer(
    spec: &GroupSpec,
    c1: &ComponentRecord,
    c2: &ComponentRecord,
    depth: u32,
) -> Result<Vec<Word>> {
    let (_, words) = common_stabilizer_all(spec, &[c1, c2], depth)?;
    Ok(words)
}

/// Greedy proximity clustering at bump scale: clusters are seeded in input
/// order and accept points within 1.5 * tol_bump of the seed, then each
/// cluster's diameter is verified against 3 * tol_bump.  Returns None when
/// some cluster is too spread for the two-point reading.
fn cluster_points(points: &[SpherePoint]) -> Option<Vec<Vec<SpherePoint>>> {
    let mut clusters: Vec<Vec<SpherePoint>> = Vec::new();
    for &p in points {
        match clusters
            .iter_mut()
            .find(|c| chordal_dist(c[0], p) <= 1.5 * TOL_BUMP)
        {
            Some(c) => c.push(p),
            None => clusters.push(alloc::vec![p]),
        }
    }
    for c in &clusters {
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                if chordal_dist(c[i], c[j]) > 3.0 * TOL_BUMP {
                    return None;
                }
            }
        }
    }
    Some(clusters)
}

/// Classification thresholds: exactly two tight clusters read as TwoPoint;
/// a sample tol_gap-dense in every participating boundary reads as
/// FullBoundary; anything else is InfiniteProper.
pub(crate) fn classify_points(
    points: &[SpherePoint],
    collection: &[&ComponentRecord],
) -> Result<CardinalityClass> {
    if points.is_empty() {
        return Err(Error::invalid(
            "collection does not bump at the sampled depth",
        ));
    }
    if let Some(clusters) = cluster_points(points) {
        if clusters.len() == 1 {
            return Err(Error::invalid(
                "collection bumps in a single point at the sampled depth",
            ));
        }
        if clusters.len() == 2 {
            return Ok(CardinalityClass::TwoPoint(clusters[0][0], clusters[1][0]));
        }
    }
    let dense_everywhere = collection
        .iter()
        .all(|rec| rec.quasicircle.covering_defect(points, TOL_GAP).is_some());
    if dense_everywhere {
        Ok(CardinalityClass::FullBoundary)
    } else {
        Ok(CardinalityClass::InfiniteProper)
    }
}

/// Bump set of a collection of components.
///
/// `depth` is the fixed-point harvest depth (normally the limit-set
/// depth); the common-stabilizer curve search runs two levels shallower,
/// relying on the membership closure to recognize deeper words.
pub fn bump_set(
    spec: &GroupSpec,
    collection: &[&ComponentRecord],
    depth: u32,
) -> Result<BumpRecord> {
    if collection.len() < 2 {
        return Err(Error::invalid("a bump collection needs at least two components"));
    }
    let search_depth = depth.saturating_sub(2).max(1);
    let (graph, words) = common_stabilizer_all(spec, collection, search_depth)?;

    // Algebraic side: fixed points of every enumerated word the closure
    // accepts.  Elliptic fixed pairs are skipped (finite order, not limit
    // points); a parabolic point counts once.
    let mut algebraic: Vec<SpherePoint> = Vec::new();
    let mut dedup = ChordalIndex::new(TOL_BUMP * 0.5);
    group::enumerate(spec, depth, |w| {
        if w.letters.is_empty() || !graph.accepts(w.letters) {
            return Step::Continue;
        }
        let class = w.map.classify();
        match class.fixed {
            Fixed::One(p) => {
                if dedup.insert_if_absent(p, TOL_BUMP * 0.5) {
                    algebraic.push(p);
                }
            }
            Fixed::Attracting {
                attracting,
                repelling,
            } => {
                for p in [attracting, repelling] {
                    if dedup.insert_if_absent(p, TOL_BUMP * 0.5) {
                        algebraic.push(p);
                    }
                }
            }
            Fixed::All | Fixed::Neutral(..) => {}
        }
        Step::Continue
    })?;

    // Numeric side: points of the first boundary near every other one.
    let mut numeric = bump_candidates(collection[0], collection[1]);
    for rec in &collection[2..] {
        let idx = rec.quasicircle.index(TOL_BUMP);
        numeric.retain(|&p| idx.min_dist_capped(p, TOL_BUMP).is_some());
    }

    // Maskit cross-validation: the two routes must agree within 2 tol_bump.
    let allowed = 2.0 * TOL_BUMP;
    let hausdorff = match (algebraic.is_empty(), numeric.is_empty()) {
        (true, true) => {
            return Err(Error::invalid(
                "collection does not bump at the sampled depth",
            ))
        }
        (false, false) => pointset::hausdorff(&algebraic, &numeric),
        _ => f64::INFINITY,
    };
    if hausdorff > allowed {
        return Err(Error::Inconsistent { hausdorff, allowed });
    }

    let cardinality_class = classify_points(&algebraic, collection)?;
    if collection.len() > 2 && !matches!(cardinality_class, CardinalityClass::TwoPoint(..)) {
        // Separation law: a circle bounds two sides, so three or more
        // closures can only share two points.
        return Err(Error::MixedBump(format!(
            "{} components share a {} bump set",
            collection.len(),
            match cardinality_class {
                CardinalityClass::FullBoundary => "full-boundary",
                _ => "proper infinite",
            }
        )));
    }

    Ok(BumpRecord {
        component_ids: collection.iter().map(|r| r.id).collect(),
        bump_points: algebraic,
        cardinality_class,
        common_stabilizer_words: words,
        search_depth,
    })
}

/// Exhaustive-search cap; tracked component counts beyond this are out of
/// desk scale.
const MAX_COLLECTION_COMPONENTS: usize = 16;

/// Every inclusion-maximal collection bumping in at least two points.
/// Collections meeting in exactly one point are dropped.
pub fn maximal_collections(
    spec: &GroupSpec,
    components: &[ComponentRecord],
    depth: u32,
) -> Result<Vec<BumpRecord>> {
    let n = components.len();
    if n < 2 {
        return Err(Error::invalid(
            "need at least two tracked components to look for bumping",
        ));
    }
    if n > MAX_COLLECTION_COMPONENTS {
        return Err(Error::invalid(
            "too many tracked components for exhaustive collection search",
        ));
    }
    let indexes: Vec<ChordalIndex> = components
        .iter()
        .map(|c| c.quasicircle.index(TOL_BUMP))
        .collect();

    // A subset is a candidate when the first member's boundary has at
    // least two proximity clusters near every other member's boundary.
    let mut candidates: Vec<u32> = Vec::new();
    for mask in 3u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let first = members[0];
        let shared: Vec<SpherePoint> = components[first]
            .quasicircle
            .points()
            .iter()
            .copied()
            .filter(|&p| {
                members[1..]
                    .iter()
                    .all(|&j| indexes[j].min_dist_capped(p, TOL_BUMP).is_some())
            })
            .collect();
        if shared.is_empty() {
            continue;
        }
        let enough = match cluster_points(&shared) {
            Some(clusters) => clusters.len() >= 2,
            // Too spread to be one or two points: certainly more than one.
            None => true,
        };
        if enough {
            candidates.push(mask);
        }
    }

    // Keep the inclusion-maximal candidates, larger sets first.
    candidates.sort_by_key(|m| (core::cmp::Reverse(m.count_ones()), *m));
    let mut maximal: Vec<u32> = Vec::new();
    for &m in &candidates {
        if !maximal.iter().any(|&big| big & m == m) {
            maximal.push(m);
        }
    }
    maximal.sort_unstable();

    let mut records = Vec::new();
    for mask in maximal {
        let refs: Vec<&ComponentRecord> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &components[i])
            .collect();
        records.push(bump_set(spec, &refs, depth)?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{assign_stabilizers, detect_components};
    use crate::limitset::{compute_limit, Quasicircle};
    use crate::moebius::MoebiusMap;
    use crate::tolerances::PRUNE_EPS;
    use alloc::vec;

    fn fuchsian_pair() -> GroupSpec {
        let a = MoebiusMap::from_reals([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        let b =
            MoebiusMap::from_reals([[1.0, 0.0], [-1.0, 0.0], [-1.0, 0.0], [2.0, 0.0]]).unwrap();
        GroupSpec::from_maps(&[("a", a), ("b", b)]).unwrap()
    }

    fn fuchsian_records() -> Vec<ComponentRecord> {
        let spec = fuchsian_pair();
        let sample = compute_limit(&spec, 12, PRUNE_EPS).unwrap();
        let raster = detect_components(&sample, 128).unwrap();
        assign_stabilizers(&raster, &sample, &spec, 3).unwrap().0
    }

    fn round_circle_record(id: usize, center: [f64; 2], radius: f64) -> ComponentRecord {
        let pts: Vec<SpherePoint> = (0..64)
            .map(|k| {
                let t = 2.0 * core::f64::consts::PI * k as f64 / 64.0;
                SpherePoint::finite(
                    center[0] + radius * crate::math::cos(t),
                    center[1] + radius * crate::math::sin(t),
                )
            })
            .collect();
        let witness = SpherePoint::finite(center[0], center[1]);
        ComponentRecord {
            id,
            stabilizer_generators: vec![],
            quasicircle: Quasicircle::from_ordered_points(pts, witness).unwrap(),
            interior_witness: witness,
            raster_region_id: None,
        }
    }

    #[test]
    fn fuchsian_common_stabilizer_is_whole_group() {
        let spec = fuchsian_pair();
        let records = fuchsian_records();
        assert_eq!(records.len(), 2);
        let words = common_stabilizer(&spec, &records[0], &records[1], 3).unwrap();
        let mut graph = SubgroupGraph::new(spec.rank());
        for w in &words {
            graph.add_word(w.letters());
        }
        for label in ["a", "b"] {
            let idx = spec.index_of(label).unwrap();
            assert!(graph.accepts(&[crate::group::Letter::positive(idx)]));
        }
    }

    #[test]
    fn fuchsian_half_planes_bump_on_the_full_boundary() {
        let spec = fuchsian_pair();
        let records = fuchsian_records();
        let refs: Vec<&ComponentRecord> = records.iter().collect();
        let record = bump_set(&spec, &refs, 12).unwrap();
        assert_eq!(record.component_ids, vec![0, 1]);
        assert!(matches!(
            record.cardinality_class,
            CardinalityClass::FullBoundary
        ));
        assert!(record.bump_points.len() > 500);
        assert_eq!(record.search_depth, 10);
    }

    #[test]
    fn maximal_collection_on_half_planes_is_the_pair() {
        let spec = fuchsian_pair();
        let records = fuchsian_records();
        let out = maximal_collections(&spec, &records, 12).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].component_ids, vec![0, 1]);
        assert!(matches!(
            out[0].cardinality_class,
            CardinalityClass::FullBoundary
        ));
    }

    #[test]
    fn disjoint_components_yield_no_collections() {
        let spec = fuchsian_pair();
        let far = vec![
            round_circle_record(0, [0.0, 0.0], 1.0),
            round_circle_record(1, [10.0, 0.0], 1.0),
            round_circle_record(2, [-10.0, 0.0], 1.0),
        ];
        let out = maximal_collections(&spec, &far, 6).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn classify_two_tight_clusters_as_two_point() {
        let c1 = round_circle_record(0, [0.0, 0.0], 1.0);
        let c2 = round_circle_record(1, [3.0, 0.0], 1.0);
        let p = SpherePoint::finite(1.0, 0.0);
        let q = SpherePoint::finite(-1.0, 0.0);
        let jitter = SpherePoint::finite(1.0 + 0.4 * TOL_BUMP, 0.0);
        let class = classify_points(&[p, jitter, q], &[&c1, &c2]).unwrap();
        match class {
            CardinalityClass::TwoPoint(x, y) => {
                assert!(x.approx_eq(&p, 1e-12));
                assert!(y.approx_eq(&q, 1e-12));
            }
            other => panic!("expected TwoPoint, got {other:?}"),
        }
    }

    #[test]
    fn classify_single_cluster_is_an_error() {
        let c1 = round_circle_record(0, [0.0, 0.0], 1.0);
        let c2 = round_circle_record(1, [2.0, 0.0], 1.0);
        let p = SpherePoint::finite(1.0, 0.0);
        let err = classify_points(&[p], &[&c1, &c2]).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
    }

    #[test]
    fn classify_partial_arc_as_infinite_proper() {
        let c1 = round_circle_record(0, [0.0, 0.0], 1.0);
        // A quarter arc: far more than two clusters, nowhere near dense.
        let arc: Vec<SpherePoint> = (0..40)
            .map(|k| {
                let t = 0.5 * core::f64::consts::PI * k as f64 / 40.0;
                SpherePoint::finite(crate::math::cos(t), crate::math::sin(t))
            })
            .collect();
        let class = classify_points(&arc, &[&c1]).unwrap();
        assert!(matches!(class, CardinalityClass::InfiniteProper));
    }

    #[test]
    fn classify_dense_circle_as_full_boundary() {
        let c1 = round_circle_record(0, [0.0, 0.0], 1.0);
        let dense: Vec<SpherePoint> = (0..512)
            .map(|k| {
                let t = 2.0 * core::f64::consts::PI * k as f64 / 512.0;
                SpherePoint::finite(crate::math::cos(t), crate::math::sin(t))
            })
            .collect();
        let class = classify_points(&dense, &[&c1]).unwrap();
        assert!(matches!(class, CardinalityClass::FullBoundary));
    }
}
