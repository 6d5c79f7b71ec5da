//! Components of the domain of discontinuity: raster detection, stabilizer
//! assignment, and the numeric side of boundary intersection.
//!
//! A component is tracked through its raster region (interior) and its
//! boundary quasicircle (the limit points adjacent to the region).  The
//! stabilizer is sampled by enumeration: a word stabilizes a component when
//! it keeps the interior witness in the region and maps the boundary sample
//! onto itself within tolerance.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::charts::{detect_components as raster_components, SphereRaster};
use crate::error::{Error, Notes, Result};
use crate::group::{self, GroupSpec, Step, Word};
use crate::limitset::{order_boundary_sample, LimitSample, Quasicircle};
use crate::moebius::SpherePoint;
use crate::pointset::ChordalIndex;
use crate::stallings::SubgroupGraph;
use crate::tolerances::{TOL_BUMP, TOL_PT, TOL_STAB};

#[derive(Debug, Clone)]
pub struct ComponentRecord {
    pub id: usize,
    /// Reduced generating list for the sampled stabilizer.
    pub stabilizer_generators: Vec<Word>,
    /// Cyclically ordered boundary sample.
    pub quasicircle: Quasicircle,
    /// A point deep inside the component, never within tol_pt of the
    /// boundary sample.
    pub interior_witness: SpherePoint,
    pub raster_region_id: Option<usize>,
}

/// Rasterizes the limit sample on the sphere and flood-fills the
/// complement into connected regions.
pub fn detect_components(sample: &LimitSample, resolution: usize) -> Result<SphereRaster> {
    raster_components(sample.points(), resolution)
}

/// True when the word maps the component's boundary curve onto itself:
/// every image of a boundary point must land within tol_stab of the
/// boundary polyline.
pub fn stabilizer_membership(word: &Word, comp: &ComponentRecord) -> Result<bool> {
    let qc = &comp.quasicircle;
    if qc.len() < crate::tolerances::MIN_QUASICIRCLE_POINTS {
        return Err(Error::InsufficientSample {
            got: qc.len(),
            need: crate::tolerances::MIN_QUASICIRCLE_POINTS,
        });
    }
    let map = *word.map();
    Ok(qc.covers_curve(qc.points().iter().map(move |p| map.apply(*p)), TOL_STAB))
}

/// Builds one ComponentRecord per tracked region: boundary quasicircle from
/// the limit points adjacent to the region, stabilizer generators from the
/// enumerated words that keep the region fixed.  Untracked regions are
/// skipped and reported in the notes.
pub fn assign_stabilizers(
    raster: &SphereRaster,
    sample: &LimitSample,
    spec: &GroupSpec,
    depth: u32,
) -> Result<(Vec<ComponentRecord>, Notes)> {
    let mut notes = Notes::default();

    // One adjacency pass over the sample distributes boundary points to
    // every region they touch, preserving sample order per region.
    let mut boundary: BTreeMap<usize, Vec<SpherePoint>> = BTreeMap::new();
    for &p in sample.points() {
        for id in raster.adjacent_region_ids(p) {
            boundary.entry(id).or_default().push(p);
        }
    }

    let sample_index = ChordalIndex::with_points(TOL_PT.max(1e-6), sample.points());
    let mut records = Vec::new();
    for region in raster.regions() {
        if !region.tracked {
            notes.push(format!("{}", Error::UntrackedRegion(region.id)));
            continue;
        }
        if sample_index
            .min_dist_capped(region.witness, TOL_PT)
            .is_some()
        {
            notes.push(format!(
                "region {} witness sits on the boundary sample; skipped",
                region.id
            ));
            continue;
        }
        let empty = Vec::new();
        let pts = boundary.get(&region.id).unwrap_or(&empty);
        // A region whose boundary sample is too thin or too tangled to
        // order is a resolution artifact, not a structural failure: note
        // it and move on, like an untracked sliver.
        let quasicircle = match order_boundary_sample(pts, region.witness, None) {
            Ok(qc) => qc,
            Err(err @ (Error::InsufficientSample { .. } | Error::OrderingFailed)) => {
                notes.push(format!("region {}: {}; skipped", region.id, err));
                continue;
            }
            Err(err) => return Err(err),
        };
        let stabilizer_generators =
            stabilizer_search(raster, spec, depth, region.id, region.witness, &quasicircle)?;
        records.push(ComponentRecord {
            id: records.len(),
            stabilizer_generators,
            quasicircle,
            interior_witness: region.witness,
            raster_region_id: Some(region.id),
        });
    }
    Ok((records, notes))
}

/// Enumerates words up to the depth and keeps those fixing the region,
/// reduced on the fly: a word already generated by earlier keepers is a
/// stabilizer by closure and adds nothing.
fn stabilizer_search(
    raster: &SphereRaster,
    spec: &GroupSpec,
    depth: u32,
    region_id: usize,
    witness: SpherePoint,
    quasicircle: &Quasicircle,
) -> Result<Vec<Word>> {
    let mut graph = SubgroupGraph::new(spec.rank());
    let mut kept: Vec<Word> = Vec::new();
    group::enumerate(spec, depth, |w| {
        if w.letters.is_empty() || graph.accepts(w.letters) {
            return Step::Continue;
        }
        // Cheap raster test first: a word sending the witness into a
        // different tracked region cannot stabilize this one.  Landing on
        // the marked band or in an untracked sliver is inconclusive and
        // falls through to the curve test.
        if let Some(other) = raster.locate(w.map.apply(witness)) {
            if other != region_id && raster.regions()[other].tracked {
                return Step::Continue;
            }
        }
        let map = *w.map;
        if quasicircle.covers_curve(
            quasicircle.points().iter().map(move |p| map.apply(*p)),
            TOL_STAB,
        ) {
            graph.add_word(w.letters);
            kept.push(w.to_word());
        }
        Step::Continue
    })?;
    Ok(kept)
}

/// Points of c1's quasicircle within tol_bump of c2's: the numeric side of
/// the boundary-intersection lemma.
pub fn bump_candidates(c1: &ComponentRecord, c2: &ComponentRecord) -> Vec<SpherePoint> {
    let other = c2.quasicircle.index(TOL_BUMP);
    c1.quasicircle
        .points()
        .iter()
        .copied()
        .filter(|&p| other.min_dist_capped(p, TOL_BUMP).is_some())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitset::compute_limit;
    use crate::moebius::{chordal_dist_to_real_circle, MoebiusMap};
    use crate::tolerances::PRUNE_EPS;
    use alloc::vec;

    /// Rank-2 Fuchsian group with parabolic commutator; limit set R u inf.
    fn fuchsian_pair() -> GroupSpec {
        let a = MoebiusMap::from_reals([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        let b =
            MoebiusMap::from_reals([[1.0, 0.0], [-1.0, 0.0], [-1.0, 0.0], [2.0, 0.0]]).unwrap();
        GroupSpec::from_maps(&[("a", a), ("b", b)]).unwrap()
    }

    fn fuchsian_components() -> (Vec<ComponentRecord>, Notes) {
        let spec = fuchsian_pair();
        // Depth 12 is the first depth whose sample seals the circle through
        // infinity on a 128 grid (coverage grows linearly via the parabolic
        // translates fixing infinity).
        let sample = compute_limit(&spec, 12, PRUNE_EPS).unwrap();
        let raster = detect_components(&sample, 128).unwrap();
        assert_eq!(raster.tracked_count(), 2);
        assign_stabilizers(&raster, &sample, &spec, 3).unwrap()
    }

    #[test]
    fn half_planes_get_full_stabilizers() {
        let (records, _) = fuchsian_components();
        assert_eq!(records.len(), 2);
        let spec = fuchsian_pair();
        for rec in &records {
            // Real maps preserve both half planes, so the reduced
            // generating set must recover the whole group.
            let mut graph = SubgroupGraph::new(spec.rank());
            for w in &rec.stabilizer_generators {
                graph.add_word(w.letters());
            }
            for label in ["a", "b"] {
                let gen = spec
                    .word(&[crate::group::Letter::positive(spec.index_of(label).unwrap())])
                    .unwrap();
                assert!(graph.accepts(gen.letters()), "{label} missing");
            }
            for w in &rec.stabilizer_generators {
                assert!(stabilizer_membership(w, rec).unwrap());
            }
            for p in rec.quasicircle.points() {
                assert!(chordal_dist_to_real_circle(*p) < 1e-3);
            }
        }
        // Witnesses land on opposite sides of the real line.
        let ims: Vec<f64> = records
            .iter()
            .map(|r| match r.interior_witness {
                SpherePoint::Finite(z) => z.im,
                SpherePoint::Infinity => panic!("witness at infinity"),
            })
            .collect();
        assert!(ims[0] * ims[1] < 0.0, "witnesses {ims:?} on one side");
    }

    #[test]
    fn stabilizer_products_stay_members() {
        let (records, _) = fuchsian_components();
        let rec = &records[0];
        let gens = &rec.stabilizer_generators;
        assert!(gens.len() >= 2);
        for (i, u) in gens.iter().take(3).enumerate() {
            for (j, v) in gens.iter().take(3).enumerate() {
                let prod = u.concat(v);
                if prod.is_empty() {
                    continue;
                }
                assert!(
                    stabilizer_membership(&prod, rec).unwrap(),
                    "product of generators {i} and {j} fell out of the stabilizer"
                );
            }
        }
    }

    #[test]
    fn shared_boundary_bumps_everywhere() {
        let (records, _) = fuchsian_components();
        let hits = bump_candidates(&records[0], &records[1]);
        // Both components are bounded by the same sampled circle.
        assert_eq!(hits.len(), records[0].quasicircle.len());
    }

    #[test]
    fn disjoint_circles_never_bump() {
        let circle = |center: f64, witness: SpherePoint| {
            let pts: Vec<SpherePoint> = (0..64)
                .map(|k| {
                    let t = 2.0 * core::f64::consts::PI * k as f64 / 64.0;
                    SpherePoint::finite(center + crate::math::cos(t), crate::math::sin(t))
                })
                .collect();
            ComponentRecord {
                id: 0,
                stabilizer_generators: vec![],
                quasicircle: Quasicircle::from_ordered_points(pts, witness).unwrap(),
                interior_witness: witness,
                raster_region_id: None,
            }
        };
        let c1 = circle(0.0, SpherePoint::finite(0.0, 0.0));
        let c2 = circle(10.0, SpherePoint::finite(10.0, 0.0));
        assert!(bump_candidates(&c1, &c2).is_empty());
    }

    #[test]
    fn two_point_limit_set_has_no_quasicircle() {
        let g = MoebiusMap::scaling(num_complex::Complex64::new(2.0, 0.0)).unwrap();
        let spec = GroupSpec::from_maps(&[("g", g)]).unwrap();
        let sample = compute_limit(&spec, 5, PRUNE_EPS).unwrap();
        assert_eq!(sample.len(), 2);
        let raster = detect_components(&sample, 96).unwrap();
        assert_eq!(raster.tracked_count(), 1);
        let err = assign_stabilizers(&raster, &sample, &spec, 3).unwrap_err();
        assert!(matches!(err, Error::InsufficientSample { .. }), "{err}");
    }

}
