//! Combinatorial characteristic-submanifold pieces.
//!
//! Each bump record, together with the Nielsen cores of its member
//! components, yields exactly one piece: an I-bundle (trivial or twisted)
//! when two components bump, a Seifert-fibered solid torus when three or
//! more do, and the whole manifold when the shared boundary is an entire
//! circle.  The assembly is combinatorial throughout: annuli and curves
//! are rosters of orbit-class ids, never embedded surfaces.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::bumping::{BumpRecord, CardinalityClass};
use crate::components::ComponentRecord;
use crate::error::{Error, Result};
use crate::fuchsian::{real_fixed_angles, FixedAngles};
use crate::group::{self, GroupSpec, Step, Word};
use crate::math;
use crate::moebius::{chordal_dist, Fixed, MoebiusMap, SpherePoint};
use crate::nielsen::{Geodesic, NielsenCoreResult, QuotientKind};
use crate::stallings::SubgroupGraph;
use crate::tolerances::{TOL_ANG, TOL_BUMP, TOL_STAB};

/// Base surface of a trivial I-bundle piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleBase {
    /// Two-point bump: the piece is an annulus crossed with an interval.
    Annulus,
    /// Proper infinite bump: the core projects to a bounded subsurface.
    SubsurfaceWithBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    TrivialIBundle(BundleBase),
    TwistedIBundle,
    SFSSolidTorus { winding: u32 },
    WholeManifoldIBundle,
}

/// One piece of the decomposition, bookkeeping only; the curve roster
/// lives on the [`Decomposition`] at the same index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPiece {
    pub kind: PieceKind,
    pub boundary_annuli_count: usize,
    /// Index into the bump-record list handed to [`assemble`].
    pub source_bump: usize,
    /// Number of distinct image curves on the quotient boundary (m).
    pub image_curve_classes: usize,
    /// Number of member components of the source bump (n).
    pub components_n: usize,
}

/// One boundary-curve class claimed by a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RosterEntry {
    pub component_id: usize,
    /// Orbit-class id inside that component's core for this bump.
    pub class_id: usize,
    /// Simple-closed-geodesic classes stand for regular annular
    /// neighbourhoods of the curve, not the bare geodesic.
    pub thickened: bool,
}

/// A single boundary geodesic matched across every member of a bump.
///
/// `entries` holds one (component id, orbit-class id) per member in bump
/// order; for two components this is the matched pair, for more it is the
/// full tuple.  `image_labels` assigns each entry its curve in the quotient
/// boundary, numbered by first appearance: equal labels mean the members'
/// Nielsen images coincide there.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedCurvePair {
    pub entries: Vec<(usize, usize)>,
    pub image_labels: Vec<usize>,
    /// Shared model-circle geodesic the entries were matched through.
    pub geodesic: Geodesic,
    /// Stabilizer-closure word whose model axis pinned the match.
    pub word: Word,
}

impl MatchedCurvePair {
    pub fn class_count(&self) -> usize {
        self.image_labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// l = l': at least two members share an image curve.
    pub fn is_self_matched(&self) -> bool {
        self.class_count() < self.entries.len()
    }
}

/// Every claim a piece makes on a component boundary curve; assembly
/// verified that no two pieces claim the same geodesic of the same
/// component within the angle tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveClaim {
    pub component_id: usize,
    pub piece: usize,
    pub class_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub pieces: Vec<CharPiece>,
    /// Boundary-curve roster per piece, parallel to `pieces`.
    pub rosters: Vec<Vec<RosterEntry>>,
    /// Disjointness certificate, sorted by component then piece.
    pub certificate: Vec<CurveClaim>,
}

/// Winding of a Seifert-fibered solid-torus piece: n member components
/// whose images fall into m curve classes wind w = n/m times around the
/// core.  m must divide n; anything else contradicts the case structure
/// and flags a misclassified input.
pub fn solid_torus_winding(n: usize, m: usize) -> Result<u32> {
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::CaseViolation { n, m });
    }
    Ok((n / m) as u32)
}

pub fn sfs_piece(n: usize, m: usize) -> Result<PieceKind> {
    Ok(PieceKind::SFSSolidTorus {
        winding: solid_torus_winding(n, m)?,
    })
}

fn resolve_members<'a>(
    bump: &BumpRecord,
    records: &'a [ComponentRecord],
) -> Result<Vec<&'a ComponentRecord>> {
    bump.component_ids
        .iter()
        .map(|id| {
            records
                .iter()
                .find(|r| r.id == *id)
                .ok_or_else(|| Error::invalid("bump references a component without a record"))
        })
        .collect()
}

fn check_core_order(bump: &BumpRecord, cores: &[NielsenCoreResult]) -> Result<()> {
    if cores.len() != bump.component_ids.len() {
        return Err(Error::invalid("need one core per bump component"));
    }
    for (core, &id) in cores.iter().zip(&bump.component_ids) {
        if core.component_id != id {
            return Err(Error::invalid("cores are not in bump component order"));
        }
    }
    Ok(())
}

/// Sphere fixed points of a word, when isolated.
fn isolated_fixed_points(map: &MoebiusMap) -> Vec<SpherePoint> {
    match map.classify().fixed {
        Fixed::One(p) => vec![p],
        Fixed::Attracting {
            attracting,
            repelling,
        } => vec![attracting, repelling],
        Fixed::Neutral(p, q) => vec![p, q],
        Fixed::All => Vec::new(),
    }
}

fn preserves_point_set(map: &MoebiusMap, pts: &[SpherePoint]) -> bool {
    if pts.is_empty() {
        return false;
    }
    pts.iter().all(|p| {
        let image = map.apply(*p);
        pts.iter().any(|q| chordal_dist(image, *q) <= TOL_BUMP)
    })
}

/// Dedup key for maps met during enumeration, exact to the quantum.
fn map_key(map: &MoebiusMap) -> [i64; 8] {
    let e = map.canonical_sign().entries();
    let mut key = [0i64; 8];
    for (i, c) in e.iter().enumerate() {
        key[2 * i] = math::round(c.re / 1e-7) as i64;
        key[2 * i + 1] = math::round(c.im / 1e-7) as i64;
    }
    key
}

/// True when `map` carries the source quasicircle onto the target one.
fn carries_record(map: &MoebiusMap, from: &ComponentRecord, to: &ComponentRecord) -> bool {
    let m = *map;
    to.quasicircle.covers_curve(
        from.quasicircle.points().iter().map(move |p| m.apply(*p)),
        TOL_STAB,
    )
}

fn uf_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Matches each boundary class of every member core across the whole bump.
///
/// A closure-accepted word whose model axis lands on a core geodesic
/// witnesses the match (the same element stabilizes every member there,
/// so its fixed points are shared).  Image labels then identify entries
/// whose components are carried onto each other by some enumerated word
/// fixing the witness axis setwise.  Any class the transfer misses is an
/// `UnmatchedCurve`: a depth shortfall or a hypothesis violation.
pub fn pair_boundary_curves(
    bump: &BumpRecord,
    records: &[ComponentRecord],
    cores: &[NielsenCoreResult],
    spec: &GroupSpec,
    depth: u32,
) -> Result<Vec<MatchedCurvePair>> {
    let n = bump.component_ids.len();
    if n < 2 {
        return Err(Error::invalid("bump references fewer than two components"));
    }
    check_core_order(bump, cores)?;
    let members = resolve_members(bump, records)?;
    if matches!(bump.cardinality_class, CardinalityClass::FullBoundary) {
        return Ok(Vec::new());
    }
    let base = &cores[0];
    if base.boundary_geodesics.is_empty() {
        return Ok(Vec::new());
    }
    if spec.fuchsian_model().is_none() {
        return Err(Error::NoFuchsianModel(base.component_id));
    }

    // One witness word per base geodesic: accepted by the common-stabilizer
    // closure, model axis within tolerance.
    let mut graph = SubgroupGraph::new(spec.rank());
    for w in &bump.common_stabilizer_words {
        graph.add_word(w.letters());
    }
    let mut witness: Vec<Option<Word>> = vec![None; base.boundary_geodesics.len()];
    let mut failure: Option<Error> = None;
    group::enumerate(spec, depth, |w| {
        if w.letters.is_empty() || !graph.accepts(w.letters) {
            return Step::Continue;
        }
        let word = w.to_word();
        let phi = match spec.phi_of_word(&word) {
            Ok(phi) => phi,
            Err(Error::NoFuchsianModel(_)) => return Step::Continue,
            Err(e) => {
                failure = Some(e);
                return Step::Prune;
            }
        };
        let axis = match real_fixed_angles(&phi) {
            // A parabolic has one boundary angle and bounds no geodesic.
            Ok(Some(FixedAngles::Two {
                attracting,
                repelling,
            })) => match Geodesic::new(attracting, repelling) {
                Ok(axis) => axis,
                Err(_) => return Step::Continue,
            },
            Ok(_) => return Step::Continue,
            Err(e) => {
                failure = Some(e);
                return Step::Prune;
            }
        };
        for (k, g) in base.boundary_geodesics.iter().enumerate() {
            if witness[k].is_none() && axis.dist(g) <= TOL_ANG {
                witness[k] = Some(word.clone());
            }
        }
        Step::Continue
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    // Cross-component matching: the cores pull back the same bump set, so
    // a base geodesic must reappear (up to tolerance) with a class in
    // every member; tuples collapsing to the same class vector merge.
    let mut tuples: Vec<MatchedCurvePair> = Vec::new();
    for (k, g) in base.boundary_geodesics.iter().enumerate() {
        let word = witness[k].clone().ok_or(Error::UnmatchedCurve)?;
        let mut entries = Vec::with_capacity(n);
        for core in cores {
            let mut best: Option<(f64, usize)> = None;
            for (j, h) in core.boundary_geodesics.iter().enumerate() {
                let d = g.dist(h);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            match best {
                Some((d, j)) if d <= TOL_ANG => {
                    entries.push((core.component_id, core.image_curve_classes[j]));
                }
                _ => return Err(Error::UnmatchedCurve),
            }
        }
        if tuples.iter().any(|t| t.entries == entries) {
            continue;
        }
        tuples.push(MatchedCurvePair {
            entries,
            image_labels: Vec::new(),
            geodesic: *g,
            word,
        });
    }
    for core in cores {
        for &c in &core.image_curve_classes {
            if !tuples
                .iter()
                .any(|t| t.entries.contains(&(core.component_id, c)))
            {
                return Err(Error::UnmatchedCurve);
            }
        }
    }

    // Image labels: entries i and j of a tuple name the same quotient
    // curve when some word fixes the tuple's sphere axis setwise and
    // carries member i's quasicircle onto member j's.
    let tuple_fixed: Vec<Vec<SpherePoint>> = tuples
        .iter()
        .map(|t| isolated_fixed_points(t.word.map()))
        .collect();
    let mut parents: Vec<Vec<usize>> = tuples.iter().map(|_| (0..n).collect()).collect();
    let mut carried: BTreeMap<[i64; 8], Vec<bool>> = BTreeMap::new();
    group::enumerate(spec, depth, |w| {
        if w.letters.is_empty() {
            return Step::Continue;
        }
        for (t, fixed) in tuple_fixed.iter().enumerate() {
            if !preserves_point_set(w.map, fixed) {
                continue;
            }
            let matrix = carried.entry(map_key(w.map)).or_insert_with(|| {
                let mut mat = vec![false; n * n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            mat[i * n + j] = carries_record(w.map, members[i], members[j]);
                        }
                    }
                }
                mat
            });
            for i in 0..n {
                for j in 0..n {
                    if i != j && matrix[i * n + j] {
                        let (ri, rj) = (uf_root(&mut parents[t], i), uf_root(&mut parents[t], j));
                        if ri != rj {
                            parents[t][ri.max(rj)] = ri.min(rj);
                        }
                    }
                }
            }
        }
        Step::Continue
    })?;
    for (t, tuple) in tuples.iter_mut().enumerate() {
        let mut label_of_root: BTreeMap<usize, usize> = BTreeMap::new();
        tuple.image_labels = (0..n)
            .map(|i| {
                let r = uf_root(&mut parents[t], i);
                let next = label_of_root.len();
                *label_of_root.entry(r).or_insert(next)
            })
            .collect();
    }
    Ok(tuples)
}

fn vec3_sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn vec3_dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn vec3_cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn vec3_unit(a: [f64; 3]) -> Option<[f64; 3]> {
    let n = math::sqrt(vec3_dot(a, a));
    if n <= 1e-9 {
        return None;
    }
    Some([a[0] / n, a[1] / n, a[2] / n])
}

/// Cyclic positions of the members around a two-point bump: each record's
/// sample point nearest the chordal-bisector plane of {p, q}, read as an
/// angle in that plane.  Swirling towards the fixed points drops out
/// because only the collar crossing is kept.
fn bisector_order(p: SpherePoint, q: SpherePoint, members: &[&ComponentRecord]) -> Result<Vec<usize>> {
    let axis = vec3_unit(vec3_sub(p.to_unit_vec3(), q.to_unit_vec3()))
        .ok_or_else(|| Error::invalid("bump points coincide on the sphere"))?;
    let seed = if math::abs(axis[0]) <= math::abs(axis[1]) && math::abs(axis[0]) <= math::abs(axis[2])
    {
        [1.0, 0.0, 0.0]
    } else if math::abs(axis[1]) <= math::abs(axis[2]) {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = vec3_unit(vec3_cross(axis, seed))
        .ok_or_else(|| Error::invalid("degenerate bisector frame"))?;
    let e2 = vec3_cross(axis, e1);
    let mut angles: Vec<(f64, usize)> = Vec::with_capacity(members.len());
    for (i, rec) in members.iter().enumerate() {
        let mut best: Option<(f64, f64)> = None;
        for pt in rec.quasicircle.points() {
            let v = pt.to_unit_vec3();
            let d = math::abs(vec3_dot(v, axis));
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, math::atan2(vec3_dot(v, e2), vec3_dot(v, e1))));
            }
        }
        let (_, theta) = best.ok_or_else(|| Error::invalid("empty quasicircle sample"))?;
        angles.push((theta, i));
    }
    angles.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(angles.into_iter().map(|(_, i)| i).collect())
}

/// Labels around the circle must repeat with period m: the annular strips
/// connect each member to the next one of the same class.
fn labels_are_periodic(labels: &[usize], m: usize) -> bool {
    let n = labels.len();
    if m == 0 || !n.is_multiple_of(m) {
        return false;
    }
    (0..n).all(|i| labels[i] == labels[(i + m) % n])
}

/// Builds the decomposition, one piece per bump record.  `cores` are laid
/// out bump-major: for every bump in order, one core per member component
/// in the bump's component order.
pub fn assemble(
    bumps: &[BumpRecord],
    records: &[ComponentRecord],
    cores: &[NielsenCoreResult],
    spec: &GroupSpec,
    depth: u32,
) -> Result<Decomposition> {
    let mut pieces: Vec<CharPiece> = Vec::new();
    let mut rosters: Vec<Vec<RosterEntry>> = Vec::new();
    // claimed geodesics per component, to certify piece disjointness
    let mut claimed: BTreeMap<usize, Vec<Geodesic>> = BTreeMap::new();
    let mut certificate: Vec<CurveClaim> = Vec::new();
    let mut cursor = 0usize;
    for (b, bump) in bumps.iter().enumerate() {
        let n = bump.component_ids.len();
        if n < 2 {
            return Err(Error::invalid("bump references fewer than two components"));
        }
        if cores.len() < cursor + n {
            return Err(Error::invalid(
                "fewer cores than bump members; pass them bump-major",
            ));
        }
        let slice = &cores[cursor..cursor + n];
        cursor += n;
        check_core_order(bump, slice)?;

        let (kind, annuli, m, tuples) = match bump.cardinality_class {
            CardinalityClass::FullBoundary => {
                if n != 2 {
                    return Err(Error::invalid(
                        "a full shared boundary circle joins exactly two components",
                    ));
                }
                if slice
                    .iter()
                    .any(|c| c.quotient_kind != QuotientKind::WholeSurface)
                {
                    return Err(Error::invalid(
                        "full-boundary bump next to a core with boundary curves",
                    ));
                }
                (PieceKind::WholeManifoldIBundle, 0, 0, Vec::new())
            }
            CardinalityClass::TwoPoint(p, q) => {
                let tuples = pair_boundary_curves(bump, records, slice, spec, depth)?;
                if tuples.is_empty() {
                    return Err(Error::invalid(
                        "proper bump left no boundary curves to match",
                    ));
                }
                if n == 2 {
                    two_component_case(bump, &tuples)?
                } else {
                    // Three or more components force the two-point case:
                    // one hull geodesic, m classes, a solid torus winding
                    // n/m times.
                    if tuples.len() != 1 {
                        return Err(Error::invalid(
                            "a two-point bump bounds a single hull geodesic",
                        ));
                    }
                    let m = tuples[0].class_count();
                    let kind = sfs_piece(n, m)?;
                    let members = resolve_members(bump, records)?;
                    let order = bisector_order(p, q, &members)?;
                    let around: Vec<usize> =
                        order.iter().map(|&i| tuples[0].image_labels[i]).collect();
                    if !labels_are_periodic(&around, m) {
                        return Err(Error::invalid(
                            "image classes are not cyclically interleaved around the bump pair",
                        ));
                    }
                    (kind, n, m, tuples)
                }
            }
            CardinalityClass::InfiniteProper => {
                if n != 2 {
                    return Err(Error::invalid(
                        "three or more components can only bump in two points",
                    ));
                }
                let tuples = pair_boundary_curves(bump, records, slice, spec, depth)?;
                if tuples.is_empty() {
                    return Err(Error::invalid(
                        "proper bump left no boundary curves to match",
                    ));
                }
                two_component_case(bump, &tuples)?
            }
        };

        let mut roster = Vec::new();
        for t in &tuples {
            for (i, &(comp, class)) in t.entries.iter().enumerate() {
                let prior = claimed.entry(comp).or_default();
                if prior.iter().any(|g| g.dist(&t.geodesic) <= TOL_ANG) {
                    return Err(Error::invalid(
                        "two pieces claim the same boundary curve of a component",
                    ));
                }
                prior.push(t.geodesic);
                certificate.push(CurveClaim {
                    component_id: comp,
                    piece: b,
                    class_id: class,
                });
                if !roster.iter().any(|r: &RosterEntry| {
                    r.component_id == comp && r.class_id == class
                }) {
                    roster.push(RosterEntry {
                        component_id: comp,
                        class_id: class,
                        thickened: slice[i].quotient_kind == QuotientKind::SimpleClosedGeodesic,
                    });
                }
            }
        }
        pieces.push(CharPiece {
            kind,
            boundary_annuli_count: annuli,
            source_bump: b,
            image_curve_classes: m,
            components_n: n,
        });
        rosters.push(roster);
    }
    if cursor != cores.len() {
        return Err(Error::invalid(
            "more cores than bump members; pass them bump-major",
        ));
    }
    certificate.sort_by_key(|c| (c.component_id, c.piece, c.class_id));
    Ok(Decomposition {
        pieces,
        rosters,
        certificate,
    })
}

/// Case split for a pair of components: every tuple self-matched means
/// the two Nielsen images coincide and the piece is a twisted I-bundle;
/// none self-matched is the product bundle.  A mix is structurally
/// impossible and flags a misidentification.
fn two_component_case(
    bump: &BumpRecord,
    tuples: &[MatchedCurvePair],
) -> Result<(PieceKind, usize, usize, Vec<MatchedCurvePair>)> {
    let selfed = tuples.iter().filter(|t| t.is_self_matched()).count();
    let kind = if selfed == tuples.len() {
        PieceKind::TwistedIBundle
    } else if selfed == 0 {
        PieceKind::TrivialIBundle(match bump.cardinality_class {
            CardinalityClass::TwoPoint(..) => BundleBase::Annulus,
            _ => BundleBase::SubsurfaceWithBoundary,
        })
    } else {
        return Err(Error::invalid(
            "identification must twist every boundary curve or none",
        ));
    };
    let m = tuples.iter().map(MatchedCurvePair::class_count).sum();
    Ok((kind, tuples.len(), m, tuples.to_vec()))
}
