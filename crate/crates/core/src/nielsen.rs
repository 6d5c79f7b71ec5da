//! Nielsen cores in the real-matrix model: convex hulls of circle subsets,
//! their boundary geodesics, and the three checks a boundary curve must
//! pass for its quotient image to be an embedded curve or subsurface.
//!
//! All geometry happens on the model circle, reached through the boundary
//! angle map.  Hulls never touch the interior metric: a hull is determined
//! by the complementary gaps of its boundary subset, one geodesic per gap.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bumping::{BumpRecord, CardinalityClass};
use crate::components::ComponentRecord;
use crate::error::{CheckId, Error, Result};
use crate::fuchsian::{
    angle_gap, angle_sep, apply_to_angle, real_fixed_angles, FixedAngles, TAU,
};
use crate::group::{self, GroupSpec, Step};
use crate::math;
use crate::moebius::{Fixed, MoebiusMap};
use crate::pointset::ChordalIndex;
use crate::stallings::SubgroupGraph;
use crate::tolerances::{GAP_EPS, MAX_DEPTH, TOL_ACC, TOL_ANG, TOL_BUMP};

/// Below this endpoint distance two orbit geodesics are the same geodesic
/// revisited by different words; between here and the accumulation floor
/// they are evidence of collapse.  Sits far above compounded rounding at
/// the supported depths and far below tol_acc.
const ACC_DEDUP: f64 = 1e-9;

/// A family shrinking self-similarly into a boundary fixed point keeps
/// endpoint separation comparable to the geodesics' own widths and exits
/// every compact set, which is not accumulation.  Collapse onto a geodesic
/// drives separation far below the widths.  This ratio splits the two.
const ACC_RELATIVE: f64 = 0.1;

/// Hard ceiling on reduced words visited by one orbit search.
const WORD_CAP: u64 = 2_000_000;

/// Subset of the model circle, sorted angles in [0, 2pi).
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSubset {
    angles: Vec<f64>,
    dense: bool,
}

impl CircleSubset {
    /// Normalizes into [0, 2pi), sorts, and merges angles closer than
    /// tol_ang, including across the wrap at 0.
    pub fn from_angles<I: IntoIterator<Item = f64>>(raw: I) -> Self {
        let mut angles: Vec<f64> = raw
            .into_iter()
            .map(|a| math::rem_euclid(a, TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(angles.len());
        for a in angles {
            match merged.last() {
                Some(&last) if a - last <= TOL_ANG => {}
                _ => merged.push(a),
            }
        }
        while merged.len() >= 2 {
            let first = merged[0];
            let last = *merged.last().unwrap();
            if first + TAU - last <= TOL_ANG {
                merged.pop();
            } else {
                break;
            }
        }
        CircleSubset {
            angles: merged,
            dense: false,
        }
    }

    /// The dense subset arising from a full-boundary bump: the hull is the
    /// whole disc and no explicit angles are carried.
    pub fn dense() -> Self {
        CircleSubset {
            angles: Vec::new(),
            dense: true,
        }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Widest complementary circular gap; None below two points.
    pub fn max_gap(&self) -> Option<f64> {
        if self.angles.len() < 2 {
            return None;
        }
        let n = self.angles.len();
        let mut widest = 0.0f64;
        for i in 0..n {
            widest = widest.max(angle_gap(self.angles[(i + 1) % n], self.angles[i]));
        }
        Some(widest)
    }

    /// Dense either by construction or by detection: no gap reaches ten
    /// times the hull threshold.
    pub fn is_dense(&self, gap_eps: f64) -> bool {
        self.dense
            || matches!(self.max_gap(), Some(g) if g < 10.0 * gap_eps)
    }
}

/// Unordered pair of distinct boundary angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    a: f64,
    b: f64,
}

impl Geodesic {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let x = math::rem_euclid(x, TAU);
        let y = math::rem_euclid(y, TAU);
        if angle_sep(x, y) <= TOL_ANG {
            return Err(Error::invalid("geodesic endpoints coincide"));
        }
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        Ok(Geodesic { a, b })
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Angular width, the shorter arc between the endpoints, in (0, pi].
    pub fn width(&self) -> f64 {
        angle_sep(self.a, self.b)
    }

    /// Distance between endpoint pairs: the better of the two matchings.
    pub fn dist(&self, other: &Geodesic) -> f64 {
        let direct = angle_sep(self.a, other.a).max(angle_sep(self.b, other.b));
        let crossed = angle_sep(self.a, other.b).max(angle_sep(self.b, other.a));
        direct.min(crossed)
    }

    pub fn image(&self, map: &MoebiusMap) -> Result<Geodesic> {
        Geodesic::new(apply_to_angle(map, self.a)?, apply_to_angle(map, self.b)?)
    }
}

/// What the core projects to in the quotient surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientKind {
    SimpleClosedGeodesic,
    SubsurfaceWithGeodesicBoundary,
    WholeSurface,
}

/// Per-orbit-class verdicts of the three boundary checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassChecks {
    pub class_id: usize,
    pub simple: bool,
    pub nonaccumulating: bool,
    pub cusp_free: bool,
}

#[derive(Debug, Clone)]
pub struct NielsenCoreResult {
    pub component_id: usize,
    pub boundary_geodesics: Vec<Geodesic>,
    pub quotient_kind: QuotientKind,
    /// Orbit class id of each boundary geodesic, numbered by first
    /// appearance.
    pub image_curve_classes: Vec<usize>,
    pub check_report: Vec<ClassChecks>,
}

/// Transfers a bump set to the model circle: every enumerated word in the
/// membership closure of the common stabilizer whose fixed points lie on
/// the bump set contributes the fixed angles of its model image.  Words
/// the model does not cover (odd runs on an adjoined letter) are skipped;
/// a group with no model at all is rejected.
pub fn pull_back_bump(
    bump: &BumpRecord,
    comp: &ComponentRecord,
    spec: &GroupSpec,
    depth: u32,
) -> Result<CircleSubset> {
    if !bump.component_ids.contains(&comp.id) {
        return Err(Error::invalid("component is not part of this bump record"));
    }
    if spec.fuchsian_model().is_none() {
        return Err(Error::NoFuchsianModel(comp.id));
    }
    if matches!(bump.cardinality_class, CardinalityClass::FullBoundary) {
        return Ok(CircleSubset::dense());
    }
    let mut graph = SubgroupGraph::new(spec.rank());
    for w in &bump.common_stabilizer_words {
        graph.add_word(w.letters());
    }
    let index = ChordalIndex::with_points(TOL_BUMP, &bump.bump_points);
    let mut angles: Vec<f64> = Vec::new();
    let mut failure: Option<Error> = None;
    group::enumerate(spec, depth, |w| {
        if w.letters.is_empty() || !graph.accepts(w.letters) {
            return Step::Continue;
        }
        let fixed = match w.map.classify().fixed {
            Fixed::One(p) => [Some(p), None],
            Fixed::Attracting {
                attracting,
                repelling,
            } => [Some(attracting), Some(repelling)],
            Fixed::All | Fixed::Neutral(..) => return Step::Continue,
        };
        let on_bump = fixed
            .iter()
            .flatten()
            .all(|p| index.min_dist_capped(*p, TOL_BUMP).is_some());
        if !on_bump {
            return Step::Continue;
        }
        match spec.phi_of_word(&w.to_word()) {
            Ok(phi) => match real_fixed_angles(&phi) {
                Ok(Some(fa)) => angles.extend(fa.iter()),
                Ok(None) => {}
                Err(e) => {
                    failure = Some(e);
                    return Step::Prune;
                }
            },
            Err(Error::NoFuchsianModel(_)) => {}
            Err(e) => {
                failure = Some(e);
                return Step::Prune;
            }
        }
        Step::Continue
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(CircleSubset::from_angles(angles))
}

/// Boundary of the hyperbolic convex hull: one geodesic per complementary
/// circular gap of width at least gap_eps, deduplicated as unordered
/// pairs (the two gaps of a two-point set bound the same geodesic).
pub fn convex_hull_boundary(s: &CircleSubset, gap_eps: f64) -> Result<Vec<Geodesic>> {
    if s.dense {
        return Ok(Vec::new());
    }
    let n = s.angles.len();
    if n < 2 {
        return Err(Error::TooSparse);
    }
    let mut out: Vec<Geodesic> = Vec::new();
    for i in 0..n {
        let a = s.angles[i];
        let b = s.angles[(i + 1) % n];
        if angle_gap(b, a) >= gap_eps {
            let g = Geodesic::new(a, b)?;
            if !out.iter().any(|h| g.dist(h) <= TOL_ANG) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// Walks every nonempty reduced word in the letters of `stab` and their
/// inverses, up to `depth`, feeding the composed map to the visitor.  The
/// visitor returns false to stop the walk.  Word counts beyond the cap are
/// refused with the deepest affordable depth in the error.
fn for_each_orbit_word<F>(stab: &[MoebiusMap], depth: u32, mut f: F) -> Result<()>
where
    F: FnMut(&MoebiusMap) -> Result<bool>,
{
    if depth > MAX_DEPTH {
        return Err(Error::DepthCap(depth, MAX_DEPTH));
    }
    let k = stab.len();
    if k == 0 || depth == 0 {
        return Ok(());
    }
    let mut total: u64 = 0;
    let mut layer: u64 = 2 * k as u64;
    let mut affordable = 0u32;
    for _ in 0..depth {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(2 * k as u64 - 1);
        if total <= WORD_CAP {
            affordable += 1;
        }
    }
    if total > WORD_CAP {
        return Err(Error::DepthCap(depth, affordable));
    }
    let mut slots: Vec<MoebiusMap> = Vec::with_capacity(2 * k);
    for m in stab {
        slots.push(*m);
        slots.push(m.inverse());
    }
    // Depth-first over reduced words: slot s followed by anything but its
    // inverse slot s ^ 1.
    let mut stack: Vec<(MoebiusMap, usize, u32)> = Vec::new();
    for s in (0..slots.len()).rev() {
        stack.push((slots[s], s, 1));
    }
    while let Some((map, last, len)) = stack.pop() {
        if !f(&map)? {
            return Ok(());
        }
        if len < depth {
            for s in (0..slots.len()).rev() {
                if s == last ^ 1 {
                    continue;
                }
                stack.push((map.compose(&slots[s]), s, len + 1));
            }
        }
    }
    Ok(())
}

/// Strict circular betweenness: is x inside the counterclockwise arc from
/// a to b, staying clear of both endpoints by tol_ang?  None when x sits
/// on an endpoint, which never counts as a transverse crossing.
fn strictly_between(x: f64, a: f64, b: f64) -> Option<bool> {
    if angle_sep(x, a) <= TOL_ANG || angle_sep(x, b) <= TOL_ANG {
        return None;
    }
    Some(angle_gap(x, a) < angle_gap(b, a))
}

/// Linked endpoint pairs: exactly one of (x, y) lies strictly inside the
/// arc cut off by g.  Circles on the sphere meet an even number of times,
/// so linkage is exactly a transverse crossing.
fn linked(g: &Geodesic, x: f64, y: f64) -> bool {
    match (strictly_between(x, g.a, g.b), strictly_between(y, g.a, g.b)) {
        (Some(p), Some(q)) => p != q,
        _ => false,
    }
}

/// No word up to `depth` maps g across itself.  Translates may coincide
/// with g or nest inside one of its arcs; only strict interleaving fails.
pub fn check_simple(g: &Geodesic, stab: &[MoebiusMap], depth: u32) -> Result<bool> {
    let mut ok = true;
    for_each_orbit_word(stab, depth, |map| {
        let x = apply_to_angle(map, g.a)?;
        let y = apply_to_angle(map, g.b)?;
        if linked(g, x, y) {
            ok = false;
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(ok)
}

/// Grid over endpoint pairs with wraparound cells, for nearest-neighbor
/// queries at accumulation scale.  Each geodesic is stored under both
/// endpoint orders so the max-per-endpoint metric needs no matching step.
struct PairGrid {
    cell: f64,
    n: i64,
    bins: BTreeMap<(i64, i64), Vec<(f64, f64)>>,
}

impl PairGrid {
    fn new(cell: f64) -> Self {
        PairGrid {
            cell,
            n: math::ceil(TAU / cell) as i64,
            bins: BTreeMap::new(),
        }
    }

    fn key(&self, x: f64) -> i64 {
        ((math::floor(x / self.cell)) as i64).rem_euclid(self.n)
    }

    fn insert(&mut self, a: f64, b: f64) {
        for (x, y) in [(a, b), (b, a)] {
            self.bins
                .entry((self.key(x), self.key(y)))
                .or_default()
                .push((x, y));
        }
    }

    /// Nearest stored pair within one cell ring; pairs farther than a cell
    /// in either coordinate are invisible by construction.
    fn nearest(&self, a: f64, b: f64) -> Option<(f64, (f64, f64))> {
        let (ia, ib) = (self.key(a), self.key(b));
        let mut best: Option<(f64, (f64, f64))> = None;
        for da in -1..=1i64 {
            for db in -1..=1i64 {
                let key = ((ia + da).rem_euclid(self.n), (ib + db).rem_euclid(self.n));
                let Some(bin) = self.bins.get(&key) else {
                    continue;
                };
                for &(x, y) in bin {
                    let d = angle_sep(a, x).max(angle_sep(b, y));
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, (x, y)));
                    }
                }
            }
        }
        best
    }
}

/// The orbit of g, reduced to distinct geodesics, keeps every pair of
/// elements separated: no two distinct translates come within tol_acc of
/// each other while also collapsing relative to their own widths.
pub fn check_nonaccumulating(g: &Geodesic, stab: &[MoebiusMap], depth: u32) -> Result<bool> {
    let mut grid = PairGrid::new(TOL_ACC);
    grid.insert(g.a, g.b);
    let mut ok = true;
    for_each_orbit_word(stab, depth, |map| {
        let x = apply_to_angle(map, g.a)?;
        let y = apply_to_angle(map, g.b)?;
        let width = angle_sep(x, y);
        if width < ACC_DEDUP {
            // Endpoints merged by rounding; no reliable geodesic to test.
            return Ok(true);
        }
        match grid.nearest(x, y) {
            Some((d, _)) if d < ACC_DEDUP => {}
            Some((d, (p, q)))
                if d < TOL_ACC && d < ACC_RELATIVE * width.min(angle_sep(p, q)) =>
            {
                ok = false;
                return Ok(false);
            }
            _ => grid.insert(x, y),
        }
        Ok(true)
    })?;
    Ok(ok)
}

/// Neither endpoint of g sits at a parabolic fixed angle of any word up to
/// `depth`.  Groups with no parabolic words pass vacuously.
pub fn check_cusp(g: &Geodesic, stab: &[MoebiusMap], depth: u32) -> Result<bool> {
    let mut ok = true;
    for_each_orbit_word(stab, depth, |map| {
        if let Some(FixedAngles::One(theta)) = real_fixed_angles(map)? {
            if angle_sep(theta, g.a) <= TOL_ANG || angle_sep(theta, g.b) <= TOL_ANG {
                ok = false;
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    Ok(ok)
}

/// Groups the hull boundary into stab-orbit classes, runs the three checks
/// on one representative per class, and names the quotient image.  A dense
/// subset short-circuits to the whole surface.  Any failing check aborts
/// with its id: either the group violates the embedding hypotheses or the
/// depth was too shallow to certify them.
pub fn classify_quotient(
    component_id: usize,
    core: &[Geodesic],
    s: &CircleSubset,
    stab: &[MoebiusMap],
    depth: u32,
) -> Result<NielsenCoreResult> {
    if s.is_dense(GAP_EPS) {
        return Ok(NielsenCoreResult {
            component_id,
            boundary_geodesics: Vec::new(),
            quotient_kind: QuotientKind::WholeSurface,
            image_curve_classes: Vec::new(),
            check_report: Vec::new(),
        });
    }
    if core.is_empty() {
        return Err(Error::invalid(
            "non-dense subset with an empty hull boundary",
        ));
    }

    // Orbit classes by union-find: i and j merge when some word carries
    // core[i] onto core[j] within tol_ang.
    let mut parent: Vec<usize> = (0..core.len()).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for_each_orbit_word(stab, depth, |map| {
        for i in 0..core.len() {
            let Ok(img) = core[i].image(map) else {
                continue;
            };
            for j in 0..core.len() {
                if i != j && img.dist(&core[j]) <= TOL_ANG {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        Ok(true)
    })?;

    // Class ids in order of first appearance along the hull.
    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut image_curve_classes: Vec<usize> = Vec::with_capacity(core.len());
    let mut representatives: Vec<usize> = Vec::new();
    for i in 0..core.len() {
        let r = root(&mut parent, i);
        let next = class_of_root.len();
        let id = *class_of_root.entry(r).or_insert(next);
        if id == representatives.len() {
            representatives.push(i);
        }
        image_curve_classes.push(id);
    }

    let mut check_report: Vec<ClassChecks> = Vec::with_capacity(representatives.len());
    for (class_id, &rep) in representatives.iter().enumerate() {
        let g = &core[rep];
        if !check_simple(g, stab, depth)? {
            return Err(Error::CheckFailed {
                check: CheckId::Simple,
            });
        }
        if !check_nonaccumulating(g, stab, depth)? {
            return Err(Error::CheckFailed {
                check: CheckId::NonAccumulating,
            });
        }
        if !check_cusp(g, stab, depth)? {
            return Err(Error::CheckFailed {
                check: CheckId::CuspFree,
            });
        }
        check_report.push(ClassChecks {
            class_id,
            simple: true,
            nonaccumulating: true,
            cusp_free: true,
        });
    }

    let quotient_kind = if core.len() == 1 {
        QuotientKind::SimpleClosedGeodesic
    } else {
        QuotientKind::SubsurfaceWithGeodesicBoundary
    };
    Ok(NielsenCoreResult {
        component_id,
        boundary_geodesics: core.to_vec(),
        quotient_kind,
        image_curve_classes,
        check_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitset::Quasicircle;
    use crate::moebius::SpherePoint;
    use alloc::vec;
    use core::f64::consts::PI;

    fn real_map(entries: [[f64; 2]; 4]) -> MoebiusMap {
        MoebiusMap::from_reals(entries).unwrap()
    }

    /// z -> 4z, axis endpoints 0 (angle pi) and infinity (angle 0).
    fn doubling() -> MoebiusMap {
        real_map([[2.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]])
    }

    #[test]
    fn subset_merges_duplicates_and_wraps() {
        let s = CircleSubset::from_angles([PI, 0.0, PI + 0.5 * TOL_ANG, TAU - 0.2 * TOL_ANG]);
        // The near-2pi angle merges with 0 across the wrap; the near-pi
        // duplicate merges with pi.
        assert_eq!(s.len(), 2);
        assert!(s.angles()[0].abs() < 1e-12);
        assert!((s.angles()[1] - PI).abs() < 1e-12);
        assert!((s.max_gap().unwrap() - PI).abs() < 1e-9);
    }

    #[test]
    fn two_point_hull_is_one_geodesic() {
        let s = CircleSubset::from_angles([0.0, PI]);
        let hull = convex_hull_boundary(&s, GAP_EPS).unwrap();
        assert_eq!(hull.len(), 1);
        let (a, b) = hull[0].endpoints();
        assert!(a.abs() < 1e-12 && (b - PI).abs() < 1e-12);
    }

    #[test]
    fn ideal_triangle_hull_has_three_sides() {
        let s = CircleSubset::from_angles([0.0, TAU / 3.0, 2.0 * TAU / 3.0]);
        assert_eq!(convex_hull_boundary(&s, GAP_EPS).unwrap().len(), 3);
    }

    #[test]
    fn dense_subset_has_empty_hull() {
        let s = CircleSubset::dense();
        assert!(s.is_dense(GAP_EPS));
        assert!(convex_hull_boundary(&s, GAP_EPS).unwrap().is_empty());
        // Detection route: 10000 evenly spread angles leave no real gap.
        let fine = CircleSubset::from_angles((0..10000).map(|k| TAU * k as f64 / 10000.0));
        assert!(fine.is_dense(GAP_EPS));
    }

    #[test]
    fn single_angle_is_too_sparse() {
        let s = CircleSubset::from_angles([1.0]);
        assert!(matches!(
            convex_hull_boundary(&s, GAP_EPS),
            Err(Error::TooSparse)
        ));
    }

    #[test]
    fn hull_commutes_with_model_isometries() {
        let w = real_map([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let angles = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0 + 0.3];
        let s = CircleSubset::from_angles(angles);
        let moved = CircleSubset::from_angles(
            angles
                .iter()
                .map(|&t| apply_to_angle(&w, t).unwrap())
                .collect::<Vec<_>>(),
        );
        let hull_then_move: Vec<Geodesic> = convex_hull_boundary(&s, GAP_EPS)
            .unwrap()
            .iter()
            .map(|g| g.image(&w).unwrap())
            .collect();
        let move_then_hull = convex_hull_boundary(&moved, GAP_EPS).unwrap();
        assert_eq!(hull_then_move.len(), move_then_hull.len());
        for g in &hull_then_move {
            assert!(
                move_then_hull.iter().any(|h| g.dist(h) <= TOL_ANG),
                "missing image geodesic {g:?}"
            );
        }
    }

    #[test]
    fn hull_gaps_refine_under_supersets() {
        let coarse = CircleSubset::from_angles([0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        let fine = CircleSubset::from_angles([
            0.0,
            PI / 4.0,
            PI / 2.0,
            PI,
            5.0 * PI / 4.0,
            3.0 * PI / 2.0,
        ]);
        // Every gap of the superset lies inside a gap of the subset.
        let n = fine.len();
        for i in 0..n {
            let (a, b) = (fine.angles()[i], fine.angles()[(i + 1) % n]);
            let m = coarse.len();
            let contained = (0..m).any(|j| {
                let (c, d) = (coarse.angles()[j], coarse.angles()[(j + 1) % m]);
                let span = angle_gap(d, c);
                angle_gap(a, c) <= span + 1e-12 && angle_gap(b, c) <= span + 1e-12
            });
            assert!(contained, "gap ({a}, {b}) escapes the coarse hull");
        }
    }

    #[test]
    fn axis_is_simple_under_its_own_cyclic_group() {
        let g = Geodesic::new(0.0, PI).unwrap();
        assert!(check_simple(&g, &[doubling()], 8).unwrap());
    }

    #[test]
    fn interleaving_translate_breaks_simplicity() {
        // w(inf) = -1 (angle pi/2, inside the (0, pi) arc) and w(0) = 2
        // (angle beyond pi): the image straddles g.
        let w = real_map([[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0], [1.0, 0.0]]);
        let g = Geodesic::new(0.0, PI).unwrap();
        assert!(!check_simple(&g, &[w], 3).unwrap());
    }

    #[test]
    fn nested_translates_stay_simple_and_separated() {
        // Endpoints at -1 and 1; translates under z -> 4z nest toward the
        // axis ends without crossing, and their self-similar shrinkage is
        // not accumulation.
        let g = Geodesic::new(PI / 2.0, 3.0 * PI / 2.0).unwrap();
        let stab = [doubling()];
        assert!(check_simple(&g, &stab, 8).unwrap());
        assert!(check_nonaccumulating(&g, &stab, 8).unwrap());
    }

    #[test]
    fn near_rational_rotation_accumulates() {
        // Rotation by 3pi/4 + 5e-7 on the disc: the eighth power returns
        // 8e-6 away from the start, far under the accumulation floor but
        // well above rounding.
        let t = 3.0 * PI / 8.0 + 2.5e-7;
        let r = real_map([
            [math::cos(t), 0.0],
            [-math::sin(t), 0.0],
            [math::sin(t), 0.0],
            [math::cos(t), 0.0],
        ]);
        let g = Geodesic::new(0.3, 2.0).unwrap();
        assert!(!check_nonaccumulating(&g, &[r], 8).unwrap());
        // The first collapsing pair differs by the eighth power, so depths
        // whose orbit lags stay under 8 see nothing.
        assert!(check_nonaccumulating(&g, &[r], 3).unwrap());
    }

    #[test]
    fn parabolic_fixed_point_blocks_cusp_check() {
        let p = real_map([[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        let seeded = Geodesic::new(0.0, PI).unwrap();
        assert!(!check_cusp(&seeded, &[p], 6).unwrap());
        let clear = Geodesic::new(PI / 2.0, 3.0 * PI / 2.0).unwrap();
        assert!(check_cusp(&clear, &[p], 6).unwrap());
        // No parabolic words at all: vacuous pass even when an endpoint
        // sits at a hyperbolic fixed angle.
        assert!(check_cusp(&seeded, &[doubling()], 6).unwrap());
    }

    #[test]
    fn classify_single_geodesic_as_simple_closed() {
        let s = CircleSubset::from_angles([0.0, PI]);
        let core = convex_hull_boundary(&s, GAP_EPS).unwrap();
        let out = classify_quotient(7, &core, &s, &[doubling()], 8).unwrap();
        assert_eq!(out.component_id, 7);
        assert_eq!(out.quotient_kind, QuotientKind::SimpleClosedGeodesic);
        assert_eq!(out.image_curve_classes, vec![0]);
        assert_eq!(out.check_report.len(), 1);
        assert!(out.check_report[0].simple && out.check_report[0].cusp_free);
    }

    #[test]
    fn classify_dense_subset_as_whole_surface() {
        let out = classify_quotient(0, &[], &CircleSubset::dense(), &[doubling()], 4).unwrap();
        assert_eq!(out.quotient_kind, QuotientKind::WholeSurface);
        assert!(out.image_curve_classes.is_empty());
        assert!(out.boundary_geodesics.is_empty());
    }

    #[test]
    fn classify_orbit_subset_counts_gap_classes() {
        // Angles of +-4^n for n in -3..=3: a finite window of a
        // stab-invariant set under z -> 4z.  Fourteen points in general
        // position give fourteen hull sides: six per sign class related by
        // the generator, plus the two unpaired bridges across 0 and pi.
        let mut xs: Vec<f64> = Vec::new();
        for n in -3..=3 {
            let v = libm::pow(4.0, n as f64);
            xs.push(v);
            xs.push(-v);
        }
        let angles: Vec<f64> = xs
            .iter()
            .map(|&x| {
                crate::fuchsian::real_point_to_angle(SpherePoint::finite(x, 0.0)).unwrap()
            })
            .collect();
        let s = CircleSubset::from_angles(angles);
        assert_eq!(s.len(), 14);
        let core = convex_hull_boundary(&s, GAP_EPS).unwrap();
        assert_eq!(core.len(), 14);

        let class_sizes = |out: &NielsenCoreResult| {
            let count = out.image_curve_classes.iter().max().unwrap() + 1;
            let mut sizes = vec![0usize; count];
            for &c in &out.image_curve_classes {
                sizes[c] += 1;
            }
            sizes.sort_unstable();
            sizes
        };

        // Shallow: each sign class chains along the generator, the two
        // bridge geodesics across 0 and pi stay apart.
        let shallow = classify_quotient(0, &core, &s, &[doubling()], 2).unwrap();
        assert_eq!(
            shallow.quotient_kind,
            QuotientKind::SubsurfaceWithGeodesicBoundary
        );
        assert_eq!(class_sizes(&shallow), vec![1, 1, 6, 6]);
        assert_eq!(shallow.check_report.len(), 4);

        // Depth 6 reaches the sixth power, which carries the bridge across
        // 0 onto the bridge across pi.
        let deep = classify_quotient(0, &core, &s, &[doubling()], 6).unwrap();
        assert_eq!(class_sizes(&deep), vec![2, 6, 6]);
        assert_eq!(deep.check_report.len(), 3);
    }

    #[test]
    fn word_cap_reports_affordable_depth() {
        let stab = [doubling(), real_map([[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]),
            real_map([[1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 0.0]])];
        let g = Geodesic::new(0.3, 2.0).unwrap();
        // Rank 3 at depth 12 wants 6 * 5^11 words, past the cap.
        let err = check_simple(&g, &stab, 12).unwrap_err();
        match err {
            Error::DepthCap(asked, granted) => {
                assert_eq!(asked, 12);
                assert!(granted < 12 && granted >= 8);
            }
            other => panic!("expected DepthCap, got {other}"),
        }
    }

    fn circle_component(id: usize) -> ComponentRecord {
        let pts: Vec<SpherePoint> = (0..64)
            .map(|k| {
                let t = TAU * k as f64 / 64.0;
                SpherePoint::finite(math::cos(t), math::sin(t))
            })
            .collect();
        let witness = SpherePoint::finite(0.0, 0.0);
        ComponentRecord {
            id,
            stabilizer_generators: vec![],
            quasicircle: Quasicircle::from_ordered_points(pts, witness).unwrap(),
            interior_witness: witness,
            raster_region_id: None,
        }
    }

    #[test]
    fn pull_back_two_point_bump_gives_the_model_axis() {
        let spec = GroupSpec::from_maps(&[("a", doubling())])
            .unwrap()
            .with_self_model()
            .unwrap();
        let word = spec
            .word(&[crate::group::Letter::positive(0)])
            .unwrap();
        let bump = BumpRecord {
            component_ids: vec![0, 1],
            bump_points: vec![SpherePoint::finite(0.0, 0.0), SpherePoint::Infinity],
            cardinality_class: CardinalityClass::TwoPoint(
                SpherePoint::finite(0.0, 0.0),
                SpherePoint::Infinity,
            ),
            common_stabilizer_words: vec![word],
            search_depth: 4,
        };
        let comp = circle_component(0);
        let s = pull_back_bump(&bump, &comp, &spec, 4).unwrap();
        // Fixed angles of the model image: infinity at 0, origin at pi.
        assert_eq!(s.len(), 2);
        assert!(s.angles()[0].abs() < 1e-9);
        assert!((s.angles()[1] - PI).abs() < 1e-9);
        let core = convex_hull_boundary(&s, GAP_EPS).unwrap();
        assert_eq!(core.len(), 1);
        let out = classify_quotient(0, &core, &s, &[doubling()], 6).unwrap();
        assert_eq!(out.quotient_kind, QuotientKind::SimpleClosedGeodesic);
    }

    #[test]
    fn full_boundary_bump_pulls_back_dense() {
        let spec = GroupSpec::from_maps(&[("a", doubling())])
            .unwrap()
            .with_self_model()
            .unwrap();
        let bump = BumpRecord {
            component_ids: vec![0, 1],
            bump_points: vec![],
            cardinality_class: CardinalityClass::FullBoundary,
            common_stabilizer_words: vec![],
            search_depth: 4,
        };
        let s = pull_back_bump(&bump, &circle_component(0), &spec, 4).unwrap();
        assert!(s.is_dense(GAP_EPS));
        assert!(s.is_empty());
    }

    #[test]
    fn missing_model_is_rejected() {
        let spin = MoebiusMap::scaling(num_complex::Complex64::new(0.0, 2.0)).unwrap();
        let spec = GroupSpec::from_maps(&[("a", spin)]).unwrap();
        let bump = BumpRecord {
            component_ids: vec![0, 1],
            bump_points: vec![SpherePoint::finite(0.0, 0.0), SpherePoint::Infinity],
            cardinality_class: CardinalityClass::TwoPoint(
                SpherePoint::finite(0.0, 0.0),
                SpherePoint::Infinity,
            ),
            common_stabilizer_words: vec![],
            search_depth: 4,
        };
        let err = pull_back_bump(&bump, &circle_component(0), &spec, 4).unwrap_err();
        assert!(matches!(err, Error::NoFuchsianModel(0)));
    }
}
