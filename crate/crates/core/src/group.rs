//! Group presentations over Möbius generators: freely reduced words,
//! depth-first enumeration with prefix pruning, square-root adjunction, and
//! the correspondence to a real-matrix model of a component stabilizer.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::moebius::{MoebiusMap, SpherePoint};
use crate::pointset::{directed_hausdorff_capped, ChordalIndex};
use crate::tolerances::{MAX_DEPTH, MIN_QUASICIRCLE_POINTS, TOL_TR};

/// One signed generator occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u16,
    pub inv: bool,
}

impl Letter {
    pub fn positive(gen: usize) -> Self {
        Letter {
            gen: gen as u16,
            inv: false,
        }
    }

    pub fn negative(gen: usize) -> Self {
        Letter {
            gen: gen as u16,
            inv: true,
        }
    }

    #[must_use]
    pub fn inverse(self) -> Self {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inv != other.inv
    }

    /// Enumeration slot: g0, g0', g1, g1', ...
    pub fn slot(self) -> usize {
        self.gen as usize * 2 + usize::from(self.inv)
    }

    pub fn from_slot(slot: usize) -> Self {
        Letter {
            gen: (slot / 2) as u16,
            inv: slot % 2 == 1,
        }
    }
}

/// Free reduction: cancel adjacent inverse pairs until none remain.
pub fn reduce_letters(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last().is_some_and(|last| last.cancels(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Freely reduced word with its cached sphere action.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    letters: Vec<Letter>,
    map: MoebiusMap,
}

impl Word {
    pub fn identity() -> Self {
        Word {
            letters: Vec::new(),
            map: MoebiusMap::identity(),
        }
    }

    /// Reduces, then evaluates against the spec's generators.
    pub fn from_letters(letters: &[Letter], spec: &GroupSpec) -> Result<Self> {
        let letters = reduce_letters(letters);
        let map = spec.evaluate(&letters)?;
        Ok(Word { letters, map })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn map(&self) -> &MoebiusMap {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let letters: Vec<Letter> = self.letters.iter().rev().map(|l| l.inverse()).collect();
        Word {
            letters,
            map: self.map.inverse(),
        }
    }

    /// Concatenation with free reduction; the cached map multiplies directly
    /// since cancellation does not change the group element.
    pub fn concat(&self, other: &Word) -> Self {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last().is_some_and(|last| last.cancels(l)) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Word {
            letters,
            map: self.map.compose(&other.map),
        }
    }

    pub fn pow(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Human-readable form using the spec's labels; inverses get a prime.
    pub fn display(&self, spec: &GroupSpec) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        let mut s = String::new();
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                s.push('.');
            }
            match spec.generators().get(l.gen as usize) {
                Some(g) => s.push_str(&g.label),
                None => s.push('?'),
            }
            if l.inv {
                s.push('\'');
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub label: String,
    pub map: MoebiusMap,
}

/// Which square root of a generator gets adjoined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtBranch {
    /// Trace in the right half plane; powers of the original stay on one side.
    Principal,
    /// Principal branch composed with the half-turn about the axis; this is
    /// the root that can swap the two sides of an invariant circle.
    Rotated,
}

#[derive(Debug, Clone)]
pub struct Adjunction {
    pub label: String,
    pub branch: SqrtBranch,
}

/// How a generator relates to the real-matrix model of the designated
/// component stabilizer.
#[derive(Debug, Clone, Copy)]
pub enum ModelEntry {
    /// phi(g) itself is known.
    Direct(MoebiusMap),
    /// Only phi(g^2) is known: g was adjoined as a square root that does
    /// not stabilize the designated component, so the model stays attached
    /// to the even subgroup.
    SquareOnly(MoebiusMap),
    /// The label is outside the designated stabilizer.
    Absent,
}

#[derive(Debug, Clone)]
pub struct FuchsianModel {
    entries: Vec<ModelEntry>,
}

impl FuchsianModel {
    pub fn entry(&self, gen: usize) -> ModelEntry {
        self.entries.get(gen).copied().unwrap_or(ModelEntry::Absent)
    }
}

/// Labeled generators plus adjunction history and the optional model.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    generators: Vec<Generator>,
    adjunctions: Vec<Adjunction>,
    fuchsian_model: Option<FuchsianModel>,
}

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        return Err(Error::BadLabel(label.to_string()));
    }
    Ok(())
}

impl GroupSpec {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyGroup);
        }
        for (i, g) in generators.iter().enumerate() {
            validate_label(&g.label)?;
            if generators[..i].iter().any(|h| h.label == g.label) {
                return Err(Error::BadLabel(g.label.clone()));
            }
            if g.map.is_identity(TOL_TR) {
                return Err(Error::IdentityAdjunction);
            }
        }
        Ok(GroupSpec {
            generators,
            adjunctions: Vec::new(),
            fuchsian_model: None,
        })
    }

    pub fn from_maps(labeled: &[(&str, MoebiusMap)]) -> Result<Self> {
        Self::new(
            labeled
                .iter()
                .map(|(l, m)| Generator {
                    label: l.to_string(),
                    map: *m,
                })
                .collect(),
        )
    }

    /// Attaches a real-matrix model covering the given labels.  Every entry
    /// must be real within trace tolerance; unlisted labels become Absent.
    pub fn with_fuchsian_model(mut self, labeled: &[(&str, MoebiusMap)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let found = labeled.iter().find(|(l, _)| *l == g.label);
            match found {
                Some((_, m)) => {
                    if !m.is_real(TOL_TR) {
                        return Err(Error::invalid(
                            "fuchsian model entries must have real entries",
                        ));
                    }
                    entries.push(ModelEntry::Direct(*m));
                }
                None => entries.push(ModelEntry::Absent),
            }
        }
        for (l, _) in labeled {
            if !self.generators.iter().any(|g| g.label == *l) {
                return Err(Error::UnknownLabel((*l).to_string()));
            }
        }
        self.fuchsian_model = Some(FuchsianModel { entries });
        Ok(self)
    }

    /// The identity representation: each generator models itself.  Valid
    /// only when every generator is already real.
    pub fn with_self_model(self) -> Result<Self> {
        for g in &self.generators {
            if !g.map.is_real(TOL_TR) {
                return Err(Error::invalid(
                    "self model requires real generator matrices",
                ));
            }
        }
        let entries = self
            .generators
            .iter()
            .map(|g| ModelEntry::Direct(g.map))
            .collect();
        let mut spec = self;
        spec.fuchsian_model = Some(FuchsianModel { entries });
        Ok(spec)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn adjunctions(&self) -> &[Adjunction] {
        &self.adjunctions
    }

    pub fn fuchsian_model(&self) -> Option<&FuchsianModel> {
        self.fuchsian_model.as_ref()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn generator_map(&self, letter: Letter) -> Result<MoebiusMap> {
        let g = self
            .generators
            .get(letter.gen as usize)
            .ok_or_else(|| Error::UnknownLabel(letter.gen.to_string()))?;
        Ok(if letter.inv { g.map.inverse() } else { g.map })
    }

    pub fn evaluate(&self, letters: &[Letter]) -> Result<MoebiusMap> {
        let mut m = MoebiusMap::identity();
        for &l in letters {
            m = m.compose(&self.generator_map(l)?);
        }
        Ok(m)
    }

    pub fn word(&self, letters: &[Letter]) -> Result<Word> {
        Word::from_letters(letters, self)
    }

    /// Replaces generator `label` by a square root of its map.  The old
    /// generator stays expressible as the square of the new one.  A model
    /// entry for the label degrades from Direct to SquareOnly: the root is
    /// not assumed to stabilize the designated component, so the model
    /// keeps covering only the even subgroup in that letter.
    pub fn adjoin_sqrt(&self, label: &str, branch: SqrtBranch) -> Result<GroupSpec> {
        let idx = self.index_of(label)?;
        let old = self.generators[idx].map;
        if old.is_identity(TOL_TR) {
            return Err(Error::IdentityAdjunction);
        }
        let root = match branch {
            SqrtBranch::Principal => old.sqrt()?,
            SqrtBranch::Rotated => old.sqrt_rotated()?,
        };
        let mut generators = self.generators.clone();
        generators[idx].map = root;
        let fuchsian_model = self.fuchsian_model.as_ref().map(|m| {
            let mut entries = m.entries.clone();
            entries[idx] = match entries[idx] {
                ModelEntry::Direct(phi) => ModelEntry::SquareOnly(phi),
                // An already-degraded entry now only knows phi(g^4); that is
                // no longer expressible per letter, so coverage drops.
                ModelEntry::SquareOnly(_) | ModelEntry::Absent => ModelEntry::Absent,
            };
            FuchsianModel { entries }
        });
        let mut adjunctions = self.adjunctions.clone();
        adjunctions.push(Adjunction {
            label: label.to_string(),
            branch,
        });
        Ok(GroupSpec {
            generators,
            adjunctions,
            fuchsian_model,
        })
    }

    /// Restores the square-only scope on a model entry; used when deriving
    /// sub-specs whose labels came from an adjunction.
    pub(crate) fn degrade_model_entry(&mut self, label: &str) -> Result<()> {
        let idx = self.index_of(label)?;
        if let Some(m) = &mut self.fuchsian_model {
            if let ModelEntry::Direct(phi) = m.entries[idx] {
                m.entries[idx] = ModelEntry::SquareOnly(phi);
            }
        }
        Ok(())
    }

    pub(crate) fn push_adjunction_record(&mut self, adj: Adjunction) {
        self.adjunctions.push(adj);
    }

    /// Does the model cover this word?  SquareOnly letters must appear in
    /// runs of even length (the word then lies in the even subgroup for
    /// that letter and phi extends).
    pub fn model_covers(&self, word: &Word) -> bool {
        self.phi_of_word(word).is_ok()
    }

    /// Image of the word under the component-stabilizer model.
    pub fn phi_of_word(&self, word: &Word) -> Result<MoebiusMap> {
        let model = self
            .fuchsian_model
            .as_ref()
            .ok_or(Error::NoFuchsianModel(0))?;
        let mut out = MoebiusMap::identity();
        let letters = word.letters();
        let mut i = 0;
        while i < letters.len() {
            let l = letters[i];
            // Maximal same-generator run; signs agree inside a reduced word.
            let mut j = i;
            while j < letters.len() && letters[j].gen == l.gen {
                debug_assert_eq!(letters[j].inv, l.inv);
                j += 1;
            }
            let run = j - i;
            match model.entry(l.gen as usize) {
                ModelEntry::Direct(phi) => {
                    let step = if l.inv { phi.inverse() } else { phi };
                    for _ in 0..run {
                        out = out.compose(&step);
                    }
                }
                ModelEntry::SquareOnly(phi_sq) => {
                    if run % 2 != 0 {
                        return Err(Error::NoFuchsianModel(l.gen as usize));
                    }
                    let step = if l.inv { phi_sq.inverse() } else { phi_sq };
                    for _ in 0..run / 2 {
                        out = out.compose(&step);
                    }
                }
                ModelEntry::Absent => {
                    return Err(Error::NoFuchsianModel(l.gen as usize));
                }
            }
            i = j;
        }
        Ok(out)
    }
}

/// Visitor verdict for enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continue,
    /// Skip all extensions of the current word.
    Prune,
}

/// Borrowed view of the word at the current enumeration node.
#[derive(Debug, Clone, Copy)]
pub struct WordRef<'a> {
    pub letters: &'a [Letter],
    pub map: &'a MoebiusMap,
    /// Chordal radius bound for the image of the sphere under this word's
    /// map, estimated from the spherical derivative at the base point 0.
    pub radius: f64,
}

impl WordRef<'_> {
    pub fn to_word(&self) -> Word {
        Word {
            letters: self.letters.to_vec(),
            map: *self.map,
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Spherical derivative of the map at z = 0 times the sphere diameter:
/// for det-one matrices this is 2 / (|b|^2 + |d|^2).  Words acting with a
/// small bound have squeezed the whole base neighbourhood into a small
/// chordal disc, which is the standard prune signal.
pub fn radius_bound(map: &MoebiusMap) -> f64 {
    2.0 / (map.b.norm_sqr() + map.d.norm_sqr())
}

/// Depth-first traversal of all freely reduced words of length <= max_len,
/// children in slot order.  Every word is visited exactly once; returning
/// Prune skips the subtree below the current word.
pub fn enumerate<F>(spec: &GroupSpec, max_len: u32, f: F) -> Result<()>
where
    F: FnMut(WordRef<'_>) -> Step,
{
    enumerate_from(spec, &Word::identity(), max_len, f)
}

/// Same traversal restricted to the subtree of `prefix` (inclusive).  Used
/// to partition work across threads: the subtrees of the identity's 2n
/// one-letter extensions are disjoint and cover everything but the root.
pub fn enumerate_from<F>(spec: &GroupSpec, prefix: &Word, max_len: u32, mut f: F) -> Result<()>
where
    F: FnMut(WordRef<'_>) -> Step,
{
    if max_len > MAX_DEPTH {
        return Err(Error::DepthCap(max_len, MAX_DEPTH));
    }
    if spec.generators.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let slots: Vec<MoebiusMap> = {
        let mut v = Vec::with_capacity(spec.rank() * 2);
        for i in 0..spec.rank() {
            v.push(spec.generator_map(Letter::positive(i))?);
            v.push(spec.generator_map(Letter::negative(i))?);
        }
        v
    };
    let mut letters: Vec<Letter> = prefix.letters().to_vec();
    if letters.len() > max_len as usize {
        return Ok(());
    }
    // maps[k] = product of the first k letters.
    let mut maps: Vec<MoebiusMap> = Vec::with_capacity(max_len as usize + 1);
    maps.push(MoebiusMap::identity());
    for &l in prefix.letters() {
        let m = maps.last().unwrap().compose(&spec.generator_map(l)?);
        maps.push(m);
    }
    dfs(&slots, &mut letters, &mut maps, max_len as usize, &mut f);
    Ok(())
}

fn dfs<F>(
    slots: &[MoebiusMap],
    letters: &mut Vec<Letter>,
    maps: &mut Vec<MoebiusMap>,
    max_len: usize,
    f: &mut F,
) where
    F: FnMut(WordRef<'_>) -> Step,
{
    let map = *maps.last().unwrap();
    let step = f(WordRef {
        letters,
        map: &map,
        radius: radius_bound(&map),
    });
    if step == Step::Prune || letters.len() == max_len {
        return;
    }
    let last = letters.last().copied();
    for slot in 0..slots.len() {
        let l = Letter::from_slot(slot);
        if last.is_some_and(|prev| prev.cancels(l)) {
            continue;
        }
        letters.push(l);
        maps.push(map.compose(&slots[slot]));
        dfs(slots, letters, maps, max_len, f);
        letters.pop();
        maps.pop();
    }
}

/// Total freely reduced words of length <= max_len over `rank` generators.
pub fn word_count(rank: usize, max_len: u32) -> u64 {
    let n = rank as u64;
    let mut total = 1u64;
    let mut level = 2 * n;
    for _ in 0..max_len {
        total += level;
        level *= 2 * n - 1;
    }
    total
}

/// Numeric stabilizer surrogate: does the map carry the sampled boundary
/// circle into itself?  Directed Hausdorff from the image sample to the
/// original, capped at `tol`.  A Möbius map sending the underlying circle
/// into itself is automatically onto it, so the directed test suffices at
/// sampling resolution.
pub fn stabilizes_sample(
    map: &MoebiusMap,
    sample: &[SpherePoint],
    index: &ChordalIndex,
    tol: f64,
) -> Result<bool> {
    if sample.len() < MIN_QUASICIRCLE_POINTS {
        return Err(Error::InsufficientSample {
            got: sample.len(),
            need: MIN_QUASICIRCLE_POINTS,
        });
    }
    for p in sample {
        let q = map.apply(*p);
        if index.min_dist_capped(q, tol).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Convenience wrapper building the index on the fly.
pub fn stabilizes(map: &MoebiusMap, sample: &[SpherePoint], tol: f64) -> Result<bool> {
    let index = ChordalIndex::with_points(tol.max(1e-6), sample);
    stabilizes_sample(map, sample, &index, tol)
}

/// Symmetric variant used where the full Hausdorff value is wanted.
pub fn sample_invariance_defect(
    map: &MoebiusMap,
    sample: &[SpherePoint],
    cap: f64,
) -> Option<f64> {
    let image: Vec<SpherePoint> = sample.iter().map(|p| map.apply(*p)).collect();
    let idx_sample = ChordalIndex::with_points(cap.clamp(1e-4, 0.25), sample);
    let idx_image = ChordalIndex::with_points(cap.clamp(1e-4, 0.25), &image);
    let d1 = directed_hausdorff_capped(&image, &idx_sample, cap)?;
    let d2 = directed_hausdorff_capped(sample, &idx_image, cap)?;
    Some(d1.max(d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;
    use alloc::collections::BTreeSet;
    use alloc::vec;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn real_map(a: f64, b: f64, c: f64, d: f64) -> MoebiusMap {
        MoebiusMap::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(d, 0.0),
        )
        .unwrap()
    }

    /// Rank-2 group with parabolic commutator: tr(ABA'B') = -2.
    fn punctured_torus() -> GroupSpec {
        GroupSpec::from_maps(&[
            ("a", real_map(1.0, 1.0, 1.0, 2.0)),
            ("b", real_map(1.0, -1.0, -1.0, 2.0)),
        ])
        .unwrap()
    }

    #[test]
    fn reduce_cancels_inverse_pairs() {
        let a = Letter::positive(0);
        let b = Letter::positive(1);
        assert!(reduce_letters(&[a, a.inverse()]).is_empty());
        assert_eq!(reduce_letters(&[a, b, b.inverse(), a]), vec![a, a]);
        let already = vec![a, b, a.inverse()];
        assert_eq!(reduce_letters(&already), already);
    }

    #[test]
    fn reduce_handles_nested_cancellation() {
        let a = Letter::positive(0);
        let b = Letter::positive(1);
        // a b b' a' collapses completely.
        assert!(reduce_letters(&[a, b, b.inverse(), a.inverse()]).is_empty());
    }

    #[test]
    fn word_concat_reduces_and_tracks_map() {
        let spec = punctured_torus();
        let ab = spec
            .word(&[Letter::positive(0), Letter::positive(1)])
            .unwrap();
        let ba_inv = ab.inverse();
        let prod = ab.concat(&ba_inv);
        assert!(prod.is_empty());
        assert!(prod.map().is_identity(1e-12));
    }

    #[test]
    fn commutator_is_parabolic() {
        let spec = punctured_torus();
        let a = Letter::positive(0);
        let b = Letter::positive(1);
        let comm = spec
            .word(&[a, b, a.inverse(), b.inverse()])
            .unwrap();
        let t = comm.map().trace();
        assert!((t.re.abs() - 2.0).abs() < 1e-12, "trace {t}");
        assert!(t.im.abs() < 1e-12);
    }

    #[test]
    fn enumeration_counts_match_free_growth() {
        let spec = punctured_torus();
        for (depth, expect) in [(0u32, 1u64), (1, 5), (2, 17), (3, 53)] {
            let mut count = 0u64;
            enumerate(&spec, depth, |_| {
                count += 1;
                Step::Continue
            })
            .unwrap();
            assert_eq!(count, expect, "depth {depth}");
            assert_eq!(word_count(2, depth), expect);
        }
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let spec = punctured_torus();
        let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
        enumerate(&spec, 5, |w| {
            assert!(seen.insert(w.letters.to_vec()), "duplicate {:?}", w.letters);
            Step::Continue
        })
        .unwrap();
        assert_eq!(seen.len() as u64, word_count(2, 5));
    }

    #[test]
    fn prune_skips_subtrees() {
        let spec = punctured_torus();
        let mut count = 0u64;
        enumerate(&spec, 6, |w| {
            count += 1;
            if w.len() >= 1 {
                Step::Prune
            } else {
                Step::Continue
            }
        })
        .unwrap();
        assert_eq!(count, 5);
    }

    #[test]
    fn prefix_partition_covers_everything_once() {
        let spec = punctured_torus();
        let mut full: BTreeSet<Vec<Letter>> = BTreeSet::new();
        enumerate(&spec, 4, |w| {
            full.insert(w.letters.to_vec());
            Step::Continue
        })
        .unwrap();
        let mut parts: BTreeSet<Vec<Letter>> = BTreeSet::new();
        parts.insert(Vec::new());
        for slot in 0..4 {
            let prefix = spec.word(&[Letter::from_slot(slot)]).unwrap();
            enumerate_from(&spec, &prefix, 4, |w| {
                assert!(parts.insert(w.letters.to_vec()));
                Step::Continue
            })
            .unwrap();
        }
        assert_eq!(full, parts);
    }

    #[test]
    fn depth_cap_is_enforced() {
        let spec = punctured_torus();
        let err = enumerate(&spec, MAX_DEPTH + 1, |_| Step::Continue).unwrap_err();
        assert!(matches!(err, Error::DepthCap(_, _)));
    }

    #[test]
    fn radius_bound_shrinks_along_words() {
        let spec = punctured_torus();
        // The bound at the root is the sphere diameter.
        enumerate(&spec, 0, |w| {
            assert!((w.radius - 2.0).abs() < 1e-12);
            Step::Continue
        })
        .unwrap();
        // Deep powers of a hyperbolic map squeeze the sphere hard.
        let a = spec.word(&[Letter::positive(0)]).unwrap();
        let a8 = a.pow(8);
        assert!(radius_bound(a8.map()) < 1e-4);
    }

    #[test]
    fn spec_rejects_bad_input() {
        let m = real_map(2.0, 0.0, 0.0, 0.5);
        assert!(matches!(
            GroupSpec::from_maps(&[("", m)]),
            Err(Error::BadLabel(_))
        ));
        assert!(matches!(
            GroupSpec::from_maps(&[("a", m), ("a", m)]),
            Err(Error::BadLabel(_))
        ));
        assert!(matches!(
            GroupSpec::from_maps(&[("a", MoebiusMap::identity())]),
            Err(Error::IdentityAdjunction)
        ));
        assert!(matches!(
            GroupSpec::new(Vec::new()),
            Err(Error::EmptyGroup)
        ));
    }

    #[test]
    fn adjoin_sqrt_replaces_generator() {
        let spec = punctured_torus();
        let adj = spec.adjoin_sqrt("a", SqrtBranch::Principal).unwrap();
        let gamma = adj.generators()[0].map;
        let original = spec.generators()[0].map;
        assert!(gamma.compose(&gamma).same_action(&original, 1e-9));
        assert_eq!(adj.adjunctions().len(), 1);
        // Second generator untouched.
        assert!(adj.generators()[1]
            .map
            .same_action(&spec.generators()[1].map, 1e-12));
    }

    #[test]
    fn adjoin_sqrt_twice_gives_fourth_root() {
        let spec = punctured_torus();
        let adj = spec
            .adjoin_sqrt("a", SqrtBranch::Principal)
            .unwrap()
            .adjoin_sqrt("a", SqrtBranch::Principal)
            .unwrap();
        let root = adj.generators()[0].map;
        let fourth = root
            .compose(&root)
            .compose(&root)
            .compose(&root);
        assert!(fourth.same_action(&spec.generators()[0].map, 1e-8));
    }

    #[test]
    fn adjoin_sqrt_rotated_also_squares_back() {
        let spec = punctured_torus();
        let adj = spec.adjoin_sqrt("a", SqrtBranch::Rotated).unwrap();
        let gamma = adj.generators()[0].map;
        assert!(gamma
            .compose(&gamma)
            .same_action(&spec.generators()[0].map, 1e-9));
        // The two branches differ as sphere actions.
        let principal = spec
            .adjoin_sqrt("a", SqrtBranch::Principal)
            .unwrap()
            .generators()[0]
            .map;
        assert!(!gamma.same_action(&principal, 1e-6));
    }

    #[test]
    fn adjoin_unknown_label_fails() {
        let spec = punctured_torus();
        assert!(matches!(
            spec.adjoin_sqrt("c", SqrtBranch::Principal),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn model_maps_direct_words() {
        let spec = punctured_torus().with_self_model().unwrap();
        let w = spec
            .word(&[Letter::positive(0), Letter::positive(1)])
            .unwrap();
        let phi = spec.phi_of_word(&w).unwrap();
        assert!(phi.same_action(w.map(), 1e-12));
    }

    #[test]
    fn model_survives_adjunction_on_even_runs() {
        let spec = punctured_torus().with_self_model().unwrap();
        let adj = spec.adjoin_sqrt("a", SqrtBranch::Principal).unwrap();
        let a = Letter::positive(0);
        let b = Letter::positive(1);
        // Odd runs of the adjoined letter fall outside the even subgroup.
        let odd = adj.word(&[a]).unwrap();
        assert!(matches!(
            adj.phi_of_word(&odd),
            Err(Error::NoFuchsianModel(0))
        ));
        let mixed_odd = adj.word(&[a, b, a]).unwrap();
        assert!(adj.phi_of_word(&mixed_odd).is_err());
        // Even runs map to powers of the original generator's model image.
        let even = adj.word(&[a, a]).unwrap();
        let phi = adj.phi_of_word(&even).unwrap();
        assert!(phi.same_action(&real_map(1.0, 1.0, 1.0, 2.0), 1e-12));
        let sandwich = adj.word(&[a, a, b, a, a, a, a]).unwrap();
        let phi2 = adj.phi_of_word(&sandwich).unwrap();
        let a_m = real_map(1.0, 1.0, 1.0, 2.0);
        let b_m = real_map(1.0, -1.0, -1.0, 2.0);
        let expect = a_m.compose(&b_m).compose(&a_m).compose(&a_m);
        assert!(phi2.same_action(&expect, 1e-10));
        // Inverse runs map to inverse powers.
        let inv_even = adj.word(&[a.inverse(), a.inverse()]).unwrap();
        let phi3 = adj.phi_of_word(&inv_even).unwrap();
        assert!(phi3.same_action(&a_m.inverse(), 1e-12));
    }

    #[test]
    fn model_requires_real_entries() {
        let rot = MoebiusMap::new(
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
        )
        .unwrap();
        let spec = GroupSpec::from_maps(&[("g", rot)]).unwrap();
        assert!(spec.with_self_model().is_err());
    }

    fn real_line_sample(n: usize) -> Vec<SpherePoint> {
        // Chordal-uniform sample of R union infinity.
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
    fn real_maps_stabilize_the_real_line_sample() {
        let spec = punctured_torus();
        let sample = real_line_sample(512);
        for gen in spec.generators() {
            assert!(stabilizes(&gen.map, &sample, 0.05).unwrap());
        }
        // A genuinely complex map moves the line.
        let rot = MoebiusMap::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert!(!stabilizes(&rot, &sample, 0.05).unwrap());
    }

    #[test]
    fn identity_always_stabilizes() {
        let sample = real_line_sample(64);
        assert!(stabilizes(&MoebiusMap::identity(), &sample, 1e-6).unwrap());
    }

    #[test]
    fn stabilizer_test_needs_enough_points() {
        let sample = real_line_sample(4);
        assert!(matches!(
            stabilizes(&MoebiusMap::identity(), &sample, 1e-6),
            Err(Error::InsufficientSample { .. })
        ));
    }

    #[test]
    fn scaling_does_not_stabilize_unit_circle() {
        let n = 256;
        let circle: Vec<SpherePoint> = (0..n)
            .map(|k| {
                let t = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
                SpherePoint::finite(math::cos(t), math::sin(t))
            })
            .collect();
        let two = real_map(2.0, 0.0, 0.0, 0.5);
        assert!(!stabilizes(&two, &circle, 5e-3).unwrap());
        // But the rotation z -> iz does.
        let rot = MoebiusMap::new(
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert!(stabilizes(&rot, &circle, 5e-3).unwrap());
    }

    fn arb_letters() -> impl Strategy<Value = Vec<Letter>> {
        proptest::collection::vec((0..2u16, proptest::bool::ANY), 0..12).prop_map(|ls| {
            ls.into_iter()
                .map(|(gen, inv)| Letter { gen, inv })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(ls in arb_letters()) {
            let once = reduce_letters(&ls);
            let twice = reduce_letters(&once);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn cached_map_matches_fresh_product(ls in arb_letters()) {
            let spec = punctured_torus();
            let word = spec.word(&ls).unwrap();
            // Fresh product over the unreduced letters: same group element.
            let mut fresh = MoebiusMap::identity();
            for &l in &ls {
                fresh = fresh.compose(&spec.generator_map(l).unwrap());
            }
            prop_assert!(word.map().same_action(&fresh, 1e-7));
        }

        #[test]
        fn concat_agrees_with_evaluation(xs in arb_letters(), ys in arb_letters()) {
            let spec = punctured_torus();
            let wx = spec.word(&xs).unwrap();
            let wy = spec.word(&ys).unwrap();
            let cat = wx.concat(&wy);
            let mut joined = xs.clone();
            joined.extend_from_slice(&ys);
            let direct = spec.word(&joined).unwrap();
            prop_assert_eq!(cat.letters(), direct.letters());
            prop_assert!(cat.map().same_action(direct.map(), 1e-7));
        }
    }
}
