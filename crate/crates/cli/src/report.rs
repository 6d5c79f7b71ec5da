//! Report emission.  Every report is a typed structure serialized to JSON
//! with a schema version, the group hash, and the effective depths and
//! tolerances, so a report is interpretable without its config.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use kleinian_core::bumping::{BumpRecord, CardinalityClass};
use kleinian_core::charsub::{BundleBase, Decomposition, PieceKind};
use kleinian_core::components::ComponentRecord;
use kleinian_core::group::{GroupSpec, Word};
use kleinian_core::limitset::LimitSample;
use kleinian_core::moebius::SpherePoint;
use kleinian_core::nielsen::NielsenCoreResult;
use kleinian_core::tolerances;

use crate::pipeline::{ComponentEstimate, Params};
use crate::CliError;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Depths {
    pub limit: u32,
    pub stabilizer: u32,
    pub orbit: u32,
    pub matching: u32,
}

impl Depths {
    pub fn new(p: &Params) -> Depths {
        Depths {
            limit: p.depth,
            stabilizer: p.stabilizer_depth,
            orbit: p.orbit_depth,
            matching: p.match_depth,
        }
    }
}

/// Effective tolerance table: compile-time pins plus the two runtime
/// parameters (prune_eps, gap_eps).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ToleranceTable {
    pub tol_det: f64,
    pub tol_tr: f64,
    pub tol_pt: f64,
    pub tol_bump: f64,
    pub tol_gap: f64,
    pub tol_stab: f64,
    pub tol_ang: f64,
    pub tol_acc: f64,
    pub gap_eps: f64,
    pub prune_eps: f64,
}

impl ToleranceTable {
    pub fn new(p: &Params) -> ToleranceTable {
        ToleranceTable {
            tol_det: tolerances::TOL_DET,
            tol_tr: tolerances::TOL_TR,
            tol_pt: tolerances::TOL_PT,
            tol_bump: tolerances::TOL_BUMP,
            tol_gap: tolerances::TOL_GAP,
            tol_stab: tolerances::TOL_STAB,
            tol_ang: tolerances::TOL_ANG,
            tol_acc: tolerances::TOL_ACC,
            gap_eps: p.gap_eps,
            prune_eps: p.prune_eps,
        }
    }
}

/// Finite points as [re, im], the north pole as "inf".
pub fn point_json(p: SpherePoint) -> Value {
    match p {
        SpherePoint::Finite(z) => serde_json::json!([z.re, z.im]),
        SpherePoint::Infinity => Value::String("inf".into()),
    }
}

/// Space-separated generator labels, inverses suffixed ^-1.
pub fn word_string(word: &Word, spec: &GroupSpec) -> String {
    if word.letters().is_empty() {
        return "1".into();
    }
    let mut out = String::new();
    for (i, l) in word.letters().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match spec.generators().get(l.gen as usize) {
            Some(g) => out.push_str(&g.label),
            None => out.push_str(&format!("g{}", l.gen)),
        }
        if l.inv {
            out.push_str("^-1");
        }
    }
    out
}

fn class_string(class: &CardinalityClass) -> &'static str {
    match class {
        CardinalityClass::TwoPoint(..) => "TwoPoint",
        CardinalityClass::InfiniteProper => "InfiniteProper",
        CardinalityClass::FullBoundary => "FullBoundary",
    }
}

#[derive(Serialize)]
pub struct ComponentsReport {
    pub schema: u32,
    pub group: String,
    pub sample_points: usize,
    pub components: Vec<ComponentJson>,
    pub assumptions: Vec<String>,
    pub depths: Depths,
    pub tolerances: ToleranceTable,
}

#[derive(Serialize)]
pub struct ComponentJson {
    pub id: usize,
    pub region: Option<usize>,
    pub witness: Value,
    pub boundary_points: usize,
    pub stabilizer: Vec<String>,
}

pub fn components_report(
    group: &str,
    spec: &GroupSpec,
    sample: &LimitSample,
    records: &[ComponentRecord],
    assumptions: Vec<String>,
    p: &Params,
) -> ComponentsReport {
    ComponentsReport {
        schema: REPORT_SCHEMA,
        group: group.into(),
        sample_points: sample.len(),
        components: records
            .iter()
            .map(|r| ComponentJson {
                id: r.id,
                region: r.raster_region_id,
                witness: point_json(r.interior_witness),
                boundary_points: r.quasicircle.len(),
                stabilizer: r
                    .stabilizer_generators
                    .iter()
                    .map(|w| word_string(w, spec))
                    .collect(),
            })
            .collect(),
        assumptions,
        depths: Depths::new(p),
        tolerances: ToleranceTable::new(p),
    }
}

#[derive(Serialize)]
pub struct BumpsReport {
    pub schema: u32,
    pub group: String,
    pub bumps: Vec<BumpJson>,
    pub assumptions: Vec<String>,
    pub depths: Depths,
    pub tolerances: ToleranceTable,
}

#[derive(Serialize)]
pub struct BumpJson {
    pub components: Vec<usize>,
    pub class: String,
    pub points: Vec<Value>,
    pub stabilizer: Vec<String>,
    pub search_depth: u32,
}

pub fn bumps_report(
    group: &str,
    spec: &GroupSpec,
    bumps: &[BumpRecord],
    assumptions: Vec<String>,
    p: &Params,
) -> BumpsReport {
    BumpsReport {
        schema: REPORT_SCHEMA,
        group: group.into(),
        bumps: bumps.iter().map(|b| bump_json(spec, b)).collect(),
        assumptions,
        depths: Depths::new(p),
        tolerances: ToleranceTable::new(p),
    }
}

fn bump_json(spec: &GroupSpec, b: &BumpRecord) -> BumpJson {
    BumpJson {
        components: b.component_ids.clone(),
        class: class_string(&b.cardinality_class).into(),
        points: b.bump_points.iter().map(|&p| point_json(p)).collect(),
        stabilizer: b
            .common_stabilizer_words
            .iter()
            .map(|w| word_string(w, spec))
            .collect(),
        search_depth: b.search_depth,
    }
}

#[derive(Serialize)]
pub struct NielsenReport {
    pub schema: u32,
    pub group: String,
    pub cores: Vec<CoreJson>,
    pub assumptions: Vec<String>,
    pub depths: Depths,
    pub tolerances: ToleranceTable,
}

#[derive(Serialize)]
pub struct CoreJson {
    pub bump: usize,
    pub component: usize,
    pub kind: String,
    pub geodesics: Vec<[f64; 2]>,
    pub classes: Vec<usize>,
    pub checks: Vec<CheckJson>,
}

#[derive(Serialize)]
pub struct CheckJson {
    pub class: usize,
    pub simple: bool,
    pub nonaccumulating: bool,
    pub cusp_free: bool,
}

/// Cores arrive bump-major; the bump index is reconstructed by walking the
/// member lists.
pub fn nielsen_report(
    group: &str,
    bumps: &[BumpRecord],
    cores: &[NielsenCoreResult],
    assumptions: Vec<String>,
    p: &Params,
) -> NielsenReport {
    let mut entries = Vec::new();
    let mut cursor = 0usize;
    for (b, bump) in bumps.iter().enumerate() {
        for _ in &bump.component_ids {
            if let Some(core) = cores.get(cursor) {
                entries.push(CoreJson {
                    bump: b,
                    component: core.component_id,
                    kind: format!("{:?}", core.quotient_kind),
                    geodesics: core
                        .boundary_geodesics
                        .iter()
                        .map(|g| {
                            let (a, b) = g.endpoints();
                            [a, b]
                        })
                        .collect(),
                    classes: core.image_curve_classes.clone(),
                    checks: core
                        .check_report
                        .iter()
                        .map(|c| CheckJson {
                            class: c.class_id,
                            simple: c.simple,
                            nonaccumulating: c.nonaccumulating,
                            cusp_free: c.cusp_free,
                        })
                        .collect(),
                });
            }
            cursor += 1;
        }
    }
    NielsenReport {
        schema: REPORT_SCHEMA,
        group: group.into(),
        cores: entries,
        assumptions,
        depths: Depths::new(p),
        tolerances: ToleranceTable::new(p),
    }
}

#[derive(Serialize)]
pub struct CharsubReport {
    pub schema: u32,
    pub group: String,
    pub pieces: Vec<PieceJson>,
    pub assumptions: Vec<String>,
    pub depths: Depths,
    pub tolerances: ToleranceTable,
}

#[derive(Serialize)]
pub struct PieceJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    pub n: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twisted: Option<bool>,
    pub boundary_annuli: usize,
    pub curve_classes: Vec<String>,
    pub thickened: Vec<String>,
    pub bump: BumpRefJson,
}

#[derive(Serialize)]
pub struct BumpRefJson {
    pub points: Vec<Value>,
    pub class: String,
}

pub fn charsub_report(
    group: &str,
    bumps: &[BumpRecord],
    decomposition: &Decomposition,
    assumptions: Vec<String>,
    p: &Params,
) -> CharsubReport {
    let pieces = decomposition
        .pieces
        .iter()
        .enumerate()
        .map(|(i, piece)| {
            let (kind, base, w, twisted) = match piece.kind {
                PieceKind::TrivialIBundle(BundleBase::Annulus) => {
                    ("TrivialIBundle", Some("Annulus"), None, Some(false))
                }
                PieceKind::TrivialIBundle(BundleBase::SubsurfaceWithBoundary) => (
                    "TrivialIBundle",
                    Some("SubsurfaceWithBoundary"),
                    None,
                    Some(false),
                ),
                PieceKind::TwistedIBundle => ("TwistedIBundle", None, None, Some(true)),
                PieceKind::SFSSolidTorus { winding } => {
                    ("SFSSolidTorus", None, Some(winding), None)
                }
                PieceKind::WholeManifoldIBundle => ("WholeManifoldIBundle", None, None, None),
            };
            let roster = &decomposition.rosters[i];
            let bump = &bumps[piece.source_bump];
            PieceJson {
                kind: kind.into(),
                base: base.map(Into::into),
                n: piece.components_n,
                m: piece.image_curve_classes,
                w,
                twisted,
                boundary_annuli: piece.boundary_annuli_count,
                curve_classes: roster
                    .iter()
                    .map(|e| format!("c{}.g{}", e.component_id, e.class_id))
                    .collect(),
                thickened: roster
                    .iter()
                    .filter(|e| e.thickened)
                    .map(|e| format!("c{}.g{}", e.component_id, e.class_id))
                    .collect(),
                bump: BumpRefJson {
                    points: bump.bump_points.iter().map(|&q| point_json(q)).collect(),
                    class: class_string(&bump.cardinality_class).into(),
                },
            }
        })
        .collect();
    CharsubReport {
        schema: REPORT_SCHEMA,
        group: group.into(),
        pieces,
        assumptions,
        depths: Depths::new(p),
        tolerances: ToleranceTable::new(p),
    }
}

#[derive(Serialize)]
pub struct UniformReport {
    pub schema: u32,
    pub group: String,
    pub estimates: Vec<EstimateJson>,
    pub assumptions: Vec<String>,
    pub depths: Depths,
    pub tolerances: ToleranceTable,
}

#[derive(Serialize)]
pub struct EstimateJson {
    pub component: usize,
    pub resolution: usize,
    pub pairs: usize,
    pub a_hat: f64,
    pub b_hat: f64,
    pub witness_a: [[f64; 2]; 2],
    pub witness_b: [[f64; 2]; 2],
}

pub fn uniform_report(
    group: &str,
    estimates: &[ComponentEstimate],
    assumptions: Vec<String>,
    p: &Params,
) -> UniformReport {
    UniformReport {
        schema: REPORT_SCHEMA,
        group: group.into(),
        estimates: estimates
            .iter()
            .map(|e| EstimateJson {
                component: e.component_id,
                resolution: e.estimate.resolution,
                pairs: e.estimate.pairs,
                a_hat: e.estimate.a_hat,
                b_hat: e.estimate.b_hat,
                witness_a: e.estimate.witness_a,
                witness_b: e.estimate.witness_b,
            })
            .collect(),
        assumptions,
        depths: Depths::new(p),
        tolerances: ToleranceTable::new(p),
    }
}

/// Per-pair ratio table for plotting.
pub fn uniform_csv(estimates: &[ComponentEstimate]) -> String {
    let mut out = String::from("component,z1_re,z1_im,z2_re,z2_im,a_ratio,b_ratio\n");
    for e in estimates {
        for s in &e.pair_samples {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.component_id, s.z1[0], s.z1[1], s.z2[0], s.z2[1], s.a_ratio, s.b_ratio
            ));
        }
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Validation(format!("report serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use kleinian_core::moebius::{Complex64, MoebiusMap};

    fn spec() -> GroupSpec {
        let a =
            MoebiusMap::from_reals([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        let b =
            MoebiusMap::from_reals([[1.0, 0.0], [-1.0, 0.0], [-1.0, 0.0], [2.0, 0.0]]).unwrap();
        GroupSpec::from_maps(&[("a", a), ("b", b)]).unwrap()
    }

    #[test]
    fn words_render_with_labels_and_inverses() {
        let spec = spec();
        use kleinian_core::group::Letter;
        let w = spec
            .word(&[Letter::positive(0), Letter::negative(1), Letter::positive(0)])
            .unwrap();
        assert_eq!(word_string(&w, &spec), "a b^-1 a");
        assert_eq!(word_string(&spec.word(&[]).unwrap(), &spec), "1");
    }

    #[test]
    fn points_serialize_as_pairs_or_inf() {
        assert_eq!(
            point_json(SpherePoint::Finite(Complex64::new(1.5, -2.0))),
            serde_json::json!([1.5, -2.0])
        );
        assert_eq!(point_json(SpherePoint::Infinity), serde_json::json!("inf"));
    }
}
