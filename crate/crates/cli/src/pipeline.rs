//! Stage orchestration.  Every stage is deterministic for a fixed config;
//! the limit harvest is the one parallel stage, partitioned by first
//! letter so worker count cannot change the assembled sample.

use std::thread;
use std::time::Instant;

use kleinian_core::bumping::{maximal_collections, BumpRecord};
use kleinian_core::charsub::{self, Decomposition};
use kleinian_core::charts::SphereRaster;
use kleinian_core::components::{assign_stabilizers, detect_components, ComponentRecord};
use kleinian_core::error::{Error, Notes};
use kleinian_core::group::{GroupSpec, Letter};
use kleinian_core::limitset::{self, LimitSample};
use kleinian_core::moebius::MoebiusMap;
use kleinian_core::nielsen::{
    classify_quotient, convex_hull_boundary, pull_back_bump, NielsenCoreResult,
};
use kleinian_core::uniform::{rasterize_quasidisc, PairRatioSample, Side, UniformEstimate};

use crate::config::RunConfig;
use crate::report::word_string;
use crate::CliError;

/// Pipeline knobs extracted from the config plus the worker count.
#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub depth: u32,
    pub prune_eps: f64,
    pub raster_resolution: usize,
    pub stabilizer_depth: u32,
    pub orbit_depth: u32,
    pub match_depth: u32,
    pub gap_eps: f64,
    pub threads: usize,
}

impl Params {
    pub fn new(config: &RunConfig, threads: usize) -> Params {
        Params {
            depth: config.depth,
            prune_eps: config.prune_eps,
            raster_resolution: config.raster_resolution,
            stabilizer_depth: config.stabilizer_depth,
            orbit_depth: config.orbit_depth,
            match_depth: config.match_depth,
            gap_eps: config.gap_eps,
            threads: threads.max(1),
        }
    }
}

/// Limit sample, partitioned over one-letter prefixes.  The partition
/// pieces concatenate in slot order before deduplication, so the result is
/// identical to the sequential traversal for any worker count.
pub fn limit_sample(spec: &GroupSpec, p: &Params) -> Result<LimitSample, CliError> {
    let start = Instant::now();
    let sample = if p.threads <= 1 {
        limitset::compute_limit(spec, p.depth, p.prune_eps)?
    } else {
        let slots: Vec<usize> = (0..spec.rank() * 2).collect();
        let harvests: Vec<Result<Vec<_>, Error>> = thread::scope(|scope| {
            let handles: Vec<_> = slots
                .iter()
                .map(|&slot| {
                    scope.spawn(move || {
                        let prefix = spec.word(&[Letter::from_slot(slot)])?;
                        limitset::collect_raw(spec, &prefix, p.depth, p.prune_eps)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("limit worker panicked"))
                .collect()
        });
        let mut raw = Vec::new();
        for h in harvests {
            raw.extend(h?);
        }
        limitset::assemble(raw, p.depth, p.prune_eps)?
    };
    log::info!(
        "limit sample: {} points at depth {} in {:.1?}",
        sample.len(),
        p.depth,
        start.elapsed()
    );
    Ok(sample)
}

pub fn component_stage(
    spec: &GroupSpec,
    sample: &LimitSample,
    p: &Params,
) -> Result<(SphereRaster, Vec<ComponentRecord>, Notes), CliError> {
    let start = Instant::now();
    let raster = detect_components(sample, p.raster_resolution)?;
    let (records, notes) = assign_stabilizers(&raster, sample, spec, p.stabilizer_depth)?;
    log::info!(
        "components: {} tracked of {} regions in {:.1?}",
        records.len(),
        raster.regions().len(),
        start.elapsed()
    );
    Ok((raster, records, notes))
}

pub fn bump_stage(
    spec: &GroupSpec,
    records: &[ComponentRecord],
    p: &Params,
) -> Result<Vec<BumpRecord>, CliError> {
    let start = Instant::now();
    let bumps = maximal_collections(spec, records, p.depth)?;
    log::info!("bumping: {} maximal collections in {:.1?}", bumps.len(), start.elapsed());
    Ok(bumps)
}

/// Model images of the component's stabilizer generators.  Words outside
/// the model's domain (odd powers of an adjoined root) cannot act on the
/// model circle; they are skipped and reported.
pub fn model_stabilizer_maps(
    spec: &GroupSpec,
    comp: &ComponentRecord,
    notes: &mut Vec<String>,
) -> Vec<MoebiusMap> {
    let mut maps = Vec::new();
    for word in &comp.stabilizer_generators {
        match spec.phi_of_word(word) {
            Ok(m) => maps.push(m),
            Err(Error::NoFuchsianModel(_)) => notes.push(format!(
                "component {}: stabilizer word {} is outside the model; excluded from orbit identification",
                comp.id,
                word_string(word, spec)
            )),
            Err(_) => {}
        }
    }
    maps
}

/// Nielsen cores in bump-major order: for each bump record, one core per
/// member component in the record's member order.
pub fn nielsen_stage(
    spec: &GroupSpec,
    records: &[ComponentRecord],
    bumps: &[BumpRecord],
    p: &Params,
) -> Result<(Vec<NielsenCoreResult>, Vec<String>), CliError> {
    let start = Instant::now();
    let mut cores = Vec::new();
    let mut notes = Vec::new();
    for bump in bumps {
        for &cid in &bump.component_ids {
            let comp = records
                .iter()
                .find(|r| r.id == cid)
                .ok_or_else(|| CliError::Validation(format!("bump references unknown component {cid}")))?;
            let subset = pull_back_bump(bump, comp, spec, bump.search_depth)?;
            let hull = convex_hull_boundary(&subset, p.gap_eps)?;
            let stab = model_stabilizer_maps(spec, comp, &mut notes);
            let core = classify_quotient(comp.id, &hull, &subset, &stab, p.orbit_depth)?;
            cores.push(core);
        }
    }
    log::info!("nielsen: {} cores in {:.1?}", cores.len(), start.elapsed());
    Ok((cores, notes))
}

pub fn charsub_stage(
    spec: &GroupSpec,
    records: &[ComponentRecord],
    bumps: &[BumpRecord],
    cores: &[NielsenCoreResult],
    p: &Params,
) -> Result<Decomposition, CliError> {
    let start = Instant::now();
    let decomposition = charsub::assemble(bumps, records, cores, spec, p.match_depth)?;
    log::info!(
        "charsub: {} pieces in {:.1?}",
        decomposition.pieces.len(),
        start.elapsed()
    );
    Ok(decomposition)
}

/// Uniform-domain constants for each tracked component, on the witness
/// side of its boundary curve.
pub struct ComponentEstimate {
    pub component_id: usize,
    pub estimate: UniformEstimate,
    pub pair_samples: Vec<PairRatioSample>,
}

pub fn uniform_stage(
    records: &[ComponentRecord],
    resolution: usize,
    pairs: usize,
    seed: u64,
) -> Result<Vec<ComponentEstimate>, CliError> {
    let start = Instant::now();
    let mut out = Vec::new();
    for rec in records {
        let raster = rasterize_quasidisc(&rec.quasicircle, Side::Inside, resolution)?;
        let (estimate, pair_samples) =
            kleinian_core::uniform::estimate_with_pairs(&raster, pairs, seed)?;
        out.push(ComponentEstimate {
            component_id: rec.id,
            estimate,
            pair_samples,
        });
    }
    log::info!("uniform: {} component estimates in {:.1?}", out.len(), start.elapsed());
    Ok(out)
}
