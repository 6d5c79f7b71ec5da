use kleinian_core::components::detect_components;
use kleinian_core::limitset::compute_limit;
use kleinian_core::moebius::MoebiusMap;
use kleinian_core::group::GroupSpec;
use kleinian_core::tolerances::PRUNE_EPS;

fn main() {
    let a = MoebiusMap::from_reals([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
    let b = MoebiusMap::from_reals([[1.0, 0.0], [-1.0, 0.0], [-1.0, 0.0], [2.0, 0.0]]).unwrap();
    let spec = GroupSpec::from_maps(&[("a", a), ("b", b)]).unwrap();
    let sample = compute_limit(&spec, 12, PRUNE_EPS).unwrap();
    for res in [96usize, 128, 192, 256, 384, 512] {
        let raster = detect_components(&sample, res).unwrap();
        let regions: Vec<(usize, usize, bool)> = raster.regions().iter().map(|r| (r.id, r.cells, r.tracked)).collect();
        println!("res {res}: tracked {} of {} regions {:?}", raster.tracked_count(), raster.regions().len(), &regions[..regions.len().min(6)]);
    }
}
