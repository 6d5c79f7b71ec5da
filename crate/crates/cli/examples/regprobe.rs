use kleinian_cli::config::RunConfig;
use kleinian_core::charts;
use kleinian_core::limitset;

fn main() {
    let path = std::env::args().nth(1).unwrap();
    let config = RunConfig::load(path.as_ref()).unwrap();
    let spec = config.build_spec().unwrap();
    let sample = limitset::compute_limit(&spec, config.depth, config.prune_eps).unwrap();
    println!("{} sample points", sample.len());
    let raster = charts::detect_components(sample.points(), config.raster_resolution).unwrap();
    let mut sizes: Vec<(usize, bool)> = raster
        .regions()
        .iter()
        .map(|r| (r.cells, r.tracked))
        .collect();
    sizes.sort_by(|a, b| b.0.cmp(&a.0));
    let total = 2 * config.raster_resolution * config.raster_resolution;
    println!(
        "{} regions, tracked {} (threshold {:.0} cells)",
        sizes.len(),
        raster.tracked_count(),
        total as f64 * charts::TRACK_FRACTION
    );
    for (i, (c, t)) in sizes.iter().enumerate().take(14) {
        println!("  region {}: {} cells, tracked {}", i, c, t);
    }
}
