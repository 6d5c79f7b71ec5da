use kleinian_cli::config::RunConfig;
use kleinian_core::limitset;
use kleinian_core::moebius::SpherePoint;

fn chordal(a: (f64, f64), b: (f64, f64)) -> f64 {
    let num = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let da = (1.0 + a.0 * a.0 + a.1 * a.1).sqrt();
    let db = (1.0 + b.0 * b.0 + b.1 * b.1).sqrt();
    2.0 * num / (da * db)
}

fn main() {
    let path = std::env::args().nth(1).unwrap();
    let depth: u32 = std::env::args().nth(2).unwrap().parse().unwrap();
    let config = RunConfig::load(path.as_ref()).unwrap();
    let spec = config.build_spec().unwrap();
    let sample = limitset::compute_limit(&spec, depth, config.prune_eps).unwrap();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut inf = 0usize;
    for p in sample.points() {
        match p {
            SpherePoint::Finite(c) => pts.push((c.re, c.im)),
            SpherePoint::Infinity => inf += 1,
        }
    }
    println!("{} finite, {} infinite", pts.len(), inf);
    // project onto real axis order, measure successive chordal gaps
    pts.sort_by(|u, v| u.0.partial_cmp(&v.0).unwrap());
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for w in pts.windows(2) {
        let d = chordal(w[0], w[1]);
        if d > worst.0 {
            worst = (d, w[0].0, w[1].0);
        }
    }
    println!("worst successive chordal gap {:.5} between x={:.4} and x={:.4}", worst.0, worst.1, worst.2);
    // top 8 gaps
    let mut gaps: Vec<(f64, f64, f64)> = pts.windows(2).map(|w| (chordal(w[0], w[1]), w[0].0, w[1].0)).collect();
    gaps.sort_by(|u, v| v.0.partial_cmp(&u.0).unwrap());
    for g in gaps.iter().take(8) {
        println!("gap {:.5} at [{:.4}, {:.4}]", g.0, g.1, g.2);
    }
}
