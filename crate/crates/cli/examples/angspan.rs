use kleinian_cli::config::RunConfig;
use kleinian_core::limitset;
use kleinian_core::moebius::SpherePoint;

// Sheared angular occupancy of the limit sample around 0/infinity.
// For winding class k the free coordinate is psi = arg(z) - 2*pi*k*log_4|z|;
// an invariant spiral band of psi-width >= pi must avoid the limit set for
// the square-root adjunction to close up, and k must be even for the root
// to swap the two sides of the band.
fn main() {
    let path = std::env::args().nth(1).unwrap();
    let depth: u32 = std::env::args().nth(2).unwrap_or("10".into()).parse().unwrap();
    let config = RunConfig::load(path.as_ref()).unwrap();
    let spec = config.build_spec().unwrap();
    let sample = limitset::compute_limit(&spec, depth, config.prune_eps).unwrap();
    let tau = 2.0 * core::f64::consts::PI;
    const BINS: usize = 144;
    for k in [-4i32, -2, 0, 2, 4] {
        let mut occ = [0u32; BINS];
        let mut inside = 0usize;
        for p in sample.points() {
            if let SpherePoint::Finite(z) = p {
                let r = z.norm();
                // several scale periods give the same psi statistics; use a
                // wide window to smooth sampling artifacts
                if (0.015625..4.0).contains(&r) {
                    inside += 1;
                    let s = r.ln() / 4.0f64.ln();
                    let mut psi = z.im.atan2(z.re) - tau * k as f64 * s;
                    psi = psi.rem_euclid(tau);
                    let bin = ((psi / tau) * BINS as f64) as usize % BINS;
                    occ[bin] += 1;
                }
            }
        }
        let mut best = 0usize;
        let mut start = 0usize;
        for s in 0..BINS {
            if occ[s] != 0 {
                continue;
            }
            let mut len = 0;
            while len < BINS && occ[(s + len) % BINS] == 0 {
                len += 1;
            }
            if len > best {
                best = len;
                start = s;
            }
        }
        let deg = 360.0 / BINS as f64;
        println!(
            "  k={:+}: {} pts, free psi-arc {:.1} deg at [{:.1}, {:.1}]",
            k,
            inside,
            best as f64 * deg,
            start as f64 * deg,
            (start + best) as f64 * deg
        );
    }
}
