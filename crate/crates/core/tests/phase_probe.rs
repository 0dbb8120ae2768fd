use c2mm::phase::{triple_scaling_probe, ScalingPath};

#[test]
fn triple_probe_converges() {
    let g = [0.5, 1.0, 2.0];
    for (a, b) in [(0.0, 0.0), (0.5, -0.3)] {
        let r =
            triple_scaling_probe(ScalingPath::new(a, b), 0.0, &[9, 18, 36], &g, &g, None).unwrap();
        println!("{a} {b} {:?} {:?}", r.deltas, r.precision);
        assert!(r.decreasing);
    }
}
