use c2mm::biortho::verify;
use c2mm::model::ModelSpec;

#[test]
fn degree_sixteen() {
    let specs = [
        ModelSpec::quadratic(-0.5, 0.7, 4, -0.5).unwrap(),
        ModelSpec::quadratic(0.0, 0.8, 6, 0.3).unwrap(),
        ModelSpec::quadratic(0.5, 1.0, 3, -1.0).unwrap(),
        ModelSpec::quadratic(2.0, 0.6, 5, 0.0).unwrap(),
        ModelSpec::new(0.0, 0.6, 3, vec![0.0, 1.0], vec![0.0, 0.1, 0.4, 0.3]).unwrap(),
        ModelSpec::new(0.5, 0.5, 4, vec![0.0, 1.0, 0.2], vec![0.0, 0.0, 0.5, 0.2]).unwrap(),
    ];
    for s in &specs {
        let t = std::time::Instant::now();
        let r = verify(s, 16, None).unwrap();
        println!(
            "{:?} {:.1} off {:e} mop {:e} {:e} {:?}",
            r.precision,
            r.log10_cond,
            r.off_diagonal,
            r.mop1,
            r.mop2,
            t.elapsed()
        );
        assert!(r.off_diagonal <= 1e-8, "{s:?}: {}", r.off_diagonal);
        assert!(
            r.mop1 <= 1e-7 && r.mop2 <= 1e-7,
            "{s:?}: {} {}",
            r.mop1,
            r.mop2
        );
        assert!(r.system.kappa.iter().all(|&k| k != 0.0 && k.is_finite()));
        assert!(t.elapsed().as_secs() <= 120);
    }
}
