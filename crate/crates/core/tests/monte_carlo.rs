use c2mm::kernel::build_kernel;
use c2mm::mcsim::{compare_to_kernel, sample_gaussian, sample_mcmc, McmcOptions};
use c2mm::model::ModelSpec;

#[test]
fn gaussian_samples_match_the_kernel() {
    let s = ModelSpec::linear(0.0, 0.5, 6, 1.0, 1.0).unwrap();
    let b = sample_gaussian(&s, 10000, 2024).unwrap();
    let ke = build_kernel(&s, None).unwrap();
    let r = compare_to_kernel(&b, ke.as_ref()).unwrap();
    println!("{:#?}", r);
    assert!(r.ks < 0.03);
    assert!((r.kernel_mass - 1.0).abs() < 1e-6);
    assert!(r.pair.max_z < 5.0);
    for g in &r.gaps {
        assert!((g.empirical - g.kernel).abs() < 5.0 * g.se + 1e-3, "{g:?}");
    }
}

#[test]
fn mcmc_samples_match_the_kernel() {
    let s = ModelSpec::quadratic(0.0, 0.8, 3, 0.0).unwrap();
    let b = sample_mcmc(&s, 20000, 7, &McmcOptions::default()).unwrap();
    let ke = build_kernel(&s, None).unwrap();
    let r = compare_to_kernel(&b, ke.as_ref()).unwrap();
    println!("{:?} {:?} {}", b.acceptance, b.autocorrelation, r.ks);
    assert!(r.ks < 0.03);
}

#[test]
fn larger_nu_pushes_mass_from_the_origin() {
    let small = |nu: f64| {
        let s = ModelSpec::linear(nu, 0.5, 4, 1.0, 1.0).unwrap();
        let b = sample_gaussian(&s, 4000, 1).unwrap();
        let ke = build_kernel(&s, None).unwrap();
        let emp = b.pooled().iter().filter(|&&x| x < 0.2).count() as f64 / b.pooled().len() as f64;
        let ker = c2mm::specfun::quad::panels(&[0.0, 1e-6, 1e-3, 0.05, 0.2], 16);
        let k: f64 = ker
            .0
            .iter()
            .zip(&ker.1)
            .map(|(x, w)| w * ke.density(*x).unwrap())
            .sum::<f64>()
            / 4.0;
        (emp, k)
    };
    let (e0, k0) = small(0.0);
    let (e2, k2) = small(2.0);
    assert!(e2 < e0 && k2 < k0, "{e0} {e2} {k0} {k2}");
}
