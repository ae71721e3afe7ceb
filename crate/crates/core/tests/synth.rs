use sketchy_core::diagnostics::{incoherence, scree_curve};
use sketchy_core::matcore::svd;
use sketchy_core::synth::*;

#[test]
fn exact_spectrum_is_reproduced() {
    let spec = SynthSpec::new(3, 3, Spectrum::Explicit { values: vec![3.0, 2.0, 1.0] }).with_seed(4);
    let a = generate(&spec).unwrap();
    let sigma = svd(&a, None).unwrap().sigma;
    for (got, want) in sigma.iter().zip([3.0, 2.0, 1.0]) {
        assert!((got - want).abs() <= 1e-10);
    }

    let spec = SynthSpec::new(120, 80, Spectrum::Polynomial { len: 50, exponent: 1.2 }).with_seed(1);
    let want = spec.spectrum.values().unwrap();
    let got = svd(&generate(&spec).unwrap(), None).unwrap().sigma;
    for (i, g) in got.iter().enumerate() {
        let w = want.get(i).copied().unwrap_or(0.0);
        assert!((g - w).abs() <= 1e-10, "σ_{i}: {g} vs {w}");
    }
}

#[test]
fn generation_is_deterministic() {
    let spec = SynthSpec::new(40, 30, Spectrum::Exponential { len: 20, base: 0.8 })
        .with_coherence(CoherenceMode::Spiked { mu: 3.0, nu: 2.0, rank: 2 })
        .with_seed(9);
    assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    assert_ne!(generate(&spec).unwrap(), generate(&spec.clone().with_seed(10)).unwrap());
}

#[test]
fn spiked_coherence_lands_near_target() {
    let spec = SynthSpec::new(1000, 200, Spectrum::Polynomial { len: 40, exponent: 1.0 })
        .with_coherence(CoherenceMode::Spiked { mu: 20.0, nu: 4.0, rank: 5 })
        .with_seed(2);
    let dec = svd(&generate(&spec).unwrap(), Some(5)).unwrap();
    let mu = incoherence(&dec.u, 5).unwrap();
    let nu = incoherence(&dec.v, 5).unwrap();
    assert!((10.0..=40.0).contains(&mu), "mu = {mu}");
    assert!((2.0..=8.0).contains(&nu), "nu = {nu}");
}

#[test]
fn infeasible_spike_is_rejected() {
    let spec = SynthSpec::new(100, 50, Spectrum::Polynomial { len: 10, exponent: 1.0 })
        .with_coherence(CoherenceMode::Spiked { mu: 21.0, nu: 2.0, rank: 5 });
    let err = generate(&spec).unwrap_err().to_string();
    assert!(err.contains("infeasible"), "{err}");
}

#[test]
fn incoherent_factors_stay_flat() {
    let (m, r) = (400usize, 5usize);
    let mut mus: Vec<f64> = (0..50)
        .map(|seed| {
            let spec = SynthSpec::new(m, 60, Spectrum::Polynomial { len: 20, exponent: 1.0 }).with_seed(seed);
            let dec = svd(&generate(&spec).unwrap(), Some(r)).unwrap();
            incoherence(&dec.u, r).unwrap()
        })
        .collect();
    mus.sort_by(f64::total_cmp);
    let median = mus[25];
    assert!(median <= 3.0 * (1.0 + (m as f64).ln() / r as f64), "median mu = {median}");
}

#[test]
fn dataset_like_specs_match_their_scree_targets() {
    for (spec, r, lo, hi) in [
        (yale_like_spec(), 20, 0.030, 0.036),
        (cardiac_like_spec(), 5, 0.0010, 0.0012),
        (video_like_spec(), 25, 0.0059, 0.0073),
    ] {
        let scree = scree_curve(&spec.spectrum.values().unwrap()).unwrap()[r];
        assert!((lo..=hi).contains(&scree), "scree({r}) = {scree}");
        spec.validate().unwrap();
    }
}

#[test]
fn reshaped_spec_still_generates() {
    let spec = yale_like_spec().with_shape(400, 300).with_seed(1);
    assert_eq!(spec.spectrum.len(), 299);
    let a = generate(&spec).unwrap();
    assert_eq!(a.shape(), (400, 300));
}
