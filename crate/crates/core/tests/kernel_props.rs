mod common;

use common::*;
use hjsr_core::*;
use proptest::prelude::*;

fn catalog_spec() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|c| KernelSpec::Constant { c }),
        (0.1f64..5.0).prop_map(|scale| KernelSpec::ExpAbs { scale }),
        (0.1f64..8.0).prop_map(|scale| KernelSpec::Gaussian { scale }),
        (prop::collection::vec(0.0f64..2.0, 1..=3), prop::collection::vec(0.0f64..2.0, 1..=3))
            .prop_map(|(f, g)| KernelSpec::Separable { f, g }),
        (1usize..=5, any::<u64>()).prop_map(|(blocks, seed)| KernelSpec::PiecewiseConstant {
            blocks,
            seed: Some(seed),
            values: None
        }),
    ]
}

fn radius(km: &KernelModel) -> f64 {
    spectral_radius(&to_matrix(km)).midpoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_matrix_is_weighted_geometric_mean(a in catalog_spec(), b in catalog_spec(), w in weights(2), n in 2usize..=24) {
        let ka = discretize(&a, n).unwrap();
        let kb = discretize(&b, n).unwrap();
        let mean = to_matrix(&kernel_hadamard_mean(&[&ka, &kb], &w).unwrap());
        let [wa, wb] = [w.weights()[0], w.weights()[1]];
        for i in 0..n {
            for j in 0..n {
                let expect = ka.sample(i, j).powf(wa) * kb.sample(i, j).powf(wb) / n as f64;
                prop_assert!((mean.get(i, j) - expect).abs() <= 1e-12 * expect.max(1e-300));
            }
        }
        let mats = hadamard_geometric_mean(&[&to_matrix(&ka), &to_matrix(&kb)], &w).unwrap();
        for (x, y) in mean.as_slice().iter().zip(mats.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12 * y.max(1e-300));
        }
    }

    #[test]
    fn composition_matches_matrix_product(a in catalog_spec(), b in catalog_spec(), n in 2usize..=24) {
        let ka = discretize(&a, n).unwrap();
        let kb = discretize(&b, n).unwrap();
        let composed = to_matrix(&ka.compose(&kb).unwrap());
        let product = mat_product(&to_matrix(&ka), &to_matrix(&kb)).unwrap();
        for (x, y) in composed.as_slice().iter().zip(product.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12 * y.max(1e-300));
        }
    }

    #[test]
    fn symmetric_kernels_stay_symmetric(scale in 0.1f64..8.0, n in 2usize..=40) {
        let specs = [KernelSpec::ExpAbs { scale }, KernelSpec::Gaussian { scale }];
        for spec in &specs {
            prop_assert!(discretize(spec, n).unwrap().is_symmetric());
        }
    }

    #[test]
    fn mean_of_kernels_respects_radius_inequality(a in catalog_spec(), b in catalog_spec(), w in weights(2)) {
        let ka = discretize(&a, 16).unwrap();
        let kb = discretize(&b, 16).unwrap();
        let mean = kernel_hadamard_mean(&[&ka, &kb], &w).unwrap();
        let bound = radius(&ka).powf(w.weights()[0]) * radius(&kb).powf(w.weights()[1]);
        prop_assert!(radius(&mean) <= bound * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn constant_kernel_radius_is_exact_at_every_grid() {
    for n in [8, 16, 32, 64, 128] {
        let km = discretize(&KernelSpec::Constant { c: 2.5 }, n).unwrap();
        assert!((radius(&km) - 2.5).abs() < 1e-10);
    }
}

#[test]
fn separable_radius_is_inner_product() {
    // For f(x) g(y) the only nonzero eigenvalue is ∫ f g.
    let spec = KernelSpec::Separable { f: vec![1.0, 1.0], g: vec![0.5, 0.0, 2.0] };
    let exact = 0.5 + 0.25 + 2.0 / 3.0 + 0.5;
    let mut prev = f64::INFINITY;
    for n in [8, 16, 32, 64, 128] {
        let err = (radius(&discretize(&spec, n).unwrap()) - exact).abs();
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 1e-4);
}

#[test]
fn refinement_converges_for_catalog() {
    for (name, spec) in KernelSpec::catalog() {
        let r: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| radius(&discretize(&spec, n).unwrap())).collect();
        let d1 = (r[1] - r[0]).abs();
        let d3 = (r[3] - r[2]).abs();
        assert!(d3 <= d1 + 1e-12, "{name}: {r:?}");
        assert!(d3 <= 1e-3 * r[3], "{name}: {r:?}");
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = discretize(&KernelSpec::Constant { c: 1.0 }, 8).unwrap();
    let b = discretize(&KernelSpec::Constant { c: 1.0 }, 16).unwrap();
    assert!(a.compose(&b).is_err());
    assert!(kernel_hadamard_mean(&[&a, &b], &WeightVector::uniform(2).unwrap()).is_err());
    let relaxed = WeightVector::relaxed(vec![1.0, 1.0]).unwrap();
    assert!(kernel_hadamard_mean(&[&a, &a], &relaxed).is_err());
}
