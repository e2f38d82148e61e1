use heightlab::dual_graph::{build_intersection_matrix, penrose_residuals, pseudoinverse, random_reduced_graph, validate_zariski};
use heightlab::dynamics::{FiberFft, FiberFunction};
use heightlab::geometry::{DensityField, DensitySpec, DensityTerm, FamilyConfig, WarpedChain};
use heightlab::node_integral::{parse_poly, Poly};
use heightlab::pairing::pairing_value;
use num_complex::Complex64;
use proptest::prelude::*;

fn density(fat: &[f64], amp: f64, comp: usize) -> DensitySpec {
    DensitySpec::fat_constants(fat.to_vec()).with_term(DensityTerm::FatSine { component: comp, amplitude: amp, wavenumber: 1 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairing_is_symmetric_and_bilinear(
        a in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-2.0f64..2.0, 3),
        c in prop::collection::vec(-2.0f64..2.0, 3),
        x in -3.0f64..3.0,
        l in 20.0f64..200.0,
    ) {
        let fam = FamilyConfig::reduced_cycle(3);
        let chain = WarpedChain::build(&fam, l, 8).unwrap();
        let f = |s: &DensitySpec| DensityField::from_spec(s, &chain, true).unwrap();
        let (sa, sb, sc) = (density(&a, 0.5, 0), density(&b, -1.0, 1), density(&c, 0.7, 2));
        let ab = pairing_value(&chain, &f(&sa), &f(&sb)).unwrap();
        let scale = ab.value.abs().max(1.0);
        prop_assert!((ab.value - ab.swapped).abs() <= 1e-10 * scale);
        let lhs = pairing_value(&chain, &f(&sa.scaled(x).plus(&sc)), &f(&sb)).unwrap().value;
        let rhs = x * ab.value + pairing_value(&chain, &f(&sc), &f(&sb)).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        prop_assert!(pairing_value(&chain, &f(&sa), &f(&sa)).unwrap().value >= -1e-12);
    }

    #[test]
    fn poly_display_round_trips(
        terms in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, prop::array::uniform4(0u32..3)), 0..5),
    ) {
        let p = terms.into_iter().fold(Poly::zero(), |acc, (re, im, pw)| acc.plus(&Poly::monomial(Complex64::new(re, im), pw)));
        let back = parse_poly(&p.to_string()).unwrap();
        prop_assert_eq!(back.canonical(), p.canonical());
    }

    #[test]
    fn fiber_shifts_compose(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let n = 16;
        let fft = FiberFft::new(n);
        let vals: Vec<f64> = (0..n * n).map(|i| ((i * 37 % 101) as f64 / 101.0 - 0.5)).collect();
        let g: FiberFunction = fft.forward(&vals);
        let lhs = g.shifted(a, b).shifted(c, d);
        let rhs = g.shifted(a + c, b + d);
        let err = lhs.coeffs.iter().zip(&rhs.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
        let back = g.shifted(a, b).shifted(-a, -b);
        let err = back.coeffs.iter().zip(&g.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn random_reduced_graphs_satisfy_zariski(seed in any::<u64>(), n in 1usize..9) {
        let g = random_reduced_graph(seed, n).unwrap();
        let m = build_intersection_matrix(&g).unwrap();
        let z = validate_zariski(&m, &g.multiplicities());
        prop_assert!(z.pass, "{:?}", z);
        let p = pseudoinverse(&m).unwrap();
        prop_assert!(penrose_residuals(&m.entries, &p).max() <= 1e-10);
    }
}
