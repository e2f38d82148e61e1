use std::f64::consts::PI;

use heightlab::dual_graph::{build_intersection_matrix, kodaira_catalog, pseudoinverse, KodairaType};
use heightlab::geometry::{DensityField, DensitySpec, DensityTerm, FamilyConfig, WarpedChain};
use heightlab::potential::solve_direct;
use heightlab::spectral::graph_limit_eigs;

#[test]
fn cycle_graph_limit_matches_circulant_spectrum() {
    let l = 75.0;
    for n in 2..=6usize {
        let g = FamilyConfig::reduced_cycle(n).dual_graph().unwrap();
        let mut got = graph_limit_eigs(&g, l).unwrap();
        got.sort_by(f64::total_cmp);
        let c = 2.0 * PI / l;
        let mut want: Vec<f64> = (1..n)
            .map(|k| {
                let cyc = if n == 2 { 4.0 } else { 2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos() };
                n as f64 * c * cyc
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12 * b, "I_{n}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn cycle_pseudoinverse_matches_circulant_inverse() {
    for n in 3..=8u32 {
        let m = build_intersection_matrix(&kodaira_catalog(KodairaType::I(n)).unwrap()).unwrap();
        let p = pseudoinverse(&m).unwrap();
        for i in 0..n as usize {
            for j in 0..n as usize {
                let d = ((i as i64 - j as i64).rem_euclid(n as i64)) as f64;
                let want: f64 = (1..n)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / n as f64;
                        (th * d).cos() / (2.0 * th.cos() - 2.0)
                    })
                    .sum::<f64>()
                    / n as f64;
                assert!((p[(i, j)] - want).abs() < 1e-12, "I_{n} ({i},{j}): {} vs {want}", p[(i, j)]);
            }
        }
    }
}

#[test]
fn flat_torus_potential_of_a_cosine() {
    let torus = WarpedChain::build(&FamilyConfig::flat_torus(), 10.0, 256).unwrap();
    let spec = DensitySpec::zero().with_term(DensityTerm::GlobalCos { amplitude: 1.0, frequency: 2.0 });
    let a = DensityField::from_spec(&spec, &torus, true).unwrap();
    let phi = solve_direct(&torus, &a).unwrap();
    let err = torus
        .nodes
        .iter()
        .zip(&phi.phi)
        .map(|(x, v)| (v - (4.0 * PI * x).cos() / (4.0 * PI)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
}
