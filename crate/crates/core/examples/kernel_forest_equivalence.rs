//! Shows that the recursive majorant kernel equals the sum over admissible
//! forest graphs of edge-weight products, and that it dominates the signed
//! kernel, on a small hard-rod instance.

use clustergas::configurations::{distance, ClusterFamily, PointConfiguration};
use clustergas::forests::sum_contributions;
use clustergas::kernels::{compare_t_q, kernel_q};
use clustergas::potentials::{mayer_factor, PairPotential};

fn cfg(xs: &[f64]) -> PointConfiguration {
    PointConfiguration::new(xs.iter().map(|&x| vec![x]).collect(), 1).unwrap()
}

fn main() {
    let pot = PairPotential::hard_rod(0.5, 1).unwrap();
    let beta = 1.0;
    let z = 0.05;
    let b = 0.0;
    let h = z; // z e^{2 beta B} with B = 0

    let family = ClusterFamily::new(vec![cfg(&[-0.2, 0.6]), cfg(&[0.2])]).unwrap();
    let gamma = cfg(&[-0.5]);

    let nu = |x: &[f64], y: &[f64]| mayer_factor(&pot, beta, distance(x, y)).unwrap().abs();
    let from_recursion = kernel_q(&family, &gamma, h, &nu).unwrap();
    let from_forests = sum_contributions(&family, &gamma, h, &nu, 12).unwrap();
    println!("majorant by recursion:  {from_recursion:.12e}");
    println!("majorant by forest sum: {from_forests:.12e}");
    assert!((from_recursion - from_forests).abs() <= 1e-12 * from_forests.abs());

    let (t_abs, q, ok) = compare_t_q(&family, &gamma, &pot, beta, z, b).unwrap();
    println!("|T| = {t_abs:.12e} <= Q = {q:.12e}: {ok}");
    assert!(ok);
}
