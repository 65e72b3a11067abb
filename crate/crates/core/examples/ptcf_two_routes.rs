//! Computes the partially truncated pair correlation of a hard-rod gas two
//! independent ways: the forest-kernel series and the cumulant combination
//! of direct correlations, and compares them within the reported errors.

use clustergas::configurations::{ClusterFamily, PointConfiguration, VolumeCutoff};
use clustergas::correlations::{
    ptcf_forest_series, ptcf_mobius, radius_r_beta, SeriesSpec,
};
use clustergas::potentials::{compute_summary, PairPotential};
use clustergas::quadrature::QuadratureSpec;

fn main() {
    let pot = PairPotential::hard_rod(0.5, 1).unwrap();
    let beta = 1.0;
    let summary = compute_summary(&pot, beta, None, None).unwrap();
    let z = 0.1 * radius_r_beta(beta, summary.stability_b, summary.nu1).unwrap();
    println!("activity z = {z:.6e} (10% of the convergence radius)");

    let spec = SeriesSpec {
        n_max: 2,
        quadrature: QuadratureSpec::midpoint(96),
        cutoff: VolumeCutoff::new(vec![-6.0], vec![6.0]).unwrap(),
        z,
        beta,
    };
    let family = ClusterFamily::new(vec![
        PointConfiguration::new(vec![vec![-0.2]], 1).unwrap(),
        PointConfiguration::new(vec![vec![0.2]], 1).unwrap(),
    ])
    .unwrap();

    let forest = ptcf_forest_series(&family, &pot, &spec, &summary).unwrap();
    let mobius = ptcf_mobius(&family, &pot, &spec).unwrap();
    println!(
        "forest series: {:.10e} +/- {:.2e} (rigorous tail: {})",
        forest.value, forest.truncation_error, forest.rigorous
    );
    println!(
        "cumulant route: {:.10e} +/- {:.2e}",
        mobius.value, mobius.truncation_error
    );
    let diff = (forest.value - mobius.value).abs();
    let budget = forest.truncation_error + mobius.truncation_error;
    println!("difference {diff:.2e} against combined budget {budget:.2e}");
    assert!(diff <= budget);
}
