//! Evaluates the polynomial decay bound for a hard-core potential with a
//! power-law attractive tail and checks it against the computed pair
//! correlation over a separation sweep.

use clustergas::bounds::theorem8_check;
use clustergas::configurations::{ClusterFamily, PointConfiguration, VolumeCutoff};
use clustergas::correlations::SeriesSpec;
use clustergas::potentials::{compute_summary, Kind, PairPotential};
use clustergas::quadrature::QuadratureSpec;

fn main() {
    let pot = PairPotential::new(
        Kind::HardCorePowerTail {
            r1: 0.5,
            r0: 0.7,
            r2: 1.0,
            phi1: 0.01,
            phi2: 0.1,
            s: 1.0,
            eps0: 1.0,
        },
        1,
    )
    .unwrap();
    let beta = 1.0;
    let summary = compute_summary(&pot, beta, Some(2.0), Some(2.0)).unwrap();
    let (c, alpha) = summary.polydecay.unwrap();
    println!("domination: |mayer(r)| <= {c:.4} / (1 + r^{alpha})");

    println!("{:>6} {:>14} {:>14} {:>6}", "sep", "|ptcf|", "bound", "ok");
    for sep in [2.5, 5.0, 10.0] {
        let spec = SeriesSpec {
            n_max: 1,
            quadrature: QuadratureSpec::midpoint(64),
            cutoff: VolumeCutoff::new(vec![-sep / 2.0 - 5.0], vec![sep / 2.0 + 5.0]).unwrap(),
            z: 1e-4,
            beta,
        };
        let family = ClusterFamily::new(vec![
            PointConfiguration::new(vec![vec![-sep / 2.0]], 1).unwrap(),
            PointConfiguration::new(vec![vec![sep / 2.0]], 1).unwrap(),
        ])
        .unwrap();
        let report = theorem8_check(&family, &pot, &spec, &summary, 7).unwrap();
        println!(
            "{sep:>6} {:>14.4e} {:>14.4e} {:>6}",
            report.ptcf_abs,
            report.bound,
            report.bound_holds == Some(true)
        );
        assert_eq!(report.bound_holds, Some(true));
    }
}
