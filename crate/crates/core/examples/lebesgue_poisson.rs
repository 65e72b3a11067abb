//! Demonstrates the truncated grand-canonical series: the partition
//! function of a non-interacting gas approaches exp(z |box|), and the
//! resummation identity holds at matched truncation.

use clustergas::configurations::VolumeCutoff;
use clustergas::correlations::{lp_integral, resummation_check, SeriesSpec};
use clustergas::quadrature::QuadratureSpec;

fn main() {
    let spec = SeriesSpec {
        n_max: 12,
        quadrature: QuadratureSpec::midpoint(4),
        cutoff: VolumeCutoff::new(vec![-0.5], vec![0.5]).unwrap(),
        z: 1.0,
        beta: 1.0,
    };
    let series = lp_integral(&spec, &mut |_| 1.0).unwrap();
    println!("sum_n z^n/n! |box|^n at n <= 12: {:.12}", series.value);
    println!("exp(z |box|):                    {:.12}", std::f64::consts::E);
    assert!((series.value - std::f64::consts::E).abs() < 1e-9);

    // splitting the integrated configuration equals a double integral
    let f = |pts: &[Vec<f64>]| 1.0 + pts.iter().map(|p| p[0] * p[0]).sum::<f64>();
    let h = |eta: &[Vec<f64>], gamma: &[Vec<f64>]| {
        (1.0 + eta.iter().map(|p| 0.4 - p[0]).sum::<f64>())
            * (1.0 + gamma.iter().map(|p| 0.1 * p[0]).sum::<f64>())
    };
    let small = SeriesSpec { n_max: 3, ..spec };
    let (lhs, rhs) = resummation_check(&small, &f, &h).unwrap();
    println!("resummation identity: {lhs:.12e} vs {rhs:.12e}");
    assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs());
}
