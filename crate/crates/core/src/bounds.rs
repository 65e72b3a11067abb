//! Closed-form evaluators for the convergence radii, the series upper
//! bounds, and the polynomial-decay constants, together with numeric checks
//! of the two bounding lemmas they rest on.

use serde::{Deserialize, Serialize};

use crate::combinatorics::labeled_trees;
use crate::configurations::{distance, ClusterFamily};
use crate::correlations::{ptcf_forest_series, SeriesSpec};
pub use crate::correlations::radius_r_beta;
use crate::error::{Error, Result};
use crate::potentials::{PairPotential, PotentialSummary};
use crate::quadrature::adaptive_trapezoid;

/// `1 - z e^{2 beta B + 2} nu1`; positive inside the convergence region of
/// the kernel series.
pub fn convergence_margin(z: f64, beta: f64, b: f64, nu1: f64) -> f64 {
    1.0 - z * (2.0 * beta * b + 2.0).exp() * nu1
}

/// Geometric upper bound on the summed correlation series:
/// `(2 z e^{2 beta B + 1})^l (nu0_tilde)^(l - l1) l^(m-2) / (1 - q)` with
/// `q = z e^{2 beta B + 2} nu1`.
pub fn ptcf_upper_bound(
    sizes: &[usize],
    nu0: f64,
    z: f64,
    beta: f64,
    b: f64,
    nu1: f64,
) -> Result<f64> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Domain("cluster sizes must be positive".into()));
    }
    let margin = convergence_margin(z, beta, b, nu1);
    if margin <= 0.0 {
        return Err(Error::Divergence(format!(
            "z e^(2 beta B + 2) nu1 >= 1 (margin {margin:.3e}); the geometric bound diverges"
        )));
    }
    let m = sizes.len();
    let l: usize = sizes.iter().sum();
    let l1 = sizes[0];
    let nt0 = nu0.max(1.0);
    let base = 2.0 * z * (2.0 * beta * b + 1.0).exp();
    Ok(base.powi(l as i32) * nt0.powi((l - l1) as i32) * (l as f64).powf(m as f64 - 2.0) / margin)
}

/// Inputs of the decay-constant formulas.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundParams {
    /// `z e^{2 beta B}`.
    pub h: f64,
    pub nu1: f64,
    /// Integral of the polynomial kernel `1 / (1 + |x|^alpha)` itself; the
    /// domination constant enters separately through `c`.
    pub nubar1: f64,
    /// Domination constant: `|mayer| <= c / (1 + |x|^alpha)`.
    pub c: f64,
    pub alpha: f64,
    pub sizes: Vec<usize>,
    pub sigma: usize,
}

impl BoundParams {
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn l(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 || self.sizes.contains(&0) {
            return Err(Error::Domain(
                "need at least two clusters with positive sizes".into(),
            ));
        }
        if self.sigma == 0 || self.sigma > self.m() {
            return Err(Error::Domain(format!(
                "sigma must lie in 1..={}, got {}",
                self.m(),
                self.sigma
            )));
        }
        if self.h <= 0.0 || self.nu1 < 0.0 || self.nubar1 <= 0.0 || self.c <= 0.0 {
            return Err(Error::Domain("h, nubar1, c must be positive; nu1 nonnegative".into()));
        }
        Ok(())
    }

    /// `1 - h nu1 e`.
    fn d1(&self) -> f64 {
        1.0 - self.h * self.nu1 * std::f64::consts::E
    }

    /// `1 - h nu1 e - h nubar1 2^(1+alpha) c`.
    fn d2(&self) -> f64 {
        self.d1() - self.h * self.nubar1 * 2f64.powf(1.0 + self.alpha) * self.c
    }

    /// `1 - h nu1 e - h nubar1 (e + 2^(1+alpha)) c`.
    fn d3(&self) -> f64 {
        self.d1()
            - self.h
                * self.nubar1
                * (std::f64::consts::E + 2f64.powf(1.0 + self.alpha))
                * self.c
    }

    /// Margin of `h nu1 e < 1`.
    pub fn margin_basic(&self) -> f64 {
        self.d1()
    }

    /// Margin of `h (nu1 e + nubar1 2^(1+alpha) c) < 1`.
    pub fn margin_pair(&self) -> f64 {
        self.d2()
    }

    /// Margin of `h [nu1 e + nubar1 c (e + 2^(1+alpha))] < 1`.
    pub fn margin_general(&self) -> f64 {
        self.d3()
    }

    fn require(&self, value: f64, name: &str) -> Result<f64> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(Error::Divergence(format!(
                "smallness condition {name} violated (margin {value:.3e})"
            )))
        }
    }

    /// `(h / (1 - h nu1 e))^l`.
    fn hl(&self) -> Result<f64> {
        let d1 = self.require(self.d1(), "h nu1 e < 1")?;
        Ok((self.h / d1).powi(self.l() as i32))
    }
}

/// Two-cluster constant: both sigma values share one formula.
pub fn a_2(p: &BoundParams) -> Result<f64> {
    let (l1, l2) = (p.sizes[0] as f64, p.sizes[1] as f64);
    let d2 = p.require(p.d2(), "h (nu1 e + nubar1 2^(1+alpha) c) < 1")?;
    Ok(0.5 * l1 * l2 * p.c * (1.0 + p.c).powi(p.sizes[1] as i32 - 1) * p.hl()? * p.d1() / d2)
}

/// Three-cluster constants, by the number of directly linked components.
pub fn a_3(p: &BoundParams, sigma: usize) -> Result<f64> {
    let (l1, l2, l3) = (p.sizes[0] as f64, p.sizes[1] as f64, p.sizes[2] as f64);
    let l = p.l() as f64;
    let shape = l1 * l2 * l3 * (1.0 + p.c).powi((p.sizes[1] + p.sizes[2]) as i32 - 2) * p.hl()?;
    let two = 2f64.powf(1.0 + p.alpha);
    match sigma {
        1 => Ok(shape * l * p.c * p.c),
        2 => {
            let d2 = p.require(p.d2(), "h (nu1 e + nubar1 2^(1+alpha) c) < 1")?;
            Ok(2.0 * shape * l * p.c * p.c * p.h * p.nubar1 * two * p.c / d2)
        }
        3 => {
            let d2 = p.require(p.d2(), "h (nu1 e + nubar1 2^(1+alpha) c) < 1")?;
            Ok(3.0 * shape * 2f64.powf(2.0 * p.alpha) * p.c.powi(3) * p.h * p.nubar1
                * p.d1().powi(2)
                / d2.powi(3))
        }
        _ => Err(Error::Domain(format!("sigma must be 1..=3 for three clusters, got {sigma}"))),
    }
}

/// General-m constant with all clusters directly linked.
pub fn a_m1(p: &BoundParams) -> Result<f64> {
    let m = p.m();
    let l = p.l();
    let prod: f64 = p.sizes.iter().map(|&s| s as f64).product();
    Ok((l as f64).powf(m as f64 - 2.0)
        * prod
        * p.c.powi(m as i32 - 1)
        * (1.0 + p.c).powi((l - p.sizes[0]) as i32 - m as i32 + 1)
        * p.hl()?)
}

/// General-m constant with exactly two directly linked components.
pub fn a_m2(p: &BoundParams) -> Result<f64> {
    let d2 = p.require(p.d2(), "h (nu1 e + nubar1 2^(1+alpha) c) < 1")?;
    let two = 2f64.powf(1.0 + p.alpha);
    Ok((p.m() as f64 - 1.0) * a_m1(p)? * p.h * p.nubar1 * two * p.c / d2)
}

/// General-m constant for `3 <= sigma <= m` directly linked components.
pub fn a_m_sigma(p: &BoundParams, sigma: usize) -> Result<f64> {
    let m = p.m();
    if !(3..=m).contains(&sigma) {
        return Err(Error::Domain(format!("sigma must be 3..={m}, got {sigma}")));
    }
    let d2 = p.require(p.d2(), "h (nu1 e + nubar1 2^(1+alpha) c) < 1")?;
    let d3 = p.require(p.d3(), "h [nu1 e + nubar1 c (e + 2^(1+alpha))] < 1")?;
    let l = p.l();
    let s = sigma as f64;
    let mut binom = 1.0;
    for j in 0..sigma - 1 {
        binom *= (m - 1 - j) as f64 / (j + 1) as f64;
    }
    Ok((s - 2.0).powi(sigma as i32)
        * binom
        * 2f64.powf(p.alpha * (s - 1.0) * (s - 1.0))
        * (l as f64).powi((m - sigma) as i32)
        * p.c.powi(m as i32)
        * (1.0 + p.c).powi((l - p.sizes[0]) as i32 - sigma as i32 + 1)
        * p.hl()?
        * (p.d1() / d2).powi(sigma as i32)
        * p.h
        * p.nubar1
        * std::f64::consts::E
        * d2
        / d3)
}

/// Decay constant for `(m, sigma)`, dispatching to the printed formula for
/// the given cluster count.
pub fn decay_constant_a(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    match (p.m(), p.sigma) {
        (2, _) => a_2(p),
        (3, s) => a_3(p, s),
        (_, 1) => a_m1(p),
        (_, 2) => a_m2(p),
        (_, s) => a_m_sigma(p, s),
    }
}

/// The polynomial decay kernel `1 / (1 + r^alpha)` on a distance.
pub fn polynomial_nubar(alpha: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| 1.0 / (1.0 + r.abs().powf(alpha))
}

/// Integral of the polynomial kernel with the computation path recorded.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Nubar1 {
    pub value: f64,
    pub analytic: bool,
}

/// One-dimensional integral of `1 / (1 + |x|^alpha)`: closed form
/// `2 pi / (alpha sin(pi / alpha))` when available, quadrature plus a
/// power-tail majorant otherwise.
pub fn nubar1_d1(alpha: f64, analytic: bool) -> Result<Nubar1> {
    if alpha <= 1.0 {
        return Err(Error::Domain(format!("alpha must exceed the dimension 1, got {alpha}")));
    }
    if analytic {
        let value = 2.0 * std::f64::consts::PI / (alpha * (std::f64::consts::PI / alpha).sin());
        return Ok(Nubar1 { value, analytic: true });
    }
    let nb = polynomial_nubar(alpha);
    // pick the window so the power tail is negligible relative to the bulk
    let r = (1e14f64).powf(1.0 / (alpha - 1.0)).min(1e12);
    let bulk = adaptive_trapezoid(0.0, r.min(100.0), 1e-10, &|x| nb(x))?;
    let mut far = 0.0;
    let mut lo = 100.0f64.min(r);
    while lo < r {
        let hi = (lo * 4.0).min(r);
        far += adaptive_trapezoid(lo, hi, 1e-8, &|x| nb(x))?;
        lo = hi;
    }
    let tail = r.powf(1.0 - alpha) / (alpha - 1.0);
    Ok(Nubar1 { value: 2.0 * (bulk + far + tail), analytic: false })
}

/// Worst-tree decay envelope over the clusters: maximum over labeled trees
/// of the product over tree edges of the largest kernel value between the
/// two clusters.
pub fn decay_envelope(
    family: &ClusterFamily,
    nubar: &dyn Fn(f64) -> f64,
    cap: usize,
) -> Result<f64> {
    let m = family.m();
    if m < 2 {
        return Err(Error::Domain("the envelope needs at least two clusters".into()));
    }
    if m > cap {
        return Err(Error::Resource(format!("tree enumeration capped at {cap} clusters, got {m}")));
    }
    if family.clusters().iter().any(|c| c.is_empty()) {
        return Err(Error::Domain("clusters must be nonempty".into()));
    }
    // largest kernel value between each cluster pair
    let mut pair = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in 0..i {
            let mut best = f64::NEG_INFINITY;
            for x in family.clusters()[i].points() {
                for y in family.clusters()[j].points() {
                    best = best.max(nubar(distance(x, y)));
                }
            }
            pair[i][j] = best;
            pair[j][i] = best;
        }
    }
    let mut out = f64::NEG_INFINITY;
    for tree in labeled_trees(m)? {
        let product: f64 = tree.iter().map(|&(i, j)| pair[i][j]).product();
        out = out.max(product);
    }
    Ok(out)
}

/// Both sides of the kernel-product integral inequality in one dimension:
/// `Integral prod_r nubar(x_r - y) dy` against
/// `2^(alpha (p-1)) nubar1 sum_r prod_{k != r} nubar(x_k - x_r)`.
pub fn decay_lemma_check(alpha: f64, points: &[f64]) -> Result<(f64, f64)> {
    let p = points.len();
    if !(2..=4).contains(&p) {
        return Err(Error::Domain(format!("point count must be 2..=4, got {p}")));
    }
    let nb = polynomial_nubar(alpha);
    let min = points.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // piecewise so the adaptive rule resolves each peak, with
    // geometrically growing wing segments where the integrand is flat
    let mut cuts: Vec<f64> = Vec::new();
    for off in [300.0, 120.0, 30.0] {
        cuts.push(min - off);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    cuts.extend(sorted.iter().map(|&x| x));
    for off in [30.0, 120.0, 300.0] {
        cuts.push(max + off);
    }
    let mut lhs = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            lhs += adaptive_trapezoid(w[0], w[1], 1e-8, &|y| {
                points.iter().map(|&x| nb(x - y)).product()
            })?;
        }
    }
    let nubar1 = nubar1_d1(alpha, true)?.value;
    let mut rhs_sum = 0.0;
    for r in 0..p {
        let mut prod = 1.0;
        for k in 0..p {
            if k != r {
                prod *= nb(points[k] - points[r]);
            }
        }
        rhs_sum += prod;
    }
    let rhs = 2f64.powf(alpha * (p as f64 - 1.0)) * nubar1 * rhs_sum;
    Ok((lhs, rhs))
}

/// Outcome of checking the polynomial-decay envelope bound on one
/// instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub ptcf_abs: f64,
    pub ptcf_error: f64,
    pub envelope: f64,
    pub a_total: f64,
    pub bound: f64,
    /// Margin of the strictest smallness condition used.
    pub condition_margin: f64,
    pub condition_ok: bool,
    pub bound_holds: Option<bool>,
}

/// Evaluate the correlation and its decay bound
/// `sum_sigma A_(m,sigma) * envelope` on one cluster family.
pub fn theorem8_check(
    family: &ClusterFamily,
    pot: &PairPotential,
    spec: &SeriesSpec,
    summary: &PotentialSummary,
    tree_cap: usize,
) -> Result<DecayReport> {
    let m = family.m();
    if m < 2 {
        return Err(Error::Domain("the decay bound needs at least two clusters".into()));
    }
    let (c, alpha) = summary.polydecay.ok_or_else(|| {
        Error::Domain("the potential summary carries no polynomial-decay constant".into())
    })?;
    let h = spec.z * (2.0 * spec.beta * summary.stability_b).exp();
    let nubar1 = nubar1_d1(alpha, alpha == 2.0)?.value;
    let mut params = BoundParams {
        h,
        nu1: summary.nu1,
        nubar1,
        c,
        alpha,
        sizes: family.sizes().to_vec(),
        sigma: 1,
    };
    // strictest condition over the formulas that will be summed
    let condition_margin = if m >= 4 { params.d3() } else { params.d2() };
    let condition_ok = condition_margin > 0.0;
    let ptcf = ptcf_forest_series(family, pot, spec, summary)?;
    if !condition_ok {
        return Ok(DecayReport {
            ptcf_abs: ptcf.value.abs(),
            ptcf_error: ptcf.truncation_error,
            envelope: f64::NAN,
            a_total: f64::NAN,
            bound: f64::NAN,
            condition_margin,
            condition_ok,
            bound_holds: None,
        });
    }
    let mut a_total = 0.0;
    for sigma in 1..=m {
        params.sigma = sigma;
        a_total += decay_constant_a(&params)?;
    }
    let envelope = decay_envelope(family, &polynomial_nubar(alpha), tree_cap)?;
    let bound = a_total * envelope;
    Ok(DecayReport {
        ptcf_abs: ptcf.value.abs(),
        ptcf_error: ptcf.truncation_error,
        envelope,
        a_total,
        bound,
        condition_margin,
        condition_ok,
        bound_holds: Some(ptcf.value.abs() <= bound),
    })
}

/// Both sides of the auxiliary power-series estimate
/// `sum_{r >= v} r^u x^(r-v) <= sum_{k=0}^u k! (v+k)^u / (1-x)^(k+1)`.
pub fn power_series_estimate_sides(u: u32, v: u32, x: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1), got {x}")));
    }
    let mut lhs = 0.0;
    let mut xpow = 1.0;
    for r in v.. {
        let term = (r as f64).powi(u as i32) * xpow;
        lhs += term;
        if term < 1e-17 * lhs.max(1.0) && r > v + u {
            break;
        }
        xpow *= x;
        if r > v + 100_000 {
            return Err(Error::Numeric("series failed to converge".into()));
        }
    }
    let mut rhs = 0.0;
    let mut fact = 1.0;
    for k in 0..=u {
        if k > 0 {
            fact *= k as f64;
        }
        rhs += fact * ((v + k) as f64).powi(u as i32) / (1.0 - x).powi(k as i32 + 1);
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::{PointConfiguration, VolumeCutoff};
    use crate::potentials::{compute_summary, Kind};
    use crate::quadrature::QuadratureSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> BoundParams {
        BoundParams {
            h: 0.01,
            nu1: 1.0,
            nubar1: std::f64::consts::PI,
            c: 0.5,
            alpha: 2.0,
            sizes: vec![1, 2],
            sigma: 1,
        }
    }

    #[test]
    fn radius_examples() {
        assert!((radius_r_beta(1.0, 0.0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let a = 0.5;
        assert!(
            (radius_r_beta(1.0, 0.0, 2.0 * a).unwrap() - (-1.0f64).exp() / (2.0 * a)).abs()
                < 1e-15
        );
        // larger B shrinks the radius
        assert!(radius_r_beta(1.0, 1.0, 1.0).unwrap() < radius_r_beta(1.0, 0.0, 1.0).unwrap());
    }

    #[test]
    fn margin_examples() {
        assert_eq!(convergence_margin(0.0, 1.0, 0.0, 1.0), 1.0);
        let m = convergence_margin(0.05, 1.0, 0.0, 1.0);
        assert!((m - (1.0 - 0.05 * 2.0f64.exp())).abs() < 1e-15);
        assert!(convergence_margin(1.0, 1.0, 1.0, 1.0) < 0.0);
    }

    #[test]
    fn upper_bound_two_singletons() {
        let z = 0.01;
        let got = ptcf_upper_bound(&[1, 1], 0.5, z, 1.0, 0.0, 1.0).unwrap();
        let q = z * 2.0f64.exp();
        let expect = (2.0 * z * 1.0f64.exp()).powi(2) / (1.0 - q);
        assert!((got - expect).abs() < 1e-15 * expect);
    }

    #[test]
    fn upper_bound_diverges_outside_region() {
        assert!(matches!(
            ptcf_upper_bound(&[1, 1], 1.0, 1.0, 1.0, 1.0, 1.0),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn upper_bound_dominates_series() {
        let pot = PairPotential::hard_rod(0.5, 1).unwrap();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        let z = 0.01;
        let spec = SeriesSpec {
            n_max: 2,
            quadrature: QuadratureSpec::midpoint(64),
            cutoff: VolumeCutoff::new(vec![-4.0], vec![4.0]).unwrap(),
            z,
            beta: 1.0,
        };
        let fam = ClusterFamily::new(vec![
            PointConfiguration::new(vec![vec![-0.3]], 1).unwrap(),
            PointConfiguration::new(vec![vec![0.3]], 1).unwrap(),
        ])
        .unwrap();
        let series = ptcf_forest_series(&fam, &pot, &spec, &summary).unwrap();
        let bound =
            ptcf_upper_bound(&fam.sizes(), summary.nu0, z, 1.0, 0.0, summary.nu1).unwrap();
        assert!(series.value.abs() <= bound, "{} vs {bound}", series.value);
    }

    #[test]
    fn a2_formula_by_hand() {
        let mut p = params();
        p.sizes = vec![1, 2];
        p.sigma = 1;
        let got = decay_constant_a(&p).unwrap();
        let d1 = 1.0 - p.h * p.nu1 * std::f64::consts::E;
        let d2 = d1 - p.h * p.nubar1 * 8.0 * p.c;
        let expect = 0.5 * 1.0 * 2.0 * p.c * 1.5 * (p.h / d1).powi(3) * d1 / d2;
        assert!((got - expect).abs() < 1e-15 * expect);
        p.sigma = 2;
        assert_eq!(decay_constant_a(&p).unwrap(), got);
    }

    #[test]
    fn general_formula_matches_three_cluster_formula() {
        let mut p = params();
        p.sizes = vec![2, 1, 3];
        p.sigma = 1;
        let direct = a_3(&p, 1).unwrap();
        let general = a_m1(&p).unwrap();
        assert!(
            (direct - general).abs() <= 1e-12 * direct.abs(),
            "{direct} vs {general}"
        );
    }

    #[test]
    fn a_monotone_in_h_and_diverges_at_boundary() {
        let mut p = params();
        p.sizes = vec![1, 1, 1, 1];
        for sigma in 1..=4 {
            p.sigma = sigma;
            let mut last = 0.0;
            for k in 1..=8 {
                p.h = 0.001 * k as f64;
                let a = decay_constant_a(&p).unwrap();
                assert!(a.is_finite() && a > last, "sigma {sigma}, h {}: {a}", p.h);
                last = a;
            }
            // walk h toward the condition boundary: the value blows up
            let e = std::f64::consts::E;
            let boundary = 1.0
                / (p.nu1 * e + p.nubar1 * p.c * (e + 2f64.powf(1.0 + p.alpha)));
            p.h = boundary * (1.0 - 1e-9);
            let near = decay_constant_a(&p);
            if sigma >= 3 {
                assert!(near.unwrap() > 1e6 * last);
            }
            p.h = boundary * 1.01;
            if sigma >= 3 {
                assert!(matches!(decay_constant_a(&p), Err(Error::Divergence(_))));
            }
            p.h = 0.001;
        }
    }

    #[test]
    fn nubar1_alpha_two_is_pi() {
        let a = nubar1_d1(2.0, true).unwrap();
        assert!((a.value - std::f64::consts::PI).abs() < 1e-14);
        let n = nubar1_d1(2.0, false).unwrap();
        assert!(!n.analytic);
        assert!((n.value - std::f64::consts::PI).abs() < 1e-5, "{}", n.value);
        for alpha in [1.5, 3.0] {
            let a = nubar1_d1(alpha, true).unwrap().value;
            let n = nubar1_d1(alpha, false).unwrap().value;
            assert!((a - n).abs() < 1e-4 * a, "alpha {alpha}: {a} vs {n}");
        }
    }

    fn cl(xs: &[f64]) -> PointConfiguration {
        PointConfiguration::new(xs.iter().map(|&x| vec![x]).collect(), 1).unwrap()
    }

    #[test]
    fn envelope_two_clusters_is_closest_pair() {
        let fam = ClusterFamily::new(vec![cl(&[0.0, 1.0]), cl(&[4.0, 6.0])]).unwrap();
        let nb = polynomial_nubar(2.0);
        let got = decay_envelope(&fam, &nb, 7).unwrap();
        assert!((got - nb(3.0)).abs() < 1e-15);
    }

    #[test]
    fn envelope_three_collinear() {
        let fam = ClusterFamily::new(vec![cl(&[0.0]), cl(&[10.0]), cl(&[20.0])]).unwrap();
        let nb = polynomial_nubar(2.0);
        let got = decay_envelope(&fam, &nb, 7).unwrap();
        // best of the three two-edge trees: star at the middle cluster
        let expect = nb(10.0) * nb(10.0);
        assert!((got - expect).abs() < 1e-15);
        // rigid translation leaves it unchanged
        let shifted = ClusterFamily::new(vec![cl(&[5.0]), cl(&[15.0]), cl(&[25.0])]).unwrap();
        assert_eq!(decay_envelope(&shifted, &nb, 7).unwrap(), got);
    }

    #[test]
    fn envelope_cap() {
        let fam = ClusterFamily::new(
            (0..8).map(|i| cl(&[3.0 * i as f64])).collect(),
        )
        .unwrap();
        assert!(matches!(
            decay_envelope(&fam, &polynomial_nubar(2.0), 7),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn lemma_inequality_examples() {
        // coincident pair
        let (lhs, rhs) = decay_lemma_check(2.0, &[0.0, 0.0]).unwrap();
        assert!(lhs <= rhs, "{lhs} vs {rhs}");
        // separated pair
        let (lhs, rhs) = decay_lemma_check(2.0, &[0.0, 10.0]).unwrap();
        assert!(lhs <= rhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn lemma_inequality_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for alpha in [1.5, 2.0, 3.0] {
            for _ in 0..10 {
                let p = rng.gen_range(2..=4);
                let pts: Vec<f64> = (0..p).map(|_| rng.gen_range(-20.0..20.0)).collect();
                let (lhs, rhs) = decay_lemma_check(alpha, &pts).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-9), "alpha {alpha}, {pts:?}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn power_series_estimate_holds() {
        for u in 0..=4 {
            for v in 0..=4 {
                for x in [0.1, 0.5, 0.9] {
                    let (lhs, rhs) = power_series_estimate_sides(u, v, x).unwrap();
                    assert!(lhs <= rhs * (1.0 + 1e-12), "u {u}, v {v}, x {x}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn decay_report_on_tail_potential() {
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
        let summary = compute_summary(&pot, 1.0, Some(2.0), Some(2.0)).unwrap();
        let spec = SeriesSpec {
            n_max: 1,
            quadrature: QuadratureSpec::midpoint(64),
            cutoff: VolumeCutoff::new(vec![-8.0], vec![8.0]).unwrap(),
            z: 1e-4,
            beta: 1.0,
        };
        let fam = ClusterFamily::new(vec![cl(&[-2.5]), cl(&[2.5])]).unwrap();
        let report = theorem8_check(&fam, &pot, &spec, &summary, 7).unwrap();
        assert!(report.condition_ok, "margin {}", report.condition_margin);
        assert_eq!(report.bound_holds, Some(true));
        assert!(report.bound.is_finite() && report.bound > 0.0);
    }

    #[test]
    fn decay_report_flags_large_activity() {
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
        let summary = compute_summary(&pot, 1.0, Some(2.0), Some(2.0)).unwrap();
        let spec = SeriesSpec {
            n_max: 0,
            quadrature: QuadratureSpec::midpoint(16),
            cutoff: VolumeCutoff::new(vec![-4.0], vec![4.0]).unwrap(),
            z: 10.0,
            beta: 1.0,
        };
        let fam = ClusterFamily::new(vec![cl(&[-1.0]), cl(&[1.0])]).unwrap();
        let report = theorem8_check(&fam, &pot, &spec, &summary, 7).unwrap();
        assert!(!report.condition_ok);
        assert_eq!(report.bound_holds, None);
    }
}
