//! Correlation functions of the finite-volume gas: the truncated
//! Lebesgue-Poisson series, direct correlations, Ursell functions, truncated
//! and partially truncated correlations by their combinatorial definitions,
//! and the forest-kernel expansion route, with cross-validation between
//! routes.

use serde::{Deserialize, Serialize};

use crate::combinatorics::all_partitions;
use crate::configurations::{
    choose_base_point, distance, energy_w_point, ClusterFamily, PointConfiguration, VolumeCutoff,
};
use crate::error::{Error, Result};
use crate::kernels::kernel_t_points;
use crate::potentials::{mayer_factor, PairPotential, PotentialSummary};
use crate::quadrature::{integrate_n, QuadratureSpec};

/// Truncation and quadrature parameters of a Lebesgue-Poisson series.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    /// Truncation order of the sum over particle numbers.
    pub n_max: usize,
    pub quadrature: QuadratureSpec,
    pub cutoff: VolumeCutoff,
    /// Activity.
    pub z: f64,
    /// Inverse temperature.
    pub beta: f64,
}

impl SeriesSpec {
    pub fn validate(&self) -> Result<()> {
        if self.z <= 0.0 {
            return Err(Error::Domain(format!("activity must be positive, got {}", self.z)));
        }
        if self.beta <= 0.0 {
            return Err(Error::Domain(format!(
                "inverse temperature must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    UrsellSeries,
    ForestSeries,
    Mobius,
}

/// A computed correlation value with its reported error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub value: f64,
    /// Total reported error: truncation tail plus quadrature estimates.
    pub truncation_error: f64,
    /// Whether the tail part of the error is a proven bound (as opposed to a
    /// last-increment heuristic).
    pub rigorous: bool,
    pub route: Route,
    /// Whether the activity lies inside the applicable convergence region,
    /// when one was checked.
    pub inside_convergence_region: Option<bool>,
}

/// One truncated Lebesgue-Poisson series: value, per-order terms, and the
/// summed quadrature error estimates.
#[derive(Clone, Debug)]
pub struct LpSeries {
    pub value: f64,
    pub terms: Vec<f64>,
    pub quadrature_error: f64,
}

/// `sum_{n=0}^{n_max} z^n/n! Integral_{Lambda^n} F_n`, with `F` receiving
/// the flat coordinates of the `n` points (empty slice for `n = 0`).
pub fn lp_integral(spec: &SeriesSpec, f: &mut dyn FnMut(&[f64]) -> f64) -> Result<LpSeries> {
    spec.validate()?;
    let mut value = 0.0;
    let mut terms = Vec::with_capacity(spec.n_max + 1);
    let mut qerr = 0.0;
    let mut weight = 1.0; // z^n / n!
    for n in 0..=spec.n_max {
        if n > 0 {
            weight *= spec.z / n as f64;
        }
        let (integral, err) = integrate_n(&spec.cutoff.lo, &spec.cutoff.hi, n, spec.quadrature, f);
        let term = weight * integral;
        terms.push(term);
        value += term;
        qerr += weight.abs() * err;
    }
    Ok(LpSeries { value, terms, quadrature_error: qerr })
}

/// Boltzmann weight of `base` points joined with `n` extra points given as
/// flat coordinates: `exp(-beta U(union))`.
fn boltzmann_union(
    base: &[Vec<f64>],
    u_base: f64,
    flat: &[f64],
    d: usize,
    pot: &PairPotential,
    beta: f64,
) -> Result<f64> {
    if u_base == f64::INFINITY {
        return Ok(0.0);
    }
    let n = flat.len() / d;
    let mut u = u_base;
    for i in 0..n {
        let yi = &flat[i * d..(i + 1) * d];
        for b in base {
            let r = distance(b, yi);
            let v = pot.evaluate(r)?;
            if v == f64::INFINITY {
                return Ok(0.0);
            }
            u += v;
        }
        for j in 0..i {
            let yj = &flat[j * d..(j + 1) * d];
            let r = distance(yi, yj);
            let v = pot.evaluate(r)?;
            if v == f64::INFINITY {
                return Ok(0.0);
            }
            u += v;
        }
    }
    Ok((-beta * u).exp())
}

fn u_of(points: &[Vec<f64>], pot: &PairPotential) -> Result<f64> {
    let mut u = 0.0;
    for i in 0..points.len() {
        for j in 0..i {
            let v = pot.evaluate(distance(&points[i], &points[j]))?;
            if v == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            u += v;
        }
    }
    Ok(u)
}

/// Finite-volume partition function at the spec's truncation.
pub fn partition_function(spec: &SeriesSpec, pot: &PairPotential) -> Result<LpSeries> {
    let d = spec.cutoff.dim();
    let beta = spec.beta;
    let mut failure = None;
    let out = lp_integral(spec, &mut |flat| {
        match boltzmann_union(&[], 0.0, flat, d, pot, beta) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Direct finite-volume correlation `rho(eta)`: normalized Boltzmann series
/// with the same quadrature for the numerator and the partition function.
pub fn rho_direct(
    eta: &PointConfiguration,
    pot: &PairPotential,
    spec: &SeriesSpec,
) -> Result<CorrelationResult> {
    spec.validate()?;
    for p in eta.points() {
        if !spec.cutoff.contains(p) {
            return Err(Error::Domain(format!("point {p:?} lies outside the box")));
        }
    }
    let d = spec.cutoff.dim();
    let beta = spec.beta;
    let base: Vec<Vec<f64>> = eta.points().to_vec();
    let u_base = u_of(&base, pot)?;
    let mut failure = None;
    let num = lp_integral(spec, &mut |flat| {
        match boltzmann_union(&base, u_base, flat, d, pot, beta) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let zpart = partition_function(spec, pot)?;
    if zpart.value <= 0.0 {
        return Err(Error::Numeric("partition function evaluated to a nonpositive value".into()));
    }
    let zl = spec.z.powi(eta.len() as i32);
    let value = zl * num.value / zpart.value;
    // last-increment heuristic for the truncation of the ratio
    let trunc = if spec.n_max == 0 {
        0.0
    } else {
        let num_prev = num.value - num.terms[spec.n_max];
        let z_prev = zpart.value - zpart.terms[spec.n_max];
        if z_prev > 0.0 {
            (value - zl * num_prev / z_prev).abs()
        } else {
            value.abs()
        }
    };
    let quad = zl * (num.quadrature_error + value.abs() / zl * zpart.quadrature_error) / zpart.value;
    Ok(CorrelationResult {
        value,
        truncation_error: trunc + quad,
        rigorous: false,
        route: Route::Direct,
        inside_convergence_region: None,
    })
}

/// Ursell function on a raw point list: sum over connected simple graphs of
/// the product of Mayer factors; 0 for the empty list, 1 for a single
/// point.
pub fn ursell_points(
    points: &[Vec<f64>],
    pot: &PairPotential,
    beta: f64,
    cap: usize,
) -> Result<f64> {
    let k = points.len();
    if k == 0 {
        return Ok(0.0);
    }
    if k == 1 {
        return Ok(1.0);
    }
    if k > cap {
        return Err(Error::Resource(format!(
            "Ursell function capped at {cap} points, got {k}"
        )));
    }
    // only edges with nonzero Mayer factor can contribute
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..k {
        for j in 0..i {
            let w = mayer_factor(pot, beta, distance(&points[i], &points[j]))?;
            if w != 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    let ne = edges.len();
    let mut total = 0.0;
    let mut parent = vec![0usize; k];
    for mask in 0u64..(1 << ne) {
        if (mask.count_ones() as usize) < k - 1 {
            continue;
        }
        for (v, p) in parent.iter_mut().enumerate() {
            *p = v;
        }
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        let mut comps = k;
        let mut product = 1.0;
        for (b, &(i, j, w)) in edges.iter().enumerate() {
            if mask >> b & 1 == 1 {
                product *= w;
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                    comps -= 1;
                }
            }
        }
        if comps == 1 {
            total += product;
        }
    }
    Ok(total)
}

/// Ursell function of a configuration.
pub fn ursell(gamma: &PointConfiguration, pot: &PairPotential, beta: f64, cap: usize) -> Result<f64> {
    ursell_points(gamma.points(), pot, beta, cap)
}

/// Convergence radius `r(beta) = e^{-2 beta B - 1} / nu1` of the activity
/// expansion.
pub fn radius_r_beta(beta: f64, b: f64, nu1: f64) -> Result<f64> {
    if nu1 <= 0.0 {
        return Err(Error::Domain(format!("nu1 must be positive, got {nu1}")));
    }
    Ok((-2.0 * beta * b - 1.0).exp() / nu1)
}

/// Truncated correlation by its Ursell series:
/// `z^|eta| sum_n z^n/n! Integral Phi^T(eta + gamma)`.
pub fn tcf_series(
    eta: &PointConfiguration,
    pot: &PairPotential,
    spec: &SeriesSpec,
    summary: &PotentialSummary,
    ursell_cap: usize,
) -> Result<CorrelationResult> {
    spec.validate()?;
    let d = spec.cutoff.dim();
    let beta = spec.beta;
    let base: Vec<Vec<f64>> = eta.points().to_vec();
    let mut failure = None;
    let series = lp_integral(spec, &mut |flat| {
        let mut pts = base.clone();
        pts.extend(flat.chunks(d).map(|c| c.to_vec()));
        match ursell_points(&pts, pot, beta, ursell_cap) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let zl = spec.z.powi(eta.len() as i32);
    let value = zl * series.value;
    let inside = if summary.nu1 > 0.0 {
        spec.z < radius_r_beta(beta, summary.stability_b, summary.nu1)?
    } else {
        // no interaction at all: every activity converges
        true
    };
    let tail = last_increment_tail(&series.terms) * zl;
    Ok(CorrelationResult {
        value,
        truncation_error: tail + zl * series.quadrature_error,
        rigorous: false,
        route: Route::UrsellSeries,
        inside_convergence_region: Some(inside),
    })
}

/// Heuristic tail from the last terms of a truncated series: the last term
/// scaled by the closing geometric ratio when it is contracting, the plain
/// last term otherwise.
fn last_increment_tail(terms: &[f64]) -> f64 {
    let n = terms.len();
    if n <= 1 {
        return 0.0;
    }
    let last = terms[n - 1].abs();
    let prev = terms[n - 2].abs();
    if prev > 0.0 && last / prev < 0.9 {
        let r = last / prev;
        last * r / (1.0 - r)
    } else {
        last
    }
}

/// Cumulant combination over cluster blocks:
/// `sum_k (-1)^(k-1) (k-1)! sum over k-partitions of prod rho(block union)`.
/// `rho` receives the sorted cluster indices of a block.
pub fn mobius_truncate(m: usize, rho: &mut dyn FnMut(&[usize]) -> Result<f64>) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("need at least one cluster".into()));
    }
    let mut total = 0.0;
    for p in all_partitions(m) {
        let k = p.blocks.len();
        let mut sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        for j in 1..k {
            sign *= j as f64;
        }
        let mut prod = 1.0;
        for block in &p.blocks {
            prod *= rho(block)?;
        }
        total += sign * prod;
    }
    Ok(total)
}

/// Partially truncated correlation by the cumulant route, with every block
/// correlation computed by `rho_direct`.
pub fn ptcf_mobius(
    family: &ClusterFamily,
    pot: &PairPotential,
    spec: &SeriesSpec,
) -> Result<CorrelationResult> {
    let m = family.m();
    if m >= 2 && family.clusters().iter().any(|c| c.is_empty()) {
        return Ok(CorrelationResult {
            value: 0.0,
            truncation_error: 0.0,
            rigorous: true,
            route: Route::Mobius,
            inside_convergence_region: None,
        });
    }
    // evaluate rho once per distinct block
    let mut cache: std::collections::HashMap<Vec<usize>, (f64, f64)> = std::collections::HashMap::new();
    let mut block_rho = |idx: &[usize]| -> Result<(f64, f64)> {
        if let Some(&v) = cache.get(idx) {
            return Ok(v);
        }
        let mut pts = Vec::new();
        for &i in idx {
            pts.extend(family.clusters()[i].points().iter().cloned());
        }
        let cfg = PointConfiguration::new(pts, family.dim())?;
        let r = rho_direct(&cfg, pot, spec)?;
        cache.insert(idx.to_vec(), (r.value, r.truncation_error));
        Ok((r.value, r.truncation_error))
    };
    let mut value = 0.0;
    let mut err = 0.0;
    for p in all_partitions(m) {
        let k = p.blocks.len();
        let mut coeff = 1.0;
        for j in 1..k {
            coeff *= j as f64;
        }
        let vals: Vec<(f64, f64)> = p
            .blocks
            .iter()
            .map(|b| block_rho(b))
            .collect::<Result<_>>()?;
        let prod: f64 = vals.iter().map(|&(v, _)| v).product();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        value += sign * coeff * prod;
        // first-order error propagation through the product
        for j in 0..vals.len() {
            let mut partial = coeff;
            for (i, &(v, _)) in vals.iter().enumerate() {
                if i != j {
                    partial *= v.abs();
                }
            }
            err += partial * vals[j].1;
        }
    }
    Ok(CorrelationResult {
        value,
        truncation_error: err,
        rigorous: false,
        route: Route::Mobius,
        inside_convergence_region: None,
    })
}

/// Proven tail of the forest-kernel series beyond order `n_from`, when the
/// geometric convergence condition holds: partial exact summands of the
/// order-wise bound, closed with the geometric envelope.
pub fn forest_series_tail(
    l: usize,
    l1: usize,
    m: usize,
    n_from: usize,
    z: f64,
    beta: f64,
    b: f64,
    nu0: f64,
    nu1: f64,
) -> Option<f64> {
    let h = z * (2.0 * beta * b).exp();
    let x = h * nu1;
    let q = x * std::f64::consts::E.powi(2);
    if !(q < 1.0) {
        return None;
    }
    let nt0 = nu0.max(1.0);
    // log of (2 z e^{2 beta B})^l (nt0)^(l - l1)
    let ln_pref = l as f64 * (2.0 * h).ln() + (l - l1) as f64 * nt0.ln();
    let mut tail = 0.0;
    let extra = 60usize;
    let mut ln_fact = 0.0;
    for n in 1..=n_from + extra {
        ln_fact += (n as f64).ln();
        if n <= n_from {
            continue;
        }
        let ln_term = ln_pref
            + (m as f64 + n as f64 - 2.0) * ((l + n) as f64).ln()
            + n as f64 * x.ln()
            - ln_fact;
        tail += ln_term.exp();
    }
    // geometric closure from the Stirling form of the summand
    let ln_close = ln_pref + l as f64 + (m as f64 - 2.0) * (l as f64).ln()
        + (n_from + extra + 1) as f64 * q.ln()
        - (1.0 - q).ln();
    Some(tail + ln_close.exp())
}

/// Partially truncated correlation by the forest-kernel route:
/// `sum_n 1/n! Integral_{Lambda^n} T(...|y) dy`, with a proven tail bound
/// inside the convergence region.
pub fn ptcf_forest_series(
    family: &ClusterFamily,
    pot: &PairPotential,
    spec: &SeriesSpec,
    summary: &PotentialSummary,
) -> Result<CorrelationResult> {
    spec.validate()?;
    let m = family.m();
    if m >= 2 && family.clusters().iter().any(|c| c.is_empty()) {
        return Ok(CorrelationResult {
            value: 0.0,
            truncation_error: 0.0,
            rigorous: true,
            route: Route::ForestSeries,
            inside_convergence_region: None,
        });
    }
    let d = spec.cutoff.dim();
    let b = summary.stability_b;
    let mut failure = None;
    let mut value = 0.0;
    let mut qerr = 0.0;
    let mut weight = 1.0; // 1 / n!
    for n in 0..=spec.n_max {
        if n > 0 {
            weight /= n as f64;
        }
        let (integral, err) =
            integrate_n(&spec.cutoff.lo, &spec.cutoff.hi, n, spec.quadrature, &mut |flat| {
                let pts: Vec<Vec<f64>> = flat.chunks(d).map(|c| c.to_vec()).collect();
                match kernel_t_points(family, &pts, pot, spec.beta, spec.z, b) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            });
        if let Some(e) = failure {
            return Err(e);
        }
        value += weight * integral;
        qerr += weight * err;
    }
    let l = family.total_size();
    let l1 = family.sizes()[0];
    let tail = forest_series_tail(
        l,
        l1,
        m,
        spec.n_max,
        spec.z,
        spec.beta,
        b,
        summary.nu0,
        summary.nu1,
    );
    let (tail_value, rigorous, inside) = match tail {
        Some(t) => (t, true, true),
        None => (value.abs(), false, false),
    };
    Ok(CorrelationResult {
        value,
        truncation_error: tail_value + qerr,
        rigorous,
        route: Route::ForestSeries,
        inside_convergence_region: Some(inside),
    })
}

/// Residual report of the extraction identity relating the m-cluster
/// correlation to lower ones.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Sum of the reported error bounds of every piece entering both sides.
    pub combined_bound: f64,
}

/// Evaluate both sides of the extraction identity at matched truncation:
/// the left side is the forest-series correlation; the right side extracts
/// the base point of the first cluster and re-expands through lower-order
/// correlations.
pub fn ks_residual(
    family: &ClusterFamily,
    pot: &PairPotential,
    spec: &SeriesSpec,
    summary: &PotentialSummary,
) -> Result<KsReport> {
    spec.validate()?;
    let m = family.m();
    let eta1 = &family.clusters()[0];
    if eta1.is_empty() {
        return Err(Error::Domain("the identity requires a nonempty first cluster".into()));
    }
    let b = summary.stability_b;
    let beta = spec.beta;
    let d = spec.cutoff.dim();
    let lhs_res = ptcf_forest_series(family, pot, spec, summary)?;
    let x1_idx = choose_base_point(eta1, pot, b)?;
    let x1 = eta1.points()[x1_idx].clone();
    let eta1_rest = eta1.without(x1_idx);
    let w = energy_w_point(&x1, &eta1_rest, pot)?;
    let prefactor = if w == f64::INFINITY { 0.0 } else { spec.z * (-beta * w).exp() };
    let mut rhs = 0.0;
    let mut rhs_err = 0.0;
    let rest_clusters = &family.clusters()[1..];
    // every subset I of the later clusters, with a sub-configuration xi
    // meeting each chosen cluster
    for imask in 0u32..(1 << (m - 1)) {
        let picked: Vec<usize> = (0..m - 1).filter(|j| imask >> j & 1 == 1).collect();
        let others: Vec<PointConfiguration> = (0..m - 1)
            .filter(|j| imask >> j & 1 == 0)
            .map(|j| rest_clusters[j].clone())
            .collect();
        // merged full clusters of I
        let mut merged_base: Vec<Vec<f64>> = eta1_rest.points().to_vec();
        for &j in &picked {
            merged_base.extend(rest_clusters[j].points().iter().cloned());
        }
        // enumerate xi as one nonempty subset per picked cluster
        let mut xi_choices: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
        for &j in &picked {
            let pts = rest_clusters[j].points();
            let mut next = Vec::new();
            for sub in 1u32..(1 << pts.len()) {
                let chosen: Vec<Vec<f64>> = (0..pts.len())
                    .filter(|i| sub >> i & 1 == 1)
                    .map(|i| pts[i].clone())
                    .collect();
                for base in &xi_choices {
                    let mut v = base.clone();
                    v.extend(chosen.iter().cloned());
                    next.push(v);
                }
            }
            xi_choices = next;
        }
        for xi in &xi_choices {
            // series over the integrated configuration gamma, truncation
            // shared with the left side
            let mut weight = 1.0;
            for n in 0..=spec.n_max {
                if n > 0 {
                    weight /= n as f64;
                }
                let inner_spec = SeriesSpec { n_max: spec.n_max - n, ..spec.clone() };
                let mut failure = None;
                let mut err_acc = 0.0;
                let (integral, qerr) =
                    integrate_n(&spec.cutoff.lo, &spec.cutoff.hi, n, spec.quadrature, &mut |flat| {
                        let gamma_pts: Vec<Vec<f64>> = flat.chunks(d).map(|c| c.to_vec()).collect();
                        // K(x1; xi + gamma)
                        let mut kval = 1.0;
                        for y in xi.iter().chain(&gamma_pts) {
                            match mayer_factor(pot, beta, distance(&x1, y)) {
                                Ok(c) => kval *= c,
                                Err(e) => {
                                    failure.get_or_insert(e);
                                    return 0.0;
                                }
                            }
                        }
                        if kval == 0.0 {
                            return 0.0;
                        }
                        // first cluster of the reduced family absorbs the
                        // merged clusters and the integration points
                        let mut first_pts = merged_base.clone();
                        first_pts.extend(gamma_pts.iter().cloned());
                        let first = match PointConfiguration::new(first_pts, d) {
                            Ok(c) => c,
                            Err(e) => {
                                failure.get_or_insert(e);
                                return 0.0;
                            }
                        };
                        let mut clusters = vec![first];
                        clusters.extend(others.iter().cloned());
                        let sub_family = match ClusterFamily::new(clusters) {
                            Ok(f) => f,
                            Err(e) => {
                                failure.get_or_insert(e);
                                return 0.0;
                            }
                        };
                        match ptcf_forest_series(&sub_family, pot, &inner_spec, summary) {
                            Ok(r) => {
                                err_acc += kval.abs() * r.truncation_error;
                                kval * r.value
                            }
                            Err(e) => {
                                failure.get_or_insert(e);
                                0.0
                            }
                        }
                    });
                if let Some(e) = failure {
                    return Err(e);
                }
                rhs += prefactor * weight * integral;
                // propagate inner errors through the box volume of this order
                let cell_share = if n == 0 { 1.0 } else { spec.cutoff.volume().powi(n as i32) };
                let node_count = match spec.quadrature {
                    QuadratureSpec::Midpoint { points_per_axis } => {
                        (points_per_axis as f64).powi((n * d) as i32)
                    }
                    QuadratureSpec::MonteCarlo { samples, .. } => samples as f64,
                };
                let mean_inner_err = if node_count > 0.0 { err_acc / node_count } else { 0.0 };
                rhs_err += prefactor * weight * (qerr + cell_share * mean_inner_err);
            }
        }
    }
    let residual = (lhs_res.value - rhs).abs();
    Ok(KsReport {
        lhs: lhs_res.value,
        rhs,
        residual,
        combined_bound: lhs_res.truncation_error + rhs_err,
    })
}

/// Both sides of the resummation identity at matched truncation and shared
/// quadrature nodes: summing over splittings of the integrated
/// configuration equals a double integral over two independent
/// configurations.
pub fn resummation_check(
    spec: &SeriesSpec,
    f: &dyn Fn(&[Vec<f64>]) -> f64,
    h: &dyn Fn(&[Vec<f64>], &[Vec<f64>]) -> f64,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let d = spec.cutoff.dim();
    // left: single series, split the configuration into every (eta, rest)
    let mut lhs_series = lp_integral(spec, &mut |flat| {
        let pts: Vec<Vec<f64>> = flat.chunks(d).map(|c| c.to_vec()).collect();
        let n = pts.len();
        let mut acc = 0.0;
        for mask in 0u32..(1 << n) {
            let (eta, rest): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask >> i & 1 == 1);
            let eta_pts: Vec<Vec<f64>> = eta.iter().map(|&i| pts[i].clone()).collect();
            let rest_pts: Vec<Vec<f64>> = rest.iter().map(|&i| pts[i].clone()).collect();
            acc += h(&eta_pts, &rest_pts);
        }
        acc * f(&pts)
    })?;
    // right: double series with total order capped at n_max
    let mut rhs = 0.0;
    let mut wk = 1.0;
    for k in 0..=spec.n_max {
        if k > 0 {
            wk *= spec.z / k as f64;
        }
        let mut wj = 1.0;
        for j in 0..=spec.n_max - k {
            if j > 0 {
                wj *= spec.z / j as f64;
            }
            let (integral, _) = integrate_n(
                &spec.cutoff.lo,
                &spec.cutoff.hi,
                k + j,
                spec.quadrature,
                &mut |flat| {
                    let pts: Vec<Vec<f64>> = flat.chunks(d).map(|c| c.to_vec()).collect();
                    let eta_pts = pts[..k].to_vec();
                    let gamma_pts = pts[k..].to_vec();
                    let mut all = eta_pts.clone();
                    all.extend(gamma_pts.iter().cloned());
                    f(&all) * h(&eta_pts, &gamma_pts)
                },
            );
            rhs += wk * wj * integral;
        }
    }
    lhs_series.quadrature_error = 0.0;
    Ok((lhs_series.value, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{compute_summary, Kind};

    fn cfg(pts: &[f64]) -> PointConfiguration {
        PointConfiguration::new(pts.iter().map(|&x| vec![x]).collect(), 1).unwrap()
    }

    fn rod() -> PairPotential {
        PairPotential::hard_rod(0.5, 1).unwrap()
    }

    fn free() -> PairPotential {
        // zero potential: table value 0 from radius 0 outwards
        PairPotential::new(Kind::Custom { hard_core: 0.0, table: vec![(1.0, 0.0)] }, 1).unwrap()
    }

    fn spec(n_max: usize, z: f64, pts: usize) -> SeriesSpec {
        SeriesSpec {
            n_max,
            quadrature: QuadratureSpec::midpoint(pts),
            cutoff: VolumeCutoff::new(vec![-0.5], vec![0.5]).unwrap(),
            z,
            beta: 1.0,
        }
    }

    #[test]
    fn lp_constant_tends_to_exponential() {
        // F = 1, z |Lambda| = 1: partial sums of e
        let s = spec(10, 1.0, 4);
        let out = lp_integral(&s, &mut |_| 1.0).unwrap();
        assert!((out.value - std::f64::consts::E).abs() < 1e-7);
        let s0 = spec(0, 1.0, 4);
        assert_eq!(lp_integral(&s0, &mut |_| 1.0).unwrap().value, 1.0);
    }

    #[test]
    fn lp_factorizes_over_points() {
        // F_n = prod f(x_i) gives sum (z int f)^n / n!
        let s = spec(5, 0.8, 8);
        let out = lp_integral(&s, &mut |flat| flat.iter().map(|x| 1.0 + x).product()).unwrap();
        let single = 1.0; // integral of (1 + x) over [-0.5, 0.5], exact for midpoint
        let mut expect = 0.0;
        let mut w = 1.0;
        for n in 0..=5 {
            if n > 0 {
                w *= 0.8 * single / n as f64;
            }
            expect += w;
        }
        assert!((out.value - expect).abs() < 1e-6);
    }

    #[test]
    fn rho_of_empty_is_one() {
        let s = spec(3, 0.4, 32);
        let r = rho_direct(&PointConfiguration::empty(1), &rod(), &s).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rho_ideal_gas_is_z_power() {
        let s = spec(4, 0.4, 32);
        let eta = cfg(&[0.0, 0.3]);
        let r = rho_direct(&eta, &free(), &s).unwrap();
        assert!((r.value - 0.4f64.powi(2)).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn rho_outside_box_rejected() {
        let s = spec(2, 0.4, 8);
        assert!(rho_direct(&cfg(&[2.0]), &rod(), &s).is_err());
    }

    #[test]
    fn rho_hard_rod_matches_hand_expansion() {
        // single rod in a box, n <= 2 by hand:
        // numerator_n = Integral over free volume, Z_n likewise
        let z = 0.05;
        let s = SeriesSpec {
            n_max: 2,
            quadrature: QuadratureSpec::midpoint(4000),
            cutoff: VolumeCutoff::new(vec![-1.0], vec![1.0]).unwrap(),
            z,
            beta: 1.0,
        };
        let r = rho_direct(&cfg(&[0.0]), &rod(), &s).unwrap();
        // free volume for one extra rod given one at 0 in [-1,1]: 2 - 2a = 1
        // two extra rods: both in [-1,-0.5] u [0.5,1] and apart by > 0.5:
        // by symmetry 2 * (area of y2 - y1 > 0.5 in each half) + cross halves
        // cross: y1 in [-1,-0.5], y2 in [0.5,1]: all pairs ok: 0.25
        // same half [0.5,1]: |y1-y2| > 0.5 impossible: 0
        // ordered pairs double the cross term: 2 * 0.25 = 0.5
        let num = 1.0 + z * 1.0 + z * z / 2.0 * 0.5;
        // Z: 1 + z*2 + z^2/2 * (pairs apart by > 0.5 in [-1,1]^2) = (1.5)^2 = 2.25
        let zz = 1.0 + 2.0 * z + z * z / 2.0 * 2.25;
        let expect = z * num / zz;
        assert!(
            (r.value - expect).abs() < r.truncation_error.max(1e-6),
            "{} vs {expect}",
            r.value
        );
    }

    #[test]
    fn ursell_base_cases() {
        let pot = rod();
        assert_eq!(ursell(&PointConfiguration::empty(1), &pot, 1.0, 7).unwrap(), 0.0);
        assert_eq!(ursell(&cfg(&[0.3]), &pot, 1.0, 7).unwrap(), 1.0);
    }

    #[test]
    fn ursell_three_points_explicit() {
        let pot = PairPotential::new(Kind::LennardJones { phi0: 1.0, r0: 1.0 }, 1).unwrap();
        let beta = 0.7;
        let pts = [0.0f64, 0.9, 2.1];
        let c = |i: usize, j: usize| {
            mayer_factor(&pot, beta, (pts[i] - pts[j]).abs()).unwrap()
        };
        let expect = c(0, 1) * c(0, 2) + c(0, 1) * c(1, 2) + c(0, 2) * c(1, 2)
            + c(0, 1) * c(0, 2) * c(1, 2);
        let got = ursell(&cfg(&pts), &pot, beta, 7).unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn ursell_partition_inversion() {
        // e^{-beta U(gamma)} = sum over partitions of prod of Ursell(blocks)
        let pot = PairPotential::new(Kind::LennardJones { phi0: 1.0, r0: 1.0 }, 1).unwrap();
        let beta = 0.5;
        for pts in [vec![0.0, 1.1], vec![0.0, 0.9, 1.9], vec![0.0, 0.8, 1.7, 2.9]] {
            let all: Vec<Vec<f64>> = pts.iter().map(|&x| vec![x]).collect();
            let lhs = (-beta * u_of(&all, &pot).unwrap()).exp();
            let mut rhs = 0.0;
            for p in all_partitions(pts.len()) {
                let mut prod = 1.0;
                for block in &p.blocks {
                    let bp: Vec<Vec<f64>> = block.iter().map(|&i| vec![pts[i]]).collect();
                    prod *= ursell_points(&bp, &pot, beta, 7).unwrap();
                }
                rhs += prod;
            }
            assert!((lhs - rhs).abs() < 1e-10, "{pts:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn mobius_small_cases() {
        // m = 2: rho12 - rho1 rho2; m = 3 with the usual signs
        let vals = std::collections::HashMap::from([
            (vec![0], 2.0),
            (vec![1], 3.0),
            (vec![2], 5.0),
            (vec![0, 1], 7.0),
            (vec![0, 2], 11.0),
            (vec![1, 2], 13.0),
            (vec![0, 1, 2], 17.0),
        ]);
        let mut rho = |idx: &[usize]| Ok(vals[&idx.to_vec()]);
        assert_eq!(mobius_truncate(1, &mut rho).unwrap(), 2.0);
        assert!((mobius_truncate(2, &mut rho).unwrap() - (7.0 - 6.0)).abs() < 1e-14);
        let m3 = 17.0 - 7.0 * 5.0 - 11.0 * 3.0 - 13.0 * 2.0 + 2.0 * 2.0 * 3.0 * 5.0;
        assert!((mobius_truncate(3, &mut rho).unwrap() - m3).abs() < 1e-12);
    }

    #[test]
    fn tcf_leading_terms() {
        let pot = rod();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        // ideal gas singleton: exactly z
        let s = spec(3, 0.2, 32);
        let free_sum = compute_summary(&free(), 1.0, None, None).unwrap();
        let r = tcf_series(&cfg(&[0.0]), &free(), &s, &free_sum, 7).unwrap();
        assert!((r.value - 0.2).abs() < 1e-13);
        // pair at order 0: z^2 C(x1 - x2)
        let s0 = SeriesSpec { n_max: 0, ..spec(0, 0.2, 32) };
        let r = tcf_series(&cfg(&[0.0, 0.3]), &pot, &s0, &summary, 7).unwrap();
        let c = mayer_factor(&pot, 1.0, 0.3).unwrap();
        assert!((r.value - 0.04 * c).abs() < 1e-14);
        assert_eq!(r.inside_convergence_region, Some(true));
    }

    fn wide_spec(n_max: usize, z: f64, pts: usize) -> SeriesSpec {
        SeriesSpec {
            n_max,
            quadrature: QuadratureSpec::midpoint(pts),
            cutoff: VolumeCutoff::new(vec![-6.0], vec![6.0]).unwrap(),
            z,
            beta: 1.0,
        }
    }

    #[test]
    fn forest_route_agrees_with_mobius_route() {
        let pot = rod();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        let z = 0.1 * radius_r_beta(1.0, 0.0, summary.nu1).unwrap();
        let fam = ClusterFamily::new(vec![cfg(&[-0.2]), cfg(&[0.2])]).unwrap();
        let s = wide_spec(2, z, 96);
        let forest = ptcf_forest_series(&fam, &pot, &s, &summary).unwrap();
        let mobius = ptcf_mobius(&fam, &pot, &s).unwrap();
        let budget = forest.truncation_error + mobius.truncation_error;
        assert!(
            (forest.value - mobius.value).abs() <= budget,
            "forest {} vs mobius {}, budget {budget}",
            forest.value,
            mobius.value
        );
        assert!(forest.rigorous);
    }

    #[test]
    fn forest_route_order_zero_is_mayer_pair() {
        let pot = rod();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        let fam = ClusterFamily::new(vec![cfg(&[-0.2]), cfg(&[0.2])]).unwrap();
        let s = SeriesSpec { n_max: 0, ..wide_spec(0, 0.05, 8) };
        let r = ptcf_forest_series(&fam, &pot, &s, &summary).unwrap();
        let c = mayer_factor(&pot, 1.0, 0.4).unwrap();
        assert!((r.value - 0.05 * 0.05 * c).abs() < 1e-14);
    }

    #[test]
    fn empty_cluster_gives_zero() {
        let pot = rod();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        let fam = ClusterFamily::new(vec![cfg(&[0.0]), PointConfiguration::empty(1)]).unwrap();
        let s = wide_spec(1, 0.05, 8);
        assert_eq!(ptcf_forest_series(&fam, &pot, &s, &summary).unwrap().value, 0.0);
        assert_eq!(ptcf_mobius(&fam, &pot, &s).unwrap().value, 0.0);
    }

    #[test]
    fn ks_residual_ideal_gas_vanishes() {
        let pot = free();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        let s = wide_spec(2, 0.1, 12);
        // single cluster of two points
        let fam = ClusterFamily::new(vec![cfg(&[0.0, 1.0])]).unwrap();
        let rep = ks_residual(&fam, &pot, &s, &summary).unwrap();
        assert!(rep.residual < 1e-10, "residual {}", rep.residual);
        // two singleton clusters
        let fam = ClusterFamily::new(vec![cfg(&[0.0]), cfg(&[1.0])]).unwrap();
        let rep = ks_residual(&fam, &pot, &s, &summary).unwrap();
        assert!(rep.residual < 1e-10, "residual {}", rep.residual);
    }

    #[test]
    fn ks_residual_hard_rod_within_bound() {
        let pot = rod();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        let z = 0.1 * radius_r_beta(1.0, 0.0, summary.nu1).unwrap();
        let s = wide_spec(2, z, 48);
        let fam = ClusterFamily::new(vec![cfg(&[-0.2]), cfg(&[0.2])]).unwrap();
        let rep = ks_residual(&fam, &pot, &s, &summary).unwrap();
        assert!(
            rep.residual <= rep.combined_bound,
            "residual {} above bound {}",
            rep.residual,
            rep.combined_bound
        );
    }

    #[test]
    fn resummation_identity_at_truncation() {
        let s = spec(3, 0.7, 6);
        // polynomial test functions
        let f = |pts: &[Vec<f64>]| 1.0 + pts.iter().map(|p| p[0] + 0.3 * p[0] * p[0]).sum::<f64>();
        let h = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            (1.0 + a.iter().map(|p| 0.5 - p[0]).sum::<f64>())
                * (1.0 + b.iter().map(|p| 0.2 * p[0]).sum::<f64>())
        };
        let (lhs, rhs) = resummation_check(&s, &f, &h).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
        // H independent of the split: both sides reduce to weighted counts
        let h1 = |_: &[Vec<f64>], _: &[Vec<f64>]| 1.0;
        let (lhs, rhs) = resummation_check(&s, &f, &h1).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn tcf_matches_mobius_on_singletons() {
        let pot = rod();
        let summary = compute_summary(&pot, 1.0, None, None).unwrap();
        let z = 0.03;
        let s = wide_spec(2, z, 96);
        let eta = cfg(&[-0.2, 0.2]);
        let t = tcf_series(&eta, &pot, &s, &summary, 7).unwrap();
        let fam = ClusterFamily::new(vec![cfg(&[-0.2]), cfg(&[0.2])]).unwrap();
        let mob = ptcf_mobius(&fam, &pot, &s).unwrap();
        let budget = t.truncation_error + mob.truncation_error;
        assert!(
            (t.value - mob.value).abs() <= budget.max(1e-9),
            "tcf {} vs mobius {}, budget {budget}",
            t.value,
            mob.value
        );
    }
}
