//! Finite point configurations, cluster families, interaction energies U and
//! W, and the product kernels built from Mayer factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{mayer_factor, PairPotential};

pub type Point = Vec<f64>;

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn lex_cmp(x: &[f64], y: &[f64]) -> std::cmp::Ordering {
    for (a, b) in x.iter().zip(y) {
        let c = a.total_cmp(b);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

/// A finite ordered configuration of points in `R^d`, kept in canonical
/// lexicographic order so equality is structural.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    points: Vec<Point>,
    d: usize,
}

impl PointConfiguration {
    pub fn new(mut points: Vec<Point>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        for p in &points {
            if p.len() != d {
                return Err(Error::Domain(format!(
                    "point has {} coordinates, expected {}",
                    p.len(),
                    d
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain("coordinates must be finite".into()));
            }
        }
        points.sort_by(|a, b| lex_cmp(a, b));
        Ok(PointConfiguration { points, d })
    }

    pub fn empty(d: usize) -> Self {
        PointConfiguration { points: Vec::new(), d }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.points.iter().any(|q| q[..] == *p)
    }

    /// Union as multisets (duplicates kept; they carry infinite energy).
    pub fn union(&self, other: &PointConfiguration) -> Result<PointConfiguration> {
        if self.d != other.d {
            return Err(Error::Domain("dimension mismatch".into()));
        }
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        PointConfiguration::new(pts, self.d)
    }

    /// Configuration with the point at `idx` removed.
    pub fn without(&self, idx: usize) -> PointConfiguration {
        let mut pts = self.points.clone();
        pts.remove(idx);
        PointConfiguration { points: pts, d: self.d }
    }

    pub fn overlaps(&self, other: &PointConfiguration) -> bool {
        self.points.iter().any(|p| other.contains_point(p))
    }
}

/// An ordered family of pairwise disjoint clusters `eta_1, ..., eta_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterFamily {
    clusters: Vec<PointConfiguration>,
}

impl ClusterFamily {
    /// Clusters may be empty; the correlation formulas send any family with
    /// an empty cluster (and `m >= 2`) to zero rather than rejecting it.
    pub fn new(clusters: Vec<PointConfiguration>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::Domain("need at least one cluster".into()));
        }
        let d = clusters[0].dim();
        for c in &clusters {
            if c.dim() != d {
                return Err(Error::Domain("clusters must share a dimension".into()));
            }
        }
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if clusters[i].overlaps(&clusters[j]) {
                    return Err(Error::Domain(format!(
                        "clusters {i} and {j} share a point"
                    )));
                }
            }
        }
        Ok(ClusterFamily { clusters })
    }

    pub fn m(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[PointConfiguration] {
        &self.clusters
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.len()).collect()
    }

    pub fn total_size(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    pub fn dim(&self) -> usize {
        self.clusters[0].dim()
    }

    /// Union of all clusters.
    pub fn pooled(&self) -> PointConfiguration {
        let d = self.dim();
        let mut pts = Vec::new();
        for c in &self.clusters {
            pts.extend(c.points().iter().cloned());
        }
        PointConfiguration::new(pts, d).expect("clusters validated on construction")
    }
}

/// An axis-aligned box volume cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeCutoff {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl VolumeCutoff {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Domain("box bounds must be nonempty and match".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Domain("box must have positive side lengths".into()));
        }
        Ok(VolumeCutoff { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lo.len()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }
}

/// Total interaction energy `U`: sum of `phi(|x - y|)` over unordered pairs.
/// Empty and singleton configurations have zero energy; a repeated point
/// makes the energy infinite (pair at distance zero).
pub fn energy_u(cfg: &PointConfiguration, pot: &PairPotential) -> Result<f64> {
    let pts = cfg.points();
    let mut total = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let v = pot.evaluate(distance(&pts[i], &pts[j]))?;
            if v == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            total += v;
        }
    }
    Ok(total)
}

/// Cross energy `W(eta; gamma)`: sum over all pairs with one point in each.
/// Infinite when the configurations overlap.
pub fn energy_w(
    eta: &PointConfiguration,
    gamma: &PointConfiguration,
    pot: &PairPotential,
) -> Result<f64> {
    if eta.overlaps(gamma) {
        return Ok(f64::INFINITY);
    }
    let mut total = 0.0;
    for x in eta.points() {
        for y in gamma.points() {
            let v = pot.evaluate(distance(x, y))?;
            if v == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            total += v;
        }
    }
    Ok(total)
}

/// Cross energy of a single point against a configuration.
pub fn energy_w_point(x: &[f64], gamma: &PointConfiguration, pot: &PairPotential) -> Result<f64> {
    let mut total = 0.0;
    for y in gamma.points() {
        let v = pot.evaluate(distance(x, y))?;
        if v == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        total += v;
    }
    Ok(total)
}

/// Index of a point `x` in `eta` with `W(x; eta minus x) >= -2B`, lowest
/// canonical index among qualifying points. Stability of the potential
/// guarantees one exists; failure means the supplied `B` is not valid.
pub fn choose_base_point(eta: &PointConfiguration, pot: &PairPotential, b: f64) -> Result<usize> {
    if eta.is_empty() {
        return Err(Error::Domain("cannot pick a base point of an empty configuration".into()));
    }
    let tol = 1e-12 * (1.0 + 2.0 * b);
    for i in 0..eta.len() {
        let rest = eta.without(i);
        let w = energy_w_point(&eta.points()[i], &rest, pot)?;
        if w >= -2.0 * b - tol {
            return Ok(i);
        }
    }
    Err(Error::Inconsistency(format!(
        "no point with W(x; rest) >= -2B for B = {b}; the stability constant is not valid for this configuration"
    )))
}

/// Product kernel `K(x; xi) = prod_{y in xi} (e^{-beta phi(|x-y|)} - 1)`;
/// the empty product is 1.
pub fn product_kernel_k(
    x: &[f64],
    xi: &PointConfiguration,
    pot: &PairPotential,
    beta: f64,
) -> Result<f64> {
    let mut prod = 1.0;
    for y in xi.points() {
        prod *= mayer_factor(pot, beta, distance(x, y))?;
        if prod == 0.0 {
            break;
        }
    }
    Ok(prod)
}

/// Fan kernel: sum over sub-configurations of the pooled clusters that meet
/// every cluster, of the product of edge weights from `x`. Factorizes as
/// `prod_i (prod_{y in eta_i} (1 + w(x,y)) - 1)`.
pub fn fan_kernel_k0(
    x: &[f64],
    clusters: &[PointConfiguration],
    w: &dyn Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    let mut prod = 1.0;
    for c in clusters {
        if c.is_empty() {
            return Err(Error::Domain("fan kernel requires nonempty clusters".into()));
        }
        let mut inner = 1.0;
        for y in c.points() {
            inner *= 1.0 + w(x, y.as_slice());
        }
        prod *= inner - 1.0;
    }
    Ok(prod)
}
