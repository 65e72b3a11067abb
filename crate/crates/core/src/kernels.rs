//! The kernel recursions behind the partially truncated correlation
//! expansion: the physical kernel T (Boltzmann prefactor, Mayer edge
//! weights) and its dominating abstract kernel Q (constant prefactor,
//! nonnegative edge weights), plus integrated kernels and chain kernels.
//!
//! Both kernels satisfy the same recursion shape: extract a base point from
//! the first cluster, fan it out to a subset of the external points and a
//! sub-configuration meeting every absorbed cluster, merge the absorbed
//! material into the first cluster, and recurse. The sum over the
//! sub-configuration factorizes into per-cluster fan factors.

use std::collections::HashMap;

use crate::configurations::{
    fan_kernel_k0, ClusterFamily, PointConfiguration, VolumeCutoff,
};
use crate::error::{Error, Result};
use crate::potentials::{mayer_factor, PairPotential};
use crate::quadrature::{integrate_n, QuadratureSpec};

/// How the per-step scalar prefactor is formed.
enum Prefactor {
    /// Q: constant `h`, base point = lowest index.
    Constant(f64),
    /// T: `z * exp(-beta W(x1; first minus x1))`, base point chosen so that
    /// `W(x1; rest) >= -2B`.
    Boltzmann { z: f64, beta: f64, b: f64 },
}

struct Evaluator {
    nv: usize,
    /// Edge weights, `nv x nv`.
    w: Vec<f64>,
    /// Pair energies (for the Boltzmann prefactor), `nv x nv`.
    phi: Vec<f64>,
    pref: Prefactor,
    memo: HashMap<(u32, Vec<u32>, u32), f64>,
}

impl Evaluator {
    fn pair_w(&self, a: usize, b: usize) -> f64 {
        self.w[a * self.nv + b]
    }

    fn base_point(&self, first: u32) -> Result<usize> {
        match self.pref {
            Prefactor::Constant(_) => Ok(first.trailing_zeros() as usize),
            Prefactor::Boltzmann { b, .. } => {
                let tol = 1e-12 * (1.0 + 2.0 * b);
                let mut mask = first;
                while mask != 0 {
                    let x = mask.trailing_zeros() as usize;
                    mask &= mask - 1;
                    let mut wsum = 0.0;
                    let mut others = first & !(1u32 << x);
                    while others != 0 {
                        let y = others.trailing_zeros() as usize;
                        others &= others - 1;
                        wsum += self.phi[x * self.nv + y];
                        if wsum == f64::INFINITY {
                            break;
                        }
                    }
                    if wsum >= -2.0 * b - tol {
                        return Ok(x);
                    }
                }
                Err(Error::Inconsistency(
                    "no base point satisfies W(x; rest) >= -2B; the stability constant is invalid"
                        .into(),
                ))
            }
        }
    }

    fn prefactor(&self, x1: usize, first_rem: u32) -> f64 {
        match self.pref {
            Prefactor::Constant(h) => h,
            Prefactor::Boltzmann { z, beta, .. } => {
                let mut wsum = 0.0;
                let mut mask = first_rem;
                while mask != 0 {
                    let y = mask.trailing_zeros() as usize;
                    mask &= mask - 1;
                    wsum += self.phi[x1 * self.nv + y];
                    if wsum == f64::INFINITY {
                        return 0.0;
                    }
                }
                z * (-beta * wsum).exp()
            }
        }
    }

    fn eval(&mut self, first: u32, rest: &[u32], gamma: u32) -> Result<f64> {
        if first == 0 {
            return Ok(if rest.is_empty() && gamma == 0 { 1.0 } else { 0.0 });
        }
        let mut key_rest = rest.to_vec();
        key_rest.sort_unstable();
        let key = (first, key_rest, gamma);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let x1 = self.base_point(first)?;
        let first_rem = first & !(1u32 << x1);
        let pref = self.prefactor(x1, first_rem);
        // fan factor of each untouched cluster as seen from x1:
        // prod over its points of (1 + w) minus 1
        let fans: Vec<f64> = rest
            .iter()
            .map(|&cm| {
                let mut p = 1.0;
                let mut mask = cm;
                while mask != 0 {
                    let y = mask.trailing_zeros() as usize;
                    mask &= mask - 1;
                    p *= 1.0 + self.pair_w(x1, y);
                }
                p - 1.0
            })
            .collect();
        let mut total = 0.0;
        let mut xi = gamma;
        loop {
            let mut k_xi = 1.0;
            let mut mask = xi;
            while mask != 0 {
                let y = mask.trailing_zeros() as usize;
                mask &= mask - 1;
                k_xi *= self.pair_w(x1, y);
            }
            for imask in 0u32..(1 << rest.len()) {
                let mut fan = 1.0;
                let mut merged = 0u32;
                let mut sub_rest = Vec::with_capacity(rest.len());
                for (j, &cm) in rest.iter().enumerate() {
                    if imask >> j & 1 == 1 {
                        fan *= fans[j];
                        merged |= cm;
                    } else {
                        sub_rest.push(cm);
                    }
                }
                if k_xi * fan != 0.0 {
                    let sub = self.eval(first_rem | merged | xi, &sub_rest, gamma & !xi)?;
                    total += k_xi * fan * sub;
                }
            }
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & gamma;
        }
        let value = pref * total;
        self.memo.insert(key, value);
        Ok(value)
    }
}

fn build_masks(sizes: &[usize], n_gamma: usize) -> Result<(Vec<u32>, u32)> {
    let nv = sizes.iter().sum::<usize>() + n_gamma;
    if nv > 20 {
        return Err(Error::Resource(format!(
            "kernel instance has {nv} vertices, above the hard limit of 20"
        )));
    }
    let mut masks = Vec::with_capacity(sizes.len());
    let mut offset = 0usize;
    for &l in sizes {
        masks.push(((1u32 << l) - 1) << offset);
        offset += l;
    }
    let gamma = if n_gamma == 0 { 0 } else { ((1u32 << n_gamma) - 1) << offset };
    Ok((masks, gamma))
}

/// Shared entry: handle the empty-cluster initial conditions, then run the
/// mask recursion over the nonempty clusters.
fn run_kernel(
    family: &ClusterFamily,
    gamma_positions: &[Vec<f64>],
    mut make: impl FnMut(Vec<Vec<f64>>) -> Result<Evaluator>,
) -> Result<f64> {
    let m = family.m();
    let has_empty = family.clusters().iter().any(|c| c.is_empty());
    if has_empty {
        // a single empty cluster with no externals is the trivial instance;
        // anything else with an empty cluster vanishes
        let trivial = m == 1 && gamma_positions.is_empty();
        return Ok(if trivial { 1.0 } else { 0.0 });
    }
    let mut positions = Vec::new();
    for c in family.clusters() {
        positions.extend(c.points().iter().cloned());
    }
    positions.extend(gamma_positions.iter().cloned());
    let (masks, gamma_mask) = build_masks(&family.sizes(), gamma_positions.len())?;
    let mut ev = make(positions)?;
    let rest: Vec<u32> = masks[1..].to_vec();
    ev.eval(masks[0], &rest, gamma_mask)
}

fn t_evaluator(
    positions: Vec<Vec<f64>>,
    pot: &PairPotential,
    beta: f64,
    z: f64,
    b: f64,
) -> Result<Evaluator> {
    let nv = positions.len();
    let mut w = vec![0.0; nv * nv];
    let mut phi = vec![0.0; nv * nv];
    for a in 0..nv {
        for c in a + 1..nv {
            let r = crate::configurations::distance(&positions[a], &positions[c]);
            let p = pot.evaluate(r)?;
            let mf = mayer_factor(pot, beta, r)?;
            phi[a * nv + c] = p;
            phi[c * nv + a] = p;
            w[a * nv + c] = mf;
            w[c * nv + a] = mf;
        }
    }
    Ok(Evaluator { nv, w, phi, pref: Prefactor::Boltzmann { z, beta, b }, memo: HashMap::new() })
}

fn q_evaluator(
    positions: Vec<Vec<f64>>,
    h: f64,
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
) -> Result<Evaluator> {
    let nv = positions.len();
    let mut w = vec![0.0; nv * nv];
    for a in 0..nv {
        for c in a + 1..nv {
            let v = nu(&positions[a], &positions[c]);
            w[a * nv + c] = v;
            w[c * nv + a] = v;
        }
    }
    Ok(Evaluator { nv, w, phi: vec![0.0; nv * nv], pref: Prefactor::Constant(h), memo: HashMap::new() })
}

/// The physical kernel T of the cluster family with external configuration
/// `gamma`. Errors when `gamma` shares a point with a cluster.
pub fn kernel_t(
    family: &ClusterFamily,
    gamma: &PointConfiguration,
    pot: &PairPotential,
    beta: f64,
    z: f64,
    b: f64,
) -> Result<f64> {
    for (i, c) in family.clusters().iter().enumerate() {
        if c.overlaps(gamma) {
            return Err(Error::Domain(format!(
                "external configuration shares a point with cluster {i}"
            )));
        }
    }
    kernel_t_points(family, gamma.points(), pot, beta, z, b)
}

/// T with external points given directly (quadrature nodes).
pub fn kernel_t_points(
    family: &ClusterFamily,
    gamma_positions: &[Vec<f64>],
    pot: &PairPotential,
    beta: f64,
    z: f64,
    b: f64,
) -> Result<f64> {
    run_kernel(family, gamma_positions, |pos| t_evaluator(pos, pot, beta, z, b))
}

/// The dominating kernel Q with abstract parameters `(h, nu)`.
pub fn kernel_q(
    family: &ClusterFamily,
    gamma: &PointConfiguration,
    h: f64,
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    kernel_q_points(family, gamma.points(), h, nu)
}

/// Q with external points given directly.
pub fn kernel_q_points(
    family: &ClusterFamily,
    gamma_positions: &[Vec<f64>],
    h: f64,
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    run_kernel(family, gamma_positions, |pos| q_evaluator(pos, h, nu))
}

/// `|T|` against the dominating `Q` evaluated with `h = z e^{2 beta B}` and
/// `nu = |mayer factor|`; `ok` when `|T| <= Q` up to roundoff.
pub fn compare_t_q(
    family: &ClusterFamily,
    gamma: &PointConfiguration,
    pot: &PairPotential,
    beta: f64,
    z: f64,
    b: f64,
) -> Result<(f64, f64, bool)> {
    let t = kernel_t(family, gamma, pot, beta, z, b)?;
    let h = z * (2.0 * beta * b).exp();
    let nu = |x: &[f64], y: &[f64]| {
        mayer_factor(pot, beta, crate::configurations::distance(x, y))
            .map(f64::abs)
            .unwrap_or(1.0)
    };
    let q = kernel_q(family, gamma, h, &nu)?;
    let ok = t.abs() <= q * (1.0 + 1e-12) + 1e-300;
    Ok((t.abs(), q, ok))
}

/// `Q(...|n)`: the integral of Q over `n` external points ranging over the
/// box. Returns the value and the quadrature error estimate.
pub fn integrated_q(
    family: &ClusterFamily,
    n: usize,
    h: f64,
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
    cutoff: &VolumeCutoff,
    spec: QuadratureSpec,
    n_cap: usize,
) -> Result<(f64, f64)> {
    if n > n_cap {
        return Err(Error::Resource(format!(
            "{n} integrated external points, above the cap of {n_cap}"
        )));
    }
    let d = cutoff.dim();
    let mut failure = None;
    let (value, err) = integrate_n(&cutoff.lo, &cutoff.hi, n, spec, &mut |flat| {
        let pts: Vec<Vec<f64>> = flat.chunks(d).map(|c| c.to_vec()).collect();
        match kernel_q_points(family, &pts, h, nu) {
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
    Ok((value, err))
}

/// Restricted forest sum used by the integrated-kernel decomposition: sum
/// over admissible forests in which every external vertex has degree at
/// least two, of the plain edge-weight product (no `h` powers).
pub fn restricted_forest_sum(
    family: &ClusterFamily,
    gamma_positions: &[Vec<f64>],
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
    cap: usize,
) -> Result<f64> {
    use crate::forests::walk_forests;
    let sizes = family.sizes();
    let l: usize = sizes.iter().sum();
    let n = gamma_positions.len();
    let mut positions = Vec::new();
    for c in family.clusters() {
        positions.extend(c.points().iter().cloned());
    }
    positions.extend(gamma_positions.iter().cloned());
    let mut total = 0.0;
    walk_forests(&sizes, n, cap, &mut |edges| {
        // external vertices occupy indices l..l+n
        let mut deg = vec![0usize; l + n];
        for &(a, b) in edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        if (l..l + n).any(|v| deg[v] < 2) {
            return;
        }
        let mut term = 1.0;
        for &(a, b) in edges {
            term *= nu(&positions[a], &positions[b]);
        }
        total += term;
    })?;
    Ok(total)
}

/// Chain kernel: `h^k` times the integral over `k` intermediate points of
/// the path weights from `x` ending in the fan kernel of the target
/// cluster. `k = 0` is the fan kernel itself.
pub fn chain_kernel(
    x: &[f64],
    target: &PointConfiguration,
    k: usize,
    h: f64,
    nu: &dyn Fn(&[f64], &[f64]) -> f64,
    cutoff: &VolumeCutoff,
    spec: QuadratureSpec,
) -> Result<(f64, f64)> {
    if target.is_empty() {
        return Err(Error::Domain("chain kernel needs a nonempty target cluster".into()));
    }
    if k > 2 {
        return Err(Error::Resource(format!(
            "chain kernels computed by quadrature only up to k = 2, got {k}"
        )));
    }
    if k == 0 {
        return Ok((fan_kernel_k0(x, std::slice::from_ref(target), nu)?, 0.0));
    }
    let d = cutoff.dim();
    let mut failure = None;
    let (value, err) = integrate_n(&cutoff.lo, &cutoff.hi, k, spec, &mut |flat| {
        let ys: Vec<&[f64]> = flat.chunks(d).collect();
        let mut acc = nu(x, ys[0]);
        for r in 0..k - 1 {
            acc *= nu(ys[r], ys[r + 1]);
        }
        match fan_kernel_k0(ys[k - 1], std::slice::from_ref(target), nu) {
            Ok(f) => acc * f,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((h.powi(k as i32) * value, h.powi(k as i32) * err))
}
