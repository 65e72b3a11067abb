//! Radial pair potentials with hard cores, their Mayer factors, and the
//! derived scalars (stability constant, sup and integral norms of the Mayer
//! factor, polynomial-decay domination).
//!
//! Infinity is a first-class value: a hard core evaluates to `f64::INFINITY`
//! and `exp(-beta * inf)` is exactly zero, so Mayer factors inside a core are
//! exactly -1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_trapezoid;

/// Radial profile of a pair interaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "family")]
pub enum Kind {
    /// `phi0 (r0/r)^6 ((r0/r)^6 - 1)`: repulsive core, attractive well.
    LennardJones { phi0: f64, r0: f64 },
    /// Hard core below `r1`, repulsive power piece on `[r1, r0]`, attractive
    /// polynomial tail `-phi2 * ramp * r^(-d-eps0)` switched on over
    /// `[r0, r2]`.
    HardCorePowerTail {
        r1: f64,
        r0: f64,
        r2: f64,
        phi1: f64,
        phi2: f64,
        s: f64,
        eps0: f64,
    },
    /// Tabulated radial profile: hard core below `hard_core`, linear
    /// interpolation on the table, zero beyond the last abscissa.
    Custom { hard_core: f64, table: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairPotential {
    pub kind: Kind,
    /// Space dimension.
    pub d: usize,
}

impl PairPotential {
    pub fn new(kind: Kind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        match &kind {
            Kind::LennardJones { phi0, r0 } => {
                if *phi0 <= 0.0 || *r0 <= 0.0 {
                    return Err(Error::Domain("Lennard-Jones needs phi0 > 0 and r0 > 0".into()));
                }
            }
            Kind::HardCorePowerTail { r1, r0, r2, phi1, phi2, s, eps0 } => {
                if !(0.0 < *r1 && r1 < r0 && r0 < r2) {
                    return Err(Error::Domain("need 0 < r1 < r0 < r2".into()));
                }
                if *phi1 < 0.0 || *phi2 < 0.0 {
                    return Err(Error::Domain("phi1 and phi2 must be nonnegative".into()));
                }
                if *s < d as f64 {
                    return Err(Error::Domain(format!("repulsion exponent s = {s} below dimension {d}")));
                }
                if *eps0 <= 0.0 {
                    return Err(Error::Domain("tail exponent eps0 must be positive".into()));
                }
            }
            Kind::Custom { hard_core, table } => {
                if *hard_core < 0.0 {
                    return Err(Error::Domain("hard-core radius must be nonnegative".into()));
                }
                if table.is_empty() {
                    return Err(Error::Domain("tabulated potential needs at least one row".into()));
                }
                if !table.windows(2).all(|w| w[0].0 < w[1].0) {
                    return Err(Error::Domain("table abscissae must be strictly increasing".into()));
                }
                if table[0].0 < *hard_core {
                    return Err(Error::Domain("table starts inside the hard core".into()));
                }
            }
        }
        Ok(PairPotential { kind, d })
    }

    /// Hard rod of diameter `a`: infinite inside, zero outside.
    pub fn hard_rod(a: f64, d: usize) -> Result<Self> {
        PairPotential::new(Kind::Custom { hard_core: a, table: vec![(a, 0.0)] }, d)
    }

    /// Hard-core radius below which the potential is infinite.
    pub fn hard_core_radius(&self) -> f64 {
        match &self.kind {
            Kind::LennardJones { .. } => 0.0,
            Kind::HardCorePowerTail { r1, .. } => *r1,
            Kind::Custom { hard_core, .. } => *hard_core,
        }
    }

    /// `phi(r)`; `+infinity` at `r = 0` and inside a hard core.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::Domain(format!("negative separation {r}")));
        }
        if r == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(match &self.kind {
            Kind::LennardJones { phi0, r0 } => {
                let u = (r0 / r).powi(6);
                phi0 * u * (u - 1.0)
            }
            Kind::HardCorePowerTail { r1, r0, r2, phi1, phi2, s, eps0 } => {
                if r < *r1 {
                    f64::INFINITY
                } else if r <= *r0 {
                    2.0 * phi1 * (r.powf(-s) - r0.powf(-s))
                } else {
                    let t = ((r - r0) / (r2 - r0)).clamp(0.0, 1.0);
                    -phi2 * t * r.powf(-(self.d as f64) - eps0)
                }
            }
            Kind::Custom { hard_core, table } => {
                if r < *hard_core {
                    f64::INFINITY
                } else if r <= table[0].0 {
                    table[0].1
                } else if r >= table[table.len() - 1].0 {
                    0.0
                } else {
                    let j = table.partition_point(|row| row.0 <= r);
                    let (ra, va) = table[j - 1];
                    let (rb, vb) = table[j];
                    va + (vb - va) * (r - ra) / (rb - ra)
                }
            }
        })
    }

    /// Positive part, `max(phi, 0)`.
    pub fn positive_part(&self, r: f64) -> Result<f64> {
        Ok(self.evaluate(r)?.max(0.0))
    }

    /// Negative part, `max(-phi, 0)`, so that `phi = phi+ - phi-`.
    pub fn negative_part(&self, r: f64) -> Result<f64> {
        let v = self.evaluate(r)?;
        Ok(if v.is_finite() { (-v).max(0.0) } else { 0.0 })
    }

    /// True when `phi >= 0` everywhere, which makes `B = 0` a valid
    /// stability constant.
    pub fn is_repulsive(&self) -> bool {
        match &self.kind {
            Kind::LennardJones { .. } => false,
            Kind::HardCorePowerTail { phi2, .. } => *phi2 == 0.0,
            Kind::Custom { table, .. } => table.iter().all(|row| row.1 >= 0.0),
        }
    }
}

/// Mayer factor `e^{-beta phi(r)} - 1`; exactly `-1` inside a hard core.
pub fn mayer_factor(pot: &PairPotential, beta: f64, r: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::Domain(format!("inverse temperature must be positive, got {beta}")));
    }
    Ok((-beta * pot.evaluate(r)?).exp() - 1.0)
}

/// Surface area of the unit sphere in `R^d` for d in {1, 2, 3}.
pub fn sphere_surface(d: usize) -> Result<f64> {
    match d {
        1 => Ok(2.0),
        2 => Ok(2.0 * std::f64::consts::PI),
        3 => Ok(4.0 * std::f64::consts::PI),
        _ => Err(Error::Domain(format!("dimension {d} not supported"))),
    }
}

/// Volume of the ball of radius `r` in `R^d`.
pub fn ball_volume(d: usize, r: f64) -> Result<f64> {
    Ok(sphere_surface(d)? * r.powi(d as i32) / d as f64)
}

/// Scalar functionals of a potential at fixed inverse temperature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialSummary {
    pub beta: f64,
    /// Stability constant: `U(eta) >= -B |eta|`. Zero is valid for
    /// repulsive potentials; otherwise user-supplied.
    pub stability_b: f64,
    /// Sup norm of the Mayer factor.
    pub nu0: f64,
    /// Integral of `|e^{-beta phi} - 1|` over `R^d`.
    pub nu1: f64,
    /// `(c, alpha)` such that `|e^{-beta phi(|x|)} - 1| <= c / (1 + |x|^alpha)`
    /// on the validation grid, when requested and satisfied.
    pub polydecay: Option<(f64, f64)>,
}

const RADIAL_REL_TOL: f64 = 1e-9;

fn tail_is_zero(pot: &PairPotential) -> Option<f64> {
    match &pot.kind {
        Kind::Custom { table, .. } => Some(table[table.len() - 1].0),
        _ => None,
    }
}

fn nu1_radial(pot: &PairPotential, beta: f64) -> Result<f64> {
    let d = pot.d;
    let a = pot.hard_core_radius();
    // inside the core the integrand is exactly 1
    let mut total = ball_volume(d, a)?;
    let f = |r: f64| {
        let m = mayer_factor(pot, beta, r.max(1e-300)).unwrap_or(-1.0).abs();
        m * r.powi(d as i32 - 1)
    };
    let surface = sphere_surface(d)?;
    match tail_is_zero(pot) {
        Some(end) => {
            if end > a {
                total += surface * adaptive_trapezoid(a, end, RADIAL_REL_TOL, &f)?;
            }
        }
        None => {
            // grow the outer radius until the shell contribution is negligible
            let scale = match &pot.kind {
                Kind::LennardJones { r0, .. } => *r0,
                Kind::HardCorePowerTail { r2, .. } => *r2,
                Kind::Custom { .. } => unreachable!(),
            };
            let mut lo = a;
            let mut hi = (4.0 * scale).max(a + scale);
            let mut grown = 0usize;
            loop {
                let piece = surface * adaptive_trapezoid(lo, hi, RADIAL_REL_TOL, &f)?;
                total += piece;
                if piece.abs() <= RADIAL_REL_TOL * total.abs().max(1e-300) && grown > 0 {
                    break;
                }
                grown += 1;
                if grown > 40 {
                    return Err(Error::Regularity(
                        "Mayer-factor tail does not appear integrable".into(),
                    ));
                }
                lo = hi;
                hi *= 2.0;
            }
        }
    }
    Ok(total)
}

fn nu0_sup(pot: &PairPotential, beta: f64) -> Result<f64> {
    let a = pot.hard_core_radius();
    let mut best = if a > 0.0 { 1.0 } else { 0.0 };
    let scale = match &pot.kind {
        Kind::LennardJones { r0, .. } => *r0,
        Kind::HardCorePowerTail { r2, .. } => *r2,
        Kind::Custom { table, .. } => table[table.len() - 1].0.max(a).max(1.0),
    };
    let mut lo = a.max(1e-9 * scale);
    let mut hi = 8.0 * scale;
    let mut arg = lo;
    // coarse scan, then zoom around the best abscissa
    for _ in 0..6 {
        let n = 4000;
        for i in 0..=n {
            let r = lo + (hi - lo) * i as f64 / n as f64;
            let v = mayer_factor(pot, beta, r)?.abs();
            if v > best {
                best = v;
                arg = r;
            }
        }
        let w = (hi - lo) / n as f64;
        lo = (arg - 2.0 * w).max(a.max(1e-12 * scale));
        hi = arg + 2.0 * w;
    }
    Ok(best)
}

/// Smallest `c` with `|mayer(r)| <= c / (1 + r^alpha)` on a dense grid, or an
/// error when the tail decays too slowly for any finite `c`.
pub fn polydecay_constant(pot: &PairPotential, beta: f64, alpha: f64) -> Result<f64> {
    if alpha <= pot.d as f64 {
        return Err(Error::Domain(format!(
            "decay exponent alpha = {alpha} must exceed dimension {}",
            pot.d
        )));
    }
    if let Kind::HardCorePowerTail { eps0, .. } = &pot.kind {
        if alpha > pot.d as f64 + eps0 {
            return Err(Error::Regularity(format!(
                "tail decays like r^-(d+eps0) with eps0 = {eps0}; cannot dominate with alpha = {alpha}"
            )));
        }
    }
    let a = pot.hard_core_radius();
    let scale = match &pot.kind {
        Kind::LennardJones { r0, .. } => *r0,
        Kind::HardCorePowerTail { r2, .. } => *r2,
        Kind::Custom { table, .. } => table[table.len() - 1].0.max(1.0),
    };
    let mut c: f64 = if a > 0.0 { 1.0 + a.powf(alpha) } else { 0.0 };
    let n = 20000;
    let r_max = 50.0 * scale;
    for i in 1..=n {
        // log-spaced grid from well inside scale out to the far tail
        let t = i as f64 / n as f64;
        let r = 1e-3 * scale * (r_max / (1e-3 * scale)).powf(t);
        if r <= a {
            continue;
        }
        let need = mayer_factor(pot, beta, r)?.abs() * (1.0 + r.powf(alpha));
        c = c.max(need);
    }
    Ok(c)
}

/// Compute the scalar summary. `stability_b` must be supplied for potentials
/// with an attractive part; `None` is accepted only for repulsive ones
/// (where 0 is valid). `polydecay_alpha` requests a domination constant.
pub fn compute_summary(
    pot: &PairPotential,
    beta: f64,
    stability_b: Option<f64>,
    polydecay_alpha: Option<f64>,
) -> Result<PotentialSummary> {
    if beta <= 0.0 {
        return Err(Error::Domain(format!("inverse temperature must be positive, got {beta}")));
    }
    let stability_b = match stability_b {
        Some(b) => {
            if b < 0.0 {
                return Err(Error::Domain("stability constant must be nonnegative".into()));
            }
            b
        }
        None => {
            if pot.is_repulsive() {
                0.0
            } else {
                return Err(Error::Inconsistency(
                    "potential has an attractive part; a stability constant must be supplied".into(),
                ));
            }
        }
    };
    let nu1 = nu1_radial(pot, beta)?;
    let nu0 = nu0_sup(pot, beta)?;
    let polydecay = match polydecay_alpha {
        Some(alpha) => Some((polydecay_constant(pot, beta, alpha)?, alpha)),
        None => None,
    };
    Ok(PotentialSummary { beta, stability_b, nu0, nu1, polydecay })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lj() -> PairPotential {
        PairPotential::new(Kind::LennardJones { phi0: 1.0, r0: 1.0 }, 1).unwrap()
    }

    #[test]
    fn lj_zero_at_r0() {
        assert_eq!(lj().evaluate(1.0).unwrap(), 0.0);
    }

    #[test]
    fn origin_is_infinite() {
        assert_eq!(lj().evaluate(0.0).unwrap(), f64::INFINITY);
        let rod = PairPotential::hard_rod(0.5, 1).unwrap();
        assert_eq!(rod.evaluate(0.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn lj_at_two() {
        // (1/64)(1/64 - 1) = -63/4096
        let v = lj().evaluate(2.0).unwrap();
        assert!((v - (-63.0 / 4096.0)).abs() < 1e-15);
    }

    #[test]
    fn negative_r_rejected() {
        assert!(lj().evaluate(-1.0).is_err());
    }

    #[test]
    fn mayer_inside_core_is_exactly_minus_one() {
        let rod = PairPotential::hard_rod(0.5, 1).unwrap();
        assert_eq!(mayer_factor(&rod, 1.0, 0.2).unwrap(), -1.0);
        assert_eq!(mayer_factor(&rod, 1.0, 0.0).unwrap(), -1.0);
    }

    #[test]
    fn mayer_zero_where_phi_zero() {
        assert_eq!(mayer_factor(&lj(), 1.0, 1.0).unwrap(), 0.0);
        let rod = PairPotential::hard_rod(0.5, 1).unwrap();
        assert_eq!(mayer_factor(&rod, 1.0, 0.8).unwrap(), 0.0);
    }

    #[test]
    fn mayer_lower_bound() {
        for &r in &[0.1, 0.5, 0.9, 1.1, 2.0, 5.0] {
            assert!(mayer_factor(&lj(), 0.7, r).unwrap() >= -1.0);
        }
    }

    #[test]
    fn hard_rod_summary_exact() {
        let rod = PairPotential::hard_rod(0.5, 1).unwrap();
        let s = compute_summary(&rod, 1.0, None, None).unwrap();
        assert!((s.nu1 - 1.0).abs() < 1e-12); // 2a with a = 0.5
        assert_eq!(s.nu0, 1.0);
        assert_eq!(s.stability_b, 0.0);
    }

    #[test]
    fn lj_nu1_matches_fine_grid_oracle() {
        let pot = lj();
        let beta = 0.5;
        let s = compute_summary(&pot, beta, Some(1.0), None).unwrap();
        // independent fine trapezoid on [0, 40] (integrand is 1 near 0)
        let n = 400_000;
        let hi = 40.0;
        let h = hi / n as f64;
        let f = |r: f64| mayer_factor(&pot, beta, r).unwrap().abs();
        let mut oracle = 0.5 * (f(1e-12) + f(hi));
        for i in 1..n {
            oracle += f(i as f64 * h);
        }
        oracle *= 2.0 * h; // both half-lines in d=1
        assert!(
            (s.nu1 - oracle).abs() <= 1e-6 * oracle,
            "nu1 = {}, oracle = {}",
            s.nu1,
            oracle
        );
    }

    #[test]
    fn nu1_monotone_in_beta_for_repulsive() {
        let pot = PairPotential::new(
            Kind::HardCorePowerTail {
                r1: 0.5,
                r0: 1.0,
                r2: 2.0,
                phi1: 1.0,
                phi2: 0.0,
                s: 3.0,
                eps0: 1.0,
            },
            1,
        )
        .unwrap();
        let mut prev = 0.0;
        for &beta in &[0.5, 1.0, 2.0, 4.0] {
            let s = compute_summary(&pot, beta, None, None).unwrap();
            assert!(s.nu1 >= prev);
            prev = s.nu1;
        }
    }

    #[test]
    fn hcpt_assumption_envelopes() {
        let pot = PairPotential::new(
            Kind::HardCorePowerTail {
                r1: 0.5,
                r0: 0.7,
                r2: 1.0,
                phi1: 0.3,
                phi2: 0.1,
                s: 1.0,
                eps0: 1.0,
            },
            1,
        )
        .unwrap();
        // log-spaced checks of the assumption envelopes
        for i in 0..200 {
            let r = 0.01 * (1.06f64).powi(i);
            if r < 0.5 {
                assert!(pot.positive_part(r).unwrap() >= 0.3 * r.powf(-1.0) || !pot.evaluate(r).unwrap().is_finite());
            }
            if r > 1.0 {
                assert!(pot.negative_part(r).unwrap() <= 0.1 * r.powf(-2.0) + 1e-15);
            }
        }
    }

    #[test]
    fn polydecay_dominates_on_grid() {
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
        let c = polydecay_constant(&pot, beta, 2.0).unwrap();
        for i in 0..300 {
            let r = 0.05 * (1.05f64).powi(i);
            let lhs = mayer_factor(&pot, beta, r).unwrap().abs();
            assert!(lhs <= c / (1.0 + r * r) + 1e-12);
        }
    }

    #[test]
    fn attractive_without_b_is_error() {
        assert!(compute_summary(&lj(), 1.0, None, None).is_err());
    }

    #[test]
    fn custom_interpolation() {
        let pot = PairPotential::new(
            Kind::Custom { hard_core: 0.0, table: vec![(1.0, 2.0), (3.0, 4.0)] },
            1,
        )
        .unwrap();
        assert_eq!(pot.evaluate(2.0).unwrap(), 3.0);
        assert_eq!(pot.evaluate(0.5).unwrap(), 2.0);
        assert_eq!(pot.evaluate(5.0).unwrap(), 0.0);
    }
}
