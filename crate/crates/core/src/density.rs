//! Seip-type densities of a point set and the equivalent conditions on
//! `k_Z`: the point-count density `D+`, the circle mean of `k_Z`, the
//! Laplacian form weighted by `log(r^2 / |z|^2)`, and the invariant
//! smoothing `phi*` of `phi = log 1/(1-|z|^2) - p k_Z`.
//!
//! With `lap = d dbar`, Green's formula reads
//! `(1/2pi) int k(r e^{it}) dt = (1/pi) int_{|z|<r} lap k log(r^2/|z|^2) dA`
//! for `k(0) = 0`, so both criteria compare the same numbers.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geometry::{moebius, PointSet};
use crate::quad::{pairwise_sum, DiskGrid, GaussRule};
use crate::weights::WeightEval;
use crate::C64;

fn check_radius(r: f64) -> Result<()> {
    ensure!(r > 0.0 && r < 1.0, Error::Parameter(format!("radius {r} not in (0,1)")));
    Ok(())
}

/// `log 1/(1 - r^2)`.
pub fn log_denominator(r: f64) -> f64 {
    -(-r * r).ln_1p()
}

/// `sum_{a in Z, |a| < r} (1 - |a|^2) / 2`.
pub fn count_numerator(z_set: &PointSet<f64>, r: f64) -> f64 {
    let terms: Vec<f64> =
        z_set.iter().filter(|(a, _)| a.norm() < r).map(|(a, m)| m as f64 * (1.0 - a.norm_sqr()) / 2.0).collect();
    pairwise_sum(&terms)
}

/// `max_b [sum_{a in M_b(Z), |a| < r} (1 - |a|^2)/2] / log 1/(1 - r^2)` over
/// the given centers.
pub fn dplus(z_set: &PointSet<f64>, r: f64, centers: &[C64]) -> Result<f64> {
    check_radius(r)?;
    let den = log_denominator(r);
    Ok(centers.par_iter().map(|&b| count_numerator(&z_set.moebius_image(b), r) / den).reduce(|| 0.0, f64::max))
}

/// The logarithmic form
/// `max_b [sum_{a in M_b(Z), 1/2 < |a| < r} log 1/|a|] / log 1/(1 - r)`.
pub fn dplus_log_count(z_set: &PointSet<f64>, r: f64, centers: &[C64]) -> Result<f64> {
    check_radius(r)?;
    let den = -(-r).ln_1p();
    Ok(centers
        .par_iter()
        .map(|&b| {
            let terms: Vec<f64> = z_set
                .moebius_image(b)
                .iter()
                .filter(|(a, _)| a.norm() > 0.5 && a.norm() < r)
                .map(|(a, m)| -(m as f64) * a.norm().ln())
                .collect();
            pairwise_sum(&terms) / den
        })
        .reduce(|| 0.0, f64::max))
}

/// `(1/2pi) int k_Z(r e^{it}) dt = (r^2/2) sum (1-|a|^2)^2 / (1 - |a|^2 r^2)`.
pub fn splus_circle_mean(z_set: &PointSet<f64>, r: f64) -> Result<f64> {
    check_radius(r)?;
    let terms: Vec<f64> = z_set
        .iter()
        .map(|(a, m)| {
            let s = a.norm_sqr();
            m as f64 * (1.0 - s) * (1.0 - s) / (1.0 - s * r * r)
        })
        .collect();
    Ok(r * r / 2.0 * pairwise_sum(&terms))
}

/// The same circle mean by the `n`-point trapezoid rule.
pub fn circle_mean_quadrature(z_set: &PointSet<f64>, r: f64, n: usize) -> f64 {
    let w = WeightEval::new(z_set);
    let vals: Vec<f64> = (0..n).map(|j| w.k(C64::from_polar(r, 2.0 * PI * j as f64 / n as f64))).collect();
    pairwise_sum(&vals) / n as f64
}

/// `1 - p max_w S(M_w(Z), r) / log 1/(1 - r^2)`; positive when the
/// circle-mean criterion holds at `r` for these centers.
pub fn seip_criterion_means(z_set: &PointSet<f64>, p: f64, r: f64, centers: &[C64]) -> Result<f64> {
    check_radius(r)?;
    ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
    let worst = centers
        .par_iter()
        .map(|&w| splus_circle_mean(&z_set.moebius_image(w), r))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(1.0 - p * worst / log_denominator(r))
}

/// Polar rule on `{|z| < r}` for integrands with a `log(r^2/|z|^2)` factor:
/// `rho = r t^2` with Gauss points in `t` and the trapezoid rule in angle.
#[derive(Clone, Debug)]
pub struct LogDiskRule {
    pub r: f64,
    nodes: Vec<C64>,
    /// Area weight times `log(r^2 / |z|^2)`.
    weights: Vec<f64>,
}

impl LogDiskRule {
    pub fn new(r: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        check_radius(r)?;
        let g = GaussRule::new(n_radial);
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        let dt = 2.0 * PI / n_angular as f64;
        for (&t, &w) in g.nodes.iter().zip(&g.weights) {
            let rho = r * t * t;
            // dA = rho drho dtheta, drho = 2 r t dt
            let radial = w * rho * 2.0 * r * t * (-4.0 * t.ln());
            for k in 0..n_angular {
                nodes.push(C64::from_polar(rho, dt * (k as f64 + 0.5)));
                weights.push(radial * dt);
            }
        }
        Ok(LogDiskRule { r, nodes, weights })
    }

    /// `int_{|z|<r} f(z) log(r^2/|z|^2) dA(z)`.
    pub fn integrate(&self, f: impl Fn(C64) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).collect();
        pairwise_sum(&terms)
    }
}

pub const LOG_RULE_RADIAL: usize = 64;
pub const LOG_RULE_ANGULAR: usize = 256;

/// Both sides of the Laplacian criterion at one center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceSides {
    /// `p int lap k_{M_w(Z)} log(r^2/|z|^2) dA`.
    pub lhs: f64,
    /// `int (1-|z|^2)^{-2} log(r^2/|z|^2) dA`.
    pub rhs: f64,
}

pub fn laplace_sides(z_set: &PointSet<f64>, p: f64, rstar: f64, w: C64, rule: &LogDiskRule) -> Result<LaplaceSides> {
    check_radius(rstar)?;
    ensure!((rule.r - rstar).abs() < 1e-15, Error::Parameter("rule radius differs from r*".into()));
    let weight = WeightEval::new(&z_set.moebius_image(w));
    let lhs = p * rule.integrate(|z| weight.lap_k(z));
    let rhs = rule.integrate(|z| 1.0 / (1.0 - z.norm_sqr()).powi(2));
    Ok(LaplaceSides { lhs, rhs })
}

/// `1 - max_w LHS_w / RHS` for the Laplacian criterion, both sides by
/// quadrature.
pub fn seip_criterion_laplace(z_set: &PointSet<f64>, p: f64, rstar: f64, centers: &[C64]) -> Result<f64> {
    ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
    let rule = LogDiskRule::new(rstar, LOG_RULE_RADIAL, LOG_RULE_ANGULAR)?;
    let sides = centers.par_iter().map(|&w| laplace_sides(z_set, p, rstar, w, &rule)).collect::<Result<Vec<_>>>()?;
    let worst = sides.iter().map(|s| s.lhs / s.rhs).fold(0.0, f64::max);
    Ok(1.0 - worst)
}

/// One row of a density report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub r: f64,
    pub center_id: usize,
    /// `sum_{|a| < r} (1 - |a|^2) / 2` over `M_b(Z)`.
    pub numerator: f64,
    /// `log 1/(1 - r^2)`.
    pub denominator: f64,
    pub value: f64,
    /// `1 - p S(M_b(Z), r) / log 1/(1 - r^2)`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub p: f64,
    pub radii: Vec<f64>,
    pub centers: Vec<C64>,
    pub rows: Vec<DensityRow>,
    /// `max_b` of the point-count density at each radius.
    pub dplus: Vec<f64>,
    /// The same with the logarithmic numerator.
    pub dplus_log: Vec<f64>,
    /// Circle-mean criterion margin at each radius.
    pub margin_means: Vec<f64>,
    /// Laplacian criterion margin at each radius.
    pub margin_laplace: Vec<f64>,
    /// `sum_b LHS_b / (pi p sum_b S_b)`: 1 when the Laplacian is normalized as `d dbar`.
    pub lap_multiplier: Vec<f64>,
}

pub fn density_report(z_set: &PointSet<f64>, p: f64, radii: &[f64], centers: &[C64]) -> Result<DensityReport> {
    ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
    ensure!(!centers.is_empty(), Error::TooFewPoints { need: 1, got: 0 });
    let mut rep = DensityReport {
        p,
        radii: radii.to_vec(),
        centers: centers.to_vec(),
        rows: Vec::new(),
        dplus: Vec::new(),
        dplus_log: Vec::new(),
        margin_means: Vec::new(),
        margin_laplace: Vec::new(),
        lap_multiplier: Vec::new(),
    };
    for &r in radii {
        check_radius(r)?;
        let den = log_denominator(r);
        let rule = LogDiskRule::new(r, LOG_RULE_RADIAL, LOG_RULE_ANGULAR)?;
        let mut lhs_sum = 0.0;
        let mut mean_sum = 0.0;
        for (id, &b) in centers.iter().enumerate() {
            let moved = z_set.moebius_image(b);
            let numerator = count_numerator(&moved, r);
            let s = splus_circle_mean(&moved, r)?;
            lhs_sum += laplace_sides(z_set, p, r, b, &rule)?.lhs;
            mean_sum += s;
            rep.rows.push(DensityRow {
                r,
                center_id: id,
                numerator,
                denominator: den,
                value: numerator / den,
                margin: 1.0 - p * s / den,
            });
        }
        rep.dplus.push(dplus(z_set, r, centers)?);
        rep.dplus_log.push(dplus_log_count(z_set, r, centers)?);
        rep.margin_means.push(seip_criterion_means(z_set, p, r, centers)?);
        rep.margin_laplace.push(seip_criterion_laplace(z_set, p, r, centers)?);
        rep.lap_multiplier.push(if mean_sum > 0.0 { lhs_sum / (PI * p * mean_sum) } else { 1.0 });
    }
    Ok(rep)
}

/// `phi = log 1/(1 - |z|^2) - p k_Z` with the smoothing radius `r*`.
#[derive(Clone, Debug)]
pub struct PhiField {
    pub p: f64,
    pub rstar: f64,
    weight: WeightEval<f64>,
    rule: SmoothingRule,
}

/// Nodes `zeta` and weights `log(r*^2/|zeta|^2) dA / (1-|zeta|^2)^2`
/// normalized to total mass 1.
#[derive(Clone, Debug)]
struct SmoothingRule {
    nodes: Vec<C64>,
    weights: Vec<f64>,
}

pub const SMOOTHING_RADIAL: usize = 48;
pub const SMOOTHING_ANGULAR: usize = 96;

impl PhiField {
    pub fn new(z_set: &PointSet<f64>, p: f64, rstar: f64) -> Result<Self> {
        Self::with_rule(z_set, p, rstar, SMOOTHING_RADIAL, SMOOTHING_ANGULAR)
    }

    pub fn with_rule(z_set: &PointSet<f64>, p: f64, rstar: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
        let log_rule = LogDiskRule::new(rstar, n_radial, n_angular)?;
        let norm = PI * log_denominator(rstar);
        let weights = log_rule
            .nodes
            .iter()
            .zip(&log_rule.weights)
            .map(|(z, w)| w / (1.0 - z.norm_sqr()).powi(2) / norm)
            .collect();
        Ok(PhiField {
            p,
            rstar,
            weight: WeightEval::new(z_set),
            rule: SmoothingRule { nodes: log_rule.nodes, weights },
        })
    }

    pub fn phi(&self, z: C64) -> f64 {
        -(-z.norm_sqr()).ln_1p() - self.p * self.weight.k(z)
    }

    /// `(1 - |z|^2)^2 lap phi = 1 - p (1 - |z|^2)^2 lap k_Z`.
    pub fn invariant_lap_phi(&self, z: C64) -> f64 {
        1.0 - self.p * self.weight.invariant_lap_k(z)
    }

    /// `lap phi = (1 - |z|^2)^{-2} - p lap k_Z`.
    pub fn lap_phi(&self, z: C64) -> f64 {
        1.0 / (1.0 - z.norm_sqr()).powi(2) - self.p * self.weight.lap_k(z)
    }

    /// Total mass of the smoothing rule; `1` up to quadrature error.
    pub fn rule_mass(&self) -> f64 {
        pairwise_sum(&self.rule.weights)
    }

    /// `phi*(w)`, the invariant convolution of `phi` with the normalized
    /// kernel `log(r*^2/|z|^2)` on `D(0, r*)`, computed as
    /// `int phi(M_w(zeta)) log(r*^2/|zeta|^2) dlambda(zeta)` over `|zeta| < r*`.
    pub fn phi_star(&self, w: C64) -> Result<f64> {
        ensure!(w.norm() < 1.0, Error::OutsideDisk { re: w.re, im: w.im });
        let terms: Vec<f64> =
            self.rule.nodes.iter().zip(&self.rule.weights).map(|(&z, &c)| c * self.phi(moebius(w, z))).collect();
        Ok(pairwise_sum(&terms))
    }

    /// `(1 - |w|^2)^2 lap phi*(w)` by the five-point stencil of step `h`
    /// (divided by 4 for `lap = d dbar`).
    pub fn invariant_lap_phi_star(&self, w: C64, h: f64) -> Result<f64> {
        let c = self.phi_star(w)?;
        let mut s = -4.0 * c;
        for d in [C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(0.0, h), C64::new(0.0, -h)] {
            s += self.phi_star(w + d)?;
        }
        Ok((1.0 - w.norm_sqr()).powi(2) * s / (4.0 * h * h))
    }
}

/// Extremes of `(1 - |z|^2)^2 lap phi*` over the grid nodes with `|z| <= r_in`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplacianCheck {
    pub min_val: f64,
    pub max_val: f64,
    /// Largest relative change of the extremes when the stencil step is halved.
    pub refinement_change: f64,
    /// `refinement_change > 0.1`.
    pub noisy: bool,
    pub samples: usize,
}

/// Relative stencil step.
pub const LAPLACIAN_STEP: f64 = 2e-2;

pub fn phi_star_laplacian_check(field: &PhiField, grid: &DiskGrid, r_in: f64) -> Result<LaplacianCheck> {
    check_radius(r_in)?;
    let pts: Vec<C64> = grid.nodes.iter().copied().filter(|z| z.norm() <= r_in).collect();
    ensure!(!pts.is_empty(), Error::Coverage(format!("no grid nodes within {r_in}")));
    let eval = |scale: f64| -> Result<(f64, f64)> {
        let vals = pts
            .par_iter()
            .map(|&z| field.invariant_lap_phi_star(z, scale * LAPLACIAN_STEP * (1.0 - z.norm_sqr())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
    };
    let (lo, hi) = eval(1.0)?;
    let (lo2, hi2) = eval(0.5)?;
    let change = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-3);
    let refinement_change = change(lo, lo2).max(change(hi, hi2));
    Ok(LaplacianCheck {
        min_val: lo2,
        max_val: hi2,
        refinement_change,
        noisy: refinement_change > 0.1,
        samples: pts.len(),
    })
}

/// `sup |phi* - phi|` over the grid nodes with `|z| <= r_in`.
pub fn phi_star_deviation(field: &PhiField, grid: &DiskGrid, r_in: f64) -> Result<f64> {
    check_radius(r_in)?;
    let vals = grid
        .nodes
        .par_iter()
        .filter(|z| z.norm() <= r_in)
        .map(|&z| Ok((field.phi_star(z)? - field.phi(z)).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `min_b int_{D(b, r*)} lap phi dA`, integrating over `|zeta| < r*` after
/// `z = M_b(zeta)`, `dA(z) = (1-|b|^2)^2 / |1 - conj(b) zeta|^4 dA(zeta)`.
pub fn ortega_condition(
    field: &PhiField,
    rstar: f64,
    centers: &[C64],
    n_radial: usize,
    n_angular: usize,
) -> Result<f64> {
    check_radius(rstar)?;
    ensure!(!centers.is_empty(), Error::TooFewPoints { need: 1, got: 0 });
    let g = GaussRule::new(n_radial);
    let dt = 2.0 * PI / n_angular as f64;
    let masses = centers
        .par_iter()
        .map(|&b| {
            ensure!(b.norm() < 1.0, Error::OutsideDisk { re: b.re, im: b.im });
            let mut terms = Vec::with_capacity(n_radial * n_angular);
            for (&x, &w) in g.nodes.iter().zip(&g.weights) {
                let rho = rstar * x;
                for k in 0..n_angular {
                    let zeta = C64::from_polar(rho, dt * (k as f64 + 0.5));
                    let jac = (1.0 - b.norm_sqr()).powi(2) / (1.0 - b.conj() * zeta).norm_sqr().powi(2);
                    terms.push(w * rstar * rho * dt * jac * field.lap_phi(moebius(b, zeta)));
                }
            }
            Ok(pairwise_sum(&terms))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(masses.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_net;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn origin() -> Vec<C64> {
        vec![c(0.0, 0.0)]
    }

    #[test]
    fn empty_set_examples() {
        let e = PointSet::empty();
        assert_eq!(dplus(&e, 0.9, &origin()).unwrap(), 0.0);
        assert_eq!(splus_circle_mean(&e, 0.5).unwrap(), 0.0);
        assert_eq!(seip_criterion_means(&e, 2.0, 0.9, &origin()).unwrap(), 1.0);
        assert_eq!(seip_criterion_laplace(&e, 2.0, 0.9, &origin()).unwrap(), 1.0);
    }

    #[test]
    fn circle_mean_of_the_origin() {
        let z = PointSet::from_complex(&[c(0.0, 0.0)]).unwrap();
        assert!((splus_circle_mean(&z, 0.6).unwrap() - 0.18).abs() < 1e-15);
    }

    #[test]
    fn circle_mean_closed_form_matches_trapezoid() {
        let z = build_net(0.4, 0.9).unwrap().centers;
        for r in [0.3, 0.7, 0.95] {
            let exact = splus_circle_mean(&z, r).unwrap();
            let quad = circle_mean_quadrature(&z, r, 4096);
            assert!((exact - quad).abs() <= 1e-8 * exact.max(1.0), "{r}: {exact} vs {quad}");
        }
    }

    #[test]
    fn finite_sets_have_vanishing_density() {
        let z = build_net(0.4, 0.8).unwrap().centers;
        let d: Vec<f64> = [0.9, 0.99, 0.999].iter().map(|&r| dplus(&z, r, &origin()).unwrap()).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    #[test]
    fn center_invariance() {
        let z = build_net(0.4, 0.8).unwrap().centers;
        let b = c(0.3, -0.2);
        let lhs = dplus(&z.moebius_image(b), 0.95, &origin()).unwrap();
        let rhs = dplus(&z, 0.95, &[b]).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn log_count_form_tracks_the_other() {
        let z = build_net(0.3, 0.995).unwrap().centers;
        let a = dplus(&z, 0.99, &origin()).unwrap();
        let b = dplus_log_count(&z, 0.99, &origin()).unwrap();
        assert!(a > 0.0 && b > 0.0 && (a - b).abs() < a.max(b), "{a} {b}");
    }

    #[test]
    fn laplace_form_of_the_origin() {
        // lap k_{0} = 1/2 and int_{|z|<r} log(r^2/|z|^2) dA = pi r^2
        let z = PointSet::from_complex(&[c(0.0, 0.0)]).unwrap();
        let r = 0.3;
        let rule = LogDiskRule::new(r, LOG_RULE_RADIAL, LOG_RULE_ANGULAR).unwrap();
        let s = laplace_sides(&z, 2.0, r, c(0.0, 0.0), &rule).unwrap();
        assert!((s.lhs - PI * r * r).abs() < 1e-6, "{}", s.lhs);
        assert!((s.rhs - PI * log_denominator(r)).abs() < 1e-6, "{}", s.rhs);
    }

    #[test]
    fn green_identity_holds_for_a_net() {
        let z = build_net(0.5, 0.9).unwrap().centers;
        let r = 0.8;
        let rule = LogDiskRule::new(r, LOG_RULE_RADIAL, LOG_RULE_ANGULAR).unwrap();
        for w in [c(0.0, 0.0), c(0.2, 0.4)] {
            let s = laplace_sides(&z, 1.0, r, w, &rule).unwrap();
            let mean = splus_circle_mean(&z.moebius_image(w), r).unwrap();
            assert!((s.lhs / (PI * mean) - 1.0).abs() < 1e-6, "{} vs {}", s.lhs, PI * mean);
        }
    }

    proptest! {
        #[test]
        fn means_margin_decreases_in_p(p in 0.5f64..4.0, dp in 0.1f64..2.0) {
            let z = build_net(0.5, 0.8).unwrap().centers;
            let m1 = seip_criterion_means(&z, p, 0.9, &origin()).unwrap();
            let m2 = seip_criterion_means(&z, p + dp, 0.9, &origin()).unwrap();
            prop_assert!(m2 < m1);
        }
    }

    #[test]
    fn smoothing_of_constants_is_exact() {
        let field = PhiField::new(&PointSet::empty(), 2.0, 0.5).unwrap();
        assert!((field.rule_mass() - 1.0).abs() < 1e-10, "{}", field.rule_mass());
    }

    #[test]
    fn phi_star_at_the_origin_matches_radial_integral() {
        let r: f64 = 0.5;
        let field = PhiField::new(&PointSet::empty(), 2.0, r).unwrap();
        // (1/(pi L)) int_0^r 2 pi rho log(1/(1-rho^2)) log(r^2/rho^2) / (1-rho^2)^2 drho
        let f = |rho: f64| {
            if rho <= 0.0 {
                return 0.0;
            }
            2.0 * rho * (-(-rho * rho).ln_1p()) * (r * r / (rho * rho)).ln() / (1.0 - rho * rho).powi(2)
        };
        let oracle = crate::quad::adaptive_integrate(f, 0.0, r, 1e-13, 0.0) / log_denominator(r);
        let got = field.phi_star(c(0.0, 0.0)).unwrap();
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
    }

    #[test]
    fn invariant_laplacian_without_points_is_one() {
        let field = PhiField::new(&PointSet::empty(), 2.0, 0.5).unwrap();
        let grid = DiskGrid::build(0.9, 4, &[]).unwrap();
        let chk = phi_star_laplacian_check(&field, &grid, 0.8).unwrap();
        assert!((chk.min_val - 1.0).abs() < 0.02 && (chk.max_val - 1.0).abs() < 0.02, "{chk:?}");
        assert!(!chk.noisy);
    }

    #[test]
    fn ortega_mass_without_points_is_invariant() {
        let field = PhiField::new(&PointSet::empty(), 2.0, 0.5).unwrap();
        let exact = PI * 0.25 / 0.75;
        for b in [c(0.0, 0.0), c(0.5, 0.3), c(-0.9, 0.0)] {
            let m = ortega_condition(&field, 0.5, &[b], 48, 128).unwrap();
            assert!((m - exact).abs() < 1e-6, "{b}: {m} vs {exact}");
        }
    }

    #[test]
    fn overdense_sets_fail_every_form() {
        let z = build_net(0.15, 0.9).unwrap().centers;
        let centers = origin();
        assert!(seip_criterion_means(&z, 2.0, 0.5, &centers).unwrap() < 0.0);
        assert!(seip_criterion_laplace(&z, 2.0, 0.5, &centers).unwrap() < 0.0);
        let field = PhiField::new(&z, 2.0, 0.5).unwrap();
        assert!(ortega_condition(&field, 0.5, &centers, 32, 64).unwrap() < 0.0);
    }
}
