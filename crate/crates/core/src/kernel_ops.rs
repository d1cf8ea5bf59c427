//! The positive kernels
//!
//! ```text
//! K(z,w) = (1-|z|^2)^a (1-|w|^2)^b / |1 - conj(w) z|^{a+b+2}
//! B(z,w) = (1-|z|^2)^a (1-|w|^2)^b / (|z-w| |1 - conj(w) z|^{a+b+1})
//! ```
//!
//! with Schur-test certificates for `h(z) = (1-|z|^2)^{-alpha}`, direct
//! operator application on a grid, and the discrete `L^p_q` check for `p < 1`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::geometry::{psi, CoveringNet, PseudoDisk};
use crate::quad::{disk_rule, pairwise_sum, radial_kernel_integral, DiskGrid, LocalMeanSpec};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelVariant {
    K,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub a: f64,
    pub b: f64,
    pub variant: KernelVariant,
    /// Kernel power of the solver kernels the spec is attached to.
    pub m: i32,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

impl KernelSpec {
    pub fn new(a: f64, b: f64, variant: KernelVariant, p: f64) -> Self {
        KernelSpec { a, b, variant, m: 2, p, q: 1.0, alpha: 0.0 }
    }

    /// Conjugate exponent `p / (p - 1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// `a > -1/p` and `b > -1/p'` (`b > 0` when `p = 1`).
    pub fn bounded_on_lp(&self) -> bool {
        let b_ok = if self.p == 1.0 { self.b > 0.0 } else { self.b > -1.0 / self.p_conj() };
        self.a > -1.0 / self.p && b_ok
    }

    /// The three conditions for boundedness on `L^p_q` with `p < 1 <= q`:
    /// `a > -1/p`, `b > 2/p - 1/q - 1`, `a + b + 2 > q/p`.
    pub fn plt1_conditions(&self) -> [bool; 3] {
        let (a, b, p, q) = (self.a, self.b, self.p, self.q);
        [a > -1.0 / p, b > 2.0 / p - 1.0 / q - 1.0, a + b + 2.0 > q / p]
    }

    /// Open interval of admissible Schur exponents `alpha`.
    pub fn schur_window(&self) -> (f64, f64) {
        let (a, b, p) = (self.a, self.b, self.p);
        let pc = self.p_conj();
        ((-a / pc).max(-b / p), ((1.0 + b) / pc).min((1.0 + a) / p))
    }
}

pub fn kernel_eval(spec: &KernelSpec, z: C64, w: C64) -> Result<f64> {
    let num = (1.0 - z.norm_sqr()).powf(spec.a) * (1.0 - w.norm_sqr()).powf(spec.b);
    let d = (1.0 - w.conj() * z).norm();
    match spec.variant {
        KernelVariant::K => Ok(num / d.powf(spec.a + spec.b + 2.0)),
        KernelVariant::B => {
            let e = (z - w).norm();
            ensure!(e > 0.0, Error::Parameter("kernel B is singular at z = w".into()));
            Ok(num / (e * d.powf(spec.a + spec.b + 1.0)))
        }
    }
}

#[inline]
fn kernel_unchecked(spec: &KernelSpec, z: C64, w: C64) -> f64 {
    kernel_eval(spec, z, w).unwrap_or(0.0)
}

/// Outcome of a Schur test; failure is reported, not raised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurCertificate {
    pub alpha: f64,
    pub p: f64,
    /// Suprema extrapolated to `rmax -> 1` (the outermost truncated value
    /// when the increments do not shrink).
    pub c1: f64,
    pub c2: f64,
    /// Relative growth of each supremum from the first to the second radius.
    pub growth1: f64,
    pub growth2: f64,
    /// Ratio of successive increments over the three radii.
    pub contraction1: f64,
    pub contraction2: f64,
    pub success: bool,
}

impl SchurCertificate {
    /// `C1^{1/p'} C2^{1/p}`, or the single constant when `p = 1`.
    pub fn norm_bound(&self) -> f64 {
        if self.p == 1.0 {
            self.c1
        } else {
            let pc = self.p / (self.p - 1.0);
            self.c1.powf(1.0 / pc) * self.c2.powf(1.0 / self.p)
        }
    }
}

/// Truncation radii; `1 - r` halves at each step.
pub const SCHUR_RADII: [f64; 3] = [0.99, 0.995, 0.9975];
/// Growth of a supremum between the first two radii that counts as divergence.
pub const SCHUR_GROWTH_LIMIT: f64 = 0.25;

/// `t = 0` and `1 - t = (1 - rmax) 2^{k/2}`, so the sample set moves with
/// the truncation radius.
fn boundary_samples(rmax: f64) -> Vec<f64> {
    let mut ts = vec![0.0];
    let mut k = 1;
    loop {
        let d = (1.0 - rmax) * 2f64.powf(k as f64 / 2.0);
        if d >= 1.0 {
            return ts;
        }
        ts.push(1.0 - d);
        k += 1;
    }
}

/// `sup_t (1-t^2)^{e} int_{|w|<rmax} (1-|w|^2)^beta kernel(t, w) dA(w)`,
/// using that the integral only depends on `|z| = t`.
fn weighted_sup(spec: &KernelSpec, outer_exp: f64, beta: f64, rmax: f64) -> f64 {
    let (power, singular) = match spec.variant {
        KernelVariant::K => (spec.a + spec.b + 2.0, false),
        KernelVariant::B => (spec.a + spec.b + 1.0, true),
    };
    boundary_samples(rmax)
        .par_iter()
        .map(|&t| (1.0 - t * t).powf(outer_exp) * radial_kernel_integral(t, beta, power, singular, rmax, 1e-8))
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Copy)]
struct SupScan {
    value: f64,
    growth: f64,
    contraction: f64,
    stable: bool,
}

fn scan(f: impl Fn(f64) -> f64) -> SupScan {
    let c: Vec<f64> = SCHUR_RADII.iter().map(|&r| f(r)).collect();
    let growth = c[1] / c[0] - 1.0;
    let contraction = (c[2] - c[1]) / (c[1] - c[0]);
    let finite = c.iter().all(|v| v.is_finite() && *v > 0.0) && growth.is_finite();
    let stable = finite && growth < SCHUR_GROWTH_LIMIT && contraction < 1.0;
    let value =
        if stable && contraction > 0.0 { c[2] + (c[2] - c[1]) * contraction / (1.0 - contraction) } else { c[2] };
    SupScan { value, growth, contraction, stable }
}

/// Evaluates both Schur suprema with `h_1 = h_2 = (1-|z|^2)^{-alpha}` over
/// the truncation radii. Success means both are finite, grow by less than
/// [`SCHUR_GROWTH_LIMIT`] between the first two radii, and have shrinking
/// increments.
pub fn schur_certificate(spec: &KernelSpec, alpha: f64) -> Result<SchurCertificate> {
    ensure!(spec.p >= 1.0, Error::Parameter(format!("Schur test needs p >= 1, got {}", spec.p)));
    let (a, b, p) = (spec.a, spec.b, spec.p);
    let (s1, s2) = if p == 1.0 {
        // sup_w int K(z,w) dA(z)
        let s = scan(|r| weighted_sup(&swap(spec), b, a, r));
        (s, s)
    } else {
        let pc = spec.p_conj();
        // int K(z,w) h(w)^{p'} dA(w) <= C1 h(z)^{p'}
        let s1 = scan(|r| weighted_sup(spec, a + alpha * pc, b - alpha * pc, r));
        // int K(z,w) h(z)^p dA(z) <= C2 h(w)^p
        let s2 = scan(|r| weighted_sup(&swap(spec), b + alpha * p, a - alpha * p, r));
        (s1, s2)
    };
    Ok(SchurCertificate {
        alpha,
        p,
        c1: s1.value,
        c2: s2.value,
        growth1: s1.growth,
        growth2: s2.growth,
        contraction1: s1.contraction,
        contraction2: s2.contraction,
        success: s1.stable && s2.stable,
    })
}

fn swap(spec: &KernelSpec) -> KernelSpec {
    KernelSpec { a: spec.b, b: spec.a, ..*spec }
}

/// `Tf(z_i) = sum_j K(z_i, w_j) f_j omega_j` at every grid node (the
/// diagonal is skipped for `B`).
pub fn operator_apply(spec: &KernelSpec, f: &[C64], grid: &DiskGrid) -> Result<Vec<C64>> {
    ensure!(f.len() == grid.len(), Error::Parameter("samples not aligned with grid".into()));
    let support: Vec<(C64, C64)> = grid
        .nodes
        .iter()
        .zip(f)
        .zip(&grid.weights)
        .filter(|((_, v), _)| v.norm() > 0.0)
        .map(|((&w, &v), &om)| (w, v * om))
        .collect();
    let skip_diagonal = spec.variant == KernelVariant::B;
    Ok(grid
        .nodes
        .par_iter()
        .map(|&z| {
            let mut acc = C64::new(0.0, 0.0);
            for &(w, fv) in &support {
                if !(skip_diagonal && w == z) {
                    acc += fv * kernel_unchecked(spec, z, w);
                }
            }
            acc
        })
        .collect())
}

/// Plain `L^p(dA)` norm of node samples.
pub fn grid_lp(samples: &[C64], p: f64, grid: &DiskGrid) -> f64 {
    let vals: Vec<f64> = samples.iter().map(|v| v.norm().powf(p)).collect();
    grid.sum(&vals).powf(1.0 / p)
}

/// `32`-function style ensemble: random complex polynomials of degree at
/// most 6 times the bump `(1 - |z|^2 / rho^2)_+^4`, sampled on the grid.
pub fn random_ensemble(n: usize, seed: u64, rho: f64, grid: &DiskGrid) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let deg = rng.random_range(0..=6);
            let coeffs: Vec<C64> =
                (0..=deg).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            grid.sample(|z| {
                let x = z.norm_sqr() / (rho * rho);
                if x >= 1.0 {
                    return C64::new(0.0, 0.0);
                }
                let poly = coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
                poly * (1.0 - x).powi(4)
            })
        })
        .collect()
}

/// Largest `||Tf||_p / ||f||_p` over the ensemble; zero functions are skipped.
pub fn empirical_norm(spec: &KernelSpec, ensemble: &[Vec<C64>], grid: &DiskGrid) -> Result<f64> {
    let mut best: f64 = 0.0;
    for f in ensemble {
        let nf = grid_lp(f, spec.p, grid);
        if nf == 0.0 {
            continue;
        }
        let tf = operator_apply(spec, f, grid)?;
        best = best.max(grid_lp(&tf, spec.p, grid) / nf);
    }
    Ok(best)
}

/// Result of the discrete `L^p_q` experiment for `p < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperatorReport {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    /// Whether `a > -1/p`, `b > 2/p - 1/q - 1`, `a + b + 2 > q/p` hold.
    pub conditions: [bool; 3],
    /// Largest ratio using the inner part of the net.
    pub ratio_inner: f64,
    /// Largest ratio using the whole net.
    pub ratio: f64,
    pub growth: f64,
    /// Ratio grew by at least the divergence threshold.
    pub diverging: bool,
    pub functions_used: usize,
}

struct Atom {
    center: C64,
    radius: f64,
    coeffs: Vec<C64>,
}

impl Atom {
    fn eval(&self, w: C64) -> C64 {
        let x = (w - self.center).norm_sqr() / (self.radius * self.radius);
        if x >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        let u = (w - self.center) / self.radius;
        let poly = self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * u + c);
        poly * (1.0 - x).powi(4)
    }
}

/// Norms of `Bf` and `f` over the net with the inner and the full center
/// set, as `(ratio_inner, ratio)`. `None` when `f` vanishes on the net.
fn atom_ratio(spec: &KernelSpec, lm: LocalMeanSpec, atom: &Atom, centers: &[C64], r_inner: f64) -> Option<(f64, f64)> {
    // |f| omega (1-|w|^2)^b folded into the nodes; a coarse copy serves
    // centers far from the support, where Bf is smooth
    let fold = |n_r: usize, n_a: usize| -> Vec<(C64, f64)> {
        disk_rule(atom.center, atom.radius, n_r, n_a)
            .into_iter()
            .map(|(w, om)| (w, atom.eval(w).norm() * om * (1.0 - w.norm_sqr()).powf(spec.b)))
            .filter(|p| p.1 > 0.0)
            .collect()
    };
    let fine = fold(8, 16);
    if fine.is_empty() {
        return None;
    }
    let coarse = fold(4, 8);
    let s = spec.a + spec.b + 1.0;
    let bf = |fw: &[(C64, f64)], z: C64| {
        let acc: f64 = fw
            .iter()
            .filter(|p| p.0 != z)
            .map(|&(w, fv)| fv / ((z - w).norm() * (1.0 - w.conj() * z).norm().powf(s)))
            .sum();
        acc * (1.0 - z.norm_sqr()).powf(spec.a)
    };
    let mean = |vals: Vec<(f64, f64)>| {
        let area: f64 = vals.iter().map(|v| v.1).sum();
        let s: Vec<f64> = vals.iter().map(|&(v, w)| w * v.powf(lm.q)).collect();
        (pairwise_sum(&s) / area).powf(1.0 / lm.q)
    };
    let terms: Vec<(f64, f64, f64)> = centers
        .par_iter()
        .map(|&zk| {
            let (c, r) = PseudoDisk::new(zk, lm.r).expect("valid disk").euclidean_params();
            let near = psi(zk, atom.center) < 0.9;
            let (rule, fw) = if near { (disk_rule(c, r, 6, 12), &fine) } else { (disk_rule(c, r, 3, 6), &coarse) };
            let m_f = if near { mean(rule.iter().map(|&(w, om)| (atom.eval(w).norm(), om)).collect()) } else { 0.0 };
            let m_b = mean(rule.iter().map(|&(w, om)| (bf(fw, w), om)).collect());
            let wk = (1.0 - zk.norm_sqr()).powi(2);
            (zk.norm(), wk * m_f.powf(spec.p), wk * m_b.powf(spec.p))
        })
        .collect();
    let nf = pairwise_sum(&terms.iter().map(|t| t.1).collect::<Vec<_>>());
    if nf == 0.0 {
        return None;
    }
    let nb = pairwise_sum(&terms.iter().map(|t| t.2).collect::<Vec<_>>());
    let nb_inner = pairwise_sum(&terms.iter().filter(|t| t.0 <= r_inner).map(|t| t.2).collect::<Vec<_>>());
    Some(((nb_inner / nf).powf(1.0 / spec.p), (nb / nf).powf(1.0 / spec.p)))
}

/// Estimates `||B f||_{p,q} / ||f||_{p,q}` with the discrete norms over the
/// net, for an ensemble of smooth bumps of random polynomials on
/// pseudo-hyperbolic disks centred in `|c| <= 0.7`. The ratio is computed
/// with the centers inside the radius where `1 - r^2` is twice
/// `1 - rmax^2`, and with the whole net; growth between the two flags
/// divergence. Functions vanishing on the net are skipped.
pub fn discrete_operator_check(
    spec: &KernelSpec,
    net: &CoveringNet<f64>,
    n_functions: usize,
    seed: u64,
) -> Result<DiscreteOperatorReport> {
    ensure!(
        spec.p > 0.0 && spec.p < 1.0 && spec.q >= 1.0,
        Error::Parameter(format!("need p < 1 <= q, got p = {}, q = {}", spec.p, spec.q))
    );
    let lm = LocalMeanSpec::new(spec.q, 2.0 * net.eta)?;
    let rmax = net.rmax;
    let r_inner = (1.0 - 2.0 * (1.0 - rmax * rmax)).max(0.0).sqrt();
    let centers = net.centers.values();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms: Vec<Atom> = (0..n_functions)
        .map(|_| {
            let c = C64::from_polar(0.7 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
            let (center, radius) = PseudoDisk::new(c, 0.5).expect("valid disk").euclidean_params();
            let deg = rng.random_range(0..=6);
            let coeffs =
                (0..=deg).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            Atom { center, radius, coeffs }
        })
        .collect();

    let mut ratio_inner: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let mut used = 0;
    for atom in &atoms {
        if let Some((ri, r)) = atom_ratio(spec, lm, atom, &centers, r_inner) {
            ratio_inner = ratio_inner.max(ri);
            ratio = ratio.max(r);
            used += 1;
        }
    }
    let growth = if ratio_inner > 0.0 { ratio / ratio_inner - 1.0 } else { 0.0 };
    Ok(DiscreteOperatorReport {
        p: spec.p,
        q: spec.q,
        a: spec.a,
        b: spec.b,
        conditions: spec.plt1_conditions(),
        ratio_inner,
        ratio,
        growth,
        diverging: !growth.is_finite() || growth >= SCHUR_GROWTH_LIMIT,
        functions_used: used,
    })
}
