//! Interpolation on a separated sequence `Z`: the bump interpolant
//! `g = sum_a c_a beta_a`, its correction `f = g - u Psi_Z` where
//! `(1 - |z|^2) dbar u = (1 - |z|^2) dbar g / Psi_Z`, and the add-point
//! construction `f(z) = z g(z) + c_0`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dbar::{bump_profile, fd_step, solve_patched, PartitionOfUnity, SolveOptions, Source, SourcePart, FD_STEP};
use crate::error::{ensure, Error, Result};
use crate::extremal::GaFamily;
use crate::geometry::{moebius, psi, PointSet, PseudoDisk};
use crate::quad::{dbar_fd, lp_norm, pairwise_sum, CauchyEngine, Density, DiskGrid};
use crate::weights::{e_a, WeightEval};
use crate::C64;

/// Target values `c_a`, aligned with the points of `Z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetValues {
    pub values: Vec<C64>,
}

impl TargetValues {
    pub fn new(z_set: &PointSet<f64>, values: Vec<C64>) -> Result<Self> {
        ensure!(
            values.len() == z_set.len(),
            Error::Parameter(format!("{} values for {} points", values.len(), z_set.len()))
        );
        for v in &values {
            ensure!(v.re.is_finite() && v.im.is_finite(), Error::NonFinite(format!("target value {v}")));
        }
        Ok(TargetValues { values })
    }

    pub fn zeros(n: usize) -> Self {
        TargetValues { values: vec![C64::new(0.0, 0.0); n] }
    }

    /// Values `c_a = e^{i theta_a}` with seeded random phases.
    pub fn random_unit(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n).map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
        TargetValues { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, t: C64) -> Self {
        TargetValues { values: self.values.iter().map(|v| v * t).collect() }
    }
}

/// `(sum_a |c_a|^p (1 - |a|^2)^2)^{1/p}`.
pub fn lp_seq_norm(z_set: &PointSet<f64>, c: &TargetValues, p: f64) -> Result<f64> {
    ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
    ensure!(c.len() == z_set.len(), Error::Parameter(format!("{} values for {} points", c.len(), z_set.len())));
    let terms: Vec<f64> =
        z_set.values().iter().zip(&c.values).map(|(a, v)| v.norm().powf(p) * (1.0 - a.norm_sqr()).powi(2)).collect();
    Ok(pairwise_sum(&terms).powf(1.0 / p))
}

/// Pseudo-hyperbolic separation needed for the disks `D(a, 2 eta)` to be
/// pairwise disjoint.
pub fn required_separation(eta: f64) -> f64 {
    4.0 * eta / (1.0 + 4.0 * eta * eta)
}

/// Largest `eta` whose disks `D(a, 2 eta)` are disjoint at separation `sep`.
pub fn max_bump_eta(sep: f64) -> f64 {
    if sep >= 1.0 {
        return 0.5;
    }
    (1.0 - (1.0 - sep * sep).sqrt()) / (2.0 * sep)
}

/// `g = sum_a c_a beta_a` with `beta_a = bump_profile(psi(a, .) / (2 eta))`:
/// `beta_a = 1` on `D(a, eta)` and `0` off `D(a, 2 eta)`.
#[derive(Clone, Debug)]
pub struct BumpInterpolant {
    nodes: Vec<C64>,
    values: Vec<C64>,
    eta: f64,
    /// Euclidean center and radius of each `D(a, 2 eta)`.
    outer: Vec<(C64, f64)>,
    inner: Vec<(C64, f64)>,
}

/// Derivative of [`bump_profile`].
fn bump_profile_deriv(s: f64) -> f64 {
    if s <= 0.5 || s >= 1.0 {
        0.0
    } else {
        let t = 2.0 * (1.0 - s);
        // d/dt [t^3 (10 - 15 t + 6 t^2)] = 30 t^2 (1 - t)^2, dt/ds = -2
        -60.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

/// `beta_a(z)` together with `dbar beta_a(z)`.
fn bump_and_dbar(a: C64, eta: f64, z: C64) -> (f64, C64) {
    let m = moebius(a, z);
    let r = m.norm();
    let s = r / (2.0 * eta);
    let b = bump_profile(s);
    if s <= 0.5 || s >= 1.0 {
        return (b, C64::new(0.0, 0.0));
    }
    // dbar |M| = M conj(M') / (2 |M|), M'(z) = (|a|^2 - 1) / (1 - conj(a) z)^2
    let dm = (a.norm_sqr() - 1.0) / (1.0 - a.conj() * z).powi(2);
    let dbar_r = m * dm.conj() / (2.0 * r);
    (b, dbar_r * (bump_profile_deriv(s) / (2.0 * eta)))
}

impl BumpInterpolant {
    pub fn new(z_set: &PointSet<f64>, c: &TargetValues, eta: f64) -> Result<Self> {
        ensure!(eta > 0.0 && eta < 0.5, Error::Parameter(format!("bump radius eta = {eta} not in (0, 1/2)")));
        ensure!(c.len() == z_set.len(), Error::Parameter(format!("{} values for {} points", c.len(), z_set.len())));
        ensure!(
            z_set.multiplicities().iter().all(|&m| m == 1),
            Error::Parameter("interpolation needs simple points".into())
        );
        let nodes = z_set.values();
        let need = required_separation(eta);
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[..i] {
                ensure!(
                    psi(a, b) > need,
                    Error::Separation(format!(
                        "psi({a}, {b}) = {:.4} does not exceed {need:.4}, so D(a, 2 eta) overlap",
                        psi(a, b)
                    ))
                );
            }
        }
        let disk = |a: C64, r: f64| PseudoDisk::new(a, r).map(|d| d.euclidean_params());
        let outer = nodes.iter().map(|&a| disk(a, 2.0 * eta)).collect::<Result<Vec<_>>>()?;
        let inner = nodes.iter().map(|&a| disk(a, eta)).collect::<Result<Vec<_>>>()?;
        Ok(BumpInterpolant { nodes, values: c.values.clone(), eta, outer, inner })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// Index of the bump whose support contains `z`.
    fn owner(&self, z: C64) -> Option<usize> {
        self.outer.iter().position(|&(c, r)| (z - c).norm() < r)
    }

    pub fn eval(&self, z: C64) -> C64 {
        match self.owner(z) {
            Some(i) => self.values[i] * bump_and_dbar(self.nodes[i], self.eta, z).0,
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn dbar(&self, z: C64) -> C64 {
        match self.owner(z) {
            Some(i) => self.values[i] * bump_and_dbar(self.nodes[i], self.eta, z).1,
            None => C64::new(0.0, 0.0),
        }
    }

    /// The right-hand side `(1 - |z|^2) dbar g / Psi_Z`, one part per node
    /// with nonzero target, broken along the circle of `D(a, eta)`.
    pub fn correction_source(&self, z_set: &PointSet<f64>) -> Result<Source> {
        let mut parts = Vec::new();
        for i in 0..self.nodes.len() {
            let c = self.values[i];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let a = self.nodes[i];
            let eta = self.eta;
            let (center, radius) = self.outer[i];
            let rest = LocalReciprocal::new(&z_set.filter(|b| b != a), center, radius);
            let f: Density = Arc::new(move |z: C64| {
                let d = bump_and_dbar(a, eta, z).1;
                if d == C64::new(0.0, 0.0) {
                    return d;
                }
                c * d * (1.0 - z.norm_sqr()) * rest.eval(z) / e_a(a, z)
            });
            parts.push(SourcePart::new(center, radius, f)?.with_breaks(vec![self.inner[i]]));
        }
        Ok(Source::from_parts(parts))
    }
}

/// Taylor expansion of `1 / Psi_Z` on a disk free of zeros of `Z`, from
/// samples on the boundary circle.
#[derive(Clone, Debug)]
struct LocalReciprocal {
    center: C64,
    radius: f64,
    coeffs: Vec<C64>,
}

const RECIPROCAL_SAMPLES: usize = 64;

impl LocalReciprocal {
    fn new(z_set: &PointSet<f64>, center: C64, radius: f64) -> Self {
        let weight = WeightEval::new(z_set);
        let n = RECIPROCAL_SAMPLES;
        let samples: Vec<C64> = (0..n)
            .map(|j| 1.0 / weight.psi(center + C64::from_polar(radius, std::f64::consts::TAU * j as f64 / n as f64)))
            .collect();
        let coeffs = (0..n)
            .map(|k| {
                let s: C64 = samples
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -std::f64::consts::TAU * (j * k) as f64 / n as f64))
                    .sum();
                s / n as f64
            })
            .collect::<Vec<C64>>();
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() < 1e-16 * scale) {
            coeffs.pop();
        }
        LocalReciprocal { center, radius, coeffs }
    }

    fn eval(&self, z: C64) -> C64 {
        let x = (z - self.center) / self.radius;
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }
}

/// `||g||_p / ||c||_{p,Z}` for the bump interpolant on `grid`.
pub fn bump_norm_ratio(z_set: &PointSet<f64>, c: &TargetValues, eta: f64, p: f64, grid: &DiskGrid) -> Result<f64> {
    let g = BumpInterpolant::new(z_set, c, eta)?;
    let values = grid.sample(|z| g.eval(z));
    let norm = lp_norm(&values, &WeightEval::new(&PointSet::empty()), p, grid)?;
    let c_norm = lp_seq_norm(z_set, c, p)?;
    Ok(if c_norm > 0.0 { norm / c_norm } else { 0.0 })
}

/// Largest `||g||_p / ||c||_{p,Z}` over `n` random unit target vectors.
pub fn bump_ensemble_max(z_set: &PointSet<f64>, eta: f64, p: f64, n: usize, seed: u64, grid: &DiskGrid) -> Result<f64> {
    let ratios = (0..n)
        .into_par_iter()
        .map(|k| bump_norm_ratio(z_set, &TargetValues::random_unit(z_set.len(), seed + k as u64), eta, p, grid))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Which solution operator produces the correction `u`.
#[derive(Clone, Copy, Debug)]
pub enum Solver<'a> {
    Plain,
    Patched { family: &'a GaFamily, partition: &'a PartitionOfUnity },
}

#[derive(Clone, Copy, Debug)]
pub struct InterpolationOptions {
    pub p: f64,
    /// Bump radius; `None` takes 90% of the largest radius the separation allows.
    pub eta: Option<f64>,
    pub solve: SolveOptions,
}

impl InterpolationOptions {
    pub fn new(p: f64) -> Self {
        InterpolationOptions { p, eta: None, solve: SolveOptions { p, ..SolveOptions::default() } }
    }
}

/// The corrected interpolant `f = g - u Psi_Z`.
#[derive(Clone)]
pub struct Interpolant {
    pub g: BumpInterpolant,
    u: Arc<dyn Fn(C64) -> C64 + Send + Sync>,
    weight: Arc<WeightEval<f64>>,
}

impl Interpolant {
    pub fn eval(&self, z: C64) -> C64 {
        let g = self.g.eval(z);
        let psi = self.weight.psi(z);
        if psi == C64::new(0.0, 0.0) {
            return g;
        }
        g - (self.u)(z) * psi
    }

    /// The solution `u` of the correction equation.
    pub fn correction(&self, z: C64) -> C64 {
        (self.u)(z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub p: f64,
    pub z_count: usize,
    pub eta: f64,
    pub n_radial: usize,
    /// `max_a |f(a) - c_a| / (1 + |c_a|)`.
    pub node_err_max: f64,
    /// `||c||_{p,Z}`.
    pub c_norm: f64,
    /// `||g||_p`.
    pub g_norm: f64,
    /// `||f||_p`.
    pub f_norm: f64,
    /// `||f||_p / ||c||_{p,Z}`.
    pub norm_ratio: f64,
    /// `||u Psi_Z||_p`.
    pub correction_norm: f64,
    /// `||u||_{p,Z}`.
    pub u_weighted_norm: f64,
    /// `||(1-|z|^2) dbar f||_2 / ||(1-|z|^2) dbar g||_2`.
    pub residual: f64,
    /// `||(1-|z|^2) dbar u - F||_2 / ||F||_2` for the data `F` of the correction.
    pub solver_residual: f64,
    pub tolerance: f64,
    pub success: bool,
}

pub const NODE_TOLERANCE: f64 = 1e-6;

/// Bump radius used when none is given.
pub fn default_eta(z_set: &PointSet<f64>) -> Result<f64> {
    if z_set.len() < 2 {
        return Ok(0.2);
    }
    let sep = crate::geometry::separation_constant(z_set)?;
    Ok((0.9 * max_bump_eta(sep)).min(0.3))
}

/// Per-node samples shared by both ways of producing `u`.
struct NodeSamples {
    psi: Vec<C64>,
    g: Vec<C64>,
    /// `(1 - |z|^2) dbar g`.
    dg: Vec<C64>,
    u: Vec<C64>,
    /// `(1 - |z|^2) dbar u` by differences; `None` too close to the circle.
    du: Vec<Option<C64>>,
}

fn assemble(
    z_set: &PointSet<f64>,
    c: &TargetValues,
    eta: f64,
    p: f64,
    tolerance: f64,
    f: &Interpolant,
    s: &NodeSamples,
    grid: &DiskGrid,
) -> Result<InterpolationReport> {
    let node_err_max = z_set
        .values()
        .iter()
        .zip(&c.values)
        .map(|(&a, &ca)| (f.eval(a) - ca).norm() / (1.0 + ca.norm()))
        .fold(0.0, f64::max);
    let unweighted = WeightEval::new(&PointSet::empty());
    let corr: Vec<C64> = s.u.iter().zip(&s.psi).map(|(u, q)| u * q).collect();
    let fs: Vec<C64> = s.g.iter().zip(&corr).map(|(g, c)| g - c).collect();
    let g_norm = lp_norm(&s.g, &unweighted, p, grid)?;
    let f_norm = lp_norm(&fs, &unweighted, p, grid)?;
    let correction_norm = lp_norm(&corr, &unweighted, p, grid)?;
    let u_weighted_norm = lp_norm(&s.u, &f.weight, p, grid)?;
    let c_norm = lp_seq_norm(z_set, c, p)?;
    let norm_ratio = if c_norm > 0.0 { f_norm / c_norm } else { 0.0 };

    // Psi_Z is analytic, so (1-|z|^2) dbar f = Psi_Z ((1-|z|^2) dbar u - F) up to sign
    let mut sums = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for i in 0..grid.len() {
        let Some(du) = s.du[i] else { continue };
        let w = grid.weights[i];
        let data = if s.dg[i] == C64::new(0.0, 0.0) { s.dg[i] } else { s.dg[i] / s.psi[i] };
        let d = du - data;
        sums[0].push(w * (s.psi[i] * d).norm_sqr());
        sums[1].push(w * s.dg[i].norm_sqr());
        sums[2].push(w * d.norm_sqr());
        sums[3].push(w * data.norm_sqr());
    }
    let [f_defect, f_data, u_defect, u_data] = sums.map(|v| pairwise_sum(&v).sqrt());
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    let residual = ratio(f_defect, f_data);
    let solver_residual = ratio(u_defect, u_data);
    Ok(InterpolationReport {
        p,
        z_count: z_set.len(),
        eta,
        n_radial: grid.n_radial,
        node_err_max,
        c_norm,
        g_norm,
        f_norm,
        norm_ratio,
        correction_norm,
        u_weighted_norm,
        residual,
        solver_residual,
        tolerance,
        success: node_err_max <= NODE_TOLERANCE
            && residual <= tolerance
            && [f_norm, norm_ratio, residual].iter().all(|v| v.is_finite()),
    })
}

fn fd_inside(z: C64) -> bool {
    z.norm() <= 1.0 - 2.0 * FD_STEP
}

/// The plain correction for unit data at each node, sampled once on a grid,
/// so that any target vector costs only a linear combination.
pub struct InterpolationBasis {
    z_set: PointSet<f64>,
    eta: f64,
    tolerance: f64,
    weight: Arc<WeightEval<f64>>,
    engine: Arc<CauchyEngine>,
    grid: DiskGrid,
    psi: Vec<C64>,
    /// Bump owning each grid node, with `beta` and `(1-|z|^2) dbar beta` there.
    owner: Vec<Option<(usize, f64, C64)>>,
    /// `u_j(z_i)` and `(1-|z_i|^2) dbar u_j(z_i)` for the unit data at node `j`.
    u: Vec<Vec<C64>>,
    du: Vec<Option<Vec<C64>>>,
}

impl InterpolationBasis {
    pub fn new(z_set: &PointSet<f64>, eta: f64, solve: &SolveOptions, grid: &DiskGrid) -> Result<Self> {
        let unit = TargetValues { values: vec![C64::new(1.0, 0.0); z_set.len()] };
        let g = BumpInterpolant::new(z_set, &unit, eta)?;
        let source = g.correction_source(z_set)?;
        let pieces = source.parts().iter().map(|p| p.piece()).collect();
        let engine = Arc::new(CauchyEngine::new(pieces, solve.m, solve.rule)?);
        let weight = Arc::new(WeightEval::new(z_set));
        let n = z_set.len();
        let psi = grid.sample(|z| weight.psi(z));
        let owner = grid.sample(|z| {
            g.owner(z).map(|j| {
                let (b, d) = bump_and_dbar(g.nodes[j], eta, z);
                (j, b, (1.0 - z.norm_sqr()) * d)
            })
        });
        let u = grid.sample(|z| (0..n).map(|j| engine.piece_value(j, z)).collect::<Vec<_>>());
        let du = grid.sample(|z| {
            fd_inside(z).then(|| {
                let h = fd_step(z);
                let mut out = Vec::with_capacity(n);
                for j in 0..n {
                    let f = |w: C64| engine.piece_value(j, w);
                    out.push((1.0 - z.norm_sqr()) * dbar_fd(f, z, h));
                }
                out
            })
        });
        Ok(InterpolationBasis {
            z_set: z_set.clone(),
            eta,
            tolerance: solve.tolerance,
            weight,
            engine,
            grid: grid.clone(),
            psi,
            owner,
            u,
            du,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn apply(&self, c: &TargetValues, p: f64) -> Result<(Interpolant, InterpolationReport)> {
        ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
        let g = BumpInterpolant::new(&self.z_set, c, self.eta)?;
        let combine = |row: &[C64]| row.iter().zip(&c.values).map(|(a, b)| a * b).sum::<C64>();
        let mut samples = NodeSamples {
            psi: self.psi.clone(),
            g: Vec::with_capacity(self.grid.len()),
            dg: Vec::with_capacity(self.grid.len()),
            u: self.u.iter().map(|row| combine(row)).collect(),
            du: self.du.iter().map(|row| row.as_ref().map(|r| combine(r))).collect(),
        };
        for o in &self.owner {
            match *o {
                Some((j, b, d)) => {
                    samples.g.push(c.values[j] * b);
                    samples.dg.push(c.values[j] * d);
                }
                None => {
                    samples.g.push(C64::new(0.0, 0.0));
                    samples.dg.push(C64::new(0.0, 0.0));
                }
            }
        }
        let engine = Arc::clone(&self.engine);
        let coef = c.values.clone();
        let u = Arc::new(move |z: C64| engine.eval_combined(z, |j| coef[j]));
        let f = Interpolant { g, u, weight: Arc::clone(&self.weight) };
        let report = assemble(&self.z_set, c, self.eta, p, self.tolerance, &f, &samples, &self.grid)?;
        Ok((f, report))
    }
}

/// Builds `f = g - u Psi_Z` and checks it on the nodes and the grid.
pub fn interpolate(
    z_set: &PointSet<f64>,
    c: &TargetValues,
    opts: &InterpolationOptions,
    solver: Solver<'_>,
    grid: &DiskGrid,
) -> Result<(Interpolant, InterpolationReport)> {
    ensure!(opts.p > 0.0, Error::Parameter(format!("p = {} must be positive", opts.p)));
    let eta = match opts.eta {
        Some(e) => e,
        None => default_eta(z_set)?,
    };
    let solve = SolveOptions { p: opts.p, ..opts.solve };
    let (family, partition) = match solver {
        Solver::Plain => return InterpolationBasis::new(z_set, eta, &solve, grid)?.apply(c, opts.p),
        Solver::Patched { family, partition } => (family, partition),
    };
    let g = BumpInterpolant::new(z_set, c, eta)?;
    let weight = Arc::new(WeightEval::new(z_set));
    let source = g.correction_source(z_set)?;
    let sol = Arc::new(solve_patched(&source, z_set, family, partition, grid, &solve)?);
    let ueval = |z: C64| sol.eval(z);
    let samples = NodeSamples {
        psi: grid.sample(|z| weight.psi(z)),
        g: grid.sample(|z| g.eval(z)),
        dg: grid.sample(|z| (1.0 - z.norm_sqr()) * g.dbar(z)),
        u: sol.values.clone(),
        du: grid.sample(|z| fd_inside(z).then(|| (1.0 - z.norm_sqr()) * dbar_fd(ueval, z, fd_step(z)))),
    };
    let s2 = Arc::clone(&sol);
    let f = Interpolant { g, u: Arc::new(move |z: C64| s2.eval(z)), weight };
    let report = assemble(z_set, c, eta, opts.p, solve.tolerance, &f, &samples, grid)?;
    Ok((f, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AddPointReport {
    /// Smallest `psi(a_0, a)` over `a` in `Z`.
    pub distance: f64,
    /// `|f(0) - c_0|` in the shifted coordinates.
    pub origin_err: f64,
    /// `max_a |f(a) - c_a| / (1 + |c_a|)` over the shifted nodes.
    pub node_err_max: f64,
    /// `||f||_p` in the shifted coordinates.
    pub f_norm: f64,
    /// `||(c_0, c)||_{p, {0} u M_{a_0}(Z)}`.
    pub data_norm: f64,
    pub norm_ratio: f64,
    pub inner: Option<InterpolationReport>,
}

/// Interpolates `c_0` at `a_0` and `c_a` on `Z` by moving `a_0` to the origin,
/// interpolating `(c_a - c_0) / a` on the shifted set and taking
/// `f(z) = z g(z) + c_0`.
pub fn add_point(
    z_set: &PointSet<f64>,
    c: &TargetValues,
    a0: C64,
    c0: C64,
    min_distance: f64,
    opts: &InterpolationOptions,
    grid: &DiskGrid,
) -> Result<AddPointReport> {
    ensure!(a0.norm() < 1.0, Error::OutsideDisk { re: a0.re, im: a0.im });
    ensure!(c.len() == z_set.len(), Error::Parameter(format!("{} values for {} points", c.len(), z_set.len())));
    let nodes = z_set.values();
    let distance = nodes.iter().map(|&a| psi(a0, a)).fold(1.0, f64::min);
    ensure!(
        distance > min_distance,
        Error::Separation(format!("a0 = {a0} is within {distance:.4} <= {min_distance} of Z"))
    );
    let unweighted = WeightEval::new(&PointSet::empty());
    let shifted = z_set.moebius_image(a0);
    let moved = shifted.values();
    let mut all = vec![C64::new(0.0, 0.0)];
    all.extend(&moved);
    let all_set = PointSet::from_complex(&all)?;
    let mut all_values = vec![c0];
    all_values.extend(&c.values);
    let data_norm = lp_seq_norm(&all_set, &TargetValues { values: all_values }, opts.p)?;

    if z_set.is_empty() {
        let fs = vec![c0; grid.len()];
        let f_norm = lp_norm(&fs, &unweighted, opts.p, grid)?;
        return Ok(AddPointReport {
            distance,
            origin_err: 0.0,
            node_err_max: 0.0,
            f_norm,
            data_norm,
            norm_ratio: if data_norm > 0.0 { f_norm / data_norm } else { 0.0 },
            inner: None,
        });
    }

    let d = TargetValues { values: moved.iter().zip(&c.values).map(|(&b, &ca)| (ca - c0) / b).collect() };
    let (g, inner) = interpolate(&shifted, &d, opts, Solver::Plain, grid)?;
    let f = |z: C64| z * g.eval(z) + c0;
    let origin_err = (f(C64::new(0.0, 0.0)) - c0).norm();
    let node_err_max =
        moved.iter().zip(&c.values).map(|(&b, &ca)| (f(b) - ca).norm() / (1.0 + ca.norm())).fold(0.0, f64::max);
    let fs: Vec<C64> = grid.sample(f);
    let f_norm = lp_norm(&fs, &unweighted, opts.p, grid)?;
    Ok(AddPointReport {
        distance,
        origin_err,
        node_err_max,
        f_norm,
        data_norm,
        norm_ratio: if data_norm > 0.0 { f_norm / data_norm } else { 0.0 },
        inner: Some(inner),
    })
}

/// Add-point runs with `a_0` placed at pseudo-hyperbolic distance `d` from
/// the first point of `Z`, along the direction pointing away from the origin,
/// for each `d` in `distances`.
pub fn add_point_trend(
    z_set: &PointSet<f64>,
    c: &TargetValues,
    c0: C64,
    distances: &[f64],
    opts: &InterpolationOptions,
    grid: &DiskGrid,
) -> Result<Vec<AddPointReport>> {
    ensure!(!z_set.is_empty(), Error::TooFewPoints { need: 1, got: 0 });
    let a = z_set.values()[0];
    let dir = if a.norm() > 0.0 { -a / a.norm() } else { C64::new(1.0, 0.0) };
    distances
        .iter()
        .map(|&d| {
            ensure!(d > 0.0 && d < 1.0, Error::Parameter(format!("distance {d} not in (0,1)")));
            let a0 = moebius(a, dir * d);
            add_point(z_set, c, a0, c0, 0.99 * d, opts, grid)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_separated;
    use crate::weights::sigma_lower_bound;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lattice() -> PointSet<f64> {
        build_separated(0.9, 0.95).unwrap()
    }

    #[test]
    fn sequence_norm_examples() {
        let a = (0.5f64).sqrt();
        let z = PointSet::from_complex(&[c(a, 0.0)]).unwrap();
        let v = TargetValues::new(&z, vec![c(2.0, 0.0)]).unwrap();
        assert!((lp_seq_norm(&z, &v, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(lp_seq_norm(&z, &TargetValues::zeros(1), 2.0).unwrap(), 0.0);
        assert!(TargetValues::new(&z, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn sequence_norm_is_homogeneous(t in 0.0f64..5.0, arg in 0.0f64..6.3, seed in 0u64..50, p in 0.5f64..4.0) {
            let z = lattice();
            let v = TargetValues::random_unit(z.len(), seed);
            let s = C64::from_polar(t, arg);
            let lhs = lp_seq_norm(&z, &v.scaled(s), p).unwrap();
            let rhs = t * lp_seq_norm(&z, &v, p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }

    #[test]
    fn bump_derivative_matches_differences() {
        let a = c(0.3, -0.4);
        let eta = 0.1;
        for z in [c(0.3 + 0.05, -0.4), c(0.3, -0.45 + 0.01), c(0.36, -0.37)] {
            let h = 1e-6;
            let fd = (bump_and_dbar(a, eta, z + h).0 - bump_and_dbar(a, eta, z - h).0) / (4.0 * h)
                + C64::i() * (bump_and_dbar(a, eta, z + C64::i() * h).0 - bump_and_dbar(a, eta, z - C64::i() * h).0)
                    / (4.0 * h);
            let exact = bump_and_dbar(a, eta, z).1;
            assert!((fd - exact).norm() < 1e-5 * (1.0 + exact.norm()), "{fd} vs {exact}");
        }
    }

    #[test]
    fn local_reciprocal_matches_direct_evaluation() {
        let z = lattice();
        let eta = default_eta(&z).unwrap();
        let a = z.values()[3];
        let (center, radius) = PseudoDisk::new(a, 2.0 * eta).unwrap().euclidean_params();
        let rest = z.filter(|b| b != a);
        let fit = LocalReciprocal::new(&rest, center, radius);
        let weight = WeightEval::new(&rest);
        for k in 0..20 {
            let w = center + C64::from_polar(radius * (k as f64 / 20.0), 0.7 * k as f64);
            let exact = 1.0 / weight.psi(w);
            assert!((fit.eval(w) - exact).norm() <= 1e-10 * exact.norm(), "{} vs {exact}", fit.eval(w));
        }
    }

    #[test]
    fn bump_interpolant_examples() {
        let z = lattice();
        let eta = default_eta(&z).unwrap();
        let g0 = BumpInterpolant::new(&z, &TargetValues::zeros(z.len()), eta).unwrap();
        assert_eq!(g0.eval(c(0.1, 0.2)), c(0.0, 0.0));
        let v = TargetValues::random_unit(z.len(), 3);
        let g = BumpInterpolant::new(&z, &v, eta).unwrap();
        for (a, ca) in z.values().iter().zip(&v.values) {
            assert_eq!(g.eval(*a), *ca);
        }
        let single = PointSet::from_complex(&[c(0.2, 0.1)]).unwrap();
        let g1 = BumpInterpolant::new(&single, &TargetValues { values: vec![c(0.0, 2.0)] }, 0.2).unwrap();
        assert_eq!(g1.eval(c(0.2, 0.1)), c(0.0, 2.0));
        assert_eq!(g1.eval(c(-0.6, 0.0)), c(0.0, 0.0));
        assert!(matches!(BumpInterpolant::new(&z, &v, 0.4), Err(Error::Separation(_))));
    }

    #[test]
    fn bump_ratio_is_bounded_over_an_ensemble() {
        let z = lattice();
        let eta = default_eta(&z).unwrap();
        let grid = DiskGrid::build(1.0, 24, &[]).unwrap();
        let worst = bump_ensemble_max(&z, eta, 2.0, 8, 1, &grid).unwrap();
        assert!(worst.is_finite() && worst > 0.0 && worst < 10.0, "{worst}");
    }

    #[test]
    fn interpolation_on_a_lattice() {
        let z = lattice();
        let grid = DiskGrid::build(1.0, 24, &[]).unwrap();
        let v = TargetValues::random_unit(z.len(), 11);
        let (f, rep) = interpolate(&z, &v, &InterpolationOptions::new(2.0), Solver::Plain, &grid).unwrap();
        assert!(rep.success, "{rep:?}");
        assert!(rep.node_err_max <= NODE_TOLERANCE);
        assert!(rep.residual <= 5e-3, "{}", rep.residual);
        assert!(rep.correction_norm <= rep.u_weighted_norm * (1.0 + 1e-9));
        assert!(f.eval(c(0.0, 0.0)).norm().is_finite());
    }

    #[test]
    fn patched_and_plain_corrections_both_interpolate() {
        use crate::dbar::PartitionOfUnity;
        use crate::extremal::{build_ga_family, GaSettings};
        let z = build_separated(0.9, 0.6).unwrap();
        let grid = DiskGrid::build(1.0, 12, &[]).unwrap();
        let net = crate::geometry::build_net(0.35, 0.85).unwrap();
        let pu = PartitionOfUnity::build(&net, &grid).unwrap();
        let settings = GaSettings { n_radial: 16, ..GaSettings::new(2.0, 0.35, 0.3) };
        let fam = build_ga_family(&z, pu.centers(), &settings).unwrap();
        let v = TargetValues::random_unit(z.len(), 2);
        let opts = InterpolationOptions { eta: Some(0.15), ..InterpolationOptions::new(2.0) };
        let (_, plain) = interpolate(&z, &v, &opts, Solver::Plain, &grid).unwrap();
        let (_, patched) = interpolate(&z, &v, &opts, Solver::Patched { family: &fam, partition: &pu }, &grid).unwrap();
        assert!(plain.success && patched.success, "{plain:?} {patched:?}");
        assert_eq!(patched.node_err_max, 0.0);
        assert!((plain.g_norm - patched.g_norm).abs() < 1e-12);
    }

    #[test]
    fn zero_targets_give_zero() {
        let z = lattice();
        let grid = DiskGrid::build(1.0, 12, &[]).unwrap();
        let (_, rep) =
            interpolate(&z, &TargetValues::zeros(z.len()), &InterpolationOptions::new(2.0), Solver::Plain, &grid)
                .unwrap();
        assert_eq!(rep.f_norm, 0.0);
        assert_eq!(rep.node_err_max, 0.0);
    }

    #[test]
    fn sigma_bound_holds_on_the_annuli() {
        let z = lattice();
        let eta = default_eta(&z).unwrap();
        let mut samples = Vec::new();
        for a in z.values() {
            for k in 0..16 {
                for s in [1.05, 1.5, 1.95] {
                    let w = C64::from_polar(s * eta, k as f64 * std::f64::consts::TAU / 16.0);
                    samples.push(moebius(a, w));
                }
            }
        }
        let bound = sigma_lower_bound(&z, eta, &samples).unwrap();
        let weight = WeightEval::new(&z);
        let direct = samples.iter().map(|&w| weight.sigma(w)).fold(f64::INFINITY, f64::min);
        assert!(bound <= direct, "{bound} > {direct}");
    }

    #[test]
    fn add_point_on_empty_set_is_constant() {
        let grid = DiskGrid::build(1.0, 8, &[]).unwrap();
        let rep = add_point(
            &PointSet::empty(),
            &TargetValues::zeros(0),
            c(0.3, 0.0),
            c(2.0, 0.0),
            0.1,
            &InterpolationOptions::new(2.0),
            &grid,
        )
        .unwrap();
        assert_eq!(rep.origin_err, 0.0);
        assert!((rep.f_norm - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn add_point_ratio_grows_as_the_new_point_approaches() {
        let z = build_separated(0.9, 0.85).unwrap();
        let grid = DiskGrid::build(1.0, 12, &[]).unwrap();
        let v = TargetValues::random_unit(z.len(), 5);
        let reps =
            add_point_trend(&z, &v, c(1.0, 0.0), &[0.4, 0.2, 0.1], &InterpolationOptions::new(2.0), &grid).unwrap();
        for r in &reps {
            assert!(r.origin_err < 1e-12 && r.node_err_max <= NODE_TOLERANCE, "{r:?}");
        }
        assert!(reps[0].norm_ratio < reps[1].norm_ratio && reps[1].norm_ratio < reps[2].norm_ratio, "{reps:?}");
    }

    #[test]
    fn add_point_rejects_nearby_points() {
        let z = lattice();
        let grid = DiskGrid::build(1.0, 8, &[]).unwrap();
        let a = z.values()[0];
        let r = add_point(
            &z,
            &TargetValues::zeros(z.len()),
            a + 0.01,
            c(1.0, 0.0),
            0.1,
            &InterpolationOptions::new(2.0),
            &grid,
        );
        assert!(matches!(r, Err(Error::Separation(_))));
    }
}
