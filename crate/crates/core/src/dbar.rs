//! Solutions of `(1 - |z|^2) dbar u = f` for compactly supported `f`.
//!
//! The plain solver is the modified Cauchy transform of
//! `phi = f / (1 - |w|^2)`,
//!
//! ```text
//! u(z) = (1/pi) int phi(w) (1-|w|^2)^m / ((z - w) (1 - conj(w) z)^m) dA(w),
//! ```
//!
//! and the patched solver splits `f` with a partition of unity and
//! conjugates each piece by a member `g_{a_j}` of the zero-free family,
//!
//! ```text
//! u(z) = sum_j g_j(z) (1/pi) int beta_j f / g_j (1-|w|^2)^{m-1} / ((z-w)(1-conj(w) z)^m) dA(w).
//! ```
//!
//! Because `sum_j beta_j = 1` on the support of `f`, the patched solution
//! equals the plain one plus
//!
//! ```text
//! (1/pi) sum_j int beta_j phi (1-|w|^2)^m / (1-conj(w) z)^m (g_j(z)/g_j(w) - 1) / (z-w) dA(w),
//! ```
//!
//! whose integrand has a removable singularity at `w = z`; it is evaluated
//! with a fixed polar rule on the support of `f`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::extremal::{GaEntry, GaFamily};
use crate::geometry::{psi, CoveringNet, PointSet, PseudoDisk};
use crate::quad::{dbar_fd, disk_rule, lp_norm, pairwise_sum, CauchyEngine, CauchyRule, Density, DiskGrid, Piece};
use crate::weights::WeightEval;
use crate::C64;

/// Quintic smoothstep profile: 1 on `[0, 1/2]`, 0 on `[1, inf)`, `C^2`.
pub fn bump_profile(s: f64) -> f64 {
    if s <= 0.5 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let t = 2.0 * (1.0 - s);
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Partition of unity `beta_j = b_j / sum_k b_k` subordinate to the disks
/// `D(a_j, eta)`, where `b_j = bump_profile(psi(a_j, .) / eta)`.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    centers: Vec<C64>,
    radii: Vec<f64>,
    eta: f64,
    rmax: f64,
}

impl PartitionOfUnity {
    /// Builds the partition over the net and checks that the raw bumps
    /// cover every grid node with `|z| <= net.rmax`.
    pub fn build(net: &CoveringNet<f64>, grid: &DiskGrid) -> Result<Self> {
        let centers = net.centers.values();
        ensure!(!centers.is_empty(), Error::Coverage("empty net".into()));
        let radii = centers.iter().map(|c| c.norm()).collect();
        let pu = PartitionOfUnity { centers, radii, eta: net.eta, rmax: net.rmax };
        let hole = grid.nodes.par_iter().filter(|z| z.norm() <= pu.rmax).find_any(|&&z| pu.raw_sum(z) <= 0.0);
        if let Some(z) = hole {
            return Err(Error::Coverage(format!("no bump covers {z}")));
        }
        Ok(pu)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[C64] {
        &self.centers
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Indices of centers with `psi(a_j, z) < eta`.
    pub fn neighbors(&self, z: C64) -> impl Iterator<Item = usize> + '_ {
        let r = z.norm();
        let lo = ((r - self.eta) / (1.0 - self.eta * r)).max(0.0);
        let hi = (r + self.eta) / (1.0 + self.eta * r);
        let start = self.radii.partition_point(|&x| x < lo);
        let end = self.radii.partition_point(|&x| x <= hi);
        (start..end).filter(move |&j| psi(self.centers[j], z) < self.eta)
    }

    pub fn raw(&self, j: usize, z: C64) -> f64 {
        bump_profile(psi(self.centers[j], z) / self.eta)
    }

    pub fn raw_sum(&self, z: C64) -> f64 {
        self.neighbors(z).map(|j| self.raw(j, z)).sum()
    }

    /// `beta_j(z)`; zero where no bump reaches.
    pub fn beta(&self, j: usize, z: C64) -> f64 {
        let b = self.raw(j, z);
        if b == 0.0 {
            return 0.0;
        }
        b / self.raw_sum(z)
    }

    /// `sum_j beta_j(z)`.
    pub fn total(&self, z: C64) -> f64 {
        let s = self.raw_sum(z);
        if s == 0.0 {
            return 0.0;
        }
        self.neighbors(z).map(|j| self.raw(j, z)).sum::<f64>() / s
    }

    /// `sup_j sup_{D(a_j, eta)} |grad beta_j| (1 - |a_j|)`, by central
    /// differences on a polar sample of each disk.
    pub fn gradient_constant(&self) -> f64 {
        (0..self.centers.len())
            .into_par_iter()
            .map(|j| {
                let a = self.centers[j];
                let scale = 1.0 - a.norm();
                let (c, r) = PseudoDisk::new(a, self.eta).expect("valid disk").euclidean_params();
                let h = 1e-5 * r;
                let mut best: f64 = 0.0;
                for i in 0..12 {
                    let rho = r * (i as f64 + 0.5) / 12.0;
                    for k in 0..24 {
                        let z = c + C64::from_polar(rho, std::f64::consts::TAU * k as f64 / 24.0);
                        let gx = (self.beta(j, z + h) - self.beta(j, z - h)) / (2.0 * h);
                        let gy = (self.beta(j, z + C64::new(0.0, h)) - self.beta(j, z - C64::new(0.0, h))) / (2.0 * h);
                        best = best.max(gx.hypot(gy) * scale);
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// One summand of a right-hand side: `f` vanishes outside the Euclidean
/// disk `(center, radius)` and is smooth except across the `breaks` circles.
#[derive(Clone)]
pub struct SourcePart {
    pub center: C64,
    pub radius: f64,
    pub breaks: Vec<(C64, f64)>,
    pub f: Density,
}

impl std::fmt::Debug for SourcePart {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("SourcePart")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl SourcePart {
    pub fn new(center: C64, radius: f64, f: Density) -> Result<Self> {
        ensure!(
            radius > 0.0 && center.norm() + radius < 1.0,
            Error::Parameter(format!("support ({center}, {radius}) must lie inside the disk"))
        );
        Ok(SourcePart { center, radius, breaks: Vec::new(), f })
    }

    pub fn with_breaks(mut self, breaks: Vec<(C64, f64)>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn eval(&self, w: C64) -> C64 {
        if (w - self.center).norm() >= self.radius {
            C64::new(0.0, 0.0)
        } else {
            (self.f)(w)
        }
    }

    /// The Cauchy piece for `phi = f / (1 - |w|^2)`.
    pub fn piece(&self) -> Piece {
        let part = self.clone();
        let phi: Density = Arc::new(move |w: C64| part.eval(w) / (1.0 - w.norm_sqr()));
        Piece::new(self.center, self.radius, phi).with_breaks(self.breaks.clone())
    }
}

/// Compactly supported right-hand side `f`, a sum of parts.
#[derive(Clone, Debug, Default)]
pub struct Source {
    parts: Vec<SourcePart>,
}

impl Source {
    /// A single part on the disk `(center, radius)`.
    pub fn new(center: C64, radius: f64, f: Density) -> Result<Self> {
        Ok(Source { parts: vec![SourcePart::new(center, radius, f)?] })
    }

    pub fn from_parts(parts: Vec<SourcePart>) -> Self {
        Source { parts }
    }

    /// `amplitude (1 - |z - c|^2 / r^2)^4` on the disk `(c, r)`.
    pub fn bump(center: C64, radius: f64, amplitude: C64) -> Result<Self> {
        let f: Density = Arc::new(move |w: C64| {
            let x = (w - center).norm_sqr() / (radius * radius);
            if x >= 1.0 {
                C64::new(0.0, 0.0)
            } else {
                amplitude * (1.0 - x).powi(4)
            }
        });
        Source::new(center, radius, f)
    }

    /// `f = 0`, with no parts.
    pub fn zero() -> Self {
        Source::default()
    }

    pub fn parts(&self) -> &[SourcePart] {
        &self.parts
    }

    pub fn eval(&self, w: C64) -> C64 {
        self.parts.iter().map(|p| p.eval(w)).sum()
    }

    /// `f1 + f2`, keeping the parts of both.
    pub fn sum(&self, other: &Source) -> Source {
        Source { parts: self.parts.iter().chain(&other.parts).cloned().collect() }
    }

    /// Largest `|z|` on the supports.
    pub fn extent(&self) -> f64 {
        self.parts.iter().map(|p| p.center.norm() + p.radius).fold(0.0, f64::max)
    }
}

/// Record of one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub p: f64,
    pub z_count: usize,
    pub m: i32,
    pub n_radial: usize,
    pub depth: usize,
    /// `||(1-|z|^2) dbar u - f||_2 / ||f||_2`.
    pub residual_ratio: f64,
    /// `||f||_{p,Z}`.
    pub input_norm: f64,
    /// `||u||_{p,Z}`.
    pub solution_norm: f64,
    pub bound_ratio: f64,
    pub tolerance: f64,
    pub success: bool,
}

pub const DEFAULT_TOLERANCE: f64 = 5e-3;
/// Relative step of the central differences used for residuals.
pub const FD_STEP: f64 = 1e-4;

/// Difference step at `z`, shrinking with the hyperbolic scale `1 - |z|^2`.
pub fn fd_step(z: C64) -> f64 {
    FD_STEP * (1.0 - z.norm_sqr())
}

/// One node of the correction rule: `coef = omega phi(w) (1-|w|^2)^m / pi`
/// and, per neighboring center, `(factor index, beta_j(w), 1 / g_j(w))`.
struct CorrectionNode {
    w: C64,
    coef: C64,
    terms: Vec<(usize, f64, C64)>,
}

/// A solution `u`, evaluable anywhere in the disk, with its samples on the
/// grid and the report of the solve.
pub struct DbarSolution {
    engine: CauchyEngine,
    /// `g_j` of the centers meeting the support; empty for the plain solver.
    factors: Vec<GaEntry>,
    correction: Vec<CorrectionNode>,
    pub values: Vec<C64>,
    pub report: SolverReport,
}

impl DbarSolution {
    pub fn eval(&self, z: C64) -> C64 {
        let plain = self.engine.eval(z);
        if self.factors.is_empty() {
            return plain;
        }
        let gz: Vec<C64> = self.factors.iter().map(|g| g.eval(z)).collect();
        let m = self.engine.m();
        let mut acc = C64::new(0.0, 0.0);
        for node in &self.correction {
            let mut s = C64::new(0.0, 0.0);
            for &(j, beta, ginv) in &node.terms {
                s += (gz[j] * ginv - 1.0) * beta;
            }
            let mut k = node.coef / (z - node.w);
            if m != 0 {
                k /= (1.0 - node.w.conj() * z).powi(m);
            }
            acc += k * s;
        }
        plain + acc
    }

    /// Number of centers whose `g_j` enters the solution.
    pub fn centers_used(&self) -> usize {
        self.factors.len()
    }
}

/// `(||(1-|z|^2) dbar u - f||_2, ||f||_2)` over grid nodes with
/// `|z| <= 1 - 2 FD_STEP`, with `dbar` by central differences of step [`fd_step`].
pub fn residual_parts(u: &(dyn Fn(C64) -> C64 + Sync), f: &(dyn Fn(C64) -> C64 + Sync), grid: &DiskGrid) -> (f64, f64) {
    let limit = 1.0 - 2.0 * FD_STEP;
    let terms: Vec<(f64, f64)> = grid
        .nodes
        .par_iter()
        .zip(&grid.weights)
        .map(|(&z, &w)| {
            if z.norm() > limit {
                return (0.0, 0.0);
            }
            let fz = f(z);
            let d = (1.0 - z.norm_sqr()) * dbar_fd(u, z, fd_step(z)) - fz;
            (w * d.norm_sqr(), w * fz.norm_sqr())
        })
        .collect();
    let num = pairwise_sum(&terms.iter().map(|t| t.0).collect::<Vec<_>>()).sqrt();
    let den = pairwise_sum(&terms.iter().map(|t| t.1).collect::<Vec<_>>()).sqrt();
    (num, den)
}

/// `||(1-|z|^2) dbar u - f||_2 / ||f||_2`; the unnormalized defect when
/// `f` vanishes.
pub fn residual(u: &(dyn Fn(C64) -> C64 + Sync), f: &(dyn Fn(C64) -> C64 + Sync), grid: &DiskGrid) -> f64 {
    let (num, den) = residual_parts(u, f, grid);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn finish(
    engine: CauchyEngine,
    factors: Vec<GaEntry>,
    correction: Vec<CorrectionNode>,
    source: &Source,
    z_set: &PointSet<f64>,
    p: f64,
    grid: &DiskGrid,
    tolerance: f64,
) -> Result<DbarSolution> {
    let mut sol = DbarSolution {
        engine,
        factors,
        correction,
        values: Vec::new(),
        report: SolverReport {
            p,
            z_count: z_set.total(),
            m: 0,
            n_radial: grid.n_radial,
            depth: grid.depth,
            residual_ratio: 0.0,
            input_norm: 0.0,
            solution_norm: 0.0,
            bound_ratio: 0.0,
            tolerance,
            success: false,
        },
    };
    sol.report.m = sol.engine.m();
    sol.values = grid.nodes.par_iter().map(|&z| sol.eval(z)).collect();
    let weight = WeightEval::new(z_set);
    let fs: Vec<C64> = grid.sample(|z| source.eval(z));
    let input_norm = lp_norm(&fs, &weight, p, grid)?;
    let solution_norm = lp_norm(&sol.values, &weight, p, grid)?;
    let u = |z: C64| sol.eval(z);
    let f = |z: C64| source.eval(z);
    let residual_ratio = residual(&u, &f, grid);
    let bound_ratio = if input_norm > 0.0 { solution_norm / input_norm } else { 0.0 };
    sol.report.residual_ratio = residual_ratio;
    sol.report.input_norm = input_norm;
    sol.report.solution_norm = solution_norm;
    sol.report.bound_ratio = bound_ratio;
    sol.report.success = [residual_ratio, input_norm, solution_norm, bound_ratio].iter().all(|v| v.is_finite())
        && residual_ratio <= tolerance;
    Ok(sol)
}

/// Options shared by both solvers.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub m: i32,
    pub p: f64,
    pub rule: CauchyRule,
    pub tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { m: 2, p: 2.0, rule: CauchyRule::default(), tolerance: DEFAULT_TOLERANCE }
    }
}

/// The modified Cauchy transform of `f / (1 - |w|^2)`. Norms in the report
/// use the weight of `z_set`.
pub fn solve_plain(
    source: &Source,
    z_set: &PointSet<f64>,
    grid: &DiskGrid,
    opts: &SolveOptions,
) -> Result<DbarSolution> {
    let pieces = source.parts().iter().map(|p| p.piece()).collect();
    let engine = CauchyEngine::new(pieces, opts.m, opts.rule)?;
    finish(engine, Vec::new(), Vec::new(), source, z_set, opts.p, grid, opts.tolerance)
}

/// The patched solution operator. The family must be built on the centers
/// of the partition, in the same order; only centers whose disk meets the
/// support of `f` are used, and each of those must have succeeded. The
/// support of `f` must lie in the region covered by the partition.
pub fn solve_patched(
    source: &Source,
    z_set: &PointSet<f64>,
    family: &GaFamily,
    partition: &PartitionOfUnity,
    grid: &DiskGrid,
    opts: &SolveOptions,
) -> Result<DbarSolution> {
    ensure!(
        family.entries.len() == partition.len(),
        Error::Parameter(format!("family has {} centers, partition {}", family.entries.len(), partition.len()))
    );
    ensure!(
        (family.p - opts.p).abs() <= 1e-12,
        Error::Parameter(format!("family built for p = {}, solving with p = {}", family.p, opts.p))
    );
    ensure!(
        source.extent() <= partition.rmax,
        Error::Coverage(format!("support of f reaches beyond the partition radius {}", partition.rmax))
    );
    let needed = needed_centers(source, partition);
    let mut slot = vec![usize::MAX; partition.len()];
    let mut factors = Vec::with_capacity(needed.len());
    for &j in &needed {
        let entry = match &family.entries[j] {
            Ok(e) => e.clone(),
            Err(msg) => return Err(Error::Numeric(format!("family center {j} failed: {msg}"))),
        };
        ensure!(
            (entry.center - partition.centers()[j]).norm() <= 1e-12,
            Error::Parameter(format!("family center {j} does not match the partition"))
        );
        slot[j] = factors.len();
        factors.push(entry);
    }

    let m = opts.m;
    let rule: Vec<(C64, f64)> =
        source.parts().iter().flat_map(|p| disk_rule(p.center, p.radius, opts.rule.n_rho, opts.rule.n_theta)).collect();
    let correction: Vec<CorrectionNode> = rule
        .into_par_iter()
        .filter_map(|(w, om)| {
            let fw = source.eval(w);
            if fw == C64::new(0.0, 0.0) {
                return None;
            }
            let one_minus = 1.0 - w.norm_sqr();
            let coef = fw * one_minus.powi(m - 1) * (om / PI);
            let terms = partition
                .neighbors(w)
                .map(|j| (slot[j], partition.beta(j, w), 1.0 / factors[slot[j]].eval(w)))
                .filter(|t| t.1 > 0.0)
                .collect();
            Some(CorrectionNode { w, coef, terms })
        })
        .collect();

    let pieces = source.parts().iter().map(|p| p.piece()).collect();
    let engine = CauchyEngine::new(pieces, m, opts.rule)?;
    finish(engine, factors, correction, source, z_set, opts.p, grid, opts.tolerance)
}

/// Centers whose disk `D(a_j, eta)` meets the support of `f`.
fn needed_centers(source: &Source, partition: &PartitionOfUnity) -> Vec<usize> {
    (0..partition.len())
        .filter(|&j| {
            let (c, r) =
                PseudoDisk::new(partition.centers()[j], partition.eta()).expect("valid disk").euclidean_params();
            source.parts().iter().any(|p| (c - p.center).norm() < r + p.radius)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::{build_ga_family, GaSettings};
    use crate::geometry::build_net;

    fn grid() -> DiskGrid {
        DiskGrid::build(1.0, 20, &[]).unwrap()
    }

    #[test]
    fn profile_is_c1() {
        assert_eq!(bump_profile(0.3), 1.0);
        assert_eq!(bump_profile(1.2), 0.0);
        let h = 1e-7;
        for s in [0.5, 1.0] {
            let left = (bump_profile(s) - bump_profile(s - h)) / h;
            let right = (bump_profile(s + h) - bump_profile(s)) / h;
            assert!(left.abs() < 1e-5 && right.abs() < 1e-5);
        }
    }

    #[test]
    fn partition_sums_to_one() {
        let net = build_net(0.3, 0.9).unwrap();
        let g = grid();
        let pu = PartitionOfUnity::build(&net, &g).unwrap();
        let mut worst: f64 = 0.0;
        for &z in g.nodes.iter().filter(|z| z.norm() <= 0.9) {
            worst = worst.max((pu.total(z) - 1.0).abs());
            for j in pu.neighbors(z) {
                let b = pu.beta(j, z);
                assert!((0.0..=1.0).contains(&b));
            }
        }
        assert!(worst < 1e-12);
        // neighbor search agrees with brute force
        for &z in g.nodes.iter().step_by(37) {
            let fast: Vec<usize> = pu.neighbors(z).collect();
            let slow: Vec<usize> = (0..pu.len()).filter(|&j| psi(pu.centers()[j], z) < pu.eta()).collect();
            assert_eq!(fast, slow);
        }
        let c = pu.gradient_constant();
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn single_center_partition() {
        let net = CoveringNet { centers: PointSet::from_complex(&[C64::new(0.0, 0.0)]).unwrap(), eta: 0.9, rmax: 0.4 };
        let pu = PartitionOfUnity::build(&net, &grid()).unwrap();
        assert_eq!(pu.beta(0, C64::new(0.2, 0.1)), 1.0);
        let sparse = CoveringNet { rmax: 0.95, ..net };
        assert!(PartitionOfUnity::build(&sparse, &grid()).is_err());
    }

    #[test]
    fn residual_examples() {
        let g = grid();
        let zbar = |z: C64| z.conj();
        let f = |z: C64| C64::new(1.0 - z.norm_sqr(), 0.0);
        assert!(residual(&zbar, &f, &g) < 2e-3);
        let cube = |z: C64| z * z * z;
        let zero = |_: C64| C64::new(0.0, 0.0);
        let un = g.integrate(|z| (z * z * z).norm_sqr()).sqrt();
        assert!(residual(&cube, &zero, &g) <= 2e-3 * un);
        assert_eq!(residual(&zero, &zero, &g), 0.0);
    }

    #[test]
    fn plain_solver_examples() {
        let g = grid();
        let opts = SolveOptions { m: 0, ..Default::default() };
        let zero = solve_plain(&Source::zero(), &PointSet::empty(), &g, &opts).unwrap();
        assert!(zero.values.iter().all(|v| v.norm() == 0.0));

        let src = Source::bump(C64::new(0.2, -0.1), 0.4, C64::new(1.0, 0.5)).unwrap();
        let s0 = solve_plain(&src, &PointSet::empty(), &g, &opts).unwrap();
        assert!(s0.report.residual_ratio <= 2e-3, "{:?}", s0.report);
        assert!(s0.report.success);
        let s2 = solve_plain(&src, &PointSet::empty(), &g, &SolveOptions::default()).unwrap();
        assert!(s2.report.residual_ratio <= 2e-3, "{:?}", s2.report);
        // the difference is analytic
        let diff = |z: C64| s2.eval(z) - s0.eval(z);
        let zero_f = |_: C64| C64::new(0.0, 0.0);
        let dn = g.integrate(|z| (s2.eval(z) - s0.eval(z)).norm_sqr()).sqrt();
        assert!(residual(&diff, &zero_f, &g) <= 2e-3 * dn);
    }

    #[test]
    fn patched_with_constant_family_matches_plain() {
        let g = grid();
        let net = build_net(0.35, 0.8).unwrap();
        let pu = PartitionOfUnity::build(&net, &g).unwrap();
        let settings = GaSettings { n_radial: 16, ..GaSettings::new(2.0, 0.35, 0.1) };
        let fam = build_ga_family(&PointSet::empty(), pu.centers(), &settings).unwrap();
        let src = Source::bump(C64::new(0.1, 0.2), 0.3, C64::new(1.0, 0.0)).unwrap();
        let opts = SolveOptions::default();
        let plain = solve_plain(&src, &PointSet::empty(), &g, &opts).unwrap();
        let patched = solve_patched(&src, &PointSet::empty(), &fam, &pu, &g, &opts).unwrap();
        assert!(patched.report.success, "{:?}", patched.report);
        let mut worst: f64 = 0.0;
        for (a, b) in plain.values.iter().zip(&patched.values) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn patched_is_linear() {
        let g = DiskGrid::build(1.0, 12, &[]).unwrap();
        let net = build_net(0.35, 0.8).unwrap();
        let pu = PartitionOfUnity::build(&net, &g).unwrap();
        let settings = GaSettings { n_radial: 16, ..GaSettings::new(2.0, 0.35, 0.1) };
        let fam = build_ga_family(&PointSet::empty(), pu.centers(), &settings).unwrap();
        let f1 = Source::bump(C64::new(0.1, 0.2), 0.3, C64::new(1.0, 0.0)).unwrap();
        let f2 = Source::bump(C64::new(-0.3, 0.0), 0.2, C64::new(0.0, 2.0)).unwrap();
        let f12 = f1.sum(&f2);
        let opts = SolveOptions::default();
        let u1 = solve_patched(&f1, &PointSet::empty(), &fam, &pu, &g, &opts).unwrap();
        let u2 = solve_patched(&f2, &PointSet::empty(), &fam, &pu, &g, &opts).unwrap();
        let u12 = solve_patched(&f12, &PointSet::empty(), &fam, &pu, &g, &opts).unwrap();
        for i in (0..g.len()).step_by(7) {
            let d = u12.values[i] - u1.values[i] - u2.values[i];
            assert!(d.norm() < 1e-12 * (1.0 + u12.values[i].norm()), "{d}");
        }
    }
}
