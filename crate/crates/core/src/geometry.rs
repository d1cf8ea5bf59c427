//! Pseudo-hyperbolic geometry of the unit disk.
//!
//! All maps take and return plain complex numbers; [`Point`] is the validated
//! wrapper used for stored sequences and parsed input.

use std::cmp::Ordering;

use num_complex::Complex;

use crate::error::{ensure, Error, Result};
use crate::scalar::Real;

/// A point strictly inside the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<T>(Complex<T>);

impl<T: Real> Point<T> {
    /// Validated constructor. Rejects non-finite input and points within
    /// [`Real::boundary_guard`] of the unit circle.
    pub fn new(re: T, im: T) -> Result<Self> {
        Self::from_complex(Complex::new(re, im))
    }

    pub fn from_complex(z: Complex<T>) -> Result<Self> {
        let (re, im) = (z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN));
        ensure!(z.re.is_finite() && z.im.is_finite(), Error::NonFinite(format!("({re}, {im})")));
        ensure!(z.norm() < T::one() - T::boundary_guard(), Error::OutsideDisk { re, im });
        Ok(Point(z))
    }

    /// Wraps a value already known to be in the disk (e.g. a Mobius image).
    #[inline]
    pub fn from_complex_unchecked(z: Complex<T>) -> Self {
        Point(z)
    }

    #[inline]
    pub fn z(self) -> Complex<T> {
        self.0
    }

    #[inline]
    pub fn re(self) -> T {
        self.0.re
    }

    #[inline]
    pub fn im(self) -> T {
        self.0.im
    }
}

impl<T> From<Point<T>> for Complex<T> {
    fn from(p: Point<T>) -> Self {
        p.0
    }
}

/// Canonical order: modulus first, then argument in `(-pi, pi]`.
fn canonical_cmp<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    let by_mod = a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap_or(Ordering::Equal);
    by_mod.then_with(|| a.arg().partial_cmp(&b.arg()).unwrap_or(Ordering::Equal))
}

/// Finite sequence of disk points with multiplicities, kept in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet<T> {
    points: Vec<Point<T>>,
    multiplicities: Vec<u32>,
}

impl<T: Real> Default for PointSet<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Real> PointSet<T> {
    pub fn empty() -> Self {
        PointSet { points: Vec::new(), multiplicities: Vec::new() }
    }

    pub fn new(points: Vec<Point<T>>) -> Self {
        let n = points.len();
        Self::with_multiplicities(points, vec![1; n]).expect("unit multiplicities are valid")
    }

    pub fn with_multiplicities(points: Vec<Point<T>>, multiplicities: Vec<u32>) -> Result<Self> {
        ensure!(
            points.len() == multiplicities.len(),
            Error::Parameter("points and multiplicities differ in length".into())
        );
        ensure!(multiplicities.iter().all(|&m| m > 0), Error::Parameter("multiplicities must be positive".into()));
        let mut pairs: Vec<_> = points.into_iter().zip(multiplicities).collect();
        pairs.sort_by(|(a, _), (b, _)| canonical_cmp(&a.0, &b.0));
        let (points, multiplicities) = pairs.into_iter().unzip();
        Ok(PointSet { points, multiplicities })
    }

    /// Builds a set from raw complex values, validating each one.
    pub fn from_complex(values: &[Complex<T>]) -> Result<Self> {
        let pts = values.iter().map(|&z| Point::from_complex(z)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(pts))
    }

    /// Number of distinct entries.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points counted with multiplicity.
    pub fn total(&self) -> usize {
        self.multiplicities.iter().map(|&m| m as usize).sum()
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    /// `(point, multiplicity)` pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Complex<T>, u32)> + '_ {
        self.points.iter().map(|p| p.0).zip(self.multiplicities.iter().copied())
    }

    /// Points as complex numbers, one entry per distinct point.
    pub fn values(&self) -> Vec<Complex<T>> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        self.points.iter().any(|p| p.0 == z)
    }

    /// Image of the set under `M_b`, multiplicities preserved.
    pub fn moebius_image(&self, b: Complex<T>) -> Self {
        let pts = self.points.iter().map(|p| Point(moebius(b, p.0))).collect();
        Self::with_multiplicities(pts, self.multiplicities.clone()).expect("same multiplicities")
    }

    /// Entries satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(Complex<T>) -> bool) -> Self {
        let (points, multiplicities) =
            self.points.iter().zip(&self.multiplicities).filter(|(p, _)| keep(p.0)).map(|(p, m)| (*p, *m)).unzip();
        PointSet { points, multiplicities }
    }

    /// Set difference counted with multiplicity. Errors if `other` is not a
    /// sub-multiset of `self`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        let mut mults = self.multiplicities.clone();
        for (z, m) in other.iter() {
            let idx = self
                .points
                .iter()
                .position(|p| p.0 == z)
                .ok_or_else(|| Error::Parameter("point to remove is not in the set".into()))?;
            ensure!(mults[idx] >= m, Error::Parameter("removal exceeds multiplicity".into()));
            mults[idx] -= m;
        }
        let (points, multiplicities) =
            self.points.iter().zip(mults).filter(|(_, m)| *m > 0).map(|(p, m)| (*p, m)).unzip();
        Ok(PointSet { points, multiplicities })
    }

    /// Union counted with multiplicity.
    pub fn union(&self, other: &Self) -> Self {
        let mut pts = self.points.clone();
        let mut mults = self.multiplicities.clone();
        for (z, m) in other.iter() {
            match pts.iter().position(|p| p.0 == z) {
                Some(i) => mults[i] += m,
                None => {
                    pts.push(Point(z));
                    mults.push(m);
                }
            }
        }
        Self::with_multiplicities(pts, mults).expect("positive multiplicities")
    }
}

/// Pseudo-hyperbolic distance `|z - w| / |1 - conj(w) z|`.
#[inline]
pub fn psi<T: Real>(z: Complex<T>, w: Complex<T>) -> T {
    let num = (z - w).norm();
    if num == T::zero() {
        return T::zero();
    }
    num / (Complex::new(T::one(), T::zero()) - w.conj() * z).norm()
}

/// `1 - psi(z, w)^2`, computed as `(1-|z|^2)(1-|w|^2)/|1 - conj(w) z|^2`
/// which keeps full relative accuracy when the points are far apart.
#[inline]
pub fn one_minus_psi_sq<T: Real>(z: Complex<T>, w: Complex<T>) -> T {
    let one = T::one();
    (one - z.norm_sqr()) * (one - w.norm_sqr()) / (Complex::new(one, T::zero()) - w.conj() * z).norm_sqr()
}

/// The involutive disk automorphism `M_a(z) = (a - z) / (1 - conj(a) z)`.
#[inline]
pub fn moebius<T: Real>(a: Complex<T>, z: Complex<T>) -> Complex<T> {
    (a - z) / (Complex::new(T::one(), T::zero()) - a.conj() * z)
}

/// Point with the same argument as `a` and `1 - |p|^2 = lambda (1 - |a|^2)`.
pub fn p_lambda<T: Real>(a: Complex<T>, lambda: T) -> Complex<T> {
    let r = a.norm();
    if r == T::zero() {
        return a;
    }
    let s = (T::one() - lambda * (T::one() - r * r)).sqrt();
    a * (s / r)
}

/// Inverse of [`p_lambda`]: the point `b` with `p_lambda(b) = a`. Fails when
/// `1 - |a|^2 > lambda`, i.e. the preimage would have to pass through the
/// origin.
pub fn p_lambda_inverse<T: Real>(a: Complex<T>, lambda: T) -> Result<Complex<T>> {
    let r = a.norm();
    if r == T::zero() {
        return Ok(a);
    }
    let s2 = T::one() - (T::one() - r * r) / lambda;
    ensure!(s2 > T::zero(), Error::Parameter(format!("no p_lambda preimage for |a| = {} at lambda = {}", r, lambda)));
    Ok(a * (s2.sqrt() / r))
}

/// Pseudo-hyperbolic disk `D(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoDisk<T> {
    pub center: Complex<T>,
    pub radius: T,
}

impl<T: Real> PseudoDisk<T> {
    pub fn new(center: Complex<T>, radius: T) -> Result<Self> {
        ensure!(
            radius > T::zero() && radius < T::one(),
            Error::Parameter(format!("pseudo-hyperbolic radius {radius} not in (0,1)"))
        );
        ensure!(
            center.norm() < T::one(),
            Error::OutsideDisk {
                re: center.re.to_f64().unwrap_or(f64::NAN),
                im: center.im.to_f64().unwrap_or(f64::NAN)
            }
        );
        Ok(PseudoDisk { center, radius })
    }

    /// Euclidean center and radius of the disk.
    pub fn euclidean_params(&self) -> (Complex<T>, T) {
        let one = T::one();
        let r2 = self.radius * self.radius;
        let z2 = self.center.norm_sqr();
        let den = one - r2 * z2;
        (self.center * ((one - r2) / den), self.radius * (one - z2) / den)
    }

    pub fn contains(&self, w: Complex<T>) -> bool {
        psi(self.center, w) < self.radius
    }
}

/// Minimum pairwise pseudo-hyperbolic distance; zero if any point repeats.
pub fn separation_constant<T: Real>(set: &PointSet<T>) -> Result<T> {
    ensure!(set.total() >= 2, Error::TooFewPoints { need: 2, got: set.total() });
    if set.multiplicities().iter().any(|&m| m > 1) {
        return Ok(T::zero());
    }
    let pts = set.values();
    let mut best = T::infinity();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            let d = psi(a, b);
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Maximal `eta/2`-separated point set covering `{|z| <= rmax}` at radius `eta`.
#[derive(Clone, Debug)]
pub struct CoveringNet<T> {
    pub centers: PointSet<T>,
    pub eta: T,
    pub rmax: T,
}

impl<T: Real> CoveringNet<T> {
    /// Largest distance from any sample to its nearest center.
    pub fn max_cover_distance(&self, samples: &[Complex<T>]) -> T {
        let centers = self.centers.values();
        samples.iter().map(|&z| centers.iter().map(|&c| psi(z, c)).fold(T::infinity(), T::min)).fold(T::zero(), T::max)
    }
}

/// Polar candidate grid with uniform pseudo-hyperbolic spacing `h`: ring
/// radii step by `h` in `psi`, angular step `h (1 - rho^2) / rho`.
pub fn hyperbolic_candidates<T: Real>(h: T, rmax: T) -> Vec<Vec<Complex<T>>> {
    let one = T::one();
    let two_pi = T::TAU();
    let mut rings = vec![vec![Complex::new(T::zero(), T::zero())]];
    let mut rho = T::zero();
    loop {
        let next = (rho + h) / (one + h * rho);
        let (next, last) = if next >= rmax { (rmax, true) } else { (next, false) };
        if next > rho {
            let n = (two_pi * next / (h * (one - next * next))).ceil().to_usize().unwrap_or(1).max(1);
            let step = two_pi / T::from_usize(n).unwrap();
            let ring = (0..n).map(|k| Complex::from_polar(next, step * T::from_usize(k).unwrap())).collect();
            rings.push(ring);
        }
        rho = next;
        if last {
            break;
        }
    }
    rings
}

/// Greedy maximal `eta/2`-separated net on the default candidate grid
/// (resolution `eta/8`).
pub fn build_net<T: Real>(eta: T, rmax: T) -> Result<CoveringNet<T>> {
    build_net_with_resolution(eta, rmax, eta / T::lit(8.0))
}

pub fn build_net_with_resolution<T: Real>(eta: T, rmax: T, resolution: T) -> Result<CoveringNet<T>> {
    ensure!(eta > T::zero() && eta < T::one(), Error::Parameter(format!("eta = {eta} not in (0,1)")));
    ensure!(rmax > T::zero() && rmax < T::one(), Error::Parameter(format!("rmax = {rmax} not in (0,1)")));
    ensure!(
        resolution > T::zero() && resolution < eta / T::lit(2.0),
        Error::Parameter(format!(
            "eta/2 = {} is not above the candidate grid resolution {resolution}",
            eta / T::lit(2.0)
        ))
    );
    let pts = greedy_separated(eta / T::lit(2.0), rmax, resolution);
    Ok(CoveringNet { centers: PointSet::new(pts), eta, rmax })
}

/// Greedy maximal set with pseudo-hyperbolic separation `sep` inside
/// `{|z| <= rmax}`, scanning the candidate grid from the origin outwards.
pub fn build_separated<T: Real>(sep: T, rmax: T) -> Result<PointSet<T>> {
    ensure!(sep > T::zero() && sep < T::one(), Error::Parameter(format!("separation {sep} not in (0,1)")));
    ensure!(rmax > T::zero() && rmax < T::one(), Error::Parameter(format!("rmax = {rmax} not in (0,1)")));
    Ok(PointSet::new(greedy_separated(sep, rmax, sep / T::lit(16.0))))
}

fn greedy_separated<T: Real>(half: T, rmax: T, resolution: T) -> Vec<Point<T>> {
    let rings = hyperbolic_candidates(resolution, rmax);
    let ring_depth: Vec<T> = rings.iter().map(|r| r[0].norm().atanh()).collect();
    let reach = half.atanh();

    // accepted centers bucketed by ring; only rings within hyperbolic
    // distance atanh(eta/2) can block a candidate
    let mut accepted: Vec<Vec<Complex<T>>> = vec![Vec::new(); rings.len()];
    for (k, ring) in rings.iter().enumerate() {
        for &z in ring {
            let mut free = true;
            'scan: for i in (0..=k).rev() {
                if ring_depth[k] - ring_depth[i] >= reach {
                    break;
                }
                for &c in &accepted[i] {
                    if psi(z, c) < half {
                        free = false;
                        break 'scan;
                    }
                }
            }
            if free {
                accepted[k].push(z);
            }
        }
    }
    accepted.into_iter().flatten().map(Point).collect()
}
