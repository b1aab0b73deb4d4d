//! Scale-mixture exponent measures `mu(A) = (mu1 x mu2)({(r, m) : r m in A})`
//! with a radial measure `mu1` on `(0, inf)` and an angular probability law
//! `mu2` on the non-negative unit sphere of a p-norm.
//!
//! The radial PRM is realized as `mu1^{<-}(Gamma_i)` over the arrival
//! times `Gamma_i` of a unit-rate Poisson process on `[0, inf)`.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{check_band, check_cut, Atom, ExponentMeasure, Location};
use crate::error::{domain, Error, Result};
use crate::quadrature::integrate;
use crate::samplers::{exp_variate, RngStream};

const INVERSE_TAIL_TOL: f64 = 1e-12;
const MASS_REL_TOL: f64 = 1e-9;

/// A user-supplied radial tail `r -> mu1([r, inf))`, inverted numerically.
#[derive(Clone)]
pub struct CustomTail {
    tail: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `mu1((0, inf))`, possibly infinite.
    total: f64,
}

impl CustomTail {
    pub fn new(tail: impl Fn(f64) -> f64 + Send + Sync + 'static, total: f64) -> Self {
        Self {
            tail: Arc::new(tail),
            total,
        }
    }
}

impl fmt::Debug for CustomTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomTail").field("total", &self.total).finish_non_exhaustive()
    }
}

/// The radial measure `mu1`, described by its tail `r -> mu1([r, inf))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialMeasure {
    /// `scale * s^{-2} ds`: tail `scale / r`.
    Frechet { scale: f64 },
    /// Tail `scale * r^{-index}`.
    Power { scale: f64, index: f64 },
    /// `weight * delta_radius`.
    Point { radius: f64, weight: f64 },
    /// Tail `weight * exp(-r / scale)`; finite total mass.
    Exponential { weight: f64, scale: f64 },
    /// `base` restricted to `[lower, inf)`.
    Truncated { base: Box<RadialMeasure>, lower: f64 },
    #[serde(skip)]
    Custom(CustomTail),
}

impl RadialMeasure {
    pub fn frechet(scale: f64) -> Self {
        RadialMeasure::Frechet { scale }
    }

    pub fn truncated(self, lower: f64) -> Self {
        RadialMeasure::Truncated {
            base: Box::new(self),
            lower,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                domain(format!("radial {name} must be finite and positive, got {v}"))
            }
        };
        match self {
            RadialMeasure::Frechet { scale } => positive("scale", *scale),
            RadialMeasure::Power { scale, index } => {
                positive("scale", *scale)?;
                positive("index", *index)
            }
            RadialMeasure::Point { radius, weight } => {
                positive("radius", *radius)?;
                positive("weight", *weight)
            }
            RadialMeasure::Exponential { weight, scale } => {
                positive("weight", *weight)?;
                positive("scale", *scale)
            }
            RadialMeasure::Truncated { base, lower } => {
                positive("lower", *lower)?;
                base.validate()
            }
            RadialMeasure::Custom(c) => {
                if c.total.is_nan() || c.total <= 0.0 {
                    return domain("custom radial tail needs positive total mass");
                }
                Ok(())
            }
        }
    }

    /// `mu1([r, inf))` for `r > 0`.
    pub fn tail(&self, r: f64) -> f64 {
        if r.is_infinite() {
            return 0.0;
        }
        match self {
            RadialMeasure::Frechet { scale } => scale / r,
            RadialMeasure::Power { scale, index } => scale * r.powf(-index),
            RadialMeasure::Point { radius, weight } => {
                if r <= *radius {
                    *weight
                } else {
                    0.0
                }
            }
            RadialMeasure::Exponential { weight, scale } => weight * (-r / scale).exp(),
            RadialMeasure::Truncated { base, lower } => base.tail(r.max(*lower)),
            RadialMeasure::Custom(c) => (c.tail)(r),
        }
    }

    /// `mu1((0, inf))`.
    pub fn total_mass(&self) -> f64 {
        match self {
            RadialMeasure::Frechet { .. } | RadialMeasure::Power { .. } => f64::INFINITY,
            RadialMeasure::Point { weight, .. } | RadialMeasure::Exponential { weight, .. } => {
                *weight
            }
            RadialMeasure::Truncated { base, lower } => base.tail(*lower),
            RadialMeasure::Custom(c) => c.total,
        }
    }

    /// Generalized inverse `sup{s > 0 : mu1([s, inf)) >= t}`, with `0` for
    /// an empty set (no radius carries that much tail mass).
    pub fn inverse_tail(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return f64::INFINITY;
        }
        match self {
            RadialMeasure::Frechet { scale } => scale / t,
            RadialMeasure::Power { scale, index } => (scale / t).powf(1.0 / index),
            RadialMeasure::Point { radius, weight } => {
                if t <= *weight {
                    *radius
                } else {
                    0.0
                }
            }
            RadialMeasure::Exponential { weight, scale } => {
                if t < *weight {
                    scale * (weight / t).ln()
                } else {
                    0.0
                }
            }
            RadialMeasure::Truncated { base, lower } => {
                if t <= base.tail(*lower) {
                    base.inverse_tail(t).max(*lower)
                } else {
                    0.0
                }
            }
            RadialMeasure::Custom(c) => bisect_inverse_tail(&*c.tail, c.total, t),
        }
    }
}

/// Monotone bisection for the generalized inverse of a non-increasing tail.
fn bisect_inverse_tail(tail: &dyn Fn(f64) -> f64, total: f64, t: f64) -> f64 {
    if total < t {
        return 0.0;
    }
    let mut hi = 1.0;
    while tail(hi) >= t {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 2.0;
    while tail(lo) < t {
        lo /= 2.0;
        if lo < 1e-300 {
            return 0.0;
        }
    }
    while hi - lo > INVERSE_TAIL_TOL * lo.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if tail(mid) >= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Angular probability law on the non-negative unit sphere.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularLaw {
    /// Dirichlet law on the 1-norm simplex. All ones = uniform.
    Dirichlet { alphas: Vec<f64> },
    /// Finitely many directions, normalized to unit `p`-norm on construction.
    Discrete {
        points: Vec<Vec<f64>>,
        probs: Vec<f64>,
        #[serde(default = "one")]
        p: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl AngularLaw {
    pub fn uniform_simplex(d: usize) -> Self {
        AngularLaw::Dirichlet {
            alphas: vec![1.0; d],
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            AngularLaw::Dirichlet { alphas } => alphas.len(),
            AngularLaw::Discrete { points, .. } => points.first().map_or(0, Vec::len),
        }
    }

    fn normalized(self) -> Result<Self> {
        match self {
            AngularLaw::Dirichlet { alphas } => {
                if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    return domain("Dirichlet parameters must be positive and finite");
                }
                Ok(AngularLaw::Dirichlet { alphas })
            }
            AngularLaw::Discrete { points, probs, p } => {
                if points.is_empty() || points.len() != probs.len() {
                    return domain("discrete angular law needs matching points and probabilities");
                }
                if !(p >= 1.0) {
                    return domain(format!("p-norm needs p >= 1, got {p}"));
                }
                let total: f64 = probs.iter().sum();
                if probs.iter().any(|q| !(*q >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                    return domain("angular probabilities must be non-negative and sum to 1");
                }
                let d = points[0].len();
                let mut out = Vec::with_capacity(points.len());
                for pt in points {
                    if pt.len() != d || d == 0 {
                        return domain("angular points must share a positive dimension");
                    }
                    if pt.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                        return domain("angular points must be non-negative");
                    }
                    let norm = if p.is_infinite() {
                        pt.iter().cloned().fold(0.0, f64::max)
                    } else {
                        pt.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
                    };
                    if !(norm > 0.0) {
                        return domain("angular points must be non-zero");
                    }
                    out.push(pt.iter().map(|x| x / norm).collect());
                }
                Ok(AngularLaw::Discrete {
                    points: out,
                    probs,
                    p,
                })
            }
        }
    }

    fn sample(&self, stream: &mut RngStream) -> Result<Vec<f64>> {
        match self {
            AngularLaw::Dirichlet { alphas } => {
                let mut g = Vec::with_capacity(alphas.len());
                for &a in alphas {
                    let v = if a == 1.0 {
                        exp_variate(stream, 1.0)?
                    } else {
                        Gamma::new(a, 1.0)
                            .map_err(|e| Error::Domain(format!("Gamma({a}): {e}")))?
                            .sample(stream)
                    };
                    g.push(v);
                }
                let s: f64 = g.iter().sum();
                Ok(g.into_iter().map(|v| v / s).collect())
            }
            AngularLaw::Discrete { points, probs, .. } => {
                let mut pick = stream.uniform();
                for (pt, q) in points.iter().zip(probs) {
                    if pick < *q {
                        return Ok(pt.clone());
                    }
                    pick -= q;
                }
                Ok(points.last().expect("non-empty").clone())
            }
        }
    }

    /// `P(m_i > 0)` for coordinate `i` (0-based).
    fn positive_probability(&self, i: usize) -> f64 {
        match self {
            AngularLaw::Dirichlet { .. } => 1.0,
            AngularLaw::Discrete { points, probs, .. } => points
                .iter()
                .zip(probs)
                .filter(|(pt, _)| pt[i] > 0.0)
                .map(|(_, q)| q)
                .sum(),
        }
    }
}

/// Scale-mixture exponent measure on `[0, inf)^d`.
#[derive(Clone, Debug)]
pub struct ScaleMixtureMeasure {
    radial: RadialMeasure,
    angular: AngularLaw,
    d: usize,
}

impl ScaleMixtureMeasure {
    pub fn new(radial: RadialMeasure, angular: AngularLaw) -> Result<Self> {
        radial.validate()?;
        let angular = angular.normalized()?;
        let d = angular.dimension();
        Ok(Self { radial, angular, d })
    }

    /// Max-stable law with unit Fréchet margins: `mu1 = d s^{-2} ds` and the
    /// uniform law on the 1-norm simplex (coordinates with mean `1/d`).
    pub fn unit_frechet(d: usize) -> Result<Self> {
        Self::new(RadialMeasure::frechet(d as f64), AngularLaw::uniform_simplex(d))
    }

    /// Reciprocal Archimedean family: uniform angular law on the simplex.
    pub fn reciprocal_archimedean(radial: RadialMeasure, d: usize) -> Result<Self> {
        Self::new(radial, AngularLaw::uniform_simplex(d))
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn radial(&self) -> &RadialMeasure {
        &self.radial
    }

    pub fn angular(&self) -> &AngularLaw {
        &self.angular
    }

    fn coordinate(&self, loc: &Location) -> Result<usize> {
        match *loc {
            Location::Index(i) if i >= 1 && (i as usize) <= self.d => Ok(i as usize - 1),
            _ => Err(Error::Usage(format!(
                "scale mixture on {} coordinates cannot evaluate {loc:?}",
                self.d
            ))),
        }
    }

    pub(crate) fn draw_atom(&self, radius: f64, stream: &mut RngStream) -> Result<Atom> {
        Ok(Atom::radial(radius, Arc::from(self.angular.sample(stream)?)))
    }

    /// `P(X <= x)` for this measure: `exp(-mu({f : f_i > x_i for some i}))`,
    /// available in closed form for discrete angular laws.
    pub fn joint_cdf(&self, x: &[f64]) -> Result<f64> {
        let AngularLaw::Discrete { points, probs, .. } = &self.angular else {
            return Err(Error::Unsupported(
                "joint CDF is only implemented for discrete angular laws".into(),
            ));
        };
        let mut mass = 0.0;
        for (pt, q) in points.iter().zip(probs) {
            // {r : r m_i > x_i for some i} = (min_i x_i / m_i, inf)
            let r = pt
                .iter()
                .zip(x)
                .filter(|(m, _)| **m > 0.0)
                .map(|(m, xi)| xi / m)
                .fold(f64::INFINITY, f64::min);
            if r <= 0.0 {
                return Ok(0.0);
            }
            mass += q * open_tail(&self.radial, r);
        }
        Ok((-mass).exp())
    }
}

/// `mu1((r, inf))`; differs from the closed tail only at atoms of `mu1`.
fn open_tail(radial: &RadialMeasure, r: f64) -> f64 {
    match radial {
        RadialMeasure::Point { radius, weight } => {
            if r < *radius {
                *weight
            } else {
                0.0
            }
        }
        RadialMeasure::Truncated { base, lower } => {
            if r < *lower {
                base.tail(*lower)
            } else {
                open_tail(base, r)
            }
        }
        other => other.tail(r),
    }
}

fn beta_expectation(a: f64, b: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let ln_norm = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    integrate(
        |m| {
            if m <= 0.0 || m >= 1.0 {
                return 0.0;
            }
            let w = ((a - 1.0) * m.ln() + (b - 1.0) * (-m).ln_1p() - ln_norm).exp();
            w * g(m)
        },
        0.0,
        1.0,
        MASS_REL_TOL,
    )
}

impl ExponentMeasure for ScaleMixtureMeasure {
    fn supports(&self, loc: &Location) -> bool {
        self.coordinate(loc).is_ok()
    }

    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        check_cut(c)?;
        let i = self.coordinate(loc)?;
        match &self.angular {
            AngularLaw::Discrete { points, probs, .. } => Ok(points
                .iter()
                .zip(probs)
                .filter(|(pt, _)| pt[i] > 0.0)
                .map(|(pt, q)| q * self.radial.tail(c / pt[i]))
                .sum()),
            AngularLaw::Dirichlet { alphas } => {
                if alphas.len() == 1 {
                    return Ok(self.radial.tail(c));
                }
                let a = alphas[i];
                let b: f64 = alphas.iter().sum::<f64>() - a;
                match &self.radial {
                    RadialMeasure::Frechet { scale } => Ok(scale * a / (a + b) / c),
                    RadialMeasure::Power { scale, index } => {
                        // E[m^k] for m ~ Beta(a, b)
                        let moment = (ln_gamma(a + index) + ln_gamma(a + b)
                            - ln_gamma(a)
                            - ln_gamma(a + b + index))
                            .exp();
                        Ok(scale * c.powf(-index) * moment)
                    }
                    radial => beta_expectation(a, b, |m| radial.tail(c / m)),
                }
            }
        }
    }

    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>> {
        let i = self.coordinate(loc)?;
        let p = self.angular.positive_probability(i);
        if p == 0.0 {
            return Ok(Some(0.0));
        }
        let total = self.radial.total_mass();
        Ok(total.is_finite().then_some(total * p))
    }

    fn sample_band(
        &self,
        loc: &Location,
        c_lo: f64,
        c_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>> {
        check_band(c_lo, c_hi)?;
        let i = self.coordinate(loc)?;
        let (lo_state, hi_state) = (c_lo, c_hi);
        // Unit-sphere coordinates are at most 1, so r m_i >= c_lo forces r >= c_lo.
        let mut atoms = Vec::new();
        let mut gamma = 0.0;
        loop {
            gamma += exp_variate(stream, 1.0)?;
            let r = self.radial.inverse_tail(gamma);
            if !(r >= lo_state) || r == 0.0 {
                break;
            }
            let atom = self.draw_atom(r, stream)?;
            let v = atom.value(&Location::Index(i as u64 + 1));
            if v >= lo_state && v < hi_state {
                atoms.push(atom);
            }
        }
        Ok(atoms)
    }

    fn sample_positive(&self, loc: &Location, stream: &mut RngStream) -> Result<Vec<Atom>> {
        let i = self.coordinate(loc)?;
        if self.angular.positive_probability(i) == 0.0 {
            return Ok(Vec::new());
        }
        if !self.radial.total_mass().is_finite() {
            return Err(Error::Usage(format!(
                "coordinate {} carries infinite mass; it has no finite positive part",
                i + 1
            )));
        }
        let mut atoms = Vec::new();
        let mut gamma = 0.0;
        loop {
            gamma += exp_variate(stream, 1.0)?;
            let r = self.radial.inverse_tail(gamma);
            if r <= 0.0 {
                break;
            }
            let atom = self.draw_atom(r, stream)?;
            if atom.value(loc) > 0.0 {
                atoms.push(atom);
            }
        }
        Ok(atoms)
    }
}

/// Radial shells `S_n = [1/n, 1/(n-1)) x sphere` consumed in order from a
/// single arrival stream, so the union of all shells is one PRM.
pub struct RadialShells<'a> {
    measure: &'a ScaleMixtureMeasure,
    gamma: f64,
    pending: Option<f64>,
    consumed: usize,
    exhausted: bool,
}

impl<'a> RadialShells<'a> {
    pub fn new(measure: &'a ScaleMixtureMeasure) -> Self {
        Self {
            measure,
            gamma: 0.0,
            pending: None,
            consumed: 0,
            exhausted: false,
        }
    }

    /// Cumulative arrival time consumed so far.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    /// Radius of the next buffered arrival, if one has been drawn.
    pub fn pending_radius(&self) -> Option<f64> {
        self.pending
    }

    /// Upper bound on every coordinate of atoms in shells not yet consumed.
    /// Tighter than the geometric `1/n` because the next arrival is known.
    pub fn remaining_bound(&self) -> f64 {
        if self.exhausted {
            return 0.0;
        }
        match (self.consumed, self.pending) {
            (0, _) => f64::INFINITY,
            (n, Some(r)) => r.min(1.0 / n as f64),
            (n, None) => 1.0 / n as f64,
        }
    }

    fn next_radius(&mut self, stream: &mut RngStream) -> Result<Option<f64>> {
        if self.exhausted {
            return Ok(None);
        }
        if self.pending.is_none() {
            self.gamma += exp_variate(stream, 1.0)?;
            let r = self.measure.radial.inverse_tail(self.gamma);
            if r <= 0.0 {
                self.exhausted = true;
                return Ok(None);
            }
            self.pending = Some(r);
        }
        Ok(self.pending)
    }
}

/// Emit the atoms of shell `n` (1-based, consumed in order).
pub fn sample_radial_shell(
    shells: &mut RadialShells<'_>,
    n: usize,
    stream: &mut RngStream,
) -> Result<Vec<Atom>> {
    if n != shells.consumed + 1 {
        return Err(Error::Usage(format!(
            "shells must be requested in order: expected {}, got {n}",
            shells.consumed + 1
        )));
    }
    let floor = 1.0 / n as f64;
    let mut atoms = Vec::new();
    while let Some(r) = shells.next_radius(stream)? {
        if r < floor {
            break;
        }
        shells.pending = None;
        atoms.push(shells.measure.draw_atom(r, stream)?);
    }
    shells.consumed = n;
    Ok(atoms)
}
