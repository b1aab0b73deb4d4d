#![allow(dead_code)]

use maxid::exponent_measure::{
    Atom, ExponentMeasure, Location, ScaleMixtureMeasure,
};
use maxid::samplers::RngStream;
use maxid::Result;

pub const HALF_STABLE_K: f64 = 0.282_094_791_773_878_14;

pub fn exp_cdf(x: f64) -> f64 {
    if x > 0.0 {
        -(-x).exp_m1()
    } else {
        0.0
    }
}

pub fn frechet_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// `(1 - e^{-u}) K u^{-3/2}`.
pub fn size_biased_half_stable(u: f64) -> f64 {
    if u > 0.0 {
        -(-u).exp_m1() * HALF_STABLE_K * u.powf(-1.5)
    } else {
        0.0
    }
}

/// Closed-form CDF of [`size_biased_half_stable`].
pub fn size_biased_half_stable_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::erf::erf(x.sqrt()) + (-x).exp_m1() / (std::f64::consts::PI * x).sqrt()
}

/// Frequency within `k` standard errors of `p`.
pub fn within_se(hits: usize, n: usize, p: f64, k: f64) -> bool {
    let est = hits as f64 / n as f64;
    (est - p).abs() <= k * (p * (1.0 - p) / n as f64).sqrt().max(1e-12)
}

/// Two empirical frequencies agree within `k` standard errors of their
/// difference.
pub fn frequencies_agree(a: usize, b: usize, n: usize, k: f64) -> bool {
    let pa = a as f64 / n as f64;
    let pb = b as f64 / n as f64;
    let p = 0.5 * (pa + pb);
    let se = (2.0 * p * (1.0 - p) / n as f64).sqrt();
    (pa - pb).abs() <= k * se.max(1e-12)
}

/// Delegates to a scale mixture but reports every positive mass as
/// infinite, forcing the slice loop on finite truncations.
pub struct HideFinite<'a>(pub &'a ScaleMixtureMeasure);

impl ExponentMeasure for HideFinite<'_> {
    fn supports(&self, loc: &Location) -> bool {
        self.0.supports(loc)
    }
    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        self.0.mass_above(loc, c)
    }
    fn positive_mass(&self, _: &Location) -> Result<Option<f64>> {
        Ok(None)
    }
    fn sample_band(&self, loc: &Location, lo: f64, hi: f64, s: &mut RngStream) -> Result<Vec<Atom>> {
        self.0.sample_band(loc, lo, hi, s)
    }
    fn sample_positive(&self, loc: &Location, s: &mut RngStream) -> Result<Vec<Atom>> {
        self.0.sample_positive(loc, s)
    }
}
