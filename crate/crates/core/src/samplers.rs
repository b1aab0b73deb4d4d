//! Base random variates.
//!
//! Every stochastic routine in the crate draws through [`RngStream`]. A
//! stream is a ChaCha8 generator keyed by `(seed, stream_id)`: the seed
//! selects the key, the stream id selects one of 2^64 independent
//! keystreams, so replicates can run on any thread without coordination.
//!
//! Power-law envelopes back the rejection sampler used for size-biased
//! jump laws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Relative slack on the acceptance ratio before a proposal counts as an
/// envelope violation. Absorbs last-ulp differences between target and
/// envelope evaluations; an undersized envelope overshoots by far more.
const ENVELOPE_SLACK: f64 = 1e-12;

const MAX_REJECTION_ATTEMPTS: u64 = 100_000_000;

/// A reproducible, splittable random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on the open interval (0, 1), 53 bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    #[inline]
    pub fn bits(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based uniform on (0, 1): a pure function of `(key, counter)`.
///
/// Lazily realized atom coordinates use this so that a coordinate is the
/// same no matter when, or how often, it is queried.
#[inline]
pub fn keyed_uniform(key: u64, counter: u64) -> f64 {
    let z = mix64(key ^ mix64(counter.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    ((z >> 11) as f64 + 0.5) * TWO_POW_M53
}

/// Inverse-CDF map from a uniform draw to an exponential with `rate`.
pub fn exp_from_uniform(u: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return domain(format!("exponential rate must be positive, got {rate}"));
    }
    Ok(-u.ln() / rate)
}

pub fn exp_variate(stream: &mut RngStream, rate: f64) -> Result<f64> {
    let u = stream.uniform();
    exp_from_uniform(u, rate)
}

pub fn poisson_variate(stream: &mut RngStream, mean: f64) -> Result<u64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return domain(format!("Poisson mean must be finite and non-negative, got {mean}"));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Domain(format!("Poisson({mean}): {e}")))?;
    let draw: f64 = dist.sample(stream);
    Ok(draw as u64)
}

/// Density `coef * u^exponent` restricted to `[lower, upper)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawPiece {
    pub lower: f64,
    /// May be `f64::INFINITY`, written `"inf"` in JSON.
    #[serde(with = "upper_bound")]
    pub upper: f64,
    pub coef: f64,
    pub exponent: f64,
}

mod upper_bound {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Bound {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Bound::deserialize(d)? {
            Bound::Number(x) => Ok(x),
            Bound::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Bound::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

impl PowerLawPiece {
    pub fn new(lower: f64, upper: f64, coef: f64, exponent: f64) -> Self {
        Self {
            lower,
            upper,
            coef,
            exponent,
        }
    }

    fn check_shape(&self) -> Result<()> {
        if !(self.lower >= 0.0) || !(self.upper > self.lower) {
            return domain(format!(
                "power-law piece needs 0 <= lower < upper, got [{}, {})",
                self.lower, self.upper
            ));
        }
        if !(self.coef > 0.0) || !self.coef.is_finite() || !self.exponent.is_finite() {
            return domain(format!(
                "power-law piece needs finite coef > 0 and finite exponent, got {} u^{}",
                self.coef, self.exponent
            ));
        }
        Ok(())
    }

    /// Total mass; `+inf` when the piece is not integrable.
    pub fn mass(&self) -> f64 {
        let (a, b, e) = (self.lower, self.upper, self.exponent);
        if (e + 1.0).abs() < 1e-15 {
            if a == 0.0 || b.is_infinite() {
                return f64::INFINITY;
            }
            return self.coef * (b / a).ln();
        }
        let p = e + 1.0;
        if a == 0.0 && p < 0.0 {
            return f64::INFINITY;
        }
        if b.is_infinite() && p > 0.0 {
            return f64::INFINITY;
        }
        let hi = if b.is_infinite() { 0.0 } else { b.powf(p) };
        let lo = if a == 0.0 { 0.0 } else { a.powf(p) };
        self.coef * (hi - lo) / p
    }

    #[inline]
    pub fn contains(&self, u: f64) -> bool {
        u >= self.lower && u < self.upper
    }

    #[inline]
    pub fn density(&self, u: f64) -> f64 {
        if self.contains(u) {
            self.coef * u.powf(self.exponent)
        } else {
            0.0
        }
    }

    /// Quantile of the normalized piece at probability `u`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        self.check_shape()?;
        let m = self.mass();
        if !m.is_finite() {
            return domain(format!(
                "power-law piece {} u^{} on [{}, {}) has infinite mass",
                self.coef, self.exponent, self.lower, self.upper
            ));
        }
        let (a, b, e) = (self.lower, self.upper, self.exponent);
        if (e + 1.0).abs() < 1e-15 {
            return Ok(a * (b / a).powf(u));
        }
        let p = e + 1.0;
        let lo = if a == 0.0 { 0.0 } else { a.powf(p) };
        let hi = if b.is_infinite() { 0.0 } else { b.powf(p) };
        let x = (lo + u * (hi - lo)).powf(1.0 / p);
        Ok(x.clamp(a, b))
    }
}

/// Exact inverse-CDF draw from the normalized piece.
pub fn sample_power_law_piece(piece: &PowerLawPiece, stream: &mut RngStream) -> Result<f64> {
    let u = stream.uniform();
    piece.inverse_cdf(u)
}

/// A dominating density assembled from disjoint power-law pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PowerLawPiece>", into = "Vec<PowerLawPiece>")]
pub struct PowerLawEnvelope {
    pieces: Vec<PowerLawPiece>,
    cumulative: Vec<f64>,
}

impl TryFrom<Vec<PowerLawPiece>> for PowerLawEnvelope {
    type Error = Error;

    fn try_from(pieces: Vec<PowerLawPiece>) -> Result<Self> {
        Self::new(pieces)
    }
}

impl From<PowerLawEnvelope> for Vec<PowerLawPiece> {
    fn from(env: PowerLawEnvelope) -> Self {
        env.pieces
    }
}

impl PowerLawEnvelope {
    pub fn new(mut pieces: Vec<PowerLawPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return domain("envelope needs at least one piece");
        }
        pieces.sort_by(|a, b| a.lower.total_cmp(&b.lower));
        let mut cumulative = Vec::with_capacity(pieces.len());
        let mut total = 0.0;
        for (k, piece) in pieces.iter().enumerate() {
            piece.check_shape()?;
            if k > 0 && piece.lower < pieces[k - 1].upper {
                return domain(format!(
                    "envelope pieces overlap: [{}, {}) and [{}, {})",
                    pieces[k - 1].lower,
                    pieces[k - 1].upper,
                    piece.lower,
                    piece.upper
                ));
            }
            let m = piece.mass();
            if !m.is_finite() {
                return domain(format!(
                    "envelope piece {} u^{} on [{}, {}) has infinite mass",
                    piece.coef, piece.exponent, piece.lower, piece.upper
                ));
            }
            total += m;
            cumulative.push(total);
        }
        if !(total > 0.0) {
            return domain("envelope has zero total mass");
        }
        Ok(Self { pieces, cumulative })
    }

    pub fn pieces(&self) -> &[PowerLawPiece] {
        &self.pieces
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn density(&self, u: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.contains(u))
            .map_or(0.0, |p| p.density(u))
    }

    /// Multiply every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.pieces
                .iter()
                .map(|p| PowerLawPiece { coef: p.coef * factor, ..*p })
                .collect(),
        )
    }

    /// Restrict the support to `[0, upper)`, dropping pieces beyond it.
    pub fn truncated(&self, upper: f64) -> Result<Self> {
        let pieces: Vec<_> = self
            .pieces
            .iter()
            .filter(|p| p.lower < upper)
            .map(|p| PowerLawPiece { upper: p.upper.min(upper), ..*p })
            .collect();
        Self::new(pieces)
    }

    /// Composition draw: pick a piece proportionally to its mass, then invert.
    pub fn sample(&self, stream: &mut RngStream) -> Result<f64> {
        let total = self.total_mass();
        let pick = stream.uniform() * total;
        let k = self
            .cumulative
            .iter()
            .position(|&c| pick < c)
            .unwrap_or(self.pieces.len() - 1);
        sample_power_law_piece(&self.pieces[k], stream)
    }
}

/// One accepted rejection draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RejectionDraw {
    pub value: f64,
    /// Number of proposals, including the accepted one.
    pub attempts: u64,
}

/// Draw from the normalized `target` by rejection from `envelope`.
///
/// Any proposal with `target > envelope` aborts with
/// [`Error::EnvelopeViolation`]; the ratio is never clamped.
pub fn rejection_sample<F>(
    target: F,
    envelope: &PowerLawEnvelope,
    stream: &mut RngStream,
) -> Result<RejectionDraw>
where
    F: Fn(f64) -> f64,
{
    for attempts in 1..=MAX_REJECTION_ATTEMPTS {
        let x = envelope.sample(stream)?;
        let env = envelope.density(x);
        let tgt = target(x);
        let ratio = if env > 0.0 { tgt / env } else if tgt > 0.0 { f64::INFINITY } else { 0.0 };
        if ratio > 1.0 + ENVELOPE_SLACK || ratio.is_nan() {
            return Err(Error::EnvelopeViolation { at: x, ratio });
        }
        if stream.uniform() < ratio {
            return Ok(RejectionDraw { value: x, attempts });
        }
    }
    Err(Error::Numeric(format!(
        "rejection sampler did not accept within {MAX_REJECTION_ATTEMPTS} proposals"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn exp_inverse_cdf_examples() {
        let u = (-1.0f64).exp();
        assert_relative_eq!(exp_from_uniform(u, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(exp_from_uniform(u, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(exp_from_uniform(0.5, 0.0).is_err());
        assert!(exp_from_uniform(0.5, -1.0).is_err());
    }

    #[test]
    fn exp_mean_within_clt_band() {
        let mut s = RngStream::new(7, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| exp_variate(&mut s, 1.0).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn poisson_edge_cases_and_mean() {
        let mut s = RngStream::new(11, 3);
        assert_eq!(poisson_variate(&mut s, 0.0).unwrap(), 0);
        assert!(poisson_variate(&mut s, -1.0).is_err());
        assert!(poisson_variate(&mut s, f64::INFINITY).is_err());
        assert!(poisson_variate(&mut s, f64::NAN).is_err());
        let big = poisson_variate(&mut s, 13160.4).unwrap();
        assert!(big > 12_000 && big < 14_500, "{big}");

        let n = 100_000;
        let mean = (0..n).map(|_| poisson_variate(&mut s, 3.0).unwrap() as f64).sum::<f64>()
            / n as f64;
        assert!((mean - 3.0).abs() < 3.0 * (3.0 / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(42, 5);
        let mut b = RngStream::new(42, 5);
        let mut c = RngStream::new(42, 6);
        let xa: Vec<u64> = (0..16).map(|_| a.bits()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.bits()).collect();
        let xc: Vec<u64> = (0..16).map(|_| c.bits()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn power_law_piece_inverse_examples() {
        let uniform = PowerLawPiece::new(0.0, 1.0, 1.0, 0.0);
        assert_relative_eq!(uniform.inverse_cdf(0.5).unwrap(), 0.5, epsilon = 1e-15);
        let pareto = PowerLawPiece::new(1.0, f64::INFINITY, 1.0, -2.0);
        assert_relative_eq!(pareto.inverse_cdf(0.5).unwrap(), 2.0, epsilon = 1e-14);
        let root = PowerLawPiece::new(0.0, 1.0, 1.0, -0.5);
        assert_relative_eq!(root.inverse_cdf(0.25).unwrap(), 0.0625, epsilon = 1e-15);
        let log = PowerLawPiece::new(1.0, std::f64::consts::E, 1.0, -1.0);
        assert_relative_eq!(log.inverse_cdf(0.5).unwrap(), 0.5f64.exp(), epsilon = 1e-14);
    }

    #[test]
    fn infinite_mass_piece_is_rejected() {
        let bad = PowerLawPiece::new(1.0, f64::INFINITY, 1.0, -0.5);
        assert!(bad.inverse_cdf(0.3).is_err());
        let bad0 = PowerLawPiece::new(0.0, 1.0, 1.0, -1.5);
        assert!(bad0.mass().is_infinite());
        assert!(PowerLawEnvelope::new(vec![bad0]).is_err());
        assert!(PowerLawEnvelope::new(vec![]).is_err());
    }

    #[test]
    fn identical_target_accepts_every_proposal() {
        let env = PowerLawEnvelope::new(vec![PowerLawPiece::new(1.0, f64::INFINITY, 2.0, -3.0)])
            .unwrap();
        let mut s = RngStream::new(1, 1);
        for _ in 0..1000 {
            let d = rejection_sample(|u| env.density(u), &env, &mut s).unwrap();
            assert_eq!(d.attempts, 1);
        }
    }

    #[test]
    fn undersized_envelope_fails_loudly() {
        let env = PowerLawEnvelope::new(vec![PowerLawPiece::new(0.0, 1.0, 1.0, 0.0)]).unwrap();
        let mut s = RngStream::new(2, 0);
        let err = rejection_sample(|u| 2.0 * env.density(u), &env, &mut s).unwrap_err();
        assert!(matches!(err, Error::EnvelopeViolation { ratio, .. } if (ratio - 2.0).abs() < 1e-12));
    }

    #[test]
    fn truncation_and_scaling() {
        let unbounded = PowerLawPiece::new(0.0, f64::INFINITY, 1.0, 0.0);
        assert!(PowerLawEnvelope::new(vec![unbounded]).is_err());
        let env = PowerLawEnvelope::new(vec![
            PowerLawPiece::new(0.0, 1.0, 1.0, 0.0),
            PowerLawPiece::new(1.0, f64::INFINITY, 1.0, -2.0),
        ])
        .unwrap();
        assert_relative_eq!(env.total_mass(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(env.truncated(0.5).unwrap().total_mass(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(env.truncated(2.0).unwrap().total_mass(), 1.5, epsilon = 1e-15);
        assert_relative_eq!(env.scaled(3.0).unwrap().total_mass(), 6.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn piece_quantile_stays_in_support_and_is_monotone(
            lower in 0.0f64..5.0,
            width in 0.01f64..10.0,
            exponent in -3.0f64..3.0,
            u1 in 0.0f64..1.0,
            u2 in 0.0f64..1.0,
        ) {
            let piece = PowerLawPiece::new(lower, lower + width, 1.5, exponent);
            prop_assume!(piece.mass().is_finite());
            let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
            let x1 = piece.inverse_cdf(lo).unwrap();
            let x2 = piece.inverse_cdf(hi).unwrap();
            prop_assert!(x1 >= piece.lower && x2 <= piece.upper);
            prop_assert!(x1 <= x2 * (1.0 + 1e-12));
        }

        #[test]
        fn keyed_uniform_is_pure_and_open(key in any::<u64>(), counter in any::<u64>()) {
            let a = keyed_uniform(key, counter);
            prop_assert_eq!(a, keyed_uniform(key, counter));
            prop_assert!(a > 0.0 && a < 1.0);
        }
    }
}
