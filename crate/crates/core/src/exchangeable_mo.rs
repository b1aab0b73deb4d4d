//! Exchangeable Marshall–Olkin sequences and their max-id reciprocals.
//!
//! The exponent measure is driven by the Lévy density `g` of a subordinator:
//! an atom is a shock at time `s` with jump `u`, hitting every index
//! independently with probability `1 - e^{-u}`. The max-id atom is `1/s` at
//! hit indices and `0` elsewhere.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::exponent_measure::{check_band, check_cut, index_locations, Atom, ExponentMeasure, Location};
use crate::process_sim::{simulate_process, Alg1Options, ProcessDiagnostics};
use crate::quadrature::integrate;
use crate::samplers::{
    exp_variate, poisson_variate, rejection_sample, PowerLawEnvelope, PowerLawPiece, RngStream,
};

const QUAD_TOL: f64 = 1e-9;

/// A boxed Lévy density `u -> g(u)`.
#[derive(Clone)]
pub struct DensityFn(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DensityFn(..)")
    }
}

/// Lévy density of the driving subordinator.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevyDensity {
    /// `alpha / Gamma(1 - alpha) * u^{-1-alpha}`, normalized so that the
    /// Laplace exponent is `a^alpha`.
    Stable { alpha: f64 },
    /// `beta * e^{-eta u} / u`, with Laplace exponent `beta ln(1 + a/eta)`.
    Gamma { beta: f64, eta: f64 },
    /// Sum of power-law pieces `coef * u^exponent` on `[lower, upper)`.
    Table { pieces: Vec<PowerLawPiece> },
    #[serde(skip)]
    Custom(DensityFn),
}

impl LevyDensity {
    fn validate(&self) -> Result<()> {
        match self {
            LevyDensity::Stable { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return domain(format!("stable index must lie in (0, 1), got {alpha}"));
                }
            }
            LevyDensity::Gamma { beta, eta } => {
                if !(*beta > 0.0 && beta.is_finite() && *eta > 0.0 && eta.is_finite()) {
                    return domain(format!("gamma density needs beta, eta > 0, got {beta}, {eta}"));
                }
            }
            LevyDensity::Table { pieces } => {
                if pieces.is_empty() {
                    return domain("tabulated density needs at least one piece");
                }
                let mut sorted = pieces.clone();
                sorted.sort_by(|a, b| a.lower.total_cmp(&b.lower));
                for w in sorted.windows(2) {
                    if w[1].lower < w[0].upper {
                        return domain("tabulated density pieces overlap");
                    }
                }
                for p in pieces {
                    if !(p.lower >= 0.0 && p.upper > p.lower && p.coef > 0.0) {
                        return domain(format!("malformed density piece {p:?}"));
                    }
                }
            }
            LevyDensity::Custom(_) => {}
        }
        Ok(())
    }

    pub fn density(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return 0.0;
        }
        match self {
            LevyDensity::Stable { alpha } => stable_constant(*alpha) * u.powf(-1.0 - alpha),
            LevyDensity::Gamma { beta, eta } => beta * (-eta * u).exp() / u,
            LevyDensity::Table { pieces } => pieces.iter().map(|p| p.density(u)).sum(),
            LevyDensity::Custom(f) => (f.0)(u),
        }
    }

    /// `int h(u) g(u) du`, split where the density changes form.
    fn integrate_against(&self, h: impl Fn(f64) -> f64) -> Result<f64> {
        let f = |u: f64| h(u) * self.density(u);
        match self {
            LevyDensity::Table { pieces } => {
                let mut total = 0.0;
                for p in pieces {
                    total += integrate(|u| h(u) * p.density(u), p.lower, p.upper, QUAD_TOL)?;
                }
                Ok(total)
            }
            _ => Ok(integrate(f, 0.0, 1.0, QUAD_TOL)? + integrate(f, 1.0, f64::INFINITY, QUAD_TOL)?),
        }
    }

    fn default_envelope(&self) -> Result<Option<PowerLawEnvelope>> {
        match self {
            LevyDensity::Stable { alpha } => {
                let k = stable_constant(*alpha);
                // 1 - e^{-u} <= u on (0, 1], <= 1 beyond.
                Ok(Some(PowerLawEnvelope::new(vec![
                    PowerLawPiece::new(0.0, 1.0, k, -alpha),
                    PowerLawPiece::new(1.0, f64::INFINITY, k, -1.0 - alpha),
                ])?))
            }
            LevyDensity::Gamma { beta, eta } => {
                let m = if *eta >= 1.0 { (-eta).exp() } else { 1.0 / (std::f64::consts::E * eta) };
                Ok(Some(PowerLawEnvelope::new(vec![
                    PowerLawPiece::new(0.0, 1.0, *beta, 0.0),
                    PowerLawPiece::new(1.0, f64::INFINITY, beta * m, -2.0),
                ])?))
            }
            _ => Ok(None),
        }
    }
}

/// `alpha / Gamma(1 - alpha)`; `1 / (2 sqrt(pi))` at one half.
pub fn stable_constant(alpha: f64) -> f64 {
    alpha / gamma(1.0 - alpha)
}

/// A subordinator Lévy density with its rejection envelope and mass
/// `C1 = int (1 - e^{-u}) g(u) du`.
#[derive(Clone)]
pub struct LevySpec {
    density: LevyDensity,
    envelope: PowerLawEnvelope,
    c1: f64,
    drift: f64,
    psi_cache: Arc<RwLock<HashMap<u64, f64>>>,
}

impl fmt::Debug for LevySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevySpec")
            .field("density", &self.density)
            .field("envelope", &self.envelope)
            .field("c1", &self.c1)
            .field("drift", &self.drift)
            .finish()
    }
}

impl LevySpec {
    /// `envelope` must dominate `(1 - e^{-u}) g(u)`; built-in densities
    /// supply one when `None`.
    pub fn new(density: LevyDensity, envelope: Option<PowerLawEnvelope>) -> Result<Self> {
        density.validate()?;
        let envelope = match envelope {
            Some(e) => e,
            None => density.default_envelope()?.ok_or_else(|| {
                Error::Config("this Lévy density needs an explicit envelope".into())
            })?,
        };
        let c1 = match &density {
            LevyDensity::Stable { .. } => 1.0,
            LevyDensity::Gamma { beta, eta } => beta * (1.0 / eta).ln_1p(),
            other => other.integrate_against(|u| -(-u).exp_m1())?,
        };
        if !(c1 > 0.0) || !c1.is_finite() {
            return domain(format!(
                "int (1 - e^-u) g(u) du must be finite and positive, got {c1}"
            ));
        }
        Ok(Self {
            density,
            envelope,
            c1,
            drift: 0.0,
            psi_cache: Arc::default(),
        })
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        Self::new(LevyDensity::Stable { alpha }, None)
    }

    pub fn gamma(beta: f64, eta: f64) -> Result<Self> {
        Self::new(LevyDensity::Gamma { beta, eta }, None)
    }

    pub fn custom(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        envelope: PowerLawEnvelope,
    ) -> Result<Self> {
        Self::new(LevyDensity::Custom(DensityFn(Arc::new(density))), Some(envelope))
    }

    /// Add a linear drift `b t` to the subordinator.
    pub fn with_drift(mut self, drift: f64) -> Result<Self> {
        if !(drift >= 0.0) || !drift.is_finite() {
            return domain(format!("drift must be finite and non-negative, got {drift}"));
        }
        self.drift = drift;
        Ok(self)
    }

    pub fn density(&self) -> &LevyDensity {
        &self.density
    }

    pub fn envelope(&self) -> &PowerLawEnvelope {
        &self.envelope
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// `(1 - e^{-u}) g(u)`, the unnormalized size-biased jump density.
    pub fn size_biased_density(&self, u: f64) -> f64 {
        -(-u).exp_m1() * self.density.density(u)
    }

    /// One draw from `(1 - e^{-u}) g(u) du / C1`.
    pub fn sample_jump(&self, stream: &mut RngStream) -> Result<f64> {
        Ok(rejection_sample(|u| self.size_biased_density(u), &self.envelope, stream)?.value)
    }

    /// Scan a log grid for points where the envelope fails to dominate.
    pub fn check_envelope(&self) -> Result<()> {
        check_domination(|u| self.size_biased_density(u), |u| self.envelope.density(u))
    }

    /// Laplace exponent of the jump part, `int (1 - e^{-a u}) g(u) du`.
    pub fn psi(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0) || !a.is_finite() {
            return domain(format!("Laplace exponent needs finite a >= 0, got {a}"));
        }
        match &self.density {
            LevyDensity::Stable { alpha } => return Ok(a.powf(*alpha)),
            LevyDensity::Gamma { beta, eta } => return Ok(beta * (a / eta).ln_1p()),
            _ => {}
        }
        if a == 0.0 {
            return Ok(0.0);
        }
        let key = a.to_bits();
        if let Some(v) = self.psi_cache.read().expect("psi cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.density.integrate_against(|u| -(-a * u).exp_m1())?;
        self.psi_cache
            .write()
            .expect("psi cache poisoned")
            .insert(key, v);
        Ok(v)
    }

    /// Laplace exponent including the drift: `psi(a) + b a`.
    pub fn laplace_exponent(&self, a: f64) -> Result<f64> {
        Ok(self.psi(a)? + self.drift * a)
    }
}

fn check_domination(target: impl Fn(f64) -> f64, envelope: impl Fn(f64) -> f64) -> Result<()> {
    for k in 0..=1600 {
        let u = 10f64.powf(-8.0 + k as f64 * 0.01);
        let (t, e) = (target(u), envelope(u));
        if t > e * (1.0 + 1e-12) || t.is_nan() {
            let ratio = if e > 0.0 { t / e } else { f64::INFINITY };
            return Err(Error::EnvelopeViolation { at: u, ratio });
        }
    }
    Ok(())
}

/// The 1/2-stable subordinator with `C1 = 1`.
pub fn half_stable_spec() -> LevySpec {
    LevySpec::stable(0.5).expect("1/2 is a valid stable index")
}

/// Draw the shock atoms of the PRM with intensity `1{f_n >= c} dmu`:
/// `M ~ Poisson(C1/c)`, `Y ~ U(0, 1/c)`, `U` from the size-biased law, and
/// each atom equal to `1/Y` at the anchor `n`.
pub fn mo_sample_prm_above(
    spec: &LevySpec,
    anchor: u64,
    c: f64,
    stream: &mut RngStream,
) -> Result<Vec<Atom>> {
    check_cut(c)?;
    shocks_between(spec, anchor, 0.0, 1.0 / c, stream)
}

/// Shocks at times `Y ~ U(y_lo, y_hi)` at the anchor index.
fn shocks_between(
    spec: &LevySpec,
    anchor: u64,
    y_lo: f64,
    y_hi: f64,
    stream: &mut RngStream,
) -> Result<Vec<Atom>> {
    if anchor == 0 {
        return domain("sequence indices start at 1");
    }
    let m = poisson_variate(stream, spec.c1 * (y_hi - y_lo))?;
    let mut atoms = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let y = y_lo + (y_hi - y_lo) * stream.uniform();
        let u = spec.sample_jump(stream)?;
        atoms.push(Atom::shock(y, u, anchor, stream.bits()));
    }
    Ok(atoms)
}

fn anchor_of(loc: &Location) -> Result<u64> {
    match *loc {
        Location::Index(i) if i >= 1 => Ok(i),
        _ => Err(Error::Usage(format!("sequence measures are indexed by 1, 2, ..., got {loc:?}"))),
    }
}

/// The exponent measure of the exchangeable max-id sequence.
#[derive(Clone, Debug)]
pub struct MarshallOlkin {
    spec: LevySpec,
}

impl MarshallOlkin {
    pub fn new(spec: LevySpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &LevySpec {
        &self.spec
    }
}

impl ExponentMeasure for MarshallOlkin {
    fn supports(&self, loc: &Location) -> bool {
        anchor_of(loc).is_ok()
    }

    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        check_cut(c)?;
        anchor_of(loc)?;
        Ok(self.spec.c1 / c)
    }

    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>> {
        anchor_of(loc)?;
        Ok(None)
    }

    fn sample_band(
        &self,
        loc: &Location,
        c_lo: f64,
        c_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>> {
        check_band(c_lo, c_hi)?;
        shocks_between(&self.spec, anchor_of(loc)?, 1.0 / c_hi, 1.0 / c_lo, stream)
    }

    fn sample_positive(&self, loc: &Location, _: &mut RngStream) -> Result<Vec<Atom>> {
        Err(Error::Usage(format!("{loc:?} carries infinite positive mass")))
    }

    fn characteristic_cut(&self) -> Option<f64> {
        Some(self.spec.c1)
    }
}

#[derive(Clone, Debug)]
pub struct MoSequenceSample {
    /// `T_i`, Marshall–Olkin distributed.
    pub hitting_times: Vec<f64>,
    /// `X_i = 1 / T_i`, max-id.
    pub reciprocals: Vec<f64>,
    pub diagnostics: ProcessDiagnostics,
}

fn finish_sequence(
    mut reciprocals: Vec<f64>,
    drift: f64,
    diagnostics: ProcessDiagnostics,
    stream: &mut RngStream,
) -> Result<MoSequenceSample> {
    if drift > 0.0 {
        // Independent i.i.d. layer with P(1/X > t) = e^{-b t}.
        for x in reciprocals.iter_mut() {
            *x = x.max(1.0 / exp_variate(stream, drift)?);
        }
    }
    let hitting_times = reciprocals.iter().map(|x| 1.0 / x).collect();
    Ok(MoSequenceSample {
        hitting_times,
        reciprocals,
        diagnostics,
    })
}

/// Exact sample of `(X_1, ..., X_d)` and `T = 1/X`.
pub fn simulate_mo_sequence(
    spec: &LevySpec,
    d: usize,
    stream: &mut RngStream,
) -> Result<MoSequenceSample> {
    simulate_mo_sequence_with(spec, d, &Alg1Options::default(), stream)
}

pub fn simulate_mo_sequence_with(
    spec: &LevySpec,
    d: usize,
    options: &Alg1Options,
    stream: &mut RngStream,
) -> Result<MoSequenceSample> {
    if d == 0 {
        return Err(Error::Usage("sequence length must be at least 1".into()));
    }
    let measure = MarshallOlkin::new(spec.clone());
    let out = simulate_process(&measure, &index_locations(d), options, stream)?;
    finish_sequence(out.values, spec.drift, out.diagnostics, stream)
}

/// A boxed joint density `(s, u) -> g(s, u)`.
#[derive(Clone)]
pub struct JointDensityFn(pub Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl fmt::Debug for JointDensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("JointDensityFn(..)")
    }
}

/// Shock intensity `g(s, u) ds du` of an additive subordinator.
///
/// Sampling thins a dominating product intensity `rate(s) * env(u)`, which
/// must bound `(1 - e^{-u}) g(s, u)`; a violation aborts the draw.
#[derive(Clone)]
pub struct AdditiveSpec {
    density: JointDensityFn,
    rate: Vec<PowerLawPiece>,
    jump_envelope: PowerLawEnvelope,
    mass_cache: Arc<RwLock<HashMap<u64, f64>>>,
}

impl fmt::Debug for AdditiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdditiveSpec")
            .field("rate", &self.rate)
            .field("jump_envelope", &self.jump_envelope)
            .finish_non_exhaustive()
    }
}

fn rate_density(rate: &[PowerLawPiece], s: f64) -> f64 {
    rate.iter().map(|p| p.density(s)).sum()
}

impl AdditiveSpec {
    /// `rate` may have infinite mass on `(0, inf)`; it is only ever used
    /// truncated to `(0, 1/c)`.
    pub fn new(
        density: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        rate: Vec<PowerLawPiece>,
        jump_envelope: PowerLawEnvelope,
    ) -> Result<Self> {
        if rate.is_empty() {
            return domain("additive spec needs at least one time-rate piece");
        }
        for p in &rate {
            if !(p.lower >= 0.0 && p.upper > p.lower && p.coef > 0.0 && p.exponent.is_finite()) {
                return domain(format!("malformed time-rate piece {p:?}"));
            }
        }
        let mut sorted = rate;
        sorted.sort_by(|a, b| a.lower.total_cmp(&b.lower));
        for w in sorted.windows(2) {
            if w[1].lower < w[0].upper {
                return domain("time-rate pieces overlap");
            }
        }
        Ok(Self {
            density: JointDensityFn(Arc::new(density)),
            rate: sorted,
            jump_envelope,
            mass_cache: Arc::default(),
        })
    }

    /// `g(s, u) = rate(s) * g_v(u)` with `rate` a sum of power-law pieces.
    pub fn separable(rate: Vec<PowerLawPiece>, levy: &LevySpec) -> Result<Self> {
        let r = rate.clone();
        let l = levy.clone();
        Self::new(
            move |s, u| rate_density(&r, s) * l.density.density(u),
            rate,
            levy.envelope.clone(),
        )
    }

    /// The stationary case `g(s, u) = g_v(u)` embedded as an additive spec.
    pub fn stationary(levy: &LevySpec) -> Result<Self> {
        Self::separable(vec![PowerLawPiece::new(0.0, f64::INFINITY, 1.0, 0.0)], levy)
    }

    pub fn density(&self, s: f64, u: f64) -> f64 {
        if !(s > 0.0 && u > 0.0) {
            return 0.0;
        }
        (self.density.0)(s, u)
    }

    fn rate_envelope(&self, horizon: f64) -> Result<Option<PowerLawEnvelope>> {
        let pieces: Vec<_> = self
            .rate
            .iter()
            .filter(|p| p.lower < horizon)
            .map(|p| PowerLawPiece { upper: p.upper.min(horizon), ..*p })
            .collect();
        if pieces.is_empty() {
            return Ok(None);
        }
        PowerLawEnvelope::new(pieces).map(Some)
    }

    /// `C_c = int_0^{1/c} int (1 - e^{-u}) g(s, u) du ds`, by nested
    /// quadrature over each time-rate piece.
    pub fn mass_above(&self, c: f64) -> Result<f64> {
        check_cut(c)?;
        self.mass_until(1.0 / c)
    }

    /// Shock mass with times in `(0, horizon)`; `horizon` may be infinite.
    pub fn mass_until(&self, horizon: f64) -> Result<f64> {
        let key = horizon.to_bits();
        if let Some(v) = self.mass_cache.read().expect("mass cache poisoned").get(&key) {
            return Ok(*v);
        }
        let inner = |s: f64| -> f64 {
            let f = |u: f64| -(-u).exp_m1() * self.density(s, u);
            let lo = integrate(f, 0.0, 1.0, QUAD_TOL * 0.1);
            let hi = integrate(f, 1.0, f64::INFINITY, QUAD_TOL * 0.1);
            match (lo, hi) {
                (Ok(a), Ok(b)) => a + b,
                _ => f64::NAN,
            }
        };
        let mut total = 0.0;
        for p in self.rate.iter().filter(|p| p.lower < horizon) {
            total += integrate(inner, p.lower, p.upper.min(horizon), QUAD_TOL)?;
        }
        self.mass_cache
            .write()
            .expect("mass cache poisoned")
            .insert(key, total);
        Ok(total)
    }

    fn horizon(&self) -> f64 {
        self.rate.iter().map(|p| p.upper).fold(0.0, f64::max)
    }

    /// Shocks with times in `[s_lo, s_hi)` at the anchor index.
    fn shocks_between(
        &self,
        anchor: u64,
        s_lo: f64,
        s_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>> {
        if anchor == 0 {
            return domain("sequence indices start at 1");
        }
        let Some(rate) = self.rate_envelope(s_hi)? else {
            return Ok(Vec::new());
        };
        let below = if s_lo > 0.0 { self.rate_envelope(s_lo)? } else { None };
        let rate_mass = rate.total_mass() - below.as_ref().map_or(0.0, |b| b.total_mass());
        if !(rate_mass > 0.0) {
            return Ok(Vec::new());
        }
        let m = poisson_variate(stream, rate_mass * self.jump_envelope.total_mass())?;
        let mut atoms = Vec::new();
        for _ in 0..m {
            // Time from the rate restricted to [s_lo, s_hi) by rejection on the
            // truncated envelope; exact because the restriction is an indicator.
            let s = loop {
                let s = rate.sample(stream)?;
                if s >= s_lo {
                    break s;
                }
            };
            let u = self.jump_envelope.sample(stream)?;
            let bound = rate_density(&self.rate, s) * self.jump_envelope.density(u);
            let target = -(-u).exp_m1() * self.density(s, u);
            let ratio = if bound > 0.0 { target / bound } else if target > 0.0 { f64::INFINITY } else { 0.0 };
            if ratio > 1.0 + 1e-12 || ratio.is_nan() {
                return Err(Error::EnvelopeViolation { at: u, ratio });
            }
            if stream.uniform() < ratio {
                atoms.push(Atom::shock(s, u, anchor, stream.bits()));
            }
        }
        Ok(atoms)
    }
}

/// PRM with intensity `1{f_n >= c} dmu` for the additive model.
pub fn additive_sample_prm_above(
    spec: &AdditiveSpec,
    anchor: u64,
    c: f64,
    stream: &mut RngStream,
) -> Result<Vec<Atom>> {
    check_cut(c)?;
    spec.shocks_between(anchor, 0.0, 1.0 / c, stream)
}

/// Exponent measure of the exchangeable exogenous shock model.
#[derive(Clone, Debug)]
pub struct ExogenousShock {
    spec: AdditiveSpec,
}

impl ExogenousShock {
    pub fn new(spec: AdditiveSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &AdditiveSpec {
        &self.spec
    }
}

impl ExponentMeasure for ExogenousShock {
    fn supports(&self, loc: &Location) -> bool {
        anchor_of(loc).is_ok()
    }

    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        anchor_of(loc)?;
        self.spec.mass_above(c)
    }

    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>> {
        anchor_of(loc)?;
        let total: f64 = self.spec.rate.iter().map(|p| p.mass()).sum();
        if total.is_finite() {
            // Finitely many shocks overall: X_n = 0 with positive probability.
            return self.spec.mass_until(self.spec.horizon()).map(Some);
        }
        Ok(None)
    }

    fn sample_band(
        &self,
        loc: &Location,
        c_lo: f64,
        c_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>> {
        check_band(c_lo, c_hi)?;
        self.spec
            .shocks_between(anchor_of(loc)?, 1.0 / c_hi, 1.0 / c_lo, stream)
    }

    fn sample_positive(&self, loc: &Location, stream: &mut RngStream) -> Result<Vec<Atom>> {
        if self.positive_mass(loc)?.is_none() {
            return Err(Error::Usage(format!("{loc:?} carries infinite positive mass")));
        }
        self.spec
            .shocks_between(anchor_of(loc)?, 0.0, self.spec.horizon(), stream)
    }
}

/// Exact sample of the exogenous shock sequence `(X_1, ..., X_d)`.
pub fn simulate_exogenous_sequence(
    spec: &AdditiveSpec,
    d: usize,
    stream: &mut RngStream,
) -> Result<MoSequenceSample> {
    if d == 0 {
        return Err(Error::Usage("sequence length must be at least 1".into()));
    }
    let measure = ExogenousShock::new(spec.clone());
    let out = simulate_process(&measure, &index_locations(d), &Alg1Options::default(), stream)?;
    finish_sequence(out.values, 0.0, out.diagnostics, stream)
}
