//! Goodness-of-fit tests, brute-force oracles, replicate drivers and
//! report writers.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::exchangeable_mo::{simulate_mo_sequence, LevySpec};
use crate::exponent_measure::{DiscreteFiniteMeasure, Location};
use crate::samplers::RngStream;

/// Seeds of the default five-seed panel.
pub const PANEL_SEEDS: [u64; 5] = [11, 23, 37, 41, 59];
/// Panel members that must pass.
pub const PANEL_REQUIRED: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub n: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
}

/// Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.0 {
        // Theta-function form, fast-converging for small lambda.
        let pi2 = std::f64::consts::PI.powi(2);
        let mut cdf = 0.0;
        for k in 1..=100 {
            let j = (2 * k - 1) as f64;
            cdf += (-j * j * pi2 / (8.0 * lambda * lambda)).exp();
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `lambda` with `P(K > lambda) = alpha`.
pub fn kolmogorov_critical(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Usage(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::Usage("KS test needs a non-empty sample".into()));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::Usage("KS test sample contains NaN".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// `sup_x |F_n(x) - F(x)|` for a continuous reference CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let xs = sorted_finite(sample)?;
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// One-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64, alpha: f64) -> Result<KsResult> {
    check_alpha(alpha)?;
    let statistic = ks_statistic(sample, cdf)?;
    let n = sample.len();
    let p_value = kolmogorov_survival((n as f64).sqrt() * statistic);
    Ok(KsResult {
        statistic,
        n,
        p_value,
        alpha,
        pass: p_value >= alpha,
    })
}

/// Two-sample Kolmogorov–Smirnov test; `n` reports the first sample size.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KsResult> {
    check_alpha(alpha)?;
    let xa = sorted_finite(a)?;
    let xb = sorted_finite(b)?;
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    let p_value = kolmogorov_survival(en * d);
    Ok(KsResult {
        statistic: d,
        n: xa.len(),
        p_value,
        alpha,
        pass: p_value >= alpha,
    })
}

/// Monte Carlo frequency compared with an exact probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencyCheck {
    pub estimate: f64,
    pub expected: f64,
    pub standard_error: f64,
    pub pass: bool,
}

/// Pass when the observed frequency lies within `k` standard errors of `p`.
pub fn frequency_check(hits: usize, n: usize, p: f64, k: f64) -> FrequencyCheck {
    let estimate = hits as f64 / n as f64;
    let standard_error = (p * (1.0 - p) / n as f64).sqrt();
    FrequencyCheck {
        estimate,
        expected: p,
        standard_error,
        pass: (estimate - p).abs() <= k * standard_error,
    }
}

impl FrequencyCheck {
    /// Standardized deviation `(estimate - expected) / se`.
    pub fn z_score(&self) -> f64 {
        if self.standard_error > 0.0 {
            (self.estimate - self.expected) / self.standard_error
        } else if self.estimate == self.expected {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Two-sided normal p-value of [`Self::z_score`].
    pub fn p_value(&self) -> f64 {
        erfc(self.z_score().abs() / std::f64::consts::SQRT_2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub pass: bool,
}

/// Chi-square goodness of fit of counts to `Poisson(mean)`, pooling cells
/// so that every expected count is at least 5.
pub fn poisson_chi_square(counts: &[u64], mean: f64, alpha: f64) -> Result<ChiSquareResult> {
    check_alpha(alpha)?;
    if counts.is_empty() || !(mean > 0.0) {
        return Err(Error::Usage("chi-square needs counts and a positive mean".into()));
    }
    let n = counts.len() as f64;
    let max = *counts.iter().max().expect("non-empty") as usize;
    let mut observed = vec![0.0; max + 2];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    // cells [0], [1], ..., [k-1], [k, inf)
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pmf = (-mean).exp();
    let mut cum = 0.0;
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (k, obs) in observed.iter().enumerate() {
        obs_acc += obs;
        exp_acc += n * pmf;
        cum += pmf;
        if exp_acc >= 5.0 && n * (1.0 - cum) >= 5.0 {
            cells.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
        pmf *= mean / (k + 1) as f64;
    }
    let tail_obs = obs_acc;
    let tail_exp = exp_acc + n * (1.0 - cum).max(0.0);
    match cells.last_mut() {
        Some(last) if tail_exp < 5.0 => {
            last.0 += tail_obs;
            last.1 += tail_exp;
        }
        _ => cells.push((tail_obs, tail_exp)),
    }
    if cells.len() < 2 {
        return Err(Error::Usage("too few replicates for a chi-square test".into()));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    let p_value = 1.0 - dist.cdf(statistic);
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value,
        pass: p_value >= alpha,
    })
}

/// Run `n` replicates in parallel; replicate `r` owns stream `(seed, r)`, so
/// results are identical for any thread count. Errors surface in replicate
/// order.
pub fn replicate<T, F>(n: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..n)
        .into_par_iter()
        .map(|r| f(&mut RngStream::new(seed, r as u64)))
        .collect();
    results.into_iter().collect()
}

/// Sequential counterpart of [`replicate`] with the same stream layout.
pub fn replicate_sequential<T>(
    n: usize,
    seed: u64,
    mut f: impl FnMut(&mut RngStream) -> Result<T>,
) -> Result<Vec<T>> {
    (0..n).map(|r| f(&mut RngStream::new(seed, r as u64))).collect()
}

/// `scale * min_i T_i` over `n` replicates of the Marshall–Olkin sequence.
/// The default scale `psi(d)` makes the values standard exponential.
pub fn scaled_minima(
    spec: &LevySpec,
    d: usize,
    n: usize,
    seed: u64,
    scale: Option<f64>,
) -> Result<Vec<f64>> {
    let scale = match scale {
        Some(s) => s,
        None => spec.laplace_exponent(d as f64)?,
    };
    replicate(n, seed, |s| {
        let out = simulate_mo_sequence(spec, d, s)?;
        Ok(scale * out.hitting_times.iter().cloned().fold(f64::INFINITY, f64::min))
    })
}

/// KS test of the scaled minima against `Exp(1)`.
pub fn scaled_min_exp_check(
    spec: &LevySpec,
    d: usize,
    n: usize,
    seed: u64,
    alpha: f64,
    scale: Option<f64>,
) -> Result<KsResult> {
    let minima = scaled_minima(spec, d, n, seed, scale)?;
    ks_test(&minima, |x| if x > 0.0 { -(-x).exp_m1() } else { 0.0 }, alpha)
}

/// Exact sample from a finite measure: draw the whole PRM and take the
/// pointwise maximum.
pub fn finite_measure_oracle(
    measure: &DiscreteFiniteMeasure,
    locations: &[Location],
    stream: &mut RngStream,
) -> Result<Vec<f64>> {
    let atoms = measure.sample_all(stream)?;
    Ok(locations
        .iter()
        .map(|l| atoms.iter().map(|f| f.value(l)).fold(0.0, f64::max))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub d: usize,
    pub n: usize,
    pub seconds: f64,
    pub atoms_simulated: u64,
}

/// Wall time of `n` sequential sequence simulations per dimension.
pub fn bench_scaling(dims: &[usize], n: usize, spec: &LevySpec, seed: u64) -> Result<Vec<BenchRow>> {
    if dims.is_empty() {
        return Err(Error::Usage("benchmark needs at least one dimension".into()));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) || dims[0] == 0 {
        return Err(Error::Usage("benchmark dimensions must be positive and ascending".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &d in dims {
        let start = Instant::now();
        let mut atoms = 0u64;
        for r in 0..n {
            let mut s = RngStream::new(seed, r as u64);
            atoms += simulate_mo_sequence(spec, d, &mut s)?.diagnostics.atoms_simulated;
        }
        rows.push(BenchRow {
            d,
            n,
            seconds: start.elapsed().as_secs_f64(),
            atoms_simulated: atoms,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PanelResult {
    pub runs: Vec<(u64, KsResult)>,
    pub passes: usize,
    pub required: usize,
    pub pass: bool,
}

/// Run `check` once per seed; the panel passes when at least `required`
/// members pass.
pub fn seed_panel(
    seeds: &[u64],
    required: usize,
    mut check: impl FnMut(u64) -> Result<KsResult>,
) -> Result<PanelResult> {
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        runs.push((seed, check(seed)?));
    }
    let passes = runs.iter().filter(|(_, r)| r.pass).count();
    Ok(PanelResult {
        runs,
        passes,
        required,
        pass: passes >= required,
    })
}

/// One line of a validation report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub test: String,
    pub d: usize,
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    pub seed: u64,
}

impl ReportRow {
    pub fn from_ks(test: impl Into<String>, d: usize, seed: u64, ks: &KsResult) -> Self {
        Self {
            test: test.into(),
            d,
            n: ks.n,
            statistic: ks.statistic,
            p_value: ks.p_value,
            pass: ks.pass,
            seed,
        }
    }
}

/// Reals with 17 significant digits, locale-free.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub const REPORT_COLUMNS: [&str; 7] = ["test", "d", "n", "statistic", "p_value", "pass", "seed"];

pub fn write_report_csv(rows: &[ReportRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", REPORT_COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.test,
            r.d,
            r.n,
            format_real(r.statistic),
            format_real(r.p_value),
            r.pass,
            r.seed
        )?;
    }
    Ok(())
}

pub fn write_report_json(rows: &[ReportRow], mut out: impl Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}
