//! Band-descent simulation of a continuous max-id process with vertex 0 at
//! finitely many locations, from band samplers of its exponent measure.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent_measure::{zero_mass_split, Atom, ExponentMeasure, Location, ZeroMassSplit};
use crate::samplers::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Alg1Options {
    /// First band floor. Falls back to the family's characteristic cut, then 1.
    pub initial_cut: Option<f64>,
    pub halving_factor: f64,
    /// Bands scanned per location before giving up; unbounded when `None`.
    pub max_bands: Option<u64>,
}

impl Default for Alg1Options {
    fn default() -> Self {
        Self {
            initial_cut: None,
            halving_factor: 0.5,
            max_bands: None,
        }
    }
}

impl Alg1Options {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.initial_cut {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::Config(format!("initial cut must be positive, got {c}")));
            }
        }
        if !(self.halving_factor > 0.0 && self.halving_factor < 1.0) {
            return Err(Error::Config(format!(
                "halving factor must lie in (0, 1), got {}",
                self.halving_factor
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProcessDiagnostics {
    pub atoms_simulated: u64,
    pub atoms_kept: u64,
    /// Bands sampled per location: 0 for `J0` members, 1 when the location
    /// was already positive, otherwise the length of the descent.
    pub bands_scanned: Vec<u64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Clone, Debug)]
pub struct ExtremalSample {
    pub locations: Vec<Location>,
    pub values: Vec<f64>,
    /// Atoms attaining the maximum at one or more locations.
    pub kept_atoms: Vec<Atom>,
    pub diagnostics: ProcessDiagnostics,
}

impl ExtremalSample {
    /// The path approximator: pointwise max of the kept atoms at any location.
    pub fn path_value(&self, loc: &Location) -> f64 {
        self.kept_atoms.iter().map(|f| f.value(loc)).fold(0.0, f64::max)
    }
}

/// Drop candidates lying in a region explored in an earlier round.
///
/// `explored` pairs each earlier non-`J0` location with the floor `c_k` down
/// to which round `k` revealed every atom; a candidate with
/// `f(t_k) >= c_k` was already simulated there.
pub fn extremal_filter(candidates: Vec<Atom>, explored: &[(Location, f64)]) -> Vec<Atom> {
    candidates
        .into_iter()
        .filter(|f| explored.iter().all(|(loc, cut)| f.value(loc) < *cut))
        .collect()
}

/// Outcome of a band descent at one location.
#[derive(Clone, Debug)]
pub struct BandDescent {
    pub atoms: Vec<Atom>,
    pub bands_scanned: u64,
    /// Floor of the last band; every atom with `f(t_i)` above it is revealed.
    pub floor: f64,
    pub atoms_simulated: u64,
}

/// Scan `[c_l, c_u)` bands of the residual measure downward from `c` until a
/// batch survives the filter.
pub fn descend_bands<M: ExponentMeasure + ?Sized>(
    split: &ZeroMassSplit<'_, M>,
    position: usize,
    explored: &[(Location, f64)],
    initial_cut: f64,
    options: &Alg1Options,
    stream: &mut RngStream,
) -> Result<BandDescent> {
    let mut c_hi = f64::INFINITY;
    let mut c_lo = initial_cut;
    let mut bands = 0u64;
    let mut simulated = 0u64;
    loop {
        if options.max_bands.is_some_and(|cap| bands >= cap) {
            return Err(Error::BandCap {
                location: position,
                bands,
            });
        }
        if !(c_lo > 0.0) {
            return Err(Error::Numeric(format!(
                "band floor underflowed at location {position} after {bands} bands"
            )));
        }
        let batch = split.sample_residual_band(position, c_lo, c_hi, stream)?;
        bands += 1;
        simulated += batch.len() as u64;
        let survivors = extremal_filter(batch, explored);
        if !survivors.is_empty() {
            return Ok(BandDescent {
                atoms: survivors,
                bands_scanned: bands,
                floor: c_lo,
                atoms_simulated: simulated,
            });
        }
        c_hi = c_lo;
        c_lo *= options.halving_factor;
    }
}

fn check_locations(locations: &[Location]) -> Result<()> {
    for (k, a) in locations.iter().enumerate() {
        if locations[..k].contains(a) {
            return Err(Error::Usage(format!("location {a:?} requested twice")));
        }
    }
    Ok(())
}

/// Exact joint sample of `(X_{t_1}, ..., X_{t_d})`.
pub fn simulate_process<M: ExponentMeasure + ?Sized>(
    measure: &M,
    locations: &[Location],
    options: &Alg1Options,
    stream: &mut RngStream,
) -> Result<ExtremalSample> {
    let start = Instant::now();
    options.validate()?;
    check_locations(locations)?;
    for loc in locations {
        if !measure.supports(loc) {
            return Err(Error::Usage(format!("measure cannot be evaluated at {loc:?}")));
        }
    }
    let split = zero_mass_split(measure, locations)?;
    let d = locations.len();
    let mut diag = ProcessDiagnostics {
        bands_scanned: vec![0; d],
        ..Default::default()
    };

    let mut kept: Vec<Atom> = Vec::new();
    for &j in split.j0() {
        let atoms = split.sample_component(j, stream)?;
        diag.atoms_simulated += atoms.len() as u64;
        kept.extend(atoms);
    }

    // Running maxima of the residual part only.
    let mut running = vec![0.0f64; d];
    let mut explored: Vec<(Location, f64)> = Vec::new();
    let initial_cut = options
        .initial_cut
        .or_else(|| measure.characteristic_cut())
        .unwrap_or(1.0);
    for i in 0..d {
        if split.is_zero_location(i) {
            continue;
        }
        let (survivors, cut) = if running[i] == 0.0 {
            let descent = descend_bands(&split, i, &explored, initial_cut, options, stream)?;
            diag.bands_scanned[i] = descent.bands_scanned;
            diag.atoms_simulated += descent.atoms_simulated;
            (descent.atoms, descent.floor)
        } else {
            let cut = running[i];
            let batch = split.sample_residual_band(i, cut, f64::INFINITY, stream)?;
            diag.bands_scanned[i] = 1;
            diag.atoms_simulated += batch.len() as u64;
            (extremal_filter(batch, &explored), cut)
        };
        for f in &survivors {
            for (k, loc) in locations.iter().enumerate() {
                running[k] = running[k].max(f.value(loc));
            }
        }
        kept.extend(survivors);
        explored.push((locations[i], cut));
    }

    let mut values = vec![0.0f64; d];
    for f in &kept {
        for (k, loc) in locations.iter().enumerate() {
            values[k] = values[k].max(f.value(loc));
        }
    }
    kept.retain(|f| {
        locations
            .iter()
            .zip(&values)
            .any(|(loc, &v)| v > 0.0 && f.value(loc) == v)
    });
    diag.atoms_kept = kept.len() as u64;
    diag.wall_time = start.elapsed();
    Ok(ExtremalSample {
        locations: locations.to_vec(),
        values,
        kept_atoms: kept,
        diagnostics: diag,
    })
}
