//! Slice-based simulation of max-id random vectors.
//!
//! The residual PRM is revealed slice by slice; once every atom left in the
//! remaining slices is dominated by the running minimum over the non-`J0`
//! coordinates, nothing unseen can move the maximum and the loop stops.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent_measure::{
    index_locations, sample_radial_shell, zero_mass_split, Atom, ExponentMeasure, RadialMeasure,
    RadialShells, ScaleMixtureMeasure,
};
use crate::samplers::RngStream;

/// Disjoint slices `S_1, S_2, ...` of finite measure exhausting
/// `[0, inf)^d \ {0}`, consumed in order.
pub trait SliceSequence {
    /// Atoms of the PRM restricted to slice `n` (1-based; must equal
    /// `consumed() + 1`).
    fn sample_slice(&mut self, n: usize, stream: &mut RngStream) -> Result<Vec<Atom>>;

    fn consumed(&self) -> usize;

    /// Sup-norm bound on every atom of the slices not yet consumed. The
    /// geometric bound suffices; implementations may return a tighter one.
    fn remaining_bound(&self) -> f64;
}

impl SliceSequence for RadialShells<'_> {
    fn sample_slice(&mut self, n: usize, stream: &mut RngStream) -> Result<Vec<Atom>> {
        sample_radial_shell(self, n, stream)
    }

    fn consumed(&self) -> usize {
        RadialShells::consumed(self)
    }

    fn remaining_bound(&self) -> f64 {
        RadialShells::remaining_bound(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VectorDiagnostics {
    pub slices_consumed: u64,
    pub atoms_simulated: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Clone, Debug)]
pub struct VectorSample {
    pub values: Vec<f64>,
    pub diagnostics: VectorDiagnostics,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Alg2Options {
    /// Slices consumed before giving up; unbounded when `None`.
    pub max_slices: Option<u64>,
}

/// Exact sample of the max-id vector with exponent measure `measure` on
/// coordinates `1..=d`, reading the residual PRM from `slices`.
///
/// `measure` answers the finite-mass queries and samples the `J0` parts;
/// slice atoms positive at a `J0` coordinate belong to those parts and are
/// dropped.
pub fn simulate_vector<M: ExponentMeasure + ?Sized, S: SliceSequence + ?Sized>(
    measure: &M,
    slices: &mut S,
    d: usize,
    options: &Alg2Options,
    stream: &mut RngStream,
) -> Result<VectorSample> {
    let start = Instant::now();
    if d == 0 {
        return Err(Error::Usage("vector dimension must be at least 1".into()));
    }
    let locations = index_locations(d);
    let split = zero_mass_split(measure, &locations)?;
    let mut diag = VectorDiagnostics::default();
    let mut values = vec![0.0f64; d];
    let absorb = |atoms: &[Atom], values: &mut [f64]| {
        for f in atoms {
            for (v, loc) in values.iter_mut().zip(&locations) {
                *v = v.max(f.value(loc));
            }
        }
    };

    for &j in split.j0() {
        let atoms = split.sample_component(j, stream)?;
        diag.atoms_simulated += atoms.len() as u64;
        absorb(&atoms, &mut values);
    }

    let free: Vec<usize> = (0..d).filter(|&i| !split.is_zero_location(i)).collect();
    if !free.is_empty() {
        let zero_locations = split.zero_locations().to_vec();
        let mut residual = vec![0.0f64; d];
        loop {
            let floor = free.iter().map(|&i| residual[i]).fold(f64::INFINITY, f64::min);
            if floor >= slices.remaining_bound() {
                break;
            }
            if options
                .max_slices
                .is_some_and(|cap| diag.slices_consumed >= cap)
            {
                return Err(Error::SliceCap {
                    slices: diag.slices_consumed,
                });
            }
            let n = slices.consumed() + 1;
            let mut atoms = slices.sample_slice(n, stream)?;
            diag.slices_consumed += 1;
            diag.atoms_simulated += atoms.len() as u64;
            atoms.retain(|f| zero_locations.iter().all(|z| f.value(z) == 0.0));
            absorb(&atoms, &mut residual);
        }
        for (v, r) in values.iter_mut().zip(&residual) {
            *v = v.max(*r);
        }
    }

    diag.wall_time = start.elapsed();
    Ok(VectorSample {
        values,
        diagnostics: diag,
    })
}

/// Exact sample from a scale-mixture measure using radial shells.
pub fn simulate_scale_mixture(
    measure: &ScaleMixtureMeasure,
    options: &Alg2Options,
    stream: &mut RngStream,
) -> Result<VectorSample> {
    let mut shells = RadialShells::new(measure);
    simulate_vector(measure, &mut shells, measure.dimension(), options, stream)
}

/// Vector with reciprocal Archimedean copula: radial measure `radial` and
/// the uniform angular law on the 1-norm simplex.
pub fn reciprocal_archimedean_vector(
    radial: RadialMeasure,
    d: usize,
    stream: &mut RngStream,
) -> Result<VectorSample> {
    let measure = ScaleMixtureMeasure::reciprocal_archimedean(radial, d)?;
    simulate_scale_mixture(&measure, &Alg2Options::default(), stream)
}
