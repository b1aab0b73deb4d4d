use std::sync::Arc;

use super::{check_band, check_cut, Atom, ExponentMeasure, Location};
use crate::error::{domain, Result};
use crate::samplers::{poisson_variate, RngStream};

/// A finite exponent measure `sum_k w_k delta_{f_k}` over tabulated atoms.
#[derive(Clone, Debug)]
pub struct DiscreteFiniteMeasure {
    weights: Vec<f64>,
    atoms: Vec<Atom>,
}

impl DiscreteFiniteMeasure {
    pub fn new(entries: Vec<(f64, Vec<(Location, f64)>)>) -> Result<Self> {
        if entries.is_empty() {
            return domain("a discrete measure needs at least one atom");
        }
        let mut weights = Vec::with_capacity(entries.len());
        let mut atoms = Vec::with_capacity(entries.len());
        for (w, table) in entries {
            if !(w > 0.0) || !w.is_finite() {
                return domain(format!("atom weights must be finite and positive, got {w}"));
            }
            for (loc, v) in &table {
                loc.validate()?;
                if !(*v >= 0.0) || !v.is_finite() {
                    return domain(format!("atom values must be finite and non-negative, got {v}"));
                }
            }
            if table.iter().all(|&(_, v)| v == 0.0) {
                return domain("atoms must not be identically zero");
            }
            weights.push(w);
            atoms.push(Atom::discrete(Arc::from(table)));
        }
        Ok(Self { weights, atoms })
    }

    /// Atoms given as value vectors over shared `locations`.
    pub fn from_vectors(locations: &[Location], entries: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let mut tables = Vec::with_capacity(entries.len());
        for (w, values) in entries {
            if values.len() != locations.len() {
                return domain(format!(
                    "atom has {} values for {} locations",
                    values.len(),
                    locations.len()
                ));
            }
            tables.push((w, locations.iter().copied().zip(values).collect()));
        }
        Self::new(tables)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The whole (finite) PRM.
    pub fn sample_all(&self, stream: &mut RngStream) -> Result<Vec<Atom>> {
        self.sample_where(stream, |_| true)
    }

    fn sample_where(
        &self,
        stream: &mut RngStream,
        keep: impl Fn(&Atom) -> bool,
    ) -> Result<Vec<Atom>> {
        let eligible: Vec<usize> = (0..self.atoms.len()).filter(|&k| keep(&self.atoms[k])).collect();
        let mass: f64 = eligible.iter().map(|&k| self.weights[k]).sum();
        let count = poisson_variate(stream, mass)?;
        let mut out = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let mut pick = stream.uniform() * mass;
            let mut chosen = *eligible.last().expect("count > 0 implies mass > 0");
            for &k in &eligible {
                if pick < self.weights[k] {
                    chosen = k;
                    break;
                }
                pick -= self.weights[k];
            }
            out.push(self.atoms[chosen].clone());
        }
        Ok(out)
    }
}

impl ExponentMeasure for DiscreteFiniteMeasure {
    fn supports(&self, loc: &Location) -> bool {
        loc.validate().is_ok()
    }

    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        check_cut(c)?;
        Ok(self
            .atoms
            .iter()
            .zip(&self.weights)
            .filter(|(f, _)| f.value(loc) >= c)
            .map(|(_, w)| w)
            .sum())
    }

    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>> {
        Ok(Some(
            self.atoms
                .iter()
                .zip(&self.weights)
                .filter(|(f, _)| f.value(loc) > 0.0)
                .map(|(_, w)| w)
                .sum(),
        ))
    }

    fn sample_band(
        &self,
        loc: &Location,
        c_lo: f64,
        c_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>> {
        check_band(c_lo, c_hi)?;
        self.sample_where(stream, |f| {
            let v = f.value(loc);
            v >= c_lo && v < c_hi
        })
    }

    fn sample_positive(&self, loc: &Location, stream: &mut RngStream) -> Result<Vec<Atom>> {
        self.sample_where(stream, |f| f.value(loc) > 0.0)
    }
}
