//! Exponent measures and the atoms of their Poisson random measures.
//!
//! A family implements [`ExponentMeasure`]: it answers restricted-mass
//! queries and samples finite Poisson random measures (PRMs) on
//! "bands" `{f : c_lo <= f(t) < c_hi}`. Everything the simulation drivers
//! need is built on top of those two capabilities.

mod discrete;
mod scale_mixture;
mod sum;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::samplers::{keyed_uniform, RngStream};

pub use discrete::DiscreteFiniteMeasure;
pub use scale_mixture::{
    sample_radial_shell, AngularLaw, RadialMeasure, RadialShells, ScaleMixtureMeasure,
};
pub use sum::SumMeasure;

/// A point of the index set: a real coordinate or a positive sequence index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Point(f64),
    Index(u64),
}

impl Location {
    pub fn index(i: u64) -> Self {
        Location::Index(i)
    }

    /// The 1-based sequence index, if any.
    pub fn as_index(&self) -> Option<u64> {
        match *self {
            Location::Index(i) => Some(i),
            Location::Point(_) => None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            Location::Index(0) => domain("sequence indices start at 1"),
            Location::Point(t) if !t.is_finite() => domain(format!("non-finite location {t}")),
            _ => Ok(()),
        }
    }
}

/// The locations `1..=d` of a random vector or sequence.
pub fn index_locations(d: usize) -> Vec<Location> {
    (1..=d as u64).map(Location::Index).collect()
}

/// How an atom was generated. Determines how it evaluates.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// `radius * angle`, with `angle` a point of the non-negative unit sphere
    /// indexed by `Location::Index(1..=d)`.
    Radial { radius: f64, angle: Arc<[f64]> },
    /// Reciprocal of a two-point shock sequence: `1/time` at every index the
    /// shock hits, `0` elsewhere. The anchor index is always hit; any other
    /// index is hit with probability `1 - exp(-jump)`, realized lazily from
    /// the counter-based stream keyed by `key`.
    Shock {
        time: f64,
        jump: f64,
        anchor: u64,
        key: u64,
    },
    /// A finite table; locations not listed evaluate to zero.
    Discrete { table: Arc<[(Location, f64)]> },
}

/// One atom `f` of a PRM on the space of non-negative functions.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    provenance: Provenance,
    hit_probability: f64,
}

impl Atom {
    pub fn radial(radius: f64, angle: Arc<[f64]>) -> Self {
        Self {
            provenance: Provenance::Radial { radius, angle },
            hit_probability: 0.0,
        }
    }

    pub fn shock(time: f64, jump: f64, anchor: u64, key: u64) -> Self {
        Self {
            provenance: Provenance::Shock {
                time,
                jump,
                anchor,
                key,
            },
            hit_probability: -(-jump).exp_m1(),
        }
    }

    pub fn discrete(table: Arc<[(Location, f64)]>) -> Self {
        Self {
            provenance: Provenance::Discrete { table },
            hit_probability: 0.0,
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Evaluate `f(loc)`. Repeated calls return identical values.
    #[inline]
    pub fn value(&self, loc: &Location) -> f64 {
        match &self.provenance {
            Provenance::Radial { radius, angle } => match *loc {
                Location::Index(i) if i >= 1 && (i as usize) <= angle.len() => {
                    radius * angle[i as usize - 1]
                }
                _ => 0.0,
            },
            Provenance::Shock {
                time, anchor, key, ..
            } => match *loc {
                Location::Index(i) if i == *anchor => 1.0 / time,
                Location::Index(i) => {
                    if keyed_uniform(*key, i) < self.hit_probability {
                        1.0 / time
                    } else {
                        0.0
                    }
                }
                Location::Point(_) => 0.0,
            },
            Provenance::Discrete { table } => table
                .iter()
                .find(|(l, _)| l == loc)
                .map_or(0.0, |&(_, v)| v),
        }
    }

    pub fn values(&self, locs: &[Location]) -> Vec<f64> {
        locs.iter().map(|l| self.value(l)).collect()
    }
}

/// Contract every exponent-measure family fulfils.
///
/// `sample_band` is the finite-PRM primitive: for `0 < c_lo < c_hi <= inf` it
/// returns an exact realization of the PRM with intensity
/// `1{c_lo <= f(t) < c_hi} dmu(f)`.
pub trait ExponentMeasure: Send + Sync {
    /// Whether atoms of this family can be evaluated at `loc`.
    fn supports(&self, loc: &Location) -> bool;

    /// `mu({f : f(t) >= c})` for `c > 0`.
    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64>;

    /// `mu({f : f(t) > 0})` when finite, `None` when infinite. Finite
    /// exactly when `P(X_t = 0) > 0`.
    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>>;

    fn sample_band(
        &self,
        loc: &Location,
        c_lo: f64,
        c_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>>;

    /// PRM with intensity `1{f(t) > 0} dmu`; only valid when
    /// [`positive_mass`](Self::positive_mass) is finite.
    fn sample_positive(&self, loc: &Location, stream: &mut RngStream) -> Result<Vec<Atom>>;

    /// A natural first cut for band descent, if the family has a scale.
    fn characteristic_cut(&self) -> Option<f64> {
        None
    }
}

impl<M: ExponentMeasure + ?Sized> ExponentMeasure for &M {
    fn supports(&self, loc: &Location) -> bool {
        (**self).supports(loc)
    }
    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        (**self).mass_above(loc, c)
    }
    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>> {
        (**self).positive_mass(loc)
    }
    fn sample_band(&self, loc: &Location, lo: f64, hi: f64, s: &mut RngStream) -> Result<Vec<Atom>> {
        (**self).sample_band(loc, lo, hi, s)
    }
    fn sample_positive(&self, loc: &Location, s: &mut RngStream) -> Result<Vec<Atom>> {
        (**self).sample_positive(loc, s)
    }
    fn characteristic_cut(&self) -> Option<f64> {
        (**self).characteristic_cut()
    }
}

impl<M: ExponentMeasure + ?Sized> ExponentMeasure for Box<M> {
    fn supports(&self, loc: &Location) -> bool {
        (**self).supports(loc)
    }
    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        (**self).mass_above(loc, c)
    }
    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>> {
        (**self).positive_mass(loc)
    }
    fn sample_band(&self, loc: &Location, lo: f64, hi: f64, s: &mut RngStream) -> Result<Vec<Atom>> {
        (**self).sample_band(loc, lo, hi, s)
    }
    fn sample_positive(&self, loc: &Location, s: &mut RngStream) -> Result<Vec<Atom>> {
        (**self).sample_positive(loc, s)
    }
    fn characteristic_cut(&self) -> Option<f64> {
        (**self).characteristic_cut()
    }
}

pub(crate) fn check_band(c_lo: f64, c_hi: f64) -> Result<()> {
    if !(c_lo > 0.0) || !c_lo.is_finite() {
        return domain(format!("band floor must be positive and finite, got {c_lo}"));
    }
    if !(c_hi > c_lo) {
        return domain(format!("band needs c_lo < c_hi, got [{c_lo}, {c_hi})"));
    }
    Ok(())
}

pub(crate) fn check_cut(c: f64) -> Result<()> {
    if !(c > 0.0) {
        return domain(format!("threshold must be positive, got {c}"));
    }
    Ok(())
}

/// PRM with intensity `1{c_lo <= f(t) < c_hi} dmu~`, where `mu~` is `mu`
/// restricted to `{f : f(z) = 0 for every z in zero_locations}`.
pub fn sample_band<M: ExponentMeasure + ?Sized>(
    measure: &M,
    loc: &Location,
    c_lo: f64,
    c_hi: f64,
    zero_locations: &[Location],
    stream: &mut RngStream,
) -> Result<Vec<Atom>> {
    check_band(c_lo, c_hi)?;
    let mut atoms = measure.sample_band(loc, c_lo, c_hi, stream)?;
    atoms.retain(|f| zero_locations.iter().all(|z| f.value(z) == 0.0));
    Ok(atoms)
}

/// `mu` at the queried locations split into finite parts `mu_j`, `j` in
/// `J0`, and the residual `mu~`.
///
/// `J0` holds the positions (into `locations`) whose positive mass is
/// finite. `mu_j` lives on `{f(t_j) > 0, f(t_k) = 0 for k < j, k in J0}` and
/// `mu~` on `{f(t_j) = 0 for all j in J0}`; the parts are disjoint and sum
/// to `mu`.
pub struct ZeroMassSplit<'a, M: ExponentMeasure + ?Sized> {
    measure: &'a M,
    locations: &'a [Location],
    j0: Vec<usize>,
    component_masses: Vec<f64>,
    zero_locations: Vec<Location>,
}

pub fn zero_mass_split<'a, M: ExponentMeasure + ?Sized>(
    measure: &'a M,
    locations: &'a [Location],
) -> Result<ZeroMassSplit<'a, M>> {
    let mut j0 = Vec::new();
    let mut component_masses = Vec::new();
    for (j, loc) in locations.iter().enumerate() {
        loc.validate()?;
        if let Some(m) = measure.positive_mass(loc)? {
            j0.push(j);
            component_masses.push(m);
        }
    }
    let zero_locations = j0.iter().map(|&j| locations[j]).collect();
    Ok(ZeroMassSplit {
        measure,
        locations,
        j0,
        component_masses,
        zero_locations,
    })
}

impl<'a, M: ExponentMeasure + ?Sized> ZeroMassSplit<'a, M> {
    pub fn j0(&self) -> &[usize] {
        &self.j0
    }

    pub fn is_zero_location(&self, position: usize) -> bool {
        self.j0.binary_search(&position).is_ok()
    }

    /// `mu({f(t_j) > 0})` for each member of `J0`, an upper bound on the
    /// mass of `mu_j`.
    pub fn positive_masses(&self) -> &[f64] {
        &self.component_masses
    }

    pub fn zero_locations(&self) -> &[Location] {
        &self.zero_locations
    }

    /// Sample the finite PRM with intensity `mu_j` (`j` a member of `J0`).
    pub fn sample_component(&self, j: usize, stream: &mut RngStream) -> Result<Vec<Atom>> {
        let rank = self
            .j0
            .binary_search(&j)
            .map_err(|_| crate::Error::Usage(format!("location {j} is not in J0")))?;
        let earlier = &self.zero_locations[..rank];
        let mut atoms = self.measure.sample_positive(&self.locations[j], stream)?;
        atoms.retain(|f| earlier.iter().all(|z| f.value(z) == 0.0));
        Ok(atoms)
    }

    /// Band of the residual measure `mu~` at location position `i`.
    pub fn sample_residual_band(
        &self,
        i: usize,
        c_lo: f64,
        c_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>> {
        sample_band(
            self.measure,
            &self.locations[i],
            c_lo,
            c_hi,
            &self.zero_locations,
            stream,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shock_atom_anchor_and_cache() {
        let a = Atom::shock(0.25, 1.3, 3, 99);
        assert_eq!(a.value(&Location::Index(3)), 4.0);
        for i in 1..50 {
            let l = Location::Index(i);
            let v = a.value(&l);
            assert!(v == 0.0 || v == 4.0);
            assert_eq!(v, a.value(&l));
        }
        assert_eq!(a.value(&Location::Point(0.5)), 0.0);
    }

    #[test]
    fn radial_atom_evaluates_coordinates() {
        let a = Atom::radial(2.0, Arc::from(vec![0.25, 0.75]));
        assert_eq!(a.values(&index_locations(3)), vec![0.5, 1.5, 0.0]);
    }

    #[test]
    fn discrete_atom_is_zero_off_table() {
        let t: Arc<[(Location, f64)]> =
            Arc::from(vec![(Location::Point(0.0), 1.0), (Location::Point(1.0), 2.0)]);
        let a = Atom::discrete(t);
        assert_eq!(a.value(&Location::Point(1.0)), 2.0);
        assert_eq!(a.value(&Location::Point(0.5)), 0.0);
    }

    #[test]
    fn hit_fraction_matches_two_point_law() {
        // Given jump u, an off-anchor index is hit w.p. 1 - e^{-u}.
        let u: f64 = 0.7;
        let p = -(-u).exp_m1();
        let n = 10_000u64;
        let mut s = RngStream::new(5, 0);
        let hits = (0..n)
            .filter(|_| Atom::shock(0.5, u, 1, s.bits()).value(&Location::Index(2)) > 0.0)
            .count() as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn location_validation() {
        assert!(Location::Index(0).validate().is_err());
        assert!(Location::Point(f64::NAN).validate().is_err());
        assert!(Location::Index(1).validate().is_ok());
    }

    proptest! {
        #[test]
        fn shock_evaluation_is_idempotent(key in any::<u64>(), jump in 0.0f64..10.0, idx in 1u64..10_000) {
            let a = Atom::shock(0.3, jump, 1, key);
            let l = Location::Index(idx);
            prop_assert_eq!(a.value(&l), a.value(&l));
        }
    }
}
