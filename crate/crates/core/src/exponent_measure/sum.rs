use super::{check_band, check_cut, Atom, ExponentMeasure, Location};
use crate::error::{domain, Error, Result};
use crate::samplers::RngStream;

/// `mu = sum_k mu_k`; the PRM is the superposition of independent PRMs.
pub struct SumMeasure {
    parts: Vec<Box<dyn ExponentMeasure>>,
}

impl SumMeasure {
    pub fn new(parts: Vec<Box<dyn ExponentMeasure>>) -> Result<Self> {
        if parts.is_empty() {
            return domain("a sum measure needs at least one part");
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Box<dyn ExponentMeasure>] {
        &self.parts
    }

    fn supporting(&self, loc: &Location) -> impl Iterator<Item = &Box<dyn ExponentMeasure>> {
        let loc = *loc;
        self.parts.iter().filter(move |p| p.supports(&loc))
    }
}

impl ExponentMeasure for SumMeasure {
    fn supports(&self, loc: &Location) -> bool {
        self.parts.iter().any(|p| p.supports(loc))
    }

    fn mass_above(&self, loc: &Location, c: f64) -> Result<f64> {
        check_cut(c)?;
        self.supporting(loc).map(|p| p.mass_above(loc, c)).sum()
    }

    fn positive_mass(&self, loc: &Location) -> Result<Option<f64>> {
        let mut total = 0.0;
        for p in self.supporting(loc) {
            match p.positive_mass(loc)? {
                Some(m) => total += m,
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }

    fn sample_band(
        &self,
        loc: &Location,
        c_lo: f64,
        c_hi: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<Atom>> {
        check_band(c_lo, c_hi)?;
        let mut out = Vec::new();
        for p in self.supporting(loc) {
            out.extend(p.sample_band(loc, c_lo, c_hi, stream)?);
        }
        Ok(out)
    }

    fn sample_positive(&self, loc: &Location, stream: &mut RngStream) -> Result<Vec<Atom>> {
        if self.positive_mass(loc)?.is_none() {
            return Err(Error::Usage(format!("{loc:?} carries infinite positive mass")));
        }
        let mut out = Vec::new();
        for p in self.supporting(loc) {
            out.extend(p.sample_positive(loc, stream)?);
        }
        Ok(out)
    }

    fn characteristic_cut(&self) -> Option<f64> {
        self.parts.iter().filter_map(|p| p.characteristic_cut()).reduce(f64::max)
    }
}
