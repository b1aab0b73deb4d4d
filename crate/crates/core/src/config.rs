//! Declarative model families, from JSON or a compact `tag(k=v, ...)` form.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::exchangeable_mo::{
    simulate_exogenous_sequence, simulate_mo_sequence, AdditiveSpec, LevyDensity, LevySpec,
};
use crate::exponent_measure::{
    index_locations, AngularLaw, DiscreteFiniteMeasure, RadialMeasure, ScaleMixtureMeasure,
};
use crate::process_sim::{simulate_process, Alg1Options};
use crate::samplers::{PowerLawEnvelope, PowerLawPiece, RngStream};
use crate::vector_sim::{simulate_scale_mixture, Alg2Options};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyConfig {
    Stable { alpha: f64 },
    Gamma { beta: f64, eta: f64 },
    Table { pieces: Vec<PowerLawPiece>, envelope: Vec<PowerLawPiece> },
}

impl LevyConfig {
    fn build(&self, drift: f64) -> Result<LevySpec> {
        let spec = match self {
            LevyConfig::Stable { alpha } => LevySpec::stable(*alpha)?,
            LevyConfig::Gamma { beta, eta } => LevySpec::gamma(*beta, *eta)?,
            LevyConfig::Table { pieces, envelope } => LevySpec::new(
                LevyDensity::Table {
                    pieces: pieces.clone(),
                },
                Some(PowerLawEnvelope::new(envelope.clone())?),
            )?,
        };
        spec.check_envelope()?;
        spec.with_drift(drift)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteAtomConfig {
    pub weight: f64,
    pub values: Vec<f64>,
}

/// Radial part of a scale mixture. `"frechet"` alone means unit Fréchet
/// margins under the uniform simplex law (`scale = d`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadialConfig {
    Named(String),
    Full(RadialMeasure),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    MoStable {
        #[serde(default = "half")]
        alpha: f64,
        #[serde(default)]
        drift: f64,
    },
    MoGamma {
        beta: f64,
        eta: f64,
        #[serde(default)]
        drift: f64,
    },
    MoTable {
        pieces: Vec<PowerLawPiece>,
        envelope: Vec<PowerLawPiece>,
        #[serde(default)]
        drift: f64,
    },
    /// Separable shock intensity `rate(s) g(u)`.
    MoAdditive {
        time_pieces: Vec<PowerLawPiece>,
        levy: LevyConfig,
    },
    ScaleMixture {
        radial: RadialConfig,
        #[serde(default)]
        angular: Option<AngularLaw>,
    },
    Discrete {
        atoms: Vec<DiscreteAtomConfig>,
    },
}

fn half() -> f64 {
    0.5
}

/// A validated, ready-to-sample model.
#[derive(Clone, Debug)]
pub enum Model {
    Sequence(LevySpec),
    Additive(AdditiveSpec),
    Mixture(ScaleMixtureMeasure),
    Discrete(DiscreteFiniteMeasure, usize),
}

/// One replicate and its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replicate {
    pub values: Vec<f64>,
    pub atoms_simulated: u64,
    /// Bands per location (band descent) or `[slices]` (radial shells).
    pub steps: Vec<u64>,
}

impl FamilyConfig {
    /// Compact form, e.g. `mo-stable(alpha=0.5)` or `scale-mixture(frechet)`.
    pub fn parse_compact(text: &str) -> Result<Self> {
        let text = text.trim();
        let (tag, args) = match text.find('(') {
            Some(open) => {
                let Some(inner) = text[open + 1..].strip_suffix(')') else {
                    return Err(Error::Usage(format!("unbalanced parentheses in family `{text}`")));
                };
                (&text[..open], inner)
            }
            None => (text, ""),
        };
        if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_lowercase() || c == '-') {
            return Err(Error::Usage(format!("malformed family tag `{text}`")));
        }
        let mut obj = Map::new();
        let mut sub = Map::new();
        let mut positional = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    let v = v.trim();
                    let value = v
                        .parse::<f64>()
                        .map(Value::from)
                        .unwrap_or_else(|_| Value::from(v));
                    sub.insert(k.trim().to_string(), value);
                }
                None => positional.push(part.to_string()),
            }
        }
        obj.insert("family".into(), Value::from(tag));
        match tag {
            "scale-mixture" => {
                let [kind] = positional.as_slice() else {
                    return Err(Error::Usage(
                        "scale-mixture takes one radial kind, e.g. scale-mixture(frechet)".into(),
                    ));
                };
                let radial = if sub.is_empty() && kind == "frechet" {
                    Value::from("frechet")
                } else {
                    sub.insert("kind".into(), Value::from(kind.as_str()));
                    Value::Object(sub)
                };
                obj.insert("radial".into(), radial);
            }
            _ => {
                if !positional.is_empty() {
                    return Err(Error::Usage(format!(
                        "family `{tag}` takes key=value parameters only"
                    )));
                }
                obj.extend(sub);
            }
        }
        Self::from_value(Value::Object(obj))
    }

    pub fn from_value(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Usage(format!("invalid family: {e}")))
    }

    pub fn is_sequence(&self) -> bool {
        matches!(
            self,
            FamilyConfig::MoStable { .. }
                | FamilyConfig::MoGamma { .. }
                | FamilyConfig::MoTable { .. }
                | FamilyConfig::MoAdditive { .. }
        )
    }

    /// Dimension fixed by the family itself, if any.
    pub fn natural_dimension(&self) -> Option<usize> {
        match self {
            FamilyConfig::ScaleMixture {
                angular: Some(a), ..
            } => Some(a.dimension()),
            FamilyConfig::Discrete { atoms } => atoms.first().map(|a| a.values.len()),
            _ => None,
        }
    }

    /// Validate every parameter and build the model for dimension `d`.
    pub fn build(&self, d: usize) -> Result<Model> {
        if d == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        match self {
            FamilyConfig::MoStable { alpha, drift } => {
                LevyConfig::Stable { alpha: *alpha }.build(*drift).map(Model::Sequence)
            }
            FamilyConfig::MoGamma { beta, eta, drift } => LevyConfig::Gamma {
                beta: *beta,
                eta: *eta,
            }
            .build(*drift)
            .map(Model::Sequence),
            FamilyConfig::MoTable {
                pieces,
                envelope,
                drift,
            } => LevyConfig::Table {
                pieces: pieces.clone(),
                envelope: envelope.clone(),
            }
            .build(*drift)
            .map(Model::Sequence),
            FamilyConfig::MoAdditive { time_pieces, levy } => {
                let levy = levy.build(0.0)?;
                Ok(Model::Additive(AdditiveSpec::separable(time_pieces.clone(), &levy)?))
            }
            FamilyConfig::ScaleMixture { radial, angular } => {
                let radial = match radial {
                    RadialConfig::Named(name) if name == "frechet" => RadialMeasure::frechet(d as f64),
                    RadialConfig::Named(name) => {
                        return Err(Error::Config(format!("unknown radial shorthand `{name}`")))
                    }
                    RadialConfig::Full(r) => r.clone(),
                };
                let angular = angular.clone().unwrap_or_else(|| AngularLaw::uniform_simplex(d));
                let m = ScaleMixtureMeasure::new(radial, angular)?;
                if m.dimension() != d {
                    return Err(Error::Config(format!(
                        "angular law has dimension {}, but d = {d}",
                        m.dimension()
                    )));
                }
                Ok(Model::Mixture(m))
            }
            FamilyConfig::Discrete { atoms } => {
                if atoms.iter().any(|a| a.values.len() != d) {
                    return Err(Error::Config(format!("every discrete atom needs {d} values")));
                }
                let m = DiscreteFiniteMeasure::from_vectors(
                    &index_locations(d),
                    atoms.iter().map(|a| (a.weight, a.values.clone())).collect(),
                )?;
                Ok(Model::Discrete(m, d))
            }
        }
    }
}

impl Model {
    pub fn simulate(&self, d: usize, stream: &mut RngStream) -> Result<Replicate> {
        match self {
            Model::Sequence(spec) => {
                let out = simulate_mo_sequence(spec, d, stream)?;
                Ok(Replicate {
                    values: out.reciprocals,
                    atoms_simulated: out.diagnostics.atoms_simulated,
                    steps: out.diagnostics.bands_scanned,
                })
            }
            Model::Additive(spec) => {
                let out = simulate_exogenous_sequence(spec, d, stream)?;
                Ok(Replicate {
                    values: out.reciprocals,
                    atoms_simulated: out.diagnostics.atoms_simulated,
                    steps: out.diagnostics.bands_scanned,
                })
            }
            Model::Mixture(m) => {
                let out = simulate_scale_mixture(m, &Alg2Options::default(), stream)?;
                Ok(Replicate {
                    values: out.values,
                    atoms_simulated: out.diagnostics.atoms_simulated,
                    steps: vec![out.diagnostics.slices_consumed],
                })
            }
            Model::Discrete(m, d) => {
                let out = simulate_process(m, &index_locations(*d), &Alg1Options::default(), stream)?;
                Ok(Replicate {
                    values: out.values,
                    atoms_simulated: out.diagnostics.atoms_simulated,
                    steps: out.diagnostics.bands_scanned,
                })
            }
        }
    }
}

/// A run configuration file. Command-line flags override its fields.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub schema_version: u32,
    #[serde(default)]
    pub family: Option<Value>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl RunFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: RunFile =
            serde_json::from_str(text).map_err(|e| Error::Usage(format!("invalid params file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn family(&self) -> Result<Option<FamilyConfig>> {
        self.family.clone().map(FamilyConfig::from_value).transpose()
    }
}
