use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use maxid::config::{FamilyConfig, Model, Replicate, RunFile, SCHEMA_VERSION};
use maxid::exchangeable_mo::{simulate_exogenous_sequence, LevySpec};
use maxid::exponent_measure::{index_locations, ExponentMeasure};
use maxid::validation::{
    bench_scaling, format_real, frequency_check, ks_statistic, ks_test, replicate, scaled_min_exp_check,
    scaled_minima, write_report_csv, write_report_json, ReportRow, PANEL_REQUIRED,
};
use maxid::Error;

use crate::Format;

const PANEL_SIZE: u64 = 5;
const LARGE_D: usize = 10_000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Runtime(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 1,
            CliError::Runtime(Error::Usage(_) | Error::Config(_) | Error::Domain(_)) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Runtime(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Flags merged over the optional run file.
#[derive(Debug)]
pub struct Settings {
    pub family: FamilyConfig,
    pub d: Option<usize>,
    pub n: usize,
    pub seed: u64,
    pub dims: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub alpha: f64,
}

impl Settings {
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        family: Option<String>,
        params: Option<PathBuf>,
        d: Option<usize>,
        n: Option<usize>,
        seed: Option<u64>,
        dims: Option<Vec<usize>>,
        out: Option<PathBuf>,
        format: Format,
        alpha: Option<f64>,
    ) -> Result<Self, CliError> {
        let file = match &params {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                RunFile::parse(&text)?
            }
            None => RunFile {
                schema_version: SCHEMA_VERSION,
                ..Default::default()
            },
        };
        let family = match family {
            Some(tag) => FamilyConfig::parse_compact(&tag)?,
            None => file
                .family()?
                .ok_or_else(|| CliError::Usage("no family given; pass --family or --params".into()))?,
        };
        let alpha = alpha.or(file.alpha).unwrap_or(0.01);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")));
        }
        let d = d.or(file.d).or_else(|| family.natural_dimension());
        Ok(Self {
            family,
            d,
            n: n.or(file.n).unwrap_or(1000),
            seed: seed.or(file.seed).unwrap_or(0),
            dims: dims.or(file.dims),
            out,
            format,
            alpha,
        })
    }

    fn dimension(&self) -> Result<usize, CliError> {
        match self.d {
            Some(0) => Err(CliError::Usage("--d must be at least 1".into())),
            Some(d) => Ok(d),
            None => Err(CliError::Usage("--d is required for this family".into())),
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn sequence_spec(&self, command: &str) -> Result<LevySpec, CliError> {
        match self.family.build(1)? {
            Model::Sequence(spec) => Ok(spec),
            _ => Err(CliError::Usage(format!(
                "{command} supports the mo-stable, mo-gamma and mo-table families only"
            ))),
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    family: &'a FamilyConfig,
    d: usize,
    n: usize,
    seed: u64,
    step_kind: &'static str,
    atoms_simulated_total: u64,
    replicates: Vec<ReplicateDiagnostics<'a>>,
}

#[derive(Serialize)]
struct ReplicateDiagnostics<'a> {
    atoms_simulated: u64,
    steps: &'a [u64],
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".diagnostics.json");
    PathBuf::from(name)
}

pub fn simulate(settings: &Settings) -> Result<(), CliError> {
    let d = settings.dimension()?;
    let model = settings.family.build(d)?;
    let start = Instant::now();
    let reps: Vec<Replicate> = replicate(settings.n, settings.seed, |s| model.simulate(d, s))?;
    let elapsed = start.elapsed();

    let mut out = settings.sink()?;
    match settings.format {
        Format::Csv => {
            let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            writeln!(out, "{}", header.join(","))?;
            for r in &reps {
                let row: Vec<String> = r.values.iter().map(|&v| format_real(v)).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Format::Json => {
            let rows: Vec<&[f64]> = reps.iter().map(|r| r.values.as_slice()).collect();
            serde_json::to_writer(&mut out, &serde_json::json!({ "d": d, "n": settings.n, "values": rows }))?;
            writeln!(out)?;
        }
    }
    out.flush()?;

    if let Some(path) = &settings.out {
        let step_kind = match model {
            Model::Mixture(_) => "slices_consumed",
            _ => "bands_per_location",
        };
        let sidecar = Sidecar {
            schema_version: SCHEMA_VERSION,
            family: &settings.family,
            d,
            n: settings.n,
            seed: settings.seed,
            step_kind,
            atoms_simulated_total: reps.iter().map(|r| r.atoms_simulated).sum(),
            replicates: reps
                .iter()
                .map(|r| ReplicateDiagnostics {
                    atoms_simulated: r.atoms_simulated,
                    steps: &r.steps,
                })
                .collect(),
        };
        let mut f = BufWriter::new(File::create(sidecar_path(path))?);
        serde_json::to_writer_pretty(&mut f, &sidecar)?;
        writeln!(f)?;
        f.flush()?;
    }
    eprintln!("simulated {} replicates with d = {d} in {:.3} s", settings.n, elapsed.as_secs_f64());
    Ok(())
}

fn exp_cdf(x: f64) -> f64 {
    if x > 0.0 {
        -(-x).exp_m1()
    } else {
        0.0
    }
}

/// Rows for one panel seed at dimension `d`.
fn family_checks(model: &Model, d: usize, n: usize, seed: u64, alpha: f64) -> Result<Vec<ReportRow>, CliError> {
    let rows = match model {
        Model::Sequence(spec) => {
            let ks = scaled_min_exp_check(spec, d, n, seed, alpha, None)?;
            vec![ReportRow::from_ks("scaled_min_exp", d, seed, &ks)]
        }
        Model::Additive(spec) => {
            let times = replicate(n, seed, |s| Ok(simulate_exogenous_sequence(spec, d, s)?.hitting_times[0]))?;
            let ks = ks_test(
                &times,
                |t| {
                    if t > 0.0 {
                        spec.mass_until(t).map(|m| -(-m).exp_m1()).unwrap_or(f64::NAN)
                    } else {
                        0.0
                    }
                },
                alpha,
            )?;
            vec![ReportRow::from_ks("margin_time_cdf", d, seed, &ks)]
        }
        Model::Mixture(m) => {
            let loc = index_locations(d)[0];
            let xs = replicate(n, seed, |s| Ok(model.simulate(d, s)?.values[0]))?;
            let ks = ks_test(
                &xs,
                |x| {
                    let mass = if x > 0.0 {
                        m.mass_above(&loc, x).ok()
                    } else {
                        m.positive_mass(&loc).ok().map(|p| p.unwrap_or(f64::INFINITY))
                    };
                    mass.map_or(f64::NAN, |v| (-v).exp())
                },
                alpha,
            )?;
            vec![ReportRow::from_ks("margin_cdf", d, seed, &ks)]
        }
        Model::Discrete(m, _) => {
            let locs = index_locations(d);
            let samples = replicate(n, seed, |s| Ok(model.simulate(d, s)?.values))?;
            let mut rows = Vec::new();
            for (i, loc) in locs.iter().enumerate() {
                let mut levels: Vec<f64> = m.atoms().iter().map(|f| f.value(loc)).filter(|&v| v > 0.0).collect();
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                for v in levels {
                    let p = (-m.mass_above(loc, v)?).exp();
                    let hits = samples.iter().filter(|x| x[i] < v).count();
                    let check = frequency_check(hits, n, p, f64::INFINITY);
                    rows.push(ReportRow {
                        test: format!("margin_below_x{}_{}", i + 1, format_real(v)),
                        d,
                        n,
                        statistic: check.z_score(),
                        p_value: check.p_value(),
                        pass: check.p_value() >= alpha,
                        seed,
                    });
                }
            }
            rows
        }
    };
    Ok(rows)
}

fn write_rows(settings: &Settings, rows: &[ReportRow]) -> Result<(), CliError> {
    let mut out = settings.sink()?;
    match settings.format {
        Format::Csv => write_report_csv(rows, &mut out)?,
        Format::Json => write_report_json(rows, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

pub fn validate(settings: &Settings) -> Result<(), CliError> {
    let dims = match &settings.dims {
        Some(dims) => dims.clone(),
        None => vec![settings.dimension()?],
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(CliError::Usage("dimensions must be positive".into()));
    }
    if settings.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let models = dims
        .iter()
        .map(|&d| settings.family.build(d))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut passed_seeds = 0;
    for k in 0..PANEL_SIZE {
        let seed = settings.seed.wrapping_add(k);
        let mut seed_ok = true;
        for (model, &d) in models.iter().zip(&dims) {
            let seed_rows = family_checks(model, d, settings.n, seed, settings.alpha)?;
            seed_ok &= seed_rows.iter().all(|r| r.pass);
            rows.extend(seed_rows);
        }
        passed_seeds += usize::from(seed_ok);
    }
    write_rows(settings, &rows)?;
    eprintln!("panel: {passed_seeds} of {PANEL_SIZE} seeds passed ({PANEL_REQUIRED} required)");
    if passed_seeds >= PANEL_REQUIRED {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{passed_seeds} of {PANEL_SIZE} seeds passed, {PANEL_REQUIRED} required"
        )))
    }
}

pub fn bench(settings: &Settings, check_monotone: bool) -> Result<(), CliError> {
    let spec = settings.sequence_spec("bench")?;
    let dims = match &settings.dims {
        Some(dims) => dims.clone(),
        None => vec![settings.dimension()?],
    };
    if let Some(&big) = dims.iter().find(|&&d| d >= LARGE_D) {
        eprintln!("warning: d = {big} is slow; each replicate scans one band per coordinate");
    }
    let rows = bench_scaling(&dims, settings.n, &spec, settings.seed)?;
    let mut out = settings.sink()?;
    match settings.format {
        Format::Csv => {
            writeln!(out, "d,n,seconds,atoms_simulated")?;
            for r in &rows {
                writeln!(out, "{},{},{},{}", r.d, r.n, format_real(r.seconds), r.atoms_simulated)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if check_monotone && rows.windows(2).any(|w| w[1].seconds <= w[0].seconds) {
        return Err(CliError::Validation("bench seconds do not increase with d".into()));
    }
    Ok(())
}

pub fn plot_data(settings: &Settings) -> Result<(), CliError> {
    let spec = settings.sequence_spec("plot-data")?;
    let d = settings.dimension()?;
    if settings.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mut xs = scaled_minima(&spec, d, settings.n, settings.seed, None)?;
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let rows: Vec<[f64; 3]> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| [x, (i + 1) as f64 / n, exp_cdf(x)])
        .collect();
    let mut out = settings.sink()?;
    match settings.format {
        Format::Csv => {
            writeln!(out, "x,ecdf,exp_cdf")?;
            for [x, e, f] in &rows {
                writeln!(out, "{},{},{}", format_real(*x), format_real(*e), format_real(*f))?;
            }
        }
        Format::Json => {
            let cols = serde_json::json!({
                "x": rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
                "ecdf": rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
                "exp_cdf": rows.iter().map(|r| r[2]).collect::<Vec<_>>(),
            });
            serde_json::to_writer(&mut out, &cols)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    eprintln!("ks statistic: {}", format_real(ks_statistic(&xs, exp_cdf)?));
    Ok(())
}
