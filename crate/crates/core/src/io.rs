//! File formats.
//!
//! A point-set file is a JSON array whose entries are either `[re, im]` or
//! an object `{"z": [re, im], "multiplicity": m, "value": [re, im]}` with
//! the last two fields optional. Target-value files use the same layout
//! with a `value` on every entry. Model files are objects with the point
//! array under `zeros` plus coefficient arrays.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::extremal::{AnalyticModel, ZeroFactor};
use crate::geometry::{Point, PointSet};
use crate::interpolation::TargetValues;
use crate::C64;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Full {
        z: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        multiplicity: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<[f64; 2]>,
    },
}

impl Entry {
    fn z(&self) -> [f64; 2] {
        match self {
            Entry::Pair(z) | Entry::Full { z, .. } => *z,
        }
    }

    fn multiplicity(&self) -> u32 {
        match self {
            Entry::Full { multiplicity: Some(m), .. } => *m,
            _ => 1,
        }
    }

    fn value(&self) -> Option<[f64; 2]> {
        match self {
            Entry::Full { value, .. } => *value,
            Entry::Pair(_) => None,
        }
    }
}

fn finite_pair(xy: [f64; 2], what: &str) -> Result<C64> {
    ensure!(xy[0].is_finite() && xy[1].is_finite(), Error::NonFinite(format!("{what} [{}, {}]", xy[0], xy[1])));
    Ok(C64::new(xy[0], xy[1]))
}

fn entries_to_set(entries: &[Entry]) -> Result<PointSet<f64>> {
    let mut points = Vec::with_capacity(entries.len());
    let mut mult = Vec::with_capacity(entries.len());
    for e in entries {
        points.push(Point::from_complex(finite_pair(e.z(), "point")?)?);
        mult.push(e.multiplicity());
    }
    PointSet::with_multiplicities(points, mult)
}

fn set_to_entries(set: &PointSet<f64>, values: Option<&[C64]>) -> Vec<Entry> {
    set.iter()
        .enumerate()
        .map(|(i, (z, m))| {
            let value = values.map(|v| [v[i].re, v[i].im]);
            if m == 1 && value.is_none() {
                Entry::Pair([z.re, z.im])
            } else {
                Entry::Full { z: [z.re, z.im], multiplicity: (m != 1).then_some(m), value }
            }
        })
        .collect()
}

pub fn parse_point_set(text: &str) -> Result<PointSet<f64>> {
    let entries: Vec<Entry> = serde_json::from_str(text)?;
    entries_to_set(&entries)
}

/// One entry per line.
fn entries_to_json(entries: &[Entry]) -> String {
    if entries.is_empty() {
        return "[]".into();
    }
    let lines: Vec<String> =
        entries.iter().map(|e| format!("  {}", serde_json::to_string(e).expect("serializable"))).collect();
    format!("[\n{}\n]", lines.join(",\n"))
}

pub fn point_set_to_json(set: &PointSet<f64>) -> String {
    entries_to_json(&set_to_entries(set, None))
}

pub fn read_point_set(path: &Path) -> Result<PointSet<f64>> {
    parse_point_set(&fs::read_to_string(path)?)
}

pub fn write_point_set(path: &Path, set: &PointSet<f64>) -> Result<()> {
    write_text(path, &(point_set_to_json(set) + "\n"))
}

/// Point set plus one target value per point.
pub fn parse_targets(text: &str) -> Result<(PointSet<f64>, TargetValues)> {
    let entries: Vec<Entry> = serde_json::from_str(text)?;
    let set = entries_to_set(&entries)?;
    let mut by_point = HashMap::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let v = match e.value() {
            Some(v) => finite_pair(v, "value")?,
            None => return Err(Error::Parse(format!("entry {i} has no value"))),
        };
        let key = e.z().map(f64::to_bits);
        ensure!(by_point.insert(key, v).is_none(), Error::Parse(format!("entry {i} repeats a point")));
    }
    // the set stores its points in canonical order
    let values = set.iter().map(|(z, _)| by_point[&[z.re.to_bits(), z.im.to_bits()]]).collect();
    let targets = TargetValues::new(&set, values)?;
    Ok((set, targets))
}

pub fn targets_to_json(set: &PointSet<f64>, targets: &TargetValues) -> String {
    entries_to_json(&set_to_entries(set, Some(&targets.values)))
}

pub fn read_targets(path: &Path) -> Result<(PointSet<f64>, TargetValues)> {
    parse_targets(&fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    zeros: Vec<Entry>,
    #[serde(default = "default_factor")]
    factor: ZeroFactor,
    #[serde(default = "default_poly")]
    poly: Vec<[f64; 2]>,
    #[serde(default)]
    expcoeffs: Vec<[f64; 2]>,
}

fn default_factor() -> ZeroFactor {
    ZeroFactor::Psi
}

fn default_poly() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}

fn coeffs(xs: &[[f64; 2]]) -> Result<Vec<C64>> {
    xs.iter().map(|&c| finite_pair(c, "coefficient")).collect()
}

pub fn parse_model(text: &str) -> Result<AnalyticModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    AnalyticModel::new(entries_to_set(&file.zeros)?, file.factor, coeffs(&file.poly)?, coeffs(&file.expcoeffs)?)
}

pub fn model_to_json(model: &AnalyticModel) -> String {
    let pairs = |cs: &[C64]| cs.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
    let file = ModelFile {
        zeros: set_to_entries(model.zeros(), None),
        factor: model.factor(),
        poly: pairs(model.poly()),
        expcoeffs: pairs(model.expcoeffs()),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn read_model(path: &Path) -> Result<AnalyticModel> {
    parse_model(&fs::read_to_string(path)?)
}

/// Writes `text`, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Run configuration: a TOML file with one optional table per command.
/// Command-line flags take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub interpolate: InterpolateConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub eta: Option<f64>,
    pub separation: Option<f64>,
    pub rmax: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub p: Option<f64>,
    pub m: Option<i32>,
    pub n_radial: Option<usize>,
    pub depth: Option<usize>,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub amplitude: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolateConfig {
    pub p: Option<f64>,
    pub eta: Option<f64>,
    pub n_radial: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub p: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub rstar: Option<f64>,
    pub center_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub weight_scale: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}
