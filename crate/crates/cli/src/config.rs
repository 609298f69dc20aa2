//! Scenario files: strict JSON with a `version` field.
//!
//! ```json
//! {
//!   "version": 1,
//!   "scenarios": [
//!     { "name": "well-3d", "kind": "virtual_level", "parameters": { ... } }
//!   ]
//! }
//! ```

use std::fmt;
use std::path::Path;

use serde::de::{self, DeserializeSeed, Deserializer, MapAccess, Visitor};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vlab_core::hardy::{AnnulusEnds, Classification};
use vlab_core::spectral::{OuterBoundary, RadialGrid};
use vlab_core::Shape;

use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    GeometryIdentities,
    ConeSeparation,
    ImsVerify,
    FermionHardy,
    VirtualLevel,
    DecayFit,
    EfimovCount,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::GeometryIdentities => "geometry_identities",
            Kind::ConeSeparation => "cone_separation",
            Kind::ImsVerify => "ims_verify",
            Kind::FermionHardy => "fermion_hardy",
            Kind::VirtualLevel => "virtual_level",
            Kind::DecayFit => "decay_fit",
            Kind::EfimovCount => "efimov_count",
        }
    }

    /// Kinds that draw random samples and therefore need a seed.
    pub fn needs_seed(self) -> bool {
        matches!(self, Kind::GeometryIdentities | Kind::ConeSeparation | Kind::ImsVerify)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_dims() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_particles() -> Vec<usize> {
    (2..=6).collect()
}
fn default_draws() -> usize {
    1000
}
fn default_mass_range() -> (f64, f64) {
    (0.1, 10.0)
}
fn default_identity_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryIdentitiesParams {
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_particles")]
    pub particles: Vec<usize>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_mass_range")]
    pub mass_range: (f64, f64),
    #[serde(default = "default_identity_tol")]
    pub tolerance: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn ten_thousand() -> usize {
    10_000
}
fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSeparationParams {
    /// Spatial dimension of each particle.
    pub n: usize,
    pub masses: Vec<f64>,
    #[serde(default = "one")]
    pub kappa1: f64,
    #[serde(default = "half")]
    pub kappa1_prime: f64,
    /// Orders `l` to check; all of `2..=N−1` when absent.
    #[serde(default)]
    pub orders: Option<Vec<usize>>,
    /// Accepted points per partition pair.
    #[serde(default = "ten_thousand")]
    pub samples: usize,
    /// Cap on partition pairs per order, taken in enumeration order.
    #[serde(default)]
    pub max_pairs: Option<usize>,
    /// Accepted shell points per (partition, cluster) lower-bound check; 0 skips the check.
    #[serde(default = "ten_thousand")]
    pub lower_bound_samples: usize,
    /// Clusters `C` tested per partition in the lower-bound check.
    #[serde(default = "two")]
    pub lower_bound_clusters: usize,
    /// Multiply `κ(l)`, `l ≥ 2`, by this factor (negative control).
    #[serde(default)]
    pub kappa_inflation: Option<f64>,
}

fn default_epsilons() -> Vec<f64> {
    vec![0.1, 0.01, 0.001]
}
fn three() -> u32 {
    3
}
fn radial_points() -> usize {
    20_000
}
fn profile_points() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialCutoffParams {
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "three")]
    pub d: u32,
    #[serde(default = "radial_points")]
    pub grid_points: usize,
}

impl Default for RadialCutoffParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            d: 3,
            grid_points: radial_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeCutoffParams {
    pub n: usize,
    pub masses: Vec<f64>,
    /// One-based clusters of `Z`.
    pub partition: Vec<Vec<usize>>,
    pub kappa: f64,
    #[serde(default = "ten_thousand")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffCorruption {
    /// Multiply `b̃` by this factor.
    #[serde(default)]
    pub b_tilde_scale: Option<f64>,
    /// Multiply the cone log window `ln(κ″/κ′)` by this factor.
    #[serde(default)]
    pub log_window_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImsVerifyParams {
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub radial: RadialCutoffParams,
    pub cone: ConeCutoffParams,
    #[serde(default = "profile_points")]
    pub profile_points: usize,
    #[serde(default)]
    pub corrupt: Option<CutoffCorruption>,
}

fn nine() -> f64 {
    9.0
}
fn one_percent() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FermionHardyParams {
    pub rho0: f64,
    pub rho1: f64,
    pub points: usize,
    pub modes: u32,
    #[serde(default)]
    pub ends: AnnulusEnds,
    /// Reference constant the minimum is compared with.
    #[serde(default = "nine")]
    pub target: f64,
    #[serde(default = "one_percent")]
    pub rel_tol: f64,
}

fn matched() -> OuterBoundary {
    OuterBoundary::ZeroEnergyMatched
}
fn subcritical_factor() -> f64 {
    0.99
}
fn half_percent() -> f64 {
    0.005
}
fn ground_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSweep {
    /// Sweep `ε = 1/k` for `k = k_min..=k_max`.
    pub k_min: u32,
    pub k_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualLevelParams {
    pub shape: Shape,
    pub d: u32,
    pub grid: RadialGrid,
    #[serde(default = "matched")]
    pub boundary: OuterBoundary,
    /// Reference critical coupling, compared with relative tolerance `rel_tol`.
    #[serde(default)]
    pub expected_lambda: Option<f64>,
    #[serde(default = "half_percent")]
    pub rel_tol: f64,
    /// Largest `|ground energy|` accepted at `λ*`.
    #[serde(default = "ground_tol")]
    pub ground_tol: f64,
    /// `λ*` is multiplied by this to check the absence of bound states just below it.
    #[serde(default = "subcritical_factor")]
    pub subcritical_factor: f64,
    #[serde(default)]
    pub epsilon_sweep: Option<EpsilonSweep>,
}

fn refine_window() -> f64 {
    0.05
}
fn stability_floor() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayFitParams {
    pub shape: Shape,
    pub d: u32,
    /// Grid for the matrix estimate of `λ*` that seeds the shooting refinement.
    pub grid: RadialGrid,
    #[serde(default = "refine_window")]
    pub refine_window: f64,
    pub r_end: f64,
    pub window: (f64, f64),
    #[serde(default)]
    pub expected_s: Option<f64>,
    #[serde(default = "refine_window")]
    pub s_tol: f64,
    #[serde(default)]
    pub expected_classification: Option<Classification>,
    /// Largest change in `s` accepted when `r_end` doubles, on top of the
    /// reported standard error.
    #[serde(default = "stability_floor")]
    pub stability_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RValues {
    List(Vec<f64>),
    Grid(RGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RGrid {
    pub log10_min: f64,
    pub log10_max: f64,
    pub per_decade: u32,
}

impl RValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            RValues::List(v) => v.clone(),
            RValues::Grid(g) => {
                let steps = ((g.log10_max - g.log10_min) * g.per_decade as f64).round() as i64;
                (0..=steps.max(0))
                    .map(|k| 10f64.powf(g.log10_min + k as f64 / g.per_decade as f64))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EfimovParams {
    /// Counts must stop growing over the upper half of the `ln R` range.
    Saturation { c: f64, r: RValues },
    /// Count-vs-`ln R` slope within `rel_tol` of `expected_slope`.
    Growth {
        c: f64,
        r: RValues,
        expected_slope: f64,
        rel_tol: f64,
    },
    /// Bisect the coupling where saturation stops; the estimate must lie in `bracket`.
    Threshold {
        c_lo: f64,
        c_hi: f64,
        r: RValues,
        bracket: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    GeometryIdentities(GeometryIdentitiesParams),
    ConeSeparation(ConeSeparationParams),
    ImsVerify(ImsVerifyParams),
    FermionHardy(FermionHardyParams),
    VirtualLevel(VirtualLevelParams),
    DecayFit(DecayFitParams),
    EfimovCount(EfimovParams),
}

impl Parameters {
    fn deserialize_as<'de, D: Deserializer<'de>>(kind: Kind, d: D) -> Result<Self, D::Error> {
        Ok(match kind {
            Kind::GeometryIdentities => Parameters::GeometryIdentities(Deserialize::deserialize(d)?),
            Kind::ConeSeparation => Parameters::ConeSeparation(Deserialize::deserialize(d)?),
            Kind::ImsVerify => Parameters::ImsVerify(Deserialize::deserialize(d)?),
            Kind::FermionHardy => Parameters::FermionHardy(Deserialize::deserialize(d)?),
            Kind::VirtualLevel => Parameters::VirtualLevel(Deserialize::deserialize(d)?),
            Kind::DecayFit => Parameters::DecayFit(Deserialize::deserialize(d)?),
            Kind::EfimovCount => Parameters::EfimovCount(Deserialize::deserialize(d)?),
        })
    }

    /// First 12 hex digits of the SHA-256 of the canonical parameter JSON.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("parameters serialize");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

struct ParamsSeed(Kind);

impl<'de> DeserializeSeed<'de> for ParamsSeed {
    type Value = Parameters;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Parameters, D::Error> {
        Parameters::deserialize_as(self.0, d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub seed: Option<u64>,
    pub expect_fail: bool,
    /// Path prefix for this scenario's artifacts, relative to the output
    /// directory; defaults to the name.
    pub output: Option<String>,
    pub parameters: Parameters,
}

impl Scenario {
    pub fn output_prefix(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Deserialize)]
#[serde(field_identifier, rename_all = "snake_case")]
enum Field {
    Name,
    Kind,
    Seed,
    ExpectFail,
    Output,
    Parameters,
}

const FIELDS: &[&str] = &["name", "kind", "seed", "expect_fail", "output", "parameters"];

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_struct("Scenario", FIELDS, ScenarioVisitor)
    }
}

struct ScenarioVisitor;

fn set<T, E: de::Error>(slot: &mut Option<T>, name: &'static str, value: T) -> Result<(), E> {
    if slot.is_some() {
        return Err(E::duplicate_field(name));
    }
    *slot = Some(value);
    Ok(())
}

impl<'de> Visitor<'de> for ScenarioVisitor {
    type Value = Scenario;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a scenario object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Scenario, A::Error> {
        let mut name = None;
        let mut kind: Option<Kind> = None;
        let mut seed = None;
        let mut expect_fail = None;
        let mut output = None;
        let mut parameters = None;
        // parameters seen before the kind are buffered and typed afterwards
        let mut pending: Option<serde_json::Value> = None;
        while let Some(field) = map.next_key::<Field>()? {
            match field {
                Field::Name => set(&mut name, "name", map.next_value::<String>()?)?,
                Field::Kind => set(&mut kind, "kind", map.next_value()?)?,
                Field::Seed => set(&mut seed, "seed", map.next_value::<u64>()?)?,
                Field::ExpectFail => set(&mut expect_fail, "expect_fail", map.next_value::<bool>()?)?,
                Field::Output => set(&mut output, "output", map.next_value::<String>()?)?,
                Field::Parameters => {
                    if parameters.is_some() || pending.is_some() {
                        return Err(de::Error::duplicate_field("parameters"));
                    }
                    match kind {
                        Some(k) => parameters = Some(map.next_value_seed(ParamsSeed(k))?),
                        None => pending = Some(map.next_value()?),
                    }
                }
            }
        }
        let name = name.ok_or_else(|| de::Error::missing_field("name"))?;
        let kind = kind.ok_or_else(|| de::Error::missing_field("kind"))?;
        let parameters = match parameters {
            Some(p) => p,
            None => {
                let value = pending.unwrap_or_else(|| serde_json::Value::Object(Default::default()));
                Parameters::deserialize_as(kind, value)
                    .map_err(|e| de::Error::custom(format!("parameters of scenario `{name}`: {e}")))?
            }
        };
        Ok(Scenario {
            name,
            kind,
            seed,
            expect_fail: expect_fail.unwrap_or(false),
            output,
            parameters,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Offsets of each `"name": <value>` pair whose value is `name`, in file order.
fn name_offsets(text: &str, name: &str) -> Vec<usize> {
    let encoded = serde_json::to_string(name).expect("string serializes");
    text.match_indices("\"name\"")
        .filter_map(|(at, key)| {
            let rest = text[at + key.len()..].trim_start();
            let rest = rest.strip_prefix(':')?.trim_start();
            rest.starts_with(&encoded).then_some(at)
        })
        .collect()
}

impl Config {
    pub fn from_str_at(text: &str, path: &Path) -> Result<Self, CliError> {
        let config: Config = serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate(text, path)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_str_at(&text, path)
    }

    fn validate(&self, text: &str, path: &Path) -> Result<(), CliError> {
        let invalid = |message: String| CliError::Invalid {
            path: path.to_path_buf(),
            message,
        };
        if self.version != CONFIG_VERSION {
            let at = text.find("\"version\"").map(|o| line_col(text, o)).unwrap_or((1, 1));
            return Err(invalid(format!(
                "line {}, column {}: unsupported version {} (expected {CONFIG_VERSION})",
                at.0, at.1, self.version
            )));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.name.trim().is_empty() {
                return Err(invalid(format!("scenarios[{i}]: name must be nonempty")));
            }
            if let Some(j) = self.scenarios[..i].iter().position(|p| p.name == s.name) {
                let offsets = name_offsets(text, &s.name);
                let where_ = |idx: usize, nth: usize| match offsets.get(nth) {
                    Some(&o) => {
                        let (l, c) = line_col(text, o);
                        format!("scenarios[{idx}] (line {l}, column {c})")
                    }
                    None => format!("scenarios[{idx}]"),
                };
                return Err(invalid(format!(
                    "duplicate scenario name `{}`: {} and {}",
                    s.name,
                    where_(j, 0),
                    where_(i, 1)
                )));
            }
            if s.kind.needs_seed() && s.seed.is_none() {
                return Err(invalid(format!(
                    "scenario `{}` ({}) samples randomly and needs a seed",
                    s.name, s.kind
                )));
            }
            let prefix = Path::new(s.output_prefix());
            if prefix.is_absolute()
                || prefix
                    .components()
                    .any(|c| !matches!(c, std::path::Component::Normal(_)))
            {
                return Err(invalid(format!(
                    "scenario `{}`: output prefix `{}` must be a relative path without `..`",
                    s.name,
                    s.output_prefix()
                )));
            }
        }
        Ok(())
    }

    /// Replace every scenario seed, as done for `VLAB_SEED_OVERRIDE`.
    pub fn override_seeds(&mut self, seed: u64) {
        for s in &mut self.scenarios {
            s.seed = Some(seed);
        }
    }
}
