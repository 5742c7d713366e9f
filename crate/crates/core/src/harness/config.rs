//! Experiment configuration: flat `key = value` documents.
//!
//! Angles are given in degrees (or `random`) and stored in radians. Every
//! scenario has its own defaults for the keys it does not set; `seed` is
//! always required.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::classifier::UpdateRule;
use crate::error::{Error, Result};
use crate::optics::BackendKind;
use crate::slm::SlmRule;
use crate::vector::DEFAULT_ALPHA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    PositionLearner,
    IntervalLearner,
    ThreeLevel,
    CircleLearner,
    Classifier,
    Polarizer,
    ThreePolarizers,
    BeamSplitter,
    MachZehnder,
    ChainedMz,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::PositionLearner,
        Scenario::IntervalLearner,
        Scenario::ThreeLevel,
        Scenario::CircleLearner,
        Scenario::Classifier,
        Scenario::Polarizer,
        Scenario::ThreePolarizers,
        Scenario::BeamSplitter,
        Scenario::MachZehnder,
        Scenario::ChainedMz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PositionLearner => "position-learner",
            Scenario::IntervalLearner => "interval-learner",
            Scenario::ThreeLevel => "three-level",
            Scenario::CircleLearner => "circle-learner",
            Scenario::Classifier => "classifier",
            Scenario::Polarizer => "polarizer",
            Scenario::ThreePolarizers => "three-polarizers",
            Scenario::BeamSplitter => "beam-splitter",
            Scenario::MachZehnder => "mach-zehnder",
            Scenario::ChainedMz => "chained-mz",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::PositionLearner => "moving-average machine tracking a scalar input",
            Scenario::IntervalLearner => "interval machine; fraction of upward steps vs (1+y)/2",
            Scenario::ThreeLevel => "seven-machine tree adaptively splitting a scalar stream",
            Scenario::CircleLearner => "circle machine at a fixed input angle; frequency vs cos²",
            Scenario::Classifier => {
                "separatrix learner on two rotating Gaussian clouds vs windowed PCA"
            }
            Scenario::Polarizer => "polarizer at random orientations; Malus law",
            Scenario::ThreePolarizers => "polarizer cascade fed with random polarization",
            Scenario::BeamSplitter => "two-input beam splitter vs the amplitude prediction",
            Scenario::MachZehnder => "Mach-Zehnder interferometer with an arm-phase sweep",
            Scenario::ChainedMz => {
                "two chained interferometers with seven random parameters per block"
            }
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| Error::UnknownScenario(s.trim().to_string()))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An angle setting: fixed (radians) or drawn uniformly from `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Random,
}

impl Angle {
    fn parse(key: &str, v: &str) -> Result<Self> {
        if v.eq_ignore_ascii_case("random") {
            Ok(Angle::Random)
        } else {
            Ok(Angle::Fixed(parse_f64(key, v)?.to_radians()))
        }
    }
}

/// Scalar inputs: `random`, or phases separated by `;` each holding a
/// comma-separated set of values.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Random,
    Phases(Vec<Vec<f64>>),
}

impl InputSpec {
    fn parse(v: &str) -> Result<Self> {
        if v.eq_ignore_ascii_case("random") {
            return Ok(InputSpec::Random);
        }
        let phases = v
            .split(';')
            .map(|phase| {
                phase
                    .split(',')
                    .map(|x| parse_f64("input", x))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if phases.iter().any(|p| p.is_empty()) {
            return Err(Error::Config("empty input phase".into()));
        }
        Ok(InputSpec::Phases(phases))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{}` as a number", v.trim())))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("`{key}` must be finite")));
    }
    Ok(x)
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{}` as a count", v.trim())))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!(
            "`{key}`: expected a boolean, got `{other}`"
        ))),
    }
}

/// Splits a document into ordered key/value pairs. Blank lines and lines
/// starting with `#` are skipped; later keys override earlier ones.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub alpha: f64,
    pub events: u64,
    pub blocks: u64,
    pub seed: u64,
    pub warmup: u64,
    pub backend: BackendKind,
    pub p0: f64,
    pub psi: Angle,
    pub psi0: Angle,
    pub psi1: Angle,
    pub phi: Angle,
    pub phi0: Angle,
    /// Arm phase(s) of the second arm; several values give one sweep each.
    pub phi1: Vec<Angle>,
    pub phi2: Angle,
    pub phi3: Angle,
    /// Per-block increment of `phi0` in a Mach-Zehnder sweep (radians).
    pub phi_step: f64,
    pub gamma: f64,
    pub window: u64,
    pub input: InputSpec,
    pub update: UpdateRule,
    /// Emit one row per event instead of per block, where supported.
    pub trace: bool,
    /// Run per-event self checks on every vector machine.
    pub audit: bool,
}

const KEYS: &[&str] = &[
    "scenario", "alpha", "events", "blocks", "seed", "warmup", "backend", "slm_rule", "p0", "psi",
    "psi0", "psi1", "phi", "phi0", "phi1", "phi2", "phi3", "phi_step", "gamma", "window", "input",
    "update", "trace", "audit",
];

impl ExperimentConfig {
    /// Defaults of `scenario`, following the protocol of the matching figure.
    pub fn defaults(scenario: Scenario, seed: u64) -> Self {
        let mut c = ExperimentConfig {
            scenario,
            alpha: DEFAULT_ALPHA,
            events: 1000,
            blocks: 100,
            seed,
            warmup: 0,
            backend: BackendKind::Dlm,
            p0: 1.0,
            psi: Angle::Random,
            psi0: Angle::Random,
            psi1: Angle::Random,
            phi: Angle::Random,
            phi0: Angle::Random,
            phi1: vec![Angle::Random],
            phi2: Angle::Random,
            phi3: Angle::Random,
            phi_step: 10f64.to_radians(),
            gamma: 1.0 / 5000.0,
            window: 100,
            input: InputSpec::Random,
            update: UpdateRule::DistanceWeighted,
            trace: false,
            audit: false,
        };
        match scenario {
            Scenario::PositionLearner => {
                c.blocks = 2;
                c.input = InputSpec::Phases(vec![vec![-0.5], vec![0.5]]);
            }
            Scenario::IntervalLearner | Scenario::CircleLearner => c.warmup = 500,
            Scenario::ThreeLevel => {
                c.events = 5000;
                c.blocks = 3;
                c.input = InputSpec::Phases(vec![
                    vec![-0.75, -0.25, 0.25, 0.75],
                    vec![-0.75, -0.25, 0.25, 0.50],
                    vec![-0.60, -0.75, -0.25, 0.25, 0.50],
                ]);
            }
            Scenario::Classifier => {
                c.events = 22_000;
                c.blocks = 1;
                c.warmup = 2000;
            }
            Scenario::Polarizer => c.psi = Angle::Fixed(25f64.to_radians()),
            Scenario::ThreePolarizers => {}
            Scenario::BeamSplitter => {
                c.events = 10_000;
                c.p0 = 0.5;
            }
            Scenario::MachZehnder => {
                c.events = 10_000;
                c.blocks = 37;
                c.phi0 = Angle::Fixed(0.0);
                c.phi1 = vec![Angle::Fixed(0.0)];
            }
            Scenario::ChainedMz => {
                c.events = 10_000;
                c.p0 = f64::NAN; // drawn per block unless set
            }
        }
        c
    }

    /// Parses a configuration document.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&parse_kv(text)?)
    }

    /// Builds a configuration from already split key/value pairs.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
        }
        let scenario: Scenario = map
            .get("scenario")
            .ok_or_else(|| Error::Config("missing `scenario`".into()))?
            .parse()?;
        let seed = parse_u64(
            "seed",
            map.get("seed")
                .ok_or_else(|| Error::Config("missing `seed`".into()))?,
        )?;
        let mut c = Self::defaults(scenario, seed);
        let mut slm_rule = SlmRule::Corrected;
        let mut slm = false;
        for (k, v) in map {
            match k.as_str() {
                "alpha" => c.alpha = parse_f64(k, v)?,
                "events" => c.events = parse_u64(k, v)?,
                "blocks" => c.blocks = parse_u64(k, v)?,
                "warmup" => c.warmup = parse_u64(k, v)?,
                "backend" => {
                    slm = match v.as_str() {
                        "dlm" => false,
                        "slm" => true,
                        other => return Err(Error::Config(format!("unknown backend `{other}`"))),
                    }
                }
                "slm_rule" => {
                    slm_rule = match v.as_str() {
                        "corrected" => SlmRule::Corrected,
                        "literal" => SlmRule::Literal,
                        other => return Err(Error::Config(format!("unknown slm_rule `{other}`"))),
                    }
                }
                "p0" => c.p0 = parse_f64(k, v)?,
                "psi" => c.psi = Angle::parse(k, v)?,
                "psi0" => c.psi0 = Angle::parse(k, v)?,
                "psi1" => c.psi1 = Angle::parse(k, v)?,
                "phi" => c.phi = Angle::parse(k, v)?,
                "phi0" => c.phi0 = Angle::parse(k, v)?,
                "phi1" => {
                    c.phi1 = v
                        .split(',')
                        .map(|x| Angle::parse(k, x.trim()))
                        .collect::<Result<_>>()?
                }
                "phi2" => c.phi2 = Angle::parse(k, v)?,
                "phi3" => c.phi3 = Angle::parse(k, v)?,
                "phi_step" => c.phi_step = parse_f64(k, v)?.to_radians(),
                "gamma" => c.gamma = parse_f64(k, v)?,
                "window" => c.window = parse_u64(k, v)?,
                "input" => c.input = InputSpec::parse(v)?,
                "update" => {
                    c.update = match v.as_str() {
                        "nonlinear" => UpdateRule::DistanceWeighted,
                        "linear" => UpdateRule::Linear,
                        other => return Err(Error::Config(format!("unknown update `{other}`"))),
                    }
                }
                "trace" => c.trace = parse_bool(k, v)?,
                "audit" => c.audit = parse_bool(k, v)?,
                _ => {}
            }
        }
        if slm {
            c.backend = BackendKind::Slm(slm_rule);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha = {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.events == 0 || self.blocks == 0 {
            return Err(Error::Config("events and blocks must be at least 1".into()));
        }
        if self.warmup >= self.events {
            return Err(Error::Config(format!(
                "warmup ({}) must be smaller than events ({})",
                self.warmup, self.events
            )));
        }
        if !self.p0.is_nan() && !(0.0..=1.0).contains(&self.p0) {
            return Err(Error::Config(format!("p0 = {} outside [0, 1]", self.p0)));
        }
        if self.phi1.is_empty() {
            return Err(Error::Config("phi1 needs at least one value".into()));
        }
        if self.scenario == Scenario::Classifier && self.window < 2 {
            return Err(Error::Config("window must be at least 2".into()));
        }
        if let InputSpec::Phases(p) = &self.input {
            let limit_ok = |y: &f64| match self.scenario {
                Scenario::IntervalLearner => y.abs() < 1.0,
                _ => y.abs() <= 1.0,
            };
            if !p.iter().flatten().all(limit_ok) {
                return Err(Error::Config(
                    "input values outside the admissible range".into(),
                ));
            }
        }
        Ok(())
    }
}
