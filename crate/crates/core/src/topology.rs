//! Text descriptors for networks.
//!
//! A descriptor is either a named device with optional arguments, such as
//! `polarizer(phi=30)` or `mach-zehnder(phi0=0, phi1=90, alpha=0.99)`, or an
//! explicit wiring list, one statement per line:
//!
//! ```text
//! alpha = 0.99
//! seed = 7
//! node r rotator phi=30
//! node p circle phi=30
//! sink out0
//! sink out1
//! tap arm
//! source -> r
//! edge r:0 -> arm
//! edge arm -> p
//! edge p:0 -> out0
//! edge p:1 -> out1
//! ```
//!
//! Angles are in degrees. Node kinds are `identity`, `rotator`, `circle`,
//! `position` and `beam-splitter`; a destination may carry an input port
//! (`bs:1`), defaulting to 0. Lines starting with `#` are ignored.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{Endpoint, Identity, Network, NetworkBuilder};
use crate::optics::{
    build_beam_splitter, build_chained_mz, build_mach_zehnder, build_polarizer,
    build_three_polarizers, random_beam_splitter, DeviceConfig, PolarizerDlm, Rotator,
};
use crate::scalar::{build_three_level_classifier, PositionNode};
use crate::vector::{UnitVectorState, DEFAULT_ALPHA};

/// Named devices understood by [`NetworkSpec::parse`].
pub const DEVICES: &[&str] = &[
    "polarizer",
    "three-polarizers",
    "beam-splitter",
    "mach-zehnder",
    "chained-mz",
    "three-level",
];

/// A parsed descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Device {
        name: String,
        args: HashMap<String, f64>,
    },
    Explicit(Vec<Statement>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Setting(String, f64),
    Node {
        name: String,
        kind: String,
        args: HashMap<String, f64>,
    },
    Sink(String),
    Tap(String),
    Source(String, usize),
    Edge {
        from: String,
        port: Option<usize>,
        to: String,
        to_port: usize,
    },
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_number(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| config_err(format!("`{key}` expects a number, got `{}`", v.trim())))
}

fn parse_args<'a>(items: impl Iterator<Item = &'a str>) -> Result<HashMap<String, f64>> {
    let mut args = HashMap::new();
    for item in items.map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("expected key=value, got `{item}`")))?;
        let k = k.trim().to_string();
        let v = parse_number(&k, v)?;
        args.insert(k, v);
    }
    Ok(args)
}

fn split_port(s: &str) -> Result<(String, Option<usize>)> {
    match s.split_once(':') {
        Some((n, p)) => {
            let port = p
                .trim()
                .parse()
                .map_err(|_| config_err(format!("bad port in `{s}`")))?;
            Ok((n.trim().to_string(), Some(port)))
        }
        None => Ok((s.trim().to_string(), None)),
    }
}

impl NetworkSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if let Some(open) = trimmed.find('(') {
            if !trimmed.contains('\n') {
                let name = trimmed[..open].trim().to_string();
                let inner = trimmed[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| config_err("missing `)`"))?;
                if !DEVICES.contains(&name.as_str()) {
                    return Err(Error::UnknownScenario(name));
                }
                let args = parse_args(inner.split(','))?;
                return Ok(NetworkSpec::Device { name, args });
            }
        }
        if DEVICES.contains(&trimmed) {
            return Ok(NetworkSpec::Device {
                name: trimmed.to_string(),
                args: HashMap::new(),
            });
        }
        let mut stmts = Vec::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let stmt = match words[0] {
                "node" if words.len() >= 3 => Statement::Node {
                    name: words[1].to_string(),
                    kind: words[2].to_string(),
                    args: parse_args(words[3..].iter().copied())?,
                },
                "sink" if words.len() == 2 => Statement::Sink(words[1].to_string()),
                "tap" if words.len() == 2 => Statement::Tap(words[1].to_string()),
                "source" if words.len() == 3 && words[1] == "->" => {
                    let (to, port) = split_port(words[2])?;
                    Statement::Source(to, port.unwrap_or(0))
                }
                "edge" if words.len() == 4 && words[2] == "->" => {
                    let (from, port) = split_port(words[1])?;
                    let (to, to_port) = split_port(words[3])?;
                    Statement::Edge {
                        from,
                        port,
                        to,
                        to_port: to_port.unwrap_or(0),
                    }
                }
                _ => match line.split_once('=') {
                    Some((k, v)) if !k.trim().contains(' ') => {
                        Statement::Setting(k.trim().to_string(), parse_number(k.trim(), v)?)
                    }
                    _ if stmts.is_empty() && words.len() == 1 => {
                        return Err(Error::UnknownScenario(line.to_string()))
                    }
                    _ => return Err(config_err(format!("cannot parse `{line}`"))),
                },
            };
            stmts.push(stmt);
        }
        if stmts.is_empty() {
            return Err(config_err("empty network descriptor"));
        }
        Ok(NetworkSpec::Explicit(stmts))
    }
}

/// Parses a descriptor and builds the network it describes. Internal states
/// are drawn from a generator seeded with `seed` (default 0).
pub fn build_network(text: &str) -> Result<Network> {
    match NetworkSpec::parse(text)? {
        NetworkSpec::Device { name, args } => build_device(&name, &args),
        NetworkSpec::Explicit(stmts) => build_explicit(&stmts),
    }
}

fn build_device(name: &str, args: &HashMap<String, f64>) -> Result<Network> {
    let deg = |k: &str| args.get(k).copied().unwrap_or(0.0).to_radians();
    let alpha = args.get("alpha").copied().unwrap_or(DEFAULT_ALPHA);
    let mut rng = ChaCha8Rng::seed_from_u64(args.get("seed").copied().unwrap_or(0.0) as u64);
    let cfg = DeviceConfig::new(alpha);
    Ok(match name {
        "polarizer" => build_polarizer(deg("phi"), alpha, &mut rng)?.0,
        "three-polarizers" => build_three_polarizers(deg("phi2"), deg("phi3"), alpha, &mut rng)?.0,
        "beam-splitter" => build_beam_splitter(&cfg, &mut rng)?.0,
        "mach-zehnder" => build_mach_zehnder(deg("phi0"), deg("phi1"), &cfg, &mut rng)?.0,
        "chained-mz" => {
            build_chained_mz(
                [deg("phi0"), deg("phi1"), deg("phi2"), deg("phi3")],
                &cfg,
                &mut rng,
            )?
            .0
        }
        "three-level" => build_three_level_classifier(alpha)?.0,
        other => return Err(Error::UnknownScenario(other.to_string())),
    })
}

fn build_explicit(stmts: &[Statement]) -> Result<Network> {
    let mut alpha = DEFAULT_ALPHA;
    let mut seed = 0u64;
    for s in stmts {
        if let Statement::Setting(k, v) = s {
            match k.as_str() {
                "alpha" => alpha = *v,
                "seed" => seed = *v as u64,
                other => return Err(config_err(format!("unknown setting `{other}`"))),
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = DeviceConfig::new(alpha);
    let mut b = NetworkBuilder::new();
    let mut names: HashMap<String, Endpoint> = HashMap::new();
    let mut bs_count = 0;
    let declare = |names: &mut HashMap<String, Endpoint>, n: &str, e: Endpoint| {
        if names.insert(n.to_string(), e).is_some() {
            Err(config_err(format!("`{n}` declared twice")))
        } else {
            Ok(())
        }
    };
    for s in stmts {
        match s {
            Statement::Node { name, kind, args } => {
                let phi = args.get("phi").copied().unwrap_or(0.0).to_radians();
                let node: Box<dyn crate::network::Node> = match kind.as_str() {
                    "identity" => Box::new(Identity),
                    "rotator" => Box::new(Rotator::new(phi)),
                    "circle" => Box::new(PolarizerDlm::new(
                        UnitVectorState::random(2, alpha, &mut rng)?,
                        phi,
                    )),
                    "position" => Box::new(PositionNode::new(
                        args.get("x0").copied().unwrap_or(0.0),
                        alpha,
                    )?),
                    "beam-splitter" => {
                        bs_count += 1;
                        Box::new(random_beam_splitter(&cfg, bs_count - 1, &mut rng)?)
                    }
                    other => return Err(config_err(format!("unknown node kind `{other}`"))),
                };
                let id = b.add_node(name.clone(), node);
                declare(&mut names, name, Endpoint::Node(id, 0))?;
            }
            Statement::Sink(n) => {
                let id = b.add_sink(n.clone());
                declare(&mut names, n, Endpoint::Sink(id))?;
            }
            Statement::Tap(n) => {
                let id = b.add_tap(n.clone());
                declare(&mut names, n, Endpoint::Tap(id))?;
            }
            _ => {}
        }
    }
    let resolve = |n: &str, port: usize| -> Result<Endpoint> {
        match names.get(n) {
            Some(Endpoint::Node(id, _)) => Ok(Endpoint::Node(*id, port)),
            Some(e) => Ok(*e),
            None => Err(Error::DanglingEdge(format!("unknown endpoint `{n}`"))),
        }
    };
    for s in stmts {
        match s {
            Statement::Source(to, port) => {
                b.add_source(resolve(to, *port)?);
            }
            Statement::Edge {
                from,
                port,
                to,
                to_port,
            } => {
                let target = resolve(to, *to_port)?;
                match (names.get(from.as_str()), port) {
                    (Some(Endpoint::Node(id, _)), Some(p)) => {
                        b.connect(*id, *p, target);
                    }
                    (Some(Endpoint::Node(id, _)), None) => {
                        b.connect(*id, 0, target);
                    }
                    (Some(Endpoint::Tap(t)), None) => {
                        b.connect_tap(*t, target)?;
                    }
                    (Some(_), _) => {
                        return Err(config_err(format!(
                            "`{from}` cannot be an edge origin here"
                        )))
                    }
                    (None, _) => {
                        return Err(Error::DanglingEdge(format!("unknown endpoint `{from}`")))
                    }
                }
            }
            _ => {}
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::Message;

    #[test]
    fn named_polarizer() {
        let net = build_network("polarizer(phi=0)").unwrap();
        assert_eq!(net.kinds(), vec!["rotator", "circle-dlm"]);
        assert_eq!(net.sink_names().len(), 2);
    }

    #[test]
    fn named_mach_zehnder() {
        let net = build_network("mach-zehnder(phi0=0, phi1=30)").unwrap();
        let kinds = net.kinds();
        assert_eq!(kinds.iter().filter(|k| **k == "beam-splitter").count(), 2);
        assert_eq!(kinds.iter().filter(|k| **k == "rotator").count(), 2);
        assert_eq!(net.tap_names().len() + net.sink_names().len(), 4);
    }

    #[test]
    fn bare_device_name() {
        assert_eq!(build_network("three-level").unwrap().node_count(), 7);
    }

    #[test]
    fn unknown_device() {
        assert!(matches!(
            build_network("laser(phi=0)"),
            Err(Error::UnknownScenario(_))
        ));
        assert!(matches!(
            build_network("laser"),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn explicit_wiring() {
        let text = "seed = 3\nnode r rotator phi=90\ntap t\nsink s\nsource -> r\nedge r:0 -> t\nedge t -> s\n";
        let mut net = build_network(text).unwrap();
        let (sink, m) = net.process_event(0, Message::from_angle(0.0)).unwrap();
        assert_eq!(net.sink_names()[sink.0], "s");
        assert!((m.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(net.tally().taps, vec![1]);
    }

    #[test]
    fn explicit_errors() {
        let missing = "node a identity\nsource -> a\nedge a:0 -> ghost\n";
        assert!(matches!(
            build_network(missing),
            Err(Error::DanglingEdge(_))
        ));
        let cycle = "node a identity\nnode b identity\nsource -> a\nedge a:0 -> b\nedge b:0 -> a\n";
        assert!(matches!(build_network(cycle), Err(Error::Cycle(_))));
        assert!(build_network("node a warp\n").is_err());
        assert!(build_network("node a identity\nnode a identity\n").is_err());
    }
}
