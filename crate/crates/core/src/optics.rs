//! Optical devices assembled from vector machines.
//!
//! A message's unit 2-vector `(cos ψ, sin ψ)` plays the role of a photon's
//! polarization or phase `e^{iψ}`. Passive rotators shift that angle. A
//! polarizer is a rotator followed by a circle machine. A beam splitter is a
//! two-input front-end machine whose internal vector, rotated by 45° in two
//! planes, drives a four-dimensional back-end machine that picks the output.

use std::any::Any;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::message::Message;
use crate::network::{Endpoint, Network, NetworkBuilder, Node, NodeId, SinkId, TapId};
use crate::slm::{Backend, SlmRule};
use crate::vector::{AuditStats, UnitVectorState};

/// Rotates `v` counter-clockwise by `phi`.
pub fn rotate2(v: [f64; 2], phi: f64) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    [v[0] * c - v[1] * s, v[0] * s + v[1] * c]
}

/// Passive device that rotates every message by a fixed angle.
#[derive(Debug, Clone)]
pub struct Rotator {
    phi: f64,
    cos: f64,
    sin: f64,
}

impl Rotator {
    pub fn new(phi: f64) -> Self {
        let (sin, cos) = phi.sin_cos();
        Rotator { phi, cos, sin }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn set_phi(&mut self, phi: f64) {
        *self = Rotator::new(phi);
    }
}

impl Node for Rotator {
    fn kind(&self) -> &'static str {
        "rotator"
    }
    fn inputs(&self) -> usize {
        1
    }
    fn outputs(&self) -> usize {
        1
    }
    fn process(&mut self, _port: usize, msg: Message) -> Result<(usize, Message)> {
        let [a, b] = msg.payload();
        Ok((
            0,
            Message::from_unit([a * self.cos - b * self.sin, a * self.sin + b * self.cos]),
        ))
    }
    fn state(&self) -> Vec<f64> {
        vec![self.phi]
    }
    fn clone_box(&self) -> Box<dyn Node> {
        Box::new(self.clone())
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
    fn as_any_mut(&mut self) -> &mut dyn Any {
        self
    }
}

/// The learning half of a polarizer: a circle machine that sees the input
/// already expressed relative to the polarizer axis `phi`.
///
/// When the machine resets its first component (`Θ = 1`, the component
/// aligned with the axis) the event leaves on channel 0 as `(cos φ, sin φ)`;
/// otherwise it leaves on channel 1 as `(cos(φ + π/2), sin(φ + π/2))`.
#[derive(Debug, Clone)]
pub struct PolarizerDlm {
    pub state: UnitVectorState,
    phi: f64,
    out: [Message; 2],
}

impl PolarizerDlm {
    pub fn new(state: UnitVectorState, phi: f64) -> Self {
        PolarizerDlm {
            state,
            phi,
            out: [
                Message::from_angle(phi),
                Message::from_angle(phi + FRAC_PI_2),
            ],
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn set_phi(&mut self, phi: f64) {
        self.phi = phi;
        self.out = [
            Message::from_angle(phi),
            Message::from_angle(phi + FRAC_PI_2),
        ];
    }
}

impl Node for PolarizerDlm {
    fn kind(&self) -> &'static str {
        "circle-dlm"
    }
    fn inputs(&self) -> usize {
        1
    }
    fn outputs(&self) -> usize {
        2
    }
    fn process(&mut self, _port: usize, msg: Message) -> Result<(usize, Message)> {
        let (theta, _) = self.state.step_circle(msg.payload())?;
        let ch = usize::from(theta == 0);
        Ok((ch, self.out[ch]))
    }
    fn state(&self) -> Vec<f64> {
        self.state.x().to_vec()
    }
    fn set_audit(&mut self, on: bool) {
        self.state.set_audit(on);
    }
    fn audit(&self) -> Option<AuditStats> {
        self.state.audit()
    }
    fn clone_box(&self) -> Box<dyn Node> {
        Box::new(self.clone())
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
    fn as_any_mut(&mut self) -> &mut dyn Any {
        self
    }
}

/// The 45° rotations in the (1,4) and (3,2) planes applied between the
/// front-end and the back-end of a beam splitter.
pub fn bs_mix(w: &[f64]) -> [f64; 4] {
    [
        (w[0] - w[3]) * FRAC_1_SQRT_2,
        (w[2] + w[1]) * FRAC_1_SQRT_2,
        (w[2] - w[1]) * FRAC_1_SQRT_2,
        (w[0] + w[3]) * FRAC_1_SQRT_2,
    ]
}

/// Two-input, two-output beam splitter built from two four-dimensional machines.
#[derive(Debug, Clone)]
pub struct BeamSplitterNode {
    front: UnitVectorState,
    back: UnitVectorState,
    backend: Backend,
    last: [Option<Message>; 2],
    fallbacks: u64,
}

impl BeamSplitterNode {
    pub fn new(front: UnitVectorState, back: UnitVectorState, backend: Backend) -> Self {
        BeamSplitterNode {
            front,
            back,
            backend,
            last: [None; 2],
            fallbacks: 0,
        }
    }

    pub fn front(&self) -> &UnitVectorState {
        &self.front
    }

    pub fn back(&self) -> &UnitVectorState {
        &self.back
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Number of events whose output pair had zero length and was replaced.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks
    }
}

impl Node for BeamSplitterNode {
    fn kind(&self) -> &'static str {
        "beam-splitter"
    }
    fn inputs(&self) -> usize {
        2
    }
    fn outputs(&self) -> usize {
        2
    }
    fn process(&mut self, port: usize, msg: Message) -> Result<(usize, Message)> {
        self.front.step_frontend(port, msg.payload())?;
        let mixed = bs_mix(self.front.x());
        let choice = self.back.step(&mixed)?;
        let x = self.back.x();
        let ch = self.backend.select(choice.component, x);
        let pair = [x[2 * ch], x[2 * ch + 1]];
        let out = match Message::new(pair) {
            Ok(m) => m,
            Err(_) => {
                self.fallbacks += 1;
                self.last[ch].unwrap_or(Message::from_unit([1.0, 0.0]))
            }
        };
        self.last[ch] = Some(out);
        Ok((ch, out))
    }
    fn state(&self) -> Vec<f64> {
        let mut s = self.front.x().to_vec();
        s.extend_from_slice(self.back.x());
        s
    }
    fn set_audit(&mut self, on: bool) {
        self.front.set_audit(on);
        self.back.set_audit(on);
    }
    fn audit(&self) -> Option<AuditStats> {
        let mut a = self.front.audit()?;
        a.merge(&self.back.audit()?);
        Some(a)
    }
    fn clone_box(&self) -> Box<dyn Node> {
        Box::new(self.clone())
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
    fn as_any_mut(&mut self) -> &mut dyn Any {
        self
    }
}

/// Output selection for every beam splitter in a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendKind {
    #[default]
    Dlm,
    Slm(SlmRule),
}

/// Settings shared by every machine in a device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceConfig {
    pub alpha: f64,
    pub backend: BackendKind,
    /// Seed of the stochastic back-ends; beam splitter `k` uses stream `k`.
    pub slm_seed: u64,
}

impl DeviceConfig {
    pub fn new(alpha: f64) -> Self {
        DeviceConfig {
            alpha,
            backend: BackendKind::Dlm,
            slm_seed: 0,
        }
    }

    pub fn with_backend(mut self, backend: BackendKind, slm_seed: u64) -> Self {
        self.backend = backend;
        self.slm_seed = slm_seed;
        self
    }

    fn backend_for(&self, index: u64) -> Backend {
        match self.backend {
            BackendKind::Dlm => Backend::Dlm,
            BackendKind::Slm(rule) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.slm_seed);
                rng.set_stream(index);
                Backend::Slm { rng, rule }
            }
        }
    }
}

/// A beam splitter with randomly oriented initial internal vectors.
///
/// Both states are drawn from `rng` regardless of the back-end kind, so
/// switching to stochastic output leaves the initial states unchanged.
pub fn random_beam_splitter<R: Rng + ?Sized>(
    cfg: &DeviceConfig,
    index: u64,
    rng: &mut R,
) -> Result<BeamSplitterNode> {
    let front = UnitVectorState::random(4, cfg.alpha, rng)?;
    let back = UnitVectorState::random(4, cfg.alpha, rng)?;
    Ok(BeamSplitterNode::new(front, back, cfg.backend_for(index)))
}

/// Node handles of a polarizer inside a larger network.
#[derive(Debug, Clone, Copy)]
pub struct PolarizerIds {
    pub rotator: NodeId,
    pub dlm: NodeId,
}

impl PolarizerIds {
    /// Turns the polarizer axis to `phi`.
    pub fn set_phi(&self, net: &mut Network, phi: f64) {
        if let Some(r) = net.node_as_mut::<Rotator>(self.rotator) {
            r.set_phi(-phi);
        }
        if let Some(p) = net.node_as_mut::<PolarizerDlm>(self.dlm) {
            p.set_phi(phi);
        }
    }
}

/// Adds a polarizer at axis `phi`: a rotator by `-φ` feeding a circle machine.
/// The caller wires the machine's two outputs.
pub fn add_polarizer<R: Rng + ?Sized>(
    b: &mut NetworkBuilder,
    name: &str,
    phi: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<PolarizerIds> {
    let state = UnitVectorState::random(2, alpha, rng)?;
    let rotator = b.add_node(format!("{name}.rotator"), Box::new(Rotator::new(-phi)));
    let dlm = b.add_node(
        format!("{name}.dlm"),
        Box::new(PolarizerDlm::new(state, phi)),
    );
    b.connect(rotator, 0, Endpoint::Node(dlm, 0));
    Ok(PolarizerIds { rotator, dlm })
}

#[derive(Debug, Clone, Copy)]
pub struct PolarizerHandles {
    pub polarizer: PolarizerIds,
    pub sinks: [SinkId; 2],
}

/// A single polarizer with sinks on both output channels.
pub fn build_polarizer<R: Rng + ?Sized>(
    phi: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<(Network, PolarizerHandles)> {
    let mut b = NetworkBuilder::new();
    let p = add_polarizer(&mut b, "polarizer", phi, alpha, rng)?;
    let sinks = [b.add_sink("out0"), b.add_sink("out1")];
    b.connect(p.dlm, 0, Endpoint::Sink(sinks[0]));
    b.connect(p.dlm, 1, Endpoint::Sink(sinks[1]));
    b.add_source(Endpoint::Node(p.rotator, 0));
    Ok((
        b.build()?,
        PolarizerHandles {
            polarizer: p,
            sinks,
        },
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct ThreePolarizerHandles {
    pub first: PolarizerIds,
    pub second: PolarizerIds,
    pub third: PolarizerIds,
    /// Channel 0 and 1 of the second polarizer, then channel 0 and 1 of the third.
    pub sinks: [SinkId; 4],
}

/// First polarizer at axis 0; its channel 0 feeds a polarizer at `phi2`, its
/// channel 1 a polarizer at `phi3`.
pub fn build_three_polarizers<R: Rng + ?Sized>(
    phi2: f64,
    phi3: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<(Network, ThreePolarizerHandles)> {
    let mut b = NetworkBuilder::new();
    let first = add_polarizer(&mut b, "polarizer1", 0.0, alpha, rng)?;
    let second = add_polarizer(&mut b, "polarizer2", phi2, alpha, rng)?;
    let third = add_polarizer(&mut b, "polarizer3", phi3, alpha, rng)?;
    b.connect(first.dlm, 0, Endpoint::Node(second.rotator, 0));
    b.connect(first.dlm, 1, Endpoint::Node(third.rotator, 0));
    let sinks = [
        b.add_sink("out0"),
        b.add_sink("out1"),
        b.add_sink("out2"),
        b.add_sink("out3"),
    ];
    b.connect(second.dlm, 0, Endpoint::Sink(sinks[0]));
    b.connect(second.dlm, 1, Endpoint::Sink(sinks[1]));
    b.connect(third.dlm, 0, Endpoint::Sink(sinks[2]));
    b.connect(third.dlm, 1, Endpoint::Sink(sinks[3]));
    b.add_source(Endpoint::Node(first.rotator, 0));
    Ok((
        b.build()?,
        ThreePolarizerHandles {
            first,
            second,
            third,
            sinks,
        },
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct BeamSplitterHandles {
    pub bs: NodeId,
    pub sinks: [SinkId; 2],
}

/// A single beam splitter; source port `k` feeds input channel `k`.
pub fn build_beam_splitter<R: Rng + ?Sized>(
    cfg: &DeviceConfig,
    rng: &mut R,
) -> Result<(Network, BeamSplitterHandles)> {
    let mut b = NetworkBuilder::new();
    let bs = b.add_node("bs", Box::new(random_beam_splitter(cfg, 0, rng)?));
    let sinks = [b.add_sink("out0"), b.add_sink("out1")];
    b.connect(bs, 0, Endpoint::Sink(sinks[0]));
    b.connect(bs, 1, Endpoint::Sink(sinks[1]));
    b.add_source(Endpoint::Node(bs, 0));
    b.add_source(Endpoint::Node(bs, 1));
    Ok((b.build()?, BeamSplitterHandles { bs, sinks }))
}

/// Handles of a (possibly chained) Mach-Zehnder interferometer.
///
/// With `m` stages there are `m + 1` beam splitters and `2m` rotators.
/// Rotator pair `k` sits on the arms between splitter `k` and `k + 1`; the
/// arm tallies `N₀, N₁, …` are taps in front of the rotators and the last
/// splitter feeds the two sinks.
#[derive(Debug, Clone)]
pub struct InterferometerHandles {
    pub splitters: Vec<NodeId>,
    pub rotators: Vec<NodeId>,
    pub taps: Vec<TapId>,
    pub sinks: [SinkId; 2],
}

impl InterferometerHandles {
    /// Sets arm phases in order `φ₀, φ₁, …`.
    pub fn set_phases(&self, net: &mut Network, phases: &[f64]) {
        for (&id, &phi) in self.rotators.iter().zip(phases) {
            if let Some(r) = net.node_as_mut::<Rotator>(id) {
                r.set_phi(phi);
            }
        }
    }
}

fn build_interferometer<R: Rng + ?Sized>(
    phases: &[f64],
    cfg: &DeviceConfig,
    rng: &mut R,
) -> Result<(Network, InterferometerHandles)> {
    let stages = phases.len() / 2;
    let mut b = NetworkBuilder::new();
    let mut splitters = Vec::with_capacity(stages + 1);
    for k in 0..=stages {
        let node = random_beam_splitter(cfg, k as u64, rng)?;
        splitters.push(b.add_node(format!("bs{}", k + 1), Box::new(node)));
    }
    let mut rotators = Vec::with_capacity(2 * stages);
    let mut taps = Vec::with_capacity(2 * stages);
    for k in 0..stages {
        for arm in 0..2 {
            let i = 2 * k + arm;
            let tap = b.add_tap(format!("N{i}"));
            let rot = b.add_node(format!("phase{i}"), Box::new(Rotator::new(phases[i])));
            b.connect(splitters[k], arm, Endpoint::Tap(tap));
            b.connect_tap(tap, Endpoint::Node(rot, 0))?;
            b.connect(rot, 0, Endpoint::Node(splitters[k + 1], arm));
            taps.push(tap);
            rotators.push(rot);
        }
    }
    let sinks = [
        b.add_sink(format!("N{}", 2 * stages)),
        b.add_sink(format!("N{}", 2 * stages + 1)),
    ];
    b.connect(splitters[stages], 0, Endpoint::Sink(sinks[0]));
    b.connect(splitters[stages], 1, Endpoint::Sink(sinks[1]));
    b.add_source(Endpoint::Node(splitters[0], 0));
    b.add_source(Endpoint::Node(splitters[0], 1));
    Ok((
        b.build()?,
        InterferometerHandles {
            splitters,
            rotators,
            taps,
            sinks,
        },
    ))
}

/// Two beam splitters with phase shifters `phi0`, `phi1` on the arms.
/// Arm taps are `N₀, N₁`; output sinks are `N₂, N₃`.
pub fn build_mach_zehnder<R: Rng + ?Sized>(
    phi0: f64,
    phi1: f64,
    cfg: &DeviceConfig,
    rng: &mut R,
) -> Result<(Network, InterferometerHandles)> {
    build_interferometer(&[phi0, phi1], cfg, rng)
}

/// Three beam splitters with phases `φ₀…φ₃`. Arm taps are `N₀…N₃`; output sinks are `N₄, N₅`.
pub fn build_chained_mz<R: Rng + ?Sized>(
    phi: [f64; 4],
    cfg: &DeviceConfig,
    rng: &mut R,
) -> Result<(Network, InterferometerHandles)> {
    build_interferometer(&phi, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn rotate_cases() {
        assert_eq!(rotate2([0.3, 0.4], 0.0), [0.3, 0.4]);
        let v = rotate2([1.0, 0.0], PI / 2.0);
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotator_node_matches_rotate2() {
        let mut r = Rotator::new(0.7);
        let m = Message::from_angle(0.2);
        let (port, out) = r.process(0, m).unwrap();
        assert_eq!(port, 0);
        let want = rotate2(m.payload(), 0.7);
        assert!((out.payload()[0] - want[0]).abs() < 1e-15);
        assert!((out.angle() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn polarizer_emits_axis_vectors() {
        let phi = 0.4;
        let (mut net, h) = build_polarizer(phi, 0.99, &mut rng()).unwrap();
        assert_eq!(net.kinds(), vec!["rotator", "circle-dlm"]);
        for _ in 0..50 {
            let (sink, m) = net.process_event(0, Message::from_angle(1.0)).unwrap();
            let want = if sink == h.sinks[0] {
                phi
            } else {
                phi + PI / 2.0
            };
            assert!((m.angle() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn aligned_polarizer_passes_everything() {
        let phi = 0.6;
        let (mut net, h) = build_polarizer(phi, 0.99, &mut rng()).unwrap();
        let mut src = || (0usize, Message::from_angle(phi));
        let t = net.run_experiment(&mut src, 2000, 1000).unwrap();
        assert_eq!(t.sinks[h.sinks[0].0], 1000);
    }

    #[test]
    fn turning_the_polarizer_updates_both_parts() {
        let (mut net, h) = build_polarizer(0.0, 0.99, &mut rng()).unwrap();
        h.polarizer.set_phi(&mut net, 1.2);
        assert_eq!(
            net.node_as::<Rotator>(h.polarizer.rotator).unwrap().phi(),
            -1.2
        );
        assert_eq!(
            net.node_as::<PolarizerDlm>(h.polarizer.dlm).unwrap().phi(),
            1.2
        );
    }

    #[test]
    fn mixing_is_the_documented_rotation() {
        let w = [0.1, 0.2, 0.3, 0.4];
        let m = bs_mix(&w);
        let s = FRAC_1_SQRT_2;
        assert_eq!(
            m,
            [
                (0.1 - 0.4) * s,
                (0.3 + 0.2) * s,
                (0.3 - 0.2) * s,
                (0.1 + 0.4) * s
            ]
        );
    }

    #[test]
    fn beam_splitter_rejects_third_input() {
        let cfg = DeviceConfig::new(0.99);
        let mut bs = random_beam_splitter(&cfg, 0, &mut rng()).unwrap();
        assert_eq!(
            bs.process(2, Message::from_angle(0.0)).unwrap_err(),
            Error::InvalidChannel(2)
        );
    }

    #[test]
    fn interferometer_layout() {
        let cfg = DeviceConfig::new(0.99);
        let (net, h) = build_mach_zehnder(0.1, 0.2, &cfg, &mut rng()).unwrap();
        assert_eq!(h.splitters.len(), 2);
        assert_eq!(h.rotators.len(), 2);
        assert_eq!(net.tap_names(), &["N0".to_string(), "N1".to_string()]);
        assert_eq!(net.sink_names(), &["N2".to_string(), "N3".to_string()]);
        let (net, h) = build_chained_mz([0.0; 4], &cfg, &mut rng()).unwrap();
        assert_eq!(h.splitters.len(), 3);
        assert_eq!(net.tap_names().len(), 4);
        assert_eq!(net.sink_names(), &["N4".to_string(), "N5".to_string()]);
    }

    #[test]
    fn slm_backend_keeps_initial_states() {
        let dlm = DeviceConfig::new(0.99);
        let slm = dlm.with_backend(BackendKind::Slm(SlmRule::Corrected), 77);
        let a = random_beam_splitter(&dlm, 0, &mut rng()).unwrap();
        let b = random_beam_splitter(&slm, 0, &mut rng()).unwrap();
        assert_eq!(a.state(), b.state());
    }

    proptest! {
        #[test]
        fn rotation_round_trip(a in -10.0f64..10.0, b in -10.0f64..10.0, phi in -7.0f64..7.0) {
            let v = rotate2(rotate2([a, b], phi), -phi);
            prop_assert!((v[0] - a).abs() < 1e-12 && (v[1] - b).abs() < 1e-12);
        }

        #[test]
        fn beam_splitter_emits_unit_vectors(
            seed in any::<u64>(),
            events in prop::collection::vec((0usize..2, -PI..PI), 1..200),
        ) {
            let cfg = DeviceConfig::new(0.95);
            let mut bs = random_beam_splitter(&cfg, 0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for (port, psi) in events {
                let (ch, m) = bs.process(port, Message::from_angle(psi)).unwrap();
                prop_assert!(ch < 2);
                let p = m.payload();
                prop_assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-9);
                let n: f64 = bs.state().iter().map(|v| v * v).sum();
                prop_assert!((n - 2.0).abs() < 1e-9);
            }
            prop_assert_eq!(bs.fallbacks(), 0);
        }
    }
}
