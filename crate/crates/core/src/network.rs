//! Networks of machines connected port to port, processing one message at a time.
//!
//! A network is a directed acyclic graph. Every node output is wired either to
//! another node's input, to a pass-through tap (a counter that forwards the
//! message), or to an absorbing sink. An event enters through a source port and
//! is routed hop by hop until exactly one sink absorbs it; only one message is
//! ever in flight.

use std::any::Any;
use std::fmt;

use crate::error::{Error, Result};
use crate::message::Message;
use crate::vector::AuditStats;

/// A processing unit in a network.
pub trait Node: Send + fmt::Debug {
    fn kind(&self) -> &'static str;
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;

    /// Consumes the message arriving on `port`, updates internal state and
    /// returns the output port and outgoing message.
    fn process(&mut self, port: usize, msg: Message) -> Result<(usize, Message)>;

    /// Flattened internal state, for inspection and replay checks.
    fn state(&self) -> Vec<f64> {
        Vec::new()
    }

    fn set_audit(&mut self, _on: bool) {}

    fn audit(&self) -> Option<AuditStats> {
        None
    }

    fn clone_box(&self) -> Box<dyn Node>;
    fn as_any(&self) -> &dyn Any;
    fn as_any_mut(&mut self) -> &mut dyn Any;
}

impl Clone for Box<dyn Node> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TapId(pub usize);

/// Where a wire ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Node(NodeId, usize),
    Tap(TapId),
    Sink(SinkId),
}

/// Produces the events fed into a network: an entry port and a message.
pub trait EventSource {
    fn next_event(&mut self) -> (usize, Message);
}

impl<F: FnMut() -> (usize, Message)> EventSource for F {
    fn next_event(&mut self) -> (usize, Message) {
        self()
    }
}

/// Per-sink and per-tap event counts.
///
/// Events processed during warm-up are not counted in `sinks`/`taps` but are
/// still attributed to their sink in `discarded`, so that
/// `Σ sinks + Σ discarded` equals the number of processed events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TallyCounters {
    pub sinks: Vec<u64>,
    pub taps: Vec<u64>,
    pub discarded: Vec<u64>,
    pub tap_discarded: Vec<u64>,
    pub warmup: u64,
}

impl TallyCounters {
    fn new(sinks: usize, taps: usize) -> Self {
        TallyCounters {
            sinks: vec![0; sinks],
            taps: vec![0; taps],
            discarded: vec![0; sinks],
            tap_discarded: vec![0; taps],
            warmup: 0,
        }
    }

    /// Counted events (after warm-up).
    pub fn counted(&self) -> u64 {
        self.sinks.iter().sum()
    }

    pub fn total_processed(&self) -> u64 {
        self.counted() + self.discarded.iter().sum::<u64>()
    }

    /// `count / Σ counts` over the given group of sinks.
    pub fn sink_fraction(&self, sink: SinkId, group: &[SinkId]) -> f64 {
        let total: u64 = group.iter().map(|s| self.sinks[s.0]).sum();
        if total == 0 {
            return f64::NAN;
        }
        self.sinks[sink.0] as f64 / total as f64
    }

    pub fn tap_fraction(&self, tap: TapId, group: &[TapId]) -> f64 {
        let total: u64 = group.iter().map(|t| self.taps[t.0]).sum();
        if total == 0 {
            return f64::NAN;
        }
        self.taps[tap.0] as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Node(usize, usize),
    Tap(usize),
    Sink(usize),
}

/// Incrementally assembles and validates a [`Network`].
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    nodes: Vec<(String, Box<dyn Node>)>,
    sinks: Vec<String>,
    taps: Vec<(String, Option<Endpoint>)>,
    edges: Vec<(NodeId, usize, Endpoint)>,
    sources: Vec<Endpoint>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>, node: Box<dyn Node>) -> NodeId {
        self.nodes.push((name.into(), node));
        NodeId(self.nodes.len() - 1)
    }

    pub fn add_sink(&mut self, name: impl Into<String>) -> SinkId {
        self.sinks.push(name.into());
        SinkId(self.sinks.len() - 1)
    }

    pub fn add_tap(&mut self, name: impl Into<String>) -> TapId {
        self.taps.push((name.into(), None));
        TapId(self.taps.len() - 1)
    }

    /// Wires output `port` of `from` to `to`.
    pub fn connect(&mut self, from: NodeId, port: usize, to: Endpoint) -> &mut Self {
        self.edges.push((from, port, to));
        self
    }

    /// Wires the pass-through side of a tap.
    pub fn connect_tap(&mut self, tap: TapId, to: Endpoint) -> Result<&mut Self> {
        match self.taps.get_mut(tap.0) {
            Some(t) if t.1.is_none() => {
                t.1 = Some(to);
                Ok(self)
            }
            Some(_) => Err(Error::DanglingEdge(format!("tap {} wired twice", tap.0))),
            None => Err(Error::DanglingEdge(format!("no tap {}", tap.0))),
        }
    }

    /// Declares an entry port; returns its index.
    pub fn add_source(&mut self, to: Endpoint) -> usize {
        self.sources.push(to);
        self.sources.len() - 1
    }

    fn resolve(&self, e: Endpoint) -> Result<Target> {
        match e {
            Endpoint::Node(NodeId(n), port) => {
                let (_, node) = self
                    .nodes
                    .get(n)
                    .ok_or_else(|| Error::DanglingEdge(format!("no node {n}")))?;
                if port >= node.inputs() {
                    return Err(Error::DanglingEdge(format!(
                        "node {n} has no input port {port}"
                    )));
                }
                Ok(Target::Node(n, port))
            }
            Endpoint::Tap(TapId(t)) if t < self.taps.len() => Ok(Target::Tap(t)),
            Endpoint::Tap(TapId(t)) => Err(Error::DanglingEdge(format!("no tap {t}"))),
            Endpoint::Sink(SinkId(s)) if s < self.sinks.len() => Ok(Target::Sink(s)),
            Endpoint::Sink(SinkId(s)) => Err(Error::DanglingEdge(format!("no sink {s}"))),
        }
    }

    /// Validates wiring and returns the runnable network.
    ///
    /// Fails on edges to nonexistent nodes, ports or sinks, on outputs wired
    /// twice or not at all, and on cycles.
    pub fn build(self) -> Result<Network> {
        let mut routes: Vec<Vec<Option<Target>>> = self
            .nodes
            .iter()
            .map(|(_, n)| vec![None; n.outputs()])
            .collect();
        for &(NodeId(from), port, to) in &self.edges {
            let outs = routes
                .get_mut(from)
                .ok_or_else(|| Error::DanglingEdge(format!("no node {from}")))?;
            let slot = outs.get_mut(port).ok_or_else(|| {
                Error::DanglingEdge(format!("node {from} has no output port {port}"))
            })?;
            if slot.is_some() {
                return Err(Error::DanglingEdge(format!(
                    "node {from} output {port} wired twice"
                )));
            }
            *slot = Some(self.resolve(to)?);
        }
        let routes: Vec<Vec<Target>> = routes
            .into_iter()
            .enumerate()
            .map(|(node, outs)| {
                outs.into_iter()
                    .enumerate()
                    .map(|(port, t)| t.ok_or(Error::UnconnectedOutput { node, port }))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let tap_next = self
            .taps
            .iter()
            .enumerate()
            .map(|(i, (_, next))| {
                next.ok_or_else(|| Error::DanglingEdge(format!("tap {i} has no output")))
                    .and_then(|e| self.resolve(e))
            })
            .collect::<Result<Vec<_>>>()?;
        let sources = self
            .sources
            .iter()
            .map(|&e| self.resolve(e))
            .collect::<Result<Vec<_>>>()?;

        check_acyclic(&routes, &tap_next)?;

        let (node_names, nodes): (Vec<_>, Vec<_>) = self.nodes.into_iter().unzip();
        let tap_names = self.taps.into_iter().map(|(n, _)| n).collect();
        let tally = TallyCounters::new(self.sinks.len(), tap_next.len());
        let hop_limit = nodes.len() + tap_next.len() + 1;
        Ok(Network {
            nodes,
            node_names,
            sink_names: self.sinks,
            tap_names,
            routes,
            tap_next,
            sources,
            tally,
            logs: None,
            hop_limit,
        })
    }
}

/// Depth-first search over nodes and taps, failing on a back edge.
fn check_acyclic(routes: &[Vec<Target>], taps: &[Target]) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    // vertices: nodes first, then taps
    let n = routes.len();
    let succ = |v: usize| -> Vec<usize> {
        let outs: Vec<Target> = if v < n {
            routes[v].clone()
        } else {
            vec![taps[v - n]]
        };
        outs.into_iter()
            .filter_map(|t| match t {
                Target::Node(m, _) => Some(m),
                Target::Tap(t) => Some(n + t),
                Target::Sink(_) => None,
            })
            .collect()
    };
    let mut mark = vec![Mark::New; n + taps.len()];
    for root in 0..mark.len() {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, succ(root), 0usize)];
        mark[root] = Mark::Active;
        while let Some((v, next, i)) = stack.last_mut() {
            if *i < next.len() {
                let w = next[*i];
                *i += 1;
                match mark[w] {
                    Mark::Active => return Err(Error::Cycle(if w < n { w } else { *v })),
                    Mark::New => {
                        mark[w] = Mark::Active;
                        let s = succ(w);
                        stack.push((w, s, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[*v] = Mark::Done;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// A validated network of nodes. Single-threaded by contract; clone it to get
/// an independent replica.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Box<dyn Node>>,
    node_names: Vec<String>,
    sink_names: Vec<String>,
    tap_names: Vec<String>,
    routes: Vec<Vec<Target>>,
    tap_next: Vec<Target>,
    sources: Vec<Target>,
    tally: TallyCounters,
    logs: Option<Vec<Vec<(usize, Message)>>>,
    hop_limit: usize,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn node(&self, id: NodeId) -> &dyn Node {
        self.nodes[id.0].as_ref()
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut dyn Node {
        self.nodes[id.0].as_mut()
    }

    /// Typed access to a node, if it has concrete type `T`.
    pub fn node_as<T: 'static>(&self, id: NodeId) -> Option<&T> {
        self.nodes.get(id.0)?.as_any().downcast_ref()
    }

    pub fn node_as_mut<T: 'static>(&mut self, id: NodeId) -> Option<&mut T> {
        self.nodes.get_mut(id.0)?.as_any_mut().downcast_mut()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.node_names[id.0]
    }

    pub fn find_node(&self, name: &str) -> Option<NodeId> {
        self.node_names.iter().position(|n| n == name).map(NodeId)
    }

    pub fn find_sink(&self, name: &str) -> Option<SinkId> {
        self.sink_names.iter().position(|n| n == name).map(SinkId)
    }

    pub fn find_tap(&self, name: &str) -> Option<TapId> {
        self.tap_names.iter().position(|n| n == name).map(TapId)
    }

    pub fn sink_names(&self) -> &[String] {
        &self.sink_names
    }

    pub fn tap_names(&self) -> &[String] {
        &self.tap_names
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.nodes.iter().map(|n| n.kind()).collect()
    }

    pub fn tally(&self) -> &TallyCounters {
        &self.tally
    }

    pub fn reset_tally(&mut self) {
        self.tally = TallyCounters::new(self.sink_names.len(), self.tap_names.len());
    }

    pub fn set_audit(&mut self, on: bool) {
        for n in &mut self.nodes {
            n.set_audit(on);
        }
    }

    /// Audit statistics merged over every auditing node.
    pub fn audit(&self) -> AuditStats {
        let mut total = AuditStats::default();
        for a in self.nodes.iter().filter_map(|n| n.audit()) {
            total.merge(&a);
        }
        total
    }

    /// Starts (or stops) recording, per node, every `(input port, message)` it receives.
    pub fn set_logging(&mut self, on: bool) {
        self.logs = if on {
            Some(vec![Vec::new(); self.nodes.len()])
        } else {
            None
        };
    }

    pub fn log(&self, id: NodeId) -> Option<&[(usize, Message)]> {
        self.logs.as_ref().map(|l| l[id.0].as_slice())
    }

    fn propagate(
        &mut self,
        entry: usize,
        msg: Message,
        counting: bool,
        mut visited: Option<&mut Vec<TapId>>,
    ) -> Result<(SinkId, Message)> {
        let mut target = *self.sources.get(entry).ok_or(Error::UnknownSource(entry))?;
        let mut msg = msg;
        for _ in 0..self.hop_limit {
            match target {
                Target::Sink(s) => {
                    if counting {
                        self.tally.sinks[s] += 1;
                    } else {
                        self.tally.discarded[s] += 1;
                    }
                    return Ok((SinkId(s), msg));
                }
                Target::Tap(t) => {
                    if counting {
                        self.tally.taps[t] += 1;
                    } else {
                        self.tally.tap_discarded[t] += 1;
                    }
                    if let Some(v) = visited.as_deref_mut() {
                        v.push(TapId(t));
                    }
                    target = self.tap_next[t];
                }
                Target::Node(n, port) => {
                    if let Some(logs) = self.logs.as_mut() {
                        logs[n].push((port, msg));
                    }
                    let (out, next) = self.nodes[n].process(port, msg)?;
                    target = *self.routes[n]
                        .get(out)
                        .ok_or(Error::UnconnectedOutput { node: n, port: out })?;
                    msg = next;
                }
            }
        }
        Err(Error::PropagationLimit(self.hop_limit))
    }

    /// Routes one event from source port `entry` to a sink, updating the tallies.
    pub fn process_event(&mut self, entry: usize, msg: Message) -> Result<(SinkId, Message)> {
        self.propagate(entry, msg, true, None)
    }

    /// Like [`Network::process_event`], also appending every tap passed on the way.
    pub fn process_event_traced(
        &mut self,
        entry: usize,
        msg: Message,
        taps: &mut Vec<TapId>,
    ) -> Result<(SinkId, Message)> {
        self.propagate(entry, msg, true, Some(taps))
    }

    /// Runs `n` events from `source`; the first `warmup` are routed but only
    /// recorded as discards. Returns the tallies of this run.
    pub fn run_experiment<S: EventSource + ?Sized>(
        &mut self,
        source: &mut S,
        n: u64,
        warmup: u64,
    ) -> Result<TallyCounters> {
        if n == 0 {
            return Err(Error::Config("event count must be at least 1".into()));
        }
        if warmup >= n {
            return Err(Error::Config(format!(
                "warm-up ({warmup}) must be smaller than the event count ({n})"
            )));
        }
        self.reset_tally();
        self.tally.warmup = warmup;
        for k in 0..n {
            let (entry, msg) = source.next_event();
            self.propagate(entry, msg, k >= warmup, None)?;
        }
        Ok(self.tally.clone())
    }
}

/// A node that forwards its input unchanged.
#[derive(Debug, Clone, Default)]
pub struct Identity;

impl Node for Identity {
    fn kind(&self) -> &'static str {
        "identity"
    }
    fn inputs(&self) -> usize {
        1
    }
    fn outputs(&self) -> usize {
        1
    }
    fn process(&mut self, _port: usize, msg: Message) -> Result<(usize, Message)> {
        Ok((0, msg))
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

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(phi: f64) -> Message {
        Message::from_angle(phi)
    }

    #[test]
    fn source_straight_to_sink() {
        let mut b = NetworkBuilder::new();
        let s = b.add_sink("out");
        b.add_source(Endpoint::Sink(s));
        let mut net = b.build().unwrap();
        let (sink, m) = net.process_event(0, msg(0.3)).unwrap();
        assert_eq!(sink, s);
        assert_eq!(m, msg(0.3));
        assert_eq!(net.tally().sinks, vec![1]);
    }

    #[test]
    fn pass_through_chain_with_tap() {
        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        let t = b.add_tap("arm");
        let s = b.add_sink("out");
        b.connect(a, 0, Endpoint::Tap(t));
        b.connect_tap(t, Endpoint::Sink(s)).unwrap();
        b.add_source(Endpoint::Node(a, 0));
        let mut net = b.build().unwrap();
        let mut visited = Vec::new();
        let (sink, m) = net.process_event_traced(0, msg(1.0), &mut visited).unwrap();
        assert_eq!((sink, m), (s, msg(1.0)));
        assert_eq!(visited, vec![t]);
        assert_eq!(net.tally().taps, vec![1]);
    }

    #[test]
    fn edge_to_missing_node_rejected() {
        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        b.connect(a, 0, Endpoint::Node(NodeId(7), 0));
        b.add_source(Endpoint::Node(a, 0));
        assert!(matches!(b.build(), Err(Error::DanglingEdge(_))));
    }

    #[test]
    fn missing_port_and_sink_rejected() {
        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        b.connect(a, 0, Endpoint::Sink(SinkId(3)));
        assert!(matches!(b.build(), Err(Error::DanglingEdge(_))));

        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        let s = b.add_sink("s");
        b.connect(a, 1, Endpoint::Sink(s));
        assert!(matches!(b.build(), Err(Error::DanglingEdge(_))));
    }

    #[test]
    fn unconnected_output_rejected() {
        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        b.add_source(Endpoint::Node(a, 0));
        assert_eq!(
            b.build().unwrap_err(),
            Error::UnconnectedOutput { node: 0, port: 0 }
        );
    }

    #[test]
    fn double_wiring_rejected() {
        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        let s = b.add_sink("s");
        b.connect(a, 0, Endpoint::Sink(s));
        b.connect(a, 0, Endpoint::Sink(s));
        assert!(matches!(b.build(), Err(Error::DanglingEdge(_))));
    }

    #[test]
    fn cycle_rejected() {
        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        let c = b.add_node("c", Box::new(Identity));
        b.connect(a, 0, Endpoint::Node(c, 0));
        b.connect(c, 0, Endpoint::Node(a, 0));
        b.add_source(Endpoint::Node(a, 0));
        assert!(matches!(b.build(), Err(Error::Cycle(_))));

        let mut b = NetworkBuilder::new();
        let a = b.add_node("a", Box::new(Identity));
        let t = b.add_tap("t");
        b.connect(a, 0, Endpoint::Tap(t));
        b.connect_tap(t, Endpoint::Node(a, 0)).unwrap();
        assert!(matches!(b.build(), Err(Error::Cycle(_))));
    }

    #[test]
    fn unknown_source_rejected() {
        let mut b = NetworkBuilder::new();
        let s = b.add_sink("s");
        b.add_source(Endpoint::Sink(s));
        let mut net = b.build().unwrap();
        assert_eq!(net.process_event(1, msg(0.0)), Err(Error::UnknownSource(1)));
    }

    #[test]
    fn warmup_is_conserved() {
        let mut b = NetworkBuilder::new();
        let s = b.add_sink("s");
        b.add_source(Endpoint::Sink(s));
        let mut net = b.build().unwrap();
        let mut src = || (0usize, msg(0.0));
        let t = net.run_experiment(&mut src, 10, 4).unwrap();
        assert_eq!(t.sinks, vec![6]);
        assert_eq!(t.discarded, vec![4]);
        assert_eq!(t.total_processed(), 10);
        assert!(net.run_experiment(&mut src, 0, 0).is_err());
        assert!(net.run_experiment(&mut src, 5, 5).is_err());
    }
}
