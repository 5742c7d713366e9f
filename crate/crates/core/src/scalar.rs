//! Machines with a single real internal variable.
//!
//! The position machine moves its variable a fraction `1 − α` of the way to
//! each input, i.e. it is an exponential moving average that also reports on
//! which side of its current estimate the input fell. The interval machine
//! instead steps towards `±1` and ends up oscillating around the input, with
//! the fraction of upward steps encoding where the input sits in `[-1, 1]`.

use std::any::Any;

use crate::error::{Error, Result};
use crate::message::Message;
use crate::network::{Endpoint, Network, NetworkBuilder, Node, NodeId, SinkId};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InputOutOfRange {
            value: alpha,
            range: "(0, 1)",
        })
    }
}

/// Internal variable of the position machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionState {
    pub x: f64,
    pub alpha: f64,
}

impl PositionState {
    pub fn new(x: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !x.is_finite() || x.abs() > 1.0 {
            return Err(Error::InputOutOfRange {
                value: x,
                range: "[-1, 1]",
            });
        }
        Ok(PositionState { x, alpha })
    }
}

/// Internal variable of the interval machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalState {
    pub x: f64,
    pub alpha: f64,
}

impl IntervalState {
    pub fn new(x: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !x.is_finite() || x.abs() > 1.0 {
            return Err(Error::InputOutOfRange {
                value: x,
                range: "[-1, 1]",
            });
        }
        Ok(IntervalState { x, alpha })
    }
}

/// One position-machine event. Returns `+1` when `y ≥ x`, else `-1`, and the
/// state moved to `αx + (1 − α)y`.
pub fn step_position(st: PositionState, y: f64) -> Result<(i8, PositionState)> {
    if !y.is_finite() || y.abs() > 1.0 {
        return Err(Error::InputOutOfRange {
            value: y,
            range: "[-1, 1]",
        });
    }
    let delta = if y >= st.x { 1 } else { -1 };
    let x = st.alpha * st.x + (1.0 - st.alpha) * y;
    Ok((delta, PositionState { x, ..st }))
}

/// Value of the position machine after consuming `ys`, computed directly as
/// `αⁿx₀ + (1 − α) Σᵢ αⁿ⁻¹⁻ⁱ yᵢ`.
pub fn closed_form_position(x0: f64, ys: &[f64], alpha: f64) -> f64 {
    let n = ys.len();
    let mut sum = 0.0;
    // Horner-free evaluation keeps the sum independent of the iterated recursion
    for (i, &y) in ys.iter().enumerate() {
        sum += alpha.powi((n - 1 - i) as i32) * y;
    }
    alpha.powi(n as i32) * x0 + (1.0 - alpha) * sum
}

/// One interval-machine event: step by `(1 − α)(Δ − x)` with the `Δ = ±1` that
/// lands closest to `y`; ties go to `+1`.
pub fn step_interval(st: IntervalState, y: f64) -> Result<(i8, IntervalState)> {
    if !y.is_finite() || y.abs() >= 1.0 {
        return Err(Error::InputOutOfRange {
            value: y,
            range: "(-1, 1)",
        });
    }
    let base = st.alpha * st.x;
    let step = 1.0 - st.alpha;
    let up = (y - base - step).abs();
    let down = (y - base + step).abs();
    let delta: i8 = if up <= down { 1 } else { -1 };
    let x = base + step * f64::from(delta);
    Ok((delta, IntervalState { x, ..st }))
}

/// Position machine as a network node. Port 0 carries inputs below the
/// current estimate (`-1`), port 1 the others (`+1`); the input is forwarded
/// unchanged.
#[derive(Debug, Clone)]
pub struct PositionNode {
    pub state: PositionState,
}

impl PositionNode {
    pub fn new(x0: f64, alpha: f64) -> Result<Self> {
        Ok(PositionNode {
            state: PositionState::new(x0, alpha)?,
        })
    }
}

impl Node for PositionNode {
    fn kind(&self) -> &'static str {
        "position-dlm"
    }
    fn inputs(&self) -> usize {
        1
    }
    fn outputs(&self) -> usize {
        2
    }
    fn process(&mut self, _port: usize, msg: Message) -> Result<(usize, Message)> {
        let (delta, st) = step_position(self.state, msg.scalar())?;
        self.state = st;
        Ok((if delta > 0 { 1 } else { 0 }, msg))
    }
    fn state(&self) -> Vec<f64> {
        vec![self.state.x]
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

/// Handles into a three-level classifier tree.
#[derive(Debug, Clone)]
pub struct ThreeLevelTree {
    /// Machines in breadth-first order: the root, its two children, then the four leaves.
    pub machines: [NodeId; 7],
    pub sinks: [SinkId; 8],
}

impl ThreeLevelTree {
    /// Current internal values, breadth-first.
    pub fn values(&self, net: &Network) -> [f64; 7] {
        let mut out = [0.0; 7];
        for (o, &id) in out.iter_mut().zip(&self.machines) {
            *o = net
                .node_as::<PositionNode>(id)
                .map(|n| n.state.x)
                .unwrap_or(f64::NAN);
        }
        out
    }
}

/// A binary tree of seven position machines. Machine `k` (breadth-first,
/// counting from zero) feeds its `-1` output to machine `2k + 1` and its `+1`
/// output to `2k + 2`; the leaves feed eight sinks. All machines start at 0.
pub fn build_three_level_classifier(alpha: f64) -> Result<(Network, ThreeLevelTree)> {
    let mut b = NetworkBuilder::new();
    let mut machines = [NodeId(0); 7];
    for (k, m) in machines.iter_mut().enumerate() {
        *m = b.add_node(
            format!("machine{}", k + 1),
            Box::new(PositionNode::new(0.0, alpha)?),
        );
    }
    let mut sinks = [SinkId(0); 8];
    for (k, s) in sinks.iter_mut().enumerate() {
        *s = b.add_sink(format!(
            "leaf{}{}",
            k / 2 + 4,
            if k % 2 == 0 { "-" } else { "+" }
        ));
    }
    for k in 0..7 {
        for port in 0..2 {
            let child = 2 * k + 1 + port;
            let to = if child < 7 {
                Endpoint::Node(machines[child], 0)
            } else {
                Endpoint::Sink(sinks[child - 7])
            };
            b.connect(machines[k], port, to);
        }
    }
    b.add_source(Endpoint::Node(machines[0], 0));
    Ok((b.build()?, ThreeLevelTree { machines, sinks }))
}

/// Stationary values of a three-level tree fed uniformly from `inputs`,
/// assuming each machine has settled on the mean of what it receives.
///
/// Machines that receive nothing get `NaN`. The split at each machine uses
/// the same `y ≥ mean` rule as the machines themselves.
pub fn three_level_expected(inputs: &[f64]) -> [f64; 7] {
    fn fill(k: usize, set: &[f64], out: &mut [f64; 7]) {
        if k >= 7 {
            return;
        }
        if set.is_empty() {
            out[k] = f64::NAN;
            fill(2 * k + 1, set, out);
            fill(2 * k + 2, set, out);
            return;
        }
        let mean = set.iter().sum::<f64>() / set.len() as f64;
        out[k] = mean;
        let (lo, hi): (Vec<f64>, Vec<f64>) = set.iter().partition(|&&y| y < mean);
        fill(2 * k + 1, &lo, out);
        fill(2 * k + 2, &hi, out);
    }
    let mut out = [f64::NAN; 7];
    fill(0, inputs, &mut out);
    out
}
