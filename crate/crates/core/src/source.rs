//! Seeded event generators feeding networks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::message::Message;
use crate::network::EventSource;

/// Every event enters port 0 carrying the same angle.
#[derive(Debug, Clone, Copy)]
pub struct FixedAngle {
    msg: Message,
}

impl FixedAngle {
    pub fn new(psi: f64) -> Self {
        FixedAngle {
            msg: Message::from_angle(psi),
        }
    }
}

impl EventSource for FixedAngle {
    fn next_event(&mut self) -> (usize, Message) {
        (0, self.msg)
    }
}

/// Every event enters port 0 with an angle drawn uniformly from `[0, 2π)`.
#[derive(Debug, Clone)]
pub struct RandomAngle {
    pub rng: ChaCha8Rng,
}

impl EventSource for RandomAngle {
    fn next_event(&mut self) -> (usize, Message) {
        let psi = self.rng.random::<f64>() * std::f64::consts::TAU;
        (0, Message::from_angle(psi))
    }
}

/// Two-input source: port 0 with probability `p0` carrying `ψ₀`, otherwise
/// port 1 carrying `ψ₁`.
#[derive(Debug, Clone)]
pub struct TwoPort {
    p0: f64,
    msgs: [Message; 2],
    pub rng: ChaCha8Rng,
}

impl TwoPort {
    pub fn new(p0: f64, psi0: f64, psi1: f64, rng: ChaCha8Rng) -> Result<Self> {
        let mut s = TwoPort {
            p0: 0.0,
            msgs: [Message::from_angle(psi0), Message::from_angle(psi1)],
            rng,
        };
        s.set(p0, psi0, psi1)?;
        Ok(s)
    }

    pub fn set(&mut self, p0: f64, psi0: f64, psi1: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InputOutOfRange {
                value: p0,
                range: "[0, 1]",
            });
        }
        self.p0 = p0;
        self.msgs = [Message::from_angle(psi0), Message::from_angle(psi1)];
        Ok(())
    }
}

impl EventSource for TwoPort {
    fn next_event(&mut self) -> (usize, Message) {
        // the draw is made even when p0 is 0 or 1 so the stream position
        // does not depend on the probability
        let port = usize::from(self.rng.random::<f64>() >= self.p0);
        (port, self.msgs[port])
    }
}

/// Scalars drawn with equal probability from a fixed set.
#[derive(Debug, Clone)]
pub struct ScalarChoice {
    values: Vec<Message>,
    pub rng: ChaCha8Rng,
}

impl ScalarChoice {
    pub fn new(values: &[f64], rng: ChaCha8Rng) -> Result<Self> {
        let mut s = ScalarChoice {
            values: Vec::new(),
            rng,
        };
        s.set_values(values)?;
        Ok(s)
    }

    pub fn set_values(&mut self, values: &[f64]) -> Result<()> {
        if values.is_empty() {
            return Err(Error::Config("empty input set".into()));
        }
        self.values = values
            .iter()
            .map(|&v| Message::from_scalar(v))
            .collect::<Result<_>>()?;
        Ok(())
    }
}

impl EventSource for ScalarChoice {
    fn next_event(&mut self) -> (usize, Message) {
        let i = self.rng.random_range(0..self.values.len());
        (0, self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn two_port_frequencies() {
        let mut s = TwoPort::new(0.25, 0.1, 0.2, rng(1)).unwrap();
        let n = 40_000;
        let zeros = (0..n).filter(|_| s.next_event().0 == 0).count();
        assert!((zeros as f64 / n as f64 - 0.25).abs() < 0.01);
        let (port, m) = TwoPort::new(1.0, 0.3, 0.0, rng(1)).unwrap().next_event();
        assert_eq!(port, 0);
        assert!((m.angle() - 0.3).abs() < 1e-15);
        assert!(TwoPort::new(1.5, 0.0, 0.0, rng(1)).is_err());
    }

    #[test]
    fn scalar_choice_uses_every_value() {
        let vals = [-0.75, -0.25, 0.25, 0.75];
        let mut s = ScalarChoice::new(&vals, rng(2)).unwrap();
        let mut seen = [0usize; 4];
        for _ in 0..4000 {
            let y = s.next_event().1.scalar();
            seen[vals.iter().position(|&v| v == y).unwrap()] += 1;
        }
        assert!(seen.iter().all(|&c| c > 900));
        assert!(ScalarChoice::new(&[], rng(2)).is_err());
    }

    #[test]
    fn random_angles_are_seeded() {
        let mut a = RandomAngle { rng: rng(3) };
        let mut b = RandomAngle { rng: rng(3) };
        for _ in 0..10 {
            assert_eq!(a.next_event(), b.next_event());
        }
    }
}
