//! Stochastic output selection.
//!
//! A stochastic learning machine learns exactly like its deterministic
//! counterpart; only the choice of output channel is randomized, using the
//! squared weight of the first half of its internal vector as the probability
//! of channel 0.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Which inequality turns a uniform draw into an output channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlmRule {
    /// Channel 0 iff `r < x₁² + x₂²`, so channel 0 fires with probability `x₁² + x₂²`.
    #[default]
    Corrected,
    /// Channel 0 iff `x₁² + x₂² ≤ r`, which fires channel 0 with the complementary probability.
    Literal,
}

/// Output channel for internal vector `x` and uniform draw `r ∈ [0, 1)`.
pub fn slm_select_output(x: &[f64], r: f64) -> usize {
    select_with_rule(x, r, SlmRule::Corrected)
}

pub fn select_with_rule(x: &[f64], r: f64, rule: SlmRule) -> usize {
    let w = x[0] * x[0] + x[1] * x[1];
    let first = match rule {
        SlmRule::Corrected => r < w,
        SlmRule::Literal => w <= r,
    };
    if first {
        0
    } else {
        1
    }
}

/// How a beam-splitter back-end picks its output channel.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // one per beam splitter; boxing buys nothing
pub enum Backend {
    /// Channel given by the group of the applied update rule.
    Dlm,
    /// Channel drawn from the squared components of the updated internal vector.
    Slm { rng: ChaCha8Rng, rule: SlmRule },
}

impl Backend {
    pub fn slm(rng: ChaCha8Rng) -> Self {
        Backend::Slm {
            rng,
            rule: SlmRule::Corrected,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Backend::Slm { .. })
    }

    /// Output channel after the back-end applied rule component `j` and now holds `x`.
    pub fn select(&mut self, component: usize, x: &[f64]) -> usize {
        match self {
            Backend::Dlm => usize::from(component >= 2),
            Backend::Slm { rng, rule } => select_with_rule(x, rng.random::<f64>(), *rule),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn certain_channels() {
        for r in [0.0, 0.3, 0.999_999] {
            assert_eq!(slm_select_output(&[1.0, 0.0, 0.0, 0.0], r), 0);
            assert_eq!(slm_select_output(&[0.0, 0.0, 1.0, 0.0], r), 1);
        }
    }

    #[test]
    fn frequency_follows_weight() {
        let x = [0.5, 0.0, 0.0, 0.75f64.sqrt()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| slm_select_output(&x, rng.random::<f64>()) == 0)
            .count();
        let f = hits as f64 / n as f64;
        assert!((f - 0.25).abs() < 0.005, "{f}");
    }

    #[test]
    fn literal_rule_is_complementary() {
        let x = [0.5, 0.0, 0.0, 0.75f64.sqrt()];
        assert_eq!(select_with_rule(&x, 0.1, SlmRule::Literal), 1);
        assert_eq!(select_with_rule(&x, 0.9, SlmRule::Literal), 0);
    }

    #[test]
    fn dlm_backend_groups_components() {
        let mut b = Backend::Dlm;
        let x = [0.0, 0.0, 1.0, 0.0];
        assert_eq!(b.select(0, &x), 0);
        assert_eq!(b.select(1, &x), 0);
        assert_eq!(b.select(2, &x), 1);
        assert_eq!(b.select(3, &x), 1);
    }
}
