//! Machines whose internal state is a unit vector on the K-sphere.
//!
//! Every update rule shrinks all components but one by `α` and resets the
//! remaining component `j` to `±√(1 + α²(x_j² − 1))`, which keeps the vector
//! on the unit sphere. Among the `2K` candidates the machine applies the one
//! that minimizes the cost `−x'·y`, i.e. the one that brings its internal
//! vector closest to the input direction.
//!
//! Ties between candidates are broken by the smaller component index, then by
//! the positive sign. Exact ties only occur for degenerate inputs (for example
//! an input orthogonal to the internal vector).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest internal dimension supported by [`UnitVectorState`].
pub const MAX_DIM: usize = 4;

/// Learning parameter used by every optics device unless overridden.
pub const DEFAULT_ALPHA: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The update rule applied at one event: which component was reset, and with which sign.
///
/// `component` is zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleChoice {
    pub component: usize,
    pub sign: Sign,
}

impl RuleChoice {
    /// Two-dimensional view of the choice: `Θ = 1` when the first component was
    /// reset, `Θ = 0` when the second was.
    pub fn theta(&self) -> u8 {
        if self.component == 0 {
            1
        } else {
            0
        }
    }
}

/// Per-event self checks accumulated when auditing is switched on.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AuditStats {
    pub steps: u64,
    /// Largest `| ‖x'‖ − 1 |` of the applied candidate before renormalization.
    pub max_norm_error: f64,
    /// Largest difference between the applied candidate's cost and the brute-force minimum.
    pub max_optimality_gap: f64,
    /// Number of events where rescaling the input changed the decision.
    pub scale_mismatches: u64,
}

impl AuditStats {
    pub fn merge(&mut self, other: &AuditStats) {
        self.steps += other.steps;
        self.max_norm_error = self.max_norm_error.max(other.max_norm_error);
        self.max_optimality_gap = self.max_optimality_gap.max(other.max_optimality_gap);
        self.scale_mismatches += other.scale_mismatches;
    }
}

/// Draws a direction uniformly from the unit sphere in `dim` dimensions.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

fn check_input(y: &[f64]) -> Result<()> {
    let mut n2 = 0.0;
    for &v in y {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        n2 += v * v;
    }
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Internal state of a circle (`K = 2`) or hypersphere DLM.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVectorState {
    x: [f64; MAX_DIM],
    dim: usize,
    alpha: f64,
    audit: Option<AuditStats>,
}

impl UnitVectorState {
    pub fn new(x: &[f64], alpha: f64) -> Result<Self> {
        if x.is_empty() || x.len() > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                got: x.len(),
            });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InputOutOfRange {
                value: alpha,
                range: "(0, 1)",
            });
        }
        check_input(x)?;
        let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut buf = [0.0; MAX_DIM];
        for (b, v) in buf.iter_mut().zip(x) {
            *b = v / n;
        }
        Ok(UnitVectorState {
            x: buf,
            dim: x.len(),
            alpha,
            audit: None,
        })
    }

    /// A state whose initial direction is drawn uniformly at random.
    pub fn random<R: Rng + ?Sized>(dim: usize, alpha: f64, rng: &mut R) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                got: dim,
            });
        }
        Self::new(&random_unit_vector(dim, rng), alpha)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x(&self) -> &[f64] {
        &self.x[..self.dim]
    }

    pub fn set_audit(&mut self, on: bool) {
        self.audit = if on {
            Some(AuditStats::default())
        } else {
            None
        };
    }

    pub fn audit(&self) -> Option<AuditStats> {
        self.audit
    }

    fn reset_value(&self, j: usize) -> f64 {
        // 1 + α²(x² − 1) ≥ 1 − α² > 0 analytically; clamp rounding noise
        (1.0 + self.alpha * self.alpha * (self.x[j] * self.x[j] - 1.0))
            .max(0.0)
            .sqrt()
    }

    /// The candidate internal vector produced by `choice`, before renormalization.
    pub fn candidate(&self, choice: RuleChoice) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                if i == choice.component {
                    choice.sign.value() * self.reset_value(i)
                } else {
                    self.alpha * self.x[i]
                }
            })
            .collect()
    }

    /// All `2K` candidate rules in tie-break order.
    pub fn rules(&self) -> impl Iterator<Item = RuleChoice> {
        (0..self.dim).flat_map(|component| {
            [Sign::Plus, Sign::Minus]
                .into_iter()
                .map(move |sign| RuleChoice { component, sign })
        })
    }

    /// Selects the minimum-cost rule for input `y` without changing the state.
    pub fn choose(&self, y: &[f64]) -> Result<RuleChoice> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        check_input(y)?;
        Ok(self.choose_unchecked(y))
    }

    fn choose_unchecked(&self, y: &[f64]) -> RuleChoice {
        let dot: f64 = (0..self.dim).map(|i| self.x[i] * y[i]).sum();
        let mut best = RuleChoice {
            component: 0,
            sign: Sign::Plus,
        };
        let mut best_cost = f64::INFINITY;
        for (j, &yj) in y.iter().enumerate().take(self.dim) {
            // with s = sign(y_j) the cost is −α(x·y − x_j y_j) − r_j |y_j|
            let cost = -(self.alpha * (dot - self.x[j] * yj) + self.reset_value(j) * yj.abs());
            if cost < best_cost {
                best_cost = cost;
                best = RuleChoice {
                    component: j,
                    sign: if yj < 0.0 { Sign::Minus } else { Sign::Plus },
                };
            }
        }
        best
    }

    /// Applies `choice` and renormalizes. Returns the pre-renormalization norm error.
    pub fn apply(&mut self, choice: RuleChoice) -> f64 {
        let r = choice.sign.value() * self.reset_value(choice.component);
        let mut n2 = 0.0;
        for i in 0..self.dim {
            let v = if i == choice.component {
                r
            } else {
                self.alpha * self.x[i]
            };
            self.x[i] = v;
            n2 += v * v;
        }
        let n = n2.sqrt();
        for v in &mut self.x[..self.dim] {
            *v /= n;
        }
        (n - 1.0).abs()
    }

    /// One hypersphere DLM event: choose the minimum-cost rule for `y` and apply it.
    pub fn step(&mut self, y: &[f64]) -> Result<RuleChoice> {
        let choice = self.choose(y)?;
        if self.audit.is_some() {
            self.audit_step(y, choice);
        }
        let norm_err = self.apply(choice);
        if let Some(a) = self.audit.as_mut() {
            a.max_norm_error = a.max_norm_error.max(norm_err);
        }
        Ok(choice)
    }

    fn audit_step(&mut self, y: &[f64], choice: RuleChoice) {
        let cost = |c: &[f64]| -> f64 { -c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() };
        let chosen = cost(&self.candidate(choice));
        let min = self
            .rules()
            .map(|r| cost(&self.candidate(r)))
            .fold(f64::INFINITY, f64::min);
        let scaled: Vec<f64> = y.iter().map(|v| 3.0 * v).collect();
        let rescaled_choice = self.choose_unchecked(&scaled);
        if let Some(a) = self.audit.as_mut() {
            a.steps += 1;
            a.max_optimality_gap = a.max_optimality_gap.max(chosen - min);
            if rescaled_choice != choice {
                a.scale_mismatches += 1;
            }
        }
    }

    /// Circle DLM event. Returns `(Θ, s)`.
    pub fn step_circle(&mut self, y: [f64; 2]) -> Result<(u8, Sign)> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dim,
            });
        }
        let c = self.step(&y)?;
        Ok((c.theta(), c.sign))
    }

    /// Two-input front-end event.
    ///
    /// The missing half of the 4-vector input is taken from the current
    /// internal vector: channel 0 builds `(y₁, y₂, x₃, x₄)`, channel 1 builds
    /// `(x₁, x₂, y₁, y₂)`.
    pub fn step_frontend(&mut self, channel: usize, y: [f64; 2]) -> Result<RuleChoice> {
        if self.dim != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: self.dim,
            });
        }
        check_input(&y)?;
        let full = match channel {
            0 => [y[0], y[1], self.x[2], self.x[3]],
            1 => [self.x[0], self.x[1], y[0], y[1]],
            c => return Err(Error::InvalidChannel(c)),
        };
        self.step(&full)
    }
}

/// Drives a circle machine with an externally imposed sequence of `Θ` values
/// (positive sign throughout) and returns the squared components after each step.
///
/// Each rule maps `x₁² ↦ α²x₁² + (1 − α²)Θ`, so the ensemble average of `x₁²`
/// relaxes to the mean of `Θ`.
pub fn iterate_random_theta<I>(x0: [f64; 2], thetas: I, alpha: f64) -> Result<Vec<[f64; 2]>>
where
    I: IntoIterator<Item = u8>,
{
    let mut st = UnitVectorState::new(&x0, alpha)?;
    if ((x0[0] * x0[0] + x0[1] * x0[1]) - 1.0).abs() > 1e-9 {
        return Err(Error::InputOutOfRange {
            value: x0[0].hypot(x0[1]),
            range: "unit norm",
        });
    }
    Ok(thetas
        .into_iter()
        .map(|t| {
            let component = if t == 1 { 0 } else { 1 };
            st.apply(RuleChoice {
                component,
                sign: Sign::Plus,
            });
            let x = st.x();
            [x[0] * x[0], x[1] * x[1]]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn brute_force_best(st: &UnitVectorState, y: &[f64]) -> f64 {
        st.rules()
            .map(|r| {
                -st.candidate(r)
                    .iter()
                    .zip(y)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn aligned_fixed_point() {
        let mut st = UnitVectorState::new(&[1.0, 0.0], 0.99).unwrap();
        let (theta, s) = st.step_circle([1.0, 0.0]).unwrap();
        assert_eq!(theta, 1);
        assert_eq!(s, Sign::Plus);
        assert_eq!(st.x(), &[1.0, 0.0]);
    }

    #[test]
    fn zero_input_rejected() {
        let mut st = UnitVectorState::new(&[1.0, 0.0], 0.99).unwrap();
        assert_eq!(st.step_circle([0.0, 0.0]), Err(Error::ZeroVector));
        assert!(st.step(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn invalid_frontend_channel() {
        let mut st = UnitVectorState::new(&[0.5; 4], 0.99).unwrap();
        assert_eq!(
            st.step_frontend(2, [1.0, 0.0]),
            Err(Error::InvalidChannel(2))
        );
    }

    #[test]
    fn basis_input_resets_that_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for j in 0..4 {
            let st0 = UnitVectorState::random(4, 0.9, &mut rng).unwrap();
            let mut y = [0.0; 4];
            y[j] = 1.0;
            let mut st = st0.clone();
            let c = st.step(&y).unwrap();
            assert_eq!(c.component, j);
            assert_eq!(c.sign, Sign::Plus);
            let r = (1.0 + 0.81 * (st0.x()[j].powi(2) - 1.0)).sqrt();
            assert!((st.x()[j] - r).abs() < 1e-12);
            for i in (0..4).filter(|&i| i != j) {
                assert!((st.x()[i] - 0.9 * st0.x()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unused_components_decay_geometrically() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut st = UnitVectorState::random(4, 0.99, &mut rng).unwrap();
        let y = [0.3f64.cos(), 0.3f64.sin()];
        for _ in 0..3000 {
            st.step_frontend(0, y).unwrap();
        }
        let x = st.x();
        assert!(x[2].abs() < 1e-9 && x[3].abs() < 1e-9);
        let a = x[1].atan2(x[0]);
        assert!((a - 0.3).abs() < 0.05);
    }

    #[test]
    fn circle_ratio_at_thirty_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut st = UnitVectorState::random(2, 0.99, &mut rng).unwrap();
        let y = [(PI / 6.0).cos(), (PI / 6.0).sin()];
        let (mut n0, mut n1) = (0u32, 0u32);
        for n in 0..4000 {
            let (theta, _) = st.step_circle(y).unwrap();
            if n >= 1000 {
                if theta == 0 {
                    n0 += 1
                } else {
                    n1 += 1
                }
            }
        }
        let ratio = n0 as f64 / n1 as f64;
        assert!((ratio - 1.0 / 3.0).abs() < 0.03, "ratio {ratio}");
    }

    #[test]
    fn frontend_tracks_channel_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut st = UnitVectorState::random(4, 0.99, &mut rng).unwrap();
        let (y, yp) = ([0.8f64.cos(), 0.8f64.sin()], [2.0f64.cos(), 2.0f64.sin()]);
        let p = 0.5;
        let mut acc = [0.0; 4];
        let mut m = 0.0;
        for n in 0..60_000 {
            let ch = if rng.random::<f64>() < p { 0 } else { 1 };
            st.step_frontend(ch, if ch == 0 { y } else { yp }).unwrap();
            if n >= 10_000 {
                for (a, v) in acc.iter_mut().zip(st.x()) {
                    *a += v;
                }
                m += 1.0;
            }
        }
        let s = 0.5f64.sqrt();
        let want = [y[0] * s, y[1] * s, yp[0] * s, yp[1] * s];
        for i in 0..4 {
            assert!(
                (acc[i] / m - want[i]).abs() < 0.02,
                "{i}: {} vs {}",
                acc[i] / m,
                want[i]
            );
        }
    }

    #[test]
    fn forced_theta_fixed_points() {
        let ones = iterate_random_theta([0.6, 0.8], std::iter::repeat_n(1, 2000), 0.99).unwrap();
        assert!((ones.last().unwrap()[0] - 1.0).abs() < 1e-12);
        let zeros = iterate_random_theta([0.6, 0.8], std::iter::repeat_n(0, 2000), 0.99).unwrap();
        assert!(zeros.last().unwrap()[0] < 1e-12);
    }

    #[test]
    fn forced_theta_matches_squared_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let thetas: Vec<u8> = (0..500).map(|_| rng.random_range(0..2)).collect();
        let a = 0.97;
        let traj = iterate_random_theta([0.6, 0.8], thetas.iter().copied(), a).unwrap();
        let mut x1 = 0.36;
        for (t, sq) in thetas.iter().zip(&traj) {
            x1 = a * a * x1 + (1.0 - a * a) * (*t as f64);
            assert!((sq[0] - x1).abs() < 1e-12);
            assert!((sq[0] + sq[1] - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn every_candidate_preserves_norm(
            seed in any::<u64>(), dim in 1usize..=4, alpha in 0.01f64..0.9999,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let st = UnitVectorState::random(dim, alpha, &mut rng).unwrap();
            for r in st.rules() {
                let n = st.candidate(r).iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!((n - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn chosen_rule_is_optimal_and_scale_free(
            seed in any::<u64>(), dim in 2usize..=4, scale in 0.01f64..100.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let st = UnitVectorState::random(dim, 0.99, &mut rng).unwrap();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = st.choose(&y).unwrap();
            let cost = -st.candidate(c).iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            prop_assert!(cost <= brute_force_best(&st, &y) + 1e-12);
            let ys: Vec<f64> = y.iter().map(|v| v * scale).collect();
            prop_assert_eq!(st.choose(&ys).unwrap(), c);
        }

        #[test]
        fn circle_reduces_to_hypersphere(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = UnitVectorState::random(2, 0.95, &mut rng).unwrap();
            let mut b = a.clone();
            for _ in 0..50 {
                let y = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let (theta, s) = a.step_circle(y).unwrap();
                let c = b.step(&y).unwrap();
                prop_assert_eq!(theta, c.theta());
                prop_assert_eq!(s, c.sign);
                prop_assert_eq!(a.x(), b.x());
            }
        }
    }
}
