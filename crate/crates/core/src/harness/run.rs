//! Block-wise experiment orchestration.
//!
//! All randomness derives from the master seed through four independent
//! ChaCha streams: initial machine states, the event source, per-block
//! parameter sampling, and the stochastic back-ends. Parameters are drawn
//! from their stream whether or not they are fixed in the configuration, so
//! changing one setting (or the back-end) never shifts the others.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Angle, ExperimentConfig, InputSpec, Scenario};
use super::table::ResultTable;
use crate::classifier::{
    generate_rotating_gaussians, step_segment, windowed_agreement, SegmentState,
};
use crate::error::{Error, Result};
use crate::network::{Network, TallyCounters};
use crate::optics::{
    build_beam_splitter, build_chained_mz, build_mach_zehnder, build_polarizer,
    build_three_polarizers, BeamSplitterNode, DeviceConfig, InterferometerHandles,
};
use crate::oracle::{
    bs_amplitudes, chained_mz_amplitudes, malus_intensity, mz_amplitudes, Amplitudes,
};
use crate::scalar::{
    build_three_level_classifier, closed_form_position, step_interval, step_position,
    three_level_expected, IntervalState, PositionState,
};
use crate::source::{FixedAngle, RandomAngle, ScalarChoice, TwoPort};
use crate::vector::{AuditStats, UnitVectorState};

/// Checks gathered while running; see [`run_scenario_full`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Events processed, warm-up included.
    pub events: u64,
    /// Blocks whose sink (or per-stage tap) totals did not equal the number of events fed.
    pub conservation_violations: u64,
    /// Merged per-event audit of every vector machine (only with `audit = true`).
    pub audit: AuditStats,
    /// Beam-splitter events that fell back to re-emitting a previous message.
    pub fallbacks: u64,
    /// Largest `|‖d‖ − 1|` of the separatrix direction.
    pub max_direction_error: f64,
    /// Largest `|x|` reached by any scalar machine.
    pub max_scalar_magnitude: f64,
}

/// Table plus diagnostics of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ResultTable,
    pub diagnostics: Diagnostics,
}

/// Runs `cfg` and returns its result table.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ResultTable> {
    Ok(run_scenario_full(cfg)?.table)
}

/// The four generators derived from a master seed.
pub struct Streams {
    pub init: ChaCha8Rng,
    pub source: ChaCha8Rng,
    pub params: ChaCha8Rng,
    pub slm_seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let stream = |k| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Streams {
            init: stream(0),
            source: stream(1),
            params: stream(2),
            slm_seed: stream(3).next_u64(),
        }
    }
}

/// Resolves an angle setting, always consuming one draw.
fn draw(a: Angle, rng: &mut ChaCha8Rng) -> f64 {
    let r = rng.random::<f64>() * TAU;
    match a {
        Angle::Fixed(v) => v,
        Angle::Random => r,
    }
}

/// `p0`, or a uniform draw when unset; always consumes one draw.
fn draw_p0(p0: f64, rng: &mut ChaCha8Rng) -> f64 {
    let r = rng.random::<f64>();
    if p0.is_nan() {
        r
    } else {
        p0
    }
}

fn deg(x: f64) -> f64 {
    x.to_degrees()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn run_scenario_full(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let network_scenario = !matches!(
        cfg.scenario,
        Scenario::PositionLearner
            | Scenario::IntervalLearner
            | Scenario::CircleLearner
            | Scenario::Classifier
    );
    if cfg.trace && network_scenario {
        return Err(Error::Config(format!(
            "per-event traces are not available for `{}`",
            cfg.scenario
        )));
    }
    let mut ctx = Ctx {
        cfg,
        s: Streams::new(cfg.seed),
        diag: Diagnostics::default(),
    };
    let table = match cfg.scenario {
        Scenario::PositionLearner => ctx.position()?,
        Scenario::IntervalLearner => ctx.interval()?,
        Scenario::ThreeLevel => ctx.three_level()?,
        Scenario::CircleLearner => ctx.circle()?,
        Scenario::Classifier => ctx.classifier()?,
        Scenario::Polarizer => ctx.polarizer()?,
        Scenario::ThreePolarizers => ctx.three_polarizers()?,
        Scenario::BeamSplitter => ctx.beam_splitter()?,
        Scenario::MachZehnder => ctx.mach_zehnder()?,
        Scenario::ChainedMz => ctx.chained_mz()?,
    };
    Ok(RunOutput {
        table,
        diagnostics: ctx.diag,
    })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    s: Streams,
    diag: Diagnostics,
}

impl Ctx<'_> {
    fn device(&self) -> DeviceConfig {
        DeviceConfig::new(self.cfg.alpha).with_backend(self.cfg.backend, self.s.slm_seed)
    }

    /// Values of input phase `block`, or `None` for random input.
    fn phase(&self, block: u64) -> Option<&[f64]> {
        match &self.cfg.input {
            InputSpec::Random => None,
            InputSpec::Phases(p) => Some(&p[block as usize % p.len()]),
        }
    }

    fn scalar_input(&mut self, set: Option<&[f64]>, open: bool) -> f64 {
        match set {
            Some(v) => v[self.s.source.random_range(0..v.len())],
            None => loop {
                let y = 2.0 * self.s.source.random::<f64>() - 1.0;
                if !open || y.abs() < 1.0 {
                    break y;
                }
            },
        }
    }

    fn run_blocks(
        &mut self,
        net: &mut Network,
        src: &mut dyn crate::network::EventSource,
    ) -> Result<TallyCounters> {
        let t = net.run_experiment(src, self.cfg.events, self.cfg.warmup)?;
        self.diag.events += self.cfg.events;
        if t.total_processed() != self.cfg.events {
            self.diag.conservation_violations += 1;
        }
        Ok(t)
    }

    fn finish_network(&mut self, net: &Network) {
        self.diag.audit.merge(&net.audit());
        for id in 0..net.node_count() {
            if let Some(bs) = net.node_as::<BeamSplitterNode>(crate::network::NodeId(id)) {
                self.diag.fallbacks += bs.fallbacks();
            }
        }
    }

    fn position(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let mut st = PositionState::new(0.0, cfg.alpha)?;
        let mut history = Vec::new();
        let mut table = if cfg.trace {
            ResultTable::new(&["event", "y", "x", "delta"])
        } else {
            ResultTable::new(&["block", "input_mean", "x", "closed_form", "abs_diff"])
        };
        for block in 0..cfg.blocks {
            let set = self.phase(block).map(<[f64]>::to_vec);
            for _ in 0..cfg.events {
                let y = self.scalar_input(set.as_deref(), false);
                let (delta, next) = step_position(st, y)?;
                st = next;
                history.push(y);
                self.diag.events += 1;
                self.diag.max_scalar_magnitude = self.diag.max_scalar_magnitude.max(st.x.abs());
                if cfg.trace {
                    table.push(&[history.len() as f64, y, st.x, f64::from(delta)])?;
                }
            }
            if !cfg.trace {
                let exact = closed_form_position(0.0, &history, cfg.alpha);
                let m = set.as_deref().map_or(0.0, mean);
                table.push(&[block as f64, m, st.x, exact, (st.x - exact).abs()])?;
            }
        }
        Ok(table)
    }

    fn interval(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let mut table = if cfg.trace {
            ResultTable::new(&["block", "event", "y", "x", "delta"])
        } else {
            ResultTable::new(&["block", "y", "frac_up", "oracle", "abs_diff"])
        };
        for block in 0..cfg.blocks {
            // a fresh machine per block, as for every point of the frequency curve
            let mut st = IntervalState::new(0.0, cfg.alpha)?;
            let drawn = loop {
                let y = 2.0 * self.s.params.random::<f64>() - 1.0;
                if y.abs() < 1.0 {
                    break y;
                }
            };
            let set: Vec<f64> = self.phase(block).map_or(vec![drawn], <[f64]>::to_vec);
            let target = mean(&set);
            let mut up = 0u64;
            for k in 0..cfg.events {
                let y = self.scalar_input(Some(&set), true);
                let (delta, next) = step_interval(st, y)?;
                st = next;
                self.diag.events += 1;
                self.diag.max_scalar_magnitude = self.diag.max_scalar_magnitude.max(st.x.abs());
                if k >= cfg.warmup && delta > 0 {
                    up += 1;
                }
                if cfg.trace {
                    table.push(&[block as f64, k as f64, y, st.x, f64::from(delta)])?;
                }
            }
            if !cfg.trace {
                let frac = up as f64 / (cfg.events - cfg.warmup) as f64;
                let oracle = 0.5 * (1.0 + target);
                table.push(&[block as f64, target, frac, oracle, (frac - oracle).abs()])?;
            }
        }
        Ok(table)
    }

    fn three_level(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let (mut net, tree) = build_three_level_classifier(cfg.alpha)?;
        let mut table = ResultTable::new(&["block", "machine", "learned", "expected", "abs_diff"]);
        let mut src = ScalarChoice::new(&[0.0], self.s.source.clone())?;
        for block in 0..cfg.blocks {
            let set: Vec<f64> = match self.phase(block) {
                Some(v) => v.to_vec(),
                None => (0..4)
                    .map(|_| 2.0 * self.s.params.random::<f64>() - 1.0)
                    .collect(),
            };
            src.set_values(&set)?;
            net.reset_tally();
            // learned value: time average of the internal variable over the
            // second half of the phase, where it oscillates about its target
            let half = cfg.events / 2;
            let mut sums = [0.0; 7];
            for k in 0..cfg.events {
                let (entry, msg) = crate::network::EventSource::next_event(&mut src);
                net.process_event(entry, msg)?;
                let v = tree.values(&net);
                if k >= half {
                    for (s, x) in sums.iter_mut().zip(v) {
                        *s += x;
                    }
                }
                for x in v {
                    self.diag.max_scalar_magnitude = self.diag.max_scalar_magnitude.max(x.abs());
                }
            }
            self.diag.events += cfg.events;
            if net.tally().total_processed() != cfg.events {
                self.diag.conservation_violations += 1;
            }
            let expected = three_level_expected(&set);
            for m in 0..7 {
                let learned = sums[m] / (cfg.events - half) as f64;
                let e = expected[m];
                table.push(&[
                    block as f64,
                    (m + 1) as f64,
                    learned,
                    e,
                    (learned - e).abs(),
                ])?;
            }
        }
        Ok(table)
    }

    fn circle(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let mut table = if cfg.trace {
            ResultTable::new(&["block", "event", "theta", "sign", "x_angle"])
        } else {
            ResultTable::new(&["block", "phi", "frac_theta1", "oracle", "abs_diff", "ratio"])
        };
        for block in 0..cfg.blocks {
            let phi = draw(cfg.phi, &mut self.s.params);
            let mut st = UnitVectorState::random(2, cfg.alpha, &mut self.s.init)?;
            st.set_audit(cfg.audit);
            let y = [phi.cos(), phi.sin()];
            let mut counts = [0u64; 2];
            for k in 0..cfg.events {
                let (theta, sign) = st.step_circle(y)?;
                self.diag.events += 1;
                if k >= cfg.warmup {
                    counts[usize::from(theta)] += 1;
                }
                if cfg.trace {
                    let x = st.x();
                    table.push(&[
                        block as f64,
                        k as f64,
                        f64::from(theta),
                        sign.value(),
                        deg(x[1].atan2(x[0])),
                    ])?;
                }
            }
            if let Some(a) = st.audit() {
                self.diag.audit.merge(&a);
            }
            if !cfg.trace {
                let frac = counts[1] as f64 / (counts[0] + counts[1]) as f64;
                let oracle = phi.cos().powi(2);
                let ratio = counts[0] as f64 / counts[1] as f64;
                table.push(&[
                    block as f64,
                    deg(phi),
                    frac,
                    oracle,
                    (frac - oracle).abs(),
                    ratio,
                ])?;
            }
        }
        Ok(table)
    }

    fn classifier(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let mut st = SegmentState::new([0.0, 0.0], cfg.alpha)?.with_rule(cfg.update);
        let points: Vec<[f64; 2]> = (0..cfg.events)
            .map(|n| generate_rotating_gaussians(cfg.gamma, n, &mut self.s.source))
            .collect();
        self.diag.events += cfg.events;
        let check = |st: &SegmentState, d: &mut Diagnostics| {
            let norm = st.dir[0].hypot(st.dir[1]);
            d.max_direction_error = d.max_direction_error.max((norm - 1.0).abs());
        };
        if cfg.trace {
            let mut table =
                ResultTable::new(&["event", "y0", "y1", "side", "mid0", "mid1", "dir0", "dir1"]);
            for (n, &y) in points.iter().enumerate() {
                let (side, next) = step_segment(st, y)?;
                st = next;
                check(&st, &mut self.diag);
                table.push(&[
                    n as f64,
                    y[0],
                    y[1],
                    f64::from(side),
                    st.mid[0],
                    st.mid[1],
                    st.dir[0],
                    st.dir[1],
                ])?;
            }
            return Ok(table);
        }
        let warm = cfg.warmup as usize;
        for &y in &points[..warm] {
            st = step_segment(st, y)?.1;
            check(&st, &mut self.diag);
        }
        let window = cfg.window as usize;
        let report = windowed_agreement(&mut st, &points[warm..], window)?;
        check(&st, &mut self.diag);
        let mut table =
            ResultTable::new(&["window", "event", "dlm_angle", "pca_angle", "angle_diff"]);
        for (w, (dir, sep, diff)) in report.windows.iter().enumerate() {
            let line = |v: &[f64; 2]| deg(v[1].atan2(v[0])).rem_euclid(180.0);
            table.push(&[
                w as f64,
                (warm + (w + 1) * window) as f64,
                line(dir),
                line(sep),
                deg(*diff),
            ])?;
        }
        Ok(table)
    }

    fn polarizer(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let (mut net, h) = build_polarizer(0.0, cfg.alpha, &mut self.s.init)?;
        net.set_audit(cfg.audit);
        let mut table = ResultTable::new(&[
            "block",
            "phi",
            "psi",
            "frac0",
            "frac1",
            "oracle_I0",
            "abs_diff",
        ]);
        let mut random = RandomAngle {
            rng: self.s.source.clone(),
        };
        for block in 0..cfg.blocks {
            let phi = draw(cfg.phi, &mut self.s.params);
            h.polarizer.set_phi(&mut net, phi);
            // a fixed ψ polarizes every photon alike; `random` draws ψ per photon
            let (t, psi, oracle) = match cfg.psi {
                Angle::Fixed(psi) => {
                    let t = self.run_blocks(&mut net, &mut FixedAngle::new(psi))?;
                    (t, deg(psi), malus_intensity(psi, phi).0)
                }
                Angle::Random => (self.run_blocks(&mut net, &mut random)?, f64::NAN, 0.5),
            };
            let f0 = t.sink_fraction(h.sinks[0], &h.sinks);
            let f1 = t.sink_fraction(h.sinks[1], &h.sinks);
            table.push(&[
                block as f64,
                deg(phi),
                psi,
                f0,
                f1,
                oracle,
                (f0 - oracle).abs(),
            ])?;
        }
        self.finish_network(&net);
        Ok(table)
    }

    fn three_polarizers(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let (mut net, h) = build_three_polarizers(0.0, 0.0, cfg.alpha, &mut self.s.init)?;
        net.set_audit(cfg.audit);
        let mut table = ResultTable::new(&[
            "block",
            "phi2",
            "phi3",
            "frac0",
            "frac1",
            "frac2",
            "frac3",
            "oracle0",
            "oracle1",
            "oracle2",
            "oracle3",
            "max_abs_diff",
        ]);
        let mut random = RandomAngle {
            rng: self.s.source.clone(),
        };
        for block in 0..cfg.blocks {
            // polarizers 2 and 3 share one random orientation unless set individually
            let shared = draw(cfg.phi, &mut self.s.params);
            let own2 = draw(cfg.phi2, &mut self.s.params);
            let own3 = draw(cfg.phi3, &mut self.s.params);
            let phi2 = if cfg.phi2 == Angle::Random {
                shared
            } else {
                own2
            };
            let phi3 = if cfg.phi3 == Angle::Random {
                shared
            } else {
                own3
            };
            h.second.set_phi(&mut net, phi2);
            h.third.set_phi(&mut net, phi3);
            let (t, first) = match cfg.psi {
                Angle::Fixed(psi) => (
                    self.run_blocks(&mut net, &mut FixedAngle::new(psi))?,
                    malus_intensity(psi, 0.0),
                ),
                Angle::Random => (self.run_blocks(&mut net, &mut random)?, (0.5, 0.5)),
            };
            let frac: Vec<f64> = h
                .sinks
                .iter()
                .map(|&s| t.sink_fraction(s, &h.sinks))
                .collect();
            let (c2, s2) = malus_intensity(0.0, phi2);
            let (c3, s3) = malus_intensity(std::f64::consts::FRAC_PI_2, phi3);
            let oracle = [first.0 * c2, first.0 * s2, first.1 * c3, first.1 * s3];
            let worst = frac
                .iter()
                .zip(&oracle)
                .map(|(f, o)| (f - o).abs())
                .fold(0.0, f64::max);
            let mut row = vec![block as f64, deg(phi2), deg(phi3)];
            row.extend(&frac);
            row.extend(oracle);
            row.push(worst);
            table.push(&row)?;
        }
        self.finish_network(&net);
        Ok(table)
    }

    fn beam_splitter(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let dev = self.device();
        let (mut net, h) = build_beam_splitter(&dev, &mut self.s.init)?;
        net.set_audit(cfg.audit);
        let mut src = TwoPort::new(1.0, 0.0, 0.0, self.s.source.clone())?;
        let mut table = ResultTable::new(&[
            "block",
            "p0",
            "psi0",
            "psi1",
            "frac0",
            "frac1",
            "oracle_b0sq",
            "abs_diff",
        ]);
        for block in 0..cfg.blocks {
            let p0 = draw_p0(cfg.p0, &mut self.s.params);
            let psi0 = draw(cfg.psi0, &mut self.s.params);
            let psi1 = draw(cfg.psi1, &mut self.s.params);
            src.set(p0, psi0, psi1)?;
            let t = self.run_blocks(&mut net, &mut src)?;
            let f0 = t.sink_fraction(h.sinks[0], &h.sinks);
            let f1 = t.sink_fraction(h.sinks[1], &h.sinks);
            let oracle = bs_amplitudes(Amplitudes::two_port(p0, psi0, psi1)).probabilities()[0];
            table.push(&[
                block as f64,
                p0,
                deg(psi0),
                deg(psi1),
                f0,
                f1,
                oracle,
                (f0 - oracle).abs(),
            ])?;
        }
        self.finish_network(&net);
        Ok(table)
    }

    /// Every stage of an interferometer sees every event once.
    fn check_stages(&mut self, t: &TallyCounters, h: &InterferometerHandles) {
        for pair in h.taps.chunks(2) {
            let seen: u64 = pair
                .iter()
                .map(|tap| t.taps[tap.0] + t.tap_discarded[tap.0])
                .sum();
            if seen != self.cfg.events {
                self.diag.conservation_violations += 1;
            }
        }
    }

    fn mach_zehnder(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let dev = self.device();
        let mut table = ResultTable::new(&[
            "block",
            "phi0",
            "phi1",
            "psi0",
            "N0_frac",
            "N2_frac",
            "N3_frac",
            "oracle_N2",
            "oracle_N3",
            "abs_diff",
        ]);
        // one input setting for the whole run
        let p0 = draw_p0(cfg.p0, &mut self.s.params);
        let psi0 = draw(cfg.psi0, &mut self.s.params);
        let psi1 = draw(cfg.psi1, &mut self.s.params);
        let start = draw(cfg.phi0, &mut self.s.params);
        let mut src = TwoPort::new(p0, psi0, psi1, self.s.source.clone())?;
        let mut row_index = 0u64;
        for &phi1_setting in &cfg.phi1 {
            let phi1 = draw(phi1_setting, &mut self.s.params);
            let (mut net, h) = build_mach_zehnder(start, phi1, &dev, &mut self.s.init)?;
            net.set_audit(cfg.audit);
            for block in 0..cfg.blocks {
                let phi0 = start + block as f64 * cfg.phi_step;
                h.set_phases(&mut net, &[phi0, phi1]);
                let t = self.run_blocks(&mut net, &mut src)?;
                self.check_stages(&t, &h);
                let n0 = t.tap_fraction(h.taps[0], &h.taps);
                let n2 = t.sink_fraction(h.sinks[0], &h.sinks);
                let n3 = t.sink_fraction(h.sinks[1], &h.sinks);
                let [o2, o3] =
                    mz_amplitudes(Amplitudes::two_port(p0, psi0, psi1), phi0, phi1).probabilities();
                let diff = (n2 - o2).abs().max((n3 - o3).abs());
                table.push(&[
                    row_index as f64,
                    deg(phi0),
                    deg(phi1),
                    deg(psi0),
                    n0,
                    n2,
                    n3,
                    o2,
                    o3,
                    diff,
                ])?;
                row_index += 1;
            }
            self.finish_network(&net);
        }
        Ok(table)
    }

    fn chained_mz(&mut self) -> Result<ResultTable> {
        let cfg = self.cfg;
        let dev = self.device();
        let (mut net, h) = build_chained_mz([0.0; 4], &dev, &mut self.s.init)?;
        net.set_audit(cfg.audit);
        let mut src = TwoPort::new(1.0, 0.0, 0.0, self.s.source.clone())?;
        let mut table = ResultTable::new(&[
            "block",
            "p0",
            "psi0",
            "psi1",
            "phi0",
            "phi1",
            "phi2",
            "phi3",
            "N4_frac",
            "oracle_b0sq",
            "abs_diff",
        ]);
        let extra = &cfg.phi1;
        for block in 0..cfg.blocks {
            let p0 = draw_p0(cfg.p0, &mut self.s.params);
            let psi0 = draw(cfg.psi0, &mut self.s.params);
            let psi1 = draw(cfg.psi1, &mut self.s.params);
            let phi = [
                draw(cfg.phi0, &mut self.s.params),
                draw(extra[0], &mut self.s.params),
                draw(cfg.phi2, &mut self.s.params),
                draw(cfg.phi3, &mut self.s.params),
            ];
            h.set_phases(&mut net, &phi);
            src.set(p0, psi0, psi1)?;
            let t = self.run_blocks(&mut net, &mut src)?;
            self.check_stages(&t, &h);
            let n4 = t.sink_fraction(h.sinks[0], &h.sinks);
            let oracle =
                chained_mz_amplitudes(Amplitudes::two_port(p0, psi0, psi1), phi).probabilities()[0];
            table.push(&[
                block as f64,
                p0,
                deg(psi0),
                deg(psi1),
                deg(phi[0]),
                deg(phi[1]),
                deg(phi[2]),
                deg(phi[3]),
                n4,
                oracle,
                (n4 - oracle).abs(),
            ])?;
        }
        self.finish_network(&net);
        Ok(table)
    }
}
