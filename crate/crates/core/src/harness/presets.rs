//! Named configurations reproducing the published figures.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub struct Preset {
    pub name: &'static str,
    /// `figN` identifiers that resolve to this preset.
    pub aliases: &'static [&'static str],
    pub summary: &'static str,
    pub config: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "position-trace",
        aliases: &["fig1"],
        summary: "position machine: y = -0.5 for 1000 events, then 0.5",
        config: "scenario = position-learner\nseed = 1\nevents = 1000\nblocks = 2\ninput = -0.5; 0.5\ntrace = true\n",
    },
    Preset {
        name: "position-random",
        aliases: &[],
        summary: "position machine fed a random sequence of ±0.5",
        config: "scenario = position-learner\nseed = 1\nevents = 2000\nblocks = 1\ninput = -0.5, 0.5\ntrace = true\n",
    },
    Preset {
        name: "three-level",
        aliases: &["fig2"],
        summary: "seven-machine tree over three 5000-event input phases",
        config: "scenario = three-level\nseed = 1\n",
    },
    Preset {
        name: "interval-ratio",
        aliases: &["fig3"],
        summary: "interval machine: fraction of upward steps against y, 100 random inputs",
        config: "scenario = interval-learner\nseed = 1\nevents = 1000\nblocks = 100\nwarmup = 500\n",
    },
    Preset {
        name: "interval-trace",
        aliases: &[],
        summary: "interval machine trajectory for y = -0.25 from x = 0",
        config: "scenario = interval-learner\nseed = 1\nevents = 1000\nblocks = 1\ninput = -0.25\ntrace = true\n",
    },
    Preset {
        name: "classifier",
        aliases: &["fig4"],
        summary: "separatrix learner vs 100-point windowed PCA on the rotating stream",
        config: "scenario = classifier\nseed = 1\nevents = 22000\nwarmup = 2000\nwindow = 100\ngamma = 0.0002\n",
    },
    Preset {
        name: "polarizer",
        aliases: &["fig5"],
        summary: "polarizer, psi = 25 degrees, 100 random orientations of 1000 events",
        config: "scenario = polarizer\nseed = 1\npsi = 25\n",
    },
    Preset {
        name: "polarizer-random",
        aliases: &[],
        summary: "polarizer fed photons of random polarization",
        config: "scenario = polarizer\nseed = 1\npsi = random\n",
    },
    Preset {
        name: "circle-ratio",
        aliases: &["fig6"],
        summary: "circle machine: frequency of Θ = 1 against the input angle",
        config: "scenario = circle-learner\nseed = 1\nevents = 1000\nblocks = 100\nwarmup = 500\n",
    },
    Preset {
        name: "circle-trace",
        aliases: &[],
        summary: "circle machine trajectory for a fixed input at 30 degrees",
        config: "scenario = circle-learner\nseed = 1\nevents = 200\nblocks = 1\nwarmup = 0\nphi = 30\ntrace = true\n",
    },
    Preset {
        name: "three-polarizers",
        aliases: &[],
        summary: "cascade of three polarizers, random orientation of the last two per block",
        config: "scenario = three-polarizers\nseed = 1\n",
    },
    Preset {
        name: "beam-splitter",
        aliases: &["fig7"],
        summary: "beam splitter, p0 = 0.5, random input phases per 10000-event block",
        config: "scenario = beam-splitter\nseed = 1\np0 = 0.5\n",
    },
    Preset {
        name: "mach-zehnder",
        aliases: &["fig8"],
        summary: "Mach-Zehnder sweep of phi0 in 10 degree steps for four values of phi1",
        config: "scenario = mach-zehnder\nseed = 1\nphi1 = 0, 30, 240, 300\n",
    },
    Preset {
        name: "chained-mz",
        aliases: &["fig9", "fig10"],
        summary: "two chained interferometers, seven random parameters per 10000 events",
        config: "scenario = chained-mz\nseed = 1\n",
    },
    Preset {
        name: "chained-mz-fine",
        aliases: &["fig11", "fig12"],
        summary: "as chained-mz with alpha = 0.9999 and 10^6 events per block (slow)",
        config: "scenario = chained-mz\nseed = 1\nalpha = 0.9999\nevents = 1000000\n",
    },
    Preset {
        name: "slm-mach-zehnder",
        aliases: &["fig13"],
        summary: "the Mach-Zehnder sweep with stochastic beam-splitter outputs",
        config: "scenario = mach-zehnder\nseed = 1\nphi1 = 0, 30, 240, 300\nbackend = slm\n",
    },
];

/// Looks a preset up by name or figure alias (case-insensitive).
pub fn find_preset(id: &str) -> Result<&'static Preset> {
    let id = id.trim().to_ascii_lowercase();
    PRESETS
        .iter()
        .find(|p| p.name == id || p.aliases.contains(&id.as_str()))
        .ok_or_else(|| Error::Config(format!("unknown figure or preset `{id}`")))
}

impl Preset {
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            p.experiment().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn figure_aliases_cover_the_reproducible_figures() {
        for n in [1, 3, 5, 6, 7, 8, 9, 10, 11, 12, 13] {
            assert!(find_preset(&format!("fig{n}")).is_ok(), "fig{n}");
        }
        assert_eq!(find_preset("FIG5").unwrap().name, "polarizer");
        assert!(find_preset("fig99").is_err());
    }

    #[test]
    fn names_and_aliases_are_unique() {
        let mut all: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        all.extend(PRESETS.iter().flat_map(|p| p.aliases.iter().copied()));
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
    }
}
