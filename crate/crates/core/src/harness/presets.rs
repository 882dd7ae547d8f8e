//! Named processes used by configs and the acceptance runs.

use crate::error::{LevyError, Result};
use crate::model::{Family, JumpLaw, ProcessSpec};

/// Every preset name, in the order `levyfluct` lists them.
pub const PRESETS: [&str; 11] = [
    "symmetric-stable-1.5",
    "brownian",
    "stable-1.5-skewed",
    "spectrally-positive-stable-1.5",
    "spectrally-negative-stable-1.5",
    "stable-0.8",
    "cgmy",
    "symmetric-cgmy",
    "brownian-exp-jumps",
    "closing-example",
    "closing-example-symmetric",
];

fn stable(alpha: f64, beta: f64) -> Family {
    Family::Stable { alpha, beta, scale: 1.0 }
}

/// The family behind a preset name.
pub fn preset_family(name: &str) -> Result<Family> {
    Ok(match name {
        "symmetric-stable-1.5" => stable(1.5, 0.0),
        "brownian" => Family::brownian(),
        "stable-1.5-skewed" => stable(1.5, 0.5),
        "spectrally-positive-stable-1.5" => stable(1.5, 1.0),
        "spectrally-negative-stable-1.5" => stable(1.5, -1.0),
        "stable-0.8" => stable(0.8, 0.0),
        "cgmy" => Family::Cgmy {
            c_pos: 1.0,
            c_neg: 1.0,
            g: 2.0,
            m: 3.0,
            y_pos: 1.4,
            y_neg: 1.4,
            mean: 0.0,
        },
        "symmetric-cgmy" => Family::cgmy(1.0, 2.0, 2.0, 1.4),
        "brownian-exp-jumps" => Family::BrownianJumps {
            sigma: 1.0,
            rate: 1.0,
            jumps: JumpLaw::Exponential { mean: 1.0 },
            mean: 0.0,
        },
        // light, slowly active upward jumps against heavy downward ones
        "closing-example" => Family::Cgmy {
            c_pos: 1.0,
            c_neg: 1.0,
            g: 1.0,
            m: 3.0,
            y_pos: 0.5,
            y_neg: 1.4,
            mean: 0.0,
        },
        "closing-example-symmetric" => Family::cgmy(1.0, 1.0, 1.0, 1.4),
        _ => {
            return Err(LevyError::Config(format!(
                "unknown preset '{name}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    })
}

pub fn preset(name: &str) -> Result<ProcessSpec> {
    Ok(ProcessSpec::new(preset_family(name)?)?.with_label(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for name in PRESETS {
            let s = preset(name).unwrap();
            assert_eq!(s.label, name);
        }
        assert!(matches!(preset("nope"), Err(LevyError::Config(_))));
    }

    #[test]
    fn acceptance_presets_have_zero_mean() {
        for name in ["symmetric-stable-1.5", "stable-1.5-skewed", "cgmy", "brownian-exp-jumps", "closing-example"] {
            assert!(preset(name).unwrap().is_zero_mean(1e-9), "{name}");
        }
        assert!(preset("stable-0.8").unwrap().mean_x1().is_none());
    }
}
