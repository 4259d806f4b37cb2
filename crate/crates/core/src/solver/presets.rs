use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitting::TorParameters;

/// Relaxation methods obtained from TOR by fixing `alpha` and `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodFamily {
    Tor,
    Aor,
    Sor,
    Gs,
    Jor,
    Jacobi,
}

impl fmt::Display for MethodFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodFamily::Tor => "tor",
            MethodFamily::Aor => "aor",
            MethodFamily::Sor => "sor",
            MethodFamily::Gs => "gs",
            MethodFamily::Jor => "jor",
            MethodFamily::Jacobi => "jacobi",
        })
    }
}

impl FromStr for MethodFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "tor" => MethodFamily::Tor,
            "aor" => MethodFamily::Aor,
            "sor" => MethodFamily::Sor,
            "gs" | "gauss-seidel" => MethodFamily::Gs,
            "jor" => MethodFamily::Jor,
            "jacobi" => MethodFamily::Jacobi,
            _ => {
                return Err(Error::Parameter(format!(
                    "unknown family '{s}' (expected tor, aor, sor, gs, jor or jacobi)"
                )))
            }
        })
    }
}

fn require(value: Option<f64>, name: &str, family: MethodFamily) -> Result<f64> {
    value.ok_or_else(|| Error::Parameter(format!("{family} needs --{name}")))
}

/// Uniform parameters for a method family.
///
/// | family | alpha  | beta        |
/// |--------|--------|-------------|
/// | AOR    | `2r`   | `2w - 2r`   |
/// | SOR    | `2w`   | `0`         |
/// | GS     | `2`    | `0`         |
/// | JOR    | `0`    | `2w`        |
/// | Jacobi | `0`    | `2`         |
///
/// TOR has no preset; its `alpha` and `beta` are given directly.
pub fn preset_parameters(
    family: MethodFamily,
    r: Option<f64>,
    w: Option<f64>,
) -> Result<TorParameters> {
    let (alpha, beta) = match family {
        MethodFamily::Tor => {
            return Err(Error::Parameter(
                "tor takes explicit alpha and beta rather than a preset".into(),
            ))
        }
        MethodFamily::Aor => {
            let r = require(r, "r", family)?;
            let w = require(w, "w", family)?;
            if r > w {
                return Err(Error::Parameter(format!(
                    "aor with r = {r} > w = {w} gives beta = 2w - 2r < 0"
                )));
            }
            (2.0 * r, 2.0 * w - 2.0 * r)
        }
        MethodFamily::Sor => (2.0 * require(w, "w", family)?, 0.0),
        MethodFamily::Gs => (2.0, 0.0),
        MethodFamily::Jor => (0.0, 2.0 * require(w, "w", family)?),
        MethodFamily::Jacobi => (0.0, 2.0),
    };
    TorParameters::uniform(alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(t: TorParameters) -> (f64, f64) {
        t.pair(0)
    }

    #[test]
    fn family_values() {
        assert_eq!(
            pair(preset_parameters(MethodFamily::Gs, None, None).unwrap()),
            (2.0, 0.0)
        );
        assert_eq!(
            pair(preset_parameters(MethodFamily::Jacobi, None, None).unwrap()),
            (0.0, 2.0)
        );
        assert_eq!(
            pair(preset_parameters(MethodFamily::Aor, Some(0.5), Some(1.0)).unwrap()),
            (1.0, 1.0)
        );
        assert_eq!(
            pair(preset_parameters(MethodFamily::Sor, None, Some(0.8)).unwrap()),
            (1.6, 0.0)
        );
        assert_eq!(
            pair(preset_parameters(MethodFamily::Jor, None, Some(0.8)).unwrap()),
            (0.0, 1.6)
        );
    }

    #[test]
    fn missing_or_inadmissible() {
        assert!(preset_parameters(MethodFamily::Aor, Some(0.5), None).is_err());
        assert!(preset_parameters(MethodFamily::Sor, None, None).is_err());
        assert!(preset_parameters(MethodFamily::Aor, Some(1.0), Some(0.5)).is_err());
        assert!(preset_parameters(MethodFamily::Tor, Some(1.0), Some(1.0)).is_err());
        assert!(preset_parameters(MethodFamily::Jor, None, Some(0.0)).is_err());
    }

    #[test]
    fn names() {
        for s in ["tor", "aor", "sor", "gs", "jor", "jacobi"] {
            assert_eq!(s.parse::<MethodFamily>().unwrap().to_string(), s);
        }
        assert!("ssor".parse::<MethodFamily>().is_err());
    }
}
