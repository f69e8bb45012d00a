use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ball::SpherePoint;
use super::horoball::{validate_family, Horoball};
use super::mobius::MobiusMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ball,
    Halfspace,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHoroball {
    basepoint: Vec<f64>,
    diameter: f64,
    rank: u32,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    model: Model,
    #[serde(default)]
    horoballs: Vec<RawHoroball>,
    #[serde(default)]
    generators: Vec<Vec<f64>>,
}

/// Horoball family (converted to the ball model) and Möbius generators.
#[derive(Debug, Clone)]
pub struct GeometryConfig {
    pub model: Model,
    pub horoballs: Vec<Horoball>,
    pub generators: Vec<MobiusMap>,
}

impl GeometryConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(s)?;
        let mut horoballs = Vec::with_capacity(raw.horoballs.len());
        for (i, h) in raw.horoballs.iter().enumerate() {
            let hb = match raw.model {
                Model::Ball => SpherePoint::new(h.basepoint.clone())
                    .and_then(|p| Horoball::new(p, h.diameter, h.rank)),
                Model::Halfspace => Horoball::from_halfspace(&h.basepoint, h.diameter, h.rank),
            }
            .map_err(|e| Error::InvalidConfig(format!("horoball {i}: {e}")))?;
            horoballs.push(hb);
        }
        validate_family(&horoballs)?;
        let generators = raw
            .generators
            .iter()
            .map(|g| MobiusMap::from_flat(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model: raw.model,
            horoballs,
            generators,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_ball_model() {
        let cfg = GeometryConfig::from_json_str(
            r#"{"model": "ball",
                "horoballs": [{"basepoint": [1, 0], "diameter": 0.5, "rank": 1},
                              {"basepoint": [-1, 0], "diameter": 0.5, "rank": 1}],
                "generators": [[1, 0, 1, 0, 0, 0, 1, 0]]}"#,
        )
        .unwrap();
        assert_eq!(cfg.horoballs.len(), 2);
        assert!(cfg.generators[0].is_parabolic());
    }

    #[test]
    fn loads_halfspace_model() {
        let cfg = GeometryConfig::from_json_str(
            r#"{"model": "halfspace",
                "horoballs": [{"basepoint": [0, 0], "diameter": 0.5, "rank": 2},
                              {"basepoint": [1, 0], "diameter": 0.5, "rank": 2}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.model, Model::Halfspace);
        assert_eq!(cfg.horoballs[1].rank(), 2);
    }

    #[test]
    fn rejects_overlaps_and_garbage() {
        let overlap = r#"{"model": "halfspace",
            "horoballs": [{"basepoint": [0, 0], "diameter": 1, "rank": 1},
                          {"basepoint": [0.5, 0], "diameter": 1, "rank": 1}]}"#;
        assert!(matches!(
            GeometryConfig::from_json_str(overlap),
            Err(Error::InvalidConfig(_))
        ));
        assert!(GeometryConfig::from_json_str(r#"{"model": "disk"}"#).is_err());
        assert!(
            GeometryConfig::from_json_str(r#"{"model": "ball", "generators": [[1, 0]]}"#).is_err()
        );
        let off_sphere = r#"{"model": "ball", "horoballs": [{"basepoint": [0.5, 0], "diameter": 0.1, "rank": 1}]}"#;
        assert!(GeometryConfig::from_json_str(off_sphere).is_err());
    }
}
