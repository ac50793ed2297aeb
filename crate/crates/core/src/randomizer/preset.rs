use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six cumulative synthetic dataset variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetPreset {
    /// Solid background, hand only.
    #[serde(rename = "A")]
    SolidBgHand,
    /// Adds the forearm.
    #[serde(rename = "B")]
    SolidBgArm,
    /// About half the backgrounds become Perlin noise textures.
    #[serde(rename = "C")]
    PerlinNoise,
    /// Adds distractor objects, including occluders.
    #[serde(rename = "D")]
    DistractorObjects,
    /// Replaces the default light with three randomized spotlights.
    #[serde(rename = "E")]
    LightingEffects,
    /// Some backgrounds are real photographs.
    #[serde(rename = "F")]
    RealBackgrounds,
}

/// Scene features switched on by a preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PresetFeatures {
    pub arm: bool,
    pub perlin: bool,
    pub distractors: bool,
    pub spotlights: bool,
    pub real_backgrounds: bool,
}

impl PresetFeatures {
    /// True when every feature of `other` is also enabled here.
    pub fn contains(&self, other: &PresetFeatures) -> bool {
        (self.arm || !other.arm)
            && (self.perlin || !other.perlin)
            && (self.distractors || !other.distractors)
            && (self.spotlights || !other.spotlights)
            && (self.real_backgrounds || !other.real_backgrounds)
    }
}

impl DatasetPreset {
    pub const ALL: [DatasetPreset; 6] = [
        DatasetPreset::SolidBgHand,
        DatasetPreset::SolidBgArm,
        DatasetPreset::PerlinNoise,
        DatasetPreset::DistractorObjects,
        DatasetPreset::LightingEffects,
        DatasetPreset::RealBackgrounds,
    ];

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn name(self) -> &'static str {
        match self {
            DatasetPreset::SolidBgHand => "SolidBg hand",
            DatasetPreset::SolidBgArm => "SolidBg arm",
            DatasetPreset::PerlinNoise => "Perlin noise",
            DatasetPreset::DistractorObjects => "Distractor objects",
            DatasetPreset::LightingEffects => "Lighting effects",
            DatasetPreset::RealBackgrounds => "Real backgrounds",
        }
    }

    pub fn predecessor(self) -> Option<DatasetPreset> {
        match self as usize {
            0 => None,
            i => Some(DatasetPreset::ALL[i - 1]),
        }
    }

    pub fn features(self) -> PresetFeatures {
        let level = self as u8;
        PresetFeatures {
            arm: level >= DatasetPreset::SolidBgArm as u8,
            perlin: level >= DatasetPreset::PerlinNoise as u8,
            distractors: level >= DatasetPreset::DistractorObjects as u8,
            spotlights: level >= DatasetPreset::LightingEffects as u8,
            real_backgrounds: level >= DatasetPreset::RealBackgrounds as u8,
        }
    }
}

impl fmt::Display for DatasetPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for DatasetPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.len() == 1 {
            let c = t.chars().next().unwrap().to_ascii_uppercase();
            if ('A'..='F').contains(&c) {
                return Ok(DatasetPreset::ALL[(c as u8 - b'A') as usize]);
            }
        }
        DatasetPreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| format!("unknown preset {s:?} (expected A..F)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_cumulative() {
        for p in DatasetPreset::ALL {
            if let Some(prev) = p.predecessor() {
                assert!(p.features().contains(&prev.features()));
                assert_ne!(p.features(), prev.features());
            }
        }
        assert_eq!(DatasetPreset::SolidBgHand.features(), PresetFeatures::default());
    }

    #[test]
    fn parses_letters_and_names() {
        assert_eq!("c".parse::<DatasetPreset>().unwrap(), DatasetPreset::PerlinNoise);
        assert_eq!("Real backgrounds".parse::<DatasetPreset>().unwrap(), DatasetPreset::RealBackgrounds);
        assert!("G".parse::<DatasetPreset>().is_err());
        for p in DatasetPreset::ALL {
            assert_eq!(p.to_string().parse::<DatasetPreset>().unwrap(), p);
        }
    }

    #[test]
    fn serializes_as_letter() {
        assert_eq!(serde_json::to_string(&DatasetPreset::LightingEffects).unwrap(), "\"E\"");
    }
}
