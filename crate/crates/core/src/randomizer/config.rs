use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::scene::{parse_mesh_file, Camera, HandModel, JointLimits, Rgb, Tessellation, Vec3};

/// Closed real interval, written `[lo, hi]` in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    fn check(&self, what: &str) -> Result<(), ConfigError> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi {
            Ok(())
        } else {
            Err(ConfigError::Invalid(format!("{what}: empty range [{}, {}]", self.lo, self.hi)))
        }
    }
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Closed integer interval, written `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct CountRange {
    pub lo: u32,
    pub hi: u32,
}

impl CountRange {
    pub const fn new(lo: u32, hi: u32) -> Self {
        CountRange { lo, hi }
    }
}

impl From<[u32; 2]> for CountRange {
    fn from([lo, hi]: [u32; 2]) -> Self {
        CountRange { lo, hi }
    }
}

impl From<CountRange> for [u32; 2] {
    fn from(c: CountRange) -> Self {
        [c.lo, c.hi]
    }
}

/// Where the hand appears and how the forearm is oriented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmConfig {
    /// View depth of the hand centroid, meters.
    pub depth: Interval,
    /// Image-plane offset of the hand centroid as a fraction of the half
    /// width/height (0 = image center).
    pub lateral: Interval,
    /// Nominal wrist-to-elbow direction in the camera frame.
    pub forearm_direction: Vec3,
    /// Half-angle of the cone of forearm directions around the nominal one.
    pub forearm_cone: f64,
    /// Roll of the wrist frame about the forearm axis, degrees.
    pub roll: Interval,
}

impl Default for ArmConfig {
    fn default() -> Self {
        ArmConfig {
            depth: Interval::new(0.35, 0.55),
            lateral: Interval::new(-0.5, 0.5),
            forearm_direction: Vec3::new(0.25, -0.55, 0.8),
            forearm_cone: 55.0,
            roll: Interval::new(-180.0, 180.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistractorConfig {
    pub count: CountRange,
    /// Size of each semi-axis / extent, meters.
    pub size: Interval,
    /// View depth of the shape center, meters.
    pub depth: Interval,
    /// Image-plane placement as a fraction of the half width/height.
    pub lateral: Interval,
}

impl Default for DistractorConfig {
    fn default() -> Self {
        DistractorConfig {
            count: CountRange::new(2, 6),
            size: Interval::new(0.015, 0.07),
            depth: Interval::new(0.25, 1.2),
            lateral: Interval::new(-1.0, 1.0),
        }
    }
}

/// Ranges for the Perlin background parameters; each background draws its
/// own values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerlinConfig {
    pub octaves: CountRange,
    /// Lattice cells across the image width for the first octave.
    pub base_frequency: Interval,
    pub persistence: Interval,
}

impl Default for PerlinConfig {
    fn default() -> Self {
        PerlinConfig {
            octaves: CountRange::new(1, 5),
            base_frequency: Interval::new(2.0, 16.0),
            persistence: Interval::new(0.35, 0.7),
        }
    }
}

/// Randomized spotlights, placed on a hemisphere above the hand and aimed at
/// a jittered point near it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightConfig {
    pub distance: Interval,
    /// Elevation above the horizontal plane through the hand, degrees.
    pub elevation: Interval,
    /// Aim-point jitter around the hand, meters.
    pub aim_jitter: f64,
    pub cone_angle: Interval,
    pub intensity: Interval,
    /// Per-channel light color range.
    pub tint: Interval,
}

impl Default for LightConfig {
    fn default() -> Self {
        LightConfig {
            distance: Interval::new(0.5, 1.5),
            elevation: Interval::new(15.0, 80.0),
            aim_jitter: 0.08,
            cone_angle: Interval::new(25.0, 60.0),
            intensity: Interval::new(0.35, 0.9),
            tint: Interval::new(0.8, 1.0),
        }
    }
}

/// Fractions controlling how background variants are mixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingConfig {
    /// Probability that a synthetic background is Perlin rather than solid
    /// (presets C and later).
    pub perlin: f64,
    /// Probability that a background is a real image (preset F).
    pub real: f64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig {
            perlin: 0.5,
            real: 0.5,
        }
    }
}

/// Everything the scene sampler randomizes over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomizationConfig {
    pub camera: Camera,
    pub joint_limits: JointLimits,
    pub arm: ArmConfig,
    pub hand_color: Rgb,
    pub arm_color: Rgb,
    /// Optional OBJ replacing the procedural hand (wrist-frame coordinates).
    pub hand_mesh: Option<PathBuf>,
    pub tessellation: Tessellation,
    pub distractors: DistractorConfig,
    pub perlin: PerlinConfig,
    pub lights: LightConfig,
    /// Directory of 8-bit RGB images used by preset F.
    pub backgrounds_dir: Option<PathBuf>,
    pub mixing: MixingConfig,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        RandomizationConfig {
            camera: Camera::default(),
            joint_limits: JointLimits::default(),
            arm: ArmConfig::default(),
            hand_color: crate::scene::DEFAULT_HAND_COLOR,
            arm_color: crate::scene::DEFAULT_ARM_COLOR,
            hand_mesh: None,
            tessellation: Tessellation::default(),
            distractors: DistractorConfig::default(),
            perlin: PerlinConfig::default(),
            lights: LightConfig::default(),
            backgrounds_dir: None,
            mixing: MixingConfig::default(),
        }
    }
}

impl RandomizationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: RandomizationConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Load a TOML config; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.backgrounds_dir, &mut config.hand_mesh].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.camera
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.joint_limits
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let arm = &self.arm;
        arm.depth.check("arm.depth")?;
        arm.lateral.check("arm.lateral")?;
        arm.roll.check("arm.roll")?;
        if arm.depth.lo <= self.camera.near {
            return Err(ConfigError::Invalid("arm.depth must lie beyond the near plane".into()));
        }
        if !(arm.forearm_direction.is_finite() && arm.forearm_direction.length() > 0.0) {
            return Err(ConfigError::Invalid("arm.forearm_direction must be non-zero".into()));
        }
        if !(0.0..=180.0).contains(&arm.forearm_cone) {
            return Err(ConfigError::Invalid("arm.forearm_cone must be in [0, 180]".into()));
        }
        let d = &self.distractors;
        if d.count.lo > d.count.hi {
            return Err(ConfigError::Invalid("distractors.count: empty range".into()));
        }
        d.size.check("distractors.size")?;
        d.depth.check("distractors.depth")?;
        d.lateral.check("distractors.lateral")?;
        if d.size.lo <= 0.0 {
            return Err(ConfigError::Invalid("distractors.size must be positive".into()));
        }
        let p = &self.perlin;
        if p.octaves.lo == 0 || p.octaves.lo > p.octaves.hi {
            return Err(ConfigError::Invalid("perlin.octaves must be a range of positive counts".into()));
        }
        p.base_frequency.check("perlin.base_frequency")?;
        p.persistence.check("perlin.persistence")?;
        let l = &self.lights;
        l.distance.check("lights.distance")?;
        l.elevation.check("lights.elevation")?;
        l.cone_angle.check("lights.cone_angle")?;
        l.intensity.check("lights.intensity")?;
        l.tint.check("lights.tint")?;
        if l.cone_angle.lo <= 0.0 || l.cone_angle.hi > 90.0 {
            return Err(ConfigError::Invalid("lights.cone_angle must lie in (0, 90]".into()));
        }
        if l.intensity.lo < 0.0 || l.tint.lo < 0.0 || l.tint.hi > 1.0 {
            return Err(ConfigError::Invalid("lights: intensity >= 0 and tint within [0, 1]".into()));
        }
        for (name, f) in [("mixing.perlin", self.mixing.perlin), ("mixing.real", self.mixing.real)] {
            if !(0.0..=1.0).contains(&f) {
                return Err(ConfigError::Invalid(format!("{name} = {f} outside [0, 1]")));
            }
        }
        if !self.hand_color.is_valid() || !self.arm_color.is_valid() {
            return Err(ConfigError::Invalid("hand/arm colors must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// The hand model this config describes.
    pub fn hand_model(&self) -> Result<HandModel, ConfigError> {
        let model = HandModel::procedural(self.tessellation, self.hand_color, self.arm_color)
            .with_limits(self.joint_limits);
        match &self.hand_mesh {
            None => Ok(model),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                let mesh = parse_mesh_file(&text)
                    .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?
                    .with_color(self.hand_color);
                Ok(model.with_hand_mesh(mesh))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_roundtrip_through_toml() {
        let c = RandomizationConfig::default();
        c.validate().unwrap();
        let text = c.to_toml_string();
        assert_eq!(RandomizationConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c = RandomizationConfig::from_toml_str(
            "[distractors]\ncount = [3, 8]\n\n[mixing]\nperlin = 0.25\n",
        )
        .unwrap();
        assert_eq!(c.distractors.count, CountRange::new(3, 8));
        assert_eq!(c.mixing.perlin, 0.25);
        assert_eq!(c.arm, ArmConfig::default());
    }

    #[test]
    fn rejects_bad_ranges_and_unknown_keys() {
        assert!(RandomizationConfig::from_toml_str("[mixing]\nreal = 1.5\n").is_err());
        assert!(RandomizationConfig::from_toml_str("[distractors]\ncount = [5, 2]\n").is_err());
        assert!(RandomizationConfig::from_toml_str("[arm]\ndepth = [0.9, 0.1]\n").is_err());
        assert!(RandomizationConfig::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "backgrounds_dir = \"bg\"\n").unwrap();
        let c = RandomizationConfig::load(&path).unwrap();
        assert_eq!(c.backgrounds_dir.unwrap(), dir.path().join("bg"));
    }
}
