//! Structured configuration: defaults, TOML loading, validation, and a
//! stable fingerprint that ties reports and replays to the exact
//! settings that produced them.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rot_x, CameraModel};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub camera: CameraConfig,
    pub scene: SceneConfig,
    pub task: TaskConfig,
    pub perception: PerceptionConfig,
    pub spotlight: SpotlightConfig,
    pub control: ControlConfig,
    pub randomization: RandomizationConfig,
    pub stereo: StereoConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            camera: CameraConfig::default(),
            scene: SceneConfig::default(),
            task: TaskConfig::default(),
            perception: PerceptionConfig::default(),
            spotlight: SpotlightConfig::default(),
            control: ControlConfig::default(),
            randomization: RandomizationConfig::default(),
            stereo: StereoConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        self.scene.validate()?;
        self.task.validate()?;
        self.perception.validate()?;
        self.spotlight.validate()?;
        self.control.validate(self.task.h_max)?;
        self.randomization.validate()?;
        self.stereo.validate()?;
        Ok(())
    }

    /// FNV-1a over the canonical TOML serialization.
    pub fn fingerprint(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.as_bytes() {
            hash ^= *b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

/// Camera placement is derived: the optical axis is tilted from the
/// vertical and aimed at the workspace center from a fixed standoff.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub focal_px: f64,
    pub baseline_mm: f64,
    pub pixel_scale: f64,
    pub width_px: u32,
    pub height_px: u32,
    pub tilt_deg: f64,
    pub standoff_mm: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            focal_px: 1000.0,
            baseline_mm: 5.0,
            pixel_scale: 0.25,
            width_px: 600,
            height_px: 600,
            tilt_deg: 20.0,
            standoff_mm: 150.0,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<()> {
        if self.focal_px <= 0.0 || self.baseline_mm <= 0.0 || self.pixel_scale <= 0.0 {
            return Err(Error::Config("camera focal/baseline/pixel_scale must be positive".into()));
        }
        if self.standoff_mm <= 0.0 {
            return Err(Error::Config("camera standoff must be positive".into()));
        }
        Ok(())
    }

    /// Camera looking down at `target_mm`, optical axis tilted
    /// `tilt_deg + extra_tilt` from the vertical, from
    /// `standoff_mm + extra_standoff` away.
    pub fn build(&self, target_mm: Vector3<f64>) -> CameraModel {
        self.build_perturbed(target_mm, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn build_perturbed(
        &self,
        target_mm: Vector3<f64>,
        roll_rad: f64,
        pitch_rad: f64,
        yaw_rad: f64,
        standoff_delta_mm: f64,
    ) -> CameraModel {
        let tilt = std::f64::consts::PI - self.tilt_deg.to_radians();
        // Base orientation: x stays world-x, optical axis tilted about x.
        let base = rot_x(tilt);
        let rotation = base
            * rot_x(roll_rad)
            * crate::geometry::rot_y(pitch_rad)
            * crate::geometry::rot_z(yaw_rad);
        let axis = rotation * Vector3::new(0.0, 0.0, 1.0);
        let standoff = self.standoff_mm + standoff_delta_mm;
        let position = target_mm - axis * standoff;
        CameraModel::new(
            self.focal_px,
            self.baseline_mm,
            self.pixel_scale,
            rotation,
            position,
            self.width_px,
            self.height_px,
        )
        .expect("validated camera config")
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectMix {
    pub needle: f64,
    pub block: f64,
    pub rod: f64,
    pub sphere: f64,
}

impl Default for ObjectMix {
    fn default() -> Self {
        Self { needle: 0.5, block: 0.25, rod: 0.25, sphere: 0.0 }
    }
}

impl ObjectMix {
    pub fn sphere_only() -> Self {
        Self { needle: 0.0, block: 0.0, rod: 0.0, sphere: 1.0 }
    }

    pub fn sum(&self) -> f64 {
        self.needle + self.block + self.rod + self.sphere
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub workspace_min_mm: [f64; 3],
    pub workspace_max_mm: [f64; 3],
    pub delta_xyz_mm: f64,
    pub delta_theta_deg: f64,
    pub object_mix: ObjectMix,
    /// Jaw capture volume in the gripper frame, full extents (x, y, z).
    pub jaw_box_mm: [f64; 3],
    pub gripper_tilt_deg: f64,
    /// Spawn sub-ranges keep episodes solvable: xy margin from the
    /// workspace walls, and z bands for the gripper and the object.
    pub spawn_margin_xy_mm: f64,
    pub spawn_gripper_z_mm: [f64; 2],
    pub spawn_object_z_mm: [f64; 2],
    pub sphere_radius_mm: f64,
    pub surface_points: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            workspace_min_mm: [0.0, 0.0, 0.0],
            workspace_max_mm: [100.0, 100.0, 100.0],
            delta_xyz_mm: 5.0,
            delta_theta_deg: 10.0,
            object_mix: ObjectMix::default(),
            jaw_box_mm: [8.0, 4.0, 10.0],
            gripper_tilt_deg: 45.0,
            spawn_margin_xy_mm: 15.0,
            spawn_gripper_z_mm: [40.0, 80.0],
            spawn_object_z_mm: [5.0, 60.0],
            sphere_radius_mm: 8.0,
            surface_points: 6000,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        for axis in 0..3 {
            if self.workspace_min_mm[axis] >= self.workspace_max_mm[axis] {
                return Err(Error::Config(format!(
                    "degenerate workspace: min {:?} !< max {:?}",
                    self.workspace_min_mm, self.workspace_max_mm
                )));
            }
        }
        if self.delta_xyz_mm <= 0.0 || self.delta_theta_deg <= 0.0 {
            return Err(Error::Config("step magnitudes must be positive".into()));
        }
        let sum = self.object_mix.sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("object mix probabilities sum to {sum}, not 1")));
        }
        if self.jaw_box_mm.iter().any(|&v| v <= 0.0) {
            return Err(Error::Config("jaw box extents must be positive".into()));
        }
        if self.surface_points < 2000 {
            return Err(Error::Config("surface_points must be at least 2000".into()));
        }
        if self.sphere_radius_mm <= 0.0 || self.sphere_radius_mm > 25.0 {
            return Err(Error::Config("sphere radius must be in (0, 25] mm".into()));
        }
        Ok(())
    }

    pub fn workspace_center(&self) -> Vector3<f64> {
        (Vector3::from(self.workspace_min_mm) + Vector3::from(self.workspace_max_mm)) / 2.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub h_max: u32,
    pub gamma: f64,
    pub reward_success: f64,
    pub reward_failure: f64,
    pub reward_abnormal: f64,
    pub reward_normal: f64,
    /// Allow a second jaw closure before the episode terminates.
    pub regrasp: bool,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            h_max: 80,
            gamma: 0.99,
            reward_success: 1.0,
            reward_failure: -0.1,
            reward_abnormal: -0.01,
            reward_normal: -0.001,
            regrasp: false,
        }
    }
}

impl TaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h_max == 0 {
            return Err(Error::Config("h_max must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config("gamma must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionConfig {
    pub n_voxel: u32,
    pub filter_radius_vox: f64,
    pub filter_min_neighbors: usize,
    /// Project the top (max-z) surface instead of the default min-z rule.
    pub ortho_top_surface: bool,
    /// Point cloud bound as a fraction of the workspace extent.
    pub workspace_inflation: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            n_voxel: 200,
            filter_radius_vox: 2.0,
            filter_min_neighbors: 2,
            ortho_top_surface: false,
            workspace_inflation: 0.1,
        }
    }
}

impl PerceptionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_voxel == 0 {
            return Err(Error::Config("n_voxel must be positive".into()));
        }
        if self.filter_radius_vox <= 0.0 {
            return Err(Error::Config("filter radius must be positive".into()));
        }
        if self.workspace_inflation < 0.0 {
            return Err(Error::Config("workspace inflation must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SpotlightConfig {
    pub n_zoom: u32,
    pub n_sys: u32,
    pub encode_gripper: u8,
    pub encode_target: u8,
}

impl Default for SpotlightConfig {
    fn default() -> Self {
        Self { n_zoom: 60, n_sys: 10, encode_gripper: 140, encode_target: 70 }
    }
}

impl SpotlightConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_zoom == 0 {
            return Err(Error::Config("n_zoom must be positive".into()));
        }
        if self.n_sys == 0 || self.n_sys > 64 / 3 {
            return Err(Error::Config("n_sys must be in (0, 21]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub h_begin: u32,
    pub c_dis: f64,
    pub offset: [f64; 3],
    pub k_p: f64,
    pub alpha_xyz: f64,
    pub alpha_theta: f64,
    pub z_safe_norm: f64,
    pub lift_mm: f64,
    /// Scripted-expert alignment target relative to the target centroid,
    /// in normalized voxel coordinates.
    pub expert_offset: [f64; 3],
    pub expert_tolerance: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            h_begin: 6,
            c_dis: 0.1,
            offset: [0.0, 0.0, 0.1],
            k_p: 10.0,
            alpha_xyz: 0.3,
            alpha_theta: 1.0,
            z_safe_norm: 0.05,
            lift_mm: 30.0,
            expert_offset: [0.0, 0.0, 0.08],
            expert_tolerance: 0.02,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self, h_max: u32) -> Result<()> {
        if self.c_dis <= 0.0 {
            return Err(Error::Config("c_dis must be positive".into()));
        }
        if self.h_begin > h_max {
            return Err(Error::Config(format!(
                "h_begin {} exceeds horizon {h_max}",
                self.h_begin
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha_xyz) || self.alpha_xyz == 0.0 {
            return Err(Error::Config("alpha_xyz must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha_theta) || self.alpha_theta == 0.0 {
            return Err(Error::Config("alpha_theta must be in (0, 1]".into()));
        }
        if self.k_p <= 0.0 {
            return Err(Error::Config("k_p must be positive".into()));
        }
        if self.lift_mm <= 0.0 {
            return Err(Error::Config("lift_mm must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RandomizationConfig {
    pub enabled: bool,
    pub cam_roll_deg: f64,
    pub cam_pitch_deg: f64,
    pub cam_yaw_deg: f64,
    pub cam_distance_mm: f64,
    /// Resample the camera perturbation every step instead of once per
    /// episode (moving-camera robustness study).
    pub cam_per_step: bool,
    pub object_scale: [f64; 2],
    pub action_noise: f64,
    pub depth_noise_range: f64,
    pub blur_kernel: u32,
    pub blur_sigma: f64,
    pub cutout_amount: [f64; 2],
    pub cutout_size_px: [u32; 2],
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            cam_roll_deg: 3.0,
            cam_pitch_deg: 3.0,
            cam_yaw_deg: 1.0,
            cam_distance_mm: 10.0,
            cam_per_step: false,
            object_scale: [0.75, 1.25],
            action_noise: 0.01,
            depth_noise_range: 0.005,
            blur_kernel: 3,
            blur_sigma: 0.3,
            cutout_amount: [0.0, 0.2],
            cutout_size_px: [2, 20],
        }
    }
}

impl RandomizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.object_scale[0] > self.object_scale[1] || self.object_scale[0] <= 0.0 {
            return Err(Error::Config("object_scale range must be positive and ordered".into()));
        }
        if self.cutout_amount[0] > self.cutout_amount[1]
            || self.cutout_amount[0] < 0.0
            || self.cutout_amount[1] > 1.0
        {
            return Err(Error::Config("cutout_amount must be an ordered range in [0, 1]".into()));
        }
        if self.blur_kernel % 2 == 0 {
            return Err(Error::Config("blur kernel must be odd".into()));
        }
        if self.cutout_size_px[0] == 0 || self.cutout_size_px[0] > self.cutout_size_px[1] {
            return Err(Error::Config("cutout_size_px range must be positive and ordered".into()));
        }
        Ok(())
    }

    /// All noise sources off; object scale pinned to 1.
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StereoConfig {
    pub block: u32,
    pub search_range: u32,
    pub uniqueness_ratio: f64,
    pub min_disparity_px: f64,
    /// Route episode perception through the synthetic stereo pipeline
    /// instead of the directly rendered depth.
    pub route_through_stereo: bool,
}

impl Default for StereoConfig {
    fn default() -> Self {
        Self {
            block: 9,
            search_range: 128,
            uniqueness_ratio: 0.9,
            min_disparity_px: 0.1,
            route_through_stereo: false,
        }
    }
}

impl StereoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block < 3 || self.block % 2 == 0 {
            return Err(Error::Config("stereo block must be odd and at least 3".into()));
        }
        if self.search_range == 0 {
            return Err(Error::Config("stereo search range must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.uniqueness_ratio) {
            return Err(Error::Config("uniqueness ratio must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn toml_overlay_overrides_one_field() {
        let cfg = Config::from_toml_str("[task]\nh_max = 40\n").unwrap();
        assert_eq!(cfg.task.h_max, 40);
        assert_eq!(cfg.scene.delta_xyz_mm, 5.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml_str("[task]\nnot_a_field = 1\n").is_err());
    }

    #[test]
    fn bad_mix_is_rejected() {
        let err = Config::from_toml_str("[scene.object_mix]\nneedle = 0.9\n");
        assert!(err.is_err());
    }

    #[test]
    fn degenerate_workspace_is_rejected() {
        let err = Config::from_toml_str("[scene]\nworkspace_max_mm = [0.0, 100.0, 100.0]\n");
        assert!(err.is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = Config::default().fingerprint();
        let b = Config::from_toml_str("[task]\nh_max = 40\n").unwrap().fingerprint();
        assert_eq!(a, Config::default().fingerprint());
        assert_ne!(a, b);
    }

    #[test]
    fn camera_build_points_at_target() {
        let cfg = CameraConfig::default();
        let target = Vector3::new(50.0, 50.0, 50.0);
        let cam = cfg.build(target);
        // The target sits on the optical axis at the configured standoff.
        let (p, d) = crate::geometry::project_point(&target, &cam).unwrap();
        assert!(p.0.abs() < 1e-9 && p.1.abs() < 1e-9);
        assert!((d - cfg.standoff_mm).abs() < 1e-9);
    }
}
