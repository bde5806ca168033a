//! The simulated world: gripper kinematics under 5-element commands,
//! primitive target objects, workspace clamping, and grasp detection.
//!
//! There is no contact dynamics: objects are static until grasped, and a
//! held object moves rigidly with the gripper.

use nalgebra::Vector3;
use rand::Rng;

use crate::config::SceneConfig;
use crate::error::{Error, Result};
use crate::geometry::{rot_x, rot_z, Pose};
use crate::rng::SimRng;

/// Axis-aligned workspace box, millimeters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workspace {
    pub min_mm: Vector3<f64>,
    pub max_mm: Vector3<f64>,
}

impl Workspace {
    pub fn new(min_mm: Vector3<f64>, max_mm: Vector3<f64>) -> Result<Self> {
        for axis in 0..3 {
            if min_mm[axis] >= max_mm[axis] {
                return Err(Error::Config(format!(
                    "degenerate workspace: min {min_mm:?} !< max {max_mm:?}"
                )));
            }
        }
        Ok(Self { min_mm, max_mm })
    }

    pub fn from_config(cfg: &SceneConfig) -> Result<Self> {
        Self::new(Vector3::from(cfg.workspace_min_mm), Vector3::from(cfg.workspace_max_mm))
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.min_mm[a] && p[a] <= self.max_mm[a])
    }

    /// Componentwise clamp: the nearest feasible point of a box.
    pub fn clamp(&self, p: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            p.x.clamp(self.min_mm.x, self.max_mm.x),
            p.y.clamp(self.min_mm.y, self.max_mm.y),
            p.z.clamp(self.min_mm.z, self.max_mm.z),
        )
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.max_mm - self.min_mm
    }

    /// Box grown by `fraction` of its extent on every side.
    pub fn inflated(&self, fraction: f64) -> Workspace {
        let pad = self.extent() * fraction;
        Workspace { min_mm: self.min_mm - pad, max_mm: self.max_mm + pad }
    }
}

/// Normalized 5-element command: translation fractions, yaw fraction,
/// and the jaw element (positive opens, non-positive closes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command([f64; 5]);

impl Command {
    pub fn new(elements: [f64; 5]) -> Result<Self> {
        for (i, v) in elements.iter().enumerate() {
            if !v.is_finite() || *v < -1.0 || *v > 1.0 {
                return Err(Error::Validation(format!(
                    "command element {i} out of range [-1, 1]: {v}"
                )));
            }
        }
        Ok(Self(elements))
    }

    pub fn elements(&self) -> &[f64; 5] {
        &self.0
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn yaw(&self) -> f64 {
        self.0[3]
    }

    pub fn jaw(&self) -> f64 {
        self.0[4]
    }

    pub fn opens_jaw(&self) -> bool {
        self.0[4] > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectKind {
    Needle,
    Block,
    Rod,
    Sphere,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 4] =
        [ObjectKind::Needle, ObjectKind::Block, ObjectKind::Rod, ObjectKind::Sphere];

    pub fn name(&self) -> &'static str {
        match self {
            ObjectKind::Needle => "needle",
            ObjectKind::Block => "block",
            ObjectKind::Rod => "rod",
            ObjectKind::Sphere => "sphere",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "needle" => Ok(ObjectKind::Needle),
            "block" => Ok(ObjectKind::Block),
            "rod" => Ok(ObjectKind::Rod),
            "sphere" => Ok(ObjectKind::Sphere),
            other => Err(Error::Validation(format!("unknown object kind {other:?}"))),
        }
    }
}

/// A target object: pose plus a dense local-frame surface sample,
/// centered on the sample centroid and already scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectModel {
    pub kind: ObjectKind,
    pub scale: f64,
    pub pose: Pose,
    pub surface_points_mm: Vec<Vector3<f64>>,
}

impl ObjectModel {
    pub fn world_points(&self) -> impl Iterator<Item = Vector3<f64>> + '_ {
        self.surface_points_mm.iter().map(|p| self.pose.transform(p))
    }
}

/// Gripper pose: position of the jaw pivot, yaw about world z, and the
/// fixed episode tilt about the gripper's own x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperState {
    pub position_mm: Vector3<f64>,
    pub yaw_rad: f64,
    pub jaw_open: bool,
    pub tilt_rad: f64,
}

impl GripperState {
    /// Local-to-world frame. The local +z axis points ahead of the jaw
    /// pivot toward the scene (straight down at zero tilt).
    pub fn frame(&self) -> Pose {
        let rotation = rot_z(self.yaw_rad) * rot_x(std::f64::consts::PI - self.tilt_rad);
        Pose::new(rotation, self.position_mm).expect("rotation built from angles")
    }
}

// Gripper body in the local frame: two jaw plates ahead of the pivot and
// a shaft behind it. The plate gap matches the capture volume's y extent.
const PLATE_X: f64 = 4.0;
const PLATE_Y_INNER: f64 = 2.0;
const PLATE_Y_OUTER: f64 = 3.0;
const PLATE_Z: f64 = 10.0;
const SHAFT_HALF: f64 = 3.0;
const SHAFT_LEN: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneState {
    pub cfg: SceneConfig,
    pub workspace: Workspace,
    pub gripper: GripperState,
    pub gripper_points_mm: Vec<Vector3<f64>>,
    pub object: ObjectModel,
    pub held: bool,
}

/// What a single actuation did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEffects {
    pub clamped: bool,
    pub jaw_was_open: bool,
    pub jaw_now_open: bool,
}

impl StepEffects {
    pub fn jaw_closed_now(&self) -> bool {
        self.jaw_was_open && !self.jaw_now_open
    }
}

impl SceneState {
    /// World-frame gripper surface points.
    pub fn gripper_world_points(&self) -> impl Iterator<Item = Vector3<f64>> + '_ {
        let frame = self.gripper.frame();
        self.gripper_points_mm.iter().map(move |p| frame.transform(p))
    }

    /// Applies a validated command; the desired position is clamped to
    /// the nearest feasible point of the workspace.
    pub fn apply_action(&mut self, cmd: &Command) -> StepEffects {
        let old_frame = self.gripper.frame();
        let desired = self.gripper.position_mm + cmd.translation() * self.cfg.delta_xyz_mm;
        let clamped_pos = self.workspace.clamp(&desired);
        let clamped = clamped_pos != desired;
        let jaw_was_open = self.gripper.jaw_open;
        self.gripper.position_mm = clamped_pos;
        self.gripper.yaw_rad += cmd.yaw() * self.cfg.delta_theta_deg.to_radians();
        self.gripper.jaw_open = cmd.opens_jaw();
        if self.held {
            let delta = self.gripper.frame().compose(&old_frame.inverse());
            self.object.pose = delta.compose(&self.object.pose);
        }
        StepEffects { clamped, jaw_was_open, jaw_now_open: self.gripper.jaw_open }
    }

    /// Capture-volume test in the gripper frame; on success the object
    /// attaches to the gripper.
    pub fn check_grasp(&mut self) -> bool {
        let inv = self.gripper.frame().inverse();
        let hx = self.cfg.jaw_box_mm[0] / 2.0;
        let hy = self.cfg.jaw_box_mm[1] / 2.0;
        let lz = self.cfg.jaw_box_mm[2];
        let grasped = self.object.world_points().any(|p| {
            let q = inv.transform(&p);
            q.x.abs() <= hx && q.y.abs() <= hy && (0.0..=lz).contains(&q.z)
        });
        if grasped {
            self.held = true;
        }
        grasped
    }
}

fn sample_in_range(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Samples an object kind from the configured mix.
pub fn sample_kind(cfg: &SceneConfig, rng: &mut SimRng) -> ObjectKind {
    let u: f64 = rng.gen();
    let mix = &cfg.object_mix;
    let mut acc = mix.needle;
    if u < acc {
        return ObjectKind::Needle;
    }
    acc += mix.block;
    if u < acc {
        return ObjectKind::Block;
    }
    acc += mix.rod;
    if u < acc {
        return ObjectKind::Rod;
    }
    ObjectKind::Sphere
}

/// Fresh scene: object kind from the mix, poses uniform inside the spawn
/// ranges, jaw open.
pub fn reset(cfg: &SceneConfig, object_scale: f64, rng: &mut SimRng) -> Result<SceneState> {
    cfg.validate()?;
    let workspace = Workspace::from_config(cfg)?;
    let kind = sample_kind(cfg, rng);
    let mut object = spawn_object(kind, object_scale, cfg, rng)?;

    let margin = cfg.spawn_margin_xy_mm;
    let min = workspace.min_mm;
    let max = workspace.max_mm;
    let obj_pos = Vector3::new(
        sample_in_range(rng, min.x + margin, max.x - margin),
        sample_in_range(rng, min.y + margin, max.y - margin),
        sample_in_range(
            rng,
            cfg.spawn_object_z_mm[0].max(min.z),
            cfg.spawn_object_z_mm[1].min(max.z),
        ),
    );
    let obj_yaw = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    object.pose = Pose::from_z_rotation(obj_yaw, workspace.clamp(&obj_pos));

    let grip_pos = Vector3::new(
        sample_in_range(rng, min.x + margin, max.x - margin),
        sample_in_range(rng, min.y + margin, max.y - margin),
        sample_in_range(
            rng,
            cfg.spawn_gripper_z_mm[0].max(min.z),
            cfg.spawn_gripper_z_mm[1].min(max.z),
        ),
    );
    let gripper = GripperState {
        position_mm: workspace.clamp(&grip_pos),
        yaw_rad: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        jaw_open: true,
        tilt_rad: cfg.gripper_tilt_deg.to_radians(),
    };
    let gripper_points_mm = sample_gripper_surface(cfg.surface_points, rng);

    Ok(SceneState { cfg: cfg.clone(), workspace, gripper, gripper_points_mm, object, held: false })
}

/// Quasi-uniform surface sample of an axis-aligned box, area-weighted
/// over the six faces.
fn sample_box_surface(
    rng: &mut SimRng,
    min: Vector3<f64>,
    max: Vector3<f64>,
    count: usize,
    out: &mut Vec<Vector3<f64>>,
) {
    let e = max - min;
    let areas = [e.y * e.z, e.y * e.z, e.x * e.z, e.x * e.z, e.x * e.y, e.x * e.y];
    let total: f64 = areas.iter().sum();
    for _ in 0..count {
        let mut pick = rng.gen_range(0.0..total);
        let mut face = 0;
        for (i, a) in areas.iter().enumerate() {
            if pick < *a {
                face = i;
                break;
            }
            pick -= a;
        }
        let u: f64 = rng.gen();
        let v: f64 = rng.gen();
        let p = match face {
            0 => Vector3::new(min.x, min.y + u * e.y, min.z + v * e.z),
            1 => Vector3::new(max.x, min.y + u * e.y, min.z + v * e.z),
            2 => Vector3::new(min.x + u * e.x, min.y, min.z + v * e.z),
            3 => Vector3::new(min.x + u * e.x, max.y, min.z + v * e.z),
            4 => Vector3::new(min.x + u * e.x, min.y + v * e.y, min.z),
            _ => Vector3::new(min.x + u * e.x, min.y + v * e.y, max.z),
        };
        out.push(p);
    }
}

fn box_area(min: Vector3<f64>, max: Vector3<f64>) -> f64 {
    let e = max - min;
    2.0 * (e.x * e.y + e.y * e.z + e.x * e.z)
}

/// Gripper body sample in the local frame (not recentered: the frame
/// origin is the jaw pivot).
pub fn sample_gripper_surface(count: usize, rng: &mut SimRng) -> Vec<Vector3<f64>> {
    let plate_a = (
        Vector3::new(-PLATE_X, PLATE_Y_INNER, 0.0),
        Vector3::new(PLATE_X, PLATE_Y_OUTER, PLATE_Z),
    );
    let plate_b = (
        Vector3::new(-PLATE_X, -PLATE_Y_OUTER, 0.0),
        Vector3::new(PLATE_X, -PLATE_Y_INNER, PLATE_Z),
    );
    let shaft = (
        Vector3::new(-SHAFT_HALF, -SHAFT_HALF, -SHAFT_LEN),
        Vector3::new(SHAFT_HALF, SHAFT_HALF, 0.0),
    );
    let parts = [plate_a, plate_b, shaft];
    let areas: Vec<f64> = parts.iter().map(|(a, b)| box_area(*a, *b)).collect();
    let total: f64 = areas.iter().sum();
    let mut out = Vec::with_capacity(count);
    for (i, (a, b)) in parts.iter().enumerate() {
        let share = if i + 1 == parts.len() {
            count - out.len()
        } else {
            ((areas[i] / total) * count as f64).round() as usize
        };
        sample_box_surface(rng, *a, *b, share, &mut out);
    }
    out
}

/// Builds a surface point sample for one object kind, recentered on its
/// sample centroid and scaled.
pub fn spawn_object(
    kind: ObjectKind,
    scale: f64,
    cfg: &SceneConfig,
    rng: &mut SimRng,
) -> Result<ObjectModel> {
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::Validation(format!("object scale must be positive, got {scale}")));
    }
    let n = cfg.surface_points;
    let mut points = Vec::with_capacity(n);
    match kind {
        ObjectKind::Needle => {
            // Semicircular torus arc spanning 20 mm end to end: center
            // circle radius 9 mm plus a 1 mm tube.
            let arc_r = 9.0;
            let tube_r = 1.0;
            while points.len() < n {
                let phi = rng.gen_range(0.0..std::f64::consts::PI);
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                // Area density on a torus goes as (arc_r + tube_r cos t).
                let accept: f64 = rng.gen();
                if accept > (arc_r + tube_r * theta.cos()) / (arc_r + tube_r) {
                    continue;
                }
                let ring = arc_r + tube_r * theta.cos();
                points.push(Vector3::new(
                    ring * phi.cos(),
                    ring * phi.sin(),
                    tube_r * theta.sin(),
                ));
            }
        }
        ObjectKind::Block => {
            let h = 5.0;
            sample_box_surface(rng, Vector3::new(-h, -h, -h), Vector3::new(h, h, h), n, &mut points);
        }
        ObjectKind::Rod => {
            // 4 mm diameter, 20 mm long cylinder along x.
            let r = 2.0;
            let half_len = 10.0;
            let lateral = std::f64::consts::TAU * r * 2.0 * half_len;
            let caps = 2.0 * std::f64::consts::PI * r * r;
            for _ in 0..n {
                let pick = rng.gen_range(0.0..lateral + caps);
                if pick < lateral {
                    let x = rng.gen_range(-half_len..half_len);
                    let t = rng.gen_range(0.0..std::f64::consts::TAU);
                    points.push(Vector3::new(x, r * t.cos(), r * t.sin()));
                } else {
                    let x = if pick - lateral < caps / 2.0 { -half_len } else { half_len };
                    let rho = r * rng.gen::<f64>().sqrt();
                    let t = rng.gen_range(0.0..std::f64::consts::TAU);
                    points.push(Vector3::new(x, rho * t.cos(), rho * t.sin()));
                }
            }
        }
        ObjectKind::Sphere => {
            let r = cfg.sphere_radius_mm;
            for _ in 0..n {
                let z = rng.gen_range(-1.0..1.0f64);
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let rho = (1.0 - z * z).sqrt();
                points.push(Vector3::new(r * rho * t.cos(), r * rho * t.sin(), r * z));
            }
        }
    }
    let centroid: Vector3<f64> = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    for p in &mut points {
        *p = (*p - centroid) * scale;
    }
    Ok(ObjectModel { kind, scale, pose: Pose::identity(), surface_points_mm: points })
}
