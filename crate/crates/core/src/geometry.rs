//! Camera model, rigid poses, and projection/unprojection kernels.
//!
//! The camera follows the convention used throughout the pipeline:
//! a pixel `p` (measured from the principal point at the image center)
//! with depth `d` maps to the world point
//!
//! ```text
//! q = R * [scale * p_x, scale * p_y, d]^T + t
//! ```
//!
//! i.e. image coordinates are metric camera-plane coordinates under a
//! constant per-pixel scale rather than a perspective division. The
//! renderer uses the exact algebraic inverse, so projection and
//! unprojection round-trip bit-tight on the valid domain.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-9;

fn check_orthonormal(r: &Matrix3<f64>) -> Result<()> {
    let err = (r.transpose() * r - Matrix3::identity()).abs().max();
    if err > ORTHONORMAL_TOL {
        return Err(Error::Validation(format!(
            "rotation is not orthonormal (max |R^T R - I| = {err:.3e})"
        )));
    }
    Ok(())
}

/// Rigid transform: `q -> R q + t`. Lengths in millimeters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation_mm: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation_mm: Vector3<f64>) -> Result<Self> {
        check_orthonormal(&rotation)?;
        Ok(Self { rotation, translation_mm })
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation_mm: Vector3::zeros() }
    }

    /// Rotation about the world z axis followed by a translation.
    pub fn from_z_rotation(yaw_rad: f64, translation_mm: Vector3<f64>) -> Self {
        Self { rotation: rot_z(yaw_rad), translation_mm }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation_mm(&self) -> &Vector3<f64> {
        &self.translation_mm
    }

    pub fn transform(&self, q: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * q + self.translation_mm
    }

    /// `self` after `b`: `(self ∘ b)(q) = self(b(q))`.
    pub fn compose(&self, b: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * b.rotation,
            translation_mm: self.rotation * b.translation_mm + self.translation_mm,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose { rotation: rt, translation_mm: -(rt * self.translation_mm) }
    }
}

pub fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Stereo camera intrinsics and extrinsic pose.
///
/// `rotation`/`translation_mm` map camera-frame coordinates to world
/// coordinates; `pixel_scale` is millimeters per pixel on the image
/// plane; pixels are measured from the principal point, fixed at the
/// image center.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub focal_px: f64,
    pub baseline_mm: f64,
    pub pixel_scale: f64,
    rotation: Matrix3<f64>,
    translation_mm: Vector3<f64>,
    pub width_px: u32,
    pub height_px: u32,
}

impl CameraModel {
    pub fn new(
        focal_px: f64,
        baseline_mm: f64,
        pixel_scale: f64,
        rotation: Matrix3<f64>,
        translation_mm: Vector3<f64>,
        width_px: u32,
        height_px: u32,
    ) -> Result<Self> {
        if focal_px <= 0.0 {
            return Err(Error::Validation(format!("focal_px must be positive, got {focal_px}")));
        }
        if baseline_mm <= 0.0 {
            return Err(Error::Validation(format!(
                "baseline_mm must be positive, got {baseline_mm}"
            )));
        }
        if pixel_scale <= 0.0 {
            return Err(Error::Validation(format!(
                "pixel_scale must be positive, got {pixel_scale}"
            )));
        }
        if width_px == 0 || height_px == 0 {
            return Err(Error::Validation("image dimensions must be positive".into()));
        }
        check_orthonormal(&rotation)?;
        Ok(Self { focal_px, baseline_mm, pixel_scale, rotation, translation_mm, width_px, height_px })
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation_mm(&self) -> &Vector3<f64> {
        &self.translation_mm
    }

    pub fn pose(&self) -> Pose {
        Pose { rotation: self.rotation, translation_mm: self.translation_mm }
    }

    /// Principal point in image-array coordinates.
    pub fn principal_point(&self) -> (f64, f64) {
        (self.width_px as f64 / 2.0, self.height_px as f64 / 2.0)
    }

    /// Image-array coordinates -> principal-point-relative pixel coordinates.
    pub fn pixel_from_image(&self, ix: f64, iy: f64) -> (f64, f64) {
        let (cx, cy) = self.principal_point();
        (ix - cx, iy - cy)
    }

    /// Principal-point-relative pixel coordinates -> image-array coordinates.
    pub fn image_from_pixel(&self, p: (f64, f64)) -> (f64, f64) {
        let (cx, cy) = self.principal_point();
        (p.0 + cx, p.1 + cy)
    }

    /// Nearest integer image index for a relative pixel coordinate, if inside.
    pub fn rasterize(&self, p: (f64, f64)) -> Option<(usize, usize)> {
        let (ix, iy) = self.image_from_pixel(p);
        let (ix, iy) = (ix.round(), iy.round());
        if ix < 0.0 || iy < 0.0 || ix >= self.width_px as f64 || iy >= self.height_px as f64 {
            return None;
        }
        Some((ix as usize, iy as usize))
    }
}

/// Pixel (principal-point-relative) plus depth -> world point.
pub fn unproject_pixel(p: (f64, f64), depth_mm: f64, cam: &CameraModel) -> Result<Vector3<f64>> {
    if depth_mm <= 0.0 {
        return Err(Error::Domain(format!("unproject requires positive depth, got {depth_mm}")));
    }
    let v = Vector3::new(cam.pixel_scale * p.0, cam.pixel_scale * p.1, depth_mm);
    Ok(cam.rotation * v + cam.translation_mm)
}

/// World point -> (pixel, depth). Exact inverse of [`unproject_pixel`].
pub fn project_point(q: &Vector3<f64>, cam: &CameraModel) -> Result<((f64, f64), f64)> {
    let v = cam.rotation.transpose() * (q - cam.translation_mm);
    if v.z <= 0.0 {
        return Err(Error::BehindCamera(v.z));
    }
    Ok(((v.x / cam.pixel_scale, v.y / cam.pixel_scale), v.z))
}
