//! Ground-truth depth/mask rendering and synthetic textured stereo pairs.
//!
//! Rendering splats every gripper and object surface point through the
//! camera with a 1-pixel footprint and z-buffering; pixel ownership
//! defines the segmentation masks, so depth and masks are aligned by
//! construction. Stereo pairs are born rectified: the right image is the
//! left content shifted per pixel by the disparity implied by the depth.

use crate::geometry::{project_point, CameraModel};
use crate::img::{DepthImage, GrayImage, MaskImage};
use crate::scene::SceneState;

/// Binary segmentation masks for the two task objects.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    pub gripper: MaskImage,
    pub target: MaskImage,
}

#[derive(Clone, Copy)]
enum Owner {
    Gripper,
    Target,
}

/// Splats the scene into a depth image and per-object masks.
///
/// Nearest depth wins a pixel; an exact depth tie at an occlusion
/// boundary leaves both masks set.
pub fn render_depth_and_masks(scene: &SceneState, cam: &CameraModel) -> (DepthImage, MaskSet) {
    let (w, h) = (cam.width_px as usize, cam.height_px as usize);
    let mut depth = DepthImage::new(w, h);
    let mut masks = MaskSet { gripper: MaskImage::new(w, h), target: MaskImage::new(w, h) };

    let mut splat = |q: &nalgebra::Vector3<f64>, owner: Owner| {
        let Ok((p, d)) = project_point(q, cam) else { return };
        let Some((ix, iy)) = cam.rasterize(p) else { return };
        let current = depth.get(ix, iy);
        if current == 0.0 || d < current {
            depth.set(ix, iy, d);
            masks.gripper.set(ix, iy, 0);
            masks.target.set(ix, iy, 0);
            match owner {
                Owner::Gripper => masks.gripper.set(ix, iy, 1),
                Owner::Target => masks.target.set(ix, iy, 1),
            }
        } else if d == current {
            match owner {
                Owner::Gripper => masks.gripper.set(ix, iy, 1),
                Owner::Target => masks.target.set(ix, iy, 1),
            }
        }
    };

    for q in scene.gripper_world_points() {
        splat(&q, Owner::Gripper);
    }
    for q in scene.object.world_points() {
        splat(&q, Owner::Target);
    }
    (depth, masks)
}

fn hash2(ix: i64, iy: i64, seed: u64) -> u64 {
    let mut x = (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ seed.wrapping_mul(0x1656_67B1_9E37_79F9);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn lattice(ix: i64, iy: i64, octave: u64, seed: u64) -> f64 {
    (hash2(ix, iy, seed ^ octave.wrapping_mul(0xA076_1D64_78BD_642F)) >> 11) as f64
        / (1u64 << 53) as f64
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Seeded multi-octave value noise, continuous in (x, y), range [0, 1).
pub fn value_noise(x: f64, y: f64, seed: u64) -> f64 {
    // Wavelengths in pixels and their weights; the finest octave carries
    // enough gradient for sub-pixel matching.
    const OCTAVES: [(f64, f64); 3] = [(23.0, 0.45), (9.0, 0.3), (4.0, 0.25)];
    let mut acc = 0.0;
    for (o, (wavelength, weight)) in OCTAVES.iter().enumerate() {
        let fx = x / wavelength;
        let fy = y / wavelength;
        let ix = fx.floor();
        let iy = fy.floor();
        let tx = smoothstep(fx - ix);
        let ty = smoothstep(fy - iy);
        let (ix, iy) = (ix as i64, iy as i64);
        let v00 = lattice(ix, iy, o as u64, seed);
        let v10 = lattice(ix + 1, iy, o as u64, seed);
        let v01 = lattice(ix, iy + 1, o as u64, seed);
        let v11 = lattice(ix + 1, iy + 1, o as u64, seed);
        let v = v00 * (1.0 - tx) * (1.0 - ty)
            + v10 * tx * (1.0 - ty)
            + v01 * (1.0 - tx) * ty
            + v11 * tx * ty;
        acc += weight * v;
    }
    acc
}

fn shade(t: f64) -> u8 {
    (32.0 + t * 223.0).round().clamp(0.0, 255.0) as u8
}

/// Left/right 8-bit pair from a depth image: textured wherever depth is
/// nonzero, with the right view sampled at `x + disparity`.
pub fn stereo_pair_from_depth(
    depth: &DepthImage,
    cam: &CameraModel,
    texture_seed: u64,
) -> (GrayImage, GrayImage) {
    let (w, h) = (depth.width(), depth.height());
    let mut left = GrayImage::new(w, h);
    let mut right = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let d = depth.get(x, y);
            if d <= 0.0 {
                continue;
            }
            left.set(x, y, shade(value_noise(x as f64, y as f64, texture_seed)));
            let disparity = cam.focal_px * cam.baseline_mm / d;
            right.set(x, y, shade(value_noise(x as f64 + disparity, y as f64, texture_seed)));
        }
    }
    (left, right)
}

/// Renders the scene and synthesizes its rectified stereo pair.
pub fn render_stereo_pair(
    scene: &SceneState,
    cam: &CameraModel,
    texture_seed: u64,
) -> (GrayImage, GrayImage) {
    let (depth, _) = render_depth_and_masks(scene, cam);
    stereo_pair_from_depth(&depth, cam, texture_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CameraConfig, SceneConfig};
    use crate::rng::stream_rng;
    use nalgebra::Vector3;

    fn camera() -> CameraModel {
        CameraConfig::default().build(Vector3::new(50.0, 50.0, 50.0))
    }

    fn scene() -> SceneState {
        let cfg = SceneConfig { surface_points: 2000, ..SceneConfig::default() };
        crate::scene::reset(&cfg, 1.0, &mut stream_rng(30, 0)).unwrap()
    }

    #[test]
    fn empty_scene_renders_all_zero() {
        let mut s = scene();
        s.gripper_points_mm.clear();
        s.object.surface_points_mm.clear();
        let (depth, masks) = render_depth_and_masks(&s, &camera());
        assert!(depth.data().iter().all(|&d| d == 0.0));
        assert!(masks.gripper.data().iter().all(|&m| m == 0));
        assert!(masks.target.data().iter().all(|&m| m == 0));
    }

    #[test]
    fn single_point_splats_once_at_projection() {
        let mut s = scene();
        s.gripper_points_mm.clear();
        let q = Vector3::new(50.0, 50.0, 30.0);
        s.object.surface_points_mm = vec![q];
        s.object.pose = crate::geometry::Pose::identity();
        let cam = camera();
        let (depth, masks) = render_depth_and_masks(&s, &cam);
        let (p, d) = crate::geometry::project_point(&q, &cam).unwrap();
        let (ix, iy) = cam.rasterize(p).unwrap();
        let nonzero: Vec<_> = depth.enumerate().filter(|&(_, _, v)| v > 0.0).collect();
        assert_eq!(nonzero, vec![(ix, iy, d)]);
        assert_eq!(masks.target.get(ix, iy), 1);
        assert_eq!(masks.gripper.get(ix, iy), 0);
    }

    #[test]
    fn z_buffer_keeps_the_nearer_depth() {
        let mut s = scene();
        s.gripper_points_mm.clear();
        let cam = camera();
        // Two points on the same camera ray at different depths.
        let p = (12.0, -7.0);
        let near = crate::geometry::unproject_pixel(p, 40.0, &cam).unwrap();
        let far = crate::geometry::unproject_pixel(p, 90.0, &cam).unwrap();
        s.object.surface_points_mm = vec![far, near];
        s.object.pose = crate::geometry::Pose::identity();
        let (depth, _) = render_depth_and_masks(&s, &cam);
        let (ix, iy) = cam.rasterize(p).unwrap();
        assert!((depth.get(ix, iy) - 40.0).abs() < 1e-9);
    }

    #[test]
    fn rendering_is_pure() {
        let s = scene();
        let cam = camera();
        let a = render_depth_and_masks(&s, &cam);
        let b = render_depth_and_masks(&s, &cam);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn masks_align_with_depth() {
        let s = scene();
        let (depth, masks) = render_depth_and_masks(&s, &camera());
        for (x, y, m) in masks.gripper.enumerate() {
            if m == 1 {
                assert!(depth.get(x, y) > 0.0);
            }
        }
        for (x, y, m) in masks.target.enumerate() {
            if m == 1 {
                assert!(depth.get(x, y) > 0.0);
            }
        }
        // The scene is actually visible.
        assert!(masks.gripper.data().iter().any(|&m| m == 1));
        assert!(masks.target.data().iter().any(|&m| m == 1));
    }

    #[test]
    fn constant_depth_plane_has_uniform_disparity() {
        let cam = camera();
        let d = 100.0;
        let depth = DepthImage::filled(64, 64, d);
        let (left, right) = stereo_pair_from_depth(&depth, &cam, 9);
        let w = cam.focal_px * cam.baseline_mm / d;
        assert_eq!(w, 50.0);
        for y in 0..64 {
            for x in 0..64 {
                assert_eq!(left.get(x, y), shade(value_noise(x as f64, y as f64, 9)));
                assert_eq!(right.get(x, y), shade(value_noise(x as f64 + w, y as f64, 9)));
            }
        }
    }

    // Reconstruction oracle: every textured right pixel equals the left
    // content sampled at x + disparity.
    #[test]
    fn right_rows_are_left_rows_shifted_by_disparity() {
        let s = scene();
        let cam = camera();
        let (depth, _) = render_depth_and_masks(&s, &cam);
        let (_, right) = render_stereo_pair(&s, &cam, 77);
        let mut checked = 0usize;
        for (x, y, d) in depth.enumerate() {
            if d <= 0.0 {
                assert_eq!(right.get(x, y), 0);
                continue;
            }
            let w = cam.focal_px * cam.baseline_mm / d;
            assert_eq!(right.get(x, y), shade(value_noise(x as f64 + w, y as f64, 77)));
            checked += 1;
        }
        assert!(checked > 1000);
    }

    #[test]
    fn texture_seed_is_deterministic() {
        let s = scene();
        let cam = camera();
        let a = render_stereo_pair(&s, &cam, 5);
        let b = render_stereo_pair(&s, &cam, 5);
        let c = render_stereo_pair(&s, &cam, 6);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
