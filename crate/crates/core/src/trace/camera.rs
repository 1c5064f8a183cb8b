//! Pinhole camera for 3D scenes.

use crate::math::{Ray, Vec3};

#[derive(Clone, Copy, Debug)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    pub vfov_deg: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    pub fn new(position: Vec3, look_at: Vec3, width: u32, height: u32) -> Self {
        Camera {
            position,
            look_at,
            up: Vec3::new(0.0, 0.0, 1.0),
            vfov_deg: 45.0,
            width: width.max(1),
            height: height.max(1),
        }
    }

    fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = (self.look_at - self.position)
            .normalized(1e-12)
            .expect("camera position and look-at coincide");
        let mut up = self.up;
        if forward.cross(up).norm() < 1e-9 {
            up = Vec3::new(0.0, 1.0, 0.0); // fall back when looking along up
        }
        let right = forward.cross(up).normalized(1e-12).expect("valid frame");
        let true_up = right.cross(forward);
        (forward, right, true_up)
    }

    /// Primary ray through the center of pixel `(px, py)`; `py` grows downward.
    pub fn primary_ray(&self, px: u32, py: u32) -> Ray<3> {
        let (forward, right, up) = self.basis();
        let tan_half = (self.vfov_deg.to_radians() * 0.5).tan();
        let aspect = self.width as f64 / self.height as f64;
        let u = ((px as f64 + 0.5) / self.width as f64 * 2.0 - 1.0) * tan_half * aspect;
        let v = (1.0 - (py as f64 + 0.5) / self.height as f64 * 2.0) * tan_half;
        Ray::new(self.position, forward + right * u + up * v)
    }
}
