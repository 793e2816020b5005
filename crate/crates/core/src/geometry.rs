//! Camera viewpoint parameterization.
//!
//! A viewpoint is the 6-vector `[psi, theta, phi, dx, dy, dz]`: three
//! Tait-Bryan angles in degrees (z-y-x order) and a world-frame translation
//! offset. Viewpoints live inside a box `[v_min, v_max]`, reached from an
//! unconstrained vector `u` through `v = a * tanh(u) + b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of viewpoint degrees of freedom.
pub const DIMS: usize = 6;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Default camera position before rotation.
pub const BASE_POSITION: Vec3 = [0.0, 4.0, 0.0];

/// Largest |tanh| used by the bounded transform, so that saturated inputs
/// stay strictly inside the box.
const TANH_SATURATION: f64 = 1.0 - 1e-12;

const AXIS_NAMES: [&str; DIMS] = ["psi", "theta", "phi", "dx", "dy", "dz"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Viewpoint {
    pub const ZERO: Viewpoint = Viewpoint {
        psi: 0.0,
        theta: 0.0,
        phi: 0.0,
        dx: 0.0,
        dy: 0.0,
        dz: 0.0,
    };

    pub fn from_array(v: [f64; DIMS]) -> Self {
        Viewpoint {
            psi: v[0],
            theta: v[1],
            phi: v[2],
            dx: v[3],
            dy: v[4],
            dz: v[5],
        }
    }

    pub fn to_array(&self) -> [f64; DIMS] {
        [self.psi, self.theta, self.phi, self.dx, self.dy, self.dz]
    }

    pub fn translation(&self) -> Vec3 {
        [self.dx, self.dy, self.dz]
    }
}

/// Index of a viewpoint axis, parsed from names like `psi` or `dx`.
pub fn axis_index(name: &str) -> Option<usize> {
    AXIS_NAMES.iter().position(|n| n.eq_ignore_ascii_case(name.trim()))
}

pub fn axis_name(axis: usize) -> &'static str {
    AXIS_NAMES[axis]
}

/// Box constraint on viewpoints. `a` and `b` are derived from the limits at
/// construction and never stored independently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundsRepr", into = "BoundsRepr")]
pub struct ViewpointBounds {
    v_min: [f64; DIMS],
    v_max: [f64; DIMS],
    a: [f64; DIMS],
    b: [f64; DIMS],
}

#[derive(Serialize, Deserialize)]
struct BoundsRepr {
    v_min: [f64; DIMS],
    v_max: [f64; DIMS],
}

impl TryFrom<BoundsRepr> for ViewpointBounds {
    type Error = Error;

    fn try_from(r: BoundsRepr) -> Result<Self> {
        ViewpointBounds::new(r.v_min, r.v_max)
    }
}

impl From<ViewpointBounds> for BoundsRepr {
    fn from(b: ViewpointBounds) -> Self {
        BoundsRepr {
            v_min: b.v_min,
            v_max: b.v_max,
        }
    }
}

impl ViewpointBounds {
    pub fn new(v_min: [f64; DIMS], v_max: [f64; DIMS]) -> Result<Self> {
        let mut a = [0.0; DIMS];
        let mut b = [0.0; DIMS];
        for d in 0..DIMS {
            if !v_min[d].is_finite() || !v_max[d].is_finite() {
                return Err(Error::NonFiniteInput("viewpoint bounds"));
            }
            if v_min[d] >= v_max[d] {
                return Err(Error::DegenerateBounds {
                    axis: d,
                    min: v_min[d],
                    max: v_max[d],
                });
            }
            a[d] = (v_max[d] - v_min[d]) / 2.0;
            b[d] = (v_max[d] + v_min[d]) / 2.0;
        }
        Ok(ViewpointBounds { v_min, v_max, a, b })
    }

    /// The rotation and translation ranges of the standard benchmark setup.
    pub fn standard() -> Self {
        ViewpointBounds::new(
            [-180.0, -30.0, 20.0, -0.5, -1.0, -0.5],
            [180.0, 30.0, 160.0, 0.5, 1.0, 0.5],
        )
        .expect("standard bounds are valid")
    }

    pub fn v_min(&self) -> &[f64; DIMS] {
        &self.v_min
    }

    pub fn v_max(&self) -> &[f64; DIMS] {
        &self.v_max
    }

    /// Half-widths `(v_max - v_min) / 2`.
    pub fn a(&self) -> &[f64; DIMS] {
        &self.a
    }

    /// Midpoints `(v_max + v_min) / 2`.
    pub fn b(&self) -> &[f64; DIMS] {
        &self.b
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.v_max[axis] - self.v_min[axis]
    }

    pub fn midpoint(&self) -> Viewpoint {
        Viewpoint::from_array(self.b)
    }

    /// Inclusive containment test.
    pub fn contains(&self, v: &Viewpoint) -> bool {
        v.to_array()
            .iter()
            .enumerate()
            .all(|(d, &x)| x >= self.v_min[d] && x <= self.v_max[d])
    }

    pub fn contains_strictly(&self, v: &Viewpoint) -> bool {
        v.to_array()
            .iter()
            .enumerate()
            .all(|(d, &x)| x > self.v_min[d] && x < self.v_max[d])
    }

    /// Maps an unconstrained vector into the box: `v = a * tanh(u) + b`.
    pub fn tanh_transform(&self, u: &[f64; DIMS]) -> Result<Viewpoint> {
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput("unconstrained viewpoint"));
        }
        Ok(self.tanh_transform_unchecked(u))
    }

    pub(crate) fn tanh_transform_unchecked(&self, u: &[f64; DIMS]) -> Viewpoint {
        let mut v = [0.0; DIMS];
        for d in 0..DIMS {
            let t = u[d].tanh().clamp(-TANH_SATURATION, TANH_SATURATION);
            v[d] = self.a[d] * t + self.b[d];
        }
        Viewpoint::from_array(v)
    }

    pub fn inverse_transform(&self, v: &Viewpoint) -> Result<[f64; DIMS]> {
        let arr = v.to_array();
        let mut u = [0.0; DIMS];
        for d in 0..DIMS {
            let x = arr[d];
            if !x.is_finite() {
                return Err(Error::NonFiniteInput("viewpoint"));
            }
            if x <= self.v_min[d] || x >= self.v_max[d] {
                return Err(Error::OutOfBounds {
                    axis: d,
                    value: x,
                    min: self.v_min[d],
                    max: self.v_max[d],
                });
            }
            u[d] = ((x - self.b[d]) / self.a[d]).atanh();
        }
        Ok(u)
    }
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn determinant(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn rot_z(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn rot_x(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

/// `Rz(psi) * Ry(theta) * Rx(phi)`, angles in degrees.
pub fn rotation_matrix(psi: f64, theta: f64, phi: f64) -> Result<Mat3> {
    if !(psi.is_finite() && theta.is_finite() && phi.is_finite()) {
        return Err(Error::NonFiniteInput("rotation angles"));
    }
    Ok(mat_mul(&mat_mul(&rot_z(psi), &rot_y(theta)), &rot_x(phi)))
}

/// Camera-to-world rotation and camera center.
///
/// Columns of `rotation` are the camera's right, up and backward axes in
/// world coordinates; the camera looks along the negated third column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraPose {
    pub rotation: Mat3,
    pub position: Vec3,
    /// Set when the look direction was parallel to world +z and +x was used
    /// as the up reference instead.
    pub gimbal_fallback: bool,
}

impl CameraPose {
    pub fn right(&self) -> Vec3 {
        column(&self.rotation, 0)
    }

    pub fn up(&self) -> Vec3 {
        column(&self.rotation, 1)
    }

    pub fn forward(&self) -> Vec3 {
        let b = column(&self.rotation, 2);
        [-b[0], -b[1], -b[2]]
    }

    /// Builds a camera at `position` looking at the world origin, world +z up.
    pub fn look_at_origin(position: Vec3) -> Self {
        let to_origin = [-position[0], -position[1], -position[2]];
        let dist = norm(&to_origin);
        let forward = if dist > 0.0 {
            [to_origin[0] / dist, to_origin[1] / dist, to_origin[2] / dist]
        } else {
            [0.0, -1.0, 0.0]
        };
        let mut gimbal_fallback = false;
        let mut side = cross(&forward, &[0.0, 0.0, 1.0]);
        if norm(&side) < 1e-9 {
            gimbal_fallback = true;
            side = cross(&forward, &[1.0, 0.0, 0.0]);
        }
        let right = normalize(&side);
        let up = cross(&right, &forward);
        let back = [-forward[0], -forward[1], -forward[2]];
        let rotation = [
            [right[0], up[0], back[0]],
            [right[1], up[1], back[1]],
            [right[2], up[2], back[2]],
        ];
        CameraPose {
            rotation,
            position,
            gimbal_fallback,
        }
    }
}

fn column(m: &Mat3, j: usize) -> Vec3 {
    [m[0][j], m[1][j], m[2][j]]
}

/// Rotates `base_position` about the origin by the viewpoint's angles, adds
/// the world-frame offset and aims the camera at the origin.
pub fn camera_pose(v: &Viewpoint, base_position: &Vec3) -> Result<CameraPose> {
    let r = rotation_matrix(v.psi, v.theta, v.phi)?;
    let t = v.translation();
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput("translation"));
    }
    let p = mat_vec(&r, base_position);
    Ok(CameraPose::look_at_origin([
        p[0] + t[0],
        p[1] + t[1],
        p[2] + t[2],
    ]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    /// Vertical field of view in degrees.
    pub fov_y: f64,
    pub t_near: f64,
    pub t_far: f64,
    pub samples_per_ray: usize,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        CameraIntrinsics {
            width: 32,
            height: 32,
            fov_y: 45.0,
            t_near: 1.0,
            t_far: 8.0,
            samples_per_ray: 64,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if self.width < 1 || self.height < 1 {
            return Err(Error::InvalidConfig("image must be at least 1x1".into()));
        }
        if !(self.t_near > 0.0 && self.t_near < self.t_far) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < t_near < t_far, got {} and {}",
                self.t_near, self.t_far
            )));
        }
        if self.samples_per_ray < 2 {
            return Err(Error::InvalidConfig("samples_per_ray must be >= 2".into()));
        }
        if !(self.fov_y > 0.0 && self.fov_y < 180.0) {
            return Err(Error::InvalidConfig(format!("bad fov_y {}", self.fov_y)));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit-norm direction.
    pub dir: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        [
            self.origin[0] + t * self.dir[0],
            self.origin[1] + t * self.dir[1],
            self.origin[2] + t * self.dir[2],
        ]
    }
}

/// Pinhole rays, row-major with row 0 at the top of the image.
pub fn generate_rays(pose: &CameraPose, intr: &CameraIntrinsics) -> Vec<Ray> {
    let half = (intr.fov_y.to_radians() / 2.0).tan();
    let aspect = intr.width as f64 / intr.height as f64;
    let right = pose.right();
    let up = pose.up();
    let fwd = pose.forward();
    let mut rays = Vec::with_capacity(intr.pixel_count());
    for j in 0..intr.height {
        let y = (1.0 - 2.0 * (j as f64 + 0.5) / intr.height as f64) * half;
        for i in 0..intr.width {
            let x = (2.0 * (i as f64 + 0.5) / intr.width as f64 - 1.0) * half * aspect;
            let d = [
                fwd[0] + x * right[0] + y * up[0],
                fwd[1] + x * right[1] + y * up[1],
                fwd[2] + x * right[2] + y * up[2],
            ];
            rays.push(Ray {
                origin: pose.position,
                dir: normalize(&d),
            });
        }
    }
    rays
}
