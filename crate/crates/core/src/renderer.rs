//! Discrete volume rendering over analytic radiance fields.
//!
//! Each pixel color is accumulated front to back along its ray:
//! `C = sum_m T_m * (1 - exp(-tau_m * delta_m)) * c_m` with transmittance
//! `T_m = exp(-sum_{j<m} tau_j * delta_j)`. Background radiance is zero.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, generate_rays, norm, CameraIntrinsics, CameraPose, Ray, Vec3};

pub type Rgb = [f64; 3];

/// Width of the cosine density ramp outside each primitive's surface.
pub const DEFAULT_FALLOFF_MARGIN: f64 = 0.1;

/// A field mapping position and view direction to emitted color and density.
pub trait RadianceField: Sync {
    fn eval(&self, x: &Vec3, d: &Vec3) -> (Rgb, f64);

    /// A sphere outside of which the density is exactly zero, if known.
    fn bounding_sphere(&self) -> Option<(Vec3, f64)> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Box,
    Ellipsoid,
}

/// One solid of a scene. `size` is the radius (first entry) for spheres,
/// the semi-axes for ellipsoids and the half-extents for boxes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    pub center: Vec3,
    pub size: Vec3,
    pub density: f64,
    pub color: Rgb,
    /// Linear brightness response to the vertical component of the view
    /// direction; zero disables view dependence.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub view_dependence: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn default_margin() -> f64 {
    DEFAULT_FALLOFF_MARGIN
}

impl Primitive {
    /// Signed distance (exact for spheres and boxes, first-order for
    /// ellipsoids) from the primitive surface.
    fn signed_distance(&self, x: &Vec3) -> f64 {
        let p = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
        ];
        match self.shape {
            Shape::Sphere => norm(&p) - self.size[0],
            Shape::Box => {
                let q = [
                    p[0].abs() - self.size[0],
                    p[1].abs() - self.size[1],
                    p[2].abs() - self.size[2],
                ];
                let outside = norm(&[q[0].max(0.0), q[1].max(0.0), q[2].max(0.0)]);
                let inside = q[0].max(q[1]).max(q[2]).min(0.0);
                outside + inside
            }
            Shape::Ellipsoid => {
                let r = self.size;
                let k0 = norm(&[p[0] / r[0], p[1] / r[1], p[2] / r[2]]);
                let k1 = norm(&[
                    p[0] / (r[0] * r[0]),
                    p[1] / (r[1] * r[1]),
                    p[2] / (r[2] * r[2]),
                ]);
                if k1 == 0.0 {
                    -r[0].min(r[1]).min(r[2])
                } else {
                    k0 * (k0 - 1.0) / k1
                }
            }
        }
    }

    fn bounding_radius(&self) -> f64 {
        match self.shape {
            Shape::Sphere => self.size[0],
            Shape::Ellipsoid => self.size[0].max(self.size[1]).max(self.size[2]),
            Shape::Box => norm(&self.size),
        }
    }

    fn shaded_color(&self, d: &Vec3) -> Rgb {
        if self.view_dependence == 0.0 {
            return self.color;
        }
        let gain = 1.0 + self.view_dependence * d[2];
        self.color.map(|c| (c * gain).clamp(0.0, 1.0))
    }
}

/// Smooth occupancy: 1 inside, cosine ramp to 0 across `margin` outside.
fn falloff(signed_distance: f64, margin: f64) -> f64 {
    if signed_distance <= 0.0 {
        1.0
    } else if signed_distance >= margin {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * signed_distance / margin).cos())
    }
}

/// Analytic stand-in for a trained radiance field of one object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneField {
    pub class_label: usize,
    pub primitives: Vec<Primitive>,
    #[serde(default = "default_margin")]
    pub falloff_margin: f64,
}

impl SceneField {
    pub fn new(class_label: usize, primitives: Vec<Primitive>) -> Result<Self> {
        let scene = SceneField {
            class_label,
            primitives,
            falloff_margin: DEFAULT_FALLOFF_MARGIN,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        self.falloff_margin = margin;
        self.validate()?;
        Ok(self)
    }

    /// A scene with no primitives, only useful as a rendering baseline.
    pub fn empty() -> Self {
        SceneField {
            class_label: 0,
            primitives: Vec::new(),
            falloff_margin: DEFAULT_FALLOFF_MARGIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.primitives.is_empty() {
            return Err(Error::InvalidConfig("scene needs at least one primitive".into()));
        }
        if !(self.falloff_margin >= 0.0 && self.falloff_margin.is_finite()) {
            return Err(Error::InvalidConfig("falloff margin must be >= 0".into()));
        }
        for (i, p) in self.primitives.iter().enumerate() {
            if !(p.density >= 0.0 && p.density.is_finite()) {
                return Err(Error::InvalidConfig(format!("primitive {i}: density must be >= 0")));
            }
            if p.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::InvalidConfig(format!("primitive {i}: color outside [0,1]")));
            }
            let used = if p.shape == Shape::Sphere { &p.size[..1] } else { &p.size[..] };
            if used.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return Err(Error::InvalidConfig(format!("primitive {i}: sizes must be > 0")));
            }
            if p.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteInput("primitive center"));
            }
        }
        Ok(())
    }

    /// Density-weighted color and summed density at `x`.
    pub fn field_eval(&self, x: &Vec3, d: &Vec3) -> (Rgb, f64) {
        let mut tau = 0.0;
        let mut rgb = [0.0; 3];
        for p in &self.primitives {
            let reach = p.bounding_radius() + self.falloff_margin;
            let dx = [x[0] - p.center[0], x[1] - p.center[1], x[2] - p.center[2]];
            if dot(&dx, &dx) > reach * reach {
                continue;
            }
            let w = p.density * falloff(p.signed_distance(x), self.falloff_margin);
            if w > 0.0 {
                let c = p.shaded_color(d);
                tau += w;
                for k in 0..3 {
                    rgb[k] += w * c[k];
                }
            }
        }
        if tau > 0.0 {
            for c in &mut rgb {
                *c /= tau;
            }
        }
        (rgb, tau)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let scene: SceneField = serde_json::from_str(s)?;
        scene.validate()?;
        Ok(scene)
    }
}

impl RadianceField for SceneField {
    fn eval(&self, x: &Vec3, d: &Vec3) -> (Rgb, f64) {
        self.field_eval(x, d)
    }

    fn bounding_sphere(&self) -> Option<(Vec3, f64)> {
        if self.primitives.is_empty() {
            return Some(([0.0; 3], 0.0));
        }
        let n = self.primitives.len() as f64;
        let mut c = [0.0; 3];
        for p in &self.primitives {
            for k in 0..3 {
                c[k] += p.center[k] / n;
            }
        }
        let r = self
            .primitives
            .iter()
            .map(|p| {
                let off = [p.center[0] - c[0], p.center[1] - c[1], p.center[2] - c[2]];
                norm(&off) + p.bounding_radius() + self.falloff_margin
            })
            .fold(0.0, f64::max);
        Some((c, r))
    }
}

/// How sample depths are placed inside the equal-width strata.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sampling {
    #[default]
    Midpoint,
    /// Uniform jitter inside each stratum, seeded per ray.
    Jittered { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayColor {
    pub rgb: Rgb,
    /// Transmittance left after the last sample.
    pub transmittance: f64,
}

/// Sample depths `t_m` and spacings `delta_m` for one ray.
pub fn sample_depths(intr: &CameraIntrinsics, sampling: Sampling, ray_index: u64) -> Vec<(f64, f64)> {
    let m = intr.samples_per_ray;
    let width = (intr.t_far - intr.t_near) / m as f64;
    let ts: Vec<f64> = match sampling {
        Sampling::Midpoint => (0..m)
            .map(|i| intr.t_near + (i as f64 + 0.5) * width)
            .collect(),
        Sampling::Jittered { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ray_index);
            (0..m)
                .map(|i| intr.t_near + (i as f64 + rng.random::<f64>()) * width)
                .collect()
        }
    };
    (0..m)
        .map(|i| {
            let delta = if i + 1 < m { ts[i + 1] - ts[i] } else { width };
            (ts[i], delta)
        })
        .collect()
}

fn ray_sphere_span(ray: &Ray, center: &Vec3, radius: f64) -> Option<(f64, f64)> {
    let oc = [
        ray.origin[0] - center[0],
        ray.origin[1] - center[1],
        ray.origin[2] - center[2],
    ];
    let b = dot(&oc, &ray.dir);
    let c = dot(&oc, &oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((-b - s, -b + s))
}

/// Per-sample transmittance `T(t_1) ... T(t_M)` along a ray.
pub fn transmittance_profile<F: RadianceField + ?Sized>(
    field: &F,
    ray: &Ray,
    intr: &CameraIntrinsics,
    sampling: Sampling,
    ray_index: u64,
) -> Vec<f64> {
    let mut trans = 1.0;
    sample_depths(intr, sampling, ray_index)
        .into_iter()
        .map(|(t, delta)| {
            let current = trans;
            let (_, tau) = field.eval(&ray.at(t), &ray.dir);
            trans *= (-tau * delta).exp();
            current
        })
        .collect()
}

pub fn render_ray<F: RadianceField + ?Sized>(
    field: &F,
    ray: &Ray,
    intr: &CameraIntrinsics,
    sampling: Sampling,
    ray_index: u64,
) -> RayColor {
    // Density is exactly zero outside the bounding sphere, so those samples
    // contribute nothing and leave transmittance unchanged.
    let span = match field.bounding_sphere() {
        Some((c, r)) => match ray_sphere_span(ray, &c, r) {
            Some(s) => s,
            None => {
                return RayColor {
                    rgb: [0.0; 3],
                    transmittance: 1.0,
                }
            }
        },
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let mut trans = 1.0;
    let mut rgb = [0.0; 3];
    for (t, delta) in sample_depths(intr, sampling, ray_index) {
        if t < span.0 || t > span.1 {
            continue;
        }
        let (c, tau) = field.eval(&ray.at(t), &ray.dir);
        if tau <= 0.0 {
            continue;
        }
        let keep = (-tau * delta).exp();
        let weight = trans * (1.0 - keep);
        for k in 0..3 {
            rgb[k] += weight * c[k];
        }
        trans *= keep;
    }
    RayColor {
        rgb: rgb.map(|c| c.clamp(0.0, 1.0)),
        transmittance: trans,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderedImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples, each channel in [0, 1].
    pub pixels: Vec<f64>,
}

impl RenderedImage {
    pub fn black(width: usize, height: usize) -> Self {
        RenderedImage {
            width,
            height,
            pixels: vec![0.0; width * height * 3],
        }
    }

    pub fn pixel(&self, row: usize, col: usize) -> Rgb {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let img = image::RgbImage::from_raw(self.width as u32, self.height as u32, bytes)
            .ok_or(Error::ShapeMismatch {
                expected: self.width * self.height * 3,
                got: self.pixels.len(),
            })?;
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    /// One line per pixel in row-major order: `pixel,r,g,b`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "pixel,r,g,b")?;
        for (i, px) in self.pixels.chunks_exact(3).enumerate() {
            writeln!(out, "{i},{},{},{}", px[0], px[1], px[2])?;
        }
        Ok(())
    }
}

pub fn render_image<F: RadianceField + ?Sized>(
    field: &F,
    pose: &CameraPose,
    intr: &CameraIntrinsics,
) -> RenderedImage {
    render_image_with(field, pose, intr, Sampling::Midpoint)
}

pub fn render_image_with<F: RadianceField + ?Sized>(
    field: &F,
    pose: &CameraPose,
    intr: &CameraIntrinsics,
    sampling: Sampling,
) -> RenderedImage {
    let rays = generate_rays(pose, intr);
    let colors: Vec<Rgb> = rays
        .par_iter()
        .enumerate()
        .map(|(i, ray)| render_ray(field, ray, intr, sampling, i as u64).rgb)
        .collect();
    RenderedImage {
        width: intr.width,
        height: intr.height,
        pixels: colors.into_iter().flatten().collect(),
    }
}

pub fn save_library(scenes: &[SceneField], path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(scenes)?)?;
    Ok(())
}

pub fn load_library(path: &Path) -> Result<Vec<SceneField>> {
    let scenes: Vec<SceneField> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    for s in &scenes {
        s.validate()?;
    }
    Ok(scenes)
}

pub use crate::library::make_object_library;
