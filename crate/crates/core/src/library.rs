//! Procedural object library: a few shape archetypes, one per class, with
//! seeded per-object jitter of sizes, offsets and colors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::renderer::{Primitive, Rgb, SceneField, Shape};

const TAN: Rgb = [0.80, 0.68, 0.48];
const YELLOW: Rgb = [0.92, 0.82, 0.30];
const GREY: Rgb = [0.60, 0.60, 0.62];

const DENSITY: f64 = 12.0;

fn prim(shape: Shape, center: [f64; 3], size: [f64; 3], color: Rgb) -> Primitive {
    Primitive {
        shape,
        center,
        size,
        density: DENSITY,
        color,
        view_dependence: 0.0,
    }
}

/// Archetype templates; classes beyond the template count reuse a template
/// with a rotated palette.
fn archetype(index: usize) -> Vec<Primitive> {
    use Shape::*;
    match index {
        // lamp: thin pillar with a round head
        0 => vec![
            prim(Box, [0.0, 0.0, -0.35], [0.16, 0.16, 0.65], TAN),
            prim(Sphere, [0.0, 0.0, 0.6], [0.42; 3], YELLOW),
        ],
        // table: wide slab on a post, marker on one long edge
        1 => vec![
            prim(Box, [0.0, 0.0, 0.2], [0.9, 0.55, 0.1], TAN),
            prim(Box, [0.0, 0.0, -0.4], [0.14, 0.14, 0.5], GREY),
            prim(Sphere, [0.0, 0.5, 0.38], [0.16; 3], YELLOW),
        ],
        // dumbbell: two unequal balls joined by a bar
        2 => vec![
            prim(Sphere, [0.7, 0.0, 0.0], [0.42; 3], YELLOW),
            prim(Sphere, [-0.7, 0.0, 0.0], [0.34; 3], TAN),
            prim(Box, [0.0, 0.0, 0.0], [0.7, 0.1, 0.1], GREY),
        ],
        // snowman: stacked balls with a nose
        3 => vec![
            prim(Sphere, [0.0, 0.0, -0.45], [0.5; 3], GREY),
            prim(Sphere, [0.0, 0.0, 0.3], [0.34; 3], TAN),
            prim(Sphere, [0.0, 0.32, 0.32], [0.12; 3], YELLOW),
        ],
        // disc: flattened ellipsoid with a knob
        _ => vec![
            prim(Ellipsoid, [0.0, 0.0, 0.0], [0.9, 0.9, 0.25], TAN),
            prim(Sphere, [0.45, 0.0, 0.25], [0.2; 3], YELLOW),
        ],
    }
}

const ARCHETYPES: usize = 5;

fn rotate_palette(c: Rgb, shift: usize) -> Rgb {
    [c[shift % 3], c[(shift + 1) % 3], c[(shift + 2) % 3]]
}

/// Builds `num_classes * objects_per_class` scenes ordered by class.
pub fn make_object_library(
    num_classes: usize,
    objects_per_class: usize,
    seed: u64,
) -> Result<Vec<SceneField>> {
    if num_classes < 2 {
        return Err(Error::InvalidConfig("need at least 2 classes".into()));
    }
    if objects_per_class < 1 {
        return Err(Error::InvalidConfig("need at least 1 object per class".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenes = Vec::with_capacity(num_classes * objects_per_class);
    for class in 0..num_classes {
        let template = archetype(class % ARCHETYPES);
        let shift = class / ARCHETYPES;
        for _ in 0..objects_per_class {
            let primitives = template
                .iter()
                .map(|p| {
                    let scale: f64 = rng.random_range(0.88..1.12);
                    let mut q = p.clone();
                    for k in 0..3 {
                        q.size[k] *= scale * rng.random_range(0.95..1.05);
                        q.center[k] += rng.random_range(-0.06..0.06);
                    }
                    let base = rotate_palette(p.color, shift);
                    for k in 0..3 {
                        q.color[k] = (base[k] + rng.random_range(-0.07..0.07)).clamp(0.0, 1.0);
                    }
                    q
                })
                .collect();
            scenes.push(SceneField::new(class, primitives)?);
        }
    }
    Ok(scenes)
}
