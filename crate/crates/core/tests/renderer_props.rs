use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viewlab::geometry::*;
use viewlab::renderer::*;

/// Constant density everywhere: every ray is fully covered.
struct Fog {
    tau: f64,
    color: Rgb,
}

impl RadianceField for Fog {
    fn eval(&self, _: &Vec3, _: &Vec3) -> (Rgb, f64) {
        (self.color, self.tau)
    }
}

fn axis_ray() -> Ray {
    Ray {
        origin: [0.0, 4.0, 0.0],
        dir: [0.0, -1.0, 0.0],
    }
}

fn intr_with(m: usize) -> CameraIntrinsics {
    CameraIntrinsics {
        samples_per_ray: m,
        ..Default::default()
    }
}

#[test]
fn covering_slab_opacity_matches_closed_form() {
    for tau in [0.05, 0.1, 0.3, 1.0] {
        let intr = intr_with(1024);
        let out = render_ray(&Fog { tau, color: [1.0; 3] }, &axis_ray(), &intr, Sampling::Midpoint, 0);
        let expected = 1.0 - (-tau * (intr.t_far - intr.t_near)).exp();
        assert!((1.0 - out.transmittance - expected).abs() < 1e-3);
        assert!((out.rgb[0] - expected).abs() < 1e-3);
    }
}

/// Box of half-thickness 0.5 across the ray with a hard edge: the ray path
/// inside is exactly 1 long.
fn hard_slab(tau: f64) -> SceneField {
    SceneField::new(
        0,
        vec![Primitive {
            shape: Shape::Box,
            center: [0.0; 3],
            size: [2.0, 0.5, 2.0],
            density: tau,
            color: [1.0; 3],
            view_dependence: 0.0,
        }],
    )
    .unwrap()
    .with_margin(0.0)
    .unwrap()
}

#[test]
fn finite_slab_converges_within_quadrature_bound() {
    let tau = 0.8;
    let exact = 1.0 - (-tau * 1.0f64).exp();
    let scene = hard_slab(tau);
    let mut prev_err = f64::INFINITY;
    for m in [64, 128, 256, 512, 1024] {
        let intr = intr_with(m);
        let step = (intr.t_far - intr.t_near) / m as f64;
        let out = render_ray(&scene, &axis_ray(), &intr, Sampling::Midpoint, 0);
        let err = (1.0 - out.transmittance - exact).abs();
        // Each boundary can be misplaced by at most one stratum.
        assert!(err <= tau * step + 1e-12, "M={m} err={err}");
        assert!(err <= prev_err + 1e-12);
        prev_err = err;
    }
}

#[test]
fn opaque_front_primitive_hides_the_back() {
    let front = Primitive {
        shape: Shape::Sphere,
        center: [0.0, 1.0, 0.0],
        size: [0.5; 3],
        density: 1e6,
        color: [0.9, 0.1, 0.2],
        view_dependence: 0.0,
    };
    let back = Primitive {
        center: [0.0, -1.0, 0.0],
        color: [0.1, 0.8, 0.3],
        density: 5.0,
        ..front.clone()
    };
    let scene = SceneField::new(0, vec![front, back]).unwrap();
    let out = render_ray(&scene, &axis_ray(), &intr_with(256), Sampling::Midpoint, 0);
    for k in 0..3 {
        assert!((out.rgb[k] - [0.9, 0.1, 0.2][k]).abs() < 1e-4);
    }
}

#[test]
fn transmittance_never_increases_on_random_rays() {
    let lib = make_object_library(4, 3, 5).unwrap();
    let bounds = ViewpointBounds::standard();
    let intr = CameraIntrinsics::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..10_000u64 {
        let scene = &lib[rng.random_range(0..lib.len())];
        let u: [f64; 6] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let pose = camera_pose(&bounds.tanh_transform(&u).unwrap(), &BASE_POSITION).unwrap();
        let dir = normalize(&[
            pose.forward()[0] + rng.random_range(-0.3..0.3),
            pose.forward()[1] + rng.random_range(-0.3..0.3),
            pose.forward()[2] + rng.random_range(-0.3..0.3),
        ]);
        let ray = Ray { origin: pose.position, dir };
        let sampling = if i % 2 == 0 { Sampling::Midpoint } else { Sampling::Jittered { seed: i } };
        let profile = transmittance_profile(scene, &ray, &intr, sampling, i);
        assert_eq!(profile[0], 1.0);
        for w in profile.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}

#[test]
fn centered_sphere_is_yaw_symmetric() {
    let scene = SceneField::new(
        0,
        vec![Primitive {
            shape: Shape::Sphere,
            center: [0.0; 3],
            size: [0.8; 3],
            density: 4.0,
            color: [0.3, 0.6, 0.9],
            view_dependence: 0.0,
        }],
    )
    .unwrap();
    let intr = CameraIntrinsics::default();
    let render = |psi: f64| {
        let pose = camera_pose(&Viewpoint { psi, phi: 40.0, ..Viewpoint::ZERO }, &BASE_POSITION).unwrap();
        render_image(&scene, &pose, &intr)
    };
    let a = render(0.0);
    for psi in [37.0, 90.0, -150.0] {
        let b = render(psi);
        for (x, y) in a.pixels.iter().zip(&b.pixels) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}

#[test]
fn rendering_is_deterministic() {
    let lib = make_object_library(3, 1, 2).unwrap();
    let pose = camera_pose(&Viewpoint { psi: 12.0, phi: 77.0, dx: 0.2, ..Viewpoint::ZERO }, &BASE_POSITION).unwrap();
    let intr = CameraIntrinsics::default();
    for sampling in [Sampling::Midpoint, Sampling::Jittered { seed: 4 }] {
        let a = render_image_with(&lib[1], &pose, &intr, sampling);
        let b = render_image_with(&lib[1], &pose, &intr, sampling);
        assert_eq!(a, b);
    }
}

#[test]
fn empty_scene_is_black() {
    let pose = camera_pose(&Viewpoint::ZERO, &BASE_POSITION).unwrap();
    let img = render_image(&SceneField::empty(), &pose, &CameraIntrinsics::default());
    assert!(img.pixels.iter().all(|&p| p == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compositing_weights_sum_to_at_most_one(tau in 0.0f64..50.0, m in 2usize..300) {
        let out = render_ray(&Fog { tau, color: [1.0; 3] }, &axis_ray(), &intr_with(m), Sampling::Midpoint, 0);
        // With white emission the color channel is the sum of the weights.
        prop_assert!(out.rgb[0] <= 1.0 + 1e-9);
        prop_assert!((out.rgb[0] - (1.0 - out.transmittance)).abs() < 1e-9);
    }

    #[test]
    fn library_renders_stay_in_unit_range(seed in 0u64..50, psi in -180.0f64..180.0, phi in 20.0f64..160.0) {
        let lib = make_object_library(5, 1, seed).unwrap();
        let pose = camera_pose(&Viewpoint { psi, phi, ..Viewpoint::ZERO }, &BASE_POSITION).unwrap();
        let intr = CameraIntrinsics { width: 8, height: 8, ..Default::default() };
        for scene in &lib {
            let img = render_image(scene, &pose, &intr);
            prop_assert!(img.pixels.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }
}
